//! Integral representations of `F_2` and the steepest-descent machinery for
//! the bulk limit.
//!
//! - [`phase`]: the phase function `V(t, lambda0)`, its saddle points and a
//!   numerical check of the landscape of `Re V` on the real line.
//! - [`exact`]: the finite-`n` auxiliary-field representation of `F_2`.
//! - [`contour`]: the two-dimensional contour integral for `D_2^{-1} F_2`.
//! - [`config_sum`]: the leading-order sum over saddle configurations and the
//!   Cauchy determinant identity it relies on.

pub mod config_sum;
pub mod contour;
pub mod exact;
pub mod phase;

pub use config_sum::{cauchy_det_closed_form, cauchy_det_identity_check, config_sum_leading};
pub use contour::{contour_f2_asymptotic, contour_sensitivity, ContourSpec, ContourValue};
pub use exact::{exact_f2_representation, ExactValue};
pub use phase::{
    laplace_ratio, phase_v, saddle_data, verify_landscape, LandscapeReport, PhaseFunction,
    SaddleData,
};
