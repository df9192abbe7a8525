//! Correlation functions of characteristic polynomials of Hermitian Wigner
//! matrices.
//!
//! For `H = W / sqrt(n)` with independent symmetric entries, the crate
//! estimates `F_2m(L) = E prod_j det(l_j - H)` by Monte Carlo, computes it
//! exactly at tiny `n` by moment expansion, evaluates the auxiliary-field and
//! contour integral representations of `F_2` by quadrature, and checks the
//! sine-kernel limit together with its fourth-cumulant prefactor.
//!
//! Module map:
//!
//! - [`ensembles`]: entry laws, Wigner sampling, reproducible RNG streams.
//! - [`detmc`]: signed-log determinants and the streaming Monte Carlo estimator.
//! - [`theory`]: closed-form densities, normalizations and the limiting kernel.
//! - [`saddle`]: phase function, saddle points, integral representations.
//! - [`hciz`]: Haar unitaries and the Harish-Chandra/Itzykson-Zuber check.
//! - [`oracle`]: exact polynomial expansion of `F_2m` for `n <= 3`.
//! - [`quadrature`]: Gauss rules shared by the integral evaluators.

pub mod detmc;
pub mod ensembles;
mod error;
pub mod hciz;
pub mod oracle;
pub mod quadrature;
pub mod saddle;
pub mod theory;

pub use error::{Error, Result};
pub use num_complex::Complex64;
