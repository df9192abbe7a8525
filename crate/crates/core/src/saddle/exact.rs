//! Finite-`n` auxiliary-field representation
//!
//! `F_2(l1, l2) = (-1)^n n^2 / (2 pi^2) sqrt(|k4|/pi) int dp int_{H_2} dQ
//!   exp{-n tr Q^2 / 2 - |k4| p^2} (det(Q - i L) + 2 p eps(k4) / n)^n`
//!
//! with `eps(x) = x` for `x > 0` and `-i x` for `x < 0`; for `k4 = 0` the
//! `p` field is absent. Writing `Q = [[t1, u], [conj u, t2]]`, the integrand
//! depends on `u` only through `r = |u|^2`, and `d^2u = pi dr`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::ensembles::EntryLaw;
use crate::quadrature::{gauss_hermite, gauss_laguerre};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactValue {
    pub value: f64,
    /// Imaginary part left over by the quadrature; zero in exact arithmetic.
    pub imag_residual: f64,
    /// Gauss nodes per dimension of the accepted evaluation.
    pub nodes: usize,
}

fn epsilon(kappa4: f64) -> Complex64 {
    if kappa4 > 0.0 {
        Complex64::new(kappa4, 0.0)
    } else {
        Complex64::new(0.0, -kappa4)
    }
}

/// Tensor Gauss rule with `k` nodes per dimension: Hermite in `t1`, `t2`
/// (and `p`), Laguerre in `n r`.
fn evaluate(n: usize, lambdas: [f64; 2], kappa4: f64, k: usize) -> (Complex64, f64) {
    let nf = n as f64;
    let gh = gauss_hermite(k);
    let gl = gauss_laguerre(k);
    let t_scale = (2.0 / nf).sqrt();
    // int dt e^{-n t^2/2} f(t) = t_scale sum_i w_i f(t_scale x_i)
    // int d^2u e^{-n|u|^2} f(|u|^2) = (pi/n) sum_i w_i f(x_i / n)
    let q_norm = t_scale * t_scale * PI / nf;
    let with_p = kappa4 != 0.0;
    let (p_nodes, p_weights): (Vec<f64>, Vec<f64>) = if with_p {
        // sqrt(|k4|/pi) int dp e^{-|k4| p^2} f(p) = pi^{-1/2} sum_i w_i f(x_i / sqrt|k4|)
        let s = kappa4.abs().sqrt();
        (
            gh.nodes.iter().map(|x| x / s).collect(),
            gh.weights.iter().map(|w| w / PI.sqrt()).collect(),
        )
    } else {
        (vec![0.0], vec![1.0])
    };
    let shift = 2.0 * epsilon(kappa4) / nf;
    let il1 = Complex64::new(0.0, lambdas[0]);
    let il2 = Complex64::new(0.0, lambdas[1]);
    let mut total = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (&x1, &w1) in gh.nodes.iter().zip(&gh.weights) {
        let a = Complex64::new(t_scale * x1, 0.0) - il1;
        for (&x2, &w2) in gh.nodes.iter().zip(&gh.weights) {
            let b = Complex64::new(t_scale * x2, 0.0) - il2;
            let ab = a * b;
            for (&xr, &wr) in gl.nodes.iter().zip(&gl.weights) {
                let det = ab - xr / nf;
                let w = w1 * w2 * wr;
                for (&p, &wp) in p_nodes.iter().zip(&p_weights) {
                    let term = (det + shift * p).powu(n as u32) * (w * wp);
                    total += term;
                    scale += term.norm();
                }
            }
        }
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let pref = sign * nf * nf / (2.0 * PI * PI) * q_norm;
    (total * pref, scale * pref.abs())
}

/// `F_2(lambda1, lambda2)` from the auxiliary-field representation.
///
/// The integrand is a polynomial against Gaussian and exponential weights,
/// so a Gauss rule with enough nodes is exact; the evaluation starts at
/// `n/2 + 2` nodes per dimension and doubles until two successive values
/// agree to `tol` relative, failing with [`Error::NonConvergence`] otherwise.
pub fn exact_f2_representation(
    n: usize,
    lambdas: [f64; 2],
    law: &EntryLaw,
    tol: f64,
) -> Result<ExactValue> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if lambdas.iter().any(|l| !l.is_finite()) {
        return Err(Error::Domain("spectral points must be finite".into()));
    }
    law.validate()?;
    let kappa4 = law.kappa4();
    let mut k = n / 2 + 2;
    let (mut coarse, _) = evaluate(n, lambdas, kappa4, k);
    for _ in 0..4 {
        let k2 = 2 * k;
        let (fine, scale) = evaluate(n, lambdas, kappa4, k2);
        let diff = (fine.re - coarse.re).abs();
        if diff <= tol * fine.re.abs() || diff <= 1e-13 * scale {
            return Ok(ExactValue {
                value: fine.re,
                imag_residual: fine.im,
                nodes: k2,
            });
        }
        coarse = fine;
        k = k2;
    }
    let (fine, _) = evaluate(n, lambdas, kappa4, 2 * k);
    Err(Error::NonConvergence {
        coarse: coarse.re,
        fine: fine.re,
    })
}
