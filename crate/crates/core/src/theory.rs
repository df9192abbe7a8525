//! Closed-form quantities of the bulk limit: semicircle density, the
//! normalization `D_n`, the sine-kernel determinant ratio and the
//! limiting right-hand side.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::detmc::{complex_det, real_det, SignedLog};
use crate::{Error, Result};

/// Minimum in-block gap below which [`sine_kernel_ratio`] switches to the
/// divided-difference evaluation.
pub const CONFLUENT_GAP: f64 = 1e-3;

const CONTOUR_NODES: usize = 128;

/// Semicircle density `(1/2pi) sqrt(4 - lambda^2)`.
pub fn rho_sc(lambda: f64) -> Result<f64> {
    if !(lambda.abs() <= 2.0) {
        return Err(Error::Domain(format!("rho_sc: |{lambda}| > 2")));
    }
    Ok((4.0 - lambda * lambda).max(0.0).sqrt() / (2.0 * PI))
}

/// `lambda / (2 rho_sc(lambda))`.
pub fn alpha(lambda: f64) -> Result<f64> {
    if !(lambda.abs() < 2.0) {
        return Err(Error::Domain(format!("alpha: |{lambda}| >= 2")));
    }
    Ok(lambda / (2.0 * rho_sc(lambda)?))
}

/// `sin(u) / u`, with the Taylor polynomial near zero.
pub fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        let u2 = u * u;
        1.0 - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

/// The sine kernel `sin(pi x) / (pi x)`.
pub fn sine_kernel(x: f64) -> f64 {
    sinc(PI * x)
}

fn sinc_complex(u: Complex64) -> Complex64 {
    if u.norm() < 1e-4 {
        let u2 = u * u;
        Complex64::new(1.0, 0.0) - u2 / 6.0 + u2 * u2 / 120.0
    } else {
        u.sin() / u
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoryParams {
    pub lambda0: f64,
    pub n: usize,
    pub m: usize,
    pub kappa4: f64,
    pub xi: Vec<f64>,
}

impl TheoryParams {
    pub fn new(lambda0: f64, n: usize, m: usize, kappa4: f64, xi: Vec<f64>) -> Result<Self> {
        let p = Self {
            lambda0,
            n,
            m,
            kappa4,
            xi,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0.abs() < 2.0) {
            return Err(Error::Domain(format!(
                "lambda0 = {} must lie in (-2, 2)",
                self.lambda0
            )));
        }
        if self.n == 0 || self.m == 0 {
            return Err(Error::Domain("n and m must be positive".into()));
        }
        if self.xi.len() != 2 * self.m {
            return Err(Error::Domain(format!(
                "xi has {} entries, expected {}",
                self.xi.len(),
                2 * self.m
            )));
        }
        if !self.kappa4.is_finite() || self.xi.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("parameters must be finite".into()));
        }
        Ok(())
    }
}

/// Leading term `2pi exp{n(lambda0^2 - 2)/2 + 2 alpha(lambda0) xi + kappa4}`.
/// The `1 + o(1)` correction is not modeled.
pub fn d_n(xi: f64, params: &TheoryParams) -> Result<SignedLog> {
    let l0 = params.lambda0;
    let a = alpha(l0)?;
    Ok(SignedLog::from_ln(
        (2.0 * PI).ln() + params.n as f64 * (l0 * l0 - 2.0) / 2.0 + 2.0 * a * xi + params.kappa4,
    ))
}

/// `(n rho_sc)^{m^2} prod_l sqrt(D_n(xi_l))`, the scale that turns
/// `F_2m` into a quantity with a finite bulk limit.
pub fn normalization(params: &TheoryParams) -> Result<SignedLog> {
    params.validate()?;
    let nr = params.n as f64 * rho_sc(params.lambda0)?;
    let mut total = SignedLog::from_ln((params.m * params.m) as f64 * nr.ln());
    for &x in &params.xi {
        total = total * SignedLog::from_ln(0.5 * d_n(x, params)?.logmag());
    }
    Ok(total)
}

/// `prod_{i<j} (x_j - x_i)`.
pub fn vandermonde(values: &[f64]) -> SignedLog {
    let mut total = SignedLog::ONE;
    for j in 0..values.len() {
        for i in 0..j {
            total = total * SignedLog::from_f64(values[j] - values[i]);
        }
    }
    total
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SineKernelValue {
    pub value: f64,
    pub confluent: bool,
}

fn min_gap(v: &[f64]) -> f64 {
    let mut g = f64::INFINITY;
    for j in 0..v.len() {
        for i in 0..j {
            g = g.min((v[j] - v[i]).abs());
        }
    }
    g
}

/// `det[sinc(pi(xi_i - xi_{m+j}))] / (Delta(xi_1..m) Delta(xi_{m+1..2m}))`.
///
/// With well-separated points this is evaluated directly. When two points of
/// the same block come closer than [`CONFLUENT_GAP`], the ratio is instead
/// computed as `det[K[x_1..x_i; y_1..y_j]]`, the determinant of the mixed
/// divided differences of the kernel, each given by a double contour
/// integral. This form is smooth through coincident points.
pub fn sine_kernel_ratio(xi: &[f64]) -> Result<SineKernelValue> {
    if xi.is_empty() || xi.len() % 2 != 0 || xi.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(
            "sine_kernel_ratio needs a positive even number of finite points".into(),
        ));
    }
    let m = xi.len() / 2;
    let (x, y) = xi.split_at(m);
    if m == 1 {
        return Ok(SineKernelValue {
            value: sine_kernel(x[0] - y[0]),
            confluent: false,
        });
    }
    if min_gap(x).min(min_gap(y)) >= CONFLUENT_GAP {
        let k: Vec<f64> = (0..m * m)
            .map(|idx| sine_kernel(x[idx / m] - y[idx % m]))
            .collect();
        let det = SignedLog::from_f64(real_det(&k, m)?);
        let ratio = det * (vandermonde(x) * vandermonde(y)).recip();
        return Ok(SineKernelValue {
            value: ratio.to_f64(),
            confluent: false,
        });
    }
    Ok(SineKernelValue {
        value: divided_difference_det(x, y)?,
        confluent: true,
    })
}

struct Circle {
    points: Vec<Complex64>,
    // weights[k][i] = r e^{i theta_k} / (N prod_{l<=i} (z_k - p_l))
    weights: Vec<Vec<Complex64>>,
}

fn circle_for(p: &[f64]) -> Circle {
    let center = p.iter().sum::<f64>() / p.len() as f64;
    let spread = p.iter().map(|v| (v - center).abs()).fold(0.0, f64::max);
    let radius = (2.0 * spread).max(0.5);
    let mut points = Vec::with_capacity(CONTOUR_NODES);
    let mut weights = Vec::with_capacity(CONTOUR_NODES);
    for k in 0..CONTOUR_NODES {
        let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / CONTOUR_NODES as f64);
        let z = center + radius * e;
        let mut w = e * radius / CONTOUR_NODES as f64;
        let mut row = Vec::with_capacity(p.len());
        for &pl in p {
            w /= z - pl;
            row.push(w);
        }
        points.push(z);
        weights.push(row);
    }
    Circle { points, weights }
}

fn divided_difference_det(x: &[f64], y: &[f64]) -> Result<f64> {
    let m = x.len();
    let cx = circle_for(x);
    let cy = circle_for(y);
    let mut d = vec![Complex64::new(0.0, 0.0); m * m];
    for (zk, wx) in cx.points.iter().zip(&cx.weights) {
        for (wl, wy) in cy.points.iter().zip(&cy.weights) {
            let kv = sinc_complex(PI * (zk - wl));
            for i in 0..m {
                let a = kv * wx[i];
                for j in 0..m {
                    d[i * m + j] += a * wy[j];
                }
            }
        }
    }
    Ok(complex_det(&d, m)?.re)
}

/// `exp{m(m-1) kappa4 (lambda0^2 - 2)^2 / 2} pi^{-2m(m-1)}` times the
/// sine-kernel ratio.
pub fn theorem1_rhs(params: &TheoryParams) -> Result<f64> {
    params.validate()?;
    let m = params.m as f64;
    let l2 = params.lambda0 * params.lambda0 - 2.0;
    let log_pref = m * (m - 1.0) * params.kappa4 * l2 * l2 / 2.0 - 2.0 * m * (m - 1.0) * PI.ln();
    let ratio = sine_kernel_ratio(&params.xi)?;
    Ok(log_pref.exp() * ratio.value)
}

/// The previously known `m = 1` asymptotic
/// `2pi exp{n(lambda0^2 - 2)/2 + alpha(xi1 + xi2) + |kappa4|} sinc(pi(xi1 - xi2))`,
/// with the absolute value on `kappa4` kept as printed in the literature.
pub fn gk_f2_asymptotic(params: &TheoryParams, xi1: f64, xi2: f64) -> Result<SignedLog> {
    let l0 = params.lambda0;
    let a = alpha(l0)?;
    let head = SignedLog::from_ln(
        (2.0 * PI).ln() + params.n as f64 * (l0 * l0 - 2.0) / 2.0 + a * (xi1 + xi2) + params.kappa4.abs(),
    );
    Ok(head * SignedLog::from_f64(sine_kernel(xi1 - xi2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::RngStream;
    use proptest::prelude::*;

    fn params(lambda0: f64, n: usize, m: usize, kappa4: f64, xi: Vec<f64>) -> TheoryParams {
        TheoryParams::new(lambda0, n, m, kappa4, xi).unwrap()
    }

    #[test]
    fn density_and_alpha() {
        assert!((rho_sc(0.0).unwrap() - 0.3183098862).abs() < 1e-10);
        assert_eq!(rho_sc(2.0).unwrap(), 0.0);
        assert_eq!(rho_sc(-2.0).unwrap(), 0.0);
        assert!((rho_sc(1.0).unwrap() - 0.2756644477).abs() < 1e-10);
        assert!(rho_sc(2.1).is_err());
        assert_eq!(alpha(0.0).unwrap(), 0.0);
        assert!((alpha(1.0).unwrap() - 1.8137993642).abs() < 1e-10);
        assert_eq!(alpha(-0.5).unwrap(), -alpha(0.5).unwrap());
        assert!(alpha(2.0).is_err());
    }

    #[test]
    fn d_n_examples() {
        let p4 = params(0.0, 4, 1, 0.0, vec![0.0, 0.0]);
        let expected = 2.0 * PI * (-4.0f64).exp();
        assert!((d_n(0.0, &p4).unwrap().to_f64() - expected).abs() < 1e-15);
        let p2 = params(0.0, 2, 1, 0.0, vec![0.0, 0.0]);
        let ratio = d_n(0.0, &p2).unwrap().logmag() - d_n(0.0, &p4).unwrap().logmag();
        assert!((ratio - 2.0).abs() < 1e-14);
        let a = params(2f64.sqrt(), 10, 1, 0.0, vec![0.0, 0.0]);
        let b = params(2f64.sqrt(), 1000, 1, 0.0, vec![0.0, 0.0]);
        assert!((d_n(0.0, &a).unwrap().logmag() - d_n(0.0, &b).unwrap().logmag()).abs() < 1e-12);
    }

    #[test]
    fn vandermonde_examples() {
        assert_eq!(vandermonde(&[3.0]), SignedLog::ONE);
        assert!((vandermonde(&[1.0, 2.0, 3.0]).to_f64() - 2.0).abs() < 1e-15);
        assert!(vandermonde(&[1.0, 1.0, 3.0]).is_zero());
        assert_eq!(vandermonde(&[2.0, 1.0]).sign(), -1);
    }

    #[test]
    fn sinc_examples() {
        let v = sine_kernel_ratio(&[0.3, 0.3]).unwrap();
        assert_eq!(v.value, 1.0);
        let v = sine_kernel_ratio(&[0.25, -0.25]).unwrap();
        assert!((v.value - 2.0 / PI).abs() < 1e-15);
        assert!((sinc(1e-5) - (1e-5f64).sin() / 1e-5).abs() < 1e-15);
    }

    #[test]
    fn confluent_m2_limit() {
        let at = |eps: f64| {
            sine_kernel_ratio(&[eps, 2.0 * eps, 3.0 * eps, 4.0 * eps])
                .unwrap()
                .value
        };
        let limit = PI * PI / 3.0;
        let exact = sine_kernel_ratio(&[0.0; 4]).unwrap();
        assert!(exact.confluent);
        assert!((exact.value - limit).abs() < 1e-10 * limit);
        // the ratio is even in the shift-free differences, so the error is O(eps^2)
        assert!((at(1e-2) - limit).abs() < 1e-2 * limit);
        assert!((at(1e-3) - limit).abs() < 1e-4 * limit);
    }

    #[test]
    fn confluent_path_matches_direct_path() {
        // just above the threshold the direct formula is still accurate
        let xi = [0.1, 0.1 + 2e-3, -0.4, 0.35];
        let direct = sine_kernel_ratio(&xi).unwrap();
        assert!(!direct.confluent);
        let x = &xi[..2];
        let y = &xi[2..];
        let dd = divided_difference_det(x, y).unwrap();
        assert!((dd - direct.value).abs() < 1e-9 * direct.value.abs());
    }

    #[test]
    fn confluent_continuity() {
        // split a point symmetrically so the first-order change vanishes
        let at = |g: f64| {
            sine_kernel_ratio(&[0.2 - g / 2.0, 0.2 + g / 2.0, -0.3, 0.5])
                .unwrap()
                .value
        };
        let a = at(1e-4);
        let b = at(1e-6);
        assert!((a - b).abs() < 1e-6 * b.abs());
        assert!((b - at(0.0)).abs() < 1e-9 * b.abs());
    }

    #[test]
    fn theorem1_rhs_prefactors() {
        for &(l0, k4) in &[(0.0, -0.5), (1.3, 2.0)] {
            let p = params(l0, 7, 1, k4, vec![0.4, -0.1]);
            assert_eq!(theorem1_rhs(&p).unwrap(), sine_kernel(0.5));
        }
        let xi = vec![0.1, 0.7, -0.2, 0.4];
        let ratio = sine_kernel_ratio(&xi).unwrap().value;
        let p = params(0.3, 5, 2, 0.0, xi.clone());
        assert!((theorem1_rhs(&p).unwrap() - ratio / PI.powi(4)).abs() < 1e-15);
        let p = params(0.0, 5, 2, -0.5, xi);
        let expected = (-2.0f64).exp() * ratio / PI.powi(4);
        assert!((theorem1_rhs(&p).unwrap() - expected).abs() < 1e-14 * expected.abs());
    }

    #[test]
    fn gk_examples() {
        let p = params(0.0, 2, 1, 0.0, vec![0.0, 0.0]);
        let expected = 2.0 * PI * (-2.0f64).exp();
        assert!((gk_f2_asymptotic(&p, 0.0, 0.0).unwrap().to_f64() - expected).abs() < 1e-14);
        // with kappa4 = 0 it equals sqrt(D(xi1) D(xi2)) sinc
        let p = params(0.8, 9, 1, 0.0, vec![0.3, -0.2]);
        let d = (d_n(0.3, &p).unwrap() * d_n(-0.2, &p).unwrap()).logmag() / 2.0;
        let gk = gk_f2_asymptotic(&p, 0.3, -0.2).unwrap();
        assert!((gk.logmag() - d - sine_kernel(0.5).ln()).abs() < 1e-12);
        let pos = params(0.8, 9, 1, 0.4, vec![0.0, 0.0]);
        let neg = params(0.8, 9, 1, -0.4, vec![0.0, 0.0]);
        assert_eq!(
            gk_f2_asymptotic(&pos, 0.1, 0.2).unwrap(),
            gk_f2_asymptotic(&neg, 0.1, 0.2).unwrap()
        );
        let dd = d_n(0.0, &pos).unwrap().logmag() - d_n(0.0, &neg).unwrap().logmag();
        assert!((dd - 0.8).abs() < 1e-14);
    }

    #[test]
    fn block_permutation_symmetry() {
        let mut rng = RngStream::new(5, 0);
        for _ in 0..20 {
            let xi: Vec<f64> = (0..6).map(|_| 2.0 * rng.uniform() - 1.0).collect();
            let v = sine_kernel_ratio(&xi).unwrap().value;
            let swapped = [xi[1], xi[0], xi[2], xi[3], xi[5], xi[4]];
            let w = sine_kernel_ratio(&swapped).unwrap().value;
            assert!((v - w).abs() < 1e-10 * v.abs().max(1e-3));
        }
    }

    proptest! {
        #[test]
        fn shift_invariance(
            xi in proptest::collection::vec(-1.0f64..1.0, 4),
            c in -3.0f64..3.0,
        ) {
            let v = sine_kernel_ratio(&xi).unwrap().value;
            let shifted: Vec<f64> = xi.iter().map(|x| x + c).collect();
            let w = sine_kernel_ratio(&shifted).unwrap().value;
            prop_assert!((v - w).abs() < 1e-10 * v.abs().max(1.0));
        }
    }
}
