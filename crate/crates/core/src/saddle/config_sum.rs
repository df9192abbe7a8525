//! Leading order of the saddle-point expansion as a sum over sign
//! configurations, and the Cauchy determinant identity behind it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::detmc::real_det;
use crate::theory::vandermonde;
use crate::{Error, Result};

/// `(-1)^{m(m-1)/2} prod_{k<l} (a_k - a_l)(b_k - b_l) / prod_{k,l} (a_k - b_l)`.
pub fn cauchy_det_closed_form(a: &[f64], b: &[f64]) -> Result<f64> {
    let m = a.len();
    if b.len() != m {
        return Err(Error::Domain("a and b must have equal length".into()));
    }
    let mut num = if (m * m.saturating_sub(1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
    for k in 0..m {
        for l in (k + 1)..m {
            num *= (a[k] - a[l]) * (b[k] - b[l]);
        }
    }
    let mut den = 1.0;
    for &ak in a {
        for &bl in b {
            den *= ak - bl;
        }
    }
    if den == 0.0 {
        return Err(Error::Singular("a_k = b_l for some k, l".into()));
    }
    Ok(num / den)
}

/// `|det[1/(a_k - b_j)] - closed form|`.
pub fn cauchy_det_identity_check(a: &[f64], b: &[f64]) -> Result<f64> {
    let m = a.len();
    if m == 0 || b.len() != m {
        return Err(Error::Domain("a and b must have equal positive length".into()));
    }
    if vandermonde(a).is_zero() || vandermonde(b).is_zero() {
        return Err(Error::Singular("repeated entries".into()));
    }
    let closed = cauchy_det_closed_form(a, b)?;
    let c: Vec<f64> = (0..m * m).map(|i| 1.0 / (a[i / m] - b[i % m])).collect();
    Ok((real_det(&c, m)? - closed).abs())
}

fn subset(v: &[f64], mask: u32, want: bool) -> (Vec<f64>, Vec<usize>) {
    let idx: Vec<usize> = (0..v.len()).filter(|&i| ((mask >> i) & 1 == 1) == want).collect();
    (idx.iter().map(|&i| v[i]).collect(), idx)
}

// Sign of the permutation listing `first` then `second` (each increasing).
fn split_sign(first: &[usize], second: &[usize]) -> f64 {
    let inversions = first
        .iter()
        .map(|&i| second.iter().filter(|&&j| j < i).count())
        .sum::<usize>();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Coefficient of `exp{i pi sum_j alpha_j xi_j}` in the expansion of
/// `det[sinc(pi(xi_j - xi_{m+k}))] / (Delta Delta)`, for the sign pattern
/// `plus_a` on the first block and `plus_b` on the second (bit `i` set means
/// `alpha = +`).
fn configuration_coefficient(a: &[f64], b: &[f64], plus_a: u32, plus_b: u32) -> Result<Complex64> {
    let m = a.len();
    // rows with alpha = + pair with columns whose exponent sign is -, and vice versa
    let (ap, ap_idx) = subset(a, plus_a, true);
    let (am, am_idx) = subset(a, plus_a, false);
    let (bm, bm_idx) = subset(b, plus_b, false);
    let (bp, bp_idx) = subset(b, plus_b, true);
    if ap.len() != bm.len() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let block = |x: &[f64], y: &[f64]| {
        if x.is_empty() {
            Ok(1.0)
        } else {
            cauchy_det_closed_form(x, y)
        }
    };
    let det = split_sign(&ap_idx, &am_idx)
        * split_sign(&bm_idx, &bp_idx)
        * block(&ap, &bm)?
        * block(&am, &bp)?;
    let sign = if am.len() % 2 == 0 { 1.0 } else { -1.0 };
    let denom = Complex64::new(0.0, 2.0 * PI).powu(m as u32)
        * vandermonde(a).to_f64()
        * vandermonde(b).to_f64();
    Ok(sign * det / denom)
}

/// `e^{m(m-1) k4 (lambda0^2 - 2)^2 / 2} pi^{-2m(m-1)}` times the sum over all
/// sign configurations with `m` pluses of the Cauchy coefficient times
/// `exp{i pi sum_j alpha_j xi_j}`. Agrees with the determinantal right-hand
/// side for distinct points.
pub fn config_sum_leading(m: usize, lambda0: f64, kappa4: f64, xi: &[f64]) -> Result<f64> {
    if m == 0 || xi.len() != 2 * m {
        return Err(Error::Domain(format!("expected 2m = {} points", 2 * m)));
    }
    if m > 16 {
        return Err(Error::SizeLimit("config_sum_leading supports m <= 16".into()));
    }
    if !(lambda0.abs() < 2.0) {
        return Err(Error::Domain(format!("lambda0 = {lambda0} must lie in (-2, 2)")));
    }
    let (a, b) = xi.split_at(m);
    if vandermonde(a).is_zero() || vandermonde(b).is_zero() {
        return Err(Error::Singular(
            "coincident points; use the confluent sine-kernel path".into(),
        ));
    }
    if a.iter().any(|x| b.contains(x)) {
        return Err(Error::Singular("xi_j = xi_{m+k} for some j, k".into()));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for plus_a in 0u32..(1 << m) {
        for plus_b in 0u32..(1 << m) {
            if plus_a.count_ones() + plus_b.count_ones() != m as u32 {
                continue;
            }
            let c = configuration_coefficient(a, b, plus_a, plus_b)?;
            let mut phase = 0.0;
            for (i, &x) in a.iter().enumerate() {
                phase += if (plus_a >> i) & 1 == 1 { x } else { -x };
            }
            for (i, &y) in b.iter().enumerate() {
                phase += if (plus_b >> i) & 1 == 1 { y } else { -y };
            }
            total += c * Complex64::from_polar(1.0, PI * phase);
        }
    }
    let mf = m as f64;
    let l2 = lambda0 * lambda0 - 2.0;
    let pref = (mf * (mf - 1.0) * kappa4 * l2 * l2 / 2.0).exp() / PI.powf(2.0 * mf * (mf - 1.0));
    Ok(pref * total.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::RngStream;
    use crate::theory::{sine_kernel, theorem1_rhs, TheoryParams};

    fn separated(rng: &mut RngStream, count: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..count).map(|_| 4.0 * rng.uniform() - 2.0).collect();
            let ok = (0..count).all(|i| (0..i).all(|j| (v[i] - v[j]).abs() > 0.1));
            if ok {
                return v;
            }
        }
    }

    #[test]
    fn cauchy_examples() {
        assert_eq!(cauchy_det_identity_check(&[2.0], &[1.0]).unwrap(), 0.0);
        assert!(cauchy_det_identity_check(&[0.0, 1.0], &[3.0, 5.0]).unwrap() < 1e-12);
        let mut rng = RngStream::new(1, 0);
        for _ in 0..20 {
            let v = separated(&mut rng, 6);
            assert!(cauchy_det_identity_check(&v[..3], &v[3..]).unwrap() < 1e-10);
        }
        assert!(cauchy_det_identity_check(&[1.0, 1.0], &[0.0, 2.0]).is_err());
    }

    #[test]
    fn m1_reconstructs_the_sine() {
        for &(x, y) in &[(0.3, -0.2), (1.7, 0.4), (-0.05, 0.9)] {
            let v = config_sum_leading(1, 0.4, -0.5, &[x, y]).unwrap();
            assert!((v - sine_kernel(x - y)).abs() < 1e-10);
        }
    }

    #[test]
    fn extreme_configuration_matches_closed_term() {
        // alpha = (-...-, +...+) carries i^{m(m+1)} / ((2 i pi)^m prod (xi_i - xi_{m+j}))
        let xi = [0.1, 0.8, -0.5, 0.35];
        let (a, b) = xi.split_at(2);
        let c = configuration_coefficient(a, b, 0, 0b11).unwrap();
        let mut prod = 1.0;
        for x in a {
            for y in b {
                prod *= x - y;
            }
        }
        let expected = Complex64::new(0.0, 1.0).powu(6)
            / (Complex64::new(0.0, 2.0 * PI).powu(2) * prod);
        assert!((c - expected).norm() < 1e-12 * expected.norm());
    }

    #[test]
    fn matches_determinantal_form() {
        let mut rng = RngStream::new(2, 0);
        for m in 2..=3 {
            for &(l0, k4) in &[(0.0, 0.0), (1.0, -0.5)] {
                for _ in 0..10 {
                    let xi = separated(&mut rng, 2 * m);
                    let lhs = config_sum_leading(m, l0, k4, &xi).unwrap();
                    let rhs = theorem1_rhs(&TheoryParams::new(l0, 10, m, k4, xi.clone()).unwrap()).unwrap();
                    assert!((lhs - rhs).abs() < 1e-8 * rhs.abs().max(1e-3), "m={m}: {lhs} vs {rhs}");
                }
            }
        }
    }

    #[test]
    fn coincident_points_are_refused() {
        assert!(config_sum_leading(2, 0.0, 0.0, &[0.1, 0.1, 0.3, 0.5]).is_err());
    }
}
