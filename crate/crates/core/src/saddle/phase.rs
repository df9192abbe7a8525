use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quadrature::{composite_legendre, gauss_legendre};
use crate::{Error, Result};

/// `V(t) = t^2/2 + i lambda0 t/2 - log(t - i lambda0/2) - (4 - lambda0^2)/8`
/// with the principal logarithm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseFunction {
    lambda0: f64,
}

impl PhaseFunction {
    pub fn new(lambda0: f64) -> Result<Self> {
        if !(lambda0.abs() < 2.0) {
            return Err(Error::Domain(format!("lambda0 = {lambda0} must lie in (-2, 2)")));
        }
        Ok(Self { lambda0 })
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    /// Shifted variable `t - i lambda0/2`.
    pub fn shift(&self, t: Complex64) -> Complex64 {
        t - Complex64::new(0.0, self.lambda0 / 2.0)
    }

    pub fn eval(&self, t: Complex64) -> Result<Complex64> {
        let p = self.shift(t);
        if p == Complex64::new(0.0, 0.0) {
            return Err(Error::Domain("V is singular at t = i lambda0 / 2".into()));
        }
        let l = self.lambda0;
        Ok(t * t / 2.0 + Complex64::new(0.0, l / 2.0) * t - p.ln() - (4.0 - l * l) / 8.0)
    }

    /// `V` at a real point, where no branch cut is crossed for `lambda0 != 0`.
    pub fn eval_real(&self, t: f64) -> Result<Complex64> {
        self.eval(Complex64::new(t, 0.0))
    }

    /// `Re V` on the real line, `(t^2 - (4 - lambda0^2)/4 - log(t^2 + lambda0^2/4)) / 2`.
    pub fn re_v(&self, t: f64) -> f64 {
        let l2 = self.lambda0 * self.lambda0;
        0.5 * (t * t - (4.0 - l2) / 4.0 - (t * t + l2 / 4.0).ln())
    }
}

pub fn phase_v(t: Complex64, lambda0: f64) -> Result<Complex64> {
    PhaseFunction::new(lambda0)?.eval(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleData {
    pub x_plus: f64,
    pub x_minus: f64,
    pub v_plus: Complex64,
    pub v_minus: Complex64,
    pub p_plus: Complex64,
    pub p_minus: Complex64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
}

/// Closed forms of `V_+` and `V_-`.
pub fn saddle_values_closed_form(lambda0: f64) -> (Complex64, Complex64) {
    let s = (4.0 - lambda0 * lambda0).sqrt();
    let im = lambda0 * s / 4.0 - (-lambda0 / 2.0).asin();
    (Complex64::new(0.0, im), Complex64::new(0.0, -im - PI))
}

/// Distance between `a` and `b` modulo `2 pi i`.
pub fn distance_mod_2pi_i(a: Complex64, b: Complex64) -> f64 {
    let d = a - b;
    let k = (d.im / (2.0 * PI)).round();
    Complex64::new(d.re, d.im - 2.0 * PI * k).norm()
}

/// Saddle points of `V` on the real line. `V_+-` are evaluated directly and
/// compared against their closed forms; the closed form for `V_-` differs
/// from the principal-branch value by `2 pi i` when `lambda0 > 0`, so the
/// comparison is made modulo `2 pi i`.
pub fn saddle_data(lambda0: f64) -> Result<SaddleData> {
    let v = PhaseFunction::new(lambda0)?;
    let x_plus = (4.0 - lambda0 * lambda0).sqrt() / 2.0;
    let x_minus = -x_plus;
    let p_plus = v.shift(Complex64::new(x_plus, 0.0));
    let p_minus = v.shift(Complex64::new(x_minus, 0.0));
    let one = Complex64::new(1.0, 0.0);
    let data = SaddleData {
        x_plus,
        x_minus,
        v_plus: v.eval_real(x_plus)?,
        v_minus: v.eval_real(x_minus)?,
        p_plus,
        p_minus,
        c_plus: one + p_plus.powi(-2),
        c_minus: one + p_minus.powi(-2),
    };
    let (cp, cm) = saddle_values_closed_form(lambda0);
    let dev = distance_mod_2pi_i(data.v_plus, cp).max(distance_mod_2pi_i(data.v_minus, cm));
    if dev > 1e-12 {
        return Err(Error::Domain(format!(
            "saddle values disagree with their closed form by {dev:e}"
        )));
    }
    Ok(data)
}

/// Outcome of [`verify_landscape`].
#[derive(Clone, Debug, PartialEq)]
pub struct LandscapeReport {
    pub lambda0: f64,
    pub n: usize,
    pub grid_step: f64,
    /// Interior local minima of `Re V` found on the grid.
    pub minima: Vec<f64>,
    /// Largest distance from a found minimum to the nearest of `x_+-`.
    pub minima_offset: f64,
    /// `max |Re V(x_+-)|`.
    pub re_v_at_saddles: f64,
    /// `max |V'(x_+-)|` by fourth-order central differences.
    pub stationarity: f64,
    /// `max |V''(x_+-) - c_+-|` by fourth-order central differences.
    pub second_derivative_error: f64,
    /// `max |(Re V)''(x_+-) - (4 - lambda0^2)/2|`.
    pub re_second_derivative_error: f64,
    /// `min Re V(t) n / log^2 n` over grid points outside both windows.
    pub fitted_c: f64,
    /// `max |Re V(t) - (4 - lambda0^2)/4 (t - x_+-)^2| / (n^{-3/2} log^3 n)` inside the windows.
    pub quadratic_remainder: f64,
    pub passed: bool,
}

fn fd1(f: impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
}

fn fd2(f: impl Fn(f64) -> Complex64, x: f64, h: f64) -> Complex64 {
    (-f(x + 2.0 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2.0 * h))
        / (12.0 * h * h)
}

/// Real segments of `L_a^A = {t : a <= |t - i lambda0/2| <= A}`, ordered.
pub fn contour_segments(lambda0: f64, a: f64, big_a: f64) -> Vec<(f64, f64)> {
    let q = lambda0 * lambda0 / 4.0;
    let hi = (big_a * big_a - q).max(0.0).sqrt();
    let lo = (a * a - q).max(0.0).sqrt();
    if lo == 0.0 {
        vec![(-hi, hi)]
    } else {
        vec![(-hi, -lo), (lo, hi)]
    }
}

/// Grid scan of `Re V` on `L_a^A` (a = 0.05, A = 6) with step `1e-4`, plus
/// finite-difference checks of the saddle expansion.
pub fn verify_landscape(lambda0: f64, n: usize) -> Result<LandscapeReport> {
    if n < 8 {
        return Err(Error::Domain("verify_landscape needs n >= 8".into()));
    }
    let v = PhaseFunction::new(lambda0)?;
    let s = saddle_data(lambda0)?;
    let step = 1e-4;
    let saddles = [s.x_plus, s.x_minus];
    let half = (n as f64).ln() / (n as f64).sqrt();
    let log2n = (n as f64).ln().powi(2);
    let curvature = (4.0 - lambda0 * lambda0) / 4.0;
    let remainder_scale = (n as f64).powf(-1.5) * (n as f64).ln().powi(3);

    let mut minima = Vec::new();
    let mut fitted_c = f64::INFINITY;
    let mut quadratic_remainder: f64 = 0.0;
    for (lo, hi) in contour_segments(lambda0, 0.05, 6.0) {
        let count = ((hi - lo) / step).floor() as usize;
        let values: Vec<f64> = (0..=count).map(|i| v.re_v(lo + i as f64 * step)).collect();
        for i in 0..=count {
            let t = lo + i as f64 * step;
            if i > 0 && i < count && values[i] < values[i - 1] && values[i] <= values[i + 1] {
                minima.push(t);
            }
            let nearest = saddles
                .iter()
                .copied()
                .min_by(|a, b| (t - a).abs().total_cmp(&(t - b).abs()))
                .unwrap();
            if (t - nearest).abs() >= half {
                fitted_c = fitted_c.min(values[i] * n as f64 / log2n);
            } else {
                let model = curvature * (t - nearest).powi(2);
                quadratic_remainder =
                    quadratic_remainder.max((values[i] - model).abs() / remainder_scale);
            }
        }
    }
    let minima_offset = minima
        .iter()
        .map(|&m| saddles.iter().map(|x| (m - x).abs()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);

    let h = 1e-3;
    let vc = |t: f64| v.eval_real(t).expect("real t avoids the branch point");
    let vr = |t: f64| Complex64::new(v.re_v(t), 0.0);
    let mut stationarity: f64 = 0.0;
    let mut second: f64 = 0.0;
    let mut re_second: f64 = 0.0;
    let mut re_v_at_saddles: f64 = 0.0;
    for (x, c) in [(s.x_plus, s.c_plus), (s.x_minus, s.c_minus)] {
        re_v_at_saddles = re_v_at_saddles.max(vc(x).re.abs());
        stationarity = stationarity.max(fd1(vc, x, h).norm());
        second = second.max((fd2(vc, x, h) - c).norm());
        re_second = re_second.max((fd2(vr, x, h).re - 2.0 * curvature).abs());
    }
    let passed = minima.len() == 2
        && minima_offset <= step
        && re_v_at_saddles < 1e-12
        && stationarity < 1e-10
        && second < 1e-8
        && re_second < 1e-8
        && fitted_c > 0.0;
    Ok(LandscapeReport {
        lambda0,
        n,
        grid_step: step,
        minima,
        minima_offset,
        re_v_at_saddles,
        stationarity,
        second_derivative_error: second,
        re_second_derivative_error: re_second,
        fitted_c,
        quadratic_remainder,
        passed,
    })
}

/// `int_{U_n(x_+)} e^{-nV(t)} dt / (sqrt(2 pi / (n c_+)) e^{-n V_+})`.
pub fn laplace_ratio(lambda0: f64, n: usize) -> Result<Complex64> {
    let v = PhaseFunction::new(lambda0)?;
    let s = saddle_data(lambda0)?;
    let nf = n as f64;
    let half = nf.ln() / nf.sqrt();
    let rule = composite_legendre(s.x_plus - half, s.x_plus + half, 64, &gauss_legendre(16));
    let mut num = Complex64::new(0.0, 0.0);
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        num += w * (-nf * (v.eval_real(t)? - s.v_plus)).exp();
    }
    let gauss = (2.0 * PI / (nf * s.c_plus)).sqrt();
    Ok(num / gauss)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v_examples() {
        assert!(phase_v(Complex64::new(1.0, 0.0), 0.0).unwrap().norm() < 1e-16);
        assert!(phase_v(Complex64::new(0.0, 0.5), 1.0).is_err());
        let v = PhaseFunction::new(0.0).unwrap();
        for &t in &[0.1, 0.7, 1.3, -2.2] {
            let direct = v.eval_real(t).unwrap().re;
            let form = (t * t - 1.0 - (t * t).ln()) / 2.0;
            assert!((direct - form).abs() < 1e-14);
        }
        for &l in &[0.3, -1.1, 1.7] {
            let v = PhaseFunction::new(l).unwrap();
            for &t in &[-1.5, 0.0, 0.4, 2.0] {
                assert!((v.eval_real(t).unwrap().re - v.re_v(t)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn saddles_at_zero() {
        let s = saddle_data(0.0).unwrap();
        assert_eq!((s.x_plus, s.x_minus), (1.0, -1.0));
        assert!((s.p_plus - 1.0).norm() < 1e-16 && (s.p_minus + 1.0).norm() < 1e-16);
        assert!((s.c_plus - 2.0).norm() < 1e-15 && (s.c_minus - 2.0).norm() < 1e-15);
        assert!(s.v_plus.norm() < 1e-16);
    }

    #[test]
    fn saddles_at_one() {
        let s = saddle_data(1.0).unwrap();
        assert!((s.x_plus - 0.8660254037844386).abs() < 1e-15);
        assert!((s.x_minus + 0.8660254037844386).abs() < 1e-15);
        let expected = Complex64::new(1.5, 3f64.sqrt() / 2.0);
        assert!((s.c_plus - expected).norm() < 1e-14);
        assert!((s.p_plus.norm() - 1.0).abs() < 1e-15);
        assert!((s.p_plus * s.p_minus + 1.0).norm() < 1e-15);
        assert!((s.c_plus * s.c_minus - 3.0).norm() < 1e-14);
    }

    #[test]
    fn saddle_values_are_imaginary() {
        for &l in &[0.0, 0.5, 0.7, 1.0, 1.5, -1.2] {
            let s = saddle_data(l).unwrap();
            assert!(s.v_plus.re.abs() < 1e-12 && s.v_minus.re.abs() < 1e-12);
            assert!((s.v_minus - s.v_plus).re.abs() < 1e-12);
            assert!(distance_mod_2pi_i(s.v_plus + s.v_minus, Complex64::new(0.0, -PI)) < 1e-12);
        }
        assert!(saddle_data(2.0).is_err());
    }

    #[test]
    fn landscape_at_zero() {
        let r = verify_landscape(0.0, 256).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.minima[0] + 1.0).abs() <= 1e-4 && (r.minima[1] - 1.0).abs() <= 1e-4);
        // (Re V)'' at t = 1 is 1 - 1/t^2 + 2t^2/t^4 = 2
        assert!(r.re_second_derivative_error < 1e-8);
    }

    #[test]
    fn landscape_at_one() {
        let r = verify_landscape(1.0, 64).unwrap();
        assert!(r.passed, "{r:?}");
        for m in &r.minima {
            assert!((m.abs() - 0.8660254).abs() <= 1e-4);
        }
    }

    #[test]
    fn laplace_ratio_tends_to_one() {
        let errs: Vec<f64> = [64, 256, 1024]
            .iter()
            .map(|&n| (laplace_ratio(0.5, n).unwrap() - 1.0).norm())
            .collect();
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
        assert!(errs[2] < 5e-3, "{errs:?}");
    }
}
