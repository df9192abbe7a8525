//! Contour form of the normalized two-point function
//!
//! `D_2^{-1} F_2 = i rho n^2 / (2 pi (-1)^n D_2) int_{(L_a^A)^2}
//!    prod_l (t_l - i lambda0/2)^n e^{-n/2 sum_l (t_l + i lambda0/2)^2
//!    - i sum_l xi_l (t_l + i lambda0/2) / rho}
//!    (t1 - t2)/(xi1 - xi2) e^{k4 (t1 - i lambda0/2)^{-2} (t2 - i lambda0/2)^{-2}} dt1 dt2`
//!
//! with `D_2 = sqrt(D_n(xi1) D_n(xi2))`. The `1 + O(log^k n / n)` factor of the
//! exact identity is dropped. The `n`-dependent exponent is assembled as
//! `-n V(t)` plus constants that are cancelled against `D_2` in log form.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::phase::{contour_segments, saddle_data, PhaseFunction};
use crate::detmc::SignedLog;
use crate::quadrature::{composite_legendre, gauss_legendre, Rule};
use crate::theory::{alpha, d_n, rho_sc, TheoryParams};
use crate::{Error, Result};

/// Below this `|xi1 - xi2|` the divided factor `(t1 - t2)/(xi1 - xi2)` is
/// replaced by its limit.
pub const COINCIDENT_GAP: f64 = 1e-7;

/// Quadrature nodes with `n Re V` above this value (after allowing for the
/// growth of the `kappa4` factor) contribute below `e^{-80}` and are dropped.
const PRUNE_EXPONENT: f64 = 80.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourSpec {
    /// Inner radius `a` of `L_a^A`.
    pub a: f64,
    /// Outer radius `A` of `L_a^A`.
    pub big_a: f64,
    /// Gauss–Legendre nodes per panel.
    pub nodes_per_panel: usize,
    /// Relative tolerance between successive panel doublings.
    pub tol: f64,
}

impl Default for ContourSpec {
    fn default() -> Self {
        Self {
            a: 0.05,
            big_a: 6.0,
            nodes_per_panel: 16,
            tol: 1e-6,
        }
    }
}

impl ContourSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a < self.big_a && self.big_a.is_finite()) {
            return Err(Error::Domain(format!(
                "contour radii must satisfy 0 < a < A, got a = {}, A = {}",
                self.a, self.big_a
            )));
        }
        if self.nodes_per_panel == 0 || !(self.tol > 0.0) {
            return Err(Error::Domain("invalid contour quadrature settings".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourValue {
    /// `D_2^{-1} F_2`.
    pub value: f64,
    /// `D_2^{-1} F_2 / (n rho_sc(lambda0))`, whose limit is `sinc(pi(xi1 - xi2))`.
    pub normalized: f64,
    pub imag_residual: f64,
    /// Quadrature nodes per dimension after pruning.
    pub nodes: usize,
    pub panels: usize,
}

impl ContourValue {
    pub fn as_signed_log(&self) -> SignedLog {
        SignedLog::from_f64(self.value)
    }
}

struct Node {
    t: f64,
    w: f64,
    // e^{-n V(t)}
    g: Complex64,
    // (t - i lambda0/2)^{-2}
    h: Complex64,
}

fn nodes_for(
    v: &PhaseFunction,
    n: usize,
    kappa4: f64,
    h_max: f64,
    segments: &[(f64, f64)],
    panel_width: f64,
    base: &Rule,
) -> Result<(Vec<Node>, usize)> {
    let nf = n as f64;
    let mut out = Vec::new();
    let mut panels = 0;
    for &(lo, hi) in segments {
        let p = ((hi - lo) / panel_width).ceil().max(1.0) as usize;
        panels += p;
        let rule = composite_legendre(lo, hi, p, base);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let shifted = v.shift(Complex64::new(t, 0.0));
            let h = shifted.powi(-2);
            let growth = if v.lambda0() == 0.0 && kappa4 <= 0.0 {
                0.0
            } else {
                kappa4.abs() * h.norm() * h_max
            };
            let re = nf * v.re_v(t);
            if re > PRUNE_EXPONENT + growth {
                continue;
            }
            let g = (-nf * v.eval_real(t)?).exp();
            out.push(Node { t, w, g, h });
        }
    }
    Ok((out, panels))
}

/// Largest `Re(k4 h_i h_j) - n Re V(t_i) - n Re V(t_j)` over node pairs with
/// at least one node outside the windows `|t - x_+-| < log n / sqrt n`, minus
/// the largest `Re(k4 h_a h_b)` over saddle pairs. A positive value means the
/// integral is dominated by the neighbourhood of the branch point, where the
/// asymptotic `kappa4` factor is not a faithful stand-in for the exact one.
fn coupling_excess(nodes: &[Node], n: usize, kappa4: f64, v: &PhaseFunction) -> Result<f64> {
    let s = saddle_data(v.lambda0())?;
    let hs = [s.p_plus.powi(-2), s.p_minus.powi(-2)];
    let saddle_max = hs
        .iter()
        .flat_map(|a| hs.iter().map(move |b| (kappa4 * a * b).re))
        .fold(f64::NEG_INFINITY, f64::max);
    let nf = n as f64;
    let half = nf.ln() / nf.sqrt();
    let r: Vec<f64> = nodes.iter().map(|q| nf * v.re_v(q.t)).collect();
    let outside: Vec<bool> = nodes
        .iter()
        .map(|q| (q.t - s.x_plus).abs() >= half && (q.t - s.x_minus).abs() >= half)
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for (i, qi) in nodes.iter().enumerate() {
        let kh = kappa4 * qi.h;
        for (j, qj) in nodes.iter().enumerate().skip(i) {
            if outside[i] || outside[j] {
                worst = worst.max((kh * qj.h).re - r[i] - r[j]);
            }
        }
    }
    Ok(worst - saddle_max)
}

/// Sum over node pairs of `w_i w_j g1_i g2_j k(t_i, t_j) e^{k4 h_i h_j}`, where
/// `g_l = g e^{-i xi_l t / rho}` and `k` is `t1 - t2`, or `(t1 - t2)^2` in the
/// coincident case.
fn double_sum(nodes: &[Node], xi: [f64; 2], rho: f64, kappa4: f64, coincident: bool) -> Complex64 {
    let phase = |xi: f64, t: f64| Complex64::from_polar(1.0, -xi * t / rho);
    let g1: Vec<Complex64> = nodes.iter().map(|q| q.g * q.w * phase(xi[0], q.t)).collect();
    let g2: Vec<Complex64> = nodes.iter().map(|q| q.g * q.w * phase(xi[1], q.t)).collect();
    if kappa4 == 0.0 {
        // the kernel separates into moments of g1 and g2
        let mom = |g: &[Complex64], k: i32| -> Complex64 {
            g.iter().zip(nodes).map(|(x, q)| x * q.t.powi(k)).sum()
        };
        let (a0, a1, a2) = (mom(&g1, 0), mom(&g1, 1), mom(&g1, 2));
        let (b0, b1, b2) = (mom(&g2, 0), mom(&g2, 1), mom(&g2, 2));
        return if coincident {
            a2 * b0 - 2.0 * a1 * b1 + a0 * b2
        } else {
            a1 * b0 - a0 * b1
        };
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (i, qi) in nodes.iter().enumerate() {
        let mut row = Complex64::new(0.0, 0.0);
        let kh = kappa4 * qi.h;
        for (j, qj) in nodes.iter().enumerate() {
            let d = qi.t - qj.t;
            let k = if coincident { d * d } else { d };
            row += g2[j] * (k * (kh * qj.h).exp());
        }
        total += g1[i] * row;
    }
    total
}

fn evaluate(
    n: usize,
    lambda0: f64,
    kappa4: f64,
    xi: [f64; 2],
    spec: &ContourSpec,
    panel_width: f64,
) -> Result<(Complex64, usize, usize)> {
    let v = PhaseFunction::new(lambda0)?;
    let rho = rho_sc(lambda0)?;
    let segments = contour_segments(lambda0, spec.a, spec.big_a);
    let h_max = 1.0 / (spec.a * spec.a).max(lambda0 * lambda0 / 4.0);
    if kappa4 > 0.0 && kappa4 * h_max * h_max > 700.0 {
        return Err(Error::Domain(format!(
            "kappa4 = {kappa4} > 0 makes exp(kappa4 (t1 - i lambda0/2)^-2 (t2 - i lambda0/2)^-2) \
             overflow near the inner radius a = {} at lambda0 = {lambda0}",
            spec.a
        )));
    }
    let base = gauss_legendre(spec.nodes_per_panel);
    let (nodes, panels) = nodes_for(&v, n, kappa4, h_max, &segments, panel_width, &base)?;
    if kappa4 != 0.0 {
        let worst = coupling_excess(&nodes, n, kappa4, &v)?;
        if worst > 0.0 {
            return Err(Error::Domain(format!(
                "at n = {n} the factor exp(kappa4 ...) outgrows exp(-n(V(t1) + V(t2))) near \
                 the branch point by e^{worst:.1}; the contour form needs larger n or larger a"
            )));
        }
    }
    let coincident = (xi[0] - xi[1]).abs() < COINCIDENT_GAP;
    let sum = double_sum(&nodes, xi, rho, kappa4, coincident);

    // e^{-n/2 (t + i l0/2)^2} prod (t - i l0/2)^n = e^{-n V(t)} e^{n (l0^2 - 2)/4} per variable,
    // e^{-i xi (t + i l0/2)/rho} = e^{-i xi t / rho} e^{alpha xi}
    let nf = n as f64;
    let params = TheoryParams::new(lambda0, n, 1, kappa4, xi.to_vec())?;
    let log_d2 = 0.5 * (d_n(xi[0], &params)?.logmag() + d_n(xi[1], &params)?.logmag());
    let a = alpha(lambda0)?;
    let log_const = nf * (lambda0 * lambda0 - 2.0) / 2.0 + a * (xi[0] + xi[1]) - log_d2;
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let mut pref = Complex64::new(0.0, rho * nf * nf / (2.0 * PI) * sign) * log_const.exp();
    pref *= if coincident {
        Complex64::new(0.0, -1.0 / (2.0 * rho))
    } else {
        Complex64::new(1.0 / (xi[0] - xi[1]), 0.0)
    };
    Ok((pref * sum, nodes.len(), panels))
}

/// `D_2^{-1} F_2` at `l_j = lambda0 + xi_j / (n rho_sc(lambda0))` from the
/// contour representation, with composite Gauss–Legendre panels halved until
/// successive values agree to `spec.tol` relative.
pub fn contour_f2_asymptotic(
    n: usize,
    lambda0: f64,
    kappa4: f64,
    xi: [f64; 2],
    spec: &ContourSpec,
) -> Result<ContourValue> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if xi.iter().any(|x| !x.is_finite()) || !kappa4.is_finite() {
        return Err(Error::Domain("xi and kappa4 must be finite".into()));
    }
    let nf = n as f64;
    let mut width = 0.25f64.min(1.0 / nf.sqrt());
    let (mut coarse, _, _) = evaluate(n, lambda0, kappa4, xi, spec, width)?;
    for _ in 0..5 {
        width /= 2.0;
        let (fine, nodes, panels) = evaluate(n, lambda0, kappa4, xi, spec, width)?;
        if (fine.re - coarse.re).abs() <= spec.tol * fine.re.abs().max(1e-12) {
            let rho = rho_sc(lambda0)?;
            return Ok(ContourValue {
                value: fine.re,
                normalized: fine.re / (nf * rho),
                imag_residual: fine.im,
                nodes,
                panels,
            });
        }
        coarse = fine;
    }
    let (fine, _, _) = evaluate(n, lambda0, kappa4, xi, spec, width / 2.0)?;
    Err(Error::NonConvergence {
        coarse: coarse.re,
        fine: fine.re,
    })
}

/// Relative change of [`contour_f2_asymptotic`] when `a` is halved and `A`
/// doubled.
pub fn contour_sensitivity(
    n: usize,
    lambda0: f64,
    kappa4: f64,
    xi: [f64; 2],
    spec: &ContourSpec,
) -> Result<f64> {
    let base = contour_f2_asymptotic(n, lambda0, kappa4, xi, spec)?;
    let wide = ContourSpec {
        a: spec.a / 2.0,
        big_a: spec.big_a * 2.0,
        ..*spec
    };
    let other = contour_f2_asymptotic(n, lambda0, kappa4, xi, &wide)?;
    Ok((other.value - base.value).abs() / base.value.abs())
}
