//! Determinants by LU factorization with partial pivoting, in log form.

use std::ops::{Div, Mul, Sub};

use num_complex::Complex64;

use super::{PhaseLog, SignedLog};
use crate::{Error, Result};

/// Scalars the factorization runs over.
pub trait Scalar:
    Copy + PartialEq + Mul<Output = Self> + Sub<Output = Self> + Div<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn finite(self) -> bool;
    /// `self / |self|`; only called on nonzero values.
    fn unit(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn finite(self) -> bool {
        self.is_finite()
    }
    fn unit(self) -> Self {
        self.signum()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn unit(self) -> Self {
        self / self.norm()
    }
}

/// Determinant as `unit * exp(logmag)`; `unit` is zero for a singular matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogDet<T> {
    pub unit: T,
    pub logmag: f64,
}

/// Factors `a` (row-major, `n x n`) in place and returns its determinant.
///
/// An exactly zero pivot column yields a zero determinant; there is no
/// tolerance-based singularity detection.
pub fn lu_log_det<T: Scalar>(a: &mut [T], n: usize) -> Result<LogDet<T>> {
    if a.len() != n * n {
        return Err(Error::Domain(format!(
            "matrix storage has {} entries, expected {}",
            a.len(),
            n * n
        )));
    }
    if let Some(pos) = a.iter().position(|v| !v.finite()) {
        return Err(Error::NonFinite {
            row: pos / n,
            col: pos % n,
        });
    }
    let mut unit = T::one();
    let mut logmag = 0.0;
    for col in 0..n {
        let mut pivot_row = col;
        let mut best = a[col * n + col].modulus();
        for row in (col + 1)..n {
            let m = a[row * n + col].modulus();
            if m > best {
                best = m;
                pivot_row = row;
            }
        }
        if best == 0.0 {
            return Ok(LogDet {
                unit: T::zero(),
                logmag: f64::NEG_INFINITY,
            });
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            unit = T::zero() - unit;
        }
        let pivot = a[col * n + col];
        unit = unit * pivot.unit();
        logmag += best.ln();
        for row in (col + 1)..n {
            let factor = a[row * n + col] / pivot;
            if factor == T::zero() {
                continue;
            }
            a[row * n + col] = factor;
            for k in (col + 1)..n {
                let v = a[col * n + k];
                a[row * n + k] = a[row * n + k] - factor * v;
            }
        }
    }
    // Keep the phase on the unit circle despite accumulated rounding.
    if unit.modulus() > 0.0 {
        unit = unit.unit();
    }
    Ok(LogDet { unit, logmag })
}

/// Signed-log determinant of a real matrix.
pub fn signed_log_det(a: &[f64], n: usize) -> Result<SignedLog> {
    let mut work = a.to_vec();
    let d = lu_log_det(&mut work, n)?;
    Ok(SignedLog::new(d.unit as i8, d.logmag))
}

/// Phase-log determinant of a complex matrix.
pub fn phase_log_det(a: &[Complex64], n: usize) -> Result<PhaseLog> {
    let mut work = a.to_vec();
    let d = lu_log_det(&mut work, n)?;
    Ok(PhaseLog::new(d.unit, d.logmag))
}

/// Plain complex determinant for small, well-scaled matrices.
pub fn complex_det(a: &[Complex64], n: usize) -> Result<Complex64> {
    Ok(phase_log_det(a, n)?.to_complex())
}

/// Plain real determinant for small, well-scaled matrices.
pub fn real_det(a: &[f64], n: usize) -> Result<f64> {
    Ok(signed_log_det(a, n)?.to_f64())
}
