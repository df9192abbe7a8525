use std::cmp::Ordering;
use std::fmt;
use std::ops::{Mul, Neg};

use num_complex::Complex64;

/// Real number stored as `sign * exp(logmag)`.
///
/// `sign` is -1, 0 or +1 and `logmag` is `-inf` exactly when `sign == 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    sign: i8,
    logmag: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        logmag: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog { sign: 1, logmag: 0.0 };

    pub fn new(sign: i8, logmag: f64) -> Self {
        if sign == 0 || logmag == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                logmag,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    /// `exp(logmag)` with positive sign.
    pub fn from_ln(logmag: f64) -> Self {
        Self::new(1, logmag)
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn logmag(&self) -> f64 {
        self.logmag
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Linear value; overflows to `±inf` or underflows to 0 outside the f64 range.
    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.logmag.exp(),
        }
    }

    /// Linear value only when it is representable as a normal, finite f64.
    pub fn to_f64_checked(&self) -> Option<f64> {
        let v = self.to_f64();
        (v == 0.0 && self.sign == 0 || v.is_normal()).then_some(v)
    }

    pub fn recip(&self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero");
        Self::new(self.sign, -self.logmag)
    }

    pub fn abs(&self) -> Self {
        Self::new(self.sign.abs(), self.logmag)
    }

    pub fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        let sign = if k % 2 == 0 { self.sign.abs() } else { self.sign };
        Self::new(sign, self.logmag * f64::from(k))
    }

    /// Sum computed with a max shift, so no intermediate exceeds the larger operand.
    pub fn add(self, other: Self) -> Self {
        if self.sign == 0 {
            return other;
        }
        if other.sign == 0 {
            return self;
        }
        let (big, small) = if self.logmag >= other.logmag {
            (self, other)
        } else {
            (other, self)
        };
        let ratio = (small.logmag - big.logmag).exp();
        let scaled = if big.sign == small.sign {
            1.0 + ratio
        } else {
            1.0 - ratio
        };
        if scaled == 0.0 {
            return Self::ZERO;
        }
        Self::new(big.sign, big.logmag + scaled.ln())
    }

    pub fn sub(self, other: Self) -> Self {
        self.add(-other)
    }

    /// Total order on the represented values.
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Ordering::Equal,
                1 => self.logmag.total_cmp(&other.logmag),
                _ => other.logmag.total_cmp(&self.logmag),
            },
            ord => ord,
        }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog::new(self.sign * rhs.sign, self.logmag + rhs.logmag)
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;

    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            logmag: self.logmag,
        }
    }
}

impl fmt::Display for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            1 => '+',
            -1 => '-',
            _ => '0',
        };
        write!(f, "{s}exp({})", self.logmag)
    }
}

/// Complex number stored as `phase * exp(logmag)` with `|phase| = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseLog {
    phase: Complex64,
    logmag: f64,
}

impl PhaseLog {
    pub const ZERO: PhaseLog = PhaseLog {
        phase: Complex64::new(0.0, 0.0),
        logmag: f64::NEG_INFINITY,
    };

    pub fn new(phase: Complex64, logmag: f64) -> Self {
        if logmag == f64::NEG_INFINITY || phase.norm() == 0.0 {
            return Self::ZERO;
        }
        Self {
            phase: phase / phase.norm(),
            logmag,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, z.norm().ln())
    }

    pub fn phase(&self) -> Complex64 {
        self.phase
    }

    pub fn logmag(&self) -> f64 {
        self.logmag
    }

    pub fn is_zero(&self) -> bool {
        self.logmag == f64::NEG_INFINITY
    }

    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            Complex64::new(0.0, 0.0)
        } else {
            self.phase * self.logmag.exp()
        }
    }

    /// Projects onto the real axis, keeping the sign of the real part of the phase.
    ///
    /// Appropriate for determinants known to be real (Hermitian input), where
    /// the phase is `±1` up to rounding.
    pub fn to_signed_log(&self) -> SignedLog {
        if self.is_zero() {
            return SignedLog::ZERO;
        }
        let sign = if self.phase.re > 0.0 {
            1
        } else if self.phase.re < 0.0 {
            -1
        } else {
            0
        };
        SignedLog::new(sign, self.logmag)
    }
}

impl Mul for PhaseLog {
    type Output = PhaseLog;

    fn mul(self, rhs: PhaseLog) -> PhaseLog {
        if self.is_zero() || rhs.is_zero() {
            return PhaseLog::ZERO;
        }
        PhaseLog::new(self.phase * rhs.phase, self.logmag + rhs.logmag)
    }
}
