use super::SignedLog;
use crate::{Error, Result};

/// Streaming mean and variance of signed-log samples.
///
/// Samples are stored relative to `exp(shift)`, where `shift` tracks the
/// largest log-magnitude seen so far; a new maximum rescales the running
/// mean by `f` and the running sum of squared deviations by `f^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Accumulator {
    count: u64,
    shift: f64,
    mean: f64,
    m2: f64,
}

impl Default for Accumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl Accumulator {
    pub fn new() -> Self {
        Self {
            count: 0,
            shift: f64::NEG_INFINITY,
            mean: 0.0,
            m2: 0.0,
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    fn rescale_to(&mut self, shift: f64) {
        if shift > self.shift {
            if self.count > 0 && self.shift > f64::NEG_INFINITY {
                let f = (self.shift - shift).exp();
                self.mean *= f;
                self.m2 *= f * f;
            }
            self.shift = shift;
        }
    }

    pub fn push(&mut self, x: SignedLog) {
        if !x.is_zero() {
            self.rescale_to(x.logmag());
        }
        let v = if x.is_zero() {
            0.0
        } else {
            f64::from(x.sign()) * (x.logmag() - self.shift).exp()
        };
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    /// Chan et al. pairwise combination; `merge(a, empty) == a` exactly.
    pub fn merge(&self, other: &Self) -> Self {
        if other.count == 0 {
            return *self;
        }
        if self.count == 0 {
            return *other;
        }
        let mut a = *self;
        let mut b = *other;
        let shift = a.shift.max(b.shift);
        a.rescale_to(shift);
        b.rescale_to(shift);
        let count = a.count + b.count;
        let (na, nb, n) = (a.count as f64, b.count as f64, count as f64);
        let delta = b.mean - a.mean;
        Self {
            count,
            shift,
            mean: a.mean + delta * (nb / n),
            m2: a.m2 + b.m2 + delta * delta * (na * nb / n),
        }
    }

    pub fn mean(&self) -> SignedLog {
        if self.count == 0 || self.mean == 0.0 {
            return SignedLog::ZERO;
        }
        SignedLog::new(
            if self.mean > 0.0 { 1 } else { -1 },
            self.mean.abs().ln() + self.shift,
        )
    }

    /// Standard error of the mean, in signed-log form (sign +1 or zero).
    pub fn stderr(&self) -> SignedLog {
        if self.count < 2 || self.m2 <= 0.0 {
            return SignedLog::ZERO;
        }
        let var = self.m2 / (self.count - 1) as f64;
        SignedLog::from_ln(0.5 * (var / self.count as f64).ln() + self.shift)
    }

    /// Standard error divided by `|mean|`; infinite for a zero mean.
    pub fn stderr_rel(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        if self.mean == 0.0 {
            return if self.m2 == 0.0 { 0.0 } else { f64::INFINITY };
        }
        let var = self.m2 / (self.count - 1) as f64;
        (var / self.count as f64).sqrt() / self.mean.abs()
    }
}

/// Monte Carlo estimate of a fixed quantity, tagged with the configuration
/// it was computed for so that only compatible estimates are merged.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    key: String,
    acc: Accumulator,
}

impl Estimate {
    pub fn empty(key: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            acc: Accumulator::new(),
        }
    }

    pub fn from_accumulator(key: impl Into<String>, acc: Accumulator) -> Self {
        Self {
            key: key.into(),
            acc,
        }
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn accumulator(&self) -> &Accumulator {
        &self.acc
    }

    pub fn count(&self) -> u64 {
        self.acc.count()
    }

    pub fn mean(&self) -> SignedLog {
        self.acc.mean()
    }

    pub fn stderr(&self) -> SignedLog {
        self.acc.stderr()
    }

    pub fn stderr_rel(&self) -> f64 {
        self.acc.stderr_rel()
    }

    /// True when `|mean| < 2 * stderr`, so even the sign is not resolved.
    pub fn sign_unstable(&self) -> bool {
        self.stderr_rel() > 0.5
    }

    /// `|mean - target|` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean().to_f64() - target).abs();
        if diff == 0.0 {
            return 0.0;
        }
        diff / self.stderr().to_f64()
    }
}

/// Combines two estimates of the same quantity.
pub fn merge_estimates(a: &Estimate, b: &Estimate) -> Result<Estimate> {
    if a.key != b.key {
        return Err(Error::ConfigMismatch {
            left: a.key.clone(),
            right: b.key.clone(),
        });
    }
    Ok(Estimate {
        key: a.key.clone(),
        acc: a.acc.merge(&b.acc),
    })
}

/// Pairwise tree reduction in index order: `((0 1) (2 3)) ((4 5) ...)`.
pub fn tree_reduce(mut parts: Vec<Accumulator>) -> Accumulator {
    if parts.is_empty() {
        return Accumulator::new();
    }
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => a.merge(b),
                [a] => *a,
                _ => unreachable!(),
            })
            .collect();
    }
    parts[0]
}
