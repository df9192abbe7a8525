//! Entry laws and sampling of Hermitian Wigner matrices `H = W / sqrt(n)`.
//!
//! Off-diagonal entries are `W_jk = X + iY` with `X`, `Y` independent draws
//! from an [`EntryLaw`] of variance 1/2, so that `E|W_jk|^2 = 1`. Diagonal
//! entries are real with variance 1 and come from a separate [`DiagLaw`].

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Highest moment order kept in the analytic tables (`4 m` for `m <= 4`).
pub const MAX_MOMENT: usize = 16;

/// Reproducible random stream identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8 with the stream id selecting an independent keystream,
/// so draws depend only on the pair and never on thread scheduling.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn coin(&mut self) -> bool {
        self.rng.random::<bool>()
    }

    /// Standard complex Gaussian with `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let re = self.normal() * FRAC_1_SQRT_2;
        let im = self.normal() * FRAC_1_SQRT_2;
        Complex64::new(re, im)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LawKind {
    Gaussian,
    /// `±1/sqrt(2)` with equal probability.
    Rademacher,
    /// Uniform on `[-c, c]` with `c = sqrt(3/2)`.
    UniformScaled,
    /// `±a` with probability `p/2` each, `±b` with probability `(1-p)/2` each.
    TwoPointMixture { p: f64, a: f64, b: f64 },
}

/// Symmetric law of `Re W_jk` and `Im W_jk`, normalized to variance 1/2.
#[derive(Clone, Debug, PartialEq)]
pub struct EntryLaw {
    kind: LawKind,
    moments: [f64; MAX_MOMENT + 1],
}

impl EntryLaw {
    pub fn gaussian() -> Self {
        Self::from_kind(LawKind::Gaussian)
    }

    pub fn rademacher() -> Self {
        Self::from_kind(LawKind::Rademacher)
    }

    pub fn uniform_scaled() -> Self {
        Self::from_kind(LawKind::UniformScaled)
    }

    /// Four-atom symmetric law with weight `p` on `±a`, tuned so that the
    /// second moment is 1/2 and the fourth moment equals `mu4`.
    ///
    /// With `A = a^2`, `B = b^2` the constraints are `pA + (1-p)B = 1/2` and
    /// `pA^2 + (1-p)B^2 = mu4`, whence `A - B = sqrt((mu4 - 1/4) / (p(1-p)))`.
    pub fn two_point_mixture(p: f64, mu4: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidLaw(format!(
                "mixture weight p = {p} must lie in (0, 1)"
            )));
        }
        if !(mu4 >= 0.25) || !mu4.is_finite() {
            return Err(Error::InvalidLaw(format!(
                "mu4 = {mu4} is below 1/4, the minimum for variance 1/2"
            )));
        }
        let gap = ((mu4 - 0.25) / (p * (1.0 - p))).sqrt();
        let big = 0.5 + (1.0 - p) * gap;
        let small = 0.5 - p * gap;
        if small < 0.0 {
            return Err(Error::InvalidLaw(format!(
                "mu4 = {mu4} is not reachable with p = {p} (need mu4 <= {})",
                0.25 + (1.0 - p) / (4.0 * p)
            )));
        }
        Ok(Self::from_kind(LawKind::TwoPointMixture {
            p,
            a: big.sqrt(),
            b: small.sqrt(),
        }))
    }

    /// Builds a law from a kind name and optional parameters, as used by the CLI.
    ///
    /// `mixture` requires `mu4`; `p` defaults to 0.2.
    pub fn make(kind: &str, mu4: Option<f64>, p: Option<f64>) -> Result<Self> {
        match kind {
            "gaussian" => Ok(Self::gaussian()),
            "rademacher" => Ok(Self::rademacher()),
            "uniform" => Ok(Self::uniform_scaled()),
            "mixture" => {
                let mu4 = mu4.ok_or_else(|| {
                    Error::InvalidLaw("mixture law needs a target mu4".into())
                })?;
                Self::two_point_mixture(p.unwrap_or(0.2), mu4)
            }
            other => Err(Error::InvalidLaw(format!("unknown law `{other}`"))),
        }
    }

    fn from_kind(kind: LawKind) -> Self {
        let mut moments = [0.0; MAX_MOMENT + 1];
        for (k, slot) in moments.iter_mut().enumerate() {
            if k % 2 == 1 {
                continue;
            }
            let half = (k / 2) as i32;
            *slot = match kind {
                // (k-1)!! sigma^k with sigma^2 = 1/2
                LawKind::Gaussian => double_factorial(k as i64 - 1) * 0.5f64.powi(half),
                LawKind::Rademacher => 0.5f64.powi(half),
                LawKind::UniformScaled => 1.5f64.powi(half) / (k as f64 + 1.0),
                LawKind::TwoPointMixture { p, a, b } => {
                    p * a.powi(k as i32) + (1.0 - p) * b.powi(k as i32)
                }
            };
        }
        Self { kind, moments }
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            LawKind::Gaussian => "gaussian",
            LawKind::Rademacher => "rademacher",
            LawKind::UniformScaled => "uniform",
            LawKind::TwoPointMixture { .. } => "mixture",
        }
    }

    /// `E X^k`; zero for odd `k`. Panics for `k > MAX_MOMENT`.
    pub fn moment(&self, k: usize) -> f64 {
        self.moments[k]
    }

    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    pub fn mu4(&self) -> f64 {
        self.moments[4]
    }

    /// Fourth cumulant in the normalization of the Wigner model, `mu4 - 3/4`.
    pub fn kappa4(&self) -> f64 {
        self.moments[4] - 0.75
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        match self.kind {
            LawKind::Gaussian => rng.normal() * FRAC_1_SQRT_2,
            LawKind::Rademacher => {
                if rng.coin() {
                    FRAC_1_SQRT_2
                } else {
                    -FRAC_1_SQRT_2
                }
            }
            LawKind::UniformScaled => (2.0 * rng.uniform() - 1.0) * 1.5f64.sqrt(),
            LawKind::TwoPointMixture { p, a, b } => {
                let magnitude = if rng.uniform() < p { a } else { b };
                if rng.coin() {
                    magnitude
                } else {
                    -magnitude
                }
            }
        }
    }

    /// Checks the model constraints: symmetric, variance 1/2, finite table.
    pub fn validate(&self) -> Result<()> {
        if self.moments.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidLaw("non-finite moment".into()));
        }
        if self.moments.iter().skip(1).step_by(2).any(|&m| m != 0.0) {
            return Err(Error::InvalidLaw("law is not symmetric".into()));
        }
        if (self.moments[2] - 0.5).abs() > 1e-12 {
            return Err(Error::InvalidLaw(format!(
                "second moment {} differs from 1/2",
                self.moments[2]
            )));
        }
        Ok(())
    }
}

/// Real symmetric law of the diagonal entries `W_jj`: an [`EntryLaw`]
/// rescaled by `sqrt(2)` to variance 1.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagLaw {
    base: EntryLaw,
}

impl DiagLaw {
    pub fn new(base: EntryLaw) -> Self {
        Self { base }
    }

    pub fn gaussian() -> Self {
        Self::new(EntryLaw::gaussian())
    }

    pub fn base(&self) -> &EntryLaw {
        &self.base
    }

    pub fn moment(&self, k: usize) -> f64 {
        self.base.moment(k) * SQRT_2.powi(k as i32)
    }

    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.base.sample(rng) * SQRT_2
    }
}

impl Default for DiagLaw {
    fn default() -> Self {
        Self::gaussian()
    }
}

/// Dense complex Hermitian matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// Wraps row-major entries after checking exact conjugate symmetry.
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::Domain(format!(
                "expected {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let m = Self { n, entries };
        if !m.is_hermitian() {
            return Err(Error::Domain("matrix is not Hermitian".into()));
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Exact conjugate symmetry (so the diagonal is real).
    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|j| (0..self.n).all(|k| self.get(j, k) == self.get(k, j).conj()))
    }
}

/// Draws `H = W / sqrt(n)`.
pub fn sample_wigner(
    n: usize,
    law: &EntryLaw,
    diag_law: &DiagLaw,
    rng: &mut RngStream,
) -> HermitianMatrix {
    let mut h = HermitianMatrix::zeros(n);
    fill_wigner(&mut h, law, diag_law, rng);
    h
}

/// Same as [`sample_wigner`] but reuses the storage of `h`.
pub fn fill_wigner(h: &mut HermitianMatrix, law: &EntryLaw, diag_law: &DiagLaw, rng: &mut RngStream) {
    let n = h.n;
    let scale = 1.0 / (n as f64).sqrt();
    for j in 0..n {
        h.entries[j * n + j] = Complex64::new(diag_law.sample(rng) * scale, 0.0);
        for k in (j + 1)..n {
            let x = law.sample(rng) * scale;
            let y = law.sample(rng) * scale;
            h.entries[j * n + k] = Complex64::new(x, y);
            h.entries[k * n + j] = Complex64::new(x, -y);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentEstimate {
    pub order: usize,
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl MomentEstimate {
    /// Number of standard errors separating the estimate from `target`.
    /// Zero-variance estimates count as infinitely far unless exact.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

/// Sample moment `E X^order` with its standard error.
pub fn empirical_moments(
    law: &EntryLaw,
    order: usize,
    sample_count: u64,
    rng: &mut RngStream,
) -> Result<MomentEstimate> {
    if order > MAX_MOMENT {
        return Err(Error::Domain(format!(
            "moment order {order} exceeds table size {MAX_MOMENT}"
        )));
    }
    if sample_count < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let (mut mean, mut m2) = (0.0f64, 0.0f64);
    for i in 0..sample_count {
        let x = law.sample(rng).powi(order as i32);
        let delta = x - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (sample_count - 1) as f64;
    Ok(MomentEstimate {
        order,
        mean,
        stderr: (var / sample_count as f64).sqrt(),
        samples: sample_count,
    })
}

fn double_factorial(k: i64) -> f64 {
    let mut acc = 1.0;
    let mut j = k;
    while j > 1 {
        acc *= j as f64;
        j -= 2;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_table() {
        let law = EntryLaw::gaussian();
        assert_eq!(law.moment(2), 0.5);
        assert_eq!(law.mu4(), 0.75);
        assert_eq!(law.kappa4(), 0.0);
        assert_eq!(law.moment(6), 15.0 / 8.0);
        law.validate().unwrap();
    }

    #[test]
    fn rademacher_table() {
        let law = EntryLaw::rademacher();
        assert_eq!(law.mu4(), 0.25);
        assert_eq!(law.kappa4(), -0.5);
        law.validate().unwrap();
    }

    #[test]
    fn uniform_table() {
        let law = EntryLaw::uniform_scaled();
        assert!((law.moment(2) - 0.5).abs() < 1e-15);
        // c^4 / 5 with c^2 = 3/2
        assert!((law.mu4() - 0.45).abs() < 1e-15);
        law.validate().unwrap();
    }

    #[test]
    fn mixture_hits_targets() {
        let law = EntryLaw::two_point_mixture(0.2, 0.75).unwrap();
        assert!((law.moment(2) - 0.5).abs() < 1e-14);
        assert!((law.mu4() - 0.75).abs() < 1e-14);
        assert!(law.kappa4().abs() < 1e-14);
        law.validate().unwrap();
        // The Gaussian-matched mixture differs from the Gaussian at order six.
        assert!((law.moment(6) - EntryLaw::gaussian().moment(6)).abs() > 0.1);
    }

    #[test]
    fn mixture_rejects_bad_params() {
        assert!(EntryLaw::two_point_mixture(0.0, 0.75).is_err());
        assert!(EntryLaw::two_point_mixture(1.2, 0.75).is_err());
        assert!(EntryLaw::two_point_mixture(0.2, 0.2).is_err());
        assert!(EntryLaw::two_point_mixture(0.5, 0.75).is_err());
        assert!(EntryLaw::make("cauchy", None, None).is_err());
        assert!(EntryLaw::make("mixture", None, None).is_err());
    }

    #[test]
    fn diagonal_law_has_unit_variance() {
        let d = DiagLaw::new(EntryLaw::rademacher());
        assert!((d.moment(2) - 1.0).abs() < 1e-15);
        assert!((d.moment(4) - 1.0).abs() < 1e-15);
        assert!((DiagLaw::gaussian().moment(4) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn n1_matrix_moments() {
        let mut rng = RngStream::new(11, 0);
        let law = EntryLaw::gaussian();
        let diag = DiagLaw::gaussian();
        let count = 1_000_000u64;
        let (mut s1, mut s2, mut s1sq, mut s2sq) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..count {
            let w = sample_wigner(1, &law, &diag, &mut rng).get(0, 0).re;
            s1 += w;
            s1sq += w * w;
            s2 += w * w;
            s2sq += w.powi(4);
        }
        let c = count as f64;
        let mean = s1 / c;
        let se_mean = ((s1sq / c - mean * mean) / c).sqrt();
        assert!(mean.abs() < 5.0 * se_mean);
        let second = s2 / c;
        let se_second = ((s2sq / c - second * second) / c).sqrt();
        assert!((second - 1.0).abs() < 5.0 * se_second);
    }

    #[test]
    fn off_diagonal_power_is_one() {
        let n = 64;
        let mut rng = RngStream::new(5, 3);
        let h = sample_wigner(n, &EntryLaw::gaussian(), &DiagLaw::gaussian(), &mut rng);
        assert!(h.is_hermitian());
        let upper: Vec<f64> = (0..n)
            .flat_map(|j| ((j + 1)..n).map(move |k| (j, k)))
            .map(|(j, k)| h.get(j, k).norm_sqr() * n as f64)
            .collect();
        let c = upper.len() as f64;
        let mean = upper.iter().sum::<f64>() / c;
        let var = upper.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (c - 1.0);
        assert!((mean - 1.0).abs() < 5.0 * (var / c).sqrt(), "mean {mean}");
    }

    #[test]
    fn tiny_matrices_are_exactly_hermitian() {
        let mut rng = RngStream::new(1, 1);
        for law in [
            EntryLaw::gaussian(),
            EntryLaw::rademacher(),
            EntryLaw::uniform_scaled(),
            EntryLaw::two_point_mixture(0.3, 0.6).unwrap(),
        ] {
            let h = sample_wigner(2, &law, &DiagLaw::gaussian(), &mut rng);
            assert_eq!(h.get(0, 1), h.get(1, 0).conj());
            assert_eq!(h.get(0, 0).im, 0.0);
        }
    }

    #[test]
    fn streams_reproduce_and_separate() {
        let law = EntryLaw::gaussian();
        let diag = DiagLaw::gaussian();
        let a = sample_wigner(6, &law, &diag, &mut RngStream::new(9, 2));
        let b = sample_wigner(6, &law, &diag, &mut RngStream::new(9, 2));
        let c = sample_wigner(6, &law, &diag, &mut RngStream::new(9, 3));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn empirical_moment_checks() {
        let mut rng = RngStream::new(21, 0);
        let g2 = empirical_moments(&EntryLaw::gaussian(), 2, 1_000_000, &mut rng).unwrap();
        assert!(g2.z_score(0.5) < 5.0);

        let r4 = empirical_moments(&EntryLaw::rademacher(), 4, 1000, &mut rng).unwrap();
        assert_eq!(r4.stderr, 0.0);
        assert!((r4.mean - 0.25).abs() <= 4.0 * f64::EPSILON);

        for law in [EntryLaw::gaussian(), EntryLaw::uniform_scaled()] {
            let odd = empirical_moments(&law, 3, 200_000, &mut rng).unwrap();
            assert!(odd.z_score(0.0) < 5.0);
        }
        assert!(empirical_moments(&EntryLaw::gaussian(), 17, 10, &mut rng).is_err());
    }

    #[test]
    fn analytic_tables_match_samples() {
        let mut rng = RngStream::new(33, 7);
        for law in [
            EntryLaw::gaussian(),
            EntryLaw::uniform_scaled(),
            EntryLaw::two_point_mixture(0.2, 0.75).unwrap(),
        ] {
            for order in [2, 4] {
                let est = empirical_moments(&law, order, 1_000_000, &mut rng).unwrap();
                assert!(
                    est.z_score(law.moment(order)) < 5.0,
                    "{} order {order}: {est:?}",
                    law.name()
                );
            }
        }
    }
}
