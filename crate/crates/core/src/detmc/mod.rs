//! Products of characteristic polynomials in signed-log form and their
//! Monte Carlo expectation over Wigner ensembles.

mod estimate;
mod lu;
mod signed_log;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;

pub use estimate::{merge_estimates, tree_reduce, Accumulator, Estimate};
pub use lu::{complex_det, lu_log_det, phase_log_det, real_det, signed_log_det, LogDet, Scalar};
pub use signed_log::{PhaseLog, SignedLog};

use crate::ensembles::{fill_wigner, DiagLaw, EntryLaw, HermitianMatrix, RngStream};
use crate::theory::rho_sc;
use crate::{Error, Result};

/// Largest matrix size the estimator accepts without an explicit override.
/// The relative variance of `prod det` grows exponentially with `n`.
pub const DEFAULT_MAX_N: usize = 64;

/// Spectral points `l_j = lambda0 + xi_j / (n rho_sc(lambda0))`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralConfig {
    pub n: usize,
    pub m: usize,
    pub lambda0: f64,
    pub xi: Vec<f64>,
}

impl SpectralConfig {
    pub fn new(n: usize, m: usize, lambda0: f64, xi: Vec<f64>) -> Result<Self> {
        let cfg = Self { n, m, lambda0, xi };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Domain("n and m must be positive".into()));
        }
        if self.xi.len() != 2 * self.m {
            return Err(Error::Domain(format!(
                "xi has {} entries, expected 2m = {}",
                self.xi.len(),
                2 * self.m
            )));
        }
        if !(self.lambda0.abs() < 2.0) {
            return Err(Error::Domain(format!(
                "lambda0 = {} must lie in (-2, 2)",
                self.lambda0
            )));
        }
        if let Some(l) = self.lambdas().into_iter().find(|l| !(l.abs() < 2.0)) {
            return Err(Error::Domain(format!(
                "spectral point {l} leaves (-2, 2) at n = {}",
                self.n
            )));
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<f64> {
        let scale = self.n as f64 * rho_sc(self.lambda0).unwrap_or(0.0);
        self.xi.iter().map(|x| self.lambda0 + x / scale).collect()
    }
}

/// `prod_j det(l_j I - H)`.
///
/// The points are processed in sorted order, so the result is bit-identical
/// under any permutation of `lambdas`.
pub fn charpoly_product(h: &HermitianMatrix, lambdas: &[f64]) -> Result<SignedLog> {
    let mut work = vec![Complex64::new(0.0, 0.0); h.n() * h.n()];
    charpoly_product_with(h, lambdas, &mut work)
}

fn charpoly_product_with(
    h: &HermitianMatrix,
    lambdas: &[f64],
    work: &mut [Complex64],
) -> Result<SignedLog> {
    if lambdas.len() % 2 != 0 {
        return Err(Error::Domain(format!(
            "need an even number of spectral points, got {}",
            lambdas.len()
        )));
    }
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = h.n();
    let mut total = SignedLog::ONE;
    for &lambda in &sorted {
        for (w, &e) in work.iter_mut().zip(h.entries()) {
            *w = -e;
        }
        for i in 0..n {
            work[i * n + i] += lambda;
        }
        let d = lu_log_det(work, n)?;
        total = total * PhaseLog::new(d.unit, d.logmag).to_signed_log();
    }
    Ok(total)
}

/// Sampling parameters for [`estimate_f2m`].
///
/// The sample budget is split over `streams` independent RNG streams; the
/// result depends on `(seed, streams, samples)` but never on `workers`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McOptions {
    pub samples: u64,
    pub seed: u64,
    pub streams: usize,
    pub workers: usize,
    pub allow_large_n: bool,
}

impl McOptions {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            streams: 16,
            workers: 1,
            allow_large_n: false,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_streams(mut self, streams: usize) -> Self {
        self.streams = streams;
        self
    }

    pub fn allow_large_n(mut self, allow: bool) -> Self {
        self.allow_large_n = allow;
        self
    }
}

/// Canonical description of what an estimate measures.
pub fn estimate_key(n: usize, lambdas: &[f64], law: &EntryLaw, diag_law: &DiagLaw) -> String {
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let bits: Vec<String> = sorted.iter().map(|l| format!("{:016x}", l.to_bits())).collect();
    format!(
        "n={n};lambdas=[{}];law={:?};diag={:?}",
        bits.join(","),
        law.kind(),
        diag_law.base().kind()
    )
}

/// Runs `per_stream(rng, count)` on every stream of `opts` and merges the
/// stream accumulators by [`tree_reduce`].
///
/// Stream `id` draws from `RngStream::new(opts.seed, id)` and receives
/// `samples / streams` draws, plus one for the first `samples % streams`
/// streams. Workers pick streams dynamically; the result does not depend on
/// which worker ran which stream.
pub fn run_streams<F>(opts: &McOptions, per_stream: F) -> Result<Accumulator>
where
    F: Fn(&mut RngStream, u64) -> Result<Accumulator> + Sync,
{
    let streams = opts.streams.max(1);
    let per = opts.samples / streams as u64;
    let extra = opts.samples % streams as u64;
    let run = |id: usize| {
        let mut rng = RngStream::new(opts.seed, id as u64);
        per_stream(&mut rng, per + u64::from((id as u64) < extra))
    };
    let workers = opts.workers.clamp(1, streams);
    let results: Vec<Result<Accumulator>> = if workers == 1 {
        (0..streams).map(run).collect()
    } else {
        let slots: Mutex<Vec<Option<Result<Accumulator>>>> =
            Mutex::new((0..streams).map(|_| None).collect());
        let next = AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let id = next.fetch_add(1, Ordering::Relaxed);
                    if id >= streams {
                        break;
                    }
                    let r = run(id);
                    slots.lock().expect("worker panicked")[id] = Some(r);
                });
            }
        });
        slots
            .into_inner()
            .expect("worker panicked")
            .into_iter()
            .map(|r| r.expect("every stream is processed"))
            .collect()
    };
    Ok(tree_reduce(results.into_iter().collect::<Result<Vec<_>>>()?))
}

/// Monte Carlo estimate of `F_2m(lambdas) = E prod_j det(l_j - H)`.
pub fn estimate_f2m_at(
    n: usize,
    lambdas: &[f64],
    law: &EntryLaw,
    diag_law: &DiagLaw,
    opts: &McOptions,
) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    if n > DEFAULT_MAX_N && !opts.allow_large_n {
        return Err(Error::SizeLimit(format!(
            "n = {n} exceeds the Monte Carlo default cap {DEFAULT_MAX_N}; \
             set allow_large_n to override"
        )));
    }
    if lambdas.is_empty() || lambdas.len() % 2 != 0 {
        return Err(Error::Domain("need a positive even number of spectral points".into()));
    }
    if lambdas.len() > crate::ensembles::MAX_MOMENT {
        return Err(Error::Domain(format!(
            "2m = {} exceeds the moment table order {}",
            lambdas.len(),
            crate::ensembles::MAX_MOMENT
        )));
    }
    if opts.samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    law.validate()?;
    let acc = run_streams(opts, |rng, count| {
        let mut h = HermitianMatrix::zeros(n);
        let mut work = vec![Complex64::new(0.0, 0.0); n * n];
        let mut acc = Accumulator::new();
        for _ in 0..count {
            fill_wigner(&mut h, law, diag_law, rng);
            acc.push(charpoly_product_with(&h, lambdas, &mut work)?);
        }
        Ok(acc)
    })?;
    Ok(Estimate::from_accumulator(
        estimate_key(n, lambdas, law, diag_law),
        acc,
    ))
}

/// Monte Carlo estimate of `F_2m` at the points of `config`.
pub fn estimate_f2m(
    config: &SpectralConfig,
    law: &EntryLaw,
    diag_law: &DiagLaw,
    opts: &McOptions,
) -> Result<Estimate> {
    config.validate()?;
    estimate_f2m_at(config.n, &config.lambdas(), law, diag_law, opts)
}
