//! Haar-random unitaries and a Monte Carlo check of the
//! Harish-Chandra/Itzykson-Zuber formula in its fixed-`B` determinantal form
//!
//! `E_U exp{-tr(A - U*BU)^2 / 2} = c_n det[exp{-(a_j - b_k)^2 / 2}] / (Delta(a) Delta(b))`.

use num_complex::Complex64;

use crate::detmc::{real_det, run_streams, Accumulator, Estimate, McOptions, SignedLog};
use crate::ensembles::RngStream;
use crate::theory::vandermonde;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct HaarUnitary {
    n: usize,
    entries: Vec<Complex64>,
}

impl HaarUnitary {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// `max |(U* U - I)_jk|`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                let mut s = Complex64::new(0.0, 0.0);
                for r in 0..n {
                    s += self.get(r, j).conj() * self.get(r, k);
                }
                if j == k {
                    s -= 1.0;
                }
                worst = worst.max(s.norm());
            }
        }
        worst
    }
}

/// Haar unitary from the QR factorization of a complex Ginibre matrix with
/// `R_jj > 0`, computed by Gram–Schmidt with one reorthogonalization pass.
pub fn haar_unitary(n: usize, rng: &mut RngStream) -> HaarUnitary {
    let mut u = HaarUnitary {
        n,
        entries: vec![Complex64::new(0.0, 0.0); n * n],
    };
    fill_haar(&mut u, rng);
    u
}

fn fill_haar(u: &mut HaarUnitary, rng: &mut RngStream) {
    let n = u.n;
    // columns stored contiguously while orthogonalizing
    let mut cols = vec![Complex64::new(0.0, 0.0); n * n];
    for z in cols.iter_mut() {
        *z = rng.complex_normal();
    }
    for k in 0..n {
        for _ in 0..2 {
            for j in 0..k {
                let (done, rest) = cols.split_at_mut(k * n);
                let qj = &done[j * n..(j + 1) * n];
                let vk = &mut rest[..n];
                let proj: Complex64 = qj.iter().zip(vk.iter()).map(|(q, v)| q.conj() * v).sum();
                for (v, q) in vk.iter_mut().zip(qj) {
                    *v -= proj * q;
                }
            }
        }
        let vk = &mut cols[k * n..(k + 1) * n];
        let norm = vk.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for v in vk.iter_mut() {
            *v /= norm;
        }
    }
    for k in 0..n {
        for r in 0..n {
            u.entries[r * n + k] = cols[k * n + r];
        }
    }
}

/// Hermitian `W* diag(a) W`, row-major.
pub fn conjugated_diagonal(a: &[f64], w: &HaarUnitary) -> Vec<Complex64> {
    let n = a.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for k in 0..n {
            out[j * n + k] = (0..n)
                .map(|r| w.get(r, j).conj() * a[r] * w.get(r, k))
                .sum();
        }
    }
    out
}

fn check_hermitian(a: &[Complex64], n: usize) -> Result<()> {
    if a.len() != n * n {
        return Err(Error::Domain(format!("A must be {n}x{n}")));
    }
    for j in 0..n {
        for k in 0..n {
            if (a[j * n + k] - a[k * n + j].conj()).norm() > 1e-12 {
                return Err(Error::Domain("A must be Hermitian".into()));
            }
        }
    }
    Ok(())
}

/// Monte Carlo average over Haar `U` of `exp{-tr(A - U* diag(b) U)^2 / 2}`
/// for Hermitian `A` (row-major).
pub fn hciz_lhs(a: &[Complex64], b: &[f64], opts: &McOptions) -> Result<Estimate> {
    let n = b.len();
    if n == 0 {
        return Err(Error::Domain("n must be positive".into()));
    }
    check_hermitian(a, n)?;
    if opts.samples < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let acc = run_streams(opts, |rng, count| {
        let mut u = HaarUnitary {
            n,
            entries: vec![Complex64::new(0.0, 0.0); n * n],
        };
        let mut acc = Accumulator::new();
        for _ in 0..count {
            fill_haar(&mut u, rng);
            let mut tr = 0.0;
            for j in 0..n {
                for k in 0..n {
                    let ubu: Complex64 = (0..n)
                        .map(|r| u.get(r, j).conj() * b[r] * u.get(r, k))
                        .sum();
                    tr += (a[j * n + k] - ubu).norm_sqr();
                }
            }
            acc.push(SignedLog::from_ln(-0.5 * tr));
        }
        Ok(acc)
    })?;
    Ok(Estimate::from_accumulator(format!("hciz;n={n}"), acc))
}

/// `det[exp{-(a_j - b_k)^2 / 2}] / (Delta(a) Delta(b))`.
pub fn hciz_rhs(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len();
    if n == 0 || b.len() != n {
        return Err(Error::Domain("a and b must have the same positive length".into()));
    }
    let va = vandermonde(a);
    let vb = vandermonde(b);
    if va.is_zero() || vb.is_zero() {
        return Err(Error::Singular("coincident eigenvalues".into()));
    }
    let m: Vec<f64> = (0..n * n)
        .map(|idx| (-0.5 * (a[idx / n] - b[idx % n]).powi(2)).exp())
        .collect();
    let det = SignedLog::from_f64(real_det(&m, n)?);
    Ok((det * (va * vb).recip()).to_f64())
}

/// One `(A, B)` pair of a constancy run.
#[derive(Clone, Debug, PartialEq)]
pub struct HcizTrial {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub ratio_stderr: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HcizReport {
    pub n: usize,
    pub trials: Vec<HcizTrial>,
    /// Inverse-variance weighted mean of the ratios.
    pub fitted_constant: f64,
    pub fitted_stderr: f64,
    /// `max ratio / min ratio - 1`.
    pub dispersion: f64,
    /// Relative standard errors of the extreme ratios, added in quadrature.
    pub combined_stderr: f64,
    /// `dispersion / combined_stderr` (0 when both are 0).
    pub dispersion_in_stderr: f64,
    pub passed: bool,
}

/// Sorted eigenvalues in `[-1.5, 1.5]` with pairwise gaps of at least 0.3.
fn spread_spectrum(n: usize, rng: &mut RngStream) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..n).map(|_| 3.0 * rng.uniform() - 1.5).collect();
        v.sort_by(f64::total_cmp);
        if v.windows(2).all(|w| w[1] - w[0] >= 0.3) {
            return v;
        }
    }
}

/// Draws `trials` random pairs (`A = W* diag(a) W` with Haar `W`,
/// `B = diag(b)`), estimates `lhs / rhs` for each and tests that the ratio is
/// one constant, passing when the dispersion is below three combined
/// standard errors. The constant itself is fitted, not assumed.
pub fn hciz_ratio_constancy(n: usize, trials: usize, opts: &McOptions) -> Result<HcizReport> {
    if n == 0 || trials == 0 {
        return Err(Error::Domain("n and trials must be positive".into()));
    }
    let mut setup = RngStream::new(opts.seed, u64::MAX);
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let a = spread_spectrum(n, &mut setup);
        let b = spread_spectrum(n, &mut setup);
        let w = haar_unitary(n, &mut setup);
        let amat = conjugated_diagonal(&a, &w);
        let trial_opts = McOptions {
            seed: opts.seed.wrapping_add(1 + t as u64),
            ..*opts
        };
        let est = hciz_lhs(&amat, &b, &trial_opts)?;
        let lhs = est.mean().to_f64();
        let lhs_stderr = est.stderr().to_f64();
        let rhs = hciz_rhs(&a, &b)?;
        out.push(HcizTrial {
            a,
            b,
            lhs,
            lhs_stderr,
            rhs,
            ratio: lhs / rhs,
            ratio_stderr: lhs_stderr / rhs.abs(),
        });
    }
    let (mut wsum, mut wr) = (0.0, 0.0);
    for t in &out {
        if t.ratio_stderr > 0.0 {
            let w = t.ratio_stderr.powi(-2);
            wsum += w;
            wr += w * t.ratio;
        }
    }
    let (fitted_constant, fitted_stderr) = if wsum > 0.0 {
        (wr / wsum, wsum.powf(-0.5))
    } else {
        (out.iter().map(|t| t.ratio).sum::<f64>() / out.len() as f64, 0.0)
    };
    let hi = out.iter().max_by(|x, y| x.ratio.total_cmp(&y.ratio)).unwrap();
    let lo = out.iter().min_by(|x, y| x.ratio.total_cmp(&y.ratio)).unwrap();
    let dispersion = hi.ratio / lo.ratio - 1.0;
    let combined_stderr =
        ((hi.ratio_stderr / hi.ratio).powi(2) + (lo.ratio_stderr / lo.ratio).powi(2)).sqrt();
    let dispersion_in_stderr = if dispersion == 0.0 {
        0.0
    } else {
        dispersion / combined_stderr
    };
    let passed = if n == 1 {
        out.iter().all(|t| (t.ratio - 1.0).abs() < 1e-12)
    } else {
        dispersion_in_stderr < 3.0
    };
    Ok(HcizReport {
        n,
        trials: out,
        fitted_constant,
        fitted_stderr,
        dispersion,
        combined_stderr,
        dispersion_in_stderr,
        passed,
    })
}
