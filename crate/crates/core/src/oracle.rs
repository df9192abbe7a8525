//! Exact `F_2m` at tiny `n` by expanding `prod_j det(l_j - W/sqrt(n))` as a
//! polynomial in the real entry variables and taking expectations
//! monomial by monomial.
//!
//! Variables are numbered `0..n` for the diagonal entries `w_jj`, then
//! `n + 2q` and `n + 2q + 1` for `Re w_jk` and `Im w_jk` of the `q`-th pair
//! `j < k` in row-major order.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::ensembles::{DiagLaw, EntryLaw};
use crate::{Error, Result};

pub const MAX_N: usize = 3;
pub const MAX_M: usize = 2;

/// Polynomial with complex coefficients in the `n^2` real entry variables.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u8>, Complex64>,
}

impl MomentPolynomial {
    pub fn constant(nvars: usize, c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        if c != Complex64::new(0.0, 0.0) {
            terms.insert(vec![0; nvars], c);
        }
        Self { nvars, terms }
    }

    pub fn variable(nvars: usize, var: usize, c: Complex64) -> Self {
        let mut e = vec![0u8; nvars];
        e[var] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(e, c);
        Self { nvars, terms }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, Complex64> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (e, c) in &other.terms {
            *self.terms.entry(e.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut terms: BTreeMap<Vec<u8>, Complex64> = BTreeMap::new();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e: Vec<u8> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert(Complex64::new(0.0, 0.0)) += ca * cb;
            }
        }
        Self {
            nvars: self.nvars,
            terms,
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn max_exponent(&self) -> u8 {
        self.terms
            .keys()
            .flat_map(|e| e.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Expectation with the first `n_diag` variables drawn from `diag_law`
    /// and the rest from `law`, all independent.
    pub fn expectation(&self, n_diag: usize, law: &EntryLaw, diag_law: &DiagLaw) -> Complex64 {
        let mut total = Complex64::new(0.0, 0.0);
        for (e, c) in &self.terms {
            let mut w = 1.0;
            for (v, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                w *= if v < n_diag {
                    diag_law.moment(k as usize)
                } else {
                    law.moment(k as usize)
                };
                if w == 0.0 {
                    break;
                }
            }
            total += c * w;
        }
        total
    }
}

fn pair_index(n: usize, j: usize, k: usize) -> usize {
    // number of pairs in rows before j, then the offset inside row j
    j * n - j * (j + 1) / 2 + (k - j - 1)
}

fn entry(n: usize, lambda: f64, j: usize, k: usize) -> MomentPolynomial {
    let nvars = n * n;
    let s = 1.0 / (n as f64).sqrt();
    let c = |re: f64, im: f64| Complex64::new(re, im);
    if j == k {
        let mut p = MomentPolynomial::constant(nvars, c(lambda, 0.0));
        p.add_assign(&MomentPolynomial::variable(nvars, j, c(-s, 0.0)));
        return p;
    }
    let (a, b, conj) = if j < k { (j, k, 1.0) } else { (k, j, -1.0) };
    let q = pair_index(n, a, b);
    let mut p = MomentPolynomial::variable(nvars, n + 2 * q, c(-s, 0.0));
    p.add_assign(&MomentPolynomial::variable(nvars, n + 2 * q + 1, c(0.0, -s * conj)));
    p
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let mut inversions = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

/// `det(lambda I - W/sqrt(n))` as a polynomial in the entry variables.
pub fn charpoly_polynomial(n: usize, lambda: f64) -> MomentPolynomial {
    let nvars = n * n;
    let mut total = MomentPolynomial::constant(nvars, Complex64::new(0.0, 0.0));
    for (perm, sign) in permutations(n) {
        let mut term = MomentPolynomial::constant(nvars, Complex64::new(sign, 0.0));
        for (j, &k) in perm.iter().enumerate() {
            term = term.mul(&entry(n, lambda, j, k));
        }
        total.add_assign(&term);
    }
    total
}

/// Exact `E prod_j det(l_j - H)` for `n <= 3`, `2m <= 4` points.
pub fn exact_f2m_small(
    n: usize,
    m: usize,
    lambdas: &[f64],
    law: &EntryLaw,
    diag_law: &DiagLaw,
) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(Error::Domain("n and m must be positive".into()));
    }
    if n > MAX_N || m > MAX_M {
        return Err(Error::SizeLimit(format!(
            "oracle supports n <= {MAX_N}, m <= {MAX_M}; got n = {n}, m = {m}"
        )));
    }
    if lambdas.len() != 2 * m {
        return Err(Error::Domain(format!(
            "expected {} spectral points, got {}",
            2 * m,
            lambdas.len()
        )));
    }
    law.validate()?;
    let mut sorted = lambdas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut product = MomentPolynomial::constant(n * n, Complex64::new(1.0, 0.0));
    for &l in &sorted {
        product = product.mul(&charpoly_polynomial(n, l));
    }
    let value = product.expectation(n, law, diag_law);
    debug_assert!(value.im.abs() <= 1e-12 * value.re.abs().max(1.0));
    Ok(value.re)
}

/// Exact slope `dF_2/dkappa4` at `m = 1`, by evaluating the oracle under two
/// mixture laws that share all moments the expansion uses except `mu4`.
pub fn oracle_kappa4_slope(n: usize, lambdas: &[f64]) -> Result<f64> {
    if lambdas.len() != 2 {
        return Err(Error::Domain("the kappa4 slope is defined for m = 1".into()));
    }
    let (mu_a, mu_b) = (0.5, 1.0);
    let a = EntryLaw::two_point_mixture(0.2, mu_a)?;
    let b = EntryLaw::two_point_mixture(0.2, mu_b)?;
    let diag = DiagLaw::gaussian();
    let fa = exact_f2m_small(n, 1, lambdas, &a, &diag)?;
    let fb = exact_f2m_small(n, 1, lambdas, &b, &diag)?;
    Ok((fb - fa) / (mu_b - mu_a))
}
