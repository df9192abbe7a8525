//! Gauss rules from the Golub–Welsch eigenvalue problem.

use nalgebra::{DMatrix, SymmetricEigen};

/// Nodes and weights, sorted by node.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

fn golub_welsch(diag: &[f64], off: &[f64], mu0: f64) -> Rule {
    let k = diag.len();
    let mut j = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        j[(i, i)] = diag[i];
        if i + 1 < k {
            j[(i, i + 1)] = off[i];
            j[(i + 1, i)] = off[i];
        }
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

// Rules for even weights are symmetric; enforce it exactly so odd moments
// vanish to rounding.
fn symmetrize(mut r: Rule) -> Rule {
    let k = r.len();
    for i in 0..k / 2 {
        let j = k - 1 - i;
        let x = 0.5 * (r.nodes[j] - r.nodes[i]);
        let w = 0.5 * (r.weights[i] + r.weights[j]);
        r.nodes[i] = -x;
        r.nodes[j] = x;
        r.weights[i] = w;
        r.weights[j] = w;
    }
    if k % 2 == 1 {
        r.nodes[k / 2] = 0.0;
    }
    r
}

/// Gauss–Hermite rule for weight `exp(-x^2)` on the real line.
pub fn gauss_hermite(k: usize) -> Rule {
    let diag = vec![0.0; k];
    let off: Vec<f64> = (1..k).map(|i| (i as f64 / 2.0).sqrt()).collect();
    symmetrize(golub_welsch(&diag, &off, std::f64::consts::PI.sqrt()))
}

/// Gauss–Laguerre rule for weight `exp(-x)` on `[0, inf)`.
pub fn gauss_laguerre(k: usize) -> Rule {
    let diag: Vec<f64> = (0..k).map(|i| 2.0 * i as f64 + 1.0).collect();
    let off: Vec<f64> = (1..k).map(|i| i as f64).collect();
    golub_welsch(&diag, &off, 1.0)
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(k: usize) -> Rule {
    let diag = vec![0.0; k];
    let off: Vec<f64> = (1..k)
        .map(|i| {
            let i = i as f64;
            i / (4.0 * i * i - 1.0).sqrt()
        })
        .collect();
    symmetrize(golub_welsch(&diag, &off, 2.0))
}

/// Composite Gauss–Legendre rule on `[lo, hi]` with `panels` equal panels.
pub fn composite_legendre(lo: f64, hi: f64, panels: usize, base: &Rule) -> Rule {
    let h = (hi - lo) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * base.len());
    let mut weights = Vec::with_capacity(panels * base.len());
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (&x, &w) in base.nodes.iter().zip(&base.weights) {
            nodes.push(mid + 0.5 * h * x);
            weights.push(0.5 * h * w);
        }
    }
    Rule { nodes, weights }
}
