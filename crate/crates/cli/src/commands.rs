//! Command implementations. Each returns a [`Table`] built from a resolved
//! [`RunConfig`].

use charpoly_core::detmc::{estimate_f2m, estimate_f2m_at, McOptions, SignedLog, SpectralConfig};
use charpoly_core::ensembles::{DiagLaw, EntryLaw, RngStream};
use charpoly_core::hciz::hciz_ratio_constancy;
use charpoly_core::oracle::exact_f2m_small;
use charpoly_core::saddle::{
    cauchy_det_identity_check, config_sum_leading, contour_f2_asymptotic, exact_f2_representation,
    verify_landscape, ContourSpec,
};
use charpoly_core::theory::{
    alpha, d_n, gk_f2_asymptotic, normalization, rho_sc, sine_kernel_ratio, theorem1_rhs,
    TheoryParams,
};
use charpoly_core::Error;

use crate::config::{ConfigError, RunConfig};
use crate::output::{signed_log_cells, Cell, Table};

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Core(Error::NonConvergence { .. }) => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CommandError>;

/// Workers only change scheduling, never results, so they stay out of the
/// embedded config.
pub struct Context {
    pub config: RunConfig,
    pub workers: usize,
}

impl Context {
    fn mc(&self, samples: u64, seed: u64) -> McOptions {
        McOptions::new(samples, seed)
            .with_streams(self.config.streams)
            .with_workers(self.workers)
            .allow_large_n(self.config.allow_large_n)
    }

    fn law(&self) -> Result<EntryLaw> {
        Ok(self.config.law.build()?)
    }

    fn params(&self, n: usize) -> Result<TheoryParams> {
        let c = &self.config;
        Ok(TheoryParams::new(c.lambda0, n, c.m, self.law()?.kappa4(), c.xi.clone())?)
    }

    fn table(&self, command: &str, columns: &[&str]) -> Table {
        Table::new(command, self.config.to_json(), columns)
    }

    fn xi2(&self) -> Result<[f64; 2]> {
        match self.config.xi[..] {
            [a, b] => Ok([a, b]),
            _ => Err(ConfigError::Field {
                field: "m",
                message: format!("backend `{}` needs m = 1", self.config.backend),
            }
            .into()),
        }
    }
}

pub fn estimate(ctx: &Context) -> Result<Table> {
    let c = &ctx.config;
    let law = ctx.law()?;
    let diag = DiagLaw::gaussian();
    let xi_cols: Vec<String> = (1..=c.xi.len()).map(|j| format!("xi_{j}")).collect();
    let mut columns = vec!["n", "law", "lambda0"];
    columns.extend(xi_cols.iter().map(String::as_str));
    columns.extend([
        "sign", "logmag", "value", "stderr_rel", "sign_unstable", "samples", "seed",
        "normalized", "theorem1_rhs",
    ]);
    let mut t = ctx.table("estimate", &columns);
    for &n in &c.n {
        let sc = SpectralConfig::new(n, c.m, c.lambda0, c.xi.clone())?;
        let est = estimate_f2m(&sc, &law, &diag, &ctx.mc(c.samples, c.seed))?;
        let params = ctx.params(n)?;
        let normalized = (est.mean() * normalization(&params)?.recip()).to_f64();
        let mut row = vec![Cell::from(n), law.name().into(), c.lambda0.into()];
        row.extend(c.xi.iter().map(|&x| Cell::from(x)));
        row.extend(signed_log_cells(est.mean()));
        row.extend([
            Cell::from(est.stderr_rel()),
            Cell::from(est.sign_unstable()),
            Cell::from(est.count()),
            Cell::from(c.seed),
            Cell::from(normalized),
            Cell::from(theorem1_rhs(&params)?),
        ]);
        t.push(row);
    }
    Ok(t)
}

pub fn converge(ctx: &Context) -> Result<Table> {
    let c = &ctx.config;
    let law = ctx.law()?;
    let mut t = ctx.table(
        "converge",
        &[
            "backend", "n", "normalized", "target", "deviation", "ratio", "error_bar", "nodes",
        ],
    );
    if c.backend == "config-sum" {
        let params = ctx.params(c.n[0])?;
        let value = config_sum_leading(c.m, c.lambda0, law.kappa4(), &c.xi)?;
        let target = theorem1_rhs(&params)?;
        t.push(vec![
            "config-sum".into(),
            Cell::Null,
            value.into(),
            target.into(),
            (value - target).into(),
            ratio(value, target),
            Cell::Null,
            Cell::Null,
        ]);
        return Ok(t);
    }
    for &n in &c.n {
        let params = ctx.params(n)?;
        let target = theorem1_rhs(&params)?;
        let (normalized, error_bar, nodes) = match c.backend.as_str() {
            "contour" => {
                let spec = ContourSpec {
                    a: c.contour.a,
                    big_a: c.contour.big_a,
                    tol: c.tol,
                    ..ContourSpec::default()
                };
                let v = contour_f2_asymptotic(n, c.lambda0, law.kappa4(), ctx.xi2()?, &spec)?;
                (v.normalized, Cell::from(v.imag_residual), Cell::from(v.nodes))
            }
            "exact" => {
                let xi = ctx.xi2()?;
                let sc = SpectralConfig::new(n, 1, c.lambda0, xi.to_vec())?;
                let l = sc.lambdas();
                let v = exact_f2_representation(n, [l[0], l[1]], &law, c.tol)?;
                let norm = normalization(&params)?.recip();
                let normalized = (SignedLog::from_f64(v.value) * norm).to_f64();
                (normalized, Cell::from(v.imag_residual), Cell::from(v.nodes))
            }
            _ => {
                let sc = SpectralConfig::new(n, c.m, c.lambda0, c.xi.clone())?;
                let est = estimate_f2m(&sc, &law, &DiagLaw::gaussian(), &ctx.mc(c.samples, c.seed))?;
                let normalized = (est.mean() * normalization(&params)?.recip()).to_f64();
                let bar = normalized.abs() * est.stderr_rel();
                (normalized, Cell::from(bar), Cell::from(est.count()))
            }
        };
        t.push(vec![
            c.backend.as_str().into(),
            n.into(),
            normalized.into(),
            target.into(),
            (normalized - target).into(),
            ratio(normalized, target),
            error_bar,
            nodes,
        ]);
    }
    Ok(t)
}

/// `value / target`, null where the target vanishes.
fn ratio(value: f64, target: f64) -> Cell {
    (target != 0.0).then(|| value / target).into()
}

pub fn theory(ctx: &Context) -> Result<Table> {
    let c = &ctx.config;
    let law = ctx.law()?;
    let mut t = ctx.table("theory", &["quantity", "n", "index", "sign", "logmag", "value", "note"]);
    let scalar = |t: &mut Table, q: &str, n: Option<usize>, i: Option<usize>, v: SignedLog, note: &str| {
        let mut row = vec![Cell::from(q), n.into(), i.into()];
        row.extend(signed_log_cells(v));
        row.push(note.into());
        t.push(row);
    };
    scalar(&mut t, "rho_sc", None, None, SignedLog::from_f64(rho_sc(c.lambda0)?), "");
    scalar(&mut t, "alpha", None, None, SignedLog::from_f64(alpha(c.lambda0)?), "");
    scalar(&mut t, "kappa4", None, None, SignedLog::from_f64(law.kappa4()), law.name());
    let kernel = sine_kernel_ratio(&c.xi)?;
    let note = if kernel.confluent { "confluent" } else { "direct" };
    scalar(&mut t, "sine_kernel_ratio", None, None, SignedLog::from_f64(kernel.value), note);
    let params = ctx.params(c.n[0])?;
    scalar(&mut t, "theorem1_rhs", None, None, SignedLog::from_f64(theorem1_rhs(&params)?), "");
    match config_sum_leading(c.m, c.lambda0, law.kappa4(), &c.xi) {
        Ok(v) => scalar(&mut t, "config_sum", None, None, SignedLog::from_f64(v), ""),
        Err(Error::Singular(_)) => {}
        Err(e) => return Err(e.into()),
    }
    for &n in &c.n {
        let params = ctx.params(n)?;
        for (i, &x) in c.xi.iter().enumerate() {
            scalar(&mut t, "d_n", Some(n), Some(i + 1), d_n(x, &params)?, "");
        }
        scalar(&mut t, "normalization", Some(n), None, normalization(&params)?, "");
        if c.m == 1 {
            let gk = gk_f2_asymptotic(&params, c.xi[0], c.xi[1])?;
            scalar(&mut t, "gk_f2_asymptotic", Some(n), None, gk, "");
        }
    }
    Ok(t)
}

pub fn hciz_check(ctx: &Context) -> Result<Table> {
    let c = &ctx.config;
    let mut t = ctx.table(
        "hciz-check",
        &["n", "trial", "a", "b", "lhs", "lhs_stderr", "rhs", "ratio", "ratio_stderr"],
    );
    let mut passed = true;
    for &n in &c.n {
        let report = hciz_ratio_constancy(n, c.trials, &ctx.mc(c.samples, c.seed))?;
        for (k, tr) in report.trials.iter().enumerate() {
            t.push(vec![
                n.into(),
                k.into(),
                join(&tr.a).into(),
                join(&tr.b).into(),
                tr.lhs.into(),
                tr.lhs_stderr.into(),
                tr.rhs.into(),
                tr.ratio.into(),
                tr.ratio_stderr.into(),
            ]);
        }
        t.push(vec![
            n.into(),
            Cell::Null,
            "fitted".into(),
            format!("dispersion_in_stderr={:.6e}", report.dispersion_in_stderr).into(),
            Cell::Null,
            Cell::Null,
            Cell::Null,
            report.fitted_constant.into(),
            report.fitted_stderr.into(),
        ]);
        passed &= report.passed;
    }
    t.passed = Some(passed);
    Ok(t)
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(";")
}

pub const SUITES: [&str; 5] = ["landscape", "hciz", "identity", "oracle", "representation"];

/// One row per check item; the table passes when every item does.
struct Checks {
    table: Table,
}

impl Checks {
    fn new(ctx: &Context, suite: &str) -> Self {
        Self {
            table: ctx.table(
                &format!("check {suite}"),
                &["item", "value", "threshold", "passed"],
            ),
        }
    }

    fn item(&mut self, item: String, value: f64, threshold: f64, passed: bool) {
        self.table
            .push(vec![item.into(), value.into(), threshold.into(), passed.into()]);
    }

    /// `value <= threshold`, with NaN failing.
    fn at_most(&mut self, item: String, value: f64, threshold: f64) {
        self.item(item, value, threshold, value <= threshold);
    }

    fn finish(mut self) -> Table {
        let passed = self.table.rows.iter().all(|r| r[3] == Cell::Bool(true));
        self.table.passed = Some(passed);
        self.table
    }
}

/// Spectral grids used by the small-n suites.
pub const SMALL_GRIDS: [[f64; 2]; 3] = [[0.0, 0.0], [0.5, 0.5], [0.3, 0.7]];

pub fn check(ctx: &Context, suite: &str) -> Result<Table> {
    let c = &ctx.config;
    let mut checks = Checks::new(ctx, suite);
    match suite {
        "landscape" => {
            for lambda0 in [0.0, 0.5, 1.0, 1.5] {
                for n in [64, 256] {
                    let r = verify_landscape(lambda0, n)?;
                    let v = if r.passed { 0.0 } else { 1.0 };
                    checks.item(
                        format!(
                            "lambda0={lambda0} n={n} offset={:.3e} stationarity={:.3e} C={:.3e}",
                            r.minima_offset, r.stationarity, r.fitted_c
                        ),
                        v,
                        0.0,
                        r.passed,
                    );
                }
            }
        }
        "hciz" => {
            for n in [1, 2, 3] {
                let r = hciz_ratio_constancy(n, c.trials, &ctx.mc(c.samples, c.seed))?;
                let (value, threshold) = if n == 1 {
                    (r.dispersion, 1e-12)
                } else {
                    (r.dispersion_in_stderr, 3.0)
                };
                checks.item(
                    format!("n={n} fitted={:.6e}", r.fitted_constant),
                    value,
                    threshold,
                    r.passed,
                );
            }
        }
        "identity" => {
            let mut rng = RngStream::new(c.seed, 0);
            for m in 1..=3 {
                let mut worst: f64 = 0.0;
                for _ in 0..50 {
                    let xi = separated(&mut rng, 2 * m);
                    let value = config_sum_leading(m, c.lambda0, ctx.law()?.kappa4(), &xi)?;
                    let params = TheoryParams::new(c.lambda0, 1, m, ctx.law()?.kappa4(), xi)?;
                    let target = theorem1_rhs(&params)?;
                    worst = worst.max((value - target).abs() / target.abs().max(1.0));
                }
                checks.at_most(format!("config_sum vs rhs m={m}"), worst, 1e-8);
            }
            let mut worst: f64 = 0.0;
            for k in 0..100 {
                let m = 1 + k % 4;
                let v = separated(&mut rng, 2 * m);
                worst = worst.max(cauchy_det_identity_check(&v[..m], &v[m..])?);
            }
            checks.at_most("cauchy identity".into(), worst, 1e-10);
        }
        "oracle" => {
            let law = ctx.law()?;
            let diag = DiagLaw::gaussian();
            let mut cases: Vec<(usize, Vec<f64>)> = Vec::new();
            for n in 1..=3 {
                for g in SMALL_GRIDS {
                    cases.push((n, g.to_vec()));
                }
            }
            for g in SMALL_GRIDS {
                cases.push((2, [g, g].concat()));
            }
            for (n, lambdas) in cases {
                let exact = exact_f2m_small(n, lambdas.len() / 2, &lambdas, &law, &diag)?;
                let est = estimate_f2m_at(n, &lambdas, &law, &diag, &ctx.mc(c.samples, c.seed))?;
                checks.at_most(
                    format!("n={n} lambdas={lambdas:?} oracle={exact:.6e}"),
                    est.z_score(exact).abs(),
                    4.0,
                );
            }
        }
        "representation" => {
            for law in [EntryLaw::gaussian(), EntryLaw::rademacher()] {
                for n in 1..=3 {
                    for g in SMALL_GRIDS {
                        let exact = exact_f2m_small(n, 1, &g, &law, &DiagLaw::gaussian())?;
                        let rep = exact_f2_representation(n, g, &law, c.tol)?;
                        let rel = (rep.value - exact).abs() / exact.abs().max(f64::MIN_POSITIVE);
                        checks.at_most(
                            format!("{} n={n} lambdas={g:?}", law.name()),
                            rel,
                            1e-3,
                        );
                    }
                }
            }
        }
        other => {
            return Err(ConfigError::Field {
                field: "suite",
                message: format!("unknown suite `{other}` ({})", SUITES.join(", ")),
            }
            .into())
        }
    }
    Ok(checks.finish())
}

/// Points in `[-2, 2]` with pairwise gaps above 0.1.
pub fn separated(rng: &mut RngStream, count: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..count).map(|_| 4.0 * rng.uniform() - 2.0).collect();
        if (0..count).all(|i| (0..i).all(|j| (v[i] - v[j]).abs() > 0.1)) {
            return v;
        }
    }
}
