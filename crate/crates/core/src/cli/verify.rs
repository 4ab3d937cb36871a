//! Verification suites, one per acceptance criterion. `verify --suite all`
//! runs every suite in order.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::simulate::{simulate_output, SimKind, SimulateRequest};
use crate::error::Result;
use crate::fraccalc::{
    ddeq_residual, j_transform_approx_fn, rl_derivative, rl_integral, solve_abel_volterra, AbelMethod, AbelProblem,
    GridFunction, Origin,
};
use crate::laplace::{appendix_pairs, process_pairs, verify_pair, Report};
use crate::renewal::{
    classic_fpp_pmf, counting_probability, counting_sum_limit, counting_sums, epoch_cdf, erlang_normalization,
    ml_density, operational_time_density, q_alpha, renewal_function, subordination_check, survival,
    waiting_survival, FracOrder, ProcessSpec,
};
use crate::specfun::{gamma, ml};
use crate::stochastic::{
    chi_square_binned, delta_limit_check, empirical_transform, ks_one_sample, ks_two_sample, mean_estimate,
    simulate_paths, stable_samples, waiting_time_samples, SeededStream, WaitingMethod,
};

/// Seed used when none is given; recorded so reports are reproducible.
pub const DEFAULT_SEED: u64 = 20_240_611;

const ALPHAS: [f64; 3] = [0.3, 0.5, 0.8];
const LAPLACE_S: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Laplace,
    Tables,
    Lemma1,
    Counting,
    Ddeq,
    Subordination,
    Erlang,
    Stable,
    Waiting,
    Paths,
    Delta,
    Jtransform,
    Determinism,
    All,
}

impl Suite {
    pub const EACH: [Suite; 13] = [
        Suite::Laplace,
        Suite::Tables,
        Suite::Lemma1,
        Suite::Counting,
        Suite::Ddeq,
        Suite::Subordination,
        Suite::Erlang,
        Suite::Stable,
        Suite::Waiting,
        Suite::Paths,
        Suite::Delta,
        Suite::Jtransform,
        Suite::Determinism,
    ];

    /// Acceptance criterion number (1-13); 0 for `all`.
    pub fn criterion(self) -> u8 {
        Self::EACH.iter().position(|&s| s == self).map_or(0, |i| i as u8 + 1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Laplace => "laplace",
            Suite::Tables => "tables",
            Suite::Lemma1 => "lemma1",
            Suite::Counting => "counting",
            Suite::Ddeq => "ddeq",
            Suite::Subordination => "subordination",
            Suite::Erlang => "erlang",
            Suite::Stable => "stable",
            Suite::Waiting => "waiting",
            Suite::Paths => "paths",
            Suite::Delta => "delta",
            Suite::Jtransform => "jtransform",
            Suite::Determinism => "determinism",
            Suite::All => "all",
        }
    }

    pub fn is_monte_carlo(self) -> bool {
        matches!(self, Suite::Stable | Suite::Waiting | Suite::Paths | Suite::Delta | Suite::Determinism)
    }
}

/// Tolerances of every suite; a config file may override any of them by key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub laplace: f64,
    pub laplace_phi: f64,
    pub tables: f64,
    pub tables_agree: f64,
    pub lemma1: f64,
    pub lemma1_ratio: f64,
    pub counting: f64,
    pub ddeq: f64,
    pub subordination: f64,
    pub q_alpha: f64,
    pub erlang: f64,
    /// Monte Carlo agreement in standard errors.
    pub mc_se: f64,
    /// Significance level of the KS and χ² tests.
    pub test_level: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            laplace: 1e-5,
            laplace_phi: 1e-6,
            tables: 1e-3,
            tables_agree: 1e-4,
            lemma1: 1e-3,
            lemma1_ratio: 1.5,
            counting: 1e-5,
            ddeq: 1e-3,
            subordination: 1e-5,
            q_alpha: 1e-3,
            erlang: 1e-6,
            mc_se: 3.0,
            test_level: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    /// Replaces the default orders {0.3, 0.5, 0.8} where a suite sweeps α.
    pub alphas: Option<Vec<f64>>,
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            alphas: None,
            seed: DEFAULT_SEED,
            tol: Tolerances::default(),
        }
    }
}

impl VerifyOptions {
    fn alphas(&self) -> Vec<f64> {
        self.alphas.clone().unwrap_or_else(|| ALPHAS.to_vec())
    }

    fn stream(&self, suite: Suite) -> SeededStream {
        SeededStream::new(self.seed, suite.criterion() as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    /// The measured quantity: a residual, a p-value or an error in SE.
    pub value: f64,
    /// The bound it is compared with.
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub detail: Value,
}

impl Check {
    fn at_most(name: impl Into<String>, value: f64, tol: f64, detail: Value) -> Self {
        Self {
            name: name.into(),
            pass: value <= tol,
            value,
            tol,
            detail,
        }
    }

    fn at_least(name: impl Into<String>, value: f64, tol: f64, detail: Value) -> Self {
        Self {
            name: name.into(),
            pass: value >= tol,
            value,
            tol,
            detail,
        }
    }

    fn failed(name: impl Into<String>, tol: f64, err: impl std::fmt::Display) -> Self {
        Self {
            name: name.into(),
            pass: false,
            value: f64::NAN,
            tol,
            detail: json!({ "error": err.to_string() }),
        }
    }

    fn from_result(name: impl Into<String>, tol: f64, r: Result<Check>) -> Self {
        let name = name.into();
        r.unwrap_or_else(|e| Self::failed(name, tol, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub criterion: u8,
    pub pass: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, checks: Vec<Check>) -> Self {
        Self {
            suite: suite.name().into(),
            criterion: suite.criterion(),
            pass: !checks.is_empty() && checks.iter().all(|c| c.pass),
            checks,
        }
    }

    /// The single `PASS`/`FAIL` line for this criterion.
    pub fn summary_line(&self) -> String {
        let worst = self.checks.iter().find(|c| !c.pass).or_else(|| self.checks.last());
        format!(
            "criterion {:>2} {:<13} {} ({} checks{})",
            self.criterion,
            self.suite,
            if self.pass { "PASS" } else { "FAIL" },
            self.checks.len(),
            worst.map_or(String::new(), |c| format!(
                "; {} {}: {:.3e} vs {:.3e}",
                if self.pass { "last" } else { "failed" },
                c.name,
                c.value,
                c.tol
            ))
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub command: String,
    pub pass: bool,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
}

pub fn run(suite: Suite, opts: &VerifyOptions) -> VerifyReport {
    let suites: Vec<SuiteReport> = match suite {
        Suite::All => Suite::EACH.iter().map(|&s| run_suite(s, opts)).collect(),
        s => vec![run_suite(s, opts)],
    };
    VerifyReport {
        command: "verify".into(),
        pass: suites.iter().all(|s| s.pass),
        seed: opts.seed,
        suites,
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    let checks = match suite {
        Suite::Laplace => laplace(opts),
        Suite::Tables => tables(opts),
        Suite::Lemma1 => lemma1(opts),
        Suite::Counting => counting(opts),
        Suite::Ddeq => ddeq(opts),
        Suite::Subordination => subordination(opts),
        Suite::Erlang => erlang(opts),
        Suite::Stable => stable(opts),
        Suite::Waiting => waiting(opts),
        Suite::Paths => paths(opts),
        Suite::Delta => delta(opts),
        Suite::Jtransform => jtransform(opts),
        Suite::Determinism => determinism(opts),
        Suite::All => Suite::EACH.iter().flat_map(|&s| run_suite(s, opts).checks).collect(),
    };
    SuiteReport::new(suite, checks)
}

fn order(a: f64) -> Result<FracOrder> {
    FracOrder::new(a)
}

fn pair_check(r: &Report, alpha: f64) -> Check {
    // the pass rule is residual ≤ tol·(1 + |rhs|); report the scaled residual
    let scaled = r
        .points
        .iter()
        .map(|p| p.abs_residual / (1.0 + p.rhs.abs()))
        .fold(0.0f64, |m, x| if x.is_nan() || m.is_nan() { f64::NAN } else { m.max(x) });
    Check {
        name: format!("alpha={alpha} {}", r.name),
        pass: r.pass,
        value: scaled,
        tol: r.tol,
        detail: serde_json::to_value(&r.points).unwrap_or(Value::Null),
    }
}

fn laplace(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for a in opts.alphas() {
        match appendix_pairs(a) {
            Ok(pairs) => {
                for mut p in pairs {
                    // rows with a restricted region keep only the points inside it
                    let lo = p.s_grid.iter().copied().fold(f64::INFINITY, f64::min);
                    p.s_grid = LAPLACE_S.iter().copied().filter(|&s| s >= lo).collect();
                    out.push(pair_check(&verify_pair(&p, opts.tol.laplace), a));
                }
            }
            Err(e) => out.push(Check::failed(format!("alpha={a} appendix"), opts.tol.laplace, e)),
        }
        match process_pairs(a) {
            Ok(pairs) => {
                if let Some(mut p) = pairs.into_iter().find(|p| p.name.starts_with("phi_a")) {
                    p.s_grid = LAPLACE_S.to_vec();
                    out.push(pair_check(&verify_pair(&p, opts.tol.laplace_phi), a));
                }
            }
            Err(e) => out.push(Check::failed(format!("alpha={a} phi"), opts.tol.laplace_phi, e)),
        }
    }
    out
}

type RealFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// One row of the Abel-Volterra tables: g, the exact solution f, and the
/// origin expansion of g.
pub struct AbelRow {
    pub name: String,
    pub g: RealFn,
    pub f: RealFn,
    pub origin: Option<Origin>,
}

/// The seven table rows at (α, c). The power row appears twice, once with
/// μ < 1 and once with μ > 1.
pub fn abel_rows(a: f64, c: f64) -> Vec<AbelRow> {
    let e = move |b: f64, g: f64, x: f64| ml(a, b, g, -c * x.powf(a)).unwrap_or(f64::NAN);
    let row = |name: &str, g: RealFn, f: RealFn, origin: Option<Origin>| AbelRow {
        name: name.into(),
        g,
        f,
        origin,
    };
    let mut rows = vec![
        row("g=1", Box::new(|_| 1.0), Box::new(move |x| e(1.0, 1.0, x)), None),
        row("g=x", Box::new(|x| x), Box::new(move |x| x * e(2.0, 1.0, x)), None),
        row(
            "g=exp(-x)",
            Box::new(|x: f64| (-x).exp()),
            Box::new(move |x: f64| {
                let (mut s, mut p) = (0.0, 1.0);
                for k in 0..60 {
                    s += p * e(k as f64 + 1.0, 1.0, x);
                    p *= -x;
                }
                s
            }),
            None,
        ),
    ];
    for mu in [0.6, 1.7] {
        rows.push(row(
            &format!("g=x^(mu-1)/Gamma(mu), mu={mu}"),
            Box::new(move |x: f64| x.powf(mu - 1.0) / gamma(mu)),
            Box::new(move |x: f64| x.powf(mu - 1.0) * e(mu, 1.0, x)),
            Origin::new(mu - 1.0, 1.0).ok(),
        ));
    }
    let (mu, g) = (1.4, 2.0);
    rows.push(row(
        &format!("g=x^(mu-1)E^g_(a,mu), mu={mu}, g={g}"),
        Box::new(move |x: f64| x.powf(mu - 1.0) * e(mu, g, x)),
        Box::new(move |x: f64| x.powf(mu - 1.0) * e(mu, g + 1.0, x)),
        Origin::new(mu - 1.0, a).ok(),
    ));
    rows.push(row(
        "g=x^(a-1)/Gamma(a)",
        Box::new(move |x: f64| x.powf(a - 1.0) / gamma(a)),
        Box::new(move |x: f64| x.powf(a - 1.0) * e(a, 1.0, x)),
        Origin::new(a - 1.0, 1.0).ok(),
    ));
    rows.push(row(
        &format!("g=x^(a-1)E^g_(a,a), g={g}"),
        Box::new(move |x: f64| x.powf(a - 1.0) * e(a, g, x)),
        Box::new(move |x: f64| x.powf(a - 1.0) * e(a, g + 1.0, x)),
        Origin::new(a - 1.0, a).ok(),
    ));
    rows
}

fn tables(opts: &VerifyOptions) -> Vec<Check> {
    let params: Vec<(f64, f64)> = match &opts.alphas {
        Some(al) => al.iter().map(|&a| (a, 1.0)).collect(),
        None => vec![(0.4, 1.0), (0.75, 0.6)],
    };
    let mut out = Vec::new();
    for (a, c) in params {
        for row in abel_rows(a, c) {
            let label = format!("alpha={a} c={c} {}", row.name);
            let run = || -> Result<(f64, f64, f64)> {
                let g = GridFunction::sample(&row.g, 2.0, 1e-3, row.origin)?;
                let problem = AbelProblem { order: order(a)?, c, g };
                let r = solve_abel_volterra(&problem, AbelMethod::Resolvent)?;
                let s = solve_abel_volterra(&problem, AbelMethod::Stepping)?;
                Ok((
                    r.sup_diff_by(|x| Ok((row.f)(x)), 0.05, 2.0)?,
                    s.sup_diff_by(|x| Ok((row.f)(x)), 0.05, 2.0)?,
                    r.sup_diff(&s, 0.05, 2.0)?,
                ))
            };
            match run() {
                Ok((er, es, agree)) => {
                    out.push(Check::at_most(format!("{label} resolvent"), er, opts.tol.tables, Value::Null));
                    out.push(Check::at_most(format!("{label} stepping"), es, opts.tol.tables, Value::Null));
                    out.push(Check::at_most(format!("{label} agreement"), agree, opts.tol.tables_agree, Value::Null));
                }
                Err(e) => out.push(Check::failed(label, opts.tol.tables, e)),
            }
        }
    }
    out
}

fn lemma1_residual(a: f64, dt: f64) -> Result<f64> {
    let o = order(a)?;
    let psi = GridFunction::try_sample(|t| survival(o, t), 3.0, dt, Some(Origin::new(a - 1.0, a)?))?;
    let d = rl_derivative(o, &psi)?;
    d.sup_diff_by(|t| ml_density(o, t).map(|v| -v), 0.1, 3.0)
}

fn lemma1(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for a in opts.alphas() {
        match lemma1_residual(a, 1e-3).and_then(|fine| Ok((fine, lemma1_residual(a, 2e-3)?))) {
            Ok((fine, coarse)) => {
                let detail = json!({ "dt_1e-3": fine, "dt_2e-3": coarse });
                out.push(Check::at_most(format!("alpha={a} residual"), fine, opts.tol.lemma1, detail));
                out.push(Check::at_least(
                    format!("alpha={a} refinement ratio"),
                    coarse / fine,
                    opts.tol.lemma1_ratio,
                    Value::Null,
                ));
            }
            Err(e) => out.push(Check::failed(format!("alpha={a}"), opts.tol.lemma1, e)),
        }
    }
    out
}

fn counting(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for a in opts.alphas() {
        for l in [1u32, 2] {
            for t in [0.5, 1.0, 2.0] {
                let label = format!("alpha={a} l={l} t={t}");
                let run = || -> Result<(f64, f64, u32)> {
                    let spec = ProcessSpec::new(order(a)?, l)?;
                    let s = counting_sums(spec, t)?;
                    Ok((
                        (s.sum - counting_sum_limit(spec, t)?).abs(),
                        (s.weighted_sum - renewal_function(spec, t)?).abs(),
                        s.terms,
                    ))
                };
                match run() {
                    Ok((e0, e1, terms)) => {
                        let d = json!({ "terms": terms });
                        out.push(Check::at_most(format!("{label} sum P_n"), e0, opts.tol.counting, d.clone()));
                        out.push(Check::at_most(format!("{label} sum n P_n"), e1, opts.tol.counting, d));
                    }
                    Err(e) => out.push(Check::failed(label, opts.tol.counting, e)),
                }
            }
        }
    }
    out
}

fn ddeq(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for a in opts.alphas() {
        for l in [1u32, 2] {
            let label = format!("alpha={a} l={l} n<=2");
            let r = order(a)
                .and_then(|o| ProcessSpec::new(o, l))
                .and_then(|spec| ddeq_residual(spec, 3.0, 2, 1e-3))
                .map(|r| Check::at_most(label.clone(), r, opts.tol.ddeq, Value::Null));
            out.push(Check::from_result(label, opts.tol.ddeq, r));
        }
    }
    out
}

fn subordination(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let a = 0.5;
    for n in 0..=2u32 {
        for t in [0.5, 1.0, 2.0] {
            let label = format!("alpha={a} n={n} t={t} integral");
            let r = order(a).and_then(|o| {
                let q = subordination_check(o, n, t)?;
                let p = counting_probability(ProcessSpec::single(o), n, t)?;
                Ok(Check::at_most(
                    label.clone(),
                    (q.value - p).abs(),
                    opts.tol.subordination,
                    json!({ "quadrature": q.value, "closed_form": p }),
                ))
            });
            out.push(Check::from_result(label, opts.tol.subordination, r));
        }
    }
    for tau in [0.5, 2.0] {
        let label = format!("alpha={a} tau={tau} q_a = I^(1-a) p2");
        let r = order(a).and_then(|o| {
            // p₂(τ, ·) vanishes to all orders at t = 0
            let p = GridFunction::try_sample(
                |t| if t == 0.0 { Ok(0.0) } else { operational_time_density(o, tau, t) },
                3.0,
                1e-3,
                None,
            )?;
            let q = rl_integral(1.0 - a, &p)?;
            let err = q.sup_diff_by(|t| q_alpha(o, tau, t), 0.1, 3.0)?;
            Ok(Check::at_most(label.clone(), err, opts.tol.q_alpha, Value::Null))
        });
        out.push(Check::from_result(label, opts.tol.q_alpha, r));
    }
    out
}

fn erlang(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for a in opts.alphas() {
        for l in [1u32, 2] {
            for n in [1u32, 2, 3] {
                let label = format!("alpha={a} l={l} n={n}");
                let r = order(a).and_then(|o| ProcessSpec::new(o, l)).and_then(|spec| {
                    let r = erlang_normalization(spec, n)?;
                    Ok(Check::at_most(
                        label.clone(),
                        (r.value - 1.0).abs(),
                        opts.tol.erlang,
                        json!({ "integral": r.value, "abs_err": r.abs_err }),
                    ))
                });
                out.push(Check::from_result(label, opts.tol.erlang, r));
            }
        }
    }
    out
}

/// |estimate − exact| in standard errors.
fn se_check(name: String, est: crate::stochastic::MeanEstimate, exact: f64, k: f64) -> Check {
    let z = (est.mean - exact).abs() / est.std_err;
    Check::at_most(
        name,
        z,
        k,
        json!({ "estimate": est.mean, "std_err": est.std_err, "exact": exact, "n": est.n }),
    )
}

fn stable(opts: &VerifyOptions) -> Vec<Check> {
    let root = opts.stream(Suite::Stable);
    let mut out = Vec::new();
    let o = FracOrder::new(0.5).expect("valid order");
    let xs = stable_samples(o, 100_000, &root.child(0));
    let ks = ks_one_sample(&xs, |t| statrs::function::erf::erfc(1.0 / (2.0 * t.sqrt())));
    out.push(Check::at_least(
        "alpha=0.5 KS vs erfc(1/(2 sqrt t)), n=1e5",
        ks.p_value,
        opts.tol.test_level,
        json!({ "statistic": ks.statistic, "critical_1pct": ks.critical_1pct() }),
    ));
    out.push(Check::at_least(
        "alpha=0.5 all samples positive",
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        f64::MIN_POSITIVE,
        Value::Null,
    ));
    for (i, a) in opts.alphas().into_iter().enumerate() {
        let Ok(o) = order(a) else {
            out.push(Check::failed(format!("alpha={a}"), opts.tol.mc_se, "invalid order"));
            continue;
        };
        let xs = stable_samples(o, 1_000_000, &root.child(1 + i as u64));
        for s in [0.5f64, 1.0, 2.0] {
            out.push(se_check(
                format!("alpha={a} s={s} E[exp(-sY)] = exp(-s^a)"),
                empirical_transform(&xs, s),
                (-s.powf(a)).exp(),
                opts.tol.mc_se,
            ));
        }
    }
    out
}

fn waiting(opts: &VerifyOptions) -> Vec<Check> {
    let root = opts.stream(Suite::Waiting);
    let mut out = Vec::new();
    for (i, a) in opts.alphas().into_iter().enumerate() {
        let Ok(o) = order(a) else {
            out.push(Check::failed(format!("alpha={a}"), opts.tol.mc_se, "invalid order"));
            continue;
        };
        let i = i as u64;
        let xs = waiting_time_samples(o, WaitingMethod::Product, 1_000_000, &root.child(3 * i));
        for t in [0.5, 1.0, 2.0] {
            let ind: Vec<f64> = xs.iter().map(|&x| (x > t) as u8 as f64).collect();
            match waiting_survival(o, t) {
                Ok(exact) => out.push(se_check(
                    format!("alpha={a} t={t} P(T>t) = E_a(-t^a)"),
                    mean_estimate(&ind),
                    exact,
                    opts.tol.mc_se,
                )),
                Err(e) => out.push(Check::failed(format!("alpha={a} t={t}"), opts.tol.mc_se, e)),
            }
        }
        let p = waiting_time_samples(o, WaitingMethod::Product, 100_000, &root.child(3 * i + 1));
        let d = waiting_time_samples(o, WaitingMethod::Direct, 100_000, &root.child(3 * i + 2));
        let ks = ks_two_sample(&p, &d);
        out.push(Check::at_least(
            format!("alpha={a} product vs direct two-sample KS"),
            ks.p_value,
            opts.tol.test_level,
            json!({ "statistic": ks.statistic, "critical_1pct": ks.critical_1pct() }),
        ));
    }
    out
}

fn paths(opts: &VerifyOptions) -> Vec<Check> {
    let root = opts.stream(Suite::Paths);
    let mut out = Vec::new();
    let a = 0.5;
    let o = FracOrder::new(a).expect("valid order");
    let spec = ProcessSpec::single(o);
    let edges: Vec<f64> = (0..=40).map(|i| 0.1 + 4.9 * i as f64 / 40.0).collect();
    match simulate_paths(spec, 5.0, 100_000, &root.child(0)) {
        Ok(ps) => {
            for k in [1u32, 2, 3] {
                let xs: Vec<f64> = ps.iter().map(|p| p.epoch(k as usize).unwrap_or(f64::INFINITY)).collect();
                let chi = chi_square_binned(&xs, &edges, |t| epoch_cdf(spec, k, t).unwrap_or(f64::NAN));
                out.push(Check::at_least(
                    format!("alpha={a} epoch {k} vs erlang_density, chi2"),
                    chi.p_value,
                    opts.tol.test_level,
                    json!({ "statistic": chi.statistic, "dof": chi.dof }),
                ));
            }
        }
        Err(e) => out.push(Check::failed("epoch density", opts.tol.test_level, e)),
    }
    match simulate_paths(spec, 1.0, 100_000, &root.child(1)) {
        Ok(ps) => {
            for n in 0..=5u32 {
                let ind: Vec<f64> = ps.iter().map(|p| (p.count_at(1.0) == n as usize) as u8 as f64).collect();
                match classic_fpp_pmf(o, n, 1.0) {
                    Ok(exact) => out.push(se_check(
                        format!("alpha={a} t=1 P(N={n})"),
                        mean_estimate(&ind),
                        exact,
                        opts.tol.mc_se,
                    )),
                    Err(e) => out.push(Check::failed(format!("P(N={n})"), opts.tol.mc_se, e)),
                }
            }
        }
        Err(e) => out.push(Check::failed("count pmf", opts.tol.mc_se, e)),
    }
    out
}

fn delta(opts: &VerifyOptions) -> Vec<Check> {
    let o = FracOrder::new(0.5).expect("valid order");
    match delta_limit_check(o, 1.0, &[4, 16, 64], 1_000_000, &opts.stream(Suite::Delta)) {
        Ok(r) => {
            let errs: Vec<f64> = r.rows.iter().map(|row| row.error).collect();
            let worst_ratio = errs.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
            vec![Check {
                name: "alpha=0.5 s=1 |E[exp(-s S_l/l^(1/a))] - exp(-1)| decreasing over l=4,16,64".into(),
                pass: r.decreasing,
                value: worst_ratio,
                tol: 1.0,
                detail: serde_json::to_value(&r.rows).unwrap_or(Value::Null),
            }]
        }
        Err(e) => vec![Check::failed("delta limit", 1.0, e)],
    }
}

/// Median |J_γ[e^{−x}](x) − φ_α(x)| over x ∈ {0.5, 0.75, …, 2}.
pub fn j_median_error(a: f64, gamma_: f64) -> Result<f64> {
    let o = order(a)?;
    let mut errs = (0..7)
        .map(|i| {
            let x = 0.5 + 0.25 * i as f64;
            Ok((j_transform_approx_fn(o, |u| (-u).exp(), gamma_, x)? - ml_density(o, x)?).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    errs.sort_by(f64::total_cmp);
    Ok(errs[errs.len() / 2])
}

fn jtransform(_opts: &VerifyOptions) -> Vec<Check> {
    let gammas = [16.0, 64.0, 128.0];
    match gammas.iter().map(|&g| j_median_error(0.5, g)).collect::<Result<Vec<f64>>>() {
        Ok(m) => {
            let worst_ratio = m.windows(2).map(|w| w[1] / w[0]).fold(0.0f64, f64::max);
            vec![Check {
                name: "alpha=0.5 median J-transform error decreasing over gamma=16,64,128".into(),
                pass: worst_ratio < 1.0,
                value: worst_ratio,
                tol: 1.0,
                detail: json!({ "medians": m }),
            }]
        }
        Err(e) => vec![Check::failed("j-transform", 1.0, e)],
    }
}

fn determinism(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    let requests = [
        SimulateRequest::new(SimKind::Waiting, 0.5, opts.seed, 100_000),
        SimulateRequest {
            fold: 2,
            horizon: 2.0,
            ..SimulateRequest::new(SimKind::Paths, 0.5, opts.seed, 20_000)
        },
    ];
    for req in requests {
        let label = format!("simulate --kind {} byte-identical (2 runs x threads 1, 8)", req.kind.name());
        let run = |threads: usize| -> std::result::Result<String, String> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| e.to_string())?;
            pool.install(|| simulate_output(&req).map(|o| o.text).map_err(|e| e.to_string()))
        };
        let outs: std::result::Result<Vec<String>, String> = [1, 1, 8, 8].into_iter().map(run).collect();
        match outs {
            Ok(o) => {
                let same = o.windows(2).all(|w| w[0] == w[1]);
                out.push(Check {
                    name: label,
                    pass: same,
                    value: if same { 0.0 } else { 1.0 },
                    tol: 0.0,
                    detail: json!({ "bytes": o[0].len() }),
                });
            }
            Err(e) => out.push(Check::failed(label, 0.0, e)),
        }
    }
    out
}
