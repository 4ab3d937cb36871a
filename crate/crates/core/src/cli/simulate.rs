//! `simulate`: seeded Monte Carlo runs summarized next to their analytic
//! counterparts.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CliError, Format};
use crate::quad::{integrate, QuadConfig};
use crate::renewal::{classic_fpp_pmf, operational_time_density, waiting_survival, FracOrder, ProcessSpec};
use crate::specfun::gamma;
use crate::stochastic::{
    fmt_real, ks_one_sample, operational_time_samples, simulate_paths, stable_samples, waiting_time_samples,
    EmpiricalSummary, SeededStream, WaitingMethod,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SimKind {
    /// Renewal paths; summary is the pmf of N(horizon).
    Paths,
    /// Mittag-Leffler waiting times; summary is a histogram.
    Waiting,
    /// One-sided stable variates; summary is a histogram.
    Stable,
    /// Operational times at --t; summary is a histogram.
    Operational,
}

impl SimKind {
    pub fn name(self) -> &'static str {
        match self {
            SimKind::Paths => "paths",
            SimKind::Waiting => "waiting",
            SimKind::Stable => "stable",
            SimKind::Operational => "operational",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateRequest {
    pub kind: SimKind,
    pub alpha: f64,
    pub fold: u32,
    pub horizon: f64,
    pub t: f64,
    pub n: usize,
    pub seed: u64,
    pub method: WaitingMethod,
    /// Histogram edges.
    pub edges: Vec<f64>,
    /// Largest count listed separately in the pmf.
    pub max_n: u64,
    pub level: f64,
    pub format: Format,
}

impl SimulateRequest {
    pub fn new(kind: SimKind, alpha: f64, seed: u64, n: usize) -> Self {
        Self {
            kind,
            alpha,
            fold: 1,
            horizon: 1.0,
            t: 1.0,
            n,
            seed,
            method: WaitingMethod::Product,
            edges: default_edges(),
            max_n: 10,
            level: 0.95,
            format: Format::Csv,
        }
    }
}

pub fn default_edges() -> Vec<f64> {
    (0..=40).map(|i| 0.1 + 4.9 * i as f64 / 40.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub text: String,
    /// Raw variates (or counts) in draw order.
    pub raw: Vec<f64>,
}

/// Analytic column for a histogram: the exact bin mass over the width, or
/// the plain mass for the two open-ended rows.
fn histogram_analytic<F: Fn(f64) -> crate::Result<f64>>(
    summary: EmpiricalSummary,
    cdf: F,
) -> Result<EmpiricalSummary, CliError> {
    let mut rows = Vec::with_capacity(summary.rows.len());
    for r in &summary.rows {
        let lo = if r.bin_left.is_finite() { cdf(r.bin_left).map_err(|e| CliError::numerical(e, r.bin_left))? } else { 0.0 };
        let hi = if r.bin_right.is_finite() { cdf(r.bin_right).map_err(|e| CliError::numerical(e, r.bin_right))? } else { 1.0 };
        let width = if r.bin_left.is_finite() && r.bin_right.is_finite() { r.bin_right - r.bin_left } else { 1.0 };
        rows.push((hi - lo) / width);
    }
    let mut it = rows.into_iter();
    Ok(summary.with_analytic(|_| it.next()))
}

pub fn simulate_output(req: &SimulateRequest) -> Result<SimOutput, CliError> {
    let order = FracOrder::new(req.alpha).map_err(CliError::config)?;
    if req.n == 0 {
        return Err(CliError::Config("n must be >= 1".into()));
    }
    let stream = SeededStream::root(req.seed);
    let a = req.alpha;
    let mut stats = serde_json::Map::new();
    let (summary, raw) = match req.kind {
        SimKind::Waiting => {
            let xs = waiting_time_samples(order, req.method, req.n, &stream);
            let h = EmpiricalSummary::histogram(&xs, &req.edges, req.level).map_err(CliError::config)?;
            let h = histogram_analytic(h, |t| Ok(1.0 - waiting_survival(order, t)?))?;
            (h, xs)
        }
        SimKind::Stable => {
            let xs = stable_samples(order, req.n, &stream);
            let h = EmpiricalSummary::histogram(&xs, &req.edges, req.level).map_err(CliError::config)?;
            // closed-form CDF only at α = ½
            let h = if a == 0.5 {
                let cdf = |t: f64| statrs::function::erf::erfc(1.0 / (2.0 * t.sqrt()));
                let ks = ks_one_sample(&xs, cdf);
                stats.insert("ks_statistic".into(), json!(ks.statistic));
                stats.insert("ks_critical_1pct".into(), json!(ks.critical_1pct()));
                histogram_analytic(h, |t| Ok(cdf(t)))?
            } else {
                h
            };
            (h, xs)
        }
        SimKind::Operational => {
            let xs = operational_time_samples(order, req.t, req.n, &stream).map_err(|e| CliError::numerical(e, req.t))?;
            let h = EmpiricalSummary::histogram(&xs, &req.edges, req.level).map_err(CliError::config)?;
            let norm = gamma(a) * req.t.powf(1.0 - a);
            let cfg = QuadConfig::new(1e-12, 1e-9);
            let h = histogram_analytic(h, |tau| {
                if tau <= 0.0 {
                    return Ok(0.0);
                }
                Ok(norm * integrate(|x| operational_time_density(order, x, req.t).unwrap_or(f64::NAN), 0.0, tau, &cfg)?.value)
            })?;
            (h, xs)
        }
        SimKind::Paths => {
            let spec = ProcessSpec::new(order, req.fold).map_err(CliError::config)?;
            let paths = simulate_paths(spec, req.horizon, req.n, &stream).map_err(CliError::config)?;
            let counts: Vec<u64> = paths.iter().map(|p| p.epochs.len() as u64).collect();
            let pmf = EmpiricalSummary::pmf(&counts, req.max_n, req.level).map_err(CliError::config)?;
            // N₁ + … + N_l: the l-fold discrete convolution of the single pmf
            let m = req.max_n as usize;
            let single = (0..=m as u32)
                .map(|k| classic_fpp_pmf(order, k, req.horizon).map_err(|e| CliError::numerical(e, req.horizon)))
                .collect::<Result<Vec<f64>, _>>()?;
            let mut conv = single.clone();
            for _ in 1..req.fold {
                conv = (0..=m).map(|k| (0..=k).map(|j| conv[j] * single[k - j]).sum()).collect();
            }
            let tail = 1.0 - conv.iter().sum::<f64>();
            let pmf = pmf.with_analytic(|r| Some(if r.bin_right.is_finite() { conv[r.bin_left as usize] } else { tail.max(0.0) }));
            (pmf, counts.iter().map(|&c| c as f64).collect())
        }
    };
    let text = match req.format {
        Format::Csv => with_stat_columns(summary.to_csv(), &stats),
        Format::Json => {
            let v = json!({
                "command": "simulate",
                "kind": req.kind.name(),
                "alpha": a,
                "fold": req.fold,
                "n": req.n,
                "seed": req.seed,
                "summary": summary,
                "statistics": stats,
            });
            serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
        }
    };
    Ok(SimOutput { text, raw })
}

/// Appends each whole-sample statistic as a constant column.
fn with_stat_columns(csv: String, stats: &serde_json::Map<String, serde_json::Value>) -> String {
    if stats.is_empty() {
        return csv;
    }
    let mut out = String::with_capacity(csv.len() * 2);
    for (i, line) in csv.lines().enumerate() {
        out.push_str(line);
        for (k, v) in stats {
            out.push(',');
            if i == 0 {
                out.push_str(k);
            } else {
                out.push_str(&fmt_real(v.as_f64().unwrap_or(f64::NAN)));
            }
        }
        out.push('\n');
    }
    out
}

pub fn raw_text(raw: &[f64]) -> String {
    let mut s = String::with_capacity(raw.len() * 24);
    for x in raw {
        let _ = writeln!(s, "{}", fmt_real(*x));
    }
    s
}
