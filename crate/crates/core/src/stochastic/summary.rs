//! Binned summaries of Monte Carlo output, written as CSV or JSON.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erf_inv;

use crate::error::{FraxionError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SummaryKind {
    /// Counts per bin. The first and last rows catch samples outside the
    /// edges, so the counts sum to n_samples.
    Histogram,
    /// `count` is the number of samples strictly above the support point
    /// and the estimate is the survival P{X > t}. These counts are
    /// exceedances, so they do not sum to n_samples.
    EmpiricalSurvival,
    /// Counts per integer outcome. The last row gathers every outcome at
    /// or beyond its left edge.
    PmfCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub bin_left: f64,
    pub bin_right: f64,
    pub count: u64,
    pub density_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub analytic: Option<f64>,
}

/// Monte Carlo summary. The confidence intervals are normal
/// approximations to the binomial proportion:
/// p̂ ± z·√(p̂(1−p̂)/n), with z = √2·erf⁻¹(level). Histograms divide them
/// by the bin width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSummary {
    pub kind: SummaryKind,
    pub rows: Vec<SummaryRow>,
    pub n_samples: usize,
    pub confidence_level: f64,
}

/// 17 significant digits; round-trip safe.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn proportion_row(left: f64, right: f64, count: u64, n: usize, z: f64, width: f64) -> SummaryRow {
    let p = count as f64 / n as f64;
    let half = z * (p * (1.0 - p) / n as f64).sqrt();
    SummaryRow {
        bin_left: left,
        bin_right: right,
        count,
        density_estimate: p / width,
        ci_low: (p - half).max(0.0) / width,
        ci_high: (p + half).min(1.0) / width,
        analytic: None,
    }
}

fn z_value(level: f64) -> Result<f64> {
    if level > 0.0 && level < 1.0 {
        Ok(std::f64::consts::SQRT_2 * erf_inv(level))
    } else {
        Err(FraxionError::domain(format!("confidence level must lie in (0,1), got {level}")))
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n == 0 {
        Err(FraxionError::domain("summary needs at least one sample"))
    } else {
        Ok(())
    }
}

impl EmpiricalSummary {
    /// Histogram on the given strictly increasing edges. Out-of-range
    /// samples land in the rows (−∞, e₀) and [e_m, ∞). Those two rows
    /// report the plain proportion, not a density.
    pub fn histogram(samples: &[f64], edges: &[f64], level: f64) -> Result<Self> {
        check_samples(samples.len())?;
        if edges.len() < 2 || edges.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(FraxionError::domain("histogram edges must be strictly increasing"));
        }
        let z = z_value(level)?;
        let n = samples.len();
        let mut counts = vec![0u64; edges.len() + 1];
        for &x in samples {
            counts[edges.partition_point(|&e| e <= x)] += 1;
        }
        let m = edges.len();
        let rows = counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let left = if i == 0 { f64::NEG_INFINITY } else { edges[i - 1] };
                let right = if i == m { f64::INFINITY } else { edges[i] };
                let width = if i == 0 || i == m { 1.0 } else { right - left };
                proportion_row(left, right, c, n, z, width)
            })
            .collect();
        Ok(Self {
            kind: SummaryKind::Histogram,
            rows,
            n_samples: n,
            confidence_level: level,
        })
    }

    pub fn survival(samples: &[f64], points: &[f64], level: f64) -> Result<Self> {
        check_samples(samples.len())?;
        let z = z_value(level)?;
        let n = samples.len();
        let rows = points
            .iter()
            .map(|&t| {
                let c = samples.iter().filter(|&&x| x > t).count() as u64;
                proportion_row(t, t, c, n, z, 1.0)
            })
            .collect();
        Ok(Self {
            kind: SummaryKind::EmpiricalSurvival,
            rows,
            n_samples: n,
            confidence_level: level,
        })
    }

    /// Pmf of integer outcomes 0..max_n, plus a row for outcomes > max_n.
    pub fn pmf(outcomes: &[u64], max_n: u64, level: f64) -> Result<Self> {
        check_samples(outcomes.len())?;
        let z = z_value(level)?;
        let n = outcomes.len();
        let mut counts = vec![0u64; max_n as usize + 2];
        for &k in outcomes {
            counts[(k.min(max_n + 1)) as usize] += 1;
        }
        let rows = counts
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let right = if k as u64 > max_n { f64::INFINITY } else { k as f64 };
                proportion_row(k as f64, right, c, n, z, 1.0)
            })
            .collect();
        Ok(Self {
            kind: SummaryKind::PmfCounts,
            rows,
            n_samples: n,
            confidence_level: level,
        })
    }

    /// Fills the analytic column row by row. `f` returns None where no
    /// closed form applies.
    pub fn with_analytic<F: FnMut(&SummaryRow) -> Option<f64>>(mut self, mut f: F) -> Self {
        for r in &mut self.rows {
            r.analytic = f(r);
        }
        self
    }

    pub fn has_analytic(&self) -> bool {
        self.rows.iter().any(|r| r.analytic.is_some())
    }

    pub const CSV_HEADER: &'static str = "bin_left,bin_right,count,density_estimate,ci_low,ci_high";

    /// CSV with LF endings. When any row has an analytic value, an
    /// `analytic` column is appended; rows without one leave it empty.
    pub fn to_csv(&self) -> String {
        let analytic = self.has_analytic();
        let mut out = String::from(Self::CSV_HEADER);
        if analytic {
            out.push_str(",analytic");
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                fmt_real(r.bin_left),
                fmt_real(r.bin_right),
                r.count,
                fmt_real(r.density_estimate),
                fmt_real(r.ci_low),
                fmt_real(r.ci_high)
            );
            if analytic {
                out.push(',');
                if let Some(a) = r.analytic {
                    out.push_str(&fmt_real(a));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_everything() {
        let xs = [-1.0, 0.1, 0.2, 0.5, 0.9, 3.0];
        let h = EmpiricalSummary::histogram(&xs, &[0.0, 0.5, 1.0], 0.95).unwrap();
        let counts: Vec<u64> = h.rows.iter().map(|r| r.count).collect();
        assert_eq!(counts, vec![1, 2, 2, 1]);
        assert_eq!(counts.iter().sum::<u64>(), 6);
        assert!((h.rows[1].density_estimate - 2.0 / 6.0 / 0.5).abs() < 1e-15);
        assert!(h.rows[1].ci_low < h.rows[1].density_estimate && h.rows[1].density_estimate < h.rows[1].ci_high);
    }

    #[test]
    fn csv_shape() {
        let h = EmpiricalSummary::pmf(&[0, 1, 1, 7], 2, 0.95)
            .unwrap()
            .with_analytic(|r| (r.bin_left < 1.0).then_some(0.25));
        let csv = h.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "bin_left,bin_right,count,density_estimate,ci_low,ci_high,analytic");
        assert_eq!(lines.len(), 5);
        assert!(lines[1].ends_with(",2.5000000000000000e-1"));
        assert!(lines[2].ends_with(','));
        assert!(lines[4].starts_with("3.0000000000000000e0,inf,1,"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn z_for_95() {
        assert!((z_value(0.95).unwrap() - 1.959964).abs() < 1e-5);
    }
}
