//! Goodness-of-fit statistics for the Monte Carlo checks.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::specfun::sum::CompensatedSum;

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub std_dev: f64,
    pub n: usize,
}

impl MeanEstimate {
    /// |mean − target| ≤ k·SE.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_err
    }
}

pub fn mean_estimate(xs: &[f64]) -> MeanEstimate {
    let n = xs.len();
    let mut s = CompensatedSum::new();
    xs.iter().for_each(|&x| s.add(x));
    let mean = s.value() / n as f64;
    let mut v = CompensatedSum::new();
    xs.iter().for_each(|&x| v.add((x - mean) * (x - mean)));
    let std_dev = if n > 1 { (v.value() / (n - 1) as f64).sqrt() } else { 0.0 };
    MeanEstimate {
        mean,
        std_err: std_dev / (n as f64).sqrt(),
        std_dev,
        n,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Effective sample size: n, or nm/(n+m) for two samples.
    pub n_eff: f64,
    pub p_value: f64,
}

impl KsResult {
    fn new(statistic: f64, n_eff: f64) -> Self {
        Self {
            statistic,
            n_eff,
            p_value: ks_pvalue(statistic, n_eff),
        }
    }

    /// Asymptotic critical value 1.628/√n_eff at the 1% level.
    pub fn critical_1pct(&self) -> f64 {
        1.628 / self.n_eff.sqrt()
    }
}

/// Asymptotic Kolmogorov tail probability with Stephens' small-sample
/// correction λ = (√n + 0.12 + 0.11/√n)·D.
pub fn ks_pvalue(d: f64, n_eff: f64) -> f64 {
    let sn = n_eff.sqrt();
    let lambda = (sn + 0.12 + 0.11 / sn) * d;
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub fn ks_one_sample<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> KsResult {
    let v = sorted(samples);
    let n = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    });
    KsResult::new(d, n)
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    KsResult::new(d, n * m / (n + m))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Bins after merging cells with expected count below 5.
    pub bins: usize,
}

fn chi_square_tail(stat: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let d = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    1.0 - d.cdf(stat)
}

/// Merges neighbouring cells left to right until every cell's weight
/// reaches `min`; a short final cell joins its predecessor.
fn merge_cells(cells: &[(f64, Vec<f64>)], min: f64) -> Vec<(f64, Vec<f64>)> {
    let mut out: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut cur: Option<(f64, Vec<f64>)> = None;
    for (w, obs) in cells {
        let c = cur.get_or_insert_with(|| (0.0, vec![0.0; obs.len()]));
        c.0 += w;
        c.1.iter_mut().zip(obs).for_each(|(a, b)| *a += b);
        if c.0 >= min {
            out.push(cur.take().unwrap());
        }
    }
    if let Some(c) = cur {
        match out.last_mut() {
            Some(last) => {
                last.0 += c.0;
                last.1.iter_mut().zip(&c.1).for_each(|(a, b)| *a += b);
            }
            None => out.push(c),
        }
    }
    out
}

/// Pearson goodness of fit of `samples` against `cdf` on the cells
/// (−∞, e₀), [e₀, e₁), …, [e_m, ∞).
pub fn chi_square_binned<F: Fn(f64) -> f64>(samples: &[f64], edges: &[f64], cdf: F) -> ChiSquare {
    let n = samples.len() as f64;
    let mut counts = vec![0.0; edges.len() + 1];
    for &x in samples {
        counts[edges.partition_point(|&e| e <= x)] += 1.0;
    }
    let mut prev = 0.0;
    let mut cells = Vec::with_capacity(counts.len());
    for (i, c) in counts.iter().enumerate() {
        let next = if i < edges.len() { cdf(edges[i]) } else { 1.0 };
        cells.push((n * (next - prev), vec![*c]));
        prev = next;
    }
    let merged = merge_cells(&cells, 5.0);
    let statistic = merged.iter().map(|(e, o)| (o[0] - e) * (o[0] - e) / e).sum();
    let dof = merged.len().saturating_sub(1);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_tail(statistic, dof),
        bins: merged.len(),
    }
}

/// Two-sample χ² homogeneity test on paired category counts.
pub fn chi_square_homogeneity(a: &[u64], b: &[u64]) -> ChiSquare {
    let k = a.len().max(b.len());
    let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0) as f64;
    let (na, nb) = (a.iter().sum::<u64>() as f64, b.iter().sum::<u64>() as f64);
    let total = na + nb;
    let cells: Vec<(f64, Vec<f64>)> = (0..k)
        .map(|i| {
            let (x, y) = (get(a, i), get(b, i));
            // the smaller expected count of the column decides merging
            ((x + y) * na.min(nb) / total, vec![x, y])
        })
        .collect();
    let merged = merge_cells(&cells, 5.0);
    let statistic = merged
        .iter()
        .map(|(_, o)| {
            let col = o[0] + o[1];
            let (ea, eb) = (col * na / total, col * nb / total);
            (o[0] - ea).powi(2) / ea + (o[1] - eb).powi(2) / eb
        })
        .sum();
    let dof = merged.len().saturating_sub(1);
    ChiSquare {
        statistic,
        dof,
        p_value: chi_square_tail(statistic, dof),
        bins: merged.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kolmogorov_tail() {
        // Q(1.628) ≈ 0.01, Q(1.358) ≈ 0.05
        assert!((ks_pvalue(1.628 / 1e4, 1e8) - 0.01).abs() < 2e-4);
        assert!((ks_pvalue(1.358 / 1e4, 1e8) - 0.05).abs() < 5e-4);
    }

    #[test]
    fn uniform_grid_fits() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        let ks = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0));
        assert!(ks.statistic <= 5e-4 + 1e-12);
        let edges: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
        let chi = chi_square_binned(&xs, &edges, |x| x.clamp(0.0, 1.0));
        assert!(chi.statistic < 1e-9 && chi.p_value > 0.99);
    }

    #[test]
    fn homogeneity_of_identical_counts() {
        let c = chi_square_homogeneity(&[100, 50, 3, 1], &[200, 100, 6, 2]);
        assert!(c.statistic < 1e-12 && c.bins == 2, "{c:?}");
    }
}
