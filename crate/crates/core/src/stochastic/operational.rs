//! Operational-time sampling.
//!
//! For fixed t, p₂(τ, t) integrates over τ to t^{α−1}/Γ(α), not to one, so
//! the sampled law is p₂(τ, t)·Γ(α)t^{1−α}. With τ = t^α·U, U has the
//! t-free density Γ(1+α)·u·M_α(u). Its quantile table is therefore built
//! once per α and shared by every t.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rand::Rng;
use rayon::prelude::*;

use super::{generate, open_uniform, poisson, MeanEstimate, SeededStream};
use crate::error::{FraxionError, Result};
use crate::quad::{integrate, QuadConfig};
use crate::renewal::FracOrder;
use crate::specfun::gamma::gamma;
use crate::specfun::mainardi;

const NODES: usize = 2048;
const U_MIN: f64 = 1e-8;
/// Largest admissible 1 − CDF(u_max) before normalization.
const MASS_DEFECT: f64 = 1e-6;

/// Monotone-cubic inverse of the CDF of Γ(1+α)·u·M_α(u).
#[derive(Debug)]
struct QuantileTable {
    cdf: Vec<f64>,
    u: Vec<f64>,
    /// du/dp at the nodes (Fritsch-Carlson limited).
    slope: Vec<f64>,
}

fn density(alpha: f64, scale: f64, u: f64) -> f64 {
    match mainardi(alpha, u) {
        Ok(m) => scale * u * m.value,
        Err(_) => f64::NAN,
    }
}

impl QuantileTable {
    fn build(alpha: f64) -> Result<Self> {
        let scale = gamma(1.0 + alpha);
        // M_α decays like exp(−c u^{1/(1−α)}); walk out until the density
        // is negligible
        let mut u_max = 1.0;
        while u_max < 1e4 && !(density(alpha, scale, u_max) * u_max < 1e-18) {
            u_max *= 1.5;
        }
        let ratio = (u_max / U_MIN).powf(1.0 / (NODES - 1) as f64);
        let nodes: Vec<f64> = (0..NODES).map(|i| U_MIN * ratio.powi(i as i32)).collect();
        let cfg = QuadConfig::new(1e-16, 1e-10);
        let pieces: Vec<f64> = nodes
            .par_windows(2)
            .map(|w| integrate(|u| density(alpha, scale, u), w[0], w[1], &cfg).map(|r| r.value))
            .collect::<Result<_>>()?;
        // mass below U_MIN: the density is Γ(1+α)M_α(0)·u there
        let mut acc = scale / gamma(1.0 - alpha) * U_MIN * U_MIN / 2.0;
        let mut cdf = Vec::with_capacity(NODES);
        let mut u = Vec::with_capacity(NODES);
        cdf.push(acc);
        u.push(nodes[0]);
        for (i, p) in pieces.iter().enumerate() {
            acc += p;
            // drop flat stretches so the inverse stays a function
            if acc > *cdf.last().unwrap() {
                cdf.push(acc);
                u.push(nodes[i + 1]);
            }
        }
        if !((acc - 1.0).abs() <= MASS_DEFECT) {
            return Err(FraxionError::QuadratureFailure {
                abs_err: (acc - 1.0).abs(),
                tol: MASS_DEFECT,
            });
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        let slope = fritsch_carlson(&cdf, &u);
        Ok(Self { cdf, u, slope })
    }

    fn quantile(&self, p: f64) -> f64 {
        let n = self.cdf.len();
        if p <= self.cdf[0] {
            // CDF ≈ c·u² below the first node
            return self.u[0] * (p / self.cdf[0]).sqrt();
        }
        if p >= self.cdf[n - 1] {
            return self.u[n - 1];
        }
        let i = self.cdf.partition_point(|&c| c <= p) - 1;
        let h = self.cdf[i + 1] - self.cdf[i];
        let s = (p - self.cdf[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.u[i]
            + (s3 - 2.0 * s2 + s) * h * self.slope[i]
            + (-2.0 * s3 + 3.0 * s2) * self.u[i + 1]
            + (s3 - s2) * h * self.slope[i + 1]
    }
}

fn fritsch_carlson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    for i in 1..n - 1 {
        m[i] = if d[i - 1] * d[i] <= 0.0 { 0.0 } else { (d[i - 1] + d[i]) / 2.0 };
    }
    for i in 0..n - 1 {
        if d[i] == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let a = m[i] / d[i];
        let b = m[i + 1] / d[i];
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[i] = tau * a * d[i];
            m[i + 1] = tau * b * d[i];
        }
    }
    m
}

fn table(order: FracOrder) -> Result<Arc<QuantileTable>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<QuantileTable>>>> = OnceLock::new();
    let key = order.alpha().to_bits();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return Ok(t.clone());
    }
    // built outside the lock; a concurrent duplicate build is harmless
    let t = Arc::new(QuantileTable::build(order.alpha())?);
    cache.lock().unwrap().entry(key).or_insert_with(|| t.clone());
    Ok(t)
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(FraxionError::domain(format!("time must be positive, got {t}")))
    }
}

/// One operational time τ from the normalized law p₂(τ, t)·Γ(α)t^{1−α}.
pub fn sample_operational_time<R: Rng + ?Sized>(order: FracOrder, t: f64, rng: &mut R) -> Result<f64> {
    check_t(t)?;
    Ok(t.powf(order.alpha()) * table(order)?.quantile(open_uniform(rng)))
}

pub fn operational_time_samples(order: FracOrder, t: f64, n: usize, stream: &SeededStream) -> Result<Vec<f64>> {
    check_t(t)?;
    let tab = table(order)?;
    let ta = t.powf(order.alpha());
    Ok(generate(n, stream, |rng| ta * tab.quantile(open_uniform(rng))))
}

/// Monte Carlo for the subordination integral. It draws τ from the
/// normalized p₂(·, t), then N ~ Poisson(τ). The empirical pmf of N times the
/// common factor t^{α−1}/Γ(α) estimates P_{n,α}(t) for n = 0..=max_n.
pub fn subordinated_counting_estimate(
    order: FracOrder,
    t: f64,
    max_n: u32,
    n: usize,
    stream: &SeededStream,
) -> Result<Vec<MeanEstimate>> {
    check_t(t)?;
    let tab = table(order)?;
    let a = order.alpha();
    let ta = t.powf(a);
    // counts are exact in f64
    let counts = generate(n, stream, |rng| {
        let tau = ta * tab.quantile(open_uniform(rng));
        poisson(tau, rng) as f64
    });
    let factor = t.powf(a - 1.0) / gamma(a);
    let mut hist = vec![0u64; max_n as usize + 1];
    for &k in &counts {
        if k <= max_n as f64 {
            hist[k as usize] += 1;
        }
    }
    Ok(hist
        .into_iter()
        .map(|c| {
            let p = c as f64 / n as f64;
            MeanEstimate {
                mean: factor * p,
                std_err: factor * (p * (1.0 - p) / n as f64).sqrt(),
                std_dev: factor * (p * (1.0 - p)).sqrt(),
                n,
            }
        })
        .collect())
}

/// Mean of the normalized operational-time law at t: Γ(1+α)·t^α·2/Γ(1+2α),
/// from ∫ u^k M_α(u) du = Γ(k+1)/Γ(αk+1).
pub fn operational_time_mean(order: FracOrder, t: f64) -> f64 {
    let a = order.alpha();
    2.0 * gamma(1.0 + a) * t.powf(a) / gamma(1.0 + 2.0 * a)
}
