//! Random variates and Monte Carlo estimators for the α-fractional renewal
//! process.
//!
//! Every variate comes from a [`SeededStream`]. Batch samplers split work into
//! fixed-size chunks, and each chunk draws from its own child stream. The
//! output is therefore a function of the seed alone, whatever the worker
//! count.

mod operational;
mod stats;
mod summary;

use std::f64::consts::PI;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FraxionError, Result};
use crate::renewal::{FracOrder, ProcessSpec};

pub use operational::{operational_time_mean, operational_time_samples, sample_operational_time, subordinated_counting_estimate};
pub use stats::{
    chi_square_binned, chi_square_homogeneity, ks_one_sample, ks_pvalue, ks_two_sample, mean_estimate, ChiSquare,
    KsResult, MeanEstimate,
};
pub use summary::{fmt_real, EmpiricalSummary, SummaryKind, SummaryRow};

/// The pinned base generator: ChaCha with 8 rounds, 2^64 streams of 2^68
/// bytes each per key.
pub type StreamRng = ChaCha8Rng;

/// Variates per chunk in the batch samplers. Changing it changes every
/// seeded result.
pub const CHUNK: usize = 4096;

/// A reproducible random stream, identified by `(seed, stream_id)`.
///
/// The seed is expanded into a ChaCha key and `stream_id` selects the ChaCha
/// stream under that key. [`SeededStream::child`] derives independent
/// substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn root(seed: u64) -> Self {
        Self::new(seed, 0)
    }

    pub fn rng(&self) -> StreamRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Substream `index` of this stream. It uses a fresh key,
    /// splitmix64(seed ⊕ splitmix64(stream_id)), with ChaCha stream `index`.
    /// Children of different parents therefore never share a key-stream
    /// pair, except with the probability of a 64-bit collision.
    pub fn child(&self, index: u64) -> SeededStream {
        SeededStream::new(splitmix64(self.seed ^ splitmix64(self.stream_id)), index)
    }
}

/// Uniform on the open interval (0, 1).
#[inline]
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// Exponential(1) by inversion.
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -open_uniform(rng).ln()
}

/// Poisson(mean) by sequential inversion, restarted in blocks of 500 so that
/// e^{−mean} never underflows.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    const BLOCK: f64 = 500.0;
    let mut remaining = mean;
    let mut total = 0u64;
    // Poisson(a + b) = Poisson(a) + Poisson(b)
    while remaining > BLOCK {
        total += poisson(BLOCK, rng);
        remaining -= BLOCK;
    }
    let mut p = (-remaining).exp();
    let mut cdf = p;
    let u = open_uniform(rng);
    let mut k = 0u64;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= remaining / k as f64;
        cdf += p;
    }
    total + k
}

/// One-sided stable variate with E[e^{−sY}] = e^{−s^α}, by Kanter's
/// representation
///
///   Y = (A(U)/W)^{(1−α)/α},
///   A(u) = sin(απu)^{α/(1−α)} sin((1−α)πu) / sin(πu)^{1/(1−α)},
///
/// with U uniform and W exponential. A is evaluated in logs so α near 1
/// does not overflow the large exponents.
pub fn stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let u = open_uniform(rng);
    let w = exponential(rng);
    let b = 1.0 - alpha;
    let ln_a = (alpha / b) * (alpha * PI * u).sin().ln() + (b * PI * u).sin().ln() - (PI * u).sin().ln() / b;
    ((b / alpha) * (ln_a - w.ln())).exp()
}

pub fn sample_stable<R: Rng + ?Sized>(order: FracOrder, rng: &mut R) -> f64 {
    stable(order.alpha(), rng)
}

/// How Mittag-Leffler waiting times are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaitingMethod {
    /// T = Y·W^{1/α}: a stable variate scaled by an exponential clock.
    Product,
    /// T = −ln U·(sin απ / tan απV − cos απ)^{1/α}.
    Direct,
}

pub fn ml_waiting<R: Rng + ?Sized>(alpha: f64, method: WaitingMethod, rng: &mut R) -> f64 {
    match method {
        WaitingMethod::Product => {
            let y = stable(alpha, rng);
            y * exponential(rng).powf(1.0 / alpha)
        }
        WaitingMethod::Direct => {
            let u = open_uniform(rng);
            let v = open_uniform(rng);
            let ap = alpha * PI;
            -u.ln() * (ap.sin() / (ap * v).tan() - ap.cos()).powf(1.0 / alpha)
        }
    }
}

pub fn sample_ml_waiting_time<R: Rng + ?Sized>(order: FracOrder, rng: &mut R, method: WaitingMethod) -> f64 {
    ml_waiting(order.alpha(), method, rng)
}

/// `n` draws of `draw`, chunked over child streams of `stream`.
pub fn generate<F>(n: usize, stream: &SeededStream, draw: F) -> Vec<f64>
where
    F: Fn(&mut StreamRng) -> f64 + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream.child(k as u64).rng();
            let len = CHUNK.min(n - k * CHUNK);
            (0..len).map(|_| draw(&mut rng)).collect()
        })
        .collect();
    parts.concat()
}

pub fn stable_samples(order: FracOrder, n: usize, stream: &SeededStream) -> Vec<f64> {
    generate(n, stream, |rng| sample_stable(order, rng))
}

pub fn waiting_time_samples(order: FracOrder, method: WaitingMethod, n: usize, stream: &SeededStream) -> Vec<f64> {
    generate(n, stream, |rng| sample_ml_waiting_time(order, rng, method))
}

/// Renewal epochs of one realization on (0, horizon].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventPath {
    pub epochs: Vec<f64>,
    pub horizon: f64,
}

impl EventPath {
    /// N(t): the number of epochs in (0, t].
    pub fn count_at(&self, t: f64) -> usize {
        self.epochs.partition_point(|&e| e <= t)
    }

    pub fn epoch(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.epochs.get(i).copied())
    }

    pub fn waiting_times(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.epochs
            .iter()
            .map(|&e| {
                let w = e - prev;
                prev = e;
                w
            })
            .collect()
    }
}

fn component_epochs<R: Rng + ?Sized>(alpha: f64, horizon: f64, rng: &mut R, out: &mut Vec<f64>) {
    let mut t = 0.0;
    loop {
        t += ml_waiting(alpha, WaitingMethod::Direct, rng);
        if t > horizon {
            return;
        }
        out.push(t);
    }
}

/// One path of the l-fold superposition: l independent renewal paths of iid
/// φ_α waiting times, merged. A tie between components (a probability-zero
/// event) discards the draw and redraws the whole path.
pub fn simulate_path(spec: ProcessSpec, horizon: f64, stream: &SeededStream) -> Result<EventPath> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(FraxionError::domain(format!("horizon must be positive, got {horizon}")));
    }
    let alpha = spec.order.alpha();
    let mut rng = stream.rng();
    let mut epochs = Vec::new();
    loop {
        epochs.clear();
        for _ in 0..spec.fold {
            component_epochs(alpha, horizon, &mut rng, &mut epochs);
        }
        if spec.fold > 1 {
            epochs.sort_by(f64::total_cmp);
        }
        if epochs.windows(2).all(|w| w[0] < w[1]) && epochs.first().is_none_or(|&e| e > 0.0) {
            return Ok(EventPath { epochs, horizon });
        }
    }
}

/// `n` paths; path i draws from `stream.child(i)`.
pub fn simulate_paths(spec: ProcessSpec, horizon: f64, n: usize, stream: &SeededStream) -> Result<Vec<EventPath>> {
    (0..n)
        .into_par_iter()
        .map(|i| simulate_path(spec, horizon, &stream.child(i as u64)))
        .collect()
}

/// Ê[e^{−s^α W}] over W ~ Exp(1). This is the statistical construction of
/// φ̃_α(s) = 1/(1+s^α) from the exponential clock.
pub fn marginal_transform_estimate(order: FracOrder, s: f64, n: usize, stream: &SeededStream) -> MeanEstimate {
    let sa = s.powf(order.alpha());
    mean_estimate(&generate(n, stream, |rng| (-sa * exponential(rng)).exp()))
}

/// Empirical Laplace transform Ê[e^{−sX}] of a sample.
pub fn empirical_transform(samples: &[f64], s: f64) -> MeanEstimate {
    let v: Vec<f64> = samples.iter().map(|&x| (-s * x).exp()).collect();
    mean_estimate(&v)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaLimitRow {
    pub l: u32,
    pub estimate: f64,
    pub std_err: f64,
    /// Exact transform (1+s^α/l)^{−l} of the rescaled sum.
    pub finite_l: f64,
    pub target: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaLimitReport {
    pub alpha: f64,
    pub s: f64,
    pub n_samples: usize,
    pub rows: Vec<DeltaLimitRow>,
    /// Errors strictly decrease along the l values.
    pub decreasing: bool,
}

/// Rescaled sums S_l/l^{1/α} of l iid φ_α waiting times approach the
/// one-sided stable law. Reports |Ê[e^{−s S_l/l^{1/α}}] − e^{−s^α}| for each l.
pub fn delta_limit_check(
    order: FracOrder,
    s: f64,
    l_values: &[u32],
    n: usize,
    stream: &SeededStream,
) -> Result<DeltaLimitReport> {
    if l_values.is_empty() || l_values.contains(&0) || l_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FraxionError::domain("l values must be positive and strictly ascending"));
    }
    if !(s > 0.0) {
        return Err(FraxionError::domain("s must be positive"));
    }
    let a = order.alpha();
    let target = (-s.powf(a)).exp();
    let rows = l_values
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let scale = (l as f64).powf(-1.0 / a);
            let sums = generate(n, &stream.child(i as u64), |rng| {
                (0..l).map(|_| ml_waiting(a, WaitingMethod::Direct, rng)).sum::<f64>() * scale
            });
            let est = empirical_transform(&sums, s);
            DeltaLimitRow {
                l,
                estimate: est.mean,
                std_err: est.std_err,
                finite_l: (1.0 + s.powf(a) / l as f64).powf(-(l as f64)),
                target,
                error: (est.mean - target).abs(),
            }
        })
        .collect::<Vec<_>>();
    let decreasing = rows.windows(2).all(|w| w[1].error < w[0].error);
    Ok(DeltaLimitReport {
        alpha: a,
        s,
        n_samples: n,
        rows,
        decreasing,
    })
}

/// The exponential analogue: S_l/l for Exp(1) summands concentrates at 1.
/// Returns the sample standard deviation of S_l/l for each l.
pub fn exponential_concentration(l_values: &[u32], n: usize, stream: &SeededStream) -> Vec<f64> {
    l_values
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let means = generate(n, &stream.child(i as u64), |rng| {
                (0..l).map(|_| exponential(rng)).sum::<f64>() / l as f64
            });
            mean_estimate(&means).std_dev
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_reproduce() {
        let s = SeededStream::new(7, 3);
        let a: Vec<u64> = (0..4).map(|_| 0).scan(s.rng(), |r, _: u64| Some(r.random())).collect();
        let b: Vec<u64> = (0..4).map(|_| 0).scan(s.rng(), |r, _: u64| Some(r.random())).collect();
        assert_eq!(a, b);
        let mut other = SeededStream::new(7, 4).rng();
        assert_ne!(a[0], other.random::<u64>());
        assert_ne!(s.child(0), SeededStream::new(7, 0));
    }

    #[test]
    fn poisson_mean() {
        let mut rng = SeededStream::root(1).rng();
        for mean in [0.3, 4.0, 1200.0] {
            let n = 20_000;
            let m = (0..n).map(|_| poisson(mean, &mut rng) as f64).sum::<f64>() / n as f64;
            assert!((m - mean).abs() < 5.0 * (mean / n as f64).sqrt(), "{mean}: {m}");
        }
    }

    #[test]
    fn generate_is_chunk_stable() {
        let s = SeededStream::root(11);
        let a = generate(CHUNK + 5, &s, exponential);
        let b = generate(CHUNK + 9, &s, exponential);
        assert_eq!(a[..], b[..CHUNK + 5]);
    }
}
