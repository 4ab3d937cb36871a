//! Three-parameter Mittag-Leffler function
//!
//! E^γ_{α,β}(z) = Σ_k (γ)_k z^k / (Γ(αk+β) k!)
//!
//! Evaluation strategy on the real line:
//! * power series with compensated summation wherever it can certify the
//!   tolerance (always for z ≥ 0, and for small |z| on the negative axis);
//! * algebraic asymptotic expansion for z ≤ −z_switch, truncated at its
//!   smallest term;
//! * Bromwich inversion of s^{αγ−β}/(s^α − z)^γ on a parabolic contour for
//!   the intermediate negative range where the series cancels and the
//!   asymptotic expansion has not yet become sharp.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::contour::invert_parabolic;
use super::gamma::{ln_gamma, recip_gamma_value, GAMMA_REL_ERR};
use super::sum::CompensatedSum;
use super::EvalResult;
use crate::error::{FraxionError, Result};

/// Parameters (α, β, γ) of E^γ_{α,β}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MLParams {
    alpha: f64,
    beta: f64,
    gamma_: f64,
}

impl MLParams {
    pub fn new(alpha: f64, beta: f64, gamma_: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(crate::error::FraxionError::Domain(format!("alpha must be > 0, got {alpha}")));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(crate::error::FraxionError::Domain(format!("beta must be > 0, got {beta}")));
        }
        if !(gamma_.is_finite() && gamma_ >= 0.0) {
            return Err(crate::error::FraxionError::Domain(format!("gamma must be >= 0, got {gamma_}")));
        }
        Ok(Self { alpha, beta, gamma_ })
    }

    /// Two-parameter function E_{α,β} (γ = 1).
    pub fn two(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(alpha, beta, 1.0)
    }

    /// Classical E_α (β = γ = 1).
    pub fn one(alpha: f64) -> Result<Self> {
        Self::new(alpha, 1.0, 1.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma_
    }
}

/// Tolerances and switch points for [`mittag_leffler_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Largest |z| the library accepts.
    pub z_max: f64,
    /// Below −z_switch the asymptotic expansion is tried first.
    pub z_switch: f64,
    /// Hard cap on series terms.
    pub n_max: usize,
    /// Half-width of the contour rule.
    pub contour_nodes: usize,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            z_max: 50.0,
            z_switch: 10.0,
            n_max: 10_000,
            contour_nodes: super::contour::DEFAULT_NODES,
        }
    }
}

impl MlConfig {
    fn target(&self, value: f64) -> f64 {
        (self.rel_tol * value.abs()).max(self.abs_tol)
    }
}

// Terms this large make the alternating series useless at 1e-10.
const SERIES_ABORT_MAGNITUDE: f64 = 1e8;

/// Power series, returning `None` when it overflows or cancels too badly.
pub fn series(p: &MLParams, z: f64, cfg: &MlConfig) -> Option<EvalResult> {
    let (a, b, g) = (p.alpha, p.beta, p.gamma_);
    if z == 0.0 || g == 0.0 {
        let v = recip_gamma_value(b);
        return Some(EvalResult::new(v, GAMMA_REL_ERR * v.abs()));
    }
    let x = z.abs();
    let ln_x = x.ln();
    let mut sum = CompensatedSum::new();
    let mut rounding = 0.0;
    let mut coef = 1.0; // (γ)_k / k!
    let mut ln_coef = 0.0;
    let mut prev_mag = f64::NAN;
    let mut prev_ratio = f64::INFINITY;
    for k in 0..cfg.n_max {
        let kf = k as f64;
        if k > 0 {
            let step = (g + kf - 1.0) / kf;
            coef *= step;
            ln_coef += step.ln();
        }
        let (mag, term_rel) = if k <= 30 {
            let m = coef * x.powi(k as i32) * recip_gamma_value(a * kf + b);
            (m, (kf + 4.0) * f64::EPSILON + GAMMA_REL_ERR)
        } else {
            let lg = ln_gamma(a * kf + b);
            let ln_mag = ln_coef + kf * ln_x - lg;
            // absolute errors of the log components become relative ones
            let scale = ln_coef.abs() + (kf * ln_x).abs() + lg.abs();
            (ln_mag.exp(), 2.0 * scale * f64::EPSILON + GAMMA_REL_ERR)
        };
        if !mag.is_finite() {
            return None;
        }
        if z < 0.0 && mag > SERIES_ABORT_MAGNITUDE {
            return None;
        }
        let signed = if z < 0.0 && k % 2 == 1 { -mag } else { mag };
        sum.add(signed);
        rounding += mag * term_rel;

        if k >= 2 && prev_mag > 0.0 {
            let ratio = mag / prev_mag;
            let value = sum.value();
            if ratio < 0.5 && ratio <= prev_ratio {
                let tail = mag * ratio / (1.0 - ratio);
                // sum to full precision: densities multiply E by large powers of t
                if tail <= (0.5 * f64::EPSILON * value.abs()).max(f64::MIN_POSITIVE) || mag == 0.0 {
                    let abs_err = tail + rounding + sum.rounding_bound(0.0);
                    return Some(EvalResult::new(value, abs_err));
                }
            }
            prev_ratio = ratio;
        }
        if mag == 0.0 && k > 0 && prev_mag == 0.0 {
            return Some(EvalResult::new(sum.value(), rounding));
        }
        prev_mag = mag;
    }
    None
}

/// |1/Γ(b)| or, for small/negative b, the upper bound Γ(1−b)/π.
fn recip_gamma_bound(b: f64) -> f64 {
    if b >= 0.5 {
        recip_gamma_value(b).abs()
    } else {
        (ln_gamma(1.0 - b)).exp() / std::f64::consts::PI
    }
}

/// Algebraic asymptotic expansion of E^γ_{α,β}(−x) for 0 < α < 1:
/// Σ_k (−1)^k (γ)_k/k! · x^{−γ−k} / Γ(β − α(γ+k)).
pub fn asymptotic_negative(p: &MLParams, x: f64) -> Option<EvalResult> {
    let (a, b, g) = (p.alpha, p.beta, p.gamma_);
    if a >= 1.0 || g == 0.0 || x <= 0.0 {
        return None;
    }
    let ln_x = x.ln();
    let mut sum = CompensatedSum::new();
    let mut ln_coef = 0.0;
    let mut prev_bound = f64::INFINITY;
    let mut omitted = f64::NAN;
    let mut rounding = 0.0;
    for k in 0..2000usize {
        let kf = k as f64;
        if k > 0 {
            ln_coef += ((g + kf - 1.0) / kf).ln();
        }
        let arg = b - a * (g + kf);
        let scale = (ln_coef - (g + kf) * ln_x).exp();
        let bound = scale * recip_gamma_bound(arg);
        if bound > prev_bound {
            omitted = bound.min(prev_bound * 4.0);
            break;
        }
        if k > 0 && bound <= 0.5 * f64::EPSILON * sum.value().abs() {
            omitted = bound;
            break;
        }
        let term = scale * recip_gamma_value(arg);
        sum.add(if k % 2 == 1 { -term } else { term });
        let term_rel = GAMMA_REL_ERR * (1.0 + arg.abs().max(1.0).ln())
            + 2.0 * (ln_coef.abs() + (g + kf) * ln_x.abs()) * f64::EPSILON;
        rounding += term.abs() * term_rel;
        prev_bound = bound;
    }
    if !omitted.is_finite() {
        return None;
    }
    // contribution of the singularities of the transform off the principal sheet
    let r = x.powf(1.0 / a);
    let hidden = 4.0 * (-r).exp() * (1.0 + r).powf((g - b).max(0.0)) * 2f64.powf(g - 1.0) / a.powf(g);
    // the smallest-term rule is not a strict bound for non-alternating tails
    let abs_err = 2.0 * omitted + hidden + rounding + sum.rounding_bound(0.0);
    Some(EvalResult::new(sum.value(), abs_err))
}

/// Contour evaluation for z < 0.
pub fn contour_negative(p: &MLParams, z: f64, cfg: &MlConfig) -> EvalResult {
    let (a, b, g) = (p.alpha, p.beta, p.gamma_);
    let x = -z;
    let expo = a * g - b;
    invert_parabolic(
        |s: Complex64| s.powf(expo) / (s.powf(a) + x).powf(g),
        1.0,
        cfg.contour_nodes,
    )
}

/// E^γ_{α,β}(z) with default tolerances.
pub fn mittag_leffler(p: &MLParams, z: f64) -> Result<EvalResult> {
    mittag_leffler_with(p, z, &MlConfig::default())
}

/// E^γ_{α,β}(z) with explicit configuration.
pub fn mittag_leffler_with(p: &MLParams, z: f64, cfg: &MlConfig) -> Result<EvalResult> {
    let fail = |detail: &str| FraxionError::NonConvergence {
        routine: "mittag_leffler",
        at: z,
        detail: format!(
            "{detail} (alpha={}, beta={}, gamma={})",
            p.alpha, p.beta, p.gamma_
        ),
    };
    if !z.is_finite() {
        return Err(crate::error::FraxionError::Domain(format!("argument must be finite, got {z}")));
    }
    if z.abs() > cfg.z_max {
        return Err(fail("argument outside supported range"));
    }
    let certified = |r: &EvalResult| r.value.is_finite() && r.abs_err <= cfg.target(r.value);

    if z >= 0.0 {
        return match series(p, z, cfg) {
            Some(r) if certified(&r) => Ok(r),
            _ => Err(fail("power series did not converge")),
        };
    }
    let x = -z;
    if x >= cfg.z_switch {
        if let Some(r) = asymptotic_negative(p, x) {
            if certified(&r) {
                return Ok(r);
            }
        }
    }
    if let Some(r) = series(p, z, cfg) {
        if certified(&r) {
            return Ok(r);
        }
    }
    let r = contour_negative(p, z, cfg);
    if certified(&r) {
        return Ok(r);
    }
    if let Some(a) = asymptotic_negative(p, x) {
        if certified(&a) {
            return Ok(a);
        }
    }
    Err(fail("no scheme reached the tolerance"))
}

/// k-th derivative of E_{α,β} via d^k/dz^k E_{α,β}(z) = k!·E^{k+1}_{α,β+αk}(z).
pub fn mittag_leffler_deriv(alpha: f64, beta: f64, k: u32, z: f64) -> Result<EvalResult> {
    let p = MLParams::new(alpha, beta + alpha * k as f64, k as f64 + 1.0)?;
    let r = mittag_leffler(&p, z)?;
    let fact: f64 = (1..=k).map(|j| j as f64).product();
    Ok(EvalResult::new(fact * r.value, fact * r.abs_err))
}

/// k-th derivative of E_{α,β} by the term-by-term differentiated series
/// Σ_{j≥k} j!/(j−k)! z^{j−k} / Γ(αj+β). Independent of the three-parameter
/// route; fails with `NonConvergence` where the series cancels.
pub fn mittag_leffler_deriv_series(alpha: f64, beta: f64, k: u32, z: f64) -> Result<EvalResult> {
    MLParams::two(alpha, beta)?;
    let cfg = MlConfig::default();
    let fail = |detail: &str| FraxionError::NonConvergence {
        routine: "mittag_leffler_deriv_series",
        at: z,
        detail: detail.to_string(),
    };
    let mut sum = CompensatedSum::new();
    let mut rounding = 0.0;
    let mut prev = f64::NAN;
    let mut prev_ratio = f64::INFINITY;
    // falling factorial j!/(j−k)!, updated in place
    let mut falling: f64 = (1..=k).map(|m| m as f64).product();
    let mut zpow = 1.0;
    for i in 0..cfg.n_max {
        let j = k as usize + i;
        if i > 0 {
            falling *= j as f64 / i as f64;
            zpow *= z;
        }
        let term = falling * zpow * recip_gamma_value(alpha * j as f64 + beta);
        if !term.is_finite() || (z < 0.0 && term.abs() > SERIES_ABORT_MAGNITUDE) {
            return Err(fail("series overflow or cancellation"));
        }
        sum.add(term);
        rounding += term.abs() * ((i as f64 + 4.0) * f64::EPSILON + GAMMA_REL_ERR);
        let mag = term.abs();
        if i >= 2 && prev > 0.0 {
            let ratio = mag / prev;
            if ratio < 0.5 && ratio <= prev_ratio {
                let tail = mag * ratio / (1.0 - ratio);
                if tail <= 0.5 * f64::EPSILON * sum.value().abs() || mag == 0.0 {
                    let r = EvalResult::new(sum.value(), tail + rounding + sum.rounding_bound(0.0));
                    if r.abs_err <= cfg.target(r.value) {
                        return Ok(r);
                    }
                    return Err(fail("tolerance not met"));
                }
            }
            prev_ratio = ratio;
        }
        prev = mag;
    }
    Err(fail("term cap reached"))
}

/// Value-only convenience wrapper used throughout the crate.
pub fn ml(alpha: f64, beta: f64, gamma_: f64, z: f64) -> Result<f64> {
    Ok(mittag_leffler(&MLParams::new(alpha, beta, gamma_)?, z)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn params_reject_invalid() {
        assert!(MLParams::new(0.0, 1.0, 1.0).is_err());
        assert!(MLParams::new(0.5, -1.0, 1.0).is_err());
        assert!(MLParams::new(0.5, 1.0, -0.1).is_err());
        assert!(MLParams::new(0.5, 1.0, 0.0).is_ok());
    }

    #[test]
    fn exponential_reduction() {
        let p = MLParams::one(1.0).unwrap();
        let r = mittag_leffler(&p, 1.0).unwrap();
        assert!((r.value - std::f64::consts::E).abs() < 1e-14);
        let r = mittag_leffler(&p, -3.0).unwrap();
        assert!((r.value - (-3.0f64).exp()).abs() <= r.abs_err.max(1e-15));
    }

    #[test]
    fn zero_argument_is_reciprocal_gamma() {
        let p = MLParams::two(0.5, 0.5).unwrap();
        let r = mittag_leffler(&p, 0.0).unwrap();
        assert!((r.value - 0.564_189_583_547_756_3).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_reports_nonconvergence() {
        let p = MLParams::one(0.5).unwrap();
        match mittag_leffler(&p, -60.0) {
            Err(FraxionError::NonConvergence { .. }) => {}
            other => panic!("expected NonConvergence, got {other:?}"),
        }
        // positive overflow for small alpha
        let p = MLParams::one(0.2).unwrap();
        assert!(mittag_leffler(&p, 45.0).is_err());
    }

    #[test]
    fn gamma_zero_is_constant() {
        let p = MLParams::new(0.7, 2.0, 0.0).unwrap();
        let r = mittag_leffler(&p, -5.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derivative_zeroth_order_matches_function() {
        let d = mittag_leffler_deriv(0.5, 0.5, 0, -1.0).unwrap();
        let f = mittag_leffler(&MLParams::two(0.5, 0.5).unwrap(), -1.0).unwrap();
        assert!((d.value - f.value).abs() <= d.abs_err + f.abs_err);
        let d1 = mittag_leffler_deriv(1.0, 1.0, 1, 0.0).unwrap();
        assert!((d1.value - 1.0).abs() < 1e-14);
    }
}
