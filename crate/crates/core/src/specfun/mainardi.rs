//! Mainardi function M_α(z) = Σ (−z)^n / (n! Γ(−αn + 1 − α)).
//!
//! The series is used near the origin. Further out it cancels, and the
//! Zolotarev-type integral
//!
//!   M_α(z) = z^{α/(1−α)} / (π(1−α)) ∫_0^π A(φ) exp(−A(φ) z^{1/(1−α)}) dφ,
//!   A(φ) = (sin αφ / sin φ)^{1/(1−α)} · sin((1−α)φ) / sin αφ,
//!
//! with a positive integrand takes over.

use std::f64::consts::PI;

use super::gamma::{recip_gamma_value, GAMMA_REL_ERR};
use super::sum::CompensatedSum;
use super::EvalResult;
use crate::error::{FraxionError, Result};
use crate::quad::{integrate, QuadConfig};

const SERIES_LIMIT: f64 = 2.0;
const REL_TOL: f64 = 1e-10;
const ABS_TOL: f64 = 1e-16;

fn series(alpha: f64, z: f64) -> Option<EvalResult> {
    let mut sum = CompensatedSum::new();
    let mut pow = 1.0; // z^n / n!
    let mut small_run = 0;
    for n in 0..500usize {
        if n > 0 {
            pow *= z / n as f64;
        }
        let term = pow * recip_gamma_value(1.0 - alpha - alpha * n as f64);
        if !term.is_finite() || term.abs() > 1e8 {
            return None;
        }
        sum.add(if n % 2 == 1 { -term } else { term });
        // terms vanish exactly at isolated n, so require a run of small ones
        let target = (REL_TOL * sum.value().abs()).max(ABS_TOL);
        if term.abs() < 1e-3 * target {
            small_run += 1;
            if small_run >= 4 {
                let abs_err = 4.0 * term.abs() + sum.rounding_bound(GAMMA_REL_ERR * 4.0);
                return Some(EvalResult::new(sum.value(), abs_err));
            }
        } else {
            small_run = 0;
        }
    }
    None
}

fn kernel(alpha: f64, phi: f64) -> f64 {
    let b = 1.0 / (1.0 - alpha);
    let sa = (alpha * phi).sin();
    (sa / phi.sin()).powf(b) * ((1.0 - alpha) * phi).sin() / sa
}

fn zolotarev(alpha: f64, z: f64) -> Result<EvalResult> {
    let w = z.powf(1.0 / (1.0 - alpha));
    let cfg = QuadConfig {
        abs_tol: 0.0,
        rel_tol: REL_TOL * 0.1,
        max_intervals: 4000,
    };
    let r = integrate(
        |phi| {
            let a = kernel(alpha, phi);
            if !a.is_finite() {
                return 0.0;
            }
            a * (-a * w).exp()
        },
        0.0,
        PI,
        &cfg,
    )?;
    let pre = z.powf(alpha / (1.0 - alpha)) / (PI * (1.0 - alpha));
    Ok(EvalResult::new(pre * r.value, pre * r.abs_err))
}

/// M_α(z) for 0 < α < 1 and z ≥ 0.
pub fn mainardi(alpha: f64, z: f64) -> Result<EvalResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(FraxionError::domain(format!("mainardi order must lie in (0,1), got {alpha}")));
    }
    if !(z.is_finite() && z >= 0.0) {
        return Err(FraxionError::domain(format!("mainardi argument must be >= 0, got {z}")));
    }
    if z <= SERIES_LIMIT {
        if let Some(r) = series(alpha, z) {
            if r.abs_err <= (REL_TOL * r.value.abs()).max(ABS_TOL) {
                return Ok(r);
            }
        }
    }
    if z == 0.0 {
        return Err(FraxionError::NonConvergence {
            routine: "mainardi",
            at: z,
            detail: "series failed at the origin".into(),
        });
    }
    zolotarev(alpha, z).map_err(|e| FraxionError::NonConvergence {
        routine: "mainardi",
        at: z,
        detail: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_closed_form(z: f64) -> f64 {
        (-z * z / 4.0).exp() / PI.sqrt()
    }

    #[test]
    fn half_order_matches_gaussian() {
        for z in [0.0, 0.3, 1.0, 2.0, 3.5, 7.0] {
            let r = mainardi(0.5, z).unwrap();
            let exact = half_closed_form(z);
            assert!((r.value - exact).abs() <= r.abs_err.max(1e-15), "z={z}");
            assert!((r.value - exact).abs() < 1e-10 * exact.max(1e-6));
        }
    }

    #[test]
    fn series_and_integral_agree_on_overlap() {
        for alpha in [0.25, 0.5, 0.75] {
            for z in [0.5, 1.0, 1.5] {
                let s = series(alpha, z).unwrap();
                let q = zolotarev(alpha, z).unwrap();
                assert!((s.value - q.value).abs() <= 10.0 * (s.abs_err + q.abs_err) + 1e-14);
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(mainardi(1.0, 1.0).is_err());
        assert!(mainardi(0.5, -1.0).is_err());
    }
}
