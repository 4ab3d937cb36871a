//! Gamma function family: Γ, ln Γ, 1/Γ and the Pochhammer symbol.
//!
//! Lanczos approximation (g = 7, nine coefficients) for arguments ≥ ½,
//! reflection below. The reciprocal gamma is total: it is exactly zero at
//! the poles 0, −1, −2, …

use std::f64::consts::PI;

use super::EvalResult;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const SQRT_2PI: f64 = 2.506_628_274_631_000_2;

/// Largest argument for which Γ is representable in `f64`.
pub const GAMMA_MAX_ARG: f64 = 171.624_376_956_302_7;

/// Relative accuracy assumed for Γ, 1/Γ and ln Γ away from poles.
pub(crate) const GAMMA_REL_ERR: f64 = 2e-14;

#[inline]
fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (Γ(x + 1) form).
    let mut a = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    a
}

/// sin(πx) with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x.fract() == 0.0 {
        return 0.0;
    }
    // reduce to r ∈ [-1, 1]
    let r = x - 2.0 * (x / 2.0).round();
    if r.abs() <= 0.25 {
        (PI * r).sin()
    } else if r > 0.75 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.75 {
        -(PI * (1.0 + r)).sin()
    } else if r > 0.0 {
        (PI * (0.5 - r)).cos()
    } else {
        -(PI * (0.5 + r)).cos()
    }
}

#[inline]
fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Γ(x). Returns ±∞ at the poles and overflows to ∞ beyond [`GAMMA_MAX_ARG`].
pub fn gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return PI / (sin_pi(x) * gamma(1.0 - x));
    }
    if x > GAMMA_MAX_ARG {
        return f64::INFINITY;
    }
    if x.fract() == 0.0 && x <= 23.0 {
        // exact factorials
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return f;
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    // split the power to avoid premature overflow
    let p = t.powf(0.5 * (xm + 0.5));
    SQRT_2PI * p * (p * (-t).exp()) * lanczos_sum(xm)
}

/// ln|Γ(x)|; for x > 0 this is ln Γ(x).
pub fn ln_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return f64::INFINITY;
    }
    if x < 0.5 {
        return (PI / sin_pi(x).abs()).ln() - ln_gamma(1.0 - x);
    }
    if x.fract() == 0.0 && x <= 23.0 {
        return gamma(x).ln();
    }
    let xm = x - 1.0;
    let t = xm + LANCZOS_G + 0.5;
    LN_SQRT_2PI + (xm + 0.5) * t.ln() - t + lanczos_sum(xm).ln()
}

/// 1/Γ(x), exactly zero at the non-positive integers.
pub fn recip_gamma_value(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x >= 0.5 {
        if x > GAMMA_MAX_ARG {
            return (-ln_gamma(x)).exp();
        }
        return 1.0 / gamma(x);
    }
    let s = sin_pi(x);
    let y = 1.0 - x;
    if y > GAMMA_MAX_ARG {
        return s * (ln_gamma(y) - PI.ln()).exp();
    }
    s * gamma(y) / PI
}

/// 1/Γ(x) with an error estimate.
pub fn recip_gamma(x: f64) -> EvalResult {
    let value = recip_gamma_value(x);
    let abs_err = if value == 0.0 {
        0.0
    } else {
        GAMMA_REL_ERR * value.abs() * (1.0 + x.abs().max(1.0).ln())
    };
    EvalResult { value, abs_err }
}

/// Pochhammer symbol (a)_k = a(a+1)⋯(a+k−1), (a)_0 = 1.
pub fn pochhammer(a: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (a + j as f64))
}

/// ln (a)_k for a > 0, via ln Γ(a+k) − ln Γ(a) for long products.
pub fn ln_pochhammer(a: f64, k: u32) -> f64 {
    if k <= 30 {
        (0..k).map(|j| (a + j as f64).ln()).sum()
    } else {
        ln_gamma(a + k as f64) - ln_gamma(a)
    }
}
