//! Special functions with a-posteriori error estimates.

use serde::{Deserialize, Serialize};

pub mod contour;
pub mod gamma;
pub mod mainardi;
pub mod mittag_leffler;
pub mod sum;

pub use gamma::{gamma, ln_gamma, pochhammer, recip_gamma, recip_gamma_value};
pub use mainardi::mainardi;
pub use mittag_leffler::{
    mittag_leffler, mittag_leffler_deriv, mittag_leffler_deriv_series, mittag_leffler_with, ml, MLParams,
    MlConfig,
};

/// A value together with a bound on its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub abs_err: f64,
}

impl EvalResult {
    pub fn new(value: f64, abs_err: f64) -> Self {
        Self { value, abs_err }
    }
}
