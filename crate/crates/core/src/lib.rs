//! Numerical toolkit for α-fractional renewal processes: Mittag-Leffler and
//! Mainardi functions, closed-form renewal quantities, grid fractional
//! operators, Laplace-domain verification and Monte Carlo simulation.

pub mod cli;
pub mod error;
pub mod fraccalc;
pub mod laplace;
pub mod quad;
pub mod renewal;
pub mod specfun;
pub mod stochastic;

pub use error::{FraxionError, Result};
pub use specfun::EvalResult;
