use serde_json::json;

use super::{CliError, EvalFn, Format};
use crate::renewal::{self, FracOrder, ProcessSpec};
use crate::specfun::{mainardi, mittag_leffler, mittag_leffler_deriv, EvalResult, MLParams};
use crate::stochastic::fmt_real;

pub struct EvalRequest {
    pub function: EvalFn,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub k: u32,
    pub n: u32,
    pub fold: u32,
    pub grid: Vec<f64>,
}

impl EvalFn {
    fn name(self) -> &'static str {
        match self {
            EvalFn::Ml => "ml",
            EvalFn::MlDeriv => "ml_deriv",
            EvalFn::Mainardi => "mainardi",
            EvalFn::Density => "density",
            EvalFn::Survival => "survival",
            EvalFn::Failure => "failure",
            EvalFn::Erlang => "erlang",
            EvalFn::Counting => "counting",
            EvalFn::RenewalFn => "renewal_fn",
            EvalFn::ClassicFpp => "classic_fpp",
        }
    }

    /// Special functions take z and report an error bound.
    fn is_special(self) -> bool {
        matches!(self, EvalFn::Ml | EvalFn::MlDeriv | EvalFn::Mainardi)
    }
}

pub fn eval_output(req: &EvalRequest, format: Format) -> Result<String, CliError> {
    // parameters are checked once, before the grid is touched
    let special = req.function.is_special();
    let ml_params = match req.function {
        EvalFn::Ml => Some(MLParams::new(req.alpha, req.beta, req.gamma).map_err(CliError::config)?),
        EvalFn::MlDeriv => Some(MLParams::two(req.alpha, req.beta).map_err(CliError::config)?),
        _ => None,
    };
    let order = if special && req.function != EvalFn::Mainardi {
        None
    } else {
        Some(FracOrder::new(req.alpha).map_err(CliError::config)?)
    };
    let spec = match order {
        Some(o) => Some(ProcessSpec::new(o, req.fold).map_err(CliError::config)?),
        None => None,
    };
    if req.grid.is_empty() || req.grid.iter().any(|x| !x.is_finite()) {
        return Err(CliError::Config("grid points must be finite and non-empty".into()));
    }
    if !special && req.grid.iter().any(|&t| t <= 0.0) {
        return Err(CliError::Config("time points must be positive".into()));
    }

    let mut rows: Vec<(f64, EvalResult)> = Vec::with_capacity(req.grid.len());
    for &x in &req.grid {
        let plain = |v: crate::Result<f64>| v.map(|v| EvalResult::new(v, 0.0));
        let r = match req.function {
            EvalFn::Ml => mittag_leffler(ml_params.as_ref().unwrap(), x),
            EvalFn::MlDeriv => mittag_leffler_deriv(req.alpha, req.beta, req.k, x),
            EvalFn::Mainardi => mainardi(req.alpha, x),
            EvalFn::Density => plain(renewal::ml_density(order.unwrap(), x)),
            EvalFn::Survival => plain(renewal::survival(order.unwrap(), x)),
            EvalFn::Failure => plain(renewal::failure(order.unwrap(), x)),
            EvalFn::Erlang => plain(renewal::erlang_density(spec.unwrap(), req.n, x)),
            EvalFn::Counting => plain(renewal::counting_probability(spec.unwrap(), req.n, x)),
            EvalFn::RenewalFn => plain(renewal::renewal_function(spec.unwrap(), x)),
            EvalFn::ClassicFpp => plain(renewal::classic_fpp_pmf(order.unwrap(), req.n, x)),
        };
        rows.push((x, r.map_err(|e| CliError::numerical(e, x))?));
    }

    Ok(match format {
        Format::Csv => {
            let mut s = String::from(if special { "z,value,abs_err\n" } else { "t,value\n" });
            for (x, r) in &rows {
                s.push_str(&fmt_real(*x));
                s.push(',');
                s.push_str(&fmt_real(r.value));
                if special {
                    s.push(',');
                    s.push_str(&fmt_real(r.abs_err));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let rows: Vec<_> = rows
                .iter()
                .map(|(x, r)| {
                    if special {
                        json!({ "x": x, "value": r.value, "abs_err": r.abs_err })
                    } else {
                        json!({ "x": x, "value": r.value })
                    }
                })
                .collect();
            let v = json!({
                "command": "eval",
                "function": req.function.name(),
                "alpha": req.alpha,
                "rows": rows,
            });
            serde_json::to_string_pretty(&v).expect("rows serialize") + "\n"
        }
    })
}
