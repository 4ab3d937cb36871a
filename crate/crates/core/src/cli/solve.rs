use std::path::PathBuf;

use serde_json::json;

use super::{CliError, Format, SolveMethod};
use crate::fraccalc::{solve_abel_volterra, AbelMethod, AbelProblem, GridFunction, Origin};
use crate::renewal::FracOrder;
use crate::specfun::gamma;
use crate::stochastic::fmt_real;

/// Right-hand side g of the Abel-Volterra equation.
#[derive(Debug, Clone, PartialEq)]
pub enum GSpec {
    Const(f64),
    /// x^{μ−1}/Γ(μ).
    Power(f64),
    /// e^{−x}.
    Exp,
    /// Two columns t,g on a uniform grid starting at 0; a header line is
    /// allowed.
    GridFile(PathBuf),
}

impl GSpec {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("--g must be const:v, power:mu, exp or grid-file:path, got {s:?}"));
        let (head, rest) = s.split_once(':').unwrap_or((s, ""));
        match head {
            "exp" if rest.is_empty() => Ok(GSpec::Exp),
            "const" => rest.parse().ok().filter(|v: &f64| v.is_finite()).map(GSpec::Const).ok_or_else(bad),
            "power" => rest.parse().ok().filter(|m: &f64| *m > 0.0 && m.is_finite()).map(GSpec::Power).ok_or_else(bad),
            "grid-file" if !rest.is_empty() => Ok(GSpec::GridFile(rest.into())),
            _ => Err(bad()),
        }
    }
}

pub struct SolveRequest {
    pub alpha: f64,
    pub c: f64,
    pub g: GSpec,
    pub horizon: f64,
    pub dt: f64,
    pub method: SolveMethod,
}

fn read_grid(path: &PathBuf) -> Result<GridFunction, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut ts = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(CliError::Config(format!("{}:{}: expected t,g", path.display(), i + 1)));
        };
        match (a.parse::<f64>(), b.parse::<f64>()) {
            (Ok(t), Ok(v)) => {
                ts.push(t);
                vs.push(v);
            }
            _ if i == 0 => continue,
            _ => return Err(CliError::Config(format!("{}:{}: not a number", path.display(), i + 1))),
        }
    }
    if ts.len() < 2 || ts[0] != 0.0 {
        return Err(CliError::Config("grid file needs at least two rows starting at t = 0".into()));
    }
    let dt = ts[1] - ts[0];
    if ts.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt.max(1.0)) {
        return Err(CliError::Config("grid file must be uniformly spaced".into()));
    }
    GridFunction::new(0.0, dt, vs).map_err(CliError::config)
}

/// CSV or JSON text, and the cross-method discrepancy for `both`.
pub fn solve_output(req: &SolveRequest, format: Format) -> Result<(String, Option<f64>), CliError> {
    let order = FracOrder::new(req.alpha).map_err(CliError::config)?;
    if !req.c.is_finite() {
        return Err(CliError::Config("c must be finite".into()));
    }
    let g = match &req.g {
        GSpec::GridFile(p) => read_grid(p)?,
        other => {
            if !(req.horizon > 0.0 && req.dt > 0.0 && req.dt < req.horizon) {
                return Err(CliError::Config("need 0 < dt < T".into()));
            }
            match *other {
                GSpec::Const(v) => GridFunction::sample(|_| v, req.horizon, req.dt, None),
                GSpec::Exp => GridFunction::sample(|x| (-x).exp(), req.horizon, req.dt, None),
                GSpec::Power(mu) => GridFunction::sample(
                    |x| x.powf(mu - 1.0) / gamma(mu),
                    req.horizon,
                    req.dt,
                    Some(Origin::new(mu - 1.0, 1.0).map_err(CliError::config)?),
                ),
                GSpec::GridFile(_) => unreachable!(),
            }
            .map_err(CliError::config)?
        }
    };
    let problem = AbelProblem { order, c: req.c, g };
    let solve = |m| solve_abel_volterra(&problem, m).map_err(|e| CliError::numerical(e, req.horizon));
    let (cols, discrepancy) = match req.method {
        SolveMethod::Resolvent => (vec![solve(AbelMethod::Resolvent)?], None),
        SolveMethod::Stepping => (vec![solve(AbelMethod::Stepping)?], None),
        SolveMethod::Both => {
            let r = solve(AbelMethod::Resolvent)?;
            let s = solve(AbelMethod::Stepping)?;
            let d = r
                .values()
                .iter()
                .zip(s.values())
                .skip(1)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            (vec![r, s], Some(d))
        }
    };
    let base = &cols[0];
    let text = match format {
        Format::Csv => {
            let mut s = String::from(if cols.len() == 2 { "t,f_resolvent,f_stepping,abs_diff\n" } else { "t,f\n" });
            for j in 0..base.len() {
                s.push_str(&fmt_real(base.t(j)));
                for c in &cols {
                    s.push(',');
                    s.push_str(&fmt_real(c.values()[j]));
                }
                if cols.len() == 2 {
                    s.push(',');
                    s.push_str(&fmt_real((cols[0].values()[j] - cols[1].values()[j]).abs()));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let mut v = json!({
                "command": "solve",
                "alpha": req.alpha,
                "c": req.c,
                "t": base.times().collect::<Vec<f64>>(),
                "f": base.values(),
            });
            if cols.len() == 2 {
                v["f_stepping"] = json!(cols[1].values());
                v["sup_discrepancy"] = json!(discrepancy);
            }
            serde_json::to_string_pretty(&v).expect("solution serializes") + "\n"
        }
    };
    Ok((text, discrepancy))
}
