use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::verify::Tolerances;
use super::{CliError, Format};

/// Run configuration read from `--config`. Every field is optional;
/// command-line flags override it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub alpha: Option<f64>,
    pub fold: Option<u32>,
    pub t_grid: Option<TGrid>,
    pub seed: Option<u64>,
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub output: Option<OutputSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Inclusive linear grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TGrid {
    /// Parses `start:stop:points`.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("grid must be start:stop:points, got {s:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let g = TGrid {
            start: parts[0].trim().parse().map_err(|_| bad())?,
            stop: parts[1].trim().parse().map_err(|_| bad())?,
            points: parts[2].trim().parse().map_err(|_| bad())?,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.start.is_finite() && self.stop.is_finite()) || self.points == 0 {
            return Err(CliError::Config("grid needs finite ends and at least one point".into()));
        }
        if self.points > 1 && !(self.stop > self.start) {
            return Err(CliError::Config("grid stop must exceed start".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        self.validate()?;
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let h = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| if i + 1 == self.points { self.stop } else { self.start + h * i as f64 })
            .collect())
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every field before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                return Err(CliError::Config(format!("alpha must lie in (0,1), got {a}")));
            }
        }
        if self.fold == Some(0) {
            return Err(CliError::Config("fold must be >= 1".into()));
        }
        if let Some(g) = &self.t_grid {
            g.validate()?;
        }
        if self.n_samples == Some(0) {
            return Err(CliError::Config("n_samples must be >= 1".into()));
        }
        self.tolerances()?;
        Ok(())
    }

    /// Default tolerances with the configured overrides applied.
    pub fn tolerances(&self) -> Result<Tolerances, CliError> {
        for (k, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(CliError::Config(format!("tolerance {k} must be positive, got {v}")));
            }
        }
        let mut base = serde_json::to_value(Tolerances::default()).expect("tolerances serialize");
        let obj = base.as_object_mut().expect("object");
        for (k, v) in &self.tolerances {
            if !obj.contains_key(k) {
                return Err(CliError::Config(format!("unknown tolerance {k:?}")));
            }
            obj.insert(k.clone(), (*v).into());
        }
        serde_json::from_value(base).map_err(CliError::config)
    }
}
