//! Experiment configuration: flat `key = value` text, `#` comments, and
//! comma-separated lists for the grid keys `m`, `beta`, `strategy` and
//! `mitigation`.
//!
//! ```text
//! m = 5
//! beta = 0.15, 0.25
//! strategy = nsplit-tiebreak
//! epochs = 1500
//! trials = 200
//! seed = 7
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::adversary::{AdversaryConfig, Strategy};
use crate::mitigations::Mitigation;
use crate::netsim::{ElectionMode, WorldConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
}

fn invalid(field: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Statistical,
    Identity,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub m: Vec<f64>,
    pub beta: Vec<f64>,
    pub mode: Mode,
    /// Honest views in statistical mode; total identities in identity mode.
    pub participants: u32,
    pub epochs: u64,
    pub trials: u64,
    pub strategy: Vec<Strategy>,
    pub mitigation: Vec<Mitigation>,
    pub tau: u64,
    pub liveness_u: u64,
    pub lead_bootstrap: i64,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub hold_split: bool,
    pub jobs: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: vec![5.0],
            beta: vec![0.2],
            mode: Mode::Statistical,
            participants: 16,
            epochs: 1000,
            trials: 1,
            strategy: vec![Strategy::Null],
            mitigation: vec![Mitigation::None],
            tau: 20,
            liveness_u: 50,
            lead_bootstrap: 4,
            seed: 0,
            output: None,
            hold_split: false,
            jobs: None,
        }
    }
}

/// One point of the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub m: f64,
    pub beta: f64,
    pub strategy: Strategy,
    pub mitigation: Mitigation,
}

fn list<T: FromStr>(field: &'static str, v: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|e| invalid(field, format!("`{s}`: {e}"))))
        .collect()
}

fn one<T: FromStr>(field: &'static str, v: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    v.parse::<T>().map_err(|e| invalid(field, format!("`{v}`: {e}")))
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        text.parse()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for &m in &self.m {
            if !(m.is_finite() && m > 0.0) {
                return Err(invalid("m", format!("must be positive, got {m}")));
            }
        }
        for &b in &self.beta {
            if !(b.is_finite() && (0.0..1.0).contains(&b)) {
                return Err(invalid("beta", format!("must lie in [0, 1), got {b}")));
            }
        }
        if self.participants == 0 {
            return Err(invalid("participants", "must be at least 1"));
        }
        if self.mode == Mode::Identity {
            for &m in &self.m {
                if (self.participants as f64) < m.ceil() {
                    return Err(invalid("participants", format!("identity mode needs n >= ceil(m) = {}", m.ceil())));
                }
            }
            for &b in &self.beta {
                if (b * self.participants as f64).round() as u32 >= self.participants {
                    return Err(invalid("participants", "identity mode leaves no honest participant"));
                }
            }
        }
        if self.epochs == 0 {
            return Err(invalid("epochs", "must be at least 1"));
        }
        if self.liveness_u == 0 {
            return Err(invalid("liveness_u", "must be at least 1"));
        }
        if self.jobs == Some(0) {
            return Err(invalid("jobs", "must be at least 1"));
        }
        Ok(())
    }

    /// Grid cells sorted by `(m, beta, strategy, mitigation)`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &m in &self.m {
            for &beta in &self.beta {
                for &strategy in &self.strategy {
                    for &mitigation in &self.mitigation {
                        out.push(Cell {
                            m,
                            beta,
                            strategy,
                            mitigation,
                        });
                    }
                }
            }
        }
        out.sort_by(|a, b| {
            a.m.total_cmp(&b.m)
                .then(a.beta.total_cmp(&b.beta))
                .then(a.strategy.name().cmp(b.strategy.name()))
                .then(a.mitigation.name().cmp(b.mitigation.name()))
        });
        out
    }

    pub fn world_config(&self, cell: &Cell, seed: u64) -> WorldConfig {
        let election = match self.mode {
            Mode::Statistical => ElectionMode::Statistical {
                nodes: self.participants as usize,
            },
            Mode::Identity => ElectionMode::Identity {
                participants: self.participants,
            },
        };
        WorldConfig {
            m: cell.m,
            beta: cell.beta,
            election,
            seed,
            mitigation: cell.mitigation,
            adversary: AdversaryConfig {
                strategy: cell.strategy,
                tau: self.tau,
                lead_bootstrap: self.lead_bootstrap,
                hold_split: self.hold_split,
            },
        }
    }
}

impl FromStr for ExperimentConfig {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap().trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if seen.iter().any(|k| k == key) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(key.to_string());
            match key {
                "m" => cfg.m = list("m", value)?,
                "beta" => cfg.beta = list("beta", value)?,
                "mode" => {
                    cfg.mode = match value {
                        "statistical" => Mode::Statistical,
                        "identity" => Mode::Identity,
                        other => return Err(invalid("mode", format!("unknown mode `{other}`"))),
                    }
                }
                "participants" => cfg.participants = one("participants", value)?,
                "epochs" => cfg.epochs = one("epochs", value)?,
                "trials" => cfg.trials = one("trials", value)?,
                "strategy" => cfg.strategy = list("strategy", value)?,
                "mitigation" => cfg.mitigation = list("mitigation", value)?,
                "tau" => cfg.tau = one("tau", value)?,
                "liveness_u" => cfg.liveness_u = one("liveness_u", value)?,
                "lead_bootstrap" => cfg.lead_bootstrap = one("lead_bootstrap", value)?,
                "seed" => cfg.seed = one("seed", value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "hold_split" => cfg.hold_split = one("hold_split", value)?,
                "jobs" => cfg.jobs = Some(one("jobs", value)?),
                other => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: other.to_string(),
                    })
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::SplitVariant;

    #[test]
    fn parses_grid_and_scalars() {
        let cfg: ExperimentConfig = "
            # a comment
            m = 3, 5
            beta = 0.1,0.2
            strategy = nsplit-tiebreak
            mitigation = none, consistent-broadcast
            epochs = 10   # trailing comment
            trials = 2
            seed = 99
            hold_split = true
        "
        .parse()
        .unwrap();
        assert_eq!(cfg.m, vec![3.0, 5.0]);
        assert_eq!(cfg.strategy, vec![Strategy::NSplit(SplitVariant::TieBreak)]);
        assert_eq!(cfg.cells().len(), 8);
        assert!(cfg.hold_split);
        assert_eq!(cfg.seed, 99);
    }

    #[test]
    fn cells_are_sorted() {
        let cfg: ExperimentConfig = "m = 5, 3\nbeta = 0.3, 0.1\nstrategy = private, null".parse().unwrap();
        let cells = cfg.cells();
        assert_eq!(cells[0].m, 3.0);
        assert_eq!(cells[0].beta, 0.1);
        assert_eq!(cells[0].strategy, Strategy::Null);
        assert_eq!(cells.last().unwrap().beta, 0.3);
    }

    fn field_of(text: &str) -> String {
        match text.parse::<ExperimentConfig>() {
            Err(ConfigError::Invalid { field, .. }) => field.to_string(),
            Err(ConfigError::UnknownKey { key, .. }) => key,
            other => panic!("expected a field error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_field() {
        assert_eq!(field_of("strategy = selfish"), "strategy");
        assert_eq!(field_of("m = 0"), "m");
        assert_eq!(field_of("beta = 1.0"), "beta");
        assert_eq!(field_of("mode = identity\nparticipants = 3\nm = 5"), "participants");
        assert_eq!(field_of("epochs = ten"), "epochs");
        assert_eq!(field_of("colour = blue"), "colour");
        assert!(matches!("just words".parse::<ExperimentConfig>(), Err(ConfigError::Syntax { line: 1, .. })));
        assert!(matches!("m = 1\nm = 2".parse::<ExperimentConfig>(), Err(ConfigError::Duplicate { line: 2, .. })));
    }

    #[test]
    fn empty_grid_has_no_cells() {
        let cfg: ExperimentConfig = "beta =".parse().unwrap();
        assert!(cfg.cells().is_empty());
    }
}
