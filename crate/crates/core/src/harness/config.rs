//! Flat key=value experiment configuration.
//!
//! Unknown keys are parse errors; invariant violations are validation
//! errors naming the offending field. Regime-oracle notes about the chosen
//! parameters are attached as warnings, not errors.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{regime_oracle, Existence};
use crate::constructions::TopologySpec;
use crate::graph::{GameParams, TieRule};
use crate::score::WeightScheme;

#[derive(Error, Debug)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid {field}: {message}")]
    Validation { field: &'static str, message: String },
}

/// A full experiment: game parameters, initial topology, run shape, seed,
/// weight scheme and output location.
#[derive(Clone, PartialEq, Debug)]
pub struct ExperimentConfig {
    pub params: GameParams,
    pub topology: TopologySpec,
    pub rounds: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub weights: WeightScheme,
    pub output_dir: PathBuf,
    pub stability_window: usize,
    /// Regime-oracle notes about the configured parameters.
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    /// Render back to the flat key=value file form. Parsing the result
    /// reproduces the configuration exactly.
    pub fn to_key_values(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        out.push_str(&format!("n={}\nm={}\nd={}\n", p.n, p.m, p.d));
        out.push_str(&format!(
            "d_in={}\n",
            p.d_in.map_or("inf".into(), |v| v.to_string())
        ));
        out.push_str(&format!("tie={}\nk_worst={}\n", p.tie_rule, p.k_worst));
        if let Some(k_add) = p.add_per_round {
            out.push_str(&format!("k_add={}\n", k_add));
        }
        match &self.topology {
            TopologySpec::Random => out.push_str("topology=random\n"),
            TopologySpec::SmallWorld { rewire_p } => {
                out.push_str(&format!("topology=small-world\nrewire_p={}\n", rewire_p))
            }
            TopologySpec::ScaleFree { seed_component } => out.push_str(&format!(
                "topology=scale-free\nseed_component={}\n",
                seed_component
            )),
        }
        out.push_str(&format!(
            "rounds={}\nreps={}\nseed={}\nweights={}\noutput_dir={}\nstability_window={}\n",
            self.rounds,
            self.repetitions,
            self.seed,
            self.weights,
            self.output_dir.display(),
            self.stability_window
        ));
        out
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Recognized keys: n, m, d (required), d_in (integer or `inf`), tie,
/// k_worst, k_add, topology, rewire_p, seed_component, rounds, reps, seed,
/// weights, output_dir, stability_window.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut n = None;
    let mut m = None;
    let mut d = None;
    let mut d_in: Option<usize> = None;
    let mut tie = TieRule::Lifo;
    let mut k_worst = 1usize;
    let mut k_add: Option<usize> = None;
    let mut topology = "random".to_string();
    let mut rewire_p = 0.5f64;
    let mut seed_component = 20usize;
    let mut rounds = 256usize;
    let mut repetitions = 20usize;
    let mut seed = 0u64;
    let mut weights = WeightScheme::Uniform;
    let mut output_dir = PathBuf::from("out");
    let mut stability_window = 64usize;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let lineno = idx + 1;
        let parse_err = |message: String| ConfigError::Parse {
            line: lineno,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(format!("expected key=value, got '{}'", line)))?;
        let (key, value) = (key.trim(), value.trim());
        macro_rules! num {
            ($ty:ty) => {
                value
                    .parse::<$ty>()
                    .map_err(|_| parse_err(format!("bad value for {}: '{}'", key, value)))?
            };
        }
        match key {
            "n" => n = Some(num!(usize)),
            "m" => m = Some(num!(usize)),
            "d" => d = Some(num!(usize)),
            "d_in" => {
                d_in = if value == "inf" {
                    None
                } else {
                    Some(num!(usize))
                }
            }
            "tie" => {
                tie = TieRule::parse(value)
                    .ok_or_else(|| parse_err(format!("unknown tie rule '{}'", value)))?
            }
            "k_worst" => k_worst = num!(usize),
            "k_add" => k_add = Some(num!(usize)),
            "topology" => topology = value.to_string(),
            "rewire_p" => rewire_p = num!(f64),
            "seed_component" => seed_component = num!(usize),
            "rounds" => rounds = num!(usize),
            "reps" => repetitions = num!(usize),
            "seed" => seed = num!(u64),
            "weights" => {
                weights = WeightScheme::parse(value)
                    .ok_or_else(|| parse_err(format!("unknown weight scheme '{}'", value)))?
            }
            "output_dir" => output_dir = PathBuf::from(value),
            "stability_window" => stability_window = num!(usize),
            other => return Err(parse_err(format!("unknown key '{}'", other))),
        }
    }

    let missing = |field: &'static str| ConfigError::Validation {
        field,
        message: "required key missing".into(),
    };
    let n = n.ok_or_else(|| missing("n"))?;
    let m = m.ok_or_else(|| missing("m"))?;
    let d = d.ok_or_else(|| missing("d"))?;
    let mut params =
        GameParams::new(n, m, d, d_in, tie, k_worst).map_err(|e| ConfigError::Validation {
            field: "params",
            message: e.to_string(),
        })?;
    params.add_per_round = k_add;
    params.validate().map_err(|e| ConfigError::Validation {
        field: "k_add",
        message: e.to_string(),
    })?;
    let topology = match topology.as_str() {
        "random" => TopologySpec::Random,
        "small-world" => TopologySpec::SmallWorld { rewire_p },
        "scale-free" => TopologySpec::ScaleFree { seed_component },
        other => {
            return Err(ConfigError::Validation {
                field: "topology",
                message: format!("unknown topology '{}'", other),
            })
        }
    };
    if repetitions < 1 {
        return Err(ConfigError::Validation {
            field: "reps",
            message: "at least one repetition required".into(),
        });
    }
    if stability_window < 1 {
        return Err(ConfigError::Validation {
            field: "stability_window",
            message: "the window must cover at least one round".into(),
        });
    }
    let answer = regime_oracle(n, m, d, d_in, tie);
    let mut warnings = Vec::new();
    if answer.miner_stable == Existence::Impossible {
        warnings.push(format!(
            "no miner-stable topology exists for these parameters ({})",
            answer.citations.join(", ")
        ));
    }
    if answer.network_stable == Existence::Impossible {
        warnings.push(format!(
            "no network-stable topology exists for these parameters ({})",
            answer.citations.join(", ")
        ));
    }
    Ok(ExperimentConfig {
        params,
        topology,
        rounds,
        repetitions,
        seed,
        weights,
        output_dir,
        stability_window,
        warnings,
    })
}
