//! Random-network generation, graph edit distance and the experiment
//! harness comparing recovered topologies against their generators.

mod edit;
mod experiment;
mod generate;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use edit::{edit_distance, edit_distance_with_limit, EditMode, DEFAULT_EXACT_NODE_LIMIT};
pub use experiment::{run_experiment, run_trial, trial_seed, Aggregate, ExperimentReport, TrialRecord};
pub use generate::{
    generate_minimal_ring, generate_minimal_tree, generate_random_network, pad_with_relays, ring_order, same_cycle,
    MAX_RESAMPLES,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("no usable network for n = {n}, seed = {seed} after {MAX_RESAMPLES} draws")]
    DegenerateSample { n: usize, seed: u64 },
    #[error("exact edit distance limited to {limit} nodes, got {nodes}")]
    BudgetExceeded { nodes: usize, limit: usize },
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Recovery algorithm under evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Tree,
    Ring,
    Rings,
    General,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Tree => "tree",
            Algorithm::Ring => "ring",
            Algorithm::Rings => "rings",
            Algorithm::General => "general",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "tree" => Ok(Algorithm::Tree),
            "ring" => Ok(Algorithm::Ring),
            "rings" => Ok(Algorithm::Rings),
            "general" => Ok(Algorithm::General),
            _ => Err(format!("unknown algorithm {s:?} (tree, ring, rings, general)")),
        }
    }
}

/// Which generator produces the ground-truth networks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Erdős–Rényi graph on `n` routers with random host attachment.
    Random,
    /// Minimal tree with `n` overlay leaves.
    Tree,
    /// Minimal ring with `n` routers.
    Ring,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(Family::Random),
            "tree" => Ok(Family::Tree),
            "ring" => Ok(Family::Ring),
            _ => Err(format!("unknown family {s:?} (random, tree, ring)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    /// Network sizes; one batch of trials per value.
    pub n: Vec<usize>,
    /// Edge probability; `None` means `2/n`.
    pub edge_prob: Option<f64>,
    pub overlay_fraction: f64,
    pub trials: usize,
    pub seed: u64,
    pub recovery: Algorithm,
    pub family: Family,
    /// Largest graph (in nodes) scored with the exact edit distance.
    pub exact_edit_limit: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: vec![10, 20, 30, 40, 50],
            edge_prob: None,
            overlay_fraction: 0.8,
            trials: 100,
            seed: 0,
            recovery: Algorithm::General,
            family: Family::Random,
            exact_edit_limit: DEFAULT_EXACT_NODE_LIMIT,
        }
    }
}

impl ExperimentConfig {
    pub fn edge_prob_for(&self, n: usize) -> f64 {
        self.edge_prob.unwrap_or(2.0 / n as f64).min(1.0)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: String| Err(EvalError::InvalidConfig(m));
        if let Some(p) = self.edge_prob {
            if !(p > 0.0 && p <= 1.0) {
                return bad(format!("edge_prob must lie in (0, 1], got {p}"));
            }
        }
        if !(self.overlay_fraction > 0.0 && self.overlay_fraction <= 1.0) {
            return bad(format!("overlay_fraction must lie in (0, 1], got {}", self.overlay_fraction));
        }
        if self.n.is_empty() {
            return bad("no network sizes given".into());
        }
        let min = match self.family {
            Family::Random => 4,
            Family::Tree => 2,
            Family::Ring => 3,
        };
        if let Some(&n) = self.n.iter().find(|&&n| n < min) {
            return bad(format!("n = {n} is below {min}"));
        }
        Ok(())
    }

    /// Reads `key = value` lines; `#` starts a comment. Unknown keys are
    /// errors. `n` takes a comma-separated list or a range `lo..hi:step`.
    pub fn parse(text: &str) -> Result<Self, EvalError> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| EvalError::Parse { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let num = |v: &str| -> Result<f64, EvalError> {
                v.parse::<f64>().map_err(|_| err(format!("{key}: not a number: {v:?}")))
            };
            let int = |v: &str| -> Result<u64, EvalError> {
                v.parse::<u64>().map_err(|_| err(format!("{key}: not an integer: {v:?}")))
            };
            match key {
                "n" => cfg.n = parse_sizes(value).map_err(err)?,
                "edge_prob" => {
                    cfg.edge_prob = if value == "auto" { None } else { Some(num(value)?) };
                }
                "overlay_fraction" => cfg.overlay_fraction = num(value)?,
                "trials" => cfg.trials = int(value)? as usize,
                "seed" => cfg.seed = int(value)?,
                "recovery" => cfg.recovery = value.parse().map_err(err)?,
                "family" => cfg.family = value.parse().map_err(err)?,
                "exact_edit_limit" => cfg.exact_edit_limit = int(value)? as usize,
                _ => return Err(err(format!("unknown key {key:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_sizes(value: &str) -> Result<Vec<usize>, String> {
    let bad = || format!("n: cannot read {value:?}");
    if let Some((lo, rest)) = value.split_once("..") {
        let (hi, step) = rest.split_once(':').unwrap_or((rest, "1"));
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        let step: usize = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || hi < lo {
            return Err(bad());
        }
        return Ok((lo..=hi).step_by(step).collect());
    }
    value
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| bad()))
        .collect()
}
