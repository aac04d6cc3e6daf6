//! Experiment harness: generate, measure, recover, score.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::NetworkGraph;
use crate::interference::{ground_truth, InterferenceMatrix};
use crate::recovery::{identify_general, identify_ring, identify_rings, identify_tree, RecoveryError};

use super::edit::{edit_distance_with_limit, EditMode};
use super::generate::{generate_minimal_ring, generate_minimal_tree, generate_random_network};
use super::{Algorithm, EvalError, ExperimentConfig, Family};

/// Outcome of one trial. `edit_distance` and `f_hamming` are `None` when
/// the trial failed (see `error`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub n: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub edit_distance: Option<usize>,
    /// How `edit_distance` was computed; heuristic values are upper bounds.
    pub edit_mode: EditMode,
    /// Disagreement between the recovered topology's matrix and the input.
    pub f_hamming: Option<usize>,
    /// Wall-clock time of the recovery call alone.
    pub runtime_ms: f64,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub trials: usize,
    pub failed: usize,
    /// Over successful trials; `NaN` when none succeeded.
    pub mean_edit_distance: f64,
    pub std_edit_distance: f64,
    pub mean_runtime_ms: f64,
    /// Trials scored with the heuristic edit distance.
    pub heuristic: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<Aggregate>,
}

impl ExperimentReport {
    /// Writes one row per trial. With `timing` off the runtime column is
    /// left empty so that reruns produce identical files.
    pub fn write_csv<W: Write>(&self, out: W, timing: bool) -> Result<(), EvalError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["n", "seed", "algorithm", "edit_distance", "f_hamming", "runtime_ms"])?;
        let opt = |v: Option<usize>| v.map_or(String::new(), |v| v.to_string());
        for r in &self.records {
            w.write_record([
                r.n.to_string(),
                r.seed.to_string(),
                r.algorithm.to_string(),
                opt(r.edit_distance),
                opt(r.f_hamming),
                if timing { format!("{:.3}", r.runtime_ms) } else { String::new() },
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn aggregate(&self, n: usize) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.n == n)
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / xs.len() as f64;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
    (m, v.sqrt())
}

fn aggregate(n: usize, records: &[TrialRecord]) -> Aggregate {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| !r.failed()).collect();
    let d: Vec<f64> = ok.iter().filter_map(|r| r.edit_distance).map(|d| d as f64).collect();
    let (mean, std) = mean_std(&d);
    let t: Vec<f64> = records.iter().map(|r| r.runtime_ms).collect();
    Aggregate {
        n,
        trials: records.len(),
        failed: records.len() - ok.len(),
        mean_edit_distance: mean,
        std_edit_distance: std,
        mean_runtime_ms: mean_std(&t).0,
        heuristic: ok.iter().filter(|r| r.edit_mode == EditMode::Heuristic).count(),
    }
}

fn generate(n: usize, cfg: &ExperimentConfig, seed: u64) -> Result<NetworkGraph, EvalError> {
    match cfg.family {
        Family::Random => generate_random_network(n, cfg, seed),
        Family::Tree => Ok(generate_minimal_tree(n, seed)),
        Family::Ring => Ok(generate_minimal_ring(n, seed)),
    }
}

/// Recovered network and its matrix disagreement with `f`.
fn recover(algo: Algorithm, f: &InterferenceMatrix) -> Result<(NetworkGraph, usize), String> {
    let o = f.overlays();
    let graph = match algo {
        Algorithm::Tree => identify_tree(f, o),
        Algorithm::Ring => identify_ring(f, o),
        Algorithm::Rings => identify_rings(f, o).map(|r| r.graph),
        Algorithm::General => identify_general(f, o).map(|r| r.graph),
    }
    .map_err(|e: RecoveryError| e.to_string())?;
    let g = graph.network().map_err(|e| format!("recovered topology is not a network: {e}"))?;
    let fg = ground_truth(&g).map_err(|e| e.to_string())?;
    Ok((g, fg.hamming_distance(f)))
}

/// Runs a single trial; failures are recorded, not returned.
pub fn run_trial(n: usize, cfg: &ExperimentConfig, seed: u64) -> TrialRecord {
    let mut rec = TrialRecord {
        n,
        seed,
        algorithm: cfg.recovery,
        edit_distance: None,
        edit_mode: EditMode::Exact,
        f_hamming: None,
        runtime_ms: 0.0,
        error: None,
    };
    let g = match generate(n, cfg, seed) {
        Ok(g) => g,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let f = match ground_truth(&g) {
        Ok(f) => f,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let start = Instant::now();
    let out = recover(cfg.recovery, &f);
    rec.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let (h, fd) = match out {
        Ok(x) => x,
        Err(e) => {
            rec.error = Some(e);
            return rec;
        }
    };
    rec.f_hamming = Some(fd);
    let nodes = g.node_count().max(h.node_count());
    rec.edit_mode = if nodes <= cfg.exact_edit_limit { EditMode::Exact } else { EditMode::Heuristic };
    match edit_distance_with_limit(&g, &h, rec.edit_mode, cfg.exact_edit_limit) {
        Ok(d) => rec.edit_distance = Some(d),
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}

/// Seed of trial `t`: consecutive from the configured seed, the same for
/// every network size.
pub fn trial_seed(cfg: &ExperimentConfig, t: usize) -> u64 {
    cfg.seed.wrapping_add(t as u64)
}

/// Runs every trial of `cfg` on the current rayon pool. Records come out
/// ordered by network size, then trial.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport, EvalError> {
    cfg.validate()?;
    let jobs: Vec<(usize, u64)> = cfg
        .n
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .map(|(n, t)| (n, trial_seed(cfg, t)))
        .collect();
    let records: Vec<TrialRecord> = jobs.par_iter().map(|&(n, s)| run_trial(n, cfg, s)).collect();
    let aggregates = cfg
        .n
        .iter()
        .enumerate()
        .map(|(i, &n)| aggregate(n, &records[i * cfg.trials..(i + 1) * cfg.trials]))
        .collect();
    Ok(ExperimentReport {
        config: cfg.clone(),
        records,
        aggregates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(family: Family, recovery: Algorithm, n: Vec<usize>, trials: usize) -> ExperimentConfig {
        ExperimentConfig {
            n,
            trials,
            family,
            recovery,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn trees_score_zero() {
        let r = run_experiment(&cfg(Family::Tree, Algorithm::Tree, vec![4, 9, 15], 10)).unwrap();
        assert_eq!(r.records.len(), 30);
        for rec in &r.records {
            assert_eq!(rec.edit_distance, Some(0), "{rec:?}");
            assert_eq!(rec.f_hamming, Some(0));
        }
        assert_eq!(r.aggregate(9).unwrap().mean_edit_distance, 0.0);
    }

    #[test]
    fn rings_score_zero() {
        let r = run_experiment(&cfg(Family::Ring, Algorithm::Ring, (5..=15).collect(), 5)).unwrap();
        assert!(r.records.iter().all(|x| x.edit_distance == Some(0)));
    }

    #[test]
    fn failures_are_recorded() {
        let r = run_experiment(&cfg(Family::Ring, Algorithm::Tree, vec![6], 3)).unwrap();
        assert_eq!(r.aggregates[0].failed, 3);
        assert!(r.records[0].error.as_deref().unwrap().contains("NotATree"));
        assert!(r.aggregates[0].mean_edit_distance.is_nan());
    }

    #[test]
    fn csv_without_timing_is_reproducible() {
        let c = cfg(Family::Random, Algorithm::General, vec![10, 12], 4);
        let write = || {
            let mut buf = Vec::new();
            run_experiment(&c).unwrap().write_csv(&mut buf, false).unwrap();
            String::from_utf8(buf).unwrap()
        };
        let a = write();
        assert_eq!(a, write());
        let mut lines = a.lines();
        assert_eq!(lines.next(), Some("n,seed,algorithm,edit_distance,f_hamming,runtime_ms"));
        assert_eq!(lines.count(), 8);
    }

    #[test]
    fn mean_and_std() {
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!((m, s), (2.0, 1.0));
    }
}
