//! Experiment orchestration: replicated seeded runs, aggregation on a
//! geometric recording grid, scenario presets, and CSV/JSON emission.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algo::{run_algorithm, run_ucbn, AlgoConfig, RegretTrace};
use crate::complexity::{analyze, cube_scenario_table, ComplexityReport, CubeTable};
use crate::env::{derive_seed, paper_instance, Instance, PaperInstance};
use crate::error::{Error, Result};
use crate::graph::{generate, FeedbackGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    PhasedLp,
    Ucbn,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::PhasedLp => "phased_lp",
            Algorithm::Ucbn => "ucbn",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phased_lp" => Ok(Algorithm::PhasedLp),
            "ucbn" => Ok(Algorithm::Ucbn),
            other => Err(Error::config(
                "algo",
                format!("unknown algorithm `{other}` (phased_lp, ucbn)"),
            )),
        }
    }
}

/// A fully resolved experiment: graph and instance already loaded.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Label echoed into the output's `scenario` column.
    pub label: String,
    pub graph: FeedbackGraph,
    pub instance: Instance,
    pub algorithm: Algorithm,
    pub algo: AlgoConfig,
    pub replicates: u32,
    pub master_seed: u64,
    /// Distinguishes seed streams of experiments sharing a master seed.
    pub experiment_id: u64,
    /// Round indices to record; empty means the default geometric grid.
    pub grid: Vec<u64>,
    /// Worker threads; 0 uses the global rayon default.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 1 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        if self.graph.vertex_count() != self.instance.arm_count() {
            return Err(Error::config("instance", "arm count must match the graph"));
        }
        self.algo
            .validate()
            .map_err(|e| Error::config("algo", e.to_string()))?;
        if self
            .grid
            .iter()
            .any(|&t| t < 1 || t > self.algo.horizon)
        {
            return Err(Error::config("grid", "points must lie in [1, T]"));
        }
        Ok(())
    }
}

/// Powers of 1.25 rounded to integers, deduplicated, always ending at `t`.
pub fn default_grid(t: u64) -> Vec<u64> {
    let mut grid = Vec::new();
    let mut x = 1.0f64;
    while x < t as f64 {
        grid.push(x.round() as u64);
        x *= 1.25;
    }
    grid.push(t);
    grid.dedup();
    grid
}

/// Replicate means and spreads of cumulative pseudo-regret on the grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateResult {
    pub scenario: String,
    pub algo: String,
    pub replicates: u32,
    pub master_seed: u64,
    pub horizon: u64,
    pub grid: Vec<u64>,
    pub regret_mean: Vec<f64>,
    /// Sample standard deviation (n-1 denominator; 0 for a single replicate).
    pub regret_std: Vec<f64>,
    /// Final regret of each replicate, in replicate order.
    pub final_regret: Vec<f64>,
    /// Full traces, replicate order; not serialized.
    #[serde(skip)]
    pub traces: Vec<RegretTrace>,
}

/// Runs all replicates (in parallel when workers allow) and aggregates on
/// the grid. Deterministic: replicate `r` always uses the same derived seed
/// and aggregation joins by replicate index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<AggregateResult> {
    cfg.validate()?;
    let run_one = |r: u32| -> Result<RegretTrace> {
        let seed = derive_seed(cfg.master_seed, cfg.experiment_id, r as u64);
        match cfg.algorithm {
            Algorithm::PhasedLp => run_algorithm(&cfg.graph, &cfg.instance, &cfg.algo, seed),
            Algorithm::Ucbn => run_ucbn(&cfg.graph, &cfg.instance, cfg.algo.horizon, seed),
        }
    };
    let reps: Vec<u32> = (0..cfg.replicates).collect();
    let traces: Result<Vec<RegretTrace>> = if cfg.workers > 0 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::State(e.to_string()))?;
        pool.install(|| reps.par_iter().map(|&r| run_one(r)).collect())
    } else {
        reps.par_iter().map(|&r| run_one(r)).collect()
    };
    let traces = traces?;

    let grid = if cfg.grid.is_empty() {
        default_grid(cfg.algo.horizon)
    } else {
        cfg.grid.clone()
    };
    let n = traces.len() as f64;
    let mut regret_mean = Vec::with_capacity(grid.len());
    let mut regret_std = Vec::with_capacity(grid.len());
    for &t in &grid {
        let values: Vec<f64> = traces.iter().map(|tr| tr.regret_at(t)).collect();
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            (ss / (n - 1.0)).sqrt()
        };
        regret_mean.push(mean);
        regret_std.push(std);
    }

    Ok(AggregateResult {
        scenario: cfg.label.clone(),
        algo: cfg.algorithm.to_string(),
        replicates: cfg.replicates,
        master_seed: cfg.master_seed,
        horizon: cfg.algo.horizon,
        grid,
        regret_mean,
        regret_std,
        final_regret: traces.iter().map(|t| t.final_regret).collect(),
        traces,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmitFormat {
    Csv,
    Json,
}

impl FromStr for EmitFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(EmitFormat::Csv),
            "json" => Ok(EmitFormat::Json),
            other => Err(Error::config(
                "format",
                format!("unknown format `{other}` (csv, json)"),
            )),
        }
    }
}

fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Renders the aggregate as CSV text, one row per grid point.
pub fn to_csv(result: &AggregateResult) -> String {
    let mut out = String::from("t,regret_mean,regret_std,algo,scenario,replicates,master_seed\n");
    for ((t, mean), std) in result
        .grid
        .iter()
        .zip(&result.regret_mean)
        .zip(&result.regret_std)
    {
        out.push_str(&format!(
            "{t},{},{},{},{},{},{}\n",
            sig17(*mean),
            sig17(*std),
            result.algo,
            result.scenario,
            result.replicates,
            result.master_seed
        ));
    }
    out
}

/// Writes the aggregate to `path` in the requested format.
pub fn emit(result: &AggregateResult, format: EmitFormat, path: &Path) -> Result<()> {
    let text = match format {
        EmitFormat::Csv => to_csv(result),
        EmitFormat::Json => {
            let mut t = serde_json::to_string_pretty(result)?;
            t.push('\n');
            t
        }
    };
    std::fs::write(path, text)?;
    Ok(())
}

/// Declarative plotting hint: which CSV columns mean what. Rendering is up
/// to external tooling.
pub fn chart_description(csv_path: &str) -> serde_json::Value {
    serde_json::json!({
        "data": csv_path,
        "x": "t",
        "y": "regret_mean",
        "error": "regret_std",
        "series": "algo",
        "x_scale": "log",
        "y_scale": "log",
    })
}

/// Desk-scale scenario knobs; every field has a default that finishes fast.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub k: usize,
    pub n: usize,
    pub delta: f64,
    pub delta_max: f64,
    pub epsilon: f64,
    pub nu: f64,
    pub horizon: u64,
    pub replicates: u32,
    pub master_seed: u64,
    /// true: theoretical constants; false: demo profile.
    pub paper_profile: bool,
    pub workers: usize,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            k: 16,
            n: 10,
            delta: 0.1,
            delta_max: 0.3,
            epsilon: 0.1,
            nu: 0.9,
            horizon: 20_000,
            replicates: 10,
            master_seed: 1,
            paper_profile: false,
            workers: 0,
        }
    }
}

/// Complexity report plus regret curves for both algorithms; cube scenarios
/// also carry the closed-form table.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioBundle {
    pub name: String,
    pub report: ComplexityReport,
    pub cube_table: Option<CubeTable>,
    pub results: Vec<AggregateResult>,
}

pub const SCENARIO_NAMES: [&str; 5] = [
    "example1_star",
    "example2_starlike",
    "reinforced_wheel",
    "cube_a",
    "cube_b",
];

/// Builds a named construction, analyzes it, and runs both algorithms on it.
pub fn scenario(name: &str, p: &ScenarioParams) -> Result<ScenarioBundle> {
    let which = match name {
        "example1_star" => PaperInstance::Example1Star {
            k: p.k,
            delta: p.delta,
            seed: p.master_seed,
        },
        "example2_starlike" => PaperInstance::Example2StarLike {
            k: p.k,
            delta_min: p.delta,
            delta_max: p.delta_max,
        },
        "reinforced_wheel" => PaperInstance::ReinforcedWheelBase {
            k: p.k,
            nu: p.nu,
            delta: p.delta,
        },
        "cube_a" => PaperInstance::CubeEnvA {
            n: p.n,
            delta: p.delta,
            seed: p.master_seed,
        },
        "cube_b" => PaperInstance::CubeEnvB {
            n: p.n,
            delta: p.delta,
            epsilon: p.epsilon,
            seed: p.master_seed,
        },
        other => {
            return Err(Error::config(
                "scenario",
                format!("unknown scenario `{other}` (expected one of {SCENARIO_NAMES:?})"),
            ))
        }
    };
    let (spec, instance) = paper_instance(&which)?;
    let graph = generate(&spec)?;
    let report = analyze(&graph, &instance)?;
    let cube_table = match name {
        "cube_a" | "cube_b" => Some(cube_scenario_table(p.n, p.delta, p.epsilon)?),
        _ => None,
    };
    let algo = if p.paper_profile {
        AlgoConfig::paper(p.horizon)
    } else {
        AlgoConfig::demo(p.horizon)
    };
    let mut results = Vec::new();
    for (id, algorithm) in [(0u64, Algorithm::PhasedLp), (1u64, Algorithm::Ucbn)] {
        let cfg = ExperimentConfig {
            label: name.to_string(),
            graph: graph.clone(),
            instance: instance.clone(),
            algorithm,
            algo,
            replicates: p.replicates,
            master_seed: p.master_seed,
            experiment_id: id,
            grid: Vec::new(),
            workers: p.workers,
        };
        results.push(run_experiment(&cfg)?);
    }
    Ok(ScenarioBundle {
        name: name.to_string(),
        report,
        cube_table,
        results,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSpec;

    fn small_cfg(algorithm: Algorithm, workers: usize) -> ExperimentConfig {
        ExperimentConfig {
            label: "unit".into(),
            graph: generate(&GraphSpec::Star { k: 4 }).unwrap(),
            instance: Instance::new(vec![0.5, 0.6, 0.5, 0.5]).unwrap(),
            algorithm,
            algo: AlgoConfig::demo(2_000),
            replicates: 4,
            master_seed: 9,
            experiment_id: 0,
            grid: Vec::new(),
            workers,
        }
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid(1_000);
        assert_eq!(g.first(), Some(&1));
        assert_eq!(g.last(), Some(&1_000));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(default_grid(1), vec![1]);
    }

    #[test]
    fn single_replicate_mean_is_trace() {
        let mut cfg = small_cfg(Algorithm::PhasedLp, 1);
        cfg.replicates = 1;
        let agg = run_experiment(&cfg).unwrap();
        assert!(agg.regret_std.iter().all(|s| *s == 0.0));
        let trace = &agg.traces[0];
        for (t, m) in agg.grid.iter().zip(&agg.regret_mean) {
            assert_eq!(*m, trace.regret_at(*t));
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let serial = run_experiment(&small_cfg(Algorithm::PhasedLp, 1)).unwrap();
        let parallel = run_experiment(&small_cfg(Algorithm::PhasedLp, 4)).unwrap();
        assert_eq!(serial.regret_mean, parallel.regret_mean);
        assert_eq!(serial.regret_std, parallel.regret_std);
        assert_eq!(serial.final_regret, parallel.final_regret);
    }

    #[test]
    fn all_optimal_instance_zero_columns() {
        let mut cfg = small_cfg(Algorithm::Ucbn, 1);
        cfg.instance = Instance::new(vec![0.5; 4]).unwrap();
        let agg = run_experiment(&cfg).unwrap();
        assert!(agg.regret_mean.iter().all(|v| *v == 0.0));
        assert!(agg.regret_std.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mean_within_replicate_range() {
        let agg = run_experiment(&small_cfg(Algorithm::PhasedLp, 0)).unwrap();
        for (i, &t) in agg.grid.iter().enumerate() {
            let vals: Vec<f64> = agg.traces.iter().map(|tr| tr.regret_at(t)).collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(agg.regret_mean[i] >= lo - 1e-9 && agg.regret_mean[i] <= hi + 1e-9);
        }
    }

    #[test]
    fn csv_layout_and_determinism() {
        let agg = run_experiment(&small_cfg(Algorithm::PhasedLp, 1)).unwrap();
        let csv = to_csv(&agg);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,regret_mean,regret_std,algo,scenario,replicates,master_seed"
        );
        let first = lines.next().unwrap();
        assert!(first.starts_with("1,"));
        assert!(first.ends_with(",phased_lp,unit,4,9"));
        assert_eq!(csv.lines().count(), agg.grid.len() + 1);

        let again = run_experiment(&small_cfg(Algorithm::PhasedLp, 1)).unwrap();
        assert_eq!(csv, to_csv(&again));
    }

    #[test]
    fn emit_round_trip() {
        let agg = run_experiment(&small_cfg(Algorithm::Ucbn, 1)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let json_path = dir.path().join("out.json");
        emit(&agg, EmitFormat::Json, &json_path).unwrap();
        let text = std::fs::read_to_string(&json_path).unwrap();
        let back: AggregateResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back.regret_mean, agg.regret_mean);
        assert_eq!(back.scenario, agg.scenario);

        let csv_path = dir.path().join("out.csv");
        emit(&agg, EmitFormat::Csv, &csv_path).unwrap();
        emit(&agg, EmitFormat::Csv, &csv_path).unwrap();
        assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), to_csv(&agg));
    }

    #[test]
    fn config_validation() {
        let mut cfg = small_cfg(Algorithm::PhasedLp, 1);
        cfg.replicates = 0;
        assert!(matches!(
            run_experiment(&cfg),
            Err(Error::Config { .. })
        ));
        let mut cfg = small_cfg(Algorithm::PhasedLp, 1);
        cfg.grid = vec![0];
        assert!(run_experiment(&cfg).is_err());
        let mut cfg = small_cfg(Algorithm::PhasedLp, 1);
        cfg.grid = vec![5_000];
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn scenario_smoke() {
        let p = ScenarioParams {
            k: 8,
            horizon: 2_000,
            replicates: 2,
            workers: 1,
            ..Default::default()
        };
        let bundle = scenario("example1_star", &p).unwrap();
        assert_eq!(bundle.results.len(), 2);
        assert!(bundle.cube_table.is_none());
        assert!(bundle.report.c_star > 0.0);

        let cube = scenario(
            "cube_a",
            &ScenarioParams {
                n: 2,
                horizon: 1_000,
                replicates: 2,
                workers: 1,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(cube.cube_table.is_some());

        assert!(scenario("nope", &p).is_err());
    }
}
