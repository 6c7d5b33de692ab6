//! Command-line workbench: complexity analysis, seeded simulations, named
//! scenarios, and a standalone covering-LP solver.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use fgb::algo::AlgoConfig;
use fgb::complexity::{analyze, clipped_instance};
use fgb::env::Instance;
use fgb::graph::{generate, FeedbackGraph, GraphSpec};
use fgb::harness::{
    chart_description, emit, run_experiment, scenario, to_csv, Algorithm, EmitFormat,
    ExperimentConfig, ScenarioParams, SCENARIO_NAMES,
};
use fgb::lp::{solve_covering_lp, weak_duality_gap, CoverRow, CoveringLp, DEFAULT_TOL};
use fgb::Error;

#[derive(Parser)]
#[command(
    name = "fgb",
    about = "Workbench for stochastic bandits with feedback graphs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the complexity report of a (graph, instance) pair.
    Analyze(AnalyzeArgs),
    /// Run a replicated experiment and emit regret curves.
    Simulate(SimulateArgs),
    /// Run a named preset end to end.
    Scenario(ScenarioArgs),
    /// Solve a covering LP from a JSON file and print the certificate.
    Lp(LpArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Graph: generator spec like `star:5`, `er:12,0.3,7`, or a JSON file.
    #[arg(long)]
    graph: String,
    /// Instance: comma-separated means like `0.6,0.5` (append `@sigma` to
    /// override the noise scale), or a JSON file.
    #[arg(long)]
    instance: String,
    /// Round gaps down to powers of two before analyzing.
    #[arg(long)]
    clip_gaps: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config file; explicit flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<String>,
    #[arg(long)]
    instance: Option<String>,
    /// Algorithm: phased_lp or ucbn.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long, short = 'T', name = "T")]
    horizon: Option<u64>,
    #[arg(long)]
    replicates: Option<u32>,
    /// Master seed; replicate seeds are derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    clip_gaps: bool,
    /// Confidence exponent; defaults follow the selected profile.
    #[arg(long)]
    alpha: Option<f64>,
    /// Constraint multiplier; defaults follow the selected profile.
    #[arg(long)]
    alpha_prime: Option<f64>,
    /// Worker threads (default: FGB_WORKERS or all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Constant profile: paper (theoretical) or demo (desk scale).
    #[arg(long)]
    profile: Option<String>,
    /// Scenario label echoed into outputs.
    #[arg(long)]
    label: Option<String>,
}

#[derive(Args)]
struct ScenarioArgs {
    /// One of: example1_star, example2_starlike, reinforced_wheel, cube_a,
    /// cube_b.
    name: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    delta_max: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, short = 'T', name = "T")]
    horizon: Option<u64>,
    #[arg(long)]
    replicates: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Write the JSON bundle here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write per-algorithm CSVs and a chart description next to `out`.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct LpArgs {
    /// JSON file: {"costs": [...], "rows": [{"support": [...],
    /// "threshold": ...}, ...]}.
    file: PathBuf,
    /// Relative tolerance for the certificate check.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

/// Fields of the simulate config file; all optional, flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    graph: Option<String>,
    instance: Option<String>,
    algo: Option<String>,
    #[serde(rename = "T")]
    horizon: Option<u64>,
    replicates: Option<u32>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<String>,
    clip_gaps: Option<bool>,
    alpha: Option<f64>,
    alpha_prime: Option<f64>,
    workers: Option<usize>,
    profile: Option<String>,
    label: Option<String>,
    grid: Option<Vec<u64>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Scenario(args) => cmd_scenario(args),
        Command::Lp(args) => cmd_lp(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let config_error = matches!(
                e,
                Error::Config { .. }
                    | Error::Parameter { .. }
                    | Error::InvalidGraph(_)
                    | Error::Json(_)
            );
            ExitCode::from(if config_error { 2 } else { 3 })
        }
    }
}

fn load_graph(arg: &str) -> Result<FeedbackGraph, Error> {
    if Path::new(arg).exists() {
        FeedbackGraph::from_json(&std::fs::read_to_string(arg)?)
    } else {
        generate(&GraphSpec::parse(arg)?)
    }
}

fn load_instance(arg: &str) -> Result<Instance, Error> {
    if Path::new(arg).exists() {
        return Instance::from_json(&std::fs::read_to_string(arg)?);
    }
    let (means_part, sigma) = match arg.split_once('@') {
        Some((m, s)) => {
            let sigma: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::config("instance", format!("bad sigma `{s}`")))?;
            (m, Some(sigma))
        }
        None => (arg, None),
    };
    let means: Result<Vec<f64>, _> = means_part
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect();
    let means =
        means.map_err(|_| Error::config("instance", format!("cannot parse means `{arg}`")))?;
    match sigma {
        Some(s) => Instance::with_sigma(means, s),
        None => Instance::new(means),
    }
}

fn write_or_print(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(())
        }
        None => {
            println!("{}", text.trim_end());
            Ok(())
        }
    }
}

fn resolve_workers(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("FGB_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn build_algo_config(
    profile: Option<&str>,
    horizon: u64,
    alpha: Option<f64>,
    alpha_prime: Option<f64>,
    clip_gaps: bool,
) -> Result<AlgoConfig, Error> {
    let mut cfg = match profile.unwrap_or("paper") {
        "paper" => AlgoConfig::paper(horizon),
        "demo" => AlgoConfig::demo(horizon),
        other => {
            return Err(Error::config(
                "profile",
                format!("unknown profile `{other}` (paper, demo)"),
            ))
        }
    };
    if let Some(a) = alpha {
        cfg.alpha = a;
    }
    if let Some(ap) = alpha_prime {
        cfg.alpha_prime = ap;
    }
    cfg.clip_gaps = clip_gaps;
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<(), Error> {
    let graph = load_graph(&args.graph)?;
    let mut instance = load_instance(&args.instance)?;
    if args.clip_gaps {
        instance = clipped_instance(&instance)?;
    }
    let report = analyze(&graph, &instance)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_or_print(&text, args.out.as_ref())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), Error> {
    let file: ConfigFile = match &args.config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(path)?)?,
        None => ConfigFile::default(),
    };
    let graph_arg = args
        .graph
        .or(file.graph)
        .ok_or_else(|| Error::config("graph", "missing (flag or config file)"))?;
    let instance_arg = args
        .instance
        .or(file.instance)
        .ok_or_else(|| Error::config("instance", "missing (flag or config file)"))?;
    let algorithm =
        Algorithm::from_str(args.algo.or(file.algo).as_deref().unwrap_or("phased_lp"))?;
    let horizon = args.horizon.or(file.horizon).unwrap_or(10_000);
    let algo = build_algo_config(
        args.profile.or(file.profile).as_deref(),
        horizon,
        args.alpha.or(file.alpha),
        args.alpha_prime.or(file.alpha_prime),
        args.clip_gaps || file.clip_gaps.unwrap_or(false),
    )?;
    let cfg = ExperimentConfig {
        label: args.label.or(file.label).unwrap_or_else(|| "custom".into()),
        graph: load_graph(&graph_arg)?,
        instance: load_instance(&instance_arg)?,
        algorithm,
        algo,
        replicates: args.replicates.or(file.replicates).unwrap_or(10),
        master_seed: args.seed.or(file.seed).unwrap_or(0),
        experiment_id: 0,
        grid: file.grid.unwrap_or_default(),
        workers: resolve_workers(args.workers.or(file.workers)),
    };
    let result = run_experiment(&cfg)?;
    let format = match args.format.or(file.format) {
        Some(f) => EmitFormat::from_str(&f)?,
        None => EmitFormat::Csv,
    };
    let out = args.out.or(file.out);
    match out {
        Some(path) => emit(&result, format, &path),
        None => match format {
            EmitFormat::Csv => write_or_print(&to_csv(&result), None),
            EmitFormat::Json => write_or_print(&serde_json::to_string_pretty(&result)?, None),
        },
    }
}

fn cmd_scenario(args: ScenarioArgs) -> Result<(), Error> {
    if !SCENARIO_NAMES.contains(&args.name.as_str()) {
        return Err(Error::config(
            "scenario",
            format!("unknown scenario `{}`", args.name),
        ));
    }
    let defaults = ScenarioParams::default();
    let params = ScenarioParams {
        k: args.k.unwrap_or(defaults.k),
        n: args.n.unwrap_or(defaults.n),
        delta: args.delta.unwrap_or(defaults.delta),
        delta_max: args.delta_max.unwrap_or(defaults.delta_max),
        epsilon: args.epsilon.unwrap_or(defaults.epsilon),
        nu: args.nu.unwrap_or(defaults.nu),
        horizon: args.horizon.unwrap_or(defaults.horizon),
        replicates: args.replicates.unwrap_or(defaults.replicates),
        master_seed: args.seed.unwrap_or(defaults.master_seed),
        paper_profile: match args.profile.as_deref() {
            None | Some("demo") => false,
            Some("paper") => true,
            Some(other) => {
                return Err(Error::config(
                    "profile",
                    format!("unknown profile `{other}` (paper, demo)"),
                ))
            }
        },
        workers: resolve_workers(args.workers),
    };
    let bundle = scenario(&args.name, &params)?;
    if args.csv {
        let base = args
            .out
            .clone()
            .ok_or_else(|| Error::config("csv", "--csv requires --out"))?;
        let stem = base.with_extension("");
        for result in &bundle.results {
            let csv_path = stem.with_extension(format!("{}.csv", result.algo));
            emit(result, EmitFormat::Csv, &csv_path)?;
            let chart = chart_description(&csv_path.to_string_lossy());
            let chart_path = stem.with_extension(format!("{}.chart.json", result.algo));
            std::fs::write(&chart_path, format!("{:#}\n", chart))?;
        }
    }
    let mut text = serde_json::to_string_pretty(&bundle)?;
    text.push('\n');
    write_or_print(&text, args.out.as_ref())
}

#[derive(Deserialize)]
struct LpFile {
    costs: Vec<f64>,
    rows: Vec<CoverRow>,
}

fn cmd_lp(args: LpArgs) -> Result<(), Error> {
    let file: LpFile = serde_json::from_str(&std::fs::read_to_string(&args.file)?)?;
    let lp = CoveringLp::new(file.costs, file.rows)?;
    let sol = solve_covering_lp(&lp, args.tol)?;
    let gap = weak_duality_gap(&lp, &sol)?;
    let report = serde_json::json!({
        "value": sol.value,
        "dual_value": sol.dual_value,
        "duality_gap": gap,
        "status": sol.status,
        "primal": sol.primal,
        "dual": sol.dual,
    });
    write_or_print(&format!("{:#}\n", report), None)
}
