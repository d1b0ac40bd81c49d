use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use genbound::gaussian::{McSpec, QuadratureSpec};
use genbound_cli::discrete::run_discrete;
use genbound_cli::sweep::{parse_grid, run_sweep, SweepConfig, COLUMNS};
use genbound_cli::verify::{run_verify, Fault, Suite, VerifyConfig};
use genbound_cli::{svg, CliError, Result};

/// Expected generalization error and its information-measure upper bounds.
///
/// Without `--verify` or `--learner`, sweeps the two-sample Gaussian
/// mean-estimation example over `t` and writes one CSV row per grid point.
#[derive(Debug, Parser)]
#[command(name = "genbound", version)]
struct Args {
    /// Standard deviation of the data.
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,

    /// Truncation level of the squared loss.
    #[arg(long, default_value_t = 2.0)]
    c: f64,

    /// Grid of estimator weights: `a,b,c` or `start:stop:count`.
    #[arg(long, default_value = "0.01:0.99:99")]
    t_grid: String,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Monte Carlo draws per grid point.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,

    /// Quadrature points per axis (odd).
    #[arg(long, default_value_t = 1201)]
    quad_points: usize,

    /// Output file (CSV for the sweep, JSON otherwise); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also write an SVG chart of the sweep.
    #[arg(long)]
    svg: Option<PathBuf>,

    /// Comma-separated columns to compute and plot.
    #[arg(long, value_delimiter = ',')]
    bounds: Option<Vec<String>>,

    /// Run a verification suite: discrete, gaussian or all.
    #[arg(long, conflicts_with_all = ["learner", "svg"])]
    verify: Option<String>,

    /// Random instances per verification suite.
    #[arg(long, default_value_t = 100, requires = "verify")]
    count: usize,

    /// Corrupt the average-joint TV bound by this factor (suite self-test).
    #[arg(long, hide = true, requires = "verify")]
    fault_tv_scale: Option<f64>,

    /// Learner JSON for a discrete report.
    #[arg(long, requires = "loss", conflicts_with = "svg")]
    learner: Option<PathBuf>,

    /// Loss JSON for a discrete report.
    #[arg(long, requires = "learner")]
    loss: Option<PathBuf>,

    /// Worker threads.
    #[arg(long)]
    jobs: Option<usize>,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn run(args: Args) -> Result<()> {
    if let Some(suite) = &args.verify {
        let mut cfg = VerifyConfig::new(suite.parse::<Suite>()?, args.seed, args.count);
        cfg.quad = QuadratureSpec::with_points(args.quad_points);
        cfg.quad.validate().map_err(|e| CliError::Config(e.to_string()))?;
        cfg.fault = args.fault_tv_scale.map(Fault::ScaleAvgTv);
        let report = run_verify(&cfg);
        write_out(args.out.as_deref(), &to_json(&report))?;
        if !report.passed() {
            return Err(CliError::Verification(report.failures().join(", ")));
        }
        return Ok(());
    }

    if let (Some(learner), Some(loss)) = (&args.learner, &args.loss) {
        let report = run_discrete(learner, loss)?;
        return write_out(args.out.as_deref(), &to_json(&report));
    }

    let cfg = SweepConfig {
        sigma: args.sigma,
        c: args.c,
        t_grid: parse_grid(&args.t_grid)?,
        mc: McSpec { n_samples: args.samples, seed: args.seed },
        quad: QuadratureSpec::with_points(args.quad_points),
        columns: args
            .bounds
            .unwrap_or_else(|| COLUMNS.iter().map(|(c, _)| c.to_string()).collect()),
        jobs: args.jobs,
    };
    let sweep = run_sweep(&cfg)?;
    write_out(args.out.as_deref(), &sweep.csv())?;
    if let Some(path) = &args.svg {
        let text = svg::render(&sweep.rows, &cfg.columns);
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    }
    if !sweep.failed.is_empty() {
        let ts: Vec<String> = sweep.failed.iter().map(|&i| cfg.t_grid[i].to_string()).collect();
        return Err(CliError::Numeric(format!("rows failed at t = {}", ts.join(", "))));
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    let level = match args.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    // configured from flags only, never from the environment
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("genbound: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
