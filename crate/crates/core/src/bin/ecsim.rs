use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use ecsim::adversary::SplitVariant;
use ecsim::analysis::{detect_nakamoto, run_cell, solve_threshold, summarize, SummaryRow};
use ecsim::config::ExperimentConfig;
use ecsim::io::{read_trace_csv, series_from_rows, write_report_json, write_summary_csv, write_trace_csv};
use ecsim::netsim::NetError;
use ecsim::{Cell, Trace};

#[derive(Parser)]
#[command(name = "ecsim", version, about = "Expected Consensus attack simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the master seed from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Caps the number of worker threads.
    #[arg(long)]
    jobs: Option<usize>,
    /// Writes one trace CSV per trial into this directory.
    #[arg(long, value_name = "DIR")]
    emit_traces: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Prints the security threshold beta* for `m` and a split variant.
    Threshold {
        #[arg(long)]
        m: f64,
        #[arg(long, default_value = "tiebreak")]
        variant: SplitVariant,
    },
    /// Runs the trials of a single-cell config and writes its summary row.
    Simulate(RunArgs),
    /// Runs every cell of a grid config and writes the summary table.
    Sweep(RunArgs),
    /// Reads a trace CSV and writes its Nakamoto epochs as JSON.
    DetectNakamoto {
        #[arg(long)]
        trace: PathBuf,
        /// Defaults to the last epoch of the trace.
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    /// Bad input: exit 1.
    Invalid(anyhow::Error),
    /// Broken invariant or failed write: exit 2.
    Internal(anyhow::Error),
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Invalid(e.into())
}

fn internal(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Internal(e.into())
}

fn net_failure(e: NetError) -> Failure {
    match e {
        NetError::BadConfig(_) => invalid(e),
        other => internal(other),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Threshold { m, variant } => {
            let beta = solve_threshold(m, variant).map_err(invalid)?;
            println!("{beta:.6}");
            Ok(())
        }
        Cmd::Simulate(args) => {
            let cfg = load(&args)?;
            let cells = cfg.cells();
            if cells.len() != 1 {
                return Err(invalid(anyhow!("simulate needs exactly one grid cell, the config has {}", cells.len())));
            }
            run_grid(&cfg, &cells, args.emit_traces.as_deref())
        }
        Cmd::Sweep(args) => {
            let cfg = load(&args)?;
            run_grid(&cfg, &cfg.cells(), args.emit_traces.as_deref())
        }
        Cmd::DetectNakamoto { trace, horizon, output } => {
            let text = std::fs::read_to_string(&trace)
                .with_context(|| format!("cannot read {}", trace.display()))
                .map_err(invalid)?;
            let rows = read_trace_csv(&text).map_err(invalid)?;
            let series = series_from_rows(&rows);
            let report = detect_nakamoto(&series, horizon.unwrap_or(rows.len() as u64)).map_err(invalid)?;
            with_output(output.as_deref(), |w| write_report_json(&report, w).map_err(Into::into))
        }
    }
}

fn load(args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&args.config).map_err(invalid)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if args.jobs.is_some() {
        cfg.jobs = args.jobs;
    }
    cfg.validate().map_err(invalid)?;
    Ok(cfg)
}

fn run_grid(cfg: &ExperimentConfig, cells: &[Cell], emit: Option<&Path>) -> Result<(), Failure> {
    if let Some(dir) = emit {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))
            .map_err(internal)?;
    }
    let mut rows: Vec<SummaryRow> = Vec::new();
    if cfg.trials > 0 {
        for cell in cells {
            let (outcomes, traces) = run_cell(cfg, cell, emit.is_some()).map_err(net_failure)?;
            if let Some(dir) = emit {
                for (i, t) in traces.iter().enumerate() {
                    write_trace_file(&dir.join(trace_name(cell, i)), t)?;
                }
            }
            rows.push(summarize(cell, &outcomes, cfg.epochs, cfg.seed));
        }
    }
    with_output(cfg.output.as_deref(), |w| write_summary_csv(&rows, w).map_err(Into::into))
}

fn trace_name(cell: &Cell, trial: usize) -> String {
    format!(
        "trace_m{}_beta{}_{}_{}_{trial:05}.csv",
        cell.m, cell.beta, cell.strategy, cell.mitigation
    )
}

fn write_trace_file(path: &Path, trace: &Trace) -> Result<(), Failure> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display())).map_err(internal)?;
    let mut w = BufWriter::new(f);
    write_trace_csv(trace, &mut w).map_err(internal)?;
    w.flush().map_err(internal)
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> Result<(), Failure> {
    let result = match path {
        Some(p) => {
            let file = File::create(p).with_context(|| format!("cannot create {}", p.display())).map_err(internal)?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|()| w.flush().map_err(Into::into))
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            f(&mut w).and_then(|()| w.flush().map_err(Into::into))
        }
    };
    result.map_err(internal)
}
