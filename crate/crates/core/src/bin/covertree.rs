use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use covertree::report::{
    emit_plot, init_workers, run, Command, GeneratorSpec, PlotKind, RunConfig, RunError, RunOutcome,
};

/// Covering-tree Green functions, bands and eigenvector delocalization checks.
#[derive(Debug, Parser)]
#[command(name = "covertree", version, allow_negative_numbers = true)]
struct Cli {
    /// Worker threads (COVERTREE_WORKERS takes precedence).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args)]
struct Solver {
    /// Energy grid step of the band scan.
    #[arg(long, default_value_t = 0.005)]
    grid_step: f64,
    /// Smallest η of the continuation ladder.
    #[arg(long, default_value_t = 1e-9)]
    eta_min: f64,
    /// Largest η of the continuation ladder.
    #[arg(long, default_value_t = 0.1)]
    eta_start: f64,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Band structure of the cover.
    Bands {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Delocalization parameters at one bulk energy.
    Metrics {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        lambda: f64,
        /// Moment exponents, all > 1.
        #[arg(long, value_delimiter = ',', default_values_t = [1.25, 1.5, 2.0, 3.0])]
        s: Vec<f64>,
        /// Largest path length and kernel order.
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Classify every eigenpair and check the delocalization bounds.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        /// p-norm exponents, all > 4.
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 6.0, 8.0])]
        p: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        rotations: usize,
        #[arg(long, default_value_t = 1e-7)]
        support_tol: f64,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        report: Option<PathBuf>,
        /// CSV with one row per eigenpair.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Eigenvector bounds on an N-cycle with periodic potential.
    Cycle {
        #[arg(long)]
        n: usize,
        /// Potential pattern, tiled to length n.
        #[arg(long, value_delimiter = ',', default_values_t = [0.0])]
        w: Vec<f64>,
        #[arg(long)]
        period: Option<usize>,
        /// Also compare the cover bands with the monodromy bands.
        #[arg(long)]
        compare_bands: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Verify random lifts of a base graph for several orders.
    LiftSweep {
        #[arg(long)]
        base: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 6.0, 8.0])]
        p: Vec<f64>,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        report: Option<PathBuf>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Resolvent decay at energies off the spectrum.
    CtCheck {
        #[arg(long)]
        graph: PathBuf,
        /// Gap energies; three are chosen automatically when absent.
        #[arg(long, value_delimiter = ',')]
        lambda: Vec<f64>,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[command(flatten)]
        solver: Solver,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Plot table from a report.
    EmitPlot {
        #[arg(long)]
        report: PathBuf,
        /// supnorm-vs-ell, ct-decay, kernel-mass or margin-vs-lambda.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a generated graph as JSON.
    Generate {
        #[arg(long, value_enum)]
        kind: GenKind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        w: Vec<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        base: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a JSON run configuration.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GenKind {
    Cycle,
    Complete,
    Petersen,
    Wheel,
    Localized,
    Lift,
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn write_or_print(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn apply_solver(cfg: &mut RunConfig, s: &Solver) {
    cfg.grid_step = s.grid_step;
    cfg.eta_min = s.eta_min;
    cfg.eta_start = s.eta_start;
}

/// Builds the run configuration; `None` for commands that are not runs.
fn config_of(cmd: &Cmd, workers: Option<usize>) -> Result<Option<(RunConfig, Option<PathBuf>)>, String> {
    let mut cfg = RunConfig {
        workers,
        ..RunConfig::default()
    };
    let mut table_out = None;
    match cmd {
        Cmd::Bands { graph, solver, report } => {
            cfg.command = Some(Command::Bands);
            cfg.graph = Some(graph.clone());
            apply_solver(&mut cfg, solver);
            cfg.report = report.clone();
        }
        Cmd::Metrics { graph, lambda, s, n_max, solver, report } => {
            cfg.command = Some(Command::Metrics);
            cfg.graph = Some(graph.clone());
            cfg.lambda = vec![*lambda];
            cfg.s = s.clone();
            cfg.n_max = *n_max;
            apply_solver(&mut cfg, solver);
            cfg.report = report.clone();
        }
        Cmd::Verify { graph, p, seed, rotations, support_tol, solver, report, summary } => {
            cfg.command = Some(Command::Verify);
            cfg.graph = Some(graph.clone());
            cfg.p = p.clone();
            cfg.seed = *seed;
            cfg.rotations = *rotations;
            cfg.support_tol = *support_tol;
            apply_solver(&mut cfg, solver);
            cfg.report = report.clone();
            cfg.summary = summary.clone();
            table_out = summary.clone();
        }
        Cmd::Cycle { n, w, period, compare_bands, seed, solver, report } => {
            cfg.command = Some(Command::Cycle);
            cfg.cycle_n = Some(*n);
            cfg.cycle_w = w.clone();
            cfg.period = *period;
            cfg.compare_bands = *compare_bands;
            cfg.seed = *seed;
            apply_solver(&mut cfg, solver);
            cfg.report = report.clone();
        }
        Cmd::LiftSweep { base, n, seed, p, solver, report, csv } => {
            cfg.command = Some(Command::LiftSweep);
            cfg.base = Some(base.clone());
            cfg.lift_orders = n.clone();
            cfg.seed = *seed;
            cfg.p = p.clone();
            apply_solver(&mut cfg, solver);
            cfg.report = report.clone();
            cfg.summary = csv.clone();
            table_out = csv.clone();
        }
        Cmd::CtCheck { graph, lambda, n_max, solver, report } => {
            cfg.command = Some(Command::CtCheck);
            cfg.graph = Some(graph.clone());
            cfg.lambda = lambda.clone();
            cfg.n_max = *n_max;
            apply_solver(&mut cfg, solver);
            cfg.report = report.clone();
        }
        Cmd::Run { config } => {
            cfg = RunConfig::read_json(config).map_err(|e| format!("{}: {e}", config.display()))?;
            if cfg.workers.is_none() {
                cfg.workers = workers;
            }
            table_out = cfg.summary.clone();
        }
        Cmd::EmitPlot { .. } | Cmd::Generate { .. } => return Ok(None),
    }
    Ok(Some((cfg, table_out)))
}

fn generator_of(kind: GenKind, n: Option<usize>, w: &[f64], m: Option<usize>, base: Option<&PathBuf>, seed: u64) -> Result<GeneratorSpec, String> {
    let need_n = || n.ok_or_else(|| "--n is required for this kind".to_string());
    Ok(match kind {
        GenKind::Cycle => GeneratorSpec::Cycle { n: need_n()?, w: w.to_vec() },
        GenKind::Complete => GeneratorSpec::Complete { n: need_n()?, w: w.to_vec() },
        GenKind::Petersen => GeneratorSpec::Petersen { w: w.to_vec() },
        GenKind::Wheel => GeneratorSpec::Wheel { w: w.to_vec() },
        GenKind::Localized => GeneratorSpec::Localized {
            m: m.ok_or("--m is required for the localized example")?,
        },
        GenKind::Lift => GeneratorSpec::Lift {
            base: base.cloned().ok_or("--base is required for a lift")?,
            n: need_n()?,
            seed,
        },
    })
}

fn finish(outcome: RunOutcome, cfg: &RunConfig, table_out: Option<PathBuf>) -> ExitCode {
    let RunOutcome { report, table } = outcome;
    let lift_sweep = cfg.command == Some(Command::LiftSweep);
    let written = (|| -> std::io::Result<()> {
        if cfg.report.is_some() || !lift_sweep {
            write_or_print(cfg.report.as_deref(), &report.to_json())?;
        }
        if let Some(t) = table {
            if table_out.is_some() || lift_sweep {
                write_or_print(table_out.as_deref(), &t)?;
            }
        }
        Ok(())
    })();
    if let Err(e) = written {
        return usage(e);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        let list = json!({ "passed": false, "failures": report.failures });
        eprintln!("{list}");
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Cmd::EmitPlot { report, kind, out } => {
            let kind: PlotKind = match kind.parse() {
                Ok(k) => k,
                Err(e) => return usage(e),
            };
            let text = match std::fs::read_to_string(report) {
                Ok(t) => t,
                Err(e) => return usage(format!("{}: {e}", report.display())),
            };
            let value: serde_json::Value = match serde_json::from_str(&text) {
                Ok(v) => v,
                Err(e) => return usage(format!("{}: {e}", report.display())),
            };
            match emit_plot(&value, kind).map(|t| write_or_print(out.as_deref(), &t)) {
                Ok(Ok(())) => ExitCode::SUCCESS,
                Ok(Err(e)) => usage(e),
                Err(e) => usage(e),
            }
        }
        Cmd::Generate { kind, n, w, m, base, seed, out } => {
            let spec = match generator_of(*kind, *n, w, *m, base.as_ref(), *seed) {
                Ok(s) => s,
                Err(e) => return usage(e),
            };
            match spec.build() {
                Ok(g) => match write_or_print(out.as_deref(), &(g.to_json() + "\n")) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => usage(e),
                },
                Err(e) => usage(e),
            }
        }
        cmd => {
            let (cfg, table_out) = match config_of(cmd, cli.workers) {
                Ok(Some(c)) => c,
                Ok(None) => unreachable!("handled above"),
                Err(e) => return usage(e),
            };
            if let Err(e) = init_workers(cfg.workers) {
                return usage(e);
            }
            match run(&cfg) {
                Ok(outcome) => finish(outcome, &cfg, table_out),
                Err(RunError::Usage(e)) => usage(e),
                Err(RunError::Failed(e)) => {
                    let list = json!({
                        "passed": false,
                        "failures": [{ "check": "error", "detail": e.to_string() }],
                    });
                    eprintln!("{list}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
