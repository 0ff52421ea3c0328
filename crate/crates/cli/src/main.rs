//! `delay-rc`: run reservoir benchmarks from TOML configs.
//!
//! Exit codes: 0 success, 1 invalid config, 2 runtime failure, 3 an
//! `--assert` threshold not met.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use delay_rc::experiment::{
    check_assertion, emit_bifurcation, emit_results, emit_sweep, run_bifurcation, run_experiment, sweep,
    Backend, ExperimentConfig, ResultReport,
};
use delay_rc::Error;

#[derive(Parser)]
#[command(name = "delay-rc", version, about = "Delay-line reservoir computing benchmarks")]
struct Cli {
    /// More log output (-v info, -vv debug). RUST_LOG overrides.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all trials of a config and write results.
    Run(Common),
    /// Run every point of the config's [sweep] grid.
    Sweep(Common),
    /// Histogram undriven loop states over the [bifurcation] gain grid.
    Bifurcation(Common),
    /// Parse and check a config without running it.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    /// Override master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the backend (discrete | continuous).
    #[arg(long)]
    backend: Option<Backend>,
    /// Fail with exit code 3 unless the mean of METRIC meets BOUND (at most
    /// BOUND for error metrics, at least BOUND for capacities). Repeatable.
    #[arg(long = "assert", num_args = 2, value_names = ["METRIC", "BOUND"], action = clap::ArgAction::Append)]
    assertions: Vec<String>,
}

enum Failure {
    Config(String),
    Runtime(String),
    Assertion(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Runtime(_) => 2,
            Failure::Assertion(_) => 3,
        }
    }
}

fn runtime(e: Error) -> Failure {
    match e {
        Error::Config(m) => Failure::Config(m),
        e => Failure::Runtime(e.to_string()),
    }
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let mut cfg = ExperimentConfig::from_file(&self.config).map_err(|e| Failure::Config(e.to_string()))?;
        if let Some(s) = self.seed {
            cfg.master_seed = s;
        }
        if let Some(t) = self.trials {
            cfg.trials = t;
        }
        if let Some(o) = &self.out {
            cfg.output = o.clone();
        }
        if let Some(b) = self.backend {
            cfg.backend = b;
        }
        cfg.validate().map_err(|e| Failure::Config(e.to_string()))?;
        Ok(cfg)
    }

    fn assertions(&self) -> Result<Vec<(String, f64)>, Failure> {
        self.assertions
            .chunks(2)
            .map(|pair| {
                let bound = pair[1]
                    .parse::<f64>()
                    .map_err(|_| Failure::Config(format!("--assert bound `{}` is not a number", pair[1])))?;
                Ok((pair[0].clone(), bound))
            })
            .collect()
    }
}

fn print_report(r: &ResultReport) {
    let p = &r.point;
    let snr = p.snr_db.map(|s| format!(" snr={s}dB")).unwrap_or_default();
    println!(
        "{} [{}] N={} k={} alpha={} beta={} phi={} lambda={:?}{snr}",
        r.task,
        r.backend.name(),
        p.n_nodes,
        p.desync_k,
        p.feedback_gain,
        p.input_gain,
        p.bias,
        p.ridge_lambda
    );
    for s in &r.summary {
        println!("  {}: {:.6e} ± {:.3e} over {} trials", s.name, s.mean, s.std, s.trials);
    }
    for t in r.trials.iter().filter(|t| t.error.is_some()) {
        println!("  trial {} failed: {}", t.trial, t.error.as_deref().unwrap_or_default());
    }
}

fn check(report: &ResultReport, assertions: &[(String, f64)]) -> Result<(), Failure> {
    let mut failed = Vec::new();
    for (metric, bound) in assertions {
        let (ok, mean) = check_assertion(report, metric, *bound).map_err(runtime)?;
        println!("assert {metric} {bound}: {} (mean {mean:.6e})", if ok { "ok" } else { "FAILED" });
        if !ok {
            failed.push(format!("{metric} mean {mean} does not meet {bound}"));
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(failed.join("; ")))
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Validate(c) => {
            let cfg = c.load()?;
            c.assertions()?;
            println!("{}: ok", c.config.display());
            if let Ok(task) = cfg.task() {
                println!("  task {} on the {} backend, {} trials", task.name(), cfg.backend.name(), cfg.trials);
            }
            Ok(())
        }
        Command::Run(c) => {
            let cfg = c.load()?;
            let asserts = c.assertions()?;
            let report = run_experiment(&cfg).map_err(runtime)?;
            print_report(&report);
            let files = emit_results(std::slice::from_ref(&report), &cfg.output).map_err(runtime)?;
            println!("wrote {}", files.results.display());
            if report.failed_trials() > 0 {
                return Err(Failure::Runtime(format!("{} trial(s) failed", report.failed_trials())));
            }
            check(&report, &asserts)
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            let asserts = c.assertions()?;
            let s = sweep(&cfg).map_err(runtime)?;
            s.points.iter().for_each(print_report);
            for b in &s.best {
                let p = &b.point;
                println!(
                    "best {}: {:.6e} ± {:.3e} at N={} k={} alpha={} beta={} phi={} lambda={:?}",
                    b.metric, b.mean, b.std, p.n_nodes, p.desync_k, p.feedback_gain, p.input_gain, p.bias, p.ridge_lambda
                );
            }
            let files = emit_sweep(&s, &cfg.output).map_err(runtime)?;
            println!("wrote {}", files.results.display());
            let failed: usize = s.points.iter().map(ResultReport::failed_trials).sum();
            if !s.failures.is_empty() || failed > 0 {
                return Err(Failure::Runtime(format!(
                    "{} grid point(s) and {failed} trial(s) failed",
                    s.failures.len()
                )));
            }
            // assertions apply to the best point of each metric
            for (metric, bound) in &asserts {
                let best = s
                    .points
                    .iter()
                    .find(|p| s.best.iter().any(|b| &b.metric == metric && b.point == p.point))
                    .ok_or_else(|| Failure::Config(format!("sweep has no metric `{metric}`")))?;
                check(best, &[(metric.clone(), *bound)])?;
            }
            Ok(())
        }
        Command::Bifurcation(c) => {
            let cfg = c.load()?;
            let r = run_bifurcation(&cfg).map_err(runtime)?;
            match r.first_split {
                Some(a) => println!("first split at alpha = {a}"),
                None => println!("no split in the scanned range"),
            }
            let widest = r
                .slices
                .iter()
                .map(|s| (s.alpha, s.histogram.support_width(r.min_fraction)))
                .max_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((a, w)) = widest {
                println!("widest support {w:.3} at alpha = {a}");
            }
            let (scan, _) = emit_bifurcation(&r, &cfg.output).map_err(runtime)?;
            println!("wrote {}", scan.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, msg) = match &f {
                Failure::Config(m) => ("invalid config", m),
                Failure::Runtime(m) => ("runtime failure", m),
                Failure::Assertion(m) => ("assertion failed", m),
            };
            eprintln!("delay-rc: {kind}: {msg}");
            ExitCode::from(f.code())
        }
    }
}
