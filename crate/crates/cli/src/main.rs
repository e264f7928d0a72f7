use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use gradsing_core::config::{self, RunConfig};
use gradsing_core::pipeline::{self, PipelineOutcome, Stage};
use gradsing_core::report::VerificationReport;
use gradsing_core::specfn::{self, BesselOrder};

#[derive(Parser)]
#[command(name = "gradsing", version, about = "Radial solutions of u_t = Δu + u u_r³ with a gradient singularity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bessel functions and zeros.
    Specfn {
        #[command(subcommand)]
        action: SpecfnAction,
    },
    /// Residuals of the closed-form profiles.
    Analytic {
        #[command(subcommand)]
        action: AnalyticAction,
    },
    /// Initial-datum conditions.
    Initdata {
        #[command(subcommand)]
        action: InitdataAction,
    },
    /// Solve one annulus problem.
    Solve {
        #[command(flatten)]
        source: ConfigArgs,
        /// Inner radius; defaults to the first term of the continuation.
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Solve the whole eps-sequence and report consecutive differences.
    Continuation {
        #[command(flatten)]
        source: ConfigArgs,
    },
    /// Verification suite.
    Verify {
        #[command(subcommand)]
        action: VerifyAction,
    },
    /// Print a finished run's report and regenerate its plot data.
    Report {
        /// Output directory of the run.
        dir: PathBuf,
        #[arg(long)]
        plotdata: bool,
    },
    /// Full pipeline.
    Run {
        #[command(flatten)]
        source: ConfigArgs,
        /// Stop after this stage (analytic, initdata, continuation, verify).
        #[arg(long)]
        only: Option<String>,
    },
}

#[derive(Subcommand)]
enum SpecfnAction {
    Probe {
        /// Order; exclusive with --n.
        #[arg(long, conflicts_with = "n")]
        nu: Option<f64>,
        /// Dimension, giving the order nu(n).
        #[arg(long)]
        n: Option<i64>,
        /// Arguments at which to evaluate J and J'.
        #[arg(long, value_delimiter = ',')]
        x: Vec<f64>,
    },
}

#[derive(Subcommand)]
enum AnalyticAction {
    Check {
        #[command(flatten)]
        source: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum InitdataAction {
    Validate {
        #[command(flatten)]
        source: ConfigArgs,
    },
}

#[derive(Subcommand)]
enum VerifyAction {
    Run {
        #[command(flatten)]
        source: ConfigArgs,
    },
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Built-in preset (n2-standard, n3-weak).
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set scheme.dt_initial=5e-4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides `output.directory`).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self, extra: &[(String, String)]) -> Result<RunConfig> {
        let src = match (&self.preset, &self.config) {
            (Some(name), None) => config::preset_source(name)?.to_string(),
            (None, Some(path)) => {
                std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
            }
            (None, None) => config::preset_source("n2-standard")?.to_string(),
            (Some(_), Some(_)) => bail!("give either --preset or --config"),
        };
        let mut overrides = Vec::new();
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
            overrides.push((k.trim().to_string(), v.trim().to_string()));
        }
        overrides.extend_from_slice(extra);
        if let Some(out) = &self.out {
            overrides.push(("output.directory".into(), format!("{:?}", out.display().to_string())));
        }
        Ok(RunConfig::with_overrides(&src, &overrides)?)
    }
}

fn print_report(report: &VerificationReport) {
    for c in &report.checks {
        let measured: Vec<String> = c.measured.iter().map(|(k, v)| format!("{k}={v:.4e}")).collect();
        println!("{:<13} {:<40} {}", c.status.to_string().to_uppercase(), c.name, measured.join(" "));
        if let Some(note) = &c.note {
            println!("{:<13} {:<40} note: {note}", "", "");
        }
    }
    let failed = report.failures().count();
    println!("{} checks, {failed} failed", report.checks.len());
}

fn finish(outcome: &PipelineOutcome) -> ExitCode {
    print_report(&outcome.report);
    if let Some(cont) = &outcome.continuation {
        for (j, d) in cont.differences.iter().enumerate() {
            println!("difference eps[{j}] -> eps[{}]: {d:.4e}", j + 1);
        }
        for (j, rate) in cont.observed_rates().iter().enumerate() {
            println!("observed rate {j}: {rate:.3}");
        }
    }
    println!("artifacts in {}", outcome.output_dir.display());
    exit_for(&outcome.report)
}

fn exit_for(report: &VerificationReport) -> ExitCode {
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn specfn_probe(nu: Option<f64>, n: Option<i64>, xs: &[f64]) -> Result<()> {
    let order = match (nu, n) {
        (Some(nu), None) => BesselOrder::new(nu)?,
        (None, Some(n)) => BesselOrder::for_dimension(n)?,
        _ => bail!("give exactly one of --nu and --n"),
    };
    let zeros = specfn::first_zeros(order)?;
    println!("nu = {:.15}", order.value());
    println!("x1 (first zero of J') = {:.15}", zeros.x1);
    println!("x0 (first zero of J)  = {:.15}", zeros.x0);
    if !xs.is_empty() {
        println!("x,J,J'");
        for &x in xs {
            println!("{x},{:.15e},{:.15e}", specfn::bessel_j(order, x)?, specfn::bessel_j_prime(order, x)?);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    Ok(match cli.command {
        Command::Specfn {
            action: SpecfnAction::Probe { nu, n, x },
        } => {
            specfn_probe(nu, n, &x)?;
            ExitCode::SUCCESS
        }
        Command::Analytic {
            action: AnalyticAction::Check { source },
        } => finish(&pipeline::run_pipeline(&source.load(&[])?, Stage::Analytic)?),
        Command::Initdata {
            action: InitdataAction::Validate { source },
        } => finish(&pipeline::run_pipeline(&source.load(&[])?, Stage::Initdata)?),
        Command::Solve { source, eps } => {
            let cfg = source.load(&[])?;
            let eps = match eps {
                Some(e) => e,
                None => cfg.continuation.sequence()?[0],
            };
            let cfg = source.load(&[("continuation.eps".into(), format!("[{eps:?}]"))])?;
            finish(&pipeline::run_pipeline(&cfg, Stage::Continuation)?)
        }
        Command::Continuation { source } => finish(&pipeline::run_pipeline(&source.load(&[])?, Stage::Continuation)?),
        Command::Verify {
            action: VerifyAction::Run { source },
        } => finish(&pipeline::run_pipeline(&source.load(&[])?, Stage::Verify)?),
        Command::Report { dir, plotdata } => {
            let report = pipeline::load_report(&dir)?;
            print_report(&report);
            if plotdata {
                let (p, s) = pipeline::emit_plotdata(&dir)?;
                println!("wrote {} and {}", p.display(), s.display());
            }
            exit_for(&report)
        }
        Command::Run { source, only } => {
            let stage = match only {
                Some(s) => s.parse::<Stage>()?,
                None => Stage::Verify,
            };
            finish(&pipeline::run_pipeline(&source.load(&[])?, stage)?)
        }
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
