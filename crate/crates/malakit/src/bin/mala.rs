use clap::{Args, Parser, Subcommand};
use malakit::harness::{
    emit_csv, load_config, run_condition_sweep, run_dimension_sweep, run_single,
    run_spectral_gap, run_verify, spectral_metadata_json, sweep_metadata_json, ExperimentConfig,
    ExperimentKind, SweepOutput,
};
use malakit::{Error, Result};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "mala",
    version,
    about = "Metropolis-adjusted Langevin sampling experiments on ripple-perturbed \
             Gaussian targets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Output path override (CSV for sweeps, JSON for spectral gap).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 keeps the default pool.
    #[arg(long)]
    workers: Option<usize>,
    /// Chains per sweep point.
    #[arg(long)]
    chains: Option<u32>,
    /// Maximum steps per chain.
    #[arg(long)]
    steps: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one chain and print a summary.
    Sample(CommonOpts),
    /// Sweep dimensions with h = d^-gamma and write the CSV artifact.
    SweepDimension(CommonOpts),
    /// Sweep condition numbers with h = kappa^-gamma / sqrt(d).
    SweepCondition(CommonOpts),
    /// Estimate the spectral gap seen by a warm start and the implied
    /// mixing-time lower bound.
    SpectralGap(CommonOpts),
    /// Run the analytic identity checks and report pass/fail per check.
    Verify(CommonOpts),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) | Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let (kind, opts) = match &cli.command {
        Command::Sample(o) => (ExperimentKind::SingleRun, o),
        Command::SweepDimension(o) => (ExperimentKind::DimensionSweep, o),
        Command::SweepCondition(o) => (ExperimentKind::ConditionSweep, o),
        Command::SpectralGap(o) => (ExperimentKind::SpectralGap, o),
        Command::Verify(o) => (ExperimentKind::Verify, o),
    };
    let mut cfg = match &opts.config {
        Some(path) => load_config(path, Some(kind))?,
        None => ExperimentConfig::default_for(kind),
    };
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &opts.out {
        cfg.out_path = Some(out.display().to_string());
    }
    if let Some(workers) = opts.workers {
        cfg.workers = workers;
    }
    if let Some(chains) = opts.chains {
        cfg.n_chains = chains;
    }
    if let Some(steps) = opts.steps {
        cfg.max_steps = steps;
    }
    cfg.validate()?;
    if cfg.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    }

    match kind {
        ExperimentKind::SingleRun => {
            let report = run_single(&cfg)?;
            println!("dimension       {}", report.dim);
            println!("step size       {:.6e}", report.h);
            println!("steps run       {}", report.steps);
            println!("acceptance      {:.4}", report.accept_rate);
            match report.tau {
                Some(t) => println!("proxy hit at    {t}"),
                None => println!("proxy hit at    not reached"),
            }
            println!("final |x|       {:.4}", report.final_norm);
            println!("start attempts  {}", report.start_attempts);
            Ok(())
        }
        ExperimentKind::DimensionSweep => {
            let output = run_dimension_sweep(&cfg)?;
            print_sweep_table(&output);
            write_sweep_artifacts(&cfg, &output)
        }
        ExperimentKind::ConditionSweep => {
            let output = run_condition_sweep(&cfg)?;
            print_sweep_table(&output);
            write_sweep_artifacts(&cfg, &output)
        }
        ExperimentKind::SpectralGap => {
            let outcome = run_spectral_gap(&cfg)?;
            let est = &outcome.estimate;
            println!(
                "dirichlet form  {:.6e} +- {:.1e}  ({} pairs)",
                est.dirichlet, est.dirichlet_stderr, est.pairs
            );
            println!("chi-squared     {:.6}", est.chi2);
            println!("gap ratio       {:.6e}", est.gap_ratio);
            match outcome.certified_bound {
                Some(b) => println!("certified bound {b:.6e}"),
                None => println!("certified bound none at this step size"),
            }
            match &outcome.lower_bound {
                Some(lb) => println!(
                    "mixing bound    >= {:.1} steps to eps = {}{}",
                    lb.steps,
                    outcome.eps,
                    if lb.log_form { "  (log form)" } else { "" }
                ),
                None => println!("mixing bound    unavailable"),
            }
            println!("warmness        {:.4}", outcome.warm_report.warmness_bound);
            for flag in &outcome.flags {
                println!("note            {flag}");
            }
            if let Some(out) = &cfg.out_path {
                std::fs::write(out, spectral_metadata_json(&cfg, &outcome))?;
                println!("wrote {out}");
            }
            Ok(())
        }
        ExperimentKind::Verify => {
            let results = run_verify(cfg.seed);
            let mut failures = 0;
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                println!("{status} {:<42} {}", r.name, r.detail);
                failures += u32::from(!r.passed);
            }
            println!("{} checks, {} failed", results.len(), failures);
            if failures > 0 {
                return Err(Error::Numerical(format!("{failures} checks failed")));
            }
            Ok(())
        }
    }
}

fn print_sweep_table(output: &SweepOutput) {
    println!(
        "{:>12} {:>7} {:>12} {:>8} {:>12} {:>8}",
        "sweep_value", "gamma", "h", "accept", "mean_tau", "missed"
    );
    for r in &output.records {
        let tau = match r.mean_tau {
            Some(t) => format!("{t:.1}"),
            None => "-".to_string(),
        };
        println!(
            "{:>12} {:>7} {:>12.4e} {:>8.4} {:>12} {:>8.2}",
            r.sweep_value, r.gamma, r.h, r.mean_accept, tau, r.frac_tau_not_reached
        );
    }
}

fn write_sweep_artifacts(cfg: &ExperimentConfig, output: &SweepOutput) -> Result<()> {
    let out = cfg.out_path.as_deref().ok_or_else(|| {
        Error::Config("an output CSV path is required: pass --out or set out in the config".into())
    })?;
    emit_csv(&output.records, Path::new(out))?;
    let meta_path = format!("{out}.meta.json");
    std::fs::write(&meta_path, sweep_metadata_json(cfg, output))?;
    println!("wrote {out} and {meta_path}");
    Ok(())
}
