use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rzf_core::theory::{achieved_mse, regime, SingleInterferenceGeometry};
use rzf_expcli::config::{ExperimentConfig, Method, SweepAxis};
use rzf_expcli::experiment::{run_epsilon_search, run_sweep, SweepResult};
use rzf_expcli::output::{emit_csv, manifest_path, write_csv};
use rzf_expcli::checks;

/// Relaxed zero-forcing beamformer experiments.
///
/// Set RZF_THREADS to bound the worker pool.
#[derive(Parser)]
#[command(name = "rzf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep one axis and tabulate MSE per beamformer.
    Sweep(Common),
    /// Grid-search the RZF budget at the fixed parameters.
    EpsSearch(Common),
    /// Learning curves of the online algorithms.
    Online {
        #[command(flatten)]
        common: Common,
        /// Report every this many iterations.
        #[arg(long, default_value_t = 10)]
        every: usize,
    },
    /// Regime and achieved MSE of a single-interferer geometry.
    Theory(TheoryArgs),
    /// Run the built-in oracle checks.
    Check {
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct Common {
    /// key = value experiment file.
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    sir_db: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// List, lin:a:b:n or log:a:b:n.
    #[arg(long)]
    epsilon_grid: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Any config key, e.g. --set axis=rho. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// CSV path; a manifest is written next to it. Stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn exp(&self) -> Result<ExperimentConfig> {
        let mut exp = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)?,
            None => ExperimentConfig::default(),
        };
        let mut kv: Vec<(String, String)> = Vec::new();
        for s in &self.set {
            let (k, v) = s.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got `{s}`"))?;
            kv.push((k.trim().to_string(), v.trim().to_string()));
        }
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                kv.push((k.to_string(), v));
            }
        };
        put("snr_db", self.snr_db.map(|x| x.to_string()));
        put("sir_db", self.sir_db.map(|x| x.to_string()));
        put("rho", self.rho.map(|x| x.to_string()));
        put("epsilon_grid", self.epsilon_grid.clone());
        put("trials", self.trials.map(|x| x.to_string()));
        put("seed", self.seed.map(|x| x.to_string()));
        exp.apply(&kv)?;
        Ok(exp)
    }
}

#[derive(Args)]
struct TheoryArgs {
    /// Angle τ between the channels (radians), sinτ = |⟨h₀,h₁⟩|.
    #[arg(long)]
    tau: f64,
    /// Signed real correlation; overrides --c1-abs/--phi-c/--phi-z.
    #[arg(long, allow_hyphen_values = true)]
    c1: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    c1_abs: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi_c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    phi_z: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma0_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma1_sq: f64,
    #[arg(long, default_value_t = 1.0)]
    sigma_n_sq: f64,
}

fn write_result(result: &SweepResult, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            emit_csv(result, path)?;
            eprintln!("wrote {} rows to {} (+ {})", result.rows.len(), path.display(), manifest_path(path).display());
        }
        None => {
            let stdout = std::io::stdout();
            write_csv(&result.rows, stdout.lock())?;
        }
    }
    let errors: Vec<_> = result.errors().collect();
    if !errors.is_empty() {
        eprintln!("{} failed point(s):", errors.len());
        for r in errors {
            eprintln!("  axis {} {}: {}", r.axis, r.beamformer, r.error.as_deref().unwrap_or(""));
        }
    }
    Ok(())
}

fn theory(a: &TheoryArgs) -> Result<()> {
    let g = match a.c1 {
        Some(c1) => SingleInterferenceGeometry::from_real(a.tau, c1, a.sigma0_sq, a.sigma1_sq, a.sigma_n_sq)?,
        None => SingleInterferenceGeometry::new(a.tau, a.phi_z, a.c1_abs, a.phi_c, a.sigma0_sq, a.sigma1_sq, a.sigma_n_sq)?,
    };
    let rep = regime(&g);
    let mse = achieved_mse(&g);
    let mut o = std::io::stdout().lock();
    writeln!(o, "delta1        {:.6e}", rep.delta1)?;
    writeln!(o, "|delta2|^2    {:.6e}", rep.delta2_abs_sq)?;
    match rep.gamma {
        Some(x) => writeln!(o, "gamma         {x:.6}")?,
        None => writeln!(o, "gamma         undefined")?,
    }
    writeln!(o, "regime        {:?}", rep.regime)?;
    match rep.lambda_opt.finite() {
        Some(l) => writeln!(o, "lambda_opt    {l:.6e}")?,
        None => writeln!(o, "lambda_opt    inf")?,
    }
    writeln!(o)?;
    writeln!(o, "beamformer  mse            mse_db")?;
    for (name, v) in [("RZF", mse.rzf), ("MVDR", mse.mvdr), ("ZF", mse.zf), ("MMSE_DR", mse.mmse_dr)] {
        writeln!(o, "{name:<10}  {v:.6e}  {:.4}", 10.0 * (v / a.sigma0_sq).log10())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Sweep(c) => {
            let exp = c.exp()?;
            exp.validate()?;
            write_result(&run_sweep(&exp)?, c.out.as_ref())?;
        }
        Command::EpsSearch(c) => {
            let exp = c.exp()?;
            exp.validate()?;
            let (result, search) = run_epsilon_search(&exp)?;
            write_result(&result, c.out.as_ref())?;
            let best = search.best();
            eprintln!(
                "best epsilon {:.6e} (requested {:.6e}{}), mse_db {:.4}, eps_mvdr {:.6e}",
                best.evaluated,
                best.requested,
                if best.clamped { ", clamped to eps_mvdr" } else { "" },
                10.0 * best.mse.log10(),
                search.epsilon_mvdr
            );
        }
        Command::Online { common, every } => {
            if every == 0 {
                bail!("--every must be >= 1");
            }
            let mut exp = common.exp()?;
            if !exp.methods.iter().any(|m| m.is_online()) {
                exp.methods.extend([Method::Ddaa, Method::CnlmsMvdr, Method::CnlmsZf]);
            }
            exp.axis = SweepAxis::Iteration;
            let n = exp.iterations.max(1);
            let mut grid: Vec<f64> = (1..=n).filter(|k| k % every == 0 || *k == 1).map(|k| k as f64).collect();
            if grid.last() != Some(&(n as f64)) {
                grid.push(n as f64);
            }
            exp.grid = grid;
            exp.validate()?;
            write_result(&run_sweep(&exp)?, common.out.as_ref())?;
        }
        Command::Theory(a) => theory(&a)?,
        Command::Check { seed } => {
            let outcomes = checks::run_all(seed);
            for o in &outcomes {
                println!("{} {:<28} {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
            }
            return Ok(outcomes.iter().all(|o| o.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    if let Some(n) = std::env::var("RZF_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
