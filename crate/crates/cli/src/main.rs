use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use sdclass::experiment::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "sdclass", version, about = "Classify bath spectral densities from qubit dynamics")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a scenario and write train/valid/test CSVs.
    Generate(Common),
    /// Train a classifier and write the model and training log.
    Train(Common),
    /// Score a saved model on a dataset.
    Evaluate(Common),
    /// Accuracy against measurement-noise level.
    SweepNoise(Common),
    /// Accuracy against the width of the eta / omega_c interval.
    SweepInterval(Common),
    /// Accuracy against the number of retained time points.
    FeatselCurve(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario preset (pd-separated, pd-adjacent, pd-varying-0..9, ad-default).
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Training iterations (before the budget factor).
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    /// Noise level(s), comma separated.
    #[arg(long)]
    sigma: Option<String>,
    /// Numbers of retained time points, comma separated.
    #[arg(long)]
    points: Option<String>,
    /// Selection method(s): correlation, uniform.
    #[arg(long)]
    method: Option<String>,
    /// Interval indices for sweep-interval, comma separated.
    #[arg(long)]
    ks: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value config file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scale factor applied to every iteration count.
    #[arg(long)]
    budget: Option<f64>,
    /// Dataset directory written by `generate`.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Model file for `evaluate` (default: <out>/model.txt).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    report_every: Option<usize>,
    #[arg(long)]
    n_train: Option<usize>,
    #[arg(long)]
    n_valid: Option<usize>,
    #[arg(long)]
    n_test: Option<usize>,
}

impl Common {
    fn flags(&self) -> HashMap<String, String> {
        let mut m = HashMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("preset", self.preset.clone());
        put("seed", self.seed.map(|v| v.to_string()));
        put("iters", self.iters.map(|v| v.to_string()));
        put("lr", self.lr.map(|v| v.to_string()));
        put("sigma", self.sigma.clone());
        put("points", self.points.clone());
        put("method", self.method.clone());
        put("ks", self.ks.clone());
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("budget", self.budget.map(|v| v.to_string()));
        put("data", self.data.as_ref().map(|p| p.display().to_string()));
        put("model", self.model.as_ref().map(|p| p.display().to_string()));
        put("report_every", self.report_every.map(|v| v.to_string()));
        put("n_train", self.n_train.map(|v| v.to_string()));
        put("n_valid", self.n_valid.map(|v| v.to_string()));
        put("n_test", self.n_test.map(|v| v.to_string()));
        m
    }

    fn resolve(&self) -> Result<ExperimentConfig> {
        let file = match &self.config {
            Some(p) => Some(ExperimentConfig::from_file(p)?),
            None => None,
        };
        Ok(ExperimentConfig::resolve(file.as_ref(), &self.flags())?)
    }
}

fn pct(v: f64) -> String {
    format!("{v:.2}%")
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Generate(c) => {
            let cfg = c.resolve()?;
            let d = experiment::cmd_generate(&cfg).context("generate failed")?;
            println!(
                "wrote {} ({} / {} / {} trajectories) to {}",
                d.scenario,
                d.train.len(),
                d.valid.len(),
                d.test.len(),
                cfg.out.display()
            );
        }
        Cmd::Train(c) => {
            let cfg = c.resolve()?;
            let o = experiment::cmd_train(&cfg).context("train failed")?;
            println!(
                "iterations {}: train {} valid {} test {}",
                o.iterations,
                pct(o.acc.train),
                pct(o.acc.valid),
                pct(o.acc.test)
            );
        }
        Cmd::Evaluate(c) => {
            let cfg = c.resolve()?;
            let a = experiment::cmd_evaluate(&cfg).context("evaluate failed")?;
            println!("train {} valid {} test {}", pct(a.train), pct(a.valid), pct(a.test));
        }
        Cmd::SweepNoise(c) => {
            let cfg = c.resolve()?;
            experiment::cmd_sweep_noise(&cfg, &mut |r| {
                println!("sigma {}: train {} test {}", r.sigma, pct(r.acc.train), pct(r.acc.test))
            })
            .context("sweep-noise failed")?;
        }
        Cmd::SweepInterval(c) => {
            let cfg = c.resolve()?;
            experiment::cmd_sweep_interval(&cfg, &mut |r| {
                println!(
                    "k {} (length {:.1}): train {} test {}",
                    r.k,
                    r.interval_length,
                    pct(r.acc.train),
                    pct(r.acc.test)
                )
            })
            .context("sweep-interval failed")?;
        }
        Cmd::FeatselCurve(c) => {
            let cfg = c.resolve()?;
            experiment::cmd_featsel_curve(&cfg, &mut |r| {
                println!(
                    "{} k={}: train {} test {}",
                    r.method.name(),
                    r.k_points,
                    pct(r.acc.train),
                    pct(r.acc.test)
                )
            })
            .context("featsel-curve failed")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
