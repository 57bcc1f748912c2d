use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use ccsport::config::{validate_spec, ExperimentSpec};
use ccsport::experiment::{self, Indicator};
use ccsport::{formats, synth};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccsport", version, about = "Constrained portfolio optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SpecArgs {
    /// Experiment spec (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Override the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a spec and load its instances without running anything.
    Validate {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Run every (instance, algorithm, run) of a spec and write the result tree.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        /// Result directory (defaults to the spec's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the spec's `workers`, then the CPU count).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Recompute metrics and summary tables from the per-run CSVs.
    Summarize {
        #[arg(long)]
        out: PathBuf,
        /// Only compare against the files on disk; fail on any difference.
        #[arg(long)]
        check: bool,
    },
    /// Print rank-sum comparison matrices of an existing result tree.
    Compare {
        #[arg(long)]
        out: PathBuf,
        /// igd or ih; both when omitted.
        #[arg(long)]
        indicator: Option<String>,
    },
    /// Write a synthetic instance and its unconstrained efficient frontier.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 31)]
        assets: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        points: usize,
        #[arg(long, default_value = "synthetic")]
        name: String,
    },
}

fn load(args: &SpecArgs) -> Result<ExperimentSpec> {
    let mut spec = ExperimentSpec::load(&args.config)?;
    if let Some(seed) = args.seed {
        spec.base_seed = seed;
    }
    Ok(spec)
}

fn write_reports(out: &Path, check: bool) -> Result<()> {
    let report = experiment::summarize(out)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    let mut differ = Vec::new();
    for (path, text) in &report.reports {
        let full = out.join(path);
        if check {
            let on_disk = std::fs::read_to_string(&full).unwrap_or_default();
            if &on_disk != text {
                differ.push(path.display().to_string());
            }
        } else {
            if let Some(dir) = full.parent() {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(&full, text).with_context(|| format!("writing {}", full.display()))?;
        }
    }
    if !differ.is_empty() {
        bail!("recomputed reports differ from the result tree: {}", differ.join(", "));
    }
    if check {
        println!("{} report files match", report.reports.len());
    } else {
        println!("rewrote {} report files under {}", report.reports.len(), out.display());
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Validate { spec } => {
            let v = validate_spec(load(&spec)?)?;
            println!(
                "ok: {} instance(s), {} algorithm(s), {} run(s) each, config hash {}",
                v.instances.len(),
                v.spec.algorithms.len(),
                v.spec.runs,
                v.spec.config_hash()
            );
        }
        Command::Run { spec, out, workers } => {
            let v = validate_spec(load(&spec)?)?;
            let out = out
                .or_else(|| v.spec.output.clone())
                .context("no output directory: pass --out or set `output` in the spec")?;
            let workers = workers
                .or(v.spec.workers)
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let report = experiment::run_experiment(&v, &out, workers)?;
            for (path, text) in &report.reports {
                if path.starts_with("summary") && path.extension().is_some_and(|e| e == "txt") {
                    println!("{text}");
                }
            }
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("results written to {}", out.display());
        }
        Command::Summarize { out, check } => write_reports(&out, check)?,
        Command::Compare { out, indicator } => {
            let report = experiment::summarize(&out)?;
            let wanted: Vec<Indicator> = match indicator.as_deref() {
                None => Indicator::ALL.to_vec(),
                Some(name) => match Indicator::ALL.into_iter().find(|i| i.name() == name) {
                    Some(i) => vec![i],
                    None => bail!("unknown indicator {name:?}; use igd or ih"),
                },
            };
            for ind in wanted {
                let path = Path::new("compare").join(format!("{}.txt", ind.name()));
                if let Some((_, text)) = report.reports.iter().find(|(p, _)| *p == path) {
                    println!("{text}");
                }
            }
        }
        Command::Synth {
            out,
            assets,
            seed,
            points,
            name,
        } => {
            let cfg = synth::SynthConfig {
                assets,
                seed,
                frontier_points: points,
                ..synth::SynthConfig::default()
            };
            let inst = synth::synthetic_instance(&name, &cfg)?;
            let front = synth::efficient_frontier(&inst, points)?;
            std::fs::create_dir_all(&out)?;
            let inst_path = out.join(format!("{name}.txt"));
            let front_path = out.join(format!("{name}_frontier.txt"));
            std::fs::write(&inst_path, formats::write_orlibrary(&inst))?;
            std::fs::write(&front_path, formats::write_frontier(&front))?;
            println!("wrote {} and {}", inst_path.display(), front_path.display());
        }
    }
    Ok(())
}
