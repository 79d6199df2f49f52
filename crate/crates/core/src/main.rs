use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use hierembed::datasplit::{SplitAssignment, Subset};
use hierembed::experiment::{self, ExperimentConfig};
use hierembed::model::TrainedModel;
use hierembed::seeding::{epoch_seed, fold_seed};
use hierembed::synthdata::SynthConfig;
use hierembed::LossCombo;

#[derive(Parser)]
#[command(name = "hierembed", version, about = "Hierarchy-aware embedding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct DataArgs {
    #[arg(long)]
    taxonomy: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic taxonomy and dataset.
    GenData {
        /// TOML file with a [synth] table (other keys are ignored).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write fold_<i>/split.json for every fold.
    Split {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write one epoch of training triplets as JSON lines.
    SampleTriplets {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        split: PathBuf,
        /// Base seed; the fold offset is added from the split file.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        epoch: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one loss combination on one fold.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        split: PathBuf,
        /// Combination such as `PL+B+T`.
        #[arg(long)]
        losses: LossCombo,
        /// TOML file with training hyper-parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a checkpoint on the test or prediction partition.
    Evaluate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_parser = parse_set)]
        set: Subset,
        /// Unused; accepted so every subcommand takes a seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Aggregate evaluated runs into one CSV table.
    Report {
        #[arg(long)]
        runs: PathBuf,
        /// Unused; accepted so every subcommand takes a seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Every stage for the configured folds and combinations.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_set(s: &str) -> std::result::Result<Subset, String> {
    match s {
        "test" => Ok(Subset::Test),
        "prediction" => Ok(Subset::Prediction),
        other => Err(format!("expected `test` or `prediction`, got `{other}`")),
    }
}

fn load_config(path: Option<&Path>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_file(p).with_context(|| format!("reading {}", p.display())),
        None => Ok(ExperimentConfig::default()),
    }
}

fn load_split(path: &Path, data: &DataArgs) -> Result<(hierembed::Taxonomy, hierembed::Dataset, SplitAssignment)> {
    let (t, d) = experiment::load_data(&data.taxonomy, &data.dataset)?;
    let split = SplitAssignment::read_json(path, &t, &d).with_context(|| format!("reading {}", path.display()))?;
    Ok((t, d, split))
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::GenData { config, seed, out } => {
            let mut synth: SynthConfig = load_config(config.as_deref())?.synth;
            if let Some(s) = seed {
                synth.seed = s;
            }
            let (t, d) = experiment::gen_data(&synth, &out)?;
            log::info!("{} leaves, {} samples", t.leaves().len(), d.len());
        }
        Command::Split { data, folds, seed, out } => {
            let (t, d) = experiment::load_data(&data.taxonomy, &data.dataset)?;
            experiment::split_stage(&t, &d, folds, seed, &out)?;
        }
        Command::SampleTriplets {
            data,
            split,
            seed,
            epoch,
            out,
        } => {
            let (t, d, split) = load_split(&split, &data)?;
            let s = epoch_seed(fold_seed(seed, split.fold), epoch);
            let n = experiment::sample_triplets_stage(&t, &d, &split, s, Some(&out))?.len();
            log::info!("{n} triplets");
        }
        Command::Train {
            data,
            split,
            losses,
            config,
            seed,
            out,
        } => {
            if losses.is_empty() {
                bail!("empty loss combination");
            }
            let cfg = load_config(config.as_deref())?;
            let (t, d, split) = load_split(&split, &data)?;
            experiment::train_stage(&t, &d, &split, losses, &cfg.train, seed.unwrap_or(cfg.seed), &out)?;
        }
        Command::Evaluate {
            data,
            split,
            checkpoint,
            set,
            out,
            ..
        } => {
            let (t, d, split) = load_split(&split, &data)?;
            let model = TrainedModel::read_checkpoint(&checkpoint)?;
            experiment::evaluate_stage(&model, &t, &d, &split, set, Some(&out))?;
        }
        Command::Report { runs, out, .. } => {
            experiment::report_stage(&runs, Some(&out))?;
        }
        Command::Run { config, seed, out } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            experiment::run_experiment(&cfg, &out)?;
        }
    }
    Ok(())
}
