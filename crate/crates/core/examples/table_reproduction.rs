//! Runs every standard loss combination over the default synthetic profile
//! and prints the aggregate table.
//!
//!     cargo run --release --example table_reproduction -- [out_dir] [folds]

use std::path::PathBuf;

use hierembed::experiment::{run_experiment, ExperimentConfig, AGGREGATE_FILE};

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let mut args = std::env::args().skip(1);
    let out = PathBuf::from(args.next().unwrap_or_else(|| "table_run".into()));
    let folds: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(5);
    let config = ExperimentConfig {
        folds: Some((0..folds).collect()),
        ..ExperimentConfig::default()
    };
    let report = run_experiment(&config, &out)?;
    print!("{}", std::fs::read_to_string(out.join(AGGREGATE_FILE))?);
    let mnr = |c: &str| report.row(c).and_then(|r| r.get("test MNR")).map(|s| s.mean);
    println!("MNR L {:?} vs PL {:?}", mnr("L"), mnr("PL"));
    Ok(())
}
