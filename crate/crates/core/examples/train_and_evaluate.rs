//! Trains one loss combination on one fold and prints its metrics.
//!
//!     cargo run --release --example train_and_evaluate -- PL+T

use hierembed::datasplit::{make_splits, Subset};
use hierembed::evaluate::evaluate;
use hierembed::model::{fit, TrainConfig};
use hierembed::synthdata::{generate, SynthConfig};
use hierembed::LossCombo;

fn main() -> anyhow::Result<()> {
    let combo: LossCombo = std::env::args().nth(1).unwrap_or_else(|| "PL+T".into()).parse()?;
    let (t, data) = generate(&SynthConfig::default())?;
    let split = make_splits(&t, &data, 5, 0)?.remove(0);
    println!(
        "{} seen and {} unseen leaves; {} training samples",
        split.seen_leaves.len(),
        split.unseen_leaves.len(),
        split.indices(Subset::Train).len()
    );

    let config = TrainConfig {
        epochs: 20,
        ..TrainConfig::default()
    };
    let (model, log) = fit(&data, &t, &split, combo, &config, 0)?;
    for e in log.epochs.iter().step_by(5) {
        println!(
            "epoch {:>2}: train {:.4}  valid {:.4}",
            e.epoch, e.train.total, e.valid.total
        );
    }
    println!("kept epoch {:?} (valid {:.4})", log.best_epoch, log.best_valid);

    for set in [Subset::Test, Subset::Prediction] {
        let r = evaluate(&model, &t, &data, &split, set)?;
        println!("{set:?}: {}", serde_json::to_string(&r)?);
    }
    Ok(())
}
