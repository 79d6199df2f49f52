//! Leaf-level folds, within-leaf partitions and lowest seen ancestors.
//!
//!     cargo run --example fold_splits

use hierembed::datasplit::{make_splits, Subset};
use hierembed::synthdata::{generate, SynthConfig};

fn main() -> hierembed::Result<()> {
    let cfg = SynthConfig {
        depth: 2,
        branching: vec![(2, 4)],
        samples_per_leaf: (6, 30),
        ..SynthConfig::default()
    };
    let (t, data) = generate(&cfg)?;
    let counts = data.leaf_counts(&t)?;
    println!(
        "{} leaves; counts {:?}",
        t.leaves().len(),
        counts.values().collect::<Vec<_>>()
    );

    for split in make_splits(&t, &data, 3, 0)? {
        let sizes: Vec<String> = [Subset::Train, Subset::Valid, Subset::Test, Subset::Prediction]
            .iter()
            .map(|&s| format!("{s:?} {}", split.indices(s).len()))
            .collect();
        println!("fold {}: {}", split.fold, sizes.join(", "));
        for &leaf in &split.unseen_leaves {
            let lsa = split.lowest_seen_ancestor(&t, leaf)?;
            println!(
                "  unseen {} ({} samples) -> lowest seen ancestor {}",
                t.name(leaf),
                counts[&leaf],
                t.name(lsa)
            );
        }
        let seen = split.pruned_seen_taxonomy(&t)?;
        println!("  seen tree has {} nodes", seen.taxonomy.len());
    }
    Ok(())
}
