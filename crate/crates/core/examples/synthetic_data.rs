//! Generates a hierarchical Gaussian dataset and shows that leaf means
//! sharing a deeper ancestor sit closer together.
//!
//!     cargo run --example synthetic_data

use hierembed::synthdata::{generate, SynthConfig};

fn main() -> hierembed::Result<()> {
    let cfg = SynthConfig::default();
    let (t, data) = generate(&cfg)?;
    println!(
        "{} leaves, {} samples, {} features",
        t.leaves().len(),
        data.len(),
        cfg.feature_dim
    );

    let leaves = data.leaf_nodes(&t)?;
    let mut means = vec![vec![0.0; cfg.feature_dim]; t.len()];
    let mut counts = vec![0usize; t.len()];
    for (s, &leaf) in data.samples.iter().zip(&leaves) {
        counts[leaf] += 1;
        means[leaf].iter_mut().zip(&s.features).for_each(|(m, x)| *m += x);
    }
    for &l in t.leaves() {
        means[l].iter_mut().for_each(|m| *m /= counts[l] as f64);
    }

    let (height, _) = t.height_and_diameter();
    let mut by_lca_depth = vec![(0.0, 0usize); height + 1];
    for (i, &a) in t.leaves().iter().enumerate() {
        for &b in &t.leaves()[i + 1..] {
            let d = t.depth(t.lca(a, b)?)?;
            let dist: f64 = means[a].iter().zip(&means[b]).map(|(x, y)| (x - y).powi(2)).sum();
            by_lca_depth[d].0 += dist.sqrt();
            by_lca_depth[d].1 += 1;
        }
    }
    for (depth, (sum, n)) in by_lca_depth.iter().enumerate().filter(|(_, (_, n))| *n > 0) {
        println!(
            "leaf pairs meeting at depth {depth}: mean distance {:.3} over {n} pairs",
            sum / *n as f64
        );
    }
    Ok(())
}
