//! Evaluates the four losses on hand-made inputs and checks the triplet
//! gradient against a finite difference.
//!
//!     cargo run --example loss_gradients

use hierembed::losses::{
    binary_node_loss, class_weights, cosine_distance, leaf_loss, per_level_loss, triplet_loss, DEFAULT_MARGIN,
};

fn main() -> hierembed::Result<()> {
    let (a, p, n) = ([1.0, 0.2, 0.0], [0.6, 0.8, 0.1], [0.9, 0.1, 0.4]);
    let tl = triplet_loss(&a, &p, &n, DEFAULT_MARGIN)?;
    println!(
        "d_ap {:.4}  d_an {:.4}  triplet loss {:.4}",
        cosine_distance(&a, &p)?,
        cosine_distance(&a, &n)?,
        tl.value
    );

    let h = 1e-6;
    let mut bumped = a;
    bumped[0] += h;
    let numeric = (triplet_loss(&bumped, &p, &n, DEFAULT_MARGIN)?.value - tl.value) / h;
    println!("dL/da0 analytic {:.6}  numeric {:.6}", tl.grad_anchor[0], numeric);

    let weights = class_weights(&[30, 10, 5])?;
    println!("inverse-frequency weights {weights:.3?}");
    let (l, _) = leaf_loss(&[2.0, 0.5, -1.0], 0, &weights)?;
    println!("leaf loss {l:.4}");

    let level_weights = vec![vec![1.0, 1.0], weights.clone()];
    let (pl, _) = per_level_loss(&[(&[1.5, -0.5], 0), (&[2.0, 0.5, -1.0], 0)], &level_weights)?;
    println!("per-level loss {pl:.4}");

    let (b, _) = binary_node_loss(
        &[3.0, -2.0, 2.5, -1.0, -3.0],
        &[true, false, true, false, false],
        &[1.0; 5],
    )?;
    println!("binary loss {b:.4}");
    Ok(())
}
