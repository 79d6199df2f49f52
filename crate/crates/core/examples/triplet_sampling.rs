//! Enumerates generalised node triples from a tree and draws one epoch of
//! sample triplets from them.
//!
//!     cargo run --example triplet_sampling

use hierembed::dataset::{Dataset, LabeledSample};
use hierembed::sampler::{count_node_triples, enumerate_node_triples, TripletSampler};
use hierembed::taxonomy::{Taxonomy, TreeSpec};

fn main() -> hierembed::Result<()> {
    let t = Taxonomy::from_spec(&TreeSpec::node(
        "root",
        vec![
            TreeSpec::node("A", vec![TreeSpec::leaf("a1"), TreeSpec::leaf("a2")]),
            TreeSpec::node("B", vec![TreeSpec::leaf("b1")]),
        ],
    ))?;

    let triples = enumerate_node_triples(&t)?;
    println!(
        "{} node triples (closed form {})",
        triples.len(),
        count_node_triples(&t)
    );
    for nt in &triples {
        println!(
            "  ({}, {}, {})",
            t.name(nt.anchor),
            t.name(nt.positive),
            t.name(nt.negative)
        );
    }

    let samples = ["a1", "a2", "b1"]
        .iter()
        .flat_map(|leaf| (0..3).map(move |k| (leaf, k)))
        .enumerate()
        .map(|(i, (leaf, k))| LabeledSample {
            id: format!("{leaf}-{k}"),
            leaf: leaf.to_string(),
            features: vec![i as f64],
        })
        .collect();
    let data = Dataset::new(samples);
    let pool: Vec<usize> = (0..data.len()).collect();
    let sampler = TripletSampler::new(&t, triples, &data, &pool)?;
    for epoch_seed in [0, 1] {
        let ids: Vec<String> = sampler
            .instantiate(epoch_seed)?
            .iter()
            .map(|i| {
                format!(
                    "{}/{}/{}",
                    data.samples[i.anchor].id, data.samples[i.positive].id, data.samples[i.negative].id
                )
            })
            .collect();
        println!("epoch seed {epoch_seed}: {}", ids.join(" "));
    }
    Ok(())
}
