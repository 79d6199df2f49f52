#![allow(dead_code)]

use hierembed::dataset::{Dataset, LabeledSample};
use hierembed::taxonomy::{Taxonomy, TreeSpec};
use rand::Rng;

/// Random tree with at most `max_depth` edges below the root. Internal nodes
/// get 1-3 children; the root always gets at least 2.
pub fn random_tree<R: Rng>(rng: &mut R, max_depth: usize) -> Taxonomy {
    fn grow<R: Rng>(rng: &mut R, name: String, depth: usize, max_depth: usize, uniform: bool) -> TreeSpec {
        let children = if depth == max_depth {
            0
        } else if depth == 0 {
            rng.random_range(2..=3)
        } else if uniform {
            rng.random_range(1..=3)
        } else {
            rng.random_range(0..=3)
        };
        TreeSpec {
            children: (0..children)
                .map(|k| grow(rng, format!("{name}.{k}"), depth + 1, max_depth, uniform))
                .collect(),
            name,
        }
    }
    Taxonomy::from_spec(&grow(rng, "r".into(), 0, max_depth, false)).unwrap()
}

/// Random tree whose leaves all sit at depth `depth`.
pub fn random_uniform_tree<R: Rng>(rng: &mut R, depth: usize) -> Taxonomy {
    fn grow<R: Rng>(rng: &mut R, name: String, d: usize, depth: usize) -> TreeSpec {
        let children = if d == depth {
            0
        } else if d == 0 {
            rng.random_range(2..=3)
        } else {
            rng.random_range(1..=3)
        };
        TreeSpec {
            children: (0..children)
                .map(|k| grow(rng, format!("{name}.{k}"), d + 1, depth))
                .collect(),
            name,
        }
    }
    Taxonomy::from_spec(&grow(rng, "r".into(), 0, depth)).unwrap()
}

/// `per_leaf` samples of dimension `dim` for every leaf, with random features.
pub fn random_dataset<R: Rng>(rng: &mut R, t: &Taxonomy, per_leaf: usize, dim: usize) -> Dataset {
    let mut samples = Vec::new();
    for &leaf in t.leaves() {
        for _ in 0..per_leaf {
            let i = samples.len();
            samples.push(LabeledSample {
                id: format!("s{i:04}"),
                leaf: t.name(leaf).to_string(),
                features: (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
            });
        }
    }
    Dataset::new(samples)
}

/// The small reference tree: root -> {A -> {a1, a2}, B -> {b1}}.
pub fn small_tree() -> Taxonomy {
    Taxonomy::from_spec(&TreeSpec::node(
        "root",
        vec![
            TreeSpec::node("A", vec![TreeSpec::leaf("a1"), TreeSpec::leaf("a2")]),
            TreeSpec::node("B", vec![TreeSpec::leaf("b1")]),
        ],
    ))
    .unwrap()
}
