//! Hierarchical Gaussian datasets.
//!
//! Each node's mean is its parent's mean plus an isotropic Gaussian offset
//! whose scale shrinks geometrically with depth; samples scatter around their
//! leaf's mean. Leaves that share a deep ancestor are therefore close in
//! feature space, in proportion to how much of their root path they share.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, LabeledSample};
use crate::error::{Error, Result};
use crate::seeding::{rng_for, Purpose};
use crate::taxonomy::{Taxonomy, TreeSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Edges from the root to every leaf.
    pub depth: usize,
    /// Inclusive child-count range per level; a single entry applies to all.
    pub branching: Vec<(usize, usize)>,
    pub samples_per_leaf: (usize, usize),
    pub feature_dim: usize,
    pub offset_scale: f64,
    pub decay: f64,
    pub leaf_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    /// Four levels including the root, 3-4 children per node (27-64
    /// leaves), 20-40 samples per leaf in 32 dimensions.
    fn default() -> Self {
        SynthConfig {
            depth: 3,
            branching: vec![(3, 4)],
            samples_per_leaf: (20, 40),
            feature_dim: 32,
            offset_scale: 1.0,
            decay: 0.6,
            leaf_noise: 0.3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSynthConfig(m.to_string()));
        if self.depth == 0 {
            return bad("depth must be >= 1");
        }
        if self.feature_dim < 2 {
            return bad("feature_dim must be >= 2");
        }
        if self.branching.len() != 1 && self.branching.len() != self.depth {
            return bad("branching needs one range or one per level");
        }
        if self.branching.iter().any(|&(lo, hi)| lo == 0 || lo > hi) {
            return bad("branching ranges must satisfy 1 <= min <= max");
        }
        let (lo, hi) = self.samples_per_leaf;
        if lo == 0 || lo > hi {
            return bad("samples_per_leaf must satisfy 1 <= min <= max");
        }
        if !(self.offset_scale >= 0.0 && self.leaf_noise >= 0.0) {
            return bad("scales must be >= 0");
        }
        if !(self.decay > 0.0 && self.decay <= 1.0) {
            return bad("decay must lie in (0, 1]");
        }
        Ok(())
    }

    fn branching_at(&self, level: usize) -> (usize, usize) {
        if self.branching.len() == 1 {
            self.branching[0]
        } else {
            self.branching[level]
        }
    }

    /// Standard deviation of the offset added at `depth >= 1`.
    pub fn offset_std(&self, depth: usize) -> f64 {
        self.offset_scale * self.decay.powi(depth as i32 - 1)
    }
}

struct Draft {
    name: String,
    depth: usize,
    children: Vec<usize>,
    mean: Vec<f64>,
}

/// Builds the tree breadth-first, then node means in pre-order, then the
/// samples leaf by leaf, all from one random stream.
pub fn generate(config: &SynthConfig) -> Result<(Taxonomy, Dataset)> {
    config.validate()?;
    let mut rng = rng_for(config.seed, Purpose::Synthetic);
    let mut nodes = vec![Draft {
        name: "root".into(),
        depth: 0,
        children: Vec::new(),
        mean: vec![0.0; config.feature_dim],
    }];
    let mut frontier = vec![0usize];
    for level in 0..config.depth {
        let (lo, hi) = config.branching_at(level);
        let mut next = Vec::new();
        for parent in frontier {
            let count = rng.random_range(lo..=hi);
            for k in 0..count {
                let name = if parent == 0 {
                    format!("n{k}")
                } else {
                    format!("{}.{k}", nodes[parent].name)
                };
                let id = nodes.len();
                nodes.push(Draft {
                    name,
                    depth: level + 1,
                    children: Vec::new(),
                    mean: Vec::new(),
                });
                nodes[parent].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
    }

    let mut order = Vec::new();
    let mut stack = vec![0usize];
    while let Some(n) = stack.pop() {
        order.push(n);
        stack.extend(nodes[n].children.iter().rev());
    }
    let mut parent_of = vec![0usize; nodes.len()];
    for (i, n) in nodes.iter().enumerate() {
        for &c in &n.children {
            parent_of[c] = i;
        }
    }
    for &n in order.iter().skip(1) {
        let std = config.offset_std(nodes[n].depth);
        let offset = Normal::new(0.0, std).map_err(|e| Error::InvalidSynthConfig(e.to_string()))?;
        let mean = nodes[parent_of[n]]
            .mean
            .iter()
            .map(|m| m + offset.sample(&mut rng))
            .collect();
        nodes[n].mean = mean;
    }

    let noise = Normal::new(0.0, config.leaf_noise).map_err(|e| Error::InvalidSynthConfig(e.to_string()))?;
    let (lo, hi) = config.samples_per_leaf;
    let mut samples = Vec::new();
    for &n in order.iter().filter(|&&n| nodes[n].children.is_empty()) {
        let count = rng.random_range(lo..=hi);
        for _ in 0..count {
            samples.push(LabeledSample {
                id: String::new(),
                leaf: nodes[n].name.clone(),
                features: nodes[n].mean.iter().map(|m| m + noise.sample(&mut rng)).collect(),
            });
        }
    }
    let width = samples.len().to_string().len().max(5);
    for (i, s) in samples.iter_mut().enumerate() {
        s.id = format!("s{i:0width$}");
    }

    fn spec(nodes: &[Draft], n: usize) -> TreeSpec {
        TreeSpec {
            name: nodes[n].name.clone(),
            children: nodes[n].children.iter().map(|&c| spec(nodes, c)).collect(),
        }
    }
    let taxonomy = Taxonomy::from_spec(&spec(&nodes, 0))?;
    Ok((taxonomy, Dataset::new(samples)))
}
