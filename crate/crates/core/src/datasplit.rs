//! Seen/unseen leaf folds and per-sample train/valid/test/prediction sets.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::seeding::{fold_seed, rng_for, Purpose};
use crate::taxonomy::{NodeId, Taxonomy, TreeSpec};

/// Leaves with fewer samples than this are never seen during training.
pub const MIN_SEEN_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    Train,
    Valid,
    Test,
    Prediction,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafFold {
    pub seen: BTreeSet<NodeId>,
    pub unseen: BTreeSet<NodeId>,
}

/// Partitions leaves into `k_folds` seen/unseen assignments.
///
/// Small leaves are unseen everywhere; the remaining leaves are shuffled and
/// dealt round-robin into `k_folds` groups, and group `i` is unseen in fold `i`.
pub fn split_leaves(
    taxonomy: &Taxonomy,
    counts: &BTreeMap<NodeId, usize>,
    k_folds: usize,
    seed: u64,
) -> Result<Vec<LeafFold>> {
    if k_folds < 2 {
        return Err(Error::InvalidSplit(format!("k_folds must be >= 2, got {k_folds}")));
    }
    let mut eligible = Vec::new();
    let mut small = BTreeSet::new();
    for &leaf in taxonomy.leaves() {
        let n = *counts
            .get(&leaf)
            .ok_or_else(|| Error::InvalidSplit(format!("no count for leaf `{}`", taxonomy.name(leaf))))?;
        if n < MIN_SEEN_SAMPLES {
            small.insert(leaf);
        } else {
            eligible.push(leaf);
        }
    }
    if eligible.is_empty() {
        return Err(Error::NoEligibleLeaves);
    }
    if eligible.len() < k_folds {
        log::warn!(
            "{} eligible leaves for {} folds; some folds hold out no eligible leaf",
            eligible.len(),
            k_folds
        );
    }
    eligible.shuffle(&mut rng_for(seed, Purpose::LeafFolds));

    let mut groups = vec![BTreeSet::new(); k_folds];
    for (i, leaf) in eligible.iter().enumerate() {
        groups[i % k_folds].insert(*leaf);
    }
    Ok(groups
        .into_iter()
        .map(|held_out| {
            let unseen: BTreeSet<NodeId> = held_out.union(&small).copied().collect();
            let seen = taxonomy
                .leaves()
                .iter()
                .copied()
                .filter(|l| !unseen.contains(l))
                .collect();
            LeafFold { seen, unseen }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub valid: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.8,
            valid: 0.1,
            test: 0.1,
        }
    }
}

/// Shuffles one leaf's samples and cuts them into train/valid/test.
///
/// Valid and test sizes are floored; the remainder goes to train.
pub fn split_within_leaf<R: Rng + ?Sized>(
    samples: &[usize],
    ratios: SplitRatios,
    rng: &mut R,
) -> Result<Vec<(usize, Subset)>> {
    let n = samples.len();
    let floor = |r: f64| (n as f64 * r + 1e-9).floor() as usize;
    let (n_valid, n_test) = (floor(ratios.valid), floor(ratios.test));
    if n_valid == 0 || n_test == 0 || n_valid + n_test >= n {
        return Err(Error::TooFewSamples(n));
    }
    let n_train = n - n_valid - n_test;
    let mut order = samples.to_vec();
    order.shuffle(rng);
    Ok(order
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let subset = if i < n_train {
                Subset::Train
            } else if i < n_train + n_valid {
                Subset::Valid
            } else {
                Subset::Test
            };
            (s, subset)
        })
        .collect())
}

/// One fold's leaf and sample assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitAssignment {
    pub fold: usize,
    pub seen_leaves: BTreeSet<NodeId>,
    pub unseen_leaves: BTreeSet<NodeId>,
    /// Subset of each sample, by dataset position.
    pub partition: Vec<Subset>,
}

/// Builds every fold's assignment. Fold `i` splits seen leaves with seed
/// `base_seed + i`.
pub fn make_splits(
    taxonomy: &Taxonomy,
    dataset: &Dataset,
    k_folds: usize,
    base_seed: u64,
) -> Result<Vec<SplitAssignment>> {
    let counts = dataset.leaf_counts(taxonomy)?;
    let folds = split_leaves(taxonomy, &counts, k_folds, base_seed)?;
    folds
        .iter()
        .enumerate()
        .map(|(i, lf)| {
            SplitAssignment::build(
                taxonomy,
                dataset,
                lf,
                i,
                fold_seed(base_seed, i),
                SplitRatios::default(),
            )
        })
        .collect()
}

impl SplitAssignment {
    pub fn build(
        taxonomy: &Taxonomy,
        dataset: &Dataset,
        leaf_fold: &LeafFold,
        fold: usize,
        seed: u64,
        ratios: SplitRatios,
    ) -> Result<Self> {
        let leaves = dataset.leaf_nodes(taxonomy)?;
        let mut by_leaf: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
        for (i, &leaf) in leaves.iter().enumerate() {
            by_leaf.entry(leaf).or_default().push(i);
        }
        let mut partition = vec![Subset::Prediction; dataset.len()];
        let mut rng = rng_for(seed, Purpose::WithinLeaf);
        for &leaf in &leaf_fold.seen {
            let members = by_leaf.get(&leaf).map(Vec::as_slice).unwrap_or(&[]);
            let parts = split_within_leaf(members, ratios, &mut rng)
                .map_err(|e| e.context(format!("leaf `{}`", taxonomy.name(leaf))))?;
            for (s, subset) in parts {
                partition[s] = subset;
            }
        }
        Ok(SplitAssignment {
            fold,
            seen_leaves: leaf_fold.seen.clone(),
            unseen_leaves: leaf_fold.unseen.clone(),
            partition,
        })
    }

    pub fn indices(&self, subset: Subset) -> Vec<usize> {
        self.partition
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == subset)
            .map(|(i, _)| i)
            .collect()
    }

    /// True when some seen leaf lies under `node`, i.e. the node has training
    /// data beneath it.
    pub fn is_seen_node(&self, taxonomy: &Taxonomy, node: NodeId) -> bool {
        self.seen_leaves.iter().any(|&l| taxonomy.is_ancestor_or_self(node, l))
    }

    /// First proper ancestor of an unseen leaf that has training data.
    pub fn lowest_seen_ancestor(&self, taxonomy: &Taxonomy, unseen_leaf: NodeId) -> Result<NodeId> {
        taxonomy.node(unseen_leaf)?;
        if !self.unseen_leaves.contains(&unseen_leaf) {
            return Err(Error::InvalidSplit(format!(
                "`{}` is not an unseen leaf",
                taxonomy.name(unseen_leaf)
            )));
        }
        Ok(taxonomy
            .path_to_root(unseen_leaf)
            .skip(1)
            .find(|&n| self.is_seen_node(taxonomy, n))
            .unwrap_or(taxonomy.root()))
    }

    /// The taxonomy restricted to seen leaves and their ancestors.
    pub fn pruned_seen_taxonomy(&self, taxonomy: &Taxonomy) -> Result<SeenTaxonomy> {
        if self.seen_leaves.is_empty() {
            return Err(Error::NoSeenLeaves);
        }
        let keep: Vec<bool> = (0..taxonomy.len()).map(|n| self.is_seen_node(taxonomy, n)).collect();
        fn build(t: &Taxonomy, keep: &[bool], id: NodeId) -> TreeSpec {
            TreeSpec {
                name: t.name(id).to_string(),
                children: t
                    .children(id)
                    .iter()
                    .filter(|&&c| keep[c])
                    .map(|&c| build(t, keep, c))
                    .collect(),
            }
        }
        let pruned = Taxonomy::from_spec(&build(taxonomy, &keep, taxonomy.root()))?;
        let to_full = (0..pruned.len())
            .map(|i| {
                taxonomy
                    .id_of(pruned.name(i))
                    .expect("pruned names come from the full tree")
            })
            .collect();
        Ok(SeenTaxonomy {
            taxonomy: pruned,
            to_full,
        })
    }

    pub fn to_file(&self, taxonomy: &Taxonomy, dataset: &Dataset) -> SplitFile {
        let names = |set: &BTreeSet<NodeId>| set.iter().map(|&n| taxonomy.name(n).to_string()).collect();
        SplitFile {
            fold: self.fold,
            seen: names(&self.seen_leaves),
            unseen: names(&self.unseen_leaves),
            partition: dataset
                .samples
                .iter()
                .zip(&self.partition)
                .map(|(s, &p)| (s.id.clone(), p))
                .collect(),
        }
    }

    pub fn from_file(file: &SplitFile, taxonomy: &Taxonomy, dataset: &Dataset) -> Result<Self> {
        let ids =
            |names: &[String]| -> Result<BTreeSet<NodeId>> { names.iter().map(|n| taxonomy.leaf_id(n)).collect() };
        let seen_leaves = ids(&file.seen)?;
        let unseen_leaves = ids(&file.unseen)?;
        if !seen_leaves.is_disjoint(&unseen_leaves)
            || seen_leaves.len() + unseen_leaves.len() != taxonomy.leaves().len()
        {
            return Err(Error::InvalidSplit(
                "seen and unseen leaves must partition the leaf set".into(),
            ));
        }
        let partition = dataset
            .samples
            .iter()
            .map(|s| {
                file.partition
                    .get(&s.id)
                    .copied()
                    .ok_or_else(|| Error::InvalidSplit(format!("sample `{}` has no subset", s.id)))
            })
            .collect::<Result<Vec<_>>>()?;
        if file.partition.len() != dataset.len() {
            return Err(Error::InvalidSplit("partition names unknown samples".into()));
        }
        Ok(SplitAssignment {
            fold: file.fold,
            seen_leaves,
            unseen_leaves,
            partition,
        })
    }

    pub fn write_json(&self, path: impl AsRef<Path>, taxonomy: &Taxonomy, dataset: &Dataset) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_file(taxonomy, dataset))?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>, taxonomy: &Taxonomy, dataset: &Dataset) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: SplitFile = serde_json::from_str(&text)?;
        Self::from_file(&file, taxonomy, dataset)
    }
}

/// Serialised form of a [`SplitAssignment`], keyed by names and sample ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitFile {
    pub fold: usize,
    pub seen: Vec<String>,
    pub unseen: Vec<String>,
    pub partition: BTreeMap<String, Subset>,
}

/// A pruned taxonomy plus the id of each of its nodes in the full tree.
#[derive(Clone, Debug, PartialEq)]
pub struct SeenTaxonomy {
    pub taxonomy: Taxonomy,
    pub to_full: Vec<NodeId>,
}

impl SeenTaxonomy {
    pub fn from_full(&self, full: &Taxonomy, id: NodeId) -> Option<NodeId> {
        self.taxonomy.id_of(full.name(id))
    }
}
