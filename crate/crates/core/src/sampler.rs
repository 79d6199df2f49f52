//! Offline mining of generalised triplets from a label tree.
//!
//! For every node `v` with at least two children and every ordered pair of
//! its children `(p, n)`, the negative comes from `n` and the anchor/positive
//! come from inside `p`: from `p` itself when it has at most one child, or
//! from every ordered pair of `p`'s children otherwise. The node-level
//! enumeration is fixed by the tree; one concrete sample triplet is drawn per
//! node triple at the start of each epoch.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::datasplit::{SplitAssignment, Subset};
use crate::error::{Error, Result};
use crate::seeding::{rng_for, Purpose};
use crate::taxonomy::{NodeId, Taxonomy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeTriple {
    pub anchor: NodeId,
    pub positive: NodeId,
    pub negative: NodeId,
}

impl NodeTriple {
    pub fn same_node(&self) -> bool {
        self.anchor == self.positive
    }
}

/// Sample positions of one concrete triplet.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TripletInstance {
    pub anchor: usize,
    pub positive: usize,
    pub negative: usize,
    pub nodes: NodeTriple,
}

/// All node triples in pre-order of their parent node.
pub fn enumerate_node_triples(taxonomy: &Taxonomy) -> Result<Vec<NodeTriple>> {
    if taxonomy.leaves().len() < 2 {
        return Err(Error::TooFewLeaves);
    }
    let mut out = Vec::new();
    for v in 0..taxonomy.len() {
        let children = taxonomy.children(v);
        if children.len() < 2 {
            continue;
        }
        for &pos_side in children {
            for &neg in children {
                if pos_side == neg {
                    continue;
                }
                let inner = taxonomy.children(pos_side);
                match inner.len() {
                    0 => out.push(NodeTriple {
                        anchor: pos_side,
                        positive: pos_side,
                        negative: neg,
                    }),
                    // a single child covers the same samples as its parent
                    1 => out.push(NodeTriple {
                        anchor: inner[0],
                        positive: inner[0],
                        negative: neg,
                    }),
                    _ => {
                        for &a in inner {
                            for &p in inner {
                                if a != p {
                                    out.push(NodeTriple {
                                        anchor: a,
                                        positive: p,
                                        negative: neg,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Closed-form size of [`enumerate_node_triples`].
pub fn count_node_triples(taxonomy: &Taxonomy) -> usize {
    let pairs = |c: usize| c * c.saturating_sub(1);
    (0..taxonomy.len())
        .filter(|&v| taxonomy.children(v).len() >= 2)
        .map(|v| {
            let children = taxonomy.children(v);
            let c = children.len();
            // each child is the positive side c-1 times
            children
                .iter()
                .map(|&p| {
                    let cp = taxonomy.children(p).len();
                    (c - 1) * if cp >= 2 { pairs(cp) } else { 1 }
                })
                .sum::<usize>()
        })
        .sum()
}

/// Draws concrete triplets from a pool of samples (normally the training
/// partition) for a fixed list of node triples.
#[derive(Clone, Debug)]
pub struct TripletSampler {
    triples: Vec<NodeTriple>,
    members: Vec<Vec<usize>>,
    names: Vec<String>,
}

impl TripletSampler {
    /// `taxonomy` is the tree the triples were enumerated on; pool samples are
    /// resolved against it by leaf name.
    pub fn new(taxonomy: &Taxonomy, triples: Vec<NodeTriple>, dataset: &Dataset, pool: &[usize]) -> Result<Self> {
        let mut members = vec![Vec::new(); taxonomy.len()];
        for &s in pool {
            let leaf = taxonomy.leaf_id(&dataset.samples[s].leaf)?;
            for n in taxonomy.path_to_root(leaf) {
                members[n].push(s);
            }
        }
        for m in &mut members {
            m.sort_unstable();
        }
        Ok(TripletSampler {
            triples,
            members,
            names: taxonomy.nodes().iter().map(|n| n.name.clone()).collect(),
        })
    }

    pub fn triples(&self) -> &[NodeTriple] {
        &self.triples
    }

    pub fn members(&self, node: NodeId) -> &[usize] {
        &self.members[node]
    }

    fn check(&self, triple: &NodeTriple) -> Result<()> {
        let need = |node: NodeId, required: usize| {
            let available = self.members[node].len();
            if available < required {
                Err(Error::InsufficientNodeSamples {
                    node: self.names[node].clone(),
                    available,
                    required,
                })
            } else {
                Ok(())
            }
        };
        if triple.same_node() {
            need(triple.anchor, 2)?;
        } else {
            need(triple.anchor, 1)?;
            need(triple.positive, 1)?;
        }
        need(triple.negative, 1)
    }

    fn draw<R: Rng + ?Sized>(&self, triple: NodeTriple, rng: &mut R) -> TripletInstance {
        let pick = |node: NodeId, rng: &mut R| {
            let m = &self.members[node];
            m[rng.random_range(0..m.len())]
        };
        let (anchor, positive) = if triple.same_node() {
            let m = &self.members[triple.anchor];
            let i = rng.random_range(0..m.len());
            let mut j = rng.random_range(0..m.len() - 1);
            if j >= i {
                j += 1;
            }
            (m[i], m[j])
        } else {
            let a = pick(triple.anchor, rng);
            (a, pick(triple.positive, rng))
        };
        TripletInstance {
            anchor,
            positive,
            negative: pick(triple.negative, rng),
            nodes: triple,
        }
    }

    /// One instance per node triple; fails if any node lacks samples.
    pub fn instantiate_with<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<TripletInstance>> {
        for t in &self.triples {
            self.check(t)?;
        }
        Ok(self.triples.iter().map(|&t| self.draw(t, rng)).collect())
    }

    pub fn instantiate(&self, epoch_seed: u64) -> Result<Vec<TripletInstance>> {
        self.instantiate_with(&mut rng_for(epoch_seed, Purpose::Epoch))
    }

    /// Like [`instantiate_with`](Self::instantiate_with) but silently drops
    /// triples whose nodes lack samples. Used for small held-out pools.
    pub fn instantiate_feasible<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<TripletInstance> {
        self.triples
            .iter()
            .filter(|t| self.check(t).is_ok())
            .map(|&t| self.draw(t, rng))
            .collect()
    }
}

/// Triplets for one epoch over the training partition. `taxonomy` is the
/// pruned seen taxonomy the triples were enumerated on.
pub fn instantiate_epoch(
    taxonomy: &Taxonomy,
    dataset: &Dataset,
    split: &SplitAssignment,
    triples: &[NodeTriple],
    epoch_seed: u64,
) -> Result<Vec<TripletInstance>> {
    let train = split.indices(Subset::Train);
    TripletSampler::new(taxonomy, triples.to_vec(), dataset, &train)?.instantiate(epoch_seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripletRecord {
    pub anchor: String,
    pub positive: String,
    pub negative: String,
    pub anchor_node: String,
    pub positive_node: String,
    pub negative_node: String,
}

impl TripletRecord {
    pub fn new(inst: &TripletInstance, dataset: &Dataset, taxonomy: &Taxonomy) -> Self {
        let id = |s: usize| dataset.samples[s].id.clone();
        let node = |n: NodeId| taxonomy.name(n).to_string();
        TripletRecord {
            anchor: id(inst.anchor),
            positive: id(inst.positive),
            negative: id(inst.negative),
            anchor_node: node(inst.nodes.anchor),
            positive_node: node(inst.nodes.positive),
            negative_node: node(inst.nodes.negative),
        }
    }
}

pub fn write_triplets_jsonl(
    path: impl AsRef<Path>,
    instances: &[TripletInstance],
    dataset: &Dataset,
    taxonomy: &Taxonomy,
) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for inst in instances {
        serde_json::to_writer(&mut out, &TripletRecord::new(inst, dataset, taxonomy))?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
