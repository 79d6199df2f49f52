//! Labelled feature vectors and their JSON Lines format.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{NodeId, Taxonomy};

/// One record of the dataset file: `{"id": ..., "leaf": ..., "features": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample {
    pub id: String,
    pub leaf: String,
    pub features: Vec<f64>,
}

/// An ordered collection of samples.
///
/// Samples are addressed by their position in the collection; rankings break
/// similarity ties by ascending position.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub samples: Vec<LabeledSample>,
}

impl Dataset {
    pub fn new(samples: Vec<LabeledSample>) -> Self {
        Dataset { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn feature_dim(&self) -> Option<usize> {
        self.samples.first().map(|s| s.features.len())
    }

    pub fn features(&self, index: usize) -> &[f64] {
        &self.samples[index].features
    }

    /// Leaf node of every sample, by position.
    pub fn leaf_nodes(&self, taxonomy: &Taxonomy) -> Result<Vec<NodeId>> {
        self.samples.iter().map(|s| taxonomy.leaf_id(&s.leaf)).collect()
    }

    /// Sample count per leaf of `taxonomy`; leaves without samples map to 0.
    pub fn leaf_counts(&self, taxonomy: &Taxonomy) -> Result<BTreeMap<NodeId, usize>> {
        let mut counts: BTreeMap<NodeId, usize> = taxonomy.leaves().iter().map(|&l| (l, 0)).collect();
        for leaf in self.leaf_nodes(taxonomy)? {
            *counts.get_mut(&leaf).expect("leaf_id returns leaves") += 1;
        }
        Ok(counts)
    }

    pub fn position_of(&self) -> BTreeMap<&str, usize> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect()
    }

    pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut samples = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            samples.push(serde_json::from_str(&line)?);
        }
        let data = Dataset { samples };
        data.validate()?;
        Ok(data)
    }

    pub fn write_jsonl(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for s in &self.samples {
            serde_json::to_writer(&mut out, s)?;
            out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Ids must be unique and feature vectors share one length.
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        let dim = self.feature_dim().unwrap_or(0);
        for s in &self.samples {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::Config(format!("duplicate sample id `{}`", s.id)));
            }
            if s.features.len() != dim {
                return Err(Error::LengthMismatch {
                    expected: dim,
                    got: s.features.len(),
                });
            }
        }
        Ok(())
    }
}
