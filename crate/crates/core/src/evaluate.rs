//! Runs a trained model over the test or prediction partition and collects
//! every metric into a [`MetricsReport`].

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::datasplit::{SplitAssignment, Subset};
use crate::error::{Error, Result};
use crate::losses::LossKind;
use crate::metrics::{acc_aware, acc_blind, leaf_f1, mnr, ndcg, rank_by_cosine, rp_at_k, RankedList, RelevanceKind};
use crate::model::{Forward, TrainedModel};
use crate::taxonomy::{NodeId, Taxonomy};

pub const RETRIEVAL_K: usize = 5;

/// Metrics of one model on one partition; fields that do not apply are absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub set: Option<Subset>,
    pub combo: String,
    pub fold: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaf_rp_at_5: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mnr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ndcg_sum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ndcg_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc_blind: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc_aware: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio_blind_aware: Option<f64>,
    pub queries: usize,
    pub mnr_skipped_levels: usize,
    pub ndcg_skipped_queries: usize,
}

impl MetricsReport {
    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn resolve(taxonomy: &Taxonomy, name: &str) -> Result<NodeId> {
    taxonomy
        .id_of(name)
        .ok_or_else(|| Error::Metric(format!("model class `{name}` is not in the taxonomy")))
}

/// Leaf predicted by the leaf head, or by the deepest level head when the
/// model has no leaf head.
pub fn predicted_leaf(model: &TrainedModel, out: &Forward, taxonomy: &Taxonomy) -> Result<Option<NodeId>> {
    if let Some(logits) = &out.leaf {
        return resolve(taxonomy, &model.layout.leaf_classes[argmax(logits)]).map(Some);
    }
    match (model.layout.levels.last(), out.levels.last()) {
        (Some(layout), Some(logits)) => resolve(taxonomy, &layout.classes[argmax(logits)]).map(Some),
        _ => Ok(None),
    }
}

/// Class predicted at every depth of the seen tree. Depths without a head
/// have a single class, which is used directly.
fn predicted_by_depth(
    model: &TrainedModel,
    out: &Forward,
    taxonomy: &Taxonomy,
    single_class: &BTreeMap<usize, NodeId>,
) -> Result<BTreeMap<usize, NodeId>> {
    let mut preds = single_class.clone();
    for (layout, logits) in model.layout.levels.iter().zip(&out.levels) {
        preds.insert(layout.depth, resolve(taxonomy, &layout.classes[argmax(logits)])?);
    }
    Ok(preds)
}

pub fn evaluate(
    model: &TrainedModel,
    taxonomy: &Taxonomy,
    dataset: &Dataset,
    split: &SplitAssignment,
    set: Subset,
) -> Result<MetricsReport> {
    // rank ties resolve to the lower pool position, i.e. the smaller sample id
    let mut pool = split.indices(set);
    pool.sort_by(|&a, &b| dataset.samples[a].id.cmp(&dataset.samples[b].id));
    if pool.len() < 2 {
        return Err(Error::Metric(format!("{set:?} partition has {} samples", pool.len())));
    }
    let all_leaves = dataset.leaf_nodes(taxonomy)?;
    let leaves: Vec<NodeId> = pool.iter().map(|&s| all_leaves[s]).collect();
    let outputs = model.forward_all(dataset, &pool)?;
    let embeddings: Vec<Vec<f64>> = outputs.iter().map(|o| o.embedding.clone()).collect();
    let lists: Vec<RankedList> = rank_by_cosine(&embeddings)?;
    let predicted: Option<Vec<NodeId>> = outputs
        .iter()
        .map(|o| predicted_leaf(model, o, taxonomy))
        .collect::<Result<Option<Vec<_>>>>()?;

    let mut report = MetricsReport {
        set: Some(set),
        combo: model.combo.to_string(),
        fold: split.fold,
        queries: lists.len(),
        ..MetricsReport::default()
    };
    let sum = ndcg(&lists, &leaves, taxonomy, RelevanceKind::Sum)?;
    let max = ndcg(&lists, &leaves, taxonomy, RelevanceKind::Max)?;
    report.ndcg_sum = Some(sum.value);
    report.ndcg_max = Some(max.value);
    report.ndcg_skipped_queries = sum.skipped_queries;

    match set {
        Subset::Prediction => {
            if let Some(pred) = &predicted {
                report.acc_blind = Some(acc_blind(pred, &leaves, taxonomy, split)?);
            }
            if model.combo.contains(LossKind::PerLevel) {
                let seen = split.pruned_seen_taxonomy(taxonomy)?;
                let (height, _) = seen.taxonomy.height_and_diameter();
                let headed: Vec<usize> = model.layout.levels.iter().map(|l| l.depth).collect();
                let mut single = BTreeMap::new();
                for depth in (0..=height).filter(|d| !headed.contains(d)) {
                    let classes: Vec<NodeId> = (0..seen.taxonomy.len())
                        .filter(|&n| {
                            let d = seen.taxonomy.depth_of(n);
                            d == depth || (d < depth && seen.taxonomy.is_leaf(n))
                        })
                        .collect();
                    if let [only] = classes[..] {
                        single.insert(depth, seen.to_full[only]);
                    }
                }
                let by_depth = outputs
                    .iter()
                    .map(|o| predicted_by_depth(model, o, taxonomy, &single))
                    .collect::<Result<Vec<_>>>()?;
                let aware = acc_aware(&by_depth, &leaves, taxonomy, split)?;
                report.acc_aware = Some(aware);
                if let Some(blind) = report.acc_blind {
                    report.ratio_blind_aware = (aware > 0.0).then(|| blind / aware);
                }
            }
        }
        _ => {
            if let Some(pred) = &predicted {
                let classes: Vec<NodeId> = split.seen_leaves.iter().copied().collect();
                report.leaf_f1 = Some(leaf_f1(pred, &leaves, &classes)?);
            }
            report.leaf_rp_at_5 = Some(rp_at_k(&lists, &leaves, RETRIEVAL_K)?);
            let m = mnr(&lists, &leaves, taxonomy)?;
            report.mnr = Some(m.value);
            report.mnr_skipped_levels = m.skipped_levels;
        }
    }
    Ok(report)
}
