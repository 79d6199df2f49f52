//! Classification, retrieval and embedding-structure metrics.
//!
//! Retrieval metrics work on a pool of samples identified by position; each
//! sample queries all others, ranked by descending cosine similarity with
//! ties going to the lower position. Callers keep pools in ascending sample
//! order so the tie-break is by sample id.

use std::collections::BTreeMap;

use crate::datasplit::SplitAssignment;
use crate::error::{Error, Result};
use crate::taxonomy::{NodeId, Taxonomy};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankedList {
    pub query: usize,
    pub candidates: Vec<usize>,
}

fn unit(v: &[f64]) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.iter().map(|x| x / norm).collect())
}

/// Ranks every other pool member for each query.
pub fn rank_by_cosine(embeddings: &[Vec<f64>]) -> Result<Vec<RankedList>> {
    let units = embeddings.iter().map(|e| unit(e)).collect::<Result<Vec<_>>>()?;
    Ok((0..units.len())
        .map(|q| {
            let mut scored: Vec<(f64, usize)> = (0..units.len())
                .filter(|&c| c != q)
                .map(|c| (units[q].iter().zip(&units[c]).map(|(a, b)| a * b).sum(), c))
                .collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            RankedList {
                query: q,
                candidates: scored.into_iter().map(|(_, c)| c).collect(),
            }
        })
        .collect())
}

/// Macro-averaged F1 over `classes`; a class with no predictions and no
/// truths scores 0 and still counts.
pub fn leaf_f1(predictions: &[NodeId], truths: &[NodeId], classes: &[NodeId]) -> Result<f64> {
    if truths.is_empty() {
        return Err(Error::Metric("empty evaluation set for F1".into()));
    }
    if predictions.len() != truths.len() {
        return Err(Error::LengthMismatch {
            expected: truths.len(),
            got: predictions.len(),
        });
    }
    if classes.is_empty() {
        return Err(Error::Metric("no classes for F1".into()));
    }
    let mut total = 0.0;
    for &c in classes {
        let tp = predictions
            .iter()
            .zip(truths)
            .filter(|(&p, &t)| p == c && t == c)
            .count() as f64;
        let pred = predictions.iter().filter(|&&p| p == c).count() as f64;
        let real = truths.iter().filter(|&&t| t == c).count() as f64;
        let precision = if pred > 0.0 { tp / pred } else { 0.0 };
        let recall = if real > 0.0 { tp / real } else { 0.0 };
        if precision + recall > 0.0 {
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    Ok(total / classes.len() as f64)
}

/// Mean fraction of each query's top `k` candidates that share its leaf.
pub fn rp_at_k(lists: &[RankedList], leaves: &[NodeId], k: usize) -> Result<f64> {
    if lists.is_empty() || k == 0 {
        return Err(Error::Metric("no queries for retrieval precision".into()));
    }
    let mut total = 0.0;
    for list in lists {
        if list.candidates.len() < k {
            return Err(Error::Metric(format!(
                "query has {} candidates, need {k}",
                list.candidates.len()
            )));
        }
        let hits = list.candidates[..k]
            .iter()
            .filter(|&&c| leaves[c] == leaves[list.query])
            .count();
        total += hits as f64 / k as f64;
    }
    Ok(total / lists.len() as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MnrOutcome {
    pub value: f64,
    /// (query, level) pairs without any correct candidate.
    pub skipped_levels: usize,
    /// Queries with no usable level at all.
    pub skipped_queries: usize,
}

/// Mean normalised rank of hierarchy-similar candidates.
///
/// For every query and every classification level of `taxonomy`, the correct
/// answers are the candidates under the query's node at that level; each
/// contributes `(rank - 1) / N`. Averages run over correct answers, then
/// levels, then queries. A level with no correct answer is skipped for that
/// query.
pub fn mnr(lists: &[RankedList], leaves: &[NodeId], taxonomy: &Taxonomy) -> Result<MnrOutcome> {
    let levels = taxonomy.levels_with_multiple_classes();
    if levels.is_empty() {
        return Err(Error::Metric("taxonomy has no level with more than one class".into()));
    }
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut skipped_levels = 0;
    for list in lists {
        let n = list.candidates.len() as f64;
        if list.candidates.is_empty() {
            return Err(Error::Metric("query without candidates".into()));
        }
        let query_leaf = leaves[list.query];
        let mut level_sum = 0.0;
        let mut level_count = 0usize;
        for level in &levels {
            let node = taxonomy.ancestor_at_depth(query_leaf, level.depth);
            let mut rank_sum = 0.0;
            let mut hits = 0usize;
            for (i, &c) in list.candidates.iter().enumerate() {
                if taxonomy.is_ancestor_or_self(node, leaves[c]) {
                    rank_sum += i as f64 / n;
                    hits += 1;
                }
            }
            if hits == 0 {
                skipped_levels += 1;
                continue;
            }
            level_sum += rank_sum / hits as f64;
            level_count += 1;
        }
        if level_count > 0 {
            sum += level_sum / level_count as f64;
            used += 1;
        }
    }
    if skipped_levels > 0 {
        log::warn!("MNR skipped {skipped_levels} query levels without correct candidates");
    }
    if used == 0 {
        return Err(Error::Metric("no query has a correct candidate".into()));
    }
    Ok(MnrOutcome {
        value: sum / used as f64,
        skipped_levels,
        skipped_queries: lists.len() - used,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelevanceKind {
    /// Path length through the LCA over the leaf diameter.
    Sum,
    /// Longer LCA leg over the tree height.
    Max,
}

/// Tree relevance of two nodes in `[0, 1]`; identical nodes score 1.
pub fn relevance(taxonomy: &Taxonomy, a: NodeId, b: NodeId, kind: RelevanceKind) -> Result<f64> {
    let lca = taxonomy.lca(a, b)?;
    if a == b {
        return Ok(1.0);
    }
    let da = taxonomy.node_distance(a, lca)?;
    let db = taxonomy.node_distance(b, lca)?;
    let (height, diameter) = taxonomy.height_and_diameter();
    let (num, den) = match kind {
        RelevanceKind::Sum => (da + db, diameter),
        RelevanceKind::Max => (da.max(db), height),
    };
    if den == 0 {
        return Err(Error::Metric("degenerate tree for relevance".into()));
    }
    Ok(1.0 - num as f64 / den as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct NdcgOutcome {
    pub value: f64,
    /// Queries whose ideal DCG is zero.
    pub skipped_queries: usize,
    pub per_query: Vec<Option<f64>>,
}

/// DCG of linear gains over the full list, `sum rel_i / log2(i + 1)`.
pub fn dcg(relevances: &[f64]) -> f64 {
    relevances
        .iter()
        .enumerate()
        .map(|(i, r)| r / ((i + 2) as f64).log2())
        .sum()
}

pub fn ndcg_of(relevances: &[f64]) -> Option<f64> {
    let mut ideal = relevances.to_vec();
    ideal.sort_by(|a, b| b.total_cmp(a));
    let idcg = dcg(&ideal);
    (idcg > 0.0).then(|| dcg(relevances) / idcg)
}

/// Mean NDCG with tree relevance between query and candidate leaves.
pub fn ndcg(lists: &[RankedList], leaves: &[NodeId], taxonomy: &Taxonomy, kind: RelevanceKind) -> Result<NdcgOutcome> {
    let mut cache: BTreeMap<(NodeId, NodeId), f64> = BTreeMap::new();
    let mut per_query = Vec::with_capacity(lists.len());
    for list in lists {
        if list.candidates.is_empty() {
            return Err(Error::Metric("query without candidates".into()));
        }
        let q = leaves[list.query];
        let rels = list
            .candidates
            .iter()
            .map(|&c| {
                let key = (q, leaves[c]);
                if let Some(&r) = cache.get(&key) {
                    return Ok(r);
                }
                let r = relevance(taxonomy, key.0, key.1, kind)?;
                cache.insert(key, r);
                Ok(r)
            })
            .collect::<Result<Vec<f64>>>()?;
        per_query.push(ndcg_of(&rels));
    }
    let scored: Vec<f64> = per_query.iter().flatten().copied().collect();
    if scored.is_empty() {
        return Err(Error::Metric("every query has zero ideal DCG".into()));
    }
    let skipped = per_query.len() - scored.len();
    if skipped > 0 {
        log::warn!("NDCG skipped {skipped} queries with zero ideal DCG");
    }
    Ok(NdcgOutcome {
        value: scored.iter().sum::<f64>() / scored.len() as f64,
        skipped_queries: skipped,
        per_query,
    })
}

/// Fraction of unseen-leaf samples whose predicted (seen) leaf, lifted to
/// the depth of the true lowest seen ancestor, lands on that ancestor.
pub fn acc_blind(
    predicted_leaves: &[NodeId],
    true_leaves: &[NodeId],
    taxonomy: &Taxonomy,
    split: &SplitAssignment,
) -> Result<f64> {
    if true_leaves.is_empty() {
        return Err(Error::Metric("empty prediction set".into()));
    }
    if predicted_leaves.len() != true_leaves.len() {
        return Err(Error::LengthMismatch {
            expected: true_leaves.len(),
            got: predicted_leaves.len(),
        });
    }
    let mut correct = 0usize;
    for (&pred, &truth) in predicted_leaves.iter().zip(true_leaves) {
        let lsa = split.lowest_seen_ancestor(taxonomy, truth)?;
        let lifted = taxonomy.ancestor_at_depth(pred, taxonomy.depth(lsa)?);
        correct += (lifted == lsa) as usize;
    }
    Ok(correct as f64 / true_leaves.len() as f64)
}

/// Fraction of unseen-leaf samples for which the class predicted at the
/// depth of the true lowest seen ancestor is that ancestor.
///
/// `predicted_by_depth[i]` maps a depth to the class predicted for sample
/// `i` at that depth.
pub fn acc_aware(
    predicted_by_depth: &[BTreeMap<usize, NodeId>],
    true_leaves: &[NodeId],
    taxonomy: &Taxonomy,
    split: &SplitAssignment,
) -> Result<f64> {
    if true_leaves.is_empty() {
        return Err(Error::Metric("empty prediction set".into()));
    }
    if predicted_by_depth.len() != true_leaves.len() {
        return Err(Error::LengthMismatch {
            expected: true_leaves.len(),
            got: predicted_by_depth.len(),
        });
    }
    let mut correct = 0usize;
    for (preds, &truth) in predicted_by_depth.iter().zip(true_leaves) {
        let lsa = split.lowest_seen_ancestor(taxonomy, truth)?;
        let depth = taxonomy.depth(lsa)?;
        let pred = preds
            .get(&depth)
            .ok_or_else(|| Error::Metric(format!("no prediction at depth {depth}")))?;
        correct += (*pred == lsa) as usize;
    }
    Ok(correct as f64 / true_leaves.len() as f64)
}
