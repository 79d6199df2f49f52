//! Hierarchy-aware losses and their gradients.
//!
//! * `T`  triplet hinge on negative cosine similarity.
//! * `B`  binary cross-entropy per non-root node (subtree membership), averaged.
//! * `PL` softmax cross-entropy per classification level, summed.
//! * `L`  softmax cross-entropy over the leaves.
//!
//! Every function returns the loss together with its gradient so the model
//! can backpropagate without a tape. Cross-entropies work from logits in
//! log-sum-exp form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const DEFAULT_MARGIN: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LossKind {
    Leaf,
    PerLevel,
    Binary,
    Triplet,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::Leaf, LossKind::PerLevel, LossKind::Binary, LossKind::Triplet];

    pub fn code(self) -> &'static str {
        match self {
            LossKind::Leaf => "L",
            LossKind::PerLevel => "PL",
            LossKind::Binary => "B",
            LossKind::Triplet => "T",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// A set of active losses, written like `PL+B+T`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct LossCombo {
    active: [bool; 4],
}

impl LossCombo {
    pub fn new(kinds: &[LossKind]) -> Self {
        let mut combo = LossCombo::default();
        for &k in kinds {
            combo.active[k as usize] = true;
        }
        combo
    }

    /// `L`, `L+T`, `PL`, `PL+T`, `PL+B`, `PL+B+T`.
    pub fn standard() -> Vec<LossCombo> {
        ["L", "L+T", "PL", "PL+T", "PL+B", "PL+B+T"]
            .iter()
            .map(|s| s.parse().expect("standard combos parse"))
            .collect()
    }

    pub fn contains(&self, kind: LossKind) -> bool {
        self.active[kind as usize]
    }

    pub fn kinds(&self) -> impl Iterator<Item = LossKind> + '_ {
        LossKind::ALL.into_iter().filter(|&k| self.contains(k))
    }

    pub fn is_empty(&self) -> bool {
        !self.active.iter().any(|&a| a)
    }
}

impl fmt::Display for LossCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self.kinds().map(LossKind::code).collect();
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for LossCombo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut combo = LossCombo::default();
        for part in s.split('+') {
            let kind = match part.trim() {
                "L" => LossKind::Leaf,
                "PL" => LossKind::PerLevel,
                "B" => LossKind::Binary,
                "T" => LossKind::Triplet,
                other => return Err(Error::InvalidLossConfig(format!("unknown loss `{other}` in `{s}`"))),
            };
            combo.active[kind as usize] = true;
        }
        Ok(combo)
    }
}

impl Serialize for LossCombo {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LossCombo {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Per-class weights for every classification head.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub leaf: Vec<f64>,
    pub levels: Vec<Vec<f64>>,
    pub binary: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossConfig {
    pub combo: LossCombo,
    pub margin: f64,
    pub class_weights: ClassWeights,
}

impl LossConfig {
    pub fn new(combo: LossCombo, margin: f64, class_weights: ClassWeights) -> Result<Self> {
        if combo.is_empty() {
            return Err(Error::InvalidLossConfig("no active loss".into()));
        }
        if margin.is_nan() || margin <= 0.0 {
            return Err(Error::InvalidLossConfig(format!("margin must be > 0, got {margin}")));
        }
        let all = class_weights
            .leaf
            .iter()
            .chain(class_weights.levels.iter().flatten())
            .chain(&class_weights.binary);
        for &w in all {
            if !w.is_finite() || w <= 0.0 {
                return Err(Error::InvalidLossConfig(format!("class weight {w} is not positive")));
            }
        }
        Ok(LossConfig {
            combo,
            margin,
            class_weights,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossValue {
    pub total: f64,
    pub components: BTreeMap<LossKind, f64>,
}

/// Uniformly weighted sum of the active components.
pub fn combine(components: &BTreeMap<LossKind, f64>, combo: LossCombo) -> Result<LossValue> {
    let mut kept = BTreeMap::new();
    for kind in combo.kinds() {
        let v = *components
            .get(&kind)
            .ok_or_else(|| Error::MissingComponent(kind.to_string()))?;
        kept.insert(kind, v);
    }
    Ok(LossValue {
        total: kept.values().sum(),
        components: kept,
    })
}

/// Weights inversely proportional to counts, scaled to mean 1.
pub fn class_weights(counts: &[usize]) -> Result<Vec<f64>> {
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::ZeroCount(format!("class {i}")));
    }
    let inv: Vec<f64> = counts.iter().map(|&c| 1.0 / c as f64).collect();
    let mean = inv.iter().sum::<f64>() / inv.len().max(1) as f64;
    Ok(inv.into_iter().map(|w| w / mean).collect())
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch { expected, got });
    }
    Ok(())
}

/// Negative cosine similarity, in `[-1, 1]`.
pub fn cosine_distance(u: &[f64], v: &[f64]) -> Result<f64> {
    check_len(u.len(), v.len())?;
    let (nu, nv) = (dot(u, u).sqrt(), dot(v, v).sqrt());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(-dot(u, v) / (nu * nv))
}

/// Cosine distance with its gradients with respect to `u` and `v`.
pub fn cosine_distance_with_grad(u: &[f64], v: &[f64]) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    check_len(u.len(), v.len())?;
    let (nu, nv) = (dot(u, u).sqrt(), dot(v, v).sqrt());
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::ZeroVector);
    }
    let cos = dot(u, v) / (nu * nv);
    // d cos / du = v/(|u||v|) - cos * u/|u|^2
    let gu = u
        .iter()
        .zip(v)
        .map(|(&a, &b)| -(b / (nu * nv) - cos * a / (nu * nu)))
        .collect();
    let gv = u
        .iter()
        .zip(v)
        .map(|(&a, &b)| -(a / (nu * nv) - cos * b / (nv * nv)))
        .collect();
    Ok((-cos, gu, gv))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripletLoss {
    pub value: f64,
    pub grad_anchor: Vec<f64>,
    pub grad_positive: Vec<f64>,
    pub grad_negative: Vec<f64>,
}

/// `max(0, d(a,p) - d(a,n) + margin)`; the gradient is zero unless the hinge
/// is strictly active.
pub fn triplet_loss(anchor: &[f64], positive: &[f64], negative: &[f64], margin: f64) -> Result<TripletLoss> {
    check_len(anchor.len(), negative.len())?;
    let (d_ap, ga_p, gp) = cosine_distance_with_grad(anchor, positive)?;
    let (d_an, ga_n, gn) = cosine_distance_with_grad(anchor, negative)?;
    let slack = d_ap - d_an + margin;
    if slack <= 0.0 {
        let zero = vec![0.0; anchor.len()];
        return Ok(TripletLoss {
            value: 0.0,
            grad_anchor: zero.clone(),
            grad_positive: zero.clone(),
            grad_negative: zero,
        });
    }
    Ok(TripletLoss {
        value: slack,
        grad_anchor: ga_p.iter().zip(&ga_n).map(|(p, n)| p - n).collect(),
        grad_positive: gp,
        grad_negative: gn.into_iter().map(|g| -g).collect(),
    })
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Mean weighted binary cross-entropy over the non-root nodes. The weight of
/// node `j` scales its positive term.
pub fn binary_node_loss(logits: &[f64], membership: &[bool], weights: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_len(logits.len(), membership.len())?;
    check_len(logits.len(), weights.len())?;
    let n = logits.len() as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for ((&z, &member), &w) in logits.iter().zip(membership).zip(weights) {
        if member {
            // -w log(sigmoid(z))
            loss += w * softplus(-z);
            grad.push(w * (sigmoid(z) - 1.0) / n);
        } else {
            // -log(1 - sigmoid(z))
            loss += softplus(z);
            grad.push(sigmoid(z) / n);
        }
    }
    Ok((loss / n, grad))
}

/// Weighted softmax cross-entropy: `w[target] * -log softmax(logits)[target]`.
pub fn multiclass_loss(logits: &[f64], target: usize, weights: &[f64]) -> Result<(f64, Vec<f64>)> {
    check_len(logits.len(), weights.len())?;
    if target >= logits.len() {
        return Err(Error::IndexOutOfRange {
            index: target,
            classes: logits.len(),
        });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logits.iter().map(|&z| (z - max).exp()).sum();
    let lse = max + sum.ln();
    let w = weights[target];
    let grad = logits
        .iter()
        .enumerate()
        .map(|(i, &z)| w * ((z - lse).exp() - if i == target { 1.0 } else { 0.0 }))
        .collect();
    Ok((w * (lse - logits[target]), grad))
}

/// Cross-entropy over the leaf classes.
pub fn leaf_loss(logits: &[f64], target_leaf: usize, weights: &[f64]) -> Result<(f64, Vec<f64>)> {
    multiclass_loss(logits, target_leaf, weights)
}

/// Sum of one cross-entropy per level head.
pub fn per_level_loss(heads: &[(&[f64], usize)], weights: &[Vec<f64>]) -> Result<(f64, Vec<Vec<f64>>)> {
    check_len(weights.len(), heads.len())?;
    let mut total = 0.0;
    let mut grads = Vec::with_capacity(heads.len());
    for ((logits, target), w) in heads.iter().zip(weights) {
        let (l, g) = multiclass_loss(logits, *target, w)?;
        total += l;
        grads.push(g);
    }
    Ok((total, grads))
}
