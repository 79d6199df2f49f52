//! Feed-forward embedder with linear prediction heads, trained on offline
//! mined triplets.
//!
//! The embedder is a stack of affine layers with `tanh` between them (none
//! after the last). Heads read the raw embedding: one over the seen leaves
//! (`L`), one per classification level (`PL`), and one sigmoid output per
//! non-root node (`B`). The triplet loss (`T`) acts on the embedding alone.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::datasplit::{SplitAssignment, Subset};
use crate::error::{Error, Result};
use crate::losses::{
    binary_node_loss, class_weights, combine, leaf_loss, per_level_loss, triplet_loss, ClassWeights, LossCombo,
    LossConfig, LossKind, LossValue, DEFAULT_MARGIN,
};
use crate::sampler::{enumerate_node_triples, TripletInstance, TripletSampler};
use crate::seeding::{epoch_seed, rng_for, Purpose};
use crate::taxonomy::{NodeId, Taxonomy};

/// An affine map `y = W x + b`, `W` stored row-major as `outputs x inputs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng + ?Sized>(inputs: usize, outputs: usize, rng: &mut R) -> Self {
        let limit = (6.0 / (inputs + outputs) as f64).sqrt();
        Dense {
            inputs,
            outputs,
            weights: (0..inputs * outputs).map(|_| rng.random_range(-limit..limit)).collect(),
            bias: vec![0.0; outputs],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.inputs);
        self.weights
            .chunks_exact(self.inputs)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }

    /// Accumulates parameter gradients into `grad` and returns `dL/dx`.
    fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Dense) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
            let grow = &mut grad.weights[o * self.inputs..(o + 1) * self.inputs];
            for i in 0..self.inputs {
                grow[i] += g * x[i];
                dx[i] += g * row[i];
            }
            grad.bias[o] += g;
        }
        dx
    }

    fn zeros_like(&self) -> Self {
        Dense::zeros(self.inputs, self.outputs)
    }
}

/// Class layout of every head, by node name, derived from the seen taxonomy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskLayout {
    pub leaf_classes: Vec<String>,
    pub levels: Vec<LevelLayout>,
    pub binary_nodes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelLayout {
    pub depth: usize,
    pub classes: Vec<String>,
}

/// Head targets of one sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Targets {
    pub leaf: usize,
    pub levels: Vec<usize>,
    pub membership: Vec<bool>,
}

impl TaskLayout {
    pub fn from_taxonomy(taxonomy: &Taxonomy) -> Self {
        let names = |ids: &[NodeId]| ids.iter().map(|&n| taxonomy.name(n).to_string()).collect();
        TaskLayout {
            leaf_classes: names(taxonomy.leaves()),
            levels: taxonomy
                .levels_with_multiple_classes()
                .into_iter()
                .map(|l| LevelLayout {
                    depth: l.depth,
                    classes: names(&l.classes),
                })
                .collect(),
            binary_nodes: (1..taxonomy.len()).map(|n| taxonomy.name(n).to_string()).collect(),
        }
    }

    /// Targets of a leaf of `taxonomy`, which must be the tree the layout
    /// was built from.
    pub fn targets(&self, taxonomy: &Taxonomy, leaf: NodeId) -> Targets {
        let name_pos = |classes: &[String], id: NodeId| {
            classes
                .iter()
                .position(|c| c == taxonomy.name(id))
                .expect("layout matches taxonomy")
        };
        Targets {
            leaf: name_pos(&self.leaf_classes, leaf),
            levels: self
                .levels
                .iter()
                .map(|l| name_pos(&l.classes, taxonomy.ancestor_at_depth(leaf, l.depth)))
                .collect(),
            membership: (1..taxonomy.len())
                .map(|n| taxonomy.is_ancestor_or_self(n, leaf))
                .collect(),
        }
    }
}

/// Head outputs of one forward pass.
#[derive(Clone, Debug, PartialEq)]
pub struct Forward {
    pub embedding: Vec<f64>,
    pub leaf: Option<Vec<f64>>,
    pub levels: Vec<Vec<f64>>,
    pub binary: Option<Vec<f64>>,
}

struct Trace {
    /// Input of every embedder layer.
    inputs: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelShape {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub embedding_dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    pub embedder: Vec<Dense>,
    pub leaf_head: Option<Dense>,
    pub level_heads: Vec<Dense>,
    pub binary_head: Option<Dense>,
}

impl EmbeddingModel {
    /// Initialises the embedder, then the heads in the order leaf, levels,
    /// binary; only heads of active losses are created.
    pub fn new<R: Rng + ?Sized>(shape: &ModelShape, layout: &TaskLayout, combo: LossCombo, rng: &mut R) -> Self {
        let mut dims = vec![shape.input_dim];
        dims.extend(&shape.hidden);
        dims.push(shape.embedding_dim);
        let embedder = dims.windows(2).map(|w| Dense::init(w[0], w[1], rng)).collect();
        let e = shape.embedding_dim;
        let leaf_head = combo
            .contains(LossKind::Leaf)
            .then(|| Dense::init(e, layout.leaf_classes.len(), rng));
        let level_heads = if combo.contains(LossKind::PerLevel) {
            layout
                .levels
                .iter()
                .map(|l| Dense::init(e, l.classes.len(), rng))
                .collect()
        } else {
            Vec::new()
        };
        let binary_head = combo
            .contains(LossKind::Binary)
            .then(|| Dense::init(e, layout.binary_nodes.len(), rng));
        EmbeddingModel {
            embedder,
            leaf_head,
            level_heads,
            binary_head,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.embedder[0].inputs
    }

    pub fn embedding_dim(&self) -> usize {
        self.embedder.last().expect("embedder has layers").outputs
    }

    pub fn zeros_like(&self) -> Self {
        EmbeddingModel {
            embedder: self.embedder.iter().map(Dense::zeros_like).collect(),
            leaf_head: self.leaf_head.as_ref().map(Dense::zeros_like),
            level_heads: self.level_heads.iter().map(Dense::zeros_like).collect(),
            binary_head: self.binary_head.as_ref().map(Dense::zeros_like),
        }
    }

    /// Every layer in a fixed order: embedder, leaf, levels, binary.
    pub fn layers(&self) -> Vec<&Dense> {
        let mut out: Vec<&Dense> = self.embedder.iter().collect();
        out.extend(self.leaf_head.iter());
        out.extend(self.level_heads.iter());
        out.extend(self.binary_head.iter());
        out
    }

    pub fn layers_mut(&mut self) -> Vec<&mut Dense> {
        let mut out: Vec<&mut Dense> = self.embedder.iter_mut().collect();
        out.extend(self.leaf_head.iter_mut());
        out.extend(self.level_heads.iter_mut());
        out.extend(self.binary_head.iter_mut());
        out
    }

    pub fn flat_params(&self) -> Vec<f64> {
        self.layers()
            .into_iter()
            .flat_map(|l| l.weights.iter().chain(&l.bias).copied())
            .collect()
    }

    pub fn set_flat_params(&mut self, params: &[f64]) {
        let mut it = params.iter().copied();
        for layer in self.layers_mut() {
            for w in layer.weights.iter_mut().chain(layer.bias.iter_mut()) {
                *w = it.next().expect("parameter count matches");
            }
        }
        assert!(it.next().is_none(), "parameter count matches");
    }

    pub fn embed(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.embed_traced(x).0)
    }

    pub fn forward(&self, x: &[f64]) -> Result<Forward> {
        self.check_input(x)?;
        let (embedding, _) = self.embed_traced(x);
        Ok(self.heads(embedding))
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_dim() {
            return Err(Error::LengthMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }

    fn embed_traced(&self, x: &[f64]) -> (Vec<f64>, Trace) {
        let mut inputs = Vec::with_capacity(self.embedder.len());
        let mut h = x.to_vec();
        let last = self.embedder.len() - 1;
        for (i, layer) in self.embedder.iter().enumerate() {
            let mut out = layer.forward(&h);
            if i < last {
                out.iter_mut().for_each(|v| *v = v.tanh());
            }
            inputs.push(std::mem::replace(&mut h, out));
        }
        (h, Trace { inputs })
    }

    fn heads(&self, embedding: Vec<f64>) -> Forward {
        Forward {
            leaf: self.leaf_head.as_ref().map(|h| h.forward(&embedding)),
            levels: self.level_heads.iter().map(|h| h.forward(&embedding)).collect(),
            binary: self.binary_head.as_ref().map(|h| h.forward(&embedding)),
            embedding,
        }
    }

    /// Backpropagates head and embedding gradients of one sample into `grads`.
    fn backward(&self, trace: &Trace, out: &Forward, d: &SampleGrad, grads: &mut EmbeddingModel) {
        let mut d_emb = d.embedding.clone();
        let mut add = |v: Vec<f64>| d_emb.iter_mut().zip(v).for_each(|(a, b)| *a += b);
        if let (Some(head), Some(g), Some(dl)) = (&self.leaf_head, grads.leaf_head.as_mut(), &d.leaf) {
            add(head.backward(&out.embedding, dl, g));
        }
        for ((head, g), dl) in self.level_heads.iter().zip(grads.level_heads.iter_mut()).zip(&d.levels) {
            if let Some(dl) = dl {
                add(head.backward(&out.embedding, dl, g));
            }
        }
        if let (Some(head), Some(g), Some(dl)) = (&self.binary_head, grads.binary_head.as_mut(), &d.binary) {
            add(head.backward(&out.embedding, dl, g));
        }

        let mut dy = d_emb;
        let last = self.embedder.len() - 1;
        for i in (0..self.embedder.len()).rev() {
            if i < last {
                // output of layer i is the input of layer i + 1
                for (g, y) in dy.iter_mut().zip(&trace.inputs[i + 1]) {
                    *g *= 1.0 - y * y;
                }
            }
            dy = self.embedder[i].backward(&trace.inputs[i], &dy, &mut grads.embedder[i]);
        }
    }
}

struct SampleGrad {
    embedding: Vec<f64>,
    leaf: Option<Vec<f64>>,
    levels: Vec<Option<Vec<f64>>>,
    binary: Option<Vec<f64>>,
}

impl SampleGrad {
    fn zeros(dim: usize, levels: usize) -> Self {
        SampleGrad {
            embedding: vec![0.0; dim],
            leaf: None,
            levels: vec![None; levels],
            binary: None,
        }
    }
}

fn add_scaled(acc: &mut Option<Vec<f64>>, g: &[f64], scale: f64) {
    let acc = acc.get_or_insert_with(|| vec![0.0; g.len()]);
    acc.iter_mut().zip(g).for_each(|(a, b)| *a += scale * b);
}

/// Loss configuration plus per-sample targets for one training run.
#[derive(Clone, Debug)]
pub struct Objective {
    pub loss: LossConfig,
    /// Head targets by dataset position; `None` for samples of unseen leaves.
    pub targets: Vec<Option<Targets>>,
}

impl Objective {
    /// Loss of `model` with the classification terms averaged over
    /// `class_samples` and the triplet term averaged over `triplets`.
    /// Gradients are returned when `with_grad` is set.
    pub fn evaluate(
        &self,
        model: &EmbeddingModel,
        dataset: &Dataset,
        class_samples: &[usize],
        triplets: &[TripletInstance],
        with_grad: bool,
    ) -> Result<(LossValue, Option<EmbeddingModel>)> {
        let combo = self.loss.combo;
        let weights = &self.loss.class_weights;
        let use_triplets = combo.contains(LossKind::Triplet);

        let mut slots: BTreeMap<usize, usize> = BTreeMap::new();
        for &s in class_samples {
            let n = slots.len();
            slots.entry(s).or_insert(n);
        }
        if use_triplets {
            for t in triplets {
                for s in [t.anchor, t.positive, t.negative] {
                    let n = slots.len();
                    slots.entry(s).or_insert(n);
                }
            }
        }
        let mut order: Vec<(usize, usize)> = slots.iter().map(|(&s, &i)| (i, s)).collect();
        order.sort_unstable();
        let mut passes = Vec::with_capacity(order.len());
        for &(_, s) in &order {
            let x = dataset.features(s);
            model.check_input(x)?;
            let (emb, trace) = model.embed_traced(x);
            passes.push((model.heads(emb), trace));
        }
        let dim = model.embedding_dim();
        let mut dgrads: Vec<SampleGrad> = (0..passes.len())
            .map(|_| SampleGrad::zeros(dim, model.level_heads.len()))
            .collect();

        let mut comps: BTreeMap<LossKind, f64> = BTreeMap::new();
        if !class_samples.is_empty() {
            let scale = 1.0 / class_samples.len() as f64;
            for &s in class_samples {
                let slot = slots[&s];
                let out = &passes[slot].0;
                let tg = self.targets[s].as_ref().ok_or_else(|| {
                    Error::UnknownLeaf(format!("sample `{}` has no seen label", dataset.samples[s].id))
                })?;
                let d = &mut dgrads[slot];
                if let Some(logits) = &out.leaf {
                    let (l, g) = leaf_loss(logits, tg.leaf, &weights.leaf)?;
                    *comps.entry(LossKind::Leaf).or_default() += scale * l;
                    add_scaled(&mut d.leaf, &g, scale);
                }
                if combo.contains(LossKind::PerLevel) {
                    let heads: Vec<(&[f64], usize)> = out
                        .levels
                        .iter()
                        .map(Vec::as_slice)
                        .zip(tg.levels.iter().copied())
                        .collect();
                    let (l, gs) = per_level_loss(&heads, &weights.levels)?;
                    *comps.entry(LossKind::PerLevel).or_default() += scale * l;
                    for (acc, g) in d.levels.iter_mut().zip(&gs) {
                        add_scaled(acc, g, scale);
                    }
                }
                if let Some(logits) = &out.binary {
                    let (l, g) = binary_node_loss(logits, &tg.membership, &weights.binary)?;
                    *comps.entry(LossKind::Binary).or_default() += scale * l;
                    add_scaled(&mut d.binary, &g, scale);
                }
            }
        }
        for kind in [LossKind::Leaf, LossKind::PerLevel, LossKind::Binary] {
            if combo.contains(kind) {
                comps.entry(kind).or_insert(0.0);
            }
        }
        if use_triplets {
            let mut total = 0.0;
            if !triplets.is_empty() {
                let scale = 1.0 / triplets.len() as f64;
                for t in triplets {
                    let (a, p, n) = (slots[&t.anchor], slots[&t.positive], slots[&t.negative]);
                    let tl = triplet_loss(
                        &passes[a].0.embedding,
                        &passes[p].0.embedding,
                        &passes[n].0.embedding,
                        self.loss.margin,
                    )?;
                    total += scale * tl.value;
                    if tl.value > 0.0 {
                        for (slot, g) in [(a, &tl.grad_anchor), (p, &tl.grad_positive), (n, &tl.grad_negative)] {
                            dgrads[slot]
                                .embedding
                                .iter_mut()
                                .zip(g)
                                .for_each(|(acc, v)| *acc += scale * v);
                        }
                    }
                }
            }
            comps.insert(LossKind::Triplet, total);
        }
        let value = combine(&comps, combo)?;

        if !with_grad {
            return Ok((value, None));
        }
        let mut grads = model.zeros_like();
        for ((out, trace), d) in passes.iter().zip(&dgrads) {
            model.backward(trace, out, d, &mut grads);
        }
        Ok((value, Some(grads)))
    }
}

/// Adaptive moment estimation.
#[derive(Clone, Debug)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    step: i32,
    m: EmbeddingModel,
    v: EmbeddingModel,
}

impl Adam {
    pub fn new(model: &EmbeddingModel, learning_rate: f64) -> Self {
        Adam {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            step: 0,
            m: model.zeros_like(),
            v: model.zeros_like(),
        }
    }

    pub fn update(&mut self, model: &mut EmbeddingModel, grads: &EmbeddingModel) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let layers = model
            .layers_mut()
            .into_iter()
            .zip(grads.layers())
            .zip(self.m.layers_mut())
            .zip(self.v.layers_mut());
        for (((p, g), m), v) in layers {
            let params = p.weights.iter_mut().chain(p.bias.iter_mut());
            let gs = g.weights.iter().chain(&g.bias);
            let ms = m.weights.iter_mut().chain(m.bias.iter_mut());
            let vs = v.weights.iter_mut().chain(v.bias.iter_mut());
            for (((w, &g), m), v) in params.zip(gs).zip(ms).zip(vs) {
                *m = self.beta1 * *m + (1.0 - self.beta1) * g;
                *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
                *w -= self.learning_rate * (*m / c1) / ((*v / c2).sqrt() + self.epsilon);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub embedding_dim: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub margin: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: vec![64],
            embedding_dim: 32,
            epochs: 50,
            batch_size: 32,
            learning_rate: 1e-3,
            margin: DEFAULT_MARGIN,
        }
    }
}

/// A model together with everything needed to interpret its heads.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedModel {
    pub combo: LossCombo,
    pub seed: u64,
    pub config: TrainConfig,
    pub layout: TaskLayout,
    pub class_weights: ClassWeights,
    pub model: EmbeddingModel,
}

impl TrainedModel {
    pub fn embed_all(&self, dataset: &Dataset, samples: &[usize]) -> Result<Vec<Vec<f64>>> {
        samples.iter().map(|&s| self.model.embed(dataset.features(s))).collect()
    }

    pub fn forward_all(&self, dataset: &Dataset, samples: &[usize]) -> Result<Vec<Forward>> {
        samples
            .iter()
            .map(|&s| self.model.forward(dataset.features(s)))
            .collect()
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut tensors = Vec::new();
        let mut push = |name: String, layer: &Dense| {
            tensors.push(Tensor {
                name: format!("{name}.weight"),
                shape: vec![layer.outputs, layer.inputs],
                data: layer.weights.clone(),
            });
            tensors.push(Tensor {
                name: format!("{name}.bias"),
                shape: vec![layer.outputs],
                data: layer.bias.clone(),
            });
        };
        for (i, l) in self.model.embedder.iter().enumerate() {
            push(format!("embedder.{i}"), l);
        }
        if let Some(l) = &self.model.leaf_head {
            push("head.leaf".into(), l);
        }
        for (i, l) in self.model.level_heads.iter().enumerate() {
            push(format!("head.level.{i}"), l);
        }
        if let Some(l) = &self.model.binary_head {
            push("head.binary".into(), l);
        }
        Checkpoint {
            combo: self.combo,
            seed: self.seed,
            config: self.config.clone(),
            layout: self.layout.clone(),
            class_weights: self.class_weights.clone(),
            tensors,
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        let by_name: BTreeMap<&str, &Tensor> = ck.tensors.iter().map(|t| (t.name.as_str(), t)).collect();
        let layer = |name: &str| -> Result<Option<Dense>> {
            let (Some(w), Some(b)) = (
                by_name.get(format!("{name}.weight").as_str()),
                by_name.get(format!("{name}.bias").as_str()),
            ) else {
                return Ok(None);
            };
            if w.shape.len() != 2 || w.shape[0] * w.shape[1] != w.data.len() || b.data.len() != w.shape[0] {
                return Err(Error::Config(format!("tensor `{name}` has inconsistent shape")));
            }
            Ok(Some(Dense {
                inputs: w.shape[1],
                outputs: w.shape[0],
                weights: w.data.clone(),
                bias: b.data.clone(),
            }))
        };
        let mut embedder = Vec::new();
        while let Some(l) = layer(&format!("embedder.{}", embedder.len()))? {
            embedder.push(l);
        }
        if embedder.is_empty() {
            return Err(Error::Config("checkpoint has no embedder layers".into()));
        }
        let mut level_heads = Vec::new();
        while let Some(l) = layer(&format!("head.level.{}", level_heads.len()))? {
            level_heads.push(l);
        }
        Ok(TrainedModel {
            combo: ck.combo,
            seed: ck.seed,
            config: ck.config.clone(),
            layout: ck.layout.clone(),
            class_weights: ck.class_weights.clone(),
            model: EmbeddingModel {
                embedder,
                leaf_head: layer("head.leaf")?,
                level_heads,
                binary_head: layer("head.binary")?,
            },
        })
    }

    pub fn write_checkpoint(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(&self.to_checkpoint())?;
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_checkpoint(&serde_json::from_str(&text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

/// On-disk model: config echo, head layout and flat parameter tensors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub combo: LossCombo,
    pub seed: u64,
    pub config: TrainConfig,
    pub layout: TaskLayout,
    pub class_weights: ClassWeights,
    pub tensors: Vec<Tensor>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    pub train: LossValue,
    pub valid: LossValue,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub epochs: Vec<EpochLog>,
    /// Epoch whose parameters were kept; `None` means the initial model.
    pub best_epoch: Option<usize>,
    pub best_valid: f64,
    /// Training loss of every optimiser step, in order.
    pub step_losses: Vec<f64>,
}

impl TrainingLog {
    /// Long-format CSV: `epoch,component,value`.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "component", "value"])?;
        for e in &self.epochs {
            for (split, v) in [("train", &e.train), ("valid", &e.valid)] {
                w.write_record([e.epoch.to_string(), format!("{split}/total"), v.total.to_string()])?;
                for (k, c) in &v.components {
                    w.write_record([e.epoch.to_string(), format!("{split}/{k}"), c.to_string()])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Counts of training samples per class for every head.
fn training_class_weights(layout: &TaskLayout, targets: &[Option<Targets>], train: &[usize]) -> Result<ClassWeights> {
    let mut leaf = vec![0usize; layout.leaf_classes.len()];
    let mut levels: Vec<Vec<usize>> = layout.levels.iter().map(|l| vec![0; l.classes.len()]).collect();
    let mut binary = vec![0usize; layout.binary_nodes.len()];
    for &s in train {
        let t = targets[s].as_ref().expect("training samples have seen labels");
        leaf[t.leaf] += 1;
        for (counts, &c) in levels.iter_mut().zip(&t.levels) {
            counts[c] += 1;
        }
        for (count, &m) in binary.iter_mut().zip(&t.membership) {
            *count += m as usize;
        }
    }
    Ok(ClassWeights {
        leaf: class_weights(&leaf)?,
        levels: levels.iter().map(|c| class_weights(c)).collect::<Result<_>>()?,
        binary: class_weights(&binary)?,
    })
}

/// Trains one loss combination on one fold.
///
/// `seed` is the fold seed: parameters come from its init stream and epoch
/// `e` draws its triplets and batch order from `seed + e`. After every epoch
/// the validation loss is measured (classification terms over the whole
/// validation partition, the triplet term over validation triplets drawn
/// once); the parameters with the lowest validation loss are returned.
pub fn fit(
    dataset: &Dataset,
    taxonomy: &Taxonomy,
    split: &SplitAssignment,
    combo: LossCombo,
    config: &TrainConfig,
    seed: u64,
) -> Result<(TrainedModel, TrainingLog)> {
    let seen = split.pruned_seen_taxonomy(taxonomy)?;
    let layout = TaskLayout::from_taxonomy(&seen.taxonomy);
    let targets: Vec<Option<Targets>> = dataset
        .samples
        .iter()
        .map(|s| {
            seen.taxonomy
                .leaf_id(&s.leaf)
                .ok()
                .map(|l| layout.targets(&seen.taxonomy, l))
        })
        .collect();
    let train = split.indices(Subset::Train);
    let valid = split.indices(Subset::Valid);
    if train.is_empty() || valid.is_empty() {
        return Err(Error::InvalidSplit(
            "train and valid partitions must be non-empty".into(),
        ));
    }
    let weights = training_class_weights(&layout, &targets, &train)?;
    let objective = Objective {
        loss: LossConfig::new(combo, config.margin, weights.clone())?,
        targets,
    };
    if config.batch_size == 0 {
        return Err(Error::Config("batch_size must be positive".into()));
    }

    let input_dim = dataset
        .feature_dim()
        .ok_or_else(|| Error::Config("empty dataset".into()))?;
    let shape = ModelShape {
        input_dim,
        hidden: config.hidden.clone(),
        embedding_dim: config.embedding_dim,
    };
    let mut model = EmbeddingModel::new(&shape, &layout, combo, &mut rng_for(seed, Purpose::ModelInit));
    let mut adam = Adam::new(&model, config.learning_rate);

    let triples = enumerate_node_triples(&seen.taxonomy)?;
    let sampler = TripletSampler::new(&seen.taxonomy, triples.clone(), dataset, &train)?;
    let valid_triplets = TripletSampler::new(&seen.taxonomy, triples, dataset, &valid)?
        .instantiate_feasible(&mut rng_for(seed, Purpose::ValidationTriplets));

    let validate = |m: &EmbeddingModel| {
        objective
            .evaluate(m, dataset, &valid, &valid_triplets, false)
            .map(|(v, _)| v)
    };
    let mut log = TrainingLog {
        best_valid: validate(&model)?.total,
        ..TrainingLog::default()
    };
    let mut best = model.clone();

    for epoch in 0..config.epochs {
        let mut rng = rng_for(epoch_seed(seed, epoch), Purpose::Epoch);
        let mut instances = sampler.instantiate_with(&mut rng)?;
        instances.shuffle(&mut rng);
        let mut sums: BTreeMap<LossKind, f64> = BTreeMap::new();
        let steps = instances.chunks(config.batch_size).len();
        for (step, batch) in instances.chunks(config.batch_size).enumerate() {
            let members: Vec<usize> = batch.iter().flat_map(|t| [t.anchor, t.positive, t.negative]).collect();
            let (value, grads) = objective.evaluate(&model, dataset, &members, batch, true)?;
            if !value.total.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    step,
                    detail: format!("{:?}", value.components),
                });
            }
            adam.update(&mut model, &grads.expect("requested gradients"));
            log.step_losses.push(value.total);
            for (k, v) in value.components {
                *sums.entry(k).or_default() += v / steps as f64;
            }
        }
        let train_value = combine(&sums, combo)?;
        let valid_value = validate(&model)?;
        if valid_value.total < log.best_valid {
            log.best_valid = valid_value.total;
            log.best_epoch = Some(epoch);
            best = model.clone();
        }
        log::debug!(
            "epoch {epoch}: train {:.4} valid {:.4}",
            train_value.total,
            valid_value.total
        );
        log.epochs.push(EpochLog {
            epoch,
            train: train_value,
            valid: valid_value,
        });
    }

    Ok((
        TrainedModel {
            combo,
            seed,
            config: config.clone(),
            layout,
            class_weights: weights,
            model: best,
        },
        log,
    ))
}

/// Writes `model` and `log` as `checkpoint.json` and `log.csv` under `dir`.
pub fn save_run(dir: impl AsRef<Path>, model: &TrainedModel, log: &TrainingLog) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    model.write_checkpoint(dir.join("checkpoint.json"))?;
    log.write_csv(dir.join("log.csv"))?;
    let summary = dir.join("best_epoch.txt");
    let mut f = fs::File::create(&summary).map_err(|e| Error::io(&summary, e))?;
    let best = log.best_epoch.map_or("init".to_string(), |e| e.to_string());
    writeln!(f, "{best} {}", log.best_valid).map_err(|e| Error::io(&summary, e))
}
