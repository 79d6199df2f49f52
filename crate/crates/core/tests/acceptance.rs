//! Acceptance checks. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any fails.
//!
//! Run: cargo test --release --test acceptance

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::Instant;

use hierembed::dataset::Dataset;
use hierembed::datasplit::{LeafFold, SplitAssignment, SplitRatios, Subset};
use hierembed::evaluate::MetricsReport;
use hierembed::experiment::{
    run_dir, run_experiment, ExperimentConfig, AGGREGATE_FILE, DATASET_FILE, SPLIT_FILE, TAXONOMY_FILE,
};
use hierembed::losses::{cosine_distance, ClassWeights, LossCombo, LossConfig, LossKind, DEFAULT_MARGIN};
use hierembed::metrics::{mnr, ndcg, rank_by_cosine, RankedList, RelevanceKind};
use hierembed::model::{fit, EmbeddingModel, ModelShape, Objective, TaskLayout, TrainConfig};
use hierembed::sampler::{count_node_triples, enumerate_node_triples, TripletInstance, TripletSampler};
use hierembed::taxonomy::{NodeId, Taxonomy, TreeSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_dataset, random_tree, random_uniform_tree, small_tree};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------------------------------------------------------------- 1

fn random_weights<R: Rng>(r: &mut R, layout: &TaskLayout) -> ClassWeights {
    let mut draw = |n: usize| (0..n).map(|_| r.random_range(0.5..2.0)).collect::<Vec<f64>>();
    ClassWeights {
        leaf: draw(layout.leaf_classes.len()),
        levels: layout.levels.iter().map(|l| draw(l.classes.len())).collect(),
        binary: draw(layout.binary_nodes.len()),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let combos: Vec<LossCombo> = ["T", "L", "PL", "B", "L+T", "PL+T", "PL+B", "PL+B+T", "L+PL+B+T"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for seed in 0..20u64 {
        let mut r = rng(seed);
        let t = random_tree(&mut r, 3);
        let data = random_dataset(&mut r, &t, 3, 8);
        let layout = TaskLayout::from_taxonomy(&t);
        let targets = data
            .samples
            .iter()
            .map(|s| Some(layout.targets(&t, t.leaf_id(&s.leaf).unwrap())))
            .collect::<Vec<_>>();
        let weights = random_weights(&mut r, &layout);
        let pool: Vec<usize> = (0..data.len()).collect();
        let class_samples: Vec<usize> = (0..6).map(|_| r.random_range(0..data.len())).collect();
        let sampler = TripletSampler::new(&t, enumerate_node_triples(&t).unwrap(), &data, &pool).unwrap();
        let shape = ModelShape {
            input_dim: 8,
            hidden: vec![16],
            embedding_dim: 4,
        };
        for &combo in &combos {
            let model = EmbeddingModel::new(&shape, &layout, combo, &mut r);
            // keep away from the hinge kink so finite differences are valid
            let triplets: Vec<TripletInstance> = sampler
                .instantiate_with(&mut r)
                .unwrap()
                .into_iter()
                .filter(|tr| {
                    let e = |i: usize| model.embed(data.features(i)).unwrap();
                    let (a, p, n) = (e(tr.anchor), e(tr.positive), e(tr.negative));
                    let slack = cosine_distance(&a, &p).unwrap() - cosine_distance(&a, &n).unwrap() + DEFAULT_MARGIN;
                    slack.abs() > 1e-3
                })
                .take(6)
                .collect();
            let objective = Objective {
                loss: LossConfig::new(combo, DEFAULT_MARGIN, weights.clone()).unwrap(),
                targets: targets.clone(),
            };
            let loss = |m: &EmbeddingModel| {
                objective
                    .evaluate(m, &data, &class_samples, &triplets, false)
                    .unwrap()
                    .0
                    .total
            };
            let (_, grads) = objective
                .evaluate(&model, &data, &class_samples, &triplets, true)
                .unwrap();
            let analytic = grads.unwrap().flat_params();
            let base = model.flat_params();
            let mut probe = model.clone();
            let mut numeric = vec![0.0; base.len()];
            for i in 0..base.len() {
                let mut p = base.clone();
                p[i] = base[i] + h;
                probe.set_flat_params(&p);
                let up = loss(&probe);
                p[i] = base[i] - h;
                probe.set_flat_params(&p);
                let down = loss(&probe);
                numeric[i] = (up - down) / (2.0 * h);
            }
            let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
            let scale = norm(&analytic).max(norm(&numeric));
            let rel = if scale == 0.0 { 0.0 } else { norm(&diff) / scale };
            worst = worst.max(rel);
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-4 && secs < 30.0,
        format!("max relative error {worst:.2e} over {cases} seed/combination cases (< 1e-4), {secs:.1}s (< 30s)"),
    )
}

// ---------------------------------------------------------------- 2

/// Independent tree bookkeeping built from parent links only.
struct Oracle {
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
    leaf: Vec<bool>,
}

impl Oracle {
    fn new(t: &Taxonomy) -> Self {
        let parent: Vec<Option<usize>> = (0..t.len()).map(|n| t.parent(n)).collect();
        let depth = (0..t.len())
            .map(|mut n| {
                let mut d = 0;
                while let Some(p) = parent[n] {
                    n = p;
                    d += 1;
                }
                d
            })
            .collect();
        let leaf = (0..t.len()).map(|n| !parent.contains(&Some(n))).collect();
        Oracle { parent, depth, leaf }
    }

    fn ancestor(&self, mut n: usize, d: usize) -> usize {
        while self.depth[n] > d {
            n = self.parent[n].unwrap();
        }
        n
    }

    fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while a != b {
            if self.depth[a] >= self.depth[b] {
                a = self.parent[a].unwrap();
            } else {
                b = self.parent[b].unwrap();
            }
        }
        a
    }

    fn leaves(&self) -> Vec<usize> {
        (0..self.leaf.len()).filter(|&n| self.leaf[n]).collect()
    }

    fn height(&self) -> usize {
        self.leaves().iter().map(|&l| self.depth[l]).max().unwrap()
    }

    fn diameter(&self) -> usize {
        let leaves = self.leaves();
        let mut best = 0;
        for &a in &leaves {
            for &b in &leaves {
                let l = self.lca(a, b);
                best = best.max(self.depth[a] + self.depth[b] - 2 * self.depth[l]);
            }
        }
        best
    }

    fn levels(&self) -> Vec<usize> {
        (1..=self.height())
            .filter(|&d| {
                (0..self.leaf.len())
                    .filter(|&n| self.depth[n] == d || (self.leaf[n] && self.depth[n] < d))
                    .count()
                    >= 2
            })
            .collect()
    }

    fn relevance(&self, a: usize, b: usize, sum: bool) -> f64 {
        let l = self.lca(a, b);
        let (da, db) = (
            (self.depth[a] - self.depth[l]) as f64,
            (self.depth[b] - self.depth[l]) as f64,
        );
        if sum {
            1.0 - (da + db) / self.diameter() as f64
        } else {
            1.0 - da.max(db) / self.height() as f64
        }
    }
}

fn cosine(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (norm(a) * norm(b))
}

/// Rank (1-based) of every candidate of `q`, counted directly.
fn oracle_ranks(emb: &[Vec<f64>], q: usize) -> BTreeMap<usize, usize> {
    let others: Vec<usize> = (0..emb.len()).filter(|&c| c != q).collect();
    others
        .iter()
        .map(|&c| {
            let s = cosine(&emb[q], &emb[c]);
            let ahead = others
                .iter()
                .filter(|&&o| {
                    let so = cosine(&emb[q], &emb[o]);
                    o != c && (so > s || (so == s && o < c))
                })
                .count();
            (c, ahead + 1)
        })
        .collect()
}

fn oracle_mnr(o: &Oracle, emb: &[Vec<f64>], leaves: &[usize]) -> Option<f64> {
    let levels = o.levels();
    let mut per_query = Vec::new();
    for q in 0..emb.len() {
        let ranks = oracle_ranks(emb, q);
        let n = ranks.len() as f64;
        let mut per_level = Vec::new();
        for &d in &levels {
            let node = o.ancestor(leaves[q], d.min(o.depth[leaves[q]]));
            let hits: Vec<f64> = ranks
                .iter()
                .filter(|(&c, _)| o.depth[leaves[c]] >= o.depth[node] && o.ancestor(leaves[c], o.depth[node]) == node)
                .map(|(_, &r)| (r as f64 - 1.0) / n)
                .collect();
            if !hits.is_empty() {
                per_level.push(hits.iter().sum::<f64>() / hits.len() as f64);
            }
        }
        if !per_level.is_empty() {
            per_query.push(per_level.iter().sum::<f64>() / per_level.len() as f64);
        }
    }
    (!per_query.is_empty()).then(|| per_query.iter().sum::<f64>() / per_query.len() as f64)
}

fn oracle_ndcg(o: &Oracle, emb: &[Vec<f64>], leaves: &[usize], sum: bool) -> Option<f64> {
    let mut scores = Vec::new();
    for q in 0..emb.len() {
        let ranks = oracle_ranks(emb, q);
        let mut rels = vec![0.0; ranks.len()];
        for (&c, &r) in &ranks {
            rels[r - 1] = o.relevance(leaves[q], leaves[c], sum);
        }
        let dcg = |v: &[f64]| {
            v.iter()
                .enumerate()
                .map(|(i, r)| r / ((i + 2) as f64).log2())
                .sum::<f64>()
        };
        let mut ideal = rels.clone();
        ideal.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let idcg = dcg(&ideal);
        if idcg > 0.0 {
            scores.push(dcg(&rels) / idcg);
        }
    }
    (!scores.is_empty()).then(|| scores.iter().sum::<f64>() / scores.len() as f64)
}

/// Random pool of at most 31 samples; a third of the pools draw from three
/// prototype vectors so that exact similarity ties occur.
fn random_instance<R: Rng>(r: &mut R, t: &Taxonomy) -> (Vec<Vec<f64>>, Vec<NodeId>) {
    let n = r.random_range(2..=31);
    let vector = |r: &mut R| (0..3).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<f64>>();
    let emb = if r.random_bool(0.3) {
        let protos: Vec<Vec<f64>> = (0..3).map(|_| vector(r)).collect();
        (0..n).map(|_| protos[r.random_range(0..3)].clone()).collect()
    } else {
        (0..n).map(|_| vector(r)).collect()
    };
    let leaves = (0..n)
        .map(|_| t.leaves()[r.random_range(0..t.leaves().len())])
        .collect();
    (emb, leaves)
}

fn metric_oracle() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut mismatched = 0;
    for seed in 0..100u64 {
        let mut r = rng(1000 + seed);
        let depth = r.random_range(1..=4);
        let t = random_tree(&mut r, depth);
        let o = Oracle::new(&t);
        let (emb, leaves) = random_instance(&mut r, &t);
        let lists = rank_by_cosine(&emb).unwrap();
        let pairs = [
            (
                mnr(&lists, &leaves, &t).ok().map(|m| m.value),
                oracle_mnr(&o, &emb, &leaves),
            ),
            (
                ndcg(&lists, &leaves, &t, RelevanceKind::Sum).ok().map(|m| m.value),
                oracle_ndcg(&o, &emb, &leaves, true),
            ),
            (
                ndcg(&lists, &leaves, &t, RelevanceKind::Max).ok().map(|m| m.value),
                oracle_ndcg(&o, &emb, &leaves, false),
            ),
        ];
        for (lib, oracle) in pairs {
            match (lib, oracle) {
                (Some(a), Some(b)) => worst = worst.max((a - b).abs()),
                (None, None) => {}
                _ => mismatched += 1,
            }
        }
    }
    let t = small_tree();
    let id = |n: &str| t.id_of(n).unwrap();
    let leaves = [id("a1"), id("a1"), id("a2"), id("b1"), id("b1")];
    let list = RankedList {
        query: 0,
        candidates: vec![1, 2, 3, 4],
    };
    let worked = mnr(&[list], &leaves, &t).unwrap().value;
    outcome(
        worst <= 1e-9 && mismatched == 0 && worked == 0.0625,
        format!("100 instances: max |library - oracle| {worst:.1e} (<= 1e-9), {mismatched} definedness mismatches; reference MNR {worked}"),
    )
}

// ---------------------------------------------------------------- 3

fn sampler_correctness() -> Outcome {
    let mut bad_counts = 0;
    let mut violations = 0;
    let mut total = 0;
    for seed in 0..50u64 {
        let t = random_tree(&mut rng(2000 + seed), 4);
        let triples = enumerate_node_triples(&t).unwrap();
        bad_counts += (triples.len() != count_node_triples(&t)) as usize;
        for nt in &triples {
            total += 1;
            let ap = t.lca(nt.anchor, nt.positive).unwrap();
            let an = t.lca(nt.anchor, nt.negative).unwrap();
            let proper = nt.same_node() || t.depth(ap).unwrap() > t.depth(an).unwrap();
            let n_plus = if nt.same_node() { nt.anchor } else { ap };
            if !proper || t.is_ancestor_or_self(n_plus, nt.negative) {
                violations += 1;
            }
        }
    }
    let t = small_tree();
    let got: BTreeSet<(String, String, String)> = enumerate_node_triples(&t)
        .unwrap()
        .iter()
        .map(|nt| {
            (
                t.name(nt.anchor).into(),
                t.name(nt.positive).into(),
                t.name(nt.negative).into(),
            )
        })
        .collect();
    let want: BTreeSet<(String, String, String)> = [
        ("a1", "a2", "B"),
        ("a2", "a1", "B"),
        ("b1", "b1", "A"),
        ("a1", "a1", "a2"),
        ("a2", "a2", "a1"),
    ]
    .iter()
    .map(|(a, p, n)| (a.to_string(), p.to_string(), n.to_string()))
    .collect();
    let small_len = enumerate_node_triples(&t).unwrap().len();
    outcome(
        bad_counts == 0 && violations == 0 && got == want && small_len == 5,
        format!(
            "50 trees: {bad_counts} count mismatches, {violations}/{total} LCA violations; reference tree gives {small_len} triples, exact set {}",
            if got == want { "matches" } else { "differs" }
        ),
    )
}

// ---------------------------------------------------------------- 4

fn flat_tree_reduction() -> Outcome {
    let t = Taxonomy::from_spec(&TreeSpec::node(
        "root",
        (0..8).map(|k| TreeSpec::leaf(format!("l{k}"))).collect(),
    ))
    .unwrap();
    let data = random_dataset(&mut rng(3), &t, 20, 8);
    let fold = LeafFold {
        seen: t.leaves().iter().copied().collect(),
        unseen: BTreeSet::new(),
    };
    let split = SplitAssignment::build(&t, &data, &fold, 0, 5, SplitRatios::default()).unwrap();
    let config = TrainConfig {
        epochs: 4,
        hidden: vec![16],
        embedding_dim: 8,
        ..TrainConfig::default()
    };
    let (l_model, l_log) = fit(&data, &t, &split, "L".parse().unwrap(), &config, 9).unwrap();
    let (pl_model, pl_log) = fit(&data, &t, &split, "PL".parse().unwrap(), &config, 9).unwrap();
    let identical_steps = l_log.step_losses == pl_log.step_losses && !l_log.step_losses.is_empty();
    let identical_params =
        l_model.model.embed(data.features(0)).unwrap() == pl_model.model.embed(data.features(0)).unwrap();
    let triples = enumerate_node_triples(&t).unwrap();
    let standard = triples
        .iter()
        .all(|nt| nt.same_node() && t.is_leaf(nt.anchor) && t.is_leaf(nt.negative) && nt.anchor != nt.negative);
    outcome(
        identical_steps && identical_params && standard && triples.len() == 56,
        format!(
            "{} steps, per-step losses {}; embeddings {}; {} triples, all standard: {standard}",
            l_log.step_losses.len(),
            if identical_steps { "identical" } else { "differ" },
            if identical_params { "identical" } else { "differ" },
            triples.len()
        ),
    )
}

// ---------------------------------------------------------------- 5

fn uniform_depth_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut queries = 0;
    let mut mismatched = 0;
    for seed in 0..50u64 {
        let mut r = rng(4000 + seed);
        let depth = r.random_range(1..=4);
        let t = random_uniform_tree(&mut r, depth);
        let (emb, leaves) = random_instance(&mut r, &t);
        let lists = rank_by_cosine(&emb).unwrap();
        let (Ok(sum), Ok(max)) = (
            ndcg(&lists, &leaves, &t, RelevanceKind::Sum),
            ndcg(&lists, &leaves, &t, RelevanceKind::Max),
        ) else {
            continue;
        };
        for (a, b) in sum.per_query.iter().zip(&max.per_query) {
            match (a, b) {
                (Some(a), Some(b)) => {
                    worst = worst.max((a - b).abs());
                    queries += 1;
                }
                (None, None) => {}
                _ => mismatched += 1,
            }
        }
    }
    outcome(
        worst <= 1e-12 && mismatched == 0 && queries > 0,
        format!("{queries} queries on 50 uniform-depth trees: max |sum - max| {worst:.1e} (<= 1e-12)"),
    )
}

// ---------------------------------------------------------------- 6, 7, 8

struct Run {
    seed: u64,
    secs: f64,
    reports: BTreeMap<String, (MetricsReport, MetricsReport)>,
    unseen: usize,
    baseline: f64,
}

fn profile_config(seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        seed,
        folds: Some(vec![0]),
        ..ExperimentConfig::default()
    };
    cfg.synth.seed = seed;
    cfg
}

/// Expected Acc_blind of a uniformly random seen-leaf prediction.
fn random_baseline(t: &Taxonomy, data: &Dataset, split: &SplitAssignment) -> f64 {
    let leaves = data.leaf_nodes(t).unwrap();
    let pred = split.indices(Subset::Prediction);
    let seen: Vec<NodeId> = split.seen_leaves.iter().copied().collect();
    let mut total = 0.0;
    for &s in &pred {
        let lsa = split.lowest_seen_ancestor(t, leaves[s]).unwrap();
        let d = t.depth(lsa).unwrap();
        let hits = seen
            .iter()
            .filter(|&&l| t.ancestor_at_depth(l, d.min(t.depth(l).unwrap())) == lsa)
            .count();
        total += hits as f64 / seen.len() as f64;
    }
    total / pred.len() as f64
}

fn profile_run(seed: u64, out: &Path) -> Run {
    let cfg = profile_config(seed);
    let start = Instant::now();
    run_experiment(&cfg, out).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let t = Taxonomy::from_json_file(out.join(TAXONOMY_FILE)).unwrap();
    let data = Dataset::read_jsonl(out.join(DATASET_FILE)).unwrap();
    let split = SplitAssignment::read_json(out.join("fold_0").join(SPLIT_FILE), &t, &data).unwrap();
    let reports = cfg
        .combinations
        .iter()
        .map(|&c| {
            let dir = run_dir(out, 0, c);
            let read = |f: &str| MetricsReport::read_json(dir.join(f)).unwrap();
            (c.to_string(), (read("test.json"), read("prediction.json")))
        })
        .collect();
    Run {
        seed,
        secs,
        reports,
        unseen: split.unseen_leaves.len(),
        baseline: random_baseline(&t, &data, &split),
    }
}

fn mean(runs: &[Run], f: impl Fn(&Run) -> f64) -> f64 {
    runs.iter().map(f).sum::<f64>() / runs.len() as f64
}

fn table_directions(runs: &[Run]) -> Outcome {
    let test = |r: &Run, c: &str| r.reports[c].0.clone();
    let mnr_l = mean(runs, |r| test(r, "L").mnr.unwrap());
    let mnr_pl = mean(runs, |r| test(r, "PL").mnr.unwrap());
    let ndcg_l = mean(runs, |r| test(r, "L").ndcg_sum.unwrap());
    let ndcg_pl = mean(runs, |r| test(r, "PL").ndcg_sum.unwrap());
    let rp_pl = mean(runs, |r| test(r, "PL").leaf_rp_at_5.unwrap());
    let rp_plt = mean(runs, |r| test(r, "PL+T").leaf_rp_at_5.unwrap());
    let slowest = runs.iter().map(|r| r.secs).fold(0.0, f64::max);
    outcome(
        mnr_pl < mnr_l && ndcg_pl > ndcg_l && rp_plt >= rp_pl && slowest < 900.0,
        format!(
            "{} seeds: MNR PL {:.4} < L {:.4}; NDCG PL {:.4} > L {:.4}; RP@5 PL+T {:.4} >= PL {:.4}; slowest run {slowest:.1}s",
            runs.len(),
            mnr_pl,
            mnr_l,
            ndcg_pl,
            ndcg_l,
            rp_plt,
            rp_pl
        ),
    )
}

fn generalisation(runs: &[Run]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for r in runs {
        let blind = r.reports["PL+T"].1.acc_blind.unwrap();
        ok &= r.unseen >= 5 && blind >= 2.0 * r.baseline;
        parts.push(format!(
            "seed {}: {} unseen, Acc_blind {:.3} vs baseline {:.3}",
            r.seed, r.unseen, blind, r.baseline
        ));
        for (combo, (_, pred)) in &r.reports {
            let has_pl = combo.parse::<LossCombo>().unwrap().contains(LossKind::PerLevel);
            if pred.acc_aware.is_some() != has_pl {
                ok = false;
                parts.push(format!("{combo}: Acc_aware presence wrong"));
            }
        }
    }
    parts.push("Acc_aware only with PL".into());
    outcome(ok, parts.join("; "))
}

fn determinism() -> Outcome {
    let mut cfg = ExperimentConfig {
        seed: 7,
        folds: Some(vec![0, 1]),
        ..ExperimentConfig::default()
    };
    cfg.synth.seed = 7;
    cfg.train.epochs = 5;
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_experiment(&cfg, a.path()).unwrap();
    run_experiment(&cfg, b.path()).unwrap();
    let read = |d: &Path| std::fs::read(d.join(AGGREGATE_FILE)).unwrap();
    let (x, y) = (read(a.path()), read(b.path()));
    outcome(
        x == y && !x.is_empty(),
        format!("aggregate CSVs of two runs: {} bytes, identical: {}", x.len(), x == y),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, o: Outcome| {
        println!(
            "criterion {n} ({name}): {} - {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += (!o.pass) as usize;
    };
    report(1, "gradient check", gradient_check());
    report(2, "metric oracle", metric_oracle());
    report(3, "sampler", sampler_correctness());
    report(4, "flat tree", flat_tree_reduction());
    report(5, "uniform-depth NDCG", uniform_depth_identity());
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let runs: Vec<Run> = dirs
        .iter()
        .enumerate()
        .map(|(s, d)| profile_run(s as u64, d.path()))
        .collect();
    report(6, "table directions", table_directions(&runs));
    report(7, "generalisation metrics", generalisation(&runs));
    report(8, "determinism", determinism());
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
