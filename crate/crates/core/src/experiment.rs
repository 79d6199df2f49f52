//! File-staged experiment pipeline.
//!
//! Each stage reads the files written by earlier stages, so the whole run can
//! be reproduced stage by stage from the command line. Output layout:
//!
//! ```text
//! <out>/taxonomy.json
//! <out>/dataset.jsonl
//! <out>/fold_<i>/split.json
//! <out>/fold_<i>/<combo>/{checkpoint.json, log.csv, test.json, prediction.json}
//! <out>/aggregate.csv
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::datasplit::{make_splits, SplitAssignment, Subset};
use crate::error::{Error, Result};
use crate::evaluate::{evaluate, MetricsReport};
use crate::losses::LossCombo;
use crate::model::{fit, save_run, TrainConfig, TrainedModel};
use crate::sampler::{enumerate_node_triples, instantiate_epoch, write_triplets_jsonl, TripletInstance};
use crate::seeding::fold_seed;
use crate::synthdata::{generate, SynthConfig};
use crate::taxonomy::Taxonomy;

pub const TAXONOMY_FILE: &str = "taxonomy.json";
pub const DATASET_FILE: &str = "dataset.jsonl";
pub const SPLIT_FILE: &str = "split.json";
pub const AGGREGATE_FILE: &str = "aggregate.csv";

/// Experiment settings, read from a TOML file of flat keys plus an optional
/// `[synth]` table.
///
/// ```toml
/// seed = 0
/// k_folds = 5
/// folds = [0]
/// combinations = ["L", "PL", "PL+T"]
/// epochs = 50
/// embedding_dim = 32
///
/// [synth]
/// depth = 3
/// branching = [[3, 4]]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    /// Taxonomy JSON; when absent, data is generated from `synth`.
    pub taxonomy: Option<PathBuf>,
    pub dataset: Option<PathBuf>,
    pub synth: SynthConfig,
    pub k_folds: usize,
    /// Folds to run; all folds when absent.
    pub folds: Option<Vec<usize>>,
    pub combinations: Vec<LossCombo>,
    pub seed: u64,
    #[serde(flatten)]
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            taxonomy: None,
            dataset: None,
            synth: SynthConfig::default(),
            k_folds: 5,
            folds: None,
            combinations: LossCombo::standard(),
            seed: 0,
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.taxonomy.is_some() != self.dataset.is_some() {
            return Err(Error::Config("taxonomy and dataset must be given together".into()));
        }
        for p in self.taxonomy.iter().chain(&self.dataset) {
            if !p.exists() {
                return Err(Error::Config(format!("{} does not exist", p.display())));
            }
        }
        if self.k_folds < 2 {
            return Err(Error::Config("k_folds must be >= 2".into()));
        }
        if let Some(folds) = &self.folds {
            if let Some(f) = folds.iter().find(|&&f| f >= self.k_folds) {
                return Err(Error::Config(format!(
                    "fold {f} out of range for {} folds",
                    self.k_folds
                )));
            }
        }
        if self.combinations.is_empty() || self.combinations.iter().any(LossCombo::is_empty) {
            return Err(Error::Config("need at least one non-empty loss combination".into()));
        }
        Ok(())
    }

    fn fold_list(&self) -> Vec<usize> {
        self.folds.clone().unwrap_or_else(|| (0..self.k_folds).collect())
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn fold_dir(out: &Path, fold: usize) -> PathBuf {
    out.join(format!("fold_{fold}"))
}

pub fn run_dir(out: &Path, fold: usize, combo: LossCombo) -> PathBuf {
    fold_dir(out, fold).join(combo.to_string())
}

/// Generates a synthetic taxonomy and dataset into `out`.
pub fn gen_data(config: &SynthConfig, out: &Path) -> Result<(Taxonomy, Dataset)> {
    create_dir(out)?;
    let (taxonomy, dataset) = generate(config)?;
    taxonomy.write_json_file(out.join(TAXONOMY_FILE))?;
    dataset.write_jsonl(out.join(DATASET_FILE))?;
    Ok((taxonomy, dataset))
}

pub fn load_data(taxonomy: &Path, dataset: &Path) -> Result<(Taxonomy, Dataset)> {
    let t = Taxonomy::from_json_file(taxonomy)?;
    let d = Dataset::read_jsonl(dataset)?;
    d.leaf_nodes(&t)?;
    Ok((t, d))
}

/// Writes `fold_<i>/split.json` for every fold.
pub fn split_stage(
    taxonomy: &Taxonomy,
    dataset: &Dataset,
    k_folds: usize,
    seed: u64,
    out: &Path,
) -> Result<Vec<SplitAssignment>> {
    let splits = make_splits(taxonomy, dataset, k_folds, seed)?;
    for split in &splits {
        let dir = fold_dir(out, split.fold);
        create_dir(&dir)?;
        split.write_json(dir.join(SPLIT_FILE), taxonomy, dataset)?;
    }
    Ok(splits)
}

/// One epoch of training triplets over the fold's seen taxonomy.
pub fn sample_triplets_stage(
    taxonomy: &Taxonomy,
    dataset: &Dataset,
    split: &SplitAssignment,
    epoch_seed: u64,
    out: Option<&Path>,
) -> Result<Vec<TripletInstance>> {
    let seen = split.pruned_seen_taxonomy(taxonomy)?;
    let triples = enumerate_node_triples(&seen.taxonomy)?;
    let instances = instantiate_epoch(&seen.taxonomy, dataset, split, &triples, epoch_seed)?;
    if let Some(path) = out {
        write_triplets_jsonl(path, &instances, dataset, &seen.taxonomy)?;
    }
    Ok(instances)
}

/// Trains one combination on one fold with seed `base_seed + fold` and
/// writes the checkpoint and log into `out`.
pub fn train_stage(
    taxonomy: &Taxonomy,
    dataset: &Dataset,
    split: &SplitAssignment,
    combo: LossCombo,
    config: &TrainConfig,
    base_seed: u64,
    out: &Path,
) -> Result<TrainedModel> {
    let (model, log) = fit(
        dataset,
        taxonomy,
        split,
        combo,
        config,
        fold_seed(base_seed, split.fold),
    )
    .map_err(|e| e.context(format!("training {combo} on fold {}", split.fold)))?;
    save_run(out, &model, &log)?;
    Ok(model)
}

pub fn evaluate_stage(
    model: &TrainedModel,
    taxonomy: &Taxonomy,
    dataset: &Dataset,
    split: &SplitAssignment,
    set: Subset,
    out: Option<&Path>,
) -> Result<MetricsReport> {
    let report = evaluate(model, taxonomy, dataset, split, set)
        .map_err(|e| e.context(format!("evaluating {} on fold {} ({set:?})", model.combo, split.fold)))?;
    if let Some(path) = out {
        report.write_json(path)?;
    }
    Ok(report)
}

/// Mean and standard error of the mean of one metric across folds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    /// Undefined for a single fold.
    pub sem: Option<f64>,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sem = (n > 1).then(|| {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Some(Summary { mean, sem, n })
    }

    /// `96.4 (0.2)` in percent.
    pub fn cell(&self) -> String {
        match self.sem {
            Some(sem) => format!("{:.1} ({:.1})", 100.0 * self.mean, 100.0 * sem),
            None => format!("{:.1} (-)", 100.0 * self.mean),
        }
    }
}

/// Table columns in report order: `(header, partition, field)`.
pub const COLUMNS: [(&str, Subset, &str); 10] = [
    ("test leaf F1", Subset::Test, "leaf_f1"),
    ("test leaf RP@5", Subset::Test, "leaf_rp_at_5"),
    ("test MNR", Subset::Test, "mnr"),
    ("test NDCG", Subset::Test, "ndcg_sum"),
    ("prediction Acc_blind", Subset::Prediction, "acc_blind"),
    ("prediction Acc_aware", Subset::Prediction, "acc_aware"),
    (
        "prediction Acc_blind/Acc_aware",
        Subset::Prediction,
        "ratio_blind_aware",
    ),
    ("prediction NDCG", Subset::Prediction, "ndcg_sum"),
    ("test NDCG_max", Subset::Test, "ndcg_max"),
    ("prediction NDCG_max", Subset::Prediction, "ndcg_max"),
];

fn field(report: &MetricsReport, name: &str) -> Option<f64> {
    match name {
        "leaf_f1" => report.leaf_f1,
        "leaf_rp_at_5" => report.leaf_rp_at_5,
        "mnr" => report.mnr,
        "ndcg_sum" => report.ndcg_sum,
        "ndcg_max" => report.ndcg_max,
        "acc_blind" => report.acc_blind,
        "acc_aware" => report.acc_aware,
        "ratio_blind_aware" => report.ratio_blind_aware,
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub combo: String,
    pub folds: usize,
    /// One entry per [`COLUMNS`] item.
    pub cells: Vec<Option<Summary>>,
}

impl AggregateRow {
    pub fn get(&self, header: &str) -> Option<&Summary> {
        COLUMNS
            .iter()
            .position(|(h, _, _)| *h == header)
            .and_then(|i| self.cells[i].as_ref())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AggregateReport {
    pub rows: Vec<AggregateRow>,
}

impl AggregateReport {
    pub fn row(&self, combo: &str) -> Option<&AggregateRow> {
        self.rows.iter().find(|r| r.combo == combo)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["loss"];
        header.extend(COLUMNS.iter().map(|(h, _, _)| *h));
        header.push("folds");
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![row.combo.clone()];
            rec.extend(
                row.cells
                    .iter()
                    .map(|c| c.as_ref().map_or("-".to_string(), Summary::cell)),
            );
            rec.push(row.folds.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn combo_rank(name: &str) -> (usize, String) {
    let standard: Vec<String> = LossCombo::standard().iter().map(|c| c.to_string()).collect();
    (
        standard.iter().position(|s| s == name).unwrap_or(standard.len()),
        name.to_string(),
    )
}

fn sorted_dirs(dir: &Path) -> Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.path().is_dir() {
            out.push((entry.file_name().to_string_lossy().into_owned(), entry.path()));
        }
    }
    out.sort();
    Ok(out)
}

/// Test and prediction reports of one fold.
type FoldReports = (usize, Option<MetricsReport>, Option<MetricsReport>);

/// Collects `fold_*/<combo>/{test,prediction}.json` under `runs` into one
/// table and writes it to `out` when given.
pub fn report_stage(runs: &Path, out: Option<&Path>) -> Result<AggregateReport> {
    let mut by_combo: BTreeMap<(usize, String), Vec<FoldReports>> = BTreeMap::new();
    let mut folds: Vec<(usize, PathBuf)> = sorted_dirs(runs)?
        .into_iter()
        .filter_map(|(name, path)| name.strip_prefix("fold_")?.parse().ok().map(|f| (f, path)))
        .collect();
    folds.sort();
    for (fold, path) in folds {
        for (combo, run) in sorted_dirs(&path)? {
            let read = |name: &str| -> Result<Option<MetricsReport>> {
                let p = run.join(name);
                p.exists().then(|| MetricsReport::read_json(&p)).transpose()
            };
            let (test, pred) = (read("test.json")?, read("prediction.json")?);
            if test.is_none() && pred.is_none() {
                continue;
            }
            by_combo.entry(combo_rank(&combo)).or_default().push((fold, test, pred));
        }
    }
    if by_combo.is_empty() {
        return Err(Error::Config(format!("no evaluated runs under {}", runs.display())));
    }
    let rows = by_combo
        .into_iter()
        .map(|((_, combo), runs)| {
            let cells = COLUMNS
                .iter()
                .map(|(_, set, name)| {
                    let values: Vec<f64> = runs
                        .iter()
                        .filter_map(|(_, test, pred)| {
                            let report = if *set == Subset::Test { test } else { pred };
                            report.as_ref().and_then(|r| field(r, name))
                        })
                        .collect();
                    Summary::of(&values)
                })
                .collect();
            AggregateRow {
                combo,
                folds: runs.len(),
                cells,
            }
        })
        .collect();
    let report = AggregateReport { rows };
    if let Some(path) = out {
        report.write_csv(path)?;
    }
    Ok(report)
}

/// Data, splits, training, evaluation and aggregation for every requested
/// fold and loss combination.
pub fn run_experiment(config: &ExperimentConfig, out: &Path) -> Result<AggregateReport> {
    config.validate()?;
    create_dir(out)?;
    let (taxonomy, dataset) = match (&config.taxonomy, &config.dataset) {
        (Some(t), Some(d)) => {
            let (t, d) = load_data(t, d)?;
            t.write_json_file(out.join(TAXONOMY_FILE))?;
            d.write_jsonl(out.join(DATASET_FILE))?;
            (t, d)
        }
        _ => gen_data(&config.synth, out)?,
    };
    let splits = split_stage(&taxonomy, &dataset, config.k_folds, config.seed, out)?;
    for fold in config.fold_list() {
        let split = &splits[fold];
        for &combo in &config.combinations {
            let dir = run_dir(out, fold, combo);
            let model = train_stage(&taxonomy, &dataset, split, combo, &config.train, config.seed, &dir)?;
            for (set, file) in [(Subset::Test, "test.json"), (Subset::Prediction, "prediction.json")] {
                evaluate_stage(&model, &taxonomy, &dataset, split, set, Some(&dir.join(file)))?;
            }
            log::info!("fold {fold} {combo} done");
        }
    }
    report_stage(out, Some(&out.join(AGGREGATE_FILE)))
}
