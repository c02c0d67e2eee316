//! Metrics, cross-validation, cue ablation and cross-corpus evaluation.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cbd::{CollectiveLabel, CueSet};
use crate::config::RunConfig;
use crate::dataset::{FoldSplit, SceneRecording};
use crate::error::{Error, Result};
use crate::forest::RandomForest;
use crate::fsutil::write_atomic;
use crate::label::Label;
use crate::pid::{self, InteractionLabel};
use crate::pipeline::{self, PreparedRecording};
use crate::seed;

/// Rows are the true class, columns the predicted class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub class_names: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(class_names: Vec<String>) -> Self {
        let k = class_names.len();
        Self {
            class_names,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, v) in r.iter_mut().zip(o) {
                *c += v;
            }
        }
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    /// Diagonal over row sum; `None` for classes without support.
    pub fn per_class_accuracy(&self) -> Vec<Option<f64>> {
        (0..self.class_names.len())
            .map(|i| {
                let n = self.support(i);
                (n > 0).then(|| self.counts[i][i] as f64 / n as f64)
            })
            .collect()
    }

    /// Keeps the listed classes only. Counts involving a removed class are
    /// dropped.
    pub fn restrict(&self, keep: &[usize]) -> ConfusionMatrix {
        ConfusionMatrix {
            class_names: keep.iter().map(|&i| self.class_names[i].clone()).collect(),
            counts: keep.iter().map(|&r| keep.iter().map(|&c| self.counts[r][c]).collect()).collect(),
        }
    }

    pub fn to_text(&self) -> String {
        let width = self
            .class_names
            .iter()
            .map(String::len)
            .chain(self.counts.iter().flatten().map(|c| c.to_string().len()))
            .max()
            .unwrap_or(1)
            .max(5);
        let mut s = format!("{:>width$}", "truth");
        for n in &self.class_names {
            let _ = write!(s, " {n:>width$}");
        }
        s.push('\n');
        for (n, row) in self.class_names.iter().zip(&self.counts) {
            let _ = write!(s, "{n:>width$}");
            for c in row {
                let _ = write!(s, " {c:>width$}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub fold: usize,
    pub windows: u64,
    pub accuracy: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub class_names: Vec<String>,
    /// `null` for classes without test windows.
    pub per_class_accuracy: Vec<Option<f64>>,
    /// Mean over the classes with support.
    pub mpca: f64,
    /// Sample standard deviation (n - 1) over the same classes.
    pub std: f64,
    pub confusion: ConfusionMatrix,
    pub folds: Vec<FoldSummary>,
}

/// Mean and sample standard deviation. A single value has std 0.
pub fn mean_and_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

impl EvalReport {
    pub fn from_confusion(confusion: ConfusionMatrix, folds: Vec<FoldSummary>) -> Self {
        let per_class_accuracy = confusion.per_class_accuracy();
        let supported: Vec<f64> = per_class_accuracy.iter().flatten().copied().collect();
        let (mpca, std) = mean_and_std(&supported);
        Self {
            class_names: confusion.class_names.clone(),
            per_class_accuracy,
            mpca,
            std,
            confusion,
            folds,
        }
    }

    /// `(fold, truth, predicted)` triples.
    pub fn from_predictions(class_names: Vec<String>, fold_count: usize, predictions: &[(usize, usize, usize)]) -> Self {
        let mut per_fold: Vec<ConfusionMatrix> = (0..fold_count).map(|_| ConfusionMatrix::new(class_names.clone())).collect();
        for &(f, t, p) in predictions {
            per_fold[f].record(t, p);
        }
        fold_report(class_names, &per_fold)
    }

    pub fn accuracy_of(&self, class: &str) -> Option<f64> {
        let i = self.class_names.iter().position(|c| c == class)?;
        self.per_class_accuracy[i]
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("report", e.line(), e.to_string()))
    }

    /// `class,accuracy,support` with an empty accuracy for unsupported classes.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("class,accuracy,support\n");
        for (i, name) in self.class_names.iter().enumerate() {
            let acc = self.per_class_accuracy[i].map(|a| a.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{name},{acc},{}", self.confusion.support(i));
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("MPCA {:.2}%  std {:.2}\n", 100.0 * self.mpca, 100.0 * self.std);
        for (n, a) in self.class_names.iter().zip(&self.per_class_accuracy) {
            match a {
                Some(a) => {
                    let _ = writeln!(s, "  {n:<16} {:6.2}%", 100.0 * a);
                }
                None => {
                    let _ = writeln!(s, "  {n:<16}      -");
                }
            }
        }
        s.push('\n');
        s.push_str(&self.confusion.to_text());
        s
    }

    /// Writes `<stem>.json`, `<stem>.txt` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        write_atomic(&dir.join(format!("{stem}.json")), self.to_json().as_bytes())?;
        write_atomic(&dir.join(format!("{stem}.txt")), self.to_text().as_bytes())?;
        write_atomic(&dir.join(format!("{stem}.csv")), self.to_csv().as_bytes())
    }
}

fn fold_report(class_names: Vec<String>, per_fold: &[ConfusionMatrix]) -> EvalReport {
    let mut total = ConfusionMatrix::new(class_names);
    let mut folds = Vec::new();
    for (i, cm) in per_fold.iter().enumerate() {
        total.merge(cm);
        let n = cm.total();
        if n == 0 {
            warn!("fold {i} has no test windows");
        }
        let correct: u64 = (0..cm.class_names.len()).map(|c| cm.counts[c][c]).sum();
        folds.push(FoldSummary {
            fold: i,
            windows: n,
            accuracy: (n > 0).then(|| correct as f64 / n as f64),
        });
    }
    EvalReport::from_confusion(total, folds)
}

/// Reports of a two-stage run. A stage is `None` when the corpus has no
/// labeled windows for it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub interactions: Option<EvalReport>,
    pub collective: Option<EvalReport>,
}

impl PipelineReport {
    pub fn write(&self, dir: &Path) -> Result<()> {
        if let Some(r) = &self.interactions {
            r.write(dir, "interactions")?;
        }
        if let Some(r) = &self.collective {
            r.write(dir, "collective")?;
        }
        Ok(())
    }
}

pub const STAGE_ONE: u64 = 1;
pub const STAGE_TWO: u64 = 2;
/// Fold tag for models trained on a whole corpus.
pub const ALL_FOLDS: u64 = u64::MAX;

pub fn forest_seed(run_seed: u64, stage: u64, fold: u64) -> u64 {
    seed::derive(run_seed, &[stage, fold])
}

struct FoldOutcome {
    interactions: ConfusionMatrix,
    collective: Vec<ConfusionMatrix>,
}

fn has_pairs(preps: &[&PreparedRecording]) -> bool {
    preps.iter().any(|p| p.pairs.iter().any(|w| w.label.is_some()))
}

fn has_groups(preps: &[&PreparedRecording]) -> bool {
    preps.iter().any(|p| p.groups.iter().any(|g| g.label.is_some()))
}

/// Trains on `train`, tests on `test`, once per cue set for stage two.
fn train_and_test(
    train: &[&PreparedRecording],
    test: &[&PreparedRecording],
    cfg: &RunConfig,
    cue_sets: &[CueSet],
    fold: u64,
) -> Result<FoldOutcome> {
    let mut interactions = ConfusionMatrix::new(InteractionLabel::class_names());
    let mut collective: Vec<ConfusionMatrix> =
        cue_sets.iter().map(|_| ConfusionMatrix::new(CollectiveLabel::class_names())).collect();
    if !has_pairs(train) {
        if has_pairs(test) || has_groups(test) {
            return Err(Error::EmptyTrainingSet);
        }
        return Ok(FoldOutcome { interactions, collective });
    }
    let stage1 = pipeline::train_interactions(train, cfg, forest_seed(cfg.seed, STAGE_ONE, fold))?;
    for prep in test {
        for p in &prep.pairs {
            if let Some(truth) = p.label {
                let (pred, _) = pid::classify::<InteractionLabel>(prep.pair_features(p), &stage1)?;
                interactions.record(truth.index(), pred.index());
            }
        }
    }
    if has_groups(test) {
        let train_labels = train.iter().map(|r| r.classify_pids(&stage1)).collect::<Result<Vec<_>>>()?;
        let test_labels = test.iter().map(|r| r.classify_pids(&stage1)).collect::<Result<Vec<_>>>()?;
        let refs: Vec<&[InteractionLabel]> = train_labels.iter().map(Vec::as_slice).collect();
        for (ci, &cues) in cue_sets.iter().enumerate() {
            let samples = pipeline::collective_samples(train, &refs, cues);
            if samples.is_empty() {
                return Err(Error::EmptyTrainingSet);
            }
            let fc = crate::forest::ForestConfig {
                seed: forest_seed(cfg.seed, STAGE_TWO, fold),
                ..cfg.cbd_forest.clone()
            };
            let stage2 = RandomForest::fit(&samples, CollectiveLabel::class_names(), &fc)?;
            for (prep, labels) in test.iter().zip(&test_labels) {
                for g in &prep.groups {
                    if let Some(truth) = g.label {
                        let d = prep.group_descriptor(g, labels);
                        let p = stage2.predict(&d.features_for(cues))?;
                        collective[ci].record(truth.index(), p.class);
                    }
                }
            }
        }
    }
    Ok(FoldOutcome { interactions, collective })
}

fn run_folds(
    preps: &[PreparedRecording],
    folds: &FoldSplit,
    cfg: &RunConfig,
    cue_sets: &[CueSet],
) -> Result<(Option<EvalReport>, Vec<Option<EvalReport>>)> {
    let k = folds.fold_count();
    let fold_of = |p: &PreparedRecording| folds.fold_of(&p.sequence_id).expect("checked fold coverage");
    let outcomes = (0..k)
        .into_par_iter()
        .map(|f| {
            let train: Vec<&PreparedRecording> = preps.iter().filter(|p| fold_of(p) != f).collect();
            let test: Vec<&PreparedRecording> = preps.iter().filter(|p| fold_of(p) == f).collect();
            train_and_test(&train, &test, cfg, cue_sets, f as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<&PreparedRecording> = preps.iter().collect();
    let interactions = has_pairs(&all).then(|| {
        let per_fold: Vec<ConfusionMatrix> = outcomes.iter().map(|o| o.interactions.clone()).collect();
        fold_report(InteractionLabel::class_names(), &per_fold)
    });
    let collective = (0..cue_sets.len())
        .map(|ci| {
            has_groups(&all).then(|| {
                let per_fold: Vec<ConfusionMatrix> = outcomes.iter().map(|o| o.collective[ci].clone()).collect();
                fold_report(CollectiveLabel::class_names(), &per_fold)
            })
        })
        .collect();
    Ok((interactions, collective))
}

/// K-fold evaluation of both stages. For each fold the first stage is
/// trained on the pair windows of the other folds; the second stage is
/// trained on their collective descriptors, built with that fold's first
/// stage. Confusion counts are summed over folds.
pub fn kfold_evaluate(recordings: &[SceneRecording], folds: &FoldSplit, cfg: &RunConfig) -> Result<PipelineReport> {
    cfg.validate()?;
    folds.check_covers(recordings)?;
    let preps = pipeline::prepare_all(recordings, cfg, true)?;
    let (interactions, mut collective) = run_folds(&preps, folds, cfg, &[cfg.cue_set()])?;
    Ok(PipelineReport {
        interactions,
        collective: collective.pop().flatten(),
    })
}

/// One collective evaluation per cue set, in input order. The first stage
/// is shared by all of them.
pub fn ablation(
    recordings: &[SceneRecording],
    folds: &FoldSplit,
    cue_sets: &[CueSet],
    cfg: &RunConfig,
) -> Result<Vec<(CueSet, EvalReport)>> {
    if cue_sets.is_empty() {
        return Err(Error::Config("ablation needs at least one cue set".into()));
    }
    cfg.validate()?;
    folds.check_covers(recordings)?;
    let preps = pipeline::prepare_all(recordings, cfg, true)?;
    let (_, reports) = run_folds(&preps, folds, cfg, cue_sets)?;
    cue_sets
        .iter()
        .zip(reports)
        .map(|(&c, r)| r.map(|r| (c, r)).ok_or_else(|| Error::InsufficientData("corpus has no labeled group windows".into())))
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrossOptions {
    pub drop_labels: Vec<CollectiveLabel>,
    pub include_shape: bool,
}

/// Trains on `train` (without sequences carrying a dropped collective
/// label) and tests on all of `test`. The collective report covers the kept
/// labels only.
pub fn cross_dataset(
    train: &[SceneRecording],
    test: &[SceneRecording],
    opts: &CrossOptions,
    cfg: &RunConfig,
) -> Result<PipelineReport> {
    let cfg = RunConfig {
        include_shape: opts.include_shape,
        drop_labels: opts.drop_labels.clone(),
        ..cfg.clone()
    };
    cfg.validate()?;
    let kept: Vec<SceneRecording> = train
        .iter()
        .filter(|r| !r.collective_labels().iter().any(|l| opts.drop_labels.contains(l)))
        .cloned()
        .collect();
    let train_p = pipeline::prepare_all(&kept, &cfg, true)?;
    let test_p = pipeline::prepare_all(test, &cfg, true)?;
    let tr: Vec<&PreparedRecording> = train_p.iter().collect();
    let te: Vec<&PreparedRecording> = test_p.iter().collect();
    check_coverage(&tr, &te, &opts.drop_labels)?;
    let outcome = train_and_test(&tr, &te, &cfg, &[cfg.cue_set()], ALL_FOLDS)?;
    let interactions = has_pairs(&te).then(|| fold_report(InteractionLabel::class_names(), &[outcome.interactions]));
    let keep: Vec<usize> = CollectiveLabel::ALL
        .iter()
        .filter(|l| !opts.drop_labels.contains(l))
        .map(|l| l.index())
        .collect();
    let collective = has_groups(&te).then(|| {
        let cm = outcome.collective[0].restrict(&keep);
        fold_report(cm.class_names.clone(), &[cm])
    });
    Ok(PipelineReport { interactions, collective })
}

/// Test labels must occur in training. Dropped collective labels are exempt:
/// their test windows fall out of the restricted confusion matrix.
fn check_coverage(train: &[&PreparedRecording], test: &[&PreparedRecording], dropped: &[CollectiveLabel]) -> Result<()> {
    let pairs = |rs: &[&PreparedRecording]| -> BTreeSet<InteractionLabel> {
        rs.iter().flat_map(|r| r.pairs.iter().filter_map(|p| p.label)).collect()
    };
    let groups = |rs: &[&PreparedRecording]| -> BTreeSet<CollectiveLabel> {
        rs.iter().flat_map(|r| r.groups.iter().filter_map(|g| g.label)).collect()
    };
    let missing_p: Vec<_> = pairs(test).difference(&pairs(train)).map(|l| l.code()).collect();
    let missing_g: Vec<_> = groups(test)
        .difference(&groups(train))
        .filter(|l| !dropped.contains(l))
        .map(|l| l.code())
        .collect();
    if !missing_p.is_empty() || !missing_g.is_empty() {
        let all: Vec<&str> = missing_p.into_iter().chain(missing_g).collect();
        return Err(Error::LabelCoverage(format!(
            "test labels absent from training: {}",
            all.join(", ")
        )));
    }
    Ok(())
}
