//! Two-stage training and prediction over recordings.
//!
//! [`prepare`] turns a recording into the model-independent part of the
//! work: PID features for every pair window and every (pair, center) that a
//! collective window needs, plus the speed, dispersion and shape cues of
//! each collective window. Only the interaction histogram of a collective
//! descriptor depends on the first-stage model, so models can be swapped
//! (for example per cross-validation fold) without recomputing any PID.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::cbd::{
    cbd_from_predictions, interaction_histogram, member_pairs, pid_centers, CbdDescriptor, CollectiveLabel,
    CueSet, GroupWindow,
};
use crate::config::RunConfig;
use crate::dataset::{self, SceneRecording};
use crate::error::{Error, Result};
use crate::forest::{LabeledSample, RandomForest};
use crate::label::Label;
use crate::pid::{self, InteractionLabel};
use crate::trajectory::{Frame, SceneKinematics, TrackId};

type PidKey = (TrackId, TrackId, Frame);

#[derive(Clone, Debug)]
pub struct PreparedPair {
    pub center: Frame,
    pub anchor: TrackId,
    pub target: TrackId,
    pub label: Option<InteractionLabel>,
    pid: usize,
}

#[derive(Clone, Debug)]
pub struct PreparedGroup {
    pub center: Frame,
    pub members: Vec<TrackId>,
    pub label: Option<CollectiveLabel>,
    /// All cues except the interaction histogram, which is left at zero.
    pub cues: CbdDescriptor,
    pids: Vec<usize>,
}

/// Model-independent features of one recording.
#[derive(Clone, Debug)]
pub struct PreparedRecording {
    pub sequence_id: String,
    pub pairs: Vec<PreparedPair>,
    pub groups: Vec<PreparedGroup>,
    pid_features: Vec<Vec<f64>>,
}

struct KeyIndex {
    index: HashMap<PidKey, usize>,
    keys: Vec<PidKey>,
}

impl KeyIndex {
    fn get(&mut self, key: PidKey) -> usize {
        *self.index.entry(key).or_insert_with(|| {
            self.keys.push(key);
            self.keys.len() - 1
        })
    }
}

/// `labeled` selects annotated windows (training, evaluation) or every
/// covered window (prediction).
pub fn prepare(rec: &SceneRecording, cfg: &RunConfig, labeled: bool) -> Result<PreparedRecording> {
    let extractor = cfg.pid_extractor()?;
    let scene = SceneKinematics::new(rec.trajectories(), rec.fps(), &cfg.smoothing);
    let mut keys = KeyIndex {
        index: HashMap::new(),
        keys: Vec::new(),
    };

    let pair_windows = if labeled {
        dataset::pair_windows(rec, cfg.pid.t1, cfg.stride)?
    } else {
        dataset::unlabeled_pair_windows(rec, cfg.pid.t1, cfg.stride)?
    };
    let mut pairs = Vec::with_capacity(pair_windows.len());
    for w in pair_windows {
        let (Some(a), Some(t)) = (scene.track(w.anchor), scene.track(w.target)) else {
            continue;
        };
        if !extractor.covers(a, t, w.center) {
            continue;
        }
        pairs.push(PreparedPair {
            center: w.center,
            anchor: w.anchor,
            target: w.target,
            label: w.label,
            pid: keys.get((w.anchor, w.target, w.center)),
        });
    }

    let group_windows = if labeled {
        dataset::group_windows(rec, cfg.t2, cfg.stride)?
    } else {
        dataset::unlabeled_group_windows(rec, cfg.t2, cfg.stride)?
    };
    let mut groups = Vec::with_capacity(group_windows.len());
    for spec in group_windows {
        let window = GroupWindow::new(&scene, spec.members.clone(), spec.center, cfg.t2)?;
        let centers = pid_centers(&window, cfg.stride);
        let mut pids = Vec::new();
        for (a, b) in member_pairs(&spec.members) {
            let (Some(ta), Some(tb)) = (scene.track(a), scene.track(b)) else {
                continue;
            };
            for &c in &centers {
                if extractor.covers(ta, tb, c) {
                    pids.push(keys.get((a, b, c)));
                }
            }
        }
        groups.push(PreparedGroup {
            center: spec.center,
            members: spec.members,
            label: spec.label,
            cues: cbd_from_predictions(&window, &[], cfg.include_shape)?,
            pids,
        });
    }

    let pid_features = keys
        .keys
        .par_iter()
        .map(|&(a, b, c)| {
            let (ta, tb) = (scene.track(a).expect("key track"), scene.track(b).expect("key track"));
            extractor.extract(ta, tb, scene.fps(), c, cfg.seed).map(|d| d.features())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PreparedRecording {
        sequence_id: rec.sequence_id().to_string(),
        pairs,
        groups,
        pid_features,
    })
}

pub fn prepare_all(recs: &[SceneRecording], cfg: &RunConfig, labeled: bool) -> Result<Vec<PreparedRecording>> {
    recs.par_iter().map(|r| prepare(r, cfg, labeled)).collect()
}

impl PreparedRecording {
    pub fn pair_features(&self, p: &PreparedPair) -> &[f64] {
        &self.pid_features[p.pid]
    }

    /// First-stage class of every cached PID.
    pub fn classify_pids(&self, model: &RandomForest) -> Result<Vec<InteractionLabel>> {
        self.pid_features
            .iter()
            .map(|f| pid::classify::<InteractionLabel>(f, model).map(|(l, _)| l))
            .collect()
    }

    /// Full descriptor of `g` given the output of [`Self::classify_pids`].
    pub fn group_descriptor(&self, g: &PreparedGroup, pid_labels: &[InteractionLabel]) -> CbdDescriptor {
        let preds: Vec<InteractionLabel> = g.pids.iter().map(|&i| pid_labels[i]).collect();
        CbdDescriptor {
            interaction_hist: interaction_histogram(&preds),
            ..g.cues.clone()
        }
    }
}

pub fn interaction_samples(recs: &[&PreparedRecording]) -> Vec<LabeledSample> {
    recs.iter()
        .flat_map(|r| {
            r.pairs
                .iter()
                .filter_map(|p| p.label.map(|l| LabeledSample::new(r.pair_features(p).to_vec(), l.index())))
        })
        .collect()
}

/// Stage-two samples, restricted to `cues`, with histograms from `stage1`.
pub fn collective_samples(
    recs: &[&PreparedRecording],
    pid_labels: &[&[InteractionLabel]],
    cues: CueSet,
) -> Vec<LabeledSample> {
    recs.iter()
        .zip(pid_labels)
        .flat_map(|(r, labels)| {
            r.groups.iter().filter_map(move |g| {
                g.label
                    .map(|l| LabeledSample::new(r.group_descriptor(g, labels).features_for(cues), l.index()))
            })
        })
        .collect()
}

pub fn train_interactions(recs: &[&PreparedRecording], cfg: &RunConfig, seed: u64) -> Result<RandomForest> {
    let samples = interaction_samples(recs);
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let fc = crate::forest::ForestConfig { seed, ..cfg.pid_forest.clone() };
    RandomForest::fit(&samples, InteractionLabel::class_names(), &fc)
}

pub fn train_collective(
    recs: &[&PreparedRecording],
    stage1: &RandomForest,
    cues: CueSet,
    cfg: &RunConfig,
    seed: u64,
) -> Result<RandomForest> {
    let labels = recs.iter().map(|r| r.classify_pids(stage1)).collect::<Result<Vec<_>>>()?;
    let refs: Vec<&[InteractionLabel]> = labels.iter().map(Vec::as_slice).collect();
    let samples = collective_samples(recs, &refs, cues);
    if samples.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    let fc = crate::forest::ForestConfig { seed, ..cfg.cbd_forest.clone() };
    RandomForest::fit(&samples, CollectiveLabel::class_names(), &fc)
}

/// One predicted window.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowPrediction {
    pub center: Frame,
    pub group: bool,
    pub ids: Vec<TrackId>,
    pub label: &'static str,
    pub probabilities: Vec<f64>,
}

/// Predicts every pair window and, when `stage2` is given, every group
/// window of a prepared recording.
pub fn predict_prepared(
    prep: &PreparedRecording,
    stage1: &RandomForest,
    stage2: Option<&RandomForest>,
    cues: CueSet,
) -> Result<Vec<WindowPrediction>> {
    let mut out = Vec::new();
    for p in &prep.pairs {
        let (l, probs) = pid::classify::<InteractionLabel>(prep.pair_features(p), stage1)?;
        out.push(WindowPrediction {
            center: p.center,
            group: false,
            ids: vec![p.anchor, p.target],
            label: l.code(),
            probabilities: probs,
        });
    }
    if let Some(stage2) = stage2 {
        pid::check_model::<CollectiveLabel>(stage2, cues.feature_count())?;
        let labels = prep.classify_pids(stage1)?;
        for g in &prep.groups {
            let d = prep.group_descriptor(g, &labels);
            let (l, probs) = pid::classify::<CollectiveLabel>(&d.features_for(cues), stage2)?;
            out.push(WindowPrediction {
                center: g.center,
                group: true,
                ids: g.members.clone(),
                label: l.code(),
                probabilities: probs,
            });
        }
    }
    Ok(out)
}

fn join_ids(ids: &[TrackId]) -> String {
    ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";")
}

/// `center_frame,group_or_pair,ids,label,p0..p5` rows. Probability columns
/// follow the class order given in the comment lines.
pub fn predictions_csv(rows: &[WindowPrediction]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# pair classes: {}", InteractionLabel::class_names().join(" "));
    let _ = writeln!(s, "# group classes: {}", CollectiveLabel::class_names().join(" "));
    s.push_str("center_frame,group_or_pair,ids,label,p0,p1,p2,p3,p4,p5\n");
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{}",
            r.center,
            if r.group { "group" } else { "pair" },
            join_ids(&r.ids),
            r.label
        );
        for p in &r.probabilities {
            let _ = write!(s, ",{p}");
        }
        s.push('\n');
    }
    s
}

/// Labeled PID dump: `sequence,center_frame,anchor,target,label,f0..`.
pub fn pid_dump(preps: &[PreparedRecording]) -> String {
    let mut s = String::new();
    let dim = preps.iter().flat_map(|p| p.pid_features.first()).map(Vec::len).next().unwrap_or(0);
    s.push_str("sequence,center_frame,anchor,target,label");
    for i in 0..dim {
        let _ = write!(s, ",f{i}");
    }
    s.push('\n');
    for prep in preps {
        for p in &prep.pairs {
            let label = p.label.map_or("", |l| l.code());
            let _ = write!(s, "{},{},{},{},{label}", prep.sequence_id, p.center, p.anchor, p.target);
            for v in prep.pair_features(p) {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
    }
    s
}

/// Labeled CBD dump: `sequence,center_frame,members,label,f0..`.
pub fn cbd_dump(preps: &[PreparedRecording], stage1: &RandomForest, cues: CueSet) -> Result<String> {
    let mut s = String::from("sequence,center_frame,members,label");
    for i in 0..cues.feature_count() {
        let _ = write!(s, ",f{i}");
    }
    s.push('\n');
    for prep in preps {
        let labels = prep.classify_pids(stage1)?;
        for g in &prep.groups {
            let label = g.label.map_or("", |l| l.code());
            let _ = write!(s, "{},{},{},{label}", prep.sequence_id, g.center, join_ids(&g.members));
            for v in prep.group_descriptor(g, &labels).features_for(cues) {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbd::compute_cbd;
    use crate::forest::ForestConfig;
    use crate::synth::{gen_collective, gen_pair, SynthParams};

    fn small_cfg() -> RunConfig {
        RunConfig {
            pid_forest: ForestConfig { n_trees: 10, ..ForestConfig::default() },
            cbd_forest: ForestConfig { n_trees: 10, ..ForestConfig::default() },
            ..RunConfig::default()
        }
    }

    #[test]
    fn cached_descriptors_match_direct_computation() {
        let cfg = small_cfg();
        let p = SynthParams { duration_frames: 160, ..SynthParams::default() };
        let recs = vec![
            gen_pair(InteractionLabel::WalkingTogether, &p).unwrap(),
            gen_collective(CollectiveLabel::Walking, &p).unwrap(),
        ];
        let preps = prepare_all(&recs, &cfg, true).unwrap();
        let refs: Vec<&PreparedRecording> = preps.iter().collect();
        let stage1 = train_interactions(&refs, &cfg, 1).unwrap();
        let labels = preps[1].classify_pids(&stage1).unwrap();
        let scene = SceneKinematics::new(recs[1].trajectories(), recs[1].fps(), &cfg.smoothing);
        for g in &preps[1].groups {
            let w = GroupWindow::new(&scene, g.members.clone(), g.center, cfg.t2).unwrap();
            let direct = compute_cbd(&w, &stage1, &cfg.pid_extractor().unwrap(), cfg.stride, true, cfg.seed).unwrap();
            assert_eq!(preps[1].group_descriptor(g, &labels), direct);
        }
        assert!(!preps[1].groups.is_empty());
    }

    #[test]
    fn prediction_rows() {
        let cfg = small_cfg();
        let p = SynthParams { duration_frames: 160, ..SynthParams::default() };
        let recs = vec![gen_collective(CollectiveLabel::Talking, &p).unwrap()];
        let preps = prepare_all(&recs, &cfg, true).unwrap();
        let refs: Vec<&PreparedRecording> = preps.iter().collect();
        let stage1 = train_interactions(&refs, &cfg, 1).unwrap();
        let stage2 = train_collective(&refs, &stage1, CueSet::Full, &cfg, 2).unwrap();
        let unl = prepare(&recs[0], &cfg, false).unwrap();
        let rows = predict_prepared(&unl, &stage1, Some(&stage2), CueSet::Full).unwrap();
        assert!(rows.iter().any(|r| r.group && r.label == "Talking"));
        let csv = predictions_csv(&rows);
        assert!(csv.lines().nth(2).unwrap().starts_with("center_frame,group_or_pair,ids,label"));
        assert!(matches!(
            predict_prepared(&unl, &stage1, Some(&stage2), CueSet::WithDispersion),
            Err(Error::ModelShapeMismatch(_))
        ));
    }
}
