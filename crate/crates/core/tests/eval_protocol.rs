use proxrf::cbd::{CollectiveLabel, CueSet};
use proxrf::config::RunConfig;
use proxrf::dataset::{FoldSplit, SceneRecording};
use proxrf::eval::{ablation, cross_dataset, forest_seed, kfold_evaluate, ConfusionMatrix, CrossOptions, ALL_FOLDS, STAGE_ONE, STAGE_TWO};
use proxrf::forest::ForestConfig;
use proxrf::pid::InteractionLabel;
use proxrf::pipeline;
use proxrf::synth::{synth_corpus, CorpusSpec, SynthParams};
use proxrf::{Error, Label};

fn cfg() -> RunConfig {
    RunConfig {
        pid_forest: ForestConfig { n_trees: 30, ..ForestConfig::default() },
        cbd_forest: ForestConfig { n_trees: 30, ..ForestConfig::default() },
        ..RunConfig::default()
    }
}

fn corpus(params: SynthParams, scenes: usize) -> Vec<SceneRecording> {
    synth_corpus(&CorpusSpec { scenes_per_label: scenes, params, ..CorpusSpec::default() }).unwrap()
}

fn small() -> Vec<SceneRecording> {
    corpus(SynthParams { duration_frames: 84, seed: 21, ..SynthParams::default() }, 3)
}

fn folds(recs: &[SceneRecording]) -> FoldSplit {
    FoldSplit::round_robin(recs.iter().map(|r| r.sequence_id()), 3).unwrap()
}

#[test]
fn full_cue_ablation_equals_kfold_report() {
    let recs = small();
    let f = folds(&recs);
    let k = kfold_evaluate(&recs, &f, &cfg()).unwrap();
    let a = ablation(&recs, &f, &[CueSet::InteractionsSpeed, CueSet::WithDispersion, CueSet::Full], &cfg()).unwrap();
    let order: Vec<CueSet> = a.iter().map(|(c, _)| *c).collect();
    assert_eq!(order, vec![CueSet::InteractionsSpeed, CueSet::WithDispersion, CueSet::Full]);
    assert_eq!(a[2].1, k.collective.unwrap());
}

#[test]
fn reports_are_deterministic() {
    let recs = small();
    let f = folds(&recs);
    let a = kfold_evaluate(&recs, &f, &cfg()).unwrap();
    let b = kfold_evaluate(&recs, &f, &cfg()).unwrap();
    let json = |r: &proxrf::eval::PipelineReport| (r.interactions.as_ref().unwrap().to_json(), r.collective.as_ref().unwrap().to_json());
    assert_eq!(json(&a), json(&b));
}

#[test]
fn train_equals_test_is_resubstitution() {
    let recs = small();
    let c = cfg();
    let report = cross_dataset(&recs, &recs, &CrossOptions { drop_labels: vec![], include_shape: true }, &c).unwrap();

    let preps = pipeline::prepare_all(&recs, &c, true).unwrap();
    let refs: Vec<_> = preps.iter().collect();
    let stage1 = pipeline::train_interactions(&refs, &c, forest_seed(c.seed, STAGE_ONE, ALL_FOLDS)).unwrap();
    let stage2 =
        pipeline::train_collective(&refs, &stage1, CueSet::Full, &c, forest_seed(c.seed, STAGE_TWO, ALL_FOLDS)).unwrap();
    let mut pairs = ConfusionMatrix::new(InteractionLabel::class_names());
    let mut groups = ConfusionMatrix::new(CollectiveLabel::class_names());
    for p in &preps {
        for row in pipeline::predict_prepared(p, &stage1, Some(&stage2), CueSet::Full).unwrap() {
            let ids = &row.ids;
            if row.group {
                let g = p.groups.iter().find(|g| g.center == row.center && &g.members == ids).unwrap();
                if let Some(t) = g.label {
                    groups.record(t.index(), CollectiveLabel::from_code(row.label).unwrap().index());
                }
            } else {
                let w = p.pairs.iter().find(|w| w.center == row.center && [w.anchor, w.target] == ids[..]).unwrap();
                if let Some(t) = w.label {
                    pairs.record(t.index(), InteractionLabel::from_code(row.label).unwrap().index());
                }
            }
        }
    }
    assert_eq!(report.interactions.unwrap().confusion, pairs);
    assert_eq!(report.collective.unwrap().confusion, groups);
}

#[test]
fn dropping_queuing_without_shape() {
    let recs = small();
    let opts = CrossOptions { drop_labels: vec![CollectiveLabel::Queuing], include_shape: false };
    let report = cross_dataset(&recs, &recs, &opts, &cfg()).unwrap();
    let coll = report.collective.unwrap();
    assert!(!coll.class_names.iter().any(|c| c == "Queuing"));
    assert_eq!(coll.class_names.len(), 5);
    assert_eq!(coll.confusion.counts.len(), 5);

    let c = RunConfig { include_shape: false, ..cfg() };
    assert_eq!(c.cue_set().feature_count(), 8);
    let preps = pipeline::prepare_all(&recs, &c, true).unwrap();
    let refs: Vec<_> = preps.iter().collect();
    let stage1 = pipeline::train_interactions(&refs, &c, 1).unwrap();
    let stage2 = pipeline::train_collective(&refs, &stage1, c.cue_set(), &c, 2).unwrap();
    assert_eq!(stage2.feature_count(), 8);
    let dump = pipeline::cbd_dump(&preps, &stage1, c.cue_set()).unwrap();
    let mut lines = dump.lines();
    assert_eq!(lines.next().unwrap().split(',').count(), 4 + 8);
    assert_eq!(lines.next().unwrap().split(',').count(), 4 + 8);
}

#[test]
fn missing_training_label_is_a_coverage_error() {
    let recs = small();
    let train: Vec<SceneRecording> = recs.iter().filter(|r| !r.sequence_id().contains("Walking")).cloned().collect();
    let err = cross_dataset(&train, &recs, &CrossOptions { drop_labels: vec![], include_shape: true }, &cfg()).unwrap_err();
    assert!(matches!(err, Error::LabelCoverage(ref m) if m.contains("Walking")), "{err}");
}

#[test]
fn generalizes_across_generator_parameters() {
    let a = corpus(SynthParams { duration_frames: 96, seed: 1, ..SynthParams::default() }, 8);
    let b = corpus(
        SynthParams { duration_frames: 96, seed: 2, walk_speed: 1.15, spacing: 1.2, noise_sigma: 0.03, ..SynthParams::default() },
        4,
    );
    let r = cross_dataset(&a, &b, &CrossOptions { drop_labels: vec![], include_shape: true }, &RunConfig::default()).unwrap();
    let (i, c) = (r.interactions.unwrap(), r.collective.unwrap());
    assert!(i.mpca >= 0.75, "interactions {:.3}\n{}", i.mpca, i.to_text());
    assert!(c.mpca >= 0.75, "collective {:.3}\n{}", c.mpca, c.to_text());
}
