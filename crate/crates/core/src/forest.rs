//! Random forest classifier over fixed-length real-valued descriptors.
//!
//! Trees are grown on bootstrap resamples with a random subset of features
//! considered at each node. Splits are axis-aligned and chosen by Gini
//! impurity decrease over midpoints of the sorted unique feature values.
//! Each tree draws from its own random stream keyed by `(seed, tree index)`
//! so parallel training produces the same model as sequential training.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{fsutil, seed};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSample {
    pub features: Vec<f64>,
    pub label: usize,
}

impl LabeledSample {
    pub fn new(features: Vec<f64>, label: usize) -> Self {
        Self { features, label }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows trees until purity.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    /// `None` means ceil(sqrt(d)).
    pub features_per_split: Option<usize>,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_samples_split: 2,
            features_per_split: None,
            seed: 42,
        }
    }
}

impl ForestConfig {
    pub fn validate(&self, feature_count: usize) -> Result<()> {
        if self.n_trees == 0 {
            return Err(Error::Config("n_trees must be >= 1".into()));
        }
        if self.min_samples_split < 2 {
            return Err(Error::Config("min_samples_split must be >= 2".into()));
        }
        if let Some(m) = self.features_per_split {
            if m == 0 || m > feature_count {
                return Err(Error::Config(format!(
                    "features_per_split must lie in 1..={feature_count}, got {m}"
                )));
            }
        }
        Ok(())
    }

    pub fn resolved_features_per_split(&self, feature_count: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| (feature_count as f64).sqrt().ceil() as usize)
            .clamp(1, feature_count.max(1))
    }
}

/// Samples with `features[feature] <= threshold` go left.
#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        counts: Vec<u32>,
    },
}

impl Node {
    fn leaf<'a>(&'a self, x: &[f64]) -> &'a [u32] {
        let mut node = self;
        loop {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => node = if x[*feature] <= *threshold { left } else { right },
                Node::Leaf { counts } => return counts,
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Node::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
            Node::Leaf { .. } => 0,
        }
    }

    /// Accumulates weighted impurity decrease per feature; returns the
    /// class counts reaching this node.
    fn impurity_decrease(&self, acc: &mut [f64]) -> Vec<u32> {
        match self {
            Node::Leaf { counts } => counts.clone(),
            Node::Split {
                feature,
                left,
                right,
                ..
            } => {
                let l = left.impurity_decrease(acc);
                let r = right.impurity_decrease(acc);
                let total: Vec<u32> = l.iter().zip(&r).map(|(a, b)| a + b).collect();
                acc[*feature] += weighted_gini(&total) - weighted_gini(&l) - weighted_gini(&r);
                total
            }
        }
    }
}

/// n * gini(counts).
fn weighted_gini(counts: &[u32]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    n - counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / n
}

fn argmax_lowest(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, v) in values.into_iter().enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct Prediction {
    pub class: usize,
    /// Fraction of trees voting for each class.
    pub probabilities: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomForest {
    class_names: Vec<String>,
    feature_count: usize,
    config: ForestConfig,
    trees: Vec<Node>,
}

struct TreeBuilder<'a> {
    samples: &'a [LabeledSample],
    n_classes: usize,
    mtry: usize,
    max_depth: Option<usize>,
    min_samples_split: usize,
}

struct Candidate {
    score: f64,
    feature: usize,
    threshold: f64,
}

impl TreeBuilder<'_> {
    fn counts(&self, idx: &[usize]) -> Vec<u32> {
        let mut c = vec![0u32; self.n_classes];
        for &i in idx {
            c[self.samples[i].label] += 1;
        }
        c
    }

    fn build<R: Rng>(&self, idx: &mut [usize], depth: usize, rng: &mut R) -> Node {
        let counts = self.counts(idx);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure
            || idx.len() < self.min_samples_split
            || self.max_depth.is_some_and(|m| depth >= m)
        {
            return Node::Leaf { counts };
        }
        let Some(split) = self.best_split(idx, &counts, rng) else {
            return Node::Leaf { counts };
        };
        let mut n_left = 0;
        for k in 0..idx.len() {
            if self.samples[idx[k]].features[split.feature] <= split.threshold {
                idx.swap(k, n_left);
                n_left += 1;
            }
        }
        let (l, r) = idx.split_at_mut(n_left);
        let left = self.build(l, depth + 1, rng);
        let right = self.build(r, depth + 1, rng);
        Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Draws features in random order until `mtry` non-constant ones have
    /// been examined; returns the best split among them.
    fn best_split<R: Rng>(&self, idx: &[usize], counts: &[u32], rng: &mut R) -> Option<Candidate> {
        let d = self.samples[0].features.len();
        let mut order: Vec<usize> = (0..d).collect();
        order.shuffle(rng);
        let mut best: Option<Candidate> = None;
        let mut examined = 0;
        let mut column: Vec<(f64, usize)> = Vec::with_capacity(idx.len());
        for feature in order {
            if examined == self.mtry {
                break;
            }
            column.clear();
            column.extend(
                idx.iter()
                    .map(|&i| (self.samples[i].features[feature], self.samples[i].label)),
            );
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            if column[0].0 == column[column.len() - 1].0 {
                continue;
            }
            examined += 1;
            let mut left = vec![0u32; self.n_classes];
            let mut right = counts.to_vec();
            let n = column.len();
            for k in 0..n - 1 {
                let (value, label) = column[k];
                left[label] += 1;
                right[label] -= 1;
                let next = column[k + 1].0;
                if value == next {
                    continue;
                }
                let score = purity(&left, k + 1) + purity(&right, n - k - 1);
                let mut threshold = 0.5 * (value + next);
                if threshold >= next {
                    threshold = value;
                }
                let better = match &best {
                    None => true,
                    Some(b) => {
                        score > b.score
                            || (score == b.score
                                && (feature < b.feature
                                    || (feature == b.feature && threshold < b.threshold)))
                    }
                };
                if better {
                    best = Some(Candidate {
                        score,
                        feature,
                        threshold,
                    });
                }
            }
        }
        best
    }
}

/// sum(c^2) / n; maximizing the sum over both children minimizes the
/// weighted Gini impurity.
fn purity(counts: &[u32], n: usize) -> f64 {
    counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>() / n as f64
}

fn validate_samples(samples: &[LabeledSample], n_classes: usize) -> Result<usize> {
    let first = samples.first().ok_or(Error::EmptyTrainingSet)?;
    let d = first.features.len();
    for (i, s) in samples.iter().enumerate() {
        if s.features.len() != d {
            return Err(Error::ShapeMismatch {
                expected: d,
                actual: s.features.len(),
            });
        }
        if let Some(f) = s.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidFeature {
                sample: i,
                feature: f,
            });
        }
        if s.label >= n_classes {
            return Err(Error::InvalidParams(format!(
                "sample {i} has label {} but only {n_classes} classes are declared",
                s.label
            )));
        }
    }
    Ok(d)
}

impl RandomForest {
    /// Trains a forest. `class_names[k]` names label `k`.
    pub fn fit(samples: &[LabeledSample], class_names: Vec<String>, cfg: &ForestConfig) -> Result<Self> {
        Ok(Self::fit_inner(samples, class_names, cfg)?.0)
    }

    /// Trains a forest and reports its out-of-bag accuracy (fraction of
    /// samples with at least one out-of-bag vote that are classified
    /// correctly by those votes).
    pub fn fit_with_oob(
        samples: &[LabeledSample],
        class_names: Vec<String>,
        cfg: &ForestConfig,
    ) -> Result<(Self, f64)> {
        let (forest, in_bag) = Self::fit_inner(samples, class_names, cfg)?;
        let k = forest.class_names.len();
        let mut correct = 0usize;
        let mut voted = 0usize;
        for (i, s) in samples.iter().enumerate() {
            let mut votes = vec![0u32; k];
            for (tree, bag) in forest.trees.iter().zip(&in_bag) {
                if !bag[i] {
                    votes[argmax_lowest(tree.leaf(&s.features).iter().map(|&c| c as f64))] += 1;
                }
            }
            if votes.iter().any(|&v| v > 0) {
                voted += 1;
                if argmax_lowest(votes.iter().map(|&v| v as f64)) == s.label {
                    correct += 1;
                }
            }
        }
        let oob = if voted == 0 { 0.0 } else { correct as f64 / voted as f64 };
        Ok((forest, oob))
    }

    fn fit_inner(
        samples: &[LabeledSample],
        class_names: Vec<String>,
        cfg: &ForestConfig,
    ) -> Result<(Self, Vec<Vec<bool>>)> {
        if class_names.is_empty() {
            return Err(Error::InvalidParams("at least one class is required".into()));
        }
        let d = validate_samples(samples, class_names.len())?;
        cfg.validate(d)?;
        let builder = TreeBuilder {
            samples,
            n_classes: class_names.len(),
            mtry: cfg.resolved_features_per_split(d),
            max_depth: cfg.max_depth,
            min_samples_split: cfg.min_samples_split,
        };
        let n = samples.len();
        let grown: Vec<(Node, Vec<bool>)> = (0..cfg.n_trees)
            .into_par_iter()
            .map(|t| {
                let mut rng = seed::rng(cfg.seed, &[t as u64]);
                let mut idx: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                let mut bag = vec![false; n];
                for &i in &idx {
                    bag[i] = true;
                }
                (builder.build(&mut idx, 0, &mut rng), bag)
            })
            .collect();
        let (trees, in_bag) = grown.into_iter().unzip();
        Ok((
            Self {
                class_names,
                feature_count: d,
                config: cfg.clone(),
                trees,
            },
            in_bag,
        ))
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn config(&self) -> &ForestConfig {
        &self.config
    }

    pub fn trees(&self) -> &[Node] {
        &self.trees
    }

    pub fn predict(&self, features: &[f64]) -> Result<Prediction> {
        if features.len() != self.feature_count {
            return Err(Error::ShapeMismatch {
                expected: self.feature_count,
                actual: features.len(),
            });
        }
        let mut votes = vec![0u32; self.class_names.len()];
        for tree in &self.trees {
            votes[argmax_lowest(tree.leaf(features).iter().map(|&c| c as f64))] += 1;
        }
        let total = self.trees.len() as f64;
        let probabilities: Vec<f64> = votes.iter().map(|&v| v as f64 / total).collect();
        Ok(Prediction {
            class: argmax_lowest(votes.iter().map(|&v| v as f64)),
            probabilities,
        })
    }

    /// Mean decrease in Gini impurity per feature, normalized to sum to one.
    /// A forest without any split reports a uniform vector.
    pub fn feature_importance(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.feature_count];
        for tree in &self.trees {
            tree.impurity_decrease(&mut acc);
        }
        let total: f64 = acc.iter().sum();
        if total <= 0.0 {
            return vec![1.0 / self.feature_count as f64; self.feature_count];
        }
        acc.iter().map(|v| v / total).collect()
    }

    pub fn to_json(&self) -> Vec<u8> {
        let doc = ModelFile {
            version: MODEL_FORMAT_VERSION,
            class_names: self.class_names.clone(),
            feature_count: self.feature_count,
            config: self.config.clone(),
            trees: self.trees.iter().map(NodeRecord::from).collect(),
        };
        serde_json::to_vec(&doc).expect("model serialization cannot fail")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let probe: VersionProbe = parse_json(bytes)?;
        if probe.version != MODEL_FORMAT_VERSION {
            return Err(Error::CorruptModel(format!(
                "unsupported model version {} (expected {MODEL_FORMAT_VERSION})",
                probe.version
            )));
        }
        let doc: ModelFile = parse_json(bytes)?;
        let k = doc.class_names.len();
        if k == 0 {
            return Err(Error::CorruptModel("model declares no classes".into()));
        }
        if doc.trees.is_empty() {
            return Err(Error::CorruptModel("model has no trees".into()));
        }
        let trees = doc
            .trees
            .into_iter()
            .map(|t| t.into_node(doc.feature_count, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            class_names: doc.class_names,
            feature_count: doc.feature_count,
            config: doc.config,
            trees,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_json(&bytes)
    }
}

fn parse_json<'de, T: Deserialize<'de>>(bytes: &'de [u8]) -> Result<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    de.disable_recursion_limit();
    let value = T::deserialize(&mut de).map_err(|e| Error::CorruptModel(e.to_string()))?;
    de.end().map_err(|e| Error::CorruptModel(e.to_string()))?;
    Ok(value)
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    version: u32,
    class_names: Vec<String>,
    feature_count: usize,
    config: ForestConfig,
    trees: Vec<NodeRecord>,
}

/// On-disk node: either `{feature, threshold, left, right}` or `{counts}`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feature: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<Box<NodeRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<Box<NodeRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<u32>>,
}

impl From<&Node> for NodeRecord {
    fn from(node: &Node) -> Self {
        match node {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => NodeRecord {
                feature: Some(*feature),
                threshold: Some(*threshold),
                left: Some(Box::new(NodeRecord::from(left.as_ref()))),
                right: Some(Box::new(NodeRecord::from(right.as_ref()))),
                counts: None,
            },
            Node::Leaf { counts } => NodeRecord {
                feature: None,
                threshold: None,
                left: None,
                right: None,
                counts: Some(counts.clone()),
            },
        }
    }
}

impl NodeRecord {
    fn into_node(self, feature_count: usize, class_count: usize) -> Result<Node> {
        match self {
            NodeRecord {
                feature: Some(feature),
                threshold: Some(threshold),
                left: Some(left),
                right: Some(right),
                counts: None,
            } => {
                if feature >= feature_count {
                    return Err(Error::CorruptModel(format!(
                        "split on feature {feature} but the model has {feature_count} features"
                    )));
                }
                if !threshold.is_finite() {
                    return Err(Error::CorruptModel("non-finite split threshold".into()));
                }
                Ok(Node::Split {
                    feature,
                    threshold,
                    left: Box::new(left.into_node(feature_count, class_count)?),
                    right: Box::new(right.into_node(feature_count, class_count)?),
                })
            }
            NodeRecord {
                feature: None,
                threshold: None,
                left: None,
                right: None,
                counts: Some(counts),
            } => {
                if counts.len() != class_count {
                    return Err(Error::CorruptModel(format!(
                        "leaf has {} counts for {class_count} classes",
                        counts.len()
                    )));
                }
                Ok(Node::Leaf { counts })
            }
            _ => Err(Error::CorruptModel(
                "node must be either a split or a leaf".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    fn gaussians(n_per: usize, seed: u64) -> Vec<LabeledSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let mut out = Vec::new();
        for _ in 0..n_per {
            for (label, mean) in [(0usize, 0.0), (1, 1.0)] {
                out.push(LabeledSample::new(
                    vec![mean + noise.sample(&mut rng), mean + noise.sample(&mut rng)],
                    label,
                ));
            }
        }
        out
    }

    fn accuracy(f: &RandomForest, data: &[LabeledSample]) -> f64 {
        data.iter()
            .filter(|s| f.predict(&s.features).unwrap().class == s.label)
            .count() as f64
            / data.len() as f64
    }

    #[test]
    fn separable_one_dimensional() {
        let data: Vec<_> = (0..100)
            .map(|i| {
                let x = (i as f64 - 49.5) / 10.0;
                LabeledSample::new(vec![x], usize::from(x > 0.0))
            })
            .collect();
        let f = RandomForest::fit(&data, names(2), &ForestConfig::default()).unwrap();
        assert_eq!(accuracy(&f, &data), 1.0);
    }

    #[test]
    fn single_class_is_constant() {
        let data: Vec<_> = (0..10).map(|i| LabeledSample::new(vec![i as f64, 1.0], 2)).collect();
        let f = RandomForest::fit(&data, names(3), &ForestConfig::default()).unwrap();
        for x in [-10.0, 0.0, 55.0] {
            let p = f.predict(&[x, x]).unwrap();
            assert_eq!(p.class, 2);
            assert_eq!(p.probabilities, vec![0.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn degenerate_single_sample_stump() {
        let data = vec![LabeledSample::new(vec![0.3, 0.1], 1)];
        let cfg = ForestConfig {
            n_trees: 1,
            ..ForestConfig::default()
        };
        let f = RandomForest::fit(&data, names(2), &cfg).unwrap();
        let p = f.predict(&[100.0, -5.0]).unwrap();
        assert_eq!((p.class, p.probabilities[1]), (1, 1.0));
    }

    #[test]
    fn training_errors() {
        let cfg = ForestConfig::default();
        assert!(matches!(
            RandomForest::fit(&[], names(2), &cfg),
            Err(Error::EmptyTrainingSet)
        ));
        let ragged = vec![LabeledSample::new(vec![1.0], 0), LabeledSample::new(vec![1.0, 2.0], 1)];
        assert!(matches!(
            RandomForest::fit(&ragged, names(2), &cfg),
            Err(Error::ShapeMismatch { .. })
        ));
        let nan = vec![LabeledSample::new(vec![1.0], 0), LabeledSample::new(vec![f64::NAN], 1)];
        assert!(matches!(
            RandomForest::fit(&nan, names(2), &cfg),
            Err(Error::InvalidFeature { sample: 1, feature: 0 })
        ));
    }

    #[test]
    fn predict_shape_guard_and_probabilities() {
        let data = gaussians(50, 3);
        let f = RandomForest::fit(&data, names(2), &ForestConfig::default()).unwrap();
        assert!(matches!(f.predict(&[0.0]), Err(Error::ShapeMismatch { .. })));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
            let p = f.predict(&x).unwrap();
            assert!((p.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_tree_votes_are_binary() {
        let data = gaussians(30, 4);
        let cfg = ForestConfig {
            n_trees: 1,
            ..ForestConfig::default()
        };
        let f = RandomForest::fit(&data, names(2), &cfg).unwrap();
        for s in &data {
            let p = f.predict(&s.features).unwrap();
            assert!(p.probabilities.iter().all(|&v| v == 0.0 || v == 1.0));
        }
    }

    #[test]
    fn ties_go_to_the_lowest_class() {
        let data = vec![LabeledSample::new(vec![0.0], 1), LabeledSample::new(vec![1.0], 0)];
        let cfg = ForestConfig {
            n_trees: 2,
            ..ForestConfig::default()
        };
        let f = RandomForest::fit(&data, names(2), &cfg).unwrap();
        let p = f.predict(&[0.5]).unwrap();
        if p.probabilities[0] == p.probabilities[1] {
            assert_eq!(p.class, 0);
        }
        assert_eq!(argmax_lowest([0.5, 0.5]), 0);
        assert_eq!(argmax_lowest([0.2, 0.4, 0.4]), 1);
    }

    #[test]
    fn depth_limit_is_respected() {
        let data = gaussians(100, 5);
        let cfg = ForestConfig {
            max_depth: Some(3),
            n_trees: 10,
            ..ForestConfig::default()
        };
        let f = RandomForest::fit(&data, names(2), &cfg).unwrap();
        assert!(f.trees().iter().all(|t| t.depth() <= 3));
    }

    #[test]
    fn informative_feature_dominates_importance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<_> = (0..300)
            .map(|i| {
                let label = i % 2;
                let mut x: Vec<f64> = (0..6).map(|_| rng.gen::<f64>()).collect();
                x[2] = label as f64 + 0.3 * rng.gen::<f64>();
                LabeledSample::new(x, label)
            })
            .collect();
        let f = RandomForest::fit(&data, names(2), &ForestConfig::default()).unwrap();
        let imp = f.feature_importance();
        assert!((imp.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(imp[2] > 0.5, "{imp:?}");
    }

    #[test]
    fn constant_features_give_uniform_importance() {
        let data: Vec<_> = (0..10)
            .map(|i| LabeledSample::new(vec![1.0, 2.0, 3.0], i % 2))
            .collect();
        let f = RandomForest::fit(&data, names(2), &ForestConfig::default()).unwrap();
        assert_eq!(f.feature_importance(), vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn json_round_trip_and_corruption() {
        let data = gaussians(40, 6);
        let f = RandomForest::fit(&data, names(2), &ForestConfig::default()).unwrap();
        let bytes = f.to_json();
        assert_eq!(RandomForest::from_json(&bytes).unwrap(), f);
        assert!(matches!(
            RandomForest::from_json(&bytes[..bytes.len() / 2]),
            Err(Error::CorruptModel(_))
        ));
        let text = String::from_utf8(bytes).unwrap().replacen("\"version\":1", "\"version\":7", 1);
        match RandomForest::from_json(text.as_bytes()) {
            Err(Error::CorruptModel(msg)) => assert!(msg.contains("version 7"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_feature_index() {
        let doc = br#"{"version":1,"class_names":["a","b"],"feature_count":1,
            "config":{"n_trees":1,"max_depth":null,"min_samples_split":2,"features_per_split":null,"seed":1},
            "trees":[{"feature":3,"threshold":0.5,"left":{"counts":[1,0]},"right":{"counts":[0,1]}}]}"#;
        assert!(matches!(RandomForest::from_json(doc), Err(Error::CorruptModel(_))));
    }

    #[test]
    fn oob_accuracy_is_sensible() {
        let data = gaussians(100, 8);
        let (_, oob) =
            RandomForest::fit_with_oob(&data, names(2), &ForestConfig::default()).unwrap();
        assert!(oob > 0.8, "oob {oob}");
    }
}
