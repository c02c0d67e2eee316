//! Collective behavior descriptor for one group window.
//!
//! The descriptor pools the first-stage interaction predictions of every
//! ordered member pair into a normalized histogram and appends three group
//! cues: the mean member speed, the mean rate of change of the group
//! dispersion, and the eigenvalue ratio of the member position covariance.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::RandomForest;
use crate::label::Label;
use crate::pid::{self, InteractionLabel, PidExtractor};
use crate::trajectory::{derivative, Frame, KinematicState, SceneKinematics, TrackId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CollectiveLabel {
    Gathering,
    Talking,
    Dismissal,
    Walking,
    Chasing,
    Queuing,
}

impl Label for CollectiveLabel {
    const ALL: &'static [Self] = &[
        CollectiveLabel::Gathering,
        CollectiveLabel::Talking,
        CollectiveLabel::Dismissal,
        CollectiveLabel::Walking,
        CollectiveLabel::Chasing,
        CollectiveLabel::Queuing,
    ];
    const KIND: &'static str = "collective";

    fn code(self) -> &'static str {
        match self {
            CollectiveLabel::Gathering => "Gathering",
            CollectiveLabel::Talking => "Talking",
            CollectiveLabel::Dismissal => "Dismissal",
            CollectiveLabel::Walking => "Walking",
            CollectiveLabel::Chasing => "Chasing",
            CollectiveLabel::Queuing => "Queuing",
        }
    }
}

impl fmt::Display for CollectiveLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for CollectiveLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_code(s)
    }
}

/// Smallest covariance eigenvalue (m^2) treated as non-zero.
pub const MIN_EIGENVALUE: f64 = 1e-9;

/// A `t2`-frame window over a set of group members. Membership is per frame:
/// a member contributes only at frames where its track has a state.
#[derive(Clone, Debug)]
pub struct GroupWindow<'a> {
    scene: &'a SceneKinematics,
    center_frame: Frame,
    t2: usize,
    members: Vec<TrackId>,
}

impl<'a> GroupWindow<'a> {
    pub fn new(
        scene: &'a SceneKinematics,
        members: Vec<TrackId>,
        center_frame: Frame,
        t2: usize,
    ) -> Result<Self> {
        if t2 < 2 || !t2.is_power_of_two() {
            return Err(Error::Config(format!("t2 must be a power of two >= 2, got {t2}")));
        }
        let w = Self {
            scene,
            center_frame,
            t2,
            members,
        };
        for f in w.frames() {
            if w.states_at(f).is_empty() {
                return Err(Error::EmptyGroup(f));
            }
        }
        Ok(w)
    }

    pub fn center_frame(&self) -> Frame {
        self.center_frame
    }

    pub fn t2(&self) -> usize {
        self.t2
    }

    pub fn members(&self) -> &[TrackId] {
        &self.members
    }

    pub fn scene(&self) -> &'a SceneKinematics {
        self.scene
    }

    pub fn frames(&self) -> RangeInclusive<Frame> {
        let half = (self.t2 / 2) as Frame;
        self.center_frame - half + 1..=self.center_frame + half
    }

    pub fn states_at(&self, frame: Frame) -> Vec<&'a KinematicState> {
        self.members
            .iter()
            .filter_map(|&id| self.scene.track(id).and_then(|t| t.state(frame)))
            .collect()
    }

    pub fn positions_at(&self, frame: Frame) -> Vec<(f64, f64)> {
        self.states_at(frame).iter().map(|s| s.position).collect()
    }
}

/// Which group cues follow the interaction histogram.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CueSet {
    /// Interaction histogram and mean speed.
    InteractionsSpeed,
    /// Adds the dispersion change.
    WithDispersion,
    /// Adds the shape ratio.
    Full,
}

impl CueSet {
    pub const ALL: [CueSet; 3] = [CueSet::InteractionsSpeed, CueSet::WithDispersion, CueSet::Full];

    pub fn feature_count(self) -> usize {
        match self {
            CueSet::InteractionsSpeed => 7,
            CueSet::WithDispersion => 8,
            CueSet::Full => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CueSet::InteractionsSpeed => "interactions+speed",
            CueSet::WithDispersion => "interactions+speed+dispersion",
            CueSet::Full => "interactions+speed+dispersion+shape",
        }
    }
}

impl FromStr for CueSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "interactions_speed" | "interactions+speed" => Ok(CueSet::InteractionsSpeed),
            "with_dispersion" | "interactions+speed+dispersion" => Ok(CueSet::WithDispersion),
            "full" | "interactions+speed+dispersion+shape" => Ok(CueSet::Full),
            _ => Err(Error::Config(format!("unknown cue set `{s}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CbdDescriptor {
    /// Indexed by `InteractionLabel::index`.
    pub interaction_hist: [f64; 6],
    pub mean_speed: f64,
    pub dispersion_change: f64,
    pub shape_ratio: f64,
    pub include_shape: bool,
}

impl CbdDescriptor {
    /// 9 values with the shape cue, 8 without.
    pub fn features(&self) -> Vec<f64> {
        self.features_for(if self.include_shape {
            CueSet::Full
        } else {
            CueSet::WithDispersion
        })
    }

    pub fn features_for(&self, cues: CueSet) -> Vec<f64> {
        let mut v = self.interaction_hist.to_vec();
        v.push(self.mean_speed);
        if cues != CueSet::InteractionsSpeed {
            v.push(self.dispersion_change);
        }
        if cues == CueSet::Full {
            v.push(self.shape_ratio);
        }
        v
    }
}

/// Normalized label counts; all zeros for an empty list.
pub fn interaction_histogram(predictions: &[InteractionLabel]) -> [f64; 6] {
    let mut h = [0.0; 6];
    if predictions.is_empty() {
        return h;
    }
    for p in predictions {
        h[p.index()] += 1.0;
    }
    let n = predictions.len() as f64;
    h.map(|c| c / n)
}

/// Window average of the per-frame mean member speed.
pub fn mean_speed(window: &GroupWindow<'_>) -> f64 {
    let frames = window.frames();
    let mut total = 0.0;
    for f in frames {
        let states = window.states_at(f);
        if !states.is_empty() {
            total += states.iter().map(|s| s.speed).sum::<f64>() / states.len() as f64;
        }
    }
    total / window.t2 as f64
}

/// Root mean squared distance of the positions from their centroid.
pub fn dispersion(positions: &[(f64, f64)]) -> Result<f64> {
    if positions.is_empty() {
        return Err(Error::EmptyGroup(0));
    }
    let n = positions.len() as f64;
    let (cx, cy) = centroid(positions);
    let ss: f64 = positions
        .iter()
        .map(|&(x, y)| (x - cx).powi(2) + (y - cy).powi(2))
        .sum();
    Ok((ss / n).sqrt())
}

fn centroid(positions: &[(f64, f64)]) -> (f64, f64) {
    let n = positions.len() as f64;
    let (sx, sy) = positions
        .iter()
        .fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    (sx / n, sy / n)
}

/// Mean over the window of the time derivative of the dispersion, m/s.
pub fn dispersion_change(window: &GroupWindow<'_>) -> Result<f64> {
    let series = window
        .frames()
        .map(|f| {
            let p = window.positions_at(f);
            dispersion(&p).map(|d| (f, d)).map_err(|_| Error::EmptyGroup(f))
        })
        .collect::<Result<Vec<_>>>()?;
    let d = derivative(&series, window.scene.fps())?;
    Ok(d.iter().map(|&(_, v)| v).sum::<f64>() / d.len() as f64)
}

/// Eigenvalues `(min, max)` of the population covariance of the positions.
pub fn covariance_eigenvalues(positions: &[(f64, f64)]) -> (f64, f64) {
    let n = positions.len() as f64;
    let (cx, cy) = centroid(positions);
    let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
    for &(x, y) in positions {
        let (dx, dy) = (x - cx, y - cy);
        a += dx * dx;
        b += dx * dy;
        c += dy * dy;
    }
    let (a, b, c) = (a / n, b / n, c / n);
    let half_trace = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let max = half_trace + radius;
    if max <= 0.0 {
        return (0.0, 0.0);
    }
    // det / max avoids the cancellation of half_trace - radius
    let min = ((a * c - b * b) / max).max(0.0);
    (min, max)
}

/// `max / min` eigenvalue ratio of the position covariance when there is
/// more than one member and the smaller eigenvalue is positive, else 0.
pub fn shape_ratio(positions: &[(f64, f64)]) -> f64 {
    if positions.len() <= 1 {
        return 0.0;
    }
    let (min, max) = covariance_eigenvalues(positions);
    if min > MIN_EIGENVALUE {
        max / min
    } else {
        0.0
    }
}

/// PID center frames of a window: every `stride` frames from its start.
pub fn pid_centers(window: &GroupWindow<'_>, stride: usize) -> Vec<Frame> {
    window.frames().step_by(stride.max(1)).collect()
}

/// Ordered pairs of distinct members.
pub fn member_pairs(members: &[TrackId]) -> Vec<(TrackId, TrackId)> {
    members
        .iter()
        .flat_map(|&a| members.iter().map(move |&b| (a, b)))
        .filter(|(a, b)| a != b)
        .collect()
}

/// Descriptor from already computed first-stage predictions.
pub fn cbd_from_predictions(
    window: &GroupWindow<'_>,
    predictions: &[InteractionLabel],
    include_shape: bool,
) -> Result<CbdDescriptor> {
    Ok(CbdDescriptor {
        interaction_hist: interaction_histogram(predictions),
        mean_speed: mean_speed(window),
        dispersion_change: dispersion_change(window)?,
        shape_ratio: shape_ratio(&window.positions_at(window.center_frame)),
        include_shape,
    })
}

/// Builds the descriptor of `window`. First-stage predictions are made for
/// every ordered member pair at PID centers spaced `stride` frames apart
/// from the start of the window; pairs whose tracks do not cover a PID
/// window are skipped at that center.
pub fn compute_cbd(
    window: &GroupWindow<'_>,
    pid_model: &RandomForest,
    pid: &PidExtractor,
    stride: usize,
    include_shape: bool,
    seed: u64,
) -> Result<CbdDescriptor> {
    if stride == 0 {
        return Err(Error::Config("stride must be >= 1".into()));
    }
    pid::check_model::<InteractionLabel>(pid_model, pid.descriptor_len())?;
    let scene = window.scene;
    let centers = pid_centers(window, stride);
    let predictions: Vec<Vec<InteractionLabel>> = member_pairs(&window.members)
        .par_iter()
        .map(|&(a, b)| {
            let (Some(ta), Some(tb)) = (scene.track(a), scene.track(b)) else {
                return Ok(Vec::new());
            };
            centers
                .iter()
                .filter(|&&c| pid.covers(ta, tb, c))
                .map(|&c| {
                    let d = pid.extract(ta, tb, scene.fps(), c, seed)?;
                    pid::classify_interaction(&d, pid_model).map(|(l, _)| l)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let predictions: Vec<InteractionLabel> = predictions.into_iter().flatten().collect();
    cbd_from_predictions(window, &predictions, include_shape)
}

pub fn classify_collective(
    descriptor: &CbdDescriptor,
    model: &RandomForest,
) -> Result<(CollectiveLabel, Vec<f64>)> {
    pid::classify(&descriptor.features(), model)
}

/// Same as [`classify_collective`] for a cue subset.
pub fn classify_collective_with(
    descriptor: &CbdDescriptor,
    cues: CueSet,
    model: &RandomForest,
) -> Result<(CollectiveLabel, Vec<f64>)> {
    pid::classify(&descriptor.features_for(cues), model)
}
