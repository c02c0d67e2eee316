//! Ground-plane trajectories and the kinematics derived from them.
//!
//! Positions are in meters, frames are integer indices and velocities are in
//! meters per second. Positions are smoothed with Brown's double exponential
//! filter before differentiation; orientation is taken from the direction of
//! motion and is withheld when the walker is too slow for it to be reliable.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::RangeInclusive;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Frame = i64;

/// Largest run of missing interior frames that is bridged by linear
/// interpolation. Longer gaps split a track into separate segments.
pub const MAX_INTERPOLATED_GAP: Frame = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TrackId(pub u64);

impl fmt::Display for TrackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimedPosition {
    pub frame: Frame,
    pub x: f64,
    pub y: f64,
}

impl TimedPosition {
    pub fn new(frame: Frame, x: f64, y: f64) -> Self {
        Self { frame, x, y }
    }
}

/// One tracked pedestrian. Construction validates the sample ordering, so a
/// `Trajectory` always has strictly increasing frames and finite positions.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    track_id: TrackId,
    samples: Vec<TimedPosition>,
    fps: f64,
}

impl Trajectory {
    pub fn new(track_id: TrackId, fps: f64, samples: Vec<TimedPosition>) -> Result<Self> {
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidParams(format!("fps must be positive, got {fps}")));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.x.is_finite() && s.y.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "track {track_id}: non-finite position at frame {}",
                    s.frame
                )));
            }
            if i > 0 && samples[i - 1].frame >= s.frame {
                return Err(Error::InvalidParams(format!(
                    "track {track_id}: frames must strictly increase ({} then {})",
                    samples[i - 1].frame, s.frame
                )));
            }
        }
        Ok(Self {
            track_id,
            samples,
            fps,
        })
    }

    pub fn track_id(&self) -> TrackId {
        self.track_id
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn samples(&self) -> &[TimedPosition] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first_frame(&self) -> Option<Frame> {
        self.samples.first().map(|s| s.frame)
    }

    pub fn last_frame(&self) -> Option<Frame> {
        self.samples.last().map(|s| s.frame)
    }

    pub fn position_at(&self, frame: Frame) -> Option<(f64, f64)> {
        self.samples
            .binary_search_by_key(&frame, |s| s.frame)
            .ok()
            .map(|i| (self.samples[i].x, self.samples[i].y))
    }

    /// True when every frame of `frames` has a sample.
    pub fn covers(&self, frames: RangeInclusive<Frame>) -> bool {
        let (start, end) = (*frames.start(), *frames.end());
        if end < start {
            return true;
        }
        match self.samples.binary_search_by_key(&start, |s| s.frame) {
            Ok(i) => {
                let j = i + (end - start) as usize;
                j < self.samples.len() && self.samples[j].frame == end
            }
            Err(_) => false,
        }
    }

    /// Maximal runs of consecutive frames.
    pub fn segments(&self) -> Vec<&[TimedPosition]> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.samples.len() {
            if i == self.samples.len() || self.samples[i].frame != self.samples[i - 1].frame + 1 {
                if i > start {
                    out.push(&self.samples[start..i]);
                }
                start = i;
            }
        }
        out
    }

    /// Linearly interpolates runs of at most `max_gap` missing frames.
    pub fn fill_gaps(&self, max_gap: Frame) -> Trajectory {
        let mut samples = Vec::with_capacity(self.samples.len());
        for (i, s) in self.samples.iter().enumerate() {
            if i > 0 {
                let prev = self.samples[i - 1];
                let missing = s.frame - prev.frame - 1;
                if missing > 0 && missing <= max_gap {
                    let span = (s.frame - prev.frame) as f64;
                    for f in prev.frame + 1..s.frame {
                        let w = (f - prev.frame) as f64 / span;
                        samples.push(TimedPosition::new(
                            f,
                            prev.x + w * (s.x - prev.x),
                            prev.y + w * (s.y - prev.y),
                        ));
                    }
                }
            }
            samples.push(*s);
        }
        Trajectory {
            track_id: self.track_id,
            samples,
            fps: self.fps,
        }
    }

    /// Applies `f` to every position, keeping frames. Used for rigid-motion
    /// transforms of whole scenes.
    pub fn map_positions(&self, mut f: impl FnMut(f64, f64) -> (f64, f64)) -> Trajectory {
        let samples = self
            .samples
            .iter()
            .map(|s| {
                let (x, y) = f(s.x, s.y);
                TimedPosition::new(s.frame, x, y)
            })
            .collect();
        Trajectory {
            track_id: self.track_id,
            samples,
            fps: self.fps,
        }
    }

    pub fn with_track_id(mut self, track_id: TrackId) -> Trajectory {
        self.track_id = track_id;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothingConfig {
    /// Smoothing factor shared by the level and trend smoothers.
    pub alpha: f64,
    /// Speed (m/s) below which the heading is considered unreliable.
    pub t_s: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            t_s: 0.25,
        }
    }
}

impl SmoothingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!(
                "smoothing alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if !(self.t_s >= 0.0 && self.t_s.is_finite()) {
            return Err(Error::Config(format!("t_s must be >= 0, got {}", self.t_s)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicState {
    pub frame: Frame,
    pub position: (f64, f64),
    pub velocity: (f64, f64),
    pub speed: f64,
    /// Heading in (-pi, pi]; `None` when `speed < t_s`.
    pub orientation: Option<f64>,
}

impl KinematicState {
    fn from_motion(frame: Frame, position: (f64, f64), velocity: (f64, f64), t_s: f64) -> Self {
        let speed = velocity.0.hypot(velocity.1);
        let orientation = (speed >= t_s).then(|| wrap_angle(velocity.1.atan2(velocity.0)));
        Self {
            frame,
            position,
            velocity,
            speed,
            orientation,
        }
    }
}

/// Target position in the anchor's body frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelativePolar {
    pub rho: f64,
    /// 0 is straight ahead of the anchor, positive counterclockwise.
    pub theta: f64,
}

impl RelativePolar {
    pub fn new(rho: f64, theta: f64) -> Self {
        Self { rho, theta }
    }
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a.rem_euclid(TAU);
    if w > PI {
        w -= TAU;
    }
    // rem_euclid can land on TAU itself for tiny negative inputs
    if w <= -PI {
        w += TAU;
    }
    w
}

/// Smallest signed difference `a - b`, in [-pi, pi].
pub fn angle_difference(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

fn smooth_segment(segment: &[TimedPosition], alpha: f64, out: &mut Vec<TimedPosition>) {
    let first = segment[0];
    if segment.len() == 1 {
        out.push(first);
        return;
    }
    let beta = 1.0 - alpha;
    // Seed the filter with the slope of the first two samples so that a
    // linear track is reproduced exactly from the first frame on.
    let slope = (segment[1].x - first.x, segment[1].y - first.y);
    let mut level = (
        first.x - slope.0 * beta / alpha,
        first.y - slope.1 * beta / alpha,
    );
    let mut trend = (
        first.x - 2.0 * slope.0 * beta / alpha,
        first.y - 2.0 * slope.1 * beta / alpha,
    );
    out.push(first);
    for s in &segment[1..] {
        level = (alpha * s.x + beta * level.0, alpha * s.y + beta * level.1);
        trend = (
            alpha * level.0 + beta * trend.0,
            alpha * level.1 + beta * trend.1,
        );
        out.push(TimedPosition::new(
            s.frame,
            2.0 * level.0 - trend.0,
            2.0 * level.1 - trend.1,
        ));
    }
}

/// Double exponential smoothing of the positions. The filter restarts at
/// each gap in the frame sequence.
pub fn smooth(traj: &Trajectory, cfg: &SmoothingConfig) -> Result<Trajectory> {
    if traj.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "track {} has {} sample(s), smoothing needs 2",
            traj.track_id,
            traj.len()
        )));
    }
    let mut samples = Vec::with_capacity(traj.len());
    for segment in traj.segments() {
        smooth_segment(segment, cfg.alpha, &mut samples);
    }
    Ok(Trajectory {
        track_id: traj.track_id,
        samples,
        fps: traj.fps,
    })
}

fn segment_kinematics(segment: &[TimedPosition], fps: f64, t_s: f64, out: &mut Vec<KinematicState>) {
    let n = segment.len();
    for i in 0..n {
        let velocity = if n == 1 {
            (0.0, 0.0)
        } else {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let dt = (segment[hi].frame - segment[lo].frame) as f64 / fps;
            (
                (segment[hi].x - segment[lo].x) / dt,
                (segment[hi].y - segment[lo].y) / dt,
            )
        };
        let s = segment[i];
        out.push(KinematicState::from_motion(s.frame, (s.x, s.y), velocity, t_s));
    }
}

/// Per-frame kinematics of an already smoothed trajectory.
pub fn kinematics(traj: &Trajectory, cfg: &SmoothingConfig) -> Result<Vec<KinematicState>> {
    if traj.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "track {} has {} sample(s), kinematics needs 2",
            traj.track_id,
            traj.len()
        )));
    }
    let mut out = Vec::with_capacity(traj.len());
    for segment in traj.segments() {
        segment_kinematics(segment, traj.fps, cfg.t_s, &mut out);
    }
    Ok(out)
}

/// Position of `target` relative to `anchor`, rotated into the anchor's
/// heading. A slow anchor has no heading; the angle is then drawn uniformly
/// from `rng` so the descriptor carries distance information only.
pub fn relative_polar<R: Rng + ?Sized>(
    anchor: &KinematicState,
    target: &KinematicState,
    rng: &mut R,
) -> Result<RelativePolar> {
    if anchor.frame != target.frame {
        return Err(Error::FrameMismatch {
            anchor: anchor.frame,
            target: target.frame,
        });
    }
    let dx = target.position.0 - anchor.position.0;
    let dy = target.position.1 - anchor.position.1;
    let rho = dx.hypot(dy);
    let theta = match anchor.orientation {
        Some(heading) => wrap_angle(dy.atan2(dx) - heading),
        // gen() is in [0, 1), so this is in (-pi, pi]
        None => PI - rng.gen::<f64>() * TAU,
    };
    Ok(RelativePolar { rho, theta })
}

pub fn relative_distance_series(
    anchor: &Trajectory,
    target: &Trajectory,
    window: RangeInclusive<Frame>,
) -> Result<Vec<(Frame, f64)>> {
    window
        .clone()
        .map(|f| match (anchor.position_at(f), target.position_at(f)) {
            (Some(a), Some(b)) => Ok((f, (b.0 - a.0).hypot(b.1 - a.1))),
            _ => Err(Error::MissingFrames(format!(
                "tracks {} and {} do not both cover frame {f} of window {}..={}",
                anchor.track_id,
                target.track_id,
                window.start(),
                window.end()
            ))),
        })
        .collect()
}

/// Central differences (one-sided at the ends), in units per second.
pub fn derivative(series: &[(Frame, f64)], fps: f64) -> Result<Vec<(Frame, f64)>> {
    if series.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "derivative needs 2 points, got {}",
            series.len()
        )));
    }
    let step = series[1].0 - series[0].0;
    if step <= 0 || series.windows(2).any(|w| w[1].0 - w[0].0 != step) {
        return Err(Error::MissingFrames(
            "derivative needs uniformly spaced, increasing frames".into(),
        ));
    }
    let n = series.len();
    Ok((0..n)
        .map(|i| {
            let (lo, hi) = (i.saturating_sub(1), (i + 1).min(n - 1));
            let dt = (series[hi].0 - series[lo].0) as f64 / fps;
            (series[i].0, (series[hi].1 - series[lo].1) / dt)
        })
        .collect())
}

/// Kinematic states of one track indexed by frame. Built from raw samples:
/// short gaps are interpolated, then each segment is smoothed and
/// differentiated. Single-sample segments get zero velocity.
#[derive(Clone, Debug)]
pub struct KinematicTrack {
    track_id: TrackId,
    states: Vec<KinematicState>,
}

impl KinematicTrack {
    pub fn from_raw(traj: &Trajectory, cfg: &SmoothingConfig) -> Self {
        let filled = traj.fill_gaps(MAX_INTERPOLATED_GAP);
        let mut smoothed = Vec::with_capacity(filled.len());
        for segment in filled.segments() {
            smooth_segment(segment, cfg.alpha, &mut smoothed);
        }
        let smoothed = Trajectory {
            track_id: traj.track_id,
            samples: smoothed,
            fps: traj.fps,
        };
        let mut states = Vec::with_capacity(smoothed.len());
        for segment in smoothed.segments() {
            segment_kinematics(segment, traj.fps, cfg.t_s, &mut states);
        }
        Self {
            track_id: traj.track_id,
            states,
        }
    }

    pub fn track_id(&self) -> TrackId {
        self.track_id
    }

    pub fn states(&self) -> &[KinematicState] {
        &self.states
    }

    pub fn state(&self, frame: Frame) -> Option<&KinematicState> {
        self.states
            .binary_search_by_key(&frame, |s| s.frame)
            .ok()
            .map(|i| &self.states[i])
    }

    /// Contiguous states for every frame of the range, or `None` on a gap.
    pub fn window(&self, frames: RangeInclusive<Frame>) -> Option<&[KinematicState]> {
        let (start, end) = (*frames.start(), *frames.end());
        let i = self.states.binary_search_by_key(&start, |s| s.frame).ok()?;
        let j = i + usize::try_from(end - start).ok()?;
        (j < self.states.len() && self.states[j].frame == end).then(|| &self.states[i..=j])
    }

    pub fn covers(&self, frames: RangeInclusive<Frame>) -> bool {
        self.window(frames).is_some()
    }
}

/// Kinematics of every track in a recording.
#[derive(Clone, Debug)]
pub struct SceneKinematics {
    fps: f64,
    tracks: BTreeMap<TrackId, KinematicTrack>,
}

impl SceneKinematics {
    pub fn new(trajectories: &[Trajectory], fps: f64, cfg: &SmoothingConfig) -> Self {
        let tracks = trajectories
            .iter()
            .filter(|t| !t.is_empty())
            .map(|t| (t.track_id, KinematicTrack::from_raw(t, cfg)))
            .collect();
        Self { fps, tracks }
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn track(&self, id: TrackId) -> Option<&KinematicTrack> {
        self.tracks.get(&id)
    }

    pub fn tracks(&self) -> impl Iterator<Item = &KinematicTrack> {
        self.tracks.values()
    }

    pub fn track_ids(&self) -> impl Iterator<Item = TrackId> + '_ {
        self.tracks.keys().copied()
    }
}
