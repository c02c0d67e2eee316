//! Personal interaction descriptor for an ordered (anchor, target) pair.
//!
//! Over a window of `t1` frames the target's position in the anchor's body
//! frame is soft-assigned to a polar grid of proxemic distance bands and
//! four angular sectors, using a Gaussian kernel sampled on a regular grid
//! around each observation. The histogram is followed by a pyramid of mean
//! relative speeds (the derivative of the pair distance) averaged over
//! 1, 2, 4, ... equal sub-intervals of the window.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::RandomForest;
use crate::label::Label;
use crate::seed;
use crate::trajectory::{
    angle_difference, derivative, relative_polar, wrap_angle, Frame, KinematicState,
    KinematicTrack, RelativePolar, SmoothingConfig, Trajectory,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InteractionLabel {
    BeingFollowed,
    Following,
    WalkingTogether,
    StandingPair,
    Splitting,
    Approaching,
}

impl Label for InteractionLabel {
    const ALL: &'static [Self] = &[
        InteractionLabel::BeingFollowed,
        InteractionLabel::Following,
        InteractionLabel::WalkingTogether,
        InteractionLabel::StandingPair,
        InteractionLabel::Splitting,
        InteractionLabel::Approaching,
    ];
    const KIND: &'static str = "interaction";

    fn code(self) -> &'static str {
        match self {
            InteractionLabel::BeingFollowed => "BF",
            InteractionLabel::Following => "F",
            InteractionLabel::WalkingTogether => "WT",
            InteractionLabel::StandingPair => "SP",
            InteractionLabel::Splitting => "S",
            InteractionLabel::Approaching => "Ap",
        }
    }
}

impl fmt::Display for InteractionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for InteractionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_code(s)
    }
}

pub const SECTOR_COUNT: usize = 4;

/// Sector indices, counterclockwise from the anchor's heading.
pub const FRONT: usize = 0;
pub const LEFT: usize = 1;
pub const BACK: usize = 2;
pub const RIGHT: usize = 3;

/// Radial bands from interpersonal distance boundaries, crossed with four
/// sectors centered on front, left, back and right. Bands are half-open
/// `[lo, hi)`; the outermost band is unbounded. Sector boundaries sit at
/// +-pi/4 and +-3pi/4, also half-open counterclockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarGrid {
    distance_boundaries: Vec<f64>,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self {
            distance_boundaries: vec![0.5, 1.25, 3.5],
        }
    }
}

impl PolarGrid {
    pub fn new(distance_boundaries: Vec<f64>) -> Result<Self> {
        let increasing = distance_boundaries.windows(2).all(|w| w[0] < w[1]);
        if distance_boundaries.is_empty()
            || !increasing
            || distance_boundaries[0] <= 0.0
            || distance_boundaries.iter().any(|b| !b.is_finite())
        {
            return Err(Error::Config(
                "distance boundaries must be positive, finite and strictly increasing".into(),
            ));
        }
        Ok(Self {
            distance_boundaries,
        })
    }

    pub fn distance_boundaries(&self) -> &[f64] {
        &self.distance_boundaries
    }

    pub fn band_count(&self) -> usize {
        self.distance_boundaries.len() + 1
    }

    pub fn cell_count(&self) -> usize {
        self.band_count() * SECTOR_COUNT
    }

    pub fn band(&self, rho: f64) -> usize {
        self.distance_boundaries.partition_point(|&b| b <= rho)
    }

    pub fn sector(&self, theta: f64) -> usize {
        let shifted = (wrap_angle(theta) + FRAC_PI_4).rem_euclid(2.0 * PI);
        ((shifted / FRAC_PI_2) as usize).min(SECTOR_COUNT - 1)
    }

    /// `band * 4 + sector`.
    pub fn cell(&self, p: RelativePolar) -> usize {
        self.band(p.rho) * SECTOR_COUNT + self.sector(p.theta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PidConfig {
    /// Window length in frames; a power of two.
    pub t1: usize,
    pub sigma_rho: f64,
    pub sigma_theta: f64,
    /// Half-extent of the sampling grid in units of sigma.
    pub k_s: f64,
    pub l_max: u32,
    /// The sampling grid has `n x n` points.
    pub grid_samples_per_axis: usize,
    /// Divide by sigma^2 instead of sigma in the kernel exponent.
    pub variance_denominator: bool,
    /// `false` counts each observation in its own cell only.
    pub soft_assignment: bool,
}

impl Default for PidConfig {
    fn default() -> Self {
        Self {
            t1: 64,
            sigma_rho: 0.25,
            sigma_theta: PI / 8.0,
            k_s: 3.0,
            l_max: 1,
            grid_samples_per_axis: 9,
            variance_denominator: false,
            soft_assignment: true,
        }
    }
}

impl PidConfig {
    pub fn validate(&self) -> Result<()> {
        if self.t1 < 2 || !self.t1.is_power_of_two() {
            return Err(Error::Config(format!("t1 must be a power of two >= 2, got {}", self.t1)));
        }
        if !(self.sigma_rho > 0.0 && self.sigma_theta > 0.0) {
            return Err(Error::Config("sigma_rho and sigma_theta must be positive".into()));
        }
        if !(self.k_s > 0.0) {
            return Err(Error::Config("k_s must be positive".into()));
        }
        if self.l_max >= usize::BITS || (1usize << self.l_max) > self.t1 {
            return Err(Error::Config(format!(
                "2^l_max must not exceed t1 (l_max {}, t1 {})",
                self.l_max, self.t1
            )));
        }
        if self.grid_samples_per_axis == 0 {
            return Err(Error::Config("grid_samples_per_axis must be >= 1".into()));
        }
        Ok(())
    }

    pub fn pyramid_len(&self) -> usize {
        (1usize << (self.l_max + 1)) - 1
    }

    pub fn descriptor_len(&self, grid: &PolarGrid) -> usize {
        grid.cell_count() + self.pyramid_len()
    }

    /// Frames of the window centered at `center`: `center - t1/2 + 1 ..= center + t1/2`.
    pub fn window(&self, center: Frame) -> std::ops::RangeInclusive<Frame> {
        let half = (self.t1 / 2) as Frame;
        center - half + 1..=center + half
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PidDescriptor {
    pub histogram: Vec<f64>,
    /// Mean relative speed per pyramid interval, m/s, coarsest level first.
    pub speed_pyramid: Vec<f64>,
    pub center_frame: Frame,
}

impl PidDescriptor {
    pub fn features(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.histogram.len() + self.speed_pyramid.len());
        v.extend_from_slice(&self.histogram);
        v.extend_from_slice(&self.speed_pyramid);
        v
    }
}

pub fn kde_kernel(sample: RelativePolar, center: RelativePolar, cfg: &PidConfig) -> f64 {
    let (den_rho, den_theta) = if cfg.variance_denominator {
        (cfg.sigma_rho * cfg.sigma_rho, cfg.sigma_theta * cfg.sigma_theta)
    } else {
        (cfg.sigma_rho, cfg.sigma_theta)
    };
    let dr = sample.rho - center.rho;
    let dt = angle_difference(sample.theta, center.theta);
    (-(dr * dr) / (2.0 * den_rho) - (dt * dt) / (2.0 * den_theta)).exp()
}

/// Grid offsets and kernel weights relative to the observation. The kernel
/// depends only on the offset, so one template serves every frame.
#[derive(Clone, Debug)]
struct GridTemplate {
    points: Vec<(f64, f64, f64)>,
}

impl GridTemplate {
    fn new(cfg: &PidConfig) -> Self {
        let n = cfg.grid_samples_per_axis;
        let unit = |i: usize| {
            if n == 1 {
                0.0
            } else {
                (2.0 * i as f64 - (n - 1) as f64) / (n - 1) as f64
            }
        };
        let origin = RelativePolar::new(0.0, 0.0);
        let mut points = Vec::with_capacity(n * n);
        for i in 0..n {
            let dr = unit(i) * cfg.k_s * cfg.sigma_rho;
            for j in 0..n {
                let dt = unit(j) * cfg.k_s * cfg.sigma_theta;
                let w = kde_kernel(RelativePolar::new(dr, dt), origin, cfg);
                points.push((dr, dt, w));
            }
        }
        Self { points }
    }

    /// Retained samples around `center` with weights summing to one.
    fn place(&self, center: RelativePolar) -> Vec<(RelativePolar, f64)> {
        let mut out: Vec<(RelativePolar, f64)> = self
            .points
            .iter()
            .filter_map(|&(dr, dt, w)| {
                let rho = center.rho + dr;
                (rho >= 0.0).then(|| (RelativePolar::new(rho, wrap_angle(center.theta + dt)), w))
            })
            .collect();
        let total: f64 = out.iter().map(|s| s.1).sum();
        for s in &mut out {
            s.1 /= total;
        }
        out
    }
}

/// Kernel-weighted sample points on an `n x n` grid spanning `k_s` sigmas
/// either side of `center`. Points at negative distance are dropped and the
/// remaining weights renormalized to one.
pub fn sample_grid(center: RelativePolar, cfg: &PidConfig) -> Vec<(RelativePolar, f64)> {
    GridTemplate::new(cfg).place(center)
}

/// Builds per-window histograms; holds the precomputed sampling template.
#[derive(Clone, Debug)]
pub struct HistogramBuilder {
    cfg: PidConfig,
    grid: PolarGrid,
    template: GridTemplate,
}

impl HistogramBuilder {
    pub fn new(cfg: &PidConfig, grid: &PolarGrid) -> Self {
        Self {
            cfg: cfg.clone(),
            grid: grid.clone(),
            template: GridTemplate::new(cfg),
        }
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn accumulate(&self, pair_samples: &[RelativePolar]) -> Result<Vec<f64>> {
        if pair_samples.len() != self.cfg.t1 {
            return Err(Error::WindowLengthMismatch {
                expected: self.cfg.t1,
                actual: pair_samples.len(),
            });
        }
        let frame_weight = 1.0 / pair_samples.len() as f64;
        let mut hist = vec![0.0; self.grid.cell_count()];
        for &obs in pair_samples {
            if self.cfg.soft_assignment {
                for (p, w) in self.template.place(obs) {
                    hist[self.grid.cell(p)] += w * frame_weight;
                }
            } else {
                hist[self.grid.cell(obs)] += frame_weight;
            }
        }
        Ok(hist)
    }
}

/// Soft histogram over one window of relative positions; sums to one.
pub fn accumulate_histogram(
    pair_samples: &[RelativePolar],
    grid: &PolarGrid,
    cfg: &PidConfig,
) -> Result<Vec<f64>> {
    HistogramBuilder::new(cfg, grid).accumulate(pair_samples)
}

/// Level `l` splits the window into `2^l` equal intervals and reports the
/// mean of `d_prime` over each; levels `0..=l_max` are concatenated.
pub fn speed_pyramid(d_prime: &[f64], cfg: &PidConfig) -> Result<Vec<f64>> {
    if d_prime.len() != cfg.t1 {
        return Err(Error::WindowLengthMismatch {
            expected: cfg.t1,
            actual: d_prime.len(),
        });
    }
    let mut out = Vec::with_capacity(cfg.pyramid_len());
    for level in 0..=cfg.l_max {
        let parts = 1usize << level;
        let width = d_prime.len() / parts;
        for chunk in d_prime.chunks_exact(width) {
            out.push(chunk.iter().sum::<f64>() / width as f64);
        }
    }
    Ok(out)
}

/// Extracts descriptors from precomputed kinematics.
#[derive(Clone, Debug)]
pub struct PidExtractor {
    cfg: PidConfig,
    histogram: HistogramBuilder,
}

impl PidExtractor {
    pub fn new(cfg: &PidConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            histogram: HistogramBuilder::new(cfg, &PolarGrid::default()),
        })
    }

    pub fn config(&self) -> &PidConfig {
        &self.cfg
    }

    pub fn descriptor_len(&self) -> usize {
        self.cfg.descriptor_len(self.histogram.grid())
    }

    /// True when both tracks have contiguous states over the window.
    pub fn covers(&self, anchor: &KinematicTrack, target: &KinematicTrack, center: Frame) -> bool {
        let w = self.cfg.window(center);
        anchor.covers(w.clone()) && target.covers(w)
    }

    pub fn extract(
        &self,
        anchor: &KinematicTrack,
        target: &KinematicTrack,
        fps: f64,
        center: Frame,
        seed: u64,
    ) -> Result<PidDescriptor> {
        let window = self.cfg.window(center);
        let missing = |id| {
            Error::MissingFrames(format!(
                "track {id} does not cover frames {}..={}",
                window.start(),
                window.end()
            ))
        };
        let a = anchor
            .window(window.clone())
            .ok_or_else(|| missing(anchor.track_id()))?;
        let t = target
            .window(window.clone())
            .ok_or_else(|| missing(target.track_id()))?;
        self.extract_states(a, t, anchor.track_id().0, target.track_id().0, fps, center, seed)
    }

    #[allow(clippy::too_many_arguments)]
    fn extract_states(
        &self,
        anchor: &[KinematicState],
        target: &[KinematicState],
        anchor_id: u64,
        target_id: u64,
        fps: f64,
        center: Frame,
        seed: u64,
    ) -> Result<PidDescriptor> {
        let polar = anchor
            .iter()
            .zip(target)
            .map(|(a, t)| {
                let mut rng = seed::rng(seed, &[anchor_id, target_id, a.frame as u64]);
                relative_polar(a, t, &mut rng)
            })
            .collect::<Result<Vec<_>>>()?;
        let histogram = self.histogram.accumulate(&polar)?;
        let distance: Vec<(Frame, f64)> = anchor
            .iter()
            .zip(target)
            .map(|(a, t)| {
                (
                    a.frame,
                    (t.position.0 - a.position.0).hypot(t.position.1 - a.position.1),
                )
            })
            .collect();
        let d_prime: Vec<f64> = derivative(&distance, fps)?.into_iter().map(|(_, v)| v).collect();
        Ok(PidDescriptor {
            histogram,
            speed_pyramid: speed_pyramid(&d_prime, &self.cfg)?,
            center_frame: center,
        })
    }
}

/// Descriptor for `anchor -> target` over the window centered at `center`.
/// Both trajectories are smoothed and differentiated first.
pub fn compute_pid(
    anchor: &Trajectory,
    target: &Trajectory,
    center: Frame,
    cfg: &PidConfig,
    smoothing: &SmoothingConfig,
    seed: u64,
) -> Result<PidDescriptor> {
    smoothing.validate()?;
    let extractor = PidExtractor::new(cfg)?;
    let a = KinematicTrack::from_raw(anchor, smoothing);
    let t = KinematicTrack::from_raw(target, smoothing);
    extractor.extract(&a, &t, anchor.fps(), center, seed)
}

/// Checks that `model` was trained on `L`'s class set and `dim` features.
pub(crate) fn check_model<L: Label>(model: &RandomForest, dim: usize) -> Result<()> {
    if model.feature_count() != dim {
        return Err(Error::ModelShapeMismatch(format!(
            "{} model expects {} features, descriptor has {dim}",
            L::KIND,
            model.feature_count()
        )));
    }
    if model.class_names() != L::class_names().as_slice() {
        return Err(Error::ModelShapeMismatch(format!(
            "model classes {:?} are not the {} label set",
            model.class_names(),
            L::KIND
        )));
    }
    Ok(())
}

pub(crate) fn classify<L: Label>(features: &[f64], model: &RandomForest) -> Result<(L, Vec<f64>)> {
    check_model::<L>(model, features.len())?;
    let p = model.predict(features)?;
    let label = L::from_index(p.class).expect("class index within label set");
    Ok((label, p.probabilities))
}

pub fn classify_interaction(
    descriptor: &PidDescriptor,
    model: &RandomForest,
) -> Result<(InteractionLabel, Vec<f64>)> {
    classify(&descriptor.features(), model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::{ForestConfig, LabeledSample};
    use crate::trajectory::{TimedPosition, TrackId};

    fn line(id: u64, n: Frame, f: impl Fn(Frame) -> (f64, f64)) -> Trajectory {
        Trajectory::new(
            TrackId(id),
            30.0,
            (0..n)
                .map(|i| {
                    let (x, y) = f(i);
                    TimedPosition::new(i, x, y)
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn labels_round_trip_codes() {
        for &l in InteractionLabel::ALL {
            assert_eq!(l.code().parse::<InteractionLabel>().unwrap(), l);
            assert_eq!(InteractionLabel::from_index(l.index()), Some(l));
        }
        assert!("X".parse::<InteractionLabel>().is_err());
    }

    #[test]
    fn grid_partition() {
        let g = PolarGrid::default();
        assert_eq!(g.cell_count(), 16);
        assert_eq!(g.band(0.0), 0);
        assert_eq!(g.band(0.49), 0);
        assert_eq!(g.band(0.5), 1);
        assert_eq!(g.band(3.4), 2);
        assert_eq!(g.band(100.0), 3);
        assert_eq!(g.sector(0.0), FRONT);
        assert_eq!(g.sector(PI / 2.0), LEFT);
        assert_eq!(g.sector(PI), BACK);
        assert_eq!(g.sector(-PI / 2.0), RIGHT);
        assert_eq!(g.sector(-3.0), BACK);
        assert!(PolarGrid::new(vec![1.0, 0.5]).is_err());
    }

    #[test]
    fn kernel_values() {
        let cfg = PidConfig::default();
        let c = RelativePolar::new(1.0, 0.3);
        assert_eq!(kde_kernel(c, c, &cfg), 1.0);
        let s = RelativePolar::new(1.0 + (2.0 * cfg.sigma_rho).sqrt(), 0.3);
        assert!((kde_kernel(s, c, &cfg) - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn kernel_wraps_angles() {
        let cfg = PidConfig::default();
        let eps = 0.01;
        let a = kde_kernel(RelativePolar::new(1.0, PI - eps), RelativePolar::new(1.0, -PI + eps), &cfg);
        // brute force: the smallest difference over all 2*pi shifts
        let brute = (-3..=3)
            .map(|k| ((PI - eps) - (-PI + eps + 2.0 * PI * k as f64)).abs())
            .fold(f64::INFINITY, f64::min);
        assert!((brute - 2.0 * eps).abs() < 1e-12);
        let expected = (-(brute * brute) / (2.0 * cfg.sigma_theta)).exp();
        assert!((a - expected).abs() < 1e-12);
        assert!(a > 0.99);
    }

    #[test]
    fn variance_denominator_switch() {
        let cfg = PidConfig {
            variance_denominator: true,
            ..PidConfig::default()
        };
        let s = RelativePolar::new(1.0 + cfg.sigma_rho, 0.0);
        let v = kde_kernel(s, RelativePolar::new(1.0, 0.0), &cfg);
        assert!((v - (-0.5f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn sample_grid_normalized() {
        let cfg = PidConfig::default();
        let g = sample_grid(RelativePolar::new(2.0, 0.1), &cfg);
        assert_eq!(g.len(), 81);
        assert!((g.iter().map(|s| s.1).sum::<f64>() - 1.0).abs() < 1e-9);
        let g = sample_grid(RelativePolar::new(0.1, 0.1), &cfg);
        assert!(g.len() < 81);
        assert!(g.iter().all(|s| s.0.rho >= 0.0));
        assert!((g.iter().map(|s| s.1).sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(g.iter().all(|s| s.0.theta > -PI && s.0.theta <= PI));
    }

    #[test]
    fn histogram_window_length() {
        let cfg = PidConfig::default();
        let samples = vec![RelativePolar::new(1.0, 0.0); 10];
        assert!(matches!(
            accumulate_histogram(&samples, &PolarGrid::default(), &cfg),
            Err(Error::WindowLengthMismatch { expected: 64, actual: 10 })
        ));
    }

    #[test]
    fn concentrated_in_cell_for_small_sigma() {
        let cfg = PidConfig {
            sigma_rho: 0.01,
            sigma_theta: 0.01,
            ..PidConfig::default()
        };
        let grid = PolarGrid::default();
        // (band 2, front) is rho in [1.25, 3.5), theta around 0
        let samples = vec![RelativePolar::new(2.375, 0.0); 64];
        let h = accumulate_histogram(&samples, &grid, &cfg).unwrap();
        let cell = 2 * SECTOR_COUNT + FRONT;
        assert!(h[cell] >= 0.99);
        assert!(h.iter().enumerate().filter(|&(i, _)| i != cell).map(|(_, v)| v).sum::<f64>() <= 0.01);
    }

    #[test]
    fn boundary_sample_splits_evenly() {
        // an even grid keeps no sample exactly on the sector boundary, so the
        // two sides mirror each other
        let cfg = PidConfig {
            grid_samples_per_axis: 10,
            ..PidConfig::default()
        };
        let samples = vec![RelativePolar::new(2.375, FRAC_PI_4); 64];
        let h = accumulate_histogram(&samples, &PolarGrid::default(), &cfg).unwrap();
        let (front, left) = (h[2 * SECTOR_COUNT + FRONT], h[2 * SECTOR_COUNT + LEFT]);
        assert!((front - left).abs() < 1e-3, "{front} vs {left}");
        assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn pyramid_examples() {
        let cfg = PidConfig::default();
        let c = speed_pyramid(&[0.7; 64], &cfg).unwrap();
        assert!(c.iter().all(|&v| (v - 0.7).abs() < 1e-12));
        let step: Vec<f64> = (0..64).map(|i| if i < 32 { -1.0 } else { 1.0 }).collect();
        assert_eq!(speed_pyramid(&step, &cfg).unwrap(), vec![0.0, -1.0, 1.0]);
        assert!(matches!(
            speed_pyramid(&[0.0; 63], &cfg),
            Err(Error::WindowLengthMismatch { .. })
        ));
    }

    #[test]
    fn descriptor_lengths() {
        let grid = PolarGrid::default();
        for (l, len) in [(0, 17), (1, 19), (2, 23), (3, 31)] {
            let cfg = PidConfig {
                l_max: l,
                ..PidConfig::default()
            };
            assert_eq!(cfg.descriptor_len(&grid), len);
        }
    }

    #[test]
    fn config_validation() {
        let bad = [
            PidConfig { t1: 48, ..PidConfig::default() },
            PidConfig { sigma_rho: 0.0, ..PidConfig::default() },
            PidConfig { t1: 4, l_max: 3, ..PidConfig::default() },
            PidConfig { k_s: -1.0, ..PidConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(PidConfig::default().validate().is_ok());
    }

    #[test]
    fn approaching_target_has_negative_speeds() {
        let anchor = line(1, 100, |_| (0.0, 0.0));
        let target = line(2, 100, |f| (6.0 - f as f64 / 30.0, 0.0));
        let d = compute_pid(&anchor, &target, 50, &PidConfig::default(), &SmoothingConfig::default(), 1)
            .unwrap();
        for v in &d.speed_pyramid {
            assert!((v + 1.0).abs() < 0.05, "{v}");
        }
        assert!((d.histogram.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn missing_coverage_is_reported() {
        let anchor = line(1, 40, |_| (0.0, 0.0));
        let target = line(2, 100, |f| (f as f64 / 30.0, 1.0));
        let r = compute_pid(&anchor, &target, 50, &PidConfig::default(), &SmoothingConfig::default(), 1);
        assert!(matches!(r, Err(Error::MissingFrames(_))));
    }

    #[test]
    fn coincident_pair_concentrates_near_anchor() {
        let a = line(1, 80, |f| (f as f64 / 30.0, 0.0));
        let b = a.clone().with_track_id(TrackId(2));
        let cfg = PidConfig::default();
        let d = compute_pid(&a, &b, 40, &cfg, &SmoothingConfig::default(), 3).unwrap();
        let band = |k: usize| d.histogram[k * 4..k * 4 + 4].iter().sum::<f64>();
        assert!(band(0) > band(1));
        assert!(band(2) + band(3) < 1e-12);
        // hard assignment at rho = 0 puts everything in the innermost band
        let hard = PidConfig {
            soft_assignment: false,
            ..cfg
        };
        let d = compute_pid(&a, &b, 40, &hard, &SmoothingConfig::default(), 3).unwrap();
        assert!(d.histogram[..4].iter().sum::<f64>() >= 0.99);
    }

    #[test]
    fn degenerate_model_classifies_everything() {
        let sample = LabeledSample::new(vec![0.5; 19], InteractionLabel::WalkingTogether.index());
        let cfg = ForestConfig {
            n_trees: 1,
            ..ForestConfig::default()
        };
        let model = RandomForest::fit(&[sample], InteractionLabel::class_names(), &cfg).unwrap();
        let d = PidDescriptor {
            histogram: vec![1.0 / 16.0; 16],
            speed_pyramid: vec![3.0, -1.0, 2.0],
            center_frame: 0,
        };
        let (label, p) = classify_interaction(&d, &model).unwrap();
        assert_eq!(label, InteractionLabel::WalkingTogether);
        assert_eq!(p[label.index()], 1.0);

        let short = PidDescriptor {
            speed_pyramid: vec![0.0],
            ..d
        };
        assert!(matches!(
            classify_interaction(&short, &model),
            Err(Error::ModelShapeMismatch(_))
        ));
    }
}
