//! Seeded synthetic scenes for every interaction and collective label.
//!
//! Geometry is drawn first from a stream keyed by the seed and a label
//! family (labels that are role swaps or time reversals of each other share
//! a family, so they share geometry), then isotropic Gaussian position noise
//! is added per frame.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::cbd::CollectiveLabel;
use crate::dataset::{CollectiveAnnotation, PairAnnotation, SceneRecording};
use crate::error::{Error, Result};
use crate::label::Label;
use crate::pid::InteractionLabel;
use crate::seed;
use crate::trajectory::{Frame, TimedPosition, TrackId, Trajectory};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthParams {
    pub fps: f64,
    pub duration_frames: usize,
    /// m/s.
    pub walk_speed: f64,
    /// Per-frame position jitter (m).
    pub noise_sigma: f64,
    pub group_size: usize,
    /// Multiplier on every inter-person distance.
    pub spacing: f64,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            fps: 30.0,
            duration_frames: 128,
            walk_speed: 1.3,
            noise_sigma: 0.02,
            group_size: 4,
            spacing: 1.0,
            seed: 42,
        }
    }
}

impl SynthParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        };
        positive(self.fps, "fps")?;
        positive(self.walk_speed, "walk_speed")?;
        positive(self.spacing, "spacing")?;
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::InvalidParams(format!("noise_sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if self.duration_frames < 2 {
            return Err(Error::InvalidParams("duration_frames must be >= 2".into()));
        }
        if self.group_size == 0 {
            return Err(Error::InvalidParams("group_size must be >= 1".into()));
        }
        Ok(())
    }

    fn seconds(&self, frame: usize) -> f64 {
        frame as f64 / self.fps
    }
}

type Path2 = Vec<(f64, f64)>;

fn unit(a: f64) -> (f64, f64) {
    (a.cos(), a.sin())
}

fn add(p: (f64, f64), q: (f64, f64), k: f64) -> (f64, f64) {
    (p.0 + k * q.0, p.1 + k * q.1)
}

fn scene_frame(rng: &mut ChaCha8Rng) -> ((f64, f64), (f64, f64), (f64, f64)) {
    let heading = rng.gen_range(0.0..TAU);
    let origin = (rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
    let u = unit(heading);
    (origin, u, (-u.1, u.0))
}

fn noisy(paths: Vec<Path2>, sigma: f64, rng: &mut ChaCha8Rng) -> Vec<Path2> {
    if sigma == 0.0 {
        return paths;
    }
    let n = Normal::new(0.0, sigma).expect("finite sigma");
    paths
        .into_iter()
        .map(|p| p.into_iter().map(|(x, y)| (x + n.sample(rng), y + n.sample(rng))).collect())
        .collect()
}

fn to_trajectories(paths: &[Path2], fps: f64) -> Vec<Trajectory> {
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let samples = p
                .iter()
                .enumerate()
                .map(|(f, &(x, y))| TimedPosition::new(f as Frame, x, y))
                .collect();
            Trajectory::new(TrackId(i as u64 + 1), fps, samples).expect("finite positions, increasing frames")
        })
        .collect()
}

fn reversed(paths: Vec<Path2>) -> Vec<Path2> {
    paths
        .into_iter()
        .map(|mut p| {
            p.reverse();
            p
        })
        .collect()
}

/// Label seen from the other member of the pair.
pub fn swapped_role(label: InteractionLabel) -> InteractionLabel {
    match label {
        InteractionLabel::Following => InteractionLabel::BeingFollowed,
        InteractionLabel::BeingFollowed => InteractionLabel::Following,
        other => other,
    }
}

fn pair_family(label: InteractionLabel) -> u64 {
    use InteractionLabel::*;
    match label {
        Following | BeingFollowed => 0,
        WalkingTogether => 1,
        StandingPair => 2,
        Splitting | Approaching => 3,
    }
}

/// Two-person scene realizing `label`, annotated in both directions for the
/// whole duration. Track 1 is the anchor of the `label` annotation.
///
/// `F`: the anchor walks 1.5 m behind the target on the same path. `BF` is
/// the same geometry with the tracks swapped. `WT`: parallel paths 0.8 m
/// apart. `SP`: both stationary 1 m apart. `S`: distance grows from 1 m at
/// 0.9 m/s; `Ap` is `S` played backwards.
pub fn gen_pair(label: InteractionLabel, p: &SynthParams) -> Result<SceneRecording> {
    use InteractionLabel::*;
    p.validate()?;
    let mut rng = seed::rng(p.seed, &[1, pair_family(label)]);
    let (o, u, n) = scene_frame(&mut rng);
    let v = p.walk_speed;
    let s = p.spacing;
    let frames = 0..p.duration_frames;
    let at = |f: usize| p.seconds(f);
    let mut paths: Vec<Path2> = match label {
        Following | BeingFollowed => {
            let leader: Path2 = frames.clone().map(|f| add(o, u, v * at(f))).collect();
            let follower: Path2 = leader.iter().map(|&q| add(q, u, -1.5 * s)).collect();
            vec![follower, leader]
        }
        WalkingTogether => {
            let a: Path2 = frames.clone().map(|f| add(o, u, v * at(f))).collect();
            let b = a.iter().map(|&q| add(q, n, 0.8 * s)).collect();
            vec![a, b]
        }
        StandingPair => {
            let d = unit(rng.gen_range(0.0..TAU));
            let len = p.duration_frames;
            vec![vec![o; len], vec![add(o, d, 1.0 * s); len]]
        }
        Splitting | Approaching => {
            let lateral = 0.45;
            let mk = |side: f64| -> Path2 {
                frames
                    .clone()
                    .map(|f| {
                        let c = add(o, u, 0.5 * v * at(f));
                        add(c, n, side * (0.5 * s + lateral * at(f)))
                    })
                    .collect()
            };
            vec![mk(1.0), mk(-1.0)]
        }
    };
    paths = noisy(paths, p.noise_sigma, &mut rng);
    if label == BeingFollowed {
        paths.swap(0, 1);
    }
    if label == Approaching {
        paths = reversed(paths);
    }
    let end = p.duration_frames as Frame - 1;
    let ann = |a: u64, t: u64, l| PairAnnotation {
        start: 0,
        end,
        anchor: TrackId(a),
        target: TrackId(t),
        label: l,
    };
    SceneRecording::new(
        format!("pair-{}-{}", label.code(), p.seed),
        p.fps,
        to_trajectories(&paths, p.fps),
        vec![ann(1, 2, label), ann(2, 1, swapped_role(label))],
        vec![],
    )
}

fn collective_family(label: CollectiveLabel) -> u64 {
    use CollectiveLabel::*;
    match label {
        Gathering | Dismissal => 0,
        Talking => 1,
        Walking => 2,
        Chasing => 3,
        Queuing => 4,
    }
}

fn polygon(center: (f64, f64), radius: f64, n: usize, rotation: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|k| add(center, unit(rotation + TAU * k as f64 / n as f64), radius))
        .collect()
}

/// Pair label of every ordered member pair for one collective scene.
fn member_pair_labels(label: CollectiveLabel, n: usize, order: &[f64]) -> Vec<PairAnnotation> {
    use CollectiveLabel::*;
    let mut out = Vec::new();
    for a in 0..n {
        for t in 0..n {
            if a == t {
                continue;
            }
            let l = match label {
                Gathering => InteractionLabel::Approaching,
                Dismissal => InteractionLabel::Splitting,
                Talking | Queuing => InteractionLabel::StandingPair,
                Walking => InteractionLabel::WalkingTogether,
                // order holds the position along the walking direction
                Chasing if order[t] > order[a] => InteractionLabel::Following,
                Chasing => InteractionLabel::BeingFollowed,
            };
            out.push(PairAnnotation {
                start: 0,
                end: 0,
                anchor: TrackId(a as u64 + 1),
                target: TrackId(t as u64 + 1),
                label: l,
            });
        }
    }
    out
}

/// Group scene realizing `label` with `p.group_size` members (at least 2,
/// at least 4 for queues). Member pairs carry the matching interaction
/// annotations.
///
/// Gathering converges radially from about 4 m to a 1 m radius; Dismissal
/// is its time reversal. Talking is a stationary regular polygon, Walking a
/// polygon translating at walking speed, Chasing a single file at 2.2 times
/// walking speed, Queuing a standing file that shuffles forward 0.4 m every
/// 1.5 s.
pub fn gen_collective(label: CollectiveLabel, p: &SynthParams) -> Result<SceneRecording> {
    use CollectiveLabel::*;
    p.validate()?;
    let n = p.group_size;
    let min = if label == Queuing { 4 } else { 2 };
    if n < min {
        return Err(Error::InvalidParams(format!("{label} needs a group of at least {min}, got {n}")));
    }
    let mut rng = seed::rng(p.seed, &[2, collective_family(label)]);
    let (o, u, _) = scene_frame(&mut rng);
    let (v, s) = (p.walk_speed, p.spacing);
    let len = p.duration_frames;
    let rotation = rng.gen_range(0.0..TAU);
    let mut order = vec![0.0; n];
    let mut paths: Vec<Path2> = match label {
        Gathering | Dismissal => {
            let starts: Vec<(f64, f64)> = (0..n)
                .map(|k| {
                    let a = rotation + TAU * k as f64 / n as f64;
                    (a, (4.0 + rng.gen_range(0.0..0.5)) * s)
                })
                .collect();
            starts
                .iter()
                .map(|&(a, r0)| {
                    (0..len)
                        .map(|f| {
                            let w = f as f64 / (len - 1) as f64;
                            add(o, unit(a), r0 + (s - r0) * w)
                        })
                        .collect()
                })
                .collect()
        }
        Talking => polygon(o, 0.6 * s, n, rotation).into_iter().map(|q| vec![q; len]).collect(),
        Walking => polygon(o, 0.6 * s, n, rotation)
            .into_iter()
            .map(|q| (0..len).map(|f| add(q, u, v * p.seconds(f))).collect())
            .collect(),
        Chasing => (0..n)
            .map(|k| {
                order[k] = -2.0 * s * k as f64;
                let start = add(o, u, order[k]);
                (0..len).map(|f| add(start, u, 2.2 * v * p.seconds(f))).collect()
            })
            .collect(),
        Queuing => {
            let period = 1.5 * p.fps;
            let shuffle = 0.5 * p.fps;
            let phase = rng.gen_range(0.0..period);
            let steps = |t: f64| {
                let done = (t / period).floor();
                done + ((t - done * period) / shuffle).min(1.0)
            };
            let advance = |f: usize| 0.4 * s * (steps(f as f64 + phase) - steps(phase));
            (0..n)
                .map(|k| {
                    let start = add(o, u, -0.7 * s * k as f64);
                    (0..len).map(|f| add(start, u, advance(f))).collect()
                })
                .collect()
        }
    };
    paths = noisy(paths, p.noise_sigma, &mut rng);
    if label == Dismissal {
        paths = reversed(paths);
    }
    let end = len as Frame - 1;
    let pairs = member_pair_labels(label, n, &order)
        .into_iter()
        .map(|a| PairAnnotation { end, ..a })
        .collect();
    SceneRecording::new(
        format!("group-{}-{}", label.code(), p.seed),
        p.fps,
        to_trajectories(&paths, p.fps),
        pairs,
        vec![CollectiveAnnotation { start: 0, end, label }],
    )
}

/// Stationary queues and circles whose spread is matched, so that only the
/// alignment of the members tells Queuing from Talking.
pub fn gen_contrast(label: CollectiveLabel, p: &SynthParams) -> Result<SceneRecording> {
    p.validate()?;
    let n = p.group_size;
    if n < 4 {
        return Err(Error::InvalidParams(format!("contrast scenes need a group of at least 4, got {n}")));
    }
    let mut rng = seed::rng(p.seed, &[3]);
    let (o, u, _) = scene_frame(&mut rng);
    let gap = rng.gen_range(0.7..1.1) * p.spacing;
    let spread = gap * (((n * n - 1) as f64) / 12.0).sqrt();
    let len = p.duration_frames;
    let points: Vec<(f64, f64)> = match label {
        CollectiveLabel::Queuing => (0..n)
            .map(|k| add(o, u, gap * (k as f64 - (n - 1) as f64 / 2.0)))
            .collect(),
        CollectiveLabel::Talking => polygon(o, spread, n, rng.gen_range(0.0..PI)),
        other => {
            return Err(Error::InvalidParams(format!("contrast scenes are Queuing or Talking, not {other}")));
        }
    };
    let paths = noisy(points.into_iter().map(|q| vec![q; len]).collect(), p.noise_sigma, &mut rng);
    let end = len as Frame - 1;
    let pairs = member_pair_labels(CollectiveLabel::Talking, n, &[])
        .into_iter()
        .map(|a| PairAnnotation { end, ..a })
        .collect();
    SceneRecording::new(
        format!("contrast-{}-{}", label.code(), p.seed),
        p.fps,
        to_trajectories(&paths, p.fps),
        pairs,
        vec![CollectiveAnnotation { start: 0, end, label }],
    )
}

/// Plays a recording backwards: frame `f` becomes `first + last - f`, and
/// labels that are time reversals of each other are exchanged.
pub fn time_reversed(rec: &SceneRecording) -> Result<SceneRecording> {
    let Some((first, last)) = rec.frame_range() else {
        return Ok(rec.clone());
    };
    let flip = |f: Frame| first + last - f;
    let trajectories = rec
        .trajectories()
        .iter()
        .map(|t| {
            let samples = t
                .samples()
                .iter()
                .rev()
                .map(|s| TimedPosition::new(flip(s.frame), s.x, s.y))
                .collect();
            Trajectory::new(t.track_id(), t.fps(), samples)
        })
        .collect::<Result<Vec<_>>>()?;
    let pairs = rec
        .pair_annotations()
        .iter()
        .map(|a| PairAnnotation {
            start: flip(a.end),
            end: flip(a.start),
            label: match a.label {
                InteractionLabel::Splitting => InteractionLabel::Approaching,
                InteractionLabel::Approaching => InteractionLabel::Splitting,
                l => l,
            },
            ..*a
        })
        .collect();
    let collective = rec
        .collective_annotations()
        .iter()
        .map(|a| CollectiveAnnotation {
            start: flip(a.end),
            end: flip(a.start),
            label: match a.label {
                CollectiveLabel::Gathering => CollectiveLabel::Dismissal,
                CollectiveLabel::Dismissal => CollectiveLabel::Gathering,
                l => l,
            },
        })
        .collect();
    SceneRecording::new(rec.sequence_id(), rec.fps(), trajectories, pairs, collective)
}

/// What to put in a synthetic corpus.
#[derive(Clone, Debug, PartialEq)]
pub struct CorpusSpec {
    pub pair_labels: Vec<InteractionLabel>,
    pub collective_labels: Vec<CollectiveLabel>,
    pub scenes_per_label: usize,
    pub params: SynthParams,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            pair_labels: InteractionLabel::ALL.to_vec(),
            collective_labels: CollectiveLabel::ALL.to_vec(),
            scenes_per_label: 6,
            params: SynthParams::default(),
        }
    }
}

fn scene_params(p: &SynthParams, kind: u64, label: usize, i: usize) -> SynthParams {
    SynthParams {
        seed: seed::derive(p.seed, &[kind, label as u64, i as u64]),
        ..*p
    }
}

/// Scenes named `pair-<CODE>-<nnn>` and `group-<Label>-<nnn>`.
pub fn synth_corpus(spec: &CorpusSpec) -> Result<Vec<SceneRecording>> {
    let mut out = Vec::new();
    for &l in &spec.pair_labels {
        for i in 0..spec.scenes_per_label {
            let rec = gen_pair(l, &scene_params(&spec.params, 1, l.index(), i))?;
            out.push(rec.with_sequence_id(format!("pair-{}-{i:03}", l.code())));
        }
    }
    for &l in &spec.collective_labels {
        for i in 0..spec.scenes_per_label {
            let rec = gen_collective(l, &scene_params(&spec.params, 2, l.index(), i))?;
            out.push(rec.with_sequence_id(format!("group-{}-{i:03}", l.code())));
        }
    }
    Ok(out)
}

/// Queuing and Talking contrast scenes, `scenes_per_label` of each.
pub fn contrast_corpus(scenes_per_label: usize, params: &SynthParams) -> Result<Vec<SceneRecording>> {
    let mut out = Vec::new();
    for l in [CollectiveLabel::Talking, CollectiveLabel::Queuing] {
        for i in 0..scenes_per_label {
            let rec = gen_contrast(l, &scene_params(params, 3, l.index(), i))?;
            out.push(rec.with_sequence_id(format!("contrast-{}-{i:03}", l.code())));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbd::{dispersion, dispersion_change, mean_speed, shape_ratio, GroupWindow};
    use crate::trajectory::{relative_distance_series, SceneKinematics, SmoothingConfig};

    fn quiet() -> SynthParams {
        SynthParams {
            noise_sigma: 0.0,
            ..SynthParams::default()
        }
    }

    fn distances(rec: &SceneRecording) -> Vec<f64> {
        let a = rec.trajectory(TrackId(1)).unwrap();
        let b = rec.trajectory(TrackId(2)).unwrap();
        a.samples()
            .iter()
            .zip(b.samples())
            .map(|(p, q)| (p.x - q.x).hypot(p.y - q.y))
            .collect()
    }

    #[test]
    fn standing_pair_keeps_one_meter() {
        let rec = gen_pair(InteractionLabel::StandingPair, &quiet()).unwrap();
        for d in distances(&rec) {
            assert!((d - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn approach_distance_shrinks_everywhere() {
        let rec = gen_pair(InteractionLabel::Approaching, &quiet()).unwrap();
        let d = distances(&rec);
        assert!(d.windows(2).all(|w| w[1] < w[0]));
        let s = distances(&gen_pair(InteractionLabel::Splitting, &quiet()).unwrap());
        assert!((s[0] - 1.0).abs() < 1e-12);
        // relative speed in m/s
        let rate = (s[1] - s[0]) * 30.0;
        assert!(rate >= 0.8, "{rate}");
    }

    #[test]
    fn follow_roles_swap() {
        let p = SynthParams::default();
        let f = gen_pair(InteractionLabel::Following, &p).unwrap();
        let bf = gen_pair(InteractionLabel::BeingFollowed, &p).unwrap();
        assert_eq!(f.trajectory(TrackId(1)).unwrap().samples(), bf.trajectory(TrackId(2)).unwrap().samples());
        assert_eq!(f.trajectory(TrackId(2)).unwrap().samples(), bf.trajectory(TrackId(1)).unwrap().samples());
        assert_eq!(f.pair_annotations()[1].label, InteractionLabel::BeingFollowed);
        // the anchor of `F` trails by 1.5 m
        let d = distances(&gen_pair(InteractionLabel::Following, &quiet()).unwrap());
        assert!(d.iter().all(|&x| (x - 1.5).abs() < 1e-9));
    }

    #[test]
    fn walking_together_is_parallel() {
        let d = distances(&gen_pair(InteractionLabel::WalkingTogether, &quiet()).unwrap());
        assert!(d.iter().all(|&x| (x - 0.8).abs() < 1e-9));
    }

    #[test]
    fn generation_is_deterministic() {
        let p = SynthParams::default();
        for &l in InteractionLabel::ALL {
            assert_eq!(gen_pair(l, &p).unwrap(), gen_pair(l, &p).unwrap());
        }
        for &l in CollectiveLabel::ALL {
            assert_eq!(gen_collective(l, &p).unwrap(), gen_collective(l, &p).unwrap());
        }
        let other = SynthParams { seed: 43, ..p };
        assert_ne!(gen_pair(InteractionLabel::Following, &p).unwrap(), gen_pair(InteractionLabel::Following, &other).unwrap());
    }

    fn window(rec: &SceneRecording) -> (SceneKinematics, Vec<TrackId>) {
        let scene = SceneKinematics::new(rec.trajectories(), rec.fps(), &SmoothingConfig::default());
        let ids = rec.trajectories().iter().map(|t| t.track_id()).collect();
        (scene, ids)
    }

    #[test]
    fn gathering_contracts_and_dismissal_expands() {
        let g = gen_collective(CollectiveLabel::Gathering, &quiet()).unwrap();
        let (scene, ids) = window(&g);
        let w = GroupWindow::new(&scene, ids.clone(), 63, 64).unwrap();
        let dc = dispersion_change(&w).unwrap();
        assert!(dc < 0.0);

        let rev = time_reversed(&g).unwrap();
        assert_eq!(rev.collective_annotations()[0].label, CollectiveLabel::Dismissal);
        let (scene_r, _) = window(&rev);
        let wr = GroupWindow::new(&scene_r, ids, 63, 64).unwrap();
        let back = dispersion_change(&wr).unwrap();
        assert!(back > 0.0);
        // the final cluster has a 1 m radius
        let last: Vec<_> = g.trajectories().iter().map(|t| {
            let s = t.samples().last().unwrap();
            (s.x, s.y)
        }).collect();
        assert!((dispersion(&last).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn queue_is_elongated_every_frame() {
        let p = SynthParams {
            noise_sigma: 0.01,
            group_size: 5,
            ..SynthParams::default()
        };
        let q = gen_collective(CollectiveLabel::Queuing, &p).unwrap();
        for f in 0..p.duration_frames as Frame {
            let pts: Vec<_> = q.trajectories().iter().map(|t| t.position_at(f).unwrap()).collect();
            let r = shape_ratio(&pts);
            assert!(r > 50.0, "frame {f}: {r}");
        }
    }

    #[test]
    fn talking_square_is_isotropic_and_still() {
        let q = gen_collective(CollectiveLabel::Talking, &quiet()).unwrap();
        let pts: Vec<_> = q.trajectories().iter().map(|t| t.position_at(10).unwrap()).collect();
        assert!((shape_ratio(&pts) - 1.0).abs() < 0.01);
        let (scene, ids) = window(&q);
        let w = GroupWindow::new(&scene, ids, 63, 64).unwrap();
        assert!(mean_speed(&w) < 0.01);
    }

    #[test]
    fn group_size_checks() {
        let small = SynthParams { group_size: 3, ..SynthParams::default() };
        assert!(matches!(gen_collective(CollectiveLabel::Queuing, &small), Err(Error::InvalidParams(_))));
        gen_collective(CollectiveLabel::Talking, &small).unwrap();
        let one = SynthParams { group_size: 1, ..SynthParams::default() };
        assert!(gen_collective(CollectiveLabel::Walking, &one).is_err());
        assert!(SynthParams { fps: 0.0, ..SynthParams::default() }.validate().is_err());
    }

    #[test]
    fn chasing_pairs_follow_the_one_ahead() {
        let c = gen_collective(CollectiveLabel::Chasing, &quiet()).unwrap();
        // member 1 leads, so member 2 follows it
        let a = c.pair_annotations().iter().find(|a| a.anchor == TrackId(2) && a.target == TrackId(1)).unwrap();
        assert_eq!(a.label, InteractionLabel::Following);
        let speed = {
            let t = c.trajectory(TrackId(1)).unwrap().samples();
            (t[1].x - t[0].x).hypot(t[1].y - t[0].y) * 30.0
        };
        assert!((speed - 2.2 * 1.3).abs() < 1e-9);
    }

    #[test]
    fn split_reverses_to_approach() {
        let s = gen_pair(InteractionLabel::Splitting, &quiet()).unwrap();
        let r = time_reversed(&s).unwrap();
        let a = gen_pair(InteractionLabel::Approaching, &quiet()).unwrap();
        assert_eq!(r.trajectories(), a.trajectories());
        assert_eq!(r.pair_annotations()[0].label, InteractionLabel::Approaching);
        let d = relative_distance_series(r.trajectory(TrackId(1)).unwrap(), r.trajectory(TrackId(2)).unwrap(), 0..=127).unwrap();
        assert!(d.windows(2).all(|w| w[1].1 < w[0].1));
    }

    #[test]
    fn contrast_spreads_match() {
        let p = SynthParams::default();
        let q = gen_contrast(CollectiveLabel::Queuing, &SynthParams { noise_sigma: 0.0, ..p }).unwrap();
        let t = gen_contrast(CollectiveLabel::Talking, &SynthParams { noise_sigma: 0.0, ..p }).unwrap();
        let at = |r: &SceneRecording| -> Vec<(f64, f64)> { r.trajectories().iter().map(|t| t.position_at(0).unwrap()).collect() };
        assert!((dispersion(&at(&q)).unwrap() - dispersion(&at(&t)).unwrap()).abs() < 1e-9);
        assert_eq!(shape_ratio(&at(&q)), 0.0);
        assert!((shape_ratio(&at(&t)) - 1.0).abs() < 1e-9);
        assert!(gen_contrast(CollectiveLabel::Walking, &p).is_err());
    }

    #[test]
    fn corpus_names_are_unique() {
        let spec = CorpusSpec { scenes_per_label: 2, ..CorpusSpec::default() };
        let c = synth_corpus(&spec).unwrap();
        assert_eq!(c.len(), 24);
        let mut ids: Vec<_> = c.iter().map(|r| r.sequence_id().to_string()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 24);
        assert_eq!(contrast_corpus(3, &spec.params).unwrap().len(), 6);
    }
}
