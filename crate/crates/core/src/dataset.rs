//! Recordings, annotations and their on-disk formats.
//!
//! A corpus directory holds one recording per sequence as up to three plain
//! text files sharing the sequence id as stem:
//!
//! * `<id>.trj`: a `# fps=<float>` header followed by `frame,track_id,x,y`
//!   rows (ground-plane meters).
//! * `<id>.pia`: pair annotations, `start,end,anchor_id,target_id,LABEL`.
//! * `<id>.cba`: collective annotations, `start,end,LABEL`.
//!
//! Lines starting with `#` are comments everywhere. Frame ranges are
//! inclusive.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cbd::CollectiveLabel;
use crate::error::{Error, Result};
use crate::fsutil::write_atomic;
use crate::label::Label;
use crate::pid::InteractionLabel;
use crate::trajectory::{Frame, TimedPosition, TrackId, Trajectory, MAX_INTERPOLATED_GAP};

pub const TRAJECTORY_EXT: &str = "trj";
pub const PAIR_ANNOTATION_EXT: &str = "pia";
pub const COLLECTIVE_ANNOTATION_EXT: &str = "cba";
pub const HOMOGRAPHY_EXT: &str = "hom";

/// Fraction of a window's frames that must carry the window label alone.
pub const MIN_LABEL_COVERAGE: f64 = 0.75;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairAnnotation {
    pub start: Frame,
    pub end: Frame,
    pub anchor: TrackId,
    pub target: TrackId,
    pub label: InteractionLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CollectiveAnnotation {
    pub start: Frame,
    pub end: Frame,
    pub label: CollectiveLabel,
}

/// One annotated sequence. Trajectories are kept sorted by track id.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneRecording {
    sequence_id: String,
    fps: f64,
    trajectories: Vec<Trajectory>,
    pair_annotations: Vec<PairAnnotation>,
    collective_annotations: Vec<CollectiveAnnotation>,
}

impl SceneRecording {
    pub fn new(
        sequence_id: impl Into<String>,
        fps: f64,
        mut trajectories: Vec<Trajectory>,
        pair_annotations: Vec<PairAnnotation>,
        collective_annotations: Vec<CollectiveAnnotation>,
    ) -> Result<Self> {
        let sequence_id = sequence_id.into();
        if sequence_id.is_empty()
            || sequence_id.contains(['/', '\\'])
            || sequence_id.chars().any(char::is_whitespace)
        {
            return Err(Error::InvalidParams(format!(
                "sequence id `{sequence_id}` is not usable as a file stem"
            )));
        }
        if !(fps.is_finite() && fps > 0.0) {
            return Err(Error::InvalidParams(format!("fps must be positive, got {fps}")));
        }
        trajectories.sort_by_key(|t| t.track_id());
        let mut ids = BTreeSet::new();
        for t in &trajectories {
            if t.is_empty() {
                return Err(Error::InvalidParams(format!("track {} has no samples", t.track_id())));
            }
            if t.fps() != fps {
                return Err(Error::InvalidParams(format!(
                    "track {} has fps {} but the recording has {fps}",
                    t.track_id(),
                    t.fps()
                )));
            }
            if !ids.insert(t.track_id()) {
                return Err(Error::InvalidParams(format!("duplicate track {}", t.track_id())));
            }
        }
        for a in &pair_annotations {
            check_range(&sequence_id, a.start, a.end)?;
            for id in [a.anchor, a.target] {
                if !ids.contains(&id) {
                    return Err(Error::Referential(format!(
                        "{sequence_id}: pair annotation {}..={} references unknown track {id}",
                        a.start, a.end
                    )));
                }
            }
            if a.anchor == a.target {
                return Err(Error::InvalidParams(format!(
                    "{sequence_id}: pair annotation with anchor == target ({})",
                    a.anchor
                )));
            }
        }
        for a in &collective_annotations {
            check_range(&sequence_id, a.start, a.end)?;
        }
        for (i, a) in collective_annotations.iter().enumerate() {
            for b in &collective_annotations[i + 1..] {
                if a.label != b.label && a.start <= b.end && b.start <= a.end {
                    return Err(Error::AnnotationConflict(format!(
                        "{sequence_id}: {} over {}..={} overlaps {} over {}..={}",
                        a.label, a.start, a.end, b.label, b.start, b.end
                    )));
                }
            }
        }
        Ok(Self {
            sequence_id,
            fps,
            trajectories,
            pair_annotations,
            collective_annotations,
        })
    }

    pub fn sequence_id(&self) -> &str {
        &self.sequence_id
    }

    pub fn fps(&self) -> f64 {
        self.fps
    }

    pub fn trajectories(&self) -> &[Trajectory] {
        &self.trajectories
    }

    pub fn trajectory(&self, id: TrackId) -> Option<&Trajectory> {
        self.trajectories
            .binary_search_by_key(&id, |t| t.track_id())
            .ok()
            .map(|i| &self.trajectories[i])
    }

    pub fn pair_annotations(&self) -> &[PairAnnotation] {
        &self.pair_annotations
    }

    pub fn collective_annotations(&self) -> &[CollectiveAnnotation] {
        &self.collective_annotations
    }

    /// First and last frame over all tracks.
    pub fn frame_range(&self) -> Option<(Frame, Frame)> {
        let first = self.trajectories.iter().filter_map(|t| t.first_frame()).min()?;
        let last = self.trajectories.iter().filter_map(|t| t.last_frame()).max()?;
        Some((first, last))
    }

    pub fn collective_labels(&self) -> BTreeSet<CollectiveLabel> {
        self.collective_annotations.iter().map(|a| a.label).collect()
    }

    /// Same recording with every trajectory passed through `f`.
    pub fn map_trajectories(&self, f: impl Fn(&Trajectory) -> Trajectory) -> Result<Self> {
        Self::new(
            self.sequence_id.clone(),
            self.fps,
            self.trajectories.iter().map(f).collect(),
            self.pair_annotations.clone(),
            self.collective_annotations.clone(),
        )
    }

    pub fn with_sequence_id(mut self, id: impl Into<String>) -> Self {
        self.sequence_id = id.into();
        self
    }
}

fn check_range(seq: &str, start: Frame, end: Frame) -> Result<()> {
    if start > end {
        return Err(Error::InvalidParams(format!(
            "{seq}: annotation range {start}..={end} is reversed"
        )));
    }
    Ok(())
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn field<T: FromStr>(file: &str, line: usize, raw: &str, what: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::parse(file, line, format!("invalid {what} `{raw}`")))
}

fn finite(file: &str, line: usize, raw: &str, what: &str) -> Result<f64> {
    let v: f64 = field(file, line, raw, what)?;
    if !v.is_finite() {
        return Err(Error::parse(file, line, format!("{what} must be finite, got `{raw}`")));
    }
    Ok(v)
}

fn expect_fields<'a>(file: &str, line: usize, text: &'a str, n: usize, layout: &str) -> Result<Vec<&'a str>> {
    let f = split_fields(text);
    if f.len() != n {
        return Err(Error::parse(
            file,
            line,
            format!("expected {n} fields ({layout}), found {}", f.len()),
        ));
    }
    Ok(f)
}

fn parse_fps_header(file: &str, text: &str) -> Result<f64> {
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.trim().strip_prefix('#') else {
            continue;
        };
        if let Some(v) = rest.trim().strip_prefix("fps=") {
            let fps = finite(file, i + 1, v.trim(), "fps")?;
            if fps <= 0.0 {
                return Err(Error::parse(file, i + 1, format!("fps must be positive, got {fps}")));
            }
            return Ok(fps);
        }
    }
    Err(Error::parse(file, 1, "missing `# fps=<float>` header"))
}

/// Builds trajectories from `(line, frame, id, x, y)` rows in any order.
fn assemble_tracks(file: &str, fps: f64, rows: Vec<(usize, Frame, u64, f64, f64)>) -> Result<Vec<Trajectory>> {
    let mut by_track: BTreeMap<u64, Vec<(usize, TimedPosition)>> = BTreeMap::new();
    for (line, frame, id, x, y) in rows {
        by_track.entry(id).or_default().push((line, TimedPosition::new(frame, x, y)));
    }
    by_track
        .into_iter()
        .map(|(id, mut samples)| {
            samples.sort_by_key(|(_, s)| s.frame);
            for w in samples.windows(2) {
                if w[0].1.frame == w[1].1.frame {
                    return Err(Error::parse(
                        file,
                        w[1].0,
                        format!("track {id} has a second sample at frame {}", w[1].1.frame),
                    ));
                }
            }
            Trajectory::new(TrackId(id), fps, samples.into_iter().map(|(_, s)| s).collect())
        })
        .collect()
}

pub fn parse_trajectories(file: &str, text: &str) -> Result<(f64, Vec<Trajectory>)> {
    let fps = parse_fps_header(file, text)?;
    let mut rows = Vec::new();
    for (line, l) in content_lines(text) {
        let f = expect_fields(file, line, l, 4, "frame,track_id,x,y")?;
        rows.push((
            line,
            field(file, line, f[0], "frame")?,
            field(file, line, f[1], "track id")?,
            finite(file, line, f[2], "x")?,
            finite(file, line, f[3], "y")?,
        ));
    }
    Ok((fps, assemble_tracks(file, fps, rows)?))
}

fn parse_range(file: &str, line: usize, s: &str, e: &str) -> Result<(Frame, Frame)> {
    let start: Frame = field(file, line, s, "start frame")?;
    let end: Frame = field(file, line, e, "end frame")?;
    if start > end {
        return Err(Error::parse(file, line, format!("start {start} is after end {end}")));
    }
    Ok((start, end))
}

fn parse_label<L: Label>(file: &str, line: usize, raw: &str) -> Result<L> {
    L::from_code(raw).map_err(|e| Error::parse(file, line, e.to_string()))
}

pub fn parse_pair_annotations(file: &str, text: &str) -> Result<Vec<PairAnnotation>> {
    content_lines(text)
        .map(|(line, l)| {
            let f = expect_fields(file, line, l, 5, "start,end,anchor_id,target_id,LABEL")?;
            let (start, end) = parse_range(file, line, f[0], f[1])?;
            Ok(PairAnnotation {
                start,
                end,
                anchor: TrackId(field(file, line, f[2], "anchor id")?),
                target: TrackId(field(file, line, f[3], "target id")?),
                label: parse_label(file, line, f[4])?,
            })
        })
        .collect()
}

pub fn parse_collective_annotations(file: &str, text: &str) -> Result<Vec<CollectiveAnnotation>> {
    content_lines(text)
        .map(|(line, l)| {
            let f = expect_fields(file, line, l, 3, "start,end,LABEL")?;
            let (start, end) = parse_range(file, line, f[0], f[1])?;
            Ok(CollectiveAnnotation {
                start,
                end,
                label: parse_label(file, line, f[2])?,
            })
        })
        .collect()
}

/// Parses the three canonical streams of one sequence. The annotation
/// streams may be empty.
pub fn parse_canonical(sequence_id: &str, trajectories: &str, pairs: &str, collective: &str) -> Result<SceneRecording> {
    let (fps, trajs) = parse_trajectories(&format!("{sequence_id}.{TRAJECTORY_EXT}"), trajectories)?;
    let pa = parse_pair_annotations(&format!("{sequence_id}.{PAIR_ANNOTATION_EXT}"), pairs)?;
    let ca = parse_collective_annotations(&format!("{sequence_id}.{COLLECTIVE_ANNOTATION_EXT}"), collective)?;
    SceneRecording::new(sequence_id, fps, trajs, pa, ca)
}

/// Canonical text of the three streams, rows ordered by frame then track.
pub fn write_canonical(rec: &SceneRecording) -> (String, String, String) {
    let mut trj = format!("# fps={}\n", rec.fps);
    let mut rows: Vec<(Frame, TrackId, f64, f64)> = rec
        .trajectories
        .iter()
        .flat_map(|t| t.samples().iter().map(move |s| (s.frame, t.track_id(), s.x, s.y)))
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    for (f, id, x, y) in rows {
        let _ = writeln!(trj, "{f},{id},{x},{y}");
    }
    let mut pia = String::new();
    for a in &rec.pair_annotations {
        let _ = writeln!(pia, "{},{},{},{},{}", a.start, a.end, a.anchor, a.target, a.label.code());
    }
    let mut cba = String::new();
    for a in &rec.collective_annotations {
        let _ = writeln!(cba, "{},{},{}", a.start, a.end, a.label.code());
    }
    (trj, pia, cba)
}

fn read_optional(path: &Path) -> Result<String> {
    match std::fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(String::new()),
        Err(e) => Err(Error::io(path.display().to_string(), e)),
    }
}

fn read_required(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_recording(dir: &Path, sequence_id: &str) -> Result<SceneRecording> {
    let p = |ext: &str| dir.join(format!("{sequence_id}.{ext}"));
    let trj = read_required(&p(TRAJECTORY_EXT))?;
    let pia = read_optional(&p(PAIR_ANNOTATION_EXT))?;
    let cba = read_optional(&p(COLLECTIVE_ANNOTATION_EXT))?;
    parse_canonical(sequence_id, &trj, &pia, &cba)
}

/// Reads every `*.trj` sequence of a corpus directory, sorted by id.
pub fn read_corpus(dir: &Path) -> Result<Vec<SceneRecording>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    let mut ids = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir.display().to_string(), e))?.path();
        if path.extension().and_then(|e| e.to_str()) == Some(TRAJECTORY_EXT) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.push(stem.to_string());
            }
        }
    }
    ids.sort();
    ids.par_iter().map(|id| read_recording(dir, id)).collect()
}

pub fn write_recording(dir: &Path, rec: &SceneRecording) -> Result<()> {
    let (trj, pia, cba) = write_canonical(rec);
    let p = |ext: &str| dir.join(format!("{}.{ext}", rec.sequence_id));
    write_atomic(&p(TRAJECTORY_EXT), trj.as_bytes())?;
    write_atomic(&p(PAIR_ANNOTATION_EXT), pia.as_bytes())?;
    write_atomic(&p(COLLECTIVE_ANNOTATION_EXT), cba.as_bytes())
}

pub fn write_corpus(dir: &Path, recordings: &[SceneRecording]) -> Result<()> {
    recordings.par_iter().try_for_each(|r| write_recording(dir, r))
}

/// Assignment of sequences to cross-validation folds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    assignments: BTreeMap<String, usize>,
}

impl FoldSplit {
    pub fn new(assignments: BTreeMap<String, usize>) -> Result<Self> {
        let s = Self { assignments };
        if s.fold_count() < 2 {
            return Err(Error::Config("a fold split needs at least 2 folds".into()));
        }
        for k in 0..s.fold_count() {
            if !s.assignments.values().any(|&f| f == k) {
                return Err(Error::Config(format!("fold {k} has no sequences")));
            }
        }
        Ok(s)
    }

    /// Lines of `sequence_id,fold` (comma or whitespace separated).
    pub fn parse(file: &str, text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (line, l) in content_lines(text) {
            let f = expect_fields(file, line, l, 2, "sequence_id,fold")?;
            let fold: usize = field(file, line, f[1], "fold index")?;
            if map.insert(f[0].to_string(), fold).is_some() {
                return Err(Error::parse(file, line, format!("sequence `{}` assigned twice", f[0])));
            }
        }
        Self::new(map)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&path.display().to_string(), &read_required(path)?)
    }

    /// Deterministic assignment by sorted sequence id: the i-th id goes to
    /// fold `i % k`.
    pub fn round_robin<'a>(sequence_ids: impl IntoIterator<Item = &'a str>, k: usize) -> Result<Self> {
        let mut ids: Vec<&str> = sequence_ids.into_iter().collect();
        ids.sort_unstable();
        ids.dedup();
        if k < 2 || ids.len() < k {
            return Err(Error::Config(format!(
                "cannot split {} sequences into {k} folds",
                ids.len()
            )));
        }
        warn!("no fold split file supplied; assigning {} sequences round-robin to {k} folds", ids.len());
        Self::new(ids.iter().enumerate().map(|(i, id)| (id.to_string(), i % k)).collect())
    }

    pub fn fold_count(&self) -> usize {
        self.assignments.values().max().map_or(0, |m| m + 1)
    }

    pub fn fold_of(&self, sequence_id: &str) -> Option<usize> {
        self.assignments.get(sequence_id).copied()
    }

    /// Errors unless every recording is assigned.
    pub fn check_covers(&self, recordings: &[SceneRecording]) -> Result<()> {
        for r in recordings {
            if self.fold_of(r.sequence_id()).is_none() {
                return Err(Error::Config(format!(
                    "sequence `{}` has no fold assignment",
                    r.sequence_id()
                )));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        self.assignments.iter().fold(String::new(), |mut s, (id, f)| {
            let _ = writeln!(s, "{id},{f}");
            s
        })
    }
}

/// Row-major 3x3 image-to-ground homography.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Homography(pub [[f64; 3]; 3]);

impl Homography {
    pub const IDENTITY: Homography = Homography([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn parse(file: &str, text: &str) -> Result<Self> {
        let mut vals = Vec::with_capacity(9);
        for (line, l) in content_lines(text) {
            for tok in l.split_whitespace() {
                vals.push(finite(file, line, tok, "homography entry")?);
            }
        }
        if vals.len() != 9 {
            return Err(Error::parse(file, 1, format!("expected 9 homography entries, found {}", vals.len())));
        }
        Ok(Homography([
            [vals[0], vals[1], vals[2]],
            [vals[3], vals[4], vals[5]],
            [vals[6], vals[7], vals[8]],
        ]))
    }

    pub fn apply(&self, u: f64, v: f64) -> Option<(f64, f64)> {
        let h = &self.0;
        let x = h[0][0] * u + h[0][1] * v + h[0][2];
        let y = h[1][0] * u + h[1][1] * v + h[1][2];
        let w = h[2][0] * u + h[2][1] * v + h[2][2];
        if w.abs() < 1e-12 {
            return None;
        }
        let (gx, gy) = (x / w, y / w);
        (gx.is_finite() && gy.is_finite()).then_some((gx, gy))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExternalLayout {
    NcadLike,
    BehaveLike,
}

impl FromStr for ExternalLayout {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ncad" | "ncad-like" => Ok(ExternalLayout::NcadLike),
            "behave" | "behave-like" => Ok(ExternalLayout::BehaveLike),
            _ => Err(Error::Config(format!("unknown layout `{s}` (expected ncad-like or behave-like)"))),
        }
    }
}

/// Which image point of an annotation row is mapped to the ground plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FootPoint {
    /// Rows are `frame track x y w h`; the point is `(x + w/2, y + h)`.
    BottomCenter,
    /// Rows are `frame track u v`, the annotated point itself.
    Point,
}

impl FromStr for FootPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bottom-center" => Ok(FootPoint::BottomCenter),
            "point" => Ok(FootPoint::Point),
            _ => Err(Error::Config(format!("unknown foot point `{s}` (expected bottom-center or point)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptOptions {
    pub foot_point: FootPoint,
    /// Used when a sequence has no `fps.txt`.
    pub fps: f64,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self {
            foot_point: FootPoint::BottomCenter,
            fps: 30.0,
        }
    }
}

const FIGHTING_CODES: [&str; 3] = ["Fighting", "Fight", "fighting"];

/// Reads an external corpus: one subdirectory per sequence containing
/// `tracks.txt`, `homography.hom`, optionally `fps.txt` and
/// `interactions.txt`, plus `collective.txt` (ncad-like) or
/// `activities.txt` (behave-like, which may also mark `Fighting` ranges).
/// Frames inside fighting ranges are removed from every annotation.
pub fn adapt_external(root: &Path, layout: ExternalLayout, opts: &AdaptOptions) -> Result<Vec<SceneRecording>> {
    let entries = std::fs::read_dir(root).map_err(|e| Error::io(root.display().to_string(), e))?;
    let mut dirs: Vec<PathBuf> = Vec::new();
    for e in entries {
        let path = e.map_err(|e| Error::io(root.display().to_string(), e))?.path();
        if path.is_dir() {
            dirs.push(path);
        }
    }
    dirs.sort();
    dirs.par_iter().map(|d| adapt_sequence(d, layout, opts)).collect()
}

fn adapt_sequence(dir: &Path, layout: ExternalLayout, opts: &AdaptOptions) -> Result<SceneRecording> {
    let seq = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Config(format!("{}: unusable directory name", dir.display())))?
        .to_string();
    let hom_path = dir.join(format!("homography.{HOMOGRAPHY_EXT}"));
    if !hom_path.exists() {
        return Err(Error::Config(format!("{seq}: missing homography sidecar {}", hom_path.display())));
    }
    let h = Homography::parse(&hom_path.display().to_string(), &read_required(&hom_path)?)?;
    let fps_path = dir.join("fps.txt");
    let fps = if fps_path.exists() {
        let f = fps_path.display().to_string();
        let text = read_required(&fps_path)?;
        let (line, raw) = content_lines(&text)
            .next()
            .ok_or_else(|| Error::parse(&f, 1, "empty fps file"))?;
        finite(&f, line, raw, "fps")?
    } else {
        opts.fps
    };

    let tracks_path = dir.join("tracks.txt");
    let tf = tracks_path.display().to_string();
    let text = read_required(&tracks_path)?;
    let mut rows = Vec::new();
    for (line, l) in content_lines(&text) {
        let f = split_fields(l);
        let need = match opts.foot_point {
            FootPoint::BottomCenter => 6,
            FootPoint::Point => 4,
        };
        if f.len() < need {
            return Err(Error::parse(&tf, line, format!("expected at least {need} fields, found {}", f.len())));
        }
        let frame: Frame = field(&tf, line, f[0], "frame")?;
        let id: u64 = field(&tf, line, f[1], "track id")?;
        let (u, v) = match opts.foot_point {
            FootPoint::BottomCenter => {
                let x = finite(&tf, line, f[2], "x")?;
                let y = finite(&tf, line, f[3], "y")?;
                let w = finite(&tf, line, f[4], "width")?;
                let hgt = finite(&tf, line, f[5], "height")?;
                (x + 0.5 * w, y + hgt)
            }
            FootPoint::Point => (finite(&tf, line, f[2], "u")?, finite(&tf, line, f[3], "v")?),
        };
        let (gx, gy) = h
            .apply(u, v)
            .ok_or_else(|| Error::parse(&tf, line, format!("point ({u}, {v}) maps to infinity")))?;
        rows.push((line, frame, id, gx, gy));
    }
    let trajectories = assemble_tracks(&tf, fps, rows)?;

    let ip = dir.join("interactions.txt");
    let mut pairs = Vec::new();
    for (line, l) in content_lines(&read_optional(&ip)?) {
        let f = ip.display().to_string();
        let v = expect_fields(&f, line, l, 5, "start end anchor target LABEL")?;
        let (start, end) = parse_range(&f, line, v[0], v[1])?;
        pairs.push(PairAnnotation {
            start,
            end,
            anchor: TrackId(field(&f, line, v[2], "anchor id")?),
            target: TrackId(field(&f, line, v[3], "target id")?),
            label: parse_label(&f, line, v[4])?,
        });
    }

    let (cname, allow_fighting) = match layout {
        ExternalLayout::NcadLike => ("collective.txt", false),
        ExternalLayout::BehaveLike => ("activities.txt", true),
    };
    let cp = dir.join(cname);
    let cf = cp.display().to_string();
    let mut collective = Vec::new();
    let mut fighting: Vec<(Frame, Frame)> = Vec::new();
    for (line, l) in content_lines(&read_optional(&cp)?) {
        let v = expect_fields(&cf, line, l, 3, "start end LABEL")?;
        let (start, end) = parse_range(&cf, line, v[0], v[1])?;
        if allow_fighting && FIGHTING_CODES.contains(&v[2]) {
            fighting.push((start, end));
            continue;
        }
        collective.push(CollectiveAnnotation {
            start,
            end,
            label: parse_label(&cf, line, v[2])?,
        });
    }
    if !fighting.is_empty() {
        let had = collective.len();
        collective = collective
            .into_iter()
            .flat_map(|a| clip(a.start, a.end, &fighting).into_iter().map(move |(s, e)| CollectiveAnnotation { start: s, end: e, ..a }))
            .collect();
        pairs = pairs
            .into_iter()
            .flat_map(|a| clip(a.start, a.end, &fighting).into_iter().map(move |(s, e)| PairAnnotation { start: s, end: e, ..a }))
            .collect();
        if collective.is_empty() {
            warn!("{seq}: only fighting frames are annotated ({had} other annotations); no collective labels kept");
        }
    }
    SceneRecording::new(seq, fps, trajectories, pairs, collective)
}

/// Parts of `start..=end` outside every excluded range.
fn clip(start: Frame, end: Frame, excluded: &[(Frame, Frame)]) -> Vec<(Frame, Frame)> {
    let mut parts = vec![(start, end)];
    for &(xs, xe) in excluded {
        parts = parts
            .into_iter()
            .flat_map(|(s, e)| {
                if xe < s || xs > e {
                    vec![(s, e)]
                } else {
                    let mut out = Vec::new();
                    if s < xs {
                        out.push((s, xs - 1));
                    }
                    if xe < e {
                        out.push((xe + 1, e));
                    }
                    out
                }
            })
            .collect();
    }
    parts
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowMode {
    Pairs,
    Group,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowLabel {
    Interaction(InteractionLabel),
    Collective(CollectiveLabel),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledWindow {
    pub center: Frame,
    /// `[anchor, target]` in pairs mode, the present members in group mode.
    pub participants: Vec<TrackId>,
    pub label: WindowLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairWindow {
    pub center: Frame,
    pub anchor: TrackId,
    pub target: TrackId,
    pub label: Option<InteractionLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupWindowSpec {
    pub center: Frame,
    pub members: Vec<TrackId>,
    pub label: Option<CollectiveLabel>,
}

fn check_window_params(window_len: usize, step: usize) -> Result<()> {
    if window_len < 2 || !window_len.is_power_of_two() {
        return Err(Error::Config(format!("window length must be a power of two >= 2, got {window_len}")));
    }
    if step == 0 {
        return Err(Error::Config("window step must be >= 1".into()));
    }
    Ok(())
}

/// Centers whose window `center - len/2 + 1 ..= center + len/2` lies inside
/// the recording, starting at the earliest.
pub fn window_centers(rec: &SceneRecording, window_len: usize, step: usize) -> Result<Vec<Frame>> {
    check_window_params(window_len, step)?;
    let Some((first, last)) = rec.frame_range() else {
        return Ok(Vec::new());
    };
    let half = (window_len / 2) as Frame;
    let (lo, hi) = (first + half - 1, last - half);
    if hi < lo {
        return Ok(Vec::new());
    }
    Ok((lo..=hi).step_by(step).collect())
}

fn window_frames(center: Frame, window_len: usize) -> (Frame, Frame) {
    let half = (window_len / 2) as Frame;
    (center - half + 1, center + half)
}

/// The label that alone covers the center and at least
/// [`MIN_LABEL_COVERAGE`] of the window, if any.
fn window_label<L: Copy + Eq>(ranges: &[(Frame, Frame, L)], center: Frame, window_len: usize) -> Option<L> {
    let at = |f: Frame| {
        let mut found: Option<L> = None;
        for &(s, e, l) in ranges {
            if s <= f && f <= e {
                match found {
                    Some(prev) if prev != l => return Err(()),
                    _ => found = Some(l),
                }
            }
        }
        Ok(found)
    };
    let label = at(center).ok()??;
    let (start, end) = window_frames(center, window_len);
    let pure = (start..=end).filter(|&f| at(f) == Ok(Some(label))).count();
    (pure as f64 >= MIN_LABEL_COVERAGE * window_len as f64).then_some(label)
}

fn filled_tracks(rec: &SceneRecording) -> HashMap<TrackId, Trajectory> {
    rec.trajectories
        .iter()
        .map(|t| (t.track_id(), t.fill_gaps(MAX_INTERPOLATED_GAP)))
        .collect()
}

/// Labeled ordered pairs: every annotated pair whose two tracks cover the
/// window and whose label passes the coverage rule.
pub fn pair_windows(rec: &SceneRecording, window_len: usize, step: usize) -> Result<Vec<PairWindow>> {
    let centers = window_centers(rec, window_len, step)?;
    let filled = filled_tracks(rec);
    let mut by_pair: BTreeMap<(TrackId, TrackId), Vec<(Frame, Frame, InteractionLabel)>> = BTreeMap::new();
    for a in &rec.pair_annotations {
        by_pair.entry((a.anchor, a.target)).or_default().push((a.start, a.end, a.label));
    }
    let mut out = Vec::new();
    for &center in &centers {
        let (s, e) = window_frames(center, window_len);
        for (&(anchor, target), ranges) in &by_pair {
            if !(filled[&anchor].covers(s..=e) && filled[&target].covers(s..=e)) {
                continue;
            }
            if let Some(label) = window_label(ranges, center, window_len) {
                out.push(PairWindow {
                    center,
                    anchor,
                    target,
                    label: Some(label),
                });
            }
        }
    }
    Ok(out)
}

/// Every ordered pair of tracks covering the window, without labels.
pub fn unlabeled_pair_windows(rec: &SceneRecording, window_len: usize, step: usize) -> Result<Vec<PairWindow>> {
    let centers = window_centers(rec, window_len, step)?;
    let filled = filled_tracks(rec);
    let ids: Vec<TrackId> = rec.trajectories.iter().map(|t| t.track_id()).collect();
    let mut out = Vec::new();
    for &center in &centers {
        let (s, e) = window_frames(center, window_len);
        let present: Vec<TrackId> = ids.iter().copied().filter(|id| filled[id].covers(s..=e)).collect();
        for &a in &present {
            for &t in &present {
                if a != t {
                    out.push(PairWindow {
                        center,
                        anchor: a,
                        target: t,
                        label: None,
                    });
                }
            }
        }
    }
    Ok(out)
}

fn group_members(filled: &HashMap<TrackId, Trajectory>, ids: &[TrackId], s: Frame, e: Frame) -> Option<Vec<TrackId>> {
    let members: Vec<TrackId> = ids
        .iter()
        .copied()
        .filter(|id| filled[id].samples().iter().any(|p| p.frame >= s && p.frame <= e))
        .collect();
    let every_frame = (s..=e).all(|f| members.iter().any(|id| filled[id].position_at(f).is_some()));
    (every_frame && !members.is_empty()).then_some(members)
}

fn group_windows_impl(rec: &SceneRecording, window_len: usize, step: usize, labeled: bool) -> Result<Vec<GroupWindowSpec>> {
    let centers = window_centers(rec, window_len, step)?;
    let filled = filled_tracks(rec);
    let ids: Vec<TrackId> = rec.trajectories.iter().map(|t| t.track_id()).collect();
    let ranges: Vec<(Frame, Frame, CollectiveLabel)> =
        rec.collective_annotations.iter().map(|a| (a.start, a.end, a.label)).collect();
    let mut out = Vec::new();
    for &center in &centers {
        let label = if labeled {
            match window_label(&ranges, center, window_len) {
                Some(l) => Some(l),
                None => continue,
            }
        } else {
            None
        };
        let (s, e) = window_frames(center, window_len);
        if let Some(members) = group_members(&filled, &ids, s, e) {
            out.push(GroupWindowSpec { center, members, label });
        }
    }
    Ok(out)
}

/// Labeled group windows: all members present in the window, with the
/// collective label passing the coverage rule.
pub fn group_windows(rec: &SceneRecording, window_len: usize, step: usize) -> Result<Vec<GroupWindowSpec>> {
    group_windows_impl(rec, window_len, step, true)
}

pub fn unlabeled_group_windows(rec: &SceneRecording, window_len: usize, step: usize) -> Result<Vec<GroupWindowSpec>> {
    group_windows_impl(rec, window_len, step, false)
}

pub fn windows(rec: &SceneRecording, window_len: usize, step: usize, mode: WindowMode) -> Result<Vec<LabeledWindow>> {
    Ok(match mode {
        WindowMode::Pairs => pair_windows(rec, window_len, step)?
            .into_iter()
            .filter_map(|w| {
                w.label.map(|l| LabeledWindow {
                    center: w.center,
                    participants: vec![w.anchor, w.target],
                    label: WindowLabel::Interaction(l),
                })
            })
            .collect(),
        WindowMode::Group => group_windows(rec, window_len, step)?
            .into_iter()
            .filter_map(|w| {
                w.label.map(|l| LabeledWindow {
                    center: w.center,
                    participants: w.members,
                    label: WindowLabel::Collective(l),
                })
            })
            .collect(),
    })
}
