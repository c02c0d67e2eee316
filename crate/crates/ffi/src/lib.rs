//! C interface to the `proxrf` toolkit.
//!
//! Objects cross the boundary as opaque handles created by a `*_new` or
//! `*_load` function and released with the matching `*_free`. Every fallible
//! call returns a [`ProxrfStatus`]; on failure a description is available
//! from [`proxrf_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use proxrf::cbd;
use proxrf::forest::RandomForest;
use proxrf::pid::{compute_pid, PidConfig, PolarGrid};
use proxrf::trajectory::{SmoothingConfig, TimedPosition, TrackId, Trajectory};
use proxrf::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProxrfStatus {
    Ok = 0,
    InsufficientData = 1,
    FrameMismatch = 2,
    MissingFrames = 3,
    WindowLengthMismatch = 4,
    ModelShapeMismatch = 5,
    EmptyGroup = 6,
    EmptyTrainingSet = 7,
    ShapeMismatch = 8,
    InvalidFeature = 9,
    CorruptModel = 10,
    ParseError = 11,
    ReferentialError = 12,
    AnnotationConflict = 13,
    ConfigError = 14,
    InvalidParams = 15,
    LabelCoverageError = 16,
    IoError = 17,
    /// A required pointer argument was null.
    NullPointer = 100,
    /// An output buffer is too small or a string is not UTF-8.
    InvalidArgument = 101,
    /// The library panicked; the call had no effect on its outputs.
    Panic = 102,
}

impl From<&Error> for ProxrfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InsufficientData(_) => ProxrfStatus::InsufficientData,
            Error::FrameMismatch { .. } => ProxrfStatus::FrameMismatch,
            Error::MissingFrames(_) => ProxrfStatus::MissingFrames,
            Error::WindowLengthMismatch { .. } => ProxrfStatus::WindowLengthMismatch,
            Error::ModelShapeMismatch(_) => ProxrfStatus::ModelShapeMismatch,
            Error::EmptyGroup(_) => ProxrfStatus::EmptyGroup,
            Error::EmptyTrainingSet => ProxrfStatus::EmptyTrainingSet,
            Error::ShapeMismatch { .. } => ProxrfStatus::ShapeMismatch,
            Error::InvalidFeature { .. } => ProxrfStatus::InvalidFeature,
            Error::CorruptModel(_) => ProxrfStatus::CorruptModel,
            Error::Parse { .. } => ProxrfStatus::ParseError,
            Error::Referential(_) => ProxrfStatus::ReferentialError,
            Error::AnnotationConflict(_) => ProxrfStatus::AnnotationConflict,
            Error::Config(_) => ProxrfStatus::ConfigError,
            Error::InvalidParams(_) => ProxrfStatus::InvalidParams,
            Error::LabelCoverage(_) => ProxrfStatus::LabelCoverageError,
            Error::Io { .. } => ProxrfStatus::IoError,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(ProxrfStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(ProxrfStatus::from(&e), format!("{}: {e}", e.code()))
    }
}

fn null(what: &str) -> Failure {
    Failure(ProxrfStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(ProxrfStatus::InvalidArgument, msg.into())
}

/// Runs `f`, turning errors and panics into a status and the thread's last
/// error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ProxrfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ProxrfStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            ProxrfStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn points(xs: *const f64, ys: *const f64, n: usize) -> Result<Vec<(f64, f64)>, Failure> {
    let xs = slice(xs, n, "xs")?;
    let ys = slice(ys, n, "ys")?;
    Ok(xs.iter().copied().zip(ys.iter().copied()).collect())
}

/// Message of the last failed call on this thread, or null after a
/// successful one. The pointer stays valid until the next call on the
/// thread.
#[no_mangle]
pub extern "C" fn proxrf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn proxrf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Descriptor and smoothing parameters for [`proxrf_compute_pid`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProxrfPidParams {
    pub t1: usize,
    pub sigma_rho: f64,
    pub sigma_theta: f64,
    pub k_s: f64,
    pub l_max: u32,
    pub grid_samples_per_axis: usize,
    pub soft_assignment: bool,
    /// Smoothing factor in (0, 1].
    pub alpha: f64,
    /// Speed (m/s) below which a pedestrian has no heading.
    pub t_s: f64,
}

impl ProxrfPidParams {
    fn split(&self) -> (PidConfig, SmoothingConfig) {
        let pid = PidConfig {
            t1: self.t1,
            sigma_rho: self.sigma_rho,
            sigma_theta: self.sigma_theta,
            k_s: self.k_s,
            l_max: self.l_max,
            grid_samples_per_axis: self.grid_samples_per_axis,
            soft_assignment: self.soft_assignment,
            ..PidConfig::default()
        };
        let smoothing = SmoothingConfig { alpha: self.alpha, t_s: self.t_s };
        (pid, smoothing)
    }
}

#[no_mangle]
pub extern "C" fn proxrf_pid_params_default() -> ProxrfPidParams {
    let p = PidConfig::default();
    let s = SmoothingConfig::default();
    ProxrfPidParams {
        t1: p.t1,
        sigma_rho: p.sigma_rho,
        sigma_theta: p.sigma_theta,
        k_s: p.k_s,
        l_max: p.l_max,
        grid_samples_per_axis: p.grid_samples_per_axis,
        soft_assignment: p.soft_assignment,
        alpha: s.alpha,
        t_s: s.t_s,
    }
}

/// Number of values [`proxrf_compute_pid`] writes for a pyramid depth.
#[no_mangle]
pub extern "C" fn proxrf_pid_descriptor_len(l_max: u32) -> usize {
    if l_max >= usize::BITS - 1 {
        return 0;
    }
    PidConfig { l_max, ..PidConfig::default() }.descriptor_len(&PolarGrid::default())
}

/// A pedestrian track.
pub struct ProxrfTrajectory {
    inner: Trajectory,
}

/// Builds a trajectory from `len` samples with strictly increasing frames.
///
/// # Safety
/// `frames`, `xs` and `ys` must each point to `len` readable values, and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn proxrf_trajectory_new(
    track_id: u64,
    fps: f64,
    frames: *const i64,
    xs: *const f64,
    ys: *const f64,
    len: usize,
    out: *mut *mut ProxrfTrajectory,
) -> ProxrfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let frames = slice(frames, len, "frames")?;
        let pts = points(xs, ys, len)?;
        let samples = frames.iter().zip(pts).map(|(&f, (x, y))| TimedPosition::new(f, x, y)).collect();
        let inner = Trajectory::new(TrackId(track_id), fps, samples)?;
        *out = Box::into_raw(Box::new(ProxrfTrajectory { inner }));
        Ok(())
    })
}

/// # Safety
/// `traj` must be null or a handle from [`proxrf_trajectory_new`] that has
/// not been freed.
#[no_mangle]
pub unsafe extern "C" fn proxrf_trajectory_free(traj: *mut ProxrfTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples in a trajectory, 0 for null.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn proxrf_trajectory_len(traj: *const ProxrfTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.len())
}

/// Interaction descriptor of `anchor -> target` over the window centered at
/// `center`: the 16 polar histogram cells followed by the speed pyramid.
/// `params` may be null for the defaults. On success `*written` holds the
/// descriptor length.
///
/// # Safety
/// The handles must be live, `out` must have room for `out_len` values and
/// `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn proxrf_compute_pid(
    anchor: *const ProxrfTrajectory,
    target: *const ProxrfTrajectory,
    center: i64,
    params: *const ProxrfPidParams,
    seed: u64,
    out: *mut f64,
    out_len: usize,
    written: *mut usize,
) -> ProxrfStatus {
    guard(|| {
        let a = anchor.as_ref().ok_or_else(|| null("anchor"))?;
        let t = target.as_ref().ok_or_else(|| null("target"))?;
        if written.is_null() {
            return Err(null("written"));
        }
        let p = params.as_ref().copied().unwrap_or_else(|| proxrf_pid_params_default());
        let (pid, smoothing) = p.split();
        let features = compute_pid(&a.inner, &t.inner, center, &pid, &smoothing, seed)?.features();
        if out_len < features.len() {
            return Err(invalid(format!("output holds {out_len} values, descriptor has {}", features.len())));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        ptr::copy_nonoverlapping(features.as_ptr(), out, features.len());
        *written = features.len();
        Ok(())
    })
}

/// Root mean square distance of `n` points to their centroid.
///
/// # Safety
/// `xs` and `ys` must point to `n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn proxrf_dispersion(xs: *const f64, ys: *const f64, n: usize, out: *mut f64) -> ProxrfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = cbd::dispersion(&points(xs, ys, n)?)?;
        Ok(())
    })
}

/// Eigenvalue ratio of the position covariance; 0 for fewer than two points
/// or a degenerate (collinear) group.
///
/// # Safety
/// `xs` and `ys` must point to `n` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn proxrf_shape_ratio(xs: *const f64, ys: *const f64, n: usize, out: *mut f64) -> ProxrfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = cbd::shape_ratio(&points(xs, ys, n)?);
        Ok(())
    })
}

/// A trained random forest.
pub struct ProxrfForest {
    inner: RandomForest,
    class_names: Vec<CString>,
}

impl ProxrfForest {
    fn new(inner: RandomForest) -> Self {
        let class_names = inner
            .class_names()
            .iter()
            .map(|n| CString::new(n.as_str()).unwrap_or_default())
            .collect();
        Self { inner, class_names }
    }
}

/// Loads a model file written by the command-line tool.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn proxrf_forest_load(path: *const c_char, out: *mut *mut ProxrfForest) -> ProxrfStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let path = CStr::from_ptr(path).to_str().map_err(|_| invalid("path is not UTF-8"))?;
        let forest = RandomForest::load(Path::new(path))?;
        *out = Box::into_raw(Box::new(ProxrfForest::new(forest)));
        Ok(())
    })
}

/// Parses a model from `len` bytes of JSON.
///
/// # Safety
/// `json` must point to `len` readable bytes and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn proxrf_forest_from_json(json: *const u8, len: usize, out: *mut *mut ProxrfForest) -> ProxrfStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let forest = RandomForest::from_json(slice(json, len, "json")?)?;
        *out = Box::into_raw(Box::new(ProxrfForest::new(forest)));
        Ok(())
    })
}

/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn proxrf_forest_free(forest: *mut ProxrfForest) {
    if !forest.is_null() {
        drop(Box::from_raw(forest));
    }
}

/// Feature vector length the model expects, 0 for null.
///
/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn proxrf_forest_feature_count(forest: *const ProxrfForest) -> usize {
    forest.as_ref().map_or(0, |f| f.inner.feature_count())
}

/// Number of classes, 0 for null.
///
/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn proxrf_forest_class_count(forest: *const ProxrfForest) -> usize {
    forest.as_ref().map_or(0, |f| f.inner.class_count())
}

/// Name of class `index`, owned by the handle; null when out of range.
///
/// # Safety
/// `forest` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn proxrf_forest_class_name(forest: *const ProxrfForest, index: usize) -> *const c_char {
    forest
        .as_ref()
        .and_then(|f| f.class_names.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Classifies one feature vector. Writes the winning class index and, when
/// `probabilities` is not null, one vote fraction per class.
///
/// # Safety
/// `forest` must be live, `features` must point to `n_features` values,
/// `class_out` must be writable and `probabilities`, when not null, must
/// have room for `n_probabilities` values.
#[no_mangle]
pub unsafe extern "C" fn proxrf_forest_predict(
    forest: *const ProxrfForest,
    features: *const f64,
    n_features: usize,
    class_out: *mut usize,
    probabilities: *mut f64,
    n_probabilities: usize,
) -> ProxrfStatus {
    guard(|| {
        let f = forest.as_ref().ok_or_else(|| null("forest"))?;
        if class_out.is_null() {
            return Err(null("class_out"));
        }
        let p = f.inner.predict(slice(features, n_features, "features")?)?;
        if !probabilities.is_null() {
            if n_probabilities < p.probabilities.len() {
                return Err(invalid(format!(
                    "probability buffer holds {n_probabilities} values, model has {} classes",
                    p.probabilities.len()
                )));
            }
            ptr::copy_nonoverlapping(p.probabilities.as_ptr(), probabilities, p.probabilities.len());
        }
        *class_out = p.class;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_codes_follow_error_kinds() {
        assert_eq!(ProxrfStatus::from(&Error::EmptyTrainingSet), ProxrfStatus::EmptyTrainingSet);
        assert_eq!(ProxrfStatus::from(&Error::Config("x".into())), ProxrfStatus::ConfigError);
        assert_eq!(ProxrfStatus::ModelShapeMismatch as i32, 5);
    }

    #[test]
    fn panics_become_a_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, ProxrfStatus::Panic);
        let msg = unsafe { CStr::from_ptr(proxrf_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
        assert_eq!(guard(|| Ok(())), ProxrfStatus::Ok);
        assert!(proxrf_last_error_message().is_null());
    }

    #[test]
    fn descriptor_len_rejects_absurd_depths() {
        assert_eq!(proxrf_pid_descriptor_len(0), 17);
        assert_eq!(proxrf_pid_descriptor_len(3), 31);
        assert_eq!(proxrf_pid_descriptor_len(200), 0);
    }
}
