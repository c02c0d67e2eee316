use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use proxrf::forest::{ForestConfig, LabeledSample, RandomForest};
use proxrf_ffi::*;

fn last_error() -> String {
    let p = proxrf_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn walker(id: u64, y: f64, speed: f64) -> *mut ProxrfTrajectory {
    let frames: Vec<i64> = (0..100).collect();
    let xs: Vec<f64> = frames.iter().map(|&f| speed * f as f64 / 30.0).collect();
    let ys = vec![y; 100];
    let mut out = ptr::null_mut();
    let s = unsafe { proxrf_trajectory_new(id, 30.0, frames.as_ptr(), xs.as_ptr(), ys.as_ptr(), 100, &mut out) };
    assert_eq!(s, ProxrfStatus::Ok);
    out
}

#[test]
fn pid_through_the_c_interface_matches_the_library() {
    let a = walker(1, 0.0, 1.2);
    let b = walker(2, 0.8, 1.2);
    assert_eq!(unsafe { proxrf_trajectory_len(a) }, 100);
    let n = proxrf_pid_descriptor_len(1);
    assert_eq!(n, 19);
    let mut out = vec![0.0; n];
    let mut written = 0;
    let s = unsafe { proxrf_compute_pid(a, b, 50, ptr::null(), 7, out.as_mut_ptr(), n, &mut written) };
    assert_eq!(s, ProxrfStatus::Ok);
    assert_eq!(written, 19);
    assert!(proxrf_last_error_message().is_null());
    assert!((out[..16].iter().sum::<f64>() - 1.0).abs() < 1e-9);

    let ta = proxrf::trajectory::Trajectory::new(
        proxrf::trajectory::TrackId(1),
        30.0,
        (0..100).map(|f| proxrf::trajectory::TimedPosition::new(f, 1.2 * f as f64 / 30.0, 0.0)).collect(),
    )
    .unwrap();
    let tb = proxrf::trajectory::Trajectory::new(
        proxrf::trajectory::TrackId(2),
        30.0,
        (0..100).map(|f| proxrf::trajectory::TimedPosition::new(f, 1.2 * f as f64 / 30.0, 0.8)).collect(),
    )
    .unwrap();
    let expect = proxrf::pid::compute_pid(&ta, &tb, 50, &Default::default(), &Default::default(), 7).unwrap();
    assert_eq!(out, expect.features());

    // deeper pyramid through explicit parameters
    let params = ProxrfPidParams { l_max: 2, ..proxrf_pid_params_default() };
    let mut out = vec![0.0; 23];
    let s = unsafe { proxrf_compute_pid(a, b, 50, &params, 7, out.as_mut_ptr(), 23, &mut written) };
    assert_eq!((s, written), (ProxrfStatus::Ok, 23));

    let mut short = vec![0.0; 5];
    let s = unsafe { proxrf_compute_pid(a, b, 50, ptr::null(), 7, short.as_mut_ptr(), 5, &mut written) };
    assert_eq!(s, ProxrfStatus::InvalidArgument);

    let s = unsafe { proxrf_compute_pid(a, b, 95, ptr::null(), 7, out.as_mut_ptr(), 23, &mut written) };
    assert_eq!(s, ProxrfStatus::MissingFrames);
    assert!(last_error().starts_with("MISSING_FRAMES"));
    unsafe {
        proxrf_trajectory_free(a);
        proxrf_trajectory_free(b);
        proxrf_trajectory_free(ptr::null_mut());
    }
}

#[test]
fn bad_trajectories_are_rejected() {
    let frames = [0i64, 2, 1];
    let v = [0.0; 3];
    let mut out = ptr::null_mut();
    let s = unsafe { proxrf_trajectory_new(1, 30.0, frames.as_ptr(), v.as_ptr(), v.as_ptr(), 3, &mut out) };
    assert_ne!(s, ProxrfStatus::Ok);
    assert!(out.is_null());
    assert!(!last_error().is_empty());
    let s = unsafe { proxrf_trajectory_new(1, 30.0, ptr::null(), v.as_ptr(), v.as_ptr(), 3, &mut out) };
    assert_eq!(s, ProxrfStatus::NullPointer);
}

#[test]
fn group_geometry() {
    let xs = [0.0, 1.0, 1.0, 0.0];
    let ys = [0.0, 0.0, 1.0, 1.0];
    let mut d = 0.0;
    assert_eq!(unsafe { proxrf_dispersion(xs.as_ptr(), ys.as_ptr(), 4, &mut d) }, ProxrfStatus::Ok);
    assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    let mut r = 0.0;
    assert_eq!(unsafe { proxrf_shape_ratio(xs.as_ptr(), ys.as_ptr(), 4, &mut r) }, ProxrfStatus::Ok);
    assert!((r - 1.0).abs() < 1e-12);
    let line = [0.0, 1.0, 2.0, 3.0];
    assert_eq!(unsafe { proxrf_shape_ratio(line.as_ptr(), line.as_ptr(), 4, &mut r) }, ProxrfStatus::Ok);
    assert_eq!(r, 0.0);
    assert_eq!(unsafe { proxrf_dispersion(xs.as_ptr(), ys.as_ptr(), 0, &mut d) }, ProxrfStatus::EmptyGroup);
}

fn small_forest() -> RandomForest {
    let samples: Vec<LabeledSample> =
        (0..40).map(|i| LabeledSample::new(vec![i as f64, (i % 3) as f64], usize::from(i >= 20))).collect();
    RandomForest::fit(&samples, vec!["low".into(), "high".into()], &ForestConfig { n_trees: 9, ..ForestConfig::default() })
        .unwrap()
}

#[test]
fn forest_handles_load_and_predict() {
    let model = small_forest();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    model.save(&path).unwrap();
    let cpath = CString::new(path.to_str().unwrap()).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { proxrf_forest_load(cpath.as_ptr(), &mut f) }, ProxrfStatus::Ok);
    unsafe {
        assert_eq!(proxrf_forest_feature_count(f), 2);
        assert_eq!(proxrf_forest_class_count(f), 2);
        assert_eq!(CStr::from_ptr(proxrf_forest_class_name(f, 1)).to_str().unwrap(), "high");
        assert!(proxrf_forest_class_name(f, 2).is_null());
    }
    for x in [3.0, 35.0] {
        let features = [x, 1.0];
        let mut class = 99;
        let mut probs = [0.0; 2];
        let s = unsafe { proxrf_forest_predict(f, features.as_ptr(), 2, &mut class, probs.as_mut_ptr(), 2) };
        assert_eq!(s, ProxrfStatus::Ok);
        let expect = model.predict(&features).unwrap();
        assert_eq!(class, expect.class);
        assert_eq!(probs.to_vec(), expect.probabilities);
    }
    let mut class = 0;
    let s = unsafe { proxrf_forest_predict(f, [1.0].as_ptr(), 1, &mut class, ptr::null_mut(), 0) };
    assert_eq!(s, ProxrfStatus::ShapeMismatch);
    unsafe { proxrf_forest_free(f) };

    let json = b"{\"version\": 1";
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { proxrf_forest_from_json(json.as_ptr(), json.len(), &mut g) }, ProxrfStatus::CorruptModel);
    assert!(g.is_null());
    let bytes = model.to_json();
    assert_eq!(unsafe { proxrf_forest_from_json(bytes.as_ptr(), bytes.len(), &mut g) }, ProxrfStatus::Ok);
    unsafe { proxrf_forest_free(g) };

    let missing = CString::new(dir.path().join("nope.json").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { proxrf_forest_load(missing.as_ptr(), &mut g) }, ProxrfStatus::IoError);
}

#[test]
fn last_error_is_per_thread() {
    let mut d = 0.0;
    assert_eq!(unsafe { proxrf_dispersion(ptr::null(), ptr::null(), 3, &mut d) }, ProxrfStatus::NullPointer);
    std::thread::spawn(|| assert!(proxrf_last_error_message().is_null())).join().unwrap();
    assert_eq!(last_error(), "xs is null");
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(proxrf_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_compiles_as_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/proxrf.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["proxrf_compute_pid", "proxrf_forest_predict", "PROXRF_STATUS_MODEL_SHAPE_MISMATCH", "typedef struct ProxrfForest ProxrfForest"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let Ok(out) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, skipping compile check");
        return;
    };
    assert!(out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"proxrf.h\"\nint main(void) {\n  ProxrfPidParams p = proxrf_pid_params_default();\n  ProxrfTrajectory *t = 0;\n  ProxrfStatus s = proxrf_trajectory_new(1, 30.0, 0, 0, 0, 0, &t);\n  proxrf_trajectory_free(t);\n  return s == PROXRF_STATUS_OK ? (int)p.l_max : 1;\n}\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}
