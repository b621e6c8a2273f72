use std::ffi::{CStr, CString};
use std::path::Path;
use std::ptr;

use ar_rul::armodel::{ArNetwork, InitMode};
use ar_rul::datapipe::{load_native_bearing, normalize, pad_and_window, write_native_bearing};
use ar_rul::evaluator::{curve_metrics, mae, rmse, rollout, score};
use ar_rul::synthgen::{generate, SynthSpec};
use ar_rul::trainer::{train, TrainConfig};
use ar_rul_ffi::*;

fn cstr(p: &Path) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    let p = ar_rul_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

struct Fixture {
    dir: tempfile::TempDir,
    model_dir: std::path::PathBuf,
    csv: std::path::PathBuf,
}

fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let spec = SynthSpec { acquisitions: 120, points: 64, ..SynthSpec::default() };
    let record = generate(&spec, "ffi-0").unwrap();
    let csv = dir.path().join("ffi-0.csv");
    write_native_bearing(&record, &csv).unwrap();

    let data = vec![pad_and_window(normalize(record), 5, 2).unwrap()];
    let cfg = TrainConfig { k: 5, n: 2, epochs: 1, bg: 0, channel_scale: 0.1, fusion_hidden: 16, ..TrainConfig::default() };
    let (model, _) = train(&data, &cfg).unwrap();
    let model_dir = dir.path().join("model");
    model.save(&model_dir).unwrap();
    Fixture { dir, model_dir, csv }
}

#[test]
fn rollout_matches_the_library() {
    let fx = fixture();
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(ar_rul_model_load(cstr(&fx.model_dir).as_ptr(), &mut model), ArRulStatus::Ok);
        let (mut k, mut s) = (0, 0);
        assert_eq!(ar_rul_model_window_size(model, &mut k), ArRulStatus::Ok);
        assert_eq!(ar_rul_model_points(model, &mut s), ArRulStatus::Ok);
        assert_eq!((k, s), (5, 64));

        let mut bearing = ptr::null_mut();
        assert_eq!(ar_rul_bearing_load_native(cstr(&fx.csv).as_ptr(), &mut bearing), ArRulStatus::Ok);
        let mut len = 0;
        assert_eq!(ar_rul_bearing_len(bearing, &mut len), ArRulStatus::Ok);
        assert_eq!(len, 120);
        assert_eq!(ar_rul_bearing_set_fpt(bearing, 60), ArRulStatus::Ok);

        let mut curve = ptr::null_mut();
        assert_eq!(ar_rul_rollout(model, bearing, 3, ArRulInit::Carryover, &mut curve), ArRulStatus::Ok);
        let mut n = 0;
        assert_eq!(ar_rul_curve_len(curve, &mut n), ArRulStatus::Ok);
        assert_eq!(n, 115);
        let mut pred = vec![0.0; n];
        assert_eq!(ar_rul_curve_copy(curve, pred.as_mut_ptr(), n), ArRulStatus::Ok);
        let mut m = ArRulMetrics::default();
        assert_eq!(ar_rul_curve_metrics(curve, &mut m), ArRulStatus::Ok);

        let mut net = ArNetwork::load(&fx.model_dir).unwrap();
        let record = normalize(load_native_bearing(&fx.csv).unwrap()).with_labels(60).unwrap();
        let expected = rollout(&mut net, &pad_and_window(record, 5, 3).unwrap(), InitMode::Carryover).unwrap();
        assert_eq!(pred, expected.predicted);
        let em = curve_metrics(&expected).unwrap();
        assert_eq!((m.rmse, m.mae, m.score, m.n), (em.rmse, em.mae, em.score, em.n));

        ar_rul_curve_free(curve);
        ar_rul_bearing_free(bearing);
        ar_rul_model_free(model);
    }
}

#[test]
fn step_matches_the_first_rollout_prediction() {
    let fx = fixture();
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(ar_rul_model_load(cstr(&fx.model_dir).as_ptr(), &mut model), ArRulStatus::Ok);
        let record = normalize(load_native_bearing(&fx.csv).unwrap());
        let data = pad_and_window(record, 5, 1).unwrap();
        let block = data.block(0);
        let ones = [1.0; 5];
        let mut y = 0.0;
        let st = ar_rul_model_step(model, block.data().as_ptr(), block.data().len(), ones.as_ptr(), 5, &mut y);
        assert_eq!(st, ArRulStatus::Ok);
        let mut net = ArNetwork::load(&fx.model_dir).unwrap();
        let expected = rollout(&mut net, &data, InitMode::Ones).unwrap();
        assert_eq!(y, expected.predicted[0]);

        let st = ar_rul_model_step(model, block.data().as_ptr(), 7, ones.as_ptr(), 5, &mut y);
        assert_eq!(st, ArRulStatus::InvalidArg);
        assert!(last_error().contains("block_len"));
        ar_rul_model_free(model);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut model = ptr::null_mut();
        assert_eq!(ar_rul_model_load(ptr::null(), &mut model), ArRulStatus::NullArg);
        assert!(last_error().contains("dir"));

        let missing = CString::new("/nonexistent/model").unwrap();
        assert_eq!(ar_rul_model_load(missing.as_ptr(), &mut model), ArRulStatus::Io);
        assert!(model.is_null());

        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "h,v\n1,2\n").unwrap();
        let mut bearing = ptr::null_mut();
        let st = ar_rul_bearing_load_native(cstr(&bad).as_ptr(), &mut bearing);
        assert!(matches!(st, ArRulStatus::Io | ArRulStatus::Format), "{st:?}");

        let mut idx = 0;
        assert_eq!(ar_rul_fpt_table_index(c"B1-3".as_ptr(), &mut idx), ArRulStatus::Ok);
        assert_eq!(idx, 960);
        assert_eq!(ar_rul_fpt_table_index(c"B9-9".as_ptr(), &mut idx), ArRulStatus::InvalidArg);

        let mut out = 0.0;
        assert_eq!(ar_rul_rmse(ptr::null(), [0.0].as_ptr(), 1, &mut out), ArRulStatus::NullArg);
        assert_eq!(ar_rul_model_window_size(ptr::null(), &mut idx), ArRulStatus::NullArg);
        ar_rul_model_free(ptr::null_mut());
        ar_rul_bearing_free(ptr::null_mut());
        ar_rul_curve_free(ptr::null_mut());
    }
}

#[test]
fn teacher_rollout_needs_labels() {
    let fx = fixture();
    let mut record = load_native_bearing(&fx.csv).unwrap();
    record.labels = None;
    record.fpt_index = None;
    let unlabelled = fx.dir.path().join("unlabelled.csv");
    write_native_bearing(&record, &unlabelled).unwrap();
    unsafe {
        let (mut model, mut bearing, mut curve) = (ptr::null_mut(), ptr::null_mut(), ptr::null_mut());
        assert_eq!(ar_rul_model_load(cstr(&fx.model_dir).as_ptr(), &mut model), ArRulStatus::Ok);
        assert_eq!(ar_rul_bearing_load_native(cstr(&unlabelled).as_ptr(), &mut bearing), ArRulStatus::Ok);
        assert_eq!(ar_rul_rollout(model, bearing, 2, ArRulInit::Teacher, &mut curve), ArRulStatus::Contract);
        assert!(last_error().contains("labels"));
        assert!(curve.is_null());

        assert_eq!(ar_rul_rollout(model, bearing, 0, ArRulInit::Ones, &mut curve), ArRulStatus::InvalidArg);
        assert_eq!(ar_rul_bearing_set_fpt(bearing, 500), ArRulStatus::Contract);
        assert_eq!(ar_rul_bearing_set_fpt(bearing, 60), ArRulStatus::Ok);
        assert_eq!(ar_rul_rollout(model, bearing, 2, ArRulInit::Teacher, &mut curve), ArRulStatus::Ok);
        ar_rul_curve_free(curve);
        ar_rul_bearing_free(bearing);
        ar_rul_model_free(model);
    }
}

#[test]
fn raw_metrics_match_the_library() {
    let pred = [0.9, 0.5, 0.2, 0.0];
    let truth = [1.0, 0.6, 0.1, 0.0];
    let (mut r, mut a, mut s) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(ar_rul_rmse(pred.as_ptr(), truth.as_ptr(), 4, &mut r), ArRulStatus::Ok);
        assert_eq!(ar_rul_mae(pred.as_ptr(), truth.as_ptr(), 4, &mut a), ArRulStatus::Ok);
        assert_eq!(ar_rul_score(pred.as_ptr(), truth.as_ptr(), 4, &mut s), ArRulStatus::Ok);
    }
    assert_eq!(r, rmse(&pred, &truth).unwrap());
    assert_eq!(a, mae(&pred, &truth).unwrap());
    assert_eq!(s, score(&pred, &truth).unwrap());
}

#[test]
fn version_is_the_crate_version() {
    let v = unsafe { CStr::from_ptr(ar_rul_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles a C program against the generated header, links the static
/// library built next to this test and runs it.
#[test]
fn c_program_links_against_the_header() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let deps = std::env::current_exe().unwrap().parent().unwrap().to_path_buf();
    let lib = deps.join("libar_rul_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = std::process::Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = std::process::Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
