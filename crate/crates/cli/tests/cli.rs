use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use progx::ingest::{render_segment_kernel, save_scene, synthetic_intrinsics, write_pgm, Scene};
use progx::quality::{quality_f, ActiveSet};
use progx::{DataPoint, LossFunction, ModelInstance, ModelType, PointSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde_json::Value;
use tempfile::TempDir;

fn progx(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_progx")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema: &str, doc: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(schema);
    let validator = jsonschema::validator_for(&read_json(&path)).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{schema}: {errors:?}");
}

fn synth(dir: &Path, args: &[&str]) {
    let mut full = vec!["synth"];
    full.extend_from_slice(args);
    let o = progx(dir, &full);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn fit_finds_five_lines() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), &["--model", "line2d", "--instances", "5", "--points", "100", "--outliers", "200", "--seed", "1", "--out", "s"]);
    let o = progx(tmp.path(), &["fit", "s/scene.csv", "--model", "line2d", "--epsilon", "2.0", "--sampler", "cc", "--out", "f"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("instances: 5"), "{}", stdout(&o));
    let instances = read_json(&tmp.path().join("f/instances.json"));
    assert_valid("instances.schema.json", &instances);
    assert_valid("manifest.schema.json", &read_json(&tmp.path().join("f/manifest.json")));
    let csv = fs::read_to_string(tmp.path().join("f/assignment.csv")).unwrap();
    assert_eq!(csv.lines().count(), 701);
    assert_eq!(csv.lines().next(), Some("point,instance,residual"));
}

#[test]
fn missing_scene_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let o = progx(tmp.path(), &["fit", "absent.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no such file"), "{}", stderr(&o));
}

#[test]
fn pure_noise_finds_nothing() {
    let tmp = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pts = (0..200).map(|_| DataPoint::xy(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0))).collect();
    save_scene(&Scene::new(ModelType::Line2D, PointSet::new(pts)), tmp.path().join("noise.csv")).unwrap();
    let o = progx(tmp.path(), &["fit", "noise.csv", "--epsilon", "2.0", "--json"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("fit-summary.schema.json", &summary);
    assert_eq!(summary["instances"], 0);
}

#[test]
fn bad_flag_value_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let o = progx(tmp.path(), &["fit", "x.csv", "--sampler", "nonsense"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn every_engine_flag_is_accepted() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), &["--model", "line2d", "--instances", "2", "--outliers", "20", "--out", "s"]);
    let o = progx(
        tmp.path(),
        &[
            "fit", "s/scene.csv", "--epsilon", "3", "--loss", "tukey", "--q-min", "15", "--epsilon-t", "0.3",
            "--tau-semantics", "similarity", "--confidence", "0.95", "--batch-size", "5", "--sampler", "pnapsac",
            "--r-min", "10", "--r-max", "100", "--n-steps", "4", "--seed", "9", "--k-counts", "iterations", "--out", "f",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = read_json(&tmp.path().join("f/manifest.json"));
    assert_eq!(manifest["engine"]["q_min"], 15.0);
    assert_eq!(manifest["engine"]["neighborhood"]["n_steps"], 4);
    assert_eq!(manifest["seed"], 9);
}

#[test]
fn ground_truth_scores_perfectly() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), &["--model", "line2d", "--instances", "4", "--outliers", "0", "--sigma", "0", "--out", "s"]);
    let o = progx(tmp.path(), &["eval", "s/scene.csv", "s/truth.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("misclassification error: 0.00%"), "{}", stdout(&o));
}

#[test]
fn hand_built_confusion() {
    let tmp = TempDir::new().unwrap();
    // Lines y = 0 and y = 100; four points of label 1, three of label 2, three outliers.
    let ys = [0.0, 0.0, 0.0, 100.0, 100.0, 100.0, 50.0, 50.0, 0.0, 50.0];
    let labels = vec![1, 1, 1, 1, 2, 2, 2, 0, 0, 0];
    let pts = ys.iter().enumerate().map(|(i, &y)| DataPoint::xy(10.0 * i as f64, y)).collect();
    let mut scene = Scene::new(ModelType::Line2D, PointSet::new(pts));
    scene.labels = Some(labels);
    save_scene(&scene, tmp.path().join("fixture.csv")).unwrap();
    let instances = r#"{
        "schema_version": 1, "model_type": "line2d",
        "loss": {"kind": "hard01", "epsilon": 1.0, "dof": 2},
        "instances": [
            {"id": 0, "params": [0.0, 1.0, 0.0], "inliers": []},
            {"id": 1, "params": [0.0, 1.0, -100.0], "inliers": []}
        ]
    }"#;
    fs::write(tmp.path().join("fixture.json"), instances).unwrap();
    let o = progx(tmp.path(), &["eval", "fixture.csv", "fixture.json"]);
    assert!(stdout(&o).contains("misclassification error: 30.00%"), "{}{}", stdout(&o), stderr(&o));

    let o = progx(tmp.path(), &["eval", "fixture.csv", "fixture.json", "--json"]);
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("eval.schema.json", &report);
    assert!((report["misclassification_error"].as_f64().unwrap() - 0.3).abs() < 1e-12);
    assert_eq!(report["instances"][0]["label"], 1);
    assert_eq!(report["instances"][1]["assigned"], 3);
}

#[test]
fn eval_needs_labels() {
    let tmp = TempDir::new().unwrap();
    save_scene(&Scene::new(ModelType::Line2D, PointSet::new(vec![DataPoint::xy(0.0, 0.0)])), tmp.path().join("u.csv")).unwrap();
    synth(tmp.path(), &["--model", "line2d", "--instances", "1", "--out", "s"]);
    let o = progx(tmp.path(), &["eval", "u.csv", "s/truth.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no ground-truth labels"));
}

#[test]
fn synth_is_reproducible() {
    let tmp = TempDir::new().unwrap();
    for out in ["a", "b"] {
        synth(tmp.path(), &["--model", "homography", "--instances", "3", "--seed", "7", "--out", out]);
    }
    for file in ["scene.csv", "truth.json"] {
        assert_eq!(fs::read(tmp.path().join("a").join(file)).unwrap(), fs::read(tmp.path().join("b").join(file)).unwrap());
    }
    let truth = read_json(&tmp.path().join("a/truth.json"));
    assert_valid("instances.schema.json", &truth);
    assert!(truth["motion"]["rotation"].is_array());
}

#[test]
fn fundamental_truth_has_full_quality() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), &["--model", "fundamental", "--instances", "2", "--outliers", "50", "--seed", "3", "--format", "json", "--out", "s"]);
    let scene = progx::ingest::load_scene(tmp.path().join("s/scene.json")).unwrap();
    let truth = read_json(&tmp.path().join("s/truth.json"));
    let loss = LossFunction::hard(truth["loss"]["epsilon"].as_f64().unwrap()).unwrap();
    let active = ActiveSet::new(scene.points.len(), loss);
    for inst in truth["instances"].as_array().unwrap() {
        let params: Vec<f64> = inst["params"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let h = ModelInstance::from_params(ModelType::FundamentalMatrix, &params).unwrap();
        let inliers = inst["inliers"].as_array().unwrap().len() as f64;
        assert!(quality_f(&h, &scene.points, &active, &loss) >= inliers - 1.0);
    }
}

#[test]
fn rerun_reproduces_outputs() {
    let tmp = TempDir::new().unwrap();
    synth(tmp.path(), &["--model", "line2d", "--instances", "3", "--outliers", "50", "--seed", "2", "--out", "s"]);
    let o = progx(tmp.path(), &["fit", "s/scene.csv", "--seed", "4", "--out", "run1", "--svg", "run1/plot.svg"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = progx(tmp.path(), &["rerun", "run1/manifest.json", "--out", "run2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for file in ["instances.json", "assignment.csv", "plot.svg"] {
        assert_eq!(
            fs::read(tmp.path().join("run1").join(file)).unwrap(),
            fs::read(tmp.path().join("run2").join(file)).unwrap(),
            "{file}"
        );
    }
    let svg = fs::read_to_string(tmp.path().join("run1/plot.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("fill=\"black\""));

    let mut scene = fs::read_to_string(tmp.path().join("s/scene.csv")).unwrap();
    scene.push('\n');
    fs::write(tmp.path().join("s/scene.csv"), scene).unwrap();
    let o = progx(tmp.path(), &["rerun", "run1/manifest.json", "--out", "run3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("changed"));
}

#[test]
fn blur_kernel_image_input() {
    let tmp = TempDir::new().unwrap();
    let kernel = render_segment_kernel(64, 2, 0.1, 3);
    fs::write(tmp.path().join("kernel.pgm"), write_pgm(&kernel.image)).unwrap();
    let o = progx(tmp.path(), &["fit", "kernel.pgm", "--epsilon", "1.5", "--json", "--out", "k"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(summary["model_type"], "segment2d");
    assert!(summary["instances"].as_u64().unwrap() >= 1);
}

struct PlaneScene {
    r: Matrix3<f64>,
    t: Vector3<f64>,
    scene: Scene,
}

/// Two planes tilted towards each other, each filling half of a 1000 px
/// image, seen from two cameras, plus 40 outliers.
fn two_planes(seed: u64, sigma: f64, rotate: bool) -> PlaneScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = synthetic_intrinsics(1000.0);
    let k_inv = k.try_inverse().unwrap();
    let r = if rotate {
        let axis = Unit::new_normalize(Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng)));
        *Rotation3::from_axis_angle(&axis, rng.random_range(0.0..10f64.to_radians())).matrix()
    } else {
        Matrix3::identity()
    };
    let t = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.3..0.3)).normalize();
    let noise = Normal::new(0.0, sigma.max(1e-300)).unwrap();
    let mut pts = Vec::new();
    for (p, tilt) in [0.5, -0.5].into_iter().enumerate() {
        let n = Vector3::new(tilt, rng.random_range(-0.2..0.2), 1.0).normalize();
        let d = rng.random_range(4.0..6.0);
        while pts.len() < 150 * (p + 1) {
            let x = Vector3::new(rng.random_range(p as f64 * 500.0..(p + 1) as f64 * 500.0), rng.random_range(0.0..1000.0), 1.0);
            let ray = k_inv * x;
            let y = r * (ray * (d / n.dot(&ray))) + t;
            let x2 = k * y / y.z;
            if !(0.0..1000.0).contains(&x2.x) || !(0.0..1000.0).contains(&x2.y) {
                continue;
            }
            let mut e = || if sigma > 0.0 { noise.sample(&mut rng) } else { 0.0 };
            pts.push(DataPoint::correspondence(x.x + e(), x.y + e(), x2.x + e(), x2.y + e()));
        }
    }
    for _ in 0..40 {
        let mut c = || rng.random_range(0.0..1000.0);
        pts.push(DataPoint::correspondence(c(), c(), c(), c()));
    }
    let mut scene = Scene::new(ModelType::Homography, PointSet::new(pts));
    scene.intrinsics = Some(k);
    PlaneScene { r, t, scene }
}

fn write_gt(path: &Path, r: &Matrix3<f64>, t: &Vector3<f64>) {
    let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| r[(i, j)]).collect()).collect();
    let gt = serde_json::json!({ "rotation": rows, "translation": [t.x, t.y, t.z] });
    fs::write(path, gt.to_string()).unwrap();
}

fn pose_errors(dir: &Path, s: &PlaneScene, name: &str) -> (f64, f64) {
    save_scene(&s.scene, dir.join(format!("{name}.csv"))).unwrap();
    write_gt(&dir.join(format!("{name}-gt.json")), &s.r, &s.t);
    let o = progx(dir, &["pose", &format!("{name}.csv"), "--gt", &format!("{name}-gt.json"), "--json", "--out", name]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let report: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_valid("pose.schema.json", &report);
    assert_eq!(report, read_json(&dir.join(name).join("pose.json")));
    let sel = &report["selected"];
    (sel["rotation_error_deg"].as_f64().unwrap(), sel["translation_error_deg"].as_f64().unwrap())
}

#[test]
fn pose_from_two_planes() {
    let tmp = TempDir::new().unwrap();
    let (mut sum_r, mut sum_t) = (0.0, 0.0);
    for seed in 0..5 {
        let (er, et) = pose_errors(tmp.path(), &two_planes(seed, 1.0, true), &format!("planes{seed}"));
        sum_r += er;
        sum_t += et;
    }
    assert!(sum_r / 5.0 < 0.5 && sum_t / 5.0 < 2.0, "mean errors {} {}", sum_r / 5.0, sum_t / 5.0);
}

#[test]
fn pose_without_rotation() {
    let tmp = TempDir::new().unwrap();
    let (er, _) = pose_errors(tmp.path(), &two_planes(11, 0.0, false), "identity");
    assert!(er < 1e-6, "{er}");
}

#[test]
fn pose_text_report_and_intrinsics_file() {
    let tmp = TempDir::new().unwrap();
    let s = two_planes(2, 0.5, true);
    let mut bare = s.scene.clone();
    bare.intrinsics = None;
    save_scene(&bare, tmp.path().join("bare.csv")).unwrap();
    let o = progx(tmp.path(), &["pose", "bare.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no intrinsics"));

    let k = s.scene.intrinsics.unwrap();
    let rows: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| k[(i, j)]).collect()).collect();
    fs::write(tmp.path().join("k.json"), serde_json::to_string(&rows).unwrap()).unwrap();
    write_gt(&tmp.path().join("gt.json"), &s.r, &s.t);
    let o = progx(tmp.path(), &["pose", "bare.csv", "--intrinsics", "k.json", "--gt", "gt.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    for needle in ["selected candidate", "rotation error:", "translation error:", "support"] {
        assert!(text.contains(needle), "{text}");
    }
}

#[test]
fn pose_on_noise_has_no_result() {
    let tmp = TempDir::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let pts = (0..100)
        .map(|_| {
            let mut c = || rng.random_range(0.0..1000.0);
            DataPoint::correspondence(c(), c(), c(), c())
        })
        .collect();
    let mut scene = Scene::new(ModelType::Homography, PointSet::new(pts));
    scene.intrinsics = Some(synthetic_intrinsics(1000.0));
    save_scene(&scene, tmp.path().join("noise.csv")).unwrap();
    let o = progx(tmp.path(), &["pose", "noise.csv"]);
    assert_eq!(o.status.code(), Some(2), "{}{}", stdout(&o), stderr(&o));
}
