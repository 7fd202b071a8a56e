use std::path::Path;

use anyhow::{anyhow, Context, Result};
use nalgebra::{Matrix3, Vector3};
use progx::pose::{pose_from_multi_h, rotation_error_deg, translation_error_deg, PoseOptions, PoseSource, RelativePose};
use progx::{Error, ModelType};
use serde::{Deserialize, Serialize};

use super::{load_input, Outcome};
use crate::args::{Command, PoseArgs};
use crate::output::{read_json, to_json, Motion, OutputDir, SCHEMA_VERSION};

#[derive(Debug, Serialize)]
struct PoseRecord {
    index: usize,
    source: PoseSource,
    support: usize,
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    normal: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rotation_error_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    translation_error_deg: Option<f64>,
}

#[derive(Debug, Serialize)]
struct PoseReport {
    schema_version: u32,
    homographies: usize,
    selected: PoseRecord,
    candidates: Vec<PoseRecord>,
}

/// Ground-truth files may hold the motion at the top level or under `motion`.
#[derive(Deserialize)]
#[serde(untagged)]
enum GroundTruth {
    Nested { motion: Motion },
    Flat(Motion),
}

fn matrix(rows: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| rows[i][j])
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]))
}

fn read_intrinsics(path: &Path) -> Result<Matrix3<f64>> {
    let k: [[f64; 3]; 3] = read_json(path)?;
    let k = matrix(&k);
    k.try_inverse().ok_or_else(|| anyhow!("intrinsics in {} are singular", path.display()))?;
    Ok(k)
}

fn record(index: usize, pose: &RelativePose, support: usize, gt: Option<&(Matrix3<f64>, Vector3<f64>)>) -> PoseRecord {
    PoseRecord {
        index,
        source: pose.source,
        support,
        rotation: rows(&pose.rotation),
        translation: [pose.translation.x, pose.translation.y, pose.translation.z],
        normal: pose.normal.map(|n| [n.x, n.y, n.z]),
        rotation_error_deg: gt.map(|(r, _)| rotation_error_deg(&pose.rotation, r)),
        translation_error_deg: gt.map(|(_, t)| translation_error_deg(&pose.translation, t)),
    }
}

pub fn run(args: &PoseArgs, command: &Command) -> Result<Outcome> {
    let scene = load_input(&args.scene, Some(ModelType::Homography), 0.1)?;
    let k1 = match &args.intrinsics {
        Some(p) => read_intrinsics(p)?,
        None => scene.intrinsics.ok_or_else(|| anyhow!("no intrinsics: pass --intrinsics or use a scene that has them"))?,
    };
    let k2 = match &args.intrinsics2 {
        Some(p) => read_intrinsics(p)?,
        None if args.intrinsics.is_some() => k1,
        None => scene.intrinsics2.unwrap_or(k1),
    };
    let gt = match &args.gt {
        Some(p) => {
            let m = match read_json::<GroundTruth>(p).with_context(|| format!("{} holds no rotation/translation", p.display()))? {
                GroundTruth::Nested { motion } | GroundTruth::Flat(motion) => motion,
            };
            Some((matrix(&m.rotation), Vector3::from(m.translation)))
        }
        None => None,
    };
    let cfg = args.engine.config();
    let opts = PoseOptions { reproj_eps: args.reproj_eps, use_essential: !args.no_essential };
    let result = match pose_from_multi_h(&scene.points, &k1, &k2, &cfg, &opts) {
        Ok(r) => r,
        Err(Error::NoValidPose) => {
            eprintln!("no candidate pose has positive support");
            return Ok(Outcome::NoResult);
        }
        Err(e) => return Err(e).context("pose recovery"),
    };
    let sel = &result.selection;
    let report = PoseReport {
        schema_version: SCHEMA_VERSION,
        homographies: result.report.instances.len(),
        selected: record(sel.index, &sel.pose, sel.pose.support, gt.as_ref()),
        candidates: result
            .candidates
            .iter()
            .enumerate()
            .map(|(i, c)| record(i, c, sel.supports[i], gt.as_ref()))
            .collect(),
    };

    let mut out = OutputDir::create(&args.out)?;
    out.write("pose.json", &to_json(&report)?)?;
    let mut inputs: Vec<&Path> = vec![&args.scene];
    inputs.extend(args.intrinsics.as_deref());
    inputs.extend(args.intrinsics2.as_deref());
    inputs.extend(args.gt.as_deref());
    out.finish(command, Some(cfg.clone()), cfg.seed, &inputs, Some(result.report.wall_time))?;

    if args.json {
        print!("{}", to_json(&report)?);
        return Ok(Outcome::Done);
    }
    let s = &report.selected;
    println!("homographies: {}", report.homographies);
    println!("selected candidate {} ({}), support {}", s.index, source_name(s.source), s.support);
    for r in &s.rotation {
        println!("  R  [{:>10.6} {:>10.6} {:>10.6}]", r[0], r[1], r[2]);
    }
    println!("  t  [{:>10.6} {:>10.6} {:>10.6}]", s.translation[0], s.translation[1], s.translation[2]);
    if let (Some(er), Some(et)) = (s.rotation_error_deg, s.translation_error_deg) {
        println!("rotation error: {er:.6} deg");
        println!("translation error: {et:.6} deg");
    }
    println!("{:>9} {:>15} {:>8} {:>10} {:>10}", "candidate", "source", "support", "err_R", "err_t");
    for c in &report.candidates {
        let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
        println!(
            "{:>9} {:>15} {:>8} {:>10} {:>10}",
            c.index,
            source_name(c.source),
            c.support,
            fmt(c.rotation_error_deg),
            fmt(c.translation_error_deg)
        );
    }
    Ok(Outcome::Done)
}

fn source_name(s: PoseSource) -> &'static str {
    match s {
        PoseSource::FromEssential => "essential",
        PoseSource::FromHomography => "homography",
        PoseSource::Averaged => "averaged",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Rotation3;
    use progx::pose::PoseSource;

    #[test]
    fn ten_degrees_about_z() {
        let r = *Rotation3::from_euler_angles(0.0, 0.0, 10f64.to_radians()).matrix();
        let pose = RelativePose::new(r, Vector3::x(), PoseSource::FromHomography);
        let rec = record(0, &pose, 5, Some(&(Matrix3::identity(), Vector3::x())));
        assert_eq!(format!("{:.6}", rec.rotation_error_deg.unwrap()), "10.000000");
        assert_eq!(rec.translation_error_deg, Some(0.0));
    }

    #[test]
    fn ground_truth_shapes() {
        let flat = r#"{"rotation": [[1,0,0],[0,1,0],[0,0,1]], "translation": [1,0,0]}"#;
        let nested = format!(r#"{{"schema_version": 1, "motion": {flat}}}"#);
        for text in [flat.to_string(), nested] {
            assert!(serde_json::from_str::<GroundTruth>(&text).is_ok());
        }
    }
}
