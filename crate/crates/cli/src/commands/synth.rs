use anyhow::Result;
use progx::ingest::{scene_to_csv, scene_to_json, synthesize, Scene, SyntheticSpec};
use progx::ModelType;
use serde::Serialize;

use super::Outcome;
use crate::args::{Command, SceneFormat, SynthArgs};
use crate::output::{to_json, InstanceRecord, InstancesFile, LossSpec, Motion, OutputDir, SCHEMA_VERSION};

#[derive(Debug, Serialize)]
struct SynthSummary {
    model_type: ModelType,
    points: usize,
    instances: usize,
    scene: String,
    truth: String,
}

pub fn run(args: &SynthArgs, command: &Command) -> Result<Outcome> {
    let spec = SyntheticSpec::new(args.model, args.instances, args.points, args.outliers)
        .with_sigma(args.sigma)
        .with_extent(args.extent)
        .with_seed(args.seed);
    let synth = synthesize(&spec)?;
    let mut scene = Scene::new(args.model, synth.points.clone());
    scene.labels = Some(synth.labels.clone());
    scene.intrinsics = synth.intrinsics;

    // Smallest hard threshold that keeps every labelled inlier.
    let epsilon = synth
        .points
        .iter()
        .zip(&synth.labels)
        .filter(|(_, &l)| l > 0)
        .map(|(p, &l)| synth.instances[l as usize - 1].residual(p))
        .fold(0.0, f64::max)
        * (1.0 + 1e-9)
        + 1e-9;
    let truth = InstancesFile {
        schema_version: SCHEMA_VERSION,
        model_type: args.model,
        loss: LossSpec { kind: progx::LossKind::Hard01, epsilon, dof: args.model.residual_dof() },
        instances: synth
            .instances
            .iter()
            .enumerate()
            .map(|(j, h)| InstanceRecord {
                id: j,
                params: h.params(),
                quality: None,
                inliers: synth.labels.iter().enumerate().filter(|(_, &l)| l as usize == j + 1).map(|(i, _)| i).collect(),
            })
            .collect(),
        run: None,
        motion: synth.motion.map(|(r, t)| Motion {
            rotation: std::array::from_fn(|i| std::array::from_fn(|k| r[(i, k)])),
            translation: [t.x, t.y, t.z],
        }),
    };

    let mut out = OutputDir::create(&args.out)?;
    let scene_path = match args.format {
        SceneFormat::Csv => out.write("scene.csv", &scene_to_csv(&scene))?,
        SceneFormat::Json => out.write("scene.json", &scene_to_json(&scene))?,
    };
    let truth_path = out.write("truth.json", &to_json(&truth)?)?;
    out.finish(command, None, args.seed, &[], None)?;

    let summary = SynthSummary {
        model_type: args.model,
        points: scene.points.len(),
        instances: truth.instances.len(),
        scene: scene_path.display().to_string(),
        truth: truth_path.display().to_string(),
    };
    if args.json {
        print!("{}", to_json(&summary)?);
    } else {
        println!("wrote {} points ({} instances) to {}", summary.points, summary.instances, summary.scene);
        println!("ground truth: {}", summary.truth);
    }
    Ok(Outcome::Done)
}
