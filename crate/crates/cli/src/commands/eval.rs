use anyhow::{anyhow, bail, Result};
use progx::engine::{instance_scores, misclassification_error, FitReport, InstanceScore};
use serde::Serialize;

use super::{load_input, Outcome};
use crate::args::EvalArgs;
use crate::output::{read_json, to_json, InstancesFile, RunManifest, MANIFEST_NAME};

#[derive(Debug, Serialize)]
struct EvalReport {
    schema_version: u32,
    points: usize,
    misclassification_error: f64,
    instances: Vec<InstanceScore>,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time: Option<f64>,
}

pub fn run(args: &EvalArgs) -> Result<Outcome> {
    let scene = load_input(&args.scene, None, 0.1)?;
    let labels = scene.labels.as_ref().ok_or_else(|| anyhow!("{} has no ground-truth labels", args.scene.display()))?;
    let file: InstancesFile = read_json(&args.instances)?;
    if file.model_type != scene.model_type && scene.points.dim() != file.model_type.point_dim() {
        bail!("instances are {} but the scene holds {} data", file.model_type, scene.model_type);
    }
    let mut loss = file.loss.clone();
    if let Some(eps) = args.epsilon {
        loss.epsilon = eps;
    }
    let instances = file.model_instances()?;
    let (assignment, _) = FitReport::assign(&scene.points, &instances, &loss.function()?);
    let me = misclassification_error(&assignment, labels)?;
    let mut scores = instance_scores(&assignment, labels)?;
    // Instances without any assigned point are invisible to the matching.
    for j in scores.len()..instances.len() {
        scores.push(InstanceScore { instance: j, label: None, assigned: 0, precision: 0.0, recall: 0.0 });
    }
    let wall_time = args
        .instances
        .parent()
        .map(|d| d.join(MANIFEST_NAME))
        .filter(|p| p.exists())
        .and_then(|p| read_json::<RunManifest>(&p).ok())
        .and_then(|m| m.wall_time);

    let report = EvalReport {
        schema_version: crate::output::SCHEMA_VERSION,
        points: scene.points.len(),
        misclassification_error: me,
        instances: scores,
        wall_time,
    };
    if args.json {
        print!("{}", to_json(&report)?);
    } else {
        println!("misclassification error: {:.2}%", 100.0 * me);
        println!("{:>8} {:>6} {:>8} {:>9} {:>7}", "instance", "label", "assigned", "precision", "recall");
        for s in &report.instances {
            let label = s.label.map(|l| l.to_string()).unwrap_or_else(|| "-".into());
            println!("{:>8} {:>6} {:>8} {:>9.3} {:>7.3}", s.instance, label, s.assigned, s.precision, s.recall);
        }
        if let Some(t) = wall_time {
            println!("wall time: {t:.3} s");
        }
    }
    Ok(Outcome::Done)
}
