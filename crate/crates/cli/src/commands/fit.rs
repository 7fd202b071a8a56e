use anyhow::{Context, Result};
use progx::engine::{fit, misclassification_error, Termination};
use progx::ModelType;
use serde::Serialize;

use super::{load_input, Outcome};
use crate::args::{Command, FitArgs};
use crate::output::{assignment_csv, to_json, InstancesFile, OutputDir};
use crate::svg;

#[derive(Debug, Serialize)]
struct FitSummary {
    model_type: ModelType,
    points: usize,
    instances: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    misclassification_error: Option<f64>,
    termination: Termination,
    wall_time: f64,
    out: String,
}

pub fn run(args: &FitArgs, command: &Command) -> Result<Outcome> {
    let scene = load_input(&args.scene, args.model, args.kernel_threshold)?;
    let model = scene.model_type;
    let cfg = args.engine.config();
    let report = fit(&scene.points, model, &cfg).context("fitting")?;
    let loss = cfg.loss_function(model)?;

    let residuals: Vec<Option<f64>> = report
        .min_residual_assignment
        .iter()
        .zip(scene.points.iter())
        .map(|(a, p)| a.map(|j| report.instances[j].residual(p)))
        .collect();
    let mut out = OutputDir::create(&args.out)?;
    out.write("instances.json", &to_json(&InstancesFile::from_report(&report, &loss))?)?;
    out.write("assignment.csv", &assignment_csv(&report.min_residual_assignment, &residuals))?;
    if let Some(path) = &args.svg {
        out.write_at(path, &svg::render(&scene.points, &report.instances, &report.min_residual_assignment))?;
    }
    out.finish(command, Some(cfg.clone()), cfg.seed, &[&args.scene], Some(report.wall_time))?;

    let me = match &scene.labels {
        Some(labels) => Some(misclassification_error(&report.min_residual_assignment, labels)?),
        None => None,
    };
    let summary = FitSummary {
        model_type: model,
        points: scene.points.len(),
        instances: report.instances.len(),
        misclassification_error: me,
        termination: report.termination,
        wall_time: report.wall_time,
        out: args.out.display().to_string(),
    };
    if args.json {
        print!("{}", to_json(&summary)?);
    } else {
        println!("model: {model}");
        println!("points: {}", summary.points);
        println!("instances: {}", summary.instances);
        if let Some(me) = me {
            println!("misclassification error: {:.2}%", 100.0 * me);
        }
        println!("termination: {}", serde_json::to_value(report.termination)?.as_str().unwrap_or_default());
        println!("wall time: {:.3} s", report.wall_time);
        println!("outputs: {}", args.out.display());
    }
    Ok(if report.is_empty() { Outcome::NoResult } else { Outcome::Done })
}
