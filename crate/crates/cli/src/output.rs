use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use progx::engine::{FitReport, Termination};
use progx::{LossFunction, LossKind, ModelInstance, ModelType};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Command;

pub const SCHEMA_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub epsilon: f64,
    pub dof: u32,
}

impl LossSpec {
    pub fn of(loss: &LossFunction) -> Self {
        Self { kind: loss.kind(), epsilon: loss.epsilon(), dof: loss.dof() }
    }

    pub fn function(&self) -> Result<LossFunction> {
        Ok(LossFunction::new(self.kind, self.epsilon, self.dof)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: usize,
    pub params: Vec<f64>,
    /// Compound quality against the other instances; absent for ground truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<f64>,
    pub inliers: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub termination: Termination,
    pub iterations: usize,
    pub proposals_tried: usize,
    pub sampler_draws: usize,
    pub fallback_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Motion {
    /// Row-major.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
}

/// Contents of `instances.json` (from `fit`) and `truth.json` (from `synth`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstancesFile {
    pub schema_version: u32,
    pub model_type: ModelType,
    pub loss: LossSpec,
    pub instances: Vec<InstanceRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub motion: Option<Motion>,
}

impl InstancesFile {
    pub fn from_report(report: &FitReport, loss: &LossFunction) -> Self {
        let instances = report
            .instances
            .iter()
            .enumerate()
            .map(|(j, h)| InstanceRecord { id: j, params: h.params(), quality: Some(report.qualities[j]), inliers: report.inliers(j) })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            model_type: report.model_type,
            loss: LossSpec::of(loss),
            instances,
            run: Some(RunStats {
                termination: report.termination,
                iterations: report.iterations,
                proposals_tried: report.proposals_tried,
                sampler_draws: report.sampler_draws,
                fallback_samples: report.fallback_samples,
            }),
            motion: None,
        }
    }

    pub fn model_instances(&self) -> Result<Vec<ModelInstance>> {
        self.instances
            .iter()
            .map(|r| ModelInstance::from_params(self.model_type, &r.params).with_context(|| format!("instance {}", r.id)))
            .collect()
    }
}

/// Per-point assignment table: nearest instance (blank for outliers) and its residual.
pub fn assignment_csv(assignment: &[Option<usize>], residuals: &[Option<f64>]) -> String {
    let mut out = String::from("point,instance,residual\n");
    for (i, (a, r)) in assignment.iter().zip(residuals).enumerate() {
        let a = a.map(|j| j.to_string()).unwrap_or_default();
        let r = r.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!("{i},{a},{r}\n"));
    }
    out
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(format!("{:x}", Sha256::digest(&bytes)))
}

pub fn ensure_exists(path: &Path) -> Result<()> {
    if !path.exists() {
        bail!("no such file: {}", path.display());
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileHash {
    pub path: PathBuf,
    pub sha256: String,
}

/// Record of one run: the resolved command, input and output hashes, and timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool: String,
    pub version: String,
    pub command: Command,
    /// Resolved engine configuration, for reference.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub engine: Option<progx::engine::EngineConfig>,
    pub seed: u64,
    pub inputs: Vec<FileHash>,
    pub outputs: Vec<FileHash>,
    /// Seconds spent fitting; not part of the reproducible outputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

/// Collects output files of a run and writes them together with the manifest.
pub struct OutputDir {
    dir: PathBuf,
    written: Vec<FileHash>,
}

impl OutputDir {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.path(name);
        self.write_at(&path, contents)?;
        Ok(path)
    }

    /// Writes a file outside the directory (e.g. a user-chosen SVG path).
    pub fn write_at(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
        fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(FileHash { path: path.to_path_buf(), sha256: format!("{:x}", Sha256::digest(contents.as_bytes())) });
        Ok(())
    }

    pub fn finish(self, command: &Command, engine: Option<progx::engine::EngineConfig>, seed: u64, inputs: &[&Path], wall_time: Option<f64>) -> Result<PathBuf> {
        let inputs = inputs
            .iter()
            .map(|p| Ok(FileHash { path: p.to_path_buf(), sha256: sha256_file(p)? }))
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.clone(),
            engine,
            seed,
            inputs,
            outputs: self.written,
            wall_time,
        };
        let path = self.dir.join(MANIFEST_NAME);
        fs::write(&path, to_json(&manifest)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    ensure_exists(path)?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}
