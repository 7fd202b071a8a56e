use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use progx::consensus::TauSemantics;
use progx::engine::{EngineConfig, KCounts};
use progx::sampling::SamplerKind;
use progx::{LossKind, ModelType};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "progx", version, about = "Multi-instance robust geometric model fitting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Every subcommand except `rerun` is recorded verbatim, fully defaulted, in
/// the run manifest.
#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Fit model instances to a scene file or blur-kernel image.
    Fit(FitArgs),
    /// Score instances against a labelled scene.
    Eval(EvalArgs),
    /// Generate a synthetic scene with ground truth.
    Synth(SynthArgs),
    /// Recover relative camera pose from multiple homographies.
    Pose(PoseArgs),
    /// Repeat a run from its manifest.
    #[serde(skip)]
    Rerun(RerunArgs),
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EngineArgs {
    /// Inlier threshold in input units.
    #[arg(long, default_value_t = EngineConfig::default().epsilon)]
    pub epsilon: f64,
    #[arg(long, default_value_t = EngineConfig::default().loss)]
    pub loss: LossKind,
    /// Minimum compound quality of a dominant instance.
    #[arg(long, default_value_t = EngineConfig::default().q_min)]
    pub q_min: f64,
    /// Model-to-model Tanimoto threshold.
    #[arg(long = "epsilon-t", default_value_t = EngineConfig::default().tau)]
    pub epsilon_t: f64,
    #[arg(long, default_value_t = EngineConfig::default().tau_semantics)]
    pub tau_semantics: TauSemantics,
    #[arg(long, default_value_t = EngineConfig::default().confidence)]
    pub confidence: f64,
    #[arg(long, default_value_t = EngineConfig::default().batch_size)]
    pub batch_size: usize,
    #[arg(long, default_value_t = EngineConfig::default().sampler)]
    pub sampler: SamplerKind,
    #[arg(long, default_value_t = EngineConfig::default().neighborhood.r_min)]
    pub r_min: f64,
    #[arg(long, default_value_t = EngineConfig::default().neighborhood.r_max)]
    pub r_max: f64,
    #[arg(long, default_value_t = EngineConfig::default().neighborhood.n_steps)]
    pub n_steps: usize,
    #[arg(long, default_value_t = EngineConfig::default().seed)]
    pub seed: u64,
    #[arg(long, default_value_t = EngineConfig::default().k_counts)]
    pub k_counts: KCounts,
}

impl EngineArgs {
    pub fn config(&self) -> EngineConfig {
        let mut cfg = EngineConfig {
            epsilon: self.epsilon,
            loss: self.loss,
            q_min: self.q_min,
            tau: self.epsilon_t,
            tau_semantics: self.tau_semantics,
            confidence: self.confidence,
            batch_size: self.batch_size,
            sampler: self.sampler,
            seed: self.seed,
            k_counts: self.k_counts,
            ..EngineConfig::default()
        };
        cfg.neighborhood.r_min = self.r_min;
        cfg.neighborhood.r_max = self.r_max;
        cfg.neighborhood.n_steps = self.n_steps;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Scene file (.csv, .json) or blur-kernel image (.pgm).
    pub scene: PathBuf,
    /// Model class; defaults to the scene's, or segment2d for images.
    #[arg(long)]
    pub model: Option<ModelType>,
    /// Relative intensity threshold for blur-kernel images.
    #[arg(long, default_value_t = 0.1)]
    pub kernel_threshold: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub engine: EngineArgs,
    /// Output directory.
    #[arg(long, default_value = "progx-out")]
    pub out: PathBuf,
    /// Also draw the result as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Print the summary as JSON.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Labelled scene file.
    pub scene: PathBuf,
    /// Instances file written by `fit` or `synth`.
    pub instances: PathBuf,
    /// Override the threshold recorded in the instances file.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SceneFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SynthArgs {
    #[arg(long)]
    pub model: ModelType,
    #[arg(long, default_value_t = 3)]
    pub instances: usize,
    /// Inliers per instance.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
    #[arg(long, default_value_t = 100)]
    pub outliers: usize,
    /// Noise standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    /// Side length of the square field (or image).
    #[arg(long, default_value_t = 1000.0)]
    pub extent: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SceneFormat::Csv)]
    pub format: SceneFormat,
    #[arg(long, default_value = "progx-out")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PoseArgs {
    /// Correspondence scene file.
    pub scene: PathBuf,
    /// Intrinsics of the first view as a JSON 3x3 row-major array; the
    /// scene's own when omitted.
    #[arg(long)]
    pub intrinsics: Option<PathBuf>,
    /// Intrinsics of the second view; the first view's when omitted.
    #[arg(long)]
    pub intrinsics2: Option<PathBuf>,
    /// Ground-truth motion (`rotation`, `translation`), e.g. a `synth` truth file.
    #[arg(long)]
    pub gt: Option<PathBuf>,
    /// Reprojection threshold in pixels for candidate support.
    #[arg(long, default_value_t = 4.0)]
    pub reproj_eps: f64,
    /// Do not add essential-matrix candidates.
    #[arg(long)]
    pub no_essential: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub engine: EngineArgs,
    #[arg(long, default_value = "progx-out")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct RerunArgs {
    /// Manifest written by an earlier run.
    pub manifest: PathBuf,
    /// Write outputs here instead of the recorded directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
