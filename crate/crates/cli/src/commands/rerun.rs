use anyhow::{bail, Result};

use super::Outcome;
use crate::args::{Command, RerunArgs};
use crate::output::{read_json, sha256_file, RunManifest};

/// Re-executes the recorded command after checking its inputs are unchanged.
pub fn run(args: &RerunArgs) -> Result<Outcome> {
    let manifest: RunManifest = read_json(&args.manifest)?;
    for input in &manifest.inputs {
        if sha256_file(&input.path)? != input.sha256 {
            bail!("input {} changed since the recorded run", input.path.display());
        }
    }
    let mut command = manifest.command;
    if let Some(out) = &args.out {
        match &mut command {
            Command::Fit(a) => {
                a.out = out.clone();
                // A user-chosen SVG path would be overwritten; keep it in the new directory.
                if let Some(svg) = &a.svg {
                    a.svg = Some(out.join(svg.file_name().unwrap_or_default()));
                }
            }
            Command::Synth(a) => a.out = out.clone(),
            Command::Pose(a) => a.out = out.clone(),
            Command::Eval(_) | Command::Rerun(_) => {}
        }
    }
    crate::dispatch(&command)
}
