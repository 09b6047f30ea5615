use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::error::{Error, Result};
use crate::solver::{BranchEvent, BranchState, StopReason, VerificationReport};
use crate::spectral::BifurcationPoint;

pub const TOOL: &str = "patchbif";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub problem_hash: String,
    pub certificate: BifurcationPoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSummary {
    pub states: usize,
    pub max_amplitude: f64,
    pub stop: StopReason,
    pub events: Vec<BranchEvent>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchFile {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub problem_hash: String,
    pub config: RunConfig,
    pub certificate: BifurcationPoint,
    pub summary: BranchSummary,
    pub states: Vec<BranchState>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateReport {
    pub index: usize,
    pub amplitude: f64,
    pub theta: f64,
    pub report: VerificationReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub strict: usize,
    pub pass: bool,
    pub states: Vec<StateReport>,
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// 17 significant digits, enough to round-trip any binary64.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_header(config_hash: &str) -> String {
    format!("# {TOOL} {VERSION}\n# config_hash {config_hash}\n")
}

pub fn branch_csv(file: &BranchFile) -> String {
    let mut out = csv_header(&file.config_hash);
    out.push_str(
        "index,amplitude,theta,b_inner,residual,circulation,exterior_velocity,min_gap,iterations\n",
    );
    for (i, s) in file.states.iter().enumerate() {
        let inner = s.layers.last().map_or(f64::NAN, |l| l.radius);
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{},{},{},{}",
            num(s.amplitude),
            num(s.theta),
            num(inner),
            num(s.residual),
            num(s.diagnostics.circulation),
            num(s.diagnostics.exterior_velocity_sup),
            num(s.diagnostics.min_gap),
            s.iterations
        );
    }
    out
}
