use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::contour::Family;
use crate::error::{Error, Result};
use crate::solver::{ContinuationConfig, VerifyTolerances};
use crate::spectral::{check_window, theta_roots, Root, DEFAULT_N_MAX};

pub const SCHEMA_VERSION: u32 = 1;

/// Rectangular sampling grid for `sample`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            x_min: -1.5,
            x_max: 1.5,
            nx: 61,
            y_min: -1.5,
            y_max: 1.5,
            ny: 61,
        }
    }
}

impl GridSpec {
    /// Parses `x_min,x_max,nx,y_min,y_max,ny`.
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 6 {
            return Err(Error::Config(format!(
                "grid needs x_min,x_max,nx,y_min,y_max,ny, got {text:?}"
            )));
        }
        let f = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("bad grid bound {s:?}: {e}")))
        };
        let n = |s: &str| {
            s.parse::<usize>()
                .map_err(|e| Error::Config(format!("bad grid count {s:?}: {e}")))
        };
        let g = GridSpec {
            x_min: f(parts[0])?,
            x_max: f(parts[1])?,
            nx: n(parts[2])?,
            y_min: f(parts[3])?,
            y_max: f(parts[4])?,
            ny: n(parts[5])?,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 || !(self.x_max >= self.x_min) || !(self.y_max >= self.y_min) {
            return Err(Error::Config(format!("empty or inverted grid {self:?}")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        let lerp = |lo: f64, hi: f64, k: usize, n: usize| {
            if n == 1 {
                lo
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                out.push([
                    lerp(self.x_min, self.x_max, i, self.nx),
                    lerp(self.y_min, self.y_max, j, self.ny),
                ]);
            }
        }
        out
    }
}

/// Everything a run depends on. Identical configs give byte-identical
/// outputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub problem: Family,
    pub fold: usize,
    /// Two-layer root selector; ignored for three layers.
    #[serde(default = "default_root")]
    pub root: Root,
    /// Explicit two-layer `Θ`, checked against the roots of `Δ_m`.
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default)]
    pub solver: ContinuationConfig,
    #[serde(default)]
    pub verify: VerifyTolerances,
    #[serde(default = "default_strict")]
    pub strict: usize,
    #[serde(default)]
    pub grid: GridSpec,
}

fn default_root() -> Root {
    Root::Plus
}

fn default_n_max() -> usize {
    DEFAULT_N_MAX
}

fn default_strict() -> usize {
    2
}

/// The part of the config that determines the bifurcation point.
#[derive(Serialize)]
struct ProblemKey<'a> {
    schema_version: u32,
    problem: &'a Family,
    fold: usize,
    root: Root,
    theta: Option<f64>,
    n_max: usize,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunConfig {
    pub fn new(problem: Family, fold: usize) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            problem,
            fold,
            root: default_root(),
            theta: None,
            n_max: default_n_max(),
            solver: ContinuationConfig::default(),
            verify: VerifyTolerances::for_newton_tol(ContinuationConfig::default().newton_tol),
            strict: default_strict(),
            grid: GridSpec::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// Structural checks plus the admissibility window of the family.
    pub fn validate(&self) -> Result<()> {
        if self.fold < 2 {
            return Err(Error::Domain(format!("fold must be at least 2, got {}", self.fold)));
        }
        if self.n_max < 2 {
            return Err(Error::Config(format!("n_max must be at least 2, got {}", self.n_max)));
        }
        if self.strict == 0 {
            return Err(Error::Config("strict must be at least 1".into()));
        }
        self.solver.validate()?;
        self.grid.validate()?;
        match self.problem {
            Family::TwoLayer { b } => theta_roots(b, self.fold).map(|_| ()),
            Family::ThreeLayer { b2, theta2 } => check_window(b2, theta2, self.fold),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON of the whole effective config.
    pub fn config_hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    /// SHA-256 of the fields that determine the bifurcation point.
    pub fn problem_hash(&self) -> String {
        let key = ProblemKey {
            schema_version: self.schema_version,
            problem: &self.problem,
            fold: self.fold,
            root: self.root,
            theta: self.theta,
            n_max: self.n_max,
        };
        sha256_hex(serde_json::to_string(&key).expect("key serializes").as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = RunConfig::from_json(
            r#"{"schema_version":1,"problem":{"family":"two_layer","b":0.3},"fold":2}"#,
        )
        .unwrap();
        assert_eq!(cfg.root, Root::Plus);
        assert_eq!(cfg.n_max, 50);
        assert_eq!(cfg.solver.truncation, 32);
        cfg.validate().unwrap();
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.config_hash(), cfg.config_hash());
    }

    #[test]
    fn hashes_separate_problem_from_solver_settings() {
        let a = RunConfig::new(Family::ThreeLayer { b2: 0.5, theta2: -5.0 }, 2);
        let mut b = a.clone();
        b.solver.ds = 2e-3;
        assert_ne!(a.config_hash(), b.config_hash());
        assert_eq!(a.problem_hash(), b.problem_hash());
        b.fold = 3;
        assert_ne!(a.problem_hash(), b.problem_hash());
        assert_eq!(a.config_hash().len(), 64);
    }

    #[test]
    fn rejections() {
        assert_eq!(
            RunConfig::from_json(r#"{"schema_version":2,"problem":{"family":"two_layer","b":0.3},"fold":2}"#)
                .unwrap_err()
                .code(),
            "CONFIG"
        );
        assert!(RunConfig::from_json(
            r#"{"schema_version":1,"problem":{"family":"two_layer","b":0.3},"fold":2,"bogus":1}"#
        )
        .is_err());
        let cfg = RunConfig::new(Family::TwoLayer { b: 0.5 }, 2);
        assert_eq!(cfg.validate().unwrap_err().code(), "B_TOO_LARGE");
        let cfg = RunConfig::new(Family::ThreeLayer { b2: 0.5, theta2: 5.0 }, 2);
        assert_eq!(cfg.validate().unwrap_err().code(), "PARAM_WINDOW");
    }

    #[test]
    fn grid_parsing() {
        let g = GridSpec::parse("-1,1,3, 0,2,2").unwrap();
        assert_eq!(g.points(), vec![[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0], [-1.0, 2.0], [0.0, 2.0], [1.0, 2.0]]);
        assert!(GridSpec::parse("1,0,3,0,1,1").is_err());
        assert!(GridSpec::parse("0,1,3").is_err());
    }
}
