//! TOML configuration for the identity suite.
//!
//! ```toml
//! name = "eguchi-hanson"
//! m = 2
//! level = [[1.0, 0.0, 0.0]]      # one [I, J, K] triple per generator
//! points = 20
//! seed = 7
//!
//! [[generators]]                 # four real m×m component matrices
//! a = [[0.0, 0.0], [0.0, 0.0]]
//! b = [[1.0, 0.0], [0.0, 1.0]]
//! c = [[0.0, 0.0], [0.0, 0.0]]
//! d = [[0.0, 0.0], [0.0, 0.0]]
//! ```

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::QuatMatrix;
use crate::scene::Scenario;
use crate::submersion::MIN_FD_STEP;

use super::Identity;

pub const DEFAULT_POINTS: usize = 20;
pub const DEFAULT_RADIUS: f64 = 1.5;

/// Per-identity pass thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(rename = "I1", default = "analytic")]
    pub i1: f64,
    #[serde(rename = "I2", default = "analytic")]
    pub i2: f64,
    #[serde(rename = "I3", default = "analytic")]
    pub i3: f64,
    #[serde(rename = "I4", default = "analytic")]
    pub i4: f64,
    #[serde(rename = "I5", default = "analytic")]
    pub i5: f64,
    #[serde(rename = "I6", default = "analytic")]
    pub i6: f64,
    #[serde(rename = "I7", default = "fd")]
    pub i7: f64,
    #[serde(rename = "I8", default = "fd")]
    pub i8: f64,
    #[serde(rename = "I9", default = "fd")]
    pub i9: f64,
    #[serde(rename = "I10", default = "analytic")]
    pub i10: f64,
    #[serde(rename = "I11", default = "analytic")]
    pub i11: f64,
    #[serde(rename = "I12", default = "fd")]
    pub i12: f64,
    #[serde(rename = "I13", default = "fd")]
    pub i13: f64,
}

fn analytic() -> f64 {
    1e-8
}

fn fd() -> f64 {
    1e-4
}

impl Default for Tolerances {
    fn default() -> Self {
        let (a, f) = (analytic(), fd());
        Self { i1: a, i2: a, i3: a, i4: a, i5: a, i6: a, i7: f, i8: f, i9: f, i10: a, i11: a, i12: f, i13: f }
    }
}

impl Tolerances {
    pub fn get(&self, id: Identity) -> f64 {
        match id {
            Identity::I1 => self.i1,
            Identity::I2 => self.i2,
            Identity::I3 => self.i3,
            Identity::I4 => self.i4,
            Identity::I5 => self.i5,
            Identity::I6 => self.i6,
            Identity::I7 => self.i7,
            Identity::I8 => self.i8,
            Identity::I9 => self.i9,
            Identity::I10 => self.i10,
            Identity::I11 => self.i11,
            Identity::I12 => self.i12,
            Identity::I13 => self.i13,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
    c: Vec<Vec<f64>>,
    d: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    m: usize,
    #[serde(default)]
    level: Vec<[f64; 3]>,
    #[serde(default)]
    generators: Vec<RawGenerator>,
    #[serde(default = "default_points")]
    points: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_radius")]
    radius: f64,
    #[serde(default = "default_fd_step")]
    fd_step: f64,
    #[serde(default)]
    output: Option<PathBuf>,
    #[serde(default)]
    tolerances: Tolerances,
}

fn default_points() -> usize {
    DEFAULT_POINTS
}

fn default_radius() -> f64 {
    DEFAULT_RADIUS
}

fn default_fd_step() -> f64 {
    crate::submersion::DEFAULT_FD_STEP
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub scenario: Scenario,
    pub points: usize,
    pub seed: u64,
    pub radius: f64,
    pub fd_step: f64,
    pub tolerances: Tolerances,
    pub output: Option<PathBuf>,
}

fn component(name: &str, index: usize, rows: &[Vec<f64>], m: usize) -> Result<DMatrix<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::Config(format!("generator {index} component {name} must be {m}x{m}")));
    }
    Ok(DMatrix::from_fn(m, m, |r, c| rows[r][c]))
}

impl VerifyConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            points: DEFAULT_POINTS,
            seed: 0,
            radius: DEFAULT_RADIUS,
            fd_step: default_fd_step(),
            tolerances: Tolerances::default(),
            output: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if raw.m == 0 {
            return Err(Error::Config("m must be positive".into()));
        }
        let generators = raw
            .generators
            .iter()
            .enumerate()
            .map(|(i, g)| {
                QuatMatrix::new(component("a", i, &g.a, raw.m)?, component("b", i, &g.b, raw.m)?, component("c", i, &g.c, raw.m)?, component("d", i, &g.d, raw.m)?)
            })
            .collect::<Result<Vec<_>>>()?;
        let scenario = Scenario::new(raw.name, raw.m, generators, raw.level)?;
        let cfg = Self {
            scenario,
            points: raw.points,
            seed: raw.seed,
            radius: raw.radius,
            fd_step: raw.fd_step,
            tolerances: raw.tolerances,
            output: raw.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Config("points must be positive".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Config("radius must be positive".into()));
        }
        if !(self.fd_step >= MIN_FD_STEP && self.fd_step.is_finite()) {
            return Err(Error::Config(format!("fd_step must be at least {MIN_FD_STEP:e}")));
        }
        for id in Identity::ALL {
            let t = self.tolerances.get(id);
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("tolerance for {} must be positive", id.label())));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EH: &str = r#"
name = "eh"
m = 2
level = [[1.0, 0.0, 0.0]]
points = 3
seed = 9

[[generators]]
a = [[0, 0], [0, 0]]
b = [[1, 0], [0, 1]]
c = [[0, 0], [0, 0]]
d = [[0, 0], [0, 0]]

[tolerances]
I7 = 0.5
"#;

    #[test]
    fn parses_generators_and_defaults() {
        let cfg = VerifyConfig::from_toml(EH).unwrap();
        assert_eq!((cfg.scenario.m(), cfg.scenario.k(), cfg.points, cfg.seed), (2, 1, 3, 9));
        assert_eq!(cfg.tolerances.i7, 0.5);
        assert_eq!(cfg.tolerances.i8, 1e-4);
        assert_eq!(cfg.tolerances.i1, 1e-8);
        assert_eq!(cfg.fd_step, 1e-4);
        let preset = Scenario::eguchi_hanson([1.0, 0.0, 0.0]);
        assert_eq!(cfg.scenario.generator_real(0), preset.generator_real(0));
    }

    #[test]
    fn rejects_bad_input() {
        let not_ah = EH.replace("a = [[0, 0], [0, 0]]", "a = [[1, 0], [0, 0]]");
        assert!(matches!(VerifyConfig::from_toml(&not_ah), Err(Error::NotAntiHermitian { .. })));
        let bad_shape = EH.replace("d = [[0, 0], [0, 0]]", "d = [[0, 0]]");
        assert!(matches!(VerifyConfig::from_toml(&bad_shape), Err(Error::Config(_))));
        let zero_points = EH.replace("points = 3", "points = 0");
        assert!(matches!(VerifyConfig::from_toml(&zero_points), Err(Error::Config(_))));
        let typo = EH.replace("seed = 9", "sede = 9");
        assert!(matches!(VerifyConfig::from_toml(&typo), Err(Error::Config(_))));
        let neg_tol = EH.replace("I7 = 0.5", "I7 = -1.0");
        assert!(matches!(VerifyConfig::from_toml(&neg_tol), Err(Error::Config(_))));
    }
}
