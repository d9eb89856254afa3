//! Run configuration: a TOML (or JSON) file with one block per module.

use crate::ambient::{WarpKind, WarpingProfile};
use crate::curvature::CurvatureSpec;
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::problem::{AngularMode, HomotopyProblem, ManufacturedSolution, Prescription, PrescriptionForm};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Cosh,
    Exp,
    Power,
    CustomTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileBlock {
    pub kind: ProfileKind,
    /// `cosh`: `[shift]` (optional); `power`: `[p]`.
    #[serde(default)]
    pub params: Vec<f64>,
    pub domain: [f64; 2],
    /// Knots for `custom-table`.
    #[serde(default)]
    pub table_t: Vec<f64>,
    #[serde(default)]
    pub table_h: Vec<f64>,
}

fn default_period() -> f64 {
    2.0 * std::f64::consts::PI
}

fn default_order() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n: usize,
    #[serde(rename = "N")]
    pub nodes: usize,
    #[serde(rename = "L", default = "default_period")]
    pub period: f64,
    #[serde(default = "default_order")]
    pub order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureBlock {
    pub r: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormKind {
    /// `(c0 + eps g(u)) exp(-decay (t - decay_anchor)) / h(t)`
    Radial,
    /// `c0 + eps g(u)`, no height dependence
    #[serde(alias = "custom")]
    Uniform,
    /// Exact solution `base + amplitude * wave`; needs `unsafe`.
    Manufactured,
}

fn default_mode() -> [i32; 2] {
    [1, 0]
}

fn default_amplitude() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrescriptionBlock {
    pub form: FormKind,
    #[serde(default)]
    pub c0: f64,
    #[serde(default)]
    pub eps: f64,
    #[serde(default = "default_mode")]
    pub mode: [i32; 2],
    #[serde(default)]
    pub decay: f64,
    /// Defaults to `t0`.
    #[serde(default)]
    pub decay_anchor: Option<f64>,
    pub t_minus: f64,
    pub t_plus: f64,
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    /// Mean height of the manufactured solution; defaults to `t0`.
    #[serde(default)]
    pub base: Option<f64>,
}

fn default_eps_phi() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomotopyBlock {
    /// Defaults to the midpoint of the barriers.
    #[serde(default)]
    pub t0: Option<f64>,
    #[serde(default = "default_eps_phi")]
    pub eps_phi: f64,
}

impl Default for HomotopyBlock {
    fn default() -> Self {
        Self {
            t0: None,
            eps_phi: default_eps_phi(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub profile: ProfileBlock,
    pub grid: GridBlock,
    pub curvature: CurvatureBlock,
    pub prescription: PrescriptionBlock,
    #[serde(default)]
    pub homotopy: HomotopyBlock,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Skip the existence hypotheses on the prescription.
    #[serde(default, rename = "unsafe")]
    pub unsafe_mode: bool,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let cfg = Self::parse_path(path)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads without the cross-field checks, so callers can apply
    /// overrides before calling [`RunConfig::validate`].
    pub fn parse_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Cross-field consistency, checked before any numerics run.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if !(1..=2).contains(&g.n) {
            return Err(Error::Config(format!("grid.n = {} must be 1 or 2", g.n)));
        }
        if self.curvature.r == 0 || self.curvature.r > g.n {
            return Err(Error::Config(format!(
                "curvature.r = {} must satisfy 1 <= r <= n = {}",
                self.curvature.r, g.n
            )));
        }
        let p = &self.prescription;
        let [lo, hi] = self.profile.domain;
        if !(lo < p.t_minus && p.t_minus < p.t_plus && p.t_plus < hi) {
            return Err(Error::Config(format!(
                "need domain ({lo}, {hi}) to contain t_minus = {} < t_plus = {}",
                p.t_minus, p.t_plus
            )));
        }
        let t0 = self.t0();
        if !(p.t_minus < t0 && t0 < p.t_plus) {
            return Err(Error::Config(format!(
                "homotopy.t0 = {t0} must lie in ({}, {})",
                p.t_minus, p.t_plus
            )));
        }
        if p.form == FormKind::Manufactured && !self.unsafe_mode {
            return Err(Error::Config(
                "manufactured prescriptions violate the existence hypotheses; set unsafe = true".into(),
            ));
        }
        if self.homotopy.eps_phi < 0.0 {
            return Err(Error::Config("homotopy.eps_phi must be >= 0".into()));
        }
        match self.profile.kind {
            ProfileKind::Power if self.profile.params.len() != 1 => {
                return Err(Error::Config("power profile takes params = [p]".into()))
            }
            ProfileKind::Cosh if self.profile.params.len() > 1 => {
                return Err(Error::Config("cosh profile takes params = [] or [shift]".into()))
            }
            ProfileKind::CustomTable if self.profile.table_t.len() != self.profile.table_h.len() => {
                return Err(Error::Config("table_t and table_h differ in length".into()))
            }
            _ => {}
        }
        self.solver.validate()
    }

    pub fn t0(&self) -> f64 {
        let p = &self.prescription;
        self.homotopy.t0.unwrap_or(0.5 * (p.t_minus + p.t_plus))
    }

    /// Warping profile with the `eta` anchor at `t0`.
    pub fn profile(&self) -> Result<WarpingProfile> {
        let b = &self.profile;
        let [lo, hi] = b.domain;
        let kind = match b.kind {
            ProfileKind::Cosh => WarpKind::Cosh {
                shift: b.params.first().copied().unwrap_or(0.0),
            },
            ProfileKind::Exp => WarpKind::Exp,
            ProfileKind::Power => WarpKind::Power { p: b.params[0] },
            ProfileKind::CustomTable => {
                return Ok(WarpingProfile::table(&b.table_t, &b.table_h, lo, hi)?.with_anchor(self.t0()))
            }
        };
        Ok(WarpingProfile::new(kind, lo, hi)?.with_anchor(self.t0()))
    }

    pub fn spec(&self) -> Result<CurvatureSpec> {
        CurvatureSpec::new(self.grid.n, self.curvature.r)
    }

    pub fn grid(&self) -> Result<TorusGrid> {
        TorusGrid::new(self.grid.n, self.grid.nodes, self.grid.period, self.grid.order)
    }

    pub fn manufactured(&self) -> Option<ManufacturedSolution> {
        let p = &self.prescription;
        (p.form == FormKind::Manufactured).then(|| ManufacturedSolution {
            base: p.base.unwrap_or(self.t0()),
            amplitude: p.amplitude,
        })
    }

    /// Prescription bound to the configured grid; validated unless the run
    /// is unsafe.
    pub fn prescription(&self) -> Result<Prescription> {
        let profile = self.profile()?;
        let spec = self.spec()?;
        let grid = self.grid()?;
        let p = &self.prescription;
        if let Some(m) = self.manufactured() {
            return m.prescription(&grid, &profile, &spec, p.t_minus, p.t_plus);
        }
        let mode = AngularMode { freq: p.mode };
        let form = match p.form {
            FormKind::Radial => PrescriptionForm::RadialDecay {
                c0: p.c0,
                eps: p.eps,
                mode,
                decay: p.decay,
                decay_anchor: p.decay_anchor.unwrap_or(self.t0()),
            },
            FormKind::Uniform => PrescriptionForm::Uniform {
                c0: p.c0,
                eps: p.eps,
                mode,
            },
            FormKind::Manufactured => unreachable!(),
        };
        if self.unsafe_mode {
            Prescription::unchecked(form, p.t_minus, p.t_plus, &profile, &spec, &grid)
        } else {
            Prescription::build(form, p.t_minus, p.t_plus, &profile, &spec, &grid)
        }
    }

    pub fn problem(&self) -> Result<HomotopyProblem> {
        HomotopyProblem::new(self.prescription()?, self.t0(), self.homotopy.eps_phi)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        [profile]
        kind = "cosh"
        domain = [0.0, 4.0]

        [grid]
        n = 1
        N = 32

        [curvature]
        r = 1

        [prescription]
        form = "radial"
        c0 = 1.1752011936438014
        t_minus = 0.5
        t_plus = 1.5
    "#;

    #[test]
    fn parses_with_defaults() {
        let cfg = RunConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.t0(), 1.0);
        assert_eq!(cfg.grid.order, 2);
        assert_eq!(cfg.homotopy.eps_phi, 0.1);
        assert_eq!(cfg.solver, SolverConfig::default());
        cfg.problem().unwrap();
        assert_eq!(cfg.profile().unwrap().anchor(), 1.0);
    }

    #[test]
    fn json_round_trip() {
        let cfg = RunConfig::from_toml_str(BASE).unwrap();
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json_str(&json).unwrap(), cfg);
        assert_eq!(RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn rejects_inconsistent_fields() {
        let r2 = BASE.replace("r = 1", "r = 2");
        assert!(matches!(RunConfig::from_toml_str(&r2), Err(Error::Config(_))));
        let t0 = format!("{BASE}\n[homotopy]\nt0 = 2.0\n");
        assert!(matches!(RunConfig::from_toml_str(&t0), Err(Error::Config(_))));
        let m = BASE.replace("\"radial\"", "\"manufactured\"");
        assert!(matches!(RunConfig::from_toml_str(&m), Err(Error::Config(_))));
        let typo = BASE.replace("c0 =", "cc =");
        assert!(RunConfig::from_toml_str(&typo).is_err());
    }

    #[test]
    fn invalid_lower_barrier_names_hypothesis_a() {
        let cfg = RunConfig::from_toml_str(&BASE.replace("t_minus = 0.5", "t_minus = 1.2").replace("t_plus = 1.5", "t_plus = 1.8").replace("[prescription]", "[homotopy]\nt0 = 1.5\n\n[prescription]")).unwrap();
        match cfg.problem() {
            Err(Error::Validation { hypothesis, .. }) => assert_eq!(hypothesis, "a"),
            other => panic!("{other:?}"),
        }
    }
}
