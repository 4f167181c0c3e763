//! Scenario configuration documents. Unknown keys are rejected everywhere.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::{
    Bump, CoeffName, Coefficient, CrossSection, CutoffSpec, PerturbationCoeffs, ScalingFunction, SpectralWindow,
    ThetaSeries,
};
use crate::phase::Sign;
use crate::spectral::GKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalingConfig {
    Power { alpha: f64 },
    Constant { value: f64 },
}

impl ScalingConfig {
    pub fn build(&self) -> ScalingFunction {
        match *self {
            ScalingConfig::Power { alpha } => ScalingFunction::power(alpha),
            ScalingConfig::Constant { value } => ScalingFunction::constant(value),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossSectionConfig {
    /// Mode cutoff M; modes |m| <= M are kept.
    pub modes: usize,
}

/// One coefficient c chi(r) <r>^{-nu} f(theta). Each theta mode is
/// [p, a] for a cos(p theta) or [p, a, b] adding b sin(p theta).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffConfig {
    pub name: CoeffName,
    pub c: f64,
    pub nu: f64,
    #[serde(default)]
    pub theta_modes: Vec<Vec<f64>>,
}

impl CoeffConfig {
    pub fn build(&self) -> Result<Coefficient> {
        let mut terms = Vec::with_capacity(self.theta_modes.len());
        for t in &self.theta_modes {
            let (p, a, b) = match t.as_slice() {
                [p, a] => (*p, *a, 0.0),
                [p, a, b] => (*p, *a, *b),
                _ => return Err(Error::ConfigInvalid(format!("theta mode {t:?} of {}", self.name.as_str()))),
            };
            if p.fract() != 0.0 {
                return Err(Error::ConfigInvalid(format!("non-integer theta mode {p}")));
            }
            terms.push((p as i64, a, b));
        }
        let theta = if terms.is_empty() { ThetaSeries::constant() } else { ThetaSeries::real(&terms) };
        Ok(Coefficient { name: self.name, c: self.c, nu: self.nu, theta })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub h: f64,
    /// Half-line points; full-line reference grids get 2n points.
    pub n: usize,
    /// Time step; defaults to half the inverse Gershgorin radius of L.
    #[serde(default)]
    pub dt: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub r0: f64,
    pub rho0: f64,
    pub width: f64,
    /// Mode carrying the packet (angular number m).
    #[serde(default)]
    pub mode: i64,
}

fn default_budget() -> usize {
    10
}
fn default_probes() -> usize {
    4
}
fn default_samples() -> usize {
    2000
}
fn default_cook_tol() -> f64 {
    crate::scattering::COOK_TOL
}
fn default_degree() -> usize {
    2000
}
fn default_pass_mean() -> f64 {
    0.98
}
fn default_rho_cell() -> f64 {
    0.25
}
fn default_c_max() -> f64 {
    1e3
}
fn default_plus() -> Sign {
    Sign::Plus
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CookReference {
    /// W(L, L0) on the half line.
    OneSpace,
    /// W(L, H0; J) with the free full-line reference.
    TwoSpace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Pipeline {
    Validate {
        #[serde(default = "one")]
        r_lo: f64,
        #[serde(default = "ten_thousand")]
        r_hi: f64,
        #[serde(default = "default_samples")]
        samples: usize,
    },
    Mourre {
        epsilon: f64,
        #[serde(default = "default_budget")]
        budget: usize,
    },
    Lap {
        lambda: f64,
        s: f64,
        etas: Vec<f64>,
        #[serde(default = "default_probes")]
        probes: usize,
    },
    Smoothness {
        weight: GKind,
        packet: PacketConfig,
        t_max: f64,
        #[serde(default = "default_degree")]
        degree: usize,
    },
    Radiation {
        epsilon: f64,
        #[serde(default = "default_c_max")]
        c_max: f64,
        #[serde(default = "default_probes")]
        probes: usize,
    },
    Cook {
        reference: CookReference,
        packet: PacketConfig,
        t_max: f64,
        #[serde(default = "default_cook_tol")]
        tol: f64,
        #[serde(default = "default_plus")]
        direction: Sign,
    },
    ModifiedCook {
        packet: PacketConfig,
        t_max: f64,
        #[serde(default = "default_cook_tol")]
        tol: f64,
        #[serde(default = "default_plus")]
        direction: Sign,
        #[serde(default = "default_rho_cell")]
        rho_cell: f64,
    },
    Completeness {
        ensemble: usize,
        r_init: f64,
        t: f64,
        #[serde(default = "default_degree")]
        degree: usize,
        #[serde(default = "default_pass_mean")]
        pass_mean: f64,
    },
    Phase {
        lambda: f64,
        rho: f64,
        r_lo: f64,
        r_hi: f64,
        #[serde(default = "default_plus")]
        sign: Sign,
    },
    Compose {
        lambda: f64,
        radii: Vec<f64>,
        rho0: f64,
        width: f64,
    },
}

fn one() -> f64 {
    1.0
}
fn ten_thousand() -> f64 {
    1e4
}

impl Pipeline {
    pub fn name(&self) -> &'static str {
        match self {
            Pipeline::Validate { .. } => "validate",
            Pipeline::Mourre { .. } => "mourre",
            Pipeline::Lap { .. } => "lap",
            Pipeline::Smoothness { .. } => "smoothness",
            Pipeline::Radiation { .. } => "radiation",
            Pipeline::Cook { .. } => "cook",
            Pipeline::ModifiedCook { .. } => "modified_cook",
            Pipeline::Completeness { .. } => "completeness",
            Pipeline::Phase { .. } => "phase",
            Pipeline::Compose { .. } => "compose",
        }
    }
}

/// A complete scenario: model, discretisation and the pipeline to run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub k: ScalingConfig,
    pub cross_section: CrossSectionConfig,
    #[serde(default)]
    pub coeffs: Vec<CoeffConfig>,
    #[serde(rename = "cutoff_R")]
    pub cutoff_r: f64,
    pub window: [f64; 2],
    /// Energy bump [lo, hi, width]; defaults to a bump filling the window.
    #[serde(default)]
    pub psi: Option<[f64; 3]>,
    pub grid: GridConfig,
    pub pipeline: Pipeline,
    #[serde(default)]
    pub seed: u64,
}

/// Model objects resolved from a config.
#[derive(Debug)]
pub struct ResolvedModel {
    pub k: ScalingFunction,
    pub cs: CrossSection,
    pub coeffs: PerturbationCoeffs,
    pub cutoff: CutoffSpec,
    pub window: SpectralWindow,
    pub half: Grid1D,
    pub full: Grid1D,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn check(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if !(self.grid.h > 0.0) || self.grid.n < 16 {
            return bad(format!("grid h = {}, n = {}", self.grid.h, self.grid.n));
        }
        if let Some(dt) = self.grid.dt {
            if !(dt > 0.0) {
                return bad(format!("dt = {dt}"));
            }
        }
        if !(self.cutoff_r > 0.0) {
            return bad(format!("cutoff_R = {}", self.cutoff_r));
        }
        if !(self.window[1] > self.window[0]) {
            return bad(format!("window {:?} is empty", self.window));
        }
        if let Some([lo, hi, w]) = self.psi {
            if !(hi >= lo) || !(w > 0.0) {
                return bad(format!("psi bump [{lo}, {hi}, {w}]"));
            }
        }
        Ok(())
    }

    pub fn psi_bump(&self) -> Bump {
        match self.psi {
            Some([lo, hi, w]) => Bump::new(lo, hi, w),
            None => {
                let [lo, hi] = self.window;
                let w = 0.2 * (hi - lo);
                Bump::new(lo + w, hi - w, w)
            }
        }
    }

    pub fn resolve(&self) -> Result<ResolvedModel> {
        let mut coeffs = PerturbationCoeffs::zero();
        for c in &self.coeffs {
            coeffs = coeffs.with(c.build()?);
        }
        let n = self.grid.n;
        Ok(ResolvedModel {
            k: self.k.build(),
            cs: CrossSection::new(self.cross_section.modes),
            coeffs,
            cutoff: CutoffSpec::new(self.cutoff_r, self.psi_bump()),
            window: SpectralWindow::new(self.window[0], self.window[1]),
            half: Grid1D::half_line_h(self.grid.h, n),
            full: Grid1D::full_line(2 * n, self.grid.h),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "k": {"kind": "power", "alpha": 0.6},
        "cross_section": {"modes": 2},
        "coeffs": [{"name": "V", "c": 0.3, "nu": 1.5, "theta_modes": [[0, 1.0], [1, 0.5]]}],
        "cutoff_R": 8.0,
        "window": [0.5, 1.5],
        "grid": {"h": 0.25, "n": 400},
        "pipeline": {"kind": "mourre", "epsilon": 0.1}
    }"#;

    #[test]
    fn parses_documented_example() {
        let cfg = ScenarioConfig::from_json(EXAMPLE).unwrap();
        assert_eq!(cfg.pipeline.name(), "mourre");
        let m = cfg.resolve().unwrap();
        assert_eq!(m.cs.n_modes(), 5);
        let v = m.coeffs.get(CoeffName::V).next().unwrap();
        assert!((v.theta.eval(0.0).re - 1.5).abs() < 1e-12);
        assert_eq!(m.full.n, 800);
        // round trip through JSON keeps everything
        let again = ScenarioConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn unknown_keys_rejected() {
        let top = EXAMPLE.replacen("\"cutoff_R\"", "\"cutoffR\": 1, \"cutoff_R\"", 1);
        assert_eq!(ScenarioConfig::from_json(&top).unwrap_err().code(), "cli_runner.ConfigInvalid");
        let nested = EXAMPLE.replacen("\"epsilon\": 0.1", "\"epsilon\": 0.1, \"eps\": 2", 1);
        assert!(ScenarioConfig::from_json(&nested).is_err());
        let k = EXAMPLE.replacen("\"alpha\": 0.6", "\"alpha\": 0.6, \"beta\": 1", 1);
        assert!(ScenarioConfig::from_json(&k).is_err());
    }

    #[test]
    fn bad_values_rejected() {
        let g = EXAMPLE.replacen("\"h\": 0.25", "\"h\": -1", 1);
        assert!(ScenarioConfig::from_json(&g).is_err());
        let w = EXAMPLE.replacen("[0.5, 1.5]", "[1.5, 0.5]", 1);
        assert!(ScenarioConfig::from_json(&w).is_err());
        let t = EXAMPLE.replacen("[[0, 1.0], [1, 0.5]]", "[[0.5, 1.0]]", 1);
        assert!(ScenarioConfig::from_json(&t).unwrap().resolve().is_err());
    }
}
