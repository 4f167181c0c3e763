//! Scenario runner: resolve a config, run one pipeline, persist
//! summary.json, curves/*.csv and fields/*.bin, and compare runs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assemble::{
    assemble_a, assemble_l, assemble_l0, assemble_radiation_multiplier, weight_g0, weight_g1, weight_g2,
};
use crate::config::{CookReference, PacketConfig, Pipeline, ResolvedModel, ScenarioConfig};
use crate::error::{Error, Result};
use crate::fourier::FourierPlan;
use crate::grid::{Grid1D, WaveField};
use crate::model::{classify_perturbation, validate_scaling, CrossSection, CutoffSpec, PerturbationCoeffs};
use crate::model::{ScalingFunction, SpectralWindow};
use crate::pdo::{composition_errors, sigma, OscillatingOp, RhoPoly, Symbol};
use crate::phase::{build_phase, remainder_report, Dispersion, PhaseParams, Sign};
use crate::propagator::{chebyshev_filter, make_packet, stable_dt};
use crate::scattering::{
    build_modifier, completeness_probe, cook_wave_operator, filter_reference, isometry_defect, modified_wave_operator,
    random_filtered_states, Dynamics, Identifier,
};
use crate::spectral::{
    embedded_eigen_scan, kato_smoothness_integral, lap_resolvent_sup, mourre_form_check, radiation_inequality_check,
    KatoWeight,
};

type C = Complex64;

pub const VERSION: &str = concat!("scatterlab ", env!("CARGO_PKG_VERSION"));

/// Half-line size up to which the completeness pipeline scans for eigenvalues.
const SCAN_LIMIT: usize = 4000;

/// Absolute slack on the Mourre positivity floor.
const MOURRE_MARGIN: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: String,
    pub version: String,
    pub started: String,
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    pub report: serde_json::Value,
    pub config: ScenarioConfig,
}

/// Everything a pipeline produces before anything touches the disk.
#[derive(Default)]
struct Artifacts {
    pass: bool,
    metrics: BTreeMap<String, f64>,
    report: serde_json::Value,
    curves: Vec<(String, String)>,
    fields: Vec<(String, WaveField)>,
}

impl Artifacts {
    fn metric(&mut self, key: &str, v: f64) {
        self.metrics.insert(key.to_string(), v);
    }

    fn curve(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = Vec<f64>>) {
        let mut s = String::from(header);
        s.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        self.curves.push((name.to_string(), s));
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).map_err(|e| Error::Io(e.to_string()))
}

#[derive(Debug)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub summary: Summary,
}

/// Exit code convention: 0 all pass, 2 a check failed, 1 an error occurred.
pub fn exit_code(r: &Result<RunOutcome>) -> i32 {
    match r {
        Ok(o) if o.summary.status == Status::Pass => 0,
        Ok(_) => 2,
        Err(_) => 1,
    }
}

/// Load, run and persist one scenario. `seed` overrides the config's seed.
pub fn run_scenario(config_path: &Path, out_root: &Path, seed: Option<u64>) -> Result<RunOutcome> {
    let mut cfg = ScenarioConfig::load(config_path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    run_config(&cfg, out_root)
}

pub fn run_config(cfg: &ScenarioConfig, out_root: &Path) -> Result<RunOutcome> {
    let now = chrono::Local::now();
    let model = cfg.resolve()?;
    let art = execute(cfg, &model)?;
    let summary = Summary {
        kind: cfg.pipeline.name().to_string(),
        version: VERSION.to_string(),
        started: now.to_rfc3339(),
        status: if art.pass { Status::Pass } else { Status::Fail },
        metrics: art.metrics,
        report: art.report,
        config: cfg.clone(),
    };
    let stamp = now.format("%Y%m%dT%H%M%S%.3f").to_string();
    let mut dir = out_root.join(format!("{}-{stamp}", summary.kind));
    let mut bump = 1;
    while dir.exists() {
        dir = out_root.join(format!("{}-{stamp}-{bump}", summary.kind));
        bump += 1;
    }
    std::fs::create_dir_all(dir.join("curves"))?;
    std::fs::create_dir_all(dir.join("fields"))?;
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(dir.join("summary.json"), text)?;
    for (name, csv) in &art.curves {
        std::fs::write(dir.join("curves").join(format!("{name}.csv")), csv)?;
    }
    for (name, f) in &art.fields {
        f.save(&dir.join("fields").join(format!("{name}.bin")))?;
    }
    Ok(RunOutcome { dir, summary })
}

/// Parse and resolve a config and assemble its operator, without running.
pub fn validate_config(path: &Path) -> Result<ScenarioConfig> {
    let cfg = ScenarioConfig::load(path)?;
    let m = cfg.resolve()?;
    assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
    Ok(cfg)
}

fn mode_profile(cs: &CrossSection, m: i64) -> Result<Vec<C>> {
    let j = cs.index(m).ok_or_else(|| Error::ConfigInvalid(format!("packet mode {m} beyond cutoff")))?;
    let mut p = vec![C::default(); cs.n_modes()];
    p[j] = C::new(1.0, 0.0);
    Ok(p)
}

fn packet(p: &PacketConfig, grid: Grid1D, cs: &CrossSection) -> Result<WaveField> {
    make_packet(p.r0, p.rho0, p.width, grid, &mode_profile(cs, p.mode)?)
}

fn pick_dt(cfg: &ScenarioConfig, auto: f64) -> f64 {
    cfg.grid.dt.unwrap_or(auto)
}

fn phase_nu(m: &ResolvedModel) -> Result<f64> {
    m.coeffs
        .decay_class(&m.k)
        .phase_nu()
        .ok_or_else(|| Error::ConfigInvalid("scaling function has no decay index".into()))
}

fn execute(cfg: &ScenarioConfig, m: &ResolvedModel) -> Result<Artifacts> {
    let mut art = Artifacts::default();
    match &cfg.pipeline {
        Pipeline::Validate { r_lo, r_hi, samples } => {
            let c = validate_scaling(&m.k, *r_lo, *r_hi, *samples)?;
            assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
            art.metric("c0_hat", c.c0_hat);
            art.metric("c_hat", c.c_hat);
            art.metric("c2_hat", c.c2_hat);
            let class = match classify_perturbation(&m.coeffs, &m.k) {
                Ok(c) => to_json(&c)?,
                Err(e) => serde_json::Value::String(e.code().to_string()),
            };
            art.report = serde_json::json!({ "constants": to_json(&c)?, "classification": class });
            art.pass = true;
        }
        Pipeline::Mourre { epsilon, budget } => {
            let l = assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
            let a = assemble_a(&m.half, m.cs.n_modes(), &m.cutoff)?;
            let rep = mourre_form_check(&l, &a, &m.window, *epsilon, *budget)?;
            art.metric("alpha_hat", rep.alpha_hat);
            art.metric("violated_dim", rep.violated_dim as f64);
            art.metric("window_dim", rep.window_dim as f64);
            art.curve("lowest", "index,eigenvalue", rep.lowest.iter().enumerate().map(|(i, v)| vec![i as f64, *v]));
            // positivity floor min(2, c0)(lambda0 - epsilon), minus a discretisation margin
            let lambda0 = 0.5 * (m.window.lo + m.window.hi);
            let floor = m.k.c0_bound.min(2.0) * (lambda0 - epsilon);
            art.metric("alpha_floor", floor);
            art.pass = rep.alpha_hat > 0.0 && rep.alpha_hat >= floor - MOURRE_MARGIN;
            art.report = to_json(&rep)?;
        }
        Pipeline::Lap { lambda, s, etas, probes } => {
            let l = assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
            let rep = lap_resolvent_sup(&l, *lambda, *s, etas, *probes, cfg.seed)?;
            art.metric("bound_hat", rep.bound_hat);
            art.metric("last_change", rep.last_change);
            art.metric("floor", rep.floor);
            art.curve("resolvent", "eta,weighted_norm", rep.etas.iter().zip(&rep.curve).map(|(e, v)| vec![*e, *v]));
            art.pass = rep.plateau;
            art.report = to_json(&rep)?;
        }
        Pipeline::Smoothness { weight, packet: p, t_max, degree } => {
            let l = assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
            let psi = m.cutoff.psi;
            let mut u = chebyshev_filter(&l, &packet(p, m.half, &m.cs)?, |x| psi.eval(x), *degree)?;
            u.normalize();
            let w = KatoWeight::new(*weight, &l, &m.k, &m.cs, &m.cutoff)?;
            let rep = kato_smoothness_integral(&l, &w, &u, *t_max, pick_dt(cfg, stable_dt(&[&l])))?;
            art.metric("plateau_ratio", rep.plateau_ratio);
            art.metric("bound_hat", rep.bound_hat);
            art.curve("integral", "t,integral", rep.integral_curve.iter().map(|&(t, v)| vec![t, v]));
            art.fields.push(("initial".into(), u));
            art.pass = rep.pass;
            art.report = to_json(&rep)?;
        }
        Pipeline::Radiation { epsilon, c_max, probes } => {
            let modes = m.cs.n_modes();
            let l = assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
            let mult = assemble_radiation_multiplier(&m.half, modes, &m.cutoff)?;
            let g0 = weight_g0(&m.half, modes, 1.0);
            let g1 = weight_g1(&m.half, modes, 1.0, &m.cutoff)?;
            let g2 = weight_g2(&m.half, &m.k, &m.cs, &m.cutoff);
            let rep =
                radiation_inequality_check(&l, &mult, &g0, &g1, &g2, m.k.c0_bound, *epsilon, *c_max, *probes, cfg.seed)?;
            art.metric("c_hat", rep.c_hat);
            art.metric("worst_margin", rep.worst_margin);
            art.curve("per_block", "block,c", rep.per_block.iter().enumerate().map(|(i, c)| vec![i as f64, *c]));
            art.pass = rep.pass;
            art.report = to_json(&rep)?;
        }
        Pipeline::Cook { reference, packet: p, t_max, tol, direction } => {
            let l = assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
            let (h0, ident, u) = match reference {
                CookReference::OneSpace => {
                    let l0 = assemble_l0(&m.half, &m.k, &m.cs)?;
                    let psi = m.cutoff.psi;
                    let mut u = chebyshev_filter(&l0, &packet(p, m.half, &m.cs)?, |x| psi.eval(x), 2000)?;
                    u.normalize();
                    (Dynamics::Crank(l0), Identifier::Identity, u)
                }
                CookReference::TwoSpace => {
                    let plan = FourierPlan::new(m.full)?;
                    let sign = if p.rho0 >= 0.0 { Sign::Plus } else { Sign::Minus };
                    let mut u = filter_reference(&plan, &packet(p, m.full, &m.cs)?, &m.cutoff.psi, sign)?;
                    u.normalize();
                    (Dynamics::FreeLattice(plan), Identifier::Embedding, u)
                }
            };
            let dt = pick_dt(cfg, stable_dt(&[&l]).min(0.5 * m.half.h() * m.half.h()));
            let opts = crate::scattering::CookOptions::new(*t_max, dt).with_tol(*tol).with_direction(*direction);
            let res = cook_wave_operator(&l, &h0, &ident, &u, &opts)?;
            cook_artifacts(&mut art, &res, &u)?;
        }
        Pipeline::ModifiedCook { packet: p, t_max, tol, direction, rho_cell } => {
            let l = assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
            let nu = phase_nu(m)?;
            let modifier = build_modifier(&m.full, &m.k, &m.coeffs, &m.cs, &m.cutoff, &m.window, *direction, nu, *rho_cell)?;
            let plan = FourierPlan::new(m.full)?;
            let sign = if p.rho0 >= 0.0 { Sign::Plus } else { Sign::Minus };
            let mut u = filter_reference(&plan, &packet(p, m.full, &m.cs)?, &m.cutoff.psi, sign)?;
            u.normalize();
            let dt = pick_dt(cfg, stable_dt(&[&l]).min(0.5 * m.half.h() * m.half.h()));
            let opts = crate::scattering::CookOptions::new(*t_max, dt).with_tol(*tol).with_direction(*direction);
            let res = modified_wave_operator(&l, &Dynamics::FreeLattice(plan), &modifier, &u, &opts)?;
            art.metric("nu", nu);
            cook_artifacts(&mut art, &res, &u)?;
        }
        Pipeline::Completeness { ensemble, r_init, t, degree, pass_mean } => {
            let l = assemble_l(&m.half, &m.k, &m.cs, &m.coeffs)?;
            let psi = m.cutoff.psi;
            let (lo, hi) = psi.support();
            let known = if m.half.n <= SCAN_LIMIT { Some(embedded_eigen_scan(&l, lo, hi)?) } else { None };
            let states = random_filtered_states(&l, &psi, *ensemble, 1.0, *r_init, cfg.seed, *degree)?;
            let r_escape = r_init + lo.max(0.0).sqrt() * t;
            let dt = pick_dt(cfg, stable_dt(&[&l]));
            let rep = completeness_probe(
                &l,
                &m.window,
                known.as_deref().unwrap_or(&[]),
                &states,
                *t,
                dt,
                r_escape,
                Sign::Plus,
            )?;
            art.metric("mean", rep.mean);
            art.curve("ratios", "member,ratio", rep.ratios.iter().enumerate().map(|(i, r)| vec![i as f64, *r]));
            art.pass = rep.mean >= *pass_mean;
            art.report = serde_json::json!({ "probe": to_json(&rep)?, "eigen_scan": to_json(&known)? });
        }
        Pipeline::Phase { lambda, rho, r_lo, r_hi, sign } => {
            let nu = phase_nu(m)?;
            let params = PhaseParams {
                lambda: *lambda,
                onset: m.cutoff.r,
                nu,
                window: m.window.momenta(),
                sign: *sign,
                dispersion: Dispersion::Continuum,
            };
            let phase = build_phase(&m.k, &m.coeffs, &params)?;
            let rep = remainder_report(&phase, *rho, *r_lo, *r_hi, 200)?;
            art.metric("slope_hat", rep.slope_hat);
            art.metric("epsilon_expected", rep.epsilon_expected);
            let rs: Vec<f64> =
                (0..200).map(|i| sign.value() * r_lo * (r_hi / r_lo).powf(i as f64 / 199.0)).collect();
            let mut csv = Vec::new();
            phase.write_csv(&mut csv, &rs, &[*rho])?;
            art.curves.push(("phase".into(), String::from_utf8_lossy(&csv).into_owned()));
            art.pass = (rep.slope_hat + 1.0 + rep.epsilon_expected).abs() <= 0.05;
            art.report = to_json(&rep)?;
        }
        Pipeline::Compose { lambda, radii, rho0, width } => {
            let study = composition_study(&m.k, &m.coeffs, *lambda, &m.cutoff, &m.window, &m.full, radii, *rho0, *width)?;
            art.curve("errors", "R,one_term,two_term", study.rows.iter().map(|r| vec![r.radius, r.one_term, r.two_term]));
            art.pass = study.two_beats_one();
            for (i, r) in study.rows.iter().enumerate() {
                art.metric(&format!("one_term_{i}"), r.one_term);
                art.metric(&format!("two_term_{i}"), r.two_term);
            }
            art.report = to_json(&study)?;
        }
    }
    Ok(art)
}

fn cook_artifacts(art: &mut Artifacts, res: &crate::scattering::CookResult, u: &WaveField) -> Result<()> {
    let s = res.summary(u);
    art.metric("t_used", s.t_used);
    art.metric("isometry_defect", isometry_defect(res, u));
    art.metric("norm_out", s.norm_out);
    if let Some(p) = s.exponent {
        art.metric("exponent", p);
    }
    if let Some(t) = s.tail_estimate {
        art.metric("tail_estimate", t);
    }
    art.curve("integrand", "t,integrand", res.integrand_samples.iter().map(|&(t, v)| vec![t, v]));
    art.fields.push(("w".into(), res.w.clone()));
    art.pass = res.converged;
    art.report = to_json(&s)?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionRow {
    pub radius: f64,
    pub one_term: f64,
    pub two_term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionStudy {
    pub rows: Vec<CompositionRow>,
}

impl CompositionStudy {
    pub fn two_beats_one(&self) -> bool {
        self.rows.iter().all(|r| r.two_term < r.one_term)
    }

    /// Factor by which two_term/one_term improves per radius step.
    pub fn gap_gains(&self) -> Vec<f64> {
        self.rows
            .windows(2)
            .map(|w| (w[0].two_term / w[0].one_term) / (w[1].two_term / w[1].one_term))
            .collect()
    }
}

/// Errors of the one- and two-term expansions of b(x, D) J(Phi, a) with
/// b = rho^2 + lambda k and a = psi(rho^2) sigma^+ (1 + <r>^{-1/2}), on
/// packets centred at 2R for each radius R.
#[allow(clippy::too_many_arguments)]
pub fn composition_study(
    k: &ScalingFunction,
    coeffs: &PerturbationCoeffs,
    lambda: f64,
    cutoff: &CutoffSpec,
    window: &SpectralWindow,
    full: &Grid1D,
    radii: &[f64],
    rho0: f64,
    width: f64,
) -> Result<CompositionStudy> {
    let nu = coeffs
        .decay_class(k)
        .phase_nu()
        .ok_or_else(|| Error::ConfigInvalid("scaling function has no decay index".into()))?;
    let params = PhaseParams {
        lambda,
        onset: cutoff.r,
        nu,
        window: window.momenta(),
        sign: Sign::Plus,
        dispersion: Dispersion::Continuum,
    };
    let phase = Arc::new(build_phase(k, coeffs, &params)?);
    let psi = cutoff.psi;
    let (e_lo, e_hi) = psi.support();
    let support = vec![(e_lo.max(0.0).sqrt(), e_hi.sqrt())];
    let sym = Symbol::general(0.0, support, move |r, rho| {
        C::new(psi.eval(rho * rho) * sigma(Sign::Plus, r, rho, 0.01) * (1.0 + (1.0 + r * r).powf(-0.25)), 0.0)
    })
    // the jump of sigma at r = 0 is kept out of the derivative
    .with_dr(move |r, rho| {
        C::new(psi.eval(rho * rho) * sigma(Sign::Plus, r, rho, 0.01) * -0.5 * r * (1.0 + r * r).powf(-1.25), 0.0)
    });
    let op = OscillatingOp::new(Some(phase), sym)?;
    let b = RhoPoly::channel(k, lambda, coeffs);
    let plan = FourierPlan::new(*full)?;
    let mut rows = Vec::with_capacity(radii.len());
    for &radius in radii {
        let u = make_packet(2.0 * radius, rho0, width, *full, &[C::new(1.0, 0.0)])?;
        let (one_term, two_term) = composition_errors(&b, &op, &plan, &u)?;
        rows.push(CompositionRow { radius, one_term, two_term });
    }
    Ok(CompositionStudy { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub key: String,
    pub a: f64,
    pub b: f64,
    pub rel: f64,
    pub tol: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffReport {
    pub kind: String,
    /// Metrics whose values differ; identical runs give an empty list.
    pub entries: Vec<DiffEntry>,
}

impl DiffReport {
    pub fn all_within(&self) -> bool {
        self.entries.iter().all(|e| e.within)
    }
}

/// Relative tolerance for a metric in refinement comparisons.
pub fn metric_tolerance(key: &str) -> f64 {
    match key {
        "alpha_hat" => 0.1,
        "violated_dim" | "window_dim" => f64::INFINITY,
        "bound_hat" | "c_hat" | "plateau_ratio" => 0.1,
        "isometry_defect" | "worst_margin" | "tail_estimate" => f64::INFINITY,
        _ => 1e-9,
    }
}

fn load_summary(dir: &Path) -> Result<Summary> {
    let text = std::fs::read_to_string(dir.join("summary.json"))?;
    serde_json::from_str(&text).map_err(|e| Error::SchemaDrift(format!("{}: {e}", dir.display())))
}

pub fn compare_runs(dir_a: &Path, dir_b: &Path) -> Result<DiffReport> {
    let a = load_summary(dir_a)?;
    let b = load_summary(dir_b)?;
    if a.kind != b.kind {
        return Err(Error::SchemaDrift(format!("{} vs {}", a.kind, b.kind)));
    }
    let keys_a: Vec<&String> = a.metrics.keys().collect();
    let keys_b: Vec<&String> = b.metrics.keys().collect();
    if keys_a != keys_b {
        return Err(Error::SchemaDrift(format!("metric keys {keys_a:?} vs {keys_b:?}")));
    }
    let mut entries = Vec::new();
    for (key, &va) in &a.metrics {
        let vb = b.metrics[key];
        if va.to_bits() == vb.to_bits() {
            continue;
        }
        let scale = va.abs().max(vb.abs());
        let rel = if scale > 0.0 { (va - vb).abs() / scale } else { 0.0 };
        let tol = metric_tolerance(key);
        entries.push(DiffEntry { key: key.clone(), a: va, b: vb, rel, tol, within: rel <= tol });
    }
    Ok(DiffReport { kind: a.kind, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(pipeline: &str, window: &str) -> ScenarioConfig {
        ScenarioConfig::from_json(&format!(
            r#"{{
                "k": {{"kind": "power", "alpha": 1.0}},
                "cross_section": {{"modes": 0}},
                "cutoff_R": 2.0,
                "window": {window},
                "grid": {{"h": 0.25, "n": 200}},
                "pipeline": {pipeline}
            }}"#
        ))
        .unwrap()
    }

    #[test]
    fn trivial_validate_passes() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_config(&cfg(r#"{"kind": "validate"}"#, "[0.5, 1.5]"), dir.path());
        assert_eq!(exit_code(&r), 0);
        let out = r.unwrap();
        assert!((out.summary.metrics["c0_hat"] - 1.0).abs() < 1e-6);
        assert!(out.dir.join("summary.json").exists());
        assert_eq!(out.summary.version, VERSION);
    }

    #[test]
    fn mourre_below_threshold_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let r = run_config(&cfg(r#"{"kind": "mourre", "epsilon": 0.1}"#, "[-1.0, 0.0]"), dir.path());
        assert_eq!(exit_code(&r), 1);
        assert_eq!(r.unwrap_err().code(), "spectral_diagnostics.WindowTouchesThreshold");
    }

    #[test]
    fn compare_identical_and_drift() {
        let dir = tempfile::tempdir().unwrap();
        let c = cfg(r#"{"kind": "mourre", "epsilon": 0.1}"#, "[0.5, 1.5]");
        let a = run_config(&c, dir.path()).unwrap();
        let b = run_config(&c, dir.path()).unwrap();
        assert_ne!(a.dir, b.dir);
        let d = compare_runs(&a.dir, &b.dir).unwrap();
        assert!(d.entries.is_empty(), "{d:?}");
        // same seed, same config: curves are bit-identical
        let ca = std::fs::read(a.dir.join("curves/lowest.csv")).unwrap();
        let cb = std::fs::read(b.dir.join("curves/lowest.csv")).unwrap();
        assert_eq!(ca, cb);
        let v = run_config(&cfg(r#"{"kind": "validate"}"#, "[0.5, 1.5]"), dir.path()).unwrap();
        assert_eq!(compare_runs(&a.dir, &v.dir).unwrap_err().code(), "cli_runner.SchemaDrift");
    }
}
