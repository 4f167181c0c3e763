//! Finite-matrix surrogates for the spectral estimates: eigenvalue scan,
//! Mourre positivity, weighted resolvent bounds, Kato-smoothness integrals and
//! the radiation inequality.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assemble::{weight_g0, weight_g1, weight_g2};
use crate::banded::BandedLu;
use crate::eigen::{apply_to_columns, block_indices, dense_eigenvalues, hermitian_eigen, submatrix, MAX_DENSE_DIM};
use crate::error::{Error, Result};
use crate::grid::WaveField;
use crate::model::{bracket, CrossSection, CutoffSpec, ScalingFunction, SpectralWindow};
use crate::propagator::{step_plan, Propagator};
use crate::sparse::DiscreteOperator;

type C = Complex64;

/// Eigenvalue found by the scan with its localisation radius <r>.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenCandidate {
    pub value: f64,
    /// Angular number of the channel, when the operator is mode-diagonal.
    pub mode: Option<i64>,
    pub radius: f64,
    pub localized: bool,
}

/// Radius below which an eigenvector counts as localised, as a fraction of
/// the box length.
pub const LOCALIZED_FRACTION: f64 = 0.2;

pub fn embedded_eigen_scan(l: &DiscreteOperator, lo: f64, hi: f64) -> Result<Vec<EigenCandidate>> {
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidModel(format!("scan window [{lo}, {hi}]")));
    }
    let grid = l.grid;
    let cutoff = (l.modes as i64 - 1) / 2;
    let mut out = Vec::new();
    for b in hermitian_eigen(l)? {
        for (c, &v) in b.values.iter().enumerate() {
            if v < lo || v > hi {
                continue;
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for (k, &g) in b.indices.iter().enumerate() {
                let w = b.vectors[(k, c)].norm_sqr();
                num += grid.r(g / l.modes).abs() * w;
                den += w;
            }
            let radius = num / den;
            out.push(EigenCandidate {
                value: v,
                mode: b.mode.map(|j| j as i64 - cutoff),
                radius,
                localized: radius < LOCALIZED_FRACTION * (grid.r_max - grid.r_min),
            });
        }
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// Error if a localised eigenvalue lies in the window.
pub fn require_clear(window: &SpectralWindow, found: &[EigenCandidate]) -> Result<()> {
    match found.iter().find(|e| e.localized && window.contains(e.value)) {
        Some(e) => Err(Error::WindowHitsEigenvalue(e.value)),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MourreReport {
    pub alpha_hat: f64,
    pub violated_dim: usize,
    /// Dimension of the spectral subspace of the window.
    pub window_dim: usize,
    /// Lowest eigenvalues of the compressed commutator.
    pub lowest: Vec<f64>,
}

/// Spectrum of i[L, A] compressed to the spectral subspace of L in the window.
/// alpha_hat is the largest value exceeded by all but `budget` eigenvalues;
/// violated_dim counts eigenvalues below `epsilon`.
pub fn mourre_form_check(
    l: &DiscreteOperator,
    a: &DiscreteOperator,
    window: &SpectralWindow,
    epsilon: f64,
    budget: usize,
) -> Result<MourreReport> {
    window.require_positive()?;
    let comm = l.commutator_i(a)?;
    let blocks = hermitian_eigen(l)?;
    let mut eigs: Vec<f64> = blocks
        .par_iter()
        .flat_map_iter(|b| {
            let sel: Vec<usize> = (0..b.values.len()).filter(|&c| window.contains(b.values[c])).collect();
            if sel.is_empty() {
                return Vec::new().into_iter();
            }
            let v = b.vectors.select_columns(&sel);
            let cv = apply_to_columns(&comm, &b.indices, &v);
            let m = v.adjoint() * cv;
            let m = (&m + m.adjoint()) * C::new(0.5, 0.0);
            dense_eigenvalues(m).into_iter()
        })
        .collect();
    eigs.sort_by(f64::total_cmp);
    if eigs.is_empty() {
        return Err(Error::InvalidModel("no eigenvalues of L in the window".into()));
    }
    let alpha_hat = eigs[budget.min(eigs.len() - 1)];
    let violated_dim = eigs.iter().filter(|&&e| e < epsilon).count();
    Ok(MourreReport {
        alpha_hat,
        violated_dim,
        window_dim: eigs.len(),
        lowest: eigs.iter().take(20).copied().collect(),
    })
}

/// max |entry| of i[i[L, A], A], finite on any grid.
pub fn double_commutator_norm(l: &DiscreteOperator, a: &DiscreteOperator) -> Result<f64> {
    Ok(l.commutator_i(a)?.commutator_i(a)?.max_abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LapReport {
    pub lambda: f64,
    pub s: f64,
    pub etas: Vec<f64>,
    pub curve: Vec<f64>,
    pub bound_hat: f64,
    pub floor: f64,
    /// Relative change between the last two eta values.
    pub last_change: f64,
    pub plateau: bool,
}

/// Smallest eta resolvable on the box: three level spacings at lambda.
pub fn resolution_floor(l: &DiscreteOperator, lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let len = l.grid.r_max - l.grid.r_min;
    3.0 * 2.0 * std::f64::consts::PI * lambda.sqrt() / len
}

pub const LAP_PLATEAU: f64 = 0.1;

/// ||<r>^-s (L - lambda - i eta)^-1 <r>^-s|| for each eta by power iteration.
pub fn lap_resolvent_sup(
    l: &DiscreteOperator,
    lambda: f64,
    s: f64,
    etas: &[f64],
    probes: usize,
    seed: u64,
) -> Result<LapReport> {
    let floor = resolution_floor(l, lambda);
    if let Some(&eta) = etas.iter().find(|&&e| e < floor) {
        return Err(Error::ResolutionFloor { eta, floor });
    }
    let grid = l.grid;
    let n = l.dim();
    let w: Vec<f64> = (0..n)
        .map(|i| {
            let g = i / l.modes;
            if grid.pinned(g) {
                0.0
            } else {
                bracket(grid.r(g)).powf(-s)
            }
        })
        .collect();
    let curve = etas
        .iter()
        .map(|&eta| {
            let z = C::new(lambda, eta);
            let fwd = BandedLu::factor_shifted(l, -z, C::new(1.0, 0.0))?;
            let bwd = BandedLu::factor_shifted(l, -z.conj(), C::new(1.0, 0.0))?;
            let mut best: f64 = 0.0;
            for p in 0..probes.max(1) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(p as u64));
                let mut x: Vec<C> = (0..n).map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
                let mut est = 0.0;
                for _ in 0..500 {
                    for (xi, wi) in x.iter_mut().zip(&w) {
                        *xi *= wi;
                    }
                    fwd.solve_in_place(&mut x);
                    for (xi, wi) in x.iter_mut().zip(&w) {
                        *xi *= wi * wi;
                    }
                    bwd.solve_in_place(&mut x);
                    for (xi, wi) in x.iter_mut().zip(&w) {
                        *xi *= wi;
                    }
                    let nrm = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                    if nrm == 0.0 {
                        break;
                    }
                    for xi in x.iter_mut() {
                        *xi /= nrm;
                    }
                    let done = (nrm - est).abs() <= 1e-10 * nrm;
                    est = nrm;
                    if done {
                        break;
                    }
                }
                best = best.max(est.sqrt());
            }
            Ok(best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let bound_hat = curve.iter().copied().fold(0.0, f64::max);
    let last_change = match curve.len() {
        0 | 1 => 0.0,
        k => ((curve[k - 1] - curve[k - 2]) / curve[k - 2]).abs(),
    };
    Ok(LapReport {
        lambda,
        s,
        etas: etas.to_vec(),
        curve,
        bound_hat,
        floor,
        last_change,
        plateau: last_change < LAP_PLATEAU,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GKind {
    G0 { s: f64 },
    G1 { s: f64 },
    G2,
}

/// A Kato weight with its assembled operator.
#[derive(Clone, Debug)]
pub struct KatoWeight {
    pub kind: GKind,
    pub op: DiscreteOperator,
}

impl KatoWeight {
    pub fn new(kind: GKind, l: &DiscreteOperator, k: &ScalingFunction, cs: &CrossSection, cutoff: &CutoffSpec) -> Result<Self> {
        let op = match kind {
            GKind::G0 { s } => weight_g0(&l.grid, l.modes, s),
            GKind::G1 { s } => weight_g1(&l.grid, l.modes, s, cutoff)?,
            GKind::G2 => weight_g2(&l.grid, k, cs, cutoff),
        };
        if op.dim() != l.dim() {
            return Err(Error::DimensionMismatch(op.dim(), l.dim()));
        }
        Ok(KatoWeight { kind, op })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    pub g_kind: GKind,
    /// (T, int_0^T ||G e^{-itL} u||^2 dt) at doubling checkpoints.
    pub integral_curve: Vec<(f64, f64)>,
    pub plateau_ratio: f64,
    pub bound_hat: f64,
    pub pass: bool,
}

pub const KATO_PLATEAU: f64 = 0.01;

/// Trapezoidal integral of ||G e^{-itL} u||^2 over [0, t_max].
pub fn kato_smoothness_integral(
    l: &DiscreteOperator,
    weight: &KatoWeight,
    u: &WaveField,
    t_max: f64,
    dt: f64,
) -> Result<SmoothnessReport> {
    let (steps, step) = step_plan(t_max, dt);
    let prop = Propagator::new(l, step)?;
    let checkpoints: Vec<usize> = (0..8).rev().map(|j| steps >> j).filter(|&s| s > 0).collect();
    let g2 = |v: &WaveField| -> Result<f64> { Ok(weight.op.apply(v)?.norm_sqr()) };
    let mut prev = g2(u)?;
    let mut acc = 0.0;
    let mut curve = Vec::new();
    prop.run(u, steps, |s, v| {
        let cur = g2(v)?;
        acc += 0.5 * step * (prev + cur);
        prev = cur;
        if checkpoints.contains(&s) && curve.last().map(|&(t, _)| t) != Some(s as f64 * step) {
            curve.push((s as f64 * step, acc));
        }
        Ok(())
    })?;
    let norm = u.norm_sqr();
    let plateau_ratio = match curve.len() {
        0 | 1 => 1.0,
        k => {
            let (a, b) = (curve[k - 2].1, curve[k - 1].1);
            if b == 0.0 {
                0.0
            } else {
                (b - a) / b
            }
        }
    };
    let bound_hat = curve.last().map(|c| c.1).unwrap_or(0.0) / norm;
    Ok(SmoothnessReport {
        g_kind: weight.kind,
        integral_curve: curve,
        plateau_ratio,
        bound_hat,
        pass: plateau_ratio < KATO_PLATEAU,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiationReport {
    /// Smallest C certifying the inequality, over all blocks.
    pub c_hat: f64,
    pub per_block: Vec<f64>,
    /// Largest value of the form with C = c_hat, relative to ||base||.
    pub worst_margin: f64,
    pub pass: bool,
}

pub const RADIATION_TOL: f64 = 1e-8;

/// Interior points dropped at the far wall.
const WALL_DROP: usize = 3;

/// Smallest C with (c0 - eps) G2*G2 - i[L, M] - C (G0*G0 + G1*G1) <= 0 on
/// each block, found as the top generalised eigenvalue.
#[allow(clippy::too_many_arguments)]
pub fn radiation_inequality_check(
    l: &DiscreteOperator,
    m_op: &DiscreteOperator,
    g0: &DiscreteOperator,
    g1: &DiscreteOperator,
    g2: &DiscreteOperator,
    c0: f64,
    epsilon: f64,
    c_max: f64,
    probes: usize,
    seed: u64,
) -> Result<RadiationReport> {
    let comm = l.commutator_i(m_op)?;
    let g2sq = g2.adjoint().mul(g2)?;
    let base = g2sq.scale(C::new(c0 - epsilon, 0.0)).sub(&comm)?;
    let s = g0.adjoint().mul(g0)?.add(&g1.adjoint().mul(g1)?)?;
    let grid = l.grid;
    let keep = |g: usize| {
        let i = g / l.modes;
        !grid.is_half_line() || i + 1 + WALL_DROP < grid.n
    };
    let blocks: Vec<Vec<usize>> = block_indices(l)
        .into_iter()
        .map(|(_, idx)| idx.into_iter().filter(|&g| keep(g)).collect())
        .collect();
    if let Some(b) = blocks.iter().find(|b| b.len() > MAX_DENSE_DIM) {
        return Err(Error::TooLarge(b.len()));
    }
    let results = blocks
        .par_iter()
        .enumerate()
        .map(|(bi, idx)| {
            let b = submatrix(&base, idx);
            let sm = submatrix(&s, idx);
            let bnorm = dense_eigenvalues(b.clone()).iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if bnorm == 0.0 {
                return Ok((0.0, 0.0));
            }
            let chol = sm
                .clone()
                .cholesky()
                .ok_or_else(|| Error::SolverFail("weight form not positive definite".into()))?;
            let lo = chol.l();
            let x = lo.solve_lower_triangular(&b).ok_or_else(|| Error::SolverFail("triangular solve".into()))?;
            let y = lo
                .solve_lower_triangular(&x.adjoint())
                .ok_or_else(|| Error::SolverFail("triangular solve".into()))?;
            let y = (&y + y.adjoint()) * C::new(0.5, 0.0);
            let top = dense_eigenvalues(y).last().copied().unwrap_or(0.0);
            let c = top.max(0.0);
            if c > c_max {
                return Err(Error::NoFiniteC(c));
            }
            let diff: DMatrix<C> = &b - &sm * C::new(c, 0.0);
            let mut worst = dense_eigenvalues(diff.clone()).last().copied().unwrap_or(0.0) / bnorm;
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(bi as u64));
            for _ in 0..probes {
                let v = DMatrix::from_fn(idx.len(), 1, |_, _| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
                let q = (v.adjoint() * &diff * &v)[(0, 0)].re / v.norm_squared();
                worst = worst.max(q / bnorm);
            }
            Ok((c, worst))
        })
        .collect::<Result<Vec<(f64, f64)>>>()?;
    let per_block: Vec<f64> = results.iter().map(|r| r.0).collect();
    let c_hat = per_block.iter().copied().fold(0.0, f64::max);
    let worst_margin = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(RadiationReport { c_hat, per_block, worst_margin, pass: worst_margin <= RADIATION_TOL })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assemble::{assemble_a, assemble_l, assemble_l0, assemble_radiation_multiplier};
    use crate::grid::Grid1D;
    use crate::model::{Bump, CoeffName, Coefficient, PerturbationCoeffs};
    use crate::propagator::{chebyshev_filter, make_packet};

    fn cut(r: f64) -> CutoffSpec {
        CutoffSpec::new(r, Bump::new(0.8, 1.2, 0.1))
    }

    #[test]
    fn free_scan_has_no_localized_states() {
        for n in [200, 400] {
            let g = Grid1D::half_line_h(0.25, n);
            let l = assemble_l0(&g, &ScalingFunction::power(1.0), &CrossSection::new(1)).unwrap();
            let found = embedded_eigen_scan(&l, 0.5, 1.5).unwrap();
            assert!(!found.is_empty());
            assert!(found.iter().all(|e| !e.localized));
        }
    }

    #[test]
    fn well_has_bound_state() {
        let g = Grid1D::half_line_h(0.1, 400);
        let v = PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, -30.0, 3.0));
        let l = assemble_l(&g, &ScalingFunction::power(1.0), &CrossSection::new(0), &v).unwrap();
        let found = embedded_eigen_scan(&l, -20.0, 0.0).unwrap();
        assert!(found.iter().any(|e| e.localized && e.value < 0.0));
        let w = SpectralWindow::new(found[0].value - 0.1, found[0].value + 0.1);
        assert_eq!(require_clear(&w, &found).unwrap_err().code(), "spectral_diagnostics.WindowHitsEigenvalue");
    }

    #[test]
    fn mourre_small_grid() {
        let g = Grid1D::half_line_h(0.25, 400);
        let l = assemble_l0(&g, &ScalingFunction::power(1.0), &CrossSection::new(1)).unwrap();
        let a = assemble_a(&g, 3, &cut(2.0)).unwrap();
        let rep = mourre_form_check(&l, &a, &SpectralWindow::centered(1.0, 0.1), 0.1, 10).unwrap();
        assert!(rep.alpha_hat >= 0.85, "{rep:?}");
        assert!(rep.violated_dim <= 10);
        let e = mourre_form_check(&l, &a, &SpectralWindow::new(-1.0, 0.5), 0.1, 10).unwrap_err();
        assert_eq!(e.code(), "spectral_diagnostics.WindowTouchesThreshold");
        assert!(double_commutator_norm(&l, &a).unwrap().is_finite());
    }

    #[test]
    fn lap_negative_energy_is_trivial() {
        let g = Grid1D::half_line_h(0.25, 800);
        let l = assemble_l0(&g, &ScalingFunction::power(1.0), &CrossSection::new(0)).unwrap();
        let rep = lap_resolvent_sup(&l, -1.0, 1.0, &[0.1, 0.01], 1, 7).unwrap();
        // dist(-1, spec) >= 1 and the weights are at most 1
        assert!(rep.bound_hat <= 1.0 + 1e-6);
        let e = lap_resolvent_sup(&l, 1.0, 1.0, &[1e-4], 1, 7).unwrap_err();
        assert_eq!(e.code(), "spectral_diagnostics.ResolutionFloor");
    }

    #[test]
    fn kato_trivial_cases() {
        let g = Grid1D::half_line_h(0.25, 400);
        let k = ScalingFunction::power(1.0);
        let cs = CrossSection::new(1);
        let l = assemble_l0(&g, &k, &cs).unwrap();
        let w = KatoWeight::new(GKind::G2, &l, &k, &cs, &cut(2.0)).unwrap();
        let u = make_packet(40.0, 1.0, 4.0, g, &[C::default(), C::new(1.0, 0.0), C::default()]).unwrap();
        let rep = kato_smoothness_integral(&l, &w, &u, 5.0, 0.005).unwrap();
        assert_eq!(rep.bound_hat, 0.0);
        assert!(rep.pass);
        // a bound state accumulates linearly
        let well = PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, -30.0, 3.0));
        let l = assemble_l(&g, &k, &cs, &well).unwrap();
        let b = &hermitian_eigen(&l).unwrap()[1];
        let v = WaveField::from_values(g, 3, b.global_vector(0, l.dim())).unwrap();
        let w0 = KatoWeight::new(GKind::G0 { s: 1.0 }, &l, &k, &cs, &cut(2.0)).unwrap();
        let rep = kato_smoothness_integral(&l, &w0, &v, 8.0, 0.005).unwrap();
        assert!(!rep.pass);
        assert!((rep.plateau_ratio - 0.5).abs() < 1e-3);
        let inc = rep.integral_curve.windows(2).all(|p| p[1].1 >= p[0].1);
        assert!(inc);
    }

    #[test]
    fn kato_free_packet_plateaus() {
        let g = Grid1D::half_line_h(0.25, 4001);
        let k = ScalingFunction::power(1.5);
        let cs = CrossSection::new(0);
        let l = assemble_l0(&g, &k, &cs).unwrap();
        let psi = Bump::new(3.0, 5.0, 0.5);
        let u = make_packet(12.0, 2.0, 1.5, g, &[C::new(1.0, 0.0)]).unwrap();
        let mut u = chebyshev_filter(&l, &u, |x| psi.eval(x), 2000).unwrap();
        u.normalize();
        let w = KatoWeight::new(GKind::G0 { s: 1.0 }, &l, &k, &cs, &cut(2.0)).unwrap();
        let rep = kato_smoothness_integral(&l, &w, &u, 100.0, 0.0075).unwrap();
        // the last-doubling increment falls like r0 / (v T)
        assert!(rep.plateau_ratio < 0.05, "{rep:?}");
        let c = &rep.integral_curve;
        let r1 = (c[c.len() - 2].1 - c[c.len() - 3].1) / c[c.len() - 2].1;
        assert!(rep.plateau_ratio < r1);
    }

    #[test]
    fn radiation_free() {
        let g = Grid1D::half_line_h(0.2, 400);
        let k = ScalingFunction::power(1.0);
        let cs = CrossSection::new(1);
        let c = cut(2.0);
        let l = assemble_l0(&g, &k, &cs).unwrap();
        let m = assemble_radiation_multiplier(&g, 3, &c).unwrap();
        let g0 = weight_g0(&g, 3, 1.0);
        let g1 = weight_g1(&g, 3, 1.0, &c).unwrap();
        let g2 = weight_g2(&g, &k, &cs, &c);
        let rep = radiation_inequality_check(&l, &m, &g0, &g1, &g2, 1.0, 0.5, 1e3, 4, 1).unwrap();
        assert!(rep.c_hat > 0.0 && rep.c_hat < 1e3);
        assert!(rep.pass, "{rep:?}");
        // eps >= c0: the left side is nonpositive in G2
        let rep2 = radiation_inequality_check(&l, &m, &g0, &g1, &g2, 1.0, 1.0, 1e3, 4, 1).unwrap();
        assert!(rep2.pass);
        let e = radiation_inequality_check(&l, &m, &g0, &g1, &g2, 1.0, 0.5, 1e-3, 0, 1).unwrap_err();
        assert_eq!(e.code(), "spectral_diagnostics.NoFiniteC");
    }
}
