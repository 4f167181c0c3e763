//! Wave operators by Cook's method: one-space W(L, L0), two-space
//! W(L, H0; J) and the modified W(L, H0; J J±), with isometry, chain-rule
//! and completeness diagnostics.
//!
//! All time evolutions run on the same fixed step. Crank-Nicolson with step
//! dt is exactly e^{-it f(H)} with f(x) = (2/dt) atan(x dt / 2), so the free
//! lattice flow is evaluated through the same f; the invariance principle
//! makes the wave operators of the f-dynamics those of the true ones.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierPlan;
use crate::grid::{DomainKind, Grid1D, WaveField};
use crate::model::{chi, Bump, CrossSection, CutoffSpec, PerturbationCoeffs, ScalingFunction, SpectralWindow};
use crate::pdo::{build_channel_identifier, ChannelIdentifier};
use crate::phase::{build_phase, fit_loglog, Dispersion, PhaseParams, Sign};
use crate::propagator::{chebyshev_filter, Propagator, GUARD_CELLS, LEAK_TOL};
use crate::sparse::DiscreteOperator;
use crate::spectral::{require_clear, EigenCandidate};

type C = Complex64;

/// Number of geometric time samples of the Cook integrand.
pub const COOK_SAMPLES: usize = 40;
/// Default tail tolerance, relative to ||u||.
pub const COOK_TOL: f64 = 1e-3;

fn same_spacing(a: &Grid1D, b: &Grid1D) -> bool {
    (a.h() - b.h()).abs() <= 1e-12 * a.h()
}

/// Half-line grid sharing the spacing and the r >= 0 samples of a full-line grid.
pub fn half_line_partner(full: &Grid1D) -> Result<Grid1D> {
    if full.kind != DomainKind::FullLinePeriodic {
        return Err(Error::GridMismatch("expected a full-line grid".into()));
    }
    Ok(Grid1D::half_line_h(full.h(), full.n / 2))
}

fn check_pair(full: &Grid1D, half: &Grid1D) -> Result<()> {
    if full.kind != DomainKind::FullLinePeriodic || half.kind != DomainKind::HalfLineDirichlet {
        return Err(Error::GridMismatch("identifier maps a full-line grid to a half-line grid".into()));
    }
    if !same_spacing(full, half) || half.n > full.n - full.n / 2 {
        return Err(Error::GridMismatch(format!(
            "full line h = {}, n = {}; half line h = {}, n = {}",
            full.h(),
            full.n,
            half.h(),
            half.n
        )));
    }
    Ok(())
}

/// (J u)(r) = chi(r) u(r) on the half line; samples at r <= 0 are dropped.
pub fn apply_identifier(u: &WaveField, half: &Grid1D) -> Result<WaveField> {
    check_pair(&u.grid, half)?;
    let off = u.grid.n / 2;
    let mut out = WaveField::zeros(*half, u.modes);
    for i in 0..half.n {
        if half.pinned(i) {
            continue;
        }
        let c = chi(half.r(i));
        for j in 0..u.modes {
            out.set(i, j, u.at(off + i, j) * c);
        }
    }
    Ok(out)
}

/// J^* v: multiply by chi and extend by zero to the full line.
pub fn apply_identifier_adjoint(v: &WaveField, full: &Grid1D) -> Result<WaveField> {
    check_pair(full, &v.grid)?;
    let off = full.n / 2;
    let mut out = WaveField::zeros(*full, v.modes);
    for i in 0..v.grid.n {
        if v.grid.pinned(i) {
            continue;
        }
        let c = chi(v.grid.r(i));
        for j in 0..v.modes {
            out.set(off + i, j, v.at(i, j) * c);
        }
    }
    Ok(out)
}

fn column_field(u: &WaveField, j: usize) -> WaveField {
    WaveField { grid: u.grid, modes: 1, values: u.mode_column(j) }
}

fn from_columns(grid: Grid1D, cols: Vec<WaveField>) -> WaveField {
    let mut out = WaveField::zeros(grid, cols.len());
    for (j, c) in cols.iter().enumerate() {
        out.set_mode_column(j, &c.values);
    }
    out
}

/// E_psi(H0) restricted to H_f^+ or H_f^-: the lattice energy bump times
/// the momentum sign projection.
pub fn filter_reference(plan: &FourierPlan, u: &WaveField, psi: &Bump, sign: Sign) -> Result<WaveField> {
    let d = Dispersion::Lattice { h: plan.grid().h() };
    plan.multiplier(u, |_, rho| {
        let keep = match sign {
            Sign::Plus => rho > 0.0,
            Sign::Minus => rho < 0.0,
        };
        C::new(if keep { psi.eval(d.s(rho)) } else { 0.0 }, 0.0)
    })
}

/// Identification between the reference space and the scattering space.
#[derive(Clone)]
pub enum Identifier {
    /// One-space case: both dynamics live on the same grid.
    Identity,
    /// J = chi(r) restricted to the half line.
    Embedding,
    /// J J± with one channel identifier per mode column.
    Modified { plan: FourierPlan, channels: Vec<ChannelIdentifier>, sign: Sign },
}

impl std::fmt::Debug for Identifier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Identifier::Identity => write!(f, "Identity"),
            Identifier::Embedding => write!(f, "Embedding"),
            Identifier::Modified { channels, sign, .. } => {
                write!(f, "Modified {{ channels: {}, sign: {sign:?} }}", channels.len())
            }
        }
    }
}

impl Identifier {
    /// Map a reference field onto `target`.
    pub fn apply(&self, u: &WaveField, target: &Grid1D) -> Result<WaveField> {
        match self {
            Identifier::Identity => {
                if u.grid != *target {
                    return Err(Error::GridMismatch("identity identifier between different grids".into()));
                }
                Ok(u.clone())
            }
            Identifier::Embedding => apply_identifier(u, target),
            Identifier::Modified { plan, channels, .. } => {
                if channels.len() != u.modes {
                    return Err(Error::DimensionMismatch(channels.len(), u.modes));
                }
                let cols = (0..u.modes)
                    .into_par_iter()
                    .map(|j| channels[j].apply(plan, &column_field(u, j)))
                    .collect::<Result<Vec<_>>>()?;
                apply_identifier(&from_columns(u.grid, cols), target)
            }
        }
    }

    /// Adjoint map from the scattering space back to `source`.
    pub fn adjoint(&self, v: &WaveField, source: &Grid1D) -> Result<WaveField> {
        match self {
            Identifier::Identity => Ok(v.clone()),
            Identifier::Embedding => apply_identifier_adjoint(v, source),
            Identifier::Modified { plan, channels, .. } => {
                if channels.len() != v.modes {
                    return Err(Error::DimensionMismatch(channels.len(), v.modes));
                }
                let jv = apply_identifier_adjoint(v, source)?;
                let cols = (0..v.modes)
                    .into_par_iter()
                    .map(|j| channels[j].adjoint(plan, &column_field(&jv, j)))
                    .collect::<Result<Vec<_>>>()?;
                Ok(from_columns(*source, cols))
            }
        }
    }
}

/// Channel identifiers for every mode of the cross-section. Phases are built
/// once per distinct channel eigenvalue and shared between m and -m.
#[allow(clippy::too_many_arguments)]
pub fn build_modifier(
    full: &Grid1D,
    k: &ScalingFunction,
    coeffs: &PerturbationCoeffs,
    cs: &CrossSection,
    cutoffs: &CutoffSpec,
    window: &SpectralWindow,
    sign: Sign,
    nu: f64,
    rho_cell: f64,
) -> Result<Identifier> {
    let plan = FourierPlan::new(*full)?;
    let mut cache: HashMap<u64, ChannelIdentifier> = HashMap::new();
    let mut channels = Vec::with_capacity(cs.n_modes());
    for j in 0..cs.n_modes() {
        let lambda = cs.eigenvalue(cs.mode(j));
        let key = lambda.to_bits();
        if let Some(c) = cache.get(&key) {
            channels.push(c.clone());
            continue;
        }
        let phase = if lambda == 0.0 && !coeffs.has_a1l() {
            None
        } else {
            let params = PhaseParams {
                lambda,
                onset: cutoffs.r,
                nu,
                window: window.momenta(),
                sign,
                dispersion: Dispersion::Lattice { h: full.h() },
            };
            Some(Arc::new(build_phase(k, coeffs, &params)?))
        };
        let c = build_channel_identifier(phase, cutoffs, window, sign, rho_cell)?;
        cache.insert(key, c.clone());
        channels.push(c);
    }
    Ok(Identifier::Modified { plan, channels, sign })
}

/// A unitary group together with its generator.
#[derive(Clone)]
pub enum Dynamics {
    /// Crank-Nicolson for a sparse operator.
    Crank(DiscreteOperator),
    /// Lattice Laplacian on a full-line grid, exact in momentum.
    FreeLattice(FourierPlan),
}

impl std::fmt::Debug for Dynamics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Dynamics::Crank(op) => write!(f, "Crank({} x {})", op.grid.n, op.modes),
            Dynamics::FreeLattice(p) => write!(f, "FreeLattice({})", p.grid().n),
        }
    }
}

impl Dynamics {
    pub fn free(full: &Grid1D) -> Result<Self> {
        Ok(Dynamics::FreeLattice(FourierPlan::new(*full)?))
    }

    pub fn grid(&self) -> Grid1D {
        match self {
            Dynamics::Crank(op) => op.grid,
            Dynamics::FreeLattice(p) => *p.grid(),
        }
    }

    /// H u.
    pub fn generator(&self, u: &WaveField) -> Result<WaveField> {
        match self {
            Dynamics::Crank(op) => op.apply(u),
            Dynamics::FreeLattice(p) => {
                let d = Dispersion::Lattice { h: p.grid().h() };
                p.multiplier(u, |_, rho| C::new(d.s(rho), 0.0))
            }
        }
    }

    /// States after each of the (ascending) step counts with signed step dt.
    pub fn trajectory(&self, u: &WaveField, dt: f64, steps: &[usize]) -> Result<Vec<WaveField>> {
        if u.grid != self.grid() {
            return Err(Error::GridMismatch("field and dynamics live on different grids".into()));
        }
        match self {
            Dynamics::Crank(op) => {
                let last = steps.last().copied().unwrap_or(0);
                let mut out = Vec::with_capacity(steps.len());
                let mut next = 0;
                while next < steps.len() && steps[next] == 0 {
                    out.push(u.clone());
                    next += 1;
                }
                if last == 0 {
                    return Ok(out);
                }
                let prop = Propagator::new(op, dt)?;
                prop.run(u, last, |s, state| {
                    while next < steps.len() && steps[next] == s {
                        out.push(state.clone());
                        next += 1;
                    }
                    Ok(())
                })?;
                Ok(out)
            }
            Dynamics::FreeLattice(p) => {
                let d = Dispersion::Lattice { h: p.grid().h() };
                let uh = p.forward(u)?;
                steps
                    .par_iter()
                    .map(|&n| {
                        let mut vh = uh.clone();
                        let angle = -2.0 * n as f64;
                        vh.multiply(|rho| C::from_polar(1.0, angle * (0.5 * d.s(rho) * dt).atan()));
                        let v = p.inverse(&vh)?;
                        let mass = v.edge_mass(GUARD_CELLS);
                        if mass > LEAK_TOL {
                            return Err(Error::BoundaryLeak { mass, t: n as f64 * dt });
                        }
                        Ok(v)
                    })
                    .collect()
            }
        }
    }

    pub fn evolve_steps(&self, u: &WaveField, dt: f64, n: usize) -> Result<WaveField> {
        Ok(self.trajectory(u, dt, &[n])?.pop().expect("one state per step count"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CookOptions {
    pub t_max: f64,
    pub dt: f64,
    pub samples: usize,
    /// Tail tolerance relative to ||u||.
    pub tol: f64,
    pub direction: Sign,
}

impl CookOptions {
    pub fn new(t_max: f64, dt: f64) -> Self {
        CookOptions { t_max, dt, samples: COOK_SAMPLES, tol: COOK_TOL, direction: Sign::Plus }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_direction(mut self, d: Sign) -> Self {
        self.direction = d;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_max >= self.dt) || self.samples < 10 || !(self.tol > 0.0) {
            return Err(Error::InvalidModel(format!("Cook options {self:?}")));
        }
        Ok(())
    }

    /// Geometric sample times over two decades, as distinct step counts.
    fn sample_steps(&self) -> Vec<usize> {
        let n_max = (self.t_max / self.dt).round() as usize;
        let t0 = self.t_max / 100.0;
        let mut steps: Vec<usize> = (0..self.samples)
            .map(|i| {
                let t = t0 * (100.0f64).powf(i as f64 / (self.samples - 1) as f64);
                ((t / self.dt).round() as usize).clamp(1, n_max)
            })
            .collect();
        steps.dedup();
        steps
    }
}

pub struct CookResult {
    /// Candidate W u.
    pub w: WaveField,
    pub t_used: f64,
    /// (t, ||(H J - J H0) e^{-itH0} u||)
    pub integrand_samples: Vec<(f64, f64)>,
    /// Power-law exponent of the integrand over the last decade.
    pub exponent: Option<f64>,
    pub tail_estimate: f64,
    pub converged: bool,
}

/// JSON-ready digest of a Cook run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CookSummary {
    pub t_used: f64,
    pub exponent: Option<f64>,
    pub tail_estimate: Option<f64>,
    pub converged: bool,
    pub norm_in: f64,
    pub norm_out: f64,
}

impl CookResult {
    pub fn summary(&self, u: &WaveField) -> CookSummary {
        CookSummary {
            t_used: self.t_used,
            exponent: self.exponent,
            tail_estimate: self.tail_estimate.is_finite().then_some(self.tail_estimate),
            converged: self.converged,
            norm_in: u.norm(),
            norm_out: self.w.norm(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,integrand")?;
        for (t, v) in &self.integrand_samples {
            writeln!(w, "{t:.10e},{v:.16e}")?;
        }
        Ok(())
    }
}

impl std::fmt::Debug for CookResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CookResult")
            .field("t_used", &self.t_used)
            .field("exponent", &self.exponent)
            .field("tail_estimate", &self.tail_estimate)
            .field("converged", &self.converged)
            .field("norm_w", &self.w.norm())
            .finish()
    }
}

fn direction_value(d: Sign) -> f64 {
    d.value()
}

/// Cook integrand ||(H J - J H0) v||.
fn integrand(h: &DiscreteOperator, h0: &Dynamics, ident: &Identifier, v: &WaveField) -> Result<f64> {
    let jv = ident.apply(v, &h.grid)?;
    let hjv = h.apply(&jv)?;
    let jh0v = ident.apply(&h0.generator(v)?, &h.grid)?;
    Ok(hjv.sub(&jh0v).norm())
}

/// Tail verdict from the samples over the last decade [T/10, T].
fn tail_fit(samples: &[(f64, f64)], norm: f64, tol: f64) -> (Option<f64>, f64, bool, f64) {
    let t_end = samples.last().map(|s| s.0).unwrap_or(0.0);
    let decade: Vec<(f64, f64)> = samples.iter().copied().filter(|&(t, _)| t >= 0.1 * t_end * (1.0 - 1e-12)).collect();
    let floor = 1e-14 * norm.max(1e-300);
    if decade.iter().all(|&(_, v)| v <= floor) {
        // integrand vanishes identically: nothing left to integrate
        let t_used = if samples.iter().all(|&(_, v)| v <= floor) { 0.0 } else { decade[0].0 };
        return (None, 0.0, true, t_used);
    }
    let pts: Vec<(f64, f64)> = decade.iter().copied().filter(|&(_, v)| v > floor).collect();
    if pts.len() < 3 {
        return (None, f64::INFINITY, false, t_end);
    }
    let fit = match fit_loglog(&pts) {
        Ok(f) => f,
        Err(_) => return (None, f64::INFINITY, false, t_end),
    };
    let p = fit.slope;
    if !(p < -1.0) {
        return (Some(p), f64::INFINITY, false, t_end);
    }
    let c = fit.intercept.exp();
    let tail = |t: f64| c * t.powf(p + 1.0) / (-p - 1.0);
    let goal = tol * norm;
    match decade.iter().find(|&&(t, _)| tail(t) < goal) {
        Some(&(t, _)) => (Some(p), tail(t), true, t),
        None => (Some(p), tail(t_end), false, t_end),
    }
}

/// W u = lim e^{±itH} J e^{∓itH0} u by Cook's method.
pub fn cook_wave_operator(
    h: &DiscreteOperator,
    h0: &Dynamics,
    ident: &Identifier,
    u: &WaveField,
    opts: &CookOptions,
) -> Result<CookResult> {
    opts.validate()?;
    let s = direction_value(opts.direction);
    let steps = opts.sample_steps();
    let states = h0.trajectory(u, s * opts.dt, &steps)?;
    let samples = steps
        .par_iter()
        .zip(states.par_iter())
        .map(|(&n, v)| Ok((n as f64 * opts.dt, integrand(h, h0, ident, v)?)))
        .collect::<Result<Vec<_>>>()?;
    let norm = u.norm();
    let (exponent, tail_estimate, converged, t_used) = tail_fit(&samples, norm, opts.tol);
    let n_used = (t_used / opts.dt).round() as usize;
    let v = match steps.iter().position(|&n| n == n_used) {
        Some(i) => states[i].clone(),
        None => h0.evolve_steps(u, s * opts.dt, n_used)?,
    };
    drop(states);
    let w = pull_back(h, &ident.apply(&v, &h.grid)?, -s * opts.dt, n_used)?;
    Ok(CookResult { w, t_used, integrand_samples: samples, exponent, tail_estimate, converged })
}

fn pull_back(h: &DiscreteOperator, x: &WaveField, dt: f64, n: usize) -> Result<WaveField> {
    if n == 0 {
        return Ok(x.clone());
    }
    Propagator::new(h, dt)?.steps(x, n)
}

/// e^{±iTH} J e^{∓iTH0} u at a fixed horizon T (rounded to whole steps).
pub fn wave_operator_at(
    h: &DiscreteOperator,
    h0: &Dynamics,
    ident: &Identifier,
    u: &WaveField,
    t: f64,
    dt: f64,
    direction: Sign,
) -> Result<WaveField> {
    let s = direction_value(direction);
    let n = (t / dt).round() as usize;
    let v = h0.evolve_steps(u, s * dt, n)?;
    pull_back(h, &ident.apply(&v, &h.grid)?, -s * dt, n)
}

/// Adjoint of [`wave_operator_at`]: e^{±iTH0} J^* e^{∓iTH} v.
pub fn wave_operator_adjoint_at(
    h: &DiscreteOperator,
    h0: &Dynamics,
    ident: &Identifier,
    v: &WaveField,
    t: f64,
    dt: f64,
    direction: Sign,
) -> Result<WaveField> {
    let s = direction_value(direction);
    let n = (t / dt).round() as usize;
    let x = pull_back(h, v, s * dt, n)?;
    let y = ident.adjoint(&x, &h0.grid())?;
    h0.evolve_steps(&y, -s * dt, n)
}

/// Modified wave operator W(L, H0; J J±). The identifier must be
/// [`Identifier::Modified`] with the sign of the direction.
pub fn modified_wave_operator(
    l: &DiscreteOperator,
    h0: &Dynamics,
    modifier: &Identifier,
    u: &WaveField,
    opts: &CookOptions,
) -> Result<CookResult> {
    match modifier {
        Identifier::Modified { sign, .. } if *sign == opts.direction => {}
        Identifier::Modified { .. } => {
            return Err(Error::InvalidModel("modifier sign differs from the time direction".into()))
        }
        _ => return Err(Error::InvalidModel("modified Cook run needs channel identifiers".into())),
    }
    cook_wave_operator(l, h0, modifier, u, opts)
}

/// | ||W u|| - ||u|| |.
pub fn isometry_defect(result: &CookResult, u: &WaveField) -> f64 {
    (result.w.norm() - u.norm()).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub defect: f64,
    /// Horizons of W(L, H0; J), W(L0, H0; J) and W(L, L0).
    pub horizons: [f64; 3],
    pub norm_direct: f64,
    pub norm_chained: f64,
}

/// ||W(L, H0; J) u - W(L, L0) W(L0, H0; J) u||. Both J-limits use the
/// horizon T while W(L, L0) uses T/2; with one common horizon the identity
/// would hold exactly for every T and test nothing.
#[allow(clippy::too_many_arguments)]
pub fn chain_rule_check(
    l: &DiscreteOperator,
    l0: &DiscreteOperator,
    h0: &Dynamics,
    ident: &Identifier,
    u: &WaveField,
    t: f64,
    dt: f64,
    direction: Sign,
) -> Result<ChainReport> {
    let whole = |x: f64| (x / dt).round() * dt;
    let horizons = [whole(t), whole(t), whole(0.5 * t)];
    let direct = wave_operator_at(l, h0, ident, u, horizons[0], dt, direction)?;
    let inner = wave_operator_at(l0, h0, ident, u, horizons[1], dt, direction)?;
    let bridge = Dynamics::Crank(l0.clone());
    let chained = wave_operator_at(l, &bridge, &Identifier::Identity, &inner, horizons[2], dt, direction)?;
    Ok(ChainReport {
        defect: direct.sub(&chained).norm(),
        horizons,
        norm_direct: direct.norm(),
        norm_chained: chained.norm(),
    })
}

/// Random states in E_psi(L) H supported initially in [r_lo, r_hi],
/// orthonormalised.
pub fn random_filtered_states(
    l: &DiscreteOperator,
    psi: &Bump,
    count: usize,
    r_lo: f64,
    r_hi: f64,
    seed: u64,
    degree: usize,
) -> Result<Vec<WaveField>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut raw = Vec::with_capacity(count);
    for _ in 0..count {
        let mut u = WaveField::zeros(l.grid, l.modes);
        for i in 0..l.grid.n {
            let r = l.grid.r(i);
            if l.grid.pinned(i) || r < r_lo || r > r_hi {
                continue;
            }
            for j in 0..l.modes {
                u.set(i, j, C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
            }
        }
        raw.push(u);
    }
    let filtered = raw
        .par_iter()
        .map(|u| chebyshev_filter(l, u, |x| psi.eval(x), degree))
        .collect::<Result<Vec<_>>>()?;
    let mut out: Vec<WaveField> = Vec::with_capacity(count);
    for mut v in filtered {
        for q in &out {
            let c = q.inner(&v);
            v.axpy(-c, q);
        }
        if v.norm() < 1e-10 {
            return Err(Error::InvalidModel("filtered ensemble is linearly dependent".into()));
        }
        v.normalize();
        out.push(v);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletenessReport {
    pub ratios: Vec<f64>,
    pub mean: f64,
    pub t: f64,
    /// States count as scattered beyond this radius at time t.
    pub r_escape: f64,
}

/// Norm ratio ||lim e^{±itH0} J^* e^{∓itL} v||^2 / ||v||^2 for each member.
///
/// J^* is unitary on the far region and H0 preserves norms, so the limit's
/// norm is the mass that has left every bounded region. At finite t this is
/// measured as the mass beyond `r_escape`, chosen by the caller from the
/// initial support and the slowest group velocity in the window. Bound
/// states stay behind and contribute nothing.
#[allow(clippy::too_many_arguments)]
pub fn completeness_probe(
    l: &DiscreteOperator,
    window: &SpectralWindow,
    known: &[EigenCandidate],
    states: &[WaveField],
    t: f64,
    dt: f64,
    r_escape: f64,
    direction: Sign,
) -> Result<CompletenessReport> {
    window.require_positive()?;
    require_clear(window, known)?;
    if states.is_empty() {
        return Err(Error::InvalidModel("empty ensemble".into()));
    }
    let s = direction_value(direction);
    let n = (t / dt).round() as usize;
    let prop = Propagator::new(l, s * dt)?;
    let ratios = states
        .par_iter()
        .map(|v| {
            let x = prop.steps(v, n)?;
            Ok(x.mass_where(|r| r >= r_escape) / v.norm_sqr())
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    Ok(CompletenessReport { ratios, mean, t: n as f64 * dt, r_escape })
}
