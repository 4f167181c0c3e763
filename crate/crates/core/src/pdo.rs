//! Oscillating-symbol operators J(Phi, a) u(r) = (2 pi)^{-1/2} int e^{i r rho +
//! i Phi(r, rho)} a(r, rho) u_hat(rho) d rho on the periodic full-line grid,
//! their two-term composition expansions, and the channel identifiers
//! J^± = chi(D) J(Phi^±, eta psi(rho^2) sigma^±).

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fourier::{FourierPlan, MomentumField};
use crate::grid::{Grid1D, WaveField};
use crate::model::{smooth_step, Bump, CutoffSpec, PerturbationCoeffs, ScalingFunction, SpectralWindow};
use crate::phase::{PhaseFunction, Sign};

type C = Complex64;

pub type RadialFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MomentumFn = Arc<dyn Fn(f64) -> C + Send + Sync>;
pub type SymbolFn = Arc<dyn Fn(f64, f64) -> C + Send + Sync>;
pub type CoeffFn = Arc<dyn Fn(f64) -> C + Send + Sync>;

#[derive(Clone)]
enum SymbolKind {
    /// radial(r) * right(rho) for r > 0, radial(r) * left(rho) for r < 0.
    Separable {
        radial: RadialFn,
        radial_dr: RadialFn,
        right: MomentumFn,
        left: MomentumFn,
    },
    General {
        f: SymbolFn,
        dr: Option<SymbolFn>,
    },
}

/// Symbol a(r, rho) of order `order` in r, compactly supported in rho.
#[derive(Clone)]
pub struct Symbol {
    pub order: f64,
    /// Disjoint closed momentum intervals; a vanishes outside their union.
    pub support: Vec<(f64, f64)>,
    kind: SymbolKind,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            SymbolKind::Separable { .. } => "separable",
            SymbolKind::General { .. } => "general",
        };
        f.debug_struct("Symbol")
            .field("order", &self.order)
            .field("support", &self.support)
            .field("kind", &kind)
            .finish()
    }
}

impl Symbol {
    pub fn general(order: f64, support: Vec<(f64, f64)>, f: impl Fn(f64, f64) -> C + Send + Sync + 'static) -> Self {
        Symbol { order, support, kind: SymbolKind::General { f: Arc::new(f), dr: None } }
    }

    /// Attach an exact r-derivative to a general symbol.
    pub fn with_dr(mut self, d: impl Fn(f64, f64) -> C + Send + Sync + 'static) -> Self {
        if let SymbolKind::General { dr, .. } = &mut self.kind {
            *dr = Some(Arc::new(d));
        }
        self
    }

    pub fn separable(
        order: f64,
        support: Vec<(f64, f64)>,
        radial: RadialFn,
        radial_dr: RadialFn,
        right: MomentumFn,
        left: MomentumFn,
    ) -> Self {
        Symbol { order, support, kind: SymbolKind::Separable { radial, radial_dr, right, left } }
    }

    /// a = 1 on the given momentum interval.
    pub fn unit(support: (f64, f64)) -> Self {
        let one: MomentumFn = Arc::new(|_| C::new(1.0, 0.0));
        Self::separable(0.0, vec![support], Arc::new(|_| 1.0), Arc::new(|_| 0.0), one.clone(), one)
    }

    pub fn in_support(&self, rho: f64) -> bool {
        self.support.iter().any(|&(a, b)| rho >= a && rho <= b)
    }

    pub fn eval(&self, r: f64, rho: f64) -> C {
        if !self.in_support(rho) {
            return C::default();
        }
        match &self.kind {
            SymbolKind::Separable { radial, right, left, .. } => {
                let m = if r > 0.0 {
                    right(rho)
                } else if r < 0.0 {
                    left(rho)
                } else {
                    0.5 * (right(rho) + left(rho))
                };
                m * radial(r)
            }
            SymbolKind::General { f, .. } => f(r, rho),
        }
    }

    /// d_r a, exact when available, otherwise by a centred difference.
    pub fn dr(&self, r: f64, rho: f64) -> C {
        if !self.in_support(rho) {
            return C::default();
        }
        match &self.kind {
            SymbolKind::Separable { radial_dr, right, left, .. } => {
                let m = if r > 0.0 {
                    right(rho)
                } else if r < 0.0 {
                    left(rho)
                } else {
                    0.5 * (right(rho) + left(rho))
                };
                m * radial_dr(r)
            }
            SymbolKind::General { dr: Some(d), .. } => d(r, rho),
            SymbolKind::General { f, dr: None } => {
                let e = 1e-5 * (1.0 + r.abs());
                (f(r + e, rho) - f(r - e, rho)) / (2.0 * e)
            }
        }
    }

    /// Sampled seminorms sup |d_r^l a| (1 + |r|)^{l - m} for l = 0, 1.
    pub fn seminorms(&self, rs: &[f64], rhos: &[f64]) -> (f64, f64) {
        let mut c0: f64 = 0.0;
        let mut c1: f64 = 0.0;
        for &r in rs {
            let w = 1.0 + r.abs();
            for &rho in rhos {
                c0 = c0.max(self.eval(r, rho).norm() * w.powf(-self.order));
                c1 = c1.max(self.dr(r, rho).norm() * w.powf(1.0 - self.order));
            }
        }
        (c0, c1)
    }

    /// CSV rows (r, rho, re a, im a).
    pub fn write_csv<W: Write>(&self, mut w: W, rs: &[f64], rhos: &[f64]) -> Result<()> {
        writeln!(w, "r,rho,re,im")?;
        for &r in rs {
            for &rho in rhos {
                let v = self.eval(r, rho);
                writeln!(w, "{r:.10e},{rho:.10e},{:.16e},{:.16e}", v.re, v.im)?;
            }
        }
        Ok(())
    }
}

/// J(Phi, a). A missing or trivial phase means Phi = 0.
#[derive(Clone, Debug)]
pub struct OscillatingOp {
    pub phase: Option<Arc<PhaseFunction>>,
    pub symbol: Symbol,
}

impl OscillatingOp {
    pub fn new(phase: Option<Arc<PhaseFunction>>, symbol: Symbol) -> Result<Self> {
        let phase = phase.filter(|p| !p.is_trivial());
        if let Some(p) = &phase {
            for &(a, b) in &symbol.support {
                let (lo, hi) = if a >= 0.0 { (a, b) } else { (-b, -a) };
                if a < 0.0 && b > 0.0 || lo < p.window.0 - 1e-12 || hi > p.window.1 + 1e-12 {
                    return Err(Error::SupportMismatch);
                }
            }
        }
        Ok(OscillatingOp { phase, symbol })
    }

    pub fn zero_phase(symbol: Symbol) -> Self {
        OscillatingOp { phase: None, symbol }
    }

    /// d_r Phi and d_r^2 Phi, zero off the phase domain.
    pub fn phase_derivs(&self, r: f64, rho: f64) -> (f64, f64) {
        match &self.phase {
            Some(p) if p.in_domain(r, rho) => {
                let d = p.derivs_unchecked(r, rho);
                (d.g, d.g_r)
            }
            _ => (0.0, 0.0),
        }
    }
}

/// Contiguous runs of DFT bins inside the support, split at rho = 0.
fn support_runs(grid: &Grid1D, support: &[(f64, f64)]) -> Result<Vec<(usize, usize)>> {
    let nyq = std::f64::consts::PI / grid.h();
    let mut runs = Vec::new();
    for &(a, b) in support {
        if a < -nyq - 1e-12 || b > nyq + 1e-12 || b < a {
            return Err(Error::SupportMismatch);
        }
        // FFT ordering: q in [0, n/2) non-negative, [n/2, n) negative
        let dr = grid.drho();
        let n = grid.n as i64;
        let kmin = (a / dr).ceil() as i64;
        let kmax = (b / dr).floor() as i64;
        let mut push = |k0: i64, k1: i64| {
            if k1 >= k0 {
                let q0 = k0.rem_euclid(n) as usize;
                runs.push((q0, q0 + (k1 - k0 + 1) as usize));
            }
        };
        push(kmin.max(-n / 2), kmax.min(-1));
        push(kmin.max(0), kmax.min(n / 2 - 1));
    }
    Ok(runs)
}

struct Active {
    /// (run index, local index, rho, q)
    bins: Vec<(usize, usize, f64, usize)>,
}

fn active_bins(grid: &Grid1D, runs: &[(usize, usize)]) -> Active {
    let mut bins = Vec::new();
    for (b, &(q0, q1)) in runs.iter().enumerate() {
        for q in q0..q1 {
            bins.push((b, q - q0, grid.rho(q), q));
        }
    }
    Active { bins }
}

/// Apply J(Phi, a) to a full-line field, mode by mode.
pub fn apply_osc(op: &OscillatingOp, u: &WaveField) -> Result<WaveField> {
    let plan = FourierPlan::new(u.grid)?;
    apply_osc_with(op, &plan, u)
}

pub fn apply_osc_with(op: &OscillatingOp, plan: &FourierPlan, u: &WaveField) -> Result<WaveField> {
    let uh = plan.forward(u)?;
    apply_osc_momentum(op, &uh)
}

/// J(Phi, a) applied to a field already in momentum representation.
pub fn apply_osc_momentum(op: &OscillatingOp, uh: &MomentumField) -> Result<WaveField> {
    let grid = uh.grid;
    let modes = uh.modes;
    let runs = support_runs(&grid, &op.symbol.support)?;
    let table = op.phase.as_ref().map(|p| p.table(&grid, &runs));
    let act = active_bins(&grid, &runs);
    let drho = grid.drho();
    let norm = drho / (2.0 * std::f64::consts::PI).sqrt();
    let sep = match &op.symbol.kind {
        SymbolKind::Separable { radial, right, left, .. } => {
            let r: Vec<C> = act.bins.iter().map(|b| right(b.2)).collect();
            let l: Vec<C> = act.bins.iter().map(|b| left(b.2)).collect();
            Some((radial.clone(), r, l))
        }
        SymbolKind::General { .. } => None,
    };
    let mut values = vec![C::default(); grid.n * modes];
    values.par_chunks_mut(modes).enumerate().for_each(|(j, out)| {
        let r = grid.r(j);
        let (rad, mom): (f64, Option<&[C]>) = match &sep {
            Some((radial, right, left)) => {
                let rad = radial(r);
                if rad == 0.0 {
                    return;
                }
                if r > 0.0 {
                    (rad, Some(right.as_slice()))
                } else if r < 0.0 {
                    (rad, Some(left.as_slice()))
                } else {
                    (rad, None)
                }
            }
            None => (1.0, None),
        };
        let mut acc = vec![C::default(); modes];
        let mut last_run = usize::MAX;
        let mut wave = C::default();
        let mut step = C::default();
        for (idx, &(b, l, rho, q)) in act.bins.iter().enumerate() {
            if b != last_run || l % 64 == 0 {
                wave = C::from_polar(1.0, r * rho);
                step = C::from_polar(1.0, r * drho);
                last_run = b;
            }
            let a = match (&sep, mom) {
                (Some(_), Some(m)) => m[idx] * rad,
                _ => op.symbol.eval(r, rho),
            };
            if a != C::default() {
                let e = match &table {
                    Some(t) => t.exp_phi(b, j, l),
                    None => C::new(1.0, 0.0),
                };
                let k = wave * e * a;
                for (c, s) in acc.iter_mut().enumerate() {
                    *s += k * uh.values[q * modes + c];
                }
            }
            wave *= step;
        }
        for (o, s) in out.iter_mut().zip(acc) {
            *o = s * norm;
        }
    });
    Ok(WaveField { grid, modes, values })
}

/// Adjoint J(Phi, a)^* v.
pub fn apply_osc_adjoint(op: &OscillatingOp, v: &WaveField) -> Result<WaveField> {
    let plan = FourierPlan::new(v.grid)?;
    let wh = apply_osc_adjoint_momentum(op, v)?;
    plan.inverse(&wh)
}

/// J(Phi, a)^* v in momentum representation.
pub fn apply_osc_adjoint_momentum(op: &OscillatingOp, v: &WaveField) -> Result<MomentumField> {
    let grid = v.grid;
    if grid.is_half_line() {
        return Err(Error::GridMismatch("oscillating operators act on the full line".into()));
    }
    let modes = v.modes;
    let runs = support_runs(&grid, &op.symbol.support)?;
    let table = op.phase.as_ref().map(|p| p.table(&grid, &runs));
    let act = active_bins(&grid, &runs);
    let norm = grid.h() / (2.0 * std::f64::consts::PI).sqrt();
    let cols: Vec<Vec<C>> = act
        .bins
        .par_iter()
        .map(|&(b, l, rho, _)| {
            let mut acc = vec![C::default(); modes];
            let step = C::from_polar(1.0, -rho * grid.h());
            let mut wave = C::default();
            for j in 0..grid.n {
                if j % 64 == 0 {
                    wave = C::from_polar(1.0, -grid.r(j) * rho);
                }
                let r = grid.r(j);
                let a = op.symbol.eval(r, rho);
                if a != C::default() {
                    let e = match &table {
                        Some(t) => t.exp_phi(b, j, l),
                        None => C::new(1.0, 0.0),
                    };
                    let k = wave * e.conj() * a.conj();
                    for (c, s) in acc.iter_mut().enumerate() {
                        *s += k * v.values[j * modes + c];
                    }
                }
                wave *= step;
            }
            acc
        })
        .collect();
    let mut values = vec![C::default(); grid.n * modes];
    for (&(_, _, _, q), col) in act.bins.iter().zip(cols) {
        for (c, s) in col.into_iter().enumerate() {
            values[q * modes + c] = s * norm;
        }
    }
    Ok(MomentumField { grid, modes, values })
}

/// Polynomial symbol b(r, rho) = sum_k b_k(r) rho^k of degree at most 2.
#[derive(Clone)]
pub struct RhoPoly {
    coeffs: Vec<CoeffFn>,
    r_independent: bool,
}

impl std::fmt::Debug for RhoPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RhoPoly")
            .field("degree", &self.degree())
            .field("r_independent", &self.r_independent)
            .finish()
    }
}

impl RhoPoly {
    pub fn new(coeffs: Vec<CoeffFn>) -> Self {
        RhoPoly { coeffs, r_independent: false }
    }

    pub fn constant(coeffs: &[C]) -> Self {
        let fs: Vec<CoeffFn> = coeffs
            .iter()
            .map(|&c| {
                let f: CoeffFn = Arc::new(move |_| c);
                f
            })
            .collect();
        RhoPoly { coeffs: fs, r_independent: true }
    }

    /// b = rho^2.
    pub fn laplacian() -> Self {
        Self::constant(&[C::default(), C::default(), C::new(1.0, 0.0)])
    }

    /// Channel symbol (1 + a1L) rho^2 + lambda k(r) - i (d_r a1L) rho.
    pub fn channel(k: &ScalingFunction, lambda: f64, a1l: &PerturbationCoeffs) -> Self {
        let (k0, a0, a1) = (k.clone(), a1l.clone(), a1l.clone());
        RhoPoly::new(vec![
            Arc::new(move |r| C::new(lambda * k0.k_clipped(r), 0.0)),
            Arc::new(move |r| C::new(0.0, -a0.a1l_profile_prime(r))),
            Arc::new(move |r| C::new(1.0 + a1.a1l_profile(r), 0.0)),
        ])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_r_independent(&self) -> bool {
        self.r_independent
    }

    fn check_degree(&self) -> Result<()> {
        if self.coeffs.len() > 3 {
            return Err(Error::UnsupportedSymbolDegree(format!("degree {} in rho", self.degree())));
        }
        Ok(())
    }

    fn c(&self, k: usize, r: f64) -> C {
        self.coeffs.get(k).map(|f| f(r)).unwrap_or_default()
    }

    pub fn eval(&self, r: f64, rho: f64) -> C {
        self.c(0, r) + self.c(1, r) * rho + self.c(2, r) * rho * rho
    }

    pub fn d_rho(&self, r: f64, rho: f64) -> C {
        self.c(1, r) + 2.0 * self.c(2, r) * rho
    }

    pub fn d2_rho(&self, r: f64) -> C {
        2.0 * self.c(2, r)
    }

    /// b(x, D) v with D = -i d_r taken spectrally; the composition oracle.
    pub fn apply(&self, plan: &FourierPlan, v: &WaveField) -> Result<WaveField> {
        self.check_degree()?;
        let vh = plan.forward(v)?;
        let mut out = WaveField::zeros(v.grid, v.modes);
        for k in 0..self.coeffs.len() {
            let mut dk = vh.clone();
            dk.multiply(|rho| C::new(rho.powi(k as i32), 0.0));
            let dv = plan.inverse(&dk)?;
            for i in 0..v.grid.n {
                let c = self.c(k, v.grid.r(i));
                for j in 0..v.modes {
                    out.values[i * v.modes + j] += c * dv.values[i * v.modes + j];
                }
            }
        }
        Ok(out)
    }
}

/// Symbols d0 (and d1 if n_terms = 2) with b(x, D) J(Phi, a) = J(Phi, d0 + d1 + ...).
///
/// d0 = b(r, rho + g) a and
/// d1 = d_rho b(r, rho + g) D_r a + 1/2 d_rho^2 b (D_r g) a, g = d_r Phi.
pub fn compose_left(b: &RhoPoly, op: &OscillatingOp, n_terms: usize) -> Result<Symbol> {
    b.check_degree()?;
    if !(1..=2).contains(&n_terms) {
        return Err(Error::UnsupportedSymbolDegree(format!("{n_terms} expansion terms")));
    }
    let b = b.clone();
    let op = op.clone();
    let support = op.symbol.support.clone();
    let order = op.symbol.order + b.degree() as f64;
    Ok(Symbol::general(order, support, move |r, rho| {
        let a = op.symbol.eval(r, rho);
        let (g, g_r) = op.phase_derivs(r, rho);
        let eta = rho + g;
        let mut d = b.eval(r, eta) * a;
        if n_terms == 2 {
            let dra = C::new(0.0, -1.0) * op.symbol.dr(r, rho);
            d += b.d_rho(r, eta) * dra + 0.5 * b.d2_rho(r) * C::new(0.0, -g_r) * a;
        }
        d
    }))
}

/// Symbols (e0, e1) with J(Phi, a) c(x, D)^* = J(Phi, e0 + e1 + ...) for a
/// right factor c(rho) without r-dependence: e0 = a conj(c(rho)), e1 = 0.
pub fn compose_right(op: &OscillatingOp, c: &RhoPoly) -> Result<(Symbol, Symbol)> {
    c.check_degree()?;
    if !c.is_r_independent() {
        return Err(Error::UnsupportedSymbolDegree("right factor depends on r".into()));
    }
    let (c, sym) = (c.clone(), op.symbol.clone());
    let support = sym.support.clone();
    let order = sym.order;
    let e0 = Symbol::general(order, support.clone(), move |r, rho| sym.eval(r, rho) * c.eval(0.0, rho).conj());
    let e1 = Symbol::general(order - 1.0, support, |_, _| C::default());
    Ok((e0, e1))
}

/// sigma^±(r, rho): 1 where ± r rho > 0, mollified over `cell` in rho.
pub fn sigma(sign: Sign, r: f64, rho: f64, cell: f64) -> f64 {
    let s = sign.value() * r.signum();
    if s == 0.0 {
        return 0.5;
    }
    smooth_step(0.5 + s * rho / cell)
}

/// Channel identifier chi(D) J(Phi, a^±) with a^± = eta(r) psi(rho^2) sigma^±.
#[derive(Clone, Debug)]
pub struct ChannelIdentifier {
    pub op: OscillatingOp,
    /// Outer momentum filter chi in |rho|; equal to 1 on the output band.
    pub outer: Option<Bump>,
    pub sign: Sign,
}

pub fn build_channel_identifier(
    phase: Option<Arc<PhaseFunction>>,
    cutoffs: &CutoffSpec,
    window: &SpectralWindow,
    sign: Sign,
    rho_cell: f64,
) -> Result<ChannelIdentifier> {
    if !(window.lo > 0.0) {
        return Err(Error::WindowTouchesZero);
    }
    let (e_lo, e_hi) = cutoffs.psi.support();
    if !(e_lo > 0.0) {
        return Err(Error::WindowTouchesZero);
    }
    if e_lo < window.lo - 1e-12 || e_hi > window.hi + 1e-12 {
        return Err(Error::SupportMismatch);
    }
    let (p_lo, p_hi) = (e_lo.sqrt(), e_hi.sqrt());
    if let Some(p) = &phase {
        if p.sign != sign || p.onset > cutoffs.r + 1e-12 {
            return Err(Error::SupportMismatch);
        }
    }
    let psi = cutoffs.psi;
    let cut = *cutoffs;
    let cut2 = *cutoffs;
    let right: MomentumFn = Arc::new(move |rho| C::new(psi.eval(rho * rho) * sigma(sign, 1.0, rho, rho_cell), 0.0));
    let left: MomentumFn = Arc::new(move |rho| C::new(psi.eval(rho * rho) * sigma(sign, -1.0, rho, rho_cell), 0.0));
    let symbol = Symbol::separable(
        0.0,
        vec![(-p_hi, -p_lo), (p_lo, p_hi)],
        Arc::new(move |r| cut.eta(r)),
        Arc::new(move |r| cut2.eta_prime(r)),
        right,
        left,
    );
    let op = OscillatingOp::new(phase, symbol)?;
    // shift of the momentum band by d_r Phi over |r| > R
    let mut delta: f64 = 0.0;
    if let Some(p) = &op.phase {
        for i in 0..=200 {
            let r = cutoffs.r * (1e4f64.ln() * i as f64 / 200.0).exp() * 1.000001;
            for l in 0..=32 {
                let rho = p_lo + (p_hi - p_lo) * l as f64 / 32.0;
                let rs = sign.value() * r;
                if p.in_domain(rs, rho) {
                    delta = delta.max(p.derivs_unchecked(rs, rho).g.abs());
                }
            }
        }
    }
    let lo = p_lo - delta - rho_cell;
    let width = 0.5 * lo;
    if !(width > 0.0) {
        return Err(Error::WindowTouchesZero);
    }
    let outer = Some(Bump::new(lo, p_hi + delta + rho_cell, width));
    Ok(ChannelIdentifier { op, outer, sign })
}

impl ChannelIdentifier {
    fn filter(&self, uh: &mut MomentumField) {
        if let Some(b) = self.outer {
            uh.multiply(|rho| C::new(b.eval(rho.abs()), 0.0));
        }
    }

    pub fn apply(&self, plan: &FourierPlan, u: &WaveField) -> Result<WaveField> {
        let uh = plan.forward(u)?;
        self.apply_momentum(plan, &uh)
    }

    pub fn apply_momentum(&self, plan: &FourierPlan, uh: &MomentumField) -> Result<WaveField> {
        let v = apply_osc_momentum(&self.op, uh)?;
        if self.outer.is_none() {
            return Ok(v);
        }
        let mut vh = plan.forward(&v)?;
        self.filter(&mut vh);
        plan.inverse(&vh)
    }

    pub fn adjoint(&self, plan: &FourierPlan, v: &WaveField) -> Result<WaveField> {
        let v = if self.outer.is_some() {
            let mut vh = plan.forward(v)?;
            self.filter(&mut vh);
            plan.inverse(&vh)?
        } else {
            v.clone()
        };
        let wh = apply_osc_adjoint_momentum(&self.op, &v)?;
        plan.inverse(&wh)
    }
}

/// Relative errors of the one- and two-term expansions of b(x, D) J(Phi, a)
/// on u, against b applied exactly in momentum space.
pub fn composition_errors(b: &RhoPoly, op: &OscillatingOp, plan: &FourierPlan, u: &WaveField) -> Result<(f64, f64)> {
    let exact = b.apply(plan, &apply_osc_with(op, plan, u)?)?;
    let scale = exact.norm().max(f64::MIN_POSITIVE);
    let mut errs = [0.0; 2];
    for (n, e) in errs.iter_mut().enumerate() {
        let d = OscillatingOp::new(op.phase.clone(), compose_left(b, op, n + 1)?)?;
        *e = exact.sub(&apply_osc_with(&d, plan, u)?).norm() / scale;
    }
    Ok((errs[0], errs[1]))
}

/// Defect ||J(Phi, a1) J(Phi, a2)^* u - Op(a1 conj(a2)) u|| / ||u||, the
/// leading-order product check.
pub fn product_defect(op1: &OscillatingOp, op2: &OscillatingOp, u: &WaveField) -> Result<f64> {
    let lhs = apply_osc(op1, &apply_osc_adjoint(op2, u)?)?;
    let (s1, s2) = (op1.symbol.clone(), op2.symbol.clone());
    let support = s1.support.clone();
    let prod = Symbol::general(s1.order + s2.order, support, move |r, rho| s1.eval(r, rho) * s2.eval(r, rho).conj());
    let rhs = apply_osc(&OscillatingOp::zero_phase(prod), u)?;
    Ok(lhs.sub(&rhs).norm() / u.norm())
}
