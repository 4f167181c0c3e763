//! Long-range phase Phi(r, rho) built by successive approximation.
//!
//! With g = d_r Phi, the iterates solve
//!     (1 + a) s(rho + g) + lambda k(r) - s(rho) = 0
//! for the dispersion s (rho^2 in the continuum, the 3-point lattice symbol on
//! a grid) by g_{N+1} = g_N - R_N / ((1 + a) s'(rho)), with
//! R_N = (1 + a)(s(rho + g_N) - s(rho)) + a s(rho) + lambda k. For s = rho^2
//! this is exactly g_{N+1} = g_N - (g_N^2 - g_{N-1}^2) / (2 rho), and
//! g_1 = -(a rho^2 + lambda k) / (2 (1 + a) rho). Phi itself is the integral of
//! g from sign(r) R to r.

use std::io::Write;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::{PerturbationCoeffs, ScalingFunction};
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispersion {
    /// s(rho) = rho^2
    Continuum,
    /// s(rho) = (4 / h^2) sin^2(rho h / 2), the symbol of the 3-point stencil.
    Lattice { h: f64 },
}

impl Dispersion {
    pub fn s(&self, rho: f64) -> f64 {
        match *self {
            Dispersion::Continuum => rho * rho,
            Dispersion::Lattice { h } => {
                let x = (0.5 * rho * h).sin();
                4.0 / (h * h) * x * x
            }
        }
    }

    pub fn ds(&self, rho: f64) -> f64 {
        match *self {
            Dispersion::Continuum => 2.0 * rho,
            Dispersion::Lattice { h } => 2.0 / h * (rho * h).sin(),
        }
    }

    pub fn d2s(&self, rho: f64) -> f64 {
        match *self {
            Dispersion::Continuum => 2.0,
            Dispersion::Lattice { h } => 2.0 * (rho * h).cos(),
        }
    }

    /// s(rho + g) - s(rho) without cancellation.
    pub fn diff(&self, rho: f64, g: f64) -> f64 {
        match *self {
            Dispersion::Continuum => g * (2.0 * rho + g),
            Dispersion::Lattice { h } => {
                4.0 / (h * h) * (0.5 * g * h).sin() * ((rho + 0.5 * g) * h).sin()
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(&self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Local derivatives of the phase at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhaseDerivs {
    /// d_r Phi
    pub g: f64,
    /// d_r^2 Phi
    pub g_r: f64,
    /// d_rho d_r Phi
    pub g_rho: f64,
}

/// One block of tabulated e^{i Phi}: a contiguous run of momenta of one sign
/// and the contiguous grid rows where (r, rho) lies in the phase domain.
#[derive(Clone, Debug)]
pub struct TableBlock {
    pub q0: usize,
    pub rhos: Vec<f64>,
    pub row0: usize,
    pub rows: usize,
    /// e^{i Phi}, row-major (row, momentum).
    pub exp_phi: Vec<Complex64>,
}

#[derive(Clone, Debug)]
pub struct PhaseTable {
    pub grid: Grid1D,
    pub blocks: Vec<TableBlock>,
}

impl PhaseTable {
    /// e^{i Phi} at (row j, momentum index q in block b), 1 outside the domain.
    pub fn exp_phi(&self, b: usize, j: usize, q: usize) -> Complex64 {
        let blk = &self.blocks[b];
        if j >= blk.row0 && j < blk.row0 + blk.rows {
            blk.exp_phi[(j - blk.row0) * blk.rhos.len() + q]
        } else {
            Complex64::new(1.0, 0.0)
        }
    }
}

type TableKey = (usize, u64, u64, Vec<(usize, usize)>);

/// The phase Phi^+ or Phi^- on Gamma(R, Lambda) = {|r| > R, |rho| in
/// Lambda, sign * r * rho > 0}.
pub struct PhaseFunction {
    pub k: ScalingFunction,
    /// Channel eigenvalue multiplying k.
    pub lambda: f64,
    pub a1l: PerturbationCoeffs,
    pub onset: f64,
    pub nu: f64,
    pub n_iters: usize,
    /// Momentum window |rho| in [lo, hi].
    pub window: (f64, f64),
    pub sign: Sign,
    pub dispersion: Dispersion,
    cache: Mutex<Vec<(TableKey, Arc<PhaseTable>)>>,
}

impl std::fmt::Debug for PhaseFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PhaseFunction")
            .field("lambda", &self.lambda)
            .field("onset", &self.onset)
            .field("nu", &self.nu)
            .field("n_iters", &self.n_iters)
            .field("window", &self.window)
            .field("sign", &self.sign)
            .field("dispersion", &self.dispersion)
            .finish()
    }
}

/// Number of successive approximations for decay index nu.
pub fn iteration_count(nu: f64) -> Result<usize> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidNu(nu));
    }
    let inv = 1.0 / nu;
    if (inv - inv.round()).abs() < 1e-9 {
        return Err(Error::IntegerNuInverse(inv));
    }
    Ok(if nu < 1.0 { inv.floor() as usize } else { 0 })
}

/// Parameters of [`build_phase`].
#[derive(Clone, Debug)]
pub struct PhaseParams {
    pub lambda: f64,
    pub onset: f64,
    pub nu: f64,
    pub window: (f64, f64),
    pub sign: Sign,
    pub dispersion: Dispersion,
}

pub fn build_phase(
    k: &ScalingFunction,
    a1l: &PerturbationCoeffs,
    p: &PhaseParams,
) -> Result<PhaseFunction> {
    let n_iters = iteration_count(p.nu)?;
    let (lo, hi) = p.window;
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::WindowTouchesZero);
    }
    if !(p.onset > 0.0) {
        return Err(Error::InvalidModel(format!("phase onset radius {}", p.onset)));
    }
    let mut a = PerturbationCoeffs::zero();
    for c in a1l.get(crate::model::CoeffName::A1L) {
        if !c.theta.is_constant() {
            return Err(Error::InvalidModel("a1L must be angle independent".into()));
        }
        a = a.with(c.clone());
    }
    let span = 1e4f64.ln();
    for i in 0..=2000 {
        let r = p.onset * (span * i as f64 / 2000.0).exp();
        let v = a.a1l_profile(r);
        if v.abs() >= 0.5 {
            return Err(Error::NonAdmissible { r, value: v.abs() });
        }
    }
    Ok(PhaseFunction {
        k: k.clone(),
        lambda: p.lambda,
        a1l: a,
        onset: p.onset,
        nu: p.nu,
        n_iters,
        window: p.window,
        sign: p.sign,
        dispersion: p.dispersion,
        cache: Mutex::new(Vec::new()),
    })
}

impl PhaseFunction {
    pub fn is_trivial(&self) -> bool {
        self.n_iters == 0 || (self.lambda == 0.0 && !self.a1l.has_a1l())
    }

    pub fn in_domain(&self, r: f64, rho: f64) -> bool {
        let a = rho.abs();
        r.abs() > self.onset
            && a >= self.window.0
            && a <= self.window.1
            && self.sign.value() * r * rho > 0.0
    }

    fn check(&self, r: f64, rho: f64) -> Result<()> {
        if self.in_domain(r, rho) {
            Ok(())
        } else {
            Err(Error::OutOfDomain { r, rho })
        }
    }

    /// Derivatives of the level-`level` iterate (level 0 is the zero phase).
    /// Defined for any r with |r| > 1/2 and rho != 0.
    pub fn derivs_at_level(&self, r: f64, rho: f64, level: usize) -> PhaseDerivs {
        let s = &self.dispersion;
        let a = self.a1l.a1l_profile(r);
        let ar = self.a1l.a1l_profile_prime(r);
        let kk = self.lambda * self.k.k(r.abs());
        let kr = self.lambda * r.signum() * self.k.dk(r.abs());
        let big_a = 1.0 + a;
        let s0 = s.s(rho);
        let s1 = s.ds(rho);
        let d = big_a * s1;
        let d_r = ar * s1;
        let d_rho = big_a * s.d2s(rho);
        let mut out = PhaseDerivs::default();
        for _ in 0..level {
            let PhaseDerivs { g, g_r, g_rho } = out;
            let delta = s.diff(rho, g);
            let sg1 = s.ds(rho + g);
            let res = big_a * delta + a * s0 + kk;
            let res_r = ar * delta + big_a * sg1 * g_r + ar * s0 + kr;
            let res_rho = big_a * (sg1 * (1.0 + g_rho) - s1) + a * s1;
            out = PhaseDerivs {
                g: g - res / d,
                g_r: g_r - (res_r * d - res * d_r) / (d * d),
                g_rho: g_rho - (res_rho * d - res * d_rho) / (d * d),
            };
        }
        out
    }

    pub fn derivs_unchecked(&self, r: f64, rho: f64) -> PhaseDerivs {
        self.derivs_at_level(r, rho, self.n_iters)
    }

    pub fn derivs(&self, r: f64, rho: f64) -> Result<PhaseDerivs> {
        self.check(r, rho)?;
        Ok(self.derivs_unchecked(r, rho))
    }

    /// d_r Phi.
    pub fn dphi_dr(&self, r: f64, rho: f64) -> Result<f64> {
        Ok(self.derivs(r, rho)?.g)
    }

    /// Phi(r, rho) by adaptive quadrature from sign(r) R.
    pub fn phi(&self, r: f64, rho: f64) -> Result<f64> {
        self.check(r, rho)?;
        Ok(self.phi_unchecked(r, rho))
    }

    fn phi_unchecked(&self, r: f64, rho: f64) -> f64 {
        if self.is_trivial() {
            return 0.0;
        }
        let start = r.signum() * self.onset;
        integrate(|s| self.derivs_unchecked(s, rho).g, start, r, QUAD_TOL)
    }

    /// d_rho Phi(r, rho).
    pub fn dphi_drho(&self, r: f64, rho: f64) -> Result<f64> {
        self.check(r, rho)?;
        if self.is_trivial() {
            return Ok(0.0);
        }
        let start = r.signum() * self.onset;
        Ok(integrate(|s| self.derivs_unchecked(s, rho).g_rho, start, r, QUAD_TOL))
    }

    /// Remainder R[Phi](r, rho) = (1 + a) s(rho + d_r Phi) + lambda k - s(rho).
    pub fn remainder(&self, r: f64, rho: f64) -> Result<f64> {
        self.check(r, rho)?;
        Ok(self.remainder_at_level(r, rho, self.n_iters))
    }

    pub fn remainder_at_level(&self, r: f64, rho: f64, level: usize) -> f64 {
        let a = self.a1l.a1l_profile(r);
        let g = self.derivs_at_level(r, rho, level).g;
        let s = &self.dispersion;
        (1.0 + a) * s.diff(rho, g) + a * s.s(rho) + self.lambda * self.k.k(r.abs())
    }

    /// Tabulate e^{i Phi} on the grid for the given momentum runs, each a
    /// contiguous range [q0, q1) of DFT bins of a single sign. Cached.
    pub fn table(&self, grid: &Grid1D, runs: &[(usize, usize)]) -> Arc<PhaseTable> {
        let key: TableKey = (grid.n, grid.r_min.to_bits(), grid.h().to_bits(), runs.to_vec());
        if let Some((_, t)) = self.cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return t.clone();
        }
        let blocks = runs.iter().map(|&(q0, q1)| self.table_block(grid, q0, q1)).collect();
        let t = Arc::new(PhaseTable { grid: *grid, blocks });
        self.cache.lock().unwrap().push((key, t.clone()));
        t
    }

    fn table_block(&self, grid: &Grid1D, q0: usize, q1: usize) -> TableBlock {
        let rhos: Vec<f64> = (q0..q1).map(|q| grid.rho(q)).collect();
        let rho_sign = rhos.first().map(|x| x.signum()).unwrap_or(1.0);
        // rows on the side where sign * r * rho > 0
        let side = self.sign.value() * rho_sign;
        let rows: Vec<usize> = (0..grid.n).filter(|&j| side * grid.r(j) > self.onset).collect();
        let (row0, nrows) = match (rows.first(), rows.last()) {
            (Some(&a), Some(&b)) => (a, b - a + 1),
            _ => (0, 0),
        };
        let nq = rhos.len();
        let mut exp_phi = vec![Complex64::new(1.0, 0.0); nrows * nq];
        if self.is_trivial() || nrows == 0 {
            return TableBlock { q0, rhos, row0, rows: nrows, exp_phi };
        }
        let cols: Vec<Vec<f64>> = rhos
            .par_iter()
            .map(|&rho| {
                let mut col = vec![0.0; nrows];
                if rho.abs() < self.window.0 || rho.abs() > self.window.1 {
                    return col;
                }
                // integrate outward from the onset, node to node
                let g = |s: f64| self.derivs_unchecked(s, rho).g;
                let order: Vec<usize> = if side > 0.0 {
                    (0..nrows).collect()
                } else {
                    (0..nrows).rev().collect()
                };
                let mut prev_r = side * self.onset;
                let mut acc = 0.0;
                for idx in order {
                    let r = grid.r(row0 + idx);
                    acc += integrate(g, prev_r, r, QUAD_TOL * 1e-2);
                    prev_r = r;
                    col[idx] = acc;
                }
                col
            })
            .collect();
        for (q, col) in cols.iter().enumerate() {
            for (j, &phi) in col.iter().enumerate() {
                exp_phi[j * nq + q] = Complex64::from_polar(1.0, phi);
            }
        }
        TableBlock { q0, rhos, row0, rows: nrows, exp_phi }
    }

    /// CSV rows (r, rho, Phi, d_r Phi, R[Phi]) over the given samples.
    pub fn write_csv<W: Write>(&self, mut w: W, rs: &[f64], rhos: &[f64]) -> Result<()> {
        writeln!(w, "r,rho,phi,dphi_dr,remainder")?;
        for &rho in rhos {
            for &r in rs {
                if !self.in_domain(r, rho) {
                    continue;
                }
                let phi = self.phi_unchecked(r, rho);
                let g = self.derivs_unchecked(r, rho).g;
                let rem = self.remainder_at_level(r, rho, self.n_iters);
                writeln!(w, "{r:.10e},{rho:.10e},{phi:.16e},{g:.16e},{rem:.16e}")?;
            }
        }
        Ok(())
    }
}

/// Least-squares fit of log f against log r.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub residual: f64,
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<DecayFit> {
    if points.len() < 2 {
        return Err(Error::InvalidModel("log-log fit needs two points".into()));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(r, v) in points {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositiveSample { r, value: v });
        }
        xs.push(r.ln());
        ys.push(v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(DecayFit { slope, intercept, residual })
}

/// Log-log slope of f sampled at n log-spaced points of [r_lo, r_hi].
pub fn estimate_decay(f: impl Fn(f64) -> f64, r_lo: f64, r_hi: f64, n: usize) -> Result<DecayFit> {
    if !(r_lo > 0.0) || !(r_hi > r_lo) || n < 2 {
        return Err(Error::InvalidModel(format!("decay fit range [{r_lo}, {r_hi}] with {n} samples")));
    }
    let step = (r_hi / r_lo).ln() / (n - 1) as f64;
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let r = r_lo * (step * i as f64).exp();
            (r, f(r))
        })
        .collect();
    fit_loglog(&pts)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemainderReport {
    pub slope_hat: f64,
    pub epsilon_expected: f64,
    pub fit_residual: f64,
}

/// Decay of |R[Phi](r, rho)| over r in [r_lo, r_hi] on the phase's own side.
pub fn remainder_report(
    phase: &PhaseFunction,
    rho: f64,
    r_lo: f64,
    r_hi: f64,
    n: usize,
) -> Result<RemainderReport> {
    let n = n.max(50);
    let side = phase.sign.value() * rho.signum();
    phase.check(side * r_lo, rho)?;
    let fit = estimate_decay(|r| phase.remainder_at_level(side * r, rho, phase.n_iters).abs(), r_lo, r_hi, n)?;
    let nu = phase.nu;
    let epsilon_expected = nu * ((1.0 / nu).floor() + 1.0) - 1.0;
    Ok(RemainderReport { slope_hat: fit.slope, epsilon_expected, fit_residual: fit.residual })
}
