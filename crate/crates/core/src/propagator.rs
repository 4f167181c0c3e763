//! Time evolution: Crank-Nicolson for assembled operators, the exact momentum
//! multiplier for free dynamics, Gaussian packets and momentum-sign
//! projections.

use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::banded::BandedLu;
use crate::error::{Error, Result};
use crate::fourier::FourierPlan;
use crate::grid::{Grid1D, WaveField};
use crate::phase::{Dispersion, Sign};
use crate::sparse::{DiscreteOperator, TripletBuilder};

type C = Complex64;

/// Grid cells watched by the boundary guard.
pub const GUARD_CELLS: usize = 5;
/// Largest mass tolerated in the guard cells.
pub const LEAK_TOL: f64 = 1e-8;
/// Largest dt times the spectral radius bound.
pub const MAX_STEP_RADIUS: f64 = 0.5;

/// Drop the periodic wrap couplings of an operator on a full-line grid; the
/// boundary guard keeps fields away from the seam, so evolution never sees it.
fn unwrap_periodic(op: &DiscreteOperator) -> DiscreteOperator {
    if op.grid.is_half_line() {
        return op.clone();
    }
    let m = op.modes;
    let half = op.grid.n / 2;
    let mut t = TripletBuilder::new(op.dim());
    for i in 0..op.dim() {
        for (j, v) in op.row(i) {
            if (i / m).abs_diff(j / m) < half {
                t.add(i, j, v);
            }
        }
    }
    t.build(op.grid, op.modes, op.hermitian)
}

struct Block {
    /// Mode column, or None when all modes are solved together.
    mode: Option<usize>,
    op: DiscreteOperator,
    lu: BandedLu,
}

/// Crank-Nicolson stepper with cached factorisations for a fixed signed dt.
pub struct Propagator {
    pub grid: Grid1D,
    pub modes: usize,
    pub dt: f64,
    blocks: Vec<Block>,
    guard: bool,
}

impl std::fmt::Debug for Propagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Propagator")
            .field("grid", &self.grid)
            .field("modes", &self.modes)
            .field("dt", &self.dt)
            .field("blocks", &self.blocks.len())
            .finish()
    }
}

impl Propagator {
    pub fn new(h: &DiscreteOperator, dt: f64) -> Result<Self> {
        let radius = h.gershgorin_radius();
        if !(dt.abs() * radius <= MAX_STEP_RADIUS) || dt == 0.0 {
            return Err(Error::StepTooLarge(dt * radius));
        }
        let op = unwrap_periodic(h);
        let shift = C::new(0.0, 0.5 * dt);
        let blocks = if op.is_mode_diagonal() && op.modes > 1 {
            (0..op.modes)
                .into_par_iter()
                .map(|j| {
                    let b = op.mode_block(j);
                    let lu = BandedLu::factor_shifted(&b, C::new(1.0, 0.0), shift)?;
                    Ok(Block { mode: Some(j), op: b, lu })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            let lu = BandedLu::factor_shifted(&op, C::new(1.0, 0.0), shift)?;
            vec![Block { mode: None, op, lu }]
        };
        Ok(Propagator { grid: h.grid, modes: h.modes, dt, blocks, guard: true })
    }

    /// Disable the boundary guard (for negative controls that run into the wall).
    pub fn without_guard(mut self) -> Self {
        self.guard = false;
        self
    }

    fn step_block(&self, b: &Block, x: &mut Vec<C>, scratch: &mut Vec<C>) {
        scratch.resize(x.len(), C::default());
        b.op.matvec_slice(x, scratch);
        let c = C::new(0.0, -0.5 * self.dt);
        for (xi, hi) in x.iter_mut().zip(scratch.iter()) {
            *xi += c * hi;
        }
        b.lu.solve_in_place(x);
    }

    fn check(&self, u: &WaveField) -> Result<()> {
        if u.grid != self.grid || u.modes != self.modes {
            return Err(Error::DimensionMismatch(u.values.len(), self.grid.n * self.modes));
        }
        Ok(())
    }

    /// Advance `steps` steps, calling `observe(step, state)` after each one.
    pub fn run<F>(&self, u: &WaveField, steps: usize, mut observe: F) -> Result<WaveField>
    where
        F: FnMut(usize, &WaveField) -> Result<()>,
    {
        self.check(u)?;
        let mut out = u.clone();
        let n = self.grid.n;
        let m = self.modes;
        let mut cols: Vec<Vec<C>> = match self.blocks[0].mode {
            Some(_) => (0..m).map(|j| out.mode_column(j)).collect(),
            None => vec![out.values.clone()],
        };
        let mut scratch = vec![Vec::new(); cols.len()];
        for s in 1..=steps {
            cols.par_iter_mut()
                .zip(scratch.par_iter_mut())
                .zip(self.blocks.par_iter())
                .for_each(|((x, sc), b)| self.step_block(b, x, sc));
            let need_state = self.guard || s == steps;
            if need_state {
                match self.blocks[0].mode {
                    Some(_) => {
                        for (j, c) in cols.iter().enumerate() {
                            for i in 0..n {
                                out.values[i * m + j] = c[i];
                            }
                        }
                    }
                    None => out.values.copy_from_slice(&cols[0]),
                }
                if self.guard {
                    let mass = out.edge_mass(GUARD_CELLS);
                    if mass > LEAK_TOL {
                        return Err(Error::BoundaryLeak { mass, t: s as f64 * self.dt });
                    }
                }
            }
            observe(s, &out)?;
        }
        Ok(out)
    }

    pub fn steps(&self, u: &WaveField, steps: usize) -> Result<WaveField> {
        self.run(u, steps, |_, _| Ok(()))
    }
}

/// Largest step the Crank-Nicolson guard accepts for every operator given.
pub fn stable_dt(ops: &[&DiscreteOperator]) -> f64 {
    let radius = ops.iter().map(|h| h.gershgorin_radius()).fold(0.0, f64::max);
    MAX_STEP_RADIUS / radius * (1.0 - 1e-12)
}

/// Step count and signed step for reaching time t with |dt| at most `dt`.
pub fn step_plan(t: f64, dt: f64) -> (usize, f64) {
    if t == 0.0 {
        return (0, dt.abs());
    }
    let n = (t.abs() / dt.abs()).ceil().max(1.0) as usize;
    (n, t / n as f64)
}

/// e^{-itH} u by Crank-Nicolson with step at most dt.
pub fn evolve(h: &DiscreteOperator, u: &WaveField, t: f64, dt: f64) -> Result<WaveField> {
    let (n, step) = step_plan(t, dt);
    if n == 0 {
        return Ok(u.clone());
    }
    Propagator::new(h, step)?.steps(u, n)
}

/// Free evolution e^{-it s(D)} on the full line, exact in momentum.
pub fn evolve_free(plan: &FourierPlan, u: &WaveField, t: f64, disp: Dispersion) -> Result<WaveField> {
    if t == 0.0 {
        return Ok(u.clone());
    }
    plan.multiplier(u, |_, rho| C::from_polar(1.0, -t * disp.s(rho)))
}

/// Normalised Gaussian e^{i rho0 r} e^{-(r - r0)^2 / (4 width^2)} times the
/// mode profile.
pub fn make_packet(r0: f64, rho0: f64, width: f64, grid: Grid1D, profile: &[C]) -> Result<WaveField> {
    if !(width > 0.0) || profile.is_empty() {
        return Err(Error::InvalidModel(format!("packet width {width}")));
    }
    let lo = grid.r(0);
    let hi = grid.r(grid.n - 1);
    let d = (r0 - lo).min(hi - r0);
    let tail = if d <= 0.0 { 1.0 } else { (-d * d / (2.0 * width * width)).exp() };
    if tail > 1e-12 {
        return Err(Error::PacketClipped(tail));
    }
    let m = profile.len();
    let mut values = vec![C::default(); grid.n * m];
    for i in 0..grid.n {
        if grid.pinned(i) {
            continue;
        }
        let r = grid.r(i);
        let g = C::from_polar((-(r - r0).powi(2) / (4.0 * width * width)).exp(), rho0 * r);
        for (j, p) in profile.iter().enumerate() {
            values[i * m + j] = g * p;
        }
    }
    let mut u = WaveField::from_values(grid, m, values)?;
    u.normalize();
    Ok(u)
}

/// Projection onto H_f^+ (rho >= 0) or H_f^- (rho < 0).
pub fn project_sign(plan: &FourierPlan, u: &WaveField, sign: Sign) -> Result<WaveField> {
    plan.multiplier(u, |_, rho| {
        let keep = match sign {
            Sign::Plus => rho >= 0.0,
            Sign::Minus => rho < 0.0,
        };
        C::new(if keep { 1.0 } else { 0.0 }, 0.0)
    })
}

/// Spectral interval [lo, hi] containing the spectrum of a Hermitian operator.
pub fn spectral_bounds(h: &DiscreteOperator) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..h.dim() {
        let mut d = 0.0;
        let mut off = 0.0;
        for (j, v) in h.row(i) {
            if j == i {
                d = v.re;
            } else {
                off += v.norm();
            }
        }
        lo = lo.min(d - off);
        hi = hi.max(d + off);
    }
    (lo, hi)
}

/// f(H) u by a Chebyshev expansion of the given degree on the Gershgorin
/// interval; f should be smooth.
pub fn chebyshev_filter(
    h: &DiscreteOperator,
    u: &WaveField,
    f: impl Fn(f64) -> f64,
    degree: usize,
) -> Result<WaveField> {
    let (lo, hi) = spectral_bounds(h);
    let (c, half) = (0.5 * (hi + lo), 0.5 * (hi - lo) * 1.0001);
    let nodes = degree + 1;
    let fx: Vec<f64> = (0..nodes)
        .map(|k| {
            let th = std::f64::consts::PI * (k as f64 + 0.5) / nodes as f64;
            f(c + half * th.cos())
        })
        .collect();
    let coef: Vec<f64> = (0..=degree)
        .map(|j| {
            let s: f64 = fx
                .iter()
                .enumerate()
                .map(|(k, v)| v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / nodes as f64).cos())
                .sum();
            let a = 2.0 / nodes as f64 * s;
            if j == 0 {
                0.5 * a
            } else {
                a
            }
        })
        .collect();
    let apply = |x: &WaveField| -> Result<WaveField> {
        let mut y = h.apply(x)?;
        y.axpy(C::new(-c, 0.0), x);
        y.scale(C::new(1.0 / half, 0.0));
        Ok(y)
    };
    let mut t0 = u.clone();
    let mut out = u.scaled(C::new(coef[0], 0.0));
    if degree == 0 {
        return Ok(out);
    }
    let mut t1 = apply(u)?;
    out.axpy(C::new(coef[1], 0.0), &t1);
    for &a in &coef[2..] {
        let mut t2 = apply(&t1)?;
        t2.scale(C::new(2.0, 0.0));
        t2.axpy(C::new(-1.0, 0.0), &t0);
        out.axpy(C::new(a, 0.0), &t2);
        t0 = t1;
        t1 = t2;
    }
    Ok(out)
}

/// Write snapshots as fields/step_NNNNN.bin plus a times.csv index.
pub fn write_trajectory(dir: &Path, snaps: &[(f64, WaveField)]) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut idx = std::fs::File::create(dir.join("times.csv"))?;
    writeln!(idx, "index,t,file")?;
    for (k, (t, u)) in snaps.iter().enumerate() {
        let name = format!("step_{k:05}.bin");
        u.save(&dir.join(&name))?;
        writeln!(idx, "{k},{t:.12e},{name}")?;
    }
    Ok(())
}
