//! Assembly of the discretised operators L0, E, A, the radiation multiplier,
//! the Kato weights and the full-line reference operators.
//!
//! Row index of (grid point i, mode column j) is `i * modes + j`; mode column
//! j carries the angular number m = j - M.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{DomainKind, Grid1D};
use crate::model::{
    bracket, CoeffName, Coefficient, CrossSection, CutoffSpec, PerturbationCoeffs,
    ScalingFunction,
};
use crate::sparse::{DiscreteOperator, TripletBuilder};

type C = Complex64;

fn re(x: f64) -> C {
    C::new(x, 0.0)
}

/// Neighbour of i at offset +1 / -1, honouring periodic wrap.
fn neighbour(grid: &Grid1D, i: usize, forward: bool) -> Option<usize> {
    let n = grid.n;
    match (grid.kind, forward) {
        (DomainKind::FullLinePeriodic, true) => Some((i + 1) % n),
        (DomainKind::FullLinePeriodic, false) => Some((i + n - 1) % n),
        (DomainKind::HalfLineDirichlet, true) => (i + 1 < n).then_some(i + 1),
        (DomainKind::HalfLineDirichlet, false) => i.checked_sub(1),
    }
}

/// Edges (i, i+1) of the grid with their midpoint radius.
fn edges(grid: &Grid1D) -> Vec<(usize, usize, f64)> {
    let h = grid.h();
    let mut out: Vec<(usize, usize, f64)> =
        (0..grid.n - 1).map(|i| (i, i + 1, grid.r(i) + 0.5 * h)).collect();
    if grid.kind == DomainKind::FullLinePeriodic {
        out.push((grid.n - 1, 0, grid.r(grid.n - 1) + 0.5 * h));
    }
    out
}

/// Mode-coupling matrix of a theta series: entry (j, l) = c_{m_j - m_l}.
fn mode_matrix(coef: &Coefficient, cs: &CrossSection) -> Result<Vec<Vec<C>>> {
    let mm = cs.mode_cutoff as i64;
    if coef.theta.max_mode() > mm {
        return Err(Error::ModeOutOfRange { mode: coef.theta.max_mode(), cutoff: cs.mode_cutoff });
    }
    if !coef.theta.is_hermitian() {
        return Err(Error::NonHermitianCoeffs(coef.name.as_str()));
    }
    let modes = cs.n_modes();
    Ok((0..modes)
        .map(|j| (0..modes).map(|l| coef.theta.coeff(cs.mode(j) - cs.mode(l))).collect())
        .collect())
}

/// Adds the flux form D_f^* c D_f, D_f u = (u_{i+1} - u_i) / (i h), with a
/// mode-coupling matrix c(edge midpoint).
fn add_flux(
    t: &mut TripletBuilder,
    grid: &Grid1D,
    modes: usize,
    coef: impl Fn(f64, usize, usize) -> C,
) {
    let h2 = grid.h() * grid.h();
    for (a, b, mid) in edges(grid) {
        for j in 0..modes {
            for l in 0..modes {
                let c = coef(mid, j, l) / h2;
                if c == C::default() {
                    continue;
                }
                t.add(a * modes + j, a * modes + l, c);
                t.add(b * modes + j, b * modes + l, c);
                t.add(a * modes + j, b * modes + l, -c);
                t.add(b * modes + j, a * modes + l, -c);
            }
        }
    }
}

fn finish(t: TripletBuilder, grid: Grid1D, modes: usize) -> DiscreteOperator {
    let op = t.build(grid, modes, false).hermitize();
    if grid.is_half_line() {
        op.pin_dirichlet()
    } else {
        op
    }
}

fn require_half_line(grid: &Grid1D) -> Result<()> {
    if !grid.is_half_line() {
        return Err(Error::GridMismatch("operator lives on the half-line grid".into()));
    }
    Ok(())
}

/// Resolution scale h^2 M^2 k(r*) at the first grid point r* >= 1.
pub fn resolution_scale(grid: &Grid1D, k: &ScalingFunction, cs: &CrossSection) -> f64 {
    let h = grid.h();
    let r1 = (1.0 / h).ceil() * h;
    let m2 = (cs.mode_cutoff * cs.mode_cutoff) as f64;
    h * h * m2 * k.k_clipped(r1.max(1.0))
}

/// L0 = D_r^2 + k(r) P on the half line.
pub fn assemble_l0(grid: &Grid1D, k: &ScalingFunction, cs: &CrossSection) -> Result<DiscreteOperator> {
    require_half_line(grid)?;
    let scale = resolution_scale(grid, k, cs);
    if scale > 0.1 {
        return Err(Error::GridTooCoarse(scale));
    }
    let modes = cs.n_modes();
    let mut t = TripletBuilder::new(grid.n * modes);
    add_flux(&mut t, grid, modes, |_, j, l| if j == l { re(1.0) } else { C::default() });
    for i in 0..grid.n {
        let kr = k.k_clipped(grid.r(i));
        for j in 0..modes {
            let m = cs.mode(j);
            if m != 0 {
                t.add(i * modes + j, i * modes + j, re(kr * (m * m) as f64));
            }
        }
    }
    Ok(finish(t, *grid, modes))
}

/// Perturbation E in symmetric form.
pub fn assemble_e(
    grid: &Grid1D,
    coeffs: &PerturbationCoeffs,
    cs: &CrossSection,
    k: &ScalingFunction,
) -> Result<DiscreteOperator> {
    require_half_line(grid)?;
    let modes = cs.n_modes();
    let n = grid.n;
    let h = grid.h();
    let dc = C::new(0.0, -1.0 / (2.0 * h)); // 1 / (2 i h)
    let sqk = |r: f64| k.k_clipped(r).sqrt();
    let mut t = TripletBuilder::new(n * modes);
    for coef in coeffs.coeffs.iter().filter(|c| !c.is_zero()) {
        let cm = mode_matrix(coef, cs)?;
        match coef.name {
            CoeffName::V => {
                for i in 0..n {
                    let p = coef.profile(grid.r(i));
                    for j in 0..modes {
                        for l in 0..modes {
                            t.add(i * modes + j, i * modes + l, cm[j][l] * p);
                        }
                    }
                }
            }
            CoeffName::A1L | CoeffName::A1S => {
                add_flux(&mut t, grid, modes, |mid, j, l| cm[j][l] * coef.profile(mid));
            }
            CoeffName::A3 => {
                for i in 0..n {
                    let r = grid.r(i);
                    let p = coef.profile(r) * k.k_clipped(r);
                    for j in 0..modes {
                        for l in 0..modes {
                            let mm = (cs.mode(j) * cs.mode(l)) as f64;
                            t.add(i * modes + j, i * modes + l, cm[j][l] * (p * mm));
                        }
                    }
                }
            }
            CoeffName::B1 => {
                // b1 D_r + D_r b1 = Z + Z^dagger with Z = b1 D_c
                for i in 0..n {
                    let p = coef.profile(grid.r(i));
                    for (nb, s) in [(neighbour(grid, i, true), 1.0), (neighbour(grid, i, false), -1.0)] {
                        let Some(nb) = nb else { continue };
                        for j in 0..modes {
                            for l in 0..modes {
                                let z = cm[j][l] * p * dc * s;
                                t.add(i * modes + j, nb * modes + l, z);
                                t.add(nb * modes + l, i * modes + j, z.conj());
                            }
                        }
                    }
                }
            }
            CoeffName::B2 => {
                // Y = b2 sqrt(k) D_theta, plus adjoint
                for i in 0..n {
                    let r = grid.r(i);
                    let p = coef.profile(r) * sqk(r);
                    for j in 0..modes {
                        for l in 0..modes {
                            let y = cm[j][l] * (p * cs.mode(l) as f64);
                            t.add(i * modes + j, i * modes + l, y);
                            t.add(i * modes + l, i * modes + j, y.conj());
                        }
                    }
                }
            }
            CoeffName::A2 => {
                // X = D_c a2 sqrt(k) D_theta, plus adjoint
                for i in 0..n {
                    for (nb, s) in [(neighbour(grid, i, true), 1.0), (neighbour(grid, i, false), -1.0)] {
                        let Some(nb) = nb else { continue };
                        let r = grid.r(nb);
                        let p = coef.profile(r) * sqk(r);
                        for j in 0..modes {
                            for l in 0..modes {
                                let x = dc * s * cm[j][l] * (p * cs.mode(l) as f64);
                                t.add(i * modes + j, nb * modes + l, x);
                                t.add(nb * modes + l, i * modes + j, x.conj());
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(finish(t, *grid, modes))
}

/// L = L0 + E.
pub fn assemble_l(
    grid: &Grid1D,
    k: &ScalingFunction,
    cs: &CrossSection,
    coeffs: &PerturbationCoeffs,
) -> Result<DiscreteOperator> {
    let l0 = assemble_l0(grid, k, cs)?;
    if coeffs.is_zero() {
        return Ok(l0);
    }
    let e = assemble_e(grid, coeffs, cs, k)?;
    Ok(l0.add(&e)?.hermitize())
}

/// (g D_c + D_c g) / 2 for a real profile g, replicated over modes.
pub fn symmetrized_derivative(grid: &Grid1D, modes: usize, g: impl Fn(f64) -> f64) -> DiscreteOperator {
    let h = grid.h();
    let mut t = TripletBuilder::new(grid.n * modes);
    for (a, b, _) in edges(grid) {
        let w = (g(grid.r(a)) + g(grid.r(b))) / (4.0 * h);
        if w == 0.0 {
            continue;
        }
        let v = C::new(0.0, -w); // w / i
        for j in 0..modes {
            t.add(a * modes + j, b * modes + j, v);
            t.add(b * modes + j, a * modes + j, v.conj());
        }
    }
    finish(t, *grid, modes)
}

/// Conjugate operator A = (chi_R^2 r D_r + D_r r chi_R^2) / 2.
pub fn assemble_a(grid: &Grid1D, modes: usize, cutoff: &CutoffSpec) -> Result<DiscreteOperator> {
    require_half_line(grid)?;
    if cutoff.r < 2.0 * grid.h() {
        return Err(Error::InvalidModel(format!(
            "cutoff radius {} is below two grid cells",
            cutoff.r
        )));
    }
    Ok(symmetrized_derivative(grid, modes, |r| {
        let c = cutoff.chi_r(r);
        c * c * r
    }))
}

/// Radiation multiplier M = (chi_R D_r + D_r chi_R) / 2.
pub fn assemble_radiation_multiplier(grid: &Grid1D, modes: usize, cutoff: &CutoffSpec) -> Result<DiscreteOperator> {
    require_half_line(grid)?;
    Ok(symmetrized_derivative(grid, modes, |r| cutoff.chi_r(r)))
}

/// i (L A - A L).
pub fn commutator_ila(l: &DiscreteOperator, a: &DiscreteOperator) -> Result<DiscreteOperator> {
    l.commutator_i(a)
}

/// Centered derivative D_c = -i d/dr (not symmetrised; Hermitian on a
/// uniform grid).
pub fn centered_derivative(grid: &Grid1D, modes: usize) -> DiscreteOperator {
    symmetrized_derivative(grid, modes, |_| 2.0)
}

/// G0 = <r>^(-s) as a diagonal operator (zero on pinned points).
pub fn weight_g0(grid: &Grid1D, modes: usize, s: f64) -> DiscreteOperator {
    DiscreteOperator::diagonal(*grid, modes, |i, _| {
        if grid.pinned(i) {
            C::default()
        } else {
            re(bracket(grid.r(i)).powf(-s))
        }
    })
}

/// G1 = chi_R <r>^(-s) D_r.
pub fn weight_g1(grid: &Grid1D, modes: usize, s: f64, cutoff: &CutoffSpec) -> Result<DiscreteOperator> {
    let w = DiscreteOperator::diagonal(*grid, modes, |i, _| {
        let r = grid.r(i);
        if grid.pinned(i) {
            C::default()
        } else {
            re(cutoff.chi_r(r) * bracket(r).powf(-s))
        }
    });
    w.mul(&centered_derivative(grid, modes))
}

/// G2 = chi_R <r>^(-1/2) (k P)^(1/2).
pub fn weight_g2(grid: &Grid1D, k: &ScalingFunction, cs: &CrossSection, cutoff: &CutoffSpec) -> DiscreteOperator {
    DiscreteOperator::diagonal(*grid, cs.n_modes(), |i, j| {
        let r = grid.r(i);
        if grid.pinned(i) {
            C::default()
        } else {
            re(cutoff.chi_r(r) * bracket(r).powf(-0.5) * k.k_clipped(r).sqrt() * cs.mode(j).abs() as f64)
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reference {
    /// D_r^2
    H0,
    /// D_r^2 + k(|r|) P
    Hk,
    /// D_r (1 + a1L) D_r + k(|r|) P
    HL,
}

/// Reference operators on the full line R x N.
pub fn assemble_reference(
    grid: &Grid1D,
    k: &ScalingFunction,
    cs: &CrossSection,
    coeffs: &PerturbationCoeffs,
    which: Reference,
) -> Result<DiscreteOperator> {
    if grid.kind != DomainKind::FullLinePeriodic {
        return Err(Error::GridMismatch("reference operators live on the full-line grid".into()));
    }
    if grid.n < 16 {
        return Err(Error::GridTooSmall(format!("{} points", grid.n)));
    }
    let modes = cs.n_modes();
    if which != Reference::H0 && cs.mode_cutoff > 0 {
        let fold = grid.r_max.min(-grid.r_min);
        let jump = k.dk_clipped(fold).abs();
        if !(jump <= 1e-3) {
            return Err(Error::GridTooSmall(format!(
                "slope of k at the periodic fold r = {fold} is {jump:.3e}"
            )));
        }
    }
    let mut t = TripletBuilder::new(grid.n * modes);
    let with_a1 = which == Reference::HL;
    add_flux(&mut t, grid, modes, |mid, j, l| {
        if j != l {
            return C::default();
        }
        let a = if with_a1 { coeffs.a1l_profile(mid) } else { 0.0 };
        re(1.0 + a)
    });
    if which != Reference::H0 {
        for i in 0..grid.n {
            let kr = k.k_clipped(grid.r(i));
            for j in 0..modes {
                let m = cs.mode(j);
                if m != 0 {
                    t.add(i * modes + j, i * modes + j, re(kr * (m * m) as f64));
                }
            }
        }
    }
    Ok(finish(t, *grid, modes))
}
