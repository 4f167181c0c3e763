//! Two-space wave operators for a short-range perturbation by Cook's method:
//! convergence rate, isometry, annihilation of the wrong direction and the
//! chain rule through L0.

use num_complex::Complex64 as C;
use scatterlab::assemble::{assemble_l, assemble_l0};
use scatterlab::fourier::FourierPlan;
use scatterlab::grid::{Grid1D, WaveField};
use scatterlab::model::{Bump, CoeffName, Coefficient, CrossSection, PerturbationCoeffs, ScalingFunction};
use scatterlab::phase::Sign;
use scatterlab::propagator::make_packet;
use scatterlab::scattering::{
    chain_rule_check, cook_wave_operator, filter_reference, half_line_partner, isometry_defect, CookOptions, Dynamics,
    Identifier,
};

fn mover(g: Grid1D, plan: &FourierPlan, sign: Sign) -> scatterlab::Result<WaveField> {
    let prof = [C::new(0.6, 0.0), C::new(0.5, 0.0), C::new(0.0, 0.4)];
    let u = make_packet(15.0, sign.value() * 3.0, 3.0, g, &prof)?;
    let mut u = filter_reference(plan, &u, &Bump::new(6.25, 12.25, 1.0), sign)?;
    u.normalize();
    Ok(u)
}

fn main() -> scatterlab::Result<()> {
    let full = Grid1D::full_line(4096, 0.2);
    let half = half_line_partner(&full)?;
    let k = ScalingFunction::power(1.5);
    let cs = CrossSection::new(1);
    let coeffs = PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, 0.5, 2.5));
    let l = assemble_l(&half, &k, &cs, &coeffs)?;
    let l0 = assemble_l0(&half, &k, &cs)?;
    let plan = FourierPlan::new(full)?;
    let h0 = Dynamics::FreeLattice(plan.clone());
    let dt = 0.004;

    let u = mover(full, &plan, Sign::Plus)?;
    let res = cook_wave_operator(&l, &h0, &Identifier::Embedding, &u, &CookOptions::new(50.0, dt).with_tol(0.1))?;
    println!(
        "W+ u: exponent {:.3}, tail {:.2e}, isometry defect {:.2e}, converged {}",
        res.exponent.unwrap_or(f64::NAN),
        res.tail_estimate,
        isometry_defect(&res, &u),
        res.converged
    );

    let v = mover(full, &plan, Sign::Minus)?;
    let wrong = cook_wave_operator(&l, &h0, &Identifier::Embedding, &v, &CookOptions::new(50.0, dt))?;
    println!("W+ on a left mover: |W u| = {:.2e}", wrong.w.norm());

    let chain = chain_rule_check(&l, &l0, &h0, &Identifier::Embedding, &u, 30.0, dt, Sign::Plus)?;
    println!("chain rule defect {:.2e} at horizons {:?}", chain.defect, chain.horizons);
    Ok(())
}
