//! A channel with long-range coupling k = r^-0.6: the plain two-space Cook
//! integral decays too slowly, the phase-modified identifier fixes it.

use num_complex::Complex64 as C;
use scatterlab::assemble::assemble_l;
use scatterlab::fourier::FourierPlan;
use scatterlab::grid::Grid1D;
use scatterlab::model::{Bump, CrossSection, CutoffSpec, PerturbationCoeffs, ScalingFunction, SpectralWindow};
use scatterlab::phase::Sign;
use scatterlab::propagator::make_packet;
use scatterlab::scattering::{
    build_modifier, cook_wave_operator, filter_reference, half_line_partner, isometry_defect, modified_wave_operator,
    CookOptions, CookResult, Dynamics, Identifier,
};

fn report(name: &str, r: &CookResult, defect: f64) {
    println!(
        "{name:10} exponent {:+.3}, tail {:.2e}, isometry defect {:.2e}, converged {}",
        r.exponent.unwrap_or(f64::NAN),
        r.tail_estimate,
        defect,
        r.converged
    );
}

fn main() -> scatterlab::Result<()> {
    let full = Grid1D::full_line(8192, 0.2);
    let half = half_line_partner(&full)?;
    let cs = CrossSection::new(1);
    let k = ScalingFunction::power(0.6);
    let coeffs = PerturbationCoeffs::zero();
    let l = assemble_l(&half, &k, &cs, &coeffs)?;
    let plan = FourierPlan::new(full)?;
    let h0 = Dynamics::FreeLattice(plan.clone());
    let cut = CutoffSpec::new(5.0, Bump::new(6.25, 12.25, 1.0));
    let window = SpectralWindow::new(4.0, 16.0);
    let jj = build_modifier(&full, &k, &coeffs, &cs, &cut, &window, Sign::Plus, 0.6, 0.25)?;

    // packet on the m = 1 channel, where k P does not vanish
    let u = make_packet(20.0, 3.0, 4.0, full, &[C::default(), C::default(), C::new(1.0, 0.0)])?;
    let mut u = filter_reference(&plan, &u, &Bump::new(7.0, 11.0, 0.5), Sign::Plus)?;
    u.normalize();
    let opts = CookOptions::new(40.0, 0.004).with_tol(2e-2);

    let plain = cook_wave_operator(&l, &h0, &Identifier::Embedding, &u, &opts)?;
    report("plain J", &plain, isometry_defect(&plain, &u));
    let modi = modified_wave_operator(&l, &h0, &jj, &u, &opts)?;
    report("J J+", &modi, isometry_defect(&modi, &u));

    let v = make_packet(20.0, -3.0, 4.0, full, &[C::default(), C::default(), C::new(1.0, 0.0)])?;
    let mut v = filter_reference(&plan, &v, &Bump::new(7.0, 11.0, 0.5), Sign::Minus)?;
    v.normalize();
    let wrong = modified_wave_operator(&l, &h0, &jj, &v, &opts)?;
    println!("J J+ on a left mover: |W u| = {:.2e}", wrong.w.norm());
    Ok(())
}
