//! Random states in the spectral window escape to infinity: the fraction of
//! mass beyond the free-propagation front after time t.

use scatterlab::assemble::assemble_l;
use scatterlab::grid::Grid1D;
use scatterlab::model::{Bump, CoeffName, Coefficient, CrossSection, PerturbationCoeffs, ScalingFunction, SpectralWindow};
use scatterlab::phase::Sign;
use scatterlab::scattering::{completeness_probe, random_filtered_states};
use scatterlab::spectral::embedded_eigen_scan;

fn main() -> scatterlab::Result<()> {
    let g = Grid1D::half_line_h(0.2, 3501);
    let k = ScalingFunction::power(1.5);
    let cs = CrossSection::new(0);
    let coeffs = PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, 0.5, 2.5));
    let l = assemble_l(&g, &k, &cs, &coeffs)?;
    let psi = Bump::new(2.0, 4.0, 0.5);
    let window = SpectralWindow::new(1.0, 5.0);
    let known = embedded_eigen_scan(&l, 1.5, 4.5)?;
    println!("localized eigenvalues in the window: {}", known.iter().filter(|c| c.localized).count());
    let states = random_filtered_states(&l, &psi, 8, 1.0, 20.0, 3, 1500)?;
    let (t, r_escape) = (60.0, 20.0 + 1.5f64.sqrt() * 60.0);
    let rep = completeness_probe(&l, &window, &known, &states, t, 0.004, r_escape, Sign::Plus)?;
    println!("escaped fraction beyond r = {r_escape:.1}: mean {:.4}, per state {:.4?}", rep.mean, rep.ratios);
    Ok(())
}
