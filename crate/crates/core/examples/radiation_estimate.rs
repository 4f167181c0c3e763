//! Smallest constant certifying the radiation form inequality, per channel.

use scatterlab::assemble::{assemble_l, assemble_radiation_multiplier, weight_g0, weight_g1, weight_g2};
use scatterlab::grid::Grid1D;
use scatterlab::model::{Bump, CoeffName, Coefficient, CrossSection, CutoffSpec, PerturbationCoeffs, ScalingFunction};
use scatterlab::spectral::radiation_inequality_check;

fn main() -> scatterlab::Result<()> {
    let g = Grid1D::half_line_h(0.1, 1000);
    let k = ScalingFunction::power(1.0);
    let cs = CrossSection::new(2);
    let modes = cs.n_modes();
    let cut = CutoffSpec::new(2.0, Bump::new(0.7, 1.3, 0.2));
    let m = assemble_radiation_multiplier(&g, modes, &cut)?;
    let g0 = weight_g0(&g, modes, 1.0);
    let g1 = weight_g1(&g, modes, 1.0, &cut)?;
    let g2 = weight_g2(&g, &k, &cs, &cut);
    for (name, coeffs) in [
        ("E = 0", PerturbationCoeffs::zero()),
        ("V = 0.3 <r>^-2.5", PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, 0.3, 2.5))),
    ] {
        let l = assemble_l(&g, &k, &cs, &coeffs)?;
        let rep = radiation_inequality_check(&l, &m, &g0, &g1, &g2, k.c0_bound, 0.1, 1e3, 4, 1)?;
        let per: Vec<String> = rep.per_block.iter().map(|c| format!("{c:.2}")).collect();
        println!("{name:18} C = {:.3} per channel [{}], worst margin {:.1e}", rep.c_hat, per.join(", "), rep.worst_margin);
    }
    Ok(())
}
