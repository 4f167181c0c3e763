//! Weighted resolvent norms as eta -> 0: bounded for s = 1, growing for s < 1/2.

use scatterlab::assemble::{assemble_l, assemble_l0};
use scatterlab::grid::Grid1D;
use scatterlab::model::{CoeffName, Coefficient, CrossSection, PerturbationCoeffs, ScalingFunction};
use scatterlab::spectral::lap_resolvent_sup;

fn main() -> scatterlab::Result<()> {
    let g = Grid1D::half_line_h(0.25, 2000);
    let k = ScalingFunction::power(1.0);
    let cs = CrossSection::new(0);
    let free = assemble_l0(&g, &k, &cs)?;
    let coeffs = PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, 0.5, 2.5));
    let pert = assemble_l(&g, &k, &cs, &coeffs)?;
    let etas = [0.4, 0.2, 0.1, 0.05];
    for (name, l) in [("free", &free), ("short-range", &pert)] {
        for s in [1.0, 0.4] {
            let rep = lap_resolvent_sup(l, 1.0, s, &etas, 4, 7)?;
            let curve: Vec<String> = rep.curve.iter().map(|v| format!("{v:.4}")).collect();
            println!("{name:12} s = {s}: [{}] plateau = {}", curve.join(", "), rep.plateau);
        }
    }
    Ok(())
}
