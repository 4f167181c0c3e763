//! Compressed commutator i[L, A] on a spectral window around 1, at two grid
//! sizes.

use scatterlab::assemble::{assemble_a, assemble_l0};
use scatterlab::grid::Grid1D;
use scatterlab::model::{Bump, CrossSection, CutoffSpec, ScalingFunction, SpectralWindow};
use scatterlab::spectral::mourre_form_check;

fn main() -> scatterlab::Result<()> {
    let k = ScalingFunction::power(1.0);
    let cs = CrossSection::new(1);
    let cut = CutoffSpec::new(2.0, Bump::new(0.95, 1.05, 0.02));
    let window = SpectralWindow::new(0.9, 1.1);
    for n in [500, 1000] {
        let g = Grid1D::half_line_h(0.25, n);
        let l = assemble_l0(&g, &k, &cs)?;
        let a = assemble_a(&g, cs.n_modes(), &cut)?;
        let rep = mourre_form_check(&l, &a, &window, 0.1, 10)?;
        println!(
            "n = {n:5}: alpha_hat {:.4}, violated {} of {}, floor min(2,c0)(1 - eps) = 0.9",
            rep.alpha_hat, rep.violated_dim, rep.window_dim
        );
    }
    Ok(())
}
