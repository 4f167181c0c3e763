//! Time-integrated weighted norms of an energy-filtered packet saturate;
//! the same integral for a bound state grows linearly.

use num_complex::Complex64 as C;
use scatterlab::assemble::{assemble_l, assemble_l0};
use scatterlab::eigen::hermitian_eigen;
use scatterlab::grid::{Grid1D, WaveField};
use scatterlab::model::{Bump, CoeffName, Coefficient, CrossSection, CutoffSpec, PerturbationCoeffs, ScalingFunction};
use scatterlab::propagator::{chebyshev_filter, make_packet, stable_dt};
use scatterlab::spectral::{kato_smoothness_integral, GKind, KatoWeight};

fn main() -> scatterlab::Result<()> {
    let g = Grid1D::half_line_h(0.25, 8001);
    let k = ScalingFunction::power(1.5);
    let cs = CrossSection::new(1);
    let psi = Bump::new(3.0, 5.0, 0.5);
    let cut = CutoffSpec::new(2.0, psi);
    let l = assemble_l0(&g, &k, &cs)?;
    let dt = stable_dt(&[&l]);
    // column 2 carries m = 1, so the angular weight G2 sees the packet
    let packet = make_packet(12.0, 2.0, 1.5, g, &[C::default(), C::default(), C::new(1.0, 0.0)])?;
    let mut u = chebyshev_filter(&l, &packet, |x| psi.eval(x), 2000)?;
    u.normalize();
    for kind in [GKind::G0 { s: 1.0 }, GKind::G1 { s: 1.0 }, GKind::G2] {
        let w = KatoWeight::new(kind, &l, &k, &cs, &cut)?;
        let rep = kato_smoothness_integral(&l, &w, &u, 320.0, dt)?;
        println!("{kind:?}: integral {:.4e}, plateau ratio {:.2e}, pass {}", rep.bound_hat, rep.plateau_ratio, rep.pass);
    }

    let small = Grid1D::half_line_h(0.25, 400);
    let well = PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, -30.0, 3.0));
    let lw = assemble_l(&small, &k, &CrossSection::new(0), &well)?;
    let b = &hermitian_eigen(&lw)?[0];
    let v = WaveField::from_values(small, 1, b.global_vector(0, lw.dim()))?;
    let w = KatoWeight::new(GKind::G0 { s: 1.0 }, &lw, &k, &CrossSection::new(0), &cut)?;
    let rep = kato_smoothness_integral(&lw, &w, &v, 40.0, 0.005)?;
    println!("bound state (E = {:.3}): plateau ratio {:.3}, pass {}", b.values[0], rep.plateau_ratio, rep.pass);
    Ok(())
}
