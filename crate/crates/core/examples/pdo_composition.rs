//! Composition of a differential symbol with an oscillating operator: the
//! two-term expansion beats the one-term one, and the gap widens as the
//! packets move out.

use scatterlab::grid::Grid1D;
use scatterlab::model::{Bump, CutoffSpec, PerturbationCoeffs, ScalingFunction, SpectralWindow};
use scatterlab::runner::composition_study;

fn main() -> scatterlab::Result<()> {
    let nu = 0.6;
    let study = composition_study(
        &ScalingFunction::power(nu),
        &PerturbationCoeffs::zero(),
        1.0,
        &CutoffSpec::new(2.0, Bump::new(4.0, 9.0, 1.0)),
        &SpectralWindow::new(2.25, 12.25),
        &Grid1D::full_line(16384, 0.1),
        &[20.0, 40.0, 80.0, 160.0],
        2.5,
        5.0,
    )?;
    println!("{:>6} {:>12} {:>12} {:>8}", "R", "one-term", "two-term", "ratio");
    for r in &study.rows {
        println!("{:>6} {:>12.3e} {:>12.3e} {:>8.4}", r.radius, r.one_term, r.two_term, r.two_term / r.one_term);
    }
    println!("gain per doubling: {:?}", study.gap_gains());
    Ok(())
}
