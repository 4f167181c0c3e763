//! Build the long-range phase by successive approximation and measure how
//! fast its eikonal remainder decays. Writes a plot-ready CSV to stdout with
//! `-- --csv`.

use scatterlab::model::{PerturbationCoeffs, ScalingFunction};
use scatterlab::phase::{build_phase, iteration_count, remainder_report, Dispersion, PhaseParams, Sign};

fn main() -> scatterlab::Result<()> {
    let csv = std::env::args().any(|a| a == "--csv");
    let rho = 2.0;
    let mut last = None;
    for nu in [0.6, 0.4] {
        let k = ScalingFunction::power(nu);
        let params = PhaseParams {
            lambda: 1.0,
            onset: 2.0,
            nu,
            window: (1.0, 3.0),
            sign: Sign::Plus,
            dispersion: Dispersion::Continuum,
        };
        let phase = build_phase(&k, &PerturbationCoeffs::zero(), &params)?;
        let rep = remainder_report(&phase, rho, 20.0, 2000.0, 200)?;
        if !csv {
            println!(
                "nu = {nu}: N = {}, slope {:.4}, expected {:.4} (fit residual {:.1e})",
                iteration_count(nu)?,
                rep.slope_hat,
                -1.0 - rep.epsilon_expected,
                rep.fit_residual
            );
        }
        last = Some(phase);
    }
    if csv {
        let rs: Vec<f64> = (0..100).map(|i| 20.0 * 100f64.powf(i as f64 / 99.0)).collect();
        last.unwrap().write_csv(&mut std::io::stdout().lock(), &rs, &[1.5, 2.0, 2.5])?;
    }
    Ok(())
}
