//! Empirical scaling constants for k = r^-alpha, plus the decay class of a
//! mixed perturbation.

use scatterlab::model::{
    classify_perturbation, validate_scaling, CoeffName, Coefficient, PerturbationCoeffs, ScalingFunction,
};

fn main() -> scatterlab::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>12}", "alpha", "c0_hat", "c_hat", "c2_hat");
    for alpha in [0.5, 1.0, 2.0] {
        let c = validate_scaling(&ScalingFunction::power(alpha), 1.0, 1e4, 2000)?;
        println!("{alpha:>6} {:>12.8} {:>12.8} {:>12.8}", c.c0_hat, c.c_hat, c.c2_hat);
    }

    let k = ScalingFunction::power(0.6);
    let coeffs = PerturbationCoeffs::zero()
        .with(Coefficient::radial(CoeffName::V, 0.5, 2.5))
        .with(Coefficient::radial(CoeffName::B1, 0.2, 1.8));
    let class = classify_perturbation(&coeffs, &k)?;
    println!("\ndecay class for k = r^-0.6 with V and b1 terms:\n{class:#?}");
    Ok(())
}
