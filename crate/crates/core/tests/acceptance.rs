//! Acceptance run: one PASS/FAIL line per criterion. Heavy criteria run in
//! sequence on purpose; each one sizes its grid so packets stay clear of the
//! boundary guard over the horizon used.

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use scatterlab::assemble::{
    assemble_a, assemble_l, assemble_l0, assemble_radiation_multiplier, weight_g0, weight_g1, weight_g2,
};
use scatterlab::config::ScenarioConfig;
use scatterlab::eigen::hermitian_eigen;
use scatterlab::fourier::FourierPlan;
use scatterlab::grid::{Grid1D, WaveField};
use scatterlab::model::{
    validate_scaling, Bump, CoeffName, Coefficient, CrossSection, CutoffSpec, PerturbationCoeffs, ScalingFunction,
    SpectralWindow, ThetaSeries, R_CLIP,
};
use scatterlab::phase::{build_phase, remainder_report, Dispersion, PhaseParams, Sign};
use scatterlab::propagator::{chebyshev_filter, make_packet, stable_dt, Propagator};
use scatterlab::runner::{composition_study, run_config};
use scatterlab::scattering::{
    build_modifier, chain_rule_check, completeness_probe, cook_wave_operator, filter_reference, half_line_partner,
    isometry_defect, modified_wave_operator, random_filtered_states, CookOptions, Dynamics, Identifier,
};
use scatterlab::spectral::{
    embedded_eigen_scan, kato_smoothness_integral, lap_resolvent_sup, mourre_form_check, radiation_inequality_check,
    GKind, KatoWeight,
};

type Outcome = scatterlab::Result<(bool, String)>;

// criterion 1
const SCALING_TOL: f64 = 1e-6;
// criterion 2
const SLOPE_TOL: f64 = 0.05;
const REMAINDER_REL_TOL: f64 = 1e-10;
// criterion 3
const MOURRE_FLOOR: f64 = 0.9;
const MOURRE_SLACK: f64 = 0.05;
const MOURRE_BUDGET: usize = 10;
// criterion 4
const LAP_PLATEAU: f64 = 0.10;
const LAP_CONTROL_GROWTH: f64 = 1.5;
// criterion 5
const RADIATION_C_MAX: f64 = 1e3;
const RADIATION_MARGIN: f64 = 1e-8;
// criterion 6
const KATO_PLATEAU: f64 = 0.01;
// criterion 7
const SR_EXPONENT: f64 = -1.1;
const SR_ISOMETRY: f64 = 1e-3;
const SR_WRONG_SIGN: f64 = 1e-2;
const SR_CHAIN: f64 = 5e-3;
const SR_COMPLETENESS: f64 = 0.98;
const SR_ENSEMBLE: usize = 8;
// criterion 8: the Cook stopping tolerance is pinned at 1e-2 here
const LR_TOL: f64 = 1e-2;
const LR_ISOMETRY: f64 = 1e-2;
const LR_WRONG_SIGN: f64 = 2e-2;
// criterion 9
const COMPOSE_GAIN: f64 = 1.5;
// criterion 10
const CN_UNITARITY: f64 = 1e-10;
const CN_STEPS: usize = 10_000;

fn c1_scaling() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let c = validate_scaling(&ScalingFunction::power(alpha), 1.0, 1e4, 2000)?;
        // k = r^-a: -r k'/k = a and r^2 k''/k = a (a + 1) identically
        for err in [c.c0_hat - alpha, c.c_hat - alpha, c.c2_hat - alpha * (alpha + 1.0)] {
            worst = worst.max(err.abs());
            ok &= err.abs() <= SCALING_TOL;
        }
    }
    Ok((ok, format!("max |error| {worst:.1e} over alpha in {{0.5, 1, 2}}")))
}

fn c2_phase() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for nu in [0.6, 0.4] {
        let params = PhaseParams {
            lambda: 1.0,
            onset: 2.0,
            nu,
            window: (1.0, 3.0),
            sign: Sign::Plus,
            dispersion: Dispersion::Continuum,
        };
        let phase = build_phase(&ScalingFunction::power(nu), &PerturbationCoeffs::zero(), &params)?;
        let rep = remainder_report(&phase, 2.0, 20.0, 2000.0, 200)?;
        ok &= (rep.slope_hat + 1.2).abs() <= SLOPE_TOL;
        notes.push(format!("nu={nu}: slope {:.4}", rep.slope_hat));
        if nu == 0.6 {
            // one iterate: R = (rho - k / (2 rho))^2 + k - rho^2 = k^2 / (4 rho^2)
            let mut worst = 0.0f64;
            for &(r, rho) in &[(3.0f64, 1.5f64), (40.0, 2.0), (700.0, 2.5), (1900.0, 1.1)] {
                let k = r.powf(-nu);
                let want = k * k / (4.0 * rho * rho);
                worst = worst.max((phase.remainder(r, rho)? - want).abs() / want);
            }
            ok &= worst <= REMAINDER_REL_TOL;
            notes.push(format!("N=1 closed form rel {worst:.1e}"));
        }
    }
    Ok((ok, notes.join(", ")))
}

fn c3_mourre() -> Outcome {
    let k = ScalingFunction::power(1.0);
    let cs = CrossSection::new(1);
    let cut = CutoffSpec::new(2.0, Bump::new(0.95, 1.05, 0.02));
    let window = SpectralWindow::new(0.9, 1.1);
    let mut reps = Vec::new();
    for n in [1000, 2000] {
        let g = Grid1D::half_line_h(0.25, n);
        let l = assemble_l0(&g, &k, &cs)?;
        let a = assemble_a(&g, cs.n_modes(), &cut)?;
        reps.push((n * cs.n_modes(), mourre_form_check(&l, &a, &window, 0.1, MOURRE_BUDGET)?));
    }
    let (_, base) = &reps[0];
    let (_, fine) = &reps[1];
    let ok = base.alpha_hat >= MOURRE_FLOOR - MOURRE_SLACK
        && base.violated_dim <= MOURRE_BUDGET
        && fine.violated_dim <= base.violated_dim;
    Ok((
        ok,
        reps.iter()
            .map(|(d, r)| format!("dim {d}: alpha_hat {:.3}, violated {}", r.alpha_hat, r.violated_dim))
            .collect::<Vec<_>>()
            .join("; "),
    ))
}

fn c4_lap() -> Outcome {
    let g = Grid1D::half_line_h(0.25, 4000);
    let k = ScalingFunction::power(1.0);
    let cs = CrossSection::new(0);
    let free = assemble_l0(&g, &k, &cs)?;
    let pert = assemble_l(&g, &k, &cs, &PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, 0.5, 2.5)))?;
    let etas = [0.4, 0.2, 0.1, 0.05, 0.025];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, l) in [("free", &free), ("V", &pert)] {
        let good = lap_resolvent_sup(l, 1.0, 1.0, &etas, 4, 7)?;
        let control = lap_resolvent_sup(l, 1.0, 0.4, &etas, 4, 7)?;
        let growth = control.curve.last().unwrap() / control.curve[0];
        ok &= good.last_change < LAP_PLATEAU && etas.iter().all(|&e| e > good.floor) && growth >= LAP_CONTROL_GROWTH;
        notes.push(format!("{name}: s=1 last change {:.3}, s=0.4 growth x{growth:.2}", good.last_change));
    }
    Ok((ok, notes.join("; ")))
}

fn c5_radiation() -> Outcome {
    let k = ScalingFunction::power(1.0);
    let cut = CutoffSpec::new(2.0, Bump::new(0.7, 1.3, 0.2));
    let coupled = Coefficient {
        name: CoeffName::V,
        c: 0.3,
        nu: 2.5,
        theta: ThetaSeries::real(&[(0, 1.0, 0.0), (1, 0.5, 0.2)]),
    };
    let generic = PerturbationCoeffs::zero().with(coupled).with(Coefficient::radial(CoeffName::B1, 0.2, 2.2));
    let cases = [
        ("E=0", Grid1D::half_line_h(0.1, 1000), CrossSection::new(2), PerturbationCoeffs::zero()),
        ("generic E", Grid1D::half_line_h(0.2, 600), CrossSection::new(1), generic),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, g, cs, coeffs) in cases {
        let modes = cs.n_modes();
        let l = assemble_l(&g, &k, &cs, &coeffs)?;
        let m = assemble_radiation_multiplier(&g, modes, &cut)?;
        let rep = radiation_inequality_check(
            &l,
            &m,
            &weight_g0(&g, modes, 1.0),
            &weight_g1(&g, modes, 1.0, &cut)?,
            &weight_g2(&g, &k, &cs, &cut),
            k.c0_bound,
            0.1,
            RADIATION_C_MAX,
            4,
            1,
        )?;
        ok &= rep.c_hat <= RADIATION_C_MAX && rep.worst_margin <= RADIATION_MARGIN;
        notes.push(format!("{name}: C {:.2}, margin {:.1e}", rep.c_hat, rep.worst_margin));
    }
    Ok((ok, notes.join("; ")))
}

fn c6_kato() -> Outcome {
    let g = Grid1D::half_line_h(0.25, 8001);
    let k = ScalingFunction::power(1.5);
    let cs = CrossSection::new(1);
    let psi = Bump::new(3.0, 5.0, 0.5);
    let cut = CutoffSpec::new(2.0, psi);
    let l = assemble_l0(&g, &k, &cs)?;
    let packet = make_packet(12.0, 2.0, 1.5, g, &[C::default(), C::default(), C::new(1.0, 0.0)])?;
    let mut u = chebyshev_filter(&l, &packet, |x| psi.eval(x), 2000)?;
    u.normalize();
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, kind) in [("G0", GKind::G0 { s: 1.0 }), ("G1", GKind::G1 { s: 1.0 }), ("G2", GKind::G2)] {
        let w = KatoWeight::new(kind, &l, &k, &cs, &cut)?;
        let rep = kato_smoothness_integral(&l, &w, &u, 320.0, stable_dt(&[&l]))?;
        ok &= rep.plateau_ratio < KATO_PLATEAU && rep.bound_hat > 0.0;
        notes.push(format!("{name} {:.1e}", rep.plateau_ratio));
    }
    // a bound state never leaves the weight's support: linear growth
    let small = Grid1D::half_line_h(0.25, 400);
    let radial = CrossSection::new(0);
    let well = PerturbationCoeffs::zero().with(Coefficient::radial(CoeffName::V, -30.0, 3.0));
    let lw = assemble_l(&small, &k, &radial, &well)?;
    let b = &hermitian_eigen(&lw)?[0];
    let v = WaveField::from_values(small, 1, b.global_vector(0, lw.dim()))?;
    let w = KatoWeight::new(GKind::G0 { s: 1.0 }, &lw, &k, &radial, &cut)?;
    let control = kato_smoothness_integral(&lw, &w, &v, 40.0, 0.005)?;
    ok &= !control.pass;
    notes.push(format!("eigenvector control ratio {:.2}", control.plateau_ratio));
    Ok((ok, notes.join(", ")))
}

fn mover(g: Grid1D, plan: &FourierPlan, rho0: f64, sign: Sign, profile: &[C], r0: f64, filter: Bump) -> scatterlab::Result<WaveField> {
    let u = make_packet(r0, sign.value() * rho0, 3.0, g, profile)?;
    let mut u = filter_reference(plan, &u, &filter, sign)?;
    u.normalize();
    Ok(u)
}

fn c7_short_range() -> Outcome {
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
    let prof = [C::new(0.6, 0.0), C::new(0.5, 0.0), C::new(0.0, 0.4)];
    let filter = Bump::new(6.25, 12.25, 1.0);

    let u = mover(full, &plan, 3.0, Sign::Plus, &prof, 15.0, filter)?;
    let res = cook_wave_operator(&l, &h0, &Identifier::Embedding, &u, &CookOptions::new(50.0, dt))?;
    let exponent = res.exponent.unwrap_or(f64::INFINITY);
    let iso = isometry_defect(&res, &u);

    let v = mover(full, &plan, 3.0, Sign::Minus, &prof, 15.0, filter)?;
    let wrong = cook_wave_operator(&l, &h0, &Identifier::Embedding, &v, &CookOptions::new(50.0, dt))?.w.norm();

    let chain = chain_rule_check(&l, &l0, &h0, &Identifier::Embedding, &u, 30.0, dt, Sign::Plus)?;

    let g = Grid1D::half_line_h(0.2, 3501);
    let radial = CrossSection::new(0);
    let lc = assemble_l(&g, &k, &radial, &coeffs)?;
    let psi = Bump::new(2.0, 4.0, 0.5);
    let known = embedded_eigen_scan(&lc, 1.5, 4.5)?;
    let states = random_filtered_states(&lc, &psi, SR_ENSEMBLE, 1.0, 20.0, 3, 1500)?;
    let probe = completeness_probe(
        &lc,
        &SpectralWindow::new(1.0, 5.0),
        &known,
        &states,
        60.0,
        dt,
        20.0 + 1.5f64.sqrt() * 60.0,
        Sign::Plus,
    )?;

    let ok = exponent < SR_EXPONENT
        && iso < SR_ISOMETRY
        && wrong < SR_WRONG_SIGN
        && chain.defect < SR_CHAIN
        && probe.mean >= SR_COMPLETENESS;
    Ok((
        ok,
        format!(
            "exponent {exponent:.3}, isometry {iso:.1e}, wrong sign {wrong:.1e}, chain {:.1e}, completeness {:.4}",
            chain.defect, probe.mean
        ),
    ))
}

fn c8_long_range() -> Outcome {
    let full = Grid1D::full_line(8192, 0.2);
    let half = half_line_partner(&full)?;
    let cs = CrossSection::new(1);
    let k = ScalingFunction::power(0.6);
    let coeffs = PerturbationCoeffs::zero();
    let l = assemble_l(&half, &k, &cs, &coeffs)?;
    let plan = FourierPlan::new(full)?;
    let h0 = Dynamics::FreeLattice(plan.clone());
    let cut = CutoffSpec::new(5.0, Bump::new(6.25, 12.25, 1.0));
    let jj = build_modifier(&full, &k, &coeffs, &cs, &cut, &SpectralWindow::new(4.0, 16.0), Sign::Plus, 0.6, 0.25)?;
    let prof = [C::default(), C::default(), C::new(1.0, 0.0)];
    let filter = Bump::new(7.0, 11.0, 0.5);
    let u = mover(full, &plan, 3.0, Sign::Plus, &prof, 20.0, filter)?;
    let v = mover(full, &plan, 3.0, Sign::Minus, &prof, 20.0, filter)?;
    let opts = CookOptions::new(50.0, 0.004).with_tol(LR_TOL);

    let plain = cook_wave_operator(&l, &h0, &Identifier::Embedding, &u, &opts)?;
    let p_plain = plain.exponent.unwrap_or(f64::NAN);
    let modi = modified_wave_operator(&l, &h0, &jj, &u, &opts)?;
    let iso = isometry_defect(&modi, &u);
    let wrong = modified_wave_operator(&l, &h0, &jj, &v, &opts)?.w.norm();
    let ok = !plain.converged && p_plain >= -1.0 && modi.converged && iso < LR_ISOMETRY && wrong < LR_WRONG_SIGN;
    Ok((
        ok,
        format!(
            "plain exponent {p_plain:.3} (converged {}), modified exponent {:.3} tail {:.1e}, isometry {iso:.1e}, wrong sign {wrong:.1e}",
            plain.converged,
            modi.exponent.unwrap_or(f64::NAN),
            modi.tail_estimate
        ),
    ))
}

fn c9_composition() -> Outcome {
    let study = composition_study(
        &ScalingFunction::power(0.6),
        &PerturbationCoeffs::zero(),
        1.0,
        &CutoffSpec::new(2.0, Bump::new(4.0, 9.0, 1.0)),
        &SpectralWindow::new(2.25, 12.25),
        &Grid1D::full_line(16384, 0.1),
        &[20.0, 40.0, 80.0, 160.0],
        2.5,
        5.0,
    )?;
    let rows = &study.rows;
    let decreasing = rows.windows(2).all(|w| w[1].one_term < w[0].one_term && w[1].two_term < w[0].two_term);
    let gains = study.gap_gains();
    let ok = study.two_beats_one() && decreasing && gains.iter().all(|&g| g >= COMPOSE_GAIN);
    let gains: Vec<String> = gains.iter().map(|g| format!("{g:.2}")).collect();
    Ok((ok, format!("ratio gains per doubling [{}]", gains.join(", "))))
}

/// L0 + V written out entry by entry: 3-point Laplacian, k(max(r, R_CLIP)) m^2,
/// mode coupling c_{m - m'} V(r), rows and columns of the end points removed.
fn dense_reference(g: &Grid1D, k: &ScalingFunction, cs: &CrossSection, v: &Coefficient) -> DMatrix<C> {
    let modes = cs.n_modes();
    let h2 = g.h() * g.h();
    let dim = g.n * modes;
    let mut d = DMatrix::<C>::zeros(dim, dim);
    for i in 1..g.n - 1 {
        let r = g.r(i);
        for j in 0..modes {
            let m = cs.mode(j) as f64;
            let row = i * modes + j;
            let kin = if m == 0.0 { 2.0 / h2 } else { 2.0 / h2 + k.k(r.max(R_CLIP)) * m * m };
            d[(row, row)] = C::new(kin, 0.0);
            for (nb, ok) in [(i - 1, i > 1), (i + 1, i + 2 < g.n)] {
                if ok {
                    d[(row, nb * modes + j)] = C::new(-1.0 / h2, 0.0);
                }
            }
            for l in 0..modes {
                let c = v.theta.coeff(cs.mode(j) - cs.mode(l)) * v.profile(r);
                d[(row, i * modes + l)] += c;
            }
        }
    }
    d
}

fn c10_infrastructure() -> Outcome {
    let mut notes = Vec::new();

    let g = Grid1D::half_line_h(0.1, 64);
    let k = ScalingFunction::power(1.0);
    let cs = CrossSection::new(1);
    let v = Coefficient { name: CoeffName::V, c: 0.7, nu: 2.0, theta: ThetaSeries::real(&[(0, 1.0, 0.0), (1, 0.5, 0.25)]) };
    let sparse = assemble_l(&g, &k, &cs, &PerturbationCoeffs::zero().with(v.clone()))?.to_dense();
    let dense = dense_reference(&g, &k, &cs, &v);
    let assembly = (&sparse - &dense).iter().map(|z| z.norm()).fold(0.0, f64::max);
    notes.push(format!("dense/sparse max diff {assembly:.1e}"));

    let g = Grid1D::half_line_h(0.25, 801);
    let l = assemble_l(&g, &ScalingFunction::power(1.5), &cs, &PerturbationCoeffs::zero().with(v.clone()))?;
    let u = make_packet(100.0, 1.5, 4.0, g, &[C::new(0.3, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.5)])?;
    // long enough to bounce off the wall, hence no leak guard
    let p = Propagator::new(&l, stable_dt(&[&l]))?.without_guard();
    let w = p.steps(&u, CN_STEPS)?;
    let unitarity = (w.norm() - u.norm()).abs();
    notes.push(format!("CN norm drift {unitarity:.1e} over {CN_STEPS} steps"));

    let dir = tempfile::tempdir().map_err(scatterlab::Error::from)?;
    let path = dir.path().join("field.bin");
    w.save(&path)?;
    let back = WaveField::load(&path)?;
    let roundtrip = back.grid == w.grid
        && back.modes == w.modes
        && back.values.iter().zip(&w.values).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
    notes.push(format!("round trip {}", if roundtrip { "bit-exact" } else { "differs" }));

    let cfg = ScenarioConfig::from_json(include_str!("../../../scenarios/lap.json"))?;
    let a = run_config(&cfg, dir.path())?;
    let b = run_config(&cfg, dir.path())?;
    let curves = |d: &std::path::Path| std::fs::read(d.join("curves/resolvent.csv")).map_err(scatterlab::Error::from);
    let deterministic = curves(&a.dir)? == curves(&b.dir)? && a.summary.metrics == b.summary.metrics;
    notes.push(format!("reruns {}", if deterministic { "identical" } else { "differ" }));

    Ok((assembly == 0.0 && unitarity < CN_UNITARITY && roundtrip && deterministic, notes.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("scaling validation", c1_scaling),
        ("phase-modifier decay", c2_phase),
        ("Mourre positivity", c3_mourre),
        ("limiting absorption", c4_lap),
        ("radiation estimate", c5_radiation),
        ("Kato smoothness", c6_kato),
        ("short-range wave operators", c7_short_range),
        ("long-range contrast and modifier", c8_long_range),
        ("oscillating-symbol calculus", c9_composition),
        ("infrastructure", c10_infrastructure),
    ];
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !only.is_empty() && !only.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let (pass, detail) = match f() {
            Ok(r) => r,
            Err(e) => (false, format!("error [{}]: {e}", e.code())),
        };
        failed += usize::from(!pass);
        println!(
            "criterion {n:>2} {}: {name} ({detail}) [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
