//! Worked examples through the public API.

use std::f64::consts::{FRAC_PI_2, PI};

use approx::assert_abs_diff_eq;

use softsqueeze::design::Derivative;
use softsqueeze::evolution::ZONE_BAND;
use softsqueeze::physical::{
    magnetic_amplitude, paul_voltages, radiative_ratio, rotating_cylinder_field,
    solenoid_coefficient,
};
use softsqueeze::{
    backcast_error, build_pulse, classify, compose, free_motion, gaussian_init, integrate,
    integrate_symmetric, monodromy, propagate, rotation_matrix, solve_theta_coeffs,
    squeeze_compose, squeezed_fourier, symmetric_product, theta_eval, validate_lemma,
    verify_design, BeltConvention, BetaProfile, CanonicalState, DesignedPulse, IntegratorConfig,
    PhysicalContext, SymplecticMatrix2, Tail, Zone,
};

fn cfg() -> IntegratorConfig {
    IntegratorConfig::default()
}

fn close(u: &SymplecticMatrix2, e: [f64; 4], tol: f64) {
    assert!(
        u.entries().iter().zip(e).all(|(a, b)| (a - b).abs() <= tol),
        "{u} vs {e:?}"
    );
}

#[test]
fn operation_algebra() {
    let f1 = squeezed_fourier(1.0).unwrap();
    close(&(f1 * f1), [-1.0, 0.0, 0.0, -1.0], 1e-15);
    let b0 = 5.0 / 7f64.sqrt();
    let t = squeezed_fourier(b0).unwrap() * squeezed_fourier(1.99).unwrap();
    close(&t, [-0.94966, 0.0, 0.0, -1.05301], 5e-6);
    close(
        &squeeze_compose(3.0, 1.0).unwrap(),
        [-1.0 / 3.0, 0.0, 0.0, -3.0],
        1e-15,
    );
    close(
        &rotation_matrix(2.0, PI / 4.0).unwrap(),
        [0.0, 0.5, -2.0, 0.0],
        1e-15,
    );
    close(
        &compose(&free_motion(3.0), &free_motion(2.0)),
        free_motion(5.0).entries(),
        0.0,
    );
    let v0 = rotation_matrix(1.0, 0.3).unwrap();
    let v1 = rotation_matrix(2.0, 0.2).unwrap();
    let sym = symmetric_product(&[v0, v1], 1e-12).unwrap();
    close(&sym, (v1 * v0 * v1).entries(), 1e-15);
}

#[test]
fn evolution_examples() {
    close(
        &integrate(&BetaProfile::constant(0.0), 0.0, 1.0, &cfg()).unwrap(),
        [1.0, 1.0, 0.0, 1.0],
        1e-12,
    );
    let quarter = integrate_symmetric(&BetaProfile::constant(1.0), PI / 4.0, &cfg()).unwrap();
    close(&quarter, [0.0, 1.0, -1.0, 0.0], 1e-12);
    let half = monodromy(&BetaProfile::constant(1.0), 0.3, PI, &cfg()).unwrap();
    close(&half, [-1.0, 0.0, 0.0, -1.0], 1e-12);
    let theta = BetaProfile::theta(solve_theta_coeffs(2.0, 0.0).unwrap(), 0.0);
    let u = integrate_symmetric(&theta, FRAC_PI_2, &cfg()).unwrap();
    close(&u, squeezed_fourier(2.0).unwrap().entries(), 1e-6);
}

#[test]
fn zone_of_printed_matrix() {
    let printed = SymplecticMatrix2::try_new(0.227570, 0.007556, 0.000447, 4.394266, 1e-5).unwrap();
    let z = classify(&printed, ZONE_BAND).unwrap();
    assert_eq!(z.zone, Zone::III);
    assert_abs_diff_eq!(z.gamma, 4.621836, epsilon = 1e-5);
    let g = z.gamma;
    let plus = (g + (g * g - 4.0).sqrt()) / 2.0;
    assert_abs_diff_eq!(
        z.eigenvalues[0].re.max(z.eigenvalues[1].re),
        plus,
        epsilon = 1e-12
    );
}

#[test]
fn theta_design_examples() {
    let th = solve_theta_coeffs(2.0, 0.0).unwrap();
    assert_abs_diff_eq!(th.a1(), 33.0 / 16.0, epsilon = 1e-14);
    assert_abs_diff_eq!(th.a3(), 1.0 / 32.0, epsilon = 1e-14);
    assert_abs_diff_eq!(th.a5(), -1.0 / 32.0, epsilon = 1e-14);
    assert_abs_diff_eq!(theta_eval(&th, 0.0, 3).unwrap(), 1.0, epsilon = 1e-13);
    assert_abs_diff_eq!(th.eval(FRAC_PI_2, Derivative::First), 0.0, epsilon = 1e-14);
    let p = BetaProfile::theta(th, 0.0);
    assert_abs_diff_eq!(p.eval(0.0).unwrap(), -0.125, epsilon = 1e-12);
    assert_abs_diff_eq!(p.eval(FRAC_PI_2).unwrap(), 0.0, epsilon = 1e-12);

    let fig4 = solve_theta_coeffs(1.99, 0.28).unwrap();
    assert!(fig4.condition_residuals().iter().all(|r| r.abs() < 1e-12));
    let report = validate_lemma(&fig4, (-FRAC_PI_2, FRAC_PI_2), 400).unwrap();
    assert!(report.passed());
    assert!(report.fourier_point_near(FRAC_PI_2, 1e-9).is_some());
}

#[test]
fn pulse_examples() {
    let tail = Tail::quarter_period(0.28).unwrap();
    assert_abs_diff_eq!(
        tail.duration,
        5.0 * PI / (2.0 * 7f64.sqrt()),
        epsilon = 1e-14
    );
    let pulse = build_pulse(&solve_theta_coeffs(1.99, 0.28).unwrap(), Some(tail)).unwrap();
    let report = verify_design(&pulse, &cfg()).unwrap();
    close(
        &report.stages[1].matrix,
        squeezed_fourier(5.0 / 7f64.sqrt()).unwrap().entries(),
        1e-6,
    );
    assert_abs_diff_eq!(report.lambda.unwrap(), -0.94966, epsilon = 1e-5);
    assert_abs_diff_eq!(report.amplification.unwrap(), 1.0530, epsilon = 1e-3);

    let wrong = Tail::quarter_period(0.3).unwrap();
    assert!(build_pulse(&solve_theta_coeffs(1.99, 0.28).unwrap(), Some(wrong)).is_err());
}

fn fig3() -> DesignedPulse {
    let p1 = build_pulse(&solve_theta_coeffs(5.0 / 3.0, 0.0).unwrap(), None).unwrap();
    let p2 = build_pulse(&solve_theta_coeffs(184.0 / 95.0, 0.0).unwrap(), None).unwrap();
    p1.then(&p2).unwrap()
}

#[test]
fn moment_examples() {
    let s = gaussian_init(2.0, 0.0, 0.0).unwrap();
    assert_abs_diff_eq!(s.cov.qq, 0.25);
    assert_abs_diff_eq!(s.cov.pp, 1.0);

    let pulse = fig3();
    let (a, b) = pulse.interval();
    assert_abs_diff_eq!(b, 1.5 * PI, epsilon = 1e-12);
    let u = integrate(pulse.profile(), a, b, &cfg()).unwrap();
    let s = propagate(&u, &gaussian_init(1.0, 1.0, 1.0).unwrap());
    assert_abs_diff_eq!(s.delta_q(), 1.16211 * 0.5f64.sqrt(), epsilon = 1e-3);
    let back = backcast_error(-1.16211, &[0.1]).unwrap();
    assert_abs_diff_eq!(back[0], 0.08605, epsilon = 1e-5);
}

#[test]
fn physical_examples() {
    let ctx = PhysicalContext::proton(10.0, 1.0).unwrap();
    assert_abs_diff_eq!(ctx.q_unit(), 0.025, epsilon = 5e-4);
    let fast = ctx.with_t_scale(1e-3).unwrap();
    assert_abs_diff_eq!(fast.q_unit(), 0.0008, epsilon = 1e-5);

    let v10 = paul_voltages(&ctx, 1.217, 0.844, 1e5).unwrap();
    let big = PhysicalContext::proton(100.0, 1.0).unwrap();
    let v100 = paul_voltages(&big, 1.217, 0.844, 1e5).unwrap();
    assert_abs_diff_eq!(v100.phi0 / v10.phi0, 100.0, epsilon = 1e-10);
    assert_abs_diff_eq!(v10.phi0, 1.268, epsilon = 5e-3);

    let b = magnetic_amplitude(&ctx, 0.587).unwrap();
    assert!((1.0e-4..2.0e-4).contains(&b), "{b}");

    let kappa: f64 = 2.0;
    let ratio = radiative_ratio(
        &BetaProfile::constant(kappa * kappa),
        (0.0, PI),
        CanonicalState::new(1.0, 0.0),
        &ctx,
        1.0,
        &cfg(),
    )
    .unwrap();
    assert_abs_diff_eq!(ratio, kappa, epsilon = 1e-4);

    assert_abs_diff_eq!(solenoid_coefficient(1), 1.0 / 8.0);
    assert_abs_diff_eq!(solenoid_coefficient(2), 1.0 / 192.0);
    let b1 = rotating_cylinder_field(1.0, 2.997_924_58e9, BeltConvention::Belt).unwrap();
    let b2 = rotating_cylinder_field(2.0, 2.997_924_58e9, BeltConvention::Belt).unwrap();
    assert_abs_diff_eq!(b1, 1.2556, epsilon = 1.2556e-2);
    assert_abs_diff_eq!(b2, 2.0 * b1, epsilon = 1e-14);
}

#[test]
fn json_round_trips() {
    let profiles = [
        r#"{"kind":"constant","beta":0.28}"#,
        r#"{"kind":"mathieu","beta0":1.217,"beta1":0.844}"#,
        r#"{"kind":"theta","theta":{"b":2.0,"beta0":0.0}}"#,
        r#"{"kind":"sampled","taus":[0,1,2,3],"values":[0,1,0,1]}"#,
    ];
    for text in profiles {
        let p: BetaProfile = serde_json::from_str(text).unwrap();
        let back: BetaProfile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(p, back, "{text}");
    }
    let pulse = fig3();
    let text = serde_json::to_string(&pulse).unwrap();
    let back: DesignedPulse = serde_json::from_str(&text).unwrap();
    assert_eq!(back, pulse);
    let cfg: IntegratorConfig =
        serde_json::from_str(r#"{"method":"adaptive","rel_tol":1e-10,"abs_tol":1e-12}"#).unwrap();
    assert_eq!(cfg, IntegratorConfig::adaptive(1e-10, 1e-12));
}
