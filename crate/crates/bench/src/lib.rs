//! Shared inputs for the benchmarks.

use std::f64::consts::{FRAC_PI_2, PI};

use softsqueeze::{build_pulse, solve_theta_coeffs, BetaProfile, DesignedPulse, ScanRect};

pub fn squeezing_profile() -> BetaProfile {
    BetaProfile::mathieu(1.217, 0.844)
}

pub fn paul_interval() -> (f64, f64) {
    (FRAC_PI_2, 2.5 * PI)
}

/// Two designed stages with `b = 5/3` then `b = 184/95`.
pub fn two_stage_pulse() -> DesignedPulse {
    let first = build_pulse(&solve_theta_coeffs(5.0 / 3.0, 0.0).unwrap(), None).unwrap();
    let second = build_pulse(&solve_theta_coeffs(184.0 / 95.0, 0.0).unwrap(), None).unwrap();
    first.then(&second).unwrap()
}

pub fn small_rect(n: usize) -> ScanRect {
    ScanRect {
        beta0: (1.1, 1.3),
        beta1: (0.7, 0.9),
        n0: n,
        n1: n,
        ..ScanRect::default()
    }
}
