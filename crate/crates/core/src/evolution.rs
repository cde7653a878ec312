//! Integration of `du/dtau = Lambda(tau) u`, `Lambda = [[0, 1], [-beta, 0]]`,
//! its symmetric-interval form `du/dtau = Lambda u + u Lambda`, monodromy
//! and zone classification.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::profile::BetaProfile;
use crate::symplectic::{CanonicalState, SymplecticMatrix2, INTEGRATED_DET_TOL};

/// Default fixed RK4 steps per integration interval.
pub const DEFAULT_STEPS: usize = 20_000;
/// Default half-width of the zone II band around `|Gamma| = 2`.
pub const ZONE_BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "lowercase")]
pub enum Method {
    /// Classical RK4 with `steps` equal steps over the whole interval.
    Rk4 { steps: usize },
    /// Dormand-Prince 5(4) with error control.
    Adaptive { rel_tol: f64, abs_tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    #[serde(flatten)]
    pub method: Method,
    /// Hard cap on accepted plus rejected steps.
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self::rk4(DEFAULT_STEPS)
    }
}

impl IntegratorConfig {
    pub fn rk4(steps: usize) -> Self {
        Self {
            method: Method::Rk4 { steps },
            max_steps: 10_000_000,
        }
    }

    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            method: Method::Adaptive { rel_tol, abs_tol },
            max_steps: 10_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            Method::Rk4 { steps: 0 } => Err(invalid("RK4 needs steps > 0")),
            Method::Rk4 { steps } if steps > self.max_steps => Err(invalid(format!(
                "RK4 steps {steps} exceed max_steps {}",
                self.max_steps
            ))),
            Method::Adaptive { rel_tol, abs_tol } if !(rel_tol > 0.0 && abs_tol > 0.0) => {
                Err(invalid("adaptive tolerances must be > 0"))
            }
            _ => Ok(()),
        }
    }
}

type State = [f64; 4];

fn axpy(y: &State, h: f64, k: &State) -> State {
    [
        y[0] + h * k[0],
        y[1] + h * k[1],
        y[2] + h * k[2],
        y[3] + h * k[3],
    ]
}

/// `Lambda u` for `y = [u11, u12, u21, u22]`.
fn forward_rhs(profile: &BetaProfile) -> impl Fn(f64, &State, f64) -> Result<State> + '_ {
    move |t, y, hint| {
        let beta = profile.eval_near(t, hint)?;
        Ok([y[2], y[3], -beta * y[0], -beta * y[1]])
    }
}

/// `Lambda u + u Lambda`.
fn anticommutator_rhs(profile: &BetaProfile) -> impl Fn(f64, &State, f64) -> Result<State> + '_ {
    move |t, y, hint| {
        let beta = profile.eval_near(t, hint)?;
        let diag = y[2] - beta * y[1];
        let sum = y[0] + y[3];
        Ok([diag, sum, -beta * sum, diag])
    }
}

fn rk4_step<F>(f: &F, t: f64, y: &State, h: f64, hint: f64) -> Result<State>
where
    F: Fn(f64, &State, f64) -> Result<State>,
{
    let k1 = f(t, y, hint)?;
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1), hint)?;
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2), hint)?;
    let k4 = f(t + h, &axpy(y, h, &k3), hint)?;
    Ok(std::array::from_fn(|i| {
        y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
    }))
}

fn rk4<F>(f: &F, y0: State, a: f64, b: f64, steps: usize) -> Result<State>
where
    F: Fn(f64, &State, f64) -> Result<State>,
{
    let h = (b - a) / steps as f64;
    let hint = 0.5 * (a + b);
    let mut y = y0;
    for i in 0..steps {
        let t = a + h * i as f64;
        let hi = if i + 1 == steps { b - t } else { h };
        y = rk4_step(f, t, &y, hi, hint)?;
    }
    Ok(y)
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const DP_B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Returns the final state and the number of steps attempted.
fn dopri<F>(
    f: &F,
    y0: State,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    budget: usize,
) -> Result<(State, usize)>
where
    F: Fn(f64, &State, f64) -> Result<State>,
{
    let len = b - a;
    let hint = 0.5 * (a + b);
    let mut h = len / 100.0;
    let h_min = 1e-14 * len.abs().max(1.0);
    let mut t = a;
    let mut y = y0;
    let mut attempts = 0;
    while t < b {
        if attempts >= budget {
            return Err(Error::Integration {
                tau: t,
                reason: format!("max_steps exhausted after {attempts} steps"),
            });
        }
        attempts += 1;
        h = h.min(b - t);
        let mut k = [[0.0; 4]; 7];
        for s in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys = axpy(&ys, h * DP_A[s][j], kj);
            }
            k[s] = f(t + DP_C[s] * h, &ys, hint)?;
        }
        let mut y_new = y;
        let mut err: f64 = 0.0;
        for i in 0..4 {
            let incr: f64 = (0..7).map(|s| DP_B[s] * k[s][i]).sum();
            let e: f64 = (0..7).map(|s| DP_E[s] * k[s][i]).sum();
            y_new[i] = y[i] + h * incr;
            let scale = abs_tol + rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max((h * e).abs() / scale);
        }
        if !err.is_finite() {
            return Err(Error::Integration {
                tau: t,
                reason: "non-finite state".into(),
            });
        }
        if err <= 1.0 {
            t = if b - t <= h { b } else { t + h };
            y = y_new;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if h < h_min && t < b {
            return Err(Error::Integration {
                tau: t,
                reason: format!("step size underflow (h = {h:e})"),
            });
        }
    }
    Ok((y, attempts))
}

/// States at each of the ascending `nodes`, starting from the identity at
/// `nodes[0]`. RK4 steps are shared among segments in proportion to length.
fn drive_nodes<F>(f: &F, nodes: &[f64], cfg: &IntegratorConfig) -> Result<Vec<State>>
where
    F: Fn(f64, &State, f64) -> Result<State>,
{
    cfg.validate()?;
    let mut y = SymplecticMatrix2::IDENTITY.entries();
    let mut out = Vec::with_capacity(nodes.len());
    out.push(y);
    let total = nodes[nodes.len() - 1] - nodes[0];
    let mut used = 0;
    for w in nodes.windows(2) {
        let (s, e) = (w[0], w[1]);
        if e > s {
            match cfg.method {
                Method::Rk4 { steps } => {
                    let n = ((steps as f64 * (e - s) / total).round() as usize).max(1);
                    used += n;
                    if used > cfg.max_steps {
                        return Err(Error::Integration {
                            tau: s,
                            reason: format!("max_steps {} exceeded", cfg.max_steps),
                        });
                    }
                    y = rk4(f, y, s, e, n)?;
                }
                Method::Adaptive { rel_tol, abs_tol } => {
                    let (next, n) = dopri(f, y, s, e, rel_tol, abs_tol, cfg.max_steps - used)?;
                    used += n;
                    y = next;
                }
            }
        }
        out.push(y);
    }
    Ok(out)
}

/// Integrates `f` from `a` to `b`, restarting at `breaks`.
fn drive<F>(f: &F, a: f64, b: f64, breaks: &[f64], cfg: &IntegratorConfig) -> Result<State>
where
    F: Fn(f64, &State, f64) -> Result<State>,
{
    let mut nodes = Vec::with_capacity(breaks.len() + 2);
    nodes.push(a);
    nodes.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    nodes.push(b);
    let states = drive_nodes(f, &nodes, cfg)?;
    Ok(states[states.len() - 1])
}

fn checked(y: State, tau: f64) -> Result<SymplecticMatrix2> {
    let u = SymplecticMatrix2::from_array(y);
    if !u.is_finite() {
        return Err(Error::Integration {
            tau,
            reason: "non-finite matrix entries".into(),
        });
    }
    let drift = (u.det() - 1.0).abs();
    if drift > INTEGRATED_DET_TOL {
        return Err(Error::DeterminantDrift {
            drift,
            tolerance: INTEGRATED_DET_TOL,
        });
    }
    Ok(u)
}

fn check_domain(profile: &BetaProfile, tau: f64) -> Result<()> {
    if profile.contains(tau) {
        Ok(())
    } else {
        let (start, end) = profile.domain();
        Err(Error::Domain { tau, start, end })
    }
}

/// `u(tau1, tau0)`.
pub fn integrate(
    profile: &BetaProfile,
    tau0: f64,
    tau1: f64,
    cfg: &IntegratorConfig,
) -> Result<SymplecticMatrix2> {
    if !(tau0.is_finite() && tau1.is_finite()) || tau1 < tau0 {
        return Err(invalid(format!(
            "need finite tau0 <= tau1, got [{tau0}, {tau1}]"
        )));
    }
    check_domain(profile, tau0)?;
    check_domain(profile, tau1)?;
    if tau1 == tau0 {
        return Ok(SymplecticMatrix2::IDENTITY);
    }
    let rhs = forward_rhs(profile);
    let y = drive(&rhs, tau0, tau1, &profile.breakpoints(tau0, tau1), cfg)?;
    checked(y, tau1)
}

/// Running matrices `u(grid[i], grid[0])` for an ascending grid, from one
/// sweep whose RK4 step budget covers the whole grid span.
pub fn integrate_path(
    profile: &BetaProfile,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<SymplecticMatrix2>> {
    if grid.is_empty() {
        return Err(invalid("empty tau grid"));
    }
    if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(invalid("tau grid must be finite and ascending"));
    }
    let (first, last) = (grid[0], grid[grid.len() - 1]);
    check_domain(profile, first)?;
    check_domain(profile, last)?;
    if first == last {
        return Ok(vec![SymplecticMatrix2::IDENTITY; grid.len()]);
    }
    let mut nodes: Vec<(f64, bool)> = grid.iter().map(|&t| (t, true)).collect();
    nodes.extend(
        profile
            .breakpoints(first, last)
            .into_iter()
            .filter(|t| grid.binary_search_by(|g| g.total_cmp(t)).is_err())
            .map(|t| (t, false)),
    );
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let taus: Vec<f64> = nodes.iter().map(|n| n.0).collect();
    let rhs = forward_rhs(profile);
    let states = drive_nodes(&rhs, &taus, cfg)?;
    nodes
        .iter()
        .zip(states)
        .filter(|(n, _)| n.1)
        .map(|(n, y)| checked(y, n.0))
        .collect()
}

/// `u(tau, -tau)` from the anticommutator equation, for `beta` even about 0.
pub fn integrate_symmetric(
    profile: &BetaProfile,
    tau: f64,
    cfg: &IntegratorConfig,
) -> Result<SymplecticMatrix2> {
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(invalid(format!(
            "symmetric half-width must be >= 0, got {tau}"
        )));
    }
    check_domain(profile, -tau)?;
    check_domain(profile, tau)?;
    if tau == 0.0 {
        return Ok(SymplecticMatrix2::IDENTITY);
    }
    const SAMPLES: usize = 64;
    for i in 0..=SAMPLES {
        let s = tau * i as f64 / SAMPLES as f64;
        let (bp, bm) = (profile.eval(s)?, profile.eval(-s)?);
        let gap = (bp - bm).abs();
        if gap > 1e-9 * bp.abs().max(1.0) {
            return Err(Error::NotSymmetric { tau: s, gap });
        }
    }
    let mut breaks: Vec<f64> = profile
        .breakpoints(-tau, tau)
        .into_iter()
        .map(f64::abs)
        .filter(|&t| t > 0.0 && t < tau)
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let rhs = anticommutator_rhs(profile);
    let y = drive(&rhs, 0.0, tau, &breaks, cfg)?;
    checked(y, tau)
}

/// `u(tau0 + period, tau0)` after checking periodicity of the profile.
pub fn monodromy(
    profile: &BetaProfile,
    tau0: f64,
    period: f64,
    cfg: &IntegratorConfig,
) -> Result<SymplecticMatrix2> {
    if !(period > 0.0) || !period.is_finite() {
        return Err(invalid(format!("period must be > 0, got {period}")));
    }
    const SAMPLES: usize = 32;
    for i in 0..=SAMPLES {
        let t = tau0 + period * i as f64 / SAMPLES as f64;
        for (x, y) in [(t, t + period), (t - period, t)] {
            if profile.contains(x) && profile.contains(y) {
                let (bx, by) = (profile.eval(x)?, profile.eval(y)?);
                let gap = (bx - by).abs();
                if gap > 1e-9 * bx.abs().max(1.0) {
                    return Err(Error::NotPeriodic {
                        period,
                        tau: x,
                        gap,
                    });
                }
            }
        }
    }
    integrate(profile, tau0, tau0 + period, cfg)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Zone {
    /// `|Gamma| < 2`: stable, complex unimodular eigenvalues.
    I,
    /// `|Gamma| = 2` within the band: threshold.
    II,
    /// `|Gamma| > 2`: real reciprocal eigenvalues, squeezing.
    III,
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Zone::I => "I",
            Zone::II => "II",
            Zone::III => "III",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZoneReport {
    pub gamma: f64,
    pub zone: Zone,
    /// `(lambda+, lambda-)` with `lambda± = Gamma/2 ± sqrt(Gamma²/4 - 1)`.
    pub eigenvalues: [Complex64; 2],
    /// Left eigenvectors `(a+, a-)` in zone III, scaled so that
    /// `a+ J a-ᵀ = 1` with `J = [[0, 1], [-1, 0]]`.
    pub axes: Option<[[f64; 2]; 2]>,
}

/// Left eigenvector of `u` for the real eigenvalue `lambda`, unit length.
fn left_eigenvector(u: &SymplecticMatrix2, lambda: f64) -> [f64; 2] {
    let c1 = [u.u21(), lambda - u.u11()];
    let c2 = [lambda - u.u22(), u.u12()];
    let n1 = c1[0].hypot(c1[1]);
    let n2 = c2[0].hypot(c2[1]);
    let (v, n) = if n1 >= n2 { (c1, n1) } else { (c2, n2) };
    let mut a = [v[0] / n, v[1] / n];
    let lead = if a[0] != 0.0 { a[0] } else { a[1] };
    if lead < 0.0 {
        a = [-a[0], -a[1]];
    }
    a
}

pub fn classify(u: &SymplecticMatrix2, band: f64) -> Result<ZoneReport> {
    if !(band >= 0.0) {
        return Err(invalid("zone band must be >= 0"));
    }
    let det = u.det();
    if !u.is_finite() || (det - 1.0).abs() > 1e-6 {
        return Err(Error::NotSymplectic { det });
    }
    let gamma = u.trace();
    let half = 0.5 * gamma;
    let disc = half * half - 1.0;
    let zone = if (gamma.abs() - 2.0).abs() <= band {
        Zone::II
    } else if gamma.abs() < 2.0 {
        Zone::I
    } else {
        Zone::III
    };
    let (eigenvalues, axes) = if disc < 0.0 {
        let im = (-disc).sqrt();
        ([Complex64::new(half, im), Complex64::new(half, -im)], None)
    } else {
        let root = disc.sqrt();
        let big = half + half.signum() * root;
        let small = 1.0 / big;
        let (plus, minus) = if gamma >= 0.0 {
            (big, small)
        } else {
            (small, big)
        };
        let axes = (zone == Zone::III).then(|| {
            let ap = left_eigenvector(u, plus);
            let mut am = left_eigenvector(u, minus);
            let mut pairing = ap[0] * am[1] - ap[1] * am[0];
            if pairing < 0.0 {
                am = [-am[0], -am[1]];
                pairing = -pairing;
            }
            let s = pairing.sqrt().recip();
            [[ap[0] * s, ap[1] * s], [am[0] * s, am[1] * s]]
        });
        (
            [Complex64::new(plus, 0.0), Complex64::new(minus, 0.0)],
            axes,
        )
    };
    Ok(ZoneReport {
        gamma,
        zone,
        eigenvalues,
        axes,
    })
}

pub fn apply_to_state(u: &SymplecticMatrix2, s: CanonicalState) -> CanonicalState {
    CanonicalState::new(u.u11() * s.q + u.u12() * s.p, u.u21() * s.q + u.u22() * s.p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{beta_from_theta, solve_theta_coeffs, Derivative};
    use crate::profile::{Interpolation, Piece};
    use crate::symplectic::{free_motion, rotation_matrix, squeezed_fourier};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn cfg() -> IntegratorConfig {
        IntegratorConfig::default()
    }

    #[test]
    fn closed_form_examples() {
        let u = integrate(&BetaProfile::constant(0.0), 0.0, 1.0, &cfg()).unwrap();
        assert!(u.max_abs_diff(&free_motion(1.0)) < 1e-12);
        let u = integrate(&BetaProfile::constant(1.0), 0.0, FRAC_PI_2, &cfg()).unwrap();
        assert!(u.max_abs_diff(&squeezed_fourier(1.0).unwrap()) < 1e-12);
        let hyper = integrate(&BetaProfile::constant(-1.0), 0.0, 1.0, &cfg()).unwrap();
        assert_abs_diff_eq!(hyper.u11(), 1f64.cosh(), epsilon = 1e-12);
        assert_abs_diff_eq!(hyper.u12(), 1f64.sinh(), epsilon = 1e-12);
    }

    /// Frozen values from an independent scipy DOP853 run at rtol 1e-12.
    #[test]
    fn mathieu_interval_matrices_match_reference() {
        let cases = [
            (
                (1.217, 0.844),
                [0.22604473, -0.07208895, 0.096338, 4.39317958],
            ),
            (
                (1.054, 0.646),
                [0.34305613, -1.16341015, 0.05373848, 2.73273091],
            ),
            (
                (1.577, 1.231),
                [0.26046873, 3.40708005, 0.15620761, 5.88251743],
            ),
            (
                (1.774, 1.454),
                [0.36634326, 5.36359249, 0.15387087, 4.98248725],
            ),
        ];
        for ((b0, b1), want) in cases {
            let u = integrate(&BetaProfile::mathieu(b0, b1), FRAC_PI_2, 2.5 * PI, &cfg()).unwrap();
            for (got, want) in u.entries().iter().zip(want) {
                assert_abs_diff_eq!(*got, want, epsilon = 5e-7);
            }
        }
    }

    #[test]
    fn adaptive_agrees_with_rk4() {
        let p = BetaProfile::mathieu(1.217, 0.844);
        let a = integrate(&p, FRAC_PI_2, 2.5 * PI, &cfg()).unwrap();
        let b = integrate(
            &p,
            FRAC_PI_2,
            2.5 * PI,
            &IntegratorConfig::adaptive(1e-10, 1e-12),
        )
        .unwrap();
        assert!(a.max_abs_diff(&b) < 1e-8);
    }

    #[test]
    fn integration_errors() {
        let p = BetaProfile::constant(1.0);
        assert!(integrate(&p, 1.0, 0.0, &cfg()).is_err());
        let bad = IntegratorConfig::rk4(0);
        assert!(matches!(
            integrate(&p, 0.0, 1.0, &bad),
            Err(Error::InvalidParameter(_))
        ));
        let tiny = IntegratorConfig {
            max_steps: 10,
            ..IntegratorConfig::adaptive(1e-12, 1e-14)
        };
        assert!(matches!(
            integrate(&p, 0.0, 100.0, &tiny),
            Err(Error::Integration { .. })
        ));
        // Too few steps on a stiff interval: drift is reported, not hidden.
        let coarse = IntegratorConfig::rk4(20);
        assert!(matches!(
            integrate(&BetaProfile::constant(4.0), 0.0, 20.0, &coarse),
            Err(Error::DeterminantDrift { .. })
        ));
        let theta = solve_theta_coeffs(2.0, 0.0).unwrap();
        let pulse = BetaProfile::theta(theta, 0.0);
        assert!(matches!(
            integrate(&pulse, -2.0, 0.0, &cfg()),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn symmetric_examples() {
        let p = BetaProfile::constant(1.0);
        assert_eq!(
            integrate_symmetric(&p, 0.0, &cfg()).unwrap(),
            SymplecticMatrix2::IDENTITY
        );
        let u = integrate_symmetric(&p, FRAC_PI_4, &cfg()).unwrap();
        assert!(u.max_abs_diff(&rotation_matrix(1.0, FRAC_PI_2).unwrap()) < 1e-12);

        let theta = solve_theta_coeffs(2.0, 0.0).unwrap();
        let pulse = BetaProfile::theta(theta, 0.0);
        let sym = integrate_symmetric(&pulse, FRAC_PI_2, &cfg()).unwrap();
        let fwd = integrate(&pulse, -FRAC_PI_2, FRAC_PI_2, &cfg()).unwrap();
        assert!(sym.max_abs_diff(&squeezed_fourier(2.0).unwrap()) < 1e-6);
        assert!(sym.max_abs_diff(&fwd) < 1e-8);

        let skew = BetaProfile::mathieu(1.0, 0.3);
        assert!(integrate_symmetric(&skew, 1.0, &cfg()).is_ok());
        let shifted = BetaProfile::theta(theta, 0.2);
        assert!(matches!(
            integrate_symmetric(&shifted, 1.0, &cfg()),
            Err(Error::NotSymmetric { .. })
        ));
    }

    #[test]
    fn symmetric_round_trip_reproduces_theta() {
        let theta = solve_theta_coeffs(5.0 / 3.0, 0.0).unwrap();
        let pulse = BetaProfile::theta(theta, 0.0);
        for i in 1..=10 {
            let tau = FRAC_PI_2 * i as f64 / 10.0;
            let u = integrate_symmetric(&pulse, tau, &cfg()).unwrap();
            assert_abs_diff_eq!(u.u12(), theta.eval(tau, Derivative::Value), epsilon = 1e-6);
            let half_slope = 0.5 * theta.eval(tau, Derivative::First);
            assert_abs_diff_eq!(u.u11(), half_slope, epsilon = 1e-6);
            assert_abs_diff_eq!(u.u22(), half_slope, epsilon = 1e-6);
        }
        assert_abs_diff_eq!(
            beta_from_theta(&theta, 0.3).unwrap(),
            pulse.eval(0.3).unwrap()
        );
    }

    #[test]
    fn composite_splits_at_joins() {
        let pieces = vec![
            Piece::new(0.0, 1.0, BetaProfile::constant(1.0)),
            Piece::new(1.0, 2.0, BetaProfile::constant(4.0)),
        ];
        let p = BetaProfile::composite(pieces).unwrap();
        let u = integrate(&p, 0.0, 2.0, &cfg()).unwrap();
        let want = rotation_matrix(2.0, 1.0).unwrap() * rotation_matrix(1.0, 1.0).unwrap();
        assert!(u.max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn sampled_profile_integrates() {
        let taus: Vec<f64> = (0..=200).map(|i| i as f64 * 0.01).collect();
        let values: Vec<f64> = taus.iter().map(|_| 1.0).collect();
        let p = BetaProfile::sampled(taus, values, Interpolation::Cubic).unwrap();
        let u = integrate(&p, 0.0, 2.0, &cfg()).unwrap();
        assert!(u.max_abs_diff(&rotation_matrix(1.0, 2.0).unwrap()) < 1e-12);
    }

    #[test]
    fn path_is_cumulative() {
        let p = BetaProfile::mathieu(1.2, 0.8);
        let grid: Vec<f64> = (0..=8).map(|i| i as f64 * PI / 4.0).collect();
        let path = integrate_path(&p, &grid, &cfg()).unwrap();
        assert_eq!(path[0], SymplecticMatrix2::IDENTITY);
        let direct = integrate(&p, 0.0, 2.0 * PI, &cfg()).unwrap();
        assert!(path[8].max_abs_diff(&direct) < 1e-9);
    }

    #[test]
    fn monodromy_examples() {
        let kappa: f64 = 1.5;
        let p = BetaProfile::constant(kappa * kappa);
        let full = monodromy(&p, 0.3, 2.0 * PI / kappa, &cfg()).unwrap();
        assert!(full.max_abs_diff(&SymplecticMatrix2::IDENTITY) < 1e-10);
        let half = monodromy(&BetaProfile::constant(1.0), 0.0, PI, &cfg()).unwrap();
        assert!(half.max_abs_diff(&SymplecticMatrix2::diagonal(-1.0).unwrap()) < 1e-10);
        let m = BetaProfile::mathieu(1.2, 0.8);
        assert!(matches!(
            monodromy(&m, 0.0, 3.0, &cfg()),
            Err(Error::NotPeriodic { .. })
        ));
    }

    #[test]
    fn classify_examples() {
        let r = classify(&rotation_matrix(1.0, FRAC_PI_2).unwrap(), ZONE_BAND).unwrap();
        assert_eq!(r.zone, Zone::I);
        assert!(r.axes.is_none());
        assert_eq!(
            classify(&free_motion(1.0), ZONE_BAND).unwrap().zone,
            Zone::II
        );
        assert_eq!(
            classify(&SymplecticMatrix2::diagonal(-1.0).unwrap(), ZONE_BAND)
                .unwrap()
                .zone,
            Zone::II
        );

        let u = SymplecticMatrix2::from_entries(0.22604473, -0.07208895, 0.096338, 4.39317958);
        let r = classify(&u, ZONE_BAND).unwrap();
        assert_eq!(r.zone, Zone::III);
        let g = r.gamma;
        assert_abs_diff_eq!(
            r.eigenvalues[0].re,
            (g + (g * g - 4.0).sqrt()) / 2.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            r.eigenvalues[1].re,
            (g - (g * g - 4.0).sqrt()) / 2.0,
            epsilon = 1e-9
        );

        let [ap, am] = r.axes.unwrap();
        assert_abs_diff_eq!(ap[0] * am[1] - ap[1] * am[0], 1.0, epsilon = 1e-12);
        assert!(ap[0] > 0.0);
        for (a, lam) in [(ap, r.eigenvalues[0].re), (am, r.eigenvalues[1].re)] {
            let row = [
                a[0] * u.u11() + a[1] * u.u21(),
                a[0] * u.u12() + a[1] * u.u22(),
            ];
            assert_abs_diff_eq!(row[0], lam * a[0], epsilon = 1e-9);
            assert_abs_diff_eq!(row[1], lam * a[1], epsilon = 1e-9);
        }

        let not = SymplecticMatrix2::from_entries(2.0, 0.0, 0.0, 2.0);
        assert!(matches!(
            classify(&not, ZONE_BAND),
            Err(Error::NotSymplectic { .. })
        ));
    }

    #[test]
    fn negative_trace_zone_three() {
        let u = SymplecticMatrix2::diagonal(-3.0).unwrap();
        let r = classify(&u, ZONE_BAND).unwrap();
        assert_eq!(r.zone, Zone::III);
        let (p, m) = (r.eigenvalues[0].re, r.eigenvalues[1].re);
        assert_abs_diff_eq!(p, -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(m, -3.0, epsilon = 1e-15);
        let [ap, am] = r.axes.unwrap();
        assert_abs_diff_eq!(ap[0] * am[1] - ap[1] * am[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn apply_examples() {
        let s = CanonicalState::new(1.0, 2.0);
        assert_eq!(apply_to_state(&SymplecticMatrix2::IDENTITY, s), s);
        assert_eq!(
            apply_to_state(&free_motion(1.0), CanonicalState::new(0.0, 1.0)),
            CanonicalState::new(1.0, 1.0)
        );
        let d = SymplecticMatrix2::diagonal(4.0).unwrap();
        assert_eq!(apply_to_state(&d, s), CanonicalState::new(4.0, 0.5));
    }

    #[test]
    fn config_json() {
        let c: IntegratorConfig = serde_json::from_str(r#"{"method":"rk4","steps":500}"#).unwrap();
        assert_eq!(c.method, Method::Rk4 { steps: 500 });
        let c: IntegratorConfig =
            serde_json::from_str(r#"{"method":"adaptive","rel_tol":1e-10,"abs_tol":1e-12}"#)
                .unwrap();
        assert!(matches!(c.method, Method::Adaptive { .. }));
        let back: IntegratorConfig =
            serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn semigroup(b0 in 0.5f64..2.0, b1 in 0.0f64..1.5, t0 in -3.0f64..3.0,
                     d1 in 0.1f64..3.0, d2 in 0.1f64..3.0) {
            let p = BetaProfile::mathieu(b0, b1);
            let a = integrate(&p, t0, t0 + d1, &cfg()).unwrap();
            let b = integrate(&p, t0 + d1, t0 + d1 + d2, &cfg()).unwrap();
            let ab = integrate(&p, t0, t0 + d1 + d2, &cfg()).unwrap();
            prop_assert!(ab.max_abs_diff(&(b * a)) <= 1e-7);
        }

        #[test]
        fn trace_independent_of_start(b0 in 0.5f64..2.0, b1 in 0.0f64..1.5, t0 in 0.0f64..6.3) {
            let p = BetaProfile::mathieu(b0, b1);
            let g0 = monodromy(&p, 0.0, 2.0 * PI, &cfg()).unwrap().trace();
            let g1 = monodromy(&p, t0, 2.0 * PI, &cfg()).unwrap().trace();
            prop_assert!((g0 - g1).abs() <= 1e-7 * g0.abs().max(1.0));
        }

        #[test]
        fn zone_eigenstructure(b0 in 0.0f64..3.0, b1 in 0.0f64..1.5) {
            let u = monodromy(&BetaProfile::mathieu(b0, b1), 0.0, 2.0 * PI, &cfg()).unwrap();
            let r = classify(&u, ZONE_BAND).unwrap();
            let [lp, lm] = r.eigenvalues;
            prop_assert!(((lp * lm).re - 1.0).abs() <= 1e-9);
            match r.zone {
                Zone::I => {
                    prop_assert!((lp.norm() - 1.0).abs() <= 1e-9);
                    prop_assert!((lm.norm() - 1.0).abs() <= 1e-9);
                }
                Zone::III => {
                    prop_assert!(lp.im == 0.0 && lm.im == 0.0);
                    prop_assert!((lp.re * lm.re - 1.0).abs() <= 1e-9);
                }
                Zone::II => {}
            }
        }
    }
}
