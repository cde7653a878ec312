//! Inverse design of soft pulses.
//!
//! For a stiffness symmetric about `tau = 0` the evolution over `[-tau, tau]`
//! is equidiagonal and fixed by one function `theta(tau) = u12(tau, -tau)`:
//!
//! ```text
//! u11 = u22 = theta'/2,   u21 = ((theta'/2)² - 1) / theta,
//! beta = -theta''/(2 theta) + ((theta'/2)² - 1) / theta².
//! ```
//!
//! Choosing `theta = a1 sin tau + a3 sin 3tau + a5 sin 5tau` with
//! `theta'(0) = 2`, `theta(pi/2) = b` and `theta''(pi/2) = -2/b - 2 b beta0`
//! yields a pulse on `[-pi/2, pi/2]` producing the squeezed Fourier
//! `[[0, b], [-1/b, 0]]` and ending at `beta(±pi/2) = beta0`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{integrate, IntegratorConfig};
use crate::profile::{BetaProfile, Piece};
use crate::symplectic::{free_motion, rotation_matrix, squeezed_fourier, SymplecticMatrix2};

/// Below this `|theta|` the stiffness is taken from its analytic limit.
pub const THETA_EPS: f64 = 1e-6;
/// Allowed deviation of `|theta'|` from 2 at a zero of `theta`.
pub const SLOPE_TOL: f64 = 1e-6;
/// Tolerance on stage matrices in [`verify_design`].
pub const VERIFY_TOL: f64 = 1e-6;
/// Tolerance on beta, beta' and beta'' jumps for a join to count as soft.
pub const JOIN_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Derivative {
    Value,
    First,
    Second,
    Third,
}

impl Derivative {
    pub fn from_order(order: u8) -> Result<Self> {
        match order {
            0 => Ok(Derivative::Value),
            1 => Ok(Derivative::First),
            2 => Ok(Derivative::Second),
            3 => Ok(Derivative::Third),
            n => Err(invalid(format!("derivative order must be 0..=3, got {n}"))),
        }
    }
}

/// A thrice differentiable design function.
pub trait DesignFunction {
    fn theta(&self, tau: f64, d: Derivative) -> f64;
}

/// Adapter for closures `(tau, derivative) -> value`.
pub struct ThetaFn<F>(pub F);

impl<F: Fn(f64, Derivative) -> f64> DesignFunction for ThetaFn<F> {
    fn theta(&self, tau: f64, d: Derivative) -> f64 {
        (self.0)(tau, d)
    }
}

/// Three-frequency design function with its target `b` and end stiffness
/// `beta0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ThetaSpec")]
pub struct ThetaAnsatz {
    a1: f64,
    a3: f64,
    a5: f64,
    b: f64,
    beta0: f64,
}

/// Serialized form; coefficients are derived when omitted.
#[derive(Deserialize)]
struct ThetaSpec {
    a1: Option<f64>,
    a3: Option<f64>,
    a5: Option<f64>,
    b: f64,
    beta0: f64,
}

impl TryFrom<ThetaSpec> for ThetaAnsatz {
    type Error = Error;

    fn try_from(s: ThetaSpec) -> Result<Self> {
        match (s.a1, s.a3, s.a5) {
            (None, None, None) => solve_theta_coeffs(s.b, s.beta0),
            (Some(a1), Some(a3), Some(a5)) => {
                ThetaAnsatz::from_coefficients(a1, a3, a5, s.b, s.beta0)
            }
            _ => Err(invalid("theta needs all of a1, a3, a5 or none of them")),
        }
    }
}

impl ThetaAnsatz {
    /// Checks the three boundary conditions to `1e-9`.
    pub fn from_coefficients(a1: f64, a3: f64, a5: f64, b: f64, beta0: f64) -> Result<Self> {
        if b == 0.0 || !b.is_finite() {
            return Err(invalid("theta target b must be finite and nonzero"));
        }
        let theta = Self {
            a1,
            a3,
            a5,
            b,
            beta0,
        };
        let worst = theta
            .condition_residuals()
            .iter()
            .fold(0.0f64, |m, r| m.max(r.abs()));
        if worst > 1e-9 {
            return Err(invalid(format!(
                "theta coefficients violate the boundary conditions by {worst:e}"
            )));
        }
        Ok(theta)
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }
    pub fn a3(&self) -> f64 {
        self.a3
    }
    pub fn a5(&self) -> f64 {
        self.a5
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn beta0(&self) -> f64 {
        self.beta0
    }

    /// Residuals of `theta'(0) = 2`, `theta(pi/2) = b`,
    /// `theta''(pi/2) = -2/b - 2 b beta0`.
    pub fn condition_residuals(&self) -> [f64; 3] {
        [
            self.a1 + 3.0 * self.a3 + 5.0 * self.a5 - 2.0,
            self.a1 - self.a3 + self.a5 - self.b,
            -self.a1 + 9.0 * self.a3 - 25.0 * self.a5 + 2.0 / self.b + 2.0 * self.b * self.beta0,
        ]
    }

    pub fn eval(&self, tau: f64, d: Derivative) -> f64 {
        [(1.0, self.a1), (3.0, self.a3), (5.0, self.a5)]
            .iter()
            .map(|&(k, a)| {
                let (s, c) = (k * tau).sin_cos();
                a * match d {
                    Derivative::Value => s,
                    Derivative::First => k * c,
                    Derivative::Second => -k * k * s,
                    Derivative::Third => -k * k * k * c,
                }
            })
            .sum()
    }
}

impl DesignFunction for ThetaAnsatz {
    fn theta(&self, tau: f64, d: Derivative) -> f64 {
        self.eval(tau, d)
    }
}

/// Closed-form coefficients meeting the three boundary conditions.
pub fn solve_theta_coeffs(b: f64, beta0: f64) -> Result<ThetaAnsatz> {
    if b == 0.0 || !b.is_finite() || !beta0.is_finite() {
        return Err(invalid("theta target b must be finite and nonzero"));
    }
    let a1 = (4.0 - 2.0 / b + b * (15.0 - 2.0 * beta0)) / 16.0;
    let a3 = (12.0 - 2.0 / b - b * (5.0 + 2.0 * beta0)) / 32.0;
    let a5 = (2.0 / b + 4.0 - b * (3.0 - 2.0 * beta0)) / 32.0;
    Ok(ThetaAnsatz {
        a1,
        a3,
        a5,
        b,
        beta0,
    })
}

pub fn theta_eval(theta: &ThetaAnsatz, tau: f64, order: u8) -> Result<f64> {
    Ok(theta.eval(tau, Derivative::from_order(order)?))
}

/// Stiffness that generates `theta` as `u12(tau, -tau)`.
///
/// Where `|theta| < THETA_EPS` and `theta' = ±2` the quotient is 0/0 and the
/// limit `-theta' theta''' / 16` is returned instead.
pub fn beta_from_theta<T: DesignFunction + ?Sized>(theta: &T, tau: f64) -> Result<f64> {
    let t0 = theta.theta(tau, Derivative::Value);
    let t1 = theta.theta(tau, Derivative::First);
    if t0.abs() < THETA_EPS {
        if (t1.abs() - 2.0).abs() > SLOPE_TOL {
            return Err(Error::Singular { tau, slope: t1 });
        }
        let t3 = theta.theta(tau, Derivative::Third);
        return Ok(-t1 * t3 / 16.0);
    }
    let t2 = theta.theta(tau, Derivative::Second);
    let half = 0.5 * t1;
    Ok(-t2 / (2.0 * t0) + (half - 1.0) * (half + 1.0) / (t0 * t0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaZero {
    pub tau: f64,
    pub slope: f64,
    /// `theta' = ±2` holds here.
    pub satisfied: bool,
}

/// A point with `theta' = 0`, `theta != 0`: the symmetric-interval matrix is
/// the squeezed Fourier `[[0, b], [-1/b, 0]]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FourierPoint {
    pub tau: f64,
    pub b: f64,
    /// From `beta theta² = -theta'' theta / 2 - 1`.
    pub beta: f64,
    /// `theta''' = 0` here, hence `beta' = 0`.
    pub beta_stationary: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub interval: (f64, f64),
    pub theta_zeros: Vec<ThetaZero>,
    pub fourier_points: Vec<FourierPoint>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.theta_zeros.iter().all(|z| z.satisfied)
    }

    pub fn violations(&self) -> impl Iterator<Item = &ThetaZero> {
        self.theta_zeros.iter().filter(|z| !z.satisfied)
    }

    pub fn fourier_point_near(&self, tau: f64, tol: f64) -> Option<&FourierPoint> {
        self.fourier_points
            .iter()
            .find(|f| (f.tau - tau).abs() <= tol)
    }
}

/// Locates zeros of `theta` and `theta'` on `interval` by sampling
/// `samples` subintervals and bisecting sign changes, then checks the
/// regularity conditions at each.
pub fn validate_lemma<T: DesignFunction + ?Sized>(
    theta: &T,
    interval: (f64, f64),
    samples: usize,
) -> Result<LemmaReport> {
    let (a, b) = interval;
    if !(b > a) || samples < 2 {
        return Err(invalid(
            "lemma validation needs a nonempty interval and >= 2 samples",
        ));
    }
    let theta_zeros = find_zeros(|t| theta.theta(t, Derivative::Value), a, b, samples)
        .into_iter()
        .map(|tau| {
            let slope = theta.theta(tau, Derivative::First);
            ThetaZero {
                tau,
                slope,
                satisfied: (slope.abs() - 2.0).abs() <= SLOPE_TOL,
            }
        })
        .collect();
    let fourier_points = find_zeros(|t| theta.theta(t, Derivative::First), a, b, samples)
        .into_iter()
        .filter_map(|tau| {
            let t0 = theta.theta(tau, Derivative::Value);
            if t0.abs() < THETA_EPS {
                return None;
            }
            let t2 = theta.theta(tau, Derivative::Second);
            let t3 = theta.theta(tau, Derivative::Third);
            Some(FourierPoint {
                tau,
                b: t0,
                beta: (-0.5 * t2 * t0 - 1.0) / (t0 * t0),
                beta_stationary: t3.abs() <= 1e-9,
            })
        })
        .collect();
    Ok(LemmaReport {
        interval,
        theta_zeros,
        fourier_points,
    })
}

fn find_zeros(f: impl Fn(f64) -> f64, a: f64, b: f64, samples: usize) -> Vec<f64> {
    const NODE_ZERO: f64 = 1e-12;
    let dx = (b - a) / samples as f64;
    let node = |i: usize| if i == samples { b } else { a + dx * i as f64 };
    let mut zeros: Vec<f64> = Vec::new();
    let push = |t: f64, zeros: &mut Vec<f64>| {
        if zeros.last().is_none_or(|&z| (t - z).abs() > 0.5 * dx) {
            zeros.push(t);
        }
    };
    let mut prev = f(a);
    for i in 0..samples {
        let (t0, t1) = (node(i), node(i + 1));
        let next = f(t1);
        if prev.abs() <= NODE_ZERO {
            push(t0, &mut zeros);
        } else if next.abs() > NODE_ZERO && prev * next < 0.0 {
            push(bisect(&f, t0, t1, prev), &mut zeros);
        }
        prev = next;
    }
    if prev.abs() <= NODE_ZERO {
        push(b, &mut zeros);
    }
    zeros
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, f_lo: f64) -> f64 {
    let mut sign_lo = f_lo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == sign_lo {
            lo = mid;
            sign_lo = fm.signum();
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Constant-stiffness continuation appended after a designed stage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tail {
    pub beta0: f64,
    pub duration: f64,
}

impl Tail {
    /// Quarter oscillation `pi / (2 sqrt(beta0))`, which is itself a
    /// squeezed Fourier with `b0 = 1/sqrt(beta0)`.
    pub fn quarter_period(beta0: f64) -> Result<Self> {
        if !(beta0 > 0.0) {
            return Err(invalid("a quarter-period tail needs beta0 > 0"));
        }
        Ok(Self {
            beta0,
            duration: PI / (2.0 * beta0.sqrt()),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Stage {
    /// Designed stage on `[center - pi/2, center + pi/2]`.
    Theta { ansatz: ThetaAnsatz, center: f64 },
    Constant {
        beta0: f64,
        start: f64,
        duration: f64,
    },
}

impl Stage {
    pub fn start(&self) -> f64 {
        match *self {
            Stage::Theta { center, .. } => center - FRAC_PI_2,
            Stage::Constant { start, .. } => start,
        }
    }

    pub fn end(&self) -> f64 {
        match *self {
            Stage::Theta { center, .. } => center + FRAC_PI_2,
            Stage::Constant {
                start, duration, ..
            } => start + duration,
        }
    }

    fn shifted(&self, offset: f64) -> Stage {
        match *self {
            Stage::Theta { ansatz, center } => Stage::Theta {
                ansatz,
                center: center + offset,
            },
            Stage::Constant {
                beta0,
                start,
                duration,
            } => Stage::Constant {
                beta0,
                start: start + offset,
                duration,
            },
        }
    }

    pub fn profile(&self) -> BetaProfile {
        match *self {
            Stage::Theta { ansatz, center } => BetaProfile::theta(ansatz, center),
            Stage::Constant { beta0, .. } => BetaProfile::constant(beta0),
        }
    }

    /// Closed-form matrix this stage is designed to produce.
    pub fn expected_matrix(&self) -> Result<SymplecticMatrix2> {
        match *self {
            Stage::Theta { ansatz, .. } => squeezed_fourier(ansatz.b()),
            Stage::Constant {
                beta0, duration, ..
            } => {
                if beta0 > 0.0 {
                    rotation_matrix(beta0.sqrt(), duration)
                } else if beta0 == 0.0 {
                    Ok(free_motion(duration))
                } else {
                    Err(invalid("constant stage needs beta0 >= 0"))
                }
            }
        }
    }

    /// The stage's defining formula, evaluated without domain limits so
    /// one-sided derivatives at the stage ends are available.
    fn beta_extended(&self, tau: f64) -> Result<f64> {
        match *self {
            Stage::Theta { ansatz, center } => beta_from_theta(&ansatz, tau - center),
            Stage::Constant { beta0, .. } => Ok(beta0),
        }
    }

    /// `(beta, beta', beta'')` at `tau` by Richardson-extrapolated central
    /// differences of the extended formula.
    fn jets(&self, tau: f64) -> Result<[f64; 3]> {
        const H: f64 = 2e-3;
        let f = |t: f64| self.beta_extended(t);
        let diffs = |h: f64| -> Result<(f64, f64)> {
            let (fp, f0, fm) = (f(tau + h)?, f(tau)?, f(tau - h)?);
            Ok(((fp - fm) / (2.0 * h), (fp - 2.0 * f0 + fm) / (h * h)))
        };
        let (d1_h, d2_h) = diffs(H)?;
        let (d1_h2, d2_h2) = diffs(0.5 * H)?;
        Ok([
            f(tau)?,
            (4.0 * d1_h2 - d1_h) / 3.0,
            (4.0 * d2_h2 - d2_h) / 3.0,
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JoinReport {
    pub tau: f64,
    pub beta_jump: f64,
    pub slope_jump: f64,
    pub curvature_jump: f64,
}

impl JoinReport {
    pub fn soft(&self) -> bool {
        [self.beta_jump, self.slope_jump, self.curvature_jump]
            .iter()
            .all(|j| j.abs() <= JOIN_TOL)
    }
}

/// A multi-stage pulse and its assembled profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignedPulse {
    stages: Vec<Stage>,
    joins: Vec<JoinReport>,
    profile: BetaProfile,
}

impl DesignedPulse {
    fn from_stages(stages: Vec<Stage>) -> Result<Self> {
        let mut joins = Vec::with_capacity(stages.len().saturating_sub(1));
        for w in stages.windows(2) {
            let tau = w[0].end();
            let left = w[0].jets(tau)?;
            let right = w[1].jets(w[1].start())?;
            let report = JoinReport {
                tau,
                beta_jump: right[0] - left[0],
                slope_jump: right[1] - left[1],
                curvature_jump: right[2] - left[2],
            };
            if report.beta_jump.abs() > JOIN_TOL {
                return Err(Error::Discontinuous {
                    tau,
                    jump: report.beta_jump,
                });
            }
            joins.push(report);
        }
        let pieces = stages
            .iter()
            .map(|s| Piece::new(s.start(), s.end(), s.profile()))
            .collect();
        let profile = BetaProfile::composite(pieces)?;
        Ok(Self {
            stages,
            joins,
            profile,
        })
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn joins(&self) -> &[JoinReport] {
        &self.joins
    }

    pub fn profile(&self) -> &BetaProfile {
        &self.profile
    }

    pub fn interval(&self) -> (f64, f64) {
        self.profile.domain()
    }

    /// Appends `next`, shifted to start where this pulse ends.
    pub fn then(&self, next: &DesignedPulse) -> Result<DesignedPulse> {
        let offset = self.interval().1 - next.interval().0;
        let stages = self
            .stages
            .iter()
            .copied()
            .chain(next.stages.iter().map(|s| s.shifted(offset)))
            .collect();
        Self::from_stages(stages)
    }
}

/// Stage 1 on `[-pi/2, pi/2]` from `theta`, optionally followed by a
/// constant tail whose stiffness must equal `theta.beta0()`.
pub fn build_pulse(theta: &ThetaAnsatz, tail: Option<Tail>) -> Result<DesignedPulse> {
    let mut stages = vec![Stage::Theta {
        ansatz: *theta,
        center: 0.0,
    }];
    if let Some(tail) = tail {
        if (tail.beta0 - theta.beta0()).abs() > 1e-12 {
            return Err(invalid(format!(
                "tail beta0 = {} does not match the designed end stiffness {}",
                tail.beta0,
                theta.beta0()
            )));
        }
        if !(tail.duration > 0.0) || !(tail.beta0 >= 0.0) {
            return Err(invalid("tail needs duration > 0 and beta0 >= 0"));
        }
        stages.push(Stage::Constant {
            beta0: tail.beta0,
            start: FRAC_PI_2,
            duration: tail.duration,
        });
    }
    DesignedPulse::from_stages(stages)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageCheck {
    pub start: f64,
    pub end: f64,
    pub matrix: SymplecticMatrix2,
    pub expected: SymplecticMatrix2,
    pub deviation: f64,
    pub squeezed_fourier: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignReport {
    pub schema_version: u32,
    pub stages: Vec<StageCheck>,
    pub total: SymplecticMatrix2,
    pub expected_total: SymplecticMatrix2,
    /// `u11` of the total when it is diagonal within tolerance.
    pub lambda: Option<f64>,
    pub amplification: Option<f64>,
    pub failures: Vec<String>,
}

impl DesignReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Integrates each stage and compares it with its closed form.
pub fn verify_design(pulse: &DesignedPulse, cfg: &IntegratorConfig) -> Result<DesignReport> {
    let mut stages = Vec::with_capacity(pulse.stages.len());
    let mut failures = Vec::new();
    let mut total = SymplecticMatrix2::IDENTITY;
    let mut expected_total = SymplecticMatrix2::IDENTITY;
    for (i, stage) in pulse.stages.iter().enumerate() {
        let (start, end) = (stage.start(), stage.end());
        let matrix = integrate(&pulse.profile, start, end, cfg)?;
        let expected = stage.expected_matrix()?;
        let deviation = matrix.max_abs_diff(&expected);
        let squeezed_fourier = matrix.u11().abs() <= VERIFY_TOL
            && matrix.u22().abs() <= VERIFY_TOL
            && expected.u11().abs() <= VERIFY_TOL
            && deviation <= VERIFY_TOL;
        if deviation > VERIFY_TOL {
            failures.push(format!(
                "stage {i} on [{start}, {end}] deviates from its closed form by {deviation:e}"
            ));
        }
        if let Stage::Theta { .. } = stage {
            if !squeezed_fourier {
                failures.push(format!("stage {i} is not a squeezed Fourier"));
            }
        }
        total = matrix * total;
        expected_total = expected * expected_total;
        stages.push(StageCheck {
            start,
            end,
            matrix,
            expected,
            deviation,
            squeezed_fourier,
        });
    }
    let diagonal = total.u12().abs() <= VERIFY_TOL && total.u21().abs() <= VERIFY_TOL;
    let lambda = diagonal.then(|| total.u11());
    Ok(DesignReport {
        schema_version: 1,
        stages,
        total,
        expected_total,
        lambda,
        amplification: lambda.map(|l| 1.0 / l.abs()),
        failures,
    })
}
