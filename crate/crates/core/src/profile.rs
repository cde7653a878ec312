//! Dimensionless stiffness profiles `beta(tau)`.
//!
//! JSON form is an object tagged by `kind`:
//!
//! | kind        | fields                                                     |
//! |-------------|------------------------------------------------------------|
//! | `constant`  | `beta`                                                     |
//! | `mathieu`   | `beta0`, `beta1` (`beta = beta0 + 2 beta1 cos tau`)         |
//! | `theta`     | `theta` (`{b, beta0}` or `{a1, a3, a5, b, beta0}`), `center` |
//! | `sampled`   | `taus`, `values`, `order` (1 linear, 3 natural cubic)      |
//! | `composite` | `pieces`: list of `{start, end, profile}`                  |

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::design::{beta_from_theta, ThetaAnsatz};
use crate::error::{Error, Result};

/// Slack allowed when checking interval membership.
const DOMAIN_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BetaProfile {
    Constant {
        beta: f64,
    },
    Mathieu {
        beta0: f64,
        beta1: f64,
    },
    /// Stiffness generated by a three-frequency design function, defined on
    /// `[center - pi/2, center + pi/2]` and symmetric about `center`.
    #[serde(rename = "theta")]
    ThetaDerived {
        theta: ThetaAnsatz,
        #[serde(default)]
        center: f64,
    },
    Sampled(SampledProfile),
    Composite(CompositeProfile),
}

impl BetaProfile {
    pub fn constant(beta: f64) -> Self {
        BetaProfile::Constant { beta }
    }

    pub fn mathieu(beta0: f64, beta1: f64) -> Self {
        BetaProfile::Mathieu { beta0, beta1 }
    }

    pub fn theta(theta: ThetaAnsatz, center: f64) -> Self {
        BetaProfile::ThetaDerived { theta, center }
    }

    pub fn sampled(taus: Vec<f64>, values: Vec<f64>, order: Interpolation) -> Result<Self> {
        Ok(BetaProfile::Sampled(SampledProfile::new(
            taus, values, order,
        )?))
    }

    pub fn composite(pieces: Vec<Piece>) -> Result<Self> {
        Ok(BetaProfile::Composite(CompositeProfile::new(pieces)?))
    }

    /// Closed interval on which the profile is defined.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            BetaProfile::Constant { .. } | BetaProfile::Mathieu { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            BetaProfile::ThetaDerived { center, .. } => (center - FRAC_PI_2, center + FRAC_PI_2),
            BetaProfile::Sampled(s) => (s.taus[0], s.taus[s.taus.len() - 1]),
            BetaProfile::Composite(c) => (c.pieces[0].start, c.pieces[c.pieces.len() - 1].end),
        }
    }

    pub fn contains(&self, tau: f64) -> bool {
        let (a, b) = self.domain();
        tau >= a - DOMAIN_SLACK && tau <= b + DOMAIN_SLACK
    }

    /// `beta(tau)`; errors outside the domain.
    pub fn eval(&self, tau: f64) -> Result<f64> {
        if !self.contains(tau) {
            let (start, end) = self.domain();
            return Err(Error::Domain { tau, start, end });
        }
        match self {
            BetaProfile::Constant { beta } => Ok(*beta),
            BetaProfile::Mathieu { beta0, beta1 } => Ok(beta0 + 2.0 * beta1 * tau.cos()),
            BetaProfile::ThetaDerived { theta, center } => beta_from_theta(theta, tau - center),
            BetaProfile::Sampled(s) => Ok(s.eval(tau)),
            BetaProfile::Composite(c) => c.piece_at(tau).profile.eval(tau),
        }
    }

    /// `beta(tau)` with composite pieces chosen by `hint`, so a step that
    /// starts exactly on a join sees the piece it integrates across.
    pub fn eval_near(&self, tau: f64, hint: f64) -> Result<f64> {
        match self {
            BetaProfile::Composite(c) if self.contains(tau) => {
                c.piece_at(hint).profile.eval_near(tau, hint)
            }
            _ => self.eval(tau),
        }
    }

    /// Numerical `d beta / d tau` by central differences, one-sided at the
    /// domain edges. Across composite joins this is the smoothed slope.
    pub fn derivative(&self, tau: f64) -> Result<f64> {
        const H: f64 = 1e-5;
        let (a, b) = self.domain();
        if tau - H < a {
            Ok((self.eval(tau + H)? - self.eval(tau)?) / H)
        } else if tau + H > b {
            Ok((self.eval(tau)? - self.eval(tau - H)?) / H)
        } else {
            Ok((self.eval(tau + H)? - self.eval(tau - H)?) / (2.0 * H))
        }
    }

    /// Interior points in `(start, end)` where the profile switches
    /// definition; integrators restart there.
    pub fn breakpoints(&self, start: f64, end: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if let BetaProfile::Composite(c) = self {
            for (i, piece) in c.pieces.iter().enumerate() {
                if i > 0 && piece.start > start && piece.start < end {
                    out.push(piece.start);
                }
                let lo = start.max(piece.start);
                let hi = end.min(piece.end);
                if lo < hi {
                    out.extend(piece.profile.breakpoints(lo, hi));
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() <= DOMAIN_SLACK);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Interpolation {
    Linear,
    Cubic,
}

impl TryFrom<u8> for Interpolation {
    type Error = String;

    fn try_from(order: u8) -> std::result::Result<Self, String> {
        match order {
            1 => Ok(Interpolation::Linear),
            3 => Ok(Interpolation::Cubic),
            o => Err(format!("interpolation order must be 1 or 3, got {o}")),
        }
    }
}

impl From<Interpolation> for u8 {
    fn from(i: Interpolation) -> u8 {
        match i {
            Interpolation::Linear => 1,
            Interpolation::Cubic => 3,
        }
    }
}

fn default_order() -> Interpolation {
    Interpolation::Cubic
}

#[derive(Deserialize, Serialize)]
struct SampledSpec {
    taus: Vec<f64>,
    values: Vec<f64>,
    #[serde(default = "default_order")]
    order: Interpolation,
}

/// Tabulated profile. Cubic order uses a natural spline, so `beta` is
/// twice continuously differentiable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampledSpec", into = "SampledSpec")]
pub struct SampledProfile {
    taus: Vec<f64>,
    values: Vec<f64>,
    order: Interpolation,
    /// Spline second derivatives at the knots (empty for linear).
    curvature: Vec<f64>,
}

impl TryFrom<SampledSpec> for SampledProfile {
    type Error = Error;

    fn try_from(s: SampledSpec) -> Result<Self> {
        SampledProfile::new(s.taus, s.values, s.order)
    }
}

impl From<SampledProfile> for SampledSpec {
    fn from(p: SampledProfile) -> Self {
        SampledSpec {
            taus: p.taus,
            values: p.values,
            order: p.order,
        }
    }
}

impl SampledProfile {
    pub fn new(taus: Vec<f64>, values: Vec<f64>, order: Interpolation) -> Result<Self> {
        if taus.len() < 2 || taus.len() != values.len() {
            return Err(Error::InvalidProfile(
                "sampled profile needs at least two (tau, beta) pairs of equal length".into(),
            ));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidProfile(
                "sample taus must be strictly increasing".into(),
            ));
        }
        if taus.iter().chain(&values).any(|x| !x.is_finite()) {
            return Err(Error::InvalidProfile("samples must be finite".into()));
        }
        let curvature = match order {
            Interpolation::Linear => Vec::new(),
            Interpolation::Cubic => natural_spline_curvature(&taus, &values),
        };
        Ok(Self {
            taus,
            values,
            order,
            curvature,
        })
    }

    pub fn order(&self) -> Interpolation {
        self.order
    }

    fn eval(&self, tau: f64) -> f64 {
        let n = self.taus.len();
        let tau = tau.clamp(self.taus[0], self.taus[n - 1]);
        let i = match self.taus.partition_point(|&t| t <= tau) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (t0, t1) = (self.taus[i], self.taus[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = t1 - t0;
        let b = (tau - t0) / h;
        let a = 1.0 - b;
        match self.order {
            Interpolation::Linear => a * y0 + b * y1,
            Interpolation::Cubic => {
                let (m0, m1) = (self.curvature[i], self.curvature[i + 1]);
                a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0
            }
        }
    }
}

/// Second derivatives of the natural cubic spline (Thomas algorithm).
fn natural_spline_curvature(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut m = vec![0.0; n];
    if n < 3 {
        return m;
    }
    // Tridiagonal system for interior knots 1..n-1.
    let mut diag = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    let mut upper = vec![0.0; n];
    for i in 1..n - 1 {
        let h0 = x[i] - x[i - 1];
        let h1 = x[i + 1] - x[i];
        let lower = h0 / 6.0;
        diag[i] = (h0 + h1) / 3.0;
        upper[i] = h1 / 6.0;
        rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
        if i > 1 {
            let w = lower / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
    }
    for i in (1..n - 1).rev() {
        m[i] = (rhs[i] - upper[i] * m[i + 1]) / diag[i];
    }
    m
}

/// One interval of a composite profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub profile: BetaProfile,
}

impl Piece {
    pub fn new(start: f64, end: f64, profile: BetaProfile) -> Self {
        Self {
            start,
            end,
            profile,
        }
    }
}

#[derive(Deserialize, Serialize)]
struct CompositeSpec {
    pieces: Vec<Piece>,
}

/// Ordered, contiguous pieces. At a join the left piece is evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CompositeSpec", into = "CompositeSpec")]
pub struct CompositeProfile {
    pieces: Vec<Piece>,
}

impl TryFrom<CompositeSpec> for CompositeProfile {
    type Error = Error;

    fn try_from(s: CompositeSpec) -> Result<Self> {
        CompositeProfile::new(s.pieces)
    }
}

impl From<CompositeProfile> for CompositeSpec {
    fn from(c: CompositeProfile) -> Self {
        CompositeSpec { pieces: c.pieces }
    }
}

impl CompositeProfile {
    pub fn new(pieces: Vec<Piece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidProfile(
                "composite profile needs a piece".into(),
            ));
        }
        for (i, p) in pieces.iter().enumerate() {
            if !(p.end > p.start) {
                return Err(Error::InvalidProfile(format!(
                    "piece {i} has empty interval [{}, {}]",
                    p.start, p.end
                )));
            }
            if !p.profile.contains(p.start) || !p.profile.contains(p.end) {
                return Err(Error::InvalidProfile(format!(
                    "piece {i} interval [{}, {}] exceeds its profile's domain",
                    p.start, p.end
                )));
            }
        }
        for (i, w) in pieces.windows(2).enumerate() {
            if (w[1].start - w[0].end).abs() > DOMAIN_SLACK * (1.0 + w[0].end.abs()) {
                return Err(Error::InvalidProfile(format!(
                    "pieces {i} and {} are not contiguous: {} vs {}",
                    i + 1,
                    w[0].end,
                    w[1].start
                )));
            }
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    fn piece_at(&self, tau: f64) -> &Piece {
        self.pieces
            .iter()
            .find(|p| tau <= p.end + DOMAIN_SLACK)
            .unwrap_or(&self.pieces[self.pieces.len() - 1])
    }
}
