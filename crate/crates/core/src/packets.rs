//! Gaussian packets through first and second moments: trajectory
//! congruences, uncertainty shadows and error back-casting.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolution::{apply_to_state, integrate_path, IntegratorConfig};
use crate::profile::BetaProfile;
use crate::symplectic::{CanonicalState, SymplecticMatrix2};

/// Radius of the dimensionless belt `|q| < 10` used for shadow flags.
pub const BELT_RADIUS: f64 = 10.0;

/// Symmetric covariance `[[qq, qp], [qp, pp]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Covariance {
    pub qq: f64,
    pub qp: f64,
    pub pp: f64,
}

impl Covariance {
    pub fn det(&self) -> f64 {
        self.qq * self.pp - self.qp * self.qp
    }

    /// `u Sigma uᵀ`.
    pub fn transform(&self, u: &SymplecticMatrix2) -> Covariance {
        let [a, b, c, d] = u.entries();
        Covariance {
            qq: a * a * self.qq + 2.0 * a * b * self.qp + b * b * self.pp,
            qp: a * c * self.qq + (a * d + b * c) * self.qp + b * d * self.pp,
            pp: c * c * self.qq + 2.0 * c * d * self.qp + d * d * self.pp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub mean: CanonicalState,
    pub cov: Covariance,
}

impl MomentState {
    /// Rejects covariances that are not positive semidefinite or violate
    /// `det Sigma >= 1/4`.
    pub fn new(mean: CanonicalState, cov: Covariance) -> Result<Self> {
        if !(cov.qq >= 0.0 && cov.pp >= 0.0) || cov.det() < 0.25 - 1e-12 {
            return Err(invalid(format!(
                "covariance {cov:?} violates positivity or the uncertainty bound"
            )));
        }
        if !(mean.q.is_finite() && mean.p.is_finite()) {
            return Err(invalid("mean must be finite"));
        }
        Ok(Self { mean, cov })
    }

    pub fn delta_q(&self) -> f64 {
        self.cov.qq.sqrt()
    }

    pub fn delta_p(&self) -> f64 {
        self.cov.pp.sqrt()
    }
}

/// Minimum-uncertainty packet with `Sigma = diag(1/(2 kappa), kappa/2)`.
pub fn gaussian_init(kappa: f64, q0: f64, p0: f64) -> Result<MomentState> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid(format!(
            "packet width parameter must be > 0, got {kappa}"
        )));
    }
    MomentState::new(
        CanonicalState::new(q0, p0),
        Covariance {
            qq: 0.5 / kappa,
            qp: 0.0,
            pp: 0.5 * kappa,
        },
    )
}

pub fn propagate(u: &SymplecticMatrix2, s: &MomentState) -> MomentState {
    MomentState {
        mean: apply_to_state(u, s.mean),
        cov: s.cov.transform(u),
    }
}

/// `Delta q` after `u` applied to the standard packet `Sigma = I/2`.
pub fn delta_q(u: &SymplecticMatrix2) -> f64 {
    (0.5 * (u.u11() * u.u11() + u.u12() * u.u12())).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Congruence {
    pub taus: Vec<f64>,
    pub inits: Vec<CanonicalState>,
    /// `trajectories[k][i]` is the state of init `k` at `taus[i]`.
    pub trajectories: Vec<Vec<CanonicalState>>,
}

impl Congruence {
    pub fn endpoints(&self) -> impl Iterator<Item = CanonicalState> + '_ {
        self.trajectories.iter().filter_map(|t| t.last().copied())
    }
}

pub fn congruence(
    pulse: &BetaProfile,
    inits: &[CanonicalState],
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Congruence> {
    let path = integrate_path(pulse, grid, cfg)?;
    let trajectories = inits
        .par_iter()
        .map(|&s| path.iter().map(|u| apply_to_state(u, s)).collect())
        .collect();
    Ok(Congruence {
        taus: grid.to_vec(),
        inits: inits.to_vec(),
        trajectories,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShadowRow {
    pub tau: f64,
    pub q: f64,
    pub p: f64,
    pub dq: f64,
    pub dp: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Shadow {
    pub rows: Vec<ShadowRow>,
    pub max_dq: f64,
    pub tau_of_max_dq: f64,
    /// `max |q| + Delta q` over the run.
    pub max_extent: f64,
}

impl Shadow {
    pub fn within_belt(&self, radius: f64) -> bool {
        self.max_extent < radius
    }
}

pub fn shadow(
    pulse: &BetaProfile,
    init: &MomentState,
    grid: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Shadow> {
    let path = integrate_path(pulse, grid, cfg)?;
    let rows: Vec<ShadowRow> = grid
        .iter()
        .zip(&path)
        .map(|(&tau, u)| {
            let s = propagate(u, init);
            ShadowRow {
                tau,
                q: s.mean.q,
                p: s.mean.p,
                dq: s.delta_q(),
                dp: s.delta_p(),
            }
        })
        .collect();
    let (tau_of_max_dq, max_dq) =
        rows.iter()
            .map(|r| (r.tau, r.dq))
            .fold((grid[0], f64::NEG_INFINITY), |acc, x| {
                if x.1 > acc.1 {
                    x
                } else {
                    acc
                }
            });
    let max_extent = rows.iter().map(|r| r.q.abs() + r.dq).fold(0.0, f64::max);
    Ok(Shadow {
        rows,
        max_dq,
        tau_of_max_dq,
        max_extent,
    })
}

/// Initial-coordinate errors recovered from final ones after an
/// amplification by `lambda`.
pub fn backcast_error(lambda: f64, delta_final: &[f64]) -> Result<Vec<f64>> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(invalid("amplification lambda must be finite and nonzero"));
    }
    if delta_final.iter().any(|d| !(*d >= 0.0)) {
        return Err(invalid("final errors must be nonnegative"));
    }
    Ok(delta_final.iter().map(|d| d / lambda.abs()).collect())
}
