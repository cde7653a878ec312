//! 2×2 symplectic evolution matrices and the closed-form building blocks
//! of squeezing operations.
//!
//! Rows follow the column vector `(q, p)ᵀ`: row 1 produces the new `q`, row 2
//! the new `p`. With this convention `u12 = 0` means the final position does
//! not depend on the initial momentum.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Determinant tolerance for closed-form matrices.
pub const ANALYTIC_DET_TOL: f64 = 1e-12;
/// Determinant tolerance for numerically integrated matrices.
pub const INTEGRATED_DET_TOL: f64 = 1e-9;

/// Real 2×2 matrix with unit determinant, stored row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymplecticMatrix2 {
    u11: f64,
    u12: f64,
    u21: f64,
    u22: f64,
}

impl SymplecticMatrix2 {
    pub const IDENTITY: Self = Self {
        u11: 1.0,
        u12: 0.0,
        u21: 0.0,
        u22: 1.0,
    };

    /// Builds a matrix from its entries, checking `|det - 1| <= tol`.
    pub fn try_new(u11: f64, u12: f64, u21: f64, u22: f64, tol: f64) -> Result<Self> {
        let m = Self::from_entries(u11, u12, u21, u22);
        if !m.is_finite() {
            return Err(invalid("matrix entries must be finite"));
        }
        if (m.det() - 1.0).abs() > tol {
            return Err(Error::NotSymplectic { det: m.det() });
        }
        Ok(m)
    }

    /// Builds a matrix without checking the determinant. Callers own the
    /// invariant; use [`SymplecticMatrix2::try_new`] for external data.
    pub(crate) const fn from_entries(u11: f64, u12: f64, u21: f64, u22: f64) -> Self {
        Self { u11, u12, u21, u22 }
    }

    pub(crate) fn from_array(a: [f64; 4]) -> Self {
        Self::from_entries(a[0], a[1], a[2], a[3])
    }

    pub fn diagonal(lambda: f64) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(invalid("squeeze factor must be finite and nonzero"));
        }
        Ok(Self::from_entries(lambda, 0.0, 0.0, 1.0 / lambda))
    }

    pub fn u11(&self) -> f64 {
        self.u11
    }
    pub fn u12(&self) -> f64 {
        self.u12
    }
    pub fn u21(&self) -> f64 {
        self.u21
    }
    pub fn u22(&self) -> f64 {
        self.u22
    }

    /// Entries in row-major order `[u11, u12, u21, u22]`.
    pub fn entries(&self) -> [f64; 4] {
        [self.u11, self.u12, self.u21, self.u22]
    }

    pub fn det(&self) -> f64 {
        self.u11 * self.u22 - self.u12 * self.u21
    }

    pub fn trace(&self) -> f64 {
        self.u11 + self.u22
    }

    /// Inverse; for unit determinant this is the adjugate.
    pub fn inverse(&self) -> Self {
        Self::from_entries(self.u22, -self.u12, -self.u21, self.u11)
    }

    pub fn transpose(&self) -> Self {
        Self::from_entries(self.u11, self.u21, self.u12, self.u22)
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|x| x.is_finite())
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_equidiagonal(&self, tol: f64) -> bool {
        is_equidiagonal(self, tol)
    }
}

impl Mul for SymplecticMatrix2 {
    type Output = SymplecticMatrix2;

    fn mul(self, v: SymplecticMatrix2) -> SymplecticMatrix2 {
        compose(&self, &v)
    }
}

impl fmt::Display for SymplecticMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:.6}, {:.6}], [{:.6}, {:.6}]]",
            self.u11, self.u12, self.u21, self.u22
        )
    }
}

/// Dimensionless canonical pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalState {
    pub q: f64,
    pub p: f64,
}

impl CanonicalState {
    pub fn new(q: f64, p: f64) -> Self {
        Self { q, p }
    }
}

/// Matrix product `u·v` (apply `v` first, then `u`).
pub fn compose(u: &SymplecticMatrix2, v: &SymplecticMatrix2) -> SymplecticMatrix2 {
    SymplecticMatrix2::from_entries(
        u.u11 * v.u11 + u.u12 * v.u21,
        u.u11 * v.u12 + u.u12 * v.u22,
        u.u21 * v.u11 + u.u22 * v.u21,
        u.u21 * v.u12 + u.u22 * v.u22,
    )
}

/// Evolution under constant `beta = kappa²` for a time `dtau`.
pub fn rotation_matrix(kappa: f64, dtau: f64) -> Result<SymplecticMatrix2> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(invalid(format!(
            "rotation needs kappa > 0, got {kappa}; use free_motion for kappa = 0"
        )));
    }
    let (s, c) = (kappa * dtau).sin_cos();
    Ok(SymplecticMatrix2::from_entries(c, s / kappa, -kappa * s, c))
}

pub fn free_motion(dtau: f64) -> SymplecticMatrix2 {
    SymplecticMatrix2::from_entries(1.0, dtau, 0.0, 1.0)
}

/// `[[0, b], [-1/b, 0]]`.
pub fn squeezed_fourier(b: f64) -> Result<SymplecticMatrix2> {
    if b == 0.0 || !b.is_finite() {
        return Err(invalid(
            "squeezed Fourier magnitude b must be finite and nonzero",
        ));
    }
    Ok(SymplecticMatrix2::from_entries(0.0, b, -1.0 / b, 0.0))
}

/// Two quarter-period oscillator steps with stiffnesses `kappa1²` then
/// `kappa2²`, giving `diag(lambda, 1/lambda)` with `lambda = -kappa2/kappa1`.
pub fn squeeze_compose(kappa1: f64, kappa2: f64) -> Result<SymplecticMatrix2> {
    if !(kappa1 > 0.0) || !(kappa2 > 0.0) {
        return Err(invalid("squeeze_compose needs kappa1, kappa2 > 0"));
    }
    SymplecticMatrix2::diagonal(-kappa2 / kappa1)
}

/// Symmetric product `vn…v1 v0 v1…vn` of equidiagonal factors.
///
/// Every factor must satisfy `|v11 - v22| <= tol`; the result is then
/// equidiagonal as well.
pub fn symmetric_product(vs: &[SymplecticMatrix2], tol: f64) -> Result<SymplecticMatrix2> {
    let (center, shells) = vs
        .split_first()
        .ok_or_else(|| invalid("symmetric_product needs at least the central factor"))?;
    for (index, v) in vs.iter().enumerate() {
        let gap = (v.u11 - v.u22).abs();
        if gap > tol {
            return Err(Error::NotEquidiagonal { index, gap });
        }
    }
    Ok(shells
        .iter()
        .fold(*center, |acc, v| compose(&compose(v, &acc), v)))
}

pub fn is_equidiagonal(u: &SymplecticMatrix2, tol: f64) -> bool {
    (u.u11 - u.u22).abs() <= tol
}
