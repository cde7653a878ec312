//! Laboratory magnitudes in Gaussian (CGS) units: scales, Paul-trap
//! voltages, magnetic amplitudes, scaling laws across operation times,
//! radiative pollution, solenoid corrections and rotating-cylinder fields.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{integrate_path, IntegratorConfig};
use crate::profile::BetaProfile;
use crate::symplectic::CanonicalState;

pub mod constants {
    /// erg s
    pub const HBAR: f64 = 1.054_571_817e-27;
    /// cm / s
    pub const C: f64 = 2.997_924_58e10;
    /// g
    pub const PROTON_MASS: f64 = 1.672_621_923_69e-24;
    /// esu
    pub const ELEMENTARY_CHARGE: f64 = 4.803_204_712_57e-10;
    /// V per statvolt
    pub const VOLTS_PER_STATVOLT: f64 = 299.792_458;
    /// esu per coulomb
    pub const ESU_PER_COULOMB: f64 = 2.997_924_58e9;
    /// erg per eV
    pub const ERG_PER_EV: f64 = 1.602_176_634e-12;
}

use constants::*;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalContext {
    /// g
    pub mass: f64,
    /// esu
    pub charge: f64,
    /// cm
    pub r0: f64,
    /// s
    pub t_scale: f64,
    /// erg s
    #[serde(default = "default_hbar")]
    pub hbar: f64,
}

fn default_hbar() -> f64 {
    HBAR
}

impl PhysicalContext {
    pub fn new(mass: f64, charge: f64, r0: f64, t_scale: f64, hbar: f64) -> Result<Self> {
        let ctx = Self {
            mass,
            charge,
            r0,
            t_scale,
            hbar,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn proton(r0: f64, t_scale: f64) -> Result<Self> {
        Self::new(PROTON_MASS, ELEMENTARY_CHARGE, r0, t_scale, HBAR)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass", self.mass),
            ("charge", self.charge),
            ("r0", self.r0),
            ("t_scale", self.t_scale),
            ("hbar", self.hbar),
        ];
        for (name, v) in fields {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn with_t_scale(&self, t_scale: f64) -> Result<Self> {
        Self::new(self.mass, self.charge, self.r0, t_scale, self.hbar)
    }

    /// cm
    pub fn q_unit(&self) -> f64 {
        (self.hbar * self.t_scale / self.mass).sqrt()
    }

    /// g cm / s
    pub fn p_unit(&self) -> f64 {
        (self.hbar * self.mass / self.t_scale).sqrt()
    }

    /// Abraham-Lorentz time `2 e² / (3 m c³)`, s.
    pub fn characteristic_time(&self) -> f64 {
        2.0 * self.charge * self.charge / (3.0 * self.mass * C.powi(3))
    }
}

/// `(q, p, t)` in cm, g cm/s, s to dimensionless `(q_d, p_d, tau)`.
pub fn to_dimensionless(ctx: &PhysicalContext, q: f64, p: f64, t: f64) -> (f64, f64, f64) {
    (q / ctx.q_unit(), p / ctx.p_unit(), t / ctx.t_scale)
}

pub fn from_dimensionless(ctx: &PhysicalContext, q_d: f64, p_d: f64, tau: f64) -> (f64, f64, f64) {
    (q_d * ctx.q_unit(), p_d * ctx.p_unit(), tau * ctx.t_scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaulVoltages {
    /// `omega² r0² m` in eV.
    pub energy_ev: f64,
    /// V
    pub phi0: f64,
    /// V
    pub phi1: f64,
}

/// `Phi0 = beta0 omega² r0² m / e`, `Phi1 = 2 beta1 omega² r0² m / e`.
pub fn paul_voltages(
    ctx: &PhysicalContext,
    beta0: f64,
    beta1: f64,
    omega: f64,
) -> Result<PaulVoltages> {
    if !(omega > 0.0) || !(beta0 >= 0.0) || !(beta1 >= 0.0) {
        return Err(invalid(
            "Paul voltages need omega > 0 and beta0, beta1 >= 0",
        ));
    }
    let energy = omega * omega * ctx.r0 * ctx.r0 * ctx.mass;
    let unit = energy / ctx.charge * VOLTS_PER_STATVOLT;
    Ok(PaulVoltages {
        energy_ev: energy / ERG_PER_EV,
        phi0: beta0 * unit,
        phi1: 2.0 * beta1 * unit,
    })
}

/// `B = (2 m c / (e T)) sqrt(beta)`, G.
pub fn magnetic_amplitude(ctx: &PhysicalContext, beta: f64) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(invalid(format!(
            "magnetic stiffness must be >= 0, got {beta}"
        )));
    }
    Ok(2.0 * ctx.mass * C / (ctx.charge * ctx.t_scale) * beta.sqrt())
}

/// Inverse of [`magnetic_amplitude`]: `beta = (e T B / (2 m c))²`.
pub fn beta_from_field(ctx: &PhysicalContext, b_gauss: f64) -> f64 {
    let x = ctx.charge * ctx.t_scale * b_gauss / (2.0 * ctx.mass * C);
    x * x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Q,
    P,
    V,
    PhiMax,
    BMax,
    Ratio,
}

impl Quantity {
    pub const ALL: [Quantity; 6] = [
        Quantity::Q,
        Quantity::P,
        Quantity::V,
        Quantity::PhiMax,
        Quantity::BMax,
        Quantity::Ratio,
    ];

    /// Power of `T` at fixed dimensionless design.
    pub fn exponent(&self) -> f64 {
        match self {
            Quantity::Q => 0.5,
            Quantity::P | Quantity::V => -0.5,
            Quantity::PhiMax => -2.0,
            Quantity::BMax | Quantity::Ratio => -1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Quantity::Q => "q",
            Quantity::P => "p",
            Quantity::V => "v",
            Quantity::PhiMax => "phi_max",
            Quantity::BMax => "b_max",
            Quantity::Ratio => "ratio",
        }
    }

    pub fn unit(&self) -> &'static str {
        match self {
            Quantity::Q => "cm",
            Quantity::P => "g cm/s",
            Quantity::V => "cm/s",
            Quantity::PhiMax => "V",
            Quantity::BMax => "G",
            Quantity::Ratio => "1",
        }
    }
}

/// Physical magnitudes of one dimensionless design at one time scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingBase {
    pub t_ref: f64,
    pub q: f64,
    pub p: f64,
    pub v: f64,
    pub phi_max: f64,
    pub b_max: f64,
    pub ratio: f64,
}

impl ScalingBase {
    /// From dimensionless amplitudes `q_d`, `p_d`, peak stiffness
    /// `beta_max` and dimensionless radiative ratio, at `ctx.t_scale`.
    /// The trap voltage takes `omega = 1/T`.
    pub fn estimate(
        ctx: &PhysicalContext,
        q_d: f64,
        p_d: f64,
        beta_max: f64,
        ratio_d: f64,
        sigma: f64,
    ) -> Result<Self> {
        let (q, p, _) = from_dimensionless(ctx, q_d, p_d, 0.0);
        let phi = paul_voltages(ctx, beta_max.abs(), 0.0, 1.0 / ctx.t_scale)?.phi0;
        Ok(Self {
            t_ref: ctx.t_scale,
            q,
            p,
            v: p / ctx.mass,
            phi_max: phi,
            b_max: magnetic_amplitude(ctx, beta_max.abs())?,
            ratio: ratio_d * sigma / ctx.t_scale,
        })
    }

    pub fn get(&self, q: Quantity) -> f64 {
        match q {
            Quantity::Q => self.q,
            Quantity::P => self.p,
            Quantity::V => self.v,
            Quantity::PhiMax => self.phi_max,
            Quantity::BMax => self.b_max,
            Quantity::Ratio => self.ratio,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub quantity: Quantity,
    pub unit: &'static str,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingTable {
    pub t_values: Vec<f64>,
    pub rows: Vec<ScalingRow>,
}

impl ScalingTable {
    pub fn row(&self, q: Quantity) -> &ScalingRow {
        self.rows
            .iter()
            .find(|r| r.quantity == q)
            .expect("all quantities present")
    }
}

/// Rescales `base` to each `T` with the exact power laws of [`Quantity`].
pub fn scaling_table(base: &ScalingBase, t_values: &[f64]) -> Result<ScalingTable> {
    if t_values.iter().any(|t| !(*t > 0.0)) || !(base.t_ref > 0.0) {
        return Err(invalid("time scales must be positive"));
    }
    let rows = Quantity::ALL
        .iter()
        .map(|&quantity| ScalingRow {
            quantity,
            unit: quantity.unit(),
            values: t_values
                .iter()
                .map(|t| base.get(quantity) * (t / base.t_ref).powf(quantity.exponent()))
                .collect(),
        })
        .collect();
    Ok(ScalingTable {
        t_values: t_values.to_vec(),
        rows,
    })
}

/// `<|x'''|> / <|x''|>` along the classical trajectory on `interval`,
/// with `x'' = -beta q` and `x''' = -beta' q - beta p`, scaled by
/// `sigma / T`.
pub fn radiative_ratio(
    pulse: &BetaProfile,
    interval: (f64, f64),
    init: CanonicalState,
    ctx: &PhysicalContext,
    sigma: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    const SAMPLES: usize = 2000;
    if !(sigma >= 0.0) {
        return Err(invalid("characteristic time must be >= 0"));
    }
    let (a, b) = interval;
    if !(b > a) {
        return Err(invalid("radiative ratio needs a nonempty interval"));
    }
    let grid: Vec<f64> = (0..=SAMPLES)
        .map(|i| {
            if i == SAMPLES {
                b
            } else {
                a + (b - a) * i as f64 / SAMPLES as f64
            }
        })
        .collect();
    let path = integrate_path(pulse, &grid, cfg)?;
    let mut acc2 = Vec::with_capacity(grid.len());
    let mut acc3 = Vec::with_capacity(grid.len());
    for (&tau, u) in grid.iter().zip(&path) {
        let q = u.u11() * init.q + u.u12() * init.p;
        let p = u.u21() * init.q + u.u22() * init.p;
        let beta = pulse.eval(tau)?;
        let dbeta = pulse.derivative(tau)?;
        acc2.push((beta * q).abs());
        acc3.push((dbeta * q + beta * p).abs());
    }
    let mean2 = trapezoid(&grid, &acc2);
    let mean3 = trapezoid(&grid, &acc3);
    if mean2 == 0.0 {
        return Err(Error::Undefined(
            "acceleration vanishes along the whole trajectory".into(),
        ));
    }
    Ok(mean3 / mean2 * sigma / ctx.t_scale)
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

/// `1 / (4^k k! (k+1)!)`.
pub fn solenoid_coefficient(k: u32) -> f64 {
    (solenoid_denominator(k) as f64).recip()
}

/// `4^k k! (k+1)!`, exact for `k <= 12`.
pub fn solenoid_denominator(k: u32) -> u128 {
    let factorial = |n: u32| (1..=n as u128).product::<u128>();
    4u128.pow(k) * factorial(k) * factorial(k + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolenoidField {
    /// G
    pub on_axis: f64,
    /// Term `k` of the radial series, G; index 0 is the on-axis field.
    pub terms: Vec<f64>,
    /// G
    pub corrected: f64,
}

/// Field at radius `r` from on-axis `tau`-derivatives
/// `derivs[j] = d^j B / d tau^j` (G), to order `(r / (c T))^(2n)`.
pub fn solenoid_correction(
    derivs: &[f64],
    r: f64,
    ctx: &PhysicalContext,
    n: u32,
) -> Result<SolenoidField> {
    let needed = 2 * n as usize + 1;
    if derivs.len() < needed {
        return Err(invalid(format!(
            "order {n} needs {needed} derivatives, got {}",
            derivs.len()
        )));
    }
    if n > 12 {
        return Err(invalid("solenoid order above 12 is not supported"));
    }
    if !(r >= 0.0 && r < ctx.r0) {
        return Err(invalid(format!("radius must lie in [0, r0), got {r}")));
    }
    let x = (r / (C * ctx.t_scale)).powi(2);
    let terms: Vec<f64> = (0..=n)
        .map(|k| solenoid_coefficient(k) * x.powi(k as i32) * derivs[2 * k as usize])
        .collect();
    Ok(SolenoidField {
        on_axis: derivs[0],
        corrected: terms.iter().sum(),
        terms,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeltConvention {
    /// `R sigma` is the charge on a 1 cm belt: `B = 4 pi omega Q / c`.
    #[default]
    Belt,
    /// Surface current of a charged cylinder, `Q = 2 pi R sigma`:
    /// `B = 2 omega Q / c`.
    Standard,
}

/// Field inside a cylinder carrying `q_lin` esu/cm rotating at `omega`, G.
pub fn rotating_cylinder_field(omega: f64, q_lin: f64, convention: BeltConvention) -> Result<f64> {
    if !(omega >= 0.0) || !(q_lin >= 0.0) {
        return Err(invalid("rotating cylinder needs omega, q_lin >= 0"));
    }
    Ok(match convention {
        BeltConvention::Belt => 4.0 * std::f64::consts::PI / C * omega * q_lin,
        BeltConvention::Standard => 2.0 * omega * q_lin / C,
    })
}
