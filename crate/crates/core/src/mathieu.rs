//! Scans of the Mathieu plane `beta = beta0 + 2 beta1 cos tau` over a fixed
//! interval: zone maps, loci of vanishing off-diagonal entries and their
//! intersections (pure position-momentum squeezing).

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::evolution::{classify, integrate, IntegratorConfig, Zone, ZoneReport, ZONE_BAND};
use crate::profile::BetaProfile;
use crate::symplectic::SymplecticMatrix2;

/// Locus refinement stops once `|entry|` drops below this.
pub const LOCUS_TOL: f64 = 1e-8;
const BISECT_MAX_ITER: usize = 60;
const BISECT_WIDTH: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRect {
    pub beta0: (f64, f64),
    pub beta1: (f64, f64),
    pub n0: usize,
    pub n1: usize,
    pub interval: (f64, f64),
}

impl Default for ScanRect {
    fn default() -> Self {
        Self {
            beta0: (0.9, 1.9),
            beta1: (0.5, 1.6),
            n0: 200,
            n1: 200,
            interval: (FRAC_PI_2, 2.5 * PI),
        }
    }
}

impl ScanRect {
    /// Degenerate ranges (`lo == hi`) are allowed and give repeated nodes.
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("beta0", self.beta0), ("beta1", self.beta1)] {
            if !(lo.is_finite() && hi.is_finite()) || hi < lo {
                return Err(invalid(format!(
                    "{name} range needs lo <= hi, got [{lo}, {hi}]"
                )));
            }
        }
        if self.n0 < 2 || self.n1 < 2 {
            return Err(invalid("scan grid needs at least 2 nodes per axis"));
        }
        let (a, b) = self.interval;
        if !(a.is_finite() && b.is_finite()) || !(b > a) {
            return Err(invalid(format!(
                "scan interval needs start < end, got [{a}, {b}]"
            )));
        }
        Ok(())
    }

    pub fn beta0_at(&self, i: usize) -> f64 {
        lerp(self.beta0, i as f64 / (self.n0 - 1) as f64)
    }

    pub fn beta1_at(&self, j: usize) -> f64 {
        lerp(self.beta1, j as f64 / (self.n1 - 1) as f64)
    }
}

fn lerp((lo, hi): (f64, f64), t: f64) -> f64 {
    lo + (hi - lo) * t
}

/// Evolution matrix over `interval` for one Mathieu pair.
pub fn interval_matrix(
    beta0: f64,
    beta1: f64,
    interval: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<SymplecticMatrix2> {
    integrate(
        &BetaProfile::mathieu(beta0, beta1),
        interval.0,
        interval.1,
        cfg,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanNode {
    pub beta0: f64,
    pub beta1: f64,
    pub matrix: Option<SymplecticMatrix2>,
    pub zone: Option<ZoneReport>,
    /// Set when integration or classification failed at this node.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanGrid {
    pub rect: ScanRect,
    /// Row-major: `beta0` index outer, `beta1` index inner.
    pub nodes: Vec<ScanNode>,
}

impl ScanGrid {
    pub fn node(&self, i: usize, j: usize) -> &ScanNode {
        &self.nodes[i * self.rect.n1 + j]
    }

    pub fn count_zone(&self, zone: Zone) -> usize {
        self.nodes
            .iter()
            .filter(|n| n.zone.as_ref().map(|z| z.zone) == Some(zone))
            .count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &ScanNode> {
        self.nodes.iter().filter(|n| n.error.is_some())
    }
}

pub fn scan_grid(rect: &ScanRect, cfg: &IntegratorConfig) -> Result<ScanGrid> {
    rect.validate()?;
    cfg.validate()?;
    let nodes = (0..rect.n0 * rect.n1)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / rect.n1, k % rect.n1);
            let (beta0, beta1) = (rect.beta0_at(i), rect.beta1_at(j));
            let outcome = interval_matrix(beta0, beta1, rect.interval, cfg)
                .and_then(|u| Ok((u, classify(&u, ZONE_BAND)?)));
            match outcome {
                Ok((u, z)) => ScanNode {
                    beta0,
                    beta1,
                    matrix: Some(u),
                    zone: Some(z),
                    error: None,
                },
                Err(e) => ScanNode {
                    beta0,
                    beta1,
                    matrix: None,
                    zone: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(ScanGrid { rect: *rect, nodes })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entry {
    U12,
    U21,
}

impl Entry {
    pub fn of(&self, u: &SymplecticMatrix2) -> f64 {
        match self {
            Entry::U12 => u.u12(),
            Entry::U21 => u.u21(),
        }
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Entry::U12 => "u12",
            Entry::U21 => "u21",
        })
    }
}

impl FromStr for Entry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "u12" => Ok(Entry::U12),
            "u21" => Ok(Entry::U21),
            other => Err(invalid(format!("entry must be u12 or u21, got {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocusPoint {
    pub beta0: f64,
    pub beta1: f64,
    pub entry: Entry,
    pub residual: f64,
    /// Surviving `u11`.
    pub lambda: f64,
}

/// Refines every sign change of `entry` along grid edges by bisection.
pub fn trace_locus(
    rect: &ScanRect,
    entry: Entry,
    cfg: &IntegratorConfig,
) -> Result<Vec<LocusPoint>> {
    let grid = scan_grid(rect, cfg)?;
    trace_locus_on(&grid, entry, cfg)
}

/// As [`trace_locus`], reusing an existing scan.
pub fn trace_locus_on(
    grid: &ScanGrid,
    entry: Entry,
    cfg: &IntegratorConfig,
) -> Result<Vec<LocusPoint>> {
    let rect = grid.rect;
    let value = |n: &ScanNode| n.matrix.as_ref().map(|u| entry.of(u));
    let mut edges = Vec::new();
    for i in 0..rect.n0 {
        for j in 0..rect.n1 {
            let here = grid.node(i, j);
            let Some(v) = value(here) else { continue };
            let p = (here.beta0, here.beta1);
            if v == 0.0 {
                edges.push((p, p, v));
                continue;
            }
            for (ni, nj) in [(i + 1, j), (i, j + 1)] {
                if ni >= rect.n0 || nj >= rect.n1 {
                    continue;
                }
                let there = grid.node(ni, nj);
                let Some(w) = value(there) else { continue };
                if v * w < 0.0 {
                    edges.push((p, (there.beta0, there.beta1), v));
                }
            }
        }
    }
    let mut points: Vec<LocusPoint> = edges
        .into_par_iter()
        .filter_map(|(a, b, fa)| refine_edge(a, b, fa, entry, rect.interval, cfg).transpose())
        .collect::<Result<_>>()?;
    points.sort_by(|p, q| {
        p.beta0
            .total_cmp(&q.beta0)
            .then(p.beta1.total_cmp(&q.beta1))
    });
    Ok(points)
}

fn refine_edge(
    a: (f64, f64),
    b: (f64, f64),
    fa: f64,
    entry: Entry,
    interval: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Option<LocusPoint>> {
    let at = |t: f64| (lerp((a.0, b.0), t), lerp((a.1, b.1), t));
    let eval = |t: f64| -> Result<(f64, SymplecticMatrix2)> {
        let (b0, b1) = at(t);
        let u = interval_matrix(b0, b1, interval, cfg)?;
        Ok((entry.of(&u), u))
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut sign_lo = fa.signum();
    let span = (b.0 - a.0).hypot(b.1 - a.1).max(f64::MIN_POSITIVE);
    let mut best = if fa == 0.0 {
        Some((0.0, eval(0.0)?))
    } else {
        None
    };
    for _ in 0..BISECT_MAX_ITER {
        if best.is_some() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (fm, u) = eval(mid)?;
        if fm.abs() <= LOCUS_TOL || (hi - lo) * span <= BISECT_WIDTH {
            best = Some((mid, (fm, u)));
            break;
        }
        if fm.signum() == sign_lo {
            lo = mid;
            sign_lo = fm.signum();
        } else {
            hi = mid;
        }
    }
    let Some((t, (residual, u))) = best else {
        return Ok(None);
    };
    if residual.abs() > LOCUS_TOL {
        return Ok(None);
    }
    let (beta0, beta1) = at(t);
    Ok(Some(LocusPoint {
        beta0,
        beta1,
        entry,
        residual,
        lambda: u.u11(),
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoubleZero {
    pub beta0: f64,
    pub beta1: f64,
    pub matrix: SymplecticMatrix2,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub interval: (f64, f64),
    pub tol: f64,
    pub max_iter: usize,
    /// Central-difference step for the Jacobian.
    pub fd_step: f64,
    /// Iterates farther than this from the seed count as divergence.
    pub max_excursion: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            interval: (FRAC_PI_2, 2.5 * PI),
            tol: 1e-12,
            max_iter: 50,
            fd_step: 1e-6,
            max_excursion: 0.5,
        }
    }
}

/// Damped Newton on `(u12, u21) = (0, 0)` in the `(beta0, beta1)` plane.
pub fn find_double_zero(
    seed: (f64, f64),
    opts: &NewtonOptions,
    cfg: &IntegratorConfig,
) -> Result<DoubleZero> {
    let residual_at = |x: (f64, f64)| -> Result<([f64; 2], SymplecticMatrix2)> {
        let u = interval_matrix(x.0, x.1, opts.interval, cfg)?;
        Ok(([u.u12(), u.u21()], u))
    };
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let fail = |x: (f64, f64), r: f64, reason: String| Error::NoConvergence {
        beta0: x.0,
        beta1: x.1,
        residual: r,
        reason,
    };

    let (mut r, mut u) = residual_at(seed)?;
    let zone = classify(&u, ZONE_BAND)?.zone;
    if zone != Zone::III {
        return Err(fail(
            seed,
            norm(r),
            format!("seed lies in zone {zone}, which has no squeezing zeros"),
        ));
    }
    let mut x = seed;
    for iter in 0..=opts.max_iter {
        if norm(r) <= opts.tol {
            return Ok(DoubleZero {
                beta0: x.0,
                beta1: x.1,
                matrix: u,
                iterations: iter,
                residual: norm(r),
            });
        }
        if iter == opts.max_iter {
            break;
        }
        let h = opts.fd_step;
        let (rp0, _) = residual_at((x.0 + h, x.1))?;
        let (rm0, _) = residual_at((x.0 - h, x.1))?;
        let (rp1, _) = residual_at((x.0, x.1 + h))?;
        let (rm1, _) = residual_at((x.0, x.1 - h))?;
        let j = [
            [(rp0[0] - rm0[0]) / (2.0 * h), (rp1[0] - rm1[0]) / (2.0 * h)],
            [(rp0[1] - rm0[1]) / (2.0 * h), (rp1[1] - rm1[1]) / (2.0 * h)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(fail(x, norm(r), "singular Jacobian".into()));
        }
        let dx = [
            -(j[1][1] * r[0] - j[0][1] * r[1]) / det,
            -(-j[1][0] * r[0] + j[0][0] * r[1]) / det,
        ];
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial = (x.0 + step * dx[0], x.1 + step * dx[1]);
            let (rt, ut) = residual_at(trial)?;
            if norm(rt) < norm(r) {
                accepted = Some((trial, rt, ut));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, rt, ut)) = accepted else {
            if norm(r) <= 1e3 * opts.tol {
                break;
            }
            return Err(fail(
                x,
                norm(r),
                "damped step failed to reduce the residual".into(),
            ));
        };
        x = trial;
        r = rt;
        u = ut;
        if (x.0 - seed.0).hypot(x.1 - seed.1) > opts.max_excursion {
            return Err(fail(
                x,
                norm(r),
                "iterates left the seed neighbourhood".into(),
            ));
        }
    }
    if norm(r) <= 1e3 * opts.tol {
        return Ok(DoubleZero {
            beta0: x.0,
            beta1: x.1,
            matrix: u,
            iterations: opts.max_iter,
            residual: norm(r),
        });
    }
    Err(fail(
        x,
        norm(r),
        format!("no convergence in {} iterations", opts.max_iter),
    ))
}
