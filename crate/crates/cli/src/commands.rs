use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;

use softsqueeze::evolution::ZONE_BAND;
use softsqueeze::mathieu::trace_locus_on;
use softsqueeze::packets::{Shadow, BELT_RADIUS};
use softsqueeze::physical::{
    constants, paul_voltages, radiative_ratio, rotating_cylinder_field, scaling_table,
    solenoid_coefficient, solenoid_correction, PaulVoltages, ScalingBase, ScalingTable,
    SolenoidField,
};
use softsqueeze::report::{self, json_report};
use softsqueeze::{
    build_pulse, classify, congruence, find_double_zero, gaussian_init, integrate, integrate_path,
    scan_grid, shadow as run_shadow, solve_theta_coeffs, validate_lemma, verify_design,
    BeltConvention, BetaProfile, CanonicalState, DesignReport, DesignedPulse, IntegratorConfig,
    LemmaReport, NewtonOptions, PhysicalContext, ScanRect, SymplecticMatrix2, Tail, Zone,
    ZoneReport,
};

use crate::config::{load_profile, profile_from_value, CliError, CliResult, Format, RunConfig};
use crate::{DesignArgs, EvolveArgs, PulseArgs, ScanArgs, ShadowArgs, SolenoidArgs, UnitsArgs};

/// Samples used by the lemma check on each designed stage.
const LEMMA_SAMPLES: usize = 400;
/// Stages of the default two-stage pulse.
const DEFAULT_B: [f64; 2] = [5.0 / 3.0, 184.0 / 95.0];

pub struct Context {
    pub integrator: IntegratorConfig,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Context {
    fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn sink(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }

    fn emit_json<T: Serialize>(&self, kind: &str, data: &T) -> CliResult<()> {
        let mut value = json_report(kind, data)?;
        if let (Some(seed), Value::Object(map)) = (self.seed, &mut value) {
            map.insert("seed".into(), seed.into());
        }
        let mut w = self.sink()?;
        serde_json::to_writer_pretty(&mut w, &value).map_err(softsqueeze::Error::from)?;
        writeln!(w)
            .and_then(|_| w.flush())
            .map_err(softsqueeze::Error::from)?;
        Ok(())
    }

    fn emit_csv(
        &self,
        write: impl FnOnce(&mut dyn Write) -> softsqueeze::Result<()>,
    ) -> CliResult<()> {
        let mut w = self.sink()?;
        write(&mut w)?;
        w.flush().map_err(softsqueeze::Error::from)?;
        Ok(())
    }
}

fn create(path: &Path) -> CliResult<File> {
    File::create(path)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", path.display())))
}

fn csv_rows(w: &mut dyn Write, header: &[&str], rows: &[Vec<String>]) -> softsqueeze::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn linspace(a: f64, b: f64, n: usize) -> CliResult<Vec<f64>> {
    if n < 2 {
        return Err(CliError::Config("need at least 2 sample points".into()));
    }
    Ok((0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect())
}

fn profile_arg(flag: Option<&str>, file: &RunConfig) -> CliResult<Option<BetaProfile>> {
    match (flag, &file.profile) {
        (Some(s), _) => load_profile(s).map(Some),
        (None, Some(v)) => profile_from_value(v).map(Some),
        (None, None) => Ok(None),
    }
}

fn interval_arg(from: Option<f64>, to: Option<f64>, file: &RunConfig) -> CliResult<(f64, f64)> {
    let from = from.or(file.from.map(|r| r.0));
    let to = to.or(file.to.map(|r| r.0));
    match (from, to) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(CliError::Config("--from and --to are required".into())),
    }
}

#[derive(Serialize)]
struct EvolveReport {
    from: f64,
    to: f64,
    matrix: SymplecticMatrix2,
    det: f64,
    gamma: f64,
    zone: ZoneReport,
}

pub fn evolve(ctx: &Context, a: &EvolveArgs, file: &RunConfig) -> CliResult<()> {
    let profile = profile_arg(a.profile.as_deref(), file)?
        .ok_or_else(|| CliError::Config("evolve needs --profile".into()))?;
    let (from, to) = interval_arg(a.from, a.to, file)?;
    let u = integrate(&profile, from, to, &ctx.integrator)?;
    let zone = classify(&u, ZONE_BAND)?;
    eprintln!(
        "u = {u}, det = {:.15}, Gamma = {:.9}, zone {}",
        u.det(),
        zone.gamma,
        zone.zone
    );
    match ctx.format_or(Format::Json) {
        Format::Json => ctx.emit_json(
            "evolve",
            &EvolveReport {
                from,
                to,
                matrix: u,
                det: u.det(),
                gamma: zone.gamma,
                zone,
            },
        ),
        Format::Csv => ctx.emit_csv(|w| {
            let mut row: Vec<String> = [from, to].into_iter().map(num).collect();
            row.extend(u.entries().iter().map(|x| num(*x)));
            row.extend([num(u.det()), num(zone.gamma), zone.zone.to_string()]);
            csv_rows(
                w,
                &[
                    "from [1]",
                    "to [1]",
                    "u11 [1]",
                    "u12 [1]",
                    "u21 [1]",
                    "u22 [1]",
                    "det [1]",
                    "gamma [1]",
                    "zone",
                ],
                &[row],
            )
        }),
    }
}

pub fn scan(ctx: &Context, a: &ScanArgs) -> CliResult<()> {
    let interval = (a.from, a.to);
    if a.double_zero {
        let seed = a
            .seed
            .ok_or_else(|| CliError::Config("--double-zero needs --seed".into()))?;
        let opts = NewtonOptions {
            interval,
            ..NewtonOptions::default()
        };
        let root = find_double_zero(seed, &opts, &ctx.integrator)?;
        eprintln!(
            "double zero at ({:.8}, {:.8}) after {} iterations, residual {:.1e}",
            root.beta0, root.beta1, root.iterations, root.residual
        );
        return match ctx.format_or(Format::Json) {
            Format::Json => ctx.emit_json("double_zero", &root),
            Format::Csv => ctx.emit_csv(|w| {
                let mut row = vec![num(root.beta0), num(root.beta1)];
                row.extend(root.matrix.entries().iter().map(|x| num(*x)));
                row.extend([root.iterations.to_string(), num(root.residual)]);
                csv_rows(
                    w,
                    &[
                        "beta0 [1]",
                        "beta1 [1]",
                        "u11 [1]",
                        "u12 [1]",
                        "u21 [1]",
                        "u22 [1]",
                        "iterations",
                        "residual [1]",
                    ],
                    &[row],
                )
            }),
        };
    }
    let rect = ScanRect {
        beta0: a.beta0,
        beta1: a.beta1,
        n0: a.n0,
        n1: a.n1,
        interval,
    };
    let grid = scan_grid(&rect, &ctx.integrator)?;
    eprintln!(
        "zone I: {}, zone II: {}, zone III: {}, failed: {}",
        grid.count_zone(Zone::I),
        grid.count_zone(Zone::II),
        grid.count_zone(Zone::III),
        grid.failures().count()
    );
    match a.locus {
        Some(entry) => {
            let points = trace_locus_on(&grid, entry, &ctx.integrator)?;
            eprintln!("{} locus points for {entry}", points.len());
            match ctx.format_or(Format::Csv) {
                Format::Json => ctx.emit_json("locus", &points),
                Format::Csv => ctx.emit_csv(|w| report::write_locus_csv(w, &points)),
            }
        }
        None => match ctx.format_or(Format::Csv) {
            Format::Json => ctx.emit_json("scan", &grid),
            Format::Csv => ctx.emit_csv(|w| report::write_scan_csv(w, &grid)),
        },
    }
}

struct Built {
    pulse: DesignedPulse,
    lemma: Vec<LemmaReport>,
}

fn build_chain(p: &PulseArgs) -> CliResult<Built> {
    let b = if p.b.is_empty() {
        DEFAULT_B.to_vec()
    } else {
        p.b.clone()
    };
    let beta0 = match p.beta0.len() {
        0 => vec![0.0; b.len()],
        1 => vec![p.beta0[0]; b.len()],
        n if n == b.len() => p.beta0.clone(),
        n => {
            return Err(CliError::Config(format!(
                "{n} --beta0 values for {} stages",
                b.len()
            )))
        }
    };
    let mut pulse: Option<DesignedPulse> = None;
    let mut lemma = Vec::with_capacity(b.len());
    for (k, (&amp, &beta0)) in b.iter().zip(&beta0).enumerate() {
        let theta = solve_theta_coeffs(amp, beta0)?;
        lemma.push(validate_lemma(
            &theta,
            (-FRAC_PI_2, FRAC_PI_2),
            LEMMA_SAMPLES,
        )?);
        let tail = if p.tail && k + 1 == b.len() {
            Some(Tail::quarter_period(beta0)?)
        } else {
            None
        };
        let stage = build_pulse(&theta, tail)?;
        pulse = Some(match pulse {
            Some(prev) => prev.then(&stage)?,
            None => stage,
        });
    }
    Ok(Built {
        pulse: pulse.expect("at least one stage"),
        lemma,
    })
}

fn beta_samples(pulse: &DesignedPulse, n: usize) -> CliResult<Vec<(f64, f64)>> {
    let (a, b) = pulse.interval();
    linspace(a, b, n)?
        .into_iter()
        .map(|t| Ok((t, pulse.profile().eval(t)?)))
        .collect()
}

#[derive(Serialize)]
struct DesignOutput<'a> {
    pulse: &'a DesignedPulse,
    lemma: &'a [LemmaReport],
    verification: Option<DesignReport>,
}

pub fn design(ctx: &Context, a: &DesignArgs) -> CliResult<()> {
    if a.pulse.b.is_empty() {
        return Err(CliError::Config("design needs at least one --b".into()));
    }
    let built = build_chain(&a.pulse)?;
    let lemma_ok = built.lemma.iter().all(LemmaReport::passed);
    let verification = if lemma_ok {
        Some(verify_design(&built.pulse, &ctx.integrator)?)
    } else {
        None
    };
    let samples = if lemma_ok {
        Some(beta_samples(&built.pulse, a.samples)?)
    } else {
        None
    };
    if let (Some(path), Some(rows)) = (&a.beta_csv, &samples) {
        report::write_series_csv(create(path)?, ["tau [1]", "beta [1]"], rows)?;
    }
    match (ctx.format_or(Format::Json), &samples) {
        (Format::Csv, Some(rows)) => {
            ctx.emit_csv(|w| report::write_series_csv(w, ["tau [1]", "beta [1]"], rows))?
        }
        _ => ctx.emit_json(
            "design",
            &DesignOutput {
                pulse: &built.pulse,
                lemma: &built.lemma,
                verification: verification.clone(),
            },
        )?,
    }
    if !lemma_ok {
        let bad: Vec<String> = built
            .lemma
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.passed())
            .map(|(k, r)| {
                let taus: Vec<String> = r.violations().map(|z| format!("{:.6}", z.tau)).collect();
                format!("stage {k}: theta' != +-2 at tau = {}", taus.join(", "))
            })
            .collect();
        return Err(CliError::Validation(format!(
            "lemma violated: {}",
            bad.join("; ")
        )));
    }
    let report = verification.expect("verified when the lemma holds");
    match (report.lambda, report.amplification) {
        (Some(l), Some(amp)) => eprintln!("lambda = {l:.7}, amplification {amp:.7}"),
        (Some(l), None) => eprintln!("lambda = {l:.7}"),
        _ => eprintln!("total = {}", report.total),
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Validation(report.failures.join("; ")))
    }
}

#[derive(Serialize)]
struct ShadowOutput<'a> {
    shadow: &'a Shadow,
    belt_radius: f64,
    within_belt: bool,
}

pub fn shadow(ctx: &Context, a: &ShadowArgs, file: &RunConfig) -> CliResult<()> {
    let explicit = if a.pulse.b.is_empty() {
        profile_arg(a.profile.as_deref(), file)?
    } else {
        None
    };
    let (profile, (from, to)) = match explicit {
        Some(p) => (p, interval_arg(a.from, a.to, file)?),
        None => {
            let built = build_chain(&a.pulse)?;
            if let Some(bad) = built.lemma.iter().position(|r| !r.passed()) {
                return Err(CliError::Validation(format!(
                    "lemma violated by stage {bad}"
                )));
            }
            let interval = built.pulse.interval();
            (built.pulse.profile().clone(), interval)
        }
    };
    let grid = linspace(from, to, a.points)?;
    if !a.inits.is_empty() {
        let inits: Vec<CanonicalState> = a
            .inits
            .iter()
            .map(|&(q, p)| CanonicalState::new(q, p))
            .collect();
        let c = congruence(&profile, &inits, &grid, &ctx.integrator)?;
        return match ctx.format_or(Format::Csv) {
            Format::Json => ctx.emit_json("congruence", &c),
            Format::Csv => ctx.emit_csv(|w| report::write_congruence_csv(w, &c)),
        };
    }
    let init = gaussian_init(a.kappa, a.q0, a.p0)?;
    let sh = run_shadow(&profile, &init, &grid, &ctx.integrator)?;
    let belt = if a.belt > 0.0 { a.belt } else { BELT_RADIUS };
    eprintln!(
        "max Delta q = {:.6} at tau = {:.6}, extent {:.4} (belt {belt})",
        sh.max_dq, sh.tau_of_max_dq, sh.max_extent
    );
    match ctx.format_or(Format::Csv) {
        Format::Json => ctx.emit_json(
            "shadow",
            &ShadowOutput {
                shadow: &sh,
                belt_radius: belt,
                within_belt: sh.within_belt(belt),
            },
        ),
        Format::Csv => ctx.emit_csv(|w| report::write_shadow_csv(w, &sh)),
    }
}

#[derive(Serialize)]
struct ReferenceDesign {
    b: [f64; 2],
    q_max: f64,
    p_max: f64,
    beta_max: f64,
    ratio: f64,
}

#[derive(Serialize)]
struct UnitsOutput {
    context: PhysicalContext,
    omega: f64,
    frequency_convention: &'static str,
    paul: PaulVoltages,
    reference_design: ReferenceDesign,
    sigma: f64,
    scaling: ScalingTable,
}

/// Amplitudes of the default two-stage pulse for a unit displacement.
fn reference_design(cfg: &IntegratorConfig) -> CliResult<ReferenceDesign> {
    let built = build_chain(&PulseArgs {
        b: DEFAULT_B.to_vec(),
        beta0: vec![0.0],
        tail: false,
    })?;
    let profile = built.pulse.profile().clone();
    let (a, b) = built.pulse.interval();
    let grid = linspace(a, b, 2001)?;
    let path = integrate_path(&profile, &grid, cfg)?;
    let (mut q_max, mut p_max, mut beta_max) = (0.0f64, 0.0f64, 0.0f64);
    for (t, u) in grid.iter().zip(&path) {
        q_max = q_max.max(u.u11().abs());
        p_max = p_max.max(u.u21().abs());
        beta_max = beta_max.max(profile.eval(*t)?.abs());
    }
    let unit = PhysicalContext::proton(1.0, 1.0)?;
    let ratio = radiative_ratio(
        &profile,
        (a, b),
        CanonicalState::new(1.0, 0.0),
        &unit,
        1.0,
        cfg,
    )?;
    Ok(ReferenceDesign {
        b: DEFAULT_B,
        q_max,
        p_max,
        beta_max,
        ratio,
    })
}

pub fn units(ctx: &Context, a: &UnitsArgs) -> CliResult<()> {
    let pctx = PhysicalContext::new(
        a.mass.unwrap_or(constants::PROTON_MASS),
        a.charge.unwrap_or(constants::ELEMENTARY_CHARGE),
        a.r0,
        a.t_scale,
        constants::HBAR,
    )?;
    let paul = paul_voltages(&pctx, a.beta0, a.beta1, a.omega)?;
    eprintln!(
        "energy {:.5} eV, Phi0 {:.4} V, Phi1 {:.4} V at omega = {} 1/s",
        paul.energy_ev, paul.phi0, paul.phi1, a.omega
    );
    let design = reference_design(&ctx.integrator)?;
    let sigma = a.sigma.unwrap_or_else(|| pctx.characteristic_time());
    let base = ScalingBase::estimate(
        &pctx,
        design.q_max,
        design.p_max,
        design.beta_max,
        design.ratio,
        sigma,
    )?;
    let scaling = scaling_table(&base, &a.t_values)?;
    match ctx.format_or(Format::Json) {
        Format::Json => ctx.emit_json(
            "units",
            &UnitsOutput {
                context: pctx,
                omega: a.omega,
                frequency_convention: "omega = c / wavelength, no 2 pi",
                paul,
                reference_design: design,
                sigma,
                scaling,
            },
        ),
        Format::Csv => ctx.emit_csv(|w| report::write_scaling_csv(w, &scaling)),
    }
}

#[derive(Serialize)]
struct CylinderOutput {
    omega: f64,
    q_lin: f64,
    convention: BeltConvention,
    field: f64,
}

#[derive(Serialize)]
struct SeriesOutput {
    r: f64,
    order: u32,
    r0: f64,
    t_scale: f64,
    coefficients: Vec<f64>,
    field: SolenoidField,
}

pub fn solenoid(ctx: &Context, a: &SolenoidArgs) -> CliResult<()> {
    if a.cylinder {
        let convention = BeltConvention::from(a.convention);
        let field = rotating_cylinder_field(a.omega, a.qlin, convention)?;
        eprintln!("B = {field:.6} G");
        return match ctx.format_or(Format::Json) {
            Format::Json => ctx.emit_json(
                "rotating_cylinder",
                &CylinderOutput {
                    omega: a.omega,
                    q_lin: a.qlin,
                    convention,
                    field,
                },
            ),
            Format::Csv => ctx.emit_csv(|w| {
                csv_rows(
                    w,
                    &["omega [1/s]", "q_lin [esu/cm]", "convention", "B [G]"],
                    &[vec![
                        num(a.omega),
                        num(a.qlin),
                        format!("{:?}", a.convention).to_lowercase(),
                        num(field),
                    ]],
                )
            }),
        };
    }
    if a.derivs.is_empty() {
        return Err(CliError::Config(
            "solenoid needs --derivs or --cylinder".into(),
        ));
    }
    let pctx = PhysicalContext::proton(a.r0, a.t_scale)?;
    let field = solenoid_correction(&a.derivs, a.r, &pctx, a.order)?;
    eprintln!(
        "B(r = {}) = {:.9} G, on axis {:.9} G",
        a.r, field.corrected, field.on_axis
    );
    let coefficients: Vec<f64> = (0..=a.order).map(solenoid_coefficient).collect();
    match ctx.format_or(Format::Json) {
        Format::Json => ctx.emit_json(
            "solenoid",
            &SeriesOutput {
                r: a.r,
                order: a.order,
                r0: a.r0,
                t_scale: a.t_scale,
                coefficients,
                field,
            },
        ),
        Format::Csv => ctx.emit_csv(|w| {
            let rows: Vec<Vec<String>> = field
                .terms
                .iter()
                .zip(&coefficients)
                .enumerate()
                .map(|(k, (t, c))| vec![k.to_string(), num(*c), num(*t)])
                .collect();
            csv_rows(w, &["k", "coefficient [1]", "term [G]"], &rows)
        }),
    }
}
