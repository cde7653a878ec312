//! CSV and JSON emission. Every CSV starts with a single header row
//! of `name [unit]` columns; JSON reports carry `schema_version`.

use std::io::Write;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::mathieu::{LocusPoint, ScanGrid};
use crate::packets::{Congruence, Shadow};
use crate::physical::ScalingTable;

pub const SCHEMA_VERSION: u32 = 1;

/// `{"schema_version", "kind", "data"}` envelope.
pub fn json_report<T: Serialize>(kind: &str, data: &T) -> Result<Value> {
    Ok(json!({
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "data": serde_json::to_value(data)?,
    }))
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

pub fn write_scan_csv<W: Write>(w: W, grid: &ScanGrid) -> Result<()> {
    let mut out = writer(
        w,
        &[
            "beta0 [1]",
            "beta1 [1]",
            "u11 [1]",
            "u12 [1]",
            "u21 [1]",
            "u22 [1]",
            "gamma [1]",
            "zone",
        ],
    )?;
    for n in &grid.nodes {
        let mut row = vec![num(n.beta0), num(n.beta1)];
        match (&n.matrix, &n.zone) {
            (Some(u), Some(z)) => {
                row.extend(u.entries().iter().map(|x| num(*x)));
                row.push(num(z.gamma));
                row.push(z.zone.to_string());
            }
            _ => {
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push("failed".into());
            }
        }
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_locus_csv<W: Write>(w: W, points: &[LocusPoint]) -> Result<()> {
    let mut out = writer(
        w,
        &[
            "beta0 [1]",
            "beta1 [1]",
            "entry",
            "lambda [1]",
            "residual [1]",
        ],
    )?;
    for p in points {
        out.write_record([
            num(p.beta0),
            num(p.beta1),
            p.entry.to_string(),
            num(p.lambda),
            num(p.residual),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_shadow_csv<W: Write>(w: W, shadow: &Shadow) -> Result<()> {
    let mut out = writer(
        w,
        &["tau [1]", "q_mean [1]", "p_mean [1]", "dq [1]", "dp [1]"],
    )?;
    for r in &shadow.rows {
        out.write_record([num(r.tau), num(r.q), num(r.p), num(r.dq), num(r.dp)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_congruence_csv<W: Write>(w: W, c: &Congruence) -> Result<()> {
    let mut out = writer(w, &["init", "tau [1]", "q [1]", "p [1]"])?;
    for (k, traj) in c.trajectories.iter().enumerate() {
        for (tau, s) in c.taus.iter().zip(traj) {
            out.write_record([k.to_string(), num(*tau), num(s.q), num(s.p)])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Two-column samples such as `(tau, beta)`.
pub fn write_series_csv<W: Write>(w: W, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let mut out = writer(w, &header)?;
    for (x, y) in rows {
        out.write_record([num(*x), num(*y)])?;
    }
    out.flush()?;
    Ok(())
}

/// Rows are quantities, columns are time scales.
pub fn write_scaling_csv<W: Write>(w: W, table: &ScalingTable) -> Result<()> {
    let mut header = vec!["quantity".to_string(), "unit".to_string()];
    header.extend(table.t_values.iter().map(|t| format!("T={t} [s]")));
    let mut out = csv::Writer::from_writer(w);
    out.write_record(&header)?;
    for row in &table.rows {
        let mut rec = vec![row.quantity.name().to_string(), row.unit.to_string()];
        rec.extend(row.values.iter().map(|v| num(*v)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
