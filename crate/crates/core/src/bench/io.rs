//! CSV output. Floats are written with 17 significant digits so that parsing
//! a file reproduces the in-memory values exactly.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{ConcentrationPath, TimeGrid};
use crate::reconstruction::{PsdSnapshot, RadialProfile};

use super::experiments::{ErrorRow, SlopeRow, TimingRow};

/// Full-precision decimal representation of `x`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

/// Columns `t, c1, c2`, one row per time point.
pub fn write_concentrations(path: &Path, concentrations: &ConcentrationPath) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["t", "c1", "c2"])?;
    for (t, c) in concentrations.times().iter().zip(concentrations.values()) {
        w.write_record([format_float(*t), format_float(c[0]), format_float(c[1])])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_concentrations(path: &Path) -> Result<ConcentrationPath> {
    let mut r = csv::Reader::from_path(path)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<f64> {
            record
                .get(i)
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| {
                    Error::config(
                        format!("{}:{}", path.display(), line + 2),
                        format!("column {i} is not a number"),
                    )
                })
        };
        times.push(field(0)?);
        values.push([field(1)?, field(2)?]);
    }
    ConcentrationPath::new(TimeGrid::from_times(times)?, values)
}

pub fn write_errors(path: &Path, rows: &[ErrorRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "method",
        "level",
        "time_points",
        "nodes",
        "dof",
        "seconds",
        "linf_c1",
        "linf_c2",
        "l2_c1",
        "l2_c2",
    ])?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.level.to_string(),
            r.time_points.to_string(),
            r.nodes.to_string(),
            format_float(r.dof),
            format_float(r.seconds),
            format_float(r.norms.linf[0]),
            format_float(r.norms.linf[1]),
            format_float(r.norms.l2[0]),
            format_float(r.norms.l2[1]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_slopes(path: &Path, rows: &[SlopeRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "quantity",
        "slope",
        "ci_low",
        "ci_high",
        "r_squared",
        "points",
        "target",
        "tolerance",
        "pass",
    ])?;
    for r in rows {
        w.write_record([
            r.quantity.clone(),
            format_float(r.fit.slope),
            format_float(r.fit.ci_low),
            format_float(r.fit.ci_high),
            format_float(r.fit.r_squared),
            r.fit.points.to_string(),
            format_float(r.target),
            format_float(r.tolerance),
            r.fit.within(r.target, r.tolerance).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_timings(path: &Path, rows: &[TimingRow]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["time_points", "nodes", "work", "seconds"])?;
    for r in rows {
        w.write_record([
            r.time_points.to_string(),
            r.nodes.to_string(),
            format_float(r.work),
            format_float(r.seconds),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x1, x2, q, weight`.
pub fn write_snapshot(path: &Path, snapshot: &PsdSnapshot) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["x1", "x2", "q", "weight"])?;
    for ((x, q), wt) in snapshot
        .states
        .iter()
        .zip(&snapshot.values)
        .zip(&snapshot.weights)
    {
        w.write_record([
            format_float(x.radius),
            format_float(x.composition),
            format_float(*q),
            format_float(*wt),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `seed_radius, seed_composition, t, radius, fraction`.
pub fn write_radial_profiles(path: &Path, profiles: &[RadialProfile]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["seed_radius", "seed_composition", "t", "radius", "fraction"])?;
    for p in profiles {
        for ((t, r), f) in p.times.iter().zip(&p.radii).zip(&p.fractions) {
            w.write_record([
                format_float(p.seed.radius),
                format_float(p.seed.composition),
                format_float(*t),
                format_float(*r),
                format_float(*f),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
