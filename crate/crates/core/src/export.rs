//! Plain-text and image writers for the experiment outputs.
//!
//! Numbers are written in their shortest round-trip form, so parsing a file
//! back yields the exact `f64` values; lines end in `\n` only.

use std::io::Write;

use crate::dynamics::{BasinGrid, BifurcationDataset, HiddenAttractorReport, ShiftTable};
use crate::error::Result;
use crate::hnn::Equilibrium;
use crate::ivp::Trajectory;
use crate::stability::{Spectrum, StabilityReport};

/// Shortest representation that parses back to the same `f64`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// `t,x1,...,xn`, one row per step.
pub fn write_trajectory_csv<W: Write>(mut w: W, traj: &Trajectory) -> Result<()> {
    let header: Vec<String> = (1..=traj.dimension()).map(|c| format!("x{c}")).collect();
    writeln!(w, "t,{}", header.join(","))?;
    for (i, t) in traj.times().enumerate() {
        write!(w, "{}", format_number(t))?;
        for c in 0..traj.dimension() {
            write!(w, ",{}", format_number(traj.component(c)[i]))?;
        }
        writeln!(w)?;
    }
    Ok(())
}

/// `param,ic_id,h,maximum`, one row per positive maximum; IC ids are 1-based.
pub fn write_bifurcation_csv<W: Write>(mut w: W, dataset: &BifurcationDataset) -> Result<()> {
    writeln!(w, "param,ic_id,h,maximum")?;
    let h = format_number(dataset.config.h);
    for (value, row) in dataset.grid.iter().zip(&dataset.cells) {
        let value = format_number(*value);
        for (k, cell) in row.iter().enumerate() {
            for m in &cell.maxima.values {
                writeln!(w, "{value},{},{h},{}", k + 1, format_number(*m))?;
            }
        }
    }
    Ok(())
}

/// `u,v,x1,x2,x3,label`, one row per lattice cell in storage order.
pub fn write_basin_csv<W: Write>(mut w: W, grid: &BasinGrid) -> Result<()> {
    writeln!(w, "u,v,x1,x2,x3,label")?;
    let (nu, nv) = grid.spec.resolution;
    for iv in 0..nv {
        for iu in 0..nu {
            let (u, v) = grid.spec.uv(iu, iv);
            let x = grid.initial_condition(iu, iv);
            writeln!(
                w,
                "{},{},{},{},{},{}",
                format_number(u),
                format_number(v),
                format_number(x[0]),
                format_number(x[1]),
                format_number(x[2]),
                grid.label(iu, iv).name()
            )?;
        }
    }
    Ok(())
}

/// Binary greyscale map (PGM `P5`), one byte per cell. The top image row is
/// the largest `v`, columns run along increasing `u`.
pub fn write_basin_pgm<W: Write>(mut w: W, grid: &BasinGrid) -> Result<()> {
    let (nu, nv) = grid.spec.resolution;
    write!(w, "P5\n{nu} {nv}\n255\n")?;
    let mut payload = Vec::with_capacity(nu * nv);
    for iv in (0..nv).rev() {
        payload.extend((0..nu).map(|iu| grid.label(iu, iv).byte()));
    }
    w.write_all(&payload)?;
    Ok(())
}

/// `h,ic_id,delta,residual`.
pub fn write_shift_table_csv<W: Write>(mut w: W, table: &ShiftTable) -> Result<()> {
    writeln!(w, "h,ic_id,delta,residual")?;
    for r in &table.rows {
        writeln!(
            w,
            "{},{},{},{}",
            format_number(r.h),
            r.ic_id,
            format_number(r.estimate.delta),
            format_number(r.estimate.residual)
        )?;
    }
    Ok(())
}

/// One row per equilibrium: location, eigenvalues, argument-criterion data.
pub fn write_stability_csv<W: Write>(
    mut w: W,
    rows: &[(Equilibrium, Spectrum, StabilityReport)],
) -> Result<()> {
    writeln!(
        w,
        "label,x1,x2,x3,re1,im1,re2,im2,re3,im3,alpha_min,critical_order,q,iota,verdict"
    )?;
    for (eq, spectrum, report) in rows {
        let mut fields = vec![eq.label.to_string()];
        fields.extend(eq.point.iter().map(|v| format_number(*v)));
        for l in &spectrum.eigenvalues {
            fields.push(format_number(l.re));
            fields.push(format_number(l.im));
        }
        fields.push(format_number(report.alpha_min));
        fields.push(format_number(report.critical_order));
        fields.push(format_number(report.order));
        fields.push(format_number(report.iota));
        fields.push(format!("{:?}", report.verdict).to_lowercase());
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

/// `equilibrium,sample,x1,x2,x3,label` for every sampled initial condition.
pub fn write_hidden_csv<W: Write>(mut w: W, report: &HiddenAttractorReport) -> Result<()> {
    writeln!(w, "equilibrium,sample,x1,x2,x3,label")?;
    for n in &report.neighborhoods {
        for (k, (x, label)) in n.samples.iter().zip(&n.labels).enumerate() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                n.equilibrium.label,
                k + 1,
                format_number(x[0]),
                format_number(x[1]),
                format_number(x[2]),
                label.name()
            )?;
        }
    }
    Ok(())
}

/// Two-column CSV with the given header names.
pub fn write_pairs_csv<W: Write>(mut w: W, names: (&str, &str), rows: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "{},{}", names.0, names.1)?;
    for (a, b) in rows {
        writeln!(w, "{},{}", format_number(*a), format_number(*b))?;
    }
    Ok(())
}
