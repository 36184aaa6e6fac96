//! CSV emission shared by the CLI verbs.

use std::io::{self, Write};

use crate::engine::TrajectoryRecord;
use crate::sampler::SweepRow;

pub const TRAJECTORY_HEADER: &str = "r,a,b,c,d,p,Y,S,Y_improved";
pub const SWEEP_HEADER: &str = "protocol,a0,r,mean_Y,mean_purity,mean_S,mean_Y_improved,n,seed";
pub const BASIN_HEADER: &str = "a,b,c,d,class";

/// Shortest decimal that round-trips to the same `f64`.
///
/// Exact values print compactly (`1`, `0.5`); small magnitudes switch to
/// exponent notation. Output never depends on locale.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    let m = x.abs();
    if (1e-4..1e15).contains(&m) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_trajectory<W: Write>(out: &mut W, records: &[TrajectoryRecord]) -> io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for rec in records {
        let p = rec.p.map(fmt_num).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{}",
            rec.r,
            rec.state,
            p,
            fmt_num(rec.pair_yield),
            fmt_num(rec.entropy),
            fmt_num(rec.improved_yield)
        )?;
    }
    Ok(())
}

pub fn write_sweep<W: Write>(out: &mut W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.protocol,
            fmt_num(row.a0),
            row.r,
            fmt_num(row.mean_yield),
            fmt_num(row.mean_purity),
            fmt_num(row.mean_entropy),
            fmt_num(row.mean_improved_yield),
            row.n,
            row.seed
        )?;
    }
    Ok(())
}
