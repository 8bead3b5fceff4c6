//! Text output: per-particle snapshots and the per-step diagnostics table.
//!
//! Snapshot files have the header `id,kind,color,x,y,u,v,p,rho_smooth`, one
//! row per particle in ascending id, floats with 9 significant digits.
//! The diagnostics file has the header `t,L,H,dp,ke,N` and one row per step;
//! `dp` is `NaN` when one of the phases is absent.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::cloud::ParticleCloud;
use crate::diagnostics::Diagnostics;
use crate::error::Result;

pub const SNAPSHOT_HEADER: &str = "id,kind,color,x,y,u,v,p,rho_smooth";
pub const DIAGNOSTICS_HEADER: &str = "t,L,H,dp,ke,N";

/// Snapshot text of a cloud.
pub fn snapshot_csv(cloud: &ParticleCloud) -> String {
    let mut order: Vec<usize> = (0..cloud.len()).collect();
    let ps = cloud.particles();
    order.sort_by_key(|&i| ps[i].id);
    let mut out = String::with_capacity(110 * (ps.len() + 1));
    out.push_str(SNAPSHOT_HEADER);
    out.push('\n');
    for i in order {
        let p = &ps[i];
        writeln!(
            out,
            "{},{},{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
            p.id,
            p.kind().as_str(),
            p.color(),
            p.position.x,
            p.position.y,
            p.velocity.x,
            p.velocity.y,
            p.pressure,
            p.rho_smooth
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn write_snapshot(path: impl AsRef<Path>, cloud: &ParticleCloud) -> Result<()> {
    std::fs::write(path, snapshot_csv(cloud))?;
    Ok(())
}

pub fn diagnostics_row(d: &Diagnostics) -> String {
    format!(
        "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{}",
        d.t,
        d.l,
        d.h,
        d.dp.unwrap_or(f64::NAN),
        d.kinetic_energy,
        d.n
    )
}

/// Line-buffered writer of the diagnostics table.
pub struct DiagnosticsWriter {
    out: BufWriter<File>,
}

impl DiagnosticsWriter {
    /// Creates (truncating) the file and writes the header.
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let mut out = BufWriter::new(File::create(path)?);
        writeln!(out, "{DIAGNOSTICS_HEADER}")?;
        Ok(Self { out })
    }

    pub fn append(&mut self, d: &Diagnostics) -> Result<()> {
        writeln!(self.out, "{}", diagnostics_row(d))?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// One parsed snapshot row.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotRow {
    pub id: u64,
    pub kind: String,
    pub color: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
    pub p: f64,
    pub rho_smooth: f64,
}

/// Parses snapshot text written by [`snapshot_csv`].
pub fn parse_snapshot(text: &str) -> Result<Vec<SnapshotRow>> {
    let bad = |line: usize, what: &str| crate::Error::Parse(format!("snapshot line {line}: {what}"));
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_HEADER) {
        return Err(bad(1, "unexpected header"));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 9 {
                return Err(bad(k + 2, "expected 9 columns"));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(k + 2, "bad number"));
            Ok(SnapshotRow {
                id: f[0].parse().map_err(|_| bad(k + 2, "bad id"))?,
                kind: f[1].to_string(),
                color: num(f[2])?,
                x: num(f[3])?,
                y: num(f[4])?,
                u: num(f[5])?,
                v: num(f[6])?,
                p: num(f[7])?,
                rho_smooth: num(f[8])?,
            })
        })
        .collect()
}

/// Parses a diagnostics table into `[t, L, H, dp, ke, N]` rows.
pub fn parse_diagnostics(text: &str) -> Result<Vec<[f64; 6]>> {
    let mut lines = text.lines();
    if lines.next() != Some(DIAGNOSTICS_HEADER) {
        return Err(crate::Error::Parse("diagnostics: unexpected header".into()));
    }
    lines
        .enumerate()
        .map(|(k, line)| {
            let v: Vec<f64> = line
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| crate::Error::Parse(format!("diagnostics line {}: bad number", k + 2)))?;
            v.try_into()
                .map_err(|_| crate::Error::Parse(format!("diagnostics line {}: expected 6 columns", k + 2)))
        })
        .collect()
}
