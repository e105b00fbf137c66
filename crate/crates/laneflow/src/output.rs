//! CSV tables. Every float is written with 17 significant digits, so parsing
//! a file back gives the exact in-memory values.

use std::io::Write;

use laneflow_core::harness::{L1Row, RefinementRow, TvRow};
use laneflow_core::{DiagnosticsRecord, Grid, Snapshot};

use crate::error::AppError;

pub const SNAPSHOT_HEADER: [&str; 5] = ["x", "rho1", "rho2", "w1", "w2"];

/// 17 significant digits in scientific notation.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

/// One row per cell centre; `w1,w2` are empty for local runs.
pub fn write_snapshot_csv<W: Write>(snapshot: &Snapshot, grid: &Grid, out: W) -> Result<(), AppError> {
    snapshot.state.check_len(grid)?;
    let mut w = writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    for j in 0..grid.n_cells() {
        let (w1, w2) = match &snapshot.field {
            Some(f) => (Some(f.w1[j]), Some(f.w2[j])),
            None => (None, None),
        };
        w.write_record([
            fmt_f64(grid.cell_center(j)),
            fmt_f64(snapshot.state.rho1[j]),
            fmt_f64(snapshot.state.rho2[j]),
            opt(w1),
            opt(w2),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn snapshot_csv_string(snapshot: &Snapshot, grid: &Grid) -> Result<String, AppError> {
    let mut buf = Vec::new();
    write_snapshot_csv(snapshot, grid, &mut buf)?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

/// Columns of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable {
    pub x: Vec<f64>,
    pub rho1: Vec<f64>,
    pub rho2: Vec<f64>,
    /// Absent when the file came from a local run.
    pub w: Option<[Vec<f64>; 2]>,
}

pub fn parse_snapshot_csv(text: &str) -> Result<SnapshotTable, AppError> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != SNAPSHOT_HEADER {
        return Err(AppError::Io(format!("unexpected snapshot header {header:?}")));
    }
    let mut t = SnapshotTable { x: vec![], rho1: vec![], rho2: vec![], w: None };
    let (mut w1, mut w2) = (vec![], vec![]);
    let mut has_w = None;
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64, AppError> {
            rec[k].parse().map_err(|e| AppError::Io(format!("row {}: column {}: {e}", line + 2, SNAPSHOT_HEADER[k])))
        };
        t.x.push(num(0)?);
        t.rho1.push(num(1)?);
        t.rho2.push(num(2)?);
        let present = !rec[3].is_empty();
        if *has_w.get_or_insert(present) != present {
            return Err(AppError::Io(format!("row {}: w columns filled inconsistently", line + 2)));
        }
        if present {
            w1.push(num(3)?);
            w2.push(num(4)?);
        }
    }
    if has_w == Some(true) {
        t.w = Some([w1, w2]);
    }
    Ok(t)
}

pub const DIAGNOSTICS_HEADER: [&str; 13] = [
    "t",
    "tv_rho1",
    "tv_rho2",
    "tv_w1",
    "tv_w2",
    "tv_w_sum",
    "mass_total",
    "mass_ledger_residual",
    "min_rho1",
    "max_rho1",
    "min_rho2",
    "max_rho2",
    "entropy_residual_max",
];

pub fn write_diagnostics_csv<'a, W, I>(records: I, out: W) -> Result<(), AppError>
where
    W: Write,
    I: IntoIterator<Item = &'a DiagnosticsRecord>,
{
    let mut w = writer(out);
    w.write_record(DIAGNOSTICS_HEADER)?;
    for r in records {
        w.write_record([
            fmt_f64(r.t),
            fmt_f64(r.tv_rho[0]),
            fmt_f64(r.tv_rho[1]),
            fmt_f64(r.tv_w[0]),
            fmt_f64(r.tv_w[1]),
            fmt_f64(r.tv_w_sum),
            fmt_f64(r.mass_total),
            fmt_f64(r.mass_ledger_residual),
            fmt_f64(r.min_max[0][0]),
            fmt_f64(r.min_max[0][1]),
            fmt_f64(r.min_max[1][0]),
            fmt_f64(r.min_max[1][1]),
            opt(r.entropy_residual_max),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_l1_table<W: Write>(rows: &[L1Row], out: W) -> Result<(), AppError> {
    let mut w = writer(out);
    w.write_record(["eta", "t", "l1_rho1", "l1_rho2", "l1_sum"])?;
    for r in rows {
        w.write_record([fmt_f64(r.eta), fmt_f64(r.t), fmt_f64(r.lanes[0]), fmt_f64(r.lanes[1]), fmt_f64(r.sum)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tv_table<W: Write>(rows: &[TvRow], out: W) -> Result<(), AppError> {
    let mut w = writer(out);
    w.write_record(["eta", "t", "tv_w_sum", "tv_rho_sum", "bound"])?;
    for r in rows {
        w.write_record([fmt_f64(r.eta), fmt_f64(r.t), fmt_f64(r.tv_w_sum), fmt_f64(r.tv_rho_sum), fmt_f64(r.bound)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_refinement_table<W: Write>(rows: &[RefinementRow], out: W) -> Result<(), AppError> {
    let mut w = writer(out);
    w.write_record(["n_cells", "dx", "l1_error", "order"])?;
    for r in rows {
        w.write_record([r.n_cells.to_string(), fmt_f64(r.dx), fmt_f64(r.error), opt(r.order)])?;
    }
    w.flush()?;
    Ok(())
}

/// A numeric table; empty cells are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

/// Reads a numeric table written by this module.
pub fn parse_table(text: &str) -> Result<Table, AppError> {
    let mut r = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(str::to_owned).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|c| if c.is_empty() { Ok(None) } else { c.parse().map(Some) })
            .collect::<Result<_, _>>()
            .map_err(|e: std::num::ParseFloatError| AppError::Io(e.to_string()))?;
        rows.push(row);
    }
    Ok(Table { header, rows })
}
