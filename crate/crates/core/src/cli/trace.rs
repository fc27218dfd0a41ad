//! CSV iteration traces.
//!
//! Columns, in order: `k,f_full,grad_full_norm,f_batch,g_batch_norm,d_norm,
//! dTg,alpha0,alpha,backtracks,sgr_pass,restarted`. Reals use the shortest
//! representation that parses back to the same `f64`; `f_full` and
//! `grad_full_norm` are empty on rows without an exact evaluation;
//! booleans are `true` / `false`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::optimizer::IterationRecord;
use crate::{Error, Result};

pub const HEADER: &str = "k,f_full,grad_full_norm,f_batch,g_batch_norm,d_norm,dTg,alpha0,alpha,backtracks,sgr_pass,restarted";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub f_full: Option<f64>,
    pub grad_full_norm: Option<f64>,
    pub f_batch: f64,
    pub g_batch_norm: f64,
    pub d_norm: f64,
    #[serde(rename = "dTg")]
    pub dtg: f64,
    pub alpha0: f64,
    pub alpha: f64,
    pub backtracks: u32,
    pub sgr_pass: bool,
    pub restarted: bool,
}

impl From<&IterationRecord> for TraceRow {
    fn from(r: &IterationRecord) -> Self {
        Self {
            k: r.k,
            f_full: r.f_full,
            grad_full_norm: r.grad_full_norm,
            f_batch: r.f_batch,
            g_batch_norm: r.g_batch_norm,
            d_norm: r.d_norm,
            dtg: r.dtg,
            alpha0: r.alpha0,
            alpha: r.alpha,
            backtracks: r.backtracks,
            sgr_pass: r.sgr_pass,
            restarted: r.restarted,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

pub fn write_trace<W: Write>(out: W, records: &[IterationRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        w.write_record(HEADER.split(',')).map_err(csv_err)?;
    }
    for r in records {
        w.serialize(TraceRow::from(r)).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(input: R) -> Result<Vec<TraceRow>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(csv_err)?.iter().collect::<Vec<_>>().join(",");
    if header != HEADER {
        return Err(Error::Config(format!("unexpected trace header `{header}`")));
    }
    rd.deserialize()
        .enumerate()
        .map(|(line, row)| row.map_err(|e| Error::Config(format!("trace row {}: {e}", line + 1))))
        .collect()
}
