use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use qel_core::model::Gate;
use qel_core::potential::{TraceRecord, Trajectory};
use serde::Serialize;

use crate::error::CliResult;

/// One CSV line of a potential trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub gate: &'static str,
    pub i: Option<usize>,
    pub i_prime: Option<usize>,
    pub theta_or_c: Option<f64>,
    pub potential: f64,
    pub delta: f64,
    pub thm2_bound: Option<f64>,
    pub kappa: Option<f64>,
}

impl From<&TraceRecord> for TraceRow {
    fn from(r: &TraceRecord) -> Self {
        let (gate, i, i_prime, theta_or_c) = match r.gate {
            None => ("init", None, None, None),
            Some(Gate::Rotation { i, i2, theta }) => ("rotation", Some(i), Some(i2), Some(theta)),
            Some(Gate::Constant { i, c }) => ("constant", Some(i), None, Some(c)),
        };
        TraceRow {
            step: r.step,
            gate,
            i,
            i_prime,
            theta_or_c,
            // `+ 0.0` turns -0.0 into 0.0
            potential: r.value + 0.0,
            delta: r.delta + 0.0,
            thm2_bound: r.bound,
            kappa: r.kappa,
        }
    }
}

#[derive(Debug, Serialize)]
struct PlotRow {
    step: usize,
    potential: f64,
}

pub fn open_sink(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_rows<T: Serialize>(out: Option<&Path>, rows: impl IntoIterator<Item = T>) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(open_sink(out)?);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trace(out: Option<&Path>, t: &Trajectory, plot_data: bool) -> CliResult<()> {
    if plot_data {
        write_rows(
            out,
            t.records.iter().map(|r| PlotRow {
                step: r.step,
                potential: r.value + 0.0,
            }),
        )
    } else {
        write_rows(out, t.records.iter().map(TraceRow::from))
    }
}
