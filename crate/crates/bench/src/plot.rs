//! CSV series for external plotting.

use std::io::Write;

use serde::Serialize;
use ttr_core::{Instance, Minutes, Solution, TrainId};
use ttr_rl::CurvePoint;

use crate::report::EvalReport;

/// One stop of one train, planned against rescheduled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimetablePoint {
    pub train: TrainId,
    pub station: usize,
    pub planned_arrival: Minutes,
    pub planned_departure: Minutes,
    pub arrival: Minutes,
    pub departure: Minutes,
    pub delay: Minutes,
}

/// Rows of a time-distance diagram, trains outer and stations inner.
pub fn timetable_series(inst: &Instance, sol: &Solution) -> Vec<TimetablePoint> {
    inst.trains()
        .flat_map(|k| {
            inst.stations().map(move |i| TimetablePoint {
                train: k,
                station: i,
                planned_arrival: inst.planned_arrival[k][i],
                planned_departure: inst.planned_departure[k][i],
                arrival: sol.arrival[k][i],
                departure: sol.departure[k][i],
                delay: sol.arrival[k][i] - inst.planned_arrival[k][i],
            })
        })
        .collect()
}

/// Per-method aggregates of a report.
pub fn write_summary<W: Write>(out: W, report: &EvalReport) -> Result<(), csv::Error> {
    write_rows(out, &report.summaries())
}

pub fn write_curve<W: Write>(out: W, curve: &[CurvePoint]) -> Result<(), csv::Error> {
    write_rows(out, curve)
}

pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
