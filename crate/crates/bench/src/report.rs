//! Per-instance evaluation rows and their aggregates.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// `(J - J_base) / J`, the relative excess over the baseline.
pub fn gap(objective: f64, baseline: f64) -> Option<f64> {
    if objective == 0.0 {
        return (baseline == 0.0).then_some(0.0);
    }
    Some((objective - baseline) / objective)
}

/// Gap in percent rounded to two decimals.
pub fn gap_percent(objective: f64, baseline: f64) -> Option<f64> {
    gap(objective, baseline).map(|g| (g * 10_000.0).round() / 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: String,
    pub method: String,
    /// Missing when the method found no feasible timetable.
    pub objective: Option<f64>,
    pub wall_ms: f64,
    pub feasible: bool,
    pub baseline: Option<f64>,
    pub gap: Option<f64>,
}

impl ReportRow {
    pub fn new(instance: &str, method: &str, objective: Option<f64>, wall_ms: f64, baseline: Option<f64>) -> Self {
        let gap = objective.zip(baseline).and_then(|(j, b)| gap(j, b));
        Self {
            instance: instance.to_string(),
            method: method.to_string(),
            objective,
            wall_ms,
            feasible: objective.is_some(),
            baseline,
            gap,
        }
    }
}

/// Aggregates of one method; infeasible rows only count towards `infeasible`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: String,
    pub instances: usize,
    pub infeasible: usize,
    pub mean_objective: Option<f64>,
    /// Gap of the mean objective against the mean baseline over the same rows.
    pub gap: Option<f64>,
    pub mean_wall_ms: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub rows: Vec<ReportRow>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = xs.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

impl EvalReport {
    pub fn push(&mut self, row: ReportRow) {
        self.rows.push(row);
    }

    /// Methods in order of first appearance.
    pub fn methods(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.method) {
                out.push(r.method.clone());
            }
        }
        out
    }

    pub fn summary(&self, method: &str) -> MethodSummary {
        let rows: Vec<&ReportRow> = self.rows.iter().filter(|r| r.method == method).collect();
        let feasible: Vec<&ReportRow> = rows.iter().copied().filter(|r| r.feasible).collect();
        let mean_objective = mean(feasible.iter().filter_map(|r| r.objective));
        let with_base: Vec<(f64, f64)> = feasible.iter().filter_map(|r| r.objective.zip(r.baseline)).collect();
        let gap = mean(with_base.iter().map(|p| p.0))
            .zip(mean(with_base.iter().map(|p| p.1)))
            .and_then(|(j, b)| gap(j, b));
        MethodSummary {
            method: method.to_string(),
            instances: rows.len(),
            infeasible: rows.len() - feasible.len(),
            mean_objective,
            gap,
            mean_wall_ms: mean(rows.iter().map(|r| r.wall_ms)).unwrap_or(0.0),
        }
    }

    pub fn summaries(&self) -> Vec<MethodSummary> {
        self.methods().iter().map(|m| self.summary(m)).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, csv::Error> {
        let rows = csv::Reader::from_reader(input).deserialize().collect::<Result<_, _>>()?;
        Ok(Self { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_gaps() {
        assert_eq!(gap_percent(1064.0, 336.0), Some(68.42));
        assert_eq!(gap_percent(657.0, 336.0), Some(48.86));
        assert_eq!(gap(336.0, 336.0), Some(0.0));
        assert_eq!(gap(0.0, 0.0), Some(0.0));
        assert_eq!(gap(0.0, 5.0), None);
    }

    #[test]
    fn infeasible_rows_are_counted_not_averaged() {
        let mut r = EvalReport::default();
        r.push(ReportRow::new("a", "fsfs", Some(10.0), 1.0, Some(5.0)));
        r.push(ReportRow::new("b", "fsfs", None, 3.0, Some(7.0)));
        r.push(ReportRow::new("a", "fcfs", Some(20.0), 2.0, Some(5.0)));
        let s = r.summary("fsfs");
        assert_eq!((s.instances, s.infeasible, s.mean_objective, s.gap), (2, 1, Some(10.0), Some(0.5)));
        assert_eq!(s.mean_wall_ms, 2.0);
        assert_eq!(r.methods(), vec!["fsfs".to_string(), "fcfs".to_string()]);
    }
}
