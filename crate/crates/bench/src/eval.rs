//! Fan-out of methods over instances on a worker pool.

use std::collections::HashMap;
use std::io::Read;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::Deserialize;
use ttr_core::oracle::{oracle_search, DEFAULT_GUARD};
use ttr_core::{F64Objective, Instance, TimetableConfig};

use crate::error::BenchError;
use crate::method::{ensure_feasible, Method};
use crate::report::{EvalReport, ReportRow};

/// Reference objective per instance for the gap column.
#[derive(Debug, Clone)]
pub enum Baseline {
    None,
    /// Exhaustive order search, refused beyond `guard` timetables.
    Oracle { guard: u128 },
    /// Objectives solved elsewhere, keyed by instance name.
    Known(HashMap<String, f64>),
}

impl Baseline {
    pub fn oracle() -> Self {
        Baseline::Oracle { guard: DEFAULT_GUARD }
    }

    /// CSV with an `instance,objective` header.
    pub fn read_csv<R: Read>(input: R) -> Result<Self, BenchError> {
        #[derive(Deserialize)]
        struct Row {
            instance: String,
            objective: f64,
        }
        let mut map = HashMap::new();
        for row in csv::Reader::from_reader(input).deserialize::<Row>() {
            let row = row?;
            map.insert(row.instance, row.objective);
        }
        Ok(Baseline::Known(map))
    }

    fn value(&self, name: &str, inst: &Instance) -> Result<Option<f64>, BenchError> {
        Ok(match self {
            Baseline::None => None,
            Baseline::Oracle { guard } => {
                Some(oracle_search(inst, TimetableConfig::default(), &F64Objective::standard(), *guard)?.objective)
            }
            Baseline::Known(map) => map.get(name).copied(),
        })
    }
}

pub fn default_threads() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs every method on every instance. Rows come out in instance order,
/// methods in the given order, whatever the worker count.
pub fn evaluate(
    instances: &[(String, Instance)],
    methods: &[Method],
    baseline: &Baseline,
    threads: usize,
) -> Result<EvalReport, BenchError> {
    let next = AtomicUsize::new(0);
    type Slot = Option<Result<Vec<ReportRow>, BenchError>>;
    let results: Mutex<Vec<Slot>> = Mutex::new((0..instances.len()).map(|_| None).collect());
    let work = |idx: usize| -> Result<Vec<ReportRow>, BenchError> {
        let (name, inst) = &instances[idx];
        let base = baseline.value(name, inst)?;
        let mut rows = Vec::with_capacity(methods.len());
        for m in methods {
            let solved = m.solve(inst)?;
            if let Some(s) = &solved.schedule {
                ensure_feasible(s, inst)?;
            }
            rows.push(ReportRow::new(name, &m.name(), solved.objective, solved.wall_ms, base));
        }
        Ok(rows)
    };
    thread::scope(|scope| {
        for _ in 0..threads.clamp(1, instances.len().max(1)) {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= instances.len() {
                    break;
                }
                let r = work(idx);
                results.lock().expect("no worker panics while holding the lock")[idx] = Some(r);
            });
        }
    });
    let mut report = EvalReport::default();
    for r in results.into_inner().expect("workers joined") {
        for row in r.expect("every instance visited")? {
            report.push(row);
        }
    }
    Ok(report)
}
