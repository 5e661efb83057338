//! Solution methods compared by the evaluation.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use ttr_core::local_search::{local_search, SearchConfig};
use ttr_core::objective::objective;
use ttr_core::orders::{solve_with_rule, Rule, RuleError};
use ttr_core::{validate, F64Objective, Instance, Profile, Schedule, TimetableConfig};
use ttr_neural::{load_checkpoint, PolicyParams};
use ttr_rl::solve_greedy;

use crate::error::BenchError;

#[derive(Debug, Clone)]
pub enum Solver {
    Rule(Rule),
    Policy { path: PathBuf, params: Arc<PolicyParams> },
}

/// A solver optionally followed by local search.
#[derive(Debug, Clone)]
pub struct Method {
    pub solver: Solver,
    pub local_search: usize,
    pub search_seed: u64,
}

/// Outcome of one method on one instance; `schedule` is `None` when the
/// method has no feasible answer (a planned order needing too many overtakes).
#[derive(Debug, Clone)]
pub struct Solved {
    pub schedule: Option<Schedule>,
    pub objective: Option<f64>,
    pub wall_ms: f64,
}

impl Method {
    /// `fcfs`, `fsfs`, or a checkpoint path.
    pub fn parse(spec: &str, local_search: usize) -> Result<Self, BenchError> {
        let solver = match spec.parse::<Rule>() {
            Ok(rule) => Solver::Rule(rule),
            Err(_) => {
                let path = Path::new(spec);
                if !path.is_file() {
                    return Err(BenchError::Usage(format!("policy `{spec}` is neither fcfs, fsfs nor a checkpoint file")));
                }
                let (params, _) = load_checkpoint(path)?;
                Solver::Policy { path: path.to_path_buf(), params: Arc::new(params) }
            }
        };
        Ok(Self { solver, local_search, search_seed: 0 })
    }

    pub fn rule(rule: Rule) -> Self {
        Self { solver: Solver::Rule(rule), local_search: 0, search_seed: 0 }
    }

    pub fn name(&self) -> String {
        let base = match &self.solver {
            Solver::Rule(Rule::Fcfs) => "fcfs".to_string(),
            Solver::Rule(Rule::Fsfs) => "fsfs".to_string(),
            Solver::Policy { path, .. } => {
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                format!("policy:{stem}")
            }
        };
        if self.local_search > 0 {
            format!("{base}+ls{}", self.local_search)
        } else {
            base
        }
    }

    fn schedule(&self, inst: &Instance) -> Result<Option<Schedule>, BenchError> {
        let sched = match &self.solver {
            Solver::Rule(rule) => match solve_with_rule(inst, *rule, TimetableConfig::default()) {
                Ok(s) => s,
                Err(RuleError::Infeasible { .. }) => return Ok(None),
                Err(e) => return Err(e.into()),
            },
            Solver::Policy { params, .. } => solve_greedy(inst, params)?,
        };
        if self.local_search == 0 {
            return Ok(Some(sched));
        }
        let cfg = SearchConfig { max_iterations: self.local_search, seed: self.search_seed };
        Ok(Some(local_search(&sched, inst, &cfg, &F64Objective::standard()).0))
    }

    /// Solves `inst`; the clock covers the solve call only.
    pub fn solve(&self, inst: &Instance) -> Result<Solved, BenchError> {
        let start = Instant::now();
        let schedule = self.schedule(inst)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        let objective = schedule
            .as_ref()
            .map(|s| objective(&s.solution, inst, &F64Objective::standard()))
            .transpose()?;
        Ok(Solved { schedule, objective, wall_ms })
    }
}

/// Fails unless `sched` passes the operational checks.
pub fn ensure_feasible(sched: &Schedule, inst: &Instance) -> Result<(), BenchError> {
    let v = validate(&sched.solution, inst, Profile::Operational)?;
    match v.first() {
        None => Ok(()),
        Some(first) => Err(BenchError::Infeasible { count: v.len(), first: first.to_string() }),
    }
}
