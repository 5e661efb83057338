//! Exhaustive search over capacity-feasible departure orders.

use thiserror::Error;

use crate::model::{Instance, ObjectiveConfig};
use crate::objective::objective_unchecked;
use crate::orders::{feasible_order_count, for_each_feasible_order};
use crate::scalar::Scalar;
use crate::schedule::{Pipeline, Schedule};
use crate::timetable::{TimetableConfig, TimetableError};

pub const DEFAULT_GUARD: u128 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("search space of {needed} order combinations exceeds the guard of {guard}")]
    GuardExceeded { needed: u128, guard: u128 },
    #[error(transparent)]
    Timetable(#[from] TimetableError),
}

#[derive(Debug, Clone)]
pub struct OracleResult<S> {
    pub schedule: Schedule,
    pub objective: S,
    /// Complete timetables evaluated.
    pub leaves: u128,
}

/// Upper bound on the number of complete timetables the oracle visits.
pub fn search_space(inst: &Instance) -> u128 {
    let decided = inst.num_stations.saturating_sub(1);
    inst.track_capacity[..decided]
        .iter()
        .map(|&p| feasible_order_count(inst.num_trains, p))
        .fold(1u128, |acc, n| acc.saturating_mul(n))
}

/// Best timetable reachable by choosing a feasible departure order at every station.
pub fn oracle_search<S: Scalar>(
    inst: &Instance,
    tt: TimetableConfig,
    obj: &ObjectiveConfig<S>,
    guard: u128,
) -> Result<OracleResult<S>, OracleError> {
    let needed = search_space(inst);
    if needed > guard {
        return Err(OracleError::GuardExceeded { needed, guard });
    }
    let root = Pipeline::new(inst, tt)?;
    let mut best: Option<(S, Pipeline<'_>)> = None;
    let mut leaves = 0u128;
    let mut err = None;
    descend(root, obj, &mut best, &mut leaves, &mut err);
    if let Some(e) = err {
        return Err(e.into());
    }
    let (objective, p) = best.expect("at least one feasible order per station");
    Ok(OracleResult { schedule: p.finish(), objective, leaves })
}

fn descend<'a, S: Scalar>(
    p: Pipeline<'a>,
    obj: &ObjectiveConfig<S>,
    best: &mut Option<(S, Pipeline<'a>)>,
    leaves: &mut u128,
    err: &mut Option<TimetableError>,
) {
    if err.is_some() {
        return;
    }
    let inst = p.instance();
    if p.is_complete() {
        *leaves += 1;
        let j = objective_unchecked(p.arrivals(), inst, obj);
        if best.as_ref().is_none_or(|(b, _)| j < *b) {
            *best = Some((j, p));
        }
        return;
    }
    let station = p.station();
    let arrival_order = p.arrival_order().to_vec();
    for_each_feasible_order(&arrival_order, inst.track_capacity[station], |order| {
        let mut child = p.clone();
        match child.commit(order) {
            Ok(_) => descend(child, obj, best, leaves, err),
            Err(e) => *err = Some(e),
        }
    });
}
