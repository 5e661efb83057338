//! Improvement search over adjacent swaps that restore the upstream order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Instance, ObjectiveConfig, TrainId};
use crate::objective::objective_unchecked;
use crate::scalar::Scalar;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { max_iterations: 50, seed: 0 }
    }
}

/// An adjacent pair at `station` whose relative order differs from the
/// reference order: `train` runs directly behind `adjacent` although it was
/// ahead of it upstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SwapCandidate {
    pub train: TrainId,
    pub adjacent: TrainId,
    pub station: usize,
}

/// Order a decided station is compared against: the arrival order at the
/// station, or the planned order at the origin.
fn reference_order(sched: &Schedule, inst: &Instance, station: usize) -> Vec<TrainId> {
    if station == 0 {
        inst.planned_order(0)
    } else {
        sched.solution.dep_order[station - 1].clone()
    }
}

/// All pairs that a move could re-align.
pub fn swap_candidates(sched: &Schedule, inst: &Instance) -> Vec<SwapCandidate> {
    let mut out = Vec::new();
    for (i, order) in sched.decided_orders().iter().enumerate() {
        let reference = reference_order(sched, inst, i);
        let mut ref_pos = vec![0; inst.num_trains];
        for (p, &k) in reference.iter().enumerate() {
            ref_pos[k] = p;
        }
        for w in order.windows(2) {
            let (ahead, behind) = (w[0], w[1]);
            if ref_pos[behind] < ref_pos[ahead] {
                out.push(SwapCandidate { train: behind, adjacent: ahead, station: i });
            }
        }
    }
    out
}

/// A uniformly chosen candidate, or `None` when every order matches its reference.
pub fn find_swap_candidate<R: Rng + ?Sized>(sched: &Schedule, inst: &Instance, rng: &mut R) -> Option<SwapCandidate> {
    swap_candidates(sched, inst).choose(rng).copied()
}

#[derive(Debug, Clone)]
pub struct MoveResult<S> {
    pub schedule: Schedule,
    pub delta: S,
}

/// Puts `train` back ahead of `adjacent` at `station` and re-times downstream.
///
/// Returns `None` when the pair is not adjacent in that order or the new order
/// exceeds a station's track capacity (the move is rejected).
pub fn try_move<S: Scalar>(
    sched: &Schedule,
    inst: &Instance,
    train: TrainId,
    adjacent: TrainId,
    station: usize,
    cfg: &ObjectiveConfig<S>,
) -> Option<MoveResult<S>> {
    let order = &sched.solution.dep_order[station];
    let pos = order.iter().position(|&k| k == train)?;
    if pos == 0 || order[pos - 1] != adjacent {
        return None;
    }
    let mut new_order = order.clone();
    new_order.swap(pos - 1, pos);
    let next = sched.with_order(inst, station, &new_order).ok()?;
    let before = objective_unchecked(&sched.solution.arrival, inst, cfg);
    let after = objective_unchecked(&next.solution.arrival, inst, cfg);
    Some(MoveResult { schedule: next, delta: after - before })
}

#[derive(Debug, Clone)]
pub struct SearchLog<S> {
    /// Objective after every accepted change, starting with the input.
    pub objective_trace: Vec<S>,
    pub accepted_moves: usize,
    pub downstream_extensions: usize,
}

/// Runs the improvement loop; the returned schedule is never worse.
pub fn local_search<S: Scalar>(
    sched: &Schedule,
    inst: &Instance,
    cfg: &SearchConfig,
    obj: &ObjectiveConfig<S>,
) -> (Schedule, SearchLog<S>) {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current = sched.clone();
    let mut log = SearchLog {
        objective_trace: vec![objective_unchecked(&current.solution.arrival, inst, obj)],
        accepted_moves: 0,
        downstream_extensions: 0,
    };
    let last_decided = inst.num_stations.saturating_sub(2);
    for _ in 0..cfg.max_iterations {
        let Some(c) = find_swap_candidate(&current, inst, &mut rng) else {
            break;
        };
        let Some(m) = try_move(&current, inst, c.train, c.adjacent, c.station, obj) else {
            continue;
        };
        if !(m.delta < S::zero()) {
            continue;
        }
        current = m.schedule;
        log.accepted_moves += 1;
        log.objective_trace.push(objective_unchecked(&current.solution.arrival, inst, obj));
        for station in c.station + 1..=last_decided {
            match try_move(&current, inst, c.train, c.adjacent, station, obj) {
                Some(m) if m.delta < S::zero() => {
                    current = m.schedule;
                    log.downstream_extensions += 1;
                    log.objective_trace.push(objective_unchecked(&current.solution.arrival, inst, obj));
                }
                _ => break,
            }
        }
    }
    (current, log)
}
