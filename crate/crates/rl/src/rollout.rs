//! One episode: decide every section with the policy and time it.

use rand::Rng;
use thiserror::Error;
use ttr_core::orders::{OrderError, SearchTree};
use ttr_core::timetable::TimetableError;
use ttr_core::validate::{validate, Profile};
use ttr_core::{EventGraph, ExactObjective, Instance, ModelError, Pipeline, Rational, Schedule, Scalar, TimetableConfig};
use ttr_neural::{Mode, NetError, PolicyParams};

use crate::walk::{route_walk, Decision, DecisionState, WalkMode};

#[derive(Debug, Error)]
pub enum RolloutError {
    #[error(transparent)]
    Timetable(#[from] TimetableError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Network(#[from] NetError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("rollout produced an invalid timetable: {0}")]
    Invalid(String),
}

/// `(previous - new) / (trains * stations)`.
pub fn reward<S: Scalar>(previous: S, new: S, trains: usize, stations: usize) -> S {
    (previous - new) / S::from_usize(trains * stations).expect("size representable")
}

/// One policy decision with its reward.
#[derive(Debug, Clone)]
pub struct Step {
    pub state: DecisionState,
    pub swap: bool,
    /// Behaviour probability of the action taken.
    pub prob: f32,
    pub reward: f64,
    pub station: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Every decision in walk order, forced ones included.
    pub decisions: Vec<Decision>,
    /// Predicted objective before the first section and after each section.
    pub estimates: Vec<Rational>,
    /// Exact reward of each section.
    pub section_rewards: Vec<Rational>,
}

impl Trajectory {
    pub fn total_reward(&self) -> f64 {
        self.steps.iter().map(|s| s.reward).sum()
    }

    pub fn initial_estimate(&self) -> Rational {
        self.estimates[0]
    }

    pub fn final_estimate(&self) -> Rational {
        *self.estimates.last().expect("initial estimate present")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RolloutConfig {
    pub walk: WalkMode,
    pub bn: Mode,
    pub timetable: TimetableConfig,
}

impl RolloutConfig {
    /// Stochastic episode for training.
    pub fn sampling() -> Self {
        Self { walk: WalkMode::Sample, bn: Mode::Train, timetable: TimetableConfig::default() }
    }

    /// Deterministic episode for evaluation.
    pub fn greedy() -> Self {
        Self { walk: WalkMode::Greedy, bn: Mode::Eval, timetable: TimetableConfig::default() }
    }
}

/// Runs the policy over every section.
///
/// Each section's reward goes to its last policy decision. Sections without
/// one pass their reward on to the next policy decision, or back to the
/// latest one when none follows.
pub fn rollout<R: Rng + ?Sized>(
    inst: &Instance,
    params: &PolicyParams,
    cfg: &RolloutConfig,
    rng: &mut R,
) -> Result<(Schedule, Trajectory), RolloutError> {
    inst.check()?;
    let obj = ExactObjective::standard();
    let mut pipe = Pipeline::new(inst, cfg.timetable)?;
    let mut graph = EventGraph::new(inst);
    let mut traj = Trajectory { estimates: vec![graph.predict_objective(&obj)], ..Default::default() };
    let mut pending = Rational::from_integer(0);
    while !pipe.is_complete() {
        let s = pipe.station();
        let tree = SearchTree::build(pipe.arrival_order(), &inst.planned_order(s))?;
        let (order, decisions) =
            route_walk(&tree, &mut graph, params, cfg.walk, cfg.bn, s, inst.track_capacity[s], rng)?;
        pipe.commit(&order)?;
        graph.commit_section(inst, s, pipe.arrivals(), &order).expect("section inside the graph");
        let estimate = graph.predict_objective(&obj);
        let r = reward(*traj.estimates.last().expect("non-empty"), estimate, inst.num_trains, inst.num_stations);
        traj.estimates.push(estimate);
        traj.section_rewards.push(r);
        pending += r;
        for d in &decisions {
            if let (false, Some(state)) = (d.forced, &d.state) {
                traj.steps.push(Step { state: state.clone(), swap: d.swap, prob: d.prob, reward: 0.0, station: s });
            }
        }
        traj.decisions.extend(decisions);
        if let Some(last) = traj.steps.last_mut().filter(|st| st.station == s) {
            last.reward += pending.to_f64_lossy();
            pending = Rational::from_integer(0);
        }
    }
    if let Some(last) = traj.steps.last_mut() {
        last.reward += pending.to_f64_lossy();
    }
    let schedule = pipe.finish();
    let violations = validate(&schedule.solution, inst, Profile::Operational)?;
    if let Some(v) = violations.first() {
        return Err(RolloutError::Invalid(v.to_string()));
    }
    Ok((schedule, traj))
}

/// Greedy policy timetable of `inst`.
pub fn solve_greedy(inst: &Instance, params: &PolicyParams) -> Result<Schedule, RolloutError> {
    let mut unused = rand::rngs::mock::StepRng::new(0, 0);
    Ok(rollout(inst, params, &RolloutConfig::greedy(), &mut unused)?.0)
}
