//! Policy-guided walk down a running-order search tree.

use rand::Rng;
use ttr_core::orders::SearchTree;
use ttr_core::{EventGraph, TrainId};
use ttr_neural::{Evaluation, Mode, NetError, PolicyGraph, PolicyParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkMode {
    /// Swap only when the policy prefers it strictly; ties keep the order.
    Greedy,
    /// Draw each action from the policy.
    Sample,
}

/// Policy inputs at one unforced decision.
#[derive(Debug, Clone)]
pub struct DecisionState {
    pub graph: PolicyGraph,
    /// Node of the train currently ahead.
    pub first: usize,
    /// Node of the overtaken candidate.
    pub second: usize,
    /// Critic estimate at this state.
    pub value: f32,
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub station: usize,
    pub train: TrainId,
    pub preceding: TrainId,
    pub swap: bool,
    /// Probability of the swap action; 0 when the swap branch was pruned.
    pub p_swap: f32,
    /// Probability of the action taken; 1 for forced decisions.
    pub prob: f32,
    pub forced: bool,
    /// Present for decisions made by the policy.
    pub state: Option<DecisionState>,
}

/// Walks `tree` for the departure order at `station`, rewiring the running
/// order that reaches `station + 1` in `graph` after every decision.
///
/// Swap branches that would overtake `capacity` or more trains are pruned and
/// the keep branch is logged as forced.
#[allow(clippy::too_many_arguments)]
pub fn route_walk<R: Rng + ?Sized>(
    tree: &SearchTree,
    graph: &mut EventGraph,
    params: &PolicyParams,
    mode: WalkMode,
    bn: Mode,
    station: usize,
    capacity: usize,
    rng: &mut R,
) -> Result<(Vec<TrainId>, Vec<Decision>), NetError> {
    let next = station + 1;
    graph.set_chain(next, tree.root()).expect("station inside the graph");
    let include_flag = params.cfg.include_flag;
    let mut cursor = tree.cursor();
    let mut log = Vec::new();
    while let Some(b) = cursor.next_bifurcation() {
        if !cursor.swap_allowed(capacity) {
            cursor.apply(false);
            log.push(Decision {
                station,
                train: b.train,
                preceding: b.preceding,
                swap: false,
                p_swap: 0.0,
                prob: 1.0,
                forced: true,
                state: None,
            });
            continue;
        }
        let input = PolicyGraph::from_event_graph(graph, include_flag);
        let (first, second) = (graph.index(b.preceding, next), graph.index(b.train, next));
        let eval = Evaluation::run(params, &input, first, second, bn)?;
        let p = eval.prob();
        let swap = match mode {
            WalkMode::Greedy => p > 0.5,
            WalkMode::Sample => rng.gen::<f32>() < p,
        };
        cursor.apply(swap);
        if swap {
            graph.apply_swap(next, b.preceding, b.train).expect("bifurcation pair is adjacent");
        }
        log.push(Decision {
            station,
            train: b.train,
            preceding: b.preceding,
            swap,
            p_swap: p,
            prob: if swap { p } else { 1.0 - p },
            forced: false,
            state: Some(DecisionState { graph: input, first, second, value: eval.value() }),
        });
    }
    Ok((cursor.order().to_vec(), log))
}
