//! Directed graph of arrival events used as the policy state.
//!
//! One node per (train, station) arrival. Same-train edges run from the
//! later station to the earlier one; ordering edges chain consecutive trains
//! in the running order that reaches each station.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{Instance, Minutes, ObjectiveConfig, TrainId};
use crate::objective::deviation_penalty;
use crate::scalar::Scalar;
use crate::schedule::Schedule;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("trains {ahead} and {behind} are not adjacent at station {station}")]
    NotAdjacent { station: usize, ahead: TrainId, behind: TrainId },
    #[error("station {0} out of range")]
    Station(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EventNode {
    pub train: TrainId,
    pub station: usize,
    /// Current delay estimate in minutes; negative only once rescheduled early.
    pub delta: Minutes,
    pub planned: Minutes,
    pub rescheduled: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    SameTrain,
    Ordering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventGraph {
    num_trains: usize,
    num_stations: usize,
    nodes: Vec<EventNode>,
    /// Running order reaching each station.
    chains: Vec<Vec<TrainId>>,
    /// Planned supplement per train and section.
    supplement: Vec<Vec<Minutes>>,
    occurred: Vec<Vec<Minutes>>,
    horizon: Minutes,
}

/// `max(0, previous delay - supplement)`.
pub fn propagate_delta(previous: Minutes, supplement: Minutes) -> Minutes {
    (previous - supplement).max(0)
}

impl EventGraph {
    /// Graph of an instance with nothing decided: delays flow from the
    /// occurred delays and planned orders link the trains.
    pub fn new(inst: &Instance) -> Self {
        let (k_n, i_n) = (inst.num_trains, inst.num_stations);
        let mut nodes = Vec::with_capacity(k_n * i_n);
        for k in inst.trains() {
            for i in inst.stations() {
                nodes.push(EventNode {
                    train: k,
                    station: i,
                    delta: 0,
                    planned: inst.planned_arrival[k][i],
                    rescheduled: false,
                });
            }
        }
        let mut chains = vec![inst.origin_arrival_order()];
        chains.extend((1..i_n).map(|i| inst.planned_order(i - 1)));
        let supplement = inst
            .trains()
            .map(|k| (0..i_n.saturating_sub(1)).map(|s| inst.planned_supplement(k, s)).collect())
            .collect();
        let mut g = EventGraph {
            num_trains: k_n,
            num_stations: i_n,
            nodes,
            chains,
            supplement,
            occurred: inst.occurred_delay.clone(),
            horizon: inst.horizon(),
        };
        g.propagate_from(0);
        g
    }

    /// Graph of a finished timetable: every node rescheduled.
    pub fn from_schedule(inst: &Instance, sched: &Schedule) -> Self {
        let mut g = EventGraph::new(inst);
        for i in inst.stations() {
            g.chains[i] = sched.arrival_order[i].clone();
        }
        for k in inst.trains() {
            for i in inst.stations() {
                let idx = g.index(k, i);
                g.nodes[idx].delta = sched.solution.arrival[k][i] - inst.planned_arrival[k][i];
                g.nodes[idx].rescheduled = true;
            }
        }
        g
    }

    pub fn num_trains(&self) -> usize {
        self.num_trains
    }

    pub fn num_stations(&self) -> usize {
        self.num_stations
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn horizon(&self) -> Minutes {
        self.horizon
    }

    pub fn index(&self, train: TrainId, station: usize) -> usize {
        train * self.num_stations + station
    }

    pub fn node(&self, train: TrainId, station: usize) -> &EventNode {
        &self.nodes[self.index(train, station)]
    }

    pub fn nodes(&self) -> &[EventNode] {
        &self.nodes
    }

    pub fn chain(&self, station: usize) -> &[TrainId] {
        &self.chains[station]
    }

    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(2 * self.nodes.len());
        for k in 0..self.num_trains {
            for i in 1..self.num_stations {
                out.push(Edge { from: self.index(k, i), to: self.index(k, i - 1), kind: EdgeKind::SameTrain });
            }
        }
        for (i, chain) in self.chains.iter().enumerate() {
            for w in chain.windows(2) {
                out.push(Edge { from: self.index(w[0], i), to: self.index(w[1], i), kind: EdgeKind::Ordering });
            }
        }
        out
    }

    /// Sources of the edges entering each node.
    pub fn in_neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in self.edges() {
            adj[e.to].push(e.from);
        }
        adj
    }

    /// Replaces the running order reaching `station`.
    pub fn set_chain(&mut self, station: usize, order: &[TrainId]) -> Result<(), GraphError> {
        let chain = self.chains.get_mut(station).ok_or(GraphError::Station(station))?;
        chain.clear();
        chain.extend_from_slice(order);
        Ok(())
    }

    /// Lets `behind` pass `ahead` in the running order reaching `station`.
    pub fn apply_swap(&mut self, station: usize, ahead: TrainId, behind: TrainId) -> Result<(), GraphError> {
        let chain = self.chains.get_mut(station).ok_or(GraphError::Station(station))?;
        let p = chain.iter().position(|&k| k == behind);
        match p {
            Some(p) if p > 0 && chain[p - 1] == ahead => {
                chain.swap(p - 1, p);
                Ok(())
            }
            _ => Err(GraphError::NotAdjacent { station, ahead, behind }),
        }
    }

    /// Records the timetable of `section` (stations `section` and
    /// `section + 1`) and refreshes the estimates downstream.
    pub fn commit_section(
        &mut self,
        inst: &Instance,
        section: usize,
        arrivals: &[Vec<Minutes>],
        order: &[TrainId],
    ) -> Result<(), GraphError> {
        let next = section + 1;
        if next >= self.num_stations {
            return Err(GraphError::Station(next));
        }
        for k in 0..self.num_trains {
            for i in [section, next] {
                let idx = self.index(k, i);
                self.nodes[idx].delta = arrivals[k][i] - inst.planned_arrival[k][i];
                self.nodes[idx].rescheduled = true;
            }
        }
        self.set_chain(next, order)?;
        if next + 1 < self.num_stations {
            self.set_chain(next + 1, order)?;
        }
        self.propagate_from(next + 1);
        Ok(())
    }

    fn propagate_from(&mut self, start: usize) {
        for k in 0..self.num_trains {
            for i in start..self.num_stations {
                let idx = self.index(k, i);
                if self.nodes[idx].rescheduled {
                    continue;
                }
                let e = self.occurred[k][i];
                self.nodes[idx].delta = if i == 0 {
                    e
                } else {
                    propagate_delta(self.nodes[idx - 1].delta, self.supplement[k][i - 1]).max(e)
                };
            }
        }
    }

    /// Penalty of every node's current delay estimate.
    pub fn predict_objective<S: Scalar>(&self, cfg: &ObjectiveConfig<S>) -> S {
        self.nodes.iter().map(|n| deviation_penalty(n.delta, cfg)).sum()
    }

    /// Plain-text edge list, one `from -> to kind` line per edge, nodes named `k:i`.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            let _ = writeln!(
                s,
                "node {}:{} delta={} planned={} rescheduled={}",
                n.train, n.station, n.delta, n.planned, n.rescheduled as u8
            );
        }
        for e in self.edges() {
            let (a, b) = (&self.nodes[e.from], &self.nodes[e.to]);
            let kind = match e.kind {
                EdgeKind::SameTrain => "train",
                EdgeKind::Ordering => "order",
            };
            let _ = writeln!(s, "{}:{} -> {}:{} {}", a.train, a.station, b.train, b.station, kind);
        }
        s
    }
}
