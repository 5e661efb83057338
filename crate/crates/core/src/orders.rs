//! Running-order search space: overtaken trains, the bifurcation tree over
//! forward swaps, and the first-come / first-scheduled rule orders.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{Instance, Minutes, TrainId};
use crate::schedule::{Pipeline, Schedule};
use crate::timetable::{capacity_feasible, overtake_counts, TimetableConfig, TimetableError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderError {
    #[error("orders are not permutations of the same trains")]
    NotPermutation,
}

fn positions(order: &[TrainId]) -> Result<Vec<usize>, OrderError> {
    let mut pos = vec![usize::MAX; order.len()];
    for (p, &k) in order.iter().enumerate() {
        if k >= order.len() || pos[k] != usize::MAX {
            return Err(OrderError::NotPermutation);
        }
        pos[k] = p;
    }
    Ok(pos)
}

/// Trains that are not at the head of the remaining previous order when
/// their turn in the planned order comes, listed in planned order.
pub fn overtaken_trains(prev: &[TrainId], plan: &[TrainId]) -> Result<Vec<TrainId>, OrderError> {
    positions(prev)?;
    if plan.len() != prev.len() {
        return Err(OrderError::NotPermutation);
    }
    positions(plan)?;
    let mut remaining = prev.to_vec();
    let mut out = Vec::new();
    for &k in plan {
        let loc = remaining.iter().position(|&j| j == k).ok_or(OrderError::NotPermutation)?;
        if loc != 0 {
            out.push(k);
        }
        remaining.remove(loc);
    }
    Ok(out)
}

/// One branching point: keep the current order or swap `train` ahead of `preceding`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bifurcation {
    pub train: TrainId,
    pub preceding: TrainId,
    pub keep: Vec<TrainId>,
    pub swap: Vec<TrainId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchTree {
    root: Vec<TrainId>,
    plan_pos: Vec<usize>,
    /// Overtaken trains in the order they are handled (previous running order).
    overtaken: Vec<TrainId>,
    spine: Vec<Bifurcation>,
}

impl SearchTree {
    pub fn build(prev: &[TrainId], plan: &[TrainId]) -> Result<Self, OrderError> {
        let plan_pos = positions(plan)?;
        let ot = overtaken_trains(prev, plan)?;
        let overtaken: Vec<TrainId> = prev.iter().copied().filter(|k| ot.contains(k)).collect();
        let mut tree = SearchTree { root: prev.to_vec(), plan_pos, overtaken, spine: Vec::new() };
        let mut cursor = tree.cursor();
        let mut spine = Vec::new();
        while let Some(b) = cursor.next_bifurcation() {
            cursor.apply(true);
            spine.push(Bifurcation { swap: cursor.order.clone(), ..b });
        }
        tree.spine = spine;
        Ok(tree)
    }

    pub fn root(&self) -> &[TrainId] {
        &self.root
    }

    pub fn overtaken(&self) -> &[TrainId] {
        &self.overtaken
    }

    /// Bifurcations met when every branch swaps.
    pub fn spine(&self) -> &[Bifurcation] {
        &self.spine
    }

    pub fn is_degenerate(&self) -> bool {
        self.spine.is_empty()
    }

    pub fn cursor(&self) -> RouteCursor<'_> {
        RouteCursor { tree: self, order: self.root.clone(), next: 0 }
    }

    /// Every distinct leaf order, optionally keeping only routes whose swaps
    /// respect a station capacity.
    pub fn leaves(&self, capacity: Option<usize>) -> Vec<Vec<TrainId>> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self.cursor()];
        while let Some(mut c) = stack.pop() {
            match c.next_bifurcation() {
                None => {
                    out.insert(c.order.clone());
                }
                Some(_) => {
                    if capacity.is_none_or(|p| c.swap_allowed(p)) {
                        let mut s = c.clone();
                        s.apply(true);
                        stack.push(s);
                    }
                    c.apply(false);
                    stack.push(c);
                }
            }
        }
        out.into_iter().collect()
    }
}

/// Position along one route of a [`SearchTree`].
#[derive(Debug, Clone)]
pub struct RouteCursor<'t> {
    tree: &'t SearchTree,
    order: Vec<TrainId>,
    next: usize,
}

impl<'t> RouteCursor<'t> {
    pub fn order(&self) -> &[TrainId] {
        &self.order
    }

    /// The next decision on this route, skipping overtaken trains that are
    /// already blocked; `None` once the route reaches a leaf.
    pub fn next_bifurcation(&mut self) -> Option<Bifurcation> {
        while self.next < self.tree.overtaken.len() {
            let k = self.tree.overtaken[self.next];
            let pos = self.order.iter().position(|&j| j == k).expect("train present");
            if pos > 0 {
                let g2 = self.order[pos - 1];
                if self.tree.plan_pos[g2] >= self.tree.plan_pos[k] {
                    let mut swap = self.order.clone();
                    swap.swap(pos - 1, pos);
                    return Some(Bifurcation { train: k, preceding: g2, keep: self.order.clone(), swap });
                }
            }
            self.next += 1;
        }
        None
    }

    /// Takes the swap branch (`true`) or keeps the order and moves to the next overtaken train.
    pub fn apply(&mut self, swap: bool) {
        let k = self.tree.overtaken[self.next];
        if swap {
            let pos = self.order.iter().position(|&j| j == k).expect("train present");
            self.order.swap(pos - 1, pos);
        } else {
            self.next += 1;
        }
    }

    /// Whether the swap branch keeps every overtake count below `capacity`.
    pub fn swap_allowed(&self, capacity: usize) -> bool {
        let k = self.tree.overtaken[self.next];
        let pos = self.order.iter().position(|&j| j == k).expect("train present");
        let mut swapped = self.order.clone();
        swapped.swap(pos - 1, pos);
        capacity_feasible(&self.tree.root, &swapped, capacity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    /// First come, first served: keep the arrival order.
    Fcfs,
    /// First scheduled, first served: the planned departure order.
    Fsfs,
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fcfs" => Ok(Rule::Fcfs),
            "fsfs" => Ok(Rule::Fsfs),
            other => Err(format!("unknown rule `{other}`")),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("planned order at station {station} makes train {train} overtake {overtakes} trains with {capacity} tracks")]
    Infeasible { station: usize, train: TrainId, overtakes: usize, capacity: usize },
    #[error(transparent)]
    Timetable(#[from] TimetableError),
}

/// Departure order chosen by `rule` at `station`.
pub fn rule_order(
    rule: Rule,
    inst: &Instance,
    station: usize,
    arrivals: &[Minutes],
    arrival_order: &[TrainId],
) -> Result<Vec<TrainId>, RuleError> {
    match rule {
        Rule::Fcfs => {
            let mut order = arrival_order.to_vec();
            order.sort_by_key(|&k| (arrivals[k], inst.planned_departure[k][station], k));
            Ok(order)
        }
        Rule::Fsfs => {
            let plan = inst.planned_order(station);
            let cap = inst.track_capacity[station];
            let counts = overtake_counts(arrival_order, &plan);
            if let Some((train, &overtakes)) = counts.iter().enumerate().find(|(_, &c)| c >= cap) {
                return Err(RuleError::Infeasible { station, train, overtakes, capacity: cap });
            }
            Ok(plan)
        }
    }
}

/// Full timetable obtained by applying `rule` at every station.
pub fn solve_with_rule(inst: &Instance, rule: Rule, cfg: TimetableConfig) -> Result<Schedule, RuleError> {
    let mut p = Pipeline::new(inst, cfg)?;
    while !p.is_complete() {
        let s = p.station();
        let order = rule_order(rule, inst, s, p.entry_arrivals(), p.arrival_order())?;
        p.commit(&order)?;
    }
    Ok(p.finish())
}

/// Number of departure orders from a given arrival order in which no train
/// overtakes `capacity` or more others.
pub fn feasible_order_count(trains: usize, capacity: usize) -> u128 {
    (1..=trains).map(|r| r.min(capacity.max(1)) as u128).product()
}

/// Calls `visit` with every capacity-feasible departure order.
pub fn for_each_feasible_order(arrival_order: &[TrainId], capacity: usize, mut visit: impl FnMut(&[TrainId])) {
    fn rec(rest: &mut Vec<TrainId>, cap: usize, acc: &mut Vec<TrainId>, visit: &mut dyn FnMut(&[TrainId])) {
        if rest.is_empty() {
            visit(acc);
            return;
        }
        for p in 0..rest.len().min(cap) {
            let k = rest.remove(p);
            acc.push(k);
            rec(rest, cap, acc, visit);
            acc.pop();
            rest.insert(p, k);
        }
    }
    let mut rest = arrival_order.to_vec();
    let mut acc = Vec::with_capacity(rest.len());
    rec(&mut rest, capacity.max(1), &mut acc, &mut visit);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures;

    #[test]
    fn overtaken_examples() {
        assert!(overtaken_trains(&[1, 2, 0], &[1, 2, 0]).unwrap().is_empty());
        assert_eq!(overtaken_trains(&[0, 1, 2], &[1, 0, 2]).unwrap(), vec![1]);
        assert_eq!(overtaken_trains(&[2, 1, 0], &[0, 1, 2]).unwrap(), vec![0, 1]);
        assert!(overtaken_trains(&[0, 1], &[0, 0]).is_err());
    }

    #[test]
    fn single_bifurcation_tree() {
        let t = SearchTree::build(&[0, 1, 2], &[1, 0, 2]).unwrap();
        assert_eq!(t.spine().len(), 1);
        let b = &t.spine()[0];
        assert_eq!((b.train, b.preceding), (1, 0));
        assert_eq!(b.keep, vec![0, 1, 2]);
        assert_eq!(b.swap, vec![1, 0, 2]);
        assert_eq!(t.leaves(None), vec![vec![0, 1, 2], vec![1, 0, 2]]);
    }

    #[test]
    fn identical_orders_give_degenerate_tree() {
        let t = SearchTree::build(&[2, 0, 1], &[2, 0, 1]).unwrap();
        assert!(t.is_degenerate());
        assert_eq!(t.leaves(None), vec![vec![2, 0, 1]]);
    }

    #[test]
    fn keep_everywhere_returns_root() {
        let t = SearchTree::build(&[3, 2, 1, 0], &[0, 1, 2, 3]).unwrap();
        let mut c = t.cursor();
        while c.next_bifurcation().is_some() {
            c.apply(false);
        }
        assert_eq!(c.order(), t.root());
    }

    #[test]
    fn single_track_forces_arrival_order() {
        let t = SearchTree::build(&[3, 2, 1, 0], &[0, 1, 2, 3]).unwrap();
        assert_eq!(t.leaves(Some(1)), vec![vec![3, 2, 1, 0]]);
        assert!(t.leaves(Some(4)).len() > 1);
    }

    #[test]
    fn fsfs_reports_overtake_excess() {
        let mut inst = fixtures::uniform(2, 3, 10);
        inst.track_capacity = vec![2, 2];
        let ok = rule_order(Rule::Fsfs, &inst, 0, &[30, 31, 5], &[2, 0, 1]).unwrap();
        assert_eq!(ok, vec![0, 1, 2]);
        let bad = rule_order(Rule::Fsfs, &inst, 0, &[30, 5, 6], &[1, 2, 0]);
        assert!(matches!(bad, Err(RuleError::Infeasible { train: 0, overtakes: 2, .. })));
    }

    #[test]
    fn fcfs_sorts_by_arrival() {
        let inst = fixtures::uniform(2, 3, 10);
        let order = rule_order(Rule::Fcfs, &inst, 0, &[30, 12, 20], &[1, 2, 0]).unwrap();
        assert_eq!(order, vec![1, 2, 0]);
    }

    #[test]
    fn feasible_orders_match_count() {
        for (k, p) in [(3, 1), (4, 2), (5, 3), (4, 9)] {
            let a: Vec<TrainId> = (0..k).collect();
            let mut n = 0u128;
            for_each_feasible_order(&a, p, |o| {
                assert!(capacity_feasible(&a, o, p));
                n += 1;
            });
            assert_eq!(n, feasible_order_count(k, p));
        }
    }
}
