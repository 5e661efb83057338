//! Node features and incoming adjacency fed to the graph layer.

use ndarray::Array2;
use ttr_core::EventGraph;

use crate::real::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphInput<T> {
    /// One row per node.
    pub features: Array2<T>,
    /// Sources of the edges entering each node.
    pub in_neighbors: Vec<Vec<usize>>,
}

impl<T: Real> GraphInput<T> {
    pub fn new(features: Array2<T>, in_neighbors: Vec<Vec<usize>>) -> Self {
        assert_eq!(features.nrows(), in_neighbors.len(), "one neighbour list per node");
        Self { features, in_neighbors }
    }

    /// Delay and planned arrival scaled by the planning horizon, optionally
    /// followed by the rescheduled flag.
    pub fn from_event_graph(g: &EventGraph, include_flag: bool) -> Self {
        let width = if include_flag { 3 } else { 2 };
        let scale = g.horizon().max(1) as f64;
        let mut features = Array2::zeros((g.len(), width));
        for (v, n) in g.nodes().iter().enumerate() {
            features[[v, 0]] = T::lit(n.delta as f64 / scale);
            features[[v, 1]] = T::lit(n.planned as f64 / scale);
            if include_flag {
                features[[v, 2]] = if n.rescheduled { T::one() } else { T::zero() };
            }
        }
        Self { features, in_neighbors: g.in_neighbors() }
    }

    /// Same graph in another precision.
    pub fn cast<U: Real>(&self) -> GraphInput<U> {
        GraphInput { features: self.features.mapv(|x| U::lit(x.to_f64().expect("finite"))), in_neighbors: self.in_neighbors.clone() }
    }

    pub fn num_nodes(&self) -> usize {
        self.features.nrows()
    }

    /// Same graph with nodes renumbered so that new node `n` is old node `perm[n]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; perm.len()];
        for (n, &old) in perm.iter().enumerate() {
            inv[old] = n;
        }
        let features = self.features.select(ndarray::Axis(0), perm);
        let in_neighbors = perm.iter().map(|&old| self.in_neighbors[old].iter().map(|&u| inv[u]).collect()).collect();
        Self { features, in_neighbors }
    }
}
