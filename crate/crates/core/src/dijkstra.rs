//! Binary-heap Dijkstra over an abstract edge-labelled graph.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::cost::Cost;

/// A directed graph with nonnegative weights and labelled edges.
pub trait Graph {
    type Edge: Copy;

    fn vertex_count(&self) -> usize;

    /// Calls `f(target, weight, label)` for every outgoing edge of `v`.
    /// Infinite weights are skipped by the search.
    fn for_each_edge<F: FnMut(usize, f64, Self::Edge)>(&self, v: usize, f: F);
}

#[derive(Clone, Debug, PartialEq)]
pub struct Route<E> {
    pub cost: Cost,
    /// Edge labels from the source to the target, in order.
    pub edges: Vec<E>,
}

/// Settled distances and the shortest-path tree of one search.
#[derive(Clone, Debug)]
pub struct ShortestPaths<E> {
    source: usize,
    dist: Vec<f64>,
    pred: Vec<Option<(u32, E)>>,
}

impl<E: Copy> ShortestPaths<E> {
    pub fn cost(&self, v: usize) -> Cost {
        Cost::from_valid(self.dist[v])
    }

    pub fn reached(&self, v: usize) -> bool {
        self.dist[v].is_finite()
    }

    /// Route to `v`, or `None` when `v` was not reached.
    pub fn route(&self, v: usize) -> Option<Route<E>> {
        if !self.reached(v) {
            return None;
        }
        let mut edges = Vec::new();
        let mut current = v;
        while current != self.source {
            let (p, e) = self.pred[current].expect("reached vertex has a predecessor");
            edges.push(e);
            current = p as usize;
        }
        edges.reverse();
        Some(Route { cost: self.cost(v), edges })
    }
}

/// Single-source search from `source`. Stops once every vertex in
/// `targets` is settled; an empty `targets` explores everything reachable.
///
/// Ties are settled in insertion order, so results are deterministic.
/// Panics if `source` is out of range.
pub fn dijkstra<G: Graph>(g: &G, source: usize, targets: &[usize]) -> ShortestPaths<G::Edge> {
    let n = g.vertex_count();
    assert!(source < n, "source {source} not in graph of {n} vertices");
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(u32, G::Edge)>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut is_target = vec![false; if targets.is_empty() { 0 } else { n }];
    let mut remaining = 0usize;
    for &t in targets {
        if !is_target[t] {
            is_target[t] = true;
            remaining += 1;
        }
    }

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    dist[source] = 0.0;
    heap.push(Reverse((Cost::ZERO, seq, source as u32)));
    while let Some(Reverse((d, _, v))) = heap.pop() {
        let v = v as usize;
        if settled[v] {
            continue;
        }
        settled[v] = true;
        if !is_target.is_empty() && is_target[v] {
            remaining -= 1;
            if remaining == 0 {
                break;
            }
        }
        let d = d.value();
        g.for_each_edge(v, |w, weight, label| {
            debug_assert!(weight >= 0.0, "negative edge weight {weight}");
            if !weight.is_finite() || settled[w] {
                return;
            }
            let nd = d + weight;
            if nd < dist[w] {
                dist[w] = nd;
                pred[w] = Some((v as u32, label));
                seq += 1;
                heap.push(Reverse((Cost::from_valid(nd), seq, w as u32)));
            }
        });
    }
    ShortestPaths { source, dist, pred }
}

/// Convenience wrapper returning one optional route per target.
pub fn dijkstra_multi<G: Graph>(g: &G, source: usize, targets: &[usize]) -> Vec<Option<Route<G::Edge>>> {
    let paths = dijkstra(g, source, targets);
    targets.iter().map(|&t| paths.route(t)).collect()
}

/// Plain adjacency-list graph, used by tests and small searches.
#[derive(Clone, Debug, Default)]
pub struct AdjacencyGraph<E> {
    pub edges: Vec<Vec<(usize, f64, E)>>,
}

impl<E: Copy> AdjacencyGraph<E> {
    pub fn new(n: usize) -> Self {
        AdjacencyGraph { edges: (0..n).map(|_| Vec::new()).collect() }
    }

    pub fn add_vertex(&mut self) -> usize {
        self.edges.push(Vec::new());
        self.edges.len() - 1
    }

    pub fn add_edge(&mut self, from: usize, to: usize, weight: f64, label: E) {
        self.edges[from].push((to, weight, label));
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().map(Vec::len).sum()
    }
}

impl<E: Copy> Graph for AdjacencyGraph<E> {
    type Edge = E;

    fn vertex_count(&self) -> usize {
        self.edges.len()
    }

    fn for_each_edge<F: FnMut(usize, f64, E)>(&self, v: usize, mut f: F) {
        for &(w, c, e) in &self.edges[v] {
            f(w, c, e);
        }
    }
}
