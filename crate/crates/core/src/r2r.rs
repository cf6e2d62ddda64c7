//! Reaction-to-reaction graphs and the PS, CS and EM compatibility checks.

use std::collections::{BTreeSet, HashSet};

use crate::crn::Crn;
use crate::efm::FluxMode;

/// A directed graph whose vertices are reaction indices `0..r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct R2RGraph {
    r: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl R2RGraph {
    pub fn new(r: usize) -> Self {
        R2RGraph {
            r,
            edges: BTreeSet::new(),
        }
    }

    /// Panics on self-edges or out-of-range endpoints.
    pub fn from_edges(r: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = Self::new(r);
        for (i, j) in edges {
            g.add_edge(i, j);
        }
        g
    }

    pub fn add_edge(&mut self, i: usize, j: usize) {
        assert!(i != j, "self-edge ({i},{i}) in reaction-to-reaction graph");
        assert!(i < self.r && j < self.r, "edge ({i},{j}) out of range");
        self.edges.insert((i, j));
    }

    pub fn reaction_count(&self) -> usize {
        self.r
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_vec(&self) -> Vec<(usize, usize)> {
        self.edges.iter().copied().collect()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    pub fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((i, 0)..(i + 1, 0)).map(|&(_, j)| j)
    }

    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.r];
        for &(i, j) in &self.edges {
            adj[i].push(j);
        }
        adj
    }

    /// The product-source graph of a network: `(i, j)` whenever the
    /// product of `i` is the source of `j`.
    pub fn product_source(crn: &Crn) -> Self {
        let rx = crn.reactions();
        let mut g = Self::new(rx.len());
        for (i, a) in rx.iter().enumerate() {
            for (j, b) in rx.iter().enumerate() {
                if i != j && a.product == b.source {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Vertex sets of all simple directed cycles, each sorted.
    pub fn simple_cycle_sets(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut out = Vec::new();
        let mut path = Vec::new();
        let mut on_path = vec![false; self.r];
        for s in 0..self.r {
            path.push(s);
            on_path[s] = true;
            cycles_from(s, s, &adj, &mut path, &mut on_path, &mut out);
            on_path[s] = false;
            path.pop();
        }
        out
    }

    /// Vertex sets of minimal simple cycles: cycles whose vertex set carries
    /// no cycle on a proper subset.
    pub fn minimal_cycle_sets(&self) -> BTreeSet<Vec<usize>> {
        let mut out = BTreeSet::new();
        let mut seen = HashSet::new();
        for set in self.simple_cycle_sets() {
            if !seen.insert(set.clone()) {
                continue;
            }
            if self.is_minimal_cycle_set(&set) {
                out.insert(set);
            }
        }
        out
    }

    fn is_minimal_cycle_set(&self, set: &[usize]) -> bool {
        set.iter().all(|&skip| {
            let rest: Vec<usize> = set.iter().copied().filter(|&v| v != skip).collect();
            !self.induced_has_cycle(&rest)
        })
    }

    fn induced_has_cycle(&self, set: &[usize]) -> bool {
        let inside: HashSet<usize> = set.iter().copied().collect();
        // Kahn's algorithm on the induced subgraph.
        let mut indeg: std::collections::HashMap<usize, usize> =
            set.iter().map(|&v| (v, 0)).collect();
        for &(i, j) in &self.edges {
            if inside.contains(&i) && inside.contains(&j) {
                *indeg.get_mut(&j).unwrap() += 1;
            }
        }
        let mut stack: Vec<usize> = set.iter().copied().filter(|v| indeg[v] == 0).collect();
        let mut removed = 0;
        while let Some(v) = stack.pop() {
            removed += 1;
            for w in self.successors(v) {
                if let Some(d) = indeg.get_mut(&w) {
                    *d -= 1;
                    if *d == 0 {
                        stack.push(w);
                    }
                }
            }
        }
        removed < set.len()
    }
}

fn cycles_from(
    start: usize,
    v: usize,
    adj: &[Vec<usize>],
    path: &mut Vec<usize>,
    on_path: &mut [bool],
    out: &mut Vec<Vec<usize>>,
) {
    for &w in &adj[v] {
        if w == start {
            let mut set = path.clone();
            set.sort_unstable();
            out.push(set);
        } else if w > start && !on_path[w] {
            path.push(w);
            on_path[w] = true;
            cycles_from(start, w, adj, path, on_path, out);
            on_path[w] = false;
            path.pop();
        }
    }
}

/// `(i, j)` is an edge exactly when the product of `i` is the source of `j`.
pub fn is_ps_compatible(g: &R2RGraph, crn: &Crn) -> bool {
    g.reaction_count() == crn.reaction_count() && *g == R2RGraph::product_source(crn)
}

/// Every reaction with an edge into `i` also has an edge into each `j`
/// sharing the source of `i`.
pub fn is_cs_compatible(g: &R2RGraph, crn: &Crn) -> bool {
    let rx = crn.reactions();
    if g.reaction_count() != rx.len() {
        return false;
    }
    for (k, i) in g.edges() {
        for (j, b) in rx.iter().enumerate() {
            if j != i && b.source == rx[i].source && !g.has_edge(k, j) {
                return false;
            }
        }
    }
    true
}

/// The vertex sets of minimal cycles are exactly the mode supports.
pub fn is_em_compatible(g: &R2RGraph, modes: &[FluxMode]) -> bool {
    let supports: BTreeSet<Vec<usize>> = modes.iter().map(|m| m.support.clone()).collect();
    g.minimal_cycle_sets() == supports
}
