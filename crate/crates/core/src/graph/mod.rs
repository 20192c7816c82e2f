//! Finite graphs carrying a real potential, and the directed-edge machinery
//! used by everything that works on the universal cover.
//!
//! Directed edges are numbered in CSR order: the out-edges of vertex `v` are
//! `offsets[v]..offsets[v + 1]`, pointing to the sorted neighbors of `v`.

mod generators;
mod io;
mod lift;
mod radii;

pub use generators::{
    complete, complete_bipartite, cycle, localized_example, localized_eigenvector, path,
    petersen, star, wheel,
};
pub use io::{GraphFile, VertexRecord};
pub use lift::{n_lift, LiftMap, LiftSource};
pub use radii::{girth, radii, RadiiProfile};

use std::collections::{HashSet, VecDeque};
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

/// Index of a directed edge in a [`PotentialGraph`].
pub type EdgeId = usize;

/// Directed edge `b = (o(b), t(b))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DirectedEdge {
    pub origin: usize,
    pub terminus: usize,
}

impl DirectedEdge {
    pub fn reversed(self) -> Self {
        Self {
            origin: self.terminus,
            terminus: self.origin,
        }
    }
}

/// Simple graph with a potential `W` on its vertices; the operator is
/// `H = A + W`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGraph {
    neighbors: Vec<Vec<usize>>,
    potential: Vec<f64>,
    edges: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    origin: Vec<usize>,
    terminus: Vec<usize>,
    reverse: Vec<EdgeId>,
    connected: bool,
}

/// Answer of [`check_c1`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct C1Report {
    pub holds: bool,
    pub min_degree: usize,
    pub is_cycle: bool,
    /// `Some(true)` when every directed edge reaches every other one through
    /// non-backtracking walks. Only computed when the degree conditions hold.
    pub nb_irreducible: Option<bool>,
    /// A pair `(from, to)` with no non-backtracking walk from `from` to `to`.
    pub witness: Option<(DirectedEdge, DirectedEdge)>,
}

/// Builds and validates a connected graph. Vertex ids are `0..potentials.len()`.
pub fn build_graph(edges: &[(usize, usize)], potentials: &[f64]) -> Result<PotentialGraph> {
    let g = PotentialGraph::from_parts(edges, potentials)?;
    if !g.connected {
        return Err(Error::Disconnected);
    }
    Ok(g)
}

impl PotentialGraph {
    /// Validates edges and potentials without requiring connectivity. Lifts
    /// use this; everything else goes through [`build_graph`].
    pub fn from_parts(edges: &[(usize, usize)], potentials: &[f64]) -> Result<Self> {
        let n = potentials.len();
        if n == 0 {
            return Err(Error::MalformedEdges("graph has no vertices".into()));
        }
        for (vertex, &value) in potentials.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::InvalidPotential { vertex, value });
            }
        }
        let mut neighbors = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::MalformedEdges(format!(
                    "edge ({u}, {v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::MalformedEdges(format!("self-loop at vertex {u}")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(Error::MalformedEdges(format!("duplicate edge ({u}, {v})")));
            }
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for list in &neighbors {
            offsets.push(offsets.last().unwrap() + list.len());
        }
        let num_directed = *offsets.last().unwrap();
        let mut origin = Vec::with_capacity(num_directed);
        let mut terminus = Vec::with_capacity(num_directed);
        for (v, list) in neighbors.iter().enumerate() {
            for &w in list {
                origin.push(v);
                terminus.push(w);
            }
        }
        let mut reverse = vec![0; num_directed];
        for b in 0..num_directed {
            let (v, w) = (origin[b], terminus[b]);
            let k = neighbors[w].binary_search(&v).expect("symmetric adjacency");
            reverse[b] = offsets[w] + k;
        }

        let mut g = Self {
            neighbors,
            potential: potentials.to_vec(),
            edges: edges.to_vec(),
            offsets,
            origin,
            terminus,
            reverse,
            connected: false,
        };
        g.connected = g.component_count() == 1;
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.neighbors.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges in the order and orientation they were given.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn potential(&self, v: usize) -> f64 {
        self.potential[v]
    }

    pub fn potentials(&self) -> &[f64] {
        &self.potential
    }

    /// `‖W‖_∞`.
    pub fn potential_sup(&self) -> f64 {
        self.potential.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Connected and 2-regular.
    pub fn is_cycle_graph(&self) -> bool {
        self.connected && self.neighbors.iter().all(|l| l.len() == 2)
    }

    /// Condition (C1) on degrees alone: minimal degree ≥ 2 and not a cycle.
    pub fn satisfies_c1(&self) -> bool {
        self.connected && self.min_degree() >= 2 && !self.is_cycle_graph()
    }

    /// Cyclomatic number `|E| − |V| + #components`.
    pub fn cyclomatic_number(&self) -> usize {
        self.edges.len() + self.component_count() - self.vertex_count()
    }

    pub fn directed_edge_count(&self) -> usize {
        self.origin.len()
    }

    pub fn directed_edge(&self, b: EdgeId) -> DirectedEdge {
        DirectedEdge {
            origin: self.origin[b],
            terminus: self.terminus[b],
        }
    }

    pub fn origin(&self, b: EdgeId) -> usize {
        self.origin[b]
    }

    pub fn terminus(&self, b: EdgeId) -> usize {
        self.terminus[b]
    }

    /// Edge reversal `ι`.
    pub fn reverse(&self, b: EdgeId) -> EdgeId {
        self.reverse[b]
    }

    /// Directed edges leaving `v`.
    pub fn out_edges(&self, v: usize) -> Range<EdgeId> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn edge_id(&self, origin: usize, terminus: usize) -> Option<EdgeId> {
        let list = self.neighbors.get(origin)?;
        list.binary_search(&terminus)
            .ok()
            .map(|k| self.offsets[origin] + k)
    }

    pub fn directed_edges(&self) -> Vec<DirectedEdge> {
        (0..self.directed_edge_count())
            .map(|b| self.directed_edge(b))
            .collect()
    }

    /// Non-backtracking successors `{b' : o(b') = t(b), b' ≠ ι(b)}`.
    pub fn nb_successors(&self, b: EdgeId) -> impl Iterator<Item = EdgeId> + '_ {
        let rev = self.reverse[b];
        self.out_edges(self.terminus[b]).filter(move |&e| e != rev)
    }

    /// `(H ψ)(x) = Σ_{y∼x} ψ(y) + W(x) ψ(x)`.
    pub fn apply_hamiltonian(&self, psi: &[f64]) -> Vec<f64> {
        (0..self.vertex_count())
            .map(|x| {
                self.neighbors[x].iter().map(|&y| psi[y]).sum::<f64>() + self.potential[x] * psi[x]
            })
            .collect()
    }

    /// Same graph with `W + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut g = self.clone();
        for w in &mut g.potential {
            *w += c;
        }
        g
    }

    /// Same graph with a new potential.
    pub fn with_potential(&self, potentials: &[f64]) -> Result<Self> {
        Self::from_parts(&self.edges, potentials)
    }

    /// Breadth-first distances from `source`; `usize::MAX` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    fn component_count(&self) -> usize {
        let n = self.vertex_count();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &w in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// Checks (C1) and, when the degree conditions hold, irreducibility of the
/// non-backtracking matrix by reachability closure on directed edges.
pub fn check_c1(g: &PotentialGraph) -> C1Report {
    let min_degree = g.min_degree();
    let is_cycle = g.is_cycle_graph();
    let holds = g.is_connected() && min_degree >= 2 && !is_cycle;
    let mut report = C1Report {
        holds,
        min_degree,
        is_cycle,
        nb_irreducible: None,
        witness: None,
    };
    if !holds {
        return report;
    }
    let nb = g.directed_edge_count();
    let forward = nb_reachable(nb, |b, out| out.extend(g.nb_successors(b)), 0);
    if let Some(missing) = forward.iter().position(|r| !r) {
        report.nb_irreducible = Some(false);
        report.witness = Some((g.directed_edge(0), g.directed_edge(missing)));
        return report;
    }
    // b' → b in the reversed relation iff b is a successor of b'
    let mut predecessors = vec![Vec::new(); nb];
    for b in 0..nb {
        for s in g.nb_successors(b) {
            predecessors[s].push(b);
        }
    }
    let backward = nb_reachable(nb, |b, out| out.extend(&predecessors[b]), 0);
    if let Some(missing) = backward.iter().position(|r| !r) {
        report.nb_irreducible = Some(false);
        report.witness = Some((g.directed_edge(missing), g.directed_edge(0)));
        return report;
    }
    report.nb_irreducible = Some(true);
    report
}

fn nb_reachable(n: usize, mut step: impl FnMut(usize, &mut Vec<usize>), start: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    let mut buf = Vec::new();
    seen[start] = true;
    while let Some(b) = stack.pop() {
        buf.clear();
        step(b, &mut buf);
        for &s in &buf {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_is_a_valid_cycle() {
        let g = build_graph(&[(0, 1), (1, 2), (2, 0)], &[0.0; 3]).unwrap();
        assert_eq!(g.min_degree(), 2);
        assert!(g.is_cycle_graph());
        assert!(!g.satisfies_c1());
    }

    #[test]
    fn k4_satisfies_c1() {
        let g = complete(4, &[0.0; 4]).unwrap();
        assert_eq!(g.min_degree(), 3);
        let c1 = check_c1(&g);
        assert!(c1.holds);
        assert_eq!(c1.nb_irreducible, Some(true));
        assert!(c1.witness.is_none());
    }

    #[test]
    fn disjoint_edges_are_rejected() {
        let err = build_graph(&[(0, 1), (2, 3)], &[0.0; 4]).unwrap_err();
        assert_eq!(err.to_string(), "disconnected graph");
    }

    #[test]
    fn loops_and_duplicates_are_rejected() {
        assert!(matches!(
            build_graph(&[(0, 0)], &[0.0]),
            Err(Error::MalformedEdges(_))
        ));
        assert!(matches!(
            build_graph(&[(0, 1), (1, 0)], &[0.0; 2]),
            Err(Error::MalformedEdges(_))
        ));
        assert!(matches!(
            build_graph(&[(0, 5)], &[0.0; 2]),
            Err(Error::MalformedEdges(_))
        ));
        assert!(matches!(
            build_graph(&[(0, 1)], &[0.0, f64::NAN]),
            Err(Error::InvalidPotential { vertex: 1, .. })
        ));
    }

    #[test]
    fn c1_rejects_cycles_and_paths() {
        let c8 = cycle(8, &[0.0; 8]).unwrap();
        assert!(!check_c1(&c8).holds);
        let p5 = path(5, &[0.0; 5]).unwrap();
        let c1 = check_c1(&p5);
        assert!(!c1.holds);
        assert_eq!(c1.min_degree, 1);
    }

    #[test]
    fn successors_on_small_graphs() {
        let c3 = cycle(3, &[0.0; 3]).unwrap();
        let b = c3.edge_id(0, 1).unwrap();
        let succ: Vec<_> = c3.nb_successors(b).map(|e| c3.directed_edge(e)).collect();
        assert_eq!(
            succ,
            vec![DirectedEdge {
                origin: 1,
                terminus: 2
            }]
        );

        let k4 = complete(4, &[0.0; 4]).unwrap();
        let b = k4.edge_id(0, 1).unwrap();
        let succ: Vec<_> = k4
            .nb_successors(b)
            .map(|e| (k4.origin(e), k4.terminus(e)))
            .collect();
        assert_eq!(succ, vec![(1, 2), (1, 3)]);

        let s = star(3, &[0.0; 4]).unwrap();
        let b = s.edge_id(1, 0).unwrap();
        assert_eq!(s.nb_successors(b).count(), 2);
    }

    #[test]
    fn directed_edges_pair_up() {
        let g = petersen(&[0.0; 10]).unwrap();
        assert_eq!(g.directed_edge_count(), 2 * g.edge_count());
        for b in 0..g.directed_edge_count() {
            assert_eq!(g.reverse(g.reverse(b)), b);
            assert_eq!(g.directed_edge(g.reverse(b)), g.directed_edge(b).reversed());
            assert_eq!(g.nb_successors(b).count(), g.degree(g.terminus(b)) - 1);
        }
    }

    #[test]
    fn c1_witness_on_a_dumbbell_free_graph() {
        // theta graph: two degree-3 vertices joined by three paths; (C1) holds
        let g = build_graph(
            &[(0, 2), (2, 1), (0, 3), (3, 1), (0, 4), (4, 1)],
            &[0.0; 5],
        )
        .unwrap();
        let c1 = check_c1(&g);
        assert!(c1.holds);
        assert_eq!(c1.nb_irreducible, Some(true));
    }
}
