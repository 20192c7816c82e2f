//! Cone types of the universal cover.
//!
//! Each directed edge `b` of `G` indexes the cone hanging below `t(b)` in the
//! cover. Two edges whose colored cones are isomorphic carry the same `ζ`,
//! so the closed system only needs one unknown per cone type. Types are the
//! coarsest stable refinement of "same potential at the root" under the
//! successor relation.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::graph::PotentialGraph;

use super::solver::JacobianPattern;

/// Closed system `ζ_c = -1 / (W_c - γ + Σ_s m_{c,s} ζ_s)`.
#[derive(Debug, Clone)]
pub struct ConeSystem {
    /// Potential at the root of each cone type.
    pub w: Vec<f64>,
    /// `(successor type, multiplicity)` per type.
    pub succ: Vec<Vec<(usize, f64)>>,
    /// Type of each directed edge of the source graph; empty for synthetic
    /// systems.
    pub edge_class: Vec<usize>,
    pub(crate) jacobian: OnceLock<Option<Arc<JacobianPattern>>>,
}

impl PartialEq for ConeSystem {
    fn eq(&self, other: &Self) -> bool {
        self.w == other.w && self.succ == other.succ && self.edge_class == other.edge_class
    }
}

fn color_of(w: f64) -> u64 {
    // -0.0 and 0.0 describe the same potential
    if w == 0.0 {
        0
    } else {
        w.to_bits()
    }
}

impl ConeSystem {
    /// One unknown per directed edge when `reduce` is false, one per cone
    /// type otherwise.
    pub fn from_graph(g: &PotentialGraph, reduce: bool) -> Self {
        let nb = g.directed_edge_count();
        let classes: Vec<usize> = if reduce {
            refine(g)
        } else {
            (0..nb).collect()
        };
        let count = classes.iter().copied().max().map_or(0, |c| c + 1);
        let mut w = vec![0.0; count];
        let mut succ = vec![Vec::new(); count];
        let mut done = vec![false; count];
        for b in 0..nb {
            let c = classes[b];
            if done[c] {
                continue;
            }
            done[c] = true;
            w[c] = g.potential(g.terminus(b));
            let mut list: Vec<(usize, f64)> = Vec::new();
            for s in g.nb_successors(b) {
                let cs = classes[s];
                match list.iter_mut().find(|(k, _)| *k == cs) {
                    Some(entry) => entry.1 += 1.0,
                    None => list.push((cs, 1.0)),
                }
            }
            list.sort_by_key(|e| e.0);
            succ[c] = list;
        }
        Self {
            w,
            succ,
            edge_class: classes,
            jacobian: OnceLock::new(),
        }
    }

    /// Cone types of `ℤ` with an `m`-periodic potential. Type `j < m` is the
    /// forward edge `(j - 1, j)`, type `m + j` the backward edge `(j + 1, j)`,
    /// indices mod `m`; both have root potential `w[j]`.
    pub fn periodic_chain(w: &[f64]) -> Self {
        let m = w.len();
        let mut pot = Vec::with_capacity(2 * m);
        let mut succ = Vec::with_capacity(2 * m);
        for j in 0..m {
            pot.push(w[j]);
            succ.push(vec![((j + 1) % m, 1.0)]);
        }
        for j in 0..m {
            pot.push(w[j]);
            succ.push(vec![(m + (j + m - 1) % m, 1.0)]);
        }
        Self {
            w: pot,
            succ,
            edge_class: Vec::new(),
            jacobian: OnceLock::new(),
        }
    }

    pub fn class_count(&self) -> usize {
        self.w.len()
    }

    /// Spreads per-type values over directed edges.
    pub fn expand<T: Copy>(&self, per_class: &[T]) -> Vec<T> {
        self.edge_class.iter().map(|&c| per_class[c]).collect()
    }
}

fn refine(g: &PotentialGraph) -> Vec<usize> {
    let nb = g.directed_edge_count();
    let mut ids: HashMap<u64, usize> = HashMap::new();
    let mut class: Vec<usize> = (0..nb)
        .map(|b| {
            let next = ids.len();
            *ids.entry(color_of(g.potential(g.terminus(b)))).or_insert(next)
        })
        .collect();
    let mut count = ids.len();
    loop {
        let mut sig_ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut next_class = Vec::with_capacity(nb);
        for b in 0..nb {
            let mut kids: Vec<usize> = g.nb_successors(b).map(|s| class[s]).collect();
            kids.sort_unstable();
            let n = sig_ids.len();
            next_class.push(*sig_ids.entry((class[b], kids)).or_insert(n));
        }
        let new_count = sig_ids.len();
        class = next_class;
        if new_count == count {
            return class;
        }
        count = new_count;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, n_lift, petersen, LiftSource};

    #[test]
    fn regular_graph_has_one_type() {
        let s = ConeSystem::from_graph(&petersen(&[0.0; 10]).unwrap(), true);
        assert_eq!(s.class_count(), 1);
        assert_eq!(s.succ[0], vec![(0, 2.0)]);
    }

    #[test]
    fn lift_has_the_types_of_its_base() {
        let base = complete(4, &[0.0, 1.0, -1.0, 2.0]).unwrap();
        let l = n_lift(&base, 7, LiftSource::Seed(1)).unwrap();
        let sb = ConeSystem::from_graph(&base, true);
        let sl = ConeSystem::from_graph(&l.lift, true);
        assert_eq!(sb.class_count(), 12);
        assert_eq!(sl.class_count(), 12);
        for b in 0..l.lift.directed_edge_count() {
            let pb = l.project_edge(b);
            for b2 in 0..l.lift.directed_edge_count() {
                if l.project_edge(b2) == pb {
                    assert_eq!(sl.edge_class[b], sl.edge_class[b2]);
                }
            }
        }
    }

    #[test]
    fn periodic_cycle_reduces_to_minimal_period() {
        let w: Vec<f64> = (0..12).map(|j| if j % 2 == 0 { 3.0 } else { -3.0 }).collect();
        let s = ConeSystem::from_graph(&cycle(12, &w).unwrap(), true);
        // left and right cones with the same root potential coincide
        assert_eq!(s.class_count(), 2);
        let w: Vec<f64> = (0..12).map(|j| [1.0, 0.0, -1.0][j % 3]).collect();
        let s = ConeSystem::from_graph(&cycle(12, &w).unwrap(), true);
        assert_eq!(s.class_count(), 6);
        let s = ConeSystem::from_graph(&cycle(12, &[0.0; 12]).unwrap(), true);
        assert_eq!(s.class_count(), 1);
    }

    #[test]
    fn unreduced_system_has_one_unknown_per_edge() {
        let g = complete(4, &[0.0; 4]).unwrap();
        let s = ConeSystem::from_graph(&g, false);
        assert_eq!(s.class_count(), 12);
        assert!(s.succ.iter().all(|l| l.len() == 2));
    }
}
