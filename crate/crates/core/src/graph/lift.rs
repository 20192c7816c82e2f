use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

use super::{EdgeId, PotentialGraph};

/// How the per-edge permutations of a lift are chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiftSource {
    /// i.i.d. uniform permutations from a ChaCha8 stream.
    Seed(u64),
    /// One permutation of `0..N` per base edge, in base edge order.
    Permutations(Vec<Vec<usize>>),
}

/// An `N`-lift together with its covering projection.
///
/// Lift vertex `(v, i)` has id `v * N + i`. For base edge `(u, v)` (in input
/// orientation) with permutation `σ`, the lift contains `{(u, i), (v, σ(i))}`.
#[derive(Debug, Clone)]
pub struct LiftMap {
    pub base: PotentialGraph,
    pub lift: PotentialGraph,
    pub n: usize,
    pub projection: Vec<usize>,
    pub permutations: Vec<Vec<usize>>,
}

pub fn n_lift(base: &PotentialGraph, n: usize, source: LiftSource) -> Result<LiftMap> {
    if n == 0 {
        return Err(Error::InvalidParameter("lift order N must be >= 1".into()));
    }
    let permutations = match source {
        LiftSource::Seed(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..base.edge_count())
                .map(|_| {
                    let mut p: Vec<usize> = (0..n).collect();
                    p.shuffle(&mut rng);
                    p
                })
                .collect()
        }
        LiftSource::Permutations(perms) => {
            if perms.len() != base.edge_count() {
                return Err(Error::InvalidParameter(format!(
                    "expected {} permutations, got {}",
                    base.edge_count(),
                    perms.len()
                )));
            }
            for p in &perms {
                let mut seen = vec![false; n];
                if p.len() != n || p.iter().any(|&i| i >= n || std::mem::replace(&mut seen[i], true)) {
                    return Err(Error::InvalidParameter(format!(
                        "not a permutation of 0..{n}: {p:?}"
                    )));
                }
            }
            perms
        }
    };

    let mut edges = Vec::with_capacity(base.edge_count() * n);
    for (&(u, v), sigma) in base.edges().iter().zip(&permutations) {
        for (i, &j) in sigma.iter().enumerate() {
            edges.push((u * n + i, v * n + j));
        }
    }
    let potentials: Vec<f64> = (0..base.vertex_count() * n)
        .map(|x| base.potential(x / n))
        .collect();
    let projection = (0..base.vertex_count() * n).map(|x| x / n).collect();
    let lift = PotentialGraph::from_parts(&edges, &potentials)?;
    Ok(LiftMap {
        base: base.clone(),
        lift,
        n,
        projection,
        permutations,
    })
}

impl LiftMap {
    pub fn project_vertex(&self, x: usize) -> usize {
        self.projection[x]
    }

    /// Base directed edge covered by a lift directed edge.
    pub fn project_edge(&self, b: EdgeId) -> EdgeId {
        let (o, t) = (self.lift.origin(b), self.lift.terminus(b));
        self.base
            .edge_id(self.projection[o], self.projection[t])
            .expect("projection is a graph homomorphism")
    }

    /// Checks that the projection is a covering map: potentials are pulled
    /// back and the neighbors of every lift vertex map bijectively onto the
    /// neighbors of its image.
    pub fn is_covering(&self) -> bool {
        if self.lift.vertex_count() != self.base.vertex_count() * self.n {
            return false;
        }
        (0..self.lift.vertex_count()).all(|x| {
            let v = self.projection[x];
            if self.lift.potential(x) != self.base.potential(v) {
                return false;
            }
            let mut images: Vec<usize> = self
                .lift
                .neighbors(x)
                .iter()
                .map(|&y| self.projection[y])
                .collect();
            images.sort_unstable();
            images == self.base.neighbors(v)
        })
    }

    pub fn fiber(&self, v: usize) -> std::ops::Range<usize> {
        v * self.n..(v + 1) * self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, wheel};

    #[test]
    fn one_lift_is_the_base() {
        let base = wheel(&[0.5, -0.2, 0.0, 0.3, 1.0]).unwrap();
        let l = n_lift(&base, 1, LiftSource::Seed(3)).unwrap();
        assert!(l.is_covering());
        assert_eq!(l.lift.edges(), base.edges());
        assert_eq!(l.lift.potentials(), base.potentials());
    }

    #[test]
    fn identity_permutations_give_disjoint_copies() {
        let base = complete(4, &[0.0; 4]).unwrap();
        let ident = vec![vec![0, 1]; 6];
        let l = n_lift(&base, 2, LiftSource::Permutations(ident)).unwrap();
        assert!(!l.lift.is_connected());
        assert!(l.is_covering());
    }

    #[test]
    fn random_fifty_lift_of_k4() {
        let base = complete(4, &[0.0, 1.0, -1.0, 2.0]).unwrap();
        let l = n_lift(&base, 50, LiftSource::Seed(11)).unwrap();
        assert!(l.lift.is_connected());
        assert_eq!(l.lift.vertex_count(), 200);
        assert!((0..200).all(|x| l.lift.degree(x) == 3));
        assert!(l.is_covering());
        for v in 0..4 {
            assert_eq!(l.fiber(v).len(), 50);
        }
        for b in 0..l.lift.directed_edge_count() {
            let pb = l.project_edge(b);
            assert_eq!(base.origin(pb), l.project_vertex(l.lift.origin(b)));
        }
    }

    #[test]
    fn seeded_lifts_are_deterministic() {
        let base = complete(4, &[0.0; 4]).unwrap();
        let a = n_lift(&base, 20, LiftSource::Seed(5)).unwrap();
        let b = n_lift(&base, 20, LiftSource::Seed(5)).unwrap();
        assert_eq!(a.permutations, b.permutations);
        assert_eq!(a.lift, b.lift);
    }

    #[test]
    fn bad_permutations_are_rejected() {
        let base = complete(3, &[0.0; 3]).unwrap();
        let bad = vec![vec![0, 0], vec![0, 1], vec![1, 0]];
        assert!(n_lift(&base, 2, LiftSource::Permutations(bad)).is_err());
        assert!(n_lift(&base, 0, LiftSource::Seed(0)).is_err());
    }
}
