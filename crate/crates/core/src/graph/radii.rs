use std::collections::VecDeque;

use serde::Serialize;

use super::PotentialGraph;

/// Structural radii of a graph, computed on induced balls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RadiiProfile {
    /// Largest radius at which every induced ball is a tree.
    pub rho: usize,
    /// Largest radius at which every induced ball has at most one cycle.
    pub ell: usize,
    pub rho_local: Vec<usize>,
    pub ell_local: Vec<usize>,
    /// `None` for acyclic graphs.
    pub girth: Option<usize>,
    pub diameter: usize,
    /// Radii are capped at the diameter. These flags mark the cases where the
    /// cap is hit because the whole graph qualifies.
    pub rho_unbounded: bool,
    pub ell_unbounded: bool,
}

/// Cyclomatic number of the induced ball `B(x, r)` for `r = 0..=ecc(x)`.
pub fn ball_cyclomatic_profile(g: &PotentialGraph, x: usize) -> Vec<usize> {
    let dist = g.distances_from(x);
    let ecc = dist.iter().copied().filter(|&d| d != usize::MAX).max().unwrap_or(0);
    let mut vertices = vec![0usize; ecc + 1];
    let mut edges = vec![0usize; ecc + 1];
    for &d in &dist {
        if d != usize::MAX {
            vertices[d] += 1;
        }
    }
    for &(u, v) in g.edges() {
        let (du, dv) = (dist[u], dist[v]);
        if du != usize::MAX {
            edges[du.max(dv)] += 1;
        }
    }
    let mut out = Vec::with_capacity(ecc + 1);
    let (mut nv, mut ne) = (0usize, 0usize);
    for r in 0..=ecc {
        nv += vertices[r];
        ne += edges[r];
        out.push(ne + 1 - nv);
    }
    out
}

pub fn radii(g: &PotentialGraph) -> RadiiProfile {
    let n = g.vertex_count();
    let mut diameter = 0;
    let mut profiles = Vec::with_capacity(n);
    for x in 0..n {
        let p = ball_cyclomatic_profile(g, x);
        diameter = diameter.max(p.len() - 1);
        profiles.push(p);
    }
    let first_reaching = |p: &[usize], k: usize| p.iter().position(|&c| c >= k);
    let mut rho_local = Vec::with_capacity(n);
    let mut ell_local = Vec::with_capacity(n);
    for p in &profiles {
        rho_local.push(first_reaching(p, 1).map_or(diameter, |r| r - 1));
        ell_local.push(first_reaching(p, 2).map_or(diameter, |r| r - 1));
    }
    let global = g.cyclomatic_number();
    RadiiProfile {
        rho: rho_local.iter().copied().min().unwrap_or(0),
        ell: ell_local.iter().copied().min().unwrap_or(0),
        rho_local,
        ell_local,
        girth: girth(g),
        diameter,
        rho_unbounded: global == 0,
        ell_unbounded: global <= 1,
    }
}

/// Length of a shortest cycle, by breadth-first search from every vertex.
pub fn girth(g: &PotentialGraph) -> Option<usize> {
    let n = g.vertex_count();
    let mut best: Option<usize> = None;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        parent[s] = usize::MAX;
        queue.clear();
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            if let Some(b) = best {
                if 2 * dist[v] + 1 >= b {
                    break;
                }
            }
            for &w in g.neighbors(v) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    parent[w] = v;
                    queue.push_back(w);
                } else if parent[v] != w {
                    let len = dist[v] + dist[w] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, complete, cycle, localized_example, petersen};

    /// Independent oracle: materialize each induced ball and count its
    /// components directly.
    fn brute_ball_cyclomatic(g: &PotentialGraph, x: usize, r: usize) -> usize {
        let dist = g.distances_from(x);
        let inside: Vec<bool> = dist.iter().map(|&d| d <= r).collect();
        let nv = inside.iter().filter(|&&b| b).count();
        let ne = g
            .edges()
            .iter()
            .filter(|&&(u, v)| inside[u] && inside[v])
            .count();
        // union-find for components
        let mut parent: Vec<usize> = (0..g.vertex_count()).collect();
        fn find(p: &mut [usize], mut a: usize) -> usize {
            while p[a] != a {
                p[a] = p[p[a]];
                a = p[a];
            }
            a
        }
        for &(u, v) in g.edges() {
            if inside[u] && inside[v] {
                let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                parent[a] = b;
            }
        }
        let comps = (0..g.vertex_count())
            .filter(|&v| inside[v] && find(&mut parent, v) == v)
            .count();
        ne + comps - nv
    }

    fn brute_radii(g: &PotentialGraph) -> (usize, usize) {
        let n = g.vertex_count();
        let diam = (0..n)
            .map(|x| *g.distances_from(x).iter().max().unwrap())
            .max()
            .unwrap();
        let mut rho = diam;
        let mut ell = diam;
        for r in (0..=diam).rev() {
            if (0..n).any(|x| brute_ball_cyclomatic(g, x, r) > 0) {
                rho = rho.min(r.saturating_sub(1));
            }
            if (0..n).any(|x| brute_ball_cyclomatic(g, x, r) > 1) {
                ell = ell.min(r.saturating_sub(1));
            }
        }
        (rho, ell)
    }

    #[test]
    fn six_cycle() {
        let g = cycle(6, &[0.0; 6]).unwrap();
        let r = radii(&g);
        assert_eq!(r.girth, Some(6));
        assert_eq!(r.rho, 2);
        assert_eq!(r.ell, 3);
        assert!(r.ell_unbounded);
        assert!(!r.rho_unbounded);
        assert_eq!(brute_radii(&g), (2, 3));
    }

    #[test]
    fn k4() {
        let r = radii(&complete(4, &[0.0; 4]).unwrap());
        assert_eq!((r.girth, r.rho, r.ell), (Some(3), 0, 0));
    }

    #[test]
    fn petersen_radii() {
        let g = petersen(&[0.0; 10]).unwrap();
        let r = radii(&g);
        assert_eq!(r.girth, Some(5));
        assert_eq!(r.rho, 1);
        assert_eq!((r.rho, r.ell), brute_radii(&g));
    }

    #[test]
    fn agrees_with_brute_force() {
        for m in [2, 3, 4] {
            let g = localized_example(m).unwrap();
            let r = radii(&g);
            assert_eq!((r.rho, r.ell), brute_radii(&g), "m = {m}");
            assert!(r.ell >= r.rho);
        }
        let tree = build_graph(&[(0, 1), (1, 2), (1, 3)], &[0.0; 4]).unwrap();
        let r = radii(&tree);
        assert_eq!(r.girth, None);
        assert!(r.rho_unbounded && r.ell_unbounded);
        assert_eq!(r.rho, 2);
    }

    #[test]
    fn girth_of_theta_graph() {
        // paths of lengths 2, 3, 4 between vertices 0 and 1
        let g = build_graph(
            &[(0, 2), (2, 1), (0, 3), (3, 4), (4, 1), (0, 5), (5, 6), (6, 7), (7, 1)],
            &[0.0; 8],
        )
        .unwrap();
        assert_eq!(girth(&g), Some(5));
    }
}
