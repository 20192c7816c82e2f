use crate::error::{Error, Result};

use super::{build_graph, PotentialGraph};

fn check_len(w: &[f64], n: usize, what: &str) -> Result<()> {
    if w.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{what} needs {n} potential values, got {}",
            w.len()
        )));
    }
    Ok(())
}

/// Cycle `C_n`, vertex `j` adjacent to `j ± 1 mod n`.
pub fn cycle(n: usize, w: &[f64]) -> Result<PotentialGraph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n >= 3, got {n}")));
    }
    check_len(w, n, "cycle")?;
    let edges: Vec<_> = (0..n).map(|j| (j, (j + 1) % n)).collect();
    build_graph(&edges, w)
}

pub fn path(n: usize, w: &[f64]) -> Result<PotentialGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("path needs n >= 2, got {n}")));
    }
    check_len(w, n, "path")?;
    let edges: Vec<_> = (0..n - 1).map(|j| (j, j + 1)).collect();
    build_graph(&edges, w)
}

pub fn complete(n: usize, w: &[f64]) -> Result<PotentialGraph> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("complete graph needs n >= 2, got {n}")));
    }
    check_len(w, n, "complete graph")?;
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v));
        }
    }
    build_graph(&edges, w)
}

/// `K_{a,b}`: vertices `0..a` on one side, `a..a+b` on the other.
pub fn complete_bipartite(a: usize, b: usize, w: &[f64]) -> Result<PotentialGraph> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidParameter("complete bipartite graph needs a, b >= 1".into()));
    }
    check_len(w, a + b, "complete bipartite graph")?;
    let mut edges = Vec::new();
    for u in 0..a {
        for v in 0..b {
            edges.push((u, a + v));
        }
    }
    build_graph(&edges, w)
}

/// Star `K_{1,k}` with center 0.
pub fn star(k: usize, w: &[f64]) -> Result<PotentialGraph> {
    if k == 0 {
        return Err(Error::InvalidParameter("star needs at least one leaf".into()));
    }
    check_len(w, k + 1, "star")?;
    let edges: Vec<_> = (1..=k).map(|j| (0, j)).collect();
    build_graph(&edges, w)
}

/// Petersen graph: outer 5-cycle `0..5`, inner pentagram `5..10`.
pub fn petersen(w: &[f64]) -> Result<PotentialGraph> {
    check_len(w, 10, "Petersen graph")?;
    let mut edges = Vec::with_capacity(15);
    for j in 0..5 {
        edges.push((j, (j + 1) % 5));
        edges.push((j, j + 5));
        edges.push((5 + j, 5 + (j + 2) % 5));
    }
    build_graph(&edges, w)
}

/// Wheel on 5 vertices: hub 0 joined to the 4-cycle `1..5`. Minimal degree 3.
pub fn wheel(w: &[f64]) -> Result<PotentialGraph> {
    check_len(w, 5, "wheel")?;
    let mut edges = Vec::with_capacity(8);
    for j in 1..5 {
        edges.push((0, j));
        edges.push((j, j % 4 + 1));
    }
    build_graph(&edges, w)
}

/// A 6-cycle `x0..x5` (vertices `0..6`) with a segment `y1..y_{3m-1}`
/// (vertices `6..6+3m-1`) attached by `y1 ~ x2` and `y_{3m-1} ~ x5`; `W ≡ 0`.
///
/// `-1` is an eigenvalue with an eigenvector supported on `{x0, x1, x3, x4}`,
/// see [`localized_eigenvector`].
pub fn localized_example(m: usize) -> Result<PotentialGraph> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("localized example needs m >= 2, got {m}")));
    }
    let seg = 3 * m - 1;
    let n = 6 + seg;
    let mut edges: Vec<_> = (0..6).map(|j| (j, (j + 1) % 6)).collect();
    for i in 0..seg - 1 {
        edges.push((6 + i, 7 + i));
    }
    edges.push((2, 6));
    edges.push((6 + seg - 1, 5));
    build_graph(&edges, &vec![0.0; n])
}

/// `ψ(x0) = ψ(x3) = 1/2`, `ψ(x1) = ψ(x4) = -1/2`, zero elsewhere.
pub fn localized_eigenvector(m: usize) -> Vec<f64> {
    let mut psi = vec![0.0; 6 + 3 * m - 1];
    psi[0] = 0.5;
    psi[3] = 0.5;
    psi[1] = -0.5;
    psi[4] = -0.5;
    psi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn localized_example_sizes() {
        let g = localized_example(2).unwrap();
        assert_eq!(g.vertex_count(), 11);
        let deg3: Vec<_> = (0..11).filter(|&v| g.degree(v) == 3).collect();
        assert_eq!(deg3, vec![2, 5]);
        assert_eq!(localized_example(5).unwrap().vertex_count(), 20);
        assert!(localized_example(1).is_err());
    }

    #[test]
    fn localized_eigenvector_has_eigenvalue_minus_one() {
        for m in [2, 3, 5, 10] {
            let g = localized_example(m).unwrap();
            let psi = localized_eigenvector(m);
            let h = g.apply_hamiltonian(&psi);
            for (a, b) in h.iter().zip(&psi) {
                assert!((a + b).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn generator_degrees() {
        let p = petersen(&[0.0; 10]).unwrap();
        assert!((0..10).all(|v| p.degree(v) == 3));
        assert_eq!(p.edge_count(), 15);
        let w = wheel(&[0.0; 5]).unwrap();
        assert_eq!(w.min_degree(), 3);
        assert_eq!(w.max_degree(), 4);
        let kb = complete_bipartite(3, 4, &[0.0; 7]).unwrap();
        assert_eq!(kb.degree(0), 4);
        assert_eq!(kb.degree(6), 3);
    }
}
