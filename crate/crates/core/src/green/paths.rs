use crate::error::{Error, Result};
use crate::graph::{EdgeId, PotentialGraph};

use super::solver::{Complex, ZetaTable};

/// `G(v, v) = 1 / (W(v) + Σ_{u∼v} ζ_v(u) - γ)`.
pub fn green_diag(g: &PotentialGraph, zt: &ZetaTable, v: usize) -> Result<Complex> {
    let s: Complex = g.out_edges(v).map(|b| zt.values[b]).sum();
    let denom = g.potential(v) - zt.param.gamma() + s;
    let scale = 1.0 + g.potential(v).abs() + zt.param.lambda.abs();
    if denom.norm() <= 1e-14 * scale {
        return Err(Error::DiagonalPole(v));
    }
    Ok(denom.inv())
}

/// Directed edges of a non-backtracking walk given by its vertices.
pub fn nb_path_edges(g: &PotentialGraph, path: &[usize]) -> Result<Vec<EdgeId>> {
    let mut edges = Vec::with_capacity(path.len().saturating_sub(1));
    for (i, w) in path.windows(2).enumerate() {
        let b = g
            .edge_id(w[0], w[1])
            .ok_or_else(|| Error::InvalidPath(format!("{} and {} are not adjacent", w[0], w[1])))?;
        if i > 0 && path[i - 1] == w[1] {
            return Err(Error::InvalidPath(format!("backtracks at position {}", i + 1)));
        }
        edges.push(b);
    }
    Ok(edges)
}

/// `ζ_{v0}(v1) ⋯ ζ_{v_{k-1}}(v_k)` along a non-backtracking walk.
pub fn zeta_product(g: &PotentialGraph, zt: &ZetaTable, path: &[usize]) -> Result<Complex> {
    Ok(nb_path_edges(g, path)?
        .into_iter()
        .map(|b| zt.values[b])
        .product())
}

/// Cover Green function between the endpoints of the lifted walk:
/// `G(v0; vk) = G(v0, v0) ζ_{v0}(v1) ⋯ ζ_{v_{k-1}}(v_k)`.
pub fn green_path(g: &PotentialGraph, zt: &ZetaTable, path: &[usize]) -> Result<Complex> {
    let first = *path
        .first()
        .ok_or_else(|| Error::InvalidPath("empty path".into()))?;
    if first >= g.vertex_count() {
        return Err(Error::InvalidPath(format!("vertex {first} out of range")));
    }
    Ok(green_diag(g, zt, first)? * zeta_product(g, zt, path)?)
}

/// `max_b |1/ζ_w(v) - ζ_v(w) + 1/G(v, v)|` over directed edges `b = (v, w)`.
pub fn zetainv_residual(g: &PotentialGraph, zt: &ZetaTable) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in 0..g.directed_edge_count() {
        let v = g.origin(b);
        let gv = green_diag(g, zt, v)?;
        let r = zt.values[g.reverse(b)].inv() - zt.values[b] + gv.inv();
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{petersen, wheel};
    use crate::green::{boundary_zeta, solve_zeta, BoundaryOptions, SpectralParam};

    #[test]
    fn regular_diag_at_zero() {
        let g = petersen(&[0.0; 10]).unwrap();
        let b = boundary_zeta(&g, 0.0, BoundaryOptions::default());
        let gd = green_diag(&g, &b.table, 3).unwrap();
        assert!((gd - Complex::new(0.0, 2f64.sqrt() / 3.0)).norm() < 1e-12);
    }

    #[test]
    fn path_decay_on_regular_graph() {
        let g = petersen(&[0.0; 10]).unwrap();
        let b = boundary_zeta(&g, 0.0, BoundaryOptions::default());
        let gd = green_diag(&g, &b.table, 0).unwrap();
        assert_eq!(green_path(&g, &b.table, &[0]).unwrap(), gd);
        let p = [0, 1, 2, 3, 4, 0];
        let v = green_path(&g, &b.table, &p).unwrap();
        assert!((v.norm() - gd.norm() * 0.5f64.powf(2.5)).abs() < 1e-12);
    }

    #[test]
    fn backtracking_rejected() {
        let g = petersen(&[0.0; 10]).unwrap();
        let t = solve_zeta(&g, SpectralParam::new(0.0, 1.0), None).unwrap();
        assert!(matches!(green_path(&g, &t, &[0, 1, 0]), Err(Error::InvalidPath(_))));
        assert!(matches!(green_path(&g, &t, &[0, 2]), Err(Error::InvalidPath(_))));
    }

    #[test]
    fn large_eta_diag_bound_and_symmetry() {
        let g = wheel(&[0.3, -1.0, 0.5, 0.0, 2.0]).unwrap();
        let t = solve_zeta(&g, SpectralParam::new(0.4, 10.0), None).unwrap();
        for v in 0..5 {
            assert!(green_diag(&g, &t, v).unwrap().norm() <= 0.1);
        }
        let p = [1, 2, 0, 4, 3];
        let rev: Vec<_> = p.iter().rev().copied().collect();
        let a = green_path(&g, &t, &p).unwrap();
        let b = green_path(&g, &t, &rev).unwrap();
        assert!((a - b).norm() < 1e-14);
        assert!(zetainv_residual(&g, &t).unwrap() < 1e-12);
    }
}
