//! Combes-Thomas decay of cover Green functions at energies off the spectrum.
//!
//! Cover spheres are summed by dynamic programming over non-backtracking
//! walks: the sphere of radius `n` around a lift of `x` is in bijection with
//! walks of length `n` from `x`, and `|G(x, y)|² = |G(x, x)|² Π |ζ|²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::PotentialGraph;

use super::paths::green_diag;
use super::solver::ZetaTable;

/// `S_n(x) = Σ_{d(x̃, y) = n} |G(x̃, y)|²` for `n = 0..=n_max`.
pub fn sphere_sums(g: &PotentialGraph, zt: &ZetaTable, x: usize, n_max: usize) -> Result<Vec<f64>> {
    let g0 = green_diag(g, zt, x)?.norm_sqr();
    let nb = g.directed_edge_count();
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(g0);
    let mut a = vec![0.0; nb];
    for b in g.out_edges(x) {
        a[b] = zt.values[b].norm_sqr();
    }
    for n in 1..=n_max {
        out.push(g0 * a.iter().sum::<f64>());
        if n == n_max {
            break;
        }
        let mut next = vec![0.0; nb];
        for b in 0..nb {
            if a[b] != 0.0 {
                for s in g.nb_successors(b) {
                    next[s] += a[b] * zt.values[s].norm_sqr();
                }
            }
        }
        a = next;
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct CtRow {
    pub n: usize,
    /// Largest `S_n` over roots.
    pub s_n: f64,
    pub worst_root: usize,
    /// `(4/δ²)(1 + δ/2D)^{-2n}`.
    pub rhs: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CtReport {
    pub lambda: f64,
    pub delta: f64,
    pub max_degree: usize,
    pub rows: Vec<CtRow>,
    pub passed: bool,
}

/// Checks `S_n ≤ (4/δ²)(1 + δ/2D)^{-2n}` at every root for `n ≤ n_max`.
/// `zt` must be a real-axis table at a gap energy, `δ` its distance to the
/// cover spectrum.
pub fn combes_thomas_check(g: &PotentialGraph, zt: &ZetaTable, delta: f64, n_max: usize) -> Result<CtReport> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let d = g.max_degree() as f64;
    let mut rows: Vec<CtRow> = (0..=n_max)
        .map(|n| {
            let rhs = 4.0 / (delta * delta) * (1.0 + delta / (2.0 * d)).powi(-2 * n as i32);
            CtRow {
                n,
                s_n: 0.0,
                worst_root: 0,
                rhs,
                margin: rhs,
            }
        })
        .collect();
    for x in 0..g.vertex_count() {
        for (n, s) in sphere_sums(g, zt, x, n_max)?.into_iter().enumerate() {
            if s > rows[n].s_n {
                rows[n].s_n = s;
                rows[n].worst_root = x;
                rows[n].margin = rows[n].rhs - s;
            }
        }
    }
    let passed = rows.iter().all(|r| r.margin >= 0.0);
    Ok(CtReport {
        lambda: zt.param.lambda,
        delta,
        max_degree: g.max_degree(),
        rows,
        passed,
    })
}
