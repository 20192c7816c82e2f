//! Dense symmetric eigendecomposition of `H_G`.

use faer::{Mat, Side};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::PotentialGraph;

pub const DEFAULT_CAP: usize = 4000;

/// Relative gap below which neighbouring eigenvalues share a cluster.
pub const CLUSTER_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair {
    pub lambda: f64,
    pub psi: Vec<f64>,
    pub cluster: usize,
}

impl EigenPair {
    pub fn sup_norm(&self) -> f64 {
        self.psi.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn p_norm(&self, p: f64) -> f64 {
        self.psi.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }

    /// Vertices with `|ψ(x)| > tol ‖ψ‖_∞`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        let cut = tol * self.sup_norm();
        (0..self.psi.len()).filter(|&x| self.psi[x].abs() > cut).collect()
    }

    /// `‖H ψ - λ ψ‖₂`.
    pub fn residual(&self, g: &PotentialGraph) -> f64 {
        let h = g.apply_hamiltonian(&self.psi);
        h.iter()
            .zip(&self.psi)
            .map(|(a, b)| (a - self.lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// All eigenpairs, ascending, with cluster tags.
pub fn full_spectrum(g: &PotentialGraph) -> Result<Vec<EigenPair>> {
    full_spectrum_capped(g, DEFAULT_CAP)
}

pub fn full_spectrum_capped(g: &PotentialGraph, cap: usize) -> Result<Vec<EigenPair>> {
    let n = g.vertex_count();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let mut h = Mat::<f64>::zeros(n, n);
    for v in 0..n {
        h[(v, v)] = g.potential(v);
        for &w in g.neighbors(v) {
            h[(v, w)] += 1.0;
        }
    }
    let eig = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let s = eig.S().column_vector();
    let u = eig.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let mut pairs: Vec<EigenPair> = order
        .iter()
        .map(|&j| EigenPair {
            lambda: s[j],
            psi: (0..n).map(|i| u[(i, j)]).collect(),
            cluster: 0,
        })
        .collect();
    let scale = pairs.iter().fold(1.0, |m, p| f64::max(m, p.lambda.abs()));
    for k in 1..pairs.len() {
        let c = pairs[k - 1].cluster;
        pairs[k].cluster = if pairs[k].lambda - pairs[k - 1].lambda <= CLUSTER_GAP * scale {
            c
        } else {
            c + 1
        };
    }
    Ok(pairs)
}

/// Index lists of the clusters, in order.
pub fn clusters(pairs: &[EigenPair]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (k, p) in pairs.iter().enumerate() {
        if out.len() <= p.cluster {
            out.push(Vec::new());
        }
        out[p.cluster].push(k);
    }
    out
}
