//! Delocalization parameters computed from a bulk boundary table.
//!
//! All quantities are exact finite maxima/sums over directed edges. Path sums
//! use dynamic programming over non-backtracking walks, which enumerate cover
//! paths exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::PotentialGraph;
use crate::green::{Complex, ZetaTable};

/// Threshold on `min |Im ζ|` below which a table is not treated as bulk.
pub const EPS_BAND: f64 = 1e-4;

/// `s` values reported by default; `p/4` is appended for each requested `p`.
pub const DEFAULT_S: [f64; 4] = [1.25, 1.5, 2.0, 3.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strictness {
    Strict,
    Marginal,
    Violated,
}

/// `x < 1` judged against the tolerance `tol`.
pub fn strictly_below_one(x: f64, tol: f64) -> Strictness {
    if x <= 1.0 - 10.0 * tol {
        Strictness::Strict
    } else if x <= 1.0 + tol {
        Strictness::Marginal
    } else {
        Strictness::Violated
    }
}

fn require_bulk(zt: &ZetaTable) -> Result<()> {
    if zt.values.iter().all(|z| z.im < 0.0) && zt.min_abs_im() > EPS_BAND {
        Ok(())
    } else {
        Err(Error::NotBulk)
    }
}

/// `z_λ = min_b |Im ζ_b|`.
pub fn z_lambda(zt: &ZetaTable) -> Result<f64> {
    require_bulk(zt)?;
    Ok(zt.min_abs_im())
}

fn one_step_sum(g: &PotentialGraph, zt: &ZetaTable, b: usize, s: f64) -> f64 {
    let zb = zt.values[b];
    let head = zb.norm().powf(2.0 * s) / zb.im.abs().powf(s);
    g.nb_successors(b)
        .map(|e| head * zt.values[e].im.abs().powf(s))
        .sum()
}

/// `Z_{s,λ} = max_b Σ_{b' ∈ N⁺(b)} |ζ_b|^{2s} |Im ζ_{b'}|^s / |Im ζ_b|^s`, `s > 1`.
pub fn z_s_lambda(g: &PotentialGraph, zt: &ZetaTable, s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Z_s needs s > 1 (s = 1 is the conservation check), got {s}"
        )));
    }
    require_bulk(zt)?;
    Ok((0..g.directed_edge_count())
        .map(|b| one_step_sum(g, zt, b, s))
        .fold(0.0, f64::max))
}

/// `𝒵_λ = max_{b, b' ∈ N⁺(b)} |ζ_b|² |Im ζ_{b'}| / |Im ζ_b|`.
pub fn script_z(g: &PotentialGraph, zt: &ZetaTable) -> Result<f64> {
    require_bulk(zt)?;
    let mut best: f64 = 0.0;
    for b in 0..g.directed_edge_count() {
        let zb = zt.values[b];
        for e in g.nb_successors(b) {
            best = best.max(zb.norm_sqr() * zt.values[e].im.abs() / zb.im.abs());
        }
    }
    Ok(best)
}

/// Result of the current conservation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Conservation {
    /// `max_b |Σ_{b'} |Im ζ_{b'}| - |Im ζ_b| / |ζ_b|²|`.
    Residual { max_residual: f64, max_normalized: f64 },
    /// `Im ζ ≡ 0` off the bulk.
    NotApplicable,
}

pub fn conservation_check(g: &PotentialGraph, zt: &ZetaTable) -> Conservation {
    if require_bulk(zt).is_err() {
        return Conservation::NotApplicable;
    }
    let mut raw: f64 = 0.0;
    let mut normalized: f64 = 0.0;
    for b in 0..g.directed_edge_count() {
        let zb = zt.values[b];
        let out: f64 = g.nb_successors(b).map(|e| zt.values[e].im.abs()).sum();
        raw = raw.max((out - zb.im.abs() / zb.norm_sqr()).abs());
        normalized = normalized.max((one_step_sum(g, zt, b, 1.0) - 1.0).abs());
    }
    Conservation::Residual {
        max_residual: raw,
        max_normalized: normalized,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZsEntry {
    pub s: f64,
    pub value: f64,
    pub below_one: Strictness,
    /// `𝒵_λ^{s-1}`.
    pub script_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DelocalizationParams {
    pub lambda: f64,
    pub z_lambda: f64,
    #[serde(rename = "Z_s")]
    pub z_s: Vec<ZsEntry>,
    pub script_z: f64,
    /// `Z_{2,λ}^{-1/4}`.
    #[serde(rename = "M")]
    pub m_lambda: f64,
    pub conservation_residual: f64,
    pub conservation_raw: f64,
}

impl DelocalizationParams {
    pub fn compute(g: &PotentialGraph, zt: &ZetaTable, s_list: &[f64]) -> Result<Self> {
        let z = z_lambda(zt)?;
        let sz = script_z(g, zt)?;
        let tol = zt.residual.max(1e-13);
        let mut z_s = Vec::new();
        for &s in s_list {
            let value = z_s_lambda(g, zt, s)?;
            z_s.push(ZsEntry {
                s,
                value,
                below_one: strictly_below_one(value, tol),
                script_bound: sz.powf(s - 1.0),
            });
        }
        let z2 = z_s_lambda(g, zt, 2.0)?;
        let (raw, norm) = match conservation_check(g, zt) {
            Conservation::Residual {
                max_residual,
                max_normalized,
            } => (max_residual, max_normalized),
            Conservation::NotApplicable => unreachable!("bulk checked above"),
        };
        Ok(Self {
            lambda: zt.param.lambda,
            z_lambda: z,
            z_s,
            script_z: sz,
            m_lambda: z2.powf(-0.25),
            conservation_residual: norm,
            conservation_raw: raw,
        })
    }
}

/// Check of the cycle contraction `|ζ_{u0}(u1) ⋯ ζ_{um}(u0)| ≤ 1 - z²/4`.
#[derive(Debug, Clone, Serialize)]
pub struct CycleProduct {
    pub value: f64,
    /// `1 - z²/4` when the cycle misses a vertex and `λ` is bulk, else `1`.
    pub bound: f64,
    pub covers_all_vertices: bool,
    pub holds: bool,
}

/// `cycle` lists the distinct vertices `u0..um` of a simple cycle.
pub fn cycle_product(g: &PotentialGraph, zt: &ZetaTable, cycle: &[usize], tol: f64) -> Result<CycleProduct> {
    let m = cycle.len();
    if m < 3 {
        return Err(Error::InvalidPath("a cycle needs at least 3 vertices".into()));
    }
    let mut seen = vec![false; g.vertex_count()];
    let mut prod = Complex::new(1.0, 0.0);
    for i in 0..m {
        let (u, v) = (cycle[i], cycle[(i + 1) % m]);
        if u >= g.vertex_count() || std::mem::replace(&mut seen[u], true) {
            return Err(Error::InvalidPath(format!("vertex {u} repeated or out of range")));
        }
        let b = g
            .edge_id(u, v)
            .ok_or_else(|| Error::InvalidPath(format!("{u} and {v} are not adjacent")))?;
        prod *= zt.values[b];
    }
    let covers = m == g.vertex_count();
    let value = prod.norm();
    let bound = match z_lambda(zt) {
        Ok(z) if !covers => 1.0 - z * z / 4.0,
        _ => 1.0,
    };
    Ok(CycleProduct {
        value,
        bound,
        covers_all_vertices: covers,
        holds: value <= bound + tol,
    })
}

/// Simple cycles of length at most `max_len`, each listed once.
pub fn short_cycles(g: &PotentialGraph, max_len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    let mut on_path = vec![false; g.vertex_count()];
    fn dfs(
        g: &PotentialGraph,
        start: usize,
        max_len: usize,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        out: &mut Vec<Vec<usize>>,
    ) {
        let v = *path.last().unwrap();
        for &w in g.neighbors(v) {
            if w == start && path.len() >= 3 && path[1] < path[path.len() - 1] {
                out.push(path.clone());
            } else if w > start && !on_path[w] && path.len() < max_len {
                on_path[w] = true;
                path.push(w);
                dfs(g, start, max_len, path, on_path, out);
                path.pop();
                on_path[w] = false;
            }
        }
    }
    for s in 0..g.vertex_count() {
        path.clear();
        path.push(s);
        on_path[s] = true;
        dfs(g, s, max_len, &mut path, &mut on_path, &mut out);
        on_path[s] = false;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct PathDecayRow {
    pub r: usize,
    /// `max_{b1} Σ |ζ_{x0}(x1) ⋯ ζ_{x_{r-1}}(x_r)|^{2s}`.
    pub forward: f64,
    /// `z^{-2s} Z_s^r`.
    pub forward_bound: f64,
    /// Same sum with every edge reversed.
    pub reversed: f64,
    /// `z^{-6s} Z_s^r`.
    pub reversed_bound: f64,
    /// `max` over single paths of `|ζ ⋯ ζ|²`.
    pub max_path: f64,
    /// `z^{-2} Z_s^{r/s}`.
    pub max_path_bound: f64,
    /// `max_{b1} |Σ |ζ ⋯ ζ|² |Im ζ(b_{r+1})| / |Im ζ(b1)| - 1|`.
    pub recurpath_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PathDecay {
    pub s: f64,
    pub z_lambda: f64,
    pub z_s: f64,
    pub rows: Vec<PathDecayRow>,
    pub passed: bool,
}

/// Per-start DP over walks `b1, ..., b_{r+1}` from `b1`. Returns, for
/// `r = 0..=r_max`, `Σ Π_{i ≤ r} weight(b_i) · tail(b_{r+1})`.
fn walk_sums(
    g: &PotentialGraph,
    b1: usize,
    r_max: usize,
    weight: impl Fn(usize) -> f64,
    tail: impl Fn(usize) -> f64,
    max_mode: bool,
) -> Vec<f64> {
    let nb = g.directed_edge_count();
    let mut a = vec![0.0; nb];
    a[b1] = 1.0;
    let mut out = Vec::with_capacity(r_max + 1);
    for r in 0..=r_max {
        let v = if max_mode {
            (0..nb).map(|b| a[b] * tail(b)).fold(0.0, f64::max)
        } else {
            (0..nb).map(|b| a[b] * tail(b)).sum()
        };
        out.push(v);
        if r == r_max {
            break;
        }
        let mut next = vec![0.0; nb];
        for b in 0..nb {
            if a[b] == 0.0 {
                continue;
            }
            let w = a[b] * weight(b);
            for e in g.nb_successors(b) {
                if max_mode {
                    next[e] = f64::max(next[e], w);
                } else {
                    next[e] += w;
                }
            }
        }
        a = next;
    }
    out
}

/// Path-sum decay estimates for `r ≤ r_max ≤ ℓ_G`.
pub fn path_decay_profile(g: &PotentialGraph, zt: &ZetaTable, s: f64, r_max: usize, ell_g: usize) -> Result<PathDecay> {
    if !(s >= 1.0) {
        return Err(Error::InvalidParameter(format!("path decay needs s >= 1, got {s}")));
    }
    if r_max > ell_g {
        return Err(Error::RadiusTooLarge {
            requested: r_max,
            available: ell_g,
        });
    }
    let z = z_lambda(zt)?;
    let zs = if s > 1.0 {
        z_s_lambda(g, zt, s)?
    } else {
        1.0
    };
    let nb = g.directed_edge_count();
    let mut rows: Vec<PathDecayRow> = (0..=r_max)
        .map(|r| PathDecayRow {
            r,
            forward: 0.0,
            forward_bound: z.powf(-2.0 * s) * zs.powi(r as i32),
            reversed: 0.0,
            reversed_bound: z.powf(-6.0 * s) * zs.powi(r as i32),
            max_path: 0.0,
            max_path_bound: z.powi(-2) * zs.powf(r as f64 / s),
            recurpath_deviation: 0.0,
        })
        .collect();
    let v = &zt.values;
    for b1 in 0..nb {
        let fwd = walk_sums(g, b1, r_max, |b| v[b].norm().powf(2.0 * s), |_| 1.0, false);
        let rev = walk_sums(g, b1, r_max, |b| v[g.reverse(b)].norm().powf(2.0 * s), |_| 1.0, false);
        let mx = walk_sums(g, b1, r_max, |b| v[b].norm_sqr(), |_| 1.0, true);
        let rec = walk_sums(g, b1, r_max, |b| v[b].norm_sqr(), |b| v[b].im.abs(), false);
        let im1 = v[b1].im.abs();
        for r in 0..=r_max {
            let row = &mut rows[r];
            row.forward = row.forward.max(fwd[r]);
            row.reversed = row.reversed.max(rev[r]);
            row.max_path = row.max_path.max(mx[r]);
            row.recurpath_deviation = row.recurpath_deviation.max((rec[r] / im1 - 1.0).abs());
        }
    }
    let slack = 1e-9;
    let passed = rows.iter().all(|r| {
        r.forward <= r.forward_bound * (1.0 + slack)
            && r.reversed <= r.reversed_bound * (1.0 + slack)
            && r.max_path <= r.max_path_bound * (1.0 + slack)
    });
    Ok(PathDecay {
        s,
        z_lambda: z,
        z_s: zs,
        rows,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, petersen, radii, wheel};
    use crate::green::{boundary_zeta, BoundaryOptions, Classification};

    fn bulk(g: &PotentialGraph, l: f64) -> ZetaTable {
        let b = boundary_zeta(g, l, BoundaryOptions::default());
        assert_eq!(b.classification, Classification::Bulk, "λ = {l}");
        b.table
    }

    #[test]
    fn regular_closed_forms() {
        let g = petersen(&[0.0; 10]).unwrap();
        for (l, z) in [(0.0, 8f64.sqrt() / 4.0), (1.0, 7f64.sqrt() / 4.0)] {
            let t = bulk(&g, l);
            assert!((z_lambda(&t).unwrap() - z).abs() < 1e-12);
            assert!((z_s_lambda(&g, &t, 2.0).unwrap() - 0.5).abs() < 1e-12);
            let p = DelocalizationParams::compute(&g, &t, &DEFAULT_S).unwrap();
            assert!(p.conservation_residual < 1e-12);
            assert!((p.m_lambda - 2f64.powf(0.25)).abs() < 1e-12);
            assert!((p.script_z - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn s_at_most_one_rejected() {
        let g = petersen(&[0.0; 10]).unwrap();
        let t = bulk(&g, 0.0);
        assert!(z_s_lambda(&g, &t, 1.0).is_err());
    }

    #[test]
    fn gap_is_not_bulk() {
        let g = petersen(&[0.0; 10]).unwrap();
        let t = boundary_zeta(&g, 3.5, BoundaryOptions::default()).table;
        assert!(matches!(z_lambda(&t), Err(Error::NotBulk)));
        assert_eq!(conservation_check(&g, &t), Conservation::NotApplicable);
    }

    #[test]
    fn irregular_inequalities() {
        let g = wheel(&[0.4, -0.3, 0.8, -0.9, 0.1]).unwrap();
        let t = bulk(&g, 0.3);
        let sz = script_z(&g, &t).unwrap();
        assert!(sz < 1.0);
        let mut prev = f64::INFINITY;
        for s in [1.001, 1.01, 1.5, 2.0, 3.0] {
            let zs = z_s_lambda(&g, &t, s).unwrap();
            assert!(zs < 1.0);
            assert!(zs <= sz.powf(s - 1.0) * (1.0 + 1e-12));
            assert!(zs <= prev);
            prev = zs;
        }
        assert!(z_s_lambda(&g, &t, 1.001).unwrap() > 0.99);
    }

    #[test]
    fn cycle_products_in_k4() {
        let g = complete(4, &[0.0, 0.5, -0.5, 0.2]).unwrap();
        let t = bulk(&g, 0.1);
        let cycles = short_cycles(&g, 4);
        assert_eq!(cycles.len(), 7);
        for c in &cycles {
            let p = cycle_product(&g, &t, c, 1e-10).unwrap();
            assert!(p.holds);
            let rev: Vec<_> = c.iter().rev().copied().collect();
            let q = cycle_product(&g, &t, &rev, 1e-10).unwrap();
            assert!((p.value - q.value).abs() < 1e-10);
        }
    }

    #[test]
    fn regular_path_decay() {
        let g = petersen(&[0.0; 10]).unwrap();
        let t = bulk(&g, 0.4);
        let ell = radii(&g).ell;
        let d = path_decay_profile(&g, &t, 2.0, ell, ell).unwrap();
        for row in &d.rows {
            assert!((row.forward - 0.5f64.powi(row.r as i32)).abs() < 1e-12);
            assert!(row.recurpath_deviation < 1e-12);
        }
        assert!(d.passed);
        assert!(path_decay_profile(&g, &t, 2.0, ell + 1, ell).is_err());
    }
}
