//! Non-backtracking lifts of eigenfunctions, the path representations of
//! `ψ`, and the averaged kernel mass.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{PotentialGraph, RadiiProfile};
use crate::green::{green_diag, Complex, ZetaTable};
use crate::metrics::z_lambda;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NbKind {
    F,
    G,
}

#[derive(Debug, Clone, Serialize)]
pub struct NbFunction {
    pub kind: NbKind,
    pub values: Vec<Complex>,
}

impl NbFunction {
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NbLift {
    pub f: NbFunction,
    pub g: NbFunction,
    /// `max_b |(B f)(b) - f(b) / ζ(b)|`.
    pub f_identity_residual: f64,
    /// `max_b |(B g)(b) - g(b) / conj ζ(b)|`.
    pub g_identity_residual: f64,
    /// `max_b |ψ(o(b)) - (f - g)(b) / (2i |Im ζ(b)|)|`.
    pub psidif_residual: f64,
    pub f_norm: f64,
    /// `√D (1 + z^{-1})`.
    pub f_norm_bound: f64,
}

fn apply_b(g: &PotentialGraph, f: &[Complex]) -> Vec<Complex> {
    (0..g.directed_edge_count())
        .map(|b| g.nb_successors(b).map(|e| f[e]).sum())
        .collect()
}

/// `f(x0, x1) = ψ(x1) - ζ_{x0}(x1) ψ(x0)` and its conjugate partner `g`.
pub fn nb_lift(g: &PotentialGraph, psi: &[f64], zt: &ZetaTable) -> Result<NbLift> {
    let z = z_lambda(zt)?;
    let nb = g.directed_edge_count();
    let make = |conj: bool| -> Vec<Complex> {
        (0..nb)
            .map(|b| {
                let zb = if conj { zt.values[b].conj() } else { zt.values[b] };
                Complex::new(psi[g.terminus(b)], 0.0) - zb * psi[g.origin(b)]
            })
            .collect()
    };
    let f = make(false);
    let gv = make(true);
    let bf = apply_b(g, &f);
    let bg = apply_b(g, &gv);
    let mut fr: f64 = 0.0;
    let mut gr: f64 = 0.0;
    let mut pr: f64 = 0.0;
    for b in 0..nb {
        let zb = zt.values[b];
        fr = fr.max((bf[b] - f[b] / zb).norm());
        gr = gr.max((bg[b] - gv[b] / zb.conj()).norm());
        let rec = (f[b] - gv[b]) / Complex::new(0.0, 2.0 * zb.im.abs());
        pr = pr.max((rec - psi[g.origin(b)]).norm());
    }
    let f = NbFunction {
        kind: NbKind::F,
        values: f,
    };
    let f_norm = f.norm();
    Ok(NbLift {
        f,
        g: NbFunction {
            kind: NbKind::G,
            values: gv,
        },
        f_identity_residual: fr,
        g_identity_residual: gr,
        psidif_residual: pr,
        f_norm,
        f_norm_bound: (g.max_degree() as f64).sqrt() * (1.0 + 1.0 / z),
    })
}

/// Propagates amplitudes `a ↦ Σ a(b) ζ(b)` along non-backtracking steps.
fn step(g: &PotentialGraph, zt: &ZetaTable, a: &[Complex]) -> Vec<Complex> {
    let mut next = vec![Complex::new(0.0, 0.0); a.len()];
    for b in 0..a.len() {
        if a[b] == Complex::new(0.0, 0.0) {
            continue;
        }
        let w = a[b] * zt.values[b];
        for e in g.nb_successors(b) {
            next[e] += w;
        }
    }
    next
}

fn propagate(g: &PotentialGraph, zt: &ZetaTable, mut a: Vec<Complex>, steps: usize) -> Vec<Complex> {
    for _ in 0..steps {
        a = step(g, zt, &a);
    }
    a
}

#[derive(Debug, Clone, Serialize)]
pub struct RepresentationReport {
    pub r: usize,
    pub k: usize,
    pub tested_vertices: usize,
    /// Max over `x0` and `x1 ∼ x0` of the first representation's error.
    pub outgoing_deviation: f64,
    /// Same for the bulk representation; `None` off the bulk.
    pub bulk_deviation: Option<f64>,
}

/// Evaluates both path representations of `ψ(x0)` for every vertex with
/// `ℓ_G(x0) ≥ max(r, k)` and every neighbour `x1`.
pub fn representation_check(
    g: &PotentialGraph,
    psi: &[f64],
    zt: &ZetaTable,
    radii: &RadiiProfile,
    r: usize,
    k: usize,
) -> Result<RepresentationReport> {
    if r == 0 || k == 0 {
        return Err(Error::InvalidParameter("r and k must be at least 1".into()));
    }
    let need = r.max(k);
    let xs: Vec<usize> = (0..g.vertex_count())
        .filter(|&x| radii.ell_local[x] >= need)
        .collect();
    if xs.is_empty() {
        return Err(Error::RadiusTooLarge {
            requested: need,
            available: radii.ell_local.iter().copied().max().unwrap_or(0),
        });
    }
    let bulk = z_lambda(zt).is_ok();
    let nb = g.directed_edge_count();
    let zero = Complex::new(0.0, 0.0);
    let mut out_dev: f64 = 0.0;
    let mut bulk_dev: f64 = 0.0;
    for &x0 in &xs {
        let g00 = green_diag(g, zt, x0)?;
        for b1 in g.out_edges(x0) {
            // walks b1 .. b_{r+1} carrying ζ(b1) ⋯ ζ(b_r)
            let mut a = vec![zero; nb];
            a[b1] = Complex::new(1.0, 0.0);
            let a = propagate(g, zt, a, r);
            let mut c = vec![zero; nb];
            for e in g.out_edges(x0) {
                if e != b1 {
                    c[e] = Complex::new(1.0, 0.0);
                }
            }
            let c = propagate(g, zt, c, k - 1);
            let term = |amp: &[Complex]| -> Complex {
                (0..nb)
                    .filter(|&b| amp[b] != zero)
                    .map(|b| amp[b] * g00 * (zt.values[b] * psi[g.origin(b)] - psi[g.terminus(b)]))
                    .sum()
            };
            let rhs = term(&a) + term(&c);
            out_dev = out_dev.max((rhs - psi[x0]).norm());
            if bulk {
                let s: f64 = (0..nb)
                    .filter(|&b| a[b] != zero)
                    .map(|b| a[b].im * psi[g.terminus(b)] - (a[b] * zt.values[b]).im * psi[g.origin(b)])
                    .sum();
                bulk_dev = bulk_dev.max((s / zt.values[b1].im.abs() - psi[x0]).abs());
            }
        }
    }
    Ok(RepresentationReport {
        r,
        k,
        tested_vertices: xs.len(),
        outgoing_deviation: out_dev,
        bulk_deviation: bulk.then_some(bulk_dev),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelMass {
    pub start: usize,
    pub n: usize,
    pub mass: f64,
    /// `32 z^{-4} / n`.
    pub bound: f64,
    /// Every edge is reached by at most one walk of length `1..=n`, so the
    /// mass must equal `1/n`.
    pub tree_like: bool,
}

/// `Σ_{b'} |M_n(b1, b')|²` for the averaged kernel
/// `M_n = (1/n) Σ_{r=1}^n |Im ζ|^{-1/2} (ζB)^r |Im ζ|^{1/2}`.
pub fn kernel_mass(g: &PotentialGraph, zt: &ZetaTable, b1: usize, n: usize, ell_g: usize) -> Result<KernelMass> {
    if n == 0 {
        return Err(Error::InvalidParameter("kernel mass needs n >= 1".into()));
    }
    if n > ell_g {
        return Err(Error::RadiusTooLarge {
            requested: n,
            available: ell_g,
        });
    }
    let z = z_lambda(zt)?;
    let nb = g.directed_edge_count();
    let zero = Complex::new(0.0, 0.0);
    let mut a = vec![zero; nb];
    a[b1] = Complex::new(1.0, 0.0);
    let mut count = vec![0.0f64; nb];
    count[b1] = 1.0;
    let mut total = vec![zero; nb];
    let mut walks = vec![0.0f64; nb];
    for _ in 0..n {
        a = step(g, zt, &a);
        let mut next = vec![0.0; nb];
        for b in 0..nb {
            if count[b] > 0.0 {
                for e in g.nb_successors(b) {
                    next[e] += count[b];
                }
            }
        }
        count = next;
        for b in 0..nb {
            total[b] += a[b];
            walks[b] += count[b];
        }
    }
    let im1 = zt.values[b1].im.abs();
    let nf = n as f64;
    let mass = (0..nb)
        .map(|b| total[b].norm_sqr() * zt.values[b].im.abs() / im1)
        .sum::<f64>()
        / (nf * nf);
    Ok(KernelMass {
        start: b1,
        n,
        mass,
        bound: 32.0 * z.powi(-4) / nf,
        tree_like: walks.iter().all(|&w| w <= 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::full_spectrum;
    use crate::graph::{complete, cycle, n_lift, radii, LiftSource};
    use crate::green::{boundary_zeta, BoundaryOptions, Classification};

    fn k4_lift() -> PotentialGraph {
        let base = complete(4, &[0.0, 0.3, -0.4, 0.2]).unwrap();
        n_lift(&base, 12, LiftSource::Seed(3)).unwrap().lift
    }

    #[test]
    fn zero_function_lifts_to_zero() {
        let g = k4_lift();
        let zt = boundary_zeta(&g, 0.5, BoundaryOptions::default()).table;
        let l = nb_lift(&g, &vec![0.0; g.vertex_count()], &zt).unwrap();
        assert_eq!(l.f_norm, 0.0);
    }

    #[test]
    fn cycle_fourier_pair() {
        let g = cycle(8, &[0.0; 8]).unwrap();
        let l = std::f64::consts::SQRT_2;
        let b = boundary_zeta(&g, l, BoundaryOptions::default());
        assert_eq!(b.classification, Classification::Bulk);
        let psi: Vec<f64> = (0..8)
            .map(|j| (std::f64::consts::PI * j as f64 / 4.0).cos() / 2.0)
            .collect();
        let lift = nb_lift(&g, &psi, &b.table).unwrap();
        assert!(lift.f_identity_residual < 1e-10);
        assert!(lift.g_identity_residual < 1e-10);
        assert!(lift.psidif_residual < 1e-12);
        assert!(lift.f_norm <= lift.f_norm_bound);
    }

    #[test]
    fn representations_on_a_lift() {
        let g = k4_lift();
        let rad = radii(&g);
        assert!(rad.ell >= 1);
        let pairs = full_spectrum(&g).unwrap();
        let mut bulk_seen = 0;
        for p in pairs.iter().step_by(5) {
            let b = boundary_zeta(&g, p.lambda, BoundaryOptions::default());
            if !matches!(b.classification, Classification::Bulk | Classification::Gap) {
                continue;
            }
            for (r, k) in [(1, 1), (1, 2), (2, 1)] {
                if r.max(k) > rad.ell_local.iter().copied().max().unwrap() {
                    continue;
                }
                let rep = representation_check(&g, &p.psi, &b.table, &rad, r, k).unwrap();
                assert!(rep.outgoing_deviation < 1e-8, "{rep:?}");
                if let Some(d) = rep.bulk_deviation {
                    bulk_seen += 1;
                    assert!(d < 1e-8, "{rep:?}");
                }
            }
            if b.classification == Classification::Bulk {
                let l = nb_lift(&g, &p.psi, &b.table).unwrap();
                assert!(l.f_identity_residual < 1e-8);
                assert!(l.f_norm <= l.f_norm_bound);
            }
        }
        assert!(bulk_seen > 0);
    }

    #[test]
    fn kernel_mass_tree_case_and_n1() {
        let g = k4_lift();
        let rad = radii(&g);
        let zt = boundary_zeta(&g, 0.2, BoundaryOptions::default()).table;
        for b in 0..g.directed_edge_count() {
            let k = kernel_mass(&g, &zt, b, 1, rad.ell.max(1)).unwrap();
            assert!((k.mass - 1.0).abs() < 1e-10);
            assert!(k.tree_like);
            for n in 1..=rad.ell {
                let k = kernel_mass(&g, &zt, b, n, rad.ell).unwrap();
                assert!(k.mass <= k.bound);
                if k.tree_like {
                    assert!((k.mass - 1.0 / n as f64).abs() < 1e-10);
                }
            }
        }
        assert!(kernel_mass(&g, &zt, 0, rad.ell + 1, rad.ell).is_err());
    }
}
