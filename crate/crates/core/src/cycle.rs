//! Schrödinger operators on `N`-cycles and on their cover `ℤ`.

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::eigen::{clusters, full_spectrum};
use crate::error::{Error, Result};
use crate::graph::{cycle, PotentialGraph};
use crate::green::{
    boundary_zeta, Band, BandStructure, BoundaryOptions, BoundarySolver, Classification, Complex, ConeSystem, GridMeta,
};

/// `(H ψ)(j) = ψ(j + 1) + ψ(j - 1) + W_{j mod m} ψ(j)` on `ℤ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicZOperator {
    pub w: Vec<f64>,
}

impl PeriodicZOperator {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("period must be at least 1".into()));
        }
        if let Some((j, &v)) = w.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidPotential { vertex: j, value: v });
        }
        Ok(Self { w })
    }

    pub fn period(&self) -> usize {
        self.w.len()
    }

    /// `tr Π_{j=m-1..0} [[λ - W_j, -1], [1, 0]]`; `±∞` once the product
    /// leaves the double range, where `|Δ| > 2` anyway.
    pub fn discriminant(&self, lambda: f64) -> f64 {
        let mut a = [[1.0, 0.0], [0.0, 1.0]];
        let mut rescaled = false;
        for &w in &self.w {
            let t = [[lambda - w, -1.0], [1.0, 0.0]];
            a = [
                [t[0][0] * a[0][0] + t[0][1] * a[1][0], t[0][0] * a[0][1] + t[0][1] * a[1][1]],
                [t[1][0] * a[0][0] + t[1][1] * a[1][0], t[1][0] * a[0][1] + t[1][1] * a[1][1]],
            ];
            let big = a.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            if big > 1e150 {
                a.iter_mut().flatten().for_each(|x| *x *= 1e-150);
                rescaled = true;
            }
        }
        let tr = a[0][0] + a[1][1];
        if rescaled && tr != 0.0 {
            tr.signum() * f64::INFINITY
        } else {
            tr
        }
    }

    pub fn in_spectrum(&self, lambda: f64) -> bool {
        self.discriminant(lambda).abs() <= 2.0
    }

    /// Range `[min W - 3, max W + 3]` containing the spectrum.
    pub fn enclosure(&self) -> (f64, f64) {
        let lo = self.w.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo - 3.0, hi + 3.0)
    }

    /// Exact band edges: the `2m` eigenvalues of the period cell with
    /// periodic and antiperiodic closure, ascending.
    pub fn bloch_edges(&self) -> Vec<f64> {
        let m = self.w.len();
        let mut out = Vec::with_capacity(2 * m);
        for s in [1.0, -1.0] {
            if m == 1 {
                out.push(self.w[0] + 2.0 * s);
                continue;
            }
            let mut h = Mat::<f64>::zeros(m, m);
            for j in 0..m {
                h[(j, j)] = self.w[j];
            }
            for j in 0..m - 1 {
                h[(j, j + 1)] += 1.0;
                h[(j + 1, j)] += 1.0;
            }
            h[(0, m - 1)] += s;
            h[(m - 1, 0)] += s;
            let eig = h.self_adjoint_eigen(Side::Lower).expect("symmetric eigensolver");
            let vals = eig.S().column_vector();
            out.extend((0..m).map(|k| vals[k]));
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Bands `[e_1, e_2], [e_3, e_4], ...` from the exact edges.
    pub fn exact_bands(&self) -> Vec<Band> {
        self.bloch_edges()
            .chunks(2)
            .map(|c| Band { lo: c[0], hi: c[1] })
            .collect()
    }

    /// Cone system of `ℤ`: type `j` is `ζ_{j-1}(j)`, type `m + j` is
    /// `ζ_{j+1}(j)`.
    pub fn cone_system(&self) -> ConeSystem {
        ConeSystem::periodic_chain(&self.w)
    }
}

fn bisect(mut a: f64, mut b: f64, steps: usize, pred: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..steps {
        let m = 0.5 * (a + b);
        if pred(m) {
            b = m;
        } else {
            a = m;
        }
    }
    0.5 * (a + b)
}

/// Bands `{|Δ(λ)| ≤ 2}` by a grid scan with bisected endpoints, in the
/// band-report schema.
pub fn monodromy_bands(op: &PeriodicZOperator, step: f64) -> Result<BandStructure> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter("grid step must be positive".into()));
    }
    let (lo, hi) = op.enclosure();
    let points = ((hi - lo) / step).floor() as usize + 1;
    let grid: Vec<f64> = (0..points).map(|k| lo + k as f64 * step).collect();
    let inside: Vec<bool> = grid.iter().map(|&l| op.in_spectrum(l)).collect();
    let mut bands = Vec::new();
    let mut k = 0;
    while k < points {
        if !inside[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < points && inside[k + 1] {
            k += 1;
        }
        let left = if start == 0 {
            grid[0]
        } else {
            bisect(grid[start - 1], grid[start], 50, |l| op.in_spectrum(l))
        };
        let right = if k + 1 == points {
            grid[k]
        } else {
            bisect(grid[k], grid[k + 1], 50, |l| !op.in_spectrum(l))
        };
        bands.push(Band { lo: left, hi: right });
        k += 1;
    }
    let inside_count = inside.iter().filter(|&&x| x).count();
    let endpoints = bands.iter().flat_map(|b| [b.lo, b.hi]).collect();
    Ok(BandStructure {
        bands,
        exceptional: Vec::new(),
        endpoints,
        grid: GridMeta {
            lo,
            hi,
            step,
            points,
            bulk_points: inside_count,
            gap_points: points - inside_count,
            pole_points: 0,
            undetermined_points: 0,
        },
    })
}

/// Smallest `m` with `W_{j+m} = W_j` cyclically; always divides `N`.
pub fn minimal_period(w: &[f64]) -> usize {
    let n = w.len();
    (1..=n)
        .filter(|m| n % m == 0)
        .find(|&m| (0..n).all(|j| w[j] == w[(j + m) % n]))
        .unwrap_or(n)
}

/// `W` of length `n` repeating `pattern`, cut off at `n`.
pub fn tile_potential(pattern: &[f64], n: usize) -> Vec<f64> {
    (0..n).map(|j| pattern[j % pattern.len()]).collect()
}

/// Green data of the `m`-periodic operator at a bulk energy.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicGreen {
    pub lambda: f64,
    /// `ζ_j(j + 1)`.
    pub forward: Vec<Complex>,
    /// `ζ_j(j - 1)`.
    pub backward: Vec<Complex>,
    /// `G(j, j)`.
    pub diag: Vec<Complex>,
    /// `16 max_{j,k} |G(j,j)|² |Im ζ_j(j±1)| / |Im ζ_k(k±1)|`.
    pub c_lambda: f64,
}

/// Solves the `ℤ` cone system at `λ` and assembles `C_{λ,m}`; `None`
/// unless the boundary value is bulk.
pub fn periodic_green(op: &PeriodicZOperator, lambda: f64, opts: BoundaryOptions) -> Option<PeriodicGreen> {
    let m = op.period();
    let solver = BoundarySolver::from_system(op.cone_system(), opts);
    let bz = solver.solve(lambda);
    if bz.classification != Classification::Bulk {
        return None;
    }
    let v = &bz.class_values;
    let forward: Vec<Complex> = (0..m).map(|j| v[(j + 1) % m]).collect();
    let backward: Vec<Complex> = (0..m).map(|j| v[m + (j + m - 1) % m]).collect();
    let diag: Vec<Complex> = (0..m)
        .map(|j| (Complex::new(op.w[j] - lambda, 0.0) + forward[j] + backward[j]).inv())
        .collect();
    let mut c: f64 = 0.0;
    for j in 0..m {
        for k in 0..m {
            let f = forward[j].im.abs() / forward[k].im.abs();
            let b = backward[j].im.abs() / backward[k].im.abs();
            c = c.max(diag[j].norm_sqr() * f.max(b));
        }
    }
    Some(PeriodicGreen {
        lambda,
        forward,
        backward,
        diag,
        c_lambda: 16.0 * c,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleOptions {
    /// Eigenvalues this close to a band edge are skipped.
    pub edge_window: f64,
    pub support_tol: f64,
    pub rotations: usize,
    pub seed: u64,
    pub boundary: BoundaryOptions,
    pub slack: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            edge_window: 1e-4,
            support_tol: 1e-7,
            rotations: 20,
            seed: 0,
            boundary: BoundaryOptions::default(),
            slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CycleClass {
    Gap,
    Bulk,
    Edge,
    Unclassified,
}

#[derive(Debug, Clone, Serialize)]
pub struct CyclePair {
    pub index: usize,
    pub lambda: f64,
    pub class: CycleClass,
    /// `N ‖ψ‖_∞²`.
    pub n_sup2: f64,
    /// `16 δ^{-2}` or `C_{λ,m}`.
    pub bound: Option<f64>,
    pub margin: Option<f64>,
    pub support: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleReport {
    pub n: usize,
    pub period: usize,
    pub bands: Vec<Band>,
    pub pairs: Vec<CyclePair>,
    /// Worst margin over random rotations inside 2-dimensional eigenspaces.
    pub rotation_worst_margin: Option<f64>,
    /// Smallest numerical support over all eigenpairs.
    pub min_support: usize,
    /// Smallest numerical support over the pairs that received a bound.
    pub min_support_checked: Option<usize>,
    pub support_floor: usize,
    pub gap_checked: usize,
    pub bulk_checked: usize,
    pub skipped: usize,
    pub passed: bool,
}

/// Checks `N ‖ψ‖_∞² ≤ 16 δ^{-2}` in gaps and `N ‖ψ‖_∞² ≤ C_{λ,m}` inside
/// bands for every eigenpair of `H` on `C_N`. `period`, when given, must be
/// a period of `W` dividing `N`; otherwise the minimal period is used.
pub fn verify_cycle_theorem(w: &[f64], period: Option<usize>, opts: &CycleOptions) -> Result<CycleReport> {
    let n = w.len();
    let m = match period {
        Some(m) => {
            if m == 0 || n % m != 0 || (0..n).any(|j| w[j] != w[(j + m) % n]) {
                return Err(Error::PeriodMismatch { period: m, n });
            }
            m
        }
        None => minimal_period(w),
    };
    let g = cycle(n, w)?;
    let op = PeriodicZOperator::new(w[..m].to_vec())?;
    let bands = op.exact_bands();
    let edges = op.bloch_edges();
    let pairs = full_spectrum(&g)?;
    let groups = clusters(&pairs);
    let nf = n as f64;

    let bound_for = |lambda: f64| -> (CycleClass, Option<f64>) {
        if edges.iter().any(|e| (e - lambda).abs() <= opts.edge_window) {
            return (CycleClass::Edge, None);
        }
        if bands.iter().any(|b| b.lo < lambda && lambda < b.hi) {
            match periodic_green(&op, lambda, opts.boundary) {
                Some(pg) => (CycleClass::Bulk, Some(pg.c_lambda)),
                None => (CycleClass::Unclassified, None),
            }
        } else {
            let delta = bands
                .iter()
                .map(|b| if lambda < b.lo { b.lo - lambda } else { lambda - b.hi })
                .fold(f64::INFINITY, f64::min);
            (CycleClass::Gap, Some(16.0 / (delta * delta)))
        }
    };
    let per_cluster: Vec<(CycleClass, Option<f64>)> = {
        use rayon::prelude::*;
        groups.par_iter().map(|idx| bound_for(pairs[idx[0]].lambda)).collect()
    };

    let sup2 = |psi: &[f64]| psi.iter().fold(0.0f64, |a, x| a.max(x * x));
    let ok = |margin: f64, bound: f64| margin >= -opts.slack * bound.max(1.0);
    let mut out = Vec::with_capacity(pairs.len());
    for (index, p) in pairs.iter().enumerate() {
        let (class, bound) = per_cluster[p.cluster];
        let n_sup2 = nf * sup2(&p.psi);
        let margin = bound.map(|b| b - n_sup2);
        out.push(CyclePair {
            index,
            lambda: p.lambda,
            class,
            n_sup2,
            bound,
            margin,
            support: p.support(opts.support_tol).len(),
            passed: match (bound, margin) {
                (Some(b), Some(mg)) => ok(mg, b),
                _ => true,
            },
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut rot_worst: Option<f64> = None;
    let mut rot_ok = true;
    for (c, idx) in groups.iter().enumerate() {
        let Some(bound) = per_cluster[c].1 else { continue };
        if idx.len() < 2 {
            continue;
        }
        for _ in 0..opts.rotations {
            let coef: Vec<f64> = idx.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = coef.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut psi = vec![0.0; n];
            for (&k, a) in idx.iter().zip(&coef) {
                for (x, v) in psi.iter_mut().zip(&pairs[k].psi) {
                    *x += a / norm * v;
                }
            }
            let margin = bound - nf * sup2(&psi);
            rot_ok &= ok(margin, bound);
            rot_worst = Some(rot_worst.map_or(margin, |w: f64| w.min(margin)));
        }
    }

    let min_support = out.iter().map(|p| p.support).min().unwrap_or(0);
    // Exponentially small tails of edge states fall under the tolerance, so
    // the floor is only asserted where a bound was checked.
    let min_support_checked = out.iter().filter(|p| p.bound.is_some()).map(|p| p.support).min();
    let support_floor = n.div_ceil(2);
    let count = |c: CycleClass| out.iter().filter(|p| p.class == c && p.bound.is_some()).count();
    let passed = rot_ok
        && out.iter().all(|p| p.passed)
        && min_support_checked.map_or(true, |s| s >= support_floor);
    Ok(CycleReport {
        n,
        period: m,
        bands,
        rotation_worst_margin: rot_worst,
        min_support,
        min_support_checked,
        support_floor,
        gap_checked: count(CycleClass::Gap),
        bulk_checked: count(CycleClass::Bulk),
        skipped: out.iter().filter(|p| p.bound.is_none()).count(),
        pairs: out,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleZetaCheck {
    pub lambda: f64,
    /// `max_j |1/ζ_{j-1}(j) - (λ - W_j - ζ_j(j+1))|`, both orientations.
    pub residual: f64,
    /// `max Im ζ`, negative in the bulk.
    pub max_im: f64,
    pub classification: Classification,
}

/// Boundary `ζ` of `C_N` from the generic solver against the scalar
/// continued-fraction relation on `ℤ`.
pub fn cross_validate_cycle_zeta(g: &PotentialGraph, lambda: f64, opts: BoundaryOptions) -> Result<CycleZetaCheck> {
    if !g.is_cycle_graph() {
        return Err(Error::InvalidParameter("graph is not a cycle".into()));
    }
    let bz = boundary_zeta(g, lambda, opts);
    let zt = &bz.table;
    let mut res: f64 = 0.0;
    for b in 0..g.directed_edge_count() {
        // b = (j-1, j), successor (j, j+1)
        let j = g.terminus(b);
        let next = g.nb_successors(b).next().expect("cycle successor");
        let r = zt.values[b].inv() - (Complex::new(lambda - g.potential(j), 0.0) - zt.values[next]);
        res = res.max(r.norm());
    }
    Ok(CycleZetaCheck {
        lambda,
        residual: res,
        max_im: zt.values.iter().map(|z| z.im).fold(f64::NEG_INFINITY, f64::max),
        classification: bz.classification,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BandAgreement {
    pub points_checked: usize,
    pub points_skipped: usize,
    pub mismatches: Vec<f64>,
}

/// Compares membership in `cover` and `oracle` bands on the cover's grid,
/// skipping points within one grid step of an oracle edge.
pub fn compare_bands(cover: &BandStructure, oracle: &[Band]) -> BandAgreement {
    let h = cover.grid.step;
    let mut checked = 0;
    let mut skipped = 0;
    let mut mismatches = Vec::new();
    for k in 0..cover.grid.points {
        let l = cover.grid.lo + k as f64 * h;
        if oracle.iter().any(|b| (b.lo - l).abs() <= h || (b.hi - l).abs() <= h) {
            skipped += 1;
            continue;
        }
        checked += 1;
        let a = cover.in_band(l).is_some();
        let b = oracle.iter().any(|b| b.lo <= l && l <= b.hi);
        if a != b {
            mismatches.push(l);
        }
    }
    BandAgreement {
        points_checked: checked,
        points_skipped: skipped,
        mismatches,
    }
}
