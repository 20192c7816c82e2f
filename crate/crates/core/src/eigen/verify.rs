//! Per-eigenpair classification and the delocalization bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{PotentialGraph, RadiiProfile};
use crate::green::{BandStructure, BoundaryOptions, BoundarySolver, Classification, ZetaTable};
use crate::metrics::{z_lambda, z_s_lambda};

use super::spectrum::{clusters, EigenPair};

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOptions {
    pub p_list: Vec<f64>,
    /// `|ψ(x)| > support_tol ‖ψ‖_∞` counts as support.
    pub support_tol: f64,
    /// Eigenvalues within this distance of `𝔉 ∪ 𝔉′` are not asserted on.
    pub exceptional_window: f64,
    pub rotations: usize,
    pub seed: u64,
    pub boundary: BoundaryOptions,
    /// Relative slack allowed on each inequality.
    pub slack: f64,
}

impl VerifyOptions {
    /// Window `max(10 h, 1e-6)` for a band scan with grid step `h`.
    pub fn for_grid_step(h: f64) -> Self {
        Self {
            exceptional_window: (10.0 * h).max(1e-6),
            ..Self::default()
        }
    }
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            p_list: vec![5.0, 6.0, 8.0],
            support_tol: 1e-7,
            exceptional_window: 0.05,
            rotations: 20,
            seed: 0,
            boundary: BoundaryOptions::default(),
            slack: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PairClass {
    Bulk { band: usize },
    Gap { delta: f64 },
    ExceptionalAdjacent { nearest: f64 },
    Unclassified { reason: String },
}

impl PairClass {
    pub fn label(&self) -> &'static str {
        match self {
            PairClass::Bulk { .. } => "bulk",
            PairClass::Gap { .. } => "gap",
            PairClass::ExceptionalAdjacent { .. } => "exceptional_adjacent",
            PairClass::Unclassified { .. } => "unclassified",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `value ≤ bound`.
    Upper,
    /// `value ≥ bound`.
    Lower,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub direction: Direction,
    pub value: f64,
    pub bound: f64,
    /// `bound - value` for upper bounds, `value - bound` for lower bounds.
    pub margin: f64,
    pub passed: bool,
}

impl BoundCheck {
    fn new(name: impl Into<String>, direction: Direction, value: f64, bound: f64, slack: f64) -> Self {
        let margin = match direction {
            Direction::Upper => bound - value,
            Direction::Lower => value - bound,
        };
        Self {
            name: name.into(),
            direction,
            value,
            bound,
            margin,
            passed: margin >= -slack * bound.abs().max(1.0),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Skipped {
    pub check: String,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairReport {
    pub index: usize,
    pub lambda: f64,
    pub cluster: usize,
    pub class: PairClass,
    pub sup_norm: f64,
    pub p_norms: Vec<(f64, f64)>,
    pub support_size: usize,
    pub checks: Vec<BoundCheck>,
    pub skipped: Vec<Skipped>,
    pub passed: bool,
}

impl PairReport {
    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RotationReport {
    pub cluster: usize,
    pub lambda: f64,
    pub dimension: usize,
    pub samples: usize,
    /// Smallest margin seen per check name.
    pub worst: Vec<(String, f64)>,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub bulk: usize,
    pub gap: usize,
    pub exceptional_adjacent: usize,
    pub unclassified: usize,
    pub checks: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenReport {
    pub vertex_count: usize,
    pub max_degree: usize,
    pub min_degree: usize,
    pub ell_g: usize,
    pub rho_g: usize,
    pub pairs: Vec<PairReport>,
    pub rotations: Vec<RotationReport>,
    pub summary: Summary,
    pub passed: bool,
}

impl EigenReport {
    /// Failed checks as `(pair index, check name)`; rotations use the
    /// cluster's first index.
    pub fn failures(&self) -> Vec<(usize, String)> {
        let mut out: Vec<(usize, String)> = self
            .pairs
            .iter()
            .flat_map(|p| {
                p.checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(move |c| (p.index, c.name.clone()))
            })
            .collect();
        for r in self.rotations.iter().filter(|r| !r.passed) {
            for (name, m) in &r.worst {
                if *m < 0.0 {
                    out.push((r.cluster, format!("rotation:{name}")));
                }
            }
        }
        out
    }
}

/// Biregular degrees `(d1, d2)` with `d1 ≥ d2` for bipartite graphs whose
/// sides have constant degree.
pub fn biregular_degrees(g: &PotentialGraph) -> Option<(usize, usize)> {
    let n = g.vertex_count();
    let mut side = vec![usize::MAX; n];
    side[0] = 0;
    let mut stack = vec![0];
    while let Some(v) = stack.pop() {
        for &w in g.neighbors(v) {
            if side[w] == usize::MAX {
                side[w] = 1 - side[v];
                stack.push(w);
            } else if side[w] == side[v] {
                return None;
            }
        }
    }
    let mut deg = [None::<usize>; 2];
    for v in 0..n {
        let s = side[v];
        match deg[s] {
            None => deg[s] = Some(g.degree(v)),
            Some(d) if d != g.degree(v) => return None,
            _ => {}
        }
    }
    let (a, b) = (deg[0]?, deg[1]?);
    Some((a.max(b), a.min(b)))
}

/// Graph-level quantities shared by all checks.
struct Context<'a> {
    g: &'a PotentialGraph,
    radii: &'a RadiiProfile,
    opts: &'a VerifyOptions,
    d: f64,
    biregular: Option<(usize, usize)>,
}

/// Bulk data at one eigenvalue.
struct BulkData {
    z: f64,
    z_p4: Vec<(f64, f64)>,
    m: f64,
}

fn bulk_data(g: &PotentialGraph, zt: &ZetaTable, p_list: &[f64]) -> Result<BulkData> {
    let z = z_lambda(zt)?;
    let z_p4 = p_list
        .iter()
        .filter(|&&p| p > 4.0)
        .map(|&p| Ok((p, z_s_lambda(g, zt, p / 4.0)?)))
        .collect::<Result<Vec<_>>>()?;
    let m = z_s_lambda(g, zt, 2.0)?.powf(-0.25);
    Ok(BulkData { z, z_p4, m })
}

fn norms(psi: &[f64], p_list: &[f64], tol: f64) -> (f64, Vec<(f64, f64)>, usize, f64) {
    let sup = psi.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
    let pn = p_list
        .iter()
        .map(|&p| (p, psi.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)))
        .collect();
    let cut = tol * sup;
    let (size, mass) = psi
        .iter()
        .filter(|x| x.abs() > cut)
        .fold((0, 0.0), |(n, m), x| (n + 1, m + x * x));
    (sup, pn, size, mass)
}

fn evaluate(
    ctx: &Context,
    psi: &[f64],
    class: &PairClass,
    bulk: Option<&BulkData>,
) -> (Vec<BoundCheck>, Vec<Skipped>) {
    let o = ctx.opts;
    let g = ctx.g;
    let d = ctx.d;
    let ell = ctx.radii.ell;
    let lf = ell as f64;
    let (sup, pn, support, eps) = norms(psi, &o.p_list, o.support_tol);
    let mut checks = Vec::new();
    let mut skipped = Vec::new();
    let mut skip = |c: &str, r: &str| {
        skipped.push(Skipped {
            check: c.into(),
            reason: r.into(),
        })
    };
    if g.min_degree() < 2 {
        skip("all", "minimal degree below 2");
        return (checks, skipped);
    }
    match class {
        PairClass::Bulk { .. } => {
            let b = bulk.expect("bulk data");
            if ell == 0 {
                skip("sup_bulk", "ell_G = 0");
            } else {
                let rhs = 8.0 * d * b.z.powi(-4) / lf.sqrt();
                checks.push(BoundCheck::new("sup_bulk", Direction::Upper, sup, rhs, o.slack));
                for &(p, v) in &pn {
                    if p > 2.0 {
                        checks.push(BoundCheck::new(
                            format!("p_norm_from_sup:{p}"),
                            Direction::Upper,
                            v,
                            rhs.powf((p - 2.0) / p),
                            o.slack,
                        ));
                    }
                }
                checks.push(BoundCheck::new(
                    "support_from_sup",
                    Direction::Lower,
                    support as f64,
                    lf * b.z.powi(8) * eps / (64.0 * d * d),
                    o.slack,
                ));
            }
            // per-vertex version with the local horizon
            let mut worst: Option<BoundCheck> = None;
            for x in 0..psi.len() {
                let lx = ctx.radii.ell_local[x];
                if lx == 0 {
                    continue;
                }
                let c = BoundCheck::new(
                    "local_sup_bulk",
                    Direction::Upper,
                    psi[x].abs(),
                    8.0 * d * b.z.powi(-4) / (lx as f64).sqrt(),
                    o.slack,
                );
                if worst.as_ref().map_or(true, |w| c.margin < w.margin) {
                    worst = Some(c);
                }
            }
            match worst {
                Some(c) => checks.push(c),
                None => skip("local_sup_bulk", "ell_G(x) = 0 everywhere"),
            }
            if g.min_degree() < 3 {
                skip("p_norm_bulk", "minimal degree below 3");
                skip("support_bulk", "minimal degree below 3");
            } else if ell == 0 {
                skip("p_norm_bulk", "ell_G = 0");
                skip("support_bulk", "ell_G = 0");
            } else {
                for &(p, zs) in &b.z_p4 {
                    let v = pn.iter().find(|e| e.0 == p).map(|e| e.1).unwrap();
                    let rhs = 8.0 * d * b.z.powi(-5) / ((1.0 - zs.powf(2.0 / p)) * lf.sqrt());
                    checks.push(BoundCheck::new(format!("p_norm_bulk:{p}"), Direction::Upper, v, rhs, o.slack));
                }
                checks.push(BoundCheck::new(
                    "support_bulk",
                    Direction::Lower,
                    support as f64,
                    b.m.powf(lf) / (4.0 * d),
                    o.slack,
                ));
                if let Some((d1, d2)) = ctx.biregular {
                    if g.potentials().iter().all(|&w| w == 0.0) {
                        let base = ((d1 - 1) * (d2 - 1)) as f64;
                        checks.push(BoundCheck::new(
                            "support_biregular",
                            Direction::Lower,
                            support as f64,
                            base.powf(lf / 4.0) / (4.0 * d1 as f64),
                            o.slack,
                        ));
                    }
                }
            }
        }
        PairClass::Gap { delta } => {
            let delta = *delta;
            let decay = (1.0 + delta / (2.0 * d)).powf(-lf);
            let rhs = 8.0 * d / delta * decay;
            checks.push(BoundCheck::new("sup_gap", Direction::Upper, sup, rhs, o.slack));
            for &(p, v) in &pn {
                if p > 2.0 {
                    checks.push(BoundCheck::new(
                        format!("p_norm_from_sup:{p}"),
                        Direction::Upper,
                        v,
                        rhs.powf((p - 2.0) / p),
                        o.slack,
                    ));
                }
            }
            checks.push(BoundCheck::new(
                "support_from_sup",
                Direction::Lower,
                support as f64,
                delta * delta / (64.0 * d * d) * decay.powi(-2) * eps,
                o.slack,
            ));
        }
        PairClass::ExceptionalAdjacent { .. } => skip("all", "eigenvalue near an exceptional energy"),
        PairClass::Unclassified { reason } => skip("all", reason),
    }
    (checks, skipped)
}

/// Classifies every eigenpair against the cover's band structure and checks
/// the delocalization bounds that apply.
pub fn classify_and_report(
    g: &PotentialGraph,
    pairs: &[EigenPair],
    bands: &BandStructure,
    radii: &RadiiProfile,
    opts: &VerifyOptions,
) -> EigenReport {
    let ctx = Context {
        g,
        radii,
        opts,
        d: g.max_degree() as f64,
        biregular: biregular_degrees(g),
    };
    let solver = BoundarySolver::new(g, opts.boundary);
    let groups = clusters(pairs);

    // One classification and one boundary solve per cluster.
    let per_cluster: Vec<(PairClass, Option<BulkData>)> = groups
        .par_iter()
        .map(|idx| {
            let lambda = pairs[idx[0]].lambda;
            let near = bands.distance_to_exceptional(lambda);
            if near <= opts.exceptional_window {
                let nearest = bands
                    .exceptional
                    .iter()
                    .chain(&bands.endpoints)
                    .copied()
                    .min_by(|a, b| (a - lambda).abs().total_cmp(&(b - lambda).abs()))
                    .unwrap();
                return (PairClass::ExceptionalAdjacent { nearest }, None);
            }
            match bands.in_band(lambda) {
                Some(band) => {
                    let bz = solver.solve(lambda);
                    if bz.classification != Classification::Bulk {
                        let reason = format!("boundary solve returned {:?} inside a band", bz.classification);
                        return (PairClass::Unclassified { reason }, None);
                    }
                    match bulk_data(g, &bz.table, &opts.p_list) {
                        Ok(b) => (PairClass::Bulk { band }, Some(b)),
                        Err(e) => (PairClass::Unclassified { reason: e.to_string() }, None),
                    }
                }
                None => (
                    PairClass::Gap {
                        delta: bands.distance_to_spectrum(lambda),
                    },
                    None,
                ),
            }
        })
        .collect();

    let reports: Vec<PairReport> = pairs
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let (class, bulk) = &per_cluster[p.cluster];
            let (checks, skipped) = evaluate(&ctx, &p.psi, class, bulk.as_ref());
            let (sup, p_norms, support_size, _) = norms(&p.psi, &opts.p_list, opts.support_tol);
            PairReport {
                index,
                lambda: p.lambda,
                cluster: p.cluster,
                class: class.clone(),
                sup_norm: sup,
                p_norms,
                support_size,
                passed: checks.iter().all(|c| c.passed),
                checks,
                skipped,
            }
        })
        .collect();

    let rotations: Vec<RotationReport> = groups
        .par_iter()
        .enumerate()
        .filter(|(c, idx)| {
            idx.len() > 1 && matches!(per_cluster[*c].0, PairClass::Bulk { .. } | PairClass::Gap { .. })
        })
        .map(|(c, idx)| {
            let (class, bulk) = &per_cluster[c];
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (c as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let n = g.vertex_count();
            let mut worst: Vec<(String, f64)> = Vec::new();
            for _ in 0..opts.rotations {
                let coef: Vec<f64> = idx.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
                let norm = coef.iter().map(|x| x * x).sum::<f64>().sqrt();
                let mut psi = vec![0.0; n];
                for (&k, a) in idx.iter().zip(&coef) {
                    for (x, v) in psi.iter_mut().zip(&pairs[k].psi) {
                        *x += a / norm * v;
                    }
                }
                let (checks, _) = evaluate(&ctx, &psi, class, bulk.as_ref());
                for ch in checks {
                    match worst.iter_mut().find(|w| w.0 == ch.name) {
                        Some(w) => w.1 = w.1.min(ch.margin),
                        None => worst.push((ch.name, ch.margin)),
                    }
                }
            }
            let passed = worst.iter().all(|(name, m)| {
                let bound = reports[idx[0]].check(name).map_or(1.0, |c| c.bound.abs().max(1.0));
                *m >= -opts.slack * bound
            });
            RotationReport {
                cluster: c,
                lambda: pairs[idx[0]].lambda,
                dimension: idx.len(),
                samples: opts.rotations,
                worst,
                passed,
            }
        })
        .collect();

    let mut summary = Summary::default();
    for r in &reports {
        match r.class {
            PairClass::Bulk { .. } => summary.bulk += 1,
            PairClass::Gap { .. } => summary.gap += 1,
            PairClass::ExceptionalAdjacent { .. } => summary.exceptional_adjacent += 1,
            PairClass::Unclassified { .. } => summary.unclassified += 1,
        }
        summary.checks += r.checks.len();
        summary.violations += r.checks.iter().filter(|c| !c.passed).count();
    }
    summary.violations += rotations.iter().filter(|r| !r.passed).count();
    let passed = summary.violations == 0;
    EigenReport {
        vertex_count: g.vertex_count(),
        max_degree: g.max_degree(),
        min_degree: g.min_degree(),
        ell_g: radii.ell,
        rho_g: radii.rho,
        pairs: reports,
        rotations,
        summary,
        passed,
    }
}
