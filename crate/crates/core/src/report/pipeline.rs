use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::cycle::{compare_bands, monodromy_bands, verify_cycle_theorem, BandAgreement, CycleReport, PeriodicZOperator};
use crate::eigen::{classify_and_report, full_spectrum, kernel_mass, EigenReport, PairReport};
use crate::error::{Error, Result};
use crate::graph::{check_c1, n_lift, radii, C1Report, LiftSource, PotentialGraph};
use crate::green::{
    band_scan, combes_thomas_check, zetainv_residual, BandOptions, BandStructure, BoundarySolver, Classification,
    CtReport,
};
use crate::metrics::{
    cycle_product, path_decay_profile, short_cycles, CycleProduct, DelocalizationParams, PathDecay, Strictness,
};

use super::config::{Command, RunConfig};

pub const REPORT_VERSION: u32 = 1;

/// Tolerances of the hard assertions made outside the eigen and cycle
/// verifiers.
pub const ZETAINV_TOL: f64 = 1e-8;
pub const CONSERVATION_TOL: f64 = 1e-6;
pub const TREE_MASS_TOL: f64 = 1e-8;
pub const CYCLE_PRODUCT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub detail: String,
}

impl Failure {
    fn new(check: impl Into<String>, detail: impl Into<String>) -> Self {
        Self {
            check: check.into(),
            index: None,
            lambda: None,
            detail: detail.into(),
        }
    }

    fn at(mut self, index: Option<usize>, lambda: Option<f64>) -> Self {
        self.index = index;
        self.lambda = lambda;
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub kind: &'static str,
    pub version: u32,
    pub config: RunConfig,
    pub passed: bool,
    pub failures: Vec<Failure>,
    pub result: Value,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// A finished run: the JSON report and, for some commands, a CSV table.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub table: Option<String>,
}

#[derive(Debug)]
pub enum RunError {
    /// Bad input: exit status 2.
    Usage(Error),
    /// The computation itself failed: exit status 1.
    Failed(Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(e) | RunError::Failed(e) => e.fmt(f),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        if e.is_usage() {
            RunError::Usage(e)
        } else {
            RunError::Failed(e)
        }
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

/// Validates `config` and runs its command.
pub fn run(config: &RunConfig) -> std::result::Result<RunOutcome, RunError> {
    config.validate().map_err(RunError::Usage)?;
    let cmd = config.command().map_err(RunError::Usage)?;
    let (result, failures, table) = match cmd {
        Command::Bands => run_bands(config)?,
        Command::Metrics => run_metrics(config)?,
        Command::Verify => run_verify(config)?,
        Command::Cycle => run_cycle(config)?,
        Command::LiftSweep => run_lift_sweep(config)?,
        Command::CtCheck => run_ct(config)?,
    };
    Ok(RunOutcome {
        report: Report {
            kind: cmd.name(),
            version: REPORT_VERSION,
            config: config.clone(),
            passed: failures.is_empty(),
            failures,
            result,
        },
        table,
    })
}

type Parts = (Value, Vec<Failure>, Option<String>);

#[derive(Debug, Clone, Serialize)]
pub struct BandsResult {
    pub vertex_count: usize,
    pub max_degree: usize,
    pub c1: C1Report,
    pub bands: BandStructure,
}

fn run_bands(cfg: &RunConfig) -> Result<Parts> {
    let g = cfg.load_graph()?;
    let bands = band_scan(&g, &cfg.band_options())?;
    let res = BandsResult {
        vertex_count: g.vertex_count(),
        max_degree: g.max_degree(),
        c1: check_c1(&g),
        bands,
    };
    Ok((to_value(&res), Vec::new(), None))
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelRow {
    pub n: usize,
    /// Largest mass over starting edges.
    pub mass: f64,
    pub worst_start: usize,
    pub bound: f64,
    pub tree_like_starts: usize,
    /// `max |mass - 1/n|` over tree-like starts.
    pub tree_like_deviation: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricsResult {
    pub lambda: f64,
    pub ell_g: usize,
    pub rho_g: usize,
    pub params: DelocalizationParams,
    pub zetainv_residual: f64,
    pub path_decay: Vec<PathDecay>,
    pub kernel_mass: Vec<KernelRow>,
    pub cycle_products: Vec<(Vec<usize>, CycleProduct)>,
}

fn kernel_rows(g: &PotentialGraph, zt: &crate::green::ZetaTable, ell: usize, n_max: usize) -> Result<Vec<KernelRow>> {
    (1..=ell.min(n_max))
        .map(|n| {
            let masses = (0..g.directed_edge_count())
                .into_par_iter()
                .map(|b| kernel_mass(g, zt, b, n, ell))
                .collect::<Result<Vec<_>>>()?;
            let worst = masses
                .iter()
                .max_by(|a, b| a.mass.total_cmp(&b.mass))
                .expect("graph has edges");
            let tree: Vec<f64> = masses
                .iter()
                .filter(|m| m.tree_like)
                .map(|m| (m.mass - 1.0 / n as f64).abs())
                .collect();
            Ok(KernelRow {
                n,
                mass: worst.mass,
                worst_start: worst.start,
                bound: worst.bound,
                tree_like_starts: tree.len(),
                tree_like_deviation: (!tree.is_empty()).then(|| tree.iter().copied().fold(0.0, f64::max)),
            })
        })
        .collect()
}

fn run_metrics(cfg: &RunConfig) -> Result<Parts> {
    let g = cfg.load_graph()?;
    let lambda = cfg.lambda[0];
    let rad = radii(&g);
    let bz = BoundarySolver::new(&g, cfg.boundary()).solve(lambda);
    if bz.classification != Classification::Bulk {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} is not in the bulk (classified {:?})",
            bz.classification
        )));
    }
    let zt = &bz.table;
    let params = DelocalizationParams::compute(&g, zt, &cfg.s)?;
    let zetainv = zetainv_residual(&g, zt)?;
    let r_max = rad.ell.min(cfg.n_max);
    let path_decay = if r_max >= 1 {
        cfg.s
            .iter()
            .map(|&s| path_decay_profile(&g, zt, s, r_max, rad.ell))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let kernel = kernel_rows(&g, zt, rad.ell, cfg.n_max)?;
    let max_len = rad.girth.map_or(0, |gi| (gi + 1).min(8));
    let cycle_products = short_cycles(&g, max_len)
        .into_iter()
        .map(|c| cycle_product(&g, zt, &c, CYCLE_PRODUCT_TOL).map(|p| (c, p)))
        .collect::<Result<Vec<_>>>()?;

    let mut failures = Vec::new();
    let at = Some(lambda);
    if zetainv > ZETAINV_TOL {
        failures.push(Failure::new("zetainv", format!("residual {zetainv:e}")).at(None, at));
    }
    if params.conservation_residual > CONSERVATION_TOL {
        failures.push(
            Failure::new("conservation", format!("residual {:e}", params.conservation_residual)).at(None, at),
        );
    }
    for e in params.z_s.iter().filter(|e| e.below_one == Strictness::Violated) {
        failures.push(Failure::new(format!("Z_s:{}", e.s), format!("value {}", e.value)).at(None, at));
    }
    for p in path_decay.iter().filter(|p| !p.passed) {
        failures.push(Failure::new(format!("path_decay:{}", p.s), "path sum above bound").at(None, at));
    }
    for k in &kernel {
        if k.mass > k.bound {
            failures.push(
                Failure::new(format!("kernel_mass:{}", k.n), format!("mass {} > {}", k.mass, k.bound))
                    .at(Some(k.worst_start), at),
            );
        }
        if let Some(d) = k.tree_like_deviation.filter(|&d| d > TREE_MASS_TOL) {
            failures.push(Failure::new(format!("kernel_mass_tree:{}", k.n), format!("deviation {d:e}")).at(None, at));
        }
    }
    for (c, p) in cycle_products.iter().filter(|(_, p)| !p.holds) {
        failures.push(Failure::new("cycle_product", format!("cycle {c:?}: {} > {}", p.value, p.bound)).at(None, at));
    }
    let res = MetricsResult {
        lambda,
        ell_g: rad.ell,
        rho_g: rad.rho,
        params,
        zetainv_residual: zetainv,
        path_decay,
        kernel_mass: kernel,
        cycle_products,
    };
    Ok((to_value(&res), failures, None))
}

fn eigen_failures(rep: &EigenReport, tag: &str) -> Vec<Failure> {
    rep.failures()
        .into_iter()
        .map(|(i, name)| {
            let lambda = rep.pairs.get(i).map(|p| p.lambda);
            Failure::new(name, tag.to_string()).at(Some(i), lambda)
        })
        .collect()
}

fn verify_graph(g: &PotentialGraph, bands: &BandStructure, cfg: &RunConfig) -> Result<EigenReport> {
    let rad = radii(g);
    let pairs = full_spectrum(g)?;
    Ok(classify_and_report(g, &pairs, bands, &rad, &cfg.verify_options()))
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyResult {
    pub bands: BandStructure,
    pub eigen: EigenReport,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:e}"))
}

/// One row per eigenpair: `lambda,class,sup,bound,margin,support,support_bound`.
pub fn summary_csv(rep: &EigenReport) -> String {
    let mut out = String::from("lambda,class,sup,bound,margin,support,support_bound\n");
    for p in &rep.pairs {
        let sup = sup_check(p);
        let support = ["support_bulk", "support_from_sup"].iter().find_map(|n| p.check(n));
        out.push_str(&format!(
            "{:e},{},{:e},{},{},{},{}\n",
            p.lambda,
            p.class.label(),
            p.sup_norm,
            fmt_opt(sup.map(|c| c.bound)),
            fmt_opt(sup.map(|c| c.margin)),
            p.support_size,
            fmt_opt(support.map(|c| c.bound)),
        ));
    }
    out
}

fn sup_check(p: &PairReport) -> Option<&crate::eigen::BoundCheck> {
    p.check("sup_bulk").or_else(|| p.check("sup_gap"))
}

fn run_verify(cfg: &RunConfig) -> Result<Parts> {
    let g = cfg.load_graph()?;
    let bands = band_scan(&g, &cfg.band_options())?;
    let eigen = verify_graph(&g, &bands, cfg)?;
    let failures = eigen_failures(&eigen, "verify");
    let table = summary_csv(&eigen);
    Ok((to_value(&VerifyResult { bands, eigen }), failures, Some(table)))
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleResult {
    pub theorem: CycleReport,
    pub band_agreement: Option<BandAgreement>,
}

fn run_cycle(cfg: &RunConfig) -> Result<Parts> {
    let w = cfg.cycle_potential();
    let theorem = verify_cycle_theorem(&w, cfg.period, &cfg.cycle_options())?;
    let mut failures: Vec<Failure> = theorem
        .pairs
        .iter()
        .filter(|p| !p.passed)
        .map(|p| {
            Failure::new(
                format!("cycle_{:?}", p.class).to_lowercase(),
                format!("N sup^2 = {} above {:?}", p.n_sup2, p.bound),
            )
            .at(Some(p.index), Some(p.lambda))
        })
        .collect();
    if let Some(m) = theorem.rotation_worst_margin.filter(|&m| m < 0.0) {
        failures.push(Failure::new("cycle_rotation", format!("worst margin {m}")));
    }
    if let Some(s) = theorem.min_support_checked.filter(|&s| s < theorem.support_floor) {
        failures.push(Failure::new(
            "cycle_support",
            format!("support {s} below {}", theorem.support_floor),
        ));
    }
    let band_agreement = if cfg.compare_bands {
        let g = crate::graph::cycle(w.len(), &w)?;
        let opts = BandOptions {
            bisection_steps: 0,
            ..cfg.band_options()
        };
        let cover = band_scan(&g, &opts)?;
        let op = PeriodicZOperator::new(w[..theorem.period].to_vec())?;
        let oracle = monodromy_bands(&op, (cfg.grid_step / 10.0).min(1e-3))?;
        let ag = compare_bands(&cover, &oracle.bands);
        for &l in &ag.mismatches {
            failures.push(Failure::new("band_agreement", "cover and monodromy disagree").at(None, Some(l)));
        }
        Some(ag)
    } else {
        None
    };
    Ok((to_value(&CycleResult { theorem, band_agreement }), failures, None))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    /// Seed of the first connected lift at or after the requested seed.
    pub seed: u64,
    pub vertex_count: usize,
    pub ell_g: usize,
    pub rho_g: usize,
    /// Largest sup-norm over bulk eigenpairs.
    pub max_sup: Option<f64>,
    /// Smallest sup bound over bulk eigenpairs.
    pub sup_bound: Option<f64>,
    pub min_support: usize,
    pub bulk: usize,
    pub gap: usize,
    pub violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub base_vertices: usize,
    pub bands: BandStructure,
    pub rows: Vec<SweepRow>,
}

/// Tries seeds `seed, seed + 1, …` until the lift is connected.
pub fn connected_lift(base: &PotentialGraph, n: usize, seed: u64, tries: u64) -> Result<(PotentialGraph, u64)> {
    for k in 0..tries {
        let l = n_lift(base, n, LiftSource::Seed(seed + k))?;
        if l.lift.is_connected() {
            return Ok((l.lift, seed + k));
        }
    }
    Err(Error::Disconnected)
}

fn run_lift_sweep(cfg: &RunConfig) -> Result<Parts> {
    let base = super::config::read_graph(cfg.base.as_ref().expect("validated"))?;
    // a lift has the cover, hence the bands, of its base
    let bands = band_scan(&base, &cfg.band_options())?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &n in &cfg.lift_orders {
        let (g, seed) = connected_lift(&base, n, cfg.seed, 100)?;
        let rep = verify_graph(&g, &bands, cfg)?;
        let bulk: Vec<&PairReport> = rep.pairs.iter().filter(|p| p.class.label() == "bulk").collect();
        let f = eigen_failures(&rep, &format!("lift n = {n}"));
        rows.push(SweepRow {
            n,
            seed,
            vertex_count: g.vertex_count(),
            ell_g: rep.ell_g,
            rho_g: rep.rho_g,
            max_sup: bulk.iter().map(|p| p.sup_norm).reduce(f64::max),
            sup_bound: bulk.iter().filter_map(|p| p.check("sup_bulk")).map(|c| c.bound).reduce(f64::min),
            min_support: rep.pairs.iter().map(|p| p.support_size).min().unwrap_or(0),
            bulk: rep.summary.bulk,
            gap: rep.summary.gap,
            violations: f.len(),
        });
        failures.extend(f);
    }
    let mut table = String::from("n,ell_G,max_sup,sup_bound,min_support\n");
    for r in &rows {
        table.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            r.ell_g,
            fmt_opt(r.max_sup),
            fmt_opt(r.sup_bound),
            r.min_support
        ));
    }
    let res = SweepResult {
        base_vertices: base.vertex_count(),
        bands,
        rows,
    };
    Ok((to_value(&res), failures, Some(table)))
}

/// Up to `count` energies off the spectrum: midpoints of the widest interior
/// gaps, then points outside the outermost bands.
pub fn gap_energies(bands: &BandStructure, count: usize) -> Vec<f64> {
    let b = &bands.bands;
    if b.is_empty() {
        return Vec::new();
    }
    let mut gaps: Vec<(f64, f64)> = b
        .windows(2)
        .map(|w| (w[1].lo - w[0].hi, 0.5 * (w[0].hi + w[1].lo)))
        .filter(|&(width, _)| width > 0.0)
        .collect();
    gaps.sort_by(|x, y| y.0.total_cmp(&x.0));
    let lo = b[0].lo;
    let hi = b[b.len() - 1].hi;
    let mut out: Vec<f64> = gaps.into_iter().map(|(_, m)| m).collect();
    out.extend([hi + 0.5, lo - 0.5, hi + 1.5, lo - 1.5]);
    out.retain(|&l| bands.distance_to_exceptional(l) > 10.0 * bands.grid.step);
    out.truncate(count);
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CtResult {
    pub bands: BandStructure,
    pub checks: Vec<CtReport>,
}

fn run_ct(cfg: &RunConfig) -> Result<Parts> {
    let g = cfg.load_graph()?;
    let bands = band_scan(&g, &cfg.band_options())?;
    let lambdas = if cfg.lambda.is_empty() {
        gap_energies(&bands, 3)
    } else {
        cfg.lambda.clone()
    };
    let solver = BoundarySolver::new(&g, cfg.boundary());
    let mut checks = Vec::new();
    let mut failures = Vec::new();
    for &l in &lambdas {
        let bz = solver.solve(l);
        let delta = bands.distance_to_spectrum(l);
        if bz.classification != Classification::Gap || !(delta > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda = {l} is not a gap energy (classified {:?}, distance {delta})",
                bz.classification
            )));
        }
        let rep = combes_thomas_check(&g, &bz.table, delta, cfg.n_max)?;
        for r in rep.rows.iter().filter(|r| r.margin < 0.0) {
            failures.push(
                Failure::new(format!("combes_thomas:{}", r.n), format!("S_n = {} > {}", r.s_n, r.rhs))
                    .at(Some(r.worst_root), Some(l)),
            );
        }
        checks.push(rep);
    }
    Ok((to_value(&CtResult { bands, checks }), failures, None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::config::GeneratorSpec;

    #[test]
    fn verify_on_localized_example_passes() {
        let cfg = RunConfig {
            command: Some(Command::Verify),
            generator: Some(GeneratorSpec::Localized { m: 3 }),
            grid_step: 0.01,
            ..RunConfig::default()
        };
        let out = run(&cfg).unwrap();
        assert!(out.report.passed, "{:?}", out.report.failures);
        let pairs = out.report.result["eigen"]["pairs"].as_array().unwrap();
        let minus_one = pairs
            .iter()
            .find(|p| (p["lambda"].as_f64().unwrap() + 1.0).abs() < 1e-9)
            .unwrap();
        assert_eq!(minus_one["class"]["kind"], "exceptional_adjacent");
        assert!(out.table.unwrap().starts_with("lambda,class,sup,bound,margin,support,support_bound\n"));
    }

    #[test]
    fn not_bulk_is_a_usage_error() {
        let cfg = RunConfig {
            command: Some(Command::Metrics),
            generator: Some(GeneratorSpec::Petersen { w: vec![] }),
            lambda: vec![3.5],
            ..RunConfig::default()
        };
        assert!(matches!(run(&cfg), Err(RunError::Usage(_))));
    }

    #[test]
    fn gap_energies_avoid_bands() {
        let g = crate::graph::petersen(&[0.0; 10]).unwrap();
        let b = band_scan(&g, &BandOptions { grid_step: 0.02, ..Default::default() }).unwrap();
        let e = gap_energies(&b, 3);
        assert_eq!(e.len(), 3);
        assert!(e.iter().all(|&l| b.distance_to_spectrum(l) > 0.4));
    }
}
