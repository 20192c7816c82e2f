//! Acceptance suite. Each test prints one `criterion N [PASS|FAIL]` line.

mod common;

use std::sync::OnceLock;
use std::time::Instant;

use covertree::cycle::{compare_bands, monodromy_bands, tile_potential, verify_cycle_theorem, CycleOptions, PeriodicZOperator};
use covertree::eigen::{
    classify_and_report, full_spectrum, kernel_mass, nb_lift, representation_check, EigenPair, EigenReport,
    VerifyOptions,
};
use covertree::graph::{
    complete, cycle, localized_eigenvector, localized_example, petersen, radii, wheel, PotentialGraph, RadiiProfile,
};
use covertree::green::{
    band_scan, combes_thomas_check, zetainv_residual, BandOptions, BandStructure, BoundaryOptions, BoundarySolver,
    Classification,
};
use covertree::metrics::{
    conservation_check, cycle_product, short_cycles, z_lambda, z_s_lambda, Conservation, DEFAULT_S,
};
use covertree::report::{connected_lift, gap_energies};

use common::{bulk_energies, criterion, random_potential, subdivide};

const GRID: f64 = 0.01;

fn scan(g: &PotentialGraph) -> BandStructure {
    band_scan(
        g,
        &BandOptions {
            grid_step: GRID,
            ..Default::default()
        },
    )
    .unwrap()
}

struct Instance {
    name: String,
    base: usize,
    g: PotentialGraph,
    radii: RadiiProfile,
    pairs: Vec<EigenPair>,
    report: EigenReport,
}

struct Ensemble {
    bases: Vec<(PotentialGraph, BandStructure)>,
    instances: Vec<Instance>,
    seconds: f64,
}

/// 20 seeded lifts (orders 3..=50) of K4 and of the wheel with random
/// `W ∈ [-1, 1]`, plus free K4 lifts and the Petersen graph.
fn ensemble() -> &'static Ensemble {
    static CELL: OnceLock<Ensemble> = OnceLock::new();
    CELL.get_or_init(|| {
        let t = Instant::now();
        let mut bases = Vec::new();
        let mut plan: Vec<(String, usize, usize, u64)> = Vec::new();
        for i in 0..20u64 {
            let n = 3 + (47 * i as usize) / 19;
            let k4 = complete(4, &random_potential(4, 1000 + i)).unwrap();
            bases.push((k4.clone(), scan(&k4)));
            plan.push((format!("K4 W~U seed {i} N={n}"), bases.len() - 1, n, i));
            let wh = wheel(&random_potential(5, 2000 + i)).unwrap();
            bases.push((wh.clone(), scan(&wh)));
            plan.push((format!("wheel W~U seed {i} N={n}"), bases.len() - 1, n, i));
        }
        let free = complete(4, &[0.0; 4]).unwrap();
        bases.push((free.clone(), scan(&free)));
        for (i, n) in [4usize, 10, 25, 40, 60].into_iter().enumerate() {
            plan.push((format!("K4 free N={n}"), bases.len() - 1, n, 300 + i as u64));
        }
        let pet = petersen(&[0.0; 10]).unwrap();
        bases.push((pet.clone(), scan(&pet)));
        plan.push(("Petersen".into(), bases.len() - 1, 1, 0));

        let instances = plan
            .into_iter()
            .map(|(name, b, n, seed)| {
                let (g, _) = connected_lift(&bases[b].0, n, seed, 100).unwrap();
                let rad = radii(&g);
                let pairs = full_spectrum(&g).unwrap();
                let report = classify_and_report(&g, &pairs, &bases[b].1, &rad, &VerifyOptions::for_grid_step(GRID));
                Instance {
                    name,
                    base: b,
                    g,
                    radii: rad,
                    pairs,
                    report,
                }
            })
            .collect();
        Ensemble {
            bases,
            instances,
            seconds: t.elapsed().as_secs_f64(),
        }
    })
}

/// `(checks, violations)` over checks whose name starts with `prefix`.
fn tally(ens: &Ensemble, prefix: &str, filter: impl Fn(&Instance) -> bool) -> (usize, Vec<String>) {
    let mut n = 0;
    let mut bad = Vec::new();
    for inst in ens.instances.iter().filter(|i| filter(i)) {
        for p in &inst.report.pairs {
            for c in p.checks.iter().filter(|c| c.name.starts_with(prefix)) {
                n += 1;
                if !c.passed {
                    bad.push(format!("{} λ={:.6} {}: {} vs {}", inst.name, p.lambda, c.name, c.value, c.bound));
                }
            }
        }
        for r in &inst.report.rotations {
            for (name, m) in r.worst.iter().filter(|(name, _)| name.starts_with(prefix)) {
                if *m < 0.0 {
                    bad.push(format!("{} rotation λ={:.6} {name}: margin {m}", inst.name, r.lambda));
                }
            }
        }
    }
    (n, bad)
}

#[test]
fn c01_regular_tree_oracle() {
    let t = Instant::now();
    let mut worst_zeta: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut worst_zs: f64 = 0.0;
    for (q, g) in [(2.0, petersen(&[0.0; 10]).unwrap()), (3.0, complete(5, &[0.0; 5]).unwrap())] {
        let solver = BoundarySolver::new(&g, BoundaryOptions::default());
        let edge = 2.0 * f64::sqrt(q);
        let (lo, hi) = (-edge + 0.1, edge - 0.1);
        for k in 0..100 {
            let l = lo + (hi - lo) * k as f64 / 99.0;
            let bz = solver.solve(l);
            assert_eq!(bz.classification, Classification::Bulk, "q={q} λ={l}");
            let root = f64::sqrt(4.0 * q - l * l);
            for z in &bz.table.values {
                worst_zeta = worst_zeta.max((z.re - l / (2.0 * q)).abs().max((z.im + root / (2.0 * q)).abs()));
            }
            worst_z = worst_z.max((z_lambda(&bz.table).unwrap() - root / (2.0 * q)).abs());
            for s in DEFAULT_S {
                let zs = z_s_lambda(&g, &bz.table, s).unwrap();
                worst_zs = worst_zs.max((zs - q.powf(1.0 - s)).abs());
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = worst_zeta <= 1e-10 && worst_z <= 1e-9 && worst_zs <= 1e-9 && secs < 10.0;
    criterion(
        1,
        "regular-tree oracle",
        pass,
        &format!("max|Δζ|={worst_zeta:.2e} max|Δz|={worst_z:.2e} max|ΔZ_s|={worst_zs:.2e} in {secs:.2}s"),
    );
    assert!(pass);
}

#[test]
fn c02_current_conservation() {
    let ens = ensemble();
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let mut missing = Vec::new();
    for inst in ens.instances.iter().take(40) {
        let bands = &ens.bases[inst.base].1;
        let solver = BoundarySolver::new(&inst.g, BoundaryOptions::default());
        let mut here = 0;
        for l in bulk_energies(bands, 8, 0.05) {
            if here == 5 {
                break;
            }
            let bz = solver.solve(l);
            if bz.classification != Classification::Bulk {
                continue;
            }
            match conservation_check(&inst.g, &bz.table) {
                Conservation::Residual { max_normalized, .. } => worst = worst.max(max_normalized),
                Conservation::NotApplicable => panic!("bulk table rejected"),
            }
            here += 1;
        }
        if here < 5 {
            missing.push(inst.name.clone());
        }
        points += here;
    }
    let pass = worst <= 1e-6 && missing.is_empty();
    criterion(
        2,
        "current conservation",
        pass,
        &format!("{points} bulk energies on 40 lifts, max residual {worst:.2e}, short instances {missing:?}"),
    );
    assert!(pass);
}

#[test]
fn c03_bulk_sup_norm() {
    let ens = ensemble();
    let (n, bad) = tally(ens, "sup_bulk", |_| true);
    let (nl, bad_local) = tally(ens, "local_sup_bulk", |_| true);
    let max_v = ens.instances.iter().map(|i| i.g.vertex_count()).max().unwrap();
    let pass = bad.is_empty() && bad_local.is_empty() && n > 0 && ens.seconds < 300.0 && max_v <= 1000;
    criterion(
        3,
        "bulk sup-norm bound",
        pass,
        &format!(
            "{n} global and {nl} local checks, {} violations, ensemble built in {:.1}s (|V| ≤ {max_v})",
            bad.len() + bad_local.len(),
            ens.seconds
        ),
    );
    assert!(pass, "{bad:?} {bad_local:?}");
}

#[test]
fn c04_gap_sup_norm() {
    let ens = ensemble();
    let (n, bad) = tally(ens, "sup_gap", |_| true);
    let perron = ens
        .instances
        .iter()
        .filter(|i| i.name.starts_with("K4 free") || i.name == "Petersen")
        .filter(|i| {
            i.report
                .pairs
                .iter()
                .any(|p| (p.lambda - 3.0).abs() < 1e-9 && p.check("sup_gap").is_some_and(|c| c.passed))
        })
        .count();
    let pass = bad.is_empty() && n > 0 && perron == 6;
    criterion(
        4,
        "gap sup-norm bound",
        pass,
        &format!("{n} checks, {} violations, Perron pairs checked on {perron}/6 regular instances", bad.len()),
    );
    assert!(pass, "{bad:?}");
}

#[test]
fn c05_p_norm_and_support() {
    let ens = ensemble();
    let eligible = |i: &Instance| i.g.min_degree() >= 3 && i.radii.ell >= 1;
    let (np, bad_p) = tally(ens, "p_norm_bulk", eligible);
    let (ns, bad_s) = tally(ens, "support_bulk", eligible);
    let pass = bad_p.is_empty() && bad_s.is_empty() && np > 0 && ns > 0;
    criterion(
        5,
        "p-norm and support bounds",
        pass,
        &format!("{np} p-norm and {ns} support checks, {} violations", bad_p.len() + bad_s.len()),
    );
    assert!(pass, "{bad_p:?} {bad_s:?}");
}

fn long_girth_instances() -> Vec<(String, PotentialGraph)> {
    let k4 = complete(4, &[0.0; 4]).unwrap();
    let k4w = complete(4, &[0.4, -0.3, 0.9, -0.8]).unwrap();
    vec![
        ("subdivided K4".into(), subdivide(&k4, 2)),
        ("subdivided K4 with W".into(), subdivide(&k4w, 2)),
        ("subdivided Petersen".into(), subdivide(&petersen(&[0.0; 10]).unwrap(), 1)),
        ("C40".into(), cycle(40, &[0.0; 40]).unwrap()),
        ("C40 (1,-1)".into(), cycle(40, &tile_potential(&[1.0, -1.0], 40)).unwrap()),
        ("localized m=10".into(), localized_example(10).unwrap()),
    ]
}

#[test]
fn c06_kernel_mass() {
    let mut checks = 0;
    let mut tree_checks = 0;
    let mut bad = Vec::new();
    let mut worst_tree: f64 = 0.0;
    for (name, g) in long_girth_instances() {
        let rad = radii(&g);
        assert!(rad.ell >= 3, "{name}: ell_G = {}", rad.ell);
        let bands = scan(&g);
        let solver = BoundarySolver::new(&g, BoundaryOptions::default());
        for l in bulk_energies(&bands, 3, 0.05) {
            let bz = solver.solve(l);
            if bz.classification != Classification::Bulk {
                continue;
            }
            for n in 1..=rad.ell {
                for b in 0..g.directed_edge_count() {
                    let k = kernel_mass(&g, &bz.table, b, n, rad.ell).unwrap();
                    checks += 1;
                    if k.mass > k.bound {
                        bad.push(format!("{name} λ={l} n={n} b={b}: {} > {}", k.mass, k.bound));
                    }
                    if k.tree_like {
                        tree_checks += 1;
                        let d = (k.mass - 1.0 / n as f64).abs();
                        worst_tree = worst_tree.max(d);
                        if d > 1e-8 {
                            bad.push(format!("{name} λ={l} n={n} b={b}: tree mass {}", k.mass));
                        }
                    }
                }
            }
        }
    }
    let pass = bad.is_empty() && checks > 0 && tree_checks > 0;
    criterion(
        6,
        "kernel mass",
        pass,
        &format!("{checks} bound checks, {tree_checks} tree-like with max |mass-1/n| = {worst_tree:.2e}, {} violations", bad.len()),
    );
    assert!(pass, "{bad:?}");
}

#[test]
fn c07_combes_thomas() {
    let ens = ensemble();
    let mut graphs: Vec<(String, PotentialGraph, BandStructure)> = ens
        .bases
        .iter()
        .enumerate()
        .map(|(i, (g, b))| (format!("base {i}"), g.clone(), b.clone()))
        .collect();
    for (name, g) in long_girth_instances() {
        let b = scan(&g);
        graphs.push((name, g, b));
    }
    let mut rows = 0;
    let mut energies = 0;
    let mut bad = Vec::new();
    for (name, g, bands) in &graphs {
        let solver = BoundarySolver::new(g, BoundaryOptions::default());
        let ls = gap_energies(bands, 3);
        assert_eq!(ls.len(), 3, "{name}");
        for l in ls {
            let bz = solver.solve(l);
            assert_eq!(bz.classification, Classification::Gap, "{name} λ={l}");
            let delta = bands.distance_to_spectrum(l);
            let rep = combes_thomas_check(g, &bz.table, delta, 10).unwrap();
            energies += 1;
            for r in &rep.rows {
                rows += 1;
                if r.margin < 0.0 {
                    bad.push(format!("{name} λ={l} n={}: {} > {}", r.n, r.s_n, r.rhs));
                }
            }
        }
    }
    let pass = bad.is_empty();
    criterion(
        7,
        "Combes-Thomas decay",
        pass,
        &format!("{energies} gap energies on {} graphs, {rows} sphere sums, {} violations", graphs.len(), bad.len()),
    );
    assert!(pass, "{bad:?}");
}

#[test]
fn c08_cycles() {
    let mut lines = Vec::new();
    let mut pass = true;
    // N divisible by 3 so the period-3 bulk case is not vacuous
    let runs = [
        (vec![0.0], vec![64usize, 256, 1024]),
        (vec![3.0, -3.0], vec![64, 256, 1024]),
        (vec![1.0, 0.0, -1.0], vec![64, 256, 1024, 66, 258, 1026]),
    ];
    for (pattern, sizes) in runs {
        for n in sizes {
            let w = tile_potential(&pattern, n);
            let rep = verify_cycle_theorem(&w, None, &CycleOptions::default()).unwrap();
            let g = cycle(n, &w).unwrap();
            let cover = band_scan(
                &g,
                &BandOptions {
                    grid_step: 0.02,
                    bisection_steps: 0,
                    ..Default::default()
                },
            )
            .unwrap();
            let op = PeriodicZOperator::new(w[..rep.period].to_vec()).unwrap();
            let oracle = monodromy_bands(&op, 1e-3).unwrap();
            let ag = compare_bands(&cover, &oracle.bands);
            // the bulk case is exercised whenever the pattern tiles the cycle
            let exercised = n % pattern.len() != 0 || rep.bulk_checked > 0;
            let ok = rep.passed && ag.mismatches.is_empty() && exercised;
            pass &= ok;
            lines.push(format!(
                "{pattern:?}/N={n}: m={} gap {} bulk {} skipped {} bands {} mismatches {}{}",
                rep.period,
                rep.gap_checked,
                rep.bulk_checked,
                rep.skipped,
                ag.points_checked,
                ag.mismatches.len(),
                if ok { "" } else { " FAILED" }
            ));
        }
    }
    criterion(8, "N-cycles", pass, &lines.join("; "));
    assert!(pass);
}

#[test]
fn c09_localization_regression() {
    let mut pass = true;
    let mut notes = Vec::new();
    for m in [2usize, 5, 10] {
        let g = localized_example(m).unwrap();
        let psi = localized_eigenvector(m);
        let hpsi = g.apply_hamiltonian(&psi);
        let eig_res = hpsi.iter().zip(&psi).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
        let sup = psi.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let support = psi.iter().filter(|x| x.abs() > 1e-7 * sup).count();
        let pairs = full_spectrum(&g).unwrap();
        let present = pairs.iter().any(|p| (p.lambda + 1.0).abs() < 1e-9);
        // ψ lies in the computed −1 eigenspace
        let proj: f64 = pairs
            .iter()
            .filter(|p| (p.lambda + 1.0).abs() < 1e-9)
            .map(|p| p.psi.iter().zip(&psi).map(|(a, b)| a * b).sum::<f64>().powi(2))
            .sum();
        let bands = scan(&g);
        let flagged = bands.exceptional.iter().any(|f| (f + 1.0).abs() < GRID);
        let ok = eig_res < 1e-12 && (sup - 0.5).abs() <= 1e-8 && support == 4 && present && (proj - 1.0).abs() < 1e-8 && flagged;
        pass &= ok;
        notes.push(format!("m={m}: present={present} sup={sup} support={support} proj={proj:.10} flagged={flagged}"));
    }
    criterion(9, "localization regression", pass, &notes.join("; "));
    assert!(pass);
}

#[test]
fn c10_identity_suite() {
    let ens = ensemble();
    let mut zetainv: f64 = 0.0;
    let mut nb_res: f64 = 0.0;
    let mut rep_dev: f64 = 0.0;
    let mut cyc_bad = Vec::new();
    let (mut n_cycles, mut n_pairs, mut n_reps) = (0, 0, 0);
    let mut graphs: Vec<(String, PotentialGraph, RadiiProfile, Vec<EigenPair>, BandStructure)> = ens
        .instances
        .iter()
        .filter(|i| i.radii.ell >= 1)
        .step_by(3)
        .map(|i| (i.name.clone(), i.g.clone(), i.radii.clone(), i.pairs.clone(), ens.bases[i.base].1.clone()))
        .collect();
    for (name, g) in long_girth_instances() {
        let rad = radii(&g);
        let pairs = full_spectrum(&g).unwrap();
        graphs.push((name, g.clone(), rad, pairs, scan(&g)));
    }
    for (name, g, rad, pairs, bands) in &graphs {
        let solver = BoundarySolver::new(g, BoundaryOptions::default());
        let max_len = rad.girth.map_or(0, |gi| (gi + 1).min(8));
        let cycles = short_cycles(g, max_len);
        for l in bulk_energies(bands, 3, 0.05) {
            let bz = solver.solve(l);
            if bz.classification != Classification::Bulk {
                continue;
            }
            zetainv = zetainv.max(zetainv_residual(g, &bz.table).unwrap());
            for c in &cycles {
                let p = cycle_product(g, &bz.table, c, 1e-8).unwrap();
                n_cycles += 1;
                if !p.covers_all_vertices && !p.holds {
                    cyc_bad.push(format!("{name} λ={l} {c:?}: {} > {}", p.value, p.bound));
                }
            }
        }
        // eigenpairs well inside a band
        let inside: Vec<&EigenPair> = pairs
            .iter()
            .filter(|p| bands.in_band(p.lambda).is_some() && bands.distance_to_exceptional(p.lambda) > 0.1)
            .take(4)
            .collect();
        for p in inside {
            let bz = solver.solve(p.lambda);
            if bz.classification != Classification::Bulk {
                continue;
            }
            n_pairs += 1;
            zetainv = zetainv.max(zetainv_residual(g, &bz.table).unwrap());
            let lift = nb_lift(g, &p.psi, &bz.table).unwrap();
            nb_res = nb_res.max(lift.f_identity_residual).max(lift.g_identity_residual).max(lift.psidif_residual);
            let top = rad.ell.min(3);
            for r in 1..=top {
                for k in 1..=top {
                    if let Ok(rep) = representation_check(g, &p.psi, &bz.table, rad, r, k) {
                        n_reps += 1;
                        rep_dev = rep_dev.max(rep.outgoing_deviation).max(rep.bulk_deviation.unwrap_or(0.0));
                    }
                }
            }
        }
    }
    let pass = zetainv <= 1e-8 && nb_res <= 1e-6 && rep_dev <= 1e-6 && cyc_bad.is_empty() && n_pairs > 0 && n_reps > 0;
    criterion(
        10,
        "identity suite",
        pass,
        &format!(
            "{} graphs: zetainv {zetainv:.2e}; nb lift {nb_res:.2e} on {n_pairs} pairs; representations {rep_dev:.2e} over {n_reps} (r,k); {n_cycles} cycle products, {} violations",
            graphs.len(),
            cyc_bad.len()
        ),
    );
    assert!(pass, "{cyc_bad:?}");
}
