#![allow(dead_code)]

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covertree::graph::{build_graph, PotentialGraph};
use covertree::green::BandStructure;

pub fn random_potential(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Replaces every edge by a path with `k` new interior vertices (potential 0).
pub fn subdivide(g: &PotentialGraph, k: usize) -> PotentialGraph {
    let mut w = g.potentials().to_vec();
    let mut edges = Vec::new();
    for &(u, v) in g.edges() {
        let mut prev = u;
        for _ in 0..k {
            let x = w.len();
            w.push(0.0);
            edges.push((prev, x));
            prev = x;
        }
        edges.push((prev, v));
    }
    build_graph(&edges, &w).unwrap()
}

/// `count` energies spread over the band interiors, at least `margin` away
/// from band edges and exceptional points.
pub fn bulk_energies(bands: &BandStructure, count: usize, margin: f64) -> Vec<f64> {
    let inner: Vec<(f64, f64)> = bands
        .bands
        .iter()
        .map(|b| (b.lo + margin, b.hi - margin))
        .filter(|(a, b)| b > a)
        .collect();
    let total: f64 = inner.iter().map(|(a, b)| b - a).sum();
    let mut out = Vec::new();
    if total <= 0.0 {
        return out;
    }
    for k in 0..count {
        let mut t = total * (k as f64 + 0.5) / count as f64;
        for &(a, b) in &inner {
            if t <= b - a {
                let l = a + t;
                if bands.exceptional.iter().all(|f| (f - l).abs() > margin) {
                    out.push(l);
                }
                break;
            }
            t -= b - a;
        }
    }
    out
}

/// Writes past the test harness's output capture.
pub fn line(text: &str) {
    let _ = writeln!(std::io::stderr(), "{text}");
}

pub fn criterion(id: u32, name: &str, pass: bool, detail: &str) {
    line(&format!(
        "criterion {id:>2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    ));
}
