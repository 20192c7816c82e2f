//! Band structure of the cover operator by a classified energy scan.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{check_c1, PotentialGraph};

use super::boundary::{BoundaryOptions, BoundarySolver, BoundaryZeta, Classification};
use super::cone::ConeSystem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandOptions {
    pub grid_step: f64,
    pub boundary: BoundaryOptions,
    pub bisection_steps: usize,
    /// Bisection steps when locating a pole between two gap points.
    pub pole_bisection_steps: usize,
    /// A located sign change of `ζ` counts as a pole when `|ζ|` exceeds this
    /// at both ends of the final bracket.
    pub pole_confirm: f64,
}

impl Default for BandOptions {
    fn default() -> Self {
        Self {
            grid_step: 0.005,
            boundary: BoundaryOptions::default(),
            bisection_steps: 20,
            pole_bisection_steps: 48,
            pole_confirm: 1e4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridMeta {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
    pub points: usize,
    pub bulk_points: usize,
    pub gap_points: usize,
    pub pole_points: usize,
    pub undetermined_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandStructure {
    pub bands: Vec<Band>,
    pub exceptional: Vec<f64>,
    pub endpoints: Vec<f64>,
    pub grid: GridMeta,
}

impl BandStructure {
    pub fn in_band(&self, lambda: f64) -> Option<usize> {
        self.bands
            .iter()
            .position(|b| b.lo <= lambda && lambda <= b.hi)
    }

    /// Distance from `λ` to `∪ bands ∪ 𝔉`; zero inside a band.
    pub fn distance_to_spectrum(&self, lambda: f64) -> f64 {
        let band = self
            .bands
            .iter()
            .map(|b| {
                if lambda < b.lo {
                    b.lo - lambda
                } else if lambda > b.hi {
                    lambda - b.hi
                } else {
                    0.0
                }
            })
            .fold(f64::INFINITY, f64::min);
        let pole = self
            .exceptional
            .iter()
            .map(|f| (f - lambda).abs())
            .fold(f64::INFINITY, f64::min);
        band.min(pole)
    }

    /// Distance from `λ` to `𝔉 ∪ 𝔉′`.
    pub fn distance_to_exceptional(&self, lambda: f64) -> f64 {
        self.exceptional
            .iter()
            .chain(&self.endpoints)
            .map(|f| (f - lambda).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Shifts every energy by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.bands {
            b.lo += c;
            b.hi += c;
        }
        out.exceptional.iter_mut().for_each(|x| *x += c);
        out.endpoints.iter_mut().for_each(|x| *x += c);
        out.grid.lo += c;
        out.grid.hi += c;
        out
    }
}

/// Scans `[-D - ‖W‖∞ - 1, D + ‖W‖∞ + 1]` on the cover of `g`.
pub fn band_scan(g: &PotentialGraph, opts: &BandOptions) -> Result<BandStructure> {
    let reach = g.max_degree() as f64 + g.potential_sup() + 1.0;
    let system = ConeSystem::from_graph(g, opts.boundary.reduce);
    let c1 = check_c1(g).holds;
    band_scan_system(system, -reach, reach, opts, c1)
}

/// Scan on an arbitrary cone system over `[lo, hi]`. `require_band` states
/// that (C1) holds: a band must exist and gap poles of `ζ` are exceptional.
pub fn band_scan_system(
    system: ConeSystem,
    lo: f64,
    hi: f64,
    opts: &BandOptions,
    require_band: bool,
) -> Result<BandStructure> {
    if !(opts.grid_step > 0.0) || !(hi > lo) {
        return Err(Error::InvalidParameter("grid step and range must be positive".into()));
    }
    let solver = BoundarySolver::from_system(system, opts.boundary);
    let h = opts.grid_step;
    let points = ((hi - lo) / h).floor() as usize + 1;
    let grid: Vec<f64> = (0..points).map(|k| lo + k as f64 * h).collect();
    let results: Vec<BoundaryZeta> = grid.par_iter().map(|&l| solver.solve(l)).collect();
    let class: Vec<Classification> = results.iter().map(|r| r.classification).collect();
    let is_bulk = |l: f64| solver.solve(l).classification == Classification::Bulk;

    let mut bands = Vec::new();
    let mut k = 0;
    while k < points {
        if class[k] != Classification::Bulk {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < points && class[k + 1] == Classification::Bulk {
            k += 1;
        }
        let end = k;
        let left = if start == 0 {
            grid[0]
        } else {
            bisect(grid[start - 1], grid[start], opts.bisection_steps, |l| is_bulk(l))
        };
        let right = if end + 1 == points {
            grid[end]
        } else {
            bisect(grid[end], grid[end + 1], opts.bisection_steps, |l| !is_bulk(l))
        };
        bands.push(Band { lo: left, hi: right });
        k += 1;
    }

    let mut exceptional: Vec<f64> = (0..points)
        .filter(|&k| class[k] == Classification::Pole)
        .map(|k| grid[k])
        .collect();
    // ζ is real and decreasing in gaps; it crosses from -∞ to +∞ at a pole.
    // Without (C1) such a pole belongs to a single cone, not to the cover.
    for k in 0..points.saturating_sub(1) {
        if !require_band {
            break;
        }
        if class[k] != Classification::Gap || class[k + 1] != Classification::Gap {
            continue;
        }
        let (a, b) = (&results[k].class_values, &results[k + 1].class_values);
        for c in 0..a.len() {
            if a[c].re < 0.0 && b[c].re > 0.0 {
                if let Some(p) = locate_pole(&solver, grid[k], grid[k + 1], c, opts) {
                    exceptional.push(p);
                }
            }
        }
    }
    exceptional.sort_by(f64::total_cmp);
    exceptional.dedup_by(|a, b| (*a - *b).abs() <= h);

    let mut endpoints: Vec<f64> = bands.iter().flat_map(|b| [b.lo, b.hi]).collect();
    endpoints.dedup();

    if require_band && bands.is_empty() {
        return Err(Error::BandDetectionFailed);
    }
    let count = |c: Classification| class.iter().filter(|&&x| x == c).count();
    Ok(BandStructure {
        bands,
        exceptional,
        endpoints,
        grid: GridMeta {
            lo,
            hi,
            step: h,
            points,
            bulk_points: count(Classification::Bulk),
            gap_points: count(Classification::Gap),
            pole_points: count(Classification::Pole),
            undetermined_points: count(Classification::Undetermined),
        },
    })
}

/// Bisection for the switch of `pred` from false at `a` to true at `b`.
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

fn locate_pole(solver: &BoundarySolver, mut a: f64, mut b: f64, c: usize, opts: &BandOptions) -> Option<f64> {
    let mut za = f64::NAN;
    let mut zb = f64::NAN;
    for _ in 0..opts.pole_bisection_steps {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let r = solver.solve(m);
        match r.classification {
            Classification::Pole => return Some(m),
            Classification::Gap => {
                let v = r.class_values[c].re;
                if v < 0.0 {
                    a = m;
                    za = v;
                } else {
                    b = m;
                    zb = v;
                }
            }
            _ => return None,
        }
    }
    (za.abs() > opts.pole_confirm && zb.abs() > opts.pole_confirm).then_some(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, localized_example, petersen};

    #[test]
    fn regular_graph_single_band() {
        let g = petersen(&[0.0; 10]).unwrap();
        let opts = BandOptions {
            grid_step: 0.02,
            ..Default::default()
        };
        let bs = band_scan(&g, &opts).unwrap();
        assert_eq!(bs.bands.len(), 1);
        let edge = 2.0 * 2f64.sqrt();
        assert!((bs.bands[0].lo + edge).abs() < 1e-5);
        assert!((bs.bands[0].hi - edge).abs() < 1e-5);
        assert!(bs.exceptional.is_empty());
    }

    #[test]
    fn constant_shift_moves_bands() {
        let opts = BandOptions {
            grid_step: 0.02,
            ..Default::default()
        };
        let a = band_scan(&complete(4, &[0.0; 4]).unwrap(), &opts).unwrap();
        let b = band_scan(&complete(4, &[10.0; 4]).unwrap(), &opts).unwrap();
        assert_eq!(a.bands.len(), b.bands.len());
        for (x, y) in a.bands.iter().zip(&b.bands) {
            assert!((x.lo + 10.0 - y.lo).abs() < 0.02);
            assert!((x.hi + 10.0 - y.hi).abs() < 0.02);
        }
    }

    #[test]
    fn localized_example_exceptional_energy() {
        let g = localized_example(2).unwrap();
        let opts = BandOptions {
            grid_step: 0.01,
            ..Default::default()
        };
        let bs = band_scan(&g, &opts).unwrap();
        assert!(
            bs.exceptional.iter().any(|&f| (f + 1.0).abs() < 1e-6),
            "{:?} {:?}",
            bs.exceptional,
            bs.bands
        );
    }
}
