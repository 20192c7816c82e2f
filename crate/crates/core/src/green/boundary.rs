//! Boundary values `ζ^{λ+i0}` by continuation down an `η` ladder.

use serde::Serialize;

use crate::graph::PotentialGraph;

use super::cone::ConeSystem;
use super::solver::{solve_real_axis, solve_system, Complex, SolverOptions, SpectralParam, ZetaTable};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ladder {
    pub eta_start: f64,
    pub eta_min: f64,
}

impl Default for Ladder {
    fn default() -> Self {
        Self {
            eta_start: 0.1,
            eta_min: 1e-9,
        }
    }
}

impl Ladder {
    /// `η_k = η_start 2^{-k}` while above `η_min`, then `η_min`.
    pub fn rungs(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut eta = self.eta_start;
        while eta > self.eta_min {
            out.push(eta);
            eta *= 0.5;
        }
        out.push(self.eta_min);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryOptions {
    pub ladder: Ladder,
    pub solver: SolverOptions,
    /// Bulk when `min |Im ζ| > eps_band`.
    pub eps_band: f64,
    /// Gap when `max |Im ζ| < eps_gap`.
    pub eps_gap: f64,
    /// Pole when `max |ζ| η` exceeds this on the last two rungs while `max |ζ|`
    /// keeps doubling.
    pub pole_threshold: f64,
    /// Solve one unknown per cone type instead of per directed edge.
    pub reduce: bool,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        Self {
            ladder: Ladder::default(),
            solver: SolverOptions::default(),
            eps_band: 1e-4,
            eps_gap: 1e-6,
            pole_threshold: 1e-3,
            reduce: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Bulk,
    Gap,
    Pole,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryZeta {
    /// `η = 0` values, or the last rung for poles and failures.
    pub table: ZetaTable,
    #[serde(skip)]
    pub class_values: Vec<Complex>,
    pub classification: Classification,
    /// `max |ζ| η` on each rung.
    pub pole_indicator: Vec<f64>,
    /// True when the real-axis Newton polish was rejected and the value was
    /// extrapolated from the last two rungs.
    pub extrapolated: bool,
    pub diagnostics: Option<String>,
}

/// Solver bound to one graph; the cone system is built once.
#[derive(Debug, Clone)]
pub struct BoundarySolver {
    pub system: ConeSystem,
    pub options: BoundaryOptions,
}

impl BoundarySolver {
    pub fn new(g: &PotentialGraph, options: BoundaryOptions) -> Self {
        Self {
            system: ConeSystem::from_graph(g, options.reduce),
            options,
        }
    }

    pub fn from_system(system: ConeSystem, options: BoundaryOptions) -> Self {
        Self { system, options }
    }

    fn table(&self, param: SpectralParam, vals: &[Complex], iterations: usize, residual: f64) -> ZetaTable {
        let values = if self.system.edge_class.is_empty() {
            vals.to_vec()
        } else {
            self.system.expand(vals)
        };
        ZetaTable {
            param,
            values,
            iterations,
            residual,
        }
    }

    pub fn solve(&self, lambda: f64) -> BoundaryZeta {
        let opts = &self.options;
        let rungs = opts.ladder.rungs();
        let mut x: Option<Vec<Complex>> = None;
        let mut history: Vec<(f64, Vec<Complex>)> = Vec::with_capacity(rungs.len());
        let mut indicator = Vec::with_capacity(rungs.len());
        let mut iterations = 0;
        let mut last_res = 0.0;
        for &eta in &rungs {
            let gamma = Complex::new(lambda, eta);
            // secant predictor in η from the last two rungs
            let predicted = match history.len() {
                n if n >= 2 => {
                    let (e1, z1) = &history[n - 1];
                    let (e2, z2) = &history[n - 2];
                    let t = (eta - e1) / (e1 - e2);
                    let p: Vec<Complex> = z1.iter().zip(z2).map(|(a, b)| a + (a - b) * t).collect();
                    p.iter().all(|z| z.im < 0.0).then_some(p)
                }
                _ => None,
            };
            let start = predicted.as_deref().or(x.as_deref());
            match solve_system(&self.system, gamma, start, &opts.solver) {
                Ok(sol) => {
                    iterations += sol.iterations;
                    last_res = sol.residual;
                    indicator.push(sol.values.iter().map(|z| z.norm()).fold(0.0, f64::max) * eta);
                    history.push((eta, sol.values.clone()));
                    x = Some(sol.values);
                }
                Err(e) => {
                    let (eta_last, vals) = history
                        .last()
                        .cloned()
                        .unwrap_or((eta, vec![Complex::new(f64::NAN, f64::NAN); self.system.class_count()]));
                    return BoundaryZeta {
                        table: self.table(SpectralParam::new(lambda, eta_last), &vals, iterations, f64::NAN),
                        class_values: vals,
                        classification: Classification::Undetermined,
                        pole_indicator: indicator,
                        extrapolated: false,
                        diagnostics: Some(format!("rung eta = {eta:e}: {e}")),
                    };
                }
            }
        }

        let k = history.len();
        // max |ζ| tracks 1/η: the growth between rungs follows the η ratio
        let growing = |i: usize| {
            let m = |j: usize| history[j].1.iter().map(|z| z.norm()).fold(0.0, f64::max);
            m(i) > 0.9 * (history[i - 1].0 / history[i].0) * m(i - 1)
        };
        if k >= 3
            && indicator[k - 1] > opts.pole_threshold
            && indicator[k - 2] > opts.pole_threshold
            && growing(k - 1)
            && growing(k - 2)
        {
            let (eta_last, vals) = history[k - 1].clone();
            return BoundaryZeta {
                table: self.table(SpectralParam::new(lambda, eta_last), &vals, iterations, last_res),
                class_values: vals,
                classification: Classification::Pole,
                pole_indicator: indicator,
                extrapolated: false,
                diagnostics: None,
            };
        }

        let (eta1, z1) = &history[k - 1];
        let scale = z1.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let polished = solve_real_axis(&self.system, lambda, z1, &opts.solver).filter(|sol| {
            let drift = sol
                .values
                .iter()
                .zip(z1)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            drift <= 1e-3 * scale && sol.values.iter().all(|z| z.im <= 1e-12 * scale)
        });
        let (vals, residual, extrapolated) = match polished {
            Some(sol) => {
                iterations += sol.iterations;
                (sol.values, sol.residual, false)
            }
            None => {
                let (eta2, z2) = &history[k - 2];
                let t = eta1 / (eta2 - eta1);
                let v: Vec<Complex> = z1.iter().zip(z2).map(|(a, b)| a + (a - b) * t).collect();
                (v, last_res, true)
            }
        };
        let table = self.table(SpectralParam::new(lambda, 0.0), &vals, iterations, residual);
        let min_im = vals.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min);
        let max_im = vals.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        let classification = if min_im > opts.eps_band && vals.iter().all(|z| z.im < 0.0) {
            Classification::Bulk
        } else if max_im < opts.eps_gap && !extrapolated {
            Classification::Gap
        } else {
            Classification::Undetermined
        };
        BoundaryZeta {
            table,
            class_values: vals,
            classification,
            pole_indicator: indicator,
            extrapolated,
            diagnostics: None,
        }
    }
}

/// Boundary `ζ^{λ+i0}` with default options.
pub fn boundary_zeta(g: &PotentialGraph, lambda: f64, options: BoundaryOptions) -> BoundaryZeta {
    BoundarySolver::new(g, options).solve(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, localized_example, petersen};

    #[test]
    fn ladder_shape() {
        let r = Ladder::default().rungs();
        assert_eq!(r[0], 0.1);
        assert_eq!(*r.last().unwrap(), 1e-9);
        assert!(r.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(r.len(), 28);
    }

    #[test]
    fn regular_bulk_and_gap() {
        let g = petersen(&[0.0; 10]).unwrap();
        let b = boundary_zeta(&g, 0.0, BoundaryOptions::default());
        assert_eq!(b.classification, Classification::Bulk);
        let expect = std::f64::consts::FRAC_1_SQRT_2;
        assert!((b.table.min_abs_im() - expect).abs() < 1e-12);
        assert!(b.table.values[0].re.abs() < 1e-12);

        let b = boundary_zeta(&g, 3.5, BoundaryOptions::default());
        assert_eq!(b.classification, Classification::Gap);
        assert!(b.table.max_abs_im() < 1e-12);
        // root (3.5 - sqrt(3.5² - 8)) / 4 of 2ζ² - 3.5ζ + 1 = 0
        let z = (3.5 - (3.5f64 * 3.5 - 8.0).sqrt()) / 4.0;
        assert!((b.table.values[0].re - z).abs() < 1e-12);
    }

    #[test]
    fn localized_example_has_a_pole_at_minus_one() {
        for m in [2, 5, 10] {
            let g = localized_example(m).unwrap();
            let b = boundary_zeta(&g, -1.0, BoundaryOptions::default());
            assert_eq!(b.classification, Classification::Pole, "m = {m}: {:?}", b.pole_indicator);
        }
    }

    #[test]
    fn k4_gap_below_band() {
        let g = complete(4, &[0.0; 4]).unwrap();
        let b = boundary_zeta(&g, -3.5, BoundaryOptions::default());
        assert_eq!(b.classification, Classification::Gap);
    }
}
