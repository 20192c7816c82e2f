//! Solving the closed `ζ` system at `γ = λ + iη`.
//!
//! The defining map is `ζ_b ← -1 / (W(t(b)) - γ + Σ_{b' ∈ N⁺(b)} ζ_{b'})`.
//! Damped iteration of this map from `ζ ≡ -i` stays in the lower half plane,
//! but contracts slowly as `η → 0`; Newton's method on the residual
//! `F_b = ζ_b (W - γ + Σ ζ_{b'}) + 1`, warm-started from the previous rung of
//! a decreasing `η` ladder, does the bulk of the work.

use std::sync::Arc;

use faer::prelude::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{c64, Mat};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::PotentialGraph;

use super::cone::ConeSystem;

pub type Complex = c64;

/// `γ = λ + iη`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralParam {
    pub lambda: f64,
    pub eta: f64,
}

impl SpectralParam {
    pub fn new(lambda: f64, eta: f64) -> Self {
        Self { lambda, eta }
    }

    pub fn gamma(&self) -> Complex {
        Complex::new(self.lambda, self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverOptions {
    /// Damping of the fixed-point fallback.
    pub alpha: f64,
    /// Target for `max_b |F_b|`.
    pub tol: f64,
    pub max_newton: usize,
    /// Fixed-point budget per unknown.
    pub fixed_point_per_unknown: usize,
    /// Upper limit on the fixed-point budget of one fallback round.
    pub fixed_point_cap: usize,
    /// Systems with more unknowns than this use a sparse LU.
    pub dense_limit: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            tol: 1e-13,
            max_newton: 80,
            fixed_point_per_unknown: 2000,
            fixed_point_cap: 100_000,
            dense_limit: 48,
        }
    }
}

/// Values of `ζ` on the directed edges of a graph at one spectral parameter.
///
/// Edge `b = (x0, x1)` holds `ζ_{x0}(x1)`: minus the Green function at `x1`
/// of the cover with the branch through `x0` removed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZetaTable {
    pub param: SpectralParam,
    pub values: Vec<Complex>,
    pub iterations: usize,
    pub residual: f64,
}

impl ZetaTable {
    pub fn get(&self, b: usize) -> Complex {
        self.values[b]
    }

    pub fn min_abs_im(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_im(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_b |ζ_b (W(t(b)) - γ + Σ_{N⁺(b)} ζ) + 1|` on the graph itself.
    pub fn residual_on(&self, g: &PotentialGraph) -> f64 {
        let gamma = self.param.gamma();
        (0..g.directed_edge_count())
            .map(|b| {
                let s: Complex = g.nb_successors(b).map(|e| self.values[e]).sum();
                (self.values[b] * (g.potential(g.terminus(b)) - gamma + s) + 1.0).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Result of a solve on a cone system.
#[derive(Debug, Clone)]
pub struct SystemSolution {
    pub values: Vec<Complex>,
    pub iterations: usize,
    pub residual: f64,
}

fn denominators(sys: &ConeSystem, gamma: Complex, x: &[Complex]) -> Vec<Complex> {
    (0..sys.class_count())
        .map(|c| {
            let s: Complex = sys.succ[c].iter().map(|&(k, m)| x[k] * m).sum();
            sys.w[c] - gamma + s
        })
        .collect()
}

fn residual(sys: &ConeSystem, gamma: Complex, x: &[Complex]) -> (Vec<Complex>, f64) {
    let d = denominators(sys, gamma, x);
    let f: Vec<Complex> = x.iter().zip(&d).map(|(xi, di)| xi * di + 1.0).collect();
    let r = f.iter().map(|v| v.norm()).fold(0.0, f64::max);
    (f, if r.is_finite() { r } else { f64::INFINITY })
}

fn herglotz_ok(x: &[Complex]) -> bool {
    x.iter().all(|z| z.im < 0.0 && z.re.is_finite())
}

/// Sparsity of the Newton matrix with its symbolic factorization. Values are
/// laid out per row `c`: off-diagonal successors in `succ` order, then the
/// diagonal.
pub(crate) struct JacobianPattern {
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: SymbolicLu<usize>,
    nnz: usize,
}

impl std::fmt::Debug for JacobianPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobianPattern").field("nnz", &self.nnz).finish()
    }
}

impl JacobianPattern {
    fn build(sys: &ConeSystem) -> Option<Self> {
        let n = sys.class_count();
        let mut idx = Vec::with_capacity(n * 3);
        for c in 0..n {
            for &(s, _) in &sys.succ[c] {
                if s != c {
                    idx.push(Pair { row: c, col: s });
                }
            }
            idx.push(Pair { row: c, col: c });
        }
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &idx).ok()?;
        let lu = SymbolicLu::try_new(symbolic.as_ref()).ok()?;
        Some(Self {
            symbolic,
            argsort,
            lu,
            nnz: idx.len(),
        })
    }
}

fn pattern(sys: &ConeSystem) -> Option<Arc<JacobianPattern>> {
    sys.jacobian
        .get_or_init(|| JacobianPattern::build(sys).map(Arc::new))
        .clone()
}

fn finite(dx: &[Complex]) -> bool {
    dx.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

fn newton_step(sys: &ConeSystem, x: &[Complex], d: &[Complex], f: &[Complex], opts: &SolverOptions) -> Option<Vec<Complex>> {
    let n = x.len();
    let rhs = Mat::<Complex>::from_fn(n, 1, |i, _| -f[i]);
    // J_{c,c} = D_c, J_{c,s} += x_c m_{c,s}
    let sol = if n <= opts.dense_limit {
        let mut j = Mat::<Complex>::zeros(n, n);
        for c in 0..n {
            j[(c, c)] += d[c];
            for &(s, m) in &sys.succ[c] {
                j[(c, s)] += x[c] * m;
            }
        }
        j.partial_piv_lu().solve(&rhs)
    } else {
        let pat = pattern(sys)?;
        let mut vals = Vec::with_capacity(pat.nnz);
        for c in 0..n {
            let mut diag = d[c];
            for &(s, m) in &sys.succ[c] {
                if s == c {
                    diag += x[c] * m;
                } else {
                    vals.push(x[c] * m);
                }
            }
            vals.push(diag);
        }
        let j = SparseColMat::new_from_argsort(pat.symbolic.clone(), &pat.argsort, &vals).ok()?;
        let lu = Lu::try_new_with_symbolic(pat.lu.clone(), j.as_ref()).ok()?;
        lu.solve(&rhs)
    };
    let dx: Vec<Complex> = (0..n).map(|i| sol[(i, 0)]).collect();
    finite(&dx).then_some(dx)
}

/// Newton with backtracking. When `herglotz` is set, every accepted iterate
/// keeps `Im ζ < 0`.
fn newton(
    sys: &ConeSystem,
    gamma: Complex,
    mut x: Vec<Complex>,
    herglotz: bool,
    opts: &SolverOptions,
) -> std::result::Result<SystemSolution, (Vec<Complex>, f64, usize)> {
    let (mut f, mut res) = residual(sys, gamma, &x);
    let mut it = 0;
    while res > opts.tol && it < opts.max_newton {
        it += 1;
        let d = denominators(sys, gamma, &x);
        let Some(dx) = newton_step(sys, &x, &d, &f, opts) else {
            return Err((x, res, it));
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<Complex> = x.iter().zip(&dx).map(|(a, b)| a + b * t).collect();
            if !herglotz || herglotz_ok(&trial) {
                let (ft, rt) = residual(sys, gamma, &trial);
                if rt < res * (1.0 - 1e-4 * t) || rt <= opts.tol {
                    x = trial;
                    f = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return Err((x, res, it));
        }
    }
    if res <= opts.tol {
        Ok(SystemSolution {
            values: x,
            iterations: it,
            residual: res,
        })
    } else {
        Err((x, res, it))
    }
}

fn fixed_point(
    sys: &ConeSystem,
    gamma: Complex,
    mut x: Vec<Complex>,
    budget: usize,
    stop: f64,
    opts: &SolverOptions,
) -> Result<(Vec<Complex>, f64, usize)> {
    let a = opts.alpha;
    let mut res = f64::INFINITY;
    for it in 0..budget {
        let d = denominators(sys, gamma, &x);
        for c in 0..x.len() {
            x[c] = x[c] * (1.0 - a) - d[c].inv() * a;
        }
        if !herglotz_ok(&x) {
            return Err(Error::HerglotzSignLost { eta: gamma.im });
        }
        if it % 16 == 15 || it + 1 == budget {
            res = residual(sys, gamma, &x).1;
            if res <= stop {
                return Ok((x, res, it + 1));
            }
        }
    }
    Ok((x, res, budget))
}

/// Solves the system at `γ` with `Im γ > 0`, on the Herglotz branch.
pub fn solve_system(
    sys: &ConeSystem,
    gamma: Complex,
    init: Option<&[Complex]>,
    opts: &SolverOptions,
) -> Result<SystemSolution> {
    if !(gamma.im > 0.0) || !gamma.re.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "spectral parameter needs eta > 0, got {gamma}"
        )));
    }
    let n = sys.class_count();
    let start: Vec<Complex> = match init {
        Some(v) if v.len() == n && herglotz_ok(v) => v.to_vec(),
        Some(v) if v.len() != n => {
            return Err(Error::InvalidParameter(format!(
                "initial table has {} entries, system has {n}",
                v.len()
            )))
        }
        _ => vec![Complex::new(0.0, -1.0); n],
    };
    let (x, mut iters) = match newton(sys, gamma, start.clone(), true, opts) {
        Ok(sol) => return Ok(sol),
        Err((_, _, it)) => (start, it),
    };
    // Fall back to damped iteration until Newton can take over.
    let budget = (opts.fixed_point_per_unknown * n.max(1)).min(opts.fixed_point_cap.max(1));
    let mut x = x;
    let mut stop = 1e-3;
    loop {
        let (xf, res, it) = fixed_point(sys, gamma, x, budget, stop, opts)?;
        iters += it;
        match newton(sys, gamma, xf.clone(), true, opts) {
            Ok(mut sol) => {
                sol.iterations += iters;
                return Ok(sol);
            }
            Err((_, _, it)) => {
                iters += it;
                if res > stop || stop < 1e-10 {
                    if res <= opts.tol * 10.0 {
                        return Ok(SystemSolution {
                            values: xf,
                            iterations: iters,
                            residual: res,
                        });
                    }
                    return Err(Error::NotConverged {
                        residual: res,
                        iterations: iters,
                    });
                }
                x = xf;
                stop *= 1e-3;
            }
        }
    }
}

/// Newton polish on the real axis, without a sign constraint.
pub fn solve_real_axis(
    sys: &ConeSystem,
    lambda: f64,
    init: &[Complex],
    opts: &SolverOptions,
) -> Option<SystemSolution> {
    newton(sys, Complex::new(lambda, 0.0), init.to_vec(), false, opts).ok()
}

/// Solves on a graph at `γ` with `η > 0`.
pub fn solve_zeta(g: &PotentialGraph, param: SpectralParam, init: Option<&ZetaTable>) -> Result<ZetaTable> {
    solve_zeta_with(g, param, init, true, &SolverOptions::default())
}

pub fn solve_zeta_with(
    g: &PotentialGraph,
    param: SpectralParam,
    init: Option<&ZetaTable>,
    reduce: bool,
    opts: &SolverOptions,
) -> Result<ZetaTable> {
    if g.min_degree() < 2 {
        return Err(Error::InvalidParameter("the ζ system needs minimal degree >= 2".into()));
    }
    let sys = ConeSystem::from_graph(g, reduce);
    let init_classes = match init {
        Some(t) => {
            if t.values.len() != g.directed_edge_count() {
                return Err(Error::InvalidParameter("initial table does not match graph".into()));
            }
            let mut v = vec![Complex::new(0.0, -1.0); sys.class_count()];
            for (b, &c) in sys.edge_class.iter().enumerate() {
                v[c] = t.values[b];
            }
            Some(v)
        }
        None => None,
    };
    let sol = solve_system(&sys, param.gamma(), init_classes.as_deref(), opts)?;
    Ok(ZetaTable {
        param,
        values: sys.expand(&sol.values),
        iterations: sol.iterations,
        residual: sol.residual,
    })
}
