//! Rotation-invariant negatively curved metrics on annuli of the punctured disk.
//!
//! In `x = log r` the unknown `v = log λ + 2x` satisfies
//! `v'' = 8 e^{v + F + c}`, i.e. `∂∂̄ log λ = 2 e^{F+c} λ`: curvature `-4 e^{F+c}`.
//! For `F = 0` the conic models `v = 2 log β + 2βx - 2 log(1 - e^{2βx})` and the cusp
//! `v = -log(4x²)` are exact solutions. Dirichlet data replaces the compact
//! manifold of the global problem.
//!
//! The potential relative to the model is defined by `λ = λ_model e^{φ + F + c}`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::special::{self, ConeAngle};

/// Closed-form solution providing the initial guess, the boundary data and the comparison metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Conic(ConeAngle),
    Cusp,
}

impl Model {
    /// `β = 0` selects the cusp.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if beta == 0.0 {
            Ok(Model::Cusp)
        } else {
            Ok(Model::Conic(ConeAngle::new(beta)?))
        }
    }

    pub fn beta(&self) -> f64 {
        match self {
            Model::Conic(b) => b.value(),
            Model::Cusp => 0.0,
        }
    }

    /// `v = log λ + 2x`.
    pub fn v(&self, x: f64) -> f64 {
        match self {
            Model::Conic(b) => special::log_a_raw(2.0 * x, b.value()) + 2.0 * x,
            Model::Cusp => -(4.0 * x * x).ln(),
        }
    }

    /// `dv/dx`.
    pub fn dv(&self, x: f64) -> f64 {
        match self {
            Model::Conic(b) => {
                let b = b.value();
                let e = (2.0 * b * x).exp();
                2.0 * b + 4.0 * b * e / (-(2.0 * b * x).exp_m1())
            }
            Model::Cusp => -2.0 / x,
        }
    }

    /// Doubled potential `Φ` with `λ = ½ dd^c Φ`: `-log((1-t^β)/β)²` or `-log log² t`, `t = r²`.
    pub fn doubled_potential(&self, x: f64) -> f64 {
        let lt = 2.0 * x;
        match self {
            Model::Conic(b) => -2.0 * special::one_minus_tbeta_over_beta_log(lt, b.value()).ln(),
            Model::Cusp => -2.0 * (-lt).ln(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// Values of the model at both ends.
    Model,
    /// Prescribed `log λ` at `r_min` and `r_max`.
    Custom { log_lambda_min: f64, log_lambda_max: f64 },
}

/// Smooth compactly supported right-hand-side perturbation `F(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturbation {
    None,
    /// `amplitude · exp(1 - 1/(1-s²))` with `s` the position relative to the middle half of the annulus.
    Bump { amplitude: f64 },
    /// A bump plus a constant.
    ShiftedBump { amplitude: f64, shift: f64 },
}

impl Perturbation {
    pub fn eval(&self, x: f64, x_min: f64, x_max: f64) -> f64 {
        let bump = |amp: f64| {
            let mid = 0.5 * (x_min + x_max);
            let half_width = 0.25 * (x_max - x_min);
            let s = (x - mid) / half_width;
            if s.abs() < 1.0 {
                amp * (1.0 - 1.0 / (1.0 - s * s)).exp()
            } else {
                0.0
            }
        };
        match *self {
            Perturbation::None => 0.0,
            Perturbation::Bump { amplitude } => bump(amplitude),
            Perturbation::ShiftedBump { amplitude, shift } => bump(amplitude) + shift,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub grid: usize,
    /// Bound on both the `h²`-scaled residual and the last Newton update.
    pub tol: f64,
    pub max_iter: usize,
    pub boundary: Boundary,
    pub perturbation: Perturbation,
    /// Combine the solutions on `N` and `2N-1` points into a fourth-order one.
    pub richardson: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            r_min: 0.05,
            r_max: 0.9,
            grid: 4096,
            tol: 1e-10,
            max_iter: 30,
            boundary: Boundary::Model,
            perturbation: Perturbation::None,
            richardson: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.r_min && self.r_min < self.r_max && self.r_max < 1.0) {
            return Err(LabError::Config(format!("annulus [{}, {}] not inside (0, 1)", self.r_min, self.r_max)));
        }
        if self.grid < 64 {
            return Err(LabError::Config(format!("grid {} < 64", self.grid)));
        }
        if !(self.tol > 0.0) {
            return Err(LabError::Config("tolerance must be positive".into()));
        }
        Ok(())
    }

    fn x_range(&self) -> (f64, f64) {
        (self.r_min.ln(), self.r_max.ln())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverState {
    pub model: Model,
    pub x: Vec<f64>,
    pub log_lambda: Vec<f64>,
    pub log_lambda_model: Vec<f64>,
    pub perturbation: Vec<f64>,
    /// Potential relative to the model, `log(λ/λ_model) - F - c`.
    pub phi: Vec<f64>,
    /// Normalization constant `c`.
    pub normalization: f64,
    /// `h²`-scaled residual sup-norms, one entry per Newton iterate (all solves concatenated).
    pub residual_history: Vec<f64>,
    /// Newton iterations of the costliest solve.
    pub iterations: usize,
}

impl SolverState {
    pub fn lambda(&self, i: usize) -> f64 {
        self.log_lambda[i].exp()
    }

    pub fn ratio(&self, i: usize) -> f64 {
        (self.log_lambda[i] - self.log_lambda_model[i]).exp()
    }

    /// `∂_x log λ` by central differences (one-sided at the ends).
    pub fn dlog_lambda(&self) -> Vec<f64> {
        let n = self.x.len();
        let h = self.x[1] - self.x[0];
        let v = &self.log_lambda;
        (0..n)
            .map(|i| {
                if i == 0 {
                    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                } else if i == n - 1 {
                    (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
                } else {
                    (v[i + 1] - v[i - 1]) / (2.0 * h)
                }
            })
            .collect()
    }

    /// Largest relative deviation `|λ/λ_model - 1|`.
    pub fn max_relative_error(&self) -> f64 {
        (0..self.x.len()).map(|i| (self.log_lambda[i] - self.log_lambda_model[i]).exp_m1().abs()).fold(0.0, f64::max)
    }
}

pub fn grid(x_min: f64, x_max: f64, n: usize) -> Vec<f64> {
    special::linspace(x_min, x_max, n)
}

/// Normalization `c` making `∫ e^{F+c} e^{v_model} dx = ∫ e^{v_model} dx`, so that the
/// perturbed right-hand side carries the model mass.
pub fn normalization_constant(x: &[f64], model: Model, f: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|&xi| model.v(xi).exp()).collect();
    let num = trapezoid(x, &w.iter().zip(f).map(|(a, b)| a * b.exp()).collect::<Vec<_>>());
    let den = trapezoid(x, &w);
    -(num / den).ln()
}

pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1])).sum()
}

/// `h²`-scaled residual `v_{i-1} - 2v_i + v_{i+1} - 8h² e^{v_i + s_i}` at interior nodes.
pub fn discrete_residual(v: &[f64], shift: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let mut r = vec![0.0; n];
    for i in 1..n - 1 {
        r[i] = v[i - 1] - 2.0 * v[i] + v[i + 1] - 8.0 * h * h * (v[i] + shift[i]).exp();
    }
    r
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Thomas algorithm for `sub_i y_{i-1} + diag_i y_i + sup_i y_{i+1} = rhs_i` with unit off-diagonals.
fn solve_tridiagonal_unit(diag: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = 1.0 / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..m {
        let denom = diag[i] - c[i - 1];
        c[i] = 1.0 / denom;
        d[i] = (rhs[i] - d[i - 1]) / denom;
    }
    let mut y = vec![0.0; m];
    y[m - 1] = d[m - 1];
    for i in (0..m - 1).rev() {
        y[i] = d[i] - c[i] * y[i + 1];
    }
    y
}

/// Damped Newton on `v'' = 8e^{v+shift}` with the end values of `v` held fixed.
fn newton(v: &mut [f64], shift: &[f64], h: f64, tol: f64, max_iter: usize, history: &mut Vec<f64>) -> Result<usize> {
    let n = v.len();
    let mut res = discrete_residual(v, shift, h);
    let mut norm = sup(&res);
    history.push(norm);
    for it in 1..=max_iter {
        let diag: Vec<f64> = (1..n - 1).map(|i| -2.0 - 8.0 * h * h * (v[i] + shift[i]).exp()).collect();
        let rhs: Vec<f64> = (1..n - 1).map(|i| -res[i]).collect();
        let delta = solve_tridiagonal_unit(&diag, &rhs);
        let step = sup(&delta);
        let mut damping = 1.0;
        let mut accepted = false;
        for _ in 0..=20 {
            let trial: Vec<f64> =
                (0..n).map(|i| if i == 0 || i == n - 1 { v[i] } else { v[i] + damping * delta[i - 1] }).collect();
            let tres = discrete_residual(&trial, shift, h);
            let tnorm = sup(&tres);
            if tnorm.is_finite() && (tnorm <= norm || tnorm <= tol) {
                v.copy_from_slice(&trial);
                res = tres;
                norm = tnorm;
                accepted = true;
                break;
            }
            damping *= 0.5;
        }
        history.push(norm);
        if !accepted {
            if v.iter().all(|x| x.is_finite()) {
                return Err(LabError::NonConvergence { iterations: it, last: norm, history: history.clone() });
            }
            return Err(LabError::PositivityLost { history: history.clone() });
        }
        if norm <= tol && step * damping <= tol {
            return Ok(it);
        }
    }
    Err(LabError::NonConvergence { iterations: max_iter, last: norm, history: history.clone() })
}

struct PlainSolve {
    x: Vec<f64>,
    v: Vec<f64>,
    iterations: usize,
}

fn solve_on_grid(model: Model, cfg: &SolverConfig, n: usize, c: f64, history: &mut Vec<f64>) -> Result<PlainSolve> {
    let (x0, x1) = cfg.x_range();
    let x = grid(x0, x1, n);
    let h = x[1] - x[0];
    let mut v: Vec<f64> = x.iter().map(|&xi| model.v(xi)).collect();
    if let Boundary::Custom { log_lambda_min, log_lambda_max } = cfg.boundary {
        // Model guess corrected linearly to the prescribed end values.
        let a = log_lambda_min + 2.0 * x0 - v[0];
        let b = log_lambda_max + 2.0 * x1 - v[n - 1];
        for (i, vi) in v.iter_mut().enumerate() {
            let s = i as f64 / (n - 1) as f64;
            *vi += a + (b - a) * s;
        }
    }
    let shift: Vec<f64> = x.iter().map(|&xi| cfg.perturbation.eval(xi, x0, x1) + c).collect();
    let iterations = newton(&mut v, &shift, h, cfg.tol, cfg.max_iter, history)?;
    Ok(PlainSolve { x, v, iterations })
}

/// Solves on `cfg.grid` points; with `cfg.richardson` the result is `(4 fine - coarse)/3`
/// from grids of `N` and `2N - 1` points.
pub fn solve_radial_ke(model: Model, cfg: &SolverConfig) -> Result<SolverState> {
    cfg.validate()?;
    let (x0, x1) = cfg.x_range();
    let n = cfg.grid;
    let x = grid(x0, x1, n);
    let f: Vec<f64> = x.iter().map(|&xi| cfg.perturbation.eval(xi, x0, x1)).collect();
    let c = normalization_constant(&x, model, &f);
    let mut history = Vec::new();
    let coarse = solve_on_grid(model, cfg, n, c, &mut history)?;
    let (v, iterations) = if cfg.richardson {
        let fine = solve_on_grid(model, cfg, 2 * n - 1, c, &mut history)?;
        let v: Vec<f64> = (0..n).map(|i| (4.0 * fine.v[2 * i] - coarse.v[i]) / 3.0).collect();
        (v, coarse.iterations.max(fine.iterations))
    } else {
        (coarse.v, coarse.iterations)
    };
    let log_lambda: Vec<f64> = v.iter().zip(&coarse.x).map(|(vi, xi)| vi - 2.0 * xi).collect();
    if log_lambda.iter().any(|l| !l.is_finite()) {
        return Err(LabError::PositivityLost { history });
    }
    let log_lambda_model: Vec<f64> = x.iter().map(|&xi| model.v(xi) - 2.0 * xi).collect();
    let phi = (0..n).map(|i| log_lambda[i] - log_lambda_model[i] - f[i] - c).collect();
    Ok(SolverState {
        model,
        x,
        log_lambda,
        log_lambda_model,
        perturbation: f,
        phi,
        normalization: c,
        residual_history: history,
        iterations,
    })
}

/// Sup-norm of the `h²`-unscaled residual of the exact model on `n` nodes, `F = 0`.
pub fn model_truncation_residual(model: Model, cfg: &SolverConfig, n: usize) -> f64 {
    let (x0, x1) = cfg.x_range();
    let x = grid(x0, x1, n);
    let h = x[1] - x[0];
    let v: Vec<f64> = x.iter().map(|&xi| model.v(xi)).collect();
    sup(&discrete_residual(&v, &vec![0.0; n], h)) / (h * h)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    /// `sup_K |λ_β/λ_0 - 1|`.
    pub c0: f64,
    /// `sup_K |∂_x log λ_β - ∂_x log λ_0|`.
    pub c1: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub r_inner: f64,
    pub r_outer: f64,
    pub rows: Vec<SweepRow>,
    pub c0_non_increasing: bool,
    pub c1_non_increasing: bool,
    /// Fraction of `K` where `Φ_β + φ_β + β log t` does not decrease between consecutive ladder entries.
    pub remark_monotone_fraction: f64,
}

/// Local convergence of the solutions to the cusp solution on `r_inner ≤ r ≤ r_outer`.
pub fn beta_sweep_convergence(betas: &[f64], r_inner: f64, r_outer: f64, cfg: &SolverConfig) -> Result<SweepTable> {
    if !(cfg.r_min < r_inner && r_inner < r_outer && r_outer < cfg.r_max) {
        return Err(LabError::Config(format!("K = [{r_inner}, {r_outer}] not inside the solve annulus")));
    }
    let cusp = solve_radial_ke(Model::Cusp, cfg)?;
    let states: Vec<SolverState> = betas
        .par_iter()
        .map(|&b| if b == 0.0 { Ok(cusp.clone()) } else { solve_radial_ke(Model::from_beta(b)?, cfg) })
        .collect::<Result<_>>()?;
    let d0 = cusp.dlog_lambda();
    let inside: Vec<usize> = (0..cusp.x.len()).filter(|&i| (r_inner.ln()..=r_outer.ln()).contains(&cusp.x[i])).collect();
    let mut rows = Vec::new();
    for (b, s) in betas.iter().zip(&states) {
        let db = s.dlog_lambda();
        let c0 = inside.iter().map(|&i| (s.log_lambda[i] - cusp.log_lambda[i]).exp_m1().abs()).fold(0.0, f64::max);
        let c1 = inside.iter().map(|&i| (db[i] - d0[i]).abs()).fold(0.0, f64::max);
        rows.push(SweepRow { beta: *b, c0, c1, iterations: s.iterations });
    }
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[b].beta.partial_cmp(&rows[a].beta).unwrap());
    let c0_non_increasing = order.windows(2).all(|w| rows[w[1]].c0 <= rows[w[0]].c0);
    let c1_non_increasing = order.windows(2).all(|w| rows[w[1]].c1 <= rows[w[0]].c1);
    let total = |s: &SolverState, i: usize| s.model.doubled_potential(s.x[i]) + s.phi[i] + s.model.beta() * 2.0 * s.x[i];
    let mut good = 0usize;
    let mut count = 0usize;
    for w in order.windows(2) {
        for &i in &inside {
            count += 1;
            if total(&states[w[1]], i) >= total(&states[w[0]], i) {
                good += 1;
            }
        }
    }
    let remark_monotone_fraction = if count == 0 { 1.0 } else { good as f64 / count as f64 };
    Ok(SweepTable { r_inner, r_outer, rows, c0_non_increasing, c1_non_increasing, remark_monotone_fraction })
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioRow {
    pub beta: f64,
    pub sup_ratio: f64,
    pub inf_ratio: f64,
    pub normalization: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub rows: Vec<RatioRow>,
    /// Smallest `C` with every ratio in `[1/C, C]`.
    pub constant: f64,
    /// `max/min` of the per-β sup ratios.
    pub spread: f64,
}

/// `λ_solved/λ_model` over the annulus for each `β` of the ladder.
pub fn verify_uniform_equivalence(betas: &[f64], cfg: &SolverConfig) -> Result<EquivalenceReport> {
    let rows: Vec<RatioRow> = betas
        .par_iter()
        .map(|&b| {
            let s = solve_radial_ke(Model::from_beta(b)?, cfg)?;
            let ratios: Vec<f64> = (0..s.x.len()).map(|i| s.ratio(i)).collect();
            Ok(RatioRow {
                beta: b,
                sup_ratio: ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                inf_ratio: ratios.iter().cloned().fold(f64::INFINITY, f64::min),
                normalization: s.normalization,
            })
        })
        .collect::<Result<_>>()?;
    let constant = rows.iter().map(|r| r.sup_ratio.max(1.0 / r.inf_ratio)).fold(1.0, f64::max);
    let hi = rows.iter().map(|r| r.sup_ratio).fold(f64::NEG_INFINITY, f64::max);
    let lo = rows.iter().map(|r| r.sup_ratio).fold(f64::INFINITY, f64::min);
    Ok(EquivalenceReport { rows, constant, spread: hi / lo })
}

#[derive(Debug, Clone, Serialize)]
pub struct AprioriReport {
    pub beta: f64,
    /// `min (Φ_model + φ + log log² t)`.
    pub lower_bound_min: f64,
    /// `max(0, -lower_bound_min)`.
    pub lower_bound_constant: f64,
    /// Whether the minimum sits at an interior node.
    pub min_interior: bool,
    /// Second difference of the lower-bound function at its minimum (interior only).
    pub second_difference_at_min: f64,
    pub phi_min: f64,
    pub phi_max: f64,
    /// `sup |φ|`.
    pub sup_bound_constant: f64,
    /// Smallest exponent `A ≥ 0` keeping `λ r² (-log r²)^{-A}` non-increasing toward the divisor.
    pub growth_exponent: f64,
    /// `sup λ r² (-log r²)^{-A}`.
    pub growth_constant: f64,
}

impl AprioriReport {
    pub fn constants(&self) -> [f64; 3] {
        [self.lower_bound_constant, self.sup_bound_constant, self.growth_constant]
    }
}

/// Lower bound by the cusp potential, uniform bound on the normalized potential, and
/// polynomial-in-log growth of the metric against the flat one.
pub fn verify_apriori_bounds(state: &SolverState) -> AprioriReport {
    let n = state.x.len();
    let model = state.model;
    let psi: Vec<f64> = (0..n)
        .map(|i| {
            let lt = 2.0 * state.x[i];
            model.doubled_potential(state.x[i]) + state.phi[i] + (lt * lt).ln()
        })
        .collect();
    let (imin, &lower_bound_min) = psi.iter().enumerate().min_by(|a, b| a.1.partial_cmp(b.1).unwrap()).unwrap();
    let min_interior = imin > 0 && imin < n - 1;
    let second_difference_at_min = if min_interior { psi[imin - 1] - 2.0 * psi[imin] + psi[imin + 1] } else { 0.0 };
    let phi_min = state.phi.iter().cloned().fold(f64::INFINITY, f64::min);
    let phi_max = state.phi.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // log(λ r²) against s = log(-log r²).
    let logq: Vec<f64> = (0..n).map(|i| state.log_lambda[i] + 2.0 * state.x[i]).collect();
    let s: Vec<f64> = state.x.iter().map(|&x| (-2.0 * x).ln()).collect();
    let mut slope: f64 = 0.0;
    for i in 0..n - 1 {
        slope = slope.max((logq[i + 1] - logq[i]) / (s[i + 1] - s[i]));
    }
    let growth_exponent = slope.max(0.0);
    let growth_constant = (0..n).map(|i| (logq[i] - growth_exponent * s[i]).exp()).fold(0.0, f64::max);
    AprioriReport {
        beta: model.beta(),
        lower_bound_min,
        lower_bound_constant: (-lower_bound_min).max(0.0),
        min_interior,
        second_difference_at_min,
        phi_min,
        phi_max,
        sup_bound_constant: phi_min.abs().max(phi_max.abs()),
        growth_exponent,
        growth_constant,
    }
}

/// `max/min` over positive values, treating values below `floor` as `floor`.
pub fn stability_spread(values: &[f64], floor: f64) -> f64 {
    let hi = values.iter().map(|v| v.max(floor)).fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().map(|v| v.max(floor)).fold(f64::INFINITY, f64::min);
    hi / lo
}
