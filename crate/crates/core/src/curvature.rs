//! Chern curvature of hermitian metric fields by nested finite differences,
//! holomorphic bisectional curvature over unit vectors, and inverse-metric
//! asymptotics of the reference conic metric.
//!
//! Derivatives are taken in the chart `(log z₁, z₂, …, z_n)`, where the conic
//! and cusp singular factors vary on a unit scale, and the tensor is pulled back
//! to the `z` coordinates. Curvature is tensorial under holomorphic changes of
//! coordinates, so the chart only affects the truncation error.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::fd;
use crate::linalg::{self, CMat, C64};
use crate::metric::{self, BackgroundData};
use crate::special::{self, ConeAngle};

/// A hermitian metric `g_{ij̄}(z)` on (part of) the unit polydisk.
pub trait MetricField: Sync {
    fn dim(&self) -> usize;
    fn metric(&self, z: &[C64]) -> Result<CMat>;
    /// Whether the field degenerates along `z₁ = 0`; such fields are differentiated in the log chart.
    fn singular_along_divisor(&self) -> bool {
        true
    }
}

pub struct Euclidean(pub usize);

impl MetricField for Euclidean {
    fn dim(&self) -> usize {
        self.0
    }
    fn metric(&self, _z: &[C64]) -> Result<CMat> {
        Ok(CMat::identity(self.0, self.0))
    }
    fn singular_along_divisor(&self) -> bool {
        false
    }
}

/// Disk model in `z₁`, euclidean in the other variables.
pub struct PolydiskModel {
    pub n: usize,
    pub beta: ConeAngle,
}

impl MetricField for PolydiskModel {
    fn dim(&self) -> usize {
        self.n
    }
    fn metric(&self, z: &[C64]) -> Result<CMat> {
        metric::eval_polydisk_model(z, self.beta)
    }
}

pub struct ReferenceConic<'a> {
    pub beta: f64,
    pub bg: &'a BackgroundData,
}

impl MetricField for ReferenceConic<'_> {
    fn dim(&self) -> usize {
        self.bg.n
    }
    fn metric(&self, z: &[C64]) -> Result<CMat> {
        metric::reference_conic_matrix(z, self.beta, self.bg)
    }
}

/// A rotation-invariant conformal metric `λ(|z|)|dz|²`, given through `log λ` as a function of `x = log|z|`.
pub trait RadialMetric {
    fn log_lambda_x(&self, x: f64) -> f64;
}

#[derive(Debug, Clone, Copy)]
pub enum RadialModel {
    Conic(ConeAngle),
    Poincare,
    Flat,
}

impl RadialMetric for RadialModel {
    fn log_lambda_x(&self, x: f64) -> f64 {
        match *self {
            RadialModel::Conic(b) => metric::log_disk_model_x(x, b.value()),
            RadialModel::Poincare => metric::log_poincare_x(x),
            RadialModel::Flat => 0.0,
        }
    }
}

impl<F: Fn(f64) -> f64> RadialMetric for F {
    fn log_lambda_x(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Gaussian curvature `K = -(2/λ) ∂∂̄ log λ = -½ e^{-2x} (log λ)_xx / λ` at `z`.
pub fn gauss_curvature_radial(m: &dyn RadialMetric, z: C64) -> Result<f64> {
    let r = z.norm();
    if !(r > 0.0 && r < 1.0) {
        return Err(domain("|z|", r));
    }
    let x = r.ln();
    // Keeps the stencil `x ± 2h` inside `x < 0`.
    let h = (1e-2f64).min(x.abs() / 64.0);
    let f = |s: f64| m.log_lambda_x(s);
    let lxx = fd::deriv2(f, x, h);
    let ll = f(x);
    if !(lxx.is_finite() && ll.is_finite()) {
        return Err(LabError::StencilOutOfDomain { context: "radial metric not finite on the stencil" });
    }
    Ok(-0.5 * (-2.0 * x - ll).exp() * lxx)
}

/// `R_{ij̄kl̄}` stored as an `n² × n²` matrix with row `i n + j` and column `k n + l`.
#[derive(Debug, Clone)]
pub struct CurvatureTensor {
    pub point: Vec<C64>,
    pub n: usize,
    pub comps: CMat,
    /// Metric at the point, for unit-vector normalization.
    pub g: CMat,
}

impl CurvatureTensor {
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> C64 {
        self.comps[(i * self.n + j, k * self.n + l)]
    }

    /// Largest relative violation of `R_{ij̄kl̄} = R_{kj̄il̄} = R_{il̄kj̄} = conj(R_{jīlk̄})`.
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.n;
        let scale = linalg::max_abs(&self.comps).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let r = self.get(i, j, k, l);
                        worst = worst
                            .max((r - self.get(k, j, i, l)).norm())
                            .max((r - self.get(i, l, k, j)).norm())
                            .max((r - self.get(j, i, l, k).conj()).norm());
                    }
                }
            }
        }
        worst / scale
    }

    /// `Σ R_{ij̄kl̄} u_i ū_j v_k v̄_l`.
    pub fn bisectional(&self, u: &[C64], v: &[C64]) -> f64 {
        let n = self.n;
        let mut s = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let uu = u[i] * u[j].conj();
                for k in 0..n {
                    for l in 0..n {
                        s += self.get(i, j, k, l) * uu * v[k] * v[l].conj();
                    }
                }
            }
        }
        s.re
    }

    /// Components in a `g`-orthonormal frame `e_a = Σ_i M_{ia} ∂_i`, `M = L^{-H}`.
    pub fn in_unitary_frame(&self) -> Result<CMat> {
        let n = self.n;
        let l = linalg::cholesky(&self.g, "curvature frame")?;
        let m = linalg::inverse(&l, "curvature frame")?.adjoint();
        let mut out = CMat::zeros(n * n, n * n);
        // Contract one index at a time.
        let mut cur = self.comps.clone();
        for slot in 0..4 {
            let mut next = CMat::zeros(n * n, n * n);
            for idx in 0..n * n * n * n {
                let mut ix = [idx / (n * n * n), (idx / (n * n)) % n, (idx / n) % n, idx % n];
                let target = ix[slot];
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..n {
                    ix[slot] = s;
                    let coef = if slot % 2 == 0 { m[(s, target)] } else { m[(s, target)].conj() };
                    acc += coef * cur[(ix[0] * n + ix[1], ix[2] * n + ix[3])];
                }
                ix[slot] = target;
                next[(ix[0] * n + ix[1], ix[2] * n + ix[3])] = acc;
            }
            cur = next;
        }
        out.copy_from(&cur);
        Ok(out)
    }
}

/// Default step of the nested differences in the `(log z₁, z')` chart.
pub const DEFAULT_FD_STEP: f64 = 0.02;

/// Chern curvature of `field` at `p` with `R = -∂_k∂̄_l G + (∂_k G) G⁻¹ (∂̄_l G)`.
///
/// Singular fields use the chart `(log z₁, z')` with step `h`; smooth fields use
/// `z` itself with step `min(1e-3, |z₁|/10)`.
pub fn curvature_tensor(field: &dyn MetricField, p: &[C64], h: f64) -> Result<CurvatureTensor> {
    let n = field.dim();
    if p.len() != n {
        return Err(LabError::Config(format!("point has dimension {}, field {n}", p.len())));
    }
    let r1 = p[0].norm();
    if r1 == 0.0 {
        return Err(LabError::StencilOutOfDomain { context: "point on the divisor" });
    }
    let log_chart = field.singular_along_divisor();
    let h = if log_chart { h } else { (1e-3f64).min(r1 / 10.0) };
    let reach = 2.0 * h * std::f64::consts::SQRT_2;
    let transverse = p[1..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let first_ok = if log_chart { r1 * reach.exp() < 1.0 } else { r1 + reach < 1.0 };
    if transverse + reach >= 1.0 || !first_ok {
        return Err(LabError::StencilOutOfDomain { context: "stencil leaves the unit polydisk" });
    }
    let comps = if log_chart {
        let zeta0: Vec<C64> = std::iter::once(p[0].ln()).chain(p[1..].iter().copied()).collect();
        let pulled = |w: &[C64]| -> Result<CMat> {
            let z1 = w[0].exp();
            let z: Vec<C64> = std::iter::once(z1).chain(w[1..].iter().copied()).collect();
            let mut g = field.metric(&z)?;
            // G = D^T g D̄ with D = diag(z₁, 1, …).
            for j in 0..n {
                g[(0, j)] *= z1;
                g[(j, 0)] *= z1.conj();
            }
            Ok(g)
        };
        let mut comps = chern_from_jet(&fd::complex_jet(&pulled, &zeta0, h)?, n)?;
        // Back to z: each index equal to 0 picks up 1/z₁ or its conjugate.
        let inv = p[0].inv();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut f = C64::new(1.0, 0.0);
                        for (idx, conj) in [(i, false), (j, true), (k, false), (l, true)] {
                            if idx == 0 {
                                f *= if conj { inv.conj() } else { inv };
                            }
                        }
                        comps[(i * n + j, k * n + l)] *= f;
                    }
                }
            }
        }
        comps
    } else {
        let direct = |z: &[C64]| field.metric(z);
        chern_from_jet(&fd::complex_jet(&direct, p, h)?, n)?
    };
    let g = field.metric(p)?;
    Ok(CurvatureTensor { point: p.to_vec(), n, comps, g })
}

fn chern_from_jet(jet: &fd::ComplexJet, n: usize) -> Result<CMat> {
    let g_inv = linalg::inverse(&jet.value, "metric in curvature chart")?;
    let mut comps = CMat::zeros(n * n, n * n);
    for k in 0..n {
        for l in 0..n {
            let block = &jet.d[k] * &g_inv * &jet.dbar[l] - &jet.ddbar[k][l];
            for i in 0..n {
                for j in 0..n {
                    comps[(i * n + j, k * n + l)] = block[(i, j)];
                }
            }
        }
    }
    Ok(comps)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvatureConfig {
    pub fd_step: f64,
    pub restarts: usize,
    pub max_iter: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for CurvatureConfig {
    fn default() -> Self {
        CurvatureConfig { fd_step: DEFAULT_FD_STEP, restarts: 16, max_iter: 500, grad_tol: 1e-8, seed: crate::conventions::DEFAULT_SEED }
    }
}

/// `H(b)_{ac} = Σ R_{ab̄cd̄}…` contracted against `w ⊗ w̄` in the second pair.
fn contract_second(r: &CMat, n: usize, w: &[C64]) -> CMat {
    CMat::from_fn(n, n, |a, b| {
        let mut s = C64::new(0.0, 0.0);
        for c in 0..n {
            for d in 0..n {
                s += r[(a * n + b, c * n + d)] * w[c] * w[d].conj();
            }
        }
        s
    })
}

fn contract_first(r: &CMat, n: usize, w: &[C64]) -> CMat {
    CMat::from_fn(n, n, |c, d| {
        let mut s = C64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                s += r[(a * n + b, c * n + d)] * w[a] * w[b].conj();
            }
        }
        s
    })
}

/// `Σ_{ab} H_{ab} x_a x̄_b` and its ascent direction `2 H^T x`.
fn quad(h: &CMat, x: &[C64]) -> (f64, Vec<C64>) {
    let n = x.len();
    let mut val = C64::new(0.0, 0.0);
    let mut grad = vec![C64::new(0.0, 0.0); n];
    for a in 0..n {
        for b in 0..n {
            val += h[(a, b)] * x[a] * x[b].conj();
            grad[b] += h[(a, b)] * x[a] * 2.0;
        }
    }
    (val.re, grad)
}

fn normalize(x: &mut [C64]) {
    let s = linalg::vec_norm(x);
    x.iter_mut().for_each(|z| *z /= s);
}

fn tangent(x: &[C64], g: &[C64]) -> Vec<C64> {
    let ip: C64 = x.iter().zip(g).map(|(a, b)| a.conj() * b).sum();
    g.iter().zip(x).map(|(gi, xi)| gi - xi * ip).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    let mut x: Vec<C64> = (0..n).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    normalize(&mut x);
    x
}

/// Result of the unit-vector maximization at one point.
#[derive(Debug, Clone, Serialize)]
pub struct BisectionalMax {
    pub sup_abs: f64,
    pub max: f64,
    pub min: f64,
    pub iterations: usize,
}

/// `sup |R(u,ū,v,v̄)|` over `g`-unit vectors by projected gradient ascent of `±f`
/// on the product of unit spheres in an orthonormal frame.
pub fn maximize_bisectional(tensor: &CurvatureTensor, cfg: &CurvatureConfig, stream: u64) -> Result<BisectionalMax> {
    let n = tensor.n;
    let r = tensor.in_unitary_frame()?;
    let scale = linalg::max_abs(&r);
    if scale == 0.0 {
        return Ok(BisectionalMax { sup_abs: 0.0, max: 0.0, min: 0.0, iterations: 0 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(stream);
    let mut best_max = f64::NEG_INFINITY;
    let mut best_min = f64::INFINITY;
    let mut total_iter = 0;
    for _ in 0..cfg.restarts {
        let start_a = random_unit(&mut rng, n);
        let start_b = random_unit(&mut rng, n);
        for sign in [1.0, -1.0] {
            let (mut a, mut b) = (start_a.clone(), start_b.clone());
            let value = |a: &[C64], b: &[C64]| sign * quad(&contract_second(&r, n, b), a).0;
            let mut f = value(&a, &b);
            let mut step = 0.5 / scale;
            for _ in 0..cfg.max_iter {
                total_iter += 1;
                let ga = tangent(&a, &quad(&contract_second(&r, n, &b), &a).1);
                let gb = tangent(&b, &quad(&contract_first(&r, n, &a), &b).1);
                let gnorm = (linalg::vec_norm(&ga).powi(2) + linalg::vec_norm(&gb).powi(2)).sqrt();
                if gnorm < cfg.grad_tol * scale {
                    break;
                }
                let mut accepted = false;
                for _ in 0..60 {
                    let mut na: Vec<C64> = a.iter().zip(&ga).map(|(x, g)| x + g * (sign * step)).collect();
                    let mut nb: Vec<C64> = b.iter().zip(&gb).map(|(x, g)| x + g * (sign * step)).collect();
                    normalize(&mut na);
                    normalize(&mut nb);
                    let nf = value(&na, &nb);
                    if nf >= f {
                        a = na;
                        b = nb;
                        f = nf;
                        step *= 1.5;
                        accepted = true;
                        break;
                    }
                    step *= 0.5;
                }
                if !accepted {
                    break;
                }
            }
            let raw = sign * f;
            best_max = best_max.max(raw);
            best_min = best_min.min(raw);
        }
    }
    Ok(BisectionalMax { sup_abs: best_max.abs().max(best_min.abs()), max: best_max, min: best_min, iterations: total_iter })
}

/// Point set of the uniformity check: `|z₁|² ∈ {1e-2, 1e-4, 1e-6, 1e-8}` times
/// `per_level` random transverse positions with `|z_k| ≤ 0.5`.
pub fn standard_samples(n: usize, per_level: usize, seed: u64) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tau = std::f64::consts::TAU;
    let mut out = Vec::new();
    for &r2 in &[1e-2, 1e-4, 1e-6, 1e-8f64] {
        for _ in 0..per_level {
            let mut z = vec![C64::from_polar(r2.sqrt(), rng.gen_range(0.0..tau))];
            for _ in 1..n {
                z.push(C64::from_polar(0.5 * rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..tau)));
            }
            out.push(z);
        }
    }
    out
}

/// Inverse-metric diagnostics in the coordinates `z₁' = z₁ e^{-φ_h(p)/2 - Σ ∂_kφ_h(p)(z_k - p_k)}`, `z_k' = z_k`,
/// in which the weight vanishes to first order at `p`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InverseMetricRatios {
    pub log_t: f64,
    /// `g^{1̄1} A(t)`.
    pub g11_ratio: f64,
    /// `max_k |g^{k̄1}| / (t^{1-β} log² t)`, zero when `n = 1`.
    pub offdiag_ratio: f64,
}

pub fn inverse_metric_ratios(p: &[C64], beta: f64, bg: &BackgroundData) -> Result<InverseMetricRatios> {
    let n = bg.n;
    let g = metric::reference_conic_matrix(p, beta, bg)?;
    let g_inv = linalg::inverse(&g, "reference conic metric")?;
    let dphi = bg.dphi(p);
    let s = (-0.5 * bg.phi(p)).exp();
    let mut jac = CMat::identity(n, n);
    for k in 0..n {
        let delta = if k == 0 { 1.0 } else { 0.0 };
        jac[(0, k)] = (C64::from(delta) - p[0] * dphi[k]) * s;
    }
    // Contravariant: (g')^{-1} = J g^{-1} J^H in the index order of `g_inv`.
    let gi = &jac * g_inv.transpose() * jac.adjoint();
    let log_t = bg.log_section_norm_sq(p);
    let a = special::a_raw(log_t, beta);
    let denom = ((1.0 - beta) * log_t).exp() * log_t * log_t;
    let off = (1..n).map(|k| gi[(k, 0)].norm()).fold(0.0, f64::max);
    Ok(InverseMetricRatios { log_t, g11_ratio: gi[(0, 0)].re * a, offdiag_ratio: off / denom })
}

/// Point with `|s|² = t` at transverse position `rest`, found by fixed-point iteration on `|z₁|`.
pub fn point_with_section_norm(t: f64, phase: f64, rest: &[C64], bg: &BackgroundData) -> Result<Vec<C64>> {
    let mut z: Vec<C64> = std::iter::once(C64::from_polar(t.sqrt(), phase)).chain(rest.iter().copied()).collect();
    for _ in 0..100 {
        let r = (t * bg.phi(&z).exp()).sqrt();
        let prev = z[0].norm();
        z[0] = C64::from_polar(r, phase);
        if (r - prev).abs() <= 1e-15 * r {
            break;
        }
    }
    if z[0].norm() >= 1.0 {
        return Err(domain("|s|² (no point in the patch)", t));
    }
    Ok(z)
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseMetricReport {
    pub beta: f64,
    pub rows: Vec<InverseMetricRatios>,
    pub max_offdiag_ratio: f64,
}

/// Ratios along a `t` grid at a fixed transverse position.
pub fn inverse_metric_asymptotics(beta: ConeAngle, bg: &BackgroundData, ts: &[f64]) -> Result<InverseMetricReport> {
    let rest: Vec<C64> = (1..bg.n).map(|k| C64::from_polar(0.3, 0.7 * k as f64)).collect();
    let mut rows = Vec::new();
    for &t in ts {
        if !(t > 0.0 && t <= 0.25) {
            return Err(domain("t", t));
        }
        let p = point_with_section_norm(t, 0.4, &rest, bg)?;
        rows.push(inverse_metric_ratios(&p, beta.value(), bg)?);
    }
    let max_offdiag_ratio = rows.iter().map(|r| r.offdiag_ratio).fold(0.0, f64::max);
    Ok(InverseMetricReport { beta: beta.value(), rows, max_offdiag_ratio })
}

/// One CSV row of a curvature report.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureRow {
    pub beta: f64,
    pub point_id: usize,
    pub log_t: f64,
    pub sup_bisec: f64,
    pub g11_ratio: f64,
    pub offdiag_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub beta: f64,
    pub rows: Vec<CurvatureRow>,
    pub sup: f64,
    pub max_symmetry_residual: f64,
}

/// Bisectional supremum of the reference conic metric over `samples`.
pub fn bisectional_sup(beta: ConeAngle, bg: &BackgroundData, samples: &[Vec<C64>], cfg: &CurvatureConfig) -> Result<CurvatureReport> {
    let field = ReferenceConic { beta: beta.value(), bg };
    let results: Vec<Result<(CurvatureRow, f64)>> = samples
        .par_iter()
        .enumerate()
        .map(|(id, p)| {
            let tensor = curvature_tensor(&field, p, cfg.fd_step)?;
            let best = maximize_bisectional(&tensor, cfg, id as u64)?;
            let inv = inverse_metric_ratios(p, beta.value(), bg)?;
            let row = CurvatureRow {
                beta: beta.value(),
                point_id: id,
                log_t: inv.log_t,
                sup_bisec: best.sup_abs,
                g11_ratio: inv.g11_ratio,
                offdiag_ratio: inv.offdiag_ratio,
            };
            Ok((row, tensor.symmetry_residual()))
        })
        .collect();
    let mut rows = Vec::with_capacity(samples.len());
    let mut sym: f64 = 0.0;
    for r in results {
        let (row, s) = r?;
        if !row.sup_bisec.is_finite() {
            return Err(LabError::Divergent(format!("bisectional sup at point {}", row.point_id)));
        }
        sym = sym.max(s);
        rows.push(row);
    }
    let sup = rows.iter().map(|r| r.sup_bisec).fold(0.0, f64::max);
    Ok(CurvatureReport { beta: beta.value(), rows, sup, max_symmetry_residual: sym })
}

#[derive(Debug, Clone, Serialize)]
pub struct UniformityCheck {
    pub per_beta: Vec<(f64, f64)>,
    /// Recorded ceiling: the largest per-β sup.
    pub ceiling: f64,
    /// `max/min` of the per-β sups.
    pub spread: f64,
    /// Sups strictly increase as `β` decreases along the whole ladder.
    pub monotone_growth: bool,
}

impl UniformityCheck {
    pub fn from_reports(reports: &[CurvatureReport]) -> Self {
        let per_beta: Vec<(f64, f64)> = reports.iter().map(|r| (r.beta, r.sup)).collect();
        let ceiling = per_beta.iter().map(|p| p.1).fold(0.0, f64::max);
        let floor = per_beta.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let mut sorted = per_beta.clone();
        sorted.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        let monotone_growth = sorted.len() > 1 && sorted.windows(2).all(|w| w[1].1 > w[0].1);
        UniformityCheck { per_beta, ceiling, spread: ceiling / floor, monotone_growth }
    }

    pub fn passes(&self, max_spread: f64) -> bool {
        self.spread <= max_spread && !self.monotone_growth
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::WeightKind;

    fn cb(b: f64) -> ConeAngle {
        ConeAngle::new(b).unwrap()
    }

    #[test]
    fn gauss_curvature_of_models() {
        for &b in &[0.01, 0.05, 0.1, 0.25, 0.5, 1.0] {
            for &r in &[1e-4, 0.01, 0.2, 0.5, 0.9] {
                let k = gauss_curvature_radial(&RadialModel::Conic(cb(b)), C64::new(r, 0.0)).unwrap();
                assert!((k + 4.0).abs() < 1e-6, "b={b} r={r} K={k}");
            }
        }
        for &r in &[1e-6, 0.01, 0.3, 0.9] {
            let k = gauss_curvature_radial(&RadialModel::Poincare, C64::new(0.0, r)).unwrap();
            assert!((k + 4.0).abs() < 1e-6);
        }
        assert_eq!(gauss_curvature_radial(&RadialModel::Flat, C64::new(0.5, 0.0)).unwrap(), 0.0);
        assert!(gauss_curvature_radial(&RadialModel::Flat, C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn euclidean_tensor_vanishes() {
        let p = [C64::new(0.01, 0.02), C64::new(0.3, -0.1)];
        let t = curvature_tensor(&Euclidean(2), &p, DEFAULT_FD_STEP).unwrap();
        assert!(linalg::max_abs(&t.comps) < 1e-8);
        let best = maximize_bisectional(&t, &CurvatureConfig::default(), 0).unwrap();
        assert!(best.sup_abs < 1e-8);
    }

    #[test]
    fn disk_model_component_matches_gauss_curvature() {
        for &b in &[0.05, 0.25, 0.5] {
            for &r in &[1e-4, 0.05, 0.5] {
                let z = C64::from_polar(r, 1.1);
                let t = curvature_tensor(&PolydiskModel { n: 1, beta: cb(b) }, &[z], DEFAULT_FD_STEP).unwrap();
                let lam = metric::eval_disk_model(z, cb(b)).unwrap();
                let k_tensor = 2.0 * t.get(0, 0, 0, 0).re / (lam * lam);
                let k = gauss_curvature_radial(&RadialModel::Conic(cb(b)), z).unwrap();
                assert!((k_tensor - k).abs() < 1e-4 * k.abs(), "b={b} r={r} {k_tensor} {k}");
            }
        }
    }

    #[test]
    fn polydisk_model_bisectional_range() {
        let field = PolydiskModel { n: 2, beta: cb(0.2) };
        let p = [C64::new(1e-3, 1e-3), C64::new(0.2, 0.1)];
        let t = curvature_tensor(&field, &p, DEFAULT_FD_STEP).unwrap();
        let best = maximize_bisectional(&t, &CurvatureConfig::default(), 3).unwrap();
        assert!((best.min + 2.0).abs() < 1e-6, "{best:?}");
        assert!(best.max.abs() < 1e-6);
    }

    #[test]
    fn reference_tensor_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for kind in [WeightKind::Quadratic, WeightKind::CrossTerm] {
            let bg = BackgroundData::normalized(2, kind).unwrap();
            let field = ReferenceConic { beta: 0.3, bg: &bg };
            for _ in 0..20 {
                let r2: f64 = 10f64.powf(rng.gen_range(-8.0..-1.0));
                let p = [C64::from_polar(r2.sqrt(), rng.gen_range(0.0..6.28)), C64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..6.28))];
                let t = curvature_tensor(&field, &p, DEFAULT_FD_STEP).unwrap();
                assert!(t.symmetry_residual() < 1e-6, "{kind:?} {}", t.symmetry_residual());
            }
        }
    }

    #[test]
    fn fourth_order_step_refinement() {
        let bg = BackgroundData::normalized(2, WeightKind::CrossTerm).unwrap();
        let field = ReferenceConic { beta: 0.25, bg: &bg };
        let p = [C64::new(0.05, 0.02), C64::new(0.2, -0.1)];
        let r = |h: f64| curvature_tensor(&field, &p, h).unwrap().comps;
        let (a, b, c) = (r(0.2), r(0.1), r(0.05));
        let ratio = linalg::max_abs(&(&a - &b)) / linalg::max_abs(&(&b - &c));
        assert!((12.0..=20.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn flat_one_dimensional_sup_is_half_gauss_curvature() {
        let bg = BackgroundData::normalized(1, WeightKind::Flat).unwrap();
        let shift = bg.shift;
        let radial = move |x: f64| (1.0 + special::a_raw(2.0 * x - shift, 0.3) * (-shift).exp()).ln();
        for &r in &[1e-4, 1e-2, 0.3] {
            let z = C64::new(r, 0.0);
            let rep = bisectional_sup(cb(0.3), &bg, &[vec![z]], &CurvatureConfig::default()).unwrap();
            let k = gauss_curvature_radial(&radial, z).unwrap();
            assert!((rep.sup - 0.5 * k.abs()).abs() < 1e-6 * k.abs(), "{} {}", rep.sup, k);
        }
    }

    #[test]
    fn bisectional_matches_eigen_bound() {
        // For fixed v, the u-extremes are eigenvalues; the optimizer must not miss them.
        let bg = BackgroundData::normalized(2, WeightKind::CrossTerm).unwrap();
        let field = ReferenceConic { beta: 0.5, bg: &bg };
        let p = [C64::new(1e-3, 0.0), C64::new(0.1, 0.3)];
        let t = curvature_tensor(&field, &p, DEFAULT_FD_STEP).unwrap();
        let r = t.in_unitary_frame().unwrap();
        let best = maximize_bisectional(&t, &CurvatureConfig::default(), 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let v = random_unit(&mut rng, 2);
            let h = contract_second(&r, 2, &v);
            for e in linalg::hermitian_eigenvalues(&h) {
                assert!(e.abs() <= best.sup_abs * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn inverse_metric_flat_identity() {
        let bg = BackgroundData::new(2, WeightKind::Flat).unwrap();
        for &t in &[0.2, 1e-3, 1e-9] {
            let p = point_with_section_norm(t, 0.3, &[C64::new(0.2, 0.2)], &bg).unwrap();
            let g = metric::reference_conic_matrix(&p, 0.3, &bg).unwrap();
            let gi = linalg::inverse(&g, "").unwrap();
            let a = special::a_raw(t.ln(), 0.3);
            assert!((gi[(0, 0)].re * (1.0 + a) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn inverse_metric_asymptotic_bands() {
        let ts: Vec<f64> = (1..=12).map(|k| 10f64.powi(-k)).collect();
        let quad = BackgroundData::normalized(2, WeightKind::Quadratic).unwrap();
        for &b in &[0.1, 0.25, 0.5] {
            let rep = inverse_metric_asymptotics(cb(b), &quad, &ts).unwrap();
            for row in rep.rows.iter().filter(|r| r.log_t <= 1e-4f64.ln() + 1e-12) {
                assert!((0.9..=1.1).contains(&row.g11_ratio), "{b} {row:?}");
            }
        }
        let cross = BackgroundData::normalized(2, WeightKind::CrossTerm).unwrap();
        let sups: Vec<f64> = [0.1, 0.25, 0.5]
            .iter()
            .map(|&b| inverse_metric_asymptotics(cb(b), &cross, &ts).unwrap().max_offdiag_ratio)
            .collect();
        for s in &sups {
            assert!(s.is_finite() && *s > 0.0);
        }
        let spread = sups.iter().cloned().fold(0.0, f64::max) / sups.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(spread < 10.0, "{sups:?}");
    }

    #[test]
    fn standard_samples_are_deterministic() {
        let a = standard_samples(2, 5, 42);
        assert_eq!(a.len(), 20);
        assert_eq!(a, standard_samples(2, 5, 42));
        assert!(a.iter().all(|z| z[1].norm() <= 0.5));
        assert!((a[19][0].norm_sqr() - 1e-8).abs() < 1e-20);
    }
}
