//! Closed-form model metrics: the punctured-disk conic model, the Poincaré metric,
//! the polydisk model, and the reference conic metric on a polydisk patch.

use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::linalg::{self, CMat, C64};
use crate::special::{self, ConeAngle};

/// Built-in hermitian weights `φ_h` on the divisor line bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightKind {
    /// `φ_h ≡ 0`.
    Flat,
    /// `φ_h = ε Σ_{k≥2} |z_k|²`.
    Quadratic,
    /// `φ_h = ε Re(z₁ z̄₂) + ε |z₂|²`.
    CrossTerm,
}

impl std::str::FromStr for WeightKind {
    type Err = LabError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "flat" => Ok(WeightKind::Flat),
            "quadratic" => Ok(WeightKind::Quadratic),
            "cross-term" | "cross" => Ok(WeightKind::CrossTerm),
            _ => Err(LabError::Config(format!("unknown background '{s}'"))),
        }
    }
}

pub const DEFAULT_EPS: f64 = 0.1;

/// Background data on the polydisk patch `{|z_i| < 1}` with `s = z₁`.
///
/// The smooth form is euclidean, `g̃ = Id`. The weight is the built-in `kind`
/// plus the constant `shift`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackgroundData {
    pub n: usize,
    pub kind: WeightKind,
    pub eps: f64,
    pub shift: f64,
}

impl BackgroundData {
    pub fn new(n: usize, kind: WeightKind) -> Result<Self> {
        if n == 0 {
            return Err(LabError::Config("dimension must be ≥ 1".into()));
        }
        if kind == WeightKind::CrossTerm && n < 2 {
            return Err(LabError::Config("cross-term background needs n ≥ 2".into()));
        }
        Ok(BackgroundData { n, kind, eps: DEFAULT_EPS, shift: 0.0 })
    }

    /// Background normalized for the domination `ω_β ≥ ½ω̃`.
    pub fn normalized(n: usize, kind: WeightKind) -> Result<Self> {
        let bg = Self::new(n, kind)?;
        let target = bg.normalization_target();
        Ok(rescale_background(&bg, target))
    }

    pub fn omega(&self, _z: &[C64]) -> CMat {
        CMat::identity(self.n, self.n)
    }

    /// Potential of `g̃` under `dd^c`.
    pub fn omega_potential(&self, z: &[C64]) -> f64 {
        z.iter().map(|w| w.norm_sqr()).sum()
    }

    pub fn phi(&self, z: &[C64]) -> f64 {
        let e = self.eps;
        self.shift
            + match self.kind {
                WeightKind::Flat => 0.0,
                WeightKind::Quadratic => e * z[1..].iter().map(|w| w.norm_sqr()).sum::<f64>(),
                WeightKind::CrossTerm => e * (z[0] * z[1].conj()).re + e * z[1].norm_sqr(),
            }
    }

    /// Holomorphic gradient `∂_k φ_h`.
    pub fn dphi(&self, z: &[C64]) -> Vec<C64> {
        let e = self.eps;
        let mut g = vec![C64::new(0.0, 0.0); self.n];
        match self.kind {
            WeightKind::Flat => {}
            WeightKind::Quadratic => {
                for k in 1..self.n {
                    g[k] = z[k].conj() * e;
                }
            }
            WeightKind::CrossTerm => {
                g[0] = z[1].conj() * (0.5 * e);
                g[1] = z[0].conj() * (0.5 * e) + z[1].conj() * e;
            }
        }
        g
    }

    /// Chern curvature `Θ_{ij̄} = ∂_i ∂̄_j φ_h`.
    pub fn theta(&self, _z: &[C64]) -> CMat {
        let e = self.eps;
        let mut th = CMat::zeros(self.n, self.n);
        match self.kind {
            WeightKind::Flat => {}
            WeightKind::Quadratic => {
                for k in 1..self.n {
                    th[(k, k)] = C64::from(e);
                }
            }
            WeightKind::CrossTerm => {
                th[(0, 1)] = C64::from(0.5 * e);
                th[(1, 0)] = C64::from(0.5 * e);
                th[(1, 1)] = C64::from(e);
            }
        }
        th
    }

    /// `inf φ_h` over the patch, without the shift.
    fn phi_inf_unshifted(&self) -> f64 {
        match self.kind {
            WeightKind::Flat | WeightKind::Quadratic => 0.0,
            // min over |z₂| of ε(|z₂|² - |z₁||z₂|) is -ε|z₁|²/4.
            WeightKind::CrossTerm => -0.25 * self.eps,
        }
    }

    /// `sup |s|² = sup |z₁|² e^{-φ_h}` over the patch.
    pub fn sup_section_norm_sq(&self) -> f64 {
        (-self.phi_inf_unshifted() - self.shift).exp()
    }

    /// `sup tr_{g̃} Θ` over the patch.
    pub fn sup_trace_theta(&self) -> f64 {
        match self.kind {
            WeightKind::Flat => 0.0,
            WeightKind::Quadratic => self.eps * (self.n - 1) as f64,
            WeightKind::CrossTerm => self.eps,
        }
    }

    /// Bound on `|s|²` making `B(t) ≤ δ = (2 sup tr Θ)^{-1}` for every `β`, capped at `e^{-1}`.
    ///
    /// `B(t) = βt^β/(1-t^β)` decreases in `β` with limit `(-log t)^{-1}`, so
    /// `t ≤ e^{-1/δ}` suffices.
    pub fn normalization_target(&self) -> f64 {
        let tr = self.sup_trace_theta();
        let cap = crate::conventions::NORMALIZED_SECTION_BOUND;
        if tr == 0.0 {
            cap
        } else {
            (-2.0 * tr).exp().min(cap)
        }
    }

    /// `log |s|² = log|z₁|² - φ_h(z)`.
    pub fn log_section_norm_sq(&self, z: &[C64]) -> f64 {
        z[0].norm_sqr().ln() - self.phi(z)
    }
}

/// Shifts `φ_h` by a constant so that `sup |s|² = delta` over the patch.
///
/// The supremum over the open polydisk is not attained, so `|s|² < delta` pointwise.
pub fn rescale_background(bg: &BackgroundData, delta: f64) -> BackgroundData {
    let mut out = bg.clone();
    out.shift = -bg.phi_inf_unshifted() - delta.ln();
    out
}

/// Hermitian coefficients at a point together with their inverse.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    pub z: Vec<C64>,
    pub g: CMat,
    pub g_inv: CMat,
}

impl MetricAtPoint {
    pub fn new(z: Vec<C64>, g: CMat, context: &'static str) -> Result<Self> {
        linalg::cholesky(&g, context)?;
        let g_inv = linalg::inverse(&g, context)?;
        Ok(MetricAtPoint { z, g, g_inv })
    }
}

fn check_disk(z: C64) -> Result<f64> {
    let r = z.norm();
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(domain("|z|", r))
    }
}

/// `λ_β(|z|) = A(|z|²)`.
pub fn eval_disk_model(z: C64, beta: ConeAngle) -> Result<f64> {
    let r = check_disk(z)?;
    Ok(special::a_raw(2.0 * r.ln(), beta.value()))
}

/// `log λ_β` as a function of `x = log r`.
pub fn log_disk_model_x(x: f64, beta: f64) -> f64 {
    special::log_a_raw(2.0 * x, beta)
}

/// `λ_P(|z|) = 1/(|z|² log²|z|²)`; `+∞` once `log²|z|²` underflows.
pub fn eval_poincare(z: C64) -> Result<f64> {
    let r = check_disk(z)?;
    let v = poincare_from_log_t(2.0 * r.ln());
    Ok(if v.is_finite() { v } else { f64::INFINITY })
}

pub fn poincare_from_log_t(log_t: f64) -> f64 {
    (-log_t - 2.0 * log_t.abs().ln()).exp()
}

/// `log λ_P` as a function of `x = log r`.
pub fn log_poincare_x(x: f64) -> f64 {
    -2.0 * x - 2.0 * (-2.0 * x).ln()
}

/// Polydisk model: the disk model in `z₁` and euclidean in the rest.
pub fn eval_polydisk_model(z: &[C64], beta: ConeAngle) -> Result<CMat> {
    let mut g = CMat::identity(z.len(), z.len());
    g[(0, 0)] = C64::from(eval_disk_model(z[0], beta)?);
    Ok(g)
}

/// Reference conic metric `g̃ + A(t) ⟨D's, D's⟩ - B(t) Θ` with `t = |z₁|² e^{-φ_h}`.
///
/// `⟨D's, D's⟩_{ij̄} = e^{-φ_h} w_i w̄_j` with `w_i = δ_{i1} - z₁ ∂_i φ_h`.
pub fn eval_reference_conic(p: &[C64], beta: ConeAngle, bg: &BackgroundData) -> Result<MetricAtPoint> {
    let g = reference_conic_matrix(p, beta.value(), bg)?;
    MetricAtPoint::new(p.to_vec(), g, "reference conic metric (background not normalized?)")
}

pub(crate) fn reference_conic_matrix(p: &[C64], beta: f64, bg: &BackgroundData) -> Result<CMat> {
    if p.len() != bg.n {
        return Err(LabError::Config(format!("point has dimension {}, background {}", p.len(), bg.n)));
    }
    if p.iter().any(|z| z.norm() >= 1.0) {
        return Err(domain("max |z_i| (patch is the unit polydisk)", p.iter().map(|z| z.norm()).fold(0.0, f64::max)));
    }
    let r2 = p[0].norm_sqr();
    if r2 == 0.0 {
        return Err(domain("|z₁| (point on the divisor)", 0.0));
    }
    let phi = bg.phi(p);
    let log_t = r2.ln() - phi;
    if log_t >= 0.0 {
        return Err(domain("|s|² (background not normalized)", log_t.exp()));
    }
    let a = special::a_raw(log_t, beta);
    let b = special::b_raw(log_t, beta);
    let dphi = bg.dphi(p);
    let w: Vec<C64> = (0..bg.n)
        .map(|i| if i == 0 { C64::from(1.0) } else { C64::from(0.0) } - p[0] * dphi[i])
        .collect();
    let scale = a * (-phi).exp();
    let theta = bg.theta(p);
    let mut g = bg.omega(p);
    for i in 0..bg.n {
        for j in 0..bg.n {
            g[(i, j)] += w[i] * w[j].conj() * scale - theta[(i, j)] * b;
        }
    }
    Ok(g)
}

/// Potential `Σ|z_k|² - log[(1-t^β)/β]` whose `dd^c` is the reference conic metric.
pub fn reference_conic_potential(p: &[C64], beta: f64, bg: &BackgroundData) -> Result<f64> {
    let log_t = bg.log_section_norm_sq(p);
    if log_t >= 0.0 {
        return Err(domain("|s|²", log_t.exp()));
    }
    Ok(bg.omega_potential(p) - special::one_minus_tbeta_over_beta_log(log_t, beta).ln())
}

/// Length from the cone point to radius `r = |z₁|` in the disk model, `½ log((1+r^β)/(1-r^β))`.
pub fn model_distance_to_divisor(z1: C64, beta: ConeAngle) -> Result<f64> {
    let r = check_disk(z1)?;
    let log_rb = beta.value() * r.ln();
    let one_minus = -log_rb.exp_m1();
    Ok(0.5 * ((2.0 - one_minus).ln() - one_minus.ln()))
}

/// Distance threshold of `V_β`: `|z₁|^{2β} < e^{-1}` iff the model distance is below this value.
pub fn v_beta_distance_threshold() -> f64 {
    (-0.5f64).exp().atanh()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolydiskBounds {
    pub z1_radius: f64,
    pub transverse_radius: f64,
}

/// Polydisk contained in the model ball of the given radius around the cone point.
pub fn ball_polydisk_bounds(radius: f64, beta: ConeAngle) -> Result<PolydiskBounds> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(domain("radius", radius));
    }
    Ok(PolydiskBounds { z1_radius: (radius.tanh().ln() / beta.value()).exp(), transverse_radius: radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cb(b: f64) -> ConeAngle {
        ConeAngle::new(b).unwrap()
    }

    #[test]
    fn disk_model_values() {
        assert!((eval_disk_model(C64::new(0.5, 0.0), cb(0.5)).unwrap() - 2.0).abs() < 1e-14);
        let z = C64::new(0.3, 0.4);
        let a = special::eval_a(special::RadialParam::from_t(z.norm_sqr()).unwrap(), cb(0.2));
        assert!((eval_disk_model(z, cb(0.2)).unwrap() - a).abs() <= 1e-14 * a);
        assert!(eval_disk_model(C64::new(0.0, 0.0), cb(0.2)).is_err());
        assert!(eval_disk_model(C64::new(1.0, 0.0), cb(0.2)).is_err());
    }

    #[test]
    fn poincare_values() {
        let z = C64::new((-1.0f64).exp(), 0.0);
        let want = std::f64::consts::E.powi(2) / 4.0;
        assert!((eval_poincare(z).unwrap() - want).abs() < 1e-13 * want);
        let near_one = eval_poincare(C64::new(1.0 - 1e-17, 0.0));
        assert!(near_one.is_err() || near_one.unwrap().is_infinite());
        assert_eq!(eval_poincare(C64::new(1.0 - 1e-16, 0.0)).map(|v| v > 1e30), Ok(true));
    }

    #[test]
    fn disk_model_tends_to_poincare() {
        let z = C64::new((-1.0f64).exp(), 0.0);
        let lp = eval_poincare(z).unwrap();
        let lb = eval_disk_model(z, cb(1e-7)).unwrap();
        assert!((lb - lp).abs() < 1e-5 * lp);
    }

    #[test]
    fn pointwise_convergence_is_monotone_on_annulus() {
        for k in 0..50 {
            let r = 0.25 + 0.5 * k as f64 / 49.0;
            let z = C64::new(r, 0.0);
            let lp = eval_poincare(z).unwrap();
            let mut prev = f64::INFINITY;
            for &b in &[0.5, 0.25, 0.1, 0.05, 0.01] {
                let d = (eval_disk_model(z, cb(b)).unwrap() - lp).abs();
                assert!(d <= prev, "r={r} b={b}");
                prev = d;
            }
        }
    }

    #[test]
    fn poincare_and_model_are_uniformly_equivalent_on_annulus() {
        let mut worst: f64 = 1.0;
        for k in 0..50 {
            let z = C64::new(0.25 + 0.5 * k as f64 / 49.0, 0.0);
            let lp = eval_poincare(z).unwrap();
            for &b in &[0.5, 0.25, 0.1, 0.01, 1e-4] {
                let q = eval_disk_model(z, cb(b)).unwrap() / lp;
                worst = worst.max(q).max(1.0 / q);
            }
        }
        assert!(worst < 2.0, "{worst}");
    }

    #[test]
    fn flat_reference_is_diagonal() {
        let bg = BackgroundData::normalized(3, WeightKind::Flat).unwrap();
        let p = [C64::new(0.1, 0.05), C64::new(0.3, 0.0), C64::new(-0.2, 0.4)];
        let m = eval_reference_conic(&p, cb(0.3), &bg).unwrap();
        let t = p[0].norm_sqr() * (-bg.shift).exp();
        let a = special::a_raw(t.ln(), 0.3);
        // e^{-φ} A(t) with φ = shift.
        assert!((m.g[(0, 0)].re - 1.0 - a * (-bg.shift).exp()).abs() < 1e-12 * a);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(m.g[(i, j)], C64::new(0.0, 0.0));
                }
            }
        }
        let unshifted = BackgroundData::new(2, WeightKind::Flat).unwrap();
        let p = [C64::new(0.3, 0.0), C64::new(0.1, 0.1)];
        let m = eval_reference_conic(&p, cb(0.3), &unshifted).unwrap();
        let a = special::a_raw(0.09f64.ln(), 0.3);
        assert!((m.g[(0, 0)].re - (1.0 + a)).abs() < 1e-13 * a);
    }

    fn random_point(rng: &mut ChaCha8Rng, n: usize, r1: f64) -> Vec<C64> {
        let mut z = vec![C64::from_polar(r1, rng.gen_range(0.0..6.283))];
        for _ in 1..n {
            z.push(C64::from_polar(rng.gen_range(0.0..0.7), rng.gen_range(0.0..6.283)));
        }
        z
    }

    #[test]
    fn reference_matches_hessian_of_potential() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for kind in [WeightKind::Quadratic, WeightKind::CrossTerm] {
            let bg = BackgroundData::normalized(2, kind).unwrap();
            for &beta in &[0.05, 0.25, 0.5] {
                for _ in 0..10 {
                    let r1 = rng.gen_range(0.1..0.6);
                    let p = random_point(&mut rng, 2, r1);
                    let g = reference_conic_matrix(&p, beta, &bg).unwrap();
                    let pot = |z: &[C64]| reference_conic_potential(z, beta, &bg);
                    let h = fd::complex_hessian(&pot, &p, 1e-3).unwrap();
                    let err = linalg::max_abs(&(&g - &h)) / linalg::max_abs(&g);
                    assert!(err < 1e-6, "kind={kind:?} beta={beta} err={err}");
                }
            }
        }
    }

    #[test]
    fn theta_is_hessian_of_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for kind in [WeightKind::Flat, WeightKind::Quadratic, WeightKind::CrossTerm] {
            let bg = BackgroundData::new(3, kind).unwrap();
            let p = random_point(&mut rng, 3, 0.5);
            let h = fd::complex_hessian(&|z: &[C64]| Ok(bg.phi(z)), &p, 1e-2).unwrap();
            assert!(linalg::max_abs(&(&h - bg.theta(&p))) < 1e-6);
            // ∂φ matches the finite-difference gradient.
            for k in 0..3 {
                let f = |s: f64, im: bool| {
                    let mut z = p.clone();
                    z[k] += if im { C64::new(0.0, s) } else { C64::new(s, 0.0) };
                    bg.phi(&z)
                };
                let dx = fd::deriv1(|s| f(s, false), 0.0, 1e-3);
                let dy = fd::deriv1(|s| f(s, true), 0.0, 1e-3);
                assert!((C64::new(dx, -dy) * 0.5 - bg.dphi(&p)[k]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn domination_after_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for kind in [WeightKind::Flat, WeightKind::Quadratic, WeightKind::CrossTerm] {
            let bg = BackgroundData::normalized(2, kind).unwrap();
            for &beta in &[0.05, 0.25, 0.5] {
                for _ in 0..100 {
                    let r1 = (rng.gen_range(-18.0f64..-0.01)).exp().sqrt();
                    let p = random_point(&mut rng, 2, r1);
                    let m = eval_reference_conic(&p, cb(beta), &bg).unwrap();
                    let d = &m.g - bg.omega(&p) * C64::from(0.5);
                    assert!(linalg::min_eigenvalue(&d) >= 0.0);
                    let prod = &m.g * &m.g_inv;
                    assert!(linalg::max_abs(&(prod - CMat::identity(2, 2))) < 1e-12);
                    let t = bg.log_section_norm_sq(&p).exp();
                    assert!(t < crate::conventions::NORMALIZED_SECTION_BOUND);
                    let b = special::b_raw(t.ln(), beta);
                    let theta_norm = linalg::hermitian_eigenvalues(&bg.theta(&p)).iter().fold(0.0f64, |m, e| m.max(e.abs()));
                    assert!(b * theta_norm <= 0.5 * linalg::min_eigenvalue(&bg.omega(&p)));
                }
            }
        }
    }

    #[test]
    fn rescaling_is_idempotent_and_hits_target() {
        for kind in [WeightKind::Flat, WeightKind::Quadratic, WeightKind::CrossTerm] {
            let bg = BackgroundData::new(2, kind).unwrap();
            let once = rescale_background(&bg, 0.2);
            let twice = rescale_background(&once, 0.2);
            assert_eq!(once, twice);
            assert!((once.sup_section_norm_sq() - 0.2).abs() < 1e-15);
            if kind != WeightKind::CrossTerm {
                // Only a constant changes.
                let z = [C64::new(0.3, 0.1), C64::new(0.2, -0.5)];
                assert!((once.phi(&z) - bg.phi(&z) - once.shift).abs() < 1e-15);
                assert_eq!(once.theta(&z), bg.theta(&z));
            }
        }
    }

    #[test]
    fn cross_term_patch_supremum_is_sharp() {
        let bg = BackgroundData::new(2, WeightKind::CrossTerm).unwrap();
        let mut best: f64 = 0.0;
        for i in 0..200 {
            let r1 = 0.999;
            let z2 = C64::from_polar(i as f64 / 200.0, std::f64::consts::PI);
            let z = [C64::new(r1, 0.0), z2];
            best = best.max(bg.log_section_norm_sq(&z).exp());
        }
        assert!(best <= bg.sup_section_norm_sq());
        assert!(best > 0.99 * bg.sup_section_norm_sq());
    }

    #[test]
    fn distance_values_and_monotonicity() {
        let d = model_distance_to_divisor(C64::new(0.25, 0.0), cb(0.5)).unwrap();
        assert!((d - 0.5 * 3f64.ln()).abs() < 1e-15);
        // Quadrature oracle of β r^{β-1}/(1 - r^{2β}) on (0, 1/4] with u = r^β.
        let n = 20000;
        let ub = 0.5;
        let h = ub / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let u = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w / (1.0 - u * u);
        }
        assert!((s * h / 3.0 - d).abs() < 1e-12);
        let mut prev = 0.0;
        for k in 1..100 {
            let v = model_distance_to_divisor(C64::new(k as f64 / 100.0, 0.0), cb(0.3)).unwrap();
            assert!(v > prev);
            prev = v;
        }
        let z = C64::new(0.5, 0.0);
        let mut prev = 0.0;
        for &b in &[0.9, 0.5, 0.1, 0.01, 0.001] {
            let v = model_distance_to_divisor(z, cb(b)).unwrap();
            assert!(v > prev);
            prev = v;
        }
        assert!(prev > 3.0);
    }

    #[test]
    fn v_beta_threshold() {
        for &b in &[0.5, 0.1, 0.01] {
            // |z₁|^{2β} = e^{-1} exactly at the threshold.
            let r = (-0.5 / b as f64).exp();
            let d = model_distance_to_divisor(C64::new(r, 0.0), cb(b)).unwrap();
            assert!((d - v_beta_distance_threshold()).abs() < 1e-12);
            // Points of V_β are closer to the cone point than the threshold.
            let inside = model_distance_to_divisor(C64::new(0.9 * r, 0.0), cb(b)).unwrap();
            assert!(inside < v_beta_distance_threshold());
            let outside = model_distance_to_divisor(C64::new(1.1 * r, 0.0), cb(b)).unwrap();
            assert!(outside > v_beta_distance_threshold());
        }
    }

    #[test]
    fn polydisk_bounds() {
        let pb = ball_polydisk_bounds(1.0, cb(1.0)).unwrap();
        assert!((pb.z1_radius - 1f64.tanh()).abs() < 1e-15);
        assert!((pb.z1_radius - 0.761594).abs() < 1e-6);
        for &b in &[0.5, 0.1, 0.02] {
            for &r in &[0.3, 1.0, 2.5] {
                let pb = ball_polydisk_bounds(r, cb(b)).unwrap();
                let d = model_distance_to_divisor(C64::new(pb.z1_radius, 0.0), cb(b)).unwrap();
                assert!((d - r).abs() < 1e-10);
            }
        }
        // Exponential decay in 1/β.
        let r1 = ball_polydisk_bounds(1.0, cb(0.05)).unwrap().z1_radius.ln();
        let r2 = ball_polydisk_bounds(1.0, cb(0.025)).unwrap().z1_radius.ln();
        assert!((r2 / r1 - 2.0).abs() < 1e-12);
    }
}
