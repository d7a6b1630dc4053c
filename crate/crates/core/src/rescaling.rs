//! Rescaling of the polydisk model near the divisor and its cylindrical limit.
//!
//! `Ψ_β(w) = (e^{-1/β} w₁, β w₂, …, β w_n)` maps the polydisk with radii
//! `(e^{1/(2β)}, 1/β, …)` onto `U_β` with radii `(e^{-1/(2β)}, 1, …)`. The pullback of
//! `β⁻² ω_{β,mod}` has first coefficient `q|w₁|^{2β} / ((1 - q|w₁|^{2β})² |w₁|²)` with
//! `q = e⁻²` and tends to the cylinder `c∞ |dw₁|²/|w₁|² + Σ |dw_k|²`, `c∞ = q/(1-q)²`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{domain, LabError, Result};
use crate::fd;
use crate::linalg::{CMat, C64};
use crate::special::ConeAngle;

/// `e⁻²`.
pub const Q: f64 = 0.1353352832366127;

/// `q/(1-q)²`, the first coefficient of the limit cylinder.
pub fn limit_coefficient() -> f64 {
    Q / ((1.0 - Q) * (1.0 - Q))
}

fn check_source(w: &[C64], beta: f64) -> Result<()> {
    let r1 = w[0].norm();
    if !(r1 < (0.5 / beta).exp()) {
        return Err(domain("|w₁| (outside e^{1/(2β)})", r1));
    }
    if let Some(bad) = w[1..].iter().map(|z| z.norm()).find(|&r| !(r < 1.0 / beta)) {
        return Err(domain("|w_k| (outside 1/β)", bad));
    }
    Ok(())
}

pub fn apply_rescaling(w: &[C64], beta: ConeAngle) -> Result<Vec<C64>> {
    let b = beta.value();
    check_source(w, b)?;
    Ok(std::iter::once(w[0] * (-1.0 / b).exp()).chain(w[1..].iter().map(|z| z * b)).collect())
}

pub fn invert_rescaling(z: &[C64], beta: ConeAngle) -> Result<Vec<C64>> {
    let b = beta.value();
    let r1 = z[0].norm();
    if !(r1 < (-0.5 / b).exp()) {
        return Err(domain("|z₁| (outside U_β)", r1));
    }
    if let Some(bad) = z[1..].iter().map(|x| x.norm()).find(|&r| !(r < 1.0)) {
        return Err(domain("|z_k| (outside U_β)", bad));
    }
    Ok(std::iter::once(z[0] * (1.0 / b).exp()).chain(z[1..].iter().map(|x| x / b)).collect())
}

/// `q|w₁|^{2β}/(1 - q|w₁|^{2β})²`, the first coefficient times `|w₁|²`.
pub fn first_coefficient_scaled(w1: C64, beta: f64) -> f64 {
    let y = beta * w1.norm_sqr().ln();
    let s = Q * y.exp();
    s / ((1.0 - s) * (1.0 - s))
}

/// Coefficients of `Ψ_β^*(β⁻² ω_{β,mod})`: diagonal.
pub fn pullback_rescaled_model(w: &[C64], beta: ConeAngle) -> Result<CMat> {
    let b = beta.value();
    check_source(w, b)?;
    if w[0].norm() == 0.0 {
        return Err(domain("|w₁|", 0.0));
    }
    let mut g = CMat::identity(w.len(), w.len());
    g[(0, 0)] = C64::from(first_coefficient_scaled(w[0], b) / w[0].norm_sqr());
    Ok(g)
}

/// `-log((1 - q e^y)/(1 - q)) - y q/(1-q)`: the doubled rescaled potential with its
/// pluriharmonic part removed, times `β²`, at `y = β log|w₁|²`.
fn reduced_profile(y: f64) -> f64 {
    -(-Q * y.exp_m1() / (1.0 - Q)).ln_1p() - y * Q / (1.0 - Q)
}

/// Pullback coefficients from finite differences of the rescaled potential in the chart
/// `(log w₁, w₂, …)`, transported back to `w`.
pub fn pullback_from_potential(w: &[C64], beta: ConeAngle) -> Result<CMat> {
    let b = beta.value();
    check_source(w, b)?;
    let n = w.len();
    let potential = |zeta: &[C64]| -> Result<f64> {
        let y = 2.0 * b * zeta[0].re;
        Ok(reduced_profile(y) / (b * b) + zeta[1..].iter().map(|z| z.norm_sqr()).sum::<f64>())
    };
    let zeta0: Vec<C64> = std::iter::once(w[0].ln()).chain(w[1..].iter().copied()).collect();
    // The reduced profile is already half the doubled potential.
    let mut g = fd::complex_hessian(&potential, &zeta0, 0.01)?;
    let inv = w[0].inv();
    for j in 0..n {
        g[(0, j)] *= inv;
        g[(j, 0)] *= inv.conj();
    }
    Ok(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub beta: f64,
    pub w1_modulus: f64,
    pub coeff: f64,
    pub limit_coeff: f64,
    pub deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// `(β, sup_K deviation)`.
    pub sup_deviation: Vec<(f64, f64)>,
    pub slope: f64,
    pub c_fit: f64,
    pub unit_circle_error: f64,
    /// `(β, sup_K |‖dw₁‖_β / ‖dw₁‖_cyl - 1|)`.
    pub gradient_ratio_deviation: Vec<(f64, f64)>,
}

/// `sup` over `1/2 ≤ |w₁| ≤ 2` of `|coefficient·|w₁|² - c∞|` along the ladder and its log-log slope in `β`.
pub fn limit_convergence(betas: &[f64], radii: usize) -> Result<ConvergenceReport> {
    if betas.len() < 2 {
        return Err(LabError::FitFailure("need at least two ladder entries".into()));
    }
    let cinf = limit_coefficient();
    let mut rows = Vec::new();
    let mut sup_deviation = Vec::new();
    let mut unit_circle_error: f64 = 0.0;
    let mut gradient_ratio_deviation = Vec::new();
    for &b in betas {
        let beta = ConeAngle::new(b)?;
        let mut worst: f64 = 0.0;
        let mut ratio_worst: f64 = 0.0;
        for i in 0..radii {
            let rho = 0.5 * 4f64.powf(i as f64 / (radii - 1) as f64);
            let w = [C64::new(rho, 0.0), C64::new(0.3, 0.4)];
            let g = pullback_rescaled_model(&w, beta)?;
            let coeff = g[(0, 0)].re;
            let dev = (coeff * rho * rho - cinf).abs();
            worst = worst.max(dev);
            ratio_worst = ratio_worst.max(((cinf / (coeff * rho * rho)).sqrt() - 1.0).abs());
            rows.push(ConvergenceRow { beta: b, w1_modulus: rho, coeff, limit_coeff: cinf / (rho * rho), deviation: dev });
        }
        unit_circle_error = unit_circle_error.max((pullback_rescaled_model(&[C64::from_polar(1.0, 0.7)], beta)?[(0, 0)].re - cinf).abs());
        sup_deviation.push((b, worst));
        gradient_ratio_deviation.push((b, ratio_worst));
    }
    let (slope, intercept) = linear_fit(
        &sup_deviation.iter().map(|p| p.0.ln()).collect::<Vec<_>>(),
        &sup_deviation.iter().map(|p| p.1.ln()).collect::<Vec<_>>(),
    );
    Ok(ConvergenceReport { rows, sup_deviation, slope, c_fit: intercept.exp(), unit_circle_error, gradient_ratio_deviation })
}

/// Least-squares line `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExpansionReport {
    /// Fitted constant of `β² P - log β²`.
    pub constant: f64,
    pub constant_series: f64,
    /// Fitted coefficient of `β⁻¹ log|w₁|²` in the doubled potential.
    pub linear: f64,
    pub linear_series: f64,
    /// Fitted coefficient of `log²|w₁|²`.
    pub quadratic: f64,
    pub quadratic_series: f64,
    /// `½ dd^c` of the fitted quadratic term times `|w₁|²`, by finite differences.
    pub quadratic_metric: f64,
    pub limit_coefficient: f64,
    /// Printed candidate `e²/(1-e⁻²)`.
    pub printed_candidate: f64,
    /// Alternative `e⁻²/(1-e⁻²)`, the linear coefficient of the undoubled potential.
    pub alternative_candidate: f64,
    /// Undoubled linear coefficient `linear/2`.
    pub linear_undoubled: f64,
}

/// Fits `β² P(β, w) - log β² = Σ_j c_j (β log|w₁|²)^j` with `P` the doubled rescaled potential
/// `-β⁻² log(1 - q|w₁|^{2β})² + β⁻² log β²` over the ladder and the sample moduli.
pub fn expansion_check(betas: &[f64], moduli: &[f64]) -> Result<ExpansionReport> {
    let degree = 8;
    let rows = betas.len() * moduli.len();
    if betas.len() < 3 || rows <= degree {
        return Err(LabError::FitFailure(format!("{} ladder entries × {} moduli is too few", betas.len(), moduli.len())));
    }
    let mut ys = Vec::with_capacity(rows);
    let mut vals = Vec::with_capacity(rows);
    for &b in betas {
        for &m in moduli {
            if m <= 0.0 {
                return Err(domain("|w₁|", m));
            }
            let y = b * (m * m).ln();
            let p = -2.0 * (-Q * y.exp()).ln_1p() / (b * b) + (b * b).ln() / (b * b);
            ys.push(y);
            vals.push(b * b * p - (b * b).ln());
        }
    }
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1e-300);
    let a = DMatrix::from_fn(rows, degree + 1, |i, j| (ys[i] / scale).powi(j as i32));
    let rhs = DVector::from_vec(vals);
    let coef = a
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| LabError::FitFailure(e.to_string()))?;
    let c = |j: usize| coef[j] / scale.powi(j as i32);
    let (c0, c1, c2) = (c(0), c(1), c(2));
    let quadratic_metric = {
        let f = |z: &[C64]| -> Result<f64> { Ok(0.5 * c2 * z[0].norm_sqr().ln().powi(2)) };
        let w = [C64::new(1.3, -0.4)];
        fd::complex_hessian(&f, &w, 1e-3)?[(0, 0)].re * w[0].norm_sqr()
    };
    let e2 = (2.0f64).exp();
    Ok(ExpansionReport {
        constant: c0,
        constant_series: -2.0 * (1.0 - Q).ln(),
        linear: c1,
        linear_series: 2.0 * Q / (1.0 - Q),
        quadratic: c2,
        quadratic_series: limit_coefficient(),
        quadratic_metric,
        limit_coefficient: limit_coefficient(),
        printed_candidate: e2 / (1.0 - Q),
        alternative_candidate: Q / (1.0 - Q),
        linear_undoubled: 0.5 * c1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cb(b: f64) -> ConeAngle {
        ConeAngle::new(b).unwrap()
    }

    #[test]
    fn rescaling_examples() {
        let z = apply_rescaling(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], cb(0.5)).unwrap();
        assert!((z[0].re - (-2.0f64).exp()).abs() < 1e-16);
        for &b in &[0.5, 0.1, 0.03] {
            let edge = (0.5 / b as f64).exp() * (1.0 - 1e-15);
            let z = apply_rescaling(&[C64::new(edge, 0.0)], cb(b)).unwrap();
            assert!((z[0].re - (-0.5 / b as f64).exp()).abs() < 1e-14 * (-0.5 / b as f64).exp());
        }
        assert!(apply_rescaling(&[C64::new((1.0f64).exp() * 1.01, 0.0)], cb(0.5)).is_err());
        assert!(apply_rescaling(&[C64::new(1.0, 0.0), C64::new(2.1, 0.0)], cb(0.5)).is_err());
    }

    #[test]
    fn rescaling_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let b = rng.gen_range(0.02..0.5);
            let w = vec![
                C64::from_polar(rng.gen_range(0.0..(0.5 / b as f64).exp()), rng.gen_range(0.0..6.28)),
                C64::from_polar(rng.gen_range(0.0..1.0 / b), rng.gen_range(0.0..6.28)),
            ];
            let back = invert_rescaling(&apply_rescaling(&w, cb(b)).unwrap(), cb(b)).unwrap();
            for k in 0..2 {
                assert!((back[k] - w[k]).norm() <= 1e-14 * w[k].norm().max(1.0));
            }
        }
    }

    #[test]
    fn pullback_agrees_with_model_chain_rule() {
        // Ψ^*(β⁻²λ_β|dz₁|²) = β⁻² λ_β(e^{-1/β}w₁) e^{-2/β} |dw₁|².
        for &b in &[0.5, 0.2, 0.05] {
            for &m in &[0.3, 1.0, 2.5] {
                let w1 = C64::from_polar(m, 0.4);
                let z1 = w1 * (-1.0 / b as f64).exp();
                let lam = crate::metric::eval_disk_model(z1, cb(b)).unwrap();
                let want = lam * (-2.0 / b as f64).exp() / (b * b);
                let got = pullback_rescaled_model(&[w1], cb(b)).unwrap()[(0, 0)].re;
                assert!((got - want).abs() < 1e-12 * want);
            }
        }
    }

    #[test]
    fn pullback_agrees_with_potential_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let b = [0.2, 0.1, 0.05, 0.025][rng.gen_range(0..4)];
            let w = vec![C64::from_polar(rng.gen_range(0.5..2.0), rng.gen_range(0.0..6.28)), C64::new(rng.gen_range(-1.0..1.0), 0.2)];
            let a = pullback_rescaled_model(&w, cb(b)).unwrap();
            let f = pullback_from_potential(&w, cb(b)).unwrap();
            assert!(crate::linalg::max_abs(&(&a - &f)) < 1e-8, "{b} {a} {f}");
        }
    }

    #[test]
    fn unit_circle_coefficient_is_exact() {
        let q = (-2.0f64).exp();
        assert!((limit_coefficient() - q / (1.0 - q).powi(2)).abs() < 1e-16);
        assert!((limit_coefficient() - 0.181015).abs() < 1e-6);
        for &b in &[0.5, 0.1, 0.01] {
            let g = pullback_rescaled_model(&[C64::from_polar(1.0, 2.0)], cb(b)).unwrap();
            assert!((g[(0, 0)].re - limit_coefficient()).abs() < 1e-14);
        }
    }

    #[test]
    fn convergence_is_linear_in_beta() {
        let rep = limit_convergence(&[0.2, 0.1, 0.05, 0.025], 41).unwrap();
        assert!((0.8..=1.2).contains(&rep.slope), "{}", rep.slope);
        assert!(rep.unit_circle_error < 1e-14);
        let r = &rep.gradient_ratio_deviation;
        assert!(r.windows(2).all(|p| p[1].1 < p[0].1) && r[3].1 < 0.1);
    }

    #[test]
    fn expansion_coefficients() {
        let moduli: Vec<f64> = (0..9).map(|i| 0.5 * 4f64.powf(i as f64 / 8.0)).collect();
        let rep = expansion_check(&[0.2, 0.1, 0.05, 0.025, 0.0125], &moduli).unwrap();
        assert!((rep.constant - rep.constant_series).abs() < 1e-6);
        assert!((rep.constant - 0.290827).abs() < 1e-6);
        assert!((rep.linear - rep.linear_series).abs() < 1e-6);
        assert!((rep.quadratic - rep.quadratic_series).abs() < 1e-6);
        assert!((rep.quadratic_metric - rep.limit_coefficient).abs() < 1e-6);
        assert!((rep.linear_undoubled - rep.alternative_candidate).abs() < 1e-6);
        assert!((rep.printed_candidate - 8.545).abs() < 1e-3);
        assert!(expansion_check(&[0.1, 0.05], &moduli).is_err());
    }
}
