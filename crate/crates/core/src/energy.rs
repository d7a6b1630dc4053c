//! Energy functionals of radial potentials on the unit disk.
//!
//! Potentials are functions of `ℓ = log t = log |z|²`. With `dA` the Lebesgue
//! measure, `dA = π e^ℓ dℓ` and `dd^c φ = ½ Δφ dA`, so
//!
//! * `∫ φ dd^c φ = π ([φ r φ']₀¹ - ∫ r φ'² dr)` with `r φ' = 2 φ_ℓ` and `∫ r φ'² dr = 2 ∫ φ_ℓ² dℓ`,
//! * `E(φ) = (1/V) ∫ φ ρ dA + (1/2V) ∫ φ dd^c φ` for the reference form `ρ dA`, `ρ = 1 - βθ`,
//! * `L_β(φ) = -log ∫ e^{φ + h + C} t^{β-1} dA` and `G_β = E_β + L_β`.
//!
//! Quadrature runs in `u = t^β` for bounded potentials with `β > 0` and in
//! `u = log(-ℓ)` otherwise, truncated to `-ℓ ∈ [1e-10, 1e10]`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::special;

/// Range of `u = log(-ℓ)`.
pub const LOGLOG_MIN: f64 = -23.025850929940457;
pub const LOGLOG_MAX: f64 = 23.025850929940457;
const PANEL: f64 = 0.25;
const NODES: usize = 20;
/// Relative change of an integral over its last five units of `u` above which it is declared divergent.
const CAUCHY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RadialPotential {
    Constant { value: f64 },
    /// `Σ a_k cos(kπ r) + shift`; zero flux through `r = 1`.
    Cosine { coeffs: Vec<f64>, shift: f64 },
    /// `-2 log(-ℓ)` for `ℓ ≤ -2` and `-2 log 2` beyond, plus `shift`.
    ///
    /// Lipschitz with a kink at `r = e⁻¹`; not subharmonic across the kink.
    CuspTruncated { shift: f64 },
    /// `-2 log((1 - t^β)/β)`, the doubled conic model potential.
    ConicModel { beta: f64 },
}

impl RadialPotential {
    pub fn cusp() -> Self {
        RadialPotential::CuspTruncated { shift: 0.0 }
    }

    pub fn shifted(&self, c: f64) -> Self {
        match self.clone() {
            RadialPotential::Constant { value } => RadialPotential::Constant { value: value + c },
            RadialPotential::Cosine { coeffs, shift } => RadialPotential::Cosine { coeffs, shift: shift + c },
            RadialPotential::CuspTruncated { shift } => RadialPotential::CuspTruncated { shift: shift + c },
            RadialPotential::ConicModel { .. } => panic!("the conic model potential has no shifted form"),
        }
    }

    /// Bounded potentials allow the `u = t^β` substitution.
    pub fn is_bounded(&self) -> bool {
        matches!(self, RadialPotential::Constant { .. } | RadialPotential::Cosine { .. })
    }

    pub fn value(&self, l: f64) -> f64 {
        match self {
            RadialPotential::Constant { value } => *value,
            RadialPotential::Cosine { coeffs, shift } => {
                let r = (0.5 * l).exp();
                shift + coeffs.iter().enumerate().map(|(k, a)| a * ((k + 1) as f64 * PI * r).cos()).sum::<f64>()
            }
            RadialPotential::CuspTruncated { shift } => shift - 2.0 * (-l).max(2.0).ln(),
            RadialPotential::ConicModel { beta } => -2.0 * special::one_minus_tbeta_over_beta_log(l, *beta).ln(),
        }
    }

    /// `dφ/dℓ`.
    pub fn slope(&self, l: f64) -> f64 {
        match self {
            RadialPotential::Constant { .. } => 0.0,
            RadialPotential::Cosine { coeffs, .. } => {
                let r = (0.5 * l).exp();
                -0.5 * r * coeffs.iter().enumerate().map(|(k, a)| {
                    let w = (k + 1) as f64 * PI;
                    a * w * (w * r).sin()
                }).sum::<f64>()
            }
            RadialPotential::CuspTruncated { .. } => {
                if l < -2.0 {
                    -2.0 / l
                } else {
                    0.0
                }
            }
            RadialPotential::ConicModel { beta } => {
                let tb = (beta * l).exp();
                2.0 * beta * tb / special::one_minus_tbeta_log(l, *beta)
            }
        }
    }

    /// Values of `ℓ` where the potential is not smooth.
    fn kinks(&self) -> Vec<f64> {
        match self {
            RadialPotential::CuspTruncated { .. } => vec![-2.0],
            _ => vec![],
        }
    }
}

/// Twist `h(t) = twist · t`, normalization `C`, and constant curvature density `θ` of the weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct RadialData {
    pub twist: f64,
    pub normalization: f64,
    pub theta: f64,
}

impl RadialData {
    fn density(&self, beta: f64) -> Result<f64> {
        let rho = 1.0 - beta * self.theta;
        if rho > 0.0 {
            Ok(rho)
        } else {
            Err(LabError::Config(format!("reference form 1 - βθ = {rho} is not positive")))
        }
    }
}

/// Composite Gauss–Legendre rule with panels of width at most `PANEL` between sorted breakpoints.
struct Quadrature {
    rule: GaussLegendre,
}

impl Quadrature {
    fn new() -> Self {
        Quadrature { rule: GaussLegendre::new(NonZeroUsize::new(NODES).unwrap()) }
    }

    fn integrate(&self, a: f64, b: f64, breaks: &[f64], panel: f64, f: impl Fn(f64) -> f64) -> f64 {
        let mut pts = vec![a];
        pts.extend(breaks.iter().copied().filter(|&p| p > a && p < b));
        pts.push(b);
        pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut total = 0.0;
        for w in pts.windows(2) {
            let k = ((w[1] - w[0]) / panel).ceil().max(1.0) as usize;
            let step = (w[1] - w[0]) / k as f64;
            for i in 0..k {
                let lo = w[0] + i as f64 * step;
                total += self.rule.integrate(lo, lo + step, &f);
            }
        }
        total
    }

    /// `∫ f(ℓ) dℓ` over `ℓ ∈ (-∞, 0)` in the variable `u = log(-ℓ)`, with a Cauchy test on the `ℓ → -∞` tail.
    fn loglog(&self, kinks: &[f64], f: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
        let g = |u: f64| {
            let e = u.exp();
            f(-e) * e
        };
        let breaks: Vec<f64> = kinks.iter().filter(|&&k| k < 0.0).map(|k| (-k).ln()).collect();
        // Midpoint rule on the sliver -ℓ ∈ (0, e^{LOGLOG_MIN}) next to t = 1.
        let sliver = LOGLOG_MIN.exp();
        let near_one = f(-0.5 * sliver) * sliver;
        let full = self.integrate(LOGLOG_MIN, LOGLOG_MAX, &breaks, PANEL, g) + near_one;
        let head = self.integrate(LOGLOG_MIN, LOGLOG_MAX - 5.0, &breaks, PANEL, g) + near_one;
        let tail = (full - head).abs();
        if !full.is_finite() || tail > CAUCHY_TOL * full.abs().max(f64::MIN_POSITIVE) {
            return Err(LabError::Divergent(format!("tail over the last five units of log(-log t) is {tail:e} of {full:e}")));
        }
        Ok((full, tail))
    }
}

/// Integral together with an error estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Quad {
    pub value: f64,
    pub err: f64,
}

/// `E_β(φ)` on flat disk data.
pub fn energy_e(phi: &RadialPotential, beta: f64, data: &RadialData) -> Result<Quad> {
    let q = Quadrature::new();
    let rho = data.density(beta)?;
    let kinks = phi.kinks();
    let (mass, _) = q.loglog(&kinks, |l| l.exp())?;
    let v = PI * rho * mass;
    let (mean, e1) = q.loglog(&kinks, |l| phi.value(l) * l.exp())?;
    let (grad, e2) = q.loglog(&kinks, |l| 2.0 * phi.slope(l).powi(2))?;
    let l_low = -LOGLOG_MAX.exp();
    let flux = 2.0 * phi.value(0.0) * phi.slope(0.0) - 2.0 * phi.value(l_low) * phi.slope(l_low);
    let dirichlet = PI * (flux - grad);
    let value = PI * rho * mean / v + dirichlet / (2.0 * v);
    let err = (PI * rho * e1 + PI * e2 / 2.0) / v + (2.0 * phi.value(l_low) * phi.slope(l_low)).abs();
    Ok(Quad { value, err })
}

/// `L_β(φ)`; `beta = 0` is the cusp weight `t^{-1}`.
pub fn energy_l(phi: &RadialPotential, beta: f64, data: &RadialData) -> Result<Quad> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(crate::error::domain("β", beta));
    }
    let q = Quadrature::new();
    let weight = |l: f64| phi.value(l) + data.twist * l.exp() + data.normalization;
    if phi.is_bounded() && beta > 0.0 {
        // ∫₀¹ f t^{β-1} dt = β⁻¹ ∫₀¹ f(u^{1/β}) du.
        let breaks: Vec<f64> = phi.kinks().iter().map(|k| (beta * k).exp()).collect();
        let integral = q.integrate(0.0, 1.0, &breaks, 1.0 / 16.0, |u| {
            if u == 0.0 {
                return 0.0;
            }
            weight(u.ln() / beta).exp()
        }) / beta;
        return Ok(Quad { value: -(PI * integral).ln(), err: 0.0 });
    }
    let (integral, tail) = q.loglog(&phi.kinks(), |l| (weight(l) + beta * l).exp())?;
    Ok(Quad { value: -(PI * integral).ln(), err: tail / integral })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyReport {
    pub beta: f64,
    pub e: f64,
    pub l: f64,
    pub g: f64,
    pub quad_err: f64,
    pub volume: f64,
}

pub fn energy_g(phi: &RadialPotential, beta: f64, data: &RadialData) -> Result<EnergyReport> {
    let e = energy_e(phi, beta, data)?;
    let l = energy_l(phi, beta, data)?;
    Ok(EnergyReport { beta, e: e.value, l: l.value, g: e.value + l.value, quad_err: e.err + l.err, volume: PI * data.density(beta)? })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JensenReport {
    pub beta: f64,
    /// `log ∫ W dν`.
    pub log_mean: f64,
    /// `∫ log W dν`.
    pub mean_log: f64,
    pub slack: f64,
}

/// Jensen's inequality for the probability measure `ν = ρ dA / V` and the weight
/// `W = e^{φ+h+C} t^{β-1} / ρ`.
pub fn jensen_check(phi: &RadialPotential, beta: f64, data: &RadialData) -> Result<JensenReport> {
    let rho = data.density(beta)?;
    let q = Quadrature::new();
    let kinks = phi.kinks();
    let (mass, _) = q.loglog(&kinks, |l| l.exp())?;
    let v = PI * rho * mass;
    let l = energy_l(phi, beta, data)?.value;
    let log_mean = -l - v.ln();
    let (s, _) = q.loglog(&kinks, |ll| {
        (phi.value(ll) + data.twist * ll.exp() + data.normalization + (beta - 1.0) * ll - rho.ln()) * ll.exp()
    })?;
    let mean_log = PI * rho * s / v;
    Ok(JensenReport { beta, log_mean, mean_log, slack: log_mean - mean_log })
}

/// Random potentials `Σ_{k≤3} a_k cos(kπ r)` shifted to `sup = 0`.
pub fn random_admissible(rng: &mut ChaCha8Rng) -> RadialPotential {
    let coeffs: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let p = RadialPotential::Cosine { coeffs: coeffs.clone(), shift: 0.0 };
    let sup = special::linspace(0.0, 1.0, 2001)
        .into_iter()
        .map(|r: f64| if r == 0.0 { p.value(f64::NEG_INFINITY) } else { p.value(2.0 * r.ln()) })
        .fold(f64::NEG_INFINITY, f64::max);
    RadialPotential::Cosine { coeffs, shift: -sup }
}

/// Row of the β-continuity table; `report` is `None` when the functional diverges.
#[derive(Debug, Clone, Serialize)]
pub struct ContinuityRow {
    pub beta: f64,
    pub report: Option<EnergyReport>,
    pub divergence: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuityTable {
    pub rows: Vec<ContinuityRow>,
    pub limit: ContinuityRow,
    /// `|G_β - G_0|` at the smallest β of the ladder, when both are finite.
    pub final_gap: Option<f64>,
    /// Successive differences of `G` along the ladder are non-increasing.
    pub cauchy: bool,
}

fn continuity_row(phi: &RadialPotential, beta: f64, data: &RadialData) -> Result<ContinuityRow> {
    match energy_g(phi, beta, data) {
        Ok(r) => Ok(ContinuityRow { beta, report: Some(r), divergence: None }),
        Err(LabError::Divergent(msg)) => Ok(ContinuityRow { beta, report: None, divergence: Some(msg) }),
        Err(e) => Err(e),
    }
}

/// `G_β(φ)` along a decreasing ladder and at `β = 0`.
pub fn beta_continuity(phi: &RadialPotential, betas: &[f64], data: &RadialData) -> Result<ContinuityTable> {
    let rows: Vec<ContinuityRow> = betas.iter().map(|&b| continuity_row(phi, b, data)).collect::<Result<_>>()?;
    let limit = continuity_row(phi, 0.0, data)?;
    let gs: Vec<Option<f64>> = rows.iter().map(|r| r.report.map(|x| x.g)).collect();
    let g0 = limit.report.map(|x| x.g);
    let final_gap = match (gs.last().copied().flatten(), g0) {
        (Some(a), Some(b)) => Some((a - b).abs()),
        _ => None,
    };
    let cauchy = match g0 {
        Some(g0) => {
            let gaps: Vec<f64> = gs.iter().map(|g| g.map_or(f64::INFINITY, |g| (g - g0).abs())).collect();
            gaps.windows(2).all(|w| w[1] <= w[0])
        }
        None => false,
    };
    Ok(ContinuityTable { rows, limit, final_gap, cauchy })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub betas: Vec<f64>,
    /// `min (ψ_β - ψ₀)`, non-negative when the model potentials are ordered.
    pub min_difference: f64,
    /// Recorded `C` with `|ψ_β - ψ₀| ≤ C - ψ₀` on the grid.
    pub constant: f64,
    pub points: usize,
}

/// `|ψ_β - ψ₀| ≤ C - ψ₀` for `ψ_β = -2 log((1-t^β)/β)`, `ψ₀ = -2 log(-log t)`, on `t ∈ (0, e⁻¹]`.
pub fn domination_check(betas: &[f64], points: usize) -> DominationReport {
    // Grid uniform in log(-log t) over [0, log 700].
    let us = special::linspace(0.0, 700f64.ln(), points);
    let mut min_difference = f64::INFINITY;
    let mut constant = f64::NEG_INFINITY;
    for &b in betas {
        let psi_b = RadialPotential::ConicModel { beta: b };
        for &u in &us {
            let l = -u.exp();
            let p0 = -2.0 * (-l).ln();
            let pb = psi_b.value(l);
            min_difference = min_difference.min(pb - p0);
            constant = constant.max((pb - p0).abs() + p0);
        }
    }
    DominationReport { betas: betas.to_vec(), min_difference, constant, points }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StationarityReport {
    pub beta: f64,
    /// First variation of `J(φ) = ½∫φ dd^cφ - ∫ e^{φ + log 4} t^{β-1} dA` at `ψ_β` along a bump.
    pub first_variation: f64,
    /// Size of the two terms of the variation.
    pub scale: f64,
}

/// Local stationarity of the conic model potential under a bump supported in `0.2 ≤ r ≤ 0.8`.
pub fn stationarity_check(beta: f64) -> StationarityReport {
    let psi = RadialPotential::ConicModel { beta };
    let (a, b) = (2.0 * 0.2f64.ln(), 2.0 * 0.8f64.ln());
    let mid = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let bump = |l: f64| {
        let s = (l - mid) / hw;
        if s.abs() < 1.0 { (1.0 - 1.0 / (1.0 - s * s)).exp() } else { 0.0 }
    };
    let bump_slope = |l: f64| {
        let s = (l - mid) / hw;
        if s.abs() < 1.0 { bump(l) * (-2.0 * s / (1.0 - s * s).powi(2)) / hw } else { 0.0 }
    };
    let q = Quadrature::new();
    let dirichlet = -2.0 * PI * q.integrate(a, b, &[], 0.05, |l| psi.slope(l) * bump_slope(l));
    let source = -4.0 * PI * q.integrate(a, b, &[], 0.05, |l| bump(l) * (psi.value(l) + beta * l).exp());
    StationarityReport { beta, first_variation: dirichlet + source, scale: dirichlet.abs() + source.abs() }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const E1_OF_2: f64 = 0.048900510708061119567;

    fn flat() -> RadialData {
        RadialData::default()
    }

    #[test]
    fn l_of_zero_is_exact() {
        for &b in &[1.0, 0.5, 0.1, 0.01, 0.001] {
            let l = energy_l(&RadialPotential::Constant { value: 0.0 }, b, &flat()).unwrap().value;
            assert!((l + (PI / b).ln()).abs() < 1e-12, "{b}");
        }
    }

    #[test]
    fn l_of_zero_at_cusp_diverges() {
        assert!(matches!(energy_l(&RadialPotential::Constant { value: 0.0 }, 0.0, &flat()), Err(LabError::Divergent(_))));
    }

    #[test]
    fn cusp_potential_closed_forms() {
        // ∫ψ₀ dt = -2 log 2 - 2 E₁(2), ∫ r ψ₀'² dr = 4, no flux: E = -2 log 2 - 2E₁(2) - 2.
        let e = energy_e(&RadialPotential::cusp(), 0.0, &flat()).unwrap().value;
        let want = -2.0 * 2f64.ln() - 2.0 * E1_OF_2 - 2.0;
        assert!((e - want).abs() < 1e-6 * want.abs(), "{e} {want}");
        // ∫ e^{ψ₀} t^{-1} dt = ½ + ½.
        let l0 = energy_l(&RadialPotential::cusp(), 0.0, &flat()).unwrap().value;
        assert!((l0 + PI.ln()).abs() < 1e-8);
    }

    #[test]
    fn energy_of_constants() {
        assert_eq!(energy_e(&RadialPotential::Constant { value: 0.0 }, 0.3, &flat()).unwrap().value, 0.0);
        let e = energy_e(&RadialPotential::Constant { value: 2.5 }, 0.3, &flat()).unwrap().value;
        assert!((e - 2.5).abs() < 1e-14);
    }

    #[test]
    fn cosine_energy_matches_radial_quadrature() {
        // Independent evaluation in r with composite Simpson.
        let phi = RadialPotential::Cosine { coeffs: vec![0.3, -0.2], shift: 0.1 };
        let f = |r: f64| 0.1 + 0.3 * (PI * r).cos() - 0.2 * (2.0 * PI * r).cos();
        let df = |r: f64| -0.3 * PI * (PI * r).sin() + 0.4 * PI * (2.0 * PI * r).sin();
        let n = 20000;
        let h = 1.0 / n as f64;
        let (mut m, mut g) = (0.0, 0.0);
        for i in 0..=n {
            let r = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            m += w * f(r) * 2.0 * PI * r;
            g += w * r * df(r) * df(r);
        }
        let (m, g) = (m * h / 3.0, g * h / 3.0);
        let want = m / PI - 0.5 * g;
        let e = energy_e(&phi, 0.2, &flat()).unwrap().value;
        assert!((e - want).abs() < 1e-9, "{e} {want}");
    }

    #[test]
    fn jensen_equality_for_uniform_weight() {
        let r = jensen_check(&RadialPotential::Constant { value: 0.0 }, 1.0, &flat()).unwrap();
        assert!(r.slack.abs() < 1e-12);
        let r = jensen_check(&RadialPotential::Constant { value: 0.0 }, 0.5, &flat()).unwrap();
        // log 2 - ½.
        assert!((r.slack - (2f64.ln() - 0.5)).abs() < 1e-10);
    }

    #[test]
    fn domination_constant() {
        let rep = domination_check(&[0.5, 0.1, 0.01, 0.001], 2000);
        assert!(rep.min_difference >= 0.0);
        let want = -2.0 * ((1.0 - (-0.5f64).exp()) / 0.5).ln();
        assert!((rep.constant - want).abs() < 1e-12);
    }

    #[test]
    fn model_potential_is_stationary() {
        for &b in &[0.5, 0.1, 0.01] {
            let r = stationarity_check(b);
            assert!(r.first_variation.abs() < 1e-10 * r.scale, "{r:?}");
        }
    }

    #[test]
    fn continuity_ladder_for_cusp_potential() {
        let t = beta_continuity(&RadialPotential::cusp(), &[0.5, 0.1, 0.01, 0.001], &flat()).unwrap();
        assert!(t.final_gap.unwrap() < 1e-2);
        assert!(t.cauchy);
        let z = beta_continuity(&RadialPotential::Constant { value: 0.0 }, &[0.5, 0.1], &flat()).unwrap();
        assert!(z.limit.divergence.is_some() && z.final_gap.is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn translation_identities(seed in 0u64..1000, c in -3.0f64..3.0, beta in 0.01f64..1.0) {
            let phi = random_admissible(&mut seeded_rng(seed));
            let e0 = energy_e(&phi, beta, &flat()).unwrap().value;
            let e1 = energy_e(&phi.shifted(c), beta, &flat()).unwrap().value;
            let l0 = energy_l(&phi, beta, &flat()).unwrap().value;
            let l1 = energy_l(&phi.shifted(c), beta, &flat()).unwrap().value;
            prop_assert!((e1 - e0 - c).abs() < 1e-10);
            prop_assert!((l1 - l0 + c).abs() < 1e-10);
        }

        #[test]
        fn jensen_slack_nonnegative(seed in 0u64..1000, beta in 0.01f64..1.0) {
            let phi = random_admissible(&mut seeded_rng(seed));
            prop_assert!(jensen_check(&phi, beta, &flat()).unwrap().slack >= -1e-12);
        }
    }
}
