//! Scalar functions of the conic model and the elementary inequalities they obey.
//!
//! Every evaluation goes through `log t`: `t^β = exp(β log t)` and
//! `1 - t^β = -expm1(β log t)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Cone-angle parameter `β`; the cone angle is `2πβ`.
///
/// Accepts `0 < β ≤ 1`. The endpoint `β = 1` is the smooth (angle `2π`) case.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct ConeAngle(f64);

impl ConeAngle {
    pub fn new(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 && beta <= 1.0 {
            Ok(ConeAngle(beta))
        } else {
            Err(domain("beta", beta))
        }
    }

    /// Restricted range `0 < β ≤ 1/2` on which the uniform bounds hold.
    pub fn uniform(beta: f64) -> Result<Self> {
        if beta.is_finite() && beta > 0.0 && beta <= 0.5 {
            Ok(ConeAngle(beta))
        } else {
            Err(domain("beta (uniform range)", beta))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn in_uniform_range(self) -> bool {
        self.0 <= 0.5
    }
}

/// `t = |s|²` together with `log t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialParam {
    t: f64,
    log_t: f64,
}

/// Smallest accepted `log t`; `exp` of anything lower is subnormal.
pub const MIN_LOG_T: f64 = -708.0;

impl RadialParam {
    pub fn from_t(t: f64) -> Result<Self> {
        if t.is_finite() && t > 0.0 && t < 1.0 {
            Ok(RadialParam { t, log_t: t.ln() })
        } else {
            Err(domain("t", t))
        }
    }

    pub fn from_log_t(log_t: f64) -> Result<Self> {
        if log_t.is_finite() && log_t < 0.0 && log_t >= MIN_LOG_T {
            Ok(RadialParam { t: log_t.exp(), log_t })
        } else {
            Err(domain("log t", log_t))
        }
    }

    pub fn t(self) -> f64 {
        self.t
    }

    pub fn log_t(self) -> f64 {
        self.log_t
    }
}

/// `1 - t^β` for `t = e^{log_t}`.
#[inline]
pub fn one_minus_tbeta_log(log_t: f64, beta: f64) -> f64 {
    -(beta * log_t).exp_m1()
}

/// `log A(t)` for `log_t < 0`.
#[inline]
pub fn log_a_raw(log_t: f64, beta: f64) -> f64 {
    2.0 * beta.ln() + (beta - 1.0) * log_t - 2.0 * log_one_minus_tbeta(log_t, beta)
}

/// `log(1 - t^β)`, accurate for `t^β` near 0 and near 1.
#[inline]
pub fn log_one_minus_tbeta(log_t: f64, beta: f64) -> f64 {
    let tb = (beta * log_t).exp();
    if tb < 0.5 {
        (-tb).ln_1p()
    } else {
        one_minus_tbeta_log(log_t, beta).ln()
    }
}

/// `A(t) = β² t^{β-1} (1-t^β)^{-2}`, from `log t`.
#[inline]
pub fn a_raw(log_t: f64, beta: f64) -> f64 {
    log_a_raw(log_t, beta).exp()
}

/// `B(t) = β t^β / (1-t^β)`, from `log t`.
#[inline]
pub fn b_raw(log_t: f64, beta: f64) -> f64 {
    beta * (beta * log_t).exp() / one_minus_tbeta_log(log_t, beta)
}

/// `(A'(t), A''(t))`, from `log t`.
///
/// Overflows to `+∞` once `t^{β-3}` leaves the double range (`log t ≲ -236`).
pub fn a_derivs_raw(log_t: f64, beta: f64) -> (f64, f64) {
    let tb = (beta * log_t).exp();
    let omt = one_minus_tbeta_log(log_t, beta);
    let la = log_a_raw(log_t, beta);
    let d1 = (la - log_t).exp() * ((beta - 1.0) + (beta + 1.0) * tb) / omt;
    let poly = (beta - 1.0) * (beta - 2.0)
        + 4.0 * (beta * beta - 1.0) * tb
        + (beta * beta + 3.0 * beta + 2.0) * tb * tb;
    let d2 = (la - 2.0 * log_t).exp() * poly / (omt * omt);
    (d1, d2)
}

pub fn eval_a(t: RadialParam, beta: ConeAngle) -> f64 {
    a_raw(t.log_t, beta.0)
}

pub fn eval_b(t: RadialParam, beta: ConeAngle) -> f64 {
    b_raw(t.log_t, beta.0)
}

pub fn eval_a_derivs(t: RadialParam, beta: ConeAngle) -> (f64, f64) {
    a_derivs_raw(t.log_t, beta.0)
}

/// `(1 - t^β)/β`; tends to `-log t` as `β → 0`.
pub fn one_minus_tbeta_over_beta(t: RadialParam, beta: ConeAngle) -> f64 {
    one_minus_tbeta_log(t.log_t, beta.0) / beta.0
}

/// `(1 - t^β)/β` for any `t > 0` given by `log t` (the value is negative for `t > 1`).
pub fn one_minus_tbeta_over_beta_log(log_t: f64, beta: f64) -> f64 {
    one_minus_tbeta_log(log_t, beta) / beta
}

/// Relative residual of `-(tA''+A') + tA'²/A = -2A²` with every term evaluated
/// in plain double precision from the closed forms.
///
/// The terms are `1/(tA)` times larger than the result, so this loses up to
/// seven digits for `β` near `1/2` and small `t`.
pub fn cancellation_residual_naive(log_t: f64, beta: f64) -> f64 {
    let t = log_t.exp();
    let a = a_raw(log_t, beta);
    let (d1, d2) = a_derivs_raw(log_t, beta);
    let lhs = -(t * d2 + d1) + t * d1 * d1 / a;
    let rhs = -2.0 * a * a;
    ((lhs - rhs) / rhs).abs()
}

/// Relative residual of `-(tA''+A') + tA'²/A = -2A²`.
///
/// Each of `tA''`, `A'`, `tA'²/A` and `2A²` is the positive factor
/// `A / (t (1-t^β)²)` times a polynomial in `τ = t^β`; the factor is divided out
/// and the polynomial combination `p₁² - p₂ - p₁(1-τ) + 2β²τ` is evaluated in
/// compensated double-double arithmetic.
pub fn cancellation_residual(log_t: f64, beta: f64) -> f64 {
    let tau = Dd::from((beta * log_t).exp());
    let b = Dd::from(beta);
    let one = Dd::from(1.0);
    let omt = one - tau;
    let bm1 = b - one;
    let bp1 = b + one;
    let p1 = bm1 + bp1 * tau;
    let p2 = bm1 * (b - Dd::from(2.0))
        + Dd::from(4.0) * (b * b - one) * tau
        + (b * b + Dd::from(3.0) * b + Dd::from(2.0)) * tau * tau;
    let rhs = Dd::from(-2.0) * b * b * tau;
    let lhs = p1 * p1 - p2 - p1 * omt;
    ((lhs - rhs).hi / rhs.hi).abs()
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl From<f64> for Dd {
    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

impl std::ops::Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (hi, lo) = two_sum(s, e + self.lo + o.lo);
        Dd { hi, lo }
    }
}

impl std::ops::Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl std::ops::Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl std::ops::Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        let (hi, lo) = two_sum(p, e + self.hi * o.lo + self.lo * o.hi);
        Dd { hi, lo }
    }
}

/// Grid on which the inequalities are checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InequalityGrid {
    pub betas: Vec<f64>,
    pub log_t_min: f64,
    pub log_t_max: f64,
    pub n_t: usize,
}

impl Default for InequalityGrid {
    fn default() -> Self {
        InequalityGrid {
            betas: (1..=50).map(|k| 0.01 * k as f64).collect(),
            log_t_min: -700.0,
            log_t_max: 0.25f64.ln(),
            n_t: 10_000,
        }
    }
}

impl InequalityGrid {
    pub fn log_ts(&self) -> Vec<f64> {
        linspace(self.log_t_min, self.log_t_max, self.n_t)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqualityPoint {
    pub beta: f64,
    pub located_t: f64,
    pub closed_form_t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InequalityReport {
    pub points: usize,
    /// `max (β/(1-t^β) - 1)` over `t ≤ 1/4`.
    pub part_i_max_violation: f64,
    /// `max ((1-t^β)/β + log t)` over the grid.
    pub part_ii_max_violation: f64,
    /// `sup A(t) t^{1-β}`.
    pub sup_a_scaled: f64,
    /// `sup B(t)`.
    pub sup_b: f64,
    /// Root of `1 - t^β = β`, one per grid `β`.
    pub part_i_equality: Vec<EqualityPoint>,
    /// Minimizer of `-log t - (1-t^β)/β` over `t > 0`, one per grid `β`.
    pub part_ii_equality: Vec<EqualityPoint>,
}

impl InequalityReport {
    pub fn max_equality_error(&self) -> f64 {
        self.part_i_equality
            .iter()
            .chain(self.part_ii_equality.iter())
            .map(|e| (e.located_t - e.closed_form_t).abs())
            .fold(0.0, f64::max)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                a + (b - a) * s
            })
            .collect(),
    }
}

/// Root of a monotone function on `[lo, hi]` by bisection, to absolute width `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn check_ab_inequalities(grid: &InequalityGrid) -> InequalityReport {
    let log_ts = grid.log_ts();
    let quarter = 0.25f64.ln();
    let mut rep = InequalityReport {
        points: 0,
        part_i_max_violation: f64::NEG_INFINITY,
        part_ii_max_violation: f64::NEG_INFINITY,
        sup_a_scaled: 0.0,
        sup_b: 0.0,
        part_i_equality: Vec::new(),
        part_ii_equality: Vec::new(),
    };
    for &beta in &grid.betas {
        for &lt in &log_ts {
            rep.points += 1;
            let omt = one_minus_tbeta_log(lt, beta);
            if lt <= quarter {
                rep.part_i_max_violation = rep.part_i_max_violation.max(beta / omt - 1.0);
                rep.sup_a_scaled = rep.sup_a_scaled.max(a_raw(lt, beta) * ((1.0 - beta) * lt).exp());
                rep.sup_b = rep.sup_b.max(b_raw(lt, beta));
            }
            rep.part_ii_max_violation = rep.part_ii_max_violation.max(omt / beta + lt);
        }
        // 1 - t^β - β is decreasing in log t.
        let root_i = bisect(|l| one_minus_tbeta_log(l, beta) - beta, -60.0 / beta.max(1e-3), 0.0, 1e-15);
        rep.part_i_equality.push(EqualityPoint {
            beta,
            located_t: root_i.exp(),
            closed_form_t: (1.0 - beta).powf(1.0 / beta),
        });
        // d/d(log t) of (-log t - (1-t^β)/β) is t^β - 1.
        let root_ii = bisect(|l| (beta * l).exp_m1(), -10.0, 10.0, 1e-15);
        rep.part_ii_equality.push(EqualityPoint { beta, located_t: root_ii.exp(), closed_form_t: 1.0 });
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rp(t: f64) -> RadialParam {
        RadialParam::from_t(t).unwrap()
    }

    #[test]
    fn exact_rational_values() {
        let half = ConeAngle::new(0.5).unwrap();
        assert!((eval_a(rp(0.25), half) - 2.0).abs() < 1e-14);
        assert!((eval_b(rp(0.25), half) - 0.5).abs() < 1e-15);
        let one = ConeAngle::new(1.0).unwrap();
        assert!((eval_a(rp(0.5), one) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(RadialParam::from_t(0.0).is_err());
        assert!(RadialParam::from_t(1.0).is_err());
        assert!(RadialParam::from_t(-0.5).is_err());
        assert!(ConeAngle::new(0.0).is_err());
        assert!(ConeAngle::new(1.5).is_err());
        assert!(ConeAngle::uniform(0.6).is_err());
        assert!(ConeAngle::uniform(0.5).is_ok());
    }

    #[test]
    fn a_is_finite_down_to_log_t_minus_700() {
        for &beta in &[0.01, 0.1, 0.5, 0.9] {
            let a = a_raw(-700.0, beta);
            assert!(a.is_finite() && a > 0.0, "beta={beta} a={a}");
            let t = (-700.0f64).exp();
        let want = beta * beta * t.powf(beta - 1.0) / (1.0 - t.powf(beta)).powi(2);
            assert!(((a - want) / want).abs() < 1e-12);
        }
    }

    fn fd4(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn derivatives_match_central_differences() {
        let beta = 0.5;
        let t0: f64 = 0.25;
        let a = |t: f64| a_raw(t.ln(), beta);
        let (d1, d2) = a_derivs_raw(t0.ln(), beta);
        let fd1 = fd4(a, t0, 1e-3);
        assert!(((fd1 - d1) / d1).abs() < 1e-8, "{fd1} vs {d1}");
        let fd2 = fd4(|t| a_derivs_raw(t.ln(), beta).0, t0, 1e-3);
        assert!(((fd2 - d2) / d2).abs() < 1e-8, "{fd2} vs {d2}");
    }

    #[test]
    fn b_prime_is_a() {
        let beta = 0.5;
        let fd = fd4(|t| b_raw(t.ln(), beta), 0.25, 1e-3);
        assert!((fd - 2.0).abs() < 1e-8);
    }

    #[test]
    fn naive_identity_residual_shows_the_conditioning() {
        // At β = 1/2, log t = -27 the terms exceed the result by 1/(tA) ≈ 3e6.
        assert!(cancellation_residual_naive(-27.0, 0.5) > 1e-12);
        assert!(cancellation_residual_naive(0.25f64.ln(), 0.5) < 1e-14);
        assert!(cancellation_residual(-27.0, 0.5) < 1e-20);
    }

    #[test]
    fn cancellation_identity_value_at_quarter() {
        let lt = 0.25f64.ln();
        let t = 0.25;
        let a = a_raw(lt, 0.5);
        let (d1, d2) = a_derivs_raw(lt, 0.5);
        let lhs = -(t * d2 + d1) + t * d1 * d1 / a;
        assert!((lhs + 8.0).abs() < 1e-12, "{lhs}");
    }

    #[test]
    fn one_minus_tbeta_over_beta_limits() {
        let lt = -1.0;
        let v = one_minus_tbeta_over_beta_log(lt, 1e-12);
        assert!((v - 1.0).abs() < 1e-11);
        assert_eq!(one_minus_tbeta_over_beta_log(0.0, 0.3), 0.0);
        let t = rp(0.3);
        let mut prev = 0.0;
        for &b in &[0.5, 0.25, 0.1, 0.01] {
            let v = one_minus_tbeta_over_beta(t, ConeAngle::new(b).unwrap());
            assert!(v > prev && v <= -t.log_t());
            prev = v;
        }
    }

    #[test]
    fn small_beta_has_no_cancellation() {
        // 1 - t^β at β = 1e-9 and t = 0.9 is about β·0.105.
        let v = one_minus_tbeta_over_beta_log(0.9f64.ln(), 1e-9);
        assert!((v + 0.9f64.ln()).abs() < 1e-9 * 0.01);
    }

    #[test]
    fn inequality_report_on_default_grid() {
        let rep = check_ab_inequalities(&InequalityGrid::default());
        assert!(rep.part_i_max_violation <= 1e-14);
        assert!(rep.part_ii_max_violation <= 1e-14);
        assert!(rep.sup_a_scaled <= 1.0 + 1e-14);
        assert!(rep.sup_b <= 1.0 + 1e-14);
        assert!(rep.max_equality_error() <= 1e-9);
        let half = rep.part_i_equality.iter().find(|e| e.beta == 0.5).unwrap();
        assert!((half.located_t - 0.25).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn log_space_agrees_with_naive(lt in -18.4f64..-0.01, beta in 0.01f64..1.0) {
            let t = lt.exp();
            let naive_a = beta * beta * t.powf(beta - 1.0) / (1.0 - t.powf(beta)).powi(2);
            let naive_b = beta * t.powf(beta) / (1.0 - t.powf(beta));
            prop_assert!(((a_raw(lt, beta) - naive_a) / naive_a).abs() < 1e-10);
            prop_assert!(((b_raw(lt, beta) - naive_b) / naive_b).abs() < 1e-10);
        }

        #[test]
        fn cancellation_identity_holds(lt in -27.0f64..-1.3862943611198906, beta in 0.05f64..0.5) {
            prop_assert!(cancellation_residual(lt, beta) <= 1e-10);
        }

        #[test]
        fn uniform_bounds(lt in -700.0f64..-1.3862943611198906, beta in 1e-4f64..=0.5) {
            let omt = one_minus_tbeta_log(lt, beta);
            prop_assert!(beta / omt <= 1.0 + 1e-15);
            prop_assert!(b_raw(lt, beta) <= 1.0 + 1e-15);
        }

        #[test]
        fn log_inequality_on_positive_axis(lt in -50.0f64..50.0, beta in 1e-3f64..1.0) {
            prop_assert!(one_minus_tbeta_over_beta_log(lt, beta) <= -lt + 1e-14 * lt.abs().max(1.0));
        }
    }
}
