//! Cylindrical metrics on `ℂ* × ℂ^{n-1}`: constant hermitian coefficients in the frame
//! `(dz₁/z₁, dz₂, …, dz_n)`, and their two-parameter normal form.
//!
//! Writing the coefficient matrix as `[[a, r], [r*, M]]`, a transverse frame change
//! `diag(1, Q)` with `Q = L^{-H} V` (`M = L L^H`, `V` unitary) brings it to
//! `[[a, b, 0], [b, 1, 0], [0, 0, I]]` with `b = ‖r L^{-H}‖`, so `b² = r M⁻¹ r*` and `a > b²`.

use rand::Rng;
use serde::Serialize;

use crate::error::{domain, LabError, Result};
use crate::fd;
use crate::linalg::{self, CMat, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CylinderNormalForm {
    pub a: f64,
    pub b: f64,
}

impl CylinderNormalForm {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(b >= 0.0 && a > b * b) {
            return Err(domain("a - b² (normal form)", a - b * b));
        }
        Ok(Self { a, b })
    }

    /// Reduced matrix of dimension `n`.
    pub fn reduced_matrix(&self, n: usize) -> CMat {
        let mut m = CMat::identity(n, n);
        m[(0, 0)] = C64::from(self.a);
        if n > 1 {
            m[(0, 1)] = C64::from(self.b);
            m[(1, 0)] = C64::from(self.b);
        }
        m
    }

    /// `(trace, det)` of the reduced matrix.
    pub fn invariants(&self, n: usize) -> (f64, f64) {
        (self.a + (n - 1) as f64, self.a - self.b * self.b)
    }

    pub fn from_invariants(trace: f64, det: f64, n: usize) -> Result<Self> {
        let a = trace - (n - 1) as f64;
        let b2 = a - det;
        // Rounding can leave b² a few ulps below zero on the diagonal stratum.
        let b = if b2 < 0.0 && b2 > -1e-14 * a.abs().max(1.0) { 0.0 } else { b2.sqrt() };
        Self::new(a, b)
    }
}

/// Transverse frame change `T = diag(1, L^{-H} V)` with `T* A T` reduced, and the resulting form.
pub fn reduce(m: &CMat) -> Result<(CylinderNormalForm, CMat)> {
    let n = m.nrows();
    if n < 2 || m.ncols() != n {
        return Err(domain("dimension (cylinder)", n as f64));
    }
    if linalg::hermitian_defect(m) > 1e-12 * linalg::max_abs(m).max(1.0) {
        return Err(LabError::NotPositiveDefinite { context: "cylinder matrix is not hermitian" });
    }
    // Full factorization first so that a failure reports the whole matrix.
    linalg::cholesky(m, "cylinder matrix")?;
    let a = m[(0, 0)].re;
    let lower = m.view((1, 1), (n - 1, n - 1)).into_owned();
    let l = linalg::cholesky(&lower, "transverse block")?;
    let p = linalg::inverse(&l, "transverse factor")?.adjoint();
    let row = m.view((0, 1), (1, n - 1)).into_owned();
    let y = &row * &p;
    let v = align_row(y.as_slice());
    let q = &p * &v;
    let mut t = CMat::identity(n, n);
    t.view_mut((1, 1), (n - 1, n - 1)).copy_from(&q);
    let b = linalg::vec_norm(y.as_slice());
    Ok((CylinderNormalForm::new(a, b)?, t))
}

/// Unitary `V` with `y V = (‖y‖, 0, …, 0)`; identity when `y = 0`.
fn align_row(y: &[C64]) -> CMat {
    let k = y.len();
    let norm = linalg::vec_norm(y);
    if norm == 0.0 {
        return CMat::identity(k, k);
    }
    // Column x = y*; H x = α e₁ with H = I - 2vv*/(v*v), then a phase on the first axis.
    let x: Vec<C64> = y.iter().map(|c| c.conj()).collect();
    let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { C64::from(1.0) };
    let alpha = -phase * norm;
    let mut v = CMat::from_fn(k, 1, |i, _| x[i]);
    v[(0, 0)] -= alpha;
    let vv = v.norm_squared();
    let h = if vv == 0.0 { CMat::identity(k, k) } else { CMat::identity(k, k) - (&v * v.adjoint()) * C64::from(2.0 / vv) };
    let mut d = CMat::identity(k, k);
    d[(0, 0)] = if vv == 0.0 { C64::from(1.0) } else { C64::from(norm) / alpha };
    // V* = D H, so V = H D*.
    h * d.adjoint()
}

pub fn cylinder_normal_form(m: &CMat) -> Result<CylinderNormalForm> {
    Ok(reduce(m)?.0)
}

pub fn isometry_invariants(m: &CMat) -> Result<(f64, f64)> {
    Ok(cylinder_normal_form(m)?.invariants(m.nrows()))
}

/// Allowed frame change `T` with `T* A T = B`, when both have the same normal form.
pub fn isometry_witness(a: &CMat, b: &CMat, tol: f64) -> Result<Option<CMat>> {
    let (fa, ta) = reduce(a)?;
    let (fb, tb) = reduce(b)?;
    if a.nrows() != b.nrows() || (fa.a - fb.a).abs() > tol || (fa.b - fb.b).abs() > tol {
        return Ok(None);
    }
    Ok(Some(ta * linalg::inverse(&tb, "witness")?))
}

/// Random allowed isometry: `diag(±1, G)` with `G` invertible.
pub fn random_allowed_isometry(n: usize, rng: &mut impl Rng) -> CMat {
    let mut t = CMat::identity(n, n);
    if rng.gen_bool(0.5) {
        t[(0, 0)] = C64::from(-1.0);
    }
    loop {
        let g = CMat::from_fn(n - 1, n - 1, |i, j| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) + if i == j { C64::from(1.5) } else { C64::from(0.0) }
        });
        if linalg::condition_number(&(g.adjoint() * &g)) < 1e4 {
            t.view_mut((1, 1), (n - 1, n - 1)).copy_from(&g);
            return t;
        }
    }
}

/// Random hermitian positive-definite matrix `B*B + 0.2n I`.
pub fn random_positive_definite(n: usize, rng: &mut impl Rng) -> CMat {
    let b = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    b.adjoint() * &b + CMat::identity(n, n) * C64::from(0.2 * n as f64)
}

#[derive(Debug, Clone, Serialize)]
pub struct NormalFormRecord {
    pub matrix: Vec<Vec<[f64; 2]>>,
    pub a: f64,
    pub b: f64,
    pub invariants: (f64, f64),
}

impl NormalFormRecord {
    pub fn new(m: &CMat) -> Result<Self> {
        let f = cylinder_normal_form(m)?;
        Ok(Self {
            matrix: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect(),
            a: f.a,
            b: f.b,
            invariants: f.invariants(m.nrows()),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassificationReport {
    pub samples: usize,
    pub min_gap: f64,
    pub max_invariant_error: f64,
    pub max_recovery_error: f64,
    pub max_witness_residual: f64,
    pub records: Vec<NormalFormRecord>,
}

/// Normal forms of random matrices, invariance under random allowed isometries,
/// `(a, b)` recovery from the invariants, and witnesses between equivalent pairs.
pub fn classification_check(samples: usize, rng: &mut impl Rng, keep_records: usize) -> Result<ClassificationReport> {
    let mut rep = ClassificationReport {
        samples,
        min_gap: f64::INFINITY,
        max_invariant_error: 0.0,
        max_recovery_error: 0.0,
        max_witness_residual: 0.0,
        records: Vec::new(),
    };
    for i in 0..samples {
        let n = 2 + i % 3;
        let m = random_positive_definite(n, rng);
        let f = cylinder_normal_form(&m)?;
        rep.min_gap = rep.min_gap.min(f.a - f.b * f.b);
        let t = random_allowed_isometry(n, rng);
        let moved = t.adjoint() * &m * &t;
        let moved = linalg::hermitian_part(&moved);
        let (t0, d0) = f.invariants(n);
        let (t1, d1) = isometry_invariants(&moved)?;
        rep.max_invariant_error = rep.max_invariant_error.max(((t0 - t1).abs()).max((d0 - d1).abs()) / t0.abs().max(1.0));
        let red = f.reduced_matrix(n);
        let tr: f64 = (0..n).map(|k| red[(k, k)].re).sum();
        let det = red.determinant().re;
        let back = CylinderNormalForm::from_invariants(tr, det, n)?;
        rep.max_recovery_error = rep.max_recovery_error.max((back.a - f.a).abs().max((back.b - f.b).abs()));
        if let Some(w) = isometry_witness(&m, &moved, 1e-9)? {
            let res = linalg::max_abs(&(w.adjoint() * &m * &w - &moved)) / linalg::max_abs(&moved);
            rep.max_witness_residual = rep.max_witness_residual.max(res);
        } else {
            rep.max_witness_residual = f64::INFINITY;
        }
        if i < keep_records {
            rep.records.push(NormalFormRecord::new(&m)?);
        }
    }
    Ok(rep)
}

/// Metric coefficients at `z` of a cylindrical metric, or of a comparison metric.
pub trait CylinderLike {
    fn dim(&self) -> usize;
    fn coefficients(&self, z: &[C64]) -> Result<CMat>;
}

#[derive(Debug, Clone)]
pub struct CylindricalMetric {
    pub frame: CMat,
}

impl CylindricalMetric {
    pub fn new(frame: CMat) -> Result<Self> {
        linalg::cholesky(&frame, "cylindrical metric")?;
        Ok(Self { frame })
    }
}

fn push_forward(frame: &CMat, z: &[C64]) -> Result<CMat> {
    if z[0].norm() == 0.0 {
        return Err(domain("|z₁|", 0.0));
    }
    let inv = z[0].inv();
    let mut g = frame.clone();
    for j in 0..g.ncols() {
        g[(0, j)] *= inv;
        g[(j, 0)] *= inv.conj();
    }
    Ok(g)
}

impl CylinderLike for CylindricalMetric {
    fn dim(&self) -> usize {
        self.frame.nrows()
    }
    fn coefficients(&self, z: &[C64]) -> Result<CMat> {
        push_forward(&self.frame, z)
    }
}

/// Non-cylindrical control: the first frame coefficient gains `|z₁|²`.
#[derive(Debug, Clone)]
pub struct RadiallyWarped(pub CylindricalMetric);

impl CylinderLike for RadiallyWarped {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn coefficients(&self, z: &[C64]) -> Result<CMat> {
        let mut f = self.0.frame.clone();
        f[(0, 0)] += C64::from(z[0].norm_sqr());
        push_forward(&f, z)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RicciFlatReport {
    pub samples: usize,
    pub max_coefficient_variation: f64,
    pub max_log_det_gradient: f64,
    pub passed: bool,
}

/// Pulls back under `(e^{ζ₁}, ζ₂, …)` and differentiates `log det` along the samples.
pub fn ricci_flat_check(metric: &dyn CylinderLike, samples: &[Vec<C64>], tol: f64) -> Result<RicciFlatReport> {
    let n = metric.dim();
    let pulled = |zeta: &[C64]| -> Result<CMat> {
        let e = zeta[0].exp();
        let z: Vec<C64> = std::iter::once(e).chain(zeta[1..].iter().copied()).collect();
        let mut g = metric.coefficients(&z)?;
        for j in 0..n {
            g[(0, j)] *= e;
            g[(j, 0)] *= e.conj();
        }
        Ok(g)
    };
    let log_det = |zeta: &[C64]| -> Result<CMat> { Ok(CMat::from_element(1, 1, C64::from(pulled(zeta)?.determinant().re.ln()))) };
    let reference = pulled(&samples[0])?;
    let mut variation: f64 = 0.0;
    let mut gradient: f64 = 0.0;
    for s in samples {
        variation = variation.max(linalg::max_abs(&(pulled(s)? - &reference)));
        let jet = fd::complex_jet(&log_det, s, 1e-2)?;
        for k in 0..n {
            gradient = gradient.max(jet.d[k][(0, 0)].norm()).max(jet.dbar[k][(0, 0)].norm());
        }
    }
    Ok(RicciFlatReport { samples: samples.len(), max_coefficient_variation: variation, max_log_det_gradient: gradient, passed: gradient <= tol })
}

/// Sample points `(ζ₁, ζ₂, …)` on the universal cover with `|Re ζ₁| ≤ 2`.
pub fn cover_samples(n: usize, count: usize, rng: &mut impl Rng) -> Vec<Vec<C64>> {
    (0..count)
        .map(|_| (0..n).map(|k| C64::new(rng.gen_range(-2.0..2.0), rng.gen_range(if k == 0 { -3.14..3.14 } else { -1.0..1.0 }))).collect())
        .collect()
}
