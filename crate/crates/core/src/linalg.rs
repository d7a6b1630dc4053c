//! Small complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{LabError, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    let d = m - m.adjoint();
    d.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(m + m^H)/2`.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// Eigenvalues of a hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let eig = nalgebra::SymmetricEigen::new(hermitian_part(m));
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn min_eigenvalue(m: &CMat) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// Ratio of extreme eigenvalues of a positive-definite hermitian matrix.
pub fn condition_number(m: &CMat) -> f64 {
    let ev = hermitian_eigenvalues(m);
    ev[ev.len() - 1] / ev[0]
}

/// Lower-triangular `L` with `m = L L^H`.
pub fn cholesky(m: &CMat, context: &'static str) -> Result<CMat> {
    nalgebra::Cholesky::new(hermitian_part(m))
        .map(|ch| ch.l())
        .ok_or(LabError::NotPositiveDefinite { context })
}

pub fn inverse(m: &CMat, context: &'static str) -> Result<CMat> {
    m.clone().try_inverse().ok_or(LabError::NotPositiveDefinite { context })
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
