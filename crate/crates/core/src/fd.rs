//! Fourth-order central differences, including Wirtinger derivatives of
//! matrix-valued fields of several complex variables.

use crate::error::Result;
use crate::linalg::{CMat, C64, I};

/// Weights of the 4th-order first-derivative stencil at offsets `-2, -1, 1, 2`.
const D1: [(f64, f64); 4] = [(-2.0, 1.0 / 12.0), (-1.0, -8.0 / 12.0), (1.0, 8.0 / 12.0), (2.0, -1.0 / 12.0)];

/// Weights of the 4th-order second-derivative stencil at offsets `-2..=2`.
const D2: [(f64, f64); 5] =
    [(-2.0, -1.0 / 12.0), (-1.0, 16.0 / 12.0), (0.0, -30.0 / 12.0), (1.0, 16.0 / 12.0), (2.0, -1.0 / 12.0)];

pub fn deriv1(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    D1.iter().map(|&(o, w)| w * f(x + o * h)).sum::<f64>() / h
}

pub fn deriv2(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    D2.iter().map(|&(o, w)| w * f(x + o * h)).sum::<f64>() / (h * h)
}

/// Value, first and second real partial derivatives of a matrix field of `m` real variables.
pub struct RealJet {
    pub value: CMat,
    pub d1: Vec<CMat>,
    /// Symmetric, `d2[a][b] = ∂_a ∂_b`.
    pub d2: Vec<Vec<CMat>>,
}

/// Nested 4th-order central differences of `f` at `x0` with step `h`.
pub fn real_jet(f: &dyn Fn(&[f64]) -> Result<CMat>, x0: &[f64], h: f64) -> Result<RealJet> {
    let m = x0.len();
    let eval = |offs: &[(usize, f64)]| -> Result<CMat> {
        let mut x = x0.to_vec();
        for &(k, o) in offs {
            x[k] += o * h;
        }
        f(&x)
    };
    let value = f(x0)?;
    let zero = value.map(|_| C64::new(0.0, 0.0));
    let mut d1 = vec![zero.clone(); m];
    let mut d2 = vec![vec![zero.clone(); m]; m];
    for a in 0..m {
        let mut acc1 = zero.clone();
        let mut acc2 = zero.clone();
        for &(o, w) in &D1 {
            acc1 += eval(&[(a, o)])? * C64::from(w);
        }
        for &(o, w) in &D2 {
            let v = if o == 0.0 { value.clone() } else { eval(&[(a, o)])? };
            acc2 += v * C64::from(w);
        }
        d1[a] = acc1 / C64::from(h);
        d2[a][a] = acc2 / C64::from(h * h);
    }
    for a in 0..m {
        for b in (a + 1)..m {
            let mut acc = zero.clone();
            for &(oa, wa) in &D1 {
                for &(ob, wb) in &D1 {
                    acc += eval(&[(a, oa), (b, ob)])? * C64::from(wa * wb);
                }
            }
            let v = acc / C64::from(h * h);
            d2[a][b] = v.clone();
            d2[b][a] = v;
        }
    }
    Ok(RealJet { value, d1, d2 })
}

/// Wirtinger derivatives `∂_a G`, `∂̄_a G` and `∂_a ∂̄_b G` of a matrix field of
/// `n` complex variables `ζ_a = ξ_{2a} + i ξ_{2a+1}`.
pub struct ComplexJet {
    pub value: CMat,
    pub d: Vec<CMat>,
    pub dbar: Vec<CMat>,
    /// `ddbar[a][b] = ∂_a ∂̄_b G`.
    pub ddbar: Vec<Vec<CMat>>,
}

pub fn complex_jet(f: &dyn Fn(&[C64]) -> Result<CMat>, z0: &[C64], h: f64) -> Result<ComplexJet> {
    let n = z0.len();
    let real = |xi: &[f64]| -> Result<CMat> {
        let z: Vec<C64> = (0..n).map(|a| C64::new(xi[2 * a], xi[2 * a + 1])).collect();
        f(&z)
    };
    let xi0: Vec<f64> = z0.iter().flat_map(|z| [z.re, z.im]).collect();
    let jet = real_jet(&real, &xi0, h)?;
    let half = C64::from(0.5);
    let quarter = C64::from(0.25);
    let d = (0..n).map(|a| (&jet.d1[2 * a] - &jet.d1[2 * a + 1] * I) * half).collect();
    let dbar = (0..n).map(|a| (&jet.d1[2 * a] + &jet.d1[2 * a + 1] * I) * half).collect();
    let ddbar = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
                    let re = &jet.d2[xa][xb] + &jet.d2[ya][yb];
                    let im = &jet.d2[xa][yb] - &jet.d2[ya][xb];
                    (re + im * I) * quarter
                })
                .collect()
        })
        .collect();
    Ok(ComplexJet { value: jet.value, d, dbar, ddbar })
}

/// Complex Hessian `∂_i ∂̄_j f` of a real function, i.e. the `dd^c = i∂∂̄` coefficients.
pub fn complex_hessian(f: &dyn Fn(&[C64]) -> Result<f64>, z0: &[C64], h: f64) -> Result<CMat> {
    let n = z0.len();
    let g = |z: &[C64]| -> Result<CMat> { Ok(CMat::from_element(1, 1, C64::from(f(z)?))) };
    let jet = complex_jet(&g, z0, h)?;
    Ok(CMat::from_fn(n, n, |i, j| jet.ddbar[i][j][(0, 0)]))
}
