//! Normalizations shared by every module.
//!
//! * `dd^c = i∂∂̄`. A potential `P` produces the hermitian coefficients
//!   `g_{ij̄} = ∂_i ∂̄_j P`, and a weight `φ_h` of `h = e^{-φ_h}` has Chern curvature
//!   `Θ_{ij̄} = ∂_i ∂̄_j φ_h`.
//! * Potentials written with a squared logarithm, such as `-log[(1-t^β)/β]²`,
//!   `-log log²t` or `-2log(-log t)`, are *doubled* potentials: the metric they
//!   describe is `½ dd^c` of them. Equivalently the conic correction potential of
//!   the reference metric is `-log[(1-t^β)/β]` under `dd^c`. With this reading the
//!   disk model has `λ_β = A(|z|²)`, and the reference metric is
//!   `g̃ + A⟨D's, D's⟩ - BΘ`.
//! * A conformal metric is `λ · i dz∧dz̄`, with Riemannian line element `λ|dz|²`
//!   up to the constant factor 2, and Gaussian curvature `K = -(2/λ) ∂∂̄ log λ`.
//!   Under this normalization every disk model and the Poincaré metric have
//!   `K = -4`.
//! * Curvature tensor: `R_{ij̄kl̄} = -∂_k∂̄_l g_{ij̄} + (∂_k g) g^{-1} (∂̄_l g)`
//!   as matrices in `(i, j)`. In dimension one `K = 2 R_{11̄11̄} / λ²`, so
//!   `R_{11̄11̄}/λ² = -2` for the disk models.
//! * Radial problems use `x = log r`, where `∂∂̄ f = ¼ e^{-2x} f_xx`.

/// Scale between a doubled potential and the metric it describes.
pub const DOUBLED_POTENTIAL_SCALE: f64 = 0.5;

/// Gaussian curvature of the disk models.
pub const MODEL_GAUSS_CURVATURE: f64 = -4.0;

/// `R_{11̄11̄}/λ²` of the disk models.
pub const MODEL_HOLOMORPHIC_SECTIONAL: f64 = -2.0;

/// Multiplier converting `R_{11̄11̄}/λ²` into Gaussian curvature.
pub const GAUSS_FROM_SECTIONAL: f64 = 2.0;

/// `|s|² < e^{-1}` on a normalized patch.
pub const NORMALIZED_SECTION_BOUND: f64 = 0.367_879_441_171_442_33;

/// Default deterministic seed.
pub const DEFAULT_SEED: u64 = 42;
