//! Independent verification paths: the complex-form integrator, the
//! single-excitation amplitude model, quadrature of the rate integrals, the
//! analytic single-atom solution, and general-purpose two-qubit tomography.

pub mod amplitude;
pub mod complex;
pub mod manifest;
pub mod rates;

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C;

use crate::dynamics::DynamicState;
use crate::error::{Error, Result};
use crate::tomography::DensityMatrix;

pub use amplitude::{integrate_amplitudes, AmplitudeTrajectory};
pub use complex::{integrate_complex, ComplexTrajectory, FixedStep};
pub use manifest::{run_manifest, GoldenEntry, Manifest, ValidationOutcome};
pub use rates::{rate_integral_quadrature, RateKind, RateQuadrature};

/// Excited-state population of a lone atom under the rising pulse, `t ≤ 0`:
/// `4γ₁₀²Ω e^{Ωt} / (γ₀(Ω+γ)²)`.
pub fn single_atom_analytic(omega: f64, gamma: f64, gamma10: f64, gamma0: f64, t: f64) -> Result<f64> {
    if t > 0.0 {
        return Err(Error::Domain(format!("closed form holds for t <= 0, got t = {t}")));
    }
    if !(omega > 0.0 && gamma > 0.0 && gamma0 > 0.0) {
        return Err(Error::InvalidInput("omega, gamma and gamma0 must be > 0".into()));
    }
    Ok(4.0 * gamma10 * gamma10 * omega / (gamma0 * (omega + gamma).powi(2)) * (omega * t).exp())
}

fn pauli() -> [Matrix2<C>; 4] {
    let (o, l, i) = (C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 1.0));
    // basis order {|e⟩, |g⟩}: σᶻ|e⟩ = |e⟩, σ⁻ = |g⟩⟨e|
    [Matrix2::new(l, o, o, l), Matrix2::new(o, l, l, o), Matrix2::new(o, -i, i, o), Matrix2::new(l, o, o, -l)]
}

fn kron(a: &Matrix2<C>, b: &Matrix2<C>) -> Matrix4<C> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `⟨σₐ⊗σ_b⟩` table (`0 = 1, 1 = x, 2 = y, 3 = z`) implied by the tracked
/// variables, completed with `⟨yy⟩ = ⟨xx⟩`, `⟨yx⟩ = -⟨xy⟩` and zero for
/// every expectation odd in a single-atom coherence.
pub fn pauli_table(s: &DynamicState<f64>) -> [[f64; 4]; 4] {
    let mut t = [[0.0; 4]; 4];
    t[0][0] = 1.0;
    t[3][0] = s.m1;
    t[0][3] = s.m2;
    t[1][1] = s.xx;
    t[2][2] = s.xx;
    t[1][2] = s.xy;
    t[2][1] = -s.xy;
    t[3][3] = s.zz;
    t
}

/// `ρ = ¼ Σ ⟨σₐ⊗σ_b⟩ σₐ⊗σ_b` over all 16 terms.
pub fn pauli_reconstruct(table: &[[f64; 4]; 4]) -> Matrix4<C> {
    let p = pauli();
    let mut rho = Matrix4::zeros();
    for a in 0..4 {
        for b in 0..4 {
            rho += kron(&p[a], &p[b]) * C::from(table[a][b] / 4.0);
        }
    }
    rho
}

/// `Tr(ρ σₐ⊗σ_b)` for every pair.
pub fn pauli_expectations(rho: &Matrix4<C>) -> [[f64; 4]; 4] {
    let p = pauli();
    std::array::from_fn(|a| std::array::from_fn(|b| (rho * kron(&p[a], &p[b])).trace().re))
}

pub fn to_matrix(rho: &DensityMatrix<f64>) -> Matrix4<C> {
    Matrix4::from_fn(|r, c| rho.data[r][c])
}

/// Spin-flip concurrence for an arbitrary two-qubit density matrix:
/// `max(0, λ₁ - λ₂ - λ₃ - λ₄)` with `λᵢ²` the eigenvalues of
/// `√ρ ρ̃ √ρ`, `ρ̃ = (σʸ⊗σʸ) ρ* (σʸ⊗σʸ)`.
pub fn wootters_concurrence(rho: &Matrix4<C>) -> f64 {
    let p = pauli();
    let yy = kron(&p[2], &p[2]);
    let tilde = yy * rho.map(|z| z.conj()) * yy;
    let eig = rho.symmetric_eigen();
    let sqrt_vals = eig.eigenvalues.map(|v| C::from(v.max(0.0).sqrt()));
    let root = eig.eigenvectors * Matrix4::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint();
    let m = root * tilde * root;
    let m = (m + m.adjoint()) * C::from(0.5);
    let mut lam: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().map(|v| v.max(0.0).sqrt()).collect();
    lam.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    (lam[0] - lam[1] - lam[2] - lam[3]).max(0.0)
}

/// Spin-flip concurrence of a pure state, `|ψᵀ (σʸ⊗σʸ) ψ|`.
///
/// Preferred over [`wootters_concurrence`] for pure inputs: the square roots
/// of the vanishing eigenvalues there limit accuracy to about `1e-8`.
pub fn pure_state_concurrence(psi: &Vector4<C>) -> f64 {
    let p = pauli();
    let yy = kron(&p[2], &p[2]);
    (psi.transpose() * yy * psi)[(0, 0)].norm()
}

/// Smallest eigenvalue of a Hermitian 4×4 matrix.
pub fn min_eigenvalue(rho: &Matrix4<C>) -> f64 {
    rho.symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
