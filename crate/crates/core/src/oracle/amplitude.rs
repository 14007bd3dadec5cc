//! Single-excitation amplitude model.
//!
//! With one photon and both atoms initially in the ground state, the joint
//! state stays in the span of `|eg,0⟩`, `|ge,0⟩` and `|gg⟩⊗(one photon)`.
//! The two atomic amplitudes obey
//!
//! `ȧ₁ = -(γ₁/2) a₁ - ((γ₁₂ - iΛ₁₂)/2) a₂ - G₀`,
//! `ȧ₂ = -(γ₂/2) a₂ - ((γ₁₂ - iΛ₁₂)/2) a₁ - G₁`,
//!
//! and every tracked expectation value is a quadratic or linear function of
//! `(a₁, a₂)`.

use nalgebra::Matrix4;
use num_complex::Complex64 as C;

use super::complex::{nodes, rk4_step, FixedStep};
use crate::couplings::RateSet;
use crate::dynamics::{default_span, DynamicState, SystemParams};
use crate::error::{Error, Result};

pub type Amplitudes = [C; 2];

pub fn rhs_amplitudes(a: &Amplitudes, r: &RateSet<f64>, g: [f64; 2]) -> Amplitudes {
    let coupling = C::new(r.gamma12, -r.lambda12) / 2.0;
    [-r.gamma1 / 2.0 * a[0] - coupling * a[1] - g[0], -r.gamma2 / 2.0 * a[1] - coupling * a[0] - g[1]]
}

/// Expectation values and auxiliary amplitudes implied by `(a₁, a₂)`.
pub fn to_dynamic(a: &Amplitudes) -> DynamicState<f64> {
    let p1 = a[0].norm_sqr();
    let p2 = a[1].norm_sqr();
    let coh = a[0] * a[1].conj();
    let k = [2.0 * a[0].re, 2.0 * a[1].re];
    let j = [2.0 * a[0].im, 2.0 * a[1].im];
    DynamicState {
        m1: 2.0 * p1 - 1.0,
        m2: 2.0 * p2 - 1.0,
        xx: 2.0 * coh.re,
        xy: 2.0 * coh.im,
        zz: 1.0 - 2.0 * p1 - 2.0 * p2,
        j,
        k,
        d: [-j[1], -j[0]],
        q: [-k[1], -k[0]],
    }
}

/// Reduced atomic density matrix in `{|ee⟩, |eg⟩, |ge⟩, |gg⟩}`.
pub fn atomic_density_matrix(a: &Amplitudes) -> Matrix4<C> {
    let mut rho = Matrix4::zeros();
    rho[(1, 1)] = C::from(a[0].norm_sqr());
    rho[(2, 2)] = C::from(a[1].norm_sqr());
    rho[(1, 2)] = a[0] * a[1].conj();
    rho[(2, 1)] = a[1] * a[0].conj();
    rho[(3, 3)] = C::from(1.0 - a[0].norm_sqr() - a[1].norm_sqr());
    rho
}

#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<Amplitudes>,
}

pub fn integrate_amplitudes(params: &SystemParams<f64>, opts: &FixedStep) -> Result<AmplitudeTrajectory> {
    let (t0, t1) = opts.t_span.unwrap_or_else(|| default_span(params));
    if !(t1 > t0) {
        return Err(Error::InvalidInput(format!("empty time span [{t0}, {t1}]")));
    }
    let times = nodes(t0, t1, &params.pulse.breakpoints(), opts.step_for(params));
    let coeff = params.drive_coefficients();
    let f = |t: f64, a: &Amplitudes, left_edge: bool| {
        let xi = if left_edge { params.pulse.amplitude_from_right(t) } else { params.pulse.amplitude(t) };
        rhs_amplitudes(a, &params.rates, [coeff[0] * xi, coeff[1] * xi])
    };
    let mut a = [C::new(0.0, 0.0); 2];
    let mut amplitudes = Vec::with_capacity(times.len());
    amplitudes.push(a);
    for w in times.windows(2) {
        a = rk4_step(&f, w[0], &a, w[1] - w[0]);
        amplitudes.push(a);
    }
    Ok(AmplitudeTrajectory { times, amplitudes })
}
