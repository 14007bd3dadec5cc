//! Rate constants from quadrature of their mode-sum definitions.
//!
//! After the polarisation and angular sums the coupling between two dipoles
//! at phase separation `u = k r` is the kernel
//!
//! `K(u) = (3/2) [sin²α · sin u/u + (1 - 3cos²α)(cos u/u² - sin u/u³)]`.
//!
//! The collective damping is `√(γaγb) K(δ)` (the on-shell delta function);
//! here the kernel is rebuilt from its angular integral rather than from the
//! closed form. The shift is the half-line principal value
//! `(√(γaγb)/π) PV∫₀^∞ (u/δ)³ K(u)/(u - δ) du`, Abel regularised at large `u`.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{integrate, integrate_upper, QuadOptions};

/// Excision half-widths used for the principal value.
pub const EXCISIONS: [f64; 3] = [1e-2, 1e-3, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    GammaCross,
    LambdaCross,
}

/// Quadrature value with the excision sequence it was extrapolated from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateQuadrature {
    pub value: f64,
    /// `(ε, estimate at ε)`, empty for the damping branch.
    pub convergence: Vec<(f64, f64)>,
}

fn quad_opts() -> QuadOptions<f64> {
    QuadOptions { abs_tol: 1e-14, rel_tol: 1e-13, max_intervals: 20_000 }
}

/// `K(u)` from the angular integral
/// `(3/4) ∫₋₁¹ [1 - (1-x²) sin²α/2 - x² cos²α] cos(ux) dx`.
pub fn kernel_angular(u: f64, alpha: f64) -> Result<f64> {
    let (s2, c2) = (alpha.sin().powi(2), alpha.cos().powi(2));
    let f = |x: f64| (1.0 - 0.5 * (1.0 - x * x) * s2 - x * x * c2) * (u * x).cos();
    // even integrand
    Ok(1.5 * integrate(f, 0.0, 1.0, quad_opts())?.value)
}

/// `cos u/u² - sin u/u³`, with its Taylor series near the origin.
fn radial_part(u: f64) -> f64 {
    if u.abs() < 1.0 {
        // sum_k (-1)^k u^(2k-2) [1/(2k)! - 1/(2k+1)!]
        let u2 = u * u;
        let (mut sum, mut pow, mut fact) = (0.0, 1.0, 2.0);
        for k in 1..20 {
            let kf = k as f64;
            let term = pow * (1.0 / fact) * (1.0 - 1.0 / (2.0 * kf + 1.0));
            sum += if k % 2 == 1 { -term } else { term };
            if term < 1e-18 {
                break;
            }
            pow *= u2;
            fact *= (2.0 * kf + 1.0) * (2.0 * kf + 2.0);
        }
        sum
    } else {
        u.cos() / (u * u) - u.sin() / (u * u * u)
    }
}

fn sinc(u: f64) -> f64 {
    if u.abs() < 1e-4 {
        1.0 - u * u / 6.0
    } else {
        u.sin() / u
    }
}

fn kernel(u: f64, a: f64, b: f64) -> f64 {
    a * sinc(u) + b * radial_part(u)
}

/// `∫_L^∞ K(u)/(u - δ) du` for `L > δ`, along `u = L + i s`.
fn oscillatory_tail(l: f64, delta: f64, a: f64, b: f64) -> Result<f64> {
    use num_complex::Complex64 as C;
    // K(u)/(u-δ) = Re[e^{iu} R(u)]
    let r = |u: C| (C::new(0.0, -a) / u + b / (u * u) + C::new(0.0, b) / (u * u * u)) / (u - delta);
    let g = |s: f64| r(C::new(l, s)) * (-s).exp();
    let re = integrate_upper(|s| g(s).re, 0.0, quad_opts())?.value;
    let im = integrate_upper(|s| g(s).im, 0.0, quad_opts())?.value;
    let value = C::new(0.0, 1.0) * C::new(l.cos(), l.sin()) * C::new(re, im);
    Ok(value.re)
}

/// `PV∫₀^∞ K(u)/(u-δ) du` at excision `ε`, split as
/// `∫_ε^δ [K(δ+x) - K(δ-x)]/x dx + ∫_{2δ}^∞ K(u)/(u-δ) du`.
fn excised(delta: f64, eps: f64, a: f64, b: f64, tail: f64) -> Result<f64> {
    let near = integrate(|x| (kernel(delta + x, a, b) - kernel(delta - x, a, b)) / x, eps, delta, quad_opts())?;
    Ok(near.value + tail)
}

/// Solves `S(ε) = PV - c₁ε - c₃ε³` on three excisions.
pub fn richardson(samples: &[(f64, f64); 3]) -> Result<f64> {
    let m = Matrix3::from_fn(|i, j| match j {
        0 => 1.0,
        1 => samples[i].0,
        _ => samples[i].0.powi(3),
    });
    let rhs = Vector3::from_fn(|i, _| samples[i].1);
    m.lu().solve(&rhs).map(|x| x[0]).ok_or_else(|| Error::Quadrature("singular Richardson system".into()))
}

/// Evaluates a rate constant by quadrature.
pub fn rate_integral_quadrature(
    which: RateKind,
    gamma_a: f64,
    gamma_b: f64,
    delta: f64,
    alpha: f64,
) -> Result<RateQuadrature> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidInput(format!("delta must be finite and > 0, got {delta}")));
    }
    let scale = (gamma_a * gamma_b).sqrt();
    match which {
        RateKind::GammaCross => {
            Ok(RateQuadrature { value: scale * kernel_angular(delta, alpha)?, convergence: vec![] })
        }
        RateKind::LambdaCross => {
            let a = 1.5 * alpha.sin().powi(2);
            let b = 1.5 * (1.0 - 3.0 * alpha.cos().powi(2));
            // Abel-regularised ∫₀^∞ K(u)(u² + δu + δ²) du
            let d = delta;
            let moments = a * (d + d * d * PI / 2.0) + b * (-PI / 2.0 - d - d * d * PI / 4.0);
            let tail = oscillatory_tail(2.0 * delta, delta, a, b)?;
            // Excisions shrink with δ below 1 so they stay inside [0, 2δ].
            let mut fit = [(0.0, 0.0); 3];
            for (slot, &eps) in fit.iter_mut().zip(EXCISIONS.iter()) {
                let eps = eps * delta.min(1.0);
                *slot = (eps, excised(delta, eps, a, b, tail)?);
            }
            let pv = richardson(&fit)?;
            let finish = |pv: f64| scale * (moments / d.powi(3) + pv) / PI;
            let spread = (fit[2].1 - pv).abs();
            if !(spread < 1e-2 * (1.0 + pv.abs())) {
                return Err(Error::Quadrature(format!(
                    "principal value at delta = {delta}: extrapolated {pv} but smallest excision gives {}",
                    fit[2].1
                )));
            }
            Ok(RateQuadrature { value: finish(pv), convergence: fit.iter().map(|&(e, s)| (e, finish(s))).collect() })
        }
    }
}
