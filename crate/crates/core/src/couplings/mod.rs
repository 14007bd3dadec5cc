//! Rate constants of the two-atom model: free-space decay, collective
//! damping, the vacuum-induced dipole–dipole shift and the focal-point drive
//! coefficients.
//!
//! Distances are measured in transition wavelengths and enter through the
//! dimensionless phase `delta = 2π r / λ`. Rates are in whatever unit the
//! single-atom rates are supplied in (the dynamics uses `γ = 1`).

pub mod special;

use crate::error::{Error, Result};
use crate::num::{lit, Real};

pub use special::{cos_integral, sin_cos_integrals, sin_integral};

/// CODATA 2018 values, SI units.
pub mod constants {
    pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
    pub const HBAR: f64 = 1.054_571_817e-34;
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
}

/// Smallest admissible `delta` by default.
pub const DEFAULT_DELTA_MIN: f64 = 1e-3;

/// Physical parameters of a single two-level atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomPhysical<T> {
    /// Transition angular frequency ω in rad/s.
    pub omega: T,
    /// Dipole moment magnitude μ in C·m.
    pub dipole: T,
}

/// Free-space spontaneous decay rate `(1/3π)(ω/c)³ μ² / (ħ ε₀)` in 1/s.
pub fn gamma_free<T: Real>(atom: &AtomPhysical<T>) -> Result<T> {
    if !(atom.omega > T::zero()) || !(atom.dipole > T::zero()) {
        return Err(Error::InvalidInput(format!(
            "atom requires omega > 0 and dipole > 0, got omega = {}, dipole = {}",
            atom.omega.as_f64(),
            atom.dipole.as_f64()
        )));
    }
    // Scale before cubing so f32 does not underflow on SI magnitudes.
    let k = atom.omega / lit(constants::SPEED_OF_LIGHT);
    let mu_sq_over = (atom.dipole / lit(constants::HBAR)) * (atom.dipole / lit(constants::EPSILON_0));
    Ok(k * k * k * mu_sq_over / (lit::<T>(3.0) * T::PI()))
}

/// Positions of the atoms and the focal point along the inter-atomic axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry<T> {
    /// Inter-atomic separation `r12 / λ`.
    pub separation: T,
    /// Angle α between the (parallel) dipoles and the separation axis.
    pub dipole_angle: T,
    /// Signed focus position along the axis, from the midpoint, in units of λ.
    pub focus_offset: T,
}

impl<T: Real> Geometry<T> {
    /// Midpoint focus.
    pub fn new(separation: T, dipole_angle: T) -> Self {
        Self { separation, dipole_angle, focus_offset: T::zero() }
    }

    pub fn with_focus_offset(mut self, offset: T) -> Self {
        self.focus_offset = offset;
        self
    }

    /// Atom-to-focus distances `(d10, d20)` in units of λ.
    pub fn focus_distances(&self) -> (T, T) {
        let half = self.separation / lit(2.0);
        ((half - self.focus_offset).abs(), (half + self.focus_offset).abs())
    }

    pub fn validate(&self, delta_min: T) -> Result<()> {
        let r_min = delta_min / T::TAU();
        if !(self.separation >= r_min) {
            return Err(Error::InvalidInput(format!(
                "separation r12/lambda = {} is below delta_min/(2 pi) = {:e}",
                self.separation.as_f64(),
                r_min.as_f64()
            )));
        }
        if !(self.dipole_angle >= T::zero() && self.dipole_angle <= T::PI()) {
            return Err(Error::InvalidInput(format!("dipole angle {} outside [0, pi]", self.dipole_angle.as_f64())));
        }
        if !self.focus_offset.is_finite() {
            return Err(Error::InvalidInput("focus offset must be finite".into()));
        }
        Ok(())
    }
}

/// Which closed form to use for the dipole–dipole shift.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LambdaForm {
    /// Including the `2/π` sine/cosine-integral terms from the half-line
    /// frequency integral.
    #[default]
    AsPrinted,
    /// Only the leading trigonometric terms.
    Uncorrected,
}

/// All scalar constants entering the equations of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSet<T> {
    pub gamma1: T,
    pub gamma2: T,
    pub gamma12: T,
    pub lambda12: T,
    pub gamma10: T,
    pub gamma20: T,
    pub gamma0: T,
}

impl<T: Real> RateSet<T> {
    /// Builds a rate set, checking `γ1, γ2, γ0 > 0` and `|γ12| ≤ √(γ1γ2)`.
    pub fn new(gamma1: T, gamma2: T, gamma12: T, lambda12: T, gamma10: T, gamma20: T, gamma0: T) -> Result<Self> {
        let rs = Self { gamma1, gamma2, gamma12, lambda12, gamma10, gamma20, gamma0 };
        rs.validate()?;
        Ok(rs)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma1", self.gamma1), ("gamma2", self.gamma2), ("gamma0", self.gamma0)] {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be finite and > 0, got {}", v.as_f64())));
            }
        }
        for (name, v) in [
            ("gamma12", self.gamma12),
            ("lambda12", self.lambda12),
            ("gamma10", self.gamma10),
            ("gamma20", self.gamma20),
        ] {
            if !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be finite")));
            }
        }
        let bound = (self.gamma1 * self.gamma2).sqrt();
        if self.gamma12.abs() > bound * (T::one() + lit(1e-12)) {
            return Err(Error::InvalidInput(format!(
                "|gamma12| = {} exceeds sqrt(gamma1 gamma2) = {}",
                self.gamma12.abs().as_f64(),
                bound.as_f64()
            )));
        }
        Ok(())
    }

    /// Same rates with the inter-atomic couplings switched off.
    pub fn decoupled(mut self) -> Self {
        self.gamma12 = T::zero();
        self.lambda12 = T::zero();
        self
    }
}

/// Closed-form coupling evaluator with a configurable near-field cutoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingModel<T> {
    pub delta_min: T,
    pub lambda_form: LambdaForm,
}

impl<T: Real> Default for CouplingModel<T> {
    fn default() -> Self {
        Self { delta_min: lit(DEFAULT_DELTA_MIN), lambda_form: LambdaForm::AsPrinted }
    }
}

impl<T: Real> CouplingModel<T> {
    fn check_delta(&self, gamma_a: T, gamma_b: T, delta: T) -> Result<()> {
        if !(delta >= self.delta_min) || !delta.is_finite() {
            return Err(Error::NearFieldSingularity {
                delta: delta.as_f64(),
                delta_min: self.delta_min.as_f64(),
                limit: (gamma_a * gamma_b).sqrt().as_f64(),
            });
        }
        Ok(())
    }

    /// Collective damping between two dipoles at phase separation `delta`.
    pub fn gamma_cross(&self, gamma_a: T, gamma_b: T, delta: T, alpha: T) -> Result<T> {
        self.check_delta(gamma_a, gamma_b, delta)?;
        let s = delta.sin();
        let sin2 = alpha.sin().powi(2);
        let radial = T::one() - lit::<T>(3.0) * alpha.cos().powi(2);
        let brace = sin2 * s / delta + radial * near_field_term(delta);
        Ok(lit::<T>(1.5) * (gamma_a * gamma_b).sqrt() * brace)
    }

    /// Vacuum-induced dipole–dipole coupling.
    pub fn lambda_cross(&self, gamma_a: T, gamma_b: T, delta: T, alpha: T) -> Result<T> {
        self.check_delta(gamma_a, gamma_b, delta)?;
        let (s, c) = delta.sin_cos();
        let sin2 = alpha.sin().powi(2);
        let radial = T::one() - lit::<T>(3.0) * alpha.cos().powi(2);
        let d2 = delta * delta;
        let d3 = d2 * delta;
        let (transverse_corr, radial_corr) = match self.lambda_form {
            LambdaForm::AsPrinted => {
                let (si, ci) = sin_cos_integrals(delta)?;
                let f1 = s * ci - c * si;
                let f2 = -s * si - c * ci;
                let k = lit::<T>(2.0) / T::PI();
                (k * (T::one() / d2 - f1 / delta), k * (f2 / d2 + f1 / d3))
            }
            LambdaForm::Uncorrected => (T::zero(), T::zero()),
        };
        let pref = lit::<T>(0.75) * (gamma_a * gamma_b).sqrt();
        Ok(pref * sin2 * (c / delta + transverse_corr) - pref * radial * (s / d2 + c / d3 - radial_corr))
    }

    /// Computes the full [`RateSet`] for two atoms with decay rates `gammas`
    /// and a fictitious source atom of rate `gamma0` at the focus.
    pub fn build_rates(&self, gammas: (T, T), geom: &Geometry<T>, gamma0: T) -> Result<RateSet<T>> {
        geom.validate(self.delta_min)?;
        let (g1, g2) = gammas;
        let alpha = geom.dipole_angle;
        let tau = T::TAU();
        let delta12 = tau * geom.separation;
        let gamma12 = self.gamma_cross(g1, g2, delta12, alpha)?;
        let lambda12 = self.lambda_cross(g1, g2, delta12, alpha)?;
        let (d10, d20) = geom.focus_distances();
        let gamma10 = self.gamma_cross(g1, gamma0, tau * d10, alpha)?;
        let gamma20 = self.gamma_cross(g2, gamma0, tau * d20, alpha)?;
        RateSet::new(g1, g2, gamma12, lambda12, gamma10, gamma20, gamma0)
    }
}

/// `cos δ/δ² - sin δ/δ³`; the two terms cancel to `-1/3` at small `δ`, so
/// the Taylor series is used below `δ = 1/2`.
fn near_field_term<T: Real>(delta: T) -> T {
    if delta.abs() >= lit(0.5) {
        let d2 = delta * delta;
        return delta.cos() / d2 - delta.sin() / (d2 * delta);
    }
    // sum_{k>=1} (-1)^k 2k δ^(2k-2) / (2k+1)!
    let d2 = delta * delta;
    let mut sum = T::zero();
    let mut pow = T::one();
    let mut inv_fact = lit::<T>(1.0 / 6.0);
    for k in 1..30 {
        let kf = lit::<T>(k as f64);
        let term = lit::<T>(2.0) * kf * pow * inv_fact;
        sum += if k % 2 == 1 { -term } else { term };
        if term <= T::epsilon() * lit(1e-3) {
            break;
        }
        pow *= d2;
        inv_fact /= (lit::<T>(2.0) * kf + lit(2.0)) * (lit::<T>(2.0) * kf + lit(3.0));
    }
    sum
}

/// [`CouplingModel::gamma_cross`] with default settings.
pub fn gamma_cross<T: Real>(gamma_a: T, gamma_b: T, delta: T, alpha: T) -> Result<T> {
    CouplingModel::default().gamma_cross(gamma_a, gamma_b, delta, alpha)
}

/// [`CouplingModel::lambda_cross`] with default settings.
pub fn lambda_cross<T: Real>(gamma_a: T, gamma_b: T, delta: T, alpha: T) -> Result<T> {
    CouplingModel::default().lambda_cross(gamma_a, gamma_b, delta, alpha)
}

/// [`CouplingModel::build_rates`] with default settings.
pub fn build_rates<T: Real>(gammas: (T, T), geom: &Geometry<T>, gamma0: T) -> Result<RateSet<T>> {
    CouplingModel::default().build_rates(gammas, geom, gamma0)
}
