//! Two-qubit density matrix, concurrence and entanglement of formation.
//!
//! Basis order is `{|ee⟩, |eg⟩, |ge⟩, |gg⟩}` (indices 0..4).

use num_complex::Complex;

use crate::dynamics::{DynamicState, Trajectory};
use crate::error::{Error, Result};
use crate::num::{lit, Real};
use crate::optimize::brent_max;

/// Eigenvalues below this raise [`Error::Positivity`].
pub const POSITIVITY_TOL: f64 = 1e-6;
/// Negative eigenvalues above `-CLAMP_TOL` are treated as zero.
pub const CLAMP_TOL: f64 = 1e-9;
/// Largest off-X element accepted by [`concurrence`].
pub const X_SHAPE_TOL: f64 = 1e-12;
/// Slack on `C ∈ [0, 1]` accepted by [`eof`].
pub const EOF_DOMAIN_TOL: f64 = 1e-12;

/// Populations within this of zero count as zero in [`concurrence`]; the
/// square root there would otherwise turn rounding noise of order `1e-16`
/// into a concurrence shift of order `1e-8`.
pub const POPULATION_FLOOR: f64 = 1e-14;

/// Off-X positions: (0,1), (0,2), (1,3), (2,3) and their transposes.
const OFF_X: [(usize, usize); 4] = [(0, 1), (0, 2), (1, 3), (2, 3)];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix<T> {
    pub data: [[Complex<T>; 4]; 4],
}

impl<T: Real> DensityMatrix<T> {
    pub fn zeros() -> Self {
        Self { data: [[Complex::new(T::zero(), T::zero()); 4]; 4] }
    }

    /// Builds an X-shaped matrix from its populations and the two coherences
    /// `ρ₂₃` and `ρ₁₄` (1-based labels).
    pub fn x_state(populations: [T; 4], rho23: Complex<T>, rho14: Complex<T>) -> Self {
        let mut m = Self::zeros();
        for (i, p) in populations.iter().enumerate() {
            m.data[i][i] = Complex::new(*p, T::zero());
        }
        m.data[1][2] = rho23;
        m.data[2][1] = rho23.conj();
        m.data[0][3] = rho14;
        m.data[3][0] = rho14.conj();
        m
    }

    /// Element with 1-based indices, matching the usual `ρ₂₃` notation.
    pub fn rho(&self, i: usize, j: usize) -> Complex<T> {
        self.data[i - 1][j - 1]
    }

    pub fn populations(&self) -> [T; 4] {
        std::array::from_fn(|i| self.data[i][i].re)
    }

    pub fn trace(&self) -> Complex<T> {
        (0..4).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self.data[i][i])
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.data[i][j] - self.data[j][i].conj()).norm());
            }
        }
        worst
    }

    /// Largest magnitude among the elements that vanish for an X state.
    pub fn off_x_magnitude(&self) -> T {
        OFF_X.iter().flat_map(|&(i, j)| [self.data[i][j].norm(), self.data[j][i].norm()]).fold(T::zero(), T::max)
    }

    pub fn is_x_state(&self, tol: T) -> bool {
        self.off_x_magnitude() <= tol
    }

    /// Eigenvalues of an X state from its two 2×2 blocks `{1,4}` and `{2,3}`.
    /// Only meaningful when [`Self::is_x_state`] holds.
    pub fn x_eigenvalues(&self) -> [T; 4] {
        fn block<T: Real>(a: T, d: T, b: Complex<T>) -> (T, T) {
            let half = lit::<T>(0.5);
            let mean = half * (a + d);
            let radius = (half * half * (a - d) * (a - d) + b.norm_sqr()).sqrt();
            (mean - radius, mean + radius)
        }
        let p = self.populations();
        let (a, b) = block(p[0], p[3], self.data[0][3]);
        let (c, d) = block(p[1], p[2], self.data[1][2]);
        [a, b, c, d]
    }

    pub fn min_x_eigenvalue(&self) -> T {
        self.x_eigenvalues().into_iter().fold(T::infinity(), T::min)
    }
}

/// Density matrix for the model's state variables.
///
/// `ρ₁₄` vanishes identically and the coherence is `ρ₂₃ = (xx + i·xy)/2`.
pub fn reconstruct<T: Real>(s: &DynamicState<T>) -> Result<DensityMatrix<T>> {
    let rho = reconstruct_unchecked(s);
    let min = rho.min_x_eigenvalue();
    if min < -lit::<T>(POSITIVITY_TOL) || min.is_nan() {
        return Err(Error::Positivity { eigenvalue: min.as_f64() });
    }
    Ok(rho)
}

/// [`reconstruct`] without the positivity check.
pub fn reconstruct_unchecked<T: Real>(s: &DynamicState<T>) -> DensityMatrix<T> {
    let q = lit::<T>(0.25);
    let one = T::one();
    let pops = [
        q * (one + s.m1 + s.m2 + s.zz),
        q * (one + s.m1 - s.m2 - s.zz),
        q * (one - s.m1 + s.m2 - s.zz),
        q * (one - s.m1 - s.m2 + s.zz),
    ];
    let half = lit::<T>(0.5);
    DensityMatrix::x_state(pops, Complex::new(half * s.xx, half * s.xy), Complex::new(T::zero(), T::zero()))
}

fn clamped_sqrt<T: Real>(x: T) -> T {
    if x < T::zero() && x >= -lit::<T>(CLAMP_TOL) {
        T::zero()
    } else {
        x.max(T::zero()).sqrt()
    }
}

/// `C = 2 max{0, |ρ₂₃| - √(ρ₁₁ρ₄₄), |ρ₁₄| - √(ρ₂₂ρ₃₃)}` for X states.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let off = rho.off_x_magnitude();
    if off > lit::<T>(X_SHAPE_TOL) {
        return Err(Error::NotXState { magnitude: off.as_f64() });
    }
    let floor = lit::<T>(POPULATION_FLOOR);
    let p = rho.populations().map(|x| if x.abs() <= floor { T::zero() } else { x });
    let a = rho.data[1][2].norm() - clamped_sqrt(p[0] * p[3]);
    let b = rho.data[0][3].norm() - clamped_sqrt(p[1] * p[2]);
    let two = lit::<T>(2.0);
    Ok((two * a.max(b).max(T::zero())).min(T::one()))
}

fn xlog2x<T: Real>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.log2()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy<T: Real>(x: T) -> T {
    -xlog2x(x) - xlog2x(T::one() - x)
}

/// Entanglement of formation `h[(1 + √(1 - C²))/2]`.
pub fn eof<T: Real>(c: T) -> Result<T> {
    let tol = lit::<T>(EOF_DOMAIN_TOL);
    if !(c >= -tol && c <= T::one() + tol) {
        return Err(Error::Domain(format!("concurrence {} outside [0, 1]", c.as_f64())));
    }
    let c = c.max(T::zero()).min(T::one());
    let s = (T::one() - c * c).sqrt();
    let half = lit::<T>(0.5);
    let x = half * (T::one() + s);
    // 1 - x without cancellation
    let y = c * c / (lit::<T>(2.0) * (T::one() + s));
    Ok(-xlog2x(x) - xlog2x(y))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntanglementPoint<T> {
    pub concurrence: T,
    pub eof: T,
}

/// Concurrence and EoF of a single state.
pub fn entanglement_of<T: Real>(s: &DynamicState<T>) -> Result<EntanglementPoint<T>> {
    let c = concurrence(&reconstruct(s)?)?;
    Ok(EntanglementPoint { concurrence: c, eof: eof(c)? })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak<T> {
    pub time: T,
    pub eof: T,
    pub concurrence: T,
}

#[derive(Debug, Clone)]
pub struct EntanglementSeries<T> {
    pub times: Vec<T>,
    pub points: Vec<EntanglementPoint<T>>,
    pub peak: Peak<T>,
}

/// Per-sample entanglement plus the refined peak.
///
/// The peak starts from the grid maximum and is refined on the dense output
/// over the two neighbouring intervals.
pub fn entanglement_series<T: Real>(traj: &Trajectory<T>) -> Result<EntanglementSeries<T>> {
    let points = traj.states.iter().map(entanglement_of).collect::<Result<Vec<_>>>()?;
    let (imax, best) =
        points.iter().enumerate().fold((0, points[0]), |(i0, b), (i, p)| if p.eof > b.eof { (i, *p) } else { (i0, b) });
    let mut peak = Peak { time: traj.times[imax], eof: best.eof, concurrence: best.concurrence };
    if best.eof > T::zero() {
        let lo = traj.times[imax.saturating_sub(1)];
        let hi = traj.times[(imax + 1).min(traj.times.len() - 1)];
        if hi > lo {
            let f = |t: T| entanglement_of(&traj.state_at(t)).map(|p| p.eof).unwrap_or(T::neg_infinity());
            let tol = (hi - lo) * lit::<T>(1e-9);
            let m = brent_max(f, lo, hi, tol);
            if m.value > peak.eof {
                let p = entanglement_of(&traj.state_at(m.x))?;
                peak = Peak { time: m.x, eof: p.eof, concurrence: p.concurrence };
            }
        }
    }
    Ok(EntanglementSeries { times: traj.times.clone(), points, peak })
}
