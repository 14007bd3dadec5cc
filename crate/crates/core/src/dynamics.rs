//! Equations of motion for the two atoms driven by a single-photon pulse.
//!
//! The main block holds `m1 = ⟨σ₁ᶻ⟩`, `m2 = ⟨σ₂ᶻ⟩`, `xx = ⟨σ₁ˣσ₂ˣ⟩`,
//! `xy = ⟨σ₁ˣσ₂ʸ⟩` and `zz = ⟨σ₁ᶻσ₂ᶻ⟩`. The auxiliary block holds the
//! one-photon/vacuum transition amplitudes `𝒥_q, 𝒦_q, 𝒟_q, 𝒬_q` (q = 0, 1
//! labelling atoms 1, 2). `𝒥_q` and `𝒟_q` are purely imaginary and are carried
//! as real `j_q, d_q` with `𝒥_q = i j_q`, `𝒟_q = i d_q`, so every coefficient
//! below is real.

use crate::couplings::{Geometry, RateSet};
use crate::error::{Error, Result};
use crate::num::{lit, Real};
use crate::ode::{DenseSolution, DormandPrince, OdeError};
use crate::pulses::{PulseSpec, TimeGrid};

/// Number of real dynamical variables.
pub const STATE_DIM: usize = 13;

/// Everything the equations of motion depend on.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams<T> {
    pub rates: RateSet<T>,
    pub pulse: PulseSpec<T>,
    pub geometry: Geometry<T>,
}

impl<T: Real> SystemParams<T> {
    pub fn new(rates: RateSet<T>, pulse: PulseSpec<T>, geometry: Geometry<T>) -> Result<Self> {
        rates.validate()?;
        Ok(Self { rates, pulse, geometry })
    }

    /// Drive coefficients `(γ₁₀/√γ₀, γ₂₀/√γ₀)`.
    pub fn drive_coefficients(&self) -> [T; 2] {
        let s = self.rates.gamma0.sqrt();
        [self.rates.gamma10 / s, self.rates.gamma20 / s]
    }

    /// `G_q(t) = γ_{q+1,0} ξ(t) / √γ₀`.
    pub fn drive(&self, q: usize, t: T) -> T {
        self.drive_coefficients()[q] * self.pulse.amplitude(t)
    }

    fn drives_with(&self, xi: T) -> [T; 2] {
        let c = self.drive_coefficients();
        [c[0] * xi, c[1] * xi]
    }
}

/// Free function form of [`SystemParams::drive`].
pub fn drive<T: Real>(params: &SystemParams<T>, q: usize, t: T) -> T {
    params.drive(q, t)
}

/// The 13 real dynamical variables.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DynamicState<T> {
    pub m1: T,
    pub m2: T,
    pub xx: T,
    pub xy: T,
    pub zz: T,
    pub j: [T; 2],
    pub k: [T; 2],
    pub d: [T; 2],
    pub q: [T; 2],
}

impl<T: Real> DynamicState<T> {
    /// Both atoms in the ground state, photon not yet arrived.
    pub fn ground() -> Self {
        Self { m1: -T::one(), m2: -T::one(), zz: T::one(), ..Self::zeroed() }
    }

    pub fn zeroed() -> Self {
        let z = T::zero();
        Self { m1: z, m2: z, xx: z, xy: z, zz: z, j: [z; 2], k: [z; 2], d: [z; 2], q: [z; 2] }
    }

    pub const NAMES: [&'static str; STATE_DIM] =
        ["m1", "m2", "xx", "xy", "zz", "j0", "j1", "K0", "K1", "d0", "d1", "Q0", "Q1"];

    pub fn to_array(&self) -> [T; STATE_DIM] {
        [
            self.m1, self.m2, self.xx, self.xy, self.zz, self.j[0], self.j[1], self.k[0], self.k[1], self.d[0],
            self.d[1], self.q[0], self.q[1],
        ]
    }

    pub fn from_array(a: &[T; STATE_DIM]) -> Self {
        Self {
            m1: a[0],
            m2: a[1],
            xx: a[2],
            xy: a[3],
            zz: a[4],
            j: [a[5], a[6]],
            k: [a[7], a[8]],
            d: [a[9], a[10]],
            q: [a[11], a[12]],
        }
    }

    /// `1 + m1 + m2 + zz`, four times the doubly excited population.
    pub fn double_excitation_defect(&self) -> T {
        T::one() + self.m1 + self.m2 + self.zz
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.to_array().iter().zip(other.to_array().iter()).fold(T::zero(), |acc, (a, b)| acc.max((*a - *b).abs()))
    }
}

/// Time derivatives for given drive values `G = [G₀, G₁]`.
pub fn rhs_with_drive<T: Real>(s: &DynamicState<T>, rates: &RateSet<T>, g: [T; 2]) -> DynamicState<T> {
    let gam = [rates.gamma1, rates.gamma2];
    let g12 = rates.gamma12;
    let lam = rates.lambda12;
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    let gsum = gam[0] + gam[1];

    let m1 = -gam[0] * (s.m1 + T::one()) - g12 * s.xx + lam * s.xy - two * g[0] * s.k[0];
    let m2 = -gam[1] * (s.m2 + T::one()) - g12 * s.xx - lam * s.xy - two * g[1] * s.k[1];
    let xx = -half * gsum * s.xx + half * g12 * (s.m1 + s.m2) + g12 * s.zz + g[0] * s.q[0] + g[1] * s.q[1];
    // +iG0 D0 - iG1 D1 with D = i d
    let xy = -half * gsum * s.xy - half * lam * (s.m1 - s.m2) - g[0] * s.d[0] + g[1] * s.d[1];
    let zz = -gsum * s.zz - gam[0] * s.m2 - gam[1] * s.m1 + two * g12 * s.xx - two * (g[0] * s.q[1] + g[1] * s.q[0]);

    let mut out = DynamicState { m1, m2, xx, xy, zz, ..DynamicState::zeroed() };
    for q in 0..2 {
        let p = 1 - q;
        out.j[q] = -half * gam[q] * s.j[q] + half * g12 * s.d[q] - half * lam * s.q[q];
        out.k[q] = -half * gam[q] * s.k[q] + half * g12 * s.q[q] + half * lam * s.d[q] - two * g[q];
        let diag = half * gam[p] + gam[q];
        out.d[q] = -diag * s.d[q] - g12 * s.d[p] - half * g12 * s.j[q] - gam[q] * s.j[p] - half * lam * s.k[q];
        out.q[q] =
            -diag * s.q[q] - g12 * s.q[p] - half * g12 * s.k[q] - gam[q] * s.k[p] + half * lam * s.j[q] + two * g[p];
    }
    out
}

/// Time derivatives at `t`.
pub fn rhs<T: Real>(state: &DynamicState<T>, t: T, params: &SystemParams<T>) -> DynamicState<T> {
    rhs_with_drive(state, &params.rates, params.drives_with(params.pulse.amplitude(t)))
}

/// Relative and absolute integrator tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T> {
    pub rel: T,
    pub abs: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self { rel: lit(1e-9), abs: lit(1e-12) }
    }
}

impl<T: Real> Tolerances<T> {
    pub fn halved(self) -> Self {
        Self { rel: self.rel / lit(2.0), abs: self.abs / lit(2.0) }
    }
}

/// Default number of reporting samples.
pub const DEFAULT_SAMPLES: usize = 2000;

/// Options for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions<T> {
    pub t_span: Option<(T, T)>,
    pub tol: Tolerances<T>,
    pub samples: usize,
}

impl<T: Real> Default for IntegrateOptions<T> {
    fn default() -> Self {
        Self { t_span: None, tol: Tolerances::default(), samples: DEFAULT_SAMPLES }
    }
}

/// Default integration window: pulse-dependent start, `drive_end + 30/γ` end
/// with `γ` the smaller single-atom rate.
pub fn default_span<T: Real>(params: &SystemParams<T>) -> (T, T) {
    let gamma = params.rates.gamma1.min(params.rates.gamma2);
    (params.pulse.default_start(), params.pulse.drive_end() + lit::<T>(30.0) / gamma)
}

/// Integrated trajectory: reporting grid plus dense output.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<DynamicState<T>>,
    /// `[G₀, G₁]` at each reporting time.
    pub drives: Vec<[T; 2]>,
    dense: DenseSolution<T, STATE_DIM>,
}

impl<T: Real> Trajectory<T> {
    /// State at any `t` inside the integration window, from dense output.
    pub fn state_at(&self, t: T) -> DynamicState<T> {
        DynamicState::from_array(&self.dense.eval(t).expect("trajectory has at least one step"))
    }

    pub fn span(&self) -> (T, T) {
        (self.times[0], self.times[self.times.len() - 1])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn accepted_steps(&self) -> usize {
        self.dense.steps().len()
    }
}

fn describe(params: &SystemParams<impl Real>) -> String {
    let r = &params.rates;
    format!(
        "pulse {} Omega = {}, gamma12 = {}, lambda12 = {}, gamma10 = {}, gamma20 = {}",
        params.pulse.family(),
        params.pulse.bandwidth.as_f64(),
        r.gamma12.as_f64(),
        r.lambda12.as_f64(),
        r.gamma10.as_f64(),
        r.gamma20.as_f64()
    )
}

/// Integrates from the ground state (all auxiliary amplitudes zero) over the
/// requested or default window, splitting at drive discontinuities.
pub fn integrate<T: Real>(params: &SystemParams<T>, opts: &IntegrateOptions<T>) -> Result<Trajectory<T>> {
    let (t0, t1) = opts.t_span.unwrap_or_else(|| default_span(params));
    let grid = TimeGrid::new(t0, t1, opts.samples)?;
    if !(opts.tol.rel > T::zero()) || !(opts.tol.abs > T::zero()) {
        return Err(Error::InvalidInput("tolerances must be > 0".into()));
    }
    let solver = DormandPrince::new(opts.tol.rel, opts.tol.abs);
    let bound = T::one() + lit::<T>(1e3) * opts.tol.rel.max(opts.tol.abs);

    let mut cuts: Vec<T> = params.pulse.breakpoints().into_iter().filter(|&b| b > t0 && b < t1).collect();
    cuts.push(t1);

    let mut dense = DenseSolution::new();
    let mut y = DynamicState::ground().to_array();
    let mut seg_start = t0;
    for (i, &seg_end) in cuts.iter().enumerate() {
        // Segments after a breakpoint see the right-hand limit of the drive.
        let from_right = i > 0;
        let f = |t: T, y: &[T; STATE_DIM]| {
            let xi = if from_right && t == seg_start {
                params.pulse.amplitude_from_right(t)
            } else {
                params.pulse.amplitude(t)
            };
            rhs_with_drive(&DynamicState::from_array(y), &params.rates, params.drives_with(xi)).to_array()
        };
        let observe = |_t: T, y: &[T; STATE_DIM]| -> std::result::Result<(), String> {
            for (idx, name) in ["m1", "m2", "xx", "xy", "zz"].iter().enumerate() {
                if y[idx].abs() > bound {
                    return Err(format!("{name}={}", y[idx].as_f64()));
                }
            }
            Ok(())
        };
        y = solver.integrate(f, seg_start, y, seg_end, &mut dense, observe).map_err(|e| match e {
            OdeError::StepUnderflow { t, h } => Error::Stiffness { t, h, context: describe(params) },
            OdeError::TooManySteps { t, max_steps } => Error::TooManySteps { t, max_steps },
            OdeError::Rejected { t, reason } => {
                let (name, value) = reason.split_once('=').unwrap_or(("state", "nan"));
                let variable = DynamicState::<T>::NAMES.iter().copied().find(|n| *n == name).unwrap_or("state");
                Error::Divergence { t, variable, value: value.parse().unwrap_or(f64::NAN) }
            }
            OdeError::NonFinite { t } => Error::Divergence { t, variable: "state", value: f64::NAN },
        })?;
        seg_start = seg_end;
    }

    let times = grid.points();
    let states = times
        .iter()
        .map(|&t| DynamicState::from_array(&dense.eval(t).expect("dense output covers the window")))
        .collect();
    let drives = times.iter().map(|&t| params.drives_with(params.pulse.amplitude(t))).collect();
    Ok(Trajectory { times, states, drives, dense })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::couplings::build_rates;
    use std::f64::consts::FRAC_PI_2;

    fn paper_params(pulse: PulseSpec<f64>) -> SystemParams<f64> {
        let geom = Geometry::new(0.2, FRAC_PI_2);
        let rates = build_rates((1.0, 1.0), &geom, 1.0).unwrap();
        SystemParams::new(rates, pulse, geom).unwrap()
    }

    #[test]
    fn ground_state_is_stationary_without_drive() {
        let rates = RateSet::new(1.0, 0.8, 0.3, -0.45, 0.9, 0.7, 1.0).unwrap();
        let d = rhs_with_drive(&DynamicState::ground(), &rates, [0.0, 0.0]);
        assert_eq!(d, DynamicState::zeroed());
    }

    #[test]
    fn ground_state_with_drive_only_feeds_auxiliaries() {
        let rates = RateSet::new(1.0, 1.0, 0.3, -0.45, 0.9, 0.9, 1.0).unwrap();
        let g = 0.37;
        let d = rhs_with_drive(&DynamicState::ground(), &rates, [g, g]);
        assert_eq!(d.k, [-2.0 * g, -2.0 * g]);
        assert_eq!(d.q, [2.0 * g, 2.0 * g]);
        assert_eq!((d.m1, d.m2, d.xx, d.xy, d.zz), (0.0, 0.0, 0.0, 0.0, 0.0));
        assert_eq!(d.j, [0.0, 0.0]);
        assert_eq!(d.d, [0.0, 0.0]);
    }

    /// Golden derivative vector from an independent arbitrary-precision
    /// transcription of the complex-valued equations (mpmath, 40 digits).
    #[test]
    fn golden_derivative_vector() {
        let rates = RateSet::<f64>::new(1.0, 0.8, 0.3, -0.45, 0.0, 0.0, 1.0).unwrap();
        let s = DynamicState::from_array(&[
            -0.31, -0.52, 0.27, -0.13, -0.17, 0.21, -0.34, 0.45, -0.12, 0.08, -0.29, 0.33, -0.41,
        ]);
        let want = [
            -1.3425, -0.4275, -0.3515, -0.00775, 1.546, -0.01875, 0.00025, -1.5935, -0.74825, 0.38475, 0.209, 0.46625,
            1.5685,
        ];
        let got = rhs_with_drive(&s, &rates, [0.7, 0.4]).to_array();
        for i in 0..STATE_DIM {
            assert!((got[i] - want[i]).abs() < 1e-12, "{}: {} vs {}", DynamicState::<f64>::NAMES[i], got[i], want[i]);
        }
    }

    #[test]
    fn drive_midpoint_symmetry_and_rising_cutoff() {
        let p = paper_params(PulseSpec::rising(1.77).unwrap());
        for t in [-3.0, -0.2, 0.0] {
            assert_eq!(drive(&p, 0, t), drive(&p, 1, t));
        }
        assert_eq!(drive(&p, 0, 0.5), 0.0);
    }

    #[test]
    fn zero_drive_trajectory_is_constant() {
        let mut p = paper_params(PulseSpec::rising(1.0).unwrap());
        p.rates.gamma10 = 0.0;
        p.rates.gamma20 = 0.0;
        let traj = integrate(&p, &IntegrateOptions { t_span: Some((0.0, 30.0)), ..Default::default() }).unwrap();
        let ground = DynamicState::ground();
        assert!(traj.states.iter().all(|s| s.max_abs_diff(&ground) < 1e-10));
    }

    #[test]
    fn default_span_follows_family() {
        let p = paper_params(PulseSpec::rising(2.0).unwrap());
        assert_eq!(default_span(&p), (-20.0, 30.0));
        let p = paper_params(PulseSpec::gaussian(2.0).unwrap());
        assert_eq!(default_span(&p), (-5.0, 30.0));
    }

    #[test]
    fn symmetric_configuration_keeps_atom_symmetry() {
        let p = paper_params(PulseSpec::gaussian(2.55).unwrap());
        let traj = integrate(&p, &IntegrateOptions::default()).unwrap();
        for s in &traj.states {
            assert!((s.m1 - s.m2).abs() < 1e-8);
            assert!((s.k[0] - s.k[1]).abs() < 1e-8);
            assert!((s.q[0] - s.q[1]).abs() < 1e-8);
        }
    }

    #[test]
    fn constraint_and_relaxation() {
        let p = paper_params(PulseSpec::rising(1.77).unwrap());
        let traj = integrate(&p, &IntegrateOptions::default()).unwrap();
        for s in &traj.states {
            assert!(s.double_excitation_defect().abs() < 1e-8);
        }
        let last = traj.states.last().unwrap();
        assert!(last.max_abs_diff(&DynamicState::ground()) < 1e-4);
    }

    #[test]
    fn decoupled_single_atom_matches_closed_form() {
        let om = 1.3;
        let mut p = paper_params(PulseSpec::rising(om).unwrap());
        p.rates = p.rates.decoupled();
        p.rates.gamma20 = 0.0;
        let traj = integrate(&p, &IntegrateOptions::default()).unwrap();
        let g10 = p.rates.gamma10;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            if *t <= 0.0 && *t >= -20.0 / om {
                let pe = 4.0 * g10 * g10 * om / (om + 1.0f64).powi(2) * (om * t).exp();
                assert!(((1.0 + s.m1) / 2.0 - pe).abs() < 1e-7, "t = {t}");
            }
        }
    }

    #[test]
    fn stiffness_reported() {
        let mut p = paper_params(PulseSpec::rising(1.0).unwrap());
        p.rates.lambda12 = 1e15;
        let err = integrate(&p, &IntegrateOptions { samples: 10, ..Default::default() }).unwrap_err();
        assert!(
            matches!(err, Error::Stiffness { .. } | Error::TooManySteps { .. } | Error::Divergence { .. }),
            "{err:?}"
        );
    }

    #[test]
    fn f32_rhs() {
        let rates = RateSet::new(1.0_f32, 1.0, 0.3, -0.45, 0.9, 0.9, 1.0).unwrap();
        let d = rhs_with_drive(&DynamicState::ground(), &rates, [0.5, 0.5]);
        assert_eq!(d.k, [-1.0, -1.0]);
    }
}
