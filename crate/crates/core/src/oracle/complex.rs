//! The equations of motion kept in their complex form, integrated with a
//! fixed-step classical Runge–Kutta scheme.
//!
//! Layout: `[⟨σ₁ᶻ⟩, ⟨σ₂ᶻ⟩, ⟨σ₁ˣσ₂ˣ⟩, ⟨σ₁ˣσ₂ʸ⟩, ⟨σ₁ᶻσ₂ᶻ⟩, 𝒥₀, 𝒥₁, 𝒦₀, 𝒦₁, 𝒟₀, 𝒟₁, 𝒬₀, 𝒬₁]`.

use num_complex::Complex64 as C;

use crate::couplings::RateSet;
use crate::dynamics::{default_span, DynamicState, SystemParams, STATE_DIM};
use crate::error::{Error, Result};

pub type ComplexState = [C; STATE_DIM];

const I: C = C::new(0.0, 1.0);

/// Right-hand side with the imaginary units written out.
pub fn rhs_complex(y: &ComplexState, r: &RateSet<f64>, g: [f64; 2]) -> ComplexState {
    let (g1, g2, g12, lam) = (r.gamma1, r.gamma2, r.gamma12, r.lambda12);
    let gam = [g1, g2];
    let (m1, m2, xx, xy, zz) = (y[0], y[1], y[2], y[3], y[4]);
    let jj = [y[5], y[6]];
    let kk = [y[7], y[8]];
    let dd = [y[9], y[10]];
    let qq = [y[11], y[12]];
    let mut out = [C::new(0.0, 0.0); STATE_DIM];
    out[0] = -g1 * (m1 + 1.0) - g12 * xx + lam * xy - 2.0 * g[0] * kk[0];
    out[1] = -g2 * (m2 + 1.0) - g12 * xx - lam * xy - 2.0 * g[1] * kk[1];
    out[2] = -0.5 * (g1 + g2) * xx + g12 / 2.0 * (m1 + m2) + g12 * zz + g[0] * qq[0] + g[1] * qq[1];
    out[3] = -0.5 * (g1 + g2) * xy - lam / 2.0 * (m1 - m2) + I * g[0] * dd[0] - I * g[1] * dd[1];
    out[4] = -(g1 + g2) * zz - g1 * m2 - g2 * m1 + 2.0 * g12 * xx - 2.0 * (g[0] * qq[1] + g[1] * qq[0]);
    for q in 0..2 {
        let p = (q + 1) % 2;
        out[5 + q] = -0.5 * gam[q] * jj[q] + 0.5 * g12 * dd[q] - I * lam / 2.0 * qq[q];
        out[7 + q] = -0.5 * gam[q] * kk[q] + 0.5 * g12 * qq[q] - I * lam / 2.0 * dd[q] - 2.0 * g[q];
        out[9 + q] =
            -(0.5 * gam[p] + gam[q]) * dd[q] - g12 * dd[p] - 0.5 * g12 * jj[q] - gam[q] * jj[p] - I * lam / 2.0 * kk[q];
        out[11 + q] =
            -(0.5 * gam[p] + gam[q]) * qq[q] - g12 * qq[p] - 0.5 * g12 * kk[q] - gam[q] * kk[p] - I * lam / 2.0 * jj[q]
                + 2.0 * g[p];
    }
    out
}

/// Classical RK4 step. The flag passed to `f` marks the stage at the step's
/// left edge, which must see the right-hand limit of the drive (breakpoints
/// sit on step boundaries).
pub(crate) fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[C; N], bool) -> [C; N],
    t: f64,
    y: &[C; N],
    h: f64,
) -> [C; N] {
    let add = |y: &[C; N], k: &[C; N], s: f64| -> [C; N] { std::array::from_fn(|i| y[i] + k[i] * s) };
    let k1 = f(t, y, true);
    let k2 = f(t + h / 2.0, &add(y, &k1, h / 2.0), false);
    let k3 = f(t + h / 2.0, &add(y, &k2, h / 2.0), false);
    let k4 = f(t + h, &add(y, &k3, h), false);
    std::array::from_fn(|i| y[i] + (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0))
}

/// Uniform-in-segment time nodes from `t0` to `t1` with every breakpoint hit
/// exactly and steps no longer than `h_max`.
pub(crate) fn nodes(t0: f64, t1: f64, breakpoints: &[f64], h_max: f64) -> Vec<f64> {
    let mut cuts: Vec<f64> = breakpoints.iter().copied().filter(|&b| b > t0 && b < t1).collect();
    cuts.push(t1);
    let mut out = vec![t0];
    let mut a = t0;
    for b in cuts {
        let n = ((b - a) / h_max).ceil().max(1.0) as usize;
        for k in 1..=n {
            out.push(if k == n { b } else { a + (b - a) * k as f64 / n as f64 });
        }
        a = b;
    }
    out
}

/// Fixed-step integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedStep {
    pub t_span: Option<(f64, f64)>,
    /// Step length in units of the fastest rate in the problem.
    pub step_scale: f64,
}

impl Default for FixedStep {
    fn default() -> Self {
        Self { t_span: None, step_scale: 2e-3 }
    }
}

impl FixedStep {
    pub(crate) fn step_for(&self, params: &SystemParams<f64>) -> f64 {
        let r = &params.rates;
        let fastest = [params.pulse.bandwidth, r.gamma1, r.gamma2, r.gamma12.abs(), r.lambda12.abs(), 1.0]
            .into_iter()
            .fold(0.0_f64, f64::max);
        self.step_scale / fastest
    }
}

#[derive(Debug, Clone)]
pub struct ComplexTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<ComplexState>,
}

impl ComplexTrajectory {
    /// Largest imaginary part that should vanish: main block, 𝒦, 𝒬, plus the
    /// real parts of 𝒥 and 𝒟.
    pub fn max_spurious_imaginary(&self) -> f64 {
        self.states.iter().map(spurious_imaginary).fold(0.0, f64::max)
    }
}

pub fn spurious_imaginary(y: &ComplexState) -> f64 {
    let mut worst = 0.0_f64;
    for (i, z) in y.iter().enumerate() {
        let bad = if matches!(i, 5 | 6 | 9 | 10) { z.re } else { z.im };
        worst = worst.max(bad.abs());
    }
    worst
}

/// Maps to the real variables (`j = Im 𝒥`, `d = Im 𝒟`, others real parts).
pub fn to_real(y: &ComplexState) -> DynamicState<f64> {
    DynamicState::from_array(&std::array::from_fn(|i| if matches!(i, 5 | 6 | 9 | 10) { y[i].im } else { y[i].re }))
}

pub fn from_real(s: &DynamicState<f64>) -> ComplexState {
    let a = s.to_array();
    std::array::from_fn(|i| if matches!(i, 5 | 6 | 9 | 10) { C::new(0.0, a[i]) } else { C::new(a[i], 0.0) })
}

/// Integrates the complex system from the ground state.
pub fn integrate_complex(params: &SystemParams<f64>, opts: &FixedStep) -> Result<ComplexTrajectory> {
    let (t0, t1) = opts.t_span.unwrap_or_else(|| default_span(params));
    if !(t1 > t0) {
        return Err(Error::InvalidInput(format!("empty time span [{t0}, {t1}]")));
    }
    let times = nodes(t0, t1, &params.pulse.breakpoints(), opts.step_for(params));
    let coeff = params.drive_coefficients();
    let f = |t: f64, y: &ComplexState, left_edge: bool| {
        let xi = if left_edge { params.pulse.amplitude_from_right(t) } else { params.pulse.amplitude(t) };
        rhs_complex(y, &params.rates, [coeff[0] * xi, coeff[1] * xi])
    };
    let mut y = from_real(&DynamicState::ground());
    let mut states = Vec::with_capacity(times.len());
    states.push(y);
    for w in times.windows(2) {
        y = rk4_step(&f, w[0], &y, w[1] - w[0]);
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Divergence { t: w[1], variable: "state", value: f64::NAN });
        }
        states.push(y);
    }
    Ok(ComplexTrajectory { times, states })
}
