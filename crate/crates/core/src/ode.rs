//! Dormand–Prince 5(4) integrator with continuous (dense) output.
//!
//! Coefficients, step-size control (with PI stabilisation) and the
//! fifth-order continuous extension follow Hairer, Nørsett & Wanner's DOPRI5.

use crate::num::{lit, Real};

/// Reasons an integration can stop early.
#[derive(Debug, Clone, PartialEq)]
pub enum OdeError {
    StepUnderflow {
        t: f64,
        h: f64,
    },
    TooManySteps {
        t: f64,
        max_steps: usize,
    },
    /// The step observer rejected an accepted state.
    Rejected {
        t: f64,
        reason: String,
    },
    NonFinite {
        t: f64,
    },
}

/// Integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct DormandPrince<T> {
    pub rtol: T,
    pub atol: T,
    pub max_steps: usize,
    /// Upper bound on the step size (`None`: the segment length).
    pub h_max: Option<T>,
    pub safety: T,
    pub beta: T,
}

impl<T: Real> DormandPrince<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Self { rtol, atol, max_steps: 1_000_000, h_max: None, safety: lit(0.9), beta: lit(0.04) }
    }

    pub fn with_h_max(mut self, h_max: T) -> Self {
        self.h_max = Some(h_max);
        self
    }
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep<T, const N: usize> {
    pub t: T,
    pub h: T,
    coeffs: [[T; N]; 5],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    pub fn end(&self) -> T {
        self.t + self.h
    }

    pub fn eval(&self, t: T) -> [T; N] {
        let theta = (t - self.t) / self.h;
        let theta1 = T::one() - theta;
        let c = &self.coeffs;
        std::array::from_fn(|i| c[0][i] + theta * (c[1][i] + theta1 * (c[2][i] + theta * (c[3][i] + theta1 * c[4][i]))))
    }
}

/// Piecewise dense solution built from consecutive accepted steps.
#[derive(Debug, Clone, Default)]
pub struct DenseSolution<T, const N: usize> {
    steps: Vec<DenseStep<T, N>>,
}

impl<T: Real, const N: usize> DenseSolution<T, N> {
    pub fn new() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn steps(&self) -> &[DenseStep<T, N>] {
        &self.steps
    }

    pub fn span(&self) -> Option<(T, T)> {
        Some((self.steps.first()?.t, self.steps.last()?.end()))
    }

    /// State at `t`, clamped to the covered span.
    pub fn eval(&self, t: T) -> Option<[T; N]> {
        let (t0, t1) = self.span()?;
        let t = t.max(t0).min(t1);
        let idx = self.steps.partition_point(|s| s.end() < t).min(self.steps.len() - 1);
        Some(self.steps[idx].eval(t))
    }
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(f64, &[T; N])]) -> [T; N] {
    std::array::from_fn(|i| {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc += lit::<T>(*c) * k[i];
        }
        y[i] + h * acc
    })
}

impl<T: Real> DormandPrince<T> {
    fn error_norm<const N: usize>(&self, y: &[T; N], y_new: &[T; N], err: &[T; N]) -> T {
        let mut sum = T::zero();
        for i in 0..N {
            let sk = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
            let r = err[i] / sk;
            sum += r * r;
        }
        (sum / lit(N as f64)).sqrt()
    }

    fn initial_step<F, const N: usize>(&self, f: &mut F, t0: T, y0: &[T; N], f0: &[T; N], dir_len: T) -> T
    where
        F: FnMut(T, &[T; N]) -> [T; N],
    {
        let mut dnf = T::zero();
        let mut dny = T::zero();
        for i in 0..N {
            let sk = self.atol + self.rtol * y0[i].abs();
            dnf += (f0[i] / sk).powi(2);
            dny += (y0[i] / sk).powi(2);
        }
        let mut h = if dnf <= lit(1e-10) || dny <= lit(1e-10) { lit(1e-6) } else { (dny / dnf).sqrt() * lit(0.01) };
        h = h.min(dir_len);
        let y1: [T; N] = std::array::from_fn(|i| y0[i] + h * f0[i]);
        let f1 = f(t0 + h, &y1);
        let mut der2 = T::zero();
        for i in 0..N {
            let sk = self.atol + self.rtol * y0[i].abs();
            der2 += ((f1[i] - f0[i]) / sk).powi(2);
        }
        let der2 = der2.sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 =
            if der12 <= lit(1e-15) { (h * lit(1e-3)).max(lit(1e-6)) } else { (lit::<T>(0.01) / der12).powf(lit(0.2)) };
        (h * lit(100.0)).min(h1).min(dir_len)
    }

    /// Integrates `y' = f(t, y)` from `(t0, y0)` to `t1 > t0`, appending the
    /// accepted steps to `dense`. `observe` sees each accepted `(t, y)` and may
    /// abort the run by returning an error message.
    pub fn integrate<F, O, const N: usize>(
        &self,
        mut f: F,
        t0: T,
        y0: [T; N],
        t1: T,
        dense: &mut DenseSolution<T, N>,
        mut observe: O,
    ) -> Result<[T; N], OdeError>
    where
        F: FnMut(T, &[T; N]) -> [T; N],
        O: FnMut(T, &[T; N]) -> Result<(), String>,
    {
        let span = t1 - t0;
        if !(span > T::zero()) {
            return Ok(y0);
        }
        let h_max = self.h_max.unwrap_or(span).min(span);
        let expo1 = lit::<T>(0.2) - self.beta * lit(0.75);
        let (facc1, facc2) = (lit::<T>(5.0), lit::<T>(0.1));
        let mut facold = lit::<T>(1e-4);

        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        let mut h = self.initial_step(&mut f, t, &y, &k1, h_max);
        let mut reject = false;
        let mut steps = 0usize;

        loop {
            if steps >= self.max_steps {
                return Err(OdeError::TooManySteps { t: t.as_f64(), max_steps: self.max_steps });
            }
            let min_h = lit::<T>(10.0) * T::epsilon() * t.abs().max(span);
            if h < min_h {
                return Err(OdeError::StepUnderflow { t: t.as_f64(), h: h.as_f64() });
            }
            let last = t + h * lit(1.01) >= t1;
            if last {
                h = t1 - t;
            }
            steps += 1;

            let y2 = axpy(&y, h, &[(A21, &k1)]);
            let k2 = f(t + lit::<T>(C2) * h, &y2);
            let y3 = axpy(&y, h, &[(A31, &k1), (A32, &k2)]);
            let k3 = f(t + lit::<T>(C3) * h, &y3);
            let y4 = axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            let k4 = f(t + lit::<T>(C4) * h, &y4);
            let y5 = axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            let k5 = f(t + lit::<T>(C5) * h, &y5);
            let y6 = axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            let t_new = if last { t1 } else { t + h };
            let k6 = f(t_new, &y6);
            let y_new = axpy(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            let k7 = f(t_new, &y_new);
            if y_new.iter().any(|v| !v.is_finite()) {
                return Err(OdeError::NonFinite { t: t.as_f64() });
            }
            let err_vec: [T; N] = std::array::from_fn(|i| {
                h * (lit::<T>(E1) * k1[i]
                    + lit::<T>(E3) * k3[i]
                    + lit::<T>(E4) * k4[i]
                    + lit::<T>(E5) * k5[i]
                    + lit::<T>(E6) * k6[i]
                    + lit::<T>(E7) * k7[i])
            });
            let err = self.error_norm(&y, &y_new, &err_vec);
            let fac11 = err.powf(expo1);

            if err <= T::one() {
                let ydiff: [T; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                let bspl: [T; N] = std::array::from_fn(|i| h * k1[i] - ydiff[i]);
                let c3: [T; N] = std::array::from_fn(|i| ydiff[i] - h * k7[i] - bspl[i]);
                let c4: [T; N] = std::array::from_fn(|i| {
                    h * (lit::<T>(D1) * k1[i]
                        + lit::<T>(D3) * k3[i]
                        + lit::<T>(D4) * k4[i]
                        + lit::<T>(D5) * k5[i]
                        + lit::<T>(D6) * k6[i]
                        + lit::<T>(D7) * k7[i])
                });
                dense.steps.push(DenseStep { t, h, coeffs: [y, ydiff, bspl, c3, c4] });
                let fac = (fac11 / facold.powf(self.beta) / self.safety).max(facc2).min(facc1);
                facold = err.max(lit(1e-4));
                observe(t_new, &y_new).map_err(|reason| OdeError::Rejected { t: t_new.as_f64(), reason })?;
                t = t_new;
                y = y_new;
                k1 = k7;
                if last {
                    return Ok(y);
                }
                let mut h_new = (h / fac).min(h_max);
                if reject {
                    h_new = h_new.min(h);
                }
                reject = false;
                h = h_new;
            } else {
                reject = true;
                h /= facc1.min(fac11 / self.safety);
            }
        }
    }
}
