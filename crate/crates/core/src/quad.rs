//! Adaptive Gauss–Kronrod quadrature.

use crate::error::{Error, Result};
use crate::num::{lit, Real};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions<T> {
    pub abs_tol: T,
    pub rel_tol: T,
    pub max_intervals: usize,
}

impl<T: Real> Default for QuadOptions<T> {
    fn default() -> Self {
        Self { abs_tol: lit(1e-13), rel_tol: lit(1e-12), max_intervals: 4000 }
    }
}

impl<T: Real> QuadOptions<T> {
    pub fn new(abs_tol: T, rel_tol: T) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadEstimate<T> {
    pub value: T,
    pub error: T,
    pub intervals: usize,
}

fn gk15<T: Real, F: FnMut(T) -> T>(f: &mut F, a: T, b: T) -> (T, T) {
    let half = lit::<T>(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let f_center = f(center);
    let mut kronrod = f_center * lit(WGK[7]);
    let mut gauss = f_center * lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod += lit::<T>(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss += lit::<T>(WG[j / 2]) * pair;
        }
    }
    (kronrod * half_len, ((kronrod - gauss) * half_len).abs())
}

/// Integrates `f` over the finite interval `[a, b]` by globally adaptive
/// 15-point Gauss–Kronrod bisection.
pub fn integrate<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, opts: QuadOptions<T>) -> Result<QuadEstimate<T>> {
    if a == b {
        return Ok(QuadEstimate { value: T::zero(), error: T::zero(), intervals: 0 });
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut total_err = e;
    loop {
        let target = opts.abs_tol.max(opts.rel_tol * total.abs());
        if total_err <= target {
            break;
        }
        if intervals.len() >= opts.max_intervals {
            return Err(Error::Quadrature(format!(
                "[{}, {}]: error estimate {:e} above target {:e} after {} intervals",
                a.as_f64(),
                b.as_f64(),
                total_err.as_f64(),
                target.as_f64(),
                intervals.len()
            )));
        }
        let (worst, _) =
            intervals
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |acc, (i, iv)| if iv.3 > acc.1 { (i, iv.3) } else { acc });
        let (lo, hi, v_old, e_old) = intervals.swap_remove(worst);
        let mid = lit::<T>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::Quadrature(format!(
                "interval [{}, {}] cannot be bisected further",
                lo.as_f64(),
                hi.as_f64()
            )));
        }
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        total += v1 + v2 - v_old;
        total_err += e1 + e2 - e_old;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
    // Re-sum to shed the drift accumulated by the running updates.
    let value = intervals.iter().fold(T::zero(), |acc, iv| acc + iv.2);
    let error = intervals.iter().fold(T::zero(), |acc, iv| acc + iv.3);
    Ok(QuadEstimate { value, error, intervals: intervals.len() })
}

/// Integrates `f` over `[a, +inf)` through the map `t = a + s/(1-s)`.
pub fn integrate_upper<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, opts: QuadOptions<T>) -> Result<QuadEstimate<T>> {
    integrate(
        |s: T| {
            let w = T::one() - s;
            if w <= T::zero() {
                return T::zero();
            }
            f(a + s / w) / (w * w)
        },
        T::zero(),
        T::one(),
        opts,
    )
}

/// Integrates `f` over `(-inf, b]`.
pub fn integrate_lower<T: Real, F: FnMut(T) -> T>(mut f: F, b: T, opts: QuadOptions<T>) -> Result<QuadEstimate<T>> {
    integrate_upper(|t| f(-t), -b, opts)
}

/// Integrates `f` over the whole real line, split at `center`.
pub fn integrate_real_line<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    center: T,
    opts: QuadOptions<T>,
) -> Result<QuadEstimate<T>> {
    let lower = integrate_lower(&mut f, center, opts)?;
    let upper = integrate_upper(&mut f, center, opts)?;
    Ok(QuadEstimate {
        value: lower.value + upper.value,
        error: lower.error + upper.error,
        intervals: lower.intervals + upper.intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn semi_infinite_exponential() {
        let r = integrate_upper(|x: f64| (-x).exp(), 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        let r = integrate_lower(|x: f64| (2.0 * x).exp(), 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gaussian_line() {
        let r = integrate_real_line(|x: f64| (-x * x).exp(), 0.0, QuadOptions::default()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn nonconvergence_reported() {
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 0.0, max_intervals: 10 };
        let err = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, opts).unwrap_err();
        assert!(matches!(err, Error::Quadrature(_)));
    }
}
