//! One-dimensional maximisation helpers.

use crate::num::{lit, Real};

/// Located maximum of a scalar function on a bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum<T> {
    pub x: T,
    pub value: T,
    /// The maximiser sits on (within tolerance of) an end of the bracket.
    pub on_boundary: bool,
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// stopping once the bracket width is below `rel_tol * |x|`.
pub fn golden_section_max<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, rel_tol: T) -> Maximum<T> {
    let inv_phi = (lit::<T>(5.0).sqrt() - T::one()) / lit(2.0);
    let (lo_end, hi_end) = (a.min(b), a.max(b));
    let (mut lo, mut hi) = (lo_end, hi_end);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let floor = lit::<T>(1e-14) * (hi_end - lo_end);
    while hi - lo > (rel_tol * lit::<T>(0.5) * (lo.abs() + hi.abs())).max(floor) {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let (mut x, mut value) = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    // Compare against the end points so a monotone objective reports its edge.
    let width = hi_end - lo_end;
    let edge_tol = (rel_tol * x.abs()).max(floor) + lit::<T>(1e-9) * width;
    let mut on_boundary = false;
    if x - lo_end <= edge_tol || hi_end - x <= edge_tol {
        on_boundary = true;
        for edge in [lo_end, hi_end] {
            let fe = f(edge);
            if fe >= value {
                x = edge;
                value = fe;
            }
        }
    }
    Maximum { x, value, on_boundary }
}

/// Brent's method (parabolic interpolation with golden-section fallback) for
/// the maximum of `f` on `[a, b]`.
pub fn brent_max<T: Real, F: FnMut(T) -> T>(mut f: F, a: T, b: T, abs_tol: T) -> Maximum<T> {
    let cgold = lit::<T>(0.381_966_011_250_105_1);
    let eps = T::epsilon().sqrt();
    let (mut lo, mut hi) = (a.min(b), a.max(b));
    let mut x = lo + cgold * (hi - lo);
    let (mut w, mut v) = (x, x);
    // Minimise -f.
    let mut fx = -f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d = T::zero();
    let mut e = T::zero();
    let half = lit::<T>(0.5);
    let two = lit::<T>(2.0);
    for _ in 0..200 {
        let xm = half * (lo + hi);
        let tol1 = eps * x.abs() + abs_tol / lit(3.0);
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (hi - lo) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let etemp = e;
            e = d;
            if !(p.abs() >= (half * q * etemp).abs() || p <= q * (lo - x) || p >= q * (hi - x)) {
                d = p / q;
                let u = x + d;
                if u - lo < tol2 || hi - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x >= xm { lo - x } else { hi - x };
            d = cgold * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d >= T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = -f(u);
        if fu <= fx {
            if u >= x {
                lo = x;
            } else {
                hi = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                lo = u;
            } else {
                hi = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    let span = (a - b).abs();
    let on_boundary = (x - a.min(b)).abs() <= abs_tol + lit::<T>(1e-9) * span
        || (a.max(b) - x).abs() <= abs_tol + lit::<T>(1e-9) * span;
    Maximum { x, value: -fx, on_boundary }
}
