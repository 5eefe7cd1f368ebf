//! Derivative-free scalar solvers: bounded maximization (coarse scan plus
//! golden-section refinement) and bisection.

use crate::error::{Error, Result};

/// Coarse scan resolution used before golden-section refinement.
pub const SCAN_POINTS: usize = 64;

/// Interval tolerance for golden-section and bisection.
pub const INTERVAL_TOL: f64 = 1e-12;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut e = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fe = f(e);
    while (b - a) > tol {
        if fc >= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + INV_PHI * (b - a);
            fe = f(e);
        }
        // Interval stops shrinking once it is a few ulps wide.
        if c <= a || e >= b {
            break;
        }
    }
    if fc >= fe {
        Maximum { x: c, value: fc }
    } else {
        Maximum { x: e, value: fe }
    }
}

/// Maximizes `f` on `[lo, hi]`: a `scan_points` uniform scan picks the
/// best grid point (smallest `x` on ties), golden-section then refines
/// inside the two neighbouring cells.
pub fn maximize_bounded<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, scan_points: usize, tol: f64) -> Maximum {
    if (hi - lo).is_nan() || hi - lo <= tol {
        return Maximum { x: lo, value: f(lo) };
    }
    let n = scan_points.max(3);
    let step = (hi - lo) / (n - 1) as f64;
    let grid = |i: usize| if i == n - 1 { hi } else { lo + step * i as f64 };

    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..n {
        let v = f(grid(i));
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let a = grid(best_i.saturating_sub(1));
    let b = grid((best_i + 1).min(n - 1));
    let refined = golden_section_max(&mut f, a, b, tol);
    if refined.value > best {
        refined
    } else {
        Maximum {
            x: grid(best_i),
            value: best,
        }
    }
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to interval width `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::Numerical(format!(
            "bisection bracket [{lo}, {hi}] has no sign change ({fa:e}, {fb:e})"
        )));
    }
    let a_sign = fa.signum();
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == a_sign {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let m = golden_section_max(|x| -(x - 0.3).powi(2), 0.0, 1.0, 1e-12);
        assert!((m.x - 0.3).abs() < 1e-6);
        assert!(m.value > -1e-12);
    }

    #[test]
    fn scan_escapes_local_maximum() {
        // Local max at 0.2 (height 1), global at 0.8 (height 2).
        let f = |x: f64| (-(x - 0.2f64).powi(2) * 400.0).exp() + 2.0 * (-(x - 0.8f64).powi(2) * 400.0).exp();
        let m = maximize_bounded(f, 0.0, 1.0, SCAN_POINTS, INTERVAL_TOL);
        assert!((m.x - 0.8).abs() < 1e-5, "{m:?}");
    }

    #[test]
    fn boundary_maximum() {
        let m = maximize_bounded(|x| x, 0.0, 2.0, SCAN_POINTS, INTERVAL_TOL);
        assert_eq!(m.x, 2.0);
        let m = maximize_bounded(|x| -x, 0.0, 2.0, SCAN_POINTS, INTERVAL_TOL);
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn plateau_returns_smallest_point() {
        let m = maximize_bounded(
            |x: f64| if x < 0.5 { 1.0 } else { 0.0 },
            0.0,
            1.0,
            SCAN_POINTS,
            INTERVAL_TOL,
        );
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn degenerate_interval() {
        let m = maximize_bounded(|x| x * x, 0.7, 0.7, SCAN_POINTS, INTERVAL_TOL);
        assert_eq!(m.x, 0.7);
    }

    #[test]
    fn bisect_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_without_sign_change_errors() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }
}
