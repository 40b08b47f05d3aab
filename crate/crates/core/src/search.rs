//! One-dimensional root finding and minimization.
//!
//! Everything here is derivative-free and deterministic: bisection for roots,
//! golden-section search for minima, and a dense grid scan to pick the basin
//! before golden refinement when the target is not known to be unimodal.

use crate::error::{Error, Result};

/// Absolute tolerance used for landmark and budget root finding.
pub const ROOT_TOL: f64 = 1e-10;
/// Iteration cap for every bisection.
pub const MAX_ITER: usize = 200;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Find a sign change of `f` on `[lo, hi]` by bisection.
///
/// The bracket must satisfy `f(lo) * f(hi) <= 0`. Iteration stops once the
/// bracket is narrower than `tol` and returns its midpoint.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.is_nan() || f_hi.is_nan() || f_lo.signum() == f_hi.signum() {
        return Err(Error::ConvergenceFailure(format!(
            "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
        )));
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= tol {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::ConvergenceFailure(format!(
            "bisection did not reach tolerance {tol} within {MAX_ITER} iterations"
        )))
    }
}

/// Smallest `x` in `[lo, hi]` with `g(x) >= target`, for nondecreasing `g`.
///
/// Returns `lo` when `g(lo)` already reaches the target and `hi` when even
/// `g(hi)` falls short.
pub fn invert_increasing<F>(g: F, target: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: Fn(f64) -> f64,
{
    if g(lo) >= target {
        return lo;
    }
    if g(hi) <= target {
        return hi;
    }
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search for a local minimum of `f` on `[a, b]`.
pub fn golden_min<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..MAX_ITER {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid scan plus golden refinement around the best grid point.
///
/// The scan has `intervals + 1` equally spaced points including both ends.
/// The refined point only replaces the grid winner when strictly better, so
/// an optimum sitting exactly on an endpoint is returned exactly.
pub fn scan_min<F>(f: F, lo: f64, hi: f64, intervals: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    if !(hi > lo) {
        return (lo, f(lo));
    }
    let intervals = intervals.max(2);
    let width = (hi - lo) / intervals as f64;
    let at = |i: usize| {
        if i == intervals {
            hi
        } else {
            lo + width * i as f64
        }
    };
    let mut best_i = 0;
    let mut best_f = f(lo);
    for i in 1..=intervals {
        let v = f(at(i));
        if v < best_f {
            best_f = v;
            best_i = i;
        }
    }
    let best_x = at(best_i);
    let a = at(best_i.saturating_sub(1));
    let b = at((best_i + 1).min(intervals));
    let (x, v) = golden_min(&f, a, b, 1e-13 * (1.0 + hi.abs()));
    if v < best_f {
        (x, v)
    } else {
        (best_x, best_f)
    }
}

/// Maximizing counterpart of [`scan_min`].
pub fn scan_max<F>(f: F, lo: f64, hi: f64, intervals: usize) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    let (x, v) = scan_min(|x| -f(x), lo, hi, intervals);
    (x, -v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let x = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-11);
    }

    #[test]
    fn bisect_rejects_missing_bracket() {
        let err = bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-10).unwrap_err();
        assert!(matches!(err, Error::ConvergenceFailure(_)));
    }

    #[test]
    fn invert_increasing_clamps_to_ends() {
        assert_eq!(invert_increasing(|x| x, -1.0, 0.0, 1.0, 1e-12), 0.0);
        assert_eq!(invert_increasing(|x| x, 2.0, 0.0, 1.0, 1e-12), 1.0);
        let x = invert_increasing(|x| x * x, 0.25, 0.0, 1.0, 1e-14);
        assert!((x - 0.5).abs() < 1e-13);
    }

    #[test]
    fn golden_on_parabola() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -1.0, 2.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scan_keeps_exact_endpoint() {
        // increasing function: minimum at the left end, returned exactly
        let (x, v) = scan_min(|x| x.sqrt(), 0.0, 1.0, 1000);
        assert_eq!(x, 0.0);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn scan_escapes_local_minimum() {
        // two basins; the deeper one is narrow and on the right
        let f =
            |x: f64| -(-(x - 0.2).powi(2) / 0.01).exp() - 2.0 * (-(x - 0.8).powi(2) / 0.001).exp();
        let (x, _) = scan_min(f, 0.0, 1.0, 1000);
        assert!((x - 0.8).abs() < 1e-5, "x = {x}");
        let (xm, vm) = scan_max(|x| -(x - 0.6).powi(2), 0.0, 1.0, 100);
        assert!((xm - 0.6).abs() < 1e-6 && vm.abs() < 1e-12);
    }
}
