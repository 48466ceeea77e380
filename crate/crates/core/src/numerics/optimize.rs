use libm::fabs;

use super::Tolerance;
use crate::error::{Error, Result};

/// Number of points in the coarse scan that precedes every local refinement.
pub const GRID_POINTS: usize = 65;

/// Location and value of a minimum found by [`minimize_scalar`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

#[inline]
fn finite_or_inf(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` over `[lo, hi]` by a uniform scan followed by golden-section
/// refinement around the best grid point. NaN values count as `+∞`.
///
/// The scan makes the search robust to mild non-convexity; the returned value
/// is always one that `f` actually produced.
pub fn minimize_scalar<F>(f: F, lo: f64, hi: f64, tol: Tolerance) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    minimize_scalar_grid(f, lo, hi, GRID_POINTS, tol)
}

/// [`minimize_scalar`] with a scan of `points` (at least 3) grid points.
pub fn minimize_scalar_grid<F>(mut f: F, lo: f64, hi: f64, points: usize, tol: Tolerance) -> Result<Minimum>
where
    F: FnMut(f64) -> f64,
{
    let points = points.max(3);
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Domain("minimization bracket must be finite and ordered"));
    }
    if lo == hi {
        return Ok(Minimum { x: lo, value: finite_or_inf(f(lo)) });
    }
    let step = (hi - lo) / (points - 1) as f64;
    let mut best = Minimum { x: lo, value: f64::INFINITY };
    let mut best_i = 0;
    for i in 0..points {
        let x = if i + 1 == points { hi } else { lo + step * i as f64 };
        let v = finite_or_inf(f(x));
        if v < best.value {
            best = Minimum { x, value: v };
            best_i = i;
        }
    }
    if !best.value.is_finite() {
        return Ok(best);
    }
    let mut a = lo + step * best_i.saturating_sub(1) as f64;
    let mut b = (lo + step * (best_i + 1) as f64).min(hi);
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = finite_or_inf(f(c));
    let mut fd = finite_or_inf(f(d));
    for _ in 0..tol.max_iter {
        if fabs(b - a) <= tol.threshold(0.5 * (a + b)) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = finite_or_inf(f(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = finite_or_inf(f(d));
        }
    }
    for (x, v) in [(c, fc), (d, fd)] {
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    Ok(best)
}

/// Smallest `u ∈ [u_lo, u_max]` (up to tolerance) with `bound(u) ≤ delta`,
/// for a tail bound that is nonincreasing in `u`.
///
/// The returned point always satisfies `bound(u) ≤ delta`, so the result is
/// a valid quantile even if `bound` is only approximately monotone.
pub fn invert_monotone_tail<F>(mut bound: F, delta: f64, u_lo: f64, u_max: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain("tail level must lie in (0, 1)"));
    }
    if !(u_lo.is_finite() && u_max.is_finite()) || u_lo > u_max {
        return Err(Error::Domain("inversion bracket must be finite and ordered"));
    }
    let ok = |v: f64| v <= delta;
    if ok(bound(u_lo)) {
        return Ok(u_lo);
    }
    let step = (u_max - u_lo) / (GRID_POINTS - 1) as f64;
    let mut lo = u_lo;
    let mut hi = None;
    for i in 1..GRID_POINTS {
        let u = if i + 1 == GRID_POINTS { u_max } else { u_lo + step * i as f64 };
        if ok(bound(u)) {
            hi = Some(u);
            break;
        }
        lo = u;
    }
    let mut hi = hi.ok_or(Error::Unattainable { delta, u_max })?;
    for _ in 0..tol.max_iter {
        if hi - lo <= tol.threshold(hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(bound(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    debug_assert!(ok(bound(hi)));
    Ok(hi)
}
