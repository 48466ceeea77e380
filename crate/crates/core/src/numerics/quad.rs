use alloc::vec;
use alloc::vec::Vec;

use libm::fabs;

use super::Tolerance;
use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639,
    0.949_107_912_342_758_525,
    0.864_864_423_359_769_073,
    0.741_531_185_599_394_440,
    0.586_087_235_467_691_130,
    0.405_845_151_377_397_167,
    0.207_784_955_007_898_468,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_553,
    0.104_790_010_322_250_184,
    0.140_653_259_715_525_919,
    0.169_004_726_639_267_903,
    0.190_350_578_064_785_410,
    0.204_432_940_075_298_892,
    0.209_482_141_084_727_828,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] =
    [0.129_484_966_168_869_693, 0.279_705_391_489_276_668, 0.381_830_050_505_118_945, 0.417_959_183_673_469_388];

struct Segment {
    lo: f64,
    hi: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

// The cubic map s ↦ s²(3 − 2s) has vanishing derivative at both ends, which
// absorbs integrable endpoint singularities of the form (x − a)^{-1/2}.
#[inline]
fn smooth_map(a: f64, b: f64, s: f64) -> (f64, f64) {
    let x = a + (b - a) * s * s * (3.0 - 2.0 * s);
    let jac = (b - a) * 6.0 * s * (1.0 - s);
    (x, jac)
}

fn gk15<F>(f: &mut F, a: f64, b: f64, lo: f64, hi: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>)
where
    F: FnMut(f64, &mut [f64]),
{
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut eval = |s: f64, buf: &mut [f64]| {
        let (x, jac) = smooth_map(a, b, s);
        buf.iter_mut().for_each(|v| *v = 0.0);
        if jac != 0.0 {
            f(x, buf);
            buf.iter_mut().for_each(|v| *v *= jac);
        }
    };
    for (i, &node) in XGK.iter().enumerate() {
        let offsets: &[f64] = if node == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sign in offsets {
            eval(centre + sign * half * node, buf);
            for j in 0..dim {
                kron[j] += WGK[i] * buf[j];
                if i % 2 == 1 {
                    gauss[j] += WG[i / 2] * buf[j];
                }
            }
        }
    }
    let mut err = vec![0.0; dim];
    for j in 0..dim {
        kron[j] *= half;
        gauss[j] *= half;
        err[j] = fabs(kron[j] - gauss[j]);
    }
    (kron, err)
}

/// Adaptive Gauss-Kronrod (7/15) integration of a vector-valued integrand
/// over `[a, b]`.
///
/// `f(x, out)` writes the `dim` components at `x`. All components share the
/// same subdivision, which pays off when they have similar shapes. Endpoint
/// singularities like `(x − a)^{-1/2}` are handled by an internal change of
/// variables.
pub fn integrate_vec<F>(mut f: F, dim: usize, a: f64, b: f64, tol: Tolerance) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integration limits must be finite"));
    }
    if dim == 0 || a == b {
        return Ok(vec![0.0; dim]);
    }
    if a > b {
        let mut v = integrate_vec(f, dim, b, a, tol)?;
        v.iter_mut().for_each(|x| *x = -*x);
        return Ok(v);
    }
    let mut buf = vec![0.0; dim];
    let (value, error) = gk15(&mut f, a, b, 0.0, 1.0, dim, &mut buf);
    let mut segments = vec![Segment { lo: 0.0, hi: 1.0, value, error }];
    for _ in 0..tol.max_iter {
        let mut total = vec![0.0; dim];
        let mut total_err = vec![0.0; dim];
        for seg in &segments {
            for j in 0..dim {
                total[j] += seg.value[j];
                total_err[j] += seg.error[j];
            }
        }
        let done = (0..dim).all(|j| total_err[j] <= tol.threshold(total[j]));
        if done || !total.iter().all(|v| v.is_finite()) {
            if total.iter().all(|v| v.is_finite()) {
                return Ok(total);
            }
            return Err(Error::Overflow("integrand"));
        }
        // Split the segment contributing most relative error.
        let scale: Vec<f64> = (0..dim).map(|j| tol.threshold(total[j]).max(f64::MIN_POSITIVE)).collect();
        let worst = segments
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let e = (0..dim).map(|j| s.error[j] / scale[j]).fold(0.0, f64::max);
                (i, e)
            })
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc })
            .0;
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // Interval cannot be refined further in floating point.
            let mut total = vec![0.0; dim];
            for s in segments.iter().chain(core::iter::once(&seg)) {
                for (t, v) in total.iter_mut().zip(&s.value) {
                    *t += v;
                }
            }
            return Ok(total);
        }
        for (lo, hi) in [(seg.lo, mid), (mid, seg.hi)] {
            let (value, error) = gk15(&mut f, a, b, lo, hi, dim, &mut buf);
            segments.push(Segment { lo, hi, value, error });
        }
    }
    let estimate: f64 = segments.iter().map(|s| s.value[0]).sum();
    let error: f64 = segments.iter().map(|s| s.error[0]).sum();
    Err(Error::QuadratureFailed { estimate, error })
}

/// Adaptive Gauss-Kronrod integration of a scalar function over `[a, b]`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate_vec(|x, out| out[0] = f(x), 1, a, b, tol).map(|v| v[0])
}
