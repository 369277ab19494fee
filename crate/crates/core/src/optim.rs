//! Small two-parameter minimizers: exhaustive grid search followed by a
//! Newton refinement built from central finite differences.

use crate::error::{Error, Result};
use crate::num::Real;

/// Uniform grid over the half-open box `(lo, lo + span]` in each coordinate.
pub(crate) fn grid_points<T: Real>(lo: T, span: T, steps: usize) -> Vec<T> {
    let step = span / T::lit(steps as f64);
    (1..=steps).map(|k| lo + step * T::lit(k as f64)).collect()
}

/// Every grid point whose value lies within `tie_tol` of the grid minimum.
pub(crate) fn grid_minima<T: Real, F: Fn(T, T) -> T>(f: &F, xs: &[T], ys: &[T], tie_tol: T) -> Vec<([T; 2], T)> {
    let values: Vec<([T; 2], T)> =
        xs.iter().flat_map(|&x| ys.iter().map(move |&y| [x, y])).map(|p| (p, f(p[0], p[1]))).collect();
    let best = values.iter().map(|(_, v)| *v).fold(T::infinity(), T::min);
    values.into_iter().filter(|(_, v)| *v <= best + tie_tol).collect()
}

/// Newton iteration on `f` using central-difference derivatives. Directions
/// whose curvature is not positive are left untouched.
pub(crate) fn refine_newton<T: Real, F: Fn(T, T) -> T>(f: &F, start: [T; 2], max_iter: usize) -> Result<[T; 2]> {
    let h = T::tol(1e-4).max(T::epsilon().powf(T::lit(0.25)));
    let flat = T::tol(1e-9);
    let step_tol = T::tol(1e-10);
    let two = T::lit(2.0);
    let mut x = start;
    for _ in 0..max_iter {
        let f0 = f(x[0], x[1]);
        let fxp = f(x[0] + h, x[1]);
        let fxm = f(x[0] - h, x[1]);
        let fyp = f(x[0], x[1] + h);
        let fym = f(x[0], x[1] - h);
        let gx = (fxp - fxm) / (two * h);
        let gy = (fyp - fym) / (two * h);
        let hxx = (fxp - two * f0 + fxm) / (h * h);
        let hyy = (fyp - two * f0 + fym) / (h * h);
        let hxy = (f(x[0] + h, x[1] + h) - f(x[0] + h, x[1] - h) - f(x[0] - h, x[1] + h) + f(x[0] - h, x[1] - h))
            / (T::lit(4.0) * h * h);

        let curved_x = hxx > flat;
        let curved_y = hyy > flat;
        let (dx, dy) = match (curved_x, curved_y) {
            (true, true) => {
                let det = hxx * hyy - hxy * hxy;
                if det > flat * flat {
                    ((hyy * gx - hxy * gy) / det, (hxx * gy - hxy * gx) / det)
                } else {
                    (gx / hxx, gy / hyy)
                }
            }
            (true, false) => (gx / hxx, T::zero()),
            (false, true) => (T::zero(), gy / hyy),
            (false, false) => (T::zero(), T::zero()),
        };
        // cap the step so a bad curvature estimate cannot throw us out of the basin
        let cap = T::lit(0.1);
        let dx = dx.max(-cap).min(cap);
        let dy = dy.max(-cap).min(cap);
        x = [x[0] - dx, x[1] - dy];
        if dx.abs() <= step_tol && dy.abs() <= step_tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence { what: "Newton refinement", iterations: max_iter })
}

/// Maps `x` into the period window `(center - period/2, center + period/2]`,
/// snapping values within `1e-9` of the open lower edge onto the closed upper edge.
pub(crate) fn wrap_to_window<T: Real>(x: T, center: T, period: T) -> T {
    let half = period / T::lit(2.0);
    let lo = center - half;
    let hi = center + half;
    let mut y = x - period * ((x - lo) / period).floor();
    if y <= lo + T::tol(1e-9) {
        y += period;
    }
    if (y - hi).abs() <= T::tol(1e-9) {
        y = hi;
    }
    y
}
