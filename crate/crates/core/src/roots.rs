//! Root finding for increasing functions on a bracket.

use crate::error::{Error, Result};

/// Outcome of [`increasing_root`]: the best point seen and its residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Finds `x` in `[lo, hi]` with `|g(x)| <= tol`, given `g` increasing with
/// `g(lo) <= 0 <= g(hi)`.
///
/// Illinois-modified regula falsi, falling back to bisection whenever the
/// secant step leaves the middle of the bracket or stalls. Stops early if
/// the bracket collapses to f64 resolution; `converged` is then false.
pub fn increasing_root<G: FnMut(f64) -> f64>(
    mut g: G,
    mut lo: f64,
    mut hi: f64,
    mut g_lo: f64,
    mut g_hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<Root> {
    let done = |x: f64, residual: f64, iterations: usize| Root {
        x,
        residual,
        iterations,
        converged: true,
    };
    if g_lo.abs() <= tol {
        return Ok(done(lo, g_lo, 0));
    }
    if g_hi.abs() <= tol {
        return Ok(done(hi, g_hi, 0));
    }
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::Input(alloc::format!(
            "bracket [{lo}, {hi}] does not straddle a root ({g_lo}, {g_hi})"
        )));
    }

    let mut side = 0i8;
    let mut best = if g_lo.abs() < g_hi.abs() {
        (lo, g_lo)
    } else {
        (hi, g_hi)
    };
    let mut iterations = 0;
    for iter in 0..max_iter {
        iterations = iter + 1;
        let width = hi - lo;
        let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        // bisect every third step, or when the secant lands at the edges
        if !(x > lo + 0.01 * width && x < hi - 0.01 * width) || iter % 3 == 2 {
            x = 0.5 * (lo + hi);
        }
        if x <= lo || x >= hi {
            break;
        }
        let gx = g(x);
        if gx.abs() < best.1.abs() {
            best = (x, gx);
        }
        if gx.abs() <= tol {
            return Ok(done(x, gx, iterations));
        }
        if gx < 0.0 {
            lo = x;
            g_lo = gx;
            if side == -1 {
                g_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            g_hi = gx;
            if side == 1 {
                g_lo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(Root {
        x: best.0,
        residual: best.1,
        iterations,
        converged: false,
    })
}

/// Bisection to a prescribed residual on a monotone function, returning the
/// best point seen when the bracket collapses to f64 resolution.
pub fn bisect_monotone<G: FnMut(f64) -> f64>(mut g: G, mut lo: f64, mut hi: f64, tol: f64, max_iter: usize) -> f64 {
    let g_lo = g(lo);
    let increasing = g_lo < 0.0;
    let mut best = (lo, g_lo);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm.abs() < best.1.abs() {
            best = (mid, gm);
        }
        if gm.abs() <= tol {
            return mid;
        }
        if (gm < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best.0
}
