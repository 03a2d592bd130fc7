//! The planar set `{(±Σ a_n 2^n, ±Σ a_n 2^{−n}) : a ∈ {0,1}^ℤ finitely supported}`.
//!
//! Both signs are chosen independently, so the set is symmetric under
//! reflection in either axis.

use std::ops::ControlFlow;

use crate::error::{Error, Result};
use crate::generators::grid::ENUMERATION_LIMIT;
use crate::geometry::Window;

/// Visits every point of the set inside `window` (duplicates on the axes possible).
pub(crate) fn visit(window: &Window, f: &mut dyn FnMut(&[f64]) -> ControlFlow<()>) -> Result<ControlFlow<()>> {
    if window.dim() != 2 {
        return Err(Error::arg("the D2 set lives in the plane"));
    }
    let xmax = window.lo[0].abs().max(window.hi[0].abs());
    let ymax = window.lo[1].abs().max(window.hi[1].abs());
    let mut emitted = 0f64;
    let mut emit = |x: f64, y: f64| -> Result<ControlFlow<()>> {
        for (sx, sy) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
            let p = [sx * x, sy * y];
            if window.contains(&p) {
                emitted += 1.0;
                if emitted > ENUMERATION_LIMIT {
                    return Err(Error::resource("D2 enumeration exceeds the point limit"));
                }
                if f(&p).is_break() {
                    return Ok(ControlFlow::Break(()));
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    };
    if emit(0.0, 0.0)?.is_break() {
        return Ok(ControlFlow::Break(()));
    }
    if xmax < 1.0 && ymax < 1.0 {
        return Ok(ControlFlow::Continue(()));
    }
    // positions n with 2^n ≤ xmax and 2^{-n} ≤ ymax
    let top = xmax.log2().floor() as i32;
    let bottom = -(ymax.log2().floor() as i32);
    if top < bottom {
        return Ok(ControlFlow::Continue(()));
    }
    // the quadrant-independent lower bound on |x| needed to reach the window
    let xneed = if window.lo[0] > 0.0 {
        window.lo[0]
    } else if window.hi[0] <= 0.0 {
        -window.hi[0]
    } else {
        0.0
    };
    dfs(top, bottom, 0.0, 0.0, xmax, ymax, xneed, &mut emit)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    start: i32,
    bottom: i32,
    x: f64,
    y: f64,
    xmax: f64,
    ymax: f64,
    xneed: f64,
    emit: &mut dyn FnMut(f64, f64) -> Result<ControlFlow<()>>,
) -> Result<ControlFlow<()>> {
    let mut n = start;
    while n >= bottom {
        // digits at positions ≤ n add less than 2^{n+1}
        if x + (n as f64 + 1.0).exp2() < xneed {
            break;
        }
        let nx = x + (n as f64).exp2();
        let ny = y + (-n as f64).exp2();
        if ny > ymax {
            // smaller positions only increase y further
            break;
        }
        if nx <= xmax {
            if emit(nx, ny)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
            if dfs(n - 1, bottom, nx, ny, xmax, ymax, xneed, emit)?.is_break() {
                return Ok(ControlFlow::Break(()));
            }
        }
        n -= 1;
    }
    Ok(ControlFlow::Continue(()))
}

/// True when `(x, y)` with `x, y > 0` has the mirrored-digit structure of the
/// set: `x` is a finite sum of distinct powers `2^n` and `y` is the sum of
/// the powers `2^{−n}` over the same positions.
pub fn has_mirrored_digits(x: f64, y: f64) -> bool {
    if !(x > 0.0 && y > 0.0) {
        return x == 0.0 && y == 0.0;
    }
    let positions = match binary_positions(x) {
        Some(p) => p,
        None => return false,
    };
    let mirrored: Vec<i32> = match binary_positions(y) {
        Some(p) => p.into_iter().map(|n| -n).collect(),
        None => return false,
    };
    let mut a = positions;
    let mut b = mirrored;
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

/// Exponents of the set bits of a finite binary expansion of `x > 0`.
fn binary_positions(x: f64) -> Option<Vec<i32>> {
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    if exp == 0 || exp == 0x7ff {
        return None;
    }
    let mantissa = (bits & ((1u64 << 52) - 1)) | (1u64 << 52);
    let unbiased = exp - 1075;
    Some(
        (0..53)
            .filter(|b| mantissa >> b & 1 == 1)
            .map(|b| b + unbiased)
            .collect(),
    )
}
