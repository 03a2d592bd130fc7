//! Uniform Diophantine margins of finite families of vectors.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `d·(2T+1)^d` accepted by [`udt_check`].
pub const UDT_WORK_LIMIT: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UdtMargin {
    /// 0-based index of the vector achieving the margin.
    pub best_index: usize,
    pub margin: f64,
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_integers(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// `max_i min_{u ∈ ℤ^d, 0 < ‖u‖∞ ≤ T} ‖u·(ξ − θ_i)‖`, where `‖·‖` is the
/// distance to the nearest integer, together with the maximising `i`
/// (lowest among ties).
///
/// The family has type `Φ` at `(ξ, T)` exactly when the margin is at least `Φ(T)`.
pub fn udt_check(thetas: &[Vec<f64>], xi: &[f64], t: u64) -> Result<UdtMargin> {
    let d = xi.len();
    if thetas.is_empty() || d == 0 || thetas.iter().any(|th| th.len() != d) {
        return Err(Error::arg("need at least one theta, all of the dimension of xi"));
    }
    if thetas.iter().flatten().chain(xi).any(|x| !x.is_finite()) {
        return Err(Error::arg("theta and xi entries must be finite"));
    }
    if t == 0 {
        return Err(Error::arg("T must be >= 1"));
    }
    let work = d as f64 * (2.0 * t as f64 + 1.0).powi(d as i32);
    if work > UDT_WORK_LIMIT {
        return Err(Error::resource(format!("d·(2T+1)^d = {work:.3e} exceeds {UDT_WORK_LIMIT:.0e}")));
    }
    let margins: Vec<f64> = thetas
        .par_iter()
        .map(|theta| {
            let diff: Vec<f64> = xi.iter().zip(theta).map(|(x, th)| x - th).collect();
            min_twisted_distance(&diff, t as i64)
        })
        .collect();
    let mut best = UdtMargin {
        best_index: 0,
        margin: margins[0],
    };
    for (i, m) in margins.iter().enumerate() {
        if *m > best.margin {
            best = UdtMargin {
                best_index: i,
                margin: *m,
            };
        }
    }
    Ok(best)
}

/// `min_{0 < ‖u‖∞ ≤ T} ‖u·v‖`; `u` and `−u` give the same distance, so only
/// vectors with positive leading non-zero entry are visited.
fn min_twisted_distance(v: &[f64], t: i64) -> f64 {
    let d = v.len();
    let span = (2 * t + 1) as u64;
    let total = span.pow(d as u32);
    let mut best = f64::INFINITY;
    let mut u = vec![0i64; d];
    for code in 0..total {
        let mut c = code;
        for ui in u.iter_mut() {
            *ui = (c % span) as i64 - t;
            c /= span;
        }
        match u.iter().find(|x| **x != 0) {
            Some(x) if *x > 0 => {}
            _ => continue,
        }
        let s: f64 = u.iter().zip(v).map(|(a, b)| *a as f64 * b).sum();
        best = best.min(dist_to_integers(s));
        if best == 0.0 {
            break;
        }
    }
    best
}
