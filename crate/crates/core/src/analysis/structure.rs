//! Large-scale structure of point sets: density, minimum spacing and vacant strips.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{Grid, PointSetSpec};
use crate::geometry::{euclidean_norm, gcd, stratified_directions, Window};

/// Largest absolute coefficient of the dual-lattice vectors tried by [`vacant_strip`].
pub const DUAL_INDEX_BOUND: i64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripReport {
    pub direction: Vec<f64>,
    pub width: f64,
    pub window_radius: f64,
}

/// Primitive integer vectors in `[−b, b]^n` with positive leading non-zero entry.
fn primitive_vectors(n: usize, b: i64) -> Vec<Vec<i64>> {
    let span = (2 * b + 1) as usize;
    let mut out = Vec::new();
    for code in 0..span.pow(n as u32) {
        let mut c = code;
        let m: Vec<i64> = (0..n)
            .map(|_| {
                let v = (c % span) as i64 - b;
                c /= span;
                v
            })
            .collect();
        let lead = m.iter().find(|x| **x != 0).copied();
        if lead.is_none_or(|x| x < 0) {
            continue;
        }
        if m.iter().fold(0, |g, x| gcd(g, x.unsigned_abs())) == 1 {
            out.push(m);
        }
    }
    out
}

/// Candidate strip normal together with the strip width it could at most have.
struct Candidate {
    direction: Vec<f64>,
    /// Gap of the projections of a grid contained in the set, if known.
    bound: f64,
}

fn dual_candidates(grid: &Grid, subset: bool) -> Result<Vec<Candidate>> {
    let dual = grid.dual_basis()?;
    let n = grid.dim();
    Ok(primitive_vectors(n, DUAL_INDEX_BOUND)
        .into_iter()
        .map(|m| {
            let w: Vec<f64> = (0..n)
                .map(|i| (0..n).map(|j| dual[i][j] * m[j] as f64).sum())
                .collect();
            let norm = euclidean_norm(&w);
            Candidate {
                direction: w.iter().map(|x| x / norm).collect(),
                bound: if subset { 1.0 / norm } else { f64::INFINITY },
            }
        })
        .collect())
}

/// Largest gap between consecutive values of `s` (sorted in place).
fn max_gap(s: &mut [f64]) -> f64 {
    s.sort_unstable_by(f64::total_cmp);
    s.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

/// Widest empty strip found among candidate normals.
///
/// Candidates are the normalised dual-lattice vectors `B^{−T}m`, `m`
/// primitive with entries in `[−16, 16]`, of each grid of the construction,
/// plus the stratified probe directions and `extra_directions`. Points are
/// projected onto each candidate `u`; only projections within half the
/// window's inner radius of the centre are compared, where every parallel
/// line still crosses the window along a chord of length at least that
/// radius. The width is the largest gap between consecutive projections.
///
/// When the set contains a grid, the gap along one of that grid's dual
/// directions `w` is at most `1/|w|`, and candidates whose bound cannot beat
/// the current best are skipped.
pub fn vacant_strip(spec: &PointSetSpec, window: &Window, extra_directions: &[Vec<f64>]) -> Result<StripReport> {
    let set = spec.compile()?;
    let n = set.dim();
    let (grids, subset) = match spec {
        PointSetSpec::PeresForest | PointSetSpec::ThreeGrid { .. } | PointSetSpec::GridUnion { .. } => {
            (spec.grids(), true)
        }
        PointSetSpec::CutAndProject { grid, .. } => (vec![grid.clone()], false),
        _ => (vec![], false),
    };
    let mut cands: Vec<Candidate> = Vec::new();
    for g in &grids {
        cands.extend(dual_candidates(g, subset)?);
    }
    for d in stratified_directions(n).into_iter().chain(extra_directions.iter().cloned()) {
        let norm = euclidean_norm(&d);
        if d.len() != n || !(norm > 0.0) {
            return Err(Error::arg("strip directions must be non-zero vectors of the set's dimension"));
        }
        cands.push(Candidate {
            direction: d.iter().map(|x| x / norm).collect(),
            bound: f64::INFINITY,
        });
    }
    // most promising candidates first so the bound prunes early
    cands.sort_by(|a, b| b.bound.total_cmp(&a.bound));

    let radius = window.inner_radius();
    let center = window.center();
    let mut points: Vec<Vec<f64>> = Vec::new();
    set.for_each(window, |p| {
        points.push(p.iter().zip(&center).map(|(x, c)| x - c).collect());
    })?;
    let band = 0.5 * radius;
    let gap_along = |u: &[f64]| {
        let mut s: Vec<f64> = points
            .iter()
            .map(|p| p.iter().zip(u).map(|(a, b)| a * b).sum::<f64>())
            .filter(|s| s.abs() <= band)
            .collect();
        // the band edges bound the strip as well
        s.extend([-band, band]);
        max_gap(&mut s)
    };

    let mut best = (cands[0].direction.clone(), -1.0);
    let batch_size = rayon::current_num_threads().max(1) * 4;
    let mut next = 0;
    while next < cands.len() {
        // evaluate a batch in parallel, then prune with the updated best
        let mut batch: Vec<usize> = Vec::with_capacity(batch_size);
        while next < cands.len() && batch.len() < batch_size {
            if cands[next].bound > best.1 {
                batch.push(next);
            }
            next += 1;
        }
        let widths: Vec<f64> = batch.par_iter().map(|&i| gap_along(&cands[i].direction)).collect();
        for (&i, w) in batch.iter().zip(widths) {
            if w > best.1 {
                best = (cands[i].direction.clone(), w);
            }
        }
    }
    Ok(StripReport {
        direction: best.0,
        width: best.1.max(0.0),
        window_radius: radius,
    })
}

/// `#(S ∩ B₂(0, T)) / Tⁿ` for each radius `T`.
pub fn density_profile(spec: &PointSetSpec, radii: &[f64]) -> Result<Vec<(f64, f64)>> {
    if radii.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
        return Err(Error::arg("radii must be positive and finite"));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("radii must be strictly increasing"));
    }
    let set = spec.compile()?;
    let n = set.dim();
    radii
        .iter()
        .map(|&t| {
            // the half-open window must include points on the sphere
            let pad = 1e-9 * t.max(1.0);
            let window = Window::new(vec![-t - pad; n], vec![t + pad; n])?;
            let mut count = 0u64;
            let limit = t * t * (1.0 + 1e-12);
            set.for_each(&window, |p| {
                if p.iter().map(|x| x * x).sum::<f64>() <= limit {
                    count += 1;
                }
            })?;
            Ok((t, count as f64 / t.powi(n as i32)))
        })
        .collect()
}

/// Exact minimum pairwise Euclidean distance among the points of `window`.
pub fn min_gap(spec: &PointSetSpec, window: &Window) -> Result<f64> {
    let points: Vec<Vec<f64>> = spec
        .compile()?
        .enumerate(window)?
        .into_iter()
        .map(|p| p.coords)
        .collect();
    min_gap_of(&points)
}

/// Exact minimum pairwise Euclidean distance by bucketing.
///
/// With cells of side `h`, any pair closer than `h` lies in neighbouring
/// cells; the cell side doubles until the minimum found is below it.
pub fn min_gap_of(points: &[Vec<f64>]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::arg("minimum gap needs at least two points"));
    }
    let n = points[0].len();
    let mut lo = points[0].clone();
    let mut hi = points[0].clone();
    for p in points {
        for i in 0..n {
            lo[i] = lo[i].min(p[i]);
            hi[i] = hi[i].max(p[i]);
        }
    }
    let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| (b - a).max(1e-9)).product();
    let mut h = 0.5 * (volume / points.len() as f64).powf(1.0 / n as f64);
    if !(h > 0.0) {
        h = 1.0;
    }
    loop {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let key: Vec<i64> = p.iter().zip(&lo).map(|(x, l)| ((x - l) / h).floor() as i64).collect();
            cells.entry(key).or_default().push(i);
        }
        let neighbours = 3usize.pow(n as u32);
        let best = cells
            .par_iter()
            .map(|(key, members)| {
                let mut best = f64::INFINITY;
                for code in 0..neighbours {
                    let mut c = code;
                    let other: Vec<i64> = key
                        .iter()
                        .map(|k| {
                            let off = (c % 3) as i64 - 1;
                            c /= 3;
                            k + off
                        })
                        .collect();
                    let Some(others) = cells.get(&other) else { continue };
                    for &i in members {
                        for &j in others {
                            if i < j {
                                let d: f64 = points[i]
                                    .iter()
                                    .zip(&points[j])
                                    .map(|(a, b)| (a - b) * (a - b))
                                    .sum::<f64>();
                                best = best.min(d);
                            }
                        }
                    }
                }
                best
            })
            .reduce(|| f64::INFINITY, f64::min)
            .sqrt();
        if best <= h {
            return Ok(best);
        }
        h *= 2.0;
    }
}
