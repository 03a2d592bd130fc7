//! Boxes of small volume holding many points of a finite set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point sets up to this size get the exhaustive aligned search.
pub const EXACT_SEARCH_LIMIT: usize = 400;

/// Number of aspect ratios `2^a`, `a ∈ [−10, 10]`, tried on larger sets.
pub const ASPECT_SAMPLES: usize = 21;

/// A box `∏ [a_i, b_i]` in coordinates rotated by `angle` (planar only).
///
/// A point `p` lies in the box when `R(−angle)·p` lies in the intervals;
/// `angle = 0` is an ordinary aligned box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRange {
    pub angle: f64,
    pub intervals: Vec<(f64, f64)>,
}

impl BoxRange {
    pub fn volume(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        let q = rotate(p, -self.angle);
        q.iter().zip(&self.intervals).all(|(x, (a, b))| *a <= *x && *x <= *b)
    }

    /// Every edge multiplied by `factor` about the box centre.
    pub fn scaled(&self, factor: f64) -> BoxRange {
        let intervals = self
            .intervals
            .iter()
            .map(|(a, b)| {
                let (c, r) = (0.5 * (a + b), 0.5 * (b - a) * factor);
                (c - r, c + r)
            })
            .collect();
        BoxRange {
            angle: self.angle,
            intervals,
        }
    }
}

fn rotate(p: &[f64], angle: f64) -> Vec<f64> {
    if angle == 0.0 || p.len() != 2 {
        return p.to_vec();
    }
    let (s, c) = angle.sin_cos();
    vec![c * p[0] - s * p[1], s * p[0] + c * p[1]]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeavyBox {
    pub range: BoxRange,
    pub count: usize,
}

/// Searches boxes of volume `ε` for the largest number of points.
///
/// Aligned boxes stay inside the unit cube. For at most
/// [`EXACT_SEARCH_LIMIT`] planar points every box whose edges pass through
/// point coordinates is examined, so the aligned count is the true maximum;
/// larger planar sets try [`ASPECT_SAMPLES`] aspect ratios with the left edge
/// on each point, and other dimensions use cubes cornered at each point.
/// Unless `aligned_only`, planar searches are repeated in
/// `rotation_samples` seeded rotated frames. The result is a lower bound for
/// the best count over all boxes of volume `ε`.
pub fn heavy_box(points: &[Vec<f64>], eps: f64, aligned_only: bool, rotation_samples: usize, seed: u64) -> Result<HeavyBox> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::arg("box volume must be positive and finite"));
    }
    let d = points.first().map_or(2, Vec::len);
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::arg("points must share one dimension"));
    }
    let inside: Vec<&Vec<f64>> = points
        .iter()
        .filter(|p| p.iter().all(|x| (0.0..=1.0).contains(x)))
        .collect();
    let mut best = if d == 2 {
        let pts: Vec<[f64; 2]> = inside.iter().map(|p| [p[0], p[1]]).collect();
        if pts.len() <= EXACT_SEARCH_LIMIT {
            exact_planar(&pts, eps)
        } else {
            aspect_planar(&pts, eps, true)
        }
    } else {
        cubes(&inside, eps)
    };
    if d == 2 && !aligned_only && !points.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let angles: Vec<f64> = (0..rotation_samples)
            .map(|_| rng.random::<f64>() * std::f64::consts::FRAC_PI_2)
            .collect();
        let rotated: Vec<HeavyBox> = angles
            .par_iter()
            .map(|&angle| {
                let pts: Vec<[f64; 2]> = points
                    .iter()
                    .map(|p| {
                        let q = rotate(p, -angle);
                        [q[0], q[1]]
                    })
                    .collect();
                let mut hb = aspect_planar(&pts, eps, false);
                hb.range.angle = angle;
                hb
            })
            .collect();
        for hb in rotated {
            if hb.count > best.count {
                best = hb;
            }
        }
    }
    Ok(best)
}

/// Widens `[lo, hi]` to length `len`, keeping it inside `[0, 1]` when `clamp`.
fn widen(lo: f64, hi: f64, len: f64, clamp: bool) -> (f64, f64) {
    let mut a = lo - 0.5 * (len - (hi - lo));
    if clamp {
        a = a.clamp(0.0, (1.0 - len).max(0.0));
    }
    (a, a + len)
}

/// Turns a tight box `[x0, x1] × [y0, y1]` of area `≤ ε` into one of area `ε`
/// containing it.
fn expand(x: (f64, f64), y: (f64, f64), eps: f64, clamp: bool) -> BoxRange {
    let (w0, h0) = (x.1 - x.0, y.1 - y.0);
    let mut w = if clamp { w0.max(eps) } else { w0.max(eps.sqrt().min(eps / h0.max(1e-300))) };
    if h0 > 0.0 {
        w = w.min(eps / h0);
    }
    if clamp {
        w = w.min(1.0);
    }
    let xs = widen(x.0, x.1, w, clamp);
    let mut ys = widen(y.0, y.1, eps / w, clamp);
    // the rounded edges must still enclose volume ε
    while (xs.1 - xs.0) * (ys.1 - ys.0) < eps {
        if clamp && ys.1 >= 1.0 {
            ys.0 = ys.0.next_down();
        } else {
            ys.1 = ys.1.next_up();
        }
    }
    BoxRange {
        angle: 0.0,
        intervals: vec![xs, ys],
    }
}

/// Exhaustive search over boxes spanned by pairs of x-coordinates and a
/// sliding window in y.
fn exact_planar(pts: &[[f64; 2]], eps: f64) -> HeavyBox {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]));
    let xs: Vec<[f64; 2]> = order.iter().map(|&i| pts[i]).collect();
    let best = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut best: Option<(usize, (f64, f64), (f64, f64))> = None;
            let mut ys: Vec<f64> = Vec::new();
            for j in i..xs.len() {
                let w = xs[j][0] - xs[i][0];
                let pos = ys.partition_point(|y| *y < xs[j][1]);
                ys.insert(pos, xs[j][1]);
                let h = if w > 0.0 { (eps / w).min(1.0) } else { 1.0 };
                let mut lo = 0;
                for hi in 0..ys.len() {
                    while ys[hi] - ys[lo] > h {
                        lo += 1;
                    }
                    let c = hi - lo + 1;
                    if best.is_none_or(|b| c > b.0) {
                        best = Some((c, (xs[i][0], xs[j][0]), (ys[lo], ys[hi])));
                    }
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if y.0 > x.0 { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        );
    match best {
        Some((count, x, y)) => HeavyBox {
            range: expand(x, y, eps, true),
            count,
        },
        None => empty_box(eps, 2),
    }
}

/// Boxes of fixed aspect ratios with the left edge on a point.
fn aspect_planar(pts: &[[f64; 2]], eps: f64, clamp: bool) -> HeavyBox {
    let mut xs: Vec<[f64; 2]> = pts.to_vec();
    xs.sort_by(|a, b| a[0].total_cmp(&b[0]));
    let widths: Vec<f64> = (0..ASPECT_SAMPLES)
        .map(|k| {
            let a = -10.0 + 20.0 * k as f64 / (ASPECT_SAMPLES - 1) as f64;
            (eps * a.exp2()).sqrt()
        })
        .filter(|w| !clamp || (*w <= 1.0 && eps / w <= 1.0))
        .collect();
    let best = widths
        .par_iter()
        .map(|&w| {
            let h = eps / w;
            let mut best: Option<(usize, (f64, f64), (f64, f64))> = None;
            let mut j = 0;
            let mut ys: Vec<f64> = Vec::new();
            for i in 0..xs.len() {
                if j < i {
                    j = i;
                }
                while j < xs.len() && xs[j][0] - xs[i][0] <= w {
                    j += 1;
                }
                ys.clear();
                ys.extend(xs[i..j].iter().map(|p| p[1]));
                ys.sort_unstable_by(f64::total_cmp);
                let mut lo = 0;
                for hi in 0..ys.len() {
                    while ys[hi] - ys[lo] > h {
                        lo += 1;
                    }
                    let c = hi - lo + 1;
                    if best.is_none_or(|b| c > b.0) {
                        best = Some((c, (xs[i][0], xs[i][0] + w), (ys[lo], ys[lo] + h)));
                    }
                }
            }
            best
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(x), Some(y)) => Some(if y.0 > x.0 { y } else { x }),
                (x, None) => x,
                (None, y) => y,
            },
        );
    match best {
        Some((count, x, y)) => HeavyBox {
            range: expand(x, y, eps, clamp),
            count,
        },
        None => empty_box(eps, 2),
    }
}

/// Cubes of volume `ε` with their lower corner on a point.
fn cubes(pts: &[&Vec<f64>], eps: f64) -> HeavyBox {
    let d = pts.first().map_or(1, |p| p.len());
    let side = eps.powf(1.0 / d as f64).min(1.0);
    let best = pts
        .par_iter()
        .map(|p| {
            let lo: Vec<f64> = p.iter().map(|x| x.min(1.0 - side)).collect();
            let c = pts
                .iter()
                .filter(|q| q.iter().zip(&lo).all(|(x, l)| *l <= *x && *x <= l + side))
                .count();
            (c, lo)
        })
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.iter().zip(&a.1).fold(std::cmp::Ordering::Equal, |o, (x, y)| o.then(x.total_cmp(y)))));
    match best {
        Some((count, lo)) => HeavyBox {
            range: BoxRange {
                angle: 0.0,
                intervals: lo.iter().map(|l| (*l, l + side)).collect(),
            },
            count,
        },
        None => empty_box(eps, d),
    }
}

fn empty_box(eps: f64, d: usize) -> HeavyBox {
    let side = eps.powf(1.0 / d as f64).min(1.0);
    HeavyBox {
        range: BoxRange {
            angle: 0.0,
            intervals: vec![(0.0, side); d],
        },
        count: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_points(n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| vec![rng.random(), rng.random()]).collect()
    }

    fn count_in(points: &[Vec<f64>], b: &BoxRange) -> usize {
        points.iter().filter(|p| b.contains(p)).count()
    }

    #[test]
    fn cluster_in_small_cube() {
        let eps = 0.01;
        let side = (eps / 2.0f64).sqrt();
        let mut pts: Vec<Vec<f64>> = (0..10)
            .map(|i| vec![0.3 + side * i as f64 / 10.0, 0.6 + side * ((i * 3) % 10) as f64 / 10.0])
            .collect();
        pts.extend(random_points(30, 1).into_iter().map(|p| vec![p[0] * 0.2, p[1] * 0.2 + 0.8]));
        let hb = heavy_box(&pts, eps, true, 0, 0).unwrap();
        assert!(hb.count >= 10);
        assert!(hb.range.volume() >= eps);
        assert_eq!(count_in(&pts, &hb.range), hb.count);
    }

    #[test]
    fn collinear_points_fill_thin_boxes() {
        // points on the diagonal line y = 0.5 of width 0: a thin box catches many
        let pts: Vec<Vec<f64>> = (0..100).map(|i| vec![(i as f64 + 0.5) / 100.0, 0.5]).collect();
        let thin = heavy_box(&pts, 0.001, true, 0, 0).unwrap();
        assert_eq!(thin.count, 100);
        assert!(thin.range.volume() >= 0.001 && thin.range.volume() < 0.0011);
    }

    #[test]
    fn reported_box_is_valid() {
        for n in [50, 1000] {
            let pts = random_points(n, 7);
            let hb = heavy_box(&pts, 0.02, true, 0, 0).unwrap();
            assert!(hb.range.volume() >= 0.02);
            assert!(hb.range.volume() <= 0.02 * (1.0 + 1e-9));
            assert!(hb.range.intervals.iter().all(|(a, b)| *a >= 0.0 && *b <= 1.0));
            assert_eq!(count_in(&pts, &hb.range), hb.count);
            let rotated = heavy_box(&pts, 0.02, false, 16, 3).unwrap();
            assert!(rotated.count >= hb.count);
            assert_eq!(count_in(&pts, &rotated.range), rotated.count);
        }
    }

    #[test]
    fn search_dominates_random_boxes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..5 {
            let pts = random_points(120, trial);
            let eps = 0.03;
            let hb = heavy_box(&pts, eps, true, 0, 0).unwrap();
            for _ in 0..2000 {
                let w = rng.random_range(eps..1.0);
                let h = eps / w * rng.random_range(0.5..1.0);
                let x = rng.random_range(0.0..1.0 - w);
                let y = rng.random_range(0.0..(1.0 - h).max(1e-12));
                let b = BoxRange {
                    angle: 0.0,
                    intervals: vec![(x, x + w), (y, y + h)],
                };
                assert!(hb.count >= count_in(&pts, &b));
            }
        }
    }

    #[test]
    fn three_dimensional_cubes() {
        let pts: Vec<Vec<f64>> = (0..20).map(|i| vec![0.1 + 0.001 * i as f64, 0.5, 0.9]).collect();
        let hb = heavy_box(&pts, 0.001, true, 0, 0).unwrap();
        assert_eq!(hb.count, 20);
        assert!((hb.range.volume() - 0.001).abs() < 1e-12);
    }
}
