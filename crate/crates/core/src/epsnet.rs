//! ε-nets for boxes in the unit cube: random nets, the scaled D2 net for
//! aligned boxes, Monte Carlo verification and the slab lower bound.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::BoxRange;
use crate::error::{Error, Result};
use crate::generators::{canonicalize, PointSetSpec};
use crate::geometry::{AlignedBox, Window};

/// Largest random net [`hw_net`] will draw.
pub const NET_SIZE_LIMIT: f64 = 1e7;

/// Sampled boxes have edge ratios within `2^{±MAX_LOG_ASPECT}`.
pub const MAX_LOG_ASPECT: f64 = 10.0;

/// Redraws of a box that does not fit the cube before a fallback shape is used.
const REJECTION_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NetMethod {
    HausslerWelzl,
    D2Aligned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub epsilon: f64,
    pub method: NetMethod,
}

impl Net {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoxSampler {
    Aligned,
    Rotated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetReport {
    pub boxes_tested: usize,
    pub hit_fraction: f64,
    /// First sampled box without a net point.
    pub worst_missed_box: Option<BoxRange>,
}

/// Number of points drawn by [`hw_net`]: `⌈C·ε⁻¹·ln ε⁻¹⌉`.
pub fn hw_size(eps: f64, c: f64) -> f64 {
    (c / eps * (1.0 / eps).ln()).ceil()
}

/// `⌈C·ε⁻¹·ln ε⁻¹⌉` seeded uniform points of `[0,1]^d`.
pub fn hw_net(eps: f64, d: usize, c: f64, seed: u64) -> Result<Net> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::arg("epsilon must lie in (0, 1)"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::arg("C must be a positive finite number"));
    }
    if d == 0 {
        return Err(Error::arg("dimension must be at least 1"));
    }
    let size = hw_size(eps, c);
    if size * d as f64 > NET_SIZE_LIMIT {
        return Err(Error::resource(format!("a net of {size:.3e} points in dimension {d} is too large")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..size as usize)
        .map(|_| (0..d).map(|_| rng.random::<f64>()).collect())
        .collect();
    Ok(Net {
        dim: d,
        points,
        epsilon: eps,
        method: NetMethod::HausslerWelzl,
    })
}

/// `√ε·𝔇₂ ∩ [0,1]²`, which meets every aligned box of area `ε` in the unit
/// square whenever `𝔇₂` meets every aligned box of area 1.
pub fn d2_aligned_net(eps: f64) -> Result<Net> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::arg("epsilon must lie in (0, 1]"));
    }
    let s = eps.sqrt();
    let reach = 1.0 / s;
    let window = Window::new(vec![0.0; 2], vec![reach * (1.0 + 1e-12) + 1e-12; 2])?;
    let mut raw = Vec::new();
    PointSetSpec::D2.compile()?.for_each(&window, |p| {
        let q = [s * p[0], s * p[1]];
        if q.iter().all(|x| (0.0..=1.0).contains(x)) {
            raw.push(q.to_vec());
        }
    })?;
    Ok(Net {
        dim: 2,
        points: canonicalize(raw),
        epsilon: eps,
        method: NetMethod::D2Aligned,
    })
}

/// Seeded boxes of the given volume inside `[0,1]^dim`.
///
/// Edge ratios are log-uniform within `2^{±MAX_LOG_ASPECT}` (restricted to
/// those that fit the cube) and centres uniform over the feasible positions.
/// Rotated boxes are planar with a uniform angle in `[0, π/2)`; boxes whose
/// rotated footprint leaves the cube are redrawn.
pub fn sample_boxes(dim: usize, sampler: BoxSampler, volume: f64, trials: usize, seed: u64) -> Result<Vec<BoxRange>> {
    if dim == 0 {
        return Err(Error::arg("dimension must be at least 1"));
    }
    if !(volume > 0.0 && volume <= 1.0) {
        return Err(Error::arg("box volume must lie in (0, 1]"));
    }
    if sampler == BoxSampler::Rotated && dim != 2 {
        return Err(Error::arg("rotated boxes are only sampled in the plane"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..trials)
        .map(|_| match sampler {
            BoxSampler::Aligned => aligned_box(&mut rng, dim, volume),
            BoxSampler::Rotated => rotated_box(&mut rng, volume),
        })
        .collect())
}

/// Log-uniform ratio `w/h` for a planar box of area `volume` with both edges ≤ 1.
fn planar_sides(rng: &mut ChaCha8Rng, volume: f64) -> (f64, f64) {
    let bound = MAX_LOG_ASPECT.min(-volume.log2());
    let u = if bound > 0.0 { rng.random_range(-bound..=bound) } else { 0.0 };
    let r = u.exp2();
    ((volume * r).sqrt().min(1.0), (volume / r).sqrt().min(1.0))
}

fn place(rng: &mut ChaCha8Rng, side: f64) -> f64 {
    let slack = (1.0 - side).max(0.0);
    side / 2.0 + rng.random::<f64>() * slack
}

fn aligned_box(rng: &mut ChaCha8Rng, dim: usize, volume: f64) -> BoxRange {
    let sides: Vec<f64> = match dim {
        1 => vec![volume],
        2 => {
            let (w, h) = planar_sides(rng, volume);
            vec![w, h]
        }
        _ => {
            // exponents within ±MAX_LOG_ASPECT/2 keep every pairwise ratio in range
            let base = volume.powf(1.0 / dim as f64);
            let half = MAX_LOG_ASPECT / 2.0;
            let mut sides = vec![base; dim];
            for _ in 0..REJECTION_ATTEMPTS {
                let e: Vec<f64> = (0..dim).map(|_| rng.random_range(-half..=half)).collect();
                let mean = e.iter().sum::<f64>() / dim as f64;
                let cand: Vec<f64> = e.iter().map(|x| base * (x - mean).exp2()).collect();
                if cand.iter().all(|s| *s <= 1.0) {
                    sides = cand;
                    break;
                }
            }
            sides
        }
    };
    let intervals = sides
        .iter()
        .map(|s| {
            let c = place(rng, *s);
            (c - s / 2.0, c + s / 2.0)
        })
        .collect();
    BoxRange { angle: 0.0, intervals }
}

fn rotated_box(rng: &mut ChaCha8Rng, volume: f64) -> BoxRange {
    for _ in 0..REJECTION_ATTEMPTS {
        let (w, h) = planar_sides(rng, volume);
        let angle = rng.random_range(0.0..FRAC_PI_2);
        let (s, c) = angle.sin_cos();
        let (bw, bh) = (w * c + h * s, w * s + h * c);
        if bw > 1.0 || bh > 1.0 {
            continue;
        }
        let centre = [place(rng, bw), place(rng, bh)];
        // centre in the rotated frame, R(−angle)·centre
        let q = [c * centre[0] + s * centre[1], -s * centre[0] + c * centre[1]];
        return BoxRange {
            angle,
            intervals: vec![(q[0] - w / 2.0, q[0] + w / 2.0), (q[1] - h / 2.0, q[1] + h / 2.0)],
        };
    }
    aligned_box(rng, 2, volume)
}

/// Fraction of `boxes` holding at least one of `points`.
pub fn verify_boxes(points: &[Vec<f64>], boxes: &[BoxRange]) -> NetReport {
    let hits: Vec<bool> = boxes
        .par_iter()
        .map(|b| points.iter().any(|p| b.contains(p)))
        .collect();
    let n_hit = hits.iter().filter(|h| **h).count();
    NetReport {
        boxes_tested: boxes.len(),
        hit_fraction: if boxes.is_empty() { 0.0 } else { n_hit as f64 / boxes.len() as f64 },
        worst_missed_box: hits.iter().position(|h| !h).map(|i| boxes[i].clone()),
    }
}

/// Samples `trials` boxes of the given volume with [`sample_boxes`] and
/// reports how many contain a net point.
pub fn verify_net(net: &Net, sampler: BoxSampler, volume: f64, trials: usize, seed: u64) -> Result<NetReport> {
    if trials == 0 {
        return Err(Error::arg("need at least one trial"));
    }
    if net.points.iter().any(|p| p.len() != net.dim) {
        return Err(Error::arg("net points must match the net dimension"));
    }
    let boxes = sample_boxes(net.dim, sampler, volume, trials, seed)?;
    Ok(verify_boxes(&net.points, &boxes))
}

/// A slab `[0,1]^{d−1} × [a, b]` whose interior holds none of `points`, with
/// `[a, b]` the widest gap between consecutive coordinates (including 0 and 1)
/// over all axes. Its volume is at least `1/(k+1)` for `k` points.
pub fn slab_lower_bound(points: &[Vec<f64>], dim: usize) -> Result<AlignedBox> {
    if dim == 0 {
        return Err(Error::arg("dimension must be at least 1"));
    }
    if points
        .iter()
        .any(|p| p.len() != dim || p.iter().any(|x| !(0.0..=1.0).contains(x)))
    {
        return Err(Error::arg("points must lie in the unit cube of the given dimension"));
    }
    let mut best = (0usize, 0.0, 1.0);
    let mut best_len = -1.0;
    for axis in 0..dim {
        let mut xs: Vec<f64> = points.iter().map(|p| p[axis]).collect();
        xs.push(0.0);
        xs.push(1.0);
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            if w[1] - w[0] > best_len {
                best_len = w[1] - w[0];
                best = (axis, w[0], w[1]);
            }
        }
    }
    let mut intervals = vec![(0.0, 1.0); dim];
    intervals[best.0] = (best.1, best.2);
    AlignedBox::new(intervals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::has_mirrored_digits;
    use proptest::prelude::{prop, prop_assert, proptest};

    #[test]
    fn hw_size_and_determinism() {
        let n = hw_net(0.5, 2, 2.0, 9).unwrap();
        assert_eq!(n.len(), 3);
        assert_eq!(n, hw_net(0.5, 2, 2.0, 9).unwrap());
        assert_ne!(n.points, hw_net(0.5, 2, 2.0, 10).unwrap().points);
        assert!(matches!(hw_net(1e-6, 2, 10.0, 1), Err(Error::Resource(_))));
        assert!(hw_net(1.0, 2, 1.0, 1).is_err());
        assert!(hw_net(0.5, 2, 0.0, 1).is_err());
    }

    #[test]
    fn d2_net_at_unit_volume() {
        let n = d2_aligned_net(1.0).unwrap();
        assert!(n.points.contains(&vec![0.0, 0.0]));
        assert!(n.points.contains(&vec![1.0, 1.0]));
        assert!(d2_aligned_net(0.0).is_err());
    }

    /// All sums over subsets of positions `−8..=8`, kept inside `[0, r]²`.
    fn d2_brute(r: f64) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << 17) {
            let (mut x, mut y) = (0.0f64, 0.0f64);
            for b in 0..17 {
                if mask >> b & 1 == 1 {
                    let n = b as i32 - 8;
                    x += (n as f64).exp2();
                    y += (-n as f64).exp2();
                }
            }
            if x <= r && y <= r {
                out.push(vec![x, y]);
            }
        }
        canonicalize(out)
    }

    #[test]
    fn d2_net_matches_brute_force() {
        for eps in [1.0 / 16.0, 1.0 / 256.0] {
            let net = d2_aligned_net(eps).unwrap();
            let s = eps.sqrt();
            let expect: Vec<Vec<f64>> = d2_brute(1.0 / s)
                .into_iter()
                .map(|p| p.iter().map(|x| x * s).collect())
                .collect();
            assert_eq!(net.points, expect);
            for p in &net.points {
                assert!(has_mirrored_digits(p[0] / s, p[1] / s));
            }
        }
    }

    #[test]
    fn verify_examples() {
        let corners = Net {
            dim: 2,
            points: vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0], vec![0.5, 0.5]],
            epsilon: 0.5,
            method: NetMethod::HausslerWelzl,
        };
        let r = verify_net(&corners, BoxSampler::Aligned, 1.0, 50, 1).unwrap();
        assert_eq!(r.hit_fraction, 1.0);
        assert!(r.worst_missed_box.is_none());
        let empty = Net { points: vec![], ..corners.clone() };
        for sampler in [BoxSampler::Aligned, BoxSampler::Rotated] {
            let r = verify_net(&empty, sampler, 0.1, 50, 1).unwrap();
            assert_eq!(r.hit_fraction, 0.0);
            assert_eq!(r.boxes_tested, 50);
        }
        assert!(verify_net(&corners, BoxSampler::Aligned, 0.1, 0, 1).is_err());
    }

    #[test]
    fn sampled_boxes_fit_the_cube() {
        for (dim, sampler) in [(1, BoxSampler::Aligned), (2, BoxSampler::Aligned), (2, BoxSampler::Rotated), (3, BoxSampler::Aligned)] {
            for v in [1.0, 0.3, 0.01, 1e-4] {
                for b in sample_boxes(dim, sampler, v, 300, 5).unwrap() {
                    assert!((b.volume() - v).abs() < 1e-9 * v.max(1e-3), "{b:?}");
                    let ratio = b.intervals.iter().map(|(a, c)| c - a).fold(0.0f64, f64::max)
                        / b.intervals.iter().map(|(a, c)| c - a).fold(f64::INFINITY, f64::min);
                    assert!(ratio <= MAX_LOG_ASPECT.exp2() * (1.0 + 1e-9));
                    // all corners inside the cube
                    let (s, c) = b.angle.sin_cos();
                    let corners: Vec<Vec<f64>> = if dim == 2 {
                        let ((x0, x1), (y0, y1)) = (b.intervals[0], b.intervals[1]);
                        [(x0, y0), (x0, y1), (x1, y0), (x1, y1)]
                            .iter()
                            .map(|(u, w)| vec![c * u - s * w, s * u + c * w])
                            .collect()
                    } else {
                        vec![b.intervals.iter().map(|i| i.0).collect(), b.intervals.iter().map(|i| i.1).collect()]
                    };
                    for q in corners {
                        assert!(q.iter().all(|x| *x >= -1e-12 && *x <= 1.0 + 1e-12), "{b:?}");
                    }
                }
            }
        }
        assert!(sample_boxes(3, BoxSampler::Rotated, 0.1, 1, 1).is_err());
    }

    #[test]
    fn hit_fraction_grows_with_volume() {
        let net = hw_net(0.05, 2, 1.0, 3).unwrap();
        for sampler in [BoxSampler::Aligned, BoxSampler::Rotated] {
            let small = sample_boxes(2, sampler, 0.01, 2000, 8).unwrap();
            let mut last = 0.0;
            for v in [0.01, 0.02, 0.05, 0.1, 0.3] {
                let boxes: Vec<BoxRange> = small.iter().map(|b| b.scaled((v / 0.01f64).sqrt())).collect();
                let f = verify_boxes(&net.points, &boxes).hit_fraction;
                assert!(f >= last);
                last = f;
            }
        }
    }

    #[test]
    fn slab_examples() {
        let b = slab_lower_bound(&[vec![0.5]], 1).unwrap();
        assert_eq!(b.volume(), 0.5);
        let b = slab_lower_bound(&[vec![0.25], vec![0.5], vec![0.75]], 1).unwrap();
        assert_eq!(b.volume(), 0.25);
        assert_eq!(slab_lower_bound(&[], 3).unwrap().volume(), 1.0);
        assert!(slab_lower_bound(&[vec![1.5]], 1).is_err());
    }

    proptest! {
        #[test]
        fn slab_is_empty_and_large(pts in prop::collection::vec(prop::collection::vec(0.0f64..=1.0, 3), 0..60)) {
            let b = slab_lower_bound(&pts, 3).unwrap();
            prop_assert!(b.volume() >= 1.0 / (pts.len() as f64 + 1.0) - 1e-12);
            prop_assert!(pts.iter().all(|p| !b.contains_strictly(p)));
        }
    }
}
