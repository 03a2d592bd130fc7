//! Visibility of point sets: how long a segment can avoid the sup-norm
//! ε-neighbourhood of every point.

use std::sync::atomic::{AtomicBool, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{PointSet, PointSetSpec};
use crate::geometry::{blocked_interval, euclidean_norm, sample_segments, tube_window, Segment, Window};

/// Number of halvings `L_max·2^{−j}`, `0 ≤ j ≤ VISIBILITY_LEVELS`, tried by
/// [`estimate_visibility`].
pub const VISIBILITY_LEVELS: u32 = 40;

/// Longest piece of a probe examined per enumeration query.
const MAX_CHUNK: f64 = 32.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisibilityReport {
    #[serde(rename = "epsilon")]
    pub eps: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub segments_tested: usize,
    pub hit_fraction: f64,
    pub worst_segment: Option<Segment>,
}

/// Where a probe ray first comes ε-close to the set.
#[derive(Debug, Clone, Copy, PartialEq)]
struct FirstHit {
    /// `inf{t ≥ 0 : ‖β + tα − f‖∞ < ε for some f}`, or `+∞` beyond the horizon.
    t: f64,
    /// The infimum is attained at `t = 0`.
    at_start: bool,
}

impl FirstHit {
    const NEVER: FirstHit = FirstHit {
        t: f64::INFINITY,
        at_start: false,
    };

    fn hits(&self, length: f64) -> bool {
        if length > 0.0 {
            self.t < length
        } else {
            self.at_start
        }
    }
}

/// Walks the ray `β + tα`, `0 ≤ t ≤ horizon`, in growing chunks until some
/// point blocks it.
fn first_hit(set: &PointSet, base: &[f64], dir: &[f64], eps: f64, horizon: f64) -> Result<FirstHit> {
    let mut t0 = 0.0;
    let mut chunk = (4.0 * eps).clamp(0.25, 1.0);
    loop {
        let t1 = (t0 + chunk).min(horizon);
        let window = tube_window(base, dir, t0, t1, eps);
        let mut best = FirstHit::NEVER;
        set.for_each(&window, |p| {
            if let Some((lo, hi)) = blocked_interval(base, dir, p, eps) {
                // blocked on the open interval (lo, hi); only the part meeting [t0, t1] matters
                if lo < t1 && hi > t0 && hi > 0.0 {
                    let start = lo.max(0.0);
                    if start < best.t || (start == best.t && lo < 0.0) {
                        best = FirstHit {
                            t: start,
                            at_start: lo < 0.0,
                        };
                    }
                }
            }
        })?;
        if best.t.is_finite() {
            return Ok(best);
        }
        if t1 >= horizon {
            return Ok(FirstHit::NEVER);
        }
        t0 = t1;
        chunk = (2.0 * chunk).min(MAX_CHUNK);
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::arg("epsilon must be a positive finite number"));
    }
    Ok(())
}

/// Fraction of `count` seeded probe segments of length `length` (bases in
/// `window`) that come sup-norm ε-close to the set.
///
/// The witness is the missing probe that stays clear the longest (lowest
/// index among ties).
pub fn check_visibility(
    spec: &PointSetSpec,
    eps: f64,
    length: f64,
    count: usize,
    window: &Window,
    seed: u64,
) -> Result<VisibilityReport> {
    check_eps(eps)?;
    let set = spec.compile()?;
    let probes = sample_segments(window, length, count, seed)?;
    let hits: Vec<FirstHit> = probes
        .par_iter()
        .map(|s| first_hit(&set, &s.base, &s.direction, eps, length))
        .collect::<Result<_>>()?;
    let mut worst: Option<(usize, f64)> = None;
    let mut n_hit = 0usize;
    for (i, h) in hits.iter().enumerate() {
        if h.hits(length) {
            n_hit += 1;
        } else if worst.is_none_or(|(_, t)| h.t > t) {
            worst = Some((i, h.t));
        }
    }
    Ok(VisibilityReport {
        eps,
        length,
        segments_tested: probes.len(),
        hit_fraction: n_hit as f64 / probes.len() as f64,
        worst_segment: worst.map(|(i, _)| probes[i].clone()),
    })
}

/// Smallest `L ∈ {L_max·2^{−j} : 0 ≤ j ≤ VISIBILITY_LEVELS}` at which every
/// probe of [`check_visibility`] hits, or `+∞` when probes of length `L_max`
/// already miss.
///
/// Probes share bases and directions across lengths, so one walk of length
/// `L_max` per probe determines the outcome at every grid length.
pub fn estimate_visibility(
    spec: &PointSetSpec,
    eps: f64,
    l_max: f64,
    count: usize,
    window: &Window,
    seed: u64,
) -> Result<f64> {
    check_eps(eps)?;
    if !(l_max > 0.0) || !l_max.is_finite() {
        return Err(Error::arg("L_max must be a positive finite number"));
    }
    let set = spec.compile()?;
    let probes = sample_segments(window, l_max, count, seed)?;
    let missed = AtomicBool::new(false);
    let hits: Vec<FirstHit> = probes
        .par_iter()
        .map(|s| {
            if missed.load(Ordering::Relaxed) {
                return Ok(FirstHit::NEVER);
            }
            let h = first_hit(&set, &s.base, &s.direction, eps, l_max)?;
            if !h.hits(l_max) {
                missed.store(true, Ordering::Relaxed);
            }
            Ok(h)
        })
        .collect::<Result<_>>()?;
    if missed.load(Ordering::Relaxed) {
        return Ok(f64::INFINITY);
    }
    let mut best = l_max;
    for j in 1..=VISIBILITY_LEVELS {
        let l = l_max * (-(j as f64)).exp2();
        if hits.iter().all(|h| h.hits(l)) {
            best = l;
        } else {
            break;
        }
    }
    Ok(best)
}

/// How the chord of a line through a window splits into ε-blocked and free parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinePartition {
    /// Unit direction of the line.
    pub direction: Vec<f64>,
    /// Point of the line at parameter `t = 0`.
    pub origin: Vec<f64>,
    /// Parameter range `[t_start, t_end]` of the chord inside the window.
    pub chord: (f64, f64),
    /// Total length of the union of blocked open intervals, clipped to the chord.
    pub blocked_length: f64,
    /// Longest free sub-interval of the chord.
    pub longest_free: (f64, f64),
}

impl LinePartition {
    pub fn extent(&self) -> f64 {
        self.chord.1 - self.chord.0
    }

    pub fn free_length(&self) -> f64 {
        self.longest_free.1 - self.longest_free.0
    }

    /// The longest free piece as a segment.
    pub fn free_segment(&self) -> Segment {
        let base: Vec<f64> = self
            .origin
            .iter()
            .zip(&self.direction)
            .map(|(o, a)| o + self.longest_free.0 * a)
            .collect();
        Segment {
            base,
            direction: self.direction.clone(),
            length: self.free_length(),
        }
    }
}

/// Parameter interval of `{origin + t·dir} ∩ window` (closed hull), if non-empty.
fn chord(origin: &[f64], dir: &[f64], window: &Window) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..origin.len() {
        if dir[i].abs() < 1e-15 {
            if origin[i] < window.lo[i] || origin[i] >= window.hi[i] {
                return None;
            }
            continue;
        }
        let a = (window.lo[i] - origin[i]) / dir[i];
        let b = (window.hi[i] - origin[i]) / dir[i];
        lo = lo.max(a.min(b));
        hi = hi.min(a.max(b));
    }
    (lo < hi).then_some((lo, hi))
}

/// Blocked and free parts of the line `origin + t·dir` inside `window`.
pub fn line_partition(
    set: &PointSet,
    eps: f64,
    origin: &[f64],
    dir: &[f64],
    window: &Window,
) -> Result<Option<LinePartition>> {
    check_eps(eps)?;
    if origin.len() != set.dim() || dir.len() != set.dim() {
        return Err(Error::arg("line and point set dimensions differ"));
    }
    let norm = euclidean_norm(dir);
    if !(norm > 0.0) {
        return Err(Error::arg("line direction must be non-zero"));
    }
    let dir: Vec<f64> = dir.iter().map(|a| a / norm).collect();
    let Some((t0, t1)) = chord(origin, &dir, window) else {
        return Ok(None);
    };
    let mut blocked: Vec<(f64, f64)> = Vec::new();
    set.for_each(&tube_window(origin, &dir, t0, t1, eps), |p| {
        if let Some((lo, hi)) = blocked_interval(origin, &dir, p, eps) {
            let (lo, hi) = (lo.max(t0), hi.min(t1));
            if lo < hi {
                blocked.push((lo, hi));
            }
        }
    })?;
    blocked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut covered = 0.0;
    let mut cursor = t0;
    let mut best = (t0, t0);
    for (lo, hi) in blocked {
        if lo > cursor {
            if lo - cursor > best.1 - best.0 {
                best = (cursor, lo);
            }
            covered += hi - lo;
            cursor = hi;
        } else if hi > cursor {
            covered += hi - cursor;
            cursor = hi;
        }
    }
    if t1 - cursor > best.1 - best.0 {
        best = (cursor, t1);
    }
    Ok(Some(LinePartition {
        direction: dir,
        origin: origin.to_vec(),
        chord: (t0, t1),
        blocked_length: covered,
        longest_free: best,
    }))
}

/// Orthonormal basis of the complement of the unit vector `u`.
fn complement_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let n = u.len();
    let mut basis: Vec<Vec<f64>> = vec![u.to_vec()];
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        for b in &basis {
            let dot: f64 = b.iter().zip(&v).map(|(x, y)| x * y).sum();
            for (vj, bj) in v.iter_mut().zip(b) {
                *vj -= dot * bj;
            }
        }
        let norm = euclidean_norm(&v);
        if norm > 1e-8 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Longest segment inside `window` that avoids the ε-neighbourhood of the set,
/// over every direction in `directions` and a grid of parallel lines.
///
/// For each direction the window's projection onto the orthogonal complement
/// is cut into `offsets_per_direction` equal cells per complement axis and a
/// line is laid through each cell centre.
pub fn find_empty_tube(
    spec: &PointSetSpec,
    eps: f64,
    window: &Window,
    directions: &[Vec<f64>],
    offsets_per_direction: usize,
) -> Result<(Segment, f64)> {
    check_eps(eps)?;
    if directions.is_empty() || offsets_per_direction == 0 {
        return Err(Error::arg("need at least one direction and one offset"));
    }
    let set = spec.compile()?;
    let n = set.dim();
    let center = window.center();
    let mut jobs: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    for d in directions {
        let norm = euclidean_norm(d);
        if d.len() != n || !(norm > 0.0) {
            return Err(Error::arg("directions must be non-zero vectors of the set's dimension"));
        }
        let u: Vec<f64> = d.iter().map(|x| x / norm).collect();
        let comp = complement_basis(&u);
        let ranges: Vec<(f64, f64)> = comp
            .iter()
            .map(|b| {
                window.corners().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
                    let s: f64 = c.iter().zip(&center).zip(b).map(|((x, o), w)| (x - o) * w).sum();
                    (lo.min(s), hi.max(s))
                })
            })
            .collect();
        let k = offsets_per_direction;
        let total = k.pow(comp.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut origin = center.clone();
            for (b, (lo, hi)) in comp.iter().zip(&ranges) {
                let j = c % k;
                c /= k;
                let s = lo + (j as f64 + 0.5) * (hi - lo) / k as f64;
                for (o, w) in origin.iter_mut().zip(b) {
                    *o += s * w;
                }
            }
            jobs.push((origin, u.clone()));
        }
    }
    let parts: Vec<Option<LinePartition>> = jobs
        .par_iter()
        .map(|(o, u)| line_partition(&set, eps, o, u, window))
        .collect::<Result<_>>()?;
    let best = parts
        .into_iter()
        .flatten()
        .fold(None::<LinePartition>, |acc, p| match acc {
            Some(a) if a.free_length() >= p.free_length() => Some(a),
            _ => Some(p),
        })
        .ok_or_else(|| Error::arg("no probe line meets the window"))?;
    let len = best.free_length();
    Ok((best.free_segment(), len))
}
