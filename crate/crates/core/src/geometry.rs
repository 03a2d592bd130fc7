//! Points, segments, windows and boxes, together with the sup-norm
//! point/segment computations shared by every analyzer.
//!
//! Tubes around segments are measured in the sup norm throughout: a point
//! `f` is ε-close to the segment `{β + tα : 0 ≤ t ≤ L}` when
//! `min_t ‖β + tα − f‖∞ < ε`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when deciding that two computed points coincide.
pub const MERGE_TOLERANCE: f64 = 1e-9;

/// Allowed deviation of a segment direction from unit Euclidean length.
pub const UNIT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::arg("point must have dimension >= 1"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::arg("point coordinates must be finite"));
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point { coords }
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn euclidean_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Lexicographic comparison of coordinate slices using the IEEE total order.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// The segment `{base + t·direction : 0 ≤ t ≤ length}` with a unit direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
    pub length: f64,
}

impl Segment {
    /// Builds a segment, normalising `direction` to unit Euclidean length.
    pub fn new(base: Vec<f64>, direction: Vec<f64>, length: f64) -> Result<Self> {
        if base.is_empty() || base.len() != direction.len() {
            return Err(Error::arg(format!(
                "segment base has dimension {} but direction has dimension {}",
                base.len(),
                direction.len()
            )));
        }
        if !(length >= 0.0) || !length.is_finite() {
            return Err(Error::arg("segment length must be finite and >= 0"));
        }
        if base.iter().chain(&direction).any(|c| !c.is_finite()) {
            return Err(Error::arg("segment coordinates must be finite"));
        }
        let norm = euclidean_norm(&direction);
        if norm == 0.0 {
            return Err(Error::arg("segment direction must be non-zero"));
        }
        let direction = direction.into_iter().map(|c| c / norm).collect();
        Ok(Segment {
            base,
            direction,
            length,
        })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.base
            .iter()
            .zip(&self.direction)
            .map(|(b, a)| b + t * a)
            .collect()
    }

    pub fn end(&self) -> Vec<f64> {
        self.point_at(self.length)
    }

    pub fn translated(&self, offset: &[f64]) -> Segment {
        Segment {
            base: self.base.iter().zip(offset).map(|(b, c)| b + c).collect(),
            direction: self.direction.clone(),
            length: self.length,
        }
    }

    /// Open interval of parameters `t ∈ ℝ` for which `‖β + tα − p‖∞ < ε`,
    /// or `None` when the whole line stays at distance `≥ ε`.
    pub fn blocked_interval(&self, p: &[f64], eps: f64) -> Option<(f64, f64)> {
        blocked_interval(&self.base, &self.direction, p, eps)
    }

    /// True when some point of the segment is at sup distance `< ε` from `p`.
    pub fn is_eps_close(&self, p: &[f64], eps: f64) -> bool {
        match self.blocked_interval(p, eps) {
            Some((lo, hi)) => lo < self.length && hi > 0.0,
            None => false,
        }
    }
}

pub(crate) fn blocked_interval(
    base: &[f64],
    direction: &[f64],
    p: &[f64],
    eps: f64,
) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for ((b, a), q) in base.iter().zip(direction).zip(p) {
        let d = b - q;
        if *a == 0.0 {
            if d.abs() >= eps {
                return None;
            }
            continue;
        }
        let t1 = (-eps - d) / a;
        let t2 = (eps - d) / a;
        let (l, h) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        lo = lo.max(l);
        hi = hi.min(h);
        if lo >= hi {
            return None;
        }
    }
    Some((lo, hi))
}

/// Axis-aligned half-open region `[lo, hi)` used to truncate infinite point sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Window {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(Error::arg("window bounds must have equal, positive dimension"));
        }
        if lo.iter().chain(&hi).any(|c| !c.is_finite()) {
            return Err(Error::arg("window bounds must be finite"));
        }
        if lo.iter().zip(&hi).any(|(l, h)| !(l < h)) {
            return Err(Error::arg("window requires lo[i] < hi[i] on every axis"));
        }
        Ok(Window { lo, hi })
    }

    /// The cube `[c − r, c + r)^n`.
    pub fn cube(center: &[f64], radius: f64) -> Result<Self> {
        Window::new(
            center.iter().map(|c| c - radius).collect(),
            center.iter().map(|c| c + radius).collect(),
        )
    }

    /// The cube `[−r, r)^n`.
    pub fn centered(dim: usize, radius: f64) -> Result<Self> {
        Window::cube(&vec![0.0; dim], radius)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (l, h))| *l <= *x && *x < *h)
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }

    /// Half of the shortest side.
    pub fn inner_radius(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| 0.5 * (h - l))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn diameter(&self) -> f64 {
        let side: Vec<f64> = self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).collect();
        euclidean_norm(&side)
    }

    pub fn is_subset_of(&self, other: &Window) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((l, h), (ol, oh))| ol <= l && h <= oh)
    }

    /// Iterates over the `2^n` corners.
    pub fn corners(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        let n = self.dim();
        (0..1usize << n).map(move |mask| {
            (0..n)
                .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                .collect()
        })
    }
}

/// A closed axis-aligned box `∏ [a_i, b_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedBox {
    pub intervals: Vec<(f64, f64)>,
}

impl AlignedBox {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::arg("box must have dimension >= 1"));
        }
        if intervals.iter().any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::arg("box requires finite a_i <= b_i"));
        }
        Ok(AlignedBox { intervals })
    }

    pub fn unit_cube(dim: usize) -> Self {
        AlignedBox {
            intervals: vec![(0.0, 1.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn volume(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(&self.intervals)
            .all(|(x, (a, b))| *a <= *x && *x <= *b)
    }

    /// Contains `p` in the interior.
    pub fn contains_strictly(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(&self.intervals)
            .all(|(x, (a, b))| *a < *x && *x < *b)
    }

    pub fn is_inside_unit_cube(&self) -> bool {
        self.intervals.iter().all(|(a, b)| *a >= 0.0 && *b <= 1.0)
    }

    /// Smallest half-open window containing the closed box.
    pub fn enclosing_window(&self) -> Window {
        let lo: Vec<f64> = self.intervals.iter().map(|(a, _)| *a).collect();
        let hi = self
            .intervals
            .iter()
            .map(|(a, b)| {
                let h = b.next_up();
                if h > *a {
                    h
                } else {
                    a.next_up()
                }
            })
            .collect();
        Window { lo, hi }
    }
}

/// Exact `min_{0 ≤ t ≤ L} ‖β + tα − p‖∞`.
///
/// The objective is convex and piecewise linear in `t`, so its minimum over
/// `[0, L]` is attained at an endpoint, at a zero of one of the coordinate
/// terms, or where two terms `|d_i + tα_i|` and `|d_j + tα_j|` cross.
pub fn supnorm_point_segment_distance(p: &Point, s: &Segment) -> Result<f64> {
    if p.dim() != s.dim() {
        return Err(Error::arg(format!(
            "point has dimension {} but segment has dimension {}",
            p.dim(),
            s.dim()
        )));
    }
    Ok(point_segment_distance(p.as_slice(), s))
}

pub(crate) fn point_segment_distance(p: &[f64], s: &Segment) -> f64 {
    let d: Vec<f64> = s.base.iter().zip(p).map(|(b, q)| b - q).collect();
    let a = &s.direction;
    let eval = |t: f64| {
        d.iter()
            .zip(a)
            .map(|(di, ai)| (di + t * ai).abs())
            .fold(0.0, f64::max)
    };
    let mut best = eval(0.0).min(eval(s.length));
    let mut consider = |t: f64| {
        if t > 0.0 && t < s.length {
            best = best.min(eval(t));
        }
    };
    let n = d.len();
    for i in 0..n {
        if a[i] != 0.0 {
            consider(-d[i] / a[i]);
        }
        for j in i + 1..n {
            if a[i] != a[j] {
                consider((d[j] - d[i]) / (a[i] - a[j]));
            }
            if a[i] != -a[j] {
                consider(-(d[i] + d[j]) / (a[i] + a[j]));
            }
        }
    }
    best
}

/// Smallest window containing every point within sup distance `ε` of `s`.
pub fn tube_bounding_window(s: &Segment, eps: f64) -> Result<Window> {
    if !(eps > 0.0) {
        return Err(Error::arg("tube radius must be > 0"));
    }
    Ok(tube_window(&s.base, &s.direction, 0.0, s.length, eps))
}

pub(crate) fn tube_window(base: &[f64], dir: &[f64], t0: f64, t1: f64, eps: f64) -> Window {
    let mut lo = Vec::with_capacity(base.len());
    let mut hi = Vec::with_capacity(base.len());
    for (b, a) in base.iter().zip(dir) {
        let x0 = b + t0 * a;
        let x1 = b + t1 * a;
        lo.push(x0.min(x1) - eps);
        hi.push(x0.max(x1) + eps);
    }
    Window { lo, hi }
}

/// Primitive directions of the stratified probe family.
///
/// Every dimension gets the axis directions first. In the plane these are
/// followed by all rational slopes `p/q` with `|p|, |q| ≤ 8`; in higher
/// dimensions by the normalised `{−1, 0, 1}` vectors with positive leading entry.
pub fn stratified_directions(dim: usize) -> Vec<Vec<f64>> {
    let mut dirs: Vec<Vec<f64>> = (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            e
        })
        .collect();
    if dim == 2 {
        for q in 1..=8i64 {
            for p in -8..=8i64 {
                if p == 0 || gcd(p.unsigned_abs(), q as u64) != 1 {
                    continue;
                }
                let norm = ((p * p + q * q) as f64).sqrt();
                dirs.push(vec![q as f64 / norm, p as f64 / norm]);
            }
        }
    } else if dim > 2 {
        let total = 3usize.pow(dim as u32);
        for code in 0..total {
            let mut v = Vec::with_capacity(dim);
            let mut c = code;
            for _ in 0..dim {
                v.push((c % 3) as f64 - 1.0);
                c /= 3;
            }
            let nonzero = v.iter().filter(|x| **x != 0.0).count();
            let leading = v.iter().find(|x| **x != 0.0).copied();
            if nonzero >= 2 && leading == Some(1.0) {
                let norm = euclidean_norm(&v);
                dirs.push(v.into_iter().map(|x| x / norm).collect());
            }
        }
    }
    dirs
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Deterministic probe segments of a fixed length with base points in `window`.
///
/// The first `⌈count/2⌉` segments form the stratified part: the stratified
/// directions (see [`stratified_directions`]) crossed with a jittered grid of
/// base points, directions cycling fastest. The rest have uniformly random
/// directions on the unit sphere and uniformly random base points. Bases and
/// directions depend only on `(window, count, seed)`, so changing `length`
/// yields nested probe families.
pub fn sample_segments(window: &Window, length: f64, count: usize, seed: u64) -> Result<Vec<Segment>> {
    if count == 0 {
        return Err(Error::arg("segment count must be >= 1"));
    }
    if !(length >= 0.0) || !length.is_finite() {
        return Err(Error::arg("segment length must be finite and >= 0"));
    }
    let dim = window.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = stratified_directions(dim);
    let n_strat = count.div_ceil(2);
    let n_bases = n_strat.div_ceil(dirs.len());
    let per_axis = (n_bases as f64).powf(1.0 / dim as f64).ceil().max(1.0) as usize;

    let mut out = Vec::with_capacity(count);
    'strat: for cell in 0.. {
        let mut base = Vec::with_capacity(dim);
        let mut c = cell;
        for i in 0..dim {
            let idx = c % per_axis;
            c /= per_axis;
            let side = (window.hi[i] - window.lo[i]) / per_axis as f64;
            let jitter: f64 = rng.random();
            base.push(window.lo[i] + (idx as f64 + jitter) * side);
        }
        for d in &dirs {
            if out.len() == n_strat {
                break 'strat;
            }
            out.push(Segment {
                base: base.clone(),
                direction: d.clone(),
                length,
            });
        }
    }
    while out.len() < count {
        let base: Vec<f64> = (0..dim)
            .map(|i| window.lo[i] + rng.random::<f64>() * (window.hi[i] - window.lo[i]))
            .collect();
        let direction = loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let norm = euclidean_norm(&v);
            if norm > 1e-6 {
                break v.into_iter().map(|x| x / norm).collect::<Vec<f64>>();
            }
        };
        out.push(Segment {
            base,
            direction,
            length,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seg(base: &[f64], dir: &[f64], len: f64) -> Segment {
        Segment::new(base.to_vec(), dir.to_vec(), len).unwrap()
    }

    fn scan_distance(p: &[f64], s: &Segment, steps: usize) -> f64 {
        (0..=steps)
            .map(|k| {
                let t = s.length * k as f64 / steps as f64;
                sup_distance(&s.point_at(t), p)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn distance_examples() {
        let s = seg(&[0.0, 0.0], &[1.0, 0.0], 10.0);
        let d0 = supnorm_point_segment_distance(&Point::from(vec![0.0, 0.0]), &s).unwrap();
        assert_eq!(d0, 0.0);
        let d1 = supnorm_point_segment_distance(&Point::from(vec![5.0, 1.0]), &s).unwrap();
        assert!((d1 - 1.0).abs() < 1e-12);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let diag = seg(&[0.0, 0.0], &[h, h], 14.0);
        let p = [1.0, 0.0];
        let d = supnorm_point_segment_distance(&Point::from(p.to_vec()), &diag).unwrap();
        assert!((d - 0.5).abs() < 1e-12, "{d}");
        // brute-force scan around the minimiser t = √2/2
        let scan = scan_distance(&p, &diag, 1_400_000);
        assert!((scan - 0.5).abs() < 1e-5);
    }

    #[test]
    fn distance_dimension_mismatch() {
        let s = seg(&[0.0, 0.0], &[1.0, 0.0], 1.0);
        let err = supnorm_point_segment_distance(&Point::from(vec![0.0, 0.0, 0.0]), &s);
        assert!(matches!(err, Err(Error::Argument(_))));
    }

    #[test]
    fn tube_window_examples() {
        let w = tube_bounding_window(&seg(&[0.0, 0.0], &[1.0, 0.0], 10.0), 0.5).unwrap();
        assert_eq!(w.lo, vec![-0.5, -0.5]);
        assert_eq!(w.hi, vec![10.5, 0.5]);

        let w = tube_bounding_window(&seg(&[2.0, 3.0], &[0.3, 0.4], 0.0), 0.25).unwrap();
        assert_eq!(w.lo, vec![1.75, 2.75]);
        assert_eq!(w.hi, vec![2.25, 3.25]);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let w = tube_bounding_window(&seg(&[0.0, 0.0], &[h, h], 2f64.sqrt()), 0.1).unwrap();
        for i in 0..2 {
            assert!((w.lo[i] + 0.1).abs() < 1e-12);
            assert!((w.hi[i] - 1.1).abs() < 1e-12);
        }
        assert!(tube_bounding_window(&seg(&[0.0], &[1.0], 1.0), 0.0).is_err());
    }

    #[test]
    fn sample_segments_contract() {
        let w = Window::centered(2, 10.0).unwrap();
        let a = sample_segments(&w, 3.0, 1, 42).unwrap();
        let b = sample_segments(&w, 3.0, 1, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].direction, vec![1.0, 0.0]);

        let many = sample_segments(&w, 3.0, 1000, 7).unwrap();
        assert_eq!(many.len(), 1000);
        for s in &many {
            assert!((euclidean_norm(&s.direction) - 1.0).abs() <= UNIT_TOLERANCE);
            assert!(w.contains(&s.base));
        }
        assert!(many.iter().any(|s| s.direction == vec![1.0, 0.0]));
        assert!(sample_segments(&w, 3.0, 0, 7).is_err());

        // lengths do not influence bases or directions
        let longer = sample_segments(&w, 30.0, 1000, 7).unwrap();
        for (s, t) in many.iter().zip(&longer) {
            assert_eq!(s.base, t.base);
            assert_eq!(s.direction, t.direction);
        }
    }

    #[test]
    fn rational_directions_in_plane() {
        let dirs = stratified_directions(2);
        assert_eq!(dirs[0], vec![1.0, 0.0]);
        assert_eq!(dirs[1], vec![0.0, 1.0]);
        let slope = |d: &Vec<f64>| d[1] / d[0];
        assert!(dirs.iter().any(|d| (slope(d) - 3.0 / 8.0).abs() < 1e-12));
        assert!(dirs.iter().any(|d| (slope(d) + 8.0).abs() < 1e-12));
    }

    #[test]
    fn blocked_interval_matches_distance() {
        let s = seg(&[0.0, 0.0], &[1.0, 0.0], 10.0);
        assert!(!s.is_eps_close(&[5.0, 1.0], 1.0));
        assert!(s.is_eps_close(&[5.0, 1.0], 1.0 + 1e-9));
        assert!(s.is_eps_close(&[-0.5, 0.0], 0.6));
        assert!(!s.is_eps_close(&[-0.5, 0.0], 0.5));
    }

    fn arb_segment() -> impl Strategy<Value = Segment> {
        (
            prop::collection::vec(-5.0..5.0f64, 3),
            prop::collection::vec(-1.0..1.0f64, 3),
            0.0..8.0f64,
        )
            .prop_filter("non-zero direction", |(_, d, _)| euclidean_norm(d) > 1e-3)
            .prop_map(|(b, d, l)| Segment::new(b, d, l).unwrap())
    }

    proptest! {
        #[test]
        fn distance_is_translation_invariant(
            s in arb_segment(),
            p in prop::collection::vec(-6.0..6.0f64, 3),
            c in prop::collection::vec(-100.0..100.0f64, 3),
        ) {
            let moved: Vec<f64> = p.iter().zip(&c).map(|(x, y)| x + y).collect();
            let d0 = point_segment_distance(&p, &s);
            let d1 = point_segment_distance(&moved, &s.translated(&c));
            prop_assert!((d0 - d1).abs() < 1e-12 * (1.0 + c.iter().fold(0.0f64, |m, x| m.max(x.abs()))));
        }

        #[test]
        fn distance_bracketed_by_line_and_endpoints(
            s in arb_segment(),
            p in prop::collection::vec(-6.0..6.0f64, 3),
        ) {
            let d = point_segment_distance(&p, &s);
            let line = Segment { base: s.point_at(-1e4), direction: s.direction.clone(), length: 2e4 + s.length };
            let dl = point_segment_distance(&p, &line);
            prop_assert!(dl <= d + 1e-9);
            prop_assert!(d <= sup_distance(&p, &s.base) + 1e-12);
            prop_assert!(d <= sup_distance(&p, &s.end()) + 1e-12);
            // agrees with a fine scan
            let scan = scan_distance(&p, &s, 20_000);
            prop_assert!(d <= scan + 1e-12);
            prop_assert!(scan - d <= s.length / 20_000.0 + 1e-12);
        }

        #[test]
        fn close_iff_distance_below_eps(
            s in arb_segment(),
            p in prop::collection::vec(-6.0..6.0f64, 3),
            eps in 0.01..3.0f64,
        ) {
            let d = point_segment_distance(&p, &s);
            if (d - eps).abs() > 1e-9 {
                prop_assert_eq!(s.is_eps_close(&p, eps), d < eps);
            }
            if d < eps {
                let w = tube_bounding_window(&s, eps).unwrap();
                prop_assert!(w.contains(&p));
            }
        }
    }
}
