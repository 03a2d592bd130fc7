//! Dispersion, discrepancy and super-uniform dispersion of finite point sets
//! in the unit cube.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::SequenceSpec;

/// Largest number of critical boxes the exact discrepancy may inspect.
pub const CRITICAL_BOX_LIMIT: f64 = 1e7;

/// Maximum number of shifts `m` sampled by [`sud_estimate`].
pub const MAX_SHIFT_SAMPLES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub value: f64,
    pub exact: bool,
    pub grid_resolution: Option<f64>,
}

fn check_unit_cube(points: &[Vec<f64>]) -> Result<usize> {
    let d = points.first().map(Vec::len).ok_or_else(|| Error::arg("point set is empty"))?;
    if d == 0 || points.iter().any(|p| p.len() != d) {
        return Err(Error::arg("points must share one positive dimension"));
    }
    if points.iter().flatten().any(|x| !(0.0..=1.0).contains(x)) {
        return Err(Error::arg("points must lie in the unit cube"));
    }
    Ok(d)
}

/// Default grid spacing for dispersion in dimension `d ≥ 2` (about `2^18` nodes).
pub fn default_resolution(d: usize) -> f64 {
    (-((18 / d).max(2) as f64)).exp2()
}

/// Dispersion `sup_{x ∈ [0,1]^d} min_i ‖x − u_i‖∞`.
///
/// Exact in dimension 1. In higher dimensions the supremum is taken over the
/// nodes of a grid of spacing [`default_resolution`], which undershoots the
/// true value by at most half the spacing.
pub fn dispersion(points: &[Vec<f64>]) -> Result<DispersionReport> {
    let d = check_unit_cube(points)?;
    if d == 1 {
        let mut u: Vec<f64> = points.iter().map(|p| p[0]).collect();
        return Ok(DispersionReport {
            n: points.len(),
            value: dispersion_1d(&mut u),
            exact: true,
            grid_resolution: None,
        });
    }
    dispersion_on_grid(points, default_resolution(d))
}

/// Grid-node dispersion with spacing `h` (rounded down to `1/⌈1/h⌉`).
pub fn dispersion_on_grid(points: &[Vec<f64>], h: f64) -> Result<DispersionReport> {
    let d = check_unit_cube(points)?;
    if !(h > 0.0 && h <= 1.0) {
        return Err(Error::arg("grid resolution must lie in (0, 1]"));
    }
    let steps = (1.0 / h).ceil() as usize;
    let nodes = (steps as f64 + 1.0).powi(d as i32);
    if nodes > 1e8 {
        return Err(Error::resource(format!("dispersion grid would have {nodes:.3e} nodes")));
    }
    let h = 1.0 / steps as f64;
    let buckets = Buckets::new(points, d);
    let total = (steps + 1).pow(d as u32);
    let value = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let x: Vec<f64> = (0..d)
                .map(|_| {
                    let i = code % (steps + 1);
                    code /= steps + 1;
                    i as f64 * h
                })
                .collect();
            buckets.nearest_sup(&x)
        })
        .reduce(|| 0.0, f64::max);
    Ok(DispersionReport {
        n: points.len(),
        value,
        exact: false,
        grid_resolution: Some(h),
    })
}

/// Exact one-dimensional dispersion; sorts `u` in place.
pub fn dispersion_1d(u: &mut [f64]) -> f64 {
    u.sort_unstable_by(f64::total_cmp);
    let mut best = u[0].max(1.0 - u[u.len() - 1]);
    for w in u.windows(2) {
        best = best.max(0.5 * (w[1] - w[0]));
    }
    best
}

/// Uniform cell index over `[0,1]^d` for sup-norm nearest-point queries.
struct Buckets<'a> {
    points: &'a [Vec<f64>],
    d: usize,
    per_axis: usize,
    cells: Vec<Vec<usize>>,
}

impl<'a> Buckets<'a> {
    fn new(points: &'a [Vec<f64>], d: usize) -> Self {
        let per_axis = ((points.len() as f64).powf(1.0 / d as f64).ceil() as usize).clamp(1, 1 << 10);
        let mut cells = vec![Vec::new(); per_axis.pow(d as u32)];
        for (i, p) in points.iter().enumerate() {
            cells[Self::cell_of(p, per_axis)].push(i);
        }
        Buckets {
            points,
            d,
            per_axis,
            cells,
        }
    }

    fn coord(x: f64, per_axis: usize) -> usize {
        ((x * per_axis as f64) as usize).min(per_axis - 1)
    }

    fn cell_of(p: &[f64], per_axis: usize) -> usize {
        p.iter().rev().fold(0, |acc, x| acc * per_axis + Self::coord(*x, per_axis))
    }

    /// Sup-norm distance from `x` to the nearest point, by growing rings of cells.
    fn nearest_sup(&self, x: &[f64]) -> f64 {
        let side = 1.0 / self.per_axis as f64;
        let home: Vec<i64> = x.iter().map(|c| Self::coord(*c, self.per_axis) as i64).collect();
        let mut best = f64::INFINITY;
        for ring in 0..=self.per_axis as i64 {
            // every point outside the rings searched so far is at least this far away
            if best <= (ring as f64 - 1.0).max(0.0) * side {
                break;
            }
            self.visit_ring(&home, ring, &mut |idx| {
                for &i in &self.cells[idx] {
                    let dist = self.points[i]
                        .iter()
                        .zip(x)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    best = best.min(dist);
                }
            });
        }
        best
    }

    fn visit_ring(&self, home: &[i64], ring: i64, f: &mut dyn FnMut(usize)) {
        let span = 2 * ring as usize + 1;
        let total = span.pow(self.d as u32);
        'cells: for code in 0..total {
            let mut c = code;
            let mut on_shell = false;
            let mut idx = 0usize;
            let mut stride = 1usize;
            for axis in 0..self.d {
                let off = (c % span) as i64 - ring;
                c /= span;
                on_shell |= off.abs() == ring;
                let k = home[axis] + off;
                if k < 0 || k >= self.per_axis as i64 {
                    continue 'cells;
                }
                idx += k as usize * stride;
                stride *= self.per_axis;
            }
            if on_shell {
                f(idx);
            }
        }
    }
}

/// Extreme discrepancy `sup_J |#(J ∩ U)/N − vol(J)|` over closed aligned
/// boxes `J ⊆ [0,1]^d`.
///
/// Dimension 1 uses the closed form `1/N + max(i/N − u_(i)) − min(i/N − u_(i))`.
/// Dimension 2 enumerates every critical box whose edges pass through point
/// coordinates or the cube boundary, counting points with 2-D prefix sums.
pub fn discrepancy(points: &[Vec<f64>]) -> Result<f64> {
    let d = check_unit_cube(points)?;
    match d {
        1 => {
            let mut u: Vec<f64> = points.iter().map(|p| p[0]).collect();
            Ok(discrepancy_1d(&mut u))
        }
        2 => discrepancy_2d(points),
        _ => Err(Error::arg("exact discrepancy is available in dimensions 1 and 2 only")),
    }
}

/// Exact one-dimensional extreme discrepancy; sorts `u` in place.
pub fn discrepancy_1d(u: &mut [f64]) -> f64 {
    u.sort_unstable_by(f64::total_cmp);
    let n = u.len() as f64;
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    for (i, x) in u.iter().enumerate() {
        let t = (i + 1) as f64 / n - x;
        hi = hi.max(t);
        lo = lo.min(t);
    }
    1.0 / n + hi - lo
}

fn discrepancy_2d(points: &[Vec<f64>]) -> Result<f64> {
    let n = points.len();
    let axis_values = |axis: usize| {
        let mut v: Vec<f64> = points.iter().map(|p| p[axis]).chain([0.0, 1.0]).collect();
        v.sort_unstable_by(f64::total_cmp);
        v.dedup();
        v
    };
    let xs = axis_values(0);
    let ys = axis_values(1);
    let pairs = |k: usize| k as f64 * (k as f64 + 1.0) / 2.0;
    let boxes = pairs(xs.len()) * pairs(ys.len());
    if boxes > CRITICAL_BOX_LIMIT {
        return Err(Error::resource(format!(
            "exact discrepancy needs {boxes:.3e} critical boxes (limit {CRITICAL_BOX_LIMIT:.0e})"
        )));
    }
    let rank = |v: &[f64], x: f64| v.binary_search_by(|a| a.total_cmp(&x)).expect("coordinate is present");
    let (kx, ky) = (xs.len(), ys.len());
    // count[i][j] = #{points with x-rank i and y-rank j}
    let mut count = vec![0u32; kx * ky];
    for p in points {
        count[rank(&xs, p[0]) * ky + rank(&ys, p[1])] += 1;
    }
    // prefix[i][j] = #{x-rank < i, y-rank < j}
    let stride = ky + 1;
    let mut prefix = vec![0i64; (kx + 1) * stride];
    for i in 0..kx {
        for j in 0..ky {
            prefix[(i + 1) * stride + j + 1] =
                count[i * ky + j] as i64 + prefix[i * stride + j + 1] + prefix[(i + 1) * stride + j]
                    - prefix[i * stride + j];
        }
    }
    // points with rank in [a, b) × [c, e)
    let rect = |a: usize, b: usize, c: usize, e: usize| {
        if a >= b || c >= e {
            return 0;
        }
        prefix[b * stride + e] - prefix[a * stride + e] - prefix[b * stride + c] + prefix[a * stride + c]
    };
    let nf = n as f64;
    let best = (0..kx)
        .into_par_iter()
        .map(|a| {
            let mut best = 0.0f64;
            for b in a..kx {
                let w = xs[b] - xs[a];
                for c in 0..ky {
                    for e in c..ky {
                        let vol = w * (ys[e] - ys[c]);
                        let closed = rect(a, b + 1, c, e + 1) as f64;
                        let open = rect(a + 1, b, c + 1, e) as f64;
                        best = best.max(closed / nf - vol).max(vol - open / nf);
                    }
                }
            }
            best
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SudEstimate {
    #[serde(rename = "N")]
    pub n: usize,
    pub m_samples: Vec<u64>,
    pub xi_samples: usize,
    pub value: f64,
}

/// Shifts `m` inspected for a given `m_max`: all of them up to
/// [`MAX_SHIFT_SAMPLES`] values, otherwise that many evenly spaced ones.
pub fn shift_samples(m_max: u64) -> Vec<u64> {
    if m_max <= MAX_SHIFT_SAMPLES as u64 {
        return (0..=m_max).collect();
    }
    let last = (MAX_SHIFT_SAMPLES - 1) as f64;
    let mut out: Vec<u64> = (0..MAX_SHIFT_SAMPLES)
        .map(|i| (i as f64 * m_max as f64 / last).round() as u64)
        .collect();
    out.dedup();
    out
}

/// Radical inverse of `k` in base `b`.
fn radical_inverse(mut k: u64, b: u64) -> f64 {
    let mut inv = 1.0 / b as f64;
    let mut x = 0.0;
    while k > 0 {
        x += (k % b) as f64 * inv;
        k /= b;
        inv /= b as f64;
    }
    x
}

const HALTON_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// The twist vectors `ξ ∈ [0,1)^d`: even positions walk the Halton sequence
/// (starting at `ξ = 0`), odd positions are seeded uniform draws. Any prefix
/// of the list is the list for a smaller count.
pub fn xi_samples(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|j| {
            if j % 2 == 0 {
                (0..d)
                    .map(|i| radical_inverse((j / 2) as u64, HALTON_BASES[i % HALTON_BASES.len()]))
                    .collect()
            } else {
                (0..d).map(|_| rng.random::<f64>()).collect()
            }
        })
        .collect()
}

/// Lower estimate of `δ̂(N) = sup_{m, ξ} δ({v_{k+m} − ξ(k+m)}_{0 ≤ k < N})`.
///
/// Sequence indices start at the sequence's first index. The maximum runs
/// over [`shift_samples`]`(m_max)` and [`xi_samples`]`(d, xi_count, seed)`.
pub fn sud_estimate(seq: &SequenceSpec, n: usize, m_max: u64, xi_count: usize, seed: u64) -> Result<SudEstimate> {
    let shifts = shift_samples(m_max);
    let xis = xi_samples(seq.dim(), xi_count, seed);
    sud_estimate_with(seq, n, &shifts, &xis).map(|value| SudEstimate {
        n,
        m_samples: shifts,
        xi_samples: xi_count,
        value,
    })
}

/// [`sud_estimate`] over explicit shift and twist samples.
pub fn sud_estimate_with(seq: &SequenceSpec, n: usize, shifts: &[u64], xis: &[Vec<f64>]) -> Result<f64> {
    seq.validate()?;
    if n == 0 || shifts.is_empty() || xis.is_empty() {
        return Err(Error::arg("need N >= 1 and at least one shift and one twist"));
    }
    let d = seq.dim();
    let first = seq.first_index();
    let top = *shifts.iter().max().expect("non-empty") as usize;
    let terms: Vec<Vec<f64>> = (0..n + top)
        .map(|j| seq.eval(first + j as i64))
        .collect::<Result<_>>()?;
    let pairs: Vec<(u64, &Vec<f64>)> = shifts.iter().flat_map(|m| xis.iter().map(move |x| (*m, x))).collect();
    pairs
        .par_iter()
        .map(|(m, xi)| {
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    let j = k + *m as usize;
                    let idx = (first + j as i64) as f64;
                    (0..d)
                        .map(|i| {
                            let t = terms[j][i] - xi[i] * idx;
                            let f = t - t.floor();
                            // t − ⌊t⌋ can round up to 1 for tiny negative t
                            if f >= 1.0 {
                                0.0
                            } else {
                                f
                            }
                        })
                        .collect()
                })
                .collect();
            if d == 1 {
                let mut u: Vec<f64> = pts.into_iter().map(|p| p[0]).collect();
                Ok(dispersion_1d(&mut u))
            } else {
                dispersion(&pts).map(|r| r.value)
            }
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::PHI;
    use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest};

    fn pts1(u: &[f64]) -> Vec<Vec<f64>> {
        u.iter().map(|x| vec![*x]).collect()
    }

    /// Brute-force extreme discrepancy: every closed and every open box with
    /// edges in the candidate coordinate sets.
    fn brute_discrepancy(points: &[Vec<f64>]) -> f64 {
        let d = points[0].len();
        let cands: Vec<Vec<f64>> = (0..d)
            .map(|a| points.iter().map(|p| p[a]).chain([0.0, 1.0]).collect())
            .collect();
        let n = points.len() as f64;
        let mut best = 0.0f64;
        let mut rec = |ivs: &Vec<(f64, f64)>| {
            let vol: f64 = ivs.iter().map(|(a, b)| b - a).product();
            let closed = points
                .iter()
                .filter(|p| p.iter().zip(ivs).all(|(x, (a, b))| a <= x && x <= b))
                .count() as f64;
            let open = points
                .iter()
                .filter(|p| p.iter().zip(ivs).all(|(x, (a, b))| a < x && x < b))
                .count() as f64;
            best = best.max(closed / n - vol).max(vol - open / n);
        };
        let mut all = vec![vec![]];
        for c in &cands {
            let mut next = Vec::new();
            for prefix in &all {
                for a in c {
                    for b in c {
                        if a <= b {
                            let mut q: Vec<(f64, f64)> = prefix.clone();
                            q.push((*a, *b));
                            next.push(q);
                        }
                    }
                }
            }
            all = next;
        }
        for ivs in &all {
            rec(ivs);
        }
        best
    }

    fn brute_dispersion_1d(u: &[f64]) -> f64 {
        (0..=100_000)
            .map(|i| {
                let x = i as f64 / 100_000.0;
                u.iter().map(|p| (p - x).abs()).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn dispersion_examples() {
        assert_eq!(dispersion(&pts1(&[0.5])).unwrap().value, 0.5);
        let r = dispersion(&pts1(&[0.0, 0.25, 0.5, 0.75, 1.0])).unwrap();
        assert_eq!(r.value, 0.125);
        assert!(r.exact && r.grid_resolution.is_none());
        let r = dispersion(&[vec![0.5, 0.5]]).unwrap();
        let h = r.grid_resolution.unwrap();
        assert!(!r.exact);
        assert!(r.value <= 0.5 && r.value + h / 2.0 >= 0.5);
        assert!(matches!(dispersion(&[]), Err(Error::Argument(_))));
        assert!(matches!(dispersion(&pts1(&[1.5])), Err(Error::Argument(_))));
    }

    #[test]
    fn grid_dispersion_matches_scan() {
        let pts = vec![vec![0.1, 0.2], vec![0.7, 0.9], vec![0.4, 0.45], vec![0.95, 0.05]];
        let r = dispersion_on_grid(&pts, 1.0 / 64.0).unwrap();
        let mut brute = 0.0f64;
        for i in 0..=64 {
            for j in 0..=64 {
                let x = [i as f64 / 64.0, j as f64 / 64.0];
                let near = pts
                    .iter()
                    .map(|p| (p[0] - x[0]).abs().max((p[1] - x[1]).abs()))
                    .fold(f64::INFINITY, f64::min);
                brute = brute.max(near);
            }
        }
        assert!((r.value - brute).abs() < 1e-15);
    }

    #[test]
    fn discrepancy_examples() {
        assert_eq!(discrepancy(&pts1(&[0.5])).unwrap(), 1.0);
        assert!((discrepancy(&pts1(&[0.25, 0.75])).unwrap() - 0.5).abs() < 1e-15);
        let u = [0.125, 0.375, 0.625, 0.875];
        assert!((discrepancy(&pts1(&u)).unwrap() - 0.25).abs() < 1e-15);
        for pts in [pts1(&[0.5]), pts1(&[0.25, 0.75]), pts1(&u)] {
            assert!((discrepancy(&pts).unwrap() - brute_discrepancy(&pts)).abs() < 1e-12);
        }
        assert!(matches!(discrepancy(&[vec![0.1, 0.2, 0.3]]), Err(Error::Argument(_))));
    }

    #[test]
    fn discrepancy_2d_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 9] {
            let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
            let fast = discrepancy(&pts).unwrap();
            let slow = brute_discrepancy(&pts);
            assert!((fast - slow).abs() < 1e-12, "n={n}: {fast} vs {slow}");
        }
        // a point on the boundary and a repeated coordinate
        let pts = vec![vec![0.0, 0.5], vec![0.5, 0.5], vec![0.5, 1.0]];
        assert!((discrepancy(&pts).unwrap() - brute_discrepancy(&pts)).abs() < 1e-12);
    }

    #[test]
    fn boundary_gap_can_exceed_half_discrepancy() {
        // the sup over x ∈ [0,1] reaches 0 at distance 0.9, while every box
        // deviates by at most 1
        let pts = pts1(&[0.9]);
        assert!((dispersion(&pts).unwrap().value - 0.9).abs() < 1e-15);
        assert_eq!(discrepancy(&pts).unwrap(), 1.0);
    }

    #[test]
    fn discrepancy_resource_limit() {
        let pts: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64 / 200.0, (i * 7 % 200) as f64 / 200.0]).collect();
        assert!(matches!(discrepancy(&pts), Err(Error::Resource(_))));
    }

    #[test]
    fn sud_of_constant_sequence() {
        // v_k = 0·k² = 0 and ξ = 0 put every point at 0, which is at distance 1 from x = 1
        let zero = SequenceSpec::Quadratic { alpha: 0.0 };
        let v = sud_estimate_with(&zero, 10, &[0, 3], &[vec![0.0]]).unwrap();
        assert_eq!(v, 1.0);
        // ξ = 1/2 alternates the points between 0 and 1/2
        let v = sud_estimate_with(&zero, 10, &[0], &[vec![0.5]]).unwrap();
        assert!(v <= 0.5 + 1e-12);
    }

    #[test]
    fn sud_golden_decreases() {
        let g = SequenceSpec::Golden;
        let small = sud_estimate(&g, 1 << 6, 64, 32, 1).unwrap();
        let large = sud_estimate(&g, 1 << 10, 64, 32, 1).unwrap();
        assert!(large.value < small.value, "{} vs {}", large.value, small.value);
        assert_eq!(small.m_samples.len(), 65);
    }

    #[test]
    fn shift_and_xi_sampling() {
        assert_eq!(shift_samples(3), vec![0, 1, 2, 3]);
        assert_eq!(shift_samples(64).len(), 65);
        let s = shift_samples(1000);
        assert_eq!(s.len(), 64);
        assert_eq!((s[0], s[63]), (0, 1000));
        let a = xi_samples(1, 10, 5);
        let b = xi_samples(1, 20, 5);
        assert_eq!(a[..], b[..10]);
        assert_eq!(a[0], vec![0.0]);
        assert_eq!(a[2], vec![0.5]);
    }

    #[test]
    fn sud_monotone_in_samples() {
        let q = SequenceSpec::Quadratic { alpha: PHI };
        let mut last = 0.0;
        for count in [1, 4, 16, 64] {
            let v = sud_estimate(&q, 200, 10, count, 9).unwrap().value;
            assert!(v >= last);
            last = v;
        }
        let small = sud_estimate(&q, 200, 5, 16, 9).unwrap().value;
        let large = sud_estimate(&q, 200, 20, 16, 9).unwrap().value;
        assert!(large >= small);
    }

    proptest! {
        #[test]
        fn dispersion_1d_exact_and_bounded(u in prop::collection::vec(0.0f64..=1.0, 1..40)) {
            let pts = pts1(&u);
            let r = dispersion(&pts).unwrap();
            let n = u.len() as f64;
            prop_assert!(r.value >= 1.0 / (2.0 * (n + 1.0)) - 1e-12);
            prop_assert!(r.value <= discrepancy(&pts).unwrap() + 1e-12);
            prop_assert!((r.value - brute_dispersion_1d(&u)).abs() <= 1e-5);
        }

        #[test]
        fn dispersion_at_most_half_discrepancy_without_boundary_gaps(
            u in prop::collection::vec(0.0f64..=1.0, 0..40),
        ) {
            let mut u = u;
            u.extend([0.0, 1.0]);
            let pts = pts1(&u);
            let delta = dispersion(&pts).unwrap().value;
            prop_assert!(delta <= discrepancy(&pts).unwrap() / 2.0 + 1e-12);
        }

        #[test]
        fn dispersion_ignores_order(mut u in prop::collection::vec(0.0f64..=1.0, 1..40)) {
            let a = dispersion(&pts1(&u)).unwrap().value;
            u.reverse();
            prop_assert_eq!(a, dispersion(&pts1(&u)).unwrap().value);
        }

        #[test]
        fn discrepancy_1d_closed_form(u in prop::collection::vec(0.0f64..=1.0, 1..12)) {
            let pts = pts1(&u);
            prop_assert!((discrepancy(&pts).unwrap() - brute_discrepancy(&pts)).abs() < 1e-12);
        }
    }
}
