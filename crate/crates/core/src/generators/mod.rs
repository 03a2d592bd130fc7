//! Explicit point sets: Peres-type forests, grid unions, the Simmons–Solomon
//! set `D₂` and cut-and-project sets, enumerated inside finite windows.

mod d2;
mod grid;
mod sequence;

use std::ops::ControlFlow;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use d2::has_mirrored_digits;
pub use grid::{Grid, ENUMERATION_LIMIT};
pub use sequence::{tsokanos, tsokanos_level, SequenceSpec, PHI};

use crate::error::{Error, Result};
use crate::geometry::{lex_cmp, sup_distance, Point, Window, MERGE_TOLERANCE};
use grid::{identity, GridEnumerator};

/// Coefficients of the uniformly discrete three-grid forest.
pub mod three_grid {
    /// `α = √2`
    pub const ALPHA: f64 = std::f64::consts::SQRT_2;
    /// `β = 3 − √2 + √3 − √6`
    pub const BETA: f64 = 3.0 - std::f64::consts::SQRT_2 + 1.732_050_807_568_877_2 - 2.449_489_742_783_178;
    /// `γ = √3`
    pub const GAMMA: f64 = 1.732_050_807_568_877_2;
    /// `δ = −3 + √6`
    pub const DELTA: f64 = -3.0 + 2.449_489_742_783_178;

    /// Default translation of the second grid: `(1/π, 1/e)`.
    pub const X: [f64; 2] = [std::f64::consts::FRAC_1_PI, 0.367_879_441_171_442_33];
    /// Default translation of the third grid: `(γ₀, ln 2)` with `γ₀` the
    /// Euler–Mascheroni constant.
    pub const Y: [f64; 2] = [0.577_215_664_901_532_9, std::f64::consts::LN_2];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params")]
pub enum PointSetSpec {
    /// `F₁ ∪ R(F₁)` with `F₁ = ℤ² ∪ [[1,0],[φ,1]]·ℤ²` and `R` the quarter turn.
    PeresForest,
    /// `⋃_j R_j(F₁)` with `F₁ = {(k, v_k + l) : k ∈ ℤ, l ∈ ℤ^{n−1}}`.
    GeneralizedPeres { seq: SequenceSpec, n: usize },
    /// `ℤ² ∪ (x + Λ₂) ∪ (y + Λ₃)`.
    ThreeGrid { x: [f64; 2], y: [f64; 2] },
    D2,
    /// Physical-space points (in ambient coordinates) of the grid points whose
    /// internal coordinates all lie in `[a, b)`.
    CutAndProject {
        grid: Grid,
        phys_basis: Vec<Vec<f64>>,
        int_basis: Vec<Vec<f64>>,
        window_interval: [f64; 2],
    },
    GridUnion { grids: Vec<Grid> },
}

impl PointSetSpec {
    pub fn three_grid_default() -> Self {
        PointSetSpec::ThreeGrid {
            x: three_grid::X,
            y: three_grid::Y,
        }
    }

    /// The dimension-(1,2) example: `ℤ²`, physical line `y = x/(2√3)`, its
    /// orthogonal complement as internal space and window `[−1, 1)`.
    pub fn cut_and_project_default() -> Self {
        let r = 2.0 * 3f64.sqrt();
        let norm = (r * r + 1.0).sqrt();
        PointSetSpec::CutAndProject {
            grid: Grid::integer(2),
            phys_basis: vec![vec![r / norm, 1.0 / norm]],
            int_basis: vec![vec![-1.0 / norm, r / norm]],
            window_interval: [-1.0, 1.0],
        }
    }

    pub fn integer_lattice(dim: usize) -> Self {
        PointSetSpec::GridUnion {
            grids: vec![Grid::integer(dim)],
        }
    }

    /// `ℤ² ∪ (x + Λ₂)`: the first two grids of the three-grid construction.
    pub fn two_grid_default() -> Self {
        let grids = three_grid_grids(three_grid::X, three_grid::Y);
        PointSetSpec::GridUnion {
            grids: grids[..2].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            PointSetSpec::PeresForest | PointSetSpec::ThreeGrid { .. } | PointSetSpec::D2 => 2,
            PointSetSpec::GeneralizedPeres { n, .. } => *n,
            PointSetSpec::CutAndProject { grid, .. } => grid.dim(),
            PointSetSpec::GridUnion { grids } => grids.first().map_or(2, Grid::dim),
        }
    }

    /// Constituent grids, for the variants that are finite unions of grids.
    pub fn grids(&self) -> Vec<Grid> {
        match self {
            PointSetSpec::PeresForest => peres_grids(),
            PointSetSpec::ThreeGrid { x, y } => three_grid_grids(*x, *y),
            PointSetSpec::GridUnion { grids } => grids.clone(),
            PointSetSpec::CutAndProject { grid, .. } => vec![grid.clone()],
            PointSetSpec::GeneralizedPeres { n, .. } => vec![Grid::integer(*n)],
            PointSetSpec::D2 => vec![],
        }
    }

    pub fn compile(&self) -> Result<PointSet> {
        let kind = match self {
            PointSetSpec::PeresForest => Kind::Grids(compile_grids(&peres_grids())?),
            PointSetSpec::ThreeGrid { x, y } => {
                if x.iter().chain(y).any(|c| !c.is_finite()) {
                    return Err(Error::arg("three-grid translations must be finite"));
                }
                Kind::Grids(compile_grids(&three_grid_grids(*x, *y))?)
            }
            PointSetSpec::GridUnion { grids } => {
                if let Some(g) = grids.first() {
                    if grids.iter().any(|h| h.dim() != g.dim()) {
                        return Err(Error::arg("all grids of a union must share one dimension"));
                    }
                }
                Kind::Grids(compile_grids(grids)?)
            }
            PointSetSpec::D2 => Kind::D2,
            PointSetSpec::GeneralizedPeres { seq, n } => {
                seq.validate()?;
                if *n < 2 || seq.dim() != n - 1 {
                    return Err(Error::arg(format!(
                        "generalised Peres forest in dimension {n} needs a sequence of dimension {}, got {}",
                        n.saturating_sub(1),
                        seq.dim()
                    )));
                }
                Kind::Peres {
                    seq: seq.clone(),
                    n: *n,
                }
            }
            PointSetSpec::CutAndProject {
                grid,
                phys_basis,
                int_basis,
                window_interval,
            } => Kind::CutAndProject(CutAndProject::new(grid, phys_basis, int_basis, *window_interval)?),
        };
        Ok(PointSet {
            dim: self.dim(),
            kind,
        })
    }
}

fn peres_grids() -> Vec<Grid> {
    vec![
        Grid::integer(2),
        Grid {
            basis: vec![vec![1.0, 0.0], vec![PHI, 1.0]],
            translation: vec![0.0, 0.0],
        },
        // quarter turn of the sheared lattice: (k, φk + l) ↦ (−φk − l, k)
        Grid {
            basis: vec![vec![-PHI, -1.0], vec![1.0, 0.0]],
            translation: vec![0.0, 0.0],
        },
    ]
}

fn three_grid_grids(x: [f64; 2], y: [f64; 2]) -> Vec<Grid> {
    use three_grid::*;
    vec![
        Grid::integer(2),
        Grid {
            basis: vec![vec![GAMMA, ALPHA], vec![0.0, 1.0]],
            translation: x.to_vec(),
        },
        Grid {
            basis: vec![vec![1.0, 0.0], vec![BETA, DELTA]],
            translation: y.to_vec(),
        },
    ]
}

fn compile_grids(grids: &[Grid]) -> Result<Vec<GridEnumerator>> {
    grids.iter().map(Grid::compile).collect()
}

/// Rotation by a quarter turn in the `(x₀, x_axis)` plane taking `e₀` to
/// `e_axis` and `e_axis` to `−e₀`; identity for `axis = 0`. Axes are 0-based.
pub fn rotate_axis_map(axis: usize, n: usize) -> Result<Vec<Vec<f64>>> {
    if axis >= n {
        return Err(Error::arg(format!("axis {axis} out of range for dimension {n}")));
    }
    let mut m = identity(n);
    if axis > 0 {
        m[0][0] = 0.0;
        m[axis][axis] = 0.0;
        m[axis][0] = 1.0;
        m[0][axis] = -1.0;
    }
    Ok(m)
}

/// Applies [`rotate_axis_map`] without building the matrix.
fn rotate(axis: usize, x: &[f64], out: &mut [f64]) {
    out.copy_from_slice(x);
    if axis > 0 {
        out[axis] = x[0];
        out[0] = -x[axis];
    }
}

#[derive(Debug, Clone)]
struct CutAndProject {
    grid: GridEnumerator,
    phys: Vec<Vec<f64>>,
    int: Vec<Vec<f64>>,
    /// Rows of the inverse of `[phys | int]`.
    coords: Vec<Vec<f64>>,
    interval: [f64; 2],
}

impl CutAndProject {
    fn new(grid: &Grid, phys: &[Vec<f64>], int: &[Vec<f64>], interval: [f64; 2]) -> Result<Self> {
        let n = grid.dim();
        if phys.is_empty() || int.is_empty() || phys.len() + int.len() != n {
            return Err(Error::arg("physical and internal bases must split the ambient dimension"));
        }
        if phys.iter().chain(int).any(|v| v.len() != n) {
            return Err(Error::arg("subspace basis vectors must live in the ambient space"));
        }
        if !(interval[0] < interval[1]) {
            return Err(Error::arg("internal window requires a < b"));
        }
        let stacked = DMatrix::from_fn(n, n, |i, j| {
            if j < phys.len() {
                phys[j][i]
            } else {
                int[j - phys.len()][i]
            }
        });
        if stacked.determinant().abs() <= 1e-12 {
            return Err(Error::arg("physical and internal subspaces are not complementary"));
        }
        let inv = stacked.try_inverse().ok_or_else(|| Error::arg("singular subspace basis"))?;
        Ok(CutAndProject {
            grid: grid.compile()?,
            phys: phys.to_vec(),
            int: int.to_vec(),
            coords: (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect(),
            interval,
        })
    }

    /// Coordinates of `g` in the stacked basis `[phys | int]`.
    fn split(&self, g: &[f64]) -> Vec<f64> {
        self.coords
            .iter()
            .map(|row| row.iter().zip(g).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn visit(&self, window: &Window, f: &mut dyn FnMut(&[f64]) -> ControlFlow<()>) -> Result<ControlFlow<()>> {
        let n = self.grid.grid.dim();
        let [a, b] = self.interval;
        // grid points g = y + (internal part); bound the internal part per axis
        let mut lo = window.lo.clone();
        let mut hi = window.hi.clone();
        for v in &self.int {
            for i in 0..n {
                lo[i] += (a * v[i]).min(b * v[i]);
                hi[i] += (a * v[i]).max(b * v[i]);
            }
        }
        let search = Window::new(lo, hi)?;
        let k = self.phys.len();
        let mut y = vec![0.0; n];
        self.grid.visit(&search, &mut |g| {
            let c = self.split(g);
            if c[k..].iter().all(|t| a <= *t && *t < b) {
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = (0..k).map(|j| c[j] * self.phys[j][i]).sum();
                }
                if window.contains(&y) {
                    return f(&y);
                }
            }
            ControlFlow::Continue(())
        })
    }

    /// Internal coordinates of a physical point that came from grid point `g`.
    fn internal_coords(&self, g: &[f64]) -> Vec<f64> {
        self.split(g)[self.phys.len()..].to_vec()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Grids(Vec<GridEnumerator>),
    Peres { seq: SequenceSpec, n: usize },
    D2,
    CutAndProject(CutAndProject),
}

/// A point set ready for repeated window queries.
#[derive(Debug, Clone)]
pub struct PointSet {
    dim: usize,
    kind: Kind,
}

impl PointSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Rough number of points in `window`, used to refuse oversized requests.
    pub fn expected_count(&self, window: &Window) -> f64 {
        match &self.kind {
            Kind::Grids(gs) => gs.iter().map(|g| g.expected_count(window)).sum(),
            Kind::Peres { n, .. } => *n as f64 * window.volume(),
            Kind::D2 => window.volume(),
            Kind::CutAndProject(_) => 0.0,
        }
    }

    /// Calls `f` on every point of the set lying in `window`. Order is
    /// unspecified and points shared by several constituents may repeat.
    pub fn visit(&self, window: &Window, f: &mut dyn FnMut(&[f64]) -> ControlFlow<()>) -> Result<ControlFlow<()>> {
        if window.dim() != self.dim {
            return Err(Error::arg(format!(
                "window has dimension {} but the point set has dimension {}",
                window.dim(),
                self.dim
            )));
        }
        let expected = self.expected_count(window);
        if expected > ENUMERATION_LIMIT {
            return Err(Error::resource(format!("window would contain about {expected:.3e} points")));
        }
        match &self.kind {
            Kind::Grids(gs) => {
                for g in gs {
                    if g.visit(window, f)?.is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                }
                Ok(ControlFlow::Continue(()))
            }
            Kind::Peres { seq, n } => visit_peres(seq, *n, window, f),
            Kind::D2 => d2::visit(window, f),
            Kind::CutAndProject(cp) => cp.visit(window, f),
        }
    }

    /// Sorted, de-duplicated points in `window`.
    /// [`PointSet::visit`] without early exit.
    pub fn for_each(&self, window: &Window, mut f: impl FnMut(&[f64])) -> Result<()> {
        self.visit(window, &mut |p| {
            f(p);
            ControlFlow::Continue(())
        })
        .map(|_| ())
    }

    pub fn enumerate(&self, window: &Window) -> Result<Vec<Point>> {
        let mut raw: Vec<Vec<f64>> = Vec::new();
        self.for_each(window, |p| raw.push(p.to_vec()))?;
        Ok(canonicalize(raw).into_iter().map(Point::from).collect())
    }

    /// Internal-space coordinates of grid point `g`, for cut-and-project sets.
    pub fn internal_coords(&self, g: &[f64]) -> Option<Vec<f64>> {
        match &self.kind {
            Kind::CutAndProject(cp) => Some(cp.internal_coords(g)),
            _ => None,
        }
    }
}

/// Lexicographic sort followed by merging of points within [`MERGE_TOLERANCE`].
pub fn canonicalize(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    for x in pts.iter_mut().flatten() {
        // −0.0 + 0.0 = +0.0, so the total order sees a single zero
        *x += 0.0;
    }
    pts.sort_by(|a, b| lex_cmp(a, b));
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(pts.len());
    for p in pts {
        let duplicate = kept
            .iter()
            .rev()
            .take_while(|q| p[0] - q[0] <= MERGE_TOLERANCE)
            .any(|q| sup_distance(q, &p) <= MERGE_TOLERANCE);
        if !duplicate {
            kept.push(p);
        }
    }
    kept
}

fn visit_peres(
    seq: &SequenceSpec,
    n: usize,
    window: &Window,
    f: &mut dyn FnMut(&[f64]) -> ControlFlow<()>,
) -> Result<ControlFlow<()>> {
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    for axis in 0..n {
        // preimage of the window under the rotation, as a closed box
        let mut lo = window.lo.clone();
        let mut hi = window.hi.clone();
        if axis > 0 {
            lo[0] = window.lo[axis];
            hi[0] = window.hi[axis];
            lo[axis] = -window.hi[0];
            hi[axis] = -window.lo[0];
        }
        let kmin = (lo[0] - 1e-9).ceil() as i64;
        let kmax = (hi[0] + 1e-9).floor() as i64;
        for k in kmin..=kmax {
            let v = seq.forest_value(k)?;
            let ranges: Vec<(i64, i64)> = (1..n)
                .map(|i| {
                    (
                        (lo[i] - v[i - 1] - 1e-9).ceil() as i64,
                        (hi[i] - v[i - 1] + 1e-9).floor() as i64,
                    )
                })
                .collect();
            if ranges.iter().any(|(a, b)| a > b) {
                continue;
            }
            let mut l: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            'odometer: loop {
                x[0] = k as f64;
                for i in 1..n {
                    x[i] = v[i - 1] + l[i - 1] as f64;
                }
                rotate(axis, &x, &mut y);
                if window.contains(&y) && f(&y).is_break() {
                    return Ok(ControlFlow::Break(()));
                }
                let mut j = 0;
                loop {
                    if j == l.len() {
                        break 'odometer;
                    }
                    l[j] += 1;
                    if l[j] <= ranges[j].1 {
                        break;
                    }
                    l[j] = ranges[j].0;
                    j += 1;
                }
            }
        }
    }
    Ok(ControlFlow::Continue(()))
}

/// Points of `spec` in the half-open `window`, sorted lexicographically with
/// coincident points (within `1e-9`) merged.
pub fn enumerate(spec: &PointSetSpec, window: &Window) -> Result<Vec<Point>> {
    spec.compile()?.enumerate(window)
}

/// Evaluates `v_k` of a driving sequence.
pub fn seq_eval(spec: &SequenceSpec, k: i64) -> Result<Vec<f64>> {
    spec.eval(k)
}
