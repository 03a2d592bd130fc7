use std::ops::ControlFlow;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Window;

/// Maximum number of points (or lattice candidates) an enumeration may touch.
pub const ENUMERATION_LIMIT: f64 = 1e8;

/// A translated lattice `{B·m + t : m ∈ ℤⁿ}`.
///
/// `basis` is stored row-major; its columns are the lattice generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub basis: Vec<Vec<f64>>,
    pub translation: Vec<f64>,
}

impl Grid {
    pub fn new(basis: Vec<Vec<f64>>, translation: Vec<f64>) -> Result<Self> {
        let g = Grid { basis, translation };
        g.validate()?;
        Ok(g)
    }

    /// `ℤⁿ`.
    pub fn integer(dim: usize) -> Self {
        Grid {
            basis: identity(dim),
            translation: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        if n == 0 || self.basis.iter().any(|r| r.len() != n) || self.translation.len() != n {
            return Err(Error::arg("grid basis must be square and match the translation"));
        }
        if self.basis.iter().flatten().chain(&self.translation).any(|x| !x.is_finite()) {
            return Err(Error::arg("grid entries must be finite"));
        }
        if self.det().abs() <= 1e-12 {
            return Err(Error::arg("grid basis is singular (|det| <= 1e-12)"));
        }
        Ok(())
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.basis[i][j])
    }

    pub fn det(&self) -> f64 {
        self.matrix().determinant()
    }

    pub fn point(&self, m: &[i64]) -> Vec<f64> {
        self.basis
            .iter()
            .zip(&self.translation)
            .map(|(row, t)| row.iter().zip(m).map(|(b, k)| b * *k as f64).sum::<f64>() + t)
            .collect()
    }

    /// Image of the grid under the linear map `a` (row-major).
    pub fn transformed(&self, a: &[Vec<f64>]) -> Grid {
        let n = self.dim();
        let mul = |v: &dyn Fn(usize) -> f64, i: usize| (0..n).map(|k| a[i][k] * v(k)).sum::<f64>();
        let basis = (0..n)
            .map(|i| (0..n).map(|j| mul(&|k| self.basis[k][j], i)).collect())
            .collect();
        let translation = (0..n).map(|i| mul(&|k| self.translation[k], i)).collect();
        Grid { basis, translation }
    }

    /// Rows of `B^{-T}`'s transpose, i.e. the generators of the dual lattice
    /// as columns of the returned row-major matrix.
    pub fn dual_basis(&self) -> Result<Vec<Vec<f64>>> {
        let inv = self
            .matrix()
            .try_inverse()
            .ok_or_else(|| Error::arg("grid basis is singular"))?;
        let n = self.dim();
        // columns of B^{-T} are the rows of B^{-1}
        Ok((0..n).map(|i| (0..n).map(|j| inv[(j, i)]).collect()).collect())
    }

    pub(crate) fn compile(&self) -> Result<GridEnumerator> {
        self.validate()?;
        let inv = self
            .matrix()
            .try_inverse()
            .ok_or_else(|| Error::arg("grid basis is singular"))?;
        let n = self.dim();
        Ok(GridEnumerator {
            grid: self.clone(),
            inverse: (0..n).map(|i| (0..n).map(|j| inv[(i, j)]).collect()).collect(),
            covolume: self.det().abs(),
        })
    }
}

pub(crate) fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// A grid prepared for repeated window queries.
#[derive(Debug, Clone)]
pub(crate) struct GridEnumerator {
    pub grid: Grid,
    inverse: Vec<Vec<f64>>,
    covolume: f64,
}

impl GridEnumerator {
    pub fn expected_count(&self, window: &Window) -> f64 {
        window.volume() / self.covolume
    }

    /// Integer index box covering the preimage of the window.
    fn index_bounds(&self, window: &Window) -> Vec<(i64, i64)> {
        let n = self.grid.dim();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for corner in window.corners() {
            let shifted: Vec<f64> = corner.iter().zip(&self.grid.translation).map(|(c, t)| c - t).collect();
            for i in 0..n {
                let m: f64 = self.inverse[i].iter().zip(&shifted).map(|(a, b)| a * b).sum();
                lo[i] = lo[i].min(m);
                hi[i] = hi[i].max(m);
            }
        }
        lo.iter()
            .zip(&hi)
            .map(|(l, h)| ((l - 1e-7).floor() as i64 - 1, (h + 1e-7).ceil() as i64 + 1))
            .collect()
    }

    /// Calls `f` on every grid point in `window` (unordered).
    pub fn visit(
        &self,
        window: &Window,
        f: &mut dyn FnMut(&[f64]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>> {
        let n = self.grid.dim();
        if window.dim() != n {
            return Err(Error::arg(format!(
                "window has dimension {} but grid has dimension {n}",
                window.dim()
            )));
        }
        if self.expected_count(window) > ENUMERATION_LIMIT {
            return Err(Error::resource(format!(
                "window would contain about {:.3e} grid points",
                self.expected_count(window)
            )));
        }
        let bounds = self.index_bounds(window);
        let outer: f64 = bounds[..n - 1].iter().map(|(l, h)| (h - l + 1) as f64).product();
        if outer > ENUMERATION_LIMIT {
            return Err(Error::resource(format!("grid index range has {outer:.3e} candidates")));
        }
        let last = n - 1;
        let col: Vec<f64> = self.grid.basis.iter().map(|r| r[last]).collect();
        let mut m: Vec<i64> = bounds.iter().map(|b| b.0).collect();
        let mut base = vec![0.0; n];
        let mut p = vec![0.0; n];
        loop {
            // partial point from the first n-1 indices
            for i in 0..n {
                base[i] = self.grid.translation[i]
                    + (0..last).map(|j| self.grid.basis[i][j] * m[j] as f64).sum::<f64>();
            }
            // range of the last index solved per axis
            let (mut klo, mut khi) = (bounds[last].0 as f64, bounds[last].1 as f64);
            for i in 0..n {
                let c = col[i];
                if c.abs() < 1e-300 {
                    if base[i] < window.lo[i] - 1e-9 || base[i] > window.hi[i] + 1e-9 {
                        klo = 1.0;
                        khi = 0.0;
                    }
                    continue;
                }
                let a = (window.lo[i] - base[i]) / c;
                let b = (window.hi[i] - base[i]) / c;
                klo = klo.max(a.min(b) - 1e-9);
                khi = khi.min(a.max(b) + 1e-9);
            }
            if klo <= khi {
                for k in klo.ceil() as i64..=khi.floor() as i64 {
                    for i in 0..n {
                        p[i] = base[i] + col[i] * k as f64;
                    }
                    if window.contains(&p) && f(&p).is_break() {
                        return Ok(ControlFlow::Break(()));
                    }
                }
            }
            // odometer over the outer indices
            let mut axis = 0;
            loop {
                if axis == last {
                    return Ok(ControlFlow::Continue(()));
                }
                m[axis] += 1;
                if m[axis] <= bounds[axis].1 {
                    break;
                }
                m[axis] = bounds[axis].0;
                axis += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect(g: &Grid, w: &Window) -> Vec<Vec<f64>> {
        let e = g.compile().unwrap();
        let mut out = Vec::new();
        let flow = e.visit(w, &mut |p| {
            out.push(p.to_vec());
            ControlFlow::Continue(())
        })
        .unwrap();
        assert!(flow.is_continue());
        out
    }

    fn brute(g: &Grid, w: &Window, range: i64) -> usize {
        let mut count = 0;
        for a in -range..=range {
            for b in -range..=range {
                if w.contains(&g.point(&[a, b])) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn integer_lattice_in_half_open_window() {
        let w = Window::new(vec![-2.0, -2.0], vec![2.0, 2.0]).unwrap();
        let pts = collect(&Grid::integer(2), &w);
        assert_eq!(pts.len(), 16);
        assert!(pts.iter().all(|p| p[0] < 2.0 && p[1] < 2.0));
    }

    #[test]
    fn sheared_grid_matches_brute_force() {
        let g = Grid::new(
            vec![vec![1.7320508, 1.4142136], vec![0.0, 1.0]],
            vec![0.3678794, 0.5772157],
        )
        .unwrap();
        let w = Window::new(vec![-7.3, -4.1], vec![9.2, 5.5]).unwrap();
        assert_eq!(collect(&g, &w).len(), brute(&g, &w, 60));
    }

    #[test]
    fn three_dimensional() {
        let g = Grid::new(
            vec![vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 0.25], vec![0.1, 0.0, 2.0]],
            vec![0.0; 3],
        )
        .unwrap();
        let w = Window::centered(3, 3.0).unwrap();
        let pts = collect(&g, &w);
        let mut count = 0;
        for a in -20..=20i64 {
            for b in -20..=20i64 {
                for c in -20..=20i64 {
                    if w.contains(&g.point(&[a, b, c])) {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(pts.len(), count);
    }

    #[test]
    fn singular_basis_rejected() {
        assert!(Grid::new(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn oversized_window_is_a_resource_error() {
        let w = Window::centered(2, 1e5).unwrap();
        let e = Grid::integer(2).compile().unwrap();
        let r = e.visit(&w, &mut |_| ControlFlow::Continue(()));
        assert!(matches!(r, Err(Error::Resource(_))));
    }

    #[test]
    fn dual_of_integer_lattice() {
        let g = Grid::new(vec![vec![2.0, 0.0], vec![0.0, 0.5]], vec![0.0, 0.0]).unwrap();
        let d = g.dual_basis().unwrap();
        assert!((d[0][0] - 0.5).abs() < 1e-12);
        assert!((d[1][1] - 2.0).abs() < 1e-12);
    }
}
