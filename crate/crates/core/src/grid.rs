//! Cartesian sampling grids.
//!
//! Points are stored row-major with axis 0 varying slowest. Axis spacings may
//! differ: the time axis of a solver slab is usually refined relative to the
//! spatial axes so the explicit update satisfies its CFL limit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform-per-axis grid over a box in `R^dim`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec<T: Real> {
    origin: Vec<T>,
    spacing: Vec<T>,
    points: Vec<usize>,
    #[serde(skip)]
    strides: Vec<usize>,
}

impl<T: Real> GridSpec<T> {
    pub fn new(origin: Vec<T>, spacing: Vec<T>, points: Vec<usize>) -> Result<Self> {
        let dim = origin.len();
        if dim < 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} < 2")));
        }
        if spacing.len() != dim || points.len() != dim {
            return Err(Error::InvalidGrid(
                "origin, spacing and points must have the same length".into(),
            ));
        }
        for axis in 0..dim {
            if !(spacing[axis] > T::zero()) || !spacing[axis].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {axis}: spacing must be positive")));
            }
            if !origin[axis].is_finite() {
                return Err(Error::InvalidGrid(format!("axis {axis}: origin not finite")));
            }
            if points[axis] < 2 {
                return Err(Error::InvalidGrid(format!("axis {axis}: need at least 2 points")));
            }
        }
        let mut strides = vec![1; dim];
        for axis in (0..dim - 1).rev() {
            strides[axis] = strides[axis + 1] * points[axis + 1];
        }
        Ok(Self {
            origin,
            spacing,
            points,
            strides,
        })
    }

    /// Same spacing `h` on every axis.
    pub fn uniform(origin: Vec<T>, h: T, points: Vec<usize>) -> Result<Self> {
        let spacing = vec![h; origin.len()];
        Self::new(origin, spacing, points)
    }

    /// The cube `[lo, hi]^dim` sampled with `cells` intervals per axis.
    pub fn cube(dim: usize, lo: T, hi: T, cells: usize) -> Result<Self> {
        if !(hi > lo) || cells == 0 {
            return Err(Error::InvalidGrid("cube needs hi > lo and cells > 0".into()));
        }
        let h = (hi - lo) / T::from_count(cells);
        Self::uniform(vec![lo; dim], h, vec![cells + 1; dim])
    }

    /// Box with per-axis bounds `[lo, hi]` and per-axis interval counts.
    pub fn from_bounds(bounds: &[(T, T)], cells: &[usize]) -> Result<Self> {
        if bounds.len() != cells.len() {
            return Err(Error::InvalidGrid("bounds and cells differ in length".into()));
        }
        let mut origin = Vec::with_capacity(bounds.len());
        let mut spacing = Vec::with_capacity(bounds.len());
        for (&(lo, hi), &n) in bounds.iter().zip(cells) {
            if !(hi > lo) || n == 0 {
                return Err(Error::InvalidGrid("each axis needs hi > lo and cells > 0".into()));
            }
            origin.push(lo);
            spacing.push((hi - lo) / T::from_count(n));
        }
        Self::new(origin, spacing, cells.iter().map(|n| n + 1).collect())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn points(&self, axis: usize) -> usize {
        self.points[axis]
    }

    pub fn points_per_axis(&self) -> &[usize] {
        &self.points
    }

    #[inline]
    pub fn spacing(&self, axis: usize) -> T {
        self.spacing[axis]
    }

    pub fn spacings(&self) -> &[T] {
        &self.spacing
    }

    #[inline]
    pub fn origin(&self, axis: usize) -> T {
        self.origin[axis]
    }

    pub fn extent(&self, axis: usize) -> T {
        self.spacing[axis] * T::from_count(self.points[axis] - 1)
    }

    #[inline]
    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Smallest spacing over the axes other than `time_axis`.
    pub fn min_spatial_spacing(&self, time_axis: usize) -> T {
        (0..self.dim())
            .filter(|&a| a != time_axis)
            .map(|a| self.spacing[a])
            .fold(T::infinity(), T::min)
    }

    /// Volume of one grid cell.
    pub fn cell_volume(&self) -> T {
        self.spacing.iter().fold(T::one(), |acc, &h| acc * h)
    }

    /// Volume of one cell in the hyperplane orthogonal to `axis`.
    pub fn face_volume(&self, axis: usize) -> T {
        self.cell_volume() / self.spacing[axis]
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        multi
            .iter()
            .zip(&self.strides)
            .map(|(&i, &s)| i * s)
            .sum()
    }

    #[inline]
    pub fn axis_index(&self, flat: usize, axis: usize) -> usize {
        (flat / self.strides[axis]) % self.points[axis]
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        (0..self.dim()).map(|a| self.axis_index(flat, a)).collect()
    }

    #[inline]
    pub fn coord(&self, flat: usize, axis: usize) -> T {
        self.origin[axis] + self.spacing[axis] * T::from_count(self.axis_index(flat, axis))
    }

    pub fn coords(&self, flat: usize) -> Vec<T> {
        (0..self.dim()).map(|a| self.coord(flat, a)).collect()
    }

    /// Neighbor at a signed offset along one axis, if it lies on the grid.
    #[inline]
    pub fn neighbor(&self, flat: usize, axis: usize, offset: isize) -> Option<usize> {
        let i = self.axis_index(flat, axis) as isize + offset;
        if i < 0 || i >= self.points[axis] as isize {
            None
        } else {
            Some((flat as isize + offset * self.strides[axis] as isize) as usize)
        }
    }

    /// Number of cells between a point and the nearest face of the box.
    pub fn boundary_distance(&self, flat: usize) -> usize {
        (0..self.dim())
            .map(|a| {
                let i = self.axis_index(flat, a);
                i.min(self.points[a] - 1 - i)
            })
            .min()
            .unwrap_or(0)
    }

    /// Flat indices of all points whose index along `axis` equals `level`.
    pub fn slice(&self, axis: usize, level: usize) -> Vec<usize> {
        let inner = self.strides[axis];
        let block = inner * self.points[axis];
        let outer = self.len() / block;
        (0..outer)
            .flat_map(|o| {
                let base = o * block + level * inner;
                base..base + inner
            })
            .collect()
    }

    /// Evaluates `f(flat_index, coords)` at every point, in parallel.
    pub fn map_points<F>(&self, f: F) -> Vec<T>
    where
        F: Fn(usize, &[T]) -> T + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|p| f(p, &self.coords(p)))
            .collect()
    }

    /// Like [`map_points`](Self::map_points) but each point yields `width`
    /// contiguous values.
    pub fn map_points_chunked<F>(&self, width: usize, f: F) -> Vec<T>
    where
        F: Fn(usize, &[T], &mut [T]) + Sync,
    {
        let mut out = vec![T::zero(); self.len() * width];
        out.par_chunks_mut(width).enumerate().for_each(|(p, chunk)| {
            f(p, &self.coords(p), chunk);
        });
        out
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.points == other.points
            && self
                .spacing
                .iter()
                .zip(&other.spacing)
                .all(|(a, b)| (*a - *b).abs() <= T::epsilon() * T::lit(16.0) * a.abs())
            && self
                .origin
                .iter()
                .zip(&other.origin)
                .all(|(a, b)| (*a - *b).abs() <= T::epsilon() * T::lit(16.0) * (T::one() + a.abs()))
    }

    pub(crate) fn check_same(&self, other: &Self, what: &str) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!("{what}: grids differ")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_round_trips() {
        let g = GridSpec::<f64>::new(vec![0.0, -1.0, 2.0], vec![0.5, 0.25, 1.0], vec![3, 4, 5]).unwrap();
        assert_eq!(g.len(), 60);
        for p in 0..g.len() {
            assert_eq!(g.index(&g.multi_index(p)), p);
        }
        let p = g.index(&[2, 1, 3]);
        assert_eq!(g.coords(p), vec![1.0, -0.75, 5.0]);
        assert_eq!(g.neighbor(p, 0, 1), None);
        assert_eq!(g.neighbor(p, 1, -1), Some(g.index(&[2, 0, 3])));
        assert_eq!(g.boundary_distance(g.index(&[1, 1, 2])), 1);
    }

    #[test]
    fn extent_matches_spacing_times_cells() {
        let g = GridSpec::<f64>::cube(2, -1.0, 1.0, 64).unwrap();
        assert_eq!(g.points(0), 65);
        assert!((g.extent(1) - 2.0).abs() < 1e-15);
        assert!((g.cell_volume() - (2.0f64 / 64.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(GridSpec::<f64>::new(vec![0.0], vec![1.0], vec![3]).is_err());
        assert!(GridSpec::<f64>::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![3, 3]).is_err());
        assert!(GridSpec::<f64>::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![3, 1]).is_err());
    }
}
