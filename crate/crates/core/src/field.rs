//! Scalar, vector and symmetric-matrix fields sampled on a [`GridSpec`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::scalar::Real;

/// Number of stored entries of a packed symmetric `n x n` matrix.
#[inline]
pub const fn packed_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Position of `(i, j)` in the packed upper triangle (row-major).
#[inline]
pub fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * i.saturating_sub(1) / 2 + (j - i)
}

fn check_finite<T: Real>(values: &[T]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// One real value per grid point.
#[derive(Clone, Debug, Serialize)]
pub struct ScalarField<T: Real> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "scalar field has {} values for {} points",
                values.len(),
                grid.len()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn constant(grid: &GridSpec<T>, c: T) -> Self {
        Self {
            values: vec![c; grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(coords)` at every grid point.
    pub fn from_fn<F>(grid: &GridSpec<T>, f: F) -> Self
    where
        F: Fn(&[T]) -> T + Sync,
    {
        Self {
            values: grid.map_points(|_, x| f(x)),
            grid: grid.clone(),
        }
    }

    pub(crate) fn from_raw(grid: GridSpec<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    #[inline]
    pub fn at(&self, p: usize) -> T {
        self.values[p]
    }

    pub fn map<F: Fn(T) -> T>(&self, f: F) -> Self {
        Self::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(T, T) -> T>(&self, other: &Self, f: F) -> Result<Self> {
        self.grid.check_same(&other.grid, "zip_with")?;
        Ok(Self::from_raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Sup-norm over the points selected by `mask`.
    pub fn max_abs_where(&self, mask: &[bool]) -> T {
        self.values
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .fold(T::zero(), |m, (v, _)| m.max(v.abs()))
    }

    /// Discrete L2 norm `sqrt(sum v^2 dV)` over the masked points.
    pub fn l2_norm_where(&self, mask: &[bool]) -> T {
        let s: T = self
            .values
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .map(|(&v, _)| v * v)
            .sum();
        (s * self.grid.cell_volume()).sqrt()
    }
}

/// `dim` real components per grid point.
#[derive(Clone, Debug, Serialize)]
pub struct VectorField<T: Real> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> VectorField<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() * grid.dim() {
            return Err(Error::ShapeMismatch(format!(
                "vector field has {} values for {} points of dimension {}",
                values.len(),
                grid.len(),
                grid.dim()
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &GridSpec<T>) -> Self {
        Self {
            values: vec![T::zero(); grid.len() * grid.dim()],
            grid: grid.clone(),
        }
    }

    pub fn from_fn<F>(grid: &GridSpec<T>, f: F) -> Self
    where
        F: Fn(&[T], &mut [T]) + Sync,
    {
        Self {
            values: grid.map_points_chunked(grid.dim(), |_, x, out| f(x, out)),
            grid: grid.clone(),
        }
    }

    pub(crate) fn from_raw(grid: GridSpec<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len() * grid.dim());
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn at(&self, p: usize) -> &[T] {
        let n = self.grid.dim();
        &self.values[p * n..(p + 1) * n]
    }

    /// Component `i` as a scalar field.
    pub fn component(&self, i: usize) -> ScalarField<T> {
        let n = self.dim();
        ScalarField::from_raw(
            self.grid.clone(),
            (0..self.grid.len()).map(|p| self.values[p * n + i]).collect(),
        )
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Symmetric `dim x dim` matrix per grid point, packed upper triangle.
#[derive(Clone, Debug, Serialize)]
pub struct SymmetricMatrixField<T: Real> {
    grid: GridSpec<T>,
    values: Vec<T>,
}

impl<T: Real> SymmetricMatrixField<T> {
    pub fn new(grid: GridSpec<T>, values: Vec<T>) -> Result<Self> {
        let w = packed_len(grid.dim());
        if values.len() != grid.len() * w {
            return Err(Error::ShapeMismatch(format!(
                "matrix field has {} values, expected {}",
                values.len(),
                grid.len() * w
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    /// The same matrix (given densely, row-major) at every point.
    pub fn constant(grid: &GridSpec<T>, dense: &[T]) -> Result<Self> {
        let n = grid.dim();
        if dense.len() != n * n {
            return Err(Error::ShapeMismatch("constant matrix has wrong size".into()));
        }
        let packed = pack(n, dense);
        let mut values = Vec::with_capacity(grid.len() * packed.len());
        for _ in 0..grid.len() {
            values.extend_from_slice(&packed);
        }
        Self::new(grid.clone(), values)
    }

    /// Builds the field from a function writing the packed matrix.
    pub fn from_fn<F>(grid: &GridSpec<T>, f: F) -> Self
    where
        F: Fn(&[T], &mut [T]) + Sync,
    {
        Self {
            values: grid.map_points_chunked(packed_len(grid.dim()), |_, x, out| f(x, out)),
            grid: grid.clone(),
        }
    }

    pub(crate) fn from_raw(grid: GridSpec<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len() * packed_len(grid.dim()));
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Packed entries at point `p`.
    #[inline]
    pub fn packed(&self, p: usize) -> &[T] {
        let w = packed_len(self.dim());
        &self.values[p * w..(p + 1) * w]
    }

    #[inline]
    pub fn get(&self, p: usize, i: usize, j: usize) -> T {
        self.packed(p)[packed_index(self.dim(), i, j)]
    }

    /// Dense row-major copy of the matrix at point `p`.
    pub fn dense(&self, p: usize) -> Vec<T> {
        unpack(self.dim(), self.packed(p))
    }

    /// Entry `(i, j)` across the grid as a scalar field.
    pub fn entry(&self, i: usize, j: usize) -> ScalarField<T> {
        let k = packed_index(self.dim(), i, j);
        let w = packed_len(self.dim());
        ScalarField::from_raw(
            self.grid.clone(),
            (0..self.grid.len()).map(|p| self.values[p * w + k]).collect(),
        )
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// Packs a dense symmetric matrix (upper triangle is read).
pub fn pack<T: Real>(n: usize, dense: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(packed_len(n));
    for i in 0..n {
        for j in i..n {
            out.push(dense[i * n + j]);
        }
    }
    out
}

pub fn unpack<T: Real>(n: usize, packed: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            out[i * n + j] = packed[k];
            out[j * n + i] = packed[k];
            k += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_layout_matches_pack() {
        for n in 1..6 {
            let dense: Vec<f64> = (0..n * n)
                .map(|k| {
                    let (i, j) = (k / n, k % n);
                    (i.min(j) * 10 + i.max(j)) as f64
                })
                .collect();
            let p = pack(n, &dense);
            assert_eq!(p.len(), packed_len(n));
            for i in 0..n {
                for j in 0..n {
                    assert_eq!(p[packed_index(n, i, j)], dense[i * n + j]);
                }
            }
            assert_eq!(unpack(n, &p), dense);
        }
    }

    #[test]
    fn scalar_field_rejects_non_finite() {
        let g = GridSpec::<f64>::cube(2, 0.0, 1.0, 2).unwrap();
        let mut v = vec![0.0; g.len()];
        v[4] = f64::NAN;
        assert!(matches!(ScalarField::new(g.clone(), v), Err(Error::NonFinite { index: 4 })));
        assert!(ScalarField::new(g, vec![0.0; 3]).is_err());
    }
}
