//! Second-order finite-difference stencils.
//!
//! Interior points use central differences; boundary points use the
//! second-order one-sided formulas
//! `(-3u0 + 4u1 - u2) / 2h` and `(2u0 - 5u1 + 4u2 - u3) / h^2`.
//! Mixed derivatives are compositions of first-derivative operators, which
//! makes them exact on bilinear functions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{packed_len, ScalarField, SymmetricMatrixField, VectorField};
use crate::grid::GridSpec;
use crate::scalar::Real;

fn require_points<T: Real>(grid: &GridSpec<T>, axis: usize, required: usize) -> Result<()> {
    let points = grid.points(axis);
    if points < required {
        Err(Error::GridTooSmall {
            axis,
            points,
            required,
        })
    } else {
        Ok(())
    }
}

/// First derivative along `axis` of values sampled on `grid`.
pub fn diff1<T: Real>(grid: &GridSpec<T>, values: &[T], axis: usize) -> Result<Vec<T>> {
    require_points(grid, axis, 3)?;
    let h = grid.spacing(axis);
    let s = grid.stride(axis);
    let n = grid.points(axis);
    let two_h = T::two() * h;
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    Ok((0..grid.len())
        .into_par_iter()
        .map(|p| {
            let i = grid.axis_index(p, axis);
            if i == 0 {
                (-three * values[p] + four * values[p + s] - values[p + 2 * s]) / two_h
            } else if i == n - 1 {
                (three * values[p] - four * values[p - s] + values[p - 2 * s]) / two_h
            } else {
                (values[p + s] - values[p - s]) / two_h
            }
        })
        .collect())
}

/// Second derivative along `axis`.
pub fn diff2<T: Real>(grid: &GridSpec<T>, values: &[T], axis: usize) -> Result<Vec<T>> {
    require_points(grid, axis, 4)?;
    let h = grid.spacing(axis);
    let s = grid.stride(axis);
    let n = grid.points(axis);
    let h2 = h * h;
    let (two, four, five) = (T::two(), T::lit(4.0), T::lit(5.0));
    Ok((0..grid.len())
        .into_par_iter()
        .map(|p| {
            let i = grid.axis_index(p, axis);
            if i == 0 {
                (two * values[p] - five * values[p + s] + four * values[p + 2 * s]
                    - values[p + 3 * s])
                    / h2
            } else if i == n - 1 {
                (two * values[p] - five * values[p - s] + four * values[p - 2 * s]
                    - values[p - 3 * s])
                    / h2
            } else {
                (values[p + s] - two * values[p] + values[p - s]) / h2
            }
        })
        .collect())
}

/// Gradient of a sampled scalar field.
pub fn gradient<T: Real>(field: &ScalarField<T>) -> Result<VectorField<T>> {
    let grid = field.grid();
    let n = grid.dim();
    let parts: Vec<Vec<T>> = (0..n)
        .map(|a| diff1(grid, field.values(), a))
        .collect::<Result<_>>()?;
    let mut out = vec![T::zero(); grid.len() * n];
    for (a, part) in parts.iter().enumerate() {
        for (p, &v) in part.iter().enumerate() {
            out[p * n + a] = v;
        }
    }
    Ok(VectorField::from_raw(grid.clone(), out))
}

/// Hessian of a sampled scalar field.
pub fn hessian<T: Real>(field: &ScalarField<T>) -> Result<SymmetricMatrixField<T>> {
    let grid = field.grid();
    let n = grid.dim();
    for a in 0..n {
        require_points(grid, a, 4)?;
    }
    let firsts: Vec<Vec<T>> = (0..n)
        .map(|a| diff1(grid, field.values(), a))
        .collect::<Result<_>>()?;
    let w = packed_len(n);
    let mut out = vec![T::zero(); grid.len() * w];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let entry = if i == j {
                diff2(grid, field.values(), i)?
            } else {
                diff1(grid, &firsts[i], j)?
            };
            for (p, &v) in entry.iter().enumerate() {
                out[p * w + k] = v;
            }
            k += 1;
        }
    }
    Ok(SymmetricMatrixField::from_raw(grid.clone(), out))
}

/// Derivative along `axis` at point `p` using only points inside `mask`.
///
/// Central when both neighbors are present, otherwise the second-order
/// one-sided formula, otherwise a first-order difference; zero for an
/// isolated point.
pub fn masked_diff1<T: Real>(
    grid: &GridSpec<T>,
    values: &[T],
    mask: &[bool],
    p: usize,
    axis: usize,
) -> T {
    let h = grid.spacing(axis);
    let inside = |o: isize| grid.neighbor(p, axis, o).filter(|&q| mask[q]);
    match (inside(-1), inside(1)) {
        (Some(m), Some(q)) => (values[q] - values[m]) / (T::two() * h),
        (None, Some(q)) => match inside(2) {
            Some(q2) => {
                (-T::lit(3.0) * values[p] + T::lit(4.0) * values[q] - values[q2]) / (T::two() * h)
            }
            None => (values[q] - values[p]) / h,
        },
        (Some(m), None) => match inside(-2) {
            Some(m2) => {
                (T::lit(3.0) * values[p] - T::lit(4.0) * values[m] + values[m2]) / (T::two() * h)
            }
            None => (values[p] - values[m]) / h,
        },
        (None, None) => T::zero(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_exact_on_quadratics() {
        let g = GridSpec::<f64>::cube(2, -1.0, 1.0, 8).unwrap();
        let u = ScalarField::from_fn(&g, |x| 0.5 * (x[1] * x[1] - x[0] * x[0]) + 3.0 * x[0] * x[1]);
        let h = hessian(&u).unwrap();
        for p in 0..g.len() {
            assert!((h.get(p, 0, 0) + 1.0).abs() < 1e-11);
            assert!((h.get(p, 1, 1) - 1.0).abs() < 1e-11);
            assert!((h.get(p, 0, 1) - 3.0).abs() < 1e-11);
        }
    }

    #[test]
    fn too_small_grid_is_rejected() {
        let g = GridSpec::<f64>::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![2, 5]).unwrap();
        let u = ScalarField::zeros(&g);
        assert!(matches!(gradient(&u), Err(Error::GridTooSmall { axis: 0, .. })));
        let g = GridSpec::<f64>::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![3, 5]).unwrap();
        assert!(gradient(&ScalarField::zeros(&g)).is_ok());
        assert!(hessian(&ScalarField::zeros(&g)).is_err());
    }

    #[test]
    fn masked_derivative_falls_back_to_one_sided() {
        let g = GridSpec::<f64>::cube(2, 0.0, 1.0, 10).unwrap();
        let u = ScalarField::from_fn(&g, |x| x[1] * x[1]);
        let mut mask = vec![true; g.len()];
        let edge = g.index(&[3, 4]);
        mask[g.index(&[3, 5])] = false;
        let d = masked_diff1(&g, u.values(), &mask, edge, 1);
        assert!((d - 2.0 * 0.4).abs() < 1e-12);
    }
}
