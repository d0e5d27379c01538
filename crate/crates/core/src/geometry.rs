//! Curvature operator, its linearization, and the associated Lorentzian
//! geometry of a graph with Lorentzian Hessian.
//!
//! Pointwise kernels (`*_at`) take dense row-major Hessians and are shared by
//! the field-level operations and by the tests' analytic oracles.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::field::{pack, packed_len, ScalarField, SymmetricMatrixField, VectorField};
use crate::linalg;
use crate::scalar::Real;
use crate::surface::GraphSurface;

/// Floors guarding determinants and eigenvalue signs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances<T: Real> {
    /// Minimum `|det|` accepted for Hessians and metrics.
    pub det_floor: T,
    /// Eigenvalues with `|lambda| <= eig_floor` count as zero.
    pub eig_floor: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        Self {
            det_floor: T::lit(1e-10),
            eig_floor: T::lit(1e-8),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Signature {
    Riemannian,
    Lorentzian,
    Degenerate,
    OtherIndefinite,
}

/// Classifies a dense symmetric matrix by the signs of its eigenvalues.
pub fn classify_matrix<T: Real>(n: usize, dense: &[T], eig_floor: T) -> Signature {
    let ev = linalg::symmetric_eigenvalues(n, dense);
    if ev.iter().any(|l| l.abs() <= eig_floor) {
        return Signature::Degenerate;
    }
    let negative = ev.iter().filter(|&&l| l < -eig_floor).count();
    match negative {
        0 => Signature::Riemannian,
        1 => Signature::Lorentzian,
        _ => Signature::OtherIndefinite,
    }
}

/// Per-point signature of a matrix field.
pub fn classify_signature<T: Real>(h: &SymmetricMatrixField<T>, eig_floor: T) -> Vec<Signature> {
    let n = h.dim();
    (0..h.grid().len())
        .into_par_iter()
        .map(|p| classify_matrix(n, &h.dense(p), eig_floor))
        .collect()
}

/// `det(D^2u) / (1 + |Du|^2)^{(n+2)/2}`.
pub fn psi_at<T: Real>(n: usize, du: &[T], d2u: &[T]) -> T {
    let q = T::one() + linalg::dot(du, du);
    linalg::determinant(n, d2u) / q.powf(T::from_count(n + 2) / T::two())
}

/// Linearized curvature operator at one point, or `None` if `D^2u` is
/// singular below `det_floor`.
pub fn linearized_at<T: Real>(
    n: usize,
    du: &[T],
    d2u: &[T],
    dv: &[T],
    d2v: &[T],
    det_floor: T,
) -> Option<T> {
    let inv = linalg::inverse(n, d2u, det_floor)?;
    let q = T::one() + linalg::dot(du, du);
    let tr = linalg::trace_product(n, &inv, d2v);
    let first = T::from_count(n + 2) * linalg::dot(du, dv) / q;
    Some(psi_at(n, du, d2u) * (tr - first))
}

/// Lorentzian metric `|det m|^{1/(n-2)} (1+|Du|^2)^{-(n+2)/(n-2)} m`, `n >= 3`.
pub fn metric_at<T: Real>(n: usize, du: &[T], d2u: &[T]) -> Vec<T> {
    let nn = T::from_count(n);
    let q = T::one() + linalg::dot(du, du);
    let det = linalg::determinant(n, d2u).abs();
    let factor = det.powf(T::one() / (nn - T::two())) * q.powf(-(nn + T::two()) / (nn - T::two()));
    d2u.iter().map(|&m| factor * m).collect()
}

/// Conformal factor `-|det m|^{-(n-1)/(n-2)} (1+|Du|^2)^{n(n+2)/(2(n-2))}`.
pub fn conformal_factor_at<T: Real>(n: usize, du: &[T], d2u: &[T]) -> T {
    let nn = T::from_count(n);
    let q = T::one() + linalg::dot(du, du);
    let det = linalg::determinant(n, d2u).abs();
    -det.powf(-(nn - T::one()) / (nn - T::two()))
        * q.powf(nn * (nn + T::two()) / (T::two() * (nn - T::two())))
}

/// First-order coefficients `b^j` of the `n = 2` form, given `m = D^2u`,
/// `Du` and `dm[i] = d_i m` (dense).
pub fn first_order_n2_at<T: Real>(du: &[T], m: &[T], dm: &[Vec<T>], det_floor: T) -> Option<[T; 2]> {
    let inv = linalg::inverse(2, m, det_floor)?;
    let q = T::one() + linalg::dot(du, du);
    let mut b = [T::zero(); 2];
    let traces: Vec<T> = dm.iter().map(|d| linalg::trace_product(2, &inv, d)).collect();
    for j in 0..2 {
        let mut s = -T::lit(4.0) * du[j] / q;
        for i in 0..2 {
            s = s + T::half() * inv[j * 2 + i] * traces[i];
        }
        b[j] = s;
    }
    Some(b)
}

fn require_dim(n: usize, ok: bool, expected: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionError {
            expected: expected.into(),
            got: n,
        })
    }
}

/// Derivatives of a surface evaluated once for pointwise kernels.
struct SurfaceData<T: Real> {
    grad: VectorField<T>,
    hess: SymmetricMatrixField<T>,
}

impl<T: Real> SurfaceData<T> {
    fn new(s: &GraphSurface<T>) -> Result<Self> {
        Ok(Self {
            grad: s.gradient()?,
            hess: s.hessian()?,
        })
    }

    /// Checks that `D^2u` is Lorentzian and nonsingular at every point.
    fn check_lorentzian(&self, tol: &Tolerances<T>) -> Result<()> {
        let n = self.hess.dim();
        for p in 0..self.hess.grid().len() {
            let d = self.hess.dense(p);
            let det = linalg::determinant(n, &d);
            if !(det.abs() >= tol.det_floor) {
                return Err(Error::SingularHessian {
                    index: p,
                    det: det.as_f64(),
                });
            }
            if classify_matrix(n, &d, tol.eig_floor) != Signature::Lorentzian {
                return Err(Error::NotLorentzian { index: p });
            }
        }
        Ok(())
    }
}

pub fn psi<T: Real>(s: &GraphSurface<T>) -> Result<ScalarField<T>> {
    let data = SurfaceData::new(s)?;
    let n = s.dim();
    let values = (0..s.grid().len())
        .into_par_iter()
        .map(|p| psi_at(n, data.grad.at(p), &data.hess.dense(p)))
        .collect();
    Ok(ScalarField::from_raw(s.grid().clone(), values))
}

/// `L_u(v)` with finite-difference derivatives of `v`.
pub fn apply_linearized<T: Real>(
    s: &GraphSurface<T>,
    v: &ScalarField<T>,
    tol: &Tolerances<T>,
) -> Result<ScalarField<T>> {
    s.grid().check_same(v.grid(), "apply_linearized")?;
    let data = SurfaceData::new(s)?;
    let dv = fd::gradient(v)?;
    let d2v = fd::hessian(v)?;
    let n = s.dim();
    let values: Vec<Option<T>> = (0..s.grid().len())
        .into_par_iter()
        .map(|p| {
            linearized_at(
                n,
                data.grad.at(p),
                &data.hess.dense(p),
                dv.at(p),
                &d2v.dense(p),
                tol.det_floor,
            )
        })
        .collect();
    collect_or_singular(s, &data, values)
}

fn collect_or_singular<T: Real>(
    s: &GraphSurface<T>,
    data: &SurfaceData<T>,
    values: Vec<Option<T>>,
) -> Result<ScalarField<T>> {
    let mut out = Vec::with_capacity(values.len());
    for (p, v) in values.into_iter().enumerate() {
        match v {
            Some(v) => out.push(v),
            None => {
                return Err(Error::SingularHessian {
                    index: p,
                    det: linalg::determinant(s.dim(), &data.hess.dense(p)).as_f64(),
                })
            }
        }
    }
    Ok(ScalarField::from_raw(s.grid().clone(), out))
}

/// Lorentzian metric `g` of the linearized operator, `n >= 3`.
pub fn lorentzian_metric<T: Real>(
    s: &GraphSurface<T>,
    tol: &Tolerances<T>,
) -> Result<SymmetricMatrixField<T>> {
    let n = s.dim();
    require_dim(n, n >= 3, ">= 3")?;
    let data = SurfaceData::new(s)?;
    data.check_lorentzian(tol)?;
    let w = packed_len(n);
    let mut values = vec![T::zero(); s.grid().len() * w];
    values.par_chunks_mut(w).enumerate().for_each(|(p, out)| {
        let g = metric_at(n, data.grad.at(p), &data.hess.dense(p));
        out.copy_from_slice(&pack(n, &g));
    });
    Ok(SymmetricMatrixField::from_raw(s.grid().clone(), values))
}

/// Conformal factor `f` with `box_g v = f L_u v`, `n >= 3`.
pub fn conformal_factor<T: Real>(s: &GraphSurface<T>, tol: &Tolerances<T>) -> Result<ScalarField<T>> {
    let n = s.dim();
    require_dim(n, n >= 3, ">= 3")?;
    let data = SurfaceData::new(s)?;
    data.check_lorentzian(tol)?;
    let values = (0..s.grid().len())
        .into_par_iter()
        .map(|p| conformal_factor_at(n, data.grad.at(p), &data.hess.dense(p)))
        .collect();
    Ok(ScalarField::from_raw(s.grid().clone(), values))
}

/// First-order coefficients `b^j` of `L_u = Psi(u) (box_m + b . d)`, `n = 2`.
pub fn first_order_coeffs_n2<T: Real>(
    s: &GraphSurface<T>,
    tol: &Tolerances<T>,
) -> Result<VectorField<T>> {
    let n = s.dim();
    require_dim(n, n == 2, "2")?;
    let data = SurfaceData::new(s)?;
    data.check_lorentzian(tol)?;
    let dm = s.hessian_derivatives()?;
    let mut values = vec![T::zero(); s.grid().len() * 2];
    for p in 0..s.grid().len() {
        let dms: Vec<Vec<T>> = dm.iter().map(|d| d.dense(p)).collect();
        let m = data.hess.dense(p);
        let b = first_order_n2_at(data.grad.at(p), &m, &dms, tol.det_floor).ok_or(
            Error::SingularHessian {
                index: p,
                det: linalg::determinant(2, &m).as_f64(),
            },
        )?;
        values[2 * p] = b[0];
        values[2 * p + 1] = b[1];
    }
    Ok(VectorField::from_raw(s.grid().clone(), values))
}

/// Pointwise inverse of a matrix field.
pub fn inverse_field<T: Real>(
    g: &SymmetricMatrixField<T>,
    det_floor: T,
) -> Result<SymmetricMatrixField<T>> {
    let n = g.dim();
    let w = packed_len(n);
    let mut values = vec![T::zero(); g.grid().len() * w];
    for p in 0..g.grid().len() {
        let d = g.dense(p);
        let inv = linalg::inverse(n, &d, det_floor).ok_or(Error::SingularMetric {
            index: p,
            det: linalg::determinant(n, &d).as_f64(),
        })?;
        values[p * w..(p + 1) * w].copy_from_slice(&pack(n, &inv));
    }
    Ok(SymmetricMatrixField::from_raw(g.grid().clone(), values))
}

/// `sqrt(|det g|)`.
pub fn volume_density<T: Real>(g: &SymmetricMatrixField<T>, det_floor: T) -> Result<ScalarField<T>> {
    let n = g.dim();
    let mut values = Vec::with_capacity(g.grid().len());
    for p in 0..g.grid().len() {
        let det = linalg::determinant(n, &g.dense(p));
        if !(det.abs() >= det_floor) {
            return Err(Error::SingularMetric {
                index: p,
                det: det.as_f64(),
            });
        }
        values.push(det.abs().sqrt());
    }
    Ok(ScalarField::from_raw(g.grid().clone(), values))
}

/// First-order part of the Laplace-Beltrami operator,
/// `B^j = |det g|^{-1/2} d_i (g^{ij} |det g|^{1/2})`, by finite differences
/// of the assembled densities.
pub fn box_first_order<T: Real>(g: &SymmetricMatrixField<T>, det_floor: T) -> Result<VectorField<T>> {
    let grid = g.grid();
    let n = g.dim();
    let ginv = inverse_field(g, det_floor)?;
    let vol = volume_density(g, det_floor)?;
    let mut out = vec![T::zero(); grid.len() * n];
    for j in 0..n {
        for i in 0..n {
            let density: Vec<T> = (0..grid.len())
                .map(|p| ginv.get(p, i, j) * vol.at(p))
                .collect();
            let d = fd::diff1(grid, &density, i)?;
            for p in 0..grid.len() {
                out[p * n + j] = out[p * n + j] + d[p] / vol.at(p);
            }
        }
    }
    Ok(VectorField::from_raw(grid.clone(), out))
}

/// Laplace-Beltrami operator `box_g v` with metric terms differentiated on
/// the grid.
pub fn apply_box<T: Real>(
    g: &SymmetricMatrixField<T>,
    v: &ScalarField<T>,
    det_floor: T,
) -> Result<ScalarField<T>> {
    g.grid().check_same(v.grid(), "apply_box")?;
    let n = g.dim();
    let ginv = inverse_field(g, det_floor)?;
    let b = box_first_order(g, det_floor)?;
    let dv = fd::gradient(v)?;
    let d2v = fd::hessian(v)?;
    let values = (0..g.grid().len())
        .into_par_iter()
        .map(|p| {
            let principal = linalg::trace_product(n, &ginv.dense(p), &d2v.dense(p));
            principal + linalg::dot(b.at(p), dv.at(p))
        })
        .collect();
    Ok(ScalarField::from_raw(g.grid().clone(), values))
}

/// Divergence of the cofactor matrix of `D^2u`, column by column. Vanishes
/// identically for smooth `u`; on the grid it measures the differentiation
/// error.
pub fn cofactor_divergence<T: Real>(s: &GraphSurface<T>) -> Result<VectorField<T>> {
    let grid = s.grid();
    let n = s.dim();
    let hess = s.hessian()?;
    let cof: Vec<Vec<T>> = (0..grid.len())
        .map(|p| linalg::adjugate(n, &hess.dense(p)))
        .collect();
    let mut out = vec![T::zero(); grid.len() * n];
    for j in 0..n {
        for i in 0..n {
            let entry: Vec<T> = cof.iter().map(|c| c[i * n + j]).collect();
            let d = fd::diff1(grid, &entry, i)?;
            for p in 0..grid.len() {
                out[p * n + j] = out[p * n + j] + d[p];
            }
        }
    }
    Ok(VectorField::from_raw(grid.clone(), out))
}
