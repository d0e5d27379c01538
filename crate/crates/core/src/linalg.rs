//! Small dense matrix kernels evaluated once per grid point.
//!
//! Matrices are row-major `n x n` slices. For `n <= 3` determinants and
//! inverses use the cofactor formulas; larger sizes fall back to Gaussian
//! elimination with partial pivoting.

use crate::scalar::Real;

pub fn determinant<T: Real>(n: usize, a: &[T]) -> T {
    match n {
        1 => a[0],
        2 => a[0] * a[3] - a[1] * a[2],
        3 => {
            a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6])
                + a[2] * (a[3] * a[7] - a[4] * a[6])
        }
        _ => lu_determinant(n, a),
    }
}

fn lu_determinant<T: Real>(n: usize, a: &[T]) -> T {
    let mut m = a.to_vec();
    let mut det = T::one();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| {
                m[r * n + col]
                    .abs()
                    .partial_cmp(&m[s * n + col].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(col);
        if m[pivot * n + col] == T::zero() {
            return T::zero();
        }
        if pivot != col {
            for k in 0..n {
                m.swap(pivot * n + k, col * n + k);
            }
            det = -det;
        }
        let d = m[col * n + col];
        det = det * d;
        for r in col + 1..n {
            let f = m[r * n + col] / d;
            for k in col..n {
                let v = m[col * n + k];
                m[r * n + k] = m[r * n + k] - f * v;
            }
        }
    }
    det
}

/// Adjugate (transposed cofactor matrix), so that `a * adj(a) = det(a) I`.
pub fn adjugate<T: Real>(n: usize, a: &[T]) -> Vec<T> {
    match n {
        1 => vec![T::one()],
        2 => vec![a[3], -a[1], -a[2], a[0]],
        3 => vec![
            a[4] * a[8] - a[5] * a[7],
            a[2] * a[7] - a[1] * a[8],
            a[1] * a[5] - a[2] * a[4],
            a[5] * a[6] - a[3] * a[8],
            a[0] * a[8] - a[2] * a[6],
            a[2] * a[3] - a[0] * a[5],
            a[3] * a[7] - a[4] * a[6],
            a[1] * a[6] - a[0] * a[7],
            a[0] * a[4] - a[1] * a[3],
        ],
        _ => {
            let det = determinant(n, a);
            inverse_gauss_jordan(n, a)
                .map(|inv| inv.into_iter().map(|v| v * det).collect())
                .unwrap_or_else(|| vec![T::zero(); n * n])
        }
    }
}

/// Inverse, or `None` when `|det| <= floor`.
pub fn inverse<T: Real>(n: usize, a: &[T], floor: T) -> Option<Vec<T>> {
    let det = determinant(n, a);
    if !(det.abs() > floor) {
        return None;
    }
    if n <= 3 {
        Some(adjugate(n, a).into_iter().map(|v| v / det).collect())
    } else {
        inverse_gauss_jordan(n, a)
    }
}

/// Gauss-Jordan inverse with partial pivoting, without a determinant floor.
pub fn inverse_gauss_jordan<T: Real>(n: usize, a: &[T]) -> Option<Vec<T>> {
    let mut m = a.to_vec();
    let mut inv = identity::<T>(n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            m[r * n + col]
                .abs()
                .partial_cmp(&m[s * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if m[pivot * n + col] == T::zero() {
            return None;
        }
        for k in 0..n {
            m.swap(pivot * n + k, col * n + k);
            inv.swap(pivot * n + k, col * n + k);
        }
        let d = m[col * n + col];
        for k in 0..n {
            m[col * n + k] = m[col * n + k] / d;
            inv[col * n + k] = inv[col * n + k] / d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r * n + col];
                for k in 0..n {
                    m[r * n + k] = m[r * n + k] - f * m[col * n + k];
                    inv[r * n + k] = inv[r * n + k] - f * inv[col * n + k];
                }
            }
        }
    }
    Some(inv)
}

pub fn identity<T: Real>(n: usize) -> Vec<T> {
    let mut m = vec![T::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = T::one();
    }
    m
}

/// `tr(a b)` for row-major `a`, `b`.
pub fn trace_product<T: Real>(n: usize, a: &[T], b: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..n {
        for k in 0..n {
            s = s + a[i * n + k] * b[k * n + i];
        }
    }
    s
}

pub fn mat_vec<T: Real>(n: usize, a: &[T], x: &[T]) -> Vec<T> {
    (0..n)
        .map(|i| (0..n).map(|k| a[i * n + k] * x[k]).sum())
        .collect()
}

pub fn dot<T: Real>(x: &[T], y: &[T]) -> T {
    x.iter().zip(y).map(|(&a, &b)| a * b).sum()
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn symmetric_eigenvalues<T: Real>(n: usize, a: &[T]) -> Vec<T> {
    let mut m = a.to_vec();
    let tiny = T::epsilon() * T::epsilon();
    for _sweep in 0..64 {
        let mut off = T::zero();
        for i in 0..n {
            for j in i + 1..n {
                off = off + m[i * n + j] * m[i * n + j];
            }
        }
        let scale: T = (0..n).map(|i| m[i * n + i] * m[i * n + i]).sum::<T>() + off;
        if off <= tiny * scale || off == T::zero() {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == T::zero() {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (T::two() * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<T> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}
