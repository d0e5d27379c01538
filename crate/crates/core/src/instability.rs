//! Linearized equation around the hyperbolic paraboloid in two dimensions,
//! written in double-null coordinates `zb = t + x`, `z = t - x`:
//!
//! `d_zb d_z v = (z d_zb v + zb d_z v) / (1 + zb^2/2 + z^2/2)`,
//!
//! with data `v(0, z) = z chi(z)` and `v(zb, 0) = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::GridSpec;
use crate::scalar::Real;

fn transition<T: Real>(s: T) -> T {
    if s > T::zero() {
        (-T::one() / s).exp()
    } else {
        T::zero()
    }
}

/// Smooth cutoff equal to 1 on `(-inf, 1]` and 0 on `[2, inf)`.
pub fn cutoff_chi<T: Real>(x: T) -> T {
    let a = transition(T::two() - x);
    let b = transition(x - T::one());
    a / (a + b)
}

/// Characteristic data `z chi(z)` on `zb = 0`.
pub fn initial_profile<T: Real>(z: T) -> T {
    z * cutoff_chi(z)
}

/// Solution values on the lattice `(i delta, j delta)`, `i` along `zb`.
#[derive(Clone, Debug, Serialize)]
pub struct NullGrid<T: Real> {
    pub delta: T,
    /// Lattice points along `zb`.
    pub n_bar: usize,
    /// Lattice points along `z`.
    pub n: usize,
    #[serde(skip)]
    values: Vec<T>,
}

impl<T: Real> NullGrid<T> {
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.n + j]
    }

    pub fn zeta_bar(&self, i: usize) -> T {
        self.delta * T::from_count(i)
    }

    pub fn zeta(&self, j: usize) -> T {
        self.delta * T::from_count(j)
    }

    pub fn extent_bar(&self) -> T {
        self.zeta_bar(self.n_bar - 1)
    }

    pub fn extent(&self) -> T {
        self.zeta(self.n - 1)
    }

    /// Lattice index of a coordinate, if it lies on the lattice.
    pub fn index_of(&self, coord: T) -> Option<usize> {
        let r = coord / self.delta;
        let i = r.round();
        ((r - i).abs() < T::lit(1e-9)).then(|| i.to_usize()).flatten()
    }

    fn bilinear(&self, data: &[T], zb: T, z: T) -> Option<T> {
        let tol = T::lit(1e-12);
        if zb < -tol || z < -tol || zb > self.extent_bar() + tol || z > self.extent() + tol {
            return None;
        }
        let fi = (zb / self.delta).max(T::zero());
        let fj = (z / self.delta).max(T::zero());
        let i = fi.floor().to_usize()?.min(self.n_bar - 2);
        let j = fj.floor().to_usize()?.min(self.n - 2);
        let (a, b) = (fi - T::from_count(i), fj - T::from_count(j));
        let v = |i: usize, j: usize| data[i * self.n + j];
        Some(
            (T::one() - a) * (T::one() - b) * v(i, j)
                + a * (T::one() - b) * v(i + 1, j)
                + (T::one() - a) * b * v(i, j + 1)
                + a * b * v(i + 1, j + 1),
        )
    }

    /// Bilinear interpolation; `None` outside the lattice.
    pub fn value_at(&self, zb: T, z: T) -> Option<T> {
        self.bilinear(&self.values, zb, z)
    }

    fn axis_derivative(&self, along_bar: bool) -> Vec<T> {
        let (nb, n) = (self.n_bar, self.n);
        let mut out = vec![T::zero(); nb * n];
        let h2 = T::two() * self.delta;
        for i in 0..nb {
            for j in 0..n {
                let (k, len) = if along_bar { (i, nb) } else { (j, n) };
                let v = |o: usize| {
                    if along_bar {
                        self.at(o, j)
                    } else {
                        self.at(i, o)
                    }
                };
                out[i * n + j] = if k == 0 {
                    (-T::lit(3.0) * v(0) + T::lit(4.0) * v(1) - v(2)) / h2
                } else if k == len - 1 {
                    (T::lit(3.0) * v(k) - T::lit(4.0) * v(k - 1) + v(k - 2)) / h2
                } else {
                    (v(k + 1) - v(k - 1)) / h2
                };
            }
        }
        out
    }

    /// `d_t v = d_zb v + d_z v`, by lattice differences and interpolation.
    pub fn time_derivative_at(&self, zb: T, z: T) -> Option<T> {
        let db = self.axis_derivative(true);
        let dz = self.axis_derivative(false);
        let sum: Vec<T> = db.iter().zip(&dz).map(|(&a, &b)| a + b).collect();
        self.bilinear(&sum, zb, z)
    }
}

/// Marches the characteristic problem cell by cell with a trapezoidal
/// (second-order) discretization.
pub fn solve_double_null<T: Real>(delta: T, extent: T, extent_bar: T) -> Result<NullGrid<T>> {
    if !(delta > T::zero()) || !(extent > T::zero()) || !(extent_bar > T::zero()) {
        return Err(Error::InvalidArgument("step and extents must be positive".into()));
    }
    let count = |e: T| (e / delta).round().to_usize().map(|c| c + 1);
    let n = count(extent).ok_or_else(|| Error::InvalidArgument("extent".into()))?;
    let n_bar = count(extent_bar).ok_or_else(|| Error::InvalidArgument("extent".into()))?;
    if n < 3 || n_bar < 3 {
        return Err(Error::InvalidArgument("lattice needs at least three points per axis".into()));
    }
    let mut v = vec![T::zero(); n_bar * n];
    for j in 0..n {
        v[j] = initial_profile(delta * T::from_count(j));
    }
    for i in 0..n_bar - 1 {
        let zbc = delta * (T::from_count(i) + T::half());
        for j in 0..n - 1 {
            let zc = delta * (T::from_count(j) + T::half());
            let d = T::one() + zbc * zbc / T::two() + zc * zc / T::two();
            let k = delta / (T::two() * d);
            let a = v[(i + 1) * n + j];
            let b = v[i * n + j + 1];
            let c = v[i * n + j];
            let den = T::one() - k * (zc + zbc);
            if den < T::half() {
                return Err(Error::StepTooLarge { i, j, denominator: den.as_f64() });
            }
            v[(i + 1) * n + j + 1] = (a + b - c + k * (zc * (a - b - c) + zbc * (b - a - c))) / den;
        }
    }
    Ok(NullGrid { delta, n_bar, n, values: v })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthReport {
    pub tol: f64,
    /// Smallest `v / (zeta zeta_bar^2 / 3)` over points of `C` where the bound
    /// is positive.
    pub min_ratio: f64,
    pub worst_point: (f64, f64),
    pub bound_holds: bool,
    /// Smallest `d_z v / (zeta_bar^2 / 3)` over `C` with positive bound.
    pub min_derivative_ratio: f64,
    pub derivative_bound_holds: bool,
    pub min_d_zeta: f64,
    pub min_d_zeta_bar: f64,
    pub signs_hold: bool,
    pub data_consistent: bool,
    /// `v(2, 1)` and `v(8, 1)` when on the lattice.
    pub v_2_1: Option<f64>,
    pub v_8_1: Option<f64>,
    pub passed: bool,
}

/// Checks `v >= (1 - tol) zeta zeta_bar^2 / 3` and the auxiliary derivative
/// bounds on `C = [0, 1] x [0, Zb]` (`zeta` in `[0, 1]`).
pub fn verify_growth_bound<T: Real>(grid: &NullGrid<T>, tol: T) -> GrowthReport {
    let tol_f = tol.as_f64();
    let j_max = grid
        .index_of(T::one())
        .unwrap_or_else(|| (T::one() / grid.delta).floor().to_usize().unwrap_or(0))
        .min(grid.n - 1);
    let delta = grid.delta.as_f64();
    let scale = (0..grid.n_bar)
        .flat_map(|i| (0..=j_max).map(move |j| (i, j)))
        .map(|(i, j)| grid.at(i, j).abs().as_f64())
        .fold(0.0, f64::max);
    let sign_floor = -1e-12 * scale.max(1.0);

    let mut min_ratio = f64::INFINITY;
    let mut worst = (0.0, 0.0);
    let mut min_dratio = f64::INFINITY;
    let mut min_dz = f64::INFINITY;
    let mut min_dzb = f64::INFINITY;
    for i in 0..grid.n_bar {
        let zb = grid.zeta_bar(i).as_f64();
        for j in 0..=j_max {
            let z = grid.zeta(j).as_f64();
            let v = grid.at(i, j).as_f64();
            let bound = z * zb * zb / 3.0;
            if bound > 0.0 {
                let r = v / bound;
                if r < min_ratio {
                    min_ratio = r;
                    worst = (zb, z);
                }
            }
            if j < j_max {
                let dz = (grid.at(i, j + 1).as_f64() - v) / delta;
                min_dz = min_dz.min(dz);
                if zb > 0.0 {
                    min_dratio = min_dratio.min(dz / (zb * zb / 3.0));
                }
            }
            if i + 1 < grid.n_bar {
                let dzb = (grid.at(i + 1, j).as_f64() - v) / delta;
                min_dzb = min_dzb.min(dzb);
            }
        }
    }
    let data_consistent = (0..grid.n).all(|j| grid.at(0, j) == initial_profile(grid.zeta(j)))
        && (0..grid.n_bar).all(|i| grid.at(i, 0) == T::zero());
    let lookup = |zb: f64, z: f64| {
        let i = grid.index_of(T::lit(zb))?;
        let j = grid.index_of(T::lit(z))?;
        (i < grid.n_bar && j < grid.n).then(|| grid.at(i, j).as_f64())
    };
    let bound_holds = min_ratio >= 1.0 - tol_f;
    let derivative_bound_holds = min_dratio >= 1.0 - tol_f;
    let signs_hold = min_dz >= sign_floor && min_dzb >= sign_floor;
    GrowthReport {
        tol: tol_f,
        min_ratio,
        worst_point: worst,
        bound_holds,
        min_derivative_ratio: min_dratio,
        derivative_bound_holds,
        min_d_zeta: min_dz,
        min_d_zeta_bar: min_dzb,
        signs_hold,
        data_consistent,
        v_2_1: lookup(2.0, 1.0),
        v_8_1: lookup(8.0, 1.0),
        passed: bound_holds && derivative_bound_holds && signs_hold && data_consistent,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceSup {
    pub t: f64,
    pub sup_abs: f64,
}

#[derive(Clone, Debug)]
pub struct TxResample<T: Real> {
    /// `v(t, x)` on a `(t, x)` grid; zero where not covered.
    pub field: ScalarField<T>,
    /// Whether `(t + x, t - x)` lies on the null lattice.
    pub covered: Vec<bool>,
    pub sup_per_t: Vec<SliceSup>,
}

/// Resamples onto `t in [0, t_max]`, `x in [-t_max, t_max]` with spacing `h`
/// in both directions.
pub fn to_txcoords<T: Real>(grid: &NullGrid<T>, h: T) -> Result<TxResample<T>> {
    let t_max = grid.extent().min(grid.extent_bar()) / T::two();
    let cells = (t_max / h).round().to_usize().unwrap_or(0).max(1);
    let tx = GridSpec::new(
        vec![T::zero(), -t_max],
        vec![t_max / T::from_count(cells), t_max / T::from_count(cells)],
        vec![cells + 1, 2 * cells + 1],
    )?;
    let mut covered = vec![false; tx.len()];
    let mut values = vec![T::zero(); tx.len()];
    for p in 0..tx.len() {
        let (t, x) = (tx.coord(p, 0), tx.coord(p, 1));
        if let Some(v) = grid.value_at(t + x, t - x) {
            covered[p] = true;
            values[p] = v;
        }
    }
    let sup_per_t = (0..=cells)
        .map(|k| {
            let sup = tx
                .slice(0, k)
                .into_iter()
                .filter(|&p| covered[p])
                .map(|p| values[p].abs().as_f64())
                .fold(0.0, f64::max);
            SliceSup { t: tx.coord(tx.index(&[k, 0]), 0).as_f64(), sup_abs: sup }
        })
        .collect();
    Ok(TxResample {
        field: ScalarField::new(tx, values)?,
        covered,
        sup_per_t,
    })
}

/// `v(t, 0)` against `t^3 / 3` on the diagonal `zeta = zeta_bar = t`.
#[derive(Clone, Debug, Serialize)]
pub struct DiagonalSample {
    pub t: f64,
    pub v: f64,
    pub cubic: f64,
}

pub fn diagonal_growth<T: Real>(grid: &NullGrid<T>) -> Vec<DiagonalSample> {
    let m = grid.n.min(grid.n_bar);
    (0..m)
        .map(|k| {
            let t = grid.zeta(k).as_f64();
            DiagonalSample { t, v: grid.at(k, k).as_f64(), cubic: t * t * t / 3.0 }
        })
        .collect()
}
