//! Graph surfaces `x -> u(x)` with analytic or finite-difference derivatives.
//!
//! Catalog surfaces carry closed-form derivatives up to third order so that
//! identity checks isolate the discretization error of the PDE operators from
//! the error of differentiating `u` itself.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::field::{packed_len, ScalarField, SymmetricMatrixField, VectorField};
use crate::grid::GridSpec;
use crate::scalar::Real;

/// Compactly supported polynomial bump `A (1 - |x - c|^2 / R^2)^k`.
///
/// The profile is `C^{k-1}`; `k >= 5` keeps every stencil used here in its
/// asymptotic regime.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bump<T: Real> {
    pub amplitude: T,
    pub center: Vec<T>,
    pub radius: T,
    pub power: u32,
}

/// Value and derivatives of a function at one point. `hess` is dense
/// row-major `n x n`, `third` is `n x n x n` with index `(i * n + j) * n + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<T: Real> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Vec<T>,
    pub third: Vec<T>,
}

impl<T: Real> Jet<T> {
    fn zero(n: usize) -> Self {
        Self {
            value: T::zero(),
            grad: vec![T::zero(); n],
            hess: vec![T::zero(); n * n],
            third: vec![T::zero(); n * n * n],
        }
    }

    fn add(&mut self, other: &Jet<T>) {
        self.value = self.value + other.value;
        for (a, b) in self.grad.iter_mut().zip(&other.grad) {
            *a = *a + *b;
        }
        for (a, b) in self.hess.iter_mut().zip(&other.hess) {
            *a = *a + *b;
        }
        for (a, b) in self.third.iter_mut().zip(&other.third) {
            *a = *a + *b;
        }
    }
}

impl<T: Real> Bump<T> {
    pub fn new(amplitude: T, center: Vec<T>, radius: T, power: u32) -> Self {
        Self {
            amplitude,
            center,
            radius,
            power,
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn value(&self, x: &[T]) -> T {
        let s = self.normalized_sq(x);
        if s >= T::one() {
            T::zero()
        } else {
            self.amplitude * (T::one() - s).powi(self.power as i32)
        }
    }

    /// True when `x` lies in the open support.
    pub fn contains(&self, x: &[T]) -> bool {
        self.normalized_sq(x) < T::one()
    }

    fn normalized_sq(&self, x: &[T]) -> T {
        let r2 = self.radius * self.radius;
        x.iter()
            .zip(&self.center)
            .map(|(&a, &c)| (a - c) * (a - c))
            .sum::<T>()
            / r2
    }

    /// Derivatives up to third order, from `b = A w^k` with
    /// `w = 1 - |y|^2/R^2`, `w_i = -2 y_i / R^2`, `w_ij = -2 delta_ij / R^2`.
    pub fn jet(&self, x: &[T]) -> Jet<T> {
        let n = self.dim();
        let mut jet = Jet::zero(n);
        let s = self.normalized_sq(x);
        if s >= T::one() {
            return jet;
        }
        let k = self.power as i32;
        let kf = T::from_count(self.power as usize);
        let r2 = self.radius * self.radius;
        let w = T::one() - s;
        let wi: Vec<T> = x
            .iter()
            .zip(&self.center)
            .map(|(&a, &c)| -T::two() * (a - c) / r2)
            .collect();
        let wij = -T::two() / r2;
        let a = self.amplitude;
        let pw = |e: i32| if k - e < 0 { T::zero() } else { w.powi(k - e) };
        let c1 = a * kf * pw(1);
        let c2 = a * kf * (kf - T::one()) * pw(2);
        let c3 = a * kf * (kf - T::one()) * (kf - T::two()) * pw(3);
        let d = |i: usize, j: usize| if i == j { wij } else { T::zero() };
        jet.value = a * pw(0);
        for i in 0..n {
            jet.grad[i] = c1 * wi[i];
            for j in 0..n {
                jet.hess[i * n + j] = c2 * wi[i] * wi[j] + c1 * d(i, j);
                for l in 0..n {
                    jet.third[(i * n + j) * n + l] = c3 * wi[i] * wi[j] * wi[l]
                        + c2 * (d(i, l) * wi[j] + wi[i] * d(j, l) + d(i, j) * wi[l]);
                }
            }
        }
        jet
    }
}

/// Surfaces with closed-form derivatives. The first coordinate is the
/// timelike direction of the hyperbolic paraboloid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Catalog<T: Real> {
    /// `u = (|x|^2 - t^2) / 2` in `dim` variables `(t, x_1, ..)`.
    HyperbolicParaboloid { dim: usize },
    /// `u = sum_i c_i x_i^2 / 2`.
    QuadraticForm { coeffs: Vec<T> },
    /// Hyperbolic paraboloid plus a compact bump.
    PerturbedParaboloid { bump: Bump<T> },
}

impl<T: Real> Catalog<T> {
    pub fn dim(&self) -> usize {
        match self {
            Catalog::HyperbolicParaboloid { dim } => *dim,
            Catalog::QuadraticForm { coeffs } => coeffs.len(),
            Catalog::PerturbedParaboloid { bump } => bump.dim(),
        }
    }

    pub fn jet(&self, x: &[T]) -> Jet<T> {
        let n = self.dim();
        match self {
            Catalog::HyperbolicParaboloid { .. } => paraboloid_jet(x),
            Catalog::QuadraticForm { coeffs } => {
                let mut jet = Jet::zero(n);
                for i in 0..n {
                    jet.value = jet.value + T::half() * coeffs[i] * x[i] * x[i];
                    jet.grad[i] = coeffs[i] * x[i];
                    jet.hess[i * n + i] = coeffs[i];
                }
                jet
            }
            Catalog::PerturbedParaboloid { bump } => {
                let mut jet = paraboloid_jet(x);
                jet.add(&bump.jet(x));
                jet
            }
        }
    }

    pub fn value(&self, x: &[T]) -> T {
        match self {
            Catalog::PerturbedParaboloid { bump } => paraboloid_value(x) + bump.value(x),
            _ => self.jet(x).value,
        }
    }
}

fn paraboloid_value<T: Real>(x: &[T]) -> T {
    let spatial: T = x[1..].iter().map(|&v| v * v).sum();
    T::half() * (spatial - x[0] * x[0])
}

fn paraboloid_jet<T: Real>(x: &[T]) -> Jet<T> {
    let n = x.len();
    let mut jet = Jet::zero(n);
    jet.value = paraboloid_value(x);
    jet.grad[0] = -x[0];
    jet.hess[0] = -T::one();
    for i in 1..n {
        jet.grad[i] = x[i];
        jet.hess[i * n + i] = T::one();
    }
    jet
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum DerivativeMode<T: Real> {
    Analytic(Catalog<T>),
    FiniteDifference,
}

/// Graph of `u` over the grid, with the rule used to differentiate it.
#[derive(Clone, Debug)]
pub struct GraphSurface<T: Real> {
    u: ScalarField<T>,
    mode: DerivativeMode<T>,
}

impl<T: Real> GraphSurface<T> {
    pub fn analytic(catalog: Catalog<T>, grid: &GridSpec<T>) -> Result<Self> {
        if catalog.dim() != grid.dim() {
            return Err(Error::DimensionError {
                expected: format!("{}", catalog.dim()),
                got: grid.dim(),
            });
        }
        let u = ScalarField::from_fn(grid, |x| catalog.value(x));
        Ok(Self {
            u,
            mode: DerivativeMode::Analytic(catalog),
        })
    }

    pub fn finite_difference(u: ScalarField<T>) -> Self {
        Self {
            u,
            mode: DerivativeMode::FiniteDifference,
        }
    }

    /// The same samples differentiated by finite differences.
    pub fn to_finite_difference(&self) -> Self {
        Self::finite_difference(self.u.clone())
    }

    pub fn u(&self) -> &ScalarField<T> {
        &self.u
    }

    pub fn grid(&self) -> &GridSpec<T> {
        self.u.grid()
    }

    pub fn dim(&self) -> usize {
        self.u.grid().dim()
    }

    pub fn mode(&self) -> &DerivativeMode<T> {
        &self.mode
    }

    pub fn gradient(&self) -> Result<VectorField<T>> {
        match &self.mode {
            DerivativeMode::Analytic(c) => Ok(VectorField::from_fn(self.grid(), |x, out| {
                out.copy_from_slice(&c.jet(x).grad)
            })),
            DerivativeMode::FiniteDifference => fd::gradient(&self.u),
        }
    }

    pub fn hessian(&self) -> Result<SymmetricMatrixField<T>> {
        match &self.mode {
            DerivativeMode::Analytic(c) => {
                let n = self.dim();
                Ok(SymmetricMatrixField::from_fn(self.grid(), |x, out| {
                    let jet = c.jet(x);
                    let mut k = 0;
                    for i in 0..n {
                        for j in i..n {
                            out[k] = jet.hess[i * n + j];
                            k += 1;
                        }
                    }
                }))
            }
            DerivativeMode::FiniteDifference => fd::hessian(&self.u),
        }
    }

    /// `d_k (D^2 u)` for every axis `k`.
    pub fn hessian_derivatives(&self) -> Result<Vec<SymmetricMatrixField<T>>> {
        let n = self.dim();
        match &self.mode {
            DerivativeMode::Analytic(c) => Ok((0..n)
                .map(|l| {
                    SymmetricMatrixField::from_fn(self.grid(), |x, out| {
                        let jet = c.jet(x);
                        let mut k = 0;
                        for i in 0..n {
                            for j in i..n {
                                out[k] = jet.third[(i * n + j) * n + l];
                                k += 1;
                            }
                        }
                    })
                })
                .collect()),
            DerivativeMode::FiniteDifference => {
                let hess = fd::hessian(&self.u)?;
                differentiate_matrix_field(&hess)
            }
        }
    }
}

/// Entrywise first derivatives of a matrix field along every axis.
pub fn differentiate_matrix_field<T: Real>(
    m: &SymmetricMatrixField<T>,
) -> Result<Vec<SymmetricMatrixField<T>>> {
    let grid = m.grid();
    let n = grid.dim();
    let w = packed_len(n);
    let entries: Vec<Vec<T>> = (0..w)
        .map(|k| (0..grid.len()).map(|p| m.packed(p)[k]).collect())
        .collect();
    (0..n)
        .map(|axis| {
            let mut out = vec![T::zero(); grid.len() * w];
            for (k, entry) in entries.iter().enumerate() {
                let d = fd::diff1(grid, entry, axis)?;
                for (p, v) in d.into_iter().enumerate() {
                    out[p * w + k] = v;
                }
            }
            Ok(SymmetricMatrixField::from_raw(grid.clone(), out))
        })
        .collect()
}
