//! Reference problems shared by the convergence harness, the command-line
//! driver and the acceptance suite.

use crate::error::Result;
use crate::field::ScalarField;
use crate::foliation::{build_slab_domain_with, FoliatedDomain, SlabOptions, TrimRule};
use crate::geometry::{self, linearized_at, Tolerances};
use crate::grid::GridSpec;
use crate::linear::{self, CauchyData, LinearOptions, LinearSolveReport};
use crate::nonlinear::NonlinearProblem;
use crate::scalar::Real;
use crate::surface::{Bump, Catalog, GraphSurface};

/// Time-first slab `[t0, t0 + t_len] x [-half, half]^(dim-1)` with `cells`
/// spatial cells and the time step `cfl * h`.
pub fn slab_grid<T: Real>(dim: usize, cells: usize, half: T, t0: T, t_len: T, cfl: T) -> Result<GridSpec<T>> {
    let h = T::two() * half / T::lit(cells as f64);
    let steps = (t_len / (cfl * h)).ceil().to_usize().unwrap_or(1).max(1);
    let mut origin = vec![t0];
    let mut spacing = vec![t_len / T::lit(steps as f64)];
    let mut points = vec![steps + 1];
    for _ in 1..dim {
        origin.push(-half);
        spacing.push(h);
        points.push(cells + 1);
    }
    GridSpec::new(origin, spacing, points)
}

/// Solver domain for the hyperbolic paraboloid on `grid`.
pub fn paraboloid_domain<T: Real>(u: &GraphSurface<T>, tol: &Tolerances<T>) -> Result<FoliatedDomain<T>> {
    let metric = linear::wave_form(u, tol)?.coefficients.metric;
    build_slab_domain_with(u.grid(), &metric, SlabOptions { trim: TrimRule::StencilReach, ..Default::default() })
}

/// `v* = sin(t) cos(x_1)`, plus `x_2^2 (1 + t) / 4` in three dimensions.
pub fn manufactured_jet<T: Real>(x: &[T]) -> (T, Vec<T>, Vec<T>) {
    let n = x.len();
    let (t, y) = (x[0], x[1]);
    let mut val = t.sin() * y.cos();
    let mut grad = vec![T::zero(); n];
    grad[0] = t.cos() * y.cos();
    grad[1] = -t.sin() * y.sin();
    let mut hess = vec![T::zero(); n * n];
    hess[0] = -t.sin() * y.cos();
    hess[1] = -t.cos() * y.sin();
    hess[n] = hess[1];
    hess[n + 1] = -t.sin() * y.cos();
    if n == 3 {
        let q = T::lit(0.25);
        let z = x[2];
        val = val + q * z * z * (T::one() + t);
        grad[2] = T::lit(0.5) * z * (T::one() + t);
        grad[0] = grad[0] + q * z * z;
        hess[8] = T::lit(0.5) * (T::one() + t);
        hess[2] = T::lit(0.5) * z;
        hess[6] = hess[2];
    }
    (val, grad, hess)
}

/// Linear problem on the hyperbolic paraboloid whose exact solution is
/// [`manufactured_jet`].
#[derive(Clone, Debug)]
pub struct LinearScenario<T: Real> {
    pub u: GraphSurface<T>,
    pub domain: FoliatedDomain<T>,
    pub source: ScalarField<T>,
    pub data: CauchyData<T>,
    pub exact: ScalarField<T>,
}

impl<T: Real> LinearScenario<T> {
    /// Slab `t in [0, t_end]`, `|x_i| <= half`, time step at 0.9 of the
    /// stability limit.
    pub fn new(dim: usize, cells: usize, half: T, t_end: T, tol: &Tolerances<T>) -> Result<Self> {
        let cfl = T::lit(0.9) / T::lit((dim - 1) as f64).sqrt();
        let grid = slab_grid(dim, cells, half, T::zero(), t_end, cfl)?;
        let u = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim }, &grid)?;
        let domain = paraboloid_domain(&u, tol)?;
        let du = u.gradient()?;
        let d2u = u.hessian()?;
        let mut src = Vec::with_capacity(grid.len());
        for p in 0..grid.len() {
            let (_, g, h) = manufactured_jet(&grid.coords(p));
            src.push(linearized_at(dim, du.at(p), &d2u.dense(p), &g, &h, tol.det_floor).unwrap_or(T::zero()));
        }
        let source = ScalarField::new(grid.clone(), src)?;
        let metric = linear::wave_form(&u, tol)?.coefficients.metric;
        let data = CauchyData::from_function(&domain, &metric, |x| {
            let (v, g, _) = manufactured_jet(x);
            (v, g)
        })?;
        let exact = ScalarField::from_fn(&grid, |x| manufactured_jet(x).0);
        Ok(Self { u, domain, source, data, exact })
    }

    pub fn spacing(&self) -> T {
        self.u.grid().spacing(1)
    }

    /// Solves and returns the max error over the domain.
    pub fn solve(&self, opts: &LinearOptions<T>) -> Result<(T, LinearSolveReport<T>)> {
        let r = linear::solve_linear(&self.u, &self.source, &self.data, &self.domain, opts)?;
        let err = r.v.sub(&self.exact)?.max_abs_where(self.domain.inside_mask());
        Ok((err, r))
    }
}

/// `u* = u_S + bump` on the planar paraboloid: `x in [-7.5, 7.5]`,
/// `t in [0, 2.8]`, bump radius 1.2 centred at `(1.4, 0)`.
#[derive(Clone, Debug)]
pub struct NonlinearScenario<T: Real> {
    pub base: GraphSurface<T>,
    pub domain: FoliatedDomain<T>,
    pub eta: ScalarField<T>,
    pub exact: ScalarField<T>,
}

impl<T: Real> NonlinearScenario<T> {
    pub fn new(cells: usize, amplitude: T) -> Result<Self> {
        let grid = slab_grid(2, cells, T::lit(7.5), T::zero(), T::lit(2.8), T::lit(0.75))?;
        let base = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim: 2 }, &grid)?;
        let bump = Bump::new(amplitude, vec![T::lit(1.4), T::zero()], T::lit(1.2), 6);
        let star = GraphSurface::analytic(Catalog::PerturbedParaboloid { bump }, &grid)?;
        let eta = geometry::psi(&star)?.sub(&geometry::psi(&base)?)?;
        let domain = paraboloid_domain(&base, &Tolerances::default())?;
        Ok(Self { base, domain, eta, exact: star.u().clone() })
    }

    pub fn problem(&self) -> NonlinearProblem<T> {
        NonlinearProblem::new(self.base.clone(), self.eta.clone(), self.domain.clone())
    }

    pub fn error(&self, u: &ScalarField<T>) -> Result<T> {
        Ok(u.sub(&self.exact)?.max_abs_where(self.domain.inside_mask()))
    }
}

/// Determinant floor used on the localization slab: the metric of the
/// three-dimensional paraboloid decays like `(1 + r^2)^{-15}` at its corners.
pub const LOCALIZATION_DET_FLOOR: f64 = 1e-20;

/// Paraboloid slab `t in [-0.7, 0.7]`, `|x_i| <= 2.5` with a radius 0.5 bump
/// at the origin.
#[derive(Clone, Debug)]
pub struct LocalizationScenario<T: Real> {
    pub u: GraphSurface<T>,
    pub domain: FoliatedDomain<T>,
    pub phi: Bump<T>,
    pub h: T,
    pub options: LinearOptions<T>,
}

impl<T: Real> LocalizationScenario<T> {
    pub fn new(dim: usize, cells: usize) -> Result<Self> {
        let tol = Tolerances { det_floor: T::lit(LOCALIZATION_DET_FLOOR), ..Default::default() };
        let grid = slab_grid(dim, cells, T::lit(2.5), T::lit(-0.7), T::lit(1.4), T::lit(0.6))?;
        let u = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim }, &grid)?;
        let domain = paraboloid_domain(&u, &tol)?;
        Ok(Self {
            h: grid.spacing(1),
            u,
            domain,
            phi: Bump::new(T::one(), vec![T::zero(); dim], T::lit(0.5), 6),
            options: LinearOptions { tolerances: tol, ..Default::default() },
        })
    }

    /// The `5 h^2` threshold.
    pub fn threshold(&self) -> f64 {
        5.0 * self.h.as_f64().powi(2)
    }
}
