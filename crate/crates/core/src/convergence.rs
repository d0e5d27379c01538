//! Grid-refinement studies for the discrete identities and solvers.
//!
//! Each registered check maps a resolution (cells per axis) to a scalar error;
//! the harness fits the log-log slope of error against spacing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{self, Tolerances};
use crate::grid::GridSpec;
use crate::linear::LinearOptions;
use crate::scenario::LinearScenario;
use crate::surface::{Bump, Catalog, GraphSurface};

/// Errors at or below this level are treated as exact.
pub const EXACT_THRESHOLD: f64 = 1e-12;

pub const CHECKS: &[&str] = &[
    "conformal-identity",
    "curvature-fd",
    "gradient-fd",
    "hessian-fd",
    "n2-identity",
    "linear-manufactured",
    "cofactor-divergence",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Order {
    Exact,
    Fitted(f64),
}

impl Order {
    pub fn at_least(&self, p: f64) -> bool {
        match self {
            Order::Exact => true,
            Order::Fitted(q) => *q >= p,
        }
    }
}

impl std::fmt::Display for Order {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Order::Exact => f.write_str("exact"),
            Order::Fitted(p) => write!(f, "{p:.3}"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Exact => s.serialize_str("exact"),
            Order::Fitted(p) => s.serialize_f64(*p),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Level {
    pub cells: usize,
    pub h: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub check: String,
    pub seed: u64,
    pub levels: Vec<Level>,
    pub order: Order,
}

/// Least-squares slope of `ln e` against `ln h`.
pub fn fit_order(h: &[f64], e: &[f64]) -> Result<Order> {
    if h.len() != e.len() || h.len() < 2 {
        return Err(Error::InvalidArgument("need at least two levels".into()));
    }
    if e.iter().all(|&x| x <= EXACT_THRESHOLD) {
        return Ok(Order::Exact);
    }
    if e.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidArgument("mixed zero and nonzero errors".into()));
    }
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|x| x.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(Order::Fitted(sxy / sxx))
}

/// Random polynomial of total degree at most `degree` with coefficients in
/// `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct Polynomial {
    terms: Vec<(Vec<u32>, f64)>,
}

impl Polynomial {
    pub fn random(dim: usize, degree: u32, rng: &mut impl Rng) -> Self {
        let mut terms = Vec::new();
        let mut exps = vec![0u32; dim];
        loop {
            if exps.iter().sum::<u32>() <= degree {
                terms.push((exps.clone(), rng.gen_range(-1.0..=1.0)));
            }
            let mut a = 0;
            loop {
                if a == dim {
                    return Self { terms };
                }
                exps[a] += 1;
                if exps[a] <= degree {
                    break;
                }
                exps[a] = 0;
                a += 1;
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }
}

/// Collar excluded from interior maxima, as a fraction of each axis extent.
/// It is fixed in physical units so every level is measured on the same
/// region.
pub const COLLAR: f64 = 1.0 / 16.0;

fn in_interior(g: &GridSpec<f64>, p: usize) -> bool {
    (0..g.dim()).all(|a| {
        let x = g.coord(p, a) - g.origin(a);
        x.min(g.extent(a) - x) >= COLLAR * g.extent(a) * (1.0 - 1e-9)
    })
}

fn interior_max(f: &ScalarField<f64>) -> f64 {
    let g = f.grid();
    (0..g.len()).filter(|&p| in_interior(g, p)).map(|p| f.at(p).abs()).fold(0.0, f64::max)
}

fn perturbed(dim: usize, grid: &GridSpec<f64>) -> Result<GraphSurface<f64>> {
    let bump = Bump::new(0.02, vec![0.1; dim], 0.8, 6);
    GraphSurface::analytic(Catalog::PerturbedParaboloid { bump }, grid)
}

fn conformal_identity(cells: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = GridSpec::cube(3, -0.5, 0.5, cells)?;
    let s = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim: 3 }, &grid)?;
    let tol = Tolerances::default();
    let g = geometry::lorentzian_metric(&s, &tol)?;
    let f = geometry::conformal_factor(&s, &tol)?;
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let poly = Polynomial::random(3, 4, rng);
        let v = ScalarField::from_fn(&grid, |x| poly.eval(x));
        let lhs = geometry::apply_box(&g, &v, tol.det_floor)?;
        let rhs = geometry::apply_linearized(&s, &v, &tol)?;
        let defect = lhs.zip_with(&f.zip_with(&rhs, |a, b| a * b)?, |a, b| a - b)?;
        worst = worst.max(interior_max(&defect));
    }
    Ok(worst)
}

fn n2_identity(cells: usize, rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = GridSpec::cube(2, -1.0, 1.0, cells)?;
    let s = perturbed(2, &grid)?;
    let tol = Tolerances::default();
    let m = s.hessian()?;
    let b = geometry::first_order_coeffs_n2(&s, &tol)?;
    let psi = geometry::psi(&s)?;
    let poly = Polynomial::random(2, 4, rng);
    let v = ScalarField::from_fn(&grid, |x| poly.eval(x));
    let boxed = geometry::apply_box(&m, &v, tol.det_floor)?;
    let dv = crate::fd::gradient(&v)?;
    let lin = geometry::apply_linearized(&s, &v, &tol)?;
    let defect = ScalarField::from_fn(&grid, |_| 0.0);
    let vals: Vec<f64> = (0..grid.len())
        .map(|p| {
            let first: f64 = b.at(p).iter().zip(dv.at(p)).map(|(x, y)| x * y).sum();
            psi.at(p) * (boxed.at(p) + first) - lin.at(p)
        })
        .collect();
    let defect = ScalarField::new(defect.grid().clone(), vals)?;
    Ok(interior_max(&defect))
}

/// Worst of the planar and spatial cases.
fn curvature_fd(cells: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let grid = GridSpec::cube(dim, -1.0, 1.0, cells)?;
        let s = perturbed(dim, &grid)?;
        let exact = geometry::psi(&s)?;
        let approx = geometry::psi(&s.to_finite_difference())?;
        worst = worst.max(approx.sub(&exact)?.max_abs());
    }
    Ok(worst)
}

fn trig(x: &[f64]) -> f64 {
    x[0].sin() * x[1].sin()
}

fn gradient_fd(cells: usize) -> Result<f64> {
    let grid = GridSpec::cube(2, 0.0, 1.0, cells)?;
    let g = crate::fd::gradient(&ScalarField::from_fn(&grid, trig))?;
    let mut err: f64 = 0.0;
    for p in 0..grid.len() {
        let x = grid.coords(p);
        let exact = [x[0].cos() * x[1].sin(), x[0].sin() * x[1].cos()];
        for a in 0..2 {
            err = err.max((g.at(p)[a] - exact[a]).abs());
        }
    }
    Ok(err)
}

fn hessian_fd(cells: usize) -> Result<f64> {
    let grid = GridSpec::cube(2, 0.0, 1.0, cells)?;
    let h = crate::fd::hessian(&ScalarField::from_fn(&grid, trig))?;
    let mut err: f64 = 0.0;
    for p in 0..grid.len() {
        let x = grid.coords(p);
        let exact = [-trig(&x), x[0].cos() * x[1].cos(), x[0].cos() * x[1].cos(), -trig(&x)];
        for (a, e) in exact.iter().enumerate() {
            err = err.max((h.get(p, a / 2, a % 2) - e).abs());
        }
    }
    Ok(err)
}

fn cofactor_divergence(cells: usize) -> Result<f64> {
    let grid = GridSpec::cube(2, -1.0, 1.0, cells)?;
    let s = perturbed(2, &grid)?;
    Ok(geometry::cofactor_divergence(&s)?
        .values()
        .chunks(2)
        .enumerate()
        .filter(|(p, _)| in_interior(&grid, *p))
        .flat_map(|(_, c)| c.iter().map(|x| x.abs()))
        .fold(0.0, f64::max))
}

fn linear_manufactured(cells: usize) -> Result<f64> {
    let s = LinearScenario::<f64>::new(2, cells, 2.0, 1.0, &Tolerances::default())?;
    Ok(s.solve(&LinearOptions::default())?.0)
}

/// Spacing of the grid a check builds at `cells`.
fn spacing(check: &str, cells: usize) -> f64 {
    match check {
        "conformal-identity" | "gradient-fd" | "hessian-fd" => 1.0 / cells as f64,
        "linear-manufactured" => 4.0 / cells as f64,
        _ => 2.0 / cells as f64,
    }
}

pub fn run_check(check: &str, levels: &[usize], seed: u64) -> Result<ConvergenceReport> {
    if !CHECKS.contains(&check) {
        return Err(Error::UnknownCheck(check.to_string()));
    }
    if levels.len() < 2 || levels.iter().any(|&c| c < 4) {
        return Err(Error::InvalidArgument("levels must list at least two resolutions of >= 4 cells".into()));
    }
    let mut out = Vec::with_capacity(levels.len());
    for &cells in levels {
        // Same polynomials at every level.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let error = match check {
            "conformal-identity" => conformal_identity(cells, &mut rng)?,
            "curvature-fd" => curvature_fd(cells)?,
            "gradient-fd" => gradient_fd(cells)?,
            "hessian-fd" => hessian_fd(cells)?,
            "n2-identity" => n2_identity(cells, &mut rng)?,
            "linear-manufactured" => linear_manufactured(cells)?,
            _ => cofactor_divergence(cells)?,
        };
        out.push(Level { cells, h: spacing(check, cells), error });
    }
    let hs: Vec<f64> = out.iter().map(|l| l.h).collect();
    let es: Vec<f64> = out.iter().map(|l| l.error).collect();
    Ok(ConvergenceReport { check: check.to_string(), seed, order: fit_order(&hs, &es)?, levels: out })
}
