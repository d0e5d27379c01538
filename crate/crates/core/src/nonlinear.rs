//! Newton iteration for the prescribed-curvature Cauchy problem
//! `Psi(u) = K_S + eta` with `u = u_S`, `Du = Du_S` on the initial leaf.
//!
//! Curvatures are evaluated with finite differences throughout, so the
//! sampled base surface solves its own discrete equation exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::field::ScalarField;
use crate::foliation::{normal_field, FoliatedDomain};
use crate::geometry::{self, Tolerances};
use crate::linalg;
use crate::linear::{self, CauchyData, LinearOptions};
use crate::scalar::Real;
use crate::surface::GraphSurface;

/// Smoothing applied to each Newton correction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Smoothing<T: Real> {
    Off,
    /// Mollifier half-widths (in physical units) per iteration; the last entry
    /// is reused once the schedule runs out.
    Mollifier(Vec<T>),
}

#[derive(Clone, Debug)]
pub struct NonlinearProblem<T: Real> {
    pub base: GraphSurface<T>,
    pub eta: ScalarField<T>,
    pub domain: FoliatedDomain<T>,
    pub tol: T,
    pub max_iter: usize,
    pub smoothing: Smoothing<T>,
    /// Bound on `sup |eta|`; `None` uses `0.1 min |K_S|` over the domain.
    pub admissibility: Option<T>,
    pub linear: LinearOptions<T>,
}

impl<T: Real> NonlinearProblem<T> {
    pub fn new(base: GraphSurface<T>, eta: ScalarField<T>, domain: FoliatedDomain<T>) -> Self {
        Self {
            base,
            eta,
            domain,
            tol: T::lit(1e-10),
            max_iter: 10,
            smoothing: Smoothing::Off,
            admissibility: None,
            linear: LinearOptions::default(),
        }
    }

    /// Sampled base surface differentiated on the grid.
    pub fn base_fd(&self) -> GraphSurface<T> {
        self.base.to_finite_difference()
    }

    /// `K_S` as seen by the discrete curvature operator.
    pub fn base_curvature(&self) -> Result<ScalarField<T>> {
        geometry::psi(&self.base_fd())
    }

    pub fn target(&self) -> Result<ScalarField<T>> {
        self.base_curvature()?.add(&self.eta)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationReport<T: Real> {
    /// `max |Psi(u_k) - K_target|` over the domain, starting at `k = 0`.
    pub residuals: Vec<f64>,
    /// `r_{k+1} / r_k^2` for consecutive residuals.
    pub quadratic_ratios: Vec<f64>,
    pub signature_preserved: Vec<bool>,
    pub converged: bool,
    /// The last step reduced the residual by less than half: the iteration
    /// has reached the discretization floor.
    pub stalled: bool,
    pub iterations: usize,
    pub admissibility_bound: f64,
    /// `max |u - u_S|` on the initial leaf.
    pub cauchy_value_defect: f64,
    /// `max |N (u - u_S)|` on the initial leaf.
    pub cauchy_normal_defect: f64,
    #[serde(skip)]
    pub u: ScalarField<T>,
}

/// `Psi(u) - K_target`.
pub fn residual<T: Real>(u: &GraphSurface<T>, k_target: &ScalarField<T>) -> Result<ScalarField<T>> {
    geometry::psi(u)?.sub(k_target)
}

fn domain_sup<T: Real>(f: &ScalarField<T>, domain: &FoliatedDomain<T>) -> T {
    f.max_abs_where(domain.inside_mask())
}

/// One Newton correction: solves `L_{u_k} v = -(Psi(u_k) - K)` on the domain
/// with zero Cauchy data and returns `(u_{k+1}, v)`.
pub fn newton_step<T: Real>(
    u: &GraphSurface<T>,
    k_target: &ScalarField<T>,
    domain: &FoliatedDomain<T>,
    opts: &LinearOptions<T>,
) -> Result<(GraphSurface<T>, ScalarField<T>)> {
    let r = residual(u, k_target)?;
    let mask = domain.inside_mask();
    let rhs = ScalarField::new(
        r.grid().clone(),
        r.values()
            .iter()
            .zip(mask)
            .map(|(&x, &m)| if m { -x } else { T::zero() })
            .collect(),
    )?;
    let report = linear::solve_linear(u, &rhs, &CauchyData::zeros(domain), domain, opts)?;
    let next = u.u().add(&report.v)?;
    Ok((GraphSurface::finite_difference(next), report.v))
}

/// Per-leaf spatial mollification of a correction. The first three leaves,
/// which fix the value and normal derivative on the initial leaf, are left
/// untouched.
pub fn mollify<T: Real>(v: &ScalarField<T>, domain: &FoliatedDomain<T>, width: T) -> ScalarField<T> {
    let grid = domain.grid();
    let ta = domain.time_axis();
    let n = grid.dim();
    let spatial: Vec<usize> = (0..n).filter(|&a| a != ta).collect();
    let reach: Vec<isize> = spatial
        .iter()
        .map(|&a| (width / grid.spacing(a)).floor().to_isize().unwrap_or(0))
        .collect();
    if reach.iter().all(|&r| r == 0) {
        return v.clone();
    }
    let mut offsets: Vec<Vec<isize>> = vec![Vec::new()];
    for &r in &reach {
        offsets = offsets
            .into_iter()
            .flat_map(|o| {
                (-r..=r).map(move |d| {
                    let mut o = o.clone();
                    o.push(d);
                    o
                })
            })
            .collect();
    }
    let weights: Vec<T> = offsets
        .iter()
        .map(|o| {
            let s: T = o
                .iter()
                .zip(&spatial)
                .map(|(&d, &a)| {
                    let x = T::from_isize(d).unwrap() * grid.spacing(a) / width;
                    x * x
                })
                .sum();
            if s < T::one() {
                (-T::one() / (T::one() - s)).exp()
            } else {
                T::zero()
            }
        })
        .collect();
    let mut out = v.values().to_vec();
    for k in 3..domain.leaf_count() {
        for p in domain.leaf_points(k) {
            let mut acc = T::zero();
            let mut wsum = T::zero();
            for (o, &w) in offsets.iter().zip(&weights) {
                let mut q = Some(p);
                for (s, &a) in spatial.iter().enumerate() {
                    q = q.and_then(|q| grid.neighbor(q, a, o[s]));
                }
                if let Some(q) = q.filter(|&q| domain.contains(q)) {
                    acc = acc + w * v.at(q);
                    wsum = wsum + w;
                }
            }
            out[p] = acc / wsum;
        }
    }
    ScalarField::new(grid.clone(), out).expect("finite mollified values")
}

pub fn solve_nonlinear<T: Real>(problem: &NonlinearProblem<T>) -> Result<IterationReport<T>> {
    let domain = &problem.domain;
    let mask = domain.inside_mask();
    let k_s = problem.base_curvature()?;
    let bound = problem.admissibility.unwrap_or_else(|| {
        let min_k = (0..k_s.grid().len())
            .filter(|&p| mask[p])
            .map(|p| k_s.at(p).abs())
            .fold(T::infinity(), T::min);
        T::lit(0.1) * min_k
    });
    let eta_norm = domain_sup(&problem.eta, domain);
    if eta_norm > bound {
        return Err(Error::InadmissiblePerturbation {
            norm: eta_norm.as_f64(),
            bound: bound.as_f64(),
        });
    }
    let target = k_s.add(&problem.eta)?;
    let base = problem.base_fd();
    let mut u = base.clone();
    let mut residuals = vec![domain_sup(&residual(&u, &target)?, domain).as_f64()];
    let mut signature_preserved = vec![true];
    let mut converged = residuals[0] <= problem.tol.as_f64();
    let mut iterations = 0;
    let mut stalled = false;
    while !converged && !stalled && iterations < problem.max_iter {
        let (next, v) = match newton_step(&u, &target, domain, &problem.linear) {
            Ok(x) => x,
            Err(Error::NotLorentzian { index }) | Err(Error::SingularHessian { index, .. }) => {
                return Err(Error::SignatureLost { iteration: iterations, index });
            }
            Err(e) => return Err(e),
        };
        let next = match &problem.smoothing {
            Smoothing::Off => next,
            Smoothing::Mollifier(widths) => {
                let w = widths
                    .get(iterations)
                    .or(widths.last())
                    .copied()
                    .unwrap_or(T::zero());
                let smooth = mollify(&v, domain, w);
                GraphSurface::finite_difference(u.u().add(&smooth)?)
            }
        };
        iterations += 1;
        let sig = check_signature(&next, domain, &problem.linear.tolerances);
        signature_preserved.push(sig.is_none());
        if let Some(index) = sig {
            return Err(Error::SignatureLost { iteration: iterations, index });
        }
        u = next;
        let r = domain_sup(&residual(&u, &target)?, domain).as_f64();
        residuals.push(r);
        if !r.is_finite() {
            break;
        }
        converged = r <= problem.tol.as_f64();
        stalled = !converged && r > 0.5 * residuals[residuals.len() - 2];
    }
    let quadratic_ratios = residuals
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / (w[0] * w[0]) } else { 0.0 })
        .collect();
    let (cauchy_value_defect, cauchy_normal_defect) = cauchy_defects(&u, &base, domain)?;
    Ok(IterationReport {
        residuals,
        quadratic_ratios,
        signature_preserved,
        converged,
        stalled,
        iterations,
        admissibility_bound: bound.as_f64(),
        cauchy_value_defect,
        cauchy_normal_defect,
        u: u.u().clone(),
    })
}

/// First domain point where the Hessian is not Lorentzian.
fn check_signature<T: Real>(
    u: &GraphSurface<T>,
    domain: &FoliatedDomain<T>,
    tol: &Tolerances<T>,
) -> Option<usize> {
    let h = u.hessian().ok()?;
    let n = u.dim();
    (0..h.grid().len()).filter(|&p| domain.contains(p)).find(|&p| {
        geometry::classify_matrix(n, &h.dense(p), tol.eig_floor) != geometry::Signature::Lorentzian
    })
}

/// Value and normal-derivative differences on the initial leaf, normal
/// derivatives by grid differences.
pub fn cauchy_defects<T: Real>(
    u: &GraphSurface<T>,
    base: &GraphSurface<T>,
    domain: &FoliatedDomain<T>,
) -> Result<(f64, f64)> {
    let diff = u.u().sub(base.u())?;
    let grid = domain.grid();
    let metric = base.hessian()?;
    let normal = if grid.dim() >= 3 {
        normal_field(domain, &geometry::lorentzian_metric(base, &Tolerances::default())?)?
    } else {
        normal_field(domain, &metric)?
    };
    let full = vec![true; grid.len()];
    let mut value: f64 = 0.0;
    let mut deriv: f64 = 0.0;
    for p in domain.leaf_points(0) {
        value = value.max(diff.at(p).abs().as_f64());
        let grad: Vec<T> = (0..grid.dim())
            .map(|a| fd::masked_diff1(grid, diff.values(), &full, p, a))
            .collect();
        deriv = deriv.max(linalg::dot(normal.at(p), &grad).abs().as_f64());
    }
    Ok((value, deriv))
}
