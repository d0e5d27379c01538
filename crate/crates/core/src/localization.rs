//! Orthogonality of sources to the kernel of the wave operator, tautological
//! sources, and causal localization of the corresponding solutions.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fd;
use crate::field::{ScalarField, VectorField};
use crate::foliation::{causal_cone, ConeOptions, Direction, FoliatedDomain};
use crate::geometry::{self, Tolerances};
use crate::linalg;
use crate::linear::{self, CauchyData, LinearOptions, WaveCoefficients};
use crate::scalar::Real;
use crate::surface::{Bump, GraphSurface};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PairingResult {
    pub value: f64,
    /// `||w|| ||f eta||` in Euclidean `L^2` over the domain.
    pub normalization: f64,
    pub relative: f64,
}

fn support_mask<T: Real>(eta: &ScalarField<T>) -> Vec<bool> {
    eta.values().iter().map(|&x| x != T::zero()).collect()
}

/// Fails unless every point of `support` lies at least two cells inside the
/// domain.
pub fn check_interior_support<T: Real>(support: &[bool], domain: &FoliatedDomain<T>) -> Result<()> {
    for (p, &s) in support.iter().enumerate() {
        if s && domain.interior_distance(p).map_or(true, |d| d < 2) {
            return Err(Error::SupportTouchesBoundary { index: p });
        }
    }
    Ok(())
}

/// Weight `f sqrt|det g|` for `n >= 3`, `Psi^{-1} sqrt|det m|` for `n = 2`,
/// together with the source scale alone.
fn pairing_weights<T: Real>(u: &GraphSurface<T>, tol: &Tolerances<T>) -> Result<(ScalarField<T>, ScalarField<T>)> {
    let form = linear::wave_form(u, tol)?;
    let vol = geometry::volume_density(&form.coefficients.metric, tol.det_floor)?;
    let weight = form.source_scale.zip_with(&vol, |a, b| a * b)?;
    Ok((weight, form.source_scale))
}

/// `sum w f eta sqrt|det g|` over the domain, normalized by `||w|| ||f eta||`.
pub fn pairing<T: Real>(
    w: &ScalarField<T>,
    eta: &ScalarField<T>,
    u: &GraphSurface<T>,
    domain: &FoliatedDomain<T>,
    tol: &Tolerances<T>,
) -> Result<PairingResult> {
    check_interior_support(&support_mask(eta), domain)?;
    let (weight, scale) = pairing_weights(u, tol)?;
    pairing_with_weights(w, eta, &weight, &scale, domain)
}

fn pairing_with_weights<T: Real>(
    w: &ScalarField<T>,
    eta: &ScalarField<T>,
    weight: &ScalarField<T>,
    scale: &ScalarField<T>,
    domain: &FoliatedDomain<T>,
) -> Result<PairingResult> {
    let grid = domain.grid();
    grid.check_same(w.grid(), "pairing")?;
    grid.check_same(eta.grid(), "pairing")?;
    let vol = grid.cell_volume().as_f64();
    let mut value = 0.0;
    let mut ww = 0.0;
    let mut ff = 0.0;
    for p in 0..grid.len() {
        if !domain.contains(p) {
            continue;
        }
        let (wv, e) = (w.at(p).as_f64(), eta.at(p).as_f64());
        value += wv * weight.at(p).as_f64() * e * vol;
        ww += wv * wv * vol;
        let fe = scale.at(p).as_f64() * e;
        ff += fe * fe * vol;
    }
    let normalization = ww.sqrt() * ff.sqrt();
    let relative = if normalization > 0.0 { value / normalization } else { 0.0 };
    Ok(PairingResult { value, normalization, relative })
}

/// Operator whose solutions pair to zero with every `L_u phi`: `box_g` for
/// `n >= 3`; for `n = 2` the formal adjoint of `box_m + b . d`.
pub fn kernel_coefficients<T: Real>(u: &GraphSurface<T>, tol: &Tolerances<T>) -> Result<WaveCoefficients<T>> {
    if u.dim() >= 3 {
        return Ok(linear::wave_form(u, tol)?.coefficients);
    }
    let form = linear::wave_form(u, tol)?;
    let m = form.coefficients.metric.clone();
    let b = geometry::first_order_coeffs_n2(u, tol)?;
    let mut coeffs = WaveCoefficients::geometric(m.clone(), tol.det_floor)?;
    let grid = u.grid();
    let vol = geometry::volume_density(&m, tol.det_floor)?;
    let mut div = vec![T::zero(); grid.len()];
    for j in 0..2 {
        let flux: Vec<T> = (0..grid.len()).map(|p| vol.at(p) * b.at(p)[j]).collect();
        let d = fd::diff1(grid, &flux, j)?;
        for p in 0..grid.len() {
            div[p] = div[p] + d[p] / vol.at(p);
        }
    }
    let first: Vec<T> = coeffs
        .first_order
        .values()
        .iter()
        .zip(b.values())
        .map(|(&x, &y)| x - y)
        .collect();
    coeffs.first_order = VectorField::new(grid.clone(), first)?;
    coeffs.zeroth_order = Some(ScalarField::new(grid.clone(), div.into_iter().map(|x| -x).collect())?);
    Ok(coeffs)
}

/// Solves the homogeneous kernel equation forward from `data`.
pub fn kernel_sample<T: Real>(
    u: &GraphSurface<T>,
    domain: &FoliatedDomain<T>,
    data: &CauchyData<T>,
    opts: &LinearOptions<T>,
) -> Result<ScalarField<T>> {
    let coeffs = kernel_coefficients(u, &opts.tolerances)?;
    kernel_sample_with(&coeffs, domain, data, opts)
}

fn kernel_sample_with<T: Real>(
    coeffs: &WaveCoefficients<T>,
    domain: &FoliatedDomain<T>,
    data: &CauchyData<T>,
    opts: &LinearOptions<T>,
) -> Result<ScalarField<T>> {
    let zero = ScalarField::zeros(domain.grid());
    Ok(linear::solve_wave(coeffs, &zero, data, domain, opts)?.v)
}

/// Fixed family of 32 kernel data: 8 polynomials of degree at most 3 in the
/// leaf coordinates, each used as value or normal derivative, with or without
/// a Gaussian envelope.
pub fn kernel_family<T: Real>(domain: &FoliatedDomain<T>) -> Vec<(String, CauchyData<T>)> {
    let grid = domain.grid();
    let ta = domain.time_axis();
    let spatial: Vec<usize> = (0..grid.dim()).filter(|&a| a != ta).collect();
    let y = |x: &[T], k: usize| spatial.get(k).map_or(T::zero(), |&a| x[a]);
    type Poly<T> = fn(T, T) -> T;
    let polys: [(&str, Poly<T>); 8] = [
        ("1", |_, _| T::one()),
        ("y1", |a, _| a),
        ("y2", |_, b| b),
        ("y1y2", |a, b| a * b),
        ("y1^2-y2^2", |a, b| a * a - b * b),
        ("y1^2+y2^2", |a, b| a * a + b * b),
        ("y1^3", |a, _| a * a * a),
        ("y2^3-y1", |a, b| b * b * b - a),
    ];
    let pts = domain.slice(0);
    let mut out = Vec::with_capacity(32);
    for (envelope, env_name) in [(false, "plain"), (true, "gauss")] {
        for (as_value, slot) in [(true, "value"), (false, "normal")] {
            for (name, poly) in polys.iter() {
                let vals: Vec<T> = pts
                    .iter()
                    .map(|&p| {
                        let x = grid.coords(p);
                        let (a, b) = (y(&x, 0), y(&x, 1));
                        let e = if envelope { (-(a * a + b * b) * T::lit(4.0)).exp() } else { T::one() };
                        poly(a, b) * e
                    })
                    .collect();
                let zeros = vec![T::zero(); pts.len()];
                let data = if as_value {
                    CauchyData { v1: vals, v2: zeros }
                } else {
                    CauchyData { v1: zeros, v2: vals }
                };
                out.push((format!("{env_name}-{slot}-{name}"), data));
            }
        }
    }
    out
}

/// Source built from a family of graphs `u_S + eps phi`.
pub fn tautological_eta<T: Real>(
    u: &GraphSurface<T>,
    phi: &Bump<T>,
    eps: Option<T>,
    domain: &FoliatedDomain<T>,
    tol: &Tolerances<T>,
) -> Result<ScalarField<T>> {
    let grid = u.grid();
    let support: Vec<bool> = (0..grid.len()).map(|p| phi.contains(&grid.coords(p))).collect();
    check_interior_support(&support, domain)?;
    let du = u.gradient()?;
    let d2u = u.hessian()?;
    let n = u.dim();
    let mut out = vec![T::zero(); grid.len()];
    for p in 0..grid.len() {
        if !support[p] {
            continue;
        }
        let jet = phi.jet(&grid.coords(p));
        let (g, h) = (du.at(p), d2u.dense(p));
        out[p] = match eps {
            None => geometry::linearized_at(n, g, &h, &jet.grad, &jet.hess, tol.det_floor).ok_or(
                Error::SingularHessian { index: p, det: linalg::determinant(n, &h).as_f64() },
            )?,
            Some(e) => {
                let g2: Vec<T> = g.iter().zip(&jet.grad).map(|(&a, &b)| a + e * b).collect();
                let h2: Vec<T> = h.iter().zip(&jet.hess).map(|(&a, &b)| a + e * b).collect();
                geometry::psi_at(n, &g2, &h2) - geometry::psi_at(n, g, &h)
            }
        };
    }
    ScalarField::new(grid.clone(), out)
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalizationReport {
    /// Relative `L^2` mass of `v` outside the dilated future of the support.
    pub mass_outside_future: f64,
    /// Relative `L^2` mass outside the dilated future intersected with the
    /// dilated past.
    pub mass_outside_diamond: f64,
    /// Relative mass outside the dilated past alone.
    pub mass_outside_past: f64,
    pub solution_norm: f64,
    /// Largest `|relative pairing|` over the sampled kernel.
    pub max_relative_pairing: f64,
    pub pairings: Vec<(String, PairingResult)>,
    pub forward_causality_holds: bool,
    /// `None` unless the pairing test reports orthogonality within `tol`.
    pub localized: Option<bool>,
    pub tol: f64,
}

fn relative_mass_outside<T: Real>(v: &ScalarField<T>, keep: &[bool], domain: &FoliatedDomain<T>) -> (f64, f64) {
    let mut total = 0.0;
    let mut outside = 0.0;
    for p in 0..v.grid().len() {
        if !domain.contains(p) {
            continue;
        }
        let x = v.at(p).as_f64();
        total += x * x;
        if !keep[p] {
            outside += x * x;
        }
    }
    let norm = (total * v.grid().cell_volume().as_f64()).sqrt();
    if total > 0.0 {
        ((outside / total).sqrt(), norm)
    } else {
        (0.0, 0.0)
    }
}

/// Solves `L_u v = eta` with zero data on leaf 0 and measures where `v`
/// lives relative to the causal future and past of `supp eta`.
pub fn check_support_localization<T: Real>(
    eta: &ScalarField<T>,
    u: &GraphSurface<T>,
    domain: &FoliatedDomain<T>,
    tol: f64,
    opts: &LinearOptions<T>,
) -> Result<(LocalizationReport, ScalarField<T>)> {
    let support = support_mask(eta);
    check_interior_support(&support, domain)?;
    let form = linear::wave_form(u, &opts.tolerances)?;
    let solve = linear::solve_wave_form(&form, eta, &CauchyData::zeros(domain), domain, opts)?;
    let v = solve.v;
    let metric = &form.coefficients.metric;
    let cone = ConeOptions { time_axis: domain.time_axis(), dilation: None };
    let future = causal_cone(metric, &support, Direction::Future, cone)?;
    let past = causal_cone(metric, &support, Direction::Past, cone)?;
    let diamond = future.intersect(&past);
    let (mass_outside_future, solution_norm) = relative_mass_outside(&v, future.membership(), domain);
    let (mass_outside_past, _) = relative_mass_outside(&v, past.membership(), domain);
    let (mass_outside_diamond, _) = relative_mass_outside(&v, &diamond, domain);

    let kernel = kernel_coefficients(u, &opts.tolerances)?;
    let vol = geometry::volume_density(metric, opts.tolerances.det_floor)?;
    let weight = form.source_scale.zip_with(&vol, |a, b| a * b)?;
    let pairings = kernel_family(domain)
        .into_par_iter()
        .map(|(name, data)| {
            let w = kernel_sample_with(&kernel, domain, &data, opts)?;
            Ok((name, pairing_with_weights(&w, eta, &weight, &form.source_scale, domain)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_relative_pairing = pairings.iter().map(|(_, p)| p.relative.abs()).fold(0.0, f64::max);
    let orthogonal = max_relative_pairing <= tol;
    Ok((
        LocalizationReport {
            mass_outside_future,
            mass_outside_diamond,
            mass_outside_past,
            solution_norm,
            max_relative_pairing,
            pairings,
            forward_causality_holds: mass_outside_future <= 1e-10,
            localized: orthogonal.then_some(mass_outside_diamond <= tol),
            tol,
        },
        v,
    ))
}
