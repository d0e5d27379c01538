//! One function per subcommand. Each reads its section of the config, runs
//! the experiment and returns the artifacts; nothing here touches the disk.

use negcurv::convergence::{self, fit_order, Polynomial};
use negcurv::geometry::{self, Signature};
use negcurv::instability;
use negcurv::io::{format_number as num, GridDescriptor};
use negcurv::linear::{self, CauchyData, LinearOptions};
use negcurv::localization::{check_support_localization, tautological_eta};
use negcurv::nonlinear::{self, Smoothing};
use negcurv::scenario::{LinearScenario, LocalizationScenario, NonlinearScenario};
use negcurv::{Bump, Catalog, GraphSurface, GridSpec, ScalarField, Tolerances};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Config, ConfigError};
use crate::output::Run;
use crate::CliError;

fn tolerances(cfg: &Config) -> Result<Tolerances<f64>, ConfigError> {
    Ok(Tolerances { det_floor: cfg.positive("solver.det_floor")?, eig_floor: cfg.positive("solver.eig_floor")? })
}

fn linear_options(cfg: &Config) -> Result<LinearOptions<f64>, ConfigError> {
    Ok(LinearOptions {
        weight: cfg.f64("solver.weight")?,
        cfl_safety: cfg.positive("solver.cfl_safety")?,
        tolerances: tolerances(cfg)?,
    })
}

fn invalid(key: &str, value: impl ToString, reason: &str) -> ConfigError {
    ConfigError::InvalidValue { key: key.into(), value: value.to_string(), reason: reason.into() }
}

fn catalog(cfg: &Config) -> Result<Catalog<f64>, ConfigError> {
    let dim = cfg.usize("surface.dim")?;
    if dim < 2 {
        return Err(invalid("surface.dim", dim, "need at least 2 variables"));
    }
    let kind = cfg.choice("surface.kind", &["hyperbolic-paraboloid", "quadratic-form", "perturbed-paraboloid"])?;
    Ok(match kind {
        "hyperbolic-paraboloid" => Catalog::HyperbolicParaboloid { dim },
        "quadratic-form" => {
            let coeffs = cfg.f64_list("surface.coeffs")?;
            if coeffs.len() != dim {
                return Err(invalid("surface.coeffs", cfg.str("surface.coeffs"), "need one coefficient per variable"));
            }
            Catalog::QuadraticForm { coeffs }
        }
        _ => {
            let mut center = cfg.f64_list("bump.center")?;
            if center.len() == 1 {
                center = vec![center[0]; dim];
            }
            if center.len() != dim {
                return Err(invalid("bump.center", cfg.str("bump.center"), "need one or `surface.dim` entries"));
            }
            let power = u32::try_from(cfg.usize("bump.power")?).unwrap_or(u32::MAX).max(3);
            Catalog::PerturbedParaboloid {
                bump: Bump::new(cfg.f64("bump.amplitude")?, center, cfg.positive("bump.radius")?, power),
            }
        }
    })
}

/// Catalog surface on the cube `[lo, hi]^n`, differentiated as configured.
fn surface(cfg: &Config) -> Result<GraphSurface<f64>, CliError> {
    let catalog = catalog(cfg)?;
    let (lo, hi) = (cfg.f64("grid.lo")?, cfg.f64("grid.hi")?);
    if hi <= lo {
        return Err(invalid("grid.hi", hi, "must exceed grid.lo").into());
    }
    let grid = GridSpec::cube(catalog.dim(), lo, hi, cfg.usize("grid.cells")?)?;
    let s = GraphSurface::analytic(catalog, &grid)?;
    Ok(match cfg.choice("surface.mode", &["analytic", "finite-difference"])? {
        "analytic" => s,
        _ => s.to_finite_difference(),
    })
}

fn is_paraboloid(cfg: &Config) -> bool {
    cfg.str("surface.kind") == "hyperbolic-paraboloid"
}

pub fn curvature(cfg: &Config) -> Result<Run, CliError> {
    let s = surface(cfg)?;
    let tol = tolerances(cfg)?;
    let grid = s.grid().clone();
    let n = grid.dim();
    let k = geometry::psi(&s)?;
    let sig = geometry::classify_signature(&s.hessian()?, tol.eig_floor);
    let count = |x: Signature| sig.iter().filter(|&&s| s == x).count();
    let (mut kmin, mut kmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &x in k.values() {
        kmin = kmin.min(x);
        kmax = kmax.max(x);
    }
    let mut report = json!({
        "grid": GridDescriptor::of(&grid),
        "k_min": kmin,
        "k_max": kmax,
        "signature": {
            "lorentzian": count(Signature::Lorentzian),
            "riemannian": count(Signature::Riemannian),
            "degenerate": count(Signature::Degenerate),
            "other": count(Signature::OtherIndefinite),
        },
    });
    let mut run;
    if is_paraboloid(cfg) {
        let exponent = -(n as f64 + 2.0) / 2.0;
        let exact = ScalarField::from_fn(&grid, |x| -(1.0 + x.iter().map(|v| v * v).sum::<f64>()).powf(exponent));
        let defect = k.sub(&exact)?.max_abs();
        report["closed_form_max_defect"] = json!(defect);
        run = Run::new(report, json!({ "k_min": kmin, "k_max": kmax, "closed_form_max_defect": defect }));
        run.add_fields("curvature.csv", &[("u", s.u()), ("K", &k), ("closed_form", &exact)], None)?;
    } else {
        run = Run::new(report, json!({ "k_min": kmin, "k_max": kmax }));
        run.add_fields("curvature.csv", &[("u", s.u()), ("K", &k)], None)?;
    }
    Ok(run)
}

/// Largest `|f|` over points at least two cells from every face.
fn interior_max(f: &ScalarField<f64>) -> f64 {
    let g = f.grid();
    (0..g.len()).filter(|&p| g.boundary_distance(p) >= 2).map(|p| f.at(p).abs()).fold(0.0, f64::max)
}

pub fn linearize_check(cfg: &Config) -> Result<Run, CliError> {
    let s = surface(cfg)?;
    let tol = tolerances(cfg)?;
    let grid = s.grid().clone();
    let n = grid.dim();
    let seed = cfg.u64("run.seed")?;
    let degree = u32::try_from(cfg.usize("linearize.degree")?).unwrap_or(u32::MAX);
    let poly = Polynomial::random(n, degree, &mut ChaCha8Rng::seed_from_u64(seed));
    let v = ScalarField::from_fn(&grid, |x| poly.eval(x));

    // Taylor defects of the grid operator in direction v.
    let base = s.to_finite_difference();
    let psi0 = geometry::psi(&base)?;
    let lin = geometry::apply_linearized(&base, &v, &tol)?;
    let eps = cfg.f64_list("linearize.eps")?;
    if eps.len() < 2 || eps.iter().any(|&e| e <= 0.0) {
        return Err(invalid("linearize.eps", cfg.str("linearize.eps"), "need at least two positive steps").into());
    }
    let mut rows = Vec::new();
    for &e in &eps {
        let moved = GraphSurface::finite_difference(base.u().add(&v.scale(e))?);
        let quotient = geometry::psi(&moved)?.sub(&psi0)?.scale(1.0 / e);
        rows.push(vec![e, interior_max(&quotient.sub(&lin)?)]);
    }
    let defects: Vec<f64> = rows.iter().map(|r| r[1]).collect();
    let taylor_order = fit_order(&eps, &defects)?;

    // Identity between the linearized operator and the wave operator.
    let lin_s = geometry::apply_linearized(&s, &v, &tol)?;
    let identity = if n >= 3 {
        let g = geometry::lorentzian_metric(&s, &tol)?;
        let f = geometry::conformal_factor(&s, &tol)?;
        let boxed = geometry::apply_box(&g, &v, tol.det_floor)?;
        boxed.sub(&f.zip_with(&lin_s, |a, b| a * b)?)?
    } else {
        let m = s.hessian()?;
        let b = geometry::first_order_coeffs_n2(&s, &tol)?;
        let psi = geometry::psi(&s)?;
        let boxed = geometry::apply_box(&m, &v, tol.det_floor)?;
        let dv = GraphSurface::finite_difference(v.clone()).gradient()?;
        let vals = (0..grid.len())
            .map(|p| {
                let first: f64 = b.at(p).iter().zip(dv.at(p)).map(|(x, y)| x * y).sum();
                psi.at(p) * (boxed.at(p) + first) - lin_s.at(p)
            })
            .collect();
        ScalarField::new(grid.clone(), vals)?
    };
    let identity_defect = interior_max(&identity);

    let report = json!({
        "grid": GridDescriptor::of(&grid),
        "seed": seed,
        "degree": degree,
        "taylor": rows.iter().map(|r| json!({ "eps": r[0], "defect": r[1] })).collect::<Vec<_>>(),
        "taylor_order": taylor_order,
        "identity_defect": identity_defect,
    });
    let mut run = Run::new(report, json!({ "taylor_order": taylor_order, "identity_defect": identity_defect }));
    let table: Vec<Vec<String>> = rows.iter().map(|r| vec![num(r[0]), num(r[1])]).collect();
    run.add_table("taylor.csv", &["eps", "defect"], &table)?;
    Ok(run)
}

pub fn solve_linear(cfg: &Config) -> Result<Run, CliError> {
    let dim = cfg.usize("linear.dim")?;
    if !(2..=3).contains(&dim) {
        return Err(invalid("linear.dim", dim, "expected 2 or 3").into());
    }
    let opts = linear_options(cfg)?;
    let mut s = LinearScenario::new(
        dim,
        cfg.usize("linear.cells")?,
        cfg.positive("linear.half_width")?,
        cfg.positive("linear.t_end")?,
        &opts.tolerances,
    )?;
    let manufactured = cfg.choice("linear.source", &["manufactured", "bump"])? == "manufactured";
    if !manufactured {
        // Zero data, source a bump around the middle of the slab.
        let grid = s.u.grid().clone();
        let mut center = vec![0.0; dim];
        center[0] = 0.5 * grid.extent(0);
        let bump = Bump::new(1.0, center, 0.25 * grid.extent(1).min(grid.extent(0)), 6);
        s.source = ScalarField::from_fn(&grid, |x| bump.value(x));
        s.data = CauchyData::zeros(&s.domain);
    }
    let (err, r) = s.solve(&opts)?;
    let weights = cfg.f64_list("linear.weights")?;
    let energy = linear::verify_energy_estimate(&r, &s.domain, &weights);
    let grid = s.u.grid();
    let mut report = json!({
        "grid": GridDescriptor::of(grid),
        "source": cfg.str("linear.source"),
        "cfl_ratio": r.cfl_ratio,
        "shift_contraction": r.shift_contraction,
        "c_emp": r.c_emp,
        "trace": r.trace,
        "energy_verification": energy,
    });
    let mut summary = json!({ "c_emp": r.c_emp, "energy_passed": energy.passed });
    if manufactured {
        report["max_error"] = json!(err);
        summary["max_error"] = json!(err);
    }
    let mut run = Run::new(report, summary);
    let mask = Some(s.domain.inside_mask());
    if manufactured {
        run.add_fields("solution.csv", &[("v", &r.v), ("exact", &s.exact)], mask)?;
    } else {
        run.add_fields("solution.csv", &[("v", &r.v)], mask)?;
    }
    let rows: Vec<Vec<String>> = r
        .trace
        .leaf_energy
        .iter()
        .enumerate()
        .map(|(k, &e)| vec![k.to_string(), num(s.domain.temporal_of_leaf(k)), num(e)])
        .collect();
    run.add_table("energy.csv", &["leaf", "t", "energy"], &rows)?;
    Ok(run)
}

pub fn solve_nonlinear(cfg: &Config) -> Result<Run, CliError> {
    let s = NonlinearScenario::new(cfg.usize("nonlinear.cells")?, cfg.f64("nonlinear.amplitude")?)?;
    let mut p = s.problem();
    p.tol = cfg.positive("nonlinear.tol")?;
    p.max_iter = cfg.usize("nonlinear.max_iter")?;
    p.admissibility = match cfg.str("nonlinear.admissibility") {
        "" => None,
        _ => Some(cfg.positive("nonlinear.admissibility")?),
    };
    let widths = cfg.f64_list("nonlinear.mollifier")?;
    if !widths.is_empty() {
        p.smoothing = Smoothing::Mollifier(widths);
    }
    p.linear = linear_options(cfg)?;
    let r = nonlinear::solve_nonlinear(&p)?;
    let error = s.error(&r.u)?;
    let report = json!({
        "grid": GridDescriptor::of(s.base.grid()),
        "iteration": r,
        "max_error": error,
    });
    let summary = json!({
        "converged": r.converged,
        "stalled": r.stalled,
        "iterations": r.iterations,
        "final_residual": r.residuals.last(),
        "max_error": error,
    });
    let mut run = Run::new(report, summary);
    let diff = r.u.sub(&s.exact)?;
    run.add_fields("surface.csv", &[("u", &r.u), ("exact", &s.exact), ("error", &diff)], Some(s.domain.inside_mask()))?;
    let rows: Vec<Vec<String>> = r.residuals.iter().enumerate().map(|(k, &x)| vec![k.to_string(), num(x)]).collect();
    run.add_table("residuals.csv", &["iteration", "residual"], &rows)?;
    if !r.converged && !r.stalled {
        run.failure = Some(format!("no convergence after {} iterations", r.iterations));
    }
    Ok(run)
}

pub fn instability(cfg: &Config) -> Result<Run, CliError> {
    let g = instability::solve_double_null(
        cfg.positive("instability.delta")?,
        cfg.positive("instability.extent")?,
        cfg.positive("instability.extent_bar")?,
    )?;
    let growth = instability::verify_growth_bound(&g, cfg.positive("instability.tol")?);
    let tx = instability::to_txcoords(&g, cfg.positive("instability.resample_h")?)?;
    let diagonal = instability::diagonal_growth(&g);
    let stride = cfg.usize("instability.csv_stride")?.max(1);
    // Exploratory: the cubic lower bound along the diagonal beyond zeta = 1.
    let beyond: Vec<_> = diagonal.iter().filter(|d| d.t > 1.0).collect();
    let cubic_beyond = !beyond.is_empty() && beyond.iter().all(|d| d.v >= d.cubic);
    let report = json!({
        "delta": g.delta,
        "lattice": [g.n_bar, g.n],
        "growth": growth,
        "sup_norm": tx.sup_per_t,
        "diagonal_cubic_beyond_unit": cubic_beyond,
    });
    let summary = json!({
        "passed": growth.passed,
        "min_ratio": growth.min_ratio,
        "v_8_1": growth.v_8_1,
    });
    let mut run = Run::new(report, summary);
    let mut rows = Vec::new();
    for i in (0..g.n_bar).step_by(stride) {
        for j in (0..g.n).step_by(stride) {
            rows.push(vec![num(g.zeta_bar(i)), num(g.zeta(j)), num(g.at(i, j))]);
        }
    }
    run.add_table("null_grid.csv", &["zeta_bar", "zeta", "v"], &rows)?;
    let mask: Vec<bool> = tx.covered.clone();
    run.add_fields("resample.csv", &[("v", &tx.field)], Some(&mask))?;
    let rows: Vec<Vec<String>> = tx.sup_per_t.iter().map(|s| vec![num(s.t), num(s.sup_abs)]).collect();
    run.add_table("sup_norm.csv", &["t", "sup_abs"], &rows)?;
    let rows: Vec<Vec<String>> = diagonal.iter().map(|d| vec![num(d.t), num(d.v), num(d.cubic)]).collect();
    run.add_table("diagonal.csv", &["t", "v", "cubic"], &rows)?;
    Ok(run)
}

pub fn localization(cfg: &Config) -> Result<Run, CliError> {
    let dim = cfg.usize("localization.dim")?;
    if !(2..=3).contains(&dim) {
        return Err(invalid("localization.dim", dim, "expected 2 or 3").into());
    }
    let s = LocalizationScenario::<f64>::new(dim, cfg.usize("localization.cells")?)?;
    let tol = s.options.tolerances;
    let source = cfg.choice("localization.source", &["tautological", "nonlinear", "generic"])?;
    let eta = match source {
        "tautological" => tautological_eta(&s.u, &s.phi, None, &s.domain, &tol)?,
        "nonlinear" => tautological_eta(&s.u, &s.phi, Some(cfg.positive("localization.eps")?), &s.domain, &tol)?,
        _ => ScalarField::from_fn(s.u.grid(), |x| s.phi.value(x)),
    };
    let threshold = s.threshold();
    let (rep, v) = check_support_localization(&eta, &s.u, &s.domain, threshold, &s.options)?;
    let summary = json!({
        "threshold": threshold,
        "max_relative_pairing": rep.max_relative_pairing,
        "mass_outside_diamond": rep.mass_outside_diamond,
        "localized": rep.localized,
    });
    let rows: Vec<Vec<String>> = rep
        .pairings
        .iter()
        .map(|(id, p)| vec![id.clone(), num(p.value), num(p.relative)])
        .collect();
    let report = json!({
        "grid": GridDescriptor::of(s.u.grid()),
        "source": source,
        "threshold": threshold,
        "localization": rep,
    });
    let mut run = Run::new(report, summary);
    run.add_table("pairings.csv", &["kernel_sample", "value", "relative"], &rows)?;
    run.add_fields("solution.csv", &[("eta", &eta), ("v", &v)], Some(s.domain.inside_mask()))?;
    Ok(run)
}

pub fn convergence(cfg: &Config) -> Result<Run, CliError> {
    let levels = cfg.usize_list("convergence.levels")?;
    let r = convergence::run_check(cfg.str("convergence.check"), &levels, cfg.u64("run.seed")?)?;
    let rows: Vec<Vec<String>> = r.levels.iter().map(|l| vec![l.cells.to_string(), num(l.h), num(l.error)]).collect();
    let mut run = Run::new(json!(r), json!({ "check": r.check, "order": r.order }));
    run.add_table("levels.csv", &["cells", "h", "error"], &rows)?;
    Ok(run)
}
