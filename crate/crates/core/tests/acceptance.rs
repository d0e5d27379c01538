//! End-to-end acceptance run: one line per criterion, non-zero exit if any
//! criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use negcurv::convergence::run_check;
use negcurv::foliation::{causal_cone, ConeOptions, Direction};
use negcurv::geometry::{self, Tolerances};
use negcurv::instability;
use negcurv::linear::{self, default_weights, verify_energy_estimate, CauchyData, LinearOptions};
use negcurv::localization::{check_support_localization, tautological_eta};
use negcurv::nonlinear;
use negcurv::scenario::{paraboloid_domain, slab_grid, LinearScenario, LocalizationScenario, NonlinearScenario};
use negcurv::{Catalog, GraphSurface, GridSpec, ScalarField};

type Outcome = Result<String, String>;

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn conformal_identity() -> Outcome {
    let start = Instant::now();
    let r = run_check("conformal-identity", &[16, 32, 64], 2024).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let errors: Vec<String> = r.levels.iter().map(|l| format!("{:.2e}", l.error)).collect();
    verdict(
        r.order.at_least(1.8) && secs < 10.0,
        format!("order {}, errors [{}], {secs:.2}s", r.order, errors.join(", ")),
    )
}

fn curvature() -> Outcome {
    let mut worst: f64 = 0.0;
    for dim in [2, 3] {
        let grid = GridSpec::cube(dim, -2.0, 2.0, 64).map_err(|e| e.to_string())?;
        let s = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim }, &grid).map_err(|e| e.to_string())?;
        let k = geometry::psi(&s).map_err(|e| e.to_string())?;
        for p in 0..grid.len() {
            let r2: f64 = grid.coords(p).iter().map(|x| x * x).sum();
            let exact = -(1.0 + r2).powf(-(dim as f64 + 2.0) / 2.0);
            worst = worst.max((k.at(p) - exact).abs());
        }
    }
    let fd = run_check("curvature-fd", &[16, 32, 64], 0).map_err(|e| e.to_string())?;
    verdict(
        worst <= 1e-12 && fd.order.at_least(1.8),
        format!("closed-form defect {worst:.2e}, finite-difference order {}", fd.order),
    )
}

fn instability_bound() -> Outcome {
    let start = Instant::now();
    let g = instability::solve_double_null(1.0 / 200.0, 8.0, 8.0).map_err(|e| e.to_string())?;
    let rep = instability::verify_growth_bound(&g, 1e-2);
    let tx = instability::to_txcoords(&g, 1.0 / 50.0).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let window: Vec<f64> = tx
        .sup_per_t
        .iter()
        .filter(|s| s.t >= 1.0 - 1e-12 && s.t <= 4.0 + 1e-12)
        .map(|s| s.sup_abs)
        .collect();
    let increasing = window.len() > 1 && window.windows(2).all(|w| w[1] > w[0]);
    let v81 = rep.v_8_1.unwrap_or(f64::NAN);
    verdict(
        rep.bound_holds && v81 >= 0.99 * 64.0 / 3.0 && increasing && secs < 30.0,
        format!(
            "min v/(zeta zetabar^2/3) {:.4}, v(8,1) {v81:.3}, sup increasing on {} slices: {increasing}, {secs:.2}s",
            rep.min_ratio,
            window.len()
        ),
    )
}

fn newton() -> Outcome {
    let mut errors = Vec::new();
    let mut detail = String::new();
    let mut ok = true;
    for cells in [128, 256] {
        let m = NonlinearScenario::<f64>::new(cells, 0.01).map_err(|e| e.to_string())?;
        let mut p = m.problem();
        p.admissibility = Some(1.0);
        p.tol = 1e-13;
        p.max_iter = 8;
        let r = nonlinear::solve_nonlinear(&p).map_err(|e| e.to_string())?;
        let floor = *r.residuals.last().unwrap();
        let contracting = r
            .residuals
            .windows(2)
            .all(|w| w[0] <= 10.0 * floor || w[1] <= w[0] / 10.0);
        ok &= r.converged || r.stalled;
        let cauchy = r.cauchy_value_defect <= 1e-14 && r.cauchy_normal_defect <= 1e-14;
        ok &= contracting && cauchy && r.signature_preserved.iter().all(|&s| s);
        errors.push(m.error(&r.u).map_err(|e| e.to_string())?);
        if cells == 128 {
            let res: Vec<String> = r.residuals.iter().map(|x| format!("{x:.1e}")).collect();
            detail = format!(
                "residuals [{}], Cauchy defects {:.1e}/{:.1e}",
                res.join(", "),
                r.cauchy_value_defect,
                r.cauchy_normal_defect
            );
        }
    }
    let order = (errors[0] / errors[1]).log2();
    verdict(
        ok && order >= 1.8,
        format!("{detail}, error {:.2e} -> {:.2e} (order {order:.2})", errors[0], errors[1]),
    )
}

fn energy() -> Outcome {
    let mut checks = Vec::new();
    for cells in [128, 256, 512] {
        let s = LinearScenario::<f64>::new(2, cells, 2.0, 1.0, &Tolerances::default()).map_err(|e| e.to_string())?;
        let (_, r) = s.solve(&LinearOptions::default()).map_err(|e| e.to_string())?;
        checks.push(verify_energy_estimate(&r, &s.domain, &default_weights()));
    }
    if checks.iter().any(|c| !c.passed) {
        return Err("no stabilized weight".into());
    }
    let a = checks.iter().filter_map(|c| c.stabilized_a).fold(0.0, f64::max);
    let cs: Vec<f64> = checks
        .iter()
        .map(|c| c.samples.iter().find(|x| x.a == a).map_or(f64::NAN, |x| x.c_emp))
        .collect();
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    verdict(
        lo > 0.0 && hi / lo < 2.0,
        format!("a = {a}, C_emp {cs:.4?} at h = 1/32, 1/64, 1/128, spread {:.3}", hi / lo),
    )
}

fn localization() -> Outcome {
    let s = LocalizationScenario::<f64>::new(3, 96).map_err(|e| e.to_string())?;
    let thr = s.threshold();
    let tol = s.options.tolerances;
    let eta = tautological_eta(&s.u, &s.phi, None, &s.domain, &tol).map_err(|e| e.to_string())?;
    let (taut, _) = check_support_localization(&eta, &s.u, &s.domain, thr, &s.options).map_err(|e| e.to_string())?;
    let raw = ScalarField::from_fn(s.u.grid(), |x| s.phi.value(x));
    let (generic, _) = check_support_localization(&raw, &s.u, &s.domain, thr, &s.options).map_err(|e| e.to_string())?;
    verdict(
        taut.max_relative_pairing <= thr
            && taut.mass_outside_diamond <= thr
            && generic.max_relative_pairing > 10.0 * thr
            && taut.forward_causality_holds
            && generic.forward_causality_holds,
        format!(
            "5h^2 = {thr:.3e}; tautological pairing {:.2e}, outside-diamond mass {:.2e}; generic pairing {:.3e}, mass outside past {:.3}",
            taut.max_relative_pairing, taut.mass_outside_diamond, generic.max_relative_pairing, generic.mass_outside_past
        ),
    )
}

fn finite_speed() -> Outcome {
    let tol = Tolerances::default();
    let grid = slab_grid(2, 64, 2.0, 0.0, 0.5, 0.6).map_err(|e| e.to_string())?;
    let u = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim: 2 }, &grid).map_err(|e| e.to_string())?;
    let d = paraboloid_domain(&u, &tol).map_err(|e| e.to_string())?;
    let leaf0 = d.slice(0);
    let blob: Vec<bool> = leaf0.iter().map(|&p| (31..=34).contains(&grid.axis_index(p, 1))).collect();
    let v1: Vec<f64> = blob.iter().map(|&b| f64::from(u8::from(b))).collect();
    let data = CauchyData::new(&d, v1, vec![0.0; leaf0.len()]).map_err(|e| e.to_string())?;
    let r = linear::solve_linear(&u, &ScalarField::zeros(&grid), &data, &d, &LinearOptions::default())
        .map_err(|e| e.to_string())?;
    let mut seed = vec![false; grid.len()];
    for (k, &p) in leaf0.iter().enumerate() {
        seed[p] = blob[k];
    }
    let m = u.hessian().map_err(|e| e.to_string())?;
    let cone = causal_cone(&m, &seed, Direction::Future, ConeOptions::default()).map_err(|e| e.to_string())?;
    let (mut out, mut all) = (0.0, 0.0);
    for p in (0..grid.len()).filter(|&p| d.contains(p)) {
        let x = r.v.at(p).powi(2);
        all += x;
        if !cone.contains(p) {
            out += x;
        }
    }
    let rel = (out / all).sqrt();
    verdict(rel <= 1e-10, format!("relative mass outside dilated cone {rel:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("conformal identity", conformal_identity),
        ("curvature closed form", curvature),
        ("instability bound", instability_bound),
        ("nonlinear solve", newton),
        ("energy estimate", energy),
        ("localization", localization),
        ("finite speed of propagation", finite_speed),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {name}: {d} [{secs:.1}s]"),
            Err(d) => {
                failures += 1;
                println!("FAIL {name}: {d} [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", 7 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
