use std::time::Instant;

use negcurv::foliation::{build_slab_domain_with, SlabOptions, TrimRule};
use negcurv::instability::{self, cutoff_chi};
use negcurv::linear::{self, CauchyData, LinearOptions};
use negcurv::{Catalog, GraphSurface, GridSpec, ScalarField};

#[test]
fn growth_bound_at_reference_resolution() {
    let start = Instant::now();
    let g = instability::solve_double_null(1.0 / 200.0, 8.0, 8.0).unwrap();
    let rep = instability::verify_growth_bound(&g, 1e-2);
    let elapsed = start.elapsed().as_secs_f64();
    println!("{rep:?} in {elapsed:.2}s");
    assert!(rep.passed);
    assert!(rep.v_8_1.unwrap() >= 0.99 * 64.0 / 3.0);
    assert!(rep.v_2_1.unwrap() >= 4.0 / 3.0 * 0.99);
    assert!(elapsed < 30.0);
}

#[test]
fn sup_norm_grows_on_physical_slices() {
    let g = instability::solve_double_null::<f64>(1.0 / 200.0, 8.0, 8.0).unwrap();
    let tx = instability::to_txcoords(&g, 1.0 / 50.0).unwrap();
    let window: Vec<_> = tx.sup_per_t.iter().filter(|s| s.t >= 1.0 - 1e-12 && s.t <= 4.0 + 1e-12).collect();
    assert!(window.len() > 100);
    for w in window.windows(2) {
        assert!(w[1].sup_abs > w[0].sup_abs, "{:?}", w);
    }
    // Trace on x = -t is the data, x = t is zero.
    let grid = tx.field.grid();
    for p in 0..grid.len() {
        let (t, x) = (grid.coord(p, 0), grid.coord(p, 1));
        if (x + t).abs() < 1e-12 {
            assert!((tx.field.at(p) - 2.0 * t * cutoff_chi(2.0 * t)).abs() < 1e-12);
        }
        if (x - t).abs() < 1e-12 {
            assert!(tx.field.at(p).abs() < 1e-12);
        }
        // On the line zeta = 1 the bound reads (2t - 1)^2 / 3.
        if (t - x - 1.0).abs() < 1e-12 && t >= 0.5 {
            assert!(tx.field.at(p) >= 0.99 * (2.0 * t - 1.0).powi(2) / 3.0);
        }
    }
}

#[test]
fn lattice_error_is_second_order() {
    let vals: Vec<f64> = [25.0, 50.0, 100.0, 200.0]
        .iter()
        .map(|&r| {
            let g = instability::solve_double_null(1.0 / r, 8.0, 8.0).unwrap();
            instability::verify_growth_bound(&g, 1e-2).v_8_1.unwrap()
        })
        .collect();
    let d1 = (vals[1] - vals[0]).abs();
    let d2 = (vals[2] - vals[1]).abs();
    let d3 = (vals[3] - vals[2]).abs();
    println!("v(8,1) {vals:?}");
    assert!((d1 / d2).log2() > 1.8 && (d2 / d3).log2() > 1.8, "{d1} {d2} {d3}");
}

/// Data on the slice t = 1 from the null solution, continued with the
/// Cartesian solver up to t = 1.8 and compared inside the domain of
/// dependence of `|x| <= 1`.
fn cross_solver_error(cells: usize, delta: f64) -> f64 {
    let ng = instability::solve_double_null(delta, 4.0, 4.0).unwrap();
    let h = 2.0 / cells as f64;
    let steps = (0.8 / (0.9 * h)).ceil() as usize;
    let grid = GridSpec::new(vec![1.0, -1.0], vec![0.8 / steps as f64, h], vec![steps + 1, cells + 1]).unwrap();
    let u = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim: 2 }, &grid).unwrap();
    let m = u.hessian().unwrap();
    let domain = build_slab_domain_with(&grid, &m, SlabOptions { trim: TrimRule::StencilReach, ..Default::default() }).unwrap();
    let data = CauchyData::from_fn(
        &domain,
        |x| ng.value_at(x[0] + x[1], x[0] - x[1]).unwrap(),
        |x| ng.time_derivative_at(x[0] + x[1], x[0] - x[1]).unwrap(),
    )
    .unwrap();
    let f = ScalarField::zeros(&grid);
    let r = linear::solve_linear(&u, &f, &data, &domain, &LinearOptions::default()).unwrap();
    let mut err: f64 = 0.0;
    for p in 0..grid.len() {
        let (t, x) = (grid.coord(p, 0), grid.coord(p, 1));
        if domain.contains(p) && x.abs() <= 2.0 - t - 0.1 {
            let exact = ng.value_at(t + x, t - x).unwrap();
            err = err.max((r.v.at(p) - exact).abs());
        }
    }
    err
}

#[test]
fn cartesian_solver_agrees_with_null_solver() {
    let coarse = cross_solver_error(64, 1.0 / 100.0);
    let fine = cross_solver_error(128, 1.0 / 200.0);
    println!("cross-solver errors {coarse:e} {fine:e}");
    assert!(fine < coarse / 3.0 && fine < 1e-3, "{coarse} {fine}");
}

#[test]
fn diagonal_samples_are_reported() {
    let g = instability::solve_double_null(1.0 / 50.0, 4.0, 4.0).unwrap();
    let d = instability::diagonal_growth(&g);
    assert_eq!(d.len(), g.n);
    assert!(d.iter().all(|s| s.v.is_finite()));
}
