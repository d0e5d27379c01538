use negcurv::foliation::{build_slab_domain_with, FoliatedDomain, Orientation, SlabOptions, TrimRule};
use negcurv::geometry::linearized_at;
use negcurv::linear::{self, CauchyData, LinearOptions};
use negcurv::{Catalog, GraphSurface, GridSpec, ScalarField};

struct Setup {
    u: GraphSurface<f64>,
    domain: FoliatedDomain<f64>,
}

fn setup(dim: usize, cells: usize, t_end: f64, half_width: f64) -> Setup {
    let h = 2.0 * half_width / cells as f64;
    let dt = 0.9 * h / ((dim - 1) as f64).sqrt() / 1.0;
    let steps = (t_end / dt).ceil() as usize;
    let mut origin = vec![0.0];
    let mut spacing = vec![t_end / steps as f64];
    let mut points = vec![steps + 1];
    for _ in 1..dim {
        origin.push(-half_width);
        spacing.push(h);
        points.push(cells + 1);
    }
    let grid = GridSpec::new(origin, spacing, points).unwrap();
    let u = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim }, &grid).unwrap();
    let metric = if dim == 2 {
        u.hessian().unwrap()
    } else {
        negcurv::geometry::lorentzian_metric(&u, &Default::default()).unwrap()
    };
    let domain = build_slab_domain_with(
        &grid,
        &metric,
        SlabOptions { trim: TrimRule::StencilReach, ..Default::default() },
    )
    .unwrap();
    Setup { u, domain }
}

/// v* = sin(t) cos(x_1) (+ x_2^2 / 4 in three dimensions), with derivatives.
fn exact(x: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
    let n = x.len();
    let (t, y) = (x[0], x[1]);
    let mut val = t.sin() * y.cos();
    let mut grad = vec![0.0; n];
    grad[0] = t.cos() * y.cos();
    grad[1] = -t.sin() * y.sin();
    let mut hess = vec![0.0; n * n];
    hess[0] = -t.sin() * y.cos();
    hess[1] = -t.cos() * y.sin();
    hess[n] = hess[1];
    hess[n + 1] = -t.sin() * y.cos();
    if n == 3 {
        val += 0.25 * x[2] * x[2] * (1.0 + t);
        grad[2] = 0.5 * x[2] * (1.0 + t);
        grad[0] += 0.25 * x[2] * x[2];
        hess[8] = 0.5 * (1.0 + t);
        hess[2] = 0.5 * x[2];
        hess[6] = 0.5 * x[2];
    }
    (val, grad, hess)
}

fn manufactured_error(s: &Setup) -> (f64, linear::LinearSolveReport<f64>) {
    let grid = s.u.grid();
    let n = grid.dim();
    let du = s.u.gradient().unwrap();
    let d2u = s.u.hessian().unwrap();
    let f = ScalarField::from_fn(grid, |x| {
        let (_, g, h) = exact(x);
        let p = grid.index(&(0..n).map(|a| ((x[a] - grid.origin(a)) / grid.spacing(a)).round() as usize).collect::<Vec<_>>());
        linearized_at(n, du.at(p), &d2u.dense(p), &g, &h, 1e-10).unwrap()
    });
    let metric = if n == 2 {
        d2u.clone()
    } else {
        negcurv::geometry::lorentzian_metric(&s.u, &Default::default()).unwrap()
    };
    let data = CauchyData::from_function(&s.domain, &metric, |x| {
        let (v, g, _) = exact(x);
        (v, g)
    })
    .unwrap();
    let r = linear::solve_linear(&s.u, &f, &data, &s.domain, &LinearOptions::default()).unwrap();
    let mut err: f64 = 0.0;
    for p in 0..grid.len() {
        if s.domain.contains(p) {
            err = err.max((r.v.at(p) - exact(&grid.coords(p)).0).abs());
        }
    }
    (err, r)
}

fn order(errors: &[f64]) -> f64 {
    (errors[0] / errors[errors.len() - 1]).log2() / (errors.len() - 1) as f64
}

#[test]
fn manufactured_solution_converges_at_second_order_n2() {
    let errs: Vec<f64> = [32, 64, 128]
        .iter()
        .map(|&c| manufactured_error(&setup(2, c, 1.0, 2.0)).0)
        .collect();
    println!("n=2 errors {errs:?} order {}", order(&errs));
    assert!(order(&errs) >= 1.8, "{errs:?}");
}

#[test]
fn manufactured_solution_converges_at_second_order_n3() {
    let errs: Vec<f64> = [32, 64]
        .iter()
        .map(|&c| manufactured_error(&setup(3, c, 0.5, 1.0)).0)
        .collect();
    println!("n=3 errors {errs:?} order {}", order(&errs));
    assert!(order(&errs) >= 1.8, "{errs:?}");
}

#[test]
fn solve_is_linear_in_source_and_data() {
    let s = setup(2, 48, 1.0, 2.0);
    let grid = s.u.grid();
    let f1 = ScalarField::from_fn(grid, |x| (x[0] * x[1]).sin());
    let f2 = ScalarField::from_fn(grid, |x| x[1] * x[1] - x[0]);
    let d1 = CauchyData::from_fn(&s.domain, |x| (-x[1] * x[1]).exp(), |x| x[1]).unwrap();
    let d2 = CauchyData::from_fn(&s.domain, |x| x[1].cos(), |_| 0.3).unwrap();
    let (alpha, beta) = (0.7, -1.9);
    let o = LinearOptions::default();
    let r1 = linear::solve_linear(&s.u, &f1, &d1, &s.domain, &o).unwrap();
    let r2 = linear::solve_linear(&s.u, &f2, &d2, &s.domain, &o).unwrap();
    let fc = f1.scale(alpha).add(&f2.scale(beta)).unwrap();
    let dc = d1.scale(alpha).add(&d2.scale(beta));
    let rc = linear::solve_linear(&s.u, &fc, &dc, &s.domain, &o).unwrap();
    let combo = r1.v.scale(alpha).add(&r2.v.scale(beta)).unwrap();
    let diff = rc.v.sub(&combo).unwrap().max_abs();
    assert!(diff <= 1e-12 * rc.v.max_abs(), "{diff}");
}

#[test]
fn backward_solve_recovers_initial_leaf() {
    let mut errs = Vec::new();
    for cells in [64usize, 128] {
        let s = setup(2, cells, 0.5, 2.0);
        let grid = s.u.grid();
        let f = ScalarField::from_fn(grid, |x| (x[0] + x[1]).cos());
        let data = CauchyData::from_fn(&s.domain, |x| (-2.0 * x[1] * x[1]).exp(), |_| 0.0).unwrap();
        let o = LinearOptions::default();
        let fwd = linear::solve_linear(&s.u, &f, &data, &s.domain, &o).unwrap();
        let m = s.u.hessian().unwrap();
        let back_domain = build_slab_domain_with(
            grid,
            &m,
            SlabOptions { orientation: Orientation::Backward, trim: TrimRule::StencilReach, ..Default::default() },
        )
        .unwrap();
        // Only the forward-domain's last leaf is usable; restrict the backward
        // domain's data to it by zeroing outside.
        let last = s.domain.leaf_count() - 1;
        let mut bdata =
            CauchyData::from_solution(&s.domain, &fwd.v, last, &back_domain, &m).unwrap();
        let pts = s.domain.slice(last);
        for (i, &p) in pts.iter().enumerate() {
            if !s.domain.contains(p) {
                bdata.v1[i] = 0.0;
                bdata.v2[i] = 0.0;
            }
        }
        let bwd = linear::solve_linear(&s.u, &f, &bdata, &back_domain, &o).unwrap();
        // Compare on the initial leaf where both domains of dependence agree.
        let mut err: f64 = 0.0;
        let last_b = back_domain.leaf_count() - 1;
        let reach = 2 * last;
        for p in back_domain.leaf_points(last_b) {
            let i = grid.axis_index(p, 1);
            if i >= reach && i + reach < grid.points(1) {
                err = err.max((bwd.v.at(p) - fwd.v.at(p)).abs());
            }
        }
        errs.push(err);
    }
    println!("time reversal errors {errs:?}");
    assert!(order(&errs) >= 1.8, "{errs:?}");
}
