use negcurv::foliation::{build_slab_domain_with, FoliatedDomain, SlabOptions, TrimRule};
use negcurv::geometry;
use negcurv::nonlinear::{self, NonlinearProblem};
use negcurv::{Bump, Catalog, GraphSurface, GridSpec, ScalarField};

struct Manufactured {
    base: GraphSurface<f64>,
    domain: FoliatedDomain<f64>,
    eta: ScalarField<f64>,
    exact: ScalarField<f64>,
}

fn manufactured(cells: usize, amplitude: f64) -> Manufactured {
    let h = 15.0 / cells as f64;
    let steps = (2.8 / (0.75 * h)).ceil() as usize;
    let grid = GridSpec::new(vec![0.0, -7.5], vec![2.8 / steps as f64, h], vec![steps + 1, cells + 1]).unwrap();
    let base = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim: 2 }, &grid).unwrap();
    let bump = Bump::new(amplitude, vec![1.4, 0.0], 1.2, 6);
    let star = GraphSurface::analytic(Catalog::PerturbedParaboloid { bump }, &grid).unwrap();
    let eta = geometry::psi(&star).unwrap().sub(&geometry::psi(&base).unwrap()).unwrap();
    let domain = build_slab_domain_with(
        &grid,
        &base.hessian().unwrap(),
        SlabOptions { trim: TrimRule::StencilReach, ..Default::default() },
    )
    .unwrap();
    Manufactured { base, domain, eta, exact: star.u().clone() }
}

fn run(m: &Manufactured) -> nonlinear::IterationReport<f64> {
    let mut p = NonlinearProblem::new(m.base.clone(), m.eta.clone(), m.domain.clone());
    p.admissibility = Some(1.0);
    p.tol = 1e-13;
    p.max_iter = 8;
    nonlinear::solve_nonlinear(&p).unwrap()
}

fn domain_error(m: &Manufactured, u: &ScalarField<f64>) -> f64 {
    u.sub(&m.exact).unwrap().max_abs_where(m.domain.inside_mask())
}

#[test]
fn manufactured_problem_recovers_exact_surface() {
    let mut errs = Vec::new();
    for cells in [128usize, 256] {
        let m = manufactured(cells, 0.01);
        let r = run(&m);
        let floor = *r.residuals.last().unwrap();
        for w in r.residuals.windows(2) {
            if w[0] > 10.0 * floor {
                assert!(w[1] <= w[0] / 10.0, "{:?}", r.residuals);
            }
        }
        assert_eq!(r.cauchy_value_defect, 0.0);
        assert!(r.cauchy_normal_defect <= 1e-14);
        errs.push(domain_error(&m, &r.u));
    }
    assert!((errs[0] / errs[1]).log2() >= 1.8, "{errs:?}");
}

#[test]
fn first_correction_is_linear_in_the_perturbation() {
    let m = manufactured(128, 0.01);
    let target = |s: f64| {
        let p = NonlinearProblem::new(m.base.clone(), m.eta.scale(s), m.domain.clone());
        p.target().unwrap()
    };
    let base = m.base.to_finite_difference();
    let opts = Default::default();
    let (_, v1) = nonlinear::newton_step(&base, &target(1.0), &m.domain, &opts).unwrap();
    for s in [0.5, 0.25] {
        let (_, vs) = nonlinear::newton_step(&base, &target(s), &m.domain, &opts).unwrap();
        let defect = vs.sub(&v1.scale(s)).unwrap().max_abs();
        assert!(defect <= 1e-12 * s * v1.max_abs(), "{defect}");
    }
}

#[test]
fn solution_map_is_differentiable() {
    let m = manufactured(128, 0.01);
    let base = m.base.to_finite_difference();
    let p1 = NonlinearProblem::new(m.base.clone(), m.eta.clone(), m.domain.clone());
    let (_, v_lin) = nonlinear::newton_step(&base, &p1.target().unwrap(), &m.domain, &Default::default()).unwrap();
    let defects: Vec<f64> = [1.0, 0.5, 0.25]
        .iter()
        .map(|&s| {
            let mut p = NonlinearProblem::new(m.base.clone(), m.eta.scale(s), m.domain.clone());
            p.admissibility = Some(1.0);
            p.tol = 1e-13;
            let r = nonlinear::solve_nonlinear(&p).unwrap();
            let lin = base.u().add(&v_lin.scale(s)).unwrap();
            r.u.sub(&lin).unwrap().max_abs_where(m.domain.inside_mask())
        })
        .collect();
    println!("second-order defects {defects:?}");
    for w in defects.windows(2) {
        assert!(w[0] / w[1] >= 3.0, "{defects:?}");
    }
}

#[test]
fn mollified_iteration_keeps_cauchy_data() {
    let m = manufactured(128, 0.01);
    let mut p = NonlinearProblem::new(m.base.clone(), m.eta.clone(), m.domain.clone());
    p.admissibility = Some(1.0);
    p.tol = 1e-13;
    p.max_iter = 6;
    p.smoothing = nonlinear::Smoothing::Mollifier(vec![0.3, 0.2, 0.0]);
    let r = nonlinear::solve_nonlinear(&p).unwrap();
    assert_eq!(r.cauchy_value_defect, 0.0);
    assert!(r.cauchy_normal_defect <= 1e-14);
    assert!(r.residuals.last().unwrap() < &r.residuals[0]);
}

#[test]
fn single_precision_fixed_point() {
    let grid = GridSpec::<f32>::new(vec![0.0, -3.0], vec![0.05, 0.0625], vec![21, 97]).unwrap();
    let base = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim: 2 }, &grid).unwrap();
    let domain = build_slab_domain_with(
        &grid,
        &base.hessian().unwrap(),
        SlabOptions { trim: TrimRule::StencilReach, ..Default::default() },
    )
    .unwrap();
    let p = NonlinearProblem::new(base.clone(), ScalarField::zeros(&grid), domain);
    let r = nonlinear::solve_nonlinear(&p).unwrap();
    assert!(r.converged);
    assert_eq!(r.u.values(), base.u().values());
}
