use negcurv::foliation::{FoliatedDomain, Orientation};
use negcurv::linear::{self, default_weights, verify_energy_estimate, LinearOptions};
use negcurv::scenario::LinearScenario;
use negcurv::{GridSpec, ScalarField};

fn scenario(cells: usize) -> LinearScenario<f64> {
    LinearScenario::new(2, cells, 2.0, 1.0, &Default::default()).unwrap()
}

#[test]
fn empirical_constant_is_resolution_stable() {
    let mut constants = Vec::new();
    let mut stabilized = Vec::new();
    for cells in [128, 256, 512] {
        let s = scenario(cells);
        let (_, r) = s.solve(&LinearOptions::default()).unwrap();
        let check = verify_energy_estimate(&r, &s.domain, &default_weights());
        assert!(check.passed);
        stabilized.push(check.stabilized_a.unwrap());
        constants.push(check);
    }
    let a = stabilized.iter().cloned().fold(0.0, f64::max);
    let at_a: Vec<f64> = constants
        .iter()
        .map(|c| c.samples.iter().find(|s| s.a == a).unwrap().c_emp)
        .collect();
    let (lo, hi) = at_a.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(lo > 0.0 && hi / lo < 2.0, "{at_a:?}");
}

#[test]
fn data_only_constant_is_bounded_uniformly() {
    let cs: Vec<f64> = [128, 256, 512]
        .iter()
        .map(|&cells| {
            let s = scenario(cells);
            let zero = ScalarField::zeros(s.u.grid());
            let r = linear::solve_linear(&s.u, &zero, &s.data, &s.domain, &LinearOptions::default()).unwrap();
            assert_eq!(r.trace.source, 0.0);
            r.c_emp
        })
        .collect();
    let (lo, hi) = cs.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &x| (l.min(x), h.max(x)));
    assert!(hi / lo < 1.1, "{cs:?}");
}

#[test]
fn zero_solution_has_zero_constants() {
    let s = scenario(32);
    let zero = ScalarField::zeros(s.u.grid());
    let r = linear::solve_linear(&s.u, &zero, &s.data.scale(0.0), &s.domain, &LinearOptions::default()).unwrap();
    let check = verify_energy_estimate(&r, &s.domain, &default_weights());
    assert!(check.samples.iter().all(|c| c.c_emp == 0.0));
}

fn minkowski_slab() -> (ScalarField<f64>, FoliatedDomain<f64>) {
    let grid = GridSpec::new(vec![0.0, 0.0, 0.0], vec![0.1, 0.125, 0.25], vec![11, 9, 5]).unwrap();
    let d = FoliatedDomain::full_slab(&grid, 0, Orientation::Forward);
    (ScalarField::from_fn(&grid, |x| x[0]), d)
}

#[test]
fn time_function_energy_is_leaf_measure() {
    let (v, d) = minkowski_slab();
    let e = linear::energy(&v, None, &d, 0.0);
    let g = d.grid();
    let measure = (g.points(1) * g.points(2)) as f64 * g.spacing(1) * g.spacing(2);
    for (k, &ek) in e.leaf_energy.iter().enumerate() {
        assert!((ek - measure).abs() < 1e-12, "{k} {ek} {measure}");
    }
    assert_eq!(e.initial, e.leaf_energy[0]);
}

#[test]
fn doubling_weight_rescales_energy() {
    let (v, d) = minkowski_slab();
    let v = v.map(|t| t * t + 0.3);
    let a = 1.7;
    let e1 = linear::energy(&v, None, &d, a);
    let e2 = linear::energy(&v, None, &d, 2.0 * a);
    for k in 0..d.leaf_count() {
        let t = d.time_index(k) as f64 * d.grid().spacing(0);
        let expect = (-a * t).exp() * e1.leaf_energy[k];
        assert!((e2.leaf_energy[k] - expect).abs() <= 1e-14 * expect.max(1.0));
    }
}
