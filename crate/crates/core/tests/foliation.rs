use negcurv::foliation::{
    build_slab_domain, causal_cone, normal_field, validate_spacelike, ConeOptions, Direction, FoliatedDomain,
};
use negcurv::geometry::{self, Tolerances};
use negcurv::linalg;
use negcurv::linear::{self, CauchyData, LinearOptions};
use negcurv::scenario::{paraboloid_domain, slab_grid};
use negcurv::{Bump, Catalog, GraphSurface, GridSpec, ScalarField, SymmetricMatrixField};

fn spatial_paraboloid(cells: usize) -> (GraphSurface<f64>, SymmetricMatrixField<f64>) {
    let grid = GridSpec::new(vec![-0.25, -1.0, -1.0], vec![1.0 / 16.0, 0.125, 0.125], vec![9, cells + 1, cells + 1]).unwrap();
    let u = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim: 3 }, &grid).unwrap();
    let g = geometry::lorentzian_metric(&u, &Tolerances::default()).unwrap();
    (u, g)
}

#[test]
fn paraboloid_leaves_are_spacelike_with_closed_form_margins() {
    let (u, g) = spatial_paraboloid(16);
    let d = build_slab_domain(u.grid(), &g, 0).unwrap();
    let report = validate_spacelike(&d, &g);
    assert!(report.passed());
    let grid = u.grid();
    for m in &report.leaves {
        let r2: Vec<f64> = d
            .leaf_points(m.leaf)
            .iter()
            .map(|&p| grid.coords(p).iter().map(|x| x * x).sum())
            .collect();
        let tangent = r2.iter().map(|r| (1.0 + r).powi(-5)).fold(f64::INFINITY, f64::min);
        let temporal = r2.iter().map(|r| (1.0 + r).powi(5)).fold(f64::INFINITY, f64::min);
        assert!((m.min_tangent_eigenvalue - tangent).abs() <= 1e-12 * tangent, "{m:?}");
        assert!((m.min_temporal_margin - temporal).abs() <= 1e-12 * temporal);
        assert!(m.min_lateral_margin.map_or(true, |x| x > 0.0));
    }
    // Margins shrink away from the origin.
    let first = report.leaves[0].min_tangent_eigenvalue;
    let mid = report.leaves[4].min_tangent_eigenvalue;
    assert!(mid > first);
}

#[test]
fn normals_are_unit_and_orthogonal_to_leaves() {
    let grid = GridSpec::<f64>::cube(3, -0.5, 0.5, 8).unwrap();
    let bump = Bump::new(0.005, vec![0.0, 0.1, -0.1], 0.4, 6);
    let u = GraphSurface::analytic(Catalog::PerturbedParaboloid { bump }, &grid).unwrap();
    let g = geometry::lorentzian_metric(&u, &Tolerances::default()).unwrap();
    let d = FoliatedDomain::full_slab(&grid, 0, negcurv::foliation::Orientation::Forward);
    let n = normal_field(&d, &g).unwrap();
    for p in 0..grid.len() {
        let gm = g.dense(p);
        let np = n.at(p);
        let gn: Vec<f64> = linalg::mat_vec(3, &gm, np);
        assert!((linalg::dot::<f64>(np, &gn) + 1.0).abs() < 1e-12);
        assert!(gn[1].abs() < 1e-10 && gn[2].abs() < 1e-10);
        assert!(np[0] > 0.0);
    }
    let origin = grid.index(&[4, 4, 4]);
    let flat = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim: 3 }, &grid).unwrap();
    let gf = geometry::lorentzian_metric(&flat, &Tolerances::default()).unwrap();
    assert_eq!(normal_field(&d, &gf).unwrap().at(origin), &[1.0, 0.0, 0.0]);
}

#[test]
fn causal_diamonds_stay_off_the_lateral_boundary() {
    let (u, g) = spatial_paraboloid(16);
    let d = build_slab_domain(u.grid(), &g, 0).unwrap();
    let grid = u.grid();
    let lo = grid.index(&[1, 8, 8]);
    let hi = grid.index(&[6, 8, 8]);
    let mut x = vec![false; grid.len()];
    x[lo] = true;
    let mut y = vec![false; grid.len()];
    y[hi] = true;
    let opts = ConeOptions::default();
    let fut = causal_cone(&g, &x, Direction::Future, opts).unwrap();
    let past = causal_cone(&g, &y, Direction::Past, opts).unwrap();
    let diamond = fut.intersect(&past);
    assert!(diamond.iter().filter(|&&b| b).count() > 2);
    for (p, &m) in diamond.iter().enumerate() {
        if m {
            assert!(d.contains(p) && !d.lateral_mask()[p], "{:?}", grid.coords(p));
        }
    }
}

/// Relative `L^2` mass outside the dilated forward cone of a four-cell blob.
fn blob_leak(dim: usize, cells: usize) -> f64 {
    let tol = Tolerances::default();
    let half = if dim == 2 { 2.0 } else { 1.0 };
    let grid = slab_grid(dim, cells, half, 0.0, 0.5, 0.6).unwrap();
    let u = GraphSurface::analytic(Catalog::HyperbolicParaboloid { dim }, &grid).unwrap();
    let d = paraboloid_domain(&u, &tol).unwrap();
    let leaf0 = d.slice(0);
    let mid = cells / 2;
    let blob: Vec<bool> = leaf0
        .iter()
        .map(|&p| {
            let i = grid.multi_index(p);
            if dim == 2 {
                (mid - 1..=mid + 2).contains(&i[1])
            } else {
                (mid..=mid + 1).contains(&i[1]) && (mid..=mid + 1).contains(&i[2])
            }
        })
        .collect();
    let v1: Vec<f64> = blob.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let v2: Vec<f64> = blob.iter().map(|&b| if b { -0.5 } else { 0.0 }).collect();
    let data = CauchyData::new(&d, v1, v2).unwrap();
    let zero = ScalarField::zeros(&grid);
    let r = linear::solve_linear(&u, &zero, &data, &d, &LinearOptions::default()).unwrap();
    let mut seed = vec![false; grid.len()];
    for (k, &p) in leaf0.iter().enumerate() {
        seed[p] = blob[k];
    }
    let metric = linear::wave_form(&u, &tol).unwrap().coefficients.metric;
    let cone = causal_cone(&metric, &seed, Direction::Future, ConeOptions::default()).unwrap();
    let (mut out, mut all) = (0.0, 0.0);
    for p in 0..grid.len() {
        if d.contains(p) {
            let x = r.v.at(p).powi(2);
            all += x;
            if !cone.contains(p) {
                out += x;
            }
        }
    }
    assert!(all > 0.0);
    (out / all).sqrt()
}

#[test]
fn finite_speed_of_propagation() {
    assert!(blob_leak(2, 64) <= 1e-10);
    assert!(blob_leak(3, 24) <= 1e-10);
}
