//! Lens-shaped slab domains foliated by coordinate time slices, their
//! validation, the unit normal of the leaves, and discrete causal cones.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{SymmetricMatrixField, VectorField};
use crate::grid::GridSpec;
use crate::linalg;
use crate::scalar::Real;

/// Marching direction through the leaves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// Leaf 0 is the first time slice.
    Forward,
    /// Leaf 0 is the last time slice.
    Backward,
}

/// How far the lateral boundary is pulled inward at each leaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TrimRule {
    /// Just enough to keep the lateral boundary strictly spacelike.
    Characteristic,
    /// Additionally at least one cell per leaf, the reach of the explicit
    /// update stencil.
    StencilReach,
}

#[derive(Clone, Copy, Debug)]
pub struct SlabOptions {
    pub time_axis: usize,
    pub orientation: Orientation,
    pub trim: TrimRule,
}

impl Default for SlabOptions {
    fn default() -> Self {
        Self {
            time_axis: 0,
            orientation: Orientation::Forward,
            trim: TrimRule::Characteristic,
        }
    }
}

/// Splits a dense metric into `(g_tt, g_ta, g_ab)` with the time axis removed
/// from the spatial block.
pub fn split_metric<T: Real>(n: usize, g: &[T], time_axis: usize) -> (T, Vec<T>, Vec<T>) {
    let spatial: Vec<usize> = (0..n).filter(|&a| a != time_axis).collect();
    let m = spatial.len();
    let shift = spatial.iter().map(|&a| g[time_axis * n + a]).collect();
    let mut block = vec![T::zero(); m * m];
    for (i, &a) in spatial.iter().enumerate() {
        for (j, &b) in spatial.iter().enumerate() {
            block[i * m + j] = g[a * n + b];
        }
    }
    (g[time_axis * n + time_axis], shift, block)
}

/// Null cone of `g` at a point, in the form
/// `(w - tau c)^T G (w - tau c) <= tau^2 r^2` for a step `(tau, w)`.
#[derive(Clone, Debug)]
pub struct LocalCone<T: Real> {
    pub center: Vec<T>,
    pub radius_sq: T,
    pub block: Vec<T>,
}

impl<T: Real> LocalCone<T> {
    /// `None` when the spatial block is not positive definite.
    pub fn new(n: usize, g: &[T], time_axis: usize) -> Option<Self> {
        let (gtt, shift, block) = split_metric(n, g, time_axis);
        let m = n - 1;
        let ev = linalg::symmetric_eigenvalues(m, &block);
        if !(ev[0] > T::zero()) {
            return None;
        }
        let inv = linalg::inverse_gauss_jordan(m, &block)?;
        let ginv_b = linalg::mat_vec(m, &inv, &shift);
        let radius_sq = linalg::dot(&shift, &ginv_b) - gtt;
        if !(radius_sq > T::zero()) {
            return None;
        }
        Some(Self {
            center: ginv_b.into_iter().map(|c| -c).collect(),
            radius_sq,
            block,
        })
    }

    /// Largest Euclidean coordinate speed of null directions.
    pub fn max_speed(&self) -> T {
        let m = self.center.len();
        let ev = linalg::symmetric_eigenvalues(m, &self.block);
        linalg::dot(&self.center, &self.center).sqrt() + (self.radius_sq / ev[0]).sqrt()
    }

    /// Whether the offset `w` reached in coordinate time `tau` lies in the
    /// causal cone after enlarging `w` to a box of half-width `slack`.
    pub fn admits(&self, tau: T, w: &[T], slack: T) -> bool {
        let m = w.len();
        let d: Vec<T> = (0..m)
            .map(|a| {
                let raw = w[a] - tau * self.center[a];
                raw - raw.max(-slack).min(slack)
            })
            .collect();
        let q = linalg::dot(&d, &linalg::mat_vec(m, &self.block, &d));
        let tol = T::lit(1e-9) * (tau * tau * self.radius_sq + slack * slack);
        q <= tau * tau * self.radius_sq + tol
    }
}

/// Largest characteristic speed of `metric` over the whole grid.
pub fn max_characteristic_speed<T: Real>(
    metric: &SymmetricMatrixField<T>,
    time_axis: usize,
) -> Result<T> {
    let n = metric.dim();
    let speeds: Vec<Option<T>> = (0..metric.grid().len())
        .into_par_iter()
        .map(|p| LocalCone::new(n, &metric.dense(p), time_axis).map(|c| c.max_speed()))
        .collect();
    let mut c = T::zero();
    for (p, s) in speeds.into_iter().enumerate() {
        c = c.max(s.ok_or(Error::NotSpacelike { index: p })?);
    }
    Ok(c)
}

/// Coordinate slab trimmed laterally, leaf by leaf.
#[derive(Clone, Debug, Serialize)]
pub struct FoliatedDomain<T: Real> {
    grid: GridSpec<T>,
    time_axis: usize,
    orientation: Orientation,
    /// Cells removed from each side, indexed `[leaf][axis]`.
    trims: Vec<Vec<usize>>,
    c_max: T,
    #[serde(skip)]
    inside: Vec<bool>,
    #[serde(skip)]
    lateral: Vec<bool>,
}

/// Builds the trimmed slab with default options.
pub fn build_slab_domain<T: Real>(
    grid: &GridSpec<T>,
    metric: &SymmetricMatrixField<T>,
    time_axis: usize,
) -> Result<FoliatedDomain<T>> {
    build_slab_domain_with(
        grid,
        metric,
        SlabOptions {
            time_axis,
            ..Default::default()
        },
    )
}

pub fn build_slab_domain_with<T: Real>(
    grid: &GridSpec<T>,
    metric: &SymmetricMatrixField<T>,
    opts: SlabOptions,
) -> Result<FoliatedDomain<T>> {
    grid.check_same(metric.grid(), "build_slab_domain")?;
    let n = grid.dim();
    let ta = opts.time_axis;
    if ta >= n {
        return Err(Error::InvalidArgument(format!("time axis {ta} out of range")));
    }
    let c_max = max_characteristic_speed(metric, ta)?;
    let leaves = grid.points(ta);
    let dt = grid.spacing(ta);
    let mut trims = Vec::with_capacity(leaves);
    for k in 0..leaves {
        let t = dt * T::from_count(k);
        let row: Vec<usize> = (0..n)
            .map(|a| {
                if a == ta || k == 0 {
                    return 0;
                }
                let cells = (c_max * t / grid.spacing(a) + T::lit(1e-9)).floor();
                let mut trim = cells.to_usize().unwrap_or(usize::MAX / 4) + 1;
                if opts.trim == TrimRule::StencilReach {
                    trim = trim.max(k);
                }
                trim
            })
            .collect();
        for a in (0..n).filter(|&a| a != ta) {
            if 2 * row[a] >= grid.points(a) {
                return Err(Error::EmptyDomain { leaf: k });
            }
        }
        trims.push(row);
    }
    Ok(FoliatedDomain::from_trims(grid.clone(), ta, opts.orientation, trims, c_max))
}

impl<T: Real> FoliatedDomain<T> {
    fn from_trims(
        grid: GridSpec<T>,
        time_axis: usize,
        orientation: Orientation,
        trims: Vec<Vec<usize>>,
        c_max: T,
    ) -> Self {
        let mut d = Self {
            grid,
            time_axis,
            orientation,
            trims,
            c_max,
            inside: Vec::new(),
            lateral: Vec::new(),
        };
        let n = d.grid.dim();
        let last = d.leaf_count() - 1;
        let (inside, lateral): (Vec<bool>, Vec<bool>) = (0..d.grid.len())
            .map(|p| {
                let k = d.leaf_of_point(p);
                let mut on_edge = false;
                for a in (0..n).filter(|&a| a != time_axis) {
                    let i = d.grid.axis_index(p, a);
                    let lo = d.trims[k][a];
                    let hi = d.grid.points(a) - 1 - lo;
                    if i < lo || i > hi {
                        return (false, false);
                    }
                    on_edge |= i == lo || i == hi;
                }
                (true, on_edge && k != 0 && k != last)
            })
            .unzip();
        d.inside = inside;
        d.lateral = lateral;
        d
    }

    /// Untrimmed slab; every grid point belongs to the domain.
    pub fn full_slab(grid: &GridSpec<T>, time_axis: usize, orientation: Orientation) -> Self {
        let trims = vec![vec![0; grid.dim()]; grid.points(time_axis)];
        Self::from_trims(grid.clone(), time_axis, orientation, trims, T::zero())
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn time_axis(&self) -> usize {
        self.time_axis
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn leaf_count(&self) -> usize {
        self.grid.points(self.time_axis)
    }

    /// Maximal characteristic speed used for trimming.
    pub fn c_max(&self) -> T {
        self.c_max
    }

    /// Cells removed from each side of `axis` on leaf `k`.
    pub fn trim(&self, leaf: usize, axis: usize) -> usize {
        self.trims[leaf][axis]
    }

    /// Grid index along the time axis of leaf `k`.
    pub fn time_index(&self, leaf: usize) -> usize {
        match self.orientation {
            Orientation::Forward => leaf,
            Orientation::Backward => self.leaf_count() - 1 - leaf,
        }
    }

    pub fn leaf_of_point(&self, p: usize) -> usize {
        let i = self.grid.axis_index(p, self.time_axis);
        match self.orientation {
            Orientation::Forward => i,
            Orientation::Backward => self.leaf_count() - 1 - i,
        }
    }

    /// Signed coordinate-time step between consecutive leaves.
    pub fn signed_dt(&self) -> T {
        match self.orientation {
            Orientation::Forward => self.grid.spacing(self.time_axis),
            Orientation::Backward => -self.grid.spacing(self.time_axis),
        }
    }

    /// Temporal function rescaled to `[0, 1]` along the marching direction.
    pub fn temporal(&self, p: usize) -> T {
        T::from_count(self.leaf_of_point(p)) / T::from_count(self.leaf_count() - 1)
    }

    pub fn temporal_of_leaf(&self, leaf: usize) -> T {
        T::from_count(leaf) / T::from_count(self.leaf_count() - 1)
    }

    #[inline]
    pub fn contains(&self, p: usize) -> bool {
        self.inside[p]
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    pub fn lateral_mask(&self) -> &[bool] {
        &self.lateral
    }

    /// Grid slice of leaf `k`, trimmed or not.
    pub fn slice(&self, leaf: usize) -> Vec<usize> {
        self.grid.slice(self.time_axis, self.time_index(leaf))
    }

    /// Points of leaf `k` inside the domain.
    pub fn leaf_points(&self, leaf: usize) -> Vec<usize> {
        self.slice(leaf).into_iter().filter(|&p| self.inside[p]).collect()
    }

    pub fn leaf_mask(&self, leaf: usize) -> Vec<bool> {
        let ti = self.time_index(leaf);
        (0..self.grid.len())
            .map(|p| self.inside[p] && self.grid.axis_index(p, self.time_axis) == ti)
            .collect()
    }

    /// Cells from `p` to the trimmed lateral boundary of its leaf, or to the
    /// first/last leaf, whichever is closer.
    pub fn interior_distance(&self, p: usize) -> Option<usize> {
        if !self.inside[p] {
            return None;
        }
        let k = self.leaf_of_point(p);
        let mut d = k.min(self.leaf_count() - 1 - k);
        for a in (0..self.grid.dim()).filter(|&a| a != self.time_axis) {
            let i = self.grid.axis_index(p, a);
            let lo = self.trims[k][a];
            let hi = self.grid.points(a) - 1 - lo;
            d = d.min(i - lo).min(hi - i);
        }
        Some(d)
    }

    /// Whether every point of `other` on leaf `k` is a point of this domain.
    pub fn contains_domain(&self, other: &Self) -> bool {
        other.inside.iter().zip(&self.inside).all(|(&o, &s)| !o || s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafMargins {
    pub leaf: usize,
    /// Smallest eigenvalue of the metric restricted to the leaf.
    pub min_tangent_eigenvalue: f64,
    /// Smallest value of `-g^{-1}(dt, dt)` over the leaf.
    pub min_temporal_margin: f64,
    /// Smallest value of `-g^{-1}(nu, nu)` over lateral facets on this leaf,
    /// `nu` the facet conormal; `None` when the leaf has no lateral points.
    pub min_lateral_margin: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpacelikeReport {
    pub leaves: Vec<LeafMargins>,
    pub leaves_spacelike: bool,
    pub temporal_function_valid: bool,
    pub lateral_spacelike: bool,
}

impl SpacelikeReport {
    pub fn passed(&self) -> bool {
        self.leaves_spacelike && self.temporal_function_valid && self.lateral_spacelike
    }
}

/// Quadratic form of the inverse metric on a covector.
fn inverse_form<T: Real>(n: usize, ginv: &[T], nu: &[T]) -> T {
    linalg::dot(nu, &linalg::mat_vec(n, ginv, nu))
}

pub fn validate_spacelike<T: Real>(
    domain: &FoliatedDomain<T>,
    metric: &SymmetricMatrixField<T>,
) -> SpacelikeReport {
    let grid = domain.grid();
    let n = grid.dim();
    let ta = domain.time_axis();
    let dt = grid.spacing(ta);
    let leaves: Vec<LeafMargins> = (0..domain.leaf_count())
        .into_par_iter()
        .map(|k| {
            let mut eig = f64::INFINITY;
            let mut temporal = f64::INFINITY;
            let mut lateral: Option<f64> = None;
            for p in domain.leaf_points(k) {
                let g = metric.dense(p);
                let (_, _, block) = split_metric(n, &g, ta);
                let ev = linalg::symmetric_eigenvalues(n - 1, &block);
                eig = eig.min(ev[0].as_f64());
                let ginv = linalg::inverse_gauss_jordan(n, &g);
                let mut dtc = vec![T::zero(); n];
                dtc[ta] = T::one();
                let tm = ginv
                    .as_ref()
                    .map(|gi| -inverse_form(n, gi, &dtc).as_f64())
                    .unwrap_or(f64::NEG_INFINITY);
                temporal = temporal.min(tm);
                if !domain.lateral[p] {
                    continue;
                }
                let Some(gi) = ginv.as_ref() else {
                    lateral = Some(f64::NEG_INFINITY);
                    continue;
                };
                let span = dt * T::from_count(k);
                for a in (0..n).filter(|&a| a != ta) {
                    let i = grid.axis_index(p, a);
                    let lo = domain.trims[k][a];
                    let hi = grid.points(a) - 1 - lo;
                    let slope = T::from_count(lo) * grid.spacing(a) / span;
                    for (edge, sign) in [(lo, T::one()), (hi, -T::one())] {
                        if i != edge {
                            continue;
                        }
                        // Boundary x_a = x_edge + sign * slope * s, s = elapsed time.
                        let mut nu = vec![T::zero(); n];
                        nu[a] = T::one();
                        let elapsed_sign = match domain.orientation() {
                            Orientation::Forward => T::one(),
                            Orientation::Backward => -T::one(),
                        };
                        nu[ta] = -sign * slope * elapsed_sign;
                        let margin = -inverse_form(n, gi, &nu).as_f64();
                        lateral = Some(lateral.unwrap_or(f64::INFINITY).min(margin));
                    }
                }
            }
            LeafMargins {
                leaf: k,
                min_tangent_eigenvalue: eig,
                min_temporal_margin: temporal,
                min_lateral_margin: lateral,
            }
        })
        .collect();
    let leaves_spacelike = leaves.iter().all(|l| l.min_tangent_eigenvalue > 0.0);
    let temporal_function_valid = leaves.iter().all(|l| l.min_temporal_margin > 0.0);
    let lateral_spacelike = leaves
        .iter()
        .all(|l| l.min_lateral_margin.is_none_or(|m| m > 0.0));
    SpacelikeReport {
        leaves,
        leaves_spacelike,
        temporal_function_valid,
        lateral_spacelike,
    }
}

/// Future-directed unit normal `N = -grad t / |grad t|_g` of the time slices,
/// evaluated at every grid point.
pub fn normal_field<T: Real>(
    domain: &FoliatedDomain<T>,
    metric: &SymmetricMatrixField<T>,
) -> Result<VectorField<T>> {
    let grid = domain.grid();
    let n = grid.dim();
    let ta = domain.time_axis();
    let mut out = vec![T::zero(); grid.len() * n];
    for p in 0..grid.len() {
        let g = metric.dense(p);
        let gi = linalg::inverse_gauss_jordan(n, &g).ok_or(Error::NotSpacelike { index: p })?;
        let gtt = gi[ta * n + ta];
        if !(gtt < T::zero()) {
            return Err(Error::NotSpacelike { index: p });
        }
        let norm = (-gtt).sqrt();
        for i in 0..n {
            out[p * n + i] = -gi[i * n + ta] / norm;
        }
    }
    Ok(VectorField::from_raw(grid.clone(), out))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Direction {
    Future,
    Past,
}

#[derive(Clone, Debug, Serialize)]
pub struct CausalMask<T: Real> {
    grid: GridSpec<T>,
    membership: Vec<bool>,
    direction: Direction,
}

impl<T: Real> CausalMask<T> {
    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn membership(&self) -> &[bool] {
        &self.membership
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn contains(&self, p: usize) -> bool {
        self.membership[p]
    }

    pub fn count(&self) -> usize {
        self.membership.iter().filter(|&&m| m).count()
    }

    pub fn intersect(&self, other: &Self) -> Vec<bool> {
        self.membership
            .iter()
            .zip(&other.membership)
            .map(|(&a, &b)| a && b)
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ConeOptions<T: Real> {
    pub time_axis: usize,
    /// Per-step spatial slack; `None` means one cell of the finest spatial
    /// spacing.
    pub dilation: Option<T>,
}

impl<T: Real> Default for ConeOptions<T> {
    fn default() -> Self {
        Self {
            time_axis: 0,
            dilation: None,
        }
    }
}

/// Discrete causal future or past of `seed`, propagated leaf by leaf using
/// the local cone at each source point.
pub fn causal_cone<T: Real>(
    metric: &SymmetricMatrixField<T>,
    seed: &[bool],
    direction: Direction,
    opts: ConeOptions<T>,
) -> Result<CausalMask<T>> {
    let grid = metric.grid();
    if seed.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "seed has {} entries for {} grid points",
            seed.len(),
            grid.len()
        )));
    }
    let n = grid.dim();
    let ta = opts.time_axis;
    let slack = opts.dilation.unwrap_or_else(|| grid.min_spatial_spacing(ta));
    let cones: Vec<Option<LocalCone<T>>> = (0..grid.len())
        .into_par_iter()
        .map(|p| LocalCone::new(n, &metric.dense(p), ta))
        .collect();
    let mut c_max = T::zero();
    for (p, c) in cones.iter().enumerate() {
        let c = c.as_ref().ok_or(Error::NotSpacelike { index: p })?;
        c_max = c_max.max(c.max_speed());
    }
    let dt = grid.spacing(ta);
    let tau = match direction {
        Direction::Future => dt,
        Direction::Past => -dt,
    };
    let spatial: Vec<usize> = (0..n).filter(|&a| a != ta).collect();
    let reach: Vec<isize> = spatial
        .iter()
        .map(|&a| ((c_max * dt + slack) / grid.spacing(a)).ceil().to_isize().unwrap_or(0) + 1)
        .collect();

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

    let mut member = seed.to_vec();
    let levels = grid.points(ta);
    let order: Vec<usize> = match direction {
        Direction::Future => (0..levels).collect(),
        Direction::Past => (0..levels).rev().collect(),
    };
    for w in order.windows(2) {
        let (from, to) = (w[0], w[1]);
        let targets = grid.slice(ta, to);
        let added: Vec<usize> = targets
            .par_iter()
            .copied()
            .filter(|&q| !member[q])
            .filter(|&q| {
                let step = |p: usize| grid.neighbor(p, ta, from as isize - to as isize);
                let base = step(q).expect("adjacent leaf");
                offsets.iter().any(|off| {
                    // Source point p = q - off on the previous leaf.
                    let mut p = base;
                    for (s, &a) in spatial.iter().enumerate() {
                        match grid.neighbor(p, a, -off[s]) {
                            Some(x) => p = x,
                            None => return false,
                        }
                    }
                    if !member[p] {
                        return false;
                    }
                    let wv: Vec<T> = spatial
                        .iter()
                        .enumerate()
                        .map(|(s, &a)| T::from_isize(off[s]).unwrap() * grid.spacing(a))
                        .collect();
                    cones[p].as_ref().unwrap().admits(tau, &wv, slack)
                })
            })
            .collect();
        for q in added {
            member[q] = true;
        }
    }
    Ok(CausalMask {
        grid: grid.clone(),
        membership: member,
        direction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minkowski(grid: &GridSpec<f64>, diag: &[f64]) -> SymmetricMatrixField<f64> {
        let n = diag.len();
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = diag[i];
        }
        SymmetricMatrixField::constant(grid, &d).unwrap()
    }

    #[test]
    fn unit_speed_trapezoid() {
        let g = GridSpec::<f64>::new(vec![0.0, -3.0], vec![0.0625; 2], vec![17, 97]).unwrap();
        let d = build_slab_domain(&g, &minkowski(&g, &[-1.0, 1.0]), 0).unwrap();
        assert!((d.c_max() - 1.0).abs() < 1e-14);
        assert_eq!(d.trim(0, 1), 0);
        for k in 1..6 {
            assert_eq!(d.trim(k, 1), k + 1);
            assert_eq!(d.trim(k + 1, 1) - d.trim(k, 1), 1);
        }
        assert!(validate_spacelike(&d, &minkowski(&g, &[-1.0, 1.0])).passed());
    }

    #[test]
    fn half_speed_trims_every_other_step() {
        let g = GridSpec::<f64>::new(vec![0.0, -3.0], vec![0.0625; 2], vec![17, 97]).unwrap();
        let m = minkowski(&g, &[-1.0, 4.0]);
        let d = build_slab_domain(&g, &m, 0).unwrap();
        assert!((d.c_max() - 0.5).abs() < 1e-14);
        let trims: Vec<usize> = (1..8).map(|k| d.trim(k, 1)).collect();
        assert_eq!(trims, vec![1, 2, 2, 3, 3, 4, 4]);
        assert!(validate_spacelike(&d, &m).passed());
    }

    #[test]
    fn empty_domain_detected() {
        let g = GridSpec::<f64>::new(vec![0.0, 0.0], vec![0.1, 0.1], vec![30, 9]).unwrap();
        let r = build_slab_domain(&g, &minkowski(&g, &[-1.0, 1.0]), 0);
        assert!(matches!(r, Err(Error::EmptyDomain { .. })));
    }

    #[test]
    fn wrong_time_direction_fails() {
        let g = GridSpec::<f64>::cube(3, -1.0, 1.0, 6).unwrap();
        let m = minkowski(&g, &[1.0, -1.0, 1.0]);
        assert!(matches!(build_slab_domain(&g, &m, 0), Err(Error::NotSpacelike { .. })));
        let d = FoliatedDomain::full_slab(&g, 0, Orientation::Forward);
        let rep = validate_spacelike(&d, &m);
        assert!(!rep.leaves_spacelike);
        assert!(!rep.passed());
    }

    #[test]
    fn normals_of_constant_metrics() {
        let g = GridSpec::<f64>::cube(3, -1.0, 1.0, 4).unwrap();
        let d = FoliatedDomain::full_slab(&g, 0, Orientation::Forward);
        let n1 = normal_field(&d, &minkowski(&g, &[-1.0, 1.0, 1.0])).unwrap();
        assert_eq!(n1.at(5), &[1.0, 0.0, 0.0]);
        let n4 = normal_field(&d, &minkowski(&g, &[-4.0, 1.0, 1.0])).unwrap();
        assert_eq!(n4.at(5), &[0.5, 0.0, 0.0]);
    }

    #[test]
    fn cone_of_origin_is_light_cone() {
        let g = GridSpec::<f64>::new(vec![0.0, -1.0], vec![0.1, 0.1], vec![11, 21]).unwrap();
        let m = minkowski(&g, &[-1.0, 1.0]);
        let mut seed = vec![false; g.len()];
        seed[g.index(&[0, 10])] = true;
        let exact = causal_cone(&m, &seed, Direction::Future, ConeOptions { time_axis: 0, dilation: Some(0.0) }).unwrap();
        for p in 0..g.len() {
            let (t, x) = (g.coord(p, 0), g.coord(p, 1));
            assert_eq!(exact.contains(p), t >= x.abs() - 1e-9, "t={t} x={x}");
        }
        let dilated = causal_cone(&m, &seed, Direction::Future, ConeOptions::default()).unwrap();
        for p in 0..g.len() {
            let (t, x) = (g.coord(p, 0), g.coord(p, 1));
            if exact.contains(p) {
                assert!(dilated.contains(p));
            }
            if dilated.contains(p) {
                assert!(x.abs() <= 2.0 * t + 1e-9);
            }
        }
    }

    #[test]
    fn diamond_between_two_points() {
        let g = GridSpec::<f64>::new(vec![0.0, -2.0], vec![0.1, 0.1], vec![21, 41]).unwrap();
        let m = minkowski(&g, &[-1.0, 1.0]);
        let mut p = vec![false; g.len()];
        p[g.index(&[0, 20])] = true;
        let mut q = vec![false; g.len()];
        q[g.index(&[20, 20])] = true;
        let opts = ConeOptions { time_axis: 0, dilation: Some(0.0) };
        let fut = causal_cone(&m, &p, Direction::Future, opts).unwrap();
        let past = causal_cone(&m, &q, Direction::Past, opts).unwrap();
        let diamond = fut.intersect(&past);
        for i in 0..g.len() {
            let (t, x) = (g.coord(i, 0), g.coord(i, 1));
            assert_eq!(diamond[i], x.abs() <= t.min(2.0 - t) + 1e-9);
        }
    }

    #[test]
    fn whole_grid_seed_is_fixed() {
        let g = GridSpec::<f64>::cube(2, 0.0, 1.0, 8).unwrap();
        let m = minkowski(&g, &[-1.0, 1.0]);
        let seed = vec![true; g.len()];
        let c = causal_cone(&m, &seed, Direction::Future, ConeOptions::default()).unwrap();
        assert_eq!(c.count(), g.len());
    }
}
