//! Metric measure spaces with small-scale doubling and upper Ahlfors data,
//! finite quadrature windows into them, greedy nets and the cell partition
//! built from a net.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::{Error, Result};

/// Geometry of the parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SpaceKind {
    /// `R^d` with Lebesgue measure.
    Euclidean { dim: usize },
    /// Upper half-plane of points `(b, a)`, `a > 0`, with the hyperbolic
    /// metric and the measure `a⁻² db da`.
    HyperbolicHalfPlane,
    /// A subset of `R^d` with user-declared constants; metric and measure
    /// are Euclidean.
    EuclideanRegion { dim: usize },
}

/// A metric measure space together with its small-scale constants.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpaceModel {
    pub kind: SpaceKind,
    /// Scale `R_A` below which the doubling and Ahlfors bounds hold.
    pub small_scale_cutoff: f64,
    /// `C_{R_A}`: `μ(B_{2r}) ≤ C μ(B_r)` for `r ≤ R_A`.
    pub doubling_constant: f64,
    /// `α` in `μ(B_r) ≤ α r^γ`.
    pub ahlfors_alpha: f64,
    /// `γ` in `μ(B_r) ≤ α r^γ`.
    pub ahlfors_exponent: f64,
}

/// Volume of the Euclidean unit ball in `R^d`.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        0 => 1.0,
        1 => 2.0,
        d => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

impl SpaceModel {
    /// `R^d` with exact constants `C = 2^d`, `γ = d`, `α = |B_1|`. The cutoff
    /// only bounds the radii used for nets.
    pub fn euclidean(dim: usize) -> Self {
        Self {
            kind: SpaceKind::Euclidean { dim },
            small_scale_cutoff: 1.0,
            doubling_constant: libm::pow(2.0, dim as f64),
            ahlfors_alpha: unit_ball_volume(dim),
            ahlfors_exponent: dim as f64,
        }
    }

    /// Hyperbolic half-plane, constants valid for `R_A = 0.5`.
    pub fn hyperbolic() -> Self {
        Self {
            kind: SpaceKind::HyperbolicHalfPlane,
            small_scale_cutoff: 0.5,
            doubling_constant: 4.5,
            ahlfors_alpha: PI * 1.1,
            ahlfors_exponent: 2.0,
        }
    }

    /// User-supplied constants, spot-checked against the analytic ball
    /// measure at dyadic radii below the cutoff.
    pub fn custom(
        kind: SpaceKind,
        small_scale_cutoff: f64,
        doubling_constant: f64,
        ahlfors_alpha: f64,
        ahlfors_exponent: f64,
    ) -> Result<Self> {
        if !(small_scale_cutoff > 0.0) || !(ahlfors_alpha > 0.0) || !(ahlfors_exponent > 0.0) {
            return Err(Error::InvalidArgument(
                "space constants must be positive".into(),
            ));
        }
        if !(doubling_constant >= 1.0) {
            return Err(Error::InvalidArgument(
                "doubling constant must be at least 1".into(),
            ));
        }
        let space = Self {
            kind,
            small_scale_cutoff,
            doubling_constant,
            ahlfors_alpha,
            ahlfors_exponent,
        };
        space.spot_check()?;
        Ok(space)
    }

    /// Samples the doubling and upper Ahlfors inequalities at `R_A·2^{-k}`,
    /// `k = 0..12`, with relative slack 1e-6.
    pub fn spot_check(&self) -> Result<()> {
        let center = self.origin();
        for k in 0..12 {
            let r = self.small_scale_cutoff * libm::pow(2.0, -(k as f64));
            let small = ball_measure(self, &center, r)?;
            let big = ball_measure(self, &center, 2.0 * r)?;
            if big > self.doubling_constant * small * (1.0 + 1e-6) {
                return Err(Error::Hypothesis(format!(
                    "doubling fails at r = {r}: ratio {}",
                    big / small
                )));
            }
            let cap = self.ahlfors_alpha * libm::pow(r, self.ahlfors_exponent);
            if small > cap * (1.0 + 1e-6) {
                return Err(Error::Hypothesis(format!(
                    "upper Ahlfors bound fails at r = {r}: {small} > {cap}"
                )));
            }
        }
        Ok(())
    }

    pub fn coordinate_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Euclidean { dim } | SpaceKind::EuclideanRegion { dim } => dim,
            SpaceKind::HyperbolicHalfPlane => 2,
        }
    }

    fn origin(&self) -> Vec<f64> {
        match self.kind {
            SpaceKind::HyperbolicHalfPlane => vec![0.0, 1.0],
            _ => vec![0.0; self.coordinate_dim()],
        }
    }

    /// Density of the measure with respect to Lebesgue measure on coordinates.
    pub fn density(&self, p: &[f64]) -> f64 {
        match self.kind {
            SpaceKind::HyperbolicHalfPlane => 1.0 / (p[1] * p[1]),
            _ => 1.0,
        }
    }

    fn check_point(&self, p: &[f64]) -> Result<()> {
        let d = self.coordinate_dim();
        if p.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        if self.kind == SpaceKind::HyperbolicHalfPlane && !(p[1] > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "hyperbolic scale coordinate must be positive, got {}",
                p[1]
            )));
        }
        Ok(())
    }
}

/// Metric of the space. Hyperbolic points are `(b, a)` with `a > 0`.
pub fn distance(space: &SpaceModel, p: &[f64], q: &[f64]) -> Result<f64> {
    space.check_point(p)?;
    space.check_point(q)?;
    Ok(distance_unchecked(space, p, q))
}

pub(crate) fn distance_unchecked(space: &SpaceModel, p: &[f64], q: &[f64]) -> f64 {
    let sq: f64 = p.iter().zip(q).map(|(x, y)| (x - y) * (x - y)).sum();
    match space.kind {
        SpaceKind::HyperbolicHalfPlane => {
            if sq == 0.0 {
                0.0
            } else {
                libm::acosh(1.0 + sq / (2.0 * p[1] * q[1]))
            }
        }
        _ => libm::sqrt(sq),
    }
}

/// Measure of the ball `B_r(center)`.
pub fn ball_measure(space: &SpaceModel, center: &[f64], r: f64) -> Result<f64> {
    space.check_point(center)?;
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "radius must be positive, got {r}"
        )));
    }
    Ok(match space.kind {
        SpaceKind::HyperbolicHalfPlane => 2.0 * PI * (libm::cosh(r) - 1.0),
        SpaceKind::Euclidean { dim } | SpaceKind::EuclideanRegion { dim } => {
            unit_ball_volume(dim) * libm::pow(r, dim as f64)
        }
    })
}

/// A finite window into the space: a midpoint grid on a coordinate box with
/// quadrature weights for the space's measure. Each weight is the measure of
/// the grid cell around its point.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    intervals: Vec<(f64, f64)>,
    counts: Vec<usize>,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl Region {
    /// Midpoint grid with `counts[i]` cells along axis `i`; the last axis
    /// varies fastest.
    pub fn grid(space: &SpaceModel, intervals: &[(f64, f64)], counts: &[usize]) -> Result<Self> {
        let d = space.coordinate_dim();
        if intervals.len() != d || counts.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: intervals.len().min(counts.len()),
            });
        }
        if counts.contains(&0) {
            return Err(Error::Empty("region grid"));
        }
        if intervals.iter().any(|(lo, hi)| !(hi > lo)) {
            return Err(Error::InvalidArgument("empty coordinate interval".into()));
        }
        if space.kind == SpaceKind::HyperbolicHalfPlane && !(intervals[1].0 > 0.0) {
            return Err(Error::InvalidArgument(
                "hyperbolic window must lie in a > 0".into(),
            ));
        }
        let steps: Vec<f64> = intervals
            .iter()
            .zip(counts)
            .map(|((lo, hi), &c)| (hi - lo) / c as f64)
            .collect();
        let cell_volume: f64 = steps.iter().product();
        let total: usize = counts.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            let p: Vec<f64> = (0..d)
                .map(|k| intervals[k].0 + (idx[k] as f64 + 0.5) * steps[k])
                .collect();
            // Hyperbolic cells integrate a⁻² exactly over the a-interval.
            let w = match space.kind {
                SpaceKind::HyperbolicHalfPlane => {
                    let a_lo = p[1] - 0.5 * steps[1];
                    steps[0] * (1.0 / a_lo - 1.0 / (a_lo + steps[1]))
                }
                _ => cell_volume * space.density(&p),
            };
            weights.push(w);
            points.push(p);
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < counts[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        let region = Self {
            intervals: intervals.to_vec(),
            counts: counts.to_vec(),
            points,
            weights,
        };
        let exact = region.exact_measure(space);
        let total_weight = region.total_weight();
        if (total_weight - exact).abs() > 0.01 * exact {
            return Err(Error::InvalidArgument(format!(
                "grid quadrature {total_weight} is not within 1% of the window measure {exact}"
            )));
        }
        Ok(region)
    }

    /// Grid with the given spacing along every axis; the interval lengths
    /// must be whole multiples of the spacing.
    pub fn with_spacing(
        space: &SpaceModel,
        intervals: &[(f64, f64)],
        spacing: f64,
    ) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidArgument(
                "grid spacing must be positive".into(),
            ));
        }
        let mut counts = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            let c = libm::round((hi - lo) / spacing);
            if c < 1.0 || ((hi - lo) / spacing - c).abs() > 1e-9 * c.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "interval [{lo}, {hi}] is not a multiple of spacing {spacing}"
                )));
            }
            counts.push(c as usize);
        }
        Self::grid(space, intervals, &counts)
    }

    /// Explicit points and weights (no box structure).
    pub fn from_points(
        space: &SpaceModel,
        points: Vec<Vec<f64>>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Empty("region points"));
        }
        if points.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        for p in &points {
            space.check_point(p)?;
        }
        if weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::InvalidArgument(
                "region weights must be positive".into(),
            ));
        }
        Ok(Self {
            intervals: Vec::new(),
            counts: vec![1; space.coordinate_dim()],
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Measure of the coordinate box (sum of weights for point regions).
    pub fn exact_measure(&self, space: &SpaceModel) -> f64 {
        if self.intervals.is_empty() {
            return self.total_weight();
        }
        match space.kind {
            SpaceKind::HyperbolicHalfPlane => {
                let (b0, b1) = self.intervals[0];
                let (a0, a1) = self.intervals[1];
                (b1 - b0) * (1.0 / a0 - 1.0 / a1)
            }
            _ => self.intervals.iter().map(|(lo, hi)| hi - lo).product(),
        }
    }

    /// Largest metric distance between neighbouring grid points along an
    /// axis; zero for single-point axes.
    pub fn metric_resolution(&self, space: &SpaceModel) -> f64 {
        if self.intervals.is_empty() {
            return 0.0;
        }
        let mut res = 0.0_f64;
        for (k, ((lo, hi), &c)) in self.intervals.iter().zip(&self.counts).enumerate() {
            if c <= 1 {
                continue;
            }
            let h = (hi - lo) / c as f64;
            let h_metric = match space.kind {
                // Coordinate steps at height a have length ≈ h / a.
                SpaceKind::HyperbolicHalfPlane => {
                    let a_min = self.intervals[1].0
                        + 0.5 * (self.intervals[1].1 - self.intervals[1].0) / self.counts[1] as f64;
                    if k == 0 {
                        h / a_min
                    } else {
                        libm::log((a_min + h) / a_min)
                    }
                }
                _ => h,
            };
            res = res.max(h_metric);
        }
        res
    }
}

/// One cell `X_n` of a partition, with center `y_n`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    /// Grid index of the center.
    pub center: usize,
    /// Grid indices of the members, ascending.
    pub members: Vec<usize>,
    /// Sum of member quadrature weights.
    pub measure: f64,
}

/// Partition of the grid into cells with `B_r(y_n) ⊆ X_n ⊆ B_{2r}(y_n)`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Partition {
    pub radius: f64,
    pub cells: Vec<Cell>,
}

/// Greedy maximal packing: grid points (in grid order) become centers when
/// they are at distance `≥ 2r` from every earlier center. Returns grid
/// indices.
pub fn greedy_net(space: &SpaceModel, region: &Region, r: f64) -> Result<Vec<usize>> {
    if region.is_empty() {
        return Err(Error::Empty("region"));
    }
    if !(r > 0.0) || r > space.small_scale_cutoff / 4.0 {
        return Err(Error::Hypothesis(format!(
            "net radius {r} must lie in (0, R_A/4 = {}]",
            space.small_scale_cutoff / 4.0
        )));
    }
    let res = region.metric_resolution(space);
    if res > r / 4.0 * (1.0 + 1e-9) {
        return Err(Error::Hypothesis(format!(
            "grid resolution {res} is coarser than r/4 = {}",
            r / 4.0
        )));
    }
    let pts = region.points();
    let mut centers: Vec<usize> = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let far = centers
            .iter()
            .all(|&c| distance_unchecked(space, p, &pts[c]) >= 2.0 * r);
        if far {
            centers.push(i);
        }
    }
    Ok(centers)
}

/// Assigns each grid point to its nearest center, ties to the lower index.
pub fn assign_cells(
    space: &SpaceModel,
    region: &Region,
    centers: &[usize],
    r: f64,
) -> Result<Partition> {
    if centers.is_empty() {
        return Err(Error::Empty("net centers"));
    }
    let pts = region.points();
    let mut cells: Vec<Cell> = centers
        .iter()
        .map(|&c| Cell {
            center: c,
            members: Vec::new(),
            measure: 0.0,
        })
        .collect();
    for (i, p) in pts.iter().enumerate() {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (k, &c) in centers.iter().enumerate() {
            let d = distance_unchecked(space, p, &pts[c]);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        if best_d > 2.0 * r * (1.0 + 1e-12) {
            return Err(Error::Uncovered { index: i });
        }
        cells[best].members.push(i);
        cells[best].measure += region.weights()[i];
    }
    Ok(Partition { radius: r, cells })
}

impl Partition {
    /// Checks every partition invariant on the grid; returns a description of
    /// the first violation.
    pub fn check(&self, space: &SpaceModel, region: &Region) -> Result<()> {
        let pts = region.points();
        let mut owner = vec![usize::MAX; pts.len()];
        for (n, cell) in self.cells.iter().enumerate() {
            for &i in &cell.members {
                if owner[i] != usize::MAX {
                    return Err(Error::Hypothesis(format!("grid point {i} is in two cells")));
                }
                owner[i] = n;
            }
        }
        if let Some(i) = owner.iter().position(|&o| o == usize::MAX) {
            return Err(Error::Uncovered { index: i });
        }
        let r = self.radius;
        let cap = space.ahlfors_alpha * libm::pow(2.0 * r, space.ahlfors_exponent);
        for (n, cell) in self.cells.iter().enumerate() {
            let y = &pts[cell.center];
            for (i, p) in pts.iter().enumerate() {
                let d = distance_unchecked(space, p, y);
                if d < r && owner[i] != n {
                    return Err(Error::Hypothesis(format!(
                        "point {i} lies in B_r of center {n} but belongs to cell {}",
                        owner[i]
                    )));
                }
                if owner[i] == n && d > 2.0 * r * (1.0 + 1e-12) {
                    return Err(Error::Hypothesis(format!(
                        "cell {n} member {i} is outside B_2r"
                    )));
                }
            }
            if cell.measure > cap * (1.0 + 1e-9) {
                return Err(Error::Hypothesis(format!(
                    "cell {n} measure {} exceeds α(2r)^γ = {cap}",
                    cell.measure
                )));
            }
        }
        Ok(())
    }

    /// Cell index of every grid point.
    pub fn owners(&self, len: usize) -> Vec<usize> {
        let mut owner = vec![usize::MAX; len];
        for (n, cell) in self.cells.iter().enumerate() {
            for &i in &cell.members {
                owner[i] = n;
            }
        }
        owner
    }

    pub fn max_cell_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).fold(0.0, f64::max)
    }
}

/// Largest number of points (including the point itself) within open
/// distance `radius` of any single point.
pub fn crowding_count<P: AsRef<[f64]>>(space: &SpaceModel, points: &[P], radius: f64) -> usize {
    points
        .iter()
        .map(|p| {
            points
                .iter()
                .filter(|q| distance_unchecked(space, p.as_ref(), q.as_ref()) < radius)
                .count()
        })
        .max()
        .unwrap_or(0)
}

/// Minimum pairwise distance.
pub fn separation<P: AsRef<[f64]>>(space: &SpaceModel, points: &[P]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Empty("separation needs at least two points"));
    }
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.min(distance_unchecked(
                space,
                points[i].as_ref(),
                points[j].as_ref(),
            ));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distance_examples() {
        let e2 = SpaceModel::euclidean(2);
        assert_eq!(distance(&e2, &[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(distance(&e2, &[1.5, 2.0], &[1.5, 2.0]).unwrap(), 0.0);
        let h = SpaceModel::hyperbolic();
        let d = distance(&h, &[0.0, 1.0], &[0.0, core::f64::consts::E]).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        assert_eq!(distance(&h, &[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert!(matches!(
            distance(&h, &[0.0, 0.0], &[0.0, 1.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn triangle_inequality_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for space in [
            SpaceModel::euclidean(1),
            SpaceModel::euclidean(2),
            SpaceModel::hyperbolic(),
        ] {
            let d = space.coordinate_dim();
            let pt = |rng: &mut ChaCha8Rng| -> Vec<f64> {
                let mut p: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
                if space.kind == SpaceKind::HyperbolicHalfPlane {
                    p[1] = rng.random_range(0.1..4.0);
                }
                p
            };
            for _ in 0..1000 {
                let (x, y, z) = (pt(&mut rng), pt(&mut rng), pt(&mut rng));
                let xy = distance(&space, &x, &y).unwrap();
                let yz = distance(&space, &y, &z).unwrap();
                let xz = distance(&space, &x, &z).unwrap();
                assert!(xz <= xy + yz + 1e-9);
                assert!((xy - distance(&space, &y, &x).unwrap()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ball_measures() {
        let h = SpaceModel::hyperbolic();
        let c = [0.0, 1.0];
        let m1 = ball_measure(&h, &c, 1.0).unwrap();
        let cosh1 = (core::f64::consts::E + 1.0 / core::f64::consts::E) / 2.0;
        assert!((m1 - 2.0 * PI * (cosh1 - 1.0)).abs() < 1e-12);
        let r = 1e-4;
        let small = ball_measure(&h, &c, r).unwrap();
        assert!((small / (PI * r * r) - 1.0).abs() < 1e-6);
        assert!(
            (ball_measure(&SpaceModel::euclidean(2), &[0.0, 0.0], 1.0).unwrap() - PI).abs() < 1e-15
        );
        assert!(ball_measure(&h, &c, 0.0).is_err());
    }

    #[test]
    fn hyperbolic_ball_measure_monte_carlo() {
        // The hyperbolic ball about (0, 1) is the Euclidean disk with center
        // (0, cosh r) and radius sinh r; integrate a⁻² over it by sampling.
        let h = SpaceModel::hyperbolic();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for r in [0.1_f64, 0.4, 1.0] {
            let (c, s) = (r.cosh(), r.sinh());
            let n = 200_000;
            let mut acc = 0.0;
            for _ in 0..n {
                let x: f64 = rng.random_range(-s..s);
                let y: f64 = rng.random_range(c - s..c + s);
                if x * x + (y - c) * (y - c) <= s * s
                    && distance(&h, &[0.0, 1.0], &[x, y]).unwrap() <= r + 1e-12
                {
                    acc += 1.0 / (y * y);
                }
            }
            let est = acc * 4.0 * s * s / n as f64;
            let exact = ball_measure(&h, &[0.0, 1.0], r).unwrap();
            assert!(
                (est - exact).abs() < 0.01 * exact,
                "r={r}: {est} vs {exact}"
            );
        }
    }

    #[test]
    fn doubling_ratios() {
        for d in 1..4 {
            let e = SpaceModel::euclidean(d);
            let o = vec![0.0; d];
            for r in [0.01, 0.1, 0.2] {
                let ratio =
                    ball_measure(&e, &o, 2.0 * r).unwrap() / ball_measure(&e, &o, r).unwrap();
                assert!((ratio - libm::pow(2.0, d as f64)).abs() < 1e-9);
            }
        }
        let h = SpaceModel::hyperbolic();
        let ratio = |r: f64| (libm::cosh(2.0 * r) - 1.0) / (libm::cosh(r) - 1.0);
        for k in 0..50 {
            let r = 0.5 * k as f64 / 49.0 + 1e-3;
            if r <= 0.5 {
                assert!(ratio(r) <= 4.5);
            }
        }
        assert!((ratio(1e-4) - 4.0).abs() < 1e-6);
        assert!(h.spot_check().is_ok());
        assert!(SpaceModel::euclidean(2).spot_check().is_ok());
    }

    #[test]
    fn custom_constants_are_spot_checked() {
        let bad = SpaceModel::custom(SpaceKind::EuclideanRegion { dim: 2 }, 1.0, 3.0, PI, 2.0);
        assert!(matches!(bad, Err(Error::Hypothesis(_))));
        let ok = SpaceModel::custom(SpaceKind::EuclideanRegion { dim: 2 }, 1.0, 4.0, PI, 2.0);
        assert!(ok.is_ok());
    }

    #[test]
    fn region_weights_match_measure() {
        let h = SpaceModel::hyperbolic();
        let r = Region::grid(&h, &[(-2.0, 2.0), (0.5, 2.0)], &[80, 60]).unwrap();
        let exact = r.exact_measure(&h);
        assert!((r.total_weight() - exact).abs() < 0.01 * exact);
        let e = SpaceModel::euclidean(1);
        assert!(Region::with_spacing(&e, &[(0.0, 10.0)], 0.3).is_err());
        assert_eq!(
            Region::with_spacing(&e, &[(0.0, 10.0)], 0.25)
                .unwrap()
                .len(),
            40
        );
    }

    #[test]
    fn net_single_point() {
        let e = SpaceModel::euclidean(2);
        let region = Region::from_points(&e, vec![vec![0.3, 0.4]], vec![1.0]).unwrap();
        assert_eq!(greedy_net(&e, &region, 0.1).unwrap(), vec![0]);
        let part = assign_cells(&e, &region, &[0], 0.1).unwrap();
        assert_eq!(part.cells.len(), 1);
        assert_eq!(part.cells[0].members, vec![0]);
    }

    fn exhaustive_net_check(space: &SpaceModel, region: &Region, centers: &[usize], r: f64) {
        let pts = region.points();
        for (a, &i) in centers.iter().enumerate() {
            for &j in &centers[a + 1..] {
                assert!(distance_unchecked(space, &pts[i], &pts[j]) >= 2.0 * r);
            }
        }
        for p in pts {
            let nearest = centers
                .iter()
                .map(|&c| distance_unchecked(space, p, &pts[c]))
                .fold(f64::INFINITY, f64::min);
            assert!(nearest < 2.0 * r);
        }
    }

    #[test]
    fn net_on_line() {
        let mut e = SpaceModel::euclidean(1);
        e.small_scale_cutoff = 4.0;
        let region = Region::with_spacing(&e, &[(0.0, 10.0)], 0.25).unwrap();
        let centers = greedy_net(&e, &region, 1.0).unwrap();
        exhaustive_net_check(&e, &region, &centers, 1.0);
        let pts = region.points();
        for w in centers.windows(2) {
            assert!(pts[w[1]][0] - pts[w[0]][0] >= 2.0);
        }
    }

    #[test]
    fn net_on_hyperbolic_strip() {
        let h = SpaceModel::hyperbolic();
        let region = Region::grid(&h, &[(-1.0, 1.0), (0.5, 1.5)], &[200, 90]).unwrap();
        let centers = greedy_net(&h, &region, 0.125).unwrap();
        exhaustive_net_check(&h, &region, &centers, 0.125);
    }

    #[test]
    fn net_rejects_bad_radius_or_coarse_grid() {
        let e = SpaceModel::euclidean(1);
        let region = Region::with_spacing(&e, &[(0.0, 1.0)], 0.125).unwrap();
        assert!(matches!(
            greedy_net(&e, &region, 0.5),
            Err(Error::Hypothesis(_))
        ));
        assert!(matches!(
            greedy_net(&e, &region, 0.1),
            Err(Error::Hypothesis(_))
        ));
    }

    #[test]
    fn tie_goes_to_lower_center() {
        let e = SpaceModel::euclidean(1);
        let region =
            Region::from_points(&e, vec![vec![0.0], vec![0.1], vec![0.2]], vec![1.0; 3]).unwrap();
        let part = assign_cells(&e, &region, &[0, 2], 0.1).unwrap();
        assert_eq!(part.cells[0].members, vec![0, 1]);
        assert_eq!(part.cells[1].members, vec![2]);
    }

    #[test]
    fn uncovered_point_is_an_error() {
        let e = SpaceModel::euclidean(1);
        let region = Region::from_points(&e, vec![vec![0.0], vec![1.0]], vec![1.0; 2]).unwrap();
        assert_eq!(
            assign_cells(&e, &region, &[0], 0.1),
            Err(Error::Uncovered { index: 1 })
        );
    }

    #[test]
    fn random_euclidean_partition_cell_measures() {
        let e = SpaceModel::euclidean(2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x0: f64 = rng.random_range(-1.0..1.0);
        let y0: f64 = rng.random_range(-1.0..1.0);
        let region = Region::grid(&e, &[(x0, x0 + 1.5), (y0, y0 + 1.0)], &[96, 64]).unwrap();
        let r = 0.0625;
        let centers = greedy_net(&e, &region, r).unwrap();
        let part = assign_cells(&e, &region, &centers, r).unwrap();
        part.check(&e, &region).unwrap();
        // Oracle: sum grid weights per cell from scratch.
        let owners = part.owners(region.len());
        let mut sums = vec![0.0; part.cells.len()];
        for (i, &o) in owners.iter().enumerate() {
            sums[o] += region.weights()[i];
        }
        let cap = PI * (2.0 * r) * (2.0 * r);
        for s in sums {
            assert!(s <= cap);
        }
    }

    #[test]
    fn crowding_and_separation() {
        let e = SpaceModel::euclidean(1);
        assert_eq!(crowding_count(&e, &[vec![1.0]], 0.5), 1);
        let same = vec![vec![2.0]; 4];
        assert_eq!(crowding_count(&e, &same, 0.5), 4);
        let pts = vec![vec![0.0], vec![1.0], vec![3.0]];
        assert_eq!(separation(&e, &pts).unwrap(), 1.0);
        assert_eq!(separation(&e, &[vec![0.0], vec![0.0]]).unwrap(), 0.0);
        assert!(separation(&e, &[vec![0.0]]).is_err());
    }
}
