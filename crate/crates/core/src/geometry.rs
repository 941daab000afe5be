//! Convex compact subsets of R^d through their support functions.
//!
//! Three exact set types are supported: segments `conv{0, x}`, zonotopes
//! `Σ_k [0,1]·g_k` anchored at the origin, and V-polytopes. Each one can be
//! sampled on a [`DirectionGrid`] to give a [`SupportVector`], which is the
//! finite image of the isometric embedding `A ↦ s(·, A)`. On support vectors
//! Minkowski addition is pointwise addition, closed convex union is the
//! pointwise maximum, and the Hausdorff distance is the sup-norm gap.
//!
//! A finite grid cannot attain the supremum over the unit sphere, so
//! [`hausdorff_grid`] reports an interval `[distance, distance + error_bound]`
//! that contains the true Hausdorff distance. The error term comes from the
//! Lipschitz bound `|s(u, A) − s(v, A)| ≤ |A|·‖u − v‖`.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 64;

/// Directions in the default planar grid.
pub const DEFAULT_PLANAR_DIRECTIONS: usize = 720;
/// Directions in the default grid for d = 3.
pub const DEFAULT_SPATIAL_DIRECTIONS: usize = 2000;
/// Random directions added to the axis cross for d ≥ 4.
pub const DEFAULT_HIGH_DIM_EXTRA: usize = 512;

/// Largest zonotope for which [`Zonotope::set_norm`] enumerates vertices.
const EXACT_NORM_GENERATORS: usize = 16;

/// A point of R^d, 1 ≤ d ≤ 64, with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>")]
pub struct Vector(SmallVec<[f64; 4]>);

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Vector::new(coords)
    }
}

impl Vector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::InvalidDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self(SmallVec::from_vec(coords)))
    }

    /// Builds a vector from a slice.
    ///
    /// Panics on an empty slice, more than 64 coordinates or a non-finite entry;
    /// use [`Vector::new`] for fallible construction.
    pub fn from_slice(coords: &[f64]) -> Self {
        Self::new(coords.to_vec()).expect("invalid vector")
    }

    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "invalid dimension {dim}");
        Self(SmallVec::from_elem(0.0, dim))
    }

    /// The `i`-th standard basis vector of R^dim.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = 1.0;
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn scale(&self, alpha: f64) -> Vector {
        Self(self.0.iter().map(|c| alpha * c).collect())
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Adds `alpha * other` in place. Dimensions are the caller's responsibility.
    pub(crate) fn axpy(&mut self, alpha: f64, other: &Vector) {
        debug_assert_eq!(self.dim(), other.dim());
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += alpha * b;
        }
    }
}

impl From<f64> for Vector {
    fn from(x: f64) -> Self {
        Self::from_slice(&[x])
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Lower and upper bounds on `|C| = sup{‖x‖ : x ∈ C}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormBounds {
    pub lower: f64,
    pub upper: f64,
}

impl NormBounds {
    fn exact(value: f64) -> Self {
        Self { lower: value, upper: value }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }
}

/// Common interface of the exact set representations.
pub trait ConvexSet {
    fn dim(&self) -> usize;

    /// `s(u, C)` without a dimension check.
    fn support_raw(&self, u: &[f64]) -> f64;

    /// An upper bound on the set norm, stored as `radius_bound` when embedding.
    fn radius_bound(&self) -> f64;

    fn set_norm(&self) -> NormBounds;

    fn support(&self, u: &Vector) -> Result<f64> {
        check_dim(self.dim(), u.dim())?;
        Ok(self.support_raw(u.coords()))
    }
}

/// The segment `conv{0, endpoint}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub endpoint: Vector,
}

impl Segment {
    pub fn new(endpoint: Vector) -> Self {
        Self { endpoint }
    }

    pub fn scale(&self, alpha: f64) -> Segment {
        Segment::new(self.endpoint.scale(alpha))
    }
}

impl ConvexSet for Segment {
    fn dim(&self) -> usize {
        self.endpoint.dim()
    }

    fn support_raw(&self, u: &[f64]) -> f64 {
        dot(u, self.endpoint.coords()).max(0.0)
    }

    fn radius_bound(&self) -> f64 {
        self.endpoint.norm()
    }

    fn set_norm(&self) -> NormBounds {
        NormBounds::exact(self.endpoint.norm())
    }
}

/// The zonotope `Σ_k [0,1]·g_k`; no generators means `{0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Zonotope {
    dim: usize,
    generators: Vec<Vector>,
}

impl Zonotope {
    pub fn new(dim: usize, generators: Vec<Vector>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidDimension(dim));
        }
        for g in &generators {
            check_dim(dim, g.dim())?;
        }
        Ok(Self { dim, generators })
    }

    /// The singleton `{0}` in R^dim.
    pub fn origin(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "invalid dimension {dim}");
        Self { dim, generators: Vec::new() }
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    pub fn into_generators(self) -> Vec<Vector> {
        self.generators
    }

    pub fn push(&mut self, generator: Vector) -> Result<()> {
        check_dim(self.dim, generator.dim())?;
        self.generators.push(generator);
        Ok(())
    }

    pub fn minkowski_sum(&self, other: &Zonotope) -> Result<Zonotope> {
        check_dim(self.dim, other.dim)?;
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Ok(Self { dim: self.dim, generators })
    }

    pub fn scale(&self, alpha: f64) -> Zonotope {
        Self {
            dim: self.dim,
            generators: self.generators.iter().map(|g| g.scale(alpha)).collect(),
        }
    }

    /// The vertex `Σ_k a_k g_k` selected by a 0/1 pattern.
    pub fn point(&self, weights: &[f64]) -> Result<Vector> {
        if weights.len() != self.generators.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weights for {} generators",
                weights.len(),
                self.generators.len()
            )));
        }
        let mut p = Vector::zeros(self.dim);
        for (w, g) in weights.iter().zip(&self.generators) {
            p.axpy(*w, g);
        }
        Ok(p)
    }
}

impl ConvexSet for Zonotope {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support_raw(&self, u: &[f64]) -> f64 {
        self.generators
            .iter()
            .map(|g| dot(u, g.coords()).max(0.0))
            .sum()
    }

    fn radius_bound(&self) -> f64 {
        self.generators.iter().map(Vector::norm).sum()
    }

    /// Exact by vertex enumeration up to 16 generators; otherwise the sum of
    /// generator norms above and the best default-grid support value below.
    fn set_norm(&self) -> NormBounds {
        let upper = self.radius_bound();
        let n = self.generators.len();
        if n <= EXACT_NORM_GENERATORS {
            let exact = max_vertex_norm(&self.generators, self.dim);
            return NormBounds::exact(exact.min(upper));
        }
        let grid = DirectionGrid::default_for(self.dim);
        let lower = grid
            .directions()
            .iter()
            .map(|u| self.support_raw(u.coords()))
            .fold(0.0, f64::max);
        NormBounds { lower, upper }
    }
}

fn max_vertex_norm(generators: &[Vector], dim: usize) -> f64 {
    let n = generators.len();
    let mut best = 0.0_f64;
    let mut acc = vec![0.0; dim];
    for mask in 0u32..(1u32 << n) {
        acc.iter_mut().for_each(|c| *c = 0.0);
        for (i, g) in generators.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (a, c) in acc.iter_mut().zip(g.coords()) {
                    *a += c;
                }
            }
        }
        best = best.max(dot(&acc, &acc).sqrt());
    }
    best
}

/// Convex hull of a nonempty vertex list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VPolytope {
    vertices: Vec<Vector>,
}

impl VPolytope {
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        let first = vertices.first().ok_or(Error::EmptyVertexList)?;
        let dim = first.dim();
        for v in &vertices {
            check_dim(dim, v.dim())?;
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }
}

impl ConvexSet for VPolytope {
    fn dim(&self) -> usize {
        self.vertices[0].dim()
    }

    fn support_raw(&self, u: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot(u, v.coords()))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn radius_bound(&self) -> f64 {
        self.vertices.iter().map(Vector::norm).fold(0.0, f64::max)
    }

    fn set_norm(&self) -> NormBounds {
        NormBounds::exact(self.radius_bound())
    }
}

/// `max(⟨u, x⟩, 0)`, the support function of `conv{0, x}`.
pub fn support_segment(u: &Vector, s: &Segment) -> Result<f64> {
    s.support(u)
}

pub fn support_zonotope(u: &Vector, z: &Zonotope) -> Result<f64> {
    z.support(u)
}

pub fn support_polytope(u: &Vector, p: &VPolytope) -> Result<f64> {
    p.support(u)
}

pub fn set_norm<S: ConvexSet + ?Sized>(set: &S) -> NormBounds {
    set.set_norm()
}

/// A finite set of unit directions standing in for the dual unit ball.
///
/// `angular_gap` bounds the angle from any unit vector to its nearest grid
/// direction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionGrid {
    dim: usize,
    directions: Vec<Vector>,
    angular_gap: f64,
}

impl DirectionGrid {
    /// `{+1, −1}` in d = 1, 720 directions in d = 2, 2000 Fibonacci points in
    /// d = 3 and the axis cross plus 512 seeded directions above that.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 => Self::line(),
            2 => Self::circle(DEFAULT_PLANAR_DIRECTIONS),
            3 => Self::fibonacci_sphere(DEFAULT_SPATIAL_DIRECTIONS),
            _ => Self::axes_and_random(dim, DEFAULT_HIGH_DIM_EXTRA, 0x5eed),
        }
    }

    /// Grid of `m` directions in dimension `dim` using the default family.
    pub fn with_size(dim: usize, m: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self::line()),
            2 if m >= 3 => Ok(Self::circle(m)),
            3 if m >= 8 => Ok(Self::fibonacci_sphere(m)),
            d if (4..=MAX_DIM).contains(&d) => Ok(Self::axes_and_random(d, m, 0x5eed)),
            2 | 3 => Err(Error::InvalidArgument(format!("{m} directions is too few"))),
            d => Err(Error::InvalidDimension(d)),
        }
    }

    /// Exact grid for d = 1; every support function is determined by ±1.
    pub fn line() -> Self {
        Self {
            dim: 1,
            directions: vec![Vector::from(1.0), Vector::from(-1.0)],
            angular_gap: 0.0,
        }
    }

    /// `m` equally spaced angles; gap π/m.
    pub fn circle(m: usize) -> Self {
        assert!(m >= 3, "planar grid needs at least 3 directions");
        let directions = (0..m)
            .map(|j| {
                let theta = 2.0 * PI * j as f64 / m as f64;
                Vector::from_slice(&[theta.cos(), theta.sin()])
            })
            .collect();
        Self { dim: 2, directions, angular_gap: PI / m as f64 }
    }

    /// Fibonacci-sphere points. The covering angle is estimated as `2.4/√m`
    /// and inflated by 1.5; this is a heuristic, not a proof.
    pub fn fibonacci_sphere(m: usize) -> Self {
        assert!(m >= 8, "spatial grid needs at least 8 directions");
        let golden = PI * (3.0 - 5.0_f64.sqrt());
        let directions = (0..m)
            .map(|i| {
                let z = 1.0 - (2.0 * i as f64 + 1.0) / m as f64;
                let r = (1.0 - z * z).max(0.0).sqrt();
                let phi = golden * i as f64;
                normalized(&[r * phi.cos(), r * phi.sin(), z])
            })
            .collect();
        Self {
            dim: 3,
            directions,
            angular_gap: 1.5 * 2.4 / (m as f64).sqrt(),
        }
    }

    /// `±e_i` plus `extra` seeded Gaussian directions. Any unit vector has a
    /// coordinate of size ≥ 1/√d, so its angle to the nearest signed axis is at
    /// most `arccos(1/√d)`; that guaranteed value is the reported gap.
    pub fn axes_and_random(dim: usize, extra: usize, seed: u64) -> Self {
        assert!((2..=MAX_DIM).contains(&dim), "invalid dimension {dim}");
        let mut directions = Vec::with_capacity(2 * dim + extra);
        for i in 0..dim {
            directions.push(Vector::unit(dim, i));
            directions.push(Vector::unit(dim, i).scale(-1.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while directions.len() < 2 * dim + extra {
            let raw: Vec<f64> = (0..dim).map(|_| standard_normal(&mut rng)).collect();
            if dot(&raw, &raw) > 1e-12 {
                directions.push(normalized(&raw));
            }
        }
        Self {
            dim,
            directions,
            angular_gap: (1.0 / (dim as f64).sqrt()).acos(),
        }
    }

    /// A caller-supplied grid. Directions are normalized; the gap is trusted.
    pub fn from_directions(directions: Vec<Vector>, angular_gap: f64) -> Result<Self> {
        let first = directions
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty direction grid".into()))?;
        let dim = first.dim();
        if !(angular_gap >= 0.0 && angular_gap.is_finite()) {
            return Err(Error::InvalidArgument(format!("angular gap {angular_gap}")));
        }
        let mut unit = Vec::with_capacity(directions.len());
        for d in &directions {
            check_dim(dim, d.dim())?;
            let n = d.norm();
            if n == 0.0 {
                return Err(Error::InvalidArgument("zero direction".into()));
            }
            unit.push(d.scale(1.0 / n));
        }
        Ok(Self { dim, directions: unit, angular_gap })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[Vector] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    pub fn angular_gap(&self) -> f64 {
        self.angular_gap
    }

    /// Chord length `2·sin(gap/2)` between a unit vector and its nearest
    /// grid direction.
    pub fn chord(&self) -> f64 {
        2.0 * (self.angular_gap / 2.0).sin()
    }
}

fn normalized(raw: &[f64]) -> Vector {
    let n = dot(raw, raw).sqrt();
    Vector::from_slice(&raw.iter().map(|c| c / n).collect::<Vec<_>>())
}

// Box–Muller
fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// A convex set sampled on a direction grid.
#[derive(Clone, Debug)]
pub struct SupportVector {
    grid: Arc<DirectionGrid>,
    values: Vec<f64>,
    radius_bound: f64,
}

impl SupportVector {
    pub fn new(grid: Arc<DirectionGrid>, values: Vec<f64>, radius_bound: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || !radius_bound.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(Self { grid, values, radius_bound })
    }

    /// Embedding of `{0}`.
    pub fn zero(grid: Arc<DirectionGrid>) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values, radius_bound: 0.0 }
    }

    pub fn grid(&self) -> &Arc<DirectionGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn radius_bound(&self) -> f64 {
        self.radius_bound
    }

    /// Embedding of `alpha·A` for `alpha ≥ 0`.
    pub fn scale(&self, alpha: f64) -> Result<SupportVector> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale {alpha} must be ≥ 0")));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| alpha * v).collect(),
            radius_bound: alpha * self.radius_bound,
        })
    }

    fn same_grid(&self, other: &SupportVector) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

/// Samples `s(·, set)` on every grid direction.
pub fn embed<S: ConvexSet + ?Sized>(set: &S, grid: &Arc<DirectionGrid>) -> Result<SupportVector> {
    check_dim(grid.dim(), set.dim())?;
    let values = grid
        .directions()
        .iter()
        .map(|u| set.support_raw(u.coords()))
        .collect();
    Ok(SupportVector {
        grid: grid.clone(),
        values,
        radius_bound: set.radius_bound(),
    })
}

pub fn minkowski_add(a: &SupportVector, b: &SupportVector) -> Result<SupportVector> {
    a.same_grid(b)?;
    Ok(SupportVector {
        grid: a.grid.clone(),
        values: a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect(),
        radius_bound: a.radius_bound + b.radius_bound,
    })
}

/// Embedding of the closed convex hull of `A ∪ B`.
pub fn convex_union(a: &SupportVector, b: &SupportVector) -> Result<SupportVector> {
    a.same_grid(b)?;
    Ok(SupportVector {
        grid: a.grid.clone(),
        values: a.values.iter().zip(&b.values).map(|(x, y)| x.max(*y)).collect(),
        radius_bound: a.radius_bound.max(b.radius_bound),
    })
}

/// Grid estimate of a Hausdorff distance; the true value lies in
/// `[distance, distance + error_bound]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridDistance {
    pub distance: f64,
    pub error_bound: f64,
}

impl GridDistance {
    pub fn upper(&self) -> f64 {
        self.distance + self.error_bound
    }
}

pub fn hausdorff_grid(a: &SupportVector, b: &SupportVector) -> Result<GridDistance> {
    a.same_grid(b)?;
    let distance = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(GridDistance {
        distance,
        error_bound: (a.radius_bound + b.radius_bound) * a.grid.chord(),
    })
}

/// Euclidean distance from `p` to `conv{0, x}`.
pub fn distance_to_segment(p: &Vector, x: &Vector) -> Result<f64> {
    check_dim(p.dim(), x.dim())?;
    Ok(distance_to_segment_raw(p.coords(), x.coords()))
}

fn distance_to_segment_raw(p: &[f64], x: &[f64]) -> f64 {
    let xx = dot(x, x);
    let lambda = if xx > 0.0 { (dot(p, x) / xx).clamp(0.0, 1.0) } else { 0.0 };
    p.iter()
        .zip(x)
        .map(|(pi, xi)| (pi - lambda * xi).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Exact `d_H(conv{0,x}, conv{0,y})`.
///
/// The distance to a convex set is a convex function, so along a segment it
/// peaks at an endpoint. The shared endpoint 0 contributes nothing, leaving
/// `max(dist(x, [0,y]), dist(y, [0,x]))`.
pub fn hausdorff_segments(x: &Vector, y: &Vector) -> Result<f64> {
    check_dim(x.dim(), y.dim())?;
    Ok(distance_to_segment_raw(x.coords(), y.coords())
        .max(distance_to_segment_raw(y.coords(), x.coords())))
}
