//! Riemann sums and gauge-driven convergence loops.
//!
//! Every loop walks a [`Schedule`] of gauges. For each gauge it builds a
//! δ-fine partition with [`cousin_partition_bounded`], forms the Riemann sum
//! (a vector, or a zonotope compared through its support vector) and records
//! the distance to the previous sum. A run converges once two consecutive
//! distances are below `tol / 2` and the gauge is fine enough: `inf δ ≤ tol`,
//! or `2·inf δ·Σ‖jumps‖ ≤ tol` for step integrands. The second condition
//! keeps coarse partitions that happen to repeat a sum from ending the run. Running out of gauges or interval budget is
//! reported through [`IntegralResult::converged`], not as an error.
//!
//! Exact step-function oracles live here as well: the Pettis integral over a
//! finite interval union, the zonotope `IS_G` of all selection integrals, and
//! the interval primitive used by the variational defect checker.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{DeterminedMF, Integrand, StepVectorFunction};
use crate::geometry::{
    check_dim, dot, embed, hausdorff_grid, ConvexSet, DirectionGrid, Segment, SupportVector, Vector, Zonotope,
};
use crate::partition::{
    adversarial_tags, cousin_partition_bounded, Gauge, MeasurableSet, TaggedPartition, DEFAULT_MAX_DEPTH,
};

/// Default cap on the size of a single partition.
pub const DEFAULT_MAX_INTERVALS: usize = 1 << 22;

/// Levels in the default constant and graded schedules.
pub const DEFAULT_LEVELS: u32 = 40;

/// Levels in the default singular Henstock schedule; the partition size
/// grows roughly eightfold every two levels.
pub const DEFAULT_SINGULAR_LEVELS: u32 = 13;

/// `Σ_i g(t_i)·|I_i|`, summed left to right.
pub fn riemann_sum_vec(g: &Integrand, p: &TaggedPartition) -> Vector {
    let mut acc = Vector::zeros(g.dim());
    for it in p.items() {
        acc.axpy(it.length(), &g.eval_unchecked(it.tag));
    }
    acc
}

/// `Σ_i G(t_i)·|I_i|` as the zonotope with one generator per item.
pub fn riemann_sum_set(gm: &DeterminedMF, p: &TaggedPartition) -> Zonotope {
    let g = gm.generator();
    let generators = p
        .items()
        .iter()
        .map(|it| g.eval_unchecked(it.tag).scale(it.length()))
        .collect();
    Zonotope::new(g.dim(), generators).expect("integrand values share its dimension")
}

/// The same set as [`riemann_sum_set`] with fewer generators: runs of equal
/// consecutive values are merged (`x·h₁ ⊕ x·h₂ = x·(h₁+h₂)` for segments),
/// and in one dimension generators of equal sign are merged.
pub fn riemann_sum_set_merged(gm: &DeterminedMF, p: &TaggedPartition) -> Zonotope {
    let g = gm.generator();
    let dim = g.dim();
    if dim == 1 {
        let (mut pos, mut neg) = (0.0, 0.0);
        for it in p.items() {
            let x = g.eval_unchecked(it.tag).coords()[0] * it.length();
            if x > 0.0 {
                pos += x;
            } else {
                neg += x;
            }
        }
        let generators = [pos, neg]
            .into_iter()
            .filter(|x| *x != 0.0)
            .map(Vector::from)
            .collect();
        return Zonotope::new(1, generators).expect("one-dimensional generators");
    }
    let mut generators = Vec::new();
    let mut run: Option<(Vector, f64)> = None;
    for it in p.items() {
        let x = g.eval_unchecked(it.tag);
        match &mut run {
            Some((v, len)) if *v == x => *len += it.length(),
            _ => {
                if let Some((v, len)) = run.take() {
                    generators.push(v.scale(len));
                }
                run = Some((x, it.length()));
            }
        }
    }
    if let Some((v, len)) = run {
        generators.push(v.scale(len));
    }
    Zonotope::new(dim, generators).expect("integrand values share its dimension")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegralKind {
    #[serde(rename = "mcshane")]
    McShane,
    Henstock,
    Birkhoff,
}

impl IntegralKind {
    /// Henstock sums use Perron partitions; the others use free tags.
    pub fn perron(self) -> bool {
        matches!(self, IntegralKind::Henstock)
    }
}

/// A sequence of gauges, coarse to fine.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    gauges: Vec<Gauge>,
}

impl Schedule {
    pub fn new(gauges: Vec<Gauge>) -> Result<Self> {
        if gauges.is_empty() {
            return Err(Error::InvalidArgument("empty gauge schedule".into()));
        }
        for g in &gauges {
            g.validate()?;
        }
        Ok(Self { gauges })
    }

    pub fn gauges(&self) -> &[Gauge] {
        &self.gauges
    }

    /// `Constant(2^-k)`, `k = 1..=levels`.
    pub fn constant_dyadic(levels: u32) -> Self {
        let gauges = (1..=levels.max(1))
            .map(|k| Gauge::Constant { c: 0.5f64.powi(k as i32) })
            .collect();
        Self { gauges }
    }

    /// Single-piece Step gauges with value `2^-k`.
    pub fn step_dyadic(levels: u32) -> Self {
        let gauges = (1..=levels.max(1))
            .map(|k| Gauge::Step { breakpoints: Vec::new(), values: vec![0.5f64.powi(k as i32)] })
            .collect();
        Self { gauges }
    }

    /// Step gauges graded toward `points` at levels `1..=levels`.
    pub fn graded(points: &[f64], levels: u32) -> Result<Self> {
        let gauges = (1..=levels.max(1))
            .map(|k| Gauge::graded_toward(points, k))
            .collect::<Result<_>>()?;
        Ok(Self { gauges })
    }

    /// `PowerOrigin(c0·2^-k, p, origin0·2^(-k/2))`, `k = 1..=levels`.
    pub fn power_origin(c0: f64, p: f64, origin0: f64, levels: u32) -> Result<Self> {
        let gauges = (1..=levels.max(1))
            .map(|k| Gauge::power_origin(c0 * 0.5f64.powi(k as i32), p, origin0 * 0.5f64.powf(k as f64 / 2.0)))
            .collect::<Result<_>>()?;
        Ok(Self { gauges })
    }

    /// Defaults: integrands built from steps get Step gauges graded toward
    /// their breakpoints for every integral. Otherwise McShane uses
    /// `Constant(2^-k)`, Birkhoff the single-piece Step equivalent and Henstock
    /// `PowerOrigin(2^-k, 2, 0.5·2^(-k/2))`.
    pub fn default_for(kind: IntegralKind, g: &Integrand) -> Self {
        if let Some(step) = g.to_step() {
            return Self::graded(step.breakpoints(), DEFAULT_LEVELS).expect("breakpoints lie in (0, 1)");
        }
        match kind {
            IntegralKind::McShane => Self::constant_dyadic(DEFAULT_LEVELS),
            IntegralKind::Birkhoff => Self::step_dyadic(DEFAULT_LEVELS),
            IntegralKind::Henstock => {
                Self::power_origin(1.0, 2.0, 0.5, DEFAULT_SINGULAR_LEVELS).expect("valid constants")
            }
        }
    }
}

/// How tags are chosen after the Cousin partitioner has run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum TagPolicy {
    /// Keep the partitioner's tags.
    Cousin,
    /// Retag every item at the argmax of `⟨direction, g(t)⟩⁺` over `samples`
    /// equispaced points (direction defaults to `e_1`).
    Adversarial { samples: usize, direction: Option<Vector> },
}

/// Which object is being integrated.
#[derive(Clone, Copy, Debug)]
pub enum Target<'a> {
    Vector(&'a Integrand),
    Set(&'a DeterminedMF),
}

impl Target<'_> {
    fn integrand(&self) -> &Integrand {
        match self {
            Target::Vector(g) => g,
            Target::Set(gm) => gm.generator(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IntegrationOptions {
    pub tol: f64,
    /// `None` selects [`Schedule::default_for`].
    pub schedule: Option<Schedule>,
    /// Set mode only; `None` selects [`DirectionGrid::default_for`].
    pub grid: Option<Arc<DirectionGrid>>,
    pub max_depth: u32,
    pub max_intervals: usize,
    pub tags: TagPolicy,
}

impl IntegrationOptions {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            schedule: None,
            grid: None,
            max_depth: DEFAULT_MAX_DEPTH,
            max_intervals: DEFAULT_MAX_INTERVALS,
            tags: TagPolicy::Cousin,
        }
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = Some(schedule);
        self
    }

    pub fn with_grid(mut self, grid: Arc<DirectionGrid>) -> Self {
        self.grid = Some(grid);
        self
    }

    pub fn with_tags(mut self, tags: TagPolicy) -> Self {
        self.tags = tags;
        self
    }

    pub fn with_max_intervals(mut self, max_intervals: usize) -> Self {
        self.max_intervals = max_intervals;
        self
    }
}

#[derive(Clone, Debug)]
pub enum IntegralValue {
    Vector(Vector),
    Set { support: SupportVector, zonotope: Zonotope },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub gauge: String,
    pub n_intervals: usize,
    /// Distance to the previous sum; absent on the first iteration.
    pub succ_diff: Option<f64>,
    /// Grid error bound attached to `succ_diff` (zero in vector mode).
    pub err_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    ScheduleExhausted,
    IntervalBudget,
}

#[derive(Clone, Debug)]
pub struct IntegralResult {
    pub kind: IntegralKind,
    pub value: IntegralValue,
    /// Last successive difference; infinite when only one sum was formed.
    pub error_estimate: f64,
    pub iterations: Vec<IterationRecord>,
    pub converged: bool,
    pub stop: StopReason,
}

impl IntegralResult {
    pub fn vector(&self) -> Option<&Vector> {
        match &self.value {
            IntegralValue::Vector(v) => Some(v),
            IntegralValue::Set { .. } => None,
        }
    }

    pub fn support(&self) -> Option<&SupportVector> {
        match &self.value {
            IntegralValue::Set { support, .. } => Some(support),
            IntegralValue::Vector(_) => None,
        }
    }

    pub fn zonotope(&self) -> Option<&Zonotope> {
        match &self.value {
            IntegralValue::Set { zonotope, .. } => Some(zonotope),
            IntegralValue::Vector(_) => None,
        }
    }

    /// Convergence table with columns `iter,gauge,n_intervals,succ_diff,err_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,gauge,n_intervals,succ_diff,err_bound\n");
        for r in &self.iterations {
            let diff = r.succ_diff.map(|d| d.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", r.iter, r.gauge, r.n_intervals, diff, r.err_bound);
        }
        out
    }
}

enum Sum {
    Vector(Vector),
    Set(SupportVector, Zonotope),
}

pub fn mcshane_integrate(target: Target<'_>, opts: &IntegrationOptions) -> Result<IntegralResult> {
    integrate(IntegralKind::McShane, target, opts)
}

pub fn henstock_integrate(target: Target<'_>, opts: &IntegrationOptions) -> Result<IntegralResult> {
    integrate(IntegralKind::Henstock, target, opts)
}

/// McShane loop restricted to Constant and Step gauges.
pub fn birkhoff_integrate(target: Target<'_>, opts: &IntegrationOptions) -> Result<IntegralResult> {
    integrate(IntegralKind::Birkhoff, target, opts)
}

pub fn integrate(kind: IntegralKind, target: Target<'_>, opts: &IntegrationOptions) -> Result<IntegralResult> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tol {} must be > 0", opts.tol)));
    }
    let g = target.integrand();
    g.validate()?;
    let schedule = match &opts.schedule {
        Some(s) => s.clone(),
        None => Schedule::default_for(kind, g),
    };
    if kind == IntegralKind::Birkhoff {
        if let Some(bad) = schedule.gauges().iter().find(|g| !g.is_measurable_step()) {
            return Err(Error::InvalidGauge(format!("Birkhoff schedules take Step gauges only, got {bad}")));
        }
    }
    let grid = match (&target, &opts.grid) {
        (Target::Set(_), Some(grid)) => {
            check_dim(g.dim(), grid.dim())?;
            Some(grid.clone())
        }
        (Target::Set(_), None) => Some(Arc::new(DirectionGrid::default_for(g.dim()))),
        (Target::Vector(_), _) => None,
    };
    let score_dir = match &opts.tags {
        TagPolicy::Adversarial { direction: Some(d), .. } => {
            check_dim(g.dim(), d.dim())?;
            d.clone()
        }
        _ => Vector::unit(g.dim(), 0),
    };

    // items straddling a jump are shorter than 2·inf δ under graded gauges
    let guard_scale = g.to_step().map_or(1.0, |s| 2.0 * s.jump_variation());
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut prev: Option<Sum> = None;
    let mut small_streak = 0;
    let mut stop = StopReason::ScheduleExhausted;
    for (k, gauge) in schedule.gauges().iter().enumerate() {
        let partition =
            match cousin_partition_bounded(gauge, kind.perron(), opts.max_depth, opts.max_intervals) {
                Ok(p) => p,
                Err(Error::TooManyIntervals { .. }) if prev.is_some() => {
                    stop = StopReason::IntervalBudget;
                    break;
                }
                Err(e) => return Err(e),
            };
        let partition = match &opts.tags {
            TagPolicy::Cousin => partition,
            TagPolicy::Adversarial { samples, .. } => adversarial_tags(
                &partition,
                |t| dot(score_dir.coords(), g.eval_unchecked(t).coords()).max(0.0),
                *samples,
            )?,
        };
        let sum = match (&target, &grid) {
            (Target::Set(gm), Some(grid)) => {
                let z = riemann_sum_set_merged(gm, &partition);
                Sum::Set(embed(&z, grid)?, z)
            }
            _ => Sum::Vector(riemann_sum_vec(g, &partition)),
        };
        let (succ_diff, err_bound) = match (&prev, &sum) {
            (Some(Sum::Vector(a)), Sum::Vector(b)) => (Some(a.sub(b)?.norm()), 0.0),
            (Some(Sum::Set(a, _)), Sum::Set(b, _)) => {
                let d = hausdorff_grid(a, b)?;
                (Some(d.distance), d.error_bound)
            }
            _ => (None, 0.0),
        };
        iterations.push(IterationRecord {
            iter: k + 1,
            gauge: gauge.to_string(),
            n_intervals: partition.len(),
            succ_diff,
            err_bound,
        });
        prev = Some(sum);
        match succ_diff {
            Some(d) if d < opts.tol / 2.0 => small_streak += 1,
            _ => small_streak = 0,
        }
        if small_streak >= 2 && gauge.resolution() * guard_scale <= opts.tol {
            stop = StopReason::Converged;
            break;
        }
    }

    let error_estimate = iterations
        .last()
        .and_then(|r| r.succ_diff)
        .unwrap_or(f64::INFINITY);
    let value = match prev.expect("at least one iteration ran") {
        Sum::Vector(v) => IntegralValue::Vector(v),
        Sum::Set(support, zonotope) => IntegralValue::Set { support, zonotope },
    };
    Ok(IntegralResult {
        kind,
        value,
        error_estimate,
        iterations,
        converged: stop == StopReason::Converged,
        stop,
    })
}

/// `∫_E g` for a step `g`: `Σ_k x_k·λ(E ∩ A_k)`.
pub fn pettis_step(g: &StepVectorFunction, e: &MeasurableSet) -> Vector {
    let mut acc = Vector::zeros(g.dim());
    for (l, r, x) in g.pieces() {
        acc.axpy(e.measure_within(l, r), x);
    }
    acc
}

/// `∫_E G` for the multifunction determined by a step `g`: the zonotope with
/// generators `x_k·λ(E ∩ A_k)` (pieces of measure zero are dropped).
pub fn pettis_step_set(g: &StepVectorFunction, e: &MeasurableSet) -> Zonotope {
    let generators = g
        .pieces()
        .filter_map(|(l, r, x)| {
            let m = e.measure_within(l, r);
            (m > 0.0).then(|| x.scale(m))
        })
        .collect();
    Zonotope::new(g.dim(), generators).expect("step values share a dimension")
}

/// `IS_G = {∫ φ·g : φ measurable, 0 ≤ φ ≤ 1}` for a step `g`.
///
/// `∫ φ·g = Σ_k (∫_{A_k} φ)·x_k` and each `∫_{A_k} φ` ranges over
/// `[0, λ(A_k)]`, so the set is the zonotope with generators `x_k·λ(A_k)`.
pub fn isg_zonotope(g: &StepVectorFunction) -> Zonotope {
    pettis_step_set(g, &MeasurableSet::unit())
}

/// `∫₀¹ ‖g(t)‖ dt = Σ_k ‖x_k‖·λ(A_k)`.
pub fn bochner_norm_integral(g: &StepVectorFunction) -> f64 {
    g.pieces().map(|(l, r, x)| x.norm() * (r - l)).sum()
}

/// A finitely additive set-valued interval function, stored on the cells
/// of a grid `0 = p_0 < … < p_m = 1`. The value on `[p_i, p_j]` is the
/// Minkowski sum of the cells in between.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalPrimitive {
    dim: usize,
    points: Vec<f64>,
    cells: Vec<Zonotope>,
}

impl IntervalPrimitive {
    pub fn new(dim: usize, points: Vec<f64>, cells: Vec<Zonotope>) -> Result<Self> {
        if points.len() < 2 || points[0] != 0.0 || *points.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("primitive grid must run from 0 to 1".into()));
        }
        if points.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidArgument("primitive grid not increasing".into()));
        }
        if cells.len() + 1 != points.len() {
            return Err(Error::InvalidArgument("one cell per grid interval".into()));
        }
        for c in &cells {
            check_dim(dim, c.dim())?;
        }
        Ok(Self { dim, points, cells })
    }

    /// Exact primitive `I ↦ ∫_I G` of the multifunction determined by a step
    /// `g`, on the grid formed by `cuts` and the breakpoints of `g`.
    pub fn from_step(g: &StepVectorFunction, cuts: &[f64]) -> Self {
        let mut points: Vec<f64> = cuts
            .iter()
            .chain(g.breakpoints())
            .copied()
            .filter(|c| *c > 0.0 && *c < 1.0)
            .collect();
        points.push(0.0);
        points.push(1.0);
        points.sort_by(f64::total_cmp);
        points.dedup();
        let cells = points
            .windows(2)
            .map(|w| {
                let e = MeasurableSet::new(vec![(w[0], w[1])]).expect("finite endpoints");
                pettis_step_set(g, &e)
            })
            .collect();
        Self { dim: g.dim(), points, cells }
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn cells(&self) -> &[Zonotope] {
        &self.cells
    }

    /// Copy with cell `index` scaled by `factor ≥ 0`.
    pub fn with_scaled_cell(&self, index: usize, factor: f64) -> Result<Self> {
        if index >= self.cells.len() || !(factor >= 0.0) {
            return Err(Error::InvalidArgument(format!("cannot scale cell {index} by {factor}")));
        }
        let mut out = self.clone();
        out.cells[index] = out.cells[index].scale(factor);
        Ok(out)
    }

    /// Value on `[a, b]`; both ends must be grid points.
    pub fn value(&self, a: f64, b: f64) -> Result<Zonotope> {
        let find = |x: f64| self.points.binary_search_by(|p| p.total_cmp(&x)).ok();
        match (find(a), find(b)) {
            (Some(i), Some(j)) if i < j => {
                let generators = self.cells[i..j]
                    .iter()
                    .flat_map(|c| c.generators().iter().cloned())
                    .collect();
                Zonotope::new(self.dim, generators)
            }
            _ => Err(Error::MissingPrimitive { a, b }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectReport {
    /// `Σ_j` grid distance between `Φ(I_j)` and `G(t_j)·|I_j|`.
    pub defect: f64,
    /// Summed grid error bounds of the terms.
    pub grid_error: f64,
}

/// The variational Henstock sum `Σ_j d_H(Φ(I_j), G(t_j)·|I_j|)`.
pub fn variational_defect(
    gm: &DeterminedMF,
    prim: &IntervalPrimitive,
    p: &TaggedPartition,
    grid: &Arc<DirectionGrid>,
) -> Result<DefectReport> {
    check_dim(gm.dim(), grid.dim())?;
    check_dim(gm.dim(), prim.dim)?;
    let mut report = DefectReport { defect: 0.0, grid_error: 0.0 };
    for it in p.items() {
        let phi = embed(&prim.value(it.a, it.b)?, grid)?;
        let term = Segment::new(gm.generator().eval_unchecked(it.tag).scale(it.length()));
        let d = hausdorff_grid(&phi, &embed(&term, grid)?)?;
        report.defect += d.distance;
        report.grid_error += d.error_bound;
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BangBang {
    pub max_norm: f64,
    /// Maximizing 0/1 pattern; the first coordinate is the lowest bit.
    pub signs: Vec<bool>,
}

/// `max ‖Σ a_i v_i‖` over `a ∈ [0,1]^n`.
///
/// The objective is convex, so the maximum sits at a vertex of the cube and
/// enumerating `{0,1}^n` is exact. Ties go to the smallest bit pattern.
pub fn bang_bang_max(vectors: &[Vector]) -> Result<BangBang> {
    let n = vectors.len();
    if n > 20 {
        return Err(Error::TooManyVectors(n));
    }
    let Some(first) = vectors.first() else {
        return Ok(BangBang { max_norm: 0.0, signs: Vec::new() });
    };
    let dim = first.dim();
    for v in vectors {
        check_dim(dim, v.dim())?;
    }
    let mut best = (f64::NEG_INFINITY, 0u32);
    let mut acc = vec![0.0; dim];
    for mask in 0u32..(1u32 << n) {
        acc.iter_mut().for_each(|c| *c = 0.0);
        for (i, v) in vectors.iter().enumerate() {
            if mask & (1 << i) != 0 {
                for (a, c) in acc.iter_mut().zip(v.coords()) {
                    *a += c;
                }
            }
        }
        let norm = dot(&acc, &acc).sqrt();
        if norm > best.0 {
            best = (norm, mask);
        }
    }
    Ok(BangBang {
        max_norm: best.0,
        signs: (0..n).map(|i| best.1 & (1 << i) != 0).collect(),
    })
}
