//! Gauges, tagged partitions of [0, 1] and a constructive Cousin partitioner.
//!
//! A tagged interval `([a, b], t)` is δ-fine when `[a, b] ⊂ (t − δ(t), t + δ(t))`.
//! Perron partitions additionally require `t ∈ [a, b]`; free-tag partitions
//! (McShane style) do not.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bisection budget of [`cousin_partition`].
pub const DEFAULT_MAX_DEPTH: u32 = 60;

/// Samples used by the free-tag "best δ" candidate.
const ARGMAX_SAMPLES: usize = 17;

/// Index of the piece containing `t` for pieces cut at `breakpoints`.
///
/// A point lying exactly on a breakpoint belongs to the piece on its left, and
/// `t = 0` belongs to the first piece. Gauges, step functions and weights all
/// resolve ties through this one function.
pub fn piece_index(breakpoints: &[f64], t: f64) -> usize {
    breakpoints.partition_point(|&b| b < t)
}

/// Checks that breakpoints are finite, strictly increasing and inside (0, 1).
pub(crate) fn validate_breakpoints(breakpoints: &[f64]) -> std::result::Result<(), String> {
    for w in breakpoints.windows(2) {
        if !(w[0] < w[1]) {
            return Err(format!("breakpoints not strictly increasing at {}", w[1]));
        }
    }
    if let Some(&b) = breakpoints.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
        return Err(format!("breakpoint {b} outside (0, 1)"));
    }
    Ok(())
}

/// A strictly positive function on [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gauge {
    Constant { c: f64 },
    /// Piecewise constant; `values.len() == breakpoints.len() + 1`.
    Step { breakpoints: Vec<f64>, values: Vec<f64> },
    /// `δ(t) = max(floor, c·t^p)`.
    PowerFloor { c: f64, p: f64, floor: f64 },
    /// `δ(0) = origin` and `δ(t) = c·t^p` for `t > 0`. Any partition fine
    /// for this gauge with `c ≤ 1, p ≥ 1` tags the interval at 0 with 0.
    PowerOrigin { c: f64, p: f64, origin: f64 },
}

impl Gauge {
    pub fn constant(c: f64) -> Result<Self> {
        let g = Gauge::Constant { c };
        g.validate()?;
        Ok(g)
    }

    pub fn step(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let g = Gauge::Step { breakpoints, values };
        g.validate()?;
        Ok(g)
    }

    pub fn power_floor(c: f64, p: f64, floor: f64) -> Result<Self> {
        let g = Gauge::PowerFloor { c, p, floor };
        g.validate()?;
        Ok(g)
    }

    pub fn power_origin(c: f64, p: f64, origin: f64) -> Result<Self> {
        let g = Gauge::PowerOrigin { c, p, origin };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        let ok = match self {
            Gauge::Constant { c } => positive(*c),
            Gauge::Step { breakpoints, values } => {
                validate_breakpoints(breakpoints).map_err(Error::InvalidGauge)?;
                values.len() == breakpoints.len() + 1 && values.iter().all(|v| positive(*v))
            }
            Gauge::PowerFloor { c, p, floor } => positive(*c) && *p >= 1.0 && p.is_finite() && positive(*floor),
            Gauge::PowerOrigin { c, p, origin } => positive(*c) && *p >= 1.0 && p.is_finite() && positive(*origin),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGauge(self.to_string()))
        }
    }

    /// `δ(t)`.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Gauge::Constant { c } => *c,
            Gauge::Step { breakpoints, values } => values[piece_index(breakpoints, t)],
            Gauge::PowerFloor { c, p, floor } => floor.max(c * t.powf(*p)),
            Gauge::PowerOrigin { c, p, origin } => {
                if t == 0.0 {
                    *origin
                } else {
                    c * t.powf(*p)
                }
            }
        }
    }

    /// `inf δ` over `[0, 1]`.
    pub fn resolution(&self) -> f64 {
        match self {
            Gauge::Constant { c } => *c,
            Gauge::Step { values, .. } => values.iter().copied().fold(f64::INFINITY, f64::min),
            Gauge::PowerFloor { floor, .. } => *floor,
            Gauge::PowerOrigin { .. } => 0.0,
        }
    }

    /// Constant and Step gauges, the simple measurable gauges allowed in
    /// Birkhoff schedules.
    pub fn is_measurable_step(&self) -> bool {
        matches!(self, Gauge::Constant { .. } | Gauge::Step { .. })
    }

    /// Left endpoint of the step piece containing `t` (Step gauges only).
    fn piece_start(&self, t: f64) -> Option<f64> {
        match self {
            Gauge::Step { breakpoints, .. } => {
                let k = piece_index(breakpoints, t);
                Some(if k == 0 { 0.0 } else { breakpoints[k - 1] })
            }
            _ => None,
        }
    }

    /// A Step gauge graded toward `points`: at distance `d ≥ 2^-level` from the
    /// nearest point the value is at most `d/2`, so no fine interval tagged
    /// there reaches a point; within `2^-level` the value is `2^-(level+2)`.
    pub fn graded_toward(points: &[f64], level: u32) -> Result<Self> {
        let mut cuts: Vec<f64> = Vec::new();
        for &p in points {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::OutOfDomain(p));
            }
            cuts.push(p);
            let mut h = 0.5_f64;
            for _ in 0..level {
                cuts.push(p - h);
                cuts.push(p + h);
                h /= 2.0;
            }
        }
        cuts.retain(|&c| c > 0.0 && c < 1.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();

        let shell = |t: f64| -> f64 {
            points
                .iter()
                .map(|&p| {
                    let d = (t - p).abs();
                    let (mut h, mut s) = (0.5_f64, 0.25_f64);
                    for _ in 0..level {
                        if d >= h {
                            break;
                        }
                        h /= 2.0;
                        s /= 2.0;
                    }
                    s
                })
                .fold(0.25, f64::min)
        };
        let mut values = Vec::with_capacity(cuts.len() + 1);
        for k in 0..=cuts.len() {
            let l = if k == 0 { 0.0 } else { cuts[k - 1] };
            let r = if k == cuts.len() { 1.0 } else { cuts[k] };
            values.push(shell(l).min(shell(r)).min(shell(0.5 * (l + r))));
        }
        Gauge::step(cuts, values)
    }
}

impl fmt::Display for Gauge {
    /// Compact, comma-free description used in convergence tables.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gauge::Constant { c } => write!(f, "const(c={c})"),
            Gauge::Step { breakpoints, values } => {
                let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
                write!(f, "step(pieces={};min={min})", breakpoints.len() + 1)
            }
            Gauge::PowerFloor { c, p, floor } => write!(f, "powfloor(c={c};p={p};floor={floor})"),
            Gauge::PowerOrigin { c, p, origin } => write!(f, "poworigin(c={c};p={p};origin={origin})"),
        }
    }
}

/// A random Step gauge with 1..=max_pieces pieces and values in [0.01, 0.5].
pub fn random_step_gauge<R: Rng>(rng: &mut R, max_pieces: usize) -> Gauge {
    let pieces = rng.gen_range(1..=max_pieces.max(1));
    let mut breakpoints: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.01..0.99)).collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let values = (0..=breakpoints.len())
        .map(|_| 10f64.powf(rng.gen_range(-2.0..(0.5f64).log10())))
        .collect();
    Gauge::Step { breakpoints, values }
}

/// A random gauge drawn from all DSL variants that terminate quickly.
pub fn random_gauge<R: Rng>(rng: &mut R) -> Gauge {
    match rng.gen_range(0..3) {
        0 => Gauge::Constant { c: rng.gen_range(0.005..0.8) },
        1 => random_step_gauge(rng, 6),
        _ => Gauge::PowerFloor {
            c: rng.gen_range(0.05..1.0),
            p: rng.gen_range(1.0..3.0),
            floor: 10f64.powf(rng.gen_range(-4.0..-1.0)),
        },
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggedInterval {
    pub a: f64,
    pub b: f64,
    pub tag: f64,
}

impl TaggedInterval {
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_fine(&self, gauge: &Gauge, perron: bool) -> bool {
        let d = gauge.eval(self.tag);
        let window = self.tag - d < self.a && self.b < self.tag + d;
        window && (!perron || (self.a <= self.tag && self.tag <= self.b))
    }
}

/// Tagged intervals covering [0, 1], sorted left to right, endpoints shared
/// exactly between neighbours.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaggedPartition {
    items: Vec<TaggedInterval>,
    perron: bool,
}

impl TaggedPartition {
    pub fn new(mut items: Vec<TaggedInterval>, perron: bool) -> Result<Self> {
        items.sort_by(|x, y| x.a.total_cmp(&y.a));
        let bad = |m: String| Err(Error::InvalidPartition(m));
        let (Some(first), Some(last)) = (items.first(), items.last()) else {
            return bad("no intervals".into());
        };
        if first.a != 0.0 || last.b != 1.0 {
            return bad(format!("covers [{}, {}] instead of [0, 1]", first.a, last.b));
        }
        for it in &items {
            if !(it.a < it.b) || !(0.0..=1.0).contains(&it.tag) {
                return bad(format!("bad item [{}, {}] tag {}", it.a, it.b, it.tag));
            }
            if perron && !(it.a <= it.tag && it.tag <= it.b) {
                return bad(format!("tag {} outside [{}, {}]", it.tag, it.a, it.b));
            }
        }
        for w in items.windows(2) {
            if w[0].b != w[1].a {
                return bad(format!("gap or overlap at {} / {}", w[0].b, w[1].a));
            }
        }
        Ok(Self { items, perron })
    }

    pub(crate) fn from_sorted_unchecked(items: Vec<TaggedInterval>, perron: bool) -> Self {
        Self { items, perron }
    }

    pub fn items(&self) -> &[TaggedInterval] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_perron(&self) -> bool {
        self.perron
    }

    pub fn mesh(&self) -> f64 {
        self.items.iter().map(TaggedInterval::length).fold(0.0, f64::max)
    }

    pub fn total_length(&self) -> f64 {
        self.items.iter().map(TaggedInterval::length).sum()
    }

    /// Same intervals with new tags; the Perron flag is kept only if every
    /// new tag lies in its interval.
    pub fn retag(&self, tags: &[f64]) -> Result<Self> {
        if tags.len() != self.items.len() {
            return Err(Error::InvalidArgument("tag count differs from item count".into()));
        }
        let items: Vec<_> = self
            .items
            .iter()
            .zip(tags)
            .map(|(it, &tag)| TaggedInterval { tag, ..*it })
            .collect();
        let perron = self.perron && items.iter().all(|it| it.a <= it.tag && it.tag <= it.b);
        Self::new(items, perron)
    }

    /// Rows `a,b,tag` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,b,tag\n");
        for it in &self.items {
            out.push_str(&format!("{},{},{}\n", it.a, it.b, it.tag));
        }
        out
    }
}

pub fn is_delta_fine(p: &TaggedPartition, g: &Gauge) -> bool {
    p.items.iter().all(|it| it.is_fine(g, p.perron))
}

/// Builds a δ-fine partition by bisection.
///
/// Intervals are processed left to right starting from [0, 1]. For `[a, b]`
/// the candidate tags are `a`, `b`, the midpoint and, in free-tag mode only,
/// the left end of the gauge piece holding the midpoint and the best of 17
/// equispaced δ samples. The first candidate whose window contains `[a, b]`
/// is emitted; otherwise the interval is split at its midpoint.
pub fn cousin_partition(g: &Gauge, perron: bool, max_depth: u32) -> Result<TaggedPartition> {
    cousin_partition_bounded(g, perron, max_depth, usize::MAX)
}

/// [`cousin_partition`] with a cap on the number of emitted intervals.
pub fn cousin_partition_bounded(
    g: &Gauge,
    perron: bool,
    max_depth: u32,
    max_items: usize,
) -> Result<TaggedPartition> {
    g.validate()?;
    let items = cousin_items(g, perron, 0.0, 1.0, max_depth, max_items)?;
    Ok(TaggedPartition::from_sorted_unchecked(items, perron))
}

/// Bisection on `[l, r]`; the caller validates the gauge.
pub(crate) fn cousin_items(
    g: &Gauge,
    perron: bool,
    l: f64,
    r: f64,
    max_depth: u32,
    max_items: usize,
) -> Result<Vec<TaggedInterval>> {
    if max_depth == 0 {
        return Err(Error::InvalidArgument("max_depth must be ≥ 1".into()));
    }
    let mut items = Vec::new();
    let mut stack: Vec<(f64, f64, u32)> = vec![(l, r, 0)];
    while let Some((a, b, depth)) = stack.pop() {
        if let Some(tag) = pick_tag(g, perron, a, b) {
            if items.len() == max_items {
                return Err(Error::TooManyIntervals { limit: max_items });
            }
            items.push(TaggedInterval { a, b, tag });
            continue;
        }
        if depth >= max_depth {
            return Err(Error::DepthExceeded { depth: max_depth, a, b });
        }
        let mid = 0.5 * (a + b);
        if !(a < mid && mid < b) {
            return Err(Error::DepthExceeded { depth, a, b });
        }
        stack.push((mid, b, depth + 1));
        stack.push((a, mid, depth + 1));
    }
    Ok(items)
}

fn pick_tag(g: &Gauge, perron: bool, a: f64, b: f64) -> Option<f64> {
    let fits = |t: f64| {
        let d = g.eval(t);
        t - d < a && b < t + d
    };
    let mid = 0.5 * (a + b);
    for t in [a, b, mid] {
        if fits(t) {
            return Some(t);
        }
    }
    if perron {
        return None;
    }
    if let Some(t) = g.piece_start(mid) {
        if fits(t) {
            return Some(t);
        }
    }
    let best = (0..ARGMAX_SAMPLES)
        .map(|j| a + (b - a) * j as f64 / (ARGMAX_SAMPLES - 1) as f64)
        .fold((a, f64::NEG_INFINITY), |(bt, bd), t| {
            let d = g.eval(t);
            if d > bd {
                (t, d)
            } else {
                (bt, bd)
            }
        })
        .0;
    fits(best).then_some(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TagRule {
    Left,
    Mid,
    Right,
}

/// `n` equal intervals, Perron tags chosen by `rule`.
pub fn uniform_partition(n: usize, rule: TagRule) -> Result<TaggedPartition> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let point = |i: usize| if i == n { 1.0 } else { i as f64 / n as f64 };
    let items = (0..n)
        .map(|i| {
            let (a, b) = (point(i), point(i + 1));
            let tag = match rule {
                TagRule::Left => a,
                TagRule::Mid => 0.5 * (a + b),
                TagRule::Right => b,
            };
            TaggedInterval { a, b, tag }
        })
        .collect();
    Ok(TaggedPartition::from_sorted_unchecked(items, true))
}

/// Partition whose endpoints are the sorted union of `cuts`, 0 and 1, with
/// midpoint tags.
pub fn partition_from_cuts(cuts: &[f64]) -> Result<TaggedPartition> {
    let mut pts: Vec<f64> = cuts.iter().copied().filter(|c| *c > 0.0 && *c < 1.0).collect();
    pts.push(0.0);
    pts.push(1.0);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let items = pts
        .windows(2)
        .map(|w| TaggedInterval { a: w[0], b: w[1], tag: 0.5 * (w[0] + w[1]) })
        .collect();
    TaggedPartition::new(items, true)
}

/// Replaces each tag by the argmax of `score` over `samples` equispaced points
/// of its interval, ties going to the smaller point.
///
/// Tags stay inside their intervals, so the Perron flag is kept. Fineness is
/// not re-checked: any tag in `[a, b]` stays δ-fine when `b − a < δ`
/// everywhere on `[a, b]`, as for constant gauges built by bisection.
pub fn adversarial_tags<F: Fn(f64) -> f64>(
    p: &TaggedPartition,
    score: F,
    samples: usize,
) -> Result<TaggedPartition> {
    if samples == 0 {
        return Err(Error::InvalidArgument("samples must be ≥ 1".into()));
    }
    let items = p
        .items
        .iter()
        .map(|it| {
            let mut best = (it.a, score(it.a));
            for j in 1..samples {
                let t = if j == samples - 1 {
                    it.b
                } else {
                    it.a + it.length() * j as f64 / (samples - 1) as f64
                };
                let s = score(t);
                if s > best.1 {
                    best = (t, s);
                }
            }
            TaggedInterval { tag: best.0, ..*it }
        })
        .collect();
    Ok(TaggedPartition::from_sorted_unchecked(items, p.perron))
}

/// A finite union of disjoint subintervals of [0, 1].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasurableSet {
    intervals: Vec<(f64, f64)>,
}

impl MeasurableSet {
    /// Clips to [0, 1], drops empty pieces and merges overlaps.
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let mut iv: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (l, r) in intervals {
            if !(l.is_finite() && r.is_finite()) {
                return Err(Error::NonFinite);
            }
            let (l, r) = (l.max(0.0), r.min(1.0));
            if l < r {
                iv.push((l, r));
            }
        }
        iv.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(iv.len());
        for (l, r) in iv {
            match merged.last_mut() {
                Some(last) if l <= last.1 => last.1 = last.1.max(r),
                _ => merged.push((l, r)),
            }
        }
        Ok(Self { intervals: merged })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn unit() -> Self {
        Self { intervals: vec![(0.0, 1.0)] }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Lebesgue measure.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(l, r)| r - l).sum()
    }

    /// `λ(E ∩ [l, r])`.
    pub fn measure_within(&self, l: f64, r: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| (b.min(r) - a.max(l)).max(0.0))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn mids(n: usize) -> TaggedPartition {
        uniform_partition(n, TagRule::Mid).unwrap()
    }

    #[test]
    fn delta_fine_examples() {
        let p = mids(2);
        assert!(is_delta_fine(&p, &Gauge::Constant { c: 0.6 }));
        assert!(!is_delta_fine(&p, &Gauge::Constant { c: 0.2 }));
        let whole = TaggedPartition::new(vec![TaggedInterval { a: 0.0, b: 1.0, tag: 0.0 }], true).unwrap();
        let g = Gauge::power_floor(0.5, 1.0, 1e-6).unwrap();
        assert_eq!(g.eval(0.0), 1e-6);
        assert!(!is_delta_fine(&whole, &g));
    }

    #[test]
    fn perron_membership_is_enforced() {
        let items = vec![
            TaggedInterval { a: 0.0, b: 0.5, tag: 0.6 },
            TaggedInterval { a: 0.5, b: 1.0, tag: 0.7 },
        ];
        assert!(TaggedPartition::new(items.clone(), true).is_err());
        let free = TaggedPartition::new(items, false).unwrap();
        assert!(is_delta_fine(&free, &Gauge::Constant { c: 0.65 }));
    }

    #[test]
    fn partition_validation() {
        let gap = vec![
            TaggedInterval { a: 0.0, b: 0.4, tag: 0.1 },
            TaggedInterval { a: 0.5, b: 1.0, tag: 0.7 },
        ];
        assert!(TaggedPartition::new(gap, true).is_err());
        assert!(TaggedPartition::new(vec![], true).is_err());
    }

    #[test]
    fn step_gauge_uses_left_piece_at_breakpoints() {
        let g = Gauge::step(vec![0.5], vec![0.5, 0.05]).unwrap();
        assert_eq!(g.eval(0.0), 0.5);
        assert_eq!(g.eval(0.5), 0.5);
        assert_eq!(g.eval(0.5 + 1e-12), 0.05);
        assert!(Gauge::step(vec![0.5], vec![0.5]).is_err());
        assert!(Gauge::step(vec![0.5], vec![0.5, 0.0]).is_err());
        assert!(Gauge::constant(-1.0).is_err());
        assert!(Gauge::power_floor(1.0, 0.5, 0.1).is_err());
    }

    #[test]
    fn cousin_constant_gauge() {
        let g = Gauge::Constant { c: 0.3 };
        for perron in [true, false] {
            let p = cousin_partition(&g, perron, DEFAULT_MAX_DEPTH).unwrap();
            assert!(is_delta_fine(&p, &g));
            assert!(p.items().iter().all(|it| it.length() <= 0.5));
        }
    }

    #[test]
    fn cousin_step_gauge_refines_right_half() {
        let g = Gauge::step(vec![0.5], vec![0.5, 0.05]).unwrap();
        for perron in [true, false] {
            let p = cousin_partition(&g, perron, DEFAULT_MAX_DEPTH).unwrap();
            assert!(is_delta_fine(&p, &g));
            for it in p.items().iter().filter(|it| it.tag > 0.5) {
                assert!(it.length() < 0.1, "{it:?}");
            }
        }
    }

    #[test]
    fn cousin_power_floor_tags_origin() {
        let g = Gauge::power_floor(0.5, 1.0, 1e-6).unwrap();
        let p = cousin_partition(&g, true, DEFAULT_MAX_DEPTH).unwrap();
        assert!(is_delta_fine(&p, &g));
        let first = p.items()[0];
        assert_eq!(first.a, 0.0);
        assert!(first.length() < 2e-6);
    }

    #[test]
    fn cousin_power_origin_tags_origin() {
        let g = Gauge::power_origin(0.25, 2.0, 0.01).unwrap();
        let p = cousin_partition(&g, true, DEFAULT_MAX_DEPTH).unwrap();
        assert!(is_delta_fine(&p, &g));
        assert_eq!(p.items()[0].tag, 0.0);
        assert!(p.items()[0].b < 0.01);
        assert!(p.items()[1..].iter().all(|it| it.tag > 0.0));
    }

    #[test]
    fn cousin_depth_exceeded() {
        let g = Gauge::Constant { c: 1e-9 };
        let err = cousin_partition(&g, true, 10).unwrap_err();
        assert!(matches!(err, Error::DepthExceeded { depth: 10, .. }));
        let err = cousin_partition_bounded(&Gauge::Constant { c: 1e-3 }, true, 60, 100).unwrap_err();
        assert_eq!(err, Error::TooManyIntervals { limit: 100 });
    }

    #[test]
    fn cousin_is_deterministic() {
        let g = Gauge::step(vec![0.3, 0.71], vec![0.2, 0.013, 0.09]).unwrap();
        let p1 = cousin_partition(&g, false, 60).unwrap();
        let p2 = cousin_partition(&g, false, 60).unwrap();
        assert_eq!(p1.to_csv(), p2.to_csv());
    }

    #[test]
    fn uniform_examples() {
        let p = uniform_partition(1, TagRule::Mid).unwrap();
        assert_eq!(p.items(), &[TaggedInterval { a: 0.0, b: 1.0, tag: 0.5 }]);
        let tags: Vec<f64> = uniform_partition(4, TagRule::Left).unwrap().items().iter().map(|i| i.tag).collect();
        assert_eq!(tags, vec![0.0, 0.25, 0.5, 0.75]);
        assert!(is_delta_fine(&mids(10), &Gauge::Constant { c: 0.11 }));
        assert!(uniform_partition(0, TagRule::Left).is_err());
    }

    #[test]
    fn adversarial_examples() {
        let p = mids(5);
        let q = adversarial_tags(&p, |_| 1.0, 9).unwrap();
        assert!(q.items().iter().all(|it| it.tag == it.a));
        let q = adversarial_tags(&mids(2), |t| t, 4).unwrap();
        let tags: Vec<f64> = q.items().iter().map(|i| i.tag).collect();
        assert_eq!(tags, vec![0.5, 1.0]);
        assert!(q.is_perron());
        assert!(adversarial_tags(&p, |t| t, 0).is_err());
    }

    #[test]
    fn graded_gauge_keeps_points_isolated() {
        let pts = [0.3, 0.7072];
        for level in [1, 5, 12] {
            let g = Gauge::graded_toward(&pts, level).unwrap();
            let p = cousin_partition(&g, false, 60).unwrap();
            assert!(is_delta_fine(&p, &g));
            for it in p.items() {
                for &q in &pts {
                    if it.a < q && q < it.b {
                        assert!(it.length() < 2f64.powi(-(level as i32) - 1) + 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn measurable_set_merges() {
        let e = MeasurableSet::new(vec![(0.5, 0.8), (-1.0, 0.2), (0.7, 0.9), (0.3, 0.3)]).unwrap();
        assert_eq!(e.intervals(), &[(0.0, 0.2), (0.5, 0.9)]);
        assert!((e.measure() - 0.6).abs() < 1e-15);
        assert!((e.measure_within(0.1, 0.6) - 0.2).abs() < 1e-15);
        assert_eq!(MeasurableSet::empty().measure(), 0.0);
    }

    #[test]
    fn csv_rows() {
        let csv = uniform_partition(2, TagRule::Left).unwrap().to_csv();
        assert_eq!(csv, "a,b,tag\n0,0.5,0\n0.5,1,0.5\n");
    }

    #[test]
    fn refinement_of_fineness() {
        // g1 ≤ g2 pointwise ⇒ every g1-fine partition is g2-fine
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g1 = random_gauge(&mut rng);
            let extra = rng.gen_range(0.0..0.3);
            let g2 = match &g1 {
                Gauge::Constant { c } => Gauge::Constant { c: c + extra },
                Gauge::Step { breakpoints, values } => Gauge::Step {
                    breakpoints: breakpoints.clone(),
                    values: values.iter().map(|v| v + extra).collect(),
                },
                Gauge::PowerFloor { c, p, floor } => Gauge::PowerFloor { c: c + extra, p: *p, floor: floor + extra },
                Gauge::PowerOrigin { .. } => unreachable!(),
            };
            for perron in [true, false] {
                let p = cousin_partition(&g1, perron, 60).unwrap();
                assert!(is_delta_fine(&p, &g2));
            }
        }
    }

    fn arb_gauge() -> impl Strategy<Value = Gauge> {
        prop_oneof![
            (0.001f64..1.0).prop_map(|c| Gauge::Constant { c }),
            (prop::collection::vec(0.01f64..0.99, 0..6), prop::collection::vec(0.001f64..0.6, 7))
                .prop_map(|(mut bp, vals)| {
                    bp.sort_by(f64::total_cmp);
                    bp.dedup();
                    let values = vals[..=bp.len()].to_vec();
                    Gauge::Step { breakpoints: bp, values }
                }),
            (0.01f64..2.0, 1.0f64..4.0, 1e-5f64..0.1)
                .prop_map(|(c, p, floor)| Gauge::PowerFloor { c, p, floor }),
            (0.2f64..1.0, 1.0f64..2.0, 0.02f64..0.2)
                .prop_map(|(c, p, origin)| Gauge::PowerOrigin { c, p, origin }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn cousin_output_is_fine(g in arb_gauge(), perron in any::<bool>()) {
            let p = cousin_partition(&g, perron, DEFAULT_MAX_DEPTH).unwrap();
            prop_assert!(is_delta_fine(&p, &g));
            prop_assert!((p.total_length() - 1.0).abs() < 1e-12);
            prop_assert!(TaggedPartition::new(p.items().to_vec(), perron).is_ok());
        }

        #[test]
        fn perron_origin_tag_bounded_by_length(c in 0.05f64..1.0, eps in 1e-7f64..1e-3) {
            prop_assume!(eps < c / 2.0);
            let g = Gauge::PowerFloor { c, p: 1.0, floor: eps };
            let p = cousin_partition(&g, true, DEFAULT_MAX_DEPTH).unwrap();
            let first = p.items()[0];
            prop_assert!(first.a == 0.0 && first.tag <= first.length());
        }
    }
}
