//! Reproducible numerical witnesses for the worked examples.
//!
//! Each demo returns a [`DemoReport`] with one [`Observation`] per trial or
//! sub-check. Inconclusive trials (no usable partition) are listed but do
//! not count against the claim.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::{determined, pathological_primitive, random_step_function, FreshBasis, Integrand, StepVectorFunction};
use crate::geometry::{embed, hausdorff_grid, Vector};
use crate::integrate::{
    birkhoff_integrate, henstock_integrate, isg_zonotope, mcshane_integrate, IntegrationOptions, Target,
};
use crate::partition::{
    adversarial_tags, cousin_items, cousin_partition, cousin_partition_bounded, random_gauge, Gauge, TaggedInterval,
    TaggedPartition, DEFAULT_MAX_DEPTH,
};

/// Threshold the adversarial positive-part sums must cross.
pub const DIVERGENCE_THRESHOLD: f64 = 10.0;

/// Deepest mesh level `2^-k` tried by the divergence witness.
pub const DIVERGENCE_MAX_LEVEL: u32 = 22;

/// Interval cap for a single e_t/t trial.
const TRIAL_MAX_INTERVALS: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Fail => "fail",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Observation {
    pub case: String,
    pub value: f64,
    pub outcome: Outcome,
    /// Gauge, partition size, seed and similar details.
    pub provenance: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DemoReport {
    pub demo_id: String,
    pub claim: String,
    pub threshold: f64,
    pub observed: Vec<Observation>,
    pub pass: bool,
}

impl DemoReport {
    fn new(demo_id: &str, claim: &str, threshold: f64, observed: Vec<Observation>) -> Self {
        let pass = !observed.is_empty()
            && observed.iter().all(|o| o.outcome != Outcome::Fail)
            && observed.iter().any(|o| o.outcome == Outcome::Pass);
        Self { demo_id: demo_id.into(), claim: claim.into(), threshold, observed, pass }
    }

    pub fn count(&self, outcome: Outcome) -> usize {
        self.observed.iter().filter(|o| o.outcome == outcome).count()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "demo: {}", self.demo_id);
        let _ = writeln!(out, "claim: {}", self.claim);
        let _ = writeln!(out, "threshold: {}", self.threshold);
        let _ = writeln!(
            out,
            "cases: {} pass, {} fail, {} inconclusive",
            self.count(Outcome::Pass),
            self.count(Outcome::Fail),
            self.count(Outcome::Inconclusive)
        );
        for o in &self.observed {
            let _ = writeln!(out, "  {:<24} {:>24} {:<12} {}", o.case, o.value, o.outcome.as_str(), o.provenance);
        }
        let _ = writeln!(out, "result: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }

    pub const CSV_HEADER: &'static str = "demo_id,case,observed,threshold,outcome,provenance";

    /// One row per observation, header included.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for o in &self.observed {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                self.demo_id,
                o.case,
                o.value,
                self.threshold,
                o.outcome.as_str(),
                o.provenance.replace(',', ";")
            );
        }
        out
    }
}

/// One e_t/t trial: a δ-fine Perron partition whose first item carries a
/// positive tag, and the fresh-basis norm `(Σ_t (Σ_{t_i = t} |I_i|/t)²)^{1/2}`.
pub fn e_over_t_trial(gauge: &Gauge) -> Result<(TaggedPartition, f64)> {
    let p = cousin_partition_bounded(gauge, true, DEFAULT_MAX_DEPTH, TRIAL_MAX_INTERVALS)?;
    let p = positive_first_tag(gauge, p)?;
    let norm = FreshBasis::riemann_norm(&p, |t| 1.0 / t);
    Ok((p, norm))
}

/// Moves tag 0 off the first item: retag at its right end when that stays
/// δ-fine, otherwise shrink the first item to `[0, c]` with `c < δ(c)` and
/// refill `[c, b]` by bisection.
fn positive_first_tag(gauge: &Gauge, p: TaggedPartition) -> Result<TaggedPartition> {
    let first = p.items()[0];
    if first.tag > 0.0 {
        return Ok(p);
    }
    let fine = |t: f64| t < gauge.eval(t);
    let mut items: Vec<TaggedInterval> = Vec::with_capacity(p.len() + 1);
    if fine(first.b) {
        items.push(TaggedInterval { tag: first.b, ..first });
    } else {
        let mut c = first.b;
        let mut halvings = 0;
        while !fine(c) {
            c *= 0.5;
            halvings += 1;
            if halvings > DEFAULT_MAX_DEPTH || c == 0.0 {
                return Err(Error::InvalidPartition("no positive tag covers the origin".into()));
            }
        }
        items.push(TaggedInterval { a: 0.0, b: c, tag: c });
        items.extend(cousin_items(gauge, true, c, first.b, DEFAULT_MAX_DEPTH, TRIAL_MAX_INTERVALS)?);
    }
    items.extend_from_slice(&p.items()[1..]);
    TaggedPartition::new(items, true)
}

/// Sums of `e_t/t` over δ-fine Perron partitions have norm at least 1.
///
/// With `gauge = None` every trial draws its own gauge from a generator
/// seeded by `seed`.
pub fn demo_e_over_t(trials: usize, seed: u64, gauge: Option<&Gauge>) -> Result<DemoReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be ≥ 1".into()));
    }
    if let Some(g) = gauge {
        g.validate()?;
        if !(g.eval(0.0) > 0.0) {
            return Err(Error::InvalidGauge("δ(0) must be positive".into()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed = Vec::with_capacity(trials);
    for i in 0..trials {
        let g = match gauge {
            Some(g) => g.clone(),
            None => random_gauge(&mut rng),
        };
        let obs = match e_over_t_trial(&g) {
            Ok((p, norm)) => {
                let first = p.items()[0];
                Observation {
                    case: format!("trial{i}"),
                    value: norm,
                    outcome: Outcome::from_bool(norm >= 1.0),
                    provenance: format!(
                        "seed={seed} gauge={g} n={} first=[0;{}] tag={}",
                        p.len(),
                        first.b,
                        first.tag
                    ),
                }
            }
            Err(e) => Observation {
                case: format!("trial{i}"),
                value: f64::NAN,
                outcome: Outcome::Inconclusive,
                provenance: format!("seed={seed} gauge={g} error={e}"),
            },
        };
        observed.push(obs);
    }
    Ok(DemoReport::new(
        "e_over_t",
        "norm of the fresh-basis Riemann sum of e_t/t is at least 1",
        1.0,
        observed,
    ))
}

/// `(Σ_k Σ_i |I_i ∩ J_k|²)^{1/2}` with `J_k = [(k-1)/n, k/n]`.
pub fn straddle_formula(n: usize, p: &TaggedPartition) -> f64 {
    let mut acc = 0.0;
    for it in p.items() {
        let first = ((it.a * n as f64).floor() as usize).min(n - 1);
        for k in first..n {
            let (l, r) = (k as f64 / n as f64, (k + 1) as f64 / n as f64);
            if l >= it.b {
                break;
            }
            let w = (it.b.min(r) - it.a.max(l)).max(0.0);
            acc += w * w;
        }
    }
    acc.sqrt()
}

fn straddles(n: usize, p: &TaggedPartition) -> bool {
    p.items().iter().any(|it| {
        let k = ((it.a * n as f64).floor() as usize).min(n - 1);
        it.b > (k + 1) as f64 / n as f64
    })
}

/// Norm of `Σ_i e_{t_i}|I_i|` for distinct tags, checked against `1/√n`.
///
/// Observations: the exact fresh-basis norm `(Σ_i |I_i|²)^{1/2}`, the
/// per-cell formula `(Σ_k Σ_i |I_i ∩ J_k|²)^{1/2}`, and their gap. The two
/// agree when no item straddles a cell boundary; otherwise the per-cell
/// formula is the smaller one.
pub fn demo_orthonormal_h(n: usize, p: &TaggedPartition) -> Result<DemoReport> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be ≥ 1".into()));
    }
    let mesh = p.mesh();
    if !(mesh < 1.0 / n as f64) {
        return Err(Error::MeshTooCoarse { mesh, n });
    }
    let mut tags: Vec<u64> = p.items().iter().map(|it| it.tag.to_bits()).collect();
    tags.sort_unstable();
    if tags.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidPartition("tags must be pairwise distinct".into()));
    }
    let bound = 1.0 / (n as f64).sqrt();
    let norm = FreshBasis::riemann_norm(p, |_| 1.0);
    let formula = straddle_formula(n, p);
    let gap = (norm - formula).abs();
    let straddle = straddles(n, p);
    let prov = format!("n={n} items={} mesh={mesh} straddling={straddle}", p.len());
    let gap_ok = if straddle { formula <= norm + 1e-12 } else { gap <= 1e-12 };
    let observed = vec![
        Observation { case: "norm".into(), value: norm, outcome: Outcome::from_bool(norm <= bound), provenance: prov.clone() },
        Observation {
            case: "cell_formula".into(),
            value: formula,
            outcome: Outcome::from_bool(formula <= bound),
            provenance: prov.clone(),
        },
        Observation { case: "formula_gap".into(), value: gap, outcome: Outcome::from_bool(gap_ok), provenance: prov },
    ];
    Ok(DemoReport::new(
        "orthonormal_h",
        "norm of the fresh-basis Riemann sum of e_t is at most 1/sqrt(n)",
        bound,
        observed,
    ))
}

/// `Σ_i g⁺(t_i)|I_i|` with tags moved to the per-item maximum of `g⁺`.
pub fn adversarial_positive_sum(g: &Integrand, gauge: &Gauge) -> Result<(usize, f64)> {
    let p = cousin_partition(gauge, false, DEFAULT_MAX_DEPTH)?;
    let p = adversarial_tags(&p, |t| g.eval_unchecked(t).coords()[0].max(0.0), 17)?;
    let sum = p
        .items()
        .iter()
        .map(|it| g.eval_unchecked(it.tag).coords()[0].max(0.0) * it.length())
        .sum();
    Ok((p.len(), sum))
}

/// Henstock integrability of the pathological derivative together with the
/// failure of absolute integrability.
///
/// Sub-checks: the Henstock loop reaches `F(1) − F(0) = sin 1` within `tol`;
/// adversarial positive-part sums on `Constant(2^-k)` gauges cross
/// [`DIVERGENCE_THRESHOLD`] for some `k ≤ 22`; the set-valued Henstock loop
/// does not converge; a constant control stays below its sup norm.
pub fn demo_derivative_henstock(tol: f64) -> Result<DemoReport> {
    if !(tol >= 1e-4) {
        return Err(Error::InvalidArgument(format!("tol {tol} must be ≥ 1e-4")));
    }
    let g = Integrand::DerivativePathological;
    let target = pathological_primitive(1.0) - pathological_primitive(0.0);
    let mut observed = Vec::new();

    let h = henstock_integrate(Target::Vector(&g), &IntegrationOptions::new(tol))?;
    let value = h.vector().expect("vector mode").coords()[0];
    let last = h.iterations.last().expect("at least one iteration");
    observed.push(Observation {
        case: "henstock_value".into(),
        value,
        outcome: Outcome::from_bool(h.converged && (value - target).abs() < tol),
        provenance: format!(
            "target={target} iterations={} last_gauge={} n={} converged={}",
            h.iterations.len(),
            last.gauge,
            last.n_intervals,
            h.converged
        ),
    });

    let mut crossed = None;
    let mut best = 0.0f64;
    for k in 1..=DIVERGENCE_MAX_LEVEL {
        let gauge = Gauge::Constant { c: 0.5f64.powi(k as i32) };
        let (n, sum) = adversarial_positive_sum(&g, &gauge)?;
        best = best.max(sum);
        if sum > DIVERGENCE_THRESHOLD {
            crossed = Some((k, n, sum));
            break;
        }
    }
    observed.push(match crossed {
        Some((k, n, sum)) => Observation {
            case: "adversarial_positive_sum".into(),
            value: sum,
            outcome: Outcome::Pass,
            provenance: format!("gauge=const(c=2^-{k}) n={n}"),
        },
        None => Observation {
            case: "adversarial_positive_sum".into(),
            value: best,
            outcome: Outcome::Fail,
            provenance: format!("no level up to {DIVERGENCE_MAX_LEVEL} crossed"),
        },
    });

    let gm = determined(g.clone());
    let s = henstock_integrate(Target::Set(&gm), &IntegrationOptions::new(tol))?;
    observed.push(Observation {
        case: "set_mode_converged".into(),
        value: if s.converged { 1.0 } else { 0.0 },
        outcome: Outcome::from_bool(!s.converged),
        provenance: format!("stop={:?} iterations={}", s.stop, s.iterations.len()),
    });

    let control = Integrand::Step(StepVectorFunction::constant(Vector::from(1.0)));
    let (n, sum) = adversarial_positive_sum(&control, &Gauge::Constant { c: 0.5f64.powi(10) })?;
    observed.push(Observation {
        case: "constant_control".into(),
        value: sum,
        outcome: Outcome::from_bool(sum <= 1.0 + 1e-12),
        provenance: format!("g=1 gauge=const(c=2^-10) n={n}"),
    });

    Ok(DemoReport::new(
        "derivative_henstock",
        "g = F' with F(t) = t^2 sin(1/t^2) is Henstock integrable to sin(1) but not absolutely",
        tol,
        observed,
    ))
}

/// Outcome of one set-valued round trip against the `IS_G` oracle.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GlimCase {
    pub mcshane_distance: f64,
    pub birkhoff_distance: f64,
    pub grid_error: f64,
    pub converged: bool,
    pub iterations: (usize, usize),
}

impl GlimCase {
    pub fn passes(&self, tol: f64) -> bool {
        self.converged && self.mcshane_distance < tol && self.birkhoff_distance < tol
    }
}

/// McShane and Birkhoff integrals of `determined(g)` against `isg_zonotope(g)`.
pub fn glim_case(g: &StepVectorFunction, tol: f64) -> Result<GlimCase> {
    let gm = determined(Integrand::Step(g.clone()));
    let opts = IntegrationOptions::new(tol);
    let m = mcshane_integrate(Target::Set(&gm), &opts)?;
    let b = birkhoff_integrate(Target::Set(&gm), &opts)?;
    let ms = m.support().expect("set mode");
    let oracle = embed(&isg_zonotope(g), ms.grid())?;
    let dm = hausdorff_grid(ms, &oracle)?;
    let db = hausdorff_grid(b.support().expect("set mode"), &oracle)?;
    Ok(GlimCase {
        mcshane_distance: dm.distance,
        birkhoff_distance: db.distance,
        grid_error: dm.error_bound.max(db.error_bound),
        converged: m.converged && b.converged,
        iterations: (m.iterations.len(), b.iterations.len()),
    })
}

/// Round trip over random step functions with dimension in `1..=max_dim`.
pub fn glim_roundtrip(seed: u64, cases: usize, max_dim: usize, max_pieces: usize, tol: f64) -> Result<DemoReport> {
    if cases == 0 || max_dim == 0 || max_pieces == 0 {
        return Err(Error::InvalidArgument("cases, max_dim and max_pieces must be ≥ 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed = Vec::with_capacity(cases);
    for i in 0..cases {
        let dim = rand::Rng::gen_range(&mut rng, 1..=max_dim);
        let g = random_step_function(&mut rng, dim, max_pieces);
        let c = glim_case(&g, tol)?;
        observed.push(Observation {
            case: format!("case{i}"),
            value: c.mcshane_distance.max(c.birkhoff_distance),
            outcome: Outcome::from_bool(c.passes(tol)),
            provenance: format!(
                "seed={seed} dim={dim} pieces={} grid_error={} iterations={}/{} converged={}",
                g.values().len(),
                c.grid_error,
                c.iterations.0,
                c.iterations.1,
                c.converged
            ),
        });
    }
    Ok(DemoReport::new(
        "glim_roundtrip",
        "McShane and Birkhoff integrals of conv{0;g} equal the zonotope IS_G",
        tol,
        observed,
    ))
}

/// [`glim_roundtrip`] with `d ≤ 3`, at most 8 pieces and tolerance 1e-6.
pub fn demo_glim_roundtrip(seed: u64, cases: usize) -> Result<DemoReport> {
    glim_roundtrip(seed, cases, 3, 8, 1e-6)
}
