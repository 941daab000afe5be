//! Vector-valued integrands, scalar weights and determined multifunctions.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{check_dim, hausdorff_segments, ConvexSet, Segment, Vector};
use crate::partition::{piece_index, validate_breakpoints, TaggedPartition};

fn check_domain(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(t))
    }
}

fn merge_breakpoints(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut all: Vec<f64> = a.iter().chain(b).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup();
    all
}

#[derive(Deserialize)]
struct RawStep<T> {
    breakpoints: Vec<f64>,
    values: Vec<T>,
}

impl TryFrom<RawStep<Vector>> for StepVectorFunction {
    type Error = Error;

    fn try_from(raw: RawStep<Vector>) -> Result<Self> {
        StepVectorFunction::new(raw.breakpoints, raw.values)
    }
}

impl TryFrom<RawStep<f64>> for ScalarStep {
    type Error = Error;

    fn try_from(raw: RawStep<f64>) -> Result<Self> {
        ScalarStep::new(raw.breakpoints, raw.values)
    }
}

/// Piecewise-constant `g: [0,1] → R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep<Vector>")]
pub struct StepVectorFunction {
    breakpoints: Vec<f64>,
    values: Vec<Vector>,
}

impl StepVectorFunction {
    pub fn new(breakpoints: Vec<f64>, values: Vec<Vector>) -> Result<Self> {
        validate_breakpoints(&breakpoints).map_err(Error::InvalidStep)?;
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidStep(format!(
                "{} values for {} pieces",
                values.len(),
                breakpoints.len() + 1
            )));
        }
        let dim = values[0].dim();
        for v in &values {
            check_dim(dim, v.dim())?;
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(x: Vector) -> Self {
        Self { breakpoints: Vec::new(), values: vec![x] }
    }

    pub fn dim(&self) -> usize {
        self.values[0].dim()
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[Vector] {
        &self.values
    }

    /// `(left, right, value)` for every piece.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, &Vector)> + '_ {
        let n = self.values.len();
        (0..n).map(move |k| {
            let l = if k == 0 { 0.0 } else { self.breakpoints[k - 1] };
            let r = if k + 1 == n { 1.0 } else { self.breakpoints[k] };
            (l, r, &self.values[k])
        })
    }

    /// `Σ_k ‖x_{k+1} − x_k‖`, the total size of the jumps.
    pub fn jump_variation(&self) -> f64 {
        self.values.windows(2).map(|w| w[1].sub(&w[0]).map_or(0.0, |d| d.norm())).sum()
    }

    pub fn eval(&self, t: f64) -> Result<Vector> {
        check_domain(t)?;
        Ok(self.eval_raw(t).clone())
    }

    pub(crate) fn eval_raw(&self, t: f64) -> &Vector {
        &self.values[piece_index(&self.breakpoints, t)]
    }

    /// Pointwise product with a scalar step function, on the common refinement.
    pub fn multiply(&self, alpha: &ScalarStep) -> StepVectorFunction {
        let breakpoints = merge_breakpoints(&self.breakpoints, &alpha.breakpoints);
        let values = representatives(&breakpoints)
            .map(|t| self.eval_raw(t).scale(alpha.eval_raw(t)))
            .collect();
        Self { breakpoints, values }
    }

    pub fn add(&self, other: &StepVectorFunction) -> Result<StepVectorFunction> {
        check_dim(self.dim(), other.dim())?;
        let breakpoints = merge_breakpoints(&self.breakpoints, &other.breakpoints);
        let values = representatives(&breakpoints)
            .map(|t| self.eval_raw(t).add(other.eval_raw(t)))
            .collect::<Result<_>>()?;
        Ok(Self { breakpoints, values })
    }
}

/// One interior point per piece of the pieces cut at `breakpoints`.
fn representatives(breakpoints: &[f64]) -> impl Iterator<Item = f64> + '_ {
    let n = breakpoints.len() + 1;
    (0..n).map(move |k| {
        let l = if k == 0 { 0.0 } else { breakpoints[k - 1] };
        let r = if k + 1 == n { 1.0 } else { breakpoints[k] };
        0.5 * (l + r)
    })
}

/// Piecewise-constant real function on [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStep<f64>")]
pub struct ScalarStep {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl ScalarStep {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        validate_breakpoints(&breakpoints).map_err(Error::InvalidStep)?;
        if values.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidStep(format!(
                "{} values for {} pieces",
                values.len(),
                breakpoints.len() + 1
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { breakpoints, values })
    }

    pub fn constant(c: f64) -> Self {
        Self { breakpoints: Vec::new(), values: vec![c] }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        check_domain(t)?;
        Ok(self.eval_raw(t))
    }

    pub(crate) fn eval_raw(&self, t: f64) -> f64 {
        self.values[piece_index(&self.breakpoints, t)]
    }

    /// `sup |α|`.
    pub fn bound(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// A step weight with values in [0, 1]; products `w·g` are the selections of
/// the multifunction determined by `g`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarWeight(ScalarStep);

impl ScalarWeight {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidStep(format!("weight value {v} outside [0, 1]")));
        }
        Ok(Self(ScalarStep::new(breakpoints, values)?))
    }

    pub fn as_step(&self) -> &ScalarStep {
        &self.0
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.0.eval(t)
    }
}

/// A scalar step function with a declared bound `M` on `|α|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundedScalar {
    step: ScalarStep,
    bound: f64,
}

impl BoundedScalar {
    pub fn new(step: ScalarStep, bound: f64) -> Result<Self> {
        if !(bound >= step.bound()) {
            return Err(Error::InvalidStep(format!(
                "values reach {} beyond declared bound {bound}",
                step.bound()
            )));
        }
        Ok(Self { step, bound })
    }

    pub fn as_step(&self) -> &ScalarStep {
        &self.step
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// `F(t) = t²·sin(1/t²)`, `F(0) = 0`.
pub fn pathological_primitive(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t * t * (1.0 / (t * t)).sin()
    }
}

/// `F′(t) = 2t·sin(1/t²) − (2/t)·cos(1/t²)`, `F′(0) = 0`.
pub fn pathological_derivative(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        let u = 1.0 / (t * t);
        2.0 * t * u.sin() - (2.0 / t) * u.cos()
    }
}

/// An integrand evaluable at every point of [0, 1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Integrand {
    Step(StepVectorFunction),
    /// Scalar derivative of `t²·sin(1/t²)`: Henstock integrable on [0, 1]
    /// with integral `sin(1)`, not Lebesgue (hence not McShane) integrable.
    DerivativePathological,
    /// `t ↦ α(t)·inner(t)`.
    Scaled { alpha: ScalarStep, inner: Box<Integrand> },
    /// Pointwise sum; all terms share one dimension.
    Sum { terms: Vec<Integrand> },
}

impl Integrand {
    pub fn dim(&self) -> usize {
        match self {
            Integrand::Step(s) => s.dim(),
            Integrand::DerivativePathological => 1,
            Integrand::Scaled { inner, .. } => inner.dim(),
            Integrand::Sum { terms } => terms.first().map_or(1, Integrand::dim),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Integrand::Sum { terms } => {
                let first = terms
                    .first()
                    .ok_or_else(|| Error::InvalidArgument("empty sum".into()))?;
                for t in terms {
                    t.validate()?;
                    check_dim(first.dim(), t.dim())?;
                }
                Ok(())
            }
            Integrand::Scaled { inner, .. } => inner.validate(),
            _ => Ok(()),
        }
    }

    /// `g(t)`, ties at breakpoints resolved to the left piece.
    pub fn eval(&self, t: f64) -> Result<Vector> {
        check_domain(t)?;
        Ok(self.eval_unchecked(t))
    }

    pub(crate) fn eval_unchecked(&self, t: f64) -> Vector {
        match self {
            Integrand::Step(s) => s.eval_raw(t).clone(),
            Integrand::DerivativePathological => Vector::from(pathological_derivative(t)),
            Integrand::Scaled { alpha, inner } => inner.eval_unchecked(t).scale(alpha.eval_raw(t)),
            Integrand::Sum { terms } => {
                let mut acc = terms[0].eval_unchecked(t);
                for term in &terms[1..] {
                    acc.axpy(1.0, &term.eval_unchecked(t));
                }
                acc
            }
        }
    }

    /// The equivalent step function, when the integrand is built from steps only.
    pub fn to_step(&self) -> Option<StepVectorFunction> {
        match self {
            Integrand::Step(s) => Some(s.clone()),
            Integrand::DerivativePathological => None,
            Integrand::Scaled { alpha, inner } => Some(inner.to_step()?.multiply(alpha)),
            Integrand::Sum { terms } => {
                let mut acc = terms.first()?.to_step()?;
                for t in &terms[1..] {
                    acc = acc.add(&t.to_step()?).ok()?;
                }
                Some(acc)
            }
        }
    }

    /// Points where the integrand may jump or blow up.
    pub fn singular_points(&self) -> Vec<f64> {
        match self {
            Integrand::Step(s) => s.breakpoints().to_vec(),
            Integrand::DerivativePathological => vec![0.0],
            Integrand::Scaled { alpha, inner } => merge_breakpoints(alpha.breakpoints(), &inner.singular_points()),
            Integrand::Sum { terms } => terms
                .iter()
                .fold(Vec::new(), |acc, t| merge_breakpoints(&acc, &t.singular_points())),
        }
    }
}

impl From<StepVectorFunction> for Integrand {
    fn from(s: StepVectorFunction) -> Self {
        Integrand::Step(s)
    }
}

pub fn eval_g(f: &Integrand, t: f64) -> Result<Vector> {
    f.eval(t)
}

/// The multifunction `G(t) = conv{0, g(t)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeterminedMF {
    g: Integrand,
}

impl DeterminedMF {
    pub fn new(g: Integrand) -> Self {
        Self { g }
    }

    pub fn generator(&self) -> &Integrand {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.dim()
    }

    pub fn eval(&self, t: f64) -> Result<Segment> {
        Ok(Segment::new(self.g.eval(t)?))
    }

    /// `s(u, G(t)) = ⟨u, g(t)⟩⁺`.
    pub fn support(&self, u: &Vector, t: f64) -> Result<f64> {
        self.eval(t)?.support(u)
    }
}

pub fn determined(g: Integrand) -> DeterminedMF {
    DeterminedMF::new(g)
}

/// The selection `t ↦ w(t)·g(t)` of the multifunction determined by `g`.
pub fn selection(w: &ScalarWeight, g: &Integrand) -> Integrand {
    scaled(w.as_step(), g)
}

/// `t ↦ α(t)·g(t)` for a bounded step `α`.
pub fn scale_by_bounded(alpha: &BoundedScalar, g: &Integrand) -> Integrand {
    scaled(alpha.as_step(), g)
}

fn scaled(alpha: &ScalarStep, g: &Integrand) -> Integrand {
    match g {
        Integrand::Step(s) => Integrand::Step(s.multiply(alpha)),
        other => Integrand::Scaled { alpha: alpha.clone(), inner: Box::new(other.clone()) },
    }
}

/// Both sides of `d_H(G(t), G(t′)) ≤ ‖g(t) − g(t′)‖`.
pub fn lemma_l2_gap(g: &Integrand, t: f64, t2: f64) -> Result<(f64, f64)> {
    let (x, y) = (g.eval(t)?, g.eval(t2)?);
    Ok((hausdorff_segments(&x, &y)?, x.sub(&y)?.norm()))
}

/// The map `t ↦ c(t)·e_t` into a Hilbert space with one orthonormal vector
/// per point of [0, 1].
///
/// A Riemann sum touches finitely many tags, so its norm only needs one
/// coordinate per distinct tag: `‖Σ_i c(t_i)|I_i| e_{t_i}‖` is the Euclidean
/// norm of the per-tag totals.
#[derive(Clone, Copy, Debug, Default)]
pub struct FreshBasis;

impl FreshBasis {
    /// Coefficients of `Σ_i coeff(t_i)|I_i| e_{t_i}`, one per distinct tag, in
    /// increasing tag order.
    pub fn riemann_coordinates<F: Fn(f64) -> f64>(p: &TaggedPartition, coeff: F) -> Vec<(f64, f64)> {
        let mut per_tag: BTreeMap<u64, f64> = BTreeMap::new();
        for it in p.items() {
            *per_tag.entry(it.tag.to_bits()).or_insert(0.0) += coeff(it.tag) * it.length();
        }
        per_tag.into_iter().map(|(bits, c)| (f64::from_bits(bits), c)).collect()
    }

    pub fn riemann_norm<F: Fn(f64) -> f64>(p: &TaggedPartition, coeff: F) -> f64 {
        Self::riemann_coordinates(p, coeff)
            .iter()
            .map(|(_, c)| c * c)
            .sum::<f64>()
            .sqrt()
    }
}

/// A random step function on `[0, 1]` with 1..=max_pieces pieces and
/// coordinates uniform in [-1, 1].
pub fn random_step_function<R: Rng>(rng: &mut R, dim: usize, max_pieces: usize) -> StepVectorFunction {
    let pieces = rng.gen_range(1..=max_pieces.max(1));
    let mut breakpoints: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.01..0.99)).collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let values = (0..=breakpoints.len())
        .map(|_| Vector::new((0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect()).expect("finite coordinates"))
        .collect();
    StepVectorFunction::new(breakpoints, values).expect("sorted breakpoints inside (0, 1)")
}
