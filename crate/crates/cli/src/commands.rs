use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use setgauge_core::demos::{
    demo_derivative_henstock, demo_e_over_t, demo_glim_roundtrip, demo_orthonormal_h, DemoReport,
};
use setgauge_core::function::{determined, pathological_primitive, Integrand};
use setgauge_core::geometry::{embed, hausdorff_grid, Zonotope};
use setgauge_core::integrate::{
    integrate as run_loop, isg_zonotope, pettis_step, IntegralKind, IntegralResult, IntegralValue, IterationRecord,
    StopReason, Target,
};
use setgauge_core::partition::{cousin_partition_bounded, uniform_partition, MeasurableSet, TagRule, DEFAULT_MAX_DEPTH};

use crate::config::{Mode, RunConfig};
use crate::{DemoId, Status};

#[derive(Serialize)]
struct SupportRecord<'a> {
    grid_size: usize,
    angular_gap: f64,
    values: &'a [f64],
    radius_bound: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case")]
enum ValueRecord<'a> {
    Vector(&'a [f64]),
    Set { support: SupportRecord<'a>, zonotope: &'a Zonotope },
}

#[derive(Serialize)]
struct OracleRecord {
    description: &'static str,
    distance: f64,
    error_bound: f64,
}

#[derive(Serialize)]
struct ResultRecord<'a> {
    kind: IntegralKind,
    mode: &'static str,
    tol: f64,
    value: ValueRecord<'a>,
    /// `null` when only one sum was formed.
    error_estimate: Option<f64>,
    iterations: &'a [IterationRecord],
    converged: bool,
    stop: StopReason,
    oracle: Option<OracleRecord>,
}

fn oracle(g: &Integrand, mode: Mode, r: &IntegralResult) -> Result<Option<OracleRecord>> {
    let rec = match (&r.value, mode) {
        (IntegralValue::Vector(v), _) => {
            if let Some(step) = g.to_step() {
                let exact = pettis_step(&step, &MeasurableSet::unit());
                OracleRecord { description: "exact step integral", distance: v.sub(&exact)?.norm(), error_bound: 0.0 }
            } else if matches!(g, Integrand::DerivativePathological) {
                let exact = pathological_primitive(1.0) - pathological_primitive(0.0);
                OracleRecord {
                    description: "F(1) - F(0) with F(t) = t^2 sin(1/t^2)",
                    distance: (v.coords()[0] - exact).abs(),
                    error_bound: 0.0,
                }
            } else {
                return Ok(None);
            }
        }
        (IntegralValue::Set { support, .. }, _) => {
            let Some(step) = g.to_step() else { return Ok(None) };
            let d = hausdorff_grid(support, &embed(&isg_zonotope(&step), support.grid())?)?;
            OracleRecord {
                description: "grid Hausdorff distance to the zonotope IS_G",
                distance: d.distance,
                error_bound: d.error_bound,
            }
        }
    };
    Ok(Some(rec))
}

pub fn integrate(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let g = cfg.integrand.as_ref().context("section `integrand` is required for integrate")?;
    let kind = cfg.integral.context("field `integral` is required for integrate")?;
    let opts = cfg.options(g.dim())?;
    let gm;
    let target = match cfg.mode {
        Mode::Vector => Target::Vector(g),
        Mode::Set => {
            gm = determined(g.clone());
            Target::Set(&gm)
        }
    };
    let r = run_loop(kind, target, &opts)?;
    let value = match &r.value {
        IntegralValue::Vector(v) => ValueRecord::Vector(v.coords()),
        IntegralValue::Set { support, zonotope } => ValueRecord::Set {
            support: SupportRecord {
                grid_size: support.grid().len(),
                angular_gap: support.grid().angular_gap(),
                values: support.values(),
                radius_bound: support.radius_bound(),
            },
            zonotope,
        },
    };
    let record = ResultRecord {
        kind,
        mode: match cfg.mode {
            Mode::Vector => "vector",
            Mode::Set => "set",
        },
        tol: opts.tol,
        value,
        error_estimate: r.error_estimate.is_finite().then_some(r.error_estimate),
        iterations: &r.iterations,
        converged: r.converged,
        stop: r.stop,
        oracle: oracle(g, cfg.mode, &r)?,
    };
    fs::write(out.join("result.json"), serde_json::to_string_pretty(&record)? + "\n")?;
    fs::write(out.join("convergence.csv"), r.to_csv())?;
    let last = r.iterations.last().expect("at least one iteration");
    println!(
        "{:?} {} after {} iterations ({} intervals): estimate {}",
        kind,
        if r.converged { "converged" } else { "did not converge" },
        r.iterations.len(),
        last.n_intervals,
        r.error_estimate
    );
    Ok(if r.converged { Status::Ok } else { Status::NonConvergent })
}

pub fn demo(cfg: &RunConfig, id: DemoId, seed_flag: Option<u64>, out: &Path) -> Result<Status> {
    let spec = cfg.demo.clone().unwrap_or_default();
    let report: DemoReport = match id {
        DemoId::EOverT => {
            let seed = cfg.require_seed(seed_flag)?;
            demo_e_over_t(spec.trials.unwrap_or(100), seed, spec.gauge.as_ref())?
        }
        DemoId::OrthonormalH => {
            let n = spec.n.unwrap_or(4);
            let m = spec.partition_size.unwrap_or(4 * n);
            demo_orthonormal_h(n, &uniform_partition(m, TagRule::Mid)?)?
        }
        DemoId::DerivativeHenstock => demo_derivative_henstock(spec.tol.or(cfg.tol).unwrap_or(1e-3))?,
        DemoId::GlimRoundtrip => {
            let seed = cfg.require_seed(seed_flag)?;
            demo_glim_roundtrip(seed, spec.cases.unwrap_or(50))?
        }
    };
    fs::write(out.join("report.txt"), report.to_text())?;
    fs::write(out.join("report.csv"), report.to_csv())?;
    print!("{}", report.to_text());
    Ok(if report.pass { Status::Ok } else { Status::Failed })
}

pub fn partition(cfg: &RunConfig, out: &Path) -> Result<Status> {
    let Some(spec) = &cfg.partition else {
        bail!("section `partition` with a `gauge` is required for partition");
    };
    let p = cousin_partition_bounded(
        &spec.gauge,
        spec.perron,
        spec.max_depth.unwrap_or(DEFAULT_MAX_DEPTH),
        spec.max_intervals.unwrap_or(1 << 22),
    )?;
    fs::write(out.join("partition.csv"), p.to_csv())?;
    println!("{} intervals, mesh {}, gauge {}", p.len(), p.mesh(), spec.gauge);
    Ok(Status::Ok)
}
