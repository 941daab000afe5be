//! Randomized property sweep behind `setgauge check`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setgauge_core::demos::{demo_e_over_t, glim_roundtrip, Outcome};
use setgauge_core::function::{determined, random_step_function, Integrand};
use setgauge_core::geometry::{hausdorff_segments, support_segment, Segment, Vector};
use setgauge_core::partition::{cousin_partition_bounded, is_delta_fine, random_gauge, DEFAULT_MAX_DEPTH};

use crate::config::RunConfig;
use crate::Status;

struct Row {
    name: &'static str,
    cases: usize,
    failures: usize,
    worst: f64,
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize) -> Vector {
    Vector::new((0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()).expect("finite")
}

pub fn run(cfg: &RunConfig, seed_flag: Option<u64>, out: &Path) -> Result<Status> {
    let seed = cfg.require_seed(seed_flag)?;
    let cases = cfg.check.as_ref().and_then(|c| c.cases).unwrap_or(200).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();

    let mut row = Row { name: "segment_support", cases: 0, failures: 0, worst: 0.0 };
    for i in 0..cases * 10 {
        let d = [1, 2, 3, 8][i % 4];
        let (u, x) = (random_vector(&mut rng, d), random_vector(&mut rng, d));
        let err = (support_segment(&u, &Segment::new(x.clone()))? - u.dot(&x)?.max(0.0)).abs();
        row.cases += 1;
        row.worst = row.worst.max(err);
        row.failures += usize::from(err > 1e-12);
    }
    rows.push(row);

    let mut row = Row { name: "segment_hausdorff_bound", cases: 0, failures: 0, worst: 0.0 };
    for i in 0..cases * 10 {
        let d = [1, 2, 3, 8][i % 4];
        let (x, y) = (random_vector(&mut rng, d), random_vector(&mut rng, d));
        let excess = hausdorff_segments(&x, &y)? - x.sub(&y)?.norm();
        row.cases += 1;
        row.worst = row.worst.max(excess);
        row.failures += usize::from(excess > 1e-12);
    }
    rows.push(row);

    let mut row = Row { name: "cousin_fineness", cases: 0, failures: 0, worst: 0.0 };
    for i in 0..cases {
        let g = random_gauge(&mut rng);
        let p = cousin_partition_bounded(&g, i % 2 == 0, DEFAULT_MAX_DEPTH, 1 << 22)?;
        let bad = !is_delta_fine(&p, &g) || (p.total_length() - 1.0).abs() > 1e-12;
        row.cases += 1;
        row.worst = row.worst.max((p.total_length() - 1.0).abs());
        row.failures += usize::from(bad);
    }
    rows.push(row);

    let mut row = Row { name: "determined_positive", cases: 0, failures: 0, worst: 0.0 };
    for _ in 0..cases {
        let d = rng.gen_range(1..=3);
        let gm = determined(Integrand::Step(random_step_function(&mut rng, d, 6)));
        let u = random_vector(&mut rng, d);
        let s = gm.support(&u, rng.gen_range(0.0..=1.0))?;
        row.cases += 1;
        row.worst = row.worst.min(s);
        row.failures += usize::from(s < 0.0);
    }
    rows.push(row);

    let e = demo_e_over_t((cases / 4).max(1), seed, None)?;
    rows.push(Row {
        name: "e_over_t_lower_bound",
        cases: e.observed.len(),
        failures: e.count(Outcome::Fail),
        worst: e.observed.iter().map(|o| o.value).filter(|v| v.is_finite()).fold(f64::INFINITY, f64::min),
    });

    let glim = glim_roundtrip(seed, (cases / 20).max(1), 3, 8, 1e-6)?;
    rows.push(Row {
        name: "set_integral_equals_isg",
        cases: glim.observed.len(),
        failures: glim.count(Outcome::Fail),
        worst: glim.observed.iter().map(|o| o.value).fold(0.0, f64::max),
    });

    let mut csv = String::from("check,cases,failures,worst\n");
    let mut failed = false;
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{}", r.name, r.cases, r.failures, r.worst);
        println!("{:<26} {:>6} cases {:>4} failures  worst {}", r.name, r.cases, r.failures, r.worst);
        failed |= r.failures > 0;
    }
    fs::write(out.join("check.csv"), csv)?;
    Ok(if failed { Status::Failed } else { Status::Ok })
}
