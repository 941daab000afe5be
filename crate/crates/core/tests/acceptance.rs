//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails. Oracles here are independent of the library code.

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use setgauge_core::demos::{demo_derivative_henstock, demo_e_over_t, demo_orthonormal_h, e_over_t_trial, Outcome};
use setgauge_core::function::{determined, random_step_function, Integrand, StepVectorFunction};
use setgauge_core::geometry::{embed, hausdorff_segments, support_segment, DirectionGrid, Segment, Vector};
use setgauge_core::integrate::{
    bang_bang_max, birkhoff_integrate, henstock_integrate, isg_zonotope, mcshane_integrate, variational_defect,
    IntegrationOptions, IntervalPrimitive, Target,
};
use setgauge_core::partition::{partition_from_cuts, random_gauge, TaggedPartition};

struct Verdict {
    ok: bool,
    detail: String,
    csv: String,
}

fn outcome(ok: bool, detail: String) -> Verdict {
    Verdict { ok, detail, csv: String::new() }
}

fn ip(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn len(a: &[f64]) -> f64 {
    ip(a, a).sqrt()
}

fn random_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

/// `s(u, IS_G) = Σ_k λ(A_k)·⟨u, x_k⟩⁺`.
fn isg_support(g: &StepVectorFunction, u: &[f64]) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (k, x) in g.values().iter().enumerate() {
        let next = g.breakpoints().get(k).copied().unwrap_or(1.0);
        acc += (next - prev) * ip(u, x.coords()).max(0.0);
        prev = next;
    }
    acc
}

fn c1_support_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let dims = [1, 2, 3, 8];
    let mut worst = 0.0f64;
    for i in 0..10_000 {
        let d = dims[i % 4];
        let u = random_vec(&mut rng, d);
        let x = random_vec(&mut rng, d);
        let lib = support_segment(&Vector::from_slice(&u), &Segment::new(Vector::from_slice(&x))).unwrap();
        // sup over [0,1]·x, attained at an endpoint
        let oracle = (0..=1).map(|s| s as f64 * ip(&u, &x)).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max((lib - oracle).abs());
    }
    outcome(worst <= 1e-12, format!("max |s - <u,x>+| = {worst:e} over 10000 cases"))
}

/// Brute-force Hausdorff distance between `[0,x]` and `[0,y]`: the distance
/// from a point to a segment by projection, maximized over sample points.
fn brute_segment_hausdorff(x: &[f64], y: &[f64]) -> f64 {
    let dist = |p: &[f64], s: &[f64]| {
        let ss = ip(s, s);
        let t = if ss == 0.0 { 0.0 } else { (ip(p, s) / ss).clamp(0.0, 1.0) };
        let diff: Vec<f64> = p.iter().zip(s).map(|(a, b)| a - t * b).collect();
        len(&diff)
    };
    let mut best = 0.0f64;
    for k in 0..=200 {
        let s = k as f64 / 200.0;
        let px: Vec<f64> = x.iter().map(|c| c * s).collect();
        let py: Vec<f64> = y.iter().map(|c| c * s).collect();
        best = best.max(dist(&px, y)).max(dist(&py, x));
    }
    best
}

fn c2_segment_bound() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    let mut brute_gap = 0.0f64;
    for i in 0..10_000 {
        let d = rng.gen_range(1..=4);
        let x = random_vec(&mut rng, d);
        let y = random_vec(&mut rng, d);
        let h = hausdorff_segments(&Vector::from_slice(&x), &Vector::from_slice(&y)).unwrap();
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        if h > len(&diff) + 1e-12 {
            violations += 1;
        }
        if i % 10 == 0 {
            let b = brute_segment_hausdorff(&x, &y);
            // sampling can only underestimate, by at most a step along each segment
            let slack = (len(&x) + len(&y)) / 200.0 + 1e-12;
            if b > h + 1e-12 || b < h - slack {
                brute_gap = brute_gap.max((b - h).abs());
            }
        }
    }
    let mut nested_gap = 0.0f64;
    for _ in 0..1000 {
        let d = rng.gen_range(1..=4);
        let x = random_vec(&mut rng, d);
        let lam: f64 = rng.gen_range(0.0..=1.0);
        let y: Vec<f64> = x.iter().map(|c| c * lam).collect();
        let h = hausdorff_segments(&Vector::from_slice(&x), &Vector::from_slice(&y)).unwrap();
        let diff: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        nested_gap = nested_gap.max((h - len(&diff)).abs());
    }
    outcome(
        violations == 0 && nested_gap <= 1e-12 && brute_gap == 0.0,
        format!("{violations} violations in 10000 pairs, nested equality gap {nested_gap:e}, brute-force mismatch {brute_gap:e}"),
    )
}

fn c3_glim(seed: u64, cases: usize) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    let mut worst = 0.0f64;
    let mut worst_err = 0.0f64;
    let mut exact1 = 0.0f64;
    let mut csv = String::new();
    for case in 0..cases {
        let d = rng.gen_range(1..=3);
        let g = random_step_function(&mut rng, d, 8);
        let gm = determined(Integrand::Step(g.clone()));
        let opts = IntegrationOptions::new(1e-6);
        let m = mcshane_integrate(Target::Set(&gm), &opts).unwrap();
        let b = birkhoff_integrate(Target::Set(&gm), &opts).unwrap();
        for (name, r) in [("mcshane", &m), ("birkhoff", &b)] {
            let sv = r.support().unwrap();
            let grid = sv.grid();
            let dist = grid
                .directions()
                .iter()
                .zip(sv.values())
                .map(|(u, s)| (s - isg_support(&g, u.coords())).abs())
                .fold(0.0, f64::max);
            let err = (sv.radius_bound() + isg_support_radius(&g)) * grid.chord();
            if !(r.converged && dist < 1e-6 + err && dist < 1e-6) {
                failures += 1;
            }
            if d == 1 {
                exact1 = exact1.max(dist);
            }
            worst = worst.max(dist);
            worst_err = worst_err.max(err);
            csv.push_str(&format!("# case {case} {name} d={d}\n"));
            csv.push_str(&r.to_csv());
        }
    }
    Verdict {
        ok: failures == 0,
        detail: format!(
            "{} runs, {failures} failures, max grid d_H {worst:e} (d=1 exact: {exact1:e}), max grid error {worst_err:e}",
            2 * cases
        ),
        csv,
    }
}

fn isg_support_radius(g: &StepVectorFunction) -> f64 {
    let mut prev = 0.0;
    let mut acc = 0.0;
    for (k, x) in g.values().iter().enumerate() {
        let next = g.breakpoints().get(k).copied().unwrap_or(1.0);
        acc += (next - prev) * x.norm();
        prev = next;
    }
    acc
}

/// `∫ φ g` for step `φ` and step `g`, by overlapping pieces.
fn integral_phi_g(phi_bp: &[f64], phi_vals: &[f64], g: &StepVectorFunction) -> Vec<f64> {
    let mut out = vec![0.0; g.dim()];
    let mut gl: f64 = 0.0;
    for (k, x) in g.values().iter().enumerate() {
        let gr = g.breakpoints().get(k).copied().unwrap_or(1.0);
        let mut pl = 0.0;
        for (j, w) in phi_vals.iter().enumerate() {
            let pr = phi_bp.get(j).copied().unwrap_or(1.0);
            let overlap = (gr.min(pr) - gl.max(pl)).max(0.0);
            for (o, c) in out.iter_mut().zip(x.coords()) {
                *o += w * overlap * c;
            }
            pl = pr;
        }
        gl = gr;
    }
    out
}

fn c4_isg_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let grid = Arc::new(DirectionGrid::circle(64));
    let mut dominance = 0.0f64;
    let mut reach = 0.0f64;
    for _ in 0..20 {
        let g = random_step_function(&mut rng, 2, 6);
        let s = embed(&isg_zonotope(&g), &grid).unwrap();
        let mut best = vec![f64::NEG_INFINITY; grid.len()];
        for _ in 0..10_000 {
            let (bp, vals): (Vec<f64>, Vec<f64>) = if rng.gen_bool(0.5) {
                let vals = g.values().iter().map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
                (g.breakpoints().to_vec(), vals)
            } else {
                let n = rng.gen_range(1..=10);
                let mut bp: Vec<f64> = (1..n).map(|_| rng.gen_range(0.0..1.0)).collect();
                bp.sort_by(f64::total_cmp);
                let vals = (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect();
                (bp, vals)
            };
            let p = integral_phi_g(&bp, &vals, &g);
            for (i, u) in grid.directions().iter().enumerate() {
                let v = ip(u.coords(), &p);
                dominance = dominance.max(v - s.values()[i]);
                best[i] = best[i].max(v);
            }
        }
        for (b, sv) in best.iter().zip(s.values()) {
            reach = reach.max(sv - b);
        }
    }
    outcome(
        dominance <= 1e-9 && reach <= 1e-3,
        format!("max support excess {dominance:e}, max unreached support {reach:e}"),
    )
}

fn c5_e_over_t(seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    let mut inconclusive = 0;
    let mut min_norm = f64::INFINITY;
    for _ in 0..100 {
        let gauge = random_gauge(&mut rng);
        match e_over_t_trial(&gauge) {
            Ok((p, _)) => {
                let fine = p.items().iter().all(|it| {
                    let d = gauge.eval(it.tag);
                    it.a <= it.tag && it.tag <= it.b && it.tag - d < it.a && it.b < it.tag + d
                });
                let mut coords: HashMap<u64, f64> = HashMap::new();
                for it in p.items() {
                    *coords.entry(it.tag.to_bits()).or_default() += (it.b - it.a) / it.tag;
                }
                let norm = coords.values().map(|c| c * c).sum::<f64>().sqrt();
                min_norm = min_norm.min(norm);
                if !fine || p.items()[0].tag <= 0.0 || norm < 1.0 {
                    violations += 1;
                }
            }
            Err(_) => inconclusive += 1,
        }
    }
    let report = demo_e_over_t(100, seed, None).unwrap();
    let demo_ok = report.pass && report.count(Outcome::Fail) == 0;
    Verdict {
        ok: violations == 0 && inconclusive == 0 && demo_ok,
        detail: format!(
            "100 trials, {violations} violations, {inconclusive} inconclusive, min norm {min_norm}, demo report {}",
            if demo_ok { "pass" } else { "fail" }
        ),
        csv: report.to_csv(),
    }
}

fn cell_formula(n: usize, p: &TaggedPartition) -> f64 {
    let mut acc = 0.0;
    for it in p.items() {
        for k in 0..n {
            let (l, r) = (k as f64 / n as f64, (k + 1) as f64 / n as f64);
            let w = (it.b.min(r) - it.a.max(l)).max(0.0);
            acc += w * w;
        }
    }
    acc.sqrt()
}

fn c6_orthonormal() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_gap = 0.0f64;
    let mut worst_ratio = 0.0f64;
    let mut ok = true;
    for n in [4usize, 25, 100] {
        for trial in 0..10 {
            // refine the J grid so no item straddles a cell boundary
            let mut cuts: Vec<f64> = (1..n).map(|k| k as f64 / n as f64).collect();
            let extra = if trial == 0 { 3 * n } else { rng.gen_range(n..5 * n) };
            cuts.extend((0..extra).map(|_| rng.gen_range(0.0..1.0)));
            let p = partition_from_cuts(&cuts).unwrap();
            if p.mesh() >= 1.0 / n as f64 {
                continue;
            }
            let norm = p.items().iter().map(|it| (it.b - it.a).powi(2)).sum::<f64>().sqrt();
            let formula = cell_formula(n, &p);
            let report = demo_orthonormal_h(n, &p).unwrap();
            let bound = 1.0 / (n as f64).sqrt();
            worst_gap = worst_gap
                .max((norm - formula).abs())
                .max((report.observed[0].value - norm).abs())
                .max((report.observed[1].value - formula).abs());
            worst_ratio = worst_ratio.max(norm / bound);
            ok &= report.pass && norm <= bound && formula <= bound;
        }
    }
    outcome(
        ok && worst_gap <= 1e-12,
        format!("n in {{4,25,100}}, max norm/(1/sqrt n) {worst_ratio:.4}, max formula gap {worst_gap:e}"),
    )
}

fn c7_henstock_witness() -> Verdict {
    let exact = {
        let f = |t: f64| if t == 0.0 { 0.0 } else { t * t * (1.0 / (t * t)).sin() };
        f(1.0) - f(0.0)
    };
    let g = Integrand::DerivativePathological;
    let h = henstock_integrate(Target::Vector(&g), &IntegrationOptions::new(1e-3)).unwrap();
    let value = h.vector().unwrap().coords()[0];
    let report = demo_derivative_henstock(1e-3).unwrap();
    let adv = report.observed.iter().find(|o| o.case == "adversarial_positive_sum").unwrap();
    let set = report.observed.iter().find(|o| o.case == "set_mode_converged").unwrap();
    let ok = h.converged
        && (value - exact).abs() < 1e-3
        && (exact - 0.8414709848).abs() < 1e-10
        && adv.value > 10.0
        && set.value == 0.0
        && report.pass;
    Verdict {
        ok,
        detail: format!(
            "henstock {value:.10} vs sin(1) {exact:.10} after {} iterations, adversarial sum {:.3} ({}), set mode converged = {}",
            h.iterations.len(),
            adv.value,
            adv.provenance,
            set.value == 1.0
        ),
        csv: format!("{}{}", h.to_csv(), report.to_csv()),
    }
}

fn c8_bang_bang() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(1..=6);
        let d = rng.gen_range(1..=3);
        let vs: Vec<Vec<f64>> = (0..n).map(|_| random_vec(&mut rng, d)).collect();
        let lib = bang_bang_max(&vs.iter().map(|v| Vector::from_slice(v)).collect::<Vec<_>>()).unwrap();
        let steps = 10usize;
        let mut best = 0.0f64;
        let total = (steps + 1).pow(n as u32);
        let mut a = vec![0usize; n];
        for _ in 0..total {
            let mut s = vec![0.0; d];
            for (ai, v) in a.iter().zip(&vs) {
                let w = *ai as f64 / steps as f64;
                for (sj, vj) in s.iter_mut().zip(v) {
                    *sj += w * vj;
                }
            }
            best = best.max(len(&s));
            for ai in a.iter_mut() {
                *ai += 1;
                if *ai <= steps {
                    break;
                }
                *ai = 0;
            }
        }
        worst = worst.max((best - lib.max_norm).abs());
    }
    outcome(worst <= 1e-9, format!("100 instances, max |grid max - vertex max| {worst:e}"))
}

fn c9_variational_defect() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    // six blocks (2^-(n+1), 2^-n], the last one reaching down to 0
    let breakpoints: Vec<f64> = (1..=5).rev().map(|n| 0.5f64.powi(n)).collect();
    let mut details = Vec::new();
    let mut ok = true;
    for d in [1usize, 2] {
        let values: Vec<Vector> = (0..6).map(|_| Vector::from_slice(&random_vec(&mut rng, d))).collect();
        let g = StepVectorFunction::new(breakpoints.clone(), values).unwrap();
        let gm = determined(Integrand::Step(g.clone()));
        let grid = Arc::new(if d == 1 { DirectionGrid::line() } else { DirectionGrid::circle(720) });
        let mut cuts: Vec<f64> = (1..10_000).map(|i| i as f64 * 1e-4).collect();
        cuts.extend(&breakpoints);
        let p = partition_from_cuts(&cuts).unwrap();
        let prim = IntervalPrimitive::from_step(&g, &cuts);
        let clean = variational_defect(&gm, &prim, &p, &grid).unwrap();
        let cell = prim.cells().len() / 2;
        let bad = prim.with_scaled_cell(cell, 2.0).unwrap();
        let corrupted = variational_defect(&gm, &bad, &p, &grid).unwrap();
        // d_H(2C, C) = ‖C‖ for a segment cell
        let gap: f64 = prim.cells()[cell].generators().iter().map(|x| x.norm()).sum();
        let detected = if d == 1 {
            corrupted.defect >= gap - 1e-12
        } else {
            corrupted.defect + corrupted.grid_error >= gap && corrupted.defect > 1e-4
        };
        ok &= p.mesh() <= 1e-4 + 1e-15 && clean.defect < 1e-4 && detected;
        details.push(format!(
            "d={d}: clean {:e}, corrupted {:e} vs gap {gap:e}",
            clean.defect, corrupted.defect
        ));
    }
    outcome(ok, details.join("; "))
}

fn timed<F: FnOnce() -> Verdict>(f: F) -> (Verdict, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() -> ExitCode {
    let mut all_ok = true;
    let mut report = |id: u32, name: &str, limit: Option<Duration>, (out, took): (Verdict, Duration)| {
        let in_time = limit.is_none_or(|l| took < l);
        let ok = out.ok && in_time;
        all_ok &= ok;
        let limit_txt = limit.map_or(String::new(), |l| format!(" (limit {}s)", l.as_secs()));
        println!(
            "criterion {id:>2} {name:<22} {} in {:.2}s{limit_txt}: {}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            out.detail
        );
    };

    report(1, "support identity", Some(Duration::from_secs(1)), timed(c1_support_identity));
    report(2, "segment hausdorff", Some(Duration::from_secs(1)), timed(c2_segment_bound));
    let (c3, t3) = timed(|| c3_glim(3, 50));
    let c3_csv = c3.csv.clone();
    report(3, "set integral = IS_G", Some(Duration::from_secs(60)), (c3, t3));
    report(4, "IS_G oracle", Some(Duration::from_secs(30)), timed(c4_isg_oracle));
    let (c5, t5) = timed(|| c5_e_over_t(5));
    let c5_csv = c5.csv.clone();
    report(5, "e_t/t lower bound", Some(Duration::from_secs(5)), (c5, t5));
    report(6, "conv{0,e_t} bound", Some(Duration::from_secs(5)), timed(c6_orthonormal));
    let (c7, t7) = timed(c7_henstock_witness);
    let c7_csv = c7.csv.clone();
    report(7, "henstock witness", Some(Duration::from_secs(120)), (c7, t7));
    report(8, "bang-bang", Some(Duration::from_secs(30)), timed(c8_bang_bang));
    report(9, "variational defect", Some(Duration::from_secs(10)), timed(c9_variational_defect));
    report(
        10,
        "determinism",
        None,
        timed(|| {
            let same3 = c3_glim(3, 50).csv == c3_csv;
            let same5 = c5_e_over_t(5).csv == c5_csv;
            let same7 = c7_henstock_witness().csv == c7_csv;
            outcome(
                same3 && same5 && same7 && !c3_csv.is_empty(),
                format!("byte-identical reruns: c3 {same3}, c5 {same5}, c7 {same7}"),
            )
        }),
    );

    if all_ok {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: FAILED");
        ExitCode::FAILURE
    }
}
