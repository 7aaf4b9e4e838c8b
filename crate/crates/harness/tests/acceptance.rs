//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vistac_core::geometry::Vec2;
use vistac_core::tactile::{min_enclosing_circle, Circle};
use vistac_harness::experiments::rerun;
use vistac_harness::report::{ExperimentId, ExperimentReport};
use vistac_harness::thresholds::checks;
use vistac_harness::{run_experiment, HarnessConfig};
use vistac_nnet::gradcheck::run_suite;
use vistac_nnet::loss::huber;

const GRAD_CHECKS: usize = 50;
const GRAD_SEED: u64 = 7;
const GRAD_REL_TOL: f64 = 1e-4;
const GRAD_BUDGET_S: f64 = 60.0;

const MEC_SETS: usize = 1000;
const MEC_MAX_POINTS: usize = 50;
const MEC_TOL: f64 = 1e-9;
const MEC_BUDGET_S: f64 = 10.0;

const E1_BUDGET_S: f64 = 15.0 * 60.0;

struct Line {
    id: usize,
    passed: bool,
    detail: String,
}

fn line(id: usize, passed: bool, detail: impl Into<String>) -> Line {
    let l = Line { id, passed, detail: detail.into() };
    println!("criterion {:>2}: {} {}", l.id, if l.passed { "PASS" } else { "FAIL" }, l.detail);
    l
}

fn from_checks(id: usize, report: &ExperimentReport, extra: Vec<(bool, String)>) -> Line {
    let cs = checks(report);
    let mut passed = !cs.is_empty();
    let mut parts = Vec::new();
    for c in &cs {
        passed &= c.passed;
        parts.push(format!("[{}: {} {}]", c.name, if c.passed { "ok" } else { "no" }, c.detail));
    }
    for (ok, d) in extra {
        passed &= ok;
        parts.push(format!("[{d}: {}]", if ok { "ok" } else { "no" }));
    }
    line(id, passed, parts.join(" "))
}

fn run(id: ExperimentId, cfg: &HarnessConfig) -> Result<ExperimentReport, String> {
    run_experiment(id, cfg).map_err(|e| format!("{id} failed: {e}"))
}

fn gradient_suite() -> Line {
    let t = Instant::now();
    let results = run_suite(GRAD_CHECKS, GRAD_SEED);
    let secs = t.elapsed().as_secs_f64();
    let worst = results.iter().map(|r| r.max_rel_error).fold(0.0, f64::max);
    let bad: Vec<&str> = results.iter().filter(|r| !(r.max_rel_error < GRAD_REL_TOL)).map(|r| r.primitive).collect();
    line(
        1,
        results.len() == GRAD_CHECKS && bad.is_empty() && secs < GRAD_BUDGET_S,
        format!("{} checks, worst rel err {worst:.2e}, failing {bad:?}, {secs:.1} s", results.len()),
    )
}

fn brute_force(p: &[Vec2]) -> Circle {
    let covers = |c: &Circle| p.iter().all(|q| q.dist(c.center) <= c.radius * (1.0 + 1e-12) + 1e-12);
    let mut best = Circle { center: p[0], radius: if p.len() == 1 { 0.0 } else { f64::INFINITY } };
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            let c = Circle { center: p[i].lerp(p[j], 0.5), radius: p[i].dist(p[j]) / 2.0 };
            if c.radius < best.radius && covers(&c) {
                best = c;
            }
            for k in j + 1..p.len() {
                let (a, b, c) = (p[i], p[j], p[k]);
                let d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
                if d.abs() < 1e-12 {
                    continue;
                }
                let (a2, b2, c2) = (a.norm_sq(), b.norm_sq(), c.norm_sq());
                let center = Vec2::new(
                    (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d,
                    (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d,
                );
                let circ = Circle { center, radius: center.dist(a) };
                if circ.radius < best.radius && covers(&circ) {
                    best = circ;
                }
            }
        }
    }
    best
}

fn mec_oracle() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let sets: Vec<Vec<Vec2>> = (0..MEC_SETS)
        .map(|_| {
            let n = rng.random_range(1..=MEC_MAX_POINTS);
            (0..n).map(|_| Vec2::new(rng.random_range(-50.0..50.0), rng.random_range(-50.0..50.0))).collect()
        })
        .collect();
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for pts in &sets {
        match min_enclosing_circle(pts) {
            Ok(c) => {
                let b = brute_force(pts);
                worst = worst.max((c.radius - b.radius).abs()).max(c.center.dist(b.center));
            }
            Err(_) => errors += 1,
        }
    }
    let secs = t.elapsed().as_secs_f64();
    line(
        2,
        errors == 0 && worst <= MEC_TOL && secs < MEC_BUDGET_S,
        format!("{MEC_SETS} sets, worst deviation {worst:.2e}, {errors} errors, {secs:.2} s"),
    )
}

fn huber_identities() -> Line {
    let zero = vistac_nnet::loss::huber_loss(
        &vistac_nnet::Tensor::from_vec(&[1, 2, 2, 2], vec![0.3f64, -1.0, 2.5, 0.0, 7.0, 0.1, -4.0, 1.5]).unwrap(),
        &vistac_nnet::Tensor::from_vec(&[1, 2, 2, 2], vec![0.3f64, -1.0, 2.5, 0.0, 7.0, 0.1, -4.0, 1.5]).unwrap(),
    )
    .unwrap();
    let (a, b) = (huber(0.5f64), huber(3.0f64));
    let (na, nb) = (huber(-0.5f64), huber(-3.0f64));
    line(
        10,
        zero == 0.0 && a == 0.125 && b == 2.5 && na == 0.125 && nb == 2.5,
        format!("loss(x,x) = {zero}, h(0.5) = {a}, h(3) = {b}, h(-0.5) = {na}, h(-3) = {nb}"),
    )
}

fn main() {
    let cfg = HarnessConfig::default();
    let mut lines = vec![gradient_suite(), mec_oracle()];

    let e1 = run(ExperimentId::E1, &cfg);
    match &e1 {
        Ok(r) => {
            let secs = r.wallclock_s;
            lines.push(from_checks(3, r, vec![(secs <= E1_BUDGET_S, format!("runtime {secs:.0} s <= {E1_BUDGET_S:.0} s"))]));
        }
        Err(e) => lines.push(line(3, false, e.clone())),
    }

    let experiments = [(4, ExperimentId::E1c), (5, ExperimentId::E5), (6, ExperimentId::E4), (7, ExperimentId::E6)];
    for (id, exp) in experiments {
        match run(exp, &cfg) {
            Ok(r) => lines.push(from_checks(id, &r, Vec::new())),
            Err(e) => lines.push(line(id, false, e)),
        }
    }

    let e7 = run(ExperimentId::E7, &cfg);
    match &e7 {
        Ok(r) => lines.push(from_checks(8, r, Vec::new())),
        Err(e) => lines.push(line(8, false, e.clone())),
    }

    let mut detail = Vec::new();
    let mut same = true;
    for (name, first) in [("E1", &e1), ("E7", &e7)] {
        let ok = match first {
            Ok(r) => rerun(r).map(|again| again.same_metrics(r)).unwrap_or(false),
            Err(_) => false,
        };
        same &= ok;
        detail.push(format!("{name} {}", if ok { "bit-exact" } else { "differs" }));
    }
    lines.push(line(9, same, detail.join(", ")));

    lines.push(huber_identities());

    lines.sort_by_key(|l| l.id);
    println!("summary:");
    for l in &lines {
        println!("  {:>2} {}", l.id, if l.passed { "PASS" } else { "FAIL" });
    }
    if lines.iter().any(|l| !l.passed) {
        std::process::exit(1);
    }
}
