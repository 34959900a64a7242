//! Acceptance suite: prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::process::Command;
use std::time::{Duration, Instant};

use common::*;
use framescale::obstruction::{check_constant_bounds, closeness_obstruction, dichotomy_check, pairwise_closeness, ObstructionTheorem, ScalingRef};
use framescale::piecewise::{
    construct_r2, construct_r3_detailed, construct_r4_special, search_piecewise, search_split_with_projection,
    verify_piecewise, PiecewiseScaling, SearchOptions,
};
use framescale::scalability::{open_quadrant_certificate, solve_standard_scaling};
use framescale::transport::{to_canonical, transport_scaling};
use framescale::{Frame, OrthogonalProjection, ParsevalTarget};
use nalgebra::DVector;
use rand::Rng;

const TOL: f64 = 1e-8;

// Criterion 1
const SPLIT_RESIDUAL: f64 = 1e-12;
const SPLIT_TIME: Duration = Duration::from_millis(100);
// Criterion 2
const CROSS_NORM_TOL: f64 = 1e-10;
const SPLIT_ATTEMPTS: usize = 10_000;
// Criterion 3
const SPATIAL_RUNS: usize = 1000;
const SPATIAL_RESIDUAL: f64 = 1e-8;
const NORM_IDENTITY_TOL: f64 = 1e-10;
const SPATIAL_TIME: Duration = Duration::from_secs(5);
// Criterion 4
const PLANAR_RUNS: usize = 1000;
const PLANAR_RESIDUAL: f64 = 1e-10;
// Criterion 5
const SPECIAL_RESIDUAL: f64 = 1e-12;
// Criterion 6
const CLUSTERED_FRAMES: usize = 100;
const CLUSTER_BOUND: f64 = 0.1;
const DICHOTOMY_SAMPLES: usize = 500;
const SEARCH_BUDGET: usize = 200;
const OBSTRUCTION_TIME: Duration = Duration::from_secs(60);
// Criterion 7
const TUPLES: usize = 1000;
// Criterion 8
const ROTATIONS: usize = 200;
const DRIFT: f64 = 1e-10;
// Criterion 10
const UNION_RESIDUAL: f64 = 1e-10;
const QUADRANT_FRAMES: usize = 100;

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Outcome {
    Outcome { passed, summary }
}

/// Passing scalings of unit-norm frames, collected for criterion 9.
#[derive(Default)]
struct Collected {
    piecewise: Vec<(Frame, PiecewiseScaling)>,
}

impl Collected {
    fn add(&mut self, frame: &Frame, ps: &PiecewiseScaling) {
        if frame.is_unit_norm(1e-12) {
            self.piecewise.push((frame.clone(), ps.clone()));
        }
    }
}

fn criterion_1(seen: &mut Collected) -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("split.json");
    let frame_path = fixture_path("planar_eps.csv");
    let start = Instant::now();
    let status = Command::new(env!("CARGO_BIN_EXE_framescale"))
        .args(["piecewise", "--construct", "split", "--p-indices", "0", "--q-indices", "1", "--projection"])
        .arg(fixture_path("proj_first_axis.csv"))
        .arg(&frame_path)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    let elapsed = start.elapsed();
    if !status.success() {
        return outcome(false, format!("exit status {status}"));
    }
    let report = framescale::io::Report::load(&out).unwrap();
    let frame = fixture("planar_eps.csv");
    let ps = report.scaling.as_ref().unwrap().to_piecewise(TOL).unwrap().unwrap();
    let direct = verify_piecewise(&frame, &ps, TOL).unwrap().direct_residual;
    seen.add(&frame, &ps);
    let (a1, b2) = (ps.a[0], ps.b[1]);
    let passed = report.verdict == "found"
        && (a1 - 10.0).abs() <= 1e-12 * 10.0
        && (b2 - SQRT_2).abs() <= 1e-15
        && ps.a[1] == 0.0
        && ps.b[0] == 0.0
        && direct <= SPLIT_RESIDUAL
        && report.residuals["direct"] <= SPLIT_RESIDUAL
        && elapsed < SPLIT_TIME;
    outcome(passed, format!("a1 = {a1}, b2 = {b2}, direct residual {direct:e}, {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let frame = fixture("cross_fail.csv");
    let p = OrthogonalProjection::canonical(&[0, 1], 4).unwrap();
    let ps = PiecewiseScaling::new(p.clone(), vec![1.0, 1.0, 0.0, 0.0], vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0, 0.0]).unwrap();
    let rep = verify_piecewise(&frame, &ps, TOL).unwrap();
    let quoted = rep.p_side.passed && rep.q_side.passed && (rep.cross_norm - SQRT_2).abs() <= CROSS_NORM_TOL && !rep.passed;
    let hit = search_split_with_projection(&frame, &p, SPLIT_ATTEMPTS, 0, TOL).unwrap();
    let direct_split = framescale::piecewise::try_split(&frame, &p, TOL);
    outcome(
        quoted && hit.is_none() && direct_split.is_none(),
        format!(
            "p_side {}, q_side {}, cross_norm {:.15}, overall {}; {} split attempts found {}",
            rep.p_side.passed,
            rep.q_side.passed,
            rep.cross_norm,
            if rep.passed { "PASS" } else { "FAIL" },
            SPLIT_ATTEMPTS,
            if hit.is_some() { "a scaling" } else { "nothing" }
        ),
    )
}

fn criterion_3(seen: &mut Collected) -> Outcome {
    let mut r = rng(3);
    let (mut failures, mut worst, mut worst_gap) = (0, 0.0f64, 0.0f64);
    let start = Instant::now();
    for _ in 0..SPATIAL_RUNS {
        let m = r.random_range(3..=8);
        let frame = unit_frame(&mut r, 3, m);
        match construct_r3_detailed(&frame, TOL) {
            Ok(c) => {
                let direct = verify_piecewise(&frame, &c.scaling, TOL).unwrap().direct_residual;
                worst = worst.max(direct);
                worst_gap = worst_gap.max(c.norm_identity_gap);
                if direct > SPATIAL_RESIDUAL || c.norm_identity_gap > NORM_IDENTITY_TOL {
                    failures += 1;
                }
                seen.add(&frame, &c.scaling);
            }
            Err(_) => failures += 1,
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && elapsed < SPATIAL_TIME,
        format!("{failures} failures in {SPATIAL_RUNS}, worst residual {worst:e}, worst norm identity gap {worst_gap:e}, {elapsed:?}"),
    )
}

fn criterion_4(seen: &mut Collected) -> Outcome {
    let mut r = rng(4);
    let (mut failures, mut worst) = (0, 0.0f64);
    for _ in 0..PLANAR_RUNS {
        let frame = unit_frame(&mut r, 2, 2);
        let p = OrthogonalProjection::random(2, 1, r.random()).unwrap();
        match construct_r2(&frame, &p, TOL) {
            Ok(ps) => {
                let direct = verify_piecewise(&frame, &ps, TOL).unwrap().direct_residual;
                worst = worst.max(direct);
                failures += usize::from(direct > PLANAR_RESIDUAL);
                seen.add(&frame, &ps);
            }
            Err(_) => failures += 1,
        }
    }
    outcome(failures == 0, format!("{failures} failures in {PLANAR_RUNS}, worst residual {worst:e}"))
}

fn criterion_5(seen: &mut Collected) -> Outcome {
    let frame = fixture("special_r4.csv");
    let ps = match construct_r4_special(&frame, [0, 1, 2, 3], TOL) {
        Ok(ps) => ps,
        Err(e) => return outcome(false, format!("constructor failed: {e}")),
    };
    let direct = verify_piecewise(&frame, &ps, TOL).unwrap().direct_residual;
    seen.add(&frame, &ps);
    let h = FRAC_1_SQRT_2;
    let expected = [[0.0, 0.0, h, h], [-h, h, 0.0, 0.0], [0.0, 0.0, h, -h], [h, h, 0.0, 0.0]];
    let got = ps.scaled_vectors(&frame).unwrap();
    let matches = |y: &DVector<f64>, e: &[f64; 4]| {
        let e = DVector::from_row_slice(e);
        (y - &e).norm() <= SPECIAL_RESIDUAL || (y + &e).norm() <= SPECIAL_RESIDUAL
    };
    let in_order = got.iter().zip(&expected).all(|(y, e)| matches(y, e));
    outcome(in_order && direct <= SPECIAL_RESIDUAL, format!("outputs match in order up to sign: {in_order}, residual {direct:e}"))
}

fn criterion_6() -> Outcome {
    let mut r = rng(6);
    let start = Instant::now();
    let (mut wrong_ranks, mut dichotomy_failures, mut found) = (0, 0, 0);
    let mut worst_closeness = 0.0f64;
    for _ in 0..CLUSTERED_FRAMES {
        let m = r.random_range(4..=7);
        let frame = clustered_frame(&mut r, 4, m, 0.04, CLUSTER_BOUND);
        let (eps, _) = pairwise_closeness(&frame).unwrap();
        worst_closeness = worst_closeness.max(eps);
        let obs = closeness_obstruction(&frame);
        if obs.applicable_ranks != [2] || obs.theorem != ObstructionTheorem::R4RankTwo {
            wrong_ranks += 1;
        }
        for _ in 0..DICHOTOMY_SAMPLES {
            let p = OrthogonalProjection::random(4, 2, r.random()).unwrap();
            dichotomy_failures += usize::from(dichotomy_check(&frame, &p, eps).is_err());
        }
        let opts = SearchOptions { ranks: Some(vec![2]), budget: SEARCH_BUDGET, seed: r.random(), tol: TOL };
        found += usize::from(search_piecewise(&frame, &opts).unwrap().scaling.is_some());
    }
    let elapsed = start.elapsed();
    outcome(
        wrong_ranks == 0 && dichotomy_failures == 0 && found == 0 && worst_closeness <= CLUSTER_BOUND && elapsed < OBSTRUCTION_TIME,
        format!(
            "largest closeness {worst_closeness:.4}, {wrong_ranks} frames without rank-2 applicability, \
             {dichotomy_failures} dichotomy failures, {found} scalings found, {elapsed:?}"
        ),
    )
}

fn criterion_7(seen: &mut Collected) -> Outcome {
    let mut r = rng(7);
    let (mut disagreements, mut bound_violations, mut passing) = (0, 0, 0);
    for _ in 0..TUPLES {
        let (frame, ps) = piecewise_tuple(&mut r, TOL);
        let rep = verify_piecewise(&frame, &ps, TOL).unwrap();
        disagreements += usize::from(rep.passed != rep.three_condition_passed);
        let bound = rep.p_side.residual + rep.q_side.residual + 2.0 * rep.cross_norm;
        bound_violations += usize::from(rep.direct_residual > bound * (1.0 + 1e-12) + 1e-15);
        if rep.passed {
            passing += 1;
            seen.add(&frame, &ps);
        }
    }
    outcome(
        disagreements == 0 && bound_violations == 0,
        format!("{passing} passing of {TUPLES}, {disagreements} verdict disagreements, {bound_violations} bound violations"),
    )
}

fn criterion_8(seen: &mut Collected) -> Outcome {
    let mut r = rng(8);
    let frame = fixture("spatial.csv");
    let ps = construct_r3_detailed(&frame, TOL).unwrap().scaling;
    let before = verify_piecewise(&frame, &ps, TOL).unwrap();
    let canon = [OrthogonalProjection::canonical(&[0], 3).unwrap(), OrthogonalProjection::canonical(&[0, 1], 3).unwrap()];
    let (mut worst, mut not_canonical, mut failed) = (0.0f64, 0, 0);
    for _ in 0..ROTATIONS {
        let u = rotation(&mut r, 3);
        let (moved, mps) = transport_scaling(&frame, &ps, &u, 1e-10).unwrap();
        let after = verify_piecewise(&moved, &mps, TOL).unwrap();
        failed += usize::from(!after.passed);
        for (x, y) in [
            (before.direct_residual, after.direct_residual),
            (before.p_side.residual, after.p_side.residual),
            (before.q_side.residual, after.q_side.residual),
            (before.cross_norm, after.cross_norm),
        ] {
            worst = worst.max((x - y).abs());
        }
        seen.add(&moved, &mps);
        let (cf, cps) = to_canonical(&moved, &mps, 1e-10).unwrap();
        let exact = canon.iter().any(|c| c.matrix() == cps.projection.matrix());
        not_canonical += usize::from(!exact || !verify_piecewise(&cf, &cps, TOL).unwrap().passed);
    }
    outcome(
        worst <= DRIFT && not_canonical == 0 && failed == 0,
        format!("worst drift {worst:e}, {failed} re-verification failures, {not_canonical} non-canonical targets"),
    )
}

fn criterion_9(seen: &Collected) -> Outcome {
    let mut failures = Vec::new();
    for (i, (frame, ps)) in seen.piecewise.iter().enumerate() {
        match check_constant_bounds(frame, ScalingRef::Piecewise(ps), TOL) {
            Ok(rep) if rep.passed => {}
            Ok(rep) => failures.push(format!("#{i}: {:?}", rep.detail)),
            Err(e) => failures.push(format!("#{i}: {e}")),
        }
    }
    let first = failures.first().map(|f| format!(", first: {f}")).unwrap_or_default();
    outcome(failures.is_empty(), format!("{} scalings checked, {} failures{first}", seen.piecewise.len(), failures.len()))
}

fn criterion_10() -> Outcome {
    let mut r = rng(10);
    let mut problems = Vec::new();
    for reps in [2usize, 3] {
        for _ in 0..20 {
            let mut vectors = Vec::new();
            for _ in 0..reps {
                let u = rotation(&mut r, 4);
                vectors.extend((0..4).map(|j| u.column(j).into_owned()));
            }
            let target = 1.0 / (reps as f64).sqrt();
            let scaled: Vec<_> = vectors.iter().map(|v| v * target).collect();
            let direct = framescale::frame::verify_parseval(&scaled, ParsevalTarget::Identity(4), TOL).unwrap().residual;
            let verdict = solve_standard_scaling(&vectors, ParsevalTarget::Identity(4), TOL).unwrap();
            let Some(s) = verdict.scaling.filter(|_| verdict.feasible) else {
                problems.push(format!("r = {reps}: infeasible"));
                continue;
            };
            let spread = s.constants.iter().map(|c| (c - target).abs()).fold(0.0, f64::max);
            if direct > UNION_RESIDUAL || s.residual > UNION_RESIDUAL || spread > 1e-8 {
                problems.push(format!("r = {reps}: residual {:e}, constant error {spread:e}", s.residual));
            }
            let frame = Frame::new(4, vectors).unwrap();
            if !check_constant_bounds(&frame, ScalingRef::Standard(&s), TOL).unwrap().passed {
                problems.push(format!("r = {reps}: constant bounds fail"));
            }
        }
    }
    let mut uncertified = 0;
    for _ in 0..QUADRANT_FRAMES {
        let m = r.random_range(2..=6);
        let frame = quadrant_frame(&mut r, m);
        let verdict = solve_standard_scaling(frame.vectors(), ParsevalTarget::Identity(2), TOL).unwrap();
        let certified = open_quadrant_certificate(frame.vectors()).unwrap()
            && !verdict.feasible
            && verdict.certificate.map(|c| c.tag()) == Some("open-quadrant");
        uncertified += usize::from(!certified);
    }
    outcome(
        problems.is_empty() && uncertified == 0,
        format!(
            "{} union problems{}, {uncertified} of {QUADRANT_FRAMES} quadrant frames not certified",
            problems.len(),
            problems.first().map(|p| format!(" ({p})")).unwrap_or_default()
        ),
    )
}

fn main() {
    let mut seen = Collected::default();
    let runs: Vec<(u32, Outcome)> = vec![
        (1, criterion_1(&mut seen)),
        (2, criterion_2()),
        (3, criterion_3(&mut seen)),
        (4, criterion_4(&mut seen)),
        (5, criterion_5(&mut seen)),
        (6, criterion_6()),
        (7, criterion_7(&mut seen)),
        (8, criterion_8(&mut seen)),
    ];
    let mut runs = runs;
    runs.push((9, criterion_9(&seen)));
    runs.push((10, criterion_10()));
    let mut failed = 0;
    for (n, o) in &runs {
        println!("criterion {n:>2}: {} ({})", if o.passed { "PASS" } else { "FAIL" }, o.summary);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} passed, {failed} failed", runs.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

