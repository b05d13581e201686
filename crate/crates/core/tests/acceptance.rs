//! Acceptance criteria 1–7, one PASS/FAIL line each. Runs without the test
//! harness so the lines always reach stdout; exits nonzero if any criterion fails.

use std::time::{Duration, Instant};

use anosov_lab::cocycle::{
    a1_experiment, a3_experiment, default_beta, dual_path_error, periodic_conformality, periodic_points, A1Options,
    A3Options,
};
use anosov_lab::conjugacy::{
    periodic_data_compare, solve_conjugacy, two_rate_example, weak_flag_check, ConjugacyOptions, Perturbation,
    WeakFlagOptions,
};
use anosov_lab::dynamics::{count_fixed, enumerate_fixed, select_j, JMode, PhiMode, SetupOptions};
use anosov_lab::exact::{cat_map, char_poly, companion, cubic_b, IntMatrix, IntPolynomial};
use anosov_lab::genericity::{fit_exponent, scan, Column, ScanOptions};
use anosov_lab::linalg::ols;
use anosov_lab::spectral::{classify, ExclusionReason};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Tolerances and limits, as stated by the criteria.
const C1_RUNTIME: Duration = Duration::from_secs(1);
const C2_BALL_T: f64 = 2.0;
const C2_T_LIST: [f64; 4] = [8.0, 16.0, 32.0, 64.0];
const C2_EXPONENT: f64 = 2.0;
const C2_EXPONENT_TOL: f64 = 0.15;
const C2_SLOPE_GAP: f64 = 0.3;
const C2_RUNTIME: Duration = Duration::from_secs(300);
/// The criterion's stated ball count; the brute-force oracle gives 20.
const C2_STATED_COUNT: u64 = 12;
const C3_COUNTS: [u64; 4] = [1, 5, 16, 45];
const C3_RUNTIME: Duration = Duration::from_secs(1);
const C4_DUAL_N: usize = 1000;
const C4_DUAL_TOL: f64 = 1e-10;
const C4_PERIODIC_POINTS: usize = 20;
const C4_MODULUS_TOL: f64 = 1e-9;
const C4_DENSITY_N: u64 = 100_000;
const C4_DENSITY: f64 = 1.0 / 3.0;
const C4_DENSITY_TOL: f64 = 0.01;
const C4_N: usize = 3000;
const C4_TWIST_RATIO: f64 = 0.4;
const C4_EPS: f64 = 0.5;
const C4_K: f64 = 50.0;
const C4_RUNTIME: Duration = Duration::from_secs(600);
const C5_R: f64 = 1.754878;
const C5_R_TOL: f64 = 1e-6;
const C5_RB_RC: f64 = 1e-9;
const C5_INVARIANCE: f64 = 1e-12;
const C5_PERIODIC_REL: f64 = 1e-8;
const C5_COHOMOLOGY: f64 = 1e-10;
const C5_N: usize = 2000;
const C5_RUNTIME: Duration = Duration::from_secs(600);
const C6_EPS: f64 = 0.02;
const C6_RESIDUAL: f64 = 1e-8;
const C6_VERIFY_GRID: usize = 512;
const C6_SLOPE_EPS: [f64; 3] = [0.005, 0.01, 0.02];
const C6_SLOPE: f64 = 1.0;
const C6_SLOPE_TOL: f64 = 0.2;
const C6_FLAG_EPS: f64 = 0.01;
const C6_FLAG_TOL: f64 = 0.05;
const C6_RUNTIME: Duration = Duration::from_secs(300);
const C7_MAX_DEGREE: usize = 12;
const C7_POLYS: usize = 200;
const C7_CONJUGATIONS: usize = 100;
const C7_RUNTIME: Duration = Duration::from_secs(60);

struct Check {
    ok: bool,
    notes: Vec<String>,
}

impl Check {
    fn new() -> Self {
        Check { ok: true, notes: Vec::new() }
    }

    fn expect(&mut self, cond: bool, what: String) {
        if !cond {
            self.ok = false;
            self.notes.push(format!("FAILED {what}"));
        } else {
            self.notes.push(what);
        }
    }

    fn error(&mut self, what: &str, e: impl std::fmt::Display) {
        self.ok = false;
        self.notes.push(format!("FAILED {what}: {e}"));
    }
}

fn timed(limit: Duration, f: impl FnOnce(&mut Check)) -> Check {
    let mut c = Check::new();
    let t = Instant::now();
    f(&mut c);
    let dt = t.elapsed();
    c.expect(dt < limit, format!("runtime {:.2}s < {}s", dt.as_secs_f64(), limit.as_secs()));
    c
}

fn criterion1() -> Check {
    let mut c = Check::new();
    let cases: [(&str, IntMatrix); 3] = [
        ("cat", cat_map()),
        ("[[1,1],[0,1]]", IntMatrix::from_i64_rows(&[[1, 1], [0, 1]]).unwrap()),
        ("diag(cat,cat)", IntMatrix::block_diag(&[&cat_map(), &cat_map()])),
    ];
    for (name, m) in cases {
        let t = Instant::now();
        match classify(&m) {
            Ok(r) => {
                let f = &r.flags;
                let ok = match name {
                    "cat" => f.satisfies_theorem,
                    "[[1,1],[0,1]]" => !f.satisfies_theorem && !f.hyperbolic && f.exclusion_reasons.contains(&ExclusionReason::NonAnosovReal),
                    _ => !f.satisfies_theorem && !f.irreducible && f.exclusion_reasons.contains(&ExclusionReason::Reducible),
                };
                let dt = t.elapsed();
                c.expect(ok && dt < C1_RUNTIME, format!("{name}: {:?} in {:.3}s", f.exclusion_reasons, dt.as_secs_f64()));
            }
            Err(e) => c.error(name, e),
        }
    }
    c
}

/// Independent count over the entry box: every integer matrix with Σa² ≤ T², det 1.
fn brute_force_ball(t: f64) -> u64 {
    let b = t.floor() as i64;
    let lim = (t * t).floor() as i64;
    let mut n = 0;
    for a in -b..=b {
        for bb in -b..=b {
            for cc in -b..=b {
                for d in -b..=b {
                    if a * a + bb * bb + cc * cc + d * d <= lim && a * d - bb * cc == 1 {
                        n += 1;
                    }
                }
            }
        }
    }
    n
}

fn criterion2() -> Check {
    timed(C2_RUNTIME, |c| {
        let opts = ScanOptions::default();
        match scan(2, &[C2_BALL_T], &opts) {
            Ok(rows) => {
                let oracle = brute_force_ball(C2_BALL_T);
                c.expect(
                    rows[0].count_ball == oracle,
                    format!("#B_Z(2) = {} = brute-force oracle {oracle} (criterion states {C2_STATED_COUNT})", rows[0].count_ball),
                );
            }
            Err(e) => c.error("scan T=2", e),
        }
        match scan(2, &C2_T_LIST, &opts) {
            Ok(rows) => {
                for r in &rows {
                    if r.t <= 16.0 {
                        c.expect(r.count_ball == brute_force_ball(r.t), format!("T={} count {} matches oracle", r.t, r.count_ball));
                    }
                }
                let decreasing = rows.windows(2).all(|w| w[1].excluded_fraction() < w[0].excluded_fraction());
                c.expect(decreasing, "excluded fraction strictly decreasing".into());
                match (fit_exponent(&rows, Column::Ball), fit_exponent(&rows, Column::Excluded)) {
                    (Ok(b), Ok(e)) => {
                        c.expect((b.slope - C2_EXPONENT).abs() <= C2_EXPONENT_TOL, format!("ball exponent {:.4}", b.slope));
                        c.expect(b.slope - e.slope >= C2_SLOPE_GAP, format!("excluded exponent {:.4}", e.slope));
                    }
                    (b, e) => c.error("fit", format!("{:?} {:?}", b.err(), e.err())),
                }
            }
            Err(e) => c.error("scan", e),
        }
    })
}

fn criterion3() -> Check {
    timed(C3_RUNTIME, |c| {
        let l = cat_map();
        for (i, &want) in C3_COUNTS.iter().enumerate() {
            let n = i as u32 + 1;
            let got = count_fixed(&l, n).unwrap();
            let pts = enumerate_fixed(&l, n).unwrap();
            let ln = l.pow(n as i64).unwrap();
            let ok = got == BigInt::from(want) && pts.len() as u64 == want && pts.iter().all(|p| p.is_fixed_by(&ln));
            c.expect(ok, format!("n={n}: {got} ({} enumerated)", pts.len()));
        }
    })
}

fn criterion4() -> Check {
    timed(C4_RUNTIME, |c| {
        let beta = match default_beta() {
            Ok(b) => b,
            Err(e) => return c.error("beta", e),
        };
        let opts = A1Options { beta, epsilon: C4_EPS, mode: PhiMode::Analytic, n_max: C4_N, record_every: 10, setup: SetupOptions::default() };
        let ex = match a1_experiment(&cat_map(), &opts) {
            Ok(e) => e,
            Err(e) => return c.error("a1", e),
        };
        match dual_path_error(&ex.cocycle, &ex.itinerary.x_star, C4_DUAL_N) {
            Ok(d) => c.expect(d < C4_DUAL_TOL, format!("dual path {d:.2e} over n ≤ {C4_DUAL_N}")),
            Err(e) => c.error("dual path", e),
        }
        match periodic_points(&ex.cocycle, C4_PERIODIC_POINTS + 4, 4) {
            Ok(pts) => {
                let mut worst = 0.0f64;
                let mut count = 0;
                for (p, n) in &pts {
                    if let Ok(r) = periodic_conformality(&ex.cocycle, p, *n) {
                        worst = worst.max(r.max_modulus_error);
                        count += 1;
                    }
                }
                c.expect(count >= C4_PERIODIC_POINTS && worst < C4_MODULUS_TOL, format!("{count} periodic returns, modulus error {worst:.2e}"));
            }
            Err(e) => c.error("periodic points", e),
        }
        let density = select_j(beta, JMode::Analytic, C4_DENSITY_N).len() as f64 / C4_DENSITY_N as f64;
        c.expect((density - C4_DENSITY).abs() <= C4_DENSITY_TOL, format!("J density {density:.5} at n = {C4_DENSITY_N}"));
        let t = &ex.j_trace;
        c.expect(t.twisted_slope > 0.0, format!("twisted slope {:.3e}", t.twisted_slope));
        c.expect(
            t.final_twisted_norm >= C4_TWIST_RATIO * ex.j_count as f64,
            format!("‖φ̃ₙ‖ = {:.2} ≥ {C4_TWIST_RATIO}·{}", t.final_twisted_norm, ex.j_count),
        );
        c.expect(ex.all2_trace.max_twisted_norm < 1.0, format!("all-2 max twisted {:.2e}", ex.all2_trace.max_twisted_norm));
        c.expect(t.final_distortion > C4_K && t.distortion_slope > 0.0, format!("K = {:.3e}, slope {:.3e}", t.final_distortion, t.distortion_slope));
    })
}

fn criterion5() -> Check {
    timed(C5_RUNTIME, |c| {
        let ex = match a3_experiment(&A3Options { n_max: C5_N, ..Default::default() }) {
            Ok(e) => e,
            Err(e) => return c.error("a3", e),
        };
        c.expect(ex.bc.reversed_cubic_identity, "reversed-cubic identity exact".into());
        c.expect((ex.bc.r_b - ex.bc.r_c).abs() < C5_RB_RC, format!("|r_B − r_C| = {:.1e}", (ex.bc.r_b - ex.bc.r_c).abs()));
        c.expect((ex.bc.r - C5_R).abs() <= C5_R_TOL, format!("r = {:.9}", ex.bc.r));
        c.expect(ex.invariance_residual < C5_INVARIANCE, format!("W-invariance {:.2e}", ex.invariance_residual));
        c.expect(ex.periodic.max_relative_error < C5_PERIODIC_REL, format!("periodic moduli rel. error {:.2e}", ex.periodic.max_relative_error));
        c.expect(ex.cohomology.residual < C5_COHOMOLOGY, format!("cohomology {:.2e}", ex.cohomology.residual));
        c.expect(ex.trace.distortion_slope > 0.0, format!("distortion slope {:.3e}", ex.trace.distortion_slope));
    })
}

fn criterion6() -> Check {
    timed(C6_RUNTIME, |c| {
        let l = cat_map();
        let opts = ConjugacyOptions::default();
        match solve_conjugacy(&l, &Perturbation::sample1(C6_EPS), &opts) {
            Ok(f) => c.expect(
                f.residual < C6_RESIDUAL && f.verify_grid >= C6_VERIFY_GRID,
                format!("residual {:.2e} on {}² verification grid", f.residual, f.verify_grid),
            ),
            Err(e) => c.error("solve", e),
        }
        match solve_conjugacy(&l, &Perturbation::sample1(0.0), &opts) {
            Ok(f) => {
                c.expect(f.grid_values().iter().all(|&v| v == 0.0) && f.residual == 0.0, "ε = 0 gives u ≡ 0".into());
                match periodic_data_compare(&f, 4) {
                    Ok(t) => c.expect(
                        t.failures == 0 && t.rows.iter().all(|r| r.log_differences.iter().all(|&d| d == 0.0)),
                        format!("ε = 0 periodic data identical at {} points", t.rows.len()),
                    ),
                    Err(e) => c.error("periodic compare", e),
                }
            }
            Err(e) => c.error("solve ε = 0", e),
        }
        let small = ConjugacyOptions { grid: Some(128), offgrid_samples: 8, ..Default::default() };
        let mut diffs = Vec::new();
        for &e in &C6_SLOPE_EPS {
            match solve_conjugacy(&l, &Perturbation::sample1(e), &small).and_then(|f| periodic_data_compare(&f, 1)) {
                Ok(t) => diffs.push(t.rows[0].max_abs_difference),
                Err(err) => return c.error("periodic slope", err),
            }
        }
        let x: Vec<f64> = C6_SLOPE_EPS.iter().map(|e| e.ln()).collect();
        let y: Vec<f64> = diffs.iter().map(|d| d.ln()).collect();
        let s = ols(&x, &y).map(|f| f.0).unwrap_or(f64::NAN);
        c.expect((s - C6_SLOPE).abs() <= C6_SLOPE_TOL, format!("periodic-data slope {s:.4}"));
        let d4 = two_rate_example();
        match solve_conjugacy(&d4, &Perturbation::sample4(C6_FLAG_EPS), &opts) {
            Ok(f) => {
                let wo = WeakFlagOptions::default();
                let reports: Vec<_> = (1..=2).map(|k| weak_flag_check(&f, k, &wo)).collect();
                match (&reports[0], &reports[1]) {
                    (Ok(a), Ok(b)) => {
                        c.expect(a.top.fitted_rate < b.top.fitted_rate, "rates monotone in k".into());
                        for r in [a, b] {
                            let rel = (r.top.fitted_rate / r.rho_k - 1.0).abs();
                            c.expect(rel < C6_FLAG_TOL, format!("k={}: {:.5} vs ρ = {:.5}", r.k, r.top.fitted_rate, r.rho_k));
                        }
                        let neg = a.negative.as_ref().map_or(1.0, |n| n.pass_rate);
                        c.expect(a.leaf.pass_rate == 1.0 && neg == 0.0, "leaf pairs pass, fast pairs rejected".into());
                    }
                    (a, b) => c.error("weak flag", format!("{:?} {:?}", a.as_ref().err(), b.as_ref().err())),
                }
            }
            Err(e) => c.error("solve d = 4", e),
        }
    })
}

fn random_monic(rng: &mut ChaCha8Rng) -> IntPolynomial {
    let deg = rng.gen_range(1..=C7_MAX_DEGREE);
    let mut c: Vec<i64> = (0..deg).map(|_| rng.gen_range(-9..=9)).collect();
    c.push(1);
    IntPolynomial::from_i64(&c)
}

fn random_sl(d: usize, rng: &mut ChaCha8Rng) -> IntMatrix {
    let mut p = IntMatrix::identity(d);
    for _ in 0..6 {
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        if i == j {
            continue;
        }
        let mut e = IntMatrix::identity(d);
        e.set(i, j, BigInt::from(rng.gen_range(-2i64..=2)));
        p = p.mul(&e);
    }
    p
}

fn criterion7() -> Check {
    timed(C7_RUNTIME, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let round_trip = (0..C7_POLYS).all(|_| {
            let p = random_monic(&mut rng);
            companion(&p).map(|m| char_poly(&m) == p).unwrap_or(false)
        });
        c.expect(round_trip, format!("{C7_POLYS} companion/char_poly round trips, degree ≤ {C7_MAX_DEGREE}"));
        for (name, m) in [("cat", cat_map()), ("B3", companion(&cubic_b()).unwrap())] {
            let base = classify(&m).unwrap().flags;
            let mut same = 0;
            for _ in 0..C7_CONJUGATIONS {
                let p = random_sl(m.dim(), &mut rng);
                let conj = p.mul(&m).mul(&p.inverse_unimodular().unwrap());
                if classify(&conj).map(|r| r.flags == base).unwrap_or(false) {
                    same += 1;
                }
            }
            c.expect(same == C7_CONJUGATIONS, format!("{name}: {same}/{C7_CONJUGATIONS} conjugates agree"));
        }
    })
}

fn main() {
    let criteria: [(&str, fn() -> Check); 7] = [
        ("classifier ground truth", criterion1),
        ("genericity counting", criterion2),
        ("periodic points", criterion3),
        ("rotation-shear cocycle", criterion4),
        ("skew product", criterion5),
        ("conjugacy", criterion6),
        ("exactness", criterion7),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let c = f();
        if !c.ok {
            failed += 1;
        }
        println!("criterion {} ({name}): {} | {}", i + 1, if c.ok { "PASS" } else { "FAIL" }, c.notes.join("; "));
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
