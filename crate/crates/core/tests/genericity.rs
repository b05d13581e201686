use anosov_lab::genericity::{enumerate_ball, fit_exponent, scan, Column, ScanOptions};
use anosov_lab::spectral::ExclusionReason;

#[test]
fn growth_exponents_d2() {
    let ts = [8.0, 16.0, 32.0, 64.0];
    let rows = scan(2, &ts, &ScanOptions::default()).unwrap();
    for w in rows.windows(2) {
        assert!(w[0].count_ball <= w[1].count_ball);
        assert!(w[1].excluded_fraction() < w[0].excluded_fraction());
    }
    for r in &rows {
        assert!(r.count_excluded <= r.count_ball);
        assert_eq!(r.undecided, 0);
        let sum: u64 = r.counts_by_reason.values().sum();
        assert!(sum >= r.count_excluded);
    }
    let ball = fit_exponent(&rows, Column::Ball).unwrap();
    let excl = fit_exponent(&rows, Column::Excluded).unwrap();
    assert!((ball.slope - 2.0).abs() <= 0.15);
    assert!(ball.slope - excl.slope >= 0.3);
}

#[test]
fn scan_is_deterministic_across_thread_counts() {
    let opts = ScanOptions::default();
    let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| scan(2, &[5.0, 10.0], &opts).unwrap());
    let b = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap().install(|| scan(2, &[5.0, 10.0], &opts).unwrap());
    assert_eq!(a, b);
}

#[test]
fn hyperbolic_sl2_is_never_reducible() {
    let rows = scan(2, &[12.0], &ScanOptions::default()).unwrap();
    let ball = enumerate_ball(2, 12.0).unwrap();
    let elliptic_or_parabolic = ball
        .iter()
        .filter(|m| {
            let t = m.trace();
            t.clone() * t <= 4.into()
        })
        .count() as u64;
    assert_eq!(rows[0].count_excluded, elliptic_or_parabolic);
    // t² − 4 is a perfect square only for |t| = 2
    let parabolic = ball.iter().filter(|m| m.trace() == 2.into() || m.trace() == (-2).into()).count() as u64;
    assert_eq!(rows[0].reason(ExclusionReason::Reducible), parabolic);
}

#[test]
fn ball_is_symmetric_in_d2() {
    let ball = enumerate_ball(2, 9.0).unwrap();
    for m in &ball {
        assert!(ball.contains(&m.transpose()));
        assert!(ball.contains(&m.scale(&(-1).into())));
        assert!(ball.contains(&m.inverse_unimodular().unwrap()));
    }
}
