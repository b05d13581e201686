use anosov_lab::dynamics::{count_fixed, enumerate_fixed, itinerary_setup, orbit, SetupOptions, TorusPoint};
use anosov_lab::exact::{cat_map, IntMatrix, IntPolynomial};
use anosov_lab::spectral::irreducible_over_q;
use num_bigint::BigInt;
use proptest::prelude::*;

fn divisors(c: i64) -> Vec<i64> {
    let c = c.abs();
    (1..=c).filter(|d| c % d == 0).flat_map(|d| [d, -d]).collect()
}

/// Monic, degree ≤ 4: reducible iff there is an integer root or a monic
/// quadratic factor x² + ax + b with b | c₀ and |a| ≤ twice the Cauchy bound.
fn reducible_oracle(c: &[i64]) -> bool {
    let deg = c.len() - 1;
    let p = IntPolynomial::from_i64(c);
    if c[0] == 0 {
        return deg > 1;
    }
    if deg >= 2 && divisors(c[0]).iter().any(|&r| p.eval_i64(r) == BigInt::from(0)) {
        return true;
    }
    if deg == 4 {
        let bound = 1 + c[..4].iter().map(|x| x.abs()).max().unwrap();
        for b in divisors(c[0]) {
            for a in -2 * bound..=2 * bound {
                if p.div_exact(&IntPolynomial::from_i64(&[b, a, 1])).is_some() {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn irreducibility_matches_brute_force() {
    let mut checked = 0;
    for deg in 2..=4usize {
        let r = if deg == 4 { 3 } else { 5 };
        let width = (2 * r + 1) as usize;
        for idx in 0..width.pow(deg as u32) {
            let mut c = Vec::with_capacity(deg + 1);
            let mut t = idx;
            for _ in 0..deg {
                c.push((t % width) as i64 - r);
                t /= width;
            }
            c.push(1);
            let p = IntPolynomial::from_i64(&c);
            assert_eq!(irreducible_over_q(&p).unwrap(), !reducible_oracle(&c), "{c:?}");
            checked += 1;
        }
    }
    assert_eq!(checked, 121 + 1331 + 2401);
}

#[test]
fn fixed_point_counts_follow_the_trace() {
    // For the cat map, |det(Lⁿ − I)| = Lucas(2n) − 2.
    let l = cat_map();
    let mut lucas = vec![2i64, 1];
    for i in 2..=16 {
        lucas.push(lucas[i - 1] + lucas[i - 2]);
    }
    for n in 1..=6u32 {
        let want = lucas[2 * n as usize] - 2;
        assert_eq!(count_fixed(&l, n).unwrap(), BigInt::from(want));
        let pts = enumerate_fixed(&l, n).unwrap();
        assert_eq!(pts.len() as i64, want);
        let ln = l.pow(n as i64).unwrap();
        assert!(pts.iter().all(|p| p.is_fixed_by(&ln)));
        let mut uniq = pts.clone();
        uniq.sort_by_key(|p| format!("{:?}/{}", p.numerators(), p.denominator()));
        uniq.dedup();
        assert_eq!(uniq.len(), pts.len());
    }
}

#[test]
fn cat_map_itinerary_setup_is_admissible() {
    let s = itinerary_setup(&cat_map(), &SetupOptions::default()).unwrap();
    let a = cat_map().pow(s.power as i64).unwrap();
    assert!(s.x1.is_fixed_by(&a) && s.x2.is_fixed_by(&a));
    assert!(s.x1.dist(&s.x2) > 2.0 * s.radius);
    assert!(s.deviation_bound < s.radius);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orbits_invert(a in 0i64..1000, b in 0i64..1000, q in 1i64..1000, n in 1i64..40) {
        let l = IntMatrix::from_i64_rows(&[[0, 1, 0], [0, 0, 1], [1, 1, 0]]).unwrap();
        let x = TorusPoint::from_ratios(&[(a, q), (b, q), (a + b, q)]).unwrap();
        let fwd = orbit(&l, &x, n).unwrap();
        let back = orbit(&l, fwd.last().unwrap(), -n).unwrap();
        prop_assert_eq!(back.last().unwrap(), &x);
    }

    #[test]
    fn cat_orbits_are_exactly_periodic(a in 0i64..64, b in 0i64..64) {
        // The cat map permutes the 64-grid, so every orbit on it closes up.
        let x = TorusPoint::from_ratios(&[(a, 64), (b, 64)]).unwrap();
        let pts = orbit(&cat_map(), &x, 200).unwrap();
        prop_assert!(pts[1..].iter().any(|p| p == &x));
    }
}
