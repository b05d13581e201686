use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::roots::{certified_roots, CertifiedRoot};
use crate::ball::{Ball, CBall};
use crate::error::{Error, Result};
use crate::exact::{poly_gcd, IntPolynomial};

/// Power sums p_k = Σ rᵢᵏ, k = 1..=n, of the roots of a monic polynomial.
pub fn power_sums(p: &IntPolynomial, n: usize) -> Vec<BigInt> {
    assert!(p.is_monic());
    let d = p.deg();
    // a(i) = coefficient of x^(d−i), so a(0) = 1
    let a = |i: usize| p.coeff(d - i);
    let mut s = vec![BigInt::zero(); n + 1];
    for k in 1..=n {
        let mut acc = BigInt::zero();
        for i in 1..=(k - 1).min(d) {
            acc += a(i) * &s[k - i];
        }
        if k <= d {
            acc += a(k) * BigInt::from(k);
        }
        s[k] = -acc;
    }
    s.remove(0);
    s
}

/// Monic polynomial of degree n whose roots have the given power sums (s[0] = p₁).
pub fn from_power_sums(s: &[BigInt], n: usize) -> IntPolynomial {
    let mut e = vec![BigInt::one()];
    for k in 1..=n {
        let mut acc = BigInt::zero();
        for i in 1..=k {
            let term = &e[k - i] * &s[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        let (q, r) = acc.div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero(), "Newton identity division must be exact");
        e.push(q);
    }
    let mut c = vec![BigInt::zero(); n + 1];
    for k in 0..=n {
        c[n - k] = if k % 2 == 0 { e[k].clone() } else { -&e[k] };
    }
    IntPolynomial::new(c)
}

/// ∏_{i≤j} (x − rᵢ rⱼ) over the roots r of a monic p.
pub fn symmetric_square(p: &IntPolynomial) -> IntPolynomial {
    let d = p.deg();
    let n = d * (d + 1) / 2;
    let ps = power_sums(p, 2 * n);
    let s: Vec<BigInt> = (1..=n)
        .map(|k| {
            let v = &ps[k - 1] * &ps[k - 1] + &ps[2 * k - 1];
            debug_assert!(v.is_even());
            v >> 1u32
        })
        .collect();
    from_power_sums(&s, n)
}

/// Which disks of `targets` meet the real interval enclosed by `b`.
fn disks_meeting(b: &Ball, targets: &[CertifiedRoot]) -> Vec<usize> {
    targets
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let b = b.to_prec(t.prec);
            let (lo, hi) = (b.lo(), b.hi());
            let x = &t.re;
            let dx = if x < &lo {
                &lo - x
            } else if x > &hi {
                x - &hi
            } else {
                BigInt::zero()
            };
            &dx * &dx + &t.im * &t.im <= &t.rad * &t.rad
        })
        .map(|(i, _)| i)
        .collect()
}

/// Exact data backing a modulus partition.
#[derive(Clone, Debug, Serialize)]
pub struct ModulusCertificate {
    /// Degree of the squarefree part of the symmetric-square polynomial.
    pub sym_square_degree: usize,
    /// gcd(p(x), p(−x)); nontrivial iff some λ and −λ are both roots.
    pub neg_pair_gcd: IntPolynomial,
    /// Index into `squared_moduli` of the value 1, if 1 is a root of S.
    pub unit_value: Option<usize>,
    /// Distinct values |r|² (midpoints), ascending, one per class.
    pub squared_moduli: Vec<f64>,
    /// The four symmetric integer exclusion products, when requested (3 ≤ d ≤ 8).
    pub exclusion_products: Option<ExclusionProducts>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExclusionProducts {
    /// ∏ (rᵢrⱼ − r_k r_l)² over unordered pairs of disjoint index pairs.
    pub pair_pair: String,
    /// ∏ (rᵢrⱼ − r_k²) over unordered {i, j} and k ∉ {i, j}.
    pub pair_square: String,
    /// ∏ (rᵢrⱼ − ∏_{k≠i,j} r_k) over unordered {i, j}.
    pub pair_complement: String,
    /// ∏ (rᵢ − ∏_{k≠i} r_k).
    pub single_complement: String,
}

#[derive(Clone, Debug)]
pub struct ModulusClasses {
    /// Root indices per class, classes sorted by ascending modulus.
    pub classes: Vec<Vec<usize>>,
    /// Class index for each root.
    pub class_of: Vec<usize>,
    pub certificate: ModulusCertificate,
}

/// Partition certified roots of the squarefree polynomial `q` by equal modulus.
///
/// Each |r|² is matched to a unique certified root of the squarefree part of
/// the symmetric square of `q`; two roots share a modulus iff they match the
/// same root. Returns `PrecisionExhausted` when a match is ambiguous.
pub fn classes_from_roots(q: &IntPolynomial, roots: &[CertifiedRoot], prec: u32) -> Result<ModulusClasses> {
    let q = if q.lead().is_negative() { q.neg() } else { q.clone() };
    if !q.is_monic() {
        return Err(Error::InvalidInput("modulus classes need a monic polynomial".into()));
    }
    let s = symmetric_square(&q).squarefree_part();
    let sroots = certified_roots(&s, prec)?;
    let mut value_of = Vec::with_capacity(roots.len());
    for r in roots {
        let hits = disks_meeting(&r.modulus_sq(), &sroots);
        if hits.len() != 1 {
            return Err(Error::PrecisionExhausted {
                bits: prec,
                what: format!("|r|² matches {} symmetric-square roots", hits.len()),
            });
        }
        value_of.push(hits[0]);
    }
    let mut used: Vec<usize> = value_of.clone();
    used.sort_by(|a, b| sroots[*a].re.cmp(&sroots[*b].re));
    used.dedup();
    let class_of: Vec<usize> = value_of.iter().map(|v| used.iter().position(|u| u == v).unwrap()).collect();
    let mut classes = vec![Vec::new(); used.len()];
    for (i, &c) in class_of.iter().enumerate() {
        classes[c].push(i);
    }
    let unit_value = if s.eval_i64(1).is_zero() {
        let one = Ball::from_i64(1, prec);
        let hits = disks_meeting(&one, &sroots);
        used.iter().position(|u| hits.contains(u))
    } else {
        None
    };
    let neg_pair_gcd = poly_gcd(&q, &q.negate_var());
    Ok(ModulusClasses {
        classes,
        class_of,
        certificate: ModulusCertificate {
            sym_square_degree: s.deg(),
            neg_pair_gcd,
            unit_value,
            squared_moduli: used.iter().map(|&u| sroots[u].value().0).collect(),
            exclusion_products: None,
        },
    })
}

/// Round a ball product to the unique integer it encloses.
fn round_product(z: &CBall, prec: u32) -> Result<BigInt> {
    let bad = || Error::PrecisionExhausted { bits: prec, what: "symmetric product not isolated".into() };
    if !z.im.contains_zero() {
        return Err(bad());
    }
    match z.re.integers_inside(1) {
        Some(v) if v.len() == 1 => Ok(v[0].clone()),
        _ => Err(bad()),
    }
}

/// The four exclusion products, each rounded to its exact integer value.
pub fn exclusion_products(roots: &[CertifiedRoot], det: &BigInt, prec: u32) -> Result<ExclusionProducts> {
    let d = roots.len();
    let z: Vec<CBall> = roots.iter().map(|r| r.enclosure().to_prec(prec)).collect();
    let dball = CBall::real(Ball::exact_int(det, prec));
    let one = CBall::one(prec);
    let mut pp = one.clone();
    for i in 0..d {
        for j in i + 1..d {
            for k in i + 1..d {
                if k == j {
                    continue;
                }
                for l in k + 1..d {
                    if l == i || l == j {
                        continue;
                    }
                    let f = z[i].mul(&z[j]).sub(&z[k].mul(&z[l]));
                    pp = pp.mul(&f.mul(&f));
                }
            }
        }
    }
    let mut ps = one.clone();
    let mut pc = one.clone();
    for i in 0..d {
        for j in i + 1..d {
            let rij = z[i].mul(&z[j]);
            for (k, zk) in z.iter().enumerate() {
                if k != i && k != j {
                    ps = ps.mul(&rij.sub(&zk.mul(zk)));
                }
            }
            let rest = dball.div(&rij).ok_or(Error::PrecisionExhausted { bits: prec, what: "division".into() })?;
            pc = pc.mul(&rij.sub(&rest));
        }
    }
    let mut sc = one;
    for zi in &z {
        let rest = dball.div(zi).ok_or(Error::PrecisionExhausted { bits: prec, what: "division".into() })?;
        sc = sc.mul(&zi.sub(&rest));
    }
    Ok(ExclusionProducts {
        pair_pair: round_product(&pp, prec)?.to_string(),
        pair_square: round_product(&ps, prec)?.to_string(),
        pair_complement: round_product(&pc, prec)?.to_string(),
        single_complement: round_product(&sc, prec)?.to_string(),
    })
}

/// Bits of precision that suffice for the exclusion products given the root moduli.
pub fn exclusion_products_bits(roots: &[CertifiedRoot]) -> u32 {
    let d = roots.len();
    let m = roots.iter().map(|r| r.modulus_interval().1).fold(1.0, f64::max);
    let lm = (2.0 * m * m + 1.0).log2();
    let pairs = (d * (d - 1) / 2) as f64;
    let factors = pairs * ((d as f64 - 2.0) * (d as f64 - 3.0) / 2.0) // pair_pair (squared)
        + pairs * (d as f64 - 2.0)
        + pairs
        + d as f64;
    (factors * (lm + 2.0)) as u32 + 96
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn newton_identities_round_trip() {
        let q = p(&[-1, 2, 3, 1]);
        let s = power_sums(&q, 3);
        assert_eq!(s, vec![BigInt::from(-3), BigInt::from(5), BigInt::from(-6)]);
        assert_eq!(from_power_sums(&s, 3), q);
    }

    #[test]
    fn symmetric_square_of_golden_quadratic() {
        // roots φ², φ⁻²: products φ⁴, 1, φ⁻⁴
        let s = symmetric_square(&p(&[1, -3, 1]));
        assert_eq!(s.deg(), 3);
        assert!(s.eval_i64(1).is_zero());
        assert_eq!(s.div_exact(&p(&[-1, 1])).unwrap(), p(&[1, -7, 1]));
    }

    #[test]
    fn classes_of_cubic_and_x4_plus_1() {
        let q = p(&[-1, 2, 3, 1]);
        let r = certified_roots(&q, 128).unwrap();
        let c = classes_from_roots(&q, &r, 128).unwrap();
        assert_eq!(c.classes.len(), 2);
        assert_eq!(c.classes[0], vec![0]);
        assert_eq!(c.classes[1].len(), 2);
        let q = p(&[1, 0, 0, 0, 1]);
        let r = certified_roots(&q, 128).unwrap();
        let c = classes_from_roots(&q, &r, 128).unwrap();
        assert_eq!(c.classes.len(), 1);
        assert_eq!(c.classes[0].len(), 4);
        assert_eq!(c.certificate.unit_value, Some(0));
    }

    #[test]
    fn negative_pairs_are_detected() {
        // x⁴ − 3x² + 1 has roots ±φ, ±φ⁻¹
        let q = p(&[1, 0, -3, 0, 1]);
        let r = certified_roots(&q, 128).unwrap();
        let c = classes_from_roots(&q, &r, 128).unwrap();
        assert_eq!(c.classes.len(), 2);
        assert!(c.classes.iter().all(|k| k.len() == 2));
        assert_eq!(c.certificate.neg_pair_gcd.deg(), 4);
    }

    #[test]
    fn exclusion_products_vanish_exactly_when_expected() {
        // cubic: no equal moduli among pair and real, det 1
        let q = p(&[-1, 2, 3, 1]);
        let r = certified_roots(&q, 256).unwrap();
        let bits = exclusion_products_bits(&r);
        let r = certified_roots(&q, bits).unwrap();
        let pp = exclusion_products(&r, &BigInt::one(), bits).unwrap();
        assert_ne!(pp.pair_square, "0");
        assert_ne!(pp.single_complement, "0");
        // x⁴ + 1: roots on the unit circle, the pair-complement product vanishes
        let q = p(&[1, 0, 0, 0, 1]);
        let r = certified_roots(&q, 512).unwrap();
        let pp = exclusion_products(&r, &BigInt::one(), 512).unwrap();
        assert_eq!(pp.pair_pair, "0");
        assert_eq!(pp.pair_complement, "0");
    }
}
