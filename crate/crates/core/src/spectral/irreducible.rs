use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::roots::{certified_roots, CertifiedRoot};
use crate::ball::CBall;
use crate::error::{Error, Result};
use crate::exact::IntPolynomial;

/// Largest degree accepted by the subset search.
pub const MAX_IRREDUCIBILITY_DEGREE: usize = 16;

pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}

/// Outcome of one subset-reconstruction pass.
enum Pass {
    Factor(IntPolynomial),
    NoFactor,
    Ambiguous,
}

fn subset_pass(p: &IntPolynomial, roots: &[CertifiedRoot], prec: u32) -> Pass {
    let d = p.deg();
    // units: a real root or a conjugate pair
    let mut units: Vec<Vec<usize>> = Vec::new();
    for (i, r) in roots.iter().enumerate() {
        if r.real {
            units.push(vec![i]);
        } else if r.conj > i {
            units.push(vec![i, r.conj]);
        }
    }
    let z: Vec<CBall> = roots.iter().map(|r| r.enclosure()).collect();
    let n = units.len();
    let mut ambiguous = false;
    for mask in 1u64..(1u64 << n) {
        let size: usize = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| units[b].len()).sum();
        if size > d / 2 {
            continue;
        }
        // ∏ (x − r) over the subset, coefficients constant first
        let mut c = vec![CBall::one(prec)];
        for b in (0..n).filter(|b| mask >> b & 1 == 1) {
            for &i in &units[b] {
                let mut next = vec![CBall::zero(prec); c.len() + 1];
                for (k, ck) in c.iter().enumerate() {
                    next[k + 1] = next[k + 1].add(ck);
                    next[k] = next[k].sub(&ck.mul(&z[i]));
                }
                c = next;
            }
        }
        let mut cand = Vec::with_capacity(c.len());
        let mut dead = false;
        for ck in &c {
            if !ck.im.contains_zero() {
                dead = true;
                break;
            }
            match ck.re.integers_inside(1) {
                Some(v) if v.is_empty() => {
                    dead = true;
                    break;
                }
                Some(v) => cand.push(v[0].clone()),
                None => {
                    ambiguous = true;
                    dead = true;
                    break;
                }
            }
        }
        if dead {
            continue;
        }
        let f = IntPolynomial::new(cand);
        if p.div_exact(&f).is_some() {
            return Pass::Factor(f);
        }
    }
    if ambiguous {
        Pass::Ambiguous
    } else {
        Pass::NoFactor
    }
}

/// A nontrivial monic factor over Z, if one exists.
pub fn find_factor(p: &IntPolynomial, start_prec: u32, cap: u32) -> Result<Option<IntPolynomial>> {
    if !p.is_monic() {
        return Err(Error::NotMonic { lead: p.lead().to_string() });
    }
    let d = p.deg();
    if d <= 1 {
        return Ok(None);
    }
    if !p.is_squarefree() {
        let dec = p.squarefree_decomposition();
        let f = dec.into_iter().find(|f| f.deg() > 0).expect("nonconstant factor");
        return Ok(Some(f));
    }
    if p.coeff(0).is_zero() {
        return Ok(Some(IntPolynomial::x_pow(1)));
    }
    if d > MAX_IRREDUCIBILITY_DEGREE {
        return Err(Error::BudgetExceeded(format!("irreducibility test limited to degree {MAX_IRREDUCIBILITY_DEGREE}")));
    }
    let mut prec = start_prec.max(p.mignotte_log2() as u32 + 64);
    loop {
        let bits = prec;
        let roots = certified_roots(p, bits);
        match roots {
            Ok(roots) => match subset_pass(p, &roots, bits) {
                Pass::Factor(f) => return Ok(Some(f)),
                Pass::NoFactor => return Ok(None),
                Pass::Ambiguous => {}
            },
            Err(Error::PrecisionExhausted { .. }) => {}
            Err(e) => return Err(e),
        }
        if prec >= cap {
            return Err(Error::PrecisionExhausted { bits: prec, what: "factor coefficients not isolated".into() });
        }
        prec = (prec * 2).min(cap);
    }
}

/// True iff p has no monic integer factor of degree 1 ≤ k < deg p.
pub fn irreducible_over_q(p: &IntPolynomial) -> Result<bool> {
    irreducible_with(p, 128, 1 << 14)
}

pub fn irreducible_with(p: &IntPolynomial, start_prec: u32, cap: u32) -> Result<bool> {
    if p.deg() == 2 && p.is_monic() {
        let disc = p.coeff(1) * p.coeff(1) - p.coeff(0) * 4;
        return Ok(!is_perfect_square(&disc));
    }
    Ok(find_factor(p, start_prec, cap)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn spec_examples() {
        assert!(!irreducible_over_q(&p(&[1, 0, -2, 0, 1])).unwrap());
        assert!(irreducible_over_q(&p(&[-1, 2, 3, 1])).unwrap());
        assert!(irreducible_over_q(&p(&[1, -3, 1])).unwrap());
    }

    #[test]
    fn finds_quadratic_factor_of_quartic() {
        // (x² − 3x + 1)(x² + x − 1)
        let f = p(&[1, -3, 1]).mul(&p(&[-1, 1, 1]));
        let g = find_factor(&f, 128, 4096).unwrap().unwrap();
        assert!(g.deg() == 2 && f.div_exact(&g).is_some());
        // block-diagonal cat ⊕ cat
        assert!(!irreducible_over_q(&p(&[1, -3, 1]).pow(2)).unwrap());
    }

    #[test]
    fn skew_sextic_splits_into_cubics() {
        // x⁶ − 2x⁴ − 3x² − 1 = (x³ + 2x² + x + 1)(x³ − 2x² + x − 1)
        let sextic = p(&[-1, 0, -3, 0, -2, 0, 1]);
        let f = find_factor(&sextic, 128, 4096).unwrap().unwrap();
        assert_eq!(f.deg(), 3);
        assert_eq!(p(&[1, 1, 2, 1]).mul(&p(&[-1, 1, -2, 1])), sextic);
        assert!(irreducible_over_q(&p(&[1, 0, 0, 0, 1])).unwrap());
        assert!(!irreducible_over_q(&p(&[4, 0, 0, 0, 1])).unwrap()); // (x²+2x+2)(x²−2x+2)
    }
}
