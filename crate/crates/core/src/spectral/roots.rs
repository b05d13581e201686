use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

use crate::ball::{fixed_to_decimal, fixed_to_f64, horner_with_derivative, Ball, CBall};
use crate::error::{Error, Result};
use crate::exact::IntPolynomial;

/// A disk with exact dyadic center `(re + i·im)·2⁻ᵖ` and radius `rad·2⁻ᵖ`
/// containing exactly one root of the source polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedRoot {
    pub re: BigInt,
    pub im: BigInt,
    pub rad: BigInt,
    pub prec: u32,
    /// The root is certified real (im = 0).
    pub real: bool,
    /// Index of the conjugate root in the same list (self for real roots).
    pub conj: usize,
}

impl CertifiedRoot {
    pub fn value(&self) -> (f64, f64) {
        (fixed_to_f64(&self.re, self.prec), fixed_to_f64(&self.im, self.prec))
    }

    pub fn radius(&self) -> f64 {
        Ball { mid: BigInt::zero(), rad: self.rad.clone(), prec: self.prec }.rad_f64()
    }

    /// Rectangle enclosing the disk.
    pub fn enclosure(&self) -> CBall {
        let p = self.prec;
        let re = Ball { mid: self.re.clone(), rad: self.rad.clone(), prec: p };
        let im = if self.real {
            Ball::zero(p)
        } else {
            Ball { mid: self.im.clone(), rad: self.rad.clone(), prec: p }
        };
        CBall::new(re, im)
    }

    /// Ball enclosing the modulus.
    pub fn modulus(&self) -> Ball {
        let p = self.prec;
        let c = CBall::new(
            Ball { mid: self.re.clone(), rad: BigInt::zero(), prec: p },
            Ball { mid: self.im.clone(), rad: BigInt::zero(), prec: p },
        );
        let m = c.abs();
        let lo = (m.lo() - &self.rad).max(BigInt::zero());
        let hi = m.hi() + &self.rad;
        let mid = (&lo + &hi) >> 1u32;
        let rad = (&hi - &mid).max(&mid - &lo);
        Ball { mid, rad, prec: p }
    }

    pub fn modulus_interval(&self) -> (f64, f64) {
        let m = self.modulus();
        (m.lo_f64().max(0.0), m.hi_f64())
    }

    /// Enclosure of |z|² that accounts for the disk radius.
    pub fn modulus_sq(&self) -> Ball {
        self.modulus().sqr()
    }
}

impl Serialize for CertifiedRoot {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let (lo, hi) = self.modulus_interval();
        let mut st = s.serialize_struct("CertifiedRoot", 5)?;
        st.serialize_field("re", &fixed_to_decimal(&self.re, self.prec, 30))?;
        st.serialize_field("im", &fixed_to_decimal(&self.im, self.prec, 30))?;
        st.serialize_field("radius", &format!("{:.3e}", self.radius()))?;
        st.serialize_field("modulus_interval", &[format!("{lo:.15e}"), format!("{hi:.15e}")])?;
        st.serialize_field("real", &self.real)?;
        st.end()
    }
}

/// f64 starting values: eigenvalues of the companion matrix.
fn initial_guesses(p: &IntPolynomial) -> Vec<(f64, f64)> {
    let d = p.deg();
    let c = p.to_f64_coeffs();
    let lead = c[d];
    let finite = c.iter().all(|x| x.is_finite());
    let mut out = Vec::new();
    if finite && d > 0 {
        let m = DMatrix::from_fn(d, d, |i, j| {
            if i + 1 == j {
                1.0
            } else if i == d - 1 {
                -c[j] / lead
            } else {
                0.0
            }
        });
        // bounded QR iterations; unshifted cycles fall back to circle guesses
        if let Some(schur) = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 2000) {
            out = schur.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect();
        }
    }
    if out.len() != d || out.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
        let r = p.root_bound().min(1e300) * 0.5;
        out = (0..d)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / d as f64;
                (r * t.cos(), r * t.sin())
            })
            .collect();
    }
    // separate exact duplicates so the Aberth sums are defined
    for k in 0..out.len() {
        for j in 0..k {
            if out[j] == out[k] {
                let s = 1e-7 * (1.0 + out[k].0.abs() + out[k].1.abs());
                out[k].0 += s * (k as f64 + 1.0);
                out[k].1 += s * 0.5;
            }
        }
    }
    out
}

fn mid(z: &CBall) -> CBall {
    z.midpoint()
}

/// Aberth–Ehrlich refinement in midpoint arithmetic at precision `prec`.
fn aberth(p: &IntPolynomial, prec: u32, start: &[(f64, f64)]) -> Vec<CBall> {
    let d = p.deg();
    let coeffs = p.coeffs();
    let mut z: Vec<CBall> = start.iter().map(|&(a, b)| CBall::from_f64(a, b, prec).midpoint()).collect();
    let one = CBall::one(prec);
    let tol_bits = prec as f64 - 12.0;
    for _ in 0..400 {
        let mut worst = f64::NEG_INFINITY;
        for k in 0..d {
            let (v, dv) = horner_with_derivative(coeffs, &z[k]);
            let (v, dv) = (mid(&v), mid(&dv));
            if v.re.mid.is_zero() && v.im.mid.is_zero() {
                continue;
            }
            let Some(newton) = v.div(&dv).map(|w| mid(&w)) else {
                // stationary point: nudge and continue
                z[k] = z[k].add(&CBall::from_f64(1e-9, 1e-9, prec)).midpoint();
                worst = f64::INFINITY;
                continue;
            };
            let mut s = CBall::zero(prec);
            for j in 0..d {
                if j != k {
                    if let Some(r) = z[k].sub(&z[j]).recip() {
                        s = s.add(&mid(&r));
                    }
                }
            }
            let denom = mid(&one.sub(&mid(&newton.mul(&s))));
            let w = match newton.div(&denom) {
                Some(w) => mid(&w),
                None => newton,
            };
            // squaring in fixed point would underflow long before convergence
            let size = w.re.to_f64().abs().max(w.im.to_f64().abs());
            let scale = z[k].re.to_f64().abs().max(z[k].im.to_f64().abs()).max(1.0);
            let rel = (size / scale).log2();
            worst = worst.max(rel);
            z[k] = mid(&z[k].sub(&w));
        }
        if worst < -tol_bits {
            break;
        }
    }
    z
}

/// Certify one disk per root at `prec` bits. Input must be squarefree.
pub fn certified_roots(p: &IntPolynomial, prec: u32) -> Result<Vec<CertifiedRoot>> {
    let d = p.deg();
    if p.is_zero() || d == 0 {
        return Ok(Vec::new());
    }
    if !p.is_squarefree() {
        return Err(Error::InvalidInput(format!("{p} is not squarefree; deflate first")));
    }
    let start = initial_guesses(p);
    let z = aberth(p, prec, &start);
    certify(p, &z, prec)
}

/// Double the precision from `start` up to `cap` until certification succeeds.
pub fn certified_roots_auto(p: &IntPolynomial, start: u32, cap: u32) -> Result<Vec<CertifiedRoot>> {
    let mut prec = start.max(64);
    loop {
        match certified_roots(p, prec) {
            Err(Error::PrecisionExhausted { .. }) if prec < cap => prec = (prec * 2).min(cap),
            other => return other,
        }
    }
}

fn certify(p: &IntPolynomial, z: &[CBall], prec: u32) -> Result<Vec<CertifiedRoot>> {
    let d = p.deg();
    let coeffs = p.coeffs();
    let exhausted = |what: &str| Error::PrecisionExhausted { bits: prec, what: what.to_string() };
    let mut centers: Vec<(BigInt, BigInt)> = z.iter().map(|c| (c.re.mid.clone(), c.im.mid.clone())).collect();
    let mut rads: Vec<BigInt> = Vec::with_capacity(d);
    for c in z {
        let (v, dv) = horner_with_derivative(coeffs, &c.midpoint());
        // |v| ≤ |Re v| + |Im v|; avoids squaring tiny residuals
        let vhi = v.re.abs().hi() + v.im.abs().hi();
        let dlo = dv.abs().lo();
        if !dlo.is_positive() {
            return Err(exhausted("derivative not bounded away from zero"));
        }
        // R = d·|p(z)|/|p′(z)|, rounded up, in units of 2⁻ᵖ
        let num: BigInt = (vhi * BigInt::from(d)) << prec;
        rads.push(num.div_ceil(&dlo) + 1);
    }

    let dist2 = |a: &(BigInt, BigInt), b: &(BigInt, BigInt)| {
        let dx = &a.0 - &b.0;
        let dy = &a.1 - &b.1;
        &dx * &dx + &dy * &dy
    };
    for i in 0..d {
        for j in i + 1..d {
            let r = &rads[i] + &rads[j];
            if dist2(&centers[i], &centers[j]) <= &r * &r {
                return Err(exhausted("root disks overlap"));
            }
        }
    }

    // conjugation pairing
    let mut conj = vec![usize::MAX; d];
    for k in 0..d {
        let ck = (centers[k].0.clone(), -&centers[k].1);
        let hits: Vec<usize> = (0..d)
            .filter(|&j| {
                let r = &rads[k] + &rads[j];
                dist2(&ck, &centers[j]) <= &r * &r
            })
            .collect();
        if hits.len() != 1 {
            return Err(exhausted("conjugate disk not isolated"));
        }
        conj[k] = hits[0];
    }
    for k in 0..d {
        if conj[conj[k]] != k {
            return Err(exhausted("inconsistent conjugate pairing"));
        }
    }
    let mut out: Vec<CertifiedRoot> = Vec::with_capacity(d);
    let mut placed = vec![false; d];
    let mut order: Vec<usize> = (0..d).collect();
    // real roots first by value, then pairs by real part
    order.sort_by(|&a, &b| {
        let ka = (conj[a] != a, centers[a].0.clone());
        let kb = (conj[b] != b, centers[b].0.clone());
        ka.cmp(&kb)
    });
    for &k in &order {
        if placed[k] {
            continue;
        }
        placed[k] = true;
        let j = conj[k];
        if j == k {
            centers[k].1 = BigInt::zero();
            out.push(CertifiedRoot {
                re: centers[k].0.clone(),
                im: BigInt::zero(),
                rad: rads[k].clone(),
                prec,
                real: true,
                conj: out.len(),
            });
        } else {
            placed[j] = true;
            let (up, _) = if centers[k].1.is_positive() { (k, j) } else { (j, k) };
            let (x, y) = (centers[up].0.clone(), centers[up].1.abs());
            let r = rads[up].clone();
            let i0 = out.len();
            out.push(CertifiedRoot { re: x.clone(), im: y.clone(), rad: r.clone(), prec, real: false, conj: i0 + 1 });
            out.push(CertifiedRoot { re: x, im: -y, rad: r, prec, real: false, conj: i0 });
        }
    }
    // the symmetrized disks still contain their roots; recheck disjointness
    for i in 0..d {
        for j in i + 1..d {
            let r = &out[i].rad + &out[j].rad;
            let a = (out[i].re.clone(), out[i].im.clone());
            let b = (out[j].re.clone(), out[j].im.clone());
            if dist2(&a, &b) <= &r * &r {
                return Err(exhausted("symmetrized disks overlap"));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn roots_of_x2_plus_1() {
        let r = certified_roots(&p(&[1, 0, 1]), 128).unwrap();
        assert_eq!(r.len(), 2);
        assert!(!r[0].real);
        let (a, b) = r[0].value();
        assert!(a.abs() < 1e-30 && (b - 1.0).abs() < 1e-30);
        assert!(r[0].radius() < 1e-30);
        assert_eq!(r[0].conj, 1);
    }

    #[test]
    fn golden_quadratic() {
        let r = certified_roots(&p(&[1, -3, 1]), 128).unwrap();
        assert!(r.iter().all(|x| x.real));
        let phi2 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((r[0].value().0 - 1.0 / phi2).abs() < 1e-15);
        assert!((r[1].value().0 - phi2).abs() < 1e-15);
        assert!(r[0].re.to_string().len() > 10);
    }

    #[test]
    fn skew_cubic_roots() {
        let r = certified_roots(&p(&[-1, 2, 3, 1]), 128).unwrap();
        let real: Vec<_> = r.iter().filter(|x| x.real).collect();
        assert_eq!(real.len(), 1);
        assert!((real[0].value().0 - 0.324717957).abs() < 1e-8);
        let pair = r.iter().find(|x| !x.real).unwrap();
        let (a, b) = pair.value();
        assert!((a + 1.662358978).abs() < 1e-8 && (b.abs() - 0.562279512).abs() < 1e-8);
        let (lo, hi) = pair.modulus_interval();
        assert!(lo <= 1.754877666246693 + 1e-15 && 1.754877666246693 - 1e-15 <= hi);
        assert!(hi - lo < 1e-12 && pair.radius() < 1e-30);
        // |pair|² · real = 1 from the constant term
        let prod = pair.value().0.powi(2) + pair.value().1.powi(2);
        assert!((prod * real[0].value().0 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radii_shrink_with_precision() {
        let q = p(&[-1, 2, 3, 1]);
        let a = certified_roots(&q, 128).unwrap();
        let b = certified_roots(&q, 256).unwrap();
        assert!(b[0].radius() < a[0].radius());
    }

    #[test]
    fn rejects_repeated_roots() {
        assert!(certified_roots(&p(&[1, -2, 1]), 128).is_err());
    }

    #[test]
    fn clustered_roots_need_more_bits() {
        // (x − 1)(x − 1 − 2⁻⁸⁰) scaled to integers
        let big: BigInt = BigInt::one() << 80u32;
        let q = IntPolynomial::new(vec![&big + 1u32, -(&big * 2u32 + 1u32), big.clone()]);
        let primitive = q.primitive();
        // non-monic is fine for root isolation
        assert!(certified_roots(&primitive, 64).is_err());
        assert_eq!(certified_roots_auto(&primitive, 64, 1024).unwrap().len(), 2);
    }
}
