//! Fixed-point ball arithmetic on BigInt.
//!
//! A [`Ball`] at precision `p` is the real interval
//! `[(mid − rad)·2⁻ᵖ, (mid + rad)·2⁻ᵖ]`. Every operation returns a ball that
//! contains the exact result for all inputs in the operand balls. Operands of a
//! binary operation must share the same precision.

use std::cmp::Ordering;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;

use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ball {
    pub mid: BigInt,
    pub rad: BigInt,
    pub prec: u32,
}

fn shr_round(x: &BigInt, s: u32) -> BigInt {
    if s == 0 {
        return x.clone();
    }
    let half = BigInt::one() << (s - 1);
    (x + half) >> s
}

fn shr_ceil_abs(x: &BigInt, s: u32) -> BigInt {
    // ceil(|x| / 2^s)
    let a = x.abs();
    let q: BigInt = &a >> s;
    if (&q << s) == a {
        q
    } else {
        q + 1
    }
}

impl Ball {
    pub fn exact_int(n: &BigInt, prec: u32) -> Self {
        Ball { mid: n << prec, rad: BigInt::zero(), prec }
    }

    pub fn from_i64(n: i64, prec: u32) -> Self {
        Self::exact_int(&BigInt::from(n), prec)
    }

    pub fn zero(prec: u32) -> Self {
        Ball { mid: BigInt::zero(), rad: BigInt::zero(), prec }
    }

    /// Encloses the exact binary value of `x`.
    pub fn from_f64(x: f64, prec: u32) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return Self::zero(prec);
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let m = BigInt::from(m) * sign;
        let shift = e + prec as i64;
        if shift >= 0 {
            Ball { mid: m << (shift as u32), rad: BigInt::zero(), prec }
        } else {
            let s = (-shift) as u32;
            Ball { mid: shr_round(&m, s), rad: BigInt::one(), prec }
        }
    }

    /// Encloses n / 2^k.
    pub fn dyadic(n: &BigInt, k: u32, prec: u32) -> Self {
        if k <= prec {
            Ball { mid: n << (prec - k), rad: BigInt::zero(), prec }
        } else {
            Ball { mid: shr_round(n, k - prec), rad: BigInt::one(), prec }
        }
    }

    /// Encloses the rational num / den.
    pub fn rational(num: &BigInt, den: &BigInt, prec: u32) -> Self {
        let scaled: BigInt = num << prec;
        let (q, r) = scaled.div_mod_floor(den);
        let rad = if r.is_zero() { BigInt::zero() } else { BigInt::one() };
        Ball { mid: q, rad, prec }
    }

    pub fn with_radius(mut self, extra: &BigInt) -> Self {
        self.rad += extra;
        self
    }

    pub fn midpoint(&self) -> Self {
        Ball { mid: self.mid.clone(), rad: BigInt::zero(), prec: self.prec }
    }

    pub fn lo(&self) -> BigInt {
        &self.mid - &self.rad
    }

    pub fn hi(&self) -> BigInt {
        &self.mid + &self.rad
    }

    pub fn add(&self, o: &Ball) -> Ball {
        debug_assert_eq!(self.prec, o.prec);
        Ball { mid: &self.mid + &o.mid, rad: &self.rad + &o.rad, prec: self.prec }
    }

    pub fn sub(&self, o: &Ball) -> Ball {
        debug_assert_eq!(self.prec, o.prec);
        Ball { mid: &self.mid - &o.mid, rad: &self.rad + &o.rad, prec: self.prec }
    }

    pub fn neg(&self) -> Ball {
        Ball { mid: -&self.mid, rad: self.rad.clone(), prec: self.prec }
    }

    pub fn mul(&self, o: &Ball) -> Ball {
        debug_assert_eq!(self.prec, o.prec);
        let p = self.prec;
        let prod = &self.mid * &o.mid;
        let mid = shr_round(&prod, p);
        let err = self.mid.abs() * &o.rad + o.mid.abs() * &self.rad + &self.rad * &o.rad;
        let rad = shr_ceil_abs(&err, p) + 1;
        let rad = if self.rad.is_zero() && o.rad.is_zero() && (&mid << p) == prod {
            BigInt::zero()
        } else {
            rad
        };
        Ball { mid, rad, prec: p }
    }

    pub fn mul_int(&self, n: &BigInt) -> Ball {
        Ball { mid: &self.mid * n, rad: &self.rad * n.abs(), prec: self.prec }
    }

    pub fn sqr(&self) -> Ball {
        let s = self.mul(self);
        // the square is nonnegative; clip the lower end at 0
        if s.lo().is_negative() {
            let hi = s.hi();
            let half = &hi >> 1u32;
            Ball { mid: half.clone(), rad: &hi - &half, prec: s.prec }
        } else {
            s
        }
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs() <= self.rad
    }

    pub fn is_positive(&self) -> bool {
        self.lo().is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi().is_negative()
    }

    /// Certainly less than `o`.
    pub fn lt(&self, o: &Ball) -> bool {
        self.hi() < o.lo()
    }

    pub fn overlaps(&self, o: &Ball) -> bool {
        !(self.lt(o) || o.lt(self))
    }

    /// 1/x for a ball bounded away from zero; outward-rounded endpoints.
    pub fn recip(&self) -> Option<Ball> {
        if self.contains_zero() {
            return None;
        }
        let p = self.prec;
        let num: BigInt = BigInt::one() << (2 * p);
        let (a, b) = (self.lo(), self.hi());
        // 1/x is decreasing on each side of zero: endpoints swap
        let lo = num.div_floor(&b);
        let hi = num.div_ceil(&a);
        Some(from_endpoints(lo, hi, p))
    }

    pub fn div(&self, o: &Ball) -> Option<Ball> {
        Some(self.mul(&o.recip()?))
    }

    /// Square root of the nonnegative part of the ball.
    pub fn sqrt(&self) -> Ball {
        let p = self.prec;
        let lo = self.lo().max(BigInt::zero());
        let hi = self.hi().max(BigInt::zero());
        let l: BigInt = (&lo << p).sqrt();
        let h: BigInt = (&hi << p).sqrt() + 1;
        from_endpoints(l, h, p)
    }

    /// Enclosing ball of |x|.
    pub fn abs(&self) -> Ball {
        if self.contains_zero() {
            let h = self.mid.abs() + &self.rad;
            let half = &h >> 1u32;
            Ball { mid: half.clone(), rad: &h - half, prec: self.prec }
        } else {
            Ball { mid: self.mid.abs(), rad: self.rad.clone(), prec: self.prec }
        }
    }

    /// Union hull of two balls.
    pub fn hull(&self, o: &Ball) -> Ball {
        let lo = self.lo().min(o.lo());
        let hi = self.hi().max(o.hi());
        from_endpoints(lo, hi, self.prec)
    }

    /// Change precision, widening as needed.
    pub fn to_prec(&self, q: u32) -> Ball {
        let p = self.prec;
        match q.cmp(&p) {
            Ordering::Equal => self.clone(),
            Ordering::Greater => Ball { mid: &self.mid << (q - p), rad: &self.rad << (q - p), prec: q },
            Ordering::Less => {
                let s = p - q;
                Ball { mid: shr_round(&self.mid, s), rad: shr_ceil_abs(&self.rad, s) + 1, prec: q }
            }
        }
    }

    /// Integers contained in the ball, if at most `max` of them.
    pub fn integers_inside(&self, max: usize) -> Option<Vec<BigInt>> {
        let p = self.prec;
        let one: BigInt = BigInt::one() << p;
        let lo = self.lo().div_ceil(&one);
        let hi = self.hi().div_floor(&one);
        if hi < lo {
            return Some(Vec::new());
        }
        let count = (&hi - &lo + 1u32).to_usize()?;
        if count > max {
            return None;
        }
        let mut v = Vec::with_capacity(count);
        let mut k = lo;
        while k <= hi {
            v.push(k.clone());
            k += 1;
        }
        Some(v)
    }

    /// Width of the ball in units of 2⁻ᵖ.
    pub fn width_log2(&self) -> f64 {
        crate::exact::bigint_log2(&(&self.rad * 2u32)) - self.prec as f64
    }

    pub fn to_f64(&self) -> f64 {
        fixed_to_f64(&self.mid, self.prec)
    }

    /// Upper bound of the radius as f64 (rounded up).
    pub fn rad_f64(&self) -> f64 {
        let r = fixed_to_f64(&self.rad, self.prec);
        if r == 0.0 && !self.rad.is_zero() {
            f64::MIN_POSITIVE
        } else {
            r * (1.0 + 4.0 * f64::EPSILON)
        }
    }

    pub fn lo_f64(&self) -> f64 {
        let v = fixed_to_f64(&self.lo(), self.prec);
        v - v.abs() * 4.0 * f64::EPSILON
    }

    pub fn hi_f64(&self) -> f64 {
        let v = fixed_to_f64(&self.hi(), self.prec);
        v + v.abs() * 4.0 * f64::EPSILON
    }

    /// Midpoint in decimal with `digits` fractional digits (truncated).
    pub fn to_decimal(&self, digits: usize) -> String {
        fixed_to_decimal(&self.mid, self.prec, digits)
    }
}

fn from_endpoints(lo: BigInt, hi: BigInt, prec: u32) -> Ball {
    let sum = &lo + &hi;
    let mid = sum.div_floor(&BigInt::from(2));
    let rad = (&hi - &mid).max(&mid - &lo);
    Ball { mid, rad, prec }
}

pub(crate) fn fixed_to_f64(x: &BigInt, prec: u32) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap_or(0.0) * 2f64.powi(-(prec as i32))
    } else {
        let s = (bits - 900) as u32;
        let top: BigInt = x >> s;
        top.to_f64().unwrap_or(0.0) * 2f64.powi(s as i32 - prec as i32)
    }
}

pub(crate) fn fixed_to_decimal(x: &BigInt, prec: u32, digits: usize) -> String {
    let neg = x.sign() == Sign::Minus;
    let scaled: BigInt = (x.abs() * BigInt::from(10u32).pow(digits as u32)) >> prec;
    let s = scaled.to_string();
    let s = if s.len() <= digits { format!("{}{}", "0".repeat(digits + 1 - s.len()), s) } else { s };
    let (int, frac) = s.split_at(s.len() - digits);
    let mut out = String::new();
    if neg && scaled.sign() != Sign::NoSign {
        out.push('-');
    }
    out.push_str(int);
    if digits > 0 {
        out.push('.');
        out.push_str(frac);
    }
    out
}

/// Complex ball as a rectangle of two real balls.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CBall {
    pub re: Ball,
    pub im: Ball,
}

impl CBall {
    pub fn new(re: Ball, im: Ball) -> Self {
        CBall { re, im }
    }

    pub fn real(re: Ball) -> Self {
        let p = re.prec;
        CBall { re, im: Ball::zero(p) }
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        CBall { re: Ball::from_f64(re, prec), im: Ball::from_f64(im, prec) }
    }

    pub fn zero(prec: u32) -> Self {
        CBall { re: Ball::zero(prec), im: Ball::zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        CBall::real(Ball::from_i64(1, prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec
    }

    pub fn midpoint(&self) -> Self {
        CBall { re: self.re.midpoint(), im: self.im.midpoint() }
    }

    pub fn add(&self, o: &CBall) -> CBall {
        CBall { re: self.re.add(&o.re), im: self.im.add(&o.im) }
    }

    pub fn sub(&self, o: &CBall) -> CBall {
        CBall { re: self.re.sub(&o.re), im: self.im.sub(&o.im) }
    }

    pub fn neg(&self) -> CBall {
        CBall { re: self.re.neg(), im: self.im.neg() }
    }

    pub fn conj(&self) -> CBall {
        CBall { re: self.re.clone(), im: self.im.neg() }
    }

    pub fn mul(&self, o: &CBall) -> CBall {
        let re = self.re.mul(&o.re).sub(&self.im.mul(&o.im));
        let im = self.re.mul(&o.im).add(&self.im.mul(&o.re));
        CBall { re, im }
    }

    pub fn mul_real(&self, r: &Ball) -> CBall {
        CBall { re: self.re.mul(r), im: self.im.mul(r) }
    }

    pub fn add_int(&self, n: &BigInt) -> CBall {
        let p = self.prec();
        CBall { re: self.re.add(&Ball::exact_int(n, p)), im: self.im.clone() }
    }

    pub fn mul_int(&self, n: &BigInt) -> CBall {
        CBall { re: self.re.mul_int(n), im: self.im.mul_int(n) }
    }

    pub fn abs_sq(&self) -> Ball {
        self.re.sqr().add(&self.im.sqr())
    }

    pub fn abs(&self) -> Ball {
        self.abs_sq().sqrt()
    }

    pub fn recip(&self) -> Option<CBall> {
        let n = self.abs_sq().recip()?;
        Some(self.conj().mul_real(&n))
    }

    pub fn div(&self, o: &CBall) -> Option<CBall> {
        Some(self.mul(&o.recip()?))
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    /// Add `r` (units of 2⁻ᵖ) to both radii.
    pub fn inflate(&self, r: &BigInt) -> CBall {
        CBall { re: self.re.clone().with_radius(r), im: self.im.clone().with_radius(r) }
    }

    pub fn to_prec(&self, q: u32) -> CBall {
        CBall { re: self.re.to_prec(q), im: self.im.to_prec(q) }
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

/// Horner evaluation of an integer polynomial (constant first) at a complex ball.
pub fn horner(coeffs: &[BigInt], z: &CBall) -> CBall {
    let p = z.prec();
    let mut acc = CBall::zero(p);
    for c in coeffs.iter().rev() {
        acc = acc.mul(z).add_int(c);
    }
    acc
}

/// Simultaneous Horner evaluation of p and p′.
pub fn horner_with_derivative(coeffs: &[BigInt], z: &CBall) -> (CBall, CBall) {
    let p = z.prec();
    let mut v = CBall::zero(p);
    let mut dv = CBall::zero(p);
    for c in coeffs.iter().rev() {
        dv = dv.mul(z).add(&v);
        v = v.mul(z).add_int(c);
    }
    (v, dv)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 96;

    #[test]
    fn sqrt_two_encloses() {
        let two = Ball::from_i64(2, P);
        let s = two.sqrt();
        let sq = s.mul(&s);
        assert!(sq.lo() <= two.mid && two.mid <= sq.hi());
        assert!((s.to_f64() - 2f64.sqrt()).abs() < 1e-15);
        assert!(s.width_log2() < -90.0);
    }

    #[test]
    fn recip_encloses() {
        let three = Ball::from_i64(3, P);
        let r = three.recip().unwrap();
        let one = r.mul(&three);
        let exact_one = Ball::from_i64(1, P);
        assert!(one.overlaps(&exact_one));
        assert!((r.to_f64() - 1.0 / 3.0).abs() < 1e-16);
        assert!(Ball::zero(P).with_radius(&BigInt::one()).recip().is_none());
    }

    #[test]
    fn f64_round_trip_and_decimal() {
        let b = Ball::from_f64(-1.25, P);
        assert!(b.rad.is_zero());
        assert_eq!(b.to_f64(), -1.25);
        assert_eq!(b.to_decimal(3), "-1.250");
        assert_eq!(Ball::from_f64(0.5, P).to_decimal(2), "0.50");
        let tiny = Ball::from_f64(1e-300, 64);
        assert!(tiny.contains_zero());
    }

    #[test]
    fn integers_inside_ball() {
        let b = Ball::rational(&BigInt::from(7), &BigInt::from(2), P).with_radius(&(BigInt::one() << (P - 1)));
        assert_eq!(b.integers_inside(4).unwrap(), vec![BigInt::from(3), BigInt::from(4)]);
        let c = Ball::rational(&BigInt::from(10), &BigInt::from(3), P);
        assert!(c.integers_inside(4).unwrap().is_empty());
    }

    #[test]
    fn complex_horner_at_i() {
        let i = CBall::new(Ball::zero(P), Ball::from_i64(1, P));
        let coeffs: Vec<BigInt> = [1, 0, 1].iter().map(|&c| BigInt::from(c)).collect();
        let (v, dv) = horner_with_derivative(&coeffs, &i);
        assert!(v.contains_zero());
        assert_eq!(dv.to_f64(), (0.0, 2.0));
    }
}
