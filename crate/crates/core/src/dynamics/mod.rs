//! Torus dynamics of integer automorphisms: exact orbits, periodic points,
//! shadowing, itineraries and the observable φ.

mod indices;
mod phi;
mod shadow;

pub use indices::{select_j, JMode};
pub use phi::{best_ridge, build_phi, build_phi_with_ridge, ridge_gap, Bump, PhiFunction, PhiMode, PhiRepr, RidgeSeries, ANALYTIC_TOLERANCE};
pub use shadow::{
    default_power, deviation_bound, itinerary_setup, projectors, realize_itinerary, shadow, shadowing_constant,
    Itinerary, ItinerarySetup, ItinerarySpec, PseudoOrbit, SetupOptions, Shadow,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact::{smith_form, IntMatrix};

/// p/q to f64 for arbitrarily large p and q.
pub(crate) fn ratio_to_f64(p: &BigInt, q: &BigInt) -> f64 {
    let s = q.bits().max(p.bits()).saturating_sub(1000);
    let s = s.max(q.bits().saturating_sub(62));
    let (a, b) = ((p >> s).to_f64().unwrap_or(f64::NAN), (q >> s).to_f64().unwrap_or(f64::NAN));
    a / b
}

/// Vector of rationals with a common positive denominator; a lift to R^m.
#[derive(Clone, Debug)]
pub struct RatVec {
    pub num: Vec<BigInt>,
    pub den: BigInt,
}

impl RatVec {
    pub fn zero(m: usize) -> Self {
        RatVec { num: vec![BigInt::zero(); m], den: BigInt::one() }
    }

    pub fn from_ints(v: &[i64]) -> Self {
        RatVec { num: v.iter().map(|&x| BigInt::from(x)).collect(), den: BigInt::one() }
    }

    pub fn dim(&self) -> usize {
        self.num.len()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|x| x.is_zero())
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.num.iter().map(|x| ratio_to_f64(x, &self.den)).collect()
    }

    pub fn norm(&self) -> f64 {
        self.to_f64().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn rescale(&self, den: &BigInt) -> Vec<BigInt> {
        let f = den / &self.den;
        self.num.iter().map(|x| x * &f).collect()
    }

    pub fn add(&self, o: &RatVec) -> RatVec {
        let den = self.den.lcm(&o.den);
        let (a, b) = (self.rescale(&den), o.rescale(&den));
        RatVec { num: a.iter().zip(&b).map(|(x, y)| x + y).collect(), den }
    }

    pub fn neg(&self) -> RatVec {
        RatVec { num: self.num.iter().map(|x| -x).collect(), den: self.den.clone() }
    }

    pub fn sub(&self, o: &RatVec) -> RatVec {
        self.add(&o.neg())
    }

    pub fn apply(&self, l: &IntMatrix) -> RatVec {
        RatVec { num: l.mul_vec(&self.num), den: self.den.clone() }
    }

    /// True iff every coordinate is an integer.
    pub fn is_integral(&self) -> bool {
        self.num.iter().all(|x| x.is_multiple_of(&self.den))
    }
}

/// A point of T^m = R^m/Z^m stored as exact rationals with a common denominator.
/// Numerators are kept in [0, den).
#[derive(Clone, Debug)]
pub struct TorusPoint {
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for TorusPoint {
    fn eq(&self, o: &Self) -> bool {
        self.num.len() == o.num.len() && self.num.iter().zip(&o.num).all(|(a, b)| a * &o.den == b * &self.den)
    }
}

impl Eq for TorusPoint {}

impl TorusPoint {
    pub fn new(num: Vec<BigInt>, den: BigInt) -> Result<Self> {
        if !den.is_positive() {
            return Err(Error::InvalidInput("denominator must be positive".into()));
        }
        Ok(TorusPoint { num: num.iter().map(|x| x.mod_floor(&den)).collect(), den }.reduced())
    }

    pub fn zero(m: usize) -> Self {
        TorusPoint { num: vec![BigInt::zero(); m], den: BigInt::one() }
    }

    /// From (p, q) pairs.
    pub fn from_ratios(c: &[(i64, i64)]) -> Result<Self> {
        let den = c.iter().fold(BigInt::one(), |acc, &(_, q)| acc.lcm(&BigInt::from(q)));
        if c.iter().any(|&(_, q)| q == 0) {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let num = c.iter().map(|&(p, q)| BigInt::from(p) * (&den / BigInt::from(q))).collect();
        Self::new(num, den.abs())
    }

    /// Nearest point of the 2^-bits grid.
    pub fn from_f64(coords: &[f64], bits: u32) -> Self {
        let den = BigInt::one() << bits;
        let num = coords
            .iter()
            .map(|&x| {
                let b = crate::ball::Ball::from_f64(x.rem_euclid(1.0), bits);
                b.mid.mod_floor(&den)
            })
            .collect();
        TorusPoint { num, den }
    }

    pub fn from_lift(v: &RatVec) -> Self {
        TorusPoint { num: v.num.iter().map(|x| x.mod_floor(&v.den)).collect(), den: v.den.clone() }
    }

    pub fn lift(&self) -> RatVec {
        RatVec { num: self.num.clone(), den: self.den.clone() }
    }

    fn reduced(mut self) -> Self {
        let g = self.num.iter().fold(self.den.clone(), |g, x| g.gcd(x));
        if !g.is_one() {
            self.num = self.num.iter().map(|x| x / &g).collect();
            self.den = &self.den / &g;
        }
        self
    }

    pub fn dim(&self) -> usize {
        self.num.len()
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coords(&self) -> Vec<f64> {
        self.num.iter().map(|x| ratio_to_f64(x, &self.den)).collect()
    }

    /// L·x mod 1, exact; the denominator is unchanged.
    pub fn apply(&self, l: &IntMatrix) -> TorusPoint {
        let y = l.mul_vec(&self.num);
        let num = if (&self.den & (&self.den - 1u32)).is_zero() {
            let mask = &self.den - 1u32;
            y.into_iter().map(|v| v & &mask).collect()
        } else {
            y.into_iter().map(|v| v.mod_floor(&self.den)).collect()
        };
        TorusPoint { num, den: self.den.clone() }
    }

    pub fn translate(&self, v: &RatVec) -> TorusPoint {
        TorusPoint::from_lift(&self.lift().add(v))
    }

    /// Representative of (other − self) mod 1 in [−1/2, 1/2)^m.
    pub fn displacement(&self, other: &TorusPoint) -> Vec<f64> {
        let den = &self.den * &other.den;
        let half = &den >> 1u32;
        self.num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| {
                let d = (b * &self.den - a * &other.den + &half).mod_floor(&den) - &half;
                ratio_to_f64(&d, &den)
            })
            .collect()
    }

    /// Flat-torus distance.
    pub fn dist(&self, other: &TorusPoint) -> f64 {
        self.displacement(other).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn is_fixed_by(&self, l: &IntMatrix) -> bool {
        self.apply(l) == *self
    }
}

impl Serialize for TorusPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TorusPoint", 3)?;
        st.serialize_field("coords", &self.coords())?;
        if self.den.bits() <= 128 {
            st.serialize_field("numerators", &self.num.iter().map(|x| x.to_string()).collect::<Vec<_>>())?;
            st.serialize_field("denominator", &self.den.to_string())?;
        } else {
            st.serialize_field("denominator_bits", &self.den.bits())?;
        }
        st.end()
    }
}

/// x₀, L x₀, …, Lⁿ x₀ (mod 1); backward through the exact inverse when n < 0.
pub fn orbit(l: &IntMatrix, x0: &TorusPoint, n: i64) -> Result<Vec<TorusPoint>> {
    if l.dim() != x0.dim() {
        return Err(Error::InvalidInput(format!("point of dimension {} for a {}×{} matrix", x0.dim(), l.dim(), l.dim())));
    }
    let step = if n >= 0 { l.clone() } else { l.inverse_unimodular()? };
    let mut out = Vec::with_capacity(n.unsigned_abs() as usize + 1);
    out.push(x0.clone());
    for _ in 0..n.unsigned_abs() {
        let next = out.last().expect("nonempty").apply(&step);
        out.push(next);
    }
    Ok(out)
}

fn power_minus_identity(l: &IntMatrix, n: u32) -> Result<IntMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("period must be positive".into()));
    }
    if !l.is_unimodular() {
        return Err(Error::NotUnimodular { det: l.det().to_string() });
    }
    let m = l.pow(n as i64)?;
    Ok(m.sub(&IntMatrix::identity(l.dim())))
}

/// Number of points with Lⁿx = x, |det(Lⁿ − I)|.
pub fn count_fixed(l: &IntMatrix, n: u32) -> Result<BigInt> {
    let d = power_minus_identity(l, n)?.det().abs();
    if d.is_zero() {
        return Err(Error::NotHyperbolic(format!("L^{n} has eigenvalue 1")));
    }
    Ok(d)
}

/// All x ∈ [0,1)^m with (Lⁿ − I)x ∈ Z^m, via the Smith form U(Lⁿ − I)V = D:
/// x = V·(w₁/d₁, …, w_m/d_m) with 0 ≤ wᵢ < dᵢ.
pub fn enumerate_fixed(l: &IntMatrix, n: u32) -> Result<Vec<TorusPoint>> {
    let count = count_fixed(l, n)?;
    if count > BigInt::from(10_000_000u64) {
        return Err(Error::BudgetExceeded(format!("{count} fixed points")));
    }
    let m = power_minus_identity(l, n)?;
    let snf = smith_form(&m);
    let dim = l.dim();
    let den = snf.diag.iter().fold(BigInt::one(), |a, d| a.lcm(d));
    let ds: Vec<u64> = snf.diag.iter().map(|d| d.to_u64().expect("bounded by count")).collect();
    let total: u64 = ds.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    let mut w = vec![0u64; dim];
    for _ in 0..total {
        let y: Vec<BigInt> = (0..dim).map(|i| BigInt::from(w[i]) * (&den / &snf.diag[i])).collect();
        out.push(TorusPoint::new(snf.v.mul_vec(&y), den.clone())?);
        for i in (0..dim).rev() {
            w[i] += 1;
            if w[i] < ds[i] {
                break;
            }
            w[i] = 0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::cat_map;

    #[test]
    fn cat_map_fixed_point_counts() {
        let cat = cat_map();
        let counts: Vec<BigInt> = (1..=4).map(|n| count_fixed(&cat, n).unwrap()).collect();
        assert_eq!(counts, [1, 5, 16, 45].map(BigInt::from).to_vec());
        for n in 1..=4 {
            let pts = enumerate_fixed(&cat, n).unwrap();
            assert_eq!(BigInt::from(pts.len()), counts[n as usize - 1]);
            assert!(pts.contains(&TorusPoint::zero(2)));
            let ln = cat.pow(n as i64).unwrap();
            assert!(pts.iter().all(|p| p.is_fixed_by(&ln)));
            for (i, p) in pts.iter().enumerate() {
                assert!(pts[i + 1..].iter().all(|q| q != p));
            }
        }
        let five = enumerate_fixed(&cat, 2).unwrap();
        assert!(five.iter().all(|p| *p.denominator() == 1.into() || *p.denominator() == 5.into()));
    }

    #[test]
    fn period_three_orbit() {
        let x = TorusPoint::from_ratios(&[(1, 2), (0, 1)]).unwrap();
        let o = orbit(&cat_map(), &x, 3).unwrap();
        assert_eq!(o[1], TorusPoint::from_ratios(&[(0, 1), (1, 2)]).unwrap());
        assert_eq!(o[2], TorusPoint::from_ratios(&[(1, 2), (1, 2)]).unwrap());
        assert_eq!(o[3], x);
        let back = orbit(&cat_map(), &o[3], -3).unwrap();
        assert_eq!(back[3], x);
        assert!(orbit(&cat_map(), &TorusPoint::zero(2), 5).unwrap().iter().all(|p| *p == TorusPoint::zero(2)));
    }

    #[test]
    fn non_hyperbolic_powers_rejected() {
        let u = IntMatrix::from_i64_rows(&[[1, 1], [0, 1]]).unwrap();
        assert!(matches!(count_fixed(&u, 1), Err(Error::NotHyperbolic(_))));
        let rot = IntMatrix::from_i64_rows(&[[0, -1], [1, 0]]).unwrap();
        assert!(count_fixed(&rot, 1).is_ok());
        assert!(count_fixed(&rot, 4).is_err());
    }

    #[test]
    fn displacement_wraps() {
        let a = TorusPoint::from_ratios(&[(1, 10), (9, 10)]).unwrap();
        let b = TorusPoint::from_ratios(&[(9, 10), (1, 10)]).unwrap();
        let d = a.displacement(&b);
        assert!((d[0] + 0.2).abs() < 1e-15 && (d[1] - 0.2).abs() < 1e-15);
        let x = TorusPoint::from_f64(&[0.25, -0.125], 64);
        assert_eq!(x, TorusPoint::from_ratios(&[(1, 4), (7, 8)]).unwrap());
    }
}
