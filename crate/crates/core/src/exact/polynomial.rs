use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::{IntLiteral, IntMatrix};
use crate::error::{Error, Result};

/// Dense univariate polynomial over Z, coefficients stored constant term first.
///
/// The zero polynomial has an empty coefficient list. Most operations of the
/// crate expect monic inputs (characteristic polynomials); gcds and factors are
/// returned as primitive polynomials with positive leading coefficient.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntPolynomial {
    coeffs: Vec<BigInt>,
}

impl IntPolynomial {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Builds a monic polynomial of positive degree, rejecting anything else.
    pub fn monic(coeffs: Vec<BigInt>) -> Result<Self> {
        let p = Self::new(coeffs);
        if p.degree().unwrap_or(0) == 0 {
            return Err(Error::InvalidInput("polynomial must have positive degree".into()));
        }
        if !p.is_monic() {
            return Err(Error::NotMonic { lead: p.lead().to_string() });
        }
        Ok(p)
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Self {
        Self::new(vec![c])
    }

    /// x − a
    pub fn linear_root(a: BigInt) -> Self {
        Self::new(vec![-a, BigInt::one()])
    }

    pub fn x_pow(n: usize) -> Self {
        let mut c = vec![BigInt::zero(); n + 1];
        c[n] = BigInt::one();
        Self { coeffs: c }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn deg(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn lead(&self) -> BigInt {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().is_some_and(|c| c.is_one())
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_i64(&self, x: i64) -> BigInt {
        self.eval(&BigInt::from(x))
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    /// Evaluate at a square matrix by Horner's rule, exactly.
    pub fn eval_matrix(&self, m: &IntMatrix) -> IntMatrix {
        let mut acc = IntMatrix::zero(m.dim());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(m).add_scalar(c);
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }

    /// xᵈ p(1/x) for d = deg p.
    pub fn reverse(&self) -> Self {
        Self::new(self.coeffs.iter().rev().cloned().collect())
    }

    /// p(−x)
    pub fn negate_var(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
                .collect(),
        )
    }

    /// p(x²)
    pub fn compose_square(&self) -> Self {
        let mut c = vec![BigInt::zero(); 2 * self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            c[2 * i] = a.clone();
        }
        Self::new(c)
    }

    /// q with p(x) = q(x²), if p is even.
    pub fn even_part_in_square(&self) -> Option<Self> {
        if self.coeffs.iter().skip(1).step_by(2).any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::new(self.coeffs.iter().step_by(2).cloned().collect()))
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::new((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn neg(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![BigInt::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::new(c)
    }

    pub fn scale(&self, s: &BigInt) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc.mul(self))
    }

    /// Nonnegative gcd of the coefficients.
    pub fn content(&self) -> BigInt {
        self.coeffs.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Primitive part with positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut g = self.content();
        if self.lead().is_negative() {
            g = -g;
        }
        Self::new(self.coeffs.iter().map(|c| c / &g).collect())
    }

    /// Pseudo-remainder: lc(d)^(deg p − deg d + 1) · p mod d.
    pub fn pseudo_rem(&self, d: &Self) -> Self {
        assert!(!d.is_zero(), "division by zero polynomial");
        let dd = d.deg();
        let lc = d.lead();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return self.clone();
        }
        let steps = r.len() - dd;
        for _ in 0..steps {
            let k = r.len() - 1;
            let t = r[k].clone();
            for c in r.iter_mut() {
                *c *= &lc;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k - dd + j] -= &t * dc;
            }
            r.pop();
        }
        Self::new(r)
    }

    /// Quotient over Z if `d` divides `self` exactly with integer quotient.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero());
        }
        let dd = d.deg();
        if self.deg() < dd {
            return None;
        }
        let lc = d.lead();
        let mut r = self.coeffs.clone();
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for k in (dd..r.len()).rev() {
            if r[k].is_zero() {
                continue;
            }
            let (t, rem) = r[k].div_rem(&lc);
            if !rem.is_zero() {
                return None;
            }
            for (j, dc) in d.coeffs.iter().enumerate() {
                r[k - dd + j] -= &t * dc;
            }
            q[k - dd] = t;
        }
        if r.iter().any(|c| !c.is_zero()) {
            return None;
        }
        Some(Self::new(q))
    }

    pub fn divides(&self, p: &Self) -> bool {
        p.primitive().div_exact(&self.primitive()).is_some()
    }

    /// Square-free decomposition: primitive a₁, a₂, … with p = c · ∏ aᵢ^i.
    /// Entries may be 1; trailing ones are dropped.
    pub fn squarefree_decomposition(&self) -> Vec<Self> {
        let p = self.primitive();
        if p.deg() == 0 {
            return Vec::new();
        }
        let mut rest = poly_gcd(&p, &p.derivative());
        let mut w = p.div_exact(&rest).expect("gcd divides p").primitive();
        let mut out = Vec::new();
        while w.deg() > 0 {
            let y = poly_gcd(&w, &rest);
            out.push(w.div_exact(&y).expect("gcd divides w").primitive());
            rest = rest.div_exact(&y).expect("gcd divides rest").primitive();
            w = y;
        }
        while out.last().is_some_and(|f| f.deg() == 0) {
            out.pop();
        }
        out
    }

    /// Product of the distinct irreducible factors, primitive.
    pub fn squarefree_part(&self) -> Self {
        let p = self.primitive();
        if p.deg() == 0 {
            return p;
        }
        let g = poly_gcd(&p, &p.derivative());
        p.div_exact(&g).expect("gcd divides p").primitive()
    }

    pub fn is_squarefree(&self) -> bool {
        self.deg() <= 1 || poly_gcd(self, &self.derivative()).deg() == 0
    }

    /// Cauchy bound: every complex root satisfies |z| < 1 + max |aᵢ/a_d|.
    pub fn root_bound(&self) -> f64 {
        let lead = self.lead().abs().to_f64().unwrap_or(f64::INFINITY);
        let m = self.coeffs[..self.coeffs.len().saturating_sub(1)]
            .iter()
            .map(|c| c.abs().to_f64().unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max);
        1.0 + m / lead
    }

    /// Upper bound on log2 of any coefficient of any monic divisor of p over Z,
    /// from the Mignotte bound binom(d, k) · ‖p‖₂.
    pub fn mignotte_log2(&self) -> f64 {
        let d = self.deg();
        let norm2: BigInt = self.coeffs.iter().map(|c| c * c).sum();
        let log_norm = 0.5 * bigint_log2(&norm2);
        let log_binom = (0..=d).map(|k| log2_binom(d, k)).fold(0.0, f64::max);
        log_norm + log_binom
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect()
    }
}

pub(crate) fn bigint_log2(n: &BigInt) -> f64 {
    if n.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = n.bits();
    if bits < 1000 {
        n.abs().to_f64().unwrap().log2()
    } else {
        let shift = bits - 60;
        let top: BigInt = n.abs() >> shift;
        top.to_f64().unwrap().log2() + shift as f64
    }
}

fn log2_binom(n: usize, k: usize) -> f64 {
    (1..=k).map(|i| ((n + 1 - i) as f64 / i as f64).log2()).sum()
}

/// Primitive gcd over Q by the primitive polynomial remainder sequence.
/// gcd(0, 0) is 0; otherwise the result is primitive with positive leading coefficient.
pub fn poly_gcd(p: &IntPolynomial, q: &IntPolynomial) -> IntPolynomial {
    let (mut a, mut b) = (p.primitive(), q.primitive());
    if a.deg() < b.deg() || a.is_zero() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_zero() {
        let r = a.pseudo_rem(&b);
        a = b;
        b = r.primitive();
    }
    a.primitive()
}

/// Companion matrix with ones on the superdiagonal and last row −a₀, …, −a_{d−1}.
/// Its right eigenvector for a root λ is (1, λ, …, λ^{d−1}).
pub fn companion(p: &IntPolynomial) -> Result<IntMatrix> {
    if !p.is_monic() {
        return Err(Error::NotMonic { lead: p.lead().to_string() });
    }
    let d = p.deg();
    if d == 0 {
        return Err(Error::InvalidInput("companion matrix needs degree ≥ 1".into()));
    }
    let mut m = IntMatrix::zero(d);
    for i in 0..d - 1 {
        m.set(i, i + 1, BigInt::one());
    }
    for j in 0..d {
        m.set(d - 1, j, -p.coeff(j));
    }
    Ok(m)
}

/// det(xI − M), exact.
pub fn char_poly(m: &IntMatrix) -> IntPolynomial {
    m.char_poly_and_adjugate().0
}

impl fmt::Display for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let show_coeff = i == 0 || !a.is_one();
            if show_coeff {
                write!(f, "{a}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for IntPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for IntPolynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let c: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        c.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntPolynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c: Vec<IntLiteral> = Vec::deserialize(d)?;
        Ok(IntPolynomial::new(c.into_iter().map(|l| l.0).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> IntPolynomial {
        IntPolynomial::from_i64(c)
    }

    #[test]
    fn char_poly_examples() {
        assert_eq!(char_poly(&IntMatrix::identity(2)), p(&[1, -2, 1]));
        let cat = IntMatrix::from_i64_rows(&[[2, 1], [1, 1]]).unwrap();
        assert_eq!(char_poly(&cat), p(&[1, -3, 1]));
        let cubic = p(&[-1, 2, 3, 1]);
        let b = companion(&cubic).unwrap();
        assert_eq!(char_poly(&b), cubic);
        assert_eq!(b.det(), BigInt::one());
    }

    #[test]
    fn companion_convention() {
        assert_eq!(companion(&p(&[-1, 1])).unwrap(), IntMatrix::from_i64_rows(&[[1]]).unwrap());
        assert_eq!(
            companion(&p(&[1, -3, 1])).unwrap(),
            IntMatrix::from_i64_rows(&[[0, 1], [-1, 3]]).unwrap()
        );
        assert!(matches!(companion(&p(&[1, 2])), Err(Error::NotMonic { .. })));
    }

    #[test]
    fn cayley_hamilton_on_a_3x3() {
        let m = IntMatrix::from_i64_rows(&[[3, -1, 4], [1, 5, -9], [2, 6, 5]]).unwrap();
        assert_eq!(char_poly(&m).eval_matrix(&m), IntMatrix::zero(3));
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(poly_gcd(&p(&[-1, 0, 1]), &p(&[-1, 1])), p(&[-1, 1]));
        let q = p(&[1, -3, 1]);
        assert_eq!(poly_gcd(&q, &q.reverse()), q);
        assert_eq!(poly_gcd(&p(&[1, 0, 1]), &p(&[-2, 0, 1])), p(&[1]));
        assert_eq!(poly_gcd(&p(&[6, 6]), &p(&[0, 4, 4])), p(&[1, 1]));
    }

    #[test]
    fn squarefree_decomposition_separates_multiplicities() {
        // (x − 1)(x + 2)²(x² + 1)³
        let f = p(&[-1, 1])
            .mul(&p(&[2, 1]).pow(2))
            .mul(&p(&[1, 0, 1]).pow(3));
        let dec = f.squarefree_decomposition();
        assert_eq!(dec, vec![p(&[-1, 1]), p(&[2, 1]), p(&[1, 0, 1])]);
        assert_eq!(f.squarefree_part(), p(&[-1, 1]).mul(&p(&[2, 1])).mul(&p(&[1, 0, 1])));
        assert!(!f.is_squarefree());
        assert!(p(&[1, -3, 1]).is_squarefree());
        assert_eq!(p(&[1, 0, -2, 0, 1]).squarefree_decomposition(), vec![p(&[1]), p(&[-1, 0, 1])]);
    }

    #[test]
    fn exact_division() {
        let f = p(&[-1, 0, 1]);
        assert_eq!(f.div_exact(&p(&[1, 1])), Some(p(&[-1, 1])));
        assert_eq!(f.div_exact(&p(&[1, 2])), None);
        assert_eq!(p(&[2, 4]).div_exact(&p(&[1, 2])), Some(p(&[2])));
    }

    #[test]
    fn sextic_is_reversed_cubic_in_x_squared() {
        let cubic = p(&[-1, 2, 3, 1]);
        let sextic = p(&[-1, 0, -3, 0, -2, 0, 1]);
        let in_y = sextic.even_part_in_square().unwrap();
        assert_eq!(in_y, p(&[-1, -3, -2, 1]));
        assert_eq!(in_y, cubic.reverse().neg());
        assert_eq!(in_y.compose_square(), sextic);
    }

    #[test]
    fn display_and_json() {
        assert_eq!(p(&[1, -3, 1]).to_string(), "x^2 - 3x + 1");
        assert_eq!(p(&[-1, 2, 3, 1]).to_string(), "x^3 + 3x^2 + 2x - 1");
        let s = serde_json::to_string(&p(&[1, -3, 1])).unwrap();
        assert_eq!(s, r#"["1","-3","1"]"#);
        let back: IntPolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p(&[1, -3, 1]));
    }
}
