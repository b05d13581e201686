use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::polynomial::IntPolynomial;
use crate::error::{Error, Result};

/// Square matrix of arbitrary-precision integers, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::InvalidInput("matrix must have at least one row".into()));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::InvalidInput(format!(
                "matrix is not square: row {bad} has {} entries, expected {dim}",
                rows[bad].len()
            )));
        }
        Ok(Self { dim, entries: rows.into_iter().flatten().collect() })
    }

    pub fn from_i64_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&v| BigInt::from(v)).collect())
                .collect(),
        )
    }

    pub fn zero(dim: usize) -> Self {
        Self { dim, entries: vec![BigInt::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = BigInt::one();
        }
        m
    }

    /// Block-diagonal matrix with the given blocks along the diagonal.
    pub fn block_diag(blocks: &[&IntMatrix]) -> Self {
        let dim = blocks.iter().map(|b| b.dim).sum();
        let mut m = Self::zero(dim);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.dim {
                for j in 0..b.dim {
                    m.entries[(off + i) * dim + off + j] = b.get(i, j).clone();
                }
            }
            off += b.dim;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let d = self.dim;
        let mut m = Self::zero(d);
        for i in 0..d {
            for j in 0..d {
                m.entries[j * d + i] = self.get(i, j).clone();
            }
        }
        m
    }

    pub fn trace(&self) -> BigInt {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Exact Tr(AᵀA), the square of the Frobenius norm.
    pub fn frobenius_sq(&self) -> BigInt {
        self.entries.iter().map(|e| e * e).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().to_f64().unwrap_or(f64::INFINITY).sqrt()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let d = self.dim;
        let mut out = Self::zero(d);
        for i in 0..d {
            for k in 0..d {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        out.entries[i * d + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn sub(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect();
        Self { dim: self.dim, entries }
    }

    pub fn scale(&self, s: &BigInt) -> IntMatrix {
        Self { dim: self.dim, entries: self.entries.iter().map(|e| e * s).collect() }
    }

    pub fn add_scalar(&self, s: &BigInt) -> IntMatrix {
        let mut m = self.clone();
        for i in 0..self.dim {
            m.entries[i * self.dim + i] += s;
        }
        m
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| {
                self.entries[i * self.dim..(i + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| !a.is_zero())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    /// Exact determinant by Bareiss fraction-free elimination.
    pub fn det(&self) -> BigInt {
        let d = self.dim;
        let mut a = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if a[k][k].is_zero() {
                match (k + 1..d).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        sign * prev
    }

    /// Characteristic polynomial det(xI − A) together with the adjugate of A,
    /// both from the Faddeev–LeVerrier recurrence in exact integer arithmetic.
    pub fn char_poly_and_adjugate(&self) -> (IntPolynomial, IntMatrix) {
        let d = self.dim;
        let mut coeffs = vec![BigInt::zero(); d + 1];
        coeffs[d] = BigInt::one();
        let mut m = Self::zero(d);
        for k in 1..=d {
            // M_k = A M_{k-1} + c_{d-k+1} I
            m = self.mul(&m).add_scalar(&coeffs[d - k + 1]);
            let t = self.mul(&m).trace();
            let (q, r) = t.div_rem(&BigInt::from(k));
            debug_assert!(r.is_zero(), "Faddeev–LeVerrier division must be exact");
            coeffs[d - k] = -q;
        }
        let adj = if d % 2 == 1 { m } else { m.scale(&BigInt::from(-1)) };
        (IntPolynomial::new(coeffs), adj)
    }

    pub fn adjugate(&self) -> IntMatrix {
        self.char_poly_and_adjugate().1
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Exact inverse of a matrix with determinant ±1.
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let det = self.det();
        if !det.abs().is_one() {
            return Err(Error::NotUnimodular { det: det.to_string() });
        }
        Ok(self.adjugate().scale(&det))
    }

    /// Exact integer power; negative exponents require determinant ±1.
    pub fn pow(&self, n: i64) -> Result<IntMatrix> {
        let base = if n < 0 { self.inverse_unimodular()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = Self::identity(self.dim);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq);
            }
        }
        Ok(acc)
    }

    /// Solve A x = b exactly. Returns `(det, y)` with `x = y / det`; `None` if singular.
    pub fn solve_scaled(&self, b: &[BigInt]) -> Option<(BigInt, Vec<BigInt>)> {
        let d = self.dim;
        assert_eq!(b.len(), d);
        let mut a: Vec<Vec<BigInt>> = self
            .rows()
            .into_iter()
            .zip(b)
            .map(|(mut r, bi)| {
                r.push(bi.clone());
                r
            })
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if a[k][k].is_zero() {
                let r = (k + 1..d).find(|&r| !a[r][k].is_zero())?;
                a.swap(k, r);
                sign = -sign;
            }
            for i in k + 1..d {
                for j in k + 1..=d {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
                a[i][k] = BigInt::zero();
            }
            prev = a[k][k].clone();
        }
        let det_u = prev.clone();
        let mut y = vec![BigInt::zero(); d];
        for i in (0..d).rev() {
            let mut acc = &det_u * &a[i][d];
            for j in i + 1..d {
                acc -= &a[i][j] * &y[j];
            }
            let (q, r) = acc.div_rem(&a[i][i]);
            debug_assert!(r.is_zero());
            y[i] = q;
        }
        // The row swaps flip the sign of det but not the solution.
        let det = &sign * &det_u;
        if sign.is_negative() {
            y.iter_mut().for_each(|v| *v = -&*v);
        }
        Some((det, y))
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.dim)
            .map(|r| r.iter().map(|e| e.to_f64().unwrap_or(f64::NAN)).collect())
            .collect()
    }

    pub fn to_nalgebra(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dim, self.dim, |i, j| {
            self.get(i, j).to_f64().unwrap_or(f64::NAN)
        })
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        self.entries.chunks(self.dim).map(|r| r.iter().map(|e| e.to_i64()).collect()).collect()
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, row) in self.entries.chunks(self.dim).enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, e) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Serialized as an array of row arrays of decimal integer strings.
impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .entries
            .chunks(self.dim)
            .map(|r| r.iter().map(|e| e.to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

/// Accepts decimal strings or JSON integers as entries.
impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<IntLiteral>> = Vec::deserialize(d)?;
        IntMatrix::from_rows(rows.into_iter().map(|r| r.into_iter().map(|e| e.0).collect()).collect())
            .map_err(serde::de::Error::custom)
    }
}

pub(crate) struct IntLiteral(pub BigInt);

impl<'de> Deserialize<'de> for IntLiteral {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Lit {
            Int(i64),
            Str(String),
        }
        match Lit::deserialize(d)? {
            Lit::Int(v) => Ok(IntLiteral(BigInt::from(v))),
            Lit::Str(s) => s
                .trim()
                .parse::<BigInt>()
                .map(IntLiteral)
                .map_err(|_| serde::de::Error::custom(format!("not a decimal integer: {s:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn determinant_small_cases() {
        assert_eq!(m(&[&[2, 1], &[1, 1]]).det(), BigInt::from(1));
        assert_eq!(m(&[&[0, 1], &[1, 0]]).det(), BigInt::from(-1));
        assert_eq!(m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]).det(), BigInt::zero());
        assert_eq!(m(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 3]]).det(), BigInt::from(1));
    }

    #[test]
    fn powers_of_cat_map() {
        let cat = m(&[&[2, 1], &[1, 1]]);
        assert!(cat.pow(0).unwrap().is_identity());
        assert_eq!(cat.pow(2).unwrap(), m(&[&[5, 3], &[3, 2]]));
        assert_eq!(cat.pow(-1).unwrap(), m(&[&[1, -1], &[-1, 2]]));
        assert!(cat.pow(5).unwrap().mul(&cat.pow(-5).unwrap()).is_identity());
    }

    #[test]
    fn negative_power_needs_unimodular() {
        let a = m(&[&[2, 0], &[0, 1]]);
        assert!(matches!(a.pow(-1), Err(Error::NotUnimodular { .. })));
        assert_eq!(a.pow(3).unwrap(), m(&[&[8, 0], &[0, 1]]));
    }

    #[test]
    fn solve_scaled_matches_rational_solution() {
        let a = m(&[&[4, 3], &[3, 1]]);
        let (det, y) = a.solve_scaled(&[BigInt::from(1), BigInt::from(0)]).unwrap();
        // x = A^{-1} e1 = (1/-5) * (1, -3)
        assert_eq!(det, BigInt::from(-5));
        assert_eq!(y, vec![BigInt::from(1), BigInt::from(-3)]);
        let singular = m(&[&[1, 2], &[2, 4]]);
        assert!(singular.solve_scaled(&[BigInt::from(1), BigInt::from(1)]).is_none());
    }

    #[test]
    fn json_round_trip_uses_strings() {
        let a = m(&[&[2, -1], &[10, 7]]);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"[["2","-1"],["10","7"]]"#);
        let b: IntMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(a, b);
        let c: IntMatrix = serde_json::from_str("[[2,1],[1,1]]").unwrap();
        assert_eq!(c, m(&[&[2, 1], &[1, 1]]));
        assert!(serde_json::from_str::<IntMatrix>("[[1,2],[3]]").is_err());
    }
}
