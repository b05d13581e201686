//! Exact integer linear algebra and polynomial arithmetic.

mod matrix;
mod polynomial;
mod smith;

pub use matrix::IntMatrix;
pub use polynomial::{char_poly, companion, poly_gcd, IntPolynomial};
pub use smith::{smith_form, SmithForm};

pub(crate) use polynomial::bigint_log2;

use crate::error::Result;

/// Exact Mⁿ; negative n requires det M = ±1.
pub fn matrix_power(m: &IntMatrix, n: i64) -> Result<IntMatrix> {
    m.pow(n)
}

/// Cubic of the skew-product construction, x³ + 3x² + 2x − 1.
pub fn cubic_b() -> IntPolynomial {
    IntPolynomial::from_i64(&[-1, 2, 3, 1])
}

/// Sextic of the skew-product construction, x⁶ − 2x⁴ − 3x² − 1.
pub fn sextic_c() -> IntPolynomial {
    IntPolynomial::from_i64(&[-1, 0, -3, 0, -2, 0, 1])
}

pub fn cat_map() -> IntMatrix {
    IntMatrix::from_i64_rows(&[[2, 1], [1, 1]]).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn int_matrix(d: usize, range: i64) -> impl Strategy<Value = IntMatrix> {
        proptest::collection::vec(-range..=range, d * d).prop_map(move |v| {
            let rows: Vec<Vec<i64>> = v.chunks(d).map(|r| r.to_vec()).collect();
            IntMatrix::from_i64_rows(&rows).unwrap()
        })
    }

    proptest! {
        #[test]
        fn companion_round_trip(coeffs in proptest::collection::vec(-50i64..=50, 1..=12)) {
            let mut c: Vec<BigInt> = coeffs.into_iter().map(BigInt::from).collect();
            c.push(BigInt::from(1));
            let p = IntPolynomial::new(c);
            prop_assert_eq!(char_poly(&companion(&p).unwrap()), p);
        }

        #[test]
        fn det_matches_constant_term(m in (1usize..=5).prop_flat_map(|d| int_matrix(d, 9))) {
            let d = m.dim();
            let sign = if d % 2 == 0 { BigInt::from(1) } else { BigInt::from(-1) };
            prop_assert_eq!(m.det(), sign * char_poly(&m).coeff(0));
        }

        #[test]
        fn power_is_additive(m in int_matrix(3, 3), a in 0i64..6, b in 0i64..6) {
            prop_assert_eq!(
                matrix_power(&m, a + b).unwrap(),
                matrix_power(&m, a).unwrap().mul(&matrix_power(&m, b).unwrap())
            );
        }

        #[test]
        fn gcd_divides_inputs(
            a in proptest::collection::vec(-6i64..=6, 1..=5),
            b in proptest::collection::vec(-6i64..=6, 1..=5),
            c in proptest::collection::vec(-6i64..=6, 1..=4),
        ) {
            let common = IntPolynomial::from_i64(&c);
            prop_assume!(!common.is_zero());
            let p = IntPolynomial::from_i64(&a).mul(&common);
            let q = IntPolynomial::from_i64(&b).mul(&common);
            prop_assume!(!p.is_zero() && !q.is_zero());
            let g = poly_gcd(&p, &q);
            prop_assert!(p.div_exact(&g).is_some());
            prop_assert!(q.div_exact(&g).is_some());
            prop_assert!(g.deg() >= common.deg());
        }
    }

    #[test]
    fn construction_polynomials_have_unimodular_companions() {
        assert_eq!(companion(&cubic_b()).unwrap().det(), BigInt::from(1));
        // even degree with constant term −1: the product of the roots is −1
        assert_eq!(companion(&sextic_c()).unwrap().det(), BigInt::from(-1));
    }
}
