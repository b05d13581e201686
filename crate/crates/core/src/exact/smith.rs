use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// Smith normal form `U · M · V = diag(d₁, …, d_n)` with U, V unimodular and
/// dᵢ | dᵢ₊₁, all dᵢ ≥ 0.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub diag: Vec<BigInt>,
}

pub fn smith_form(m: &IntMatrix) -> SmithForm {
    let n = m.dim();
    let mut a = m.rows();
    let mut u = IntMatrix::identity(n).rows();
    let mut v = IntMatrix::identity(n).rows();

    for t in 0..n {
        // choose the smallest nonzero entry in the trailing block as pivot
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..n {
                for j in t..n {
                    if !a[i][j].is_zero()
                        && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break;
            };
            a.swap(t, pi);
            u.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
            for row in v.iter_mut() {
                row.swap(t, pj);
            }

            let mut done = true;
            for i in t + 1..n {
                let q = a[i][t].div_floor(&a[t][t]);
                if !q.is_zero() {
                    row_axpy(&mut a, i, t, &q);
                    row_axpy(&mut u, i, t, &q);
                }
                if !a[i][t].is_zero() {
                    done = false;
                }
            }
            for j in t + 1..n {
                let q = a[t][j].div_floor(&a[t][t]);
                if !q.is_zero() {
                    col_axpy(&mut a, j, t, &q);
                    col_axpy(&mut v, j, t, &q);
                }
                if !a[t][j].is_zero() {
                    done = false;
                }
            }
            if !done {
                continue;
            }
            // divisibility: the pivot must divide every remaining entry
            let bad = (t + 1..n)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_multiple_of(&a[t][t]));
            match bad {
                Some((i, _)) => {
                    // add row i to row t and redo
                    let one = BigInt::from(-1);
                    row_axpy(&mut a, t, i, &one);
                    row_axpy(&mut u, t, i, &one);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -&*x;
            }
            for x in u[t].iter_mut() {
                *x = -&*x;
            }
        }
    }

    let diag = (0..n).map(|i| a[i][i].clone()).collect();
    SmithForm {
        u: IntMatrix::from_rows(u).expect("square"),
        v: IntMatrix::from_rows(v).expect("square"),
        diag,
    }
}

/// row_i ← row_i − q · row_t
fn row_axpy(a: &mut [Vec<BigInt>], i: usize, t: usize, q: &BigInt) {
    let src = a[t].clone();
    for (x, s) in a[i].iter_mut().zip(&src) {
        *x -= q * s;
    }
}

/// col_j ← col_j − q · col_t
fn col_axpy(a: &mut [Vec<BigInt>], j: usize, t: usize, q: &BigInt) {
    for row in a.iter_mut() {
        let s = row[t].clone();
        row[j] -= q * s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(m: &IntMatrix) -> SmithForm {
        let s = smith_form(m);
        let n = m.dim();
        let prod = s.u.mul(m).mul(&s.v);
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { s.diag[i].clone() } else { BigInt::zero() };
                assert_eq!(prod.get(i, j), &want, "U M V not diagonal for {m}");
            }
        }
        assert!(s.u.is_unimodular() && s.v.is_unimodular());
        for w in s.diag.windows(2) {
            assert!(w[0].is_zero() && w[1].is_zero() || w[1].is_multiple_of(&w[0]));
        }
        s
    }

    #[test]
    fn smith_of_cat_square_minus_identity() {
        let m = IntMatrix::from_i64_rows(&[[4, 3], [3, 1]]).unwrap();
        let s = check(&m);
        assert_eq!(s.diag, vec![BigInt::from(1), BigInt::from(5)]);
    }

    #[test]
    fn smith_divisibility_chain() {
        let m = IntMatrix::from_i64_rows(&[[2, 0, 0], [0, 3, 0], [0, 0, 4]]).unwrap();
        let s = check(&m);
        assert_eq!(s.diag, vec![BigInt::from(1), BigInt::from(2), BigInt::from(12)]);
        let z = IntMatrix::from_i64_rows(&[[0, 0], [0, 0]]).unwrap();
        check(&z);
        let r = IntMatrix::from_i64_rows(&[[6, 4, 2], [-3, 9, 12], [5, 5, 0]]).unwrap();
        check(&r);
    }
}
