//! Small f64 helpers on top of nalgebra.

use nalgebra::{DMatrix, Matrix2, Matrix3};

use crate::error::{Error, Result};

/// Operator-norm condition number σ_max/σ_min.
pub fn distortion(a: &DMatrix<f64>) -> Result<f64> {
    let sv = a.clone().svd(false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) || min <= max * 1e-300 {
        return Err(Error::Singular);
    }
    Ok(max / min)
}

pub fn distortion3(a: &Matrix3<f64>) -> Result<f64> {
    let sv = a.svd(false, false).singular_values;
    let (max, min) = (sv.max(), sv.min());
    if !(min > 0.0) {
        return Err(Error::Singular);
    }
    Ok(max / min)
}

pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    a.clone().svd(false, false).singular_values.iter().copied().fold(0.0, f64::max)
}

/// Rotation by angle 2πt: [[cos, sin], [−sin, cos]].
pub fn rot(t: f64) -> Matrix2<f64> {
    let (s, c) = (2.0 * std::f64::consts::PI * t).sin_cos();
    Matrix2::new(c, s, -s, c)
}

/// Distance from x to the nearest integer.
pub fn dist_to_z(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Ordinary least squares of y on x: (slope, stderr of slope, intercept).
pub fn ols(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let se = if n > 2 {
        let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some((slope, se, icpt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distortion_examples() {
        assert!((distortion(&DMatrix::identity(3, 3)).unwrap() - 1.0).abs() < 1e-15);
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 1.0, 0.5]));
        assert!((distortion(&d).unwrap() - 4.0).abs() < 1e-12);
        let r = rot(0.3137);
        let r = DMatrix::from_fn(2, 2, |i, j| r[(i, j)]);
        assert!((distortion(&r).unwrap() - 1.0).abs() < 1e-12);
        assert!(distortion(&DMatrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn ols_exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|t| 2.0 * t + 7f64.ln()).collect();
        let (s, se, c) = ols(&x, &y).unwrap();
        assert!((s - 2.0).abs() < 1e-12 && se < 1e-12 && (c - 7f64.ln()).abs() < 1e-12);
    }
}
