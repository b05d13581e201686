use serde::{Deserialize, Serialize};

use crate::linalg::dist_to_z;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JMode {
    /// Continued-fraction denominators: dist(jβ, Z) → 0 along J.
    Smooth,
    /// All j with dist(jβ, Z) < 1/6, i.e. R_{−jβ}(1,0) within π/3 of (1,0).
    Analytic,
}

/// Index set J ⊂ [1, n_max] for rotation number β.
pub fn select_j(beta: f64, mode: JMode, n_max: u64) -> Vec<u64> {
    match mode {
        JMode::Analytic => (1..=n_max).filter(|&j| dist_to_z(j as f64 * beta) < 1.0 / 6.0).collect(),
        JMode::Smooth => convergent_denominators(beta, n_max),
    }
}

fn convergent_denominators(beta: f64, n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = beta.rem_euclid(1.0);
    let (mut q_prev, mut q) = (0u64, 1u64);
    loop {
        if q > n_max {
            break;
        }
        if out.last() != Some(&q) {
            out.push(q);
        }
        if x < 1e-12 {
            break;
        }
        let inv = 1.0 / x;
        let a = inv.floor();
        x = inv - a;
        let Some(next) = (a as u64).checked_mul(q).and_then(|v| v.checked_add(q_prev)) else { break };
        q_prev = q;
        q = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_mean_gives_fibonacci() {
        let beta = (5f64.sqrt() - 1.0) / 2.0;
        assert_eq!(select_j(beta, JMode::Smooth, 100), vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
        assert_eq!(select_j(0.618034, JMode::Smooth, 100), vec![1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
    }

    #[test]
    fn analytic_density_and_angle() {
        let beta = 0.4484;
        let j = select_j(beta, JMode::Analytic, 100_000);
        assert!((j.len() as f64 / 1e5 - 1.0 / 3.0).abs() < 0.01);
        for n in 1..=10_000u64 {
            let r = crate::linalg::rot(-(n as f64) * beta);
            let v = r * nalgebra::Vector2::new(1.0, 0.0);
            let angle = v[1].atan2(v[0]).abs();
            assert_eq!(angle < std::f64::consts::PI / 3.0, j.binary_search(&n).is_ok(), "j = {n}");
        }
    }
}
