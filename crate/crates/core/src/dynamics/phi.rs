use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::shadow::ItinerarySpec;
use super::TorusPoint;
use crate::error::{Error, Result};

/// Target sup-error of the analytic observable on the two balls.
pub const ANALYTIC_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhiMode {
    Smooth,
    Analytic,
}

/// C^∞ radial bump: amplitude on the closed ball of radius `radius`,
/// zero outside `outer`.
#[derive(Clone, Debug, Serialize)]
pub struct Bump {
    pub center: Vec<f64>,
    pub radius: f64,
    pub outer: f64,
    pub amplitude: [f64; 2],
}

fn smooth_step(u: f64) -> f64 {
    // 0 for u ≤ 0, 1 for u ≥ 1
    let f = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    let (a, b) = (f(u), f(1.0 - u));
    a / (a + b)
}

fn torus_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).rem_euclid(1.0);
            d.min(1.0 - d).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

impl Bump {
    pub fn profile(&self, y: &[f64]) -> f64 {
        let r = torus_dist(y, &self.center);
        if r <= self.radius {
            1.0
        } else if r >= self.outer {
            0.0
        } else {
            smooth_step((self.outer - r) / (self.outer - self.radius))
        }
    }
}

/// Σ_j a_j cos(2πj⟨k,y⟩) + b_j sin(2πj⟨k,y⟩) + constant, with 2-vector coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct RidgeSeries {
    pub k: Vec<i64>,
    pub constant: [f64; 2],
    pub cos: Vec<[f64; 2]>,
    pub sin: Vec<[f64; 2]>,
}

impl RidgeSeries {
    pub fn harmonics(&self) -> usize {
        self.cos.len()
    }

    pub fn phase(&self, y: &[f64]) -> f64 {
        self.k.iter().zip(y).map(|(&k, &x)| k as f64 * x).sum::<f64>().rem_euclid(1.0)
    }

    /// Value and d/dt at ridge coordinate t.
    pub fn eval_t(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let (s1, c1) = (2.0 * PI * t).sin_cos();
        let (mut s, mut c) = (s1, c1);
        let mut v = self.constant;
        let mut dv = [0.0; 2];
        for j in 0..self.cos.len() {
            let w = 2.0 * PI * (j + 1) as f64;
            for i in 0..2 {
                v[i] += self.cos[j][i] * c + self.sin[j][i] * s;
                dv[i] += w * (self.sin[j][i] * c - self.cos[j][i] * s);
            }
            let (sn, cn) = (s * c1 + c * s1, c * c1 - s * s1);
            s = sn;
            c = cn;
        }
        (v, dv)
    }

    pub fn eval(&self, y: &[f64]) -> [f64; 2] {
        self.eval_t(self.phase(y)).0
    }

    /// Jacobian row-by-row: ∂/∂y_i = k_i·d/dt.
    pub fn gradient(&self, y: &[f64]) -> [Vec<f64>; 2] {
        let (_, dv) = self.eval_t(self.phase(y));
        [self.k.iter().map(|&k| k as f64 * dv[0]).collect(), self.k.iter().map(|&k| k as f64 * dv[1]).collect()]
    }

    /// (frequency vector j·k, cosine coefficient, sine coefficient) for j ≥ 1.
    pub fn modes(&self) -> Vec<(Vec<i64>, [f64; 2], [f64; 2])> {
        (0..self.cos.len())
            .map(|j| (self.k.iter().map(|&k| k * (j as i64 + 1)).collect(), self.cos[j], self.sin[j]))
            .collect()
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PhiRepr {
    Smooth { bumps: Vec<Bump> },
    Analytic(RidgeSeries),
}

/// Observable equal to (1,0) on B₁ and (0,0) on B₂.
#[derive(Clone, Debug, Serialize)]
pub struct PhiFunction {
    pub mode: PhiMode,
    pub repr: PhiRepr,
    pub mean: [f64; 2],
    pub zero_mean: bool,
    /// Max deviation from the targets on the verification grid (0 for smooth mode).
    pub sup_error: f64,
}

impl PhiFunction {
    /// φ ≡ 0 on T^m.
    pub fn zero(m: usize) -> Self {
        let s = RidgeSeries { k: vec![0; m], constant: [0.0; 2], cos: Vec::new(), sin: Vec::new() };
        PhiFunction { mode: PhiMode::Analytic, repr: PhiRepr::Analytic(s), mean: [0.0; 2], zero_mean: true, sup_error: 0.0 }
    }

    pub fn eval(&self, y: &[f64]) -> [f64; 2] {
        match &self.repr {
            PhiRepr::Smooth { bumps } => bumps.iter().fold([0.0; 2], |acc, b| {
                let p = b.profile(y);
                [acc[0] + p * b.amplitude[0], acc[1] + p * b.amplitude[1]]
            }),
            PhiRepr::Analytic(s) => s.eval(y),
        }
    }

    pub fn series(&self) -> Option<&RidgeSeries> {
        match &self.repr {
            PhiRepr::Analytic(s) => Some(s),
            PhiRepr::Smooth { .. } => None,
        }
    }
}

fn lattice(m: usize, r: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * r + 1) as usize;
    (0..side.pow(m as u32)).map(move |mut c| {
        (0..m)
            .map(|_| {
                let v = (c % side) as i64 - r;
                c /= side;
                v
            })
            .collect()
    })
}

/// Gap left on the circle between the projections of the two balls along k.
pub fn ridge_gap(k: &[i64], x: [&[f64]; 2], radii: [f64; 2]) -> f64 {
    let kn = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
    let t = |p: &[f64]| k.iter().zip(p).map(|(&a, &b)| a as f64 * b).sum::<f64>();
    let d = crate::linalg::dist_to_z(t(x[0]) - t(x[1]));
    d - kn * (radii[0] + radii[1])
}

/// Best ridge direction in {−1,0,1}^m.
pub fn best_ridge(x: [&[f64]; 2], radii: [f64; 2]) -> (Vec<i64>, f64) {
    lattice(x[0].len(), 1)
        .filter(|k| k.iter().any(|&v| v != 0))
        .map(|k| {
            let g = ridge_gap(&k, x, radii);
            (k, g)
        })
        .fold((Vec::new(), f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

pub fn build_phi(mode: PhiMode, spec: &ItinerarySpec, zero_mean: bool) -> Result<PhiFunction> {
    build_phi_with_ridge(mode, spec, zero_mean, None)
}

pub fn build_phi_with_ridge(mode: PhiMode, spec: &ItinerarySpec, zero_mean: bool, ridge: Option<&[i64]>) -> Result<PhiFunction> {
    let [x1, x2] = &spec.fixed_points;
    let (c1, c2) = (x1.coords(), x2.coords());
    let sep = x1.dist(x2);
    if sep <= spec.radii[0] + spec.radii[1] {
        return Err(Error::Admissibility(format!("balls intersect: separation {sep:.4}")));
    }
    match mode {
        PhiMode::Smooth => smooth_phi(x1, x2, spec.radii, sep, zero_mean),
        PhiMode::Analytic => {
            let (k, gap) = match ridge {
                Some(k) => (k.to_vec(), ridge_gap(k, [&c1, &c2], spec.radii)),
                None => best_ridge([&c1, &c2], spec.radii),
            };
            if gap <= 0.0 {
                return Err(Error::Admissibility(format!("no ridge direction separates the balls (best gap {gap:.4})")));
            }
            analytic_phi(k, [&c1, &c2], spec.radii, zero_mean)
        }
    }
}

fn smooth_phi(x1: &TorusPoint, x2: &TorusPoint, radii: [f64; 2], sep: f64, zero_mean: bool) -> Result<PhiFunction> {
    let m = x1.dim();
    let r1 = radii[0];
    let slack = (sep - radii[0] - radii[1]) / r1;
    let grow = (0.5 * slack).min(0.5);
    let outer = r1 * (1.0 + grow);
    if outer >= 0.5 {
        return Err(Error::Admissibility("ball B₁ does not embed in the torus".into()));
    }
    let mut bumps = vec![Bump { center: x1.coords(), radius: r1, outer, amplitude: [1.0, 0.0] }];
    if zero_mean {
        // a negative bump of the same shape away from both balls carries the mass
        let q: i64 = if m <= 3 { 8 } else { 4 };
        let centers = [x1.coords(), x2.coords()];
        let reach = [outer, radii[1]];
        let (best, room) = lattice(m, q)
            .map(|g| g.iter().map(|&v| (v + q) as f64 / (2 * q + 1) as f64).collect::<Vec<f64>>())
            .map(|p| {
                let room = (0..2).map(|i| torus_dist(&p, &centers[i]) - reach[i]).fold(f64::INFINITY, f64::min);
                (p, room)
            })
            .fold((Vec::new(), f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        if room <= 0.0 {
            return Err(Error::Admissibility("no room for the compensating bump".into()));
        }
        let r3 = (0.9 * room / (1.0 + grow)).min(0.45 / (1.0 + grow));
        let a = (r1 / r3).powi(m as i32);
        bumps.push(Bump { center: best, radius: r3, outer: r3 * (1.0 + grow), amplitude: [-a, 0.0] });
    }
    let mean = if zero_mean { [0.0, 0.0] } else { [f64::NAN, 0.0] };
    let mut phi = PhiFunction { mode: PhiMode::Smooth, repr: PhiRepr::Smooth { bumps }, mean, zero_mean, sup_error: 0.0 };
    if !zero_mean {
        phi.mean = [smooth_mass(m, r1, outer), 0.0];
    }
    Ok(phi)
}

/// ∫ of the radial profile over R^m.
fn smooth_mass(m: usize, r: f64, outer: f64) -> f64 {
    let mf = m as f64;
    // surface area of the unit sphere S^{m−1}
    let gamma_half = |k: usize| -> f64 {
        // Γ(k/2)
        if k % 2 == 0 {
            (1..k / 2).map(|i| i as f64).product()
        } else {
            let mut g = PI.sqrt();
            let mut x = 0.5;
            while x < k as f64 / 2.0 - 0.25 {
                g *= x;
                x += 1.0;
            }
            g
        }
    };
    let area = 2.0 * PI.powf(mf / 2.0) / gamma_half(m);
    let steps = 4000;
    let h = (outer - r) / steps as f64;
    let mut shell = 0.0;
    for i in 0..=steps {
        let rho = r + i as f64 * h;
        let w = if i == 0 || i == steps { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        shell += w * smooth_step((outer - rho) / (outer - r)) * rho.powf(mf - 1.0);
    }
    area * (r.powf(mf) / mf + shell * h / 3.0)
}

/// Fourier coefficients (cos, sin) of the indicator of [a, a + len] smoothed by a
/// Gaussian of width s.
fn smoothed_arc(a: f64, len: f64, s: f64, j: usize) -> (f64, f64) {
    let jf = j as f64;
    let b = a + len;
    let damp = (-(PI * s * jf).powi(2)).exp();
    let cos = ((2.0 * PI * jf * b).sin() - (2.0 * PI * jf * a).sin()) / (PI * jf);
    let sin = ((2.0 * PI * jf * a).cos() - (2.0 * PI * jf * b).cos()) / (PI * jf);
    (cos * damp, sin * damp)
}

fn analytic_phi(k: Vec<i64>, x: [&[f64]; 2], radii: [f64; 2], zero_mean: bool) -> Result<PhiFunction> {
    let kn = k.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
    let t = |p: &[f64]| k.iter().zip(p).map(|(&a, &b)| a as f64 * b).sum::<f64>().rem_euclid(1.0);
    let (t1, t2) = (t(x[0]), t(x[1]));
    let (w1, w2) = (kn * radii[0], kn * radii[1]);
    // arcs between the projected balls, going forward from I₁ and from I₂
    let gap_a = (t2 - w2 - (t1 + w1)).rem_euclid(1.0);
    let gap_b = (t1 - w1 - (t2 + w2)).rem_euclid(1.0);
    let g = gap_a.min(gap_b);
    if g <= 0.0 || gap_a + gap_b >= 1.0 {
        return Err(Error::Admissibility("projected balls overlap on the circle".into()));
    }
    let delta = g / 4.0;
    let s = delta / 5.5;
    let harmonics = (6.5 / (PI * s)).ceil() as usize;
    let p1 = (t1 - w1 - delta, 2.0 * (w1 + delta));
    let p3 = if gap_a >= gap_b {
        (t1 + w1 + 2.0 * delta, gap_a - 3.0 * delta)
    } else {
        (t2 + w2 + delta, gap_b - 3.0 * delta)
    };
    let amp = if zero_mean { p1.1 / p3.1 } else { 0.0 };
    let mut cos = Vec::with_capacity(harmonics);
    let mut sin = Vec::with_capacity(harmonics);
    for j in 1..=harmonics {
        let (c1, s1) = smoothed_arc(p1.0, p1.1, s, j);
        let (c3, s3) = smoothed_arc(p3.0, p3.1, s, j);
        cos.push([c1 - amp * c3, 0.0]);
        sin.push([s1 - amp * s3, 0.0]);
    }
    let constant = if zero_mean { [0.0, 0.0] } else { [p1.1, 0.0] };
    let series = RidgeSeries { k, constant, cos, sin };

    // verification grid on both projected intervals
    let per = 64 * harmonics;
    let mut worst: f64 = 0.0;
    for (center, w, target) in [(t1, w1, 1.0), (t2, w2, 0.0)] {
        for i in 0..=per {
            let tt = center - w + 2.0 * w * i as f64 / per as f64;
            let (v, _) = series.eval_t(tt);
            worst = worst.max((v[0] - target).abs()).max(v[1].abs());
        }
    }
    if worst > ANALYTIC_TOLERANCE {
        return Err(Error::FitFailed { best_error: worst, target: ANALYTIC_TOLERANCE });
    }
    Ok(PhiFunction { mode: PhiMode::Analytic, mean: series.constant, repr: PhiRepr::Analytic(series), zero_mean, sup_error: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{itinerary_setup, SetupOptions};
    use crate::exact::cat_map;

    fn cat_spec() -> ItinerarySpec {
        itinerary_setup(&cat_map(), &SetupOptions::default()).unwrap().spec(vec![1, 2])
    }

    #[test]
    fn analytic_targets_on_the_balls() {
        let spec = cat_spec();
        let phi = build_phi(PhiMode::Analytic, &spec, true).unwrap();
        assert_eq!(phi.mean, [0.0, 0.0]);
        assert!(phi.sup_error <= 1e-8);
        let c1 = spec.fixed_points[0].coords();
        let c2 = spec.fixed_points[1].coords();
        let v1 = phi.eval(&c1);
        let v2 = phi.eval(&c2);
        assert!((v1[0] - 1.0).abs() < 1e-8 && v1[1] == 0.0);
        assert!(v2[0].abs() < 1e-8);
        // random points of both balls
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let dir: Vec<f64> = (0..2).map(|_| rng.gen::<f64>() - 0.5).collect();
            let n = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = spec.radii[0] * rng.gen::<f64>();
            let y1: Vec<f64> = c1.iter().zip(&dir).map(|(c, d)| c + r * d / n).collect();
            let y2: Vec<f64> = c2.iter().zip(&dir).map(|(c, d)| c + r * d / n).collect();
            assert!((phi.eval(&y1)[0] - 1.0).abs() < 1e-8);
            assert!(phi.eval(&y2)[0].abs() < 1e-8);
        }
        // numerical mean over a fine grid
        let s = phi.series().unwrap();
        let grid = 20_000;
        let mean: f64 = (0..grid).map(|i| s.eval_t(i as f64 / grid as f64).0[0]).sum::<f64>() / grid as f64;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn smooth_targets_are_exact() {
        let spec = cat_spec();
        for zm in [false, true] {
            let phi = build_phi(PhiMode::Smooth, &spec, zm).unwrap();
            assert_eq!(phi.eval(&spec.fixed_points[0].coords()), [1.0, 0.0]);
            assert_eq!(phi.eval(&spec.fixed_points[1].coords()), [0.0, 0.0]);
        }
        let phi = build_phi(PhiMode::Smooth, &spec, true).unwrap();
        // midpoint-rule mean on T²
        let n = 1000;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += phi.eval(&[(i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64])[0];
            }
        }
        assert!((acc / (n * n) as f64).abs() < 1e-4);
    }

    #[test]
    fn smooth_step_is_monotone() {
        let v: Vec<f64> = (0..=100).map(|i| smooth_step(i as f64 / 100.0)).collect();
        assert!(v.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(v[0], 0.0);
        assert_eq!(v[100], 1.0);
    }

    #[test]
    fn ridge_gradient_matches_difference() {
        let phi = build_phi(PhiMode::Analytic, &cat_spec(), true).unwrap();
        let s = phi.series().unwrap();
        let y = [0.3, 0.7];
        let g = s.gradient(&y);
        let h = 1e-6;
        for i in 0..2 {
            let mut yp = y;
            yp[i] += h;
            let mut ym = y;
            ym[i] -= h;
            let fd = (s.eval(&yp)[0] - s.eval(&ym)[0]) / (2.0 * h);
            assert!((fd - g[0][i]).abs() < 1e-4 * (1.0 + fd.abs()));
        }
    }
}
