//! The rotation–shear cocycle over a hyperbolic toral automorphism, its
//! distortion along orbits, and the A.3 skew product built on the cubic/sextic pair.

mod skew;

pub use skew::{
    a3_experiment, a3_observable, build_bc, eigenspace_orthogonal, skew_distortion_experiment, solve_cohomological, A3Experiment, A3Observable, A3Options,
    BcConstruction, Cohomology, SkewPeriodicReport, SkewSystem,
};

use nalgebra::{Complex, Matrix3, Vector2};
use serde::Serialize;

use crate::dynamics::{
    enumerate_fixed, itinerary_setup, orbit, realize_itinerary, select_j, build_phi_with_ridge, Itinerary, ItinerarySetup, JMode,
    PhiFunction, PhiMode, SetupOptions, TorusPoint,
};
use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::linalg::{distortion3, dist_to_z, ols, rot};

/// The generator x ↦ [[R_β, εφ(x)], [0, 1]] over f = L^N.
#[derive(Clone, Debug)]
pub struct RotShearCocycle {
    pub beta: f64,
    pub epsilon: f64,
    pub phi: PhiFunction,
    pub base: IntMatrix,
    pub power: u32,
    map: IntMatrix,
}

impl RotShearCocycle {
    pub fn new(base: IntMatrix, power: u32, beta: f64, epsilon: f64, phi: PhiFunction) -> Result<Self> {
        if power == 0 {
            return Err(Error::InvalidInput("power must be positive".into()));
        }
        if !base.is_unimodular() {
            return Err(Error::NotUnimodular { det: base.det().to_string() });
        }
        let map = base.pow(power as i64)?;
        Ok(RotShearCocycle { beta, epsilon, phi, base, power, map })
    }

    /// f = L^N.
    pub fn map(&self) -> &IntMatrix {
        &self.map
    }

    pub fn generator(&self, y: &[f64]) -> Matrix3<f64> {
        generator(self.beta, self.epsilon, self.phi.eval(y))
    }

    /// x, f x, …, f^{n−1} x rounded to f64 from the exact orbit.
    pub fn orbit_coords(&self, x: &TorusPoint, n: usize) -> Result<Vec<Vec<f64>>> {
        if n == 0 {
            return Ok(Vec::new());
        }
        Ok(orbit(&self.map, x, n as i64 - 1)?.iter().map(TorusPoint::coords).collect())
    }

    /// Aⁿ(x) = A(f^{n−1}x)···A(x), multiplied out.
    pub fn product(&self, x: &TorusPoint, n: usize) -> Result<Matrix3<f64>> {
        let pts = self.orbit_coords(x, n)?;
        Ok(pts.iter().fold(Matrix3::identity(), |acc, y| self.generator(y) * acc))
    }

    /// φ̃ₙ(x) = Σ_{j<n} R_{(n−1−j)β} φ(f^j x).
    pub fn twisted_sum(&self, x: &TorusPoint, n: usize) -> Result<[f64; 2]> {
        let vals: Vec<[f64; 2]> = self.orbit_coords(x, n)?.iter().map(|y| self.phi.eval(y)).collect();
        let mut acc = Vector2::zeros();
        for (j, v) in vals.iter().enumerate() {
            acc += rot(-frac_mul(j as u64 + 1, self.beta)) * Vector2::new(v[0], v[1]);
        }
        let s = rot(frac_mul(n as u64, self.beta)) * acc;
        Ok([s[0], s[1]])
    }

    /// [[R_{nβ}, εφ̃ₙ(x)], [0, 1]].
    pub fn closed_form(&self, x: &TorusPoint, n: usize) -> Result<Matrix3<f64>> {
        Ok(closed(self.beta, self.epsilon, n as u64, self.twisted_sum(x, n)?))
    }
}

fn frac_mul(n: u64, beta: f64) -> f64 {
    let b = beta.rem_euclid(1.0);
    (n as f64 * b).rem_euclid(1.0)
}

fn generator(beta: f64, eps: f64, phi: [f64; 2]) -> Matrix3<f64> {
    let r = rot(beta);
    Matrix3::new(r[(0, 0)], r[(0, 1)], eps * phi[0], r[(1, 0)], r[(1, 1)], eps * phi[1], 0.0, 0.0, 1.0)
}

fn closed(beta: f64, eps: f64, n: u64, s: [f64; 2]) -> Matrix3<f64> {
    let r = rot(frac_mul(n, beta));
    Matrix3::new(r[(0, 0)], r[(0, 1)], eps * s[0], r[(1, 0)], r[(1, 1)], eps * s[1], 0.0, 0.0, 1.0)
}

fn max_abs(m: &Matrix3<f64>) -> f64 {
    m.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Largest entrywise gap between the iterated product and the closed form over 1 ≤ n ≤ n_max.
pub fn dual_path_error(c: &RotShearCocycle, x: &TorusPoint, n_max: usize) -> Result<f64> {
    let vals: Vec<[f64; 2]> = c.orbit_coords(x, n_max)?.iter().map(|y| c.phi.eval(y)).collect();
    let mut prod = Matrix3::identity();
    let mut acc = Vector2::zeros();
    let mut worst: f64 = 0.0;
    for (j, v) in vals.iter().enumerate() {
        prod = generator(c.beta, c.epsilon, *v) * prod;
        acc += rot(-frac_mul(j as u64 + 1, c.beta)) * Vector2::new(v[0], v[1]);
        let n = j as u64 + 1;
        let s = rot(frac_mul(n, c.beta)) * acc;
        worst = worst.max(max_abs(&(prod - closed(c.beta, c.epsilon, n, [s[0], s[1]]))));
    }
    Ok(worst)
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicReport {
    pub point: Vec<f64>,
    pub period: u32,
    /// (re, im) of the eigenvalues of the return product.
    pub eigenvalues: Vec<[f64; 2]>,
    pub moduli: Vec<f64>,
    pub max_modulus_error: f64,
    /// ‖e^{2πinβ} − e^{−2πinβ}‖-type separation: dist(2nβ, Z).
    pub rotation_separation: f64,
    pub distinct: bool,
    /// K of the Euclidean distortion of the return product.
    pub return_distortion: f64,
    /// K(Q) for the Q conjugating the return product to block-diag(R_{nβ}, 1).
    pub conjugator_distortion: f64,
}

/// Return product at an fⁿ-periodic point and its conformality data.
pub fn periodic_conformality(c: &RotShearCocycle, p: &TorusPoint, n: u32) -> Result<PeriodicReport> {
    let fnp = c.map.pow(n as i64)?;
    if n == 0 || !p.is_fixed_by(&fnp) {
        return Err(Error::NotPeriodic { period: n as usize });
    }
    let m = c.product(p, n as usize)?;
    let ev: Vec<Complex<f64>> = m.complex_eigenvalues().iter().copied().collect();
    let moduli: Vec<f64> = ev.iter().map(|z| z.norm()).collect();
    let max_modulus_error = moduli.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let rotation_separation = dist_to_z(2.0 * frac_mul(n as u64, c.beta));
    let distinct = rotation_separation > 1e-9;
    // Q = [[I, w], [0, 1]] with (I − R) w = s
    let s = Vector2::new(m[(0, 2)], m[(1, 2)]);
    let r = m.fixed_view::<2, 2>(0, 0).into_owned();
    let conjugator_distortion = match (nalgebra::Matrix2::identity() - r).try_inverse() {
        Some(inv) if distinct => {
            let w = inv * s;
            let q = Matrix3::new(1.0, 0.0, w[0], 0.0, 1.0, w[1], 0.0, 0.0, 1.0);
            distortion3(&q)?
        }
        _ => f64::INFINITY,
    };
    Ok(PeriodicReport {
        point: p.coords(),
        period: n,
        eigenvalues: ev.iter().map(|z| [z.re, z.im]).collect(),
        moduli,
        max_modulus_error,
        rotation_separation,
        distinct,
        return_distortion: distortion3(&m)?,
        conjugator_distortion,
    })
}

/// Smallest dist(2nβ, Z) over 1 ≤ n ≤ n_max: positive iff all return products
/// up to that period have three distinct eigenvalues.
pub fn min_rotation_separation(beta: f64, n_max: u64) -> f64 {
    (1..=n_max).map(|n| dist_to_z(2.0 * frac_mul(n, beta))).fold(f64::INFINITY, f64::min)
}

/// The fⁿ-fixed points of f = L^N over periods 1, 2, … until at least `want` are found.
pub fn periodic_points(c: &RotShearCocycle, want: usize, max_period: u32) -> Result<Vec<(TorusPoint, u32)>> {
    let mut out = Vec::new();
    for n in 1..=max_period {
        let pts = enumerate_fixed(&c.map, n)?;
        for p in pts {
            if out.len() >= want {
                return Ok(out);
            }
            out.push((p, n));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceRow {
    pub n: usize,
    #[serde(rename = "K")]
    pub distortion: f64,
    pub twisted_sum_norm: f64,
    pub designated_ball: Option<u8>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CocycleTrace {
    pub steps: usize,
    pub rows: Vec<TraceRow>,
    /// (n, Aⁿ(x)) at the recorded steps, row-major.
    pub products: Vec<(usize, [[f64; 3]; 3])>,
    /// Max entrywise gap between the product and the closed form.
    pub dual_path_error: f64,
    pub max_det_error: f64,
    /// OLS slope of ‖φ̃ₙ‖ against n.
    pub twisted_slope: f64,
    /// OLS slope of K against n.
    pub distortion_slope: f64,
    pub final_twisted_norm: f64,
    pub final_distortion: f64,
    pub max_twisted_norm: f64,
}

impl CocycleTrace {
    fn from_rows(steps: usize, rows: Vec<TraceRow>, products: Vec<(usize, [[f64; 3]; 3])>, dual: f64, det: f64) -> Self {
        let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let tw: Vec<f64> = rows.iter().map(|r| r.twisted_sum_norm).collect();
        let ks: Vec<f64> = rows.iter().map(|r| r.distortion).collect();
        let slope = |y: &[f64]| ols(&ns, y).map_or(0.0, |f| f.0);
        CocycleTrace {
            steps,
            twisted_slope: slope(&tw),
            distortion_slope: slope(&ks),
            final_twisted_norm: tw.last().copied().unwrap_or(0.0),
            final_distortion: ks.last().copied().unwrap_or(1.0),
            max_twisted_norm: tw.iter().copied().fold(0.0, f64::max),
            rows,
            products,
            dual_path_error: dual,
            max_det_error: det,
        }
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["n", "K", "twisted_sum_norm", "designated_ball"]).map_err(csv_err)?;
        for r in &self.rows {
            let ball = r.designated_ball.map_or(String::new(), |b| b.to_string());
            wr.write_record([r.n.to_string(), r.distortion.to_string(), r.twisted_sum_norm.to_string(), ball]).map_err(csv_err)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn to_rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]]
}

/// Twisted-sum norm and distortion of Aⁿ_ε(x*) for n ≤ n_max, recorded every
/// `record_every` steps. With `sigma`, x* is an itinerary point whose orbit was
/// verified for j < len(σ); longer horizons are refused.
pub fn divergence_experiment(
    c: &RotShearCocycle,
    x_star: &TorusPoint,
    sigma: Option<&[u8]>,
    n_max: usize,
    record_every: usize,
) -> Result<CocycleTrace> {
    if let Some(s) = sigma {
        if s.len() < n_max {
            return Err(Error::HorizonTooLong(format!("itinerary verified for {} steps, {n_max} requested", s.len())));
        }
    }
    let every = record_every.max(1);
    let pts = c.orbit_coords(x_star, n_max)?;
    let mut prod = Matrix3::identity();
    let mut acc = Vector2::zeros();
    let (mut dual, mut det): (f64, f64) = (0.0, 0.0);
    let mut rows = Vec::new();
    let mut products = Vec::new();
    for (j, y) in pts.iter().enumerate() {
        let v = c.phi.eval(y);
        prod = generator(c.beta, c.epsilon, v) * prod;
        acc += rot(-frac_mul(j as u64 + 1, c.beta)) * Vector2::new(v[0], v[1]);
        let n = j + 1;
        if n % every == 0 || n == n_max {
            let s = rot(frac_mul(n as u64, c.beta)) * acc;
            dual = dual.max(max_abs(&(prod - closed(c.beta, c.epsilon, n as u64, [s[0], s[1]]))));
            det = det.max((prod.determinant() - 1.0).abs());
            rows.push(TraceRow {
                n,
                distortion: distortion3(&prod)?,
                twisted_sum_norm: acc.norm(),
                designated_ball: sigma.map(|s| s[n - 1]),
            });
            products.push((n, to_rows(&prod)));
        }
    }
    Ok(CocycleTrace::from_rows(n_max, rows, products, dual, det))
}

/// σ_ℓ = 1 for ℓ ∈ J and 2 otherwise, ℓ = 0..len.
pub fn j_itinerary(j: &[u64], len: usize) -> Vec<u8> {
    let mut s = vec![2u8; len];
    for &x in j {
        if (x as usize) < len {
            s[x as usize] = 1;
        }
    }
    s
}

/// β = arg(λ)/2π for the complex eigenvalue λ of B with Im λ > 0.
pub fn default_beta() -> Result<f64> {
    Ok(build_bc()?.beta)
}

/// Golden-mean rotation number for isolated A.1 runs.
pub fn golden_beta() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

#[derive(Clone, Debug)]
pub struct A1Options {
    pub beta: f64,
    pub epsilon: f64,
    pub mode: PhiMode,
    pub n_max: usize,
    pub record_every: usize,
    pub setup: SetupOptions,
}

/// Everything the A.1 divergence experiment needs: setup, φ, the J-itinerary
/// point and the all-2 point.
#[derive(Clone, Debug, Serialize)]
pub struct A1Experiment {
    pub setup: ItinerarySetup,
    pub j: Vec<u64>,
    #[serde(skip)]
    pub cocycle: RotShearCocycle,
    pub itinerary: Itinerary,
    pub j_trace: CocycleTrace,
    pub all2_trace: CocycleTrace,
    /// 0.5·|J ∩ [1, n]|: every J-term adds at least cos(π/3) to the first coordinate.
    pub j_count: usize,
}

pub fn a1_experiment(l: &IntMatrix, opts: &A1Options) -> Result<A1Experiment> {
    let setup = itinerary_setup(l, &opts.setup)?;
    let jmode = match opts.mode {
        PhiMode::Smooth => JMode::Smooth,
        PhiMode::Analytic => JMode::Analytic,
    };
    let j = select_j(opts.beta, jmode, opts.n_max as u64);
    let sigma = j_itinerary(&j, opts.n_max);
    let spec = setup.spec(sigma.clone());
    let phi = build_phi_with_ridge(opts.mode, &spec, false, Some(&setup.ridge))?;
    let cocycle = RotShearCocycle::new(l.clone(), setup.power, opts.beta, opts.epsilon, phi)?;
    let itinerary = realize_itinerary(l, &spec, setup.power)?;
    let j_trace = divergence_experiment(&cocycle, &itinerary.x_star, Some(&sigma), opts.n_max, opts.record_every)?;
    let all2 = vec![2u8; opts.n_max];
    let it2 = realize_itinerary(l, &setup.spec(all2.clone()), setup.power)?;
    let all2_trace = divergence_experiment(&cocycle, &it2.x_star, Some(&all2), opts.n_max, opts.record_every)?;
    let j_count = j.iter().filter(|&&x| (x as usize) < opts.n_max).count();
    Ok(A1Experiment { setup, j, cocycle, itinerary, j_trace, all2_trace, j_count })
}

/// σ_max/σ_min of the product in a rescaled norm ‖x‖' = ‖Sx‖: K'(M) = K(S M S⁻¹).
pub fn distortion_in_norm(m: &Matrix3<f64>, s: &Matrix3<f64>) -> Result<f64> {
    let inv = s.try_inverse().ok_or(Error::Singular)?;
    distortion3(&(s * m * inv))
}
