use std::f64::consts::PI;

use nalgebra::{DMatrix, Matrix3, Vector2};
use num_bigint::BigInt;
use num_traits::Zero;
use serde::Serialize;

use super::{closed, frac_mul, j_itinerary, max_abs, CocycleTrace, TraceRow};
use crate::dynamics::{
    build_phi_with_ridge, itinerary_setup, orbit, realize_itinerary, select_j, Itinerary, ItinerarySetup, JMode, PhiFunction,
    PhiMode, RidgeSeries, SetupOptions, TorusPoint,
};
use crate::error::{Error, Result};
use crate::exact::{companion, cubic_b, sextic_c, smith_form, IntMatrix, IntPolynomial};
use crate::linalg::distortion3;
use crate::spectral::{certified_roots, find_factor};

/// Companion matrices of the cubic and the sextic with the data tying them together.
#[derive(Clone, Debug, Serialize)]
pub struct BcConstruction {
    #[serde(skip)]
    pub b: IntMatrix,
    #[serde(skip)]
    pub c: IntMatrix,
    pub det_b: String,
    pub det_c: String,
    /// sextic(x) = q(x²) with q(y) = −y³·cubic(1/y), checked in exact arithmetic.
    pub reversed_cubic_identity: bool,
    /// Modulus of B's complex pair.
    pub r_b: f64,
    /// Real root of the sextic above 1.
    pub r_c: f64,
    pub r: f64,
    /// arg(λ)/2π for B's eigenvalue λ with Im λ > 0.
    pub beta: f64,
    /// λ as (re, im).
    pub lambda: [f64; 2],
    /// Irreducible factor of the sextic vanishing at r.
    pub r_factor: String,
    #[serde(skip)]
    r_factor_poly: IntPolynomial,
}

pub fn build_bc() -> Result<BcConstruction> {
    let (p, s) = (cubic_b(), sextic_c());
    let b = companion(&p)?;
    let c = companion(&s)?;
    let reversed_cubic_identity = p.reverse().neg().compose_square() == s;
    let prec = 256;
    let rb = certified_roots(&p, prec)?;
    let pair = rb.iter().find(|z| !z.real && z.value().1 > 0.0).ok_or_else(|| Error::InvalidInput("cubic has no complex pair".into()))?;
    let (re, im) = pair.value();
    let r_b = pair.modulus().to_f64();
    let rc = certified_roots(&s, prec)?;
    let r_c = rc
        .iter()
        .filter(|z| z.real && z.value().0 > 1.0)
        .map(|z| z.value().0)
        .next()
        .ok_or_else(|| Error::InvalidInput("sextic has no real root above 1".into()))?;
    let r_factor_poly = factor_at(&s, r_c)?;
    Ok(BcConstruction {
        det_b: b.det().to_string(),
        det_c: c.det().to_string(),
        b,
        c,
        reversed_cubic_identity,
        r_b,
        r_c,
        r: r_c,
        beta: im.atan2(re) / (2.0 * PI),
        lambda: [re, im],
        r_factor: r_factor_poly.to_string(),
        r_factor_poly,
    })
}

/// The irreducible factor of p vanishing at x.
fn factor_at(p: &IntPolynomial, x: f64) -> Result<IntPolynomial> {
    let mut p = p.clone();
    while let Some(f) = find_factor(&p, 128, 1 << 14)? {
        let g = p.div_exact(&f).expect("factor divides");
        let scale = |q: &IntPolynomial| q.eval_f64(x).abs() / q.to_f64_coeffs().iter().map(|c| c.abs()).sum::<f64>();
        p = if scale(&f) < scale(&g) { f } else { g };
    }
    Ok(p)
}

/// A rational basis of ker q(C): the smallest rational subspace containing the
/// eigenvectors for the roots of q.
fn rational_kernel(c: &IntMatrix, q: &IntPolynomial) -> Vec<Vec<BigInt>> {
    let m = q.eval_matrix(c);
    let snf = smith_form(&m);
    let n = c.dim();
    (0..n)
        .filter(|&i| snf.diag[i].is_zero())
        .map(|i| (0..n).map(|r| snf.v.get(r, i).clone()).collect())
        .collect()
}

/// True iff ⟨k, v⟩ = 0 for every vector of the rational subspace spanned by the
/// eigenvectors of C for the roots of q, i.e. iff ⟨k, v⟩ = 0 exactly.
pub fn eigenspace_orthogonal(c: &IntMatrix, q: &IntPolynomial, k: &[i64]) -> bool {
    rational_kernel(c, q).iter().all(|w| w.iter().zip(k).map(|(a, &b)| a * BigInt::from(b)).sum::<BigInt>().is_zero())
}

/// ψ with (1/r)∂ψ/∂v = φ, as a ridge series along the same direction k.
#[derive(Clone, Debug, Serialize)]
pub struct Cohomology {
    pub psi: RidgeSeries,
    pub r: f64,
    pub v: Vec<f64>,
    /// ⟨k, v⟩.
    pub denominator: f64,
    /// sup |(1/r)∂ψ/∂v − φ| on the verification grid.
    pub residual: f64,
}

impl Cohomology {
    /// (1/r)·∂ψ/∂v at y.
    pub fn derivative(&self, y: &[f64]) -> [f64; 2] {
        let (_, d) = self.psi.eval_t(self.psi.phase(y));
        let f = self.denominator / self.r;
        [d[0] * f, d[1] * f]
    }
}

/// ψ̂(jk) = r·φ̂(jk)/(2πi·j⟨k,v⟩) on φ's finite support.
pub fn solve_cohomological(phi: &PhiFunction, v: &[f64], r: f64) -> Result<Cohomology> {
    let s = phi.series().ok_or_else(|| Error::InvalidInput("the cohomological solver needs an analytic φ".into()))?;
    if s.k.len() != v.len() {
        return Err(Error::InvalidInput(format!("direction of length {} on T^{}", v.len(), s.k.len())));
    }
    if s.constant != [0.0, 0.0] {
        return Err(Error::NonzeroMean { mean: s.constant });
    }
    let kappa: f64 = s.k.iter().zip(v).map(|(&a, b)| a as f64 * b).sum();
    let kn = s.k.iter().map(|&a| (a * a) as f64).sum::<f64>().sqrt();
    let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s.harmonics() > 0 && kappa.abs() <= 1e-12 * kn * vn {
        return Err(Error::SmallDenominator { k: s.k.clone() });
    }
    let mut cos = Vec::with_capacity(s.harmonics());
    let mut sin = Vec::with_capacity(s.harmonics());
    for j in 0..s.harmonics() {
        let w = r / (2.0 * PI * (j + 1) as f64 * kappa);
        cos.push([-w * s.sin[j][0], -w * s.sin[j][1]]);
        sin.push([w * s.cos[j][0], w * s.cos[j][1]]);
    }
    let psi = RidgeSeries { k: s.k.clone(), constant: [0.0; 2], cos, sin };
    let mut out = Cohomology { psi, r, v: v.to_vec(), denominator: kappa, residual: 0.0 };
    let grid = 64 * s.harmonics().max(1);
    let mut worst: f64 = 0.0;
    for i in 0..grid {
        let t = i as f64 / grid as f64;
        let (_, d) = out.psi.eval_t(t);
        let (target, _) = s.eval_t(t);
        for c in 0..2 {
            worst = worst.max((d[c] * kappa / r - target[c]).abs());
        }
    }
    out.residual = worst;
    Ok(out)
}

/// f_ε(x, y) = (B^N x + εψ(y), C^N y) on T³ × T⁶, with ψ valued in B's
/// rotating plane U and W = U ⊕ span(v).
#[derive(Clone, Debug)]
pub struct SkewSystem {
    pub b: IntMatrix,
    pub c: IntMatrix,
    pub power: u32,
    pub epsilon: f64,
    pub psi: RidgeSeries,
    /// Basis (Re e, Im e) of U for the eigenvector e of B, so B|_U = r·R_β in it.
    pub u: [[f64; 3]; 2],
    pub v: Vec<f64>,
    pub r: f64,
    pub beta: f64,
    bn: DMatrix<f64>,
    cn: DMatrix<f64>,
    w: DMatrix<f64>,
    w_pinv: DMatrix<f64>,
}

impl SkewSystem {
    pub fn new(bc: &BcConstruction, power: u32, epsilon: f64, psi: RidgeSeries) -> Result<Self> {
        let [re, im] = bc.lambda;
        // e = (1, λ, λ²) for the companion matrix
        let l2 = (re * re - im * im, 2.0 * re * im);
        let mut u = [[1.0, re, l2.0], [0.0, im, l2.1]];
        let nrm = u.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        u.iter_mut().flatten().for_each(|x| *x /= nrm);
        let mut v: Vec<f64> = (0..6).map(|i| bc.r.powi(i)).collect();
        let vn = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= vn);
        if psi.k.len() != 6 {
            return Err(Error::InvalidInput("ψ must live on T⁶".into()));
        }
        let bn = bc.b.pow(power as i64)?.to_nalgebra();
        let cn = bc.c.pow(power as i64)?.to_nalgebra();
        let mut w = DMatrix::zeros(9, 3);
        for i in 0..3 {
            w[(i, 0)] = u[0][i];
            w[(i, 1)] = u[1][i];
        }
        for i in 0..6 {
            w[(3 + i, 2)] = v[i];
        }
        let w_pinv = (w.transpose() * &w).try_inverse().ok_or(Error::Singular)? * w.transpose();
        Ok(SkewSystem {
            b: bc.b.clone(),
            c: bc.c.clone(),
            power,
            epsilon,
            psi,
            u,
            v,
            r: bc.r,
            beta: bc.beta,
            bn,
            cn,
            w,
            w_pinv,
        })
    }

    /// r^N.
    pub fn rate(&self) -> f64 {
        self.r.powi(self.power as i32)
    }

    /// Rotation number N·β of B^N on U.
    pub fn rotation(&self) -> f64 {
        frac_mul(self.power as u64, self.beta)
    }

    /// Df_ε at (x, y); independent of x.
    pub fn differential(&self, y: &[f64]) -> DMatrix<f64> {
        let (_, d) = self.psi.eval_t(self.psi.phase(y));
        let mut df = DMatrix::zeros(9, 9);
        df.view_mut((0, 0), (3, 3)).copy_from(&self.bn);
        df.view_mut((3, 3), (6, 6)).copy_from(&self.cn);
        for i in 0..3 {
            let col = self.epsilon * (self.u[0][i] * d[0] + self.u[1][i] * d[1]);
            for (j, &k) in self.psi.k.iter().enumerate() {
                df[(i, 3 + j)] = col * k as f64;
            }
        }
        df
    }

    /// Df_ε|_W in the W basis, together with the size of Df_ε W outside W.
    pub fn restricted(&self, y: &[f64]) -> (Matrix3<f64>, f64) {
        let dw = self.differential(y) * &self.w;
        let coords = &self.w_pinv * &dw;
        let residual = (&dw - &self.w * &coords).amax();
        (Matrix3::from_fn(|i, j| coords[(i, j)]), residual)
    }

    /// φ_ψ = (1/r^N)·∂ψ/∂v, the shear of the restricted cocycle.
    pub fn shear(&self, y: &[f64]) -> [f64; 2] {
        let (_, d) = self.psi.eval_t(self.psi.phase(y));
        let kappa: f64 = self.psi.k.iter().zip(&self.v).map(|(&a, b)| a as f64 * b).sum();
        let f = kappa / self.rate();
        [d[0] * f, d[1] * f]
    }

    /// r^N·A_ε(y) with A_ε = [[R_{Nβ}, εφ_ψ], [0, 1]].
    pub fn expected(&self, y: &[f64]) -> Matrix3<f64> {
        super::generator(self.rotation(), self.epsilon, self.shear(y)) * self.rate()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SkewPeriodicReport {
    pub point: Vec<f64>,
    pub period: u32,
    /// Moduli of the eigenvalues of Dfⁿ_ε|_W.
    pub moduli: Vec<f64>,
    /// r^{Nn}.
    pub expected: f64,
    pub max_relative_error: f64,
    pub invariance_residual: f64,
}

impl SkewSystem {
    /// Eigenvalue moduli of the restricted return derivative at a C^N-periodic point.
    pub fn periodic_report(&self, p: &TorusPoint, n: u32) -> Result<SkewPeriodicReport> {
        let cn = self.c.pow(self.power as i64)?;
        if n == 0 || !p.is_fixed_by(&cn.pow(n as i64)?) {
            return Err(Error::NotPeriodic { period: n as usize });
        }
        let rate = self.rate();
        let mut prod = Matrix3::identity();
        let mut inv: f64 = 0.0;
        for q in orbit(&cn, p, n as i64 - 1)? {
            let (m, res) = self.restricted(&q.coords());
            inv = inv.max(res);
            prod = (m / rate) * prod;
        }
        let scaled: Vec<f64> = prod.complex_eigenvalues().iter().map(|z| z.norm()).collect();
        let expected = rate.powi(n as i32);
        Ok(SkewPeriodicReport {
            point: p.coords(),
            period: n,
            max_relative_error: scaled.iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max),
            moduli: scaled.iter().map(|s| s * expected).collect(),
            expected,
            invariance_residual: inv,
        })
    }
}

/// Restricted-cocycle trace along y*: K(Dfⁿ_ε|_W) in the W basis (the rⁿ factors
/// cancel), the twisted sum of φ_ψ, and the gap between the W-projected product
/// and the closed form rⁿ·[[R_{nNβ}, εφ̃ₙ], [0, 1]].
pub fn skew_distortion_experiment(
    s: &SkewSystem,
    y_star: &TorusPoint,
    sigma: Option<&[u8]>,
    n_max: usize,
    record_every: usize,
) -> Result<(CocycleTrace, f64)> {
    if let Some(sg) = sigma {
        if sg.len() < n_max {
            return Err(Error::HorizonTooLong(format!("itinerary verified for {} steps, {n_max} requested", sg.len())));
        }
    }
    let every = record_every.max(1);
    let cn = s.c.pow(s.power as i64)?;
    let rate = s.rate();
    let beta = s.rotation();
    let mut prod = Matrix3::identity();
    let mut acc = Vector2::zeros();
    let (mut dual, mut det, mut inv): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut rows = Vec::new();
    let mut products = Vec::new();
    if n_max > 0 {
        for (j, q) in orbit(&cn, y_star, n_max as i64 - 1)?.iter().enumerate() {
            let y = q.coords();
            let (m, res) = s.restricted(&y);
            if res > 1e-12 {
                return Err(Error::InvarianceFailed { residual: res });
            }
            inv = inv.max(res);
            prod = (m / rate) * prod;
            let v = s.shear(&y);
            acc += crate::linalg::rot(-frac_mul(j as u64 + 1, beta)) * Vector2::new(v[0], v[1]);
            let n = j + 1;
            if n % every == 0 || n == n_max {
                let sm = crate::linalg::rot(frac_mul(n as u64, beta)) * acc;
                let scale = 1.0 + max_abs(&prod);
                dual = dual.max(max_abs(&(prod - closed(beta, s.epsilon, n as u64, [sm[0], sm[1]]))) / scale);
                det = det.max((prod.determinant() - 1.0).abs());
                rows.push(TraceRow {
                    n,
                    distortion: distortion3(&prod)?,
                    twisted_sum_norm: acc.norm(),
                    designated_ball: sigma.map(|sg| sg[n - 1]),
                });
                products.push((n, super::to_rows(&prod)));
            }
        }
    }
    Ok((CocycleTrace::from_rows(n_max, rows, products, dual, det), inv))
}

#[derive(Clone, Debug)]
pub struct A3Options {
    pub epsilon: f64,
    pub n_max: usize,
    pub record_every: usize,
    pub setup: SetupOptions,
}

impl Default for A3Options {
    fn default() -> Self {
        A3Options { epsilon: 0.1, n_max: 2000, record_every: 10, setup: SetupOptions::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct A3Experiment {
    pub bc: BcConstruction,
    pub setup: ItinerarySetup,
    pub j_count: usize,
    pub phi: PhiFunction,
    pub cohomology: Cohomology,
    #[serde(skip)]
    pub system: SkewSystem,
    pub itinerary: Itinerary,
    pub trace: CocycleTrace,
    pub invariance_residual: f64,
    /// max_y |Df|_W/r^N − A_ε(y)| over the itinerary orbit.
    pub structure_residual: f64,
    pub periodic: SkewPeriodicReport,
}

/// B, C, the itinerary setup for C^N, the zero-mean analytic φ and ψ solving
/// the cohomological equation along the eigendirection v of C.
#[derive(Clone, Debug, Serialize)]
pub struct A3Observable {
    pub bc: BcConstruction,
    pub setup: ItinerarySetup,
    #[serde(skip)]
    pub j: Vec<u64>,
    #[serde(skip)]
    pub sigma: Vec<u8>,
    pub phi: PhiFunction,
    pub cohomology: Cohomology,
    pub rate: f64,
}

pub fn a3_observable(opts: &A3Options) -> Result<A3Observable> {
    let bc = build_bc()?;
    let mut setup_opts = opts.setup.clone();
    setup_opts.ridge_must_see = rational_kernel(&bc.c, &bc.r_factor_poly);
    let setup = itinerary_setup(&bc.c, &setup_opts)?;
    if eigenspace_orthogonal(&bc.c, &bc.r_factor_poly, &setup.ridge) {
        return Err(Error::SmallDenominator { k: setup.ridge.clone() });
    }
    let beta_n = frac_mul(setup.power as u64, bc.beta);
    let j = select_j(beta_n, JMode::Analytic, opts.n_max as u64);
    let sigma = j_itinerary(&j, opts.n_max);
    let spec = setup.spec(sigma.clone());
    let phi = build_phi_with_ridge(PhiMode::Analytic, &spec, true, Some(&setup.ridge))?;
    let system0 = SkewSystem::new(&bc, setup.power, opts.epsilon, RidgeSeries { k: setup.ridge.clone(), constant: [0.0; 2], cos: vec![], sin: vec![] })?;
    let rate = system0.rate();
    let cohomology = solve_cohomological(&phi, &system0.v, rate)?;
    Ok(A3Observable { bc, setup, j, sigma, phi, cohomology, rate })
}

/// The A.3 pipeline: the observable of [`a3_observable`], the itinerary point
/// and the restricted-derivative trace.
pub fn a3_experiment(opts: &A3Options) -> Result<A3Experiment> {
    let A3Observable { bc, setup, j, sigma, phi, cohomology, .. } = a3_observable(opts)?;
    let spec = setup.spec(sigma.clone());
    let system = SkewSystem::new(&bc, setup.power, opts.epsilon, cohomology.psi.clone())?;
    let itinerary = realize_itinerary(&bc.c, &spec, setup.power)?;
    let (trace, invariance_residual) = skew_distortion_experiment(&system, &itinerary.x_star, Some(&sigma), opts.n_max, opts.record_every)?;
    let rate = system.rate();
    let structure_residual = itinerary
        .orbit
        .iter()
        .step_by(opts.record_every.max(1))
        .map(|y| max_abs(&(system.restricted(y).0 / rate - system.expected(y) / rate)))
        .fold(0.0, f64::max);
    let periodic = system.periodic_report(&setup.x2, 1)?;
    let j_count = j.iter().filter(|&&x| (x as usize) < opts.n_max).count();
    Ok(A3Experiment {
        bc,
        setup,
        j_count,
        phi,
        cohomology,
        system,
        itinerary,
        trace,
        invariance_residual,
        structure_residual,
        periodic,
    })
}

impl A3Experiment {
    pub fn write_trace_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        self.trace.write_csv(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::PhiRepr;
    use crate::exact::IntPolynomial;

    #[test]
    fn bc_pair_matches() {
        let bc = build_bc().unwrap();
        assert!(bc.reversed_cubic_identity);
        assert!((bc.r_b - bc.r_c).abs() < 1e-9);
        assert!((bc.r - 1.754878).abs() < 1e-6);
        // |pair|² = 1/(real root of the cubic)
        let real = certified_roots(&cubic_b(), 128).unwrap().into_iter().find(|z| z.real).unwrap().value().0;
        assert!((bc.r * bc.r - 1.0 / real).abs() < 1e-12);
        assert_eq!(bc.det_b, "1");
        assert_eq!(bc.r_factor_poly, IntPolynomial::from_i64(&[-1, 1, -2, 1]));
        assert!(bc.beta > 0.0 && bc.beta < 0.5);
    }

    fn single_mode(k: Vec<i64>, a: [f64; 2], b: [f64; 2]) -> PhiFunction {
        let s = RidgeSeries { k, constant: [0.0; 2], cos: vec![a], sin: vec![b] };
        PhiFunction { mode: PhiMode::Analytic, repr: PhiRepr::Analytic(s), mean: [0.0; 2], zero_mean: true, sup_error: 0.0 }
    }

    #[test]
    fn cosine_mode_integrates_to_sine() {
        let k0 = vec![1, 0, -1, 2, 0, 1];
        let v = [0.3, 0.1, -0.2, 0.5, 0.7, 0.2];
        let r = 2.5;
        let coh = solve_cohomological(&single_mode(k0.clone(), [1.0, -2.0], [0.0, 0.0]), &v, r).unwrap();
        let kv: f64 = k0.iter().zip(&v).map(|(&a, b)| a as f64 * b).sum();
        let c = r / (2.0 * PI * kv);
        for i in 0..50 {
            let y: Vec<f64> = (0..6).map(|j| ((i * 7 + j * 3) % 17) as f64 / 17.0).collect();
            let t: f64 = k0.iter().zip(&y).map(|(&a, b)| a as f64 * b).sum();
            let want = [c * (2.0 * PI * t).sin(), -2.0 * c * (2.0 * PI * t).sin()];
            let got = coh.psi.eval(&y);
            assert!((got[0] - want[0]).abs() < 1e-12 && (got[1] - want[1]).abs() < 1e-12);
        }
        assert!(coh.residual < 1e-12);
    }

    #[test]
    fn nonzero_mean_and_resonance_are_rejected() {
        let mut phi = single_mode(vec![1, 0, 0, 0, 0, 0], [1.0, 0.0], [0.0, 0.0]);
        if let PhiRepr::Analytic(s) = &mut phi.repr {
            s.constant = [0.25, 0.0];
        }
        assert!(matches!(solve_cohomological(&phi, &[1.0; 6], 2.0), Err(Error::NonzeroMean { .. })));
        let phi = single_mode(vec![1, -1, 0, 0, 0, 0], [1.0, 0.0], [0.0, 0.0]);
        assert!(matches!(solve_cohomological(&phi, &[1.0; 6], 2.0), Err(Error::SmallDenominator { .. })));
    }

    #[test]
    fn rational_invariant_subspace_is_detected() {
        let bc = build_bc().unwrap();
        assert_eq!(rational_kernel(&bc.c, &bc.r_factor_poly).len(), 3);
        // rows of q(C) annihilate ker q(C)
        let q = bc.r_factor_poly.eval_matrix(&bc.c);
        let row: Vec<i64> = (0..6).map(|j| i64::try_from(q.get(0, j).clone()).unwrap()).collect();
        assert!(eigenspace_orthogonal(&bc.c, &bc.r_factor_poly, &row));
        let v: Vec<f64> = (0..6).map(|i| bc.r.powi(i)).collect();
        let dot: f64 = row.iter().zip(&v).map(|(&a, b)| a as f64 * b).sum();
        assert!(dot.abs() < 1e-9);
        assert!(!eigenspace_orthogonal(&bc.c, &bc.r_factor_poly, &[1, 0, 0, 0, 0, 0]));
    }

    #[test]
    fn invariance_and_structure_at_random_points() {
        let bc = build_bc().unwrap();
        let psi = RidgeSeries { k: vec![1, 0, 1, 0, -1, 1], constant: [0.0; 2], cos: vec![[0.3, -0.1], [0.05, 0.2]], sin: vec![[0.1, 0.4], [0.0, -0.3]] };
        let s = SkewSystem::new(&bc, 3, 0.1, psi).unwrap();
        for i in 0..20 {
            let y: Vec<f64> = (0..6).map(|j| ((i * 5 + j * 11) % 23) as f64 / 23.0).collect();
            let (m, res) = s.restricted(&y);
            assert!(res < 1e-12, "{res}");
            assert!(max_abs(&(m - s.expected(&y))) < 1e-12 * s.rate());
        }
    }

    #[test]
    fn periodic_moduli_are_powers_of_r() {
        let bc = build_bc().unwrap();
        let psi = RidgeSeries { k: vec![1, 0, 1, 0, -1, 1], constant: [0.0; 2], cos: vec![[0.3, -0.1]], sin: vec![[0.1, 0.4]] };
        let s = SkewSystem::new(&bc, 2, 0.5, psi).unwrap();
        let pts = crate::dynamics::enumerate_fixed(&bc.c.pow(2).unwrap(), 2).unwrap();
        for p in pts.iter().take(6) {
            let r = s.periodic_report(p, 2).unwrap();
            assert!(r.max_relative_error < 1e-8, "{r:?}");
        }
    }
}
