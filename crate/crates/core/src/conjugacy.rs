//! Numerical conjugacy h = Id + u between a linear automorphism L and the
//! perturbation f = L + εp, with periodic-data, weak-flag and regularity checks.
//!
//! u solves u(Lx) − L u(x) = εp(x + u(x)). The linear part is inverted along
//! orbits of L: the stable component is summed forward, the unstable one
//! backward, and the nonlinearity is handled by Picard iteration. Since u is
//! in general only Hölder, it is represented pointwise: on an L-invariant grid
//! (whose orbits are cycles, so the recurrences close up exactly) and at
//! arbitrary rational points through an exact orbit window x₋ₘ … xₘ.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{orbit, projectors, shadowing_constant, TorusPoint};
use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::spectral::splitting;

const TAU: f64 = std::f64::consts::TAU;
const MAXD: usize = 8;
/// Dyadic resolution used when turning floating coordinates into exact points.
const POINT_BITS: u32 = 60;
/// Smallest probe scale; below it the 2^-52 position error dominates the quotient.
pub const PRECISION_FLOOR: f64 = 1e-10;

/// One Fourier mode: cos(2π k·x)·a + sin(2π k·x)·b.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TrigTerm {
    pub k: Vec<i64>,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

/// f = L + εp (mod Z^d) with p a trigonometric polynomial.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Perturbation {
    pub dim: usize,
    pub terms: Vec<TrigTerm>,
    pub epsilon: f64,
}

impl Perturbation {
    pub fn new(dim: usize, terms: Vec<TrigTerm>, epsilon: f64) -> Result<Self> {
        if dim == 0 || dim > MAXD {
            return Err(Error::InvalidInput(format!("dimension {dim} outside 1..={MAXD}")));
        }
        for t in &terms {
            if t.k.len() != dim || t.cos.len() != dim || t.sin.len() != dim {
                return Err(Error::InvalidInput("trigonometric term of the wrong dimension".into()));
            }
        }
        if !epsilon.is_finite() {
            return Err(Error::InvalidInput("epsilon must be finite".into()));
        }
        Ok(Perturbation { dim, terms, epsilon })
    }

    /// p = (sin 2πx₂, 0).
    pub fn sample1(epsilon: f64) -> Self {
        let t = TrigTerm { k: vec![0, 1], cos: vec![0.0, 0.0], sin: vec![1.0, 0.0] };
        Perturbation { dim: 2, terms: vec![t], epsilon }
    }

    /// p = (sin 2πx₃, 0, sin 2πx₁, 0)/2, coupling the two planes of a 4-torus.
    pub fn sample4(epsilon: f64) -> Self {
        let a = TrigTerm { k: vec![0, 0, 1, 0], cos: vec![0.0; 4], sin: vec![0.5, 0.0, 0.0, 0.0] };
        let b = TrigTerm { k: vec![1, 0, 0, 0], cos: vec![0.0; 4], sin: vec![0.0, 0.0, 0.5, 0.0] };
        Perturbation { dim: 4, terms: vec![a, b], epsilon }
    }

    pub fn by_name(name: &str, epsilon: f64) -> Result<Self> {
        match name {
            "sample1" => Ok(Self::sample1(epsilon)),
            "sample4" => Ok(Self::sample4(epsilon)),
            _ => Err(Error::InvalidInput(format!("unknown perturbation {name:?}"))),
        }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Perturbation { epsilon, ..self.clone() }
    }

    /// εp(x) written into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        out[..self.dim].iter_mut().for_each(|v| *v = 0.0);
        for t in &self.terms {
            let arg = TAU * t.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum::<f64>();
            let (s, c) = arg.sin_cos();
            for i in 0..self.dim {
                out[i] += self.epsilon * (t.cos[i] * c + t.sin[i] * s);
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(x, &mut out);
        out
    }

    /// ε Dp(x).
    pub fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        let mut j = DMatrix::zeros(d, d);
        for t in &self.terms {
            let arg = TAU * t.k.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum::<f64>();
            let (s, c) = arg.sin_cos();
            for i in 0..d {
                let g = self.epsilon * TAU * (t.sin[i] * c - t.cos[i] * s);
                for (col, &k) in t.k.iter().enumerate() {
                    j[(i, col)] += g * k as f64;
                }
            }
        }
        j
    }

    /// Upper bound for sup ‖ε Dp‖ (operator norm).
    pub fn c1_bound(&self) -> f64 {
        self.epsilon.abs()
            * self
                .terms
                .iter()
                .map(|t| {
                    let kn = t.k.iter().map(|&k| (k * k) as f64).sum::<f64>().sqrt();
                    let an = t.cos.iter().chain(&t.sin).map(|a| a * a).sum::<f64>().sqrt();
                    TAU * kn * an
                })
                .sum::<f64>()
    }

    /// Upper bound for sup ‖εp‖.
    pub fn c0_bound(&self) -> f64 {
        self.epsilon.abs()
            * self.terms.iter().map(|t| t.cos.iter().chain(&t.sin).map(|a| a * a).sum::<f64>().sqrt()).sum::<f64>()
    }
}

/// Contraction budget: q = K_L · sup‖εDp‖ must stay below 1/2, where K_L bounds
/// the twisted linear solve, Σ_{i≥1}‖L^{−i}P_u‖ + Σ_{i≥0}‖LⁱP_s‖.
#[derive(Clone, Debug, Serialize)]
pub struct Budget {
    pub linear_constant: f64,
    pub c1_norm: f64,
    pub contraction: f64,
    pub limit: f64,
}

pub const BUDGET_LIMIT: f64 = 0.5;

pub fn budget(l: &IntMatrix, pert: &Perturbation) -> Result<Budget> {
    let k = shadowing_constant(l)?;
    let c1 = pert.c1_bound();
    Ok(Budget { linear_constant: k, c1_norm: c1, contraction: k * c1, limit: BUDGET_LIMIT })
}

#[derive(Clone, Debug)]
pub struct ConjugacyOptions {
    pub tol: f64,
    /// Points per side of the solve grid; `None` picks a power of two with (2N)^d ≤ 2^18.
    pub grid: Option<usize>,
    pub picard_tol: f64,
    pub max_iter: usize,
    pub offgrid_samples: usize,
    pub seed: u64,
}

impl Default for ConjugacyOptions {
    fn default() -> Self {
        ConjugacyOptions { tol: 1e-8, grid: None, picard_tol: 1e-14, max_iter: 200, offgrid_samples: 64, seed: 0 }
    }
}

fn auto_grid(d: usize) -> usize {
    let mut n = 1usize;
    while (4 * n).pow(d as u32) <= 1 << 18 {
        n *= 2;
    }
    n
}

/// The linear data of L used by every solve.
#[derive(Clone, Debug)]
struct Linear {
    d: usize,
    l: Vec<f64>,
    /// P_s L
    psl: Vec<f64>,
    ps: Vec<f64>,
    /// P_u L^{-1}
    pul: Vec<f64>,
    window: usize,
}

fn flat(m: &DMatrix<f64>) -> Vec<f64> {
    let d = m.nrows();
    (0..d * d).map(|i| m[(i / d, i % d)]).collect()
}

#[inline]
fn mv(m: &[f64], d: usize, x: &[f64], out: &mut [f64]) {
    for i in 0..d {
        out[i] = (0..d).map(|j| m[i * d + j] * x[j]).sum();
    }
}

impl Linear {
    fn new(l: &IntMatrix) -> Result<Self> {
        let lf = l.to_nalgebra();
        let d = l.dim();
        let li = l.inverse_unimodular()?.to_nalgebra();
        let (pu, ps) = projectors(&lf)?;
        let sp = splitting(l)?;
        let contraction = sp
            .blocks
            .iter()
            .map(|b| if b.modulus < 1.0 { b.modulus } else { 1.0 / b.modulus })
            .fold(0.0, f64::max);
        // Enough steps for the truncated series to fall below 1e-17, times a
        // margin for the non-normal transient.
        let window = ((1e-17f64).ln() / contraction.ln()).ceil() as usize + 2;
        let window = window + window / 4;
        Ok(Linear { d, l: flat(&lf), psl: flat(&(&ps * &lf)), ps: flat(&ps), pul: flat(&(&pu * &li)), window })
    }

    /// In-place twisted solve c_{j+1} = L c_j + σ g_j around a closed cycle.
    fn cyclic(&self, idx: &[usize], g: &[f64], sign: f64, out: &mut [f64]) {
        let (d, p, warm) = (self.d, idx.len(), self.window);
        let mut c = [0.0; MAXD];
        let mut a = [0.0; MAXD];
        let mut b = [0.0; MAXD];
        for t in 0..warm + p {
            let j = t % p;
            let gj = &g[idx[j] * d..idx[j] * d + d];
            mv(&self.psl, d, &c, &mut a);
            mv(&self.ps, d, gj, &mut b);
            for i in 0..d {
                c[i] = a[i] + sign * b[i];
            }
            if t >= warm {
                let q = idx[(j + 1) % p];
                out[q * d..q * d + d].copy_from_slice(&c[..d]);
            }
        }
        c = [0.0; MAXD];
        for t in 0..warm + p {
            let j = p - 1 - t % p;
            let gj = &g[idx[j] * d..idx[j] * d + d];
            for i in 0..d {
                b[i] = c[i] - sign * gj[i];
            }
            mv(&self.pul, d, &b, &mut c);
            if t >= warm {
                let q = idx[j];
                for i in 0..d {
                    out[q * d + i] += c[i];
                }
            }
        }
    }

    /// The same solve on an open path; boundary values are set to zero.
    fn path(&self, g: &[f64], sign: f64, out: &mut [f64]) {
        let d = self.d;
        let p = g.len() / d;
        let mut a = [0.0; MAXD];
        let mut b = [0.0; MAXD];
        out[..d].iter_mut().for_each(|v| *v = 0.0);
        for j in 0..p - 1 {
            mv(&self.psl, d, &out[j * d..j * d + d], &mut a);
            mv(&self.ps, d, &g[j * d..j * d + d], &mut b);
            for i in 0..d {
                out[(j + 1) * d + i] = a[i] + sign * b[i];
            }
        }
        let mut c = [0.0; MAXD];
        for j in (0..p - 1).rev() {
            for i in 0..d {
                b[i] = c[i] - sign * g[j * d + i];
            }
            mv(&self.pul, d, &b, &mut c);
            for i in 0..d {
                out[j * d + i] += c[i];
            }
        }
    }
}

/// u on the N^d grid {c/N}, indexed in row-major order of c.
#[derive(Clone, Debug)]
struct Grid {
    n: usize,
    u: Vec<f64>,
    /// Index of L·c mod N.
    next: Vec<usize>,
    iterations: usize,
    residual: f64,
}

fn grid_coords(i: usize, n: usize, d: usize, out: &mut [f64]) {
    let mut r = i;
    for k in (0..d).rev() {
        out[k] = (r % n) as f64 / n as f64;
        r /= n;
    }
}

fn solve_grid(lin: &Linear, l: &[Vec<i64>], pert: &Perturbation, n: usize, opts: &ConjugacyOptions) -> Result<Grid> {
    let d = lin.d;
    let total = n.checked_pow(d as u32).filter(|&t| t <= 1 << 24).ok_or_else(|| {
        Error::BudgetExceeded(format!("grid {n}^{d} is too large"))
    })?;
    let next: Vec<usize> = (0..total)
        .map(|i| {
            let mut c = [0i64; MAXD];
            let mut r = i;
            for k in (0..d).rev() {
                c[k] = (r % n) as i64;
                r /= n;
            }
            let mut j = 0usize;
            for row in l.iter().take(d) {
                let v = row.iter().zip(&c).map(|(a, b)| a * b).sum::<i64>().rem_euclid(n as i64);
                j = j * n + v as usize;
            }
            j
        })
        .collect();
    let mut seen = vec![false; total];
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    for s in 0..total {
        if seen[s] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut i = s;
        while !seen[i] {
            seen[i] = true;
            cyc.push(i);
            i = next[i];
        }
        if i != s {
            return Err(Error::InvalidInput("grid map is not a permutation".into()));
        }
        cycles.push(cyc);
    }
    let mut u = vec![0.0; total * d];
    let mut g = vec![0.0; total * d];
    let mut fresh = vec![0.0; total * d];
    for it in 1..=opts.max_iter {
        g.par_chunks_mut(d).enumerate().for_each(|(i, gi)| {
            let mut x = [0.0; MAXD];
            grid_coords(i, n, d, &mut x);
            for k in 0..d {
                x[k] += u[i * d + k];
            }
            pert.eval_into(&x[..d], gi);
        });
        for cyc in &cycles {
            lin.cyclic(cyc, &g, 1.0, &mut fresh);
        }
        let delta = fresh.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut u, &mut fresh);
        if !delta.is_finite() {
            return Err(Error::NoConvergence { iterations: it, residual: delta });
        }
        if delta <= opts.picard_tol {
            let residual = grid_residual(lin, pert, n, &u, &next);
            return Ok(Grid { n, u, next, iterations: it, residual });
        }
        if it == opts.max_iter {
            return Err(Error::NoConvergence { iterations: it, residual: delta });
        }
    }
    unreachable!("loop returns")
}

/// sup over the grid of |u(Lx) − L u(x) − εp(x + u(x))|.
fn grid_residual(lin: &Linear, pert: &Perturbation, n: usize, u: &[f64], next: &[usize]) -> f64 {
    let d = lin.d;
    (0..next.len())
        .into_par_iter()
        .map(|i| {
            let mut x = [0.0; MAXD];
            grid_coords(i, n, d, &mut x);
            for k in 0..d {
                x[k] += u[i * d + k];
            }
            let mut p = [0.0; MAXD];
            pert.eval_into(&x[..d], &mut p);
            let mut lu = [0.0; MAXD];
            mv(&lin.l, d, &u[i * d..i * d + d], &mut lu);
            let j = next[i];
            (0..d).map(|k| (u[j * d + k] - lu[k] - p[k]).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max)
}

/// h = Id + u with its verification record.
#[derive(Clone, Debug, Serialize)]
pub struct ConjugacyField {
    pub dim: usize,
    #[serde(skip)]
    matrix: IntMatrix,
    pub perturbation: Perturbation,
    pub budget: Budget,
    pub solve_grid: usize,
    pub verify_grid: usize,
    pub iterations: usize,
    /// Residual on the solve grid.
    pub solve_residual: f64,
    /// Residual on the verification grid.
    pub verify_residual: f64,
    /// Residual at random off-grid points through the orbit-window evaluator.
    pub offgrid_residual: f64,
    /// Window evaluator against grid values at sampled grid points.
    pub window_agreement: f64,
    /// Solve-grid values against the verification grid on shared points.
    pub grid_agreement: f64,
    /// max(verify_residual, offgrid_residual).
    pub residual: f64,
    /// Sup of |u| over the verification grid.
    pub sup_norm: f64,
    /// max |h⁻¹(h(x)) − x| over samples, h⁻¹ from the inverse-direction equation.
    pub inverse_error: f64,
    pub window: usize,
    #[serde(skip)]
    lin: Linear,
    #[serde(skip)]
    picard_tol: f64,
    #[serde(skip)]
    grid: Grid,
}

/// Solve u(Lx) − L u(x) = εp(x + u(x)) and verify the result.
pub fn solve_conjugacy(l: &IntMatrix, pert: &Perturbation, opts: &ConjugacyOptions) -> Result<ConjugacyField> {
    let d = l.dim();
    if pert.dim != d {
        return Err(Error::InvalidInput(format!("perturbation of dimension {} for a {d}×{d} matrix", pert.dim)));
    }
    if !l.is_unimodular() {
        return Err(Error::NotUnimodular { det: l.det().to_string() });
    }
    let b = budget(l, pert)?;
    if b.contraction >= b.limit {
        return Err(Error::BudgetExceeded(format!(
            "K_L·‖εDp‖ = {:.4} ≥ {} (K_L = {:.4}, ‖εDp‖ ≤ {:.4})",
            b.contraction, b.limit, b.linear_constant, b.c1_norm
        )));
    }
    let rows = l.to_i64_rows().ok_or_else(|| Error::InvalidInput("matrix entries exceed i64".into()))?;
    let lin = Linear::new(l)?;
    let n = opts.grid.unwrap_or_else(|| auto_grid(d));
    let coarse = solve_grid(&lin, &rows, pert, n, opts)?;
    let fine = solve_grid(&lin, &rows, pert, 2 * n, opts)?;
    let mut grid_agreement = 0.0f64;
    for i in 0..coarse.next.len() {
        let mut j = 0usize;
        let mut r = i;
        let mut digits = [0usize; MAXD];
        for k in (0..d).rev() {
            digits[k] = r % n;
            r /= n;
        }
        for &dg in digits.iter().take(d) {
            j = j * 2 * n + 2 * dg;
        }
        for k in 0..d {
            grid_agreement = grid_agreement.max((coarse.u[i * d + k] - fine.u[j * d + k]).abs());
        }
    }
    let sup_norm = fine.u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut field = ConjugacyField {
        dim: d,
        matrix: l.clone(),
        perturbation: pert.clone(),
        budget: b,
        solve_grid: n,
        verify_grid: 2 * n,
        iterations: coarse.iterations,
        solve_residual: coarse.residual,
        verify_residual: fine.residual,
        offgrid_residual: 0.0,
        window_agreement: 0.0,
        grid_agreement,
        residual: fine.residual,
        sup_norm,
        inverse_error: 0.0,
        window: lin.window,
        picard_tol: opts.picard_tol,
        lin,
        grid: coarse,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut off = 0.0f64;
    let mut agree = 0.0f64;
    let mut inv = 0.0f64;
    for _ in 0..opts.offgrid_samples {
        let c: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        let x = TorusPoint::from_f64(&c, POINT_BITS);
        off = off.max(field.pointwise_residual(&x)?);
        inv = inv.max(field.inverse_direction_error(&x)?);
        let gi = rng.gen_range(0..field.grid.next.len());
        let gp = field.grid_point(gi);
        let uw = field.u_at(&gp)?;
        for k in 0..d {
            agree = agree.max((uw[k] - field.grid.u[gi * d + k]).abs());
        }
    }
    field.offgrid_residual = off;
    field.window_agreement = agree;
    field.inverse_error = inv;
    field.residual = field.verify_residual.max(off);
    if field.residual >= opts.tol {
        return Err(Error::NoConvergence { iterations: field.iterations, residual: field.residual });
    }
    Ok(field)
}

impl ConjugacyField {
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    fn grid_point(&self, i: usize) -> TorusPoint {
        let (n, d) = (self.grid.n, self.dim);
        let mut c = vec![0i64; d];
        let mut r = i;
        for k in (0..d).rev() {
            c[k] = (r % n) as i64;
            r /= n;
        }
        let pairs: Vec<(i64, i64)> = c.iter().map(|&v| (v, n as i64)).collect();
        TorusPoint::from_ratios(&pairs).expect("positive denominators")
    }

    /// Grid values (solve grid, row-major, d numbers per point).
    pub fn grid_values(&self) -> &[f64] {
        &self.grid.u
    }

    /// Orbit window x₋ₘ … xₘ and u along it.
    fn window(&self, x: &TorusPoint) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        let m = self.lin.window as i64;
        let fwd = orbit(&self.matrix, x, m)?;
        let bwd = orbit(&self.matrix, x, -m)?;
        let pts: Vec<Vec<f64>> = bwd.iter().rev().chain(fwd.iter().skip(1)).map(|p| p.coords()).collect();
        let u = self.window_solve(&pts)?;
        Ok((pts, u))
    }

    /// u(x) from the exact orbit window of x.
    pub fn u_at(&self, x: &TorusPoint) -> Result<Vec<f64>> {
        let (_, u) = self.window(x)?;
        let (d, c) = (self.dim, self.lin.window);
        Ok(u[c * d..c * d + d].to_vec())
    }

    /// u at a floating point, rounded to the nearest 2^-60 dyadic.
    pub fn u_at_f64(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.u_at(&TorusPoint::from_f64(x, POINT_BITS))
    }

    pub fn h_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        let u = self.u_at_f64(x)?;
        Ok(x.iter().zip(&u).map(|(a, b)| a + b).collect())
    }

    fn window_solve(&self, pts: &[Vec<f64>]) -> Result<Vec<f64>> {
        let d = self.dim;
        let p = pts.len();
        let mut u = vec![0.0; p * d];
        let mut g = vec![0.0; p * d];
        let mut fresh = vec![0.0; p * d];
        let mut x = [0.0; MAXD];
        for it in 1..=200 {
            for j in 0..p {
                for k in 0..d {
                    x[k] = pts[j][k] + u[j * d + k];
                }
                self.perturbation.eval_into(&x[..d], &mut g[j * d..j * d + d]);
            }
            self.lin.path(&g, 1.0, &mut fresh);
            let delta = fresh.iter().zip(&u).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            std::mem::swap(&mut u, &mut fresh);
            if delta <= self.picard_tol {
                return Ok(u);
            }
            if !delta.is_finite() {
                return Err(Error::NoConvergence { iterations: it, residual: delta });
            }
        }
        Err(Error::NoConvergence { iterations: 200, residual: f64::NAN })
    }

    /// |u(Lx) − L u(x) − εp(x + u(x))| with both values from independent windows.
    pub fn pointwise_residual(&self, x: &TorusPoint) -> Result<f64> {
        let d = self.dim;
        let ux = self.u_at(x)?;
        let ulx = self.u_at(&x.apply(&self.matrix))?;
        let xc = x.coords();
        let y: Vec<f64> = xc.iter().zip(&ux).map(|(a, b)| a + b).collect();
        let p = self.perturbation.eval(&y);
        let mut lu = [0.0; MAXD];
        mv(&self.lin.l, d, &ux, &mut lu);
        Ok((0..d).map(|k| (ulx[k] - lu[k] - p[k]).abs()).fold(0.0, f64::max))
    }

    /// Lifted f̃(x) = Lx + εp(x).
    pub fn f_lift(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let mut out = [0.0; MAXD];
        mv(&self.lin.l, d, x, &mut out);
        let p = self.perturbation.eval(x);
        (0..d).map(|k| out[k] + p[k]).collect()
    }

    /// Df(x) = L + εDp(x).
    pub fn f_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let d = self.dim;
        DMatrix::from_row_slice(d, d, &self.lin.l) + self.perturbation.jacobian(x)
    }

    /// f̃⁻¹(z) by Newton from L⁻¹z.
    pub fn f_inverse(&self, z: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        let li = DMatrix::from_row_slice(d, d, &self.lin.l).try_inverse().ok_or(Error::Singular)?;
        let mut x: Vec<f64> = (&li * nalgebra::DVector::from_column_slice(z)).iter().copied().collect();
        for it in 0..60 {
            let fx = self.f_lift(&x);
            let r = nalgebra::DVector::from_iterator(d, fx.iter().zip(z).map(|(a, b)| a - b));
            let step = self.f_jacobian(&x).lu().solve(&r).ok_or(Error::Singular)?;
            for k in 0..d {
                x[k] -= step[k];
            }
            if step.amax() <= 1e-12 {
                return Ok(x);
            }
            if it == 59 {
                return Err(Error::NoConvergence { iterations: 60, residual: r.amax() });
            }
        }
        unreachable!("loop returns")
    }

    /// h⁻¹(y) by the fixed-point iteration x ← y − u(x).
    pub fn inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut x = y.to_vec();
        let mut delta = f64::INFINITY;
        for _ in 0..100 {
            let u = self.u_at_f64(&x)?;
            let next: Vec<f64> = y.iter().zip(&u).map(|(a, b)| a - b).collect();
            delta = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            x = next;
            if delta <= 1e-15 {
                return Ok(x);
            }
        }
        Err(Error::NoConvergence { iterations: 100, residual: delta })
    }

    /// |h⁻¹(h(x)) − x| where h⁻¹ = Id + v solves the inverse-direction equation
    /// v(f y) − L v(y) = −εp(y), summed along the f-orbit h(Lⁱx) of h(x).
    pub fn inverse_direction_error(&self, x: &TorusPoint) -> Result<f64> {
        let d = self.dim;
        let (pts, u) = self.window(x)?;
        let mut g = vec![0.0; u.len()];
        let mut y = vec![0.0; d];
        for (j, p) in pts.iter().enumerate() {
            for k in 0..d {
                y[k] = p[k] + u[j * d + k];
            }
            self.perturbation.eval_into(&y, &mut g[j * d..j * d + d]);
        }
        let mut v = vec![0.0; g.len()];
        self.lin.path(&g, -1.0, &mut v);
        let c = self.lin.window;
        Ok((0..d).map(|k| (u[c * d + k] + v[c * d + k]).abs()).fold(0.0, f64::max))
    }
}

/// One row of the periodic-data table.
#[derive(Clone, Debug, Serialize)]
pub struct PeriodicRow {
    pub period: u32,
    /// The L-periodic point q.
    pub seed: Vec<f64>,
    /// Refined f-periodic point p near h(q).
    pub point: Vec<f64>,
    pub newton_residual: f64,
    pub converged: bool,
    /// Eigenvalue moduli of D_p fⁿ and of Lⁿ, ascending.
    pub moduli_f: Vec<f64>,
    pub moduli_l: Vec<f64>,
    /// log|μ_f| − log|μ_L| per position.
    pub log_differences: Vec<f64>,
    pub max_abs_difference: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PeriodicTable {
    pub epsilon: f64,
    pub n_max: u32,
    pub rows: Vec<PeriodicRow>,
    pub failures: usize,
    pub max_abs_difference: f64,
}

fn sorted_moduli(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.complex_eigenvalues().iter().map(|z| z.norm()).collect();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Compare periodic data of f at p = h(q) with that of L at q for every q of period ≤ n_max.
pub fn periodic_data_compare(field: &ConjugacyField, n_max: u32) -> Result<PeriodicTable> {
    let l = field.matrix();
    let d = field.dim;
    let lf = DMatrix::from_row_slice(d, d, &field.lin.l);
    let mut jobs = Vec::new();
    for n in 1..=n_max {
        for q in crate::dynamics::enumerate_fixed(l, n)? {
            jobs.push((n, q));
        }
    }
    let rows: Vec<Result<PeriodicRow>> = jobs
        .par_iter()
        .map(|(n, q)| {
            let n = *n;
            let qc = q.coords();
            let uq = field.u_at(q)?;
            let mut p: Vec<f64> = qc.iter().zip(&uq).map(|(a, b)| a + b).collect();
            let seed_image = iterate(field, &p, n);
            let shift: Vec<f64> = (0..d).map(|k| (seed_image[k] - p[k]).round()).collect();
            let mut residual = f64::INFINITY;
            let mut converged = false;
            for _ in 0..50 {
                let (img, jac) = iterate_with_jacobian(field, &p, n);
                let r = nalgebra::DVector::from_iterator(d, (0..d).map(|k| img[k] - p[k] - shift[k]));
                residual = r.amax();
                if residual < 1e-12 {
                    converged = true;
                    break;
                }
                let a = jac - DMatrix::identity(d, d);
                let step = match a.lu().solve(&r) {
                    Some(s) => s,
                    None => break,
                };
                for k in 0..d {
                    p[k] -= step[k];
                }
            }
            let (_, jac) = iterate_with_jacobian(field, &p, n);
            let mut ln = DMatrix::identity(d, d);
            for _ in 0..n {
                ln = &lf * ln;
            }
            let mf = sorted_moduli(&jac);
            let ml = sorted_moduli(&ln);
            let diffs: Vec<f64> = mf.iter().zip(&ml).map(|(a, b)| a.ln() - b.ln()).collect();
            let max = diffs.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            Ok(PeriodicRow {
                period: n,
                seed: qc,
                point: p.iter().map(|v| v.rem_euclid(1.0)).collect(),
                newton_residual: residual,
                converged,
                moduli_f: mf,
                moduli_l: ml,
                log_differences: diffs,
                max_abs_difference: max,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let failures = rows.iter().filter(|r| !r.converged).count();
    let max_abs_difference = rows.iter().filter(|r| r.converged).map(|r| r.max_abs_difference).fold(0.0, f64::max);
    Ok(PeriodicTable { epsilon: field.perturbation.epsilon, n_max, rows, failures, max_abs_difference })
}

fn iterate(field: &ConjugacyField, x: &[f64], n: u32) -> Vec<f64> {
    let mut y = x.to_vec();
    for _ in 0..n {
        y = field.f_lift(&y);
    }
    y
}

fn iterate_with_jacobian(field: &ConjugacyField, x: &[f64], n: u32) -> (Vec<f64>, DMatrix<f64>) {
    let d = field.dim;
    let mut y = x.to_vec();
    let mut j = DMatrix::identity(d, d);
    for _ in 0..n {
        j = field.f_jacobian(&y) * j;
        y = field.f_lift(&y);
    }
    (y, j)
}

/// Pair statistics on one family of directions.
#[derive(Clone, Debug, Serialize)]
pub struct PairFamily {
    /// Fraction of pairs obeying D_n ≤ (ρ_k + margin)ⁿ·cond·D_0 + c for all n ≤ horizon.
    pub pass_rate: f64,
    /// exp of the mean late-window log-slope of D_n.
    pub fitted_rate: f64,
    pub min_rate: f64,
    pub max_rate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakFlagReport {
    pub k: usize,
    pub rates: Vec<f64>,
    pub rho_k: f64,
    pub rho_next: Option<f64>,
    pub margin: f64,
    pub delta: f64,
    pub horizon: usize,
    pub bound_constant: f64,
    /// Generic pairs on a common W_(1,k) leaf.
    pub leaf: PairFamily,
    /// Pairs displaced along E_k alone; their fitted rate estimates ρ_k.
    pub top: PairFamily,
    /// Pairs displaced along E_{k+1}: must fail the bound.
    pub negative: Option<PairFamily>,
    /// max over steps of |f̃(h̃(Lⁿx)) − h̃(Lⁿ⁺¹x)| mod 1.
    pub orbit_residual: f64,
    pub rate_in_window: bool,
    pub below_next: bool,
}

#[derive(Clone, Debug)]
pub struct WeakFlagOptions {
    pub samples: usize,
    pub horizon: usize,
    pub delta: f64,
    /// Relative margin: ε_margin = margin·ρ_k.
    pub margin: f64,
    pub seed: u64,
}

impl Default for WeakFlagOptions {
    fn default() -> Self {
        WeakFlagOptions { samples: 16, horizon: 14, delta: 1e-7, margin: 0.05, seed: 7 }
    }
}

/// Largest allowed |Lⁿ(δw)|: beyond it the mod-1 reduction of Lⁿy loses the
/// fractional digits the pair distance is read from.
pub const LIFT_LIMIT: f64 = 1e5;

/// Growth-rate test for h(W^L_(1,k)) = W^f_(1,k) on sampled pairs.
pub fn weak_flag_check(field: &ConjugacyField, k: usize, opts: &WeakFlagOptions) -> Result<WeakFlagReport> {
    let l = field.matrix();
    let d = field.dim;
    let sp = splitting(l)?;
    let unstable: Vec<_> = sp.blocks.iter().filter(|b| b.modulus > 1.0).collect();
    let rates: Vec<f64> = unstable.iter().map(|b| b.modulus).collect();
    if k == 0 || k > rates.len() {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={}", rates.len())));
    }
    let rho_max = rates.last().copied().expect("nonempty");
    let top_growth = opts.delta * rho_max.powi(opts.horizon as i32);
    if top_growth > LIFT_LIMIT || opts.horizon < 4 {
        return Err(Error::HorizonTooLong(format!(
            "δ·ρ_max^H = {top_growth:.3e} exceeds {LIFT_LIMIT:.0e} (or H < 4)"
        )));
    }
    let rho_k = rates[k - 1];
    let margin = opts.margin * rho_k;
    let cond = crate::linalg::distortion(&sp.basis_matrix()).unwrap_or(f64::INFINITY);
    let bound_constant = 2.0 * field.sup_norm + 1e-9;
    let lf = DMatrix::from_row_slice(d, d, &field.lin.l);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut orbit_residual = 0.0f64;

    let mut run = |dirs: &[&DMatrix<f64>], last_only: bool, rng: &mut ChaCha8Rng| -> Result<PairFamily> {
        let mut passes = 0usize;
        let mut logs = Vec::with_capacity(opts.samples);
        for _ in 0..opts.samples {
            let mut w = nalgebra::DVector::<f64>::zeros(d);
            for (i, b) in dirs.iter().enumerate() {
                if last_only && i + 1 < dirs.len() {
                    continue;
                }
                for c in 0..b.ncols() {
                    let a: f64 = rng.gen_range(-1.0..1.0);
                    w += b.column(c) * a;
                }
            }
            if w.norm() == 0.0 {
                continue;
            }
            let w = w.normalize() * opts.delta;
            let x0: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
            let x = TorusPoint::from_f64(&x0, POINT_BITS);
            let xs = orbit(l, &x, opts.horizon as i64)?;
            let mut lw = w.clone();
            let mut dn = Vec::with_capacity(opts.horizon + 1);
            let mut prev_h: Option<Vec<f64>> = None;
            for xn in xs.iter() {
                let xc = xn.coords();
                let yc: Vec<f64> = xc.iter().zip(lw.iter()).map(|(a, b)| a + b).collect();
                let ux = field.u_at(xn)?;
                let uy = field.u_at_f64(&yc)?;
                let diff: f64 = (0..d).map(|i| (lw[i] + uy[i] - ux[i]).powi(2)).sum::<f64>().sqrt();
                dn.push(diff);
                let hx: Vec<f64> = xc.iter().zip(&ux).map(|(a, b)| a + b).collect();
                if let Some(ph) = prev_h {
                    let fh = field.f_lift(&ph);
                    let r = (0..d).map(|i| crate::linalg::dist_to_z(fh[i] - hx[i])).fold(0.0, f64::max);
                    orbit_residual = orbit_residual.max(r);
                }
                prev_h = Some(hx);
                lw = &lf * lw;
            }
            let ok = dn.iter().enumerate().all(|(n, &v)| v <= (rho_k + margin).powi(n as i32) * cond * dn[0] + bound_constant);
            if ok {
                passes += 1;
            }
            let ns: Vec<f64> = (opts.horizon / 2..=opts.horizon).map(|n| n as f64).collect();
            let ls: Vec<f64> = (opts.horizon / 2..=opts.horizon).map(|n| dn[n].ln()).collect();
            if let Some((slope, _, _)) = crate::linalg::ols(&ns, &ls) {
                logs.push(slope);
            }
        }
        if logs.is_empty() {
            return Err(Error::InvalidInput("no usable pairs".into()));
        }
        let mean = logs.iter().sum::<f64>() / logs.len() as f64;
        Ok(PairFamily {
            pass_rate: passes as f64 / opts.samples as f64,
            fitted_rate: mean.exp(),
            min_rate: logs.iter().copied().fold(f64::INFINITY, f64::min).exp(),
            max_rate: logs.iter().copied().fold(f64::NEG_INFINITY, f64::max).exp(),
        })
    };

    let flag: Vec<&DMatrix<f64>> = unstable[..k].iter().map(|b| &b.basis).collect();
    let leaf = run(&flag, false, &mut rng)?;
    let top = run(&flag, true, &mut rng)?;
    let negative = if k < rates.len() { Some(run(&[&unstable[k].basis], false, &mut rng)?) } else { None };
    let rho_next = rates.get(k).copied();
    let rate_in_window = (top.fitted_rate - rho_k).abs() < margin;
    let below_next = rho_next.map_or(true, |r| top.fitted_rate < r);
    Ok(WeakFlagReport {
        k,
        rates,
        rho_k,
        rho_next,
        margin,
        delta: opts.delta,
        horizon: opts.horizon,
        bound_constant,
        leaf,
        top,
        negative,
        orbit_residual,
        rate_in_window,
        below_next,
    })
}

/// Finite-difference quotients of h along a direction. A diagnostic, not a verdict.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub label: &'static str,
    pub x0: Vec<f64>,
    pub direction: Vec<f64>,
    pub scales: Vec<f64>,
    /// (h̃(x0 + s w) − h̃(x0))/s for each scale s.
    pub quotients: Vec<Vec<f64>>,
    /// |Q(s_{i+1}) − Q(s_i)|.
    pub oscillation: Vec<f64>,
    pub max_oscillation: f64,
}

pub fn regularity_probe(field: &ConjugacyField, direction: &[f64], x0: &[f64], scales: &[f64]) -> Result<RegularityReport> {
    let d = field.dim;
    if direction.len() != d || x0.len() != d {
        return Err(Error::InvalidInput("direction and base point must match the dimension".into()));
    }
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::InvalidInput("zero direction".into()));
    }
    if scales.len() < 2 {
        return Err(Error::InvalidInput("need at least two scales".into()));
    }
    let ratio = scales[1] / scales[0];
    for w in scales.windows(2) {
        if !(w[1] < w[0]) || ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("scales must be a decreasing geometric sequence".into()));
        }
    }
    if let Some(&s) = scales.iter().find(|&&s| s < PRECISION_FLOOR) {
        return Err(Error::BudgetExceeded(format!("scale {s:e} is below the precision floor {PRECISION_FLOOR:e}")));
    }
    let w: Vec<f64> = direction.iter().map(|v| v / norm).collect();
    let base = TorusPoint::from_f64(x0, POINT_BITS);
    let bc = base.coords();
    let u0 = field.u_at(&base)?;
    let mut quotients = Vec::with_capacity(scales.len());
    for &s in scales {
        let target: Vec<f64> = bc.iter().zip(&w).map(|(a, b)| a + s * b).collect();
        let p = TorusPoint::from_f64(&target, POINT_BITS);
        let step = base.displacement(&p);
        let up = field.u_at(&p)?;
        quotients.push((0..d).map(|i| (step[i] + up[i] - u0[i]) / s).collect::<Vec<f64>>());
    }
    let oscillation: Vec<f64> = quotients
        .windows(2)
        .map(|q| q[0].iter().zip(&q[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .collect();
    let max_oscillation = oscillation.iter().copied().fold(0.0, f64::max);
    Ok(RegularityReport { label: "diagnostic", x0: bc, direction: w, scales: scales.to_vec(), quotients, oscillation, max_oscillation })
}

/// diag(cat, cat²): two unstable rates φ² and φ⁴.
pub fn two_rate_example() -> IntMatrix {
    let cat = crate::exact::cat_map();
    let sq = cat.mul(&cat);
    IntMatrix::block_diag(&[&cat, &sq])
}
