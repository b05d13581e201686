use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{count_fixed, RatVec, TorusPoint};
use crate::error::{Error, Result};
use crate::exact::IntMatrix;

/// Spectral projectors (P_u, P_s) onto the expanding and contracting subspaces,
/// from the matrix sign function of the Cayley transform (A − I)(A + I)⁻¹.
pub fn projectors(a: &DMatrix<f64>) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let m = a.nrows();
    let id = DMatrix::<f64>::identity(m, m);
    let plus = (a + &id).try_inverse().ok_or_else(|| Error::NotHyperbolic("eigenvalue −1".into()))?;
    let mut s = (a - &id) * plus;
    for it in 0..100 {
        let inv = s.clone().try_inverse().ok_or_else(|| Error::NotHyperbolic("eigenvalue of modulus 1".into()))?;
        let mu = if it < 20 { s.determinant().abs().powf(-1.0 / m as f64) } else { 1.0 };
        let next = (&s * mu + inv / mu) * 0.5;
        let delta = (&next - &s).norm();
        s = next;
        if delta <= 1e-14 * s.norm() {
            let pu = (&id + &s) * 0.5;
            let ps = &id - &pu;
            return Ok((pu, ps));
        }
    }
    Err(Error::NoConvergence { iterations: 100, residual: f64::NAN })
}

struct Series {
    unstable: Vec<DMatrix<f64>>,
    stable: Vec<DMatrix<f64>>,
    rate_u: f64,
    rate_s: f64,
}

/// A^{−i}P_u for i ≥ 1 and A^iP_s for i ≥ 0, truncated once negligible.
fn series(a: &DMatrix<f64>, a_inv: &DMatrix<f64>) -> Result<Series> {
    let (pu, ps) = projectors(a)?;
    let collect = |step: &DMatrix<f64>, start: DMatrix<f64>| {
        let first = start.norm().max(1e-300);
        let mut out = vec![start];
        while out.len() < 20_000 {
            let next = step * out.last().expect("nonempty");
            if next.norm() < 1e-18 * first {
                out.push(next);
                break;
            }
            out.push(next);
        }
        out
    };
    // re-projecting each step keeps rounding from feeding the other subspace
    let unstable = collect(&(&pu * a_inv), a_inv * &pu);
    let stable = collect(&(&ps * a), ps);
    let rate = |v: &[DMatrix<f64>]| {
        let k = v.len() - 1;
        if k == 0 {
            return 0.0;
        }
        (v[k].norm() / v[0].norm().max(1e-300)).powf(1.0 / k as f64)
    };
    let (rate_u, rate_s) = (rate(&unstable), rate(&stable));
    if unstable.len() >= 20_000 || stable.len() >= 20_000 {
        return Err(Error::NotHyperbolic("contraction too weak for the shadowing series".into()));
    }
    Ok(Series { unstable, stable, rate_u, rate_s })
}

fn f64_map(a: &IntMatrix) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    Ok((a.to_nalgebra(), a.inverse_unimodular()?.to_nalgebra()))
}

/// K_A = Σ_{i≥1}‖A^{−i}P_u‖ + Σ_{i≥0}‖AⁱP_s‖: a single jump of size δ moves the
/// shadowing orbit by at most K_A·δ.
pub fn shadowing_constant(a: &IntMatrix) -> Result<f64> {
    let (af, ai) = f64_map(a)?;
    let s = series(&af, &ai)?;
    Ok(s.unstable.iter().chain(&s.stable).map(|m| crate::linalg::op_norm(m)).sum())
}

/// Sharp deviation bound for a jump e: Σ|A^{−i}P_u e| + Σ|AⁱP_s e|.
pub fn deviation_bound(a: &IntMatrix, e: &[f64]) -> Result<f64> {
    let (af, ai) = f64_map(a)?;
    let s = series(&af, &ai)?;
    Ok(bound_from(&s, &DVector::from_column_slice(e)))
}

fn bound_from(s: &Series, e: &DVector<f64>) -> f64 {
    s.unstable.iter().chain(&s.stable).map(|m| (m * e).norm()).sum()
}

/// y_{k+1} = A y_k + e_k (mod Z^m), with exact rational jumps.
#[derive(Clone, Debug, Serialize)]
pub struct PseudoOrbit {
    pub points: Vec<TorusPoint>,
    #[serde(serialize_with = "ser_jumps")]
    pub jumps: Vec<RatVec>,
    pub max_jump: f64,
}

fn ser_jumps<S: serde::Serializer>(j: &[RatVec], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(j.len()))?;
    for e in j {
        seq.serialize_element(&e.to_f64())?;
    }
    seq.end()
}

impl PseudoOrbit {
    pub fn new(a: &IntMatrix, points: Vec<TorusPoint>, jumps: Vec<RatVec>) -> Result<Self> {
        if points.is_empty() || jumps.len() + 1 != points.len() {
            return Err(Error::InvalidInput("need one jump per step".into()));
        }
        for (k, e) in jumps.iter().enumerate() {
            if points[k].apply(a).translate(e) != points[k + 1] {
                return Err(Error::InvalidInput(format!("pseudo-orbit identity fails at step {k}")));
            }
        }
        let max_jump = jumps.iter().map(|e| e.norm()).fold(0.0, f64::max);
        Ok(PseudoOrbit { points, jumps, max_jump })
    }

    /// Sits at x_{σ_k} at step k; a switch 1→2 jumps by `lift`, 2→1 by −`lift`.
    pub fn from_sigma(a: &IntMatrix, fixed: [&TorusPoint; 2], lift: &RatVec, sigma: &[u8]) -> Result<Self> {
        if let Some(bad) = sigma.iter().find(|&&s| s != 1 && s != 2) {
            return Err(Error::InvalidInput(format!("itinerary symbol {bad} is not 1 or 2")));
        }
        let points = sigma.iter().map(|&s| fixed[s as usize - 1].clone()).collect();
        let zero = RatVec::zero(a.dim());
        let jumps = sigma
            .windows(2)
            .map(|w| match (w[0], w[1]) {
                (1, 2) => lift.clone(),
                (2, 1) => lift.neg(),
                _ => zero.clone(),
            })
            .collect();
        Self::new(a, points, jumps)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Shadow {
    pub x_star: TorusPoint,
    /// c_k with x_k = y_k + c_k, from the projected f64 recursions.
    pub corrections: Vec<Vec<f64>>,
    pub max_deviation: f64,
    /// Exact ‖Aᵏx* − y_k‖ on the torus.
    pub realized: Vec<f64>,
    /// Exact orbit of x*, in f64.
    pub orbit: Vec<Vec<f64>>,
    pub deviation_bound: f64,
    pub precision_bits: u64,
}

fn round_div(p: &BigInt, q: &BigInt) -> BigInt {
    // nearest integer to p/q, q > 0
    let two = BigInt::from(2);
    (p * &two + q).div_floor(&(q * &two))
}

/// Unique bounded correction of a pseudo-orbit, with an exact dyadic x* whose true
/// orbit is checked against the prediction step by step.
pub fn shadow(a: &IntMatrix, po: &PseudoOrbit) -> Result<Shadow> {
    let m = a.dim();
    let (af, ai) = f64_map(a)?;
    let s = series(&af, &ai)?;
    let (pu, ps) = projectors(&af)?;
    let n = po.jumps.len();
    let e: Vec<DVector<f64>> = po.jumps.iter().map(|v| DVector::from_vec(v.to_f64())).collect();

    let mut cs = vec![DVector::zeros(m); n + 1];
    for k in 0..n {
        cs[k + 1] = &ps * (&af * &cs[k] - &e[k]);
    }
    let mut cu = vec![DVector::zeros(m); n + 1];
    for k in (0..n).rev() {
        cu[k] = &pu * (&ai * (&cu[k + 1] + &e[k]));
    }
    let c: Vec<DVector<f64>> = cs.iter().zip(&cu).map(|(x, y)| x + y).collect();
    let max_deviation = c.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let k_a: f64 = s.unstable.iter().chain(&s.stable).map(|x| crate::linalg::op_norm(x)).sum();
    let deviation_bound = k_a * po.max_jump;
    if max_deviation >= 0.5 {
        return Err(Error::Admissibility(format!("shadowing correction {max_deviation:.3} is not small on the torus")));
    }

    let rho_max = af.norm().max(1.0);
    let mut extra = 64u64;
    for _attempt in 0..3 {
        let prec = (n as f64 * rho_max.log2()).ceil() as u64 + extra;
        let x_star = exact_start(a, po, &s, prec)?;
        let mut x = x_star.clone();
        let mut realized = Vec::with_capacity(n + 1);
        let mut orbit = Vec::with_capacity(n + 1);
        let mut ok = true;
        for k in 0..=n {
            if k > 0 {
                x = x.apply(a);
            }
            let d = po.points[k].displacement(&x);
            let err: f64 = d.iter().zip(c[k].iter()).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
            if err > 1e-9 * (1.0 + c[k].norm()) {
                ok = false;
                break;
            }
            realized.push(d.iter().map(|v| v * v).sum::<f64>().sqrt());
            orbit.push(x.coords());
        }
        if ok {
            return Ok(Shadow {
                x_star,
                corrections: c.iter().map(|v| v.iter().copied().collect()).collect(),
                max_deviation,
                realized,
                orbit,
                deviation_bound,
                precision_bits: prec,
            });
        }
        extra *= 4;
    }
    Err(Error::PrecisionExhausted { bits: 0, what: "shadowing orbit drifted from prediction".into() })
}

/// y₀ + c₀ rounded to 2^−prec. c₀ = P_u Σ A^{−(j+1)} e_j, with P_u replaced by
/// A^K(A^K + I)⁻¹, whose error decays geometrically in K.
fn exact_start(a: &IntMatrix, po: &PseudoOrbit, s: &Series, prec: u64) -> Result<TorusPoint> {
    let m = a.dim();
    let y0 = &po.points[0];
    if po.jumps.iter().all(|e| e.is_zero()) {
        return Ok(y0.clone());
    }
    let a_inv = a.inverse_unimodular()?;
    let dd = po.jumps.iter().fold(BigInt::one(), |acc, e| acc.lcm(&e.den));
    let mut t = vec![BigInt::zero(); m];
    for e in po.jumps.iter().rev() {
        let f = &dd / &e.den;
        let sum: Vec<BigInt> = t.iter().zip(&e.num).map(|(x, y)| x + y * &f).collect();
        t = a_inv.mul_vec(&sum);
    }
    let t_bits = t.iter().map(|x| x.bits()).max().unwrap_or(0) as f64 - dd.bits() as f64;
    let decay = s.rate_u.max(s.rate_s).clamp(1e-300, 0.999_999);
    let k = (((prec as f64 + t_bits.max(0.0) + 40.0) / -decay.log2()) * 1.25).ceil() as i64 + 8;
    let ak = a.pow(k)?;
    let (det, y) = ak
        .add(&IntMatrix::identity(m))
        .solve_scaled(&t)
        .ok_or_else(|| Error::NotHyperbolic("A^K + I is singular".into()))?;
    let (det, y) = if det.is_negative() { (-det, y.iter().map(|v| -v).collect()) } else { (det, y) };
    let c = ak.mul_vec(&y);
    // x* = a/E + c/(det·dd)
    let e_den = y0.denominator();
    let q = e_den * &det * &dd;
    let scale = BigInt::one() << prec;
    let num: Vec<BigInt> = y0
        .numerators()
        .iter()
        .zip(&c)
        .map(|(ai, ci)| round_div(&((ai * &det * &dd + e_den * ci) * &scale), &q))
        .collect();
    TorusPoint::new(num, scale)
}

#[derive(Clone, Debug, Serialize)]
pub struct ItinerarySpec {
    pub sigma: Vec<u8>,
    pub fixed_points: [TorusPoint; 2],
    pub radii: [f64; 2],
    /// Lift of x₂ − x₁ used at switches; chosen to minimize the deviation bound if absent.
    #[serde(skip)]
    pub jump: Option<RatVec>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Itinerary {
    pub power: u32,
    pub sigma: Vec<u8>,
    pub radii: [f64; 2],
    pub x_star: TorusPoint,
    /// f^j(x*) for j < len(σ), exact values rounded to f64.
    #[serde(skip)]
    pub orbit: Vec<Vec<f64>>,
    /// Exact ‖f^j(x*) − x_{σ_j}‖.
    pub deviations: Vec<f64>,
    pub max_deviation: f64,
    pub deviation_bound: f64,
    pub precision_bits: u64,
    pub verified: bool,
}

/// Smallest N ≥ 1 with at least two fixed points of L^N.
pub fn default_power(l: &IntMatrix) -> Result<u32> {
    for n in 1..=64 {
        if count_fixed(l, n)? >= BigInt::from(2) {
            return Ok(n);
        }
    }
    Err(Error::InvalidInput("no power with two fixed points found".into()))
}

fn lattice_box(m: usize, r: i64) -> Vec<Vec<i64>> {
    let side = (2 * r + 1) as usize;
    (0..side.pow(m as u32))
        .map(|mut c| {
            (0..m)
                .map(|_| {
                    let v = (c % side) as i64 - r;
                    c /= side;
                    v
                })
                .collect()
        })
        .collect()
}

/// x* with f^j(x*) ∈ B_{σ_j} for f = L^power and j < len(σ), verified on the exact orbit.
pub fn realize_itinerary(l: &IntMatrix, spec: &ItinerarySpec, power: u32) -> Result<Itinerary> {
    let a = l.pow(power as i64)?;
    let [x1, x2] = &spec.fixed_points;
    if !x1.is_fixed_by(&a) || !x2.is_fixed_by(&a) {
        return Err(Error::InvalidInput(format!("designated points are not fixed by L^{power}")));
    }
    if spec.radii.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::InvalidInput("radii must be positive".into()));
    }
    let sep = x1.dist(x2);
    if sep <= spec.radii[0] + spec.radii[1] {
        return Err(Error::Admissibility(format!("balls intersect: separation {sep:.4}")));
    }
    let lift = match &spec.jump {
        Some(j) => j.clone(),
        None => {
            let (af, ai) = f64_map(&a)?;
            let s = series(&af, &ai)?;
            let base = x2.lift().sub(&x1.lift());
            lattice_box(l.dim(), 1)
                .into_iter()
                .map(|z| base.add(&RatVec::from_ints(&z)))
                .map(|e| (bound_from(&s, &DVector::from_vec(e.to_f64())), e))
                .min_by(|p, q| p.0.total_cmp(&q.0))
                .expect("nonempty box")
                .1
        }
    };
    let po = PseudoOrbit::from_sigma(&a, [x1, x2], &lift, &spec.sigma)?;
    let sh = shadow(&a, &po)?;
    for (k, &d) in sh.realized.iter().enumerate() {
        let r = spec.radii[spec.sigma[k] as usize - 1];
        if d >= r {
            return Err(Error::Admissibility(format!("orbit leaves ball {} at step {k}: deviation {d:.4} ≥ {r}", spec.sigma[k])));
        }
    }
    Ok(Itinerary {
        power,
        sigma: spec.sigma.clone(),
        radii: spec.radii,
        x_star: sh.x_star,
        orbit: sh.orbit,
        max_deviation: sh.realized.iter().copied().fold(0.0, f64::max),
        deviations: sh.realized,
        deviation_bound: sh.deviation_bound,
        precision_bits: sh.precision_bits,
        verified: true,
    })
}

#[derive(Clone, Debug)]
pub struct SetupOptions {
    pub min_power: u32,
    pub max_power: u32,
    /// Integer seeds z₀ ∈ {−b..b}^m, iterated under L.
    pub seed_box: i64,
    pub seed_iterates: usize,
    /// Ridge directions k ∈ {−b..b}^m.
    pub ridge_box: i64,
    /// Required gap between the projected balls on the circle.
    pub gap_min: f64,
    /// Radius = margin·(deviation bound) + pad.
    pub margin: f64,
    pub pad: f64,
    /// When nonempty, a ridge k must pair nontrivially with at least one of these vectors.
    pub ridge_must_see: Vec<Vec<BigInt>>,
}

impl Default for SetupOptions {
    fn default() -> Self {
        SetupOptions { min_power: 1, max_power: 12, seed_box: 1, seed_iterates: 14, ridge_box: 1, gap_min: 0.15, margin: 1.1, pad: 1e-3, ridge_must_see: Vec::new() }
    }
}

/// Two fixed points of L^N and a ball radius such that every itinerary is
/// realizable, plus an integer direction k separating ⟨k, B₁⟩ and ⟨k, B₂⟩ mod 1.
#[derive(Clone, Debug, Serialize)]
pub struct ItinerarySetup {
    pub power: u32,
    pub x1: TorusPoint,
    pub x2: TorusPoint,
    #[serde(skip)]
    pub jump: RatVec,
    pub radius: f64,
    pub ridge: Vec<i64>,
    pub gap: f64,
    pub deviation_bound: f64,
}

impl ItinerarySetup {
    pub fn spec(&self, sigma: Vec<u8>) -> ItinerarySpec {
        ItinerarySpec {
            sigma,
            fixed_points: [self.x1.clone(), self.x2.clone()],
            radii: [self.radius; 2],
            jump: Some(self.jump.clone()),
        }
    }
}

fn circle_dist(t: f64) -> f64 {
    crate::linalg::dist_to_z(t)
}

/// Search over N, seeds z and ridge directions k; x₁ = 0 and x₂ = (L^N − I)⁻¹z.
pub fn itinerary_setup(l: &IntMatrix, opts: &SetupOptions) -> Result<ItinerarySetup> {
    let m = l.dim();
    let lf = l.to_nalgebra();
    let seeds: Vec<Vec<i64>> = lattice_box(m, opts.seed_box).into_iter().filter(|z| z.iter().any(|&x| x != 0)).collect();
    let ridges: Vec<(Vec<i64>, DVector<f64>, f64)> = lattice_box(m, opts.ridge_box)
        .into_iter()
        .filter(|k| k.iter().any(|&x| x != 0))
        .filter(|k| {
            opts.ridge_must_see.is_empty()
                || opts.ridge_must_see.iter().any(|w| !w.iter().zip(k).map(|(a, &b)| a * BigInt::from(b)).sum::<BigInt>().is_zero())
        })
        .map(|k| {
            let v = DVector::from_iterator(m, k.iter().map(|&x| x as f64));
            let n = v.norm();
            (k, v, n)
        })
        .collect();
    for power in opts.min_power..=opts.max_power {
        let a = l.pow(power as i64)?;
        let (af, ai) = f64_map(&a)?;
        let Ok(s) = series(&af, &ai) else { continue };
        let Some(h) = (&af - DMatrix::identity(m, m)).try_inverse() else { continue };
        let mut best: Option<(f64, Vec<i64>, usize, f64, f64)> = None;
        for z0 in &seeds {
            let mut z = DVector::from_iterator(m, z0.iter().map(|&x| x as f64));
            for _ in 0..opts.seed_iterates {
                let e = &h * &z;
                let p = e.map(|x| x - x.round());
                let sep = p.norm();
                if sep > 1e-9 {
                    let d = bound_from(&s, &e);
                    let rb = opts.margin * d + opts.pad;
                    if sep > 2.0 * rb {
                        for (ki, (_, kv, kn)) in ridges.iter().enumerate() {
                            let g = circle_dist(kv.dot(&p)) - 2.0 * kn * rb;
                            if best.as_ref().map_or(true, |b| g > b.0) {
                                let zi: Vec<i64> = z.iter().map(|&x| x.round() as i64).collect();
                                best = Some((g, zi, ki, rb, d));
                            }
                        }
                    }
                }
                z = &lf * z;
            }
        }
        let Some((gap, z, ki, radius, bound)) = best else { continue };
        if gap < opts.gap_min {
            continue;
        }
        let zb: Vec<BigInt> = z.iter().map(|&x| BigInt::from(x)).collect();
        let (det, y) = a
            .sub(&IntMatrix::identity(m))
            .solve_scaled(&zb)
            .ok_or_else(|| Error::NotHyperbolic("L^N − I singular".into()))?;
        let (det, y) = if det.is_negative() { (-det, y.iter().map(|v| -v).collect()) } else { (det, y) };
        let jump = RatVec { num: y, den: det };
        let x2 = TorusPoint::from_lift(&jump);
        debug_assert!(x2.is_fixed_by(&a));
        return Ok(ItinerarySetup {
            power,
            x1: TorusPoint::zero(m),
            x2,
            jump,
            radius,
            ridge: ridges[ki].0.clone(),
            gap,
            deviation_bound: bound,
        });
    }
    Err(Error::Admissibility(format!(
        "no admissible setup with gap ≥ {} for powers {}..={}",
        opts.gap_min, opts.min_power, opts.max_power
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::enumerate_fixed;
    use crate::exact::{cat_map, companion, sextic_c};

    #[test]
    fn projectors_of_cat_map() {
        let (pu, ps) = projectors(&cat_map().to_nalgebra()).unwrap();
        assert!((&pu * &pu - &pu).norm() < 1e-12);
        assert!((&pu + &ps - DMatrix::identity(2, 2)).norm() < 1e-15);
        assert!((pu.trace() - 1.0).abs() < 1e-12);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((pu[(0, 0)] / pu[(1, 0)] - phi).abs() < 1e-10);
    }

    #[test]
    fn single_jump_bound() {
        let cat = cat_map();
        let rho = (3.0 + 5f64.sqrt()) / 2.0;
        let y: Vec<TorusPoint> = (0..12).map(|_| TorusPoint::zero(2)).collect();
        let mut jumps = vec![RatVec::zero(2); 11];
        jumps[0] = RatVec { num: vec![BigInt::from(1), BigInt::from(-2)], den: BigInt::from(1000) };
        // the jump is not integral, so the points must follow it
        let mut pts = y.clone();
        for k in 0..11 {
            pts[k + 1] = pts[k].apply(&cat).translate(&jumps[k]);
        }
        let po = PseudoOrbit::new(&cat, pts, jumps).unwrap();
        let sh = shadow(&cat, &po).unwrap();
        let e = po.max_jump;
        let c0 = sh.corrections[0].iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(c0 <= e * (1.0 / (rho - 1.0)).max(1.0 / (1.0 - 1.0 / rho)));
        assert!(sh.realized.iter().zip(&sh.corrections).all(|(r, c)| (r - c.iter().map(|x| x * x).sum::<f64>().sqrt()).abs() < 1e-9));
    }

    #[test]
    fn zero_jumps_stay_put() {
        let cat = cat_map();
        let x = TorusPoint::from_ratios(&[(1, 5), (2, 5)]).unwrap();
        let a = cat.pow(2).unwrap();
        let po = PseudoOrbit::new(&a, vec![x.clone(); 4], vec![RatVec::zero(2); 3]).unwrap();
        let sh = shadow(&a, &po).unwrap();
        assert_eq!(sh.x_star, x);
        assert_eq!(sh.max_deviation, 0.0);
    }

    #[test]
    fn alternating_itinerary_for_cat_squared() {
        let cat = cat_map();
        let a = cat.pow(2).unwrap();
        let pts = enumerate_fixed(&cat, 2).unwrap();
        let x2 = pts.iter().find(|p| **p != TorusPoint::zero(2)).unwrap().clone();
        let sigma: Vec<u8> = (0..20).map(|k| if k % 2 == 0 { 1 } else { 2 }).collect();
        let spec = ItinerarySpec { sigma, fixed_points: [TorusPoint::zero(2), x2], radii: [0.2, 0.2], jump: None };
        let it = realize_itinerary(&cat, &spec, 2).unwrap();
        assert!(it.verified);
        assert!(it.deviations.iter().all(|&d| d < 0.2));
        // independent check on the exact orbit
        let mut x = it.x_star.clone();
        for k in 0..20 {
            let target = &spec.fixed_points[spec.sigma[k] as usize - 1];
            assert!(x.dist(target) < 0.2);
            x = x.apply(&a);
        }
        let ones = ItinerarySpec { sigma: vec![1; 10], ..spec.clone() };
        assert_eq!(realize_itinerary(&cat, &ones, 2).unwrap().x_star, TorusPoint::zero(2));
    }

    #[test]
    fn setup_for_cat_map() {
        let s = itinerary_setup(&cat_map(), &SetupOptions::default()).unwrap();
        assert_eq!(s.power, 3);
        assert!(s.gap > 0.3);
        let sigma: Vec<u8> = (0..200).map(|k| if (k * 7) % 5 < 2 { 1 } else { 2 }).collect();
        let it = realize_itinerary(&cat_map(), &s.spec(sigma), s.power).unwrap();
        assert!(it.max_deviation < s.radius);
        assert!(it.max_deviation <= s.deviation_bound + 1e-12);
    }

    #[test]
    fn setup_for_sextic_companion() {
        let c = companion(&sextic_c()).unwrap();
        let s = itinerary_setup(&c, &SetupOptions::default()).unwrap();
        assert!(s.power >= 3, "power {}", s.power);
        assert!(s.gap >= 0.15);
        let y = TorusPoint::from_lift(&s.jump);
        assert!(y.is_fixed_by(&c.pow(s.power as i64).unwrap()));
    }

    #[test]
    fn default_power_of_cat_map_is_two() {
        assert_eq!(default_power(&cat_map()).unwrap(), 2);
    }
}
