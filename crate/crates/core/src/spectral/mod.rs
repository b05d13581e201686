//! Certified spectral analysis of integer matrices.

mod irreducible;
mod modulus;
mod roots;
mod splitting;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

pub use irreducible::{find_factor, irreducible_over_q, irreducible_with, is_perfect_square};
pub use modulus::{
    classes_from_roots, exclusion_products, exclusion_products_bits, power_sums, symmetric_square, ModulusCertificate,
    ModulusClasses, ExclusionProducts,
};
pub use roots::{certified_roots, certified_roots_auto, CertifiedRoot};
pub use splitting::{splitting, Block, BlockKind, Splitting};

use crate::error::{Error, Result};
use crate::exact::{char_poly, poly_gcd, IntMatrix, IntPolynomial};

/// Relations whose failure puts a matrix in the exceptional set.
/// The serialized names are stable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExclusionReason {
    Reducible,
    NonAnosovComplexPair,
    NonAnosovReal,
    TripleModulusTwoPairs,
    TripleModulusPairReal,
}

impl ExclusionReason {
    pub const ALL: [ExclusionReason; 5] = [
        ExclusionReason::Reducible,
        ExclusionReason::NonAnosovComplexPair,
        ExclusionReason::NonAnosovReal,
        ExclusionReason::TripleModulusTwoPairs,
        ExclusionReason::TripleModulusPairReal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExclusionReason::Reducible => "reducible",
            ExclusionReason::NonAnosovComplexPair => "non-Anosov-complex-pair",
            ExclusionReason::NonAnosovReal => "non-Anosov-real",
            ExclusionReason::TripleModulusTwoPairs => "triple-modulus-two-pairs",
            ExclusionReason::TripleModulusPairReal => "triple-modulus-pair-real",
        }
    }
}

impl fmt::Display for ExclusionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for ExclusionReason {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flags {
    pub irreducible: bool,
    pub hyperbolic: bool,
    pub max_class_size: usize,
    pub satisfies_theorem: bool,
    pub exclusion_reasons: Vec<ExclusionReason>,
}

impl Flags {
    fn finish(irreducible: bool, hyperbolic: bool, max_class_size: usize, mut reasons: Vec<ExclusionReason>) -> Self {
        reasons.sort();
        reasons.dedup();
        Flags {
            irreducible,
            hyperbolic,
            max_class_size,
            satisfies_theorem: irreducible && hyperbolic && max_class_size <= 2,
            exclusion_reasons: reasons,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub dim: usize,
    pub char_poly: IntPolynomial,
    #[serde(serialize_with = "ser_display")]
    pub det: BigInt,
    /// Certified roots of the squarefree part.
    pub roots: Vec<CertifiedRoot>,
    pub multiplicities: Vec<usize>,
    pub modulus_classes: Vec<Vec<usize>>,
    /// Class sizes counting multiplicity.
    pub class_sizes: Vec<usize>,
    pub class_moduli: Vec<f64>,
    pub flags: Flags,
    pub certificate: ModulusCertificate,
    pub precision_bits: u32,
}

fn ser_display<T: fmt::Display, S: Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub start_prec: u32,
    pub cap: u32,
    /// Also compute the four integer exclusion products (3 ≤ d ≤ 8).
    pub exclusion_products: bool,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { start_prec: 128, cap: 1 << 14, exclusion_products: false }
    }
}

/// Certified roots of the squarefree part together with multiplicities and classes.
struct RootData {
    roots: Vec<CertifiedRoot>,
    mult: Vec<usize>,
    classes: ModulusClasses,
    prec: u32,
}

fn root_data(chi: &IntPolynomial, opts: &ClassifyOptions) -> Result<RootData> {
    let dec = chi.squarefree_decomposition();
    let mut q = IntPolynomial::one();
    for f in &dec {
        q = q.mul(f);
    }
    let mut prec = opts.start_prec.max(64);
    loop {
        let attempt = (|| -> Result<RootData> {
            let mut roots = Vec::new();
            let mut mult = Vec::new();
            for (i, f) in dec.iter().enumerate() {
                if f.deg() == 0 {
                    continue;
                }
                let off = roots.len();
                for mut r in certified_roots(f, prec)? {
                    r.conj += off;
                    roots.push(r);
                    mult.push(i + 1);
                }
            }
            let classes = classes_from_roots(&q, &roots, prec)?;
            Ok(RootData { roots, mult, classes, prec })
        })();
        match attempt {
            Err(Error::PrecisionExhausted { .. }) if prec < opts.cap => prec = (prec * 2).min(opts.cap),
            other => return other,
        }
    }
}

/// Certified partition of the roots of a squarefree p by modulus.
pub fn modulus_classes(p: &IntPolynomial) -> Result<(Vec<CertifiedRoot>, ModulusClasses)> {
    if !p.is_squarefree() {
        return Err(Error::InvalidInput(format!("{p} is not squarefree")));
    }
    let d = root_data(p, &ClassifyOptions::default())?;
    Ok((d.roots, d.classes))
}

/// True iff no root of p has modulus exactly 1.
pub fn hyperbolic(p: &IntPolynomial) -> Result<bool> {
    if !p.is_monic() {
        return Err(Error::NotMonic { lead: p.lead().to_string() });
    }
    if p.eval_i64(1).is_zero() || p.eval_i64(-1).is_zero() {
        return Ok(false);
    }
    let g = poly_gcd(p, &p.reverse());
    if g.deg() == 0 {
        return Ok(true);
    }
    // every unit-circle root of p is a root of g; decide those
    let g = g.squarefree_part();
    if symmetric_square(&g).eval_i64(1) != BigInt::zero() {
        return Ok(true);
    }
    let d = root_data(&g, &ClassifyOptions::default())?;
    Ok(match d.classes.certificate.unit_value {
        None => true,
        Some(u) => !d.classes.class_of.contains(&u),
    })
}

pub fn classify(m: &IntMatrix) -> Result<SpectrumReport> {
    classify_with(m, &ClassifyOptions::default())
}

pub fn classify_with(m: &IntMatrix, opts: &ClassifyOptions) -> Result<SpectrumReport> {
    let det = m.det();
    if !det.abs().is_one() {
        return Err(Error::NotUnimodular { det: det.to_string() });
    }
    let chi = char_poly(m);
    classify_poly(&chi, &det, opts)
}

/// Classification from the characteristic polynomial.
pub fn classify_poly(chi: &IntPolynomial, det: &BigInt, opts: &ClassifyOptions) -> Result<SpectrumReport> {
    let d = chi.deg();
    let data = root_data(chi, opts)?;
    let squarefree = data.mult.iter().all(|&k| k == 1);
    let irreducible = squarefree && irreducible_with(chi, opts.start_prec, opts.cap)?;

    let mut reasons = Vec::new();
    if !irreducible {
        reasons.push(ExclusionReason::Reducible);
    }
    let real_unit = chi.eval_i64(1).is_zero() || chi.eval_i64(-1).is_zero();
    if real_unit {
        reasons.push(ExclusionReason::NonAnosovReal);
    }
    let unit = data.classes.certificate.unit_value;
    let complex_unit = (0..data.roots.len()).any(|i| !data.roots[i].real && Some(data.classes.class_of[i]) == unit);
    let trace_rule = d == 2 && det.to_i64() == Some(1);
    let hyperbolic = if trace_rule {
        // exact trace test: |Tr| > 2
        let t = -chi.coeff(1);
        t.abs() > BigInt::from(2)
    } else {
        !real_unit && !complex_unit
    };
    if complex_unit {
        reasons.push(ExclusionReason::NonAnosovComplexPair);
    }
    if trace_rule && !hyperbolic && !real_unit {
        reasons.push(ExclusionReason::NonAnosovComplexPair);
    }

    let mut class_sizes = Vec::new();
    for class in &data.classes.classes {
        class_sizes.push(class.iter().map(|&i| data.mult[i]).sum::<usize>());
        let nonreal = class.iter().filter(|&&i| !data.roots[i].real).count();
        let real = class.len() - nonreal;
        if nonreal >= 4 {
            reasons.push(ExclusionReason::TripleModulusTwoPairs);
        }
        if nonreal >= 2 && real >= 1 {
            reasons.push(ExclusionReason::TripleModulusPairReal);
        }
    }
    let max_class_size = class_sizes.iter().copied().max().unwrap_or(0);
    let flags = Flags::finish(irreducible, hyperbolic, max_class_size, reasons);

    let mut certificate = data.classes.certificate.clone();
    if opts.exclusion_products && (3..=8).contains(&d) && squarefree {
        let bits = exclusion_products_bits(&data.roots).max(data.prec);
        let roots = certified_roots(chi, bits)?;
        certificate.exclusion_products = Some(exclusion_products(&roots, det, bits)?);
    }
    Ok(SpectrumReport {
        dim: d,
        char_poly: chi.clone(),
        det: det.clone(),
        class_moduli: certificate.squared_moduli.iter().map(|v| v.sqrt()).collect(),
        roots: data.roots,
        multiplicities: data.mult,
        modulus_classes: data.classes.classes,
        class_sizes,
        flags,
        certificate,
        precision_bits: data.prec,
    })
}

/// Flags only; exact and allocation-light for d = 2, full classification otherwise.
pub fn classify_flags(m: &IntMatrix) -> Result<Flags> {
    if m.dim() == 2 {
        let det = m.det();
        if det.to_i64() == Some(1) {
            let t = m.trace();
            let disc = &t * &t - BigInt::from(4);
            let irreducible = !is_perfect_square(&disc);
            let at = t.abs();
            let two = BigInt::from(2);
            let hyperbolic = at > two;
            let mut reasons = Vec::new();
            if !irreducible {
                reasons.push(ExclusionReason::Reducible);
            }
            if at == two {
                reasons.push(ExclusionReason::NonAnosovReal);
            } else if at < two {
                reasons.push(ExclusionReason::NonAnosovComplexPair);
            }
            let max_class_size = if hyperbolic { 1 } else { 2 };
            return Ok(Flags::finish(irreducible, hyperbolic, max_class_size, reasons));
        }
    }
    Ok(classify(m)?.flags)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64_rows(rows).unwrap()
    }

    #[test]
    fn cat_map_satisfies_theorem() {
        let r = classify(&m(&[&[2, 1], &[1, 1]])).unwrap();
        assert!(r.flags.irreducible && r.flags.hyperbolic);
        assert_eq!(r.flags.max_class_size, 1);
        assert!(r.flags.satisfies_theorem);
        assert!(r.flags.exclusion_reasons.is_empty());
    }

    #[test]
    fn unipotent_is_not_anosov() {
        let r = classify(&m(&[&[1, 1], &[0, 1]])).unwrap();
        assert!(!r.flags.hyperbolic && !r.flags.satisfies_theorem);
        assert!(r.flags.exclusion_reasons.contains(&ExclusionReason::NonAnosovReal));
        assert_eq!(r.multiplicities, vec![2]);
    }

    #[test]
    fn block_cat_is_reducible() {
        let cat = m(&[&[2, 1], &[1, 1]]);
        let r = classify(&IntMatrix::block_diag(&[&cat, &cat])).unwrap();
        assert!(!r.flags.irreducible && !r.flags.satisfies_theorem);
        assert_eq!(r.flags.exclusion_reasons, vec![ExclusionReason::Reducible]);
        assert_eq!(r.flags.max_class_size, 2);
        assert!(r.flags.hyperbolic);
    }

    #[test]
    fn hyperbolic_examples() {
        let p = |c: &[i64]| IntPolynomial::from_i64(c);
        assert!(!hyperbolic(&p(&[-1, 1])).unwrap());
        assert!(!hyperbolic(&p(&[1, -1, 1])).unwrap());
        assert!(hyperbolic(&p(&[1, -3, 1])).unwrap());
        // reciprocal real pairs make S(1) vanish without unit roots
        assert!(hyperbolic(&p(&[1, 0, -3, 0, 1])).unwrap());
        // Salem-type quartic with two unit-circle roots
        assert!(!hyperbolic(&p(&[1, -1, -1, -1, 1])).unwrap());
    }

    #[test]
    fn cubic_companion_report() {
        let b = crate::exact::companion(&crate::exact::cubic_b()).unwrap();
        let r = classify_with(&b, &ClassifyOptions { exclusion_products: true, ..Default::default() }).unwrap();
        assert!(r.flags.satisfies_theorem);
        assert_eq!(r.class_sizes, vec![1, 2]);
        assert!((r.class_moduli[1] - 1.754877666).abs() < 1e-8);
        let pp = r.certificate.exclusion_products.as_ref().unwrap();
        assert_ne!(pp.pair_square, "0");
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["flags"]["satisfies_theorem"], true);
        assert_eq!(json["char_poly"][0], "-1");
    }

    #[test]
    fn unit_circle_quartic_has_two_reasons() {
        let c = crate::exact::companion(&IntPolynomial::from_i64(&[1, 0, 0, 0, 1])).unwrap();
        let r = classify(&c).unwrap();
        assert_eq!(r.flags.max_class_size, 4);
        assert!(r.flags.exclusion_reasons.contains(&ExclusionReason::NonAnosovComplexPair));
        assert!(r.flags.exclusion_reasons.contains(&ExclusionReason::TripleModulusTwoPairs));
    }

    #[test]
    fn flags_fast_path_agrees_with_full_classification() {
        for t in -5i64..=5 {
            let a = m(&[&[t, -1], &[1, 0]]);
            assert_eq!(classify_flags(&a).unwrap(), classify(&a).unwrap().flags, "trace {t}");
        }
    }
}
