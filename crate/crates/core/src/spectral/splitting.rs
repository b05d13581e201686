use nalgebra::{Complex, DMatrix};
use serde::{Serialize, Serializer};

use super::{classify, SpectrumReport};
use crate::error::{Error, Result};
use crate::exact::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockKind {
    /// One real eigenvalue.
    Real,
    /// Complex pair; basis = (Re v, Im v).
    ComplexPair,
    /// Two real directions of equal modulus (λ, −λ or a double root).
    RealPair,
    /// Generalized eigenvectors of a repeated root that is not diagonalizable.
    Defective,
}

/// One modulus class of the real splitting.
#[derive(Clone, Debug)]
pub struct Block {
    pub modulus: f64,
    pub kind: BlockKind,
    /// d × k real basis, columns spanning the invariant subspace.
    pub basis: DMatrix<f64>,
    /// k × d left inverse of `basis`; |coords · x| is the block's conformal norm.
    pub coords: DMatrix<f64>,
    /// k × k matrix of L restricted to the block in basis coordinates.
    pub restricted: DMatrix<f64>,
    /// Distortion of `restricted` (1 for conformal blocks).
    pub distortion: f64,
    /// max over unit basis vectors of |Lu − proj(Lu)|.
    pub invariance_residual: f64,
}

impl Block {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

#[derive(Clone, Debug)]
pub struct Splitting {
    pub dim: usize,
    /// Blocks sorted by ascending modulus.
    pub blocks: Vec<Block>,
}

impl Splitting {
    /// Unstable rates ρ₁ < … < ρ_l.
    pub fn unstable_rates(&self) -> Vec<f64> {
        self.blocks.iter().filter(|b| b.modulus > 1.0).map(|b| b.modulus).collect()
    }

    /// Stable rates, ascending.
    pub fn stable_rates(&self) -> Vec<f64> {
        self.blocks.iter().filter(|b| b.modulus < 1.0).map(|b| b.modulus).collect()
    }

    /// All block bases side by side (d × d).
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<_> = self.blocks.iter().flat_map(|b| b.basis.column_iter().map(|c| c.into_owned())).collect();
        DMatrix::from_columns(&cols)
    }

    /// Oblique projector onto the span of the selected blocks along the others.
    pub fn projector(&self, select: impl Fn(&Block) -> bool) -> DMatrix<f64> {
        let v = self.basis_matrix();
        let vinv = v.clone().try_inverse().expect("splitting basis is invertible");
        let mut e = DMatrix::zeros(self.dim, self.dim);
        let mut off = 0;
        for b in &self.blocks {
            if select(b) {
                for i in 0..b.dim() {
                    e[(off + i, off + i)] = 1.0;
                }
            }
            off += b.dim();
        }
        &v * e * vinv
    }

    pub fn unstable_projector(&self) -> DMatrix<f64> {
        self.projector(|b| b.modulus > 1.0)
    }

    pub fn stable_projector(&self) -> DMatrix<f64> {
        self.projector(|b| b.modulus < 1.0)
    }

    /// max over blocks of the geometric-series constant times cond(V):
    /// a bound on the shadowing correction per unit jump.
    pub fn shadowing_constant(&self) -> f64 {
        let v = self.basis_matrix();
        let cond = crate::linalg::distortion(&v).unwrap_or(f64::INFINITY);
        let g = self
            .blocks
            .iter()
            .map(|b| if b.modulus > 1.0 { 1.0 / (b.modulus - 1.0) } else { 1.0 / (1.0 - b.modulus) })
            .fold(0.0, f64::max);
        (1.0 + g) * cond
    }
}

fn mat_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

impl Serialize for Block {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Block", 6)?;
        st.serialize_field("modulus", &self.modulus)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("basis_columns", &mat_rows(&self.basis.transpose()))?;
        st.serialize_field("restricted", &mat_rows(&self.restricted))?;
        st.serialize_field("distortion", &self.distortion)?;
        st.serialize_field("invariance_residual", &self.invariance_residual)?;
        st.end()
    }
}

impl Serialize for Splitting {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Splitting", 4)?;
        st.serialize_field("dim", &self.dim)?;
        st.serialize_field("unstable_rates", &self.unstable_rates())?;
        st.serialize_field("stable_rates", &self.stable_rates())?;
        st.serialize_field("blocks", &self.blocks)?;
        st.end()
    }
}

/// k right singular vectors of the smallest singular values.
fn null_vectors(a: DMatrix<Complex<f64>>, k: usize) -> Vec<nalgebra::DVector<Complex<f64>>> {
    let n = a.ncols();
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());
    idx.into_iter()
        .take(k)
        .map(|i| vt.row(i).transpose().map(|z| z.conj()))
        .collect()
}

fn real_null_vectors(a: DMatrix<f64>, k: usize) -> Vec<nalgebra::DVector<f64>> {
    let n = a.ncols();
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| svd.singular_values[i].partial_cmp(&svd.singular_values[j]).unwrap());
    idx.into_iter().take(k).map(|i| vt.row(i).transpose()).collect()
}

fn orthonormal_residual(l: &DMatrix<f64>, basis: &DMatrix<f64>) -> f64 {
    let q = basis.clone().qr().q();
    let mut worst: f64 = 0.0;
    for c in basis.column_iter() {
        let u = c.normalize();
        let lu = l * &u;
        let proj = &q * (q.transpose() * &lu);
        worst = worst.max((lu - proj).norm());
    }
    worst
}

/// Real splitting of a hyperbolic matrix with modulus classes of size ≤ 2.
pub fn splitting(m: &IntMatrix) -> Result<Splitting> {
    let report = classify(m)?;
    splitting_from_report(m, &report)
}

pub fn splitting_from_report(m: &IntMatrix, report: &SpectrumReport) -> Result<Splitting> {
    if !report.flags.hyperbolic {
        return Err(Error::NotHyperbolic(format!("{m} has an eigenvalue of modulus 1")));
    }
    if report.flags.max_class_size > 2 {
        return Err(Error::ClassTooLarge { size: report.flags.max_class_size });
    }
    let d = m.dim();
    let l = m.to_nalgebra();
    let lc: DMatrix<Complex<f64>> = l.map(|x| Complex::new(x, 0.0));
    let mut blocks = Vec::new();
    for (ci, class) in report.modulus_classes.iter().enumerate() {
        let mut cols: Vec<nalgebra::DVector<f64>> = Vec::new();
        let mut kind = BlockKind::Real;
        for &i in class {
            let root = &report.roots[i];
            let (re, im) = root.value();
            if im < 0.0 {
                continue;
            }
            let k = report.multiplicities[i];
            let lam = Complex::new(re, im);
            let mut a = &lc - DMatrix::from_diagonal_element(d, d, lam);
            let base = a.clone();
            for _ in 1..k {
                a = &a * &base;
            }
            // a repeated root whose eigenspace is smaller than its multiplicity
            let eig_null = null_vectors(base.clone(), k);
            let diagonalizable = eig_null.iter().all(|v| (&base * v).norm() < 1e-8 * (1.0 + l.norm()));
            if root.real {
                let mut ar = &l - DMatrix::from_diagonal_element(d, d, re);
                let br = ar.clone();
                for _ in 1..k {
                    ar = &ar * &br;
                }
                cols.extend(real_null_vectors(ar, k));
            } else {
                for v in null_vectors(a, k) {
                    cols.push(v.map(|z| z.re));
                    cols.push(v.map(|z| z.im));
                }
            }
            kind = if !root.real {
                BlockKind::ComplexPair
            } else if k > 1 && !diagonalizable {
                BlockKind::Defective
            } else if class.len() > 1 || k > 1 {
                BlockKind::RealPair
            } else {
                BlockKind::Real
            };
        }
        let basis = DMatrix::from_columns(&cols);
        let coords = basis
            .clone()
            .pseudo_inverse(1e-14)
            .map_err(|e| Error::InvalidInput(format!("degenerate block basis: {e}")))?;
        let restricted = &coords * &l * &basis;
        let distortion = crate::linalg::distortion(&restricted).unwrap_or(f64::INFINITY);
        let invariance_residual = orthonormal_residual(&l, &basis);
        blocks.push(Block {
            modulus: report.class_moduli[ci],
            kind,
            basis,
            coords,
            restricted,
            distortion,
            invariance_residual,
        });
    }
    Ok(Splitting { dim: d, blocks })
}
