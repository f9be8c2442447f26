use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circle::KillingTriple;
use crate::error::Result;
use crate::fuchsian::group::{Alphabet, GroupPresentation};
use crate::moebius::MoebiusMap;
use crate::qdiff::{Domain, VectorField};
use crate::C64;

/// Values on the presentation generators, in the vector-field convention
/// c_{γ₁γ₂} = γ₂*c_{γ₁} + c_{γ₂}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cocycle {
    pub convention: String,
    pub values: Vec<KillingTriple>,
}

pub const CONVENTION: &str = "vector-field";

impl Cocycle {
    pub fn new(values: Vec<KillingTriple>) -> Self {
        Cocycle { convention: CONVENTION.into(), values }
    }

    pub fn zero(n: usize) -> Self {
        Self::new(vec![KillingTriple::default(); n])
    }

    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(3 * self.values.len(), self.values.iter().flat_map(|t| t.to_vec()))
    }

    pub fn from_vector(v: &DVector<f64>) -> Self {
        Self::new((0..v.len() / 3).map(|k| KillingTriple::from_vec([v[3 * k], v[3 * k + 1], v[3 * k + 2]])).collect())
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }

    pub fn add(&self, o: &Cocycle) -> Cocycle {
        Self::from_vector(&(self.to_vector() + o.to_vector()))
    }

    pub fn sub(&self, o: &Cocycle) -> Cocycle {
        Self::from_vector(&(self.to_vector() - o.to_vector()))
    }
}

/// Value of a cocycle on a word, given values on the letters of `alphabet`.
pub fn extend_word(g: &GroupPresentation, alphabet: Alphabet, vals: &[KillingTriple], w: &[u8]) -> KillingTriple {
    let g = g.to_disk();
    w.iter().fold(KillingTriple::default(), |acc, &l| {
        let k = (l / 2) as usize;
        let m = g.letters(alphabet)[k];
        if l & 1 == 0 {
            acc.pullback(&m).add(&vals[k])
        } else {
            // c_{γ⁻¹} = −(γ⁻¹)*c_γ
            let inv = m.inverse();
            acc.pullback(&inv).sub(&vals[k].pullback(&inv))
        }
    })
}

impl Cocycle {
    pub fn eval_word(&self, g: &GroupPresentation, w: &[u8]) -> KillingTriple {
        extend_word(g, Alphabet::Generators, &self.values, w)
    }

    /// Value on the relation word; zero for a cocycle.
    pub fn relation_value(&self, g: &GroupPresentation) -> KillingTriple {
        self.eval_word(g, &g.relation_word())
    }

    pub fn relation_residual(&self, g: &GroupPresentation) -> f64 {
        self.relation_value(g).norm()
    }

    /// Values on the side pairings.
    pub fn side_values(&self, g: &GroupPresentation) -> Vec<KillingTriple> {
        g.side_pairing_words().iter().map(|w| self.eval_word(g, w)).collect()
    }

    /// Generator values from side-pairing values.
    pub fn from_side_values(g: &GroupPresentation, side: &[KillingTriple]) -> Cocycle {
        let vals = g
            .generator_words()
            .iter()
            .map(|w| extend_word(g, Alphabet::SidePairings, side, w))
            .collect();
        Cocycle::new(vals)
    }
}

/// δu(γ) = γ*u − u on each generator.
pub fn coboundary(u: &KillingTriple, g: &GroupPresentation) -> Cocycle {
    let g = g.to_disk();
    Cocycle::new(g.generators.iter().map(|m| u.pullback(m).sub(u)).collect())
}

/// γ*u − u for a general disk field.
pub struct CoboundaryField<'a, F: ?Sized> {
    pub map: MoebiusMap,
    pub field: &'a F,
}

impl<F: VectorField + ?Sized> VectorField for CoboundaryField<'_, F> {
    fn domain(&self) -> Domain {
        Domain::Disk
    }
    fn eval(&self, z: C64) -> Result<C64> {
        let w = self.map.apply(z)?;
        Ok(self.field.eval(w)? / self.map.derivative(z)? - self.field.eval(z)?)
    }
}

pub fn coboundary_fields<'a, F: VectorField + ?Sized>(u: &'a F, g: &GroupPresentation) -> Vec<CoboundaryField<'a, F>> {
    g.to_disk().generators.iter().map(|&map| CoboundaryField { map, field: u }).collect()
}

fn rank(m: &DMatrix<f64>, rel: f64) -> usize {
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel * smax).count()
}

/// Linear algebra of Z¹, B¹ and H¹ = Z¹/B¹ in coordinates
/// (Re a, Im a, b) per generator.
#[derive(Clone, Debug)]
pub struct CohomologyBasis {
    /// 3 × 6g relation map.
    pub relation: DMatrix<f64>,
    /// 6g × 3 coboundary map.
    pub delta: DMatrix<f64>,
    /// Orthonormal basis of Z¹ (columns).
    pub z1: DMatrix<f64>,
    /// Orthonormal basis of B¹ (columns).
    pub b1: DMatrix<f64>,
    /// Orthonormal basis of Z¹ ⊖ B¹ (columns).
    pub h1: DMatrix<f64>,
}

fn orthonormal_columns(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("u");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > rel * smax && smax > 0.0)
        .collect();
    DMatrix::from_fn(m.nrows(), keep.len(), |i, j| u[(i, keep[j])])
}

fn null_space(m: &DMatrix<f64>, rel: f64) -> DMatrix<f64> {
    let n = m.ncols();
    let row = orthonormal_columns(&m.transpose(), rel);
    let proj = DMatrix::<f64>::identity(n, n) - &row * row.transpose();
    orthonormal_columns(&proj, 1e-8)
}

impl CohomologyBasis {
    pub fn new(g: &GroupPresentation) -> Self {
        let n = 6 * g.genus;
        let zero = Cocycle::zero(2 * g.genus);
        let mut relation = DMatrix::<f64>::zeros(3, n);
        for j in 0..n {
            let mut v = zero.to_vector();
            v[j] = 1.0;
            let r = Cocycle::from_vector(&v).relation_value(g).to_vec();
            for i in 0..3 {
                relation[(i, j)] = r[i];
            }
        }
        let mut delta = DMatrix::<f64>::zeros(n, 3);
        for (j, u) in KillingTriple::basis().iter().enumerate() {
            let c = coboundary(u, g).to_vector();
            delta.set_column(j, &c);
        }
        let z1 = null_space(&relation, 1e-10);
        let b1 = orthonormal_columns(&delta, 1e-10);
        // complement of B¹ inside Z¹
        let pz = &z1 * z1.transpose();
        let pb = &b1 * b1.transpose();
        let h1 = orthonormal_columns(&(&pz - &pb * &pz), 1e-8);
        CohomologyBasis { relation, delta, z1, b1, h1 }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        let dz = self.z1.ncols();
        let db = rank(&self.delta, 1e-10);
        (dz, db, self.h1.ncols())
    }

    /// Coordinates of the class of `c` in the H¹ basis.
    pub fn h1_coords(&self, c: &Cocycle) -> DVector<f64> {
        self.h1.transpose() * c.to_vector()
    }

    /// Norm of the component orthogonal to B¹.
    pub fn b1_complement_norm(&self, c: &Cocycle) -> f64 {
        let v = c.to_vector();
        (&v - &self.b1 * (self.b1.transpose() * &v)).norm()
    }

    /// Nearest cocycle (orthogonal projection onto Z¹).
    pub fn project_z1(&self, c: &Cocycle) -> Cocycle {
        Cocycle::from_vector(&(&self.z1 * (self.z1.transpose() * c.to_vector())))
    }
}

/// (dim Z¹, dim B¹, dim H¹).
pub fn cocycle_space_dims(g: &GroupPresentation) -> (usize, usize, usize) {
    CohomologyBasis::new(g).dims()
}
