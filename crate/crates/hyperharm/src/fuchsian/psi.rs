use nalgebra::DVector;
use serde::Serialize;

use crate::circle::{poisson_extend, radial_l2_restriction, split_tangential_h2, KillingTriple, PoissonExtension};
use crate::error::{Error, Result};
use crate::fuchsian::cocycle::{extend_word, CohomologyBasis, Cocycle};
use crate::fuchsian::group::{dedup_elements, Alphabet, GroupPresentation};
use crate::fuchsian::phi::{phi_map, PhiConfig, PhiResult, PSI_DEFECT_ALLOWANCE};
use crate::moebius::MoebiusMap;
use crate::qdiff::{beta, Domain, QuadDiff, VectorField};
use crate::C64;

/// Circumradius of the regular genus-2 octagon, cosh r = cot²(π/8).
pub fn octagon_circumradius() -> f64 {
    let c = 1.0 / (std::f64::consts::PI / 8.0).tan();
    (c * c).acosh()
}

fn hyp_dist0(w: C64) -> f64 {
    let r = w.norm().min(1.0 - 1e-16);
    2.0 * r.atanh()
}

fn smoothstep(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

#[derive(Clone, Copy, Debug)]
pub struct PsiConfig {
    /// Word length of the neighbor elements.
    pub l: u32,
    /// φ = 1 for hyperbolic distance ≤ d1 from 0.
    pub d1: f64,
    /// φ = 0 for distance ≥ d2.
    pub d2: f64,
    pub radius: f64,
    pub samples: usize,
}

impl Default for PsiConfig {
    fn default() -> Self {
        PsiConfig { l: 5, d1: 1.5, d2: 3.6, radius: 1.0 - 1e-3, samples: 4096 }
    }
}

impl PsiConfig {
    pub fn bump(&self, d: f64) -> f64 {
        1.0 - smoothstep((d - self.d1) / (self.d2 - self.d1))
    }
}

/// ψ = −Σ_γ φ(γz) c_γ(z) / Σ_γ φ(γz), evaluated at the folded point and
/// transported back with the cocycle rule.
pub struct PsiField {
    cfg: PsiConfig,
    letters: Vec<MoebiusMap>,
    letter_values: Vec<KillingTriple>,
    neighbors: Vec<(MoebiusMap, KillingTriple)>,
}

pub fn partition_psi(c: &Cocycle, g: &GroupPresentation, cfg: &PsiConfig) -> Result<PsiField> {
    let g = g.to_disk();
    let side = c.side_values(&g);
    let letters = g.side_pairing_maps();
    let letter_values: Vec<KillingTriple> = (0..letters.len() as u8)
        .map(|l| extend_word(&g, Alphabet::SidePairings, &side, &[l]))
        .collect();
    let reach = octagon_circumradius() + cfg.d2;
    let elems = g.enumerate(Alphabet::SidePairings, cfg.l)?;
    let near: Vec<_> = elems.into_iter().filter(|e| hyp_dist0(e.map.b / e.map.d) <= reach + 1e-9).collect();
    let (reps, _) = dedup_elements(&near, 1e-8);
    let neighbors = crate::par::map(&reps, |e| {
        // c on the element: evaluate word in side-pairing letters
        let mut acc = KillingTriple::default();
        for &l in &e.word {
            acc = acc.pullback(&letters[l as usize]).add(&letter_values[l as usize]);
        }
        (e.map, acc)
    });
    Ok(PsiField { cfg: *cfg, letters, letter_values, neighbors })
}

impl PsiField {
    pub fn neighbor_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Fold w toward 0; returns the folded point, the folding map and its
    /// cocycle value.
    fn fold(&self, w: C64) -> (C64, MoebiusMap, KillingTriple) {
        let mut z = w;
        let mut gmap = MoebiusMap::identity(self.letters[0].model);
        let mut cg = KillingTriple::default();
        for _ in 0..400 {
            let mut best = (z.norm(), usize::MAX, z);
            for (k, m) in self.letters.iter().enumerate() {
                let v = m.apply(z).expect("disk map");
                if v.norm() < best.0 {
                    best = (v.norm(), k, v);
                }
            }
            if best.1 == usize::MAX || !(best.0 < z.norm() * (1.0 - 1e-15)) {
                break;
            }
            let k = best.1;
            // g ← h∘g, c_{hg} = g*c_h + c_g
            cg = self.letter_values[k].pullback(&gmap).add(&cg);
            gmap = self.letters[k].compose(&gmap);
            z = best.2;
        }
        (z, gmap, cg)
    }

    /// Normalizing sum Σ φ(γz) at a folded point.
    pub fn coverage(&self, zf: C64) -> f64 {
        self.neighbors
            .iter()
            .map(|(m, _)| self.cfg.bump(hyp_dist0(m.apply(zf).expect("disk map"))))
            .sum()
    }

    fn eval_folded(&self, zf: C64) -> Result<C64> {
        let mut s = 0.0;
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in &self.neighbors {
            let p = self.cfg.bump(hyp_dist0(m.apply(zf)?));
            if p > 0.0 {
                s += p;
                acc += p * c.eval(zf);
            }
        }
        if s < 0.5 {
            return Err(Error::CoverageGap(s));
        }
        Ok(-acc / s)
    }
}

impl VectorField for PsiField {
    fn domain(&self) -> Domain {
        Domain::Disk
    }
    fn eval(&self, w: C64) -> Result<C64> {
        let (zf, gmap, cg) = self.fold(w);
        Ok(self.eval_folded(zf)? / gmap.derivative(w)? - cg.eval(w))
    }
}

/// β(Y) on the disk.
pub struct BetaQd<F> {
    pub field: F,
}

impl<F: VectorField> QuadDiff for BetaQd<F> {
    fn domain(&self) -> Domain {
        Domain::Disk
    }
    fn coeff(&self, z: C64) -> C64 {
        beta(&self.field, z, None).unwrap_or(C64::new(f64::NAN, f64::NAN))
    }
}

pub struct PsiResult {
    pub lift: PoissonExtension,
    pub qd: BetaQd<PoissonExtension>,
    pub boundary_normal_defect: f64,
}

fn lift(c: &Cocycle, g: &GroupPresentation, cfg: &PsiConfig) -> Result<(PoissonExtension, f64)> {
    // a numerically computed cocycle satisfies the relation only approximately
    let c = CohomologyBasis::new(g).project_z1(c);
    let psi = partition_psi(&c, g, cfg)?;
    let sharp = radial_l2_restriction(&psi, cfg.radius, cfg.samples)?;
    let defect = sharp.normal_defect();
    let x1 = split_tangential_h2(&sharp).tangential_part;
    Ok((poisson_extend(&x1)?, defect))
}

/// Ψ: cocycle ↦ β(ℱ(ψ♯)), ψ♯ the tangential part of the boundary values.
pub fn psi_map(c: &Cocycle, g: &GroupPresentation, cfg: &PsiConfig) -> Result<PsiResult> {
    let (y, defect) = lift(c, g, cfg)?;
    Ok(PsiResult { lift: y.clone(), qd: BetaQd { field: y }, boundary_normal_defect: defect })
}

/// The harmonic field 𝔜 = ℱ(ψ♯) with δ𝔜 = c up to Killing fields.
pub fn harmonic_lift(c: &Cocycle, g: &GroupPresentation, cfg: &PsiConfig) -> Result<PoissonExtension> {
    Ok(lift(c, g, cfg)?.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTrip {
    pub input: Cocycle,
    pub output: PhiResult,
    pub input_coords: Vec<f64>,
    pub output_coords: Vec<f64>,
    pub relative_error: f64,
}

/// Φ(Ψ(c)) compared with c in H¹ coordinates.
pub fn roundtrip(c: &Cocycle, g: &GroupPresentation, psi_cfg: &PsiConfig, phi_cfg: &PhiConfig) -> Result<RoundTrip> {
    let g = g.to_disk();
    let basis = CohomologyBasis::new(&g);
    let p = psi_map(c, &g, psi_cfg)?;
    let mut cfg = phi_cfg.clone();
    cfg.max_defect = cfg.max_defect.max(PSI_DEFECT_ALLOWANCE);
    let out = phi_map(&p.qd, &g, &cfg)?;
    let a: DVector<f64> = basis.h1_coords(c);
    let b: DVector<f64> = basis.h1_coords(&out.cocycle);
    let err = (&b - &a).norm() / a.norm().max(1e-300);
    Ok(RoundTrip {
        input: c.clone(),
        output: out,
        input_coords: a.iter().cloned().collect(),
        output_coords: b.iter().cloned().collect(),
        relative_error: err,
    })
}
