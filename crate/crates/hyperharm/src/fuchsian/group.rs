use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{IsometryClass, Model, MoebiusMap, Point, CLASSIFY_TOL};
use crate::C64;

/// Letters are `2·k + s`: generator k, inverted when s = 1.
pub type Word = Vec<u8>;

pub fn inverse_letter(l: u8) -> u8 {
    l ^ 1
}

pub fn inverse_word(w: &[u8]) -> Word {
    w.iter().rev().map(|&l| inverse_letter(l)).collect()
}

/// Free reduction.
pub fn reduce(w: &[u8]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&inverse_letter(l)) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Which generating set words are spelled in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alphabet {
    /// a₁, b₁, …, a_g, b_g
    Generators,
    /// Side pairings of the fundamental polygon.
    SidePairings,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub genus: usize,
    pub generators: Vec<MoebiusMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_pairings: Option<Vec<MoebiusMap>>,
}

#[derive(Clone, Debug)]
pub struct Element {
    pub word: Word,
    pub map: MoebiusMap,
}

/// Number of reduced words of length ≤ `l` in a free group of rank `r`.
pub fn reduced_word_count(r: u64, l: u32) -> u64 {
    let mut total = 1u64;
    let mut layer = 2 * r;
    for _ in 0..l {
        total = total.saturating_add(layer);
        layer = layer.saturating_mul(2 * r - 1);
    }
    total
}

pub const WORD_CAP: u64 = 1_000_000;

fn entry_dist(x: &MoebiusMap, y: &MoebiusMap) -> f64 {
    let ex = x.entries();
    let ey = y.entries();
    let d = |s: f64| (0..4).map(|i| (ex[i] - s * ey[i]).norm()).fold(0.0, f64::max);
    d(1.0).min(d(-1.0))
}

impl GroupPresentation {
    pub fn new(genus: usize, generators: Vec<MoebiusMap>, side_pairings: Option<Vec<MoebiusMap>>) -> Result<Self> {
        if generators.len() != 2 * genus || genus == 0 {
            return Err(Error::Config(format!(
                "genus {genus} needs {} generators, got {}",
                2 * genus,
                generators.len()
            )));
        }
        let g = GroupPresentation { genus, generators, side_pairings };
        let r = g.relation_residual();
        if r > 1e-9 {
            return Err(Error::ConstructionFailed(format!("relation residual {r:e}")));
        }
        Ok(g)
    }

    pub fn model(&self) -> Model {
        self.generators[0].model
    }

    /// The same group acting on the disk.
    pub fn to_disk(&self) -> GroupPresentation {
        if self.model() == Model::SU11 {
            return self.clone();
        }
        GroupPresentation {
            genus: self.genus,
            generators: self.generators.iter().map(|m| m.to_disk()).collect(),
            side_pairings: self.side_pairings.as_ref().map(|v| v.iter().map(|m| m.to_disk()).collect()),
        }
    }

    pub fn letters(&self, alphabet: Alphabet) -> &[MoebiusMap] {
        match alphabet {
            Alphabet::Generators => &self.generators,
            Alphabet::SidePairings => self.side_pairings.as_deref().unwrap_or(&self.generators),
        }
    }

    pub fn letter_map(&self, alphabet: Alphabet, l: u8) -> MoebiusMap {
        let m = self.letters(alphabet)[(l / 2) as usize];
        if l & 1 == 1 {
            m.inverse()
        } else {
            m
        }
    }

    pub fn eval_word(&self, alphabet: Alphabet, w: &[u8]) -> MoebiusMap {
        w.iter().fold(MoebiusMap::identity(self.model()), |acc, &l| acc.compose(&self.letter_map(alphabet, l)))
    }

    /// [a₁, b₁]···[a_g, b_g] as a word in the generators.
    pub fn relation_word(&self) -> Word {
        let mut w = Vec::with_capacity(4 * self.genus);
        for k in 0..self.genus {
            let a = (4 * k) as u8;
            let b = (4 * k + 2) as u8;
            w.extend_from_slice(&[a, b, a + 1, b + 1]);
        }
        w
    }

    /// The defining relator spelled in `alphabet`.
    pub fn relator(&self, alphabet: Alphabet) -> Word {
        match alphabet {
            Alphabet::Generators => self.relation_word(),
            Alphabet::SidePairings => {
                if self.side_pairings.is_some() && self.genus == 2 {
                    octagon_side_relator()
                } else {
                    self.relation_word()
                }
            }
        }
    }

    pub fn relation_residual(&self) -> f64 {
        let m = self.eval_word(Alphabet::Generators, &self.relation_word());
        entry_dist(&m, &MoebiusMap::identity(self.model()))
    }

    /// All reduced words of length ≤ `l` with their matrices.
    pub fn enumerate(&self, alphabet: Alphabet, l: u32) -> Result<Vec<Element>> {
        let rank = self.letters(alphabet).len() as u64;
        let count = reduced_word_count(rank, l);
        if count > WORD_CAP {
            return Err(Error::TruncationTooLarge(count));
        }
        let letters: Vec<MoebiusMap> = (0..2 * rank as u8).map(|x| self.letter_map(alphabet, x)).collect();
        let mut out = vec![Element { word: vec![], map: MoebiusMap::identity(self.model()) }];
        let mut start = 0;
        for _ in 0..l {
            let end = out.len();
            let layer = crate::par::map(&out[start..end], |e| {
                let last = e.word.last().copied();
                (0..2 * rank as u8)
                    .filter(|&x| last != Some(inverse_letter(x)))
                    .map(|x| {
                        let mut word = e.word.clone();
                        word.push(x);
                        Element { word, map: e.map.compose(&letters[x as usize]) }
                    })
                    .collect::<Vec<_>>()
            });
            out.extend(layer.into_iter().flatten());
            start = end;
        }
        Ok(out)
    }

    pub fn side_pairing_maps(&self) -> Vec<MoebiusMap> {
        let k = self.letters(Alphabet::SidePairings).len() as u8;
        (0..2 * k).map(|l| self.letter_map(Alphabet::SidePairings, l)).collect()
    }

    /// Words in the side pairings for the presentation generators.
    pub fn generator_words(&self) -> Vec<Word> {
        if self.side_pairings.is_some() && self.genus == 2 {
            octagon_generator_words()
        } else {
            (0..2 * self.genus as u8).map(|k| vec![2 * k]).collect()
        }
    }

    /// Words in the presentation generators for the side pairings.
    pub fn side_pairing_words(&self) -> Vec<Word> {
        if self.side_pairings.is_some() && self.genus == 2 {
            octagon_side_words()
        } else {
            (0..2 * self.genus as u8).map(|k| vec![2 * k]).collect()
        }
    }
}

/// Merge elements whose matrices agree within `tol` (relative to the
/// entry size, up to sign). Returns the representatives and, for each input,
/// the index of its representative.
pub fn dedup_elements(elems: &[Element], tol: f64) -> (Vec<Element>, Vec<usize>) {
    let key = |e: &Element| e.map.a.norm() + e.map.b.norm();
    let mut order: Vec<usize> = (0..elems.len()).collect();
    order.sort_by(|&i, &j| key(&elems[i]).total_cmp(&key(&elems[j])).then(i.cmp(&j)));
    let mut rep = vec![usize::MAX; elems.len()];
    let mut reps: Vec<usize> = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        let ki = key(&elems[i]);
        let scale = ki.max(1.0);
        let mut found = None;
        for &j in order[..pos].iter().rev() {
            if ki - key(&elems[j]) > tol * scale {
                break;
            }
            if rep[j] == j && entry_dist(&elems[i].map, &elems[j].map) <= tol * scale {
                found = Some(j);
                break;
            }
        }
        match found {
            Some(j) => rep[i] = j,
            None => {
                rep[i] = i;
                reps.push(i);
            }
        }
    }
    // canonical order: by input position (so shortest words first)
    reps.sort_unstable();
    let new_index: std::collections::HashMap<usize, usize> =
        reps.iter().enumerate().map(|(n, &i)| (i, n)).collect();
    let map = (0..elems.len()).map(|i| new_index[&rep[i]]).collect();
    (reps.iter().map(|&i| elems[i].clone()).collect(), map)
}

fn octagon_side(k: u32) -> MoebiusMap {
    let a = C64::new(1.0 + SQRT_2, 0.0);
    let b = C64::from_polar((2.0 + 2.0 * SQRT_2).sqrt(), PI * k as f64 / 4.0);
    MoebiusMap::raw(a, b, b.conj(), a.conj(), Model::SU11)
}

// side-pairing letters: g_k = 2k, g_k⁻¹ = 2k + 1
fn octagon_generator_words() -> Vec<Word> {
    vec![
        vec![0],       // a1 = g0
        vec![3, 4, 7], // b1 = g1⁻¹ g2 g3⁻¹
        vec![3, 4],    // a2 = g1⁻¹ g2
        vec![7, 2],    // b2 = g3⁻¹ g1
    ]
}

// generator letters: a1 = 0, b1 = 2, a2 = 4, b2 = 6
fn octagon_side_words() -> Vec<Word> {
    // x1 = a1, x4 = a2⁻¹b1, x2 = b2⁻¹a2⁻¹b1, x3 = x2⁻¹a2
    let x2: Word = vec![7, 5, 2];
    let x4: Word = vec![5, 2];
    let mut x3 = inverse_word(&x2);
    x3.push(4);
    vec![
        vec![0],                   // g0 = x1
        reduce(&inverse_word(&x2)), // g1 = x2⁻¹
        reduce(&x3),               // g2 = x3
        reduce(&inverse_word(&x4)), // g3 = x4⁻¹
    ]
}

fn octagon_side_relator() -> Word {
    // g0 g1⁻¹ g2 g3⁻¹ g0⁻¹ g1 g2⁻¹ g3
    vec![0, 3, 4, 7, 1, 2, 5, 6]
}

/// Genus-2 group of the regular octagon with angle sum 2π.
pub fn octagon_group() -> Result<GroupPresentation> {
    let sides: Vec<MoebiusMap> = (0..4).map(octagon_side).collect();
    let tmp = GroupPresentation { genus: 2, generators: sides.clone(), side_pairings: Some(sides.clone()) };
    let generators: Vec<MoebiusMap> = octagon_generator_words()
        .iter()
        .map(|w| tmp.eval_word(Alphabet::SidePairings, w))
        .collect();
    let g = GroupPresentation { genus: 2, generators, side_pairings: Some(sides) };
    let r = g.relation_residual();
    if r > 1e-9 {
        return Err(Error::ConstructionFailed(format!("relation residual {r:e}")));
    }
    let sr = g.eval_word(Alphabet::SidePairings, &octagon_side_relator());
    if entry_dist(&sr, &MoebiusMap::identity(Model::SU11)) > 1e-9 {
        return Err(Error::ConstructionFailed("side-pairing relation fails".into()));
    }
    Ok(g)
}

fn shares_fixed_point(a: &MoebiusMap, b: &MoebiusMap) -> Result<bool> {
    let fa = a.fixed_points()?;
    let fb = b.fixed_points()?;
    let close = |p: &Point, q: &Point| match (p, q) {
        (Point::Infinity, Point::Infinity) => true,
        (Point::Finite(x), Point::Finite(y)) => (x - y).norm() < 1e-9 * (1.0 + x.norm()),
        _ => false,
    };
    Ok(fa.iter().any(|p| fb.iter().any(|q| close(p, q))))
}

type M2 = Matrix2<C64>;

fn to_m2(m: &MoebiusMap) -> M2 {
    M2::new(m.a, m.b, m.c, m.d)
}

fn lie_basis(model: Model) -> [M2; 3] {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match model {
        Model::SL2R => [M2::new(one, o, o, -one), M2::new(o, one, o, o), M2::new(o, o, one, o)],
        Model::SU11 => [M2::new(i, o, o, -i), M2::new(o, one, one, o), M2::new(o, i, -i, o)],
    }
}

fn coords(model: Model, y: &M2) -> [f64; 3] {
    match model {
        Model::SL2R => [0.5 * (y[(0, 0)] - y[(1, 1)]).re, y[(0, 1)].re, y[(1, 0)].re],
        Model::SU11 => {
            let t = 0.5 * (y[(0, 0)] - y[(1, 1)]);
            [t.im, y[(0, 1)].re, y[(0, 1)].im]
        }
    }
}

/// exp of a traceless 2×2 matrix.
fn expm(x: &M2) -> M2 {
    let s2 = -(x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)]);
    let s = s2.sqrt();
    let (c, sh) = if s.norm() < 1e-8 {
        (C64::new(1.0, 0.0) + s2 / 2.0, C64::new(1.0, 0.0) + s2 / 6.0)
    } else {
        (s.cosh(), s.sinh() / s)
    };
    M2::identity() * c + x * sh
}

/// Numerical rank of the differential of (A, B) ↦ ABA⁻¹B⁻¹ at (A, B),
/// by central differences of step `h` in exponential coordinates.
pub fn commutator_rank(a: &MoebiusMap, b: &MoebiusMap, h: f64) -> Result<usize> {
    if a.classify(CLASSIFY_TOL) != IsometryClass::Hyperbolic || b.classify(CLASSIFY_TOL) != IsometryClass::Hyperbolic {
        return Err(Error::Config("commutator_rank needs hyperbolic inputs".into()));
    }
    if shares_fixed_point(a, b)? {
        return Err(Error::CommutingInputs);
    }
    let model = a.model;
    let basis = lie_basis(model);
    let (ma, mb) = (to_m2(a), to_m2(b));
    let comm = |x: &M2, y: &M2| x * y * x.try_inverse().unwrap() * y.try_inverse().unwrap();
    let r0inv = comm(&ma, &mb).try_inverse().ok_or(Error::PoleAtPoint)?;
    let eval = |u: [f64; 6]| {
        let xa: M2 = (0..3).map(|k| basis[k] * C64::new(u[k], 0.0)).sum();
        let xb: M2 = (0..3).map(|k| basis[k] * C64::new(u[3 + k], 0.0)).sum();
        let r = comm(&(ma * expm(&xa)), &(mb * expm(&xb)));
        coords(model, &(r0inv * r - M2::identity()))
    };
    let mut jac = DMatrix::<f64>::zeros(3, 6);
    for j in 0..6 {
        let mut up = [0.0; 6];
        let mut dn = [0.0; 6];
        up[j] = h;
        dn[j] = -h;
        let (p, m) = (eval(up), eval(dn));
        for i in 0..3 {
            jac[(i, j)] = (p[i] - m[i]) / (2.0 * h);
        }
    }
    // equilibrate columns then rows; diagonal scaling keeps the exact rank
    for j in 0..6 {
        let n = jac.column(j).norm();
        if n > 0.0 {
            jac.column_mut(j).scale_mut(1.0 / n);
        }
    }
    for i in 0..3 {
        let n = jac.row(i).norm();
        if n > 0.0 {
            jac.row_mut(i).scale_mut(1.0 / n);
        }
    }
    let sv = jac.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    Ok(sv.iter().filter(|&&s| s > 1e-6 * smax).count())
}
