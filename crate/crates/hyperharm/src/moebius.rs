//! Möbius maps of the half-plane (SL(2,R)) and the disk (SU(1,1)).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qdiff::{Domain, VectorField};
use crate::{C64, I};

pub const DET_TOL: f64 = 1e-10;
pub const POLE_TOL: f64 = 1e-14;
pub const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Model {
    SL2R,
    SU11,
}

impl Model {
    pub fn domain(self) -> Domain {
        match self {
            Model::SL2R => Domain::HalfPlane,
            Model::SU11 => Domain::Disk,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsometryClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// A point of the closed model, with the distinguished point at infinity of
/// the half-plane boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Finite(C64),
    Infinity,
}

impl Point {
    pub fn finite(self) -> Option<C64> {
        match self {
            Point::Finite(z) => Some(z),
            Point::Infinity => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MoebiusMap {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
    pub model: Model,
}

#[derive(Serialize, Deserialize)]
struct MapJson {
    model: Model,
    a: [f64; 2],
    b: [f64; 2],
    c: [f64; 2],
    d: [f64; 2],
}

impl Serialize for MoebiusMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let p = |z: C64| [z.re, z.im];
        MapJson {
            model: self.model,
            a: p(self.a),
            b: p(self.b),
            c: p(self.c),
            d: p(self.d),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MoebiusMap {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MapJson::deserialize(d)?;
        let z = |p: [f64; 2]| C64::new(p[0], p[1]);
        MoebiusMap::new(z(j.a), z(j.b), z(j.c), z(j.d), j.model).map_err(serde::de::Error::custom)
    }
}

fn sign_normalize(e: [C64; 4]) -> [C64; 4] {
    let lead = e.iter().find(|x| x.norm() > 1e-300).copied().unwrap_or(C64::new(1.0, 0.0));
    let flip = lead.re < 0.0 || (lead.re == 0.0 && lead.im < 0.0);
    if flip {
        e.map(|x| -x)
    } else {
        e
    }
}

impl MoebiusMap {
    /// Checked constructor: unit determinant and the model's entry constraints.
    pub fn new(a: C64, b: C64, c: C64, d: C64, model: Model) -> Result<Self> {
        let det = a * d - b * c;
        if (det - 1.0).norm() > DET_TOL {
            return Err(Error::ConstraintViolation(format!("determinant {det} != 1")));
        }
        let m = Self::raw(a, b, c, d, model);
        m.check_model()?;
        Ok(m)
    }

    /// Rescales by a square root of the determinant.
    pub fn from_unnormalized(a: C64, b: C64, c: C64, d: C64, model: Model) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() < 1e-300 {
            return Err(Error::ConstraintViolation("singular matrix".into()));
        }
        let mut s = det.sqrt();
        if model == Model::SL2R && det.re < 0.0 {
            return Err(Error::ConstraintViolation("negative determinant".into()));
        }
        if model == Model::SL2R {
            s = C64::new(s.re, 0.0);
        }
        let m = Self::raw(a / s, b / s, c / s, d / s, model);
        m.check_model()?;
        Ok(m)
    }

    pub(crate) fn raw(a: C64, b: C64, c: C64, d: C64, model: Model) -> Self {
        let [a, b, c, d] = sign_normalize([a, b, c, d]);
        MoebiusMap { a, b, c, d, model }
    }

    fn check_model(&self) -> Result<()> {
        let ok = match self.model {
            Model::SL2R => [self.a, self.b, self.c, self.d].iter().all(|x| x.im.abs() <= DET_TOL),
            Model::SU11 => {
                (self.d - self.a.conj()).norm() <= DET_TOL && (self.c - self.b.conj()).norm() <= DET_TOL
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::ConstraintViolation(format!("entries violate the {:?} form", self.model)))
        }
    }

    pub fn identity(model: Model) -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self::raw(one, zero, zero, one, model)
    }

    pub fn sl2r(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::new(a.into(), b.into(), c.into(), d.into(), Model::SL2R)
    }

    /// The SU(1,1) matrix [[a, b], [b̄, ā]].
    pub fn su11(a: C64, b: C64) -> Result<Self> {
        Self::new(a, b, b.conj(), a.conj(), Model::SU11)
    }

    pub fn entries(&self) -> [C64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn det(&self) -> C64 {
        self.a * self.d - self.b * self.c
    }

    /// Matrix product, so that `self.compose(o)` acts as z ↦ self(o(z)).
    pub fn compose(&self, o: &MoebiusMap) -> MoebiusMap {
        let a = self.a * o.a + self.b * o.c;
        let b = self.a * o.b + self.b * o.d;
        let c = self.c * o.a + self.d * o.c;
        let d = self.c * o.b + self.d * o.d;
        Self::raw(a, b, c, d, self.model)
    }

    pub fn inverse(&self) -> MoebiusMap {
        Self::raw(self.d, -self.b, -self.c, self.a, self.model)
    }

    fn denom(&self, z: C64) -> Result<C64> {
        let den = self.c * z + self.d;
        if den.norm() < POLE_TOL {
            Err(Error::PoleAtPoint)
        } else {
            Ok(den)
        }
    }

    pub fn apply(&self, z: C64) -> Result<C64> {
        let den = self.denom(z)?;
        Ok((self.a * z + self.b) / den)
    }

    pub fn apply_point(&self, p: Point) -> Point {
        match p {
            Point::Infinity => {
                if self.c.norm() < POLE_TOL {
                    Point::Infinity
                } else {
                    Point::Finite(self.a / self.c)
                }
            }
            Point::Finite(z) => match self.apply(z) {
                Ok(w) => Point::Finite(w),
                Err(_) => Point::Infinity,
            },
        }
    }

    pub fn derivative(&self, z: C64) -> Result<C64> {
        let den = self.denom(z)?;
        Ok(1.0 / (den * den))
    }

    pub fn second_derivative(&self, z: C64) -> Result<C64> {
        let den = self.denom(z)?;
        Ok(-2.0 * self.c / (den * den * den))
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    /// trace², real for both models.
    pub fn trace_sq(&self) -> f64 {
        let t = self.trace();
        (t * t).re
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        let one = C64::new(1.0, 0.0);
        let e = self.entries();
        let dist = |s: f64| {
            (e[0] - s * one).norm() + e[1].norm() + e[2].norm() + (e[3] - s * one).norm()
        };
        dist(1.0) <= tol || dist(-1.0) <= tol
    }

    pub fn classify(&self, tol: f64) -> IsometryClass {
        if self.is_identity(tol) {
            return IsometryClass::Identity;
        }
        let t2 = self.trace_sq();
        if (t2 - 4.0).abs() <= tol {
            IsometryClass::Parabolic
        } else if t2 < 4.0 {
            IsometryClass::Elliptic
        } else {
            IsometryClass::Hyperbolic
        }
    }

    fn in_domain(&self, z: C64, tol: f64) -> bool {
        match self.model {
            Model::SL2R => z.im > tol,
            Model::SU11 => z.norm() < 1.0 - tol,
        }
    }

    /// Fixed points in the closed model: two boundary points for hyperbolic
    /// maps, one for parabolic, the interior one for elliptic.
    pub fn fixed_points(&self) -> Result<Vec<Point>> {
        let class = self.classify(CLASSIFY_TOL);
        if class == IsometryClass::Identity {
            return Err(Error::IdentityMap);
        }
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let mut roots: Vec<Point> = Vec::with_capacity(2);
        if c.norm() < 1e-14 {
            roots.push(Point::Infinity);
            if (d - a).norm() > 1e-12 {
                roots.push(Point::Finite(b / (d - a)));
            }
        } else {
            let p = d - a;
            let disc = (p * p + 4.0 * b * c).sqrt();
            match class {
                IsometryClass::Parabolic => roots.push(Point::Finite((a - d) / (2.0 * c))),
                _ => {
                    // stable pair of roots of c z² + p z − b
                    let s = if (p.conj() * disc).re >= 0.0 { -p - disc } else { -p + disc };
                    let z1 = s / (2.0 * c);
                    let z2 = if s.norm() > 1e-300 { -2.0 * b / s } else { (-p - s) / (2.0 * c) };
                    roots.push(Point::Finite(z1));
                    roots.push(Point::Finite(z2));
                }
            }
        }
        if class == IsometryClass::Elliptic {
            roots.retain(|p| matches!(p, Point::Finite(z) if self.in_domain(*z, 0.0)));
            roots.truncate(1);
        }
        Ok(roots)
    }

    /// Conjugate an SL(2,R) map to the disk: C∘m∘C⁻¹.
    pub fn to_disk(&self) -> MoebiusMap {
        let cm = cayley_matrix();
        let ci = cayley_inv_matrix();
        let e = mat_mul(mat_mul(cm, self.entries()), ci);
        // conjugation preserves the determinant; clean residual rounding
        let m = Self::raw(e[0], e[1], e[2], e[3], Model::SU11);
        let a = 0.5 * (m.a + m.d.conj());
        let b = 0.5 * (m.b + m.c.conj());
        Self::raw(a, b, b.conj(), a.conj(), Model::SU11)
    }

    /// Conjugate an SU(1,1) map to the half-plane: C⁻¹∘m∘C.
    pub fn to_half_plane(&self) -> MoebiusMap {
        let cm = cayley_matrix();
        let ci = cayley_inv_matrix();
        let e = mat_mul(mat_mul(ci, self.entries()), cm);
        let r = |z: C64| C64::new(z.re, 0.0);
        Self::raw(r(e[0]), r(e[1]), r(e[2]), r(e[3]), Model::SL2R)
    }
}

fn mat_mul(x: [C64; 4], y: [C64; 4]) -> [C64; 4] {
    [
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    ]
}

fn cayley_matrix() -> [C64; 4] {
    let s = (2.0 * I).sqrt();
    let one = C64::new(1.0, 0.0);
    [one / s, -I / s, one / s, I / s]
}

fn cayley_inv_matrix() -> [C64; 4] {
    let [a, b, c, d] = cayley_matrix();
    [d, -b, -c, a]
}

/// C(z) = (z − i)/(z + i).
pub fn cayley(z: C64) -> Result<C64> {
    let den = z + I;
    if den.norm() < POLE_TOL {
        return Err(Error::PoleAtPoint);
    }
    Ok((z - I) / den)
}

pub fn cayley_point(p: Point) -> Result<C64> {
    match p {
        Point::Infinity => Ok(C64::new(1.0, 0.0)),
        Point::Finite(z) => cayley(z),
    }
}

/// C⁻¹(w) = i(1 + w)/(1 − w).
pub fn cayley_inv(w: C64) -> Result<C64> {
    let den = 1.0 - w;
    if den.norm() < POLE_TOL {
        return Err(Error::PoleAtPoint);
    }
    Ok(I * (1.0 + w) / den)
}

pub fn cayley_inv_point(w: C64) -> Point {
    match cayley_inv(w) {
        Ok(z) => Point::Finite(z),
        Err(_) => Point::Infinity,
    }
}

pub fn cayley_deriv(z: C64) -> Result<C64> {
    let den = z + I;
    if den.norm() < POLE_TOL {
        return Err(Error::PoleAtPoint);
    }
    Ok(2.0 * I / (den * den))
}

pub fn cayley_deriv2(z: C64) -> Result<C64> {
    let den = z + I;
    if den.norm() < POLE_TOL {
        return Err(Error::PoleAtPoint);
    }
    Ok(-4.0 * I / (den * den * den))
}

/// (C⁻¹)′(w) = 2i/(1 − w)².
pub fn cayley_inv_deriv(w: C64) -> Result<C64> {
    let den = 1.0 - w;
    if den.norm() < POLE_TOL {
        return Err(Error::PoleAtPoint);
    }
    Ok(2.0 * I / (den * den))
}

/// The disk isometry w ↦ (w + z)/(z̄w + 1), sending 0 to z.
pub fn zero_to_z(z: C64) -> Result<MoebiusMap> {
    let r2 = z.norm_sqr();
    if r2 >= 1.0 {
        return Err(Error::ConstraintViolation(format!("|z| = {} >= 1", r2.sqrt())));
    }
    let s = (1.0 - r2).sqrt();
    let one = C64::new(1.0 / s, 0.0);
    Ok(MoebiusMap::raw(one, z / s, z.conj() / s, one, Model::SU11))
}

/// Element [[a, b], [b̄, ā]] of SU(1,1) fixing the boundary point 1.
pub fn stab1_element(a: C64, b: C64) -> Result<MoebiusMap> {
    let det = a.norm_sqr() - b.norm_sqr();
    if (det - 1.0).abs() > DET_TOL {
        return Err(Error::ConstraintViolation(format!("|a|^2 - |b|^2 = {det}")));
    }
    if (a + b).im.abs() > DET_TOL {
        return Err(Error::ConstraintViolation(format!("a + b = {} not real", a + b)));
    }
    Ok(MoebiusMap::raw(a, b, b.conj(), a.conj(), Model::SU11))
}

/// (m*ξ)(z) = ξ(m(z)) / m′(z).
pub struct Pullback<'a, F: ?Sized> {
    pub map: MoebiusMap,
    pub field: &'a F,
}

impl<F: VectorField + ?Sized> VectorField for Pullback<'_, F> {
    fn domain(&self) -> Domain {
        self.field.domain()
    }

    fn eval(&self, z: C64) -> Result<C64> {
        let w = self.map.apply(z)?;
        Ok(self.field.eval(w)? / self.map.derivative(z)?)
    }
}

pub fn pullback_field<'a, F: VectorField + ?Sized>(m: &MoebiusMap, xi: &'a F) -> Pullback<'a, F> {
    Pullback { map: *m, field: xi }
}

/// (m_*ξ)(m(z)) = m′(z) ξ(z), the pullback by m⁻¹.
pub fn pushforward_field<'a, F: VectorField + ?Sized>(m: &MoebiusMap, xi: &'a F) -> Pullback<'a, F> {
    Pullback { map: m.inverse(), field: xi }
}

/// A disk field transported to the half-plane: ξ(z) = X(Cz) / C′(z).
pub struct DiskToHalfPlane<'a, F: ?Sized>(pub &'a F);

impl<F: VectorField + ?Sized> VectorField for DiskToHalfPlane<'_, F> {
    fn domain(&self) -> Domain {
        Domain::HalfPlane
    }

    fn eval(&self, z: C64) -> Result<C64> {
        Ok(self.0.eval(cayley(z)?)? / cayley_deriv(z)?)
    }
}

/// A half-plane field transported to the disk: X(w) = C′(z) ξ(z), z = C⁻¹w.
pub struct HalfPlaneToDisk<'a, F: ?Sized>(pub &'a F);

impl<F: VectorField + ?Sized> VectorField for HalfPlaneToDisk<'_, F> {
    fn domain(&self) -> Domain {
        Domain::Disk
    }

    fn eval(&self, w: C64) -> Result<C64> {
        let z = cayley_inv(w)?;
        Ok(cayley_deriv(z)? * self.0.eval(z)?)
    }
}
