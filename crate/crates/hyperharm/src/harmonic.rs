//! Explicit harmonic vector fields on the half-plane with prescribed β.

use crate::error::{Error, Result};
use crate::moebius::{cayley_deriv, cayley_inv};
use crate::qdiff::{BoundsReport, Domain, QuadDiff, VectorField};
use crate::quadrature::{geometric_edges, integrate, integrate_panels, segment_integral, QuadConfig};
use crate::{C64, I};

fn binom(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// conj(∫_w^z (z̄ − ζ)² f(ζ) dζ) along the straight segment. Solves
/// ∂ξ/∂z̄ = (z − z̄)² conj(f).
pub fn wolpert_field<F: Fn(C64) -> C64>(f: F, w: C64, z: C64, cfg: &QuadConfig) -> Result<C64> {
    let zb = z.conj();
    let v = segment_integral(|s| (zb - s) * (zb - s) * f(s), w, z, cfg)?;
    Ok(v.conj())
}

/// ∫_{Im z}^{c} iζ² conj(f(z̄ + 2iζ)) dζ.
pub fn xi_c<Q: QuadDiff + ?Sized>(q: &Q, c: f64, z: C64, cfg: &QuadConfig) -> Result<C64> {
    let y = z.im;
    if c < 0.0 || (!q.is_entire() && 2.0 * y.min(c) - y <= 0.0) {
        return Err(Error::DomainViolation);
    }
    let zb = z.conj();
    integrate(|t| I * t * t * q.coeff(zb + 2.0 * I * t).conj(), y, c, cfg)
}

/// ∫₀^{Im z} −iζ² (z − 2iζ)ⁿ dζ in closed form; β of this field is zⁿ.
#[derive(Clone, Copy, Debug)]
pub struct MonomialField {
    pub n: u32,
    pub shift: C64,
}

impl MonomialField {
    pub fn new(n: u32) -> Self {
        MonomialField { n, shift: C64::new(0.0, 0.0) }
    }

    /// Field for (z − a)ⁿ.
    pub fn shifted(n: u32, a: C64) -> Self {
        MonomialField { n, shift: a }
    }

    pub fn value(&self, z: C64) -> C64 {
        let n = self.n;
        let u = z - self.shift.conj();
        let y = z.im;
        let m2i = C64::new(0.0, -2.0);
        (0..=n)
            .map(|k| {
                let e = n - k;
                binom(n, k) * (-I) * m2i.powu(e) * u.powu(k) * y.powi(e as i32 + 3)
                    / (e as f64 + 3.0)
            })
            .sum()
    }
}

impl VectorField for MonomialField {
    fn domain(&self) -> Domain {
        Domain::HalfPlane
    }
    fn eval(&self, z: C64) -> Result<C64> {
        Ok(self.value(z))
    }
    fn exact_dzbar(&self, z: C64) -> Option<C64> {
        let y = z.im;
        Some(0.5 * y * y * (z - self.shift).conj().powu(self.n))
    }
}

pub fn monomial_field(n: u32, z: C64) -> C64 {
    MonomialField::new(n).value(z)
}

pub fn shifted_field(n: u32, a: C64, z: C64) -> C64 {
    MonomialField::shifted(n, a).value(z)
}

/// ξ = yⁿ f(z) along the real direction.
pub struct YPowerField<F> {
    pub n: i32,
    pub f: F,
}

impl<F: Fn(C64) -> C64 + Sync> YPowerField<F> {
    pub fn new(n: i32, f: F) -> Self {
        YPowerField { n, f }
    }

    /// −n i y^{n−3} conj(f(z)).
    pub fn predicted_qd(&self, z: C64) -> C64 {
        -(self.n as f64) * I * z.im.powi(self.n - 3) * (self.f)(z).conj()
    }
}

impl<F: Fn(C64) -> C64 + Sync> VectorField for YPowerField<F> {
    fn domain(&self) -> Domain {
        Domain::HalfPlane
    }
    fn eval(&self, z: C64) -> Result<C64> {
        Ok(z.im.powi(self.n) * (self.f)(z))
    }
}

pub const BOUNDARY_EPS: f64 = 1e-8;

/// The regularized field ξ^reg normalized at the base point i.
pub struct XiReg<Q> {
    pub q: Q,
    pub bounds: BoundsReport,
    pub tail_tol: f64,
    pub quad: QuadConfig,
    pub eps: f64,
    pub panel_ratio: f64,
    fi: C64,
}

impl<Q: QuadDiff> XiReg<Q> {
    pub fn new(q: Q, bounds: Option<BoundsReport>, tail_tol: f64) -> Result<Self> {
        let bounds = bounds.ok_or(Error::BoundsMissing)?;
        if !(bounds.d.is_finite() && bounds.k1.is_finite() && bounds.k2.is_finite()) {
            return Err(Error::BoundsMissing);
        }
        if !(tail_tol > 0.0) {
            return Err(Error::Config("tail_tol must be positive".into()));
        }
        let fi = q.coeff(I);
        Ok(XiReg {
            q,
            bounds,
            tail_tol,
            quad: QuadConfig { abs_tol: tail_tol / 10.0, rel_tol: 1e-11, max_subdivisions: 20_000 },
            eps: BOUNDARY_EPS,
            panel_ratio: 1.5,
            fi,
        })
    }

    /// Subtracted Leibniz constant: ξ^reg picks up −K(z − i).
    pub fn leibniz_constant(&self) -> C64 {
        -self.fi.conj() / 2.0
    }

    /// Certified tail |z − i|² K2 / (4c).
    pub fn tail_bound(&self, z: C64, c: f64) -> f64 {
        (z - I).norm_sqr() * self.bounds.k2 / (4.0 * c)
    }

    pub fn cutoff(&self, z: C64) -> f64 {
        self.cutoff_for(z, self.tail_tol)
    }

    /// Smallest admissible cutoff with certified tail below `tol`.
    pub fn cutoff_for(&self, z: C64, tol: f64) -> f64 {
        let base = 2.0 * z.im.max(1.0);
        base.max((z - I).norm_sqr() * self.bounds.k2 / (4.0 * tol))
    }

    pub fn eval_at(&self, z: C64) -> Result<C64> {
        self.eval_with(z, self.cutoff(z), self.eps)
    }

    /// Value with absolute accuracy target `tol` (tail and quadrature).
    pub fn eval_tol(&self, z: C64, tol: f64) -> Result<C64> {
        let quad = QuadConfig { abs_tol: tol / 10.0, ..self.quad };
        self.eval_full(z, self.cutoff_for(z, tol), self.eps, &quad)
    }

    /// Value at a finite cutoff `c` and boundary lower limit `eps`.
    pub fn eval_with(&self, z: C64, c: f64, eps: f64) -> Result<C64> {
        self.eval_full(z, c, eps, &self.quad)
    }

    fn eval_full(&self, z: C64, c: f64, eps: f64, quad: &QuadConfig) -> Result<C64> {
        if z.im < 0.0 {
            return Err(Error::DomainViolation);
        }
        let y = z.im;
        let zb = z.conj();
        let zi = z - I;
        let q = &self.q;
        let g = |t: f64| q.coeff(zb + 2.0 * I * t).conj();
        let gi = |t: f64| {
            let (f, f1) = q.value_and_derivative(-I + 2.0 * I * t);
            (f.conj(), f1.conj())
        };
        let rem = |t: f64| {
            let (a, b) = gi(t);
            I * t * t * (g(t) - a - zi * b)
        };
        let edges = |a: f64, b: f64| geometric_edges(a, b, self.panel_ratio, 0.05);
        let v = if y <= 1.0 {
            let lower = y.max(eps);
            let head = if lower < 1.0 {
                integrate_panels(|t| I * t * t * g(t), &[lower, 0.5 * (lower + 1.0), 1.0], quad)?
            } else {
                C64::new(0.0, 0.0)
            };
            integrate_panels(rem, &edges(1.0, c), quad)? + head
        } else {
            let taylor = integrate_panels(
                |t| {
                    let (a, b) = gi(t);
                    I * t * t * (a + zi * b)
                },
                &edges(1.0, y),
                quad,
            )?;
            integrate_panels(rem, &edges(y, c), quad)? - taylor
        };
        Ok(v - self.leibniz_constant() * zi)
    }
}

impl<Q: QuadDiff> VectorField for XiReg<Q> {
    fn domain(&self) -> Domain {
        Domain::HalfPlane
    }
    fn eval(&self, z: C64) -> Result<C64> {
        self.eval_at(z)
    }
}

/// χ(C(z)) = C′(z) ξ^reg(z) on the closed disk, with χ(1) = 0. Since
/// |C′(z)| = 2/|z + i|², ξ^reg is evaluated to absolute accuracy
/// tail_tol·max(1, |z + i|²/2), which keeps χ within tail_tol.
pub struct DiskExtension<'a, Q>(pub &'a XiReg<Q>);

impl<Q: QuadDiff> DiskExtension<'_, Q> {
    pub fn eval_closed(&self, w: C64) -> Result<C64> {
        closed_disk_extension(self.0, w)
    }
}

impl<Q: QuadDiff> VectorField for DiskExtension<'_, Q> {
    fn domain(&self) -> Domain {
        Domain::Disk
    }
    fn eval(&self, w: C64) -> Result<C64> {
        closed_disk_extension(self.0, w)
    }
}

pub fn closed_disk_extension<Q: QuadDiff>(x: &XiReg<Q>, w: C64) -> Result<C64> {
    if (w - 1.0).norm() < 1e-14 {
        return Ok(C64::new(0.0, 0.0));
    }
    if w.norm() > 1.0 + 1e-12 {
        return Err(Error::DomainViolation);
    }
    let mut z = cayley_inv(w)?;
    if (w.norm() - 1.0).abs() < 1e-12 {
        z = C64::new(z.re, 0.0);
    }
    let tol = x.tail_tol * (0.5 * (z + I).norm_sqr()).max(1.0);
    Ok(cayley_deriv(z)? * x.eval_tol(z, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), 10.0);
        assert_eq!(binom(3, 0), 1.0);
        assert_eq!(binom(3, 3), 1.0);
    }

    #[test]
    fn monomial_zero_closed_form() {
        let z = C64::new(0.4, 1.7);
        let v = monomial_field(0, z);
        assert!((v - (-I * z.im.powi(3) / 3.0)).norm() < 1e-14);
    }
}
