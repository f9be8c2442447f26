//! Vector fields, quadratic differentials, the map β, harmonicity residuals
//! and the bounded-geometry norms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{cayley_inv, cayley_inv_deriv, DiskToHalfPlane};
use crate::{C64, I};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    HalfPlane,
    Disk,
}

/// λ² of the hyperbolic metric.
pub fn conformal_factor_sq(d: Domain, z: C64) -> f64 {
    match d {
        Domain::HalfPlane => 1.0 / (z.im * z.im),
        Domain::Disk => {
            let s = 1.0 - z.norm_sqr();
            4.0 / (s * s)
        }
    }
}

/// Scale taking the β normalization to the potential-equation normalization
/// ∂ξ/∂z̄ = (z − z̄)² conj(f).
pub const WOLPERT_SCALE: f64 = -1.0 / 8.0;

pub fn default_step(z: C64) -> f64 {
    1e-4 * z.norm().max(1.0)
}

/// A tangent vector field, identified with a complex function.
pub trait VectorField: Sync {
    fn domain(&self) -> Domain;
    fn eval(&self, z: C64) -> Result<C64>;
    /// Exact ∂ξ/∂z̄ where a closed form is known.
    fn exact_dzbar(&self, _z: C64) -> Option<C64> {
        None
    }
}

impl<T: VectorField + ?Sized> VectorField for &T {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval(&self, z: C64) -> Result<C64> {
        (**self).eval(z)
    }
    fn exact_dzbar(&self, z: C64) -> Option<C64> {
        (**self).exact_dzbar(z)
    }
}

impl<T: VectorField + ?Sized> VectorField for Box<T> {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn eval(&self, z: C64) -> Result<C64> {
        (**self).eval(z)
    }
    fn exact_dzbar(&self, z: C64) -> Option<C64> {
        (**self).exact_dzbar(z)
    }
}

pub struct FnField<F> {
    pub domain: Domain,
    pub f: F,
}

impl<F: Fn(C64) -> C64 + Sync> FnField<F> {
    pub fn new(domain: Domain, f: F) -> Self {
        FnField { domain, f }
    }
}

impl<F: Fn(C64) -> C64 + Sync> VectorField for FnField<F> {
    fn domain(&self) -> Domain {
        self.domain
    }
    fn eval(&self, z: C64) -> Result<C64> {
        Ok((self.f)(z))
    }
}

pub struct TryFnField<F> {
    pub domain: Domain,
    pub f: F,
}

impl<F: Fn(C64) -> Result<C64> + Sync> VectorField for TryFnField<F> {
    fn domain(&self) -> Domain {
        self.domain
    }
    fn eval(&self, z: C64) -> Result<C64> {
        (self.f)(z)
    }
}

/// A field with a closed-form ∂/∂z̄.
pub struct ExactField<F, G> {
    pub domain: Domain,
    pub f: F,
    pub dzbar: G,
}

impl<F, G> VectorField for ExactField<F, G>
where
    F: Fn(C64) -> C64 + Sync,
    G: Fn(C64) -> C64 + Sync,
{
    fn domain(&self) -> Domain {
        self.domain
    }
    fn eval(&self, z: C64) -> Result<C64> {
        Ok((self.f)(z))
    }
    fn exact_dzbar(&self, z: C64) -> Option<C64> {
        Some((self.dzbar)(z))
    }
}

/// The coefficient f of q = f dz².
pub trait QuadDiff: Sync {
    fn domain(&self) -> Domain;
    fn coeff(&self, z: C64) -> C64;
    /// Holomorphic on all of ℂ (polynomials).
    fn is_entire(&self) -> bool {
        false
    }
    /// (f, f′, f″). The default uses a 16-point Cauchy formula on a circle
    /// of a tenth of the distance to the boundary.
    fn derivs(&self, z: C64) -> [C64; 3] {
        let dist = match self.domain() {
            Domain::HalfPlane => z.im,
            Domain::Disk => 1.0 - z.norm(),
        };
        let r = if self.is_entire() { 0.1 * z.norm().max(1.0) } else { 0.1 * dist };
        cauchy_derivs(|w| self.coeff(w), z, r)
    }
    /// (f, f′).
    fn value_and_derivative(&self, z: C64) -> (C64, C64) {
        let [f, f1, _] = self.derivs(z);
        (f, f1)
    }
}

impl<T: QuadDiff + ?Sized> QuadDiff for &T {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn coeff(&self, z: C64) -> C64 {
        (**self).coeff(z)
    }
    fn is_entire(&self) -> bool {
        (**self).is_entire()
    }
    fn derivs(&self, z: C64) -> [C64; 3] {
        (**self).derivs(z)
    }
    fn value_and_derivative(&self, z: C64) -> (C64, C64) {
        (**self).value_and_derivative(z)
    }
}

impl<T: QuadDiff + ?Sized> QuadDiff for Box<T> {
    fn domain(&self) -> Domain {
        (**self).domain()
    }
    fn coeff(&self, z: C64) -> C64 {
        (**self).coeff(z)
    }
    fn is_entire(&self) -> bool {
        (**self).is_entire()
    }
    fn derivs(&self, z: C64) -> [C64; 3] {
        (**self).derivs(z)
    }
    fn value_and_derivative(&self, z: C64) -> (C64, C64) {
        (**self).value_and_derivative(z)
    }
}

pub fn cauchy_derivs<F: Fn(C64) -> C64>(f: F, z: C64, r: f64) -> [C64; 3] {
    const M: usize = 16;
    let mut d1 = C64::new(0.0, 0.0);
    let mut d2 = C64::new(0.0, 0.0);
    for j in 0..M {
        let e = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / M as f64);
        let v = f(z + r * e);
        d1 += v * e.conj();
        d2 += v * e.conj() * e.conj();
    }
    let m = M as f64;
    [f(z), d1 / (m * r), 2.0 * d2 / (m * r * r)]
}

pub struct FnQuadDiff<F> {
    pub domain: Domain,
    pub f: F,
    pub entire: bool,
}

impl<F: Fn(C64) -> C64 + Sync> FnQuadDiff<F> {
    pub fn new(domain: Domain, f: F) -> Self {
        FnQuadDiff { domain, f, entire: false }
    }
}

impl<F: Fn(C64) -> C64 + Sync> QuadDiff for FnQuadDiff<F> {
    fn domain(&self) -> Domain {
        self.domain
    }
    fn coeff(&self, z: C64) -> C64 {
        (self.f)(z)
    }
    fn is_entire(&self) -> bool {
        self.entire
    }
}

/// (z − a)ⁿ on the half-plane.
#[derive(Clone, Copy, Debug)]
pub struct ShiftedPower {
    pub n: u32,
    pub a: C64,
}

impl QuadDiff for ShiftedPower {
    fn domain(&self) -> Domain {
        Domain::HalfPlane
    }
    fn coeff(&self, z: C64) -> C64 {
        (z - self.a).powu(self.n)
    }
    fn is_entire(&self) -> bool {
        true
    }
    fn derivs(&self, z: C64) -> [C64; 3] {
        let u = z - self.a;
        let n = self.n;
        let p = |k: u32| if k <= n { u.powu(n - k) } else { C64::new(0.0, 0.0) };
        let nf = n as f64;
        [p(0), nf * p(1), nf * (nf - 1.0) * p(2)]
    }
}

/// (z + i)^(−4), bounded on the half-plane.
#[derive(Clone, Copy, Debug, Default)]
pub struct RationalQd;

impl QuadDiff for RationalQd {
    fn domain(&self) -> Domain {
        Domain::HalfPlane
    }
    fn coeff(&self, z: C64) -> C64 {
        (z + I).powi(-4)
    }
    fn derivs(&self, z: C64) -> [C64; 3] {
        let u = z + I;
        [u.powi(-4), -4.0 * u.powi(-5), 20.0 * u.powi(-6)]
    }
}

impl RationalQd {
    /// D, K1, K2 sampled on x ∈ [−4, 4], y ∈ [0.05, 6]. All three
    /// covariant norms peak near y ≈ 1 and decay in every direction.
    pub fn bounds() -> BoundsReport {
        derivative_bounds(&RationalQd, &rect_grid(-4.0, 4.0, 33, 0.05, 6.0, 40))
    }
}

/// Zero differential.
#[derive(Clone, Copy, Debug)]
pub struct ZeroQd(pub Domain);

impl QuadDiff for ZeroQd {
    fn domain(&self) -> Domain {
        self.0
    }
    fn coeff(&self, _z: C64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn is_entire(&self) -> bool {
        true
    }
    fn derivs(&self, _z: C64) -> [C64; 3] {
        [C64::new(0.0, 0.0); 3]
    }
}

fn check_interior(d: Domain, z: C64, h: f64) -> Result<()> {
    let dist = match d {
        Domain::HalfPlane => z.im,
        Domain::Disk => 1.0 - z.norm(),
    };
    if dist <= 2.0 * h {
        Err(Error::TooCloseToBoundary(format!("z = {z}, step {h}")))
    } else {
        Ok(())
    }
}

/// Central-difference ∂/∂z̄ = ½(∂x + i∂y).
pub fn fd_dzbar<F: Fn(C64) -> Result<C64>>(f: F, z: C64, h: f64) -> Result<C64> {
    let hx = C64::new(h, 0.0);
    let hy = C64::new(0.0, h);
    let dx = (f(z + hx)? - f(z - hx)?) / (2.0 * h);
    let dy = (f(z + hy)? - f(z - hy)?) / (2.0 * h);
    Ok(0.5 * (dx + I * dy))
}

/// Central-difference ∂/∂z = ½(∂x − i∂y).
pub fn fd_dz<F: Fn(C64) -> Result<C64>>(f: F, z: C64, h: f64) -> Result<C64> {
    let hx = C64::new(h, 0.0);
    let hy = C64::new(0.0, h);
    let dx = (f(z + hx)? - f(z - hx)?) / (2.0 * h);
    let dy = (f(z + hy)? - f(z - hy)?) / (2.0 * h);
    Ok(0.5 * (dx - I * dy))
}

fn beta_half_plane<F: VectorField + ?Sized>(xi: &F, z: C64, h: f64) -> Result<C64> {
    check_interior(Domain::HalfPlane, z, h)?;
    let dzb = match xi.exact_dzbar(z) {
        Some(v) => v,
        None => fd_dzbar(|w| xi.eval(w), z, h)?,
    };
    let y = z.im;
    Ok((2.0 / (y * y) * dzb).conj())
}

/// β(ξ)(z): the f with conj(f) = −8/(z − z̄)² ∂ξ/∂z̄. Disk fields are
/// transported to the half-plane, where the step `h` applies.
pub fn beta<F: VectorField + ?Sized>(xi: &F, z: C64, h: Option<f64>) -> Result<C64> {
    match xi.domain() {
        Domain::HalfPlane => beta_half_plane(xi, z, h.unwrap_or_else(|| default_step(z))),
        Domain::Disk => {
            if let Some(d) = xi.exact_dzbar(z) {
                // same value as the transported definition, in closed form
                let s = 1.0 - z.norm_sqr();
                return Ok((8.0 / (s * s) * d).conj());
            }
            let zh = cayley_inv(z)?;
            let hh = h.unwrap_or_else(|| default_step(zh).min(0.2 * zh.im));
            let fh = beta_half_plane(&DiskToHalfPlane(xi), zh, hh)?;
            let d = cayley_inv_deriv(z)?;
            Ok(fh * d * d)
        }
    }
}

fn residual_half_plane<F: Fn(C64) -> Result<C64>>(xi: F, z: C64, h: f64) -> Result<(f64, f64)> {
    check_interior(Domain::HalfPlane, z, h)?;
    let hx = C64::new(h, 0.0);
    let hy = C64::new(0.0, h);
    let c = xi(z)?;
    let (e1, w1, n1, s1) = (xi(z + hx)?, xi(z - hx)?, xi(z + hy)?, xi(z - hy)?);
    let (e2, w2, n2, s2) = (xi(z + 2.0 * hx)?, xi(z - 2.0 * hx)?, xi(z + 2.0 * hy)?, xi(z - 2.0 * hy)?);
    // 5-point central stencils
    let d2 = |p2: C64, p1: C64, m1: C64, m2: C64| (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
    let d1 = |p2: C64, p1: C64, m1: C64, m2: C64| (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
    let xx = d2(e2, e1, w1, w2);
    let yy = d2(n2, n1, s1, s2);
    let dx = d1(e2, e1, w1, w2);
    let dy = d1(n2, n1, s1, s2);
    let y = z.im;
    let r1 = xx.re + yy.re - 2.0 / y * (dx.im + dy.re);
    let r2 = xx.im + yy.im + 2.0 / y * (dx.re - dy.im);
    Ok((r1, r2))
}

/// Residuals of the two linearized harmonicity equations. For disk fields
/// `z` is a disk point and the residual is taken at C⁻¹(z) after transport.
pub fn harmonic_residual<F: VectorField + ?Sized>(xi: &F, z: C64, h: Option<f64>) -> Result<(f64, f64)> {
    match xi.domain() {
        Domain::HalfPlane => {
            residual_half_plane(|w| xi.eval(w), z, h.unwrap_or_else(|| default_step(z)))
        }
        Domain::Disk => {
            let zh = cayley_inv(z)?;
            let hh = h.unwrap_or_else(|| default_step(zh).min(0.2 * zh.im));
            let t = DiskToHalfPlane(xi);
            residual_half_plane(|w| t.eval(w), zh, hh)
        }
    }
}

/// |∂f/∂z̄| by central differences.
pub fn holomorphy_residual<Q: QuadDiff + ?Sized>(q: &Q, z: C64, h: Option<f64>) -> Result<f64> {
    let h = h.unwrap_or_else(|| default_step(z));
    check_interior(q.domain(), z, h)?;
    Ok(fd_dzbar(|w| Ok(q.coeff(w)), z, h)?.norm())
}

pub fn qd_norm<Q: QuadDiff + ?Sized>(q: &Q, z: C64) -> f64 {
    let f = q.coeff(z).norm();
    match q.domain() {
        Domain::HalfPlane => f * z.im * z.im,
        Domain::Disk => {
            let s = 1.0 - z.norm_sqr();
            f * s * s / 4.0
        }
    }
}

/// Sup-norm constants: ‖q‖ ≤ D, |f_z| ≤ K1/y³, |f_zz| ≤ K2/y⁴.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub d: f64,
    pub k1: f64,
    pub k2: f64,
}

fn inv_lambda(d: Domain, z: C64) -> f64 {
    match d {
        Domain::HalfPlane => z.im,
        Domain::Disk => 0.5 * (1.0 - z.norm_sqr()),
    }
}

/// Sup of |f|y², |f_z|y³, |f_zz|y⁴ over the grid (y replaced by the inverse
/// conformal factor on the disk).
pub fn derivative_bounds<Q: QuadDiff + ?Sized>(q: &Q, grid: &[C64]) -> BoundsReport {
    let vals = crate::par::map(grid, |&z| {
        let [f, f1, f2] = q.derivs(z);
        let y = inv_lambda(q.domain(), z);
        (f.norm() * y * y, f1.norm() * y.powi(3), f2.norm() * y.powi(4))
    });
    vals.into_iter().fold(BoundsReport::default(), |b, (d, k1, k2)| BoundsReport {
        d: b.d.max(d),
        k1: b.k1.max(k1),
        k2: b.k2.max(k2),
    })
}

/// Covariant norms (N0, N1, N2) of a half-plane differential. All three are
/// invariant under SL(2,R) pullback.
pub fn covariant_norms<Q: QuadDiff + ?Sized>(q: &Q, z: C64) -> [f64; 3] {
    let [f, f1, f2] = q.derivs(z);
    let y = z.im;
    let n0 = f.norm() * y * y;
    let n1 = (f1 - 2.0 * I * f / y).norm() * y.powi(3);
    let n2 = (f2 - 5.0 * I * f1 / y - 5.0 * f / (y * y)).norm() * y.powi(4);
    [n0, n1, n2]
}

/// Bounds for a differential invariant under a group whose fundamental
/// domain is sampled by `grid`: the covariant norms dominate the plain ones
/// everywhere, K1 ≤ N1 + 2N0 and K2 ≤ N2 + 5N1 + 15N0.
pub fn invariant_bounds<Q: QuadDiff + ?Sized>(q: &Q, grid: &[C64]) -> BoundsReport {
    let vals = crate::par::map(grid, |&z| covariant_norms(q, z));
    vals.into_iter().fold(BoundsReport::default(), |b, [n0, n1, n2]| BoundsReport {
        d: b.d.max(n0),
        k1: b.k1.max(n1 + 2.0 * n0),
        k2: b.k2.max(n2 + 5.0 * n1 + 15.0 * n0),
    })
}

/// μ = (z − z̄)² conj(f).
pub fn beltrami_of<Q: QuadDiff + ?Sized>(q: &Q, z: C64) -> C64 {
    let d = z - z.conj();
    d * d * q.coeff(z).conj()
}

/// Rectangular grid `x0:x1:nx,y0:y1:ny`, row-major in y.
pub fn rect_grid(x0: f64, x1: f64, nx: usize, y0: f64, y1: f64, ny: usize) -> Vec<C64> {
    let lin = |a: f64, b: f64, n: usize, k: usize| {
        if n <= 1 {
            a
        } else {
            a + (b - a) * k as f64 / (n - 1) as f64
        }
    };
    let mut g = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            g.push(C64::new(lin(x0, x1, nx, i), lin(y0, y1, ny, j)));
        }
    }
    g
}
