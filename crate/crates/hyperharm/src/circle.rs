//! Fields on the unit circle: Fourier splitting, tangential fields, the
//! Killing algebra, scalar and vector Poisson extension.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moebius::{Model, MoebiusMap};
use crate::qdiff::{Domain, VectorField};
use crate::{C64, I};

pub const DEFAULT_N: usize = 4096;

/// Uniform samples X(e^{2πik/N}).
#[derive(Clone, Debug, PartialEq)]
pub struct CircleField {
    pub samples: Vec<C64>,
}

pub fn check_n(n: usize) -> Result<()> {
    if n < 64 || !n.is_power_of_two() {
        Err(Error::InvalidSampleCount(n))
    } else {
        Ok(())
    }
}

pub fn circle_point(k: usize, n: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)
}

/// Frequency of FFT bin k; the Nyquist bin counts as +N/2.
pub fn freq(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn bin(m: i64, n: usize) -> usize {
    m.rem_euclid(n as i64) as usize
}

impl CircleField {
    pub fn new(samples: Vec<C64>) -> Result<Self> {
        check_n(samples.len())?;
        Ok(CircleField { samples })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_fn<F: Fn(C64) -> C64>(n: usize, f: F) -> Result<Self> {
        check_n(n)?;
        Ok(CircleField { samples: (0..n).map(|k| f(circle_point(k, n))).collect() })
    }

    /// From coefficients c_m, indexed by FFT bin.
    pub fn from_coeffs(coeffs: &[C64]) -> Result<Self> {
        let n = coeffs.len();
        check_n(n)?;
        let mut buf = coeffs.to_vec();
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        Ok(CircleField { samples: buf })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.n()).map(|k| circle_point(k, self.n())).collect()
    }

    /// c_m = (1/N) Σ X_k e^{−2πimk/N}, indexed by FFT bin (see [`freq`]).
    pub fn coeffs(&self) -> Vec<C64> {
        let n = self.n();
        let mut buf = self.samples.clone();
        FftPlanner::new().plan_fft_forward(n).process(&mut buf);
        let s = 1.0 / n as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        buf
    }

    pub fn coeff(&self, m: i64) -> C64 {
        self.coeffs()[bin(m, self.n())]
    }

    /// Root-mean-square of the samples.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / self.n() as f64).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn sub(&self, o: &CircleField) -> CircleField {
        let samples = self.samples.iter().zip(&o.samples).map(|(a, b)| a - b).collect();
        CircleField { samples }
    }

    pub fn add(&self, o: &CircleField) -> CircleField {
        let samples = self.samples.iter().zip(&o.samples).map(|(a, b)| a + b).collect();
        CircleField { samples }
    }

    pub fn l2_dist(&self, o: &CircleField) -> f64 {
        self.sub(o).l2_norm()
    }

    /// Real factor f with X = f·iz (imaginary residue dropped).
    pub fn tangential_factor(&self) -> Vec<f64> {
        let n = self.n();
        self.samples
            .iter()
            .enumerate()
            .map(|(k, x)| (x * (I * circle_point(k, n)).conj()).re)
            .collect()
    }

    pub fn normal_defect(&self) -> f64 {
        let n = self.n();
        self.samples
            .iter()
            .enumerate()
            .map(|(k, x)| (x * (I * circle_point(k, n)).conj()).im.abs())
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct CircleJson {
    #[serde(rename = "N")]
    n: usize,
    samples: Vec<[f64; 2]>,
}

impl Serialize for CircleField {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CircleJson { n: self.n(), samples: self.samples.iter().map(|z| [z.re, z.im]).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CircleField {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CircleJson::deserialize(d)?;
        if j.samples.len() != j.n {
            return Err(serde::de::Error::custom("N does not match the sample count"));
        }
        CircleField::new(j.samples.iter().map(|p| C64::new(p[0], p[1])).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// X(z)·conj(iz) real at every sample, within `tol`.
pub fn is_tangential(x: &CircleField, tol: f64) -> bool {
    x.normal_defect() < tol
}

#[derive(Clone, Debug)]
pub struct FourierSplit {
    pub tangential_part: CircleField,
    pub h2_part: CircleField,
}

/// X = X₁ + X₂ with X₁ = Σ_{n<0} (c_n zⁿ − conj(c_n) z^{2−n}) tangential and
/// X₂ free of negative frequencies. Modes whose partner 2−n exceeds the
/// Nyquist frequency stay in X₂.
pub fn split_tangential_h2(x: &CircleField) -> FourierSplit {
    let n = x.n();
    let c = x.coeffs();
    let half = (n / 2) as i64;
    let mut t = vec![C64::new(0.0, 0.0); n];
    for m in (2 - half)..0 {
        let cm = c[bin(m, n)];
        t[bin(m, n)] += cm;
        t[bin(2 - m, n)] -= cm.conj();
    }
    let tangential_part = CircleField::from_coeffs(&t).expect("valid N");
    let h2_part = x.sub(&tangential_part);
    FourierSplit { tangential_part, h2_part }
}

/// The disk Killing field z ↦ a + i b z − ā z².
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct KillingTriple {
    pub a: C64,
    pub b: f64,
}

#[derive(Serialize, Deserialize)]
struct TripleJson {
    a: [f64; 2],
    b: f64,
}

impl Serialize for KillingTriple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TripleJson { a: [self.a.re, self.a.im], b: self.b }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for KillingTriple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TripleJson::deserialize(d)?;
        Ok(KillingTriple { a: C64::new(j.a[0], j.a[1]), b: j.b })
    }
}

impl KillingTriple {
    pub const fn new(a: C64, b: f64) -> Self {
        KillingTriple { a, b }
    }

    /// iz
    pub fn rotation() -> Self {
        KillingTriple::new(C64::new(0.0, 0.0), 1.0)
    }

    /// (z² − 1)/2
    pub fn real_translation() -> Self {
        KillingTriple::new(C64::new(-0.5, 0.0), 0.0)
    }

    /// i(z² + 1)/2
    pub fn imag_translation() -> Self {
        KillingTriple::new(C64::new(0.0, 0.5), 0.0)
    }

    pub fn basis() -> [KillingTriple; 3] {
        [Self::rotation(), Self::real_translation(), Self::imag_translation()]
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.a + I * self.b * z - self.a.conj() * z * z
    }

    /// (Re a, Im a, b).
    pub fn to_vec(&self) -> [f64; 3] {
        [self.a.re, self.a.im, self.b]
    }

    pub fn from_vec(v: [f64; 3]) -> Self {
        KillingTriple::new(C64::new(v[0], v[1]), v[2])
    }

    pub fn add(&self, o: &KillingTriple) -> KillingTriple {
        KillingTriple::new(self.a + o.a, self.b + o.b)
    }

    pub fn sub(&self, o: &KillingTriple) -> KillingTriple {
        KillingTriple::new(self.a - o.a, self.b - o.b)
    }

    pub fn scale(&self, s: f64) -> KillingTriple {
        KillingTriple::new(self.a * s, self.b * s)
    }

    pub fn norm(&self) -> f64 {
        (self.a.norm_sqr() + self.b * self.b).sqrt()
    }

    /// γ*X for γ = [[A, B], [B̄, Ā]] in SU(1,1).
    pub fn pullback(&self, g: &MoebiusMap) -> KillingTriple {
        debug_assert_eq!(g.model, Model::SU11);
        let (aa, bb) = (g.a, g.b);
        let (a, b) = (self.a, self.b);
        let na = a * aa.conj() * aa.conj() + I * b * bb * aa.conj() - a.conj() * bb * bb;
        let z1 = 2.0 * a * bb.conj() * aa.conj() + I * b * (aa * aa.conj() + bb * bb.conj())
            - 2.0 * a.conj() * aa * bb;
        KillingTriple::new(na, (z1 / I).re)
    }

    pub fn restrict(&self, n: usize) -> Result<CircleField> {
        CircleField::from_fn(n, |z| self.eval(z))
    }
}

impl VectorField for KillingTriple {
    fn domain(&self) -> Domain {
        Domain::Disk
    }
    fn eval(&self, z: C64) -> Result<C64> {
        Ok(KillingTriple::eval(self, z))
    }
    fn exact_dzbar(&self, _z: C64) -> Option<C64> {
        Some(C64::new(0.0, 0.0))
    }
}

/// Least-squares Killing field through (z_k, v_k); returns the triple and
/// the RMS residual.
pub fn fit_killing(points: &[C64], values: &[C64]) -> (KillingTriple, f64) {
    let m = points.len();
    let mut a = DMatrix::<f64>::zeros(2 * m, 3);
    let mut y = DVector::<f64>::zeros(2 * m);
    for (k, (&z, &v)) in points.iter().zip(values).enumerate() {
        let cols = [1.0 - z * z, I * (1.0 + z * z), I * z];
        for (j, c) in cols.iter().enumerate() {
            a[(k, j)] = c.re;
            a[(m + k, j)] = c.im;
        }
        y[k] = v.re;
        y[m + k] = v.im;
    }
    let sol = a.clone().svd(true, true).solve(&y, 1e-14).expect("svd solve");
    let r = &a * &sol - &y;
    let rms = (r.norm_squared() / m as f64).sqrt();
    (KillingTriple::from_vec([sol[0], sol[1], sol[2]]), rms)
}

/// Projection onto span{iz, (z² − 1)/2, i(z² + 1)/2}; residual is the
/// discrete L² distance.
pub fn killing_project(x: &CircleField) -> (KillingTriple, f64) {
    fit_killing(&x.points(), &x.samples)
}

/// Dimension of tangential ∩ ℋ² among trigonometric polynomial fields of
/// degree ≤ `deg`: returns (rank of the joint constraint system, nullity,
/// orthonormal null-space basis in the real coordinates (Re c_n, Im c_n),
/// n = −deg..deg).
pub fn tangential_h2_kernel(deg: usize) -> (usize, usize, DMatrix<f64>) {
    let d = deg as i64;
    let nc = (2 * d + 1) as usize;
    let idx = |n: i64| (n + d) as usize;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    // ℋ²: c_n = 0 for n < 0
    for n in -d..0 {
        for part in 0..2 {
            let mut r = vec![0.0; 2 * nc];
            r[2 * idx(n) + part] = 1.0;
            rows.push(r);
        }
    }
    // tangential: c_{k+1} = −conj(c_{1−k})
    for k in (-d - 1)..=(d + 1) {
        let (p, q) = (k + 1, 1 - k);
        if p < q {
            continue;
        }
        let inside = |n: i64| n.abs() <= d;
        let mut re = vec![0.0; 2 * nc];
        let mut im = vec![0.0; 2 * nc];
        if inside(p) {
            re[2 * idx(p)] += 1.0;
            im[2 * idx(p) + 1] += 1.0;
        }
        if inside(q) {
            re[2 * idx(q)] += 1.0;
            im[2 * idx(q) + 1] -= 1.0;
        }
        if re.iter().any(|v| *v != 0.0) {
            rows.push(re);
        }
        if im.iter().any(|v| *v != 0.0) {
            rows.push(im);
        }
    }
    let a = DMatrix::from_fn(rows.len(), 2 * nc, |i, j| rows[i][j]);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let rank = order.iter().filter(|&&i| svd.singular_values[i] > 1e-10 * smax).count();
    let nullity = 2 * nc - rank;
    // complete v_t to a full basis when the system is wide
    let full = if vt.nrows() < 2 * nc {
        let mut m = DMatrix::<f64>::zeros(2 * nc, 2 * nc);
        m.view_mut((0, 0), (vt.nrows(), 2 * nc)).copy_from(&vt);
        m
    } else {
        vt.clone()
    };
    let ranked: Vec<usize> = order.iter().take(rank).cloned().collect();
    let span = DMatrix::from_fn(2 * nc, rank, |i, j| full[(ranked[j], i)]);
    // null space = orthogonal complement of the row space
    let proj = DMatrix::<f64>::identity(2 * nc, 2 * nc) - &span * span.transpose();
    let psvd = proj.svd(true, false);
    let u = psvd.u.expect("u");
    let mut porder: Vec<usize> = (0..psvd.singular_values.len()).collect();
    porder.sort_by(|&i, &j| psvd.singular_values[j].total_cmp(&psvd.singular_values[i]));
    let basis = DMatrix::from_fn(2 * nc, nullity, |i, j| u[(i, porder[j])]);
    (rank, nullity, basis)
}

/// Real coordinates (Re c_n, Im c_n), n = −deg..deg, of a Killing field.
pub fn killing_coords(k: &KillingTriple, deg: usize) -> DVector<f64> {
    let d = deg as i64;
    let mut v = DVector::zeros(2 * (2 * deg + 1));
    let mut put = |n: i64, c: C64| {
        let i = (n + d) as usize;
        v[2 * i] += c.re;
        v[2 * i + 1] += c.im;
    };
    put(0, k.a);
    put(1, I * k.b);
    put(2, -k.a.conj());
    v
}

/// Harmonic extension of real boundary samples by the Poisson kernel.
pub fn scalar_poisson(f: &[f64], z: C64) -> Result<f64> {
    if z.norm() >= 1.0 - 1e-6 {
        return Err(Error::TooCloseToBoundary(format!("|z| = {}", z.norm())));
    }
    let n = f.len();
    let r2 = z.norm_sqr();
    let s: f64 = f
        .iter()
        .enumerate()
        .map(|(k, v)| v * (1.0 - r2) / (circle_point(k, n) - z).norm_sqr())
        .sum();
    Ok(s / n as f64)
}

/// **K**(z) = i(1 − |z|²)³ / (|1 − z̄|² (1 − z̄)²).
pub fn poisson_kernel_field(z: C64) -> C64 {
    let s = 1.0 - z.norm_sqr();
    let u = 1.0 - z.conj();
    I * s * s * s / (u.norm_sqr() * u * u)
}

fn binom(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// Taylor coefficient of z^p z̄^q in **K**/i.
pub fn kernel_coeff(p: u32, q: u32) -> f64 {
    let (p, q) = (p as i64, q as i64);
    (0..=3.min(p).min(q))
        .map(|k| (-1f64).powi(k as i32) * binom(3, k) * binom(q - k + 2, 2))
        .sum()
}

/// Convolution variant for [`PoissonExtension`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Convolution {
    /// (1/2π)∮ f(w) w **K**(w⁻¹z) |dw|
    RotationEquivariant,
    /// (1/2π)∮ f(w) **K**(w⁻¹z) |dw|
    BareScalar,
}

/// ℱ(X) = f ∗ **K** for a tangential X = f·iz, evaluated exactly mode by
/// mode: each Fourier mode of f contributes a polynomial in z, z̄.
#[derive(Clone, Debug)]
pub struct PoissonExtension {
    f: Vec<f64>,
    fm: Vec<(i64, C64)>,
    pub variant: Convolution,
}

pub fn poisson_extend(x: &CircleField) -> Result<PoissonExtension> {
    poisson_extend_with(x, Convolution::RotationEquivariant)
}

pub fn poisson_extend_with(x: &CircleField, variant: Convolution) -> Result<PoissonExtension> {
    let defect = x.normal_defect();
    if defect > 1e-8 * x.sup_norm().max(1.0) {
        return Err(Error::NotTangential(defect));
    }
    let f = x.tangential_factor();
    let n = f.len();
    let fc = CircleField::new(f.iter().map(|&v| C64::new(v, 0.0)).collect())?.coeffs();
    let fm = (0..n)
        .filter(|&k| fc[k].norm() > 0.0)
        .map(|k| (freq(k, n), fc[k]))
        .collect();
    Ok(PoissonExtension { f, fm, variant })
}

impl PoissonExtension {
    pub fn n(&self) -> usize {
        self.f.len()
    }

    fn mode(d: i64, z: C64) -> C64 {
        let r2 = z.norm_sqr();
        let k = |p: i64, q: i64| kernel_coeff(p as u32, q as u32);
        if d >= 0 {
            let poly = k(d, 0) + k(d + 1, 1) * r2 + k(d + 2, 2) * r2 * r2;
            z.powi(d as i32) * poly
        } else {
            let e = -d;
            let poly = k(0, e) + k(1, 1 + e) * r2 + k(2, 2 + e) * r2 * r2;
            z.conj().powi(e as i32) * poly
        }
    }

    fn mode_dzbar(d: i64, z: C64) -> C64 {
        let r2 = z.norm_sqr();
        let k = |p: i64, q: i64| kernel_coeff(p as u32, q as u32);
        if d >= 0 {
            z.powi(d as i32 + 1) * (k(d + 1, 1) + 2.0 * k(d + 2, 2) * r2)
        } else {
            let e = -d;
            let poly = k(0, e) + k(1, 1 + e) * r2 + k(2, 2 + e) * r2 * r2;
            let dpoly = k(1, 1 + e) + 2.0 * k(2, 2 + e) * r2;
            e as f64 * z.conj().powi(e as i32 - 1) * poly + z.conj().powi(e as i32) * z * dpoly
        }
    }

    fn shift(&self) -> i64 {
        match self.variant {
            Convolution::RotationEquivariant => 1,
            Convolution::BareScalar => 0,
        }
    }

    /// Exact ∂/∂z̄ through the mode formula.
    pub fn dzbar(&self, z: C64) -> C64 {
        let s = self.shift();
        I * self.fm.iter().map(|&(m, c)| c * Self::mode_dzbar(m + s, z)).sum::<C64>()
    }

    /// Evaluation through the exact mode formula.
    pub fn value(&self, z: C64) -> C64 {
        let shift = self.shift();
        I * self.fm.iter().map(|&(m, c)| c * Self::mode(m + shift, z)).sum::<C64>()
    }

    /// Direct trapezoid rule over the N samples.
    pub fn value_trapezoid(&self, z: C64) -> C64 {
        let n = self.n();
        let s: C64 = self
            .f
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let w = circle_point(k, n);
                let kern = poisson_kernel_field(w.conj() * z);
                match self.variant {
                    Convolution::RotationEquivariant => v * w * kern,
                    Convolution::BareScalar => v * kern,
                }
            })
            .sum();
        s / n as f64
    }
}

impl VectorField for PoissonExtension {
    fn domain(&self) -> Domain {
        Domain::Disk
    }
    fn eval(&self, z: C64) -> Result<C64> {
        if z.norm() >= 1.0 {
            return Err(Error::DomainViolation);
        }
        Ok(self.value(z))
    }
    fn exact_dzbar(&self, z: C64) -> Option<C64> {
        Some(self.dzbar(z))
    }
}

/// Kernel mass data at radius 1 − ε.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct KernelMass {
    pub eps: f64,
    pub samples: usize,
    /// Trapezoid mean of **K**((1 − ε)z) over the circle.
    pub haar: C64,
    /// Trapezoid value of (1/2πi)∮ 8iε³ z³ / ((1 − sz)(z − s)³) dz, s = 1 − ε.
    pub contour: C64,
    /// 8iε³ · (6s − 12s³ + 8s⁵ − 2s⁷) / (2(1 − s²)⁴).
    pub closed_form: C64,
}

pub fn kernel_mass(eps: f64) -> Result<KernelMass> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Config(format!("eps = {eps} outside (0, 1)")));
    }
    let n = DEFAULT_N.max(((64.0 / eps).ceil() as usize).next_power_of_two());
    let s = 1.0 - eps;
    let pts: Vec<C64> = (0..n).map(|k| circle_point(k, n)).collect();
    let haar = crate::par::sum_chunked(&pts, 4096, |&z| poisson_kernel_field(s * z)) / n as f64;
    let e3 = eps * eps * eps;
    let contour = crate::par::sum_chunked(&pts, 4096, |&z| {
        let u = z - s;
        8.0 * I * e3 * z.powi(4) / ((1.0 - s * z) * u * u * u)
    }) / n as f64;
    let s2 = s * s;
    let res = (6.0 * s - 12.0 * s.powi(3) + 8.0 * s.powi(5) - 2.0 * s.powi(7))
        / (2.0 * (1.0 - s2).powi(4));
    Ok(KernelMass { eps, samples: n, haar, contour, closed_form: 8.0 * I * e3 * res })
}

/// Samples of a disk field on the circle of radius r, read as a field on S¹.
pub fn radial_l2_restriction<F: VectorField + ?Sized>(field: &F, r: f64, n: usize) -> Result<CircleField> {
    check_n(n)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Config(format!("radius {r} outside (0, 1)")));
    }
    let vals = crate::par::map_range(n, |k| field.eval(r * circle_point(k, n)));
    CircleField::new(vals.into_iter().collect::<Result<Vec<_>>>()?)
}
