//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::C64;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-12, rel_tol: 1e-12, max_subdivisions: 20_000 }
    }
}

/// One 15-point Kronrod rule with its embedded 7-point Gauss estimate.
pub fn gk15<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        k += s * WGK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).norm())
}

struct Seg {
    a: f64,
    b: f64,
    val: C64,
    err: f64,
}

impl PartialEq for Seg {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Seg {}
impl PartialOrd for Seg {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Seg {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.total_cmp(&o.err)
    }
}

/// Integrate over consecutive panels `edges[0] < edges[1] < ...`, bisecting
/// the panel with the largest error estimate until the total estimate meets
/// the tolerance.
pub fn integrate_panels<F: Fn(f64) -> C64>(f: F, edges: &[f64], cfg: &QuadConfig) -> Result<C64> {
    if edges.len() < 2 {
        return Ok(C64::new(0.0, 0.0));
    }
    let mut heap = BinaryHeap::with_capacity(2 * edges.len());
    let mut total = C64::new(0.0, 0.0);
    let mut err = 0.0;
    for w in edges.windows(2) {
        let (v, e) = gk15(&f, w[0], w[1]);
        total += v;
        err += e;
        heap.push(Seg { a: w[0], b: w[1], val: v, err: e });
    }
    let mut n = heap.len();
    while err > cfg.abs_tol.max(cfg.rel_tol * total.norm()) {
        if n >= cfg.max_subdivisions {
            let (a, b) = (edges[0], edges[edges.len() - 1]);
            return Err(Error::QuadratureFailure { a, b, err });
        }
        let s = heap.pop().expect("nonempty");
        let m = 0.5 * (s.a + s.b);
        if !(m > s.a && m < s.b) {
            // interval exhausted at machine precision
            return Err(Error::QuadratureFailure { a: s.a, b: s.b, err: s.err });
        }
        let (v1, e1) = gk15(&f, s.a, m);
        let (v2, e2) = gk15(&f, m, s.b);
        total += v1 + v2 - s.val;
        err += e1 + e2 - s.err;
        heap.push(Seg { a: s.a, b: m, val: v1, err: e1 });
        heap.push(Seg { a: m, b: s.b, val: v2, err: e2 });
        n += 1;
        if n % 64 == 0 {
            // refresh the running sums against drift
            total = heap.iter().map(|s| s.val).sum();
            err = heap.iter().map(|s| s.err).sum();
        }
    }
    Ok(heap.iter().map(|s| s.val).sum())
}

pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<C64> {
    if a == b {
        return Ok(C64::new(0.0, 0.0));
    }
    if a > b {
        return integrate(f, b, a, cfg).map(|v| -v);
    }
    integrate_panels(f, &[a, b], cfg)
}

/// Panel edges from `a` to `b` growing geometrically by `ratio`, with a
/// minimum width `min_w` near the origin.
pub fn geometric_edges(a: f64, b: f64, ratio: f64, min_w: f64) -> Vec<f64> {
    let mut e = vec![a];
    let mut x = a;
    while x < b {
        x = (x * ratio).max(x + min_w).min(b);
        e.push(x);
    }
    e
}

/// Complex line integral of a holomorphic-style integrand along the segment
/// w → z.
pub fn segment_integral<F: Fn(C64) -> C64>(f: F, w: C64, z: C64, cfg: &QuadConfig) -> Result<C64> {
    let dz = z - w;
    integrate(|t| f(w + dz * t) * dz, 0.0, 1.0, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let cfg = QuadConfig::default();
        let v = integrate(|x| C64::new(x.powi(5), x), 0.0, 2.0, &cfg).unwrap();
        assert!((v - C64::new(64.0 / 6.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn long_tail() {
        let cfg = QuadConfig { abs_tol: 1e-10, ..Default::default() };
        let e = geometric_edges(1.0, 1e8, 1.5, 0.05);
        let v = integrate_panels(|x| C64::new(1.0 / (x * x), 0.0), &e, &cfg).unwrap();
        assert!((v.re - (1.0 - 1e-8)).abs() < 1e-9);
    }

    #[test]
    fn failure_reported() {
        let cfg = QuadConfig { abs_tol: 1e-14, rel_tol: 0.0, max_subdivisions: 5 };
        let r = integrate(|x| C64::new(1.0 / x.sqrt(), 0.0), 0.0, 1.0, &cfg);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
