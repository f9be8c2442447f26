use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fuchsian::group::{dedup_elements, Alphabet, GroupPresentation};
use crate::moebius::MoebiusMap;
use crate::qdiff::{Domain, QuadDiff};
use crate::C64;

/// Polynomial seed f₀(z) = Σ c_k z^k.
#[derive(Clone, Debug, PartialEq)]
pub struct Seed {
    pub coeffs: Vec<C64>,
}

impl Seed {
    pub fn constant(c: f64) -> Self {
        Seed { coeffs: vec![C64::new(c, 0.0)] }
    }

    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); n + 1];
        coeffs[n] = C64::new(1.0, 0.0);
        Seed { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    pub fn add(&self, o: &Seed) -> Seed {
        let n = self.coeffs.len().max(o.coeffs.len());
        let get = |v: &[C64], k: usize| v.get(k).copied().unwrap_or_default();
        Seed { coeffs: (0..n).map(|k| get(&self.coeffs, k) + get(&o.coeffs, k)).collect() }
    }

    /// (f₀(z), f₀′(z))
    pub fn eval(&self, z: C64) -> (C64, C64) {
        let mut f = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            d = d * z + f;
            f = f * z + c;
        }
        (f, d)
    }
}

impl FromStr for Seed {
    type Err = Error;

    /// `0`, `1`, a real constant, `z`, `z^n`, or `poly:c0,c1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("poly:") {
            let coeffs = rest
                .split(',')
                .map(|t| t.trim().parse::<f64>().map(|v| C64::new(v, 0.0)))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Config(format!("bad seed {s}: {e}")))?;
            return Ok(Seed { coeffs });
        }
        if s == "z" {
            return Ok(Seed::monomial(1));
        }
        if let Some(n) = s.strip_prefix("z^") {
            let n: usize = n.parse().map_err(|_| Error::Config(format!("bad seed {s}")))?;
            return Ok(Seed::monomial(n));
        }
        s.parse::<f64>().map(Seed::constant).map_err(|_| Error::Config(format!("bad seed {s}")))
    }
}

/// Truncated Poincaré series Σ_{|γ| ≤ L} f₀(γz) γ′(z)² on the disk.
#[derive(Clone, Debug)]
pub struct ThetaQd {
    pub seed: Seed,
    pub l: u32,
    pub group: GroupPresentation,
    pub elements: Vec<MoebiusMap>,
}

pub fn theta_qd(seed: Seed, g: &GroupPresentation, l: u32) -> Result<ThetaQd> {
    let g = g.to_disk();
    let elems = g.enumerate(Alphabet::SidePairings, l)?;
    let (reps, _) = dedup_elements(&elems, 1e-8);
    Ok(ThetaQd { seed, l, elements: reps.into_iter().map(|e| e.map).collect(), group: g })
}

/// Deterministic points filling the disk of radius `r` (golden-angle
/// spiral, area-uniform).
pub fn probe_points(n: usize, r: f64) -> Vec<C64> {
    let ga = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let rho = r * ((k as f64 + 0.5) / n as f64).sqrt();
            C64::from_polar(rho, ga * k as f64)
        })
        .collect()
}

impl ThetaQd {
    /// (f(z), f′(z)).
    pub fn eval2(&self, z: C64) -> (C64, C64) {
        if self.seed.is_zero() {
            return (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        }
        let term = |m: &MoebiusMap| {
            let den = m.c * z + m.d;
            let d1 = 1.0 / (den * den);
            let d2 = -2.0 * m.c * d1 / den;
            let w = (m.a * z + m.b) / den;
            let (f, fp) = self.seed.eval(w);
            let v = f * d1 * d1;
            let dv = fp * d1 * d1 * d1 + f * 2.0 * d1 * d2;
            Pair(v, dv)
        };
        let Pair(v, dv) = crate::par::sum_chunked(&self.elements, 8192, term);
        (v, dv)
    }

    /// max over probes and side pairings of |f(gz)g′(z)² − f(z)|, absolute
    /// and relative to max |f| on the probes.
    pub fn invariance_defect(&self, probes: &[C64]) -> (f64, f64) {
        let maps = self.group.side_pairing_maps();
        let fz: Vec<C64> = probes.iter().map(|&z| self.coeff(z)).collect();
        let scale = fz.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut worst = 0.0f64;
        for m in maps.iter().step_by(2) {
            for (z, f0) in probes.iter().zip(&fz) {
                let w = m.apply(*z).expect("disk map");
                let d = m.derivative(*z).expect("disk map");
                worst = worst.max((self.coeff(w) * d * d - f0).norm());
            }
        }
        let rel = if scale > 0.0 { worst / scale } else { 0.0 };
        (worst, rel)
    }

    /// Default probe set: 20 points with |z| ≤ 0.6.
    pub fn default_probes() -> Vec<C64> {
        probe_points(20, 0.6)
    }
}

#[derive(Clone, Copy, Default)]
struct Pair(C64, C64);

impl std::ops::Add for Pair {
    type Output = Pair;
    fn add(self, o: Pair) -> Pair {
        Pair(self.0 + o.0, self.1 + o.1)
    }
}

impl QuadDiff for ThetaQd {
    fn domain(&self) -> Domain {
        Domain::Disk
    }
    fn coeff(&self, z: C64) -> C64 {
        self.eval2(z).0
    }
}
