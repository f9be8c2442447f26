use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::circle::{split_tangential_h2, CircleField, KillingTriple};
use crate::error::{Error, Result};
use crate::fuchsian::cocycle::{CohomologyBasis, Cocycle};
use crate::fuchsian::group::GroupPresentation;
use crate::fuchsian::theta::probe_points;
use crate::harmonic::{closed_disk_extension, XiReg};
use crate::moebius::{cayley, cayley_deriv, cayley_deriv2, cayley_inv, cayley_inv_deriv, MoebiusMap};
use crate::qdiff::{cauchy_derivs, invariant_bounds, BoundsReport, Domain, QuadDiff};
use crate::{C64, I};

#[derive(Clone, Copy, Debug)]
pub struct ProjectionConfig {
    /// Radius of the polynomial basis (w/R)ⁿ.
    pub radius: f64,
    pub degree: usize,
    pub constraint_points: usize,
    pub fit_points: usize,
    pub fit_radius: f64,
    pub weight: f64,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            radius: 0.86,
            degree: 320,
            constraint_points: 4000,
            fit_points: 300,
            fit_radius: 0.7,
            weight: 1e3,
        }
    }
}

/// Polynomial quadratic differential on the disk satisfying the invariance
/// constraints of the side pairings in the least-squares sense, evaluated
/// anywhere by folding into the fundamental polygon in the half-plane.
#[derive(Clone, Debug)]
pub struct InvariantQd {
    /// coefficients of (w/R)ⁿ
    pub scaled: Vec<C64>,
    pub radius: f64,
    half_plane_maps: Vec<MoebiusMap>,
    /// max invariance defect over the constraint rows
    pub constraint_defect: f64,
    /// max deviation from the source at the fit points
    pub fit_deviation: f64,
}

impl InvariantQd {
    pub fn fit<Q: QuadDiff + ?Sized>(source: &Q, g: &GroupPresentation, cfg: &ProjectionConfig) -> Result<Self> {
        if source.domain() != Domain::Disk {
            return Err(Error::Config("invariant projection expects a disk differential".into()));
        }
        let g = g.to_disk();
        let maps = g.side_pairing_maps();
        let r = cfg.radius;
        let n = cfg.degree;
        let powers = |w: C64| {
            let u = w / r;
            let mut row = Vec::with_capacity(n);
            let mut p = C64::new(1.0, 0.0);
            for _ in 0..n {
                row.push(p);
                p *= u;
            }
            row
        };
        let pts = probe_points(cfg.constraint_points, r);
        let mut rows: Vec<Vec<C64>> = Vec::new();
        for m in &maps {
            for &w in &pts {
                let gw = m.apply(w)?;
                if gw.norm() >= r {
                    continue;
                }
                let d = m.derivative(w)?;
                let a = powers(w);
                let b = powers(gw);
                rows.push(a.iter().zip(&b).map(|(x, y)| cfg.weight * (x - d * d * y)).collect());
            }
        }
        let nc = rows.len();
        // rotate the fit spiral so it does not reuse constraint nodes
        let fit: Vec<C64> = probe_points(cfg.fit_points, cfg.fit_radius)
            .into_iter()
            .map(|w| w * C64::from_polar(1.0, 0.5))
            .collect();
        let vals = crate::par::map(&fit, |&w| source.coeff(w));
        let m = nc + fit.len();
        let mut a = DMatrix::<C64>::zeros(m, n);
        let mut y = DVector::<C64>::zeros(m);
        for (i, row) in rows.iter().enumerate() {
            for j in 0..n {
                a[(i, j)] = row[j];
            }
        }
        for (k, &w) in fit.iter().enumerate() {
            let row = powers(w);
            for j in 0..n {
                a[(nc + k, j)] = row[j];
            }
            y[nc + k] = vals[k];
        }
        let scale = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let sol = if scale == 0.0 {
            DVector::<C64>::zeros(n)
        } else {
            let svd = a.clone().svd(true, true);
            let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
            svd.solve(&y, 1e-14 * smax).map_err(|e| Error::ConstructionFailed(e.to_string()))?
        };
        let res = &a * &sol - &y;
        let constraint_defect = (0..nc).map(|i| res[i].norm() / cfg.weight).fold(0.0, f64::max);
        let fit_deviation = (nc..m).map(|i| res[i].norm()).fold(0.0, f64::max);
        Ok(InvariantQd {
            scaled: sol.iter().cloned().collect(),
            radius: r,
            half_plane_maps: maps.iter().map(|m| m.to_half_plane()).collect(),
            constraint_defect,
            fit_deviation,
        })
    }

    /// (P(w), P′(w)) of the underlying polynomial.
    pub fn poly(&self, w: C64) -> (C64, C64) {
        let u = w / self.radius;
        let mut f = C64::new(0.0, 0.0);
        let mut d = C64::new(0.0, 0.0);
        for &c in self.scaled.iter().rev() {
            d = d * u + f;
            f = f * u + c;
        }
        (f, d / self.radius)
    }

    /// Fold z into the polygon by greedy side pairings; returns the folded
    /// point, the derivative J of the folding map and J′.
    pub fn fold(&self, z: C64) -> (C64, C64, C64) {
        let u = |z: C64| (z - I).norm_sqr() / z.im;
        let mut z = z;
        let mut jac = C64::new(1.0, 0.0);
        let mut hess = C64::new(0.0, 0.0);
        let mut cur = u(z);
        for _ in 0..400 {
            let mut best: Option<(f64, usize, C64)> = None;
            for (k, m) in self.half_plane_maps.iter().enumerate() {
                let den = m.c * z + m.d;
                let w = (m.a * z + m.b) / den;
                let uw = u(w);
                if best.map_or(true, |(b, _, _)| uw < b) {
                    best = Some((uw, k, w));
                }
            }
            let (uw, k, w) = best.expect("side pairings");
            if !(uw < cur * (1.0 - 1e-15)) {
                break;
            }
            let m = &self.half_plane_maps[k];
            let den = m.c * z + m.d;
            let d1 = 1.0 / (den * den);
            let d2 = -2.0 * m.c / (den * den * den);
            hess = d2 * jac * jac + d1 * hess;
            jac *= d1;
            z = w;
            cur = uw;
        }
        (z, jac, hess)
    }

    /// Half-plane coefficient and derivative.
    pub fn eval_half_plane(&self, z: C64) -> (C64, C64) {
        let (zf, jac, hess) = self.fold(z);
        let w = cayley(zf).expect("upper half-plane");
        let c1 = cayley_deriv(zf).expect("upper half-plane");
        let c2 = cayley_deriv2(zf).expect("upper half-plane");
        let (p, dp) = self.poly(w);
        let f = p * c1 * c1;
        let df = dp * c1 * c1 * c1 + p * 2.0 * c1 * c2;
        (f * jac * jac, df * jac * jac * jac + f * 2.0 * jac * hess)
    }

    /// Disk coefficient.
    pub fn eval_disk(&self, w: C64) -> C64 {
        if w.norm() <= 0.8 {
            return self.poly(w).0;
        }
        let z = cayley_inv(w).expect("disk point");
        let d = cayley_inv_deriv(w).expect("disk point");
        self.eval_half_plane(z).0 * d * d
    }

    pub fn disk_view(&self) -> InvariantDisk<'_> {
        InvariantDisk(self)
    }
}

impl QuadDiff for InvariantQd {
    fn domain(&self) -> Domain {
        Domain::HalfPlane
    }
    fn coeff(&self, z: C64) -> C64 {
        self.eval_half_plane(z).0
    }
    fn value_and_derivative(&self, z: C64) -> (C64, C64) {
        self.eval_half_plane(z)
    }
    fn derivs(&self, z: C64) -> [C64; 3] {
        let (f, f1) = self.eval_half_plane(z);
        let [_, f2, _] = cauchy_derivs(|w| self.eval_half_plane(w).1, z, 0.1 * z.im);
        [f, f1, f2]
    }
}

pub struct InvariantDisk<'a>(pub &'a InvariantQd);

impl QuadDiff for InvariantDisk<'_> {
    fn domain(&self) -> Domain {
        Domain::Disk
    }
    fn coeff(&self, w: C64) -> C64 {
        self.0.eval_disk(w)
    }
}

/// Relative invariance defect of a disk differential under the side
/// pairings, on 20 probes with |z| ≤ 0.6.
pub fn relative_defect<Q: QuadDiff + ?Sized>(q: &Q, g: &GroupPresentation) -> (f64, f64) {
    let g = g.to_disk();
    let probes = probe_points(20, 0.6);
    let maps = g.side_pairing_maps();
    let fz: Vec<C64> = crate::par::map(&probes, |&z| q.coeff(z));
    let scale = fz.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let pairs: Vec<(usize, usize)> = (0..maps.len()).step_by(2).flat_map(|m| (0..probes.len()).map(move |p| (m, p))).collect();
    let worst = crate::par::map(&pairs, |&(m, p)| {
        let z = probes[p];
        let w = maps[m].apply(z).expect("disk map");
        let d = maps[m].derivative(z).expect("disk map");
        (q.coeff(w) * d * d - fz[p]).norm()
    })
    .into_iter()
    .fold(0.0, f64::max);
    (worst, if scale > 0.0 { worst / scale } else { 0.0 })
}

#[derive(Clone, Debug)]
pub struct PhiConfig {
    /// Boundary samples for the tangential/ℋ² split of χ.
    pub boundary_samples: usize,
    pub tail_tol: f64,
    pub projection: ProjectionConfig,
    pub probe_radii: (f64, f64, usize),
    pub probe_angles: usize,
    pub max_defect: f64,
    /// Added to χ before taking coboundaries (representative check).
    pub extra_killing: Option<KillingTriple>,
}

impl Default for PhiConfig {
    fn default() -> Self {
        PhiConfig {
            boundary_samples: 2048,
            tail_tol: 1e-6,
            projection: ProjectionConfig::default(),
            probe_radii: (0.2, 0.7, 4),
            probe_angles: 8,
            max_defect: 1e-3,
            extra_killing: None,
        }
    }
}

impl PhiConfig {
    /// Relaxed defect gate for differentials that are invariant only up to
    /// truncation error, such as the output of Ψ.
    pub fn approximate_input() -> Self {
        PhiConfig { max_defect: PSI_DEFECT_ALLOWANCE, ..Default::default() }
    }
}

pub const PSI_DEFECT_ALLOWANCE: f64 = 0.25;

#[derive(Clone, Debug, Serialize)]
pub struct PhiResult {
    pub cocycle: Cocycle,
    /// Killing values on the side pairings g₀..g₃.
    pub side_values: Vec<KillingTriple>,
    /// Per side pairing: RMS fit residual divided by the RMS of δχ.
    pub relative_residuals: Vec<f64>,
    pub absolute_residuals: Vec<f64>,
    /// RMS of the (corrected) δχ per side pairing.
    pub delta_norms: Vec<f64>,
    pub fit_residual: f64,
    pub relation_residual: f64,
    pub relation_tol: f64,
    pub input_defect: f64,
    pub projection_defect: f64,
    pub projection_deviation: f64,
    pub bounds: BoundsReport,
}

impl PhiResult {
    pub fn max_absolute_residual(&self) -> f64 {
        self.absolute_residuals.iter().cloned().fold(0.0, f64::max)
    }
}

/// Sample of the fundamental polygon (|w| ≤ 0.85 covers it) in the
/// half-plane.
pub fn fundamental_grid(nr: usize, nt: usize) -> Vec<C64> {
    let mut g = Vec::with_capacity(nr * nt);
    for i in 0..nr {
        let r = 0.85 * i as f64 / (nr - 1) as f64;
        for j in 0..nt {
            let w = C64::from_polar(r, 2.0 * PI * (j as f64 + 0.5 * (i % 2) as f64) / nt as f64);
            g.push(cayley_inv(w).expect("interior"));
        }
    }
    g
}

/// Φ: an (approximately) invariant disk differential to a cocycle with
/// Killing values.
pub fn phi_map<Q: QuadDiff + ?Sized>(q: &Q, g: &GroupPresentation, cfg: &PhiConfig) -> Result<PhiResult> {
    let g = g.to_disk();
    let (_, defect) = relative_defect(q, &g);
    if defect > cfg.max_defect {
        return Err(Error::InvarianceDefectTooLarge(defect));
    }
    let inv = InvariantQd::fit(q, &g, &cfg.projection)?;
    let bounds = invariant_bounds(&inv, &fundamental_grid(24, 48));
    let xi = XiReg::new(inv.clone(), Some(bounds), cfg.tail_tol)?;
    let extra = cfg.extra_killing;
    let chi = |w: C64| -> Result<C64> {
        let v = closed_disk_extension(&xi, w)?;
        Ok(v + extra.map_or(C64::new(0.0, 0.0), |k| k.eval(w)))
    };

    let mb = cfg.boundary_samples;
    let boundary = crate::par::map_range(mb, |k| chi(crate::circle::circle_point(k, mb)));
    let boundary = CircleField::new(boundary.into_iter().collect::<Result<Vec<_>>>()?)?;
    let hc = split_tangential_h2(&boundary).h2_part.coeffs();
    let hcoef: Vec<C64> = hc[..=mb / 2].to_vec();
    let hol = |w: C64| hcoef.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * w + c);

    let (r0, r1, nr) = cfg.probe_radii;
    let mut probes = Vec::new();
    for i in 0..nr {
        let r = if nr == 1 { r0 } else { r0 + (r1 - r0) * i as f64 / (nr - 1) as f64 };
        for j in 0..cfg.probe_angles {
            let t = 2.0 * PI * j as f64 / cfg.probe_angles as f64 + 0.1 * r;
            probes.push(C64::from_polar(r, t));
        }
    }
    let chi_p = crate::par::map(&probes, |&w| chi(w)).into_iter().collect::<Result<Vec<_>>>()?;

    let sides = g.side_pairings.clone().unwrap_or_else(|| g.generators.clone());
    let mut side_values = Vec::new();
    let mut rel = Vec::new();
    let mut abs = Vec::new();
    let mut norms = Vec::new();
    for m in &sides {
        let gp: Vec<C64> = probes.iter().map(|&w| m.apply(w)).collect::<Result<_>>()?;
        let chi_g = crate::par::map(&gp, |&w| chi(w)).into_iter().collect::<Result<Vec<_>>>()?;
        let delta: Vec<C64> = (0..probes.len())
            .map(|k| {
                let d = m.derivative(probes[k]).expect("disk map");
                let raw = chi_g[k] / d - chi_p[k];
                let dh = hol(gp[k]) / d - hol(probes[k]);
                raw - dh
            })
            .collect();
        let (t, rms) = crate::circle::fit_killing(&probes, &delta);
        let dn = (delta.iter().map(|v| v.norm_sqr()).sum::<f64>() / delta.len() as f64).sqrt();
        side_values.push(t);
        abs.push(rms);
        rel.push(if dn > 0.0 { rms / dn } else { rms });
        norms.push(dn);
    }
    let cocycle = Cocycle::from_side_values(&g, &side_values);
    let relation_residual = cocycle.relation_residual(&g);
    let fit_residual = rel.iter().cloned().fold(0.0, f64::max);
    Ok(PhiResult {
        cocycle,
        side_values,
        relative_residuals: rel,
        absolute_residuals: abs,
        delta_norms: norms,
        fit_residual,
        relation_residual,
        relation_tol: (1e-6f64).max(10.0 * defect),
        input_defect: defect,
        projection_defect: inv.constraint_defect,
        projection_deviation: inv.fit_deviation,
        bounds,
    })
}

/// H¹ coordinates of a cocycle.
pub fn h1_class(c: &Cocycle, g: &GroupPresentation) -> DVector<f64> {
    CohomologyBasis::new(&g.to_disk()).h1_coords(c)
}
