//! Self-verification suite behind `verify-all`.
//!
//! Each criterion groups a handful of [`Check`]s. The theta differential and
//! its cocycle are computed once per process and shared.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circle::{
    is_tangential, kernel_coeff, kernel_mass, poisson_extend, poisson_kernel_field, radial_l2_restriction,
    split_tangential_h2, tangential_h2_kernel, killing_coords, CircleField, KillingTriple,
};
use crate::error::Result;
use crate::fuchsian::{
    commutator_rank, octagon_group, phi_map, roundtrip, theta_qd, Alphabet, CohomologyBasis, PhiConfig,
    PhiResult, PsiConfig, Seed,
};
use crate::harmonic::{closed_disk_extension, MonomialField, XiReg, YPowerField};
use crate::io::{Check, Report};
use crate::moebius::{cayley, stab1_element, IsometryClass, CLASSIFY_TOL};
use crate::qdiff::{
    beta, fd_dz, VectorField, fd_dzbar, harmonic_residual, holomorphy_residual, rect_grid, Domain, FnField,
    FnQuadDiff, RationalQd, TryFnField,
};
use crate::{C64, I};

#[derive(Clone, Debug)]
pub struct Criterion {
    pub name: &'static str,
    pub checks: Vec<Check>,
}

impl Criterion {
    pub fn pass(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|c| c.pass)
    }
}

fn criterion(name: &'static str, checks: Result<Vec<Check>>) -> Criterion {
    match checks {
        Ok(checks) => Criterion { name, checks },
        Err(e) => Criterion { name, checks: vec![Check::failed(name, &e)] },
    }
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |m, v| if v.is_nan() || m.is_nan() { f64::NAN } else { m.max(v) })
}

/// Suite grid: x ∈ [−1.5, 1.5], y ∈ [0.5, 3], 15 × 15.
pub fn suite_grid() -> Vec<C64> {
    rect_grid(-1.5, 1.5, 15, 0.5, 3.0, 15)
}

/// β(yⁿ f η) against −n i y^{n−3} conj(f).
pub fn y_power_identity() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let grid = suite_grid();
        let seeds: [fn(C64) -> C64; 3] = [|_| C64::new(1.0, 0.0), |z| z, |z| z * z];
        let mut checks = Vec::new();
        for n in 3..=5 {
            let mut worst: f64 = 0.0;
            for f in seeds {
                let xi = YPowerField::new(n, f);
                for &z in &grid {
                    let p = xi.predicted_qd(z);
                    let b = beta(&xi, z, None)?;
                    worst = worst.max((b - p).norm() / p.norm().max(1e-300));
                }
            }
            checks.push(Check::below(&format!("y_power.n{n}.relative_error"), worst, 1e-5));
        }
        Ok(checks)
    };
    criterion("y-power differentials", run())
}

/// β of the explicit monomial and shifted fields, and their harmonic residuals.
pub fn explicit_surjectivity() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let grid = suite_grid();
        let a = C64::new(0.3, 0.7);
        let mut checks = Vec::new();
        let mut worst_beta: f64 = 0.0;
        let mut worst_res: f64 = 0.0;
        let mut worst_shift: f64 = 0.0;
        for n in 0..=3u32 {
            for (shift, worst) in [(C64::new(0.0, 0.0), &mut worst_beta), (a, &mut worst_shift)] {
                let m = MonomialField::shifted(n, shift);
                // hide the closed-form ∂/∂z̄ so β goes through the stencil
                let fd = FnField::new(Domain::HalfPlane, move |z| m.value(z));
                for &z in &grid {
                    let target = (z - shift).powu(n);
                    *worst = worst.max((beta(&fd, z, None)? - target).norm());
                    let (r1, r2) = harmonic_residual(&fd, z, Some(1e-3))?;
                    worst_res = worst_res.max(r1.abs()).max(r2.abs());
                }
            }
        }
        checks.push(Check::below("monomial.beta_error", worst_beta, 1e-5));
        checks.push(Check::below("shifted.beta_error", worst_shift, 1e-5));
        checks.push(Check::below("explicit.harmonic_residual", worst_res, 1e-5));
        Ok(checks)
    };
    criterion("explicit surjectivity", run())
}

/// ξ^reg for (z + i)⁻⁴.
pub fn regularized_field() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let bounds = RationalQd::bounds();
        let xr = XiReg::new(RationalQd, Some(bounds), 1e-9)?;
        let mut checks = Vec::new();
        checks.push(Check::below("xi_reg.value_at_i", xr.eval_at(I)?.norm(), 1e-10));
        let grid = rect_grid(-1.5, 1.5, 7, 0.2, 3.0, 7);
        let errs = crate::par::map(&grid, |&z| -> Result<f64> {
            let b = beta(&xr, z, None)?;
            Ok((b - (z + I).powi(-4)).norm())
        });
        let worst = max_of(errs.into_iter().collect::<Result<Vec<_>>>()?);
        checks.push(Check::below("xi_reg.beta_error", worst, 1e-5));
        let probes: Vec<C64> = (0..50)
            .map(|k| {
                let t = k as f64 * 2.399963229728653;
                C64::new(3.0 * t.cos() * (k as f64 / 50.0), 0.2 + 2.5 * (0.5 + 0.5 * t.sin()))
            })
            .collect();
        let ratios = crate::par::map(&probes, |&z| -> Result<f64> {
            let c = xr.cutoff(z);
            let d = (xr.eval_with(z, c, xr.eps)? - xr.eval_with(z, 2.0 * c, xr.eps)?).norm();
            Ok(d / xr.tail_bound(z, c))
        });
        let worst = max_of(ratios.into_iter().collect::<Result<Vec<_>>>()?);
        checks.push(Check::below("xi_reg.doubling_over_tail_bound", worst, 1.0));
        Ok(checks)
    };
    criterion("regularized field", run())
}

/// Decay of the disk extension toward the image of ∞ and the boundary limit.
pub fn boundary_extension() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let bounds = RationalQd::bounds();
        let xr = XiReg::new(RationalQd, Some(bounds), 1e-9)?;
        let mut checks = Vec::new();
        let mut vals = Vec::new();
        for y in [10.0, 100.0, 1000.0] {
            vals.push(closed_disk_extension(&xr, cayley(C64::new(0.0, y))?)?.norm());
        }
        let steps = vals.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        checks.push(Check::below("extension.decay_step", steps, 0.0));
        checks.push(Check::below("extension.value_at_1000i", vals[2], 1e-2));
        checks.push(Check::below("extension.value_at_1", closed_disk_extension(&xr, C64::new(1.0, 0.0))?.norm(), 1e-300));
        let bound = bounds.d / 4.0 * 1e-7;
        let mut worst: f64 = 0.0;
        for x in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            let z = C64::new(x, 0.0);
            let c = xr.cutoff(z);
            let a = xr.eval_with(z, c, 1e-8)?;
            let b = xr.eval_with(z, c, 1e-7)?;
            worst = worst.max((a - b).norm() / bound);
        }
        checks.push(Check::below("extension.boundary_limit_over_bound", worst, 1.0));
        Ok(checks)
    };
    criterion("boundary extension", run())
}

fn random_trig_field(rng: &mut ChaCha8Rng, deg: i64, n: usize) -> Result<CircleField> {
    let mut coeffs = vec![C64::new(0.0, 0.0); n];
    for m in -deg..=deg {
        let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        coeffs[m.rem_euclid(n as i64) as usize] = c;
    }
    CircleField::from_coeffs(&coeffs)
}

/// Tangential/ℋ² splitting and the Killing intersection.
pub fn fourier_splitting(count: usize) -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut recon, mut neg, mut tang): (f64, f64, usize) = (0.0, 0.0, 0);
        for _ in 0..count {
            let deg = rng.random_range(1..=8);
            let x = random_trig_field(&mut rng, deg, 64)?;
            let s = split_tangential_h2(&x);
            recon = recon.max(s.tangential_part.add(&s.h2_part).sub(&x).sup_norm());
            for m in 1..32 {
                neg = neg.max(s.h2_part.coeff(-m).norm());
            }
            if !is_tangential(&s.tangential_part, 1e-9) {
                tang += 1;
            }
        }
        let mut checks = vec![
            Check::below("split.reconstruction_error", recon, 1e-9),
            Check::below("split.h2_negative_frequency", neg, 1e-9),
            Check::equals("split.non_tangential_count", tang as f64, 0.0),
        ];
        let (rank, nullity, basis) = tangential_h2_kernel(10);
        checks.push(Check::equals("intersection.rank", rank as f64, 39.0));
        checks.push(Check::equals("intersection.nullity", nullity as f64, 3.0));
        // each Killing basis field lies in the computed null space
        let mut worst: f64 = 0.0;
        for k in KillingTriple::basis() {
            let v = killing_coords(&k, 10);
            let proj = &basis * (basis.transpose() * &v);
            worst = worst.max((&v - proj).norm() / v.norm());
        }
        checks.push(Check::below("intersection.killing_basis_residual", worst, 1e-9));
        Ok(checks)
    };
    criterion("fourier splitting", run())
}

/// Poisson kernel field: value, Taylor data, Stab(1) covariance, harmonicity
/// and kernel mass.
pub fn kernel_facts() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let mut checks = Vec::new();
        let k0 = poisson_kernel_field(C64::new(0.0, 0.0));
        checks.push(Check::equals("kernel.value_at_0_error", (k0 - I).norm(), 0.0));
        let printed = [((0, 0), 1.0), ((1, 0), 1.0), ((0, 1), 3.0), ((2, 0), 1.0), ((1, 1), 0.0), ((0, 2), 6.0)];
        let taylor = max_of(printed.iter().map(|&((p, q), v)| (kernel_coeff(p, q) - v).abs()));
        checks.push(Check::below("kernel.taylor_coefficients", taylor, 1e-10));
        let mut series: f64 = 0.0;
        for k in 0..24 {
            let z = C64::from_polar(0.3, k as f64 * 0.37);
            let mut s = C64::new(0.0, 0.0);
            for p in 0..60u32 {
                for q in 0..60u32 {
                    s += kernel_coeff(p, q) * z.powu(p) * z.conj().powu(q);
                }
            }
            series = series.max((I * s - poisson_kernel_field(z)).norm());
        }
        checks.push(Check::below("kernel.taylor_series_error", series, 1e-10));
        let stab = [
            (C64::new(1.25, 0.0), C64::new(-0.75, 0.0)),
            (C64::new(1.25, 0.0), C64::new(0.75, 0.0)),
            (C64::new(2.0, 0.0), C64::new(-(3f64).sqrt(), 0.0)),
            (C64::new(0.5f64.cosh(), 0.4), C64::new(0.5f64.sinh(), -0.4)),
            (C64::new(0.2f64.cosh(), -1.1), C64::new(-(0.2f64.sinh()), 1.1)),
        ];
        let mut cov: f64 = 0.0;
        for (a, b) in stab {
            let g = stab1_element(a, b)?;
            let d1 = g.derivative(C64::new(1.0, 0.0))?;
            for k in 0..100 {
                let z = C64::from_polar(0.9 * ((k as f64 + 0.5) / 100.0).sqrt(), k as f64 * 2.399963229728653);
                let lhs = poisson_kernel_field(g.apply(z)?) / g.derivative(z)?;
                let rhs = poisson_kernel_field(z) / (d1 * d1);
                cov = cov.max((lhs - rhs).norm() / rhs.norm().max(1.0));
            }
        }
        checks.push(Check::below("kernel.stab1_covariance", cov, 1e-9));
        let kf = FnField::new(Domain::Disk, poisson_kernel_field);
        let grid = rect_grid(-2.0, 2.0, 20, 0.3, 3.0, 20);
        let res = crate::par::map(&grid, |&zh| -> Result<f64> {
            let (r1, r2) = harmonic_residual(&kf, cayley(zh)?, None)?;
            Ok(r1.abs().max(r2.abs()))
        });
        checks.push(Check::below("kernel.harmonic_residual", max_of(res.into_iter().collect::<Result<Vec<_>>>()?), 1e-4));
        let small = kernel_mass(1e-3)?;
        checks.push(Check::below("kernel_mass.limit_error", (small.contour - I).norm(), 5e-3));
        checks.push(Check::below("kernel_mass.haar_error", (small.haar - I).norm(), 5e-3));
        let half = kernel_mass(0.5)?;
        let agree = (small.contour - small.closed_form).norm().max((half.contour - half.closed_form).norm());
        checks.push(Check::below("kernel_mass.residue_agreement", agree, 1e-7));
        Ok(checks)
    };
    criterion("poisson kernel field", run())
}

/// Octagon group: relation, hyperbolicity, cocycle space dimensions and
/// commutator ranks.
pub fn cohomology_dimensions() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let g = octagon_group()?;
        let mut checks = vec![Check::below("octagon.relation_residual", g.relation_residual(), 1e-9)];
        let elems = g.enumerate(Alphabet::Generators, 6)?;
        let bad = crate::par::map(&elems[1..], |e| e.map.classify(CLASSIFY_TOL) != IsometryClass::Hyperbolic)
            .into_iter()
            .filter(|&b| b)
            .count();
        checks.push(Check::equals("octagon.words_checked", (elems.len() - 1) as f64, 156864.0));
        checks.push(Check::equals("octagon.non_hyperbolic_words", bad as f64, 0.0));
        let (z1, b1, h1) = CohomologyBasis::new(&g).dims();
        checks.push(Check::equals("cohomology.dim_z1", z1 as f64, 9.0));
        checks.push(Check::equals("cohomology.dim_b1", b1 as f64, 3.0));
        checks.push(Check::equals("cohomology.dim_h1", h1 as f64, 6.0));
        let x = &g.generators;
        for (i, j, name) in [(0, 1, "a1_b1"), (2, 3, "a2_b2"), (0, 2, "a1_a2")] {
            let r = commutator_rank(&x[i], &x[j], 1e-6)?;
            checks.push(Check::equals(&format!("commutator_rank.{name}"), r as f64, 3.0));
        }
        Ok(checks)
    };
    criterion("cohomology dimensions", run())
}

static THETA_PHI: OnceLock<std::result::Result<PhiResult, String>> = OnceLock::new();

/// Φ of the L = 6 theta series of the constant seed, computed once.
pub fn theta_phi() -> std::result::Result<&'static PhiResult, String> {
    THETA_PHI
        .get_or_init(|| {
            let g = octagon_group().map_err(|e| e.to_string())?;
            let q = theta_qd(Seed::constant(1.0), &g, 6).map_err(|e| e.to_string())?;
            phi_map(&q, &g, &PhiConfig::default()).map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| e.clone())
}

/// Killing fit of δχ, relation constraint and injectivity witness.
pub fn phi_audit() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let r = theta_phi().map_err(crate::error::Error::ConstructionFailed)?;
        let g = octagon_group()?;
        let basis = CohomologyBasis::new(&g);
        let fit = max_of(r.relative_residuals.iter().cloned());
        let noise = r.max_absolute_residual().max(r.relation_residual);
        Ok(vec![
            Check::below("phi.killing_fit_relative", fit, 1e-3),
            Check::below("phi.relation_residual", r.relation_residual, r.relation_tol),
            Check::above("phi.b1_complement_over_residual", basis.b1_complement_norm(&r.cocycle) / noise, 10.0),
        ])
    };
    criterion("phi audit", run())
}

/// Radial convergence of ℱ(cos 2θ · iz).
pub fn poisson_convergence() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let x = CircleField::from_fn(4096, |z| {
            let c = z.re;
            C64::new(2.0 * c * c - 1.0, 0.0) * I * z
        })?;
        let f = poisson_extend(&x)?;
        let mut errs = Vec::new();
        for r in [0.9, 0.99, 0.999] {
            errs.push(radial_l2_restriction(&f, r, 4096)?.l2_dist(&x));
        }
        let step = errs.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        Ok(vec![
            Check::below("poisson.error_step", step, 0.0),
            Check::below("poisson.error_at_0.999", errs[2], 0.01),
        ])
    };
    criterion("poisson extension convergence", run())
}

/// Φ(Ψ(c)) against c in H¹ coordinates.
pub fn round_trip() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let r = theta_phi().map_err(crate::error::Error::ConstructionFailed)?;
        let g = octagon_group()?;
        let rt = roundtrip(&r.cocycle, &g, &PsiConfig::default(), &PhiConfig::default())?;
        Ok(vec![
            Check::below("roundtrip.relative_h1_error", rt.relative_error, 0.05),
            Check::below("roundtrip.killing_fit_relative", max_of(rt.output.relative_residuals.iter().cloned()), 1e-3),
        ])
    };
    criterion("round trip", run())
}

/// Empirical order log₂(|R(h) − R(h/2)| / |R(h/2) − R(h/4)|).
pub fn richardson_order<F: Fn(f64) -> Result<f64>>(r: F, h: f64) -> Result<f64> {
    let (a, b, c) = (r(h)?, r(h / 2.0)?, r(h / 4.0)?);
    Ok(((a - b).abs() / (b - c).abs()).log2())
}

fn complex_order<F: Fn(f64) -> Result<C64>>(r: F, h: f64) -> Result<f64> {
    let (a, b, c) = (r(h)?, r(h / 2.0)?, r(h / 4.0)?);
    Ok(((a - b).norm() / (b - c).norm()).log2())
}

/// Convergence order of every finite-difference stencil.
pub fn fd_order() -> Criterion {
    let run = || -> Result<Vec<Check>> {
        let xi = YPowerField::new(4, |z: C64| z.exp());
        let ev = |w: C64| xi.eval(w);
        let z = C64::new(0.3, 1.2);
        let h = 0.05;
        let mut checks = Vec::new();
        checks.push(Check::above("fd.dzbar_order", complex_order(|h| fd_dzbar(ev, z, h), h)?, 1.9));
        checks.push(Check::above("fd.dz_order", complex_order(|h| fd_dz(ev, z, h), h)?, 1.9));
        let plain = TryFnField { domain: Domain::HalfPlane, f: ev };
        checks.push(Check::above("fd.beta_order", complex_order(|h| beta(&plain, z, Some(h)), h)?, 1.9));
        checks.push(Check::above(
            "fd.residual_r1_order",
            richardson_order(|h| Ok(harmonic_residual(&plain, z, Some(h))?.0), h)?,
            1.9,
        ));
        checks.push(Check::above(
            "fd.residual_r2_order",
            richardson_order(|h| Ok(harmonic_residual(&plain, z, Some(h))?.1), h)?,
            1.9,
        ));
        let q = FnQuadDiff::new(Domain::HalfPlane, |w: C64| w.conj().exp() * w * w);
        checks.push(Check::above(
            "fd.holomorphy_order",
            richardson_order(|h| holomorphy_residual(&q, z, Some(h)), h)?,
            1.9,
        ));
        let disk = FnField::new(Domain::Disk, |w: C64| w.norm_sqr() * w * w);
        let w = C64::new(0.2, -0.3);
        checks.push(Check::above(
            "fd.disk_residual_order",
            richardson_order(|h| Ok(harmonic_residual(&disk, w, Some(h))?.0), 0.1)?,
            1.9,
        ));
        Ok(checks)
    };
    criterion("finite-difference order", run())
}

/// All criteria in order. `fast` trims the random sample counts.
pub fn run_all(fast: bool) -> Vec<Criterion> {
    vec![
        y_power_identity(),
        explicit_surjectivity(),
        regularized_field(),
        boundary_extension(),
        fourier_splitting(if fast { 50 } else { 200 }),
        kernel_facts(),
        cohomology_dimensions(),
        phi_audit(),
        poisson_convergence(),
        round_trip(),
        fd_order(),
    ]
}

pub fn report(criteria: &[Criterion]) -> Report {
    Report::new(criteria.iter().flat_map(|c| c.checks.iter().cloned()).collect())
}
