use std::f64::consts::PI;

use hyperharm::circle::*;
use hyperharm::error::Error;
use hyperharm::moebius::{pullback_field, zero_to_z, MoebiusMap};
use hyperharm::qdiff::{fd_dzbar, VectorField};
use hyperharm::C64;
use proptest::prelude::*;

const I: C64 = C64::new(0.0, 1.0);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

// test-side tangential field z̄ − z³ = (z⁻¹ − z³) on the circle
fn sample_tangential(n: usize) -> CircleField {
    CircleField::from_fn(n, |z| z.inv() - z.powu(3)).unwrap()
}

#[test]
fn sample_counts() {
    assert!(check_n(64).is_ok() && check_n(4096).is_ok());
    assert!(matches!(check_n(32), Err(Error::InvalidSampleCount(32))));
    assert!(check_n(100).is_err());
    assert!(CircleField::new(vec![c(0.0, 0.0); 96]).is_err());
    assert_eq!(freq(0, 64), 0);
    assert_eq!(freq(32, 64), 32);
    assert_eq!(freq(33, 64), -31);
    assert_eq!(freq(63, 64), -1);
}

#[test]
fn coefficients_of_monomials() {
    let x = CircleField::from_fn(64, |z| z.powu(3) + 2.0 * z.inv()).unwrap();
    let cs = x.coeffs();
    for k in 0..64 {
        let m = freq(k, 64);
        let want = match m {
            3 => c(1.0, 0.0),
            -1 => c(2.0, 0.0),
            _ => c(0.0, 0.0),
        };
        assert!((cs[k] - want).norm() < 1e-14, "{m}");
    }
    let back = CircleField::from_coeffs(&cs).unwrap();
    assert!(back.l2_dist(&x) < 1e-14);
    assert!((x.coeff(-1) - 2.0).norm() < 1e-14);
}

#[test]
fn tangency() {
    let rot = CircleField::from_fn(64, |z| I * z).unwrap();
    assert!(is_tangential(&rot, 1e-14));
    assert!(rot.tangential_factor().iter().all(|f| (f - 1.0).abs() < 1e-15));
    let radial = CircleField::from_fn(64, |z| z).unwrap();
    assert!((radial.normal_defect() - 1.0).abs() < 1e-14);
    assert!(!is_tangential(&radial, 0.5));
    for k in KillingTriple::basis() {
        assert!(is_tangential(&k.restrict(128).unwrap(), 1e-14));
    }
    assert!(is_tangential(&sample_tangential(64), 1e-14));
}

#[test]
fn split_of_single_negative_mode() {
    let x = CircleField::from_fn(64, |z| z.inv()).unwrap();
    let s = split_tangential_h2(&x);
    assert!(s.tangential_part.l2_dist(&sample_tangential(64)) < 1e-14);
    let h2 = CircleField::from_fn(64, |z| z.powu(3)).unwrap();
    assert!(s.h2_part.l2_dist(&h2) < 1e-14);
}

#[test]
fn split_is_idempotent() {
    let x = CircleField::from_fn(128, |z| (0.3 * z.inv()).exp() + z * z * c(0.2, 0.7)).unwrap();
    let s = split_tangential_h2(&x);
    let again = split_tangential_h2(&s.tangential_part);
    assert!(again.tangential_part.l2_dist(&s.tangential_part) < 1e-14);
    assert!(again.h2_part.l2_norm() < 1e-14);
    assert!(split_tangential_h2(&s.h2_part).tangential_part.l2_norm() < 1e-14);
}

#[test]
fn killing_projection_recovers_killing_fields() {
    let k = KillingTriple::new(c(0.3, -0.2), 0.7);
    let (fit, res) = killing_project(&k.restrict(256).unwrap());
    assert!(fit.sub(&k).norm() < 1e-13 && res < 1e-13);
    // z̄ − z³ is orthogonal to the Killing modes 0, 1, 2
    let (fit, res) = killing_project(&sample_tangential(256));
    assert!(fit.norm() < 1e-13);
    assert!((res - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn killing_basis_values() {
    let z = c(0.3, 0.4);
    assert!((KillingTriple::rotation().eval(z) - I * z).norm() < 1e-15);
    assert!((KillingTriple::real_translation().eval(z) - (z * z - 1.0) / 2.0).norm() < 1e-15);
    assert!((KillingTriple::imag_translation().eval(z) - I * (z * z + 1.0) / 2.0).norm() < 1e-15);
    let k = KillingTriple::from_vec([1.0, 2.0, 3.0]);
    assert_eq!(k.to_vec(), [1.0, 2.0, 3.0]);
    assert_eq!(k.add(&k), k.scale(2.0));
    assert_eq!(k.sub(&k), KillingTriple::default());
}

#[test]
fn killing_pullback_matches_field_pullback() {
    let g = zero_to_z(c(0.2, -0.4)).unwrap();
    let k = KillingTriple::new(c(-0.1, 0.5), 1.3);
    let pk = k.pullback(&g);
    let direct = pullback_field(&g, &k);
    for z in [c(0.0, 0.0), c(0.5, 0.1), c(-0.3, -0.6)] {
        assert!((pk.eval(z) - direct.eval(z).unwrap()).norm() < 1e-13);
    }
}

#[test]
fn tangential_h2_intersection_is_three_dimensional() {
    let (rank, nullity, basis) = tangential_h2_kernel(10);
    assert_eq!((rank, nullity), (39, 3));
    for k in KillingTriple::basis() {
        let v = killing_coords(&k, 10);
        let proj = &basis * (basis.transpose() * &v);
        assert!((proj - &v).norm() < 1e-12);
    }
}

#[test]
fn scalar_poisson_reproduces_harmonic_functions() {
    let n = 256;
    let one = vec![1.0; n];
    let cos: Vec<f64> = (0..n).map(|k| (2.0 * PI * k as f64 / n as f64).cos()).collect();
    let sq: Vec<f64> = (0..n).map(|k| (4.0 * PI * k as f64 / n as f64).sin()).collect();
    for z in [c(0.0, 0.0), c(0.5, 0.2), c(-0.1, -0.7)] {
        assert!((scalar_poisson(&one, z).unwrap() - 1.0).abs() < 1e-12);
        assert!((scalar_poisson(&cos, z).unwrap() - z.re).abs() < 1e-12);
        assert!((scalar_poisson(&sq, z).unwrap() - (z * z).im).abs() < 1e-12);
    }
    assert!(matches!(scalar_poisson(&one, c(1.0, 0.0)), Err(Error::TooCloseToBoundary(_))));
}

#[test]
fn kernel_values_and_coefficients() {
    assert_eq!(poisson_kernel_field(c(0.0, 0.0)), I);
    assert_eq!(kernel_coeff(0, 0), 1.0);
    assert_eq!(kernel_coeff(0, 1), 3.0);
    assert_eq!(kernel_coeff(0, 2), 6.0);
    // (1 − x)³/(1 − x)³ = 1 kills every coefficient with 1 ≤ q ≤ p
    for p in 1..8 {
        assert_eq!(kernel_coeff(p, 0), 1.0);
        for q in 1..=p {
            assert_eq!(kernel_coeff(p, q), 0.0);
        }
    }
}

#[test]
fn kernel_series_converges() {
    // K/i = (1 − |z|²)³ / ((1 − z)(1 − z̄)³)
    let z = c(0.2, -0.15);
    let direct = (1.0 - z.norm_sqr()).powi(3) / ((1.0 - z) * (1.0 - z.conj()).powu(3));
    assert!((poisson_kernel_field(z) / I - direct).norm() < 1e-14);
    let mut s = c(0.0, 0.0);
    for p in 0..60u32 {
        for q in 0..60u32 {
            s += kernel_coeff(p, q) * z.powu(p) * z.conj().powu(q);
        }
    }
    assert!((s - direct).norm() < 1e-10);
}

#[test]
fn extension_rejects_normal_fields() {
    let radial = CircleField::from_fn(64, |z| z).unwrap();
    assert!(matches!(poisson_extend(&radial), Err(Error::NotTangential(_))));
}

#[test]
fn extension_of_rotation_is_rotation() {
    let rot = KillingTriple::rotation().restrict(256).unwrap();
    let e = poisson_extend(&rot).unwrap();
    for z in [c(0.0, 0.0), c(0.4, 0.3), c(-0.8, 0.1)] {
        assert!((e.eval(z).unwrap() - I * z).norm() < 1e-13);
    }
    assert!(matches!(e.eval(c(1.0, 0.0)), Err(Error::DomainViolation)));
}

#[test]
fn mode_formula_matches_trapezoid() {
    let x = split_tangential_h2(&CircleField::from_fn(1024, |z| (0.5 * z.inv()).exp() * c(0.3, 1.0)).unwrap()).tangential_part;
    for v in [Convolution::RotationEquivariant, Convolution::BareScalar] {
        let e = poisson_extend_with(&x, v).unwrap();
        for z in [c(0.1, 0.2), c(0.6, -0.3), c(-0.2, -0.85)] {
            assert!((e.value(z) - e.value_trapezoid(z)).norm() < 1e-10, "{v:?} {z}");
        }
    }
}

#[test]
fn extension_dzbar_matches_difference_quotient() {
    let x = sample_tangential(256);
    let e = poisson_extend(&x).unwrap();
    let z = c(0.3, -0.4);
    let fd = fd_dzbar(|w| e.eval(w), z, 1e-4).unwrap();
    assert!((fd - e.dzbar(z)).norm() < 1e-6);
}

#[test]
fn extension_is_rotation_equivariant() {
    let n = 256;
    let j = 37;
    let phi = 2.0 * PI * j as f64 / n as f64;
    let rho = C64::from_polar(1.0, phi);
    let x = split_tangential_h2(&CircleField::from_fn(n, |z| (z.inv() * c(0.4, 0.2)).exp()).unwrap()).tangential_part;
    let rotated = CircleField::new((0..n).map(|k| rho * x.samples[(k + n - j) % n]).collect()).unwrap();
    let (e, er) = (poisson_extend(&x).unwrap(), poisson_extend(&rotated).unwrap());
    for z in [c(0.1, 0.5), c(-0.6, 0.2)] {
        assert!((er.value(z) - rho * e.value(z / rho)).norm() < 1e-12);
    }
}

#[test]
fn extension_converges_to_boundary_values() {
    let x = sample_tangential(4096);
    let e = poisson_extend(&x).unwrap();
    let errs: Vec<f64> = [0.9, 0.99, 0.999]
        .iter()
        .map(|&r| radial_l2_restriction(&e, r, 4096).unwrap().l2_dist(&x))
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] < 0.01);
}

#[test]
fn kernel_mass_values() {
    let m = kernel_mass(0.01).unwrap();
    assert!((m.haar - I).norm() < 1e-10);
    assert!((m.contour - m.closed_form).norm() < 1e-9 * m.closed_form.norm().max(1.0));
    assert!(m.samples >= 4096 && m.samples.is_power_of_two());
    assert!(matches!(kernel_mass(0.0), Err(Error::Config(_))));
    assert!(kernel_mass(1.5).is_err());
}

#[test]
fn radial_restriction_of_killing_field() {
    let k = KillingTriple::rotation();
    let r = radial_l2_restriction(&k, 0.5, 64).unwrap();
    for (z, v) in r.points().iter().zip(&r.samples) {
        assert!((v - 0.5 * I * z).norm() < 1e-15);
    }
    assert!(radial_l2_restriction(&k, 1.0, 64).is_err());
    assert!(radial_l2_restriction(&k, 0.5, 65).is_err());
}

#[test]
fn json_round_trips() {
    let x = sample_tangential(64);
    let s = serde_json::to_string(&x).unwrap();
    assert!(s.contains("\"N\":64"));
    assert_eq!(serde_json::from_str::<CircleField>(&s).unwrap(), x);
    assert!(serde_json::from_str::<CircleField>(r#"{"N":64,"samples":[[0,0]]}"#).is_err());
    let k = KillingTriple::new(c(0.1, 0.2), 0.3);
    let back: KillingTriple = serde_json::from_str(&serde_json::to_string(&k).unwrap()).unwrap();
    assert_eq!(back, k);
}

fn random_field(n: usize) -> impl Strategy<Value = CircleField> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), n)
        .prop_map(|v| CircleField::new(v.into_iter().map(|(a, b)| c(a, b)).collect()).unwrap())
}

proptest! {
    #[test]
    fn parseval(x in random_field(64)) {
        let e: f64 = x.coeffs().iter().map(|c| c.norm_sqr()).sum();
        prop_assert!((x.l2_norm().powi(2) - e).abs() < 1e-12);
    }

    #[test]
    fn split_parts(x in random_field(128)) {
        let s = split_tangential_h2(&x);
        prop_assert!(s.tangential_part.add(&s.h2_part).l2_dist(&x) < 1e-14);
        prop_assert!(is_tangential(&s.tangential_part, 1e-12));
        let h = s.h2_part.coeffs();
        for m in 1..63i64 {
            prop_assert!(h[(128 - m) as usize].norm() < 1e-14);
        }
    }

    #[test]
    fn pullback_is_a_killing_field(ar in -1.0..1.0f64, ai in -1.0..1.0f64, b in -1.0..1.0f64,
                                   r in 0.0..0.9f64, t in 0.0..6.3f64, w in 0.0..0.9f64, s in 0.0..6.3f64) {
        let k = KillingTriple::new(c(ar, ai), b);
        let g: MoebiusMap = zero_to_z(C64::from_polar(r, t)).unwrap();
        let z = C64::from_polar(w, s);
        let lhs = k.pullback(&g).eval(z);
        let rhs = k.eval(g.apply(z).unwrap()) / g.derivative(z).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
    }
}
