use hyperharm::circle::KillingTriple;
use hyperharm::error::Error;
use hyperharm::fuchsian::cocycle::{coboundary_fields, extend_word, CoboundaryField};
use hyperharm::fuchsian::group::{dedup_elements, inverse_word, reduce, reduced_word_count, WORD_CAP};
use hyperharm::fuchsian::phi::{phi_map, relative_defect, PhiConfig};
use hyperharm::fuchsian::theta::probe_points;
use hyperharm::fuchsian::*;
use hyperharm::moebius::{IsometryClass, MoebiusMap, CLASSIFY_TOL};
use hyperharm::qdiff::{harmonic_residual, holomorphy_residual, Domain, FnQuadDiff, QuadDiff, VectorField};
use hyperharm::C64;
use nalgebra::DVector;
use proptest::prelude::*;
use std::sync::OnceLock;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn group() -> &'static GroupPresentation {
    static G: OnceLock<GroupPresentation> = OnceLock::new();
    G.get_or_init(|| octagon_group().unwrap())
}

fn basis() -> &'static CohomologyBasis {
    static B: OnceLock<CohomologyBasis> = OnceLock::new();
    B.get_or_init(|| CohomologyBasis::new(group()))
}

fn z1_cocycle(coords: &[f64]) -> Cocycle {
    let b = basis();
    Cocycle::from_vector(&(&b.z1 * DVector::from_column_slice(coords)))
}

// round-off allowance: the relation map has entries of size ~10³
fn relation_tol(k: &Cocycle) -> f64 {
    1e-10 * basis().relation.norm() * k.norm().max(1.0)
}

fn map_of(w: &[u8]) -> MoebiusMap {
    group().to_disk().eval_word(Alphabet::Generators, w)
}

#[test]
fn word_counts() {
    assert_eq!(reduced_word_count(4, 0), 1);
    assert_eq!(reduced_word_count(4, 1), 9);
    // 1 + 8 + 56 + 392 + 2744
    assert_eq!(reduced_word_count(4, 4), 3201);
    let e = group().enumerate(Alphabet::SidePairings, 4).unwrap();
    assert_eq!(e.len(), 3201);
    assert!(e.iter().all(|x| reduce(&x.word) == x.word));
    assert!(reduced_word_count(4, 7) > WORD_CAP);
    assert!(matches!(
        group().enumerate(Alphabet::SidePairings, 8),
        Err(Error::TruncationTooLarge(7_686_401))
    ));
}

#[test]
fn octagon_relations() {
    let g = group();
    assert!(g.relation_residual() < 1e-12);
    let r = g.eval_word(Alphabet::SidePairings, &g.relator(Alphabet::SidePairings));
    assert!(r.is_identity(1e-12));
    for m in g.side_pairing_maps().iter().chain(g.generators.iter()) {
        assert_eq!(m.classify(CLASSIFY_TOL), IsometryClass::Hyperbolic);
    }
    for (w, s) in g.side_pairing_words().iter().zip(g.side_pairings.as_ref().unwrap()) {
        let m = g.eval_word(Alphabet::Generators, w);
        assert!(m.compose(&s.inverse()).is_identity(1e-10));
    }
}

#[test]
fn presentation_checks() {
    let g = group();
    assert!(matches!(GroupPresentation::new(2, g.generators[..3].to_vec(), None), Err(Error::Config(_))));
    let mut bad = g.generators.clone();
    bad.swap(0, 1);
    assert!(matches!(GroupPresentation::new(2, bad, None), Err(Error::ConstructionFailed(_))));
    assert!(GroupPresentation::new(2, g.generators.clone(), None).is_ok());
    let s = serde_json::to_string(g).unwrap();
    let back: GroupPresentation = serde_json::from_str(&s).unwrap();
    assert_eq!(back.generators, g.generators);
}

#[test]
fn dedup_merges_relator_halves() {
    let g = group();
    // [a1, b1] = ([a2, b2])⁻¹
    let u: Word = vec![0, 2, 1, 3];
    let v: Word = vec![6, 4, 7, 5];
    let w: Word = vec![0, 2];
    let elems: Vec<Element> = [u, v, w]
        .into_iter()
        .map(|word| Element { map: g.eval_word(Alphabet::Generators, &word), word })
        .collect();
    let (reps, idx) = dedup_elements(&elems, 1e-8);
    assert_eq!(reps.len(), 2);
    assert_eq!(idx, vec![0, 0, 1]);
}

#[test]
fn cohomology_dims() {
    assert_eq!(cocycle_space_dims(group()), (9, 3, 6));
    assert_eq!(basis().dims(), (9, 3, 6));
}

#[test]
fn coboundaries_are_cocycles_with_zero_class() {
    let u = KillingTriple::new(c(0.3, -0.1), 0.8);
    let d = coboundary(&u, group());
    assert!(d.relation_residual(group()) < relation_tol(&d));
    assert!(basis().h1_coords(&d).norm() < 1e-12);
    assert!(basis().b1_complement_norm(&d) < 1e-12);
    // δu on an arbitrary word is γ*u − u
    let w: Word = vec![0, 5, 2, 2, 7];
    let expected = u.pullback(&map_of(&w)).sub(&u);
    assert!(d.eval_word(group(), &w).sub(&expected).norm() < 1e-12 * expected.norm().max(1.0));
}

#[test]
fn coboundary_fields_match_triples() {
    let u = KillingTriple::new(c(-0.2, 0.4), 0.3);
    let d = coboundary(&u, group());
    for (f, t) in coboundary_fields(&u, group()).iter().zip(&d.values) {
        for z in [c(0.0, 0.0), c(0.3, -0.2)] {
            assert!((f.eval(z).unwrap() - t.eval(z)).norm() < 1e-12);
        }
    }
}

#[test]
fn z1_projection() {
    let b = basis();
    let raw = Cocycle::new((0..4).map(|k| KillingTriple::new(c(k as f64, 1.0), -0.5)).collect());
    let p = b.project_z1(&raw);
    assert!(p.relation_residual(group()) < relation_tol(&p));
    assert!(b.project_z1(&p).sub(&p).norm() < 1e-12);
    assert!(raw.relation_residual(group()) > 1e-3);
}

#[test]
fn cocycle_json_round_trip() {
    let k = z1_cocycle(&[1.0, -2.0, 0.5, 0.0, 0.0, 1.0, 0.0, 0.3, 0.0]);
    let s = serde_json::to_string(&k).unwrap();
    assert!(s.contains("vector-field"));
    assert_eq!(serde_json::from_str::<Cocycle>(&s).unwrap(), k);
}

#[test]
fn side_values_round_trip() {
    let k = z1_cocycle(&[0.2, 0.1, -0.3, 0.4, 0.0, 0.7, -0.1, 0.2, 0.5]);
    let back = Cocycle::from_side_values(group(), &k.side_values(group()));
    assert!(back.sub(&k).norm() < 1e-10);
}

#[test]
fn commutator_ranks() {
    let g = group().to_disk();
    let [a1, b1, a2, b2] = [g.generators[0], g.generators[1], g.generators[2], g.generators[3]];
    assert_eq!(commutator_rank(&a1, &b1, 1e-5).unwrap(), 3);
    assert_eq!(commutator_rank(&a2, &b2, 1e-5).unwrap(), 3);
    assert_eq!(commutator_rank(&a1, &a2, 1e-5).unwrap(), 3);
    assert!(matches!(commutator_rank(&a1, &a1.compose(&a1), 1e-5), Err(Error::CommutingInputs)));
    let rot = MoebiusMap::su11(C64::from_polar(1.0, 0.3), c(0.0, 0.0)).unwrap();
    assert!(matches!(commutator_rank(&rot, &a1, 1e-5), Err(Error::Config(_))));
}

#[test]
fn seeds() {
    assert_eq!("z^3".parse::<Seed>().unwrap(), Seed::monomial(3));
    assert_eq!("z".parse::<Seed>().unwrap(), Seed::monomial(1));
    assert_eq!("2.5".parse::<Seed>().unwrap(), Seed::constant(2.5));
    let p: Seed = "poly:1,0,2".parse().unwrap();
    let (f, d) = p.eval(c(0.5, 0.5));
    let z = c(0.5, 0.5);
    assert!((f - (1.0 + 2.0 * z * z)).norm() < 1e-15);
    assert!((d - 4.0 * z).norm() < 1e-15);
    assert!(matches!("q".parse::<Seed>(), Err(Error::Config(_))));
    assert!("poly:1,x".parse::<Seed>().is_err());
    assert!(Seed::constant(0.0).is_zero());
    assert_eq!(Seed::constant(1.0).add(&Seed::monomial(1)), "poly:1,1".parse().unwrap());
}

#[test]
fn theta_of_zero_seed_vanishes() {
    let t = theta_qd(Seed::constant(0.0), group(), 3).unwrap();
    assert_eq!(t.coeff(c(0.2, 0.1)), c(0.0, 0.0));
}

#[test]
fn theta_is_linear_and_holomorphic() {
    let (s1, s2) = (Seed::constant(1.0), Seed::monomial(2));
    let (t1, t2, t12) = (
        theta_qd(s1.clone(), group(), 3).unwrap(),
        theta_qd(s2.clone(), group(), 3).unwrap(),
        theta_qd(s1.add(&s2), group(), 3).unwrap(),
    );
    for z in probe_points(8, 0.5) {
        let sum = t1.coeff(z) + t2.coeff(z);
        assert!((t12.coeff(z) - sum).norm() < 1e-10 * (1.0 + sum.norm()));
        assert!(holomorphy_residual(&t12, z, None).unwrap() < 1e-6 * (1.0 + sum.norm()));
        // analytic derivative against a difference quotient
        let h = 1e-5;
        let fd = (t1.coeff(z + h) - t1.coeff(z - h)) / (2.0 * h);
        assert!((t1.eval2(z).1 - fd).norm() < 1e-5 * (1.0 + fd.norm()));
    }
}

#[test]
fn theta_defect_shrinks_with_length() {
    let probes = ThetaQd::default_probes();
    let d4 = theta_qd(Seed::constant(1.0), group(), 4).unwrap().invariance_defect(&probes).1;
    let d6 = theta_qd(Seed::constant(1.0), group(), 6).unwrap();
    let r6 = d6.invariance_defect(&probes).1;
    assert!(r6 < d4, "{d4} {r6}");
    assert!(r6 < 1e-2);
    assert!((relative_defect(&d6, group()).1 - r6).abs() < 1e-12);
}

#[test]
fn phi_rejects_non_invariant_input() {
    let q = FnQuadDiff::new(Domain::Disk, |z: C64| z * z + 1.0);
    assert!(matches!(
        phi_map(&q, group(), &PhiConfig::default()),
        Err(Error::InvarianceDefectTooLarge(_))
    ));
}

#[test]
fn partition_psi_has_prescribed_coboundary() {
    let k = z1_cocycle(&[0.5, -0.2, 0.1, 0.3, 0.0, -0.4, 0.2, 0.1, 0.6]);
    let psi = partition_psi(&k, group(), &PsiConfig::default()).unwrap();
    assert!(psi.neighbor_count() > 1);
    let g = group().to_disk();
    for (m, t) in g.generators.iter().zip(&k.values) {
        let d = CoboundaryField { map: *m, field: &psi };
        for z in probe_points(10, 0.7) {
            assert!((d.eval(z).unwrap() - t.eval(z)).norm() < 1e-5 * (1.0 + t.norm()));
        }
    }
}

#[test]
fn zero_cocycle_gives_zero_differential() {
    let zero = Cocycle::zero(4);
    let psi = partition_psi(&zero, group(), &PsiConfig::default()).unwrap();
    assert_eq!(psi.eval(c(0.3, 0.2)).unwrap(), c(0.0, 0.0));
    let cfg = PsiConfig { samples: 256, ..Default::default() };
    let p = psi_map(&zero, group(), &cfg).unwrap();
    assert_eq!(p.qd.coeff(c(0.1, -0.2)), c(0.0, 0.0));
    assert_eq!(p.boundary_normal_defect, 0.0);
}

#[test]
fn psi_output_is_holomorphic() {
    let k = z1_cocycle(&[0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0]);
    let p = psi_map(&k, group(), &PsiConfig::default()).unwrap();
    let scale = probe_points(10, 0.5).iter().map(|&z| p.qd.coeff(z).norm()).fold(0.0, f64::max);
    assert!(scale > 0.0);
    for z in probe_points(10, 0.5) {
        assert!(holomorphy_residual(&p.qd, z, Some(1e-3)).unwrap() < 1e-4 * scale);
        let (r1, r2) = harmonic_residual(&p.lift, z, None).unwrap();
        assert!(r1.abs() < 1e-6 && r2.abs() < 1e-6);
    }
}

fn word() -> impl Strategy<Value = Word> {
    prop::collection::vec(0u8..8, 0..6).prop_map(|w| reduce(&w))
}

fn z1_coords() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, 9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn cocycle_rule_on_products(coords in z1_coords(), u in word(), v in word()) {
        let k = z1_cocycle(&coords);
        let g = group();
        let mut uv = u.clone();
        uv.extend_from_slice(&v);
        // c_{uv} = v*c_u + c_v
        let lhs = k.eval_word(g, &uv);
        let rhs = k.eval_word(g, &u).pullback(&map_of(&v)).add(&k.eval_word(g, &v));
        prop_assert!(lhs.sub(&rhs).norm() < 1e-8 * (1.0 + rhs.norm()));
    }

    #[test]
    fn cocycles_vanish_on_the_identity(coords in z1_coords(), u in word()) {
        let k = z1_cocycle(&coords);
        let mut w = u.clone();
        w.extend(inverse_word(&u));
        // pulling back by γ_u⁻¹ magnifies round-off by up to |γ_u|²
        let m = map_of(&u);
        let size = m.entries().iter().map(|e| e.norm()).fold(1.0, f64::max);
        let scale = (1.0 + k.eval_word(group(), &u).norm()) * size * size;
        prop_assert!(k.eval_word(group(), &w).norm() < 1e-13 * scale);
        let rel = extend_word(group(), Alphabet::Generators, &k.values, &group().relation_word());
        prop_assert!(rel.norm() < relation_tol(&k));
    }

    #[test]
    fn h1_coordinates_ignore_coboundaries(coords in z1_coords(), ar in -1.0..1.0f64, ai in -1.0..1.0f64, b in -1.0..1.0f64) {
        let k = z1_cocycle(&coords);
        let shifted = k.add(&coboundary(&KillingTriple::new(c(ar, ai), b), group()));
        prop_assert!((basis().h1_coords(&k) - basis().h1_coords(&shifted)).norm() < 1e-10);
    }
}
