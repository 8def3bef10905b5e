//! The assembled curvature operator against the sectional formula it was built from.

use std::sync::OnceLock;

use cayley_core::curvature::{
    assemble, basis, dot, pinch_extremes, random_orthonormal_pair, random_unit, sectional, CurvatureOperator,
    PinchConfig, ProductReading, SectionalFormula, TwoPlane, Vec16, N,
};
use cayley_core::octonion::{OctPair, Octonion};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model() -> &'static CurvatureOperator {
    static OP: OnceLock<CurvatureOperator> = OnceLock::new();
    OP.get_or_init(|| assemble(&SectionalFormula::default()))
}

fn unit_vec() -> impl Strategy<Value = Vec16> {
    any::<u64>().prop_map(|s| random_unit(&mut ChaCha8Rng::seed_from_u64(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn pair_symmetry(x in unit_vec(), y in unit_vec(), z in unit_vec(), w in unit_vec()) {
        let r = model();
        prop_assert!((r.evaluate(&x, &y, &z, &w) - r.evaluate(&z, &w, &x, &y)).abs() < 1e-10);
        prop_assert!((r.evaluate(&x, &y, &z, &w) + r.evaluate(&y, &x, &z, &w)).abs() < 1e-10);
    }

    #[test]
    fn first_bianchi(x in unit_vec(), y in unit_vec(), z in unit_vec(), w in unit_vec()) {
        prop_assert!(model().bianchi_residual(&x, &y, &z, &w).abs() < 1e-10);
    }

    #[test]
    fn ricci_is_a_multiple_of_the_metric(u in unit_vec(), v in unit_vec()) {
        let ric = model().ricci();
        let uv: f64 = (0..N).map(|a| (0..N).map(|b| u[a] * ric[(a, b)] * v[b]).sum::<f64>()).sum();
        prop_assert!((uv + 36.0 * dot(&u, &v)).abs() < 1e-9);
    }

    #[test]
    fn sectional_from_operator_matches_formula(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = random_orthonormal_pair(&mut rng);
        let direct = sectional(&SectionalFormula::default(), &TwoPlane::new(x, y)).unwrap();
        prop_assert!((model().sectional(&x, &y).unwrap() - direct).abs() < 1e-9);
    }
}

#[test]
fn ten_thousand_planes_round_trip_and_pinch() {
    let f = SectionalFormula::default();
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let mut worst_gap: f64 = 0.0;
    for _ in 0..10_000 {
        let (x, y) = random_orthonormal_pair(&mut rng);
        let k = sectional(&f, &TwoPlane::new(x, y)).unwrap();
        assert!((-4.0 - 1e-9..=-1.0 + 1e-9).contains(&k), "K = {k}");
        worst_gap = worst_gap.max((model().sectional(&x, &y).unwrap() - k).abs());
    }
    assert!(worst_gap < 1e-9, "{worst_gap:e}");
}

#[test]
fn jacobi_spectrum_is_homogeneous() {
    let mut expected = vec![-4.0; 7];
    expected.extend([-1.0; 8]);
    expected.push(0.0);
    expected.sort_by(f64::total_cmp);
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let u = random_unit(&mut rng);
        let ev = model().radial_spectrum(&u).unwrap();
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-8, "{ev:?}");
        }
    }
}

#[test]
fn curvature_scales_with_alpha() {
    let f1 = SectionalFormula::with_alpha(-1.0);
    let r1 = assemble(&f1);
    assert!((r1.matrix() * 4.0 - model().matrix()).amax() < 1e-10);
    assert!((r1.ricci() * 4.0 - model().ricci()).amax() < 1e-9);
    let cfg = PinchConfig {
        starts: 8,
        seed: 3,
        ..PinchConfig::default()
    };
    let p1 = pinch_extremes(&r1, &f1, &cfg);
    let p4 = pinch_extremes(model(), &SectionalFormula::default(), &cfg);
    assert!((p1.min.value + 1.0).abs() < 1e-6 && (p1.max.value + 0.25).abs() < 1e-6);
    assert!((p4.min.value + 4.0).abs() < 1e-6 && (p4.max.value + 1.0).abs() < 1e-6);
    // extremal planes of one normalization are extremal for the other
    assert!((r1.sectional(&p4.min.x, &p4.min.y).unwrap() + 1.0).abs() < 1e-6);
    assert!((r1.sectional(&p4.max.x, &p4.max.y).unwrap() + 0.25).abs() < 1e-6);
    assert!((model().sectional(&p1.min.x, &p1.min.y).unwrap() + 4.0).abs() < 1e-6);
}

#[test]
fn pinch_search_finds_both_extremes() {
    let r = pinch_extremes(model(), &SectionalFormula::default(), &PinchConfig::default());
    assert!((r.min.value + 4.0).abs() < 1e-6, "{}", r.min.value);
    assert!((r.max.value + 1.0).abs() < 1e-6, "{}", r.max.value);
    assert!(r.formula_agreement < 1e-9);
    assert_eq!(r.min_runs.len(), 64);
}

#[test]
fn reversed_reading_is_the_conjugate_pullback() {
    let fwd = SectionalFormula::default();
    let rev = SectionalFormula::default().with_reading(ProductReading::Reversed);
    let conj = |p: &OctPair| OctPair::new(p.x.conj(), p.y.conj());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let (x, y) = random_orthonormal_pair(&mut rng);
        let (px, py) = (OctPair::from_array(&x), OctPair::from_array(&y));
        let a = rev.orthonormal_value(&px, &py);
        let b = fwd.orthonormal_value(&conj(&px), &conj(&py));
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn adapted_frame_axes() {
    let r = model();
    let e1 = basis(0);
    for i in 1..8 {
        assert!((r.sectional(&e1, &basis(i)).unwrap() + 4.0).abs() < 1e-9);
    }
    for a in 8..16 {
        assert!((r.sectional(&e1, &basis(a)).unwrap() + 1.0).abs() < 1e-9);
    }
    let f = SectionalFormula::default();
    let p = TwoPlane::from_pairs(&OctPair::new(Octonion::e(3), Octonion::ZERO), &OctPair::new(Octonion::ZERO, Octonion::e(5)));
    assert!((sectional(&f, &p).unwrap() + 1.0).abs() < 1e-12);
}
