//! Algebraic laws of the octonions, checked on random inputs and against an
//! independent Cayley–Dickson construction.

use cayley_core::octonion::{MultiplicationTable, Octonion, DIM};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn octonion() -> impl Strategy<Value = Octonion> {
    prop::array::uniform8(-10.0..10.0f64).prop_map(Octonion::new)
}

fn rel(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1.0)
}

proptest! {
    #[test]
    fn left_and_right_alternative(a in octonion(), b in octonion()) {
        let scale = a.norm_sqr() * b.norm();
        prop_assert!(rel(((a * a) * b).max_abs_diff(&(a * (a * b))), scale) < 1e-12);
        prop_assert!(rel(((b * a) * a).max_abs_diff(&(b * (a * a))), scale) < 1e-12);
    }

    #[test]
    fn flexible_law(a in octonion(), b in octonion()) {
        let scale = a.norm_sqr() * b.norm();
        prop_assert!(rel(((a * b) * a).max_abs_diff(&(a * (b * a))), scale) < 1e-12);
    }

    #[test]
    fn conjugation_reverses_products(a in octonion(), b in octonion()) {
        let lhs = (a * b).conj();
        let rhs = b.conj() * a.conj();
        prop_assert!(rel(lhs.max_abs_diff(&rhs), a.norm() * b.norm()) < 1e-12);
    }

    #[test]
    fn norm_is_multiplicative(a in octonion(), b in octonion()) {
        let lhs = (a * b).norm();
        let rhs = a.norm() * b.norm();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1.0));
    }

    #[test]
    fn conjugate_product_is_real(a in octonion()) {
        let p = a * a.conj();
        prop_assert!(rel(p.max_abs_diff(&Octonion::real(a.norm_sqr())), a.norm_sqr()) < 1e-12);
    }

    #[test]
    fn moufang_identity(a in octonion(), b in octonion(), c in octonion()) {
        // (ab)(ca) = a((bc)a)
        let lhs = (a * b) * (c * a);
        let rhs = a * ((b * c) * a);
        let scale = a.norm_sqr() * b.norm() * c.norm();
        prop_assert!(rel(lhs.max_abs_diff(&rhs), scale) < 1e-11);
    }

    #[test]
    fn text_roundtrip_any_sign_flip(row in 1usize..8, col in 1usize..8) {
        let mut t = MultiplicationTable::canonical().clone();
        let mut e = t.product(row, col);
        e.sign = -e.sign;
        t.set(row, col, e);
        let back = MultiplicationTable::parse(&t.to_text()).unwrap();
        prop_assert_eq!(&back, &t);
        prop_assert!(!back.structural_defects().is_empty());
    }
}

/// `(a, b)(c, d) = (ac − d̄b, da + bc̄)` over quaternions, themselves built the same way
/// from complex numbers. Returns the 8 real coordinates.
fn cayley_dickson(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![x[0] * y[0]];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let conj = |v: &[f64]| -> Vec<f64> {
        v.iter().enumerate().map(|(i, &t)| if i == 0 { t } else { -t }).collect()
    };
    let sub = |u: Vec<f64>, v: Vec<f64>| -> Vec<f64> { u.iter().zip(&v).map(|(p, q)| p - q).collect() };
    let add = |u: Vec<f64>, v: Vec<f64>| -> Vec<f64> { u.iter().zip(&v).map(|(p, q)| p + q).collect() };
    let left = sub(cayley_dickson(a, c), cayley_dickson(&conj(d), b));
    let right = add(cayley_dickson(d, a), cayley_dickson(b, &conj(c)));
    left.into_iter().chain(right).collect()
}

#[test]
fn independent_construction_has_the_same_invariants() {
    // The two bases are labelled differently, so only basis-free facts are compared.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let a = Octonion::random(&mut rng);
        let b = Octonion::random(&mut rng);
        let cd_ab = cayley_dickson(&a.coeffs, &b.coeffs);
        let cd_norm: f64 = cd_ab.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((cd_norm - (a * b).norm()).abs() < 1e-12);

        let cd_aab = cayley_dickson(&cayley_dickson(&a.coeffs, &a.coeffs), &b.coeffs);
        let cd_a_ab = cayley_dickson(&a.coeffs, &cayley_dickson(&a.coeffs, &b.coeffs));
        let alt: f64 = cd_aab.iter().zip(&cd_a_ab).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(alt < 1e-12);
    }
}

#[test]
fn seeded_sweep_of_axioms() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100_000 {
        let a = Octonion::random(&mut rng);
        let b = Octonion::random(&mut rng);
        let scale = (a.norm() * b.norm()).max(1e-300);
        let ab = a * b;
        worst = worst
            .max(((a * a) * b).max_abs_diff(&(a * (a * b))) / (a.norm_sqr() * b.norm()))
            .max(((b * a) * a).max_abs_diff(&(b * (a * a))) / (a.norm_sqr() * b.norm()))
            .max(ab.conj().max_abs_diff(&(b.conj() * a.conj())) / scale)
            .max((a * a.conj()).max_abs_diff(&Octonion::real(a.norm_sqr())) / a.norm_sqr())
            .max((ab.norm() - a.norm() * b.norm()).abs() / scale);
    }
    assert!(worst < 1e-12, "worst relative residual {worst:e}");
}

#[test]
fn table_rows_are_signed_permutations() {
    let t = MultiplicationTable::canonical();
    for i in 0..DIM {
        let mut seen = [false; DIM];
        for j in 0..DIM {
            seen[t.product(i, j).index as usize] = true;
        }
        assert!(seen.iter().all(|&s| s), "row {i}");
    }
}
