//! Constraints extracted from parallel forms, with the Hessian action re-derived
//! independently through the derivation rule.

use cayley_core::exterior::{apply_hessian_operator, Form, HessianSurrogate};
use cayley_core::forms::{
    coefficient_functionals, expected_v_top_functional, extract_constraints, no_leak, no_leak_trials,
    spin9_constraints, upper_index, v_top, w_top, ConstraintSet, FSpec, FWord, FormsError, LinearFunctional,
    ParallelFormSpec,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn diag(n: usize, idx: &[usize]) -> LinearFunctional {
    let mut v = vec![0.0; n * (n + 1) / 2];
    for &i in idx {
        v[upper_index(n, i, i)] = 1.0;
    }
    LinearFunctional::from_dense(n, &v)
}

fn random_symmetric(n: usize, rng: &mut impl Rng) -> HessianSurrogate {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0);
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    HessianSurrogate::new(n, d).unwrap()
}

/// `a` acting on a 1-form: `θ^j ↦ Σ_i a_ij θ^i`, extended to 2-forms as a derivation.
fn derivation_on_two_form(a: &HessianSurrogate, w: &Form) -> Form {
    let n = w.dim();
    let mut out = Form::zero(n, 2);
    for (m, c) in w.terms() {
        let s: Vec<usize> = m.slots().collect();
        for i in 0..n {
            let a0 = a.get(i, s[0]);
            if a0 != 0.0 {
                let t = Form::monomial(n, &[i], c * a0).unwrap().wedge(&Form::monomial(n, &[s[1]], 1.0).unwrap()).unwrap();
                out = out.add(&t).unwrap();
            }
            let a1 = a.get(i, s[1]);
            if a1 != 0.0 {
                let t = Form::monomial(n, &[s[0]], c * a1).unwrap().wedge(&Form::monomial(n, &[i], 1.0).unwrap()).unwrap();
                out = out.add(&t).unwrap();
            }
        }
    }
    out
}

#[test]
fn hessian_action_is_the_derivation_extension() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    for n in [2usize, 3] {
        let spec = ParallelFormSpec::Quaternionic { n };
        let dim = spec.dim();
        for _ in 0..10 {
            let a = random_symmetric(dim, &mut rng);
            let w = Form::random_sparse(dim, 2, 6, &mut rng);
            let direct = apply_hessian_operator(&a, &w).unwrap();
            assert!(direct.max_abs_diff(&derivation_on_two_form(&a, &w)) < 1e-12);
            // Leibniz on w ∧ w
            let ww = w.wedge(&w).unwrap();
            let lhs = apply_hessian_operator(&a, &ww).unwrap();
            let rhs = direct.wedge(&w).unwrap().add(&w.wedge(&direct).unwrap()).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }
}

#[test]
fn kahler_and_quaternionic_sets_are_exact() {
    for n in 1..=4 {
        let k = ParallelFormSpec::Kahler { n };
        let c = extract_constraints(&k.build().unwrap(), Some(&k.designated_monomials())).unwrap();
        assert_eq!(c.len(), n);
        assert_eq!(c.functionals, (0..n).map(|i| diag(2 * n, &[i, n + i])).collect::<Vec<_>>());
        assert_eq!(c.functionals[0].to_string(), format!("a[1,1] + a[{0},{0}] = 0", n + 1));

        let q = ParallelFormSpec::Quaternionic { n };
        let c = extract_constraints(&q.build().unwrap(), Some(&q.designated_monomials())).unwrap();
        assert_eq!(c.len(), n);
        for (i, f) in c.functionals.iter().enumerate() {
            assert_eq!(f.diagonal_group(), Some(vec![i, n + i, 2 * n + i, 3 * n + i]));
        }
    }
}

#[test]
fn full_kahler_extraction_contains_the_designated_set() {
    // every monomial, not only the designated ones, still vanishes on the designated kernel
    let spec = ParallelFormSpec::Kahler { n: 3 };
    let omega = spec.build().unwrap();
    let designated = extract_constraints(&omega, Some(&spec.designated_monomials())).unwrap();
    let all = extract_constraints(&omega, None).unwrap();
    assert_eq!(all.union(&designated), all);
    assert!(all.len() >= designated.len());
}

#[test]
fn spin9_portable_and_raw_top_functional() {
    let c = spin9_constraints(&FSpec::zero()).unwrap();
    let lo: Vec<usize> = (0..8).collect();
    let hi: Vec<usize> = (8..16).collect();
    assert_eq!(c.portable.functionals, vec![diag(16, &lo), diag(16, &hi)]);
    assert_eq!(c.v_top_raw, expected_v_top_functional());
}

#[test]
fn hundred_random_admissible_f() {
    let r = no_leak_trials(100, 6, 2718).unwrap();
    assert_eq!(r.pairs_checked, 25_600);
    assert_eq!(r.max_leak, 0.0);
    assert!(r.max_v_top_deviation < 1e-12);
}

#[test]
fn pure_words_would_leak() {
    // a pure ω⁴ word sits on the v-top monomial, so it is excluded from admissible F
    let f = FSpec {
        words: vec![FWord {
            coeff: 1.0,
            omega: vec![(0, 1), (2, 3), (4, 5), (6, 7)],
            eta: vec![],
        }],
        ..FSpec::zero()
    };
    assert_eq!(no_leak(&f), Err(FormsError::PureWord { word: 0 }));
    let raw = Form::monomial(16, &[0, 1, 2, 3, 4, 5, 6, 7], 1.0).unwrap();
    let leak = coefficient_functionals(&raw).unwrap();
    assert!(leak.contains_key(&v_top()));
    assert!(!leak.contains_key(&w_top()));
}

#[test]
fn constraint_sets_serialize() {
    let spec = ParallelFormSpec::Quaternionic { n: 2 };
    let c = extract_constraints(&spec.build().unwrap(), Some(&spec.designated_monomials())).unwrap();
    let json = serde_json::to_string(&c).unwrap();
    let back: ConstraintSet = serde_json::from_str(&json).unwrap();
    assert_eq!(back, c);
    let s: ParallelFormSpec = serde_json::from_str(r#"{"Kahler":{"n":3}}"#).unwrap();
    assert_eq!(s.dim(), 6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn constraints_ignore_rescaling(n in 1usize..4, c in prop_oneof![-5.0..-0.1f64, 0.1..5.0f64]) {
        for spec in [ParallelFormSpec::Kahler { n }, ParallelFormSpec::Quaternionic { n }] {
            let omega = spec.build().unwrap();
            let m = spec.designated_monomials();
            let base = extract_constraints(&omega, Some(&m)).unwrap();
            prop_assert_eq!(extract_constraints(&omega.scale(c), Some(&m)).unwrap(), base);
        }
    }

    #[test]
    fn v_top_functional_ignores_f(seed in any::<u64>(), words in 1usize..8) {
        let f = FSpec::random(words, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(no_leak(&f).unwrap(), 0.0);
        let c = spin9_constraints(&f).unwrap();
        prop_assert_eq!(c.v_top_raw, expected_v_top_functional());
    }

    #[test]
    fn canonical_form_is_row_order_independent(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let rows: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..6).map(|_| rng.gen_range(-4i32..=4) as f64).collect())
            .collect();
        let mut rev = rows.clone();
        rev.reverse();
        let (a, b) = (ConstraintSet::canonicalize(n, &rows), ConstraintSet::canonicalize(n, &rev));
        // denominators above the snapping cap are left in floating point, so compare to rounding
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.dense_rows().iter().zip(b.dense_rows()) {
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() < 1e-12, "{} vs {}", u, v);
            }
        }
    }
}

#[test]
fn designated_monomials_are_present() {
    for spec in [ParallelFormSpec::Kahler { n: 3 }, ParallelFormSpec::Quaternionic { n: 2 }] {
        let omega = spec.build().unwrap();
        for m in spec.designated_monomials() {
            assert_ne!(omega.coeff(m), 0.0, "{m:?}");
        }
    }
}
