//! Minimal Bochner ratios: eigensolve, closed form, and a least-norm route built here
//! from scratch, plus sharpness scans and the exact Kato algebra.

use cayley_core::forms::{extract_constraints, spin9_constraints, upper_index, ConstraintSet, FSpec, ParallelFormSpec};
use cayley_core::kernels::{
    equality_diagnostics, kato_identity_residual, kato_transform, min_bochner_ratio, sharpness_scan,
    spin9_spectral_bound, vanishing_threshold, KernelError, RatioProblem,
};
use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(spec: &ParallelFormSpec) -> RatioProblem {
    let c = match spec {
        ParallelFormSpec::Spin9 { f } => spin9_constraints(f).unwrap().portable,
        _ => extract_constraints(&spec.build().unwrap(), Some(&spec.designated_monomials())).unwrap(),
    };
    RatioProblem::new(c, true)
}

fn geometries() -> [(ParallelFormSpec, Rational64); 3] {
    [
        (ParallelFormSpec::Kahler { n: 4 }, Rational64::from_integer(2)),
        (ParallelFormSpec::Quaternionic { n: 2 }, Rational64::new(4, 3)),
        (ParallelFormSpec::Spin9 { f: FSpec::zero() }, Rational64::new(8, 7)),
    ]
}

/// For purely diagonal constraints the off-diagonal entries `a_0j` alone give ratio 2;
/// on the diagonal, fixing `d_0 = 1`, the least-norm feasible `d` has `|d|² = 1/|P e_0|²`
/// with `P` the projector onto the kernel of the constraint rows.
fn least_norm_ratio(p: &RatioProblem) -> f64 {
    let n = p.n;
    let mut rows: Vec<Vec<f64>> = p
        .constraints
        .dense_rows()
        .iter()
        .map(|r| (0..n).map(|i| r[upper_index(n, i, i)]).collect())
        .collect();
    if p.trace_free {
        rows.push(vec![1.0; n]);
    }
    if rows.is_empty() {
        return 1.0;
    }
    let c = DMatrix::from_fn(rows.len(), n, |r, k| rows[r][k]);
    let svd = c.svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut pe0 = DVector::zeros(n);
    pe0[0] = 1.0;
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-10 {
            let v = vt.row(k).transpose();
            pe0 -= &v * v[0];
        }
    }
    let diag = 1.0 / pe0.norm_squared();
    diag.min(2.0)
}

#[test]
fn three_ratios_by_three_routes() {
    for (spec, q) in geometries() {
        let p = problem(&spec);
        let r = min_bochner_ratio(&p).unwrap();
        let exact = *q.numer() as f64 / *q.denom() as f64;
        assert_eq!(r.rational, Some(q));
        assert!((r.ratio - exact).abs() < 1e-8);
        assert!((r.closed_form.unwrap() - exact).abs() < 1e-12);
        assert!((least_norm_ratio(&p) - exact).abs() < 1e-10, "{spec:?}");
        assert!((r.kato_b - (exact - 1.0)).abs() < 1e-8);
    }
}

#[test]
fn sharpness_over_a_hundred_thousand_samples() {
    for (spec, _) in geometries() {
        let p = problem(&spec);
        let r = min_bochner_ratio(&p).unwrap();
        let scan = sharpness_scan(&p, r.ratio, 100_000, 31).unwrap();
        assert!(scan.max_undercut <= 1e-12, "{spec:?}: {scan:?}");
        assert!(scan.min_objective >= r.ratio - 1e-12);
    }
}

#[test]
fn minimizers_attain_the_ratio_with_the_predicted_pattern() {
    for ((spec, q), m) in geometries().into_iter().zip([2.0, 4.0, 8.0]) {
        let p = problem(&spec);
        let r = min_bochner_ratio(&p).unwrap();
        let d = equality_diagnostics(&p, &r);
        let exact = *q.numer() as f64 / *q.denom() as f64;
        assert!((d.objective_at_minimizer - exact).abs() < 1e-9);
        assert!(d.constraint_violation < 1e-9);
        assert!(d.max_off_diagonal < 1e-9);
        assert!(d.pattern_residual.unwrap() < 1e-9);
        let mu = d.mu.unwrap();
        assert!((d.canonical_diagonal[0] + (m - 1.0) * mu).abs() < 1e-9);
        assert!(r.minimizer[0] < 0.0);
    }
}

#[test]
fn extra_constraints_never_lower_the_ratio() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for (spec, _) in geometries() {
        let base = problem(&spec);
        let floor = min_bochner_ratio(&base).unwrap().ratio;
        let vars = base.n * (base.n + 1) / 2;
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..rng.gen_range(1..4))
                .map(|_| {
                    let mut r = vec![0.0; vars];
                    for _ in 0..3 {
                        r[rng.gen_range(0..vars)] = rng.gen_range(-3i32..=3) as f64;
                    }
                    r
                })
                .collect();
            let extra = ConstraintSet::canonicalize(base.n, &rows);
            let tighter = RatioProblem::new(base.constraints.union(&extra), true);
            match min_bochner_ratio(&tighter) {
                Ok(r) => assert!(r.ratio >= floor - 1e-9, "{} < {floor}", r.ratio),
                Err(KernelError::Infeasible) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn dimension_mismatch_is_rejected() {
    let mut p = problem(&ParallelFormSpec::Kahler { n: 2 });
    p.n = 5;
    assert!(matches!(min_bochner_ratio(&p), Err(KernelError::DimensionMismatch { .. })));
}

#[test]
fn kato_chain_rule_is_exact() {
    for (spec, q) in geometries() {
        let residual = kato_identity_residual(q, Rational64::from_integer(-36));
        assert!(residual.is_empty(), "{spec:?}: {residual:?}");
    }
    for num in 8..=14 {
        assert!(kato_identity_residual(Rational64::new(num, 7), Rational64::new(-5, 3)).is_empty());
    }
}

#[test]
fn spectral_thresholds() {
    let s = spin9_spectral_bound();
    assert_eq!(s.bound, Rational64::new(216, 7));
    assert_eq!(s.drift_identity, s.bound);
    assert_eq!(s.direct_threshold, Rational64::new(63, 2));
    assert!(s.model_lambda1 > 216.0 / 7.0);
    let t = kato_transform(8.0 / 7.0, -36.0).unwrap();
    assert!((t.drift - 216.0 / 7.0).abs() < 1e-12);
    let v = vanishing_threshold(1.0 / 7.0, s.model_lambda1).unwrap();
    assert!((v + 8.0 / 7.0 * 121.0).abs() < 1e-12);
}

/// Disjoint diagonal groups over `0..n`, each of size ≥ 1.
fn groups() -> impl Strategy<Value = (usize, Vec<Vec<usize>>)> {
    (2usize..9, any::<u64>(), 0usize..4).prop_map(|(n, seed, k)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let mut out = Vec::new();
        let mut rest = &idx[..];
        for _ in 0..k {
            if rest.is_empty() {
                break;
            }
            let take = rng.gen_range(1..=rest.len());
            let mut g = rest[..take].to_vec();
            g.sort_unstable();
            out.push(g);
            rest = &rest[take..];
        }
        (n, out)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn closed_form_matches_both_numeric_routes((n, gs) in groups(), trace_free in any::<bool>()) {
        let vars = n * (n + 1) / 2;
        let rows: Vec<Vec<f64>> = gs
            .iter()
            .map(|g| {
                let mut r = vec![0.0; vars];
                for &i in g {
                    r[upper_index(n, i, i)] = 1.0;
                }
                r
            })
            .collect();
        let p = RatioProblem::new(ConstraintSet::canonicalize(n, &rows), trace_free);
        match min_bochner_ratio(&p) {
            Ok(r) => {
                let closed = r.closed_form.unwrap();
                prop_assert!((closed - r.ratio).abs() < 1e-8);
                prop_assert!((least_norm_ratio(&p) - r.ratio).abs() < 1e-8);
            }
            // a singleton group containing 0 together with n = 1 leaves nothing
            Err(KernelError::Infeasible) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }
}
