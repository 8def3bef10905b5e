//! Verification suites. Each returns a [`SuiteRecord`] plus any plot or table files it
//! produced; all randomness flows from the master seed through fixed ChaCha streams.

use cayley_core::curvature::{
    assemble, basis, pinch_extremes, random_orthonormal_pair, random_unit, sectional, CurvatureOperator,
    PinchConfig, PinchResult, ProductReading, SectionalFormula, TwoPlane, N,
};
use cayley_core::exterior::{contraction_identity_residuals, verify_duality_identity, Form};
use cayley_core::forms::{
    extract_constraints, no_leak_trials, spin9_constraints, upper_index, FSpec, LinearFunctional, ParallelFormSpec,
};
use cayley_core::geodesy::{
    hessian_eigen, index_form_quadrature, jacobi_profile, jacobi_shooting, laplacian_distance, log_area,
    log_area_slope, spectrum_estimate, spectrum_sweep, volume, RadialModel, SweepRow, WarpedMetric,
};
use cayley_core::kernels::{
    equality_diagnostics, kato_identity_residual, kato_transform, min_bochner_ratio, sharpness_scan,
    spin9_spectral_bound, RatioProblem,
};
use cayley_core::octonion::{MultiplicationTable, Octonion};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{RunConfig, Tolerances};
use crate::plot::{csv, line_chart};
use crate::report::{Check, SuiteRecord};

/// Bottom of the spectrum of the model space.
pub const MODEL_LAMBDA: f64 = 121.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SuiteName {
    All,
    Octonion,
    Exterior,
    Curvature,
    Geodesy,
    Forms,
    Kernels,
}

impl SuiteName {
    pub const EACH: [SuiteName; 6] = [
        SuiteName::Octonion,
        SuiteName::Exterior,
        SuiteName::Curvature,
        SuiteName::Geodesy,
        SuiteName::Forms,
        SuiteName::Kernels,
    ];

    pub fn expand(self) -> Vec<SuiteName> {
        match self {
            SuiteName::All => Self::EACH.to_vec(),
            s => vec![s],
        }
    }
}

/// A file a suite wants written into the output directory.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    fn new(name: &str, contents: String) -> Self {
        Self {
            name: name.to_string(),
            contents,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteOutput {
    pub record: SuiteRecord,
    pub artifacts: Vec<Artifact>,
}

/// Everything a suite reads: the configuration and the multiplication table in force.
#[derive(Clone, Debug)]
pub struct Context {
    pub config: RunConfig,
    pub table: MultiplicationTable,
}

impl Context {
    pub fn new(config: RunConfig, table: MultiplicationTable) -> Self {
        Self { config, table }
    }

    fn seed(&self) -> u64 {
        self.config.seed
    }

    fn tol(&self) -> Tolerances {
        self.config.tolerances
    }

    fn trials(&self, default: usize) -> usize {
        self.config.trials_or(default)
    }

    /// Independent stream `stream` of the master seed.
    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed());
        r.set_stream(stream);
        r
    }
}

pub fn run_suite(name: SuiteName, ctx: &Context) -> SuiteOutput {
    match name {
        SuiteName::Octonion => octonion(ctx),
        SuiteName::Exterior => exterior(ctx),
        SuiteName::Curvature => curvature(ctx),
        SuiteName::Geodesy => geodesy(ctx),
        SuiteName::Forms => forms(ctx),
        SuiteName::Kernels => kernels(ctx),
        SuiteName::All => unreachable!("expanded by the caller"),
    }
}

fn output(suite: &str, anchor: &str, seed: u64, checks: Vec<Check>, artifacts: Vec<Artifact>) -> SuiteOutput {
    SuiteOutput {
        record: SuiteRecord::new(suite, anchor, seed, checks),
        artifacts,
    }
}

pub fn octonion(ctx: &Context) -> SuiteOutput {
    let t = &ctx.table;
    let tol = ctx.tol().identity;
    let defects = t.structural_defects();
    let mut structure = Check::new("table-structure", "octonion/multiplication-table", defects.len() as f64, 0.0);
    if !defects.is_empty() {
        structure = structure.detail(defects.iter().take(4).cloned().collect::<Vec<_>>().join(", "));
    }

    let m = |a: &Octonion, b: &Octonion| a.mul_with(b, t);
    let trials = ctx.trials(100_000);
    let mut rng = ctx.rng(1);
    let mut w = [0.0f64; 5];
    for _ in 0..trials {
        let a = Octonion::random(&mut rng);
        let b = Octonion::random(&mut rng);
        let (na, nb, na2) = (a.norm(), b.norm(), a.norm_sqr());
        let ab = m(&a, &b);
        let aa = m(&a, &a);
        w[0] = w[0].max(m(&aa, &b).max_abs_diff(&m(&a, &ab)) / (na2 * nb));
        w[1] = w[1].max(m(&m(&b, &a), &a).max_abs_diff(&m(&b, &aa)) / (na2 * nb));
        w[2] = w[2].max(ab.conj().max_abs_diff(&m(&b.conj(), &a.conj())) / (na * nb));
        w[3] = w[3].max(m(&a, &a.conj()).max_abs_diff(&Octonion::real(na2)) / na2);
        w[4] = w[4].max((ab.norm() - na * nb).abs() / (na * nb));
    }
    let (e0, e1, e2) = (Octonion::e(0), Octonion::e(1), Octonion::e(2));
    let witness = m(&m(&e0, &e1), &e2).max_abs_diff(&-Octonion::e(5)) + m(&e0, &m(&e1, &e2)).max_abs_diff(&Octonion::e(5));

    let detail = format!("{trials} random pairs, relative residuals");
    let checks = vec![
        structure,
        Check::new("left-alternative", "octonion/alternative-laws", w[0], tol).detail(&detail),
        Check::new("right-alternative", "octonion/alternative-laws", w[1], tol).detail(&detail),
        Check::new("conjugation-reverses-products", "octonion/conjugation", w[2], tol).detail(&detail),
        Check::new("conjugate-product-is-norm", "octonion/conjugation", w[3], tol).detail(&detail),
        Check::new("norm-multiplicativity", "octonion/composition-algebra", w[4], tol).detail(&detail),
        Check::new("non-associativity-witness", "octonion/non-associativity", witness, 0.0)
            .detail("(e0 e1) e2 = -e5 and e0 (e1 e2) = +e5"),
    ];
    output("octonion", "octonion-algebra", ctx.seed(), checks, Vec::new())
}

pub fn exterior(ctx: &Context) -> SuiteOutput {
    let tol = ctx.tol().identity;
    let mut exhaustive: f64 = 0.0;
    let mut cases = 0usize;
    for n in 1..=6usize {
        for mask in 0u32..(1 << n) {
            let slots: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let eta = Form::monomial(n, &slots, 1.0).expect("slots are distinct and in range");
            for k in 0..n {
                for k2 in 0..n {
                    let r = contraction_identity_residuals(&eta, k, k2);
                    exhaustive = r.iter().fold(exhaustive, |a, &b| a.max(b));
                    cases += 1;
                }
            }
        }
    }

    let trials = ctx.trials(1000);
    let mut rng = ctx.rng(2);
    let mut random: f64 = 0.0;
    for _ in 0..trials {
        let p = rng.gen_range(0..=16);
        let eta = Form::random_sparse(16, p, 12, &mut rng);
        let k = rng.gen_range(0..16);
        let k2 = (k + rng.gen_range(1..16)) % 16;
        random = contraction_identity_residuals(&eta, k, k2).iter().fold(random, |a, &b| a.max(b));
    }

    let mut checks = vec![
        Check::new("contraction-identities-exhaustive", "exterior/star-contraction-identities", exhaustive, tol)
            .detail(format!("{cases} monomial cases, n ≤ 6")),
        Check::new("contraction-identities-random", "exterior/star-contraction-identities", random, tol)
            .detail(format!("{trials} random sparse forms, n = 16")),
    ];
    let mut rng = ctx.rng(3);
    for (n, p) in [(4, 2), (8, 4), (16, 8)] {
        let r = verify_duality_identity(n, p, 100, 16, &mut rng).map(|r| r.max_residual).unwrap_or(f64::NAN);
        checks.push(
            Check::new(&format!("duality-chain-n{n}-p{p}"), "exterior/pointwise-duality", r, tol)
                .detail("100 trace-free jets"),
        );
    }
    output("exterior", "exterior-calculus", ctx.seed(), checks, Vec::new())
}

/// Pair symmetry, first Bianchi and the Einstein constant of an assembled operator.
fn operator_symmetries(op: &CurvatureOperator, rng: &mut ChaCha8Rng, trials: usize) -> (f64, f64, f64) {
    let mut pair: f64 = 0.0;
    let mut bianchi: f64 = 0.0;
    for _ in 0..trials {
        let [x, y, z, w] = [(); 4].map(|_| random_unit(rng));
        let v = op.evaluate(&x, &y, &z, &w);
        pair = pair
            .max((v - op.evaluate(&z, &w, &x, &y)).abs())
            .max((v + op.evaluate(&y, &x, &z, &w)).abs());
        bianchi = bianchi.max(op.bianchi_residual(&x, &y, &z, &w).abs());
    }
    let ric = op.ricci();
    let mut einstein: f64 = 0.0;
    for a in 0..N {
        for b in 0..N {
            let target = if a == b { -36.0 } else { 0.0 };
            einstein = einstein.max((ric[(a, b)] - target).abs());
        }
    }
    (pair, bianchi, einstein)
}

pub fn pinch_checks(pinch: &PinchResult) -> Vec<Check> {
    vec![
        Check::new("pinch-minimum", "curvature/pinching", (pinch.min.value + 4.0).abs(), 1e-6)
            .detail(format!("K_min = {}", pinch.min.value)),
        Check::new("pinch-maximum", "curvature/pinching", (pinch.max.value + 1.0).abs(), 1e-6)
            .detail(format!("K_max = {}", pinch.max.value)),
        Check::new("pinch-formula-agreement", "curvature/pinching", pinch.formula_agreement, 1e-9),
    ]
}

pub fn pinch_artifacts(pinch: &PinchResult) -> Vec<Artifact> {
    let rows = |runs: &[f64]| -> Vec<Vec<String>> {
        runs.iter().enumerate().map(|(i, k)| vec![i.to_string(), k.to_string()]).collect()
    };
    vec![
        Artifact::new("pinch.csv", csv(&["trial", "K"], &rows(&pinch.min_runs))),
        Artifact::new("pinch_max.csv", csv(&["trial", "K"], &rows(&pinch.max_runs))),
    ]
}

pub fn run_pinch(ctx: &Context, formula: &SectionalFormula, op: &CurvatureOperator) -> PinchResult {
    let cfg = PinchConfig {
        starts: ctx.trials(64),
        seed: ctx.seed(),
        ..PinchConfig::default()
    };
    pinch_extremes(op, formula, &cfg)
}

pub fn curvature(ctx: &Context) -> SuiteOutput {
    let formula = SectionalFormula::default().with_table(ctx.table.clone());
    let op = assemble(&formula);
    let mut rng = ctx.rng(4);
    let (pair, bianchi, einstein) = operator_symmetries(&op, &mut rng, 1000);

    let e1 = basis(0);
    let mut adapted: f64 = 0.0;
    for i in 1..N {
        let target = if i < 8 { -4.0 } else { -1.0 };
        adapted = adapted.max((op.sectional(&e1, &basis(i)).map(|k| k - target).unwrap_or(f64::NAN)).abs());
    }

    let planes = ctx.trials(10_000);
    let mut band: f64 = 0.0;
    let mut round_trip: f64 = 0.0;
    for _ in 0..planes {
        let (x, y) = random_orthonormal_pair(&mut rng);
        let k = sectional(&formula, &TwoPlane::new(x, y)).unwrap_or(f64::NAN);
        band = band.max(-4.0 - k).max(k + 1.0).max(0.0);
        if k.is_nan() {
            band = f64::NAN;
        }
        round_trip = round_trip.max((op.sectional(&x, &y).unwrap_or(f64::NAN) - k).abs());
    }

    let mut spectrum: f64 = 0.0;
    let mut expected = vec![-4.0; 7];
    expected.extend([-1.0; 8]);
    expected.push(0.0);
    expected.sort_by(f64::total_cmp);
    for _ in 0..100 {
        let u = random_unit(&mut rng);
        match op.radial_spectrum(&u) {
            Ok(ev) => {
                for (a, b) in ev.iter().zip(&expected) {
                    spectrum = spectrum.max((a - b).abs());
                }
            }
            Err(_) => spectrum = f64::NAN,
        }
    }

    let reversed = assemble(&formula.clone().with_reading(ProductReading::Reversed));
    let (rp, rb, re) = operator_symmetries(&reversed, &mut rng, 200);
    let reading = rp.max(rb).max(re);

    let tol = ctx.tol();
    let pinch = run_pinch(ctx, &formula, &op);
    let mut checks = vec![
        Check::new("pair-symmetry", "curvature/algebraic-symmetries", pair, 1e-10),
        Check::new("first-bianchi", "curvature/algebraic-symmetries", bianchi, 1e-10),
        Check::new("adapted-planes", "curvature/sectional-formula", adapted, 1e-9)
            .detail("K(e1, e_i) = -4 for i < 8, -1 for the other octonion factor"),
        Check::new("random-planes-in-band", "curvature/pinching", band, 1e-9)
            .detail(format!("{planes} random planes, excursion outside [-4, -1]")),
        Check::new("operator-formula-agreement", "curvature/sectional-formula", round_trip, 1e-9),
        Check::new("ricci-einstein", "curvature/einstein-constant", einstein, 1e-9).detail("Ric = -36 g"),
        Check::new("jacobi-spectrum", "curvature/jacobi-operator", spectrum, tol.numeric)
            .detail("100 random unit vectors, spectrum {0, -4 x7, -1 x8}"),
        Check::new("reversed-product-reading", "curvature/product-reading", reading, 1e-9)
            .detail("the reversed reading also satisfies pair symmetry, Bianchi and Ric = -36 g; the forward reading is used"),
    ];
    checks.extend(pinch_checks(&pinch));
    let mut artifacts = pinch_artifacts(&pinch);
    if ctx.config.export_operator {
        artifacts.push(Artifact::new("operator.csv", op.to_csv()));
    }
    output("curvature", "curvature-model", ctx.seed(), checks, artifacts)
}

/// Monotonicity in `R` and the lower bound, on the finest grid of each radius.
pub fn spectrum_checks(rows: &[SweepRow], tol: &Tolerances) -> Vec<Check> {
    let mut finest: Vec<&SweepRow> = Vec::new();
    for r in rows {
        match finest.iter_mut().find(|f| f.radius == r.radius) {
            Some(f) if f.grid < r.grid => *f = r,
            Some(_) => {}
            None => finest.push(r),
        }
    }
    finest.sort_by(|a, b| a.radius.total_cmp(&b.radius));
    let rise = finest.windows(2).map(|w| (w[1].lambda - w[0].lambda).max(0.0)).fold(0.0, f64::max);
    let lowest = rows
        .iter()
        .flat_map(|r| std::iter::once(r.lambda).chain(r.extrapolated))
        .fold(f64::INFINITY, f64::min);
    let below = ((MODEL_LAMBDA - lowest) / MODEL_LAMBDA).max(0.0);
    vec![
        Check::new("spectrum-monotone-in-radius", "spectrum/domain-monotonicity", rise, 0.0)
            .detail(format!("{} radii", finest.len())),
        Check::new("spectrum-lower-bound", "spectrum/bottom-of-spectrum", below, tol.spectral)
            .detail(format!("smallest estimate {lowest}")),
    ]
}

pub fn spectrum_artifacts(rows: &[SweepRow]) -> Vec<Artifact> {
    let table: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.radius.to_string(),
                r.grid.to_string(),
                r.lambda.to_string(),
                r.extrapolated.map(|x| x.to_string()).unwrap_or_default(),
            ]
        })
        .collect();
    let max_grid = rows.iter().map(|r| r.grid).max().unwrap_or(0);
    let series: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.grid == max_grid)
        .map(|r| (r.radius, r.extrapolated.unwrap_or(r.lambda)))
        .collect();
    vec![
        Artifact::new("spectrum.csv", csv(&["R", "N", "lambda", "extrapolated"], &table)),
        Artifact::new(
            "spectrum.svg",
            line_chart("Dirichlet eigenvalue on geodesic balls", "R", "lambda (finest grid, extrapolated)", &series),
        ),
    ]
}

pub fn spectrum(ctx: &Context) -> SuiteOutput {
    let c = &ctx.config;
    let (checks, artifacts) = match spectrum_sweep(&c.radii, &c.grids) {
        Ok(rows) => (spectrum_checks(&rows, &c.tolerances), spectrum_artifacts(&rows)),
        Err(e) => (vec![Check::new("spectrum-sweep", "spectrum/bottom-of-spectrum", f64::NAN, 0.0).detail(e.to_string())], Vec::new()),
    };
    output("spectrum", "bottom-of-spectrum", ctx.seed(), checks, artifacts)
}

/// Frozen high-precision value of `∫₀¹ sinh(2t)^7 sinh(t)^8 dt`.
const VOLUME_AT_ONE: f64 = 1_183.579_227_786_368;

pub fn geodesy(ctx: &Context) -> SuiteOutput {
    let tol = ctx.tol();
    let model = RadialModel::default();
    let mut triangle: f64 = 0.0;
    for r in [0.5, 1.0, 2.0, 5.0] {
        let closed = laplacian_distance(r).unwrap_or(f64::NAN);
        let sum = model.hessian_trace(r).unwrap_or(f64::NAN);
        let slope = log_area_slope(r).unwrap_or(f64::NAN);
        triangle = triangle.max((closed - sum).abs()).max((closed - slope).abs()).max((sum - slope).abs());
    }

    let mut index: f64 = 0.0;
    let mut shooting: f64 = 0.0;
    for (c, len) in [(2.0, 1.0), (1.0, 1.0), (2.0, 0.3), (1.0, 3.0)] {
        let exact = hessian_eigen(c, len).unwrap_or(f64::NAN);
        index = index.max((index_form_quadrature(c, len).unwrap_or(f64::NAN) - exact).abs());
        let steps = 10_000;
        if let Ok(path) = jacobi_shooting(c, len, steps) {
            for (i, v) in path.iter().enumerate() {
                let t = (i as f64 * len / steps as f64).min(len);
                shooting = shooting.max((v - jacobi_profile(c, len, t).unwrap_or(f64::NAN)).abs());
            }
        } else {
            shooting = f64::NAN;
        }
    }

    let r0 = 1e-5;
    let origin = (r0 * laplacian_distance(r0).unwrap_or(f64::NAN) - 15.0).abs();
    let vol = (volume(1.0) - VOLUME_AT_ONE).abs() / VOLUME_AT_ONE;
    let growth = (log_area(50.0) / 50.0 - 22.0).abs() / 22.0;

    let est = spectrum_estimate(10.0, 8000);
    let (gap, spectrum_detail) = match &est {
        Ok(e) => (
            (e.extrapolated - MODEL_LAMBDA).abs() / MODEL_LAMBDA,
            format!("lambda(N=8000) = {}, extrapolated = {}, observed order {:.3}", e.lambda, e.extrapolated, e.observed_order),
        ),
        Err(err) => (f64::NAN, err.to_string()),
    };

    let w = WarpedMetric::default().checks(0.7, 1e-4);
    let shape = w
        .shape_operator
        .iter()
        .enumerate()
        .map(|(i, v)| (v - if i < 7 { -2.0 } else { -1.0 }).abs())
        .fold(0.0, f64::max);

    let mut checks = vec![
        Check::new("laplacian-triangle", "radial/laplacian-of-distance", triangle, tol.numeric)
            .detail("eigenvalue sum, closed form and d(log A)/dr at r = 0.5, 1, 2, 5"),
        Check::new("index-form-quadrature", "radial/jacobi-fields", index, tol.numeric),
        Check::new("jacobi-shooting", "radial/jacobi-fields", shooting, tol.numeric),
        Check::new("euclidean-limit", "radial/laplacian-of-distance", origin, tol.numeric).detail("r Δr → 15 as r → 0"),
        Check::new("ball-volume", "radial/volume-growth", vol, 1e-9).detail("V(1) against a frozen reference"),
        Check::new("volume-growth-rate", "radial/volume-growth", growth, 0.01).detail("log A(r)/r at r = 50"),
        Check::new("spectrum-r10-extrapolated", "spectrum/bottom-of-spectrum", gap, tol.spectral).detail(spectrum_detail),
        Check::new("warped-radial-curvatures", "splitting/warped-product", w.max_fd_residual, 1e-6)
            .detail("finite differences against -4 (x7) and -1 (x8)"),
        Check::new("warped-mean-curvature", "splitting/busemann-laplacian", (w.mean_curvature + 22.0).abs(), 1e-6),
        Check::new("warped-shape-operator", "splitting/busemann-hessian", shape, 1e-6),
        Check::new("warped-hessian-norm", "splitting/busemann-hessian", (w.hessian_squared - 36.0).abs(), tol.identity),
        Check::new("warped-cauchy-schwarz-equality", "splitting/busemann-hessian", (w.cauchy_schwarz - 36.0).abs(), tol.identity),
        Check::new("warped-jacobi-transport", "splitting/warped-product", w.jacobi_transport, tol.numeric),
    ];

    let mut artifacts = Vec::new();
    let rs: Vec<f64> = (1..=100).map(|i| i as f64 * 0.1).collect();
    let lap: Vec<(f64, f64)> = rs.iter().map(|&r| (r, laplacian_distance(r).unwrap_or(f64::NAN))).collect();
    let area: Vec<(f64, f64)> = rs.iter().map(|&r| (r, log_area(r))).collect();
    let to_rows = |pts: &[(f64, f64)]| -> Vec<Vec<String>> { pts.iter().map(|(a, b)| vec![a.to_string(), b.to_string()]).collect() };
    artifacts.push(Artifact::new("laplacian.csv", csv(&["r", "laplacian_r"], &to_rows(&lap))));
    artifacts.push(Artifact::new("laplacian.svg", line_chart("Laplacian of the distance function", "r", "Δr", &lap)));
    artifacts.push(Artifact::new("area.csv", csv(&["r", "log_area"], &to_rows(&area))));
    artifacts.push(Artifact::new("area.svg", line_chart("Geodesic sphere area", "r", "log A(r)", &area)));

    let sweep = spectrum(ctx);
    checks.extend(sweep.record.checks);
    artifacts.extend(sweep.artifacts);
    output("geodesy", "radial-geometry", ctx.seed(), checks, artifacts)
}

fn diag(n: usize, idx: &[usize]) -> LinearFunctional {
    let mut v = vec![0.0; n * (n + 1) / 2];
    for &i in idx {
        v[upper_index(n, i, i)] = 1.0;
    }
    LinearFunctional::from_dense(n, &v)
}

fn designated(spec: &ParallelFormSpec) -> Option<Vec<LinearFunctional>> {
    let omega = spec.build().ok()?;
    extract_constraints(&omega, Some(&spec.designated_monomials())).ok().map(|c| c.functionals)
}

pub fn forms(ctx: &Context) -> SuiteOutput {
    let tol = ctx.tol().identity;
    let mut kahler = 0;
    let mut quaternionic = 0;
    for n in 1..=4 {
        let k: Vec<LinearFunctional> = (0..n).map(|i| diag(2 * n, &[i, n + i])).collect();
        if designated(&ParallelFormSpec::Kahler { n }) != Some(k) {
            kahler += 1;
        }
        let q = designated(&ParallelFormSpec::Quaternionic { n }).unwrap_or_default();
        let groups: Vec<Option<Vec<usize>>> = q.iter().map(|f| f.diagonal_group()).collect();
        let expected: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i, n + i, 2 * n + i, 3 * n + i])).collect();
        if groups != expected {
            quaternionic += 1;
        }
    }

    let lo: Vec<usize> = (0..8).collect();
    let hi: Vec<usize> = (8..16).collect();
    let base = spin9_constraints(&FSpec::zero());
    let portable = match &base {
        Ok(c) => (c.portable.functionals != vec![diag(16, &lo), diag(16, &hi)]) as usize as f64,
        Err(_) => f64::NAN,
    };
    let non_portable = base.as_ref().map(|c| c.non_portable.len()).unwrap_or(0);

    let trials = ctx.trials(100);
    let leak = no_leak_trials(trials, 6, ctx.seed());
    let (v_top, max_leak, pairs) = match &leak {
        Ok(r) => (r.max_v_top_deviation, r.max_leak, r.pairs_checked),
        Err(_) => (f64::NAN, f64::NAN, 0),
    };

    let checks = vec![
        Check::new("kahler-constraints", "forms/kahler-constraints", kahler as f64, 0.0)
            .detail("exactly {a_ii + a_(n+i)(n+i) = 0} for n = 1..4"),
        Check::new("quaternionic-constraints", "forms/quaternionic-constraints", quaternionic as f64, 0.0)
            .detail("exactly the n four-term diagonal functionals for n = 1..4"),
        Check::new("spin9-portable-constraints", "forms/spin9-top-coefficients", portable, 0.0)
            .detail(format!("top monomials give the two eight-term sums; {non_portable} further constraints from other monomials reported as non-portable")),
        Check::new("spin9-v-top-functional", "forms/spin9-top-coefficients", v_top, tol)
            .detail(format!("{trials} random admissible F")),
        Check::new("no-leak", "forms/no-leak", max_leak, tol).detail(format!("{pairs} (i, j) pairs checked")),
    ];
    output("forms", "parallel-forms", ctx.seed(), checks, Vec::new())
}

fn ratio_problem(spec: &ParallelFormSpec) -> Option<RatioProblem> {
    let c = match spec {
        ParallelFormSpec::Spin9 { f } => spin9_constraints(f).ok()?.portable,
        _ => extract_constraints(&spec.build().ok()?, Some(&spec.designated_monomials())).ok()?,
    };
    Some(RatioProblem::new(c, true))
}

pub fn kernels(ctx: &Context) -> SuiteOutput {
    let samples = ctx.trials(100_000);
    let cases = [
        ("kahler", ParallelFormSpec::Kahler { n: 4 }, Rational64::from_integer(2)),
        ("quaternionic", ParallelFormSpec::Quaternionic { n: 2 }, Rational64::new(4, 3)),
        ("spin9", ParallelFormSpec::Spin9 { f: FSpec::zero() }, Rational64::new(8, 7)),
    ];
    let mut checks = Vec::new();
    for (k, (name, spec, expected)) in cases.iter().enumerate() {
        let Some(p) = ratio_problem(spec) else {
            checks.push(Check::new(&format!("ratio-{name}"), "kernels/minimal-ratio", f64::NAN, 1e-9));
            continue;
        };
        match min_bochner_ratio(&p) {
            Ok(r) => {
                let gap = r.closed_form.map(|c| (c - r.ratio).abs()).unwrap_or(f64::NAN);
                checks.push(
                    Check::new(&format!("ratio-{name}"), "kernels/minimal-ratio", gap, 1e-9)
                        .detail(format!("eigensolve {} against closed form", r.ratio))
                        .data(&r),
                );
                let exact = (r.rational != Some(*expected)) as usize as f64;
                checks.push(
                    Check::new(&format!("rational-{name}"), "kernels/minimal-ratio", exact, 0.0)
                        .detail(format!("expected {expected}")),
                );
                let scan = sharpness_scan(&p, r.ratio, samples, ctx.seed().wrapping_add(k as u64 * samples as u64));
                let undercut = scan.as_ref().map(|s| s.max_undercut).unwrap_or(f64::NAN);
                checks.push(
                    Check::new(&format!("sharpness-{name}"), "kernels/sharpness", undercut, ctx.tol().identity)
                        .detail(format!("{samples} random feasible matrices")),
                );
                if *name == "spin9" {
                    let d = equality_diagnostics(&p, &r);
                    let pattern = d.pattern_residual.unwrap_or(f64::NAN).max(d.max_off_diagonal);
                    checks.push(
                        Check::new("spin9-minimizer-pattern", "kernels/equality-case", pattern, 1e-9)
                            .detail(format!("diag(-7μ, μ I7, 0 I8) with μ = {}", d.mu.unwrap_or(f64::NAN)))
                            .data(&d),
                    );
                }
            }
            Err(e) => checks.push(Check::new(&format!("ratio-{name}"), "kernels/minimal-ratio", f64::NAN, 1e-9).detail(e.to_string())),
        }
    }

    let kato = match kato_transform(8.0 / 7.0, -36.0) {
        Ok(t) => (t.exponent - 6.0 / 7.0).abs().max((t.drift - 216.0 / 7.0).abs()),
        Err(_) => f64::NAN,
    };
    checks.push(Check::new("kato-transform", "kernels/kato-transform", kato, ctx.tol().identity).detail("(8/7, -36) -> (6/7, 216/7)"));
    let terms: usize = [Rational64::from_integer(2), Rational64::new(4, 3), Rational64::new(8, 7)]
        .iter()
        .map(|q| kato_identity_residual(*q, Rational64::from_integer(-36)).len())
        .sum();
    checks.push(Check::new("kato-identity-exact", "kernels/kato-transform", terms as f64, 0.0).detail("surviving rational terms"));
    let s = spin9_spectral_bound();
    checks.push(
        Check::new("spectral-thresholds", "kernels/spectral-threshold", (s.bound != s.drift_identity) as usize as f64, 0.0)
            .detail(format!("Kato drift {} = 36·6/7; direct route needs λ₁ ≥ {}", s.bound, s.direct_threshold))
            .data(&s),
    );
    output("kernels", "bochner-kernels", ctx.seed(), checks, Vec::new())
}

pub fn pinch(ctx: &Context) -> SuiteOutput {
    let formula = SectionalFormula::default().with_table(ctx.table.clone());
    let op = assemble(&formula);
    let p = run_pinch(ctx, &formula, &op);
    output("pinch", "curvature-pinching", ctx.seed(), pinch_checks(&p), pinch_artifacts(&p))
}
