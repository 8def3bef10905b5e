//! Sharp Bochner ratios under parallel-form constraints, the refined Kato exponent they
//! yield, and the resulting spectral thresholds.
//!
//! For a symmetric `a` with `e_1` distinguished, the ratio is
//! `Σ_{ij} a_ij² / Σ_j a_1j²`. It is minimized over the subspace cut out by a
//! [`ConstraintSet`] (and optionally trace-freeness).

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::forms::{upper_index, upper_pair, ConstraintSet};
use crate::numeric::symmetric_eigen;
use crate::rational::recover;

/// Agreement required between the closed form and the eigensolve.
pub const ROUTE_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("constraints admit no matrix with a nonzero distinguished row")]
    Infeasible,
    #[error("closed form {closed} and eigensolve {numeric} disagree by {gap:e}")]
    RouteDisagreement { closed: f64, numeric: f64, gap: f64 },
    #[error("constraint set is for dimension {got}, problem has {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("ratio must lie in (1, 2], got {0}")]
    RatioOutOfRange(f64),
    #[error("Ricci lower bound must be negative, got {0}")]
    NonNegativeRicci(f64),
    #[error("Kato parameter must exceed -1, got {0}")]
    BadKatoParameter(f64),
    #[error("bottom of spectrum must be positive, got {0}")]
    NonPositiveSpectrum(f64),
    #[error("symmetric eigensolver returned non-finite values")]
    SolverFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioProblem {
    pub n: usize,
    pub constraints: ConstraintSet,
    pub trace_free: bool,
}

impl RatioProblem {
    pub fn new(constraints: ConstraintSet, trace_free: bool) -> Self {
        Self {
            n: constraints.dim,
            constraints,
            trace_free,
        }
    }

    fn vars(&self) -> usize {
        self.n * (self.n + 1) / 2
    }

    /// Scale from the `a`-coordinates to the orthonormal `y`-coordinates
    /// (`y_ii = a_ii`, `y_ij = √2 a_ij`).
    fn scale(&self, k: usize) -> f64 {
        let [i, j] = upper_pair(self.n, k);
        if i == j {
            1.0
        } else {
            std::f64::consts::SQRT_2
        }
    }

    /// Denominator weights in `y`-coordinates: `1` on `(0,0)`, `½` on `(0,j)`.
    fn denominator_weight(&self, k: usize) -> f64 {
        match upper_pair(self.n, k) {
            [0, 0] => 1.0,
            [0, _] => 0.5,
            _ => 0.0,
        }
    }

    /// Orthonormal basis (columns, `y`-coordinates) of the feasible subspace.
    pub fn feasible_basis(&self) -> Result<DMatrix<f64>, KernelError> {
        let m = self.vars();
        let mut rows = self.constraints.dense_rows();
        if self.trace_free {
            let mut t = vec![0.0; m];
            for i in 0..self.n {
                t[upper_index(self.n, i, i)] = 1.0;
            }
            rows.push(t);
        }
        if rows.is_empty() {
            return Ok(DMatrix::identity(m, m));
        }
        let c = DMatrix::from_fn(rows.len(), m, |r, k| rows[r][k] / self.scale(k));
        let ctc = c.transpose() * &c;
        let eig = symmetric_eigen(&ctc).ok_or(KernelError::SolverFailure)?;
        let top = eig.eigenvalues.amax().max(1.0);
        let null: Vec<usize> = (0..m).filter(|&i| eig.eigenvalues[i].abs() <= 1e-10 * top).collect();
        Ok(DMatrix::from_fn(m, null.len(), |r, c| eig.eigenvectors[(r, null[c])]))
    }

    pub fn objective(&self, a: &[f64]) -> f64 {
        let n = self.n;
        let num: f64 = a.iter().map(|v| v * v).sum();
        let den: f64 = (0..n).map(|j| a[j] * a[j]).sum();
        num / den
    }

    fn y_to_matrix(&self, y: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for (k, &v) in y.iter().enumerate() {
            let [i, j] = upper_pair(n, k);
            let x = v / self.scale(k);
            a[i * n + j] = x;
            a[j * n + i] = x;
        }
        a
    }

    /// Largest constraint residual of the symmetric matrix `a` (row-major).
    pub fn violation(&self, a: &[f64]) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for f in &self.constraints.functionals {
            let v: f64 = f.indices.iter().zip(&f.coeffs).map(|(&[i, j], c)| c * a[i * n + j]).sum();
            worst = worst.max(v.abs());
        }
        if self.trace_free {
            worst = worst.max((0..n).map(|i| a[i * n + i]).sum::<f64>().abs());
        }
        worst
    }

    /// Disjoint diagonal groups equivalent to the constraints. Under the trace
    /// constraint the indices left ungrouped form one more group, since the trace minus
    /// the other group sums is their sum. `None` unless every constraint is a diagonal
    /// group and the groups are disjoint.
    fn effective_groups(&self) -> Option<Vec<Vec<usize>>> {
        let mut groups = Vec::new();
        for f in &self.constraints.functionals {
            groups.push(f.diagonal_group()?);
        }
        let mut used = vec![false; self.n];
        for g in &groups {
            for &i in g {
                if std::mem::replace(&mut used[i], true) {
                    return None;
                }
            }
        }
        let rest: Vec<usize> = (0..self.n).filter(|&i| !used[i]).collect();
        if self.trace_free && !rest.is_empty() {
            groups.push(rest);
        }
        Some(groups)
    }

    /// Ratio `m/(m−1)` (or 2 for `m = 1`) where `m` is the size of the effective
    /// diagonal group containing index 0, and 1 when there is none.
    pub fn closed_form(&self) -> Option<f64> {
        Some(match self.binding_group()?.map(|g| g.len()) {
            None => 1.0,
            Some(1) => 2.0,
            Some(m) => m as f64 / (m as f64 - 1.0),
        })
    }

    /// The effective group containing index 0, when the closed form applies.
    fn binding_group(&self) -> Option<Option<Vec<usize>>> {
        Some(self.effective_groups()?.into_iter().find(|g| g.contains(&0)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelResult {
    pub n: usize,
    /// `1 / μ_max` of the constrained generalized eigenproblem.
    pub ratio: f64,
    pub closed_form: Option<f64>,
    /// Continued-fraction reconstruction, denominator ≤ 64.
    #[serde(serialize_with = "ser_rational")]
    pub rational: Option<Rational64>,
    /// Minimizer in frame order, row-major, scaled so `Σ_j a_1j² = 1` and `a_11 ≤ 0`.
    pub minimizer: Vec<f64>,
    /// Multiplicity of the top generalized eigenvalue.
    pub minimizer_family_dim: usize,
    /// `b` in `|Hess f|² ≥ (1 + b)|∇|∇f||²`.
    pub kato_b: f64,
    pub exponent: f64,
}

fn ser_rational<S: serde::Serializer>(q: &Option<Rational64>, s: S) -> Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_str(&q.to_string()),
        None => s.serialize_none(),
    }
}

/// Minimal Bochner ratio by the constrained eigensolve, cross-checked against the
/// closed form when it applies.
pub fn min_bochner_ratio(p: &RatioProblem) -> Result<KernelResult, KernelError> {
    if p.constraints.dim != p.n {
        return Err(KernelError::DimensionMismatch {
            expected: p.n,
            got: p.constraints.dim,
        });
    }
    let basis = p.feasible_basis()?;
    if basis.ncols() == 0 {
        return Err(KernelError::Infeasible);
    }
    let m = p.vars();
    let d = DVector::from_fn(m, |k, _| p.denominator_weight(k));
    let bd = DMatrix::from_fn(m, basis.ncols(), |r, c| d[r] * basis[(r, c)]);
    let reduced = basis.transpose() * bd;
    let eig = symmetric_eigen(&reduced).ok_or(KernelError::SolverFailure)?;
    let mu_max = eig.eigenvalues.max();
    if mu_max <= 1e-12 {
        return Err(KernelError::Infeasible);
    }
    let ratio = 1.0 / mu_max;
    let closed_form = p.closed_form();
    if let Some(c) = closed_form {
        let gap = (c - ratio).abs();
        if gap > ROUTE_TOL {
            return Err(KernelError::RouteDisagreement {
                closed: c,
                numeric: ratio,
                gap,
            });
        }
    }

    // project e_11 onto the top eigenspace; fall back to its first vector
    let top: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] >= mu_max * (1.0 - 1e-9))
        .collect();
    let e00 = basis.row(upper_index(p.n, 0, 0)).transpose();
    let mut z = DVector::zeros(basis.ncols());
    for &i in &top {
        let v = eig.eigenvectors.column(i);
        z += v * v.dot(&e00);
    }
    if z.norm() < 1e-8 {
        z = eig.eigenvectors.column(top[0]).into_owned();
    }
    let y = &basis * z;
    let mut a = p.y_to_matrix(y.as_slice());
    let den: f64 = (0..p.n).map(|j| a[j] * a[j]).sum();
    let first = if a[0].abs() > 1e-12 {
        a[0]
    } else {
        a.iter().copied().find(|v| v.abs() > 1e-12).unwrap_or(1.0)
    };
    let s = -first.signum() / den.sqrt();
    for v in &mut a {
        *v *= s;
    }
    let b = ratio - 1.0;
    Ok(KernelResult {
        n: p.n,
        ratio,
        closed_form,
        rational: recover(ratio, 64, 1e-9),
        minimizer: a,
        minimizer_family_dim: top.len(),
        kato_b: b,
        exponent: 1.0 - b,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EqualityDiagnostics {
    pub objective_at_minimizer: f64,
    pub constraint_violation: f64,
    pub max_off_diagonal: f64,
    /// `a_11` followed by the remaining diagonal in descending order.
    pub canonical_diagonal: Vec<f64>,
    /// `μ` of the pattern `a_11 = −(m−1)μ`, `μ` on the rest of the binding group, zero elsewhere.
    pub mu: Option<f64>,
    pub pattern_residual: Option<f64>,
}

pub fn equality_diagnostics(p: &RatioProblem, r: &KernelResult) -> EqualityDiagnostics {
    let n = p.n;
    let a = &r.minimizer;
    let mut max_off: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            max_off = max_off.max(a[i * n + j].abs());
        }
    }
    let mut rest: Vec<f64> = (1..n).map(|i| a[i * n + i]).collect();
    rest.sort_by(|x, y| y.total_cmp(x));
    let mut canonical_diagonal = vec![a[0]];
    canonical_diagonal.extend(rest);
    let (mu, pattern_residual) = match p.binding_group().flatten() {
        Some(g) if g.len() > 1 => {
            let mu = -a[0] / (g.len() as f64 - 1.0);
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let expected = match (i == j, i == 0, g.contains(&i)) {
                        (true, true, _) => a[0],
                        (true, false, true) => mu,
                        _ => 0.0,
                    };
                    worst = worst.max((a[i * n + j] - expected).abs());
                }
            }
            (Some(mu), Some(worst))
        }
        _ => (None, None),
    };
    EqualityDiagnostics {
        objective_at_minimizer: p.objective(a),
        constraint_violation: p.violation(a),
        max_off_diagonal: max_off,
        canonical_diagonal,
        mu,
        pattern_residual,
    }
}

/// A random feasible symmetric matrix (row-major).
pub fn sample_feasible<R: Rng + ?Sized>(p: &RatioProblem, basis: &DMatrix<f64>, rng: &mut R) -> Vec<f64> {
    let z = DVector::from_fn(basis.ncols(), |_, _| rng.gen_range(-1.0..=1.0));
    p.y_to_matrix((basis * z).as_slice())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessScan {
    pub samples: usize,
    pub skipped_degenerate: usize,
    pub min_objective: f64,
    /// Largest amount by which any sample undercut the minimal ratio (0 if none did).
    pub max_undercut: f64,
}

/// Evaluates the objective on random feasible samples; sample `k` is seeded by `seed + k`.
pub fn sharpness_scan(p: &RatioProblem, ratio: f64, samples: usize, seed: u64) -> Result<SharpnessScan, KernelError> {
    let basis = p.feasible_basis()?;
    let values: Vec<Option<f64>> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let a = sample_feasible(p, &basis, &mut rng);
            let den: f64 = (0..p.n).map(|j| a[j] * a[j]).sum();
            (den > 1e-24).then(|| p.objective(&a))
        })
        .collect();
    let mut min_objective = f64::INFINITY;
    let mut skipped = 0;
    for v in &values {
        match v {
            Some(v) => min_objective = min_objective.min(*v),
            None => skipped += 1,
        }
    }
    Ok(SharpnessScan {
        samples,
        skipped_degenerate: skipped,
        min_objective,
        max_undercut: (ratio - min_objective).max(0.0),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KatoTransform {
    pub b: f64,
    /// `g = h^k` with `k = 1 − b`.
    pub exponent: f64,
    /// `a` in `Δg ≥ −a g`.
    pub drift: f64,
    /// `k = 0`: no transform, the threshold is used directly.
    pub degenerate: bool,
}

pub fn kato_transform(ratio: f64, ricci: f64) -> Result<KatoTransform, KernelError> {
    if !(ratio > 1.0 && ratio <= 2.0 + 1e-12) {
        return Err(KernelError::RatioOutOfRange(ratio));
    }
    if !(ricci < 0.0) {
        return Err(KernelError::NonNegativeRicci(ricci));
    }
    let b = ratio - 1.0;
    let k = 1.0 - b;
    let degenerate = k.abs() < 1e-12;
    Ok(KatoTransform {
        b,
        exponent: if degenerate { 0.0 } else { k },
        drift: if degenerate { 0.0 } else { -ricci * k },
        degenerate,
    })
}

/// Monomial `h^{e} |∇h|^{g} (Δh)^{l}` with rational `e`.
pub type Monomial = (Rational64, u32, u32);
pub type Polynomial = BTreeMap<Monomial, Rational64>;

fn add_term(p: &mut Polynomial, m: Monomial, c: Rational64) {
    let e = p.entry(m).or_insert_with(|| Rational64::from_integer(0));
    *e += c;
    if *e == Rational64::from_integer(0) {
        p.remove(&m);
    }
}

/// `Δg + a g − k h^{k−1}(Δh − b|∇h|²/h + |ric| h)` for `g = h^k`, `k = 1 − b`,
/// `a = |ric| k`, expanded over exact rationals. Zero iff the chain rule closes.
pub fn kato_identity_residual(ratio: Rational64, ricci: Rational64) -> Polynomial {
    let one = Rational64::from_integer(1);
    let b = ratio - one;
    let k = one - b;
    let abs_ric = -ricci;
    let a = abs_ric * k;
    let mut p = Polynomial::new();
    // Δ(h^k) = k h^{k−1} Δh + k(k−1) h^{k−2} |∇h|²
    add_term(&mut p, (k - one, 0, 1), k);
    add_term(&mut p, (k - one - one, 2, 0), k * (k - one));
    add_term(&mut p, (k, 0, 0), a);
    add_term(&mut p, (k - one, 0, 1), -k);
    add_term(&mut p, (k - one - one, 2, 0), k * b);
    add_term(&mut p, (k, 0, 0), -k * abs_ric);
    p
}

/// Ricci level `−(b+1)λ₁` below which the vanishing argument is unavailable.
pub fn vanishing_threshold(b: f64, lambda1: f64) -> Result<f64, KernelError> {
    if !(b > -1.0) {
        return Err(KernelError::BadKatoParameter(b));
    }
    if !(lambda1 > 0.0) {
        return Err(KernelError::NonPositiveSpectrum(lambda1));
    }
    Ok(-(b + 1.0) * lambda1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralBound {
    /// Drift of the Kato transform at ratio 8/7, Ricci −36.
    #[serde(serialize_with = "ser_rational_plain")]
    pub bound: Rational64,
    /// `|ric| · (1 − b)` evaluated independently.
    #[serde(serialize_with = "ser_rational_plain")]
    pub drift_identity: Rational64,
    /// `λ₁` at which `(1 + b)λ₁ = |ric|`.
    #[serde(serialize_with = "ser_rational_plain")]
    pub direct_threshold: Rational64,
    /// Bottom of the spectrum of the model space.
    pub model_lambda1: f64,
}

fn ser_rational_plain<S: serde::Serializer>(q: &Rational64, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub fn spin9_spectral_bound() -> SpectralBound {
    let ratio = Rational64::new(8, 7);
    let ric = Rational64::from_integer(36);
    let one = Rational64::from_integer(1);
    let b = ratio - one;
    SpectralBound {
        bound: ric * (one - b),
        drift_identity: Rational64::from_integer(36) * Rational64::new(6, 7),
        direct_threshold: ric / (one + b),
        model_lambda1: 121.0,
    }
}
