//! Parallel forms of the Kähler, quaternionic-Kähler and Spin(9) geometries, and the
//! linear constraints they force on the Hessian of a harmonic function.
//!
//! Frame orderings: Kähler `(ē, Iē)`, quaternionic `(ē, Iē, Jē, Kē)` in blocks of `n`,
//! Spin(9) `(v_0..v_7, w_0..w_7)`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exterior::{apply_hessian_operator, ExteriorError, Form, HessianSurrogate, MultiIndex, MAX_DIM};
use crate::rational::snap;

#[derive(Debug, Error, PartialEq)]
pub enum FormsError {
    #[error("unsupported dimension for {kind}: n = {n}")]
    BadDimension { kind: &'static str, n: usize },
    #[error("F-word {word} has grade {grade}, expected 8")]
    BadGrade { word: usize, grade: usize },
    #[error("F-word {word} uses index {index}, outside 0..8")]
    IndexOutOfRange { word: usize, index: u8 },
    #[error("index map {0} is not injective")]
    NonInjective(&'static str),
    #[error("F-word {word} is built from only one block")]
    PureWord { word: usize },
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
}

/// `coeff · ω_{i₁j₁} ∧ … ∧ η_{k₁l₁} ∧ …` with `ω_{ij} = v_{σ(i)} ∧ v_{σ(j)}` and
/// `η_{kl} = w_{τ(k)} ∧ w_{τ(l)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FWord {
    pub coeff: f64,
    pub omega: Vec<(u8, u8)>,
    pub eta: Vec<(u8, u8)>,
}

/// The Spin(9)-dependent part of the 8-form: a combination of mixed words and the
/// index maps placing them in the frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FSpec {
    pub words: Vec<FWord>,
    pub sigma: [u8; 8],
    pub tau: [u8; 8],
}

impl FSpec {
    pub fn zero() -> Self {
        Self {
            words: Vec::new(),
            sigma: [0, 1, 2, 3, 4, 5, 6, 7],
            tau: [0, 1, 2, 3, 4, 5, 6, 7],
        }
    }

    /// Random admissible `F`: `words` mixed words with 1 to 3 `ω` factors, random index
    /// maps and coefficients in `[-1, 1]`.
    pub fn random<R: Rng + ?Sized>(words: usize, rng: &mut R) -> Self {
        let mut sigma = [0, 1, 2, 3, 4, 5, 6, 7];
        let mut tau = sigma;
        sigma.shuffle(rng);
        tau.shuffle(rng);
        let pair = |rng: &mut R| {
            let i = rng.gen_range(0..8u8);
            let mut j = rng.gen_range(0..7u8);
            if j >= i {
                j += 1;
            }
            (i, j)
        };
        let words = (0..words)
            .map(|_| {
                let k = rng.gen_range(1..=3);
                FWord {
                    coeff: rng.gen_range(-1.0..=1.0),
                    omega: (0..k).map(|_| pair(rng)).collect(),
                    eta: (0..4 - k).map(|_| pair(rng)).collect(),
                }
            })
            .collect();
        Self { words, sigma, tau }
    }

    pub fn validate(&self) -> Result<(), FormsError> {
        for (name, map) in [("sigma", &self.sigma), ("tau", &self.tau)] {
            let mut seen = [false; 8];
            for &m in map.iter() {
                if m >= 8 {
                    return Err(FormsError::NonInjective(name));
                }
                if std::mem::replace(&mut seen[m as usize], true) {
                    return Err(FormsError::NonInjective(name));
                }
            }
        }
        for (w, word) in self.words.iter().enumerate() {
            let grade = 2 * (word.omega.len() + word.eta.len());
            if grade != 8 {
                return Err(FormsError::BadGrade { word: w, grade });
            }
            if word.omega.is_empty() || word.eta.is_empty() {
                return Err(FormsError::PureWord { word: w });
            }
            for &(a, b) in word.omega.iter().chain(&word.eta) {
                for index in [a, b] {
                    if index >= 8 {
                        return Err(FormsError::IndexOutOfRange { word: w, index });
                    }
                }
            }
        }
        Ok(())
    }

    /// Expands `F` as a 16-dimensional 8-form.
    pub fn expand(&self) -> Result<Form, FormsError> {
        self.validate()?;
        let mut f = Form::zero(16, 8);
        for word in &self.words {
            let mut slots = Vec::with_capacity(8);
            for &(i, j) in &word.omega {
                slots.push(self.sigma[i as usize] as usize);
                slots.push(self.sigma[j as usize] as usize);
            }
            for &(k, l) in &word.eta {
                slots.push(8 + self.tau[k as usize] as usize);
                slots.push(8 + self.tau[l as usize] as usize);
            }
            f = f.add(&Form::monomial(16, &slots, word.coeff)?)?;
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParallelFormSpec {
    Kahler { n: usize },
    Quaternionic { n: usize },
    Spin9 { f: FSpec },
}

/// A complex structure on the frame acting as a signed permutation: `J e_s = sign·e_target`.
type SignedPerm = Vec<(usize, f64)>;

/// `ω(X, Y) = g(X, J Y)`.
fn structure_form(dim: usize, j: &SignedPerm) -> Form {
    let mut f = Form::zero(dim, 2);
    // each pair {a, b} is seen from both ends; keep the one with a = J-image below b
    for (b, &(a, sign)) in j.iter().enumerate() {
        if a < b {
            f.add_term(MultiIndex::from_slots(&[a, b]), sign);
        }
    }
    f
}

/// The three quaternionic structures on `(ē, Iē, Jē, Kē)` blocks of width `n`.
fn quaternionic_structures(n: usize) -> [SignedPerm; 3] {
    // block images (target block, sign) for blocks ē, Iē, Jē, Kē
    let tables: [[(usize, f64); 4]; 3] = [
        [(1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0)],
        [(2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0)],
        [(3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0)],
    ];
    tables.map(|t| {
        (0..4 * n)
            .map(|s| {
                let (block, i) = (s / n, s % n);
                let (tb, sign) = t[block];
                (tb * n + i, sign)
            })
            .collect()
    })
}

impl ParallelFormSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::Kahler { n } => 2 * n,
            Self::Quaternionic { n } => 4 * n,
            Self::Spin9 { .. } => 16,
        }
    }

    fn check(&self) -> Result<(), FormsError> {
        let (kind, n) = match self {
            Self::Kahler { n } => ("kahler", *n),
            Self::Quaternionic { n } => ("quaternionic", *n),
            Self::Spin9 { f } => return f.validate(),
        };
        if n == 0 || self.dim() > MAX_DIM {
            return Err(FormsError::BadDimension { kind, n });
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Form, FormsError> {
        self.check()?;
        match self {
            Self::Kahler { n } => {
                let mut f = Form::zero(2 * n, 2);
                for i in 0..*n {
                    f.add_term(MultiIndex::from_slots(&[i, n + i]), -1.0);
                }
                Ok(f)
            }
            Self::Quaternionic { n } => {
                let dim = 4 * n;
                let mut total = Form::zero(dim, 4);
                for j in quaternionic_structures(*n) {
                    let w = structure_form(dim, &j);
                    total = total.add(&w.wedge(&w)?)?;
                }
                Ok(total)
            }
            Self::Spin9 { f } => {
                let mut base = Form::zero(16, 8);
                base.add_term(v_top(), -1.0);
                base.add_term(w_top(), 1.0);
                Ok(base.add(&f.expand()?)?)
            }
        }
    }

    /// Monomials whose coefficients the vanishing argument reads off: `{i, n+i}` for
    /// Kähler, `{i, n+i, 2n+i, 3n+i}` for quaternionic, the two top monomials for Spin(9).
    pub fn designated_monomials(&self) -> Vec<MultiIndex> {
        match self {
            Self::Kahler { n } => (0..*n).map(|i| MultiIndex::from_slots(&[i, n + i])).collect(),
            Self::Quaternionic { n } => (0..*n)
                .map(|i| MultiIndex::from_slots(&[i, n + i, 2 * n + i, 3 * n + i]))
                .collect(),
            Self::Spin9 { .. } => vec![v_top(), w_top()],
        }
    }
}

pub fn v_top() -> MultiIndex {
    MultiIndex(0x00ff)
}

pub fn w_top() -> MultiIndex {
    MultiIndex(0xff00)
}

/// A linear functional `a ↦ Σ c_{ij} a_{ij}` on symmetric matrices, over `i ≤ j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional {
    pub indices: Vec<[usize; 2]>,
    pub coeffs: Vec<f64>,
}

impl LinearFunctional {
    pub fn from_dense(n: usize, dense: &[f64]) -> Self {
        let mut indices = Vec::new();
        let mut coeffs = Vec::new();
        for (k, &c) in dense.iter().enumerate() {
            if c != 0.0 {
                indices.push(upper_pair(n, k));
                coeffs.push(c);
            }
        }
        Self { indices, coeffs }
    }

    pub fn to_dense(&self, n: usize) -> Vec<f64> {
        let mut v = vec![0.0; n * (n + 1) / 2];
        for (&[i, j], &c) in self.indices.iter().zip(&self.coeffs) {
            v[upper_index(n, i, j)] += c;
        }
        v
    }

    pub fn evaluate(&self, a: &HessianSurrogate) -> f64 {
        self.indices.iter().zip(&self.coeffs).map(|(&[i, j], c)| c * a.get(i, j)).sum()
    }

    /// Diagonal indices if the functional is `Σ_{i∈S} a_ii` with unit coefficients.
    pub fn diagonal_group(&self) -> Option<Vec<usize>> {
        let mut out = Vec::with_capacity(self.indices.len());
        for (&[i, j], &c) in self.indices.iter().zip(&self.coeffs) {
            if i != j || (c - 1.0).abs() > 1e-12 {
                return None;
            }
            out.push(i);
        }
        Some(out)
    }
}

impl std::fmt::Display for LinearFunctional {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, (&[i, j], &c)) in self.indices.iter().zip(&self.coeffs).enumerate() {
            let sign = match (k, c < 0.0) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            let mag = c.abs();
            let coef = if (mag - 1.0).abs() < 1e-12 { String::new() } else { format!("{mag}*") };
            write!(f, "{sign}{coef}a[{},{}]", i + 1, j + 1)?;
        }
        write!(f, " = 0")
    }
}

/// Position of `(i, j)`, `i ≤ j`, among the upper-triangular entries in row order.
pub fn upper_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

pub fn upper_pair(n: usize, mut k: usize) -> [usize; 2] {
    for i in 0..n {
        let row = n - i;
        if k < row {
            return [i, i + k];
        }
        k -= row;
    }
    panic!("index out of range")
}

/// Linearly independent functionals in reduced row echelon form, coefficients snapped
/// to rationals with denominator ≤ 64.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub dim: usize,
    pub functionals: Vec<LinearFunctional>,
}

const PIVOT_TOL: f64 = 1e-9;

impl ConstraintSet {
    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            functionals: Vec::new(),
        }
    }

    /// Gaussian elimination with partial pivoting to reduced row echelon form.
    pub fn canonicalize(dim: usize, rows: &[Vec<f64>]) -> Self {
        let cols = dim * (dim + 1) / 2;
        let mut m: Vec<Vec<f64>> = rows.to_vec();
        let mut rank = 0;
        for col in 0..cols {
            if rank == m.len() {
                break;
            }
            let (best, val) = (rank..m.len())
                .map(|r| (r, m[r][col].abs()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("nonempty");
            if val <= PIVOT_TOL {
                continue;
            }
            m.swap(rank, best);
            let p = m[rank][col];
            for v in m[rank].iter_mut() {
                *v /= p;
            }
            let pivot_row = m[rank].clone();
            for (r, row) in m.iter_mut().enumerate() {
                if r != rank && row[col] != 0.0 {
                    let f = row[col];
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
            rank += 1;
        }
        m.truncate(rank);
        let functionals = m
            .into_iter()
            .map(|row| {
                let row: Vec<f64> = row
                    .into_iter()
                    .map(|v| if v.abs() <= PIVOT_TOL { 0.0 } else { snap(v, 64, PIVOT_TOL) })
                    .collect();
                LinearFunctional::from_dense(dim, &row)
            })
            .collect();
        Self { dim, functionals }
    }

    pub fn len(&self) -> usize {
        self.functionals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functionals.is_empty()
    }

    pub fn dense_rows(&self) -> Vec<Vec<f64>> {
        self.functionals.iter().map(|f| f.to_dense(self.dim)).collect()
    }

    /// Union of two constraint sets, re-canonicalized.
    pub fn union(&self, other: &ConstraintSet) -> ConstraintSet {
        let mut rows = self.dense_rows();
        rows.extend(other.dense_rows());
        Self::canonicalize(self.dim, &rows)
    }

    /// Constraints plus the trace functional.
    pub fn with_trace(&self) -> ConstraintSet {
        let mut trace = vec![0.0; self.dim * (self.dim + 1) / 2];
        for i in 0..self.dim {
            trace[upper_index(self.dim, i, i)] = 1.0;
        }
        let mut rows = self.dense_rows();
        rows.push(trace);
        Self::canonicalize(self.dim, &rows)
    }

    pub fn max_violation(&self, a: &HessianSurrogate) -> f64 {
        self.functionals.iter().map(|f| f.evaluate(a).abs()).fold(0.0, f64::max)
    }
}

/// Coefficient functionals `a ↦ coeff_M T(a, Ω)` for each monomial `M` that appears,
/// as dense rows over the upper-triangular entries.
pub fn coefficient_functionals(omega: &Form) -> Result<BTreeMap<MultiIndex, Vec<f64>>, FormsError> {
    let n = omega.dim();
    let cols = n * (n + 1) / 2;
    let mut out: BTreeMap<MultiIndex, Vec<f64>> = BTreeMap::new();
    for i in 0..n {
        for j in i..n {
            let t = apply_hessian_operator(&HessianSurrogate::elementary(n, i, j), omega)?;
            for (m, c) in t.terms() {
                out.entry(m).or_insert_with(|| vec![0.0; cols])[upper_index(n, i, j)] += c;
            }
        }
    }
    Ok(out)
}

/// Constraints read off the designated monomials, or every monomial when `targets` is `None`.
pub fn extract_constraints(omega: &Form, targets: Option<&[MultiIndex]>) -> Result<ConstraintSet, FormsError> {
    let all = coefficient_functionals(omega)?;
    let rows: Vec<Vec<f64>> = match targets {
        Some(ts) => ts.iter().filter_map(|m| all.get(m).cloned()).collect(),
        None => all.into_values().collect(),
    };
    Ok(ConstraintSet::canonicalize(omega.dim(), &rows))
}

/// Spin(9) constraints split into the part fixed by the two top monomials and the
/// constraints from every other monomial, which in general depend on the chosen `F`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spin9Constraints {
    pub portable: ConstraintSet,
    pub non_portable: ConstraintSet,
    /// Raw coefficient functional of `v_0∧…∧v_7`.
    pub v_top_raw: Vec<f64>,
}

pub fn spin9_constraints(f: &FSpec) -> Result<Spin9Constraints, FormsError> {
    let omega = ParallelFormSpec::Spin9 { f: f.clone() }.build()?;
    let mut all = coefficient_functionals(&omega)?;
    let cols = 16 * 17 / 2;
    let v_top_raw = all.remove(&v_top()).unwrap_or_else(|| vec![0.0; cols]);
    let w_top_raw = all.remove(&w_top()).unwrap_or_else(|| vec![0.0; cols]);
    let portable = ConstraintSet::canonicalize(16, &[v_top_raw.clone(), w_top_raw]);
    let others: Vec<Vec<f64>> = all.into_values().collect();
    let non_portable = ConstraintSet::canonicalize(16, &others);
    Ok(Spin9Constraints {
        portable,
        non_portable,
        v_top_raw,
    })
}

/// `-Σ_{i<8} a_ii` as a dense row.
pub fn expected_v_top_functional() -> Vec<f64> {
    let mut v = vec![0.0; 16 * 17 / 2];
    for i in 0..8 {
        v[upper_index(16, i, i)] = -1.0;
    }
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NoLeakReport {
    pub trials: usize,
    pub pairs_checked: usize,
    /// Largest `|coeff|` of either top monomial in any `ε(θ^i) l(e_j) F`.
    pub max_leak: f64,
    /// Largest deviation of the `v`-top functional from `-Σ_{i<8} a_ii`.
    pub max_v_top_deviation: f64,
}

/// Checks that `ε(θ^i) l(e_j) F` never reaches either top monomial, for all 256 pairs.
pub fn no_leak(f: &FSpec) -> Result<f64, FormsError> {
    let form = f.expand()?;
    let mut worst: f64 = 0.0;
    for j in 0..16 {
        let contracted = form.interior(j);
        for i in 0..16 {
            let t = contracted.epsilon(i);
            worst = worst.max(t.coeff(v_top()).abs()).max(t.coeff(w_top()).abs());
        }
    }
    Ok(worst)
}

/// Runs [`no_leak`] and the `v`-top functional check on `trials` random admissible `F`,
/// trial `k` seeded from `seed + k`.
pub fn no_leak_trials(trials: usize, words: usize, seed: u64) -> Result<NoLeakReport, FormsError> {
    let expected = expected_v_top_functional();
    let results: Vec<Result<(f64, f64), FormsError>> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let f = FSpec::random(words, &mut rng);
            let leak = no_leak(&f)?;
            let cons = spin9_constraints(&f)?;
            let dev = cons
                .v_top_raw
                .iter()
                .zip(&expected)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            Ok((leak, dev))
        })
        .collect();
    let mut max_leak: f64 = 0.0;
    let mut max_dev: f64 = 0.0;
    for r in results {
        let (l, d) = r?;
        max_leak = max_leak.max(l);
        max_dev = max_dev.max(d);
    }
    Ok(NoLeakReport {
        trials,
        pairs_checked: 256 * trials,
        max_leak,
        max_v_top_deviation: max_dev,
    })
}
