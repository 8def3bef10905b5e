//! Sparse exterior algebra over an oriented orthonormal coframe `θ^0, ..., θ^{n-1}`.
//!
//! A monomial is a bitmask of covector slots and its stored coefficient always
//! refers to the strictly ascending wedge product. Every sign below comes from
//! the parity of a bitmask merge: moving `θ^k` past the slots of `I` that lie
//! below `k` costs `popcount(I & ((1 << k) - 1))` transpositions.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use thiserror::Error;

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Coefficients below this are dropped from sparse storage.
const DROP_TOL: f64 = 0.0;

#[derive(Debug, Error, PartialEq)]
pub enum ExteriorError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("dimension {0} outside 1..={MAX_DIM}")]
    BadDimension(usize),
    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(usize, usize),
    #[error("slot {slot} out of range for dimension {dim}")]
    SlotOutOfRange { slot: usize, dim: usize },
    #[error("matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("matrix has {0} entries, expected {1}")]
    BadMatrixLen(usize, usize),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Set of covector slots labelling a monomial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(pub u32);

impl MultiIndex {
    pub fn from_slots(slots: &[usize]) -> Self {
        let mut m = 0u32;
        for &s in slots {
            m |= 1 << s;
        }
        MultiIndex(m)
    }

    pub fn grade(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, slot: usize) -> bool {
        self.0 & (1 << slot) != 0
    }

    pub fn slots(self) -> impl Iterator<Item = usize> {
        let m = self.0;
        (0..32).filter(move |&k| m & (1 << k) != 0)
    }

    /// Number of slots of `self` strictly below `k`.
    #[inline]
    fn below(self, k: usize) -> u32 {
        (self.0 & ((1u32 << k) - 1)).count_ones()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.slots().map(|k| (k + 1).to_string()).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Sign of `θ^I ∧ θ^J` relative to the ascending monomial of `I | J`, or 0 if they overlap.
#[inline]
pub fn merge_sign(i: MultiIndex, j: MultiIndex) -> f64 {
    if i.0 & j.0 != 0 {
        return 0.0;
    }
    let mut inversions = 0u32;
    let mut rest = j.0;
    while rest != 0 {
        let k = rest.trailing_zeros();
        // slots of I above k must move past θ^k
        inversions += (i.0 >> (k + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

#[inline]
fn parity(count: u32) -> f64 {
    if count.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// A homogeneous form of fixed grade.
#[derive(Clone, Debug, PartialEq)]
pub struct Form {
    dim: usize,
    grade: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Form {
    pub fn zero(dim: usize, grade: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dimension out of range");
        Self {
            dim,
            grade,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut f = Self::zero(dim, 0);
        f.add_term(MultiIndex(0), value);
        f
    }

    /// `coeff · θ^{s_1} ∧ ... ∧ θ^{s_p}` for slots in any order; repeated slots give zero.
    pub fn monomial(dim: usize, slots: &[usize], coeff: f64) -> Result<Self, ExteriorError> {
        let mut acc = Form::scalar(dim, coeff);
        for &s in slots {
            if s >= dim {
                return Err(ExteriorError::SlotOutOfRange { slot: s, dim });
            }
            acc = acc.wedge(&Form::covector(dim, s))?;
        }
        Ok(acc)
    }

    pub fn covector(dim: usize, slot: usize) -> Self {
        let mut f = Self::zero(dim, 1);
        f.add_term(MultiIndex(1 << slot), 1.0);
        f
    }

    pub fn volume(dim: usize) -> Self {
        let mut f = Self::zero(dim, dim);
        f.add_term(MultiIndex(((1u64 << dim) - 1) as u32), 1.0);
        f
    }

    /// Random sparse form: `terms` distinct monomials with coefficients in `[-1, 1]`.
    pub fn random_sparse<R: Rng + ?Sized>(dim: usize, grade: usize, terms: usize, rng: &mut R) -> Self {
        let mut f = Self::zero(dim, grade);
        for _ in 0..terms {
            let slots = sample(rng, dim, grade).into_vec();
            let m = MultiIndex::from_slots(&slots);
            f.add_term(m, rng.gen_range(-1.0..=1.0));
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn coeff(&self, m: MultiIndex) -> f64 {
        self.terms.get(&m).copied().unwrap_or(0.0)
    }

    /// Adds `value` to the coefficient of `m`.
    pub fn add_term(&mut self, m: MultiIndex, value: f64) {
        debug_assert_eq!(m.grade(), self.grade);
        if value == 0.0 {
            return;
        }
        let e = self.terms.entry(m).or_insert(0.0);
        *e += value;
        if e.abs() <= DROP_TOL {
            self.terms.remove(&m);
        }
    }

    fn check_same(&self, other: &Form) -> Result<(), ExteriorError> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimensionMismatch(self.dim, other.dim));
        }
        if self.grade != other.grade {
            return Err(ExteriorError::GradeMismatch(self.grade, other.grade));
        }
        Ok(())
    }

    pub fn add(&self, other: &Form) -> Result<Form, ExteriorError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Form) -> Result<Form, ExteriorError> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Form {
        let mut out = Form::zero(self.dim, self.grade);
        if s != 0.0 {
            for (m, c) in self.terms() {
                out.terms.insert(m, c * s);
            }
        }
        out
    }

    pub fn wedge(&self, other: &Form) -> Result<Form, ExteriorError> {
        if self.dim != other.dim {
            return Err(ExteriorError::DimensionMismatch(self.dim, other.dim));
        }
        let mut out = Form::zero(self.dim, self.grade + other.grade);
        for (i, a) in self.terms() {
            for (j, b) in other.terms() {
                let s = merge_sign(i, j);
                if s != 0.0 {
                    out.add_term(MultiIndex(i.0 | j.0), s * a * b);
                }
            }
        }
        Ok(out)
    }

    /// Exterior multiplication `ε(θ^k)η = θ^k ∧ η`.
    pub fn epsilon(&self, k: usize) -> Form {
        assert!(k < self.dim, "slot out of range");
        let mut out = Form::zero(self.dim, self.grade + 1);
        for (m, c) in self.terms() {
            if !m.contains(k) {
                out.add_term(MultiIndex(m.0 | (1 << k)), parity(m.below(k)) * c);
            }
        }
        out
    }

    /// Interior product `l(e_k)η = η(e_k, ·)`.
    pub fn interior(&self, k: usize) -> Form {
        assert!(k < self.dim, "slot out of range");
        let mut out = Form::zero(self.dim, self.grade.saturating_sub(1));
        if self.grade == 0 {
            return out;
        }
        for (m, c) in self.terms() {
            if m.contains(k) {
                out.add_term(MultiIndex(m.0 & !(1 << k)), parity(m.below(k)) * c);
            }
        }
        out
    }

    /// Exterior multiplication by a general covector `Σ c_k θ^k`.
    pub fn epsilon_vec(&self, covector: &[f64]) -> Form {
        let mut out = Form::zero(self.dim, self.grade + 1);
        for (k, &ck) in covector.iter().enumerate() {
            if ck != 0.0 {
                for (m, c) in self.epsilon(k).terms() {
                    out.add_term(m, ck * c);
                }
            }
        }
        out
    }

    /// Interior product by a general vector `Σ v_k e_k`.
    pub fn interior_vec(&self, vector: &[f64]) -> Form {
        let mut out = Form::zero(self.dim, self.grade.saturating_sub(1));
        for (k, &vk) in vector.iter().enumerate() {
            if vk != 0.0 {
                for (m, c) in self.interior(k).terms() {
                    out.add_term(m, vk * c);
                }
            }
        }
        out
    }

    /// Hodge star, fixed by `θ^I ∧ *θ^I = vol`.
    pub fn hodge(&self) -> Form {
        let full = MultiIndex(((1u64 << self.dim) - 1) as u32);
        let mut out = Form::zero(self.dim, self.dim - self.grade.min(self.dim));
        if self.grade > self.dim {
            return out;
        }
        for (m, c) in self.terms() {
            let comp = MultiIndex(full.0 & !m.0);
            out.add_term(comp, merge_sign(m, comp) * c);
        }
        out
    }

    /// Monomial inner product (the basis monomials are orthonormal).
    pub fn inner(&self, other: &Form) -> f64 {
        if self.grade != other.grade {
            return 0.0;
        }
        self.terms().map(|(m, c)| c * other.coeff(m)).sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    /// Largest coefficient difference; forms of different grade compare by their norms.
    pub fn max_abs_diff(&self, other: &Form) -> f64 {
        if self.grade != other.grade {
            return self.max_abs().max(other.max_abs());
        }
        let mut d: f64 = 0.0;
        for (m, c) in self.terms() {
            d = d.max((c - other.coeff(m)).abs());
        }
        for (m, c) in other.terms() {
            if !self.terms.contains_key(&m) {
                d = d.max(c.abs());
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |a, c| a.max(c.abs()))
    }

    /// Text form: a `# dim=N grade=P` header, then one `i1,i2,...:coefficient` line
    /// per monomial with 1-based ascending slot indices.
    pub fn to_text(&self) -> String {
        let mut s = format!("# dim={} grade={}\n", self.dim, self.grade);
        for (m, c) in self.terms() {
            let idx: Vec<String> = m.slots().map(|k| (k + 1).to_string()).collect();
            s.push_str(&format!("{}:{:e}\n", idx.join(","), c));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Form, ExteriorError> {
        let mut dim = None;
        let mut grade = None;
        let mut pending = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let err = |msg: &str| ExteriorError::Parse {
                line: n + 1,
                msg: msg.to_string(),
            };
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    if let Some(v) = kv.strip_prefix("dim=") {
                        dim = Some(v.parse::<usize>().map_err(|_| err("bad dim"))?);
                    } else if let Some(v) = kv.strip_prefix("grade=") {
                        grade = Some(v.parse::<usize>().map_err(|_| err("bad grade"))?);
                    }
                }
                continue;
            }
            let (idx, coeff) = line.split_once(':').ok_or_else(|| err("missing ':'"))?;
            let coeff: f64 = coeff.trim().parse().map_err(|_| err("bad coefficient"))?;
            let mut slots = Vec::new();
            for t in idx.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let k: usize = t.parse().map_err(|_| err("bad index"))?;
                if k == 0 {
                    return Err(err("indices are 1-based"));
                }
                slots.push(k - 1);
            }
            if slots.windows(2).any(|w| w[0] >= w[1]) {
                return Err(err("indices must be strictly ascending"));
            }
            pending.push((n + 1, slots, coeff));
        }
        let dim = dim.ok_or(ExteriorError::Parse {
            line: 0,
            msg: "missing `# dim=` header".into(),
        })?;
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(ExteriorError::BadDimension(dim));
        }
        let grade = grade
            .or_else(|| pending.first().map(|(_, s, _)| s.len()))
            .unwrap_or(0);
        let mut f = Form::zero(dim, grade);
        for (line, slots, c) in pending {
            if slots.len() != grade {
                return Err(ExteriorError::Parse {
                    line,
                    msg: "monomial grade differs from header".into(),
                });
            }
            if let Some(&s) = slots.iter().find(|&&s| s >= dim) {
                return Err(ExteriorError::SlotOutOfRange { slot: s, dim });
            }
            f.add_term(MultiIndex::from_slots(&slots), c);
        }
        Ok(f)
    }
}

/// Symmetric `n × n` matrix standing in for the covariant derivative `a_{ij}` of a
/// closed 1-form (the Hessian of a function).
#[derive(Clone, Debug, PartialEq)]
pub struct HessianSurrogate {
    n: usize,
    data: Vec<f64>,
    trace_free: bool,
}

impl HessianSurrogate {
    /// Row-major entries; symmetry is checked to 1e-12.
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, ExteriorError> {
        if data.len() != n * n {
            return Err(ExteriorError::BadMatrixLen(data.len(), n * n));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 {
                    return Err(ExteriorError::NotSymmetric(i, j));
                }
            }
        }
        let trace: f64 = (0..n).map(|i| data[i * n + i]).sum();
        Ok(Self {
            n,
            data,
            trace_free: trace.abs() <= 1e-12,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            n,
            data,
            trace_free: false,
        }
    }

    /// `E^{(ij)}`: ones at `(i, j)` and `(j, i)`.
    pub fn elementary(n: usize, i: usize, j: usize) -> Self {
        let mut data = vec![0.0; n * n];
        data[i * n + j] = 1.0;
        data[j * n + i] = 1.0;
        Self {
            n,
            data,
            trace_free: i != j,
        }
    }

    /// Random symmetric matrix with entries in `[-1, 1]`, then trace removed.
    pub fn random_trace_free<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..=1.0);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        let shift = (0..n).map(|i| data[i * n + i]).sum::<f64>() / n as f64;
        for i in 0..n {
            data[i * n + i] -= shift;
        }
        // last diagonal absorbs the rounding left by the shift
        let residual: f64 = (0..n).map(|i| data[i * n + i]).sum();
        data[n * n - 1] -= residual;
        Self {
            n,
            data,
            trace_free: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn is_trace_free(&self) -> bool {
        self.trace_free
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// `T(a, ω) = Σ_{i,j} a_{ij} ε(θ^i) l(e_j) ω`.
pub fn apply_hessian_operator(a: &HessianSurrogate, omega: &Form) -> Result<Form, ExteriorError> {
    if a.n() != omega.dim() {
        return Err(ExteriorError::DimensionMismatch(a.n(), omega.dim()));
    }
    let n = a.n();
    let mut out = Form::zero(n, omega.grade());
    for j in 0..n {
        let contracted = omega.interior(j);
        if contracted.is_zero() {
            continue;
        }
        let column: Vec<f64> = (0..n).map(|i| a.get(i, j)).collect();
        for (m, c) in contracted.epsilon_vec(&column).terms() {
            out.add_term(m, c);
        }
    }
    Ok(out)
}

#[inline]
fn sign_pow(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Residuals of the six star/contraction identities for a homogeneous `η`, with
/// `θ = θ^k`, `v = e_k` and a second basis vector `v' = e_{k2}`:
///
/// 1. `**η = (−1)^{p(n−p)} η`
/// 2. `*(θ∧η) = (−1)^p l(v) *η`
/// 3. `θ ∧ *η = (−1)^{p−1} *(l(v)η)`
/// 4. `*(θ ∧ *η) = (−1)^{(p−1)(n−p)} l(v)η`
/// 5. `l(v)ε(θ')η + ε(θ')l(v)η = 0` for `v ⊥ v'`
/// 6. `l(v)ε(θ)η + ε(θ)l(v)η = η`
///
/// Identity 5 is zero by construction when `k == k2`.
pub fn contraction_identity_residuals(eta: &Form, k: usize, k2: usize) -> [f64; 6] {
    let n = eta.dim();
    let p = eta.grade();
    let star = eta.hodge();
    let r1 = star.hodge().max_abs_diff(&eta.scale(sign_pow(p * (n - p))));
    let r2 = eta.epsilon(k).hodge().max_abs_diff(&star.interior(k).scale(sign_pow(p)));
    let (r3, r4) = if p >= 1 {
        let lv = eta.interior(k);
        (
            star.epsilon(k).max_abs_diff(&lv.hodge().scale(sign_pow(p - 1))),
            star.epsilon(k).hodge().max_abs_diff(&lv.scale(sign_pow((p - 1) * (n - p)))),
        )
    } else {
        (star.epsilon(k).max_abs(), star.epsilon(k).hodge().max_abs())
    };
    let anticommutator = |a: Form, b: Form| if a.grade() == b.grade() { a.add(&b).unwrap_or(a) } else { a };
    let r5 = if k != k2 {
        anticommutator(eta.epsilon(k2).interior(k), eta.interior(k).epsilon(k2)).max_abs()
    } else {
        0.0
    };
    let r6 = anticommutator(eta.epsilon(k).interior(k), eta.interior(k).epsilon(k)).max_abs_diff(eta);
    [r1, r2, r3, r4, r5, r6]
}

/// Residuals of the pointwise duality chain for one jet `a` and constant form `ω`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DualityResiduals {
    /// `|*d*(α∧ω) − (−1)^{n−1} d*(α∧*ω)|`, both sides expanded directly.
    pub star_relation: f64,
    /// `|d*(α∧*ω) − (−1)^{(p−1)(n−p)} Σ a_{ji} ε(θ^i) l(e_j)ω|`.
    pub contracted_dual: f64,
    /// `|*d*(α∧ω) − (−1)^{p(n−p−1)+1} Σ a_{ij} ε(θ^i) l(e_j)ω|`.
    pub contracted_primal: f64,
}

impl DualityResiduals {
    pub fn max(&self) -> f64 {
        self.star_relation
            .max(self.contracted_dual)
            .max(self.contracted_primal)
    }
}

/// `Σ_{i,j} a_{ji} ε(θ^i) * ε(θ^j) η`: the symbol of `d*(α∧η)` at a point where the
/// frame is parallel and `∇_{e_i}α = Σ_j a_{ji} θ^j`.
fn d_star_alpha_wedge(a: &HessianSurrogate, eta: &Form) -> Form {
    let n = a.n();
    let mut out = Form::zero(n, n - eta.grade().min(n));
    if eta.grade() >= n {
        return out;
    }
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| a.get(j, i)).collect();
        let inner = eta.epsilon_vec(&row).hodge();
        for (m, c) in inner.epsilon(i).terms() {
            out.add_term(m, c);
        }
    }
    out
}

/// Evaluates every link of the duality chain at symbol level.
pub fn duality_residuals(a: &HessianSurrogate, omega: &Form) -> Result<DualityResiduals, ExteriorError> {
    if a.n() != omega.dim() {
        return Err(ExteriorError::DimensionMismatch(a.n(), omega.dim()));
    }
    let n = omega.dim();
    let p = omega.grade();

    let primal = d_star_alpha_wedge(a, omega).hodge();
    let dual = d_star_alpha_wedge(a, &omega.hodge());

    let t = apply_hessian_operator(a, omega)?;
    let transposed = {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = a.get(j, i);
            }
        }
        HessianSurrogate {
            n,
            data,
            trace_free: a.trace_free,
        }
    };
    let t_transposed = apply_hessian_operator(&transposed, omega)?;

    let dual_closed = t_transposed.scale(sign_pow((p.max(1) - 1) * (n - p)));
    let dual_closed = if p == 0 { Form::zero(n, 0) } else { dual_closed };
    let primal_closed = t.scale(sign_pow(p * (n - p).saturating_sub(1) + 1));
    let related = dual.scale(sign_pow(n - 1));

    Ok(DualityResiduals {
        star_relation: primal.max_abs_diff(&related),
        contracted_dual: if p == 0 { dual.max_abs() } else { dual.max_abs_diff(&dual_closed) },
        contracted_primal: primal.max_abs_diff(&primal_closed),
    })
}

/// Aggregate over random trace-free symmetric jets and random sparse forms.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub n: usize,
    pub p: usize,
    pub trials: usize,
    pub max_residual: f64,
    pub worst: DualityResiduals,
}

pub fn verify_duality_identity<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    trials: usize,
    terms: usize,
    rng: &mut R,
) -> Result<DualityReport, ExteriorError> {
    if !(1..=MAX_DIM).contains(&n) || p > n {
        return Err(ExteriorError::BadDimension(n));
    }
    let mut worst = DualityResiduals::default();
    let mut max_residual: f64 = 0.0;
    for _ in 0..trials {
        let a = HessianSurrogate::random_trace_free(n, rng);
        let omega = Form::random_sparse(n, p, terms, rng);
        let r = duality_residuals(&a, &omega)?;
        if r.max() > max_residual {
            max_residual = r.max();
            worst = r;
        }
    }
    Ok(DualityReport {
        n,
        p,
        trials,
        max_residual,
        worst,
    })
}
