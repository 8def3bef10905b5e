//! Curvature of the Cayley hyperbolic plane, rebuilt from its sectional curvature.
//!
//! The sectional formula on orthonormal pairs of `O²` is extended to the biquadratic
//! form `B(x, y) = K(x∧y)·|x∧y|²` and polarized into a full algebraic curvature
//! tensor. Components follow `R(x, y, z, w) = ⟨R(x∧y), z∧w⟩`, so `R(x, y, x, y) = B(x, y)`
//! and `R_{1i1i}` is the sectional curvature of the `e_1, e_i` plane.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numeric::symmetric_eigen;
use crate::octonion::{MultiplicationTable, OctPair};

/// Real dimension of the tangent space `O²`.
pub const N: usize = 16;
/// Dimension of `Λ²R¹⁶`.
pub const PAIRS: usize = N * (N - 1) / 2;

pub type Vec16 = [f64; N];

#[derive(Debug, Error, PartialEq)]
pub enum CurvatureError {
    #[error("degenerate plane: Gram determinant {det:e} below {threshold:e}")]
    DegeneratePlane { det: f64, threshold: f64 },
    #[error("vector is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("symmetric eigensolver returned non-finite values")]
    SolverFailure,
}

#[inline]
pub fn dot(a: &Vec16, b: &Vec16) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(a: &Vec16, s: f64, b: &Vec16) -> Vec16 {
    let mut out = *a;
    for (o, v) in out.iter_mut().zip(b) {
        *o += s * v;
    }
    out
}

fn normalize(v: &Vec16) -> Vec16 {
    let n = dot(v, v).sqrt();
    v.map(|x| x / n)
}

pub fn basis(k: usize) -> Vec16 {
    let mut v = [0.0; N];
    v[k] = 1.0;
    v
}

/// Uniform on the unit sphere: a normalized standard Gaussian vector.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R) -> Vec16 {
    loop {
        let v: Vec16 = std::array::from_fn(|_| rng.sample(StandardNormal));
        if dot(&v, &v) > 1e-12 {
            return normalize(&v);
        }
    }
}

/// Orthonormal pair spanning a random plane.
pub fn random_orthonormal_pair<R: Rng + ?Sized>(rng: &mut R) -> (Vec16, Vec16) {
    let x = random_unit(rng);
    loop {
        let y = random_unit(rng);
        let y = axpy(&y, -dot(&x, &y), &x);
        if dot(&y, &y) > 1e-6 {
            return (x, normalize(&y));
        }
    }
}

/// Index of the basis bivector `e_a ∧ e_b`, `a < b`, in lexicographic order.
#[inline]
pub fn pair_index(a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < N);
    a * N - a * (a + 1) / 2 + (b - a - 1)
}

/// Coefficients of `x ∧ y` on the ascending basis bivectors.
pub fn bivector(x: &Vec16, y: &Vec16) -> Vec<f64> {
    let mut w = Vec::with_capacity(PAIRS);
    for a in 0..N {
        for b in (a + 1)..N {
            w.push(x[a] * y[b] - x[b] * y[a]);
        }
    }
    w
}

/// Order of the octonion products in the two mixed terms of the sectional formula.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum ProductReading {
    /// `½⟨ab, cd⟩ − ⟨ad, cb⟩`
    #[default]
    Forward,
    /// `½⟨ba, dc⟩ − ⟨da, bc⟩`
    Reversed,
}

/// The sectional curvature of `O²` evaluated on orthonormal pairs, scaled by `alpha`.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionalFormula {
    pub alpha: f64,
    pub reading: ProductReading,
    table: MultiplicationTable,
}

impl Default for SectionalFormula {
    fn default() -> Self {
        Self {
            alpha: -4.0,
            reading: ProductReading::Forward,
            table: MultiplicationTable::canonical().clone(),
        }
    }
}

impl SectionalFormula {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }

    pub fn with_reading(mut self, reading: ProductReading) -> Self {
        self.reading = reading;
        self
    }

    pub fn with_table(mut self, table: MultiplicationTable) -> Self {
        self.table = table;
        self
    }

    pub fn table(&self) -> &MultiplicationTable {
        &self.table
    }

    /// `α{|a∧c|² + |b∧d|² + ¼|a|²|d|² + ¼|b|²|c|² + ½⟨ab, cd⟩ − ⟨ad, cb⟩}` for the
    /// plane `(a, b) ∧ (c, d)`. Only meaningful on orthonormal pairs.
    pub fn orthonormal_value(&self, p: &OctPair, q: &OctPair) -> f64 {
        let (a, b, c, d) = (&p.x, &p.y, &q.x, &q.y);
        let wedge_sq = |u: &crate::Octonion, v: &crate::Octonion| {
            u.norm_sqr() * v.norm_sqr() - u.inner(v).powi(2)
        };
        let t = &self.table;
        let (ab, cd, ad, cb) = match self.reading {
            ProductReading::Forward => (t.mul(a, b), t.mul(c, d), t.mul(a, d), t.mul(c, b)),
            ProductReading::Reversed => (t.mul(b, a), t.mul(d, c), t.mul(d, a), t.mul(b, c)),
        };
        self.alpha
            * (wedge_sq(a, c)
                + wedge_sq(b, d)
                + 0.25 * a.norm_sqr() * d.norm_sqr()
                + 0.25 * b.norm_sqr() * c.norm_sqr()
                + 0.5 * ab.inner(&cd)
                - ad.inner(&cb))
    }

    /// `B(x, y) = K(span{x, y})·(|x|²|y|² − ⟨x, y⟩²)`, zero on (near-)degenerate pairs.
    pub fn biquadratic(&self, x: &Vec16, y: &Vec16) -> f64 {
        let xx = dot(x, x);
        let yy = dot(y, y);
        let xy = dot(x, y);
        let gram = xx * yy - xy * xy;
        if gram <= 1e-14 * xx * yy || xx == 0.0 || yy == 0.0 {
            return 0.0;
        }
        let e1 = x.map(|v| v / xx.sqrt());
        let e2 = normalize(&axpy(y, -xy / xx, x));
        let k = self.orthonormal_value(&OctPair::from_array(&e1), &OctPair::from_array(&e2));
        k * gram
    }
}

/// A 2-plane given by a spanning pair, with its Gram matrix cached.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoPlane {
    pub x: Vec16,
    pub y: Vec16,
    gram: [f64; 3],
}

impl TwoPlane {
    pub fn new(x: Vec16, y: Vec16) -> Self {
        let gram = [dot(&x, &x), dot(&x, &y), dot(&y, &y)];
        Self { x, y, gram }
    }

    pub fn from_pairs(x: &OctPair, y: &OctPair) -> Self {
        Self::new(x.to_array(), y.to_array())
    }

    pub fn gram_determinant(&self) -> f64 {
        self.gram[0] * self.gram[2] - self.gram[1] * self.gram[1]
    }

    pub fn degeneracy_threshold(&self) -> f64 {
        1e-10 * self.gram[0] * self.gram[2]
    }

    pub fn is_degenerate(&self) -> bool {
        self.gram_determinant() <= self.degeneracy_threshold()
    }

    /// Gram–Schmidt on the spanning pair.
    pub fn orthonormal(&self) -> Result<(Vec16, Vec16), CurvatureError> {
        if self.is_degenerate() {
            return Err(CurvatureError::DegeneratePlane {
                det: self.gram_determinant(),
                threshold: self.degeneracy_threshold(),
            });
        }
        let e1 = normalize(&self.x);
        let e2 = normalize(&axpy(&self.y, -dot(&self.y, &e1), &e1));
        Ok((e1, e2))
    }
}

/// Sectional curvature straight from the formula, independent of the spanning pair.
pub fn sectional(formula: &SectionalFormula, plane: &TwoPlane) -> Result<f64, CurvatureError> {
    let (e1, e2) = plane.orthonormal()?;
    Ok(formula.orthonormal_value(&OctPair::from_array(&e1), &OctPair::from_array(&e2)))
}

/// `(1/4)[B(x+z, y+w) − B(x+z, y−w) − B(x−z, y+w) + B(x−z, y−w)]`, the exact mixed
/// second derivative of `B(x+sz, y+tw)` at `s = t = 0`.
fn mixed_stencil(f: &SectionalFormula, x: &Vec16, y: &Vec16, z: &Vec16, w: &Vec16) -> f64 {
    let xp = axpy(x, 1.0, z);
    let xm = axpy(x, -1.0, z);
    let yp = axpy(y, 1.0, w);
    let ym = axpy(y, -1.0, w);
    0.25 * (f.biquadratic(&xp, &yp) - f.biquadratic(&xp, &ym) - f.biquadratic(&xm, &yp)
        + f.biquadratic(&xm, &ym))
}

/// `R(x, y, z, w)` recovered from the biquadratic form by polarization.
pub fn polarize(f: &SectionalFormula, x: &Vec16, y: &Vec16, z: &Vec16, w: &Vec16) -> f64 {
    (mixed_stencil(f, x, y, z, w) - mixed_stencil(f, x, y, w, z)) / 6.0
}

/// The curvature operator on `Λ²R¹⁶` in the ascending bivector basis.
#[derive(Clone, Debug)]
pub struct CurvatureOperator {
    pub alpha: f64,
    matrix: DMatrix<f64>,
    tensor: Vec<f64>,
    raw_asymmetry: f64,
}

/// Polarizes `f` on every pair of basis bivectors.
pub fn assemble(f: &SectionalFormula) -> CurvatureOperator {
    let mut pairs = Vec::with_capacity(PAIRS);
    for a in 0..N {
        for b in (a + 1)..N {
            pairs.push((a, b));
        }
    }
    let e: Vec<Vec16> = (0..N).map(basis).collect();
    let rows: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            pairs
                .iter()
                .map(|&(c, d)| polarize(f, &e[a], &e[b], &e[c], &e[d]))
                .collect()
        })
        .collect();
    let raw = DMatrix::from_fn(PAIRS, PAIRS, |i, j| rows[i][j]);
    let raw_asymmetry = (&raw - raw.transpose()).amax();
    let matrix = (&raw + raw.transpose()) * 0.5;
    CurvatureOperator::from_matrix(f.alpha, matrix, raw_asymmetry)
}

impl CurvatureOperator {
    fn from_matrix(alpha: f64, matrix: DMatrix<f64>, raw_asymmetry: f64) -> Self {
        let mut tensor = vec![0.0; N * N * N * N];
        for a in 0..N {
            for b in 0..N {
                for c in 0..N {
                    for d in 0..N {
                        if a == b || c == d {
                            continue;
                        }
                        let (p, s1) = if a < b { (pair_index(a, b), 1.0) } else { (pair_index(b, a), -1.0) };
                        let (q, s2) = if c < d { (pair_index(c, d), 1.0) } else { (pair_index(d, c), -1.0) };
                        tensor[((a * N + b) * N + c) * N + d] = s1 * s2 * matrix[(p, q)];
                    }
                }
            }
        }
        Self {
            alpha,
            matrix,
            tensor,
            raw_asymmetry,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Largest `|M_pq − M_qp|` of the polarized entries before symmetrization.
    pub fn raw_asymmetry(&self) -> f64 {
        self.raw_asymmetry
    }

    /// `R_{abcd}` with the antisymmetries of each index pair.
    #[inline]
    pub fn component(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        self.tensor[((a * N + b) * N + c) * N + d]
    }

    pub fn apply(&self, bivec: &[f64]) -> Vec<f64> {
        let v = nalgebra::DVector::from_column_slice(bivec);
        (&self.matrix * v).iter().copied().collect()
    }

    pub fn evaluate(&self, x: &Vec16, y: &Vec16, z: &Vec16, w: &Vec16) -> f64 {
        let xy = bivector(x, y);
        let zw = bivector(z, w);
        let mzw = self.apply(&zw);
        xy.iter().zip(&mzw).map(|(a, b)| a * b).sum()
    }

    /// `⟨R(x∧y), x∧y⟩ / |x∧y|²`.
    pub fn sectional(&self, x: &Vec16, y: &Vec16) -> Result<f64, CurvatureError> {
        let plane = TwoPlane::new(*x, *y);
        if plane.is_degenerate() {
            return Err(CurvatureError::DegeneratePlane {
                det: plane.gram_determinant(),
                threshold: plane.degeneracy_threshold(),
            });
        }
        Ok(self.evaluate(x, y, x, y) / plane.gram_determinant())
    }

    /// `Ric(e_b, e_c) = Σ_a R(e_b, e_a, e_c, e_a)`.
    pub fn ricci(&self) -> DMatrix<f64> {
        DMatrix::from_fn(N, N, |b, c| (0..N).map(|a| self.component(b, a, c, a)).sum())
    }

    pub fn scalar_curvature(&self) -> f64 {
        self.ricci().trace()
    }

    /// Matrix of `X ↦ R(X, u)u`, i.e. entries `R(e_b, u, e_c, u)`.
    pub fn jacobi_operator(&self, u: &Vec16) -> DMatrix<f64> {
        DMatrix::from_fn(N, N, |b, c| {
            let mut s = 0.0;
            for d in 0..N {
                if u[d] == 0.0 {
                    continue;
                }
                for e in 0..N {
                    s += self.component(b, d, c, e) * u[d] * u[e];
                }
            }
            s
        })
    }

    /// Ascending eigenvalues of the Jacobi operator along the unit vector `u`.
    pub fn radial_spectrum(&self, u: &Vec16) -> Result<Vec<f64>, CurvatureError> {
        let n = dot(u, u).sqrt();
        if (n - 1.0).abs() > 1e-10 {
            return Err(CurvatureError::NotUnit(n));
        }
        let j = self.jacobi_operator(u);
        let eig = symmetric_eigen(&j).ok_or(CurvatureError::SolverFailure)?;
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Cyclic sum `R(x,y,z,w) + R(y,z,x,w) + R(z,x,y,w)`.
    pub fn bianchi_residual(&self, x: &Vec16, y: &Vec16, z: &Vec16, w: &Vec16) -> f64 {
        self.evaluate(x, y, z, w) + self.evaluate(y, z, x, w) + self.evaluate(z, x, y, w)
    }

    /// 120×120 operator as CSV with a header row of bivector labels (1-based).
    pub fn to_csv(&self) -> String {
        let mut labels = Vec::with_capacity(PAIRS);
        for a in 0..N {
            for b in (a + 1)..N {
                labels.push(format!("e{}^e{}", a + 1, b + 1));
            }
        }
        let mut s = String::new();
        s.push_str("row,");
        s.push_str(&labels.join(","));
        s.push('\n');
        for (i, label) in labels.iter().enumerate() {
            s.push_str(label);
            for j in 0..PAIRS {
                s.push_str(&format!(",{:.17e}", self.matrix[(i, j)]));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PinchConfig {
    pub starts: usize,
    pub max_steps: usize,
    pub initial_step: f64,
    /// Stop once the projected gradient norm drops below this.
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for PinchConfig {
    fn default() -> Self {
        Self {
            starts: 64,
            max_steps: 10_000,
            initial_step: 1e-2,
            grad_tol: 1e-10,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneOptimum {
    pub value: f64,
    pub x: Vec16,
    pub y: Vec16,
    pub steps: usize,
    pub grad_norm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PinchResult {
    pub min: PlaneOptimum,
    pub max: PlaneOptimum,
    /// Final value of every descent run, in start order.
    pub min_runs: Vec<f64>,
    pub max_runs: Vec<f64>,
    /// Largest gap between the operator and the direct formula at the two optimal planes.
    pub formula_agreement: f64,
}

/// Value and projected gradient of `K = xᵀWy` on the Grassmannian, `x, y` orthonormal.
fn value_and_gradient(op: &CurvatureOperator, x: &Vec16, y: &Vec16) -> (f64, Vec16, Vec16) {
    let mw = op.apply(&bivector(x, y));
    let mut w = [[0.0; N]; N];
    for a in 0..N {
        for b in (a + 1)..N {
            let v = mw[pair_index(a, b)];
            w[a][b] = v;
            w[b][a] = -v;
        }
    }
    let mut wy = [0.0; N];
    let mut wx = [0.0; N];
    for a in 0..N {
        for b in 0..N {
            wy[a] += w[a][b] * y[b];
            wx[a] += w[a][b] * x[b];
        }
    }
    let value = dot(x, &wy);
    let project = |g: Vec16| {
        let g = axpy(&g, -dot(&g, x), x);
        axpy(&g, -dot(&g, y), y)
    };
    let gx = project(wy.map(|v| 2.0 * v));
    let gy = project(wx.map(|v| -2.0 * v));
    (value, gx, gy)
}

fn orthonormalize(x: &Vec16, y: &Vec16) -> (Vec16, Vec16) {
    let e1 = normalize(x);
    let e2 = normalize(&axpy(y, -dot(y, &e1), &e1));
    (e1, e2)
}

/// Projected gradient descent (or ascent) of the sectional curvature from `(x0, y0)`.
///
/// Fixed step, halved whenever a step fails to improve; the pair is re-orthonormalized
/// after every step.
pub fn optimize_plane(
    op: &CurvatureOperator,
    x0: &Vec16,
    y0: &Vec16,
    which: Extremum,
    cfg: &PinchConfig,
) -> PlaneOptimum {
    let dir = match which {
        Extremum::Min => -1.0,
        Extremum::Max => 1.0,
    };
    let (mut x, mut y) = orthonormalize(x0, y0);
    let (mut value, mut gx, mut gy) = value_and_gradient(op, &x, &y);
    let mut step = cfg.initial_step;
    let mut steps = 0;
    let grad_norm = |gx: &Vec16, gy: &Vec16| (dot(gx, gx) + dot(gy, gy)).sqrt();
    while steps < cfg.max_steps && grad_norm(&gx, &gy) > cfg.grad_tol && step > 1e-16 {
        steps += 1;
        let (nx, ny) = orthonormalize(&axpy(&x, dir * step, &gx), &axpy(&y, dir * step, &gy));
        let (nv, ngx, ngy) = value_and_gradient(op, &nx, &ny);
        if dir * (nv - value) > 0.0 {
            x = nx;
            y = ny;
            value = nv;
            gx = ngx;
            gy = ngy;
        } else {
            step *= 0.5;
        }
    }
    PlaneOptimum {
        value,
        x,
        y,
        steps,
        grad_norm: grad_norm(&gx, &gy),
    }
}

/// Extremes of the sectional curvature over random starts on `G(2, 16)`.
pub fn pinch_extremes(op: &CurvatureOperator, formula: &SectionalFormula, cfg: &PinchConfig) -> PinchResult {
    let runs: Vec<(PlaneOptimum, PlaneOptimum)> = (0..cfg.starts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64));
            let (x, y) = random_orthonormal_pair(&mut rng);
            (
                optimize_plane(op, &x, &y, Extremum::Min, cfg),
                optimize_plane(op, &x, &y, Extremum::Max, cfg),
            )
        })
        .collect();
    let min_runs: Vec<f64> = runs.iter().map(|r| r.0.value).collect();
    let max_runs: Vec<f64> = runs.iter().map(|r| r.1.value).collect();
    let min = runs
        .iter()
        .map(|r| &r.0)
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .expect("at least one start");
    let max = runs
        .iter()
        .map(|r| &r.1)
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .expect("at least one start");
    let check = |o: &PlaneOptimum| {
        sectional(formula, &TwoPlane::new(o.x, o.y))
            .map(|k| (k - o.value).abs())
            .unwrap_or(f64::INFINITY)
    };
    let formula_agreement = check(&min).max(check(&max));
    PinchResult {
        min,
        max,
        min_runs,
        max_runs,
        formula_agreement,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::octonion::Octonion;
    use std::sync::OnceLock;

    fn op() -> &'static CurvatureOperator {
        static OP: OnceLock<CurvatureOperator> = OnceLock::new();
        OP.get_or_init(|| assemble(&SectionalFormula::default()))
    }

    #[test]
    fn pair_index_is_dense() {
        let mut seen = vec![false; PAIRS];
        for a in 0..N {
            for b in (a + 1)..N {
                seen[pair_index(a, b)] = true;
            }
        }
        assert!(seen.into_iter().all(|s| s));
        assert_eq!(pair_index(N - 2, N - 1), PAIRS - 1);
    }

    #[test]
    fn adapted_planes() {
        let f = SectionalFormula::default();
        let (a, b) = (Octonion::e(2), Octonion::ONE);
        let p = TwoPlane::from_pairs(&OctPair::new(a, Octonion::ZERO), &OctPair::new(b, Octonion::ZERO));
        assert!((sectional(&f, &p).unwrap() + 4.0).abs() < 1e-12);
        let q = TwoPlane::from_pairs(&OctPair::new(a, Octonion::ZERO), &OctPair::new(Octonion::ZERO, b));
        assert!((sectional(&f, &q).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let f = SectionalFormula::default();
        let x = basis(3);
        let p = TwoPlane::new(x, x.map(|v| 2.0 * v));
        assert!(matches!(sectional(&f, &p), Err(CurvatureError::DegeneratePlane { .. })));
        assert!(op().sectional(&x, &x).is_err());
    }

    #[test]
    fn sectional_independent_of_spanning_pair() {
        let f = SectionalFormula::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let (x, y) = random_orthonormal_pair(&mut rng);
            let k = sectional(&f, &TwoPlane::new(x, y)).unwrap();
            let x2 = axpy(&x.map(|v| 3.0 * v), 0.7, &y);
            let y2 = axpy(&y.map(|v| -0.4 * v), 1.3, &x);
            let k2 = sectional(&f, &TwoPlane::new(x2, y2)).unwrap();
            assert!((k - k2).abs() < 1e-12, "{k} vs {k2}");
        }
    }

    #[test]
    fn adapted_frame_diagonal() {
        let r = op();
        for i in 1..8 {
            assert!((r.component(0, i, 0, i) + 4.0).abs() < 1e-9);
        }
        for a in 8..16 {
            assert!((r.component(0, a, 0, a) + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn operator_matches_biquadratic() {
        let f = SectionalFormula::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let x = random_unit(&mut rng).map(|v| 1.7 * v);
            let y = random_unit(&mut rng);
            let lhs = op().evaluate(&x, &y, &x, &y);
            assert!((lhs - f.biquadratic(&x, &y)).abs() < 1e-9);
        }
    }

    #[test]
    fn ricci_is_einstein() {
        let ric = op().ricci();
        let target = DMatrix::<f64>::identity(N, N) * -36.0;
        assert!((ric - target).amax() < 1e-9);
        assert!((op().scalar_curvature() + 576.0).abs() < 1e-8);
    }

    #[test]
    fn jacobi_spectrum_on_axes() {
        let mut expected = vec![-4.0; 7];
        expected.extend(vec![-1.0; 8]);
        expected.push(0.0);
        expected.sort_by(f64::total_cmp);
        for u in [basis(0), basis(8)] {
            let ev = op().radial_spectrum(&u).unwrap();
            for (a, b) in ev.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-8);
            }
        }
        assert!(matches!(op().radial_spectrum(&basis(0).map(|v| 2.0 * v)), Err(CurvatureError::NotUnit(_))));
    }

    #[test]
    fn extremal_plane_is_stationary() {
        let x = basis(1);
        let y = basis(2);
        let cfg = PinchConfig::default();
        let o = optimize_plane(op(), &x, &y, Extremum::Min, &cfg);
        assert!((o.value + 4.0).abs() < 1e-12);
        assert_eq!(o.steps, 0);
    }

    #[test]
    fn csv_shape() {
        let csv = op().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), PAIRS + 1);
        assert_eq!(lines[1].split(',').count(), PAIRS + 1);
    }
}
