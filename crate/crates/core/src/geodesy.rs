//! Radial geometry of `OH²` about a point: Jacobi fields, the distance Laplacian,
//! area and volume growth, and the bottom of the spectrum.
//!
//! Along a unit-speed geodesic the Jacobi operator has eigenvalues `-c²` with
//! `c = 2` (multiplicity 7) and `c = 1` (multiplicity 8), so geodesic spheres have
//! area density `A(r) = sinh(2r)^7 sinh(r)^8`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::numeric::{adaptive_simpson, richardson, tridiagonal_eigenvalue};

#[derive(Debug, Error, PartialEq)]
pub enum GeodesyError {
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("geodesic length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("parameter t = {t} outside [0, {len}]")]
    OutOfRange { t: f64, len: f64 },
    #[error("curvature rate must be positive, got {0}")]
    BadRate(f64),
    #[error("spectrum estimate needs R >= 1 and N >= 100, got R = {radius}, N = {grid}")]
    SpectrumDomain { radius: f64, grid: usize },
    #[error("grid N = {grid} too coarse: error estimate {estimate:e} exceeds tolerance {tolerance:e}")]
    UnderResolved {
        grid: usize,
        estimate: f64,
        tolerance: f64,
    },
}

/// Radial rates `c` with their multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialModel {
    pub rates: Vec<(f64, usize)>,
}

impl Default for RadialModel {
    fn default() -> Self {
        Self {
            rates: vec![(2.0, 7), (1.0, 8)],
        }
    }
}

impl RadialModel {
    pub fn dimension(&self) -> usize {
        1 + self.rates.iter().map(|&(_, m)| m).sum::<usize>()
    }

    /// `Σ_A c_A coth(c_A r)` as a sum of Hessian eigenvalues of the distance function.
    pub fn hessian_trace(&self, r: f64) -> Result<f64, GeodesyError> {
        let mut s = 0.0;
        for &(c, m) in &self.rates {
            s += m as f64 * hessian_eigen(c, r)?;
        }
        Ok(s)
    }

    /// Volume-growth exponent `lim Δr = Σ m c`.
    pub fn growth_exponent(&self) -> f64 {
        self.rates.iter().map(|&(c, m)| c * m as f64).sum()
    }
}

/// `1 / tanh(x)` without cancellation for small `x`.
fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// `Δr = 14 coth 2r + 8 coth r`.
pub fn laplacian_distance(r: f64) -> Result<f64, GeodesyError> {
    if !(r > 0.0) {
        return Err(GeodesyError::NonPositiveRadius(r));
    }
    Ok(14.0 * coth(2.0 * r) + 8.0 * coth(r))
}

/// The Jacobi field `sinh(ct) / sinh(cL)` vanishing at 0 and equal to 1 at `L`.
pub fn jacobi_profile(c: f64, len: f64, t: f64) -> Result<f64, GeodesyError> {
    check_jacobi(c, len)?;
    if !(0.0..=len).contains(&t) {
        return Err(GeodesyError::OutOfRange { t, len });
    }
    Ok((c * t).sinh() / (c * len).sinh())
}

/// Index form of the Jacobi profile, `c coth(cL)`.
pub fn hessian_eigen(c: f64, len: f64) -> Result<f64, GeodesyError> {
    check_jacobi(c, len)?;
    Ok(c * coth(c * len))
}

fn check_jacobi(c: f64, len: f64) -> Result<(), GeodesyError> {
    if !(c > 0.0) {
        return Err(GeodesyError::BadRate(c));
    }
    if !(len > 0.0) {
        return Err(GeodesyError::NonPositiveLength(len));
    }
    Ok(())
}

/// `∫₀ᴸ (f′² + c² f²) dt` of the Jacobi profile by adaptive quadrature.
pub fn index_form_quadrature(c: f64, len: f64) -> Result<f64, GeodesyError> {
    check_jacobi(c, len)?;
    let s = (c * len).sinh();
    let integrand = |t: f64| {
        let f = (c * t).sinh() / s;
        let df = c * (c * t).cosh() / s;
        df * df + c * c * f * f
    };
    Ok(adaptive_simpson(&integrand, 0.0, len, 1e-12))
}

/// Solves `f″ = c² f`, `f(0) = 0`, `f(L) = 1` by RK4 shooting on `steps` intervals.
/// Returns the grid values.
pub fn jacobi_shooting(c: f64, len: f64, steps: usize) -> Result<Vec<f64>, GeodesyError> {
    check_jacobi(c, len)?;
    let h = len / steps as f64;
    let rhs = |(f, df): (f64, f64)| (df, c * c * f);
    let mut state = (0.0, 1.0);
    let mut values = Vec::with_capacity(steps + 1);
    values.push(0.0);
    for _ in 0..steps {
        let k1 = rhs(state);
        let k2 = rhs((state.0 + 0.5 * h * k1.0, state.1 + 0.5 * h * k1.1));
        let k3 = rhs((state.0 + 0.5 * h * k2.0, state.1 + 0.5 * h * k2.1));
        let k4 = rhs((state.0 + h * k3.0, state.1 + h * k3.1));
        state.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        state.1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        values.push(state.0);
    }
    let end = *values.last().expect("nonempty");
    Ok(values.into_iter().map(|v| v / end).collect())
}

/// `ln sinh x` for `x > 0`, switching to `x − ln 2 + ln(1 − e^{−2x})` past 20.
pub fn ln_sinh(x: f64) -> f64 {
    if x > 20.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

/// `ln A(r) = 7 ln sinh 2r + 8 ln sinh r`.
pub fn log_area(r: f64) -> f64 {
    7.0 * ln_sinh(2.0 * r) + 8.0 * ln_sinh(r)
}

/// `A(r) = sinh(2r)^7 sinh(r)^8`.
pub fn area(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        log_area(r).exp()
    }
}

/// `V(r) = ∫₀ʳ A`. The tolerance is absolute `1e-10` until `A` itself becomes large,
/// then relative to `A(r)`.
pub fn volume(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let tol = 1e-10f64.max(1e-13 * area(r));
    adaptive_simpson(&area, 0.0, r, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AreaVolume {
    pub area: f64,
    pub volume: f64,
    pub log_area: f64,
}

pub fn area_volume(r: f64) -> Result<AreaVolume, GeodesyError> {
    if !(r >= 0.0) {
        return Err(GeodesyError::NonPositiveRadius(r));
    }
    Ok(AreaVolume {
        area: area(r),
        volume: volume(r),
        log_area: if r > 0.0 { log_area(r) } else { f64::NEG_INFINITY },
    })
}

/// `d(ln A)/dr` from central differences of `ln A`, Richardson-extrapolated twice.
/// Deliberately independent of the closed-form derivative.
pub fn log_area_slope(r: f64) -> Result<f64, GeodesyError> {
    if !(r > 0.0) {
        return Err(GeodesyError::NonPositiveRadius(r));
    }
    let h0 = (0.05 * r).min(0.02);
    let central = |h: f64| (log_area(r + h) - log_area(r - h)) / (2.0 * h);
    let d = [central(h0), central(h0 / 2.0), central(h0 / 4.0)];
    let r1 = [richardson(d[0], d[1], 2.0, 2), richardson(d[1], d[2], 2.0, 2)];
    Ok(richardson(r1[0], r1[1], 2.0, 4))
}

/// Dirichlet problem for `u ↦ −(A u′)′ / A` on `(0, R)`, discretized on the cell-centred
/// grid `r_i = (i − ½)h`, `h = R / (N + ½)`, so the pole carries no flux and `u(R) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SturmLiouvilleProblem {
    pub radius: f64,
    pub grid: usize,
}

impl SturmLiouvilleProblem {
    pub fn new(radius: f64, grid: usize) -> Result<Self, GeodesyError> {
        if !(radius >= 1.0) || grid < 100 {
            return Err(GeodesyError::SpectrumDomain { radius, grid });
        }
        Ok(Self { radius, grid })
    }

    pub fn step(&self) -> f64 {
        self.radius / (self.grid as f64 + 0.5)
    }

    /// Symmetric tridiagonal matrix `W^{-1/2} K W^{-1/2}` in the `A`-weighted inner product,
    /// assembled from log-weights.
    pub fn matrix(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.grid;
        let h = self.step();
        let h2 = h * h;
        let node = |i: usize| log_area((i as f64 + 0.5) * h);
        let face = |i: usize| log_area((i as f64 + 1.0) * h);
        let ln_nodes: Vec<f64> = (0..n).map(node).collect();
        let mut d = Vec::with_capacity(n);
        let mut e = Vec::with_capacity(n - 1);
        for i in 0..n {
            let right = (face(i) - ln_nodes[i]).exp();
            let left = if i == 0 { 0.0 } else { (face(i - 1) - ln_nodes[i]).exp() };
            d.push((left + right) / h2);
            if i + 1 < n {
                e.push(-(face(i) - 0.5 * (ln_nodes[i] + ln_nodes[i + 1])).exp() / h2);
            }
        }
        (d, e)
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        let (d, e) = self.matrix();
        tridiagonal_eigenvalue(&d, &e, 0, 1e-10)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub grid: usize,
    pub step: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumEstimate {
    pub radius: f64,
    pub grid: usize,
    /// Eigenvalue on the requested grid.
    pub lambda: f64,
    /// Second-order Richardson extrapolation from grids `N/2` and `N`.
    pub extrapolated: f64,
    /// `|extrapolated − lambda|`.
    pub error_estimate: f64,
    /// Convergence order observed over `N/4, N/2, N`.
    pub observed_order: f64,
    pub table: Vec<ConvergenceRow>,
}

/// Smallest Dirichlet eigenvalue on the geodesic ball of radius `R`, with a grid
/// convergence table and extrapolated limit.
pub fn spectrum_estimate(radius: f64, grid: usize) -> Result<SpectrumEstimate, GeodesyError> {
    SturmLiouvilleProblem::new(radius, grid)?;
    let grids = [grid / 4, grid / 2, grid];
    let table: Vec<ConvergenceRow> = grids
        .par_iter()
        .map(|&n| {
            let p = SturmLiouvilleProblem { radius, grid: n };
            ConvergenceRow {
                grid: n,
                step: p.step(),
                lambda: p.smallest_eigenvalue(),
            }
        })
        .collect();
    let rho = table[1].step / table[2].step;
    let extrapolated = richardson(table[1].lambda, table[2].lambda, rho, 2);
    let observed_order = ((table[0].lambda - table[1].lambda) / (table[1].lambda - table[2].lambda)).ln()
        / (table[0].step / table[1].step).ln();
    Ok(SpectrumEstimate {
        radius,
        grid,
        lambda: table[2].lambda,
        extrapolated,
        error_estimate: (extrapolated - table[2].lambda).abs(),
        observed_order,
        table,
    })
}

/// As [`spectrum_estimate`], but refuses grids whose error estimate exceeds `tolerance`.
pub fn spectrum_estimate_within(radius: f64, grid: usize, tolerance: f64) -> Result<SpectrumEstimate, GeodesyError> {
    let est = spectrum_estimate(radius, grid)?;
    if est.error_estimate > tolerance {
        return Err(GeodesyError::UnderResolved {
            grid,
            estimate: est.error_estimate,
            tolerance,
        });
    }
    Ok(est)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub radius: f64,
    pub grid: usize,
    pub lambda: f64,
    /// Richardson value against the next coarser grid of the same radius.
    pub extrapolated: Option<f64>,
}

/// Eigenvalues over every `(R, N)` pair. Rows are ordered by radius, then grid.
pub fn spectrum_sweep(radii: &[f64], grids: &[usize]) -> Result<Vec<SweepRow>, GeodesyError> {
    let mut grids = grids.to_vec();
    grids.sort_unstable();
    grids.dedup();
    let mut problems = Vec::new();
    for &r in radii {
        for &n in &grids {
            problems.push(SturmLiouvilleProblem::new(r, n)?);
        }
    }
    let lambdas: Vec<f64> = problems.par_iter().map(|p| p.smallest_eigenvalue()).collect();
    let mut rows = Vec::with_capacity(problems.len());
    for (i, (p, &lambda)) in problems.iter().zip(&lambdas).enumerate() {
        let extrapolated = if i % grids.len() == 0 {
            None
        } else {
            let prev = &problems[i - 1];
            Some(richardson(lambdas[i - 1], lambda, prev.step() / p.step(), 2))
        };
        rows.push(SweepRow {
            radius: p.radius,
            grid: p.grid,
            lambda,
            extrapolated,
        });
    }
    Ok(rows)
}

/// Warped product `dt² + Σ_A f_A(t)² ω_A²` with `f_A = e^{−c_A t}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarpedMetric {
    pub rates: Vec<(f64, usize)>,
}

impl Default for WarpedMetric {
    fn default() -> Self {
        Self {
            rates: vec![(2.0, 7), (1.0, 8)],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionCheck {
    pub rate: f64,
    pub multiplicity: usize,
    /// `−f″/f` from the closed form.
    pub analytic: f64,
    /// Central second difference at step `h`.
    pub finite_difference: f64,
    /// Richardson combination of steps `h` and `h/2`.
    pub richardson: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WarpedReport {
    pub t: f64,
    pub step: f64,
    pub radial_curvatures: Vec<DirectionCheck>,
    pub max_fd_residual: f64,
    /// `Σ f′/f` over all fiber directions (finite differences).
    pub mean_curvature: f64,
    /// `f′/f` per fiber direction, i.e. the level-set second fundamental form.
    pub shape_operator: Vec<f64>,
    pub hessian_squared: f64,
    pub cauchy_schwarz: f64,
    /// Largest deviation of an RK4 solution of `V″ = c²V`, `V′(0) = −cV(0)` from `e^{−ct}` on `[0, 1]`.
    pub jacobi_transport: f64,
}

impl WarpedMetric {
    pub fn warp(rate: f64, t: f64) -> f64 {
        (-rate * t).exp()
    }

    pub fn checks(&self, t: f64, h: f64) -> WarpedReport {
        let mut radial_curvatures = Vec::new();
        let mut shape_operator = Vec::new();
        let mut max_fd_residual: f64 = 0.0;
        let mut mean_curvature = 0.0;
        let mut block_sums = Vec::new();
        for &(c, m) in &self.rates {
            let f = |s: f64| Self::warp(c, s);
            let second = |h: f64| (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h);
            let fd = -second(h) / f(t);
            let fd_half = -second(h / 2.0) / f(t);
            let rich = richardson(fd, fd_half, 2.0, 2);
            let analytic = -c * c;
            max_fd_residual = max_fd_residual.max((fd - analytic).abs()).max((rich - analytic).abs());
            radial_curvatures.push(DirectionCheck {
                rate: c,
                multiplicity: m,
                analytic,
                finite_difference: fd,
                richardson: rich,
            });
            let first = (f(t + h) - f(t - h)) / (2.0 * h) / f(t);
            mean_curvature += m as f64 * first;
            shape_operator.extend(std::iter::repeat_n(first, m));
            block_sums.push((m, -c * m as f64));
        }
        let hessian_squared = self.rates.iter().map(|&(c, m)| m as f64 * c * c).sum();
        let cauchy_schwarz = block_sums.iter().map(|&(m, s)| s * s / m as f64).sum();
        let jacobi_transport = self
            .rates
            .iter()
            .map(|&(c, _)| transport_residual(c, 10_000))
            .fold(0.0, f64::max);
        WarpedReport {
            t,
            step: h,
            radial_curvatures,
            max_fd_residual,
            mean_curvature,
            shape_operator,
            hessian_squared,
            cauchy_schwarz,
            jacobi_transport,
        }
    }
}

fn transport_residual(c: f64, steps: usize) -> f64 {
    let h = 1.0 / steps as f64;
    let rhs = |(v, dv): (f64, f64)| (dv, c * c * v);
    let mut s = (1.0, -c);
    let mut worst: f64 = 0.0;
    for i in 0..steps {
        let k1 = rhs(s);
        let k2 = rhs((s.0 + 0.5 * h * k1.0, s.1 + 0.5 * h * k1.1));
        let k3 = rhs((s.0 + 0.5 * h * k2.0, s.1 + 0.5 * h * k2.1));
        let k4 = rhs((s.0 + h * k3.0, s.1 + h * k3.1));
        s.0 += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        s.1 += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        let t = (i + 1) as f64 * h;
        worst = worst.max((s.0 - (-c * t).exp()).abs());
    }
    worst
}
