//! Recovering small rationals from floating-point values.

use num_rational::Rational64;

/// Best rational approximation with denominator at most `max_den`, via the continued
/// fraction expansion of `x`. Returns `None` unless it lies within `tol` of `x`.
pub fn recover(x: f64, max_den: i64, tol: f64) -> Option<Rational64> {
    if !x.is_finite() {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    let mut best = None;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let p2 = a.checked_mul(p1).and_then(|v| v.checked_add(p0))?;
        let q2 = a.checked_mul(q1).and_then(|v| v.checked_add(q0))?;
        if q2 > max_den {
            break;
        }
        best = Some(Rational64::new(p2, q2));
        if (x - p2 as f64 / q2 as f64).abs() <= tol {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a as f64;
        if frac.abs() < 1e-300 {
            break;
        }
        r = 1.0 / frac;
    }
    best.filter(|q| (x - to_f64(*q)).abs() <= tol)
}

pub fn to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

/// Snaps `x` to a rational with denominator at most `max_den` when within `tol`.
pub fn snap(x: f64, max_den: i64, tol: f64) -> f64 {
    recover(x, max_den, tol).map(to_f64).unwrap_or(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_fractions() {
        assert_eq!(recover(8.0 / 7.0, 64, 1e-9), Some(Rational64::new(8, 7)));
        assert_eq!(recover(216.0 / 7.0, 64, 1e-9), Some(Rational64::new(216, 7)));
        assert_eq!(recover(-4.0 / 3.0, 64, 1e-9), Some(Rational64::new(-4, 3)));
        assert_eq!(recover(2.0, 64, 1e-9), Some(Rational64::new(2, 1)));
        assert_eq!(recover(0.0, 64, 1e-9), Some(Rational64::new(0, 1)));
    }

    #[test]
    fn rejects_irrationals_and_large_denominators() {
        assert_eq!(recover(std::f64::consts::PI, 64, 1e-9), None);
        assert_eq!(recover(1.0 / 97.0, 64, 1e-12), None);
        assert_eq!(recover(f64::NAN, 64, 1e-9), None);
    }

    #[test]
    fn snap_leaves_non_rationals() {
        assert_eq!(snap(0.5 + 1e-12, 64, 1e-9), 0.5);
        assert_eq!(snap(std::f64::consts::E, 64, 1e-9), std::f64::consts::E);
    }
}
