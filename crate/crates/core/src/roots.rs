//! Bracketing root finders used for threshold curves.

/// Bisection on `[lo, hi]`. Returns `None` when the endpoints do not
/// bracket a sign change. Stops once the bracket is narrower than `tol`.
pub fn bisect<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= tol || mid == lo || mid == hi {
            return Some(mid);
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Bisection that first widens `[lo, hi]` geometrically (up to `limit` in
/// magnitude on both sides) until the endpoints bracket a root.
pub fn bracket_and_bisect<F>(f: F, lo: f64, hi: f64, tol: f64, limit: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    if let Some(root) = bisect(&f, lo, hi, tol) {
        return Some(root);
    }
    let width = (hi - lo).abs().max(1e-3);
    let mut step = width;
    while step <= limit {
        if let Some(root) = bisect(&f, hi, hi + step, tol) {
            return Some(root);
        }
        if let Some(root) = bisect(&f, lo - step, lo, tol) {
            return Some(root);
        }
        step *= 2.0;
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn no_bracket_no_root() {
        assert!(bisect(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn widening_reaches_distant_roots() {
        let r = bracket_and_bisect(|x| x - 7.5, 0.0, 1.0, 1e-13, 1e3).unwrap();
        assert!((r - 7.5).abs() < 1e-12);
        let r = bracket_and_bisect(|x| x + 0.25, 0.0, 1.0, 1e-13, 1e3).unwrap();
        assert!((r + 0.25).abs() < 1e-12);
    }
}
