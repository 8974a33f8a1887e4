use super::PhiFunction;
use crate::error::{Error, Result};

const MAX_STEPS: usize = 200;
const REL_TOL: f64 = 1e-10;

/// Legendre conjugate `φ*(t, x, y) = sup_{s >= 0} (s t - φ(s, x, y))`.
///
/// Solves `φ'(s) = t` by bisection on a bracket grown from `s = 1`; falls
/// back to a golden-section search on `s t - φ(s)` when no bracket exists.
pub fn conjugate(phi: &PhiFunction, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::ConjugateBracketFailure { t });
    }
    let s = match derivative_root(phi, t, x, y) {
        Some(s) => s,
        None => golden_argmax(phi, t, x, y)?,
    };
    Ok((s * t - phi.eval(s, x, y)).max(0.0))
}

fn derivative_root(phi: &PhiFunction, t: f64, x: &[f64], y: &[f64]) -> Option<f64> {
    let d = |s: f64| phi.derivative(s, x, y);
    let (mut lo, mut hi);
    if d(1.0) < t {
        lo = 1.0;
        hi = 2.0;
        let mut k = 0;
        while d(hi) < t {
            lo = hi;
            hi *= 2.0;
            k += 1;
            if k >= MAX_STEPS || !d(hi).is_finite() {
                return None;
            }
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        let mut k = 0;
        while d(lo) > t {
            hi = lo;
            lo *= 0.5;
            k += 1;
            if k >= MAX_STEPS {
                // φ'(0+) >= t: the supremum sits at s = 0
                return Some(0.0);
            }
        }
    }
    for _ in 0..MAX_STEPS {
        let mid = 0.5 * (lo + hi);
        let v = d(mid);
        if !v.is_finite() {
            return None;
        }
        if v < t {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= REL_TOL * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

fn golden_argmax(phi: &PhiFunction, t: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    let g = |s: f64| s * t - phi.eval(s, x, y);
    // coarse log scan locates the basin, golden section refines it
    let grid: Vec<f64> = (-240..=240).map(|k| 2f64.powf(k as f64 / 4.0)).collect();
    let mut best = 0usize;
    let mut best_val = 0.0;
    let mut found = false;
    for (i, &s) in grid.iter().enumerate() {
        let v = g(s);
        if v.is_finite() && (!found || v > best_val) {
            best = i;
            best_val = v;
            found = true;
        }
    }
    if !found || best == grid.len() - 1 {
        return Err(Error::ConjugateBracketFailure { t });
    }
    if best_val <= 0.0 && best == 0 {
        return Ok(0.0);
    }
    let mut a = if best == 0 { 0.0 } else { grid[best - 1] };
    let mut b = grid[best + 1];
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..MAX_STEPS {
        if g(c) > g(d) {
            b = d;
        } else {
            a = c;
        }
        if b - a <= REL_TOL * b {
            break;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::{build_phi, PhiExpression};

    const X: [f64; 1] = [0.3];

    #[test]
    fn square_and_cube() {
        let sq = build_phi(&PhiExpression::square()).unwrap();
        assert!((conjugate(&sq, 2.0, &X, &X).unwrap() - 1.0).abs() < 1e-12);
        let cube = build_phi(&PhiExpression::power(3.0, 1.0)).unwrap();
        assert!((conjugate(&cube, 3.0, &X, &X).unwrap() - 2.0).abs() < 1e-10);
        assert_eq!(conjugate(&cube, 0.0, &X, &X).unwrap(), 0.0);
    }

    #[test]
    fn power_conjugate_closed_form() {
        // (b z^p)* (t) = (p - 1) b (t / (p b))^(p / (p - 1))
        for &(p, b) in &[(1.5, 1.0), (2.5, 0.7), (4.0, 3.0)] {
            let phi = build_phi(&PhiExpression::power(p, b)).unwrap();
            for &t in &[1e-3, 0.2, 1.0, 7.0, 300.0] {
                let exact = (p - 1.0) * b * (t / (p * b)).powf(p / (p - 1.0));
                let got = conjugate(&phi, t, &X, &X).unwrap();
                assert!((got - exact).abs() <= 1e-9 * exact, "p={p} t={t}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn linear_growth_has_no_bracket() {
        let e = PhiExpression::Custom {
            expr: crate::expr::Expr::parse("z").unwrap(),
            p_minus: Some(1.5),
            p_plus: Some(1.5),
            beta: None,
        };
        let phi = crate::phi::build_phi(&e).unwrap();
        assert!(matches!(conjugate(&phi, 2.0, &X, &X), Err(Error::ConjugateBracketFailure { .. })));
    }
}
