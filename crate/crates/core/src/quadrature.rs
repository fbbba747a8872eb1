//! Adaptive Gauss-Legendre quadrature on finite intervals.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 20;
const MAX_DEPTH: usize = 40;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

fn fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * x
        .iter()
        .zip(w)
        .map(|(&xi, &wi)| wi * f(mid + half * xi))
        .sum::<f64>()
}

fn refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    err: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let left = fixed(f, a, m);
    let right = fixed(f, m, b);
    let split = left + right;
    let diff = (split - whole).abs();
    if diff <= tol || depth >= MAX_DEPTH || m <= a || m >= b {
        if diff > tol {
            *err += diff;
        }
        return split;
    }
    refine(f, a, m, left, 0.5 * tol, depth + 1, err)
        + refine(f, m, b, right, 0.5 * tol, depth + 1, err)
}

/// Integral of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let whole = fixed(&f, a, b);
    let mut err = 0.0;
    let value = refine(&f, a, b, whole, tol, 0, &mut err);
    if !value.is_finite() {
        return Err(Error::NonFinite("quadrature integrand"));
    }
    if err > tol {
        return Err(Error::Accuracy {
            estimate: err,
            target: tol,
        });
    }
    Ok(value)
}

/// Integral over `[a, b]` split at every breakpoint inside the interval;
/// the tolerance is shared evenly between pieces.
pub fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    tol: f64,
) -> Result<f64> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);
    let pieces = (edges.len() - 1) as f64;
    edges
        .windows(2)
        .map(|w| integrate(&f, w[0], w[1], tol / pieces))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for p in 0..(2 * ORDER) {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(p as i32)).sum();
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "degree {p}");
        }
    }

    #[test]
    fn gaussian_integral() {
        let v = integrate(|x: f64| (-x * x).exp(), -9.0, 9.0, 1e-12).unwrap();
        assert!((v - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn kinked_integrand_with_breakpoint() {
        let v = integrate_piecewise(|x: f64| x.abs(), -1.0, 2.0, &[0.0], 1e-12).unwrap();
        assert!((v - 2.5).abs() < 1e-13);
    }

    #[test]
    fn reversed_bounds() {
        let v = integrate(|x: f64| x, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 0.5).abs() < 1e-14);
    }
}
