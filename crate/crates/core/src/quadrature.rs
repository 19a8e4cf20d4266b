//! Gauss-Legendre rules.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Nodes and weights of the `p`-point Gauss-Legendre rule on `[-1, 1]`,
/// found by Newton iteration on `P_p`.
pub fn gauss_legendre(p: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(p >= 1);
    let mut nodes = Vec::with_capacity(p);
    let mut weights = Vec::with_capacity(p);
    for i in 0..p {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (p as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (pn, d) = legendre_with_derivative(p, x);
            dp = d;
            let dx = pn / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(p, x);
        if d != 0.0 {
            dp = d;
        }
        nodes.push(x);
        weights.push(2.0 / ((1.0 - x * x) * dp * dp));
    }
    (nodes, weights)
}

fn legendre_with_derivative(p: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=p {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if p == 0 {
        return (1.0, 0.0);
    }
    let d = p as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite rule on `[a, b]` with `panels` equal panels of a `p`-point rule.
/// Returns `(node, weight)` pairs.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, p: usize) -> Vec<(f64, f64)> {
    let (nodes, weights) = gauss_legendre(p);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * p);
    for i in 0..panels {
        let mid = a + (i as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(&weights) {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_integrate_polynomials_exactly() {
        for p in [1usize, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(p);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14, "p={p}");
            // x^{2p-2} is integrated exactly: 2 / (2p - 1).
            let deg = 2 * p - 2;
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * libm::pow(*x, deg as f64)).sum();
            assert!((got - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "p={p}");
        }
    }

    #[test]
    fn composite_rule_on_exponential() {
        let rule = composite_gauss_legendre(0.0, 3.0, 4, 8);
        let got: f64 = rule.iter().map(|(t, w)| w * libm::exp(-*t)).sum();
        assert!((got - (1.0 - libm::exp(-3.0))).abs() < 1e-14);
    }
}
