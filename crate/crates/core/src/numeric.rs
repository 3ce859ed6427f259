//! Quadrature and small numeric helpers shared across the crate.
//!
//! Integration is composite Gauss–Legendre with 64 nodes per panel and one
//! panel per unit of interval length, refined by panel doubling until the
//! result is stable. The node/weight table is computed once by Newton
//! iteration on the P_64 recurrence.

use std::sync::OnceLock;

/// Number of Gauss–Legendre nodes per panel.
const GL_NODES: usize = 64;

/// Evaluate the Legendre polynomial P_n(x) and its derivative by the
/// three-term recurrence (n+1)P_{n+1} = (2n+1)xP_n - nP_{n-1}.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p_curr = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p_next = ((2 * k + 1) as f64 * x * p_curr - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p_curr;
        p_curr = p_next;
    }
    // P'_n(x) = n (x P_n - P_{n-1}) / (x^2 - 1)
    let deriv = n as f64 * (x * p_curr - p_prev) / (x * x - 1.0);
    (p_curr, deriv)
}

/// Nodes and weights of the `GL_NODES`-point Gauss–Legendre rule on [-1, 1].
fn gl_table() -> &'static (Vec<f64>, Vec<f64>) {
    static TABLE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    TABLE.get_or_init(|| {
        let n = GL_NODES;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Tricomi initial guess, then Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_pair(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre_pair(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

/// Integrate `f` over `[a, b]` with `panels` equal Gauss–Legendre panels.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let (nodes, weights) = gl_table();
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights.iter()) {
            acc += w * f(mid + half * x);
        }
        total += acc * half;
    }
    total
}

/// Adaptive composite integration: start with one panel per unit of length
/// and double the panel count until two successive results agree within
/// `tol` (absolute), up to a refinement cap.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (a, b, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut panels = (b - a).ceil().max(1.0) as usize;
    let mut prev = integrate_panels(f, a, b, panels);
    for _ in 0..8 {
        panels *= 2;
        let next = integrate_panels(f, a, b, panels);
        let stable = (next - prev).abs() <= tol;
        prev = next;
        if stable {
            break;
        }
    }
    sign * prev
}

/// Numerically stable logistic function 1 / (1 + e^{-z}).
pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Uniform grid of `n` points on `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + i as f64 * step).collect()
}

/// Sample mean and unbiased sample variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, ss / (n - 1) as f64)
}

/// Median of a sample (average of the two central order statistics for even n).
pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        // degree 2*64-1 exactness; probe a few low degrees
        let f = |x: f64| 3.0 * x * x;
        assert!((integrate_panels(&f, -1.0, 1.0, 1) - 2.0).abs() < 1e-14);
        let g = |x: f64| x.powi(7) - 4.0 * x.powi(3) + 1.0;
        assert!((integrate_panels(&g, -1.0, 1.0, 1) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_integral_of_gaussian() {
        // int_{-8}^{8} exp(-x^2/2)/sqrt(2 pi) dx ~ 1
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let v = integrate(&f, -8.0, 8.0, 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn integrate_respects_orientation() {
        let f = |x: f64| x;
        let fwd = integrate(&f, 0.0, 2.0, 1e-12);
        let rev = integrate(&f, 2.0, 0.0, 1e-12);
        assert!((fwd - 2.0).abs() < 1e-12);
        assert!((rev + 2.0).abs() < 1e-12);
    }

    #[test]
    fn logistic_is_stable_and_bounded() {
        assert_eq!(logistic(0.0), 0.5);
        assert!(logistic(1000.0) <= 1.0);
        assert!(logistic(-1000.0) >= 0.0);
        assert!((logistic(2.0) + logistic(-2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_endpoints_and_spacing() {
        let g = uniform_grid(-1.0, 1.0, 201);
        assert_eq!(g.len(), 201);
        assert_eq!(g[0], -1.0);
        assert!((g[200] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
