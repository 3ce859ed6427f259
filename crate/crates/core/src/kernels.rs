//! Kernel construction and evaluation.
//!
//! Two families are provided:
//!
//! * `Legendre` — order-γ kernels K(x) = Σ_{m=0}^{γ} φ_m(0) φ_m(x) on [-1, 1],
//!   with {φ_m} the orthonormal Legendre basis of L²([-1, 1]). By
//!   orthogonality, ∫K = 1 and ∫x^k K = 0 for k = 1..γ, which is what the
//!   drift estimator needs from a kernel of order γ. The expansion is
//!   collapsed to monomial coefficients at build time so evaluation in the
//!   estimator's inner loop is a single Horner pass.
//! * `Bump` — K(x) = a·exp(-1/(1-4x²)) on (-1/2, 1/2), the C^∞ bump used to
//!   build the hypercube drift family. Strictly positive exactly on its open
//!   support.
//!
//! Both carry their L² norm, sup norm and Lipschitz constant, measured at
//! build time on a dense grid; these feed the deviation-bound constants.

use crate::numeric;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("kernel order must be at least 1, got {0}")]
    InvalidOrder(u32),
    #[error("bump amplitude must be positive, got {0}")]
    InvalidAmplitude(f64),
    #[error("bandwidth must be positive, got {0}")]
    InvalidBandwidth(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Legendre,
    Bump,
}

/// A compactly supported kernel with order metadata.
#[derive(Debug, Clone)]
pub struct KernelSpec {
    kind: KernelKind,
    order: u32,
    /// Monomial coefficients (low to high) for `Legendre`; `[a]` for `Bump`.
    coefficients: Vec<f64>,
    support: (f64, f64),
    l2_norm: f64,
    sup_norm: f64,
    lipschitz: f64,
}

/// Points used for the build-time dense-grid norm measurements.
const NORM_GRID: usize = 10_000;

/// Monomial coefficients of the Legendre polynomial P_n, via the
/// three-term recurrence in coefficient space.
fn legendre_coefficients(n: usize) -> Vec<f64> {
    let mut prev = vec![1.0]; // P_0
    if n == 0 {
        return prev;
    }
    let mut curr = vec![0.0, 1.0]; // P_1
    for k in 1..n {
        // (k+1) P_{k+1} = (2k+1) x P_k - k P_{k-1}
        let mut next = vec![0.0; k + 2];
        for (i, c) in curr.iter().enumerate() {
            next[i + 1] += (2 * k + 1) as f64 * c;
        }
        for (i, c) in prev.iter().enumerate() {
            next[i] -= k as f64 * c;
        }
        for c in next.iter_mut() {
            *c /= (k + 1) as f64;
        }
        prev = curr;
        curr = next;
    }
    curr
}

fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for &c in coeffs.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| i as f64 * c)
        .collect()
}

/// Build the order-γ Legendre-basis kernel.
///
/// Odd basis terms vanish (φ_m(0) = 0 for odd m), so the kernel is even.
pub fn build_legendre_kernel(order: u32) -> Result<KernelSpec, KernelError> {
    if order == 0 {
        return Err(KernelError::InvalidOrder(order));
    }
    let mut coeffs = vec![0.0; order as usize + 1];
    for m in (0..=order as usize).step_by(2) {
        let pm = legendre_coefficients(m);
        // φ_m = sqrt((2m+1)/2) P_m, so φ_m(0) φ_m(x) = ((2m+1)/2) P_m(0) P_m(x)
        let scale = (2 * m + 1) as f64 / 2.0 * pm[0];
        for (i, c) in pm.iter().enumerate() {
            coeffs[i] += scale * c;
        }
    }
    let eval = |x: f64| poly_eval(&coeffs, x);
    let deriv_coeffs = poly_derivative(&coeffs);
    let deriv = |x: f64| poly_eval(&deriv_coeffs, x);
    let (sup_norm, lipschitz) = dense_grid_norms(&eval, &deriv, -1.0, 1.0);
    let l2_norm = numeric::integrate(&|x| eval(x) * eval(x), -1.0, 1.0, 1e-13).sqrt();
    Ok(KernelSpec {
        kind: KernelKind::Legendre,
        order,
        coefficients: coeffs,
        support: (-1.0, 1.0),
        l2_norm,
        sup_norm,
        lipschitz,
    })
}

/// Build the scaled bump kernel K(x) = a·K₀(2x), K₀(u) = exp(-1/(1-u²)) on (-1, 1).
pub fn build_bump_kernel(amplitude: f64) -> Result<KernelSpec, KernelError> {
    if !(amplitude > 0.0) {
        return Err(KernelError::InvalidAmplitude(amplitude));
    }
    let eval = move |x: f64| bump_eval(amplitude, x);
    // K'(x) = a K₀'(2x)·2 with K₀'(u) = K₀(u) · (-2u)/(1-u²)²
    let deriv = move |x: f64| {
        let u = 2.0 * x;
        if u.abs() >= 1.0 {
            return 0.0;
        }
        let one = 1.0 - u * u;
        2.0 * amplitude * (-1.0 / one).exp() * (-2.0 * u) / (one * one)
    };
    let (_, lipschitz) = dense_grid_norms(&eval, &deriv, -0.5, 0.5);
    let l2_norm = numeric::integrate(&|x| eval(x) * eval(x), -0.5, 0.5, 1e-13).sqrt();
    Ok(KernelSpec {
        kind: KernelKind::Bump,
        order: 0,
        coefficients: vec![amplitude],
        support: (-0.5, 0.5),
        // max at the origin: K(0) = a/e, exact
        sup_norm: amplitude * (-1.0f64).exp(),
        l2_norm,
        lipschitz,
    })
}

fn bump_eval(amplitude: f64, x: f64) -> f64 {
    let u = 2.0 * x;
    if u.abs() >= 1.0 {
        return 0.0;
    }
    amplitude * (-1.0 / (1.0 - u * u)).exp()
}

fn dense_grid_norms<F, G>(eval: &F, deriv: &G, lo: f64, hi: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let mut sup: f64 = 0.0;
    let mut lip: f64 = 0.0;
    let step = (hi - lo) / NORM_GRID as f64;
    for i in 0..=NORM_GRID {
        let x = lo + i as f64 * step;
        sup = sup.max(eval(x).abs());
        lip = lip.max(deriv(x).abs());
    }
    (sup, lip)
}

impl KernelSpec {
    pub fn kind(&self) -> KernelKind {
        self.kind
    }

    /// Kernel order γ (0 for the bump kernel, which has no vanishing moments).
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    /// Half-width of the support; |x| beyond this evaluates to exactly 0.
    pub fn support_radius(&self) -> f64 {
        self.support.1
    }

    /// L² norm ‖K‖.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    /// Sup norm ‖K‖∞.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Lipschitz constant C_K (measured max of |K'| on the support).
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Evaluate K(x); exactly 0 outside the support.
    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            KernelKind::Legendre => {
                if x.abs() > 1.0 {
                    0.0
                } else {
                    poly_eval(&self.coefficients, x)
                }
            }
            KernelKind::Bump => bump_eval(self.coefficients[0], x),
        }
    }

    /// Evaluate the rescaled kernel K_h(x) = h⁻¹ K(x/h).
    pub fn eval_scaled(&self, h: f64, x: f64) -> Result<f64, KernelError> {
        if !(h > 0.0) {
            return Err(KernelError::InvalidBandwidth(h));
        }
        Ok(self.eval(x / h) / h)
    }
}

/// k-th moment ∫ x^k K(x) dx over the support (absolute tolerance ≤ 1e-10).
pub fn kernel_moment(kernel: &KernelSpec, k: u32) -> f64 {
    let (lo, hi) = kernel.support();
    numeric::integrate(&|x| x.powi(k as i32) * kernel.eval(x), lo, hi, 1e-12)
}
