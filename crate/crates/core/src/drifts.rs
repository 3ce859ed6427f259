//! Drift families for the labeled diffusion model.
//!
//! * `make_bump_drift` — C^∞ compactly supported bumps
//!   b(x) = amplitude·exp(-1/(1-u²)), u the affine map of [A, B] onto [-1, 1].
//! * `make_hypercube_drift` — the finite hypothesis family on [0, 1]:
//!   f_θ(x) = κ D^{-β} + Σ_k θ_k φ_k(x) with φ_k(x) = R D^{-β} K(D(x - x_k)),
//!   centers x_k = (k - 1/2)/D and K the bump kernel, so each φ_k is
//!   strictly positive exactly on the open cell ((k-1)/D, k/D).
//! * zero and constant drifts for baselines and tests.
//!
//! A hypercube drift is defined on [0, 1]. Simulation needs a globally
//! defined drift, so construction can request an `extend`ed version that
//! tapers the constant level κ D^{-β} smoothly to zero over a margin of
//! width 0.05 outside [0, 1]; without `extend`, evaluation outside [0, 1]
//! is a domain error.

use crate::kernels::{KernelKind, KernelSpec};
use thiserror::Error;

/// Width of the smooth taper outside [0, 1] for extended hypercube drifts.
const EXTEND_MARGIN: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum DriftError {
    #[error("invalid support: lo={lo} must be < hi={hi}")]
    InvalidSupport { lo: f64, hi: f64 },
    #[error("bump amplitude must be nonzero")]
    ZeroAmplitude,
    #[error("hypercube drift requires a bump kernel")]
    WrongKernelKind,
    #[error("invalid hypercube spec: {0}")]
    InvalidHypercube(String),
    #[error("evaluation at x={0} is outside the drift's domain [0, 1]")]
    OutsideDomain(f64),
}

/// Parameters of one hypothesis-family member.
#[derive(Debug, Clone)]
pub struct HypercubeSpec {
    /// Number of cells D.
    pub dimension: usize,
    /// Cell indicators θ ∈ {0, 1}^D.
    pub theta: Vec<u8>,
    /// Constant level multiplier κ (nonzero).
    pub kappa: f64,
    /// Bump-height multiplier R.
    pub holder: f64,
    /// Smoothness parameter β ≥ 1.
    pub beta: f64,
}

impl HypercubeSpec {
    /// Cell center x_k = (k - 1/2)/D, k = 1..=D.
    pub fn center(&self, k: usize) -> f64 {
        (k as f64 - 0.5) / self.dimension as f64
    }
}

/// Number of cells D = ⌊N^{1/(2β+1)}⌋, guarded against powf landing just
/// under an exact integer root (e.g. 4096^{1/3}).
pub fn hypercube_dimension(n: usize, beta: f64) -> usize {
    assert!(n >= 1 && beta >= 1.0);
    let expo = 1.0 / (2.0 * beta + 1.0);
    let ln_n = (n as f64).ln();
    let mut d = (n as f64).powf(expo).floor().max(1.0) as usize;
    while d > 1 && (d as f64).ln() > expo * ln_n + 1e-9 {
        d -= 1;
    }
    while ((d + 1) as f64).ln() <= expo * ln_n + 1e-9 {
        d += 1;
    }
    d
}

#[derive(Debug, Clone)]
enum DriftBody {
    Zero,
    Constant(f64),
    Bump {
        lo: f64,
        hi: f64,
        amplitude: f64,
    },
    Hypercube {
        spec: HypercubeSpec,
        kernel: KernelSpec,
        /// κ D^{-β}
        base: f64,
        /// R D^{-β}
        scale: f64,
        extend: bool,
    },
}

/// An evaluable drift with support interval and smoothness metadata.
#[derive(Debug, Clone)]
pub struct DriftFunction {
    body: DriftBody,
    support: Option<(f64, f64)>,
    beta: f64,
    holder: f64,
    sup_norm: f64,
    description: String,
}

/// The identically-zero drift.
pub fn make_zero_drift() -> DriftFunction {
    DriftFunction {
        body: DriftBody::Zero,
        support: None,
        beta: f64::INFINITY,
        holder: 0.0,
        sup_norm: 0.0,
        description: "zero".to_string(),
    }
}

/// Constant drift on the whole line. Violates the compact-support model
/// assumptions; intended for exact-identity tests.
pub fn make_constant_drift(c: f64) -> DriftFunction {
    DriftFunction {
        body: DriftBody::Constant(c),
        support: None,
        beta: f64::INFINITY,
        holder: 0.0,
        sup_norm: c.abs(),
        description: format!("constant({c})"),
    }
}

/// C^∞ bump supported on (lo, hi): amplitude·exp(-1/(1-u²)) with
/// u = (2x - lo - hi)/(hi - lo). The sup norm is |amplitude|/e, at the center.
pub fn make_bump_drift(
    lo: f64,
    hi: f64,
    amplitude: f64,
    beta: f64,
    holder: f64,
) -> Result<DriftFunction, DriftError> {
    if !(lo < hi) {
        return Err(DriftError::InvalidSupport { lo, hi });
    }
    if amplitude == 0.0 {
        return Err(DriftError::ZeroAmplitude);
    }
    Ok(DriftFunction {
        body: DriftBody::Bump { lo, hi, amplitude },
        support: Some((lo, hi)),
        beta,
        holder,
        sup_norm: amplitude.abs() * (-1.0f64).exp(),
        description: format!("bump[{lo},{hi}]x{amplitude}"),
    })
}

/// Build a hypothesis-family drift from its spec and a bump kernel.
pub fn make_hypercube_drift(
    spec: &HypercubeSpec,
    kernel: &KernelSpec,
    extend: bool,
) -> Result<DriftFunction, DriftError> {
    if kernel.kind() != KernelKind::Bump {
        return Err(DriftError::WrongKernelKind);
    }
    if spec.dimension == 0 {
        return Err(DriftError::InvalidHypercube("dimension must be >= 1".into()));
    }
    if spec.theta.len() != spec.dimension {
        return Err(DriftError::InvalidHypercube(format!(
            "theta has {} entries for dimension {}",
            spec.theta.len(),
            spec.dimension
        )));
    }
    if spec.kappa == 0.0 {
        return Err(DriftError::InvalidHypercube("kappa must be nonzero".into()));
    }
    if !(spec.holder > 0.0) {
        return Err(DriftError::InvalidHypercube("holder constant must be positive".into()));
    }
    if !(spec.beta >= 1.0) {
        return Err(DriftError::InvalidHypercube("beta must be >= 1".into()));
    }
    let d_pow = (spec.dimension as f64).powf(-spec.beta);
    let base = spec.kappa * d_pow;
    let scale = spec.holder * d_pow;
    let any_active = spec.theta.iter().any(|&t| t != 0);
    let peak = base + if any_active { scale * kernel.sup_norm() } else { 0.0 };
    let sup_norm = base.abs().max(peak.abs());
    let description = format!(
        "hypercube(D={},kappa={},R={},beta={})",
        spec.dimension, spec.kappa, spec.holder, spec.beta
    );
    Ok(DriftFunction {
        body: DriftBody::Hypercube {
            spec: spec.clone(),
            kernel: kernel.clone(),
            base,
            scale,
            extend,
        },
        support: Some((0.0, 1.0)),
        beta: spec.beta,
        holder: spec.holder,
        sup_norm,
        description,
    })
}

/// C^∞ step: 1 at u=0 down to 0 at u=1, all derivatives vanishing at both ends.
fn smooth_step_down(u: f64) -> f64 {
    if u <= 0.0 {
        return 1.0;
    }
    if u >= 1.0 {
        return 0.0;
    }
    let g = |t: f64| (-1.0 / t).exp();
    g(1.0 - u) / (g(u) + g(1.0 - u))
}

impl DriftFunction {
    /// Evaluate the drift. Panics for a non-extended hypercube drift outside
    /// [0, 1]; use `try_eval` where that case must be handled.
    pub fn eval(&self, x: f64) -> f64 {
        self.try_eval(x).expect("drift evaluated outside its domain")
    }

    /// Evaluate the drift, reporting a domain error for non-extended
    /// hypercube drifts outside [0, 1].
    pub fn try_eval(&self, x: f64) -> Result<f64, DriftError> {
        match &self.body {
            DriftBody::Zero => Ok(0.0),
            DriftBody::Constant(c) => Ok(*c),
            DriftBody::Bump { lo, hi, amplitude } => {
                let u = (2.0 * x - lo - hi) / (hi - lo);
                if u.abs() >= 1.0 {
                    Ok(0.0)
                } else {
                    Ok(amplitude * (-1.0 / (1.0 - u * u)).exp())
                }
            }
            DriftBody::Hypercube {
                spec,
                kernel,
                base,
                scale,
                extend,
            } => {
                if !(0.0..=1.0).contains(&x) {
                    if !extend {
                        return Err(DriftError::OutsideDomain(x));
                    }
                    let dist = if x < 0.0 { -x } else { x - 1.0 };
                    return Ok(base * smooth_step_down(dist / EXTEND_MARGIN));
                }
                let d = spec.dimension;
                let cell = ((x * d as f64).floor() as usize).min(d - 1);
                let mut value = *base;
                if spec.theta[cell] != 0 {
                    let u = d as f64 * (x - spec.center(cell + 1));
                    value += scale * kernel.eval(u);
                }
                Ok(value)
            }
        }
    }

    /// Support interval, `None` for drifts without one (zero, constant).
    pub fn support(&self) -> Option<(f64, f64)> {
        self.support
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn holder(&self) -> f64 {
        self.holder
    }

    /// Sup norm ‖b‖∞.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// Smallest spatial feature width, used to choose quadrature panels.
    pub fn feature_scale(&self) -> f64 {
        match &self.body {
            DriftBody::Zero | DriftBody::Constant(_) => f64::INFINITY,
            DriftBody::Bump { lo, hi, .. } => (hi - lo) / 2.0,
            DriftBody::Hypercube { spec, .. } => 0.5 / spec.dimension as f64,
        }
    }
}

/// Max of |b1 - b2| over a uniform grid on the hull of the two supports.
/// Points where a bounded-domain drift is undefined are skipped. Grids with
/// nested refinements give monotone non-decreasing values.
pub fn drift_sup_distance(b1: &DriftFunction, b2: &DriftFunction, grid_points: usize) -> f64 {
    assert!(grid_points >= 2, "need at least two grid points");
    let hull = match (b1.support(), b2.support()) {
        (None, None) => return pointwise_gap(b1, b2, 0.0),
        (Some(s), None) | (None, Some(s)) => s,
        (Some(a), Some(b)) => (a.0.min(b.0), a.1.max(b.1)),
    };
    let step = (hull.1 - hull.0) / (grid_points - 1) as f64;
    let mut best: f64 = 0.0;
    for i in 0..grid_points {
        let x = hull.0 + i as f64 * step;
        if let (Ok(v1), Ok(v2)) = (b1.try_eval(x), b2.try_eval(x)) {
            best = best.max((v1 - v2).abs());
        }
    }
    best
}

fn pointwise_gap(b1: &DriftFunction, b2: &DriftFunction, x: f64) -> f64 {
    (b1.eval(x) - b2.eval(x)).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{build_bump_kernel, build_legendre_kernel};

    #[test]
    fn bump_drift_values() {
        let b = make_bump_drift(-1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!((b.eval(0.0) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(b.eval(1.0), 0.0);
        assert_eq!(b.eval(2.0), 0.0);
        assert!((b.sup_norm() - (-1.0f64).exp()).abs() < 1e-15);

        let b2 = make_bump_drift(0.0, 2.0, -3.0, 1.0, 1.0).unwrap();
        let expected = -3.0 * (-1.0f64).exp();
        assert!((b2.eval(1.0) - expected).abs() < 1e-15);
        assert!((expected + 1.1036383235143269).abs() < 1e-12);
    }

    #[test]
    fn bump_drift_rejects_bad_support() {
        assert_eq!(
            make_bump_drift(1.0, 1.0, 1.0, 1.0, 1.0).unwrap_err(),
            DriftError::InvalidSupport { lo: 1.0, hi: 1.0 }
        );
        assert_eq!(
            make_bump_drift(-1.0, 1.0, 0.0, 1.0, 1.0).unwrap_err(),
            DriftError::ZeroAmplitude
        );
    }

    #[test]
    fn dimension_rule() {
        assert_eq!(hypercube_dimension(1024, 1.0), 10);
        assert_eq!(hypercube_dimension(4096, 1.0), 16); // exact cube root
        assert_eq!(hypercube_dimension(8, 1.0), 2);
        assert_eq!(hypercube_dimension(63, 1.0), 3);
        assert_eq!(hypercube_dimension(64, 1.0), 4);
        assert_eq!(hypercube_dimension(1, 1.0), 1);
        assert_eq!(hypercube_dimension(32, 2.0), 2); // 32^{1/5}
    }

    fn spec(theta: Vec<u8>, kappa: f64, holder: f64, beta: f64) -> HypercubeSpec {
        HypercubeSpec {
            dimension: theta.len(),
            theta,
            kappa,
            holder,
            beta,
        }
    }

    #[test]
    fn hypercube_flat_hypothesis() {
        let k = build_bump_kernel(1.0).unwrap();
        let f = make_hypercube_drift(&spec(vec![0, 0, 0, 0], 1.0, 1.0, 1.0), &k, false).unwrap();
        for i in 0..=20 {
            let x = i as f64 / 20.0;
            assert_eq!(f.eval(x), 0.25, "flat hypothesis is the constant level");
        }
    }

    #[test]
    fn hypercube_active_cell_value() {
        let k = build_bump_kernel(1.0).unwrap();
        let f = make_hypercube_drift(&spec(vec![1, 0, 0, 0], 1.0, 1.0, 1.0), &k, false).unwrap();
        // center of cell 1: 0.25 + 0.25·K(0) = 0.25 + 0.25/e
        let expected = 0.25 + 0.25 * (-1.0f64).exp();
        assert!((f.eval(0.125) - expected).abs() < 1e-15);
        // cell boundaries carry exactly the constant level
        for b in [0.0, 0.25, 0.5, 0.75, 1.0] {
            assert_eq!(f.eval(b), 0.25);
        }
    }

    #[test]
    fn hypercube_bumps_live_in_their_cells() {
        let k = build_bump_kernel(1.0).unwrap();
        let theta = vec![1, 0, 1, 0, 0, 1];
        let f = make_hypercube_drift(&spec(theta.clone(), 1.0, 2.0, 1.0), &k, false).unwrap();
        let d = theta.len();
        let base = (d as f64).powf(-1.0);
        for (idx, &t) in theta.iter().enumerate() {
            let mid = (idx as f64 + 0.5) / d as f64;
            if t == 1 {
                assert!(f.eval(mid) > base, "cell {idx} should be active");
            } else {
                assert_eq!(f.eval(mid), base, "cell {idx} should be flat");
            }
        }
    }

    #[test]
    fn hypercube_level_bounds() {
        let k = build_bump_kernel(1.0).unwrap();
        let s = spec(vec![1, 1, 0, 1, 0], 2.0, 3.0, 1.0);
        let f = make_hypercube_drift(&s, &k, false).unwrap();
        let d = 5.0f64;
        let base = 2.0 * d.powf(-1.0);
        let cap = base + 3.0 * d.powf(-1.0) * k.sup_norm();
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let v = f.eval(x);
            assert!(v >= base - 1e-15 && v <= cap + 1e-15);
        }
        assert!((f.sup_norm() - cap).abs() < 1e-15);
    }

    #[test]
    fn hypercube_domain_handling() {
        let k = build_bump_kernel(1.0).unwrap();
        let bounded = make_hypercube_drift(&spec(vec![1, 0], 1.0, 1.0, 1.0), &k, false).unwrap();
        assert_eq!(bounded.try_eval(-0.01).unwrap_err(), DriftError::OutsideDomain(-0.01));
        assert!(bounded.try_eval(0.5).is_ok());

        let extended = make_hypercube_drift(&spec(vec![1, 0], 1.0, 1.0, 1.0), &k, true).unwrap();
        let base = 0.5;
        assert_eq!(extended.try_eval(0.0).unwrap(), base);
        // taper: continuous at the boundary, zero beyond the margin
        assert!((extended.try_eval(-1e-9).unwrap() - base).abs() < 1e-6);
        assert_eq!(extended.try_eval(-0.05).unwrap(), 0.0);
        assert_eq!(extended.try_eval(1.06).unwrap(), 0.0);
        let mid = extended.try_eval(1.025).unwrap();
        assert!(mid > 0.0 && mid < base);
    }

    #[test]
    fn hypercube_rejects_wrong_kernel() {
        let k = build_legendre_kernel(2).unwrap();
        assert_eq!(
            make_hypercube_drift(&spec(vec![0], 1.0, 1.0, 1.0), &k, false).unwrap_err(),
            DriftError::WrongKernelKind
        );
    }

    #[test]
    fn sup_distance_basics() {
        let b = make_bump_drift(-1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let z = make_zero_drift();
        assert_eq!(drift_sup_distance(&b, &b, 101), 0.0);
        // sup attained at the center
        let d = drift_sup_distance(&b, &z, 1001);
        assert!((d - (-1.0f64).exp()).abs() < 1e-6);
        // nested grids: refinement can only increase the max
        let coarse = drift_sup_distance(&b, &z, 101);
        let fine = drift_sup_distance(&b, &z, 1001);
        assert!(fine >= coarse);
    }

    #[test]
    fn default_pair_satisfies_separation_proxy() {
        // b0 ≡ 0 against a bump: differ at x0 = 0 and on an interval
        let b0 = make_zero_drift();
        let b1 = make_bump_drift(-1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(b1.eval(0.0) != b0.eval(0.0));
        let mut differ_len = 0.0;
        let n = 2000;
        for i in 0..n {
            let x = -1.0 + 2.0 * i as f64 / n as f64;
            if (b1.eval(x) - b0.eval(x)).abs() > 0.0 {
                differ_len += 2.0 / n as f64;
            }
        }
        assert!(differ_len > 0.5);
    }

    #[test]
    fn hypercube_measured_slope_is_stable() {
        let k = build_bump_kernel(1.0).unwrap();
        let f = make_hypercube_drift(&spec(vec![1, 0, 1, 1], 1.0, 1.0, 1.0), &k, false).unwrap();
        let measured = |n: usize| {
            let mut worst: f64 = 0.0;
            for i in 0..n {
                let x = i as f64 / n as f64;
                let y = (i + 1) as f64 / n as f64;
                worst = worst.max((f.eval(y) - f.eval(x)).abs() / (y - x));
            }
            worst
        };
        let coarse = measured(2000);
        let fine = measured(20000);
        assert!(fine.is_finite() && coarse.is_finite());
        assert!((fine - coarse).abs() <= 0.05 * coarse);
    }
}
