//! Computable forms of the estimator's deviation bound and the model's
//! noise diagnostics.
//!
//! The sup-norm deviation of the truncated kernel drift estimator satisfies
//!
//!   P(‖b̂ - b‖∞ ≥ δ) ≤ 6·exp(-C·N_i·δ²·h)
//!                     + N_i·exp(-(T-t₀)·log²(N)/(2‖K‖∞²))
//!                     + (6‖b_i‖∞/δ)·exp(-C'·N_i·h)
//!
//! with constants
//!
//!   C  = min_i min{ m²/(576‖f_i‖∞‖b_i‖∞²‖K‖²), m²(T-t₀)/(2304‖f_i‖∞‖K‖²) },
//!   C' = min_i m²/(32‖f_i‖∞‖K‖² + 16m‖K‖∞/3).
//!
//! The bound is reported raw — it may exceed 1, in which case it is vacuous
//! and dominance checks against Monte Carlo tail frequencies are skipped.
//!
//! Also here: the low-noise probe P(0 < |Φ(X) - 1/2| ≤ ε) for the oracle
//! score, and the noise functional Z_T = ∫ (b1-b0)(X_t) dW_t whose sample
//! mean, Itô-isometry variance match and histogram give a cheap check that
//! its law has mean zero, positive variance and a bounded density.

use crate::classify::{regression_score, ClassifierModel};
use crate::drifts::drift_sup_distance;
use crate::estimate::fit_drift;
use crate::kernels::KernelSpec;
use crate::rng::Streams;
use crate::simulate::{sample_labeled_paths, simulate_path, sample_label, Label, MixtureModel};
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("constant inputs must be positive: {0}")]
    InvalidConstantInput(&'static str),
    #[error("margin width must lie in (0, 1/8), got {0}")]
    EpsilonOutOfRange(f64),
    #[error("the two drifts coincide; the noise functional is degenerate")]
    DegenerateModel,
    #[error("tail experiments need at least 50 replicates, got {0}")]
    TooFewReplicates(usize),
}

/// Raw ingredients of the bound constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub m: f64,
    pub f_sup: (f64, f64),
    pub b_sup: (f64, f64),
    /// ‖K‖² (squared L² norm).
    pub k_l2_sq: f64,
    /// ‖K‖∞.
    pub k_sup: f64,
    pub t_end: f64,
    pub t0: f64,
}

/// The two deviation-bound constants together with their inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundConstants {
    pub c: f64,
    pub c_prime: f64,
    pub inputs: BoundInputs,
}

/// Evaluate the constants from raw ingredients.
pub fn compute_constants_raw(inputs: BoundInputs) -> Result<BoundConstants, BoundsError> {
    let BoundInputs { m, f_sup, b_sup, k_l2_sq, k_sup, t_end, t0 } = inputs;
    if !(m > 0.0) {
        return Err(BoundsError::InvalidConstantInput("m"));
    }
    if !(f_sup.0 > 0.0 && f_sup.1 > 0.0) {
        return Err(BoundsError::InvalidConstantInput("f_sup"));
    }
    if !(b_sup.0 > 0.0 && b_sup.1 > 0.0) {
        return Err(BoundsError::InvalidConstantInput("b_sup"));
    }
    if !(k_l2_sq > 0.0 && k_sup > 0.0) {
        return Err(BoundsError::InvalidConstantInput("kernel norms"));
    }
    if !(t0 >= 0.0 && t0 < t_end) {
        return Err(BoundsError::InvalidConstantInput("time window"));
    }
    let window = t_end - t0;
    let mut c = f64::INFINITY;
    let mut c_prime = f64::INFINITY;
    for (f, b) in [(f_sup.0, b_sup.0), (f_sup.1, b_sup.1)] {
        let first = m * m / (576.0 * f * b * b * k_l2_sq);
        let second = m * m * window / (2304.0 * f * k_l2_sq);
        c = c.min(first.min(second));
        c_prime = c_prime.min(m * m / (32.0 * f * k_l2_sq + 16.0 * m * k_sup / 3.0));
    }
    Ok(BoundConstants { c, c_prime, inputs })
}

/// Evaluate the constants, taking the kernel norms from a built kernel.
pub fn compute_constants(
    m: f64,
    f_sup: (f64, f64),
    b_sup: (f64, f64),
    kernel: &KernelSpec,
    t_end: f64,
    t0: f64,
) -> Result<BoundConstants, BoundsError> {
    compute_constants_raw(BoundInputs {
        m,
        f_sup,
        b_sup,
        k_l2_sq: kernel.l2_norm() * kernel.l2_norm(),
        k_sup: kernel.sup_norm(),
        t_end,
        t0,
    })
}

/// The three-term deviation bound for class size `n_i`, bandwidth `h`,
/// deviation `delta` and total sample size `n_total`. May exceed 1.
pub fn exp_bound(
    consts: &BoundConstants,
    delta: f64,
    n_i: usize,
    h: f64,
    b_sup_i: f64,
    n_total: f64,
) -> f64 {
    let ni = n_i as f64;
    let window = consts.inputs.t_end - consts.inputs.t0;
    let log_n = n_total.ln();
    let first = 6.0 * (-consts.c * ni * delta * delta * h).exp();
    let middle = ni * (-(window * log_n * log_n) / (2.0 * consts.inputs.k_sup * consts.inputs.k_sup)).exp();
    let third = (6.0 * b_sup_i / delta) * (-consts.c_prime * ni * h).exp();
    (first + middle + third).max(0.0)
}

/// Fit settings for one tail replicate.
#[derive(Debug, Clone)]
pub struct TailFitConfig {
    pub kernel: KernelSpec,
    pub beta: f64,
    pub m: f64,
    pub t0: f64,
    pub grid: Vec<f64>,
    /// Training sample size per replicate.
    pub n_paths: usize,
    pub n_steps: usize,
}

/// Monte Carlo tail frequency with degenerate replicates reported apart.
#[derive(Debug, Clone, Copy)]
pub struct TailProbe {
    pub frequency: f64,
    pub se: f64,
    /// Replicates that produced a fit.
    pub n_effective: usize,
    /// Replicates dropped because one class had fewer than 2 paths.
    pub degenerate: usize,
}

/// Fraction of independent fits whose grid sup-error reaches `delta`.
pub fn tail_probability_mc(
    model: &MixtureModel,
    class: Label,
    delta: f64,
    fit: &TailFitConfig,
    n_replicates: usize,
    streams: &Streams,
    ids: &[u64],
) -> Result<TailProbe, BoundsError> {
    if n_replicates < 50 {
        return Err(BoundsError::TooFewReplicates(n_replicates));
    }
    let sups: Vec<Option<f64>> = (0..n_replicates)
        .into_par_iter()
        .map(|r| {
            let mut rep_ids = ids.to_vec();
            rep_ids.push(r as u64);
            let paths = sample_labeled_paths(model, fit.n_paths, fit.n_steps, streams, &rep_ids);
            fit_drift(&paths, class, &fit.kernel, fit.beta, fit.m, fit.t0, &fit.grid)
                .ok()
                .map(|est| est.sup_error(|x| model.drift(class).eval(x)))
        })
        .collect();
    let degenerate = sups.iter().filter(|s| s.is_none()).count();
    let n_eff = n_replicates - degenerate;
    let exceed = sups
        .iter()
        .flatten()
        .filter(|&&sup| sup >= delta)
        .count();
    let frequency = if n_eff > 0 { exceed as f64 / n_eff as f64 } else { f64::NAN };
    let se = if n_eff > 0 {
        (frequency * (1.0 - frequency) / n_eff as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok(TailProbe { frequency, se, n_effective: n_eff, degenerate })
}

/// Monte Carlo frequencies of {0 < |Φ(X) - 1/2| ≤ ε} for several widths on
/// one shared path sample; Φ is the oracle score. Returns (frequency, se)
/// per ε. Nested events on a shared sample make the output monotone in ε.
pub fn margin_frequencies(
    model: &MixtureModel,
    epsilons: &[f64],
    n_paths: usize,
    n_steps: usize,
    rng: &mut impl Rng,
) -> Result<Vec<(f64, f64)>, BoundsError> {
    for &eps in epsilons {
        if !(eps > 0.0 && eps < 0.125) {
            return Err(BoundsError::EpsilonOutOfRange(eps));
        }
    }
    let bayes = ClassifierModel::bayes(model);
    let mut gaps = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let label = sample_label(model.p1(), rng).expect("validated p1");
        let path = simulate_path(model, label, n_steps, rng);
        gaps.push((regression_score(&bayes, &path) - 0.5).abs());
    }
    Ok(epsilons
        .iter()
        .map(|&eps| {
            let hits = gaps.iter().filter(|&&g| g > 0.0 && g <= eps).count();
            let f = hits as f64 / n_paths as f64;
            (f, (f * (1.0 - f) / n_paths as f64).sqrt())
        })
        .collect())
}

/// Single-ε form of `margin_frequencies`.
pub fn margin_probe(
    model: &MixtureModel,
    epsilon: f64,
    n_paths: usize,
    n_steps: usize,
    rng: &mut impl Rng,
) -> Result<(f64, f64), BoundsError> {
    Ok(margin_frequencies(model, &[epsilon], n_paths, n_steps, rng)?[0])
}

/// Per-path noise functional Z = Σ (b1-b0)(x_k)·dW_k paired with the
/// isometry integrand V = Δ·Σ (b1-b0)²(x_k); E[Z²] = E[V].
pub fn zt_with_isometry(
    model: &MixtureModel,
    n_paths: usize,
    n_steps: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<f64>, Vec<f64>), BoundsError> {
    if drift_sup_distance(&model.b0, &model.b1, 1001) == 0.0 {
        return Err(BoundsError::DegenerateModel);
    }
    let mut zs = Vec::with_capacity(n_paths);
    let mut vs = Vec::with_capacity(n_paths);
    for _ in 0..n_paths {
        let label = sample_label(model.p1(), rng).expect("validated p1");
        let path = simulate_path(model, label, n_steps, rng);
        let x = path.x();
        let dw = path.dw();
        let mut z = 0.0;
        let mut v = 0.0;
        for k in 0..path.n_steps() {
            let gap = model.b1.eval(x[k]) - model.b0.eval(x[k]);
            z += gap * dw[k];
            v += gap * gap;
        }
        zs.push(z);
        vs.push(v * path.dt());
    }
    Ok((zs, vs))
}

/// Draw the noise-functional sample alone.
pub fn zt_sample(
    model: &MixtureModel,
    n_paths: usize,
    n_steps: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, BoundsError> {
    Ok(zt_with_isometry(model, n_paths, n_steps, rng)?.0)
}

/// Histogram summary of a Z_T sample.
#[derive(Debug, Clone, Copy)]
pub struct ZtDiagnostics {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    /// Largest bin frequency divided by the bin width.
    pub max_bin_density: f64,
    pub n_bins: usize,
}

/// 50-bin histogram diagnostics over the sample range.
pub fn zt_diagnostics(samples: &[f64]) -> ZtDiagnostics {
    let n_bins = 50usize;
    let (mean, variance) = crate::numeric::mean_var(samples);
    let lo = samples.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = ((hi - lo) / n_bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0usize; n_bins];
    for &s in samples {
        let idx = (((s - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let max_count = counts.iter().copied().max().unwrap_or(0);
    ZtDiagnostics {
        mean,
        variance,
        se_mean: (variance / samples.len() as f64).sqrt(),
        max_bin_density: max_count as f64 / (samples.len() as f64 * width),
        n_bins,
    }
}
