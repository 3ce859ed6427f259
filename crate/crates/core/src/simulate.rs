//! Path simulation and pathwise integrals for the labeled diffusion model
//! dX_t = b_Y(X_t) dt + dW_t on [0, T].
//!
//! Paths are Euler–Maruyama discretizations on a uniform grid; the Brownian
//! increments are stored alongside the states so diagnostics can integrate
//! against dW directly. Itô sums use left endpoints throughout — midpoint or
//! right-endpoint sums would estimate Stratonovich-shifted quantities and
//! silently corrupt the likelihood functionals.
//!
//! Monte Carlo density oracles:
//! * `transition_density_mc` — the class-conditional transition density via
//!   the Brownian-bridge representation
//!   Γ(s,t,x,y) = Λ/sqrt(2π(t-s)) · exp(-(y-x)²/(2(t-s)) + ∫_x^y f) with
//!   Λ = E[exp((t-s)·∫₀¹ G((1-u)x + uy + sqrt(t-s)·B_u) du)], G = -(f² + f')/2
//!   and B a Brownian bridge on [0, 1].
//! * `occupation_density_mc` — the time-averaged state density
//!   f_i(x) = (1/(T-t₀)) ∫_{t₀}^T Γ_i(0, t, x₀, x) dt by binning simulated
//!   (path, time) pairs.
//!
//! Drifts used in simulation must be globally defined; hypercube drifts
//! should be constructed with `extend = true`.

use crate::drifts::{drift_sup_distance, DriftFunction};
use crate::numeric;
use crate::rng::Streams;
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

pub type Label = u8;

/// Grid resolution for Brownian-bridge replicates in `transition_density_mc`.
const BRIDGE_GRID: usize = 200;

/// Finite-difference step for the drift derivative inside the bridge factor.
const DERIV_STEP: f64 = 1e-5;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("class-1 probability must lie in (0,1), got {0}")]
    InvalidProbability(f64),
    #[error("invalid time window: from={from} must lie in [0, {until})")]
    InvalidWindow { from: f64, until: f64 },
    #[error("mixture model needs distinct drifts (sup distance was 0)")]
    IdenticalDrifts,
    #[error("time horizon must be positive, got {0}")]
    InvalidHorizon(f64),
}

/// The binary mixture: class label Y ~ Bernoulli(p1), path drift b_Y.
#[derive(Debug, Clone)]
pub struct MixtureModel {
    pub b0: DriftFunction,
    pub b1: DriftFunction,
    p1: f64,
    x0: f64,
    t_end: f64,
}

impl MixtureModel {
    pub fn new(
        b0: DriftFunction,
        b1: DriftFunction,
        p1: f64,
        x0: f64,
        t_end: f64,
    ) -> Result<Self, SimError> {
        if !(p1 > 0.0 && p1 < 1.0) {
            return Err(SimError::InvalidProbability(p1));
        }
        if !(t_end > 0.0) {
            return Err(SimError::InvalidHorizon(t_end));
        }
        if drift_sup_distance(&b0, &b1, 1001) == 0.0 {
            return Err(SimError::IdenticalDrifts);
        }
        Ok(MixtureModel { b0, b1, p1, x0, t_end })
    }

    /// Skip the distinct-drift check; for diagnostics that deliberately
    /// probe the degenerate b0 = b1 case.
    pub fn new_unchecked(
        b0: DriftFunction,
        b1: DriftFunction,
        p1: f64,
        x0: f64,
        t_end: f64,
    ) -> Self {
        MixtureModel { b0, b1, p1, x0, t_end }
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p0(&self) -> f64 {
        1.0 - self.p1
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn drift(&self, label: Label) -> &DriftFunction {
        if label == 0 {
            &self.b0
        } else {
            &self.b1
        }
    }
}

/// A discretized trajectory on the uniform grid t_k = k·(T/n).
#[derive(Debug, Clone)]
pub struct DiffusionPath {
    x: Vec<f64>,
    dw: Vec<f64>,
    x0: f64,
    t_end: f64,
    label: Option<Label>,
}

impl DiffusionPath {
    pub fn n_steps(&self) -> usize {
        self.dw.len()
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Brownian increments actually applied, length `n_steps`.
    pub fn dw(&self) -> &[f64] {
        &self.dw
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn label(&self) -> Option<Label> {
        self.label
    }

    /// Index of the grid point nearest to `from_t`.
    fn snap(&self, from_t: f64) -> usize {
        ((from_t / self.dt()).round() as usize).min(self.n_steps())
    }
}

/// Draw a class label, 1 with probability `p1`.
pub fn sample_label(p1: f64, rng: &mut impl Rng) -> Result<Label, SimError> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(SimError::InvalidProbability(p1));
    }
    Ok((rng.random::<f64>() < p1) as Label)
}

/// Euler–Maruyama with caller-provided increments:
/// x_{k+1} = x_k + b(x_k)·Δ + dw_k. Zero increments give the drift ODE.
pub fn simulate_with_increments(
    drift: &DriftFunction,
    x0: f64,
    t_end: f64,
    dw: Vec<f64>,
    label: Option<Label>,
) -> DiffusionPath {
    let n = dw.len();
    let dt = t_end / n as f64;
    let mut x = Vec::with_capacity(n + 1);
    x.push(x0);
    let mut state = x0;
    for &inc in &dw {
        state = state + drift.eval(state) * dt + inc;
        x.push(state);
    }
    DiffusionPath { x, dw, x0, t_end, label }
}

/// Simulate one path of the given class; increments dW_k ~ N(0, Δ) are
/// drawn from `rng` and stored on the path.
pub fn simulate_path(
    model: &MixtureModel,
    label: Label,
    n_steps: usize,
    rng: &mut impl Rng,
) -> DiffusionPath {
    assert!(n_steps >= 1);
    let dt = model.t_end / n_steps as f64;
    let sd = dt.sqrt();
    let dw: Vec<f64> = (0..n_steps)
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    simulate_with_increments(model.drift(label), model.x0, model.t_end, dw, Some(label))
}

/// Draw `n` labeled paths. Path j consumes only the derived stream
/// `ids ++ [j]` (label first, then increments), so the sample is identical
/// however the loop is scheduled.
pub fn sample_labeled_paths(
    model: &MixtureModel,
    n: usize,
    n_steps: usize,
    streams: &Streams,
    ids: &[u64],
) -> Vec<DiffusionPath> {
    (0..n)
        .map(|j| {
            let mut path_ids = ids.to_vec();
            path_ids.push(j as u64);
            let mut rng = streams.rng(&path_ids);
            let label = sample_label(model.p1, &mut rng).expect("validated p1");
            simulate_path(model, label, n_steps, &mut rng)
        })
        .collect()
}

/// Left-endpoint Itô sum Σ g(x_k)(x_{k+1} - x_k) over the whole horizon.
pub fn ito_integral<F: Fn(f64) -> f64>(path: &DiffusionPath, g: F) -> f64 {
    ito_integral_from(path, g, 0.0)
}

/// Left-endpoint Itô sum over grid times t_k ≥ from_t (snapped to the grid).
pub fn ito_integral_from<F: Fn(f64) -> f64>(path: &DiffusionPath, g: F, from_t: f64) -> f64 {
    let x = &path.x;
    let mut acc = 0.0;
    for k in path.snap(from_t)..path.n_steps() {
        acc += g(x[k]) * (x[k + 1] - x[k]);
    }
    acc
}

/// Left-endpoint Riemann sum Δ·Σ g(x_k) over grid times t_k in [from_t, T).
pub fn time_integral<F: Fn(f64) -> f64>(
    path: &DiffusionPath,
    g: F,
    from_t: f64,
) -> Result<f64, SimError> {
    if !(from_t >= 0.0 && from_t < path.t_end) {
        return Err(SimError::InvalidWindow { from: from_t, until: path.t_end });
    }
    let x = &path.x;
    let mut acc = 0.0;
    for k in path.snap(from_t)..path.n_steps() {
        acc += g(x[k]);
    }
    Ok(acc * path.dt())
}

/// Monte Carlo estimate of the class-conditional transition density
/// Γ(s, t, x, y) for the drift `f`, via the Brownian-bridge factor.
///
/// Each of the `n_bridge` replicates samples a bridge on a fixed
/// 200-point grid by the conditioned-walk construction B_u = W_u - u·W_1.
pub fn transition_density_mc(
    drift: &DriftFunction,
    s: f64,
    t: f64,
    x: f64,
    y: f64,
    n_bridge: usize,
    rng: &mut impl Rng,
) -> Result<f64, SimError> {
    if !(s >= 0.0 && s < t) {
        return Err(SimError::InvalidWindow { from: s, until: t });
    }
    let span = t - s;
    let gauss = (-(y - x) * (y - x) / (2.0 * span)).exp()
        / (2.0 * std::f64::consts::PI * span).sqrt();
    let drift_integral = numeric::integrate(&|u| drift.eval(u), x, y, 1e-12);

    let g_term = |u: f64| {
        let f = drift.eval(u);
        let fp = (drift.eval(u + DERIV_STEP) - drift.eval(u - DERIV_STEP)) / (2.0 * DERIV_STEP);
        -0.5 * (f * f + fp)
    };

    let m = BRIDGE_GRID;
    let du = 1.0 / (m - 1) as f64;
    let sd = du.sqrt();
    let scale = span.sqrt();
    let mut lambda_acc = 0.0;
    let mut walk = vec![0.0; m];
    for _ in 0..n_bridge {
        let mut w = 0.0;
        for slot in walk.iter_mut().skip(1) {
            w += sd * rng.sample::<f64, _>(StandardNormal);
            *slot = w;
        }
        let w_end = walk[m - 1];
        let mut integral = 0.0;
        for (j, &wj) in walk.iter().enumerate().take(m - 1) {
            let u = j as f64 * du;
            let bridge = wj - u * w_end;
            integral += g_term((1.0 - u) * x + u * y + scale * bridge);
        }
        lambda_acc += (span * integral * du).exp();
    }
    let lambda = lambda_acc / n_bridge as f64;
    Ok(lambda * gauss * drift_integral.exp())
}

/// Monte Carlo estimate of the occupation density f_i at each grid point:
/// the fraction of (path, grid-time ≥ t0) pairs landing in the bin of width
/// `bin_width` around the point, divided by the bin width.
///
/// All grid points share one simulated path set drawn from `rng`.
pub fn occupation_density_grid(
    model: &MixtureModel,
    label: Label,
    grid: &[f64],
    t0: f64,
    n_paths: usize,
    n_steps: usize,
    bin_width: f64,
    rng: &mut impl Rng,
) -> Result<Vec<f64>, SimError> {
    if !(t0 > 0.0 && t0 < model.t_end) {
        return Err(SimError::InvalidWindow { from: t0, until: model.t_end });
    }
    let half = bin_width / 2.0;
    let mut counts = vec![0u64; grid.len()];
    let mut pairs = 0u64;
    for _ in 0..n_paths {
        let path = simulate_path(model, label, n_steps, rng);
        let k0 = path.snap(t0);
        for k in k0..n_steps {
            let xt = path.x[k];
            pairs += 1;
            for (g, count) in grid.iter().zip(counts.iter_mut()) {
                if (xt - g).abs() <= half {
                    *count += 1;
                }
            }
        }
    }
    Ok(counts
        .iter()
        .map(|&c| c as f64 / (pairs as f64 * bin_width))
        .collect())
}

/// Single-point convenience form of `occupation_density_grid`.
pub fn occupation_density_mc(
    model: &MixtureModel,
    label: Label,
    x: f64,
    t0: f64,
    n_paths: usize,
    n_steps: usize,
    bin_width: f64,
    rng: &mut impl Rng,
) -> Result<f64, SimError> {
    Ok(occupation_density_grid(model, label, &[x], t0, n_paths, n_steps, bin_width, rng)?[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drifts::{make_bump_drift, make_constant_drift, make_zero_drift};
    use crate::numeric::mean_var;

    fn zero_model() -> MixtureModel {
        // b0 = 0 vs a bump; for tests that only simulate class 0 this is a
        // plain Brownian motion
        MixtureModel::new(
            make_zero_drift(),
            make_bump_drift(-1.0, 1.0, 1.0, 1.0, 1.0).unwrap(),
            0.5,
            0.0,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn label_sampling_frequency_and_tail() {
        let streams = Streams::new(11);
        let mut rng = streams.rng(&[0]);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_label(0.5, &mut rng).unwrap() as f64)
            .sum::<f64>()
            / n as f64;
        assert!((0.49..=0.51).contains(&mean), "mean={mean}");

        let mut rng = streams.rng(&[1]);
        let ones: u32 = (0..1000)
            .map(|_| sample_label(0.999, &mut rng).unwrap() as u32)
            .sum();
        assert!(ones >= 990, "ones={ones}");

        assert!(sample_label(0.0, &mut rng).is_err());
        assert!(sample_label(1.0, &mut rng).is_err());
    }

    #[test]
    fn label_sequence_is_seed_deterministic() {
        let streams = Streams::new(5);
        let draw = || {
            let mut rng = streams.rng(&[2]);
            (0..64)
                .map(|_| sample_label(0.3, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn zero_drift_steps_recover_increments() {
        let model = zero_model();
        let streams = Streams::new(3);
        let mut rng = streams.rng(&[0]);
        let path = simulate_path(&model, 0, 500, &mut rng);
        assert_eq!(path.x().len(), 501);
        assert_eq!(path.dw().len(), 500);
        assert_eq!(path.x()[0], path.x0());
        for k in 0..path.n_steps() {
            // the update is x_{k+1} = x_k + dw_k; recomputing it is bit-exact
            assert_eq!(path.x()[k + 1], path.x()[k] + path.dw()[k]);
        }
    }

    #[test]
    fn terminal_variance_matches_brownian_motion() {
        let model = zero_model();
        let streams = Streams::new(17);
        let n_paths = 10_000;
        let samples: Vec<f64> = (0..n_paths)
            .map(|j| {
                let mut rng = streams.rng(&[9, j]);
                let p = simulate_path(&model, 0, 1000, &mut rng);
                p.x()[p.n_steps()] - p.x0()
            })
            .collect();
        let (_, var) = mean_var(&samples);
        assert!((0.96..=1.04).contains(&var), "var={var}");
    }

    #[test]
    fn deterministic_constant_drift_is_exact() {
        // dyadic step and rate: every partial sum is exactly representable
        let c = 2.0;
        let drift = make_constant_drift(c);
        let path = simulate_with_increments(&drift, 0.0, 1.0, vec![0.0; 512], None);
        assert_eq!(path.x()[512], c * 1.0);
    }

    #[test]
    fn ito_telescoping_and_zero_integrand() {
        let model = zero_model();
        let streams = Streams::new(23);
        for j in 0..20 {
            let mut rng = streams.rng(&[j]);
            let path = simulate_path(&model, 1, 500, &mut rng);
            let total = ito_integral(&path, |_| 1.0);
            let direct = path.x()[path.n_steps()] - path.x0();
            assert!((total - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
            assert_eq!(ito_integral(&path, |_| 0.0), 0.0);
        }
    }

    #[test]
    fn ito_telescoping_exact_on_dyadic_path() {
        // increments are dyadic, so sums and differences are all exact
        let dw: Vec<f64> = (0..64)
            .map(|k| if k % 2 == 0 { 0.25 } else { -0.125 })
            .collect();
        let drift = make_zero_drift();
        let path = simulate_with_increments(&drift, 0.5, 1.0, dw, None);
        let total = ito_integral(&path, |_| 1.0);
        assert_eq!(total, path.x()[64] - 0.5);
    }

    #[test]
    fn ito_integral_is_centered_for_martingale() {
        let model = zero_model();
        let streams = Streams::new(29);
        let n_paths = 10_000;
        let vals: Vec<f64> = (0..n_paths)
            .map(|j| {
                let mut rng = streams.rng(&[j]);
                let p = simulate_path(&model, 0, 500, &mut rng);
                ito_integral(&p, |x| x)
            })
            .collect();
        let (mean, var) = mean_var(&vals);
        let se = (var / n_paths as f64).sqrt();
        assert!(mean.abs() <= 3.0 * se, "mean={mean} se={se}");
    }

    #[test]
    fn time_integral_windows() {
        let model = zero_model();
        let streams = Streams::new(31);
        let mut rng = streams.rng(&[0]);
        let path = simulate_path(&model, 0, 500, &mut rng);
        let full = time_integral(&path, |_| 1.0, 0.0).unwrap();
        assert!((full - 1.0).abs() < 1e-12);
        let half = time_integral(&path, |_| 1.0, 0.5).unwrap();
        assert!((half - 0.5).abs() <= path.dt() + 1e-12);
        let c = 3.25;
        let third = time_integral(&path, |_| c, 0.3).unwrap();
        assert!((third - c * 0.7).abs() <= c * path.dt() + 1e-12);
        assert!(time_integral(&path, |_| 1.0, 1.0).is_err());
        assert!(time_integral(&path, |_| 1.0, -0.1).is_err());
    }

    #[test]
    fn transition_density_gaussian_cases() {
        let drift = make_zero_drift();
        let streams = Streams::new(37);
        let mut rng = streams.rng(&[0]);
        // zero drift: Λ = 1 exactly, density is the Gaussian kernel
        let d0 = transition_density_mc(&drift, 0.0, 1.0, 0.0, 0.0, 100, &mut rng).unwrap();
        let expected0 = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!((d0 - expected0).abs() < 1e-13);

        let d1 = transition_density_mc(&drift, 0.0, 1.0, 0.0, 1.0, 100, &mut rng).unwrap();
        let expected1 = expected0 * (-0.5f64).exp();
        assert!((d1 - expected1).abs() < 1e-13);

        assert!(transition_density_mc(&drift, 1.0, 1.0, 0.0, 0.0, 10, &mut rng).is_err());
    }

    #[test]
    fn transition_density_matches_endpoint_histogram() {
        let drift = make_bump_drift(-1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let streams = Streams::new(41);

        let t = 0.5;
        let n_paths = 100_000usize;
        let bin = 0.02;
        let mut hits = 0u64;
        for j in 0..n_paths {
            let mut rng = streams.rng(&[1, j as u64]);
            let n = 250;
            let dt = t / n as f64;
            let sd = dt.sqrt();
            let mut x = 0.0;
            for _ in 0..n {
                x += drift.eval(x) * dt + sd * rng.sample::<f64, _>(StandardNormal);
            }
            if x.abs() <= bin / 2.0 {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / n_paths as f64;
        let hist = p_hat / bin;
        let se_hist = (p_hat * (1.0 - p_hat) / n_paths as f64).sqrt() / bin;

        let mut rng = streams.rng(&[2]);
        let mc = transition_density_mc(&drift, 0.0, t, 0.0, 0.0, 4000, &mut rng).unwrap();
        // bridge-factor standard error, from the spread of a fresh small run
        let reps: Vec<f64> = (0..30)
            .map(|j| {
                let mut r = streams.rng(&[3, j]);
                transition_density_mc(&drift, 0.0, t, 0.0, 0.0, 200, &mut r).unwrap()
            })
            .collect();
        let (_, var) = mean_var(&reps);
        let se_mc = (var * 200.0 / 4000.0 / 30.0).sqrt().max(1e-4);

        let tol = 3.0 * (se_hist * se_hist + se_mc * se_mc).sqrt() + 0.01;
        assert!(
            (mc - hist).abs() <= tol,
            "mc={mc} hist={hist} tol={tol}"
        );
    }

    #[test]
    fn occupation_density_zero_drift_oracle() {
        // independent oracle: Simpson quadrature of the averaged Gaussian
        let t0 = 0.1;
        let oracle = {
            let f = |t: f64| 1.0 / (2.0 * std::f64::consts::PI * t).sqrt();
            let n = 20_000;
            let h = (1.0 - t0) / n as f64;
            let mut acc = f(t0) + f(1.0);
            for i in 1..n {
                let w = if i % 2 == 0 { 2.0 } else { 4.0 };
                acc += w * f(t0 + i as f64 * h);
            }
            acc * h / 3.0 / (1.0 - t0)
        };
        let model = zero_model();
        let streams = Streams::new(43);
        let mut rng = streams.rng(&[0]);
        let est =
            occupation_density_mc(&model, 0, 0.0, t0, 20_000, 500, 0.02, &mut rng).unwrap();
        assert!((est - oracle).abs() < 0.02, "est={est} oracle={oracle}");
        assert!(est >= 0.0);
    }

    #[test]
    fn occupation_density_normalizes() {
        let model = zero_model();
        let streams = Streams::new(47);
        let mut rng = streams.rng(&[0]);
        let grid = numeric::uniform_grid(-4.0, 4.0, 401);
        let dens =
            occupation_density_grid(&model, 0, &grid, 0.1, 2000, 500, 0.02, &mut rng).unwrap();
        // trapezoid over the wide grid
        let step = grid[1] - grid[0];
        let mut mass = 0.0;
        for i in 0..dens.len() - 1 {
            mass += 0.5 * (dens[i] + dens[i + 1]) * step;
        }
        assert!((mass - 1.0).abs() <= 0.02, "mass={mass}");
        assert!(dens.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn euler_maruyama_step_halving_consistency() {
        let b = make_bump_drift(-1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let model = MixtureModel::new(make_zero_drift(), b, 0.5, 0.0, 1.0).unwrap();
        let streams = Streams::new(53);
        let n_paths = 5000;
        let terminal = |steps: usize, tag: u64| -> (f64, f64) {
            let vals: Vec<f64> = (0..n_paths)
                .map(|j| {
                    let mut rng = streams.rng(&[tag, j as u64]);
                    let p = simulate_path(&model, 1, steps, &mut rng);
                    p.x()[p.n_steps()]
                })
                .collect();
            let (m, v) = mean_var(&vals);
            (m, (v / n_paths as f64).sqrt())
        };
        let (m500, se500) = terminal(500, 1);
        let (m1000, se1000) = terminal(1000, 2);
        let gap = (m500 - m1000).abs();
        let tol = 3.0 * (se500 * se500 + se1000 * se1000).sqrt();
        assert!(gap <= tol, "gap={gap} tol={tol}");
    }

    #[test]
    fn labels_are_independent_of_noise() {
        let model = zero_model();
        let streams = Streams::new(59);
        let n = 10_000;
        let mut labels = Vec::with_capacity(n);
        let mut sums = Vec::with_capacity(n);
        for j in 0..n {
            let mut rng = streams.rng(&[j as u64]);
            let label = sample_label(0.5, &mut rng).unwrap();
            let path = simulate_path(&model, label, 200, &mut rng);
            labels.push(label as f64);
            sums.push(path.dw().iter().sum::<f64>());
        }
        let (ml, vl) = mean_var(&labels);
        let (ms, vs) = mean_var(&sums);
        let cov = labels
            .iter()
            .zip(&sums)
            .map(|(l, s)| (l - ml) * (s - ms))
            .sum::<f64>()
            / (n as f64 - 1.0);
        let corr = cov / (vl * vs).sqrt();
        let se = 1.0 / (n as f64).sqrt();
        assert!(corr.abs() <= 3.0 * se, "corr={corr}");
    }

    #[test]
    fn path_sets_are_reproducible() {
        let model = zero_model();
        let streams = Streams::new(61);
        let a = sample_labeled_paths(&model, 16, 100, &streams, &[4, 2]);
        let b = sample_labeled_paths(&model, 16, 100, &streams, &[4, 2]);
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.label(), pb.label());
            assert_eq!(pa.x(), pb.x());
            assert_eq!(pa.dw(), pb.dw());
            assert_eq!(
                ito_integral(pa, |x| x.sin()),
                ito_integral(pb, |x| x.sin())
            );
        }
    }
}
