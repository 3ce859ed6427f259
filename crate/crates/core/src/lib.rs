//! Simulation and estimation laboratory for binary classification of
//! diffusion paths.
//!
//! The model: a path X on [0, T] solves dX_t = b_Y(X_t) dt + dW_t, where the
//! drift b_Y depends on a hidden label Y ∈ {0, 1} with P(Y=1) = p1 and the
//! noise is a standard Brownian motion. From N labeled training paths the
//! crate fits Nadaraya–Watson drift estimates, plugs them into the
//! likelihood-ratio classifier, and measures the excess misclassification
//! risk against the Bayes rule by Monte Carlo.
//!
//! Modules:
//! * [`kernels`] — higher-order Legendre kernels and the C^∞ bump kernel.
//! * [`drifts`] — compactly supported drift families, including the
//!   hypercube hypothesis set used for rate-floor experiments.
//! * [`simulate`] — Euler–Maruyama paths, Itô/time integrals, and Monte
//!   Carlo density oracles.
//! * [`estimate`] — the truncated kernel drift estimator and its bandwidth
//!   rule.
//! * [`classify`] — Bayes and plug-in classifiers, risk evaluation.
//! * [`bounds`] — computable deviation-bound constants, tail frequencies,
//!   margin and noise diagnostics.
//! * [`harness`] — experiment configuration, campaign runners, slope
//!   fitting and CSV emission behind the `driftclass` CLI.
//!
//! Everything random is derived from one master seed via [`rng::Streams`];
//! campaigns produce byte-identical outputs for any thread count.

pub mod bounds;
pub mod classify;
pub mod drifts;
pub mod estimate;
pub mod harness;
pub mod kernels;
pub mod numeric;
pub mod rng;
pub mod simulate;
