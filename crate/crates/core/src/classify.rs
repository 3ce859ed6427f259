//! Likelihood-ratio classification of diffusion paths.
//!
//! For a drift pair (b0, b1) and class probabilities (p0, p1), the optimal
//! rule thresholds the posterior
//!
//!   Φ(X) = p1·exp(F1(X)) / (p0·exp(F0(X)) + p1·exp(F1(X))),
//!
//! where F_i(X) = ∫ b_i(X_t) dX_t - ½ ∫ b_i²(X_t) dt is the log likelihood
//! ratio of the drifted law against the driftless one. The score is
//! computed in log-odds space, logistic(log(p1/p0) + F1 - F0) — algebraically
//! identical to the ratio form, which overflows for |F| beyond ~700.
//!
//! The plug-in classifier is the same rule with fitted drifts (evaluated by
//! linear interpolation between their grid points) and empirical class
//! frequencies. Risk is measured by Monte Carlo on a fresh test set; the
//! plug-in and the Bayes rule are always scored on the identical paths, so
//! the excess-risk estimate is a common-random-numbers difference.

use crate::drifts::DriftFunction;
use crate::estimate::NWEstimate;
use crate::numeric::logistic;
use crate::simulate::{sample_label, simulate_path, DiffusionPath, Label, MixtureModel};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("cannot compute class proportions of an empty sample")]
    EmptySample,
    #[error("class probabilities must lie in (0,1): got ({0}, {1})")]
    InvalidProportions(f64, f64),
}

/// Empirical class frequencies (p̂0, p̂1); they sum to 1 exactly.
pub fn class_proportions(labels: &[Label]) -> Result<(f64, f64), ClassifyError> {
    if labels.is_empty() {
        return Err(ClassifyError::EmptySample);
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    let p1 = ones as f64 / labels.len() as f64;
    Ok((1.0 - p1, p1))
}

/// A drift as the classifier sees it: the model's true function or a fit.
#[derive(Debug, Clone)]
pub enum DriftSource {
    True(DriftFunction),
    Fitted(NWEstimate),
}

impl DriftSource {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DriftSource::True(d) => d.eval(x),
            DriftSource::Fitted(e) => e.eval(x),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassifierKind {
    Bayes,
    Plugin,
}

/// A drift pair plus class probabilities; everything `predict` needs.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    pub b0: DriftSource,
    pub b1: DriftSource,
    p0: f64,
    p1: f64,
    kind: ClassifierKind,
}

impl ClassifierModel {
    /// The oracle classifier, built from the model's true parameters.
    pub fn bayes(model: &MixtureModel) -> Self {
        ClassifierModel {
            b0: DriftSource::True(model.b0.clone()),
            b1: DriftSource::True(model.b1.clone()),
            p0: model.p0(),
            p1: model.p1(),
            kind: ClassifierKind::Bayes,
        }
    }

    /// The plug-in classifier from fitted drifts and estimated frequencies.
    pub fn plugin(
        b0: NWEstimate,
        b1: NWEstimate,
        proportions: (f64, f64),
    ) -> Result<Self, ClassifyError> {
        Self::from_parts(
            DriftSource::Fitted(b0),
            DriftSource::Fitted(b1),
            proportions,
            ClassifierKind::Plugin,
        )
    }

    pub fn from_parts(
        b0: DriftSource,
        b1: DriftSource,
        proportions: (f64, f64),
        kind: ClassifierKind,
    ) -> Result<Self, ClassifyError> {
        let (p0, p1) = proportions;
        if !(p0 > 0.0 && p0 < 1.0 && p1 > 0.0 && p1 < 1.0) || (p0 + p1 - 1.0).abs() > 1e-12 {
            return Err(ClassifyError::InvalidProportions(p0, p1));
        }
        Ok(ClassifierModel { b0, b1, p0, p1, kind })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }
}

/// Log likelihood ratio functional F_b(X) = ∫ b(X_t) dX_t - ½ ∫ b²(X_t) dt,
/// with left-endpoint sums. The drift is evaluated once per grid point.
pub fn girsanov_functional<F: Fn(f64) -> f64>(path: &DiffusionPath, b: F) -> f64 {
    let x = path.x();
    let mut ito = 0.0;
    let mut sq = 0.0;
    for k in 0..path.n_steps() {
        let bv = b(x[k]);
        ito += bv * (x[k + 1] - x[k]);
        sq += bv * bv;
    }
    ito - 0.5 * sq * path.dt()
}

/// Posterior score from precomputed functionals, kept strictly inside (0,1).
pub fn regression_score_from(f0: f64, f1: f64, p0: f64, p1: f64) -> f64 {
    let z = (p1 / p0).ln() + (f1 - f0);
    logistic(z).max(f64::MIN_POSITIVE).min(1.0f64.next_down())
}

/// Posterior probability of class 1 given the path, Φ(X) ∈ (0, 1).
pub fn regression_score(model: &ClassifierModel, path: &DiffusionPath) -> f64 {
    let f0 = girsanov_functional(path, |x| model.b0.eval(x));
    let f1 = girsanov_functional(path, |x| model.b1.eval(x));
    regression_score_from(f0, f1, model.p0, model.p1)
}

/// Predicted label: 1 iff Φ(X) ≥ 1/2 (ties predict 1).
pub fn predict(model: &ClassifierModel, path: &DiffusionPath) -> Label {
    (regression_score(model, path) >= 0.5) as Label
}

/// One scored test path.
#[derive(Debug, Clone)]
pub struct PredictionRow {
    pub path_id: usize,
    pub label: Label,
    pub phi: f64,
    pub predicted: Label,
    pub bayes_predicted: Label,
}

/// Misclassification report for a plug-in classifier against the oracle.
#[derive(Debug, Clone, Copy)]
pub struct RiskReport {
    /// Plug-in misclassification frequency.
    pub risk: f64,
    /// Oracle misclassification frequency on the same test paths.
    pub bayes_risk: f64,
    /// risk - bayes_risk.
    pub excess: f64,
    pub n_test: usize,
    /// Binomial standard error of `risk`.
    pub se: f64,
}

/// Draw a fresh labeled test set and score both classifiers on the
/// identical paths.
pub fn score_test_set(
    plugin: &ClassifierModel,
    bayes: &ClassifierModel,
    model: &MixtureModel,
    n_test: usize,
    n_steps: usize,
    rng: &mut impl Rng,
) -> Vec<PredictionRow> {
    (0..n_test)
        .map(|path_id| {
            let label = sample_label(model.p1(), rng).expect("validated p1");
            let path = simulate_path(model, label, n_steps, rng);
            let phi = regression_score(plugin, &path);
            PredictionRow {
                path_id,
                label,
                phi,
                predicted: (phi >= 0.5) as Label,
                bayes_predicted: predict(bayes, &path),
            }
        })
        .collect()
}

/// Monte Carlo excess risk of `plugin` over `bayes` on `n_test` fresh paths.
pub fn excess_risk_mc(
    plugin: &ClassifierModel,
    bayes: &ClassifierModel,
    model: &MixtureModel,
    n_test: usize,
    n_steps: usize,
    rng: &mut impl Rng,
) -> RiskReport {
    let rows = score_test_set(plugin, bayes, model, n_test, n_steps, rng);
    risk_report(&rows)
}

/// Aggregate scored rows into a risk report.
pub fn risk_report(rows: &[PredictionRow]) -> RiskReport {
    let n = rows.len();
    let errs = rows.iter().filter(|r| r.predicted != r.label).count();
    let bayes_errs = rows.iter().filter(|r| r.bayes_predicted != r.label).count();
    let risk = errs as f64 / n as f64;
    let bayes_risk = bayes_errs as f64 / n as f64;
    RiskReport {
        risk,
        bayes_risk,
        excess: risk - bayes_risk,
        n_test: n,
        se: (risk * (1.0 - risk) / n as f64).sqrt(),
    }
}
