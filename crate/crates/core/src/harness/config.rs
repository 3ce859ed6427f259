//! Experiment configuration: strict line-oriented `key = value` parsing.
//!
//! Unknown keys, duplicate keys and type mismatches are hard errors that
//! name the offending key and line — a typo must never silently fall back
//! to a default. Absent optional keys take the documented defaults.

use std::collections::HashMap;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: key `{key}` expects {expected}, got `{value}`")]
    TypeMismatch {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("missing required key `{key}`")]
    MissingKey { key: String },
    #[error("key `{key}`: {msg}")]
    Invalid { key: String, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Rates,
    Tails,
    Margin,
    Bias,
    Floor,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Rates => "rates",
            Experiment::Tails => "tails",
            Experiment::Margin => "margin",
            Experiment::Bias => "bias",
            Experiment::Floor => "floor",
        }
    }
}

/// Drift family selection for one class.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftConfig {
    Zero,
    Bump { lo: f64, hi: f64, amplitude: f64 },
    Hypercube { kappa: f64, holder: f64, bump_amplitude: f64 },
}

/// Fully validated experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// 0 means the library's default thread pool.
    pub threads: usize,

    pub p1: f64,
    pub x0: f64,
    pub t_end: f64,
    pub t0: f64,
    pub n_steps: usize,

    pub beta: f64,
    pub gamma: u32,
    /// Fixed truncation level; `None` selects the pilot rule.
    pub m: Option<f64>,
    pub m_pilot_paths: usize,
    pub m_floor: f64,
    pub grid_points: usize,

    pub n_list: Vec<usize>,
    pub replicates: usize,
    pub n_test: usize,
    pub n_paths: usize,

    /// Tail deviations; `None` selects the h^β·log N rule per N.
    pub deltas: Option<Vec<f64>>,
    pub epsilons: Vec<f64>,
    pub bias_h: f64,
    pub bias_point: f64,
    pub bias_class: u8,
    pub tail_class: u8,

    /// Class-1 drift.
    pub drift1: DriftConfig,
    /// Class-0 drift.
    pub drift0: DriftConfig,
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "seed",
    "output_dir",
    "threads",
    "p1",
    "x0",
    "T",
    "t0",
    "n_steps",
    "beta",
    "gamma",
    "m",
    "m_pilot_paths",
    "m_floor",
    "grid_points",
    "N",
    "replicates",
    "n_test",
    "n_paths",
    "delta",
    "epsilon",
    "bias_h",
    "bias_point",
    "bias_class",
    "tail_class",
    "drift.kind",
    "drift.support_lo",
    "drift.support_hi",
    "drift.amplitude",
    "drift.kappa",
    "drift.holder",
    "drift.bump_amplitude",
    "drift0.kind",
    "drift0.support_lo",
    "drift0.support_hi",
    "drift0.amplitude",
];

struct RawConfig {
    entries: HashMap<String, (usize, String)>,
}

impl RawConfig {
    fn get(&self, key: &str) -> Option<&(usize, String)> {
        self.entries.get(key)
    }

    fn parse_with<T>(
        &self,
        key: &str,
        expected: &'static str,
        f: impl Fn(&str) -> Option<T>,
    ) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some((line, value)) => f(value).map(Some).ok_or(ConfigError::TypeMismatch {
                line: *line,
                key: key.to_string(),
                expected,
                value: value.clone(),
            }),
        }
    }

    fn f64(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        Ok(self
            .parse_with(key, "a real number", |v| v.parse::<f64>().ok())?
            .unwrap_or(default))
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.parse_with(key, "a real number", |v| v.parse::<f64>().ok())
    }

    fn usize(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        Ok(self
            .parse_with(key, "a nonnegative integer", |v| v.parse::<usize>().ok())?
            .unwrap_or(default))
    }

    fn u64(&self, key: &str, default: u64) -> Result<u64, ConfigError> {
        Ok(self
            .parse_with(key, "a nonnegative integer", |v| v.parse::<u64>().ok())?
            .unwrap_or(default))
    }

    fn u8_class(&self, key: &str, default: u8) -> Result<u8, ConfigError> {
        Ok(self
            .parse_with(key, "a class label (0 or 1)", |v| match v {
                "0" => Some(0u8),
                "1" => Some(1u8),
                _ => None,
            })?
            .unwrap_or(default))
    }

    fn string(&self, key: &str, default: &str) -> Result<String, ConfigError> {
        Ok(self
            .get(key)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| default.to_string()))
    }

    fn usize_list(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, ConfigError> {
        Ok(self
            .parse_with(key, "a comma-separated list of integers", |v| {
                v.split(',')
                    .map(|s| s.trim().parse::<usize>().ok())
                    .collect::<Option<Vec<_>>>()
            })?
            .unwrap_or_else(|| default.to_vec()))
    }

    fn f64_list_opt(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.parse_with(key, "a comma-separated list of reals", |v| {
            v.split(',')
                .map(|s| s.trim().parse::<f64>().ok())
                .collect::<Option<Vec<_>>>()
        })
    }
}

fn invalid(key: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), msg: msg.into() }
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut entries: HashMap<String, (usize, String)> = HashMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: line_no,
            text: line.to_string(),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey { line: line_no, key });
        }
        if entries.contains_key(&key) {
            return Err(ConfigError::DuplicateKey { line: line_no, key });
        }
        entries.insert(key, (line_no, value));
    }
    let raw = RawConfig { entries };

    let experiment = match raw.get("experiment") {
        None => return Err(ConfigError::MissingKey { key: "experiment".into() }),
        Some((line, v)) => match v.as_str() {
            "rates" => Experiment::Rates,
            "tails" => Experiment::Tails,
            "margin" => Experiment::Margin,
            "bias" => Experiment::Bias,
            "floor" => Experiment::Floor,
            other => {
                return Err(ConfigError::TypeMismatch {
                    line: *line,
                    key: "experiment".into(),
                    expected: "one of rates|tails|margin|bias|floor",
                    value: other.to_string(),
                })
            }
        },
    };

    let t_end = raw.f64("T", 1.0)?;
    let beta = raw.f64("beta", 1.0)?;
    let default_gamma = (2.0 * beta.floor()) as u32;

    let drift_kind = |prefix: &str, default_kind: &str| -> Result<DriftConfig, ConfigError> {
        let kind_key = format!("{prefix}.kind");
        let kind = raw.string(&kind_key, default_kind)?;
        match kind.as_str() {
            "zero" => Ok(DriftConfig::Zero),
            "bump" => Ok(DriftConfig::Bump {
                lo: raw.f64(&format!("{prefix}.support_lo"), -1.0)?,
                hi: raw.f64(&format!("{prefix}.support_hi"), 1.0)?,
                amplitude: raw.f64(&format!("{prefix}.amplitude"), if prefix == "drift" { 1.0 } else { 0.5 })?,
            }),
            "hypercube" => Ok(DriftConfig::Hypercube {
                kappa: raw.f64("drift.kappa", 8.0)?,
                holder: raw.f64("drift.holder", 8.0)?,
                bump_amplitude: raw.f64("drift.bump_amplitude", 1.0)?,
            }),
            other => {
                let line = raw.get(&kind_key).map(|(l, _)| *l).unwrap_or(0);
                Err(ConfigError::TypeMismatch {
                    line,
                    key: kind_key,
                    expected: "one of bump|hypercube|zero",
                    value: other.to_string(),
                })
            }
        }
    };

    let cfg = ExperimentConfig {
        experiment,
        seed: raw.u64("seed", 0)?,
        output_dir: PathBuf::from(raw.string("output_dir", "out")?),
        threads: raw.usize("threads", 0)?,
        p1: raw.f64("p1", 0.5)?,
        x0: raw.f64("x0", 0.0)?,
        t_end,
        t0: raw.f64("t0", 0.1 * t_end)?,
        n_steps: raw.usize("n_steps", 500)?,
        beta,
        gamma: raw.u64("gamma", default_gamma as u64)? as u32,
        m: raw.f64_opt("m")?,
        m_pilot_paths: raw.usize("m_pilot_paths", 10_000)?,
        m_floor: raw.f64("m_floor", 1e-3)?,
        grid_points: raw.usize("grid_points", 201)?,
        n_list: raw.usize_list("N", &[64, 128, 256, 512, 1024, 2048, 4096])?,
        replicates: raw.usize("replicates", 50)?,
        n_test: raw.usize("n_test", 4000)?,
        n_paths: raw.usize("n_paths", 10_000)?,
        deltas: raw.f64_list_opt("delta")?,
        epsilons: raw
            .f64_list_opt("epsilon")?
            .unwrap_or_else(|| vec![0.02, 0.04, 0.08]),
        bias_h: raw.f64("bias_h", 0.25)?,
        bias_point: raw.f64("bias_point", 0.0)?,
        bias_class: raw.u8_class("bias_class", 0)?,
        tail_class: raw.u8_class("tail_class", 1)?,
        drift1: drift_kind("drift", "bump")?,
        drift0: drift_kind("drift0", "zero")?,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if !(cfg.p1 > 0.0 && cfg.p1 < 1.0) {
        return Err(invalid("p1", "must lie in (0,1)"));
    }
    if !(cfg.t_end > 0.0) {
        return Err(invalid("T", "must be positive"));
    }
    if !(cfg.t0 > 0.0 && cfg.t0 < cfg.t_end) {
        return Err(invalid("t0", "must lie in (0, T)"));
    }
    if cfg.n_steps == 0 {
        return Err(invalid("n_steps", "must be at least 1"));
    }
    if !(cfg.beta >= 1.0) {
        return Err(invalid("beta", "must be >= 1"));
    }
    if cfg.gamma == 0 {
        return Err(invalid("gamma", "must be at least 1"));
    }
    if let Some(m) = cfg.m {
        if !(m > 0.0) {
            return Err(invalid("m", "must be positive when fixed"));
        }
    }
    if cfg.grid_points < 2 {
        return Err(invalid("grid_points", "must be at least 2"));
    }
    if cfg.n_list.is_empty() {
        return Err(invalid("N", "must be nonempty"));
    }
    if cfg.n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("N", "must be strictly increasing"));
    }
    if cfg.n_list[0] < 2 {
        return Err(invalid("N", "sample sizes must be at least 2"));
    }
    if cfg.replicates == 0 {
        return Err(invalid("replicates", "must be at least 1"));
    }
    if cfg.n_test == 0 {
        return Err(invalid("n_test", "must be at least 1"));
    }
    for &e in &cfg.epsilons {
        if !(e > 0.0 && e < 0.125) {
            return Err(invalid("epsilon", "margin widths must lie in (0, 1/8)"));
        }
    }
    if !(cfg.bias_h > 0.0) {
        return Err(invalid("bias_h", "must be positive"));
    }
    if let Some(deltas) = &cfg.deltas {
        if deltas.iter().any(|d| *d < 0.0) {
            return Err(invalid("delta", "deviations must be nonnegative"));
        }
    }
    match (&cfg.drift1, cfg.experiment) {
        (DriftConfig::Hypercube { .. }, Experiment::Floor) => {}
        (DriftConfig::Hypercube { .. }, _) => {
            return Err(invalid(
                "drift.kind",
                "hypercube drifts are only valid in the floor experiment",
            ))
        }
        (_, Experiment::Floor) => {
            return Err(invalid(
                "drift.kind",
                "the floor experiment requires drift.kind = hypercube",
            ))
        }
        _ => {}
    }
    if cfg.experiment == Experiment::Floor && cfg.p1 != 0.5 {
        return Err(invalid("p1", "the floor experiment fixes p1 = 0.5"));
    }
    if matches!(cfg.drift0, DriftConfig::Hypercube { .. }) {
        return Err(invalid("drift0.kind", "class-0 drift must be zero or bump"));
    }
    if cfg.experiment == Experiment::Tails && cfg.drift0 == DriftConfig::Zero {
        return Err(invalid(
            "drift0.kind",
            "tail-bound constants need both drift sup norms positive; use a bump",
        ));
    }
    if cfg.drift1 == DriftConfig::Zero && cfg.drift0 == DriftConfig::Zero {
        return Err(invalid("drift.kind", "the two classes cannot both be zero"));
    }
    if let DriftConfig::Bump { lo, hi, amplitude } = cfg.drift1 {
        if !(lo < hi) {
            return Err(invalid("drift.support_lo", "support must satisfy lo < hi"));
        }
        if amplitude == 0.0 {
            return Err(invalid("drift.amplitude", "must be nonzero"));
        }
    }
    if let DriftConfig::Bump { lo, hi, amplitude } = cfg.drift0 {
        if !(lo < hi) {
            return Err(invalid("drift0.support_lo", "support must satisfy lo < hi"));
        }
        if amplitude == 0.0 {
            return Err(invalid("drift0.amplitude", "must be nonzero"));
        }
    }
    if let DriftConfig::Hypercube { kappa, holder, bump_amplitude } = cfg.drift1 {
        if kappa == 0.0 {
            return Err(invalid("drift.kappa", "must be nonzero"));
        }
        if !(holder > 0.0) {
            return Err(invalid("drift.holder", "must be positive"));
        }
        if !(bump_amplitude > 0.0) {
            return Err(invalid("drift.bump_amplitude", "must be positive"));
        }
    }
    Ok(())
}
