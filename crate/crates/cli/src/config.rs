//! Run configuration: a versioned TOML document with one table per
//! subcommand. Every table is optional and falls back to the desk profile.

use std::path::Path;

use critlim::functional::FunctionConfig;
use critlim::limitlaw::Order;
use critlim::montecarlo::ExperimentConfig;
use critlim::sampler::Method;
use critlim::KernelSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default = "default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default = "default_function")]
    pub function: FunctionConfig,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub assumptions: AssumptionsSection,
    #[serde(default)]
    pub limit_sample: LimitSampleSection,
    #[serde(default)]
    pub combinatorics: CombinatoricsSection,
    #[serde(default)]
    pub remark18: Remark18Section,
}

fn default_kernel() -> KernelSpec {
    KernelSpec::fbm(0.5, 4).expect("valid")
}

fn default_function() -> FunctionConfig {
    FunctionConfig::Gauss {
        sigma: 1.0,
        amplitude: 1.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub order: Order,
    pub n_list: Vec<f64>,
    pub t1: f64,
    pub t2: f64,
    pub replicates: usize,
    pub m_lin: usize,
    pub m_log: usize,
    pub method: Method,
    pub m_max: u32,
    /// Also write per-replicate values.
    pub raw: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            order: Order::First,
            n_list: vec![2.0, 4.0, 6.0],
            t1: 1.0,
            t2: 1.0,
            replicates: 500,
            m_lin: 8,
            m_log: 128,
            method: Method::Cholesky,
            m_max: 4,
            raw: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssumptionsSection {
    pub gammas: Vec<f64>,
    pub trials: usize,
    /// Largest number of increments for the local nondeterminism check.
    pub kappa_m: usize,
    /// Ratio bounds `r` of the envelope schedule for A1 and A2.
    pub ratio_bounds: Vec<f64>,
}

impl Default for AssumptionsSection {
    fn default() -> Self {
        AssumptionsSection {
            gammas: vec![2.0, 5.0, 10.0, 100.0],
            trials: 10_000,
            kappa_m: 8,
            ratio_bounds: vec![0.1, 0.01, 0.001],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitSampleSection {
    pub count: usize,
    pub t: f64,
}

impl Default for LimitSampleSection {
    fn default() -> Self {
        LimitSampleSection { count: 10_000, t: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CombinatoricsSection {
    pub m: usize,
    /// Rationals written as `"p/q"` or integers.
    pub a_values: Vec<String>,
}

impl Default for CombinatoricsSection {
    fn default() -> Self {
        CombinatoricsSection {
            m: 6,
            a_values: vec!["2".into(), "1".into(), "1/2".into(), "7/3".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Remark18Section {
    pub pairs: Vec<[f64; 2]>,
    pub quad_tol: f64,
}

impl Default for Remark18Section {
    fn default() -> Self {
        Remark18Section {
            pairs: vec![[1.0, 2.0], [1.0, 3.0]],
            quad_tol: 1e-8,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: None,
            kernel: default_kernel(),
            function: default_function(),
            simulate: SimulateSection::default(),
            assumptions: AssumptionsSection::default(),
            limit_sample: LimitSampleSection::default(),
            combinatorics: CombinatoricsSection::default(),
            remark18: Remark18Section::default(),
        }
    }
}

/// A configuration problem, reported with exit code 2.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("config field `{field}`: {message}")]
    Field { field: String, message: String },
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_string(),
            message: e.to_string().trim_end().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(field(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        critlim::functional::TestFunction::from_config(self.function, self.kernel.d)
            .map_err(|e| field("function", e.to_string()))?;
        self.experiment(0)
            .validate()
            .map_err(|e| field("simulate", e.to_string()))?;
        let a = &self.assumptions;
        if a.trials == 0 || a.gammas.iter().any(|g| !(*g > 1.0)) {
            return Err(field("assumptions", "trials >= 1 and every gamma > 1 required"));
        }
        if !(1..=12).contains(&a.kappa_m) {
            return Err(field("assumptions.kappa_m", "must lie in 1..=12"));
        }
        if a.ratio_bounds.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
            return Err(field("assumptions.ratio_bounds", "bounds must lie in (0, 1)"));
        }
        if self.limit_sample.count == 0 || !(self.limit_sample.t > 0.0) {
            return Err(field("limit_sample", "count >= 1 and t > 0 required"));
        }
        self.a_values()?;
        if self.remark18.pairs.iter().any(|[a, b]| !(*a > 0.0 && *b > 0.0 && a != b)) {
            return Err(field("remark18.pairs", "need distinct positive widths"));
        }
        Ok(())
    }

    pub fn a_values(&self) -> Result<Vec<critlim::combinatorics::Rational>, ConfigError> {
        self.combinatorics
            .a_values
            .iter()
            .map(|s| parse_rational(s).ok_or_else(|| field("combinatorics.a_values", format!("`{s}` is not a positive rational"))))
            .collect()
    }

    pub fn experiment(&self, root_seed: u64) -> ExperimentConfig {
        let s = &self.simulate;
        ExperimentConfig {
            spec: self.kernel,
            f: self.function,
            order: s.order,
            n_list: s.n_list.clone(),
            t1: s.t1,
            t2: s.t2,
            replicates: s.replicates,
            m_lin: s.m_lin,
            m_log: s.m_log,
            root_seed,
            method: s.method,
            m_max: s.m_max,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form (object keys sorted).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let canonical = serde_json::to_string(&value).expect("json");
        let digest = Sha256::digest(canonical.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn field(name: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: name.to_string(),
        message: message.into(),
    }
}

fn parse_rational(s: &str) -> Option<critlim::combinatorics::Rational> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim().parse::<i128>().ok()?, q.trim().parse::<i128>().ok()?),
        None => (s.trim().parse::<i128>().ok()?, 1),
    };
    (p > 0 && q > 0).then(|| critlim::combinatorics::Rational::new(p, q))
}
