//! Replicated experiments: sample, evaluate, normalize, and compare moments
//! with the limit law.

use std::fmt::Write as _;
use std::time::Instant;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::functional::{evaluate_F, FunctionConfig, TestFunction};
use crate::kernels::KernelSpec;
use crate::limitlaw::{LimitLawSpec, Order};
use crate::sampler::{build_grid, factorize, sample, Method, TimeGrid};

fn default_m_lin() -> usize {
    8
}

fn default_m_log() -> usize {
    128
}

fn default_m_max() -> u32 {
    4
}

fn default_method() -> Method {
    Method::Cholesky
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: KernelSpec,
    pub f: FunctionConfig,
    pub order: Order,
    pub n_list: Vec<f64>,
    pub t1: f64,
    pub t2: f64,
    pub replicates: usize,
    #[serde(default = "default_m_lin")]
    pub m_lin: usize,
    #[serde(default = "default_m_log")]
    pub m_log: usize,
    pub root_seed: u64,
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_m_max")]
    pub m_max: u32,
}

impl ExperimentConfig {
    /// The desk-scale profile: Brownian motion in `d = 4`, `f = p_1`,
    /// `n in {2, 4, 6}`, 500 replicates.
    pub fn desk_profile(root_seed: u64) -> Self {
        ExperimentConfig {
            spec: KernelSpec::fbm(0.5, 4).expect("valid"),
            f: FunctionConfig::Gauss {
                sigma: 1.0,
                amplitude: 1.0,
            },
            order: Order::First,
            n_list: vec![2.0, 4.0, 6.0],
            t1: 1.0,
            t2: 1.0,
            replicates: 500,
            m_lin: 8,
            m_log: 128,
            root_seed,
            method: Method::Cholesky,
            m_max: 4,
        }
    }

    pub fn test_function(&self) -> Result<TestFunction> {
        TestFunction::from_config(self.f, self.spec.d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(invalid("replicates", "must be >= 2"));
        }
        if self.n_list.is_empty() || self.n_list.iter().any(|n| !(*n > 0.0)) {
            return Err(invalid("n_list", "needs at least one positive n"));
        }
        if !(self.t1 > 0.0 && self.t2 > 0.0) {
            return Err(invalid("t1/t2", "must be positive"));
        }
        if self.m_max == 0 {
            return Err(invalid("m_max", "must be >= 1"));
        }
        let f = self.test_function()?;
        if self.order == Order::Second && f.mass() != 0.0 {
            return Err(invalid("f", "second-order experiments need a mass-zero test function"));
        }
        for &n in &self.n_list {
            build_grid(n, self.t1, self.m_lin, self.m_log)?;
            build_grid(n, self.t2, self.m_lin, self.m_log)?;
        }
        Ok(())
    }

    /// `1/n` for first order, `1/sqrt(n)` for second order.
    pub fn normalization(&self, n: f64) -> f64 {
        match self.order {
            Order::First => 1.0 / n,
            Order::Second => 1.0 / n.sqrt(),
        }
    }

    /// Limit law with `t = t1 ^ t2`.
    pub fn limit_law(&self) -> Result<LimitLawSpec> {
        let f = self.test_function()?;
        let a = self.spec.alphas();
        let t = self.t1.min(self.t2);
        let constant = match self.order {
            Order::First => crate::limitlaw::c_fd(self.spec.d, a.alpha2, f.mass())?,
            Order::Second => crate::limitlaw::d_fd(self.spec.d, a.alpha2, &f)?,
        };
        LimitLawSpec::new(self.order, a.lambda, t, constant, self.spec.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub m: u32,
    pub empirical: f64,
    pub se: f64,
    pub target: f64,
    /// `(empirical - target) / se`; `NaN` (null in JSON) when `se = 0`.
    pub zscore: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NBlock {
    pub n: f64,
    pub moments: Vec<MomentRow>,
    pub jitter: f64,
    pub nodes: usize,
    pub runtime_seconds: f64,
    /// Normalized values in replicate order.
    #[serde(skip)]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub config: ExperimentConfig,
    pub law: LimitLawSpec,
    pub root_seed: u64,
    pub blocks: Vec<NBlock>,
}

impl MomentReport {
    /// `n,m,empirical,se,target,zscore`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,m,empirical,se,target,zscore\n");
        for b in &self.blocks {
            for r in &b.moments {
                let _ = writeln!(out, "{},{},{},{},{},{}", b.n, r.m, r.empirical, r.se, r.target, r.zscore);
            }
        }
        out
    }

    /// `replicate,n,t1,t2,value`.
    pub fn raw_csv(&self) -> String {
        let mut out = String::from("replicate,n,t1,t2,value\n");
        for b in &self.blocks {
            for (r, v) in b.values.iter().enumerate() {
                let _ = writeln!(out, "{r},{},{},{},{v}", b.n, self.config.t1, self.config.t2);
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `|empirical - target|` of moment `m` per block.
    pub fn gaps(&self, m: u32) -> Vec<(f64, f64)> {
        self.blocks
            .iter()
            .filter_map(|b| {
                b.moments
                    .iter()
                    .find(|r| r.m == m)
                    .map(|r| (b.n, (r.empirical - r.target).abs()))
            })
            .collect()
    }
}

/// Values of the normalized functional for replicates `0..count` on one
/// factorization.
fn replicate_values(
    cfg: &ExperimentConfig,
    f: &TestFunction,
    fact: &crate::sampler::PathFactorization,
    grid_u: &TimeGrid,
    grid_v: &TimeGrid,
    scale: f64,
) -> Result<Vec<f64>> {
    let one = |r: usize| -> Result<f64> {
        let batch = sample(fact, cfg.spec.d, r as u64, cfg.root_seed);
        Ok(evaluate_F(f, &batch, grid_u, grid_v)?.value * scale)
    };
    #[cfg(feature = "parallel")]
    {
        (0..cfg.replicates).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..cfg.replicates).map(one).collect()
    }
}

/// Runs every `n` in the config. One factorization per `n`; replicate `r`
/// always uses the substreams keyed by `r`, so results do not depend on
/// the schedule.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MomentReport> {
    cfg.validate()?;
    let f = cfg.test_function()?;
    let law = cfg.limit_law()?;
    let mut blocks = Vec::with_capacity(cfg.n_list.len());
    for &n in &cfg.n_list {
        let start = Instant::now();
        let grid_u = build_grid(n, cfg.t1, cfg.m_lin, cfg.m_log)?;
        let grid_v = build_grid(n, cfg.t2, cfg.m_lin, cfg.m_log)?;
        let union = TimeGrid::union(&grid_u, &grid_v)?;
        let fact = factorize(&cfg.spec, &union, cfg.method)?;
        let values = replicate_values(cfg, &f, &fact, &grid_u, &grid_v, cfg.normalization(n))?;
        let (means, ses) = estimate_moments(&values, cfg.m_max)?;
        let mut moments = Vec::with_capacity(means.len());
        for (i, (&e, &se)) in means.iter().zip(&ses).enumerate() {
            let m = i as u32 + 1;
            let target = law.moment(m)?;
            let zscore = if se > 0.0 { (e - target) / se } else { f64::NAN };
            moments.push(MomentRow {
                m,
                empirical: e,
                se,
                target,
                zscore,
            });
        }
        log::info!("n = {n}: {} replicates in {:.2?}", cfg.replicates, start.elapsed());
        blocks.push(NBlock {
            n,
            moments,
            jitter: fact.jitter(),
            nodes: union.len(),
            runtime_seconds: start.elapsed().as_secs_f64(),
            values,
        });
    }
    Ok(MomentReport {
        config: cfg.clone(),
        law,
        root_seed: cfg.root_seed,
        blocks,
    })
}

/// Power-moment means `m = 1..=m_max` with jackknife standard errors.
pub fn estimate_moments(values: &[f64], m_max: u32) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = values.len();
    if n < 2 {
        return Err(invalid("values", "need at least two values"));
    }
    let mut means = Vec::with_capacity(m_max as usize);
    let mut ses = Vec::with_capacity(m_max as usize);
    let nf = n as f64;
    for m in 1..=m_max {
        let powers: Vec<f64> = values.iter().map(|v| v.powi(m as i32)).collect();
        let total: f64 = powers.iter().sum();
        let loo: Vec<f64> = powers.iter().map(|p| (total - p) / (nf - 1.0)).collect();
        let loo_mean = loo.iter().sum::<f64>() / nf;
        let ss: f64 = loo.iter().map(|x| (x - loo_mean).powi(2)).sum();
        means.push(total / nf);
        ses.push(((nf - 1.0) / nf * ss).sqrt());
    }
    Ok((means, ses))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov statistic with the asymptotic p-value
/// `Q((sqrt(ne) + 0.12 + 0.11 / sqrt(ne)) D)`.
pub fn compare_distributions(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(invalid("samples", "both samples must be nonempty"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (na, nb) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let v = x[i].min(y[j]);
        while i < na && x[i] <= v {
            i += 1;
        }
        while j < nb && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let root = ne.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q(lambda),
    })
}

/// `Q(l) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 l^2)`, clamped to `[0, 1]`.
fn kolmogorov_q(l: f64) -> f64 {
    if l < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let term = sign * (-2.0 * (k * k) as f64 * l * l).exp();
        sum += term;
        if term.abs() < 1e-16 * sum.abs() {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
