//! Browser bindings: sample paths, draw limit-law histograms and tabulate
//! constants. Every export takes plain numbers and returns typed arrays or
//! JSON so the page needs no bundler.

use critlim::functional::TestFunction;
use critlim::limitlaw::{c_fd, sample_limit, z_moment, LimitLawSpec, Order};
use critlim::sampler::{build_grid, factorize, sample, Method};
use critlim::{Family, KernelSpec};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn parse_family(name: &str) -> Result<Family, String> {
    match name {
        "fbm" => Ok(Family::Fbm),
        "subfbm" => Ok(Family::Subfbm),
        "bifbm" => Ok(Family::Bifbm),
        other => Err(format!("unknown family `{other}`")),
    }
}

fn spec(family: &str, h: f64, k: f64, d: usize) -> Result<KernelSpec, String> {
    KernelSpec::new(parse_family(family)?, h, k, d).map_err(|e| e.to_string())
}

/// One-dimensional sample paths on a log-spaced grid up to `e^{nt}`.
#[wasm_bindgen]
pub struct Paths {
    nodes: Vec<f64>,
    values: Vec<f64>,
    count: usize,
}

#[wasm_bindgen]
impl Paths {
    pub fn nodes(&self) -> Vec<f64> {
        self.nodes.clone()
    }

    /// Row-major `[path][node]`.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

pub fn sample_paths_native(family: &str, h: f64, k: f64, n: f64, m_log: usize, count: usize, seed: u64) -> Result<Paths, String> {
    let spec = spec(family, h, k, 1)?;
    let grid = build_grid(n, 1.0, 8, m_log).map_err(|e| e.to_string())?;
    let fact = factorize(&spec, &grid, Method::Cholesky).map_err(|e| e.to_string())?;
    let mut values = Vec::with_capacity(count * grid.len());
    for r in 0..count as u64 {
        values.extend_from_slice(&sample(&fact, 1, r, seed).x[0]);
    }
    Ok(Paths {
        nodes: grid.nodes().to_vec(),
        values,
        count,
    })
}

#[wasm_bindgen]
pub fn sample_paths(family: &str, h: f64, k: f64, n: f64, m_log: usize, count: usize, seed: u32) -> Result<Paths, JsError> {
    sample_paths_native(family, h, k, n, m_log, count, seed as u64).map_err(js_err)
}

/// Histogram of draws of `C t Z Z~ N^2` (first order) or
/// `sqrt(D t Z Z~ N^2) eta` (second order).
#[wasm_bindgen]
pub struct Histogram {
    edges: Vec<f64>,
    counts: Vec<u32>,
    mean: f64,
    target_mean: f64,
}

#[wasm_bindgen]
impl Histogram {
    pub fn edges(&self) -> Vec<f64> {
        self.edges.clone()
    }

    pub fn counts(&self) -> Vec<u32> {
        self.counts.clone()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }
}

pub fn limit_histogram_native(second: bool, lambda: f64, constant: f64, count: usize, bins: usize, seed: u64) -> Result<Histogram, String> {
    if bins == 0 || count == 0 {
        return Err("bins and count must be positive".into());
    }
    let order = if second { Order::Second } else { Order::First };
    let law = LimitLawSpec::new(order, lambda, 1.0, constant, 4).map_err(|e| e.to_string())?;
    let xs = sample_limit(&law, count, seed).map_err(|e| e.to_string())?;
    // clip the long right tail at the 99th percentile
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let lo = if second { sorted[count / 200] } else { 0.0 };
    let hi = sorted[(count * 99 / 100).min(count - 1)];
    let width = ((hi - lo) / bins as f64).max(f64::MIN_POSITIVE);
    let mut counts = vec![0u32; bins];
    for &x in &xs {
        if x >= lo && x <= hi {
            counts[(((x - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    Ok(Histogram {
        edges: (0..=bins).map(|i| lo + i as f64 * width).collect(),
        counts,
        mean: xs.iter().sum::<f64>() / count as f64,
        target_mean: law.moment(1).map_err(|e| e.to_string())?,
    })
}

#[wasm_bindgen]
pub fn limit_histogram(second: bool, lambda: f64, constant: f64, count: usize, bins: usize, seed: u32) -> Result<Histogram, JsError> {
    limit_histogram_native(second, lambda, constant, count, bins, seed as u64).map_err(js_err)
}

#[derive(Serialize)]
struct Constants {
    family: String,
    h: f64,
    k: f64,
    d: usize,
    h_eff_times_d: f64,
    alpha1: f64,
    alpha2: f64,
    lambda: f64,
    c_fd: f64,
    z_moments: Vec<f64>,
    first_order_moments: Vec<f64>,
}

pub fn constants_native(family: &str, h: f64, k: f64, d: usize, sigma: f64) -> Result<String, String> {
    let spec = spec(family, h, k, d)?.critical().map_err(|e| e.to_string())?;
    let a = spec.alphas();
    let f = TestFunction::gauss(sigma, d).map_err(|e| e.to_string())?;
    let c = c_fd(d, a.alpha2, f.mass()).map_err(|e| e.to_string())?;
    let law = LimitLawSpec::new(Order::First, a.lambda, 1.0, c, d).map_err(|e| e.to_string())?;
    let out = Constants {
        family: family.to_string(),
        h: spec.h(),
        k: spec.k(),
        d,
        h_eff_times_d: spec.h_eff() * d as f64,
        alpha1: a.alpha1,
        alpha2: a.alpha2,
        lambda: a.lambda,
        c_fd: c,
        z_moments: (1..=4).map(|m| z_moment(a.lambda, m)).collect::<Result<_, _>>().map_err(|e| e.to_string())?,
        first_order_moments: (1..=4).map(|m| law.moment(m)).collect::<Result<_, _>>().map_err(|e| e.to_string())?,
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

/// JSON object with the variance constants, `lambda`, `C` and the first
/// four limit moments at `t = 1`.
#[wasm_bindgen]
pub fn constants(family: &str, h: f64, k: f64, d: usize, sigma: f64) -> Result<String, JsError> {
    constants_native(family, h, k, d, sigma).map_err(js_err)
}
