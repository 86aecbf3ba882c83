//! Exact joint sampling of `X` and `X~` on a time grid.
//!
//! A [`PathFactorization`] is built once per grid and kernel and then
//! shared read-only by any number of [`sample`] calls. Cholesky works for
//! every family; the circulant embedding is an FFT fast path for fBm on a
//! uniform grid `h, 2h, ..., Mh`.

use std::cell::Cell;
use std::io::{self, Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{Family, KernelSpec};
use crate::rng::{Purpose, StreamKey};

/// Parameters a grid was built from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub n: f64,
    pub t: f64,
    pub m_lin: usize,
    pub m_log: usize,
}

/// Quadrature nodes on `(0, e^{n t}]` with trapezoid weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    meta: Option<GridMeta>,
}

impl TimeGrid {
    /// Builds a grid from strictly increasing positive nodes. The first cell
    /// `(0, u_1]` is credited to `u_1`; the rest uses the trapezoid rule.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(invalid("nodes", "grid needs at least one node"));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes[nodes.len() - 1].is_finite() {
            return Err(invalid("nodes", "nodes must be positive, finite and strictly increasing"));
        }
        let m = nodes.len();
        let mut weights = vec![0.0; m];
        weights[0] = nodes[0];
        for i in 1..m {
            let half = 0.5 * (nodes[i] - nodes[i - 1]);
            weights[i - 1] += half;
            weights[i] += half;
        }
        Ok(TimeGrid {
            nodes,
            weights,
            meta: None,
        })
    }

    /// `M` nodes `h, 2h, ..., M h`.
    pub fn uniform(step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || count == 0 {
            return Err(invalid("uniform grid", "step > 0 and count >= 1 required"));
        }
        Self::from_nodes((1..=count).map(|k| k as f64 * step).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn meta(&self) -> Option<GridMeta> {
        self.meta
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Sorted union of the nodes of two grids, merging nodes closer than
    /// `1e-12` relative.
    pub fn union(a: &TimeGrid, b: &TimeGrid) -> Result<TimeGrid> {
        if a.nodes == b.nodes {
            return Ok(a.clone());
        }
        let mut all: Vec<f64> = a.nodes.iter().chain(b.nodes.iter()).copied().collect();
        all.sort_by(f64::total_cmp);
        let mut merged: Vec<f64> = Vec::with_capacity(all.len());
        for x in all {
            match merged.last() {
                Some(&last) if (x - last).abs() <= 1e-12 * x.abs() => {}
                _ => merged.push(x),
            }
        }
        TimeGrid::from_nodes(merged)
    }

    /// Index of `u` among the nodes (relative tolerance `1e-12`).
    pub fn position(&self, u: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&x| x < u * (1.0 - 1e-12));
        (i < self.nodes.len() && (self.nodes[i] - u).abs() <= 1e-12 * u.abs()).then_some(i)
    }

    fn is_uniform_from_zero(&self) -> bool {
        let h = self.nodes[0];
        self.nodes
            .iter()
            .enumerate()
            .all(|(i, &u)| (u - (i + 1) as f64 * h).abs() <= 1e-9 * u)
    }
}

/// `m_lin` equally spaced nodes on `(0, 1]` followed by `m_log` geometric
/// nodes on `[1, e^{n t}]` (the node 1 is shared).
pub fn build_grid(n: f64, t: f64, m_lin: usize, m_log: usize) -> Result<TimeGrid> {
    let nt = n * t;
    if !(nt > 0.0) {
        return Err(invalid("n*t", format!("n*t must be > 0, got {nt}")));
    }
    if nt > 700.0 {
        return Err(Error::HorizonTooLarge(nt));
    }
    if m_lin < 2 || m_log < 2 {
        return Err(invalid("grid sizes", "M_lin >= 2 and M_log >= 2 required"));
    }
    let mut nodes: Vec<f64> = (1..=m_lin).map(|k| k as f64 / m_lin as f64).collect();
    let steps = (m_log - 1) as f64;
    nodes.extend((1..m_log).map(|j| (nt * j as f64 / steps).exp()));
    *nodes.last_mut().expect("nonempty") = nt.exp();
    let mut grid = TimeGrid::from_nodes(nodes)?;
    grid.meta = Some(GridMeta { n, t, m_lin, m_log });
    Ok(grid)
}

/// Factorization method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Cholesky,
    Circulant,
}

#[derive(Clone)]
enum Factor {
    /// Row-major lower triangle, `M x M`.
    Lower(Vec<f64>),
    Circulant {
        /// `sqrt(lambda_k / N)` for the embedding of size `N = 2M`.
        scaled_sqrt: Vec<f64>,
        spectrum: Vec<f64>,
        fft: Arc<dyn rustfft::Fft<f64>>,
    },
}

/// Reusable factorization of the Gram matrix of one kernel on one grid.
#[derive(Clone)]
pub struct PathFactorization {
    grid: TimeGrid,
    nodes: Arc<Vec<f64>>,
    spec: KernelSpec,
    method: Method,
    factor: Factor,
    jitter: f64,
}

impl std::fmt::Debug for PathFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PathFactorization")
            .field("spec", &self.spec)
            .field("method", &self.method)
            .field("nodes", &self.nodes.len())
            .field("jitter", &self.jitter)
            .finish()
    }
}

thread_local! {
    static FACTORIZATIONS: Cell<usize> = const { Cell::new(0) };
}

/// Number of factorizations performed on the current thread.
pub fn factorization_count() -> usize {
    FACTORIZATIONS.with(|c| c.get())
}

/// Gram matrix `cov(u_i, u_j)`, row-major.
pub fn gram_matrix(spec: &KernelSpec, nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let mut g = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let c = spec.cov(nodes[i], nodes[j]);
            g[i * m + j] = c;
            g[j * m + i] = c;
        }
    }
    g
}

fn cholesky_in_place(a: &[f64], m: usize, jitter: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let mut s = a[i * m + j];
            if i == j {
                s += jitter;
            }
            for k in 0..j {
                s -= l[i * m + k] * l[j * m + k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i * m + i] = s.sqrt();
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    Some(l)
}

/// Increment autocovariance of fBm on a grid of step `h`.
fn fgn_autocov(h: f64, hurst: f64, k: usize) -> f64 {
    let p = 2.0 * hurst;
    let k = k as f64;
    let scale = 0.5 * h.powf(p);
    if k == 0.0 {
        return 2.0 * scale;
    }
    scale * ((k + 1.0).powf(p) - 2.0 * k.powf(p) + (k - 1.0).powf(p))
}

pub fn factorize(spec: &KernelSpec, grid: &TimeGrid, method: Method) -> Result<PathFactorization> {
    let m = grid.len();
    let (factor, jitter) = match method {
        Method::Cholesky => {
            let g = gram_matrix(spec, grid.nodes());
            let trace: f64 = (0..m).map(|i| g[i * m + i]).sum();
            let cap = 1e-12 * trace / m as f64;
            let mut jitter = 0.0;
            let lower = loop {
                if let Some(l) = cholesky_in_place(&g, m, jitter) {
                    break l;
                }
                jitter = if jitter == 0.0 { 1e-16 * trace / m as f64 } else { 10.0 * jitter };
                if jitter > cap * (1.0 + 1e-9) {
                    return Err(Error::NotPositiveDefinite { cap });
                }
            };
            if jitter > 0.0 {
                log::warn!("cholesky: applied diagonal jitter {jitter:e} ({m} nodes)");
            }
            (Factor::Lower(lower), jitter)
        }
        Method::Circulant => {
            if spec.family != Family::Fbm {
                return Err(invalid(
                    "method",
                    "circulant embedding needs stationary increments (fbm only)",
                ));
            }
            if !grid.is_uniform_from_zero() {
                return Err(invalid("method", "circulant embedding needs a uniform grid h, 2h, ..., Mh"));
            }
            let h = grid.nodes()[0];
            let size = 2 * m;
            let mut row: Vec<Complex64> = (0..size)
                .map(|j| {
                    let lag = if j <= m { j } else { size - j };
                    Complex64::new(fgn_autocov(h, spec.h(), lag), 0.0)
                })
                .collect();
            let mut planner = FftPlanner::new();
            let fft = planner.plan_fft_forward(size);
            fft.process(&mut row);
            let spectrum: Vec<f64> = row.iter().map(|c| c.re).collect();
            let max = spectrum.iter().copied().fold(f64::MIN, f64::max);
            let min = spectrum.iter().copied().fold(f64::MAX, f64::min);
            if min < -1e-8 * max {
                return Err(Error::EmbeddingNotPsd { min, max });
            }
            if min < 0.0 {
                log::warn!("circulant: clipping negative eigenvalue {min:e} to 0");
            }
            let spectrum: Vec<f64> = spectrum.into_iter().map(|l| l.max(0.0)).collect();
            let scaled_sqrt = spectrum.iter().map(|l| (l / size as f64).sqrt()).collect();
            (
                Factor::Circulant {
                    scaled_sqrt,
                    spectrum,
                    fft,
                },
                0.0,
            )
        }
    };
    FACTORIZATIONS.with(|c| c.set(c.get() + 1));
    Ok(PathFactorization {
        nodes: Arc::new(grid.nodes().to_vec()),
        grid: grid.clone(),
        spec: *spec,
        method,
        factor,
        jitter,
    })
}

impl PathFactorization {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn method(&self) -> Method {
        self.method
    }

    /// Diagonal jitter added before the Cholesky factorization succeeded.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Eigenvalues of the circulant embedding (after clipping).
    pub fn spectrum(&self) -> Option<&[f64]> {
        match &self.factor {
            Factor::Circulant { spectrum, .. } => Some(spectrum),
            Factor::Lower(_) => None,
        }
    }

    /// Covariance matrix of the sampled values, row-major.
    pub fn implied_covariance(&self) -> Vec<f64> {
        let m = self.nodes.len();
        match &self.factor {
            Factor::Lower(l) => {
                let mut c = vec![0.0; m * m];
                for i in 0..m {
                    for j in 0..=i {
                        let s: f64 = (0..=j).map(|k| l[i * m + k] * l[j * m + k]).sum();
                        c[i * m + j] = s;
                        c[j * m + i] = s;
                    }
                }
                c
            }
            Factor::Circulant { spectrum, .. } => {
                let size = spectrum.len();
                let mut buf: Vec<Complex64> = spectrum.iter().map(|&l| Complex64::new(l, 0.0)).collect();
                let mut planner = FftPlanner::new();
                planner.plan_fft_inverse(size).process(&mut buf);
                let acov: Vec<f64> = buf.iter().map(|c| c.re / size as f64).collect();
                // Cov(X_i, X_j) = sum_{a<=i} sum_{b<=j} acov(|a-b|), via 2-D prefix sums
                let mut c = vec![0.0; m * m];
                for i in 0..m {
                    for j in 0..m {
                        let lag = i.abs_diff(j);
                        let mut v = acov[lag];
                        if i > 0 {
                            v += c[(i - 1) * m + j];
                        }
                        if j > 0 {
                            v += c[i * m + j - 1];
                        }
                        if i > 0 && j > 0 {
                            v -= c[(i - 1) * m + j - 1];
                        }
                        c[i * m + j] = v;
                    }
                }
                c
            }
        }
    }

    fn draw_path(&self, key: StreamKey) -> Vec<f64> {
        let mut rng = key.rng();
        let m = self.nodes.len();
        match &self.factor {
            Factor::Lower(l) => {
                let z: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
                (0..m)
                    .map(|i| (0..=i).map(|k| l[i * m + k] * z[k]).sum())
                    .collect()
            }
            Factor::Circulant { scaled_sqrt, fft, .. } => {
                let mut buf: Vec<Complex64> = scaled_sqrt
                    .iter()
                    .map(|&s| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(s * re, s * im)
                    })
                    .collect();
                fft.process(&mut buf);
                let mut acc = 0.0;
                buf[..m]
                    .iter()
                    .map(|c| {
                        acc += c.re;
                        acc
                    })
                    .collect()
            }
        }
    }
}

/// Jointly sampled `d` components of `X` and `X~` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    nodes: Arc<Vec<f64>>,
    /// `[component][node]`
    pub x: Vec<Vec<f64>>,
    /// `[component][node]`, the independent copy.
    pub xt: Vec<Vec<f64>>,
    pub root_seed: u64,
    pub replicate: u64,
}

impl PathBatch {
    /// Wraps given paths; used for frozen-path evaluations.
    pub fn from_paths(nodes: Vec<f64>, x: Vec<Vec<f64>>, xt: Vec<Vec<f64>>) -> Result<Self> {
        let m = nodes.len();
        if x.len() != xt.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: xt.len(),
            });
        }
        if let Some(bad) = x.iter().chain(xt.iter()).find(|p| p.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: bad.len(),
            });
        }
        Ok(PathBatch {
            nodes: Arc::new(nodes),
            x,
            xt,
            root_seed: 0,
            replicate: 0,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Index of node `u` in this batch.
    pub fn position(&self, u: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|&x| x < u * (1.0 - 1e-12));
        (i < self.nodes.len() && (self.nodes[i] - u).abs() <= 1e-12 * u.abs()).then_some(i)
    }

    /// Writes the debug dump: a 32-byte header (`GLPB`, version, `d`, `M`,
    /// replicate, root seed) followed by `2d` rows of `M` little-endian
    /// `f64`, first the `X` components then the `X~` components.
    pub fn write_dump<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = self.nodes.len() as u32;
        w.write_all(b"GLPB")?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.dim() as u32).to_le_bytes())?;
        w.write_all(&m.to_le_bytes())?;
        w.write_all(&self.replicate.to_le_bytes())?;
        w.write_all(&self.root_seed.to_le_bytes())?;
        for row in self.x.iter().chain(self.xt.iter()) {
            for v in row {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Reads a dump written by [`PathBatch::write_dump`]. Node locations are
    /// not part of the format and must be supplied.
    pub fn read_dump<R: Read>(mut r: R, nodes: Vec<f64>) -> io::Result<PathBatch> {
        let mut header = [0u8; 32];
        r.read_exact(&mut header)?;
        if &header[0..4] != b"GLPB" {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "bad magic"));
        }
        let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
        let long = |i: usize| u64::from_le_bytes(header[i..i + 8].try_into().unwrap());
        if word(4) != DUMP_VERSION {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "unsupported version"));
        }
        let (d, m) = (word(8) as usize, word(12) as usize);
        if m != nodes.len() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "node count mismatch"));
        }
        let mut rows = Vec::with_capacity(2 * d);
        let mut buf = [0u8; 8];
        for _ in 0..2 * d {
            let mut row = Vec::with_capacity(m);
            for _ in 0..m {
                r.read_exact(&mut buf)?;
                row.push(f64::from_le_bytes(buf));
            }
            rows.push(row);
        }
        let xt = rows.split_off(d);
        Ok(PathBatch {
            nodes: Arc::new(nodes),
            x: rows,
            xt,
            replicate: long(16),
            root_seed: long(24),
        })
    }
}

const DUMP_VERSION: u32 = 1;

/// Samples `d` components of `X` and of `X~`. Component `c` of `X` uses the
/// substream `(root_seed, Process, c, replicate)` and of `X~` the substream
/// `(root_seed, Copy, c, replicate)`.
pub fn sample(fact: &PathFactorization, d: usize, replicate: u64, root_seed: u64) -> PathBatch {
    let draw = |purpose| -> Vec<Vec<f64>> {
        (0..d)
            .map(|c| fact.draw_path(StreamKey::new(root_seed, purpose, c as u16, replicate)))
            .collect()
    };
    PathBatch {
        nodes: Arc::clone(&fact.nodes),
        x: draw(Purpose::Process),
        xt: draw(Purpose::Copy),
        root_seed,
        replicate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_empty_and_huge_horizons() {
        assert!(build_grid(0.0, 1.0, 8, 8).is_err());
        assert!(matches!(build_grid(800.0, 1.0, 8, 8), Err(Error::HorizonTooLarge(_))));
        assert!(build_grid(1.0, 1.0, 1, 8).is_err());
    }

    #[test]
    fn small_grid_by_hand() {
        let g = build_grid(1.0, 2f64.ln(), 2, 3).unwrap();
        let expect = [0.5, 1.0, 2f64.sqrt(), 2.0];
        for (a, b) in g.nodes().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let r2 = 2f64.sqrt();
        let w = [0.75, 0.25 + (r2 - 1.0) / 2.0, 0.5, (2.0 - r2) / 2.0];
        for (a, b) in g.weights().iter().zip(w) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((g.weights().iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn grid_invariants() {
        for &(n, t) in &[(2.0, 1.0), (6.0, 1.0), (3.0, 0.5), (100.0, 1.0)] {
            let g = build_grid(n, t, 8, 128).unwrap();
            let end = (n * t).exp();
            assert_eq!(g.horizon(), end);
            let sum: f64 = g.weights().iter().sum();
            assert!((sum - end).abs() <= 1e-9 * end);
            let geo = &g.nodes()[7..];
            let ratio = geo[1] / geo[0];
            for w in geo.windows(2) {
                assert!((w[1] / w[0] - ratio).abs() < 1e-12 * ratio);
            }
        }
    }

    #[test]
    fn union_and_lookup() {
        let a = build_grid(2.0, 1.0, 4, 5).unwrap();
        let b = build_grid(2.0, 1.5, 4, 5).unwrap();
        let u = TimeGrid::union(&a, &b).unwrap();
        for &x in a.nodes().iter().chain(b.nodes()) {
            assert!(u.position(x).is_some());
        }
        // e^{1.5} is shared
        assert_eq!(u.len(), 4 + 4 + 3);
        assert!(u.position(0.3).is_none());
    }

    #[test]
    fn single_node_cholesky() {
        let spec = KernelSpec::subfbm(0.4, 1).unwrap();
        let g = TimeGrid::from_nodes(vec![2.5]).unwrap();
        let f = factorize(&spec, &g, Method::Cholesky).unwrap();
        let c = f.implied_covariance();
        let expect = spec.alphas().alpha1 * 2.5f64.powf(0.8);
        assert!((c[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn brownian_circulant_spectrum_is_flat() {
        let spec = KernelSpec::fbm(0.5, 1).unwrap();
        let g = TimeGrid::uniform(0.25, 16).unwrap();
        let f = factorize(&spec, &g, Method::Circulant).unwrap();
        for &l in f.spectrum().unwrap() {
            assert!((l - 0.25).abs() < 1e-14);
        }
    }

    #[test]
    fn circulant_restrictions() {
        let sub = KernelSpec::subfbm(0.4, 1).unwrap();
        let uni = TimeGrid::uniform(1.0, 8).unwrap();
        assert!(factorize(&sub, &uni, Method::Circulant).is_err());
        let fbm = KernelSpec::fbm(0.4, 1).unwrap();
        let geo = build_grid(2.0, 1.0, 4, 8).unwrap();
        assert!(factorize(&fbm, &geo, Method::Circulant).is_err());
    }

    #[test]
    fn subfbm_reconstruction() {
        let spec = KernelSpec::subfbm(0.4, 1).unwrap();
        let g = build_grid(2.0, 1.0, 4, 13).unwrap();
        assert_eq!(g.len(), 16);
        let f = factorize(&spec, &g, Method::Cholesky).unwrap();
        let gram = gram_matrix(&spec, g.nodes());
        let maxdiag = (0..16).map(|i| gram[i * 16 + i]).fold(0.0, f64::max);
        let err = f
            .implied_covariance()
            .iter()
            .zip(&gram)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-10 * maxdiag, "err {err}");
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = KernelSpec::fbm(0.5, 2).unwrap();
        let g = build_grid(1.0, 1.0, 3, 4).unwrap();
        let f = factorize(&spec, &g, Method::Cholesky).unwrap();
        let a = sample(&f, 2, 5, 99);
        let b = sample(&f, 2, 5, 99);
        assert_eq!(a, b);
        let c = sample(&f, 2, 6, 99);
        assert_ne!(a.x, c.x);
        assert_ne!(a.x, a.xt);
    }

    #[test]
    fn dump_round_trip() {
        let spec = KernelSpec::fbm(0.5, 3).unwrap();
        let g = build_grid(1.0, 1.0, 3, 4).unwrap();
        let f = factorize(&spec, &g, Method::Cholesky).unwrap();
        let batch = sample(&f, 3, 11, 7);
        let mut bytes = Vec::new();
        batch.write_dump(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 32 + 2 * 3 * g.len() * 8);
        assert_eq!(&bytes[..4], b"GLPB");
        let back = PathBatch::read_dump(bytes.as_slice(), g.nodes().to_vec()).unwrap();
        assert_eq!(back, batch);
    }

    #[test]
    fn factor_reuse_counts_one_factorization() {
        let spec = KernelSpec::fbm(0.5, 1).unwrap();
        let g = build_grid(1.0, 1.0, 3, 4).unwrap();
        let before = factorization_count();
        let f = factorize(&spec, &g, Method::Cholesky).unwrap();
        for r in 0..50 {
            let _ = sample(&f, 1, r, 1);
        }
        assert_eq!(factorization_count() - before, 1);
    }
}
