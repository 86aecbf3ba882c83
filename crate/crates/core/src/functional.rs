//! Test functions and tensor-trapezoid evaluation of
//! `F = sum_ij w_i w_j f(X_{u_i} - X~_{v_j})`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::quad;
use crate::sampler::{PathBatch, TimeGrid};
use crate::special::sphere_area;

type PointFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type RadialFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A user-supplied test function. `fhat_radial`, when present, gives the
/// Fourier transform as a function of `|xi|`.
pub struct CustomFunction {
    pub eval: Box<PointFn>,
    pub fhat_radial: Option<Box<RadialFn>>,
    pub mass: f64,
}

#[derive(Clone)]
pub enum Kind {
    /// Normalized Gaussian density `p_sigma`.
    Gauss { sigma: f64 },
    /// `p_sigma1 - p_sigma2`, mass zero.
    DiffGauss { sigma1: f64, sigma2: f64 },
    Custom(Arc<CustomFunction>),
}

impl fmt::Debug for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Gauss { sigma } => write!(f, "Gauss({sigma})"),
            Kind::DiffGauss { sigma1, sigma2 } => write!(f, "DiffGauss({sigma1}, {sigma2})"),
            Kind::Custom(c) => write!(f, "Custom(mass = {})", c.mass),
        }
    }
}

/// `amplitude * kind` on `R^d`. Fourier convention `fhat(xi) = int f(x) e^{i xi.x} dx`.
#[derive(Clone, Debug)]
pub struct TestFunction {
    kind: Kind,
    d: usize,
    amplitude: f64,
}

/// Serializable form of the shipped kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionConfig {
    Gauss {
        sigma: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    DiffGauss {
        sigma1: f64,
        sigma2: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
}

fn one() -> f64 {
    1.0
}

fn gauss_density(sigma: f64, d: usize, r2: f64) -> f64 {
    let s2 = sigma * sigma;
    (2.0 * PI * s2).powf(-(d as f64) / 2.0) * (-r2 / (2.0 * s2)).exp()
}

impl TestFunction {
    pub fn gauss(sigma: f64, d: usize) -> Result<Self> {
        check_sigma(sigma)?;
        check_dim(d)?;
        Ok(TestFunction {
            kind: Kind::Gauss { sigma },
            d,
            amplitude: 1.0,
        })
    }

    pub fn diff_gauss(sigma1: f64, sigma2: f64, d: usize) -> Result<Self> {
        check_sigma(sigma1)?;
        check_sigma(sigma2)?;
        check_dim(d)?;
        Ok(TestFunction {
            kind: Kind::DiffGauss { sigma1, sigma2 },
            d,
            amplitude: 1.0,
        })
    }

    pub fn custom(f: CustomFunction, d: usize) -> Result<Self> {
        check_dim(d)?;
        Ok(TestFunction {
            kind: Kind::Custom(Arc::new(f)),
            d,
            amplitude: 1.0,
        })
    }

    pub fn from_config(cfg: FunctionConfig, d: usize) -> Result<Self> {
        let (f, a) = match cfg {
            FunctionConfig::Gauss { sigma, amplitude } => (Self::gauss(sigma, d)?, amplitude),
            FunctionConfig::DiffGauss {
                sigma1,
                sigma2,
                amplitude,
            } => (Self::diff_gauss(sigma1, sigma2, d)?, amplitude),
        };
        f.scaled(a)
    }

    /// `None` for custom functions.
    pub fn to_config(&self) -> Option<FunctionConfig> {
        match self.kind {
            Kind::Gauss { sigma } => Some(FunctionConfig::Gauss {
                sigma,
                amplitude: self.amplitude,
            }),
            Kind::DiffGauss { sigma1, sigma2 } => Some(FunctionConfig::DiffGauss {
                sigma1,
                sigma2,
                amplitude: self.amplitude,
            }),
            Kind::Custom(_) => None,
        }
    }

    /// `c * f`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(invalid("amplitude", "must be finite"));
        }
        Ok(TestFunction {
            amplitude: self.amplitude * c,
            ..self.clone()
        })
    }

    pub fn kind(&self) -> &Kind {
        &self.kind
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `int f`.
    pub fn mass(&self) -> f64 {
        self.amplitude
            * match &self.kind {
                Kind::Gauss { .. } => 1.0,
                Kind::DiffGauss { .. } => 0.0,
                Kind::Custom(c) => c.mass,
            }
    }

    /// `int |f(x)| |x|^beta dx < infinity` for some `beta > 0`; holds for
    /// every shipped kind and is assumed for custom ones.
    pub fn beta_ok(&self) -> bool {
        true
    }

    /// Shipped kinds are radial; custom ones count as radial when a radial
    /// transform is supplied.
    pub fn is_radial(&self) -> bool {
        match &self.kind {
            Kind::Custom(c) => c.fhat_radial.is_some(),
            _ => true,
        }
    }

    /// `f` at a point with `|x|^2 = r2`; radial kinds only.
    #[inline]
    pub fn eval_sq(&self, r2: f64) -> f64 {
        match &self.kind {
            Kind::Gauss { sigma } => self.amplitude * gauss_density(*sigma, self.d, r2),
            Kind::DiffGauss { sigma1, sigma2 } => {
                self.amplitude * (gauss_density(*sigma1, self.d, r2) - gauss_density(*sigma2, self.d, r2))
            }
            Kind::Custom(_) => panic!("eval_sq called on a custom test function"),
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        Ok(match &self.kind {
            Kind::Custom(c) => self.amplitude * (c.eval)(x),
            _ => self.eval_sq(x.iter().map(|v| v * v).sum()),
        })
    }

    /// Fourier transform as a function of `|xi|`.
    pub fn fhat_radial(&self, r: f64) -> Result<f64> {
        let r2 = r * r;
        let v = match &self.kind {
            Kind::Gauss { sigma } => (-sigma * sigma * r2 / 2.0).exp(),
            Kind::DiffGauss { sigma1, sigma2 } => {
                (-sigma1 * sigma1 * r2 / 2.0).exp() - (-sigma2 * sigma2 * r2 / 2.0).exp()
            }
            Kind::Custom(c) => (c.fhat_radial.as_ref().ok_or(Error::TransformRequired)?)(r),
        };
        Ok(self.amplitude * v)
    }

    pub fn fhat(&self, xi: &[f64]) -> Result<Complex64> {
        if xi.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: xi.len(),
            });
        }
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(Complex64::new(self.fhat_radial(r)?, 0.0))
    }

    /// `E f(G)` for `G ~ N(0, s2 I_d)`.
    pub fn smoothed_mean(&self, s2: f64) -> Result<f64> {
        let d = self.d as f64;
        let conv = |sigma: f64| (2.0 * PI * (sigma * sigma + s2)).powf(-d / 2.0);
        match &self.kind {
            Kind::Gauss { sigma } => Ok(self.amplitude * conv(*sigma)),
            Kind::DiffGauss { sigma1, sigma2 } => Ok(self.amplitude * (conv(*sigma1) - conv(*sigma2))),
            Kind::Custom(_) => self.smoothed_mean_radial(s2),
        }
    }

    /// `E f(G)` by the radial reduction
    /// `(2 pi)^{-d} |S^{d-1}| int_0^inf r^{d-1} fhat(r) e^{-r^2 s2 / 2} dr`.
    pub fn smoothed_mean_radial(&self, s2: f64) -> Result<f64> {
        if !self.is_radial() {
            return Err(Error::TransformRequired);
        }
        self.fhat_radial(0.0)?;
        let d = self.d as i32;
        let est = quad::integrate_to_infinity(
            |r| r.powi(d - 1) * self.fhat_radial(r).unwrap_or(0.0) * (-r * r * s2 / 2.0).exp(),
            0.0,
            1e-300,
            1e-12,
        )?;
        Ok(sphere_area(self.d) * est.value / (2.0 * PI).powi(d))
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(invalid("sigma", format!("must be positive and finite, got {sigma}")))
    }
}

fn check_dim(d: usize) -> Result<()> {
    if d >= 1 {
        Ok(())
    } else {
        Err(invalid("d", "must be >= 1"))
    }
}

/// One realization of a functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSample {
    pub value: f64,
    pub n: f64,
    pub t1: f64,
    pub t2: f64,
    pub m_u: usize,
    pub m_v: usize,
    pub replicate: u64,
}

fn positions(batch: &PathBatch, grid: &TimeGrid) -> Result<Vec<usize>> {
    grid.nodes()
        .iter()
        .map(|&u| batch.position(u).ok_or(Error::NodeNotFound(u)))
        .collect()
}

fn check_batch(f: &TestFunction, batch: &PathBatch) -> Result<()> {
    if batch.dim() != f.d() {
        return Err(Error::DimensionMismatch {
            expected: f.d(),
            got: batch.dim(),
        });
    }
    Ok(())
}

/// Evaluates `f` at a point given by its coordinates.
fn point_value(f: &TestFunction, diff: &mut dyn FnMut(usize) -> f64, buf: &mut [f64]) -> f64 {
    match f.kind() {
        Kind::Custom(c) => {
            for (k, b) in buf.iter_mut().enumerate() {
                *b = diff(k);
            }
            f.amplitude() * (c.eval)(buf)
        }
        _ => f.eval_sq((0..buf.len()).map(|k| diff(k).powi(2)).sum()),
    }
}

/// `sum_ij w^u_i w^v_j f(X_{u_i} - X~_{v_j})`.
#[allow(non_snake_case)]
pub fn evaluate_F(f: &TestFunction, batch: &PathBatch, grid_u: &TimeGrid, grid_v: &TimeGrid) -> Result<FunctionalSample> {
    check_batch(f, batch)?;
    let iu = positions(batch, grid_u)?;
    let iv = positions(batch, grid_v)?;
    let d = f.d();
    let mut buf = vec![0.0; d];
    let mut total = 0.0;
    for (&i, &wu) in iu.iter().zip(grid_u.weights()) {
        let mut row = 0.0;
        for (&j, &wv) in iv.iter().zip(grid_v.weights()) {
            let v = point_value(f, &mut |k| batch.x[k][i] - batch.xt[k][j], &mut buf);
            row += wv * v;
        }
        total += wu * row;
    }
    let meta_u = grid_u.meta();
    let meta_v = grid_v.meta();
    Ok(FunctionalSample {
        value: total,
        n: meta_u.map_or(f64::NAN, |m| m.n),
        t1: meta_u.map_or(f64::NAN, |m| m.t),
        t2: meta_v.map_or(f64::NAN, |m| m.t),
        m_u: grid_u.len(),
        m_v: grid_v.len(),
        replicate: batch.replicate,
    })
}

/// `sum_i w_i f(X_{u_i})`.
pub fn evaluate_single(f: &TestFunction, batch: &PathBatch, grid: &TimeGrid) -> Result<FunctionalSample> {
    check_batch(f, batch)?;
    let iu = positions(batch, grid)?;
    let mut buf = vec![0.0; f.d()];
    let total: f64 = iu
        .iter()
        .zip(grid.weights())
        .map(|(&i, &w)| w * point_value(f, &mut |k| batch.x[k][i], &mut buf))
        .sum();
    let meta = grid.meta();
    Ok(FunctionalSample {
        value: total,
        n: meta.map_or(f64::NAN, |m| m.n),
        t1: meta.map_or(f64::NAN, |m| m.t),
        t2: f64::NAN,
        m_u: grid.len(),
        m_v: 0,
        replicate: batch.replicate,
    })
}

/// Exact expectation of the discretized functional:
/// `sum_ij w_i w_j E f(G_ij)` with `G_ij ~ N(0, (Var X_{u_i} + Var X_{v_j}) I_d)`.
#[allow(non_snake_case)]
pub fn mean_F_oracle(spec: &KernelSpec, f: &TestFunction, grid_u: &TimeGrid, grid_v: &TimeGrid) -> Result<f64> {
    if !f.is_radial() {
        return Err(Error::TransformRequired);
    }
    let var_v: Vec<f64> = grid_v.nodes().iter().map(|&v| spec.variance(v)).collect();
    let mut total = 0.0;
    for (&u, &wu) in grid_u.nodes().iter().zip(grid_u.weights()) {
        let vu = spec.variance(u);
        let mut row = 0.0;
        for (&vv, &wv) in var_v.iter().zip(grid_v.weights()) {
            row += wv * f.smoothed_mean(vu + vv)?;
        }
        total += wu * row;
    }
    Ok(total)
}
