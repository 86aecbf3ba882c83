//! Limiting constants `C_{f,d}`, `D_{f,d}`, the moments of the limit laws
//! and direct samplers for them when `lambda <= 1`.
//!
//! First order (mass of `f` nonzero, normalization `1/n`):
//! `C t Z Z~ N^2`. Second order (mass zero, normalization `1/sqrt(n)`):
//! `sqrt(D t Z Z~ N^2) eta`. `Z`, `Z~` are iid with
//! `E Z^m = Gamma(m + lambda) / (m! Gamma(lambda))`.

use std::f64::consts::PI;

use rand_distr::{Beta, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::functional::TestFunction;
use crate::kernels::KernelSpec;
use crate::quad;
use crate::rng::{Purpose, StreamKey};
use crate::special::{beta, compensated_sum, double_factorial, gamma, sphere_area};

/// `Gamma(m + lambda) / (m! Gamma(lambda)) = prod_{i<m} (lambda + i) / (i + 1)`.
pub fn z_moment(lambda: f64, m: u32) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    Ok((0..m).fold(1.0, |acc, i| acc * (lambda + i as f64) / (i + 1) as f64))
}

/// `E Z^m` for `Z ~ Beta(lambda, 1 - lambda)` by direct tanh-sinh
/// integration; independent of [`z_moment`].
pub fn beta_moment_numeric(lambda: f64, m: u32) -> Result<f64> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(invalid("lambda", "Beta(lambda, 1 - lambda) needs lambda in (0, 1)"));
    }
    let density = |k: u32| {
        quad::tanh_sinh(
            move |_, left, right| left.powf(k as f64 + lambda - 1.0) * right.powf(-lambda),
            0.0,
            1.0,
            1e-14,
        )
    };
    Ok(density(m)?.value / density(0)?.value)
}

fn check_dim(d: usize) -> Result<()> {
    if d >= 3 {
        Ok(())
    } else {
        Err(invalid("d", format!("limit constants need d >= 3, got {d}")))
    }
}

fn check_alpha(alpha2: f64) -> Result<()> {
    if alpha2 > 0.0 && alpha2.is_finite() {
        Ok(())
    } else {
        Err(invalid("alpha2", "must be positive"))
    }
}

fn quarter_beta(d: usize) -> f64 {
    let q = d as f64 / 4.0;
    q * beta(q, q)
}

/// `(d/4) B(d/4, d/4) (2 pi alpha2)^{-d/2} mass`.
pub fn c_fd(d: usize, alpha2: f64, mass: f64) -> Result<f64> {
    check_dim(d)?;
    check_alpha(alpha2)?;
    Ok(quarter_beta(d) * (2.0 * PI * alpha2).powf(-(d as f64) / 2.0) * mass)
}

/// `int |fhat(x)|^2 |x|^{-d} dx = |S^{d-1}| int_0^inf |fhat(r)|^2 / r dr`,
/// integrated in `y = ln r`.
pub fn spectral_log_integral(f: &TestFunction) -> Result<f64> {
    let mass = f.fhat_radial(0.0)?;
    if mass != 0.0 {
        return Err(Error::NonzeroMass(mass));
    }
    let g = |y: f64| {
        let v = f.fhat_radial(y.exp()).unwrap_or(0.0);
        v * v
    };
    let (lo, hi, pieces) = (-60.0_f64, 60.0_f64, 48);
    let width = (hi - lo) / pieces as f64;
    let peak = (0..=480).map(|k| g(lo + k as f64 * (hi - lo) / 480.0)).fold(0.0, f64::max);
    let abs_tol = 1e-16 * peak / pieces as f64;
    let mut parts = Vec::with_capacity(pieces);
    for k in 0..pieces {
        let a = lo + k as f64 * width;
        parts.push(quad::integrate(g, a, a + width, abs_tol, 1e-13)?.value);
    }
    Ok(sphere_area(f.d()) * compensated_sum(parts))
}

/// `d B(d/4,d/4) Gamma^2((d+4)/4) / pi^{d/2} (2 pi alpha2)^{-d} int |fhat|^2 |x|^{-d} dx`.
pub fn d_fd(d: usize, alpha2: f64, f: &TestFunction) -> Result<f64> {
    check_dim(d)?;
    check_alpha(alpha2)?;
    if f.d() != d {
        return Err(Error::DimensionMismatch { expected: d, got: f.d() });
    }
    let q = d as f64 / 4.0;
    let g = gamma((d as f64 + 4.0) / 4.0);
    let pre = d as f64 * beta(q, q) * g * g / PI.powf(d as f64 / 2.0) * (2.0 * PI * alpha2).powf(-(d as f64));
    Ok(pre * spectral_log_integral(f)?)
}

/// Moments of the limit of the unnormalized integral:
/// `(2 pi / alpha2)^{m d / 2} z(lambda, m)^2 ((d/4) B)^m (2m - 1)!! t^m`.
pub fn first_order_moment(lambda: f64, d: usize, alpha2: f64, t: f64, m: u32) -> Result<f64> {
    check_dim(d)?;
    check_alpha(alpha2)?;
    let z = z_moment(lambda, m)?;
    let mf = m as f64;
    Ok((2.0 * PI / alpha2).powf(mf * d as f64 / 2.0)
        * z
        * z
        * quarter_beta(d).powf(mf)
        * double_factorial(2 * m as i64 - 1)
        * t.powf(mf))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    First,
    Second,
}

/// A limit law `C t Z Z~ N^2` (first order) or `sqrt(D t Z Z~ N^2) eta`
/// (second order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LimitLawSpec {
    pub order: Order,
    pub lambda: f64,
    pub t: f64,
    pub constant: f64,
    pub d: usize,
}

impl LimitLawSpec {
    pub fn new(order: Order, lambda: f64, t: f64, constant: f64, d: usize) -> Result<Self> {
        z_moment(lambda, 0)?;
        if !(t > 0.0) || !constant.is_finite() {
            return Err(invalid("limit law", "t > 0 and a finite constant required"));
        }
        Ok(LimitLawSpec {
            order,
            lambda,
            t,
            constant,
            d,
        })
    }

    /// The law for `spec` and `f`, with `t = t1 ^ t2`. The order follows
    /// from whether `f` has mass.
    pub fn for_kernel(spec: &KernelSpec, f: &TestFunction, t1: f64, t2: f64) -> Result<Self> {
        let a = spec.alphas();
        let t = t1.min(t2);
        if f.mass() != 0.0 {
            Self::new(Order::First, a.lambda, t, c_fd(spec.d, a.alpha2, f.mass())?, spec.d)
        } else {
            Self::new(Order::Second, a.lambda, t, d_fd(spec.d, a.alpha2, f)?, spec.d)
        }
    }

    /// `E L^m`.
    pub fn moment(&self, m: u32) -> Result<f64> {
        match self.order {
            Order::First => {
                let z = z_moment(self.lambda, m)?;
                Ok((self.constant * self.t).powi(m as i32) * z * z * double_factorial(2 * m as i64 - 1))
            }
            Order::Second => second_order_moment(self, m),
        }
    }
}

/// `0` for odd `m`, `z(lambda, m/2)^2 (D t)^{m/2} ((m-1)!!)^2` for even `m`.
pub fn second_order_moment(law: &LimitLawSpec, m: u32) -> Result<f64> {
    if law.order != Order::Second {
        return Err(invalid("order", "second_order_moment needs a second-order law"));
    }
    if m % 2 == 1 {
        return Ok(0.0);
    }
    let z = z_moment(law.lambda, m / 2)?;
    let df = double_factorial(m as i64 - 1);
    Ok(z * z * (law.constant * law.t).powi(m as i32 / 2) * df * df)
}

/// `count` iid draws of the limit law. `Z ~ Beta(lambda, 1 - lambda)`, or
/// `Z = 1` when `lambda = 1`.
pub fn sample_limit(law: &LimitLawSpec, count: usize, seed: u64) -> Result<Vec<f64>> {
    let lambda = law.lambda;
    if lambda > 1.0 {
        return Err(Error::NoSampler(lambda));
    }
    let beta = if lambda < 1.0 {
        Some(Beta::new(lambda, 1.0 - lambda).map_err(|e| invalid("lambda", e.to_string()))?)
    } else {
        None
    };
    let mut rng = StreamKey::new(seed, Purpose::Limit, 0, 0).rng();
    let scale = law.constant * law.t;
    Ok((0..count)
        .map(|_| {
            let (z, zt) = match &beta {
                Some(b) => (b.sample(&mut rng), b.sample(&mut rng)),
                None => (1.0, 1.0),
            };
            let n: f64 = StandardNormal.sample(&mut rng);
            let first = scale * z * zt * n * n;
            match law.order {
                Order::First => first,
                Order::Second => {
                    let eta: f64 = StandardNormal.sample(&mut rng);
                    first.sqrt() * eta
                }
            }
        })
        .collect())
}

/// Both sides of `int_{R^4} |fhat|^2 |x|^{-4} dx = -2 pi^2 int int f(x) f(y) ln|x - y| dx dy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Remark18 {
    pub lhs: f64,
    pub rhs: f64,
    pub rel_err: f64,
    /// `f` is not compactly supported; agreement is numerical evidence only.
    pub non_compact_support: bool,
}

/// The right side reduces to `-2 pi^2 |S^3|^2 int int r^3 s^3 g(r) g(s) M(r, s) dr ds`
/// with `f(x) = g(|x|)` and the spherical mean
/// `M(r, s) = ln max(r, s) + (min(r, s) / max(r, s))^2 / 4`.
pub fn remark18_check(f: &TestFunction, quad_tol: f64) -> Result<Remark18> {
    if f.d() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, got: f.d() });
    }
    if !f.is_radial() {
        return Err(Error::TransformRequired);
    }
    let lhs = spectral_log_integral(f)?;
    let g = |r: f64| f.eval(&[r, 0.0, 0.0, 0.0]).unwrap_or(0.0);
    let tol = quad_tol.min(1e-6);
    let inner = |r: f64| -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let ln_r = r.ln();
        let below = quad::integrate(|s| s.powi(3) * g(s) * (ln_r + s * s / (4.0 * r * r)), 0.0, r, 1e-300, tol)
            .map(|e| e.value)
            .unwrap_or(f64::NAN);
        let above = quad::integrate_to_infinity(|s| s.powi(3) * g(s) * (s.ln() + r * r / (4.0 * s * s)), r, 1e-300, tol)
            .map(|e| e.value)
            .unwrap_or(f64::NAN);
        below + above
    };
    let outer = quad::integrate_to_infinity(|r| r.powi(3) * g(r) * inner(r), 0.0, 1e-300, tol)?;
    if !outer.value.is_finite() {
        return Err(Error::Quadrature {
            estimate: outer.value,
            error: outer.error,
        });
    }
    let area = sphere_area(4);
    let rhs = -2.0 * PI * PI * area * area * outer.value;
    let rel_err = if lhs == 0.0 && rhs.abs() < 1e-14 {
        0.0
    } else {
        (lhs - rhs).abs() / lhs.abs().max(rhs.abs())
    };
    Ok(Remark18 {
        lhs,
        rhs,
        rel_err,
        non_compact_support: !matches!(f.kind(), crate::functional::Kind::Custom(_)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn z_moment_examples() {
        assert_eq!(z_moment(1.0, 5).unwrap(), 1.0);
        assert_eq!(z_moment(0.37, 1).unwrap(), 0.37);
        let l = 0.858_848_395_329_542_7;
        assert!(rel(z_moment(l, 2).unwrap(), l * (l + 1.0) / 2.0) < 1e-15);
        assert!(z_moment(0.0, 1).is_err());
        assert!(z_moment(-1.0, 1).is_err());
        assert_eq!(z_moment(2.5, 0).unwrap(), 1.0);
    }

    #[test]
    fn z_moment_is_beta_moment() {
        for &l in &[0.3, 0.5, 0.858_848_395_329_542_7] {
            for m in 0..=6 {
                let num = beta_moment_numeric(l, m).unwrap();
                assert!(rel(z_moment(l, m).unwrap(), num) < 1e-10, "lambda={l} m={m}");
            }
        }
    }

    #[test]
    fn c_fd_examples() {
        assert!(rel(c_fd(4, 1.0, 1.0).unwrap(), 0.025_330_295_910_584_4) < 1e-13);
        assert_eq!(c_fd(5, 1.3, 0.0).unwrap(), 0.0);
        assert!(c_fd(2, 1.0, 1.0).is_err());
    }

    #[test]
    fn d_fd_closed_form() {
        let f = TestFunction::diff_gauss(1.0, 2.0, 4).unwrap();
        let d = d_fd(4, 1.0, &f).unwrap();
        assert!(rel(d, 0.001_145_393_869_019_46) < 1e-8, "{d}");
        let g = TestFunction::gauss(1.0, 4).unwrap();
        assert!(matches!(d_fd(4, 1.0, &g), Err(Error::NonzeroMass(_))));
        let z = TestFunction::diff_gauss(1.5, 1.5, 4).unwrap();
        assert_eq!(d_fd(4, 1.0, &z).unwrap(), 0.0);
    }

    #[test]
    fn d_fd_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let a: f64 = rng.random_range(0.2..3.0);
            let b: f64 = rng.random_range(0.2..3.0);
            let f = TestFunction::diff_gauss(a, b, 4).unwrap();
            // |S^3| * ln((a^2+b^2)^2 / (4 a^2 b^2)) / 2
            let closed = 2.0 * PI * PI * 0.5 * ((a * a + b * b).powi(2) / (4.0 * a * a * b * b)).ln();
            assert!(rel(spectral_log_integral(&f).unwrap(), closed) < 1e-8, "{a} {b}");
        }
    }

    #[test]
    fn first_order_examples() {
        assert!(rel(first_order_moment(1.0, 4, 1.0, 1.0, 1).unwrap(), 4.0 * PI * PI) < 1e-14);
        assert_eq!(first_order_moment(0.7, 5, 1.2, 3.0, 0).unwrap(), 1.0);
    }

    #[test]
    fn first_order_scaling_identity() {
        for &(d, a2, l, t) in &[(4, 1.0, 1.0, 1.0), (5, 1.0, 0.8588, 0.7), (4, 1.26, 1.26, 2.0), (3, 0.9, 0.4, 1.5)] {
            let mass: f64 = 1.0;
            let c = c_fd(d, a2, mass).unwrap();
            let law = LimitLawSpec::new(Order::First, l, t, c, d).unwrap();
            for m in 0..=6 {
                let lhs = (mass / (2.0 * PI).powi(d as i32)).powi(m as i32) * first_order_moment(l, d, a2, t, m).unwrap();
                assert!(rel(lhs, law.moment(m).unwrap()) < 1e-12);
            }
            let m1 = first_order_moment(l, d, a2, t, 1).unwrap() / (2.0 * PI).powi(d as i32);
            assert!(rel(m1, c * t * l * l) < 1e-12);
        }
    }

    #[test]
    fn second_order_examples() {
        let law = LimitLawSpec::new(Order::Second, 1.0, 2.0, 0.3, 4).unwrap();
        assert_eq!(second_order_moment(&law, 3).unwrap(), 0.0);
        assert!(rel(second_order_moment(&law, 2).unwrap(), 0.6) < 1e-15);
        assert_eq!(second_order_moment(&law, 0).unwrap(), 1.0);
        let first = LimitLawSpec::new(Order::First, 1.0, 2.0, 0.3, 4).unwrap();
        assert!(second_order_moment(&first, 2).is_err());
    }

    #[test]
    fn sampler_refuses_large_lambda() {
        let law = LimitLawSpec::new(Order::First, 1.26, 1.0, 1.0, 4).unwrap();
        assert_eq!(sample_limit(&law, 10, 1), Err(Error::NoSampler(1.26)));
    }

    #[test]
    fn limit_sampler_moments() {
        let c = c_fd(4, 1.0, 1.0).unwrap();
        let law = LimitLawSpec::new(Order::First, 1.0, 1.0, c, 4).unwrap();
        let xs = sample_limit(&law, 20_000, 8).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
        assert!((mean - c).abs() <= 4.0 * sd / (xs.len() as f64).sqrt());

        let second = LimitLawSpec::new(Order::Second, 1.0, 1.0, 0.01, 4).unwrap();
        let ys = sample_limit(&second, 20_000, 9).unwrap();
        for p in [1, 3] {
            let v: Vec<f64> = ys.iter().map(|y| y.powi(p)).collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let s = (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
            assert!(m.abs() <= 4.0 * s / (v.len() as f64).sqrt());
        }
    }

    #[test]
    fn subcritical_lambda_sampler_moments() {
        let spec = KernelSpec::subfbm(0.4, 5).unwrap();
        let a = spec.alphas();
        let law = LimitLawSpec::new(Order::First, a.lambda, 1.0, c_fd(5, a.alpha2, 1.0).unwrap(), 5).unwrap();
        let xs = sample_limit(&law, 40_000, 21).unwrap();
        for m in 1..=2 {
            let v: Vec<f64> = xs.iter().map(|x| x.powi(m)).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt();
            let target = law.moment(m as u32).unwrap();
            assert!((mean - target).abs() <= 4.0 * sd / (v.len() as f64).sqrt(), "m={m}");
        }
    }

    #[test]
    fn remark18_values() {
        let f = TestFunction::diff_gauss(1.0, 2.0, 4).unwrap();
        let r = remark18_check(&f, 1e-8).unwrap();
        assert!(rel(r.lhs, 4.404_677_152_250_87) < 1e-9);
        assert!(r.rel_err < 1e-6, "{r:?}");
        let z = TestFunction::diff_gauss(1.0, 1.0, 4).unwrap();
        let r0 = remark18_check(&z, 1e-8).unwrap();
        assert_eq!((r0.lhs, r0.rhs), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn z_moment_recurrence(l in 0.01f64..5.0, m in 0u32..40) {
            let a = z_moment(l, m).unwrap();
            let b = z_moment(l, m + 1).unwrap();
            prop_assert_eq!(b, a * (l + m as f64) / (m + 1) as f64);
        }
    }
}
