//! Covariance kernels of fractional, sub-fractional and bi-fractional
//! Brownian motion.
//!
//! Every family satisfies `Var(X_t) = alpha1 * t^(2 H_eff)` with
//! `H_eff = H` (fBm, sub-fBm) or `H_eff = H K` (bi-fBm). Increment
//! covariances are evaluated through second differences of power
//! functions so that short increments far from the origin keep full
//! relative precision.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Gaussian process family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fbm,
    Subfbm,
    Bifbm,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Fbm => "fbm",
            Family::Subfbm => "subfbm",
            Family::Bifbm => "bifbm",
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fbm" => Ok(Family::Fbm),
            "subfbm" | "sub-fbm" => Ok(Family::Subfbm),
            "bifbm" | "bi-fbm" => Ok(Family::Bifbm),
            other => Err(invalid("family", format!("unknown family `{other}`"))),
        }
    }
}

/// Variance constants of the two increment regimes and the induced `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Alphas {
    pub alpha1: f64,
    pub alpha2: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct RawKernelSpec {
    family: Family,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "K", default)]
    k: Option<f64>,
    d: usize,
    #[serde(default)]
    critical: bool,
}

/// A validated Gaussian process family with its parameters and ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKernelSpec")]
pub struct KernelSpec {
    pub family: Family,
    #[serde(rename = "H")]
    h: f64,
    #[serde(rename = "K")]
    k: f64,
    pub d: usize,
    pub critical: bool,
}

impl TryFrom<RawKernelSpec> for KernelSpec {
    type Error = crate::Error;

    fn try_from(raw: RawKernelSpec) -> Result<Self> {
        let k = match (raw.family, raw.k) {
            (Family::Bifbm, Some(k)) => k,
            (Family::Bifbm, None) => return Err(invalid("K", "bifbm requires K")),
            (_, _) => 1.0,
        };
        let spec = KernelSpec::new(raw.family, raw.h, k, raw.d)?;
        if raw.critical {
            spec.critical()
        } else {
            Ok(spec)
        }
    }
}

impl KernelSpec {
    /// Builds a spec; `k` is ignored (forced to 1) unless the family is bi-fBm.
    pub fn new(family: Family, h: f64, k: f64, d: usize) -> Result<Self> {
        if !(h > 0.0 && h < 1.0) {
            return Err(invalid("H", format!("H = {h} outside (0,1)")));
        }
        let k = if family == Family::Bifbm { k } else { 1.0 };
        if !(k > 0.0 && k <= 1.0) {
            return Err(invalid("K", format!("K = {k} outside (0,1]")));
        }
        if d == 0 {
            return Err(invalid("d", "dimension must be positive"));
        }
        Ok(KernelSpec {
            family,
            h,
            k,
            d,
            critical: false,
        })
    }

    pub fn fbm(h: f64, d: usize) -> Result<Self> {
        Self::new(Family::Fbm, h, 1.0, d)
    }

    pub fn subfbm(h: f64, d: usize) -> Result<Self> {
        Self::new(Family::Subfbm, h, 1.0, d)
    }

    pub fn bifbm(h: f64, k: f64, d: usize) -> Result<Self> {
        Self::new(Family::Bifbm, h, k, d)
    }

    /// Marks the spec as a critical-case spec, enforcing `H_eff * d = 2`.
    pub fn critical(mut self) -> Result<Self> {
        let prod = self.h_eff() * self.d as f64;
        if (prod - 2.0).abs() > 1e-9 {
            return Err(invalid(
                "critical",
                format!("H_eff * d = {prod}, critical case requires 2"),
            ));
        }
        self.critical = true;
        Ok(self)
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    /// Exponent of the variance law: `H` or `H K`.
    pub fn h_eff(&self) -> f64 {
        match self.family {
            Family::Bifbm => self.h * self.k,
            _ => self.h,
        }
    }

    pub fn alphas(&self) -> Alphas {
        let (alpha1, alpha2) = match self.family {
            Family::Fbm => (1.0, 1.0),
            Family::Subfbm => (2.0 - (2.0 * self.h - 1.0).exp2(), 1.0),
            Family::Bifbm => (1.0, (1.0 - self.k).exp2()),
        };
        let lambda = (alpha2 / alpha1).powf(self.d as f64 / 4.0);
        Alphas {
            alpha1,
            alpha2,
            lambda,
        }
    }

    pub fn cov(&self, t: f64, s: f64) -> f64 {
        if t == 0.0 || s == 0.0 {
            return 0.0;
        }
        let two_h = 2.0 * self.h;
        match self.family {
            Family::Fbm => 0.5 * (pow(t, two_h) + pow(s, two_h) - pow((t - s).abs(), two_h)),
            Family::Subfbm => {
                pow(t, two_h) + pow(s, two_h)
                    - 0.5 * (pow(t + s, two_h) + pow((t - s).abs(), two_h))
            }
            Family::Bifbm => {
                let k = self.k;
                (-k).exp2()
                    * (pow(pow(t, two_h) + pow(s, two_h), k) - pow((t - s).abs(), two_h * k))
            }
        }
    }

    /// `Var(X_t)`, evaluated through the variance law.
    pub fn variance(&self, t: f64) -> f64 {
        self.alphas().alpha1 * pow(t, 2.0 * self.h_eff())
    }

    /// `E[(X_{a.1} - X_{a.0}) (X_{b.1} - X_{b.0})]` for arbitrary intervals.
    pub fn interval_cov(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let two_h = 2.0 * self.h;
        let (da, db) = (a.1 - a.0, b.1 - b.0);
        match self.family {
            Family::Fbm => fbm_interval_cov(two_h, a, b),
            Family::Subfbm => {
                let extra = if (two_h - 1.0).abs() < 1e-15 {
                    0.0
                } else {
                    signed_second_difference(two_h, a.0 + b.0, da, db)
                };
                fbm_interval_cov(two_h, a, b) - 0.5 * extra
            }
            Family::Bifbm => {
                let k = self.k;
                let base = pow(a.0, two_h) + pow(b.0, two_h);
                let ja = signed_forward_difference(two_h, a.0, da);
                let jb = signed_forward_difference(two_h, b.0, db);
                let extra = if (k - 1.0).abs() < 1e-15 {
                    0.0
                } else {
                    signed_second_difference(k, base, ja, jb)
                };
                (-k).exp2() * extra + (1.0 - k).exp2() * fbm_interval_cov(two_h * k, a, b)
            }
        }
    }

    /// Variance of `X_t - X_s`.
    pub fn increment_var(&self, s: f64, t: f64) -> f64 {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        self.interval_cov((lo, hi), (lo, hi))
    }

    /// `E[(X_{t4} - X_{t3}) (X_{t2} - X_{t1})]`.
    pub fn increment_cov(&self, q: &IncrementQuadruple) -> f64 {
        self.interval_cov((q.t3, q.t4), (q.t1, q.t2))
    }
}

/// Extension point for additional covariance models.
pub trait CovarianceKernel: Send + Sync {
    fn cov(&self, t: f64, s: f64) -> f64;

    /// Exponent `2 H_eff` of the variance law `Var(X_t) = alpha1 t^(2 H_eff)`.
    fn variance_exponent(&self) -> f64;

    fn interval_cov(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        self.cov(a.1, b.1) - self.cov(a.1, b.0) - self.cov(a.0, b.1) + self.cov(a.0, b.0)
    }
}

impl CovarianceKernel for KernelSpec {
    fn cov(&self, t: f64, s: f64) -> f64 {
        KernelSpec::cov(self, t, s)
    }

    fn variance_exponent(&self) -> f64 {
        2.0 * self.h_eff()
    }

    fn interval_cov(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        KernelSpec::interval_cov(self, a, b)
    }
}

/// Four ordered times `t1 < t2 < t3 < t4` defining the increments
/// `[t1, t2]` and `[t3, t4]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementQuadruple {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
    pub t4: f64,
}

impl IncrementQuadruple {
    pub fn new(t1: f64, t2: f64, t3: f64, t4: f64) -> Result<Self> {
        if !(t1 >= 0.0 && t1 < t2 && t2 < t3 && t3 < t4) || !t4.is_finite() {
            return Err(invalid(
                "quadruple",
                format!("need 0 <= t1 < t2 < t3 < t4, got ({t1}, {t2}, {t3}, {t4})"),
            ));
        }
        Ok(IncrementQuadruple { t1, t2, t3, t4 })
    }

    /// Builds the quadruple from `t1` and the three gaps `(dt2, dt3, dt4)`.
    pub fn from_gaps(t1: f64, dt2: f64, dt3: f64, dt4: f64) -> Result<Self> {
        let t2 = t1 + dt2;
        let t3 = t2 + dt3;
        Self::new(t1, t2, t3, t3 + dt4)
    }

    /// `(dt2, dt3, dt4)` with `dt_i = t_i - t_{i-1}`.
    pub fn deltas(&self) -> (f64, f64, f64) {
        (self.t2 - self.t1, self.t3 - self.t2, self.t4 - self.t3)
    }
}

/// `t^p` as `exp(p ln t)`, with `0^p = 0`.
pub(crate) fn pow(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        (p * t.ln()).exp()
    }
}

fn fbm_interval_cov(p: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (first, second) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    let (d1, d2) = (first.1 - first.0, second.1 - second.0);
    if first == second {
        return pow(d1, p);
    }
    if first.1 <= second.0 {
        if (p - 1.0).abs() < 1e-15 {
            return 0.0;
        }
        return 0.5 * signed_second_difference(p, second.0 - first.1, d1, d2);
    }
    0.5 * (pow((a.1 - b.0).abs(), p) + pow((a.0 - b.1).abs(), p)
        - pow((a.1 - b.1).abs(), p)
        - pow((a.0 - b.0).abs(), p))
}

/// `g(y + h) - g(y)` for `g(y) = y^p`, accurate for any `h / y`.
fn forward_difference(p: f64, y: f64, h: f64) -> f64 {
    if y == 0.0 {
        pow(h, p)
    } else {
        pow(y, p) * (p * (h / y).ln_1p()).exp_m1()
    }
}

fn signed_forward_difference(p: f64, y: f64, h: f64) -> f64 {
    if h >= 0.0 {
        forward_difference(p, y, h)
    } else {
        -forward_difference(p, y + h, -h)
    }
}

fn signed_second_difference(p: f64, x: f64, a: f64, c: f64) -> f64 {
    // Only nonnegative steps occur for ordered intervals; negative steps
    // are mapped back by shifting the base point.
    let (x, sa) = if a >= 0.0 { (x, 1.0) } else { (x + a, -1.0) };
    let (x, sc) = if c >= 0.0 { (x, 1.0) } else { (x + c, -1.0) };
    sa * sc * second_difference(p, x, a.abs(), c.abs())
}

/// `g(x+a+c) - g(x+a) - g(x+c) + g(x)` for `g(y) = y^p`, `x, a, c >= 0`.
pub(crate) fn second_difference(p: f64, x: f64, a: f64, c: f64) -> f64 {
    let (lo, hi) = if a <= c { (a, c) } else { (c, a) };
    if lo == 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return forward_difference(p, hi, lo) - pow(lo, p);
    }
    if lo >= 0.1 * x {
        return forward_difference(p, x + lo, hi) - forward_difference(p, x, hi);
    }
    // d/dr [g(x+r+hi) - g(x+r)] integrated over r in [0, lo]; the integrand
    // is analytic on a neighbourhood ten times wider than the interval.
    let half = 0.5 * lo;
    GL10.iter()
        .map(|&(node, w)| {
            let r = half * (node + 1.0);
            w * p * forward_difference(p - 1.0, x + r, hi)
        })
        .sum::<f64>()
        * half
}

const GL10: [(f64, f64); 10] = [
    (-0.973_906_528_517_171_7, 0.066_671_344_308_688_14),
    (-0.865_063_366_688_984_5, 0.149_451_349_150_580_6),
    (-0.679_409_568_299_024_4, 0.219_086_362_515_982_04),
    (-0.433_395_394_129_247_2, 0.269_266_719_309_996_35),
    (-0.148_874_338_981_631_2, 0.295_524_224_714_752_87),
    (0.148_874_338_981_631_2, 0.295_524_224_714_752_87),
    (0.433_395_394_129_247_2, 0.269_266_719_309_996_35),
    (0.679_409_568_299_024_4, 0.219_086_362_515_982_04),
    (0.865_063_366_688_984_5, 0.149_451_349_150_580_6),
    (0.973_906_528_517_171_7, 0.066_671_344_308_688_14),
];

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bilinear(spec: &KernelSpec, q: &IncrementQuadruple) -> f64 {
        spec.cov(q.t4, q.t2) - spec.cov(q.t4, q.t1) - spec.cov(q.t3, q.t2) + spec.cov(q.t3, q.t1)
    }

    fn all_specs() -> Vec<KernelSpec> {
        vec![
            KernelSpec::fbm(0.5, 4).unwrap(),
            KernelSpec::fbm(0.25, 8).unwrap(),
            KernelSpec::fbm(0.75, 3).unwrap(),
            KernelSpec::subfbm(0.4, 5).unwrap(),
            KernelSpec::subfbm(0.3, 5).unwrap(),
            KernelSpec::subfbm(2.0 / 3.0, 3).unwrap(),
            KernelSpec::bifbm(0.75, 2.0 / 3.0, 4).unwrap(),
            KernelSpec::bifbm(0.4, 0.625, 8).unwrap(),
        ]
    }

    #[test]
    fn covariance_examples() {
        assert_eq!(KernelSpec::fbm(0.5, 1).unwrap().cov(2.0, 1.0), 1.0);
        let sub = KernelSpec::subfbm(0.5, 1).unwrap();
        assert!((sub.cov(1.0, 1.0) - 1.0).abs() < 1e-15);
        let bi = KernelSpec::bifbm(0.75, 2.0 / 3.0, 4).unwrap();
        assert!((bi.cov(1.0, 1.0) - 1.0).abs() < 1e-15);
        for spec in all_specs() {
            assert_eq!(spec.cov(0.0, 3.0), 0.0);
        }
    }

    #[test]
    fn alpha_examples() {
        let a = KernelSpec::fbm(0.3, 4).unwrap().alphas();
        assert_eq!((a.alpha1, a.alpha2, a.lambda), (1.0, 1.0, 1.0));

        let a = KernelSpec::subfbm(0.4, 5).unwrap().alphas();
        assert!((a.alpha1 - 1.129_449_436_703_875_7).abs() < 1e-14);
        assert_eq!(a.alpha2, 1.0);
        assert!((a.lambda - 0.858_848_395_329_542_7).abs() < 1e-13);

        let a = KernelSpec::bifbm(0.75, 2.0 / 3.0, 4).unwrap().alphas();
        assert_eq!(a.alpha1, 1.0);
        assert!((a.alpha2 - 1.259_921_049_894_873_2).abs() < 1e-14);
        assert!((a.lambda - a.alpha2).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(KernelSpec::fbm(0.0, 4).is_err());
        assert!(KernelSpec::fbm(1.0, 4).is_err());
        assert!(KernelSpec::bifbm(0.5, 0.0, 4).is_err());
        assert!(KernelSpec::bifbm(0.5, 1.2, 4).is_err());
        assert!(KernelSpec::fbm(0.5, 0).is_err());
        assert!(KernelSpec::fbm(0.4, 4).unwrap().critical().is_err());
        assert!(KernelSpec::fbm(0.5, 4).unwrap().critical().is_ok());
        assert!(KernelSpec::bifbm(0.75, 2.0 / 3.0, 4).unwrap().critical().is_ok());
    }

    #[test]
    fn config_schema_round_trip() {
        let json = r#"{"family":"bifbm","H":0.75,"K":0.6666666666666666,"d":4,"critical":true}"#;
        let spec: KernelSpec = serde_json::from_str(json).unwrap();
        assert!(spec.critical);
        assert_eq!(spec.family, Family::Bifbm);
        let back: KernelSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        let no_k: KernelSpec = serde_json::from_str(r#"{"family":"fbm","H":0.5,"d":4}"#).unwrap();
        assert_eq!(no_k.k(), 1.0);
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"fbm","H":1.5,"d":4}"#).is_err());
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"bifbm","H":0.5,"d":4}"#).is_err());
    }

    #[test]
    fn brownian_disjoint_increments_uncorrelated() {
        let spec = KernelSpec::fbm(0.5, 1).unwrap();
        let q = IncrementQuadruple::new(0.0, 1.0, 2.0, 3.0).unwrap();
        assert_eq!(spec.increment_cov(&q), 0.0);
    }

    #[test]
    fn subfbm_decomposition_example() {
        let h = 0.3;
        let spec = KernelSpec::subfbm(h, 1).unwrap();
        let (t1, t2, t3, t4) = (1.0_f64, 2.0_f64, 3.0_f64, 4.0_f64);
        let p = 2.0 * h;
        let extra = 0.5
            * ((t1 + t4).powf(p) + (t2 + t3).powf(p) - (t2 + t4).powf(p) - (t1 + t3).powf(p));
        let fbm = KernelSpec::fbm(h, 1).unwrap();
        let fbm_part = fbm.cov(t4, t2) - fbm.cov(t4, t1) - fbm.cov(t3, t2) + fbm.cov(t3, t1);
        let q = IncrementQuadruple::new(t1, t2, t3, t4).unwrap();
        assert!((spec.increment_cov(&q) - (extra + fbm_part)).abs() < 1e-12);
    }

    #[test]
    fn variance_law_on_log_grid() {
        for spec in all_specs() {
            let alpha1 = spec.alphas().alpha1;
            let p = 2.0 * spec.h_eff();
            for i in 0..=90 {
                let t = 10f64.powf(-3.0 + i as f64 / 10.0);
                let law = alpha1 * t.powf(p);
                let err = (spec.cov(t, t) - law).abs();
                assert!(err <= 1e-12 * law.max(1.0), "{spec:?} t={t} err={err}");
                assert!((spec.increment_var(0.0, t) - law).abs() <= 1e-12 * law.max(1.0));
            }
        }
    }

    #[test]
    fn second_difference_matches_direct_formula() {
        let g = |y: f64, p: f64| y.powf(p);
        for &p in &[0.3, 0.8, 1.0, 1.5] {
            for &(x, a, c) in &[(1.0, 0.5, 2.0), (3.0, 0.01, 0.02), (0.0, 1.0, 0.3), (2.0, 5.0, 7.0)] {
                let direct = g(x + a + c, p) - g(x + a, p) - g(x + c, p) + g(x, p);
                let stable = second_difference(p, x, a, c);
                assert!((direct - stable).abs() < 1e-12, "p={p} {x},{a},{c}: {direct} vs {stable}");
            }
        }
        // tiny steps far from the origin: compare with the second-order Taylor term
        let (p, x, a, c) = (0.6_f64, 1e4_f64, 1e-4_f64, 2e-4_f64);
        let taylor = p * (p - 1.0) * x.powf(p - 2.0) * a * c;
        let stable = second_difference(p, x, a, c);
        assert!(((stable - taylor) / taylor).abs() < 1e-6);
    }

    #[test]
    fn subfbm_variance_bounds() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        use rand::{Rng, SeedableRng};
        for &h in &[0.25, 0.4, 0.5, 2.0 / 3.0, 0.8] {
            let spec = KernelSpec::subfbm(h, 1).unwrap();
            let a1 = spec.alphas().alpha1;
            for _ in 0..2000 {
                let s: f64 = 10f64.powf(rng.random_range(-4.0..4.0));
                let t = s + 10f64.powf(rng.random_range(-4.0..4.0));
                let v = spec.increment_var(s, t);
                let base = (t - s).powf(2.0 * h);
                assert!(v >= a1.min(1.0) * base * (1.0 - 1e-9), "h={h} s={s} t={t}");
                assert!(v <= a1.max(1.0) * base * (1.0 + 1e-9), "h={h} s={s} t={t}");
            }
        }
    }

    #[test]
    fn bifbm_variance_bounds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for &(h, k) in &[(0.75, 2.0 / 3.0), (0.4, 0.625), (0.9, 0.3), (0.5, 0.5)] {
            let spec = KernelSpec::bifbm(h, k, 1).unwrap();
            for _ in 0..2000 {
                let s: f64 = 10f64.powf(rng.random_range(-4.0..4.0));
                let t = s + 10f64.powf(rng.random_range(-4.0..4.0));
                let v = spec.increment_var(s, t);
                let base = (t - s).powf(2.0 * h * k);
                assert!(v >= base * (1.0 - 1e-9), "h={h} k={k} s={s} t={t}");
                assert!(v <= (1.0 - k).exp2() * base * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn gram_is_numerically_psd() {
        use nalgebra::DMatrix;
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for spec in all_specs() {
            for _ in 0..20 {
                let m = rng.random_range(2..=32);
                let mut nodes: Vec<f64> = (0..m).map(|_| rng.random_range(0.01..50.0)).collect();
                nodes.sort_by(f64::total_cmp);
                let g = DMatrix::from_fn(m, m, |i, j| spec.cov(nodes[i], nodes[j]));
                let min = g.symmetric_eigenvalues().min();
                assert!(min >= -1e-10, "{spec:?} min eig {min}");
            }
        }
    }

    proptest! {
        #[test]
        fn covariance_symmetric(t in 0.0f64..100.0, s in 0.0f64..100.0, which in 0usize..8) {
            let spec = all_specs()[which];
            prop_assert_eq!(spec.cov(t, s), spec.cov(s, t));
        }

        #[test]
        fn increment_cov_matches_bilinear(
            t1 in 0.0f64..5.0,
            d2 in 0.05f64..5.0,
            d3 in 0.0f64..5.0,
            d4 in 0.05f64..5.0,
            which in 0usize..8,
        ) {
            let spec = all_specs()[which];
            let d3 = d3 + 1e-3;
            let q = IncrementQuadruple::from_gaps(t1, d2, d3, d4).unwrap();
            let stable = spec.increment_cov(&q);
            let direct = bilinear(&spec, &q);
            prop_assert!((stable - direct).abs() <= 1e-11 * (1.0 + q.t4.powf(2.0 * spec.h())));
        }

        #[test]
        fn cauchy_schwarz(t1 in 0.0f64..5.0, d2 in 0.01f64..5.0, d3 in 0.01f64..5.0, d4 in 0.01f64..5.0, which in 0usize..8) {
            let spec = all_specs()[which];
            let q = IncrementQuadruple::from_gaps(t1, d2, d3, d4).unwrap();
            let c = spec.increment_cov(&q);
            let s2 = spec.increment_var(q.t1, q.t2);
            let s4 = spec.increment_var(q.t3, q.t4);
            prop_assert!(c.abs() <= (s2 * s4).sqrt() * (1.0 + 1e-12));
        }
    }
}
