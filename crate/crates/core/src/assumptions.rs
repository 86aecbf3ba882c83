//! Randomized checks of the increment assumptions.
//!
//! (A1)/(A2) compare increment variances against `alpha1 t^{2H}` and
//! `alpha2 h^{2H}` for `h / t` small; (B) estimates the local
//! nondeterminism constant `kappa`; (C1)/(C2) bound the correlation of two
//! increments with incomparable (C1) or far-apart (C2) lengths by an explicit
//! `beta(gamma)`. All ratios are scale free, so draws are log-uniform over
//! eight decades.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernels::{pow, Family, IncrementQuadruple, KernelSpec};
use crate::rng::{Purpose, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assumption {
    A1,
    A2,
    B,
    C1,
    C2,
}

impl Assumption {
    fn tag(self) -> u16 {
        self as u16
    }

    pub fn name(self) -> &'static str {
        match self {
            Assumption::A1 => "A1",
            Assumption::A2 => "A2",
            Assumption::B => "B",
            Assumption::C1 => "C1",
            Assumption::C2 => "C2",
        }
    }
}

/// Outcome of one randomized check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionReport {
    pub assumption: Assumption,
    pub spec: KernelSpec,
    /// `gamma` for C1/C2, the ratio bound for A1/A2, `m` for B.
    pub gamma: f64,
    pub trials: usize,
    pub violations: usize,
    /// C1/C2: `min(beta - ratio)`; A: smallest normalized variance; B: `kappa_hat`.
    pub worst_margin: f64,
    /// `beta_hat` (C), `phi_hat` (A) or `kappa_hat` (B).
    pub empirical_constant: f64,
    /// The explicit `beta(gamma)` tested against (C only).
    pub bound: Option<f64>,
}

const LOG_SPAN: (f64, f64) = (-4.0, 4.0);

fn log_uniform(rng: &mut ChaCha12Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

fn trial_rng(seed: u64, which: Assumption, replicate: u64) -> ChaCha12Rng {
    StreamKey::new(seed, Purpose::Trials, which.tag(), replicate).rng()
}

fn fbm_c1(h: f64, gamma: f64) -> f64 {
    if (h - 0.5).abs() < 1e-15 {
        0.0
    } else if h > 0.5 {
        4.0 * gamma.powf(-(1.0 - h))
    } else {
        gamma.powf(-h)
    }
}

fn fbm_c2(h: f64, gamma: f64) -> f64 {
    2.0 * gamma.powf(-(2.0 - 2.0 * h))
}

/// Explicit `beta_1(gamma)` / `beta_2(gamma)` for the family, valid for
/// the correlation `|cov| / (sigma_4 sigma_2)`.
pub fn beta_bound(spec: &KernelSpec, which: Assumption, gamma: f64) -> Option<f64> {
    let h = spec.h();
    let k = spec.k();
    match (spec.family, which) {
        (Family::Fbm, Assumption::C1) => Some(fbm_c1(h, gamma)),
        (Family::Fbm, Assumption::C2) => Some(fbm_c2(h, gamma)),
        (Family::Subfbm, Assumption::C1) => {
            let c_lo = spec.alphas().alpha1.min(1.0);
            let cross = 4.0 * (gamma.powf(-h) + gamma.powf(-(1.0 - h)));
            Some((fbm_c1(h, gamma) + cross) / c_lo)
        }
        (Family::Subfbm, Assumption::C2) => {
            let c_lo = spec.alphas().alpha1.min(1.0);
            Some((fbm_c2(h, gamma) + 2.0 * gamma.powf(-(2.0 - 2.0 * h))) / c_lo)
        }
        (Family::Bifbm, Assumption::C1) => {
            let hk = h * k;
            let cross = if h <= 0.5 {
                gamma.powf(-hk)
            } else {
                8.0 * gamma.powf(-(k - hk))
            };
            Some(cross + (1.0 - k).exp2() * fbm_c1(hk, gamma))
        }
        (Family::Bifbm, Assumption::C2) => {
            let hk = h * k;
            let cross = 16.0 * gamma.powf(2.0 * hk - (4.0 * h).min(2.0));
            Some(cross + (1.0 - k).exp2() * fbm_c2(hk, gamma))
        }
        _ => None,
    }
}

/// Normalized variance `Var / scale` at one `(t, h)`; `h / t = ratio`.
fn a_normalized(spec: &KernelSpec, which: Assumption, t: f64, ratio: f64) -> f64 {
    let p = 2.0 * spec.h_eff();
    // increment lengths are recomputed from the rounded endpoints so the
    // kernel and the scale see the same length
    let h_raw = ratio * t;
    match which {
        Assumption::A1 => {
            let hi = t + h_raw;
            let span = hi - h_raw;
            spec.increment_var(h_raw, hi) / pow(span, p)
        }
        _ => {
            let hi = t + h_raw;
            let h = hi - t;
            spec.increment_var(t, hi) / pow(h, p)
        }
    }
}

fn check_a_draws(spec: &KernelSpec, which: Assumption, bound: f64, draws: &[(f64, f64)]) -> AssumptionReport {
    let a = spec.alphas();
    let alpha = if which == Assumption::A1 { a.alpha1 } else { a.alpha2 };
    let mut envelope: f64 = 0.0;
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for &(t, u) in draws {
        let v = a_normalized(spec, which, t, u * bound);
        if !(v >= 0.0) {
            violations += 1;
        }
        worst = worst.min(v);
        envelope = envelope.max((v - alpha).abs());
    }
    AssumptionReport {
        assumption: which,
        spec: *spec,
        gamma: bound,
        trials: draws.len(),
        violations,
        worst_margin: worst,
        empirical_constant: envelope,
        bound: None,
    }
}

fn a_draws(which: Assumption, trials: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = trial_rng(seed, which, 0);
    (0..trials)
        .map(|_| {
            let t = log_uniform(&mut rng, LOG_SPAN.0, LOG_SPAN.1);
            // u in (0, 1]
            let u = 1.0 - rng.random::<f64>();
            (t, u)
        })
        .collect()
}

fn check_a_args(which: Assumption, ratio_bound: f64, trials: usize) -> Result<()> {
    if !matches!(which, Assumption::A1 | Assumption::A2) {
        return Err(invalid("assumption", "check_A handles A1 and A2"));
    }
    if !(ratio_bound > 0.0 && ratio_bound <= 1.0) {
        return Err(invalid("ratio_bound", "must lie in (0, 1]"));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    Ok(())
}

/// Empirical envelope `phi_hat = max |Var / scale - alpha|` over `trials`
/// draws with `h / t` uniform in `(0, ratio_bound]`.
#[allow(non_snake_case)]
pub fn check_A(spec: &KernelSpec, which: Assumption, ratio_bound: f64, trials: usize, seed: u64) -> Result<AssumptionReport> {
    check_a_args(which, ratio_bound, trials)?;
    Ok(check_a_draws(spec, which, ratio_bound, &a_draws(which, trials, seed)))
}

/// `check_A` along a decreasing ratio schedule with shared draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub reports: Vec<AssumptionReport>,
    /// Log-log slope of `phi_hat` against the ratio bound; `None` when an
    /// envelope vanishes.
    pub slope: Option<f64>,
    /// Envelope nonincreasing along the schedule.
    pub shrinking: bool,
}

#[allow(non_snake_case)]
pub fn check_A_schedule(
    spec: &KernelSpec,
    which: Assumption,
    schedule: &[f64],
    trials: usize,
    seed: u64,
) -> Result<ScheduleReport> {
    if schedule.len() < 2 || schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("schedule", "needs at least two strictly decreasing ratio bounds"));
    }
    for &b in schedule {
        check_a_args(which, b, trials)?;
    }
    let draws = a_draws(which, trials, seed);
    let mut reports: Vec<AssumptionReport> =
        schedule.iter().map(|&b| check_a_draws(spec, which, b, &draws)).collect();
    let env: Vec<f64> = reports.iter().map(|r| r.empirical_constant).collect();
    let shrinking = env.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    if !shrinking {
        for r in &mut reports {
            r.violations += 1;
        }
    }
    let slope = if env.iter().all(|&e| e > 1e-13) {
        let xs: Vec<f64> = schedule.iter().map(|b| b.ln()).collect();
        let ys: Vec<f64> = env.iter().map(|e| e.ln()).collect();
        Some(least_squares_slope(&xs, &ys))
    } else {
        None
    };
    Ok(ScheduleReport {
        reports,
        slope,
        shrinking,
    })
}

fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Smallest eigenvalue of the normalized increment Gram matrix
/// `D^{-1/2} G D^{-1/2}` at the given ordered times `0 < s_1 < ... < s_m`.
pub fn normalized_min_eigenvalue(spec: &KernelSpec, s: &[f64]) -> Result<f64> {
    let m = s.len();
    let p = 2.0 * spec.h_eff();
    let knots: Vec<f64> = std::iter::once(0.0).chain(s.iter().copied()).collect();
    let intervals: Vec<(f64, f64)> = knots.windows(2).map(|w| (w[0], w[1])).collect();
    let scale: Vec<f64> = intervals.iter().map(|(a, b)| (b - a).powf(p / 2.0)).collect();
    let g = DMatrix::from_fn(m, m, |i, j| {
        spec.interval_cov(intervals[i], intervals[j]) / (scale[i] * scale[j])
    });
    let eig = nalgebra::SymmetricEigen::try_new(g, 1e-14, 10_000).ok_or(Error::EigenFailure)?;
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `kappa_hat = min` over trials of the normalized minimum eigenvalue for
/// random times with log-uniform gaps on `[1e-3, 1e3]`.
pub fn estimate_kappa(spec: &KernelSpec, m: usize, trials: usize, seed: u64) -> Result<AssumptionReport> {
    if !(1..=12).contains(&m) {
        return Err(invalid("m", "must lie in 1..=12"));
    }
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let mut rng = trial_rng(seed, Assumption::B, m as u64);
    let mut kappa = f64::INFINITY;
    let mut s = vec![0.0; m];
    for _ in 0..trials {
        let mut acc = 0.0;
        for si in s.iter_mut() {
            acc += log_uniform(&mut rng, -3.0, 3.0);
            *si = acc;
        }
        kappa = kappa.min(normalized_min_eigenvalue(spec, &s)?);
    }
    Ok(AssumptionReport {
        assumption: Assumption::B,
        spec: *spec,
        gamma: m as f64,
        trials,
        violations: usize::from(!(kappa > 0.0)),
        worst_margin: kappa,
        empirical_constant: kappa,
        bound: None,
    })
}

fn satisfies(which: Assumption, gamma: f64, (d2, d3, d4): (f64, f64, f64)) -> bool {
    match which {
        Assumption::C1 => {
            let r = d2 / d4;
            r <= 1.0 / gamma || r >= gamma
        }
        _ => d2 / d3 <= 1.0 / gamma && d4 / d3 <= 1.0 / gamma,
    }
}

/// Correlation `|E(X_{t4} - X_{t3})(X_{t2} - X_{t1})| / (sigma_4 sigma_2)`.
pub fn increment_correlation(spec: &KernelSpec, q: &IncrementQuadruple) -> f64 {
    let c = spec.increment_cov(q);
    let v2 = spec.increment_var(q.t1, q.t2);
    let v4 = spec.increment_var(q.t3, q.t4);
    c.abs() / (v2 * v4).sqrt()
}

fn draw_quadruple(rng: &mut ChaCha12Rng) -> (f64, (f64, f64, f64)) {
    let (lo, hi) = LOG_SPAN;
    let t1 = log_uniform(rng, lo, hi);
    let gaps = (log_uniform(rng, lo, hi), log_uniform(rng, lo, hi), log_uniform(rng, lo, hi));
    (t1, gaps)
}

fn c_report(spec: &KernelSpec, which: Assumption, gamma: f64, pool: &[IncrementQuadruple]) -> AssumptionReport {
    let beta = beta_bound(spec, which, gamma).expect("C assumptions have bounds");
    let mut beta_hat: f64 = 0.0;
    let mut margin = f64::INFINITY;
    let mut violations = 0;
    let mut trials = 0;
    for q in pool {
        if !satisfies(which, gamma, q.deltas()) {
            continue;
        }
        trials += 1;
        let r = increment_correlation(spec, q);
        if !(r <= beta * (1.0 + 1e-9)) {
            violations += 1;
        }
        beta_hat = beta_hat.max(r);
        margin = margin.min(beta - r);
    }
    AssumptionReport {
        assumption: which,
        spec: *spec,
        gamma,
        trials,
        violations,
        worst_margin: margin,
        empirical_constant: beta_hat,
        bound: Some(beta),
    }
}

fn check_c_args(which: Assumption, gamma: f64) -> Result<()> {
    if !matches!(which, Assumption::C1 | Assumption::C2) {
        return Err(invalid("assumption", "check_C handles C1 and C2"));
    }
    if !(gamma > 1.0) || !gamma.is_finite() {
        return Err(invalid("gamma", "must be > 1"));
    }
    Ok(())
}

/// Draws quadruples until `trials` of them satisfy the ratio constraint of
/// every `gamma` in `gammas`.
fn c_pool(which: Assumption, gammas: &[f64], trials: usize, seed: u64) -> Vec<IncrementQuadruple> {
    let mut rng = trial_rng(seed, which, 0);
    let strictest = gammas.iter().copied().fold(1.0, f64::max);
    let mut pool = Vec::new();
    let mut strict_count = 0;
    while strict_count < trials {
        let (t1, (d2, d3, d4)) = draw_quadruple(&mut rng);
        let Ok(q) = IncrementQuadruple::from_gaps(t1, d2, d3, d4) else {
            continue;
        };
        let deltas = q.deltas();
        if !gammas.iter().any(|&g| satisfies(which, g, deltas)) {
            continue;
        }
        if satisfies(which, strictest, deltas) {
            strict_count += 1;
        }
        pool.push(q);
    }
    pool
}

/// Checks `|cov| / (sigma_4 sigma_2) <= beta(gamma)` on `trials` admissible quadruples.
#[allow(non_snake_case)]
pub fn check_C(spec: &KernelSpec, which: Assumption, gamma: f64, trials: usize, seed: u64) -> Result<AssumptionReport> {
    check_c_args(which, gamma)?;
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let pool = c_pool(which, &[gamma], trials, seed);
    Ok(c_report(spec, which, gamma, &pool))
}

/// `check_C` over several `gamma` on one common pool, re-filtered per
/// `gamma`, so admissible sets are nested and `beta_hat` is monotone.
/// Each `gamma` sees at least `trials` quadruples.
#[allow(non_snake_case)]
pub fn sweep_C(spec: &KernelSpec, which: Assumption, gammas: &[f64], trials: usize, seed: u64) -> Result<Vec<AssumptionReport>> {
    for &g in gammas {
        check_c_args(which, g)?;
    }
    if trials == 0 {
        return Err(invalid("trials", "must be >= 1"));
    }
    let pool = c_pool(which, gammas, trials, seed);
    Ok(gammas.iter().map(|&g| c_report(spec, which, g, &pool)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> Vec<KernelSpec> {
        vec![
            KernelSpec::fbm(2.0 / 3.0, 3).unwrap(),
            KernelSpec::subfbm(0.4, 5).unwrap(),
            KernelSpec::bifbm(0.75, 2.0 / 3.0, 4).unwrap(),
        ]
    }

    fn extra() -> Vec<KernelSpec> {
        vec![
            KernelSpec::fbm(0.4, 5).unwrap(),
            KernelSpec::fbm(0.5, 4).unwrap(),
            KernelSpec::subfbm(2.0 / 3.0, 3).unwrap(),
            KernelSpec::bifbm(0.4, 0.9, 5).unwrap(),
            KernelSpec::bifbm(0.9, 0.5, 4).unwrap(),
        ]
    }

    #[test]
    fn fbm_a2_envelope_vanishes() {
        let spec = KernelSpec::fbm(0.7, 3).unwrap();
        for b in [0.5, 0.1, 0.001] {
            let r = check_A(&spec, Assumption::A2, b, 500, 1).unwrap();
            assert_eq!(r.empirical_constant, 0.0);
            assert_eq!(r.violations, 0);
        }
    }

    #[test]
    fn subfbm_a2_slope() {
        let spec = KernelSpec::subfbm(0.4, 5).unwrap();
        let s = check_A_schedule(&spec, Assumption::A2, &[0.1, 0.01, 0.001], 2000, 3).unwrap();
        assert!(s.shrinking);
        let slope = s.slope.unwrap();
        assert!((slope - 1.2).abs() <= 0.15, "slope {slope}");
    }

    #[test]
    fn a1_envelopes_shrink() {
        for spec in defaults().into_iter().chain(extra()) {
            let s = check_A_schedule(&spec, Assumption::A1, &[0.1, 0.01, 0.001, 1e-5], 500, 4).unwrap();
            assert!(s.shrinking, "{spec:?}");
            assert!(s.reports.iter().all(|r| r.violations == 0));
            assert!(s.reports.last().unwrap().empirical_constant < 0.05, "{spec:?}");
        }
    }

    #[test]
    fn kappa_examples() {
        for spec in defaults() {
            let r = estimate_kappa(&spec, 1, 200, 5).unwrap();
            assert!((r.empirical_constant - spec.alphas().alpha1).abs() < 1e-12);
        }
        let bm = KernelSpec::fbm(0.5, 4).unwrap();
        let r = estimate_kappa(&bm, 2, 200, 5).unwrap();
        assert!((r.empirical_constant - 1.0).abs() < 1e-12);
        assert!(estimate_kappa(&bm, 13, 1, 5).is_err());
    }

    #[test]
    fn brownian_c1_is_zero() {
        let bm = KernelSpec::fbm(0.5, 4).unwrap();
        let r = check_C(&bm, Assumption::C1, 3.0, 1000, 6).unwrap();
        assert_eq!(r.empirical_constant, 0.0);
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn lemma_examples() {
        let f = KernelSpec::fbm(0.75, 3).unwrap();
        let r = check_C(&f, Assumption::C1, 16.0, 2000, 7).unwrap();
        assert!((r.bound.unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(r.violations, 0);
        assert!(r.empirical_constant < 1.0);
        let b = KernelSpec::bifbm(0.75, 2.0 / 3.0, 4).unwrap();
        let r = check_C(&b, Assumption::C2, 32.0, 2000, 8).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn bounds_hold_with_nested_monotone_sweeps() {
        let gammas = [2.0, 5.0, 10.0, 100.0];
        for spec in defaults().into_iter().chain(extra()) {
            for which in [Assumption::C1, Assumption::C2] {
                let reports = sweep_C(&spec, which, &gammas, 1000, 9).unwrap();
                for r in &reports {
                    assert_eq!(r.violations, 0, "{spec:?} {which:?} gamma={}", r.gamma);
                    assert!(r.trials >= 1000);
                    assert!(r.empirical_constant <= 1.0 + 1e-12);
                }
                for w in reports.windows(2) {
                    assert!(w[1].empirical_constant <= w[0].empirical_constant + 1e-9);
                }
            }
        }
    }

    #[test]
    fn invalid_arguments() {
        let s = KernelSpec::fbm(0.5, 4).unwrap();
        assert!(check_C(&s, Assumption::C1, 1.0, 10, 0).is_err());
        assert!(check_C(&s, Assumption::A1, 2.0, 10, 0).is_err());
        assert!(check_A(&s, Assumption::A1, 0.0, 10, 0).is_err());
        assert!(check_A(&s, Assumption::C1, 0.1, 10, 0).is_err());
    }
}
