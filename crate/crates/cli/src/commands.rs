use std::fmt::Write as _;

use anyhow::{Context, Result};
use critlim::assumptions::{check_A_schedule, estimate_kappa, sweep_C, Assumption, AssumptionReport, ScheduleReport};
use critlim::combinatorics::{lemma55_identity, pairing_summary, sigma_distribution};
use critlim::functional::TestFunction;
use critlim::limitlaw::{c_fd, d_fd, remark18_check, sample_limit, LimitLawSpec, Order};
use critlim::montecarlo::{estimate_moments, run_experiment};
use serde::Serialize;

use crate::config::RunConfig;
use crate::manifest::Run;

/// Whether every verdict printed by a command was PASS.
pub type Verdict = bool;

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

pub fn simulate(cfg: &RunConfig, seed: u64, run: &mut Run) -> Result<Verdict> {
    let exp = cfg.experiment(seed);
    let report = run_experiment(&exp).context("simulation failed")?;
    println!("{:>6} {:>3} {:>14} {:>12} {:>14} {:>8}", "n", "m", "empirical", "se", "target", "z");
    for b in &report.blocks {
        for r in &b.moments {
            println!(
                "{:>6} {:>3} {:>14.6e} {:>12.3e} {:>14.6e} {:>8.2}",
                b.n, r.m, r.empirical, r.se, r.target, r.zscore
            );
        }
    }
    run.add("moments.csv", report.to_csv());
    run.add("report.json", report.to_json() + "\n");
    if cfg.simulate.raw {
        run.add("raw.csv", report.raw_csv());
    }
    Ok(true)
}

pub const CONSTANTS_HEADER: &str =
    "d,family,H,K,alpha1,alpha2,lambda,C_fd,D_fd,first_m1,first_m2,first_m3,first_m4,second_m2,second_m4";

pub fn constants(cfg: &RunConfig, run: &mut Run) -> Result<Verdict> {
    let spec = cfg.kernel;
    let f = TestFunction::from_config(cfg.function, spec.d)?;
    let a = spec.alphas();
    let t = cfg.simulate.t1.min(cfg.simulate.t2);
    let c = c_fd(spec.d, a.alpha2, f.mass())?;
    let first = LimitLawSpec::new(Order::First, a.lambda, t, c, spec.d)?;
    let d = if f.mass() == 0.0 {
        Some(d_fd(spec.d, a.alpha2, &f)?)
    } else {
        None
    };
    let second = d.map(|d| LimitLawSpec::new(Order::Second, a.lambda, t, d, spec.d)).transpose()?;
    let mut row = format!(
        "{},{},{},{},{},{},{},{},{}",
        spec.d,
        spec.family.name(),
        spec.h(),
        spec.k(),
        a.alpha1,
        a.alpha2,
        a.lambda,
        c,
        opt(d)
    );
    for m in 1..=4 {
        write!(row, ",{}", first.moment(m)?)?;
    }
    for m in [2, 4] {
        write!(row, ",{}", opt(second.map(|s| s.moment(m)).transpose()?))?;
    }
    let csv = format!("{CONSTANTS_HEADER}\n{row}\n");
    print!("{csv}");
    run.add("constants.csv", csv);
    Ok(true)
}

pub const ASSUMPTIONS_HEADER: &str = "family,H,K,assumption,gamma,trials,violations,beta_hat,kappa_hat";

#[derive(Serialize)]
struct AssumptionsJson<'a> {
    c_reports: &'a [AssumptionReport],
    kappa: &'a [AssumptionReport],
    a1: Option<&'a ScheduleReport>,
    a2: Option<&'a ScheduleReport>,
}

pub fn check_assumptions(cfg: &RunConfig, seed: u64, run: &mut Run) -> Result<Verdict> {
    let spec = cfg.kernel;
    let s = &cfg.assumptions;
    let mut c_reports = Vec::new();
    for which in [Assumption::C1, Assumption::C2] {
        c_reports.extend(sweep_C(&spec, which, &s.gammas, s.trials, seed)?);
    }
    let kappa: Vec<AssumptionReport> = (1..=s.kappa_m)
        .map(|m| estimate_kappa(&spec, m, s.trials, seed))
        .collect::<critlim::Result<_>>()?;
    let schedule = |which| -> Result<Option<ScheduleReport>> {
        if s.ratio_bounds.len() < 2 {
            return Ok(None);
        }
        Ok(Some(check_A_schedule(&spec, which, &s.ratio_bounds, s.trials, seed)?))
    };
    let (a1, a2) = (schedule(Assumption::A1)?, schedule(Assumption::A2)?);

    let prefix = format!("{},{},{}", spec.family.name(), spec.h(), spec.k());
    let mut csv = format!("{ASSUMPTIONS_HEADER}\n");
    for r in &c_reports {
        writeln!(
            csv,
            "{prefix},{},{},{},{},{},",
            r.assumption.name(),
            r.gamma,
            r.trials,
            r.violations,
            r.empirical_constant
        )?;
    }
    for r in &kappa {
        writeln!(csv, "{prefix},{},{},{},{},,{}", r.assumption.name(), r.gamma, r.trials, r.violations, r.empirical_constant)?;
    }
    let violations: usize = c_reports.iter().map(|r| r.violations).sum();
    let min_kappa = kappa.iter().map(|r| r.empirical_constant).fold(f64::INFINITY, f64::min);
    let c_ok = violations == 0;
    let b_ok = min_kappa > 0.0;
    println!(
        "C1/C2: {} ({violations} violations over {} cells of {} trials)",
        pass(c_ok),
        c_reports.len(),
        s.trials
    );
    println!("B: {} (min kappa_hat {min_kappa:.4} for m <= {})", pass(b_ok), s.kappa_m);
    for (name, rep) in [("A1", &a1), ("A2", &a2)] {
        if let Some(rep) = rep {
            let env: Vec<String> = rep.reports.iter().map(|r| format!("{:.3e}", r.empirical_constant)).collect();
            let slope = rep.slope.map_or_else(|| "n/a".to_string(), |s| format!("{s:.3}"));
            println!("{name}: envelope [{}] shrinking {} slope {slope}", env.join(", "), rep.shrinking);
        }
    }
    let json = AssumptionsJson {
        c_reports: &c_reports,
        kappa: &kappa,
        a1: a1.as_ref(),
        a2: a2.as_ref(),
    };
    run.add("assumptions.csv", csv);
    run.add("assumptions.json", serde_json::to_string_pretty(&json)? + "\n");
    Ok(c_ok && b_ok)
}

pub fn limit_sample(cfg: &RunConfig, seed: u64, run: &mut Run) -> Result<Verdict> {
    let f = TestFunction::from_config(cfg.function, cfg.kernel.d)?;
    let t = cfg.limit_sample.t;
    let law = LimitLawSpec::for_kernel(&cfg.kernel, &f, t, t)?;
    let xs = sample_limit(&law, cfg.limit_sample.count, seed)?;
    let mut csv = String::from("index,value\n");
    for (i, x) in xs.iter().enumerate() {
        writeln!(csv, "{i},{x}")?;
    }
    println!("law: {:?} lambda {} constant {} t {}", law.order, law.lambda, law.constant, law.t);
    if xs.len() >= 2 {
        let (means, ses) = estimate_moments(&xs, 4)?;
        for (i, (m, se)) in means.iter().zip(&ses).enumerate() {
            let target = law.moment(i as u32 + 1)?;
            println!("m={}: empirical {m:.6e} +- {se:.2e}, target {target:.6e}", i + 1);
        }
    }
    run.add("limit_samples.csv", csv);
    run.add("law.json", serde_json::to_string_pretty(&law)? + "\n");
    Ok(true)
}

#[derive(Serialize)]
struct IdentityRow {
    a: String,
    lhs: String,
    rhs: String,
    equal: bool,
}

#[derive(Serialize)]
struct CombinatoricsJson {
    m: usize,
    sigma_distribution: Vec<u64>,
    identity: Vec<IdentityRow>,
    pairing: Option<critlim::combinatorics::PairingSummary>,
}

pub fn combinatorics_verify(cfg: &RunConfig, run: &mut Run) -> Result<Verdict> {
    let m = cfg.combinatorics.m;
    let mut ok = true;
    let mut identity = Vec::new();
    for a in cfg.a_values()? {
        let r = lemma55_identity(m, a)?;
        ok &= r.equal;
        println!("lemma55: {} ({} = {} at A={})", pass(r.equal), r.lhs, r.rhs, a);
        identity.push(IdentityRow {
            a: a.to_string(),
            lhs: r.lhs.to_string(),
            rhs: r.rhs.to_string(),
            equal: r.equal,
        });
    }
    let pairing = if m.is_multiple_of(2) {
        let s = pairing_summary(m)?;
        let good = s.p1_count == s.expected_count && s.parity_ok;
        ok &= good;
        println!(
            "pairing: {} (#P1 = {} expected {}, parity preserving: {})",
            pass(good),
            s.p1_count,
            s.expected_count,
            s.parity_ok
        );
        Some(s)
    } else {
        println!("pairing: SKIP (m = {m} is odd)");
        None
    };
    let json = CombinatoricsJson {
        m,
        sigma_distribution: sigma_distribution(m)?,
        identity,
        pairing,
    };
    run.add("combinatorics.json", serde_json::to_string_pretty(&json)? + "\n");
    Ok(ok)
}

#[derive(Serialize)]
struct RemarkRow {
    sigma1: f64,
    sigma2: f64,
    #[serde(flatten)]
    result: critlim::limitlaw::Remark18,
}

pub const REMARK_TOLERANCE: f64 = 1e-2;

pub fn remark18(cfg: &RunConfig, run: &mut Run) -> Result<Verdict> {
    let mut ok = true;
    let mut rows = Vec::new();
    for &[a, b] in &cfg.remark18.pairs {
        let f = TestFunction::diff_gauss(a, b, 4)?;
        let r = remark18_check(&f, cfg.remark18.quad_tol)?;
        let good = r.rel_err <= REMARK_TOLERANCE;
        ok &= good;
        println!(
            "remark18 ({a},{b}): {} (lhs {:.10} rhs {:.10} rel {:.2e}{})",
            pass(good),
            r.lhs,
            r.rhs,
            r.rel_err,
            if r.non_compact_support { ", non-compact support" } else { "" }
        );
        rows.push(RemarkRow {
            sigma1: a,
            sigma2: b,
            result: r,
        });
    }
    run.add("remark18.json", serde_json::to_string_pretty(&rows)? + "\n");
    Ok(ok)
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
