//! Acceptance gate: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p gensumset --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use gensumset::combinat::{rep_count, rep_count_bruteforce, rep_counts_all};
use gensumset::density::{
    b_constant, b_constant_finite_n, expected_missing_sums_h2, g_hm_closed_form, g_series_default,
    missing_sum_probability_h2, missing_sums_asymptote_h2,
};
use gensumset::experiments::{self, ExperimentConfig, ExperimentKind, Tolerances};
use gensumset::sampling::sample_set;
use gensumset::sumset::{gen_sumset, tuple_statistics};
use gensumset::{
    Budgets, ExperimentReport, ProbabilitySpec, Rational, SampleParameters, SignedCombination,
};
use num_bigint::{BigInt, BigUint};
use rayon::prelude::*;

type Outcome = Result<String, String>;

/// Name, check and time limit.
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn combo(s: u32, d: u32) -> SignedCombination {
    SignedCombination::new(s, d).unwrap()
}

fn within_rel(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol * target.abs()
}

fn config(
    kind: ExperimentKind,
    combos: Vec<SignedCombination>,
    n: u64,
    trials: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        combos,
        n_values: vec![n],
        c: None,
        delta: None,
        p: None,
        trials,
        seed: 20_240_601,
        k: vec![],
        budgets: Budgets::default(),
        tolerances: Tolerances::default(),
    }
}

fn decay(mut cfg: ExperimentConfig, c: f64, num: i64, den: i64) -> ExperimentConfig {
    cfg.c = Some(c);
    cfg.delta = Some(Rational::new(num, den));
    cfg
}

fn mean_of(report: &ExperimentReport, statistic: &str, combo: SignedCombination, n: u64) -> f64 {
    report
        .row(statistic, combo, n)
        .unwrap_or_else(|| panic!("report has no {statistic} row for {combo}"))
        .mean
}

fn criterion_1() -> Outcome {
    let budgets = Budgets::default();
    let mut checked = 0u64;
    for h in 2..=4 {
        for cm in SignedCombination::all_with_h(h) {
            for n_max in 0..=10u64 {
                let (lo, hi) = cm.range(n_max);
                for n in lo - 2..=hi + 2 {
                    let fast = rep_count(n, cm, n_max);
                    let slow =
                        rep_count_bruteforce(n, cm, n_max, &budgets).map_err(|e| e.to_string())?;
                    ensure(fast == slow, || {
                        format!("R({n}; {cm}, N={n_max}): {fast} vs {slow}")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} values equal"))
}

fn criterion_2() -> Outcome {
    let budgets = Budgets::default();
    let combos: Vec<SignedCombination> = (2..=5).flat_map(SignedCombination::all_with_h).collect();
    (0..=1000u64).into_par_iter().try_for_each(|n_max| {
        for &cm in &combos {
            let table = rep_counts_all(cm, n_max, &budgets).map_err(|e| e.to_string())?;
            let want = BigUint::from(n_max + 1).pow(cm.h());
            ensure(table.total() == want, || {
                format!("{cm}, N={n_max}: total {}", table.total())
            })?;
            let shift = (cm.s() as i64 - cm.d() as i64) * n_max as i64;
            for (n, c) in table.iter() {
                ensure(table.get(shift - n) == Some(c), || {
                    format!("{cm}, N={n_max}: reflection fails at n={n}")
                })?;
            }
        }
        Ok::<(), String>(())
    })?;
    Ok(format!("N = 0..=1000, {} combinations", combos.len()))
}

fn criterion_3() -> Outcome {
    for h in 2..=6 {
        let b = b_constant::<f64>(h, 1).map_err(|e| e.to_string())?;
        ensure((b - 1.0).abs() <= 1e-10, || format!("b_{{{h},1}} = {b}"))?;
    }
    let mut fact = 1.0;
    for k in 1..=10usize {
        fact *= (k + 1) as f64;
        let b = b_constant::<f64>(2, k).map_err(|e| e.to_string())?;
        let want = 2.0 / fact;
        ensure((b - want).abs() <= 1e-10, || {
            format!("b_{{2,{k}}} = {b}, want {want}")
        })?;
    }
    let budgets = Budgets::default();
    let mut worst = 0.0f64;
    for h in 2..=4 {
        for cm in SignedCombination::all_with_h(h) {
            for k in 1..=3 {
                let exact = b_constant::<f64>(h, k).map_err(|e| e.to_string())?;
                let est = b_constant_finite_n(k, cm, 2000, &budgets).map_err(|e| e.to_string())?;
                let gap = (est - exact).abs() / exact;
                worst = worst.max(gap);
                ensure(gap <= 0.05, || {
                    format!("{cm}, k={k}: finite-N gap {gap:.4}")
                })?;
            }
        }
    }
    Ok(format!("worst finite-N relative gap at N=2000: {worst:.4}"))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for c in [0.25, 0.5, 1.0, 2.0, 4.0f64] {
        for (cm, x) in [(combo(1, 1), c * c), (combo(2, 0), c * c / 2.0)] {
            let series = g_series_default(c, cm).map_err(|e| e.to_string())?.value;
            let closed = g_hm_closed_form(x);
            let err = (series - closed).abs();
            worst = worst.max(err);
            ensure(err <= 1e-8, || format!("c={c} {cm}: {series} vs {closed}"))?;
        }
    }
    Ok(format!("max |series - closed form| = {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let n = 100_000;
    let cfg = decay(
        config(
            ExperimentKind::CriticalSize,
            vec![combo(1, 1), combo(2, 0)],
            n,
            100,
        ),
        1.0,
        1,
        2,
    );
    let report = experiments::run(&cfg, 0).map_err(|e| e.to_string())?;
    let diff = mean_of(&report, "size_over_N", combo(1, 1), n);
    let sum = mean_of(&report, "size_over_N", combo(2, 0), n);
    let sum_target = g_hm_closed_form(0.5);
    ensure(within_rel(diff, 0.7357588, 0.03), || {
        format!("mean |A-A|/N = {diff:.5}, target 0.7357588")
    })?;
    ensure(within_rel(sum, sum_target, 0.03), || {
        format!("mean |A+A|/N = {sum:.5}, target {sum_target:.5}")
    })?;
    Ok(format!(
        "|A-A|/N = {diff:.5} (0.73576), |A+A|/N = {sum:.5} ({sum_target:.5})"
    ))
}

fn criterion_6() -> Outcome {
    let n = 1_000_000;
    let cfg = decay(
        config(
            ExperimentKind::CriticalSize,
            vec![combo(2, 1), combo(3, 0)],
            n,
            50,
        ),
        2.0,
        2,
        3,
    );
    let report = experiments::run(&cfg, 0).map_err(|e| e.to_string())?;
    let size = mean_of(&report, "size_over_N", combo(2, 1), n);
    let target = g_series_default(2.0, combo(2, 1))
        .map_err(|e| e.to_string())?
        .value;
    let wins = mean_of(&report, "larger_than_s3d0", combo(2, 1), n);
    ensure(within_rel(size, target, 0.05), || {
        format!("mean |A_(2,1)|/N = {size:.5}, target {target:.5}")
    })?;
    ensure(wins >= 0.95, || {
        format!("|A_(2,1)| > |A_(3,0)| in {:.0}% of trials", 100.0 * wins)
    })?;
    Ok(format!(
        "|A_(2,1)|/N = {size:.5} ({target:.5}), larger in {:.0}% of trials",
        100.0 * wins
    ))
}

fn criterion_7() -> Outcome {
    let n = 1_000_000;
    let h3 = decay(
        config(
            ExperimentKind::FastRatio,
            vec![combo(2, 1), combo(3, 0)],
            n,
            100,
        ),
        1.0,
        4,
        5,
    );
    let h2 = decay(
        config(
            ExperimentKind::FastRatio,
            vec![combo(1, 1), combo(2, 0)],
            n,
            100,
        ),
        1.0,
        3,
        4,
    );
    let r3 = experiments::run(&h3, 0).map_err(|e| e.to_string())?;
    let r2 = experiments::run(&h2, 0).map_err(|e| e.to_string())?;
    let ratio3 = mean_of(&r3, "ratio_over_s3d0", combo(2, 1), n);
    let ratio2 = mean_of(&r2, "ratio_over_s2d0", combo(1, 1), n);
    let summary = format!("h=3 ratio {ratio3:.4} (3), h=2 ratio {ratio2:.4} (2)");
    ensure(
        within_rel(ratio3, 3.0, 0.10) && within_rel(ratio2, 2.0, 0.10),
        || summary.clone(),
    )?;
    Ok(summary)
}

fn criterion_8() -> Outcome {
    let n = 1_000_000;
    let cfg = decay(
        config(
            ExperimentKind::SlowH2,
            vec![combo(2, 0), combo(1, 1)],
            n,
            50,
        ),
        1.0,
        3,
        10,
    );
    let report = experiments::run(&cfg, 0).map_err(|e| e.to_string())?;
    let p = ProbabilitySpec::Decay {
        c: 1.0,
        delta: Rational::new(3, 10),
    }
    .at(n)
    .map_err(|e| e.to_string())?;
    let target = missing_sums_asymptote_h2(p);
    let missing = mean_of(&report, "complement", combo(2, 0), n);
    let ratio = mean_of(&report, "complement_ratio_over_s1d1", combo(2, 0), n);
    let summary = format!("S^c = {missing:.0} (4/p^2 = {target:.0}), S^c/D^c = {ratio:.4} (2)");
    ensure(
        within_rel(missing, target, 0.10) && within_rel(ratio, 2.0, 0.10),
        || summary.clone(),
    )?;
    Ok(summary)
}

fn enumerate_missing(n_max: u32, p: f64) -> Vec<f64> {
    let size = n_max + 1;
    let mut missing = vec![0.0; 2 * n_max as usize + 1];
    for mask in 0u32..(1 << size) {
        let k = mask.count_ones() as i32;
        let weight = p.powi(k) * (1.0 - p).powi(size as i32 - k);
        let sums = (0..size)
            .filter(|a| mask >> a & 1 == 1)
            .fold(0u32, |acc, a| acc | mask << a);
        for (n, slot) in missing.iter_mut().enumerate() {
            if sums >> n & 1 == 0 {
                *slot += weight;
            }
        }
    }
    missing
}

fn criterion_9() -> Outcome {
    for n_max in 0..=12u32 {
        for p in [0.05, 0.3, 0.5, 0.9] {
            for (n, want) in enumerate_missing(n_max, p).into_iter().enumerate() {
                let got = missing_sum_probability_h2(n as u64, n_max as u64, p)
                    .map_err(|e| e.to_string())?;
                ensure((got - want).abs() <= 1e-12, || {
                    format!("N={n_max} p={p} n={n}: {got} vs enumeration {want}")
                })?;
            }
        }
    }
    let limit = expected_missing_sums_h2(100_000, 0.5).map_err(|e| e.to_string())?;
    ensure((limit - 10.0).abs() <= 0.01, || {
        format!("expected missing sums {limit}")
    })?;

    let n = 100;
    let mut cfg = config(ExperimentKind::Mstd, vec![], n, 1_000_000);
    cfg.p = Some(0.5);
    let report = experiments::run(&cfg, 0).map_err(|e| e.to_string())?;
    let sums = mean_of(&report, "missing", combo(2, 0), n);
    let diffs = mean_of(&report, "missing", combo(1, 1), n);
    let frac = mean_of(&report, "sum_dominated_fraction", combo(2, 0), n);
    let summary = format!(
        "law exact; E = {limit:.4}; missing sums {sums:.3}, differences {diffs:.3}, sum-dominated {frac:.2e}"
    );
    ensure(
        within_rel(sums, 10.0, 0.10)
            && within_rel(diffs, 6.0, 0.10)
            && (2e-4..=9e-4).contains(&frac),
        || summary.clone(),
    )?;
    Ok(summary)
}

fn criterion_10() -> Outcome {
    let budgets = Budgets::default();
    let combos: Vec<SignedCombination> = (2..=4).flat_map(SignedCombination::all_with_h).collect();
    let mut largest = 0u64;
    for i in 0..500u64 {
        let cm = combos[i as usize % combos.len()];
        let n_max = 5 + (i * 7) % 36;
        let p = [0.15, 0.3, 0.5][(i % 3) as usize];
        let params = SampleParameters::new(n_max, ProbabilitySpec::Fixed { p }, 99, i)
            .map_err(|e| e.to_string())?;
        let mut set = sample_set(&params);
        // Cap |A| so the h-fold class enumeration stays small.
        if set.len() > 12 {
            set = gensumset::SampledSet::new(n_max, set.elements()[..12].to_vec())
                .map_err(|e| e.to_string())?;
        }
        let first = tuple_statistics(&set, cm, 1, &budgets).map_err(|e| e.to_string())?;
        let k_max = first.max_multiplicity().max(1) as usize;
        let stats = tuple_statistics(&set, cm, k_max, &budgets).map_err(|e| e.to_string())?;
        let card = gen_sumset(&set, cm, &budgets)
            .map_err(|e| e.to_string())?
            .cardinality;
        largest = largest.max(stats.max_multiplicity());
        ensure(stats.alternating_sum(k_max) == BigInt::from(card), || {
            format!(
                "instance {i} ({cm}, N={n_max}): sum {} vs |A_sd| = {card}",
                stats.alternating_sum(k_max)
            )
        })?;
    }
    Ok(format!(
        "500 instances exact, largest multiplicity {largest}"
    ))
}

fn determinism_configs() -> Vec<ExperimentConfig> {
    let mut mstd = config(ExperimentKind::Mstd, vec![], 60, 4000);
    mstd.p = Some(0.5);
    let mut conc = decay(
        config(
            ExperimentKind::Concentration,
            vec![combo(2, 1), combo(3, 0)],
            0,
            40,
        ),
        1.0,
        2,
        3,
    );
    conc.n_values = vec![2_000, 20_000];
    let mut bconv = config(ExperimentKind::BConvergence, vec![combo(2, 1)], 0, 1);
    bconv.n_values = vec![50, 100, 200];
    vec![
        decay(
            config(
                ExperimentKind::FastRatio,
                vec![combo(2, 1), combo(3, 0)],
                100_000,
                60,
            ),
            1.0,
            4,
            5,
        ),
        decay(
            config(
                ExperimentKind::CriticalSize,
                vec![combo(1, 1), combo(2, 0)],
                20_000,
                60,
            ),
            1.0,
            1,
            2,
        ),
        decay(
            config(ExperimentKind::SlowH2, vec![], 100_000, 30),
            1.0,
            3,
            10,
        ),
        mstd,
        conc,
        bconv,
    ]
}

fn render(report: &ExperimentReport) -> Result<Vec<u8>, String> {
    let mut bytes = report.to_json().map_err(|e| e.to_string())?.into_bytes();
    report.write_csv(&mut bytes).map_err(|e| e.to_string())?;
    Ok(bytes)
}

fn criterion_11() -> Outcome {
    let configs = determinism_configs();
    for cfg in &configs {
        let reference = render(&experiments::run(cfg, 1).map_err(|e| e.to_string())?)?;
        for workers in [2, 3, 8, 0] {
            let again = render(&experiments::run(cfg, workers).map_err(|e| e.to_string())?)?;
            ensure(again == reference, || {
                format!(
                    "{} differs between 1 and {workers} workers",
                    cfg.kind.name()
                )
            })?;
        }
    }
    Ok(format!(
        "{} kinds byte-identical across 1, 2, 3, 8 and all-core workers",
        configs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            "rep_count equals brute force (h <= 4, N <= 10)",
            criterion_1,
            Duration::from_secs(60),
        ),
        (
            "total (N+1)^h and reflection (N <= 1000, h <= 5)",
            criterion_2,
            Duration::from_secs(60),
        ),
        (
            "phase constants b_{h,k}",
            criterion_3,
            Duration::from_secs(300),
        ),
        (
            "series matches closed form",
            criterion_4,
            Duration::from_secs(10),
        ),
        ("critical decay h=2", criterion_5, Duration::from_secs(120)),
        ("critical decay h=3", criterion_6, Duration::from_secs(600)),
        ("fast decay ratios", criterion_7, Duration::from_secs(300)),
        ("slow decay h=2", criterion_8, Duration::from_secs(600)),
        (
            "missing-sum law and MSTD statistics",
            criterion_9,
            Duration::from_secs(1800),
        ),
        (
            "inclusion-exclusion identity",
            criterion_10,
            Duration::from_secs(120),
        ),
        (
            "determinism across worker counts",
            criterion_11,
            Duration::from_secs(120),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (verdict, detail) = match outcome {
            Ok(detail) if elapsed <= *limit => ("PASS", detail),
            Ok(detail) => (
                "FAIL",
                format!("{detail}; took {elapsed:.1?}, limit {limit:?}"),
            ),
            Err(why) => ("FAIL", why),
        };
        if verdict == "FAIL" {
            failed += 1;
        }
        println!(
            "criterion {:>2} {verdict}: {name} [{:.1}s] {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
