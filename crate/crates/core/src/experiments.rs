//! Monte Carlo experiments that confront sampled sumset statistics with the
//! predictions of [`crate::density`].
//!
//! Trial `t` of every experiment samples its set from sub-stream
//! `(seed, t)` (see [`crate::sampling`]). Per-trial results are collected in
//! trial order and reduced serially with compensated summation, so a report
//! is a pure function of its config and does not depend on the worker count.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::combinat::SignedCombination;
use crate::density::{
    self, b_constant, b_constant_finite_n, classify_regime, complement_ratio_h2,
    missing_differences_asymptote_h2, missing_sum_probability_h2, missing_sums_asymptote_h2,
    Neumaier, Prediction, Regime,
};
use crate::error::{Error, Result};
use crate::sampling::{sample_set, ProbabilitySpec, SampleParameters, SampledSet};
use crate::sumset::{gen_sumset, mstd_outcome, MstdClass};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FastRatio,
    CriticalSize,
    SlowH2,
    Mstd,
    Concentration,
    BConvergence,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::FastRatio => "fast-ratio",
            ExperimentKind::CriticalSize => "critical-size",
            ExperimentKind::SlowH2 => "slow-h2",
            ExperimentKind::Mstd => "mstd",
            ExperimentKind::Concentration => "concentration",
            ExperimentKind::BConvergence => "b-convergence",
        }
    }
}

/// Pass/fail thresholds. The defaults are the tolerances the experiments
/// were calibrated against.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative tolerance on mean per-trial ratios.
    pub ratio_rel: f64,
    /// Relative tolerance on mean `|A_{s,d}|/N` at critical decay; `None`
    /// means 3% for `h = 2` and 5% otherwise.
    pub critical_rel: Option<f64>,
    /// Minimum fraction of trials in which more minus signs give a strictly
    /// larger sumset at critical decay.
    pub dominance_min: f64,
    /// Relative tolerance on mean complement counts (slow decay, MSTD).
    pub complement_rel: f64,
    /// Standard errors allowed between a Monte Carlo frequency and an exact
    /// probability.
    pub law_stderrs: f64,
    /// Accepted bracket for the sum-dominated fraction.
    pub mstd_fraction: [f64; 2],
    /// Largest relative gap allowed at the final `N` of a b-convergence run.
    pub b_gap_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ratio_rel: 0.10,
            critical_rel: None,
            dominance_min: 0.95,
            complement_rel: 0.10,
            law_stderrs: 5.0,
            mstd_fraction: [2e-4, 9e-4],
            b_gap_rel: 0.05,
        }
    }
}

impl Tolerances {
    fn critical_rel_for(&self, h: u32) -> f64 {
        self.critical_rel
            .unwrap_or(if h == 2 { 0.03 } else { 0.05 })
    }
}

/// JSON experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub combos: Vec<SignedCombination>,
    #[serde(rename = "N")]
    pub n_values: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(
        default,
        with = "crate::rational_serde::option",
        skip_serializing_if = "Option::is_none"
    )]
    pub delta: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Orders `k` for b-convergence runs.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub k: Vec<usize>,
    #[serde(default)]
    pub budgets: Budgets,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    fn decay(&self) -> Result<(f64, Rational)> {
        let c = self
            .c
            .ok_or_else(|| Error::invalid("c", format!("{} needs c", self.kind.name())))?;
        let delta = self
            .delta
            .ok_or_else(|| Error::invalid("delta", format!("{} needs delta", self.kind.name())))?;
        if self.p.is_some() {
            return Err(Error::invalid("p", "give either (c, delta) or p, not both"));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::invalid("c", "must be a positive number"));
        }
        Ok((c, delta))
    }

    fn common_h(&self) -> Result<u32> {
        let first = self
            .combos
            .first()
            .ok_or_else(|| Error::invalid("combos", "need at least one combination"))?;
        if let Some(other) = self.combos.iter().find(|c| c.h() != first.h()) {
            return Err(Error::invalid(
                "combos",
                format!("{first} and {other} have different h"),
            ));
        }
        Ok(first.h())
    }

    /// Kind-specific checks; every runner calls this first.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "need at least one trial"));
        }
        if self.n_values.is_empty() {
            return Err(Error::invalid("N", "need at least one N"));
        }
        if self.n_values.contains(&0) {
            return Err(Error::invalid("N", "every N must be >= 1"));
        }
        match self.kind {
            ExperimentKind::FastRatio => {
                let (_, delta) = self.decay()?;
                if self.combos.len() != 2 {
                    return Err(Error::invalid(
                        "combos",
                        "fast-ratio compares exactly two combinations",
                    ));
                }
                let h = self.common_h()?;
                if self.combos[0].d() < self.combos[1].d() {
                    return Err(Error::invalid(
                        "combos",
                        "list the combination with more minus signs first",
                    ));
                }
                expect_regime(h, delta, &[Regime::Fast])?;
            }
            ExperimentKind::CriticalSize => {
                let (_, delta) = self.decay()?;
                let h = self.common_h()?;
                expect_regime(h, delta, &[Regime::Critical])?;
            }
            ExperimentKind::SlowH2 => {
                let (c, delta) = self.decay()?;
                let want = [SignedCombination::new(2, 0)?, SignedCombination::new(1, 1)?];
                if !self.combos.is_empty() && self.combos != want {
                    return Err(Error::invalid("combos", "slow-h2 uses [(2,0), (1,1)]"));
                }
                expect_regime(2, delta, &[Regime::SlowH2])?;
                for &n in &self.n_values {
                    let p = ProbabilitySpec::Decay { c, delta }.at(n)?;
                    if missing_sums_asymptote_h2(p) >= (2 * n + 1) as f64 / 10.0 {
                        return Err(Error::RegimeMismatch(format!(
                            "N = {n} too small: 4/p^2 = {:.1} is not below (2N+1)/10",
                            missing_sums_asymptote_h2(p)
                        )));
                    }
                }
            }
            ExperimentKind::Mstd => {
                if self.delta.is_some() || self.c.is_some() {
                    return Err(Error::invalid("delta", "mstd uses a fixed p"));
                }
                let p = self.p.unwrap_or(0.5);
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
                }
                if !self.combos.is_empty() {
                    return Err(Error::invalid(
                        "combos",
                        "mstd always compares A+A with A-A",
                    ));
                }
            }
            ExperimentKind::Concentration => {
                let (_, delta) = self.decay()?;
                let h = self.common_h()?;
                expect_regime(h, delta, &[Regime::Fast, Regime::Critical])?;
                if self.n_values.len() < 2 {
                    return Err(Error::invalid(
                        "N",
                        "concentration needs at least two values of N",
                    ));
                }
                if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid("N", "values must be strictly increasing"));
                }
            }
            ExperimentKind::BConvergence => {
                if self.combos.is_empty() {
                    return Err(Error::invalid("combos", "need at least one combination"));
                }
                if let Some(c) = self.combos.iter().find(|c| c.h() > 4) {
                    return Err(Error::invalid(
                        "combos",
                        format!("{c}: b-convergence needs h <= 4"),
                    ));
                }
                if self.b_orders().iter().any(|&k| k == 0 || k > 3) {
                    return Err(Error::invalid("k", "orders must lie in 1..=3"));
                }
                if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::invalid("N", "values must be strictly increasing"));
                }
                for combo in &self.combos {
                    for &n in &self.n_values {
                        self.budgets
                            .check_table("representation table", combo.range_len(n))?;
                    }
                }
            }
        }
        Ok(())
    }

    fn b_orders(&self) -> Vec<usize> {
        if self.k.is_empty() {
            vec![1, 2, 3]
        } else {
            self.k.clone()
        }
    }
}

fn expect_regime(h: u32, delta: Rational, allowed: &[Regime]) -> Result<Regime> {
    let regime = classify_regime(h, delta)?;
    if allowed.contains(&regime) {
        Ok(regime)
    } else {
        Err(Error::RegimeMismatch(format!(
            "delta = {delta} with h = {h} is {regime:?} decay; expected {allowed:?}"
        )))
    }
}

/// How a report row decides pass/fail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum PassRule {
    /// `|mean - predicted| <= tol * |predicted|`.
    Relative { tol: f64 },
    /// `|mean - predicted| <= k * sqrt(P (1 - P) / trials)` with `P` the
    /// predicted probability.
    BinomialStdErrs { k: f64 },
    /// `mean >= min`.
    AtLeast { min: f64 },
    /// `lo <= mean <= hi`.
    Within { lo: f64, hi: f64 },
    /// Coefficient of variation strictly below the previous row's.
    CvDecreasing,
    /// Gap to the prediction strictly below the previous row's; on the final
    /// row also `gap <= final_rel * |predicted|`.
    GapDecreasing { final_rel: f64 },
    /// Reported only.
    None,
}

/// One aggregated statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub statistic: String,
    pub s: u32,
    pub d: u32,
    #[serde(rename = "N")]
    pub n_max: u64,
    pub trials: u64,
    /// Trials left out because the statistic was undefined (empty `A`).
    pub excluded: u64,
    pub mean: f64,
    pub stddev: f64,
    pub stderr: f64,
    pub predicted: Option<f64>,
    pub rel_err: Option<f64>,
    pub formula: Option<String>,
    #[serde(flatten)]
    pub rule: PassRule,
    pub pass: bool,
}

impl ReportRow {
    fn new(
        statistic: impl Into<String>,
        combo: SignedCombination,
        n_max: u64,
        values: &[f64],
    ) -> Self {
        let stats = Summary::of(values);
        ReportRow {
            statistic: statistic.into(),
            s: combo.s(),
            d: combo.d(),
            n_max,
            trials: values.len() as u64,
            excluded: 0,
            mean: stats.mean,
            stddev: stats.stddev,
            stderr: stats.stderr,
            predicted: None,
            rel_err: None,
            formula: None,
            rule: PassRule::None,
            pass: true,
        }
    }

    fn predict(mut self, predicted: f64, formula: impl Into<String>) -> Self {
        self.predicted = Some(predicted);
        self.rel_err = Some(if predicted != 0.0 {
            (self.mean - predicted).abs() / predicted.abs()
        } else {
            (self.mean - predicted).abs()
        });
        self.formula = Some(formula.into());
        self
    }

    fn excluding(mut self, excluded: u64) -> Self {
        self.excluded = excluded;
        self
    }

    /// Applies a rule that needs only this row.
    fn judge(mut self, rule: PassRule) -> Self {
        let gap = self.predicted.map(|p| (self.mean - p).abs());
        self.pass = match (&rule, self.predicted, gap) {
            (PassRule::Relative { tol }, Some(p), Some(gap)) => gap <= tol * p.abs(),
            (PassRule::BinomialStdErrs { k }, Some(p), Some(gap)) => {
                gap <= k * (p * (1.0 - p) / self.trials as f64).sqrt()
            }
            (PassRule::AtLeast { min }, _, _) => self.mean >= *min,
            (PassRule::Within { lo, hi }, _, _) => (*lo..=*hi).contains(&self.mean),
            (PassRule::None, _, _) => true,
            _ => false,
        };
        self.rule = rule;
        self
    }

    fn cv(&self) -> f64 {
        self.stddev / self.mean
    }

    fn csv_fields(&self, kind: ExperimentKind) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{}:{},{},{},{},{},{},{},{},{},{},{}",
            kind.name(),
            self.statistic,
            self.s,
            self.d,
            self.n_max,
            self.trials,
            self.mean,
            self.stddev,
            self.stderr,
            opt(self.predicted),
            opt(self.rel_err),
            self.pass
        )
    }
}

/// Rows of a trend rule: each row passes iff it improves on its predecessor.
fn judge_trend(rows: &mut [ReportRow], rule: PassRule) {
    let n = rows.len();
    for i in 0..n {
        let pass = match &rule {
            PassRule::CvDecreasing => i == 0 || rows[i].cv() < rows[i - 1].cv(),
            PassRule::GapDecreasing { final_rel } => {
                let gap = |r: &ReportRow| (r.mean - r.predicted.unwrap_or(f64::NAN)).abs();
                let decreasing = i == 0 || gap(&rows[i]) < gap(&rows[i - 1]);
                let close = i + 1 < n
                    || gap(&rows[i]) <= final_rel * rows[i].predicted.unwrap_or(f64::NAN).abs();
                decreasing && close
            }
            _ => unreachable!("not a trend rule"),
        };
        rows[i].pass = pass;
        rows[i].rule = rule.clone();
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Summary {
    mean: f64,
    stddev: f64,
    stderr: f64,
}

impl Summary {
    /// Two-pass mean and sample standard deviation, compensated sums.
    fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Summary {
                mean: f64::NAN,
                stddev: f64::NAN,
                stderr: f64::NAN,
            };
        }
        let mut sum = Neumaier::default();
        values.iter().for_each(|&v| sum.add(v));
        let mean = sum.sum() / n as f64;
        if n == 1 {
            return Summary {
                mean,
                stddev: 0.0,
                stderr: 0.0,
            };
        }
        let mut sq = Neumaier::default();
        values.iter().for_each(|&v| sq.add((v - mean) * (v - mean)));
        let stddev = (sq.sum() / (n - 1) as f64).sqrt();
        Summary {
            mean,
            stddev,
            stderr: stddev / (n as f64).sqrt(),
        }
    }
}

/// Aggregated outcome of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub rows: Vec<ReportRow>,
    pub pass: bool,
}

pub const CSV_HEADER: &str = "kind,s,d,N,trials,mean,stddev,stderr,predicted,rel_err,pass";

impl ExperimentReport {
    fn new(config: &ExperimentConfig, rows: Vec<ReportRow>) -> Self {
        ExperimentReport {
            version: crate::VERSION.to_string(),
            config: config.clone(),
            pass: rows.iter().all(|r| r.pass),
            rows,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Per-statistic aggregates; the `kind` column is `<kind>:<statistic>`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for row in &self.rows {
            writeln!(out, "{}", row.csv_fields(self.config.kind))?;
        }
        Ok(())
    }

    /// First row with this statistic, combination and `N`.
    pub fn row(&self, statistic: &str, combo: SignedCombination, n_max: u64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| {
            r.statistic == statistic && r.s == combo.s() && r.d == combo.d() && r.n_max == n_max
        })
    }
}

/// Runs `trial(t)` for `t in 0..trials` on `workers` threads (0 = all
/// cores) and returns the results in trial order.
fn run_trials<T, F>(trials: u64, workers: usize, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid("workers", e.to_string()))?;
    pool.install(|| (0..trials).into_par_iter().map(&trial).collect())
}

fn sample(
    config: &ExperimentConfig,
    spec: ProbabilitySpec,
    n_max: u64,
    t: u64,
) -> Result<SampledSet> {
    Ok(sample_set(&SampleParameters::new(
        n_max,
        spec,
        config.seed,
        t,
    )?))
}

/// Dispatches on `config.kind`.
pub fn run(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    match config.kind {
        ExperimentKind::FastRatio => run_fast_ratio(config, workers),
        ExperimentKind::CriticalSize => run_critical_size(config, workers),
        ExperimentKind::SlowH2 => run_slow_h2(config, workers),
        ExperimentKind::Mstd => run_mstd(config, workers),
        ExperimentKind::Concentration => run_concentration(config, workers),
        ExperimentKind::BConvergence => run_b_convergence(config, workers),
    }
}

fn require_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.kind != kind {
        return Err(Error::invalid(
            "kind",
            format!("expected {}, got {}", kind.name(), config.kind.name()),
        ));
    }
    config.validate()
}

/// Mean per-trial `|A_{s1,d1}| / |A_{s2,d2}|` against `(s2!d2!)/(s1!d1!)`.
/// Trials with empty `A` are excluded and counted.
pub fn run_fast_ratio(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::FastRatio)?;
    let (c, delta) = config.decay()?;
    let spec = ProbabilitySpec::Decay { c, delta };
    let (first, second) = (config.combos[0], config.combos[1]);
    let prediction = Prediction::ratio(first, second, c, delta)?;
    let mut rows = Vec::new();
    for &n_max in &config.n_values {
        let per_trial = run_trials(config.trials, workers, |t| {
            let set = sample(config, spec, n_max, t)?;
            if set.is_empty() {
                return Ok(None);
            }
            let a = gen_sumset(&set, first, &config.budgets)?.cardinality as f64;
            let b = gen_sumset(&set, second, &config.budgets)?.cardinality as f64;
            Ok(Some(a / b))
        })?;
        let ratios: Vec<f64> = per_trial.iter().flatten().copied().collect();
        let excluded = per_trial.len() as u64 - ratios.len() as u64;
        rows.push(
            ReportRow::new(
                format!("ratio_over_s{}d{}", second.s(), second.d()),
                first,
                n_max,
                &ratios,
            )
            .excluding(excluded)
            .predict(prediction.predicted, prediction.formula.clone())
            .judge(PassRule::Relative {
                tol: config.tolerances.ratio_rel,
            }),
        );
    }
    Ok(ExperimentReport::new(config, rows))
}

/// Mean `|A_{s,d}| / N` against `g(c; s, d)`, plus, for every pair of
/// combinations with different `d`, how often the one with more minus signs
/// is strictly larger.
pub fn run_critical_size(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::CriticalSize)?;
    let (c, delta) = config.decay()?;
    let spec = ProbabilitySpec::Decay { c, delta };
    let h = config.common_h()?;
    let tol = config.tolerances.critical_rel_for(h);
    let mut rows = Vec::new();
    for &n_max in &config.n_values {
        let per_trial = run_trials(config.trials, workers, |t| {
            let set = sample(config, spec, n_max, t)?;
            config
                .combos
                .iter()
                .map(|&cm| Ok(gen_sumset(&set, cm, &config.budgets)?.cardinality))
                .collect::<Result<Vec<u64>>>()
        })?;
        for (i, &combo) in config.combos.iter().enumerate() {
            let sizes: Vec<f64> = per_trial
                .iter()
                .map(|v| v[i] as f64 / n_max as f64)
                .collect();
            let prediction = Prediction::cardinality_over_n(combo, c, delta, n_max)?;
            rows.push(
                ReportRow::new("size_over_N", combo, n_max, &sizes)
                    .predict(prediction.predicted, prediction.formula)
                    .judge(PassRule::Relative { tol }),
            );
        }
        for (i, &more) in config.combos.iter().enumerate() {
            for (j, &fewer) in config.combos.iter().enumerate() {
                if more.d() <= fewer.d() {
                    continue;
                }
                let wins: Vec<f64> = per_trial
                    .iter()
                    .map(|v| f64::from(u8::from(v[i] > v[j])))
                    .collect();
                let predicted = f64::from(u8::from(
                    density::predicted_ratio(more, fewer, Regime::Critical, c)? > 1.0,
                ));
                rows.push(
                    ReportRow::new(
                        format!("larger_than_s{}d{}", fewer.s(), fewer.d()),
                        more,
                        n_max,
                        &wins,
                    )
                    .predict(predicted, "g(c;s1,d1) > g(c;s2,d2) almost surely")
                    .judge(PassRule::AtLeast {
                        min: config.tolerances.dominance_min,
                    }),
                );
            }
        }
    }
    Ok(ExperimentReport::new(config, rows))
}

/// Points of `[0, 2N]` at which the exact missing-sum law is checked: ten
/// spread over the lower fringe where the probability is non-negligible,
/// and their mirror images.
fn missing_law_points(n_max: u64, p: f64) -> Vec<u64> {
    let step = 0.4 / (p * p);
    let mut low: Vec<u64> = (0..10)
        .map(|j| ((j as f64 * step) as u64).min(n_max))
        .collect();
    low.dedup();
    let mut points = low.clone();
    points.extend(low.iter().rev().map(|&n| 2 * n_max - n));
    points.sort_unstable();
    points.dedup();
    points
}

/// Complement counts of `A + A` and `A - A` against `~ 4/p^2` and `~ 2/p^2`,
/// their ratio against 2, and the exact missing-sum law at sampled points.
pub fn run_slow_h2(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::SlowH2)?;
    let (c, delta) = config.decay()?;
    let spec = ProbabilitySpec::Decay { c, delta };
    let sums = SignedCombination::new(2, 0)?;
    let diffs = SignedCombination::new(1, 1)?;
    let tol = config.tolerances.complement_rel;
    let mut rows = Vec::new();
    for &n_max in &config.n_values {
        let p = spec.at(n_max)?;
        let points = missing_law_points(n_max, p);
        let per_trial = run_trials(config.trials, workers, |t| {
            let set = sample(config, spec, n_max, t)?;
            let s = gen_sumset(&set, sums, &config.budgets)?;
            let d = gen_sumset(&set, diffs, &config.budgets)?;
            let missing: Vec<bool> = points.iter().map(|&n| !s.contains(n as i64)).collect();
            Ok((s.complement_count, d.complement_count, missing))
        })?;
        let s_c: Vec<f64> = per_trial.iter().map(|r| r.0 as f64).collect();
        let d_c: Vec<f64> = per_trial.iter().map(|r| r.1 as f64).collect();
        let ratio_trials: Vec<f64> = per_trial
            .iter()
            .filter(|r| r.1 > 0)
            .map(|r| r.0 as f64 / r.1 as f64)
            .collect();
        let excluded = per_trial.len() as u64 - ratio_trials.len() as u64;
        let regime = classify_regime(2, delta)?;
        let expected = Prediction::missing_sums_h2(n_max, p, regime)?;
        rows.push(
            ReportRow::new("complement", sums, n_max, &s_c)
                .predict(expected.predicted, expected.formula)
                .judge(PassRule::Relative { tol }),
        );
        rows.push(
            ReportRow::new("complement", diffs, n_max, &d_c)
                .predict(missing_differences_asymptote_h2(p), "2/p^2")
                .judge(PassRule::Relative { tol }),
        );
        rows.push(
            ReportRow::new("complement_ratio_over_s1d1", sums, n_max, &ratio_trials)
                .excluding(excluded)
                .predict(complement_ratio_h2(), "S^c/D^c -> 2")
                .judge(PassRule::Relative { tol }),
        );
        for (i, &n) in points.iter().enumerate() {
            let freq: Vec<f64> = per_trial
                .iter()
                .map(|r| f64::from(u8::from(r.2[i])))
                .collect();
            rows.push(
                ReportRow::new(format!("missing_at_{n}"), sums, n_max, &freq)
                    .predict(
                        missing_sum_probability_h2(n, n_max, p)?,
                        "(1-p^2)^{n/2}(1-p) even n, (1-p^2)^{(n+1)/2} odd n",
                    )
                    .judge(PassRule::BinomialStdErrs {
                        k: config.tolerances.law_stderrs,
                    }),
            );
        }
    }
    Ok(ExperimentReport::new(config, rows))
}

/// Fixed-`p` comparison of `A + A` and `A - A`: how often `A` is sum
/// dominated, and the mean numbers of missing sums and differences.
pub fn run_mstd(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::Mstd)?;
    let p = config.p.unwrap_or(0.5);
    let spec = ProbabilitySpec::Fixed { p };
    let sums = SignedCombination::new(2, 0)?;
    let diffs = SignedCombination::new(1, 1)?;
    let uniform = p == 0.5;
    let tol = config.tolerances.complement_rel;
    let mut rows = Vec::new();
    for &n_max in &config.n_values {
        let per_trial = run_trials(config.trials, workers, |t| {
            let set = sample(config, spec, n_max, t)?;
            mstd_outcome(&set, &config.budgets)
        })?;
        let range = (2 * n_max + 1) as f64;
        let dominated: Vec<f64> = per_trial
            .iter()
            .map(|o| f64::from(u8::from(o.class == MstdClass::SumDominated)))
            .collect();
        let missing_sums: Vec<f64> = per_trial.iter().map(|o| range - o.sums as f64).collect();
        let missing_diffs: Vec<f64> = per_trial
            .iter()
            .map(|o| range - o.differences as f64)
            .collect();

        let [lo, hi] = config.tolerances.mstd_fraction;
        let mut row = ReportRow::new("sum_dominated_fraction", sums, n_max, &dominated);
        if uniform {
            row = row.predict(
                density::REFERENCE_SUM_DOMINATED_FRACTION,
                "reported limiting fraction at p = 1/2",
            );
        }
        rows.push(row.judge(PassRule::Within { lo, hi }));

        let expected = Prediction::missing_sums_h2(n_max, p, Regime::SlowH2)?;
        rows.push(
            ReportRow::new("missing", sums, n_max, &missing_sums)
                .predict(expected.predicted, expected.formula)
                .judge(PassRule::Relative { tol }),
        );

        let row = ReportRow::new("missing", diffs, n_max, &missing_diffs);
        rows.push(if uniform {
            row.predict(
                density::REFERENCE_MISSING_DIFFERENCES,
                "reported limiting mean at p = 1/2",
            )
            .judge(PassRule::Relative { tol })
        } else {
            row
        });
    }
    Ok(ExperimentReport::new(config, rows))
}

/// Coefficient of variation of `|A_{s,d}|` along an increasing list of `N`;
/// passes when it strictly decreases.
pub fn run_concentration(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::Concentration)?;
    let (c, delta) = config.decay()?;
    let spec = ProbabilitySpec::Decay { c, delta };
    let mut rows = Vec::new();
    for &combo in &config.combos {
        let mut combo_rows = Vec::new();
        for &n_max in &config.n_values {
            let sizes = run_trials(config.trials, workers, |t| {
                let set = sample(config, spec, n_max, t)?;
                Ok(gen_sumset(&set, combo, &config.budgets)?.cardinality as f64)
            })?;
            let prediction = Prediction::cardinality_over_n(combo, c, delta, n_max)?;
            combo_rows.push(
                ReportRow::new("size", combo, n_max, &sizes)
                    .predict(prediction.predicted * n_max as f64, prediction.formula),
            );
        }
        judge_trend(&mut combo_rows, PassRule::CvDecreasing);
        rows.extend(combo_rows);
    }
    Ok(ExperimentReport::new(config, rows))
}

/// Finite-`N` estimates of `b_{h,k}` against the quadrature values.
pub fn run_b_convergence(config: &ExperimentConfig, workers: usize) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::BConvergence)?;
    let mut rows = Vec::new();
    for &combo in &config.combos {
        for k in config.b_orders() {
            let exact = b_constant::<f64>(combo.h(), k)?;
            let estimates = run_trials(config.n_values.len() as u64, workers, |i| {
                b_constant_finite_n(k, combo, config.n_values[i as usize], &config.budgets)
            })?;
            let mut k_rows: Vec<ReportRow> = config
                .n_values
                .iter()
                .zip(&estimates)
                .map(|(&n_max, &est)| {
                    ReportRow::new(format!("b_k{k}"), combo, n_max, &[est])
                        .predict(exact, "(1/k!) * integral of f_h^k")
                })
                .collect();
            judge_trend(
                &mut k_rows,
                PassRule::GapDecreasing {
                    final_rel: config.tolerances.b_gap_rel,
                },
            );
            rows.extend(k_rows);
        }
    }
    Ok(ExperimentReport::new(config, rows))
}
