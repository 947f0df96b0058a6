//! Limit theory for `|A_{s,d}|`: the scaling limit of `R(n,s,d) / N^{h-1}`,
//! the phase constants `b_{h,k}`, the critical-decay series `g(c; s, d)` and
//! the predicted cardinalities in each decay regime.
//!
//! With `p(N) = c N^{-delta}` the behaviour changes at `delta = (h-1)/h`:
//!
//! * fast decay (`delta` above the threshold): almost every class of
//!   `h`-tuples drawn from `A` generates its own value, so
//!   `|A_{s,d}| ~ (|A|^h) / (s! d!)` and ratios between combinations with the
//!   same `h` are ratios of `s! d!`;
//! * critical decay: `|A_{s,d}| ~ N g(c; s, d)` with
//!   `g(c; s, d) = sum_k (-1)^(k-1) b_{h,k} (c^h / (s! d!))^k`;
//! * slow decay, `h = 2` only: the complements of `A + A` and `A - A` in
//!   their full ranges have size `~ 4/p^2` and `~ 2/p^2`.
//!
//! `b_{h,k} = (1/k!) * integral over [0, h] of f_h(u)^k du`, where `f_h` is
//! the limit density of `R`, a piecewise polynomial with integer breakpoints
//! (the Irwin–Hall density). Each unit piece is integrated with a
//! Gauss–Legendre rule of sufficient order, so the integral is exact up to
//! rounding.

use num_bigint::BigUint;
use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::budget::Budgets;
use crate::combinat::{ext_binom, rep_counts_all, SignedCombination};
use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::scalar::Scalar;
use crate::Rational;

/// Relative tolerance for truncating [`g_series`].
pub const DEFAULT_SERIES_TOL: f64 = 1e-14;

/// Term cap for [`g_series`]. At `c^h / (s! d!) = 16` the terms only drop
/// below `1e-14` of the sum after about 65 terms.
pub const DEFAULT_SERIES_KMAX: usize = 120;

/// Largest `k` for which `b_{h,k}` is tabulated; `1/k!` underflows `f64`
/// not far beyond this.
pub const MAX_PHASE_K: usize = 160;

/// Reported limiting proportion of sum-dominated subsets of `{0, ..., N}`
/// under the uniform (`p = 1/2`) model.
pub const REFERENCE_SUM_DOMINATED_FRACTION: f64 = 4.5e-4;

/// Reported limiting expected number of missing differences at `p = 1/2`.
pub const REFERENCE_MISSING_DIFFERENCES: f64 = 6.0;

/// `f_h(u) = sum_{i <= floor(u)} (-1)^i C(h,i) (u - i)^(h-1) / (h-1)!` on
/// `[0, h]`, zero outside.
///
/// Only field operations are used, so this also evaluates exactly over
/// rationals.
pub fn limit_density<T>(u: T, h: u32) -> T
where
    T: Clone + Num + PartialOrd + FromPrimitive,
{
    assert!(h >= 2, "limit density needs h >= 2");
    let zero = T::zero();
    let top = T::from_u32(h).expect("small integers are representable");
    if u < zero || u > top {
        return zero;
    }
    let mut acc = T::zero();
    for i in 0..=h {
        let shift = T::from_u32(i).expect("small integers are representable");
        if shift > u {
            break;
        }
        let base = u.clone() - shift;
        let mut pow = T::one();
        for _ in 0..h - 1 {
            pow = pow * base.clone();
        }
        let coeff = T::from_u64(ext_binom(h as i64, i).to_u64().expect("C(h,i) fits in u64"))
            .expect("C(h,i) is representable");
        if i % 2 == 0 {
            acc = acc + coeff * pow;
        } else {
            acc = acc - coeff * pow;
        }
    }
    let mut fact = T::one();
    for j in 2..h {
        fact = fact * T::from_u32(j).expect("small integers are representable");
    }
    acc / fact
}

/// Table of `b_{h,k}` for `k = 1..=k_max`.
#[derive(Clone, Debug)]
pub struct PhaseConstants<T> {
    h: u32,
    k_max: usize,
    quadrature_nodes: usize,
    b: Vec<T>,
}

impl<T: Scalar> PhaseConstants<T> {
    pub fn new(h: u32, k_max: usize) -> Result<Self> {
        if h < 2 {
            return Err(Error::invalid("h", "need h >= 2"));
        }
        if k_max == 0 || k_max > MAX_PHASE_K {
            return Err(Error::invalid(
                "k_max",
                format!("must lie in 1..={MAX_PHASE_K}, got {k_max}"),
            ));
        }
        let rule = GaussLegendre::<T>::exact_for_degree((h as usize - 1) * k_max);
        let mut acc = vec![T::zero(); k_max];
        // f_h is symmetric about h/2: integrate [0, h/2] and double.
        let mut pieces: Vec<(T, T)> = (0..h / 2)
            .map(|j| (T::of(j as f64), T::of(j as f64 + 1.0)))
            .collect();
        if h % 2 == 1 {
            pieces.push((T::of((h / 2) as f64), T::of(h as f64 / 2.0)));
        }
        for (a, b) in pieces {
            for (x, w) in rule.mapped(a, b) {
                let f = limit_density(x, h);
                // f^k / k! built incrementally so large k neither overflows
                // nor underflows prematurely.
                let mut term = T::one();
                for (k, slot) in acc.iter_mut().enumerate() {
                    term = term * f / T::of_usize(k + 1);
                    *slot = *slot + w * term;
                }
            }
        }
        let two = T::of(2.0);
        Ok(PhaseConstants {
            h,
            k_max,
            quadrature_nodes: rule.len(),
            b: acc.into_iter().map(|v| two * v).collect(),
        })
    }

    pub fn h(&self) -> u32 {
        self.h
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Gauss–Legendre nodes per unit interval.
    pub fn quadrature_nodes(&self) -> usize {
        self.quadrature_nodes
    }

    /// `b_{h,k}` for `1 <= k <= k_max`.
    pub fn b(&self, k: usize) -> T {
        assert!(
            (1..=self.k_max).contains(&k),
            "k = {k} outside the tabulated range 1..={}",
            self.k_max
        );
        self.b[k - 1]
    }

    /// `b_{h,1}, ..., b_{h,k_max}`.
    pub fn values(&self) -> &[T] {
        &self.b
    }

    /// `g(c; s, d)` from this table; see [`g_series`].
    pub fn g_series(&self, c: T, combo: SignedCombination, tol: T) -> Result<SeriesValue<T>> {
        if combo.h() != self.h {
            return Err(Error::invalid(
                "combo",
                format!("{combo} has h = {}, table has h = {}", combo.h(), self.h),
            ));
        }
        if c <= T::zero() || !c.is_finite() {
            return Err(Error::invalid("c", "must be a positive finite number"));
        }
        let x = c.powi(self.h as i32) / T::of(combo.symmetry_factor_f64());
        let mut sum = T::zero();
        let mut x_pow = T::one();
        let mut small_in_a_row = 0;
        for (i, &b) in self.b.iter().enumerate() {
            x_pow = x_pow * x;
            let term = b * x_pow;
            if i % 2 == 0 {
                sum = sum + term;
            } else {
                sum = sum - term;
            }
            if term.abs() < tol * sum.abs() {
                small_in_a_row += 1;
                if small_in_a_row == 2 {
                    return Ok(SeriesValue {
                        value: sum,
                        terms_used: i + 1,
                    });
                }
            } else {
                small_in_a_row = 0;
            }
        }
        Err(Error::NonConvergence {
            k_max: self.k_max,
            tol: tol.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// `b_{h,k}` on its own.
pub fn b_constant<T: Scalar>(h: u32, k: usize) -> Result<T> {
    Ok(PhaseConstants::<T>::new(h, k)?.b(k))
}

/// Finite-`N` estimate of `b_{h,k}`:
/// `(s!d!)^k N^{-((h-1)k+1)} sum_n C_real(R(n,s,d) / (s!d!), k)` where
/// `C_real(x, k) = x (x-1) ... (x-k+1) / k!`. Tends to `b_{h,k}` as `N` grows.
pub fn b_constant_finite_n(
    k: usize,
    combo: SignedCombination,
    n_max: u64,
    budgets: &Budgets,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "need k >= 1"));
    }
    if n_max == 0 {
        return Err(Error::invalid("N", "need N >= 1"));
    }
    let table = rep_counts_all(combo, n_max, budgets)?;
    let sym = combo.symmetry_factor_f64();
    let n = n_max as f64;
    let scale = n.powi(combo.h() as i32 - 1);
    let mut total = 0.0;
    for r in table.counts() {
        let x = big_to_f64(r) / sym;
        // (s!d!)^k C_real(x, k) / N^{(h-1)k}, one factor at a time.
        let mut term = 1.0;
        for i in 0..k {
            term *= (x - i as f64) * sym / scale / (i as f64 + 1.0);
        }
        total += term;
    }
    Ok(total / n)
}

fn big_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// A truncated series value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue<T> {
    pub value: T,
    pub terms_used: usize,
}

/// `g(c; s, d) = sum_{k>=1} (-1)^(k-1) b_{h,k} (c^h / (s! d!))^k`, truncated at
/// the first `k <= k_max` where two consecutive terms fall below
/// `tol * |partial sum|`.
pub fn g_series<T: Scalar>(
    c: T,
    combo: SignedCombination,
    k_max: usize,
    tol: T,
) -> Result<SeriesValue<T>> {
    PhaseConstants::<T>::new(combo.h(), k_max)?.g_series(c, combo, tol)
}

/// [`g_series`] with the default cap and tolerance.
pub fn g_series_default<T: Scalar>(c: T, combo: SignedCombination) -> Result<SeriesValue<T>> {
    g_series(c, combo, DEFAULT_SERIES_KMAX, T::of(DEFAULT_SERIES_TOL))
}

/// `g(x) = 2 (e^{-x} - (1 - x)) / x`, the `h = 2` critical function, with
/// `|A - A| ~ g(c^2) N` and `|A + A| ~ g(c^2 / 2) N`. `g(0) = 0`.
pub fn g_hm_closed_form<T: Scalar>(x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    if x.abs() < T::of(0.25) {
        // 2 sum_{j>=2} (-x)^(j-1) / j!, avoiding the cancellation in e^{-x} - 1 + x.
        let mut term = T::one();
        let mut sum = T::zero();
        for j in 2..60 {
            term = if j == 2 {
                T::of(0.5)
            } else {
                -term * x / T::of_usize(j)
            };
            sum = sum + term;
            if term.abs() <= T::epsilon() * sum.abs() {
                break;
            }
        }
        return T::of(2.0) * x * sum;
    }
    T::of(2.0) * ((-x).exp_m1() + x) / x
}

/// Decay regime of `p(N) = c N^{-delta}` for `h` summands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Fast,
    Critical,
    Slow,
    /// Slow decay with `h = 2`, the only slow case with a prediction.
    SlowH2,
}

/// `(h-1)/h` as an exact rational.
pub fn critical_delta(h: u32) -> Rational {
    Rational::new(h as i64 - 1, h as i64)
}

pub fn classify_regime(h: u32, delta: Rational) -> Result<Regime> {
    if h < 2 {
        return Err(Error::invalid("h", "need h >= 2"));
    }
    check_delta(delta)?;
    let threshold = critical_delta(h);
    Ok(if delta > threshold {
        Regime::Fast
    } else if delta == threshold {
        Regime::Critical
    } else if h == 2 {
        Regime::SlowH2
    } else {
        Regime::Slow
    })
}

pub(crate) fn check_delta(delta: Rational) -> Result<()> {
    if delta <= Rational::from_integer(0) || delta >= Rational::from_integer(1) {
        return Err(Error::invalid("delta", format!("{delta} is not in (0, 1)")));
    }
    Ok(())
}

pub(crate) fn rational_to_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Expected `X_k` to leading order:
/// `b_{h,k} c^{hk} / (s!d!)^k * N^{(h-1)k + 1 - hk delta}`.
pub fn predicted_ex_k(
    k: usize,
    combo: SignedCombination,
    c: f64,
    delta: Rational,
    n_max: u64,
) -> Result<f64> {
    check_delta(delta)?;
    if c <= 0.0 || !c.is_finite() {
        return Err(Error::invalid("c", "must be positive"));
    }
    let h = combo.h() as f64;
    let kf = k as f64;
    let b = b_constant::<f64>(combo.h(), k)?;
    let exponent = (h - 1.0) * kf + 1.0 - h * kf * rational_to_f64(delta);
    Ok(
        b * (c.powf(h) / combo.symmetry_factor_f64()).powi(k as i32)
            * (n_max as f64).powf(exponent),
    )
}

/// Predicted limit of `|A_{s1,d1}| / |A_{s2,d2}|` for the same `A`.
pub fn predicted_ratio(
    first: SignedCombination,
    second: SignedCombination,
    regime: Regime,
    c: f64,
) -> Result<f64> {
    if first.h() != second.h() {
        return Err(Error::invalid(
            "combos",
            format!("{first} and {second} have different h"),
        ));
    }
    match regime {
        Regime::Fast => Ok(second.symmetry_factor_f64() / first.symmetry_factor_f64()),
        Regime::Critical => {
            let table = PhaseConstants::<f64>::new(first.h(), DEFAULT_SERIES_KMAX)?;
            let g1 = table.g_series(c, first, DEFAULT_SERIES_TOL)?.value;
            let g2 = table.g_series(c, second, DEFAULT_SERIES_TOL)?.value;
            Ok(g1 / g2)
        }
        Regime::Slow | Regime::SlowH2 => Err(Error::RegimeMismatch(
            "no ratio prediction outside fast and critical decay".into(),
        )),
    }
}

/// Probability that `n` is missing from `A + A` for `A` a binomial(`p`)
/// subset of `{0, ..., N}`.
///
/// For `n <= N` the unordered pairs `{a, n - a}` are disjoint, so the
/// probability is `(1-p^2)^{n/2} (1-p)` for even `n` and `(1-p^2)^{(n+1)/2}`
/// for odd `n`; values above `N` mirror through `n -> 2N - n`.
pub fn missing_sum_probability_h2(n: u64, n_max: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    if n > 2 * n_max {
        return Err(Error::invalid("n", format!("{n} is outside [0, 2N]")));
    }
    let m = n.min(2 * n_max - n);
    let log_q = (-p * p).ln_1p();
    Ok(if m.is_multiple_of(2) {
        ((m / 2) as f64 * log_q).exp() * (1.0 - p)
    } else {
        (m.div_ceil(2) as f64 * log_q).exp()
    })
}

/// Expected number of missing sums, `sum_{n=0}^{2N} P(n not in A + A)`.
/// Tends to `~ 4/p^2` as `p -> 0` (and to 10 at `p = 1/2`).
pub fn expected_missing_sums_h2(n_max: u64, p: f64) -> Result<f64> {
    check_probability(p)?;
    let mut half = Neumaier::default();
    for n in 0..n_max {
        let term = missing_sum_probability_h2(n, n_max, p)?;
        if term == 0.0 {
            break;
        }
        half.add(term);
    }
    Ok(2.0 * half.sum() + missing_sum_probability_h2(n_max, n_max, p)?)
}

/// Slow-decay (`h = 2`) asymptote of the number of missing sums: `4/p^2`.
pub fn missing_sums_asymptote_h2(p: f64) -> f64 {
    4.0 / (p * p)
}

/// Slow-decay (`h = 2`) asymptote of the number of missing differences:
/// `2/p^2`.
pub fn missing_differences_asymptote_h2(p: f64) -> f64 {
    2.0 / (p * p)
}

/// Slow-decay (`h = 2`) limit of missing sums over missing differences.
pub fn complement_ratio_h2() -> f64 {
    missing_sums_asymptote_h2(1.0) / missing_differences_asymptote_h2(1.0)
}

fn check_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("p", format!("{p} is not in (0, 1)")));
    }
    Ok(())
}

/// Kahan–Babuška–Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// What a [`Prediction`] predicts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueKind {
    CardinalityOverN,
    Ratio,
    ComplementCount,
}

/// A predicted value together with where it comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub regime: Regime,
    pub combo: SignedCombination,
    pub kind: ValueKind,
    pub predicted: f64,
    pub formula: String,
}

impl Prediction {
    /// `|A_{s,d}| / N`: `g(c; s, d)` at critical decay; the expected class
    /// count `E(X_1) / N` at fast decay.
    pub fn cardinality_over_n(
        combo: SignedCombination,
        c: f64,
        delta: Rational,
        n_max: u64,
    ) -> Result<Self> {
        let regime = classify_regime(combo.h(), delta)?;
        let (predicted, formula) = match regime {
            Regime::Critical => (
                g_series_default(c, combo)?.value,
                "g(c;s,d) = sum_k (-1)^(k-1) b_{h,k} (c^h/(s!d!))^k",
            ),
            Regime::Fast => (
                predicted_ex_k(1, combo, c, delta, n_max)? / n_max as f64,
                "E(X_1)/N = c^h N^(h-1-h*delta) / (s!d!)",
            ),
            Regime::Slow | Regime::SlowH2 => {
                return Err(Error::RegimeMismatch(format!(
                    "delta = {delta} is slow decay for h = {}; no cardinality prediction",
                    combo.h()
                )))
            }
        };
        Ok(Prediction {
            regime,
            combo,
            kind: ValueKind::CardinalityOverN,
            predicted,
            formula: formula.into(),
        })
    }

    /// `|A_{s1,d1}| / |A_{s2,d2}|`.
    pub fn ratio(
        first: SignedCombination,
        second: SignedCombination,
        c: f64,
        delta: Rational,
    ) -> Result<Self> {
        let regime = classify_regime(first.h(), delta)?;
        let predicted = predicted_ratio(first, second, regime, c)?;
        let formula = match regime {
            Regime::Fast => "(s2!d2!)/(s1!d1!)",
            _ => "g(c;s1,d1)/g(c;s2,d2)",
        };
        Ok(Prediction {
            regime,
            combo: first,
            kind: ValueKind::Ratio,
            predicted,
            formula: formula.into(),
        })
    }

    /// Expected number of values of `[0, 2N]` missing from `A + A`.
    pub fn missing_sums_h2(n_max: u64, p: f64, regime: Regime) -> Result<Self> {
        Ok(Prediction {
            regime,
            combo: SignedCombination::new(2, 0)?,
            kind: ValueKind::ComplementCount,
            predicted: expected_missing_sums_h2(n_max, p)?,
            formula: "sum_n P(n not in A+A), exact pair-independence law".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::One;

    fn combo(s: u32, d: u32) -> SignedCombination {
        SignedCombination::new(s, d).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn limit_density_examples() {
        assert!((limit_density(1.0f64, 2) - 1.0).abs() < 1e-15);
        assert!((limit_density(0.5f64, 2) - 0.5).abs() < 1e-15);
        assert_eq!(limit_density(-0.1f64, 3), 0.0);
        assert_eq!(limit_density(3.1f64, 3), 0.0);
        for h in 2..=6u32 {
            let peak = limit_density(h as f64 / 2.0, h);
            for i in 0..=100 {
                let u = h as f64 * i as f64 / 100.0;
                assert!(limit_density(u, h) <= peak + 1e-15);
            }
        }
    }

    #[test]
    fn limit_density_is_exact_over_rationals() {
        // f_3(3/2) = (27/8 - 3/8) / 2 = 3/4.
        let u = BigRational::new(3.into(), 2.into());
        assert_eq!(limit_density(u, 3), BigRational::new(3.into(), 4.into()));
        let u = Rational::new(1, 2);
        assert_eq!(limit_density(u, 3), Rational::new(1, 8));
        assert_eq!(limit_density(Rational::one(), 4), Rational::new(1, 6));
    }

    #[test]
    fn b_constant_examples() {
        for k in 1..=10 {
            let want = 2.0 / (1..=k + 1).map(|i| i as f64).product::<f64>();
            let got = b_constant::<f64>(2, k).unwrap();
            assert!((got - want).abs() < 1e-15, "k={k}: {got} vs {want}");
        }
        for h in 2..=6 {
            assert!((b_constant::<f64>(h, 1).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn phase_constants_shape() {
        let t = PhaseConstants::<f64>::new(3, 8).unwrap();
        assert_eq!(t.h(), 3);
        assert_eq!(t.k_max(), 8);
        assert!(t.quadrature_nodes() >= (2 * 8 + 1usize).div_ceil(2));
        for w in t.values().windows(2) {
            assert!(w[0] > 0.0 && w[1] < w[0]);
        }
        assert!(PhaseConstants::<f64>::new(1, 4).is_err());
        assert!(PhaseConstants::<f64>::new(3, 0).is_err());
    }

    #[test]
    fn single_precision_constants() {
        let t = PhaseConstants::<f32>::new(4, 6).unwrap();
        assert!((t.b(1) - 1.0).abs() < 1e-5);
        let d = PhaseConstants::<f64>::new(4, 6).unwrap();
        for k in 1..=6 {
            assert!(((t.b(k) as f64) - d.b(k)).abs() < 1e-5 * d.b(k));
        }
    }

    #[test]
    fn g_series_matches_closed_form() {
        for c in [0.25f64, 0.5, 1.0, 2.0, 4.0] {
            let dd = g_series_default(c, combo(1, 1)).unwrap();
            assert!((dd.value - g_hm_closed_form(c * c)).abs() < 1e-9, "c={c}");
            let ss = g_series_default(c, combo(2, 0)).unwrap();
            assert!(
                (ss.value - g_hm_closed_form(c * c / 2.0)).abs() < 1e-9,
                "c={c}"
            );
        }
    }

    #[test]
    fn g_series_small_c_leading_term() {
        let c = 1e-3f64;
        for cm in [combo(2, 1), combo(3, 0), combo(2, 2)] {
            let v = g_series_default(c, cm).unwrap().value;
            let lead = c.powi(cm.h() as i32) / cm.symmetry_factor_f64();
            assert!((v / lead - 1.0).abs() < 1e-2);
        }
    }

    #[test]
    fn g_series_reports_non_convergence() {
        let err = g_series(4.0f64, combo(1, 1), 10, 1e-14).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { k_max: 10, .. }));
        assert!(g_series(-1.0f64, combo(1, 1), 10, 1e-14).is_err());
    }

    #[test]
    fn closed_form_values() {
        assert!((g_hm_closed_form(1.0f64) - 0.735_758_882_342_884_6).abs() < 1e-15);
        assert_eq!(g_hm_closed_form(0.0f64), 0.0);
        let x = 1e-6f64;
        assert!((g_hm_closed_form(x) - x).abs() < 1e-11);
        assert!((g_hm_closed_form(200.0f64) - 2.0).abs() < 0.011);
        // Both branches agree at the switch point.
        let below = g_hm_closed_form(0.25f64 - 1e-12);
        let direct = 2.0 * ((-0.25f64).exp() - 0.75) / 0.25;
        assert!((below - direct).abs() < 1e-11);
    }

    #[test]
    fn regime_classification() {
        assert_eq!(classify_regime(3, r(7, 10)).unwrap(), Regime::Fast);
        assert_eq!(classify_regime(3, r(2, 3)).unwrap(), Regime::Critical);
        assert_eq!(classify_regime(3, r(4, 6)).unwrap(), Regime::Critical);
        assert_eq!(classify_regime(2, r(3, 10)).unwrap(), Regime::SlowH2);
        assert_eq!(classify_regime(3, r(1, 2)).unwrap(), Regime::Slow);
        assert!(classify_regime(3, r(1, 1)).is_err());
        assert!(classify_regime(3, r(0, 1)).is_err());
    }

    #[test]
    fn ex_k_predictions() {
        let (c, n) = (1.5, 10_000u64);
        let delta = r(3, 4);
        let pred = predicted_ex_k(1, combo(2, 0), c, delta, n).unwrap();
        let want = (c * c) * (n as f64).powf(2.0 - 1.5) / 2.0;
        assert!((pred / want - 1.0).abs() < 1e-12);
        let pred = predicted_ex_k(1, combo(1, 1), c, delta, n).unwrap();
        assert!((pred / (2.0 * want) - 1.0).abs() < 1e-12);
        let pred = predicted_ex_k(1, combo(2, 1), 2.0, r(2, 3), 1_000_000).unwrap();
        assert!((pred / (8.0 * 1e6 / 2.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ratio_predictions() {
        let fast = predicted_ratio(combo(2, 1), combo(3, 0), Regime::Fast, 1.0).unwrap();
        assert_eq!(fast, 3.0);
        let crit = predicted_ratio(combo(1, 1), combo(2, 0), Regime::Critical, 1.3).unwrap();
        let want = g_hm_closed_form(1.69) / g_hm_closed_form(0.845);
        assert!((crit - want).abs() < 1e-10);
        for regime in [Regime::Fast, Regime::Critical] {
            assert_eq!(
                predicted_ratio(combo(2, 2), combo(2, 2), regime, 0.7).unwrap(),
                1.0
            );
        }
        assert!(predicted_ratio(combo(1, 1), combo(2, 0), Regime::SlowH2, 1.0).is_err());
        assert!(predicted_ratio(combo(1, 1), combo(2, 1), Regime::Fast, 1.0).is_err());
    }

    #[test]
    fn missing_sum_law_examples() {
        for n_max in [0u64, 3, 50] {
            assert!((missing_sum_probability_h2(0, n_max, 0.3).unwrap() - 0.7).abs() < 1e-15);
        }
        assert!((missing_sum_probability_h2(1, 5, 0.3).unwrap() - 0.91).abs() < 1e-15);
        assert!(missing_sum_probability_h2(11, 5, 0.3).is_err());
        assert!(missing_sum_probability_h2(1, 5, 1.0).is_err());
        assert!((expected_missing_sums_h2(0, 0.25).unwrap() - 0.75).abs() < 1e-15);
        assert!((expected_missing_sums_h2(10_000, 0.5).unwrap() - 10.0).abs() < 1e-10);
        let p = 0.01;
        let e = expected_missing_sums_h2(1_000_000, p).unwrap();
        assert!((e / (4.0 / (p * p)) - 1.0).abs() < 0.01, "{e}");
    }

    #[test]
    fn predictions_carry_regime() {
        let p = Prediction::cardinality_over_n(combo(1, 1), 1.0, r(1, 2), 100_000).unwrap();
        assert_eq!(p.regime, Regime::Critical);
        assert!((p.predicted - g_hm_closed_form(1.0)).abs() < 1e-12);
        let p = Prediction::ratio(combo(2, 1), combo(3, 0), 1.0, r(4, 5)).unwrap();
        assert_eq!((p.regime, p.predicted), (Regime::Fast, 3.0));
        assert!(Prediction::cardinality_over_n(combo(2, 1), 1.0, r(1, 2), 100).is_err());
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let mut s = Neumaier::default();
        s.add(1e16);
        for _ in 0..10 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.sum(), 10.0);
    }
}
