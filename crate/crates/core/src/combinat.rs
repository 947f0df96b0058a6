//! Exact counting: extended binomials, bounded compositions and the
//! representation function `R(n, s, d)` over `I_N = {0, ..., N}`.

use std::fmt;
use std::io::Write;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::budget::{saturating_pow, Budgets};
use crate::error::{Error, Result};

/// Which signed sumset `A_{s,d}` is meant: `s` plus signs followed by `d`
/// minus signs, `h = s + d` summands.
///
/// Always `s >= 1`, `d <= s` and `h >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawCombination", into = "RawCombination")]
pub struct SignedCombination {
    s: u32,
    d: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCombination {
    s: u32,
    d: u32,
}

impl TryFrom<RawCombination> for SignedCombination {
    type Error = Error;

    fn try_from(raw: RawCombination) -> Result<Self> {
        SignedCombination::new(raw.s, raw.d)
    }
}

impl From<SignedCombination> for RawCombination {
    fn from(c: SignedCombination) -> Self {
        RawCombination { s: c.s, d: c.d }
    }
}

impl SignedCombination {
    pub fn new(s: u32, d: u32) -> Result<Self> {
        if s == 0 {
            return Err(Error::invalid("s", "need at least one plus sign"));
        }
        if d > s {
            return Err(Error::invalid(
                "d",
                format!("d = {d} exceeds s = {s}; swap the roles of the signs"),
            ));
        }
        if s + d < 2 {
            return Err(Error::invalid("s", "need h = s + d >= 2 summands"));
        }
        if s + d > 64 {
            return Err(Error::invalid("s", "h = s + d is limited to 64"));
        }
        Ok(SignedCombination { s, d })
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn h(&self) -> u32 {
        self.s + self.d
    }

    /// `s! d!`, the number of reorderings of a tuple with distinct entries
    /// that keep its generated value.
    pub fn symmetry_factor(&self) -> BigUint {
        factorial(self.s) * factorial(self.d)
    }

    /// `s! d!` as a float.
    pub fn symmetry_factor_f64(&self) -> f64 {
        self.symmetry_factor().to_f64().unwrap_or(f64::INFINITY)
    }

    /// Smallest and largest generated value over `I_N`: `[-dN, sN]`.
    pub fn range(&self, n_max: u64) -> (i64, i64) {
        (
            -(self.d as i64) * n_max as i64,
            self.s as i64 * n_max as i64,
        )
    }

    /// Number of integers in `[-dN, sN]`, i.e. `hN + 1`.
    pub fn range_len(&self, n_max: u64) -> u128 {
        self.h() as u128 * n_max as u128 + 1
    }

    /// Every valid combination with `h` summands, ordered by increasing `d`.
    pub fn all_with_h(h: u32) -> Vec<SignedCombination> {
        (0..=h / 2)
            .filter_map(|d| SignedCombination::new(h - d, d).ok())
            .collect()
    }
}

impl fmt::Display for SignedCombination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.s, self.d)
    }
}

pub fn factorial(n: u32) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Binomial coefficient extended by zero: `C(a, b) = 0` whenever `a < b`,
/// including every negative `a`.
pub fn ext_binom(a: i64, b: u32) -> BigUint {
    if a < 0 || (a as u64) < b as u64 {
        return BigUint::zero();
    }
    let a = a as u64;
    let k = (b as u64).min(a - b as u64);
    // acc == C(a, i) before step i, so the division is exact.
    let mut acc: u128 = 1;
    for i in 0..k {
        match acc.checked_mul((a - i) as u128) {
            Some(prod) => acc = prod / (i as u128 + 1),
            None => return ext_binom_big(a, k, BigUint::from(acc), i),
        }
    }
    BigUint::from(acc)
}

fn ext_binom_big(a: u64, k: u64, mut acc: BigUint, from: u64) -> BigUint {
    for i in from..k {
        acc *= a - i;
        acc /= i + 1;
    }
    acc
}

/// Number of ordered `k`-tuples of non-negative integers summing to `n`.
///
/// # Panics
/// If `k == 0`.
pub fn stars_and_bars(n: u64, k: u32) -> BigUint {
    assert!(k >= 1, "stars_and_bars needs k >= 1");
    ext_binom(n as i64 + k as i64 - 1, k - 1)
}

/// Number of ordered `h`-tuples in `I_N^h` whose first `s` entries minus the
/// last `d` entries equal `n`.
///
/// Bounded-composition inclusion-exclusion over the shifted target
/// `n' = n + dN`; out-of-range terms vanish through [`ext_binom`].
pub fn rep_count(n: i64, combo: SignedCombination, n_max: u64) -> BigUint {
    let (lo, hi) = combo.range(n_max);
    if n < lo || n > hi {
        return BigUint::zero();
    }
    let h = combo.h();
    let shifted = n - lo;
    let mut total = BigInt::zero();
    for i in 0..=h {
        let top = shifted - i as i64 * (n_max as i64 + 1) + h as i64 - 1;
        if top < (h - 1) as i64 {
            break;
        }
        let term = ext_binom(h as i64, i) * ext_binom(top, h - 1);
        if i % 2 == 0 {
            total += BigInt::from(term);
        } else {
            total -= BigInt::from(term);
        }
    }
    match total.into_parts() {
        (Sign::Minus, _) => unreachable!("representation counts are non-negative"),
        (_, magnitude) => magnitude,
    }
}

/// Exact table of `R(n, s, d)` for every `n` in `[-dN, sN]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationCounts {
    pub combo: SignedCombination,
    pub n_max: u64,
    counts: Vec<BigUint>,
}

impl RepresentationCounts {
    pub fn min_value(&self) -> i64 {
        self.combo.range(self.n_max).0
    }

    pub fn max_value(&self) -> i64 {
        self.combo.range(self.n_max).1
    }

    pub fn get(&self, n: i64) -> Option<&BigUint> {
        let idx = n.checked_sub(self.min_value())?;
        usize::try_from(idx).ok().and_then(|i| self.counts.get(i))
    }

    /// Counts in increasing order of `n`.
    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &BigUint)> + '_ {
        let lo = self.min_value();
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, c)| (lo + i as i64, c))
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// CSV with header `n,count`, one row per `n` in increasing order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,count")?;
        for (n, c) in self.iter() {
            writeln!(out, "{n},{c}")?;
        }
        Ok(())
    }
}

/// [`rep_count`] for every `n` in `[-dN, sN]`.
pub fn rep_counts_all(
    combo: SignedCombination,
    n_max: u64,
    budgets: &Budgets,
) -> Result<RepresentationCounts> {
    budgets.check_table("representation table", combo.range_len(n_max))?;
    let (lo, hi) = combo.range(n_max);
    let counts = (lo..=hi).map(|n| rep_count(n, combo, n_max)).collect();
    Ok(RepresentationCounts {
        combo,
        n_max,
        counts,
    })
}

/// `R(n, s, d)` by walking all of `I_N^h`.
pub fn rep_count_bruteforce(
    n: i64,
    combo: SignedCombination,
    n_max: u64,
    budgets: &Budgets,
) -> Result<BigUint> {
    let h = combo.h();
    budgets.check_enumeration(
        "brute-force tuple count",
        saturating_pow(n_max as u128 + 1, h),
    )?;
    let s = combo.s() as usize;
    let top = n_max as i64;
    let mut tuple = vec![0i64; h as usize];
    let mut count: u64 = 0;
    loop {
        let value: i64 = tuple[..s].iter().sum::<i64>() - tuple[s..].iter().sum::<i64>();
        if value == n {
            count += 1;
        }
        if !advance_odometer(&mut tuple, top) {
            break;
        }
    }
    Ok(BigUint::from(count))
}

/// Steps `digits` to the next tuple in `{0..=top}^len`; false once exhausted.
fn advance_odometer(digits: &mut [i64], top: i64) -> bool {
    for digit in digits.iter_mut().rev() {
        if *digit < top {
            *digit += 1;
            return true;
        }
        *digit = 0;
    }
    false
}

/// Calls `visit` once per non-decreasing index sequence of length `len` over
/// `0..n_items`, i.e. once per multiset.
pub(crate) fn for_each_multiset(n_items: usize, len: usize, mut visit: impl FnMut(&[usize])) {
    if len == 0 {
        visit(&[]);
        return;
    }
    if n_items == 0 {
        return;
    }
    let mut idx = vec![0usize; len];
    loop {
        visit(&idx);
        let Some(pos) = idx.iter().rposition(|&i| i + 1 < n_items) else {
            return;
        };
        let next = idx[pos] + 1;
        idx[pos..].iter_mut().for_each(|i| *i = next);
    }
}

/// Calls `visit(plus, minus)` once per representation class over `values`:
/// a sorted `s`-multiset paired with a sorted `d`-multiset.
pub(crate) fn for_each_class(
    values: &[i64],
    combo: SignedCombination,
    mut visit: impl FnMut(&[i64], &[i64]),
) {
    let (s, d) = (combo.s() as usize, combo.d() as usize);
    let mut minus_sets: Vec<i64> = Vec::new();
    for_each_multiset(values.len(), d, |idx| {
        minus_sets.extend(idx.iter().map(|&i| values[i]));
    });
    let mut plus = vec![0i64; s];
    for_each_multiset(values.len(), s, |idx| {
        for (slot, &i) in plus.iter_mut().zip(idx) {
            *slot = values[i];
        }
        if d == 0 {
            visit(&plus, &[]);
        } else {
            for minus in minus_sets.chunks_exact(d) {
                visit(&plus, minus);
            }
        }
    });
}

/// Per-value class tallies over all of `I_N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassTally {
    pub combo: SignedCombination,
    pub n_max: u64,
    /// Representation classes per value, indexed by `n + dN`.
    pub classes: Vec<u64>,
    /// Classes whose `h` entries are pairwise distinct, indexed by `n + dN`.
    pub all_distinct: Vec<u64>,
}

impl ClassTally {
    pub fn classes_of(&self, n: i64) -> u64 {
        self.index(n).map_or(0, |i| self.classes[i])
    }

    pub fn all_distinct_of(&self, n: i64) -> u64 {
        self.index(n).map_or(0, |i| self.all_distinct[i])
    }

    fn index(&self, n: i64) -> Option<usize> {
        let (lo, hi) = self.combo.range(self.n_max);
        (lo..=hi).contains(&n).then(|| (n - lo) as usize)
    }
}

/// Enumerates every representation class over `I_N` once.
pub fn class_tally(combo: SignedCombination, n_max: u64, budgets: &Budgets) -> Result<ClassTally> {
    budgets.check_enumeration(
        "representation class enumeration",
        saturating_pow(n_max as u128 + 1, combo.h()),
    )?;
    let values: Vec<i64> = (0..=n_max as i64).collect();
    let len = combo.range_len(n_max) as usize;
    let offset = combo.d() as i64 * n_max as i64;
    let mut classes = vec![0u64; len];
    let mut all_distinct = vec![0u64; len];
    for_each_class(&values, combo, |plus, minus| {
        let v = plus.iter().sum::<i64>() - minus.iter().sum::<i64>();
        let idx = (v + offset) as usize;
        classes[idx] += 1;
        if pairwise_distinct(plus, minus) {
            all_distinct[idx] += 1;
        }
    });
    Ok(ClassTally {
        combo,
        n_max,
        classes,
        all_distinct,
    })
}

/// Both blocks are sorted, so repeats inside a block are adjacent.
fn pairwise_distinct(plus: &[i64], minus: &[i64]) -> bool {
    plus.windows(2).all(|w| w[0] != w[1])
        && minus.windows(2).all(|w| w[0] != w[1])
        && !plus.iter().any(|p| minus.binary_search(p).is_ok())
}

/// Number of representation classes of `n`: ordered tuples up to permutations
/// of the plus block and of the minus block.
pub fn distinct_class_count(
    n: i64,
    combo: SignedCombination,
    n_max: u64,
    budgets: &Budgets,
) -> Result<u64> {
    budgets.check_enumeration(
        "representation class enumeration",
        saturating_pow(n_max as u128 + 1, combo.h()),
    )?;
    let values: Vec<i64> = (0..=n_max as i64).collect();
    let mut count = 0u64;
    for_each_class(&values, combo, |plus, minus| {
        if plus.iter().sum::<i64>() - minus.iter().sum::<i64>() == n {
            count += 1;
        }
    });
    Ok(count)
}
