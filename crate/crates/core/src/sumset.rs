//! Generalized sumsets `A_{s,d}` on bit vectors, with an exhaustive oracle
//! and the tuple-collision statistics `X_k`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::budget::{saturating_pow, Budgets};
use crate::combinat::{ext_binom, for_each_class, SignedCombination};
use crate::error::{Error, Result};
use crate::sampling::SampledSet;

const WORD: usize = 64;

/// Fixed-length bit vector. Bits at positions `>= len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSet {
    len: usize,
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(len: usize) -> Self {
        BitSet {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut bits = BitSet::new(len);
        for i in positions {
            bits.insert(i);
        }
        bits
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// # Panics
    /// If `i >= len`.
    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "bit {i} out of range 0..{}", self.len);
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + bit)
            })
        })
    }

    /// Every set bit of `self` is set in `other` (lengths may differ).
    pub fn is_subset(&self, other: &BitSet) -> bool {
        self.words.iter().enumerate().all(|(i, &w)| {
            let o = other.words.get(i).copied().unwrap_or(0);
            w & !o == 0
        })
    }

    /// `self |= src << shift`.
    ///
    /// # Panics
    /// If `shift + src.len() > self.len()`.
    pub fn or_shifted(&mut self, src: &BitSet, shift: usize) {
        assert!(
            shift + src.len <= self.len,
            "shifted source overruns the destination"
        );
        let n = src.words.len();
        if n == 0 {
            return;
        }
        let dst = &mut self.words[shift / WORD..];
        let bit = (shift % WORD) as u32;
        if bit == 0 {
            for (d, s) in dst.iter_mut().zip(&src.words) {
                *d |= *s;
            }
            return;
        }
        let back = WORD as u32 - bit;
        dst[0] |= src.words[0] << bit;
        for ((d, s), prev) in dst[1..n]
            .iter_mut()
            .zip(&src.words[1..])
            .zip(&src.words[..n - 1])
        {
            *d |= (s << bit) | (prev >> back);
        }
        if let Some(d) = dst.get_mut(n) {
            *d |= src.words[n - 1] >> back;
        }
    }
}

impl fmt::Debug for BitSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BitSet")
            .field("len", &self.len)
            .field("ones", &self.iter_ones().collect::<Vec<_>>())
            .finish()
    }
}

/// `{x + y : x in a, y in b}` over `[0, a.len + b.len - 2]`.
///
/// Shift-or: the operand with fewer set bits drives the shifts, so the cost
/// is `O(min(|a|, |b|) * (a.len + b.len) / 64)` word operations.
pub fn sumset_bits(a: &BitSet, b: &BitSet) -> BitSet {
    if a.is_empty() || b.is_empty() {
        return BitSet::new(0);
    }
    let mut out = BitSet::new(a.len + b.len - 1);
    let (driver, shifted) = if a.count_ones() <= b.count_ones() {
        (a, b)
    } else {
        (b, a)
    };
    for i in driver.iter_ones() {
        out.or_shifted(shifted, i);
    }
    out
}

/// Membership of `A_{s,d}` over `[-dN, sN]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSumsetResult {
    pub combo: SignedCombination,
    pub n_max: u64,
    /// Bit `n + dN` is set iff `n` is generated.
    pub membership: BitSet,
    pub cardinality: u64,
    pub complement_count: u64,
}

/// Compact summary, the JSON export of a sumset.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumsetSummary {
    pub s: u32,
    pub d: u32,
    #[serde(rename = "N")]
    pub n_max: u64,
    pub cardinality: u64,
    pub complement_count: u64,
}

impl GenSumsetResult {
    fn from_membership(combo: SignedCombination, n_max: u64, membership: BitSet) -> Self {
        let cardinality = membership.count_ones();
        let complement_count = combo.range_len(n_max) as u64 - cardinality;
        GenSumsetResult {
            combo,
            n_max,
            membership,
            cardinality,
            complement_count,
        }
    }

    fn offset(&self) -> i64 {
        self.combo.d() as i64 * self.n_max as i64
    }

    pub fn contains(&self, n: i64) -> bool {
        let idx = n + self.offset();
        idx >= 0 && self.membership.contains(idx as usize)
    }

    /// Generated values in increasing order.
    pub fn values(&self) -> impl Iterator<Item = i64> + '_ {
        let off = self.offset();
        self.membership.iter_ones().map(move |i| i as i64 - off)
    }

    pub fn summary(&self) -> SumsetSummary {
        SumsetSummary {
            s: self.combo.s(),
            d: self.combo.d(),
            n_max: self.n_max,
            cardinality: self.cardinality,
            complement_count: self.complement_count,
        }
    }

    /// CSV `n,member` over the full range `[-dN, sN]`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,member")?;
        let (lo, hi) = self.combo.range(self.n_max);
        for n in lo..=hi {
            writeln!(out, "{n},{}", u8::from(self.contains(n)))?;
        }
        Ok(())
    }
}

/// `A_{s,d}` by iterated pairwise set addition: `s` folds of `A`, then `d`
/// folds of the reflection `{N - a}`, which lands value `n` at bit `n + dN`.
pub fn gen_sumset(
    set: &SampledSet,
    combo: SignedCombination,
    budgets: &Budgets,
) -> Result<GenSumsetResult> {
    let n_max = set.n_max();
    budgets.check_bits("sumset membership vector", combo.range_len(n_max))?;
    let len = combo.range_len(n_max) as usize;
    if set.is_empty() {
        return Ok(GenSumsetResult::from_membership(
            combo,
            n_max,
            BitSet::new(len),
        ));
    }
    let base = set.to_bits();
    let mut acc = base.clone();
    for _ in 1..combo.s() {
        acc = sumset_bits(&acc, &base);
    }
    if combo.d() > 0 {
        let reflected = set.reflect().to_bits();
        for _ in 0..combo.d() {
            acc = sumset_bits(&acc, &reflected);
        }
    }
    debug_assert_eq!(acc.len(), len);
    Ok(GenSumsetResult::from_membership(combo, n_max, acc))
}

/// `A_{s,d}` by visiting every ordered `h`-tuple of `A`.
pub fn gen_sumset_naive(
    set: &SampledSet,
    combo: SignedCombination,
    budgets: &Budgets,
) -> Result<GenSumsetResult> {
    let n_max = set.n_max();
    budgets.check_enumeration(
        "naive sumset enumeration",
        saturating_pow(set.len() as u128, combo.h()),
    )?;
    let len = combo.range_len(n_max) as usize;
    let mut membership = BitSet::new(len);
    let elems: Vec<i64> = set.elements().iter().map(|&a| a as i64).collect();
    if !elems.is_empty() {
        let s = combo.s() as usize;
        let offset = combo.d() as i64 * n_max as i64;
        let mut idx = vec![0usize; combo.h() as usize];
        'outer: loop {
            let plus: i64 = idx[..s].iter().map(|&i| elems[i]).sum();
            let minus: i64 = idx[s..].iter().map(|&i| elems[i]).sum();
            membership.insert((plus - minus + offset) as usize);
            for digit in idx.iter_mut().rev() {
                if *digit + 1 < elems.len() {
                    *digit += 1;
                    continue 'outer;
                }
                *digit = 0;
            }
            break;
        }
    }
    Ok(GenSumsetResult::from_membership(combo, n_max, membership))
}

/// Representation-class multiplicities `r_v` of a sampled `A` and the
/// collision counts `X_k = sum_v C(r_v, k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleStatistics {
    pub combo: SignedCombination,
    pub n_max: u64,
    /// `r_v` for every generated value `v`.
    pub class_counts: BTreeMap<i64, u64>,
    /// `X_1, ..., X_{k_max}`.
    pub x: Vec<BigUint>,
    /// Classes by number of repeated entries (`h` minus distinct entries).
    pub repeat_profile: Vec<u64>,
}

impl TupleStatistics {
    pub fn k_max(&self) -> usize {
        self.x.len()
    }

    /// `X_k`; `None` beyond `k_max`.
    pub fn x_k(&self, k: usize) -> Option<&BigUint> {
        k.checked_sub(1).and_then(|i| self.x.get(i))
    }

    pub fn max_multiplicity(&self) -> u64 {
        self.class_counts.values().copied().max().unwrap_or(0)
    }

    /// Number of distinct generated values, `|A_{s,d}|`.
    pub fn distinct_values(&self) -> u64 {
        self.class_counts.len() as u64
    }

    /// `sum_{k<=m} (-1)^(k-1) X_k`. Equals `|A_{s,d}|` once `m` reaches
    /// [`max_multiplicity`](Self::max_multiplicity), and alternately over-
    /// and under-shoots it before that.
    pub fn alternating_sum(&self, m: usize) -> BigInt {
        let mut acc = BigInt::zero();
        for (i, x) in self.x.iter().take(m).enumerate() {
            if i % 2 == 0 {
                acc += BigInt::from(x.clone());
            } else {
                acc -= BigInt::from(x.clone());
            }
        }
        acc
    }
}

/// Enumerates the representation classes of `A` (sorted plus block, sorted
/// minus block) and tallies them per generated value.
pub fn tuple_statistics(
    set: &SampledSet,
    combo: SignedCombination,
    k_max: usize,
    budgets: &Budgets,
) -> Result<TupleStatistics> {
    if k_max == 0 {
        return Err(Error::invalid("k_max", "need k_max >= 1"));
    }
    budgets.check_enumeration(
        "tuple statistics enumeration",
        saturating_pow(set.len() as u128, combo.h()),
    )?;
    let elems: Vec<i64> = set.elements().iter().map(|&a| a as i64).collect();
    let mut class_counts: BTreeMap<i64, u64> = BTreeMap::new();
    let mut repeat_profile = vec![0u64; combo.h() as usize];
    let mut entries: Vec<i64> = Vec::with_capacity(combo.h() as usize);
    for_each_class(&elems, combo, |plus, minus| {
        let v = plus.iter().sum::<i64>() - minus.iter().sum::<i64>();
        *class_counts.entry(v).or_insert(0) += 1;
        entries.clear();
        entries.extend_from_slice(plus);
        entries.extend_from_slice(minus);
        entries.sort_unstable();
        entries.dedup();
        repeat_profile[combo.h() as usize - entries.len()] += 1;
    });
    let x = (1..=k_max)
        .map(|k| {
            class_counts
                .values()
                .map(|&r| ext_binom(r as i64, k as u32))
                .sum()
        })
        .collect();
    Ok(TupleStatistics {
        combo,
        n_max: set.n_max(),
        class_counts,
        x,
        repeat_profile,
    })
}

/// Outcome of comparing `|A + A|` with `|A - A|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MstdClass {
    SumDominated,
    Balanced,
    DifferenceDominated,
}

/// Sizes of `A + A` and `A - A` and their comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MstdOutcome {
    pub class: MstdClass,
    pub sums: u64,
    pub differences: u64,
}

pub fn mstd_outcome(set: &SampledSet, budgets: &Budgets) -> Result<MstdOutcome> {
    let sums = gen_sumset(set, SignedCombination::new(2, 0)?, budgets)?.cardinality;
    let differences = gen_sumset(set, SignedCombination::new(1, 1)?, budgets)?.cardinality;
    let class = match sums.cmp(&differences) {
        std::cmp::Ordering::Greater => MstdClass::SumDominated,
        std::cmp::Ordering::Equal => MstdClass::Balanced,
        std::cmp::Ordering::Less => MstdClass::DifferenceDominated,
    };
    Ok(MstdOutcome {
        class,
        sums,
        differences,
    })
}

pub fn mstd_classify(set: &SampledSet) -> Result<MstdClass> {
    Ok(mstd_outcome(set, &Budgets::default())?.class)
}
