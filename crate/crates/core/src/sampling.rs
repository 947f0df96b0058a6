//! Reproducible binomial subsets of `I_N = {0, ..., N}`.
//!
//! # Random stream
//!
//! Every sampled set is a function of `(seed, trial_index)` alone:
//!
//! 1. The 256-bit ChaCha key is four consecutive SplitMix64 outputs seeded
//!    with `seed`, each written little-endian.
//! 2. The generator is ChaCha with 8 rounds (`rand_chacha::ChaCha8Rng`) on
//!    that key, with its 64-bit stream id set to `trial_index` and the block
//!    counter at zero.
//! 3. Elements `0, 1, ..., N` are visited in order; element `a` is included
//!    iff the next `u64` drawn is below `floor(p * 2^64)`. For `p = 1` every
//!    element is included without drawing.
//!
//! Trial `t` never touches the stream of trial `t' != t`, so trials can run
//! in any order and on any number of workers.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::density::{check_delta, rational_to_f64};
use crate::error::{Error, Result};
use crate::sumset::BitSet;
use crate::Rational;

/// How the inclusion probability is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilitySpec {
    /// `p(N) = c N^{-delta}`.
    Decay {
        c: f64,
        #[serde(with = "crate::rational_serde")]
        delta: Rational,
    },
    /// The same `p` for every `N`.
    Fixed { p: f64 },
}

impl ProbabilitySpec {
    /// `p` at ground-set bound `N`; errors outside `(0, 1]`.
    pub fn at(&self, n_max: u64) -> Result<f64> {
        let p = match *self {
            ProbabilitySpec::Decay { c, delta } => {
                if !(c > 0.0 && c.is_finite()) {
                    return Err(Error::invalid("c", format!("{c} is not a positive number")));
                }
                check_delta(delta)?;
                c * (n_max as f64).powf(-rational_to_f64(delta))
            }
            ProbabilitySpec::Fixed { p } => p,
        };
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid(
                "p",
                format!("probability {p} at N = {n_max} is outside (0, 1]"),
            ));
        }
        Ok(p)
    }
}

/// Everything that determines one sampled set. The probability is
/// validated on construction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleParameters {
    n_max: u64,
    probability: ProbabilitySpec,
    seed: u64,
    trial_index: u64,
    p: f64,
}

impl SampleParameters {
    pub fn new(
        n_max: u64,
        probability: ProbabilitySpec,
        seed: u64,
        trial_index: u64,
    ) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::invalid("N", "need N >= 1"));
        }
        let p = probability.at(n_max)?;
        Ok(SampleParameters {
            n_max,
            probability,
            seed,
            trial_index,
            p,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn probability(&self) -> ProbabilitySpec {
        self.probability
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trial_index(&self) -> u64 {
        self.trial_index
    }

    /// Same parameters, another trial.
    pub fn with_trial(&self, trial_index: u64) -> Self {
        SampleParameters {
            trial_index,
            ..*self
        }
    }
}

/// `c N^{-delta}` or the fixed `p`.
pub fn effective_p(params: &SampleParameters) -> f64 {
    params.p
}

/// A subset of `{0, ..., N}` as a strictly increasing element list.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SampledSet {
    n_max: u64,
    elements: Vec<u64>,
}

impl SampledSet {
    /// Errors unless `elements` is strictly increasing within `[0, N]`.
    pub fn new(n_max: u64, elements: Vec<u64>) -> Result<Self> {
        if let Some(w) = elements.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "elements",
                format!("not strictly increasing at {} {}", w[0], w[1]),
            ));
        }
        if let Some(&last) = elements.last() {
            if last > n_max {
                return Err(Error::invalid(
                    "elements",
                    format!("{last} exceeds N = {n_max}"),
                ));
            }
        }
        Ok(SampledSet { n_max, elements })
    }

    /// Sorts and deduplicates first.
    pub fn from_unsorted(n_max: u64, mut elements: Vec<u64>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        Self::new(n_max, elements)
    }

    /// `{0, ..., N}`.
    pub fn full(n_max: u64) -> Self {
        SampledSet {
            n_max,
            elements: (0..=n_max).collect(),
        }
    }

    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `{N - a : a in A}`.
    pub fn reflect(&self) -> SampledSet {
        SampledSet {
            n_max: self.n_max,
            elements: self
                .elements
                .iter()
                .rev()
                .map(|&a| self.n_max - a)
                .collect(),
        }
    }

    /// Membership bits over `[0, N]`.
    pub fn to_bits(&self) -> BitSet {
        let mut bits = BitSet::new(self.n_max as usize + 1);
        for &a in &self.elements {
            bits.insert(a as usize);
        }
        bits
    }

    /// Set file: `N=<N>` then the elements space separated, each line ending
    /// in `\n`.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        write!(out, "{self}")
    }

    pub fn read_from<R: BufRead>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        text.parse()
    }
}

impl fmt::Display for SampledSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N={}", self.n_max)?;
        for (i, a) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{a}")?;
        }
        writeln!(f)
    }
}

impl FromStr for SampledSet {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::SetFormat("empty input".into()))?;
        let n_max = header
            .trim()
            .strip_prefix("N=")
            .ok_or_else(|| Error::SetFormat(format!("first line {header:?} is not `N=<N>`")))?
            .parse::<u64>()
            .map_err(|e| Error::SetFormat(format!("bad N: {e}")))?;
        let elements = lines
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>()
                    .map_err(|e| Error::SetFormat(format!("bad element {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
            return Err(Error::SetFormat(format!("unexpected third line {extra:?}")));
        }
        SampledSet::new(n_max, elements).map_err(|e| Error::SetFormat(e.to_string()))
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The generator for trial `trial_index` under `seed`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial_index);
    rng
}

/// `floor(p * 2^64)` for `p` in `(0, 1)`.
fn inclusion_threshold(p: f64) -> u64 {
    // 2^64 * p is exact in binary floating point; the cast floors and
    // saturates.
    (p * 18_446_744_073_709_551_616.0) as u64
}

/// Include each element of `{0, ..., N}` independently with probability
/// [`effective_p`].
pub fn sample_set(params: &SampleParameters) -> SampledSet {
    let n_max = params.n_max;
    let p = params.p;
    if p >= 1.0 {
        return SampledSet::full(n_max);
    }
    let threshold = inclusion_threshold(p);
    let mut rng = trial_rng(params.seed, params.trial_index);
    let mut elements = Vec::with_capacity(((n_max as f64 + 1.0) * p * 1.2) as usize + 8);
    for a in 0..=n_max {
        if rng.next_u64() < threshold {
            elements.push(a);
        }
    }
    SampledSet { n_max, elements }
}
