use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Explicit resource limits. Oracle-scale operations refuse work beyond these
/// limits instead of truncating.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    /// Maximum number of tuples an exhaustive enumeration may visit.
    pub enumeration: u64,
    /// Maximum number of entries in an exact representation-count table.
    pub table_entries: u64,
    /// Maximum number of bits in a sumset membership vector.
    pub bits: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            enumeration: 100_000_000,
            table_entries: 10_000_000,
            bits: 1 << 32,
        }
    }
}

impl Budgets {
    pub(crate) fn check_enumeration(&self, what: &'static str, requested: u128) -> Result<()> {
        check(what, "enumeration", requested, self.enumeration)
    }

    pub(crate) fn check_table(&self, what: &'static str, requested: u128) -> Result<()> {
        check(what, "table_entries", requested, self.table_entries)
    }

    pub(crate) fn check_bits(&self, what: &'static str, requested: u128) -> Result<()> {
        check(what, "bits", requested, self.bits)
    }
}

fn check(what: &'static str, budget: &'static str, requested: u128, limit: u64) -> Result<()> {
    if requested > limit as u128 {
        Err(Error::BudgetExceeded {
            what,
            budget,
            requested,
            limit,
        })
    } else {
        Ok(())
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn saturating_pow(base: u128, exp: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}
