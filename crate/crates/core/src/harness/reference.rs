//! Published step counts and probabilities, embedded as a versioned fixture.

use serde::Deserialize;

use crate::error::{Error, Result};

const FIXTURE: &str = include_str!("../../fixtures/reference_tables.csv");

/// Which published table a reference value belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceTable {
    /// First local maximum of pure k-local search at θ = π.
    Table1,
    /// Fewest adiabatic steps reaching success probability 0.99.
    Table2,
}

#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
pub struct ReferenceValue {
    pub table: ReferenceTable,
    pub k: usize,
    pub n: usize,
    pub steps: usize,
    pub prob: f64,
}

/// Fixture format version, from its `# version:` comment.
pub fn fixture_version() -> u32 {
    FIXTURE.lines().find_map(|l| l.strip_prefix("# version:")).and_then(|v| v.trim().parse().ok()).unwrap_or(0)
}

/// All reference values in fixture order.
pub fn reference_values() -> Result<Vec<ReferenceValue>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(FIXTURE.as_bytes());
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// The reference value for `(table, k, n)`, if published.
pub fn lookup(table: ReferenceTable, k: usize, n: usize) -> Option<ReferenceValue> {
    reference_values().ok()?.into_iter().find(|v| v.table == table && v.k == k && v.n == n)
}
