//! Squared-reduction check: a learned search with `A` expansions beats an
//! uninformed one with `B` in the strong sense when `A^2 < B`.

use serde::{Deserialize, Serialize};

use crate::search::SearchResult;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub instance: usize,
    /// Learned expansions.
    pub a: usize,
    /// Uninformed expansions.
    pub b: usize,
    pub squared_reduction: bool,
}

impl ComplexityRow {
    pub fn new(instance: usize, a: usize, b: usize) -> Self {
        let a2 = (a as u128) * (a as u128);
        ComplexityRow {
            instance,
            a,
            b,
            squared_reduction: a2 < b as u128,
        }
    }
}

/// Compares two searches on the same instance.
pub fn complexity_ledger(learned: &SearchResult, uninformed: &SearchResult) -> ComplexityRow {
    ComplexityRow::new(0, learned.expansions, uninformed.expansions)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub rows: Vec<ComplexityRow>,
}

impl ComplexityReport {
    /// One row per `(learned, uninformed)` pair, numbered in order.
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a SearchResult, &'a SearchResult)>) -> Self {
        let rows = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (l, u))| ComplexityRow::new(i, l.expansions, u.expansions))
            .collect();
        ComplexityReport { rows }
    }

    /// Fraction of rows with `A^2 < B`; 0 for an empty report.
    pub fn fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.squared_reduction).count() as f64 / self.rows.len() as f64
    }

    pub const CSV_HEADER: &'static str = "instance,a,b,a_squared_lt_b";

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.instance, r.a, r.b, r.squared_reduction));
        }
        out.push_str(&format!("fraction,,,{:.4}\n", self.fraction()));
        out
    }
}
