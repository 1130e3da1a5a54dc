use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

/// Candidate sources for each triple pattern, indexed like the BGP.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SourceAssignment(Vec<BTreeSet<String>>);

impl SourceAssignment {
    /// Every pattern paired with every source.
    pub fn all(patterns: usize, ids: impl IntoIterator<Item = String>) -> Self {
        let ids: BTreeSet<String> = ids.into_iter().collect();
        SourceAssignment(vec![ids; patterns])
    }

    pub fn from_sets(sets: Vec<BTreeSet<String>>) -> Self {
        SourceAssignment(sets)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, t: usize) -> &BTreeSet<String> {
        &self.0[t]
    }

    pub fn sets(&self) -> &[BTreeSet<String>] {
        &self.0
    }

    pub fn remove(&mut self, t: usize, s: &str) -> bool {
        self.0[t].remove(s)
    }

    pub fn retain(&mut self, t: usize, keep: impl FnMut(&String) -> bool) {
        self.0[t].retain(keep)
    }

    /// Distinct sources selected for any pattern.
    pub fn distinct_sources(&self) -> BTreeSet<&str> {
        self.0.iter().flatten().map(String::as_str).collect()
    }

    /// Sum of per-pattern set sizes.
    pub fn pair_count(&self) -> usize {
        self.0.iter().map(BTreeSet::len).sum()
    }

    /// Pointwise inclusion.
    pub fn is_subset_of(&self, other: &SourceAssignment) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a.is_subset(b))
    }
}

impl fmt::Display for SourceAssignment {
    /// One line per pattern: `t1: {s1, s2}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, set) in self.0.iter().enumerate() {
            let names: Vec<&str> = set.iter().map(String::as_str).collect();
            writeln!(f, "t{}: {{{}}}", i + 1, names.join(", "))?;
        }
        Ok(())
    }
}
