//! Metadata-driven selection: predicate and class lists, optional ASK probes,
//! geometry colocation and join-aware URI prefix pruning.

use std::collections::BTreeSet;

use super::{Catalog, SelectorError, SourceAssignment};
use crate::query::TriplePattern;
use crate::store::{ask, Term};
use crate::summaries::{term_prefix, ThematicStats};
use crate::vocab::{GEO_HAS_GEOMETRY, RDF_TYPE};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ThematicOptions {
    /// Probe each remaining (pattern, source) pair with an ASK against the source's data.
    pub ask: bool,
    /// A feature, its `geo:hasGeometry` link and its geometry come from one source.
    pub colocation: bool,
}

impl Default for ThematicOptions {
    fn default() -> Self {
        ThematicOptions { ask: false, colocation: true }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Pos {
    Subject,
    Object,
}

fn prefixes(st: &ThematicStats, pos: Pos) -> &BTreeSet<String> {
    match pos {
        Pos::Subject => &st.subject_prefixes,
        Pos::Object => &st.object_prefixes,
    }
}

fn term_at(t: &TriplePattern, pos: Pos) -> &Term {
    match pos {
        Pos::Subject => &t.subject,
        Pos::Object => &t.object,
    }
}

/// Whether the statistics admit a match for `t`. Empty statistics mean unknown.
fn admits(t: &TriplePattern, st: &ThematicStats) -> bool {
    if st.predicates.is_empty() {
        return true;
    }
    if let Some(p) = t.predicate.as_iri() {
        if !st.predicates.contains(p) {
            return false;
        }
        if p == RDF_TYPE {
            if let Some(c) = t.object.as_iri() {
                if !st.classes.contains(c) {
                    return false;
                }
            }
        }
    }
    [Pos::Subject, Pos::Object].into_iter().all(|pos| {
        let term = term_at(t, pos);
        let known = prefixes(st, pos);
        term.is_var() || known.is_empty() || known.contains(&term_prefix(term))
    })
}

/// Patterns that must share a source: a `geo:hasGeometry` pattern plus every
/// pattern whose subject is its feature or its geometry.
fn colocation_groups(bgp: &[TriplePattern]) -> Vec<Vec<usize>> {
    bgp.iter()
        .filter(|h| h.predicate.is_iri(GEO_HAS_GEOMETRY))
        .map(|h| {
            bgp.iter()
                .enumerate()
                .filter(|(_, t)| t.subject == h.subject || t.subject == h.object)
                .map(|(i, _)| i)
                .collect()
        })
        .collect()
}

fn colocate(sigma: &mut SourceAssignment, groups: &[Vec<usize>]) -> bool {
    let mut changed = false;
    for group in groups {
        let common: BTreeSet<String> = group
            .iter()
            .map(|&i| sigma.get(i).clone())
            .reduce(|a, b| a.intersection(&b).cloned().collect())
            .unwrap_or_default();
        for &i in group {
            if sigma.get(i).len() != common.len() {
                sigma.retain(i, |s| common.contains(s));
                changed = true;
            }
        }
    }
    changed
}

/// Drops a source from a pattern when, for some variable the pattern shares
/// with another pattern, the source's prefixes at that position cannot meet
/// the prefixes the other pattern's sources offer at theirs.
fn prune_prefixes(
    bgp: &[TriplePattern],
    sigma: &mut SourceAssignment,
    catalog: &Catalog,
) -> bool {
    let mut changed = false;
    for (i, t) in bgp.iter().enumerate() {
        for pos in [Pos::Subject, Pos::Object] {
            let Some(v) = term_at(t, pos).as_var() else { continue };
            for (j, t2) in bgp.iter().enumerate() {
                if j == i {
                    continue;
                }
                for pos2 in [Pos::Subject, Pos::Object] {
                    if term_at(t2, pos2).as_var() != Some(v) {
                        continue;
                    }
                    // None: some partner source has no prefix statistics.
                    let mut offered: Option<BTreeSet<&str>> = Some(BTreeSet::new());
                    for s2 in sigma.get(j) {
                        let known = prefixes(stats(catalog, s2), pos2);
                        match (&mut offered, known.is_empty()) {
                            (Some(set), false) => set.extend(known.iter().map(String::as_str)),
                            _ => offered = None,
                        }
                    }
                    let Some(offered) = offered else { continue };
                    let keep: BTreeSet<String> = sigma
                        .get(i)
                        .iter()
                        .filter(|s| {
                            let own = prefixes(stats(catalog, s), pos);
                            own.is_empty() || own.iter().any(|p| offered.contains(p.as_str()))
                        })
                        .cloned()
                        .collect();
                    if keep.len() != sigma.get(i).len() {
                        sigma.retain(i, |s| keep.contains(s));
                        changed = true;
                    }
                }
            }
        }
    }
    changed
}

/// Statistics of a source already checked to have a descriptor.
fn stats<'c>(catalog: &'c Catalog, id: &str) -> &'c ThematicStats {
    &catalog.get(id).and_then(|e| e.descriptor.as_ref()).expect("descriptor checked").stats
}

/// The first stage alone: predicate, class and constant-term prefix checks.
/// Sources must have descriptors.
pub(super) fn pattern_wise(bgp: &[TriplePattern], sigma: &SourceAssignment, catalog: &Catalog) -> SourceAssignment {
    let mut sigma = sigma.clone();
    for (i, t) in bgp.iter().enumerate() {
        sigma.retain(i, |s| admits(t, stats(catalog, s)));
    }
    sigma
}

/// Refines `sigma` using the thematic metadata of each candidate source.
pub fn thematic_source_select(
    bgp: &[TriplePattern],
    sigma: &SourceAssignment,
    catalog: &Catalog,
    options: ThematicOptions,
) -> Result<SourceAssignment, SelectorError> {
    let candidates: Vec<String> = sigma.distinct_sources().into_iter().map(str::to_string).collect();
    for id in &candidates {
        if catalog.get(id).and_then(|e| e.descriptor.as_ref()).is_none() {
            return Err(SelectorError::MissingDescriptor(id.clone()));
        }
    }
    let mut sigma = pattern_wise(bgp, sigma, catalog);
    if options.ask {
        for (i, t) in bgp.iter().enumerate() {
            sigma.retain(i, |s| catalog.get(s).and_then(|e| e.store.as_deref()).is_none_or(|st| ask(st, t)));
        }
    }
    let groups = if options.colocation { colocation_groups(bgp) } else { Vec::new() };
    loop {
        let a = colocate(&mut sigma, &groups);
        let b = prune_prefixes(bgp, &mut sigma, catalog);
        if !a && !b {
            return Ok(sigma);
        }
    }
}
