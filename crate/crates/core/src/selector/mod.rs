//! Source selection: bounding-polygon pruning of `geo:asWKT` patterns on top
//! of a thematic selector.

mod assignment;
mod thematic;

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::geom::{distance, Relation};
use crate::query::{FilterArg, GeoFilter, Query};
use crate::store::Store;
use crate::summaries::DatasetDescriptor;
use crate::{GeomError, PreparedGeometry};

pub use assignment::SourceAssignment;
pub use thematic::{thematic_source_select, ThematicOptions};

#[derive(Debug, Error)]
pub enum SelectorError {
    #[error("no descriptor for source '{0}'")]
    MissingDescriptor(String),
    #[error("filter variable ?{0} has no bounding polygon")]
    UnboundVariable(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Relations refuted by a disjoint or touching pair of bounds.
pub const R1: [Relation; 3] = [Relation::Equals, Relation::Within, Relation::Contains];
/// Relations refuted only by a disjoint pair of bounds.
pub const R2: [Relation; 4] = [Relation::Overlaps, Relation::Crosses, Relation::Touches, Relation::Intersects];

/// True when `f` cannot hold for any shapes contained in the bounds bound to its variables.
pub fn bp_filter_empty(f: &GeoFilter, bounds: &HashMap<&str, &PreparedGeometry>) -> Result<bool, SelectorError> {
    let (a, b) = f.args();
    let x = substitute(a, bounds)?;
    let y = substitute(b, bounds)?;
    Ok(match f {
        GeoFilter::Relation { relation, .. } if R1.contains(relation) => {
            let m = x.matrix(y)?;
            !m.intersects() || m.is(Relation::Touches)
        }
        GeoFilter::Relation { relation, .. } if R2.contains(relation) => !x.intersects(y)?,
        GeoFilter::Distance { unit, threshold, .. } => distance(x, y, unit)? > *threshold,
        _ => false,
    })
}

fn substitute<'a>(
    x: &'a FilterArg,
    bounds: &HashMap<&str, &'a PreparedGeometry>,
) -> Result<&'a PreparedGeometry, SelectorError> {
    match x {
        FilterArg::Wkt(l) => Ok(l.geometry().expect("parsed WKT argument")),
        FilterArg::Var(v) => bounds.get(&**v).copied().ok_or_else(|| SelectorError::UnboundVariable(v.to_string())),
    }
}

/// What the selector knows about one source.
#[derive(Debug, Clone)]
pub struct SourceEntry {
    pub id: String,
    pub descriptor: Option<DatasetDescriptor>,
    /// Prepared bounding polygon, if the descriptor has one.
    pub bound: Option<Arc<PreparedGeometry>>,
    /// Data access for ASK refinement.
    pub store: Option<Arc<Store>>,
}

impl SourceEntry {
    pub fn new(id: impl Into<String>, descriptor: Option<DatasetDescriptor>, store: Option<Arc<Store>>) -> Self {
        let bound = descriptor
            .as_ref()
            .and_then(|d| d.bounding.as_ref())
            .map(|b| Arc::new(PreparedGeometry::new(b.shape.clone())));
        SourceEntry { id: id.into(), descriptor, bound, store }
    }
}

/// The sources of a federation in a fixed order.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    pub sources: Vec<SourceEntry>,
}

impl Catalog {
    pub fn ids(&self) -> Vec<String> {
        self.sources.iter().map(|s| s.id.clone()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&SourceEntry> {
        self.sources.iter().find(|s| s.id == id)
    }

    /// Bounding polygons by source id; sources without one are absent.
    pub fn bounds(&self) -> HashMap<String, Arc<PreparedGeometry>> {
        self.sources
            .iter()
            .filter_map(|s| Some((s.id.clone(), s.bound.clone()?)))
            .collect()
    }
}

/// Prunes sources from `geo:asWKT` patterns until neither rule applies.
///
/// Sources without a bounding polygon are never pruned and never refute a join.
pub fn aswkt_source_select(
    q: &Query,
    sigma: &SourceAssignment,
    bounds: &HashMap<String, Arc<PreparedGeometry>>,
) -> SourceAssignment {
    let mut sigma = sigma.clone();
    let wkt: Vec<(usize, &str)> = q.bgp.iter().enumerate().filter_map(|(i, t)| Some((i, t.wkt_var()?))).collect();
    let singles: Vec<(usize, &GeoFilter, &str)> = q
        .filters
        .iter()
        .enumerate()
        .filter_map(|(k, f)| {
            let v = f.vars();
            (v.len() == 1).then(|| (k, f, *v.iter().next().unwrap()))
        })
        .collect();
    let pairs: Vec<(usize, &GeoFilter, &str, &str)> = q
        .filters
        .iter()
        .enumerate()
        .filter_map(|(k, f)| {
            let v: Vec<&str> = f.vars().into_iter().collect();
            (v.len() == 2).then(|| (k, f, v[0], v[1]))
        })
        .collect();
    // Memoized emptiness tests keyed by filter, variable order and sources.
    let mut memo: HashMap<(usize, bool, String, Option<String>), bool> = HashMap::new();
    let mut empty = |k: usize, f: &GeoFilter, swapped: bool, assign: &[(&str, &str)]| -> bool {
        let key = (k, swapped, assign[0].1.to_string(), assign.get(1).map(|a| a.1.to_string()));
        *memo.entry(key).or_insert_with(|| {
            let mut b = HashMap::new();
            for (var, src) in assign {
                match bounds.get(*src) {
                    Some(g) => b.insert(*var, &**g),
                    None => return false,
                };
            }
            bp_filter_empty(f, &b).unwrap_or(false)
        })
    };
    loop {
        let before = sigma.clone();
        // Rule 1: a single-variable filter refuted by the source's own bound.
        for &(k, f, v) in &singles {
            for &(t, _) in wkt.iter().filter(|w| w.1 == v) {
                for s in sigma.get(t).clone() {
                    if empty(k, f, false, &[(v, &s)]) {
                        sigma.remove(t, &s);
                    }
                }
            }
        }
        // Rule 2: a join filter refuted against every candidate of the other side.
        for &(k, f, a, b) in &pairs {
            for (o, o2, swapped) in [(a, b, false), (b, a, true)] {
                for &(t, _) in wkt.iter().filter(|w| w.1 == o) {
                    for &(t2, _) in wkt.iter().filter(|w| w.1 == o2) {
                        for s in sigma.get(t).clone() {
                            if !bounds.contains_key(&s) {
                                continue;
                            }
                            let partners: Vec<String> = sigma.get(t2).iter().cloned().collect();
                            if partners.iter().all(|s2| empty(k, f, swapped, &[(o, &s), (o2, s2)])) {
                                sigma.remove(t, &s);
                            }
                        }
                    }
                }
            }
        }
        if sigma == before {
            return sigma;
        }
    }
}

/// Which layers of selection to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Thematic selection only.
    Thm,
    /// Bounding-polygon pruning followed by thematic selection.
    Geo,
}

/// Every pattern starts with every source; `geo` mode then prunes with the
/// bounding polygons before the thematic stages.
pub fn geospatial_source_select(
    q: &Query,
    catalog: &Catalog,
    mode: Mode,
    options: ThematicOptions,
) -> Result<SourceAssignment, SelectorError> {
    let sigma = SourceAssignment::all(q.bgp.len(), catalog.ids());
    let sigma = match mode {
        Mode::Geo => aswkt_source_select(q, &sigma, &catalog.bounds()),
        Mode::Thm => sigma,
    };
    thematic_source_select(&q.bgp, &sigma, catalog, options)
}

#[cfg(test)]
mod tests;
