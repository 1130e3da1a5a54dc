//! In-memory triple store with basic-graph-pattern matching and filter evaluation.

mod eval;
mod term;
mod turtle;

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use crate::vocab::GEO_AS_WKT;
use crate::{GeomError, PreparedGeometry};

pub use eval::{ask, eval_filter, evaluate_query, match_bgp, Binding, Evaluator, Solutions};
pub use term::{Literal, Term, Triple};
pub use turtle::{header_value, parse_document, write_ntriples, Document};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid WKT literal at line {line}: {source}")]
    InvalidWkt { line: usize, source: GeomError },
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

/// Bit set of source positions in a federation (at most 64 sources).
pub type SourceMask = u64;

/// A set of triples with subject, predicate and object indexes.
///
/// A store built by [`Store::merge`] tags each triple with the sources holding it.
#[derive(Debug, Clone, Default)]
pub struct Store {
    id: String,
    triples: Vec<Triple>,
    masks: Vec<SourceMask>,
    by_s: HashMap<Term, Vec<u32>>,
    by_p: HashMap<Term, Vec<u32>>,
    by_o: HashMap<Term, Vec<u32>>,
}

impl Store {
    pub fn new(id: impl Into<String>, triples: impl IntoIterator<Item = Triple>) -> Self {
        let mut seen = HashMap::new();
        let mut v = Vec::new();
        for t in triples {
            if !seen.contains_key(&t) {
                seen.insert(t.clone(), v.len());
                v.push(t);
            }
        }
        let n = v.len();
        Store::build(id.into(), v, vec![1; n])
    }

    fn build(id: String, triples: Vec<Triple>, masks: Vec<SourceMask>) -> Self {
        let mut s = Store { id, triples, masks, ..Default::default() };
        for (i, t) in s.triples.iter().enumerate() {
            let i = i as u32;
            s.by_s.entry(t.subject.clone()).or_default().push(i);
            s.by_p.entry(t.predicate.clone()).or_default().push(i);
            s.by_o.entry(t.object.clone()).or_default().push(i);
        }
        s
    }

    /// Loads an N-Triples or Turtle-subset document. The id comes from a
    /// `# @source` header if present, otherwise from `default_id`.
    pub fn load_dump(text: &str, default_id: &str) -> Result<Self, StoreError> {
        let doc = parse_document(text)?;
        Ok(Store::new(doc.source_id.unwrap_or_else(|| default_id.to_string()), doc.triples))
    }

    pub fn load_file(path: &Path) -> Result<Self, StoreError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StoreError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("source");
        let stem = stem.split('.').next().unwrap_or(stem);
        Store::load_dump(&text, stem).map_err(|e| match e {
            StoreError::Parse { line, message } => StoreError::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            e => e,
        })
    }

    /// Union of several stores; triple masks record membership by position.
    pub fn merge(stores: &[&Store]) -> Store {
        assert!(stores.len() <= 64, "at most 64 sources per federation");
        let mut pos: HashMap<&Triple, usize> = HashMap::new();
        let mut triples = Vec::new();
        let mut masks = Vec::new();
        for (i, s) in stores.iter().enumerate() {
            for t in &s.triples {
                let k = *pos.entry(t).or_insert_with(|| {
                    triples.push(t.clone());
                    masks.push(0);
                    triples.len() - 1
                });
                masks[k] |= 1 << i;
            }
        }
        Store::build("merged".into(), triples, masks)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn mask(&self, i: usize) -> SourceMask {
        self.masks[i]
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.by_s
            .get(&t.subject)
            .is_some_and(|ix| ix.iter().any(|&i| &self.triples[i as usize] == t))
    }

    pub(crate) fn index(&self, position: usize, term: &Term) -> &[u32] {
        let map = match position {
            0 => &self.by_s,
            1 => &self.by_p,
            _ => &self.by_o,
        };
        map.get(term).map_or(&[], Vec::as_slice)
    }

    /// Triples with the given predicate.
    pub fn with_predicate<'a>(&'a self, p: &str) -> impl Iterator<Item = &'a Triple> + 'a {
        self.index(1, &Term::iri(p)).iter().map(move |&i| &self.triples[i as usize])
    }

    /// Distinct geometries that are objects of `geo:asWKT`, in first-seen order.
    pub fn geometries(&self) -> Vec<Arc<PreparedGeometry>> {
        let mut seen = std::collections::HashSet::new();
        self.with_predicate(GEO_AS_WKT)
            .filter_map(|t| t.object.as_literal()?.geometry().cloned())
            .filter(|g| seen.insert(crate::geom::serialize_wkt(g.geometry(), true)))
            .collect()
    }

    pub fn to_ntriples(&self) -> String {
        let mut sorted: Vec<&Triple> = self.triples.iter().collect();
        sorted.sort();
        write_ntriples(sorted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BACKGROUND: &str = "@prefix geo: <http://www.opengis.net/ont/geosparql#> .\n\
        <http://ex.org/r> geo:hasGeometry <http://ex.org/g> .\n\
        <http://ex.org/g> geo:asWKT \"POINT (23.7 38)\"^^geo:wktLiteral .\n";

    #[test]
    fn empty_document() {
        assert_eq!(Store::load_dump("", "e").unwrap().len(), 0);
    }

    #[test]
    fn geometry_pattern() {
        let s = Store::load_dump(BACKGROUND, "bg").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.geometries().len(), 1);
        assert_eq!(s.id(), "bg");
    }

    #[test]
    fn duplicates_collapse_and_merge_tracks_sources() {
        let a = Store::load_dump(&format!("{BACKGROUND}{BACKGROUND}"), "a").unwrap();
        assert_eq!(a.len(), 2);
        let b = Store::load_dump(
            "<http://ex.org/r> <http://www.opengis.net/ont/geosparql#hasGeometry> <http://ex.org/g> .",
            "b",
        )
        .unwrap();
        let m = Store::merge(&[&a, &b]);
        assert_eq!(m.len(), 2);
        let masks: Vec<u64> = (0..m.len()).map(|i| m.mask(i)).collect();
        assert!(masks.contains(&0b11) && masks.contains(&0b01));
    }

    #[test]
    fn ntriples_round_trip() {
        let s = Store::load_dump(BACKGROUND, "bg").unwrap();
        let again = Store::load_dump(&s.to_ntriples(), "bg").unwrap();
        assert_eq!(again.to_ntriples(), s.to_ntriples());
    }
}
