//! AST for the supported GeoSPARQL subset.

mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geom::Relation;
use crate::store::{Literal, Term};
use crate::vocab::{GEOF, GEOF_DISTANCE, GEO_AS_WKT};
use crate::GeomError;

pub use parser::parse_query;

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),
    #[error("invalid WKT literal: {0}")]
    InvalidWkt(#[from] GeomError),
    #[error("filter variable ?{0} does not occur in any triple pattern")]
    UnboundFilterVariable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        TriplePattern { subject, predicate, object }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms().into_iter().filter_map(Term::as_var)
    }

    /// The object variable of an `(x, geo:asWKT, ?o)` pattern.
    pub fn wkt_var(&self) -> Option<&str> {
        if self.predicate.is_iri(GEO_AS_WKT) {
            self.object.as_var()
        } else {
            None
        }
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FilterArg {
    Var(Arc<str>),
    Wkt(Literal),
}

impl fmt::Display for FilterArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterArg::Var(v) => write!(f, "?{v}"),
            FilterArg::Wkt(l) => write!(f, "{l}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
}

impl Comparator {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Comparator::Lt => lhs < rhs,
            Comparator::Le => lhs <= rhs,
            Comparator::Eq => lhs == rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeoFilter {
    Relation {
        relation: Relation,
        lhs: FilterArg,
        rhs: FilterArg,
    },
    Distance {
        lhs: FilterArg,
        rhs: FilterArg,
        unit: Arc<str>,
        op: Comparator,
        threshold: f64,
    },
}

impl GeoFilter {
    pub fn args(&self) -> (&FilterArg, &FilterArg) {
        match self {
            GeoFilter::Relation { lhs, rhs, .. } | GeoFilter::Distance { lhs, rhs, .. } => (lhs, rhs),
        }
    }

    /// Free variables of the filter.
    pub fn vars(&self) -> BTreeSet<&str> {
        let (a, b) = self.args();
        [a, b]
            .into_iter()
            .filter_map(|x| match x {
                FilterArg::Var(v) => Some(&**v),
                FilterArg::Wkt(_) => None,
            })
            .collect()
    }
}

impl fmt::Display for GeoFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeoFilter::Relation { relation, lhs, rhs } => {
                write!(f, "FILTER(<{GEOF}{}>({lhs}, {rhs}))", relation.function_name())
            }
            GeoFilter::Distance { lhs, rhs, unit, op, threshold } => write!(
                f,
                "FILTER(<{GEOF_DISTANCE}>({lhs}, {rhs}, <{unit}>) {} {threshold:?})",
                op.symbol()
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Projection {
    All,
    Vars(Vec<Arc<str>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub projection: Projection,
    pub distinct: bool,
    pub bgp: Vec<TriplePattern>,
    pub filters: Vec<GeoFilter>,
}

impl Query {
    /// All variables of the basic graph pattern, sorted.
    pub fn bgp_vars(&self) -> BTreeSet<&str> {
        self.bgp.iter().flat_map(|t| t.vars()).collect()
    }

    /// Variables in the result rows.
    pub fn projected_vars(&self) -> Vec<Arc<str>> {
        match &self.projection {
            Projection::All => self.bgp_vars().into_iter().map(Arc::from).collect(),
            Projection::Vars(v) => v.clone(),
        }
    }

    pub(crate) fn check_filter_vars(&self) -> Result<(), QueryError> {
        let bound = self.bgp_vars();
        for f in &self.filters {
            if let Some(v) = f.vars().into_iter().find(|v| !bound.contains(v)) {
                return Err(QueryError::UnboundFilterVariable(v.to_string()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SELECT ")?;
        if self.distinct {
            f.write_str("DISTINCT ")?;
        }
        match &self.projection {
            Projection::All => f.write_str("*")?,
            Projection::Vars(vs) => {
                let names: Vec<String> = vs.iter().map(|v| format!("?{v}")).collect();
                f.write_str(&names.join(" "))?;
            }
        }
        f.write_str(" WHERE {\n")?;
        for t in &self.bgp {
            writeln!(f, "  {t} .")?;
        }
        for flt in &self.filters {
            writeln!(f, "  {flt}")?;
        }
        f.write_str("}\n")
    }
}

pub fn geospatial_filters(q: &Query) -> &[GeoFilter] {
    &q.filters
}

pub fn vars(f: &GeoFilter) -> BTreeSet<&str> {
    f.vars()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FilterCounts {
    pub selections: usize,
    pub joins: usize,
}

pub fn classify_filters(q: &Query) -> FilterCounts {
    let mut c = FilterCounts::default();
    for f in &q.filters {
        match f.vars().len() {
            1 => c.selections += 1,
            2 => c.joins += 1,
            _ => {}
        }
    }
    c
}
