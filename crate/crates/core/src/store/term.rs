use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::geom::parse_wkt;
use crate::syntax::escape_literal;
use crate::vocab::{GEO_WKT_LITERAL, XSD_STRING};
use crate::{GeomError, PreparedGeometry};

/// An RDF literal. WKT literals carry their parsed geometry.
#[derive(Clone)]
pub struct Literal {
    lexical: Arc<str>,
    datatype: Option<Arc<str>>,
    lang: Option<Arc<str>>,
    geometry: Option<Arc<PreparedGeometry>>,
}

impl Literal {
    pub fn plain(lexical: &str) -> Self {
        Literal { lexical: lexical.into(), datatype: None, lang: None, geometry: None }
    }

    pub fn lang(lexical: &str, lang: &str) -> Self {
        Literal { lang: Some(lang.to_ascii_lowercase().into()), ..Literal::plain(lexical) }
    }

    /// A typed literal; `geo:wktLiteral` values are parsed and must be valid.
    pub fn typed(lexical: &str, datatype: &str) -> Result<Self, GeomError> {
        if datatype == XSD_STRING {
            return Ok(Literal::plain(lexical));
        }
        let geometry = if datatype == GEO_WKT_LITERAL {
            Some(Arc::new(PreparedGeometry::new(parse_wkt(lexical)?)))
        } else {
            None
        };
        Ok(Literal {
            lexical: lexical.into(),
            datatype: Some(datatype.into()),
            lang: None,
            geometry,
        })
    }

    pub fn wkt(g: &crate::Geometry) -> Self {
        let lexical = crate::geom::serialize_wkt(g, g.crs() != crate::geom::DEFAULT_CRS);
        Literal {
            lexical: lexical.into(),
            datatype: Some(GEO_WKT_LITERAL.into()),
            lang: None,
            geometry: Some(Arc::new(PreparedGeometry::new(g.clone()))),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> Option<&str> {
        self.datatype.as_deref()
    }

    pub fn language(&self) -> Option<&str> {
        self.lang.as_deref()
    }

    pub fn geometry(&self) -> Option<&Arc<PreparedGeometry>> {
        self.geometry.as_ref()
    }

    fn key(&self) -> (&str, Option<&str>, Option<&str>) {
        (&self.lexical, self.datatype.as_deref(), self.lang.as_deref())
    }
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Literal {}

impl Hash for Literal {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for Literal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Literal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{}\"", escape_literal(&self.lexical))?;
        if let Some(l) = &self.lang {
            write!(f, "@{l}")
        } else if let Some(d) = &self.datatype {
            write!(f, "^^<{d}>")
        } else {
            Ok(())
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Iri(Arc<str>),
    Blank(Arc<str>),
    Literal(Literal),
    Variable(Arc<str>),
}

impl Term {
    pub fn iri(s: &str) -> Self {
        Term::Iri(s.into())
    }

    pub fn var(s: &str) -> Self {
        Term::Variable(s.into())
    }

    pub fn blank(s: &str) -> Self {
        Term::Blank(s.into())
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Variable(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(l) => Some(l),
            _ => None,
        }
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Variable(_))
    }

    pub fn is_iri(&self, iri: &str) -> bool {
        self.as_iri() == Some(iri)
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => write!(f, "<{s}>"),
            Term::Blank(s) => write!(f, "_:{s}"),
            Term::Literal(l) => write!(f, "{l}"),
            Term::Variable(s) => write!(f, "?{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl Triple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Triple { subject, predicate, object }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}
