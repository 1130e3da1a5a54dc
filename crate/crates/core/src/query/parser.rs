use std::collections::HashMap;
use std::sync::Arc;

use super::{Comparator, FilterArg, GeoFilter, Projection, Query, QueryError, TriplePattern};
use crate::geom::Relation;
use crate::store::{Literal, Term};
use crate::syntax::{tokenize, Spanned, Tok};
use crate::vocab::{BUILTIN_PREFIXES, GEOF, GEOF_DISTANCE, GEO_WKT_LITERAL, RDF_TYPE, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER};

const UNSUPPORTED_KEYWORDS: [&str; 12] = [
    "OPTIONAL", "UNION", "SERVICE", "MINUS", "GRAPH", "BIND", "VALUES", "ORDER", "GROUP", "LIMIT", "OFFSET",
    "CONSTRUCT",
];

/// Parses a SELECT query in the supported subset.
pub fn parse_query(text: &str) -> Result<Query, QueryError> {
    let toks = tokenize(text).map_err(|e| QueryError::Syntax { line: e.line, message: e.message })?;
    let prefixes = BUILTIN_PREFIXES.iter().map(|(p, n)| (p.to_string(), n.to_string())).collect();
    let mut p = Parser { toks, pos: 0, prefixes };
    let q = p.query()?;
    q.check_filter_vars()?;
    Ok(q)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
}

fn unsupported<T>(what: impl Into<String>) -> Result<T, QueryError> {
    Err(QueryError::UnsupportedFeature(what.into()))
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, QueryError> {
        let line = self.toks.get(self.pos).or_else(|| self.toks.last()).map_or(1, |t| t.line);
        Err(QueryError::Syntax { line, message: message.into() })
    }

    fn next(&mut self) -> Result<Tok, QueryError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => self.err("unexpected end of query"),
        }
    }

    fn keyword(&self) -> Option<String> {
        match self.peek() {
            Some(Tok::Word(w)) => Some(w.to_ascii_uppercase()),
            _ => None,
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), QueryError> {
        match self.peek() {
            Some(Tok::Punct(d)) if *d == c => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => self.err(format!("expected '{c}', found '{t}'")),
            None => self.err(format!("expected '{c}'")),
        }
    }

    fn query(&mut self) -> Result<Query, QueryError> {
        loop {
            match self.keyword().as_deref() {
                Some("PREFIX") => {
                    self.pos += 1;
                    let Tok::PName(prefix, local) = self.next()? else {
                        return self.err("expected prefix name");
                    };
                    if !local.is_empty() {
                        return self.err("prefix name must end with ':'");
                    }
                    let Tok::Iri(ns) = self.next()? else {
                        return self.err("expected namespace IRI");
                    };
                    self.prefixes.insert(prefix, ns);
                }
                Some("BASE") => {
                    self.pos += 1;
                    self.next()?;
                }
                Some("SELECT") => break,
                Some(k @ ("ASK" | "CONSTRUCT" | "DESCRIBE")) => return unsupported(format!("{k} query form")),
                _ => return self.err("expected SELECT"),
            }
        }
        self.pos += 1;
        let mut distinct = false;
        if matches!(self.keyword().as_deref(), Some("DISTINCT") | Some("REDUCED")) {
            distinct = true;
            self.pos += 1;
        }
        let projection = if self.peek() == Some(&Tok::Punct('*')) {
            self.pos += 1;
            Projection::All
        } else {
            let mut vs = Vec::new();
            while let Some(Tok::Var(v)) = self.peek() {
                vs.push(Arc::from(v.as_str()));
                self.pos += 1;
            }
            if vs.is_empty() {
                return self.err("expected '*' or projection variables");
            }
            Projection::Vars(vs)
        };
        if self.keyword().as_deref() == Some("WHERE") {
            self.pos += 1;
        }
        self.expect_punct('{')?;
        let mut bgp = Vec::new();
        let mut filters = Vec::new();
        loop {
            match self.peek() {
                None => return self.err("unterminated group pattern"),
                Some(Tok::Punct('}')) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Punct('.')) => self.pos += 1,
                Some(Tok::Punct('{')) => return unsupported("nested group pattern"),
                Some(Tok::Word(w)) if w.eq_ignore_ascii_case("FILTER") => {
                    self.pos += 1;
                    filters.push(self.filter()?);
                }
                Some(Tok::Word(w)) if UNSUPPORTED_KEYWORDS.contains(&w.to_ascii_uppercase().as_str()) => {
                    return unsupported(w.to_ascii_uppercase());
                }
                _ => self.triples(&mut bgp)?,
            }
        }
        if let Some(k) = self.keyword() {
            if UNSUPPORTED_KEYWORDS.contains(&k.as_str()) {
                return unsupported(k);
            }
        }
        if let Some(t) = self.peek() {
            return self.err(format!("unexpected '{t}' after query body"));
        }
        if bgp.is_empty() {
            return self.err("empty basic graph pattern");
        }
        Ok(Query { projection, distinct, bgp, filters })
    }

    fn iri(&self, t: &Tok) -> Result<Option<String>, QueryError> {
        Ok(match t {
            Tok::Iri(i) => Some(i.clone()),
            Tok::PName(p, l) => match self.prefixes.get(p) {
                Some(ns) => Some(format!("{ns}{l}")),
                None => return self.err(format!("undeclared prefix '{p}:'")),
            },
            _ => None,
        })
    }

    fn term(&mut self, position: &str) -> Result<Term, QueryError> {
        let t = self.next()?;
        if let Some(i) = self.iri(&t)? {
            return Ok(Term::iri(&i));
        }
        match t {
            Tok::Var(v) => Ok(Term::var(&v)),
            Tok::Word(w) if w == "a" && position == "predicate" => Ok(Term::iri(RDF_TYPE)),
            Tok::Blank(_) | Tok::Punct('[') => unsupported("blank nodes in query patterns"),
            Tok::Str(_) | Tok::Integer(_) | Tok::Decimal(_) | Tok::Double(_) if position == "object" => {
                self.pos -= 1;
                self.literal().map(Term::Literal)
            }
            Tok::Word(w) if (w == "true" || w == "false") && position == "object" => {
                Ok(Term::Literal(Literal::typed(&w, crate::vocab::XSD_BOOLEAN)?))
            }
            t => {
                self.pos -= 1;
                self.err(format!("invalid {position} '{t}'"))
            }
        }
    }

    fn literal(&mut self) -> Result<Literal, QueryError> {
        Ok(match self.next()? {
            Tok::Str(s) => match self.peek().cloned() {
                Some(Tok::LangTag(l)) => {
                    self.pos += 1;
                    Literal::lang(&s, &l)
                }
                Some(Tok::Op("^^")) => {
                    self.pos += 1;
                    let t = self.next()?;
                    let Some(dt) = self.iri(&t)? else {
                        return self.err("expected datatype IRI");
                    };
                    Literal::typed(&s, &dt)?
                }
                _ => Literal::plain(&s),
            },
            Tok::Integer(n) => Literal::typed(&n, XSD_INTEGER)?,
            Tok::Decimal(n) => Literal::typed(&n, XSD_DECIMAL)?,
            Tok::Double(n) => Literal::typed(&n, XSD_DOUBLE)?,
            t => {
                self.pos -= 1;
                return self.err(format!("expected literal, found '{t}'"));
            }
        })
    }

    fn triples(&mut self, out: &mut Vec<TriplePattern>) -> Result<(), QueryError> {
        let s = self.term("subject")?;
        loop {
            let p = self.term("predicate")?;
            loop {
                let o = self.term("object")?;
                out.push(TriplePattern::new(s.clone(), p.clone(), o));
                if self.peek() != Some(&Tok::Punct(',')) {
                    break;
                }
                self.pos += 1;
            }
            if self.peek() != Some(&Tok::Punct(';')) {
                return Ok(());
            }
            while self.peek() == Some(&Tok::Punct(';')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(Tok::Punct('.')) | Some(Tok::Punct('}'))) {
                return Ok(());
            }
        }
    }

    fn filter(&mut self) -> Result<GeoFilter, QueryError> {
        let parenthesized = self.peek() == Some(&Tok::Punct('('));
        let f = if parenthesized {
            self.pos += 1;
            let f = self.condition()?;
            self.expect_punct(')')?;
            f
        } else {
            self.condition()?
        };
        Ok(f)
    }

    fn condition(&mut self) -> Result<GeoFilter, QueryError> {
        let f = match self.peek().cloned() {
            Some(Tok::Punct('(')) => {
                self.pos += 1;
                let f = self.condition()?;
                self.expect_punct(')')?;
                f
            }
            Some(Tok::Op("!")) => return unsupported("negated filter"),
            Some(t) => match self.iri(&t)? {
                Some(func) => {
                    self.pos += 1;
                    self.call(&func)?
                }
                None => return unsupported(format!("non-geospatial filter starting with '{t}'")),
            },
            None => return self.err("unterminated filter"),
        };
        match self.peek() {
            Some(Tok::Op(op @ ("&&" | "||"))) => unsupported(format!("'{op}' in filter")),
            _ => Ok(f),
        }
    }

    fn call(&mut self, func: &str) -> Result<GeoFilter, QueryError> {
        if func == GEOF_DISTANCE {
            self.expect_punct('(')?;
            let lhs = self.arg()?;
            self.expect_punct(',')?;
            let rhs = self.arg()?;
            self.expect_punct(',')?;
            let t = self.next()?;
            let Some(unit) = self.iri(&t)? else {
                return self.err("expected unit IRI");
            };
            self.expect_punct(')')?;
            let op = match self.next()? {
                Tok::Op("<") => Comparator::Lt,
                Tok::Op("<=") => Comparator::Le,
                Tok::Op("=") => Comparator::Eq,
                Tok::Op(op @ (">" | ">=" | "!=")) => return unsupported(format!("distance comparator '{op}'")),
                _ => return self.err("expected comparator after geof:distance"),
            };
            let threshold = match self.next()? {
                Tok::Integer(n) | Tok::Decimal(n) | Tok::Double(n) => n.parse::<f64>().unwrap_or(f64::NAN),
                _ => return self.err("expected numeric threshold"),
            };
            if !threshold.is_finite() || threshold < 0.0 {
                return self.err("distance threshold must be a non-negative number");
            }
            return Ok(GeoFilter::Distance { lhs, rhs, unit: unit.into(), op, threshold });
        }
        let Some(name) = func.strip_prefix(GEOF) else {
            return unsupported(format!("function <{func}>"));
        };
        let relation: Relation = match name.parse() {
            Ok(r) => r,
            Err(_) => return unsupported(format!("function <{func}>")),
        };
        if relation == Relation::Disjoint {
            return unsupported("geof:sfDisjoint in filter");
        }
        self.expect_punct('(')?;
        let lhs = self.arg()?;
        self.expect_punct(',')?;
        let rhs = self.arg()?;
        self.expect_punct(')')?;
        Ok(GeoFilter::Relation { relation, lhs, rhs })
    }

    fn arg(&mut self) -> Result<FilterArg, QueryError> {
        if let Some(Tok::Var(v)) = self.peek() {
            let v = Arc::from(v.as_str());
            self.pos += 1;
            return Ok(FilterArg::Var(v));
        }
        let lit = self.literal()?;
        if lit.datatype() != Some(GEO_WKT_LITERAL) {
            return unsupported(format!("non-WKT filter argument {lit}"));
        }
        Ok(FilterArg::Wkt(lit))
    }
}
