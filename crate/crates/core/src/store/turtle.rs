//! Reader and writer for N-Triples and a Turtle subset.

use std::collections::HashMap;

use super::{Literal, StoreError, Term, Triple};
use crate::syntax::{tokenize, Spanned, Tok};
use crate::vocab::{RDF_TYPE, XSD_BOOLEAN, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER};

/// Parsed document: the optional `# @source <id>` header and the triples.
pub struct Document {
    pub source_id: Option<String>,
    pub triples: Vec<Triple>,
}

pub fn parse_document(text: &str) -> Result<Document, StoreError> {
    let source_id = header_value(text, "source");
    let toks = tokenize(text).map_err(|e| StoreError::Parse { line: e.line, message: e.message })?;
    let mut p = Parser { toks, pos: 0, prefixes: HashMap::new(), fresh: 0, out: Vec::new() };
    p.document()?;
    Ok(Document { source_id, triples: p.out })
}

/// Value of a `# @key value` line in the leading comment block.
pub fn header_value(text: &str, key: &str) -> Option<String> {
    let tag = format!("# @{key}");
    text.lines()
        .map(str::trim)
        .take_while(|l| l.is_empty() || l.starts_with('#'))
        .find_map(|l| {
            let rest = l.strip_prefix(&tag)?;
            rest.starts_with(char::is_whitespace).then(|| rest.trim().trim_matches(['<', '>']).to_string())
        })
        .filter(|s| !s.is_empty())
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    prefixes: HashMap<String, String>,
    fresh: usize,
    out: Vec<Triple>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |t| t.line)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, StoreError> {
        Err(StoreError::Parse { line: self.line(), message: message.into() })
    }

    fn next(&mut self) -> Result<Tok, StoreError> {
        match self.toks.get(self.pos) {
            Some(t) => {
                self.pos += 1;
                Ok(t.tok.clone())
            }
            None => self.err("unexpected end of input"),
        }
    }

    fn expect_punct(&mut self, c: char) -> Result<(), StoreError> {
        match self.next()? {
            Tok::Punct(d) if d == c => Ok(()),
            t => {
                self.pos -= 1;
                self.err(format!("expected '{c}', found '{t}'"))
            }
        }
    }

    fn document(&mut self) -> Result<(), StoreError> {
        while let Some(t) = self.peek().cloned() {
            match t {
                Tok::Word(w) if w == "@prefix" || w.eq_ignore_ascii_case("prefix") => {
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
                    if w == "@prefix" {
                        self.expect_punct('.')?;
                    }
                }
                Tok::Word(w) if w == "@base" || w.eq_ignore_ascii_case("base") => {
                    self.pos += 1;
                    let Tok::Iri(_) = self.next()? else {
                        return self.err("expected base IRI");
                    };
                    if w == "@base" {
                        self.expect_punct('.')?;
                    }
                }
                _ => {
                    self.triples()?;
                    self.expect_punct('.')?;
                }
            }
        }
        Ok(())
    }

    fn triples(&mut self) -> Result<(), StoreError> {
        if self.peek() == Some(&Tok::Punct('[')) {
            let s = self.blank_property_list()?;
            if self.peek() != Some(&Tok::Punct('.')) {
                self.predicate_objects(&s)?;
            }
            return Ok(());
        }
        let s = match self.next()? {
            Tok::Iri(i) => Term::iri(&i),
            Tok::PName(p, l) => self.expand(&p, &l)?,
            Tok::Blank(b) => Term::blank(&b),
            t => {
                self.pos -= 1;
                return self.err(format!("invalid subject '{t}'"));
            }
        };
        self.predicate_objects(&s)
    }

    fn predicate_objects(&mut self, s: &Term) -> Result<(), StoreError> {
        loop {
            let p = match self.next()? {
                Tok::Word(w) if w == "a" => Term::iri(RDF_TYPE),
                Tok::Iri(i) => Term::iri(&i),
                Tok::PName(p, l) => self.expand(&p, &l)?,
                t => {
                    self.pos -= 1;
                    return self.err(format!("invalid predicate '{t}'"));
                }
            };
            loop {
                let o = self.object()?;
                self.out.push(Triple::new(s.clone(), p.clone(), o));
                if self.peek() == Some(&Tok::Punct(',')) {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if self.peek() != Some(&Tok::Punct(';')) {
                return Ok(());
            }
            while self.peek() == Some(&Tok::Punct(';')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(Tok::Punct('.')) | Some(Tok::Punct(']')) | None) {
                return Ok(());
            }
        }
    }

    fn blank_property_list(&mut self) -> Result<Term, StoreError> {
        self.expect_punct('[')?;
        self.fresh += 1;
        let b = Term::blank(&format!("anon{}", self.fresh));
        if self.peek() != Some(&Tok::Punct(']')) {
            self.predicate_objects(&b)?;
        }
        self.expect_punct(']')?;
        Ok(b)
    }

    fn object(&mut self) -> Result<Term, StoreError> {
        let line = self.line();
        let t = self.next()?;
        Ok(match t {
            Tok::Iri(i) => Term::iri(&i),
            Tok::PName(p, l) => self.expand(&p, &l)?,
            Tok::Blank(b) => Term::blank(&b),
            Tok::Punct('[') => {
                self.pos -= 1;
                self.blank_property_list()?
            }
            Tok::Str(s) => match self.peek() {
                Some(Tok::LangTag(l)) => {
                    let l = l.clone();
                    self.pos += 1;
                    Term::Literal(Literal::lang(&s, &l))
                }
                Some(Tok::Op("^^")) => {
                    self.pos += 1;
                    let dt = match self.next()? {
                        Tok::Iri(i) => i,
                        Tok::PName(p, l) => self.expand(&p, &l)?.as_iri().unwrap().to_string(),
                        _ => return self.err("expected datatype IRI"),
                    };
                    Term::Literal(
                        Literal::typed(&s, &dt).map_err(|source| StoreError::InvalidWkt { line, source })?,
                    )
                }
                _ => Term::Literal(Literal::plain(&s)),
            },
            Tok::Integer(n) => typed(&n, XSD_INTEGER),
            Tok::Decimal(n) => typed(&n, XSD_DECIMAL),
            Tok::Double(n) => typed(&n, XSD_DOUBLE),
            Tok::Word(w) if w == "true" || w == "false" => typed(&w, XSD_BOOLEAN),
            t => {
                self.pos -= 1;
                return self.err(format!("invalid object '{t}'"));
            }
        })
    }

    fn expand(&self, prefix: &str, local: &str) -> Result<Term, StoreError> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(Term::iri(&format!("{ns}{local}"))),
            None => self.err(format!("undeclared prefix '{prefix}:'")),
        }
    }
}

fn typed(lexical: &str, dt: &str) -> Term {
    Term::Literal(Literal::typed(lexical, dt).expect("non-geometry datatype"))
}

/// Writes triples as N-Triples, one per line, in the given order.
pub fn write_ntriples<'a>(triples: impl IntoIterator<Item = &'a Triple>) -> String {
    let mut s = String::new();
    for t in triples {
        s.push_str(&t.to_string());
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn turtle_abbreviations() {
        let d = parse_document(
            "# @source s9\n@prefix ex: <http://ex.org/> .\nPREFIX geo: <http://www.opengis.net/ont/geosparql#>\n\
             ex:a a ex:C , ex:D ; ex:n 3 ; ex:l \"x\"@EN ;\n  ex:b [ ex:c true ] .\n",
        )
        .unwrap();
        assert_eq!(d.source_id.as_deref(), Some("s9"));
        assert_eq!(d.triples.len(), 6);
        assert_eq!(d.triples[3].object, Term::Literal(Literal::lang("x", "en")));
    }

    #[test]
    fn ntriples_line() {
        let t = "<http://a> <http://b> \"1\"^^<http://www.w3.org/2001/XMLSchema#integer> .";
        let d = parse_document(t).unwrap();
        assert_eq!(write_ntriples(&d.triples).trim(), t);
    }

    #[test]
    fn errors_carry_lines() {
        match parse_document("<http://a> <http://b> <http://c> .\n\n<http://a> <http://b> .") {
            Err(StoreError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{:?}", other.err()),
        }
        let bad = "<http://a> <http://b>\n \"POINT (1)\"^^<http://www.opengis.net/ont/geosparql#wktLiteral> .";
        assert!(matches!(parse_document(bad), Err(StoreError::InvalidWkt { line: 2, .. })));
    }

    #[test]
    fn undeclared_prefix() {
        assert!(parse_document("ex:a ex:b ex:c .").is_err());
    }
}
