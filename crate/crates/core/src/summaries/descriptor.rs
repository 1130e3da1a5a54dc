use std::collections::BTreeSet;
use std::fmt::Write;

use super::{BoundingSummary, DatasetDescriptor, Flavor, SummaryError, ThematicStats};
use crate::geom::serialize_wkt;
use crate::store::{header_value, parse_document, Term};
use crate::syntax::escape_literal;
use crate::vocab::{
    GEO, GSS, GSS_CLASS, GSS_OBJECT_PREFIX, GSS_PREDICATE, GSS_SUBJECT_PREFIX, RDF, RDF_TYPE, SVD,
    SVD_BOUNDING_WKT, VOID, VOID_DATASET, VOID_SPARQL_ENDPOINT,
};

/// Writes a descriptor as Turtle. Source id and flavor go in header comments.
pub fn emit_descriptor(d: &DatasetDescriptor) -> String {
    let mut out = String::new();
    writeln!(out, "# @source {}", d.source_id).unwrap();
    if let Some(b) = &d.bounding {
        writeln!(out, "# @flavor {}", b.flavor).unwrap();
    }
    for (p, ns) in [("rdf", RDF), ("void", VOID), ("svd", SVD), ("geo", GEO), ("gss", GSS)] {
        writeln!(out, "@prefix {p}: <{ns}> .").unwrap();
    }
    out.push('\n');
    let mut props = vec![
        "rdf:type void:Dataset".to_string(),
        format!("void:sparqlEndpoint <{}>", d.endpoint),
    ];
    if let Some(b) = &d.bounding {
        let wkt = serialize_wkt(&b.shape, true);
        props.push(format!("svd:boundingWKT \"{}\"^^geo:wktLiteral", escape_literal(&wkt)));
    }
    let iris = |set: &BTreeSet<String>| set.iter().map(|s| format!("<{s}>")).collect::<Vec<_>>();
    let strs = |set: &BTreeSet<String>| set.iter().map(|s| format!("\"{}\"", escape_literal(s))).collect::<Vec<_>>();
    for (name, values) in [
        ("gss:predicate", iris(&d.stats.predicates)),
        ("gss:class", iris(&d.stats.classes)),
        ("gss:subjectPrefix", strs(&d.stats.subject_prefixes)),
        ("gss:objectPrefix", strs(&d.stats.object_prefixes)),
    ] {
        if !values.is_empty() {
            props.push(format!("{name} {}", values.join(" ,\n      ")));
        }
    }
    writeln!(out, "[] {} .", props.join(" ;\n   ")).unwrap();
    out
}

/// Reads a descriptor. A document without `svd:boundingWKT` describes a
/// thematic-only source.
pub fn parse_descriptor(text: &str) -> Result<DatasetDescriptor, SummaryError> {
    let doc = parse_document(text)?;
    let subject = doc
        .triples
        .iter()
        .find(|t| t.predicate.is_iri(RDF_TYPE) && t.object.is_iri(VOID_DATASET))
        .map(|t| t.subject.clone())
        .ok_or(SummaryError::MissingProperty("rdf:type void:Dataset"))?;
    let props = || doc.triples.iter().filter(|t| t.subject == subject);
    let values = |p: &str| -> BTreeSet<String> {
        props()
            .filter(|t| t.predicate.is_iri(p))
            .filter_map(|t| match &t.object {
                Term::Iri(i) => Some(i.to_string()),
                Term::Literal(l) => Some(l.lexical().to_string()),
                _ => None,
            })
            .collect()
    };
    let endpoint = values(VOID_SPARQL_ENDPOINT)
        .into_iter()
        .next()
        .ok_or(SummaryError::MissingProperty("void:sparqlEndpoint"))?;
    let flavor = match header_value(text, "flavor") {
        Some(f) => f.parse()?,
        None => Flavor::Explicit,
    };
    let bounding = props()
        .find(|t| t.predicate.is_iri(SVD_BOUNDING_WKT))
        .map(|t| {
            let geometry = t
                .object
                .as_literal()
                .and_then(|l| l.geometry())
                .ok_or(SummaryError::MissingProperty("a WKT literal for svd:boundingWKT"))?;
            BoundingSummary::new(geometry.geometry().clone(), flavor)
        })
        .transpose()?;
    Ok(DatasetDescriptor {
        source_id: header_value(text, "source").unwrap_or_default(),
        endpoint,
        bounding,
        stats: ThematicStats {
            predicates: values(GSS_PREDICATE),
            classes: values(GSS_CLASS),
            subject_prefixes: values(GSS_SUBJECT_PREFIX),
            object_prefixes: values(GSS_OBJECT_PREFIX),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::summaries::{describe, extract_quadtree_summary};
    use crate::summaries::tests::store_of;

    const EXAMPLE_1: &str = "@prefix rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> .\n\
        @prefix void: <http://rdfs.org/ns/void#> .\n\
        @prefix svd: <http://www.w3.org/2015/03/sevod#> .\n\
        @prefix geo: <http://www.opengis.net/ont/geosparql#> .\n\
        [] rdf:type          void:Dataset ;\n   void:sparqlEndpoint <http://example.org/sparql> ;\n   \
        svd:boundingWKT    \"<http://www.opengis.net/def/crs/EPSG/0/4326>\n   \
        POLYGON ((9.53155824986118 46.4017516462893, 9.53155824986118 49.0185728029906,\n   \
        17.1618132052086 49.0185728029906, 17.1618132052086 46.4017516462893,\n   \
        9.53155824986118 46.4017516462893))\"^^geo:wktLiteral .\n";

    #[test]
    fn example_one_document() {
        let d = parse_descriptor(EXAMPLE_1).unwrap();
        assert_eq!(d.endpoint, "http://example.org/sparql");
        let b = d.bounding.as_ref().unwrap();
        assert_eq!(b.coordinate_count(), 4);
        assert_eq!(b.shape.coords().count(), 5);
        let again = parse_descriptor(&emit_descriptor(&d)).unwrap();
        assert_eq!(again, d);
    }

    #[test]
    fn three_property_shape() {
        let d = parse_descriptor(EXAMPLE_1).unwrap();
        let text = emit_descriptor(&d);
        let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('#') && !l.starts_with('@') && !l.is_empty()).collect();
        assert_eq!(body.len(), 3);
        assert!(body[0].starts_with("[] rdf:type void:Dataset"));
        assert!(body[1].contains("void:sparqlEndpoint <http://example.org/sparql>"));
        assert!(body[2].contains("svd:boundingWKT \"<http://www.opengis.net/def/crs/EPSG/0/4326> POLYGON (("));
    }

    #[test]
    fn emitted_round_trip_is_bit_exact() {
        let s = store_of(&["POLYGON ((0.1 0.2, 1.3 0.2, 1.3 1.7, 0.1 0.2))", "POINT (2.25 -1.5)"]);
        let d = describe(&s, "http://ex.org/sparql", Some(extract_quadtree_summary(&s, 2).unwrap()));
        let text = emit_descriptor(&d);
        let back = parse_descriptor(&text).unwrap();
        assert_eq!(back, d);
        assert_eq!(emit_descriptor(&back), text);
    }

    #[test]
    fn thematic_only() {
        let s = store_of(&["POINT (0 0)"]);
        let d = describe(&s, "http://ex.org/sparql", None);
        let back = parse_descriptor(&emit_descriptor(&d)).unwrap();
        assert!(back.bounding.is_none());
        assert_eq!(back.stats, d.stats);
    }
}
