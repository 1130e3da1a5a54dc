//! Namespace IRIs and the handful of terms the toolkit refers to by name.

pub const RDF: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const GEO: &str = "http://www.opengis.net/ont/geosparql#";
pub const GEOF: &str = "http://www.opengis.net/def/function/geosparql/";
pub const UOM: &str = "http://www.opengis.net/def/uom/OGC/1.0/";
pub const VOID: &str = "http://rdfs.org/ns/void#";
pub const SVD: &str = "http://www.w3.org/2015/03/sevod#";
pub const XSD: &str = "http://www.w3.org/2001/XMLSchema#";

/// Prefixes every query may use without declaring them.
pub const BUILTIN_PREFIXES: [(&str, &str); 7] = [
    ("rdf", RDF),
    ("rdfs", RDFS),
    ("geo", GEO),
    ("geof", GEOF),
    ("uom", UOM),
    ("void", VOID),
    ("svd", SVD),
];

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
pub const GEO_HAS_GEOMETRY: &str = "http://www.opengis.net/ont/geosparql#hasGeometry";
pub const GEO_AS_WKT: &str = "http://www.opengis.net/ont/geosparql#asWKT";
pub const GEO_WKT_LITERAL: &str = "http://www.opengis.net/ont/geosparql#wktLiteral";
pub const GEOF_DISTANCE: &str = "http://www.opengis.net/def/function/geosparql/distance";
pub const VOID_DATASET: &str = "http://rdfs.org/ns/void#Dataset";
pub const VOID_SPARQL_ENDPOINT: &str = "http://rdfs.org/ns/void#sparqlEndpoint";
pub const SVD_BOUNDING_WKT: &str = "http://www.w3.org/2015/03/sevod#boundingWKT";

pub const XSD_STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
pub const XSD_INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
pub const XSD_DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
pub const XSD_DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
pub const XSD_BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";

/// Descriptor predicates for thematic statistics.
pub const GSS: &str = "http://geosel.example.org/ns/stats#";
pub const GSS_PREDICATE: &str = "http://geosel.example.org/ns/stats#predicate";
pub const GSS_CLASS: &str = "http://geosel.example.org/ns/stats#class";
pub const GSS_SUBJECT_PREFIX: &str = "http://geosel.example.org/ns/stats#subjectPrefix";
pub const GSS_OBJECT_PREFIX: &str = "http://geosel.example.org/ns/stats#objectPrefix";
pub const GSS_SOURCE_ID: &str = "http://geosel.example.org/ns/stats#sourceId";
pub const GSS_FLAVOR: &str = "http://geosel.example.org/ns/stats#flavor";
pub const GSS_COORDINATES: &str = "http://geosel.example.org/ns/stats#coordinates";
