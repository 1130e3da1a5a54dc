use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};

use serde::Deserialize;

use super::FederationError;
use crate::geom::{clip_to_convex, is_convex, parse_wkt, Loc};
use crate::store::{Literal, Store, Term, Triple};
use crate::vocab::{GEO_AS_WKT, GEO_HAS_GEOMETRY};
use crate::{Geometry, Polygon, Shape};

/// A named convex region receiving one partition.
#[derive(Debug, Clone)]
pub struct Boundary {
    pub name: String,
    pub polygon: Polygon,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundarySpec {
    name: String,
    wkt: String,
}

impl Boundary {
    pub fn new(name: impl Into<String>, g: &Geometry) -> Result<Self, FederationError> {
        let name = name.into();
        match g.shape() {
            Shape::Polygon(p) if is_convex(p) => Ok(Boundary { name, polygon: p.clone() }),
            _ => Err(FederationError::NonConvexBoundary(name)),
        }
    }

    /// Reads `[{"name": ..., "wkt": ...}, ...]`.
    pub fn from_json(text: &str) -> Result<Vec<Boundary>, FederationError> {
        let specs: Vec<BoundarySpec> = serde_json::from_str(text)
            .map_err(|e| FederationError::Config { path: "boundaries".into(), message: e.to_string() })?;
        specs.iter().map(|s| Boundary::new(&s.name, &parse_wkt(&s.wkt)?)).collect()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PartitionOptions {
    /// Reject shapes with a vertex outside every boundary.
    pub strict: bool,
}

/// The IRI prefix of one partition. `{name}` in the template is replaced by
/// the boundary name; a template without it gets the name appended.
fn instantiate(template: &str, name: &str) -> String {
    if template.contains("{name}") {
        template.replace("{name}", name)
    } else {
        format!("{template}{name}/")
    }
}

fn local_name(iri: &str) -> &str {
    iri.rfind(['/', '#']).map_or(iri, |k| &iri[k + 1..])
}

/// Splits a dataset along convex boundaries.
///
/// A feature goes to every boundary its geometry meets (touching counts),
/// with each geometry replaced by its clip; a clip in several pieces gets
/// extra geometry nodes. Resources reachable from a copied feature travel
/// with it. IRIs of described resources are rewritten under the partition
/// prefix. Partitions come back in boundary order, empty ones included.
pub fn partition_dataset(
    s: &Store,
    boundaries: &[Boundary],
    prefix_template: &str,
    options: PartitionOptions,
) -> Result<Vec<Store>, FederationError> {
    let mut by_subject: HashMap<&Term, Vec<&Triple>> = HashMap::new();
    for t in s.triples() {
        by_subject.entry(&t.subject).or_default().push(t);
    }
    let mut features: Vec<&Term> = Vec::new();
    let mut geoms_of: HashMap<&Term, Vec<&Term>> = HashMap::new();
    for t in s.with_predicate(GEO_HAS_GEOMETRY) {
        if !geoms_of.contains_key(&t.subject) {
            features.push(&t.subject);
        }
        geoms_of.entry(&t.subject).or_default().push(&t.object);
    }
    let geometry_nodes: HashSet<&Term> = geoms_of.values().flatten().copied().collect();
    let shapes = |g: &Term| -> Vec<Geometry> {
        by_subject
            .get(g)
            .into_iter()
            .flatten()
            .filter(|t| t.predicate.is_iri(GEO_AS_WKT))
            .filter_map(|t| Some(t.object.as_literal()?.geometry()?.geometry().clone()))
            .collect()
    };

    if options.strict {
        for g in &geometry_nodes {
            for shape in shapes(g) {
                let covered = shape
                    .coords()
                    .all(|c| boundaries.iter().any(|b| crate::geom::locate_in_polygon(&b.polygon, c) != Loc::Exterior));
                if !covered {
                    return Err(FederationError::UncoveredShape(g.to_string()));
                }
            }
        }
    }

    let mut out = Vec::new();
    for b in boundaries {
        let prefix = instantiate(prefix_template, &b.name);
        let mut renamer = Renamer { prefix, map: HashMap::new(), used: HashSet::new() };
        let mut emitted: Vec<Triple> = Vec::new();
        let mut pending: VecDeque<&Term> = VecDeque::new();
        for r in &features {
            let mut kept_any = false;
            for g in &geoms_of[r] {
                let pieces: Vec<Geometry> = shapes(g).iter().flat_map(|sh| clip_to_convex(sh, &b.polygon)).collect();
                if pieces.is_empty() {
                    continue;
                }
                kept_any = true;
                let r2 = renamer.term(r);
                for (k, piece) in pieces.iter().enumerate() {
                    let g2 = match k {
                        0 => renamer.term(g),
                        _ => renamer.extra(g, k),
                    };
                    emitted.push(Triple::new(r2.clone(), Term::iri(GEO_HAS_GEOMETRY), g2.clone()));
                    emitted.push(Triple::new(g2.clone(), Term::iri(GEO_AS_WKT), Term::Literal(Literal::wkt(piece))));
                    if k == 0 {
                        for t in by_subject[g].iter().filter(|t| !t.predicate.is_iri(GEO_AS_WKT)) {
                            emitted.push(Triple::new(g2.clone(), t.predicate.clone(), t.object.clone()));
                            pending.push_back(&t.object);
                        }
                    }
                }
            }
            if !kept_any {
                continue;
            }
            for t in &by_subject[r] {
                if t.predicate.is_iri(GEO_HAS_GEOMETRY) {
                    continue;
                }
                emitted.push((*t).clone());
                pending.push_back(&t.object);
            }
        }
        // Non-feature resources referenced by copied triples come along.
        let mut visited: BTreeSet<&Term> = BTreeSet::new();
        while let Some(o) = pending.pop_front() {
            if geometry_nodes.contains(o) || geoms_of.contains_key(o) || !visited.insert(o) {
                continue;
            }
            for t in by_subject.get(o).into_iter().flatten() {
                emitted.push((*t).clone());
                pending.push_back(&t.object);
            }
        }
        let triples: Vec<Triple> = emitted
            .into_iter()
            .map(|t| {
                let subject = renamer.rewrite(&t.subject, &by_subject);
                let object = renamer.rewrite(&t.object, &by_subject);
                Triple::new(subject, t.predicate, object)
            })
            .collect();
        out.push(Store::new(b.name.clone(), triples));
    }
    Ok(out)
}

struct Renamer {
    prefix: String,
    map: HashMap<String, String>,
    used: HashSet<String>,
}

impl Renamer {
    fn fresh(&mut self, local: &str) -> String {
        let mut candidate = format!("{}{local}", self.prefix);
        let mut n = 1;
        while self.used.contains(&candidate) {
            n += 1;
            candidate = format!("{}{local}_{n}", self.prefix);
        }
        self.used.insert(candidate.clone());
        candidate
    }

    fn iri(&mut self, iri: &str) -> String {
        if let Some(x) = self.map.get(iri) {
            return x.clone();
        }
        let x = self.fresh(local_name(iri));
        self.map.insert(iri.to_string(), x.clone());
        x
    }

    /// Renamed form of a described resource (IRIs only; blank nodes stay).
    fn term(&mut self, t: &Term) -> Term {
        match t.as_iri() {
            Some(i) => Term::iri(&self.iri(i)),
            None => t.clone(),
        }
    }

    /// Extra geometry node for piece `k` of a split geometry.
    fn extra(&mut self, g: &Term, k: usize) -> Term {
        let base = match g.as_iri() {
            Some(i) => local_name(i).to_string(),
            None => format!("b{}", g.to_string().trim_start_matches("_:")),
        };
        Term::iri(&self.fresh(&format!("{base}_p{k}")))
    }

    /// Terms already renamed stay renamed; other IRIs are renamed only if the
    /// dataset describes them.
    fn rewrite(&mut self, t: &Term, described: &HashMap<&Term, Vec<&Triple>>) -> Term {
        match t.as_iri() {
            Some(i) if self.used.contains(i) => t.clone(),
            Some(i) if described.contains_key(t) => Term::iri(&self.iri(i)),
            _ => t.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rectangle;

    fn dataset(wkts: &[&str]) -> Store {
        let mut doc = String::from(
            "@prefix geo: <http://www.opengis.net/ont/geosparql#> .\n@prefix ex: <http://ex.org/> .\n",
        );
        for (i, w) in wkts.iter().enumerate() {
            doc.push_str(&format!(
                "ex:f{i} a ex:Thing ; ex:note ex:n{i} ; geo:hasGeometry ex:g{i} .\nex:g{i} geo:asWKT \"{w}\"^^geo:wktLiteral .\nex:n{i} ex:text \"note {i}\" .\n"
            ));
        }
        Store::load_dump(&doc, "d").unwrap()
    }

    fn cell(name: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Boundary {
        let r = Rectangle::new(crate::Coordinate::new(x0, y0), crate::Coordinate::new(x1, y1));
        Boundary::new(name, &Geometry::rectangle(r).unwrap()).unwrap()
    }

    fn area(s: &Store) -> f64 {
        s.geometries().iter().flat_map(|g| g.geometry().polygons().iter().map(|p| p.area()).collect::<Vec<_>>()).sum()
    }

    #[test]
    fn straddling_square_keeps_its_area() {
        let s = dataset(&["POLYGON ((0.5 0.2, 1.7 0.2, 1.7 0.9, 0.5 0.9, 0.5 0.2))"]);
        let parts = partition_dataset(&s, &[cell("a", 0.0, 0.0, 1.0, 1.0), cell("b", 1.0, 0.0, 2.0, 1.0)], "http://p.org/{name}/", PartitionOptions::default()).unwrap();
        let total: f64 = parts.iter().map(area).sum();
        let original = 1.2 * 0.7;
        assert!(((total - original) / original).abs() < 1e-6);
        for p in &parts {
            assert!(p.to_ntriples().contains(&format!("<http://p.org/{}/f0>", p.id())));
            assert!(p.to_ntriples().contains("note 0"));
        }
    }

    #[test]
    fn identity_partition_rewrites_iris_only() {
        let s = dataset(&["POINT (0.5 0.5)", "POLYGON ((0.1 0.1, 0.9 0.1, 0.9 0.9, 0.1 0.1))"]);
        let parts = partition_dataset(&s, &[cell("all", 0.1, 0.1, 0.9, 0.9)], "http://p.org/{name}/", PartitionOptions::default()).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].len(), s.len());
        let mut a: Vec<String> = s.geometries().iter().map(|g| crate::geom::serialize_wkt(g.geometry(), false)).collect();
        let mut b: Vec<String> = parts[0].geometries().iter().map(|g| crate::geom::serialize_wkt(g.geometry(), false)).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert!(!parts[0].to_ntriples().contains("http://ex.org/f0"));
    }

    #[test]
    fn point_on_the_seam_goes_both_ways() {
        let s = dataset(&["POINT (1 0.5)"]);
        let parts = partition_dataset(&s, &[cell("a", 0.0, 0.0, 1.0, 1.0), cell("b", 1.0, 0.0, 2.0, 1.0)], "http://p.org/{name}/", PartitionOptions::default()).unwrap();
        assert!(parts.iter().all(|p| p.geometries().len() == 1));
    }

    #[test]
    fn line_split_in_two_pieces() {
        let s = dataset(&["LINESTRING (0.2 0.5, 1.5 0.5, 1.5 0.7, 0.2 0.7)"]);
        let parts = partition_dataset(&s, &[cell("a", 0.0, 0.0, 1.0, 1.0)], "http://p.org/{name}/", PartitionOptions::default()).unwrap();
        assert_eq!(parts[0].geometries().len(), 2);
        assert_eq!(parts[0].with_predicate(GEO_HAS_GEOMETRY).count(), 2);
    }

    #[test]
    fn rejections() {
        let l = parse_wkt("POLYGON ((0 0, 2 0, 2 2, 1 1, 0 2, 0 0))").unwrap();
        assert!(matches!(Boundary::new("l", &l), Err(FederationError::NonConvexBoundary(_))));
        let s = dataset(&["POINT (5 5)"]);
        let strict = PartitionOptions { strict: true };
        assert!(matches!(
            partition_dataset(&s, &[cell("a", 0.0, 0.0, 1.0, 1.0)], "http://p.org/{name}/", strict),
            Err(FederationError::UncoveredShape(_))
        ));
        let lax = partition_dataset(&s, &[cell("a", 0.0, 0.0, 1.0, 1.0)], "http://p.org/{name}/", PartitionOptions::default()).unwrap();
        assert!(lax[0].is_empty());
    }
}
