use std::collections::{BTreeSet, HashMap, HashSet};
use std::sync::Arc;

use super::thematic::pattern_wise;
use super::*;
use crate::federation::synth::random_instance;
use crate::federation::{scrape, Federation, Source};
use crate::geom::parse_wkt;
use crate::query::parse_query;
use crate::store::{eval_filter, Binding, Literal, Term};
use crate::summaries::Flavor;

fn set(ids: &[&str]) -> BTreeSet<String> {
    ids.iter().map(|s| s.to_string()).collect()
}

fn sigma(sets: &[&[&str]]) -> SourceAssignment {
    SourceAssignment::from_sets(sets.iter().map(|s| set(s)).collect())
}

fn prepared(wkt: &str) -> PreparedGeometry {
    PreparedGeometry::new(parse_wkt(wkt).unwrap())
}

fn bounds_of(pairs: &[(&str, &str)]) -> HashMap<String, Arc<PreparedGeometry>> {
    pairs.iter().map(|(id, w)| (id.to_string(), Arc::new(prepared(w)))).collect()
}

fn two_pattern_query(filters: &str) -> Query {
    parse_query(&format!("SELECT * WHERE {{ ?u geo:asWKT ?x . ?v geo:asWKT ?y . {filters} }}")).unwrap()
}

const B1: &str = "POLYGON ((0 0, 6 0, 6 4, 0 4, 0 0))";
const B2: &str = "POLYGON ((4 0, 8 0, 8 4, 4 4, 4 0))";
const B3: &str = "POLYGON ((20 20, 24 20, 24 24, 20 24, 20 20))";
const POLY: &str = "POLYGON ((4.5 1, 5.5 1, 5.5 3, 4.5 3, 4.5 1))";

fn box_pair_query() -> Query {
    two_pattern_query(&format!(
        "FILTER(geof:sfWithin(?x, \"{POLY}\"^^geo:wktLiteral)) FILTER(geof:sfIntersects(?x, ?y))"
    ))
}

#[test]
fn bp_box_pair_selection() {
    let q = box_pair_query();
    let b3 = prepared(B3);
    let b = HashMap::from([("x", &b3)]);
    assert!(bp_filter_empty(&q.filters[0], &b).unwrap());
    let b1 = prepared(B1);
    let b = HashMap::from([("x", &b1)]);
    assert!(!bp_filter_empty(&q.filters[0], &b).unwrap());
}

#[test]
fn bp_box_pair_join() {
    let q = box_pair_query();
    let b3 = prepared(B3);
    for other in [B1, B2] {
        let o = prepared(other);
        let b = HashMap::from([("x", &o), ("y", &b3)]);
        assert!(bp_filter_empty(&q.filters[1], &b).unwrap());
    }
    let (b1, b2) = (prepared(B1), prepared(B2));
    let b = HashMap::from([("x", &b1), ("y", &b2)]);
    assert!(!bp_filter_empty(&q.filters[1], &b).unwrap());
}

#[test]
fn bp_touching_bounds_refute_within_only() {
    let left = prepared("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))");
    let right = prepared("POLYGON ((1 0, 2 0, 2 1, 1 1, 1 0))");
    let b = HashMap::from([("x", &left), ("y", &right)]);
    let within = two_pattern_query("FILTER(geof:sfWithin(?x, ?y))");
    let touches = two_pattern_query("FILTER(geof:sfTouches(?x, ?y))");
    let equals = two_pattern_query("FILTER(geof:sfEquals(?x, ?y))");
    assert!(bp_filter_empty(&within.filters[0], &b).unwrap());
    assert!(bp_filter_empty(&equals.filters[0], &b).unwrap());
    assert!(!bp_filter_empty(&touches.filters[0], &b).unwrap());
}

fn haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let r = 6_371_008.8_f64;
    let (la1, la2) = (a.1.to_radians(), b.1.to_radians());
    let h = ((la2 - la1) / 2.0).sin().powi(2) + la1.cos() * la2.cos() * ((b.0 - a.0).to_radians() / 2.0).sin().powi(2);
    2.0 * r * h.sqrt().asin()
}

#[test]
fn bp_distance_around_threshold() {
    let q = two_pattern_query("FILTER(geof:distance(?x, ?y, uom:metre) < 5000)");
    let a = prepared("POLYGON ((0 0, 0.1 0, 0.1 0.1, 0 0.1, 0 0))");
    for (gap, expect) in [(0.09, true), (0.009, false)] {
        let x0 = 0.1 + gap;
        let b = prepared(&format!("POLYGON (({x0} 0, {} 0, {} 0.1, {x0} 0.1, {x0} 0))", x0 + 0.1, x0 + 0.1));
        // The boxes are closest along the equator.
        let d = haversine((0.1, 0.0), (x0, 0.0));
        assert_eq!(d > 5000.0, expect, "{d}");
        let m = HashMap::from([("x", &a), ("y", &b)]);
        assert_eq!(bp_filter_empty(&q.filters[0], &m).unwrap(), expect);
    }
}

#[test]
fn bp_unbound_variable() {
    let q = box_pair_query();
    let b = HashMap::new();
    assert!(matches!(bp_filter_empty(&q.filters[0], &b), Err(SelectorError::UnboundVariable(v)) if v == "x"));
}

#[test]
fn disjoint_box_pruned_from_both_patterns() {
    let q = box_pair_query();
    let bounds = bounds_of(&[("s1", B1), ("s2", B2), ("s3", B3)]);
    let all = SourceAssignment::all(2, ["s1", "s2", "s3"].map(String::from));
    let out = aswkt_source_select(&q, &all, &bounds);
    assert_eq!(out, sigma(&[&["s1", "s2"], &["s1", "s2"]]));
}

#[test]
fn no_filters_leave_sigma_alone() {
    let q = parse_query("SELECT * WHERE { ?u geo:asWKT ?x . ?u ?p ?o }").unwrap();
    let bounds = bounds_of(&[("s1", B1), ("s3", B3)]);
    let s = sigma(&[&["s1", "s3"], &["s3"]]);
    assert_eq!(aswkt_source_select(&q, &s, &bounds), s);
}

#[test]
fn unbounded_sources_survive() {
    let q = box_pair_query();
    let bounds = bounds_of(&[("s1", B1)]);
    let all = SourceAssignment::all(2, ["s1", "s9"].map(String::from));
    assert_eq!(aswkt_source_select(&q, &all, &bounds), all);
}

#[test]
fn empty_partner_set_prunes_everything_bounded() {
    let q = two_pattern_query("FILTER(geof:sfIntersects(?x, ?y))");
    let bounds = bounds_of(&[("s1", B1), ("s2", B2)]);
    let s = sigma(&[&["s1", "s2"], &[]]);
    assert_eq!(aswkt_source_select(&q, &s, &bounds), sigma(&[&[], &[]]));
}

#[test]
fn same_pattern_join() {
    // Both variables on one pattern; every bound meets itself.
    let q = parse_query("SELECT * WHERE { ?u geo:asWKT ?x . ?u geo:asWKT ?y . FILTER(geof:sfIntersects(?x, ?y)) }").unwrap();
    let bounds = bounds_of(&[("s1", B1), ("s3", B3)]);
    let all = SourceAssignment::all(2, ["s1", "s3"].map(String::from));
    assert_eq!(aswkt_source_select(&q, &all, &bounds), all);
}

// ---------------------------------------------------------------------------
// Illustrative federation

fn illustrative() -> (Federation, Query) {
    let dumps = [
        (include_str!("../../../../fixtures/illustrative/s1.ttl"), include_str!("../../../../fixtures/illustrative/b1.wkt")),
        (include_str!("../../../../fixtures/illustrative/s2.ttl"), include_str!("../../../../fixtures/illustrative/b2.wkt")),
        (include_str!("../../../../fixtures/illustrative/s3.ttl"), include_str!("../../../../fixtures/illustrative/b3.wkt")),
    ];
    let sources = dumps
        .iter()
        .map(|(dump, b)| {
            let store = crate::store::Store::load_dump(dump, "x").unwrap();
            let d = scrape(&store, Flavor::Explicit, Some(b)).unwrap();
            Source::new(store, Some(d))
        })
        .collect();
    let fed = Federation::new(sources, Mode::Geo, ThematicOptions::default()).unwrap();
    let q = parse_query(include_str!("../../../../fixtures/illustrative/query.rq")).unwrap();
    (fed, q)
}

#[test]
fn illustrative_stages() {
    let (fed, q) = illustrative();
    let all = SourceAssignment::all(3, fed.ids());
    let geo = aswkt_source_select(&q, &all, &fed.catalog().bounds());
    assert_eq!(geo, sigma(&[&["s1", "s2", "s3"], &["s1", "s2", "s3"], &["s1", "s2"]]));
    let first = pattern_wise(&q.bgp, &geo, fed.catalog());
    assert_eq!(first, sigma(&[&["s2", "s3"], &["s1", "s2", "s3"], &["s1", "s2"]]));
    let s2 = sigma(&[&["s2"], &["s2"], &["s2"]]);
    assert_eq!(fed.select(&q).unwrap(), s2);
    assert_eq!(fed.relevant_sources(&q).unwrap(), s2);
}

#[test]
fn colocation_alone_reaches_s2() {
    // With empty prefix statistics only the colocation rule can act.
    let (fed, q) = illustrative();
    let descriptors = fed
        .sources()
        .iter()
        .map(|s| {
            let mut d = s.descriptor.clone().unwrap();
            d.stats.subject_prefixes.clear();
            d.stats.object_prefixes.clear();
            Some(d)
        })
        .collect();
    let on = fed.variant(descriptors, Mode::Geo);
    assert_eq!(on.select(&q).unwrap(), sigma(&[&["s2"], &["s2"], &["s2"]]));
    let off = on.clone().with_options(ThematicOptions { ask: false, colocation: false });
    assert_eq!(off.select(&q).unwrap(), sigma(&[&["s2", "s3"], &["s1", "s2", "s3"], &["s1", "s2"]]));
}

#[test]
fn thematic_only_mode_keeps_s3_on_geometry() {
    let (fed, q) = illustrative();
    let thm = fed.variant(fed.sources().iter().map(|s| s.descriptor.clone()).collect(), Mode::Thm);
    let out = thm.select(&q).unwrap();
    assert!(out.get(2).contains("s3"));
    assert!(out.get(0).contains("s3"));
}

#[test]
fn missing_descriptor_is_named() {
    let (fed, q) = illustrative();
    let mut ds: Vec<_> = fed.sources().iter().map(|s| s.descriptor.clone()).collect();
    ds[1] = None;
    let v = fed.variant(ds, Mode::Thm);
    assert!(matches!(v.select(&q), Err(SelectorError::MissingDescriptor(id)) if id == "s2"));
}

#[test]
fn shared_predicate_without_joins_is_unchanged() {
    let (fed, _) = illustrative();
    let q = parse_query("SELECT * WHERE { ?g geo:asWKT ?w }").unwrap();
    let all = SourceAssignment::all(1, fed.ids());
    let out = thematic_source_select(&q.bgp, &all, fed.catalog(), ThematicOptions::default()).unwrap();
    assert_eq!(out, all);
}

#[test]
fn ask_drops_sources_without_matches() {
    let (fed, _) = illustrative();
    let q = parse_query("SELECT * WHERE { <http://example.org/s2/g1> ?p ?o }").unwrap();
    let all = SourceAssignment::all(1, fed.ids());
    let plain = thematic_source_select(&q.bgp, &all, fed.catalog(), ThematicOptions::default()).unwrap();
    // The subject prefix alone rules out s1 and s3.
    assert_eq!(plain, sigma(&[&["s2"]]));
    // Same prefix, no such resource: only a probe can tell.
    let q = parse_query("SELECT * WHERE { <http://example.org/s2/g9> ?p ?o }").unwrap();
    let plain = thematic_source_select(&q.bgp, &all, fed.catalog(), ThematicOptions::default()).unwrap();
    assert_eq!(plain, sigma(&[&["s2"]]));
    let opts = ThematicOptions { ask: true, colocation: true };
    let out = thematic_source_select(&q.bgp, &all, fed.catalog(), opts).unwrap();
    assert_eq!(out, sigma(&[&[]]));
}

// ---------------------------------------------------------------------------
// Random instances

/// Every (pattern, source) pair one rule application would remove from `s`.
fn applicable(q: &Query, s: &SourceAssignment, bounds: &HashMap<String, Arc<PreparedGeometry>>) -> BTreeSet<(usize, String)> {
    let mut out = BTreeSet::new();
    for (t, tp) in q.bgp.iter().enumerate() {
        let Some(o) = tp.wkt_var() else { continue };
        for src in s.get(t) {
            let Some(b) = bounds.get(src) else { continue };
            for f in &q.filters {
                let vars = f.vars();
                if !vars.contains(o) {
                    continue;
                }
                if vars.len() == 1 {
                    if bp_filter_empty(f, &HashMap::from([(o, &**b)])).unwrap_or(false) {
                        out.insert((t, src.clone()));
                    }
                    continue;
                }
                let o2 = *vars.iter().find(|v| **v != o).unwrap_or(&o);
                for (t2, tp2) in q.bgp.iter().enumerate() {
                    if tp2.wkt_var() != Some(o2) {
                        continue;
                    }
                    let refuted = s.get(t2).iter().all(|s2| match bounds.get(s2) {
                        Some(b2) => bp_filter_empty(f, &HashMap::from([(o, &**b), (o2, &**b2)])).unwrap_or(false),
                        None => false,
                    });
                    if refuted {
                        out.insert((t, src.clone()));
                    }
                }
            }
        }
    }
    out
}

/// All terminal states reachable by applying single removals in any order.
fn terminal_states(q: &Query, start: &SourceAssignment, bounds: &HashMap<String, Arc<PreparedGeometry>>) -> HashSet<Vec<BTreeSet<String>>> {
    let mut seen = HashSet::new();
    let mut stack = vec![start.clone()];
    let mut terminals = HashSet::new();
    while let Some(s) = stack.pop() {
        if !seen.insert(s.sets().to_vec()) {
            continue;
        }
        let moves = applicable(q, &s, bounds);
        if moves.is_empty() {
            terminals.insert(s.sets().to_vec());
        }
        for (t, src) in moves {
            let mut next = s.clone();
            next.remove(t, &src);
            stack.push(next);
        }
    }
    terminals
}

#[test]
fn fixpoint_is_order_independent() {
    let mut checked = 0;
    for seed in 0..400u64 {
        let inst = random_instance(seed, 6);
        if inst.stores.len() > 4 {
            continue;
        }
        let fed = Federation::from_stores(inst.stores, Some(Flavor::Mbb), Mode::Geo).unwrap();
        let bounds = fed.catalog().bounds();
        for q in &inst.queries {
            let all = SourceAssignment::all(q.bgp.len(), fed.ids());
            let fast = aswkt_source_select(q, &all, &bounds);
            let ends = terminal_states(q, &all, &bounds);
            assert_eq!(ends.len(), 1, "seed {seed}: {q}");
            assert!(ends.contains(fast.sets()), "seed {seed}: {q}");
            assert_eq!(aswkt_source_select(q, &fast, &bounds), fast, "idempotent");
            assert!(fast.is_subset_of(&all));
            checked += 1;
        }
        if checked >= 300 {
            break;
        }
    }
    assert!(checked >= 100, "{checked}");
}

/// Shapes of every source, by id.
fn shapes(fed: &Federation) -> HashMap<String, Vec<Term>> {
    fed.sources()
        .iter()
        .map(|s| (s.id.clone(), s.store.geometries().iter().map(|g| Term::Literal(Literal::wkt(g.geometry()))).collect()))
        .collect()
}

#[test]
fn bp_is_conservative_on_stored_shapes() {
    let mut proved = 0;
    for seed in 0..30u64 {
        let inst = random_instance(seed, 8);
        let fed = Federation::from_stores(inst.stores, Some(Flavor::Union), Mode::Geo).unwrap();
        let bounds = fed.catalog().bounds();
        let shapes = shapes(&fed);
        for q in &inst.queries {
            for f in &q.filters {
                let vars: Vec<&str> = f.vars().into_iter().collect();
                let ids = fed.ids();
                let combos: Vec<Vec<&String>> = match vars.len() {
                    1 => ids.iter().map(|a| vec![a]).collect(),
                    _ => ids.iter().flat_map(|a| ids.iter().map(move |b| vec![a, b])).collect(),
                };
                for combo in combos {
                    let b: HashMap<&str, &PreparedGeometry> =
                        vars.iter().zip(&combo).map(|(v, id)| (*v, &*bounds[*id])).collect();
                    if !bp_filter_empty(f, &b).unwrap() {
                        continue;
                    }
                    proved += 1;
                    let first = &shapes[combo[0]];
                    let second = combo.get(1).map_or(&shapes[combo[0]], |id| &shapes[*id]);
                    for x in first {
                        for y in second.iter().take(if vars.len() == 1 { 1 } else { usize::MAX }) {
                            let mut row = Binding::new();
                            row.insert(vars[0].into(), x.clone());
                            if vars.len() == 2 {
                                row.insert(vars[1].into(), y.clone());
                            }
                            assert!(!eval_filter(f, &row).unwrap(), "seed {seed}: {f} holds for {row:?}");
                        }
                    }
                }
            }
        }
    }
    assert!(proved > 50, "{proved}");
}
