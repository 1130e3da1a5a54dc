use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{Federation, FederationError};
use crate::geom::serialize_wkt;
use crate::query::{parse_query, Query};
use crate::{Coordinate, Geometry, Rectangle};

/// Base of the synthetic resource IRIs.
pub const DATA: &str = "http://geosel.example.org/data/";
pub const ADM: &str = "http://geosel.example.org/adm#";
pub const CROP: &str = "http://geosel.example.org/crop#";
pub const SNOW: &str = "http://geosel.example.org/snow#";

const METRES_PER_DEGREE: f64 = 111_320.0;
const SIDE_METRES: f64 = 5_000.0;
const NEAR_METRES: f64 = 5_000.0;

/// Query shapes over the administrative, crop and snow layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Template {
    /// Municipalities meeting an area.
    Q1,
    /// Snow-covered potato fields meeting an area.
    Q2,
    /// Potato fields near snow, both meeting an area.
    Q3,
    /// Snow near a named municipality.
    Q4,
    /// Potato fields within a named municipality.
    Q5,
    /// Snow-covered potato fields within a named municipality.
    Q6,
    /// Potato fields near snow, within a named municipality.
    Q7,
}

impl Template {
    pub const ALL: [Template; 7] =
        [Template::Q1, Template::Q2, Template::Q3, Template::Q4, Template::Q5, Template::Q6, Template::Q7];

    fn needs_name(self) -> bool {
        matches!(self, Template::Q4 | Template::Q5 | Template::Q6 | Template::Q7)
    }

    fn text(self, area: &str, name: &str) -> String {
        let name = crate::syntax::escape_literal(name);
        let adm_full = "?m rdf:type adm:Municipality .\n  ?m adm:hasName ?name .\n  ?m adm:hasCode ?code .\n  \
                        ?m adm:population ?pop .\n  ?m geo:hasGeometry ?mg .\n  ?mg geo:asWKT ?mw .";
        let adm_named = format!(
            "?m rdf:type adm:Municipality .\n  ?m adm:hasName \"{name}\" .\n  ?m geo:hasGeometry ?mg .\n  ?mg geo:asWKT ?mw ."
        );
        let crop = "?f rdf:type crop:Parcel .\n  ?f crop:cropType crop:Potato .\n  ?f crop:owner ?owner .\n  \
                    ?f geo:hasGeometry ?fg .\n  ?fg geo:asWKT ?fw .";
        let snow = "?sn rdf:type snow:SnowCover .\n  ?sn snow:month ?month .\n  ?sn snow:depth ?depth .\n  \
                    ?sn geo:hasGeometry ?sg .\n  ?sg geo:asWKT ?sw .";
        let lit = format!("\"{area}\"^^geo:wktLiteral");
        let near = |a: &str, b: &str| format!("FILTER(geof:distance({a}, {b}, uom:metre) < {NEAR_METRES:?})");
        let (patterns, filters) = match self {
            Template::Q1 => (adm_full.to_string(), vec![format!("FILTER(geof:sfIntersects(?mw, {lit}))")]),
            Template::Q2 => (
                format!("{crop}\n  {snow}"),
                vec![
                    format!("FILTER(geof:sfIntersects(?fw, {lit}))"),
                    format!("FILTER(geof:sfIntersects(?sw, {lit}))"),
                    "FILTER(geof:sfIntersects(?fw, ?sw))".into(),
                ],
            ),
            Template::Q3 => (
                format!("{crop}\n  {snow}"),
                vec![
                    format!("FILTER(geof:sfIntersects(?fw, {lit}))"),
                    format!("FILTER(geof:sfIntersects(?sw, {lit}))"),
                    near("?fw", "?sw"),
                ],
            ),
            Template::Q4 => (format!("{adm_named}\n  {snow}"), vec![near("?sw", "?mw")]),
            Template::Q5 => (format!("{adm_named}\n  {crop}"), vec!["FILTER(geof:sfWithin(?fw, ?mw))".into()]),
            Template::Q6 => (
                format!("{adm_named}\n  {crop}\n  {snow}"),
                vec![
                    "FILTER(geof:sfWithin(?fw, ?mw))".into(),
                    "FILTER(geof:sfIntersects(?fw, ?sw))".into(),
                    "FILTER(geof:sfIntersects(?sw, ?mw))".into(),
                ],
            ),
            Template::Q7 => (
                format!("{adm_named}\n  {crop}\n  {snow}"),
                vec![
                    "FILTER(geof:sfWithin(?fw, ?mw))".into(),
                    near("?fw", "?sw"),
                    "FILTER(geof:sfIntersects(?sw, ?mw))".into(),
                ],
            ),
        };
        format!(
            "PREFIX adm: <{ADM}>\nPREFIX crop: <{CROP}>\nPREFIX snow: <{SNOW}>\nSELECT * WHERE {{\n  {patterns}\n  {}\n}}\n",
            filters.join("\n  ")
        )
    }
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Template {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Template::ALL
            .into_iter()
            .find(|t| t.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown template '{s}' (expected Q1..Q7)"))
    }
}

#[derive(Debug, Clone)]
pub struct WorkloadQuery {
    /// None for queries read from files.
    pub template: Option<Template>,
    /// `Q3-007` style label.
    pub name: String,
    pub query: Query,
}

/// A square of about 25 km² fully inside `within`, redrawn until it fits.
fn draw_area(rng: &mut ChaCha8Rng, within: &Rectangle) -> Option<Rectangle> {
    for _ in 0..1000 {
        let lat = rng.gen_range(within.min.lat..=within.max.lat);
        let lon = rng.gen_range(within.min.lon..=within.max.lon);
        let dlat = SIDE_METRES / METRES_PER_DEGREE / 2.0;
        let dlon = dlat / lat.to_radians().cos();
        let r = Rectangle::new(Coordinate::new(lon - dlon, lat - dlat), Coordinate::new(lon + dlon, lat + dlat));
        if within.contains_rect(&r, 0.0) {
            return Some(r);
        }
    }
    None
}

/// `n` queries per template. Areas are drawn inside the federation's overall
/// box; names come from the `adm:hasName` values present in the federation.
pub fn generate_workload(
    templates: &[Template],
    n: usize,
    seed: u64,
    fed: &Federation,
) -> Result<Vec<WorkloadQuery>, FederationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = fed
        .merged()
        .with_predicate(&format!("{ADM}hasName"))
        .filter_map(|t| t.object.as_literal().map(|l| l.lexical().to_string()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mbb = fed.overall_mbb();
    let mut out = Vec::new();
    for &t in templates {
        if t.needs_name() && names.is_empty() {
            return Err(FederationError::TemplateUnsatisfiable(t.to_string(), "no administrative names".into()));
        }
        let Some(mbb) = mbb else {
            return Err(FederationError::TemplateUnsatisfiable(t.to_string(), "federation has no geometries".into()));
        };
        for i in 0..n {
            let area = draw_area(&mut rng, &mbb).ok_or_else(|| {
                FederationError::TemplateUnsatisfiable(t.to_string(), "federation box smaller than a 25 km² square".into())
            })?;
            let name = if t.needs_name() { names[rng.gen_range(0..names.len())].clone() } else { String::new() };
            let wkt = serialize_wkt(&Geometry::rectangle(area)?, false);
            let query = parse_query(&t.text(&wkt, &name))?;
            out.push(WorkloadQuery { template: Some(t), name: format!("{t}-{:03}", i + 1), query });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::federation::synth::grid_federation;
    use crate::query::classify_filters;

    #[test]
    fn table_six_shapes() {
        let fed = grid_federation(1).federation(crate::selector::Mode::Thm).unwrap();
        let w = generate_workload(&Template::ALL, 2, 7, &fed).unwrap();
        let expect = [(6, 1, 0), (10, 2, 1), (10, 2, 1), (9, 0, 1), (9, 0, 1), (14, 0, 3), (14, 0, 3)];
        for q in &w {
            let (tp, sel, join) = expect[q.template.unwrap() as usize];
            let c = classify_filters(&q.query);
            assert_eq!((q.query.bgp.len(), c.selections, c.joins), (tp, sel, join), "{}", q.name);
        }
        assert_eq!(w.len(), 14);
    }

    #[test]
    fn deterministic_and_inside() {
        let fed = grid_federation(2).federation(crate::selector::Mode::Thm).unwrap();
        let a = generate_workload(&[Template::Q1, Template::Q5], 5, 3, &fed).unwrap();
        let b = generate_workload(&[Template::Q1, Template::Q5], 5, 3, &fed).unwrap();
        assert_eq!(a.iter().map(|q| q.query.to_string()).collect::<Vec<_>>(), b.iter().map(|q| q.query.to_string()).collect::<Vec<_>>());
        let mbb = fed.overall_mbb().unwrap();
        for q in a.iter().filter(|q| q.template == Some(Template::Q1)) {
            let crate::query::FilterArg::Wkt(l) = q.query.filters[0].args().1 else { panic!() };
            let r = l.geometry().unwrap().bbox();
            assert!(mbb.contains_rect(&r, 0.0));
            let km2 = r.height() * METRES_PER_DEGREE * r.width() * METRES_PER_DEGREE * r.center().lat.to_radians().cos() / 1e6;
            assert!((km2 - 25.0).abs() < 0.5, "{km2}");
        }
    }

    #[test]
    fn names_are_required() {
        let fed = Federation::from_stores(vec![crate::summaries::tests::store_of(&["POINT (0 0)"])], None, crate::selector::Mode::Thm).unwrap();
        assert!(matches!(generate_workload(&[Template::Q4], 1, 0, &fed), Err(FederationError::TemplateUnsatisfiable(..))));
    }
}
