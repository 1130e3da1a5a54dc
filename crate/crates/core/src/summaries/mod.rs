//! Bounding-polygon summaries, thematic statistics and dataset descriptors.

mod descriptor;
mod quadtree;

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geom::{serialize_wkt, GeometryKind, DEFAULT_CRS};
use crate::store::{Store, StoreError, Term};
use crate::vocab::RDF_TYPE;
use crate::{GeomError, Geometry, Polygon, Rectangle, Shape};

pub use descriptor::{emit_descriptor, parse_descriptor};
pub use quadtree::{extract_quadtree_summary, MAX_QUADTREE_HEIGHT};

/// Padding around the box of a point or line, in degrees. Kept well above the
/// predicate tolerance so the shape lies strictly inside its cover.
pub const DEGENERATE_PAD: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum SummaryError {
    #[error("store has no geo:asWKT geometries")]
    NoGeometries,
    #[error("quadtree height {0} exceeds the maximum of {MAX_QUADTREE_HEIGHT}")]
    InvalidHeight(u32),
    #[error("bounding shape must be a polygon or multipolygon, found {0:?}")]
    NotAreal(GeometryKind),
    #[error("unknown summary flavor '{0}'")]
    InvalidFlavor(String),
    #[error("descriptor lacks {0}")]
    MissingProperty(&'static str),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Union,
    Quadtree(u32),
    Mbb,
    Explicit,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flavor::Union => f.write_str("union"),
            Flavor::Quadtree(k) => write!(f, "quadtree:{k}"),
            Flavor::Mbb => f.write_str("mbb"),
            Flavor::Explicit => f.write_str("explicit"),
        }
    }
}

impl FromStr for Flavor {
    type Err = SummaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "union" => Ok(Flavor::Union),
            "mbb" => Ok(Flavor::Mbb),
            "explicit" => Ok(Flavor::Explicit),
            _ => s
                .strip_prefix("quadtree:")
                .and_then(|k| k.parse().ok())
                .map(Flavor::Quadtree)
                .ok_or_else(|| SummaryError::InvalidFlavor(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundingSummary {
    pub shape: Geometry,
    pub flavor: Flavor,
}

impl BoundingSummary {
    pub fn new(shape: Geometry, flavor: Flavor) -> Result<Self, SummaryError> {
        match shape.kind() {
            GeometryKind::Polygon | GeometryKind::MultiPolygon => Ok(BoundingSummary { shape, flavor }),
            k => Err(SummaryError::NotAreal(k)),
        }
    }

    /// Ring points, not counting each ring's closing repetition.
    pub fn coordinate_count(&self) -> usize {
        self.shape.coordinate_count()
    }
}

fn stored_geometries(s: &Store) -> Result<Vec<Geometry>, SummaryError> {
    let gs: Vec<Geometry> = s.geometries().iter().map(|g| g.geometry().clone()).collect();
    if gs.is_empty() {
        return Err(SummaryError::NoGeometries);
    }
    Ok(gs)
}

fn crs_of(gs: &[Geometry]) -> String {
    gs.first().map_or(DEFAULT_CRS, |g| g.crs()).to_string()
}

fn from_polygons(mut polys: Vec<Polygon>, crs: &str) -> Result<Geometry, GeomError> {
    let shape = if polys.len() == 1 {
        Shape::Polygon(polys.pop().unwrap())
    } else {
        Shape::MultiPolygon(polys)
    };
    Geometry::with_crs(shape, crs)
}

/// Grows a box by [`DEGENERATE_PAD`] on every side, clamped to the globe.
pub(crate) fn pad_box(r: Rectangle) -> Rectangle {
    let min = crate::Coordinate::new((r.min.lon - DEGENERATE_PAD).max(-180.0), (r.min.lat - DEGENERATE_PAD).max(-90.0));
    let max = crate::Coordinate::new((r.max.lon + DEGENERATE_PAD).min(180.0), (r.max.lat + DEGENERATE_PAD).min(90.0));
    Rectangle::new(min, max)
}

/// Distinct hole-free polygons covering the stored shapes. Areal shapes
/// cover themselves; points and lines get their padded box. Every summary
/// flavor is computed from these, which makes the flavors nest exactly.
pub(crate) fn covers(gs: &[Geometry]) -> Result<Vec<Polygon>, GeomError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for g in gs {
        let polys: Vec<Polygon> = match g.shape() {
            Shape::Polygon(_) | Shape::MultiPolygon(_) => g.polygons().iter().map(Polygon::without_holes).collect(),
            _ => vec![pad_box(g.bbox()).to_polygon()],
        };
        for p in polys {
            let key = serialize_wkt(&Geometry::new(Shape::Polygon(p.clone()))?, false);
            if seen.insert(key) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Every distinct cover polygon as a member, without dissolving.
pub fn extract_union_summary(s: &Store) -> Result<BoundingSummary, SummaryError> {
    let gs = stored_geometries(s)?;
    let shape = from_polygons(covers(&gs)?, &crs_of(&gs))?;
    BoundingSummary::new(shape, Flavor::Union)
}

/// The minimum bounding box of the cover polygons.
pub fn extract_mbb_summary(s: &Store) -> Result<BoundingSummary, SummaryError> {
    let gs = stored_geometries(s)?;
    let rect = covers(&gs)?
        .iter()
        .map(Polygon::bbox)
        .reduce(|a, b| a.union(b))
        .expect("at least one cover");
    let shape = Geometry::with_crs(Shape::Polygon(rect.to_polygon()), crs_of(&gs))?;
    BoundingSummary::new(shape, Flavor::Mbb)
}

/// A user-supplied boundary.
pub fn explicit_summary(shape: Geometry) -> Result<BoundingSummary, SummaryError> {
    BoundingSummary::new(shape, Flavor::Explicit)
}

pub fn extract_summary(s: &Store, flavor: Flavor) -> Result<BoundingSummary, SummaryError> {
    match flavor {
        Flavor::Union => extract_union_summary(s),
        Flavor::Mbb => extract_mbb_summary(s),
        Flavor::Quadtree(k) => extract_quadtree_summary(s, k),
        Flavor::Explicit => Err(SummaryError::InvalidFlavor("explicit needs a boundary file".into())),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ThematicStats {
    pub predicates: BTreeSet<String>,
    pub classes: BTreeSet<String>,
    pub subject_prefixes: BTreeSet<String>,
    pub object_prefixes: BTreeSet<String>,
}

/// Marker prefix for literal objects.
pub const LITERAL_PREFIX: &str = "\"";
/// Marker prefix for blank nodes.
pub const BLANK_PREFIX: &str = "_:";

/// IRI truncated after its last '/' or '#'; literals and blank nodes map to markers.
pub fn term_prefix(t: &Term) -> String {
    match t {
        Term::Iri(i) => match i.rfind(['/', '#']) {
            Some(k) => i[..=k].to_string(),
            None => i.to_string(),
        },
        Term::Blank(_) => BLANK_PREFIX.to_string(),
        Term::Literal(_) => LITERAL_PREFIX.to_string(),
        Term::Variable(v) => panic!("variable ?{v} in stored triple"),
    }
}

pub fn extract_thematic_stats(s: &Store) -> ThematicStats {
    let mut st = ThematicStats::default();
    for t in s.triples() {
        if let Some(p) = t.predicate.as_iri() {
            st.predicates.insert(p.to_string());
            if p == RDF_TYPE {
                if let Some(c) = t.object.as_iri() {
                    st.classes.insert(c.to_string());
                }
            }
        }
        st.subject_prefixes.insert(term_prefix(&t.subject));
        st.object_prefixes.insert(term_prefix(&t.object));
    }
    st
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetDescriptor {
    pub source_id: String,
    pub endpoint: String,
    pub bounding: Option<BoundingSummary>,
    pub stats: ThematicStats,
}

/// Builds the descriptor of a store with the given bounding summary.
pub fn describe(s: &Store, endpoint: &str, bounding: Option<BoundingSummary>) -> DatasetDescriptor {
    DatasetDescriptor {
        source_id: s.id().to_string(),
        endpoint: endpoint.to_string(),
        bounding,
        stats: extract_thematic_stats(s),
    }
}
