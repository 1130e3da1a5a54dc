//! Geometry kernel: WKT text, simple-features predicates, distance, clipping.
//!
//! Everything here is generic over the coordinate scalar (`f32` or `f64`).
//! The rest of the crate works on the `f64` aliases exported at the crate root.

mod clip;
mod distance;
mod prepared;
mod relate;
mod wkt;

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};
use thiserror::Error;

pub use clip::{clip_to_convex, is_convex, ring_area};
pub use distance::{distance, geodesic_distance, LengthUnit};
pub use prepared::PreparedGeometry;
pub(crate) use prepared::{locate_in_polygon, Loc};
pub use relate::{relate, IntersectionMatrix, Relation};
pub use wkt::{parse_wkt, serialize_wkt};

/// CRS assumed when a WKT literal carries no `<uri>` prefix.
pub const DEFAULT_CRS: &str = "http://www.opengis.net/def/crs/EPSG/0/4326";

/// Scalar type usable for coordinates.
pub trait GeoFloat:
    Float + FromPrimitive + FromStr + Display + Debug + Default + rstar::RTreeNum + Send + Sync + 'static
{
    /// Tolerance (degrees) used for every coordinate comparison in predicates.
    fn tolerance() -> Self;
}

impl GeoFloat for f64 {
    fn tolerance() -> f64 {
        1e-9
    }
}

impl GeoFloat for f32 {
    // 1e-9 is below f32 resolution at the scale of longitudes.
    fn tolerance() -> f32 {
        1e-5
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("malformed WKT: {0}")]
    MalformedWkt(String),
    #[error("unsupported geometry type `{0}`")]
    UnsupportedGeometryType(String),
    #[error("coordinate ({lon}, {lat}) is outside the WGS84 range")]
    CoordinateOutOfRange { lon: f64, lat: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("CRS mismatch: <{0}> vs <{1}>")]
    CrsMismatch(String, String),
    #[error("unsupported unit of measure <{0}>")]
    UnsupportedUnit(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Coordinate<T> {
    pub lon: T,
    pub lat: T,
}

impl<T: GeoFloat> Coordinate<T> {
    pub fn new(lon: T, lat: T) -> Self {
        Coordinate { lon, lat }
    }

    pub(crate) fn sub(self, o: Self) -> Self {
        Coordinate::new(self.lon - o.lon, self.lat - o.lat)
    }

    pub(crate) fn add(self, o: Self) -> Self {
        Coordinate::new(self.lon + o.lon, self.lat + o.lat)
    }

    pub(crate) fn scale(self, k: T) -> Self {
        Coordinate::new(self.lon * k, self.lat * k)
    }

    pub(crate) fn dot(self, o: Self) -> T {
        self.lon * o.lon + self.lat * o.lat
    }

    pub(crate) fn cross(self, o: Self) -> T {
        self.lon * o.lat - self.lat * o.lon
    }

    pub(crate) fn norm(self) -> T {
        self.lon.hypot(self.lat)
    }

    pub(crate) fn close_to(self, o: Self, eps: T) -> bool {
        self.sub(o).norm() <= eps
    }

    fn check_range(self) -> Result<Self, GeomError> {
        let lon = self.lon.to_f64().unwrap_or(f64::NAN);
        let lat = self.lat.to_f64().unwrap_or(f64::NAN);
        if !(-180.0..=180.0).contains(&lon) || !(-90.0..=90.0).contains(&lat) {
            return Err(GeomError::CoordinateOutOfRange { lon, lat });
        }
        Ok(self)
    }
}

/// Axis-aligned box in lon/lat.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle<T> {
    pub min: Coordinate<T>,
    pub max: Coordinate<T>,
}

impl<T: GeoFloat> Rectangle<T> {
    pub fn new(min: Coordinate<T>, max: Coordinate<T>) -> Self {
        Rectangle {
            min: Coordinate::new(min.lon.min(max.lon), min.lat.min(max.lat)),
            max: Coordinate::new(min.lon.max(max.lon), min.lat.max(max.lat)),
        }
    }

    pub fn of_point(c: Coordinate<T>) -> Self {
        Rectangle { min: c, max: c }
    }

    /// Smallest box around a coordinate sequence; `None` when it is empty.
    pub fn enclosing(coords: impl IntoIterator<Item = Coordinate<T>>) -> Option<Self> {
        let mut it = coords.into_iter();
        let first = it.next()?;
        Some(it.fold(Rectangle::of_point(first), |r, c| r.extend(c)))
    }

    pub fn extend(self, c: Coordinate<T>) -> Self {
        Rectangle {
            min: Coordinate::new(self.min.lon.min(c.lon), self.min.lat.min(c.lat)),
            max: Coordinate::new(self.max.lon.max(c.lon), self.max.lat.max(c.lat)),
        }
    }

    pub fn union(self, o: Self) -> Self {
        self.extend(o.min).extend(o.max)
    }

    pub fn width(&self) -> T {
        self.max.lon - self.min.lon
    }

    pub fn height(&self) -> T {
        self.max.lat - self.min.lat
    }

    pub fn center(&self) -> Coordinate<T> {
        let two = T::one() + T::one();
        Coordinate::new((self.min.lon + self.max.lon) / two, (self.min.lat + self.max.lat) / two)
    }

    pub fn diagonal(&self) -> T {
        self.width().hypot(self.height())
    }

    /// Grows every side by `d`.
    pub fn buffer(self, d: T) -> Self {
        Rectangle {
            min: Coordinate::new(self.min.lon - d, self.min.lat - d),
            max: Coordinate::new(self.max.lon + d, self.max.lat + d),
        }
    }

    /// Closed-box intersection test with tolerance.
    pub fn intersects(&self, o: &Self, eps: T) -> bool {
        self.min.lon <= o.max.lon + eps
            && o.min.lon <= self.max.lon + eps
            && self.min.lat <= o.max.lat + eps
            && o.min.lat <= self.max.lat + eps
    }

    pub fn contains_coord(&self, c: Coordinate<T>, eps: T) -> bool {
        c.lon >= self.min.lon - eps
            && c.lon <= self.max.lon + eps
            && c.lat >= self.min.lat - eps
            && c.lat <= self.max.lat + eps
    }

    pub fn contains_rect(&self, o: &Self, eps: T) -> bool {
        self.contains_coord(o.min, eps) && self.contains_coord(o.max, eps)
    }

    /// The box as a counter-clockwise closed ring starting at the lower-left corner.
    pub fn to_ring(&self) -> Vec<Coordinate<T>> {
        vec![
            self.min,
            Coordinate::new(self.max.lon, self.min.lat),
            self.max,
            Coordinate::new(self.min.lon, self.max.lat),
            self.min,
        ]
    }

    pub fn to_polygon(&self) -> Polygon<T> {
        Polygon {
            exterior: self.to_ring(),
            holes: Vec::new(),
        }
    }
}

/// Polygon with a counter-clockwise exterior ring and clockwise holes.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon<T> {
    exterior: Vec<Coordinate<T>>,
    holes: Vec<Vec<Coordinate<T>>>,
}

impl<T: GeoFloat> Polygon<T> {
    /// Validates ring closure and size, then normalizes orientation.
    pub fn new(
        exterior: Vec<Coordinate<T>>,
        holes: Vec<Vec<Coordinate<T>>>,
    ) -> Result<Self, GeomError> {
        let exterior = orient_ring(exterior, true)?;
        let holes = holes
            .into_iter()
            .map(|h| orient_ring(h, false))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Polygon { exterior, holes })
    }

    pub fn exterior(&self) -> &[Coordinate<T>] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Coordinate<T>>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Coordinate<T>]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }

    /// Same polygon with holes dropped.
    pub fn without_holes(&self) -> Self {
        Polygon {
            exterior: self.exterior.clone(),
            holes: Vec::new(),
        }
    }

    pub fn bbox(&self) -> Rectangle<T> {
        Rectangle::enclosing(self.exterior.iter().copied()).expect("validated ring")
    }

    /// Planar area in squared degrees (holes subtracted).
    pub fn area(&self) -> T {
        self.holes
            .iter()
            .fold(ring_area(&self.exterior), |a, h| a - ring_area(h).abs())
    }
}

fn orient_ring<T: GeoFloat>(
    ring: Vec<Coordinate<T>>,
    counter_clockwise: bool,
) -> Result<Vec<Coordinate<T>>, GeomError> {
    if ring.len() < 4 {
        return Err(GeomError::MalformedWkt(format!(
            "ring has {} points, at least 4 required",
            ring.len()
        )));
    }
    if ring.first() != ring.last() {
        return Err(GeomError::MalformedWkt("ring is not closed".into()));
    }
    let area = ring_area(&ring);
    if area == T::zero() {
        return Err(GeomError::MalformedWkt("ring has zero area".into()));
    }
    let mut ring = ring;
    if (area > T::zero()) != counter_clockwise {
        ring.reverse();
    }
    Ok(ring)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    Point,
    LineString,
    Polygon,
    MultiPolygon,
}

impl GeometryKind {
    pub fn wkt_keyword(self) -> &'static str {
        match self {
            GeometryKind::Point => "POINT",
            GeometryKind::LineString => "LINESTRING",
            GeometryKind::Polygon => "POLYGON",
            GeometryKind::MultiPolygon => "MULTIPOLYGON",
        }
    }

    /// Topological dimension of the point set.
    pub fn dimension(self) -> u8 {
        match self {
            GeometryKind::Point => 0,
            GeometryKind::LineString => 1,
            GeometryKind::Polygon | GeometryKind::MultiPolygon => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    Point(Coordinate<T>),
    LineString(Vec<Coordinate<T>>),
    Polygon(Polygon<T>),
    MultiPolygon(Vec<Polygon<T>>),
}

/// A validated geometry together with its CRS and bounding box.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry<T> {
    shape: Shape<T>,
    crs: String,
    bbox: Rectangle<T>,
}

impl<T: GeoFloat> Geometry<T> {
    /// Builds a geometry in the default CRS after validating its shape.
    pub fn new(shape: Shape<T>) -> Result<Self, GeomError> {
        Self::with_crs(shape, DEFAULT_CRS)
    }

    pub fn with_crs(shape: Shape<T>, crs: impl Into<String>) -> Result<Self, GeomError> {
        match &shape {
            Shape::LineString(pts) if pts.len() < 2 => {
                return Err(GeomError::MalformedWkt(
                    "linestring needs at least 2 points".into(),
                ))
            }
            Shape::MultiPolygon(ms) if ms.is_empty() => {
                return Err(GeomError::MalformedWkt(
                    "multipolygon needs at least one member".into(),
                ))
            }
            _ => {}
        }
        let mut bbox: Option<Rectangle<T>> = None;
        for c in coords_of(&shape) {
            c.check_range()?;
            bbox = Some(match bbox {
                None => Rectangle::of_point(c),
                Some(b) => b.extend(c),
            });
        }
        Ok(Geometry {
            shape,
            crs: crs.into(),
            bbox: bbox.ok_or(GeomError::EmptyInput)?,
        })
    }

    pub fn point(lon: T, lat: T) -> Result<Self, GeomError> {
        Self::new(Shape::Point(Coordinate::new(lon, lat)))
    }

    pub fn rectangle(r: Rectangle<T>) -> Result<Self, GeomError> {
        Self::new(Shape::Polygon(Polygon::new(r.to_ring(), Vec::new())?))
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn crs(&self) -> &str {
        &self.crs
    }

    pub fn bbox(&self) -> Rectangle<T> {
        self.bbox
    }

    pub fn kind(&self) -> GeometryKind {
        match self.shape {
            Shape::Point(_) => GeometryKind::Point,
            Shape::LineString(_) => GeometryKind::LineString,
            Shape::Polygon(_) => GeometryKind::Polygon,
            Shape::MultiPolygon(_) => GeometryKind::MultiPolygon,
        }
    }

    pub fn dimension(&self) -> u8 {
        self.kind().dimension()
    }

    pub fn coords(&self) -> impl Iterator<Item = Coordinate<T>> + '_ {
        coords_of(&self.shape)
    }

    /// Member polygons (empty for points and lines).
    pub fn polygons(&self) -> &[Polygon<T>] {
        match &self.shape {
            Shape::Polygon(p) => std::slice::from_ref(p),
            Shape::MultiPolygon(ps) => ps,
            _ => &[],
        }
    }

    /// Ring points excluding each ring's closing repetition; points and
    /// line vertices count once each.
    pub fn coordinate_count(&self) -> usize {
        match &self.shape {
            Shape::Point(_) => 1,
            Shape::LineString(p) => p.len(),
            Shape::Polygon(_) | Shape::MultiPolygon(_) => self
                .polygons()
                .iter()
                .flat_map(|p| p.rings())
                .map(|r| r.len() - 1)
                .sum(),
        }
    }

    /// Same shape re-tagged with another CRS URI (no transformation).
    pub fn in_crs(mut self, crs: impl Into<String>) -> Self {
        self.crs = crs.into();
        self
    }
}

fn coords_of<T: Copy>(shape: &Shape<T>) -> Box<dyn Iterator<Item = Coordinate<T>> + '_> {
    match shape {
        Shape::Point(c) => Box::new(std::iter::once(*c)),
        Shape::LineString(p) => Box::new(p.iter().copied()),
        Shape::Polygon(p) => Box::new(
            std::iter::once(&p.exterior)
                .chain(p.holes.iter())
                .flat_map(|r| r.iter().copied()),
        ),
        Shape::MultiPolygon(ps) => Box::new(ps.iter().flat_map(|p| {
            std::iter::once(&p.exterior)
                .chain(p.holes.iter())
                .flat_map(|r| r.iter().copied())
        })),
    }
}

/// Minimum bounding box of a geometry collection.
pub fn mbb<'a, T: GeoFloat>(
    geometries: impl IntoIterator<Item = &'a Geometry<T>>,
) -> Result<Rectangle<T>, GeomError> {
    geometries
        .into_iter()
        .map(Geometry::bbox)
        .reduce(Rectangle::union)
        .ok_or(GeomError::EmptyInput)
}
