//! Source selection for federations of GeoSPARQL endpoints.

pub mod federation;
pub mod geom;
pub mod query;
pub mod selector;
pub mod store;
pub mod summaries;
pub mod syntax;
pub mod vocab;

pub use geom::{GeoFloat, GeomError, Relation};

pub type Coordinate = geom::Coordinate<f64>;
pub type Rectangle = geom::Rectangle<f64>;
pub type Polygon = geom::Polygon<f64>;
pub type Shape = geom::Shape<f64>;
pub type Geometry = geom::Geometry<f64>;
pub type PreparedGeometry = geom::PreparedGeometry<f64>;
