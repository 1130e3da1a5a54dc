use std::fmt;

use super::prepared::{PreparedGeometry, Segment};
use super::{Coordinate, GeoFloat, GeomError, Rectangle};

const UOM: &str = "http://www.opengis.net/def/uom/OGC/1.0/";

// WGS84 ellipsoid.
const WGS84_A: f64 = 6_378_137.0;
const WGS84_F: f64 = 1.0 / 298.257_223_563;
const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);
const MEAN_RADIUS: f64 = 6_371_008.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LengthUnit {
    Metre,
    Kilometre,
}

impl LengthUnit {
    /// Accepts `uom:metre` / `uom:kilometre` (and the `-er` spellings).
    pub fn from_uri(uri: &str) -> Result<Self, GeomError> {
        match uri.strip_prefix(UOM) {
            Some("metre" | "meter") => Ok(LengthUnit::Metre),
            Some("kilometre" | "kilometer") => Ok(LengthUnit::Kilometre),
            _ => Err(GeomError::UnsupportedUnit(uri.to_string())),
        }
    }

    pub fn uri(self) -> String {
        format!("{UOM}{}", self.local_name())
    }

    pub fn local_name(self) -> &'static str {
        match self {
            LengthUnit::Metre => "metre",
            LengthUnit::Kilometre => "kilometre",
        }
    }

    fn scale_metres(self, m: f64) -> f64 {
        match self {
            LengthUnit::Metre => m,
            LengthUnit::Kilometre => m / 1000.0,
        }
    }
}

impl fmt::Display for LengthUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.local_name())
    }
}

/// Ellipsoidal distance in metres between two lon/lat points (Vincenty's
/// inverse formula; falls back to haversine on the mean sphere when the
/// iteration does not converge, which only happens for near-antipodal pairs).
pub fn geodesic_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    if a == b {
        return 0.0;
    }
    vincenty(a, b).unwrap_or_else(|| haversine(a, b))
}

fn haversine((lon1, lat1): (f64, f64), (lon2, lat2): (f64, f64)) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * MEAN_RADIUS * h.sqrt().min(1.0).asin()
}

fn vincenty((lon1, lat1): (f64, f64), (lon2, lat2): (f64, f64)) -> Option<f64> {
    let f = WGS84_F;
    let l = (lon2 - lon1).to_radians();
    let u1 = ((1.0 - f) * lat1.to_radians().tan()).atan();
    let u2 = ((1.0 - f) * lat2.to_radians().tan()).atan();
    let (su1, cu1) = u1.sin_cos();
    let (su2, cu2) = u2.sin_cos();
    let mut lambda = l;
    for _ in 0..200 {
        let (sl, cl) = lambda.sin_cos();
        let sin_sigma = ((cu2 * sl).powi(2) + (cu1 * su2 - su1 * cu2 * cl).powi(2)).sqrt();
        if sin_sigma == 0.0 {
            return Some(0.0);
        }
        let cos_sigma = su1 * su2 + cu1 * cu2 * cl;
        let sigma = sin_sigma.atan2(cos_sigma);
        let sin_alpha = cu1 * cu2 * sl / sin_sigma;
        let cos2_alpha = 1.0 - sin_alpha * sin_alpha;
        let cos_2sm = if cos2_alpha == 0.0 {
            0.0
        } else {
            cos_sigma - 2.0 * su1 * su2 / cos2_alpha
        };
        let c = f / 16.0 * cos2_alpha * (4.0 + f * (4.0 - 3.0 * cos2_alpha));
        let prev = lambda;
        lambda = l
            + (1.0 - c)
                * f
                * sin_alpha
                * (sigma + c * sin_sigma * (cos_2sm + c * cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)));
        if (lambda - prev).abs() < 1e-12 {
            let u_sq = cos2_alpha * (WGS84_A.powi(2) - WGS84_B.powi(2)) / WGS84_B.powi(2);
            let a = 1.0 + u_sq / 16384.0 * (4096.0 + u_sq * (-768.0 + u_sq * (320.0 - 175.0 * u_sq)));
            let b = u_sq / 1024.0 * (256.0 + u_sq * (-128.0 + u_sq * (74.0 - 47.0 * u_sq)));
            let delta_sigma = b
                * sin_sigma
                * (cos_2sm
                    + b / 4.0
                        * (cos_sigma * (-1.0 + 2.0 * cos_2sm * cos_2sm)
                            - b / 6.0
                                * cos_2sm
                                * (-3.0 + 4.0 * sin_sigma * sin_sigma)
                                * (-3.0 + 4.0 * cos_2sm * cos_2sm)));
            return Some(WGS84_B * a * (sigma - delta_sigma));
        }
    }
    None
}

/// Meridional and prime-vertical radii of curvature at latitude `phi` (radians).
fn radii(phi: f64) -> (f64, f64) {
    let e2 = WGS84_F * (2.0 - WGS84_F);
    let w = (1.0 - e2 * phi.sin().powi(2)).sqrt();
    (WGS84_A * (1.0 - e2) / (w * w * w), WGS84_A / w)
}

fn ll<T: GeoFloat>(c: Coordinate<T>) -> (f64, f64) {
    (c.lon.to_f64().unwrap(), c.lat.to_f64().unwrap())
}

/// Distance in metres from `p` to segment `s`, measured in an
/// equirectangular frame centred on the mean latitude of the three points.
/// Never exceeds the ellipsoidal distance to either end point, so the two
/// measures agree on shared vertices.
pub(crate) fn vertex_segment_metres(p: (f64, f64), s: ((f64, f64), (f64, f64))) -> f64 {
    let (a, b) = s;
    let phi0 = ((p.1 + a.1 + b.1) / 3.0).to_radians();
    let (m, n) = radii(phi0);
    let kx = n * phi0.cos();
    let to_xy = |q: (f64, f64)| ((q.0 - p.0).to_radians() * kx, (q.1 - p.1).to_radians() * m);
    let (ax, ay) = to_xy(a);
    let (bx, by) = to_xy(b);
    let (dx, dy) = (bx - ax, by - ay);
    let l2 = dx * dx + dy * dy;
    let t = if l2 == 0.0 {
        0.0
    } else {
        (-(ax * dx + ay * dy) / l2).clamp(0.0, 1.0)
    };
    // The frame distorts long segments; the endpoints are exact upper bounds.
    let ends = geodesic_distance(p, a).min(geodesic_distance(p, b));
    if t == 0.0 || t == 1.0 {
        ends
    } else {
        (ax + t * dx).hypot(ay + t * dy).min(ends)
    }
}

/// A connected piece used for distance: its box, vertices and segments.
struct Part<T> {
    bbox: Rectangle<T>,
    vertices: Vec<(f64, f64)>,
    segments: Vec<((f64, f64), (f64, f64))>,
}

fn parts<T: GeoFloat>(g: &PreparedGeometry<T>) -> Vec<Part<T>> {
    use super::prepared::ring_edges;
    use super::Shape;
    let seg_pairs = |segs: &[Segment<T>]| -> Vec<((f64, f64), (f64, f64))> {
        segs.iter().map(|s| (ll(s.a), ll(s.b))).collect()
    };
    match g.geometry().shape() {
        Shape::Point(c) => vec![Part {
            bbox: Rectangle::of_point(*c),
            vertices: vec![ll(*c)],
            segments: Vec::new(),
        }],
        Shape::LineString(pts) => vec![Part {
            bbox: g.bbox(),
            vertices: pts.iter().map(|c| ll(*c)).collect(),
            segments: seg_pairs(&g.segments),
        }],
        Shape::Polygon(_) | Shape::MultiPolygon(_) => g
            .geometry()
            .polygons()
            .iter()
            .map(|p| Part {
                bbox: p.bbox(),
                vertices: p.rings().flat_map(|r| r.iter().map(|c| ll(*c))).collect(),
                segments: seg_pairs(&ring_edges(p)),
            })
            .collect(),
    }
}

/// Lower bound in metres on the distance between two boxes.
fn box_gap_metres<T: GeoFloat>(a: &Rectangle<T>, b: &Rectangle<T>) -> f64 {
    let (a0, a1) = (ll(a.min), ll(a.max));
    let (b0, b1) = (ll(b.min), ll(b.max));
    let dlon = (b0.0 - a1.0).max(a0.0 - b1.0).max(0.0).to_radians();
    let dlat = (b0.1 - a1.1).max(a0.1 - b1.1).max(0.0).to_radians();
    let max_abs_lat = a0.1.abs().max(a1.1.abs()).max(b0.1.abs()).max(b1.1.abs());
    let (m_eq, _) = radii(0.0);
    let kx = WGS84_A * max_abs_lat.to_radians().cos();
    // Slack for the planar approximation and Vincenty/planar switch-over.
    (dlat * m_eq).hypot(dlon * kx) * (1.0 - 1e-6)
}

fn part_distance<T>(a: &Part<T>, b: &Part<T>) -> f64 {
    if a.segments.is_empty() && b.segments.is_empty() {
        return a
            .vertices
            .iter()
            .flat_map(|&v| b.vertices.iter().map(move |&w| geodesic_distance(v, w)))
            .fold(f64::INFINITY, f64::min);
    }
    let mut best = f64::INFINITY;
    for (p, q) in [(a, b), (b, a)] {
        for &v in &p.vertices {
            for &s in &q.segments {
                best = best.min(vertex_segment_metres(v, s));
            }
        }
    }
    best
}

/// Minimum distance between two geometries in the requested unit; zero when
/// they intersect.
pub fn distance<T: GeoFloat>(
    a: &PreparedGeometry<T>,
    b: &PreparedGeometry<T>,
    unit: &str,
) -> Result<T, GeomError> {
    let unit = LengthUnit::from_uri(unit)?;
    if a.intersects(b)? {
        return Ok(T::zero());
    }
    let pa = parts(a);
    let pb = parts(b);
    let mut pairs: Vec<(f64, usize, usize)> = pa
        .iter()
        .enumerate()
        .flat_map(|(i, x)| pb.iter().enumerate().map(move |(j, y)| (box_gap_metres(&x.bbox, &y.bbox), i, j)))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut best = f64::INFINITY;
    for (gap, i, j) in pairs {
        if gap > best {
            break;
        }
        best = best.min(part_distance(&pa[i], &pb[j]));
    }
    Ok(T::from_f64(unit.scale_metres(best)).unwrap())
}
