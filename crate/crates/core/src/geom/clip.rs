use super::prepared::{locate_in_polygon, Loc};
use super::{Coordinate, GeoFloat, Geometry, Polygon, Shape};

/// Signed shoelace area of a closed ring (positive when counter-clockwise).
pub fn ring_area<T: GeoFloat>(ring: &[Coordinate<T>]) -> T {
    let two = T::one() + T::one();
    ring.windows(2)
        .fold(T::zero(), |acc, w| acc + w[0].cross(w[1]))
        / two
}

/// True for a hole-free polygon whose exterior turns left at every vertex.
pub fn is_convex<T: GeoFloat>(p: &Polygon<T>) -> bool {
    if !p.holes().is_empty() {
        return false;
    }
    let ring = &p.exterior()[..p.exterior().len() - 1];
    let n = ring.len();
    let eps = T::tolerance();
    (0..n).all(|i| {
        let a = ring[i];
        let b = ring[(i + 1) % n];
        let c = ring[(i + 2) % n];
        let u = b.sub(a);
        let v = c.sub(b);
        u.cross(v) >= -eps * u.norm().max(v.norm())
    })
}

/// Intersection of `g` with a convex polygon, as zero or more geometries.
///
/// Polygons are clipped with the Sutherland-Hodgman sweep. A result with no
/// area (a shape that only touches the clip boundary) collapses to a point
/// or line. Lines may split into several pieces.
pub fn clip_to_convex<T: GeoFloat>(g: &Geometry<T>, clip: &Polygon<T>) -> Vec<Geometry<T>> {
    if !g.bbox().intersects(&clip.bbox(), T::tolerance()) {
        return Vec::new();
    }
    let crs = g.crs();
    let mut out = Vec::new();
    match g.shape() {
        Shape::Point(c) => {
            if locate_in_polygon(clip, *c) != Loc::Exterior {
                out.push(g.clone());
            }
        }
        Shape::LineString(pts) => {
            for piece in clip_line(pts, clip) {
                out.extend(from_points(piece, crs));
            }
        }
        Shape::Polygon(_) | Shape::MultiPolygon(_) => {
            let mut polys = Vec::new();
            for p in g.polygons() {
                match clip_polygon(p, clip) {
                    Clipped::Empty => {}
                    Clipped::Area(p) => polys.push(p),
                    Clipped::Degenerate(pts) => out.extend(from_points(pts, crs)),
                }
            }
            let shape = match polys.len() {
                0 => None,
                1 => Some(Shape::Polygon(polys.pop().unwrap())),
                _ => Some(Shape::MultiPolygon(polys)),
            };
            if let Some(shape) = shape {
                out.insert(0, Geometry::with_crs(shape, crs).expect("clip keeps coordinates in range"));
            }
        }
    }
    out
}

enum Clipped<T> {
    Empty,
    Area(Polygon<T>),
    Degenerate(Vec<Coordinate<T>>),
}

fn clip_polygon<T: GeoFloat>(p: &Polygon<T>, clip: &Polygon<T>) -> Clipped<T> {
    let exterior = sutherland_hodgman(p.exterior(), clip);
    if exterior.is_empty() {
        return Clipped::Empty;
    }
    let Some(exterior) = close_ring(exterior.clone()) else {
        return Clipped::Degenerate(exterior);
    };
    let holes = p
        .holes()
        .iter()
        .filter_map(|h| close_ring(sutherland_hodgman(h, clip)))
        .collect();
    match Polygon::new(exterior, holes) {
        Ok(p) => Clipped::Area(p),
        Err(_) => Clipped::Empty,
    }
}

/// Clips the open ring of `ring` against each edge of the counter-clockwise `clip`.
fn sutherland_hodgman<T: GeoFloat>(ring: &[Coordinate<T>], clip: &Polygon<T>) -> Vec<Coordinate<T>> {
    let eps = T::tolerance();
    let mut poly: Vec<Coordinate<T>> = ring[..ring.len() - 1].to_vec();
    for w in clip.exterior().windows(2) {
        if poly.is_empty() {
            break;
        }
        let (a, b) = (w[0], w[1]);
        let d = b.sub(a);
        let len = d.norm();
        let side = |p: Coordinate<T>| d.cross(p.sub(a)) / len;
        let inside = |p: Coordinate<T>| side(p) >= -eps;
        let mut next = Vec::with_capacity(poly.len() + 2);
        for i in 0..poly.len() {
            let cur = poly[i];
            let prev = poly[(i + poly.len() - 1) % poly.len()];
            let (ci, pi) = (inside(cur), inside(prev));
            if ci != pi {
                let (sp, sc) = (side(prev), side(cur));
                let t = sp / (sp - sc);
                next.push(prev.add(cur.sub(prev).scale(t)));
            }
            if ci {
                next.push(cur);
            }
        }
        poly = next;
    }
    poly.dedup_by(|b, a| a.close_to(*b, eps));
    while poly.len() > 1 && poly[0].close_to(poly[poly.len() - 1], eps) {
        poly.pop();
    }
    poly
}

/// Closes an open ring; `None` if it has no area.
fn close_ring<T: GeoFloat>(mut pts: Vec<Coordinate<T>>) -> Option<Vec<Coordinate<T>>> {
    if pts.len() < 3 {
        return None;
    }
    pts.push(pts[0]);
    let eps = T::tolerance();
    let diameter = super::Rectangle::enclosing(pts.iter().copied())?.diagonal();
    if ring_area(&pts).abs() <= eps * diameter {
        return None;
    }
    Some(pts)
}

/// Cyrus-Beck clipping of every segment, joining contiguous results.
fn clip_line<T: GeoFloat>(pts: &[Coordinate<T>], clip: &Polygon<T>) -> Vec<Vec<Coordinate<T>>> {
    let eps = T::tolerance();
    let mut runs: Vec<Vec<Coordinate<T>>> = Vec::new();
    for w in pts.windows(2) {
        let Some((a, b)) = clip_segment(w[0], w[1], clip) else {
            continue;
        };
        match runs.last_mut() {
            Some(run) if run.last().is_some_and(|l| l.close_to(a, eps)) => run.push(b),
            _ => runs.push(vec![a, b]),
        }
    }
    runs
}

fn clip_segment<T: GeoFloat>(
    p: Coordinate<T>,
    q: Coordinate<T>,
    clip: &Polygon<T>,
) -> Option<(Coordinate<T>, Coordinate<T>)> {
    let eps = T::tolerance();
    let d = q.sub(p);
    let (mut t0, mut t1) = (T::zero(), T::one());
    for w in clip.exterior().windows(2) {
        let e = w[1].sub(w[0]);
        let len = e.norm();
        // Signed distance to the edge line, positive inside.
        let num = e.cross(p.sub(w[0])) / len + eps;
        let den = e.cross(d) / len;
        if den == T::zero() {
            if num < T::zero() {
                return None;
            }
            continue;
        }
        let t = -num / den;
        if den > T::zero() {
            t0 = t0.max(t);
        } else {
            t1 = t1.min(t);
        }
        if t0 > t1 {
            return None;
        }
    }
    Some((p.add(d.scale(t0)), p.add(d.scale(t1))))
}

fn from_points<T: GeoFloat>(pts: Vec<Coordinate<T>>, crs: &str) -> Option<Geometry<T>> {
    let eps = T::tolerance();
    let first = *pts.first()?;
    // Farthest pair approximated by the two points farthest from the first.
    let far = pts
        .iter()
        .copied()
        .max_by(|a, b| a.sub(first).norm().partial_cmp(&b.sub(first).norm()).unwrap())?;
    let shape = if far.close_to(first, eps) {
        Shape::Point(first)
    } else if pts.len() == 2 || is_collinear(&pts) {
        let other = pts
            .iter()
            .copied()
            .max_by(|a, b| a.sub(far).norm().partial_cmp(&b.sub(far).norm()).unwrap())?;
        Shape::LineString(vec![far, other])
    } else {
        Shape::LineString(pts)
    };
    Geometry::with_crs(shape, crs).ok()
}

fn is_collinear<T: GeoFloat>(pts: &[Coordinate<T>]) -> bool {
    let eps = T::tolerance();
    let a = pts[0];
    let Some(b) = pts.iter().copied().find(|p| !p.close_to(a, eps)) else {
        return true;
    };
    let d = b.sub(a);
    let len = d.norm();
    pts.iter().all(|p| (d.cross(p.sub(a)) / len).abs() <= eps)
}
