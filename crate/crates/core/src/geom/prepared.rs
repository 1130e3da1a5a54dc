use rstar::primitives::{GeomWithData, Rectangle as RBox};
use rstar::{RTree, AABB};

use super::{Coordinate, GeoFloat, Geometry, Polygon, Rectangle, Shape};

/// Segment count above which an R-tree replaces the linear scan.
const INDEX_THRESHOLD: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Segment<T> {
    pub a: Coordinate<T>,
    pub b: Coordinate<T>,
}

impl<T: GeoFloat> Segment<T> {
    pub fn new(a: Coordinate<T>, b: Coordinate<T>) -> Self {
        Segment { a, b }
    }

    pub fn dir(&self) -> Coordinate<T> {
        self.b.sub(self.a)
    }

    pub fn len(&self) -> T {
        self.dir().norm()
    }

    pub fn bbox(&self) -> Rectangle<T> {
        Rectangle::new(self.a, self.b)
    }

    pub fn at(&self, t: T) -> Coordinate<T> {
        self.a.add(self.dir().scale(t))
    }

    /// Parameter of the closest point to `p`, clamped to [0, 1].
    pub fn project(&self, p: Coordinate<T>) -> T {
        let d = self.dir();
        let l2 = d.dot(d);
        if l2 == T::zero() {
            return T::zero();
        }
        (p.sub(self.a).dot(d) / l2).max(T::zero()).min(T::one())
    }

    pub fn distance_to(&self, p: Coordinate<T>) -> T {
        self.at(self.project(p)).sub(p).norm()
    }
}

/// Location of a point relative to a geometry's point set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Loc {
    Interior = 0,
    Boundary = 1,
    Exterior = 2,
}

#[derive(Debug)]
struct SegmentIndex<T: GeoFloat> {
    tree: Option<RTree<GeomWithData<RBox<[T; 2]>, usize>>>,
}

impl<T: GeoFloat> SegmentIndex<T> {
    fn build(segs: &[Segment<T>]) -> Self {
        if segs.len() <= INDEX_THRESHOLD {
            return SegmentIndex { tree: None };
        }
        let items = segs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let b = s.bbox();
                GeomWithData::new(
                    RBox::from_corners([b.min.lon, b.min.lat], [b.max.lon, b.max.lat]),
                    i,
                )
            })
            .collect();
        SegmentIndex {
            tree: Some(RTree::bulk_load(items)),
        }
    }

    fn for_each(&self, segs: &[Segment<T>], env: &Rectangle<T>, mut f: impl FnMut(usize)) {
        let eps = T::tolerance();
        match &self.tree {
            Some(tree) => {
                let env = env.buffer(eps);
                let q = AABB::from_corners([env.min.lon, env.min.lat], [env.max.lon, env.max.lat]);
                for item in tree.locate_in_envelope_intersecting(&q) {
                    f(item.data);
                }
            }
            None => {
                for (i, s) in segs.iter().enumerate() {
                    if s.bbox().intersects(env, eps) {
                        f(i);
                    }
                }
            }
        }
    }
}

/// A geometry with the derived linework needed by predicates and distance.
///
/// For areal geometries `segments` is the boundary of the point-set union of
/// the member polygons, each edge oriented so the interior lies on its left.
/// Edges shared by two members (seams) and edges covered by another member
/// are not part of it.
#[derive(Debug)]
pub struct PreparedGeometry<T: GeoFloat> {
    geometry: Geometry<T>,
    pub(crate) segments: Vec<Segment<T>>,
    index: SegmentIndex<T>,
    /// Line end points (boundary of a non-closed linestring).
    pub(crate) ends: Vec<Coordinate<T>>,
    /// All member ring edges; only populated for multi-member areal geometries.
    member_edges: Vec<Segment<T>>,
    member_index: SegmentIndex<T>,
    member_boxes: Vec<Rectangle<T>>,
}

impl<T: GeoFloat> PreparedGeometry<T> {
    pub fn new(geometry: Geometry<T>) -> Self {
        let eps = T::tolerance();
        let mut ends = Vec::new();
        let mut member_edges = Vec::new();
        let segments = match geometry.shape() {
            Shape::Point(_) => Vec::new(),
            Shape::LineString(pts) => {
                let first = pts[0];
                let last = pts[pts.len() - 1];
                if !first.close_to(last, eps) {
                    ends = vec![first, last];
                }
                pts.windows(2)
                    .filter(|w| !w[0].close_to(w[1], T::zero()))
                    .map(|w| Segment::new(w[0], w[1]))
                    .collect()
            }
            Shape::Polygon(p) => ring_edges(p),
            Shape::MultiPolygon(ps) if ps.len() == 1 => ring_edges(&ps[0]),
            Shape::MultiPolygon(ps) => {
                member_edges = ps.iter().flat_map(ring_edges).collect();
                Vec::new()
            }
        };
        let member_boxes = geometry.polygons().iter().map(Polygon::bbox).collect();
        let member_index = SegmentIndex::build(&member_edges);
        let mut prepared = PreparedGeometry {
            geometry,
            index: SegmentIndex::build(&segments),
            segments,
            ends,
            member_edges,
            member_index,
            member_boxes,
        };
        if !prepared.member_edges.is_empty() {
            prepared.segments = prepared.union_boundary();
            prepared.index = SegmentIndex::build(&prepared.segments);
        }
        prepared
    }

    pub fn geometry(&self) -> &Geometry<T> {
        &self.geometry
    }

    pub fn dimension(&self) -> u8 {
        self.geometry.dimension()
    }

    pub fn bbox(&self) -> Rectangle<T> {
        self.geometry.bbox()
    }

    pub(crate) fn points(&self) -> &[Coordinate<T>] {
        match self.geometry.shape() {
            Shape::Point(c) => std::slice::from_ref(c),
            _ => &[],
        }
    }

    pub(crate) fn segments_near(&self, env: &Rectangle<T>, f: impl FnMut(usize)) {
        self.index.for_each(&self.segments, env, f);
    }

    /// Locates `p` as interior, boundary or exterior of this point set.
    pub(crate) fn locate(&self, p: Coordinate<T>) -> Loc {
        let eps = T::tolerance();
        if !self.bbox().contains_coord(p, eps) {
            return Loc::Exterior;
        }
        match self.dimension() {
            0 => {
                if self.points().iter().any(|q| q.close_to(p, eps)) {
                    Loc::Interior
                } else {
                    Loc::Exterior
                }
            }
            1 => {
                if self.ends.iter().any(|q| q.close_to(p, eps)) {
                    Loc::Boundary
                } else if self.near_segment(p) {
                    Loc::Interior
                } else {
                    Loc::Exterior
                }
            }
            _ => {
                if self.near_segment(p) {
                    return Loc::Boundary;
                }
                if !self.member_edges.is_empty() {
                    let mut seam = false;
                    let env = Rectangle::of_point(p);
                    self.member_index.for_each(&self.member_edges, &env, |i| {
                        seam |= self.member_edges[i].distance_to(p) <= eps;
                    });
                    if seam {
                        return Loc::Interior;
                    }
                }
                let polys = self.geometry.polygons();
                let inside = polys.iter().zip(&self.member_boxes).any(|(poly, bx)| {
                    bx.contains_coord(p, eps) && ray_cast_inside(poly, p)
                });
                if inside {
                    Loc::Interior
                } else {
                    Loc::Exterior
                }
            }
        }
    }

    fn near_segment(&self, p: Coordinate<T>) -> bool {
        let eps = T::tolerance();
        let mut hit = false;
        self.segments_near(&Rectangle::of_point(p), |i| {
            hit |= self.segments[i].distance_to(p) <= eps;
        });
        hit
    }

    /// Boundary of the union of the member polygons, as left-interior edges.
    fn union_boundary(&self) -> Vec<Segment<T>> {
        let eps = T::tolerance();
        let polys = self.geometry.polygons();
        // Map each member edge back to its polygon.
        let mut owner = Vec::with_capacity(self.member_edges.len());
        for (m, p) in polys.iter().enumerate() {
            owner.extend(std::iter::repeat_n(m, ring_edges(p).len()));
        }
        let mut out = Vec::new();
        let mut params = Vec::new();
        for (ei, e) in self.member_edges.iter().enumerate() {
            let me = owner[ei];
            params.clear();
            self.member_index.for_each(&self.member_edges, &e.bbox(), |j| {
                if owner[j] != me {
                    split_params(e, &self.member_edges[j], &mut params);
                }
            });
            for piece in pieces(e, &mut params) {
                let mid = piece.at(T::from_f64(0.5).unwrap());
                let mut keep = true;
                for (m, poly) in polys.iter().enumerate() {
                    if m == me || !self.member_boxes[m].contains_coord(mid, eps) {
                        continue;
                    }
                    match locate_in_polygon(poly, mid) {
                        Loc::Interior => keep = false,
                        Loc::Boundary => match collinear_direction(poly, &piece) {
                            Some(true) if m < me => keep = false,
                            Some(false) => keep = false,
                            _ => {}
                        },
                        Loc::Exterior => {}
                    }
                    if !keep {
                        break;
                    }
                }
                if keep {
                    out.push(piece);
                }
            }
        }
        out
    }
}

pub(crate) fn ring_edges<T: GeoFloat>(p: &Polygon<T>) -> Vec<Segment<T>> {
    p.rings()
        .flat_map(|r| r.windows(2).map(|w| Segment::new(w[0], w[1])))
        .filter(|s| s.a != s.b)
        .collect()
}

/// Even-odd ray cast against the exterior and hole rings.
fn ray_cast_inside<T: GeoFloat>(poly: &Polygon<T>, p: Coordinate<T>) -> bool {
    let mut inside = false;
    for ring in poly.rings() {
        for w in ring.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.lat > p.lat) != (b.lat > p.lat) {
                let x = a.lon + (p.lat - a.lat) / (b.lat - a.lat) * (b.lon - a.lon);
                if p.lon < x {
                    inside = !inside;
                }
            }
        }
    }
    inside
}

pub(crate) fn locate_in_polygon<T: GeoFloat>(poly: &Polygon<T>, p: Coordinate<T>) -> Loc {
    let eps = T::tolerance();
    let on_edge = poly
        .rings()
        .flat_map(|r| r.windows(2))
        .any(|w| Segment::new(w[0], w[1]).distance_to(p) <= eps);
    if on_edge {
        Loc::Boundary
    } else if ray_cast_inside(poly, p) {
        Loc::Interior
    } else {
        Loc::Exterior
    }
}

/// `Some(true)` when `piece` runs along an edge of `poly` in the same
/// direction, `Some(false)` for the opposite direction.
fn collinear_direction<T: GeoFloat>(poly: &Polygon<T>, piece: &Segment<T>) -> Option<bool> {
    let mut found = None;
    for e in ring_edges(poly) {
        if let Some(same) = collinear_with(piece, &e) {
            if !same {
                return Some(false);
            }
            found = Some(true);
        }
    }
    found
}

/// Direction agreement when `piece` lies on `edge` within tolerance.
pub(crate) fn collinear_with<T: GeoFloat>(piece: &Segment<T>, edge: &Segment<T>) -> Option<bool> {
    let eps = T::tolerance();
    if edge.distance_to(piece.a) <= eps && edge.distance_to(piece.b) <= eps {
        Some(piece.dir().dot(edge.dir()) > T::zero())
    } else {
        None
    }
}

/// Appends the parameters along `s` where it meets `other`.
pub(crate) fn split_params<T: GeoFloat>(s: &Segment<T>, other: &Segment<T>, out: &mut Vec<T>) {
    let eps = T::tolerance();
    for q in [other.a, other.b] {
        if s.distance_to(q) <= eps {
            out.push(s.project(q));
        }
    }
    let d = s.dir();
    let e = other.dir();
    let denom = d.cross(e);
    let scale = d.norm() * e.norm();
    if scale == T::zero() || denom.abs() <= scale * T::epsilon() * T::from_f64(16.0).unwrap() {
        return;
    }
    let w = other.a.sub(s.a);
    let t = w.cross(e) / denom;
    let u = w.cross(d) / denom;
    if (T::zero()..=T::one()).contains(&t) && (T::zero()..=T::one()).contains(&u) {
        out.push(t);
    }
}

/// Splits `s` at the given parameters into pieces longer than the tolerance.
/// Interior split parameters that survive de-duplication remain in `params`.
pub(crate) fn pieces<T: GeoFloat>(s: &Segment<T>, params: &mut Vec<T>) -> Vec<Segment<T>> {
    let eps = T::tolerance();
    let len = s.len();
    if len == T::zero() {
        params.clear();
        return Vec::new();
    }
    params.retain(|t| *t * len > eps && (T::one() - *t) * len > eps);
    params.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    params.dedup_by(|b, a| (*b - *a) * len <= eps);
    let mut out = Vec::with_capacity(params.len() + 1);
    let mut prev = T::zero();
    for &t in params.iter().chain(std::iter::once(&T::one())) {
        out.push(Segment::new(s.at(prev), if t == T::one() { s.b } else { s.at(t) }));
        prev = t;
    }
    if let Some(first) = out.first_mut() {
        first.a = s.a;
    }
    out
}
