use std::fmt;
use std::str::FromStr;

use super::prepared::{collinear_with, pieces, split_params, Loc, PreparedGeometry, Segment};
use super::{Coordinate, GeoFloat, GeomError};

/// The simple-features relation functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    Equals,
    Disjoint,
    Intersects,
    Touches,
    Within,
    Contains,
    Overlaps,
    Crosses,
}

impl Relation {
    pub const ALL: [Relation; 8] = [
        Relation::Equals,
        Relation::Disjoint,
        Relation::Intersects,
        Relation::Touches,
        Relation::Within,
        Relation::Contains,
        Relation::Overlaps,
        Relation::Crosses,
    ];

    /// Local name of the `geof:` function, e.g. `sfWithin`.
    pub fn function_name(self) -> &'static str {
        match self {
            Relation::Equals => "sfEquals",
            Relation::Disjoint => "sfDisjoint",
            Relation::Intersects => "sfIntersects",
            Relation::Touches => "sfTouches",
            Relation::Within => "sfWithin",
            Relation::Contains => "sfContains",
            Relation::Overlaps => "sfOverlaps",
            Relation::Crosses => "sfCrosses",
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.function_name())
    }
}

impl FromStr for Relation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Relation::ALL
            .into_iter()
            .find(|r| r.function_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown relation `{s}`"))
    }
}

const I: usize = 0;
const B: usize = 1;
const E: usize = 2;

/// Dimensionally extended 9-intersection matrix; `None` is the empty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntersectionMatrix {
    cells: [[Option<u8>; 3]; 3],
    dims: (u8, u8),
}

impl IntersectionMatrix {
    fn new(dims: (u8, u8)) -> Self {
        let mut cells = [[None; 3]; 3];
        cells[E][E] = Some(2);
        IntersectionMatrix { cells, dims }
    }

    fn set(&mut self, row: usize, col: usize, dim: u8) {
        let c = &mut self.cells[row][col];
        *c = Some(c.map_or(dim, |d| d.max(dim)));
    }

    fn has(&self, row: usize, col: usize) -> bool {
        self.cells[row][col].is_some()
    }

    /// The nine cells in row-major order as a DE-9IM string (`F`, `0`, `1`, `2`).
    pub fn pattern(&self) -> String {
        self.cells
            .iter()
            .flatten()
            .map(|c| match c {
                None => 'F',
                Some(d) => char::from(b'0' + d),
            })
            .collect()
    }

    pub fn intersects(&self) -> bool {
        self.has(I, I) || self.has(I, B) || self.has(B, I) || self.has(B, B)
    }

    pub fn is(&self, r: Relation) -> bool {
        let (da, db) = self.dims;
        match r {
            Relation::Intersects => self.intersects(),
            Relation::Disjoint => !self.intersects(),
            Relation::Equals => {
                self.has(I, I)
                    && !self.has(I, E)
                    && !self.has(B, E)
                    && !self.has(E, I)
                    && !self.has(E, B)
            }
            Relation::Touches => {
                !(da == 0 && db == 0)
                    && !self.has(I, I)
                    && (self.has(I, B) || self.has(B, I) || self.has(B, B))
            }
            Relation::Within => self.has(I, I) && !self.has(I, E) && !self.has(B, E),
            Relation::Contains => self.has(I, I) && !self.has(E, I) && !self.has(E, B),
            Relation::Overlaps => {
                if da != db {
                    false
                } else if da == 1 {
                    self.cells[I][I] == Some(1) && self.has(I, E) && self.has(E, I)
                } else {
                    self.has(I, I) && self.has(I, E) && self.has(E, I)
                }
            }
            Relation::Crosses => {
                if da == 1 && db == 1 {
                    self.cells[I][I] == Some(0)
                } else if da < db {
                    self.has(I, I) && self.has(I, E)
                } else if da > db {
                    self.has(I, I) && self.has(E, I)
                } else {
                    false
                }
            }
        }
    }
}

impl<T: GeoFloat> PreparedGeometry<T> {
    /// Intersection matrix of `self` (rows) against `other` (columns).
    pub fn matrix(&self, other: &PreparedGeometry<T>) -> Result<IntersectionMatrix, GeomError> {
        let (ga, gb) = (self.geometry(), other.geometry());
        if ga.crs() != gb.crs() {
            return Err(GeomError::CrsMismatch(ga.crs().into(), gb.crs().into()));
        }
        let mut m = IntersectionMatrix::new((self.dimension(), other.dimension()));
        if !self.bbox().intersects(&other.bbox(), T::tolerance()) {
            exterior_only(&mut m, self, false);
            exterior_only(&mut m, other, true);
            return Ok(m);
        }
        locate_parts(self, other, &mut m, false);
        locate_parts(other, self, &mut m, true);
        Ok(m)
    }

    pub fn relate(&self, r: Relation, other: &PreparedGeometry<T>) -> Result<bool, GeomError> {
        Ok(self.matrix(other)?.is(r))
    }

    pub fn intersects(&self, other: &PreparedGeometry<T>) -> Result<bool, GeomError> {
        Ok(self.matrix(other)?.intersects())
    }
}

/// Evaluates `r(a, b)` on two geometries.
pub fn relate<T: GeoFloat>(
    r: Relation,
    a: &super::Geometry<T>,
    b: &super::Geometry<T>,
) -> Result<bool, GeomError> {
    let pa = PreparedGeometry::new(a.clone());
    let pb = PreparedGeometry::new(b.clone());
    pa.relate(r, &pb)
}

fn put(m: &mut IntersectionMatrix, swap: bool, row: usize, col: usize, dim: u8) {
    if swap {
        m.set(col, row, dim);
    } else {
        m.set(row, col, dim);
    }
}

fn exterior_only<T: GeoFloat>(m: &mut IntersectionMatrix, g: &PreparedGeometry<T>, swap: bool) {
    let d = g.dimension();
    put(m, swap, I, E, d);
    if d > 0 && (d == 2 || !g.ends.is_empty()) {
        put(m, swap, B, E, d - 1);
    }
}

/// Locates every part of `a` (interior and boundary, split at every contact
/// with `b`'s linework) relative to `b` and records the result.
fn locate_parts<T: GeoFloat>(
    a: &PreparedGeometry<T>,
    b: &PreparedGeometry<T>,
    m: &mut IntersectionMatrix,
    swap: bool,
) {
    let eps = T::tolerance();
    let half = T::from_f64(0.5).unwrap();
    match a.dimension() {
        0 => {
            for &p in a.points() {
                put(m, swap, I, b.locate(p) as usize, 0);
            }
        }
        1 => {
            let mut params = Vec::new();
            for s in &a.segments {
                let pcs = split_against(s, b, &mut params);
                for piece in &pcs {
                    put(m, swap, I, b.locate(piece.at(half)) as usize, 1);
                }
                for &t in &params {
                    put(m, swap, I, b.locate(s.at(t)) as usize, 0);
                }
                for v in [s.a, s.b] {
                    let row = if a.ends.iter().any(|e| e.close_to(v, eps)) { B } else { I };
                    put(m, swap, row, b.locate(v) as usize, 0);
                }
            }
            if a.segments.is_empty() {
                // Degenerate line collapsed to a point.
                if let Some(v) = a.geometry().coords().next() {
                    put(m, swap, I, b.locate(v) as usize, 0);
                }
            }
        }
        _ => {
            let mut params = Vec::new();
            for s in &a.segments {
                let pcs = split_against(s, b, &mut params);
                for piece in &pcs {
                    let loc = b.locate(piece.at(half));
                    put(m, swap, B, loc as usize, 1);
                    area_side(b, m, swap, loc, Some(piece));
                }
                let vertices = params.iter().map(|&t| s.at(t)).chain([s.a, s.b]);
                for v in vertices.collect::<Vec<Coordinate<T>>>() {
                    let loc = b.locate(v);
                    put(m, swap, B, loc as usize, 0);
                    area_side(b, m, swap, loc, None);
                }
            }
            if b.dimension() < 2 {
                put(m, swap, I, E, 2);
            }
        }
    }
}

/// Records what the interior of areal `a` meets next to one of its boundary
/// parts located at `loc` in `b`.
fn area_side<T: GeoFloat>(
    b: &PreparedGeometry<T>,
    m: &mut IntersectionMatrix,
    swap: bool,
    loc: Loc,
    piece: Option<&Segment<T>>,
) {
    match loc {
        Loc::Exterior => put(m, swap, I, E, 2),
        // b's interior straddles a's boundary: it meets both sides.
        Loc::Interior if b.dimension() == 2 => {
            put(m, swap, I, I, 2);
            put(m, swap, E, I, 2);
        }
        Loc::Boundary if b.dimension() == 2 => {
            let Some(piece) = piece else { return };
            let mut same = false;
            let mut opposite = false;
            b.segments_near(&piece.bbox(), |i| match collinear_with(piece, &b.segments[i]) {
                Some(true) => same = true,
                Some(false) => opposite = true,
                None => {}
            });
            if same {
                put(m, swap, I, I, 2);
            }
            if opposite {
                put(m, swap, I, E, 2);
            }
        }
        _ => {}
    }
}

fn split_against<T: GeoFloat>(
    s: &Segment<T>,
    b: &PreparedGeometry<T>,
    params: &mut Vec<T>,
) -> Vec<Segment<T>> {
    params.clear();
    b.segments_near(&s.bbox(), |i| split_params(s, &b.segments[i], params));
    pieces(s, params)
}
