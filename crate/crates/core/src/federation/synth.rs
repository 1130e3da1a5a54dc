//! Seeded synthetic datasets: random mixed federations, a three-layer grid
//! federation, a 27-source benchmark federation and irregular data for
//! partitioning.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::workload::{ADM, CROP, DATA, SNOW};
use super::{scrape, Boundary, Federation, FederationError, Source};
use crate::geom::{distance, serialize_wkt};
use crate::query::{parse_query, Query};
use crate::selector::{Mode, ThematicOptions};
use crate::store::{Literal, Store, Term, Triple};
use crate::summaries::Flavor;
use crate::vocab::{GEO_AS_WKT, GEO_HAS_GEOMETRY, RDF_TYPE};
use crate::{Coordinate, Geometry, Polygon, PreparedGeometry, Rectangle, Shape};

/// Vocabulary of the random federations.
pub const RAND: &str = "http://geosel.example.org/rand#";

/// A feature description: IRI, class, extra properties and one geometry.
pub struct Feature {
    pub iri: String,
    pub class: String,
    pub props: Vec<(String, Term)>,
    pub geometry_iri: String,
    pub geometry: Geometry,
}

pub fn store_of_features(id: &str, features: &[Feature]) -> Store {
    let mut triples = Vec::new();
    for f in features {
        let r = Term::iri(&f.iri);
        let g = Term::iri(&f.geometry_iri);
        triples.push(Triple::new(r.clone(), Term::iri(RDF_TYPE), Term::iri(&f.class)));
        for (p, o) in &f.props {
            triples.push(Triple::new(r.clone(), Term::iri(p), o.clone()));
        }
        triples.push(Triple::new(r, Term::iri(GEO_HAS_GEOMETRY), g.clone()));
        triples.push(Triple::new(g, Term::iri(GEO_AS_WKT), Term::Literal(Literal::wkt(&f.geometry))));
    }
    Store::new(id, triples)
}

fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Rectangle {
    Rectangle::new(Coordinate::new(x0, y0), Coordinate::new(x1, y1))
}

fn polygon(pts: &[(f64, f64)]) -> Polygon {
    let mut ring: Vec<Coordinate> = pts.iter().map(|&(x, y)| Coordinate::new(x, y)).collect();
    ring.push(ring[0]);
    Polygon::new(ring, Vec::new()).expect("generated ring")
}

fn geometry(shape: Shape) -> Geometry {
    Geometry::new(shape).expect("generated shape")
}

// ---------------------------------------------------------------------------
// Random mixed federations

/// Random federation plus queries exercising every relation and distance comparator.
pub struct RandomInstance {
    pub seed: u64,
    pub stores: Vec<Store>,
    pub queries: Vec<Query>,
}

const RELATIONS: [&str; 7] = ["sfEquals", "sfWithin", "sfContains", "sfOverlaps", "sfCrosses", "sfTouches", "sfIntersects"];
const COMPARATORS: [&str; 3] = ["<", "<=", "="];
const CLASSES: [&str; 3] = ["A", "B", "C"];

/// Coordinates snap to a quarter-degree lattice so shapes often share
/// vertices and edges.
fn snap(v: f64) -> f64 {
    (v * 4.0).round() / 4.0
}

struct RandomShapes<'a> {
    rng: &'a mut ChaCha8Rng,
    region: Rectangle,
}

impl RandomShapes<'_> {
    fn coord(&mut self) -> Coordinate {
        let r = self.region;
        Coordinate::new(
            snap(self.rng.gen_range(r.min.lon..=r.max.lon)),
            snap(self.rng.gen_range(r.min.lat..=r.max.lat)),
        )
    }

    fn rect(&mut self) -> Rectangle {
        let a = self.coord();
        let w = 0.25 * self.rng.gen_range(1..=4) as f64;
        let h = 0.25 * self.rng.gen_range(1..=4) as f64;
        rect(a.lon, a.lat, a.lon + w, a.lat + h)
    }

    fn shape(&mut self, pool: &[Geometry]) -> Geometry {
        match self.rng.gen_range(0..12) {
            0 | 1 => geometry(Shape::Point(self.coord())),
            2 | 3 => {
                let n = self.rng.gen_range(2..=4);
                let mut pts: Vec<Coordinate> = Vec::new();
                while pts.len() < n {
                    let c = self.coord();
                    if pts.last() != Some(&c) {
                        pts.push(c);
                    }
                }
                geometry(Shape::LineString(pts))
            }
            4..=5 => Geometry::rectangle(self.rect()).expect("non-degenerate"),
            6 => {
                let a = self.coord();
                let d = 0.25 * self.rng.gen_range(1..=4) as f64;
                geometry(Shape::Polygon(polygon(&[(a.lon, a.lat), (a.lon + d, a.lat), (a.lon, a.lat + d)])))
            }
            7 => {
                let r = self.rect().buffer(0.25);
                let hole = r.buffer(-0.125).to_ring();
                geometry(Shape::Polygon(Polygon::new(r.to_ring(), vec![hole]).expect("hole inside")))
            }
            8 => {
                let a = self.rect();
                let b = self.rect();
                if a.intersects(&b, 0.0) {
                    Geometry::rectangle(a).expect("non-degenerate")
                } else {
                    geometry(Shape::MultiPolygon(vec![a.to_polygon(), b.to_polygon()]))
                }
            }
            _ if pool.is_empty() => geometry(Shape::Point(self.coord())),
            9 => pool.choose(self.rng).unwrap().clone(),
            10 => {
                // A box sharing the right edge of an existing shape's box.
                let b = pool.choose(self.rng).unwrap().bbox();
                let w = 0.25 * self.rng.gen_range(1..=3) as f64;
                if b.height() > 0.0 {
                    Geometry::rectangle(rect(b.max.lon, b.min.lat, b.max.lon + w, b.max.lat)).unwrap()
                } else {
                    geometry(Shape::Point(b.min))
                }
            }
            _ => {
                // A vertex of an existing shape, or a segment leaving from it.
                let g = pool.choose(self.rng).unwrap();
                let c = g.coords().nth(self.rng.gen_range(0..g.coords().count())).unwrap();
                if self.rng.gen_bool(0.5) {
                    geometry(Shape::Point(c))
                } else {
                    let d = self.coord();
                    if d == c {
                        geometry(Shape::Point(c))
                    } else {
                        geometry(Shape::LineString(vec![c, d]))
                    }
                }
            }
        }
    }
}

/// A federation of 3 to 8 sources with up to `max_shapes` shapes each and
/// a batch of queries with selection, join and distance filters.
pub fn random_instance(seed: u64, max_shapes: usize) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=8);
    let mut pool: Vec<Geometry> = Vec::new();
    let mut stores = Vec::new();
    for i in 0..n {
        let c = Coordinate::new(snap(rng.gen_range(0.0..8.0)), snap(rng.gen_range(0.0..8.0)));
        let half = 0.25 * rng.gen_range(2..=8) as f64;
        let region = rect(c.lon - half, c.lat - half, c.lon + half, c.lat + half);
        let mut layers: Vec<&str> = CLASSES.to_vec();
        layers.shuffle(&mut rng);
        layers.truncate(rng.gen_range(1..=2));
        let count = rng.gen_range(1..=max_shapes);
        let mut features = Vec::new();
        for k in 0..count {
            let g = RandomShapes { rng: &mut rng, region }.shape(&pool);
            pool.push(g.clone());
            let class = layers[rng.gen_range(0..layers.len())];
            features.push(Feature {
                iri: format!("{DATA}rand/s{i}/f{k}"),
                class: format!("{RAND}{class}"),
                props: vec![(format!("{RAND}label"), Term::Literal(Literal::plain(&format!("{class}{k}"))))],
                geometry_iri: format!("{DATA}rand/s{i}/g{k}"),
                geometry: g,
            });
        }
        stores.push(store_of_features(&format!("s{i}"), &features));
    }
    let queries = random_queries(&mut rng, &pool);
    RandomInstance { seed, stores, queries }
}

/// Either a bare `geo:asWKT` pattern or a connected feature chain; never a
/// feature detached from its geometry, which would only add a cross product.
fn feature_block(rng: &mut ChaCha8Rng, v: &str) -> String {
    let mut s = String::new();
    if rng.gen_bool(0.85) {
        if rng.gen_bool(0.7) {
            s.push_str(&format!("?f{v} a r:{} . ", CLASSES[rng.gen_range(0..3)]));
        }
        if rng.gen_bool(0.25) {
            s.push_str(&format!("?f{v} r:label ?l{v} . "));
        }
        s.push_str(&format!("?f{v} geo:hasGeometry ?g{v} . "));
    }
    s.push_str(&format!("?g{v} geo:asWKT ?w{v} ."));
    s
}

fn literal_arg(rng: &mut ChaCha8Rng, pool: &[Geometry]) -> String {
    let g = pool.choose(rng).unwrap();
    let g = match rng.gen_range(0..4) {
        0 => Geometry::rectangle(g.bbox().buffer(0.25)).unwrap(),
        1 => Geometry::rectangle(rect(
            snap(rng.gen_range(-1.0..9.0)),
            snap(rng.gen_range(-1.0..9.0)),
            10.0,
            10.0,
        ))
        .unwrap_or_else(|_| g.clone()),
        _ => g.clone(),
    };
    format!("\"{}\"^^geo:wktLiteral", serialize_wkt(&g, false))
}

fn threshold(rng: &mut ChaCha8Rng, pool: &[Geometry], op: &str) -> f64 {
    if op == "=" || rng.gen_bool(0.3) {
        // An attained distance, so equality and the closed bound can hold.
        let a = pool.choose(rng).unwrap();
        let b = pool.choose(rng).unwrap();
        let (a, b) = (PreparedGeometry::new(a.clone()), PreparedGeometry::new(b.clone()));
        distance(&a, &b, "http://www.opengis.net/def/uom/OGC/1.0/metre").unwrap_or(0.0)
    } else {
        [0.0, 10_000.0, 50_000.0, 150_000.0, 400_000.0][rng.gen_range(0..5)]
    }
}

fn random_queries(rng: &mut ChaCha8Rng, pool: &[Geometry]) -> Vec<Query> {
    let mut out = Vec::new();
    for k in 0..10 {
        let two = k % 2 == 1 || rng.gen_bool(0.3);
        let mut body = feature_block(rng, "1");
        if two {
            body.push(' ');
            body.push_str(&feature_block(rng, "2"));
        }
        let mut filters = Vec::new();
        let relation = RELATIONS[(k + rng.gen_range(0..7)) % 7];
        let comparator = COMPARATORS[rng.gen_range(0..3)];
        let lit = literal_arg(rng, pool);
        let unit = if rng.gen_bool(0.5) { "uom:metre" } else { "uom:kilometre" };
        let scale = if unit == "uom:metre" { 1.0 } else { 1e-3 };
        let d = threshold(rng, pool, comparator) * scale;
        match (two, rng.gen_range(0..4)) {
            (false, 0..=1) | (true, 0) => {
                let (a, b) = if rng.gen_bool(0.5) { ("?w1".to_string(), lit) } else { (lit, "?w1".to_string()) };
                filters.push(format!("FILTER(geof:{relation}({a}, {b}))"));
            }
            (false, _) => filters.push(format!("FILTER(geof:distance(?w1, {lit}, {unit}) {comparator} {d:?})")),
            (true, 1) => filters.push(format!("FILTER(geof:{relation}(?w1, ?w2))")),
            (true, 2) => filters.push(format!("FILTER(geof:distance(?w1, ?w2, {unit}) {comparator} {d:?})")),
            (true, _) => {
                filters.push(format!("FILTER(geof:{relation}(?w1, {lit}))"));
                let r2 = RELATIONS[rng.gen_range(0..7)];
                filters.push(format!("FILTER(geof:{r2}(?w2, ?w1))"));
            }
        }
        let text = format!("PREFIX r: <{RAND}>\nSELECT * WHERE {{ {body} {} }}", filters.join(" "));
        out.push(parse_query(&text).expect("generated query parses"));
    }
    out
}

// ---------------------------------------------------------------------------
// Three-layer grid federation

/// Three layers cut along a 3x3 grid; each cell of each layer is one source,
/// densely tiled so every point of the cell lies in some shape.
pub struct GridFederation {
    pub stores: Vec<Store>,
    /// The cell of each store, in store order.
    pub cells: Vec<Geometry>,
}

pub const GRID_ORIGIN: (f64, f64) = (13.0, 47.0);
pub const GRID_CELL: (f64, f64) = (0.45, 0.3);
pub const LAYERS: [&str; 3] = ["adm", "crop", "snow"];

/// Cut positions `x0 < .. < x1` splitting `[x0, x1]` into `m` jittered pieces.
fn cuts(rng: &mut ChaCha8Rng, x0: f64, x1: f64, m: usize) -> Vec<f64> {
    let step = (x1 - x0) / m as f64;
    let mut v = vec![x0];
    for k in 1..m {
        v.push(x0 + step * (k as f64 + rng.gen_range(-0.3..0.3)));
    }
    v.push(x1);
    v
}

pub fn grid_federation(seed: u64) -> GridFederation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (ox, oy) = GRID_ORIGIN;
    let (cw, ch) = GRID_CELL;
    let mut tiles_of = Vec::new();
    let mut cells = Vec::new();
    for idx in 0..9 {
        let (ci, cj) = (idx % 3, idx / 3);
        let cell = rect(ox + cw * ci as f64, oy + ch * cj as f64, ox + cw * (ci + 1) as f64, oy + ch * (cj + 1) as f64);
        let mut tiles = Vec::new();
        let xs = cuts(&mut rng, cell.min.lon, cell.max.lon, 4);
        for w in xs.windows(2) {
            let ys = cuts(&mut rng, cell.min.lat, cell.max.lat, 3);
            for h in ys.windows(2) {
                tiles.push(rect(w[0], h[0], w[1], h[1]));
            }
        }
        tiles_of.push(tiles);
        cells.push(Geometry::rectangle(cell).unwrap());
    }
    let mut stores = Vec::new();
    let mut store_cells = Vec::new();
    for layer in LAYERS {
        for (idx, tiles) in tiles_of.iter().enumerate() {
            let base = format!("{DATA}{layer}/c{idx}/");
            let features: Vec<Feature> = tiles
                .iter()
                .enumerate()
                .map(|(k, r)| {
                    let lit = |s: String| Term::Literal(Literal::plain(&s));
                    let (class, props) = match layer {
                        "adm" => (
                            format!("{ADM}Municipality"),
                            vec![
                                (format!("{ADM}hasName"), lit(format!("Municipality {idx}-{k}"))),
                                (format!("{ADM}hasCode"), lit(format!("{}", 10_000 + idx * 100 + k))),
                                (format!("{ADM}population"), lit(format!("{}", 500 + 37 * k))),
                            ],
                        ),
                        "crop" => (
                            format!("{CROP}Parcel"),
                            vec![
                                (format!("{CROP}cropType"), Term::iri(&format!("{CROP}Potato"))),
                                (format!("{CROP}owner"), lit(format!("farmer {idx}-{k}"))),
                            ],
                        ),
                        _ => (
                            format!("{SNOW}SnowCover"),
                            vec![
                                (format!("{SNOW}month"), lit(["2018-02", "2018-03", "2018-04"][k % 3].to_string())),
                                (format!("{SNOW}depth"), lit(format!("{}", 10 + k))),
                            ],
                        ),
                    };
                    Feature {
                        iri: format!("{base}f{k}"),
                        class,
                        props,
                        geometry_iri: format!("{base}g{k}"),
                        geometry: Geometry::rectangle(*r).unwrap(),
                    }
                })
                .collect();
            stores.push(store_of_features(&format!("{layer}-c{idx}"), &features));
            store_cells.push(cells[idx].clone());
        }
    }
    GridFederation { stores, cells: store_cells }
}

impl GridFederation {
    /// Federation whose descriptors carry the grid cells as explicit boundaries.
    pub fn federation(&self, mode: Mode) -> Result<Federation, FederationError> {
        self.with_flavor(Flavor::Explicit, mode)
    }

    pub fn with_flavor(&self, flavor: Flavor, mode: Mode) -> Result<Federation, FederationError> {
        let sources = self
            .stores
            .iter()
            .zip(&self.cells)
            .map(|(s, cell)| {
                let wkt = serialize_wkt(cell, true);
                let d = scrape(s, flavor, (flavor == Flavor::Explicit).then_some(wkt.as_str()))?;
                Ok(Source::new(s.clone(), Some(d)))
            })
            .collect::<Result<Vec<_>, FederationError>>()?;
        Federation::new(sources, mode, ThematicOptions::default())
    }

    /// Layer name of a source id.
    pub fn layer(id: &str) -> &str {
        id.split('-').next().unwrap_or(id)
    }
}

// ---------------------------------------------------------------------------
// 27-source benchmark federation

/// Irregular convex polygon with `k` vertices around `c`.
fn blob(rng: &mut ChaCha8Rng, c: Coordinate, radius: f64, k: usize) -> Polygon {
    let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    if angles.len() < 3 {
        angles = vec![0.0, 2.1, 4.2];
    }
    let pts: Vec<(f64, f64)> = angles
        .iter()
        .map(|a| {
            let r = radius * rng.gen_range(0.6..1.0);
            (c.lon + r * a.cos(), c.lat + r * a.sin())
        })
        .collect();
    polygon(&pts)
}

/// 27 sources laid out 9 x 3, each holding blobs strewn along a diagonal band
/// of its own region.
pub fn benchmark_federation(seed: u64) -> Vec<Store> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stores = Vec::new();
    for idx in 0..27 {
        let (ci, cj) = ((idx % 9) as f64, (idx / 9) as f64);
        let origin = Coordinate::new(9.5 + 0.8 * ci, 46.5 + 0.8 * cj);
        let mut features = Vec::new();
        for k in 0..24 {
            let t = rng.gen_range(0.0..1.0);
            let c = Coordinate::new(origin.lon + 0.7 * t, origin.lat + 0.7 * (t + rng.gen_range(-0.08..0.08)).clamp(0.0, 1.0));
            let nv = rng.gen_range(6..=12);
            let p = blob(&mut rng, c, 0.03, nv);
            features.push(Feature {
                iri: format!("{DATA}bench/b{idx}/f{k}"),
                class: format!("{RAND}A"),
                props: Vec::new(),
                geometry_iri: format!("{DATA}bench/b{idx}/g{k}"),
                geometry: geometry(Shape::Polygon(p)),
            });
        }
        stores.push(store_of_features(&format!("b{idx:02}"), &features));
    }
    stores
}

// ---------------------------------------------------------------------------
// Irregular data for partitioning

/// Shapes over an L-shaped area whose box, cut 4 x 2, leaves the top-right
/// cell empty. Returns the dataset and the eight grid boundaries.
pub fn irregular_dataset(seed: u64) -> (Store, Vec<Boundary>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x0, y0, x1, y1) = (9.5, 46.4, 17.2, 49.0);
    let (cw, ch) = ((x1 - x0) / 4.0, (y1 - y0) / 2.0);
    let mut features = Vec::new();
    let push = |g: Geometry, features: &mut Vec<Feature>| {
        let k = features.len();
        features.push(Feature {
            iri: format!("{DATA}land/f{k}"),
            class: format!("{SNOW}SnowCover"),
            props: vec![(format!("{SNOW}depth"), Term::Literal(Literal::plain(&format!("{}", k % 50))))],
            geometry_iri: format!("{DATA}land/g{k}"),
            geometry: g,
        });
    };
    // Corners fixing the box: bottom-left, bottom-right, top-left.
    push(Geometry::rectangle(rect(x0, y0, x0 + 0.2, y0 + 0.2)).unwrap(), &mut features);
    push(geometry(Shape::Polygon(polygon(&[(x1, y0), (x1, y0 + 0.3), (x1 - 0.3, y0)]))), &mut features);
    push(geometry(Shape::Point(Coordinate::new(x0, y1))), &mut features);
    for _ in 0..60 {
        // Anywhere except the top-right cell, with a margin.
        let (cx, cy) = loop {
            let cx = rng.gen_range(x0 + 0.3..x1 - 0.3);
            let cy = rng.gen_range(y0 + 0.3..y1 - 0.3);
            if !(cx > x1 - cw - 0.4 && cy > y1 - ch - 0.4) {
                break (cx, cy);
            }
        };
        let g = match rng.gen_range(0..3) {
            0 => geometry(Shape::Point(Coordinate::new(cx, cy))),
            1 => Geometry::rectangle(rect(cx - 0.15, cy - 0.1, cx + 0.15, cy + 0.1)).unwrap(),
            _ => geometry(Shape::Polygon(polygon(&[(cx - 0.2, cy - 0.1), (cx + 0.2, cy - 0.1), (cx, cy + 0.15)]))),
        };
        push(g, &mut features);
    }
    let store = store_of_features("land", &features);
    let mut boundaries = Vec::new();
    for j in 0..2 {
        for i in 0..4 {
            let x = |k: usize| if k == 4 { x1 } else { x0 + cw * k as f64 };
            let y = |k: usize| if k == 2 { y1 } else { y0 + ch * k as f64 };
            let r = rect(x(i), y(j), x(i + 1), y(j + 1));
            boundaries.push(Boundary::new(format!("g{}", j * 4 + i), &Geometry::rectangle(r).unwrap()).unwrap());
        }
    }
    (store, boundaries)
}
