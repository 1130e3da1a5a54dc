//! Shared oracles for the integration suites.
#![allow(dead_code)]

use geosel::geom::{parse_wkt, Relation};
use geosel::geom::PreparedGeometry;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn prep(wkt: &str) -> PreparedGeometry<f64> {
    PreparedGeometry::new(parse_wkt(wkt).unwrap_or_else(|e| panic!("{wkt}: {e}")))
}

const SQ: &str = "POLYGON ((0 0, 2 0, 2 2, 0 2, 0 0))";
const HOLED: &str = "POLYGON ((0 0, 2 0, 2 2, 0 2, 0 0), (0.5 0.5, 0.5 1.5, 1.5 1.5, 1.5 0.5, 0.5 0.5))";
const MULTI: &str = "MULTIPOLYGON (((0 0, 1 0, 1 1, 0 1, 0 0)), ((3 0, 4 0, 4 1, 3 1, 3 0)))";
const LINE: &str = "LINESTRING (0 0, 2 0)";

/// Hand-built pairs and the relations that hold for each; every relation
/// not listed must be false.
pub const TRUTH_TABLE: &[(&str, &str, &str)] = &[
    // polygon / polygon
    (SQ, SQ, "equals intersects within contains"),
    (SQ, "POLYGON ((0.5 0.5, 1.5 0.5, 1.5 1.5, 0.5 1.5, 0.5 0.5))", "intersects contains"),
    ("POLYGON ((0.5 0.5, 1.5 0.5, 1.5 1.5, 0.5 1.5, 0.5 0.5))", SQ, "intersects within"),
    (SQ, "POLYGON ((2 0, 4 0, 4 2, 2 2, 2 0))", "intersects touches"),
    (SQ, "POLYGON ((2 2, 3 2, 3 3, 2 3, 2 2))", "intersects touches"),
    (SQ, "POLYGON ((1 1, 3 1, 3 3, 1 3, 1 1))", "intersects overlaps"),
    (SQ, "POLYGON ((3 3, 4 3, 4 4, 3 4, 3 3))", "disjoint"),
    (SQ, "POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))", "intersects contains"),
    (SQ, "POLYGON ((0 0, 2 0, 2 1, 0 1, 0 0))", "intersects contains"),
    (SQ, "POLYGON ((0 0, 0 2, 2 2, 2 0, 0 0))", "equals intersects within contains"),
    (HOLED, "POLYGON ((0.7 0.7, 1.3 0.7, 1.3 1.3, 0.7 1.3, 0.7 0.7))", "disjoint"),
    (HOLED, "POLYGON ((0.5 0.5, 1.5 0.5, 1.5 1.5, 0.5 1.5, 0.5 0.5))", "intersects touches"),
    (HOLED, "POLYGON ((0.2 0.2, 1.8 0.2, 1.8 1.8, 0.2 1.8, 0.2 0.2))", "intersects overlaps"),
    (MULTI, "POLYGON ((0.2 0.2, 0.8 0.2, 0.8 0.8, 0.2 0.8, 0.2 0.2))", "intersects contains"),
    (MULTI, "POLYGON ((1 0, 3 0, 3 1, 1 1, 1 0))", "intersects touches"),
    (MULTI, "MULTIPOLYGON (((3 0, 4 0, 4 1, 3 1, 3 0)), ((0 0, 1 0, 1 1, 0 1, 0 0)))", "equals intersects within contains"),
    ("MULTIPOLYGON (((0 0, 2 0, 2 2, 0 2, 0 0)))", SQ, "equals intersects within contains"),
    ("MULTIPOLYGON (((0 0, 1 0, 1 2, 0 2, 0 0)), ((1 0, 2 0, 2 2, 1 2, 1 0)))", SQ, "equals intersects within contains"),
    ("POLYGON ((0 0, 2 0, 0 2, 0 0))", "POLYGON ((2 0, 2 2, 0 2, 2 0))", "intersects touches"),
    ("POLYGON ((0 0, 2 0, 0 2, 0 0))", "POLYGON ((1 1, 2 1, 2 2, 1 2, 1 1))", "intersects touches"),
    ("POLYGON ((0 0, 2 0, 1 2, 0 0))", "POLYGON ((0 1, 1 -1, 2 1, 0 1))", "intersects overlaps"),
    ("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))", "POLYGON ((1.0000000001 0, 2 0, 2 1, 1.0000000001 1, 1.0000000001 0))", "intersects touches"),
    // line / polygon
    ("LINESTRING (-1 1, 3 1)", SQ, "intersects crosses"),
    ("LINESTRING (0.5 1, 1.5 1)", SQ, "intersects within"),
    (SQ, "LINESTRING (0.5 1, 1.5 1)", "intersects contains"),
    (LINE, SQ, "intersects touches"),
    ("LINESTRING (2 1, 3 1)", SQ, "intersects touches"),
    ("LINESTRING (3 0, 3 2)", SQ, "disjoint"),
    ("LINESTRING (1 1, 3 1)", SQ, "intersects crosses"),
    ("LINESTRING (0 0, 1 1)", SQ, "intersects within"),
    ("LINESTRING (-1 0, 3 0)", SQ, "intersects touches"),
    ("LINESTRING (-1 -1, 3 3)", SQ, "intersects crosses"),
    ("LINESTRING (0.5 1, 1 1)", HOLED, "intersects touches"),
    // line / line
    ("LINESTRING (0 0, 2 2)", "LINESTRING (0 2, 2 0)", "intersects crosses"),
    (LINE, "LINESTRING (1 0, 3 0)", "intersects overlaps"),
    (LINE, "LINESTRING (2 0, 3 1)", "intersects touches"),
    (LINE, "LINESTRING (1 0, 1 1)", "intersects touches"),
    (LINE, LINE, "equals intersects within contains"),
    (LINE, "LINESTRING (2 0, 0 0)", "equals intersects within contains"),
    ("LINESTRING (0 0, 1 0)", LINE, "intersects within"),
    (LINE, "LINESTRING (0 1, 2 1)", "disjoint"),
    ("LINESTRING (0 0, 2 0, 2 2)", "LINESTRING (1 -1, 1 1)", "intersects crosses"),
    // points
    ("POINT (1 1)", SQ, "intersects within"),
    ("POINT (0 1)", SQ, "intersects touches"),
    ("POINT (3 3)", SQ, "disjoint"),
    (SQ, "POINT (1 1)", "intersects contains"),
    ("POINT (1 1)", "POINT (1 1)", "equals intersects within contains"),
    ("POINT (1 1)", "POINT (1 2)", "disjoint"),
    ("POINT (1 0)", LINE, "intersects within"),
    ("POINT (0 0)", LINE, "intersects touches"),
    ("POINT (1 1)", HOLED, "disjoint"),
    ("POINT (0.5 1)", HOLED, "intersects touches"),
    ("POINT (1 1)", MULTI, "intersects touches"),
];

/// Mismatches between the kernel and the table, as readable lines.
pub fn truth_table_failures() -> Vec<String> {
    let mut out = Vec::new();
    for (a, b, expect) in TRUTH_TABLE {
        let (pa, pb) = (prep(a), prep(b));
        for r in Relation::ALL {
            let want = expect.split_whitespace().any(|w| w == r.function_name()[2..].to_lowercase());
            let got = pa.relate(r, &pb).unwrap();
            if got != want {
                out.push(format!("{r}({a}, {b}) = {got}, expected {want}"));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Independent planar predicates for the sampling oracle

type P = (f64, f64);
const EPS: f64 = 1e-9;

fn cross(o: P, a: P, b: P) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

fn on_segment(p: P, a: P, b: P) -> bool {
    let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
    cross(a, b, p).abs() <= EPS * len.max(1.0)
        && p.0 >= a.0.min(b.0) - EPS
        && p.0 <= a.0.max(b.0) + EPS
        && p.1 >= a.1.min(b.1) - EPS
        && p.1 <= a.1.max(b.1) + EPS
}

/// Closed point-in-ring test by ray casting.
fn in_ring(p: P, ring: &[P]) -> bool {
    let mut inside = false;
    for w in ring.windows(2) {
        let (a, b) = (w[0], w[1]);
        if on_segment(p, a, b) {
            return true;
        }
        if (a.1 > p.1) != (b.1 > p.1) && p.0 < a.0 + (p.1 - a.1) * (b.0 - a.0) / (b.1 - a.1) {
            inside = !inside;
        }
    }
    inside
}

fn segments_meet(a: P, b: P, c: P, d: P) -> bool {
    let (d1, d2, d3, d4) = (cross(c, d, a), cross(c, d, b), cross(a, b, c), cross(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(a, c, d) || on_segment(b, c, d) || on_segment(c, a, b) || on_segment(d, a, b)
}

fn wkt_of(ring: &[P]) -> String {
    let pts: Vec<String> = ring.iter().map(|(x, y)| format!("{x} {y}")).collect();
    format!("POLYGON (({}))", pts.join(", "))
}

/// Star-shaped simple polygon with vertices snapped to a 0.25 lattice.
fn random_ring(rng: &mut ChaCha8Rng) -> Vec<P> {
    loop {
        let c = (rng.gen_range(1.0..9.0f64), rng.gen_range(1.0..9.0f64));
        let k = rng.gen_range(3..9);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let mut ring: Vec<P> = angles
            .iter()
            .map(|a| {
                let r = rng.gen_range(0.3..2.5);
                (((c.0 + r * a.cos()) * 4.0).round() / 4.0, ((c.1 + r * a.sin()) * 4.0).round() / 4.0)
            })
            .collect();
        ring.dedup();
        if ring.len() < 3 || ring.first() == ring.last() {
            continue;
        }
        ring.push(ring[0]);
        // Snapping can fold the ring; keep only simple ones with some area.
        let area: f64 = ring.windows(2).map(|w| w[0].0 * w[1].1 - w[1].0 * w[0].1).sum::<f64>() / 2.0;
        let n = ring.len() - 1;
        let simple = (0..n).all(|i| {
            (i + 1..n).all(|j| {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                adjacent || !segments_meet(ring[i], ring[i + 1], ring[j], ring[j + 1])
            })
        });
        if area.abs() > 0.1 && simple {
            return ring;
        }
    }
}

fn bbox(r: &[P]) -> (P, P) {
    let xs = r.iter().map(|p| p.0);
    let ys = r.iter().map(|p| p.1);
    (
        (xs.clone().fold(f64::INFINITY, f64::min), ys.clone().fold(f64::INFINITY, f64::min)),
        (xs.fold(f64::NEG_INFINITY, f64::max), ys.fold(f64::NEG_INFINITY, f64::max)),
    )
}

/// Sampling verdict: some sampled point of either shape lies in the other.
fn sampled_intersect(a: &[P], b: &[P]) -> bool {
    let (amin, amax) = bbox(a);
    let (bmin, bmax) = bbox(b);
    let lo = (amin.0.max(bmin.0), amin.1.max(bmin.1));
    let hi = (amax.0.min(bmax.0), amax.1.min(bmax.1));
    if lo.0 > hi.0 + EPS || lo.1 > hi.1 + EPS {
        return false;
    }
    let all = (amin.0.min(bmin.0), amin.1.min(bmin.1), amax.0.max(bmax.0), amax.1.max(bmax.1));
    let h = 1e-3 * ((all.2 - all.0).powi(2) + (all.3 - all.1).powi(2)).sqrt();
    for (ring, other) in [(a, b), (b, a)] {
        for w in ring.windows(2) {
            let len = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
            let n = (len / h).ceil() as usize;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                let p = (w[0].0 + t * (w[1].0 - w[0].0), w[0].1 + t * (w[1].1 - w[0].1));
                if in_ring(p, other) {
                    return true;
                }
            }
        }
    }
    let (nx, ny) = (((hi.0 - lo.0) / h).ceil() as usize, ((hi.1 - lo.1) / h).ceil() as usize);
    for i in 0..=nx {
        for j in 0..=ny {
            let p = (lo.0 + i as f64 * h, lo.1 + j as f64 * h);
            if in_ring(p, a) && in_ring(p, b) {
                return true;
            }
        }
    }
    false
}

/// Exact verdict for simple rings: some edges meet or one ring holds a vertex of the other.
fn exact_intersect(a: &[P], b: &[P]) -> bool {
    a.windows(2).any(|e| b.windows(2).any(|f| segments_meet(e[0], e[1], f[0], f[1])))
        || in_ring(a[0], b)
        || in_ring(b[0], a)
}

pub struct SamplingReport {
    pub pairs: usize,
    pub disjoint: usize,
    pub disagreements: usize,
    pub adjudicated_failures: Vec<String>,
}

/// Compares the kernel's sfDisjoint with the sampling oracle on random
/// polygon pairs; disagreements are settled by the exact edge test.
pub fn disjoint_sampling(seed: u64, pairs: usize) -> SamplingReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SamplingReport { pairs, disjoint: 0, disagreements: 0, adjudicated_failures: Vec::new() };
    for _ in 0..pairs {
        let a = random_ring(&mut rng);
        let b = if rng.gen_bool(0.3) {
            // Shift a copy of `a` so edges and vertices coincide or abut.
            let (amin, amax) = bbox(&a);
            let dx = [0.0, amax.0 - amin.0, 0.25, 0.5][rng.gen_range(0..4)];
            a.iter().map(|p| (p.0 + dx, p.1)).collect()
        } else {
            random_ring(&mut rng)
        };
        let (wa, wb) = (wkt_of(&a), wkt_of(&b));
        let kernel = prep(&wa).relate(Relation::Disjoint, &prep(&wb)).unwrap();
        rep.disjoint += usize::from(kernel);
        let sampled = !sampled_intersect(&a, &b);
        if sampled != kernel {
            rep.disagreements += 1;
            let exact = !exact_intersect(&a, &b);
            if exact != kernel {
                rep.adjudicated_failures.push(format!("sfDisjoint({wa}, {wb}) = {kernel}"));
            }
        }
    }
    rep
}

/// Closed point-in-area test against every polygon of `g`, holes excluded.
pub fn area_covers(g: &geosel::Geometry, p: (f64, f64)) -> bool {
    let ring = |r: &[geosel::Coordinate]| -> Vec<P> { r.iter().map(|c| (c.lon, c.lat)).collect() };
    g.polygons().iter().any(|poly| {
        let ext = ring(poly.exterior());
        in_ring(p, &ext)
            && poly.holes().iter().all(|h| {
                let h = ring(h);
                !in_ring(p, &h) || h.windows(2).any(|w| on_segment(p, w[0], w[1]))
            })
    })
}

/// Points of `g` on a lattice of spacing `h`: every vertex, points along
/// every edge, and interior lattice points of areal shapes.
pub fn sample_points(g: &geosel::Geometry, h: f64) -> Vec<P> {
    use geosel::geom::Shape;
    let mut out: Vec<P> = g.coords().map(|c| (c.lon, c.lat)).collect();
    let along = |pts: &[geosel::Coordinate], out: &mut Vec<P>| {
        for w in pts.windows(2) {
            let len = (w[1].lon - w[0].lon).hypot(w[1].lat - w[0].lat);
            let n = (len / h).ceil().max(1.0) as usize;
            for i in 0..=n {
                let t = i as f64 / n as f64;
                out.push((w[0].lon + t * (w[1].lon - w[0].lon), w[0].lat + t * (w[1].lat - w[0].lat)));
            }
        }
    };
    match g.shape() {
        Shape::Point(_) => {}
        Shape::LineString(pts) => along(pts, &mut out),
        _ => {
            for poly in g.polygons() {
                for r in poly.rings() {
                    along(r, &mut out);
                }
            }
            let b = g.bbox();
            let (nx, ny) = ((b.width() / h).ceil() as usize, (b.height() / h).ceil() as usize);
            for i in 0..=nx {
                for j in 0..=ny {
                    let p = (b.min.lon + i as f64 * h, b.min.lat + j as f64 * h);
                    if area_covers(g, p) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}
