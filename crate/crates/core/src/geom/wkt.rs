use std::fmt::Write;

use super::{Coordinate, GeoFloat, GeomError, Geometry, Polygon, Shape, DEFAULT_CRS};

const UNSUPPORTED: &[&str] = &[
    "MULTIPOINT",
    "MULTILINESTRING",
    "GEOMETRYCOLLECTION",
    "CIRCULARSTRING",
    "COMPOUNDCURVE",
    "CURVEPOLYGON",
    "MULTICURVE",
    "MULTISURFACE",
    "POLYHEDRALSURFACE",
    "TRIANGLE",
    "TIN",
];

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Open,
    Close,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Option<Tok<'a>> {
        let rest = &self.src[self.pos..];
        let trimmed = rest.trim_start();
        self.pos += rest.len() - trimmed.len();
        let ch = trimmed.chars().next()?;
        let tok = match ch {
            '(' => Tok::Open,
            ')' => Tok::Close,
            ',' => Tok::Comma,
            _ => {
                let len = trimmed
                    .find(|c: char| c.is_whitespace() || matches!(c, '(' | ')' | ','))
                    .unwrap_or(trimmed.len());
                self.pos += len;
                return Some(Tok::Word(&trimmed[..len]));
            }
        };
        self.pos += 1;
        Some(tok)
    }

    fn peek(&mut self) -> Option<Tok<'a>> {
        let save = self.pos;
        let t = self.next();
        self.pos = save;
        t
    }

    fn expect(&mut self, want: Tok<'static>) -> Result<(), GeomError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(malformed(format!("expected {want:?}, found {t:?}"))),
            None => Err(malformed(format!("expected {want:?}, found end of input"))),
        }
    }
}

fn malformed(msg: impl Into<String>) -> GeomError {
    GeomError::MalformedWkt(msg.into())
}

/// Parses a WKT literal, optionally prefixed by `<crs-uri>`.
pub fn parse_wkt<T: GeoFloat>(text: &str) -> Result<Geometry<T>, GeomError> {
    let text = text.trim();
    let (crs, body) = match text.strip_prefix('<') {
        Some(rest) => {
            let end = rest
                .find('>')
                .ok_or_else(|| malformed("unterminated CRS URI"))?;
            (&rest[..end], &rest[end + 1..])
        }
        None => (DEFAULT_CRS, text),
    };
    let mut lx = Lexer { src: body, pos: 0 };
    let keyword = match lx.next() {
        Some(Tok::Word(w)) => w.to_ascii_uppercase(),
        _ => return Err(malformed("missing geometry keyword")),
    };
    if UNSUPPORTED.contains(&keyword.as_str()) {
        return Err(GeomError::UnsupportedGeometryType(keyword));
    }
    if let Some(Tok::Word(w)) = lx.peek() {
        let w = w.to_ascii_uppercase();
        if matches!(w.as_str(), "Z" | "M" | "ZM") {
            return Err(GeomError::UnsupportedGeometryType(format!("{keyword} {w}")));
        }
        if w == "EMPTY" {
            return Err(malformed("empty geometries are not supported"));
        }
    }
    let shape = match keyword.as_str() {
        "POINT" => {
            lx.expect(Tok::Open)?;
            let c = coordinate(&mut lx)?;
            lx.expect(Tok::Close)?;
            Shape::Point(c)
        }
        "LINESTRING" => Shape::LineString(coordinate_list(&mut lx)?),
        "POLYGON" => Shape::Polygon(polygon(&mut lx)?),
        "MULTIPOLYGON" => {
            lx.expect(Tok::Open)?;
            let mut members = vec![polygon(&mut lx)?];
            while lx.peek() == Some(Tok::Comma) {
                lx.next();
                members.push(polygon(&mut lx)?);
            }
            lx.expect(Tok::Close)?;
            Shape::MultiPolygon(members)
        }
        other => return Err(malformed(format!("unknown geometry keyword `{other}`"))),
    };
    if let Some(t) = lx.next() {
        return Err(malformed(format!("trailing input starting at {t:?}")));
    }
    Geometry::with_crs(shape, crs)
}

fn coordinate<T: GeoFloat>(lx: &mut Lexer<'_>) -> Result<Coordinate<T>, GeomError> {
    let mut nums = [T::zero(); 2];
    for n in nums.iter_mut() {
        *n = match lx.next() {
            Some(Tok::Word(w)) => w
                .parse::<T>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| malformed(format!("`{w}` is not a number")))?,
            other => return Err(malformed(format!("expected a number, found {other:?}"))),
        };
    }
    if let Some(Tok::Word(w)) = lx.peek() {
        return Err(malformed(format!(
            "unexpected extra ordinate `{w}`; only 2D coordinates are supported"
        )));
    }
    Ok(Coordinate::new(nums[0], nums[1]))
}

fn coordinate_list<T: GeoFloat>(lx: &mut Lexer<'_>) -> Result<Vec<Coordinate<T>>, GeomError> {
    lx.expect(Tok::Open)?;
    let mut out = vec![coordinate(lx)?];
    while lx.peek() == Some(Tok::Comma) {
        lx.next();
        out.push(coordinate(lx)?);
    }
    lx.expect(Tok::Close)?;
    Ok(out)
}

fn polygon<T: GeoFloat>(lx: &mut Lexer<'_>) -> Result<Polygon<T>, GeomError> {
    lx.expect(Tok::Open)?;
    let exterior = coordinate_list(lx)?;
    let mut holes = Vec::new();
    while lx.peek() == Some(Tok::Comma) {
        lx.next();
        holes.push(coordinate_list(lx)?);
    }
    lx.expect(Tok::Close)?;
    Polygon::new(exterior, holes)
}

/// Writes WKT using the shortest decimal text that round-trips each ordinate.
pub fn serialize_wkt<T: GeoFloat>(g: &Geometry<T>, embed_crs: bool) -> String {
    let mut out = String::new();
    if embed_crs {
        let _ = write!(out, "<{}> ", g.crs());
    }
    out.push_str(g.kind().wkt_keyword());
    out.push(' ');
    match g.shape() {
        Shape::Point(c) => {
            out.push('(');
            write_coord(&mut out, c);
            out.push(')');
        }
        Shape::LineString(pts) => write_ring(&mut out, pts),
        Shape::Polygon(p) => write_polygon(&mut out, p),
        Shape::MultiPolygon(ps) => {
            out.push('(');
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_polygon(&mut out, p);
            }
            out.push(')');
        }
    }
    out
}

fn write_coord<T: GeoFloat>(out: &mut String, c: &Coordinate<T>) {
    let _ = write!(out, "{} {}", c.lon, c.lat);
}

fn write_ring<T: GeoFloat>(out: &mut String, pts: &[Coordinate<T>]) {
    out.push('(');
    for (i, c) in pts.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_coord(out, c);
    }
    out.push(')');
}

fn write_polygon<T: GeoFloat>(out: &mut String, p: &Polygon<T>) {
    out.push('(');
    for (i, r) in p.rings().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_ring(out, r);
    }
    out.push(')');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::GeometryKind;

    const EXAMPLE_ONE: &str = "<http://www.opengis.net/def/crs/EPSG/0/4326>
   POLYGON ((9.53155824986118 46.4017516462893, 9.53155824986118 49.0185728029906,
   17.1618132052086 49.0185728029906, 17.1618132052086 46.4017516462893,
   9.53155824986118 46.4017516462893))";

    #[test]
    fn minimal_point() {
        let g = parse_wkt::<f64>("POINT (1 2)").unwrap();
        assert_eq!(g.shape(), &Shape::Point(Coordinate::new(1.0, 2.0)));
        assert_eq!(g.crs(), DEFAULT_CRS);
        assert_eq!(serialize_wkt(&g, false), "POINT (1 2)");
    }

    #[test]
    fn embedded_crs_polygon() {
        let g = parse_wkt::<f64>(EXAMPLE_ONE).unwrap();
        assert_eq!(g.kind(), GeometryKind::Polygon);
        assert_eq!(g.crs(), "http://www.opengis.net/def/crs/EPSG/0/4326");
        let ring = g.polygons()[0].exterior();
        assert_eq!(ring.len(), 5);
        assert_eq!(ring.first(), ring.last());
    }

    #[test]
    fn embedded_crs_round_trip_keeps_every_pair() {
        let g = parse_wkt::<f64>(EXAMPLE_ONE).unwrap();
        let text = serialize_wkt(&g, true);
        assert!(text.starts_with("<http://www.opengis.net/def/crs/EPSG/0/4326> POLYGON (("));
        let back = parse_wkt::<f64>(&text).unwrap();
        assert_eq!(back, g);
        for pair in [
            "9.53155824986118 46.4017516462893",
            "9.53155824986118 49.0185728029906",
            "17.1618132052086 49.0185728029906",
            "17.1618132052086 46.4017516462893",
        ] {
            assert!(text.contains(pair), "{pair} missing from {text}");
        }
    }

    #[test]
    fn unclosed_ring_is_malformed() {
        assert!(matches!(
            parse_wkt::<f64>("POLYGON ((0 0, 1 0, 1 1))"),
            Err(GeomError::MalformedWkt(_))
        ));
        assert!(matches!(
            parse_wkt::<f64>("POLYGON ((0 0, 1 0, 1 1, 0 1))"),
            Err(GeomError::MalformedWkt(_))
        ));
    }

    #[test]
    fn malformed_inputs() {
        for bad in [
            "POINT (1 2",
            "POINT (a 2)",
            "POINT (1)",
            "POINT (1 2 3)",
            "POLYGON ((0 0, 1 0, 1 1, 0 0)",
            "FOO (1 2)",
            "POINT EMPTY",
            "POINT (1 2) extra",
            "<http://x POINT (1 2)",
            "",
        ] {
            assert!(matches!(parse_wkt::<f64>(bad), Err(GeomError::MalformedWkt(_))), "{bad}");
        }
    }

    #[test]
    fn unsupported_types() {
        for bad in [
            "GEOMETRYCOLLECTION (POINT (1 2))",
            "MULTIPOINT ((1 2))",
            "POINT Z (1 2 3)",
            "CIRCULARSTRING (0 0, 1 1, 2 0)",
        ] {
            assert!(
                matches!(parse_wkt::<f64>(bad), Err(GeomError::UnsupportedGeometryType(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn multipolygon_of_two_squares() {
        let text = "MULTIPOLYGON (((0 0, 1 0, 1 1, 0 1, 0 0)), ((2 0, 3 0, 3 1, 2 1, 2 0)))";
        let g = parse_wkt::<f64>(text).unwrap();
        let out = serialize_wkt(&g, false);
        assert!(out.starts_with("MULTIPOLYGON ((("));
        assert_eq!(parse_wkt::<f64>(&out).unwrap().polygons().len(), 2);
    }

    #[test]
    fn keyword_case_and_spacing_are_lenient() {
        let a = parse_wkt::<f64>("polygon((0 0,1 0,1 1,0 1,0 0))").unwrap();
        let b = parse_wkt::<f64>("POLYGON ((0 0, 1 0, 1 1, 0 1, 0 0))").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn polygon_with_hole_round_trips() {
        let g = parse_wkt::<f64>(
            "POLYGON ((0 0, 4 0, 4 4, 0 4, 0 0), (1 1, 1 2, 2 2, 2 1, 1 1))",
        )
        .unwrap();
        assert_eq!(g.polygons()[0].holes().len(), 1);
        assert_eq!(parse_wkt::<f64>(&serialize_wkt(&g, false)).unwrap(), g);
    }

    #[test]
    fn single_precision_parses() {
        let g = parse_wkt::<f32>("LINESTRING (0.5 1.25, 3 4)").unwrap();
        assert_eq!(g.coordinate_count(), 2);
        assert_eq!(serialize_wkt(&g, false), "LINESTRING (0.5 1.25, 3 4)");
    }
}
