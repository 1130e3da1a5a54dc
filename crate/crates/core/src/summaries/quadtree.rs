use std::collections::BTreeMap;

use super::{covers, extract_mbb_summary, from_polygons, stored_geometries, BoundingSummary, Flavor, SummaryError};
use crate::{Coordinate, Geometry, PreparedGeometry, Rectangle, Shape};

pub const MAX_QUADTREE_HEIGHT: u32 = 10;

/// Grid of `n x n` equal cells over a box; cell edges at `i == n` are the box edge itself.
pub(crate) struct Grid {
    pub rect: Rectangle,
    pub n: usize,
}

impl Grid {
    fn x(&self, i: usize) -> f64 {
        if i == self.n {
            self.rect.max.lon
        } else {
            self.rect.min.lon + self.rect.width() * i as f64 / self.n as f64
        }
    }

    fn y(&self, j: usize) -> f64 {
        if j == self.n {
            self.rect.max.lat
        } else {
            self.rect.min.lat + self.rect.height() * j as f64 / self.n as f64
        }
    }

    /// Box spanning columns `i0..i1` and rows `j0..j1`.
    pub fn span(&self, i0: usize, i1: usize, j0: usize, j1: usize) -> Rectangle {
        Rectangle::new(Coordinate::new(self.x(i0), self.y(j0)), Coordinate::new(self.x(i1), self.y(j1)))
    }

    pub fn cell(&self, i: usize, j: usize) -> Rectangle {
        self.span(i, i + 1, j, j + 1)
    }

    /// Column range whose cells may meet `[lo, hi]`.
    fn cols(&self, lo: f64, hi: f64) -> (usize, usize) {
        range(lo - self.rect.min.lon, hi - self.rect.min.lon, self.rect.width(), self.n)
    }

    fn rows(&self, lo: f64, hi: f64) -> (usize, usize) {
        range(lo - self.rect.min.lat, hi - self.rect.min.lat, self.rect.height(), self.n)
    }
}

fn range(lo: f64, hi: f64, extent: f64, n: usize) -> (usize, usize) {
    let step = extent / n as f64;
    let a = ((lo / step).floor() as isize - 1).max(0) as usize;
    let b = ((hi / step).floor() as isize + 1).clamp(0, n as isize - 1) as usize;
    (a.min(n - 1), b)
}

/// Cells of the grid that are not disjoint from any of the shapes, as `kept[j][i]`.
pub(crate) fn kept_cells(grid: &Grid, shapes: &[&PreparedGeometry]) -> Vec<Vec<bool>> {
    let n = grid.n;
    let mut kept = vec![vec![false; n]; n];
    for g in shapes {
        let b = g.bbox();
        let (i0, i1) = grid.cols(b.min.lon, b.max.lon);
        let (j0, j1) = grid.rows(b.min.lat, b.max.lat);
        for (j, row) in kept.iter_mut().enumerate().take(j1 + 1).skip(j0) {
            for (i, cell) in row.iter_mut().enumerate().take(i1 + 1).skip(i0) {
                if *cell {
                    continue;
                }
                let rect = grid.cell(i, j);
                if !rect.intersects(&b, 1e-9) {
                    continue;
                }
                let cell_geom = Geometry::with_crs(Shape::Polygon(rect.to_polygon()), g.geometry().crs())
                    .expect("cell inside the data box");
                *cell = PreparedGeometry::new(cell_geom).intersects(g).unwrap_or(true);
            }
        }
    }
    kept
}

/// Merges kept cells into rectangles: maximal runs per row, then equal runs stacked upward.
/// Returns `(i0, i1, j0, j1)` spans ordered by starting row, then column.
pub(crate) fn merge_cells(kept: &[Vec<bool>]) -> Vec<(usize, usize, usize, usize)> {
    let mut open: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut done = Vec::new();
    for (j, row) in kept.iter().enumerate() {
        let mut runs = Vec::new();
        let mut i = 0;
        while i < row.len() {
            if row[i] {
                let start = i;
                while i < row.len() && row[i] {
                    i += 1;
                }
                runs.push((start, i));
            } else {
                i += 1;
            }
        }
        let mut next = BTreeMap::new();
        for run in runs {
            let j0 = open.remove(&run).unwrap_or(j);
            next.insert(run, j0);
        }
        for ((i0, i1), j0) in std::mem::replace(&mut open, next) {
            done.push((i0, i1, j0, j));
        }
    }
    for ((i0, i1), j0) in open {
        done.push((i0, i1, j0, kept.len()));
    }
    done.sort_by_key(|&(i0, _, j0, _)| (j0, i0));
    done
}

/// Union of the `4^k` cells of the bounding box that meet some cover polygon.
pub fn extract_quadtree_summary(s: &crate::store::Store, k: u32) -> Result<BoundingSummary, SummaryError> {
    if k > MAX_QUADTREE_HEIGHT {
        return Err(SummaryError::InvalidHeight(k));
    }
    let mbb = extract_mbb_summary(s)?;
    let gs = stored_geometries(s)?;
    let grid = Grid { rect: mbb.shape.bbox(), n: 1 << k };
    let crs = gs[0].crs();
    let prepared = covers(&gs)?
        .into_iter()
        .map(|p| Geometry::with_crs(Shape::Polygon(p), crs).map(PreparedGeometry::new))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&PreparedGeometry> = prepared.iter().collect();
    let kept = kept_cells(&grid, &refs);
    let polys = merge_cells(&kept)
        .into_iter()
        .map(|(i0, i1, j0, j1)| grid.span(i0, i1, j0, j1).to_polygon())
        .collect();
    let shape = from_polygons(polys, crs)?;
    BoundingSummary::new(shape, Flavor::Quadtree(k))
}
