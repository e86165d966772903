//! Planar polygon primitives in projected meters.
//!
//! Rings are stored implicitly closed: the first vertex is not repeated at
//! the end. After construction the exterior ring is counter-clockwise and
//! every hole is clockwise.

use geo::{Area, BooleanOps};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point,
    pub max: Point,
}

impl BoundingBox {
    pub fn intersects(&self, other: &BoundingBox) -> bool {
        self.min.x <= other.max.x && other.min.x <= self.max.x && self.min.y <= other.max.y && other.min.y <= self.max.y
    }

    pub fn expanded(&self, by: f64) -> BoundingBox {
        BoundingBox {
            min: Point::new(self.min.x - by, self.min.y - by),
            max: Point::new(self.max.x + by, self.max.y + by),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    exterior: Vec<Point>,
    holes: Vec<Vec<Point>>,
}

/// Twice the signed area of an implicitly closed ring (positive = CCW).
fn ring_signed_area2(ring: &[Point]) -> f64 {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum()
}

fn clean_ring(mut ring: Vec<Point>) -> Vec<Point> {
    ring.dedup();
    while ring.len() > 1 && ring.first() == ring.last() {
        ring.pop();
    }
    ring
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, including touching and collinear overlap.
pub(crate) fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn ring_edges(ring: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = ring.len();
    (0..n).map(move |i| (ring[i], ring[(i + 1) % n]))
}

fn ring_is_simple(ring: &[Point]) -> bool {
    let n = ring.len();
    for i in 0..n {
        let (a1, a2) = (ring[i], ring[(i + 1) % n]);
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            let (b1, b2) = (ring[j], ring[(j + 1) % n]);
            if adjacent {
                // Adjacent edges share one vertex; they may only overlap if they fold back.
                let shared = if j == i + 1 { a2 } else { a1 };
                let (other_a, other_b) = if j == i + 1 { (a1, b2) } else { (a2, b1) };
                if orient(shared, other_a, other_b) == 0.0 {
                    let da = (other_a.x - shared.x, other_a.y - shared.y);
                    let db = (other_b.x - shared.x, other_b.y - shared.y);
                    if da.0 * db.0 + da.1 * db.1 > 0.0 {
                        return false;
                    }
                }
                continue;
            }
            if segments_intersect(a1, a2, b1, b2) {
                return false;
            }
        }
    }
    true
}

fn rings_cross(a: &[Point], b: &[Point]) -> bool {
    ring_edges(a).any(|(a1, a2)| ring_edges(b).any(|(b1, b2)| segments_intersect(a1, a2, b1, b2)))
}

fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len2 = dx * dx + dy * dy;
    if len2 == 0.0 {
        return p.distance(&a);
    }
    let t = (((p.x - a.x) * dx + (p.y - a.y) * dy) / len2).clamp(0.0, 1.0);
    p.distance(&Point::new(a.x + t * dx, a.y + t * dy))
}

/// Even-odd crossing test for one ring.
fn ring_contains(ring: &[Point], p: Point) -> bool {
    let mut inside = false;
    for (a, b) in ring_edges(ring) {
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

impl Polygon {
    /// Validates and normalizes a polygon. A repeated closing vertex is accepted and dropped.
    pub fn new(exterior: Vec<Point>, holes: Vec<Vec<Point>>) -> Result<Self> {
        let mut exterior = clean_ring(exterior);
        if exterior.len() < 3 {
            return Err(Error::Geometry(format!(
                "exterior ring has {} distinct vertices, need at least 3",
                exterior.len()
            )));
        }
        if exterior.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Geometry("non-finite coordinate".into()));
        }
        if !ring_is_simple(&exterior) {
            return Err(Error::Geometry("exterior ring self-intersects".into()));
        }
        if ring_signed_area2(&exterior) < 0.0 {
            exterior.reverse();
        }
        if ring_signed_area2(&exterior) <= 0.0 {
            return Err(Error::Geometry("exterior ring has zero area".into()));
        }
        let mut cleaned = Vec::with_capacity(holes.len());
        for hole in holes {
            let mut hole = clean_ring(hole);
            if hole.len() < 3 || !ring_is_simple(&hole) {
                return Err(Error::Geometry("invalid hole ring".into()));
            }
            if ring_signed_area2(&hole) > 0.0 {
                hole.reverse();
            }
            if rings_cross(&exterior, &hole) || !ring_contains(&exterior, hole[0]) {
                return Err(Error::Geometry("hole not strictly inside exterior".into()));
            }
            cleaned.push(hole);
        }
        for i in 0..cleaned.len() {
            for j in (i + 1)..cleaned.len() {
                if rings_cross(&cleaned[i], &cleaned[j]) {
                    return Err(Error::Geometry("holes intersect".into()));
                }
            }
        }
        let poly = Polygon {
            exterior,
            holes: cleaned,
        };
        if poly.area() <= 0.0 {
            return Err(Error::Geometry("non-positive area".into()));
        }
        Ok(poly)
    }

    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        Polygon::new(
            vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
            vec![],
        )
    }

    pub fn exterior(&self) -> &[Point] {
        &self.exterior
    }

    pub fn holes(&self) -> &[Vec<Point>] {
        &self.holes
    }

    pub fn rings(&self) -> impl Iterator<Item = &[Point]> {
        std::iter::once(self.exterior.as_slice()).chain(self.holes.iter().map(Vec::as_slice))
    }

    /// Edges of the exterior ring in counter-clockwise order.
    pub fn exterior_edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        ring_edges(&self.exterior)
    }

    pub fn area(&self) -> f64 {
        let ext = ring_signed_area2(&self.exterior);
        let holes: f64 = self.holes.iter().map(|h| ring_signed_area2(h)).sum();
        0.5 * (ext + holes)
    }

    pub fn perimeter(&self) -> f64 {
        self.exterior_edges().map(|(a, b)| a.distance(&b)).sum()
    }

    /// Area centroid, holes subtracted.
    pub fn centroid(&self) -> Point {
        // Shift to the first vertex to keep the cross products well conditioned.
        let o = self.exterior[0];
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for ring in self.rings() {
            for (p, q) in ring_edges(ring) {
                let (px, py) = (p.x - o.x, p.y - o.y);
                let (qx, qy) = (q.x - o.x, q.y - o.y);
                let cross = px * qy - qx * py;
                a2 += cross;
                cx += (px + qx) * cross;
                cy += (py + qy) * cross;
            }
        }
        Point::new(o.x + cx / (3.0 * a2), o.y + cy / (3.0 * a2))
    }

    pub fn bbox(&self) -> BoundingBox {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.exterior {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        BoundingBox { min, max }
    }

    /// Interior test; points exactly on the boundary may go either way.
    pub fn contains(&self, p: Point) -> bool {
        ring_contains(&self.exterior, p) && !self.holes.iter().any(|h| ring_contains(h, p))
    }

    /// Unsigned distance from `p` to the nearest boundary edge (exterior or hole).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.rings()
            .flat_map(ring_edges)
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Signed boundary distance: negative inside, positive outside.
    pub fn signed_distance(&self, p: Point) -> f64 {
        let d = self.boundary_distance(p);
        if self.contains(p) {
            -d
        } else {
            d
        }
    }

    /// Radius of the disc with the same area.
    pub fn equivalent_radius(&self) -> f64 {
        (self.area() / std::f64::consts::PI).sqrt()
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Polygon {
        let shift = |r: &Vec<Point>| r.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect();
        Polygon {
            exterior: shift(&self.exterior),
            holes: self.holes.iter().map(shift).collect(),
        }
    }

    pub fn to_geo(&self) -> geo::Polygon<f64> {
        let ring = |r: &[Point]| {
            let mut coords: Vec<geo::Coord<f64>> = r.iter().map(|p| geo::Coord { x: p.x, y: p.y }).collect();
            coords.push(coords[0]);
            geo::LineString::new(coords)
        };
        geo::Polygon::new(ring(&self.exterior), self.holes.iter().map(|h| ring(h)).collect())
    }

    /// Area of the overlap between two polygons.
    pub fn intersection_area(&self, other: &Polygon) -> f64 {
        if !self.bbox().intersects(&other.bbox()) {
            return 0.0;
        }
        self.to_geo().intersection(&other.to_geo()).unsigned_area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn unit_square_area_and_orientation() {
        let cw = Polygon::new(pts(&[(0., 0.), (0., 1.), (1., 1.), (1., 0.)]), vec![]).unwrap();
        assert_eq!(cw.area(), 1.0);
        assert!(ring_signed_area2(cw.exterior()) > 0.0);
        let closed = Polygon::new(pts(&[(0., 0.), (1., 0.), (1., 1.), (0., 1.), (0., 0.)]), vec![]).unwrap();
        assert_eq!(closed.exterior().len(), 4);
        assert_eq!(closed.centroid(), Point::new(0.5, 0.5));
    }

    #[test]
    fn rejects_bowtie_and_degenerate() {
        assert!(Polygon::new(pts(&[(0., 0.), (1., 1.), (1., 0.), (0., 1.)]), vec![]).is_err());
        assert!(Polygon::new(pts(&[(0., 0.), (1., 0.), (2., 0.)]), vec![]).is_err());
        assert!(Polygon::new(pts(&[(0., 0.), (1., 0.)]), vec![]).is_err());
    }

    #[test]
    fn hole_is_subtracted() {
        let p = Polygon::new(
            pts(&[(0., 0.), (10., 0.), (10., 10.), (0., 10.)]),
            vec![pts(&[(4., 4.), (6., 4.), (6., 6.), (4., 6.)])],
        )
        .unwrap();
        assert!((p.area() - 96.0).abs() < 1e-12);
        assert!(!p.contains(Point::new(5., 5.)));
        assert!(p.contains(Point::new(1., 1.)));
        let c = p.centroid();
        assert!((c.x - 5.0).abs() < 1e-12 && (c.y - 5.0).abs() < 1e-12);
    }

    #[test]
    fn signed_distance_sign() {
        let sq = Polygon::rectangle(0., 0., 10., 10.).unwrap();
        assert!((sq.signed_distance(Point::new(5., 1.)) + 1.0).abs() < 1e-12);
        assert!((sq.signed_distance(Point::new(5., -2.)) - 2.0).abs() < 1e-12);
        assert!((sq.signed_distance(Point::new(13., 14.)) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn intersection_area_of_rectangles() {
        let a = Polygon::rectangle(0., 0., 10., 10.).unwrap();
        let b = Polygon::rectangle(5., 0., 15., 10.).unwrap();
        assert!((a.intersection_area(&b) - 50.0).abs() < 1e-9);
        assert!((a.intersection_area(&a) - 100.0).abs() < 1e-9);
        let far = Polygon::rectangle(20., 20., 30., 30.).unwrap();
        assert_eq!(a.intersection_area(&far), 0.0);
    }
}
