//! Planar geometry: points, simple polygons, and the object footprint shapes.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn rotate(self, angle: f64) -> Vec2 {
        let (s, c) = angle.sin_cos();
        Vec2::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn lerp(self, o: Vec2, t: f64) -> Vec2 {
        self + (o - self) * t
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn new(min: Vec2, max: Vec2) -> Self {
        Rect { min, max }
    }

    pub fn centered(center: Vec2, width: f64, height: f64) -> Self {
        let half = Vec2::new(width / 2.0, height / 2.0);
        Rect { min: center - half, max: center + half }
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Vec2 {
        self.min.lerp(self.max, 0.5)
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// A closed polygon given by its vertices (no repeated closing vertex).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Self {
        Polygon { vertices }
    }

    /// Regular `n`-gon of circumradius `radius` centred at the origin.
    pub fn regular(n: usize, radius: f64, phase: f64) -> Self {
        Polygon::new(
            (0..n)
                .map(|i| {
                    let a = phase + 2.0 * PI * i as f64 / n as f64;
                    Vec2::new(radius * a.cos(), radius * a.sin())
                })
                .collect(),
        )
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn signed_area(&self) -> f64 {
        0.5 * self.edges().map(|(a, b)| a.cross(b)).sum::<f64>()
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    /// Area centroid; falls back to the vertex mean for degenerate polygons.
    pub fn centroid(&self) -> Vec2 {
        let a = self.signed_area();
        if a.abs() < 1e-12 {
            let n = self.vertices.len().max(1) as f64;
            return self.vertices.iter().fold(Vec2::ZERO, |s, &v| s + v) * (1.0 / n);
        }
        let (cx, cy) = self.edges().fold((0.0, 0.0), |(cx, cy), (p, q)| {
            let w = p.cross(q);
            (cx + (p.x + q.x) * w, cy + (p.y + q.y) * w)
        });
        Vec2::new(cx / (6.0 * a), cy / (6.0 * a))
    }

    /// Even-odd point containment.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the nearest point of the boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn bounds(&self) -> Rect {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            min = Vec2::new(min.x.min(v.x), min.y.min(v.y));
            max = Vec2::new(max.x.max(v.x), max.y.max(v.y));
        }
        Rect { min, max }
    }

    /// Largest vertex distance from `center`.
    pub fn radius_about(&self, center: Vec2) -> f64 {
        self.vertices.iter().map(|v| v.dist(center)).fold(0.0, f64::max)
    }

    pub fn translate(&self, d: Vec2) -> Polygon {
        Polygon::new(self.vertices.iter().map(|&v| v + d).collect())
    }

    pub fn rotate(&self, angle: f64) -> Polygon {
        Polygon::new(self.vertices.iter().map(|&v| v.rotate(angle)).collect())
    }

    pub fn scale(&self, s: f64) -> Polygon {
        Polygon::new(self.vertices.iter().map(|&v| v * s).collect())
    }

    /// No two non-adjacent edges intersect and no edge is degenerate.
    pub fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        if n < 3 {
            return false;
        }
        let e: Vec<(Vec2, Vec2)> = self.edges().collect();
        if e.iter().any(|(a, b)| a.dist(*b) == 0.0) {
            return false;
        }
        for i in 0..n {
            for j in i + 1..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && segments_intersect(e[i].0, e[i].1, e[j].0, e[j].1) {
                    return false;
                }
            }
        }
        true
    }

    /// Indices of the two vertices at maximum distance (the diameter pair),
    /// via rotating calipers over the convex hull.
    pub fn diameter_pair(&self) -> Option<(usize, usize)> {
        let n = self.vertices.len();
        if n < 2 {
            return None;
        }
        let hull = convex_hull(&self.vertices);
        if hull.len() < 3 {
            // collinear input: the extreme pair of the hull segment
            let (a, b) = (hull[0], *hull.last().expect("non-empty"));
            return Some((a.min(b), a.max(b)));
        }
        let h = hull.len();
        let pt = |i: usize| self.vertices[hull[i % h]];
        let mut best = (0.0, hull[0], hull[1]);
        let mut j = 1;
        for i in 0..h {
            let edge = pt(i + 1) - pt(i);
            // advance j while the triangle area grows
            while edge.cross(pt(j + 1) - pt(i)).abs() > edge.cross(pt(j) - pt(i)).abs() {
                j += 1;
            }
            for (a, b) in [(i, j), (i + 1, j)] {
                let d = pt(a).dist(pt(b));
                if d > best.0 {
                    best = (d, hull[a % h], hull[b % h]);
                }
            }
        }
        Some((best.1.min(best.2), best.1.max(best.2)))
    }
}

/// Monotone-chain convex hull, returning vertex indices counter-clockwise
/// without collinear points.
pub fn convex_hull(points: &[Vec2]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| {
        points[a]
            .x
            .total_cmp(&points[b].x)
            .then(points[a].y.total_cmp(&points[b].y))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let turn = |o: usize, a: usize, b: usize| (points[a] - points[o]).cross(points[b] - points[o]);
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> =
            if pass == 0 { Box::new(idx.iter()) } else { Box::new(idx.iter().rev()) };
        for &i in iter {
            while hull.len() >= start + 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], i) <= 0.0 {
                hull.pop();
            }
            hull.push(i);
        }
        hull.pop();
    }
    hull
}

pub fn segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sq();
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

pub fn segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
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

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_square_properties() {
        let sq = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(2.0, 0.0),
            Vec2::new(2.0, 2.0),
            Vec2::new(0.0, 2.0),
        ]);
        assert_eq!(sq.area(), 4.0);
        assert_eq!(sq.centroid(), Vec2::new(1.0, 1.0));
        assert!(sq.contains(Vec2::new(1.0, 1.5)));
        assert!(!sq.contains(Vec2::new(2.5, 1.0)));
        assert!(sq.is_simple());
        assert_eq!(sq.boundary_distance(Vec2::new(1.0, 1.5)), 0.5);
        let (a, b) = sq.diameter_pair().unwrap();
        assert!((sq.vertices[a].dist(sq.vertices[b]) - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bow = Polygon::new(vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
        ]);
        assert!(!bow.is_simple());
    }

    proptest! {
        #[test]
        fn calipers_match_all_pairs(pts in prop::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 2..40)) {
            let poly = Polygon::new(pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect());
            let (a, b) = poly.diameter_pair().unwrap();
            let got = poly.vertices[a].dist(poly.vertices[b]);
            let mut best: f64 = 0.0;
            for p in &poly.vertices {
                for q in &poly.vertices {
                    best = best.max(p.dist(*q));
                }
            }
            prop_assert!((got - best).abs() <= 1e-9 * best.max(1.0));
        }
    }
}
