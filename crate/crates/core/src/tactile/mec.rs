//! Minimum enclosing circle (Welzl's algorithm, iterative form).

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Circle {
    pub fn contains(&self, p: Vec2, tol: f64) -> bool {
        p.dist(self.center) <= self.radius + tol
    }
}

fn tol(scale: f64) -> f64 {
    1e-10 * scale.max(1.0)
}

pub fn circle_two(a: Vec2, b: Vec2) -> Circle {
    Circle { center: a.lerp(b, 0.5), radius: a.dist(b) / 2.0 }
}

/// Circumcircle of three points; `None` when they are collinear.
pub fn circumcircle(a: Vec2, b: Vec2, c: Vec2) -> Option<Circle> {
    let (b, c) = (b - a, c - a);
    let d = 2.0 * b.cross(c);
    if d.abs() < 1e-12 * (b.norm_sq() * c.norm_sq()).sqrt().max(1e-300) {
        return None;
    }
    let (bb, cc) = (b.norm_sq(), c.norm_sq());
    let center = Vec2::new(c.y * bb - b.y * cc, b.x * cc - c.x * bb) * (1.0 / d);
    Some(Circle { center: center + a, radius: center.norm() })
}

/// Smallest circle through `a`, `b`, `c` that contains all three.
fn circle_three(a: Vec2, b: Vec2, c: Vec2) -> Circle {
    let mut best = [circle_two(a, b), circle_two(a, c), circle_two(b, c)]
        .into_iter()
        .filter(|k| [a, b, c].iter().all(|&p| k.contains(p, tol(k.radius))))
        .min_by(|x, y| x.radius.total_cmp(&y.radius));
    if let Some(cc) = circumcircle(a, b, c) {
        if best.is_none_or(|k| cc.radius < k.radius) {
            best = Some(cc);
        }
    }
    best.expect("collinear triples have an enclosing diameter circle")
}

/// Minimum enclosing circle; the shuffle is seeded so results are reproducible.
pub fn min_enclosing_circle(points: &[Vec2]) -> Result<Circle> {
    if points.is_empty() {
        return Err(CoreError::EmptyPointSet);
    }
    let mut p = points.to_vec();
    p.shuffle(&mut ChaCha8Rng::seed_from_u64(0x5EED));
    let scale = p.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let eps = tol(scale);
    let mut c = Circle { center: p[0], radius: 0.0 };
    for i in 1..p.len() {
        if c.contains(p[i], eps) {
            continue;
        }
        c = Circle { center: p[i], radius: 0.0 };
        for j in 0..i {
            if c.contains(p[j], eps) {
                continue;
            }
            c = circle_two(p[i], p[j]);
            for k in 0..j {
                if !c.contains(p[k], eps) {
                    c = circle_three(p[i], p[j], p[k]);
                }
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        let c = min_enclosing_circle(&[Vec2::new(2.0, -1.0)]).unwrap();
        assert_eq!((c.center, c.radius), (Vec2::new(2.0, -1.0), 0.0));
        let c = min_enclosing_circle(&[Vec2::new(0.0, 0.0), Vec2::new(4.0, 2.0)]).unwrap();
        assert_eq!(c.center, Vec2::new(2.0, 1.0));
        assert!((c.radius - 20f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(matches!(min_enclosing_circle(&[]), Err(CoreError::EmptyPointSet)));
    }

    #[test]
    fn obtuse_triangle_uses_longest_side() {
        let c = min_enclosing_circle(&[Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0), Vec2::new(5.0, 1.0)]).unwrap();
        assert!((c.center.x - 5.0).abs() < 1e-12 && c.center.y.abs() < 1e-12);
        assert!((c.radius - 5.0).abs() < 1e-12);
    }
}
