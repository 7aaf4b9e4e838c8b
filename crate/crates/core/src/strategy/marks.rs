use serde::{Deserialize, Serialize};

use crate::geometry::Vec2;

/// World-space circles already handled; candidates inside are skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Marks {
    pub circles: Vec<(Vec2, f64)>,
}

impl Marks {
    pub fn mark(&mut self, center: Vec2, radius: f64) {
        self.circles.push((center, radius));
    }

    pub fn is_marked(&self, p: Vec2) -> bool {
        self.circles.iter().any(|&(c, r)| c.dist(p) <= r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inside_is_skipped_outside_is_not() {
        let mut m = Marks::default();
        m.mark(Vec2::new(10.0, 0.0), 20.0);
        assert!(m.is_marked(Vec2::new(10.0, 0.0)));
        assert!(m.is_marked(Vec2::new(30.0, 0.0)));
        assert!(!m.is_marked(Vec2::new(30.001, 0.0)));
    }
}
