use serde::{Deserialize, Serialize};

use crate::geometry::{Polygon, Vec2};
use crate::noise;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportKind {
    Flat,
    Undulating,
    Sand,
    WaterDynamic,
}

/// Height of the surface objects rest on, in mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportField {
    pub kind: SupportKind,
    pub amplitude: f64,
    pub wavelength: f64,
    pub noise_seed: u64,
    pub base_height: f64,
}

impl SupportField {
    pub fn flat(base_height: f64) -> Self {
        SupportField { kind: SupportKind::Flat, amplitude: 0.0, wavelength: 1.0, noise_seed: 0, base_height }
    }

    pub fn undulating(base_height: f64, amplitude: f64, wavelength: f64, noise_seed: u64) -> Self {
        SupportField { kind: SupportKind::Undulating, amplitude, wavelength, noise_seed, base_height }
    }

    pub fn sand(base_height: f64, amplitude: f64, wavelength: f64, noise_seed: u64) -> Self {
        SupportField { kind: SupportKind::Sand, amplitude, wavelength, noise_seed, base_height }
    }

    pub fn water(base_height: f64) -> Self {
        SupportField { kind: SupportKind::WaterDynamic, ..Self::flat(base_height) }
    }

    pub fn height(&self, p: Vec2) -> f64 {
        let (x, y) = (p.x / self.wavelength, p.y / self.wavelength);
        match self.kind {
            SupportKind::Flat | SupportKind::WaterDynamic => self.base_height,
            SupportKind::Undulating => {
                self.base_height + self.amplitude * (2.0 * noise::value(x, y, self.noise_seed) - 1.0)
            }
            SupportKind::Sand => self.base_height + self.amplitude * (2.0 * noise::fbm(x, y, self.noise_seed, 4) - 1.0),
        }
    }

    /// Upper bound on the height anywhere.
    pub fn max_height(&self) -> f64 {
        self.base_height + self.amplitude.abs()
    }

    /// Highest sampled support point under a footprint (vertices plus a 2 mm grid).
    pub fn max_under(&self, footprint: &Polygon) -> f64 {
        if matches!(self.kind, SupportKind::Flat | SupportKind::WaterDynamic) {
            return self.base_height;
        }
        let mut best = footprint.vertices.iter().map(|&v| self.height(v)).fold(f64::NEG_INFINITY, f64::max);
        let b = footprint.bounds();
        let step = 2.0;
        let mut y = b.min.y;
        while y <= b.max.y {
            let mut x = b.min.x;
            while x <= b.max.x {
                let p = Vec2::new(x, y);
                if footprint.contains(p) {
                    best = best.max(self.height(p));
                }
                x += step;
            }
            y += step;
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_is_constant_and_undulating_is_bounded() {
        let f = SupportField::flat(12.5);
        assert_eq!(f.height(Vec2::new(-300.0, 77.0)), 12.5);
        let u = SupportField::undulating(0.0, 20.0, 150.0, 3);
        for i in 0..200 {
            let h = u.height(Vec2::new(i as f64 * 3.1, -(i as f64) * 1.7));
            assert!(h.is_finite() && h.abs() <= 20.0);
            assert_eq!(h, u.height(Vec2::new(i as f64 * 3.1, -(i as f64) * 1.7)));
        }
    }
}
