//! Seeded lattice value noise with smoothstep interpolation.

fn hash(ix: i64, iy: i64, seed: u64) -> u64 {
    let mut h = seed ^ 0x9E37_79B9_7F4A_7C15;
    for v in [ix as u64, iy as u64] {
        h ^= v.wrapping_mul(0xBF58_476D_1CE4_E5B9);
        h = h.rotate_left(31).wrapping_mul(0x94D0_49BB_1331_11EB);
        h ^= h >> 29;
    }
    h
}

/// Uniform value in [0, 1) attached to an integer lattice point.
pub fn lattice(ix: i64, iy: i64, seed: u64) -> f64 {
    (hash(ix, iy, seed) >> 11) as f64 / (1u64 << 53) as f64
}

fn smooth(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Value noise in [0, 1], continuous in (x, y), unit lattice spacing.
pub fn value(x: f64, y: f64, seed: u64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (tx, ty) = (smooth(x - fx), smooth(y - fy));
    let a = lattice(ix, iy, seed);
    let b = lattice(ix + 1, iy, seed);
    let c = lattice(ix, iy + 1, seed);
    let d = lattice(ix + 1, iy + 1, seed);
    let top = a + (b - a) * tx;
    let bottom = c + (d - c) * tx;
    top + (bottom - top) * ty
}

/// Fractal sum of `octaves` value-noise layers, normalised to [0, 1].
pub fn fbm(x: f64, y: f64, seed: u64, octaves: u32) -> f64 {
    let mut sum = 0.0;
    let mut norm = 0.0;
    let mut amp = 1.0;
    let mut freq = 1.0;
    for o in 0..octaves {
        sum += amp * value(x * freq, y * freq, seed.wrapping_add(o as u64 * 7919));
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    sum / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_lattice_values_and_stays_in_range() {
        assert_eq!(value(3.0, -2.0, 5), lattice(3, -2, 5));
        for i in 0..500 {
            let (x, y) = (i as f64 * 0.37 - 40.0, i as f64 * 0.11 + 3.0);
            let v = fbm(x, y, 11, 4);
            assert!((0.0..=1.0).contains(&v));
        }
        assert_ne!(value(0.5, 0.5, 1), value(0.5, 0.5, 2));
    }
}
