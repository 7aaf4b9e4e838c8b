use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::geometry::{Rect, Vec2};
use crate::tactile::AhdConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyMode {
    VisionFirst,
    VisionTouch,
    TouchFirst,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StrategyConfig {
    pub mode: StrategyMode,
    pub q_threshold: f64,
    pub max_calib_iters: usize,
    /// mm
    pub calib_tol: f64,
    /// Descent step delta, mm.
    pub descent_step: f64,
    pub floor_height: f64,
    /// Height descents start from, mm.
    pub safe_height: f64,
    /// Lattice pitch L, mm.
    pub tpe_step: f64,
    pub tpe_region: Rect,
    /// Radius assumed for the press depth when no detection exists, mm.
    pub tpe_radius_guess: f64,
    pub k: usize,
    /// When false, vision-first grasps the detected point without touching.
    pub calibrate: bool,
    /// Known top height of objects on a plane, mm.
    pub plane_top_height: f64,
    pub mark_radius: f64,
    pub t_probe_ms: u64,
    pub t_move_ms: u64,
    pub noise_rate: f64,
    pub ahd: AhdConfig,
    /// Upper bound on grasp attempts plus rejected points per episode.
    pub max_attempts: usize,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            mode: StrategyMode::VisionFirst,
            q_threshold: 0.25,
            max_calib_iters: 5,
            calib_tol: 2.0,
            descent_step: 5.0,
            floor_height: 20.0,
            safe_height: 100.0,
            tpe_step: 50.0,
            tpe_region: Rect::centered(Vec2::ZERO, 400.0, 400.0),
            tpe_radius_guess: 30.0,
            k: 5,
            calibrate: true,
            plane_top_height: 40.0,
            mark_radius: 20.0,
            t_probe_ms: 4000,
            t_move_ms: 1000,
            noise_rate: 0.01,
            ahd: AhdConfig::default(),
            max_attempts: 40,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.descent_step <= 0.0 {
            return Err(CoreError::Config("descent step must be positive".into()));
        }
        if self.tpe_step <= 0.0 {
            return Err(CoreError::Config("lattice pitch must be positive".into()));
        }
        if self.max_calib_iters < 1 {
            return Err(CoreError::Config("max_calib_iters must be at least 1".into()));
        }
        if self.k < 1 {
            return Err(CoreError::Config("k must be at least 1".into()));
        }
        Ok(())
    }

    /// Probe heights of one descent: `max(start - i*delta, floor)` for i = 1, 2, ...
    pub fn descent_schedule(&self) -> Vec<f64> {
        let n = ((self.safe_height - self.floor_height) / self.descent_step).ceil().max(0.0) as usize;
        (1..=n).map(|i| (self.safe_height - i as f64 * self.descent_step).max(self.floor_height)).collect()
    }

    /// Boustrophedon lattice over the region with pitch L, nodes at L/2 + iL.
    pub fn lattice(&self) -> Vec<Vec2> {
        let r = self.tpe_region;
        let l = self.tpe_step;
        let axis = |lo: f64, hi: f64| {
            let mut v = Vec::new();
            let mut x = lo + l / 2.0;
            while x <= hi + 1e-9 {
                v.push(x);
                x += l;
            }
            v
        };
        let (xs, ys) = (axis(r.min.x, r.max.x), axis(r.min.y, r.max.y));
        let mut out = Vec::with_capacity(xs.len() * ys.len());
        for (row, &y) in ys.iter().enumerate() {
            if row % 2 == 0 {
                out.extend(xs.iter().map(|&x| Vec2::new(x, y)));
            } else {
                out.extend(xs.iter().rev().map(|&x| Vec2::new(x, y)));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descent_schedule_arithmetic() {
        let cfg = StrategyConfig { safe_height: 100.0, floor_height: 20.0, descent_step: 5.0, ..Default::default() };
        let s = cfg.descent_schedule();
        assert_eq!(s.len(), 16);
        assert_eq!(s[0], 95.0);
        assert_eq!(*s.last().unwrap(), 20.0);
        let odd = StrategyConfig { floor_height: 22.0, ..cfg };
        let s = odd.descent_schedule();
        assert_eq!(s.len(), 16);
        assert_eq!(*s.last().unwrap(), 22.0);
    }

    #[test]
    fn lattice_is_boustrophedon() {
        let cfg = StrategyConfig {
            tpe_step: 100.0,
            tpe_region: Rect::new(Vec2::ZERO, Vec2::new(400.0, 400.0)),
            ..Default::default()
        };
        let l = cfg.lattice();
        assert_eq!(l.len(), 16);
        assert_eq!(l[0], Vec2::new(50.0, 50.0));
        assert_eq!(l[3], Vec2::new(350.0, 50.0));
        assert_eq!(l[4], Vec2::new(350.0, 150.0));
        let cfg150 = StrategyConfig { tpe_step: 150.0, ..cfg };
        assert_eq!(cfg150.lattice().len(), 9);
    }
}
