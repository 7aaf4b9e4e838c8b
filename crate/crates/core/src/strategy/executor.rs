//! Episode executor for the vision-first, vision-touch (THS) and
//! touch-first (TPE) strategies.

use std::time::Instant;

use crate::detect::{extract_grasps, to_world, Detector};
use crate::error::{CoreError, Result};
use crate::geometry::Vec2;
use crate::grasp::{GripperSpec, WorldGrasp};
use crate::strategy::config::{StrategyConfig, StrategyMode};
use crate::strategy::marks::Marks;
use crate::strategy::record::{Attempt, AttemptOutcome, EpisodeRecord, Event};
use crate::tactile::sensor::pixel_offset;
use crate::tactile::{adaptive_drop_height, calibration_offset, contact_region, sense, ContactRegion, SensorNoise};
use crate::worldsim::{judge_grasp, CameraModel, Outcome, Scene};

/// Identifies a grasped object from its contact region and appearance.
pub trait GraspClassifier {
    fn classify(&self, scene: &Scene, p: Vec2, region: &ContactRegion) -> Result<(usize, f64)>;
}

/// Everything an episode needs besides the scene and the strategy config.
pub struct Setup<'a> {
    pub cam: &'a CameraModel,
    pub gripper: &'a GripperSpec,
    pub detector: Option<&'a dyn Detector>,
    pub classifier: Option<&'a dyn GraspClassifier>,
    pub scene_seed: u64,
    pub policy_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CalibStatus {
    Converged,
    Ambiguous,
    Lost,
}

fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Episode<'a> {
    scene: Scene,
    cfg: &'a StrategyConfig,
    setup: &'a Setup<'a>,
    rec: EpisodeRecord,
    marks: Marks,
    senses: u64,
    budget: usize,
}

impl<'a> Episode<'a> {
    fn new(scene: &Scene, cfg: &'a StrategyConfig, setup: &'a Setup<'a>) -> Self {
        Episode {
            scene: scene.clone(),
            cfg,
            setup,
            rec: EpisodeRecord::new(setup.scene_seed, setup.policy_seed, cfg.mode),
            marks: Marks::default(),
            senses: 0,
            budget: cfg.max_attempts,
        }
    }

    fn gripper(&self) -> &GripperSpec {
        self.setup.gripper
    }

    fn mv(&mut self, p: Vec2, h: f64) {
        self.rec.move_count += 1;
        self.rec.sim_time_ms += self.cfg.t_move_ms;
        self.rec.events.push(Event::Move { x: p.x, y: p.y, h });
    }

    fn touch(&mut self, p: Vec2, h: f64) -> Option<ContactRegion> {
        self.rec.probe_count += 1;
        self.rec.sim_time_ms += self.cfg.t_probe_ms;
        let noise = SensorNoise::new(self.cfg.noise_rate, mix(self.setup.policy_seed, self.senses));
        self.senses += 1;
        let region = sense(&self.scene, self.setup.gripper, p, h, noise)
            .ok()
            .and_then(|f| contact_region(&f, self.setup.gripper));
        let area = region.as_ref().map_or(0, |r| r.area());
        self.rec.events.push(Event::Sense { x: p.x, y: p.y, h, contact: region.is_some(), area });
        region
    }

    fn mark(&mut self, p: Vec2, reason: &str) {
        let radius = self.cfg.mark_radius;
        self.marks.mark(p, radius);
        self.rec.events.push(Event::Mark { x: p.x, y: p.y, radius, reason: reason.to_string() });
    }

    /// Highest object top under any pixel of the region (ground truth).
    fn true_top(&self, p: Vec2, region: &ContactRegion) -> Option<f64> {
        let g = self.gripper();
        let mut best: Option<f64> = None;
        for o in &self.scene.objects {
            if region.pixels.iter().any(|&(i, j)| o.footprint.contains(p + pixel_offset(g, i, j))) {
                best = Some(best.map_or(o.top_height, |b| b.max(o.top_height)));
            }
        }
        best
    }

    fn calibrate(&mut self, mut p: Vec2, h: f64, mut region: ContactRegion) -> (Vec2, CalibStatus, usize, ContactRegion) {
        let mut iters = 0;
        loop {
            let d = calibration_offset(&region).expect("segmented regions are non-empty");
            if d.norm() <= self.cfg.calib_tol {
                return (p, CalibStatus::Converged, iters, region);
            }
            if iters >= self.cfg.max_calib_iters {
                return (p, CalibStatus::Ambiguous, iters, region);
            }
            self.rec.events.push(Event::Calibrate { dx: d.x, dy: d.y, mec_radius: region.mec.radius });
            self.rec.calib_count += 1;
            iters += 1;
            p = p + d;
            self.mv(p, h);
            match self.touch(p, h) {
                Some(r) => region = r,
                None => return (p, CalibStatus::Lost, iters, region),
            }
        }
    }

    fn blank_attempt(&self, outcome: AttemptOutcome, p: Vec2, h: f64) -> Attempt {
        Attempt {
            outcome,
            object_id: None,
            x: p.x,
            y: p.y,
            h,
            calib_iters: 0,
            contact_h: None,
            true_top: None,
            final_offset: None,
            predicted_class: None,
            true_class: None,
        }
    }

    /// Closes the gripper at `g`, judges, classifies and removes a captured object.
    fn grasp(&mut self, g: WorldGrasp, region: Option<&ContactRegion>, mut attempt: Attempt) -> Result<bool> {
        let j = judge_grasp(&self.scene, &g, self.setup.gripper);
        self.rec.events.push(Event::Grasp { x: g.p.x, y: g.p.y, h: g.h, r: g.r, outcome: j.outcome, object_id: j.object_id });
        attempt.outcome = j.outcome.into();
        attempt.object_id = j.object_id;
        attempt.final_offset = j.object_id.map(|_| j.distance);
        attempt.true_class = j.object_id.and_then(|id| self.scene.object(id)).map(|o| o.class_id);
        if j.outcome == Outcome::Success {
            if let (Some(clf), Some(region)) = (self.setup.classifier, region) {
                let (class_id, confidence) = clf.classify(&self.scene, g.p, region)?;
                self.rec.events.push(Event::Classify { class_id, confidence });
                attempt.predicted_class = Some(class_id);
            }
            if let Some(id) = j.object_id {
                self.scene.remove_object(id);
            }
        }
        let success = attempt.outcome == AttemptOutcome::Success;
        self.rec.attempts.push(attempt);
        if !success {
            self.mark(g.p, "failed_grasp");
        }
        Ok(success)
    }

    /// Presses, calibrates and grasps after touch found contact.
    fn calibrate_and_grasp(&mut self, p: Vec2, h: f64, r: f64, region: ContactRegion, mut attempt: Attempt) -> Result<bool> {
        let (p, status, iters, region) = self.calibrate(p, h, region);
        attempt.calib_iters = iters;
        attempt.x = p.x;
        attempt.y = p.y;
        match status {
            CalibStatus::Converged => {
                self.grasp(WorldGrasp { p, h, r }, Some(&region), attempt)
            }
            CalibStatus::Ambiguous => {
                attempt.outcome = AttemptOutcome::Ambiguous;
                self.rec.attempts.push(attempt);
                self.mark(p, "ambiguous");
                Ok(false)
            }
            CalibStatus::Lost => {
                attempt.outcome = AttemptOutcome::NoContact;
                self.rec.attempts.push(attempt);
                self.mark(p, "lost_contact");
                Ok(false)
            }
        }
    }

    /// Descends from the safe height; returns the declared contact height and region.
    ///
    /// The declared height adds the press depth implied by the contact radius
    /// to the probe height, kept below the last probe without contact.
    fn descend(&mut self, p: Vec2) -> Option<(f64, ContactRegion)> {
        self.mv(p, self.cfg.safe_height);
        let mut above = self.cfg.safe_height;
        for h in self.cfg.descent_schedule() {
            if let Some(region) = self.touch(p, h) {
                let rho = self.gripper().radius;
                let a = region.mec.radius.min(rho);
                let depth = rho - (rho * rho - a * a).sqrt();
                return Some(((h + depth).min(above), region));
            }
            above = h;
        }
        None
    }

    /// Touch at a press height below `contact_h`, then calibrate and grasp.
    fn press_calibrate_grasp(&mut self, p: Vec2, r_hat: f64, contact_h: f64, region: ContactRegion) -> Result<bool> {
        let mut attempt = self.blank_attempt(AttemptOutcome::Miss, p, contact_h);
        attempt.contact_h = Some(contact_h);
        attempt.true_top = self.true_top(p, &region);
        let press = adaptive_drop_height(r_hat, contact_h, &self.cfg.ahd).max(self.cfg.floor_height);
        attempt.h = press;
        let mut region = region;
        if press < contact_h {
            self.mv(p, press);
            if let Some(r) = self.touch(p, press) {
                region = r;
            }
        }
        self.calibrate_and_grasp(p, press, r_hat, region, attempt)
    }

    fn approach_vision_first(&mut self, w: WorldGrasp) -> Result<bool> {
        let h = adaptive_drop_height(w.r, self.cfg.plane_top_height, &self.cfg.ahd);
        self.mv(w.p, h);
        if !self.cfg.calibrate {
            let attempt = self.blank_attempt(AttemptOutcome::Miss, w.p, h);
            return self.grasp(WorldGrasp { p: w.p, h, r: w.r }, None, attempt);
        }
        let Some(region) = self.touch(w.p, h) else {
            let a = self.blank_attempt(AttemptOutcome::NoContact, w.p, h);
            self.rec.attempts.push(a);
            self.mark(w.p, "wrong_detection");
            return Ok(false);
        };
        let attempt = self.blank_attempt(AttemptOutcome::Miss, w.p, h);
        let grasped = self.calibrate_and_grasp(w.p, h, w.r, region, attempt)?;
        if !grasped {
            self.mark(w.p, "visited");
        }
        Ok(grasped)
    }

    fn approach_vision_touch(&mut self, w: WorldGrasp) -> Result<bool> {
        let Some((contact_h, region)) = self.descend(w.p) else {
            let a = self.blank_attempt(AttemptOutcome::NoContact, w.p, self.cfg.floor_height);
            self.rec.attempts.push(a);
            self.mark(w.p, "no_contact_to_floor");
            return Ok(false);
        };
        let grasped = self.press_calibrate_grasp(w.p, w.r, contact_h, region)?;
        if !grasped {
            self.mark(w.p, "visited");
        }
        Ok(grasped)
    }

    fn run_vision(&mut self) -> Result<()> {
        let detector = self
            .setup
            .detector
            .ok_or_else(|| CoreError::Config("vision strategies need a detector".into()))?;
        let cam = self.setup.cam;
        let mut round = 0;
        loop {
            let map = match detector.detect(&self.scene, cam) {
                Ok(m) => m,
                Err(e) => {
                    let reason = e.to_string();
                    self.rec.events.push(Event::Abort { reason: reason.clone() });
                    self.rec.aborted = Some(reason);
                    return Ok(());
                }
            };
            let cands = extract_grasps(&map.q, &map.r, self.cfg.k, detector.r_max());
            self.rec.events.push(Event::Detect { round, candidates: cands.clone() });
            let mut grasped = false;
            for c in cands {
                if c.q <= self.cfg.q_threshold || self.budget == 0 {
                    break;
                }
                let w = to_world(&c, cam, self.cfg.plane_top_height, self.scene.support.base_height, self.setup.gripper)?;
                if self.marks.is_marked(w.p) {
                    continue;
                }
                self.budget -= 1;
                let done = match self.cfg.mode {
                    StrategyMode::VisionTouch => self.approach_vision_touch(w)?,
                    _ => self.approach_vision_first(w)?,
                };
                if done {
                    grasped = true;
                    break;
                }
            }
            if !grasped {
                return Ok(());
            }
            round += 1;
        }
    }

    fn run_touch_first(&mut self) -> Result<()> {
        for node in self.cfg.lattice() {
            if let Some((contact_h, region)) = self.descend(node) {
                self.press_calibrate_grasp(node, self.cfg.tpe_radius_guess, contact_h, region)?;
                return Ok(());
            }
        }
        self.rec.not_found = true;
        Ok(())
    }
}

pub fn run_episode(scene: &Scene, cfg: &StrategyConfig, setup: &Setup<'_>) -> Result<EpisodeRecord> {
    cfg.validate()?;
    setup.gripper.validate()?;
    let start = Instant::now();
    let mut ep = Episode::new(scene, cfg, setup);
    match cfg.mode {
        StrategyMode::VisionFirst | StrategyMode::VisionTouch => ep.run_vision()?,
        StrategyMode::TouchFirst => ep.run_touch_first()?,
    }
    ep.rec.wallclock_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(ep.rec)
}

pub fn run_vision_first(scene: &Scene, cfg: &StrategyConfig, setup: &Setup<'_>) -> Result<EpisodeRecord> {
    run_episode(scene, &StrategyConfig { mode: StrategyMode::VisionFirst, ..cfg.clone() }, setup)
}

pub fn run_vision_touch(scene: &Scene, cfg: &StrategyConfig, setup: &Setup<'_>) -> Result<EpisodeRecord> {
    run_episode(scene, &StrategyConfig { mode: StrategyMode::VisionTouch, ..cfg.clone() }, setup)
}

pub fn run_touch_first(scene: &Scene, cfg: &StrategyConfig, setup: &Setup<'_>) -> Result<EpisodeRecord> {
    run_episode(scene, &StrategyConfig { mode: StrategyMode::TouchFirst, ..cfg.clone() }, setup)
}
