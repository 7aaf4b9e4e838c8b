use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::grasp::GraspCandidate;
use crate::strategy::config::StrategyMode;
use crate::worldsim::Outcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttemptOutcome {
    Success,
    Miss,
    Slide,
    Collision,
    /// Calibration did not settle within the iteration budget.
    Ambiguous,
    /// Touch found nothing at the detected point.
    NoContact,
}

impl From<Outcome> for AttemptOutcome {
    fn from(o: Outcome) -> Self {
        match o {
            Outcome::Success => AttemptOutcome::Success,
            Outcome::Miss => AttemptOutcome::Miss,
            Outcome::Slide => AttemptOutcome::Slide,
            Outcome::Collision => AttemptOutcome::Collision,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Detect { round: usize, candidates: Vec<GraspCandidate> },
    Move { x: f64, y: f64, h: f64 },
    Sense { x: f64, y: f64, h: f64, contact: bool, area: usize },
    Calibrate { dx: f64, dy: f64, mec_radius: f64 },
    Grasp { x: f64, y: f64, h: f64, r: f64, outcome: Outcome, object_id: Option<usize> },
    Classify { class_id: usize, confidence: f64 },
    Mark { x: f64, y: f64, radius: f64, reason: String },
    Abort { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub outcome: AttemptOutcome,
    /// Object the grasp engaged, if any.
    pub object_id: Option<usize>,
    pub x: f64,
    pub y: f64,
    pub h: f64,
    pub calib_iters: usize,
    /// Height at which touch first reported contact.
    pub contact_h: Option<f64>,
    /// Highest object top among the objects under the contact region.
    pub true_top: Option<f64>,
    /// Distance from the gripper axis to the engaged object's centroid.
    pub final_offset: Option<f64>,
    pub predicted_class: Option<usize>,
    pub true_class: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub scene_seed: u64,
    pub policy_seed: u64,
    pub mode: StrategyMode,
    pub events: Vec<Event>,
    pub attempts: Vec<Attempt>,
    pub probe_count: usize,
    pub calib_count: usize,
    pub move_count: usize,
    pub sim_time_ms: u64,
    pub wallclock_ms: f64,
    /// TPE: the lattice was exhausted without contact.
    pub not_found: bool,
    pub aborted: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    scene_seed: u64,
    policy_seed: u64,
    mode: StrategyMode,
    attempts: Vec<Attempt>,
    probe_count: usize,
    calib_count: usize,
    move_count: usize,
    sim_time_ms: u64,
    wallclock_ms: f64,
    not_found: bool,
    aborted: Option<String>,
    event_count: usize,
}

impl EpisodeRecord {
    pub fn new(scene_seed: u64, policy_seed: u64, mode: StrategyMode) -> Self {
        EpisodeRecord {
            scene_seed,
            policy_seed,
            mode,
            events: Vec::new(),
            attempts: Vec::new(),
            probe_count: 0,
            calib_count: 0,
            move_count: 0,
            sim_time_ms: 0,
            wallclock_ms: 0.0,
            not_found: false,
            aborted: None,
        }
    }

    /// Equality ignoring wall-clock time.
    pub fn same_trace(&self, other: &EpisodeRecord) -> bool {
        let mut a = self.clone();
        a.wallclock_ms = other.wallclock_ms;
        a == *other
    }

    pub fn successes(&self) -> usize {
        self.attempts.iter().filter(|a| a.outcome == AttemptOutcome::Success).count()
    }

    /// A header line followed by one line per event.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            scene_seed: self.scene_seed,
            policy_seed: self.policy_seed,
            mode: self.mode,
            attempts: self.attempts.clone(),
            probe_count: self.probe_count,
            calib_count: self.calib_count,
            move_count: self.move_count,
            sim_time_ms: self.sim_time_ms,
            wallclock_ms: self.wallclock_ms,
            not_found: self.not_found,
            aborted: self.aborted.clone(),
            event_count: self.events.len(),
        };
        serde_json::to_writer(&mut w, &header)?;
        writeln!(w)?;
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            writeln!(w)?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let first = lines.next().ok_or_else(|| CoreError::Format("empty episode file".into()))??;
        let h: Header = serde_json::from_str(&first)?;
        let mut events = Vec::with_capacity(h.event_count);
        for line in lines.take(h.event_count) {
            events.push(serde_json::from_str(&line?)?);
        }
        if events.len() != h.event_count {
            return Err(CoreError::Format(format!("expected {} events, found {}", h.event_count, events.len())));
        }
        Ok(EpisodeRecord {
            scene_seed: h.scene_seed,
            policy_seed: h.policy_seed,
            mode: h.mode,
            events,
            attempts: h.attempts,
            probe_count: h.probe_count,
            calib_count: h.calib_count,
            move_count: h.move_count,
            sim_time_ms: h.sim_time_ms,
            wallclock_ms: h.wallclock_ms,
            not_found: h.not_found,
            aborted: h.aborted,
        })
    }
}
