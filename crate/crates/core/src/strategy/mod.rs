//! Grasping strategies and their episode records.

pub mod config;
pub mod executor;
pub mod marks;
pub mod record;

pub use config::{StrategyConfig, StrategyMode};
pub use executor::{run_episode, run_touch_first, run_vision_first, run_vision_touch, GraspClassifier, Setup};
pub use marks::Marks;
pub use record::{Attempt, AttemptOutcome, EpisodeRecord, Event};
