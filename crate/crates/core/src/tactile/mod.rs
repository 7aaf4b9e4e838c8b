//! Tactile sensing, contact segmentation and calibration geometry.

pub mod calib;
pub mod mec;
pub mod segment;
pub mod sensor;

pub use calib::{adaptive_drop_height, calibration_offset, contact_region, AhdConfig, ContactRegion};
pub use mec::{min_enclosing_circle, Circle};
pub use segment::segment;
pub use sensor::{sense, SensorNoise, TactileFrame};
