//! Visual-tactile grasping of transparent objects in a 2.5-D simulator.

pub mod annotate;
pub mod detect;
pub mod error;
pub mod fuse;
pub mod geometry;
pub mod grasp;
pub mod imageio;
pub mod noise;
pub mod raster;
pub mod strategy;
pub mod tactile;
pub mod worldsim;

pub use error::{CoreError, Result};
