//! Differentiable transient Monte Carlo rendering on triangle meshes.

pub mod camera;
pub mod cli;
pub mod dual;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod io;
pub mod optimizer;
pub mod presets;
pub mod scene;
pub mod temporal;
pub mod transport;
pub mod validation;
pub mod vec;

pub use error::{Error, Result};
