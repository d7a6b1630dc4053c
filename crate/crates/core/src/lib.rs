pub mod conventions;
pub mod curvature;
pub mod cylinder;
pub mod energy;
pub mod error;
pub mod fd;
pub mod harness;
pub mod linalg;
pub mod metric;
pub mod rescaling;
pub mod solver;
pub mod special;

pub use error::{LabError, Result};
