#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attention;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod losses;
pub mod metrics;
pub mod motion;
pub mod priors;
pub mod raster;
pub mod spatial_depth;
pub mod synth;
pub mod tensor;
pub mod warp;

pub use error::{Error, Result};
