//! Image-shaped containers with validity masks, bilinear sampling,
//! gradients and file I/O.
//!
//! Every reduction runs over valid pixels only, accumulates in `f64`, and
//! visits pixels in row-major order so results do not depend on the thread
//! count.

mod grid;
pub mod io;
mod ops;
mod sample;

pub use grid::{
    masked_mean, masked_sum, ColorImage, CoordGrid, Grid, MaskedSum, ScalarMap, Texel, VectorMap,
};
pub use ops::{gradient, image_gradient_magnitude, mean_normalized_inverse};
pub use sample::{bilinear_sample, identity_coords, sample_at, sample_clamped, SNAP_TOLERANCE};
