//! Self-supervision losses: photometric (SSIM + L1) over temporal, spatial
//! and spatial-temporal contexts, depth and normal consistency, smoothness,
//! pose consistency, and the weighted total.

mod depth;
mod frameset;
mod photometric;
mod pose;
mod total;

use serde::{Deserialize, Serialize};

use crate::raster::MaskedSum;

pub use depth::{dsc, sdc, smoothness, snc};
pub use frameset::{rig_terms, ContextFrame, FrameSet, FrameSetOptions};
pub use photometric::{
    context_photometric, min_over, mvrc, photometric_error, ssim, DEFAULT_ALPHA, SSIM_C1, SSIM_C2,
};
pub use pose::{pose_consistency, to_front_frame, PoseConsistency};
pub use total::{total_loss, LossReport, LossTerms, LossWeights, ReportEntry, TermKind};

/// A reduced loss term: masked mean and the number of pixels behind it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossTerm {
    pub value: f64,
    pub count: usize,
}

impl LossTerm {
    /// `None` when the sum is empty.
    pub fn from_sum(acc: MaskedSum) -> Option<Self> {
        acc.mean().map(|value| Self {
            value,
            count: acc.count,
        })
    }
}
