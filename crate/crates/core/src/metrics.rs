//! Depth-evaluation metrics with optional median scaling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::ScalarMap;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MetricReport {
    pub abs_rel: f64,
    pub sq_rel: f64,
    pub rmse: f64,
    pub rmse_log: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
    pub n: usize,
    /// Factor applied to the prediction before clamping (1 without median
    /// scaling).
    pub scale: f64,
}

/// Median of a non-empty slice; the mean of the middle pair for even length.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Evaluates `pred` at pixels where both maps are valid and
/// `gt ∈ [min_depth, max_depth]`. With `median_scale`, `pred` is first
/// multiplied by `median(gt) / median(pred)` over those pixels. Predictions
/// are then clamped to `[min_depth, max_depth]`.
pub fn evaluate(
    pred: &ScalarMap,
    gt: &ScalarMap,
    min_depth: f64,
    max_depth: f64,
    median_scale: bool,
) -> Result<MetricReport> {
    pred.ensure_same_dims(gt, "prediction and ground truth")?;
    if !(min_depth > 0.0 && min_depth < max_depth && max_depth.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "depth range must satisfy 0 < min < max < inf, got [{min_depth}, {max_depth}]"
        )));
    }
    let (p, g): (Vec<f64>, Vec<f64>) = gt
        .iter_valid()
        .filter(|&(i, d)| pred.mask()[i] && (min_depth..=max_depth).contains(&d))
        .map(|(i, d)| (pred.data()[i], d))
        .unzip();
    if g.is_empty() {
        return Err(Error::NoValidGroundTruth { min_depth, max_depth });
    }
    let scale = if median_scale {
        let mp = median(&p);
        if mp <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "median prediction {mp} is not positive; cannot median-scale"
            )));
        }
        median(&g) / mp
    } else {
        1.0
    };
    let n = g.len() as f64;
    let (mut abs_rel, mut sq_rel, mut sq, mut sq_log) = (0.0, 0.0, 0.0, 0.0);
    let mut hits = [0usize; 3];
    for (pv, gv) in p.iter().zip(&g) {
        let pv = (pv * scale).clamp(min_depth, max_depth);
        let e = pv - gv;
        abs_rel += e.abs() / gv;
        sq_rel += e * e / gv;
        sq += e * e;
        sq_log += (pv.ln() - gv.ln()).powi(2);
        let ratio = (pv / gv).max(gv / pv);
        for (k, h) in hits.iter_mut().enumerate() {
            if ratio < 1.25_f64.powi(k as i32 + 1) {
                *h += 1;
            }
        }
    }
    Ok(MetricReport {
        abs_rel: abs_rel / n,
        sq_rel: sq_rel / n,
        rmse: (sq / n).sqrt(),
        rmse_log: (sq_log / n).sqrt(),
        delta1: hits[0] as f64 / n,
        delta2: hits[1] as f64 / n,
        delta3: hits[2] as f64 / n,
        n: g.len(),
        scale,
    })
}
