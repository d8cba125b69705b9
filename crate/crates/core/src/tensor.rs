//! Channel-major feature arrays and affine maps shared by the motion and
//! attention modules.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::io::read_scalar_pfm;

/// A `C×h×w` array stored channel-major (`data[(c·h + y)·w + x]`).
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureArray {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl FeatureArray {
    pub fn new(channels: usize, height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if channels == 0 || height == 0 || width == 0 {
            return Err(Error::ShapeMismatch(format!(
                "feature array dims must be positive, got {channels}x{height}x{width}"
            )));
        }
        if data.len() != channels * height * width {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {channels}x{height}x{width} array",
                data.len()
            )));
        }
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite feature value {v}")));
        }
        Ok(Self {
            channels,
            height,
            width,
            data,
        })
    }

    pub fn zeros(channels: usize, height: usize, width: usize) -> Self {
        Self::from_fn(channels, height, width, |_, _, _| 0.0)
    }

    pub fn from_fn(channels: usize, height: usize, width: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(channels * height * width);
        for c in 0..channels {
            for y in 0..height {
                for x in 0..width {
                    data.push(f(c, y, x));
                }
            }
        }
        Self {
            channels,
            height,
            width,
            data,
        }
    }

    /// Constant spatial maps with per-channel values `v`.
    pub fn constant(values: &[f64], height: usize, width: usize) -> Self {
        Self::from_fn(values.len(), height, width, |c, _, _| values[c])
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.channels, self.height, self.width)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, c: usize, y: usize, x: usize) -> f64 {
        self.data[(c * self.height + y) * self.width + x]
    }

    /// One channel's `h·w` values, row-major.
    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    /// Spatial mean of each channel.
    pub fn pooled(&self) -> DVector<f64> {
        let n = (self.height * self.width) as f64;
        DVector::from_iterator(
            self.channels,
            (0..self.channels).map(|c| self.channel(c).iter().sum::<f64>() / n),
        )
    }

    /// `Σ w_k · a_k` over arrays of equal shape.
    pub fn weighted_sum(arrays: &[FeatureArray], weights: &[f64]) -> Result<FeatureArray> {
        let first = arrays
            .first()
            .ok_or_else(|| Error::ShapeMismatch("weighted sum of zero arrays".into()))?;
        if weights.len() != arrays.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} weights for {} arrays",
                weights.len(),
                arrays.len()
            )));
        }
        ensure_same_shapes(arrays)?;
        let mut data = vec![0.0; first.data.len()];
        for (a, w) in arrays.iter().zip(weights) {
            for (acc, v) in data.iter_mut().zip(&a.data) {
                *acc += w * v;
            }
        }
        Ok(FeatureArray { data, ..*first })
    }

    /// 1×1 convolution: `out[:, y, x] = map(self[:, y, x])`.
    pub fn pointwise(&self, map: &AffineMap) -> Result<FeatureArray> {
        if map.input_dim() != self.channels {
            return Err(Error::ShapeMismatch(format!(
                "projection expects {} channels, got {}",
                map.input_dim(),
                self.channels
            )));
        }
        let n = self.height * self.width;
        let out_c = map.output_dim();
        let mut data = vec![0.0; out_c * n];
        for o in 0..out_c {
            let row = &mut data[o * n..(o + 1) * n];
            row.iter_mut().for_each(|v| *v = map.bias[o]);
            for c in 0..self.channels {
                let w = map.weight[(o, c)];
                for (acc, v) in row.iter_mut().zip(self.channel(c)) {
                    *acc += w * v;
                }
            }
        }
        Ok(FeatureArray {
            channels: out_c,
            height: self.height,
            width: self.width,
            data,
        })
    }

    /// Bilinear resize with half-pixel centers, edge-clamped.
    pub fn resized(&self, height: usize, width: usize) -> Result<FeatureArray> {
        if height == 0 || width == 0 {
            return Err(Error::ShapeMismatch(format!("cannot resize to {height}x{width}")));
        }
        let taps = |out: usize, inp: usize| -> Vec<(usize, usize, f64)> {
            (0..out)
                .map(|k| {
                    let s = ((k as f64 + 0.5) * inp as f64 / out as f64 - 0.5).clamp(0.0, (inp - 1) as f64);
                    let lo = s.floor() as usize;
                    let hi = (lo + 1).min(inp - 1);
                    (lo, hi, s - lo as f64)
                })
                .collect()
        };
        let ty = taps(height, self.height);
        let tx = taps(width, self.width);
        Ok(Self::from_fn(self.channels, height, width, |c, y, x| {
            let (y0, y1, fy) = ty[y];
            let (x0, x1, fx) = tx[x];
            let top = self.get(c, y0, x0) * (1.0 - fx) + self.get(c, y0, x1) * fx;
            let bottom = self.get(c, y1, x0) * (1.0 - fx) + self.get(c, y1, x1) * fx;
            top * (1.0 - fy) + bottom * fy
        }))
    }

    pub fn max_abs_diff(&self, other: &FeatureArray) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn ensure_same_shapes(arrays: &[FeatureArray]) -> Result<()> {
    if let Some(first) = arrays.first() {
        for (k, a) in arrays.iter().enumerate() {
            if a.shape() != first.shape() {
                return Err(Error::ShapeMismatch(format!(
                    "feature {k} has shape {:?}, expected {:?}",
                    a.shape(),
                    first.shape()
                )));
            }
        }
    }
    Ok(())
}

/// `y = W x + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffineMapFile {
    /// PFM whose rows are output dims and columns input dims.
    weight: String,
    /// Defaults to zeros.
    #[serde(default)]
    bias: Option<Vec<f64>>,
}

impl AffineMap {
    pub fn new(weight: DMatrix<f64>, bias: DVector<f64>) -> Result<Self> {
        if bias.len() != weight.nrows() {
            return Err(Error::ShapeMismatch(format!(
                "bias of length {} for a {}x{} weight",
                bias.len(),
                weight.nrows(),
                weight.ncols()
            )));
        }
        if weight.iter().chain(bias.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite affine map entry".into()));
        }
        Ok(Self { weight, bias })
    }

    pub fn linear(weight: DMatrix<f64>) -> Self {
        let bias = DVector::zeros(weight.nrows());
        Self { weight, bias }
    }

    pub fn zero(output: usize, input: usize) -> Self {
        Self::linear(DMatrix::zeros(output, input))
    }

    pub fn input_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::ShapeMismatch(format!(
                "affine map expects {} inputs, got {}",
                self.input_dim(),
                x.len()
            )));
        }
        Ok(&self.weight * x + &self.bias)
    }

    /// Reads `{"weight": "<pfm>", "bias": [...]}`; the PFM path is relative
    /// to the JSON file.
    pub fn load(path: &Path) -> Result<Self> {
        let cfg: AffineMapFile = crate::synth::read_json(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let grid = read_scalar_pfm(&base.join(&cfg.weight))?;
        if grid.valid_count() != grid.len() {
            return Err(Error::parse(path, "weight", "weight matrix has non-finite entries"));
        }
        let weight = DMatrix::from_row_slice(grid.height(), grid.width(), grid.data());
        let bias = match cfg.bias {
            Some(b) => DVector::from_vec(b),
            None => DVector::zeros(weight.nrows()),
        };
        AffineMap::new(weight, bias).map_err(|e| Error::parse(path, "bias", e.to_string()))
    }
}
