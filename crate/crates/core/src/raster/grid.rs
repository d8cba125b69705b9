use nalgebra::Vector3;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Per-pixel value that can be stored in a [`Grid`] and bilinearly blended.
pub trait Texel: Copy + Send + Sync + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    /// `self * wa + other * wb`.
    fn mix(self, wa: f64, other: Self, wb: f64) -> Self;
    fn is_finite(&self) -> bool;
}

impl Texel for f64 {
    fn zero() -> Self {
        0.0
    }
    #[inline]
    fn mix(self, wa: f64, other: Self, wb: f64) -> Self {
        self * wa + other * wb
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl<const N: usize> Texel for [f64; N] {
    fn zero() -> Self {
        [0.0; N]
    }
    #[inline]
    fn mix(self, wa: f64, other: Self, wb: f64) -> Self {
        std::array::from_fn(|k| self[k] * wa + other[k] * wb)
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

impl Texel for Vector3<f64> {
    fn zero() -> Self {
        Vector3::zeros()
    }
    #[inline]
    fn mix(self, wa: f64, other: Self, wb: f64) -> Self {
        self * wa + other * wb
    }
    fn is_finite(&self) -> bool {
        self.iter().all(|v| v.is_finite())
    }
}

/// Row-major image-shaped container with a per-pixel validity mask.
///
/// Invalid pixels always hold `T::zero()`, so two grids compare equal iff
/// their valid contents and masks agree.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
    mask: Vec<bool>,
}

/// Depth, disparity, SSIM and other single-channel maps.
pub type ScalarMap = Grid<f64>;
/// RGB image, channel values in `[0, 1]`.
pub type ColorImage = Grid<[f64; 3]>;
/// 3-vector field such as a surface-normal map.
pub type VectorMap = Grid<Vector3<f64>>;
/// Continuous `(u, v)` sampling positions, one per target pixel.
pub type CoordGrid = Grid<[f64; 2]>;

impl<T: Texel> Grid<T> {
    /// All pixels valid.
    pub fn new(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        let mask = vec![true; data.len()];
        Self::with_mask(height, width, data, mask)
    }

    pub fn with_mask(height: usize, width: usize, mut data: Vec<T>, mask: Vec<bool>) -> Result<Self> {
        let n = height * width;
        if data.len() != n || mask.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{height}x{width} grid needs {n} values, got {} values and {} mask bits",
                data.len(),
                mask.len()
            )));
        }
        for (v, m) in data.iter_mut().zip(&mask) {
            if !m {
                *v = T::zero();
            }
        }
        Ok(Self {
            height,
            width,
            data,
            mask,
        })
    }

    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self {
            height,
            width,
            data: vec![value; height * width],
            mask: vec![true; height * width],
        }
    }

    pub fn invalid(height: usize, width: usize) -> Self {
        Self {
            height,
            width,
            data: vec![T::zero(); height * width],
            mask: vec![false; height * width],
        }
    }

    /// Builds a grid from `f(row, col)`; `None` marks the pixel invalid.
    /// Rows are evaluated in parallel and assembled in order.
    pub fn from_fn<F>(height: usize, width: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> Option<T> + Sync,
    {
        let rows: Vec<Vec<Option<T>>> = (0..height)
            .into_par_iter()
            .map(|r| (0..width).map(|c| f(r, c)).collect())
            .collect();
        let mut data = Vec::with_capacity(height * width);
        let mut mask = Vec::with_capacity(height * width);
        for v in rows.into_iter().flatten() {
            mask.push(v.is_some());
            data.push(v.unwrap_or_else(T::zero));
        }
        Self {
            height,
            width,
            data,
            mask,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.width + col
    }

    /// Value at `(row, col)` if valid.
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Option<T> {
        let i = self.index(row, col);
        self.mask[i].then(|| self.data[i])
    }

    #[inline]
    pub fn is_valid(&self, row: usize, col: usize) -> bool {
        self.mask[self.index(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Option<T>) {
        let i = self.index(row, col);
        self.mask[i] = value.is_some();
        self.data[i] = value.unwrap_or_else(T::zero);
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn same_dims<U>(&self, other: &Grid<U>) -> bool {
        self.height == other.height && self.width == other.width
    }

    pub fn ensure_same_dims<U>(&self, other: &Grid<U>, what: &str) -> Result<()> {
        if self.same_dims(other) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )))
        }
    }

    /// Pixel-wise map over valid pixels; `None` invalidates.
    pub fn map<U: Texel, F>(&self, f: F) -> Grid<U>
    where
        F: Fn(T) -> Option<U> + Sync,
    {
        Grid::from_fn(self.height, self.width, |r, c| self.get(r, c).and_then(&f))
    }

    /// Copy with the mask intersected with `mask`.
    pub fn masked(&self, mask: &[bool]) -> Result<Self> {
        if mask.len() != self.mask.len() {
            return Err(Error::DimensionMismatch(format!(
                "mask has {} entries, grid has {}",
                mask.len(),
                self.mask.len()
            )));
        }
        let combined = self.mask.iter().zip(mask).map(|(a, b)| *a && *b).collect();
        Self::with_mask(self.height, self.width, self.data.clone(), combined)
    }

    pub fn iter_valid(&self) -> impl Iterator<Item = (usize, T)> + '_ {
        self.data
            .iter()
            .zip(&self.mask)
            .enumerate()
            .filter_map(|(i, (v, m))| m.then_some((i, *v)))
    }
}

impl Grid<f64> {
    /// Every valid value multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| Some(v * c))
    }

    /// Mask as a 0/1 scalar map (all pixels valid).
    pub fn from_mask(height: usize, width: usize, mask: &[bool]) -> Result<Self> {
        Self::new(
            height,
            width,
            mask.iter().map(|m| if *m { 1.0 } else { 0.0 }).collect(),
        )
    }

    /// Reads a 0/1 map back into a mask: pixels that are valid and non-zero.
    pub fn to_mask(&self) -> Vec<bool> {
        self.data
            .iter()
            .zip(&self.mask)
            .map(|(v, m)| *m && *v != 0.0)
            .collect()
    }
}

impl Grid<[f64; 3]> {
    /// Color image whose channels must lie in `[0, 1]`.
    pub fn from_rgb(height: usize, width: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        let img = Self::new(height, width, data)?;
        img.check_unit_range()?;
        Ok(img)
    }

    pub fn check_unit_range(&self) -> Result<()> {
        match self
            .iter_valid()
            .find(|(_, px)| px.iter().any(|v| !(0.0..=1.0).contains(v)))
        {
            Some((i, px)) => Err(Error::InvalidArgument(format!(
                "color value {px:?} at pixel {i} outside [0, 1]"
            ))),
            None => Ok(()),
        }
    }
}

impl Grid<Vector3<f64>> {
    /// Largest `| ‖v‖ − 1 |` over valid pixels.
    pub fn max_unit_norm_error(&self) -> f64 {
        self.iter_valid()
            .map(|(_, v)| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn negated(&self) -> Self {
        self.map(|v| Some(-v))
    }
}

/// Sum and count of valid values, accumulated in row-major order.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MaskedSum {
    pub sum: f64,
    pub count: usize,
}

impl MaskedSum {
    pub fn push(&mut self, v: f64) {
        self.sum += v;
        self.count += 1;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }
}

pub fn masked_sum(map: &ScalarMap) -> MaskedSum {
    let mut acc = MaskedSum::default();
    for (_, v) in map.iter_valid() {
        acc.push(v);
    }
    acc
}

/// Mean over valid pixels and the number of pixels it covers.
pub fn masked_mean(map: &ScalarMap) -> Option<(f64, usize)> {
    let acc = masked_sum(map);
    acc.mean().map(|m| (m, acc.count))
}
