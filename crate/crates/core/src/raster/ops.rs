use super::grid::{masked_sum, ColorImage, Grid, ScalarMap, Texel};
use crate::error::{Error, Result};

/// Forward differences along u (columns) and v (rows).
///
/// The last column of `∂u` and the last row of `∂v` hold 0 and are marked
/// invalid so they never enter reductions. Interior entries are valid when
/// both pixels of the difference are valid.
pub fn gradient(m: &ScalarMap) -> Result<(ScalarMap, ScalarMap)> {
    let (h, w) = m.dims();
    if h < 2 || w < 2 {
        return Err(Error::DegenerateSize { height: h, width: w });
    }
    Ok(forward_differences(m, |a, b| Some(b - a)))
}

pub(crate) fn forward_differences<T: Texel, F>(m: &Grid<T>, diff: F) -> (ScalarMap, ScalarMap)
where
    F: Fn(T, T) -> Option<f64> + Sync,
{
    let (h, w) = m.dims();
    let du = Grid::from_fn(h, w, |r, c| {
        if c + 1 >= w {
            return None;
        }
        diff(m.get(r, c)?, m.get(r, c + 1)?)
    });
    let dv = Grid::from_fn(h, w, |r, c| {
        if r + 1 >= h {
            return None;
        }
        diff(m.get(r, c)?, m.get(r + 1, c)?)
    });
    (du, dv)
}

/// Channel-averaged absolute forward differences of an image.
pub fn image_gradient_magnitude(img: &ColorImage) -> Result<(ScalarMap, ScalarMap)> {
    let (h, w) = img.dims();
    if h < 2 || w < 2 {
        return Err(Error::DegenerateSize { height: h, width: w });
    }
    Ok(forward_differences(img, |a, b| {
        Some(((b[0] - a[0]).abs() + (b[1] - a[1]).abs() + (b[2] - a[2]).abs()) / 3.0)
    }))
}

/// `D⁻¹ / mean(D⁻¹)` over valid pixels; invariant to global depth scale.
pub fn mean_normalized_inverse(depth: &ScalarMap) -> Result<ScalarMap> {
    if let Some((_, d)) = depth.iter_valid().find(|(_, d)| !(*d > 0.0)) {
        return Err(Error::NonPositiveDepth { depth: d, epsilon: 0.0 });
    }
    let inv = depth.map(|d| Some(1.0 / d));
    let mean = masked_sum(&inv)
        .mean()
        .ok_or(Error::AllInvalid("mean-normalized inverse depth"))?;
    Ok(inv.map(|v| Some(v / mean)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_hand_case() {
        let m = ScalarMap::new(2, 2, vec![0.0, 2.0, 1.0, 5.0]).unwrap();
        let (du, dv) = gradient(&m).unwrap();
        assert_eq!(du.data(), &[2.0, 0.0, 4.0, 0.0]);
        assert_eq!(dv.data(), &[1.0, 3.0, 0.0, 0.0]);
        assert_eq!(du.mask(), &[true, false, true, false]);
        assert_eq!(dv.mask(), &[true, true, false, false]);
    }

    #[test]
    fn gradient_constant_and_ramp() {
        let c = ScalarMap::filled(3, 4, 7.0);
        let (du, dv) = gradient(&c).unwrap();
        assert!(du.data().iter().chain(dv.data()).all(|v| *v == 0.0));

        let ramp = ScalarMap::from_fn(3, 4, |_, c| Some(c as f64));
        let (du, _) = gradient(&ramp).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                assert_eq!(du.get(r, c), Some(1.0));
            }
            assert_eq!(du.data()[du.index(r, 3)], 0.0);
        }
    }

    #[test]
    fn gradient_degenerate() {
        assert!(matches!(
            gradient(&ScalarMap::filled(1, 5, 1.0)),
            Err(Error::DegenerateSize { .. })
        ));
    }

    #[test]
    fn mean_normalized_inverse_cases() {
        let c = mean_normalized_inverse(&ScalarMap::filled(2, 2, 5.0)).unwrap();
        assert!(c.data().iter().all(|v| (*v - 1.0).abs() < 1e-15));

        // inverse [1, 0.5], mean 0.75
        let d = ScalarMap::new(1, 2, vec![1.0, 2.0]).unwrap();
        let out = mean_normalized_inverse(&d).unwrap();
        assert!((out.data()[0] - 4.0 / 3.0).abs() < 1e-15);
        assert!((out.data()[1] - 2.0 / 3.0).abs() < 1e-15);

        let scaled = mean_normalized_inverse(&d.scaled(3.0)).unwrap();
        for (a, b) in out.data().iter().zip(scaled.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_normalized_inverse_errors() {
        let bad = ScalarMap::new(1, 2, vec![1.0, 0.0]).unwrap();
        assert!(matches!(mean_normalized_inverse(&bad), Err(Error::NonPositiveDepth { .. })));
        assert!(matches!(
            mean_normalized_inverse(&ScalarMap::invalid(2, 2)),
            Err(Error::AllInvalid(_))
        ));
        // Invalid pixels are ignored, even if they would hold garbage.
        let partial = ScalarMap::with_mask(1, 2, vec![2.0, -1.0], vec![true, false]).unwrap();
        assert_eq!(mean_normalized_inverse(&partial).unwrap().get(0, 0), Some(1.0));
    }
}
