use super::grid::{CoordGrid, Grid, Texel};

/// Fractional offsets closer than this to a pixel center are treated as
/// exact hits, so reprojection round-off does not blur integer samples.
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[inline]
fn split(x: f64) -> (f64, f64) {
    let base = x.floor();
    let mut frac = x - base;
    let mut base = base;
    if frac < SNAP_TOLERANCE {
        frac = 0.0;
    } else if frac > 1.0 - SNAP_TOLERANCE {
        frac = 0.0;
        base += 1.0;
    }
    (base, frac)
}

/// Bilinear sample of `src` at continuous `(u, v)`.
///
/// Returns `None` if any neighbor with non-zero weight lies outside the
/// grid or is invalid.
#[inline]
pub fn sample_at<T: Texel>(src: &Grid<T>, u: f64, v: f64) -> Option<T> {
    if !(u.is_finite() && v.is_finite()) {
        return None;
    }
    let (u0, fu) = split(u);
    let (v0, fv) = split(v);
    let (w, h) = (src.width() as f64, src.height() as f64);
    let u1 = if fu > 0.0 { u0 + 1.0 } else { u0 };
    let v1 = if fv > 0.0 { v0 + 1.0 } else { v0 };
    if u0 < 0.0 || v0 < 0.0 || u1 > w - 1.0 || v1 > h - 1.0 {
        return None;
    }
    let (c0, r0) = (u0 as usize, v0 as usize);
    let row = |r: usize| -> Option<T> {
        let a = src.get(r, c0)?;
        if fu > 0.0 {
            let b = src.get(r, c0 + 1)?;
            Some(a.mix(1.0 - fu, b, fu))
        } else {
            Some(a)
        }
    };
    let top = row(r0)?;
    if fv > 0.0 {
        let bottom = row(r0 + 1)?;
        Some(top.mix(1.0 - fv, bottom, fv))
    } else {
        Some(top)
    }
}

/// Samples `src` at every position of `coords`. The output has the shape of
/// `coords`; a pixel is valid when its coordinate is valid and its sample
/// footprint is inside `src` and fully valid.
pub fn bilinear_sample<T: Texel>(src: &Grid<T>, coords: &CoordGrid) -> Grid<T> {
    Grid::from_fn(coords.height(), coords.width(), |r, c| {
        let [u, v] = coords.get(r, c)?;
        sample_at(src, u, v)
    })
}

/// Bilinear sample with coordinates clamped to the grid (border replicate).
/// Used for resizing, where every output pixel must be defined.
pub fn sample_clamped<T: Texel>(src: &Grid<T>, u: f64, v: f64) -> Option<T> {
    let u = u.clamp(0.0, (src.width() - 1) as f64);
    let v = v.clamp(0.0, (src.height() - 1) as f64);
    sample_at(src, u, v)
}

/// Identity coordinate grid for an `height × width` target.
pub fn identity_coords(height: usize, width: usize) -> CoordGrid {
    Grid::from_fn(height, width, |r, c| Some([c as f64, r as f64]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ScalarMap;

    fn ramp() -> ScalarMap {
        ScalarMap::new(2, 3, vec![2.0, 4.0, 8.0, 1.0, 3.0, 5.0]).unwrap()
    }

    #[test]
    fn integer_coords_exact() {
        let m = ramp();
        for r in 0..2 {
            for c in 0..3 {
                assert_eq!(sample_at(&m, c as f64, r as f64), m.get(r, c));
            }
        }
    }

    #[test]
    fn midpoint_and_out_of_bounds() {
        let m = ramp();
        assert_eq!(sample_at(&m, 0.5, 0.0), Some(3.0));
        assert_eq!(sample_at(&m, -0.5, 0.0), None);
        assert_eq!(sample_at(&m, 2.5, 0.0), None);
        assert_eq!(sample_at(&m, 0.0, 1.2), None);
        assert_eq!(sample_at(&m, f64::NAN, 0.0), None);
        // (0.5, 0.5): mean of 2, 4, 1, 3
        assert_eq!(sample_at(&m, 0.5, 0.5), Some(2.5));
    }

    #[test]
    fn snapping_absorbs_roundoff() {
        let m = ramp();
        assert_eq!(sample_at(&m, 2.0 - 1e-13, 1.0 + 1e-13), Some(5.0));
        assert_eq!(sample_at(&m, 1.0 - 1e-13, 0.0), Some(4.0));
    }

    #[test]
    fn invalid_neighbor_invalidates() {
        let m = ScalarMap::with_mask(1, 3, vec![1.0, 2.0, 3.0], vec![true, false, true]).unwrap();
        assert_eq!(sample_at(&m, 0.5, 0.0), None);
        assert_eq!(sample_at(&m, 0.0, 0.0), Some(1.0));
        assert_eq!(sample_at(&m, 2.0, 0.0), Some(3.0));
    }

    #[test]
    fn identity_grid_reproduces() {
        let m = ramp();
        let out = bilinear_sample(&m, &identity_coords(2, 3));
        assert_eq!(out, m);
    }

    #[test]
    fn clamped_sampling_replicates_border() {
        let m = ramp();
        assert_eq!(sample_clamped(&m, -3.0, 0.0), Some(2.0));
        assert_eq!(sample_clamped(&m, 9.0, 9.0), Some(5.0));
    }
}
