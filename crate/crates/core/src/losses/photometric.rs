use crate::error::{Error, Result};
use crate::raster::{masked_sum, ColorImage, Grid, MaskedSum, ScalarMap};
use crate::warp::WarpResult;

use super::LossTerm;

pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;
/// SSIM weight in the photometric error.
pub const DEFAULT_ALPHA: f64 = 0.85;

fn ensure_dims(a: &ColorImage, b: &ColorImage) -> Result<()> {
    a.ensure_same_dims(b, "images")
}

/// Mirror index without repeating the edge (`-1 -> 1`, `n -> n-2`).
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let r = if i < 0 {
        -i
    } else if i >= n {
        2 * (n - 1) - i
    } else {
        i
    };
    r as usize
}

/// Per-pixel SSIM over 3×3 box windows with reflect padding, averaged over
/// channels and clamped to `[-1, 1]`.
///
/// A pixel is valid when every window pixel is valid in both images.
pub fn ssim(a: &ColorImage, b: &ColorImage) -> Result<ScalarMap> {
    ensure_dims(a, b)?;
    let (h, w) = a.dims();
    Ok(Grid::from_fn(h, w, |r, c| {
        let mut sa = [0.0; 3];
        let mut sb = [0.0; 3];
        let mut saa = [0.0; 3];
        let mut sbb = [0.0; 3];
        let mut sab = [0.0; 3];
        for dr in -1..=1isize {
            for dc in -1..=1isize {
                let rr = reflect(r as isize + dr, h);
                let cc = reflect(c as isize + dc, w);
                let pa = a.get(rr, cc)?;
                let pb = b.get(rr, cc)?;
                for k in 0..3 {
                    sa[k] += pa[k];
                    sb[k] += pb[k];
                    saa[k] += pa[k] * pa[k];
                    sbb[k] += pb[k] * pb[k];
                    sab[k] += pa[k] * pb[k];
                }
            }
        }
        let mut total = 0.0;
        for k in 0..3 {
            let mu_a = sa[k] / 9.0;
            let mu_b = sb[k] / 9.0;
            let var_a = saa[k] / 9.0 - mu_a * mu_a;
            let var_b = sbb[k] / 9.0 - mu_b * mu_b;
            let cov = sab[k] / 9.0 - mu_a * mu_b;
            let num = (2.0 * mu_a * mu_b + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (mu_a * mu_a + mu_b * mu_b + SSIM_C1) * (var_a + var_b + SSIM_C2);
            total += num / den;
        }
        Some((total / 3.0).clamp(-1.0, 1.0))
    }))
}

/// `(1 − α)·mean_c|a − b| + α·(1 − SSIM)/2` per pixel.
///
/// Valid where both pixels are valid and, for `α > 0`, the SSIM window is
/// fully valid.
pub fn photometric_error(a: &ColorImage, b: &ColorImage, alpha: f64) -> Result<ScalarMap> {
    ensure_dims(a, b)?;
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must be in [0, 1], got {alpha}")));
    }
    let s = if alpha > 0.0 { Some(ssim(a, b)?) } else { None };
    let (h, w) = a.dims();
    Ok(Grid::from_fn(h, w, |r, c| {
        let pa = a.get(r, c)?;
        let pb = b.get(r, c)?;
        let l1 = ((pa[0] - pb[0]).abs() + (pa[1] - pb[1]).abs() + (pa[2] - pb[2]).abs()) / 3.0;
        let structural = match &s {
            Some(s) => (1.0 - s.get(r, c)?) / 2.0,
            None => 0.0,
        };
        Some((1.0 - alpha) * l1 + alpha * structural)
    }))
}

/// Per-pixel minimum over the maps valid at that pixel. Pixels valid in no
/// map are invalid.
pub fn min_over(maps: &[ScalarMap]) -> Result<ScalarMap> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidArgument("need at least one candidate".into()))?;
    for m in &maps[1..] {
        first.ensure_same_dims(m, "candidate maps")?;
    }
    Ok(Grid::from_fn(first.height(), first.width(), |r, c| {
        maps.iter()
            .filter_map(|m| m.get(r, c))
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    }))
}

/// Minimum photometric error between `target` and each candidate, reduced to
/// a masked sum. Used by the rig-level aggregation.
pub(crate) fn min_pe_sum(
    target: &ColorImage,
    candidates: &[&ColorImage],
    alpha: f64,
) -> Result<MaskedSum> {
    let maps = candidates
        .iter()
        .map(|c| photometric_error(target, c, alpha))
        .collect::<Result<Vec<_>>>()?;
    Ok(masked_sum(&min_over(&maps)?))
}

/// Per-pixel minimum photometric error over the candidates valid at that
/// pixel, averaged over pixels valid in at least one candidate.
pub fn context_photometric(
    target: &ColorImage,
    candidates: &[WarpResult],
    alpha: f64,
) -> Result<LossTerm> {
    let refs: Vec<&ColorImage> = candidates.iter().map(|c| &c.synthesized).collect();
    let acc = min_pe_sum(target, &refs, alpha)?;
    LossTerm::from_sum(acc).ok_or(Error::AllInvalid("context photometric"))
}

/// Photometric agreement between the spatially synthesized view and the
/// spatial-temporal ones, minimum over `t′`, within their joint validity.
/// An empty overlap gives a zero term with count 0.
pub fn mvrc(
    spatial: &WarpResult,
    spatial_temporal: &[WarpResult],
    alpha: f64,
) -> Result<LossTerm> {
    let refs: Vec<&ColorImage> = spatial_temporal.iter().map(|c| &c.synthesized).collect();
    let acc = min_pe_sum(&spatial.synthesized, &refs, alpha)?;
    Ok(LossTerm::from_sum(acc).unwrap_or_default())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::identity_coords;

    fn constant(h: usize, w: usize, v: f64) -> ColorImage {
        ColorImage::filled(h, w, [v; 3])
    }

    fn textured(h: usize, w: usize, phase: f64) -> ColorImage {
        ColorImage::from_fn(h, w, |r, c| {
            let t = 0.5 + 0.4 * ((r as f64 * 0.9 + c as f64 * 0.5 + phase).sin());
            Some([t, 1.0 - t, 0.5 * t])
        })
    }

    fn as_warp(img: ColorImage) -> WarpResult {
        let (h, w) = img.dims();
        WarpResult {
            synthesized: img,
            coords: identity_coords(h, w),
        }
    }

    /// Constant-image SSIM reduces to the luminance term times C2/C2.
    fn constant_ssim_oracle(a: f64, b: f64) -> f64 {
        (2.0 * a * b + 1e-4) / (a * a + b * b + 1e-4)
    }

    #[test]
    fn ssim_identity_and_constant() {
        let img = textured(7, 9, 0.3);
        let s = ssim(&img, &img).unwrap();
        assert_eq!(s.valid_count(), 63);
        for (_, v) in s.iter_valid() {
            assert!((v - 1.0).abs() < 1e-12);
        }

        let s = ssim(&constant(4, 5, 0.5), &constant(4, 5, 0.7)).unwrap();
        let expected = constant_ssim_oracle(0.5, 0.7);
        assert!((expected - 0.7001 / 0.7401).abs() < 1e-15);
        for (_, v) in s.iter_valid() {
            assert!((v - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn ssim_window_validity() {
        let mut a = textured(5, 5, 0.0);
        a.set(2, 2, None);
        let s = ssim(&a, &textured(5, 5, 1.0)).unwrap();
        // Every pixel whose window touches (2, 2) is invalid.
        for r in 0..5usize {
            for c in 0..5usize {
                let touches = r.abs_diff(2) <= 1 && c.abs_diff(2) <= 1;
                assert_eq!(s.is_valid(r, c), !touches, "({r}, {c})");
            }
        }
        assert!(ssim(&a, &textured(5, 4, 0.0)).is_err());
    }

    #[test]
    fn reflect_padding() {
        assert_eq!(reflect(-1, 5), 1);
        assert_eq!(reflect(5, 5), 3);
        assert_eq!(reflect(2, 5), 2);
        assert_eq!(reflect(-1, 1), 0);
    }

    #[test]
    fn photometric_values() {
        let a = constant(3, 3, 0.5);
        let b = constant(3, 3, 0.7);
        let pe0 = photometric_error(&a, &b, 0.0).unwrap();
        for (_, v) in pe0.iter_valid() {
            assert!((v - 0.2).abs() < 1e-12);
        }
        let pe = photometric_error(&a, &b, 0.85).unwrap();
        let expected = 0.15 * 0.2 + 0.85 * (1.0 - constant_ssim_oracle(0.5, 0.7)) / 2.0;
        for (_, v) in pe.iter_valid() {
            assert!((v - expected).abs() < 1e-12);
        }
        let same = photometric_error(&a, &a, 0.85).unwrap();
        assert!(same.data().iter().all(|v| *v == 0.0));
        assert!(photometric_error(&a, &b, 1.5).is_err());
    }

    #[test]
    fn context_min_semantics() {
        let target = textured(6, 6, 0.0);
        let exact = as_warp(target.clone());
        let garbage = as_warp(textured(6, 6, 2.0));
        let t = context_photometric(&target, &[garbage.clone(), exact.clone()], 0.85).unwrap();
        assert_eq!(t.value, 0.0);
        assert_eq!(t.count, 36);

        let lone = context_photometric(&target, std::slice::from_ref(&garbage), 0.85).unwrap();
        assert!(lone.value > 0.0);
        let none = as_warp(ColorImage::invalid(6, 6));
        assert!(matches!(
            context_photometric(&target, &[none], 0.85),
            Err(Error::AllInvalid(_))
        ));
    }

    #[test]
    fn context_hand_case() {
        // α = 0 so pe is the channel-mean L1. Target is all zeros.
        let target = constant(2, 2, 0.0);
        let a = ColorImage::with_mask(
            2,
            2,
            vec![[0.1; 3], [0.4; 3], [0.0; 3], [0.2; 3]],
            vec![true, true, false, true],
        )
        .unwrap();
        let b = ColorImage::with_mask(
            2,
            2,
            vec![[0.3; 3], [0.2; 3], [0.0; 3], [0.5; 3]],
            vec![true, true, false, false],
        )
        .unwrap();
        // Pixel minima: 0.1, 0.2, (none), 0.2 -> mean 0.5 / 3.
        let t = context_photometric(&target, &[as_warp(a), as_warp(b)], 0.0).unwrap();
        assert_eq!(t.count, 3);
        assert!((t.value - 0.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn mvrc_cases() {
        let img = textured(5, 6, 0.4);
        let t = mvrc(&as_warp(img.clone()), &[as_warp(img.clone())], 0.85).unwrap();
        assert_eq!((t.value, t.count), (0.0, 30));

        let left = ColorImage::from_fn(5, 6, |r, c| (c < 3).then(|| img.get(r, c).unwrap()));
        let right = ColorImage::from_fn(5, 6, |r, c| (c >= 3).then(|| img.get(r, c).unwrap()));
        let t = mvrc(&as_warp(left), &[as_warp(right)], 0.85).unwrap();
        assert_eq!((t.value, t.count), (0.0, 0));
    }
}
