use crate::error::{Error, Result};
use crate::raster::{
    gradient, image_gradient_magnitude, mean_normalized_inverse, ColorImage, MaskedSum, ScalarMap,
    VectorMap,
};
use crate::spatial_depth::ReconstructedDepth;

use super::LossTerm;

pub(crate) fn sdc_sum(d_hat: &ScalarMap, d_tilde: &ScalarMap) -> Result<MaskedSum> {
    d_hat.ensure_same_dims(d_tilde, "depth maps")?;
    let mut acc = MaskedSum::default();
    for (i, (a, b)) in d_hat.data().iter().zip(d_tilde.data()).enumerate() {
        if d_hat.mask()[i] && d_tilde.mask()[i] {
            acc.push((a - b).abs());
        }
    }
    Ok(acc)
}

/// Mean absolute depth difference (meters) inside the reconstruction's
/// overlap. An empty overlap gives a zero term with count 0.
pub fn sdc(d_hat: &ScalarMap, d_tilde: &ReconstructedDepth) -> Result<LossTerm> {
    Ok(LossTerm::from_sum(sdc_sum(d_hat, &d_tilde.depth)?).unwrap_or_default())
}

pub(crate) fn snc_sum(n_hat: &VectorMap, n_prior: &VectorMap) -> Result<MaskedSum> {
    n_hat.ensure_same_dims(n_prior, "normal maps")?;
    let mut acc = MaskedSum::default();
    for (i, (a, b)) in n_hat.data().iter().zip(n_prior.data()).enumerate() {
        if n_hat.mask()[i] && n_prior.mask()[i] {
            acc.push((1.0 - a.dot(b).abs()).clamp(0.0, 1.0));
        }
    }
    Ok(acc)
}

/// `mean(1 − |n̂ · n|)` over pixels valid in both fields. Unchanged when
/// either field is negated.
pub fn snc(n_hat: &VectorMap, n_prior: &VectorMap) -> Result<LossTerm> {
    LossTerm::from_sum(snc_sum(n_hat, n_prior)?).ok_or(Error::AllInvalid("surface normal consistency"))
}

/// `Σ |g|·exp(−e)` over pixels valid in both the gradient and the edge map.
fn edge_weighted_sum(grad: &ScalarMap, edges: &ScalarMap) -> MaskedSum {
    let mut acc = MaskedSum::default();
    for (i, g) in grad.iter_valid() {
        if edges.mask()[i] {
            acc.push(g.abs() * (-edges.data()[i]).exp());
        }
    }
    acc
}

/// Per-axis sums for smoothness: `(u, v)`.
pub(crate) fn smoothness_sums(depth: &ScalarMap, image: &ColorImage) -> Result<(MaskedSum, MaskedSum)> {
    depth.ensure_same_dims(image, "depth and image")?;
    let d = mean_normalized_inverse(depth)?;
    let (du, dv) = gradient(&d)?;
    let (gu, gv) = image_gradient_magnitude(image)?;
    Ok((edge_weighted_sum(&du, &gu), edge_weighted_sum(&dv, &gv)))
}

fn two_axis(u: MaskedSum, v: MaskedSum, what: &'static str) -> Result<LossTerm> {
    match (u.mean(), v.mean()) {
        (None, None) => Err(Error::AllInvalid(what)),
        (mu, mv) => Ok(LossTerm {
            value: mu.unwrap_or(0.0) + mv.unwrap_or(0.0),
            count: u.count + v.count,
        }),
    }
}

/// Edge-aware smoothness of the mean-normalized inverse depth:
/// `mean(|∂u d̂|·exp(−|∂u I|)) + mean(|∂v d̂|·exp(−|∂v I|))`, with `|∂I|`
/// averaged over channels.
pub fn smoothness(depth: &ScalarMap, image: &ColorImage) -> Result<LossTerm> {
    let (u, v) = smoothness_sums(depth, image)?;
    two_axis(u, v, "smoothness")
}

pub(crate) fn dsc_sums(depth: &ScalarMap, prior_depth: &ScalarMap) -> Result<(MaskedSum, MaskedSum)> {
    depth.ensure_same_dims(prior_depth, "depth and prior")?;
    let (au, av) = gradient(&mean_normalized_inverse(depth)?)?;
    let (bu, bv) = gradient(&mean_normalized_inverse(prior_depth)?)?;
    let diff = |a: &ScalarMap, b: &ScalarMap| {
        let mut acc = MaskedSum::default();
        for i in 0..a.len() {
            if a.mask()[i] && b.mask()[i] {
                acc.push((a.data()[i] - b.data()[i]).abs());
            }
        }
        acc
    };
    Ok((diff(&au, &bu), diff(&av, &bv)))
}

/// L1 distance between the gradient fields of the mean-normalized inverse
/// depth and of the prior's, summed over the two axes. Both inputs are
/// depths; global scale cancels in the normalization.
pub fn dsc(depth: &ScalarMap, prior_depth: &ScalarMap) -> Result<LossTerm> {
    let (u, v) = dsc_sums(depth, prior_depth)?;
    two_axis(u, v, "disparity smoothness consistency")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial_depth::Strategy;
    use nalgebra::Vector3;

    fn recon(depth: ScalarMap) -> ReconstructedDepth {
        ReconstructedDepth {
            depth,
            strategy: Strategy::Mbw,
        }
    }

    #[test]
    fn sdc_cases() {
        let d = ScalarMap::from_fn(4, 4, |r, c| Some(2.0 + r as f64 + 0.1 * c as f64));
        assert_eq!(sdc(&d, &recon(d.clone())).unwrap().value, 0.0);

        let shifted = ScalarMap::from_fn(4, 4, |r, c| (c < 2).then(|| d.get(r, c).unwrap() + 0.5));
        let t = sdc(&d, &recon(shifted)).unwrap();
        assert!((t.value - 0.5).abs() < 1e-12);
        assert_eq!(t.count, 8);

        let t = sdc(&d, &recon(ScalarMap::invalid(4, 4))).unwrap();
        assert_eq!((t.value, t.count), (0.0, 0));
    }

    #[test]
    fn snc_cases() {
        let n = VectorMap::from_fn(3, 3, |r, c| {
            Some(Vector3::new(r as f64 - 1.0, c as f64 - 1.0, 2.0).normalize())
        });
        // Zero up to the rounding of the unit normalization.
        let same = snc(&n, &n).unwrap().value;
        assert!(same.abs() < 1e-15);
        assert_eq!(snc(&n.negated(), &n).unwrap().value, same);
        assert_eq!(snc(&n, &n.negated()).unwrap().value, same);

        let a = VectorMap::filled(2, 2, Vector3::x());
        let b = VectorMap::filled(2, 2, Vector3::y());
        assert_eq!(snc(&a, &b).unwrap().value, 1.0);
        assert!(matches!(
            snc(&a, &VectorMap::invalid(2, 2)),
            Err(Error::AllInvalid(_))
        ));
    }

    #[test]
    fn smoothness_hand_case() {
        // D = [[1, 2], [1, 1]]: inverse [1, .5, 1, 1], mean .875.
        let d = ScalarMap::new(2, 2, vec![1.0, 2.0, 1.0, 1.0]).unwrap();
        let img = ColorImage::new(2, 2, vec![[0.0; 3], [0.3; 3], [0.6; 3], [0.6; 3]]).unwrap();
        let t = smoothness(&d, &img).unwrap();
        let m = 0.875;
        let du = [(0.5 - 1.0_f64) / m, 0.0];
        let gu = [0.3_f64, 0.0];
        let dv = [0.0 / m, (1.0 - 0.5_f64) / m];
        let gv = [0.6_f64, 0.3];
        let u = (du[0].abs() * (-gu[0]).exp() + du[1].abs() * (-gu[1]).exp()) / 2.0;
        let v = (dv[0].abs() * (-gv[0]).exp() + dv[1].abs() * (-gv[1]).exp()) / 2.0;
        assert!((t.value - (u + v)).abs() < 1e-12);
        assert_eq!(t.count, 4);
    }

    #[test]
    fn smoothness_constant_and_scale() {
        let img = ColorImage::from_fn(5, 6, |r, c| Some([(r * c) as f64 / 30.0; 3]));
        assert_eq!(smoothness(&ScalarMap::filled(5, 6, 3.0), &img).unwrap().value, 0.0);
        let d = ScalarMap::from_fn(5, 6, |r, c| Some(1.0 + r as f64 * 0.3 + (c as f64).sqrt()));
        let base = smoothness(&d, &img).unwrap().value;
        for c in [0.5, 2.0, 10.0] {
            assert!((smoothness(&d.scaled(c), &img).unwrap().value - base).abs() < 1e-9);
        }
    }

    #[test]
    fn dsc_hand_case() {
        // Depth [[1, 2], [1, 1]] -> d̂ = [8/7, 4/7, 8/7, 8/7].
        // Prior [[1, 1], [2, 1]] -> same values transposed in place.
        let d = ScalarMap::new(2, 2, vec![1.0, 2.0, 1.0, 1.0]).unwrap();
        let p = ScalarMap::new(2, 2, vec![1.0, 1.0, 2.0, 1.0]).unwrap();
        let t = dsc(&d, &p).unwrap();
        let (a, b) = (8.0 / 7.0, 4.0 / 7.0);
        // ∂u: depth [b - a, a - a], prior [a - a, a - b]
        let u = (((b - a) - 0.0_f64).abs() + (0.0 - (a - b)).abs()) / 2.0;
        // ∂v: depth [a - a, a - b], prior [b - a, a - a]
        let v = ((0.0 - (b - a)).abs() + ((a - b) - 0.0_f64).abs()) / 2.0;
        assert!((t.value - (u + v)).abs() < 1e-12);
        assert_eq!(dsc(&d, &d).unwrap().value, 0.0);
        let scaled = dsc(&d.scaled(7.5), &p.scaled(0.2)).unwrap();
        assert!((scaled.value - t.value).abs() < 1e-12);
    }
}
