//! Cross-modal attention over per-camera feature arrays, with semantic
//! tokens as query and key and projected features as value.
//!
//! Layout: for each camera, `Q` is the `C′×L` token matrix, `K = Qᵀ`, so the
//! attention `softmax(QK/√L)` is `C′×C′` and mixes the `C′` channels of
//! `V`, viewed as `C′×(h′w′)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::motion::softmax;
use crate::tensor::{ensure_same_shapes, AffineMap, FeatureArray};

/// Shapes and injected weights. `g_phi` maps `C → C′`, `g_psi` maps
/// `C′ → C`; `phi` scales the attention branch per channel.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionConfig {
    pub channels: usize,
    pub reduced_channels: usize,
    pub height: usize,
    pub width: usize,
    pub attn_height: usize,
    pub attn_width: usize,
    pub phi: DVector<f64>,
    pub g_phi: AffineMap,
    pub g_psi: AffineMap,
}

impl AttentionConfig {
    /// `L = h′w′/4`.
    pub fn token_length(&self) -> usize {
        self.attn_height * self.attn_width / 4
    }

    /// `T = C′·L`.
    pub fn token_count(&self) -> usize {
        self.reduced_channels * self.token_length()
    }

    pub fn validate(&self) -> Result<()> {
        let spatial = self.attn_height * self.attn_width;
        if spatial == 0 || !spatial.is_multiple_of(4) {
            return Err(Error::NonDivisibleSpatial(spatial));
        }
        let dims = [self.channels, self.reduced_channels, self.height, self.width];
        if dims.contains(&0) {
            return Err(Error::ShapeMismatch(format!("attention dims must be positive, got {dims:?}")));
        }
        let check = |what: &str, m: &AffineMap, out: usize, inp: usize| {
            if m.output_dim() != out || m.input_dim() != inp {
                return Err(Error::ShapeMismatch(format!(
                    "{what} is {}x{}, expected {out}x{inp}",
                    m.output_dim(),
                    m.input_dim()
                )));
            }
            Ok(())
        };
        check("g_phi", &self.g_phi, self.reduced_channels, self.channels)?;
        check("g_psi", &self.g_psi, self.channels, self.reduced_channels)?;
        if self.phi.len() != self.reduced_channels {
            return Err(Error::ShapeMismatch(format!(
                "phi has {} entries, expected {}",
                self.phi.len(),
                self.reduced_channels
            )));
        }
        Ok(())
    }
}

/// Per-camera semantic tokens `c ∈ R^{N×T}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TokenBatch {
    pub tokens: Vec<Vec<f64>>,
}

/// Row-softmax of `Q Qᵀ / √L` for a `C′×L` token matrix.
pub fn attention_weights(q: &DMatrix<f64>) -> DMatrix<f64> {
    let l = q.ncols() as f64;
    let logits = q * q.transpose() / l.sqrt();
    let mut out = DMatrix::zeros(logits.nrows(), logits.ncols());
    for r in 0..logits.nrows() {
        let row: Vec<f64> = logits.row(r).iter().copied().collect();
        for (c, v) in softmax(&row).into_iter().enumerate() {
            out[(r, c)] = v;
        }
    }
    out
}

/// Full attention block: project and resize, attend, add the residual,
/// resize back and project to `C` channels.
pub fn cross_modal_attend(x: &[FeatureArray], c: &TokenBatch, cfg: &AttentionConfig) -> Result<Vec<FeatureArray>> {
    cfg.validate()?;
    ensure_same_shapes(x)?;
    if c.tokens.len() != x.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} token rows for {} cameras",
            c.tokens.len(),
            x.len()
        )));
    }
    let (cp, l) = (cfg.reduced_channels, cfg.token_length());
    let spatial = cfg.attn_height * cfg.attn_width;
    x.iter()
        .zip(&c.tokens)
        .map(|(xi, ci)| {
            if xi.shape() != (cfg.channels, cfg.height, cfg.width) {
                return Err(Error::ShapeMismatch(format!(
                    "feature shape {:?}, expected {:?}",
                    xi.shape(),
                    (cfg.channels, cfg.height, cfg.width)
                )));
            }
            if ci.len() != cfg.token_count() {
                return Err(Error::ShapeMismatch(format!(
                    "{} tokens, expected C′·L = {}",
                    ci.len(),
                    cfg.token_count()
                )));
            }
            let projected = xi.pointwise(&cfg.g_phi)?.resized(cfg.attn_height, cfg.attn_width)?;
            let v = DMatrix::from_row_slice(cp, spatial, projected.data());
            let q = DMatrix::from_row_slice(cp, l, ci);
            let mut attended = attention_weights(&q) * &v;
            for (r, mut row) in attended.row_iter_mut().enumerate() {
                row *= cfg.phi[r];
            }
            attended += &v;
            let data: Vec<f64> = attended.transpose().iter().copied().collect();
            FeatureArray::new(cp, cfg.attn_height, cfg.attn_width, data)?
                .resized(cfg.height, cfg.width)?
                .pointwise(&cfg.g_psi)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(c: usize, cp: usize, h: usize, w: usize, ah: usize, aw: usize, phi: f64) -> AttentionConfig {
        AttentionConfig {
            channels: c,
            reduced_channels: cp,
            height: h,
            width: w,
            attn_height: ah,
            attn_width: aw,
            phi: DVector::from_element(cp, phi),
            g_phi: AffineMap::linear(DMatrix::from_fn(cp, c, |r, k| 0.1 * (r + 2 * k) as f64 - 0.2)),
            g_psi: AffineMap::linear(DMatrix::from_fn(c, cp, |r, k| 0.05 * (3 * r + k) as f64)),
        }
    }

    fn features(n: usize, c: usize, h: usize, w: usize) -> Vec<FeatureArray> {
        (0..n)
            .map(|i| FeatureArray::from_fn(c, h, w, |k, y, x| ((i + 1) * (k + 2)) as f64 * 0.1 + (y as f64 * 0.3).sin() + x as f64 * 0.05))
            .collect()
    }

    fn tokens(n: usize, t: usize) -> TokenBatch {
        TokenBatch {
            tokens: (0..n).map(|i| (0..t).map(|k| ((i * 7 + k) as f64 * 0.37).cos()).collect()).collect(),
        }
    }

    #[test]
    fn rows_sum_to_one() {
        let q = DMatrix::from_fn(3, 4, |r, c| (r as f64 - c as f64) * 0.7);
        let a = attention_weights(&q);
        for r in 0..3 {
            assert!((a.row(r).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_gate_is_residual_path() {
        let cfg = cfg(3, 2, 6, 5, 4, 2, 0.0);
        let x = features(2, 3, 6, 5);
        let out = cross_modal_attend(&x, &tokens(2, cfg.token_count()), &cfg).unwrap();
        for (xi, oi) in x.iter().zip(&out) {
            let expected = xi
                .pointwise(&cfg.g_phi)
                .unwrap()
                .resized(4, 2)
                .unwrap()
                .resized(6, 5)
                .unwrap()
                .pointwise(&cfg.g_psi)
                .unwrap();
            assert!(oi.max_abs_diff(&expected) < 1e-12);
        }
    }

    #[test]
    fn identity_projections_recover_input() {
        let mut cfg = cfg(2, 2, 4, 4, 4, 4, 0.0);
        cfg.g_phi = AffineMap::linear(DMatrix::identity(2, 2));
        cfg.g_psi = AffineMap::linear(DMatrix::identity(2, 2));
        let x = features(1, 2, 4, 4);
        let out = cross_modal_attend(&x, &tokens(1, cfg.token_count()), &cfg).unwrap();
        assert!(out[0].max_abs_diff(&x[0]) < 1e-12);
    }

    #[test]
    fn hand_computed_two_channel_case() {
        // C′ = 2, L = 1: Q = [a; b], QK = [[a², ab], [ab, b²]].
        let mut cfg = cfg(2, 2, 2, 2, 2, 2, 1.0);
        cfg.g_phi = AffineMap::linear(DMatrix::identity(2, 2));
        cfg.g_psi = AffineMap::linear(DMatrix::identity(2, 2));
        let (a, b) = (1.0_f64, 0.0_f64);
        let x = vec![FeatureArray::new(2, 2, 2, vec![1.0, 2.0, 3.0, 4.0, 10.0, 20.0, 30.0, 40.0]).unwrap()];
        let out = cross_modal_attend(&x, &TokenBatch { tokens: vec![vec![a, b]] }, &cfg).unwrap();
        // Row 0 softmax(1, 0), row 1 softmax(0, 0).
        let e = 1f64.exp();
        let r0 = [e / (e + 1.0), 1.0 / (e + 1.0)];
        let r1 = [0.5, 0.5];
        for p in 0..4 {
            let v0 = x[0].data()[p];
            let v1 = x[0].data()[4 + p];
            assert!((out[0].data()[p] - (r0[0] * v0 + r0[1] * v1 + v0)).abs() < 1e-12);
            assert!((out[0].data()[4 + p] - (r1[0] * v0 + r1[1] * v1 + v1)).abs() < 1e-12);
        }
    }

    #[test]
    fn shape_preserved_and_camera_equivariant() {
        let cfg = cfg(4, 3, 7, 9, 4, 6, 0.5);
        let x = features(3, 4, 7, 9);
        let t = tokens(3, cfg.token_count());
        let out = cross_modal_attend(&x, &t, &cfg).unwrap();
        assert!(out.iter().all(|o| o.shape() == (4, 7, 9)));
        let xs = vec![x[2].clone(), x[0].clone(), x[1].clone()];
        let ts = TokenBatch {
            tokens: vec![t.tokens[2].clone(), t.tokens[0].clone(), t.tokens[1].clone()],
        };
        let perm = cross_modal_attend(&xs, &ts, &cfg).unwrap();
        assert_eq!(perm[0], out[2]);
        assert_eq!(perm[1], out[0]);
    }

    #[test]
    fn errors() {
        let bad = cfg(2, 2, 4, 4, 3, 3, 1.0);
        let x = features(1, 2, 4, 4);
        assert!(matches!(
            cross_modal_attend(&x, &tokens(1, 4), &bad),
            Err(Error::NonDivisibleSpatial(9))
        ));
        let good = cfg(2, 2, 4, 4, 2, 2, 1.0);
        assert!(matches!(cross_modal_attend(&x, &tokens(1, 3), &good), Err(Error::ShapeMismatch(_))));
        assert!(matches!(cross_modal_attend(&x, &tokens(2, 2), &good), Err(Error::ShapeMismatch(_))));
        assert!(matches!(cross_modal_attend(&features(1, 3, 4, 4), &tokens(1, 2), &good), Err(Error::ShapeMismatch(_))));
    }
}
