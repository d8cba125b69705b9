use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::photometric::DEFAULT_ALPHA;
use super::{LossTerm, PoseConsistency};

/// Every loss coefficient. Defaults are the published training settings;
/// `alpha_t` and `alpha_r` (pose consistency) default to 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LossWeights {
    pub alpha: f64,
    pub lambda_t: f64,
    pub lambda_s: f64,
    pub lambda_st: f64,
    pub lambda_mvrc: f64,
    pub omega_p: f64,
    pub omega_s: f64,
    pub omega_sdc: f64,
    pub omega_snc: f64,
    pub omega_dsc: f64,
    pub kappa_src: f64,
    pub kappa_snc: f64,
    pub mu: f64,
    pub alpha_t: f64,
    pub alpha_r: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            alpha: 0.85,
            lambda_t: 1.0,
            lambda_s: 0.03,
            lambda_st: 0.1,
            lambda_mvrc: 0.2,
            omega_p: 1.0,
            omega_s: 0.001,
            omega_sdc: 0.001,
            omega_snc: 0.01,
            omega_dsc: 1.0,
            kappa_src: 0.1,
            kappa_snc: 0.1,
            mu: 0.1,
            alpha_t: 1.0,
            alpha_r: 1.0,
        }
    }
}

impl LossWeights {
    /// All coefficients zero except `alpha`.
    pub fn zero() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            lambda_t: 0.0,
            lambda_s: 0.0,
            lambda_st: 0.0,
            lambda_mvrc: 0.0,
            omega_p: 0.0,
            omega_s: 0.0,
            omega_sdc: 0.0,
            omega_snc: 0.0,
            omega_dsc: 0.0,
            kappa_src: 0.0,
            kappa_snc: 0.0,
            mu: 0.0,
            alpha_t: 0.0,
            alpha_r: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let named = [
            ("alpha", self.alpha),
            ("lambda_t", self.lambda_t),
            ("lambda_s", self.lambda_s),
            ("lambda_st", self.lambda_st),
            ("lambda_mvrc", self.lambda_mvrc),
            ("omega_p", self.omega_p),
            ("omega_s", self.omega_s),
            ("omega_sdc", self.omega_sdc),
            ("omega_snc", self.omega_snc),
            ("omega_dsc", self.omega_dsc),
            ("kappa_src", self.kappa_src),
            ("kappa_snc", self.kappa_snc),
            ("mu", self.mu),
            ("alpha_t", self.alpha_t),
            ("alpha_r", self.alpha_r),
        ];
        for (name, v) in named {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("weight {name} must be finite and >= 0, got {v}")));
            }
        }
        if self.alpha > 1.0 {
            return Err(Error::InvalidArgument(format!("alpha must be <= 1, got {}", self.alpha)));
        }
        Ok(())
    }
}

/// Term identifiers in report order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    Temporal,
    Spatial,
    SpatialTemporal,
    Mvrc,
    Smoothness,
    Sdc,
    Snc,
    Dsc,
    SrcTemporal,
    SrcSpatial,
    SrcSpatialTemporal,
    SrcMvrc,
    SpatialSnc,
}

impl TermKind {
    pub const ALL: [TermKind; 13] = [
        TermKind::Temporal,
        TermKind::Spatial,
        TermKind::SpatialTemporal,
        TermKind::Mvrc,
        TermKind::Smoothness,
        TermKind::Sdc,
        TermKind::Snc,
        TermKind::Dsc,
        TermKind::SrcTemporal,
        TermKind::SrcSpatial,
        TermKind::SrcSpatialTemporal,
        TermKind::SrcMvrc,
        TermKind::SpatialSnc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TermKind::Temporal => "temporal",
            TermKind::Spatial => "spatial",
            TermKind::SpatialTemporal => "spatial_temporal",
            TermKind::Mvrc => "mvrc",
            TermKind::Smoothness => "smoothness",
            TermKind::Sdc => "sdc",
            TermKind::Snc => "snc",
            TermKind::Dsc => "dsc",
            TermKind::SrcTemporal => "src_temporal",
            TermKind::SrcSpatial => "src_spatial",
            TermKind::SrcSpatialTemporal => "src_spatial_temporal",
            TermKind::SrcMvrc => "src_mvrc",
            TermKind::SpatialSnc => "spatial_snc",
        }
    }

    /// Coefficient multiplying this term in the total loss.
    pub fn effective_weight(self, w: &LossWeights) -> f64 {
        match self {
            TermKind::Temporal => w.omega_p * w.lambda_t,
            TermKind::Spatial => w.omega_p * w.lambda_s,
            TermKind::SpatialTemporal => w.omega_p * w.lambda_st,
            TermKind::Mvrc => w.omega_p * w.lambda_mvrc,
            TermKind::Smoothness => w.omega_s,
            TermKind::Sdc => w.omega_sdc,
            TermKind::Snc => w.omega_snc,
            TermKind::Dsc => w.omega_dsc,
            TermKind::SrcTemporal => w.mu * w.kappa_src * w.lambda_t,
            TermKind::SrcSpatial => w.mu * w.kappa_src * w.lambda_s,
            TermKind::SrcSpatialTemporal => w.mu * w.kappa_src * w.lambda_st,
            TermKind::SrcMvrc => w.mu * w.kappa_src * w.lambda_mvrc,
            TermKind::SpatialSnc => w.mu * w.kappa_snc,
        }
    }
}

/// Individual term values; `None` marks a term whose inputs were absent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossTerms {
    pub temporal: Option<LossTerm>,
    pub spatial: Option<LossTerm>,
    pub spatial_temporal: Option<LossTerm>,
    pub mvrc: Option<LossTerm>,
    pub smoothness: Option<LossTerm>,
    pub sdc: Option<LossTerm>,
    pub snc: Option<LossTerm>,
    pub dsc: Option<LossTerm>,
    pub src_temporal: Option<LossTerm>,
    pub src_spatial: Option<LossTerm>,
    pub src_spatial_temporal: Option<LossTerm>,
    pub src_mvrc: Option<LossTerm>,
    pub spatial_snc: Option<LossTerm>,
    /// Reported alongside the total but not part of it.
    pub pose_consistency: Option<PoseConsistency>,
}

impl LossTerms {
    pub fn get(&self, kind: TermKind) -> Option<LossTerm> {
        match kind {
            TermKind::Temporal => self.temporal,
            TermKind::Spatial => self.spatial,
            TermKind::SpatialTemporal => self.spatial_temporal,
            TermKind::Mvrc => self.mvrc,
            TermKind::Smoothness => self.smoothness,
            TermKind::Sdc => self.sdc,
            TermKind::Snc => self.snc,
            TermKind::Dsc => self.dsc,
            TermKind::SrcTemporal => self.src_temporal,
            TermKind::SrcSpatial => self.src_spatial,
            TermKind::SrcSpatialTemporal => self.src_spatial_temporal,
            TermKind::SrcMvrc => self.src_mvrc,
            TermKind::SpatialSnc => self.spatial_snc,
        }
    }

    pub fn set(&mut self, kind: TermKind, term: Option<LossTerm>) {
        let slot = match kind {
            TermKind::Temporal => &mut self.temporal,
            TermKind::Spatial => &mut self.spatial,
            TermKind::SpatialTemporal => &mut self.spatial_temporal,
            TermKind::Mvrc => &mut self.mvrc,
            TermKind::Smoothness => &mut self.smoothness,
            TermKind::Sdc => &mut self.sdc,
            TermKind::Snc => &mut self.snc,
            TermKind::Dsc => &mut self.dsc,
            TermKind::SrcTemporal => &mut self.src_temporal,
            TermKind::SrcSpatial => &mut self.src_spatial,
            TermKind::SrcSpatialTemporal => &mut self.src_spatial_temporal,
            TermKind::SrcMvrc => &mut self.src_mvrc,
            TermKind::SpatialSnc => &mut self.spatial_snc,
        };
        *slot = term;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportEntry {
    pub term: TermKind,
    pub value: f64,
    pub count: usize,
    pub weight: f64,
    pub contribution: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LossReport {
    pub terms: Vec<ReportEntry>,
    pub weights: LossWeights,
    /// `λ`-weighted photometric sum.
    pub l_p: f64,
    /// `λ`-weighted photometric sum with reconstructed depth.
    pub l_src: f64,
    pub total: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pose_consistency: Option<PoseConsistency>,
}

impl LossReport {
    pub fn entry(&self, kind: TermKind) -> Option<&ReportEntry> {
        self.terms.iter().find(|e| e.term == kind)
    }

    /// `Σ weight·value` over the listed entries.
    pub fn recompute(&self) -> f64 {
        self.terms.iter().map(|e| e.weight * e.value).sum()
    }
}

/// Weighted total over every present term.
///
/// A term with a positive effective weight but no value is a
/// [`Error::MissingTerm`]; absent terms with zero weight are skipped.
pub fn total_loss(terms: &LossTerms, weights: &LossWeights) -> Result<LossReport> {
    weights.validate()?;
    let mut entries = Vec::new();
    for kind in TermKind::ALL {
        let weight = kind.effective_weight(weights);
        match terms.get(kind) {
            Some(t) => entries.push(ReportEntry {
                term: kind,
                value: t.value,
                count: t.count,
                weight,
                contribution: weight * t.value,
            }),
            None if weight > 0.0 => return Err(Error::MissingTerm(kind.name())),
            None => {}
        }
    }
    let value = |k: TermKind| terms.get(k).map_or(0.0, |t| t.value);
    let l_p = weights.lambda_t * value(TermKind::Temporal)
        + weights.lambda_s * value(TermKind::Spatial)
        + weights.lambda_st * value(TermKind::SpatialTemporal)
        + weights.lambda_mvrc * value(TermKind::Mvrc);
    let l_src = weights.lambda_t * value(TermKind::SrcTemporal)
        + weights.lambda_s * value(TermKind::SrcSpatial)
        + weights.lambda_st * value(TermKind::SrcSpatialTemporal)
        + weights.lambda_mvrc * value(TermKind::SrcMvrc);
    let total = entries.iter().map(|e| e.contribution).sum();
    Ok(LossReport {
        terms: entries,
        weights: *weights,
        l_p,
        l_src,
        total,
        pose_consistency: terms.pose_consistency,
    })
}
