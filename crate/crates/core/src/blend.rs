//! Attention-weighted fusion of ground and residual depth, and the loss
//! terms combined by the training objective
//! `L_total = L_reg + 𝟙(adaptive)·λ_cls·L_cls`.
//!
//! The ground priori is only meaningful on ground pixels, so the blend
//! falls back to the residual depth wherever the ground map holds the
//! invalidity sentinel, whatever the attention weight says there.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::groundgeom::{SlopeLabel, SlopeProbabilities, SparseDepth};
use crate::map::{pixel_index, AttentionMap, DepthMap};
use crate::scalar::Scalar;

/// Default scale-invariance weight of the regression loss.
pub const DEFAULT_SI_LAMBDA: f64 = 0.85;

/// Default classification-loss weight λ_cls.
pub const DEFAULT_CLS_WEIGHT: f64 = 0.1;

/// Probabilities are clamped to at least this before the log in
/// [`slope_classification_loss`].
pub const PROB_CLAMP_MIN: f64 = 1e-12;

/// Per-pixel convex combination `w·ground + (1 − w)·residual`, with
/// `w = 0` forced wherever the ground pixel holds the sentinel.
pub fn blend_depth<S: Scalar>(
    ground: &DepthMap<S>,
    residual: &DepthMap<S>,
    atten: &AttentionMap<S>,
) -> Result<DepthMap<S>> {
    let (w, h) = (ground.width(), ground.height());
    if residual.width() != w || residual.height() != h || atten.width() != w || atten.height() != h
    {
        return Err(Error::dims(format!(
            "blend inputs disagree: ground {w}x{h}, residual {}x{}, attention {}x{}",
            residual.width(),
            residual.height(),
            atten.width(),
            atten.height()
        )));
    }
    let mut data = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let g = ground.get(x, y);
            let r = residual.get(x, y);
            let out = if g > S::zero() {
                let weight = atten.get(x, y);
                weight * g + (S::one() - weight) * r
            } else {
                r
            };
            data.push(out);
        }
    }
    Ok(DepthMap::from_raw(w, h, data))
}

/// Scale-invariant log regression loss over sparse ground truth.
///
/// With `d_j = ln(pred_j) − ln(gt_j)` over samples landing on valid
/// predicted pixels, the loss is `mean(d²) − λ_si·(mean d)²`; it is
/// non-negative for `λ_si <= 1` and fully scale-invariant at `λ_si = 1`.
/// Samples at invalid predicted pixels are skipped; no overlap at all is
/// an error.
pub fn regression_loss<S: Scalar>(
    pred: &DepthMap<S>,
    gt: &SparseDepth<S>,
    lambda_si: S,
) -> Result<S> {
    if !lambda_si.is_finite() || lambda_si < S::zero() {
        return Err(Error::validation(format!(
            "scale-invariance weight must be finite and non-negative, got {lambda_si}"
        )));
    }
    let mut n = 0usize;
    let mut sum_d = S::zero();
    let mut sum_d2 = S::zero();
    for s in gt.samples() {
        let Some((x, y)) = pixel_index(s.u, s.v, pred.width(), pred.height()) else {
            continue;
        };
        let p = pred.get(x, y);
        if p <= S::zero() {
            continue;
        }
        let d = p.ln() - s.z.ln();
        sum_d = sum_d + d;
        sum_d2 = sum_d2 + d * d;
        n += 1;
    }
    if n == 0 {
        return Err(Error::numeric(
            "no ground-truth sample lands on a valid predicted pixel".to_string(),
        ));
    }
    let n = S::of_usize(n);
    let mean_d = sum_d / n;
    let loss = sum_d2 / n - lambda_si * mean_d * mean_d;
    // non-negative by construction for λ <= 1; clamp away rounding dust
    Ok(if lambda_si <= S::one() {
        loss.max(S::zero())
    } else {
        loss
    })
}

/// Mean cross-entropy of the slope classes at labeled pixels:
/// `mean(−ln p_label)` with `p` clamped to `[1e-12, 1]`.
pub fn slope_classification_loss<S: Scalar>(
    probs: &SlopeProbabilities<S>,
    labels: &[SlopeLabel<S>],
) -> Result<S> {
    if labels.is_empty() {
        return Err(Error::numeric(
            "classification loss needs at least one labeled pixel".to_string(),
        ));
    }
    let clamp_min = S::of(PROB_CLAMP_MIN);
    let mut sum = S::zero();
    for l in labels {
        if l.class >= probs.classes() {
            return Err(Error::validation(format!(
                "label class {} exceeds the {} slope classes",
                l.class,
                probs.classes()
            )));
        }
        let Some((x, y)) = pixel_index(l.u, l.v, probs.width(), probs.height()) else {
            return Err(Error::validation(format!(
                "label at ({}, {}) falls outside the {}x{} probability map",
                l.u,
                l.v,
                probs.width(),
                probs.height()
            )));
        };
        let p = probs.at(x, y)[l.class].max(clamp_min).min(S::one());
        sum = sum - p.ln();
    }
    Ok(sum / S::of_usize(labels.len()))
}

/// The combined objective and its parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossBreakdown<S> {
    pub l_reg: S,
    pub l_cls: S,
    pub lambda_cls: S,
    pub adaptive: bool,
    pub total: S,
}

/// Combines the losses: `total = l_reg + λ_cls·l_cls` in adaptive mode,
/// `total = l_reg` in vanilla mode (the classification term is ignored
/// entirely).
pub fn total_loss<S: Scalar>(
    l_reg: S,
    l_cls: S,
    lambda_cls: S,
    adaptive: bool,
) -> Result<LossBreakdown<S>> {
    for (name, v) in [
        ("l_reg", l_reg),
        ("l_cls", l_cls),
        ("lambda_cls", lambda_cls),
    ] {
        if !v.is_finite() || v < S::zero() {
            return Err(Error::validation(format!(
                "{name} must be finite and non-negative, got {v}"
            )));
        }
    }
    let total = if adaptive {
        l_reg + lambda_cls * l_cls
    } else {
        l_reg
    };
    Ok(LossBreakdown {
        l_reg,
        l_cls,
        lambda_cls,
        adaptive,
        total,
    })
}
