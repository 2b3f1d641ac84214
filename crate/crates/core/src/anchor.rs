//! Orientation anchors, region-stage target encoding/decoding and the
//! region-stage loss.
//!
//! Each positive point `p_a` carries one anchor per reference orientation,
//! all with zero assigned angle. A ground-truth grasp is encoded as the
//! index of the closest anchor orientation plus residuals:
//!
//! ```text
//! res_p = (p − p_a) / S
//! res_r = r/‖r‖ − r_a/‖r_a‖
//! res_θ = θ
//! ```

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::geom::{Grasp, Vec3};
use crate::loss::{cross_entropy, is_distribution, smooth_l1_sum};

pub const DEFAULT_ANCHOR_COUNT: usize = 8;

const DEGENERATE_NORM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct AnchorSet {
    orientations: Vec<Vec3>,
}

impl AnchorSet {
    /// Equiangular orientation sets: the 8 cube-corner directions or the 6
    /// signed axes.
    pub fn build(count: usize) -> Result<Self> {
        let orientations = match count {
            8 => {
                let mut v = Vec::with_capacity(8);
                for sx in [1.0, -1.0] {
                    for sy in [1.0, -1.0] {
                        for sz in [1.0, -1.0] {
                            v.push(Vec3::new(sx, sy, sz).normalize());
                        }
                    }
                }
                v
            }
            6 => vec![Vec3::x(), -Vec3::x(), Vec3::y(), -Vec3::y(), Vec3::z(), -Vec3::z()],
            n => return Err(Error::NoEquiangularConstruction(n)),
        };
        Ok(AnchorSet { orientations })
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    pub fn orientations(&self) -> &[Vec3] {
        &self.orientations
    }

    pub fn get(&self, class: usize) -> Option<&Vec3> {
        self.orientations.get(class)
    }

    /// Index of the anchor with the smallest angle to `r`; lowest index on ties.
    pub fn classify(&self, r: &Vec3) -> usize {
        let u = r.normalize();
        let mut best = 0;
        let mut best_dot = f64::NEG_INFINITY;
        for (i, a) in self.orientations.iter().enumerate() {
            let d = a.dot(&u);
            if d > best_dot {
                best = i;
                best_dot = d;
            }
        }
        best
    }
}

/// Anchor class plus residuals, used both for targets and predictions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrnResiduals {
    pub class: usize,
    pub res_p: Vec3,
    pub res_r: Vec3,
    pub res_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrnTarget {
    pub point_index: usize,
    pub center_point: Vec3,
    pub residuals: GrnResiduals,
}

pub fn encode_grn(p_a: &Vec3, gt: &Grasp, anchors: &AnchorSet, scale: f64) -> GrnResiduals {
    let r = gt.orientation().normalize();
    let class = anchors.classify(&r);
    let anchor = anchors.orientations[class].normalize();
    GrnResiduals {
        class,
        res_p: (gt.center() - p_a) / scale,
        res_r: r - anchor,
        res_theta: gt.angle(),
    }
}

/// Result of decoding; `clamped` reports an angle pulled back into range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decoded {
    pub grasp: Grasp,
    pub clamped: bool,
}

pub(crate) fn clamp_angle(theta: f64) -> (f64, bool) {
    let c = theta.clamp(-FRAC_PI_2, FRAC_PI_2);
    (c, c != theta)
}

pub fn decode_grn(p_a: &Vec3, res: &GrnResiduals, anchors: &AnchorSet, scale: f64) -> Result<Decoded> {
    let anchor = anchors
        .get(res.class)
        .ok_or_else(|| Error::InvalidInput(format!("anchor class {} out of range", res.class)))?;
    let r = res.res_r + anchor.normalize();
    if r.norm().is_nan() || r.norm() < DEGENERATE_NORM {
        return Err(Error::DegenerateOrientation);
    }
    if !res.res_theta.is_finite() {
        return Err(Error::InvalidInput("angle residual is not finite".into()));
    }
    let (theta, clamped) = clamp_angle(res.res_theta);
    let grasp = Grasp::new(res.res_p * scale + p_a, r, theta)?;
    Ok(Decoded { grasp, clamped })
}

/// Network output for one positive point: class probabilities and residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct GrnPrediction {
    pub class_probs: Vec<f64>,
    pub res_p: Vec3,
    pub res_r: Vec3,
    pub res_theta: f64,
}

impl GrnPrediction {
    /// Certain-correct prediction for a target.
    pub fn exact(target: &GrnResiduals, classes: usize) -> Self {
        let mut class_probs = vec![0.0; classes];
        class_probs[target.class] = 1.0;
        GrnPrediction {
            class_probs,
            res_p: target.res_p,
            res_r: target.res_r,
            res_theta: target.res_theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrnLossWeights {
    pub cls: f64,
    pub p: f64,
    pub r: f64,
    pub theta: f64,
}

impl Default for GrnLossWeights {
    fn default() -> Self {
        GrnLossWeights {
            cls: 0.2,
            p: 10.0,
            r: 5.0,
            theta: 1.0,
        }
    }
}

/// Weighted loss terms, each already divided by the point count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossBreakdown {
    pub total: f64,
    pub cls: f64,
    pub p: f64,
    pub r: f64,
    pub theta: f64,
    pub clamped: usize,
}

/// `(1/N)(λ_cls·Σ CE + Σ_u λ_u·Σ SmoothL1)` over the positive points.
pub fn grn_loss(
    predictions: &[GrnPrediction],
    targets: &[GrnResiduals],
    weights: &GrnLossWeights,
) -> Result<LossBreakdown> {
    if predictions.len() != targets.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::InvalidInput(
            "region loss needs at least one positive point".into(),
        ));
    }
    let mut out = LossBreakdown::default();
    for (i, (pred, t)) in predictions.iter().zip(targets).enumerate() {
        if t.class >= pred.class_probs.len() || !is_distribution(&pred.class_probs, 1e-6) {
            return Err(Error::InvalidInput(format!(
                "prediction {i} has invalid class probabilities"
            )));
        }
        let (ce, clamped) = cross_entropy(&pred.class_probs, t.class);
        out.cls += ce;
        out.clamped += clamped as usize;
        out.p += smooth_l1_sum(pred.res_p.as_slice(), t.res_p.as_slice());
        out.r += smooth_l1_sum(pred.res_r.as_slice(), t.res_r.as_slice());
        out.theta += smooth_l1_sum(&[pred.res_theta], &[t.res_theta]);
    }
    let n = targets.len() as f64;
    out.cls *= weights.cls / n;
    out.p *= weights.p / n;
    out.r *= weights.r / n;
    out.theta *= weights.theta / n;
    out.total = out.cls + out.p + out.r + out.theta;
    Ok(out)
}

/// Index of the positive grasp whose center is nearest to `point`, if it is
/// within `max_distance`. Ties go to the lower index.
pub fn match_ground_truth(point: &Vec3, positives: &[Grasp], max_distance: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, g) in positives.iter().enumerate() {
        let d = (g.center() - point).norm();
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.filter(|&(_, d)| d <= max_distance).map(|(i, _)| i)
}
