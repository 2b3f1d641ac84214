//! Refinement stage: gripper closing area, proposal selection, proposal
//! labels, residual targets and the refinement loss.

use std::f64::consts::PI;

use crate::anchor::{clamp_angle, Decoded, LossBreakdown};
use crate::error::{Error, Result};
use crate::geom::{angle_between, Grasp, GripperModel, PointCloud, Vec3};
use crate::loss::{cross_entropy, is_distribution, smooth_l1_sum};

pub const DEFAULT_MIN_POINTS: usize = 50;

/// A proposal counts as close when its orientation is within this angle of
/// the ground truth...
pub const ORIENTATION_BOUND: f64 = 2.0 * PI / 9.0;
/// ...and its approach angle within this one.
pub const ANGLE_BOUND: f64 = PI / 3.0;

const DEGENERATE_NORM: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ClosingArea {
    pub indices: Vec<usize>,
    /// Grasp-frame coordinates of the points in `indices`.
    pub local_points: Vec<Vec3>,
}

/// Points between the fingers, with their canonical (grasp-frame)
/// coordinates.
pub fn closing_area(cloud: &PointCloud, g: &Grasp, gripper: &GripperModel, up: &Vec3) -> ClosingArea {
    let frame = g.frame(up);
    let area = gripper.closing_box();
    let mut indices = Vec::new();
    let mut local_points = Vec::new();
    for (i, p) in cloud.points().iter().enumerate() {
        let q = frame.to_local(p);
        if area.contains(&q) {
            indices.push(i);
            local_points.push(q);
        }
    }
    ClosingArea { indices, local_points }
}

/// Indices of proposals with strictly more than `min_points` points in their
/// closing area.
pub fn select_refinable(
    proposals: &[Grasp],
    cloud: &PointCloud,
    gripper: &GripperModel,
    up: &Vec3,
    min_points: usize,
) -> Vec<usize> {
    proposals
        .iter()
        .enumerate()
        .filter(|(_, g)| closing_area(cloud, g, gripper, up).indices.len() > min_points)
        .map(|(i, _)| i)
        .collect()
}

/// Label rule on precomputed differences; both bounds are strict.
pub fn label_from_differences(orientation_diff: f64, angle_diff: f64) -> bool {
    orientation_diff < ORIENTATION_BOUND && angle_diff.abs() < ANGLE_BOUND
}

pub fn rn_label(proposal: &Grasp, gt: &Grasp) -> bool {
    label_from_differences(
        angle_between(&proposal.orientation(), &gt.orientation()),
        proposal.angle() - gt.angle(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnResiduals {
    pub res_p: Vec3,
    pub res_r: Vec3,
    pub res_theta: f64,
}

impl RnResiduals {
    pub fn zero() -> Self {
        RnResiduals {
            res_p: Vec3::zeros(),
            res_r: Vec3::zeros(),
            res_theta: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnTarget {
    pub proposal_index: usize,
    pub positive: bool,
    /// Present only for positive proposals.
    pub residuals: Option<RnResiduals>,
}

/// Residuals from a positive proposal to its ground truth.
pub fn encode_rn(proposal: &Grasp, gt: &Grasp, scale: f64) -> Result<RnResiduals> {
    if !rn_label(proposal, gt) {
        return Err(Error::NegativeProposal);
    }
    Ok(RnResiduals {
        res_p: (gt.center() - proposal.center()) / scale,
        res_r: gt.orientation().normalize() - proposal.orientation().normalize(),
        res_theta: gt.angle() - proposal.angle(),
    })
}

pub fn decode_rn(proposal: &Grasp, res: &RnResiduals, scale: f64) -> Result<Decoded> {
    let r = proposal.orientation().normalize() + res.res_r;
    if r.norm().is_nan() || r.norm() < DEGENERATE_NORM {
        return Err(Error::DegenerateOrientation);
    }
    let (theta, clamped) = clamp_angle(proposal.angle() + res.res_theta);
    let grasp = Grasp::new(proposal.center() + res.res_p * scale, r, theta)?;
    Ok(Decoded { grasp, clamped })
}

/// Label and (for positives) residuals of one proposal against its matched
/// ground truth; unmatched proposals are negative.
pub fn make_rn_target(index: usize, proposal: &Grasp, gt: Option<&Grasp>, scale: f64) -> RnTarget {
    match gt.filter(|gt| rn_label(proposal, gt)) {
        Some(gt) => RnTarget {
            proposal_index: index,
            positive: true,
            residuals: encode_rn(proposal, gt, scale).ok(),
        },
        None => RnTarget {
            proposal_index: index,
            positive: false,
            residuals: None,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RnPrediction {
    /// `[negative, positive]` probabilities.
    pub probs: [f64; 2],
    pub residuals: RnResiduals,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RnLossWeights {
    pub cls: f64,
    pub p: f64,
    pub r: f64,
    pub theta: f64,
}

impl Default for RnLossWeights {
    fn default() -> Self {
        RnLossWeights {
            cls: 1.0,
            p: 1.0,
            r: 1.0,
            theta: 1.0,
        }
    }
}

/// Classification averaged over all `k₂` proposals, regression averaged over
/// the `k₃'` positives only (zero when there are none).
pub fn rn_loss(predictions: &[RnPrediction], targets: &[RnTarget], weights: &RnLossWeights) -> Result<LossBreakdown> {
    if predictions.len() != targets.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} targets",
            predictions.len(),
            targets.len()
        )));
    }
    if targets.is_empty() {
        return Err(Error::InvalidInput(
            "refinement loss needs at least one proposal".into(),
        ));
    }
    let mut out = LossBreakdown::default();
    let mut positives = 0usize;
    for (i, (pred, t)) in predictions.iter().zip(targets).enumerate() {
        if !is_distribution(&pred.probs, 1e-6) {
            return Err(Error::InvalidInput(format!("prediction {i} is not a probability pair")));
        }
        let (ce, clamped) = cross_entropy(&pred.probs, t.positive as usize);
        out.cls += ce;
        out.clamped += clamped as usize;
        if t.positive {
            let res = t
                .residuals
                .ok_or_else(|| Error::InvalidInput(format!("positive target {i} has no residuals")))?;
            positives += 1;
            out.p += smooth_l1_sum(pred.residuals.res_p.as_slice(), res.res_p.as_slice());
            out.r += smooth_l1_sum(pred.residuals.res_r.as_slice(), res.res_r.as_slice());
            out.theta += smooth_l1_sum(&[pred.residuals.res_theta], &[res.res_theta]);
        }
    }
    out.cls *= weights.cls / targets.len() as f64;
    if positives > 0 {
        let k = positives as f64;
        out.p *= weights.p / k;
        out.r *= weights.r / k;
        out.theta *= weights.theta / k;
    }
    out.total = out.cls + out.p + out.r + out.theta;
    Ok(out)
}
