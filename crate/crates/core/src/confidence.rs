//! Point grasp confidence: density of nearby positive grasp centers, its
//! binarization into score-stage labels, and the score-stage loss.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{Grasp, PointCloud, Vec3};
use crate::loss::{cross_entropy, is_distribution};
use crate::spatial::UniformGrid;

pub const DEFAULT_DISTANCE_THRESHOLD: f64 = 0.02;
pub const DEFAULT_CONFIDENCE_THRESHOLD: f64 = 0.6;

/// Class order used by every two-class score vector: `[negative, positive]`.
pub const NEGATIVE: usize = 0;
pub const POSITIVE: usize = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceField {
    pub values: Vec<f64>,
    /// `true` for positive points, i.e. `c_pc > c_t`.
    pub labels: Vec<bool>,
    pub threshold: f64,
    pub distance_threshold: f64,
}

impl ConfidenceField {
    fn from_values(values: Vec<f64>, threshold: f64, distance_threshold: f64) -> Self {
        let labels = values.iter().map(|&c| c > threshold).collect();
        ConfidenceField {
            values,
            labels,
            threshold,
            distance_threshold,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One-hot ground-truth scores `[neg, pos]` per point.
    pub fn scores(&self) -> Vec<[f64; 2]> {
        self.labels
            .iter()
            .map(|&pos| if pos { [0.0, 1.0] } else { [1.0, 0.0] })
            .collect()
    }

    pub fn positive_indices(&self) -> Vec<usize> {
        segment_positive(&self.scores())
    }
}

/// Contribution of a grasp centered at `center` to a point at `p`.
pub fn kernel(p: &Vec3, center: &Vec3, d_th: f64) -> f64 {
    let d = (p - center).norm();
    if d >= d_th {
        0.0
    } else {
        1.0 - d / d_th
    }
}

fn check_thresholds(d_th: f64, c_t: f64) -> Result<()> {
    if !(d_th.is_finite() && d_th > 0.0) {
        return Err(Error::InvalidInput(format!(
            "distance threshold must be positive, got {d_th}"
        )));
    }
    if !c_t.is_finite() {
        return Err(Error::InvalidInput("confidence threshold must be finite".into()));
    }
    Ok(())
}

/// Grid-indexed confidence field. Contributions are summed in ascending
/// grasp order, matching [`confidence_field_brute_force`] exactly.
pub fn confidence_field(cloud: &PointCloud, positives: &[Grasp], d_th: f64, c_t: f64) -> Result<ConfidenceField> {
    check_thresholds(d_th, c_t)?;
    let centers: Vec<Vec3> = positives.iter().map(Grasp::center).collect();
    let grid = UniformGrid::new(&centers, d_th);
    let values = cloud
        .points()
        .par_iter()
        .map(|p| {
            grid.neighbourhood(p)
                .into_iter()
                .map(|i| kernel(p, &centers[i], d_th))
                .sum()
        })
        .collect();
    Ok(ConfidenceField::from_values(values, c_t, d_th))
}

/// O(N·|G|) reference evaluation.
pub fn confidence_field_brute_force(
    cloud: &PointCloud,
    positives: &[Grasp],
    d_th: f64,
    c_t: f64,
) -> Result<ConfidenceField> {
    check_thresholds(d_th, c_t)?;
    let values = cloud
        .points()
        .iter()
        .map(|p| positives.iter().map(|g| kernel(p, &g.center(), d_th)).sum())
        .collect();
    Ok(ConfidenceField::from_values(values, c_t, d_th))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnLoss {
    pub value: f64,
    /// Points whose true-class probability was clamped.
    pub clamped: usize,
}

/// Mean cross-entropy over points; `predicted[i]` is `[neg, pos]`.
pub fn sn_loss(predicted: &[[f64; 2]], labels: &[bool]) -> Result<SnLoss> {
    if predicted.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} predictions for {} labels",
            predicted.len(),
            labels.len()
        )));
    }
    if predicted.is_empty() {
        return Err(Error::InvalidInput("no points".into()));
    }
    if let Some(i) = predicted.iter().position(|p| !is_distribution(p, 1e-6)) {
        return Err(Error::InvalidInput(format!("prediction {i} is not a probability pair")));
    }
    let mut total = 0.0;
    let mut clamped = 0;
    for (p, &pos) in predicted.iter().zip(labels) {
        let (ce, c) = cross_entropy(p, if pos { POSITIVE } else { NEGATIVE });
        total += ce;
        clamped += c as usize;
    }
    Ok(SnLoss {
        value: total / predicted.len() as f64,
        clamped,
    })
}

/// Indices where the positive score strictly exceeds the negative one.
pub fn segment_positive(scores: &[[f64; 2]]) -> Vec<usize> {
    scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s[POSITIVE] > s[NEGATIVE])
        .map(|(i, _)| i)
        .collect()
}
