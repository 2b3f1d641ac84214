//! Regression-point selection by farthest point sampling and fixed-size
//! grasp regions by ball query.

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use crate::confidence::segment_positive;
use crate::error::{Error, Result};
use crate::geom::{GripperModel, PointCloud};
use crate::rng::{derive_seed, seeded};

pub const DEFAULT_REGION_COUNT: usize = 64;
pub const DEFAULT_REGION_SIZE: usize = 256;

/// Default ball-query radius: half the largest gripper extent.
pub fn default_radius(gripper: &GripperModel) -> f64 {
    gripper.scale() / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraspRegion {
    pub center_index: usize,
    /// Exactly `G` indices; repeats appear when the ball holds fewer points.
    pub member_indices: Vec<usize>,
    pub radius: f64,
}

/// Greedy farthest point sampling over `subset`.
///
/// Starts from a seeded-random subset element, then repeatedly takes the
/// point maximizing the distance to the chosen set; ties go to the lowest
/// cloud index. When `k ≥ |subset|` the whole subset is returned, in greedy
/// order, so that every output is a prefix of a longer run.
pub fn fps(cloud: &PointCloud, subset: &[usize], k: usize, seed: u64) -> Result<Vec<usize>> {
    if subset.is_empty() {
        return Err(Error::NoPositivePoints);
    }
    if k == 0 {
        return Err(Error::InvalidInput("fps needs k >= 1".into()));
    }
    let k = k.min(subset.len());
    let mut rng = seeded(seed);
    let first = rng.random_range(0..subset.len());

    let mut chosen = Vec::with_capacity(k);
    let mut taken = vec![false; subset.len()];
    let mut min_d2 = vec![f64::INFINITY; subset.len()];
    let mut current = first;
    loop {
        taken[current] = true;
        chosen.push(subset[current]);
        if chosen.len() == k {
            break;
        }
        let c = cloud.point(subset[current]);
        let mut best: Option<usize> = None;
        for j in 0..subset.len() {
            if taken[j] {
                continue;
            }
            let d2 = (cloud.point(subset[j]) - c).norm_squared();
            if d2 < min_d2[j] {
                min_d2[j] = d2;
            }
            best = match best {
                None => Some(j),
                Some(b) => {
                    let better = min_d2[j] > min_d2[b] || (min_d2[j] == min_d2[b] && subset[j] < subset[b]);
                    Some(if better { j } else { b })
                }
            };
        }
        current = best.expect("k <= |subset| leaves a candidate");
    }
    Ok(chosen)
}

/// Fixed-size neighbourhood of radius `radius` around `center_index`.
///
/// With more than `size` points in the ball, the center plus `size − 1`
/// others drawn without replacement are kept; with fewer, the ball is padded
/// by drawing from it with replacement.
pub fn ball_query(cloud: &PointCloud, center_index: usize, radius: f64, size: usize, seed: u64) -> Result<GraspRegion> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "ball radius must be positive, got {radius}"
        )));
    }
    if size == 0 {
        return Err(Error::InvalidInput("region size must be >= 1".into()));
    }
    if center_index >= cloud.len() {
        return Err(Error::InvalidInput(format!("center index {center_index} out of range")));
    }
    let c = cloud.point(center_index);
    let r2 = radius * radius;
    let others: Vec<usize> = (0..cloud.len())
        .filter(|&i| i != center_index && (cloud.point(i) - c).norm_squared() <= r2)
        .collect();

    let mut rng = seeded(seed);
    let mut members = Vec::with_capacity(size);
    members.push(center_index);
    if others.len() + 1 >= size {
        members.extend(
            index::sample(&mut rng, others.len(), size - 1)
                .into_iter()
                .map(|j| others[j]),
        );
    } else {
        members.extend_from_slice(&others);
        let found = members.len();
        while members.len() < size {
            let j = rng.random_range(0..found);
            members.push(members[j]);
        }
    }
    Ok(GraspRegion {
        center_index,
        member_indices: members,
        radius,
    })
}

/// Positive points → `k1` FPS centers → one ball query per center.
///
/// `scores[i]` is `[neg, pos]`; ground-truth one-hot fields and predicted
/// probabilities go through the same path.
pub fn extract_regions(
    cloud: &PointCloud,
    scores: &[[f64; 2]],
    k1: usize,
    radius: f64,
    size: usize,
    seed: u64,
) -> Result<Vec<GraspRegion>> {
    if scores.len() != cloud.len() {
        return Err(Error::InvalidInput(format!(
            "{} scores for {} points",
            scores.len(),
            cloud.len()
        )));
    }
    let positives = segment_positive(scores);
    let centers = fps(cloud, &positives, k1, derive_seed(seed, &[0]))?;
    centers
        .par_iter()
        .map(|&c| ball_query(cloud, c, radius, size, derive_seed(seed, &[1, c as u64])))
        .collect()
}
