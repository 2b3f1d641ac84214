//! Surface normals from local k-NN covariance.

use nalgebra::{Matrix3, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{PointCloud, Vec3, WORLD_UP};
use crate::spatial::KdTree;

pub const DEFAULT_NEIGHBOURS: usize = 30;

/// Rank test threshold on the middle covariance eigenvalue.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct NormalEstimate {
    pub cloud: PointCloud,
    /// Points whose neighbourhood had rank < 2; their normal is the
    /// direction toward the viewpoint.
    pub degenerate: Vec<bool>,
}

impl NormalEstimate {
    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|&&d| d).count()
    }
}

/// Estimates a unit normal per point as the least-variance direction of its
/// `k` nearest neighbours (the point included), oriented so that
/// `n · (viewpoint − p) ≥ 0`.
pub fn estimate_normals(cloud: &PointCloud, k: usize, viewpoint: &Vec3) -> Result<NormalEstimate> {
    let k = k.max(3);
    if cloud.len() < k {
        return Err(Error::InsufficientPoints {
            needed: k,
            got: cloud.len(),
        });
    }
    let tree = KdTree::new(cloud.points());
    let results: Vec<(Vec3, bool)> = cloud
        .points()
        .par_iter()
        .map(|p| {
            let nb = tree.nearest(p, k);
            let mean = nb.iter().map(|&(i, _)| cloud.point(i)).sum::<Vec3>() / nb.len() as f64;
            let mut cov = Matrix3::zeros();
            for &(i, _) in &nb {
                let d = cloud.point(i) - mean;
                cov += d * d.transpose();
            }
            cov /= nb.len() as f64;
            let toward = viewpoint - p;
            let fallback = if toward.norm() > 0.0 {
                toward.normalize()
            } else {
                WORLD_UP
            };

            let eig = SymmetricEigen::new(cov);
            let mut order = [0usize, 1, 2];
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let largest = eig.eigenvalues[order[2]];
            let middle = eig.eigenvalues[order[1]];
            if largest.is_nan() || largest <= 0.0 || middle <= RANK_TOL * largest {
                return (fallback, true);
            }
            let mut n: Vec3 = eig.eigenvectors.column(order[0]).into_owned().normalize();
            if n.dot(&toward) < 0.0 {
                n = -n;
            }
            (n, false)
        })
        .collect();

    let (normals, degenerate): (Vec<Vec3>, Vec<bool>) = results.into_iter().unzip();
    let out = cloud.clone().with_normals(normals)?;
    Ok(NormalEstimate { cloud: out, degenerate })
}
