//! Binary grasp quality: force-closure (antipodal) test, point-based
//! collision test, and their minimum.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{angle_between, Grasp, GraspScores, GripperModel, PointCloud, Vec3, WORLD_UP};

pub const DEFAULT_MU: f64 = 0.6;
pub const DEFAULT_CONTACT_TOL: f64 = 0.005;

/// Two finger contacts with surface normals and force directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactPair {
    pub ci: Vec3,
    pub cj: Vec3,
    pub ni: Vec3,
    pub nj: Vec3,
    pub fi: Vec3,
    pub fj: Vec3,
}

/// Contact-normal angle folded into `[0, π/2]`, so either normal sign works.
pub fn contact_angle(normal: &Vec3, force: &Vec3) -> f64 {
    let a = angle_between(normal, force);
    a.min(std::f64::consts::PI - a)
}

/// Force-closure test: both contact angles within the friction cone
/// half-angle `arctan μ`.
pub fn antipodal_score(contacts: &ContactPair, mu: f64) -> bool {
    let beta = mu.atan();
    contact_angle(&contacts.ni, &contacts.fi) <= beta && contact_angle(&contacts.nj, &contacts.fj) <= beta
}

/// Grasp scorer bound to a gripper, friction coefficient and world up axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scorer {
    pub gripper: GripperModel,
    pub mu: f64,
    /// Normals of object points within this distance of a contact are
    /// averaged into the contact normal.
    pub contact_tol: f64,
    pub up: Vec3,
}

impl Scorer {
    pub fn new(gripper: GripperModel, mu: f64) -> Self {
        Scorer {
            gripper,
            mu,
            contact_tol: DEFAULT_CONTACT_TOL,
            up: WORLD_UP,
        }
    }

    /// Closes both jaws along `Y_G` over the closing area. The `+Y` finger
    /// stops at the point with the largest `y`, the `−Y` finger at the
    /// smallest. Returns `None` when there is nothing between the fingers.
    pub fn find_contacts(&self, object: &PointCloud, g: &Grasp) -> Result<Option<ContactPair>> {
        let normals = object.normals().ok_or(Error::NormalsRequired)?;
        let frame = g.frame(&self.up);
        let area = self.gripper.closing_box();

        let inside: Vec<(usize, Vec3)> = object
            .points()
            .iter()
            .enumerate()
            .filter_map(|(i, p)| {
                let q = frame.to_local(p);
                area.contains(&q).then_some((i, q))
            })
            .collect();
        // Among points at the same depth the one nearest the closing line wins.
        let lateral = |q: &Vec3| q.x * q.x + q.z * q.z;
        let Some(&(hi, _)) = inside.iter().max_by(|a, b| {
            a.1.y
                .total_cmp(&b.1.y)
                .then(lateral(&b.1).total_cmp(&lateral(&a.1)))
                .then(b.0.cmp(&a.0))
        }) else {
            return Ok(None);
        };
        let &(lo, _) = inside
            .iter()
            .min_by(|a, b| {
                a.1.y
                    .total_cmp(&b.1.y)
                    .then(lateral(&a.1).total_cmp(&lateral(&b.1)))
                    .then(a.0.cmp(&b.0))
            })
            .unwrap();
        if hi == lo {
            return Ok(None);
        }
        let ci = *object.point(hi);
        let cj = *object.point(lo);
        if ci == cj {
            return Ok(None);
        }

        let smooth = |c: &Vec3, reference: &Vec3| {
            let mut sum = Vec3::zeros();
            for &(i, _) in &inside {
                if (object.point(i) - c).norm() <= self.contact_tol {
                    let n = normals[i];
                    sum += if n.dot(reference) < 0.0 { -n } else { n };
                }
            }
            if sum.norm() > 1e-12 {
                sum.normalize()
            } else {
                *reference
            }
        };
        Ok(Some(ContactPair {
            ni: smooth(&ci, &normals[hi]),
            nj: smooth(&cj, &normals[lo]),
            ci,
            cj,
            fi: -frame.y,
            fj: frame.y,
        }))
    }

    /// `true` when no object point lies strictly inside a finger or the base.
    pub fn collision_free(&self, object: &PointCloud, g: &Grasp) -> bool {
        let frame = g.frame(&self.up);
        let solids = self.gripper.solid_boxes();
        !object.points().iter().any(|p| {
            let q = frame.to_local(p);
            solids.iter().any(|b| b.contains_strict(&q))
        })
    }

    pub fn antipodal(&self, object: &PointCloud, g: &Grasp) -> Result<bool> {
        Ok(self
            .find_contacts(object, g)?
            .is_some_and(|c| antipodal_score(&c, self.mu)))
    }

    pub fn scores(&self, object: &PointCloud, g: &Grasp) -> Result<GraspScores> {
        Ok(GraspScores {
            antipodal: self.antipodal(object, g)?,
            collision_free: self.collision_free(object, g),
        })
    }

    pub fn score_grasp(&self, object: &PointCloud, g: &Grasp) -> Result<Grasp> {
        Ok(g.with_scores(self.scores(object, g)?))
    }

    pub fn score_batch(&self, object: &PointCloud, grasps: &[Grasp]) -> Result<Vec<Grasp>> {
        grasps.par_iter().map(|g| self.score_grasp(object, g)).collect()
    }
}
