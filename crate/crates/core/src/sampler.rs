//! Antipodal grasp candidate sampling, positive-set construction and
//! single-view cloud synthesis.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geom::{Grasp, PointCloud, Vec3};
use crate::quality::Scorer;
use crate::rng::{derive_seed, seeded};

/// Attempts allowed per requested grasp.
pub const ATTEMPTS_PER_GRASP: usize = 100;

const BATCH: usize = 256;

/// Unit vector in the cone of half-angle `half_angle` around unit `axis`,
/// uniform over the cap's solid angle.
fn sample_in_cone(rng: &mut impl Rng, axis: &Vec3, half_angle: f64) -> Vec3 {
    let cos_max = libm::cos(half_angle);
    let cos_t: f64 = rng.random_range(cos_max..=1.0);
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let psi: f64 = rng.random_range(0.0..2.0 * PI);
    let helper = if axis.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = axis.cross(&helper).normalize();
    let v = axis.cross(&u);
    (axis * cos_t + u * (sin_t * libm::cos(psi)) + v * (sin_t * libm::sin(psi))).normalize()
}

/// One sampling attempt with its own counter-derived random stream.
///
/// Picks a surface point, draws a closing direction inside the inward
/// friction cone, and looks for the far surface along that line: the object
/// point within `contact_tol` of the line with the largest forward
/// parameter. The opposite contact is that point's projection on the line.
fn attempt(object: &PointCloud, normals: &[Vec3], scorer: &Scorer, seed: u64, index: u64) -> Option<Grasp> {
    let mut rng = seeded(derive_seed(seed, &[index]));
    let i = rng.random_range(0..object.len());
    let ci = *object.point(i);
    let dir = sample_in_cone(&mut rng, &(-normals[i]), scorer.mu.atan());
    let angle = rng.random_range(-FRAC_PI_2..=FRAC_PI_2);

    let tol = scorer.contact_tol;
    let mut best: Option<f64> = None;
    for p in object.points() {
        let d = p - ci;
        let t = d.dot(&dir);
        if t <= tol {
            continue;
        }
        if (d - dir * t).norm_squared() <= tol * tol && best.is_none_or(|b| t > b) {
            best = Some(t);
        }
    }
    let width = best?;
    if width > scorer.gripper.max_opening {
        return None;
    }
    Grasp::new(ci + dir * (width / 2.0), dir, angle).ok()
}

fn check_inputs(object: &PointCloud) -> Result<&[Vec3]> {
    let normals = object.normals().ok_or(Error::NormalsRequired)?;
    if object.is_empty() {
        return Err(Error::InvalidCloud("object cloud is empty".into()));
    }
    Ok(normals)
}

/// Runs attempts `0..budget` in parallel batches, feeding results in attempt
/// order to `accept` until it returns `false`. Returns attempts consumed.
fn run_attempts(
    object: &PointCloud,
    normals: &[Vec3],
    scorer: &Scorer,
    seed: u64,
    budget: usize,
    mut accept: impl FnMut(Grasp) -> Result<bool>,
) -> Result<usize> {
    let mut start = 0;
    while start < budget {
        let end = (start + BATCH).min(budget);
        let batch: Vec<Option<Grasp>> = (start..end)
            .into_par_iter()
            .map(|a| attempt(object, normals, scorer, seed, a as u64))
            .collect();
        for (offset, g) in batch.into_iter().enumerate() {
            if let Some(g) = g {
                if !accept(g)? {
                    return Ok(start + offset + 1);
                }
            }
        }
        start = end;
    }
    Ok(budget)
}

/// Up to `count` antipodal candidates; deterministic for a given seed.
pub fn sample_candidates(object: &PointCloud, scorer: &Scorer, count: usize, seed: u64) -> Result<Vec<Grasp>> {
    let normals = check_inputs(object)?;
    if count == 0 {
        return Err(Error::InvalidInput("candidate count must be positive".into()));
    }
    let mut out = Vec::with_capacity(count);
    run_attempts(object, normals, scorer, seed, ATTEMPTS_PER_GRASP * count, |g| {
        out.push(g);
        Ok(out.len() < count)
    })?;
    if out.is_empty() {
        return Err(Error::NotGraspable);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PositiveSet {
    /// Scored grasps, all with overall score 1.
    pub grasps: Vec<Grasp>,
    pub attempts: usize,
    pub candidates: usize,
    /// How many positives are missing from the requested count.
    pub shortfall: usize,
}

/// Samples and scores candidates, keeping the first `per_object` with
/// overall score 1.
pub fn build_positive_set(object: &PointCloud, scorer: &Scorer, per_object: usize, seed: u64) -> Result<PositiveSet> {
    let normals = check_inputs(object)?;
    if per_object == 0 {
        return Ok(PositiveSet {
            grasps: Vec::new(),
            attempts: 0,
            candidates: 0,
            shortfall: 0,
        });
    }
    let mut grasps = Vec::with_capacity(per_object);
    let mut candidates = 0;
    let attempts = run_attempts(object, normals, scorer, seed, ATTEMPTS_PER_GRASP * per_object, |g| {
        candidates += 1;
        let scored = scorer.score_grasp(object, &g)?;
        if scored.scores().is_some_and(|s| s.overall()) {
            grasps.push(scored);
        }
        Ok(grasps.len() < per_object)
    })?;
    let shortfall = per_object - grasps.len();
    Ok(PositiveSet {
        grasps,
        attempts,
        candidates,
        shortfall,
    })
}

/// Orthographic camera for view synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewSpec {
    pub eye: Vec3,
    pub target: Vec3,
    /// Side of a z-buffer cell (m).
    pub grid_spacing: f64,
    /// Points within this depth of their cell's nearest point stay visible.
    pub depth_tol: f64,
}

impl ViewSpec {
    pub fn looking_at(eye: Vec3, target: Vec3, grid_spacing: f64) -> Self {
        ViewSpec {
            eye,
            target,
            grid_spacing,
            depth_tol: grid_spacing,
        }
    }
}

/// Indices (ascending) of points that survive z-buffer culling.
pub fn visible_indices(object: &PointCloud, view: &ViewSpec) -> Vec<usize> {
    let forward = (view.target - view.eye).normalize();
    let helper = if forward.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
    let u = forward.cross(&helper).normalize();
    let v = forward.cross(&u);
    let s = view.grid_spacing;

    let cells: Vec<Option<([i64; 2], f64)>> = object
        .points()
        .iter()
        .map(|p| {
            let d = p - view.eye;
            let depth = d.dot(&forward);
            (depth > 0.0).then(|| ([(d.dot(&u) / s).floor() as i64, (d.dot(&v) / s).floor() as i64], depth))
        })
        .collect();
    let mut nearest: HashMap<[i64; 2], f64> = HashMap::new();
    for (key, depth) in cells.iter().flatten() {
        nearest.entry(*key).and_modify(|z| *z = z.min(*depth)).or_insert(*depth);
    }
    cells
        .iter()
        .enumerate()
        .filter_map(|(i, c)| {
            let (key, depth) = (*c)?;
            (depth <= nearest[&key] + view.depth_tol).then_some(i)
        })
        .collect()
}

/// Subset of `object` visible from the camera, in the input frame.
pub fn render_single_view(object: &PointCloud, view: &ViewSpec) -> PointCloud {
    object.select(&visible_indices(object, view))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::GripperModel;
    use crate::quality::DEFAULT_MU;
    use crate::synth;

    fn scorer() -> Scorer {
        Scorer::new(GripperModel::default(), DEFAULT_MU)
    }

    #[test]
    fn thin_box_candidates_fit_the_gripper() {
        let object = synth::box_cloud(Vec3::new(0.03, 0.1, 0.1), 0.003);
        let s = scorer();
        let grasps = sample_candidates(&object, &s, 200, 7).unwrap();
        assert_eq!(grasps.len(), 200);
        let normals = object.normals().unwrap();
        for g in &grasps {
            let r = g.orientation();
            assert!(g.angle().abs() <= FRAC_PI_2);
            // c_i is an object point on the closing line behind the center.
            let (ci, n) = object
                .points()
                .iter()
                .zip(normals)
                .find(|(p, _)| {
                    let d = *p - g.center();
                    d.dot(&r) < 0.0 && (d - r * d.dot(&r)).norm() < 1e-9
                })
                .expect("sampled contact lies on the closing line");
            let width = 2.0 * (g.center() - ci).norm();
            assert!(width <= s.gripper.max_opening + 1e-12);
            assert!(crate::geom::angle_between(&-n, &r) <= s.mu.atan() + 1e-9);
        }
    }

    #[test]
    fn contact_distance_bounded_by_opening() {
        let object = synth::box_cloud(Vec3::new(0.03, 0.1, 0.1), 0.003);
        let s = scorer();
        let normals = object.normals().unwrap();
        for a in 0..2000u64 {
            if let Some(g) = attempt(&object, normals, &s, 11, a) {
                // Recompute the far-contact width along the sampled line.
                let r = g.orientation();
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for p in object.points() {
                    let d = p - g.center();
                    let t = d.dot(&r);
                    if (d - r * t).norm() <= s.contact_tol {
                        lo = lo.min(t);
                        hi = hi.max(t);
                    }
                }
                assert!(hi - lo <= s.gripper.max_opening + 2.0 * s.contact_tol);
            }
        }
    }

    #[test]
    fn large_sphere_is_not_graspable() {
        let object = synth::sphere_cloud(0.1, 3000);
        let err = sample_candidates(&object, &scorer(), 5, 1).unwrap_err();
        assert!(matches!(err, Error::NotGraspable));
    }

    #[test]
    fn sampling_is_deterministic() {
        let object = synth::box_cloud(Vec3::new(0.03, 0.06, 0.06), 0.003);
        let a = sample_candidates(&object, &scorer(), 50, 99).unwrap();
        let b = sample_candidates(&object, &scorer(), 50, 99).unwrap();
        assert_eq!(a, b);
        let c = sample_candidates(&object, &scorer(), 50, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn positive_set_rescores_to_one() {
        let object = synth::box_cloud(Vec3::new(0.04, 0.05, 0.05), 0.0025);
        let s = scorer();
        let set = build_positive_set(&object, &s, 50, 3).unwrap();
        assert_eq!(set.grasps.len(), 50);
        assert_eq!(set.shortfall, 0);
        for g in &set.grasps {
            assert!(s.score_grasp(&object, g).unwrap().scores().unwrap().overall());
        }
        assert!(build_positive_set(&object, &s, 0, 3).unwrap().grasps.is_empty());
    }

    #[test]
    fn nearer_point_on_same_ray_wins() {
        let cloud = PointCloud::new(vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, -0.5)]).unwrap();
        let view = ViewSpec::looking_at(Vec3::new(0.0, 0.0, 1.0), Vec3::zeros(), 0.01);
        assert_eq!(visible_indices(&cloud, &view), vec![0]);
    }

    #[test]
    fn plane_facing_camera_is_fully_visible() {
        let mut pts = Vec::new();
        for i in 0..30 {
            for j in 0..30 {
                pts.push(Vec3::new(i as f64 * 0.003, j as f64 * 0.003, 0.0));
            }
        }
        let cloud = PointCloud::new(pts).unwrap();
        let view = ViewSpec::looking_at(Vec3::new(0.0, 0.0, 1.0), Vec3::zeros(), 0.005);
        assert_eq!(render_single_view(&cloud, &view).len(), 900);
    }

    #[test]
    fn sphere_view_keeps_about_half() {
        let object = synth::sphere_cloud(0.1, 20000);
        let view = ViewSpec::looking_at(Vec3::new(0.5, 0.2, 0.3), Vec3::zeros(), 0.005);
        let idx = visible_indices(&object, &view);
        let frac = idx.len() as f64 / object.len() as f64;
        assert!((0.3..=0.6).contains(&frac), "visible fraction {frac}");
        // Hemisphere oracle: survivors face the camera (up to the cell slack).
        let eye_dir = view.eye.normalize();
        let facing = object.points().iter().filter(|p| p.dot(&eye_dir) >= 0.0).count();
        assert!(idx.len() <= facing + facing / 10);
        let back = idx.iter().filter(|&&i| object.point(i).dot(&eye_dir) < -0.03).count();
        assert_eq!(back, 0);
    }
}
