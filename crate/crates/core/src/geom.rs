//! Point clouds, grasps, gripper geometry and the canonical grasp frame.
//!
//! A grasp `(p, r, θ)` places the gripper with its jaw-closing line along
//! `r` through `p`. The frame attached to it has `Y_G` along `r`, `X_G` is
//! the horizontal direction `X' = normalize(up × Y_G)` rotated about `Y_G`
//! by `θ` (right-hand rule), and `Z_G = X_G × Y_G`.
//!
//! Gripper layout in the grasp frame (looking down `Z_G`):
//!
//! ```text
//!            +Y_G
//!   base   ┌─────────────┐  finger (+Y)
//!  ┌────┐  └─────────────┘
//!  │    │   closing area      ──► +X_G (approach)
//!  └────┘  ┌─────────────┐
//!          └─────────────┘  finger (−Y)
//!            −Y_G
//! ```
//!
//! Fingers span `x ∈ [−L/2, L/2]`, the base sits behind them at
//! `x ∈ [−L/2 − base_depth, −L/2]`, and the grasp center is the middle of the
//! closing area.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{Isometry3, Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// World up direction used when none is configured.
pub const WORLD_UP: Vec3 = Vector3::new(0.0, 0.0, 1.0);

const UNIT_TOL: f64 = 1e-6;
const PARALLEL_TOL: f64 = 1e-6;

/// Coordinate frame a cloud is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameTag {
    #[default]
    World,
    Object,
    Grasp,
}

/// Ordered 3D points with optional per-point colors and unit normals.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Vec3>,
    colors: Option<Vec<[f32; 3]>>,
    normals: Option<Vec<Vec3>>,
    frame: FrameTag,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        if let Some(i) = points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidCloud(format!("point {i} is not finite")));
        }
        Ok(PointCloud {
            points,
            colors: None,
            normals: None,
            frame: FrameTag::World,
        })
    }

    pub fn with_normals(mut self, normals: Vec<Vec3>) -> Result<Self> {
        if normals.len() != self.points.len() {
            return Err(Error::InvalidCloud(format!(
                "{} normals for {} points",
                normals.len(),
                self.points.len()
            )));
        }
        if let Some(i) = normals
            .iter()
            .position(|n| !n.iter().all(|c| c.is_finite()) || (n.norm() - 1.0).abs() > UNIT_TOL)
        {
            return Err(Error::InvalidCloud(format!("normal {i} is not unit length")));
        }
        self.normals = Some(normals);
        Ok(self)
    }

    pub fn with_colors(mut self, colors: Vec<[f32; 3]>) -> Result<Self> {
        if colors.len() != self.points.len() {
            return Err(Error::InvalidCloud(format!(
                "{} colors for {} points",
                colors.len(),
                self.points.len()
            )));
        }
        if let Some(i) = colors.iter().position(|c| c.iter().any(|v| !(0.0..=1.0).contains(v))) {
            return Err(Error::InvalidCloud(format!("color {i} outside [0, 1]")));
        }
        self.colors = Some(colors);
        Ok(self)
    }

    pub fn with_frame(mut self, frame: FrameTag) -> Self {
        self.frame = frame;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &Vec3 {
        &self.points[i]
    }

    pub fn normals(&self) -> Option<&[Vec3]> {
        self.normals.as_deref()
    }

    pub fn colors(&self) -> Option<&[[f32; 3]]> {
        self.colors.as_deref()
    }

    pub fn frame(&self) -> FrameTag {
        self.frame
    }

    /// Cloud made of the given indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i]).collect(),
            colors: self.colors.as_ref().map(|c| indices.iter().map(|&i| c[i]).collect()),
            normals: self.normals.as_ref().map(|n| indices.iter().map(|&i| n[i]).collect()),
            frame: self.frame,
        }
    }

    /// Applies a rigid transform to points and normals.
    pub fn transformed(&self, iso: &Isometry3<f64>) -> PointCloud {
        PointCloud {
            points: self
                .points
                .iter()
                .map(|p| iso.transform_point(&(*p).into()).coords)
                .collect(),
            colors: self.colors.clone(),
            normals: self
                .normals
                .as_ref()
                .map(|n| n.iter().map(|v| iso.rotation * v).collect()),
            frame: self.frame,
        }
    }

    pub fn centroid(&self) -> Option<Vec3> {
        if self.points.is_empty() {
            return None;
        }
        let sum: Vec3 = self.points.iter().sum();
        Some(sum / self.points.len() as f64)
    }

    /// Rounds coordinates and normals to `f32` precision, as stored by the
    /// binary cloud format.
    pub fn quantized_f32(&self) -> PointCloud {
        let q = |v: &Vec3| v.map(|c| c as f32 as f64);
        PointCloud {
            points: self.points.iter().map(q).collect(),
            colors: self.colors.clone(),
            normals: self.normals.as_ref().map(|n| n.iter().map(q).collect()),
            frame: self.frame,
        }
    }
}

/// Binary grasp quality scores. The overall score is the minimum of the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GraspScores {
    pub antipodal: bool,
    pub collision_free: bool,
}

impl GraspScores {
    pub fn overall(&self) -> bool {
        self.antipodal && self.collision_free
    }
}

/// Parallel-jaw grasp: center, unit closing direction and approach angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grasp {
    center: Vec3,
    orientation: Vec3,
    angle: f64,
    scores: Option<GraspScores>,
}

impl Grasp {
    /// Builds a grasp, normalizing `orientation`. The angle must lie in
    /// `[−π/2, π/2]`.
    pub fn new(center: Vec3, orientation: Vec3, angle: f64) -> Result<Self> {
        if !center.iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidGrasp("center is not finite".into()));
        }
        let norm = orientation.norm();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::InvalidGrasp("orientation has zero length".into()));
        }
        if !(-FRAC_PI_2..=FRAC_PI_2).contains(&angle) {
            return Err(Error::InvalidGrasp(format!("angle {angle} outside [-pi/2, pi/2]")));
        }
        Ok(Grasp {
            center,
            // Already-unit input is kept bit-exact so stored grasps re-read identically.
            orientation: if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
                orientation
            } else {
                orientation / norm
            },
            angle,
            scores: None,
        })
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn orientation(&self) -> Vec3 {
        self.orientation
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn scores(&self) -> Option<GraspScores> {
        self.scores
    }

    pub fn with_scores(mut self, scores: GraspScores) -> Self {
        self.scores = Some(scores);
        self
    }

    pub fn without_scores(mut self) -> Self {
        self.scores = None;
        self
    }

    pub fn frame(&self, up: &Vec3) -> GraspFrame {
        grasp_frame(self, up)
    }

    /// Recovers the grasp whose frame is `frame`.
    ///
    /// A frame whose `X_G` lies more than π/2 away from `X'` is represented by
    /// the jaw-swapped grasp `(p, −r, π − θ)`, which describes the same
    /// physical gripper pose with the angle back in range.
    pub fn from_frame(frame: &GraspFrame, up: &Vec3) -> Grasp {
        let angle_about = |y: &Vec3| {
            let xp = horizontal_axis(y, up);
            let yx = y.cross(&xp);
            frame.x.dot(&yx).atan2(frame.x.dot(&xp))
        };
        let mut y = frame.y;
        let mut angle = angle_about(&y);
        if angle.abs() > FRAC_PI_2 {
            y = -y;
            angle = angle_about(&y);
        }
        Grasp {
            center: frame.origin,
            orientation: y,
            angle: angle.clamp(-FRAC_PI_2, FRAC_PI_2),
            scores: None,
        }
    }

    /// Applies a rigid transform to the physical gripper pose. Scores are kept.
    pub fn transformed(&self, iso: &Isometry3<f64>, up: &Vec3) -> Grasp {
        let f = self.frame(up);
        let moved = GraspFrame {
            origin: iso.transform_point(&f.origin.into()).coords,
            x: iso.rotation * f.x,
            y: iso.rotation * f.y,
            z: iso.rotation * f.z,
        };
        let mut g = Grasp::from_frame(&moved, up);
        g.scores = self.scores;
        g
    }
}

/// Parallel-jaw gripper dimensions in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GripperModel {
    /// Finger extent along the approach axis `X_G`.
    pub finger_length: f64,
    /// Finger extent along the closing axis `Y_G`.
    pub finger_thickness: f64,
    /// Finger extent along `Z_G`.
    pub finger_height: f64,
    /// Jaw travel: inner distance between fully open fingers.
    pub max_opening: f64,
    /// Palm depth behind the fingers along `−X_G`.
    pub base_depth: f64,
}

impl Default for GripperModel {
    fn default() -> Self {
        GripperModel {
            finger_length: 0.06,
            finger_thickness: 0.01,
            finger_height: 0.02,
            max_opening: 0.08,
            base_depth: 0.02,
        }
    }
}

/// Axis-aligned box in grasp-frame coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalBox {
    pub center: Vec3,
    pub half_extents: Vec3,
}

impl LocalBox {
    pub fn contains(&self, p: &Vec3) -> bool {
        let d = p - self.center;
        (0..3).all(|i| d[i].abs() <= self.half_extents[i])
    }

    pub fn contains_strict(&self, p: &Vec3) -> bool {
        let d = p - self.center;
        (0..3).all(|i| d[i].abs() < self.half_extents[i])
    }
}

impl GripperModel {
    pub fn validate(&self) -> Result<()> {
        let dims = [
            ("finger_length", self.finger_length),
            ("finger_thickness", self.finger_thickness),
            ("finger_height", self.finger_height),
            ("max_opening", self.max_opening),
            ("base_depth", self.base_depth),
        ];
        for (name, v) in dims {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidGripper(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Overall extents `(length, width, height)` along `X_G`, `Y_G`, `Z_G`.
    pub fn extents(&self) -> Vec3 {
        Vec3::new(
            self.finger_length + self.base_depth,
            self.max_opening + 2.0 * self.finger_thickness,
            self.finger_height,
        )
    }

    /// Scale `S`: the largest overall gripper extent.
    pub fn scale(&self) -> f64 {
        self.extents().max()
    }

    /// Region between the open fingers.
    pub fn closing_box(&self) -> LocalBox {
        LocalBox {
            center: Vec3::zeros(),
            half_extents: Vec3::new(
                self.finger_length / 2.0,
                self.max_opening / 2.0,
                self.finger_height / 2.0,
            ),
        }
    }

    /// The two finger solids followed by the base solid.
    pub fn solid_boxes(&self) -> [LocalBox; 3] {
        let finger_y = self.max_opening / 2.0 + self.finger_thickness / 2.0;
        let finger_half = Vec3::new(
            self.finger_length / 2.0,
            self.finger_thickness / 2.0,
            self.finger_height / 2.0,
        );
        let base = LocalBox {
            center: Vec3::new(-(self.finger_length + self.base_depth) / 2.0, 0.0, 0.0),
            half_extents: Vec3::new(
                self.base_depth / 2.0,
                self.max_opening / 2.0 + self.finger_thickness,
                self.finger_height / 2.0,
            ),
        };
        [
            LocalBox {
                center: Vec3::new(0.0, finger_y, 0.0),
                half_extents: finger_half,
            },
            LocalBox {
                center: Vec3::new(0.0, -finger_y, 0.0),
                half_extents: finger_half,
            },
            base,
        ]
    }
}

/// Orthonormal right-handed frame attached to a grasp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspFrame {
    pub origin: Vec3,
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

impl GraspFrame {
    pub fn identity() -> Self {
        GraspFrame {
            origin: Vec3::zeros(),
            x: Vec3::x(),
            y: Vec3::y(),
            z: Vec3::z(),
        }
    }

    /// Rotation whose columns are the frame axes.
    pub fn rotation(&self) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.x, self.y, self.z])
    }

    pub fn to_local(&self, p: &Vec3) -> Vec3 {
        let d = p - self.origin;
        Vec3::new(d.dot(&self.x), d.dot(&self.y), d.dot(&self.z))
    }

    pub fn to_world(&self, q: &Vec3) -> Vec3 {
        self.origin + self.x * q.x + self.y * q.y + self.z * q.z
    }

    /// Largest deviation from orthonormality and right-handedness.
    pub fn orthonormality_error(&self) -> f64 {
        let r = self.rotation();
        let gram = (r.transpose() * r - Matrix3::identity()).abs().max();
        let hand = (self.x.cross(&self.y) - self.z).abs().max();
        gram.max(hand).max((r.determinant() - 1.0).abs())
    }
}

/// `normalize(up × y)`, falling back to `up × e₁` (then `up × e₂`) when `y`
/// is parallel to `up`.
pub(crate) fn horizontal_axis(y: &Vec3, up: &Vec3) -> Vec3 {
    let c = up.cross(y);
    if c.norm() >= PARALLEL_TOL {
        return c.normalize();
    }
    let c = up.cross(&Vec3::x());
    if c.norm() >= PARALLEL_TOL {
        // Perpendicular to up, hence to y.
        return c.normalize();
    }
    up.cross(&Vec3::y()).normalize()
}

pub fn grasp_frame(g: &Grasp, up: &Vec3) -> GraspFrame {
    let up = up.normalize();
    let y = g.orientation;
    let xp = horizontal_axis(&y, &up);
    let (s, c) = (libm::sin(g.angle), libm::cos(g.angle));
    let x = (xp * c + y.cross(&xp) * s).normalize();
    let z = x.cross(&y);
    GraspFrame {
        origin: g.center,
        x,
        y,
        z,
    }
}

/// Expresses the cloud (points and normals) in the grasp frame.
pub fn to_grasp_frame(cloud: &PointCloud, frame: &GraspFrame) -> PointCloud {
    let rt = frame.rotation().transpose();
    PointCloud {
        points: cloud.points.iter().map(|p| rt * (p - frame.origin)).collect(),
        colors: cloud.colors.clone(),
        normals: cloud.normals.as_ref().map(|n| n.iter().map(|v| rt * v).collect()),
        frame: FrameTag::Grasp,
    }
}

/// Inverse of [`to_grasp_frame`]; the result is tagged as world.
pub fn from_grasp_frame(cloud: &PointCloud, frame: &GraspFrame) -> PointCloud {
    let r = frame.rotation();
    PointCloud {
        points: cloud.points.iter().map(|q| r * q + frame.origin).collect(),
        colors: cloud.colors.clone(),
        normals: cloud.normals.as_ref().map(|n| n.iter().map(|v| r * v).collect()),
        frame: FrameTag::World,
    }
}

/// Indices (ascending) of points inside the closed box centered at the frame
/// origin with the given half-extents along the frame axes.
pub fn points_in_box(cloud: &PointCloud, frame: &GraspFrame, half_extents: &Vec3) -> Vec<usize> {
    let b = LocalBox {
        center: Vec3::zeros(),
        half_extents: *half_extents,
    };
    cloud
        .points
        .iter()
        .enumerate()
        .filter(|(_, p)| b.contains(&frame.to_local(p)))
        .map(|(i, _)| i)
        .collect()
}

/// Angle between two non-zero vectors, accurate near 0 and π.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}
