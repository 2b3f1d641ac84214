//! Valid grasp ratios: the fraction of predicted grasps that are antipodal
//! and collision-free (VGR), antipodal (VAGR), or collision-free (VCGR)
//! against the object model.

use std::fmt::Write as _;

use nalgebra::Isometry3;

use crate::error::{Error, Result};
use crate::geom::{Grasp, PointCloud};
use crate::quality::Scorer;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub k3: usize,
    pub kt: usize,
    pub kt_antipodal: usize,
    pub kt_collision_free: usize,
    /// Predicted grasps in the object frame with their scores.
    pub grasps: Vec<Grasp>,
}

impl EvalReport {
    /// Counts from already-scored grasps.
    pub fn from_scored(grasps: Vec<Grasp>) -> Result<Self> {
        if grasps.is_empty() {
            return Err(Error::NoGrasps);
        }
        let mut kt = 0;
        let mut kt_antipodal = 0;
        let mut kt_collision_free = 0;
        for g in &grasps {
            let s = g
                .scores()
                .ok_or_else(|| Error::InvalidInput("unscored grasp in report".into()))?;
            kt += s.overall() as usize;
            kt_antipodal += s.antipodal as usize;
            kt_collision_free += s.collision_free as usize;
        }
        Ok(EvalReport {
            k3: grasps.len(),
            kt,
            kt_antipodal,
            kt_collision_free,
            grasps,
        })
    }

    pub fn vgr(&self) -> f64 {
        self.kt as f64 / self.k3 as f64
    }

    pub fn vagr(&self) -> f64 {
        self.kt_antipodal as f64 / self.k3 as f64
    }

    pub fn vcgr(&self) -> f64 {
        self.kt_collision_free as f64 / self.k3 as f64
    }

    pub const CSV_HEADER: &'static str = "k3,kT,kT_a,kT_c,vgr,vagr,vcgr";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.4},{:.4},{:.4}",
            self.k3,
            self.kt,
            self.kt_antipodal,
            self.kt_collision_free,
            self.vgr(),
            self.vagr(),
            self.vcgr()
        )
    }
}

/// Moves each predicted grasp into the object frame with `world_to_object`
/// and scores it there.
pub fn evaluate(
    predicted: &[Grasp],
    world_to_object: &Isometry3<f64>,
    object: &PointCloud,
    scorer: &Scorer,
) -> Result<EvalReport> {
    if predicted.is_empty() {
        return Err(Error::NoGrasps);
    }
    if object.normals().is_none() {
        return Err(Error::NormalsRequired);
    }
    let local: Vec<Grasp> = predicted
        .iter()
        .map(|g| g.without_scores().transformed(world_to_object, &scorer.up))
        .collect();
    EvalReport::from_scored(scorer.score_batch(object, &local)?)
}

/// Text table of named reports, best VGR first; equal VGR sorted by name.
pub fn compare_reports(reports: &[(String, EvalReport)]) -> String {
    let mut rows: Vec<&(String, EvalReport)> = reports.iter().collect();
    rows.sort_by(|a, b| b.1.vgr().total_cmp(&a.1.vgr()).then_with(|| a.0.cmp(&b.0)));
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("method".len());
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>6}  {:>7}  {:>7}  {:>7}",
        "method", "k3", "VAGR", "VCGR", "VGR"
    );
    for (name, r) in rows {
        let _ = writeln!(
            out,
            "{:<width$}  {:>6}  {:>6.2}%  {:>6.2}%  {:>6.2}%",
            name,
            r.k3,
            100.0 * r.vagr(),
            100.0 * r.vcgr(),
            100.0 * r.vgr()
        );
    }
    out
}
