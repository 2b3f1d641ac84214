//! Dataset generation: positive grasps per object, rendered views with
//! confidence labels and region targets, and a hashed manifest.
//!
//! Layout under the output directory:
//!
//! ```text
//! manifest.txt
//! <object>/grasps.csv
//! <object>/view_000.gfpc
//! <object>/view_000_labels.csv
//! <object>/view_000_targets.csv
//! ```
//!
//! Every random step draws from a seed derived from the global seed and the
//! object and view indices, so output does not depend on thread scheduling.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::anchor::{decode_grn, encode_grn, match_ground_truth, AnchorSet, GrnTarget};
use crate::confidence::{confidence_field, ConfidenceField};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::geom::{Grasp, PointCloud, Vec3};
use crate::io;
use crate::quality::Scorer;
use crate::refine::{make_rn_target, select_refinable, RnTarget};
use crate::region::fps;
use crate::rng::{derive_seed, seeded};
use crate::sampler::{build_positive_set, render_single_view, ViewSpec};

pub const MANIFEST_FILE: &str = "manifest.txt";

/// Uniform random subset of `min(n, |cloud|)` points, kept in input order.
pub fn subsample_cloud(cloud: &PointCloud, n: usize, seed: u64) -> PointCloud {
    if cloud.len() <= n {
        return cloud.clone();
    }
    let mut picked = index::sample(&mut seeded(seed), cloud.len(), n).into_vec();
    picked.sort_unstable();
    cloud.select(&picked)
}

/// Region targets for one view: FPS over the positive points, then each
/// chosen point is matched to the nearest positive grasp center within
/// `d_th` and encoded against the anchors.
pub fn grn_targets(
    cloud: &PointCloud,
    labels: &[bool],
    positives: &[Grasp],
    config: &Config,
    seed: u64,
) -> Result<Vec<GrnTarget>> {
    if labels.len() != cloud.len() {
        return Err(Error::InvalidInput(format!(
            "{} labels for {} points",
            labels.len(),
            cloud.len()
        )));
    }
    let anchors = AnchorSet::build(config.m1)?;
    let scale = config.gripper.scale();
    let subset: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let centers = fps(cloud, &subset, config.k1, seed)?;
    Ok(centers
        .into_iter()
        .filter_map(|i| {
            let p = cloud.point(i);
            let gt = match_ground_truth(p, positives, config.d_th)?;
            Some(GrnTarget {
                point_index: i,
                center_point: *p,
                residuals: encode_grn(p, &positives[gt], &anchors, scale),
            })
        })
        .collect())
}

/// Refinement targets for the proposals with enough points in their closing
/// area. Each is labeled against the nearest positive grasp center within
/// `d_th`; proposals without one are negative.
pub fn rn_targets(cloud: &PointCloud, proposals: &[Grasp], positives: &[Grasp], config: &Config) -> Vec<RnTarget> {
    let scale = config.gripper.scale();
    select_refinable(proposals, cloud, &config.gripper, &config.up, config.min_points)
        .into_iter()
        .map(|i| {
            let p = &proposals[i];
            let gt = match_ground_truth(&p.center(), positives, config.d_th).map(|j| &positives[j]);
            make_rn_target(i, p, gt, scale)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct ObjectInput {
    pub name: String,
    pub cloud: PointCloud,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatasetOptions {
    pub views_per_object: usize,
    /// `(train, test)` view ratio, e.g. `(4, 1)`.
    pub split: (usize, usize),
    pub verify: bool,
}

impl Default for DatasetOptions {
    fn default() -> Self {
        DatasetOptions {
            views_per_object: 4,
            split: (4, 1),
            verify: false,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub positives_checked: usize,
    pub positives_failed: usize,
    pub targets_checked: usize,
    pub targets_failed: usize,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.positives_failed == 0 && self.targets_failed == 0
    }
}

#[derive(Debug, Clone)]
pub struct DatasetSummary {
    pub manifest_path: PathBuf,
    pub manifest_hash: String,
    pub objects: usize,
    pub skipped: Vec<(String, String)>,
    pub views: usize,
    pub positives: usize,
    pub warnings: Vec<String>,
    pub verify: Option<VerifyReport>,
}

struct ViewResult {
    seed: u64,
    eye: Vec3,
    cloud: PointCloud,
    field: ConfidenceField,
    targets: Vec<GrnTarget>,
    warning: Option<String>,
}

enum ObjectResult {
    Skipped(String),
    Done {
        seed: u64,
        positives: Vec<Grasp>,
        attempts: usize,
        candidates: usize,
        shortfall: usize,
        views: Vec<ViewResult>,
    },
}

/// Eye position from a seeded uniform direction around the object.
fn view_eye(center: &Vec3, radius: f64, seed: u64) -> Vec3 {
    let mut rng = seeded(seed);
    let z: f64 = rng.random_range(-1.0..=1.0);
    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    center + Vec3::new(s * libm::cos(phi), s * libm::sin(phi), z) * (1.0 + 2.0 * radius)
}

fn build_view(object: &PointCloud, positives: &[Grasp], config: &Config, seed: u64) -> Result<ViewResult> {
    let center = object.centroid().unwrap_or_else(Vec3::zeros);
    let radius = object.points().iter().map(|p| (p - center).norm()).fold(0.0, f64::max);
    let eye = view_eye(&center, radius, derive_seed(seed, &[0]));
    let camera = ViewSpec::looking_at(eye, center, config.view_grid_spacing);
    let rendered = render_single_view(object, &camera);
    let cloud = subsample_cloud(&rendered, config.n_points, derive_seed(seed, &[1])).quantized_f32();
    let field = confidence_field(&cloud, positives, config.d_th, config.c_t)?;
    let (targets, warning) = if field.labels.iter().any(|&l| l) {
        (
            grn_targets(&cloud, &field.labels, positives, config, derive_seed(seed, &[2]))?,
            None,
        )
    } else {
        (Vec::new(), Some("no positive points".to_string()))
    };
    Ok(ViewResult {
        seed,
        eye,
        cloud,
        field,
        targets,
        warning,
    })
}

fn build_object(
    object: &PointCloud,
    index: usize,
    opts: &DatasetOptions,
    config: &Config,
    seed: u64,
) -> Result<ObjectResult> {
    let scorer = config.scorer();
    let object_seed = derive_seed(seed, &[0, index as u64]);
    let set = match build_positive_set(object, &scorer, config.positives_per_object, object_seed) {
        Ok(s) => s,
        Err(Error::NotGraspable) => return Ok(ObjectResult::Skipped(Error::NotGraspable.to_string())),
        Err(e) => return Err(e),
    };
    if set.grasps.is_empty() {
        return Ok(ObjectResult::Skipped(Error::NotGraspable.to_string()));
    }
    let views = (0..opts.views_per_object)
        .into_par_iter()
        .map(|v| {
            build_view(
                object,
                &set.grasps,
                config,
                derive_seed(seed, &[1, index as u64, v as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ObjectResult::Done {
        seed: object_seed,
        positives: set.grasps,
        attempts: set.attempts,
        candidates: set.candidates,
        shortfall: set.shortfall,
        views,
    })
}

fn sha256_hex(data: &[u8]) -> String {
    hex::encode(Sha256::digest(data))
}

fn write_artifact(out_dir: &Path, rel: &str, data: &[u8], manifest: &mut String) -> Result<()> {
    let path = out_dir.join(rel);
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(&path, data).map_err(|e| Error::io(&path, e))?;
    let _ = writeln!(
        manifest,
        "artifact {rel} bytes={} sha256={}",
        data.len(),
        sha256_hex(data)
    );
    Ok(())
}

fn safe_name(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if s.is_empty() {
        "object".into()
    } else {
        s
    }
}

/// Names made unique by appending the object index when they collide.
fn directory_names(objects: &[ObjectInput]) -> Vec<String> {
    let base: Vec<String> = objects.iter().map(|o| safe_name(&o.name)).collect();
    base.iter()
        .enumerate()
        .map(|(i, b)| {
            if base.iter().filter(|x| *x == b).count() > 1 {
                format!("{b}_{i}")
            } else {
                b.clone()
            }
        })
        .collect()
}

/// Generates the dataset under `out_dir` and writes the manifest last.
pub fn generate_dataset(
    objects: &[ObjectInput],
    config: &Config,
    seed: u64,
    opts: &DatasetOptions,
    out_dir: &Path,
) -> Result<DatasetSummary> {
    if objects.is_empty() {
        return Err(Error::InvalidInput("no objects given".into()));
    }
    if opts.views_per_object == 0 {
        return Err(Error::InvalidInput("views per object must be positive".into()));
    }
    let (train, test) = opts.split;
    if train + test == 0 {
        return Err(Error::InvalidInput("split ratio must not be 0:0".into()));
    }
    for o in objects {
        if o.cloud.normals().is_none() {
            return Err(Error::NormalsRequired);
        }
    }
    config.validate()?;

    let results = objects
        .par_iter()
        .enumerate()
        .map(|(i, o)| build_object(&o.cloud, i, opts, config, seed))
        .collect::<Result<Vec<_>>>()?;

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut manifest = String::new();
    let _ = writeln!(manifest, "# grasp dataset manifest");
    let _ = writeln!(manifest, "format 1");
    let _ = writeln!(manifest, "seed {seed}");
    let _ = writeln!(manifest, "views_per_object {}", opts.views_per_object);
    let _ = writeln!(manifest, "split {train}:{test}");
    let _ = writeln!(manifest, "config_hash {}", config.hash());
    for line in config.echo().lines() {
        let _ = writeln!(manifest, "config {line}");
    }

    let names = directory_names(objects);
    let mut summary = DatasetSummary {
        manifest_path: out_dir.join(MANIFEST_FILE),
        manifest_hash: String::new(),
        objects: objects.len(),
        skipped: Vec::new(),
        views: 0,
        positives: 0,
        warnings: Vec::new(),
        verify: None,
    };
    for ((obj, name), result) in objects.iter().zip(&names).zip(&results) {
        let input_hash = sha256_hex(io::format_cloud_text(&obj.cloud).as_bytes());
        match result {
            ObjectResult::Skipped(reason) => {
                let _ = writeln!(manifest, "skipped {name} input_sha256={input_hash} reason=\"{reason}\"");
                summary.skipped.push((name.clone(), reason.clone()));
            }
            ObjectResult::Done {
                seed: object_seed,
                positives,
                attempts,
                candidates,
                shortfall,
                views,
            } => {
                let _ = writeln!(
                    manifest,
                    "object {name} points={} input_sha256={input_hash} seed={object_seed} positives={} attempts={attempts} candidates={candidates} shortfall={shortfall}",
                    obj.cloud.len(),
                    positives.len()
                );
                if *shortfall > 0 {
                    summary.warnings.push(format!("{name}: {shortfall} positives short"));
                }
                summary.positives += positives.len();
                write_artifact(
                    out_dir,
                    &format!("{name}/grasps.csv"),
                    io::format_grasps(positives).as_bytes(),
                    &mut manifest,
                )?;
                for (v, view) in views.iter().enumerate() {
                    let split = if v % (train + test) < train { "train" } else { "test" };
                    let positive_points = view.field.labels.iter().filter(|&&l| l).count();
                    let _ = writeln!(
                        manifest,
                        "view {name} {v} split={split} seed={} eye={},{},{} points={} positive_points={positive_points} targets={}",
                        view.seed,
                        view.eye.x,
                        view.eye.y,
                        view.eye.z,
                        view.cloud.len(),
                        view.targets.len()
                    );
                    if let Some(w) = &view.warning {
                        let _ = writeln!(manifest, "warning {name} {v} {w}");
                        summary.warnings.push(format!("{name} view {v}: {w}"));
                    }
                    let stem = format!("{name}/view_{v:03}");
                    write_artifact(
                        out_dir,
                        &format!("{stem}.gfpc"),
                        &io::encode_cloud_binary(&view.cloud),
                        &mut manifest,
                    )?;
                    write_artifact(
                        out_dir,
                        &format!("{stem}_labels.csv"),
                        io::format_labels(&view.field).as_bytes(),
                        &mut manifest,
                    )?;
                    write_artifact(
                        out_dir,
                        &format!("{stem}_targets.csv"),
                        io::format_grn_targets(&view.targets).as_bytes(),
                        &mut manifest,
                    )?;
                    summary.views += 1;
                }
            }
        }
    }
    let hash = sha256_hex(manifest.as_bytes());
    let _ = writeln!(manifest, "manifest_sha256 {hash}");
    fs::write(&summary.manifest_path, &manifest).map_err(|e| Error::io(&summary.manifest_path, e))?;
    summary.manifest_hash = hash;

    if opts.verify {
        summary.verify = Some(verify_dataset(objects, &names, &results, config, out_dir)?);
    }
    Ok(summary)
}

fn rescore_failures(scorer: &Scorer, object: &PointCloud, grasps: &[Grasp]) -> Result<usize> {
    let scored = scorer.score_batch(object, &grasps.iter().map(|g| g.without_scores()).collect::<Vec<_>>())?;
    Ok(scored
        .iter()
        .filter(|g| !g.scores().is_some_and(|s| s.overall()))
        .count())
}

/// Reads the written files back: every stored positive and every decoded
/// region target must re-score to 1 against its own object.
fn verify_dataset(
    objects: &[ObjectInput],
    names: &[String],
    results: &[ObjectResult],
    config: &Config,
    out_dir: &Path,
) -> Result<VerifyReport> {
    let scorer = config.scorer();
    let anchors = AnchorSet::build(config.m1)?;
    let scale = config.gripper.scale();
    let mut report = VerifyReport::default();
    for ((obj, name), result) in objects.iter().zip(names).zip(results) {
        let ObjectResult::Done { views, .. } = result else {
            continue;
        };
        let positives = io::read_grasps(&out_dir.join(name).join("grasps.csv"))?;
        report.positives_checked += positives.len();
        report.positives_failed += rescore_failures(&scorer, &obj.cloud, &positives)?;
        for v in 0..views.len() {
            let stem = out_dir.join(name).join(format!("view_{v:03}"));
            let cloud = io::read_cloud(&stem.with_extension("gfpc"))?;
            let targets = io::read_grn_targets(&PathBuf::from(format!("{}_targets.csv", stem.display())), &cloud)?;
            let decoded = targets
                .iter()
                .map(|t| decode_grn(&t.center_point, &t.residuals, &anchors, scale).map(|d| d.grasp))
                .collect::<Result<Vec<_>>>()?;
            report.targets_checked += decoded.len();
            report.targets_failed += rescore_failures(&scorer, &obj.cloud, &decoded)?;
        }
    }
    Ok(report)
}

/// The `manifest_sha256` line of a manifest file.
pub fn read_manifest_hash(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .rev()
        .find_map(|l| l.strip_prefix("manifest_sha256 "))
        .map(str::to_owned)
        .ok_or_else(|| Error::parse(path, 0, "no manifest hash line"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn subsample_sizes_and_determinism() {
        let c = synth::sphere_cloud(0.05, 500);
        assert_eq!(subsample_cloud(&c, 1000, 1), c);
        let a = subsample_cloud(&c, 100, 1);
        assert_eq!(a.len(), 100);
        assert_eq!(a, subsample_cloud(&c, 100, 1));
        assert_ne!(a, subsample_cloud(&c, 100, 2));
    }

    #[test]
    fn duplicate_names_are_disambiguated() {
        let cloud = synth::sphere_cloud(0.01, 10);
        let objs = vec![
            ObjectInput {
                name: "a b".into(),
                cloud: cloud.clone(),
            },
            ObjectInput {
                name: "a_b".into(),
                cloud: cloud.clone(),
            },
            ObjectInput {
                name: "c".into(),
                cloud,
            },
        ];
        assert_eq!(directory_names(&objs), vec!["a_b_0", "a_b_1", "c"]);
    }

    #[test]
    fn small_dataset_structure() {
        let dir = tempfile::tempdir().unwrap();
        let config = Config::parse("positives_per_object = 40\n").unwrap();
        let objects = vec![ObjectInput {
            name: "box".into(),
            cloud: synth::box_cloud(Vec3::new(0.04, 0.05, 0.05), 0.003),
        }];
        let opts = DatasetOptions {
            views_per_object: 2,
            verify: true,
            ..Default::default()
        };
        let s = generate_dataset(&objects, &config, 3, &opts, dir.path()).unwrap();
        assert_eq!(s.views, 2);
        assert_eq!(s.positives, 40);
        assert!(s.verify.as_ref().unwrap().passed(), "{:?}", s.verify);
        for f in [
            "grasps.csv",
            "view_000.gfpc",
            "view_001_labels.csv",
            "view_001_targets.csv",
        ] {
            assert!(dir.path().join("box").join(f).exists(), "{f}");
        }
        assert_eq!(read_manifest_hash(&s.manifest_path).unwrap(), s.manifest_hash);
    }

    #[test]
    fn ungraspable_object_is_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let config = Config::parse("positives_per_object = 5\n").unwrap();
        let objects = vec![ObjectInput {
            name: "big".into(),
            cloud: synth::sphere_cloud(0.2, 2000),
        }];
        let s = generate_dataset(&objects, &config, 0, &DatasetOptions::default(), dir.path()).unwrap();
        assert_eq!(s.skipped.len(), 1);
        let m = fs::read_to_string(&s.manifest_path).unwrap();
        assert!(m.contains("skipped big"));
    }
}
