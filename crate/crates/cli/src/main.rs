use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::Isometry3;

use grasp_core::anchor::{decode_grn, match_ground_truth, AnchorSet};
use grasp_core::confidence::{confidence_field, confidence_field_brute_force};
use grasp_core::dataset::{self, DatasetOptions, ObjectInput};
use grasp_core::metrics::{compare_reports, evaluate};
use grasp_core::normals::estimate_normals;
use grasp_core::refine::decode_rn;
use grasp_core::sampler::{build_positive_set, sample_candidates};
use grasp_core::{io, synth, Config, Error, Grasp, PointCloud, Vec3};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(
    name = "grasp",
    version,
    about = "Grasp dataset generation, target encoding and evaluation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for outputs; relative `--out` paths are resolved inside it.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Re-check outputs after writing them; exit 3 on mismatch.
    #[arg(long, global = true)]
    verify: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample antipodal grasp candidates on an object and score them.
    SampleGrasps {
        #[arg(long)]
        object: PathBuf,
        /// Config file with gripper keys, applied after `--config`.
        #[arg(long)]
        gripper: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        count: usize,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        /// Keep only grasps scoring 1, sampling until `count` are found.
        #[arg(long)]
        positives: bool,
        #[arg(long, default_value = "grasps.csv")]
        out: PathBuf,
    },
    /// Per-point grasp confidence and positive/negative labels.
    Confidence {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        grasps: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        dth: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        ct: Option<f64>,
        #[arg(long, default_value = "labels.csv")]
        out: PathBuf,
    },
    /// Anchor-based region targets for a labeled view.
    MakeTargets {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        grasps: PathBuf,
        #[arg(long)]
        k1: Option<usize>,
        #[arg(long)]
        m1: Option<usize>,
        #[arg(long, default_value = "targets.csv")]
        out: PathBuf,
    },
    /// Refinement labels and residuals for grasp proposals.
    RefineTargets {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        proposals: PathBuf,
        #[arg(long)]
        grasps: PathBuf,
        #[arg(long)]
        min_points: Option<usize>,
        #[arg(long, default_value = "rn_targets.csv")]
        out: PathBuf,
    },
    /// Valid grasp ratios of predicted grasps against an object model.
    EvalVgr {
        /// Predicted grasps; repeat to compare several files.
        #[arg(long, required = true)]
        pred: Vec<PathBuf>,
        #[arg(long)]
        object: PathBuf,
        /// World-to-object transform, 12 numbers row-major `[R | t]`.
        #[arg(long)]
        pose: Option<PathBuf>,
        #[arg(long)]
        gripper: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        #[arg(long, default_value = "report.csv")]
        out: PathBuf,
    },
    /// Full dataset: positives per object, rendered views, labels, targets.
    GenerateDataset {
        #[arg(long, required = true, num_args = 1..)]
        objects: Vec<PathBuf>,
        #[arg(long, default_value_t = 4)]
        views: usize,
        /// Train:test view ratio.
        #[arg(long, default_value = "4:1", value_parser = parse_split)]
        split: (usize, usize),
        #[arg(long)]
        gripper: Option<PathBuf>,
        /// Overrides `positives_per_object`.
        #[arg(long)]
        positives: Option<usize>,
    },
    /// Estimate normals for a cloud without them.
    EstimateNormals {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        /// Normals are flipped toward this point.
        #[arg(long, default_value = "0,0,10", value_parser = parse_vec3)]
        viewpoint: Vec3,
        #[arg(long, default_value = "normals.txt")]
        out: PathBuf,
    },
    /// Write a synthetic object cloud with exact normals.
    SynthObject {
        #[arg(long, value_enum)]
        shape: Shape,
        /// Box dimensions `x,y,z`, or the sphere radius in the first entry.
        #[arg(long, value_parser = parse_vec3_raw)]
        size: Vec3,
        /// Box sample spacing.
        #[arg(long, default_value_t = 0.002)]
        spacing: f64,
        /// Sphere sample count.
        #[arg(long, default_value_t = 5000)]
        count: usize,
        #[arg(long, default_value = "object.txt")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Box,
    Sphere,
}

fn parse_split(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').ok_or("expected TRAIN:TEST")?;
    let a = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let b = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    if a + b == 0 {
        return Err("ratio must not be 0:0".into());
    }
    Ok((a, b))
}

fn parse_vec3_raw(s: &str) -> Result<Vec3, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()?;
    match v.as_slice() {
        [x, y, z] => Ok(Vec3::new(*x, *y, *z)),
        [r] => Ok(Vec3::new(*r, *r, *r)),
        _ => Err("expected x,y,z".into()),
    }
}

fn parse_vec3(s: &str) -> Result<Vec3, String> {
    let v = parse_vec3_raw(s)?;
    if v.iter().all(|c| c.is_finite()) {
        Ok(v)
    } else {
        Err("coordinates must be finite".into())
    }
}

/// Failure of a run, mapped to an exit code.
enum Failure {
    Usage(String),
    Data(Error),
    Verify(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::UnknownKey(_) | Error::MissingKey(_) | Error::OutOfRange { .. } => Failure::Usage(e.to_string()),
            other => Failure::Data(other),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    common: Common,
    config: Config,
}

impl Ctx {
    fn out_path(&self, out: &Path) -> PathBuf {
        match &self.common.out_dir {
            Some(dir) if out.is_relative() => dir.join(out),
            _ => out.to_path_buf(),
        }
    }

    fn with_gripper(&mut self, gripper: &Option<PathBuf>) -> Result<(), Error> {
        if let Some(path) = gripper {
            self.config = self.config.clone().overlay_file(path)?;
        }
        Ok(())
    }

    fn set<T: ToString>(&mut self, key: &str, value: Option<T>) -> Result<(), Error> {
        if let Some(v) = value {
            self.config.set(key, &v.to_string())?;
            self.config.validate()?;
        }
        Ok(())
    }

    /// Writes `<out>.meta` with the seed and every configuration value.
    fn record(&self, command: &str, out: &Path) -> Result<(), Error> {
        let mut meta = String::new();
        let _ = writeln!(meta, "command {command}");
        let _ = writeln!(meta, "seed {}", self.common.seed);
        let _ = writeln!(meta, "config_hash {}", self.config.hash());
        for line in self.config.echo().lines() {
            let _ = writeln!(meta, "config {line}");
        }
        let mut path = out.as_os_str().to_owned();
        path.push(".meta");
        io::write_text(Path::new(&path), &meta)
    }
}

fn require_normals(cloud: &PointCloud) -> Result<(), Error> {
    if cloud.normals().is_none() {
        return Err(Error::NormalsRequired);
    }
    Ok(())
}

fn same_grasp(a: &Grasp, b: &Grasp, tol: f64) -> bool {
    (a.center() - b.center()).norm() < tol
        && (a.orientation() - b.orientation()).norm() < tol
        && (a.angle() - b.angle()).abs() < tol
}

fn run(cli: Cli) -> Outcome {
    if let Some(n) = cli.common.jobs {
        if n == 0 {
            return Err(Failure::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    let config = match &cli.common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let mut ctx = Ctx {
        common: cli.common,
        config,
    };
    let seed = ctx.common.seed;
    match cli.command {
        Command::SampleGrasps {
            object,
            gripper,
            count,
            mu,
            positives,
            out,
        } => {
            ctx.with_gripper(&gripper)?;
            ctx.set("mu", mu)?;
            if count == 0 {
                return Err(Failure::Usage("--count must be at least 1".into()));
            }
            let cloud = io::read_cloud(&object)?;
            require_normals(&cloud)?;
            let scorer = ctx.config.scorer();
            let grasps = if positives {
                let set = build_positive_set(&cloud, &scorer, count, seed)?;
                if set.grasps.is_empty() {
                    return Err(Error::NotGraspable.into());
                }
                if set.shortfall > 0 {
                    eprintln!(
                        "warning: found {} of {count} positives in {} attempts",
                        set.grasps.len(),
                        set.attempts
                    );
                }
                set.grasps
            } else {
                scorer.score_batch(&cloud, &sample_candidates(&cloud, &scorer, count, seed)?)?
            };
            let path = ctx.out_path(&out);
            io::write_grasps(&path, &grasps)?;
            ctx.record("sample-grasps", &path)?;
            let good = grasps
                .iter()
                .filter(|g| g.scores().is_some_and(|s| s.overall()))
                .count();
            println!("{} grasps ({good} with score 1) -> {}", grasps.len(), path.display());
            if ctx.common.verify {
                let back = io::read_grasps(&path)?;
                let unscored: Vec<Grasp> = back.iter().map(|g| g.without_scores()).collect();
                let rescored = scorer.score_batch(&cloud, &unscored)?;
                let bad = rescored
                    .iter()
                    .zip(&back)
                    .filter(|(a, b)| a.scores() != b.scores())
                    .count();
                if bad > 0 {
                    return Err(Failure::Verify(format!("{bad} grasps re-score differently")));
                }
                println!("verify: {} grasps re-score identically", back.len());
            }
        }
        Command::Confidence {
            cloud,
            grasps,
            dth,
            ct,
            out,
        } => {
            ctx.set("d_th", dth)?;
            ctx.set("c_t", ct)?;
            let cloud = io::read_cloud(&cloud)?;
            let positives = io::read_grasps(&grasps)?;
            let field = confidence_field(&cloud, &positives, ctx.config.d_th, ctx.config.c_t)?;
            let path = ctx.out_path(&out);
            io::write_labels(&path, &field)?;
            ctx.record("confidence", &path)?;
            let pos = field.labels.iter().filter(|&&l| l).count();
            println!("{} points, {pos} positive -> {}", field.len(), path.display());
            if pos == 0 {
                eprintln!("warning: no positive points");
            }
            if ctx.common.verify {
                let reference = confidence_field_brute_force(&cloud, &positives, ctx.config.d_th, ctx.config.c_t)?;
                let worst = field
                    .values
                    .iter()
                    .zip(&reference.values)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if worst > 1e-12 || field.labels != reference.labels {
                    return Err(Failure::Verify(format!(
                        "grid field differs from brute force by {worst}"
                    )));
                }
                println!("verify: grid field matches brute force");
            }
        }
        Command::MakeTargets {
            cloud,
            labels,
            grasps,
            k1,
            m1,
            out,
        } => {
            ctx.set("k1", k1)?;
            ctx.set("m1", m1)?;
            let cloud = io::read_cloud(&cloud)?;
            let labels: Vec<bool> = io::read_labels(&labels)?.into_iter().map(|(_, l)| l).collect();
            if labels.len() != cloud.len() {
                return Err(Error::InvalidInput(format!("{} labels for {} points", labels.len(), cloud.len())).into());
            }
            let positives = io::read_grasps(&grasps)?;
            let targets = dataset::grn_targets(&cloud, &labels, &positives, &ctx.config, seed)?;
            let path = ctx.out_path(&out);
            io::write_grn_targets(&path, &targets)?;
            ctx.record("make-targets", &path)?;
            println!("{} targets -> {}", targets.len(), path.display());
            if ctx.common.verify {
                let anchors = AnchorSet::build(ctx.config.m1)?;
                let scale = ctx.config.gripper.scale();
                let back = io::read_grn_targets(&path, &cloud)?;
                let mut bad = 0;
                for t in &back {
                    let decoded = decode_grn(&t.center_point, &t.residuals, &anchors, scale)?.grasp;
                    let ok = match_ground_truth(&t.center_point, &positives, ctx.config.d_th)
                        .is_some_and(|j| same_grasp(&decoded, &positives[j], 1e-9));
                    bad += !ok as usize;
                }
                if bad > 0 {
                    return Err(Failure::Verify(format!(
                        "{bad} targets do not decode to their ground truth"
                    )));
                }
                println!("verify: {} targets decode to their ground truth", back.len());
            }
        }
        Command::RefineTargets {
            cloud,
            proposals,
            grasps,
            min_points,
            out,
        } => {
            ctx.set("min_points", min_points)?;
            let cloud = io::read_cloud(&cloud)?;
            let proposals = io::read_grasps(&proposals)?;
            let positives = io::read_grasps(&grasps)?;
            let targets = dataset::rn_targets(&cloud, &proposals, &positives, &ctx.config);
            let path = ctx.out_path(&out);
            io::write_rn_targets(&path, &targets)?;
            ctx.record("refine-targets", &path)?;
            let pos = targets.iter().filter(|t| t.positive).count();
            println!(
                "{} of {} proposals refinable, {pos} positive -> {}",
                targets.len(),
                proposals.len(),
                path.display()
            );
            if ctx.common.verify {
                let scale = ctx.config.gripper.scale();
                let mut bad = 0;
                for t in io::read_rn_targets(&path)? {
                    let Some(res) = t.residuals else { continue };
                    let p = &proposals[t.proposal_index];
                    let decoded = decode_rn(p, &res, scale)?.grasp;
                    let ok = match_ground_truth(&p.center(), &positives, ctx.config.d_th)
                        .is_some_and(|j| same_grasp(&decoded, &positives[j], 1e-9));
                    bad += !ok as usize;
                }
                if bad > 0 {
                    return Err(Failure::Verify(format!(
                        "{bad} refinement targets do not decode to their ground truth"
                    )));
                }
                println!("verify: positive refinement targets decode to their ground truth");
            }
        }
        Command::EvalVgr {
            pred,
            object,
            pose,
            gripper,
            mu,
            out,
        } => {
            ctx.with_gripper(&gripper)?;
            ctx.set("mu", mu)?;
            let cloud = io::read_cloud(&object)?;
            require_normals(&cloud)?;
            let iso = match &pose {
                Some(p) => io::read_pose(p)?,
                None => Isometry3::identity(),
            };
            let scorer = ctx.config.scorer();
            let mut reports = Vec::new();
            for p in &pred {
                let name = p
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let report = evaluate(&io::read_grasps(p)?, &iso, &cloud, &scorer)?;
                reports.push((name, report));
            }
            let mut csv = format!("method,{}\n", grasp_core::EvalReport::CSV_HEADER);
            for (name, r) in &reports {
                let _ = writeln!(csv, "{name},{}", r.csv_row());
            }
            let path = ctx.out_path(&out);
            io::write_text(&path, &csv)?;
            ctx.record("eval-vgr", &path)?;
            print!("{}", compare_reports(&reports));
            if ctx.common.verify {
                for (name, r) in &reports {
                    if r.vgr() > r.vagr().min(r.vcgr()) {
                        return Err(Failure::Verify(format!("{name}: VGR exceeds VAGR or VCGR")));
                    }
                }
                println!("verify: ratios consistent");
            }
        }
        Command::GenerateDataset {
            objects,
            views,
            split,
            gripper,
            positives,
        } => {
            ctx.with_gripper(&gripper)?;
            ctx.set("positives_per_object", positives)?;
            if views == 0 {
                return Err(Failure::Usage("--views must be at least 1".into()));
            }
            let inputs = objects
                .iter()
                .map(|p| {
                    Ok(ObjectInput {
                        name: p
                            .file_stem()
                            .map(|s| s.to_string_lossy().into_owned())
                            .unwrap_or_default(),
                        cloud: io::read_cloud(p)?,
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            let out_dir = ctx.common.out_dir.clone().unwrap_or_else(|| PathBuf::from("dataset"));
            let opts = DatasetOptions {
                views_per_object: views,
                split,
                verify: ctx.common.verify,
            };
            let summary = dataset::generate_dataset(&inputs, &ctx.config, seed, &opts, &out_dir)?;
            for w in &summary.warnings {
                eprintln!("warning: {w}");
            }
            for (name, reason) in &summary.skipped {
                eprintln!("skipped {name}: {reason}");
            }
            println!(
                "{} objects ({} skipped), {} views, {} positives -> {}",
                summary.objects,
                summary.skipped.len(),
                summary.views,
                summary.positives,
                summary.manifest_path.display()
            );
            println!("manifest_sha256 {}", summary.manifest_hash);
            if let Some(v) = &summary.verify {
                println!(
                    "verify: {}/{} positives and {}/{} targets re-score to 1",
                    v.positives_checked - v.positives_failed,
                    v.positives_checked,
                    v.targets_checked - v.targets_failed,
                    v.targets_checked
                );
                if !v.passed() {
                    return Err(Failure::Verify("stored grasps failed re-scoring".into()));
                }
            }
        }
        Command::EstimateNormals {
            cloud,
            k,
            viewpoint,
            out,
        } => {
            ctx.set("normal_k", k)?;
            let input = io::read_cloud(&cloud)?;
            let est = estimate_normals(&input, ctx.config.normal_k, &viewpoint)?;
            let path = ctx.out_path(&out);
            io::write_cloud(&path, &est.cloud)?;
            println!(
                "{} normals ({} degenerate) -> {}",
                input.len(),
                est.degenerate_count(),
                path.display()
            );
        }
        Command::SynthObject {
            shape,
            size,
            spacing,
            count,
            out,
        } => {
            if !size.iter().all(|&d| d > 0.0) || spacing.is_nan() || spacing <= 0.0 || count == 0 {
                return Err(Failure::Usage("sizes, spacing and count must be positive".into()));
            }
            let cloud = match shape {
                Shape::Box => synth::box_cloud(size, spacing),
                Shape::Sphere => synth::sphere_cloud(size.x, count),
            };
            let path = ctx.out_path(&out);
            io::write_cloud(&path, &cloud)?;
            println!("{} points -> {}", cloud.len(), path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
        Err(Failure::Verify(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}
