//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fail. Reference values come from oracles written here,
//! independent of the library code paths they check.

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use grasp_core::anchor::{decode_grn, encode_grn, grn_loss, GrnLossWeights, GrnPrediction, GrnResiduals};
use grasp_core::confidence::{confidence_field, sn_loss};
use grasp_core::dataset::{generate_dataset, DatasetOptions, ObjectInput};
use grasp_core::geom::{angle_between, grasp_frame, to_grasp_frame};
use grasp_core::loss::smooth_l1;
use grasp_core::metrics::evaluate;
use grasp_core::quality::{antipodal_score, ContactPair};
use grasp_core::refine::{
    closing_area, decode_rn, encode_rn, rn_loss, RnLossWeights, RnPrediction, RnResiduals, RnTarget, ANGLE_BOUND,
    ORIENTATION_BOUND,
};
use grasp_core::region::fps;
use grasp_core::sampler::build_positive_set;
use grasp_core::{
    synth, AnchorSet, Config, EvalReport, Grasp, GraspScores, GripperModel, PointCloud, Scorer, Vec3, WORLD_UP,
};

type Check = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit(r: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_grasp(r: &mut ChaCha8Rng, spread: f64) -> Grasp {
    let p = Vec3::new(
        r.random_range(-spread..spread),
        r.random_range(-spread..spread),
        r.random_range(-spread..spread),
    );
    Grasp::new(p, unit(r), r.random_range(-FRAC_PI_2..=FRAC_PI_2)).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, || format!("took {elapsed:?}, limit {limit:?}"))
}

fn anchor_round_trip() -> Check {
    let start = Instant::now();
    let anchors = AnchorSet::build(8).map_err(|e| e.to_string())?;
    let s = GripperModel::default().scale();
    let mut r = rng(1);
    let (mut worst_p, mut worst_r) = (0.0f64, 0.0f64);
    for i in 0..10_000 {
        let gt = random_grasp(&mut r, 0.5);
        let offset = unit(&mut r) * r.random_range(0.0..=s);
        let p_a = gt.center() - offset;
        let res = encode_grn(&p_a, &gt, &anchors, s);
        let back = decode_grn(&p_a, &res, &anchors, s)
            .map_err(|e| format!("grasp {i}: {e}"))?
            .grasp;
        worst_p = worst_p.max((back.center() - gt.center()).norm());
        worst_r = worst_r.max(angle_between(&back.orientation(), &gt.orientation()));
        ensure(back.angle() == gt.angle(), || {
            format!("grasp {i}: angle {} != {}", back.angle(), gt.angle())
        })?;
    }
    ensure(worst_p < 1e-9 && worst_r < 1e-9, || {
        format!("center error {worst_p:e}, orientation error {worst_r:e}")
    })?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "10^4 grasps, center err {worst_p:.1e} m, orientation err {worst_r:.1e} rad, {:?}",
        start.elapsed()
    ))
}

/// Rotates `v` about unit `axis` by `angle` (Rodrigues).
fn rotate(v: &Vec3, axis: &Vec3, angle: f64) -> Vec3 {
    let (s, c) = angle.sin_cos();
    v * c + axis.cross(v) * s + axis * axis.dot(v) * (1.0 - c)
}

fn refine_round_trip() -> Check {
    let start = Instant::now();
    let s = GripperModel::default().scale();
    let mut r = rng(2);
    let (mut worst_p, mut worst_r, mut worst_t) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..10_000 {
        let gt = random_grasp(&mut r, 0.5);
        // A proposal inside both label bounds.
        let axis = unit(&mut r).cross(&gt.orientation()).normalize();
        let tilt = r.random_range(0.0..ORIENTATION_BOUND * 0.99);
        let dr = rotate(&gt.orientation(), &axis, tilt);
        let lo = (gt.angle() - ANGLE_BOUND * 0.99).max(-FRAC_PI_2);
        let hi = (gt.angle() + ANGLE_BOUND * 0.99).min(FRAC_PI_2);
        let dp = unit(&mut r) * r.random_range(0.0..s);
        let proposal = Grasp::new(gt.center() + dp, dr, r.random_range(lo..=hi)).unwrap();
        let res = encode_rn(&proposal, &gt, s).map_err(|e| format!("pair {i}: {e}"))?;
        let back = decode_rn(&proposal, &res, s)
            .map_err(|e| format!("pair {i}: {e}"))?
            .grasp;
        worst_p = worst_p.max((back.center() - gt.center()).norm());
        worst_r = worst_r.max(angle_between(&back.orientation(), &gt.orientation()));
        worst_t = worst_t.max((back.angle() - gt.angle()).abs());
    }
    ensure(worst_p < 1e-9 && worst_r < 1e-9 && worst_t < 1e-12, || {
        format!("center {worst_p:e}, orientation {worst_r:e}, angle {worst_t:e}")
    })?;
    within(start.elapsed(), Duration::from_secs(5))?;
    Ok(format!(
        "10^4 positive pairs, center err {worst_p:.1e}, orientation err {worst_r:.1e}, angle err {worst_t:.1e}"
    ))
}

/// Friction-cone test by splitting the force into a normal part and two
/// tangential parts along an explicit tangent basis.
fn inside_cone_tangential(n: &Vec3, f: &Vec3, mu: f64) -> bool {
    let n = n.normalize();
    let helper = if n.x.abs() < 0.6 { Vec3::x() } else { Vec3::y() };
    let o = (helper - n * helper.dot(&n)).normalize();
    let t = n.cross(&o);
    let (f_n, f_o, f_t) = (f.dot(&n), f.dot(&o), f.dot(&t));
    (f_o * f_o + f_t * f_t).sqrt() <= mu * f_n.abs()
}

fn force_closure() -> Check {
    let mut r = rng(3);
    let mu = 0.6;
    let mut positives = 0;
    for i in 0..1000 {
        let y = unit(&mut r);
        // Normals near the closing axis so both outcomes occur often.
        let ni = (y * r.random_range(-1.0..1.0) + unit(&mut r) * 0.6).normalize();
        let nj = (y * r.random_range(-1.0..1.0) + unit(&mut r) * 0.6).normalize();
        let c = ContactPair {
            ci: Vec3::zeros(),
            cj: y * 0.04,
            ni,
            nj,
            fi: -y,
            fj: y,
        };
        let expected = inside_cone_tangential(&ni, &c.fi, mu) && inside_cone_tangential(&nj, &c.fj, mu);
        let got = antipodal_score(&c, mu);
        ensure(got == expected, || {
            format!("pair {i}: angle test {got}, decomposition {expected}")
        })?;
        positives += got as usize;
    }
    ensure(positives > 50 && positives < 950, || {
        format!("only {positives} of 1000 pairs positive")
    })?;
    Ok(format!("10^3 pairs agree ({positives} inside the cone)"))
}

fn oracle_confidence(points: &[Vec3], centers: &[Vec3], d_th: f64) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            centers
                .iter()
                .map(|c| {
                    let d = (p - c).norm();
                    if d < d_th {
                        1.0 - d / d_th
                    } else {
                        0.0
                    }
                })
                .sum()
        })
        .collect()
}

fn confidence_equivalence() -> Check {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for inst in 0..50 {
        let n = r.random_range(100..=5000);
        let m = r.random_range(1..=400);
        let d_th = r.random_range(0.005..0.05);
        let extent = r.random_range(0.05..0.3);
        let pts: Vec<Vec3> = (0..n)
            .map(|_| {
                Vec3::new(
                    r.random_range(0.0..extent),
                    r.random_range(0.0..extent),
                    r.random_range(0.0..extent),
                )
            })
            .collect();
        let grasps: Vec<Grasp> = (0..m)
            .map(|_| {
                let p = Vec3::new(
                    r.random_range(0.0..extent),
                    r.random_range(0.0..extent),
                    r.random_range(0.0..extent),
                );
                Grasp::new(p, unit(&mut r), 0.0).unwrap()
            })
            .collect();
        let cloud = PointCloud::new(pts.clone()).unwrap();
        let field = confidence_field(&cloud, &grasps, d_th, 0.6).map_err(|e| e.to_string())?;
        let centers: Vec<Vec3> = grasps.iter().map(Grasp::center).collect();
        let expected = oracle_confidence(&pts, &centers, d_th);
        for (a, b) in field.values.iter().zip(&expected) {
            worst = worst.max((a - b).abs());
        }
        ensure(worst <= 1e-12, || format!("instance {inst}: deviation {worst:e}"))?;
    }
    // Hand case: three centers 0.01 m from the point.
    let cloud = PointCloud::new(vec![Vec3::zeros()]).unwrap();
    let gs: Vec<Grasp> = [Vec3::x(), Vec3::y(), Vec3::z()]
        .iter()
        .map(|d| Grasp::new(d * 0.01, Vec3::x(), 0.0).unwrap())
        .collect();
    let c = confidence_field(&cloud, &gs, 0.02, 0.6)
        .map_err(|e| e.to_string())?
        .values[0];
    ensure(c == 1.5, || format!("hand case gave {c}"))?;
    Ok(format!("50 instances, max deviation {worst:.1e}; hand case = {c}"))
}

/// Gripper volumes in grasp coordinates, from the raw dimensions.
struct BoxOracle {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl BoxOracle {
    fn strict(&self, q: &Vec3) -> bool {
        (0..3).all(|k| q[k] > self.lo[k] && q[k] < self.hi[k])
    }

    fn inclusive(&self, q: &Vec3) -> bool {
        (0..3).all(|k| q[k] >= self.lo[k] && q[k] <= self.hi[k])
    }
}

fn oracle_frame(g: &Grasp, up: &Vec3) -> [Vec3; 3] {
    let y = g.orientation();
    let mut xp = up.cross(&y);
    if xp.norm() < 1e-6 {
        xp = up.cross(&Vec3::x());
    }
    let xp = xp.normalize();
    let x = rotate(&xp, &y, g.angle());
    [x, y, x.cross(&y)]
}

fn containment() -> Check {
    let gm = GripperModel::default();
    let (l, t, h, o, b) = (
        gm.finger_length,
        gm.finger_thickness,
        gm.finger_height,
        gm.max_opening,
        gm.base_depth,
    );
    let closing = BoxOracle {
        lo: [-l / 2.0, -o / 2.0, -h / 2.0],
        hi: [l / 2.0, o / 2.0, h / 2.0],
    };
    let solids = [
        BoxOracle {
            lo: [-l / 2.0, o / 2.0, -h / 2.0],
            hi: [l / 2.0, o / 2.0 + t, h / 2.0],
        },
        BoxOracle {
            lo: [-l / 2.0, -o / 2.0 - t, -h / 2.0],
            hi: [l / 2.0, -o / 2.0, h / 2.0],
        },
        BoxOracle {
            lo: [-l / 2.0 - b, -o / 2.0 - t, -h / 2.0],
            hi: [-l / 2.0, o / 2.0 + t, h / 2.0],
        },
    ];
    let scorer = Scorer::new(gm, 0.6);
    let mut r = rng(5);
    let cloud = synth::box_cloud(Vec3::new(0.05, 0.07, 0.04), 0.003);
    let (mut colliding, mut nonempty) = (0, 0);
    for i in 0..200 {
        let mut g = random_grasp(&mut r, 0.04);
        if i % 20 == 0 {
            g = Grasp::new(g.center(), if i % 40 == 0 { Vec3::z() } else { -Vec3::z() }, g.angle()).unwrap();
        }
        let [x, y, z] = oracle_frame(&g, &WORLD_UP);
        let local: Vec<Vec3> = cloud
            .points()
            .iter()
            .map(|p| {
                let d = p - g.center();
                Vec3::new(d.dot(&x), d.dot(&y), d.dot(&z))
            })
            .collect();
        let expect_free = !local.iter().any(|q| solids.iter().any(|s| s.strict(q)));
        let expect_area: Vec<usize> = (0..local.len()).filter(|&k| closing.inclusive(&local[k])).collect();
        let free = scorer.collision_free(&cloud, &g);
        let area = closing_area(&cloud, &g, &gm, &WORLD_UP).indices;
        ensure(free == expect_free, || {
            format!("grasp {i}: collision_free {free}, oracle {expect_free}")
        })?;
        ensure(area == expect_area, || {
            format!(
                "grasp {i}: closing area {} points, oracle {}",
                area.len(),
                expect_area.len()
            )
        })?;
        colliding += !free as usize;
        nonempty += !area.is_empty() as usize;
    }
    ensure(colliding > 0 && colliding < 200 && nonempty > 0, || {
        format!("degenerate sample: {colliding} colliding, {nonempty} non-empty")
    })?;
    Ok(format!(
        "200 grasps agree ({colliding} colliding, {nonempty} with points between the fingers)"
    ))
}

fn random_cloud(r: &mut ChaCha8Rng, n: usize) -> PointCloud {
    PointCloud::new((0..n).map(|_| Vec3::new(r.random(), r.random(), r.random())).collect()).unwrap()
}

fn fps_checks() -> Check {
    let mut r = rng(6);
    for set in 0..100 {
        let n = r.random_range(5..200);
        let cloud = random_cloud(&mut r, n);
        let subset: Vec<usize> = (0..cloud.len()).filter(|_| r.random_bool(0.7)).collect();
        if subset.is_empty() {
            continue;
        }
        let k = r.random_range(1..=subset.len());
        let seed = r.random();
        let long = fps(&cloud, &subset, k, seed).map_err(|e| e.to_string())?;
        for m in 1..k {
            let short = fps(&cloud, &subset, m, seed).map_err(|e| e.to_string())?;
            ensure(short == long[..m], || format!("set {set}: prefix {m} differs"))?;
        }
    }
    let mut steps = 0;
    for set in 0..200 {
        let n = r.random_range(1..=12);
        let cloud = random_cloud(&mut r, n);
        let subset: Vec<usize> = (0..n).collect();
        let k = r.random_range(1..=5usize).min(n);
        let chosen = fps(&cloud, &subset, k, r.random()).map_err(|e| e.to_string())?;
        for m in 1..chosen.len() {
            let mind = |i: usize| {
                chosen[..m]
                    .iter()
                    .map(|&c| (cloud.point(i) - cloud.point(c)).norm())
                    .fold(f64::INFINITY, f64::min)
            };
            let best = (0..n)
                .filter(|i| !chosen[..m].contains(i))
                .map(mind)
                .fold(f64::NEG_INFINITY, f64::max);
            ensure(mind(chosen[m]) == best, || {
                format!("set {set} step {m}: not max-min optimal")
            })?;
            steps += 1;
        }
    }
    Ok(format!(
        "prefix property on 100 sets; {steps} greedy steps verified by exhaustive scan"
    ))
}

fn losses() -> Check {
    let l1 = sn_loss(&[[0.5, 0.5]; 7], &[true, false, true, true, false, false, true])
        .map_err(|e| e.to_string())?
        .value;
    ensure((l1 - 2f64.ln()).abs() <= 1e-12, || format!("L1 uniform = {l1}"))?;

    let target = GrnResiduals {
        class: 3,
        res_p: Vec3::new(0.1, -0.2, 0.3),
        res_r: Vec3::new(0.01, 0.02, -0.03),
        res_theta: 0.4,
    };
    let mut pred = GrnPrediction::exact(&target, 8);
    pred.res_p.x += 0.5;
    let l2 = grn_loss(&[pred], &[target], &GrnLossWeights::default())
        .map_err(|e| e.to_string())?
        .total;
    // 10 · SmoothL1(0.5) with β = 1: 10 · 0.5 · 0.5².
    ensure((l2 - 1.25).abs() <= 1e-12, || format!("L2 hand case = {l2}"))?;

    let res = RnResiduals {
        res_p: Vec3::new(0.2, 0.1, 0.0),
        res_r: Vec3::zeros(),
        res_theta: 0.1,
    };
    let targets = [
        RnTarget {
            proposal_index: 0,
            positive: true,
            residuals: Some(res),
        },
        RnTarget {
            proposal_index: 1,
            positive: false,
            residuals: None,
        },
    ];
    let mut off = res;
    off.res_p.x += 1.0;
    let preds = [
        RnPrediction {
            probs: [0.0, 1.0],
            residuals: off,
        },
        RnPrediction {
            probs: [1.0, 0.0],
            residuals: RnResiduals::zero(),
        },
    ];
    let l3 = rn_loss(&preds, &targets, &RnLossWeights::default()).map_err(|e| e.to_string())?;
    let reg = l3.p + l3.r + l3.theta;
    ensure((reg - 0.5).abs() <= 1e-12 && l3.cls == 0.0, || {
        format!("L3 regression = {reg}, cls = {}", l3.cls)
    })?;

    let (below, above) = (smooth_l1(1.0 - 1e-12, 1.0), smooth_l1(1.0 + 1e-12, 1.0));
    ensure(
        (below - above).abs() <= 1e-9 && (smooth_l1(1.0, 1.0) - 0.5).abs() <= 1e-12,
        || format!("smooth L1 jump at beta: {below} vs {above}"),
    )?;

    let zero1 = sn_loss(&[[0.0, 1.0], [1.0, 0.0]], &[true, false])
        .map_err(|e| e.to_string())?
        .value;
    let zero2 = grn_loss(
        &[GrnPrediction::exact(&target, 8)],
        &[target],
        &GrnLossWeights::default(),
    )
    .map_err(|e| e.to_string())?
    .total;
    let exact_rn = [
        RnPrediction {
            probs: [0.0, 1.0],
            residuals: res,
        },
        RnPrediction {
            probs: [1.0, 0.0],
            residuals: RnResiduals::zero(),
        },
    ];
    let zero3 = rn_loss(&exact_rn, &targets, &RnLossWeights::default())
        .map_err(|e| e.to_string())?
        .total;
    ensure(zero1 == 0.0 && zero2 == 0.0 && zero3 == 0.0, || {
        format!("perfect predictions gave {zero1}, {zero2}, {zero3}")
    })?;
    Ok(format!(
        "L1 uniform = ln 2, L2 = {l2}, L3 regression = {reg}, perfect predictions give 0"
    ))
}

fn frames() -> Check {
    let mut r = rng(7);
    let (mut worst, mut worst_trip) = (0.0f64, 0.0f64);
    let probe = PointCloud::new((0..20).map(|_| unit(&mut r) * 0.1).collect()).unwrap();
    for i in 0..10_000 {
        let mut g = random_grasp(&mut r, 1.0);
        if i % 10 == 0 {
            let sign = if i % 20 == 0 { 1.0 } else { -1.0 };
            g = Grasp::new(g.center(), WORLD_UP * sign, g.angle()).unwrap();
        }
        let f = grasp_frame(&g, &WORLD_UP);
        let m = f.rotation();
        let gram = (m.transpose() * m - nalgebra::Matrix3::identity()).abs().max();
        let det = (m.determinant() - 1.0).abs();
        let hand = (f.x.cross(&f.y) - f.z).norm();
        worst = worst.max(gram).max(det).max(hand);
        let local = to_grasp_frame(&probe, &f);
        for (p, q) in probe.points().iter().zip(local.points()) {
            let back = f.origin + f.x * q.x + f.y * q.y + f.z * q.z;
            worst_trip = worst_trip.max((back - p).norm());
        }
    }
    ensure(worst < 1e-9 && worst_trip < 1e-9, || {
        format!("frame error {worst:e}, round trip {worst_trip:e}")
    })?;
    Ok(format!(
        "10^4 frames (10% up-parallel), orthonormality err {worst:.1e}, round trip {worst_trip:.1e}"
    ))
}

fn scored(a: bool, c: bool) -> Grasp {
    Grasp::new(Vec3::zeros(), Vec3::x(), 0.0)
        .unwrap()
        .with_scores(GraspScores {
            antipodal: a,
            collision_free: c,
        })
}

fn metrics() -> Check {
    let hand = EvalReport::from_scored(vec![
        scored(true, true),
        scored(true, true),
        scored(true, false),
        scored(false, false),
    ])
    .map_err(|e| e.to_string())?;
    ensure((hand.vagr(), hand.vcgr(), hand.vgr()) == (0.75, 0.5, 0.5), || {
        format!("hand case {} {} {}", hand.vagr(), hand.vcgr(), hand.vgr())
    })?;

    let mut r = rng(8);
    for t in 0..100 {
        let n = r.random_range(1..50);
        let table: Vec<Grasp> = (0..n).map(|_| scored(r.random_bool(0.6), r.random_bool(0.6))).collect();
        let rep = EvalReport::from_scored(table).map_err(|e| e.to_string())?;
        ensure(rep.vgr() <= rep.vagr().min(rep.vcgr()), || {
            format!("table {t}: vgr exceeds a component ratio")
        })?;
    }

    let object = synth::box_cloud(Vec3::new(0.04, 0.05, 0.05), 0.003);
    let scorer = Scorer::new(GripperModel::default(), 0.6);
    let set = build_positive_set(&object, &scorer, 100, 9).map_err(|e| e.to_string())?;
    let rep = evaluate(&set.grasps, &nalgebra::Isometry3::identity(), &object, &scorer).map_err(|e| e.to_string())?;
    ensure(rep.vgr() == 1.0, || {
        format!("G_pos against own object: VGR {}", rep.vgr())
    })?;
    Ok(format!(
        "hand case 0.75/0.5/0.5, 100 tables consistent, positive set VGR = {} on {} grasps",
        rep.vgr(),
        rep.k3
    ))
}

fn end_to_end() -> Check {
    let start = Instant::now();
    let object = ObjectInput {
        name: "box".into(),
        cloud: synth::box_cloud(Vec3::new(0.04, 0.05, 0.05), 0.003),
    };
    let config = Config::default();
    let opts = DatasetOptions {
        views_per_object: 4,
        split: (4, 1),
        verify: true,
    };
    let mut hashes = Vec::new();
    let mut verify = None;
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let s = generate_dataset(std::slice::from_ref(&object), &config, 2024, &opts, dir.path())
            .map_err(|e| e.to_string())?;
        ensure(s.positives == 400 && s.views == 4, || {
            format!("{} positives, {} views", s.positives, s.views)
        })?;
        hashes.push(s.manifest_hash);
        verify = s.verify;
    }
    ensure(hashes[0] == hashes[1], || {
        format!("manifest hashes differ: {} vs {}", hashes[0], hashes[1])
    })?;
    let v = verify.ok_or("no verification report")?;
    ensure(v.passed(), || format!("{v:?}"))?;
    within(start.elapsed(), Duration::from_secs(60))?;
    Ok(format!(
        "two runs, manifest {}…, {} positives and {} decoded targets re-score to 1, {:?}",
        &hashes[0][..12],
        v.positives_checked,
        v.targets_checked,
        start.elapsed()
    ))
}

fn main() -> ExitCode {
    type Criterion = (&'static str, fn() -> Check);
    let checks: [Criterion; 10] = [
        ("anchor codec round trip", anchor_round_trip),
        ("refinement codec round trip", refine_round_trip),
        ("force-closure oracle equivalence", force_closure),
        ("confidence field equivalence", confidence_equivalence),
        ("collision and closing-area containment", containment),
        ("farthest point sampling", fps_checks),
        ("losses", losses),
        ("grasp frames", frames),
        ("metrics", metrics),
        ("end-to-end determinism", end_to_end),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    println!(
        "{} of {} acceptance criteria passed",
        checks.len() - failed,
        checks.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
