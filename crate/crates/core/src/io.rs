//! File formats.
//!
//! * Point clouds, text: one point per line, `x,y,z[,r,g,b][,nx,ny,nz]`,
//!   `#` starts a comment. Six columns are read as color unless a
//!   `# fields: x,y,z,nx,ny,nz` header says otherwise.
//! * Point clouds, binary: 16-byte magic (`GFPC0001` padded with NUL),
//!   little-endian `u32` count, `u8` flags (bit 0 color, bit 1 normals),
//!   then packed little-endian `f32` records `xyz [rgb] [nxnynz]`.
//! * Grasps: CSV `px,py,pz,rx,ry,rz,theta,sa,sc,sg`, scores `-1` if unscored.
//! * Labels: CSV `index,c_pc,label`.
//! * Region targets: CSV `point_index,class,resp_x,resp_y,resp_z,resr_x,resr_y,resr_z,res_theta`.
//! * Refinement targets: CSV `proposal_index,y,resp_x,resp_y,resp_z,resr_x,resr_y,resr_z,res_theta`,
//!   residual fields empty for `y = 0`.
//! * Pose: 12 numbers, row-major `[R | t]`.
//!
//! Floats are written with Rust's shortest round-trip formatting so that
//! written files re-read bit-exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion};

use crate::anchor::{GrnResiduals, GrnTarget};
use crate::confidence::ConfidenceField;
use crate::error::{Error, Result};
use crate::geom::{Grasp, GraspScores, PointCloud, Vec3};
use crate::refine::{RnResiduals, RnTarget};

pub const CLOUD_MAGIC: [u8; 16] = *b"GFPC0001\0\0\0\0\0\0\0\0";
const FLAG_COLOR: u8 = 1;
const FLAG_NORMALS: u8 = 2;

pub const GRASP_HEADER: &str = "px,py,pz,rx,ry,rz,theta,sa,sc,sg";
pub const LABEL_HEADER: &str = "index,c_pc,label";
pub const GRN_TARGET_HEADER: &str = "point_index,class,resp_x,resp_y,resp_z,resr_x,resr_y,resr_z,res_theta";
pub const RN_TARGET_HEADER: &str = "proposal_index,y,resp_x,resp_y,resp_z,resr_x,resr_y,resr_z,res_theta";

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_bytes(path: &Path, data: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

/// Reads a cloud, detecting the binary format by its magic.
pub fn read_cloud(path: &Path) -> Result<PointCloud> {
    let data = read_bytes(path)?;
    if data.starts_with(&CLOUD_MAGIC[..8]) {
        decode_cloud_binary(&data).map_err(|msg| Error::parse(path, 0, msg))
    } else {
        let text = String::from_utf8(data).map_err(|_| Error::parse(path, 0, "not UTF-8 text"))?;
        parse_cloud_text(&text, path)
    }
}

/// Writes binary when the extension is `gfpc` or `bin`, text otherwise.
pub fn write_cloud(path: &Path, cloud: &PointCloud) -> Result<()> {
    let binary = matches!(path.extension().and_then(|e| e.to_str()), Some("gfpc" | "bin"));
    let data = if binary {
        encode_cloud_binary(cloud)
    } else {
        format_cloud_text(cloud).into_bytes()
    };
    write_bytes(path, &data)
}

pub fn encode_cloud_binary(cloud: &PointCloud) -> Vec<u8> {
    let mut flags = 0u8;
    if cloud.colors().is_some() {
        flags |= FLAG_COLOR;
    }
    if cloud.normals().is_some() {
        flags |= FLAG_NORMALS;
    }
    let per = 12 + if flags & FLAG_COLOR != 0 { 12 } else { 0 } + if flags & FLAG_NORMALS != 0 { 12 } else { 0 };
    let mut out = Vec::with_capacity(21 + per * cloud.len());
    out.extend_from_slice(&CLOUD_MAGIC);
    out.extend_from_slice(&(cloud.len() as u32).to_le_bytes());
    out.push(flags);
    for i in 0..cloud.len() {
        for c in cloud.point(i).iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        if let Some(colors) = cloud.colors() {
            for c in colors[i] {
                out.extend_from_slice(&c.to_le_bytes());
            }
        }
        if let Some(normals) = cloud.normals() {
            for c in normals[i].iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_cloud_binary(data: &[u8]) -> std::result::Result<PointCloud, String> {
    if data.len() < 21 || data[..16] != CLOUD_MAGIC {
        return Err("bad binary cloud header".into());
    }
    let count = u32::from_le_bytes(data[16..20].try_into().unwrap()) as usize;
    let flags = data[20];
    if flags & !(FLAG_COLOR | FLAG_NORMALS) != 0 {
        return Err(format!("unknown flag bits {flags:#04x}"));
    }
    let has_color = flags & FLAG_COLOR != 0;
    let has_normals = flags & FLAG_NORMALS != 0;
    let per = 3 + 3 * has_color as usize + 3 * has_normals as usize;
    let body = &data[21..];
    if body.len() != count * per * 4 {
        return Err(format!(
            "expected {} payload bytes, found {}",
            count * per * 4,
            body.len()
        ));
    }
    let floats: Vec<f32> = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    let mut points = Vec::with_capacity(count);
    let mut colors = Vec::new();
    let mut normals = Vec::new();
    for rec in floats.chunks_exact(per) {
        let v = |o: usize| Vec3::new(rec[o] as f64, rec[o + 1] as f64, rec[o + 2] as f64);
        points.push(v(0));
        let mut o = 3;
        if has_color {
            colors.push([rec[3], rec[4], rec[5]]);
            o += 3;
        }
        if has_normals {
            normals.push(v(o));
        }
    }
    let mut cloud = PointCloud::new(points).map_err(|e| e.to_string())?;
    if has_color {
        cloud = cloud.with_colors(colors).map_err(|e| e.to_string())?;
    }
    if has_normals {
        cloud = cloud.with_normals(normals).map_err(|e| e.to_string())?;
    }
    Ok(cloud)
}

pub fn format_cloud_text(cloud: &PointCloud) -> String {
    let mut out = String::new();
    let mut fields = vec!["x", "y", "z"];
    if cloud.colors().is_some() {
        fields.extend(["r", "g", "b"]);
    }
    if cloud.normals().is_some() {
        fields.extend(["nx", "ny", "nz"]);
    }
    out.push_str(&format!("# fields: {}\n", fields.join(",")));
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        out.push_str(&format!("{},{},{}", p.x, p.y, p.z));
        if let Some(c) = cloud.colors() {
            out.push_str(&format!(",{},{},{}", c[i][0], c[i][1], c[i][2]));
        }
        if let Some(n) = cloud.normals() {
            out.push_str(&format!(",{},{},{}", n[i].x, n[i].y, n[i].z));
        }
        out.push('\n');
    }
    out
}

pub fn parse_cloud_text(text: &str, path: &Path) -> Result<PointCloud> {
    let mut normals_only = false;
    let mut points = Vec::new();
    let mut colors = Vec::new();
    let mut normals = Vec::new();
    let mut columns: Option<usize> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(list) = comment.trim().strip_prefix("fields:") {
                let f: Vec<&str> = list.split(',').map(str::trim).collect();
                normals_only = f.contains(&"nx") && !f.contains(&"r");
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(path, lineno + 1, e.to_string()))?;
        if !matches!(vals.len(), 3 | 6 | 9) {
            return Err(Error::parse(
                path,
                lineno + 1,
                format!("expected 3, 6 or 9 values, got {}", vals.len()),
            ));
        }
        if *columns.get_or_insert(vals.len()) != vals.len() {
            return Err(Error::parse(path, lineno + 1, "inconsistent column count"));
        }
        points.push(Vec3::new(vals[0], vals[1], vals[2]));
        match (vals.len(), normals_only) {
            (6, true) => normals.push(Vec3::new(vals[3], vals[4], vals[5])),
            (6, false) => colors.push([vals[3] as f32, vals[4] as f32, vals[5] as f32]),
            (9, _) => {
                colors.push([vals[3] as f32, vals[4] as f32, vals[5] as f32]);
                normals.push(Vec3::new(vals[6], vals[7], vals[8]));
            }
            _ => {}
        }
    }
    let wrap = |e: Error| Error::parse(path, 0, e.to_string());
    let mut cloud = PointCloud::new(points).map_err(wrap)?;
    if !colors.is_empty() {
        cloud = cloud.with_colors(colors).map_err(wrap)?;
    }
    if !normals.is_empty() {
        cloud = cloud.with_normals(normals).map_err(wrap)?;
    }
    Ok(cloud)
}

fn score_field(v: Option<bool>) -> &'static str {
    match v {
        None => "-1",
        Some(true) => "1",
        Some(false) => "0",
    }
}

pub fn format_grasps(grasps: &[Grasp]) -> String {
    let mut out = format!("{GRASP_HEADER}\n");
    for g in grasps {
        let (p, r) = (g.center(), g.orientation());
        let s = g.scores();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            p.x,
            p.y,
            p.z,
            r.x,
            r.y,
            r.z,
            g.angle(),
            score_field(s.map(|s| s.antipodal)),
            score_field(s.map(|s| s.collision_free)),
            score_field(s.map(|s| s.overall())),
        ));
    }
    out
}

pub fn write_grasps(path: &Path, grasps: &[Grasp]) -> Result<()> {
    write_bytes(path, format_grasps(grasps).as_bytes())
}

fn csv_reader(data: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(data)
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, expected: &str, path: &Path) -> Result<()> {
    let got: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if got.join(",") != expected {
        return Err(Error::parse(path, 1, format!("expected header `{expected}`")));
    }
    Ok(())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, path: &Path, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let s = rec
        .get(i)
        .ok_or_else(|| Error::parse(path, line, format!("missing column {i}")))?;
    s.parse::<T>()
        .map_err(|e| Error::parse(path, line, format!("column {i} `{s}`: {e}")))
}

fn parse_score(rec: &csv::StringRecord, i: usize, path: &Path, line: usize) -> Result<Option<bool>> {
    match field::<i32>(rec, i, path, line)? {
        -1 => Ok(None),
        0 => Ok(Some(false)),
        1 => Ok(Some(true)),
        v => Err(Error::parse(path, line, format!("score {v} not in {{-1, 0, 1}}"))),
    }
}

pub fn parse_grasps(data: &[u8], path: &Path) -> Result<Vec<Grasp>> {
    let mut rdr = csv_reader(data);
    check_header(&mut rdr, GRASP_HEADER, path)?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let f = |i| field::<f64>(&rec, i, path, line);
        let g = Grasp::new(Vec3::new(f(0)?, f(1)?, f(2)?), Vec3::new(f(3)?, f(4)?, f(5)?), f(6)?)
            .map_err(|e| Error::parse(path, line, e.to_string()))?;
        let (sa, sc, sg) = (
            parse_score(&rec, 7, path, line)?,
            parse_score(&rec, 8, path, line)?,
            parse_score(&rec, 9, path, line)?,
        );
        let g = match (sa, sc, sg) {
            (None, None, None) => g,
            (Some(a), Some(c), Some(s)) if s == (a && c) => g.with_scores(GraspScores {
                antipodal: a,
                collision_free: c,
            }),
            _ => {
                return Err(Error::parse(
                    path,
                    line,
                    "scores must be all -1 or satisfy sg = min(sa, sc)",
                ))
            }
        };
        out.push(g);
    }
    Ok(out)
}

pub fn read_grasps(path: &Path) -> Result<Vec<Grasp>> {
    parse_grasps(&read_bytes(path)?, path)
}

pub fn format_labels(field: &ConfidenceField) -> String {
    let mut out = format!("{LABEL_HEADER}\n");
    for (i, (c, l)) in field.values.iter().zip(&field.labels).enumerate() {
        out.push_str(&format!("{i},{c},{}\n", *l as u8));
    }
    out
}

pub fn write_labels(path: &Path, field: &ConfidenceField) -> Result<()> {
    write_bytes(path, format_labels(field).as_bytes())
}

/// Per-point `(c_pc, positive)` rows; indices must run `0..n` in order.
pub fn read_labels(path: &Path) -> Result<Vec<(f64, bool)>> {
    let data = read_bytes(path)?;
    let mut rdr = csv_reader(&data);
    check_header(&mut rdr, LABEL_HEADER, path)?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let idx: usize = field(&rec, 0, path, line)?;
        if idx != k {
            return Err(Error::parse(path, line, format!("expected index {k}, got {idx}")));
        }
        let c: f64 = field(&rec, 1, path, line)?;
        let label = match field::<u8>(&rec, 2, path, line)? {
            0 => false,
            1 => true,
            v => return Err(Error::parse(path, line, format!("label {v} not in {{0, 1}}"))),
        };
        out.push((c, label));
    }
    Ok(out)
}

pub fn format_grn_targets(targets: &[GrnTarget]) -> String {
    let mut out = format!("{GRN_TARGET_HEADER}\n");
    for t in targets {
        let r = &t.residuals;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            t.point_index, r.class, r.res_p.x, r.res_p.y, r.res_p.z, r.res_r.x, r.res_r.y, r.res_r.z, r.res_theta
        ));
    }
    out
}

pub fn write_grn_targets(path: &Path, targets: &[GrnTarget]) -> Result<()> {
    write_bytes(path, format_grn_targets(targets).as_bytes())
}

/// Region targets; the center point is looked up in `cloud`.
pub fn read_grn_targets(path: &Path, cloud: &PointCloud) -> Result<Vec<GrnTarget>> {
    let data = read_bytes(path)?;
    let mut rdr = csv_reader(&data);
    check_header(&mut rdr, GRN_TARGET_HEADER, path)?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let point_index: usize = field(&rec, 0, path, line)?;
        if point_index >= cloud.len() {
            return Err(Error::parse(
                path,
                line,
                format!("point index {point_index} out of range"),
            ));
        }
        let f = |i| field::<f64>(&rec, i, path, line);
        out.push(GrnTarget {
            point_index,
            center_point: *cloud.point(point_index),
            residuals: GrnResiduals {
                class: field(&rec, 1, path, line)?,
                res_p: Vec3::new(f(2)?, f(3)?, f(4)?),
                res_r: Vec3::new(f(5)?, f(6)?, f(7)?),
                res_theta: f(8)?,
            },
        });
    }
    Ok(out)
}

pub fn format_rn_targets(targets: &[RnTarget]) -> String {
    let mut out = format!("{RN_TARGET_HEADER}\n");
    for t in targets {
        match (t.positive, t.residuals) {
            (true, Some(r)) => out.push_str(&format!(
                "{},1,{},{},{},{},{},{},{}\n",
                t.proposal_index, r.res_p.x, r.res_p.y, r.res_p.z, r.res_r.x, r.res_r.y, r.res_r.z, r.res_theta
            )),
            _ => out.push_str(&format!("{},0,,,,,,,\n", t.proposal_index)),
        }
    }
    out
}

pub fn write_rn_targets(path: &Path, targets: &[RnTarget]) -> Result<()> {
    write_bytes(path, format_rn_targets(targets).as_bytes())
}

pub fn read_rn_targets(path: &Path) -> Result<Vec<RnTarget>> {
    let data = read_bytes(path)?;
    let mut rdr = csv_reader(&data);
    check_header(&mut rdr, RN_TARGET_HEADER, path)?;
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let proposal_index: usize = field(&rec, 0, path, line)?;
        let positive = match field::<u8>(&rec, 1, path, line)? {
            0 => false,
            1 => true,
            v => return Err(Error::parse(path, line, format!("y = {v} not in {{0, 1}}"))),
        };
        let residuals = if positive {
            let f = |i| field::<f64>(&rec, i, path, line);
            Some(RnResiduals {
                res_p: Vec3::new(f(2)?, f(3)?, f(4)?),
                res_r: Vec3::new(f(5)?, f(6)?, f(7)?),
                res_theta: f(8)?,
            })
        } else {
            None
        };
        out.push(RnTarget {
            proposal_index,
            positive,
            residuals,
        });
    }
    Ok(out)
}

/// Reads a rigid transform written as 12 row-major numbers `[R | t]`,
/// separated by whitespace or commas.
pub fn read_pose(path: &Path) -> Result<Isometry3<f64>> {
    let text = String::from_utf8(read_bytes(path)?).map_err(|_| Error::parse(path, 0, "not UTF-8 text"))?;
    parse_pose(&text).map_err(|msg| Error::parse(path, 0, msg))
}

pub fn parse_pose(text: &str) -> std::result::Result<Isometry3<f64>, String> {
    let vals: Vec<f64> = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| {
            l.split(|c: char| c == ',' || c.is_whitespace())
                .map(str::to_owned)
                .collect::<Vec<_>>()
        })
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    if vals.len() != 12 {
        return Err(format!("expected 12 numbers, found {}", vals.len()));
    }
    let m = Matrix3::new(
        vals[0], vals[1], vals[2], vals[4], vals[5], vals[6], vals[8], vals[9], vals[10],
    );
    let err = (m.transpose() * m - Matrix3::identity()).abs().max();
    if err > 1e-6 || m.determinant() < 0.0 {
        return Err("rotation block is not a proper rotation".into());
    }
    let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(m));
    Ok(Isometry3::from_parts(
        Translation3::new(vals[3], vals[7], vals[11]),
        rot,
    ))
}

pub fn format_pose(iso: &Isometry3<f64>) -> String {
    let m = iso.rotation.to_rotation_matrix().into_inner();
    let t = iso.translation.vector;
    let mut out = String::new();
    for r in 0..3 {
        out.push_str(&format!("{} {} {} {}\n", m[(r, 0)], m[(r, 1)], m[(r, 2)], t[r]));
    }
    out
}

/// Appends `text` to `writer`; small helper for report files.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut buf = Vec::with_capacity(text.len());
    buf.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    write_bytes(path, &buf)
}
