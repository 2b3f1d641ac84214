//! Flat `key = value` configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; an empty
//! file yields the defaults. Files can be layered: later files override keys
//! set by earlier ones.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::anchor::GrnLossWeights;
use crate::error::{Error, Result};
use crate::geom::{GripperModel, Vec3, WORLD_UP};
use crate::quality::{Scorer, DEFAULT_CONTACT_TOL, DEFAULT_MU};
use crate::refine::RnLossWeights;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub gripper: GripperModel,
    pub mu: f64,
    pub contact_tol: f64,
    pub d_th: f64,
    pub c_t: f64,
    pub k1: usize,
    pub region_size: usize,
    pub m1: usize,
    /// Ball-query radius; `None` means half the largest gripper extent.
    pub phi: Option<f64>,
    pub n_points: usize,
    pub min_points: usize,
    pub grn_weights: GrnLossWeights,
    pub rn_weights: RnLossWeights,
    pub normal_k: usize,
    pub positives_per_object: usize,
    pub view_grid_spacing: f64,
    pub up: Vec3,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            gripper: GripperModel::default(),
            mu: DEFAULT_MU,
            contact_tol: DEFAULT_CONTACT_TOL,
            d_th: 0.02,
            c_t: 0.6,
            k1: 64,
            region_size: 256,
            m1: 8,
            phi: None,
            n_points: 20000,
            min_points: 50,
            grn_weights: GrnLossWeights::default(),
            rn_weights: RnLossWeights::default(),
            normal_k: 30,
            positives_per_object: 400,
            view_grid_spacing: 0.005,
            up: WORLD_UP,
        }
    }
}

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "finger_length",
    "finger_thickness",
    "finger_height",
    "max_opening",
    "base_depth",
    "mu",
    "contact_tol",
    "d_th",
    "c_t",
    "k1",
    "region_size",
    "m1",
    "phi",
    "n_points",
    "min_points",
    "grn_lambda_cls",
    "grn_lambda_p",
    "grn_lambda_r",
    "grn_lambda_theta",
    "rn_lambda_cls",
    "rn_lambda_p",
    "rn_lambda_r",
    "rn_lambda_theta",
    "normal_k",
    "positives_per_object",
    "view_grid_spacing",
    "up",
];

fn range_error(key: &str, value: &str, range: &str) -> Error {
    Error::OutOfRange {
        key: key.into(),
        value: value.into(),
        range: range.into(),
    }
}

fn parse_f64(key: &str, value: &str, min: f64, strict: bool) -> Result<f64> {
    match value.parse::<f64>() {
        Ok(v) if v.is_finite() && (v > min || (!strict && v == min)) => Ok(v),
        _ => {
            let op = if strict { ">" } else { ">=" };
            Err(range_error(key, value, &format!("a finite number {op} {min}")))
        }
    }
}

fn parse_usize(key: &str, value: &str, min: usize) -> Result<usize> {
    match value.parse::<usize>() {
        Ok(v) if v >= min => Ok(v),
        _ => Err(range_error(key, value, &format!("an integer >= {min}"))),
    }
}

fn parse_vec3(key: &str, value: &str) -> Result<Vec3> {
    let parts: Vec<f64> = value
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| range_error(key, value, "three comma-separated numbers"))?;
    match parts.as_slice() {
        [x, y, z] if Vec3::new(*x, *y, *z).norm() > 1e-9 => Ok(Vec3::new(*x, *y, *z).normalize()),
        _ => Err(range_error(key, value, "a non-zero vector x,y,z")),
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        Config::default().overlay_file(path)
    }

    pub fn overlay_file(self, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.overlay(&text).map_err(|e| match e {
            Error::Parse { line, msg, .. } => Error::parse(path, line, msg),
            other => other,
        })
    }

    /// Applies the assignments in `text` on top of `self`, then validates.
    pub fn overlay(mut self, text: &str) -> Result<Self> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::parse(
                    "<config>",
                    lineno + 1,
                    format!("expected `key = value`, got `{line}`"),
                ));
            };
            self.set(key.trim(), value.trim())?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Config::default().overlay(text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if !KEYS.contains(&key) {
            return Err(Error::UnknownKey(key.into()));
        }
        if value.is_empty() {
            return Err(Error::MissingKey(key.into()));
        }
        let pos = |min| parse_f64(key, value, min, true);
        let nonneg = |min| parse_f64(key, value, min, false);
        match key {
            "finger_length" => self.gripper.finger_length = pos(0.0)?,
            "finger_thickness" => self.gripper.finger_thickness = pos(0.0)?,
            "finger_height" => self.gripper.finger_height = pos(0.0)?,
            "max_opening" => self.gripper.max_opening = pos(0.0)?,
            "base_depth" => self.gripper.base_depth = nonneg(0.0)?,
            "mu" => self.mu = nonneg(0.0)?,
            "contact_tol" => self.contact_tol = nonneg(0.0)?,
            "d_th" => self.d_th = pos(0.0)?,
            "c_t" => self.c_t = nonneg(0.0)?,
            "k1" => self.k1 = parse_usize(key, value, 1)?,
            "region_size" => self.region_size = parse_usize(key, value, 1)?,
            "m1" => {
                self.m1 = match value.parse::<usize>() {
                    Ok(v @ (6 | 8)) => v,
                    _ => return Err(range_error(key, value, "6 or 8")),
                }
            }
            "phi" => self.phi = if value == "auto" { None } else { Some(pos(0.0)?) },
            "n_points" => self.n_points = parse_usize(key, value, 1)?,
            "min_points" => self.min_points = parse_usize(key, value, 1)?,
            "grn_lambda_cls" => self.grn_weights.cls = nonneg(0.0)?,
            "grn_lambda_p" => self.grn_weights.p = nonneg(0.0)?,
            "grn_lambda_r" => self.grn_weights.r = nonneg(0.0)?,
            "grn_lambda_theta" => self.grn_weights.theta = nonneg(0.0)?,
            "rn_lambda_cls" => self.rn_weights.cls = nonneg(0.0)?,
            "rn_lambda_p" => self.rn_weights.p = nonneg(0.0)?,
            "rn_lambda_r" => self.rn_weights.r = nonneg(0.0)?,
            "rn_lambda_theta" => self.rn_weights.theta = nonneg(0.0)?,
            "normal_k" => self.normal_k = parse_usize(key, value, 3)?,
            "positives_per_object" => self.positives_per_object = parse_usize(key, value, 1)?,
            "view_grid_spacing" => self.view_grid_spacing = pos(0.0)?,
            "up" => self.up = parse_vec3(key, value)?,
            _ => unreachable!("key list and match arms agree"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.gripper.validate()
    }

    pub fn phi(&self) -> f64 {
        self.phi.unwrap_or_else(|| self.gripper.scale() / 2.0)
    }

    pub fn scorer(&self) -> Scorer {
        Scorer {
            gripper: self.gripper,
            mu: self.mu,
            contact_tol: self.contact_tol,
            up: self.up,
        }
    }

    /// Canonical `key = value` listing of every setting, with `phi` resolved.
    /// Parsing the echo gives back an equivalent config.
    pub fn echo(&self) -> String {
        let g = &self.gripper;
        let (w, v) = (&self.grn_weights, &self.rn_weights);
        let values: Vec<String> = vec![
            g.finger_length.to_string(),
            g.finger_thickness.to_string(),
            g.finger_height.to_string(),
            g.max_opening.to_string(),
            g.base_depth.to_string(),
            self.mu.to_string(),
            self.contact_tol.to_string(),
            self.d_th.to_string(),
            self.c_t.to_string(),
            self.k1.to_string(),
            self.region_size.to_string(),
            self.m1.to_string(),
            self.phi().to_string(),
            self.n_points.to_string(),
            self.min_points.to_string(),
            w.cls.to_string(),
            w.p.to_string(),
            w.r.to_string(),
            w.theta.to_string(),
            v.cls.to_string(),
            v.p.to_string(),
            v.r.to_string(),
            v.theta.to_string(),
            self.normal_k.to_string(),
            self.positives_per_object.to_string(),
            self.view_grid_spacing.to_string(),
            format!("{},{},{}", self.up.x, self.up.y, self.up.z),
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    /// Hex SHA-256 of [`Config::echo`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.echo().as_bytes()))
    }
}
