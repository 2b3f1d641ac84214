//! Synthetic object clouds with analytic outward normals.

use std::f64::consts::PI;

use crate::geom::{PointCloud, Vec3};

/// Surface samples of an axis-aligned box centered at the origin.
///
/// Each face is sampled on a cell-centered grid with roughly `spacing`
/// between samples, so no point sits on an edge.
pub fn box_cloud(dims: Vec3, spacing: f64) -> PointCloud {
    assert!(spacing > 0.0 && dims.iter().all(|&d| d > 0.0));
    let half = dims / 2.0;
    let mut points = Vec::new();
    let mut normals = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        let nu = (dims[u] / spacing).round().max(1.0) as usize;
        let nv = (dims[v] / spacing).round().max(1.0) as usize;
        for sign in [1.0, -1.0] {
            for i in 0..nu {
                for j in 0..nv {
                    let mut p = Vec3::zeros();
                    p[axis] = sign * half[axis];
                    p[u] = -half[u] + dims[u] * (i as f64 + 0.5) / nu as f64;
                    p[v] = -half[v] + dims[v] * (j as f64 + 0.5) / nv as f64;
                    let mut n = Vec3::zeros();
                    n[axis] = sign;
                    points.push(p);
                    normals.push(n);
                }
            }
        }
    }
    PointCloud::new(points)
        .and_then(|c| c.with_normals(normals))
        .expect("box samples are finite")
}

/// `n` points of a Fibonacci lattice on a sphere centered at the origin.
pub fn sphere_cloud(radius: f64, n: usize) -> PointCloud {
    assert!(radius > 0.0);
    let golden = PI * (3.0 - 5f64.sqrt());
    let normals: Vec<Vec3> = (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            Vec3::new(r * libm::cos(phi), r * libm::sin(phi), z).normalize()
        })
        .collect();
    let points = normals.iter().map(|n| n * radius).collect();
    PointCloud::new(points)
        .and_then(|c| c.with_normals(normals))
        .expect("sphere samples are finite")
}
