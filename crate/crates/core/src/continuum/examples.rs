use std::f64::consts::SQRT_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::mesh::MeshPotential;
use crate::error::{Error, Result};
use crate::lattice::Domain;

/// Axis breakpoints are rounded to multiples of this, keeping ±1 slopes exact.
pub const SNAP: f64 = 1.0 / (1u64 << 20) as f64;

fn snap(x: f64) -> f64 {
    (x / SNAP).round() * SNAP
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleKind {
    /// `φ = w x + z y`, no jumps
    Affine(i8, i8),
    /// one w-wall at mid-width
    VerticalWall,
    /// one z-wall at mid-height
    HorizontalWall,
    /// a diagonal wall of length `min(width, height)` cutting off the lower-left corner
    DiagonalWall,
    /// a w-wall and a z-wall crossing at the centre
    FourQuadrant,
    /// `n` equally spaced parallel w-walls
    Laminate(usize),
    /// a w-wall, a z-wall and a diagonal wall meeting at one point
    TripleJunction,
}

impl fmt::Display for ExampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExampleKind::Affine(w, z) => write!(f, "affine({w},{z})"),
            ExampleKind::VerticalWall => f.write_str("vertical_wall"),
            ExampleKind::HorizontalWall => f.write_str("horizontal_wall"),
            ExampleKind::DiagonalWall => f.write_str("diagonal_wall"),
            ExampleKind::FourQuadrant => f.write_str("four_quadrant"),
            ExampleKind::Laminate(n) => write!(f, "laminate({n})"),
            ExampleKind::TripleJunction => f.write_str("triple_junction"),
        }
    }
}

impl FromStr for ExampleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let arg = |prefix: &str| -> Option<String> {
            s.strip_prefix(prefix)
                .map(|r| r.trim_start_matches(['(', ':', '=']).trim_end_matches(')').to_string())
        };
        Ok(match s.as_str() {
            "vertical_wall" => ExampleKind::VerticalWall,
            "horizontal_wall" => ExampleKind::HorizontalWall,
            "diagonal_wall" => ExampleKind::DiagonalWall,
            "four_quadrant" => ExampleKind::FourQuadrant,
            "triple_junction" => ExampleKind::TripleJunction,
            _ => {
                if let Some(n) = arg("laminate") {
                    let n = n.parse().map_err(|_| Error::InvalidInput(format!("bad laminate count in {s}")))?;
                    ExampleKind::Laminate(n)
                } else if let Some(a) = arg("affine") {
                    let parts: Vec<i8> = a.split(',').filter_map(|p| p.trim().parse().ok()).collect();
                    match parts[..] {
                        [w, z] if w.abs() == 1 && z.abs() == 1 => ExampleKind::Affine(w, z),
                        _ => return Err(Error::InvalidInput(format!("bad affine labels in {s}"))),
                    }
                } else {
                    return Err(Error::InvalidInput(format!("unknown example kind {s}")));
                }
            }
        })
    }
}

/// Tensor-product mesh through the given breakpoints, each rectangle cut along
/// its lower-left to upper-right diagonal.
fn tensor_mesh(domain: &Domain, xs: &[f64], ys: &[f64], phi: impl Fn(f64, f64) -> f64) -> MeshPotential {
    let mut vertices = Vec::with_capacity(xs.len() * ys.len());
    for &y in ys {
        for &x in xs {
            vertices.push([x, y]);
        }
    }
    let heights = vertices.iter().map(|v| phi(v[0], v[1])).collect();
    let nx = xs.len();
    let mut triangles = Vec::new();
    for j in 0..ys.len() - 1 {
        for i in 0..nx - 1 {
            let a = j * nx + i;
            let (b, c, d) = (a + 1, a + nx + 1, a + nx);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    MeshPotential { vertices, triangles, heights, domain: domain.clone() }
}

pub fn build_example(kind: ExampleKind, domain: &Domain) -> Result<MeshPotential> {
    domain.validate()?;
    if domain.polygon.is_some() {
        return Err(Error::InvalidInput("examples are built on rectangles".into()));
    }
    let [x0, y0] = domain.origin;
    let (w, h) = (domain.width, domain.height);
    let [x1, y1] = domain.max();
    let (cx, cy) = (snap(x0 + w / 2.0), snap(y0 + h / 2.0));
    let mesh = match kind {
        ExampleKind::Affine(a, b) => {
            let (a, b) = (a.signum() as f64, b.signum() as f64);
            tensor_mesh(domain, &[x0, cx, x1], &[y0, cy, y1], |x, y| a * (x - x0) + b * (y - y0))
        }
        ExampleKind::VerticalWall => {
            tensor_mesh(domain, &[x0, cx, x1], &[y0, cy, y1], |x, y| (y - y0) + (x - cx).abs())
        }
        ExampleKind::HorizontalWall => {
            tensor_mesh(domain, &[x0, cx, x1], &[y0, cy, y1], |x, y| (x - x0) + (y - cy).abs())
        }
        ExampleKind::FourQuadrant => {
            tensor_mesh(domain, &[x0, cx, x1], &[y0, cy, y1], |x, y| (x - cx).abs() + (y - cy).abs())
        }
        ExampleKind::Laminate(n) => {
            if n == 0 {
                return Err(Error::InvalidInput("laminate needs at least one wall".into()));
            }
            let mut xs: Vec<f64> = (0..=n + 1).map(|k| snap(x0 + w * k as f64 / (n + 1) as f64)).collect();
            xs[0] = x0;
            xs[n + 1] = x1;
            let walls = xs[1..=n].to_vec();
            // slope −1 left of the first wall, alternating afterwards
            let profile = move |x: f64| {
                let mut v = 0.0;
                let mut slope = -1.0;
                let mut left = x0;
                for &c in &walls {
                    if x <= c {
                        break;
                    }
                    v += slope * (c - left);
                    left = c;
                    slope = -slope;
                }
                v + slope * (x - left)
            };
            tensor_mesh(domain, &xs, &[y0, cy, y1], |x, y| profile(x) + (y - y0))
        }
        ExampleKind::TripleJunction => {
            // φ = max(x + y, s − x + y, 1.6s − x − y) in local coordinates
            let s = w.min(h);
            let phi = move |x: f64, y: f64| {
                let (x, y) = (x - x0, y - y0);
                (x + y).max(s - x + y).max(1.6 * s - x - y)
            };
            let vertices = vec![
                [x0, y0],
                [x0 + 0.8 * s, y0],
                [x0 + 0.5 * s, y0 + 0.3 * s],
                [x0, y0 + 0.3 * s],
                [x1, y0],
                [x1, y1],
                [x0 + 0.5 * s, y1],
                [x0, y1],
            ];
            let heights = vertices.iter().map(|v| phi(v[0], v[1])).collect();
            let triangles = vec![
                [0, 1, 2],
                [0, 2, 3],
                [1, 4, 5],
                [1, 5, 6],
                [1, 6, 2],
                [3, 2, 6],
                [3, 6, 7],
            ];
            MeshPotential { vertices, triangles, heights, domain: domain.clone() }
        }
        ExampleKind::DiagonalWall => {
            let s = w.min(h) / SQRT_2;
            let phi = |x: f64, y: f64| ((x - x0) + (y - y0) - s).abs();
            let vertices = vec![[x0, y0], [x0 + s, y0], [x0, y0 + s], [x1, y0], [x1, y1], [x0, y1]];
            let heights = vertices.iter().map(|v| phi(v[0], v[1])).collect();
            // corner triangle, then a fan over the remaining convex pentagon
            let triangles = vec![[0, 1, 2], [1, 3, 4], [1, 4, 2], [2, 4, 5]];
            MeshPotential { vertices, triangles, heights, domain: domain.clone() }
        }
    };
    Ok(mesh)
}
