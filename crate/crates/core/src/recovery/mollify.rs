use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::{gauss_legendre, Kernel, KernelShape};
use crate::continuum::{validate_mesh, MeshLocator, MeshPotential};
use crate::error::{Error, Result};
use crate::lattice::ScalarGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionMethod {
    /// `φ̄(p + t n) = 2φ(p) − φ(p − t n)` across each edge of the rectangle
    OddReflection,
    /// `φ̄(x) = φ(π(x))` with `π` the nearest-point projection onto Ω
    NearestPoint,
}

/// The mesh potential extended to the whole plane.
#[derive(Debug, Clone)]
pub struct Extension {
    mesh: MeshPotential,
    locator: MeshLocator,
    method: ExtensionMethod,
}

impl Extension {
    pub fn new(mesh: MeshPotential, method: ExtensionMethod) -> Result<Self> {
        validate_mesh(&mesh)?;
        if mesh.domain.polygon.is_some() && method == ExtensionMethod::OddReflection {
            return Err(Error::InvalidInput("odd reflection needs a rectangular domain".into()));
        }
        let locator = MeshLocator::new(&mesh);
        Ok(Extension { mesh, locator, method })
    }

    pub fn mesh(&self) -> &MeshPotential {
        &self.mesh
    }

    pub fn method(&self) -> ExtensionMethod {
        self.method
    }

    fn inside(&self, p: [f64; 2]) -> Result<f64> {
        self.locator.eval(&self.mesh, p).ok_or(Error::OutOfDomain(p[0], p[1]))
    }

    pub fn eval(&self, p: [f64; 2]) -> Result<f64> {
        let d = &self.mesh.domain;
        let lo = d.origin;
        let hi = d.max();
        match self.method {
            ExtensionMethod::NearestPoint => match &d.polygon {
                None => self.inside([p[0].clamp(lo[0], hi[0]), p[1].clamp(lo[1], hi[1])]),
                Some(poly) => {
                    if d.contains(p) {
                        return self.inside(p);
                    }
                    self.inside(project_to_polygon(poly, p))
                }
            },
            ExtensionMethod::OddReflection => {
                // (x, y) ↦ reflected data along x, then along y
                let fold = |x: f64, a: f64, b: f64| -> (f64, Option<(f64, f64)>) {
                    let w = b - a;
                    if x < a {
                        let t = (a - x).min(w);
                        (a, Some((a + t, 0.0)))
                    } else if x > b {
                        let t = (x - b).min(w);
                        (b, Some((b - t, 0.0)))
                    } else {
                        (x, None)
                    }
                };
                let along_x = |y: f64| -> Result<f64> {
                    let (edge, mirror) = fold(p[0], lo[0], hi[0]);
                    match mirror {
                        None => self.inside([p[0], y]),
                        Some((m, _)) => Ok(2.0 * self.inside([edge, y])? - self.inside([m, y])?),
                    }
                };
                let (edge, mirror) = fold(p[1], lo[1], hi[1]);
                match mirror {
                    None => along_x(p[1]),
                    Some((m, _)) => Ok(2.0 * along_x(edge)? - along_x(m)?),
                }
            }
        }
    }
}

fn project_to_polygon(poly: &[[f64; 2]], p: [f64; 2]) -> [f64; 2] {
    let n = poly.len();
    let mut best = (f64::INFINITY, p);
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len2 = dx * dx + dy * dy;
        let t = if len2 > 0.0 { (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0) } else { 0.0 };
        let q = [a[0] + t * dx, a[1] + t * dy];
        let d = (q[0] - p[0]).hypot(q[1] - p[1]);
        if d < best.0 {
            best = (d, q);
        }
    }
    best.1
}

/// Composite Gauss–Legendre rule on panels anchored to a global grid.
///
/// Nodes do not move with the evaluation point, so the quadrature value is a
/// smooth function of it even when the integrand has kinks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub panels_per_radius: usize,
    pub order: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule { panels_per_radius: 16, order: 4 }
    }
}

impl QuadratureRule {
    pub fn refined(self) -> Self {
        QuadratureRule { panels_per_radius: 2 * self.panels_per_radius, order: self.order }
    }
}

/// `φ^ε(x) = ∫ η(z) φ̄(x + εz) dz`, evaluated with a fixed-node rule.
#[derive(Debug, Clone)]
pub struct Mollified<'a> {
    ext: &'a Extension,
    kernel: Kernel,
    epsilon: f64,
    rule: QuadratureRule,
    panel: f64,
    gl: (Vec<f64>, Vec<f64>),
}

/// Nodes `(coordinate, weight)` of all panels meeting `[a, b]`.
fn nodes_between(a: f64, b: f64, panel: f64, gl: &(Vec<f64>, Vec<f64>)) -> Vec<(f64, f64)> {
    let k0 = (a / panel).floor() as i64;
    let k1 = (b / panel).floor() as i64;
    let mut out = Vec::with_capacity(((k1 - k0 + 1) as usize) * gl.0.len());
    for k in k0..=k1 {
        let mid = (k as f64 + 0.5) * panel;
        for (x, w) in gl.0.iter().zip(&gl.1) {
            out.push((mid + 0.5 * panel * x, 0.5 * panel * w));
        }
    }
    out
}

impl<'a> Mollified<'a> {
    pub fn new(ext: &'a Extension, kernel: Kernel, epsilon: f64, rule: QuadratureRule) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
        }
        if rule.panels_per_radius == 0 || rule.order == 0 {
            return Err(Error::InvalidInput("quadrature rule needs panels and nodes".into()));
        }
        let panel = kernel.radius * epsilon / rule.panels_per_radius as f64;
        Ok(Mollified { ext, kernel, epsilon, rule, panel, gl: gauss_legendre(rule.order) })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn support(&self) -> f64 {
        self.kernel.radius * self.epsilon
    }

    /// Normalized 1D weights of the product kernel around `x`.
    fn weights_1d(&self, x: f64, nodes: &[(f64, f64)]) -> Vec<(usize, f64)> {
        let r = self.support();
        let mut out: Vec<(usize, f64)> = nodes
            .iter()
            .enumerate()
            .filter(|(_, (y, _))| (y - x).abs() < r)
            .map(|(a, (y, w))| (a, self.kernel.factor((y - x) / self.epsilon) * w))
            .collect();
        let mass: f64 = out.iter().map(|p| p.1).sum();
        for p in &mut out {
            p.1 /= mass;
        }
        out
    }

    pub fn eval(&self, p: [f64; 2]) -> Result<f64> {
        let r = self.support();
        let xs = nodes_between(p[0] - r, p[0] + r, self.panel, &self.gl);
        let ys = nodes_between(p[1] - r, p[1] + r, self.panel, &self.gl);
        match self.kernel.shape {
            KernelShape::Product => {
                let wx = self.weights_1d(p[0], &xs);
                let wy = self.weights_1d(p[1], &ys);
                let mut total = 0.0;
                for &(b, vb) in &wy {
                    let mut row = 0.0;
                    for &(a, va) in &wx {
                        row += va * self.ext.eval([xs[a].0, ys[b].0])?;
                    }
                    total += vb * row;
                }
                Ok(total)
            }
            KernelShape::Radial => {
                let (mut num, mut den) = (0.0, 0.0);
                for &(y, wy) in &ys {
                    for &(x, wx) in &xs {
                        let k = self.kernel.eval([(x - p[0]) / self.epsilon, (y - p[1]) / self.epsilon]) * wx * wy;
                        if k > 0.0 {
                            num += k * self.ext.eval([x, y])?;
                            den += k;
                        }
                    }
                }
                Ok(num / den)
            }
        }
    }

    /// `φ^ε(λi, λj)` on an `nx × ny` lattice anchored at the origin.
    pub fn sample_lattice(&self, nx: usize, ny: usize, lambda: f64) -> Result<ScalarGrid<f64>> {
        if self.kernel.shape == KernelShape::Radial {
            let vals: Result<Vec<f64>> = (0..nx * ny)
                .into_par_iter()
                .map(|k| self.eval([lambda * (k % nx) as f64, lambda * (k / nx) as f64]))
                .collect();
            return ScalarGrid::new(nx, ny, lambda, vals?);
        }
        let r = self.support();
        let xs = nodes_between(-r, lambda * (nx - 1) as f64 + r, self.panel, &self.gl);
        let ys = nodes_between(-r, lambda * (ny - 1) as f64 + r, self.panel, &self.gl);
        let field: Result<Vec<Vec<f64>>> =
            ys.par_iter().map(|&(y, _)| xs.iter().map(|&(x, _)| self.ext.eval([x, y])).collect()).collect();
        let field = field?;
        let wx: Vec<Vec<(usize, f64)>> = (0..nx).map(|i| self.weights_1d(lambda * i as f64, &xs)).collect();
        let wy: Vec<Vec<(usize, f64)>> = (0..ny).map(|j| self.weights_1d(lambda * j as f64, &ys)).collect();
        // convolve along x for every node row, then along y
        let rows: Vec<Vec<f64>> = field
            .par_iter()
            .map(|row| wx.iter().map(|w| w.iter().map(|&(a, v)| v * row[a]).sum()).collect())
            .collect();
        let out: Vec<Vec<f64>> = wy
            .par_iter()
            .map(|w| (0..nx).map(|i| w.iter().map(|&(b, v)| v * rows[b][i]).sum()).collect())
            .collect();
        ScalarGrid::new(nx, ny, lambda, out.into_iter().flatten().collect())
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }
}
