use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Domain;

/// Chirality pair `(w, z) ∈ {±1}²` carried by a triangle.
pub type Label = [i8; 2];

/// Tolerance on gradient components and area defects.
pub const MESH_TOL: f64 = 1e-9;

/// Continuous piecewise-affine potential `φ`; the chirality field is `∇φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshPotential {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub heights: Vec<f64>,
    pub domain: Domain,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl MeshPotential {
    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c).abs()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.corners(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Gradient of the affine interpolant on triangle `t`.
    pub fn gradient(&self, t: usize) -> [f64; 2] {
        let [ia, ib, ic] = self.triangles[t];
        let [a, b, c] = self.corners(t);
        let (h0, h1, h2) = (self.heights[ia], self.heights[ib], self.heights[ic]);
        let (e1, e2) = ([b[0] - a[0], b[1] - a[1]], [c[0] - a[0], c[1] - a[1]]);
        let det = e1[0] * e2[1] - e1[1] * e2[0];
        let (d1, d2) = (h1 - h0, h2 - h0);
        [(d1 * e2[1] - d2 * e1[1]) / det, (e1[0] * d2 - e2[0] * d1) / det]
    }

    /// Value of the interpolant at `p`, which must lie in triangle `t`.
    pub fn eval_in(&self, t: usize, p: [f64; 2]) -> f64 {
        let [ia, ..] = self.triangles[t];
        let a = self.vertices[ia];
        let g = self.gradient(t);
        self.heights[ia] + g[0] * (p[0] - a[0]) + g[1] * (p[1] - a[1])
    }

    fn check_structure(&self) -> Result<()> {
        self.domain.validate()?;
        if self.heights.len() != self.vertices.len() {
            return Err(Error::InvalidInput(format!(
                "{} heights for {} vertices",
                self.heights.len(),
                self.vertices.len()
            )));
        }
        if self.vertices.iter().flatten().chain(&self.heights).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite vertex or height".into()));
        }
        let bad: Vec<usize> = (0..self.triangles.len())
            .filter(|&t| self.triangles[t].iter().any(|&v| v >= self.vertices.len()))
            .collect();
        if !bad.is_empty() {
            return Err(Error::InvalidMesh { reason: "vertex index out of range".into(), triangles: bad });
        }
        Ok(())
    }
}

fn label_of(g: [f64; 2]) -> Option<Label> {
    let snap = |x: f64| {
        if (x - 1.0).abs() <= MESH_TOL {
            Some(1)
        } else if (x + 1.0).abs() <= MESH_TOL {
            Some(-1)
        } else {
            None
        }
    };
    Some([snap(g[0])?, snap(g[1])?])
}

/// Labels every triangle with its gradient in `{±1}²`.
pub fn validate_mesh(m: &MeshPotential) -> Result<Vec<Label>> {
    m.check_structure()?;
    if m.triangles.is_empty() {
        return Err(Error::InvalidMesh { reason: "no triangles".into(), triangles: vec![] });
    }
    let scale = m.domain.width.max(m.domain.height);
    let degenerate: Vec<usize> =
        (0..m.triangles.len()).filter(|&t| m.area(t) <= MESH_TOL * MESH_TOL * scale * scale).collect();
    if !degenerate.is_empty() {
        return Err(Error::InvalidMesh { reason: "degenerate triangle".into(), triangles: degenerate });
    }
    let outside: Vec<usize> = (0..m.triangles.len())
        .filter(|&t| m.corners(t).iter().any(|&p| !m.domain.contains(p)))
        .collect();
    if !outside.is_empty() {
        return Err(Error::InvalidMesh { reason: "triangle leaves the domain".into(), triangles: outside });
    }
    let covered: f64 = (0..m.triangles.len()).map(|t| m.area(t)).sum();
    let area = m.domain.area();
    if (covered - area).abs() > MESH_TOL * area.max(1.0) {
        return Err(Error::InvalidMesh {
            reason: format!("triangles cover area {covered}, domain has {area}"),
            triangles: vec![],
        });
    }
    let mut labels = Vec::with_capacity(m.triangles.len());
    let mut bad = Vec::new();
    for t in 0..m.triangles.len() {
        match label_of(m.gradient(t)) {
            Some(l) => labels.push(l),
            None => bad.push(t),
        }
    }
    if !bad.is_empty() {
        return Err(Error::InvalidMesh { reason: "gradient not in {±1}²".into(), triangles: bad });
    }
    Ok(labels)
}

/// Uniform bucket grid for point location.
#[derive(Debug, Clone)]
pub struct MeshLocator {
    origin: [f64; 2],
    cell: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl MeshLocator {
    pub fn new(m: &MeshPotential) -> Self {
        let n = ((m.triangles.len() as f64).sqrt().ceil() as usize).clamp(1, 512);
        let origin = m.domain.origin;
        let cell = [m.domain.width / n as f64, m.domain.height / n as f64];
        let mut buckets = vec![Vec::new(); n * n];
        let clampi = |x: f64| (x.floor().max(0.0) as usize).min(n - 1);
        for t in 0..m.triangles.len() {
            let cs = m.corners(t);
            let lo = [0, 1].map(|k| cs.iter().map(|c| c[k]).fold(f64::INFINITY, f64::min));
            let hi = [0, 1].map(|k| cs.iter().map(|c| c[k]).fold(f64::NEG_INFINITY, f64::max));
            let (i0, i1) = (clampi((lo[0] - origin[0]) / cell[0] - 1e-9), clampi((hi[0] - origin[0]) / cell[0] + 1e-9));
            let (j0, j1) = (clampi((lo[1] - origin[1]) / cell[1] - 1e-9), clampi((hi[1] - origin[1]) / cell[1] + 1e-9));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * n + i].push(t);
                }
            }
        }
        MeshLocator { origin, cell, dims: [n, n], buckets }
    }

    /// A triangle containing `p` (closed, with a small tolerance).
    pub fn locate(&self, m: &MeshPotential, p: [f64; 2]) -> Option<usize> {
        let fi = (p[0] - self.origin[0]) / self.cell[0];
        let fj = (p[1] - self.origin[1]) / self.cell[1];
        if !(fi > -1e-6 && fj > -1e-6 && fi < self.dims[0] as f64 + 1e-6 && fj < self.dims[1] as f64 + 1e-6) {
            return None;
        }
        let i = (fi.floor().max(0.0) as usize).min(self.dims[0] - 1);
        let j = (fj.floor().max(0.0) as usize).min(self.dims[1] - 1);
        let mut best: Option<(usize, f64)> = None;
        for &t in &self.buckets[j * self.dims[0] + i] {
            let [a, b, c] = m.corners(t);
            let area = signed_area(a, b, c);
            let bary = [signed_area(p, b, c) / area, signed_area(a, p, c) / area, signed_area(a, b, p) / area];
            let worst = bary.iter().copied().fold(f64::INFINITY, f64::min);
            if worst >= 0.0 {
                return Some(t);
            }
            if best.map_or(true, |(_, w)| worst > w) {
                best = Some((t, worst));
            }
        }
        best.filter(|&(_, w)| w > -1e-9).map(|(t, _)| t)
    }

    pub fn eval(&self, m: &MeshPotential, p: [f64; 2]) -> Option<f64> {
        self.locate(m, p).map(|t| m.eval_in(t, p))
    }
}
