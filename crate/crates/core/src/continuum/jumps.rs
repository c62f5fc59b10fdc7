use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use super::mesh::{validate_mesh, Label, MeshPotential, MESH_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpSegment {
    pub p: [f64; 2],
    pub q: [f64; 2],
    /// Unit normal pointing from the `minus` side to the `plus` side.
    pub normal: [f64; 2],
    pub plus: Label,
    pub minus: Label,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JumpClass {
    /// only `w` jumps, across a line with horizontal normal
    J1,
    /// only `z` jumps, across a line with vertical normal
    J2,
    /// both jump, across a diagonal
    J3,
    Inadmissible,
}

const S: f64 = FRAC_1_SQRT_2;

/// The twelve admissible jump triples `(trace⁺, trace⁻, ν)`, one per swap class.
pub const ADMISSIBLE_TRIPLES: [(Label, Label, [f64; 2]); 12] = [
    ([1, 1], [-1, 1], [1.0, 0.0]),
    ([1, 1], [-1, 1], [-1.0, 0.0]),
    ([1, -1], [-1, -1], [1.0, 0.0]),
    ([1, -1], [-1, -1], [-1.0, 0.0]),
    ([1, 1], [1, -1], [0.0, 1.0]),
    ([1, 1], [1, -1], [0.0, -1.0]),
    ([-1, 1], [-1, -1], [0.0, 1.0]),
    ([-1, 1], [-1, -1], [0.0, -1.0]),
    ([1, 1], [-1, -1], [S, S]),
    ([1, 1], [-1, -1], [-S, -S]),
    ([-1, 1], [1, -1], [-S, S]),
    ([-1, 1], [1, -1], [S, -S]),
];

/// The eight candidate normals: axis and diagonal directions.
pub fn candidate_normals() -> [[f64; 2]; 8] {
    [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0], [S, S], [-S, -S], [-S, S], [S, -S]]
}

pub const LABELS: [Label; 4] = [[1, 1], [-1, 1], [1, -1], [-1, -1]];

/// Rank-one test: the jump `plus − minus` must be nonzero and parallel to `ν`.
pub fn classify_triple(plus: Label, minus: Label, nu: [f64; 2]) -> JumpClass {
    let n = (nu[0] * nu[0] + nu[1] * nu[1]).sqrt();
    if (n - 1.0).abs() > MESH_TOL || plus.iter().chain(&minus).any(|&s| s != 1 && s != -1) {
        return JumpClass::Inadmissible;
    }
    let jw = (plus[0] - minus[0]) as f64;
    let jz = (plus[1] - minus[1]) as f64;
    let jn = (jw * jw + jz * jz).sqrt();
    if jn == 0.0 || (jw * nu[1] - jz * nu[0]).abs() > MESH_TOL * jn {
        return JumpClass::Inadmissible;
    }
    match (jw != 0.0, jz != 0.0) {
        (true, false) => JumpClass::J1,
        (false, true) => JumpClass::J2,
        _ => JumpClass::J3,
    }
}

/// Surface tension `σ = (4/3)(|[w]||ν¹| + |[z]||ν²|)` of an admissible triple.
pub fn sigma(plus: Label, minus: Label, nu: [f64; 2]) -> Result<f64> {
    if classify_triple(plus, minus, nu) == JumpClass::Inadmissible {
        return Err(Error::InvalidInput(format!("inadmissible jump triple {plus:?}, {minus:?}, {nu:?}")));
    }
    let jw = (plus[0] - minus[0]).abs() as f64;
    let jz = (plus[1] - minus[1]).abs() as f64;
    Ok(4.0 / 3.0 * (jw * nu[0].abs() + jz * nu[1].abs()))
}

/// Representative of the swap class `(a, b, ν) ~ (b, a, −ν)`.
pub fn canonical_triple(plus: Label, minus: Label, nu: [f64; 2]) -> (Label, Label, [f64; 2]) {
    if nu[0] > MESH_TOL || (nu[0].abs() <= MESH_TOL && nu[1] > 0.0) {
        (plus, minus, nu)
    } else {
        (minus, plus, [-nu[0], -nu[1]])
    }
}

/// All admissible triples over the candidate normals, one per swap class.
pub fn enumerate_admissible() -> Vec<(Label, Label, [f64; 2], JumpClass)> {
    let mut out = Vec::new();
    for a in LABELS {
        for b in LABELS {
            for nu in candidate_normals() {
                let c = classify_triple(a, b, nu);
                if c == JumpClass::Inadmissible {
                    continue;
                }
                let (p, m, n) = canonical_triple(a, b, nu);
                if !out.iter().any(|&(p2, m2, n2, _): &(Label, Label, [f64; 2], JumpClass)| {
                    p2 == p && m2 == m && (n2[0] - n[0]).abs() < 1e-12 && (n2[1] - n[1]).abs() < 1e-12
                }) {
                    out.push((p, m, n, c));
                }
            }
        }
    }
    out
}

struct RawEdge {
    plus: Label,
    minus: Label,
    normal: [f64; 2],
    offset: f64,
    s0: f64,
    s1: f64,
}

/// Edges between differently labelled triangles, merged into maximal collinear segments.
pub fn jump_set(m: &MeshPotential) -> Result<Vec<JumpSegment>> {
    let labels = validate_mesh(m)?;
    let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (t, tri) in m.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            edges.entry((a.min(b), a.max(b))).or_default().push(t);
        }
    }
    let mut raw = Vec::new();
    for (&(a, b), ts) in &edges {
        if ts.len() != 2 || labels[ts[0]] == labels[ts[1]] {
            continue;
        }
        let (p, q) = (m.vertices[a], m.vertices[b]);
        let len = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
        let mut nu = [-(q[1] - p[1]) / len, (q[0] - p[0]) / len];
        if !(nu[0] > MESH_TOL || (nu[0].abs() <= MESH_TOL && nu[1] > 0.0)) {
            nu = [-nu[0], -nu[1]];
        }
        let c = m.centroid(ts[0]);
        let side = (c[0] - p[0]) * nu[0] + (c[1] - p[1]) * nu[1];
        let (plus, minus) = if side > 0.0 { (labels[ts[0]], labels[ts[1]]) } else { (labels[ts[1]], labels[ts[0]]) };
        let tangent = [-nu[1], nu[0]];
        let (sp, sq) = (p[0] * tangent[0] + p[1] * tangent[1], q[0] * tangent[0] + q[1] * tangent[1]);
        raw.push(RawEdge {
            plus,
            minus,
            normal: nu,
            offset: p[0] * nu[0] + p[1] * nu[1],
            s0: sp.min(sq),
            s1: sp.max(sq),
        });
    }
    let scale = m.domain.width.max(m.domain.height);
    let tol = MESH_TOL * scale.max(1.0);
    raw.sort_by(|x, y| {
        (x.plus, x.minus)
            .cmp(&(y.plus, y.minus))
            .then(x.normal[0].total_cmp(&y.normal[0]))
            .then(x.normal[1].total_cmp(&y.normal[1]))
            .then(x.offset.total_cmp(&y.offset))
            .then(x.s0.total_cmp(&y.s0))
    });
    let mut merged: Vec<RawEdge> = Vec::new();
    for e in raw {
        if let Some(last) = merged.last_mut() {
            let same_line = last.plus == e.plus
                && last.minus == e.minus
                && (last.normal[0] - e.normal[0]).abs() <= MESH_TOL
                && (last.normal[1] - e.normal[1]).abs() <= MESH_TOL
                && (last.offset - e.offset).abs() <= tol;
            if same_line && e.s0 <= last.s1 + tol {
                last.s1 = last.s1.max(e.s1);
                continue;
            }
        }
        merged.push(e);
    }
    let segments = merged
        .into_iter()
        .map(|e| {
            let t = [-e.normal[1], e.normal[0]];
            let base = [e.normal[0] * e.offset, e.normal[1] * e.offset];
            JumpSegment {
                p: [base[0] + t[0] * e.s0, base[1] + t[1] * e.s0],
                q: [base[0] + t[0] * e.s1, base[1] + t[1] * e.s1],
                normal: e.normal,
                plus: e.plus,
                minus: e.minus,
                length: e.s1 - e.s0,
            }
        })
        .collect();
    Ok(segments)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TotalVariations {
    pub d1w: f64,
    pub d2w: f64,
    pub d1z: f64,
    pub d2z: f64,
}

impl TotalVariations {
    /// `|D₂w| ≤ |D₂z|` and `|D₁z| ≤ |D₁w|`.
    pub fn satisfies_bootstrap(&self) -> bool {
        let tol = 1e-12 * (1.0 + self.d1w + self.d2z);
        self.d2w <= self.d2z + tol && self.d1z <= self.d1w + tol
    }
}

pub fn total_variations_of(segments: &[JumpSegment]) -> TotalVariations {
    let mut tv = TotalVariations { d1w: 0.0, d2w: 0.0, d1z: 0.0, d2z: 0.0 };
    for s in segments {
        let jw = (s.plus[0] - s.minus[0]).abs() as f64;
        let jz = (s.plus[1] - s.minus[1]).abs() as f64;
        tv.d1w += jw * s.normal[0].abs() * s.length;
        tv.d2w += jw * s.normal[1].abs() * s.length;
        tv.d1z += jz * s.normal[0].abs() * s.length;
        tv.d2z += jz * s.normal[1].abs() * s.length;
    }
    tv
}

pub fn total_variations(m: &MeshPotential) -> Result<TotalVariations> {
    Ok(total_variations_of(&jump_set(m)?))
}

/// `H(w, z) = (4/3)(|D₁w|(Ω) + |D₂z|(Ω))`
pub fn limit_energy(m: &MeshPotential) -> Result<f64> {
    let tv = total_variations(m)?;
    Ok(4.0 / 3.0 * (tv.d1w + tv.d2z))
}

/// The same limit energy as `Σ σ · length` over the jump segments.
pub fn limit_energy_by_sigma(m: &MeshPotential) -> Result<f64> {
    let mut total = 0.0;
    for s in jump_set(m)? {
        total += sigma(s.plus, s.minus, s.normal)? * s.length;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classify_examples() {
        assert_eq!(classify_triple([1, 1], [-1, 1], [1.0, 0.0]), JumpClass::J1);
        assert_eq!(classify_triple([1, 1], [-1, -1], [S, S]), JumpClass::J3);
        assert_eq!(classify_triple([1, 1], [-1, 1], [0.0, 1.0]), JumpClass::Inadmissible);
        assert_eq!(classify_triple([1, 1], [1, 1], [1.0, 0.0]), JumpClass::Inadmissible);
        assert_eq!(classify_triple([1, 1], [-1, 1], [2.0, 0.0]), JumpClass::Inadmissible);
    }

    #[test]
    fn sigma_values() {
        assert!((sigma([1, 1], [-1, 1], [1.0, 0.0]).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        assert!((sigma([1, 1], [1, -1], [0.0, 1.0]).unwrap() - 8.0 / 3.0).abs() < 1e-15);
        let d = sigma([1, 1], [-1, -1], [S, S]).unwrap();
        assert!((d - 2f64.sqrt() * 8.0 / 3.0).abs() < 1e-14);
        assert!(sigma([1, 1], [-1, 1], [0.0, 1.0]).is_err());
    }
}
