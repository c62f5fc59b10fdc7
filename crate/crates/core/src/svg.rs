//! SVG rendering of labelled meshes and chirality heatmaps.

use std::fmt::Write;

use crate::continuum::{jump_set, validate_mesh, Label, MeshPotential};
use crate::error::Result;
use crate::lattice::ScalarGrid;
use crate::scalar::Real;

const SIZE: f64 = 480.0;
const PAD: f64 = 12.0;

/// One colour per ground state.
pub fn label_color(l: Label) -> &'static str {
    match l {
        [1, 1] => "#4477aa",
        [-1, 1] => "#ee6677",
        [1, -1] => "#228833",
        _ => "#ccbb44",
    }
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {:.0} {:.0}">"#,
        w + 2.0 * PAD,
        h + 2.0 * PAD,
        w + 2.0 * PAD,
        h + 2.0 * PAD
    );
}

/// Triangles filled by label, jump segments drawn on top.
pub fn mesh_svg(m: &MeshPotential) -> Result<String> {
    let labels = validate_mesh(m)?;
    let segments = jump_set(m)?;
    let d = &m.domain;
    let k = SIZE / d.width.max(d.height);
    let (w, h) = (d.width * k, d.height * k);
    let map = |p: [f64; 2]| (PAD + (p[0] - d.origin[0]) * k, PAD + h - (p[1] - d.origin[1]) * k);
    let mut out = String::new();
    header(&mut out, w, h);
    for (t, tri) in m.triangles.iter().enumerate() {
        let pts: Vec<String> = tri.iter().map(|&v| {
            let (x, y) = map(m.vertices[v]);
            format!("{x:.3},{y:.3}")
        })
        .collect();
        let l = labels[t];
        let _ = writeln!(
            out,
            r##"<polygon points="{}" fill="{}" stroke="#ffffff" stroke-width="0.5"><title>w={} z={}</title></polygon>"##,
            pts.join(" "),
            label_color(l),
            l[0],
            l[1]
        );
    }
    for s in &segments {
        let (a, b) = (map(s.p), map(s.q));
        let _ = writeln!(
            out,
            r##"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#000000" stroke-width="2.5"/>"##,
            a.0, a.1, b.0, b.1
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Diverging blue-white-red map, saturated at ±1.
fn diverging(v: f64) -> (u8, u8, u8) {
    let t = v.clamp(-1.0, 1.0);
    let mix = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
    if t >= 0.0 {
        (mix(255.0, 178.0, t), mix(255.0, 24.0, t), mix(255.0, 43.0, t))
    } else {
        (mix(255.0, 33.0, -t), mix(255.0, 102.0, -t), mix(255.0, 172.0, -t))
    }
}

/// Heatmap of a grid function, one rectangle per cell, row 0 at the bottom.
pub fn heatmap<T: Real>(g: &ScalarGrid<T>, title: &str) -> String {
    let (nx, ny) = (g.nx().max(1), g.ny().max(1));
    let k = SIZE / nx.max(ny) as f64;
    let (w, h) = (nx as f64 * k, ny as f64 * k);
    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(out, "<title>{title}</title>");
    for j in 0..g.ny() {
        for i in 0..g.nx() {
            let (r, gg, b) = diverging(g.get(i, j).as_f64());
            let _ = writeln!(
                out,
                r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="rgb({r},{gg},{b})"/>"#,
                PAD + i as f64 * k,
                PAD + h - (j + 1) as f64 * k,
                k,
                k
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(diverging(0.0), (255, 255, 255));
        assert_eq!(diverging(5.0), diverging(1.0));
        assert_ne!(diverging(1.0), diverging(-1.0));
    }
}
