//! Deterministic SVG rendering of planar maps.
//!
//! Output is a pure function of the inputs: fixed float formatting, faces
//! emitted in index order, no timestamps. Rendering the same map twice
//! yields byte-identical files.

use std::fmt::Write as _;

use crate::certify::Polytope2;
use crate::mapping::{gradient_norms, Map2, MapError};

/// Face fill strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coloring {
    /// Uniform neutral fill.
    None,
    /// Linear blue-to-red ramp over the per-face gradient norms, blue at the
    /// minimum and red at the maximum, with an embedded legend.
    GradientNorm,
}

/// Blue-to-red ramp; `t` is clamped to [0, 1].
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("rgb({r},0,{b})")
}

struct Frame {
    xmin: f64,
    ymax: f64,
    scale: f64,
    width: f64,
    height: f64,
}

impl Frame {
    /// Screen coordinates: y points down in SVG, so flip it.
    fn tx(&self, x: f64) -> f64 {
        (x - self.xmin) * self.scale
    }
    fn ty(&self, y: f64) -> f64 {
        (self.ymax - y) * self.scale
    }
}

fn frame_over(points: impl Iterator<Item = (f64, f64)>) -> Frame {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for (x, y) in points {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let dx = (xmax - xmin).max(1e-12);
    let dy = (ymax - ymin).max(1e-12);
    let pad = 0.05 * dx.max(dy);
    let scale = 760.0 / (dx + 2.0 * pad);
    Frame {
        xmin: xmin - pad,
        ymax: ymax + pad,
        scale,
        width: (dx + 2.0 * pad) * scale,
        height: (dy + 2.0 * pad) * scale,
    }
}

/// Renders the image of `map` as an SVG document. The target polygon, when
/// given, is drawn as a dashed outline; mesh boundary edges are highlighted.
pub fn render_svg(
    map: &Map2<'_>,
    polygon: Option<&Polytope2>,
    coloring: Coloring,
) -> Result<String, MapError> {
    let mesh = map.mesh();
    let norms = match coloring {
        Coloring::GradientNorm => Some(gradient_norms(map)?),
        Coloring::None => None,
    };

    let frame = frame_over(
        map.images().iter().map(|u| (u.x, u.y)).chain(
            polygon
                .into_iter()
                .flat_map(|p| p.vertices().iter().map(|c| (c.x, c.y)).collect::<Vec<_>>()),
        ),
    );
    let legend_width = if norms.is_some() { 150.0 } else { 0.0 };

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.2}\" height=\"{:.2}\" \
         viewBox=\"0 0 {:.2} {:.2}\">",
        frame.width + legend_width,
        frame.height,
        frame.width + legend_width,
        frame.height
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");

    // Face fills with thin interior strokes.
    let _ = writeln!(out, "<g stroke=\"#666666\" stroke-width=\"0.6\" stroke-linejoin=\"round\">");
    let (lo, hi) = match &norms {
        Some(ns) => ns
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &n| (lo.min(n), hi.max(n))),
        None => (0.0, 0.0),
    };
    for (f, tri) in mesh.top_faces().iter().enumerate() {
        let fill = match &norms {
            Some(ns) if hi - lo > 0.0 => ramp((ns[f] - lo) / (hi - lo)),
            Some(_) => ramp(0.5),
            None => "#dce6f1".to_string(),
        };
        let mut points = String::new();
        for &v in tri {
            let u = map.image(v);
            let _ = write!(points, "{:.4},{:.4} ", frame.tx(u.x), frame.ty(u.y));
        }
        let _ = writeln!(out, "<polygon points=\"{}\" fill=\"{}\"/>", points.trim_end(), fill);
    }
    let _ = writeln!(out, "</g>");

    // Highlighted mesh boundary.
    let _ = writeln!(out, "<g stroke=\"#000000\" stroke-width=\"1.8\" stroke-linecap=\"round\">");
    for lp in mesh.boundary().loops() {
        for &(a, b) in lp {
            let (ua, ub) = (map.image(a), map.image(b));
            let _ = writeln!(
                out,
                "<line x1=\"{:.4}\" y1=\"{:.4}\" x2=\"{:.4}\" y2=\"{:.4}\"/>",
                frame.tx(ua.x),
                frame.ty(ua.y),
                frame.tx(ub.x),
                frame.ty(ub.y)
            );
        }
    }
    let _ = writeln!(out, "</g>");

    // Target polygon outline.
    if let Some(poly) = polygon {
        let mut points = String::new();
        for c in poly.vertices() {
            let _ = write!(points, "{:.4},{:.4} ", frame.tx(c.x), frame.ty(c.y));
        }
        let _ = writeln!(
            out,
            "<polygon points=\"{}\" fill=\"none\" stroke=\"#0a7d2c\" stroke-width=\"1.2\" \
             stroke-dasharray=\"6 4\"/>",
            points.trim_end()
        );
    }

    // Legend: vertical ramp, red (max) on top.
    if norms.is_some() {
        let steps = 32;
        let bar_h = frame.height * 0.6;
        let bar_w = 24.0;
        let x0 = frame.width + 40.0;
        let y0 = frame.height * 0.2;
        let _ = writeln!(out, "<g>");
        for i in 0..steps {
            let t = 1.0 - (i as f64 + 0.5) / steps as f64;
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                x0,
                y0 + bar_h * i as f64 / steps as f64,
                bar_w,
                bar_h / steps as f64 + 0.5,
                ramp(t)
            );
        }
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\">{:.6e}</text>",
            x0 + bar_w + 6.0,
            y0 + 5.0,
            hi
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\">{:.6e}</text>",
            x0 + bar_w + 6.0,
            y0 + bar_h + 5.0,
            lo
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"12\">gradient norm</text>",
            x0 - 10.0,
            y0 - 12.0
        );
        let _ = writeln!(out, "</g>");
    }

    let _ = writeln!(out, "</svg>");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::SimplicialMesh;
    use crate::meshgen::{grid_square, square_polygon};
    use nalgebra::Vector2;

    #[test]
    fn identity_map_renders_all_faces_mid_ramp() {
        let disk = grid_square(3);
        let map = Map2::identity(&disk.mesh).unwrap();
        let svg = render_svg(&map, Some(&square_polygon(1.0)), Coloring::GradientNorm).unwrap();
        // Constant gradient norm: every face gets the midpoint color.
        let mid = ramp(0.5);
        let count = svg.matches(&mid).count();
        assert!(count >= disk.mesh.top_faces().len(), "{count} fills of {mid}");
        // No other fill colors on polygons.
        for line in svg.lines().filter(|l| l.starts_with("<polygon") && l.contains("rgb(")) {
            assert!(line.contains(&mid), "unexpected fill in {line}");
        }
        assert!(svg.contains("gradient norm"), "legend missing");
    }

    #[test]
    fn distinct_norms_get_extreme_colors() {
        // Two triangles with different distortion; the smaller-norm face must
        // be pure blue and the larger pure red.
        let mesh = SimplicialMesh::new(
            2,
            2,
            vec![0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            vec![vec![0, 1, 2], vec![0, 2, 3]],
        )
        .unwrap();
        let images = vec![
            Vector2::new(0.0, 0.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(1.0, 1.0),
            Vector2::new(-1.0, 1.0),
        ];
        let map = Map2::new(&mesh, images).unwrap();
        let svg = render_svg(&map, None, Coloring::GradientNorm).unwrap();
        assert!(svg.contains("fill=\"rgb(0,0,255)\""), "no pure blue face");
        assert!(svg.contains("fill=\"rgb(255,0,0)\""), "no pure red face");
    }

    #[test]
    fn rendering_is_deterministic() {
        let disk = grid_square(4);
        let images: Vec<Vector2<f64>> = (0..disk.mesh.vertex_count())
            .map(|v| {
                let p = disk.mesh.vertex(v);
                Vector2::new(p[0] + 0.1 * (p[1] * 7.0).sin(), p[1])
            })
            .collect();
        let map = Map2::new(&disk.mesh, images).unwrap();
        let poly = square_polygon(1.0);
        let a = render_svg(&map, Some(&poly), Coloring::GradientNorm).unwrap();
        let b = render_svg(&map, Some(&poly), Coloring::GradientNorm).unwrap();
        assert_eq!(a, b);
        let plain = render_svg(&map, Some(&poly), Coloring::None).unwrap();
        assert!(plain.contains("#dce6f1"));
        assert!(!plain.contains("rgb("));
    }
}
