use std::fmt::Write;

use progx::{ModelInstance, PointSet};

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;
const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"];

/// Scatter of the points (first-view positions for correspondences) coloured
/// by assignment, outliers in black, with 2D line and segment instances drawn.
pub fn render(points: &PointSet, instances: &[ModelInstance], assignment: &[Option<usize>]) -> String {
    let xy: Vec<(f64, f64)> = points.iter().map(|p| (p.coords()[0], p.coords().get(1).copied().unwrap_or(0.0))).collect();
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for &(x, y) in &xy {
        lo = (lo.0.min(x), lo.1.min(y));
        hi = (hi.0.max(x), hi.1.max(y));
    }
    if xy.is_empty() {
        (lo, hi) = ((0.0, 0.0), (1.0, 1.0));
    }
    let span = (hi.0 - lo.0).max(hi.1 - lo.1).max(1e-9);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |x: f64, y: f64| (MARGIN + (x - lo.0) * scale, MARGIN + (y - lo.1) * scale);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (j, h) in instances.iter().enumerate() {
        let ends = match h {
            ModelInstance::Line2D(l) => clip_line((l.a, l.b, l.c), lo, hi),
            ModelInstance::LineSegment2D(seg) => Some(seg.endpoints()),
            _ => None,
        };
        if let Some((a, b)) = ends {
            let (a, b) = (map(a.0, a.1), map(b.0, b.1));
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="1.5" stroke-opacity="0.6"/>"#,
                a.0, a.1, b.0, b.1, PALETTE[j % PALETTE.len()]
            );
        }
    }
    for (&(x, y), a) in xy.iter().zip(assignment) {
        let (px, py) = map(x, y);
        let fill = a.map_or("black", |j| PALETTE[j % PALETTE.len()]);
        let _ = writeln!(s, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2" fill="{fill}"/>"#);
    }
    s.push_str("</svg>\n");
    s
}

/// Part of `a x + b y + c = 0` inside the box `lo..hi`.
fn clip_line((a, b, c): (f64, f64, f64), lo: (f64, f64), hi: (f64, f64)) -> Option<((f64, f64), (f64, f64))> {
    let mut hits: Vec<(f64, f64)> = Vec::new();
    if b.abs() > 1e-12 {
        for x in [lo.0, hi.0] {
            let y = -(a * x + c) / b;
            if y >= lo.1 - 1e-9 && y <= hi.1 + 1e-9 {
                hits.push((x, y));
            }
        }
    }
    if a.abs() > 1e-12 {
        for y in [lo.1, hi.1] {
            let x = -(b * y + c) / a;
            if x >= lo.0 - 1e-9 && x <= hi.0 + 1e-9 {
                hits.push((x, y));
            }
        }
    }
    let first = *hits.first()?;
    let far = hits.iter().copied().max_by(|p, q| {
        let d = |r: &(f64, f64)| (r.0 - first.0).hypot(r.1 - first.1);
        d(p).total_cmp(&d(q))
    })?;
    Some((first, far))
}
