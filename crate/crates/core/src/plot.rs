//! Minimal self-contained SVG line plots.

use std::fmt::Write as _;

use crate::geometry::Point2;

const PALETTE: [&str; 6] = ["#1f4e79", "#c0392b", "#27ae60", "#8e44ad", "#d68910", "#566573"];

/// Polylines in a shared frame with equal axis scaling when `equal_aspect`.
/// Series with a single point are drawn as a dot.
pub fn line_plot(title: &str, series: &[(String, Vec<Point2>)], equal_aspect: bool) -> String {
    let (width, height, margin) = (640.0, 480.0, 40.0);
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in series.iter().flat_map(|(_, pts)| pts) {
        if p.x.is_finite() && p.y.is_finite() {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
    }
    if !(lo.x <= hi.x) {
        lo = Point2::ZERO;
        hi = Point2::new(1.0, 1.0);
    }
    let span_x = (hi.x - lo.x).max(1e-12);
    let span_y = (hi.y - lo.y).max(1e-12);
    let (mut sx, mut sy) = ((width - 2.0 * margin) / span_x, (height - 2.0 * margin) / span_y);
    if equal_aspect {
        let s = sx.min(sy);
        sx = s;
        sy = s;
    }
    let map = |p: &Point2| (margin + (p.x - lo.x) * sx, height - margin - (p.y - lo.y) * sy);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<text x="{margin}" y="20">{}</text>"#, escape(title));
    let _ = writeln!(
        svg,
        r#"<text x="{margin}" y="{}">x: [{:.4}, {:.4}]  y: [{:.4}, {:.4}]</text>"#,
        height - 10.0,
        lo.x,
        hi.x,
        lo.y,
        hi.y
    );
    for (k, (label, pts)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        if pts.len() == 1 {
            let (x, y) = map(&pts[0]);
            let _ = writeln!(svg, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{colour}"/>"#);
            continue;
        }
        let coords: Vec<String> = pts
            .iter()
            .filter(|p| p.x.is_finite() && p.y.is_finite())
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#,
            coords.join(" "),
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
