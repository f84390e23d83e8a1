//! Minimal deterministic SVG charts.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const M: f64 = 48.0;

pub struct Axes {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Axes {
    fn px(&self, x: f64) -> f64 {
        let (a, b) = self.x_range;
        M + (x - a) / (b - a) * (W - 2.0 * M)
    }

    fn py(&self, y: f64) -> f64 {
        let (a, b) = self.y_range;
        H - M - (y - a) / (b - a) * (H - 2.0 * M)
    }
}

/// Something drawn inside the axes.
pub enum Mark<'a> {
    Line(&'a [(f64, f64)], &'a str),
    Points(&'a [(f64, f64)], &'a str),
    HLine(f64, &'a str),
    VLine(f64, &'a str),
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render(axes: &Axes, marks: &[Mark]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (M, W - M, H - M, M);
    let _ = writeln!(s, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#);
    for (i, t) in [0.0, 0.5, 1.0].iter().enumerate() {
        let xv = axes.x_range.0 + t * (axes.x_range.1 - axes.x_range.0);
        let yv = axes.y_range.0 + t * (axes.y_range.1 - axes.y_range.0);
        let anchor = ["start", "middle", "end"][i];
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="{anchor}">{}</text>"#, axes.px(xv), y0 + 16.0, fmt_tick(xv));
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, x0 - 4.0, axes.py(yv) + 4.0, fmt_tick(yv));
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(&axes.title));
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, W / 2.0, H - 10.0, escape(&axes.x_label));
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(&axes.y_label)
    );
    for m in marks {
        match m {
            Mark::Line(pts, color) if !pts.is_empty() => {
                let d: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", axes.px(x), axes.py(y))).collect();
                let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, d.join(" "));
            }
            Mark::Points(pts, color) => {
                for &(x, y) in pts.iter() {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{color}"/>"#, axes.px(x), axes.py(y));
                }
            }
            Mark::HLine(y, color) => {
                let py = axes.py(*y);
                let _ = writeln!(s, r#"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="{color}" stroke-dasharray="4 3"/>"#);
            }
            Mark::VLine(x, color) => {
                let px = axes.px(*x);
                let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{y1}" stroke="{color}" stroke-dasharray="4 3"/>"#);
            }
            _ => {}
        }
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Symmetric padded range covering all values.
pub fn range_of(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    let pad = ((hi - lo) * 0.1).max(1.0);
    (lo - pad, hi + pad)
}
