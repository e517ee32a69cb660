//! Minimal static SVG plots: line charts, a heatmap with its zero contour,
//! and a vortex map with degree glyphs. Every document carries a
//! `<!--METADATA-->` slot filled by [`crate::output::OutDir::svg`].

use std::fmt::Write;

use crate::output::escape;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 56.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Affine map from data to pixel coordinates.
#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        let (x0, x1) = bounds(xs);
        let (y0, y1) = bounds(ys);
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (H - 2.0 * MARGIN)
    }
}

fn bounds(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        v.filter(|x| x.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-300 {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

fn open(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    out.push_str("<!--METADATA-->\n");
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ =
        writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(out, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
    for i in 0..=4 {
        let s = i as f64 / 4.0;
        let xv = f.x0 + s * (f.x1 - f.x0);
        let yv = f.y0 + s * (f.y1 - f.y0);
        let _ =
            writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, f.px(xv), b + 16.0, tick(xv));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            l - 4.0,
            f.py(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 12.0, escape(xlabel));
    let _ = writeln!(
        out,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// One named polyline; `markers` draws points instead of a line.
pub struct Series<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
    pub markers: bool,
}

/// Line chart of one or more series.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter().copied());
    let f = Frame::fit(all().map(|p| p.0), all().map(|p| p.1));
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<&(f64, f64)> = s.points.iter().filter(|p| p.0.is_finite() && p.1.is_finite()).collect();
        if s.markers {
            for p in pts {
                let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, f.px(p.0), f.py(p.1));
            }
        } else {
            let path: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", f.px(p.0), f.py(p.1))).collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{color}"/>"#,
            W - MARGIN - 150.0,
            ly - 9.0
        );
        let _ = writeln!(out, r#"<text x="{}" y="{ly}">{}</text>"#, W - MARGIN - 135.0, escape(s.name));
    }
    out.push_str("</svg>\n");
    out
}

/// Diverging colour for `v/scale ∈ [−1, 1]`.
fn diverging(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 {
        (255.0, 255.0 * (1.0 - t), 255.0 * (1.0 - t))
    } else {
        (255.0 * (1.0 + t), 255.0 * (1.0 + t), 255.0)
    };
    format!("rgb({:.0},{:.0},{:.0})", r, g, b)
}

/// Heatmap of `values[i][j]` at `(xs[i], ys[j])` with the zero level set
/// traced by marching squares. `None` cells are hatched grey.
pub fn heatmap(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64], values: &[Vec<Option<f64>>]) -> String {
    let f = Frame::fit(xs.iter().copied(), ys.iter().copied());
    let scale = values.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut out = String::new();
    open(&mut out, title);
    let half = |v: &[f64], i: usize| -> (f64, f64) {
        let lo = if i == 0 { v[0] - 0.5 * (v.get(1).unwrap_or(&(v[0] + 1.0)) - v[0]) } else { 0.5 * (v[i - 1] + v[i]) };
        let hi = if i + 1 == v.len() { v[i] + (v[i] - lo) } else { 0.5 * (v[i] + v[i + 1]) };
        (lo, hi)
    };
    for (i, row) in values.iter().enumerate() {
        let (xa, xb) = half(xs, i);
        for (j, v) in row.iter().enumerate() {
            let (ya, yb) = half(ys, j);
            let fill = v.map_or_else(|| "#bbbbbb".to_string(), |v| diverging(v / scale));
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                f.px(xa),
                f.py(yb),
                f.px(xb) - f.px(xa),
                f.py(ya) - f.py(yb)
            );
        }
    }
    for (a, b) in zero_contour(xs, ys, values) {
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            f.px(a.0),
            f.py(a.1),
            f.px(b.0),
            f.py(b.1)
        );
    }
    axes(&mut out, &f, xlabel, ylabel);
    out.push_str("</svg>\n");
    out
}

type Segment = ((f64, f64), (f64, f64));

/// Marching-squares segments of the zero level set; cells touching a `None`
/// corner are skipped.
pub fn zero_contour(xs: &[f64], ys: &[f64], values: &[Vec<Option<f64>>]) -> Vec<Segment> {
    let mut segs = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        for j in 0..ys.len().saturating_sub(1) {
            let c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let Some(v) = c.iter().map(|&(a, b)| values[a][b]).collect::<Option<Vec<f64>>>() else {
                continue;
            };
            let mut cross = Vec::new();
            for e in 0..4 {
                let (p, q) = (e, (e + 1) % 4);
                if (v[p] > 0.0) != (v[q] > 0.0) {
                    let t = v[p] / (v[p] - v[q]);
                    let (pa, pb) = (c[p], c[q]);
                    cross.push((xs[pa.0] + t * (xs[pb.0] - xs[pa.0]), ys[pa.1] + t * (ys[pb.1] - ys[pa.1])));
                }
            }
            // Saddle cells produce four crossings; pair them in edge order.
            for pair in cross.chunks_exact(2) {
                segs.push((pair[0], pair[1]));
            }
        }
    }
    segs
}

/// A located zero with its degree.
pub struct Glyph {
    pub x: f64,
    pub y: f64,
    pub degree: i32,
}

/// `|Ψ|` on a uniform `(x, y)` grid with vortex glyphs: a circle per zero,
/// labelled with its degree and coloured by sign.
pub fn vortex_map(title: &str, xs: &[f64], ys: &[f64], modulus: &[Vec<f64>], glyphs: &[Glyph]) -> String {
    let f = Frame { x0: xs[0], x1: xs[xs.len() - 1], y0: ys[0], y1: ys[ys.len() - 1] };
    let mut out = String::new();
    open(&mut out, title);
    let dx = (f.px(xs[1]) - f.px(xs[0])).abs();
    let dy = (f.py(ys[0]) - f.py(ys[1])).abs();
    for (i, col) in modulus.iter().enumerate() {
        for (j, m) in col.iter().enumerate() {
            let g = (255.0 * m.clamp(0.0, 1.0)).round();
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="rgb({g},{g},{g})"/>"#,
                f.px(xs[i]) - 0.5 * dx,
                f.py(ys[j]) - 0.5 * dy,
                dx + 0.3,
                dy + 0.3
            );
        }
    }
    for g in glyphs {
        let color = if g.degree > 0 { "#d62728" } else { "#1f77b4" };
        let (cx, cy) = (f.px(g.x), f.py(g.y));
        let _ =
            writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="9" fill="none" stroke="{color}" stroke-width="2"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}" font-weight="bold">{:+}</text>"#,
            cx + 12.0,
            cy + 4.0,
            g.degree
        );
    }
    axes(&mut out, &f, "x", "y");
    out.push_str("</svg>\n");
    out
}
