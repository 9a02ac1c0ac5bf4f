//! Static SVG scatter plots of sweep results: test AUC against tree count,
//! one marker style per depth.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sweep::{write_sweep_csv, SweepRow};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;
const MARKER: f64 = 4.5;

const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

#[derive(Clone, Copy)]
enum Shape {
    Circle,
    Square,
    Triangle,
    Diamond,
}

const SHAPES: [Shape; 4] = [Shape::Circle, Shape::Square, Shape::Triangle, Shape::Diamond];

fn marker(out: &mut String, shape: Shape, color: &str, x: f64, y: f64, class: &str, extra: &str) {
    let r = MARKER;
    let _ = match shape {
        Shape::Circle => writeln!(
            out,
            r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="{r:.2}" fill="{color}"{extra}/>"#
        ),
        Shape::Square => writeln!(
            out,
            r#"<rect class="{class}" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}"{extra}/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        Shape::Triangle => writeln!(
            out,
            r#"<polygon class="{class}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"{extra}/>"#,
            x,
            y - r * 1.2,
            x - r * 1.1,
            y + r * 0.8,
            x + r * 1.1,
            y + r * 0.8
        ),
        Shape::Diamond => writeln!(
            out,
            r#"<polygon class="{class}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}"{extra}/>"#,
            x,
            y - r * 1.3,
            x + r * 1.3,
            y,
            x,
            y + r * 1.3,
            x - r * 1.3,
            y
        ),
    };
}

/// Roughly `target` round tick values covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::EPSILON);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|i| i as f64 * step).collect()
}

/// Renders the scatter plot as a self-contained SVG document.
pub fn scatter_svg(rows: &[SweepRow]) -> String {
    let depths: Vec<usize> = rows.iter().map(|r| r.depth).collect::<BTreeSet<_>>().into_iter().collect();
    let (mut x_lo, mut x_hi) = rows.iter().fold((f64::MAX, f64::MIN), |(lo, hi), r| {
        (lo.min(r.n_trees as f64), hi.max(r.n_trees as f64))
    });
    if rows.is_empty() {
        (x_lo, x_hi) = (0.0, 1.0);
    }
    let pad = ((x_hi - x_lo) * 0.04).max(1.0);
    x_lo -= pad;
    x_hi += pad;
    let (mut y_lo, mut y_hi) = rows
        .iter()
        .fold((1.0f64, 0.0f64), |(lo, hi), r| (lo.min(r.auc_test), hi.max(r.auc_test)));
    if y_lo > y_hi {
        (y_lo, y_hi) = (0.0, 1.0);
    }
    y_lo = ((y_lo - 0.01) * 100.0).floor() / 100.0;
    y_hi = ((y_hi + 0.01) * 100.0).ceil() / 100.0;
    y_lo = y_lo.max(0.0);
    y_hi = y_hi.min(1.0).max(y_lo + 0.01);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |v: f64| LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| TOP + (1.0 - (v - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let variants: BTreeSet<&str> = rows.iter().map(|r| r.variant.as_str()).collect();
    let title = format!(
        "Test AUC by tree count ({})",
        variants.into_iter().collect::<Vec<_>>().join(", ")
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="15">{title}</text>"#,
        LEFT + plot_w / 2.0,
        TOP / 2.0 + 5.0
    );

    // axes and grid
    let _ = writeln!(s, r##"<g class="axes" stroke="#333" stroke-width="1">"##);
    let _ = writeln!(
        s,
        r#"<line x1="{LEFT:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}"/>"#,
        TOP + plot_h,
        LEFT + plot_w,
        TOP + plot_h
    );
    let _ = writeln!(s, r#"<line x1="{LEFT:.2}" y1="{TOP:.2}" x2="{LEFT:.2}" y2="{:.2}"/>"#, TOP + plot_h);
    let _ = writeln!(s, "</g>");
    for t in ticks(x_lo, x_hi, 8) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
            TOP + plot_h + 19.0
        );
    }
    for t in ticks(y_lo, y_hi, 6) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{t:.3}</text>"#,
            LEFT - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">number of trees</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">test AUC</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let style = |depth: usize| {
        let i = depths.iter().position(|&d| d == depth).unwrap_or(0);
        (SHAPES[i % SHAPES.len()], COLORS[i % COLORS.len()])
    };

    let _ = writeln!(s, r#"<g class="points" fill-opacity="0.85">"#);
    for r in rows {
        let (shape, color) = style(r.depth);
        let extra = format!(r#" data-depth="{}" data-trees="{}""#, r.depth, r.n_trees);
        marker(&mut s, shape, color, sx(r.n_trees as f64), sy(r.auc_test), "marker", &extra);
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g class="legend">"#);
    let lx = LEFT + plot_w + 25.0;
    let _ = writeln!(s, r#"<text x="{lx:.2}" y="{:.2}">max depth</text>"#, TOP + 10.0);
    for (i, &d) in depths.iter().enumerate() {
        let y = TOP + 32.0 + 22.0 * i as f64;
        let (shape, color) = style(d);
        marker(&mut s, shape, color, lx + 6.0, y - 4.0, "legend-marker", "");
        let _ = writeln!(s, r#"<text x="{:.2}" y="{y:.2}">depth {d}</text>"#, lx + 18.0);
    }
    let _ = writeln!(s, "</g>");
    s.push_str("</svg>\n");
    s
}

/// Writes the sweep rows as CSV and the scatter plot as SVG.
pub fn emit_scatter(rows: &[SweepRow], csv_path: impl AsRef<Path>, svg_path: impl AsRef<Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    write_sweep_csv(rows, csv_path)?;
    let svg_path = svg_path.as_ref();
    std::fs::write(svg_path, scatter_svg(rows)).map_err(|e| Error::io(svg_path, e))
}
