//! Minimal static SVG renderings: scatter, line, and interval panels.
//! Presentation only; the single guarantee is well-formed XML.

use cezero::SensitivityRow;
use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_points<'a>(points: impl Iterator<Item = (&'a f64, &'a f64)>) -> Frame {
        let mut f = Frame { x_min: f64::MAX, x_max: f64::MIN, y_min: f64::MAX, y_max: f64::MIN };
        for (&x, &y) in points {
            f.x_min = f.x_min.min(x);
            f.x_max = f.x_max.max(x);
            f.y_min = f.y_min.min(y);
            f.y_max = f.y_max.max(y);
        }
        f.pad();
        f
    }

    fn pad(&mut self) {
        let dx = (self.x_max - self.x_min).abs().max(1e-12) * 0.05;
        let dy = (self.y_max - self.y_min).abs().max(1e-12) * 0.05;
        self.x_min -= dx;
        self.x_max += dx;
        self.y_min -= dy;
        self.y_max += dy;
    }

    fn sx(&self, x: f64) -> f64 {
        MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - 2.0 * MARGIN)
    }

    fn sy(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open_svg(title: &str) -> String {
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    write!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    )
    .unwrap();
    write!(
        s,
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n",
        WIDTH / 2.0
    )
    .unwrap();
    s
}

fn axes(s: &mut String, frame: &Frame, xlabel: &str, ylabel: &str) {
    write!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    write!(
        s,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">{xlabel}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 16.0
    )
    .unwrap();
    write!(
        s,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 {})\">{ylabel}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0
    )
    .unwrap();
    for frac in [0.0, 0.5, 1.0] {
        let xv = frame.x_min + frac * (frame.x_max - frame.x_min);
        let yv = frame.y_min + frac * (frame.y_max - frame.y_min);
        write!(
            s,
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">{xv:.3}</text>\n",
            frame.sx(xv),
            HEIGHT - MARGIN + 16.0
        )
        .unwrap();
        write!(
            s,
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{yv:.3}</text>\n",
            MARGIN - 6.0,
            frame.sy(yv) + 3.0
        )
        .unwrap();
    }
}

/// Scatter of (x, y) points.
pub fn scatter_svg(xs: &[f64], ys: &[f64], title: &str, xlabel: &str, ylabel: &str) -> String {
    let frame = Frame::from_points(xs.iter().zip(ys.iter()));
    let mut s = open_svg(title);
    axes(&mut s, &frame, xlabel, ylabel);
    // Zero guides when they are in frame.
    if frame.x_min < 0.0 && frame.x_max > 0.0 {
        write!(
            s,
            "<line x1=\"{:.1}\" y1=\"{MARGIN}\" x2=\"{:.1}\" y2=\"{}\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n",
            frame.sx(0.0),
            frame.sx(0.0),
            HEIGHT - MARGIN
        )
        .unwrap();
    }
    if frame.y_min < 0.0 && frame.y_max > 0.0 {
        write!(
            s,
            "<line x1=\"{MARGIN}\" y1=\"{:.1}\" x2=\"{}\" y2=\"{:.1}\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n",
            frame.sy(0.0),
            WIDTH - MARGIN,
            frame.sy(0.0)
        )
        .unwrap();
    }
    for (&x, &y) in xs.iter().zip(ys.iter()) {
        write!(
            s,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2\" fill=\"steelblue\" fill-opacity=\"0.6\"/>\n",
            frame.sx(x),
            frame.sy(y)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Polyline through (x, y) points.
pub fn line_svg(xs: &[f64], ys: &[f64], title: &str, xlabel: &str, ylabel: &str) -> String {
    let frame = Frame::from_points(xs.iter().zip(ys.iter()));
    let mut s = open_svg(title);
    axes(&mut s, &frame, xlabel, ylabel);
    let mut path = String::new();
    for (i, (&x, &y)) in xs.iter().zip(ys.iter()).enumerate() {
        write!(path, "{}{:.2},{:.2} ", if i == 0 { "M" } else { "L" }, frame.sx(x), frame.sy(y))
            .unwrap();
    }
    write!(s, "<path d=\"{}\" fill=\"none\" stroke=\"firebrick\" stroke-width=\"1.5\"/>\n", path.trim()).unwrap();
    s.push_str("</svg>\n");
    s
}

/// W-sensitivity panels, one per arm: point = posterior mean, thick bar =
/// 50% interval, thin bar = 95% interval, grid positions evenly spaced.
pub fn sens_svg(rows: &[SensitivityRow]) -> String {
    let mut s = open_svg("Sensitivity of the population mean cost to W");
    let y_min = rows.iter().map(|r| r.q2_5).fold(f64::MAX, f64::min);
    let y_max = rows.iter().map(|r| r.q97_5).fold(f64::MIN, f64::max);
    let mut frame = Frame { x_min: 0.0, x_max: 1.0, y_min, y_max };
    frame.pad();

    let mut w_values: Vec<f64> = rows.iter().map(|r| r.w_large).collect();
    w_values.dedup();
    let n_w = w_values.len().max(1);
    let panel_width = (WIDTH - 2.0 * MARGIN) / 2.0;

    write!(
        s,
        "<line x1=\"{:.1}\" y1=\"{MARGIN}\" x2=\"{:.1}\" y2=\"{}\" stroke=\"grey\"/>\n",
        MARGIN + panel_width,
        MARGIN + panel_width,
        HEIGHT - MARGIN
    )
    .unwrap();
    write!(
        s,
        "<rect x=\"{MARGIN}\" y=\"{MARGIN}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    for (arm, label_x) in [(0usize, MARGIN + panel_width / 2.0), (1, MARGIN + 1.5 * panel_width)] {
        write!(
            s,
            "<text x=\"{label_x:.1}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">arm {arm}</text>\n",
            MARGIN - 8.0
        )
        .unwrap();
    }
    for frac in [0.0, 0.5, 1.0] {
        let yv = frame.y_min + frac * (frame.y_max - frame.y_min);
        write!(
            s,
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">{yv:.1}</text>\n",
            MARGIN - 6.0,
            frame.sy(yv) + 3.0
        )
        .unwrap();
    }

    for row in rows {
        let wi = w_values.iter().position(|&w| w == row.w_large).unwrap_or(0);
        let x = MARGIN
            + row.arm as f64 * panel_width
            + (wi as f64 + 0.5) / n_w as f64 * panel_width;
        let color = if row.converged { "firebrick" } else { "grey" };
        write!(
            s,
            "<line x1=\"{x:.1}\" y1=\"{:.2}\" x2=\"{x:.1}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"1\"/>\n",
            frame.sy(row.q2_5),
            frame.sy(row.q97_5)
        )
        .unwrap();
        write!(
            s,
            "<line x1=\"{x:.1}\" y1=\"{:.2}\" x2=\"{x:.1}\" y2=\"{:.2}\" stroke=\"{color}\" stroke-width=\"3\"/>\n",
            frame.sy(row.q25),
            frame.sy(row.q75)
        )
        .unwrap();
        write!(
            s,
            "<circle cx=\"{x:.1}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>\n",
            frame.sy(row.mean)
        )
        .unwrap();
        write!(
            s,
            "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">{}</text>\n",
            HEIGHT - MARGIN + 14.0,
            row.w_large
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
