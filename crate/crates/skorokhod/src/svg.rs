//! Minimal deterministic SVG rendering of visualizations and instantons.
//!
//! The main panel draws the visualization graph (polylines broken at jumps,
//! with a dashed vertical segment per instanton spanning its value range);
//! each instanton additionally gets its trace drawn in a small side panel.

use std::fmt::Write as _;

use crate::piecewise::CadlagFunction;
use crate::turbo::{instantons, visualize, Turbofunction};

const MAIN_W: f64 = 480.0;
const MAIN_H: f64 = 360.0;
const PANEL_W: f64 = 140.0;
const PANEL_H: f64 = 110.0;
const MARGIN: f64 = 40.0;

struct Frame {
    x0: f64,
    y0: f64,
    w: f64,
    h: f64,
    vmin: f64,
    vmax: f64,
}

impl Frame {
    fn x(&self, t: f64) -> f64 {
        self.x0 + t * self.w
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.vmax - self.vmin).max(1e-9);
        self.y0 + self.h - (v - self.vmin) / span * self.h
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

/// Split a càdlàg function into jump-free polylines in user coordinates.
fn polylines(f: &CadlagFunction, frame: &Frame) -> Vec<String> {
    let mut runs = Vec::new();
    let mut current: Vec<(f64, f64)> = Vec::new();
    for (i, n) in f.nodes().iter().enumerate() {
        if i > 0 {
            current.push((frame.x(n.t), frame.y(n.left)));
        }
        if n.has_jump() && !current.is_empty() {
            runs.push(current);
            current = Vec::new();
        }
        current.push((frame.x(n.t), frame.y(n.right)));
    }
    if !current.is_empty() {
        runs.push(current);
    }
    runs.iter()
        .map(|pts| {
            pts.iter()
                .map(|(x, y)| format!("{},{}", fmt(*x), fmt(*y)))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

fn value_bounds(f: &CadlagFunction) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for n in f.nodes() {
        lo = lo.min(n.left).min(n.right);
        hi = hi.max(n.left).max(n.right);
    }
    (lo, hi)
}

fn draw_axes(out: &mut String, frame: &Frame, label: &str) {
    let _ = writeln!(
        out,
        r##"<rect x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#999" stroke-width="1"/>"##,
        fmt(frame.x0),
        fmt(frame.y0),
        fmt(frame.w),
        fmt(frame.h)
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="11" fill="#333">{}</text>"##,
        fmt(frame.x0),
        fmt(frame.y0 - 6.0),
        label
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="9" fill="#666">{}</text>"##,
        fmt(frame.x0 - 4.0),
        fmt(frame.y0 + frame.h + 12.0),
        fmt(frame.vmin)
    );
    let _ = writeln!(
        out,
        r##"<text x="{}" y="{}" font-size="9" fill="#666">{}</text>"##,
        fmt(frame.x0 - 4.0),
        fmt(frame.y0 + 4.0),
        fmt(frame.vmax)
    );
}

fn draw_function(out: &mut String, f: &CadlagFunction, frame: &Frame, color: &str) {
    for pts in polylines(f, frame) {
        let _ = writeln!(
            out,
            r#"<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
    }
}

/// Render a full turbofunction: visualization plus instanton markers and
/// per-instanton trace panels.
pub fn render_turbo(x: &Turbofunction, title: &str) -> String {
    let viz = visualize(x);
    let inst = instantons(x);
    let (mut lo, mut hi) = value_bounds(&viz);
    for i in &inst {
        lo = lo.min(i.value_range.0);
        hi = hi.max(i.value_range.1);
    }
    if lo > hi {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let panels_h = if inst.is_empty() {
        0.0
    } else {
        MARGIN + (PANEL_H + 30.0) * ((inst.len() as f64 / 3.0).ceil())
    };
    let total_w = MAIN_W + 2.0 * MARGIN;
    let total_h = MAIN_H + 2.0 * MARGIN + panels_h;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt(total_w),
        fmt(total_h),
        fmt(total_w),
        fmt(total_h)
    );
    let frame = Frame { x0: MARGIN, y0: MARGIN, w: MAIN_W, h: MAIN_H, vmin: lo, vmax: hi };
    draw_axes(&mut out, &frame, title);
    draw_function(&mut out, &viz, &frame, "#1f6fb2");
    for i in &inst {
        let _ = writeln!(
            out,
            r##"<line x1="{x}" y1="{y1}" x2="{x}" y2="{y2}" stroke="#c23b22" stroke-width="1.5" stroke-dasharray="4 3"/>"##,
            x = fmt(frame.x(i.s)),
            y1 = fmt(frame.y(i.value_range.0)),
            y2 = fmt(frame.y(i.value_range.1)),
        );
    }
    for (k, i) in inst.iter().enumerate() {
        let col = k % 3;
        let row = k / 3;
        let (plo, phi) = value_bounds(&i.trace);
        let pf = Frame {
            x0: MARGIN + col as f64 * (PANEL_W + 30.0),
            y0: MAIN_H + 2.0 * MARGIN + row as f64 * (PANEL_H + 30.0),
            w: PANEL_W,
            h: PANEL_H,
            vmin: plo.min(phi),
            vmax: phi.max(plo + 1e-9),
        };
        draw_axes(&mut out, &pf, &format!("instanton at s={}", fmt(i.s)));
        draw_function(&mut out, &i.trace, &pf, "#c23b22");
    }
    let _ = writeln!(out, "</svg>");
    out
}

/// Render several plain functions overlaid in one frame.
pub fn render_overlay(fs: &[(String, CadlagFunction)], title: &str) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, f) in fs {
        let (a, b) = value_bounds(f);
        lo = lo.min(a);
        hi = hi.max(b);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let total_w = MAIN_W + 2.0 * MARGIN;
    let total_h = MAIN_H + 2.0 * MARGIN + 16.0 * fs.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        fmt(total_w),
        fmt(total_h),
        fmt(total_w),
        fmt(total_h)
    );
    let frame = Frame { x0: MARGIN, y0: MARGIN, w: MAIN_W, h: MAIN_H, vmin: lo, vmax: hi };
    draw_axes(&mut out, &frame, title);
    let colors = ["#1f6fb2", "#c23b22", "#2e8540", "#8a4f9e", "#b8860b", "#444444"];
    for (k, (name, f)) in fs.iter().enumerate() {
        let color = colors[k % colors.len()];
        draw_function(&mut out, f, &frame, color);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="10" fill="{}">{}</text>"#,
            fmt(MARGIN),
            fmt(MAIN_H + 2.0 * MARGIN + 12.0 + 16.0 * k as f64),
            color,
            name
        );
    }
    let _ = writeln!(out, "</svg>");
    out
}
