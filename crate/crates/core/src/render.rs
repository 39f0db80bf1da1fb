//! SVG output.
//!
//! Coordinates keep the figure convention of y growing downward, which is
//! also SVG's, so a rendering looks like the published drawing.

use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{degree_sequence, Graph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RenderError {
    #[error("graph has no edges to draw")]
    NoEdges,
    #[error("pixels per unit must be positive, got {0}")]
    InvalidScale(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RenderOptions {
    pub pixels_per_unit: f64,
    /// Mark degree-2 vertices.
    pub label_degrees: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            pixels_per_unit: 40.0,
            label_degrees: false,
        }
    }
}

const STROKE_WIDTH: f64 = 0.03;
const MARGIN: f64 = 0.5;

pub fn render_svg(g: &Graph, opts: &RenderOptions) -> Result<String, RenderError> {
    if g.edge_count() == 0 {
        return Err(RenderError::NoEdges);
    }
    let ppu = opts.pixels_per_unit;
    if !(ppu > 0.0 && ppu.is_finite()) {
        return Err(RenderError::InvalidScale(ppu));
    }
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in g.vertices() {
        min_x = min_x.min(p.x);
        min_y = min_y.min(p.y);
        max_x = max_x.max(p.x);
        max_y = max_y.max(p.y);
    }
    let px = |v: f64, lo: f64| (v - lo + MARGIN) * ppu;
    let width = (max_x - min_x + 2.0 * MARGIN) * ppu;
    let height = (max_y - min_y + 2.0 * MARGIN) * ppu;

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.3}" height="{height:.3}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    let _ = writeln!(
        out,
        r#"<g stroke="black" stroke-width="{:.3}" stroke-linecap="round" fill="none">"#,
        STROKE_WIDTH * ppu
    );
    for e in g.edges() {
        let (a, b) = (g.vertices()[e.a], g.vertices()[e.b]);
        let _ = writeln!(
            out,
            r#"<line x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}"/>"#,
            px(a.x, min_x),
            px(a.y, min_y),
            px(b.x, min_x),
            px(b.y, min_y)
        );
    }
    let _ = writeln!(out, "</g>");
    if opts.label_degrees {
        let _ = writeln!(out, r##"<g fill="#d62728" stroke="none">"##);
        for (v, d) in degree_sequence(g).into_iter().enumerate() {
            if d == 2 {
                let p = g.vertices()[v];
                let _ = writeln!(
                    out,
                    r#"<circle cx="{:.3}" cy="{:.3}" r="{:.3}"/>"#,
                    px(p.x, min_x),
                    px(p.y, min_y),
                    0.08 * ppu
                );
            }
        }
        let _ = writeln!(out, "</g>");
    }
    out.push_str("</svg>\n");
    Ok(out)
}
