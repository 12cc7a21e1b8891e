//! SVG rendering of tessellations.
//!
//! Deterministic by construction: the output is assembled from the
//! canonical cell enumeration with fixed formatting, so the same
//! tessellation and options always give byte-identical SVG 1.1. Dimension
//! 2 renders one polygon per cell plus the window outline; dimension 1
//! renders the interval as a strip with a tick at every cut point.

use std::fmt::Write as _;

use crate::geometry::ConvexPolytope;
use crate::scalar::to_f64;
use crate::tess::Tessellation;

/// Rendering options; the defaults draw plain cells at width 480.
#[derive(Debug, Clone)]
pub struct RenderOptions {
    /// Image width in pixels; height follows the window's aspect ratio.
    pub width: f64,
    /// Mark the origin with a small cross.
    pub origin_marker: bool,
    /// Label each cell with its enumeration index at the cell centroid.
    pub cell_labels: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width: 480.0,
            origin_marker: false,
            cell_labels: false,
        }
    }
}

const MARGIN: f64 = 10.0;
const STRIP_HEIGHT: f64 = 60.0;

fn fmt(x: f64) -> String {
    // Fixed decimals keep the byte output stable across platforms.
    format!("{x:.3}")
}

struct Frame {
    x0: f64,
    y1: f64,
    scale: f64,
    height: f64,
}

impl Frame {
    /// Pixel frame mapping the window's bounding box into the image,
    /// y flipped so the positive axis points up.
    fn new(window: &ConvexPolytope, width: f64) -> Frame {
        let xs: Vec<f64> = window.vertices().iter().map(|v| to_f64(&v[0])).collect();
        let (x0, x1) = bounds(&xs);
        let scale = (width - 2.0 * MARGIN) / (x1 - x0);
        let (y1, height) = if window.dim() == 1 {
            (0.0, STRIP_HEIGHT)
        } else {
            let ys: Vec<f64> = window.vertices().iter().map(|v| to_f64(&v[1])).collect();
            let (y0, y1) = bounds(&ys);
            (y1, (y1 - y0) * scale + 2.0 * MARGIN)
        };
        Frame {
            x0,
            y1,
            scale,
            height,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) * self.scale
    }

    fn py(&self, y: f64) -> f64 {
        MARGIN + (self.y1 - y) * self.scale
    }
}

fn bounds(v: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in v {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    (lo, hi)
}

fn polygon_points(frame: &Frame, poly: &ConvexPolytope) -> String {
    let mut s = String::new();
    for (i, v) in poly.vertices().iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(
            s,
            "{},{}",
            fmt(frame.px(to_f64(&v[0]))),
            fmt(frame.py(to_f64(&v[1])))
        );
    }
    s
}

fn centroid(poly: &ConvexPolytope) -> Vec<f64> {
    let n = poly.vertices().len() as f64;
    let dim = poly.dim() as usize;
    let mut c = vec![0.0; dim];
    for v in poly.vertices() {
        for (ci, x) in c.iter_mut().zip(v) {
            *ci += to_f64(x) / n;
        }
    }
    c
}

/// Renders a tessellation to an SVG 1.1 document.
pub fn render_svg(t: &Tessellation, opts: &RenderOptions) -> String {
    match t.window().dim() {
        1 => render_strip(t, opts),
        _ => render_planar(t, opts),
    }
}

fn render_planar(t: &Tessellation, opts: &RenderOptions) -> String {
    let frame = Frame::new(t.window(), opts.width);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}">"#,
        fmt(opts.width),
        fmt(frame.height)
    );
    for (i, cell) in t.enumerate_cells() {
        let _ = writeln!(
            out,
            r##"  <polygon points="{}" fill="#eef3f7" stroke="#30505f" stroke-width="1"><title>cell {}: {}</title></polygon>"##,
            polygon_points(&frame, &cell.poly),
            i,
            cell.key
        );
    }
    let _ = writeln!(
        out,
        r##"  <polygon points="{}" fill="none" stroke="#10202a" stroke-width="2"/>"##,
        polygon_points(&frame, t.window())
    );
    if opts.cell_labels {
        for (i, cell) in t.enumerate_cells() {
            let c = centroid(&cell.poly);
            let _ = writeln!(
                out,
                r##"  <text x="{}" y="{}" font-size="11" text-anchor="middle" fill="#10202a">{}</text>"##,
                fmt(frame.px(c[0])),
                fmt(frame.py(c[1])),
                i
            );
        }
    }
    if opts.origin_marker {
        origin_cross(&mut out, frame.px(0.0), frame.py(0.0));
    }
    out.push_str("</svg>\n");
    out
}

fn render_strip(t: &Tessellation, opts: &RenderOptions) -> String {
    let frame = Frame::new(t.window(), opts.width);
    let (mid, half) = (STRIP_HEIGHT / 2.0, 12.0);
    let w = t.window().vertices();
    let (lo, hi) = (to_f64(&w[0][0]), to_f64(&w[1][0]));
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}">"#,
        fmt(opts.width),
        fmt(STRIP_HEIGHT)
    );
    let _ = writeln!(
        out,
        r##"  <line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#10202a" stroke-width="2"/>"##,
        fmt(frame.px(lo)),
        fmt(mid),
        fmt(frame.px(hi)),
        fmt(mid)
    );
    // One tick per interval endpoint; interior ticks are the cut points.
    let mut ticks: Vec<f64> = vec![lo, hi];
    for (_, cell) in t.enumerate_cells() {
        ticks.push(to_f64(&cell.poly.vertices()[0][0]));
        ticks.push(to_f64(&cell.poly.vertices()[1][0]));
    }
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for x in &ticks {
        let _ = writeln!(
            out,
            r##"  <line x1="{x0}" y1="{}" x2="{x0}" y2="{}" stroke="#30505f" stroke-width="1.5"/>"##,
            fmt(mid - half),
            fmt(mid + half),
            x0 = fmt(frame.px(*x)),
        );
    }
    if opts.cell_labels {
        for (i, cell) in t.enumerate_cells() {
            let c = centroid(&cell.poly);
            let _ = writeln!(
                out,
                r##"  <text x="{}" y="{}" font-size="11" text-anchor="middle" fill="#10202a">{}</text>"##,
                fmt(frame.px(c[0])),
                fmt(mid - half - 4.0),
                i
            );
        }
    }
    if opts.origin_marker {
        origin_cross(&mut out, frame.px(0.0), mid);
    }
    out.push_str("</svg>\n");
    out
}

fn origin_cross(out: &mut String, cx: f64, cy: f64) {
    let r = 5.0;
    let _ = writeln!(
        out,
        r##"  <path d="M {} {} L {} {} M {} {} L {} {}" stroke="#b03030" stroke-width="2" fill="none"/>"##,
        fmt(cx - r),
        fmt(cy),
        fmt(cx + r),
        fmt(cy),
        fmt(cx),
        fmt(cy - r),
        fmt(cx),
        fmt(cy + r)
    );
}
