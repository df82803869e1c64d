//! Minimal deterministic SVG output for traces and hull rasters.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::raster::HullRaster;

const SIZE: f64 = 512.0;
const SURVIVOR: &str = "#ffffff";
const OVERFLOW: &str = "#ff00ff";

/// A polyline through `points`, fitted to a square canvas with a 5% margin.
/// The imaginary axis points up.
pub fn polyline(points: &[Complex64]) -> String {
    curves(&[points])
}

/// Several polylines sharing one bounding box.
pub fn curves(lines: &[&[Complex64]]) -> String {
    let finite = |p: &&Complex64| p.re.is_finite() && p.im.is_finite();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in lines.iter().flat_map(|l| l.iter()).filter(finite) {
        x0 = x0.min(p.re);
        x1 = x1.max(p.re);
        y0 = y0.min(p.im);
        y1 = y1.max(p.im);
    }
    if x0 > x1 {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    // degenerate extents (a vertical segment, a single point) still get a box
    let extent = (x1 - x0).max(y1 - y0).max(1e-12);
    let margin = 0.05 * extent;
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let half = 0.5 * extent + margin;
    let sx = |x: f64| (x - (cx - half)) / (2.0 * half) * SIZE;
    let sy = |y: f64| ((cy + half) - y) / (2.0 * half) * SIZE;

    let mut out = header(SIZE, SIZE);
    for line in lines {
        let mut pts = String::new();
        for p in line.iter().filter(finite) {
            if !pts.is_empty() {
                pts.push(' ');
            }
            let _ = write!(pts, "{:.4},{:.4}", sx(p.re), sy(p.im));
        }
        let _ = writeln!(
            out,
            "<polyline fill=\"none\" stroke=\"#000000\" stroke-width=\"1\" points=\"{pts}\"/>"
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One rectangle per pixel. Survivors are white, overflowed pixels magenta,
/// and dead pixels are shaded by the rank of their lifetime.
pub fn raster(r: &HullRaster) -> String {
    let g = &r.grid;
    let (w, h) = (g.nx as f64, g.ny as f64);
    let mut dead: Vec<f64> = r.lifetimes.iter().copied().filter(|l| l.is_finite()).collect();
    dead.sort_by(f64::total_cmp);

    let mut out = header(w, h);
    for (k, &l) in r.lifetimes.iter().enumerate() {
        let (i, j) = (k % g.nx, k / g.nx);
        let fill = if l.is_nan() {
            OVERFLOW.to_string()
        } else if l.is_infinite() {
            SURVIVOR.to_string()
        } else {
            let rank = dead.partition_point(|&x| x < l) as f64;
            let q = if dead.len() > 1 { rank / (dead.len() - 1) as f64 } else { 0.0 };
            ramp(q)
        };
        // row j = 0 is the bottom of the window
        let _ = writeln!(
            out,
            "<rect x=\"{i}\" y=\"{}\" width=\"1\" height=\"1\" fill=\"{fill}\"/>",
            g.ny - 1 - j
        );
    }
    out.push_str("</svg>\n");
    out
}

fn header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"{}\" height=\"{}\" shape-rendering=\"crispEdges\">\n",
        SIZE,
        SIZE * h / w
    )
}

/// Dark blue for the earliest deaths to light blue for the latest.
fn ramp(q: f64) -> String {
    let q = q.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * q).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(8.0, 190.0), lerp(29.0, 220.0), lerp(88.0, 250.0))
}
