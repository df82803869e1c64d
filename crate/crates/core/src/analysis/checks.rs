//! Point checks of the trace: round trip through the forward flow,
//! injectivity, cone membership, continuity in the driver, and the spread of
//! endpoints over a family.

use num_complex::Complex64;

use crate::backward::{quadratic_grid, trace_at, trace_point, TraceSamples, DEFAULT_LADDER, DEFAULT_TOL};
use crate::cone::ConeParams;
use crate::driver::Driver;
use crate::error::{domain, Result};
use crate::exec::Exec;
use crate::forward::{run, ForwardOptions};
use crate::raster::{Grid, HullRaster};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTripOptions {
    /// Distance of the probe from the tip.
    pub offset: f64,
    pub tol: f64,
}

impl Default for RoundTripOptions {
    fn default() -> Self {
        RoundTripOptions {
            offset: 1e-5,
            tol: 1e-12,
        }
    }
}

/// Pushes a point next to `γ(t)` through the forward flow and measures how
/// well it meets the driver at time `t`.
///
/// The probe sits at distance `offset` from the tip, towards `γ(t − h)`, so it
/// lies on the curve behind the tip up to curvature. The metric is the gap
/// `|g − λ|` at the probe's death time plus the distance of that time from
/// `t`. Probes that never die contribute their closest approach instead.
pub fn round_trip_check(d: &Driver, t: f64, opts: &RoundTripOptions) -> Result<f64> {
    if !(t > 0.0 && t <= d.horizon().min(1.0)) {
        return domain(format!("round trip parameter {t} outside (0, 1]"));
    }
    let (tip, _) = trace_point(d, t, &DEFAULT_LADDER, opts.tol)?;
    let back_t = t * (1.0 - 1e-3);
    let (back, _) = trace_point(d, back_t, &DEFAULT_LADDER, opts.tol)?;
    let dir = (back - tip) / (back - tip).norm();
    let probe = tip + dir * opts.offset;
    let tr = run(
        d,
        probe,
        d.horizon().min(1.0),
        &ForwardOptions {
            record: false,
            ..ForwardOptions::point(opts.tol)
        },
    )?;
    let when = if tr.survived() { tr.closest_time } else { tr.lifetime };
    Ok(tr.terminal_gap + (when - t).abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectivityReport {
    /// `min |γ(t_i) − γ(t_j)|` over pairs with `|t_i − t_j| ≥ separation`.
    pub min_distance: f64,
    pub pair: (f64, f64),
    /// Sum of the two largest extrapolation errors on the trace.
    pub error_floor: f64,
    pub pass: bool,
}

pub fn injectivity_check(trace: &TraceSamples, separation: f64) -> Result<InjectivityReport> {
    let n = trace.len();
    let mut best = (f64::INFINITY, (f64::NAN, f64::NAN));
    for i in 0..n {
        for j in (i + 1)..n {
            if (trace.params[i] - trace.params[j]).abs() < separation {
                continue;
            }
            let dist = (trace.points[i] - trace.points[j]).norm();
            if dist < best.0 {
                best = (dist, (trace.params[i], trace.params[j]));
            }
        }
    }
    if best.0.is_infinite() {
        return domain("no pair of samples is that far apart");
    }
    let mut errs = trace.errors.clone();
    errs.sort_by(|a, b| b.total_cmp(a));
    let error_floor = errs.iter().take(2).sum();
    Ok(InjectivityReport {
        min_distance: best.0,
        pair: best.1,
        error_floor,
        pass: best.0 > error_floor,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceConeReport {
    /// `max |Re w| / |Im w|` with `w = γ(t) − λ(0)`, over `t ≠ 0`; below 1 inside the cones.
    pub max_slope: f64,
    /// `max (ν√|t| − |Im w| − err)`, non-positive when the lower bound holds.
    pub im_violation: f64,
    /// Samples with `Im w` on the wrong side of the real axis.
    pub wrong_side: usize,
}

/// Checks `γ(t) ∈ C₁ + λ(0)` for `t > 0`, `γ(t) ∈ −C₁ + λ(0)` for `t < 0`,
/// and `|Im(γ(t) − λ(0))| ≥ ν√|t|`.
pub fn trace_cone_check(d: &Driver, trace: &TraceSamples, cp: &ConeParams) -> Result<TraceConeReport> {
    let base = d.eval(0.0)?;
    let mut rep = TraceConeReport {
        max_slope: 0.0,
        im_violation: f64::NEG_INFINITY,
        wrong_side: 0,
    };
    for k in 0..trace.len() {
        let t = trace.params[k];
        if t == 0.0 {
            continue;
        }
        let w = (trace.points[k] - base) * t.signum();
        if w.im <= 0.0 {
            rep.wrong_side += 1;
        }
        rep.max_slope = rep.max_slope.max(w.re.abs() / w.im.abs());
        rep.im_violation = rep
            .im_violation
            .max(cp.nu * t.abs().sqrt() - w.im - trace.errors[k]);
    }
    Ok(rep)
}

/// Empirical ratio `‖γ − γ̃‖_∞ / ‖λ − λ̃‖_∞` on the trace grid with `n` samples per side.
pub fn continuity_constant(d1: &Driver, d2: &Driver, n: usize, exec: Exec) -> Result<f64> {
    if n < 2 {
        return domain("need at least 2 samples per side");
    }
    let params = quadratic_grid(n);
    let mut times: Vec<f64> = params.iter().map(|t| t.abs()).collect();
    times.extend((0..=4 * n).map(|k| k as f64 / (4 * n) as f64));
    let mut den = 0.0f64;
    for &t in &times {
        den = den.max((d1.eval(t)? - d2.eval(t)?).norm());
    }
    if den < 1e-12 {
        return domain("the drivers coincide on the grid");
    }
    let a = trace_at(d1, &params, &DEFAULT_LADDER, DEFAULT_TOL, exec)?;
    let b = trace_at(d2, &params, &DEFAULT_LADDER, DEFAULT_TOL, exec)?;
    let num = a
        .points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| (p - q).norm())
        .fold(0.0, f64::max);
    Ok(num / den)
}

/// Diameter of `{γ^{(λ)}(1)}` over a family of drivers with `λ(0) = 0`.
pub fn diameter_of_endpoints(drivers: &[Driver], exec: Exec) -> Result<f64> {
    if drivers.is_empty() {
        return domain("empty family");
    }
    for d in drivers {
        if d.eval(0.0)?.norm() > 1e-12 {
            return domain("family members must start at 0");
        }
    }
    let ends = exec.try_map(drivers, |d| trace_point(d, 1.0, &DEFAULT_LADDER, DEFAULT_TOL).map(|r| r.0))?;
    let mut diam = 0.0f64;
    for i in 0..ends.len() {
        for j in (i + 1)..ends.len() {
            diam = diam.max((ends[i] - ends[j]).norm());
        }
    }
    Ok(diam)
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = (((p - a) * ab.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + ab * s)).norm()
}

/// Distance from `p` to the polyline through `points`.
pub fn polyline_distance(p: Complex64, points: &[Complex64]) -> f64 {
    match points.len() {
        0 => f64::INFINITY,
        1 => (p - points[0]).norm(),
        _ => points
            .windows(2)
            .map(|w| segment_distance(p, w[0], w[1]))
            .fold(f64::INFINITY, f64::min),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HullTraceReport {
    /// Largest distance from a hull pixel center to the trace polyline, in pixel diagonals.
    pub max_pixel_distance: f64,
    /// Hull pixels farther than one pixel diagonal from the polyline.
    pub far_pixels: usize,
    /// Trace samples with `|param| ≤ t` inside the window but outside the dilated hull.
    pub uncovered_samples: usize,
    pub hull_pixels: usize,
}

impl HullTraceReport {
    pub fn pass(&self) -> bool {
        self.far_pixels == 0 && self.uncovered_samples == 0
    }
}

/// Compares the sublevel set `{T ≤ raster.t}` with `γ([−t, t])`.
pub fn hull_equals_trace(raster: &HullRaster, trace: &TraceSamples) -> HullTraceReport {
    let grid: &Grid = &raster.grid;
    let t = raster.t;
    let part = trace.up_to(t);
    let diag = grid.pixel_diagonal();
    let hull = raster.hull();
    let mut rep = HullTraceReport {
        max_pixel_distance: 0.0,
        far_pixels: 0,
        uncovered_samples: 0,
        hull_pixels: 0,
    };
    for (k, &inside) in hull.iter().enumerate() {
        if !inside {
            continue;
        }
        rep.hull_pixels += 1;
        let dist = polyline_distance(grid.center(k), &part.points) / diag;
        rep.max_pixel_distance = rep.max_pixel_distance.max(dist);
        if dist > 1.0 {
            rep.far_pixels += 1;
        }
    }
    let dilated = crate::raster::dilate(&hull, grid.nx, grid.ny);
    for p in &part.points {
        if let Some(idx) = grid.locate(*p) {
            if !dilated[idx] {
                rep.uncovered_samples += 1;
            }
        }
    }
    rep
}
