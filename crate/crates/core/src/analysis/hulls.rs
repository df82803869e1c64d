//! Raster identities between hulls of related drivers.

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::checks::hull_equals_trace;
use crate::analysis::report::CheckEntry;
use crate::backward::{trace_curve, trace_point, DEFAULT_LADDER, DEFAULT_TOL};
use crate::driver::Driver;
use crate::error::{domain, Error, Result};
use crate::forward::{advance, run, ForwardOptions};
use crate::raster::{compare_masks, hull_raster, right_hull_lifetimes, Grid, HullRaster, MaskComparison, RasterOptions, Window};

/// Largest disagreeing fraction tolerated by the raster identities.
pub const RASTER_TOLERANCE: f64 = 0.01;

/// Tolerance of the trace-level concatenation identity.
pub const TRACE_CONCATENATION_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HullSuiteConfig {
    pub t: f64,
    pub s: f64,
    /// Factor of the scaling identity.
    pub scale: f64,
    /// Shift of the translation identity.
    pub shift: Complex64,
    pub window: Window,
    pub resolution: usize,
    /// Samples per side of the trace used against the hull.
    pub trace_samples: usize,
    #[serde(skip)]
    pub raster: RasterOptions,
}

impl Default for HullSuiteConfig {
    fn default() -> Self {
        HullSuiteConfig {
            t: 0.5,
            s: 0.25,
            scale: 2.0,
            shift: Complex64::new(0.5, 0.0),
            window: Window::square(3.0),
            resolution: 64,
            trace_samples: 64,
            raster: RasterOptions::default(),
        }
    }
}

impl HullSuiteConfig {
    fn grid(&self, window: Window) -> Result<Grid> {
        Grid::new(window, self.resolution, self.resolution)
    }
}

fn mirrored(w: &Window) -> Window {
    Window {
        x_min: -w.x_max,
        x_max: -w.x_min,
        y_min: -w.y_max,
        y_max: -w.y_min,
    }
}

/// `L_{t,λ+a} = a + L_{t,λ}`.
pub fn translation_identity(d: &Driver, cfg: &HullSuiteConfig) -> Result<MaskComparison> {
    let a = hull_raster(&d.shifted(cfg.shift), cfg.t, cfg.grid(cfg.window)?, &cfg.raster)?;
    let b = hull_raster(d, cfg.t, cfg.grid(cfg.window.translated(-cfg.shift))?, &cfg.raster)?;
    Ok(compare(&a.hull(), &b.hull(), cfg))
}

/// `L_{t, aλ(·/a²)} = a·L_{t/a², λ}`.
pub fn scaling_identity(d: &Driver, cfg: &HullSuiteConfig) -> Result<MaskComparison> {
    let a = cfg.scale;
    let scaled = d.scaled(a)?;
    let lhs = hull_raster(&scaled, cfg.t, cfg.grid(cfg.window)?, &cfg.raster)?;
    let rhs = hull_raster(d, cfg.t / (a * a), cfg.grid(cfg.window.scaled(1.0 / a))?, &cfg.raster)?;
    Ok(compare(&lhs.hull(), &rhs.hull(), cfg))
}

/// `L_{t,−λ} = −L_{t,λ}`.
pub fn symmetry_identity(d: &Driver, cfg: &HullSuiteConfig) -> Result<MaskComparison> {
    let lhs = hull_raster(&d.negated(), cfg.t, cfg.grid(cfg.window)?, &cfg.raster)?;
    let rhs = hull_raster(d, cfg.t, cfg.grid(mirrored(&cfg.window))?, &cfg.raster)?;
    let mut flipped = rhs.hull();
    flipped.reverse();
    Ok(compare(&lhs.hull(), &flipped, cfg))
}

/// `L_{t,λ} = i·R_{t,−iλ(t−·)}`.
pub fn duality_identity(d: &Driver, cfg: &HullSuiteConfig) -> Result<MaskComparison> {
    let grid = cfg.grid(cfg.window)?;
    let left = hull_raster(d, cfg.t, grid, &cfg.raster)?;
    let dual = d.dual(cfg.t)?;
    let rot = Complex64::new(0.0, -1.0);
    let points: Vec<Complex64> = grid.centers().into_iter().map(|q| rot * q).collect();
    let right = right_hull_lifetimes(&dual, cfg.t, &points, &grid, &cfg.raster)?;
    let rhs: Vec<bool> = right.iter().map(|&l| l <= cfg.t).collect();
    Ok(compare(&left.hull(), &rhs, cfg))
}

fn compare(a: &[bool], b: &[bool], cfg: &HullSuiteConfig) -> MaskComparison {
    compare_masks(a, b, cfg.resolution, cfg.resolution)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InclusionReport {
    /// Pixels dying in `(t, t+s]`.
    pub tested: usize,
    /// Of those, images `g_t(z)` that outlive `s` under `λ(t+·)`.
    pub violations: usize,
}

impl InclusionReport {
    pub fn fraction(&self) -> f64 {
        if self.tested == 0 {
            0.0
        } else {
            self.violations as f64 / self.tested as f64
        }
    }
}

/// `g_t(L_{t+s,λ} ∖ L_{t,λ}) ⊂ L_{s,λ(t+·)}`, pixel by pixel. The image point
/// is tested with the pixel threshold carried through `g_t`, which makes the
/// two death criteria the same up to integration error.
pub fn concatenation_inclusion(d: &Driver, cfg: &HullSuiteConfig) -> Result<InclusionReport> {
    let (t, s) = (cfg.t, cfg.s);
    if !(t + s <= d.horizon() + 1e-12) {
        return domain("t + s exceeds the horizon");
    }
    let grid = cfg.grid(cfg.window)?;
    let r = hull_raster(d, t + s, grid, &cfg.raster)?;
    let band: Vec<Complex64> = (0..grid.len())
        .filter(|&k| r.lifetimes[k] > t && r.lifetimes[k] <= t + s)
        .map(|k| grid.center(k))
        .collect();
    let rest = d.restricted(t)?;
    let base = cfg.raster.forward(&grid);
    let slack = 1e-6;
    let ok = cfg.raster.exec.map(&band, |&z| {
        let Ok((g, dg)) = advance(d, z, t, cfg.raster.tol) else {
            return false;
        };
        let opts = ForwardOptions {
            distance_threshold: base.distance_threshold.map(|tau| tau * dg.norm()),
            ..base
        };
        run(&rest, g, s, &opts).is_ok_and(|tr| tr.lifetime <= s + slack)
    });
    Ok(InclusionReport {
        tested: band.len(),
        violations: ok.iter().filter(|&&b| !b).count(),
    })
}

/// `max |g_t(γ(t+s')) − γ^{(λ(t+·))}(s')|` over `s' ∈ {s/4, s/2, s}`.
pub fn trace_concatenation(d: &Driver, t: f64, s: f64) -> Result<f64> {
    if !(t > 0.0 && s > 0.0 && t + s <= d.horizon() + 1e-12) {
        return domain("need t, s > 0 with t + s within the horizon");
    }
    let rest = d.restricted(t)?;
    let mut worst = 0.0f64;
    for sp in [s / 4.0, s / 2.0, s] {
        let (tip, _) = trace_point(d, t + sp, &DEFAULT_LADDER, 1e-12)?;
        let (lhs, _) = advance(d, tip, t, 1e-12)?;
        let (rhs, _) = trace_point(&rest, sp, &DEFAULT_LADDER, 1e-12)?;
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// Mismatch between a raster and its mirror image in the real axis, after
/// one-pixel dilation. The window must be symmetric about the real axis.
pub fn conjugation_symmetry(r: &HullRaster) -> Result<MaskComparison> {
    let g = &r.grid;
    if g.window.y_min != -g.window.y_max {
        return domain("the window is not symmetric about the real axis");
    }
    let hull = r.hull();
    let mut flipped = vec![false; hull.len()];
    for j in 0..g.ny {
        for i in 0..g.nx {
            flipped[(g.ny - 1 - j) * g.nx + i] = hull[j * g.nx + i];
        }
    }
    Ok(compare_masks(&hull, &flipped, g.nx, g.ny))
}

/// Pixels of `{T ≤ t/2}` outside `{T ≤ t}`; zero by construction.
pub fn nesting_violations(r: &HullRaster) -> usize {
    let inner = r.sublevel(r.t / 2.0);
    let outer = r.hull();
    inner.iter().zip(&outer).filter(|(&a, &b)| a && !b).count()
}

/// The raster identities and the trace-level concatenation identity.
pub fn hull_property_suite(d: &Driver, cfg: &HullSuiteConfig) -> Vec<CheckEntry> {
    let frac = |r: Result<MaskComparison>| r.map(|m| m.fraction());
    let mut out = vec![
        CheckEntry::timed("hull.translation", "L_{t,λ+a} = a + L_{t,λ}", RASTER_TOLERANCE, || {
            frac(translation_identity(d, cfg))
        }),
        CheckEntry::timed("hull.scaling", "L_{t,aλ(·/a²)} = a·L_{t/a²,λ}", RASTER_TOLERANCE, || {
            frac(scaling_identity(d, cfg))
        }),
        CheckEntry::timed("hull.symmetry", "L_{t,−λ} = −L_{t,λ}", RASTER_TOLERANCE, || {
            frac(symmetry_identity(d, cfg))
        }),
        CheckEntry::timed("hull.duality", "L_{t,λ} = i·R_{t,−iλ(t−·)}", RASTER_TOLERANCE, || {
            frac(duality_identity(d, cfg))
        }),
        CheckEntry::timed(
            "hull.concatenation",
            "g_t(L_{t+s,λ} ∖ L_{t,λ}) ⊂ L_{s,λ(t+·)}",
            RASTER_TOLERANCE,
            || concatenation_inclusion(d, cfg).map(|r| r.fraction()),
        ),
        CheckEntry::timed(
            "trace.concatenation",
            "g_t(γ(t+s)) = γ^{(λ(t+·))}(s)",
            TRACE_CONCATENATION_TOLERANCE,
            || trace_concatenation(d, cfg.t, cfg.s),
        ),
    ];

    let base = cfg
        .grid(cfg.window)
        .and_then(|g| hull_raster(d, cfg.t, g, &cfg.raster))
        .map_err(|e| e.to_string());
    let base = || base.as_ref().map_err(|e| Error::Inconsistency(e.clone()));
    out.push(CheckEntry::timed("hull.nesting", "L_s ⊂ L_t for s < t", 0.0, || {
        base().map(|r| nesting_violations(r) as f64)
    }));
    out.push(CheckEntry::timed("hull.base_point", "λ(0) ∈ L_t", 0.0, || {
        let r = base()?;
        Ok(match r.grid.locate(d.eval(0.0)?) {
            Some(k) if r.lifetimes[k] <= 0.0 => 0.0,
            Some(_) => 1.0,
            None => f64::NAN,
        })
    }));
    out.push(CheckEntry::timed("hull.equals_trace", "L_t = γ([−t, t])", 0.0, || {
        let r = base()?;
        let tr = trace_curve(d, cfg.trace_samples, &DEFAULT_LADDER, DEFAULT_TOL, cfg.raster.exec)?;
        let rep = hull_equals_trace(r, &tr);
        Ok((rep.far_pixels + rep.uncovered_samples) as f64)
    }));
    if d.is_real() {
        out.push(CheckEntry::timed("hull.real_symmetry", "L_t = K̄_t ∪ K̄_t*", 0.0, || {
            let half = cfg.window.y_max.abs().max(cfg.window.y_min.abs());
            let w = Window::new(cfg.window.x_min, cfg.window.x_max, -half, half)?;
            let r = hull_raster(d, cfg.t, cfg.grid(w)?, &cfg.raster)?;
            let m = conjugation_symmetry(&r)?;
            Ok((m.a_outside + m.b_outside) as f64)
        }));
    }
    out
}
