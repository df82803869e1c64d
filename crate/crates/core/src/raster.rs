//! Escape-time rasters of the left hull `L_t = {z : T_z ≤ t}` and of the right hull.
//!
//! A pixel's lifetime is the first time its center either reaches the driver
//! or comes within the distance threshold of the hull (see
//! [`ForwardOptions::distance_threshold`]). The threshold defaults to one pixel
//! diagonal, so the sublevel set `{lifetime ≤ t}` is the set of pixels the
//! hull passes through or touches. Survivors carry `+∞`; pixels whose flow
//! overflowed carry NaN.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::driver::Driver;
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::forward::{run, ForwardOptions};

/// Death threshold for rasters, relative to the window diagonal.
pub const RASTER_EPS_KILL_FRACTION: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) || ![x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite()) {
            return domain("window bounds must be finite with min < max");
        }
        Ok(Window {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn square(half: f64) -> Self {
        Window::new(-half, half, -half, half).expect("positive half width")
    }

    pub fn diagonal(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }

    /// The window with `a` added to every point.
    pub fn translated(&self, a: Complex64) -> Self {
        Window {
            x_min: self.x_min + a.re,
            x_max: self.x_max + a.re,
            y_min: self.y_min + a.im,
            y_max: self.y_max + a.im,
        }
    }

    /// The window with every point multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        Window {
            x_min: self.x_min * s,
            x_max: self.x_max * s,
            y_min: self.y_min * s,
            y_max: self.y_max * s,
        }
    }
}

/// Pixel grid over a window; pixel `(i, j)` is stored at `j·nx + i`, with
/// `i` running along x and `j` along y, both increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(window: Window, nx: usize, ny: usize) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return domain("raster resolution must be at least 2x2");
        }
        Ok(Grid { window, nx, ny })
    }

    pub fn dx(&self) -> f64 {
        (self.window.x_max - self.window.x_min) / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        (self.window.y_max - self.window.y_min) / self.ny as f64
    }

    pub fn pixel_diagonal(&self) -> f64 {
        self.dx().hypot(self.dy())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, idx: usize) -> Complex64 {
        let (i, j) = (idx % self.nx, idx / self.nx);
        Complex64::new(
            self.window.x_min + (i as f64 + 0.5) * self.dx(),
            self.window.y_min + (j as f64 + 0.5) * self.dy(),
        )
    }

    pub fn centers(&self) -> Vec<Complex64> {
        (0..self.len()).map(|k| self.center(k)).collect()
    }

    /// Index of the pixel containing `z`, if inside the window.
    pub fn locate(&self, z: Complex64) -> Option<usize> {
        let fx = (z.re - self.window.x_min) / self.dx();
        let fy = (z.im - self.window.y_min) / self.dy();
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = (fx.floor() as usize, fy.floor() as usize);
        (i < self.nx && j < self.ny).then_some(j * self.nx + i)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterOptions {
    pub tol: f64,
    /// Distance threshold in units of the pixel diagonal.
    pub threshold_pixels: f64,
    pub exec: Exec,
}

impl Default for RasterOptions {
    fn default() -> Self {
        RasterOptions {
            tol: 1e-8,
            threshold_pixels: 1.0,
            exec: Exec::Parallel,
        }
    }
}

impl RasterOptions {
    pub fn with_exec(exec: Exec) -> Self {
        RasterOptions {
            exec,
            ..Default::default()
        }
    }

    pub(crate) fn forward(&self, grid: &Grid) -> ForwardOptions {
        ForwardOptions {
            tol: self.tol,
            eps_kill: RASTER_EPS_KILL_FRACTION * grid.window.diagonal(),
            distance_threshold: Some(self.threshold_pixels * grid.pixel_diagonal()),
            record: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HullRaster {
    pub grid: Grid,
    /// Time the raster was computed for; lifetimes above it are unknown.
    pub t: f64,
    pub lifetimes: Vec<f64>,
}

impl HullRaster {
    /// Pixels with lifetime `≤ s`.
    pub fn sublevel(&self, s: f64) -> Vec<bool> {
        self.lifetimes.iter().map(|&l| l <= s).collect()
    }

    pub fn hull(&self) -> Vec<bool> {
        self.sublevel(self.t)
    }

    pub fn overflow_count(&self) -> usize {
        self.lifetimes.iter().filter(|l| l.is_nan()).count()
    }
}

/// Left-hull lifetimes at arbitrary points, with thresholds taken from `grid`.
pub fn lifetimes_at(
    d: &Driver,
    t: f64,
    points: &[Complex64],
    grid: &Grid,
    opts: &RasterOptions,
) -> Result<Vec<f64>> {
    if !(opts.tol > 0.0) || !(opts.threshold_pixels >= 0.0) {
        return domain("tolerance and threshold must be positive");
    }
    if !(0.0..=d.horizon() + 1e-12).contains(&t) {
        return domain(format!("time {t} outside [0, {}]", d.horizon()));
    }
    let fwd = opts.forward(grid);
    Ok(opts.exec.map(points, |&z| match run(d, z, t, &fwd) {
        Ok(tr) => tr.lifetime,
        Err(Error::Overflow { .. }) => f64::NAN,
        // other errors are excluded by the checks above
        Err(_) => f64::NAN,
    }))
}

/// Raster of the left hull `L_t`.
pub fn hull_raster(d: &Driver, t: f64, grid: Grid, opts: &RasterOptions) -> Result<HullRaster> {
    let lifetimes = lifetimes_at(d, t, &grid.centers(), &grid, opts)?;
    Ok(HullRaster { grid, t, lifetimes })
}

/// Raster of the right hull `R_t`, through `R_{t,λ} = i·L_{t, −iλ(t−·)}`: the
/// value at pixel `p` is the left-hull lifetime of the dual driver at `−i·p`.
pub fn right_hull_raster(d: &Driver, t: f64, grid: Grid, opts: &RasterOptions) -> Result<HullRaster> {
    let lifetimes = right_hull_lifetimes(d, t, &grid.centers(), &grid, opts)?;
    Ok(HullRaster { grid, t, lifetimes })
}

/// Right-hull lifetimes at arbitrary points, with thresholds taken from `grid`.
pub fn right_hull_lifetimes(
    d: &Driver,
    t: f64,
    points: &[Complex64],
    grid: &Grid,
    opts: &RasterOptions,
) -> Result<Vec<f64>> {
    let dual = d.dual(t)?;
    let rot = Complex64::new(0.0, -1.0);
    let points: Vec<Complex64> = points.iter().map(|p| rot * p).collect();
    lifetimes_at(&dual, t, &points, grid, opts)
}

/// 8-neighbour dilation by one pixel.
pub fn dilate(mask: &[bool], nx: usize, ny: usize) -> Vec<bool> {
    let mut out = vec![false; mask.len()];
    for j in 0..ny {
        for i in 0..nx {
            if !mask[j * nx + i] {
                continue;
            }
            for jj in j.saturating_sub(1)..=(j + 1).min(ny - 1) {
                for ii in i.saturating_sub(1)..=(i + 1).min(nx - 1) {
                    out[jj * nx + ii] = true;
                }
            }
        }
    }
    out
}

/// Set comparison with one-pixel slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaskComparison {
    /// Pixels of `a` outside the dilation of `b`.
    pub a_outside: usize,
    /// Pixels of `b` outside the dilation of `a`.
    pub b_outside: usize,
    /// `|a ∪ b|`.
    pub union: usize,
}

impl MaskComparison {
    /// Fraction of the union that disagrees after dilation; 0 for two empty sets.
    pub fn fraction(&self) -> f64 {
        if self.union == 0 {
            0.0
        } else {
            (self.a_outside + self.b_outside) as f64 / self.union as f64
        }
    }
}

pub fn compare_masks(a: &[bool], b: &[bool], nx: usize, ny: usize) -> MaskComparison {
    assert_eq!(a.len(), b.len());
    let da = dilate(a, nx, ny);
    let db = dilate(b, nx, ny);
    MaskComparison {
        a_outside: a.iter().zip(&db).filter(|(&x, &y)| x && !y).count(),
        b_outside: b.iter().zip(&da).filter(|(&x, &y)| x && !y).count(),
        union: a.iter().zip(b).filter(|(&x, &y)| x || y).count(),
    }
}
