//! The motion `α ↦ γ^{(α)}(t)` of the trace under multiplication of the driver by `α`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::backward::trace_point;
use crate::driver::Driver;
use crate::error::{domain, Result};
use crate::exec::Exec;

/// Grid resolution used for the norm estimate behind [`certified_alpha_radius`].
pub const CERTIFY_GRID: usize = 512;

/// Radius of the disk `|α| ≤ σ / ‖λ‖`, intersected with the unit disk.
pub fn certified_alpha_radius(d: &Driver, sigma: f64) -> Result<f64> {
    let norm = d.holder_norm_estimate(CERTIFY_GRID)?.norm_lower_bound;
    Ok(if norm == 0.0 { 1.0 } else { (sigma / norm).min(1.0) })
}

/// `γ^{(α)}(t)`, the trace of `αλ`, with its extrapolation error.
pub fn motion_sample(d: &Driver, alpha: Complex64, t: f64, ladder: &[f64], tol: f64) -> Result<(Complex64, f64)> {
    if !(alpha.norm() <= 1.0) {
        return domain(format!("|α| = {} exceeds 1", alpha.norm()));
    }
    if !(0.0..=1.0).contains(&t) {
        return domain(format!("motion parameter {t} outside [0, 1]"));
    }
    trace_point(&d.multiplied(alpha), t, ladder, tol)
}

/// `m` equally spaced points on the circle `|α − center| = radius`.
pub fn alpha_circle(center: Complex64, radius: f64, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|k| center + Complex64::from_polar(radius, 2.0 * PI * k as f64 / m as f64))
        .collect()
}

/// Mean-value residual `|γ^{(c)}(t) − mean_k γ^{(c + r e^{2πik/m})}(t)|`.
#[allow(clippy::too_many_arguments)]
pub fn analyticity_residual(
    d: &Driver,
    t: f64,
    center: Complex64,
    radius: f64,
    m: usize,
    ladder: &[f64],
    tol: f64,
    exec: Exec,
) -> Result<f64> {
    if m < 8 {
        return domain("need at least 8 circle points");
    }
    if !(radius > 0.0) || center.norm() + radius > 1.0 {
        return domain("the circle must lie in the closed unit disk");
    }
    let mut alphas = vec![center];
    alphas.extend(alpha_circle(center, radius, m));
    let vals = exec.try_map(&alphas, |&a| motion_sample(d, a, t, ladder, tol).map(|v| v.0))?;
    let mean = vals[1..].iter().sum::<Complex64>() / m as f64;
    Ok((vals[0] - mean).norm())
}

/// The motion of the segment `[0, 2i]`: `F(α, is) = γ^{(α)}(s²/4)`.
pub fn motion_of_segment(d: &Driver, a: Complex64, alpha: Complex64, ladder: &[f64], tol: f64) -> Result<Complex64> {
    let s = a.im;
    if a.re != 0.0 || !(0.0..=2.0).contains(&s) {
        return domain(format!("{a} is not on the segment [0, 2i]"));
    }
    Ok(motion_sample(d, alpha, s * s / 4.0, ladder, tol)?.0)
}

/// `γ^{(α)}(t)` on a product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionGrid {
    pub alphas: Vec<Complex64>,
    pub params: Vec<f64>,
    /// Row-major: `values[i * params.len() + j] = γ^{(alphas[i])}(params[j])`.
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub ladder: Vec<f64>,
    pub tol: f64,
}

impl MotionGrid {
    pub fn value(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.params.len() + j]
    }

    /// Values at a fixed `α`, in parameter order.
    pub fn row(&self, i: usize) -> &[Complex64] {
        let n = self.params.len();
        &self.values[i * n..(i + 1) * n]
    }
}

pub fn motion_grid(
    d: &Driver,
    alphas: &[Complex64],
    params: &[f64],
    ladder: &[f64],
    tol: f64,
    exec: Exec,
) -> Result<MotionGrid> {
    let cells: Vec<(Complex64, f64)> = alphas
        .iter()
        .flat_map(|&a| params.iter().map(move |&t| (a, t)))
        .collect();
    let res = exec.try_map(&cells, |&(a, t)| motion_sample(d, a, t, ladder, tol))?;
    Ok(MotionGrid {
        alphas: alphas.to_vec(),
        params: params.to_vec(),
        values: res.iter().map(|r| r.0).collect(),
        errors: res.iter().map(|r| r.1).collect(),
        ladder: ladder.to_vec(),
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backward::{DEFAULT_LADDER, DEFAULT_TOL};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample(d: &Driver, a: Complex64, t: f64) -> Complex64 {
        motion_sample(d, a, t, &DEFAULT_LADDER, DEFAULT_TOL).unwrap().0
    }

    #[test]
    fn base_point_is_the_straight_slit() {
        let d = Driver::sqrt(c(0.2, 0.1));
        assert!((sample(&d, c(0.0, 0.0), 0.49) - c(0.0, 1.4)).norm() < 1e-9);
    }

    #[test]
    fn constant_driver_moves_affinely() {
        let cc = c(0.3, 0.2);
        let d = Driver::constant(cc);
        let a = c(0.0, 0.5);
        assert!((sample(&d, a, 1.0) - (c(0.0, 2.0) + a * cc)).norm() < 1e-9);
        let r = analyticity_residual(&d, 1.0, c(0.0, 0.0), 0.5, 8, &DEFAULT_LADDER, DEFAULT_TOL, Exec::Sequential).unwrap();
        assert!(r < 1e-12, "{r}");
    }

    #[test]
    fn real_slice_matches_prescaled_driver() {
        let d = Driver::sqrt(c(0.3, 0.0));
        let pre = Driver::sqrt(c(0.24, 0.0));
        let a = sample(&d, c(0.8, 0.0), 0.5);
        let b = trace_point(&pre, 0.5, &DEFAULT_LADDER, DEFAULT_TOL).unwrap().0;
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn segment_motion() {
        let cc = c(0.1, -0.2);
        let d = Driver::constant(cc);
        let lad = &DEFAULT_LADDER;
        assert!((motion_of_segment(&d, c(0.0, 2.0), c(0.0, 0.0), lad, DEFAULT_TOL).unwrap() - c(0.0, 2.0)).norm() < 1e-9);
        let v = motion_of_segment(&d, c(0.0, 1.0), c(0.6, 0.0), lad, DEFAULT_TOL).unwrap();
        assert!((v - (c(0.0, 1.0) + 0.6 * cc)).norm() < 1e-9);
        let v = motion_of_segment(&d, c(0.0, 0.0), c(0.3, 0.3), lad, DEFAULT_TOL).unwrap();
        assert_eq!(v, c(0.3, 0.3) * cc);
        assert!(motion_of_segment(&d, c(0.1, 1.0), c(0.0, 0.0), lad, DEFAULT_TOL).is_err());
    }

    #[test]
    fn alpha_outside_disk_is_rejected() {
        assert!(motion_sample(&Driver::zero(), c(1.0, 0.5), 0.5, &DEFAULT_LADDER, DEFAULT_TOL).is_err());
    }

    #[test]
    fn certified_radius() {
        assert_eq!(certified_alpha_radius(&Driver::zero(), 1.0 / 3.0).unwrap(), 1.0);
        let r = certified_alpha_radius(&Driver::sqrt(c(1.0, 0.0)), 1.0 / 3.0).unwrap();
        assert!((r - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn grid_layout() {
        let d = Driver::constant(c(0.2, 0.0));
        let alphas = [c(0.0, 0.0), c(0.5, 0.0)];
        let params = [0.25, 1.0];
        let g = motion_grid(&d, &alphas, &params, &DEFAULT_LADDER, DEFAULT_TOL, Exec::Parallel).unwrap();
        assert!((g.value(1, 0) - c(0.1, 1.0)).norm() < 1e-9);
        assert_eq!(g.row(1).len(), 2);
    }
}
