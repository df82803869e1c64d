//! The exponential formula for `γ′(t)` of drivers smoother than 1/2-Hölder.
//!
//! The integrand needs `w(u) = g_{|t|−u}(γ(t)) − λ(|t|−u)`. That quantity is
//! the backward flow `f(u, |t|, ±i0⁺)`, and it is evaluated that way: pushing
//! the computed tip `γ(t)` forward instead loses all accuracy as `u → 0`,
//! where the forward flow of the tip reaches the driver. The forward flow of
//! `γ(t)` is still run once as a consistency check.
//!
//! With `u = v²` the integral becomes `∫₀^{√|t|} (1/v)(1 + 4v²/w²) dv`, whose
//! integrand is bounded at `v = 0` because `w² = −4u + O(u^{3/2})`.

use num_complex::Complex64;

use crate::backward::{flow_to, trace_point, DEFAULT_LADDER, DEFAULT_TOL};
use crate::driver::Driver;
use crate::error::{domain, Error, Result};
use crate::forward::{run, ForwardOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    /// Gauss–Legendre nodes on `[0, √|t|]`.
    pub nodes: usize,
    /// Height of the starting point standing in for `±i0⁺`.
    pub start_height: f64,
    pub tol: f64,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        DerivativeOptions {
            nodes: 48,
            start_height: 1e-12,
            tol: 1e-13,
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// `γ′(t)` for `t ∈ (−1, 1) ∖ {0}`.
///
/// Returns `(i/√|t|)·exp ∫₀^{|t|} [1/(2u) + 2/w(u)²] du` on both sides of 0.
/// The prefactor `i√|t|/t` found in the literature yields the derivative in
/// `|t|`, which differs by a sign for negative `t`.
pub fn derivative_formula(d: &Driver, t: f64, opts: &DerivativeOptions) -> Result<Complex64> {
    if !(t.abs() < 1.0) || t == 0.0 {
        return domain(format!("derivative parameter {t} outside (−1, 1) ∖ {{0}}"));
    }
    if !d.is_smooth() {
        return domain(format!("{} drivers are not covered by the derivative formula", d.kind()));
    }
    if opts.nodes < 2 || !(opts.start_height > 0.0) || !(opts.tol > 0.0) {
        return domain("invalid derivative options");
    }
    let h = t.abs();
    let side = t.signum();

    let (tip, _) = trace_point(d, t, &DEFAULT_LADDER, DEFAULT_TOL)?;
    let u_min = 1e-6 * h;
    let fwd = run(
        d,
        tip,
        h - u_min,
        &ForwardOptions {
            record: false,
            ..ForwardOptions::point(opts.tol.max(1e-12))
        },
    )?;
    if !fwd.survived() {
        return Err(Error::Inconsistency(format!(
            "the tip γ({t}) dies at {} before {}",
            fwd.lifetime,
            h - u_min
        )));
    }

    let z = Complex64::new(0.0, side * opts.start_height);
    let (xs, ws) = gauss_legendre(opts.nodes);
    let half = 0.5 * h.sqrt();
    let mut integral = Complex64::new(0.0, 0.0);
    for (x, wt) in xs.iter().zip(&ws) {
        let v = half * (x + 1.0);
        let w = flow_to(d, h, z, v * v, opts.tol)?;
        integral += (1.0 + 4.0 * v * v / (w * w)) / v * (wt * half);
    }
    Ok(Complex64::new(0.0, 1.0 / h.sqrt()) * integral.exp())
}

/// Central difference `(γ(t+h) − γ(t−h)) / 2h` of the trace.
pub fn finite_difference(d: &Driver, t: f64, h: f64) -> Result<Complex64> {
    if t.abs() <= h {
        return domain("the difference stencil must not straddle 0");
    }
    let ladder = [1e-3, 1e-4, 1e-5];
    let a = trace_point(d, t + h, &ladder, 1e-13)?.0;
    let b = trace_point(d, t - h, &ladder, 1e-13)?.0;
    Ok((a - b) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadrature_integrates_polynomials_exactly() {
        for n in [2, 5, 48] {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n).min(20) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q}");
            }
        }
    }

    #[test]
    fn driverless_cancellation() {
        let o = DerivativeOptions::default();
        let d = derivative_formula(&Driver::zero(), 0.25, &o).unwrap();
        assert!((d - c(0.0, 2.0)).norm() < 1e-9, "{d}");
        let d = derivative_formula(&Driver::zero(), -1.0 + 1e-9, &o).unwrap();
        assert!((d - c(0.0, 1.0)).norm() < 1e-6, "{d}");
        let d = derivative_formula(&Driver::constant(c(0.4, -0.1)), 0.25, &o).unwrap();
        assert!((d - c(0.0, 2.0)).norm() < 1e-9);
    }

    #[test]
    fn matches_finite_differences() {
        let d = Driver::linear(c(0.2, 0.1));
        for t in [0.5, -0.3] {
            let f = derivative_formula(&d, t, &DerivativeOptions::default()).unwrap();
            let fd = finite_difference(&d, t, 1e-4).unwrap();
            assert!((f - fd).norm() <= 1e-3 * fd.norm(), "t={t}: {f} vs {fd}");
        }
    }

    #[test]
    fn rough_drivers_are_rejected() {
        let o = DerivativeOptions::default();
        assert!(derivative_formula(&Driver::sqrt(c(0.3, 0.0)), 0.5, &o).is_err());
        assert!(derivative_formula(&Driver::zero(), 0.0, &o).is_err());
    }
}
