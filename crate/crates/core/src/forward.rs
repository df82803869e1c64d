//! Forward Loewner flow `∂ₜ g = 2 / (g − λ(t))`, `g₀(z) = z`, for complex drivers.
//!
//! The state carries `g` together with `∂_z g`. The derivative is what turns
//! the closest approach of `g` to the driver into a distance estimate for `z`
//! with respect to the hull, which is how rasters decide pixel membership.

use num_complex::Complex64;

use crate::driver::Driver;
use crate::error::{domain, Error, Result};
use crate::ode::{dopri_step, next_step, MIN_STEP};

/// Death threshold for single-point queries.
pub const POINT_EPS_KILL: f64 = 1e-6;

/// Steps never exceed this fraction of `|g − λ|²/2`.
pub const GAP_STEP_FRACTION: f64 = 0.1;

/// Largest admissible `|g|` before the state counts as overflowed.
const OVERFLOW_LIMIT: f64 = 1e150;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardOptions {
    pub tol: f64,
    /// A point dies when `|g − λ|` falls below this.
    pub eps_kill: f64,
    /// When set, a point also dies once `|g − λ| / |∂_z g|` falls to this
    /// value. Used by rasters, where it is tied to the pixel size.
    pub distance_threshold: Option<f64>,
    /// Keep every accepted state in the trajectory.
    pub record: bool,
}

impl ForwardOptions {
    pub fn point(tol: f64) -> Self {
        ForwardOptions {
            tol,
            eps_kill: POINT_EPS_KILL,
            distance_threshold: None,
            record: true,
        }
    }
}

/// Output of one forward integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Complex64>,
    /// Death time, or `f64::INFINITY` when the point survived to the end.
    pub lifetime: f64,
    /// Smallest `|g − λ|` seen.
    pub terminal_gap: f64,
    /// Time at which `terminal_gap` was seen.
    pub closest_time: f64,
    /// Time where integration stopped.
    pub end_time: f64,
    pub end_state: Complex64,
    pub end_derivative: Complex64,
}

impl Trajectory {
    pub fn survived(&self) -> bool {
        self.lifetime.is_infinite()
    }
}

/// Integrate one point with the single-point death threshold and record the path.
pub fn integrate_forward(d: &Driver, z: Complex64, t_max: f64, tol: f64) -> Result<Trajectory> {
    run(d, z, t_max, &ForwardOptions::point(tol))
}

/// `(g_t(z), ∂_z g_t(z))`. Errors when `z` dies before `t`.
pub fn advance(d: &Driver, z: Complex64, t: f64, tol: f64) -> Result<(Complex64, Complex64)> {
    let opts = ForwardOptions {
        record: false,
        ..ForwardOptions::point(tol)
    };
    let tr = run(d, z, t, &opts)?;
    if !tr.survived() {
        return Err(Error::Inconsistency(format!(
            "point {z} dies at {} before {t}",
            tr.lifetime
        )));
    }
    Ok((tr.end_state, tr.end_derivative))
}

fn check_horizon(d: &Driver, t_max: f64) -> Result<()> {
    if !(t_max >= 0.0) || t_max > d.horizon() + 1e-12 {
        return domain(format!(
            "time {t_max} outside the driver's domain [0, {}]",
            d.horizon()
        ));
    }
    Ok(())
}

/// Forward integration with explicit options.
pub fn run(d: &Driver, z: Complex64, t_max: f64, opts: &ForwardOptions) -> Result<Trajectory> {
    if !(opts.tol > 0.0) {
        return domain("tolerance must be positive");
    }
    check_horizon(d, t_max)?;
    let t_max = t_max.min(d.horizon());

    let one = Complex64::new(1.0, 0.0);
    let mut t = 0.0;
    let mut y = [z, one];
    let mut w = z - d.value(0.0);
    let mut gap = w.norm();

    let mut out = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        lifetime: f64::INFINITY,
        terminal_gap: gap,
        closest_time: 0.0,
        end_time: 0.0,
        end_state: z,
        end_derivative: one,
    };
    if opts.record {
        out.times.push(0.0);
        out.states.push(z);
    }
    let dies_now = |gap: f64, deriv: Complex64| {
        gap < opts.eps_kill || opts.distance_threshold.is_some_and(|tau| gap / deriv.norm() <= tau)
    };
    if dies_now(gap, one) {
        out.lifetime = 0.0;
        return Ok(out);
    }

    let rhs = |s: f64, y: &[Complex64; 2]| {
        let r = one / (y[0] - d.value(s));
        [r * 2.0, -y[1] * r * r * 2.0]
    };
    let mut k1 = rhs(t, &y);
    let mut h = (0.05 * gap * gap).min(t_max).max(MIN_STEP);

    while t < t_max {
        let cap = GAP_STEP_FRACTION * gap * gap / 2.0;
        let step = h.min(cap).min(t_max - t);
        let trial = dopri_step(&rhs, t, &y, &k1, step, opts.tol);
        if trial.err > 1.0 {
            h = next_step(step, trial.err.min(1e10));
            if h < MIN_STEP {
                return Err(Error::Overflow { time: t });
            }
            continue;
        }
        let t_new = if t_max - t - step <= 1e-15 * t_max.max(1.0) {
            t_max
        } else {
            t + step
        };
        if !(trial.y[0].norm() < OVERFLOW_LIMIT) || !(trial.y[1].norm() < OVERFLOW_LIMIT) {
            return Err(Error::Overflow { time: t_new });
        }
        let w_new = trial.y[0] - d.value(t_new);
        let gap_new = w_new.norm();
        if gap_new < out.terminal_gap {
            out.terminal_gap = gap_new;
            out.closest_time = t_new;
        }
        if opts.record {
            out.times.push(t_new);
            out.states.push(trial.y[0]);
        }

        if gap_new < opts.eps_kill {
            out.lifetime = extrapolate_zero(t, w * w, t_new, w_new * w_new);
            finish(&mut out, t_new, &trial.y);
            return Ok(out);
        }
        if let Some(tau) = opts.distance_threshold {
            let de_new = gap_new / trial.y[1].norm();
            if de_new <= tau {
                let de_old = gap / y[1].norm();
                let frac = if de_old > de_new {
                    ((de_old - tau) / (de_old - de_new)).clamp(0.0, 1.0)
                } else {
                    1.0
                };
                out.lifetime = t + frac * (t_new - t);
                finish(&mut out, t_new, &trial.y);
                return Ok(out);
            }
        }

        t = t_new;
        y = trial.y;
        k1 = trial.dy;
        w = w_new;
        gap = gap_new;
        h = next_step(step, trial.err);
    }
    finish(&mut out, t, &y);
    Ok(out)
}

fn finish(out: &mut Trajectory, t: f64, y: &[Complex64; 2]) {
    out.end_time = t;
    out.end_state = y[0];
    out.end_derivative = y[1];
}

/// Zero of the linear fit through `(t1, w1²)`, `(t2, w2²)`, in the least-squares
/// sense when the fit line misses the origin. Exact for the driverless flow,
/// where `w² = z² + 4t`.
fn extrapolate_zero(t1: f64, sq1: Complex64, t2: f64, sq2: Complex64) -> f64 {
    let slope = (sq2 - sq1) / (t2 - t1);
    let s2 = slope.norm_sqr();
    if !(s2 > 0.0) || !s2.is_finite() {
        return t2;
    }
    let dt = -(sq2 * slope.conj()).re / s2;
    (t2 + dt).max(t1)
}

/// Scaled residuals `|g_t(z) − z − 2t/z|·|z|²` of the expansion at infinity.
/// Returns, for each radius, the maximum over `m` equally spaced points.
pub fn expansion_at_infinity(d: &Driver, t: f64, radii: &[f64], m: usize) -> Result<Vec<f64>> {
    if m == 0 {
        return domain("need at least one point per circle");
    }
    radii
        .iter()
        .map(|&r| {
            let mut worst = 0.0f64;
            for k in 0..m {
                let z = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
                let tr = run(
                    d,
                    z,
                    t,
                    &ForwardOptions {
                        record: false,
                        ..ForwardOptions::point(1e-13)
                    },
                )?;
                if !tr.survived() {
                    return Err(Error::Inconsistency(format!(
                        "far point {z} died at {}",
                        tr.lifetime
                    )));
                }
                let res = (tr.end_state - z - 2.0 * t / z).norm() * r * r;
                worst = worst.max(res);
            }
            Ok(worst)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn lifetime_of_imaginary_points() {
        for y in [0.5, 1.0, 1.5, 1.9] {
            let tr = integrate_forward(&Driver::zero(), c(0.0, y), 1.0, 1e-10).unwrap();
            assert!((tr.lifetime - y * y / 4.0).abs() < 1e-9, "y={y}: {}", tr.lifetime);
            assert!(tr.terminal_gap < POINT_EPS_KILL);
        }
    }

    #[test]
    fn real_points_survive() {
        for x in [0.5, -1.0, 2.0] {
            let tr = integrate_forward(&Driver::zero(), c(x, 0.0), 1.0, 1e-11).unwrap();
            assert!(tr.survived());
            let exact = (x * x + 4.0f64).sqrt() * x.signum();
            assert!((tr.end_state - c(exact, 0.0)).norm() < 1e-9);
            assert!(tr.terminal_gap > POINT_EPS_KILL);
            assert_eq!(tr.times[0], 0.0);
            assert_eq!(tr.states[0], c(x, 0.0));
            assert!(tr.times.windows(2).all(|w| w[1] > w[0]));
        }
    }

    #[test]
    fn derivative_tracks_closed_form() {
        // g = √(z² + 4t), g' = z / g
        let z = c(0.7, 1.1);
        let (g, dg) = advance(&Driver::zero(), z, 1.0, 1e-12).unwrap();
        let exact = (z * z + 4.0).sqrt();
        assert!((g - exact).norm() < 1e-10);
        assert!((dg - z / exact).norm() < 1e-9);
    }

    #[test]
    fn far_point_matches_expansion() {
        let z = c(0.0, 100.0);
        let (g, _) = advance(&Driver::zero(), z, 1.0, 1e-12).unwrap();
        assert!((g - (z + 2.0 / z)).norm() <= 1e-3);
    }

    #[test]
    fn base_point_dies_immediately() {
        let d = Driver::constant(c(0.3, 0.2));
        let tr = integrate_forward(&d, c(0.3, 0.2), 1.0, 1e-10).unwrap();
        assert_eq!(tr.lifetime, 0.0);
    }

    #[test]
    fn translation_of_lifetimes() {
        let a = c(0.5, 0.0);
        let l0 = integrate_forward(&Driver::zero(), c(0.0, 1.2), 1.0, 1e-10).unwrap();
        let l1 = integrate_forward(&Driver::constant(a), a + c(0.0, 1.2), 1.0, 1e-10).unwrap();
        assert!((l0.lifetime - l1.lifetime).abs() < 1e-9);
    }

    #[test]
    fn expansion_residuals_closed_form() {
        // λ ≡ 0: |√(z²+4t) − z − 2t/z|·|z|² ≈ 2t²/|z|
        let r = expansion_at_infinity(&Driver::zero(), 1.0, &[50.0, 100.0], 16).unwrap();
        assert!(r[0] < 2.0 * 1.0 / 50.0 * 1.1 + 1e-3, "{r:?}");
        assert!(r[1] <= 1.5 * r[0] + 1e-3);
    }

    #[test]
    fn expansion_with_smooth_driver_is_bounded() {
        let d = Driver::linear(c(0.3, -0.2)).shifted(c(0.1, 0.1));
        let r = expansion_at_infinity(&d, 1.0, &[50.0, 100.0], 16).unwrap();
        assert!(r[1] <= 1.5 * r[0], "{r:?}");
        assert!(r[1] < 10.0);
    }

    #[test]
    fn out_of_range_time_is_domain_error() {
        let d = Driver::zero().restricted(0.5).unwrap();
        assert!(matches!(
            integrate_forward(&d, c(0.0, 1.0), 0.8, 1e-8),
            Err(Error::Domain(_))
        ));
        assert!(integrate_forward(&Driver::zero(), c(0.0, 1.0), 1.0, 0.0).is_err());
    }

    #[test]
    fn zero_extrapolation_is_exact_for_linear_squares() {
        let z = c(0.0, 1.0);
        let sq = |t: f64| z * z + 4.0 * t;
        let t = extrapolate_zero(0.2, sq(0.2), 0.24, sq(0.24));
        assert!((t - 0.25).abs() < 1e-15);
    }
}
