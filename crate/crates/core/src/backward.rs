//! Renormalized backward flow and the trace it defines.
//!
//! For a horizon `t` the flow solves `d/du (A + λ(t−u)) = −2/A`, `A(0) = z`.
//! It is integrated in the variable `Ψ = A + λ(t−u)`, whose right-hand side
//! `−2/(Ψ − λ(t−u))` needs only pointwise values of the driver. The trace is
//! `γ(t) = A(t)|_{z→i0⁺} + λ(0)` for `t > 0` and the same limit from `−i0⁺`
//! with horizon `|t|` for `t < 0`.

use num_complex::Complex64;

use crate::cone::ConeParams;
use crate::driver::Driver;
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::ode::{dopri_step, next_step, MIN_STEP};

/// Default Richardson ladder in `y`.
pub const DEFAULT_LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Default local tolerance of the backward integrator.
pub const DEFAULT_TOL: f64 = 1e-11;

/// `|A|` below this is treated as hitting the pole.
const SINGULAR_MODULUS: f64 = 1e-12;

/// Steps never exceed this fraction of `|A|²/2`.
const STEP_FRACTION: f64 = 0.1;

/// Upper bound for the frozen-driver substep.
const FROZEN_SUBSTEP_MAX: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardTrajectory {
    pub horizon: f64,
    pub start: Complex64,
    /// `ŷ₀ = |z|²/|Im z|`, the height of the comparison flow `B(u) = ±i√(ŷ₀² + 4u)`.
    pub anchor: f64,
    pub times: Vec<f64>,
    pub states: Vec<Complex64>,
}

impl BackwardTrajectory {
    pub fn end(&self) -> Complex64 {
        *self.states.last().expect("trajectories hold at least the start")
    }

    /// `+1` for flows started in the upper half-plane, `−1` below.
    fn side(&self) -> f64 {
        if self.start.im < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
}

/// Full trajectory `u ↦ f(u, t, z)` on `[0, t]`, recording every step.
pub fn integrate_backward(d: &Driver, t: f64, z: Complex64, tol: f64) -> Result<BackwardTrajectory> {
    solve(d, t, z, t, tol, true)
}

/// `f(u_end, t, z)` without recording.
pub fn flow_to(d: &Driver, t: f64, z: Complex64, u_end: f64, tol: f64) -> Result<Complex64> {
    Ok(solve(d, t, z, u_end, tol, false)?.end())
}

fn solve(
    d: &Driver,
    t: f64,
    z: Complex64,
    u_end: f64,
    tol: f64,
    record: bool,
) -> Result<BackwardTrajectory> {
    if !(t > 0.0) || t > d.horizon() + 1e-12 {
        return domain(format!("horizon {t} outside (0, {}]", d.horizon()));
    }
    if !(0.0..=t).contains(&u_end) {
        return domain(format!("end time {u_end} outside [0, {t}]"));
    }
    if z.norm() < SINGULAR_MODULUS {
        return domain("starting point must be away from 0");
    }
    if !(tol > 0.0) {
        return domain("tolerance must be positive");
    }
    let t = t.min(d.horizon());
    let lam = |u: f64| d.value((t - u).max(0.0));
    let anchor = if z.im != 0.0 { z.norm_sqr() / z.im.abs() } else { f64::NAN };
    let mut out = BackwardTrajectory {
        horizon: t,
        start: z,
        anchor,
        times: vec![0.0],
        states: vec![z],
    };
    if u_end == 0.0 {
        return Ok(out);
    }

    // Frozen-driver substep: with λ held at λ(t), A(u) = z·√(1 − 4u/z²).
    let one = Complex64::new(1.0, 0.0);
    let u0 = FROZEN_SUBSTEP_MAX
        .min(t / 100.0)
        .min(0.01 * z.norm_sqr())
        .min(u_end);
    let frozen = z * (one - 4.0 * u0 / (z * z)).sqrt();
    let mut u = u0;
    let mut psi = z + lam(0.0) + (frozen - z);
    let mut a = psi - lam(u);
    if record {
        out.times.push(u);
        out.states.push(a);
    }

    let rhs = |s: f64, y: &[Complex64; 1]| [-2.0 * one / (y[0] - lam(s))];
    let mut y = [psi];
    let mut k1 = rhs(u, &y);
    let mut h = 0.05 * a.norm_sqr();
    while u < u_end {
        if a.norm() < SINGULAR_MODULUS {
            return Err(Error::Singularity {
                u,
                modulus: a.norm(),
            });
        }
        let cap = STEP_FRACTION * a.norm_sqr() / 2.0;
        let step = h.min(cap).min(u_end - u);
        let trial = dopri_step(&rhs, u, &y, &k1, step, tol);
        if trial.err > 1.0 {
            h = next_step(step, trial.err.min(1e10));
            if h < MIN_STEP {
                return Err(Error::Singularity {
                    u,
                    modulus: a.norm(),
                });
            }
            continue;
        }
        let u_new = if u_end - u - step <= 1e-15 * u_end {
            u_end
        } else {
            u + step
        };
        y = trial.y;
        k1 = trial.dy;
        u = u_new;
        psi = y[0];
        a = psi - lam(u);
        if !(a.re.is_finite() && a.im.is_finite()) {
            return Err(Error::Overflow { time: u });
        }
        if record {
            out.times.push(u);
            out.states.push(a);
        }
        h = next_step(step, trial.err);
    }
    if !record {
        out.times.push(u);
        out.states.push(a);
    }
    Ok(out)
}

/// Limit `y → 0⁺` of samples `f(y_k)` by Richardson extrapolation on the
/// three finest rungs. The order `p` of `f(y) − f(0⁺) ≈ c·y^p` is estimated
/// from the rungs and clamped to `[1, 2]`. Returns `(limit, |limit − f_finest|)`.
pub fn richardson_limit(ladder: &[f64], values: &[Complex64]) -> Result<(Complex64, f64)> {
    check_ladder(ladder)?;
    if ladder.len() != values.len() {
        return domain("ladder and values differ in length");
    }
    let n = ladder.len();
    let (y1, y2, y3) = (ladder[n - 3], ladder[n - 2], ladder[n - 1]);
    let (f1, f2, f3) = (values[n - 3], values[n - 2], values[n - 1]);
    let (d1, d2) = ((f1 - f2).norm(), (f2 - f3).norm());
    let ratio = |p: f64| (y1.powf(p) - y2.powf(p)) / (y2.powf(p) - y3.powf(p));
    let scale = f3.norm().max(1.0);
    let p = if d2 <= 1e-15 * scale {
        2.0
    } else {
        let target = d1 / d2;
        if target <= ratio(1.0) {
            1.0
        } else if target >= ratio(2.0) {
            2.0
        } else {
            let (mut lo, mut hi) = (1.0, 2.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if ratio(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        }
    };
    let (w2, w3) = (y2.powf(p), y3.powf(p));
    let limit = (f3 * w2 - f2 * w3) / (w2 - w3);
    Ok((limit, (limit - f3).norm()))
}

fn check_ladder(ladder: &[f64]) -> Result<()> {
    if ladder.len() < 3 {
        return domain("the y ladder needs at least three rungs");
    }
    if !ladder.iter().all(|&y| y > 0.0 && y.is_finite()) || ladder.windows(2).any(|w| w[1] >= w[0]) {
        return domain("the y ladder must be positive and strictly decreasing");
    }
    Ok(())
}

/// `γ(t)` and its extrapolation error estimate; `γ(0) = λ(0)` exactly.
pub fn trace_point(d: &Driver, t: f64, ladder: &[f64], tol: f64) -> Result<(Complex64, f64)> {
    check_ladder(ladder)?;
    if !(-1.0..=1.0).contains(&t) {
        return domain(format!("trace parameter {t} outside [-1, 1]"));
    }
    let base = d.eval(0.0)?;
    if t == 0.0 {
        return Ok((base, 0.0));
    }
    let side = t.signum();
    let horizon = t.abs();
    let values = ladder
        .iter()
        .map(|&y| flow_to(d, horizon, Complex64::new(0.0, side * y), horizon, tol))
        .collect::<Result<Vec<_>>>()?;
    let (limit, err) = richardson_limit(ladder, &values)?;
    Ok((limit + base, err))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSamples {
    pub params: Vec<f64>,
    pub points: Vec<Complex64>,
    pub errors: Vec<f64>,
}

impl TraceSamples {
    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    /// Samples with `|param| ≤ s`.
    pub fn up_to(&self, s: f64) -> TraceSamples {
        let keep: Vec<usize> = (0..self.len()).filter(|&k| self.params[k].abs() <= s).collect();
        TraceSamples {
            params: keep.iter().map(|&k| self.params[k]).collect(),
            points: keep.iter().map(|&k| self.points[k]).collect(),
            errors: keep.iter().map(|&k| self.errors[k]).collect(),
        }
    }
}

/// Parameters `±(k/n)²`, `k = 0..n`, in increasing order.
pub fn quadratic_grid(n: usize) -> Vec<f64> {
    let q = |k: usize| (k as f64 / n as f64).powi(2);
    (1..=n)
        .rev()
        .map(|k| -q(k))
        .chain(std::iter::once(0.0))
        .chain((1..=n).map(q))
        .collect()
}

/// The trace on the quadratic grid with `n` samples per side.
pub fn trace_curve(d: &Driver, n: usize, ladder: &[f64], tol: f64, exec: Exec) -> Result<TraceSamples> {
    if n < 2 {
        return domain("need at least 2 samples per side");
    }
    trace_at(d, &quadratic_grid(n), ladder, tol, exec)
}

/// The trace at arbitrary parameters, assembled in the given order.
pub fn trace_at(d: &Driver, params: &[f64], ladder: &[f64], tol: f64, exec: Exec) -> Result<TraceSamples> {
    let res = exec.try_map(params, |&t| trace_point(d, t, ladder, tol))?;
    Ok(TraceSamples {
        params: params.to_vec(),
        points: res.iter().map(|r| r.0).collect(),
        errors: res.iter().map(|r| r.1).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeCertificate {
    pub in_cone: bool,
    /// `min_u (θ₂·Im A − |Re A|)`.
    pub min_ratio: f64,
    /// `min_u (Im A − ν√u)`.
    pub im_margin: f64,
}

/// Checks the cone and the lower bound on `Im A` along a trajectory. Flows
/// started below the real axis are mirrored through the origin first.
pub fn cone_certificate(traj: &BackwardTrajectory, cp: &ConeParams) -> ConeCertificate {
    let s = traj.side();
    let mut min_ratio = f64::INFINITY;
    let mut im_margin = f64::INFINITY;
    for (&u, &a) in traj.times.iter().zip(&traj.states) {
        let m = a * s;
        min_ratio = min_ratio.min(cp.theta2 * m.im - m.re.abs());
        im_margin = im_margin.min(m.im - cp.nu * u.sqrt());
    }
    ConeCertificate {
        in_cone: min_ratio > 0.0,
        min_ratio,
        im_margin,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallReport {
    /// `max_u [|A − B| − |A(0) − B(0)| − (C₂ + 1)σ√u]`; non-positive when the bound holds.
    pub max_violation: f64,
}

/// Compares the flow against `B(u) = i√(ŷ₀² + 4u)` and the Gronwall bound.
pub fn gronwall_gap(traj: &BackwardTrajectory, cp: &ConeParams, sigma: f64) -> GronwallReport {
    let s = traj.side();
    let y0 = traj.anchor;
    let b = |u: f64| Complex64::new(0.0, (y0 * y0 + 4.0 * u).sqrt());
    let initial = (traj.start * s - b(0.0)).norm();
    let slope = (cp.c2() + 1.0) * sigma;
    let max_violation = traj
        .times
        .iter()
        .zip(&traj.states)
        .map(|(&u, &a)| (a * s - b(u)).norm() - initial - slope * u.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    GronwallReport { max_violation }
}
