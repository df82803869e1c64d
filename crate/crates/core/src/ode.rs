//! Dormand–Prince 5(4) stepping for small complex systems.
//!
//! The loops that drive it live with each flow, since the forward and
//! backward flows cap steps and stop on different events.

use num_complex::Complex64;

type C = Complex64;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order weights minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

/// Result of one trial step.
pub(crate) struct Trial<const N: usize> {
    pub y: [C; N],
    /// Derivative at the new point (first stage of the next step).
    pub dy: [C; N],
    /// Scaled error norm; the step is acceptable when `err <= 1`.
    pub err: f64,
}

fn lin<const N: usize>(y: &[C; N], h: f64, terms: &[(f64, &[C; N])]) -> [C; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = C::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        *o += acc * h;
    }
    out
}

fn finite<const N: usize>(y: &[C; N]) -> bool {
    y.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

/// One Dormand–Prince step from `(t, y)` with derivative `k1 = f(t, y)`.
/// Non-finite stages produce `err = ∞` so that the caller shrinks the step.
pub(crate) fn dopri_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[C; N],
    k1: &[C; N],
    h: f64,
    tol: f64,
) -> Trial<N>
where
    F: Fn(f64, &[C; N]) -> [C; N],
{
    let k2 = f(t + C2 * h, &lin(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &lin(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &lin(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(
        t + C5 * h,
        &lin(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    );
    let k6 = f(
        t + h,
        &lin(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    );
    let y_new = lin(
        y,
        h,
        &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
    );
    let k7 = f(t + h, &y_new);
    if !finite(&y_new) || !finite(&k7) {
        return Trial {
            y: y_new,
            dy: k7,
            err: f64::INFINITY,
        };
    }
    let mut err = 0.0f64;
    for i in 0..N {
        let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
        let scale = tol * (1.0 + y[i].norm().max(y_new[i].norm()));
        err = err.max(e.norm() / scale);
    }
    if !err.is_finite() {
        err = f64::INFINITY;
    }
    Trial {
        y: y_new,
        dy: k7,
        err,
    }
}

/// Standard step-size update for a fifth-order pair.
pub(crate) fn next_step(h: f64, err: f64) -> f64 {
    let factor = if err == 0.0 {
        5.0
    } else {
        (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
    };
    h * factor
}

/// Smallest step the loops accept before declaring the state unreachable.
pub(crate) const MIN_STEP: f64 = 1e-18;
