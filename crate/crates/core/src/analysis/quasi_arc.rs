//! Discrete three-point constant of a sampled curve.

use num_complex::Complex64;

use crate::backward::TraceSamples;
use crate::error::{domain, Result};

/// Chords shorter than this are skipped.
pub const MIN_CHORD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiArcEstimate {
    /// `max_{i<j} diam(γ_i..γ_j) / |γ_i − γ_j|`, at least 1.
    pub constant: f64,
    /// Parameters of the maximizing pair.
    pub argmax: (f64, f64),
    /// `(sample count, constant)` on the nested subsamples taking every
    /// `2^k`-th point, coarsest first, ending with the full curve.
    pub history: Vec<(usize, f64)>,
}

/// `(C, i, j)` for the points in order.
fn constant_of(points: &[Complex64]) -> (f64, usize, usize) {
    let n = points.len();
    let mut best = (1.0, 0, n.saturating_sub(1));
    for i in 0..n {
        let mut diam = 0.0f64;
        for j in (i + 1)..n {
            for k in i..j {
                diam = diam.max((points[k] - points[j]).norm());
            }
            let chord = (points[i] - points[j]).norm();
            if chord < MIN_CHORD {
                continue;
            }
            let ratio = diam / chord;
            if ratio > best.0 {
                best = (ratio, i, j);
            }
        }
    }
    best
}

pub fn quasi_arc_constant(trace: &TraceSamples) -> Result<QuasiArcEstimate> {
    let n = trace.len();
    if n < 8 {
        return domain("need at least 8 samples");
    }
    let first = trace.points[0];
    if trace.points.iter().all(|p| (p - first).norm() < MIN_CHORD) {
        return domain("degenerate trace: all samples coincide");
    }
    let (constant, i, j) = constant_of(&trace.points);
    let mut history = Vec::new();
    let mut stride = 1usize;
    while n.div_ceil(stride * 2) >= 8 {
        stride *= 2;
    }
    while stride >= 1 {
        let sub: Vec<Complex64> = trace.points.iter().step_by(stride).copied().collect();
        let c = if stride == 1 { constant } else { constant_of(&sub).0 };
        history.push((sub.len(), c));
        stride /= 2;
    }
    Ok(QuasiArcEstimate {
        constant,
        argmax: (trace.params[i], trace.params[j]),
        history,
    })
}
