//! Seeded families of rough test drivers normalized to a prescribed norm estimate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::driver::Driver;
use crate::error::{domain, Result};

/// Grid used when normalizing the Hölder estimate of ensemble drivers.
pub const NORMALIZE_GRID: usize = 2048;

/// Rescales `λ − λ(0)` so that its norm estimate on `grid` equals `target`.
/// The estimate is positively homogeneous, so the result hits `target` exactly
/// up to rounding.
pub fn normalize(d: &Driver, target: f64, grid: usize) -> Result<Driver> {
    let base = d.eval(0.0)?;
    let centered = d.shifted(-base);
    let norm = centered.holder_norm_estimate(grid)?.norm_lower_bound;
    if norm == 0.0 {
        return domain("cannot normalize a constant driver");
    }
    Ok(centered.multiplied(Complex64::new(target / norm, 0.0)))
}

/// A Weierstrass driver with `λ(0) = 0` and a random complex direction,
/// normalized to `target` on the standard grid.
pub fn random_weierstrass(rng: &mut impl Rng, target: f64) -> Result<Driver> {
    let b: f64 = rng.gen_range(2.0..3.0);
    // exponent −log a / log b between 0.55 and 0.9
    let h: f64 = rng.gen_range(0.55..0.9);
    let a = b.powf(-h);
    let terms = rng.gen_range(4..=7);
    let phase: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let coef = Complex64::from_polar(1.0, phase);
    let sum: f64 = (0..terms).map(|k| a.powi(k as i32)).sum();
    let raw = Driver::Weierstrass {
        a,
        b,
        terms,
        coef,
        offset: -coef * sum,
    };
    let norm = raw.holder_norm_estimate(NORMALIZE_GRID)?.norm_lower_bound;
    let factor = target / norm;
    Ok(Driver::Weierstrass {
        a,
        b,
        terms,
        coef: coef * factor,
        offset: -coef * factor * sum,
    })
}

/// `count` drivers from [`random_weierstrass`], reproducible from `seed`.
pub fn weierstrass_ensemble(seed: u64, count: usize, target: f64) -> Result<Vec<Driver>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_weierstrass(&mut rng, target)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_is_normalized_and_based_at_zero() {
        let fam = weierstrass_ensemble(7, 4, 0.2).unwrap();
        for d in &fam {
            assert!(d.eval(0.0).unwrap().norm() < 1e-14);
            let n = d.holder_norm_estimate(NORMALIZE_GRID).unwrap().norm_lower_bound;
            assert!((n - 0.2).abs() < 1e-12, "{n}");
            assert!(d.is_smooth());
        }
        assert_eq!(fam, weierstrass_ensemble(7, 4, 0.2).unwrap());
    }

    #[test]
    fn normalize_hits_target() {
        let d = Driver::sqrt(Complex64::new(0.5, 0.5)).shifted(Complex64::new(1.0, 0.0));
        let n = normalize(&d, 0.25, 64).unwrap();
        assert!(n.eval(0.0).unwrap().norm() < 1e-15);
        assert!((n.holder_norm_estimate(64).unwrap().norm_lower_bound - 0.25).abs() < 1e-14);
        assert!(normalize(&Driver::zero(), 0.25, 64).is_err());
    }
}
