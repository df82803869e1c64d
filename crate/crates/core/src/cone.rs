//! Cones in the plane and the feasibility constraint that certifies the
//! backward flow stays inside one.

use num_complex::Complex64;

/// Hölder budget used when nothing else is configured.
pub const DEFAULT_SIGMA: f64 = 1.0 / 3.0;

/// Number of points in the logarithmic θ₂ scan.
pub const THETA2_GRID_POINTS: usize = 600;
pub const THETA2_GRID_MIN: f64 = 1e-3;
pub const THETA2_GRID_MAX: f64 = 1e3;

/// Certified cone parameters for a Hölder budget `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    pub sigma: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub nu: f64,
}

impl ConeParams {
    /// Picks θ₂ by the feasibility scan and derives ν. `None` when the scan
    /// finds no feasible θ₂.
    pub fn certify(sigma: f64, theta1: f64) -> Option<Self> {
        let theta2 = feasible_theta2(sigma, theta1)?;
        Some(ConeParams {
            sigma,
            theta1,
            theta2,
            nu: nu(sigma, theta2),
        })
    }

    /// Parameters for starting points on the imaginary axis at the default budget.
    pub fn default_axis() -> Self {
        Self::certify(DEFAULT_SIGMA, 0.0).expect("the default budget is feasible")
    }

    /// `√(1 + θ₂²)`, the constant in `|P| ≤ −C Re P` inside the θ₂ cone.
    pub fn c2(&self) -> f64 {
        (1.0 + self.theta2 * self.theta2).sqrt()
    }
}

/// `ν = (√(1 + θ₂²) + 1)·σ / θ₂`.
pub fn nu(sigma: f64, theta2: f64) -> f64 {
    ((1.0 + theta2 * theta2).sqrt() + 1.0) * sigma / theta2
}

/// Right side minus left side of the constraint, or `None` when the radicand
/// is not positive.
pub fn constraint_margin(sigma: f64, theta1: f64, theta2: f64) -> Option<f64> {
    let c2 = (1.0 + theta2 * theta2).sqrt();
    let radicand = 1.0
        - sigma * sigma * (1.0 + theta2).powi(2) * (c2 + 1.0).powi(2) / (4.0 * theta2 * theta2);
    if !(radicand > 0.0) {
        return None;
    }
    let lhs = theta1 / (1.0 + theta1 * theta1).sqrt() * (1.0 + theta2) / theta2;
    Some(radicand.sqrt() - lhs)
}

pub fn constraint_holds(sigma: f64, theta1: f64, theta2: f64) -> bool {
    constraint_margin(sigma, theta1, theta2).is_some_and(|m| m > 0.0)
}

/// The fixed logarithmic grid used by [`feasible_theta2`].
pub fn theta2_grid() -> impl Iterator<Item = f64> {
    let (lo, hi) = (THETA2_GRID_MIN.ln(), THETA2_GRID_MAX.ln());
    let n = THETA2_GRID_POINTS;
    (0..n).map(move |k| (lo + (hi - lo) * k as f64 / (n - 1) as f64).exp())
}

/// The grid point with the largest positive constraint margin.
pub fn feasible_theta2(sigma: f64, theta1: f64) -> Option<f64> {
    theta2_grid()
        .filter_map(|th| constraint_margin(sigma, theta1, th).map(|m| (th, m)))
        .filter(|&(_, m)| m > 0.0)
        .fold(None, |best: Option<(f64, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
        .map(|(th, _)| th)
}

/// Largest θ₁ on a scan for which some θ₂ on the grid is feasible.
pub fn largest_feasible_theta1(sigma: f64, theta1_scan: &[f64]) -> Option<f64> {
    theta1_scan
        .iter()
        .copied()
        .filter(|&t1| feasible_theta2(sigma, t1).is_some())
        .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))))
}

/// Which way a cone opens.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `{|Re w| < θ Im w}`.
    Up,
    /// `{|Re w| < −θ Im w}`.
    Down,
    /// Union of the up and down cones.
    TwoSided,
    /// The two-sided cone rotated by `i`, opening along the real axis.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeSpec {
    pub base: Complex64,
    pub aperture: f64,
    pub orientation: Orientation,
}

impl ConeSpec {
    pub fn up(base: Complex64, aperture: f64) -> Self {
        ConeSpec {
            base,
            aperture,
            orientation: Orientation::Up,
        }
    }
}

fn in_up_cone(w: Complex64, theta: f64) -> bool {
    if w.im <= 0.0 {
        return false;
    }
    if theta == 0.0 {
        w.re == 0.0
    } else {
        w.re.abs() < theta * w.im
    }
}

/// Strict membership of `z` in the cone.
pub fn cone_contains(spec: &ConeSpec, z: Complex64) -> bool {
    let w = z - spec.base;
    let th = spec.aperture;
    match spec.orientation {
        Orientation::Up => in_up_cone(w, th),
        Orientation::Down => in_up_cone(-w, th),
        Orientation::TwoSided => in_up_cone(w, th) || in_up_cone(-w, th),
        // w ∈ i·D  ⇔  −i·w ∈ D
        Orientation::Right => {
            let r = Complex64::new(0.0, -1.0) * w;
            in_up_cone(r, th) || in_up_cone(-r, th)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Dense scan of the smallest σ-coefficient in the radicand, as an
    /// independent check that σ = 1/2 admits no θ₂ at θ₁ = 0.
    fn min_radicand_factor() -> f64 {
        (1..=200_000)
            .map(|k| k as f64 * 100.0 / 200_000.0)
            .map(|t2| (1.0 + t2) * ((1.0 + t2 * t2).sqrt() + 1.0) / (2.0 * t2))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn constraint_examples() {
        assert!(constraint_holds(1.0 / 3.0, 0.0, 1.0));
        assert!(constraint_holds(0.0, 1.0, 10.0));
        let m = min_radicand_factor();
        assert!(0.5 * m > 1.0, "min factor {m}");
        for k in 1..=1000 {
            let t2 = k as f64 * 0.1;
            assert!(!constraint_holds(0.5, 0.0, t2));
        }
    }

    #[test]
    fn feasible_theta2_examples() {
        let th = feasible_theta2(1.0 / 3.0, 0.0).expect("feasible");
        assert!(constraint_holds(1.0 / 3.0, 0.0, th));
        assert!((0.5..3.0).contains(&th), "witness {th}");
        assert!(feasible_theta2(0.5, 0.0).is_none());
        let th = feasible_theta2(0.0, 0.1).expect("feasible at sigma 0");
        assert!(constraint_holds(0.0, 0.1, th));
    }

    #[test]
    fn grid_is_fixed() {
        let g: Vec<f64> = theta2_grid().collect();
        assert_eq!(g.len(), 600);
        assert!((g[0] - 1e-3).abs() < 1e-15);
        assert!((g[599] - 1e3).abs() < 1e-9);
    }

    #[test]
    fn default_params_have_positive_nu_below_two() {
        let cp = ConeParams::default_axis();
        assert!(cp.nu > 0.0 && cp.nu < 2.0);
        let expected = ((1.0 + cp.theta2 * cp.theta2).sqrt() + 1.0) * cp.sigma / cp.theta2;
        assert_eq!(cp.nu, expected);
    }

    #[test]
    fn theta1_range_grows_as_sigma_shrinks() {
        let scan: Vec<f64> = (0..200).map(|k| 0.05 * k as f64).collect();
        let mut prev = 0.0;
        for sigma in [0.3, 0.2, 0.1, 0.05, 0.02, 0.01] {
            let t1 = largest_feasible_theta1(sigma, &scan).unwrap();
            assert!(t1 >= prev, "sigma {sigma}: {t1} < {prev}");
            prev = t1;
        }
        assert!(prev > 1.0);
    }

    #[test]
    fn membership() {
        let up = ConeSpec::up(c(0.0, 0.0), 1.0);
        assert!(cone_contains(&up, c(0.5, 1.0)));
        assert!(!cone_contains(&up, c(1.0, 1.0)));
        assert!(!cone_contains(&up, c(0.0, 0.0)));
        let ray = ConeSpec::up(c(0.0, 0.0), 0.0);
        assert!(cone_contains(&ray, c(0.0, 2.0)));
        assert!(!cone_contains(&ray, c(1.0, 2.0)));
        let two = ConeSpec {
            orientation: Orientation::TwoSided,
            ..up
        };
        assert!(cone_contains(&two, c(0.5, -1.0)));
        let down = ConeSpec {
            orientation: Orientation::Down,
            ..up
        };
        assert!(!cone_contains(&down, c(0.5, 1.0)));
        let right = ConeSpec {
            orientation: Orientation::Right,
            ..up
        };
        assert!(cone_contains(&right, c(1.0, 0.5)));
        assert!(cone_contains(&right, c(-1.0, 0.5)));
        assert!(!cone_contains(&right, c(0.5, 1.0)));
        let shifted = ConeSpec::up(c(1.0, 1.0), 1.0);
        assert!(cone_contains(&shifted, c(1.5, 2.0)));
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn constraint_is_monotone(
            sigma in 0.0f64..0.45,
            theta1 in 0.0f64..5.0,
            theta2 in 0.01f64..50.0,
            fs in 0.0f64..1.0,
            ft in 0.0f64..1.0,
        ) {
            if constraint_holds(sigma, theta1, theta2) {
                prop_assert!(constraint_holds(sigma * fs, theta1 * ft, theta2));
            }
        }

        #[test]
        fn nu_positive_when_feasible(sigma in 0.001f64..0.4) {
            if let Some(cp) = ConeParams::certify(sigma, 0.0) {
                prop_assert!(cp.nu > 0.0);
            }
        }
    }
}
