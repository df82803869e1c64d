//! Complex-valued driving functions on a time interval starting at 0.
//!
//! Base kinds carry closed forms or samples on `[0, 1]`. Composition kinds
//! wrap an inner driver and evaluate purely through it, so a transformed
//! driver never duplicates state. Each driver knows its horizon, the right
//! end of the interval it is defined on (`1` for base kinds).

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};

/// Slack allowed when a time argument overshoots the horizon by rounding.
const HORIZON_SLACK: f64 = 1e-12;

/// Piecewise-linear samples of a driver.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    times: Vec<f64>,
    values: Vec<Complex64>,
}

impl Samples {
    /// Times must be strictly increasing, start at 0 and end at 1.
    pub fn new(times: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::Spec(format!(
                "samples: {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::Spec("samples: need at least two points".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Spec("samples: times must be strictly increasing".into()));
        }
        if times[0] != 0.0 || times[times.len() - 1] != 1.0 {
            return Err(Error::Spec("samples: times must cover [0, 1] exactly".into()));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Spec("samples: values must be finite".into()));
        }
        Ok(Samples { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    fn interpolate(&self, t: f64) -> Complex64 {
        // index of the first sample strictly after t
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return self.values[0];
        }
        if k >= self.times.len() {
            return self.values[self.values.len() - 1];
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        self.values[k - 1] * (1.0 - w) + self.values[k] * w
    }
}

/// A driving function `λ`.
#[derive(Debug, Clone, PartialEq)]
pub enum Driver {
    /// `λ ≡ c`.
    Constant(Complex64),
    /// `λ(t) = offset + coef·t`.
    Linear { offset: Complex64, coef: Complex64 },
    /// `λ(t) = offset + coef·√t`.
    Sqrt { offset: Complex64, coef: Complex64 },
    Samples(Samples),
    /// `λ(t) = offset + coef·Σ_{k<terms} a^k cos(b^k π t)`.
    Weierstrass {
        a: f64,
        b: f64,
        terms: u32,
        coef: Complex64,
        offset: Complex64,
    },
    /// A seeded Brownian path on `2^levels` dyadic steps, multiplied by `coef·scale`.
    Brownian {
        seed: u64,
        levels: u32,
        scale: f64,
        coef: Complex64,
        path: Samples,
    },
    /// `r ↦ factor·λ(r / factor²)`.
    Scaled { inner: Box<Driver>, factor: f64 },
    /// `r ↦ λ(r) + shift`.
    Shifted { inner: Box<Driver>, shift: Complex64 },
    /// `r ↦ −λ(r)`.
    Negated { inner: Box<Driver> },
    /// `r ↦ −i·λ(horizon − r)` on `[0, horizon]`.
    Dual { inner: Box<Driver>, horizon: f64 },
    /// `r ↦ λ(start + r)`.
    Restricted { inner: Box<Driver>, start: f64 },
    /// `r ↦ α·λ(r)`.
    Multiplied { inner: Box<Driver>, alpha: Complex64 },
}

/// Algebraic operations turning one driver into another.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transform {
    Shift(Complex64),
    Scale(f64),
    Negate,
    Dual(f64),
    Multiply(Complex64),
    RestrictFrom(f64),
}

/// Grid lower bound of the 1/2-Hölder seminorm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderEstimate {
    pub norm_lower_bound: f64,
    pub pair_count: u64,
    pub grid_resolution: usize,
}

impl Driver {
    pub fn constant(c: Complex64) -> Self {
        Driver::Constant(c)
    }

    pub fn zero() -> Self {
        Driver::Constant(Complex64::new(0.0, 0.0))
    }

    pub fn linear(coef: Complex64) -> Self {
        Driver::Linear {
            offset: Complex64::new(0.0, 0.0),
            coef,
        }
    }

    pub fn sqrt(coef: Complex64) -> Self {
        Driver::Sqrt {
            offset: Complex64::new(0.0, 0.0),
            coef,
        }
    }

    pub fn weierstrass(a: f64, b: f64, terms: u32, coef: Complex64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || b <= 0.0 {
            return Err(Error::Spec("weierstrass: need finite a and b > 0".into()));
        }
        Ok(Driver::Weierstrass {
            a,
            b,
            terms,
            coef,
            offset: Complex64::new(0.0, 0.0),
        })
    }

    /// A standard Brownian path sampled at `2^levels + 1` dyadic points,
    /// multiplied by `coef·scale`. The same seed always yields the same path.
    pub fn brownian(seed: u64, levels: u32, scale: f64, coef: Complex64) -> Result<Self> {
        if levels == 0 || levels > 24 {
            return Err(Error::Spec("brownian: levels must be in 1..=24".into()));
        }
        if !scale.is_finite() {
            return Err(Error::Spec("brownian: scale must be finite".into()));
        }
        let n = 1usize << levels;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let step_sd = (1.0 / n as f64).sqrt();
        let mut times = Vec::with_capacity(n + 1);
        let mut values = Vec::with_capacity(n + 1);
        let mut b = 0.0f64;
        times.push(0.0);
        values.push(Complex64::new(0.0, 0.0));
        for k in 1..=n {
            let z: f64 = StandardNormal.sample(&mut rng);
            b += step_sd * z;
            times.push(k as f64 / n as f64);
            values.push(coef * (scale * b));
        }
        Ok(Driver::Brownian {
            seed,
            levels,
            scale,
            coef,
            path: Samples::new(times, values)?,
        })
    }

    /// Right end of the interval on which the driver is defined.
    pub fn horizon(&self) -> f64 {
        match self {
            Driver::Constant(_)
            | Driver::Linear { .. }
            | Driver::Sqrt { .. }
            | Driver::Samples(_)
            | Driver::Weierstrass { .. }
            | Driver::Brownian { .. } => 1.0,
            Driver::Scaled { inner, factor } => (inner.horizon() * factor * factor).min(1.0),
            Driver::Shifted { inner, .. }
            | Driver::Negated { inner }
            | Driver::Multiplied { inner, .. } => inner.horizon(),
            Driver::Dual { horizon, .. } => *horizon,
            Driver::Restricted { inner, start } => inner.horizon() - start,
        }
    }

    /// `λ(t)`, with a domain error outside `[0, horizon]`.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let h = self.horizon();
        if !(t >= -HORIZON_SLACK && t <= h + HORIZON_SLACK) {
            return domain(format!("time {t} outside the driver's domain [0, {h}]"));
        }
        Ok(self.value(t.clamp(0.0, h)))
    }

    /// Evaluation without the domain check; `t` is clamped into range.
    /// Integrators validate their horizon once and then call this.
    pub(crate) fn value(&self, t: f64) -> Complex64 {
        match self {
            Driver::Constant(c) => *c,
            Driver::Linear { offset, coef } => offset + coef * t,
            Driver::Sqrt { offset, coef } => offset + coef * t.max(0.0).sqrt(),
            Driver::Samples(s) => s.interpolate(t),
            Driver::Weierstrass {
                a,
                b,
                terms,
                coef,
                offset,
            } => {
                let mut sum = 0.0;
                let mut amp = 1.0;
                let mut freq = PI;
                for _ in 0..*terms {
                    sum += amp * (freq * t).cos();
                    amp *= a;
                    freq *= b;
                }
                offset + coef * sum
            }
            Driver::Brownian { path, .. } => path.interpolate(t),
            Driver::Scaled { inner, factor } => {
                inner.value((t / (factor * factor)).min(inner.horizon())) * *factor
            }
            Driver::Shifted { inner, shift } => inner.value(t) + shift,
            Driver::Negated { inner } => -inner.value(t),
            Driver::Dual { inner, horizon } => {
                Complex64::new(0.0, -1.0) * inner.value((horizon - t).max(0.0))
            }
            Driver::Restricted { inner, start } => inner.value((start + t).min(inner.horizon())),
            Driver::Multiplied { inner, alpha } => alpha * inner.value(t),
        }
    }

    pub fn transform(&self, op: Transform) -> Result<Driver> {
        let inner = Box::new(self.clone());
        let h = self.horizon();
        Ok(match op {
            Transform::Shift(shift) => Driver::Shifted { inner, shift },
            Transform::Scale(factor) => {
                if !(factor > 0.0 && factor.is_finite()) {
                    return domain(format!("scale factor must be positive, got {factor}"));
                }
                Driver::Scaled { inner, factor }
            }
            Transform::Negate => Driver::Negated { inner },
            Transform::Dual(horizon) => {
                if !(0.0..=h).contains(&horizon) {
                    return domain(format!("dual horizon {horizon} outside [0, {h}]"));
                }
                Driver::Dual { inner, horizon }
            }
            Transform::Multiply(alpha) => Driver::Multiplied { inner, alpha },
            Transform::RestrictFrom(start) => {
                if !(0.0..=h).contains(&start) {
                    return domain(format!("restriction start {start} outside [0, {h}]"));
                }
                Driver::Restricted { inner, start }
            }
        })
    }

    pub fn shifted(&self, a: Complex64) -> Driver {
        self.transform(Transform::Shift(a)).expect("shift is total")
    }

    pub fn negated(&self) -> Driver {
        self.transform(Transform::Negate).expect("negation is total")
    }

    pub fn multiplied(&self, alpha: Complex64) -> Driver {
        self.transform(Transform::Multiply(alpha))
            .expect("multiplication is total")
    }

    pub fn scaled(&self, factor: f64) -> Result<Driver> {
        self.transform(Transform::Scale(factor))
    }

    pub fn dual(&self, horizon: f64) -> Result<Driver> {
        self.transform(Transform::Dual(horizon))
    }

    pub fn restricted(&self, start: f64) -> Result<Driver> {
        self.transform(Transform::RestrictFrom(start))
    }

    /// Max of `|λ(t) − λ(s)| / √|t − s|` over pairs of the uniform grid with
    /// `n + 1` points on `[0, horizon]`.
    pub fn holder_norm_estimate(&self, n: usize) -> Result<HolderEstimate> {
        if n < 2 {
            return domain("holder estimate needs a grid of at least 2 intervals");
        }
        let h = self.horizon();
        let grid: Vec<f64> = (0..=n).map(|i| h * i as f64 / n as f64).collect();
        let vals = grid
            .iter()
            .map(|&t| self.eval(t))
            .collect::<Result<Vec<_>>>()?;
        let mut best = 0.0f64;
        let mut pairs = 0u64;
        for i in 0..=n {
            for j in (i + 1)..=n {
                let ratio = (vals[j] - vals[i]).norm() / (grid[j] - grid[i]).sqrt();
                best = best.max(ratio);
                pairs += 1;
            }
        }
        Ok(HolderEstimate {
            norm_lower_bound: best,
            pair_count: pairs,
            grid_resolution: n,
        })
    }

    /// Short human-readable name of the kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Driver::Constant(_) => "constant",
            Driver::Linear { .. } => "linear",
            Driver::Sqrt { .. } => "sqrt",
            Driver::Samples(_) => "samples",
            Driver::Weierstrass { .. } => "weierstrass",
            Driver::Brownian { .. } => "brownian",
            Driver::Scaled { .. } => "scaled",
            Driver::Shifted { .. } => "shifted",
            Driver::Negated { .. } => "negated",
            Driver::Dual { .. } => "dual",
            Driver::Restricted { .. } => "restricted",
            Driver::Multiplied { .. } => "multiplied",
        }
    }

    /// True when every value of the driver is real, decided structurally.
    pub fn is_real(&self) -> bool {
        let real = |c: &Complex64| c.im == 0.0;
        match self {
            Driver::Constant(c) => real(c),
            Driver::Linear { offset, coef } | Driver::Sqrt { offset, coef } => {
                real(offset) && real(coef)
            }
            Driver::Samples(s) => s.values.iter().all(real),
            Driver::Weierstrass { coef, offset, .. } => real(coef) && real(offset),
            Driver::Brownian { coef, .. } => real(coef),
            Driver::Scaled { inner, .. }
            | Driver::Negated { inner }
            | Driver::Restricted { inner, .. } => inner.is_real(),
            Driver::Shifted { inner, shift } => inner.is_real() && real(shift),
            Driver::Multiplied { inner, alpha } => inner.is_real() && real(alpha),
            Driver::Dual { .. } => false,
        }
    }

    /// Drivers of Hölder regularity strictly above 1/2, which the derivative
    /// formula requires.
    pub fn is_smooth(&self) -> bool {
        match self {
            Driver::Constant(_) | Driver::Linear { .. } => true,
            // c√t is only 1/2-Hölder at 0 unless the coefficient vanishes
            Driver::Sqrt { coef, .. } => *coef == Complex64::new(0.0, 0.0),
            // finite sums are smooth
            Driver::Weierstrass { .. } => true,
            Driver::Samples(_) | Driver::Brownian { .. } => false,
            Driver::Scaled { inner, .. }
            | Driver::Shifted { inner, .. }
            | Driver::Negated { inner }
            | Driver::Dual { inner, .. }
            | Driver::Restricted { inner, .. }
            | Driver::Multiplied { inner, .. } => inner.is_smooth(),
        }
    }
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_base() -> impl Strategy<Value = Driver> {
        let cplx = (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b));
        prop_oneof![
            cplx.clone().prop_map(Driver::constant),
            cplx.clone().prop_map(Driver::linear),
            cplx.clone().prop_map(Driver::sqrt),
            (0.3f64..0.8, 2u32..6, cplx)
                .prop_map(|(a, k, c)| Driver::weierstrass(a, 2.0, k, c).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn compositions_match_their_formulas(
            d in arb_base(),
            t in 0.0f64..1.0,
            re in -1.0f64..1.0,
            im in -1.0f64..1.0,
            h in 0.0f64..1.0,
        ) {
            let a = Complex64::new(re, im);
            let tol = 1e-13;
            let lam = |s: f64| d.eval(s).unwrap();
            prop_assert!((d.shifted(a).eval(t).unwrap() - (lam(t) + a)).norm() < tol);
            prop_assert!((d.negated().eval(t).unwrap() + lam(t)).norm() < tol);
            prop_assert!((d.multiplied(a).eval(t).unwrap() - a * lam(t)).norm() < tol);
            let s = t * h;
            let dual = d.dual(h).unwrap();
            prop_assert!((dual.eval(s).unwrap() - Complex64::new(0.0, -1.0) * lam(h - s)).norm() < tol);
            let r = d.restricted(h).unwrap();
            let rr = (1.0 - h) * t;
            prop_assert!((r.eval(rr).unwrap() - lam(h + rr)).norm() < tol);
            let sc = d.scaled(2.0).unwrap();
            prop_assert!((sc.eval(t).unwrap() - 2.0 * lam(t / 4.0)).norm() < tol);
        }
    }
}
