//! The `verify` pipeline: every check that applies to one driver, collected
//! into a [`VerificationReport`].

use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::analysis::checks::{injectivity_check, round_trip_check, trace_cone_check, RoundTripOptions};
use crate::analysis::derivative::{derivative_formula, finite_difference, DerivativeOptions};
use crate::analysis::hulls::{hull_property_suite, HullSuiteConfig};
use crate::analysis::quasi_arc::quasi_arc_constant;
use crate::analysis::report::{CheckEntry, VerificationReport};
use crate::backward::{cone_certificate, gronwall_gap, integrate_backward, trace_curve, TraceSamples, DEFAULT_LADDER, DEFAULT_TOL};
use crate::cone::{constraint_margin, ConeParams, DEFAULT_SIGMA};
use crate::driver::Driver;
use crate::error::{domain, Error, Result};
use crate::exec::Exec;
use crate::forward::expansion_at_infinity;
use crate::motion::{analyticity_residual, certified_alpha_radius, motion_sample, CERTIFY_GRID};
use crate::raster::{RasterOptions, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Cone,
    Trace,
    Hull,
    Motion,
    Analysis,
}

impl Suite {
    fn includes(self, part: Suite) -> bool {
        self == Suite::All || self == part
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "cone" => Suite::Cone,
            "trace" => Suite::Trace,
            "hull" => Suite::Hull,
            "motion" => Suite::Motion,
            "analysis" => Suite::Analysis,
            _ => return domain(format!("unknown suite {s:?}")),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub suite: Suite,
    pub sigma: f64,
    /// Trace samples per side.
    pub n: usize,
    pub resolution: usize,
    pub window: Window,
    pub t: f64,
    pub s: f64,
    pub ladder: Vec<f64>,
    pub tol: f64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            suite: Suite::All,
            sigma: DEFAULT_SIGMA,
            n: 32,
            resolution: 64,
            window: Window::square(3.0),
            t: 0.5,
            s: 0.25,
            ladder: DEFAULT_LADDER.to_vec(),
            tol: DEFAULT_TOL,
            exec: Exec::Parallel,
        }
    }
}

impl VerifyConfig {
    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.tol > 0.0) {
            return domain("sigma and tol must be positive");
        }
        if self.n < 8 || self.resolution < 2 {
            return domain("need n ≥ 8 and resolution ≥ 2");
        }
        if !(self.t > 0.0 && self.s > 0.0 && self.t + self.s <= 1.0) {
            return domain("need t, s > 0 and t + s ≤ 1");
        }
        Ok(())
    }
}

/// Horizons at which whole backward trajectories are certified.
const CERTIFY_HORIZONS: [f64; 4] = [0.0625, 0.25, 0.5625, 1.0];

/// Separation used by the injectivity check.
const INJECTIVITY_SEPARATION: f64 = 0.05;

/// Runs the selected checks. Failures, including numerical errors, become
/// failing entries; only an invalid configuration is an `Err`.
pub fn verify(d: &Driver, cfg: &VerifyConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut entries = Vec::new();
    if cfg.suite.includes(Suite::Cone) {
        entries.extend(cone_entries(d, cfg));
    }
    if cfg.suite.includes(Suite::Trace) || cfg.suite.includes(Suite::Analysis) {
        // the analysis checks reuse the doubled trace
        let fine = trace_curve(d, 2 * cfg.n, &cfg.ladder, cfg.tol, cfg.exec).map_err(|e| e.to_string());
        let fine = || fine.as_ref().map_err(|e| Error::Inconsistency(e.clone()));
        let coarse = || fine().map(every_other);
        if cfg.suite.includes(Suite::Trace) {
            entries.extend(trace_entries(d, cfg, &coarse));
        }
        if cfg.suite.includes(Suite::Analysis) {
            entries.push(CheckEntry::timed(
                "quasi_arc.stability",
                "the curve γ^{(α)} is a quasi-arc",
                0.05,
                || {
                    let c1 = quasi_arc_constant(&coarse()?)?.constant;
                    let c2 = quasi_arc_constant(fine()?)?.constant;
                    Ok((c2 - c1).abs() / c1)
                },
            ));
            if d.is_smooth() {
                entries.push(CheckEntry::timed("derivative.formula", "γ′(t) = (i/√|t|)·exp ∫ …", 1e-3, || {
                    let f = derivative_formula(d, cfg.t, &DerivativeOptions::default())?;
                    let fd = finite_difference(d, cfg.t, 1e-4)?;
                    Ok((f - fd).norm() / fd.norm())
                }));
            }
        }
    }
    if cfg.suite.includes(Suite::Motion) {
        entries.extend(motion_entries(d, cfg));
    }
    if cfg.suite.includes(Suite::Hull) {
        let hc = HullSuiteConfig {
            t: cfg.t,
            s: cfg.s,
            window: cfg.window,
            resolution: cfg.resolution,
            trace_samples: cfg.n,
            raster: RasterOptions::with_exec(cfg.exec),
            ..Default::default()
        };
        entries.extend(hull_property_suite(d, &hc));
    }
    let config = serde_json::to_value(cfg)?;
    Ok(VerificationReport::new(d, config, entries, start.elapsed().as_secs_f64()))
}

/// Keeps samples `±(k/n)²` with even `k` of a trace on the doubled grid,
/// which is exactly the grid with half as many samples per side.
fn every_other(tr: &TraceSamples) -> TraceSamples {
    let keep = |v: &[f64]| v.iter().step_by(2).copied().collect::<Vec<_>>();
    TraceSamples {
        params: keep(&tr.params),
        points: tr.points.iter().step_by(2).copied().collect(),
        errors: keep(&tr.errors),
    }
}

fn cone_entries(d: &Driver, cfg: &VerifyConfig) -> Vec<CheckEntry> {
    let mut out = vec![
        CheckEntry::timed("cone.constraint", "constraint at θ₁ = 0 holds for some θ₂", 0.0, || {
            match ConeParams::certify(cfg.sigma, 0.0) {
                Some(cp) => Ok(-constraint_margin(cfg.sigma, 0.0, cp.theta2).unwrap_or(f64::NAN)),
                None => Ok(f64::INFINITY),
            }
        }),
        CheckEntry::timed("driver.holder_budget", "‖λ‖_{1/2} ≤ σ", cfg.sigma, || {
            Ok(d.holder_norm_estimate(CERTIFY_GRID)?.norm_lower_bound)
        }),
    ];

    let certified = cone_trajectories(d, cfg).map_err(|e| e.to_string());
    let get = || certified.as_ref().map_err(|e| Error::Inconsistency(e.clone()));
    out.push(CheckEntry::timed("backward.cone_ratio", "A(u) stays in the θ₂ cone", 0.0, || {
        Ok(-get()?.iter().map(|c| c.0).fold(f64::INFINITY, f64::min))
    }));
    out.push(CheckEntry::timed("backward.im_bound", "Im A(u) ≥ ν√u", 1e-8, || {
        Ok(-get()?.iter().map(|c| c.1).fold(f64::INFINITY, f64::min))
    }));
    out.push(CheckEntry::timed(
        "backward.gronwall",
        "|A(u) − B(u)| ≤ |A(0) − B(0)| + (C₂ + 1)σ√u",
        1e-8,
        || Ok(get()?.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max)),
    ));
    out
}

/// `(min_ratio, im_margin, gronwall violation)` for every horizon, rung and side.
fn cone_trajectories(d: &Driver, cfg: &VerifyConfig) -> Result<Vec<(f64, f64, f64)>> {
    let cp = ConeParams::certify(cfg.sigma, 0.0).ok_or_else(|| Error::Domain("no feasible θ₂".into()))?;
    let starts: Vec<(f64, Complex64)> = CERTIFY_HORIZONS
        .iter()
        .flat_map(|&h| {
            cfg.ladder
                .iter()
                .flat_map(move |&y| [(h, Complex64::new(0.0, y)), (h, Complex64::new(0.0, -y))])
        })
        .collect();
    cfg.exec.try_map(&starts, |&(h, z)| {
        let traj = integrate_backward(d, h, z, cfg.tol)?;
        let c = cone_certificate(&traj, &cp);
        Ok((c.min_ratio, c.im_margin, gronwall_gap(&traj, &cp, cfg.sigma).max_violation))
    })
}

fn trace_entries(d: &Driver, cfg: &VerifyConfig, trace: &dyn Fn() -> Result<TraceSamples>) -> Vec<CheckEntry> {
    let cone = || {
        let cp = ConeParams::certify(cfg.sigma, 0.0).ok_or_else(|| Error::Domain("no feasible θ₂".into()))?;
        trace_cone_check(d, &trace()?, &cp)
    };
    vec![
        CheckEntry::timed("trace.cone", "γ(t) ∈ ±C₁ + λ(0)", 1.0, || {
            let r = cone()?;
            Ok(if r.wrong_side > 0 { f64::INFINITY } else { r.max_slope })
        }),
        CheckEntry::timed("trace.im_lower_bound", "|Im(γ(t) − λ(0))| ≥ ν√|t|", 1e-8, || {
            Ok(cone()?.im_violation)
        }),
        CheckEntry::timed("trace.injectivity", "t ↦ γ(t) is injective", 1.0, || {
            let r = injectivity_check(&trace()?, INJECTIVITY_SEPARATION)?;
            Ok(r.error_floor / r.min_distance)
        }),
        CheckEntry::timed("trace.round_trip", "lim g_t(z) = λ(T_z) at the tip", 1e-3, || {
            round_trip_check(d, cfg.t, &RoundTripOptions::default())
        }),
        CheckEntry::timed("trace.expansion_at_infinity", "g_t(z) = z + 2t/z + O(1/|z|²)", 10.0, || {
            Ok(expansion_at_infinity(d, 1.0, &[100.0], 16)?[0])
        }),
    ]
}

fn motion_entries(d: &Driver, cfg: &VerifyConfig) -> Vec<CheckEntry> {
    vec![
        CheckEntry::timed("motion.base_point", "γ^{(0)}(t) = 2i√t", 1e-6, || {
            let (v, _) = motion_sample(d, Complex64::new(0.0, 0.0), cfg.t, &cfg.ladder, cfg.tol)?;
            Ok((v - Complex64::new(0.0, 2.0 * cfg.t.sqrt())).norm())
        }),
        CheckEntry::timed("motion.analyticity", "α ↦ γ^{(α)}(t) is holomorphic", 1e-4, || {
            let r = (0.5 * certified_alpha_radius(d, cfg.sigma)?).min(0.2);
            analyticity_residual(d, cfg.t, Complex64::new(0.0, 0.0), r, 16, &cfg.ladder, cfg.tol, cfg.exec)
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_driver_passes_everything() {
        let d = Driver::constant(Complex64::new(0.3, 0.2));
        let cfg = VerifyConfig {
            n: 16,
            resolution: 40,
            ..Default::default()
        };
        let rep = verify(&d, &cfg).unwrap();
        for e in &rep.entries {
            assert!(e.pass, "{e:?}");
        }
        assert!(rep.entry("derivative.formula").is_some());
        assert!(rep.entry("hull.duality").is_some());
        assert!(rep.entry("backward.gronwall").is_some());
        let names: Vec<&str> = rep.entries.iter().map(|e| e.check.as_str()).collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn suite_selection() {
        let cfg = VerifyConfig {
            suite: Suite::Cone,
            ..Default::default()
        };
        let rep = verify(&Driver::zero(), &cfg).unwrap();
        assert!(rep.entries.iter().all(|e| e.check.starts_with("cone") || e.check.starts_with("backward") || e.check.starts_with("driver")));
        assert!(rep.all_pass());
        assert_eq!("hull".parse::<Suite>().unwrap(), Suite::Hull);
        assert!("everything".parse::<Suite>().is_err());
    }

    #[test]
    fn over_budget_driver_fails_the_budget_check() {
        let cfg = VerifyConfig {
            suite: Suite::Cone,
            ..Default::default()
        };
        let rep = verify(&Driver::sqrt(Complex64::new(2.0, 0.0)), &cfg).unwrap();
        assert!(!rep.entry("driver.holder_budget").unwrap().pass);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = VerifyConfig {
            t: 0.9,
            s: 0.2,
            ..Default::default()
        };
        assert!(verify(&Driver::zero(), &cfg).is_err());
    }
}
