//! JSON driver specifications.
//!
//! ```json
//! {"kind": "shifted", "c": {"re": 0.5, "im": 0.0},
//!  "inner": {"kind": "sqrt", "coef": {"re": 0.3, "im": 0.0}}}
//! ```
//!
//! | kind          | fields                                              |
//! |---------------|-----------------------------------------------------|
//! | `constant`    | `c`                                                 |
//! | `linear`      | `coef`, optional offset `c`                         |
//! | `sqrt`        | `coef`, optional offset `c`                         |
//! | `samples`     | `times`, `re`, `im`                                 |
//! | `weierstrass` | `a`, `b`, `K`, `coef`, optional offset `c`          |
//! | `brownian`    | `seed`, `K` (dyadic levels), `scale`, optional `coef` (default 1) |
//! | `scaled`      | `inner`, `scale`                                    |
//! | `shifted`     | `inner`, `c`                                        |
//! | `negated`     | `inner`                                             |
//! | `dual`        | `inner`, `t0` (the horizon)                         |
//! | `restricted`  | `inner`, `t0`                                       |
//! | `multiplied`  | `inner`, `alpha`                                    |
//!
//! Unknown fields, and known fields that the kind does not use, are rejected.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::driver::{Driver, Samples};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexSpec {
    fn from(c: Complex64) -> Self {
        ComplexSpec { re: c.re, im: c.im }
    }
}

impl From<ComplexSpec> for Complex64 {
    fn from(c: ComplexSpec) -> Self {
        Complex64::new(c.re, c.im)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<ComplexSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coef: Option<ComplexSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub re: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inner: Option<Box<DriverSpec>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<ComplexSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t0: Option<f64>,
}

fn spec_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Spec(msg.into()))
}

fn need<T>(v: Option<T>, kind: &str, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::Spec(format!("{kind}: missing field \"{field}\"")))
}

impl DriverSpec {
    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut mark = |set: bool, name: &'static str| {
            if set {
                out.push(name)
            }
        };
        mark(self.c.is_some(), "c");
        mark(self.coef.is_some(), "coef");
        mark(self.times.is_some(), "times");
        mark(self.re.is_some(), "re");
        mark(self.im.is_some(), "im");
        mark(self.a.is_some(), "a");
        mark(self.b.is_some(), "b");
        mark(self.k.is_some(), "K");
        mark(self.seed.is_some(), "seed");
        mark(self.scale.is_some(), "scale");
        mark(self.inner.is_some(), "inner");
        mark(self.alpha.is_some(), "alpha");
        mark(self.t0.is_some(), "t0");
        out
    }

    fn allow(&self, allowed: &[&str]) -> Result<()> {
        for f in self.present() {
            if !allowed.contains(&f) {
                return spec_err(format!("{}: field \"{f}\" is not used by this kind", self.kind));
            }
        }
        Ok(())
    }

    fn inner_driver(&self) -> Result<Box<Driver>> {
        let inner = need(self.inner.as_ref(), &self.kind, "inner")?;
        Ok(Box::new(inner.to_driver()?))
    }

    pub fn to_driver(&self) -> Result<Driver> {
        let k = self.kind.as_str();
        let zero = Complex64::new(0.0, 0.0);
        let offset = self.c.map_or(zero, Complex64::from);
        let finite = |v: f64, name: &str| {
            if v.is_finite() {
                Ok(v)
            } else {
                spec_err(format!("{k}: \"{name}\" must be finite"))
            }
        };
        for c in [self.c, self.coef, self.alpha].into_iter().flatten() {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return spec_err(format!("{k}: complex parameters must be finite"));
            }
        }
        let d = match k {
            "constant" => {
                self.allow(&["c"])?;
                Driver::Constant(need(self.c, k, "c")?.into())
            }
            "linear" | "sqrt" => {
                self.allow(&["c", "coef"])?;
                let coef = need(self.coef, k, "coef")?.into();
                if k == "linear" {
                    Driver::Linear { offset, coef }
                } else {
                    Driver::Sqrt { offset, coef }
                }
            }
            "samples" => {
                self.allow(&["times", "re", "im"])?;
                let times = need(self.times.clone(), k, "times")?;
                let re = need(self.re.as_ref(), k, "re")?;
                let im = need(self.im.as_ref(), k, "im")?;
                if re.len() != times.len() || im.len() != times.len() {
                    return spec_err("samples: \"times\", \"re\" and \"im\" differ in length");
                }
                let values = re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect();
                Driver::Samples(Samples::new(times, values).map_err(|e| Error::Spec(e.to_string()))?)
            }
            "weierstrass" => {
                self.allow(&["a", "b", "K", "coef", "c"])?;
                let a = finite(need(self.a, k, "a")?, "a")?;
                let b = finite(need(self.b, k, "b")?, "b")?;
                let terms = need(self.k, k, "K")?;
                let coef = need(self.coef, k, "coef")?.into();
                let mut d = Driver::weierstrass(a, b, terms, coef)?;
                if let Driver::Weierstrass { offset: o, .. } = &mut d {
                    *o = offset;
                }
                d
            }
            "brownian" => {
                self.allow(&["seed", "K", "scale", "coef"])?;
                let seed = need(self.seed, k, "seed")?;
                let levels = need(self.k, k, "K")?;
                let scale = finite(need(self.scale, k, "scale")?, "scale")?;
                let coef = self.coef.map_or(Complex64::new(1.0, 0.0), Complex64::from);
                Driver::brownian(seed, levels, scale, coef)?
            }
            "scaled" => {
                self.allow(&["inner", "scale"])?;
                let factor = need(self.scale, k, "scale")?;
                if !(factor > 0.0 && factor.is_finite()) {
                    return spec_err("scaled: \"scale\" must be positive");
                }
                Driver::Scaled {
                    inner: self.inner_driver()?,
                    factor,
                }
            }
            "shifted" => {
                self.allow(&["inner", "c"])?;
                Driver::Shifted {
                    inner: self.inner_driver()?,
                    shift: need(self.c, k, "c")?.into(),
                }
            }
            "negated" => {
                self.allow(&["inner"])?;
                Driver::Negated {
                    inner: self.inner_driver()?,
                }
            }
            "dual" | "restricted" => {
                self.allow(&["inner", "t0"])?;
                let t0 = finite(need(self.t0, k, "t0")?, "t0")?;
                let inner = self.inner_driver()?;
                let h = inner.horizon();
                if !(0.0..=h).contains(&t0) {
                    return spec_err(format!("{k}: \"t0\" = {t0} outside [0, {h}]"));
                }
                if k == "dual" {
                    Driver::Dual { inner, horizon: t0 }
                } else {
                    Driver::Restricted { inner, start: t0 }
                }
            }
            "multiplied" => {
                self.allow(&["inner", "alpha"])?;
                Driver::Multiplied {
                    inner: self.inner_driver()?,
                    alpha: need(self.alpha, k, "alpha")?.into(),
                }
            }
            other => return spec_err(format!("unknown kind \"{other}\"")),
        };
        Ok(d)
    }

    pub fn from_driver(d: &Driver) -> DriverSpec {
        let base = |kind: &str| DriverSpec {
            kind: kind.to_string(),
            ..Default::default()
        };
        let nonzero = |c: &Complex64| (*c != Complex64::new(0.0, 0.0)).then(|| ComplexSpec::from(*c));
        let wrap = |kind: &str, inner: &Driver| DriverSpec {
            inner: Some(Box::new(DriverSpec::from_driver(inner))),
            ..base(kind)
        };
        match d {
            Driver::Constant(c) => DriverSpec {
                c: Some((*c).into()),
                ..base("constant")
            },
            Driver::Linear { offset, coef } | Driver::Sqrt { offset, coef } => DriverSpec {
                c: nonzero(offset),
                coef: Some((*coef).into()),
                ..base(d.kind())
            },
            Driver::Samples(s) => DriverSpec {
                times: Some(s.times().to_vec()),
                re: Some(s.values().iter().map(|v| v.re).collect()),
                im: Some(s.values().iter().map(|v| v.im).collect()),
                ..base("samples")
            },
            Driver::Weierstrass {
                a,
                b,
                terms,
                coef,
                offset,
            } => DriverSpec {
                a: Some(*a),
                b: Some(*b),
                k: Some(*terms),
                coef: Some((*coef).into()),
                c: nonzero(offset),
                ..base("weierstrass")
            },
            Driver::Brownian {
                seed,
                levels,
                scale,
                coef,
                ..
            } => DriverSpec {
                seed: Some(*seed),
                k: Some(*levels),
                scale: Some(*scale),
                coef: Some((*coef).into()),
                ..base("brownian")
            },
            Driver::Scaled { inner, factor } => DriverSpec {
                scale: Some(*factor),
                ..wrap("scaled", inner)
            },
            Driver::Shifted { inner, shift } => DriverSpec {
                c: Some((*shift).into()),
                ..wrap("shifted", inner)
            },
            Driver::Negated { inner } => wrap("negated", inner),
            Driver::Dual { inner, horizon } => DriverSpec {
                t0: Some(*horizon),
                ..wrap("dual", inner)
            },
            Driver::Restricted { inner, start } => DriverSpec {
                t0: Some(*start),
                ..wrap("restricted", inner)
            },
            Driver::Multiplied { inner, alpha } => DriverSpec {
                alpha: Some((*alpha).into()),
                ..wrap("multiplied", inner)
            },
        }
    }
}

pub fn parse_driver(json: &str) -> Result<Driver> {
    let spec: DriverSpec = serde_json::from_str(json).map_err(|e| Error::Spec(e.to_string()))?;
    spec.to_driver()
}

pub fn load_driver(path: &Path) -> Result<Driver> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Spec(format!("cannot read {}: {e}", path.display())))?;
    parse_driver(&text)
}

/// Canonical compact JSON of a driver.
pub fn to_json(d: &Driver) -> String {
    serde_json::to_string(&DriverSpec::from_driver(d)).expect("driver specs always serialize")
}

/// Hex SHA-256 of [`to_json`].
pub fn fingerprint(d: &Driver) -> String {
    let digest = Sha256::digest(to_json(d).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn round_trips() {
        let drivers = vec![
            Driver::constant(c(0.2, 0.1)),
            Driver::linear(c(0.1, 0.0)).shifted(c(0.0, 1.0)),
            Driver::sqrt(c(0.3, 0.0)).negated().dual(0.5).unwrap(),
            Driver::weierstrass(0.5, 2.0, 5, c(0.1, 0.1)).unwrap().scaled(2.0).unwrap(),
            Driver::brownian(3, 6, 0.2, c(1.0, 0.0)).unwrap().restricted(0.25).unwrap(),
            Driver::Samples(Samples::new(vec![0.0, 0.5, 1.0], vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0)]).unwrap())
                .multiplied(c(0.0, 0.5)),
        ];
        for d in drivers {
            let back = parse_driver(&to_json(&d)).unwrap();
            assert_eq!(back, d);
            assert_eq!(fingerprint(&back), fingerprint(&d));
        }
    }

    #[test]
    fn schema_examples() {
        let d = parse_driver(r#"{"kind":"constant","c":{"re":0.3,"im":0.2}}"#).unwrap();
        assert_eq!(d, Driver::constant(c(0.3, 0.2)));
        let d = parse_driver(r#"{"kind":"weierstrass","a":0.5,"b":2,"K":4,"coef":{"re":0.1,"im":0}}"#).unwrap();
        assert!(d.is_smooth());
        let d = parse_driver(r#"{"kind":"samples","times":[0,1],"re":[0,1],"im":[0,0]}"#).unwrap();
        assert_eq!(d.eval(0.5).unwrap(), c(0.5, 0.0));
    }

    #[test]
    fn rejections() {
        for bad in [
            r#"{"kind":"constant","c":{"re":0,"im":0},"extra":1}"#,
            r#"{"kind":"constant","c":{"re":0,"im":0},"alpha":{"re":1,"im":0}}"#,
            r#"{"kind":"constant"}"#,
            r#"{"kind":"spiral"}"#,
            r#"{"kind":"samples","times":[0,0.5],"re":[0,1],"im":[0,0]}"#,
            r#"{"kind":"samples","times":[0,1],"re":[0],"im":[0,0]}"#,
            r#"{"kind":"dual","t0":2,"inner":{"kind":"constant","c":{"re":0,"im":0}}}"#,
            r#"{"kind":"scaled","scale":-1,"inner":{"kind":"constant","c":{"re":0,"im":0}}}"#,
            r#"{"kind":"constant","c":{"re":0,"im":0,"z":1}}"#,
            "not json",
        ] {
            assert!(matches!(parse_driver(bad), Err(Error::Spec(_))), "{bad}");
        }
    }

    #[test]
    fn fingerprint_distinguishes_drivers() {
        assert_ne!(fingerprint(&Driver::zero()), fingerprint(&Driver::constant(c(1e-9, 0.0))));
        assert_eq!(fingerprint(&Driver::zero()).len(), 64);
    }
}
