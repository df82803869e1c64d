//! CSV tables with a `#`-prefixed metadata header.
//!
//! Numbers are written with 17 significant digits in exponent form, which
//! round-trips every `f64`; survivors are `inf` and overflowed pixels `nan`.

use std::io::Write;

use crate::backward::TraceSamples;
use crate::driver::Driver;
use crate::error::Result;
use crate::forward::Trajectory;
use crate::io::spec::{fingerprint, to_json};
use crate::motion::MotionGrid;
use crate::raster::HullRaster;

/// Key/value lines written before the column header.
#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub lines: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(d: &Driver, config: &serde_json::Value) -> Self {
        Metadata {
            lines: vec![
                ("tool".into(), format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))),
                ("driver_fingerprint".into(), fingerprint(d)),
                ("driver".into(), to_json(d)),
                ("config".into(), config.to_string()),
            ],
        }
    }

    fn write(&self, w: &mut impl Write) -> Result<()> {
        for (k, v) in &self.lines {
            writeln!(w, "# {k}: {v}")?;
        }
        Ok(())
    }
}

pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

fn row(w: &mut impl Write, xs: &[f64]) -> Result<()> {
    let cells: Vec<String> = xs.iter().map(|&x| fmt_num(x)).collect();
    writeln!(w, "{}", cells.join(","))?;
    Ok(())
}

/// `t,re,im,err`.
pub fn write_trace(w: &mut impl Write, meta: &Metadata, s: &TraceSamples) -> Result<()> {
    meta.write(w)?;
    writeln!(w, "t,re,im,err")?;
    for k in 0..s.len() {
        row(w, &[s.params[k], s.points[k].re, s.points[k].im, s.errors[k]])?;
    }
    Ok(())
}

/// `x,y,lifetime`, one row per pixel center in row-major order (x fastest).
pub fn write_raster(w: &mut impl Write, meta: &Metadata, r: &HullRaster) -> Result<()> {
    meta.write(w)?;
    writeln!(w, "x,y,lifetime")?;
    for (k, &l) in r.lifetimes.iter().enumerate() {
        let z = r.grid.center(k);
        row(w, &[z.re, z.im, l])?;
    }
    Ok(())
}

/// `alpha_re,alpha_im,t,re,im`.
pub fn write_motion(w: &mut impl Write, meta: &Metadata, g: &MotionGrid) -> Result<()> {
    meta.write(w)?;
    writeln!(w, "alpha_re,alpha_im,t,re,im")?;
    for (i, a) in g.alphas.iter().enumerate() {
        for (j, &t) in g.params.iter().enumerate() {
            let v = g.value(i, j);
            row(w, &[a.re, a.im, t, v.re, v.im])?;
        }
    }
    Ok(())
}

/// `t,re,im`.
pub fn write_trajectory(w: &mut impl Write, meta: &Metadata, tr: &Trajectory) -> Result<()> {
    meta.write(w)?;
    writeln!(w, "t,re,im")?;
    for (t, z) in tr.times.iter().zip(&tr.states) {
        row(w, &[*t, z.re, z.im])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::{Grid, Window};
    use num_complex::Complex64;

    #[test]
    fn number_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn raster_layout() {
        let r = HullRaster {
            grid: Grid::new(Window::square(1.0), 2, 2).unwrap(),
            t: 1.0,
            lifetimes: vec![0.5, f64::INFINITY, f64::INFINITY, f64::NAN],
        };
        let mut out = Vec::new();
        write_raster(&mut out, &Metadata::new(&Driver::zero(), &serde_json::json!({"t": 1})), &r).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# tool: loewner"));
        let header = lines.iter().position(|l| *l == "x,y,lifetime").unwrap();
        assert_eq!(lines.len(), header + 5);
        assert!(lines[header + 1].starts_with("-5.0000000000000000e-1,-5.0000000000000000e-1,5.0"));
        assert!(lines[header + 2].ends_with(",inf"));
        assert!(lines[header + 4].ends_with(",nan"));
    }

    #[test]
    fn trace_rows() {
        let s = TraceSamples {
            params: vec![0.0, 1.0],
            points: vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 2.0)],
            errors: vec![0.0, 1e-9],
        };
        let mut out = Vec::new();
        write_trace(&mut out, &Metadata { lines: vec![] }, &s).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert_eq!(text.lines().next(), Some("t,re,im,err"));
    }
}
