//! Text formats shared by the library and the command-line front end.

use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fuchsian::group::{octagon_group, GroupPresentation};
use crate::qdiff::rect_grid;
use crate::C64;

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `x0:x1:nx,y0:y1:ny`
pub fn parse_grid(s: &str) -> Result<Vec<C64>> {
    let bad = || Error::Config(format!("bad grid spec {s:?}, expected x0:x1:nx,y0:y1:ny"));
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(bad());
    }
    let axis = |p: &str| -> Result<(f64, f64, usize)> {
        let v: Vec<&str> = p.split(':').collect();
        if v.len() != 3 {
            return Err(bad());
        }
        let a = v[0].trim().parse::<f64>().map_err(|_| bad())?;
        let b = v[1].trim().parse::<f64>().map_err(|_| bad())?;
        let n = v[2].trim().parse::<usize>().map_err(|_| bad())?;
        if n == 0 || !a.is_finite() || !b.is_finite() {
            return Err(bad());
        }
        Ok((a, b, n))
    };
    let (x0, x1, nx) = axis(parts[0])?;
    let (y0, y1, ny) = axis(parts[1])?;
    Ok(rect_grid(x0, x1, nx, y0, y1, ny))
}

/// Quadratic differential specification for the `construct` command.
#[derive(Clone, Debug, PartialEq)]
pub enum QdSpec {
    Monomial(u32),
    Shifted(u32, C64),
    Rational,
    Theta(u32),
}

impl FromStr for QdSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad qd spec {s:?}"));
        let v: Vec<&str> = s.trim().split(':').collect();
        match v.as_slice() {
            ["monomial", n] => Ok(QdSpec::Monomial(n.parse().map_err(|_| bad())?)),
            ["shifted", n, re, im] => Ok(QdSpec::Shifted(
                n.parse().map_err(|_| bad())?,
                C64::new(re.parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?),
            )),
            ["rational", "(z+i)^-4"] => Ok(QdSpec::Rational),
            ["theta", l] => Ok(QdSpec::Theta(l.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// `octagon` or a path to a group JSON file.
pub fn load_group(spec: &str) -> Result<GroupPresentation> {
    if spec == "octagon" {
        return octagon_group();
    }
    let text = std::fs::read_to_string(Path::new(spec))?;
    let g: GroupPresentation = serde_json::from_str(&text)?;
    GroupPresentation::new(g.genus, g.generators, g.side_pairings)
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value < bound`.
    pub fn below(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, pass: value < bound }
    }

    /// Passes when `value > bound`.
    pub fn above(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, pass: value > bound }
    }

    /// Passes when `value == bound`.
    pub fn equals(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, pass: value == bound }
    }

    pub fn failed(name: &str, err: &Error) -> Self {
        eprintln!("{name}: {err}");
        Check { name: name.into(), value: f64::NAN, bound: f64::NAN, pass: false }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: String,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

impl Report {
    pub fn new(checks: Vec<Check>) -> Self {
        let all_pass = checks.iter().all(|c| c.pass);
        Report { schema: "1".into(), checks, all_pass }
    }
}
