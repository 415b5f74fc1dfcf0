//! Validity regions and sampling grids in a two-coordinate plane.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// An open interval `(lo, hi)`; either end may be infinite.
///
/// Serialized as `{"lo": .., "hi": ..}` with `null` for an infinite end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "IntervalRepr", into = "IntervalRepr")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    lo: Option<f64>,
    hi: Option<f64>,
}

impl From<IntervalRepr> for Interval {
    fn from(r: IntervalRepr) -> Interval {
        Interval {
            lo: r.lo.unwrap_or(f64::NEG_INFINITY),
            hi: r.hi.unwrap_or(f64::INFINITY),
        }
    }
}

impl From<Interval> for IntervalRepr {
    fn from(i: Interval) -> IntervalRepr {
        IntervalRepr {
            lo: i.lo.is_finite().then_some(i.lo),
            hi: i.hi.is_finite().then_some(i.hi),
        }
    }
}

impl Interval {
    pub const ALL: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const POSITIVE: Interval = Interval {
        lo: 0.0,
        hi: f64::INFINITY,
    };
    pub const NEGATIVE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: 0.0,
    };

    pub const fn new(lo: f64, hi: f64) -> Interval {
        Interval { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v > self.lo && v < self.hi
    }

    pub fn intersect(&self, o: &Interval) -> Option<Interval> {
        let lo = self.lo.max(o.lo);
        let hi = self.hi.min(o.hi);
        (lo < hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Open box `first × second` in the plane of a mapping's or equation's
/// two independent coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub first: Interval,
    pub second: Interval,
}

impl Region {
    pub const ALL: Region = Region {
        first: Interval::ALL,
        second: Interval::ALL,
    };

    pub const fn new(first: Interval, second: Interval) -> Region {
        Region { first, second }
    }

    pub fn contains(&self, p: f64, q: f64) -> bool {
        self.first.contains(p) && self.second.contains(q)
    }

    pub fn intersect(&self, o: &Region) -> Option<Region> {
        Some(Region {
            first: self.first.intersect(&o.first)?,
            second: self.second.intersect(&o.second)?,
        })
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} x {}", self.first, self.second)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid spec `{0}`: expected `name:a:b:n[:log]` for each axis")]
    Malformed(String),
    #[error("grid axis `{0}`: need a < b and n >= 2")]
    Degenerate(String),
    #[error("grid axis `{0}`: log spacing needs a > 0")]
    LogNonPositive(String),
}

/// Sample positions along one axis: `n` points from `a` to `b` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub n: usize,
    #[serde(default)]
    pub log: bool,
}

impl Axis {
    pub fn linear(name: &str, a: f64, b: f64, n: usize) -> Axis {
        Axis {
            name: name.to_string(),
            a,
            b,
            n,
            log: false,
        }
    }

    pub fn log(name: &str, a: f64, b: f64, n: usize) -> Axis {
        Axis {
            log: true,
            ..Axis::linear(name, a, b, n)
        }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.a < self.b) || self.n < 2 || !self.a.is_finite() || !self.b.is_finite() {
            return Err(GridError::Degenerate(self.name.clone()));
        }
        if self.log && self.a <= 0.0 {
            return Err(GridError::LogNonPositive(self.name.clone()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let m = (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                let s = i as f64 / m;
                if i == self.n - 1 {
                    self.b
                } else if self.log {
                    self.a * (self.b / self.a).powf(s)
                } else {
                    self.a + (self.b - self.a) * s
                }
            })
            .collect()
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}:{}", self.name, self.a, self.b, self.n)?;
        if self.log {
            f.write_str(":log")?;
        }
        Ok(())
    }
}

/// Tensor grid over two axes, written `x:a:b:n,t:a:b:n[:log]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub first: Axis,
    pub second: Axis,
}

impl GridSpec {
    pub fn new(first: Axis, second: Axis) -> GridSpec {
        GridSpec { first, second }
    }

    pub fn validate(&self) -> Result<(), GridError> {
        self.first.validate()?;
        self.second.validate()
    }

    /// All grid points, first coordinate varying slowest.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let qs = self.second.points();
        self.first
            .points()
            .into_iter()
            .flat_map(|p| qs.iter().map(move |&q| (p, q)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.first.n * self.second.n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.first, self.second)
    }
}

impl FromStr for GridSpec {
    type Err = GridError;

    fn from_str(s: &str) -> Result<GridSpec, GridError> {
        let malformed = || GridError::Malformed(s.to_string());
        let axes: Vec<Axis> = s
            .split(',')
            .map(|part| {
                let f: Vec<&str> = part.trim().split(':').collect();
                if !(4..=5).contains(&f.len()) || f[0].is_empty() {
                    return Err(malformed());
                }
                let log = match f.get(4) {
                    None => false,
                    Some(&"log") => true,
                    Some(_) => return Err(malformed()),
                };
                let a = f[1].parse().map_err(|_| malformed())?;
                let b = f[2].parse().map_err(|_| malformed())?;
                let n = f[3].parse().map_err(|_| malformed())?;
                Ok(Axis {
                    name: f[0].to_string(),
                    a,
                    b,
                    n,
                    log,
                })
            })
            .collect::<Result<_, _>>()?;
        let [first, second]: [Axis; 2] = axes.try_into().map_err(|_| malformed())?;
        let spec = GridSpec { first, second };
        spec.validate()?;
        Ok(spec)
    }
}
