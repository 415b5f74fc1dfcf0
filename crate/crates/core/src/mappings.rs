//! Catalog of invertible point mappings and non-invertible (nonlocal)
//! mappings between linear wave equations.
//!
//! A point mapping changes the independent coordinates and multiplies the
//! dependent variable: `new = μ(old) · u`. A nonlocal mapping substitutes
//! `t = t(T)` and replaces `u` by the weighted derivative
//! `B = (u/t)_t / (γ₁t⁻² + γ₂t)`; `u` is recovered from `B` only through an
//! antiderivative in `T`, so there is no pointwise inverse.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Interval, Region};
use crate::expr::{EvalError, Jet2, JetScalar};
use crate::field::{field, JetField, SharedField};
use crate::speeds::{Band, DeltaComponent, Ratio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MappingId {
    M1,
    M2,
    M3,
    Q,
    D0,
    #[serde(rename = "DPOS")]
    DPos,
    #[serde(rename = "DNEG")]
    DNeg,
    N1,
    N2,
    C1,
    C2,
    Identity,
    Composite,
}

impl MappingId {
    /// The eleven catalog entries in catalog order.
    pub const CATALOG: [MappingId; 11] = [
        MappingId::M1,
        MappingId::M2,
        MappingId::M3,
        MappingId::Q,
        MappingId::D0,
        MappingId::DPos,
        MappingId::DNeg,
        MappingId::N1,
        MappingId::N2,
        MappingId::C1,
        MappingId::C2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MappingId::M1 => "M1",
            MappingId::M2 => "M2",
            MappingId::M3 => "M3",
            MappingId::Q => "Q",
            MappingId::D0 => "D0",
            MappingId::DPos => "DPOS",
            MappingId::DNeg => "DNEG",
            MappingId::N1 => "N1",
            MappingId::N2 => "N2",
            MappingId::C1 => "C1",
            MappingId::C2 => "C2",
            MappingId::Identity => "ID",
            MappingId::Composite => "COMPOSITE",
        }
    }
}

impl fmt::Display for MappingId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MappingId {
    type Err = MappingError;
    fn from_str(s: &str) -> Result<MappingId, MappingError> {
        MappingId::CATALOG
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| MappingError::UnknownId(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MappingError {
    #[error("mapping {0} is non-invertible")]
    NotInvertible(MappingId),
    #[error("cannot compose {outer} after {inner}: coordinate domains do not overlap")]
    DomainMismatch { outer: MappingId, inner: MappingId },
    #[error("unknown mapping id `{0}`")]
    UnknownId(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type CoordFn = Arc<dyn Fn(Jet2, Jet2) -> Result<(Jet2, Jet2), EvalError> + Send + Sync>;

fn coord_fn<F>(f: F) -> CoordFn
where
    F: Fn(Jet2, Jet2) -> Result<(Jet2, Jet2), EvalError> + Send + Sync + 'static,
{
    Arc::new(f)
}

/// Human-readable description of a mapping, used for catalog output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MappingInfo {
    pub id: MappingId,
    pub kind: &'static str,
    pub invertible: bool,
    pub formulas: Vec<String>,
    pub source_equation: String,
    pub target_equation: String,
    pub source_speed: String,
    pub target_speed: String,
    pub source_region: Region,
    pub target_region: Region,
}

#[derive(Clone)]
struct Describe {
    formulas: Vec<String>,
    source_equation: String,
    target_equation: String,
    source_speed: String,
    target_speed: String,
}

impl Describe {
    fn new(formulas: &[&str], eqs: [&str; 2], speeds: [&str; 2]) -> Describe {
        Describe {
            formulas: formulas.iter().map(|s| s.to_string()).collect(),
            source_equation: eqs[0].into(),
            target_equation: eqs[1].into(),
            source_speed: speeds[0].into(),
            target_speed: speeds[1].into(),
        }
    }
}

/// Invertible change of coordinates plus multiplier.
#[derive(Clone)]
pub struct PointMapping {
    pub id: MappingId,
    /// True when this is the inverse of the catalog entry `id`.
    pub inverted: bool,
    forward: CoordFn,
    inverse: CoordFn,
    multiplier: SharedField,
    /// Validity region in the old coordinates.
    pub source: Region,
    /// Validity region in the new coordinates.
    pub target: Region,
    describe: Describe,
}

impl fmt::Debug for PointMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PointMapping")
            .field("id", &self.id)
            .field("inverted", &self.inverted)
            .field("source", &self.source)
            .field("target", &self.target)
            .finish_non_exhaustive()
    }
}

fn check_nonzero(v: &Jet2, what: &str) -> Result<(), EvalError> {
    if v.value() == 0.0 || !v.value().is_finite() {
        Err(EvalError::Singular(format!("{what} = {}", v.value())))
    } else {
        Ok(())
    }
}

fn neg_recip(v: Jet2, what: &str) -> Result<Jet2, EvalError> {
    check_nonzero(&v, what)?;
    Ok(-v.recip())
}

/// `(ρ/2)·log|(v − ρ)/(v + ρ)|`
fn log_ratio(v: Jet2, rho: f64, what: &str) -> Result<Jet2, EvalError> {
    let lo = v.offset(-rho);
    let hi = v.offset(rho);
    check_nonzero(&lo, what)?;
    check_nonzero(&hi, what)?;
    Ok((lo.ln_abs() - hi.ln_abs()).scale(rho / 2.0))
}

/// Inverse of [`log_ratio`] on one component.
fn log_ratio_inverse(a: Jet2, rho: f64, band: Band) -> Jet2 {
    let r = a.scale(2.0 / rho).exp();
    let one = Jet2::constant(1.0);
    match band {
        Band::Above | Band::Below => ((one + r) / (one - r)).scale(rho),
        Band::Inside => ((one - r) / (one + r)).scale(rho),
    }
}

impl PointMapping {
    /// Forward coordinate map on jets: old → new.
    pub fn forward_jet(&self, p: Jet2, q: Jet2) -> Result<(Jet2, Jet2), EvalError> {
        (self.forward)(p, q)
    }

    /// Inverse coordinate map on jets: new → old.
    pub fn inverse_jet(&self, p: Jet2, q: Jet2) -> Result<(Jet2, Jet2), EvalError> {
        (self.inverse)(p, q)
    }

    pub fn forward(&self, p: f64, q: f64) -> Result<(f64, f64), EvalError> {
        let (a, b) = (self.forward)(Jet2::constant(p), Jet2::constant(q))?;
        Ok((a.value(), b.value()))
    }

    pub fn inverse(&self, p: f64, q: f64) -> Result<(f64, f64), EvalError> {
        let (a, b) = (self.inverse)(Jet2::constant(p), Jet2::constant(q))?;
        Ok((a.value(), b.value()))
    }

    /// Multiplier μ in old coordinates: `new = μ · u`.
    pub fn multiplier(&self) -> &SharedField {
        &self.multiplier
    }

    pub fn name(&self) -> String {
        if self.inverted {
            format!("{}^-1", self.id)
        } else {
            self.id.to_string()
        }
    }

    pub fn info(&self) -> MappingInfo {
        let d = &self.describe;
        MappingInfo {
            id: self.id,
            kind: "point",
            invertible: true,
            formulas: d.formulas.clone(),
            source_equation: d.source_equation.clone(),
            target_equation: d.target_equation.clone(),
            source_speed: d.source_speed.clone(),
            target_speed: d.target_speed.clone(),
            source_region: self.source,
            target_region: self.target,
        }
    }

    /// Identity map with unit multiplier.
    pub fn identity() -> PointMapping {
        PointMapping {
            id: MappingId::Identity,
            inverted: false,
            forward: coord_fn(|p, q| Ok((p, q))),
            inverse: coord_fn(|p, q| Ok((p, q))),
            multiplier: field(|_, _| Ok(Jet2::constant(1.0))),
            source: Region::ALL,
            target: Region::ALL,
            describe: Describe::new(&["identity"], ["-", "-"], ["-", "-"]),
        }
    }

    /// x = −1/X, t = t, u = −(1/X)·σ(X, t).
    pub fn m1() -> PointMapping {
        PointMapping {
            id: MappingId::M1,
            inverted: false,
            forward: coord_fn(|x, t| Ok((neg_recip(x, "x")?, t))),
            inverse: coord_fn(|xx, t| Ok((neg_recip(xx, "X")?, t))),
            multiplier: field(|x, _| Ok(x.recip())),
            source: Region::new(Interval::POSITIVE, Interval::ALL),
            target: Region::new(Interval::NEGATIVE, Interval::ALL),
            describe: Describe::new(
                &["x = -1/X", "t = t", "u = -(1/X) sigma(X, t)"],
                ["u_tt/c(x)^2 = u_xx", "sigma_tt/(X^4 c(-1/X)^2) = sigma_XX"],
                ["c(x)", "X^2 c(-1/X)"],
            ),
        }
    }

    /// x = x, t = −1/T, u = −(1/T)·σ(x, T).
    pub fn m2() -> PointMapping {
        PointMapping {
            id: MappingId::M2,
            inverted: false,
            forward: coord_fn(|x, t| Ok((x, neg_recip(t, "t")?))),
            inverse: coord_fn(|x, tt| Ok((x, neg_recip(tt, "T")?))),
            multiplier: field(|_, t| Ok(t.recip())),
            source: Region::new(Interval::ALL, Interval::NEGATIVE),
            target: Region::new(Interval::ALL, Interval::POSITIVE),
            describe: Describe::new(
                &["x = x", "t = -1/T", "u = -(1/T) sigma(x, T)"],
                ["u_tt/c(x)^2 = u_xx", "sigma_TT/(T^-4 c(x)^2) = sigma_xx"],
                ["c(x)", "T^-2 c(x)"],
            ),
        }
    }

    /// x = −1/X, t = −1/T, u = σ(X, T)/(X·T).
    pub fn m3() -> PointMapping {
        PointMapping {
            id: MappingId::M3,
            inverted: false,
            forward: coord_fn(|x, t| Ok((neg_recip(x, "x")?, neg_recip(t, "t")?))),
            inverse: coord_fn(|xx, tt| Ok((neg_recip(xx, "X")?, neg_recip(tt, "T")?))),
            multiplier: field(|x, t| Ok((x * t).recip())),
            source: Region::new(Interval::POSITIVE, Interval::NEGATIVE),
            target: Region::new(Interval::NEGATIVE, Interval::POSITIVE),
            describe: Describe::new(
                &["x = -1/X", "t = -1/T", "u = sigma(X, T)/(X T)"],
                ["u_tt/c(x)^2 = u_xx", "sigma_TT/(X^4 T^-4 c(-1/X)^2) = sigma_XX"],
                ["c(x)", "X^2 T^-2 c(-1/X)"],
            ),
        }
    }

    /// ξ = 1/x + t, η = 1/x − t, V = u/x.
    pub fn q() -> PointMapping {
        PointMapping {
            id: MappingId::Q,
            inverted: false,
            forward: coord_fn(|x, t| {
                check_nonzero(&x, "x")?;
                let s = x.recip();
                Ok((s + t, s - t))
            }),
            inverse: coord_fn(|xi, eta| {
                let sum = xi + eta;
                check_nonzero(&sum, "xi + eta")?;
                Ok((sum.recip().scale(2.0), (xi - eta).scale(0.5)))
            }),
            multiplier: field(|x, _| Ok(x.recip())),
            source: Region::new(Interval::POSITIVE, Interval::ALL),
            target: Region::ALL,
            describe: Describe::new(
                &["xi = 1/x + t", "eta = 1/x - t", "V(xi, eta) = u(x, t)/x"],
                ["u_tt/x^4 = u_xx", "V_xi_eta = 0"],
                ["x^2", "-"],
            ),
        }
    }

    /// Δ = 0: ξ = 1/x + 1/t, η = 1/x − 1/t, V = u/(x·t).
    pub fn d0() -> PointMapping {
        PointMapping {
            id: MappingId::D0,
            inverted: false,
            forward: coord_fn(|x, t| {
                check_nonzero(&x, "x")?;
                check_nonzero(&t, "t")?;
                let (a, b) = (x.recip(), t.recip());
                Ok((a + b, a - b))
            }),
            inverse: coord_fn(|xi, eta| {
                let sum = xi + eta;
                let diff = xi - eta;
                check_nonzero(&sum, "xi + eta")?;
                check_nonzero(&diff, "xi - eta")?;
                Ok((sum.recip().scale(2.0), diff.recip().scale(2.0)))
            }),
            multiplier: field(|x, t| Ok((x * t).recip())),
            source: Region::new(Interval::POSITIVE, Interval::POSITIVE),
            target: Region::ALL,
            describe: Describe::new(
                &["xi = 1/x + 1/t", "eta = 1/x - 1/t", "V(xi, eta) = u(x, t)/(x t)"],
                ["u_tt/c(x, t)^2 = u_xx", "V_xi_eta = 0"],
                ["x^2/t^2", "-"],
            ),
        }
    }

    /// Δ = ρ² > 0 on one connected component:
    /// ξ = A(x) − A(t), η = A(x) + A(t), A(v) = log|(v−ρ)/(v+ρ)|^(ρ/2),
    /// V = ((x²−ρ²)(t²−ρ²))^(−1/2)·u.
    pub fn dpos(rho: f64, component: DeltaComponent) -> PointMapping {
        assert!(rho > 0.0, "rho must be positive");
        PointMapping {
            id: MappingId::DPos,
            inverted: false,
            forward: coord_fn(move |x, t| {
                let ax = log_ratio(x, rho, "x = ±rho")?;
                let at = log_ratio(t, rho, "t = ±rho")?;
                Ok((ax - at, ax + at))
            }),
            inverse: coord_fn(move |xi, eta| {
                let ax = (xi + eta).scale(0.5);
                let at = (eta - xi).scale(0.5);
                Ok((
                    log_ratio_inverse(ax, rho, component.x),
                    log_ratio_inverse(at, rho, component.t),
                ))
            }),
            multiplier: field(move |x, t| {
                let r2 = Jet2::constant(rho * rho);
                let p = (x * x - r2) * (t * t - r2);
                check_nonzero(&p, "(x^2-rho^2)(t^2-rho^2)")?;
                let p = if p.value() < 0.0 { -p } else { p };
                Ok(p.powf(-0.5))
            }),
            source: component.region(rho),
            target: Region::ALL,
            describe: Describe::new(
                &[
                    "xi = log|(x-rho)/(x+rho)|^(rho/2) - log|(t-rho)/(t+rho)|^(rho/2)",
                    "eta = log|(x-rho)/(x+rho)|^(rho/2) + log|(t-rho)/(t+rho)|^(rho/2)",
                    "V(xi, eta) = ((x^2-rho^2)(t^2-rho^2))^(-1/2) u(x, t)",
                ],
                ["u_tt/c(x, t)^2 = u_xx", "V_xi_eta = 0"],
                ["(x^2-rho^2)/(t^2-rho^2)", "-"],
            ),
        }
    }

    /// Δ = −ρ² < 0: ξ = ρ·atan(x/ρ) − ρ·atan(t/ρ), η = ρ·atan(x/ρ) + ρ·atan(t/ρ),
    /// V = ((x²+ρ²)(t²+ρ²))^(−1/2)·u.
    pub fn dneg(rho: f64) -> PointMapping {
        assert!(rho > 0.0, "rho must be positive");
        let half_pi = std::f64::consts::FRAC_PI_2;
        let arc = move |v: Jet2| v.scale(1.0 / rho).atan().scale(rho);
        let arc_inv = move |a: Jet2| -> Result<Jet2, EvalError> {
            let s = a.scale(1.0 / rho);
            if s.value().abs() >= half_pi {
                return Err(EvalError::Singular(format!(
                    "characteristic value {} outside (-rho*pi/2, rho*pi/2)",
                    a.value()
                )));
            }
            Ok(s.tan().scale(rho))
        };
        PointMapping {
            id: MappingId::DNeg,
            inverted: false,
            forward: coord_fn(move |x, t| {
                let (ax, at) = (arc(x), arc(t));
                Ok((ax - at, ax + at))
            }),
            inverse: coord_fn(move |xi, eta| Ok((arc_inv((xi + eta).scale(0.5))?, arc_inv((eta - xi).scale(0.5))?))),
            multiplier: field(move |x, t| {
                let r2 = Jet2::constant(rho * rho);
                Ok(((x * x + r2) * (t * t + r2)).powf(-0.5))
            }),
            source: Region::ALL,
            target: Region::ALL,
            describe: Describe::new(
                &[
                    "xi = rho atan(x/rho) - rho atan(t/rho)",
                    "eta = rho atan(x/rho) + rho atan(t/rho)",
                    "V(xi, eta) = ((x^2+rho^2)(t^2+rho^2))^(-1/2) u(x, t)",
                ],
                ["u_tt/c(x, t)^2 = u_xx", "V_xi_eta = 0"],
                ["(x^2+rho^2)/(t^2+rho^2)", "-"],
            ),
        }
    }
}

/// `σ(new) = μ(old)·u(old)` with `old = inverse(new)`.
pub fn apply_point(m: &PointMapping, u: SharedField) -> SharedField {
    let m = m.clone();
    field(move |p, q| {
        if !m.target.contains(p.value(), q.value()) {
            return Err(EvalError::OutsideRegion {
                x: p.value(),
                t: q.value(),
                region: m.target.to_string(),
            });
        }
        let (x, t) = (m.inverse)(p, q)?;
        if !m.source.contains(x.value(), t.value()) {
            return Err(EvalError::OutsideRegion {
                x: x.value(),
                t: t.value(),
                region: m.source.to_string(),
            });
        }
        Ok(m.multiplier.eval(x, t)? * u.eval(x, t)?)
    })
}

/// The inverse point mapping, with multiplier `1/μ(inverse(new))`.
pub fn invert_point(m: &PointMapping) -> PointMapping {
    let old_inverse = m.inverse.clone();
    let mu = m.multiplier.clone();
    PointMapping {
        id: m.id,
        inverted: !m.inverted,
        forward: m.inverse.clone(),
        inverse: m.forward.clone(),
        multiplier: field(move |p, q| {
            let (x, t) = old_inverse(p, q)?;
            let v = mu.eval(x, t)?;
            check_nonzero(&v, "multiplier")?;
            Ok(v.recip())
        }),
        source: m.target,
        target: m.source,
        describe: m.describe.clone(),
    }
}

/// Relation constant for N1: `d/dT(T^{1/3}·u) = κ₁·T^{-5/3}·B`.
///
/// With `t = 3T^{-1/3}` we have `T^{1/3}u = 3u/t = 3U`, `dt/dT = −T^{-4/3}`
/// and `B = U_t/t`, so `d/dT(3U) = 3·t·B·(−T^{-4/3}) = −9·T^{-5/3}·B`.
pub const N1_KAPPA: f64 = -9.0;

/// Relation constant for N2: `d/dT(T^{-1/3}·u) = κ₂·T^{-4/3}·B`.
///
/// With `t = 3T^{1/3}` we have `T^{-1/3}u = 3U`, `dt/dT = T^{-2/3}` and
/// `B = t²U_t`, so `d/dT(3U) = 3·t^{-2}·B·T^{-2/3} = (1/3)·T^{-4/3}·B`
/// since `t² = 9T^{2/3}`.
pub const N2_KAPPA: f64 = 1.0 / 3.0;

/// Non-invertible mapping built from the seed solution `u = t`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalMapping {
    pub id: MappingId,
    /// Weight `β = (γ₁t⁻² + γ₂t)·B`.
    pub gamma1: f64,
    pub gamma2: f64,
    /// `t = 3·T^e`.
    pub t_exponent: Ratio,
    /// κ in `d/dT(T^{-e}·u) = κ·T^q·B`.
    pub relation_kappa: f64,
    /// q in the same relation.
    pub relation_q: Ratio,
    /// New speed is `T^p·c(x)`.
    pub speed_exponent: Ratio,
    /// Old coordinates `(x, t)`: t > 0.
    pub source: Region,
    /// New coordinates `(x, T)`: T > 0.
    pub target: Region,
}

impl NonlocalMapping {
    /// γ₁ = 0, γ₂ = 1, t = 3T^{-1/3} (T = 27t⁻³).
    pub fn n1() -> NonlocalMapping {
        NonlocalMapping {
            id: MappingId::N1,
            gamma1: 0.0,
            gamma2: 1.0,
            t_exponent: Ratio::new(-1, 3),
            relation_kappa: N1_KAPPA,
            relation_q: Ratio::new(-5, 3),
            speed_exponent: Ratio::new(-4, 3),
            source: Region::new(Interval::ALL, Interval::POSITIVE),
            target: Region::new(Interval::ALL, Interval::POSITIVE),
        }
    }

    /// γ₁ = 1, γ₂ = 0, t = 3T^{1/3} (T = t³/27).
    pub fn n2() -> NonlocalMapping {
        NonlocalMapping {
            id: MappingId::N2,
            gamma1: 1.0,
            gamma2: 0.0,
            t_exponent: Ratio::new(1, 3),
            relation_kappa: N2_KAPPA,
            relation_q: Ratio::new(-4, 3),
            speed_exponent: Ratio::new(-2, 3),
            source: Region::new(Interval::ALL, Interval::POSITIVE),
            target: Region::new(Interval::ALL, Interval::POSITIVE),
        }
    }

    pub fn t_of_big_t(&self, big_t: f64) -> f64 {
        3.0 * big_t.powf(self.t_exponent.value())
    }

    pub fn big_t_of_t(&self, t: f64) -> f64 {
        (t / 3.0).powf(1.0 / self.t_exponent.value())
    }

    pub fn t_of_big_t_jet(&self, big_t: Jet2) -> Jet2 {
        big_t.powf(self.t_exponent.value()).scale(3.0)
    }

    pub fn beta_weight(&self, t: f64) -> f64 {
        self.gamma1 / (t * t) + self.gamma2 * t
    }

    fn beta_weight_jet(&self, t: Jet2) -> Jet2 {
        t.powi(-2).scale(self.gamma1) + t.scale(self.gamma2)
    }

    pub fn info(&self) -> MappingInfo {
        let (formulas, target) = match self.id {
            MappingId::N1 => (
                vec![
                    "x = x",
                    "t = 3 T^(-1/3)",
                    "u = T^(-1/3) int T^(-5/3) B(x, T) dT",
                    "T = 27 t^-3",
                    "beta = (u/t)_t = t B",
                ],
                "B_TT/(T^(-8/3) c(x)^2) = B_xx",
            ),
            _ => (
                vec![
                    "x = x",
                    "t = 3 T^(1/3)",
                    "u = T^(1/3) int T^(-4/3) B(x, T) dT",
                    "T = t^3/27",
                    "beta = (u/t)_t = t^-2 B",
                ],
                "B_TT/(T^(-4/3) c(x)^2) = B_xx",
            ),
        };
        MappingInfo {
            id: self.id,
            kind: "nonlocal",
            invertible: false,
            formulas: formulas.into_iter().map(String::from).collect(),
            source_equation: "u_tt/c(x)^2 = u_xx".into(),
            target_equation: target.into(),
            source_speed: "c(x)".into(),
            target_speed: format!("T^({}) c(x)", self.speed_exponent),
            source_region: self.source,
            target_region: self.target,
        }
    }
}

/// `B(x, T) = β(x, t(T)) / (γ₁t⁻² + γ₂t)` with `β = (u/t)_t`.
///
/// The t-derivative costs one jet order, so B is known to second order.
pub fn push_forward_nonlocal(n: &NonlocalMapping, u: SharedField) -> SharedField {
    let n = n.clone();
    field(move |x, big_t| {
        let t0 = big_t.value();
        if !n.target.contains(x.value(), t0) {
            return Err(EvalError::OutsideRegion {
                x: x.value(),
                t: t0,
                region: n.target.to_string(),
            });
        }
        let t_seed = n.t_of_big_t_jet(big_t);
        let (xi, ti) = Jet2::seeds(x.value(), t_seed.value());
        let uj = u.eval(xi, ti)?;
        let beta = (uj / ti).diff_t();
        let b = beta / n.beta_weight_jet(ti);
        Ok(b.substitute(&x, &t_seed))
    })
}

/// `|d/dT(T^{-e}·u(x, t(T))) − κ·T^q·B(x, T)|` at `(x, T)`.
pub fn check_integral_relation(
    n: &NonlocalMapping,
    u: &dyn JetField,
    b: &dyn JetField,
    x: f64,
    big_t: f64,
) -> Result<f64, EvalError> {
    let (lhs, base) = integral_relation_sides(n, u, b, x, big_t)?;
    Ok((lhs - n.relation_kappa * base).abs())
}

/// The two sides of the derivative-form relation without κ:
/// `(d/dT(T^{-e}·u), T^q·B)`.
pub fn integral_relation_sides(
    n: &NonlocalMapping,
    u: &dyn JetField,
    b: &dyn JetField,
    x: f64,
    big_t: f64,
) -> Result<(f64, f64), EvalError> {
    if big_t <= 0.0 {
        return Err(EvalError::Singular(format!("T = {big_t} must be positive")));
    }
    let tj = Jet2::var_t(big_t);
    let uj = u.eval(Jet2::constant(x), n.t_of_big_t_jet(tj))?;
    let lhs = (tj.powf(-n.t_exponent.value()) * uj).f_t();
    let base = big_t.powf(n.relation_q.value()) * b.value_at(x, big_t)?;
    Ok((lhs, base))
}

/// A point mapping applied after a nonlocal one: `(x, T) → outer(x, t(T))`.
#[derive(Debug, Clone)]
pub struct CompositeMapping {
    pub id: MappingId,
    pub outer: PointMapping,
    pub inner: NonlocalMapping,
}

impl CompositeMapping {
    /// New coordinates of the outer mapping at `(x, T)`.
    pub fn coords(&self, x: f64, big_t: f64) -> Result<(f64, f64), EvalError> {
        self.outer.forward(x, self.inner.t_of_big_t(big_t))
    }

    /// Takes a solution V of the outer mapping's target equation back to u
    /// and pushes it through the nonlocal mapping.
    pub fn push_forward(&self, v: SharedField) -> SharedField {
        let u = apply_point(&invert_point(&self.outer), v);
        push_forward_nonlocal(&self.inner, u)
    }

    /// V expressed as the seed-level field u = (outer⁻¹)(V) that enters the
    /// integral relation.
    pub fn pull_back(&self, v: SharedField) -> SharedField {
        apply_point(&invert_point(&self.outer), v)
    }

    pub fn info(&self) -> MappingInfo {
        let inner = self.inner.info();
        let (formulas, target) = match self.inner.id {
            MappingId::N1 => (
                [
                    "xi = 1/x + 3 T^(-1/3)",
                    "eta = 1/x - 3 T^(-1/3)",
                    "V = (T^(-1/3)/x) int T^(-5/3) B(x, T) dT",
                ],
                "B_TT/(T^(-8/3) x^4) = B_xx",
            ),
            _ => (
                [
                    "xi = 1/x + 3 T^(1/3)",
                    "eta = 1/x - 3 T^(1/3)",
                    "V = (T^(1/3)/x) int T^(-4/3) B(x, T) dT",
                ],
                "B_TT/(T^(-4/3) x^4) = B_xx",
            ),
        };
        MappingInfo {
            id: self.id,
            kind: "composite",
            invertible: false,
            formulas: formulas.iter().map(|s| s.to_string()).collect(),
            source_equation: "V_xi_eta = 0".into(),
            target_equation: target.into(),
            source_speed: "-".into(),
            target_speed: format!("T^({}) x^2", self.inner.speed_exponent),
            source_region: self.outer.target,
            target_region: inner.target_region,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Mapping {
    Point(PointMapping),
    Nonlocal(NonlocalMapping),
    Composite(CompositeMapping),
}

impl Mapping {
    pub fn id(&self) -> MappingId {
        match self {
            Mapping::Point(m) => m.id,
            Mapping::Nonlocal(n) => n.id,
            Mapping::Composite(c) => c.id,
        }
    }

    pub fn info(&self) -> MappingInfo {
        match self {
            Mapping::Point(m) => m.info(),
            Mapping::Nonlocal(n) => n.info(),
            Mapping::Composite(c) => c.info(),
        }
    }

    pub fn as_point(&self) -> Option<&PointMapping> {
        match self {
            Mapping::Point(m) => Some(m),
            _ => None,
        }
    }

    /// Pushes a solution of the source equation to the target equation.
    pub fn push_forward(&self, u: SharedField) -> SharedField {
        match self {
            Mapping::Point(m) => apply_point(m, u),
            Mapping::Nonlocal(n) => push_forward_nonlocal(n, u),
            Mapping::Composite(c) => c.push_forward(u),
        }
    }
}

/// Inverse of a point mapping; nonlocal and composite mappings have none.
pub fn invert(m: &Mapping) -> Result<PointMapping, MappingError> {
    match m {
        Mapping::Point(p) => Ok(invert_point(p)),
        other => Err(MappingError::NotInvertible(other.id())),
    }
}

/// `outer ∘ inner`.
pub fn compose(outer: &PointMapping, inner: &Mapping) -> Result<Mapping, MappingError> {
    match inner {
        Mapping::Point(inner) => {
            if inner.target.intersect(&outer.source).is_none() {
                return Err(MappingError::DomainMismatch {
                    outer: outer.id,
                    inner: inner.id,
                });
            }
            if outer.id == MappingId::Identity {
                return Ok(Mapping::Point(inner.clone()));
            }
            if inner.id == MappingId::Identity {
                return Ok(Mapping::Point(outer.clone()));
            }
            let (of, inf) = (outer.forward.clone(), inner.forward.clone());
            let (oi, ini) = (outer.inverse.clone(), inner.inverse.clone());
            let (om, im) = (outer.multiplier.clone(), inner.multiplier.clone());
            let inf_mu = inner.forward.clone();
            Ok(Mapping::Point(PointMapping {
                id: MappingId::Composite,
                inverted: false,
                forward: coord_fn(move |p, q| {
                    let (a, b) = inf(p, q)?;
                    of(a, b)
                }),
                inverse: coord_fn(move |p, q| {
                    let (a, b) = oi(p, q)?;
                    ini(a, b)
                }),
                multiplier: field(move |p, q| {
                    let (a, b) = inf_mu(p, q)?;
                    Ok(om.eval(a, b)? * im.eval(p, q)?)
                }),
                source: inner.source,
                target: outer.target,
                describe: Describe::new(
                    &[&format!("{} after {}", outer.name(), inner.name())],
                    [&inner.describe.source_equation, &outer.describe.target_equation],
                    [&inner.describe.source_speed, &outer.describe.target_speed],
                ),
            }))
        }
        Mapping::Nonlocal(n) => {
            if n.source.intersect(&outer.source).is_none() {
                return Err(MappingError::DomainMismatch {
                    outer: outer.id,
                    inner: n.id,
                });
            }
            let id = match (outer.id, outer.inverted, n.id) {
                (MappingId::Q, false, MappingId::N1) => MappingId::C1,
                (MappingId::Q, false, MappingId::N2) => MappingId::C2,
                _ => MappingId::Composite,
            };
            Ok(Mapping::Composite(CompositeMapping {
                id,
                outer: outer.clone(),
                inner: n.clone(),
            }))
        }
        Mapping::Composite(c) => Err(MappingError::DomainMismatch {
            outer: outer.id,
            inner: c.id,
        }),
    }
}

/// The full catalog with ρ = 1 for the Δ ≠ 0 cases.
pub fn catalog() -> Vec<Mapping> {
    catalog_with_rho(1.0)
}

pub fn catalog_with_rho(rho: f64) -> Vec<Mapping> {
    let q = PointMapping::q();
    let c1 = compose(&q, &Mapping::Nonlocal(NonlocalMapping::n1())).expect("Q after N1");
    let c2 = compose(&q, &Mapping::Nonlocal(NonlocalMapping::n2())).expect("Q after N2");
    vec![
        Mapping::Point(PointMapping::m1()),
        Mapping::Point(PointMapping::m2()),
        Mapping::Point(PointMapping::m3()),
        Mapping::Point(q),
        Mapping::Point(PointMapping::d0()),
        Mapping::Point(PointMapping::dpos(rho, DeltaComponent::default())),
        Mapping::Point(PointMapping::dneg(rho)),
        Mapping::Nonlocal(NonlocalMapping::n1()),
        Mapping::Nonlocal(NonlocalMapping::n2()),
        c1,
        c2,
    ]
}

pub fn find(id: MappingId) -> Option<Mapping> {
    catalog().into_iter().find(|m| m.id() == id)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use crate::field::ExprField;

    fn xt(src: &str) -> SharedField {
        Arc::new(ExprField(Expression::parse(src, &["x", "t"]).unwrap()))
    }

    #[test]
    fn catalog_has_eleven_entries() {
        let ids: Vec<_> = catalog().iter().map(Mapping::id).collect();
        assert_eq!(ids, MappingId::CATALOG.to_vec());
    }

    #[test]
    fn q_and_m3_arithmetic() {
        assert_eq!(PointMapping::q().forward(2.0, 3.0).unwrap(), (3.5, -2.5));
        assert_eq!(PointMapping::m3().forward(-1.0, -1.0).unwrap(), (1.0, 1.0));
    }

    #[test]
    fn apply_point_examples() {
        let zero = apply_point(&PointMapping::m1(), xt("0"));
        assert_eq!(zero.value_at(-2.0, 0.3).unwrap(), 0.0);

        let v = apply_point(&PointMapping::q(), xt("x"));
        let j = v.jet_at(1.2, 0.4).unwrap();
        assert!((j.f() - 1.0).abs() < 1e-15);
        assert!(j.f_x().abs() < 1e-14 && j.f_t().abs() < 1e-14);

        let s = apply_point(&PointMapping::m2(), xt("t"));
        assert!((s.value_at(0.7, 1.5).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn invert_m1_is_involution() {
        let inv = invert_point(&PointMapping::m1());
        assert_eq!(inv.forward(1.0, 0.0).unwrap().0, -1.0);
        let twice = invert_point(&inv);
        for (x, t) in [(0.5, 1.0), (3.0, -2.0)] {
            assert_eq!(twice.forward(x, t).unwrap(), PointMapping::m1().forward(x, t).unwrap());
        }
    }

    #[test]
    fn nonlocal_mappings_do_not_invert() {
        for id in [MappingId::N1, MappingId::N2, MappingId::C1, MappingId::C2] {
            let m = find(id).unwrap();
            assert_eq!(invert(&m).unwrap_err(), MappingError::NotInvertible(id));
        }
    }

    #[test]
    fn composite_coordinates() {
        let Mapping::Composite(c1) = find(MappingId::C1).unwrap() else {
            panic!()
        };
        let (xi, eta) = c1.coords(1.0, 27.0).unwrap();
        assert!((xi - 2.0).abs() < 1e-15 && eta.abs() < 1e-15);
        let Mapping::Composite(c2) = find(MappingId::C2).unwrap() else {
            panic!()
        };
        let (xi, eta) = c2.coords(1.0, 1.0 / 27.0).unwrap();
        assert!((xi - 2.0).abs() < 1e-15 && eta.abs() < 1e-15);
    }

    #[test]
    fn compose_with_identity() {
        let q = PointMapping::q();
        let m = compose(&PointMapping::identity(), &Mapping::Point(q.clone())).unwrap();
        let m = m.as_point().unwrap();
        assert_eq!(m.forward(2.0, 3.0).unwrap(), q.forward(2.0, 3.0).unwrap());
    }

    #[test]
    fn compose_point_mappings() {
        // M1 after M1 is the identity (up to multiplier (1/x)(−x)... = -1)
        let m1 = PointMapping::m1();
        let mm = compose(&invert_point(&m1), &Mapping::Point(m1.clone())).unwrap();
        let mm = mm.as_point().unwrap();
        let (x, t) = mm.forward(0.8, 0.1).unwrap();
        assert!((x - 0.8).abs() < 1e-15 && t == 0.1);
        let mu = mm.multiplier().value_at(0.8, 0.1).unwrap();
        assert!((mu - 1.0).abs() < 1e-15);
    }

    #[test]
    fn compose_rejects_disjoint_domains() {
        // M1 maps into X < 0, DPOS needs x > 1
        let err = compose(
            &PointMapping::dpos(1.0, DeltaComponent::default()),
            &Mapping::Point(PointMapping::m1()),
        )
        .unwrap_err();
        assert!(matches!(err, MappingError::DomainMismatch { .. }));
    }

    #[test]
    fn push_forward_examples() {
        let n1 = NonlocalMapping::n1();
        let n2 = NonlocalMapping::n2();
        let b = push_forward_nonlocal(&n1, xt("t"));
        assert!(b.value_at(1.3, 8.0).unwrap().abs() < 1e-15);
        let b = push_forward_nonlocal(&n2, xt("1"));
        let j = b.jet_at(1.3, 0.2).unwrap();
        assert!((j.f() + 1.0).abs() < 1e-14);
        assert!(j.f_t().abs() < 1e-12 && j.f_tt().abs() < 1e-10);
        let b = push_forward_nonlocal(&n1, xt("x*t"));
        assert!(b.value_at(0.4, 2.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn substitutions_invert_each_other() {
        for n in [NonlocalMapping::n1(), NonlocalMapping::n2()] {
            for t in [0.3, 1.0, 2.5, 7.0] {
                let back = n.t_of_big_t(n.big_t_of_t(t));
                assert!((back - t).abs() < 1e-14 * t);
            }
        }
        assert!((NonlocalMapping::n1().big_t_of_t(3.0) - 1.0).abs() < 1e-15);
        assert!((NonlocalMapping::n2().big_t_of_t(3.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn seed_solution_satisfies_relation() {
        let n1 = NonlocalMapping::n1();
        let u = xt("t");
        let b = push_forward_nonlocal(&n1, u.clone());
        let r = check_integral_relation(&n1, u.as_ref(), b.as_ref(), 0.5, 8.0).unwrap();
        assert!(r < 1e-15);
    }

    #[test]
    fn dpos_inverse_recovers_each_component() {
        for (x, t, comp) in [
            (
                2.0,
                3.0,
                DeltaComponent {
                    x: Band::Above,
                    t: Band::Above,
                },
            ),
            (
                0.3,
                3.0,
                DeltaComponent {
                    x: Band::Inside,
                    t: Band::Above,
                },
            ),
            (
                -2.5,
                -0.2,
                DeltaComponent {
                    x: Band::Below,
                    t: Band::Inside,
                },
            ),
        ] {
            let m = PointMapping::dpos(1.0, comp);
            let (xi, eta) = m.forward(x, t).unwrap();
            let (x2, t2) = m.inverse(xi, eta).unwrap();
            assert!((x2 - x).abs() < 1e-12 && (t2 - t).abs() < 1e-12, "{x2} {t2}");
        }
    }

    #[test]
    fn integral_relation_examples() {
        use crate::solutions::{general_solution_quadratic, SolutionPair};
        let u: SharedField = Arc::new(general_solution_quadratic(
            SolutionPair::parse("sin(s)", "cos(s)").unwrap(),
        ));
        for (n, big_t) in [(NonlocalMapping::n1(), 8.0), (NonlocalMapping::n2(), 0.2)] {
            let b = push_forward_nonlocal(&n, u.clone());
            assert!(check_integral_relation(&n, u.as_ref(), b.as_ref(), 1.3, big_t).unwrap() <= 1e-8);
            // central differences in T agree with the jet left side
            let g = |tt: f64| tt.powf(-n.t_exponent.value()) * u.value_at(1.3, n.t_of_big_t(tt)).unwrap();
            let h = 1e-5 * big_t;
            let fd = (g(big_t + h) - g(big_t - h)) / (2.0 * h);
            let (lhs, base) = integral_relation_sides(&n, u.as_ref(), b.as_ref(), 1.3, big_t).unwrap();
            assert!((fd - lhs).abs() <= 1e-7 * (1.0 + lhs.abs()), "{fd} vs {lhs}");
            assert!((lhs - n.relation_kappa * base).abs() <= 1e-8);
            let wrong = NonlocalMapping {
                relation_kappa: 1.1 * n.relation_kappa,
                ..n.clone()
            };
            assert!(check_integral_relation(&wrong, u.as_ref(), b.as_ref(), 1.3, big_t).unwrap() > 1e-4);
        }
    }
}
