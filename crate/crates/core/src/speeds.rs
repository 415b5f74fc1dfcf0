//! Wave-speed families and their evaluation on jets.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Interval, Region};
use crate::expr::{BinOp, EvalError, Expression, Jet2, JetScalar, Node};
use crate::mappings::MappingId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpeedError {
    #[error("mapping {mapping} does not apply to speed {speed}: {reason}")]
    Mismatch {
        mapping: MappingId,
        speed: String,
        reason: &'static str,
    },
    #[error("mapping {0} targets the characteristic form V_ξη = 0, which has no wave speed")]
    CharacteristicTarget(MappingId),
    #[error("invalid speed description: {0}")]
    Invalid(String),
}

/// Rational exponent `num/den`, kept exact for display and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ratio {
    pub num: i32,
    pub den: i32,
}

impl Ratio {
    pub const fn new(num: i32, den: i32) -> Ratio {
        Ratio { num, den }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn as_integer(&self) -> Option<i32> {
        (self.num % self.den == 0).then(|| self.num / self.den)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_integer() {
            Some(n) => write!(f, "{n}"),
            None => write!(f, "{}/{}", self.num, self.den),
        }
    }
}

impl std::str::FromStr for Ratio {
    type Err = SpeedError;
    fn from_str(s: &str) -> Result<Ratio, SpeedError> {
        let bad = || SpeedError::Invalid(format!("exponent `{s}`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = n.parse().map_err(|_| bad())?;
        let den: i32 = d.parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        Ok(Ratio { num, den })
    }
}

/// Which connected component of the Δ = ρ² > 0 family a point lies in,
/// per coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// v > ρ
    Above,
    /// |v| < ρ
    Inside,
    /// v < -ρ
    Below,
}

impl Band {
    pub fn interval(self, rho: f64) -> Interval {
        match self {
            Band::Above => Interval::new(rho, f64::INFINITY),
            Band::Inside => Interval::new(-rho, rho),
            Band::Below => Interval::new(f64::NEG_INFINITY, -rho),
        }
    }
}

impl std::str::FromStr for Band {
    type Err = SpeedError;
    fn from_str(s: &str) -> Result<Band, SpeedError> {
        match s.trim() {
            "above" => Ok(Band::Above),
            "inside" => Ok(Band::Inside),
            "below" => Ok(Band::Below),
            other => Err(SpeedError::Invalid(format!("component band `{other}`"))),
        }
    }
}

/// Component choice `(x band, t band)`; the default is `x > ρ, t > ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaComponent {
    pub x: Band,
    pub t: Band,
}

impl Default for DeltaComponent {
    fn default() -> Self {
        DeltaComponent {
            x: Band::Above,
            t: Band::Above,
        }
    }
}

impl DeltaComponent {
    pub fn region(&self, rho: f64) -> Region {
        Region::new(self.x.interval(rho), self.t.interval(rho))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpeedFamily {
    /// c = x²
    QuadraticX,
    /// c = (x² − Δ)/(t² − Δ)
    Delta { delta: f64 },
    /// c = t^p · c₀(x) for an x-only base profile c₀
    TimePower { p: Ratio, base: Box<SpeedFamily> },
    /// c = c(x)
    Profile { cx: Expression },
    /// c = c(x, t)
    GeneralExpr { cxt: Expression },
}

impl SpeedFamily {
    fn eval_raw(&self, x: Jet2, t: Jet2) -> Result<Jet2, EvalError> {
        match self {
            SpeedFamily::QuadraticX => Ok(x * x),
            SpeedFamily::Delta { delta } => {
                let den = t * t - Jet2::constant(*delta);
                if den.value() == 0.0 {
                    return Err(EvalError::Singular(format!(
                        "t² = Δ at t = {} for Δ = {delta}",
                        t.value()
                    )));
                }
                Ok((x * x - Jet2::constant(*delta)) / den)
            }
            SpeedFamily::TimePower { p, base } => {
                let tp = match p.as_integer() {
                    Some(n) => {
                        if t.value() == 0.0 {
                            return Err(EvalError::Singular("t = 0 in time power".into()));
                        }
                        t.powi(n)
                    }
                    None => {
                        if t.value() <= 0.0 {
                            return Err(EvalError::Singular(format!(
                                "fractional time power needs t > 0, got {}",
                                t.value()
                            )));
                        }
                        t.powf(p.value())
                    }
                };
                Ok(tp * base.eval_raw(x, t)?)
            }
            SpeedFamily::Profile { cx } => cx.eval_jet2(x, t),
            SpeedFamily::GeneralExpr { cxt } => cxt.eval_jet2(x, t),
        }
    }

    /// The x-only profile `c(x)` when this family has no t-dependence.
    pub fn x_profile(&self) -> Option<Expression> {
        match self {
            SpeedFamily::QuadraticX => Some(Expression::parse("x^2", &["x"]).unwrap()),
            SpeedFamily::Profile { cx } => Some(cx.clone()),
            SpeedFamily::GeneralExpr { cxt } if !cxt.used_vars().iter().any(|v| v == "t") => {
                Some(Expression::from_node(cxt.root().clone(), &["x"]))
            }
            _ => None,
        }
    }

    /// Source text of `c(x, t)`.
    pub fn formula(&self) -> String {
        match self {
            SpeedFamily::QuadraticX => "x^2".into(),
            SpeedFamily::Delta { delta } => format!("(x^2 - {delta})/(t^2 - {delta})"),
            SpeedFamily::TimePower { p, base } => format!("t^({p})*({})", base.formula()),
            SpeedFamily::Profile { cx } => cx.render(),
            SpeedFamily::GeneralExpr { cxt } => cxt.render(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpeedFamily::QuadraticX => "quadratic_x",
            SpeedFamily::Delta { .. } => "delta",
            SpeedFamily::TimePower { .. } => "time_power",
            SpeedFamily::Profile { .. } => "profile",
            SpeedFamily::GeneralExpr { .. } => "general",
        }
    }
}

/// A wave speed together with the open box on which it may be evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpeed {
    pub family: SpeedFamily,
    pub region: Region,
}

impl WaveSpeed {
    /// c = x² on x > 0.
    pub fn quadratic_x() -> WaveSpeed {
        WaveSpeed {
            family: SpeedFamily::QuadraticX,
            region: Region::new(Interval::POSITIVE, Interval::ALL),
        }
    }

    /// Δ-family with its default region: t > 0 for Δ = 0, the component
    /// x > ρ, t > ρ for Δ = ρ² > 0, and the whole plane for Δ < 0.
    pub fn delta(delta: f64) -> WaveSpeed {
        let region = if delta > 0.0 {
            DeltaComponent::default().region(delta.sqrt())
        } else if delta == 0.0 {
            Region::new(Interval::ALL, Interval::POSITIVE)
        } else {
            Region::ALL
        };
        WaveSpeed {
            family: SpeedFamily::Delta { delta },
            region,
        }
    }

    /// Δ = ρ² > 0 restricted to one connected component.
    pub fn delta_component(delta: f64, component: DeltaComponent) -> WaveSpeed {
        let mut s = WaveSpeed::delta(delta);
        if delta > 0.0 {
            s.region = component.region(delta.sqrt());
        }
        s
    }

    /// `t^p · base(x)` on the base's x-region and t > 0.
    pub fn time_power(p: Ratio, base: WaveSpeed) -> WaveSpeed {
        WaveSpeed {
            region: Region::new(base.region.first, Interval::POSITIVE),
            family: SpeedFamily::TimePower {
                p,
                base: Box::new(base.family),
            },
        }
    }

    pub fn profile(cx: Expression) -> WaveSpeed {
        WaveSpeed {
            family: SpeedFamily::Profile { cx },
            region: Region::ALL,
        }
    }

    /// Parses an x-only profile.
    pub fn profile_str(src: &str) -> Result<WaveSpeed, SpeedError> {
        Expression::parse(src, &["x"])
            .map(WaveSpeed::profile)
            .map_err(|e| SpeedError::Invalid(e.to_string()))
    }

    pub fn general(cxt: Expression) -> WaveSpeed {
        WaveSpeed {
            family: SpeedFamily::GeneralExpr { cxt },
            region: Region::ALL,
        }
    }

    /// Recognizes c = x², the Δ-family and x-only profiles; anything else
    /// is kept as a general expression.
    pub fn from_expression(c: Expression) -> WaveSpeed {
        match classify(&c) {
            Classification::QuadraticX => WaveSpeed::quadratic_x(),
            Classification::Delta(d) => WaveSpeed::delta(d),
            Classification::Profile => WaveSpeed::profile(Expression::from_node(c.root().clone(), &["x"])),
            Classification::General => WaveSpeed::general(c),
        }
    }

    pub fn with_region(mut self, region: Region) -> WaveSpeed {
        self.region = region;
        self
    }

    /// Jet of `c(x, t)`.
    pub fn evaluate(&self, x: Jet2, t: Jet2) -> Result<Jet2, EvalError> {
        if !self.region.contains(x.value(), t.value()) {
            return Err(EvalError::OutsideRegion {
                x: x.value(),
                t: t.value(),
                region: self.region.to_string(),
            });
        }
        self.family.eval_raw(x, t)
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        Ok(self.evaluate(Jet2::constant(x), Jet2::constant(t))?.value())
    }

    /// The defining expression of `c` over `x` and `t`.
    pub fn defining_expression(&self) -> Expression {
        Expression::parse(&self.family.formula(), &["x", "t"]).expect("speed formulas are well formed")
    }
}

impl fmt::Display for WaveSpeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [c = {}]", self.family.name(), self.family.formula())
    }
}

// JSON form: {"family": "...", params..., "region": {...}}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
enum FamilyRepr {
    QuadraticX,
    Delta { delta: f64 },
    TimePower { p: String, base: Box<FamilyRepr> },
    Profile { c: String },
    General { c: String },
}

#[derive(Serialize, Deserialize)]
struct SpeedRepr {
    #[serde(flatten)]
    family: FamilyRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    region: Option<Region>,
}

impl From<&SpeedFamily> for FamilyRepr {
    fn from(f: &SpeedFamily) -> FamilyRepr {
        match f {
            SpeedFamily::QuadraticX => FamilyRepr::QuadraticX,
            SpeedFamily::Delta { delta } => FamilyRepr::Delta { delta: *delta },
            SpeedFamily::TimePower { p, base } => FamilyRepr::TimePower {
                p: p.to_string(),
                base: Box::new(base.as_ref().into()),
            },
            SpeedFamily::Profile { cx } => FamilyRepr::Profile { c: cx.render() },
            SpeedFamily::GeneralExpr { cxt } => FamilyRepr::General { c: cxt.render() },
        }
    }
}

impl TryFrom<FamilyRepr> for WaveSpeed {
    type Error = SpeedError;
    fn try_from(r: FamilyRepr) -> Result<WaveSpeed, SpeedError> {
        let parse = |c: &str, vars: &[&str]| Expression::parse(c, vars).map_err(|e| SpeedError::Invalid(e.to_string()));
        Ok(match r {
            FamilyRepr::QuadraticX => WaveSpeed::quadratic_x(),
            FamilyRepr::Delta { delta } => WaveSpeed::delta(delta),
            FamilyRepr::TimePower { p, base } => {
                let base = WaveSpeed::try_from(*base)?;
                if base.family.x_profile().is_none() {
                    return Err(SpeedError::Invalid("time-power base must be x-only".into()));
                }
                WaveSpeed::time_power(p.parse()?, base)
            }
            FamilyRepr::Profile { c } => WaveSpeed::profile(parse(&c, &["x"])?),
            FamilyRepr::General { c } => WaveSpeed::general(parse(&c, &["x", "t"])?),
        })
    }
}

impl Serialize for WaveSpeed {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SpeedRepr {
            family: (&self.family).into(),
            region: Some(self.region),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for WaveSpeed {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<WaveSpeed, D::Error> {
        let repr = SpeedRepr::deserialize(d)?;
        let mut speed = WaveSpeed::try_from(repr.family).map_err(serde::de::Error::custom)?;
        if let Some(region) = repr.region {
            speed.region = region;
        }
        Ok(speed)
    }
}

/// Fixed classification sample coordinates.
const CLASSIFY_X: [f64; 7] = [3.1, -3.1, 1.7, -1.7, 0.4, -0.4, 5.3];
const CLASSIFY_T: [f64; 7] = [2.9, -2.9, 1.3, -1.3, 0.6, -0.6, 4.7];
const CLASSIFY_TOL: f64 = 1e-9;
const SINGULAR_GAP: f64 = 1e-3;

/// Decides numerically whether `c ≡ (x² − Δ)/(t² − Δ)` and returns Δ.
///
/// Δ is fitted from the sample with the best-conditioned linear relation
/// `c·(t² − Δ) = x² − Δ`, then checked at every sample away from the lines
/// `x = ±√Δ`, `t = ±√Δ`.
pub fn classify_delta(c: &Expression) -> Option<f64> {
    let samples: Vec<(f64, f64, Option<f64>)> = CLASSIFY_X
        .iter()
        .flat_map(|&x| CLASSIFY_T.iter().map(move |&t| (x, t)))
        .map(|(x, t)| {
            let v = c.eval2(x, t).ok().filter(|v| v.is_finite());
            (x, t, v)
        })
        .collect();

    let (fx, ft, fc) = samples
        .iter()
        .filter_map(|&(x, t, v)| v.map(|v| (x, t, v)))
        .max_by(|a, b| (1.0 - a.2).abs().total_cmp(&(1.0 - b.2).abs()))?;
    if (1.0 - fc).abs() < 1e-6 {
        return None;
    }
    let delta = snap((fx * fx - fc * ft * ft) / (1.0 - fc));

    let near_singular = |v: f64| delta >= 0.0 && (v.abs() - delta.sqrt()).abs() < SINGULAR_GAP;
    for &(x, t, v) in &samples {
        if near_singular(x) || near_singular(t) {
            continue;
        }
        let v = v?;
        let model = (x * x - delta) / (t * t - delta);
        let scale = v.abs().max(model.abs()).max(1.0);
        if (v - model).abs() > CLASSIFY_TOL * scale {
            return None;
        }
    }
    Some(delta)
}

/// Rounds to 12 significant digits so that exact inputs come back exact.
fn snap(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let s = format!("{v:.11e}");
    let r: f64 = s.parse().unwrap_or(v);
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Speed family report for an arbitrary `c(x, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    QuadraticX,
    Delta(f64),
    Profile,
    General,
}

/// Broader classification used by the CLI: the Δ-family first, then the
/// c = x² case, then x-only profiles.
pub fn classify(c: &Expression) -> Classification {
    if let Some(d) = classify_delta(c) {
        return Classification::Delta(d);
    }
    if c.used_vars().iter().any(|v| v == "t") {
        return Classification::General;
    }
    let quadratic = CLASSIFY_X.iter().all(|&x| match c.eval2(x, 1.0) {
        Ok(v) => (v - x * x).abs() <= CLASSIFY_TOL * (x * x).max(1.0),
        Err(_) => false,
    });
    if quadratic {
        Classification::QuadraticX
    } else {
        Classification::Profile
    }
}

fn neg_recip_x() -> Node {
    Node::Neg(Box::new(Node::Bin(
        BinOp::Div,
        Box::new(Node::Num(1.0)),
        Box::new(Node::Var("x".into())),
    )))
}

/// `x² · c(−1/x)` as an expression.
fn kelvin_profile(cx: &Expression) -> Expression {
    let sub = cx.substitute("x", &neg_recip_x());
    let x2 = Node::Bin(BinOp::Pow, Box::new(Node::Var("x".into())), Box::new(Node::Num(2.0)));
    Expression::from_node(
        Node::Bin(BinOp::Mul, Box::new(x2), Box::new(sub.root().clone())),
        &["x"],
    )
}

/// Wave speed of the equation a mapping produces from `speed`.
///
/// M1 → x²c(−1/x), M2 → t⁻²c(x), M3 → x²t⁻²c(−1/x), N1 → t^(−4/3)c(x),
/// N2 → t^(−2/3)c(x); C1 and C2 act on c = x² only.
pub fn transformed_speed(speed: &WaveSpeed, mapping: MappingId) -> Result<WaveSpeed, SpeedError> {
    let mismatch = |reason| SpeedError::Mismatch {
        mapping,
        speed: speed.to_string(),
        reason,
    };
    let time_power = |p: Ratio, base: WaveSpeed| WaveSpeed::time_power(p, base);
    let base_of = |s: &WaveSpeed| -> WaveSpeed {
        match s.family {
            SpeedFamily::QuadraticX => s.clone(),
            _ => WaveSpeed::profile(s.family.x_profile().expect("checked x-only")),
        }
    };
    match mapping {
        MappingId::Q | MappingId::D0 | MappingId::DPos | MappingId::DNeg => {
            Err(SpeedError::CharacteristicTarget(mapping))
        }
        MappingId::C1 | MappingId::C2 => {
            if speed.family != SpeedFamily::QuadraticX {
                return Err(mismatch("composite mappings start from c = x²"));
            }
            let p = if mapping == MappingId::C1 {
                Ratio::new(-4, 3)
            } else {
                Ratio::new(-2, 3)
            };
            Ok(time_power(p, speed.clone()))
        }
        _ => {
            let Some(cx) = speed.family.x_profile() else {
                return Err(mismatch("requires an x-only wave speed c(x)"));
            };
            Ok(match mapping {
                MappingId::M1 => WaveSpeed::profile(kelvin_profile(&cx)),
                MappingId::M2 => time_power(Ratio::new(-2, 1), base_of(speed)),
                MappingId::M3 => time_power(Ratio::new(-2, 1), WaveSpeed::profile(kelvin_profile(&cx))),
                MappingId::N1 => time_power(Ratio::new(-4, 3), base_of(speed)),
                MappingId::N2 => time_power(Ratio::new(-2, 3), base_of(speed)),
                _ => unreachable!(),
            })
        }
    }
}
