//! Closed-form general solutions built from two user-supplied profiles F, G.

use std::fmt;

use serde::Serialize;

use crate::domain::{Interval, Region};
use crate::expr::{compose_univariate, EvalError, Expression, Jet1, Jet2, JetScalar, ParseError};
use crate::field::JetField;
use crate::speeds::{Band, DeltaComponent, Ratio, WaveSpeed};

/// Two profiles F(s), G(s).
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionPair {
    pub f: Expression,
    pub g: Expression,
}

impl SolutionPair {
    pub fn new(f: Expression, g: Expression) -> SolutionPair {
        SolutionPair { f, g }
    }

    /// Parses both profiles as expressions in `s`.
    pub fn parse(f: &str, g: &str) -> Result<SolutionPair, ParseError> {
        Ok(SolutionPair {
            f: Expression::parse(f, &["s"])?,
            g: Expression::parse(g, &["s"])?,
        })
    }

    fn profile(e: &Expression, theta: Jet2) -> Result<Jet1, EvalError> {
        e.eval_jet1(Jet1::variable(theta.value()))
    }

    /// `F(a) + G(b)` on jets.
    fn sum(&self, a: Jet2, b: Jet2) -> Result<Jet2, EvalError> {
        let f = Self::profile(&self.f, a)?;
        let g = Self::profile(&self.g, b)?;
        Ok(compose_univariate(&f, &a) + compose_univariate(&g, &b))
    }

    /// `F(a) + G(b) + θ·(G′(b) − F′(a))`, known to second order.
    fn sum_with_slopes(&self, a: Jet2, b: Jet2, theta: Jet2) -> Result<Jet2, EvalError> {
        let f = Self::profile(&self.f, a)?;
        let g = Self::profile(&self.g, b)?;
        let slopes = compose_univariate(&g.derivative(), &b) - compose_univariate(&f.derivative(), &a);
        Ok(compose_univariate(&f, &a) + compose_univariate(&g, &b) + theta * slopes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Family {
    /// `V(ξ, η) = F(ξ) + G(η)`, solving `V_ξη = 0`.
    Const15,
    /// `u = F(x + c₀t) + G(x − c₀t)` for constant speed c₀.
    Uniform { c0: f64 },
    /// `u = x·(F(1/x + t) + G(1/x − t))` for c = x².
    Quad17,
    /// c = (x² − Δ)/(t² − Δ).
    Delta { delta: f64, component: DeltaComponent },
    /// c = T^{-4/3}·x².
    N1Gen,
    /// c = T^{-2/3}·x².
    N2Gen,
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Const15 => "CONST15",
            Family::Uniform { .. } => "UNIFORM",
            Family::Quad17 => "QUAD17",
            Family::Delta { .. } => "DELTA",
            Family::N1Gen => "N1GEN",
            Family::N2Gen => "N2GEN",
        }
    }

    /// The equation's speed; `None` for the characteristic form.
    pub fn speed(&self) -> Option<WaveSpeed> {
        Some(match *self {
            Family::Const15 => return None,
            Family::Uniform { c0 } => {
                WaveSpeed::profile(Expression::parse(&format!("{c0:?}"), &["x"]).expect("numeric literal"))
            }
            Family::Quad17 => WaveSpeed::quadratic_x(),
            Family::Delta { delta, component } => WaveSpeed::delta_component(delta, component),
            Family::N1Gen => WaveSpeed::time_power(Ratio::new(-4, 3), WaveSpeed::quadratic_x()),
            Family::N2Gen => WaveSpeed::time_power(Ratio::new(-2, 3), WaveSpeed::quadratic_x()),
        })
    }

    /// Where the closed form is valid, in the family's own coordinates.
    pub fn region(&self) -> Region {
        match *self {
            Family::Const15 | Family::Uniform { .. } => Region::ALL,
            Family::Quad17 => Region::new(Interval::POSITIVE, Interval::ALL),
            Family::Delta { delta, component } => {
                if delta > 0.0 {
                    component.region(delta.sqrt())
                } else if delta == 0.0 {
                    Region::new(Interval::POSITIVE, Interval::POSITIVE)
                } else {
                    Region::ALL
                }
            }
            Family::N1Gen | Family::N2Gen => Region::new(Interval::POSITIVE, Interval::POSITIVE),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Uniform { c0 } => write!(f, "UNIFORM(c0={c0})"),
            Family::Delta { delta, .. } => write!(f, "DELTA(delta={delta})"),
            other => f.write_str(other.tag()),
        }
    }
}

/// A family's closed form with its profiles, evaluable on jets.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSolution {
    pub family: Family,
    pub pair: SolutionPair,
}

fn nonzero(v: &Jet2, what: &str) -> Result<(), EvalError> {
    if v.value() == 0.0 {
        Err(EvalError::Singular(format!("{what} = 0")))
    } else {
        Ok(())
    }
}

impl AnalyticSolution {
    pub fn speed(&self) -> Option<WaveSpeed> {
        self.family.speed()
    }

    pub fn region(&self) -> Region {
        self.family.region()
    }
}

impl JetField for AnalyticSolution {
    fn eval(&self, x: Jet2, t: Jet2) -> Result<Jet2, EvalError> {
        let region = self.family.region();
        if !region.contains(x.value(), t.value()) {
            return Err(EvalError::OutsideRegion {
                x: x.value(),
                t: t.value(),
                region: region.to_string(),
            });
        }
        let pair = &self.pair;
        match self.family {
            Family::Const15 => pair.sum(x, t),
            Family::Uniform { c0 } => pair.sum(x + t.scale(c0), x - t.scale(c0)),
            Family::Quad17 => {
                nonzero(&x, "x")?;
                let s = x.recip();
                Ok(x * pair.sum(s + t, s - t)?)
            }
            Family::Delta { delta, .. } => {
                if delta == 0.0 {
                    nonzero(&x, "x")?;
                    nonzero(&t, "t")?;
                    let (a, b) = (x.recip(), t.recip());
                    Ok(x * t * pair.sum(a + b, a - b)?)
                } else if delta > 0.0 {
                    let rho = delta.sqrt();
                    let arg = |v: Jet2| (v.offset(-rho).ln_abs() - v.offset(rho).ln_abs()).scale(rho / 2.0);
                    let (ax, at) = (arg(x), arg(t));
                    let r2 = Jet2::constant(delta);
                    let w = (x * x - r2) * (t * t - r2);
                    let w = if w.value() < 0.0 { -w } else { w };
                    Ok(w.sqrt() * pair.sum(ax - at, ax + at)?)
                } else {
                    let rho = (-delta).sqrt();
                    let arg = |v: Jet2| v.scale(1.0 / rho).atan().scale(rho);
                    let (ax, at) = (arg(x), arg(t));
                    let r2 = Jet2::constant(-delta);
                    let w = (x * x + r2) * (t * t + r2);
                    Ok(w.sqrt() * pair.sum(ax - at, ax + at)?)
                }
            }
            Family::N1Gen => {
                nonzero(&x, "x")?;
                let theta = t.powf(-1.0 / 3.0).scale(3.0);
                let s = x.recip();
                Ok(x * t * pair.sum_with_slopes(s + theta, s - theta, theta)?)
            }
            Family::N2Gen => {
                nonzero(&x, "x")?;
                let theta = t.powf(1.0 / 3.0).scale(3.0);
                let s = x.recip();
                Ok(x * pair.sum_with_slopes(s + theta, s - theta, theta)?)
            }
        }
    }
}

/// `V(ξ, η) = F(ξ) + G(η)`.
pub fn dalembert(pair: SolutionPair) -> AnalyticSolution {
    AnalyticSolution {
        family: Family::Const15,
        pair,
    }
}

/// `u = F(x + c₀t) + G(x − c₀t)` for constant speed c₀.
pub fn uniform(pair: SolutionPair, c0: f64) -> AnalyticSolution {
    AnalyticSolution {
        family: Family::Uniform { c0 },
        pair,
    }
}

/// `u = x·(F(1/x + t) + G(1/x − t))` for c = x².
pub fn general_solution_quadratic(pair: SolutionPair) -> AnalyticSolution {
    AnalyticSolution {
        family: Family::Quad17,
        pair,
    }
}

/// General solution for c = (x² − Δ)/(t² − Δ):
///
/// - Δ = 0: `u = x·t·(F(1/x + 1/t) + G(1/x − 1/t))`
/// - Δ = ρ²: `u = |(x²−ρ²)(t²−ρ²)|^{1/2}·(F(A(x) − A(t)) + G(A(x) + A(t)))`
///   with `A(v) = (ρ/2)·ln|(v−ρ)/(v+ρ)|`, on the chosen component
/// - Δ = −ρ²: as above with `A(v) = ρ·atan(v/ρ)` and `+ρ²` in the weight
pub fn general_solution_delta(pair: SolutionPair, delta: f64, component: DeltaComponent) -> AnalyticSolution {
    AnalyticSolution {
        family: Family::Delta { delta, component },
        pair,
    }
}

/// `B = x·T·(F(a) + G(b) + θ·(G′(b) − F′(a)))`, θ = 3T^{-1/3}, a, b = 1/x ± θ.
pub fn general_solution_n1(pair: SolutionPair) -> AnalyticSolution {
    AnalyticSolution {
        family: Family::N1Gen,
        pair,
    }
}

/// `B = x·(F(a) + G(b) + θ·(G′(b) − F′(a)))`, θ = 3T^{1/3}, a, b = 1/x ± θ.
pub fn general_solution_n2(pair: SolutionPair) -> AnalyticSolution {
    AnalyticSolution {
        family: Family::N2Gen,
        pair,
    }
}

/// The closed-form family solving the equation with the given speed, if
/// one is known: c = x², constant c, the Δ-family, and `T^p·x²` for the
/// two nonlocal exponents.
pub fn solution_for_speed(speed: &WaveSpeed, pair: SolutionPair) -> Option<AnalyticSolution> {
    use crate::speeds::SpeedFamily;
    let family = match &speed.family {
        SpeedFamily::QuadraticX => Family::Quad17,
        SpeedFamily::Delta { delta } => {
            let component = if *delta > 0.0 {
                let rho = delta.sqrt();
                let band = |i: Interval| {
                    [Band::Above, Band::Inside, Band::Below]
                        .into_iter()
                        .find(|b| b.interval(rho).intersect(&i) == Some(i))
                };
                DeltaComponent {
                    x: band(speed.region.first)?,
                    t: band(speed.region.second)?,
                }
            } else {
                DeltaComponent::default()
            };
            Family::Delta {
                delta: *delta,
                component,
            }
        }
        SpeedFamily::Profile { cx } if cx.used_vars().is_empty() => Family::Uniform {
            c0: cx.eval1(0.0).ok()?,
        },
        SpeedFamily::TimePower { p, base } if **base == SpeedFamily::QuadraticX => {
            if *p == Ratio::new(-4, 3) {
                Family::N1Gen
            } else if *p == Ratio::new(-2, 3) {
                Family::N2Gen
            } else {
                return None;
            }
        }
        _ => return None,
    };
    Some(AnalyticSolution { family, pair })
}

/// Looks up a family by its tag (`CONST15`, `QUAD17`, `DELTA`, `N1GEN`,
/// `N2GEN`, `UNIFORM`); Δ and c₀ come from the caller.
pub fn family_from_tag(tag: &str, delta: f64, c0: f64, component: DeltaComponent) -> Option<Family> {
    Some(match tag.trim().to_ascii_uppercase().as_str() {
        "CONST15" | "DALEMBERT" => Family::Const15,
        "UNIFORM" => Family::Uniform { c0 },
        "QUAD17" | "QUADRATIC" => Family::Quad17,
        "DELTA" => Family::Delta { delta, component },
        "N1GEN" | "N1" => Family::N1Gen,
        "N2GEN" | "N2" => Family::N2Gen,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(f: &str, g: &str) -> SolutionPair {
        SolutionPair::parse(f, g).unwrap()
    }

    #[test]
    fn dalembert_examples() {
        let v = dalembert(pair("0", "0"));
        assert_eq!(v.value_at(0.3, -1.2).unwrap(), 0.0);
        let v = dalembert(pair("s", "-s"));
        let j = v.jet_at(2.0, 0.5).unwrap();
        assert_eq!(j.f(), 1.5);
        assert_eq!(j.f_xt(), 0.0);
    }

    #[test]
    fn quadratic_examples() {
        let u = general_solution_quadratic(pair("s/2", "s/2"));
        assert!((u.value_at(1.7, 0.4).unwrap() - 1.0).abs() < 1e-15);
        let u = general_solution_quadratic(pair("s/2", "-s/2"));
        let j = u.jet_at(1.5, 0.8).unwrap();
        assert!((j.f() - 1.2).abs() < 1e-14);
        assert!(j.f_tt().abs() < 1e-13 && j.f_xx().abs() < 1e-13);
    }

    #[test]
    fn delta_zero_examples() {
        let c = DeltaComponent::default();
        let u = general_solution_delta(pair("0", "0"), 0.0, c);
        assert_eq!(u.value_at(1.0, 2.0).unwrap(), 0.0);
        let u = general_solution_delta(pair("s/2", "s/2"), 0.0, c);
        let j = u.jet_at(1.3, 0.7).unwrap();
        assert!((j.f() - 0.7).abs() < 1e-14);
        assert!(j.f_tt().abs() < 1e-12 && j.f_xx().abs() < 1e-12);
    }

    #[test]
    fn nonlocal_families_collapse_for_linear_profiles() {
        for u in [
            general_solution_n1(pair("s", "-s")),
            general_solution_n2(pair("s", "-s")),
            general_solution_n1(pair("0", "0")),
        ] {
            for (x, tt) in [(0.9, 27.0), (1.1, 0.5), (2.0, 3.0)] {
                assert!(u.value_at(x, tt).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn regions_are_enforced() {
        let u = general_solution_quadratic(pair("s", "s"));
        assert!(matches!(u.value_at(-1.0, 0.0), Err(EvalError::OutsideRegion { .. })));
        let u = general_solution_delta(pair("s", "s"), 1.0, DeltaComponent::default());
        assert!(u.value_at(0.5, 2.0).is_err());
        let u = general_solution_n1(pair("s", "s"));
        assert!(u.value_at(1.0, 0.0).is_err());
    }

    #[test]
    fn delta_positive_matches_hand_formula() {
        // Δ = 1 at (2, 3) with F = G = 1: u = sqrt(3·8) · 2
        let u = general_solution_delta(pair("1", "1"), 1.0, DeltaComponent::default());
        assert!((u.value_at(2.0, 3.0).unwrap() - 2.0 * 24f64.sqrt()).abs() < 1e-12);
    }
}
