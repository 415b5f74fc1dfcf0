//! Initial value problem for `u_tt / x⁴ = u_xx` solved by recovering the
//! profiles F, G of `u = x·(F(1/x + t) + G(1/x − t))` from `u(x, t₀)` and
//! `u_t(x, t₀)`.

use serde::Serialize;
use thiserror::Error;

use crate::expr::{compose_univariate, EvalError, Expression, Jet1, Jet2, JetScalar};
use crate::field::JetField;

pub const DEFAULT_SAMPLES: usize = 512;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IvpError {
    #[error("data interval must satisfy 0 < a < b (got a = {a}, b = {b})")]
    Interval { a: f64, b: f64 },
    #[error("sample grid must be strictly increasing with at least 4 points")]
    Grid,
    #[error("phi, psi and x samples differ in length ({0}, {1}, {2})")]
    Length(usize, usize, usize),
    #[error("non-finite initial data at x = {0}")]
    NonFinite(f64),
    #[error("({x}, {t}) lies outside the domain of determinacy")]
    OutsideDeterminacy { x: f64, t: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Natural cubic spline through `(xs[i], ys[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    /// Requires strictly increasing `xs` with at least 3 points.
    pub fn natural(xs: Vec<f64>, ys: Vec<f64>) -> CubicSpline {
        let n = xs.len();
        assert!(n >= 3 && ys.len() == n);
        // Thomas algorithm for the interior second derivatives.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            let rhs = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
            let diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
            c[i] = h1 / diag;
            d[i] = (rhs - h0 * d[i - 1]) / diag;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        CubicSpline { xs, ys, m }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value and first three derivatives at `v`; `None` outside the knots.
    pub fn derivs(&self, v: f64) -> Option<[f64; 4]> {
        let (lo, hi) = self.range();
        if !(v >= lo && v <= hi) {
            return None;
        }
        let n = self.xs.len();
        let i = self.xs.partition_point(|&k| k <= v).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let (a, b) = (self.xs[i + 1] - v, v - self.xs[i]);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let f =
            (m0 * a * a * a + m1 * b * b * b) / (6.0 * h) + (y0 / h - m0 * h / 6.0) * a + (y1 / h - m1 * h / 6.0) * b;
        let f1 = (-m0 * a * a + m1 * b * b) / (2.0 * h) - (y0 / h - m0 * h / 6.0) + (y1 / h - m1 * h / 6.0);
        let f2 = (m0 * a + m1 * b) / h;
        let f3 = (m1 - m0) / h;
        Some([f, f1, f2, f3])
    }

    pub fn eval(&self, v: f64) -> Option<f64> {
        self.derivs(v).map(|d| d[0])
    }
}

/// Running trapezoid integral of `ys` over `xs`, starting at 0.
pub fn cumulative_trapezoid(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = 0.0;
    out.push(acc);
    for i in 1..xs.len() {
        acc += 0.5 * (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]);
        out.push(acc);
    }
    out
}

/// `u(x, t₀) = φ(x)` and `u_t(x, t₀) = ψ(x)` sampled on `0 < x₀ < … < xₙ`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    pub xs: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub t0: f64,
}

impl InitialData {
    pub fn from_samples(xs: Vec<f64>, phi: Vec<f64>, psi: Vec<f64>, t0: f64) -> Result<InitialData, IvpError> {
        let data = InitialData { xs, phi, psi, t0 };
        data.validate()?;
        Ok(data)
    }

    /// Samples expressions in `x` on `n` uniform points over `[a, b]`.
    pub fn from_expressions(
        phi: &Expression,
        psi: &Expression,
        a: f64,
        b: f64,
        t0: f64,
        n: usize,
    ) -> Result<InitialData, IvpError> {
        if !(a > 0.0 && a < b) {
            return Err(IvpError::Interval { a, b });
        }
        if n < 4 {
            return Err(IvpError::Grid);
        }
        let xs: Vec<f64> = (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect();
        let sample = |e: &Expression| xs.iter().map(|&x| e.eval1(x)).collect::<Result<Vec<_>, _>>();
        let phi = sample(phi)?;
        let psi = sample(psi)?;
        InitialData::from_samples(xs, phi, psi, t0)
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    pub fn validate(&self) -> Result<(), IvpError> {
        let (n, np, ns) = (self.xs.len(), self.phi.len(), self.psi.len());
        if n != np || n != ns {
            return Err(IvpError::Length(n, np, ns));
        }
        if n < 4 || self.xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(IvpError::Grid);
        }
        let (a, b) = self.interval();
        if !(a > 0.0) || !b.is_finite() {
            return Err(IvpError::Interval { a, b });
        }
        for i in 0..n {
            if !self.phi[i].is_finite() || !self.psi[i].is_finite() {
                return Err(IvpError::NonFinite(self.xs[i]));
            }
        }
        if !self.t0.is_finite() {
            return Err(IvpError::NonFinite(f64::NAN));
        }
        Ok(())
    }
}

/// Recovered profiles, stored in the shifted variable `s = 1/x`:
/// `F(σ) = f(σ − t₀)` and `G(σ) = g(σ + t₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicSolution {
    f: CubicSpline,
    g: CubicSpline,
    pub t0: f64,
}

/// Bounds of the domain of determinacy: `s_min ≤ 1/x ± (t − t₀) ≤ s_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Determinacy {
    pub s_min: f64,
    pub s_max: f64,
    pub t0: f64,
}

impl Determinacy {
    pub fn contains(&self, x: f64, t: f64) -> bool {
        if !(x > 0.0) {
            return false;
        }
        let s = 1.0 / x;
        let dt = t - self.t0;
        let inside = |v: f64| v >= self.s_min && v <= self.s_max;
        inside(s + dt) && inside(s - dt)
    }
}

impl CharacteristicSolution {
    pub fn determinacy(&self) -> Determinacy {
        let (s_min, s_max) = self.f.range();
        Determinacy {
            s_min,
            s_max,
            t0: self.t0,
        }
    }

    pub fn contains(&self, x: f64, t: f64) -> bool {
        self.determinacy().contains(x, t)
    }

    /// `F(σ)`; `None` outside the recovered interval.
    pub fn f_profile(&self, sigma: f64) -> Option<f64> {
        self.f.eval(sigma - self.t0)
    }

    pub fn g_profile(&self, sigma: f64) -> Option<f64> {
        self.g.eval(sigma + self.t0)
    }

    pub fn value(&self, x: f64, t: f64) -> Result<f64, IvpError> {
        Ok(self
            .eval(Jet2::constant(x), Jet2::constant(t))
            .map_err(|e| match e {
                EvalError::OutsideRegion { x, t, .. } => IvpError::OutsideDeterminacy { x, t },
                other => IvpError::Eval(other),
            })?
            .value())
    }
}

impl JetField for CharacteristicSolution {
    fn eval(&self, x: Jet2, t: Jet2) -> Result<Jet2, EvalError> {
        let (x0, t0) = (x.value(), t.value());
        let outside = || EvalError::OutsideRegion {
            x: x0,
            t: t0,
            region: "domain of determinacy".into(),
        };
        if !self.contains(x0, t0) {
            return Err(outside());
        }
        let s = x.recip();
        let a = s + t.offset(-self.t0);
        let b = s - t.offset(-self.t0);
        let fa = self.f.derivs(a.value()).ok_or_else(outside)?;
        let gb = self.g.derivs(b.value()).ok_or_else(outside)?;
        let fa = compose_univariate(&Jet1::with_order(fa, 3), &a);
        let gb = compose_univariate(&Jet1::with_order(gb, 3), &b);
        Ok(x * (fa + gb))
    }
}

/// Recovers F, G with the integration constant of `D` set to 0.
pub fn solve_ivp_quadratic(data: &InitialData) -> Result<CharacteristicSolution, IvpError> {
    solve_ivp_quadratic_with_constant(data, 0.0)
}

/// As [`solve_ivp_quadratic`] with `D(s_min) = constant`; `u` does not
/// depend on the choice.
pub fn solve_ivp_quadratic_with_constant(
    data: &InitialData,
    constant: f64,
) -> Result<CharacteristicSolution, IvpError> {
    data.validate()?;
    // s = 1/x ascending
    let s: Vec<f64> = data.xs.iter().rev().map(|&x| 1.0 / x).collect();
    let phi: Vec<f64> = data.phi.iter().rev().copied().collect();
    let psi: Vec<f64> = data.psi.iter().rev().copied().collect();
    let p: Vec<f64> = s.iter().zip(&phi).map(|(s, f)| s * f).collect();
    let integrand: Vec<f64> = s.iter().zip(&psi).map(|(s, g)| s * g).collect();
    let d: Vec<f64> = cumulative_trapezoid(&s, &integrand)
        .into_iter()
        .map(|v| v + constant)
        .collect();
    let f_half: Vec<f64> = p.iter().zip(&d).map(|(p, d)| 0.5 * (p + d)).collect();
    let g_half: Vec<f64> = p.iter().zip(&d).map(|(p, d)| 0.5 * (p - d)).collect();
    Ok(CharacteristicSolution {
        f: CubicSpline::natural(s.clone(), f_half),
        g: CubicSpline::natural(s, g_half),
        t0: data.t0,
    })
}
