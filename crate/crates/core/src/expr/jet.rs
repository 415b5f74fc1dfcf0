//! Truncated Taylor arithmetic in one and two variables.
//!
//! Both jet types carry derivatives up to order three together with the
//! highest order that is actually known. Differentiating a jet drops one
//! order; entries above the known order read back as NaN.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Highest derivative order carried by [`Jet1`] and [`Jet2`].
pub const MAX_ORDER: u8 = 3;

/// Operations shared by the univariate and bivariate jets.
///
/// Elementary functions are applied through [`JetScalar::apply`], which
/// composes the jet with a univariate function given by its value and first
/// three derivatives at the jet's value.
pub trait JetScalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(&self) -> f64;
    fn order(&self) -> u8;
    fn scale(&self, k: f64) -> Self;
    /// Composes `f ∘ self` where `f` holds `(f, f', f'', f''')` at `self.value()`
    /// and is known up to `f_order`.
    fn apply_with_order(&self, f: [f64; 4], f_order: u8) -> Self;

    fn apply(&self, f: [f64; 4]) -> Self {
        self.apply_with_order(f, MAX_ORDER)
    }
    fn offset(&self, c: f64) -> Self {
        *self + Self::constant(c)
    }
    fn recip(&self) -> Self {
        let v = self.value();
        let r = 1.0 / v;
        self.apply([r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }
    fn sin(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.apply([s, c, -s, -c])
    }
    fn cos(&self) -> Self {
        let (s, c) = self.value().sin_cos();
        self.apply([c, -s, -c, s])
    }
    fn tan(&self) -> Self {
        let y = self.value().tan();
        let d1 = 1.0 + y * y;
        self.apply([y, d1, 2.0 * y * d1, (2.0 + 6.0 * y * y) * d1])
    }
    fn exp(&self) -> Self {
        let e = self.value().exp();
        self.apply([e, e, e, e])
    }
    fn ln(&self) -> Self {
        let v = self.value();
        self.apply([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }
    /// `log|v|`, defined for either sign of `v`.
    fn ln_abs(&self) -> Self {
        let v = self.value();
        self.apply([v.abs().ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }
    fn sqrt(&self) -> Self {
        self.powf(0.5)
    }
    fn tanh(&self) -> Self {
        let y = self.value().tanh();
        let s = 1.0 - y * y;
        self.apply([y, s, -2.0 * y * s, -2.0 * s * (1.0 - 3.0 * y * y)])
    }
    fn atan(&self) -> Self {
        let v = self.value();
        let q = 1.0 + v * v;
        self.apply([v.atan(), 1.0 / q, -2.0 * v / (q * q), (6.0 * v * v - 2.0) / (q * q * q)])
    }
    /// Real power `v^p`; only meaningful for `v > 0` unless `p` is integral.
    fn powf(&self, p: f64) -> Self {
        let v = self.value();
        self.apply([
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * v.powf(p - 3.0),
        ])
    }
    /// Integer power by repeated multiplication, valid for negative bases.
    fn powi(&self, n: i32) -> Self {
        if n == 0 {
            return Self::constant(1.0);
        }
        let mut acc = *self;
        for _ in 1..n.unsigned_abs() {
            acc = acc * *self;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }
}

/// Value and first three derivatives of a univariate function at a point.
///
/// Fields are the plain derivatives `f, f', f'', f'''`, not Taylor
/// coefficients.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet1 {
    d: [f64; 4],
    order: u8,
}

impl Jet1 {
    pub fn new(c0: f64, c1: f64, c2: f64, c3: f64) -> Self {
        Jet1 {
            d: [c0, c1, c2, c3],
            order: MAX_ORDER,
        }
    }

    /// Identity seed at `v`: `(v, 1, 0, 0)`.
    pub fn variable(v: f64) -> Self {
        Jet1::new(v, 1.0, 0.0, 0.0)
    }

    pub fn with_order(d: [f64; 4], order: u8) -> Self {
        Jet1 {
            d,
            order: order.min(MAX_ORDER),
        }
        .truncated()
    }

    /// Derivative `k` (0 ≤ k ≤ 3); NaN above the known order.
    pub fn get(&self, k: usize) -> f64 {
        if k as u8 > self.order {
            f64::NAN
        } else {
            self.d[k]
        }
    }

    pub fn c0(&self) -> f64 {
        self.get(0)
    }
    pub fn c1(&self) -> f64 {
        self.get(1)
    }
    pub fn c2(&self) -> f64 {
        self.get(2)
    }
    pub fn c3(&self) -> f64 {
        self.get(3)
    }

    pub fn derivs(&self) -> [f64; 4] {
        [self.get(0), self.get(1), self.get(2), self.get(3)]
    }

    /// The jet of `f'`, known to one order less.
    pub fn derivative(&self) -> Jet1 {
        if self.order == 0 {
            return Jet1 {
                d: [f64::NAN, 0.0, 0.0, 0.0],
                order: 0,
            };
        }
        Jet1::with_order([self.d[1], self.d[2], self.d[3], 0.0], self.order - 1)
    }

    fn truncated(mut self) -> Self {
        for k in (self.order as usize + 1)..4 {
            self.d[k] = 0.0;
        }
        self
    }
}

impl fmt::Debug for Jet1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet1{:?}", &self.d[..=self.order as usize])
    }
}

impl JetScalar for Jet1 {
    fn constant(v: f64) -> Self {
        Jet1::new(v, 0.0, 0.0, 0.0)
    }
    fn value(&self) -> f64 {
        self.d[0]
    }
    fn order(&self) -> u8 {
        self.order
    }
    fn scale(&self, k: f64) -> Self {
        Jet1 {
            d: self.d.map(|c| c * k),
            order: self.order,
        }
    }
    fn apply_with_order(&self, f: [f64; 4], f_order: u8) -> Self {
        // Faà di Bruno to third order.
        let [_, g1, g2, g3] = self.d;
        Jet1::with_order(
            [
                f[0],
                f[1] * g1,
                f[2] * g1 * g1 + f[1] * g2,
                f[3] * g1 * g1 * g1 + 3.0 * f[2] * g1 * g2 + f[1] * g3,
            ],
            self.order.min(f_order),
        )
    }
}

impl Add for Jet1 {
    type Output = Jet1;
    fn add(self, o: Jet1) -> Jet1 {
        Jet1::with_order(
            [
                self.d[0] + o.d[0],
                self.d[1] + o.d[1],
                self.d[2] + o.d[2],
                self.d[3] + o.d[3],
            ],
            self.order.min(o.order),
        )
    }
}

impl Sub for Jet1 {
    type Output = Jet1;
    fn sub(self, o: Jet1) -> Jet1 {
        self + (-o)
    }
}

impl Neg for Jet1 {
    type Output = Jet1;
    fn neg(self) -> Jet1 {
        self.scale(-1.0)
    }
}

impl Mul for Jet1 {
    type Output = Jet1;
    fn mul(self, o: Jet1) -> Jet1 {
        let (a, b) = (self.d, o.d);
        Jet1::with_order(
            [
                a[0] * b[0],
                a[1] * b[0] + a[0] * b[1],
                a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
                a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
            ],
            self.order.min(o.order),
        )
    }
}

impl Div for Jet1 {
    type Output = Jet1;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet1) -> Jet1 {
        self * o.recip()
    }
}

const N2: usize = 10;

/// Exponent pairs `(i, j)` of the Taylor monomials `dx^i dt^j`, by index.
const POWERS: [(u8, u8); N2] = [
    (0, 0),
    (1, 0),
    (0, 1),
    (2, 0),
    (1, 1),
    (0, 2),
    (3, 0),
    (2, 1),
    (1, 2),
    (0, 3),
];

const fn index_of(i: usize, j: usize) -> usize {
    let deg = i + j;
    deg * (deg + 1) / 2 + j
}

const fn factorial(n: usize) -> f64 {
    match n {
        0 | 1 => 1.0,
        2 => 2.0,
        _ => 6.0,
    }
}

const PRODUCT_TERMS: usize = 35;

/// `(p, q, r)`: coefficient `p` of the left factor times coefficient `q` of
/// the right factor contributes to coefficient `r` of the product.
const PRODUCT: [(u8, u8, u8); PRODUCT_TERMS] = {
    let mut table = [(0u8, 0u8, 0u8); PRODUCT_TERMS];
    let mut n = 0;
    let mut p = 0;
    while p < N2 {
        let mut q = 0;
        while q < N2 {
            let i = (POWERS[p].0 + POWERS[q].0) as usize;
            let j = (POWERS[p].1 + POWERS[q].1) as usize;
            if i + j <= MAX_ORDER as usize {
                table[n] = (p as u8, q as u8, index_of(i, j) as u8);
                n += 1;
            }
            q += 1;
        }
        p += 1;
    }
    table
};

/// Partial derivatives of a function of two variables `(x, t)` at a point,
/// up to total order three.
///
/// Stored internally as Taylor coefficients; the accessors return partial
/// derivatives. Mixed partials are stored once.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet2 {
    a: [f64; N2],
    order: u8,
}

impl Jet2 {
    /// Seed for the first coordinate at `x0`.
    pub fn var_x(x0: f64) -> Self {
        let mut a = [0.0; N2];
        a[0] = x0;
        a[1] = 1.0;
        Jet2 { a, order: MAX_ORDER }
    }

    /// Seed for the second coordinate at `t0`.
    pub fn var_t(t0: f64) -> Self {
        let mut a = [0.0; N2];
        a[0] = t0;
        a[2] = 1.0;
        Jet2 { a, order: MAX_ORDER }
    }

    /// Identity seeds at `(x0, t0)`.
    pub fn seeds(x0: f64, t0: f64) -> (Jet2, Jet2) {
        (Jet2::var_x(x0), Jet2::var_t(t0))
    }

    /// Builds a jet from partials in the order
    /// `f, f_x, f_t, f_xx, f_xt, f_tt, f_xxx, f_xxt, f_xtt, f_ttt`.
    pub fn from_partials(p: [f64; N2]) -> Self {
        let mut a = [0.0; N2];
        for (k, &(i, j)) in POWERS.iter().enumerate() {
            a[k] = p[k] / (factorial(i as usize) * factorial(j as usize));
        }
        Jet2 { a, order: MAX_ORDER }
    }

    /// Partial derivative `∂^{i+j} f / ∂x^i ∂t^j`; NaN above the known order.
    pub fn partial(&self, i: usize, j: usize) -> f64 {
        if i + j > self.order as usize {
            return f64::NAN;
        }
        self.a[index_of(i, j)] * factorial(i) * factorial(j)
    }

    /// All ten partials in the order used by [`Jet2::from_partials`].
    pub fn partials(&self) -> [f64; N2] {
        let mut out = [0.0; N2];
        for (k, &(i, j)) in POWERS.iter().enumerate() {
            out[k] = self.partial(i as usize, j as usize);
        }
        out
    }

    pub fn f(&self) -> f64 {
        self.a[0]
    }
    pub fn f_x(&self) -> f64 {
        self.partial(1, 0)
    }
    pub fn f_t(&self) -> f64 {
        self.partial(0, 1)
    }
    pub fn f_xx(&self) -> f64 {
        self.partial(2, 0)
    }
    pub fn f_xt(&self) -> f64 {
        self.partial(1, 1)
    }
    pub fn f_tt(&self) -> f64 {
        self.partial(0, 2)
    }
    pub fn f_xxx(&self) -> f64 {
        self.partial(3, 0)
    }
    pub fn f_xxt(&self) -> f64 {
        self.partial(2, 1)
    }
    pub fn f_xtt(&self) -> f64 {
        self.partial(1, 2)
    }
    pub fn f_ttt(&self) -> f64 {
        self.partial(0, 3)
    }

    fn with_order(mut a: [f64; N2], order: u8) -> Self {
        for (k, &(i, j)) in POWERS.iter().enumerate() {
            if i + j > order {
                a[k] = 0.0;
            }
        }
        Jet2 { a, order }
    }

    /// Restricts the jet to derivatives of at most `order`.
    pub fn truncate(&self, order: u8) -> Self {
        Jet2::with_order(self.a, self.order.min(order))
    }

    /// `∂f/∂x`, known to one order less.
    pub fn diff_x(&self) -> Jet2 {
        self.diff(true)
    }

    /// `∂f/∂t`, known to one order less.
    pub fn diff_t(&self) -> Jet2 {
        self.diff(false)
    }

    fn diff(&self, along_x: bool) -> Jet2 {
        if self.order == 0 {
            let mut a = [0.0; N2];
            a[0] = f64::NAN;
            return Jet2 { a, order: 0 };
        }
        let mut a = [0.0; N2];
        for (k, &(i, j)) in POWERS.iter().enumerate() {
            if i + j >= self.order {
                continue;
            }
            let (i, j) = (i as usize, j as usize);
            a[k] = if along_x {
                (i + 1) as f64 * self.a[index_of(i + 1, j)]
            } else {
                (j + 1) as f64 * self.a[index_of(i, j + 1)]
            };
        }
        Jet2::with_order(a, self.order - 1)
    }

    /// Reads this jet as a Taylor polynomial about `(x.value(), t.value())`
    /// and substitutes the seeds `x`, `t` into it (multivariate chain rule).
    pub fn substitute(&self, x: &Jet2, t: &Jet2) -> Jet2 {
        let mut dx = *x;
        dx.a[0] = 0.0;
        let mut dt = *t;
        dt.a[0] = 0.0;
        let order = self.order.min(x.order).min(t.order);
        let one = Jet2::constant(1.0);
        let dx_pow = [one, dx, dx * dx, dx * dx * dx];
        let dt_pow = [one, dt, dt * dt, dt * dt * dt];
        let mut acc = Jet2::constant(0.0);
        for (k, &(i, j)) in POWERS.iter().enumerate() {
            if i + j > self.order || self.a[k] == 0.0 {
                continue;
            }
            acc = acc + (dx_pow[i as usize] * dt_pow[j as usize]).scale(self.a[k]);
        }
        acc.truncate(order)
    }
}

impl fmt::Debug for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet2(order {}) {:?}", self.order, self.partials())
    }
}

/// Composes a univariate derivative tuple with a bivariate jet:
/// the jet of `f(θ(x, t))` given `f, f', f'', f'''` at `θ.value()`.
pub fn compose_univariate(f: &Jet1, theta: &Jet2) -> Jet2 {
    theta.apply_with_order(f.d, f.order)
}

impl JetScalar for Jet2 {
    fn constant(v: f64) -> Self {
        let mut a = [0.0; N2];
        a[0] = v;
        Jet2 { a, order: MAX_ORDER }
    }
    fn value(&self) -> f64 {
        self.a[0]
    }
    fn order(&self) -> u8 {
        self.order
    }
    fn scale(&self, k: f64) -> Self {
        Jet2 {
            a: self.a.map(|c| c * k),
            order: self.order,
        }
    }
    fn apply_with_order(&self, f: [f64; 4], f_order: u8) -> Self {
        let mut d = *self;
        d.a[0] = 0.0;
        let d2 = d * d;
        let d3 = d2 * d;
        let mut a = [0.0; N2];
        for (k, ak) in a.iter_mut().enumerate() {
            *ak = f[1] * d.a[k] + f[2] / 2.0 * d2.a[k] + f[3] / 6.0 * d3.a[k];
        }
        a[0] = f[0];
        Jet2::with_order(a, self.order.min(f_order))
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let mut a = self.a;
        for (x, y) in a.iter_mut().zip(o.a) {
            *x += y;
        }
        Jet2::with_order(a, self.order.min(o.order))
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        let mut a = self.a;
        for (x, y) in a.iter_mut().zip(o.a) {
            *x -= y;
        }
        Jet2::with_order(a, self.order.min(o.order))
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let mut a = [0.0; N2];
        for &(p, q, r) in PRODUCT.iter() {
            a[r as usize] += self.a[p as usize] * o.a[q as usize];
        }
        Jet2::with_order(a, self.order.min(o.order))
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet2) -> Jet2 {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    #[test]
    fn product_table_is_complete() {
        let n = PRODUCT.iter().filter(|t| t.2 == 9).count();
        // (0,3) receives (0,0)x(0,3), (0,1)x(0,2), (0,2)x(0,1), (0,3)x(0,0)
        assert_eq!(n, 4);
    }

    #[test]
    fn jet1_cube_matches_monomial_derivatives() {
        let x = Jet1::variable(2.0);
        let y = x * x * x;
        assert_eq!(y.derivs(), [8.0, 12.0, 12.0, 6.0]);
    }

    #[test]
    fn jet1_derivative_drops_an_order() {
        let y = Jet1::variable(0.3).sin();
        let dy = y.derivative();
        assert_eq!(dy.order(), 2);
        assert!(close(dy.c0(), 0.3f64.cos(), 1e-15));
        assert!(dy.c3().is_nan());
    }

    #[test]
    fn jet2_polynomial_partials() {
        let (x, t) = Jet2::seeds(2.0, 5.0);
        let f = x * x * t;
        let p = f.partials();
        // f = x^2 t at (2,5)
        assert_eq!(p, [20.0, 20.0, 4.0, 10.0, 4.0, 0.0, 0.0, 2.0, 0.0, 0.0]);
    }

    #[test]
    fn from_partials_round_trips() {
        let p = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(Jet2::from_partials(p).partials(), p);
    }

    #[test]
    fn diff_t_of_product() {
        let (x, t) = Jet2::seeds(1.5, 0.5);
        let f = x * t * t * t;
        let g = f.diff_t();
        assert_eq!(g.order(), 2);
        assert!(close(g.f(), 3.0 * 1.5 * 0.25, 1e-15));
        assert!(close(g.f_t(), 6.0 * 1.5 * 0.5, 1e-15));
        assert!(close(g.f_xt(), 6.0 * 0.5, 1e-15));
        assert!(g.f_ttt().is_nan());
    }

    #[test]
    fn substitute_is_chain_rule() {
        // g(x, t) = x t expanded at (2, 3); substitute x = X^2, t = T
        let (x, t) = Jet2::seeds(2.0, 3.0);
        let g = x * t;
        let (bx, bt) = Jet2::seeds(2f64.sqrt(), 3.0);
        let h = g.substitute(&(bx * bx), &bt);
        let direct = bx * bx * bt;
        for (a, b) in h.partials().iter().zip(direct.partials()) {
            assert!(close(*a, b, 1e-14));
        }
    }

    #[test]
    fn identity_composition_returns_theta() {
        let (x, t) = Jet2::seeds(0.7, -1.2);
        let theta = x * x.sin() + t;
        let id = Jet1::new(theta.value(), 1.0, 0.0, 0.0);
        assert_eq!(compose_univariate(&id, &theta), theta);
    }

    #[test]
    fn composition_of_sine_on_sum() {
        let (x, t) = Jet2::seeds(0.4, 0.9);
        let theta = x + t;
        let v = theta.value();
        let f = Jet1::new(v.sin(), v.cos(), -v.sin(), -v.cos());
        let h = compose_univariate(&f, &theta);
        assert!(close(h.f_xt(), -(1.3f64).sin(), 1e-15));
    }

    #[test]
    fn powi_negative_base() {
        let x = Jet1::variable(-2.0);
        assert_eq!(x.powi(3).derivs(), [-8.0, 12.0, -12.0, 6.0]);
        let r = x.powi(-1);
        assert!(close(r.c1(), -0.25, 1e-15));
    }
}
