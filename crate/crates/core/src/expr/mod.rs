//! Arithmetic expressions over named variables, evaluated on jets.
//!
//! User-supplied functions (the `F`, `G` of a general solution, wave-speed
//! profiles, initial data) are written in a small language and evaluated on
//! [`Jet1`] or [`Jet2`] arguments, which yields exact derivatives up to
//! order three.

pub mod jet;
mod parser;

use std::fmt;

use thiserror::Error;

pub use jet::{compose_univariate, Jet1, Jet2, JetScalar, MAX_ORDER};
pub use parser::{ParseError, ParseErrorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Atan,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "atan" => Func::Atan,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Atan => "atan",
        }
    }
}

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(String),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

const PREC_NEG: u8 = 3;
const PREC_ATOM: u8 = 5;

impl Node {
    fn precedence(&self) -> u8 {
        match self {
            Node::Num(v) if v.is_sign_negative() => PREC_NEG,
            Node::Num(_) | Node::Var(_) | Node::Call(..) => PREC_ATOM,
            Node::Neg(_) => PREC_NEG,
            Node::Bin(op, ..) => op.precedence(),
        }
    }

    /// Constant value of a variable-free subtree.
    fn constant_value(&self) -> Option<f64> {
        match self {
            Node::Num(v) => Some(*v),
            Node::Var(_) => None,
            Node::Neg(e) => e.constant_value().map(|v| -v),
            Node::Bin(op, l, r) => {
                let (a, b) = (l.constant_value()?, r.constant_value()?);
                Some(match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                })
            }
            Node::Call(..) => {
                let v: Result<f64, EvalError> = self.eval(&|_: &str| None::<f64>);
                v.ok()
            }
        }
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Node::Num(_) => {}
            Node::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Node::Neg(e) | Node::Call(_, e) => e.collect_vars(out),
            Node::Bin(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    fn substitute(&self, var: &str, with: &Node) -> Node {
        match self {
            Node::Var(v) if v == var => with.clone(),
            Node::Num(_) | Node::Var(_) => self.clone(),
            Node::Neg(e) => Node::Neg(Box::new(e.substitute(var, with))),
            Node::Call(f, e) => Node::Call(*f, Box::new(e.substitute(var, with))),
            Node::Bin(op, l, r) => Node::Bin(
                *op,
                Box::new(l.substitute(var, with)),
                Box::new(r.substitute(var, with)),
            ),
        }
    }

    fn eval<J: JetScalar>(&self, bind: &dyn Fn(&str) -> Option<J>) -> Result<J, EvalError> {
        let out = match self {
            Node::Num(v) => J::constant(*v),
            Node::Var(name) => bind(name).ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Node::Neg(e) => -e.eval(bind)?,
            Node::Bin(op, l, r) => {
                if *op == BinOp::Pow {
                    return self.eval_pow(l, r, bind);
                }
                let a = l.eval(bind)?;
                let b = r.eval(bind)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(self.domain("division by zero", b.value()));
                        }
                        a / b
                    }
                    BinOp::Pow => unreachable!(),
                }
            }
            Node::Call(f, e) => {
                let a = e.eval(bind)?;
                let v = a.value();
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Tanh => a.tanh(),
                    Func::Atan => a.atan(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(self.domain("log of non-positive value", v));
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if v <= 0.0 {
                            return Err(self.domain("sqrt of non-positive value", v));
                        }
                        a.sqrt()
                    }
                }
            }
        };
        if !out.value().is_finite() {
            return Err(self.domain("non-finite value", out.value()));
        }
        Ok(out)
    }

    fn eval_pow<J: JetScalar>(
        &self,
        base: &Node,
        exp: &Node,
        bind: &dyn Fn(&str) -> Option<J>,
    ) -> Result<J, EvalError> {
        let a = base.eval(bind)?;
        let out = match exp.constant_value() {
            Some(p) if p.fract() == 0.0 && p.abs() <= 1024.0 => {
                if p < 0.0 && a.value() == 0.0 {
                    return Err(self.domain("negative power of zero", a.value()));
                }
                a.powi(p as i32)
            }
            Some(p) => {
                if a.value() <= 0.0 {
                    return Err(self.domain("non-integer power of non-positive base", a.value()));
                }
                a.powf(p)
            }
            None => {
                if a.value() <= 0.0 {
                    return Err(self.domain("variable power of non-positive base", a.value()));
                }
                let b = exp.eval(bind)?;
                (b * a.ln()).exp()
            }
        };
        if !out.value().is_finite() {
            return Err(self.domain("non-finite value", out.value()));
        }
        Ok(out)
    }

    fn domain(&self, reason: &'static str, value: f64) -> EvalError {
        EvalError::Domain {
            node: self.to_string(),
            reason,
            value,
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrapped(f: &mut fmt::Formatter<'_>, n: &Node, paren: bool) -> fmt::Result {
            if paren {
                write!(f, "({n})")
            } else {
                write!(f, "{n}")
            }
        }
        match self {
            Node::Num(v) => write!(f, "{v}"),
            Node::Var(name) => f.write_str(name),
            Node::Neg(e) => {
                f.write_str("-")?;
                wrapped(f, e, e.precedence() < PREC_NEG)
            }
            Node::Call(func, e) => write!(f, "{}({e})", func.name()),
            Node::Bin(op, l, r) => {
                let p = op.precedence();
                if *op == BinOp::Pow {
                    wrapped(f, l, l.precedence() <= p)?;
                    f.write_str("^")?;
                    wrapped(f, r, r.precedence() < PREC_NEG)
                } else {
                    wrapped(f, l, l.precedence() < p)?;
                    write!(f, " {} ", op.symbol())?;
                    wrapped(f, r, r.precedence() <= p)
                }
            }
        }
    }
}

/// Errors raised while evaluating an expression or a jet-evaluable function.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in `{node}`: {reason} (value {value})")]
    Domain {
        node: String,
        reason: &'static str,
        value: f64,
    },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("point ({x}, {t}) lies outside the validity region {region}")]
    OutsideRegion { x: f64, t: f64, region: String },
    #[error("{0}")]
    Singular(String),
}

/// A parsed expression together with the variables it may reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    vars: Vec<String>,
}

impl Expression {
    /// Parses `source`, accepting only the variables in `allowed_vars`.
    pub fn parse(source: &str, allowed_vars: &[&str]) -> Result<Expression, ParseError> {
        let root = parser::Parser::new(source, allowed_vars)?.parse()?;
        Ok(Expression {
            root,
            vars: allowed_vars.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn from_node(root: Node, allowed_vars: &[&str]) -> Expression {
        Expression {
            root,
            vars: allowed_vars.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Variables the expression was declared over.
    pub fn declared_vars(&self) -> &[String] {
        &self.vars
    }

    /// Variables actually referenced, in order of first appearance.
    pub fn used_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.root.collect_vars(&mut out);
        out
    }

    /// Replaces every reference to `var` by `with`.
    pub fn substitute(&self, var: &str, with: &Node) -> Expression {
        Expression {
            root: self.root.substitute(var, with),
            vars: self.vars.clone(),
        }
    }

    pub fn render(&self) -> String {
        self.root.to_string()
    }

    /// Evaluates with a caller-supplied variable binding.
    pub fn eval_with<J: JetScalar>(&self, bind: &dyn Fn(&str) -> Option<J>) -> Result<J, EvalError> {
        self.root.eval(bind)
    }

    /// Evaluates a single-variable expression on a univariate jet; every
    /// variable reference is bound to `at`.
    pub fn eval_jet1(&self, at: Jet1) -> Result<Jet1, EvalError> {
        self.root.eval(&|_: &str| Some(at))
    }

    /// Evaluates an expression over `x` and `t` on bivariate jets.
    pub fn eval_jet2(&self, x: Jet2, t: Jet2) -> Result<Jet2, EvalError> {
        self.root.eval(&|name: &str| match name {
            "x" => Some(x),
            "t" => Some(t),
            _ => None,
        })
    }

    /// Plain value of a single-variable expression.
    pub fn eval1(&self, v: f64) -> Result<f64, EvalError> {
        self.root.eval(&|_: &str| Some(v))
    }

    /// Plain value of an expression over `x` and `t`.
    pub fn eval2(&self, x: f64, t: f64) -> Result<f64, EvalError> {
        self.root.eval(&|name: &str| match name {
            "x" => Some(x),
            "t" => Some(t),
            _ => None,
        })
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.root)
    }
}

impl JetScalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn order(&self) -> u8 {
        MAX_ORDER
    }
    fn scale(&self, k: f64) -> Self {
        self * k
    }
    fn apply_with_order(&self, f: [f64; 4], _f_order: u8) -> Self {
        f[0]
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn tanh(&self) -> Self {
        f64::tanh(*self)
    }
    fn atan(&self) -> Self {
        f64::atan(*self)
    }
    fn powf(&self, p: f64) -> Self {
        f64::powf(*self, p)
    }
    fn recip(&self) -> Self {
        1.0 / *self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(s: &str) -> Box<Node> {
        Box::new(Node::Var(s.into()))
    }
    fn num(v: f64) -> Box<Node> {
        Box::new(Node::Num(v))
    }

    #[test]
    fn parses_sum_of_power() {
        let e = Expression::parse("s^2+1", &["s"]).unwrap();
        let want = Node::Bin(
            BinOp::Add,
            Box::new(Node::Bin(BinOp::Pow, var("s"), num(2.0))),
            num(1.0),
        );
        assert_eq!(e.root(), &want);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = Expression::parse("-x^2", &["x"]).unwrap();
        let want = Node::Neg(Box::new(Node::Bin(BinOp::Pow, var("x"), num(2.0))));
        assert_eq!(e.root(), &want);
        assert_eq!(e.eval1(3.0).unwrap(), -9.0);
    }

    #[test]
    fn power_is_right_associative() {
        let e = Expression::parse("2^3^2", &[]).unwrap();
        assert_eq!(e.eval1(0.0).unwrap(), 512.0);
        let e = Expression::parse("2^-1", &[]).unwrap();
        assert_eq!(e.eval1(0.0).unwrap(), 0.5);
    }

    #[test]
    fn rejects_undeclared_variable() {
        let err = Expression::parse("sin(q)", &["s"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::VariableNotAllowed("q".into()));
        assert_eq!(err.offset, 4);
    }

    #[test]
    fn rejects_unknown_function_and_syntax() {
        let err = Expression::parse("foo(s)", &["s"]).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownFunction("foo".into()));
        let err = Expression::parse("s +", &["s"]).unwrap_err();
        assert_eq!(err.offset, 3);
        let err = Expression::parse("(s", &["s"]).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnexpectedEnd { .. }));
        let err = Expression::parse("s s", &["s"]).unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn rejects_unicode_minus() {
        let err = Expression::parse("1 \u{2212} s", &["s"]).unwrap_err();
        assert_eq!(err.offset, 2);
        assert_eq!(err.kind, ParseErrorKind::UnexpectedChar('\u{2212}'));
    }

    #[test]
    fn scientific_literals() {
        let e = Expression::parse("1.5e-3*s + 2E2", &["s"]).unwrap();
        assert_eq!(e.eval1(1000.0).unwrap(), 201.5);
    }

    #[test]
    fn jet1_of_square() {
        let e = Expression::parse("s^2", &["s"]).unwrap();
        let j = e.eval_jet1(Jet1::new(3.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(j.derivs(), [9.0, 6.0, 2.0, 0.0]);
    }

    #[test]
    fn jet1_of_sine_at_zero() {
        let e = Expression::parse("sin(s)", &["s"]).unwrap();
        let j = e.eval_jet1(Jet1::variable(0.0)).unwrap();
        assert_eq!(j.derivs(), [0.0, 1.0, 0.0, -1.0]);
    }

    #[test]
    fn jet2_of_product() {
        let e = Expression::parse("x*t", &["x", "t"]).unwrap();
        let (x, t) = Jet2::seeds(2.0, 5.0);
        let j = e.eval_jet2(x, t).unwrap();
        assert_eq!(j.partials(), [10.0, 5.0, 2.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn jet2_of_square() {
        let e = Expression::parse("x^2", &["x", "t"]).unwrap();
        let (x, t) = Jet2::seeds(3.0, 1.0);
        let j = e.eval_jet2(x, t).unwrap();
        assert_eq!(j.partials(), [9.0, 6.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn domain_errors_name_the_node() {
        let e = Expression::parse("1 + log(s - 2)", &["s"]).unwrap();
        match e.eval1(1.0).unwrap_err() {
            EvalError::Domain { node, .. } => assert_eq!(node, "log(s - 2)"),
            other => panic!("{other:?}"),
        }
        let e = Expression::parse("1/(s-1)", &["s"]).unwrap();
        assert!(matches!(e.eval1(1.0), Err(EvalError::Domain { .. })));
        let e = Expression::parse("sqrt(s)", &["s"]).unwrap();
        assert!(matches!(e.eval1(0.0), Err(EvalError::Domain { .. })));
        let e = Expression::parse("s^0.5", &["s"]).unwrap();
        assert!(matches!(e.eval1(-1.0), Err(EvalError::Domain { .. })));
        // integer powers accept negative bases
        let e = Expression::parse("s^-3", &["s"]).unwrap();
        assert_eq!(e.eval1(-2.0).unwrap(), -0.125);
    }

    #[test]
    fn render_is_reparseable() {
        for src in [
            "-x^2",
            "(-x)^2",
            "a - (b - c)",
            "a/(b*c)",
            "-(a + b)*c",
            "2^3^2",
            "(2^3)^2",
            "x^-2",
            "-a*b",
        ] {
            let vars = ["a", "b", "c", "x"];
            let e = Expression::parse(src, &vars).unwrap();
            let again = Expression::parse(&e.render(), &vars).unwrap();
            assert_eq!(e, again, "{src} -> {}", e.render());
        }
    }

    #[test]
    fn substitution() {
        let c = Expression::parse("x^2", &["x"]).unwrap();
        let inv = Expression::parse("-1/x", &["x"]).unwrap();
        let sub = c.substitute("x", inv.root());
        assert_eq!(sub.render(), "(-1 / x)^2");
        assert_eq!(sub.eval1(0.5).unwrap(), 4.0);
    }
}
