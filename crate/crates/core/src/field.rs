//! Functions of two coordinates that can be evaluated on jets.

use std::sync::Arc;

use crate::expr::{EvalError, Expression, Jet2, JetScalar};

/// A function of two independent coordinates evaluated on [`Jet2`] seeds.
///
/// The seeds may themselves be jets of other coordinates, which is how
/// changes of variables are pushed through.
pub trait JetField: Send + Sync {
    fn eval(&self, p: Jet2, q: Jet2) -> Result<Jet2, EvalError>;

    /// Jet at `(p, q)` with identity seeds.
    fn jet_at(&self, p: f64, q: f64) -> Result<Jet2, EvalError> {
        self.eval(Jet2::var_x(p), Jet2::var_t(q))
    }

    fn value_at(&self, p: f64, q: f64) -> Result<f64, EvalError> {
        Ok(self.eval(Jet2::constant(p), Jet2::constant(q))?.value())
    }
}

pub type SharedField = Arc<dyn JetField>;

impl<F> JetField for F
where
    F: Fn(Jet2, Jet2) -> Result<Jet2, EvalError> + Send + Sync,
{
    fn eval(&self, p: Jet2, q: Jet2) -> Result<Jet2, EvalError> {
        self(p, q)
    }
}

/// Wraps a closure as a [`SharedField`].
pub fn field<F>(f: F) -> SharedField
where
    F: Fn(Jet2, Jet2) -> Result<Jet2, EvalError> + Send + Sync + 'static,
{
    Arc::new(f)
}

/// An expression over `x` and `t` viewed as a field.
#[derive(Debug, Clone)]
pub struct ExprField(pub Expression);

impl JetField for ExprField {
    fn eval(&self, p: Jet2, q: Jet2) -> Result<Jet2, EvalError> {
        self.0.eval_jet2(p, q)
    }
}

/// `a + λ·b`.
pub fn combine(a: SharedField, lambda: f64, b: SharedField) -> SharedField {
    field(move |p, q| Ok(a.eval(p, q)? + b.eval(p, q)?.scale(lambda)))
}
