//! Linear wave equations `u_tt / c(x, t)^2 = u_xx` with variable speed:
//! closed-form solution families, point and nonlocal mappings between
//! equations, an initial value solver for `c = x^2`, a finite-difference
//! reference solver and a verification harness.

// `!(a < b)` rejects NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod domain;
pub mod expr;
pub mod fdsolve;
pub mod field;
pub mod ivp;
pub mod mappings;
pub mod solutions;
pub mod speeds;
pub mod verify;
