//! Scalar expression DSL: parsing, evaluation and exact differentiation.
//!
//! Every smooth coefficient function in the crate (Christoffel symbols,
//! sections, gauge field entries, curves, action generators) is an [`Expr`]
//! over named variables. Differentiation is forward-mode over dual numbers,
//! never finite differences, so partials are exact to machine precision.

mod parse;
pub mod scalar;

pub use parse::{parse_expr, ParseError};
pub use scalar::{Dual, Scalar, D1, D2, D3, D4};

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// Immutable expression tree over named real variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Unary(UnaryOp, Arc<Expr>),
    Binary(BinaryOp, Arc<Expr>, Arc<Expr>),
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("domain error: {op} of {arg} in `{node}`")]
    Domain { op: &'static str, arg: f64, node: String },
}

/// Variable bindings for evaluation.
#[derive(Debug, Clone, Default)]
pub struct VarEnv {
    vals: HashMap<String, f64>,
}

impl VarEnv {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, name: &str, value: f64) -> Self {
        self.vals.insert(name.to_string(), value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.vals.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.vals.get(name).copied()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        let mut env = Self::new();
        for (k, v) in pairs {
            env.set(k, v);
        }
        env
    }
}

impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    fn unary(op: UnaryOp, e: Expr) -> Expr {
        Expr::Unary(op, Arc::new(e))
    }

    fn binary(op: BinaryOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Arc::new(l), Arc::new(r))
    }

    pub fn neg(self) -> Expr {
        Expr::unary(UnaryOp::Neg, self)
    }
    pub fn sin(self) -> Expr {
        Expr::unary(UnaryOp::Sin, self)
    }
    pub fn cos(self) -> Expr {
        Expr::unary(UnaryOp::Cos, self)
    }
    pub fn pow(self, e: Expr) -> Expr {
        Expr::binary(BinaryOp::Pow, self, e)
    }

    /// Variables referenced by the tree, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                if !out.iter().any(|o| o == v) {
                    out.push(v.clone());
                }
            }
            Expr::Unary(_, e) => e.collect_vars(out),
            Expr::Binary(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    /// Replace every occurrence of `name` by `repl`.
    pub fn subst(&self, name: &str, repl: &Expr) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => {
                if v == name {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            Expr::Unary(op, e) => Expr::Unary(*op, Arc::new(e.subst(name, repl))),
            Expr::Binary(op, l, r) => Expr::Binary(
                *op,
                Arc::new(l.subst(name, repl)),
                Arc::new(r.subst(name, repl)),
            ),
        }
    }

    /// Rename variables according to `map`.
    pub fn rename(&self, map: &HashMap<String, String>) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(v) => match map.get(v) {
                Some(n) => Expr::Var(n.clone()),
                None => self.clone(),
            },
            Expr::Unary(op, e) => Expr::Unary(*op, Arc::new(e.rename(map))),
            Expr::Binary(op, l, r) => {
                Expr::Binary(*op, Arc::new(l.rename(map)), Arc::new(r.rename(map)))
            }
        }
    }

    /// Evaluate over any [`Scalar`] type; `lookup` resolves variable values.
    pub fn eval_scalar<T: Scalar>(
        &self,
        lookup: &impl Fn(&str) -> Option<T>,
    ) -> Result<T, EvalError> {
        match self {
            Expr::Const(c) => Ok(T::from_f64(*c)),
            Expr::Var(v) => lookup(v).ok_or_else(|| EvalError::UnboundVariable(v.clone())),
            Expr::Unary(op, e) => {
                let x = e.eval_scalar(lookup)?;
                match op {
                    UnaryOp::Neg => Ok(-x),
                    UnaryOp::Sin => Ok(x.sin()),
                    UnaryOp::Cos => Ok(x.cos()),
                    UnaryOp::Tan => {
                        if x.val().cos() == 0.0 {
                            return Err(EvalError::Domain {
                                op: "tan",
                                arg: x.val(),
                                node: self.to_string(),
                            });
                        }
                        Ok(x.tan())
                    }
                    UnaryOp::Exp => Ok(x.exp()),
                    UnaryOp::Log => {
                        if x.val() <= 0.0 {
                            return Err(EvalError::Domain {
                                op: "log",
                                arg: x.val(),
                                node: self.to_string(),
                            });
                        }
                        Ok(x.ln())
                    }
                    UnaryOp::Sqrt => {
                        if x.val() < 0.0 {
                            return Err(EvalError::Domain {
                                op: "sqrt",
                                arg: x.val(),
                                node: self.to_string(),
                            });
                        }
                        Ok(x.sqrt())
                    }
                }
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval_scalar(lookup)?;
                match op {
                    BinaryOp::Add => Ok(a + r.eval_scalar(lookup)?),
                    BinaryOp::Sub => Ok(a - r.eval_scalar(lookup)?),
                    BinaryOp::Mul => Ok(a * r.eval_scalar(lookup)?),
                    BinaryOp::Div => {
                        let b = r.eval_scalar(lookup)?;
                        if b.val() == 0.0 {
                            return Err(EvalError::DivisionByZero(self.to_string()));
                        }
                        Ok(a / b)
                    }
                    BinaryOp::Pow => {
                        // Constant integer exponents go through powi so that
                        // negative bases stay inside the domain.
                        if let Expr::Const(c) = **r {
                            if c.fract() == 0.0 && c.abs() <= 1e9 {
                                let n = c as i64;
                                if a.val() == 0.0 && n < 0 {
                                    return Err(EvalError::DivisionByZero(self.to_string()));
                                }
                                return Ok(a.powi(n));
                            }
                        }
                        let b = r.eval_scalar(lookup)?;
                        if a.val() <= 0.0 {
                            return Err(EvalError::Domain {
                                op: "pow",
                                arg: a.val(),
                                node: self.to_string(),
                            });
                        }
                        Ok(a.powf(b))
                    }
                }
            }
        }
    }

    /// Evaluate with variables bound by position: `vals[i]` binds `vars[i]`.
    pub fn eval_slice<T: Scalar>(&self, vars: &[String], vals: &[T]) -> Result<T, EvalError> {
        self.eval_scalar(&|name| {
            vars.iter()
                .position(|v| v == name)
                .map(|i| vals[i])
        })
    }

    pub fn eval(&self, env: &VarEnv) -> Result<f64, EvalError> {
        self.eval_scalar(&|name| env.get(name))
    }

    /// Exact partial derivative with respect to `var` at `env`.
    pub fn partial(&self, var: &str, env: &VarEnv) -> Result<f64, EvalError> {
        let d = self.eval_scalar(&|name| {
            env.get(name).map(|v| {
                if name == var {
                    Dual::seeded(v)
                } else {
                    Dual::constant(v)
                }
            })
        })?;
        Ok(d.eps)
    }

    /// Componentwise partials with respect to `vars`.
    pub fn grad(&self, vars: &[&str], env: &VarEnv) -> Result<Vec<f64>, EvalError> {
        vars.iter().map(|v| self.partial(v, env)).collect()
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Add, self, r)
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Sub, self, r)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Mul, self, r)
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, r: Expr) -> Expr {
        Expr::binary(BinaryOp::Div, self, r)
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Const(_) | Expr::Var(_) => 4,
        Expr::Unary(UnaryOp::Neg, _) => 1,
        Expr::Unary(_, _) => 4,
        Expr::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => 0,
        Expr::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => 2,
        Expr::Binary(BinaryOp::Pow, _, _) => 3,
    }
}

fn fmt_child(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, e) => {
                write!(f, "-")?;
                fmt_child(f, e, 2)
            }
            Expr::Unary(op, e) => {
                let name = match op {
                    UnaryOp::Sin => "sin",
                    UnaryOp::Cos => "cos",
                    UnaryOp::Tan => "tan",
                    UnaryOp::Exp => "exp",
                    UnaryOp::Log => "log",
                    UnaryOp::Sqrt => "sqrt",
                    UnaryOp::Neg => unreachable!(),
                };
                write!(f, "{name}({e})")
            }
            Expr::Binary(op, l, r) => {
                let (sym, lp, rp) = match op {
                    BinaryOp::Add => ("+", 0, 0),
                    BinaryOp::Sub => ("-", 0, 1),
                    BinaryOp::Mul => ("*", 2, 2),
                    BinaryOp::Div => ("/", 2, 3),
                    BinaryOp::Pow => ("^", 4, 3),
                };
                fmt_child(f, l, lp)?;
                write!(f, "{sym}")?;
                fmt_child(f, r, rp)
            }
        }
    }
}
