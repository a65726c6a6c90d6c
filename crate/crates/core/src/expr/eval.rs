use std::collections::HashMap;

use thiserror::Error;

use super::simplify::{apply_func, rational_pow};
use super::{Expr, Func, Node, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("{kind} in `{expr}`")]
    Domain { kind: DomainKind, expr: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    DivisionByZero,
    LogOfNonPositive,
    SqrtOfNegative,
    PowerOutOfDomain,
    NonFinite,
}

impl std::fmt::Display for DomainKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::LogOfNonPositive => "logarithm of a non-positive value",
            DomainKind::SqrtOfNegative => "square root of a negative value",
            DomainKind::PowerOutOfDomain => "power outside the real domain",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

fn domain(kind: DomainKind, e: &Expr) -> EvalError {
    EvalError::Domain {
        kind,
        expr: e.to_string(),
    }
}

/// Variable name to value map. Lookups of missing names are errors, never
/// a silent zero.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding(HashMap<String, f64>);

impl Binding {
    pub fn new() -> Binding {
        Binding::default()
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Binding {
        Binding(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    pub fn set(&mut self, name: &str, value: f64) -> &mut Binding {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn with(mut self, name: &str, value: f64) -> Binding {
        self.0.insert(name.to_string(), value);
        self
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }
}

fn apply_checked(f: Func, x: f64, e: &Expr) -> Result<f64, EvalError> {
    match f {
        Func::Ln if x <= 0.0 => Err(domain(DomainKind::LogOfNonPositive, e)),
        Func::Sqrt if x < 0.0 => Err(domain(DomainKind::SqrtOfNegative, e)),
        _ => Ok(apply_func(f, x)),
    }
}

fn pow_checked(base: f64, r: Rational, e: &Expr) -> Result<f64, EvalError> {
    let v = rational_pow(base, r);
    if v.is_nan() {
        Err(domain(DomainKind::PowerOutOfDomain, e))
    } else {
        Ok(v)
    }
}

fn div_checked(a: f64, b: f64, e: &Expr) -> Result<f64, EvalError> {
    if b == 0.0 {
        Err(domain(DomainKind::DivisionByZero, e))
    } else {
        Ok(a / b)
    }
}

pub(super) fn eval(e: &Expr, b: &Binding) -> Result<f64, EvalError> {
    let v = match e.kind() {
        Node::Const(c) => *c,
        Node::Var(name) => b
            .get(name)
            .ok_or_else(|| EvalError::Unbound(name.to_string()))?,
        Node::Neg(a) => -eval(a, b)?,
        Node::Func(f, a) => apply_checked(*f, eval(a, b)?, e)?,
        Node::Add(x, y) => eval(x, b)? + eval(y, b)?,
        Node::Sub(x, y) => eval(x, b)? - eval(y, b)?,
        Node::Mul(x, y) => eval(x, b)? * eval(y, b)?,
        Node::Div(x, y) => div_checked(eval(x, b)?, eval(y, b)?, e)?,
        Node::Pow(x, r) => pow_checked(eval(x, b)?, *r, e)?,
    };
    Ok(v)
}

#[derive(Debug, Clone)]
enum Slot {
    Const(f64),
    Var(usize),
    Neg(Box<Slot>),
    Func(Func, Box<Slot>),
    Add(Box<Slot>, Box<Slot>),
    Sub(Box<Slot>, Box<Slot>),
    Mul(Box<Slot>, Box<Slot>),
    Div(Box<Slot>, Box<Slot>),
    Pow(Box<Slot>, Rational),
}

/// An expression with variables resolved to positions in a value slice.
/// Used for grid sweeps where the same expression is evaluated many times.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    root: Slot,
    source: Expr,
    slots: Vec<String>,
}

impl CompiledExpr {
    pub(super) fn new(e: &Expr, slots: &[&str]) -> Result<CompiledExpr, EvalError> {
        Ok(CompiledExpr {
            root: lower(e, slots)?,
            source: e.clone(),
            slots: slots.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        match run(&self.root, values) {
            Some(v) => Ok(v),
            // Re-walk the symbolic tree to name the failing subexpression.
            None => {
                let mut b = Binding::new();
                for (name, v) in self.slots.iter().zip(values) {
                    b.set(name, *v);
                }
                match eval(&self.source, &b) {
                    Err(err) => Err(err),
                    Ok(_) => Err(domain(DomainKind::NonFinite, &self.source)),
                }
            }
        }
    }

    pub fn expr(&self) -> &Expr {
        &self.source
    }
}

fn lower(e: &Expr, slots: &[&str]) -> Result<Slot, EvalError> {
    let b = |x: &Expr| lower(x, slots).map(Box::new);
    Ok(match e.kind() {
        Node::Const(c) => Slot::Const(*c),
        Node::Var(name) => Slot::Var(
            slots
                .iter()
                .position(|s| *s == &**name)
                .ok_or_else(|| EvalError::Unbound(name.to_string()))?,
        ),
        Node::Neg(a) => Slot::Neg(b(a)?),
        Node::Func(f, a) => Slot::Func(*f, b(a)?),
        Node::Add(x, y) => Slot::Add(b(x)?, b(y)?),
        Node::Sub(x, y) => Slot::Sub(b(x)?, b(y)?),
        Node::Mul(x, y) => Slot::Mul(b(x)?, b(y)?),
        Node::Div(x, y) => Slot::Div(b(x)?, b(y)?),
        Node::Pow(x, r) => Slot::Pow(b(x)?, *r),
    })
}

// None signals a domain violation; the caller recovers the details.
fn run(s: &Slot, v: &[f64]) -> Option<f64> {
    Some(match s {
        Slot::Const(c) => *c,
        Slot::Var(i) => v[*i],
        Slot::Neg(a) => -run(a, v)?,
        Slot::Func(f, a) => {
            let x = run(a, v)?;
            match f {
                Func::Ln if x <= 0.0 => return None,
                Func::Sqrt if x < 0.0 => return None,
                _ => apply_func(*f, x),
            }
        }
        Slot::Add(a, b) => run(a, v)? + run(b, v)?,
        Slot::Sub(a, b) => run(a, v)? - run(b, v)?,
        Slot::Mul(a, b) => run(a, v)? * run(b, v)?,
        Slot::Div(a, b) => {
            let d = run(b, v)?;
            if d == 0.0 {
                return None;
            }
            run(a, v)? / d
        }
        Slot::Pow(a, r) => {
            let p = rational_pow(run(a, v)?, *r);
            if p.is_nan() {
                return None;
            }
            p
        }
    })
}
