//! Scalar expression trees over named real variables.
//!
//! Every field in the crate (positions, jet components, forces, stresses,
//! potentials) is an [`Expr`]. Expressions are immutable and cheap to clone;
//! subtrees are shared through `Arc`, so they can be handed to worker threads
//! freely.
//!
//! Operations provided here:
//!
//! * parsing from the formula grammar ([`Expr::parse`]),
//! * exact symbolic differentiation ([`Expr::diff`]),
//! * conservative simplification ([`Expr::simplify`]),
//! * numeric evaluation against a [`Binding`] or a compiled slot layout,
//! * rendering back to a reparseable string (`Display`).

mod eval;
mod parse;
mod simplify;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops;
use std::sync::Arc;

pub use eval::{Binding, CompiledExpr, EvalError};
pub use parse::ParseError;

/// Elementary functions understood by the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// A reduced fraction `num/den` with `den > 0`, used as the only allowed
/// kind of exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "zero denominator");
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()) as i64;
        let sign = if den < 0 { -1 } else { 1 };
        Rational {
            num: sign * num / g,
            den: sign * den / g,
        }
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Best rational with denominator at most `max_den`, if `value` is that
    /// rational to within `1e-9`.
    pub fn approximate(value: f64, max_den: i64) -> Option<Rational> {
        if !value.is_finite() {
            return None;
        }
        (1..=max_den).find_map(|den| {
            let scaled = value * den as f64;
            let rounded = scaled.round();
            if (scaled - rounded).abs() < 1e-9 && rounded.abs() < i64::MAX as f64 {
                Some(Rational::new(rounded as i64, den))
            } else {
                None
            }
        })
    }

    fn sub_one(self) -> Rational {
        Rational::new(self.num - self.den, self.den)
    }

    fn mul(self, other: Rational) -> Rational {
        Rational::new(self.num * other.num, self.den * other.den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

#[derive(Debug, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var(Arc<str>),
    Neg(Expr),
    Func(Func, Expr),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, Rational),
}

/// Immutable scalar expression.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    fn node(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub(crate) fn kind(&self) -> &Node {
        &self.0
    }

    pub fn constant(value: f64) -> Expr {
        Expr::node(Node::Const(value))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(name: &str) -> Expr {
        Expr::node(Node::Var(Arc::from(name)))
    }

    /// Parse a formula string.
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        parse::parse(src)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self.kind() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    // Raw constructors build exactly the requested node; the parser uses
    // them so that parsed trees mirror the source text.

    pub(crate) fn raw_neg(a: Expr) -> Expr {
        Expr::node(Node::Neg(a))
    }
    pub(crate) fn raw_func(f: Func, a: Expr) -> Expr {
        Expr::node(Node::Func(f, a))
    }
    pub(crate) fn raw_add(a: Expr, b: Expr) -> Expr {
        Expr::node(Node::Add(a, b))
    }
    pub(crate) fn raw_sub(a: Expr, b: Expr) -> Expr {
        Expr::node(Node::Sub(a, b))
    }
    pub(crate) fn raw_mul(a: Expr, b: Expr) -> Expr {
        Expr::node(Node::Mul(a, b))
    }
    pub(crate) fn raw_div(a: Expr, b: Expr) -> Expr {
        Expr::node(Node::Div(a, b))
    }
    pub(crate) fn raw_pow(a: Expr, r: Rational) -> Expr {
        Expr::node(Node::Pow(a, r))
    }

    pub fn sin(&self) -> Expr {
        simplify::func(Func::Sin, self.clone())
    }
    pub fn cos(&self) -> Expr {
        simplify::func(Func::Cos, self.clone())
    }
    pub fn exp(&self) -> Expr {
        simplify::func(Func::Exp, self.clone())
    }
    pub fn ln(&self) -> Expr {
        simplify::func(Func::Ln, self.clone())
    }
    pub fn sqrt(&self) -> Expr {
        simplify::func(Func::Sqrt, self.clone())
    }

    pub fn powi(&self, n: i64) -> Expr {
        simplify::pow(self.clone(), Rational::integer(n))
    }

    pub fn pow(&self, r: Rational) -> Expr {
        simplify::pow(self.clone(), r)
    }

    /// Sum of an iterator of expressions (zero when empty).
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms
            .into_iter()
            .fold(Expr::zero(), |acc, t| simplify::add(acc, t))
    }

    /// Conservative simplification: constant folding, 0/1 identities and
    /// constant collection. Never changes the value where it is defined.
    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    /// Exact partial derivative with respect to `var`.
    pub fn diff(&self, var: &str) -> Expr {
        if !self.contains_var(var) {
            return Expr::zero();
        }
        match self.kind() {
            Node::Const(_) => Expr::zero(),
            Node::Var(name) => {
                if &**name == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Neg(a) => -a.diff(var),
            Node::Func(f, a) => {
                let da = a.diff(var);
                let outer = match f {
                    Func::Sin => a.cos(),
                    Func::Cos => -a.sin(),
                    Func::Exp => a.exp(),
                    Func::Ln => return da / a.clone(),
                    Func::Sqrt => return da / (Expr::constant(2.0) * a.sqrt()),
                };
                outer * da
            }
            Node::Add(a, b) => a.diff(var) + b.diff(var),
            Node::Sub(a, b) => a.diff(var) - b.diff(var),
            Node::Mul(a, b) => a.diff(var) * b.clone() + a.clone() * b.diff(var),
            Node::Div(a, b) => {
                let num = a.diff(var) * b.clone() - a.clone() * b.diff(var);
                num / b.powi(2)
            }
            Node::Pow(a, r) => {
                Expr::constant(r.to_f64()) * a.pow(r.sub_one()) * a.diff(var)
            }
        }
    }

    /// Repeated partial derivative, `order` times with respect to `var`.
    pub fn diff_n(&self, var: &str, order: usize) -> Expr {
        (0..order).fold(self.clone(), |e, _| e.diff(var))
    }

    pub fn contains_var(&self, var: &str) -> bool {
        match self.kind() {
            Node::Const(_) => false,
            Node::Var(name) => &**name == var,
            Node::Neg(a) | Node::Func(_, a) | Node::Pow(a, _) => a.contains_var(var),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.contains_var(var) || b.contains_var(var)
            }
        }
    }

    /// Names of all variables occurring in the expression.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self.kind() {
            Node::Const(_) => {}
            Node::Var(name) => {
                out.insert(name.to_string());
            }
            Node::Neg(a) | Node::Func(_, a) | Node::Pow(a, _) => a.collect_vars(out),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replace variables by expressions, simplifying while rebuilding.
    pub fn substitute(&self, map: &HashMap<String, Expr>) -> Expr {
        match self.kind() {
            Node::Const(_) => self.clone(),
            Node::Var(name) => map.get(&**name).cloned().unwrap_or_else(|| self.clone()),
            Node::Neg(a) => -a.substitute(map),
            Node::Func(f, a) => simplify::func(*f, a.substitute(map)),
            Node::Add(a, b) => a.substitute(map) + b.substitute(map),
            Node::Sub(a, b) => a.substitute(map) - b.substitute(map),
            Node::Mul(a, b) => a.substitute(map) * b.substitute(map),
            Node::Div(a, b) => a.substitute(map) / b.substitute(map),
            Node::Pow(a, r) => simplify::pow(a.substitute(map), *r),
        }
    }

    /// Evaluate against a binding of variable names to values.
    pub fn eval(&self, binding: &Binding) -> Result<f64, EvalError> {
        eval::eval(self, binding)
    }

    /// Resolve variable names to slot indices for repeated evaluation.
    pub fn compile(&self, slots: &[&str]) -> Result<CompiledExpr, EvalError> {
        CompiledExpr::new(self, slots)
    }

    /// Number of nodes in the tree (shared subtrees counted each time).
    pub fn size(&self) -> usize {
        match self.kind() {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Neg(a) | Node::Func(_, a) | Node::Pow(a, _) => 1 + a.size(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
        }
    }
}

impl From<f64> for Expr {
    fn from(value: f64) -> Expr {
        Expr::constant(value)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $fn:path) => {
        impl ops::$trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $fn(self, rhs)
            }
        }
        impl ops::$trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $fn(self.clone(), rhs.clone())
            }
        }
        impl ops::$trait<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $fn(self, Expr::constant(rhs))
            }
        }
        impl ops::$trait<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $fn(Expr::constant(self), rhs)
            }
        }
        impl ops::$trait<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $fn(Expr::constant(self), rhs.clone())
            }
        }
        impl ops::$trait<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $fn(self.clone(), Expr::constant(rhs))
            }
        }
        impl ops::$trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $fn(self, rhs.clone())
            }
        }
        impl ops::$trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $fn(self.clone(), rhs)
            }
        }
    };
}

binop!(Add, add, simplify::add);
binop!(Sub, sub, simplify::sub);
binop!(Mul, mul, simplify::mul);
binop!(Div, div, simplify::div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        simplify::neg(self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        simplify::neg(self.clone())
    }
}

// Rendering. Precedence levels: 1 additive, 2 multiplicative, 3 unary minus,
// 4 power, 5 atoms.

fn precedence(e: &Expr) -> u8 {
    match e.kind() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => 3,
        Node::Pow(..) => 4,
        Node::Const(_) | Node::Var(_) | Node::Func(..) => 5,
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, min: u8) -> fmt::Result {
    if precedence(child) < min {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind() {
            Node::Const(c) => {
                if c.is_finite() {
                    write!(f, "{c}")
                } else {
                    // not reachable from parsed input; kept printable
                    write!(f, "({c})")
                }
            }
            Node::Var(name) => write!(f, "{name}"),
            Node::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, 3)
            }
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
            Node::Add(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " + ")?;
                write_child(f, b, 2)
            }
            Node::Sub(a, b) => {
                write_child(f, a, 1)?;
                write!(f, " - ")?;
                write_child(f, b, 2)
            }
            Node::Mul(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "*")?;
                write_child(f, b, 3)
            }
            Node::Div(a, b) => {
                write_child(f, a, 2)?;
                write!(f, "/")?;
                write_child(f, b, 3)
            }
            Node::Pow(a, r) => {
                write_child(f, a, 5)?;
                if r.is_integer() && r.num() >= 0 {
                    write!(f, "^{}", r.num())
                } else {
                    write!(f, "^({r})")
                }
            }
        }
    }
}
