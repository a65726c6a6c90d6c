//! Simplifying constructors.
//!
//! Rules are local and value-preserving: fold constants when the result is
//! finite, drop additive zeros and multiplicative ones, annihilate by a
//! constant zero factor, collect constant coefficients, and move constants
//! to the left of sums and products. Nothing here factors, expands or uses
//! trigonometric identities.

use super::{Expr, Func, Node, Rational};

fn finite(v: f64) -> Option<Expr> {
    v.is_finite().then(|| Expr::constant(v))
}

pub(super) fn apply_func(f: Func, x: f64) -> f64 {
    match f {
        Func::Sin => x.sin(),
        Func::Cos => x.cos(),
        Func::Exp => x.exp(),
        Func::Ln => {
            if x > 0.0 {
                x.ln()
            } else {
                f64::NAN
            }
        }
        Func::Sqrt => {
            if x >= 0.0 {
                x.sqrt()
            } else {
                f64::NAN
            }
        }
    }
}

/// Real power with a rational exponent; odd-denominator roots of negative
/// bases are taken as real roots. Returns NaN outside the real domain.
pub(super) fn rational_pow(base: f64, r: Rational) -> f64 {
    if r.is_integer() {
        if base == 0.0 && r.num() < 0 {
            return f64::NAN;
        }
        return match i32::try_from(r.num()) {
            Ok(n) => base.powi(n),
            Err(_) => base.powf(r.num() as f64),
        };
    }
    if base == 0.0 {
        return if r.num() > 0 { 0.0 } else { f64::NAN };
    }
    if base > 0.0 {
        return base.powf(r.to_f64());
    }
    if r.den() % 2 == 0 {
        return f64::NAN;
    }
    let magnitude = (-base).powf(r.to_f64());
    if r.num() % 2 == 0 {
        magnitude
    } else {
        -magnitude
    }
}

pub(super) fn neg(a: Expr) -> Expr {
    match a.kind() {
        Node::Const(c) => Expr::constant(-c),
        Node::Neg(inner) => inner.clone(),
        Node::Mul(c, rest) if c.as_constant().is_some() => {
            mul(Expr::constant(-c.as_constant().unwrap()), rest.clone())
        }
        _ => Expr::raw_neg(a),
    }
}

pub(super) fn func(f: Func, a: Expr) -> Expr {
    if let Some(c) = a.as_constant() {
        if let Some(e) = finite(apply_func(f, c)) {
            return e;
        }
    }
    Expr::raw_func(f, a)
}

/// Split `c*x` into `(c, x)`; anything else is `(1, e)`.
fn coefficient(e: &Expr) -> (f64, Option<Expr>) {
    match e.kind() {
        Node::Const(c) => (*c, None),
        Node::Mul(c, rest) => match c.as_constant() {
            Some(k) => (k, Some(rest.clone())),
            None => (1.0, Some(e.clone())),
        },
        Node::Neg(inner) => {
            let (k, rest) = coefficient(inner);
            (-k, rest)
        }
        _ => (1.0, Some(e.clone())),
    }
}

pub(super) fn add(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return b;
    }
    if b.is_zero() {
        return a;
    }
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => {
            if let Some(e) = finite(x + y) {
                return e;
            }
        }
        // constants lead
        (None, Some(_)) => return add(b, a),
        (Some(x), None) => {
            if let Node::Add(c, rest) = b.kind() {
                if let Some(y) = c.as_constant() {
                    return add(Expr::constant(x + y), rest.clone());
                }
            }
        }
        (None, None) => {
            if let Node::Neg(nb) = b.kind() {
                return sub(a, nb.clone());
            }
            // (p - q) + q -> p
            if let Node::Sub(p, q) = a.kind() {
                if *q == b {
                    return p.clone();
                }
            }
            // c1*x + c2*x -> (c1+c2)*x
            let (ka, ra) = coefficient(&a);
            let (kb, rb) = coefficient(&b);
            if let (Some(ra), Some(rb)) = (ra, rb) {
                if ra == rb {
                    return mul(Expr::constant(ka + kb), ra);
                }
            }
        }
    }
    Expr::raw_add(a, b)
}

pub(super) fn sub(a: Expr, b: Expr) -> Expr {
    if b.is_zero() {
        return a;
    }
    if a.is_zero() {
        return neg(b);
    }
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        if let Some(e) = finite(x - y) {
            return e;
        }
    }
    if a == b {
        return Expr::zero();
    }
    // (p + q) - q -> p, (p + q) - p -> q
    if let Node::Add(p, q) = a.kind() {
        if *q == b {
            return p.clone();
        }
        if *p == b {
            return q.clone();
        }
    }
    // q - (p + q) -> -p, p - (p + q) -> -q
    if let Node::Add(p, q) = b.kind() {
        if *q == a {
            return neg(p.clone());
        }
        if *p == a {
            return neg(q.clone());
        }
    }
    if let Node::Neg(nb) = b.kind() {
        return add(a, nb.clone());
    }
    if let Some(y) = b.as_constant() {
        return add(Expr::constant(-y), a);
    }
    let (ka, ra) = coefficient(&a);
    let (kb, rb) = coefficient(&b);
    if let (Some(ra), Some(rb)) = (ra, rb) {
        if ra == rb {
            return mul(Expr::constant(ka - kb), ra);
        }
    }
    Expr::raw_sub(a, b)
}

pub(super) fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::zero();
    }
    if a.is_one() {
        return b;
    }
    if b.is_one() {
        return a;
    }
    match (a.as_constant(), b.as_constant()) {
        (Some(x), Some(y)) => {
            if let Some(e) = finite(x * y) {
                return e;
            }
        }
        (None, Some(_)) => return mul(b, a),
        (Some(x), None) => {
            if x == -1.0 {
                return neg(b);
            }
            match b.kind() {
                Node::Mul(c, rest) => {
                    if let Some(y) = c.as_constant() {
                        return mul(Expr::constant(x * y), rest.clone());
                    }
                }
                Node::Neg(inner) => return mul(Expr::constant(-x), inner.clone()),
                _ => {}
            }
        }
        (None, None) => {
            // pull constant coefficients to the front
            if let Node::Mul(c, rest) = a.kind() {
                if let Some(k) = c.as_constant() {
                    return mul(Expr::constant(k), mul(rest.clone(), b));
                }
            }
            if let Node::Mul(c, rest) = b.kind() {
                if let Some(k) = c.as_constant() {
                    return mul(Expr::constant(k), mul(a, rest.clone()));
                }
            }
            if let Node::Neg(inner) = a.kind() {
                return neg(mul(inner.clone(), b));
            }
            if let Node::Neg(inner) = b.kind() {
                return neg(mul(a, inner.clone()));
            }
        }
    }
    Expr::raw_mul(a, b)
}

pub(super) fn div(a: Expr, b: Expr) -> Expr {
    if b.is_one() {
        return a;
    }
    if let (Some(x), Some(y)) = (a.as_constant(), b.as_constant()) {
        if let Some(e) = finite(x / y) {
            return e;
        }
    }
    if a.is_zero() && b.as_constant().is_none() {
        return Expr::zero();
    }
    if let Some(y) = b.as_constant() {
        if y != 0.0 {
            return mul(Expr::constant(1.0 / y), a);
        }
    }
    Expr::raw_div(a, b)
}

pub(super) fn pow(a: Expr, r: Rational) -> Expr {
    if r.num() == 0 {
        return Expr::one();
    }
    if r == Rational::integer(1) {
        return a;
    }
    if let Some(c) = a.as_constant() {
        if let Some(e) = finite(rational_pow(c, r)) {
            return e;
        }
    }
    if let Node::Pow(inner, q) = a.kind() {
        // (x^q)^n = x^(q n) holds for integer n wherever x^q is defined
        if r.is_integer() {
            return pow(inner.clone(), q.mul(r));
        }
    }
    Expr::raw_pow(a, r)
}

/// Rebuild bottom-up through the simplifying constructors.
pub(super) fn simplify(e: &Expr) -> Expr {
    match e.kind() {
        Node::Const(_) | Node::Var(_) => e.clone(),
        Node::Neg(a) => neg(simplify(a)),
        Node::Func(f, a) => func(*f, simplify(a)),
        Node::Add(a, b) => add(simplify(a), simplify(b)),
        Node::Sub(a, b) => sub(simplify(a), simplify(b)),
        Node::Mul(a, b) => mul(simplify(a), simplify(b)),
        Node::Div(a, b) => div(simplify(a), simplify(b)),
        Node::Pow(a, r) => pow(simplify(a), *r),
    }
}
