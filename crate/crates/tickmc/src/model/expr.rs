//! Guard and probability expressions.
//!
//! Probability weights are evaluated in exact rational arithmetic; they only
//! ever mention constants and literals, so evaluation happens once per
//! binding. Guards are boolean formulas over shared-variable atoms.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown value `{value}` for variable `{var}`")]
    UnknownValue { var: String, value: String },
    #[error("division by zero")]
    DivisionByZero,
}

/// Parses a decimal literal such as `0.99`, `10`, or `1e-3` into an exact
/// rational. A leading `-` is accepted.
pub fn parse_decimal(text: &str) -> Option<Rational> {
    let (negative, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(i) => (&body[..i], body[i + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let scale = exponent - i32::try_from(frac_part.len()).ok()?;
    if scale.unsigned_abs() > 4096 {
        return None;
    }
    let ten = BigInt::from(10u32);
    let value = if scale >= 0 {
        Rational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if negative { -value } else { value })
}

/// Renders a rational as an exact decimal when its denominator only has the
/// prime factors 2 and 5, and as `n/d` otherwise.
pub fn format_rational(value: &Rational) -> String {
    if value.is_integer() {
        return value.numer().to_string();
    }
    let mut denom = value.denom().clone();
    let two = BigInt::from(2u32);
    let five = BigInt::from(5u32);
    let (mut twos, mut fives) = (0usize, 0usize);
    while (&denom % &two).is_zero() {
        denom /= &two;
        twos += 1;
    }
    while (&denom % &five).is_zero() {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return format!("{}/{}", value.numer(), value.denom());
    }
    let places = twos.max(fives);
    let scaled = value * Rational::from_integer(num_traits::pow(BigInt::from(10u32), places));
    debug_assert!(scaled.is_integer());
    let digits = scaled.numer().abs().to_string();
    let digits = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = digits.split_at(digits.len() - places);
    let sign = if value.is_negative() { "-" } else { "" };
    format!("{sign}{int_part}.{frac_part}")
}

pub fn rational_to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Arithmetic over constants and rational literals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbExpr {
    Num(Rational),
    Const(String),
    Neg(Box<ProbExpr>),
    Bin(BinOp, Box<ProbExpr>, Box<ProbExpr>),
}

impl ProbExpr {
    pub fn one() -> Self {
        ProbExpr::Num(Rational::one())
    }

    pub fn int(value: i64) -> Self {
        ProbExpr::Num(Rational::from_integer(value.into()))
    }

    /// Literal from decimal text. Panics on malformed input; meant for
    /// hard-coded models.
    pub fn decimal(text: &str) -> Self {
        ProbExpr::Num(parse_decimal(text).expect("malformed decimal literal"))
    }

    pub fn constant(name: impl Into<String>) -> Self {
        ProbExpr::Const(name.into())
    }

    pub fn bin(op: BinOp, lhs: ProbExpr, rhs: ProbExpr) -> Self {
        ProbExpr::Bin(op, Box::new(lhs), Box::new(rhs))
    }

    /// `1 - self`
    pub fn complement(self) -> Self {
        ProbExpr::bin(BinOp::Sub, ProbExpr::one(), self)
    }

    /// Names of all constants referenced, in first-occurrence order.
    pub fn constants(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_constants(&mut out);
        out
    }

    fn collect_constants<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            ProbExpr::Num(_) => {}
            ProbExpr::Const(name) => {
                if !out.contains(&name.as_str()) {
                    out.push(name);
                }
            }
            ProbExpr::Neg(inner) => inner.collect_constants(out),
            ProbExpr::Bin(_, lhs, rhs) => {
                lhs.collect_constants(out);
                rhs.collect_constants(out);
            }
        }
    }

    pub fn evaluate(&self, bindings: &BTreeMap<String, Rational>) -> Result<Rational, EvalError> {
        match self {
            ProbExpr::Num(value) => Ok(value.clone()),
            ProbExpr::Const(name) => bindings
                .get(name)
                .cloned()
                .ok_or_else(|| EvalError::UnknownIdentifier(name.clone())),
            ProbExpr::Neg(inner) => Ok(-inner.evaluate(bindings)?),
            ProbExpr::Bin(op, lhs, rhs) => {
                let lhs = lhs.evaluate(bindings)?;
                let rhs = rhs.evaluate(bindings)?;
                Ok(match op {
                    BinOp::Add => lhs + rhs,
                    BinOp::Sub => lhs - rhs,
                    BinOp::Mul => lhs * rhs,
                    BinOp::Div => {
                        if rhs.is_zero() {
                            return Err(EvalError::DivisionByZero);
                        }
                        lhs / rhs
                    }
                })
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ProbExpr::Bin(op, ..) => op.precedence(),
            ProbExpr::Neg(_) => 3,
            ProbExpr::Num(v) if v.is_negative() || !v.denom().is_one() => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for ProbExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProbExpr::Num(value) => {
                let text = format_rational(value);
                if text.contains('/') {
                    write!(f, "({})", text.replace('/', " / "))
                } else {
                    f.write_str(&text)
                }
            }
            ProbExpr::Const(name) => f.write_str(name),
            ProbExpr::Neg(inner) => {
                if inner.precedence() < 3 {
                    write!(f, "-({inner})")
                } else {
                    write!(f, "-{inner}")
                }
            }
            ProbExpr::Bin(op, lhs, rhs) => {
                let prec = op.precedence();
                if lhs.precedence() < prec {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if rhs.precedence() <= prec {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
        }
    }
}

/// Boolean guard over shared-variable atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuardExpr {
    True,
    Atom {
        var: String,
        op: CmpOp,
        value: String,
    },
    Not(Box<GuardExpr>),
    And(Box<GuardExpr>, Box<GuardExpr>),
    Or(Box<GuardExpr>, Box<GuardExpr>),
}

impl GuardExpr {
    pub fn eq(var: impl Into<String>, value: impl Into<String>) -> Self {
        GuardExpr::Atom {
            var: var.into(),
            op: CmpOp::Eq,
            value: value.into(),
        }
    }

    pub fn ne(var: impl Into<String>, value: impl Into<String>) -> Self {
        GuardExpr::Atom {
            var: var.into(),
            op: CmpOp::Ne,
            value: value.into(),
        }
    }

    pub fn and(self, other: GuardExpr) -> Self {
        GuardExpr::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: GuardExpr) -> Self {
        GuardExpr::Or(Box::new(self), Box::new(other))
    }

    pub fn negate(self) -> Self {
        GuardExpr::Not(Box::new(self))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, GuardExpr::True)
    }

    /// Every `(var, value)` pair mentioned by an atom.
    pub fn atoms(&self) -> Vec<(&str, &str)> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<(&'a str, &'a str)>) {
        match self {
            GuardExpr::True => {}
            GuardExpr::Atom { var, value, .. } => out.push((var, value)),
            GuardExpr::Not(inner) => inner.collect_atoms(out),
            GuardExpr::And(lhs, rhs) | GuardExpr::Or(lhs, rhs) => {
                lhs.collect_atoms(out);
                rhs.collect_atoms(out);
            }
        }
    }

    /// Evaluates the guard against a valuation mapping variable names to
    /// value names.
    pub fn evaluate(&self, valuation: &BTreeMap<String, String>) -> Result<bool, EvalError> {
        match self {
            GuardExpr::True => Ok(true),
            GuardExpr::Atom { var, op, value } => {
                let current = valuation
                    .get(var)
                    .ok_or_else(|| EvalError::UnknownIdentifier(var.clone()))?;
                Ok(match op {
                    CmpOp::Eq => current == value,
                    CmpOp::Ne => current != value,
                })
            }
            GuardExpr::Not(inner) => Ok(!inner.evaluate(valuation)?),
            GuardExpr::And(lhs, rhs) => Ok(lhs.evaluate(valuation)? && rhs.evaluate(valuation)?),
            GuardExpr::Or(lhs, rhs) => Ok(lhs.evaluate(valuation)? || rhs.evaluate(valuation)?),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            GuardExpr::Or(..) => 1,
            GuardExpr::And(..) => 2,
            GuardExpr::Not(_) => 3,
            GuardExpr::True | GuardExpr::Atom { .. } => 4,
        }
    }
}

impl fmt::Display for GuardExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let write_child = |f: &mut fmt::Formatter<'_>, child: &GuardExpr, min: u8| {
            if child.precedence() < min {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        };
        match self {
            GuardExpr::True => f.write_str("true"),
            GuardExpr::Atom { var, op, value } => write!(f, "{var} {} {value}", op.symbol()),
            GuardExpr::Not(inner) => {
                f.write_str("not ")?;
                write_child(f, inner, 3)
            }
            GuardExpr::And(lhs, rhs) => {
                write_child(f, lhs, 2)?;
                f.write_str(" and ")?;
                write_child(f, rhs, 3)
            }
            GuardExpr::Or(lhs, rhs) => {
                write_child(f, lhs, 1)?;
                f.write_str(" or ")?;
                write_child(f, rhs, 2)
            }
        }
    }
}
