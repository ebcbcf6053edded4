//! Evaluation of expression trees over plain and dual numbers.

use std::ops::{Add, Div, Mul, Neg, Sub};

use thiserror::Error;

use super::ast::{BinOp, Expr, Func};
use super::dual::Dual;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("square root of negative value {value} in `{expr}`")]
    SqrtOfNegative { expr: String, value: f64 },
    #[error("negative base {base} raised to non-integer power {exponent} in `{expr}`")]
    InvalidPower { expr: String, base: f64, exponent: f64 },
}

/// Numbers an expression can be evaluated over.
pub trait Scalar:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn pow(self, exponent: Self) -> Self;
}

/// `powf`, switching to `powi` for integral exponents so small integer
/// powers are plain repeated products.
pub(crate) fn real_pow(base: f64, exponent: f64) -> f64 {
    if exponent.fract() == 0.0 && exponent.abs() <= i32::MAX as f64 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn pow(self, exponent: Self) -> Self {
        real_pow(self, exponent)
    }
}

impl Scalar for Dual {
    fn constant(v: f64) -> Self {
        Dual::constant(v)
    }
    fn value(self) -> f64 {
        self.value
    }
    fn sin(self) -> Self {
        Dual::sin(self)
    }
    fn cos(self) -> Self {
        Dual::cos(self)
    }
    fn exp(self) -> Self {
        Dual::exp(self)
    }
    fn sqrt(self) -> Self {
        Dual::sqrt(self)
    }
    fn pow(self, exponent: Self) -> Self {
        Dual::pow(self, exponent)
    }
}

/// Recursively evaluates `expr`, reading variables from `vars`.
///
/// Division by an exact zero, square roots of negatives and negative bases
/// under non-integer powers are reported with the offending subexpression.
pub fn eval<S: Scalar>(expr: &Expr, vars: &[S]) -> Result<S, EvalError> {
    Ok(match expr {
        Expr::Num(v) => S::constant(*v),
        Expr::Var(i) => vars[*i],
        Expr::Neg(e) => -eval(e, vars)?,
        Expr::Call(func, arg) => {
            let a = eval(arg, vars)?;
            match func {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Sqrt => {
                    if a.value() < 0.0 {
                        return Err(EvalError::SqrtOfNegative {
                            expr: expr.to_string(),
                            value: a.value(),
                        });
                    }
                    a.sqrt()
                }
            }
        }
        Expr::Binary(op, l, r) => {
            let a = eval(l, vars)?;
            let b = eval(r, vars)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b.value() == 0.0 {
                        return Err(EvalError::DivisionByZero(expr.to_string()));
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a.value() < 0.0 && b.value().fract() != 0.0 {
                        return Err(EvalError::InvalidPower {
                            expr: expr.to_string(),
                            base: a.value(),
                            exponent: b.value(),
                        });
                    }
                    a.pow(b)
                }
            }
        }
    })
}
