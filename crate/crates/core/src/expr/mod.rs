//! Hamiltonian functions written in a small arithmetic language.
//!
//! A [`ScalarField`] is a parsed expression over `x1..x{4n}`. Values come
//! from direct evaluation; gradients from forward-mode dual numbers, one
//! pass per coordinate. [`ScalarField::fd_gradient`] is the central
//! difference cross-check.

mod ast;
mod dual;
mod eval;
mod parse;

use std::fmt;

use thiserror::Error;

pub use ast::{BinOp, Expr, Func};
pub use dual::Dual;
pub use eval::{eval, EvalError, Scalar};
pub use parse::{parse_expr, ParseError};

use crate::error::DimensionMismatch;
use crate::structure::BlockDim;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("finite-difference step must be positive and finite, got {0}")]
    BadStep(f64),
}

/// A Hamiltonian `H: R^{4n} → R`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    dim: BlockDim,
    ast: Expr,
}

impl ScalarField {
    pub fn parse(text: &str, dim: BlockDim) -> Result<Self, ParseError> {
        Ok(Self {
            dim,
            ast: parse_expr(text, dim.total())?,
        })
    }

    /// Wraps an existing tree. Fails if it references a variable outside `x1..x{4n}`.
    pub fn from_expr(ast: Expr, dim: BlockDim) -> Result<Self, ParseError> {
        if let Some(max) = ast.max_var() {
            if max >= dim.total() {
                return Err(ParseError::VariableOutOfRange {
                    index: max + 1,
                    max: dim.total(),
                    offset: 0,
                });
            }
        }
        Ok(Self { dim, ast })
    }

    pub fn dim(&self) -> BlockDim {
        self.dim
    }

    pub fn ast(&self) -> &Expr {
        &self.ast
    }

    pub fn evaluate(&self, point: &[f64]) -> Result<f64, FieldError> {
        DimensionMismatch::check(self.dim.total(), point.len())?;
        Ok(eval(&self.ast, point)?)
    }

    /// Exact-to-rounding gradient by forward-mode differentiation.
    pub fn gradient(&self, point: &[f64]) -> Result<Gradient, FieldError> {
        DimensionMismatch::check(self.dim.total(), point.len())?;
        let mut vars: Vec<Dual> = point.iter().map(|&x| Dual::constant(x)).collect();
        let mut components = Vec::with_capacity(point.len());
        for a in 0..point.len() {
            vars[a].derivative = 1.0;
            components.push(eval(&self.ast, &vars)?.derivative);
            vars[a].derivative = 0.0;
        }
        Ok(Gradient {
            dim: self.dim,
            components,
        })
    }

    /// Central differences `(H(x + h e_a) − H(x − h e_a)) / 2h`.
    pub fn fd_gradient(&self, point: &[f64], h: f64) -> Result<Gradient, FieldError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(FieldError::BadStep(h));
        }
        DimensionMismatch::check(self.dim.total(), point.len())?;
        let mut x = point.to_vec();
        let mut components = Vec::with_capacity(point.len());
        for a in 0..point.len() {
            x[a] = point[a] + h;
            let plus = eval(&self.ast, &x)?;
            x[a] = point[a] - h;
            let minus = eval(&self.ast, &x)?;
            x[a] = point[a];
            components.push((plus - minus) / (2.0 * h));
        }
        Ok(Gradient {
            dim: self.dim,
            components,
        })
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

/// Components `∂H/∂x_a` of `dH`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    dim: BlockDim,
    components: Vec<f64>,
}

impl Gradient {
    pub fn new(dim: BlockDim, components: Vec<f64>) -> Result<Self, DimensionMismatch> {
        DimensionMismatch::check(dim.total(), components.len())?;
        Ok(Self { dim, components })
    }

    pub fn dim(&self) -> BlockDim {
        self.dim
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn into_components(self) -> Vec<f64> {
        self.components
    }
}
