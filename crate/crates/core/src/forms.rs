//! Affine 1-forms, constant 2-forms, and the symplectic forms derived from
//! the dual structures.
//!
//! Conventions:
//! - an [`AffineOneForm`] is `Σ_b (Σ_a L[b][a] x_a + c[b]) dx_b`;
//! - `(dx_a ∧ dx_b)(u, v) = u_a v_b − u_b v_a`, no ½ factor;
//! - a [`ConstantTwoForm`] stores `Ω` with `Φ(u, v) = uᵀ Ω v`;
//! - the interior product puts the vector in the first slot, `i_X Φ = Φ(X, ·)`.

use thiserror::Error;

use crate::error::DimensionMismatch;
use crate::linalg::{dot, IntMatrix, RealMatrix};
use crate::structure::{build_structure, BlockDim, EuclideanMetric, Label, Space, StructureKind, StructureTensor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormError {
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
    #[error("{kind} acts on the {actual} space, but this operation needs a {required} structure")]
    WrongSpace {
        kind: StructureKind,
        actual: Space,
        required: Space,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineOneForm {
    dim: BlockDim,
    linear: RealMatrix,
    constant: Vec<f64>,
}

impl AffineOneForm {
    pub fn new(dim: BlockDim, linear: RealMatrix, constant: Vec<f64>) -> Result<Self, FormError> {
        let size = dim.total();
        DimensionMismatch::check(size, linear.rows())?;
        DimensionMismatch::check(size, linear.cols())?;
        DimensionMismatch::check(size, constant.len())?;
        Ok(Self { dim, linear, constant })
    }

    pub fn zero(dim: BlockDim) -> Self {
        let size = dim.total();
        Self {
            dim,
            linear: RealMatrix::zeros(size, size),
            constant: vec![0.0; size],
        }
    }

    pub fn dim(&self) -> BlockDim {
        self.dim
    }

    pub fn linear(&self) -> &RealMatrix {
        &self.linear
    }

    pub fn constant(&self) -> &[f64] {
        &self.constant
    }

    /// Coefficients of `dx_1 .. dx_{4n}` at `point`.
    pub fn coefficients(&self, point: &[f64]) -> Result<Vec<f64>, DimensionMismatch> {
        let mut coeffs = self.linear.mul_vec(point)?;
        for (c, k) in coeffs.iter_mut().zip(&self.constant) {
            *c += k;
        }
        Ok(coeffs)
    }

    /// The form at `point` applied to the tangent vector `v`.
    pub fn evaluate(&self, point: &[f64], v: &[f64]) -> Result<f64, DimensionMismatch> {
        DimensionMismatch::check(self.dim.total(), v.len())?;
        Ok(dot(&self.coefficients(point)?, v))
    }
}

/// `ω = ½ Σ_a x_a dx_a`.
pub fn canonical_one_form(dim: BlockDim) -> AffineOneForm {
    let size = dim.total();
    AffineOneForm {
        dim,
        linear: RealMatrix::from_fn(size, size, |r, c| if r == c { 0.5 } else { 0.0 }),
        constant: vec![0.0; size],
    }
}

/// Substitutes `dx_a ↦ φ*(dx_a)` in the coefficient expansion of `form`.
///
/// With `φ*(dx_a) = Σ_c M[c][a] dx_c` the new coefficient of `dx_c` is
/// `Σ_a M[c][a] · coeff_a`, so `L ↦ M L` and `c ↦ M c`.
pub fn pullback_by_dual(structure: &StructureTensor, form: &AffineOneForm) -> Result<AffineOneForm, FormError> {
    let kind = structure.kind();
    if kind.space != Space::Cotangent {
        return Err(FormError::WrongSpace {
            kind,
            actual: kind.space,
            required: Space::Cotangent,
        });
    }
    DimensionMismatch::check(form.dim.total(), structure.dim().total())?;
    let m = structure.to_real();
    Ok(AffineOneForm {
        dim: form.dim,
        linear: m.matmul(&form.linear)?,
        constant: m.mul_vec(&form.constant)?,
    })
}

/// `d(Σ_b f_b dx_b) = Σ_{a,b} ∂_a f_b dx_a ∧ dx_b`, which for affine
/// coefficients is the constant form `Ω = Lᵀ − L`.
pub fn exterior_derivative(form: &AffineOneForm) -> ConstantTwoForm {
    let lt = form.linear.transpose();
    ConstantTwoForm {
        dim: form.dim,
        omega: &lt - &form.linear,
    }
}

/// A constant-coefficient 2-form.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantTwoForm {
    dim: BlockDim,
    omega: RealMatrix,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TwoFormError {
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
    #[error("matrix is not skew-symmetric (max |Ω + Ωᵀ| = {0})")]
    NotSkew(f64),
    #[error("wedge index {index} out of range for dimension {size}")]
    IndexOutOfRange { index: usize, size: usize },
}

impl ConstantTwoForm {
    pub fn new(dim: BlockDim, omega: RealMatrix) -> Result<Self, TwoFormError> {
        DimensionMismatch::check(dim.total(), omega.rows())?;
        DimensionMismatch::check(dim.total(), omega.cols())?;
        let asym = (&omega + &omega.transpose()).max_abs();
        if asym != 0.0 {
            return Err(TwoFormError::NotSkew(asym));
        }
        Ok(Self { dim, omega })
    }

    pub fn zero(dim: BlockDim) -> Self {
        Self {
            dim,
            omega: RealMatrix::zeros(dim.total(), dim.total()),
        }
    }

    /// Sums `coef · dx_a ∧ dx_b` over the given terms (0-based indices).
    pub fn from_wedges(
        dim: BlockDim,
        terms: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, TwoFormError> {
        let size = dim.total();
        let mut omega = RealMatrix::zeros(size, size);
        for (a, b, coef) in terms {
            for index in [a, b] {
                if index >= size {
                    return Err(TwoFormError::IndexOutOfRange { index, size });
                }
            }
            omega.set(a, b, omega.get(a, b) + coef);
            omega.set(b, a, omega.get(b, a) - coef);
        }
        Ok(Self { dim, omega })
    }

    pub fn dim(&self) -> BlockDim {
        self.dim
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.omega
    }

    /// Exact integer view, if every entry is integral.
    pub fn integer_matrix(&self) -> Option<IntMatrix> {
        self.omega.to_integer()
    }

    pub fn negated(&self) -> Self {
        Self {
            dim: self.dim,
            omega: -&self.omega,
        }
    }

    /// `Φ(u, v) = uᵀ Ω v`.
    pub fn evaluate(&self, u: &[f64], v: &[f64]) -> Result<f64, DimensionMismatch> {
        DimensionMismatch::check(self.dim.total(), u.len())?;
        Ok(dot(u, &self.omega.mul_vec(v)?))
    }

    /// Components of the covector `v ↦ Φ(x, v)`, i.e. `Ωᵀ x`.
    pub fn interior_product(&self, x: &[f64]) -> Result<Vec<f64>, DimensionMismatch> {
        self.omega.transpose().mul_vec(x)
    }

    pub fn determinant(&self) -> f64 {
        self.omega.determinant()
    }
}

/// `Φ_{φ*} = −d(φ*(ω))` for the dual structure with the given label.
pub fn symplectic_form(label: Label, dim: BlockDim) -> ConstantTwoForm {
    let dual = build_structure(StructureKind::new(label, Space::Cotangent), dim);
    let liouville =
        pullback_by_dual(&dual, &canonical_one_form(dim)).expect("dual structure and canonical form share a dimension");
    exterior_derivative(&liouville).negated()
}

/// `Ω[a][b] = g(T e_a, e_b)`, the 2-form `(X, Y) ↦ g(TX, Y)`.
pub fn metric_kaehler_form(
    structure: &StructureTensor,
    metric: &EuclideanMetric,
) -> Result<ConstantTwoForm, FormError> {
    let kind = structure.kind();
    if kind.space != Space::Tangent {
        return Err(FormError::WrongSpace {
            kind,
            actual: kind.space,
            required: Space::Tangent,
        });
    }
    DimensionMismatch::check(metric.dim().total(), structure.dim().total())?;
    Ok(ConstantTwoForm {
        dim: structure.dim(),
        omega: structure.to_real().transpose(),
    })
}
