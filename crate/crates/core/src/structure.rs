//! Quaternionic structure tensors on R^{4n}.
//!
//! Coordinates are four contiguous blocks of length `n`:
//! `(x_1..x_n, x_{n+1}..x_{2n}, x_{2n+1}..x_{3n}, x_{3n+1}..x_{4n})`.
//! Column `a` of a structure matrix holds the image of basis element `a`,
//! so applying a tensor is a plain matrix-vector product. Entries are kept as
//! exact integers; the algebra checks below never touch floating point.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::DimensionMismatch;
use crate::linalg::{IntMatrix, RealMatrix};

/// Block size `n`; the phase space has dimension `4n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockDim(usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("block size must be at least 1")]
pub struct ZeroBlockDim;

impl BlockDim {
    pub fn new(n: usize) -> Result<Self, ZeroBlockDim> {
        if n == 0 {
            Err(ZeroBlockDim)
        } else {
            Ok(Self(n))
        }
    }

    /// Block size `n`.
    pub fn n(self) -> usize {
        self.0
    }

    /// Total dimension `4n`.
    pub fn total(self) -> usize {
        4 * self.0
    }
}

impl fmt::Display for BlockDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    F,
    G,
    H,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::F, Label::G, Label::H];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::F => "F",
            Label::G => "G",
            Label::H => "H",
        }
    }

    /// Image of each coordinate block as `(target block, sign)`.
    ///
    /// F: ∂_i → ∂_{n+i}, ∂_{n+i} → −∂_i, ∂_{2n+i} → ∂_{3n+i}, ∂_{3n+i} → −∂_{2n+i}
    /// G: ∂_i → ∂_{2n+i}, ∂_{n+i} → −∂_{3n+i}, ∂_{2n+i} → −∂_i, ∂_{3n+i} → ∂_{n+i}
    /// H: ∂_i → ∂_{3n+i}, ∂_{n+i} → ∂_{2n+i}, ∂_{2n+i} → −∂_{n+i}, ∂_{3n+i} → −∂_i
    ///
    /// The dual action on `dx_a` follows the identical pattern.
    fn block_images(self) -> [(usize, i64); 4] {
        match self {
            Label::F => [(1, 1), (0, -1), (3, 1), (2, -1)],
            Label::G => [(2, 1), (3, -1), (0, -1), (1, 1)],
            Label::H => [(3, 1), (2, 1), (1, -1), (0, -1)],
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown structure label {0:?} (allowed: F, G, H)")]
pub struct UnknownLabel(pub String);

impl FromStr for Label {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "F" => Ok(Label::F),
            "G" => Ok(Label::G),
            "H" => Ok(Label::H),
            other => Err(UnknownLabel(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    Tangent,
    Cotangent,
}

impl Space {
    pub fn as_str(self) -> &'static str {
        match self {
            Space::Tangent => "tangent",
            Space::Cotangent => "cotangent",
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown space {0:?} (allowed: tangent, cotangent)")]
pub struct UnknownSpace(pub String);

impl FromStr for Space {
    type Err = UnknownSpace;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tangent" => Ok(Space::Tangent),
            "cotangent" => Ok(Space::Cotangent),
            other => Err(UnknownSpace(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StructureKind {
    pub label: Label,
    pub space: Space,
}

impl StructureKind {
    pub const ALL: [StructureKind; 6] = [
        StructureKind::new(Label::F, Space::Tangent),
        StructureKind::new(Label::G, Space::Tangent),
        StructureKind::new(Label::H, Space::Tangent),
        StructureKind::new(Label::F, Space::Cotangent),
        StructureKind::new(Label::G, Space::Cotangent),
        StructureKind::new(Label::H, Space::Cotangent),
    ];

    pub const fn new(label: Label, space: Space) -> Self {
        Self { label, space }
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.space {
            Space::Tangent => write!(f, "{}", self.label),
            Space::Cotangent => write!(f, "{}*", self.label),
        }
    }
}

/// One of F, G, H (tangent) or F*, G*, H* (cotangent) as an explicit matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureTensor {
    kind: StructureKind,
    dim: BlockDim,
    matrix: IntMatrix,
}

/// Builds the signed block-permutation matrix for `kind`.
pub fn build_structure(kind: StructureKind, dim: BlockDim) -> StructureTensor {
    let n = dim.n();
    let mut matrix = IntMatrix::zeros(dim.total(), dim.total());
    for (src_block, (dst_block, sign)) in kind.label.block_images().into_iter().enumerate() {
        for i in 0..n {
            matrix.set(dst_block * n + i, src_block * n + i, sign);
        }
    }
    StructureTensor { kind, dim, matrix }
}

impl StructureTensor {
    pub fn kind(&self) -> StructureKind {
        self.kind
    }

    pub fn dim(&self) -> BlockDim {
        self.dim
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    /// Same matrix under a different label. Only useful for building
    /// deliberately wrong triples (negative controls).
    pub fn relabeled(&self, label: Label) -> Self {
        Self {
            kind: StructureKind::new(label, self.kind.space),
            ..self.clone()
        }
    }

    /// Matrix-vector action on a coordinate vector.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>, DimensionMismatch> {
        DimensionMismatch::check(self.dim.total(), v.len())?;
        self.matrix.to_real().mul_vec(v)
    }

    /// Exact integer action.
    pub fn apply_exact(&self, v: &[i64]) -> Result<Vec<i64>, DimensionMismatch> {
        self.matrix.mul_vec(v)
    }

    pub fn to_real(&self) -> RealMatrix {
        self.matrix.to_real()
    }
}

impl AsRef<IntMatrix> for StructureTensor {
    fn as_ref(&self) -> &IntMatrix {
        &self.matrix
    }
}

/// The flat metric on R^{4n}: `g(u, v) = u · v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EuclideanMetric {
    dim: BlockDim,
}

impl EuclideanMetric {
    pub fn new(dim: BlockDim) -> Self {
        Self { dim }
    }

    pub fn dim(&self) -> BlockDim {
        self.dim
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> Result<f64, DimensionMismatch> {
        DimensionMismatch::check(self.dim.total(), u.len())?;
        DimensionMismatch::check(self.dim.total(), v.len())?;
        Ok(crate::linalg::dot(u, v))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("structure triple must share one block size, found {0}, {1}, {2}")]
    DimMismatch(BlockDim, BlockDim, BlockDim),
    #[error("structure triple must live in one space, found {0}, {1}, {2}")]
    SpaceMismatch(Space, Space, Space),
    #[error("expected labels (F, G, H), found ({0}, {1}, {2})")]
    LabelOrder(Label, Label, Label),
}

/// Residuals of the quaternion relations, each the max absolute row sum
/// of the corresponding residual matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AlgebraReport {
    /// ‖F² + I‖
    pub f_squared: i64,
    /// ‖G² + I‖
    pub g_squared: i64,
    /// ‖H² + I‖
    pub h_squared: i64,
    /// ‖F·G·H + I‖, H applied first.
    pub fgh: i64,
}

impl AlgebraReport {
    pub fn is_exact(&self) -> bool {
        self.max() == 0
    }

    pub fn max(&self) -> i64 {
        self.f_squared.max(self.g_squared).max(self.h_squared).max(self.fgh)
    }
}

/// Checks `F² = G² = H² = FGH = −I` exactly.
pub fn verify_quaternion_relations(
    f: &StructureTensor,
    g: &StructureTensor,
    h: &StructureTensor,
) -> Result<AlgebraReport, AlgebraError> {
    if f.dim != g.dim || g.dim != h.dim {
        return Err(AlgebraError::DimMismatch(f.dim, g.dim, h.dim));
    }
    let (sf, sg, sh) = (f.kind.space, g.kind.space, h.kind.space);
    if sf != sg || sg != sh {
        return Err(AlgebraError::SpaceMismatch(sf, sg, sh));
    }
    let labels = (f.kind.label, g.kind.label, h.kind.label);
    if labels != (Label::F, Label::G, Label::H) {
        return Err(AlgebraError::LabelOrder(labels.0, labels.1, labels.2));
    }
    let identity = IntMatrix::identity(f.dim.total());
    let residual = |m: IntMatrix| (&m + &identity).inf_norm();
    let square = |t: &StructureTensor| t.matrix.matmul(&t.matrix).expect("square matrices");
    let fgh = f
        .matrix
        .matmul(&g.matrix.matmul(&h.matrix).expect("square matrices"))
        .expect("square matrices");
    Ok(AlgebraReport {
        f_squared: residual(square(f)),
        g_squared: residual(square(g)),
        h_squared: residual(square(h)),
        fgh: residual(fgh),
    })
}

/// Largest |g(T e_a, e_b) + g(e_a, T e_b)| over basis pairs, i.e. the largest
/// entry of `Mᵀ + M`.
pub fn verify_metric_compatibility<M: AsRef<IntMatrix>>(
    tensor: M,
    metric: &EuclideanMetric,
) -> Result<i64, DimensionMismatch> {
    let m = tensor.as_ref();
    DimensionMismatch::check(metric.dim().total(), m.rows())?;
    DimensionMismatch::check(metric.dim().total(), m.cols())?;
    Ok((&m.transpose() + m).max_abs())
}

/// The three structures of one space, in F, G, H order.
pub fn structure_triple(space: Space, dim: BlockDim) -> [StructureTensor; 3] {
    Label::ALL.map(|label| build_structure(StructureKind::new(label, space), dim))
}
