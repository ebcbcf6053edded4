//! `verify` and `dump`: structure-level checks that need no config.

use std::fmt::Write as _;

use qk_core::forms::symplectic_form;
use qk_core::linalg::IntMatrix;
use qk_core::structure::{
    build_structure, structure_triple, verify_metric_compatibility, verify_quaternion_relations, AlgebraReport,
    BlockDim, EuclideanMetric, Label, Space, StructureKind,
};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub tangent: AlgebraReport,
    pub cotangent: AlgebraReport,
    /// `(structure, ‖Mᵀ + M‖_max)` for all six structures.
    pub metric: Vec<(StructureKind, i64)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.tangent.is_exact() && self.cotangent.is_exact() && self.metric.iter().all(|&(_, r)| r == 0)
    }

    pub fn table(&self) -> String {
        let mut out = String::from("triple      F^2+I  G^2+I  H^2+I  FGH+I\n");
        for (name, r) in [("tangent", &self.tangent), ("cotangent", &self.cotangent)] {
            writeln!(
                out,
                "{name:<10} {:>6} {:>6} {:>6} {:>6}",
                r.f_squared, r.g_squared, r.h_squared, r.fgh
            )
            .unwrap();
        }
        out.push_str("structure  metric\n");
        for (kind, r) in &self.metric {
            writeln!(out, "{:<10} {r:>6}", kind.to_string()).unwrap();
        }
        out
    }
}

/// Runs the algebra and metric checks. With `corrupt_h`, the tangent `H`
/// is replaced by a copy of `F` so the product relation must fail.
pub fn verify(dim: BlockDim, corrupt_h: bool) -> VerifyReport {
    let [f, g, h] = structure_triple(Space::Tangent, dim);
    let h = if corrupt_h { f.relabeled(Label::H) } else { h };
    let tangent = verify_quaternion_relations(&f, &g, &h).expect("triple is well formed");
    let [fs, gs, hs] = structure_triple(Space::Cotangent, dim);
    let cotangent = verify_quaternion_relations(&fs, &gs, &hs).expect("triple is well formed");
    let metric_tensor = EuclideanMetric::new(dim);
    let metric = [f, g, h, fs, gs, hs]
        .iter()
        .map(|t| {
            let r = verify_metric_compatibility(t, &metric_tensor).expect("dimensions agree");
            (t.kind(), r)
        })
        .collect();
    VerifyReport {
        tangent,
        cotangent,
        metric,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpTarget {
    Structure,
    Omega,
}

pub fn dump_matrix(what: DumpTarget, label: Label, space: Space, dim: BlockDim) -> IntMatrix {
    match what {
        DumpTarget::Structure => build_structure(StructureKind::new(label, space), dim).matrix().clone(),
        DumpTarget::Omega => symplectic_form(label, dim)
            .integer_matrix()
            .expect("symplectic forms have integer entries"),
    }
}

pub fn to_csv(m: &IntMatrix) -> String {
    let mut out = String::new();
    for row in m.iter_rows() {
        let cells: Vec<String> = row.iter().map(i64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
