//! Checks a computed trajectory against the structural guarantees of the
//! flow: energy conservation, the equation of motion, symplecticity of the
//! step map, and the quaternion algebra of the underlying structures.

use thiserror::Error;

use crate::dynamics::{step, DynamicsError, HamiltonianSystem, NewtonOptions, PhasePoint, Trajectory, VectorField};
use crate::expr::{FieldError, ScalarField};
use crate::forms::ConstantTwoForm;
use crate::linalg::{max_norm, RealMatrix};
use crate::structure::{structure_triple, verify_quaternion_relations, AlgebraReport, Space};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("energy evaluation failed at point {index}: {source}")]
    Energy { index: usize, source: FieldError },
    #[error("vector field evaluation failed at point {index}: {source}")]
    Field { index: usize, source: DynamicsError },
    #[error("trajectory has {0} points; at least 3 are needed for central differences")]
    TooShort(usize),
    #[error("symplecticity probe failed: {0}")]
    Probe(DynamicsError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyDrift {
    /// `|H(p_k) − H(p_0)|` for every stored point.
    pub series: Vec<f64>,
    pub max: f64,
}

pub fn energy_drift(trajectory: &Trajectory, hamiltonian: &ScalarField) -> Result<EnergyDrift, DiagnosticsError> {
    let energies = trajectory
        .points()
        .iter()
        .enumerate()
        .map(|(index, p)| {
            hamiltonian
                .evaluate(p.coordinates())
                .map_err(|source| DiagnosticsError::Energy { index, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let h0 = energies[0];
    let series: Vec<f64> = energies.iter().map(|h| (h - h0).abs()).collect();
    let max = series.iter().copied().fold(0.0, f64::max);
    Ok(EnergyDrift { series, max })
}

/// Max over interior samples of `‖(p_{k+1} − p_{k−1}) / 2dt − X(p_k)‖_∞`.
pub fn eom_residual<V: VectorField + ?Sized>(trajectory: &Trajectory, field: &V) -> Result<f64, DiagnosticsError> {
    let points = trajectory.points();
    if points.len() < 3 {
        return Err(DiagnosticsError::TooShort(points.len()));
    }
    let dt = trajectory.step();
    let mut worst: f64 = 0.0;
    for k in 1..points.len() - 1 {
        let (prev, here, next) = (
            points[k - 1].coordinates(),
            points[k].coordinates(),
            points[k + 1].coordinates(),
        );
        let x = field
            .eval(here)
            .map_err(|source| DiagnosticsError::Field { index: k, source })?;
        let r = (0..here.len())
            .map(|i| ((next[i] - prev[i]) / (2.0 * dt) - x[i]).abs())
            .fold(0.0, f64::max);
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Central-difference Jacobian of the one-step map `p ↦ step(p)`.
///
/// The probe offset is a power of two (about `1e-5 · max(1, ‖p‖)`), so
/// `p ± h` is exact whenever `p` is representable on that grid.
pub fn step_jacobian<V: VectorField + ?Sized>(
    field: &V,
    point: &PhasePoint,
    dt: f64,
    method: crate::dynamics::Method,
    newton: NewtonOptions,
) -> Result<RealMatrix, DynamicsError> {
    let x = point.coordinates();
    let size = x.len();
    let h = (1e-5 * max_norm(x).max(1.0)).log2().round().exp2();
    let mut jac = RealMatrix::zeros(size, size);
    let mut xp = x.to_vec();
    for c in 0..size {
        xp[c] = x[c] + h;
        let plus = step(field, &PhasePoint::new(xp.clone(), point.time())?, dt, method, newton)?;
        xp[c] = x[c] - h;
        let minus = step(field, &PhasePoint::new(xp.clone(), point.time())?, dt, method, newton)?;
        xp[c] = x[c];
        for r in 0..size {
            jac.set(r, c, (plus.coordinates()[r] - minus.coordinates()[r]) / (2.0 * h));
        }
    }
    Ok(jac)
}

/// `‖JᵀΩJ − Ω‖_max` for the step map at `point`.
pub fn symplecticity_residual<V: VectorField + ?Sized>(
    field: &V,
    omega: &ConstantTwoForm,
    point: &PhasePoint,
    dt: f64,
    method: crate::dynamics::Method,
) -> Result<f64, DynamicsError> {
    let j = step_jacobian(field, point, dt, method, NewtonOptions::default())?;
    let o = omega.matrix();
    let pulled = j.transpose().matmul(o)?.matmul(&j)?;
    Ok(pulled.max_abs_diff(o))
}

/// Symplecticity residual maximized over every stored point except the last.
pub fn symplecticity_sweep<V: VectorField + ?Sized>(
    trajectory: &Trajectory,
    field: &V,
    omega: &ConstantTwoForm,
) -> Result<f64, DiagnosticsError> {
    let points = trajectory.points();
    let mut worst: f64 = 0.0;
    for p in &points[..points.len().saturating_sub(1).max(1)] {
        let r = symplecticity_residual(field, omega, p, trajectory.step(), trajectory.method())
            .map_err(DiagnosticsError::Probe)?;
        worst = worst.max(r);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsReport {
    pub energy_drift_max: f64,
    pub energy_drift_series: Vec<f64>,
    pub eom_residual_max: f64,
    /// Measured at the first point of the trajectory.
    pub symplecticity_residual: f64,
    pub algebra: AlgebraReport,
}

/// Pass/fail limits for a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub energy_drift: f64,
    /// Limit on the equation-of-motion residual at `dt = 0.001`; the
    /// effective limit scales with `dt²` like the central-difference error.
    pub eom_residual_at_millistep: f64,
    pub symplecticity: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            energy_drift: 1e-8,
            eom_residual_at_millistep: 1e-6,
            symplecticity: 1e-6,
        }
    }
}

impl Thresholds {
    pub fn scaled(self, factor: f64) -> Self {
        Self {
            energy_drift: self.energy_drift * factor,
            eom_residual_at_millistep: self.eom_residual_at_millistep * factor,
            symplecticity: self.symplecticity * factor,
        }
    }

    /// Effective residual limit for step `dt`, never tighter than the
    /// millistep limit.
    pub fn eom_residual(&self, dt: f64) -> f64 {
        self.eom_residual_at_millistep * (dt * 1e3).powi(2).max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub energy_ok: bool,
    pub eom_ok: bool,
    pub symplecticity_ok: bool,
    pub algebra_ok: bool,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.energy_ok && self.eom_ok && self.symplecticity_ok && self.algebra_ok
    }
}

impl DiagnosticsReport {
    pub fn verdict(&self, thresholds: &Thresholds, dt: f64) -> Verdict {
        Verdict {
            energy_ok: self.energy_drift_max <= thresholds.energy_drift,
            eom_ok: self.eom_residual_max <= thresholds.eom_residual(dt),
            symplecticity_ok: self.symplecticity_residual <= thresholds.symplecticity,
            algebra_ok: self.algebra.is_exact(),
        }
    }
}

/// Runs every diagnostic on a trajectory of `system`.
pub fn full_report(trajectory: &Trajectory, system: &HamiltonianSystem) -> Result<DiagnosticsReport, DiagnosticsError> {
    let drift = energy_drift(trajectory, system.hamiltonian())?;
    let eom = eom_residual(trajectory, system)?;
    let symplecticity = symplecticity_residual(
        system,
        system.omega(),
        trajectory.first(),
        trajectory.step(),
        trajectory.method(),
    )
    .map_err(DiagnosticsError::Probe)?;
    let [f, g, h] = structure_triple(Space::Cotangent, system.dim());
    let algebra = verify_quaternion_relations(&f, &g, &h).expect("built-in triple is well formed");
    Ok(DiagnosticsReport {
        energy_drift_max: drift.max,
        energy_drift_series: drift.series,
        eom_residual_max: eom,
        symplecticity_residual: symplecticity,
        algebra,
    })
}
