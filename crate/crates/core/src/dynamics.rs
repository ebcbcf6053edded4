//! Hamiltonian vector fields and fixed-step integration of their flows.
//!
//! With `Φ(u, v) = uᵀ Ω v` and `i_X Φ = Φ(X, ·)`, the equation `i_X Φ = dH`
//! reads `Ωᵀ X = ∇H`, so `X = Ω⁻ᵀ ∇H`. For the three quaternionic symplectic
//! forms `Ω` is a signed permutation, its inverse is its transpose, and the
//! solve reduces to a signed re-indexing of the gradient.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::DimensionMismatch;
use crate::expr::{FieldError, Gradient, ScalarField};
use crate::forms::{symplectic_form, ConstantTwoForm};
use crate::linalg::{max_norm, IntMatrix, RealMatrix};
use crate::structure::{BlockDim, Label};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Dimension(#[from] DimensionMismatch),
    #[error("time step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("Newton tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("state became non-finite at t = {time}")]
    NonFinite { time: f64 },
    #[error("Newton iteration did not converge after {iterations} iterations (last residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("Newton Jacobian is singular")]
    SingularJacobian,
    #[error("two-form is not a signed permutation; no cached inverse available")]
    UnsupportedTwoForm,
}

/// A vector field on R^{4n}.
pub trait VectorField: Send + Sync {
    fn dim(&self) -> BlockDim;

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, DynamicsError>;
}

/// The triple (R^{4n}, Φ_{label*}, X_H).
#[derive(Debug, Clone)]
pub struct HamiltonianSystem {
    label: Label,
    hamiltonian: ScalarField,
    omega: ConstantTwoForm,
    omega_inverse_transpose: IntMatrix,
}

impl HamiltonianSystem {
    pub fn new(label: Label, hamiltonian: ScalarField) -> Self {
        let omega = symplectic_form(label, hamiltonian.dim());
        let omega_inverse_transpose =
            signed_permutation_inverse_transpose(&omega).expect("built-in symplectic forms are signed permutations");
        Self {
            label,
            hamiltonian,
            omega,
            omega_inverse_transpose,
        }
    }

    pub fn dim(&self) -> BlockDim {
        self.hamiltonian.dim()
    }

    pub fn label(&self) -> Label {
        self.label
    }

    pub fn hamiltonian(&self) -> &ScalarField {
        &self.hamiltonian
    }

    pub fn omega(&self) -> &ConstantTwoForm {
        &self.omega
    }

    /// Cached `Ω⁻ᵀ`.
    pub fn omega_inverse_transpose(&self) -> &IntMatrix {
        &self.omega_inverse_transpose
    }

    pub fn energy(&self, x: &[f64]) -> Result<f64, DynamicsError> {
        Ok(self.hamiltonian.evaluate(x)?)
    }

    /// Solves `i_X Φ = dH` for a given gradient.
    pub fn solve_for_field(&self, gradient: &Gradient) -> Result<Vec<f64>, DimensionMismatch> {
        DimensionMismatch::check(self.dim().total(), gradient.components().len())?;
        Ok(signed_permutation_apply(
            &self.omega_inverse_transpose,
            gradient.components(),
        ))
    }
}

impl VectorField for HamiltonianSystem {
    fn dim(&self) -> BlockDim {
        self.hamiltonian.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        hamiltonian_vector_field(self, x)
    }
}

/// `X_H` at `point`.
pub fn hamiltonian_vector_field(system: &HamiltonianSystem, point: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let gradient = system.hamiltonian.gradient(point)?;
    Ok(system.solve_for_field(&gradient)?)
}

/// `(Ωᵀ)⁻¹` for a signed permutation `Ω`, which is `Ω` itself.
fn signed_permutation_inverse_transpose(omega: &ConstantTwoForm) -> Result<IntMatrix, DynamicsError> {
    let m = omega.integer_matrix().ok_or(DynamicsError::UnsupportedTwoForm)?;
    if !m.is_signed_permutation() {
        return Err(DynamicsError::UnsupportedTwoForm);
    }
    // P⁻¹ = Pᵀ for a signed permutation, so (Ωᵀ)⁻¹ = (Ωᵀ)ᵀ = Ω.
    Ok(m)
}

/// Exact product of a signed permutation with a vector: one signed copy per row.
fn signed_permutation_apply(p: &IntMatrix, v: &[f64]) -> Vec<f64> {
    p.iter_rows()
        .map(|row| {
            let (col, sign) = row
                .iter()
                .enumerate()
                .find(|(_, &s)| s != 0)
                .expect("signed permutation row has one nonzero");
            if *sign > 0 {
                v[col]
            } else {
                -v[col]
            }
        })
        .collect()
}

/// Hand transcription of the three displayed Hamiltonian vector fields,
/// blockwise over `i = 1..n`:
///
/// - F: `(−H_{n+i}, H_i, −H_{3n+i}, H_{2n+i})`
/// - G: `(−H_{2n+i}, H_{3n+i}, H_i, −H_{n+i})`
/// - H: `(−H_{3n+i}, −H_{2n+i}, H_{n+i}, H_i)`
///
/// Kept independent of the Ω-solve so each can check the other.
pub fn reference_field_formula(label: Label, gradient: &Gradient) -> Vec<f64> {
    let n = gradient.dim().n();
    let g = gradient.components();
    let block = |b: usize, i: usize| g[b * n + i];
    let mut x = vec![0.0; 4 * n];
    for i in 0..n {
        let (h0, h1, h2, h3) = (block(0, i), block(1, i), block(2, i), block(3, i));
        let [x0, x1, x2, x3] = match label {
            Label::F => [-h1, h0, -h3, h2],
            Label::G => [-h2, h3, h0, -h1],
            Label::H => [-h3, -h2, h1, h0],
        };
        x[i] = x0;
        x[n + i] = x1;
        x[2 * n + i] = x2;
        x[3 * n + i] = x3;
    }
    x
}

/// `ẋ = −∇H` (or `+∇H`). Not Hamiltonian: used to confirm that the
/// diagnostics notice when energy is not conserved.
#[derive(Debug, Clone)]
pub struct GradientFlow {
    hamiltonian: ScalarField,
    sign: f64,
}

impl GradientFlow {
    pub fn descent(hamiltonian: ScalarField) -> Self {
        Self {
            hamiltonian,
            sign: -1.0,
        }
    }

    pub fn ascent(hamiltonian: ScalarField) -> Self {
        Self { hamiltonian, sign: 1.0 }
    }
}

impl VectorField for GradientFlow {
    fn dim(&self) -> BlockDim {
        self.hamiltonian.dim()
    }

    fn eval(&self, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
        let g = self.hamiltonian.gradient(x)?;
        Ok(g.components().iter().map(|c| self.sign * c).collect())
    }
}

/// A state on the trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    coordinates: Vec<f64>,
    time: f64,
}

impl PhasePoint {
    pub fn new(coordinates: Vec<f64>, time: f64) -> Result<Self, DynamicsError> {
        if !time.is_finite() || coordinates.iter().any(|x| !x.is_finite()) {
            return Err(DynamicsError::NonFinite { time });
        }
        Ok(Self { coordinates, time })
    }

    pub fn coordinates(&self) -> &[f64] {
        &self.coordinates
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Rk4,
    ImplicitMidpoint,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::ImplicitMidpoint => "implicit_midpoint",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown method {0:?} (allowed: rk4, implicit_midpoint)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "implicit_midpoint" => Ok(Method::ImplicitMidpoint),
            other => Err(UnknownMethod(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
        }
    }
}

fn check_step(dt: f64) -> Result<(), DynamicsError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(DynamicsError::InvalidStep(dt))
    }
}

fn axpy(y: &[f64], a: f64, x: &[f64]) -> Vec<f64> {
    y.iter().zip(x).map(|(yi, xi)| yi + a * xi).collect()
}

/// One classical fourth-order Runge–Kutta step.
pub fn step_rk4<V: VectorField + ?Sized>(field: &V, point: &PhasePoint, dt: f64) -> Result<PhasePoint, DynamicsError> {
    check_step(dt)?;
    let x = point.coordinates();
    DimensionMismatch::check(field.dim().total(), x.len())?;
    let k1 = field.eval(x)?;
    let k2 = field.eval(&axpy(x, 0.5 * dt, &k1))?;
    let k3 = field.eval(&axpy(x, 0.5 * dt, &k2))?;
    let k4 = field.eval(&axpy(x, dt, &k3))?;
    let next: Vec<f64> = (0..x.len())
        .map(|i| x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    PhasePoint::new(next, point.time + dt)
}

/// Result of one implicit-midpoint step.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointStep {
    pub point: PhasePoint,
    pub iterations: usize,
}

/// Forward-difference Jacobian of `field` at `x`, step `1e-7 · max(1, ‖x‖)`.
fn fd_jacobian<V: VectorField + ?Sized>(field: &V, x: &[f64], fx: &[f64]) -> Result<RealMatrix, DynamicsError> {
    let size = x.len();
    let h = 1e-7 * max_norm(x).max(1.0);
    let mut jac = RealMatrix::zeros(size, size);
    let mut xp = x.to_vec();
    for c in 0..size {
        xp[c] = x[c] + h;
        let fp = field.eval(&xp)?;
        xp[c] = x[c];
        for r in 0..size {
            jac.set(r, c, (fp[r] - fx[r]) / h);
        }
    }
    Ok(jac)
}

/// Solves `y = x + dt · X((x + y)/2)` by Newton iteration.
///
/// Converged once the max-norm of the Newton update falls below
/// `tol · max(1, ‖y‖)`. The map is symplectic for any constant Ω.
pub fn step_implicit_midpoint<V: VectorField + ?Sized>(
    field: &V,
    point: &PhasePoint,
    dt: f64,
    options: NewtonOptions,
) -> Result<MidpointStep, DynamicsError> {
    check_step(dt)?;
    if !(options.tol > 0.0 && options.tol.is_finite()) {
        return Err(DynamicsError::InvalidTolerance(options.tol));
    }
    let x = point.coordinates();
    let size = x.len();
    DimensionMismatch::check(field.dim().total(), size)?;

    let midpoint = |y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| 0.5 * (a + b)).collect() };
    let residual_at = |y: &[f64], fm: &[f64]| -> Vec<f64> { (0..size).map(|i| y[i] - x[i] - dt * fm[i]).collect() };

    let mut y = x.to_vec();
    let mut residual_norm = f64::INFINITY;
    for iteration in 1..=options.max_iter {
        let mid = midpoint(&y);
        let f_mid = field.eval(&mid)?;
        let residual = residual_at(&y, &f_mid);
        residual_norm = max_norm(&residual);

        // G'(y) = I − (dt/2) J_X(mid)
        let jx = fd_jacobian(field, &mid, &f_mid)?;
        let jac = RealMatrix::from_fn(size, size, |r, c| {
            let id = if r == c { 1.0 } else { 0.0 };
            id - 0.5 * dt * jx.get(r, c)
        });
        let delta = jac.solve(&residual).ok_or(DynamicsError::SingularJacobian)?;
        for (yi, di) in y.iter_mut().zip(&delta) {
            *yi -= di;
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite { time: point.time + dt });
        }
        if max_norm(&delta) < options.tol * max_norm(&y).max(1.0) {
            return Ok(MidpointStep {
                point: PhasePoint::new(y, point.time + dt)?,
                iterations: iteration,
            });
        }
    }
    if !residual_norm.is_finite() {
        let f_mid = field.eval(&midpoint(&y))?;
        residual_norm = max_norm(&residual_at(&y, &f_mid));
    }
    Err(DynamicsError::NewtonDiverged {
        iterations: options.max_iter,
        residual: residual_norm,
    })
}

/// Advances `point` by one step of `method`.
pub fn step<V: VectorField + ?Sized>(
    field: &V,
    point: &PhasePoint,
    dt: f64,
    method: Method,
    newton: NewtonOptions,
) -> Result<PhasePoint, DynamicsError> {
    match method {
        Method::Rk4 => step_rk4(field, point, dt),
        Method::ImplicitMidpoint => step_implicit_midpoint(field, point, dt, newton).map(|s| s.point),
    }
}

/// Uniformly sampled integral curve, initial point included.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    points: Vec<PhasePoint>,
    step: f64,
    method: Method,
}

impl Trajectory {
    pub fn points(&self) -> &[PhasePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn first(&self) -> &PhasePoint {
        &self.points[0]
    }

    pub fn last(&self) -> &PhasePoint {
        self.points.last().expect("trajectory holds its initial point")
    }

    /// Rebuilds a trajectory from stored points, e.g. after reading a CSV.
    /// Samples must be uniformly spaced by `step` (to 1e-9 relative).
    pub fn from_points(points: Vec<PhasePoint>, step: f64, method: Method) -> Result<Self, DynamicsError> {
        check_step(step)?;
        if let Some(first) = points.first() {
            for (k, p) in points.iter().enumerate() {
                let expected = first.time + k as f64 * step;
                if (p.time - expected).abs() > 1e-9 * expected.abs().max(step) {
                    return Err(DynamicsError::InvalidStep(step));
                }
                DimensionMismatch::check(first.coordinates.len(), p.coordinates.len())?;
            }
        }
        Ok(Self { points, step, method })
    }
}

/// Integration failure, with everything computed before the failing step.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("integration failed at step {step}: {source}")]
pub struct IntegrationError {
    pub step: usize,
    pub source: DynamicsError,
    pub partial: Box<Trajectory>,
}

/// Takes `steps` steps of size `dt`. Sample times are `t0 + k·dt`.
pub fn integrate<V: VectorField + ?Sized>(
    field: &V,
    initial: PhasePoint,
    dt: f64,
    steps: usize,
    method: Method,
) -> Result<Trajectory, IntegrationError> {
    integrate_with(field, initial, dt, steps, method, NewtonOptions::default())
}

pub fn integrate_with<V: VectorField + ?Sized>(
    field: &V,
    initial: PhasePoint,
    dt: f64,
    steps: usize,
    method: Method,
    newton: NewtonOptions,
) -> Result<Trajectory, IntegrationError> {
    let t0 = initial.time;
    let mut traj = Trajectory {
        points: Vec::with_capacity(steps + 1),
        step: dt,
        method,
    };
    let fail = |step: usize, source: DynamicsError, traj: Trajectory| IntegrationError {
        step,
        source,
        partial: Box::new(traj),
    };
    if let Err(e) = check_step(dt) {
        traj.points.push(initial);
        return Err(fail(0, e, traj));
    }
    if steps == 0 {
        traj.points.push(initial);
        return Err(fail(0, DynamicsError::InvalidStep(0.0), traj));
    }
    traj.points.push(initial);
    for k in 0..steps {
        let current = traj.points.last().expect("nonempty");
        match step(field, current, dt, method, newton) {
            Ok(next) => {
                let next = next.with_time(t0 + (k + 1) as f64 * dt);
                traj.points.push(next);
            }
            Err(e) => return Err(fail(k + 1, e, traj)),
        }
    }
    Ok(traj)
}
