//! Independent numerical oracles for the test suites.
//!
//! Nothing here touches the simulator's own code paths: linear solves go
//! through nalgebra's LU, the matrix exponential is a plain Taylor series
//! with scaling and squaring, and the equations of motion are written out
//! blockwise from Hamilton's equations rather than from a matrix solve.

pub use nalgebra::{DMatrix, DVector};

/// Which of the three quaternionic Hamilton systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flavor {
    F,
    G,
    H,
}

pub const FLAVORS: [Flavor; 3] = [Flavor::F, Flavor::G, Flavor::H];

/// `exp(A)` by scaling and squaring a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let size = a.nrows();
    let norm = a.iter().fold(0.0f64, |m, x| m.max(x.abs())) * size as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut term = DMatrix::identity(size, size);
    let mut sum = DMatrix::identity(size, size);
    for k in 1..=30 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Solves `A x = b` by LU decomposition.
pub fn lu_solve(a: &DMatrix<f64>, b: &[f64]) -> Option<Vec<f64>> {
    a.clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .map(|x| x.iter().copied().collect())
}

/// Generator `K` of the linear equations of motion `ẋ = K x` for a
/// quadratic Hamiltonian `H = ½ xᵀ A x`, read off the Hamilton equations
/// blockwise (`dx_i/dt = −∂H/∂x_{n+i}` and so on).
pub fn hamilton_generator(flavor: Flavor, n: usize, hessian: &DMatrix<f64>) -> DMatrix<f64> {
    let size = 4 * n;
    assert_eq!(hessian.shape(), (size, size));
    // For each target block: (source block of the partial derivative, sign).
    let rules: [(usize, f64); 4] = match flavor {
        Flavor::F => [(1, -1.0), (0, 1.0), (3, -1.0), (2, 1.0)],
        Flavor::G => [(2, -1.0), (3, 1.0), (0, 1.0), (1, -1.0)],
        Flavor::H => [(3, -1.0), (2, -1.0), (1, 1.0), (0, 1.0)],
    };
    let mut k = DMatrix::zeros(size, size);
    for (target, (source, sign)) in rules.into_iter().enumerate() {
        for i in 0..n {
            // ∂H/∂x_s = row s of A applied to x.
            let row = hessian.row(source * n + i);
            k.row_mut(target * n + i).copy_from(&(row * sign));
        }
    }
    k
}

/// Expected symplectic matrix `Ω` for each flavor, written out from the
/// wedge expansions `dx_{n+i}∧dx_i + dx_{3n+i}∧dx_{2n+i}` (F),
/// `dx_{2n+i}∧dx_i + dx_{n+i}∧dx_{3n+i}` (G) and
/// `dx_{3n+i}∧dx_i + dx_{2n+i}∧dx_{n+i}` (H), with
/// `(dx_a∧dx_b)(u,v) = u_a v_b − u_b v_a`.
pub fn expected_omega(flavor: Flavor, n: usize) -> DMatrix<f64> {
    let wedges: [(usize, usize); 2] = match flavor {
        Flavor::F => [(1, 0), (3, 2)],
        Flavor::G => [(2, 0), (1, 3)],
        Flavor::H => [(3, 0), (2, 1)],
    };
    let mut omega = DMatrix::zeros(4 * n, 4 * n);
    for (a, b) in wedges {
        for i in 0..n {
            omega[(a * n + i, b * n + i)] += 1.0;
            omega[(b * n + i, a * n + i)] -= 1.0;
        }
    }
    omega
}

/// Central-difference Jacobian of `f` at `x`.
pub fn central_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64) -> DMatrix<f64> {
    let size = x.len();
    let mut jac = DMatrix::zeros(f(x).len(), size);
    let mut xp = x.to_vec();
    for c in 0..size {
        xp[c] = x[c] + h;
        let plus = f(&xp);
        xp[c] = x[c] - h;
        let minus = f(&xp);
        xp[c] = x[c];
        for r in 0..plus.len() {
            jac[(r, c)] = (plus[r] - minus[r]) / (2.0 * h);
        }
    }
    jac
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}
