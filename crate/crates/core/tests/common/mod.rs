#![allow(dead_code)]

use qk_core::dynamics::{HamiltonianSystem, PhasePoint};
use qk_core::expr::ScalarField;
use qk_core::structure::{BlockDim, Label};
use qk_oracles::Flavor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const BUILTIN_HAMILTONIANS: [&str; 3] = ["0.5*(x1^2 + x2^2 + x3^2 + x4^2)", "x1*x2 + x3^4", "sin(x1) + exp(x2)/4"];

pub fn dim(n: usize) -> BlockDim {
    BlockDim::new(n).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut impl Rng, size: usize, half_width: f64) -> Vec<f64> {
    (0..size).map(|_| rng.gen_range(-half_width..=half_width)).collect()
}

/// `½ Σ x_a²` over all 4n coordinates.
pub fn quadratic_text(n: usize) -> String {
    let terms: Vec<String> = (1..=4 * n).map(|a| format!("x{a}^2")).collect();
    format!("0.5*({})", terms.join(" + "))
}

pub fn field(text: &str, n: usize) -> ScalarField {
    ScalarField::parse(text, dim(n)).unwrap()
}

pub fn system(label: Label, text: &str, n: usize) -> HamiltonianSystem {
    HamiltonianSystem::new(label, field(text, n))
}

pub fn point(coords: &[f64]) -> PhasePoint {
    PhasePoint::new(coords.to_vec(), 0.0).unwrap()
}

pub fn flavor(label: Label) -> Flavor {
    match label {
        Label::F => Flavor::F,
        Label::G => Flavor::G,
        Label::H => Flavor::H,
    }
}
