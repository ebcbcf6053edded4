//! Hamiltonian mechanics on the flat quaternionic model space R^{4n}.
//!
//! - [`structure`]: the structure tensors F, G, H and their duals, with exact
//!   checks of the quaternion relations.
//! - [`forms`]: Liouville forms, exterior derivative, the symplectic forms
//!   `Φ = −d(φ*(ω))` and the metric forms `g(φX, Y)`.
//! - [`expr`]: the Hamiltonian expression language and dual-number gradients.
//! - [`dynamics`]: solving `i_X Φ = dH` and integrating the flow.
//! - [`diagnostics`]: energy drift, equation-of-motion and symplecticity residuals.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod expr;
pub mod forms;
pub mod linalg;
pub mod structure;

pub use error::DimensionMismatch;
