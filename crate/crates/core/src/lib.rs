//! conetrace: exact and regularized calculus for classical
//! pseudodifferential symbols on ℝⁿ and the flat torus.
//!
//! Layers, bottom up:
//! - [`scalar`], [`poly`]: exact coefficient ring Q(i)[√π^{±1}] and sparse
//!   polynomials.
//! - [`homog`]: homogeneous / log-polyhomogeneous functions on ℝⁿ∖{0} in
//!   harmonic normal form; residues and derivative decompositions.
//! - [`forms`]: homogeneous differential forms, Euler primitives, the
//!   degree-zero splitting, sphere integrals.
//! - [`symbols`]: classical symbols behind a fixed cut-off χ, the cut-off
//!   integral, Schwartz-function decompositions into partial derivatives.
//! - [`symp`]: the symplectic cone T*𝕋ⁿ∖0 — Poisson brackets, symplectic
//!   residue, spanning frames, and the constructive bracket decomposition.
//! - [`psido`]: torus pseudodifferential operators — quantization,
//!   composition, commutators, L²/residue/regularized traces, the TRb
//!   dispatch, commutator representations, and trace classification fitters.
//! - [`bundle`]: matrix-valued operators, τ⊗tr_N, idempotent compressions.
//! - [`schema`], [`report`], [`verify`]: problem-file (de)serialization,
//!   JSON reports, and the randomized verification suites behind the CLI.

pub mod error;
pub mod scalar;
pub mod poly;
pub mod homog;
pub mod forms;
pub mod quad;
pub mod chi;
pub mod symbols;
pub mod cone;
pub mod symp;
pub mod lattice;

pub use error::{CtError, CtResult};
