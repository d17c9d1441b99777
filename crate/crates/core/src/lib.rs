//! Finite-dimensional Hilbert C*-bimodule engine.
//!
//! The crate models finite direct sums of complex matrix blocks as C*-algebras,
//! finitely generated projective Hilbert bimodules over them, tensor-category
//! data extracted from concrete bimodule families, graded *-algebra objects,
//! and the reduced crossed products these ingredients generate at a finite
//! grading window. On top of that sit check suites that verify structural
//! identities (Frobenius reciprocity dimension counts, Peter-Weyl
//! multiplicities, Pimsner-Popa inequalities, Galois lattices, freeness
//! estimates) on concrete model families: finite group actions, truncated
//! Cuntz-algebra cores, and truncated operator-valued semicircular systems.

pub mod algebra;
pub mod algebra_object;
pub mod bimodule;
pub mod config;
pub mod crossed_product;
#[path = "examples/mod.rs"]
pub mod examples;
pub mod linalg;
pub mod report;
pub mod runner;
pub mod tensor_cat;

pub use algebra::{AlgebraElement, MatrixCStarAlgebra};
pub use bimodule::{BimoduleVector, FgpBimodule, Intertwiner};

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("grading window overflow: {0}")]
    WindowOverflow(String),
    #[error("module is not left fgp at this truncation: {0}")]
    NotLeftFgp(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("search space too large: {0}")]
    SearchCap(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
