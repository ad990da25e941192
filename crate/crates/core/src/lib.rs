//! Ginzburg-Landau vortices on closed Riemannian surfaces.
//!
//! The crate builds canonical harmonic unit tangent fields from prescribed
//! vortex data, evaluates the renormalized interaction energy of a vortex
//! configuration two independent ways, computes the core profile constant
//! of the potential, minimizes the full epsilon-energy, and verifies the
//! second-order energy expansion at mesh resolution.
//!
//! Module layout mirrors the pipeline: [`surface`] holds meshes and metric
//! primitives, [`exterior`] the discrete exterior calculus, [`connection`]
//! parallel transport and tangent fields, [`topology`] homology generators
//! and the harmonic basis, [`potential`] Green's functions and curvature
//! potentials, [`canonical`] the canonical field construction, [`renorm`]
//! the renormalized energy, [`profile`] the radial core problem, and
//! [`glsolver`] full energy minimization.

pub mod canonical;
pub mod cli;
pub mod connection;
pub mod exterior;
pub mod glsolver;
pub mod potential;
pub mod profile;
pub mod renorm;
pub mod sparse;
pub mod surface;
pub mod topology;

/// Crate-wide error type. The CLI maps `Config`-class errors to exit code 2
/// and numerical failures to exit code 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("mesh error: {0}")]
    Mesh(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
