//! Numerical engine for quantum statistical models given as a reference
//! density matrix plus self-adjoint operators: minimal sufficient real
//! *-subalgebras and real Jordan algebras, conditional expectations and
//! supporting operators, block-structure decompositions, and POVM
//! support-size bounds.
//!
//! All operators are dense complex matrices; the geometry throughout is
//! the real Hilbert–Schmidt inner product `⟨A,B⟩ = Re tr A*B`.

pub mod algebra;
pub mod matcore;
pub mod model;
pub mod sampling;
pub mod structure;
pub mod sufficiency;
pub mod verify;

pub use matcore::CMat;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },
    #[error("function undefined on retained eigenvalue {eigenvalue:.6e}")]
    FunctionUndefined { eigenvalue: f64 },
    #[error("not absolutely continuous with respect to rho (residual {residual:.3e})")]
    NotAbsolutelyContinuous { residual: f64 },
    #[error("X not in range of J_rho (residual {residual:.3e})")]
    NotInSldRange { residual: f64 },
    #[error("model has empty joint support")]
    EmptySupport,
    #[error("model is already restricted")]
    AlreadyRestricted,
    #[error("model must be restricted to its joint support first")]
    NotRestricted,
    #[error("subspace is missing required closure: {0}")]
    MissingClosure(&'static str),
    #[error("subspace is not modular invariant (basis element {index}, residual {residual:.3e})")]
    NotModularInvariant { index: usize, residual: f64 },
    #[error("map is not sufficient for the model (residual {residual:.3e})")]
    NotSufficient { residual: f64 },
    #[error("map is not positive (defect {0:.3e})")]
    NotPositiveMap(f64),
    #[error("map is not unital (defect {0:.3e})")]
    NotUnital(f64),
    #[error("certificate invariant violated: {check} = {value:.3e} (tol {tol:.1e})")]
    CertificateInvariant {
        check: String,
        value: f64,
        tol: f64,
    },
    #[error("structure identification failed: {0}")]
    Classification(String),
    #[error("internal consistency check failed: {0}")]
    InternalConsistency(String),
    #[error("POVM does not resolve the identity (residual {0:.3e})")]
    PovmNotResolution(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
