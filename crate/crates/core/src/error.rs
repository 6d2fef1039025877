use thiserror::Error;

pub type Result<T> = std::result::Result<T, DiracError>;

/// Failures reported by the numerical routines.
///
/// [`DiracError::is_validation`] separates bad input from numerical
/// breakdown; the command line maps the two to different exit codes.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiracError {
    #[error("RankDeficient: boundary matrix does not have rank 2")]
    RankDeficient,
    #[error("NonRegularInput: boundary conditions are not regular")]
    NonRegularInput,
    #[error("SingularPoint: power channel evaluated at x = 0")]
    SingularPoint,
    #[error("MeshMismatch: x = {0} lies outside the mesh")]
    MeshMismatch(f64),
    #[error("DeterminantDrift: |det E - 1| = {0:e}")]
    DeterminantDrift(f64),
    #[error("ZeroOnContour: |Δ| vanishes at a contour node")]
    ZeroOnContour,
    #[error("NonConvergedWinding: phase refinement exceeded the node budget")]
    NonConvergedWinding,
    #[error("CountMismatch: found {found} zeros for {expected} indices")]
    CountMismatch { found: usize, expected: usize },
    #[error("NearEigenvalue: λ is within the eigenvalue tolerance")]
    NearEigenvalue,
    #[error("ContourSeparationFailure: no admissible circle around group {0}")]
    ContourSeparationFailure(i64),
    #[error("DefectiveEigenvalue: eigenvalue {0} has a Jordan chain; use the projector range")]
    DefectiveEigenvalue(i64),
    #[error("PairingDegenerate: ⟨y_n, z_n⟩ vanishes for n = {0}")]
    PairingDegenerate(i64),
    #[error("ZeroFunction: function has zero norm")]
    ZeroFunction,
    #[error("NewtonFailure: refinement did not converge near {0}")]
    NewtonFailure(String),
    #[error("InvalidInput: {0}")]
    InvalidInput(String),
}

impl DiracError {
    /// Short error name, as printed by the command line.
    pub fn name(&self) -> &'static str {
        match self {
            DiracError::RankDeficient => "RankDeficient",
            DiracError::NonRegularInput => "NonRegularInput",
            DiracError::SingularPoint => "SingularPoint",
            DiracError::MeshMismatch(_) => "MeshMismatch",
            DiracError::DeterminantDrift(_) => "DeterminantDrift",
            DiracError::ZeroOnContour => "ZeroOnContour",
            DiracError::NonConvergedWinding => "NonConvergedWinding",
            DiracError::CountMismatch { .. } => "CountMismatch",
            DiracError::NearEigenvalue => "NearEigenvalue",
            DiracError::ContourSeparationFailure(_) => "ContourSeparationFailure",
            DiracError::DefectiveEigenvalue(_) => "DefectiveEigenvalue",
            DiracError::PairingDegenerate(_) => "PairingDegenerate",
            DiracError::ZeroFunction => "ZeroFunction",
            DiracError::NewtonFailure(_) => "NewtonFailure",
            DiracError::InvalidInput(_) => "InvalidInput",
        }
    }

    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            DiracError::RankDeficient
                | DiracError::NonRegularInput
                | DiracError::SingularPoint
                | DiracError::MeshMismatch(_)
                | DiracError::ZeroFunction
                | DiracError::InvalidInput(_)
        )
    }
}
