use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VstateError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole of the gamma function at {0}")]
    Pole(f64),
    #[error("hypergeometric series diverges at z = 1 (c - a - b = {0})")]
    Divergence(f64),
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),
    #[error("negative discriminant {0}")]
    NegativeDiscriminant(f64),
    #[error("omega = {omega} is not an eigenvalue (det = {det})")]
    NotAnEigenvalue { omega: f64, det: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("newton did not converge after {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("singular jacobian (condition estimate {0:e})")]
    SingularJacobian(f64),
    #[error("coincident points in arclength tagging")]
    CoincidentPoints,
    #[error("continuation prediction failed after {0} step halvings")]
    PredictionFailure(usize),
    #[error("io error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

impl VstateError {
    pub fn domain(msg: impl Into<String>) -> Self {
        VstateError::Domain(msg.into())
    }

    pub fn is_geometry(&self) -> bool {
        matches!(self, VstateError::Geometry(_))
    }

    pub fn is_convergence(&self) -> bool {
        matches!(
            self,
            VstateError::MaxIterations { .. }
                | VstateError::SingularJacobian(_)
                | VstateError::NonConvergence(_)
                | VstateError::PredictionFailure(_)
        )
    }
}

impl From<std::io::Error> for VstateError {
    fn from(e: std::io::Error) -> Self {
        VstateError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, VstateError>;
