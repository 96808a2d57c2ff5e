use crate::point::Point2;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode of the engine. Domain errors (`DegeneratePoint`,
/// `LogDomain`, `PowerDomain`, ...) mark masked points; cloud evaluators skip
/// and count them instead of aborting.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("singular point of expression at ({}, {}): {what}", at.x, at.y)]
    SingularPoint { what: String, at: Point2 },
    #[error("grid node ({i}, {j}) is within the {margin}-cell boundary margin")]
    BoundaryMargin { i: usize, j: usize, margin: usize },
    #[error("degenerate point: |rho| = {rho:e} below threshold")]
    DegeneratePoint { rho: f64 },
    #[error("log domain: {what} = {value:e} too close to zero")]
    LogDomain { what: &'static str, value: f64 },
    #[error("power domain: negative base {base:e} under non-integer exponent {exponent}")]
    PowerDomain { base: f64, exponent: f64 },
    #[error("singular metric: |det G| = {det:e} below threshold")]
    SingularMetric { det: f64 },
    #[error("spectral pole: k^2 + sigma = {value:e} at k = {k}")]
    SpectralPole { k: f64, value: f64 },
    #[error("transport path crosses a masked point at ({}, {})", at.x, at.y)]
    MaskedPath { at: Point2 },
    #[error("surface is not minimal here: |residual| = {residual:e}")]
    NotMinimal { residual: f64 },
    #[error("unknown catalog surface `{name}`")]
    UnknownSurface { name: String },
    #[error("Newton iteration did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("rho crossed zero during Newton iteration {iteration}")]
    DegenerateIterate { iteration: usize },
    #[error("metric signature changes across the sample set")]
    SignatureJump,
    #[error("constraint violation: {message}")]
    ConstraintViolation { message: String },
    #[error("invalid configuration: {message}")]
    ConfigInvalid { message: String },
    #[error("dependency failed for check `{check}`: {reason}")]
    DependencyFailed { check: String, reason: String },
    #[error("parse error: {message}")]
    Parse { message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Domain errors mark a masked evaluation point rather than a defect.
    pub fn is_masked_point(&self) -> bool {
        matches!(
            self,
            Error::SingularPoint { .. }
                | Error::DegeneratePoint { .. }
                | Error::LogDomain { .. }
                | Error::PowerDomain { .. }
                | Error::SingularMetric { .. }
        )
    }
}
