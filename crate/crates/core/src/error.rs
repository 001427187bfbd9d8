use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A numerical procedure could not reach its accuracy target.
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("degenerate denominator in {0}")]
    Degenerate(String),
    /// The root residual did not change sign over the search interval.
    #[error("no sign change: {0}")]
    Bracket(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    /// True for failures of numerical procedures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Accuracy(_) | Error::Degenerate(_) | Error::Bracket(_)
        )
    }
}
