use thiserror::Error;

/// Errors raised by the algebra kernel.
///
/// Every variant maps to a stable machine-readable [`Error::kind`] so that
/// front ends can report failures without string matching.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("no value bound for variable {0}")]
    MissingBinding(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },

    #[error("invalid tableau shape: {0}")]
    Shape(String),

    #[error("tableau violates {rule} at {positions:?}")]
    FillingRule {
        rule: &'static str,
        positions: Vec<(usize, usize)>,
    },

    #[error("generator index {index} out of range 1..={max}")]
    IndexOutOfRange { index: u32, max: u32 },

    #[error("element is not multihomogeneous")]
    NotHomogeneous,

    #[error("element is not homogeneous of multidegree {expected:?}")]
    WrongMultidegree { expected: Vec<u32> },

    #[error("inconsistent linear system: {0}")]
    Inconsistent(String),

    #[error("not the (f, g) pair of any Novikov tableau: {0}")]
    NotATableau(String),

    #[error("degree {degree} exceeds the configured cap {cap}")]
    DegreeCap { degree: usize, cap: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("no rational regular point within the search bounds: {0}")]
    FieldObstruction(String),

    #[error("integer too large to factor: {0}")]
    TooLarge(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Malformed(_) => "malformed-input",
            Error::Empty(_) => "empty-input",
            Error::MissingBinding(_) => "missing-binding",
            Error::DivisionByZero => "division-by-zero",
            Error::Parse { .. } => "syntax-error",
            Error::Shape(_) => "shape-mismatch",
            Error::FillingRule { .. } => "invalid-tableau",
            Error::IndexOutOfRange { .. } => "index-out-of-range",
            Error::NotHomogeneous => "not-homogeneous",
            Error::WrongMultidegree { .. } => "not-homogeneous",
            Error::Inconsistent(_) => "inconsistent-system",
            Error::NotATableau(_) => "not-a-tableau",
            Error::DegreeCap { .. } => "degree-cap",
            Error::Precondition(_) => "precondition-violated",
            Error::SearchExhausted(_) => "search-exhausted",
            Error::Hypothesis(_) => "hypothesis-violated",
            Error::FieldObstruction(_) => "field-obstruction",
            Error::TooLarge(_) => "too-large",
            Error::Stage { source, .. } => source.kind(),
        }
    }

    /// Name of the pipeline stage that failed, if the error was tagged with one.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }

    pub(crate) fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
