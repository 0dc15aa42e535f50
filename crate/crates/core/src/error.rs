use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("invalid spec: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("no expansion for the product of {0} with the next form")]
    UndefinedProduct(String),
    #[error("non-convergent word produced: {0}")]
    NonconvergentWord(String),
    #[error("word count {count} exceeds the guard {limit}")]
    TooManyWords { count: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("divergent word {0}")]
    DivergentWord(String),
    #[error("pole {0} too close to the segment")]
    PoleTooClose(String),
    #[error("division by zero")]
    DivisionByZero,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("invalid oracle configuration: {0}")]
    BadConfig(String),
    #[error("cutoff too small: error estimate {estimate} exceeds {limit}")]
    ConfigTooSmall { estimate: String, limit: String },
}

/// Umbrella error for pipeline entry points.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Other(String),
}
