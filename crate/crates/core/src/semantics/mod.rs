//! Validation and evaluation of tensor1 formulas against an environment of
//! charts, frames and bound values.
//!
//! Diagnostic codes:
//!
//! | code | severity | meaning |
//! |------|----------|---------|
//! | `ArityMismatch` | error | wrong number of arguments, or a function symbol used bare |
//! | `UnsupportedSymbol` | error | symbol outside the supported dictionaries |
//! | `IndexCountMismatch` | error | index tuple length differs from the tensor order |
//! | `BadIndexTuple` | error | `tensor_selector` indexes are not a tuple of index applications |
//! | `BadBasisIndex` | error | `basis_selector` not given a `contra_index`/`covar_index` |
//! | `ImplicitEinstein` | error | an index variable used both up and down without a binder |
//! | `IndexOutOfRange` | error | index literal below 1 or above the known dimension |
//! | `CoordinateTupleNotVector` | warning | `vector_selector` applied to a coordinate tuple |
//!
//! Evaluation errors use [`EvalError::code`], which adds `UnboundVariable`,
//! `FrameRequired`, `TypeMismatch`, `DomainError` and the tensor error codes.

mod curl;
mod env;
mod eval;
mod validate;
mod value;

use std::fmt;

use thiserror::Error;

use crate::om::SourceSpan;
use crate::tensor::TensorError;

pub use curl::check_curl_cartesian;
pub use env::{ChartSpec, EnvError, EnvFile, Environment, FrameSpec, TensorSpec};
pub use eval::evaluate;
pub use validate::validate;
pub use value::{Value, ValueJsonError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    pub span: SourceSpan,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: &'static str, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// `severity code line:col message`
impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.severity.as_str(),
            self.code,
            self.span,
            self.message
        )
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalErrorKind {
    #[error("unbound variable {0}")]
    UnboundVariable(String),
    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: i64, dim: usize },
    #[error("{0} needs a frame")]
    FrameRequired(String),
    #[error("{0}")]
    TypeMismatch(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} at {span}: {kind}", self.code())]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub span: SourceSpan,
}

impl EvalError {
    pub fn new(kind: impl Into<EvalErrorKind>, span: SourceSpan) -> Self {
        EvalError {
            kind: kind.into(),
            span,
        }
    }

    pub fn code(&self) -> &'static str {
        match &self.kind {
            EvalErrorKind::UnboundVariable(_) => "UnboundVariable",
            EvalErrorKind::IndexOutOfRange { .. } => "IndexOutOfRange",
            EvalErrorKind::FrameRequired(_) => "FrameRequired",
            EvalErrorKind::TypeMismatch(_) => "TypeMismatch",
            EvalErrorKind::Unsupported(_) => "UnsupportedSymbol",
            EvalErrorKind::Domain(_) => "DomainError",
            EvalErrorKind::Tensor(e) => e.code(),
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::error(self.code(), self.kind.to_string(), self.span)
    }
}
