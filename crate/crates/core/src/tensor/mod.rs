//! Charts, frames and dense tensors.
//!
//! Charts map chart coordinates to ambient Cartesian coordinates. A frame is
//! a chart evaluated at a point; its Jacobian columns are the covariant basis
//! vectors, from which the dual basis and the induced metric `JᵀJ` follow.
//! Tensors carry a variance signature and row-major components relative to a
//! frame. All indexes are 1-based at the API surface; slot positions are
//! 0-based.

mod chart;
mod frame;
mod ops;
mod value;

use thiserror::Error;

use crate::autodiff::ScalarError;

pub use chart::{builtin_chart, cartesian_chart, polar_chart, spherical_chart, Chart, ChartFile};
pub use frame::{make_frame, Frame};
pub use ops::{
    contract, cross_product, kronecker, levi_civita, levi_civita_capped, lower_index, norm_sq,
    permutation_sign, raise_index, tensor_product, transform, LEVI_CIVITA_MAX_DIM,
};
pub use value::{
    component_count, row_major_offset, FrameTag, IndexKind, TensorValue, Variance, MAX_COMPONENTS,
};

/// Two frames describe the same point when their ambient coordinates agree
/// to this absolute tolerance.
pub const POINT_TOLERANCE: f64 = 1e-9;

/// Bases with `|det| <` this are rejected as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Configurable caps on tensor shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_order: usize,
    pub max_dim: usize,
    pub max_levi_civita_dim: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_order: 8,
            max_dim: 16,
            max_levi_civita_dim: LEVI_CIVITA_MAX_DIM,
        }
    }
}

impl Limits {
    pub fn check(&self, t: &TensorValue) -> Result<(), TensorError> {
        if t.order() > self.max_order {
            return Err(TensorError::SizeLimit {
                what: "tensor order",
                value: t.order(),
                cap: self.max_order,
            });
        }
        if t.dim() > self.max_dim {
            return Err(TensorError::SizeLimit {
                what: "dimension",
                value: t.dim(),
                cap: self.max_dim,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TensorError {
    #[error("dimension must be positive, got {0}")]
    BadDimension(usize),
    #[error("{what} {value} exceeds the cap of {cap}")]
    SizeLimit {
        what: &'static str,
        value: usize,
        cap: usize,
    },
    #[error("dimension mismatch: {left} vs {right}")]
    DimMismatch { left: usize, right: usize },
    #[error("frame mismatch: {left} vs {right}")]
    FrameMismatch { left: String, right: String },
    #[error("variance mismatch: {0}")]
    VarianceMismatch(String),
    #[error("slot {slot} is not valid for a tensor of order {order}")]
    BadSlot { slot: usize, order: usize },
    #[error("tensor has no frame to transform from")]
    UnspecifiedFrame,
    #[error("frames {from} and {to} are anchored at different points (distance {distance:e})")]
    PointMismatch {
        from: String,
        to: String,
        distance: f64,
    },
    #[error("chart {chart} is singular at {point:?} (det {det:e})")]
    SingularChart {
        chart: String,
        point: Vec<f64>,
        det: f64,
    },
    #[error("{expected} components expected, found {found}")]
    ComponentCount { expected: usize, found: usize },
    #[error("index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("{found} indexes given for a tensor of order {expected}")]
    IndexCount { expected: usize, found: usize },
    #[error("invalid chart: {0}")]
    BadChart(String),
    #[error(transparent)]
    Domain(#[from] ScalarError),
}

impl TensorError {
    /// Stable diagnostic code.
    pub fn code(&self) -> &'static str {
        match self {
            TensorError::BadDimension(_) => "BadDimension",
            TensorError::SizeLimit { .. } => "SizeLimit",
            TensorError::DimMismatch { .. } => "DimMismatch",
            TensorError::FrameMismatch { .. } => "FrameMismatch",
            TensorError::VarianceMismatch(_) => "VarianceMismatch",
            TensorError::BadSlot { .. } => "BadSlot",
            TensorError::UnspecifiedFrame => "UnspecifiedFrame",
            TensorError::PointMismatch { .. } => "PointMismatch",
            TensorError::SingularChart { .. } => "SingularChart",
            TensorError::ComponentCount { .. } => "ComponentCount",
            TensorError::IndexOutOfRange { .. } => "IndexOutOfRange",
            TensorError::IndexCount { .. } => "IndexCountMismatch",
            TensorError::BadChart(_) => "BadChart",
            TensorError::Domain(_) => "DomainError",
        }
    }
}
