use std::fmt;
use std::sync::Arc;

use super::{Frame, TensorError};

/// Upper bound on stored components, whatever the configured order and
/// dimension caps allow.
pub const MAX_COMPONENTS: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Contra,
    Covar,
}

impl Variance {
    pub fn flipped(self) -> Self {
        match self {
            Variance::Contra => Variance::Covar,
            Variance::Covar => Variance::Contra,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variance::Contra => "contra",
            Variance::Covar => "covar",
        }
    }
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A contravariant or covariant index with its 1-based value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IndexKind {
    pub variance: Variance,
    pub value: usize,
}

impl IndexKind {
    pub fn contra(value: usize) -> Self {
        IndexKind {
            variance: Variance::Contra,
            value,
        }
    }

    pub fn covar(value: usize) -> Self {
        IndexKind {
            variance: Variance::Covar,
            value,
        }
    }
}

impl fmt::Display for IndexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_index({})", self.variance, self.value)
    }
}

/// The frame a tensor's components refer to.
#[derive(Debug, Clone)]
pub enum FrameTag {
    Unspecified,
    Frame(Arc<Frame>),
}

impl FrameTag {
    pub fn frame(&self) -> Option<&Arc<Frame>> {
        match self {
            FrameTag::Frame(f) => Some(f),
            FrameTag::Unspecified => None,
        }
    }

    pub fn label(&self) -> Option<&str> {
        self.frame().map(|f| f.label())
    }

    /// Same frame, or both unspecified.
    pub fn same_as(&self, other: &FrameTag) -> bool {
        match (self, other) {
            (FrameTag::Unspecified, FrameTag::Unspecified) => true,
            (FrameTag::Frame(a), FrameTag::Frame(b)) => a.same_frame(b),
            _ => false,
        }
    }
}

impl PartialEq for FrameTag {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl From<Arc<Frame>> for FrameTag {
    fn from(f: Arc<Frame>) -> Self {
        FrameTag::Frame(f)
    }
}

/// Dense tensor components in row-major order (rightmost index fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorValue {
    dim: usize,
    signature: Vec<Variance>,
    components: Vec<f64>,
    frame: FrameTag,
}

/// `dim^order`, or `None` on overflow or when above [`MAX_COMPONENTS`].
pub fn component_count(dim: usize, order: usize) -> Option<usize> {
    let order = u32::try_from(order).ok()?;
    dim.checked_pow(order).filter(|&n| n <= MAX_COMPONENTS)
}

/// Linear offset of a 1-based multi-index.
pub fn row_major_offset(indexes: &[usize], dim: usize) -> Result<usize, TensorError> {
    let mut offset = 0usize;
    for &i in indexes {
        if i == 0 || i > dim {
            return Err(TensorError::IndexOutOfRange { index: i, dim });
        }
        offset = offset * dim + (i - 1);
    }
    Ok(offset)
}

/// 0-based multi-index of a linear offset; inverse of [`row_major_offset`] up to the 1-based shift.
pub(crate) fn unravel(mut offset: usize, dim: usize, order: usize) -> Vec<usize> {
    let mut idx = vec![0; order];
    for slot in (0..order).rev() {
        idx[slot] = offset % dim;
        offset /= dim;
    }
    idx
}

impl TensorValue {
    pub fn new(
        dim: usize,
        signature: Vec<Variance>,
        components: Vec<f64>,
        frame: FrameTag,
    ) -> Result<Self, TensorError> {
        if dim == 0 {
            return Err(TensorError::BadDimension(dim));
        }
        let expected = component_count(dim, signature.len()).ok_or(TensorError::SizeLimit {
            what: "component count",
            value: dim.saturating_pow(signature.len().min(64) as u32),
            cap: MAX_COMPONENTS,
        })?;
        if components.len() != expected {
            return Err(TensorError::ComponentCount {
                expected,
                found: components.len(),
            });
        }
        if let FrameTag::Frame(f) = &frame {
            if f.dim() != dim {
                return Err(TensorError::DimMismatch {
                    left: dim,
                    right: f.dim(),
                });
            }
        }
        Ok(TensorValue {
            dim,
            signature,
            components,
            frame,
        })
    }

    /// Order-0 tensor.
    pub fn scalar(value: f64, dim: usize, frame: FrameTag) -> Result<Self, TensorError> {
        Self::new(dim, Vec::new(), vec![value], frame)
    }

    /// Order-1 tensor from its components.
    pub fn vector(
        variance: Variance,
        components: Vec<f64>,
        frame: FrameTag,
    ) -> Result<Self, TensorError> {
        Self::new(components.len(), vec![variance], components, frame)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.signature.len()
    }

    pub fn signature(&self) -> &[Variance] {
        &self.signature
    }

    pub fn components(&self) -> &[f64] {
        &self.components
    }

    pub fn frame(&self) -> &FrameTag {
        &self.frame
    }

    /// Component at a 1-based multi-index.
    pub fn component(&self, indexes: &[usize]) -> Result<f64, TensorError> {
        if indexes.len() != self.order() {
            return Err(TensorError::IndexCount {
                expected: self.order(),
                found: indexes.len(),
            });
        }
        Ok(self.components[row_major_offset(indexes, self.dim)?])
    }

    /// Value of an order-0 tensor.
    pub fn as_scalar(&self) -> Option<f64> {
        (self.order() == 0).then(|| self.components[0])
    }

    /// Same components, reinterpreted as referring to `frame`.
    pub fn in_frame(&self, frame: FrameTag) -> Result<Self, TensorError> {
        Self::new(
            self.dim,
            self.signature.clone(),
            self.components.clone(),
            frame,
        )
    }

    pub(crate) fn with_parts(
        &self,
        signature: Vec<Variance>,
        components: Vec<f64>,
        frame: FrameTag,
    ) -> Self {
        debug_assert_eq!(components.len(), self.dim.pow(signature.len() as u32));
        TensorValue {
            dim: self.dim,
            signature,
            components,
            frame,
        }
    }

    pub fn map_components(&self, f: impl Fn(f64) -> f64) -> Self {
        let comps = self.components.iter().map(|&c| f(c)).collect();
        self.with_parts(self.signature.clone(), comps, self.frame.clone())
    }
}
