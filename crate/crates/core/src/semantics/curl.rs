use std::sync::Arc;

use nalgebra::Matrix3;

use crate::tensor::{levi_civita, Frame, FrameTag, TensorError, TensorValue, Variance};

/// `(curl v)_i = Σ_jk ε_ijk ∂_j v^k` from the partials `d[(k, j)] = ∂_j v^k`,
/// in a Cartesian 3-frame where upper and lower components coincide. The
/// result carries a covariant slot, like [`crate::tensor::cross_product`].
pub fn check_curl_cartesian(
    partials: &Matrix3<f64>,
    frame: &Arc<Frame>,
) -> Result<TensorValue, TensorError> {
    if frame.dim() != 3 {
        return Err(TensorError::DimMismatch {
            left: frame.dim(),
            right: 3,
        });
    }
    if !frame.is_cartesian() {
        return Err(TensorError::FrameMismatch {
            left: frame.label().to_owned(),
            right: "a Cartesian 3-frame".to_owned(),
        });
    }
    let eps = levi_civita(3)?;
    let eps = eps.components();
    let mut w = vec![0.0; 3];
    for (i, wi) in w.iter_mut().enumerate() {
        for j in 0..3 {
            for k in 0..3 {
                *wi += eps[i * 9 + j * 3 + k] * partials[(k, j)];
            }
        }
    }
    TensorValue::vector(Variance::Covar, w, FrameTag::Frame(Arc::clone(frame)))
}
