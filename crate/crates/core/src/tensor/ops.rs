use std::sync::Arc;

use nalgebra::DMatrix;

use super::value::{component_count, unravel};
use super::{Frame, FrameTag, TensorError, TensorValue, Variance};

/// Default cap on the Levi-Civita dimension (`n^n` components).
pub const LEVI_CIVITA_MAX_DIM: usize = 6;

/// Mixed identity tensor `δ^i_j`, frame independent.
pub fn kronecker(n: usize) -> Result<TensorValue, TensorError> {
    if n == 0 {
        return Err(TensorError::BadDimension(0));
    }
    let mut comps = vec![0.0; n * n];
    for i in 0..n {
        comps[i * n + i] = 1.0;
    }
    TensorValue::new(
        n,
        vec![Variance::Contra, Variance::Covar],
        comps,
        FrameTag::Unspecified,
    )
}

/// Sign of the permutation given by a 0-based index tuple, or 0 on repeats.
pub fn permutation_sign(indexes: &[usize]) -> f64 {
    let mut sign = 1.0;
    for a in 0..indexes.len() {
        for b in a + 1..indexes.len() {
            match indexes[a].cmp(&indexes[b]) {
                std::cmp::Ordering::Equal => return 0.0,
                std::cmp::Ordering::Greater => sign = -sign,
                std::cmp::Ordering::Less => {}
            }
        }
    }
    sign
}

/// Permutation symbol of order `n`, all slots covariant.
pub fn levi_civita(n: usize) -> Result<TensorValue, TensorError> {
    levi_civita_capped(n, LEVI_CIVITA_MAX_DIM)
}

pub fn levi_civita_capped(n: usize, cap: usize) -> Result<TensorValue, TensorError> {
    if n == 0 {
        return Err(TensorError::BadDimension(0));
    }
    if n > cap {
        return Err(TensorError::SizeLimit {
            what: "Levi-Civita dimension",
            value: n,
            cap,
        });
    }
    let count = component_count(n, n).ok_or(TensorError::SizeLimit {
        what: "Levi-Civita dimension",
        value: n,
        cap,
    })?;
    let comps = (0..count)
        .map(|off| permutation_sign(&unravel(off, n, n)))
        .collect();
    TensorValue::new(n, vec![Variance::Covar; n], comps, FrameTag::Unspecified)
}

fn merge_frames(a: &FrameTag, b: &FrameTag) -> Result<FrameTag, TensorError> {
    match (a, b) {
        (FrameTag::Unspecified, other) | (other, FrameTag::Unspecified) => Ok(other.clone()),
        (FrameTag::Frame(fa), FrameTag::Frame(fb)) if fa.same_frame(fb) => Ok(a.clone()),
        (FrameTag::Frame(fa), FrameTag::Frame(fb)) => Err(TensorError::FrameMismatch {
            left: fa.label().to_owned(),
            right: fb.label().to_owned(),
        }),
    }
}

/// Outer product; the signature of `b` follows that of `a`.
pub fn tensor_product(a: &TensorValue, b: &TensorValue) -> Result<TensorValue, TensorError> {
    if a.dim() != b.dim() {
        return Err(TensorError::DimMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    let frame = merge_frames(a.frame(), b.frame())?;
    let mut signature = a.signature().to_vec();
    signature.extend_from_slice(b.signature());
    if component_count(a.dim(), signature.len()).is_none() {
        return Err(TensorError::SizeLimit {
            what: "tensor order",
            value: signature.len(),
            cap: a.order().max(b.order()),
        });
    }
    let comps = a
        .components()
        .iter()
        .flat_map(|x| b.components().iter().map(move |y| x * y))
        .collect();
    TensorValue::new(a.dim(), signature, comps, frame)
}

fn check_slot(t: &TensorValue, slot: usize) -> Result<(), TensorError> {
    if slot < t.order() {
        Ok(())
    } else {
        Err(TensorError::BadSlot {
            slot,
            order: t.order(),
        })
    }
}

/// Sums over a contravariant/covariant slot pair (0-based slot positions).
pub fn contract(t: &TensorValue, slot_a: usize, slot_b: usize) -> Result<TensorValue, TensorError> {
    check_slot(t, slot_a)?;
    check_slot(t, slot_b)?;
    if slot_a == slot_b {
        return Err(TensorError::BadSlot {
            slot: slot_b,
            order: t.order(),
        });
    }
    let sig = t.signature();
    if sig[slot_a] == sig[slot_b] {
        return Err(TensorError::VarianceMismatch(format!(
            "cannot contract two {} slots ({slot_a} and {slot_b})",
            sig[slot_a]
        )));
    }
    let n = t.dim();
    let order = t.order();
    let kept: Vec<usize> = (0..order).filter(|&s| s != slot_a && s != slot_b).collect();
    let signature: Vec<Variance> = kept.iter().map(|&s| sig[s]).collect();
    let out_len = n.pow(kept.len() as u32);
    let mut comps = vec![0.0; out_len];
    let mut full = vec![0usize; order];
    for (off, out) in comps.iter_mut().enumerate() {
        let idx = unravel(off, n, kept.len());
        for (k, &s) in kept.iter().enumerate() {
            full[s] = idx[k];
        }
        let mut acc = 0.0;
        for k in 0..n {
            full[slot_a] = k;
            full[slot_b] = k;
            let src = full.iter().fold(0, |o, &i| o * n + i);
            acc += t.components()[src];
        }
        *out = acc;
    }
    Ok(t.with_parts(signature, comps, t.frame().clone()))
}

/// Applies `m` to one slot: `out[.., l, ..] = Σ_k m[l, k] · t[.., k, ..]`.
fn apply_to_slot(comps: &[f64], n: usize, order: usize, slot: usize, m: &DMatrix<f64>) -> Vec<f64> {
    let stride = n.pow((order - slot - 1) as u32);
    let block = stride * n;
    let mut out = vec![0.0; comps.len()];
    for base in (0..comps.len()).step_by(block) {
        for inner in 0..stride {
            for l in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += m[(l, k)] * comps[base + k * stride + inner];
                }
                out[base + l * stride + inner] = acc;
            }
        }
    }
    out
}

/// Re-expresses `t` in `target`, routing through the shared Cartesian frame.
///
/// Contravariant slots use `A = target.dual_basis · source.basis`, i.e.
/// `∂x'^l/∂x^k`; covariant slots use `(source.dual_basis · target.basis)ᵀ`,
/// i.e. `∂x^k/∂x'^j`.
pub fn transform(t: &TensorValue, target: &Arc<Frame>) -> Result<TensorValue, TensorError> {
    let source = t.frame().frame().ok_or(TensorError::UnspecifiedFrame)?;
    if source.dim() != target.dim() {
        return Err(TensorError::DimMismatch {
            left: source.dim(),
            right: target.dim(),
        });
    }
    let distance = source.anchor_distance(target);
    if distance > super::POINT_TOLERANCE {
        return Err(TensorError::PointMismatch {
            from: source.label().to_owned(),
            to: target.label().to_owned(),
            distance,
        });
    }
    if t.order() == 0 || source.same_frame(target) {
        return t.in_frame(FrameTag::Frame(Arc::clone(target)));
    }
    let contra = target.dual_basis() * source.basis();
    let covar = (source.dual_basis() * target.basis()).transpose();
    let n = t.dim();
    let mut comps = t.components().to_vec();
    for (slot, v) in t.signature().iter().enumerate() {
        let m = match v {
            Variance::Contra => &contra,
            Variance::Covar => &covar,
        };
        comps = apply_to_slot(&comps, n, t.order(), slot, m);
    }
    Ok(t.with_parts(
        t.signature().to_vec(),
        comps,
        FrameTag::Frame(Arc::clone(target)),
    ))
}

/// Tensor as seen in `frame`: unspecified components are taken to be in
/// `frame`; a different specified frame is an error.
fn adopt(t: &TensorValue, frame: &Arc<Frame>) -> Result<TensorValue, TensorError> {
    match t.frame() {
        FrameTag::Unspecified => t.in_frame(FrameTag::Frame(Arc::clone(frame))),
        FrameTag::Frame(f) if f.same_frame(frame) => Ok(t.clone()),
        FrameTag::Frame(f) => Err(TensorError::FrameMismatch {
            left: f.label().to_owned(),
            right: frame.label().to_owned(),
        }),
    }
}

fn flip_slot(
    t: &TensorValue,
    slot: usize,
    frame: &Arc<Frame>,
    from: Variance,
) -> Result<TensorValue, TensorError> {
    check_slot(t, slot)?;
    if t.signature()[slot] != from {
        return Err(TensorError::VarianceMismatch(format!(
            "slot {slot} is {}, expected {from}",
            t.signature()[slot]
        )));
    }
    let t = adopt(t, frame)?;
    let m = match from {
        Variance::Contra => frame.metric(),
        Variance::Covar => frame.inverse_metric(),
    };
    let comps = apply_to_slot(t.components(), t.dim(), t.order(), slot, m);
    let mut sig = t.signature().to_vec();
    sig[slot] = from.flipped();
    Ok(t.with_parts(sig, comps, t.frame().clone()))
}

/// `v_i = g_ij v^j` on one contravariant slot.
pub fn lower_index(
    t: &TensorValue,
    slot: usize,
    frame: &Arc<Frame>,
) -> Result<TensorValue, TensorError> {
    flip_slot(t, slot, frame, Variance::Contra)
}

/// `v^i = g^ij v_j` on one covariant slot.
pub fn raise_index(
    t: &TensorValue,
    slot: usize,
    frame: &Arc<Frame>,
) -> Result<TensorValue, TensorError> {
    flip_slot(t, slot, frame, Variance::Covar)
}

fn check_contra_vector(v: &TensorValue) -> Result<(), TensorError> {
    if v.signature() == [Variance::Contra] {
        Ok(())
    } else {
        Err(TensorError::VarianceMismatch(format!(
            "expected an order-1 contravariant vector, got signature [{}]",
            v.signature()
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        )))
    }
}

/// `|v|² = g_ij v^i v^j`.
pub fn norm_sq(v: &TensorValue, frame: &Arc<Frame>) -> Result<f64, TensorError> {
    check_contra_vector(v)?;
    let v = adopt(v, frame)?;
    let g = frame.metric();
    let c = v.components();
    let n = v.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += g[(i, j)] * c[i] * c[j];
        }
    }
    Ok(acc)
}

/// `w_i = ε_ijk u^j v^k`, returned with a covariant slot.
pub fn cross_product(
    u: &TensorValue,
    v: &TensorValue,
    frame: &Arc<Frame>,
) -> Result<TensorValue, TensorError> {
    for t in [u, v] {
        if t.dim() != 3 {
            return Err(TensorError::DimMismatch {
                left: t.dim(),
                right: 3,
            });
        }
        check_contra_vector(t)?;
    }
    let u = adopt(u, frame)?;
    let v = adopt(v, frame)?;
    let eps = levi_civita(3)?;
    let eps = eps.components();
    let (a, b) = (u.components(), v.components());
    let mut w = vec![0.0; 3];
    for (i, wi) in w.iter_mut().enumerate() {
        for j in 0..3 {
            for k in 0..3 {
                *wi += eps[i * 9 + j * 3 + k] * a[j] * b[k];
            }
        }
    }
    TensorValue::vector(Variance::Covar, w, FrameTag::Frame(Arc::clone(frame)))
}
