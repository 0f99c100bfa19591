use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::ToPrimitive;

use super::{Environment, EvalError, EvalErrorKind, Value};
use crate::om::{NodeKind, OMNode, SourceSpan};
use crate::symbols::{ARITH1, LINALG1, NUMS1, TENSOR1, UNSPECIFIED};
use crate::tensor::{
    cartesian_chart, kronecker, levi_civita_capped, lower_index, make_frame, permutation_sign,
    raise_index, tensor_product, transform, Frame, FrameTag, IndexKind, TensorError, TensorValue,
    Variance,
};

type Result<T> = std::result::Result<T, EvalError>;

/// Evaluates a formula. Callers are expected to have run
/// [`super::validate`] first; evaluation re-checks only what it needs.
pub fn evaluate(node: &OMNode, env: &Environment) -> Result<Value> {
    Evaluator {
        env,
        scope: Vec::new(),
    }
    .eval(node)
}

struct Evaluator<'a> {
    env: &'a Environment,
    /// Summation variables, innermost last.
    scope: Vec<(String, f64)>,
}

fn err<T>(kind: impl Into<EvalErrorKind>, span: SourceSpan) -> Result<T> {
    Err(EvalError::new(kind, span))
}

fn type_mismatch<T>(msg: impl Into<String>, span: SourceSpan) -> Result<T> {
    err(EvalErrorKind::TypeMismatch(msg.into()), span)
}

fn at(span: SourceSpan) -> impl Fn(TensorError) -> EvalError {
    move |e| EvalError::new(e, span)
}

fn finite(x: f64, what: &str, span: SourceSpan) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        err(EvalErrorKind::Domain(format!("{what} is not finite")), span)
    }
}

/// Cartesian frame sharing the anchor of `frame` (or position independent).
fn ambient_cartesian(
    n: usize,
    anchor: Option<&[f64]>,
) -> std::result::Result<Arc<Frame>, TensorError> {
    let frame = match anchor {
        Some(p) => make_frame(&Arc::new(cartesian_chart(n)?), p)?,
        None => Frame::from_basis(format!("cartesian{n}"), DMatrix::identity(n, n))?,
    };
    Ok(Arc::new(frame))
}

impl Evaluator<'_> {
    fn eval(&mut self, node: &OMNode) -> Result<Value> {
        let span = node.span;
        match &node.kind {
            NodeKind::Integer(i) => match i.to_f64() {
                Some(x) if x.is_finite() => Ok(Value::Scalar(x)),
                _ => err(
                    EvalErrorKind::Domain(format!("integer {i} is too large")),
                    span,
                ),
            },
            NodeKind::Float(x) => Ok(Value::Scalar(finite(*x, "float literal", span)?)),
            NodeKind::Variable(name) => self.variable(name, span),
            NodeKind::Symbol { cd, name } => self.constant(cd, name, span),
            NodeKind::Application { head, args } => match head.as_symbol() {
                Some((cd, name)) => self.apply(cd, name, args, span),
                None => err(
                    EvalErrorKind::Unsupported("only symbols can be applied".into()),
                    head.span,
                ),
            },
            NodeKind::SumBinder {
                var,
                lower,
                upper,
                body,
            } => {
                let lo = self.integer(lower)?;
                let hi = self.integer(upper)?;
                let mut acc: Option<Value> = None;
                for k in lo..=hi {
                    self.scope.push((var.clone(), k as f64));
                    let term = self.eval(body);
                    self.scope.pop();
                    let term = term?;
                    acc = Some(match acc {
                        None => term,
                        Some(a) => add(a, term, span)?,
                    });
                }
                Ok(acc.unwrap_or(Value::Scalar(0.0)))
            }
        }
    }

    fn variable(&self, name: &str, span: SourceSpan) -> Result<Value> {
        if let Some((_, x)) = self.scope.iter().rev().find(|(n, _)| n == name) {
            return Ok(Value::Scalar(*x));
        }
        self.env
            .lookup(name)
            .ok_or_else(|| EvalError::new(EvalErrorKind::UnboundVariable(name.to_owned()), span))
    }

    fn constant(&self, cd: &str, name: &str, span: SourceSpan) -> Result<Value> {
        match (cd, name) {
            (TENSOR1, UNSPECIFIED) => Ok(Value::Frame(FrameTag::Unspecified)),
            (TENSOR1, "Kronecker_tensor") => match self.env.dim() {
                Some(n) => Ok(Value::Tensor(kronecker(n).map_err(at(span))?)),
                None => err(
                    EvalErrorKind::FrameRequired(
                        "Kronecker_tensor outside tensor_selector (or an ambient dim)".into(),
                    ),
                    span,
                ),
            },
            (TENSOR1, "metric_tensor") => err(
                EvalErrorKind::FrameRequired("metric_tensor outside tensor_selector".into()),
                span,
            ),
            (NUMS1, "pi") => Ok(Value::Scalar(std::f64::consts::PI)),
            (NUMS1, "e") => Ok(Value::Scalar(std::f64::consts::E)),
            _ if crate::symbols::arity_of(cd, name).is_some() => {
                type_mismatch(format!("{name} must be applied to arguments"), span)
            }
            _ => err(
                EvalErrorKind::Unsupported(format!("{cd}:{name} is not supported")),
                span,
            ),
        }
    }

    fn scalar(&mut self, node: &OMNode) -> Result<f64> {
        match self.eval(node)? {
            Value::Scalar(x) => Ok(x),
            Value::Tensor(t) if t.order() == 0 => Ok(t.components()[0]),
            other => type_mismatch(
                format!("expected a scalar, got a {}", other.kind_name()),
                node.span,
            ),
        }
    }

    fn integer(&mut self, node: &OMNode) -> Result<i64> {
        let x = self.scalar(node)?;
        if x.fract() == 0.0 && x.abs() < 2f64.powi(53) {
            Ok(x as i64)
        } else {
            type_mismatch(format!("expected an integer, got {x}"), node.span)
        }
    }

    /// 1-based index checked against `dim`.
    fn index_in(&mut self, node: &OMNode, dim: usize) -> Result<usize> {
        let i = self.integer(node)?;
        if i < 1 || i as u64 > dim as u64 {
            return err(EvalErrorKind::IndexOutOfRange { index: i, dim }, node.span);
        }
        Ok(i as usize)
    }

    fn index(&mut self, node: &OMNode) -> Result<IndexKind> {
        match self.eval(node)? {
            Value::Index(ix) => Ok(ix),
            other => type_mismatch(
                format!(
                    "expected contra_index or covar_index, got a {}",
                    other.kind_name()
                ),
                node.span,
            ),
        }
    }

    fn ambient_dim(&self, what: &str, span: SourceSpan) -> Result<usize> {
        self.env.dim().ok_or_else(|| {
            EvalError::new(
                EvalErrorKind::FrameRequired(format!(
                    "{what} (the environment sets no ambient dim)"
                )),
                span,
            )
        })
    }

    fn apply(&mut self, cd: &str, name: &str, args: &[OMNode], span: SourceSpan) -> Result<Value> {
        match (cd, name, args) {
            (ARITH1, _, _) => self.arith(name, args, span),
            (TENSOR1, "tuple", items) => {
                let values = items
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<Result<Vec<_>>>()?;
                if let Some(first) = values.first() {
                    if values.iter().any(|v| v.kind_name() != first.kind_name()) {
                        return type_mismatch("tuple elements must all be of one kind", span);
                    }
                }
                Ok(Value::Tuple(values))
            }
            (TENSOR1, "tuple_selector", [tuple, index]) => match self.eval(tuple)? {
                Value::Tuple(items) => {
                    let i = self.index_in(index, items.len())?;
                    Ok(items[i - 1].clone())
                }
                other => type_mismatch(
                    format!("tuple_selector needs a tuple, got a {}", other.kind_name()),
                    tuple.span,
                ),
            },
            (TENSOR1, "Cartesian", [k]) => {
                let n = self.ambient_dim("Cartesian", span)?;
                let i = self.index_in(k, n)?;
                match self.env.point() {
                    Some(p) => Ok(Value::Scalar(p[i - 1])),
                    None => err(
                        EvalErrorKind::FrameRequired(
                            "Cartesian (the environment sets no ambient point)".into(),
                        ),
                        span,
                    ),
                }
            }
            (TENSOR1, "unit_Cartesian", [k]) => {
                let n = self.ambient_dim("unit_Cartesian", span)?;
                let i = self.index_in(k, n)?;
                let frame = ambient_cartesian(n, self.env.point()).map_err(at(span))?;
                let mut e = vec![0.0; n];
                e[i - 1] = 1.0;
                Ok(Value::Tensor(
                    TensorValue::vector(Variance::Contra, e, FrameTag::Frame(frame))
                        .map_err(at(span))?,
                ))
            }
            (TENSOR1, "contra_index" | "covar_index", [k]) => {
                let value = self.integer(k)?;
                if value < 1 {
                    return err(
                        EvalErrorKind::IndexOutOfRange {
                            index: value,
                            dim: 0,
                        },
                        k.span,
                    );
                }
                let variance = if name == "contra_index" {
                    Variance::Contra
                } else {
                    Variance::Covar
                };
                Ok(Value::Index(IndexKind {
                    variance,
                    value: value as usize,
                }))
            }
            (TENSOR1, "Levi-Civita", [n]) => {
                let n = self.integer(n)?;
                let n = usize::try_from(n)
                    .map_err(|_| EvalError::new(TensorError::BadDimension(0), span))?;
                let cap = self.env.limits().max_levi_civita_dim;
                Ok(Value::Tensor(levi_civita_capped(n, cap).map_err(at(span))?))
            }
            (TENSOR1, "basis_selector", [basis, index]) => self.basis_selector(basis, index, span),
            (TENSOR1, "tensor_selector", [tensor, indexes, frame]) => {
                self.tensor_selector(tensor, indexes, frame, span)
            }
            (LINALG1, "vector_selector", [index, vector]) => match self.eval(vector)? {
                Value::Tuple(items) => {
                    let i = self.index_in(index, items.len())?;
                    Ok(items[i - 1].clone())
                }
                Value::Tensor(t) if t.order() == 1 => {
                    let i = self.index_in(index, t.dim())?;
                    Ok(Value::Scalar(t.components()[i - 1]))
                }
                other => type_mismatch(
                    format!(
                        "vector_selector needs a vector, got a {}",
                        other.kind_name()
                    ),
                    vector.span,
                ),
            },
            _ => match crate::symbols::arity_of(cd, name) {
                Some(arity) => err(
                    EvalErrorKind::TypeMismatch(format!(
                        "{name} takes {}, got {}",
                        arity.describe(),
                        args.len()
                    )),
                    span,
                ),
                None => err(
                    EvalErrorKind::Unsupported(format!("{cd}:{name} is not supported")),
                    span,
                ),
            },
        }
    }

    fn arith(&mut self, name: &str, args: &[OMNode], span: SourceSpan) -> Result<Value> {
        let mut values = args
            .iter()
            .map(|a| self.eval(a))
            .collect::<Result<Vec<_>>>()?;
        let limits = *self.env.limits();
        let scalar_pair = |values: &[Value]| match values {
            [Value::Scalar(a), Value::Scalar(b)] => Ok((*a, *b)),
            _ => type_mismatch(format!("{name} needs two scalars"), span),
        };
        let result = match (name, values.len()) {
            ("plus", _) => {
                let first = values.remove(0);
                values.into_iter().try_fold(first, |a, b| add(a, b, span))?
            }
            ("times", _) => {
                let first = values.remove(0);
                values.into_iter().try_fold(first, |a, b| {
                    let p = multiply(a, b, span)?;
                    if let Value::Tensor(t) = &p {
                        limits.check(t).map_err(at(span))?;
                    }
                    Ok(p)
                })?
            }
            ("minus", 2) => {
                let b = values.pop().expect("two values");
                let a = values.pop().expect("two values");
                add(a, negate(b, span)?, span)?
            }
            ("unary_minus", 1) => negate(values.remove(0), span)?,
            ("divide", 2) => match (&values[0], &values[1]) {
                (_, Value::Scalar(b)) if *b == 0.0 => {
                    return err(EvalErrorKind::Domain("division by zero".into()), span)
                }
                (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a / b),
                (Value::Tensor(t), Value::Scalar(b)) => Value::Tensor(t.map_components(|c| c / b)),
                _ => return type_mismatch("divide needs a scalar divisor", span),
            },
            ("power", 2) => {
                let (a, b) = scalar_pair(&values)?;
                if a == 0.0 && b < 0.0 {
                    return err(EvalErrorKind::Domain("division by zero".into()), span);
                }
                Value::Scalar(a.powf(b))
            }
            ("abs", 1) => match values[0] {
                Value::Scalar(a) => Value::Scalar(a.abs()),
                _ => return type_mismatch("abs needs a scalar", span),
            },
            _ => {
                return type_mismatch(
                    format!("{name} cannot take {} argument(s)", args.len()),
                    span,
                )
            }
        };
        check_finite(result, span)
    }

    /// A frame argument: a frame value, `unspecified`, or a tuple of basis vectors.
    fn frame_arg(&mut self, node: &OMNode) -> Result<FrameTag> {
        match self.eval(node)? {
            Value::Frame(tag) => Ok(tag),
            Value::Tuple(vectors) => {
                let n = vectors.len();
                let mut m = DMatrix::zeros(n, n);
                for (j, v) in vectors.iter().enumerate() {
                    let comps = cartesian_components(v, n, node.span)?;
                    for (i, c) in comps.into_iter().enumerate() {
                        m[(i, j)] = c;
                    }
                }
                let frame = Frame::from_basis(format!("basis{n}"), m).map_err(at(node.span))?;
                Ok(FrameTag::Frame(Arc::new(frame)))
            }
            other => type_mismatch(
                format!("expected a frame, got a {}", other.kind_name()),
                node.span,
            ),
        }
    }

    fn basis_selector(
        &mut self,
        basis: &OMNode,
        index: &OMNode,
        span: SourceSpan,
    ) -> Result<Value> {
        let frame = match self.frame_arg(basis)? {
            FrameTag::Frame(f) => f,
            FrameTag::Unspecified => {
                return err(
                    EvalErrorKind::FrameRequired("basis_selector".into()),
                    basis.span,
                )
            }
        };
        let ix = self.index(index)?;
        let n = frame.dim();
        if ix.value > n {
            return err(
                EvalErrorKind::IndexOutOfRange {
                    index: ix.value as i64,
                    dim: n,
                },
                index.span,
            );
        }
        let cart = ambient_cartesian(n, frame.anchor()).map_err(at(span))?;
        let i = ix.value - 1;
        // g_i is column i of the basis; g^i is row i of the dual basis.
        let (variance, comps) = match ix.variance {
            Variance::Covar => (
                Variance::Contra,
                frame.basis().column(i).iter().copied().collect(),
            ),
            Variance::Contra => (
                Variance::Covar,
                frame.dual_basis().row(i).iter().copied().collect(),
            ),
        };
        Ok(Value::Tensor(
            TensorValue::vector(variance, comps, FrameTag::Frame(cart)).map_err(at(span))?,
        ))
    }

    fn tensor_selector(
        &mut self,
        tensor: &OMNode,
        indexes: &OMNode,
        frame: &OMNode,
        span: SourceSpan,
    ) -> Result<Value> {
        let frame = self.frame_arg(frame)?;
        let Some((TENSOR1, "tuple", items)) = indexes.as_symbol_application() else {
            return type_mismatch("tensor_selector needs a tuple of indexes", indexes.span);
        };
        let ix = items
            .iter()
            .map(|i| self.index(i))
            .collect::<Result<Vec<_>>>()?;

        if let Some((TENSOR1, name)) = tensor.as_symbol() {
            if name == "Kronecker_tensor" || name == "metric_tensor" {
                return self.identity_like(name, &ix, &frame, span);
            }
        }
        if let Some((TENSOR1, "Levi-Civita", [n])) = tensor.as_symbol_application() {
            let n = usize::try_from(self.integer(n)?).unwrap_or(0);
            let cap = self.env.limits().max_levi_civita_dim;
            if n == 0 || n > cap {
                levi_civita_capped(n, cap).map_err(at(tensor.span))?;
            }
            check_indexes(&ix, n, n, indexes.span)?;
            let zero_based: Vec<usize> = ix.iter().map(|i| i.value - 1).collect();
            return Ok(Value::Scalar(permutation_sign(&zero_based)));
        }

        let t = match self.eval(tensor)? {
            Value::Tensor(t) => t,
            Value::Scalar(x) if ix.is_empty() => return Ok(Value::Scalar(x)),
            other => {
                return type_mismatch(
                    format!(
                        "tensor_selector needs a tensor, got a {}",
                        other.kind_name()
                    ),
                    tensor.span,
                )
            }
        };
        check_indexes(&ix, t.order(), t.dim(), indexes.span)?;
        let mut t = match (&frame, t.frame()) {
            (FrameTag::Unspecified, _) => t,
            (FrameTag::Frame(f), FrameTag::Unspecified) => t
                .in_frame(FrameTag::Frame(Arc::clone(f)))
                .map_err(at(span))?,
            (FrameTag::Frame(f), FrameTag::Frame(g)) if f.same_frame(g) => t,
            (FrameTag::Frame(f), FrameTag::Frame(_)) => transform(&t, f).map_err(at(span))?,
        };
        for (slot, want) in ix.iter().enumerate() {
            if t.signature()[slot] == want.variance {
                continue;
            }
            let Some(f) = t.frame().frame().cloned() else {
                return err(
                    EvalErrorKind::FrameRequired(format!(
                        "reading slot {} as {} (the tensor stores it {})",
                        slot + 1,
                        want.variance,
                        t.signature()[slot]
                    )),
                    span,
                );
            };
            t = match want.variance {
                Variance::Covar => lower_index(&t, slot, &f),
                Variance::Contra => raise_index(&t, slot, &f),
            }
            .map_err(at(span))?;
        }
        let values: Vec<usize> = ix.iter().map(|i| i.value).collect();
        Ok(Value::Scalar(t.component(&values).map_err(at(span))?))
    }

    /// Components of δ and g, which depend only on the frame and the index
    /// variances: mixed indexes give δ, two covariant ones `g_ij`, two
    /// contravariant ones `g^ij`.
    fn identity_like(
        &self,
        name: &str,
        ix: &[IndexKind],
        frame: &FrameTag,
        span: SourceSpan,
    ) -> Result<Value> {
        let dim = frame
            .frame()
            .map(|f| f.dim())
            .or(self.env.dim())
            .unwrap_or_else(|| ix.iter().map(|i| i.value).max().unwrap_or(1));
        check_indexes(ix, 2, dim, span)?;
        let (i, j) = (ix[0].value - 1, ix[1].value - 1);
        if ix[0].variance != ix[1].variance {
            return Ok(Value::Scalar(if i == j { 1.0 } else { 0.0 }));
        }
        let Some(f) = frame.frame() else {
            return err(
                EvalErrorKind::FrameRequired(format!("{name} with two {} indexes", ix[0].variance)),
                span,
            );
        };
        let m = match ix[0].variance {
            Variance::Covar => f.metric(),
            Variance::Contra => f.inverse_metric(),
        };
        Ok(Value::Scalar(m[(i, j)]))
    }
}

fn check_indexes(ix: &[IndexKind], order: usize, dim: usize, span: SourceSpan) -> Result<()> {
    if ix.len() != order {
        return err(
            TensorError::IndexCount {
                expected: order,
                found: ix.len(),
            },
            span,
        );
    }
    for i in ix {
        if i.value > dim {
            return err(
                EvalErrorKind::IndexOutOfRange {
                    index: i.value as i64,
                    dim,
                },
                span,
            );
        }
    }
    Ok(())
}

/// Cartesian components of a basis vector given as a vector or a tuple of scalars.
fn cartesian_components(v: &Value, n: usize, span: SourceSpan) -> Result<Vec<f64>> {
    let comps = match v {
        Value::Tuple(xs) => xs
            .iter()
            .map(|x| x.as_scalar())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| {
                EvalError::new(
                    EvalErrorKind::TypeMismatch("basis vectors must be numeric".into()),
                    span,
                )
            })?,
        Value::Tensor(t) if t.signature() == [Variance::Contra] => match t.frame() {
            FrameTag::Frame(f) if !f.is_cartesian() => {
                let cart = ambient_cartesian(t.dim(), f.anchor()).map_err(at(span))?;
                transform(t, &cart).map_err(at(span))?.components().to_vec()
            }
            _ => t.components().to_vec(),
        },
        other => {
            return type_mismatch(
                format!(
                    "a basis vector must be a contravariant vector, got a {}",
                    other.kind_name()
                ),
                span,
            )
        }
    };
    if comps.len() != n {
        return err(
            TensorError::DimMismatch {
                left: comps.len(),
                right: n,
            },
            span,
        );
    }
    Ok(comps)
}

fn check_finite(v: Value, span: SourceSpan) -> Result<Value> {
    let ok = match &v {
        Value::Scalar(x) => x.is_finite(),
        Value::Tensor(t) => t.components().iter().all(|c| c.is_finite()),
        _ => true,
    };
    if ok {
        Ok(v)
    } else {
        err(EvalErrorKind::Domain("result is not finite".into()), span)
    }
}

fn negate(v: Value, span: SourceSpan) -> Result<Value> {
    match v {
        Value::Scalar(x) => Ok(Value::Scalar(-x)),
        Value::Tensor(t) => Ok(Value::Tensor(t.map_components(|c| -c))),
        other => type_mismatch(format!("cannot negate a {}", other.kind_name()), span),
    }
}

fn add(a: Value, b: Value, span: SourceSpan) -> Result<Value> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x + y)),
        (Value::Tensor(s), Value::Tensor(t)) => {
            if s.dim() != t.dim() {
                return err(
                    TensorError::DimMismatch {
                        left: s.dim(),
                        right: t.dim(),
                    },
                    span,
                );
            }
            if s.signature() != t.signature() {
                return err(
                    TensorError::VarianceMismatch(
                        "cannot add tensors with different signatures".into(),
                    ),
                    span,
                );
            }
            let frame = match (s.frame(), t.frame()) {
                (FrameTag::Unspecified, f) | (f, FrameTag::Unspecified) => f.clone(),
                (f, g) if f.same_as(g) => f.clone(),
                (f, g) => {
                    return err(
                        TensorError::FrameMismatch {
                            left: f.label().unwrap_or_default().to_owned(),
                            right: g.label().unwrap_or_default().to_owned(),
                        },
                        span,
                    )
                }
            };
            let comps = s
                .components()
                .iter()
                .zip(t.components())
                .map(|(x, y)| x + y)
                .collect();
            Ok(Value::Tensor(
                TensorValue::new(s.dim(), s.signature().to_vec(), comps, frame)
                    .map_err(at(span))?,
            ))
        }
        (a, b) => type_mismatch(
            format!("cannot add a {} and a {}", a.kind_name(), b.kind_name()),
            span,
        ),
    }
}

fn multiply(a: Value, b: Value, span: SourceSpan) -> Result<Value> {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => Ok(Value::Scalar(x * y)),
        (Value::Scalar(x), Value::Tensor(t)) | (Value::Tensor(t), Value::Scalar(x)) => {
            Ok(Value::Tensor(t.map_components(|c| c * x)))
        }
        (Value::Tensor(s), Value::Tensor(t)) => {
            Ok(Value::Tensor(tensor_product(&s, &t).map_err(at(span))?))
        }
        (a, b) => type_mismatch(
            format!(
                "cannot multiply a {} and a {}",
                a.kind_name(),
                b.kind_name()
            ),
            span,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::om::parse_compact;
    use crate::tensor::Limits;

    fn env() -> Environment {
        Environment::from_json_str(
            r#"{
                "point": [2.0, 0.0],
                "frames": [
                    {"name": "C", "chart": "cartesian2", "point": [2.0, 0.0]},
                    {"name": "P", "chart": "polar", "point": [2.0, 0.0]},
                    {"name": "Far", "chart": "polar", "point": [1.0, 0.0]}
                ],
                "tensors": [
                    {"name": "M", "dim": 2, "signature": ["contra", "covar"], "components": [1, 2, 3, 4]},
                    {"name": "v", "dim": 2, "signature": ["contra"], "components": [5, 6]},
                    {"name": "w", "dim": 2, "signature": ["contra"], "components": [3, 4], "frame": "C"}
                ],
                "scalars": {"i": 1, "x": 1, "y": 2, "z": 3}
            }"#,
            None,
            Limits::default(),
        )
        .unwrap()
    }

    fn eval(src: &str) -> Result<Value> {
        evaluate(&parse_compact(src).unwrap(), &env())
    }

    fn scalar(src: &str) -> f64 {
        eval(src).unwrap().as_scalar().unwrap()
    }

    #[test]
    fn tuple_selection() {
        assert_eq!(scalar("tuple_selector(tuple(x, y, z), 2)"), 2.0);
        assert_eq!(
            eval("tuple_selector(tuple(x, y, z), 4)")
                .unwrap_err()
                .code(),
            "IndexOutOfRange"
        );
    }

    #[test]
    fn kronecker_components() {
        assert_eq!(
            scalar("tensor_selector(Kronecker_tensor, tuple(contra_index(2), covar_index(2)), unspecified)"),
            1.0
        );
        assert_eq!(
            scalar("tensor_selector(Kronecker_tensor, tuple(contra_index(1), covar_index(2)), P)"),
            0.0
        );
    }

    #[test]
    fn explicit_matrix_vector_sum() {
        let src = "sum(j=1..2, times(tensor_selector(M, tuple(contra_index(i), covar_index(j)), C), tensor_selector(v, tuple(contra_index(j)), C)))";
        // dense oracle: row 1 of [[1,2],[3,4]] times (5,6)
        assert_eq!(scalar(src), 1.0 * 5.0 + 2.0 * 6.0);
    }

    #[test]
    fn binder_shadows_scalars() {
        assert_eq!(scalar("sum(x=1..3, x)"), 6.0);
        assert_eq!(scalar("x"), 1.0);
        assert_eq!(scalar("sum(x=3..1, x)"), 0.0);
    }

    #[test]
    fn metric_and_transform() {
        assert_eq!(
            scalar("tensor_selector(metric_tensor, tuple(covar_index(2), covar_index(2)), P)"),
            4.0
        );
        assert_eq!(
            scalar("tensor_selector(metric_tensor, tuple(contra_index(2), contra_index(2)), P)"),
            0.25
        );
        // w = (3, 4) at (2, 0) is (3, 2) in polar components
        assert!((scalar("tensor_selector(w, tuple(contra_index(2)), P)") - 2.0).abs() < 1e-12);
        // lowering through the polar metric
        assert!((scalar("tensor_selector(w, tuple(covar_index(2)), P)") - 8.0).abs() < 1e-12);
        assert_eq!(
            eval("tensor_selector(w, tuple(contra_index(1)), Far)")
                .unwrap_err()
                .code(),
            "PointMismatch"
        );
        assert_eq!(
            eval("tensor_selector(metric_tensor, tuple(covar_index(1), covar_index(1)), unspecified)")
                .unwrap_err()
                .code(),
            "FrameRequired"
        );
        assert_eq!(
            eval("tensor_selector(v, tuple(covar_index(1)), unspecified)")
                .unwrap_err()
                .code(),
            "FrameRequired"
        );
    }

    #[test]
    fn frame_independent_reads() {
        for f in ["C", "P", "unspecified"] {
            let src = format!("tensor_selector(M, tuple(contra_index(2), covar_index(1)), {f})");
            assert_eq!(scalar(&src), 3.0);
        }
    }

    #[test]
    fn levi_civita_reads() {
        let read = |a: u8, b: u8, c: u8| {
            scalar(&format!(
                "tensor_selector(Levi-Civita(3), tuple(covar_index({a}), contra_index({b}), covar_index({c})), unspecified)"
            ))
        };
        assert_eq!(read(1, 2, 3), 1.0);
        assert_eq!(read(3, 2, 1), -1.0);
        assert_eq!(read(1, 1, 3), 0.0);
    }

    #[test]
    fn basis_vectors() {
        let Value::Tensor(g2) = eval("basis_selector(P, covar_index(2))").unwrap() else {
            panic!()
        };
        assert_eq!(g2.signature(), &[Variance::Contra]);
        assert!((g2.components()[0]).abs() < 1e-12 && (g2.components()[1] - 2.0).abs() < 1e-12);
        let Value::Tensor(d2) = eval("basis_selector(P, contra_index(2))").unwrap() else {
            panic!()
        };
        assert!((d2.components()[1] - 0.5).abs() < 1e-12);
        let Value::Tensor(b) =
            eval("basis_selector(tuple(tuple(1, 0), tuple(1, 2)), covar_index(2))").unwrap()
        else {
            panic!()
        };
        assert_eq!(b.components(), &[1.0, 2.0]);
    }

    #[test]
    fn cartesian_symbols() {
        assert_eq!(scalar("Cartesian(1)"), 2.0);
        let Value::Tensor(e) = eval("unit_Cartesian(2)").unwrap() else {
            panic!()
        };
        assert_eq!(e.components(), &[0.0, 1.0]);
    }

    #[test]
    fn errors() {
        assert_eq!(eval("q").unwrap_err().code(), "UnboundVariable");
        assert_eq!(eval("divide(1, 0)").unwrap_err().code(), "DomainError");
        assert_eq!(eval("plus(1, v)").unwrap_err().code(), "TypeMismatch");
        assert_eq!(
            eval("tensor_selector(M, tuple(contra_index(1)), C)")
                .unwrap_err()
                .code(),
            "IndexCountMismatch"
        );
        assert_eq!(
            eval("tensor_selector(M, tuple(contra_index(3), covar_index(1)), C)")
                .unwrap_err()
                .code(),
            "IndexOutOfRange"
        );
        assert_eq!(eval("Levi-Civita(9)").unwrap_err().code(), "SizeLimit");
    }

    #[test]
    fn arithmetic() {
        assert_eq!(
            scalar("plus(1, times(2, 3), minus(4, 1), unary_minus(1))"),
            9.0
        );
        assert_eq!(scalar("power(2, 10)"), 1024.0);
        assert_eq!(scalar("abs(unary_minus(2.5))"), 2.5);
        let Value::Tensor(t) = eval("times(2, v)").unwrap() else {
            panic!()
        };
        assert_eq!(t.components(), &[10.0, 12.0]);
        let Value::Tensor(o) = eval("times(v, v)").unwrap() else {
            panic!()
        };
        assert_eq!(o.order(), 2);
    }
}
