use std::sync::Arc;

use nalgebra::DMatrix;
use serde_json::{json, Map, Value as Json};
use thiserror::Error;

use super::Environment;
use crate::tensor::{
    builtin_chart, make_frame, Chart, Frame, FrameTag, IndexKind, TensorError, TensorValue,
    Variance,
};

/// Result of evaluating a formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Scalar(f64),
    Tensor(TensorValue),
    Tuple(Vec<Value>),
    Index(IndexKind),
    Frame(FrameTag),
    Chart(Arc<Chart>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValueJsonError {
    #[error("malformed value JSON: {0}")]
    Malformed(String),
    #[error("unknown frame {0}")]
    UnknownFrame(String),
    #[error("unknown chart {0}")]
    UnknownChart(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

fn malformed(what: impl Into<String>) -> ValueJsonError {
    ValueJsonError::Malformed(what.into())
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Scalar(_) => "scalar",
            Value::Tensor(_) => "tensor",
            Value::Tuple(_) => "tuple",
            Value::Index(_) => "index",
            Value::Frame(_) => "frame",
            Value::Chart(_) => "chart",
        }
    }

    pub fn as_scalar(&self) -> Option<f64> {
        match self {
            Value::Scalar(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_tensor(&self) -> Option<&TensorValue> {
        match self {
            Value::Tensor(t) => Some(t),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Scalar(x) => json!({"kind": "scalar", "value": x}),
            Value::Tensor(t) => json!({
                "kind": "tensor",
                "dim": t.dim(),
                "signature": t.signature(),
                "components": t.components(),
                "frame": frame_to_json(t.frame()),
            }),
            Value::Tuple(items) => json!({
                "kind": "tuple",
                "items": items.iter().map(Value::to_json).collect::<Vec<_>>(),
            }),
            Value::Index(ix) => json!({
                "kind": "index",
                "variance": ix.variance,
                "value": ix.value,
            }),
            Value::Frame(tag) => json!({"kind": "frame", "frame": frame_to_json(tag)}),
            Value::Chart(c) => json!({"kind": "chart", "name": c.name()}),
        }
    }

    /// Inverse of [`Value::to_json`]; frames and charts are resolved by
    /// name in `env` first, then rebuilt from their recorded data.
    pub fn from_json(json: &Json, env: &Environment) -> Result<Value, ValueJsonError> {
        let obj = json
            .as_object()
            .ok_or_else(|| malformed("expected an object"))?;
        let kind = get(obj, "kind")?
            .as_str()
            .ok_or_else(|| malformed("kind must be a string"))?;
        match kind {
            "scalar" => Ok(Value::Scalar(number(get(obj, "value")?)?)),
            "tensor" => {
                let dim = get(obj, "dim")?
                    .as_u64()
                    .ok_or_else(|| malformed("dim must be a natural number"))?
                    as usize;
                let signature: Vec<Variance> =
                    serde_json::from_value(get(obj, "signature")?.clone())
                        .map_err(|e| malformed(format!("signature: {e}")))?;
                let components = numbers(get(obj, "components")?)?;
                let frame = frame_from_json(get(obj, "frame")?, env)?;
                Ok(Value::Tensor(TensorValue::new(
                    dim, signature, components, frame,
                )?))
            }
            "tuple" => {
                let items = get(obj, "items")?
                    .as_array()
                    .ok_or_else(|| malformed("items must be an array"))?;
                items
                    .iter()
                    .map(|j| Value::from_json(j, env))
                    .collect::<Result<_, _>>()
                    .map(Value::Tuple)
            }
            "index" => {
                let variance: Variance = serde_json::from_value(get(obj, "variance")?.clone())
                    .map_err(|e| malformed(format!("variance: {e}")))?;
                let value = get(obj, "value")?
                    .as_u64()
                    .ok_or_else(|| malformed("index value must be a natural number"))?;
                Ok(Value::Index(IndexKind {
                    variance,
                    value: value as usize,
                }))
            }
            "frame" => Ok(Value::Frame(frame_from_json(get(obj, "frame")?, env)?)),
            "chart" => {
                let name = get(obj, "name")?
                    .as_str()
                    .ok_or_else(|| malformed("chart name must be a string"))?;
                let chart = env
                    .chart(name)
                    .cloned()
                    .or_else(|| builtin_chart(name).map(Arc::new))
                    .ok_or_else(|| ValueJsonError::UnknownChart(name.to_owned()))?;
                Ok(Value::Chart(chart))
            }
            other => Err(malformed(format!("unknown kind {other}"))),
        }
    }
}

fn get<'a>(obj: &'a Map<String, Json>, key: &str) -> Result<&'a Json, ValueJsonError> {
    obj.get(key)
        .ok_or_else(|| malformed(format!("missing field {key}")))
}

fn number(j: &Json) -> Result<f64, ValueJsonError> {
    j.as_f64()
        .ok_or_else(|| malformed(format!("expected a number, got {j}")))
}

fn numbers(j: &Json) -> Result<Vec<f64>, ValueJsonError> {
    j.as_array()
        .ok_or_else(|| malformed("expected an array of numbers"))?
        .iter()
        .map(number)
        .collect()
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

pub(crate) fn frame_to_json(tag: &FrameTag) -> Json {
    match tag {
        FrameTag::Unspecified => Json::Null,
        FrameTag::Frame(f) => json!({
            "label": f.label(),
            "chart": f.chart().name(),
            "point": f.point(),
            "basis": matrix_rows(f.basis()),
        }),
    }
}

fn frame_from_json(j: &Json, env: &Environment) -> Result<FrameTag, ValueJsonError> {
    if j.is_null() {
        return Ok(FrameTag::Unspecified);
    }
    let obj = j
        .as_object()
        .ok_or_else(|| malformed("frame must be an object or null"))?;
    let label = get(obj, "label")?
        .as_str()
        .ok_or_else(|| malformed("frame label must be a string"))?;
    let chart_name = get(obj, "chart")?
        .as_str()
        .ok_or_else(|| malformed("frame chart must be a string"))?;
    let point = numbers(get(obj, "point")?)?;
    let rows: Vec<Vec<f64>> = get(obj, "basis")?
        .as_array()
        .ok_or_else(|| malformed("basis must be an array of rows"))?
        .iter()
        .map(numbers)
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(malformed("basis must be square"));
    }
    let basis = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    if let Some(f) = env.frame(label) {
        return Ok(FrameTag::Frame(Arc::clone(f)));
    }
    let frame = if chart_name == "basis" {
        Frame::from_basis(label, basis)?
    } else {
        let chart = env
            .chart(chart_name)
            .cloned()
            .or_else(|| builtin_chart(chart_name).map(Arc::new))
            .ok_or_else(|| ValueJsonError::UnknownFrame(label.to_owned()))?;
        make_frame(&chart, &point)?.with_label(label)
    };
    Ok(FrameTag::Frame(Arc::new(frame)))
}
