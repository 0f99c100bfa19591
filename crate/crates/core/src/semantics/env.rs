use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Value;
use crate::symbols::UNSPECIFIED;
use crate::tensor::{
    builtin_chart, make_frame, Chart, ChartFile, Frame, FrameTag, Limits, TensorError, TensorValue,
    Variance,
};

/// Named bindings a formula is evaluated against. Names are unique across
/// all kinds of binding.
#[derive(Debug, Clone, Default)]
pub struct Environment {
    charts: BTreeMap<String, Arc<Chart>>,
    frames: BTreeMap<String, Arc<Frame>>,
    tensors: BTreeMap<String, TensorValue>,
    tuples: BTreeMap<String, Vec<Value>>,
    scalars: BTreeMap<String, f64>,
    dim: Option<usize>,
    point: Option<Vec<f64>>,
    limits: Limits,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Schema(String),
    #[error("name {0} is bound more than once")]
    Duplicate(String),
    #[error("{name}: {error}")]
    Tensor { name: String, error: TensorError },
}

impl EnvError {
    pub fn code(&self) -> &'static str {
        match self {
            EnvError::Io(_) => "Io",
            EnvError::Schema(_) => "EnvSchema",
            EnvError::Duplicate(_) => "DuplicateName",
            EnvError::Tensor { error, .. } => error.code(),
        }
    }

    /// Whether the failure lies in the file's shape rather than in the
    /// mathematics it describes.
    pub fn is_schema_error(&self) -> bool {
        match self {
            EnvError::Io(_) => false,
            EnvError::Schema(_) | EnvError::Duplicate(_) => true,
            EnvError::Tensor { error, .. } => matches!(
                error,
                TensorError::BadChart(_)
                    | TensorError::BadDimension(_)
                    | TensorError::ComponentCount { .. }
                    | TensorError::DimMismatch { .. }
            ),
        }
    }
}

fn tensor_err(name: &str) -> impl FnOnce(TensorError) -> EnvError + '_ {
    move |error| EnvError::Tensor {
        name: name.to_owned(),
        error,
    }
}

/// On-disk environment definition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvFile {
    /// Ambient dimension, for formulas that use `Cartesian` or `unit_Cartesian`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Ambient Cartesian point the coordinates `Cartesian(i)` refer to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default)]
    pub charts: Vec<ChartSpec>,
    #[serde(default)]
    pub frames: Vec<FrameSpec>,
    #[serde(default)]
    pub tensors: Vec<TensorSpec>,
    #[serde(default)]
    pub scalars: BTreeMap<String, f64>,
    #[serde(default)]
    pub tuples: BTreeMap<String, Vec<f64>>,
}

/// A built-in chart name, a path to a chart file, or an inline definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChartSpec {
    Named(String),
    Inline(ChartFile),
}

/// Either a chart evaluated at a point, or an explicit list of basis vectors
/// in Cartesian components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorSpec {
    pub name: String,
    pub dim: usize,
    pub signature: Vec<Variance>,
    /// Row-major components.
    pub components: Vec<f64>,
    /// Frame name; omitted or `unspecified` for frame-free components.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<String>,
}

impl Environment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_limits(limits: Limits) -> Self {
        Environment {
            limits,
            ..Self::default()
        }
    }

    pub fn limits(&self) -> &Limits {
        &self.limits
    }

    pub fn is_bound(&self, name: &str) -> bool {
        self.charts.contains_key(name)
            || self.frames.contains_key(name)
            || self.tensors.contains_key(name)
            || self.tuples.contains_key(name)
            || self.scalars.contains_key(name)
    }

    fn claim(&self, name: &str) -> Result<(), EnvError> {
        if self.is_bound(name) {
            Err(EnvError::Duplicate(name.to_owned()))
        } else {
            Ok(())
        }
    }

    pub fn add_chart(&mut self, name: &str, chart: Chart) -> Result<Arc<Chart>, EnvError> {
        self.claim(name)?;
        let chart = Arc::new(chart);
        self.charts.insert(name.to_owned(), Arc::clone(&chart));
        Ok(chart)
    }

    /// Registers `frame` under `name`, which also becomes its label.
    pub fn add_frame(&mut self, name: &str, frame: Frame) -> Result<Arc<Frame>, EnvError> {
        self.claim(name)?;
        if frame.dim() > self.limits.max_dim {
            return Err(tensor_err(name)(TensorError::SizeLimit {
                what: "dimension",
                value: frame.dim(),
                cap: self.limits.max_dim,
            }));
        }
        let frame = Arc::new(frame.with_label(name));
        self.frames.insert(name.to_owned(), Arc::clone(&frame));
        Ok(frame)
    }

    /// Registers a tensor, whose frame must already be registered.
    pub fn add_tensor(&mut self, name: &str, tensor: TensorValue) -> Result<(), EnvError> {
        self.claim(name)?;
        self.limits.check(&tensor).map_err(tensor_err(name))?;
        if let FrameTag::Frame(f) = tensor.frame() {
            if !self.frames.values().any(|g| g.same_frame(f)) {
                return Err(EnvError::Schema(format!(
                    "tensor {name} refers to unregistered frame {}",
                    f.label()
                )));
            }
        }
        self.tensors.insert(name.to_owned(), tensor);
        Ok(())
    }

    pub fn add_tuple(&mut self, name: &str, items: Vec<Value>) -> Result<(), EnvError> {
        self.claim(name)?;
        self.tuples.insert(name.to_owned(), items);
        Ok(())
    }

    pub fn add_scalar(&mut self, name: &str, value: f64) -> Result<(), EnvError> {
        self.claim(name)?;
        self.scalars.insert(name.to_owned(), value);
        Ok(())
    }

    /// Sets the ambient Cartesian point; also fixes the ambient dimension.
    pub fn set_point(&mut self, point: Vec<f64>) -> Result<(), EnvError> {
        if let Some(d) = self.dim.filter(|&d| d != point.len()) {
            return Err(EnvError::Schema(format!(
                "point has {} coordinates but dim is {d}",
                point.len()
            )));
        }
        self.dim = Some(point.len());
        self.point = Some(point);
        Ok(())
    }

    pub fn set_dim(&mut self, dim: usize) -> Result<(), EnvError> {
        if dim == 0 {
            return Err(EnvError::Schema("dim must be positive".into()));
        }
        if let Some(p) = self.point.as_ref().filter(|p| p.len() != dim) {
            return Err(EnvError::Schema(format!(
                "point has {} coordinates but dim is {dim}",
                p.len()
            )));
        }
        self.dim = Some(dim);
        Ok(())
    }

    pub fn chart(&self, name: &str) -> Option<&Arc<Chart>> {
        self.charts.get(name)
    }

    pub fn frame(&self, name: &str) -> Option<&Arc<Frame>> {
        self.frames.get(name)
    }

    pub fn tensor(&self, name: &str) -> Option<&TensorValue> {
        self.tensors.get(name)
    }

    pub fn tuple(&self, name: &str) -> Option<&[Value]> {
        self.tuples.get(name).map(Vec::as_slice)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }

    pub fn frames(&self) -> impl Iterator<Item = (&str, &Arc<Frame>)> {
        self.frames.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn tensors(&self) -> impl Iterator<Item = (&str, &TensorValue)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Ambient dimension, when declared or implied by the ambient point.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn point(&self) -> Option<&[f64]> {
        self.point.as_deref()
    }

    /// Value bound to `name`, of whatever kind.
    pub fn lookup(&self, name: &str) -> Option<Value> {
        if let Some(x) = self.scalars.get(name) {
            return Some(Value::Scalar(*x));
        }
        if let Some(t) = self.tensors.get(name) {
            return Some(Value::Tensor(t.clone()));
        }
        if let Some(items) = self.tuples.get(name) {
            return Some(Value::Tuple(items.clone()));
        }
        if let Some(f) = self.frames.get(name) {
            return Some(Value::Frame(FrameTag::Frame(Arc::clone(f))));
        }
        self.charts.get(name).map(|c| Value::Chart(Arc::clone(c)))
    }

    /// Builds an environment from its file form. Relative chart paths are
    /// resolved against `base_dir`.
    pub fn from_file(
        file: &EnvFile,
        base_dir: Option<&Path>,
        limits: Limits,
    ) -> Result<Self, EnvError> {
        let mut env = Environment::with_limits(limits);
        if let Some(d) = file.dim {
            env.set_dim(d)?;
        }
        if let Some(p) = &file.point {
            env.set_point(p.clone())?;
        }
        for spec in &file.charts {
            let chart = match spec {
                ChartSpec::Inline(cf) => Chart::from_file(cf).map_err(tensor_err(&cf.name))?,
                ChartSpec::Named(name) => match builtin_chart(name) {
                    Some(c) => c,
                    None => {
                        let path = base_dir
                            .map_or_else(|| Path::new(name).to_path_buf(), |b| b.join(name));
                        if !path.is_file() {
                            return Err(EnvError::Schema(format!(
                                "chart {name} is neither built in nor a readable file"
                            )));
                        }
                        Chart::load(&path).map_err(tensor_err(name))?
                    }
                },
            };
            let name = chart.name().to_owned();
            env.add_chart(&name, chart)?;
        }
        for spec in &file.frames {
            let frame = env.build_frame(spec)?;
            env.add_frame(&spec.name, frame)?;
        }
        for spec in &file.tensors {
            let frame = match spec.frame.as_deref() {
                None | Some(UNSPECIFIED) => FrameTag::Unspecified,
                Some(f) => FrameTag::Frame(Arc::clone(env.frame(f).ok_or_else(|| {
                    EnvError::Schema(format!("tensor {} refers to unknown frame {f}", spec.name))
                })?)),
            };
            let t = TensorValue::new(
                spec.dim,
                spec.signature.clone(),
                spec.components.clone(),
                frame,
            )
            .map_err(tensor_err(&spec.name))?;
            env.add_tensor(&spec.name, t)?;
        }
        for (name, x) in &file.scalars {
            env.add_scalar(name, *x)?;
        }
        for (name, xs) in &file.tuples {
            env.add_tuple(name, xs.iter().map(|&x| Value::Scalar(x)).collect())?;
        }
        Ok(env)
    }

    pub fn from_json_str(
        text: &str,
        base_dir: Option<&Path>,
        limits: Limits,
    ) -> Result<Self, EnvError> {
        let file: EnvFile =
            serde_json::from_str(text).map_err(|e| EnvError::Schema(e.to_string()))?;
        Self::from_file(&file, base_dir, limits)
    }

    pub fn load(path: &Path, limits: Limits) -> Result<Self, EnvError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EnvError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text, path.parent(), limits)
    }

    fn build_frame(&self, spec: &FrameSpec) -> Result<Frame, EnvError> {
        match (&spec.chart, &spec.point, &spec.basis) {
            (Some(chart), Some(point), None) => {
                let chart = self
                    .charts
                    .get(chart)
                    .cloned()
                    .or_else(|| builtin_chart(chart).map(Arc::new))
                    .ok_or_else(|| {
                        EnvError::Schema(format!("frame {} uses unknown chart {chart}", spec.name))
                    })?;
                make_frame(&chart, point).map_err(tensor_err(&spec.name))
            }
            (None, None, Some(vectors)) => {
                let n = vectors.len();
                if n == 0 || vectors.iter().any(|v| v.len() != n) {
                    return Err(EnvError::Schema(format!(
                        "frame {}: basis must be n vectors of n components",
                        spec.name
                    )));
                }
                let m = DMatrix::from_fn(n, n, |i, j| vectors[j][i]);
                Frame::from_basis(spec.name.clone(), m).map_err(tensor_err(&spec.name))
            }
            _ => Err(EnvError::Schema(format!(
                "frame {} needs either chart and point, or basis",
                spec.name
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "point": [2.0, 0.0],
        "charts": ["polar", {"name": "skew", "dim": 2, "to_cartesian": ["q1 + q2", "q2"]}],
        "frames": [
            {"name": "C", "chart": "cartesian2", "point": [2.0, 0.0]},
            {"name": "P", "chart": "polar", "point": [2.0, 0.0]},
            {"name": "B", "basis": [[1.0, 0.0], [1.0, 2.0]]}
        ],
        "tensors": [
            {"name": "v", "dim": 2, "signature": ["contra"], "components": [3.0, 4.0], "frame": "C"},
            {"name": "M", "dim": 2, "signature": ["contra", "covar"], "components": [1, 2, 3, 4]}
        ],
        "scalars": {"i": 1},
        "tuples": {"x": [1.0, 2.0]}
    }"#;

    #[test]
    fn loads_sample() {
        let env = Environment::from_json_str(SAMPLE, None, Limits::default()).unwrap();
        assert_eq!(env.dim(), Some(2));
        assert_eq!(env.frame("P").unwrap().label(), "P");
        assert!(env.chart("skew").is_some());
        let b = env.frame("B").unwrap();
        assert_eq!(b.basis()[(0, 1)], 1.0);
        assert_eq!(b.basis()[(1, 1)], 2.0);
        assert_eq!(env.tensor("M").unwrap().component(&[2, 1]).unwrap(), 3.0);
        assert_eq!(env.scalar("i"), Some(1.0));
        assert_eq!(env.tuple("x").unwrap().len(), 2);
        assert!(matches!(env.lookup("v"), Some(Value::Tensor(_))));
        assert!(env.lookup("nope").is_none());
    }

    #[test]
    fn rejects_duplicates_and_bad_shapes() {
        let dup = r#"{"scalars": {"v": 1}, "tuples": {"v": [1]}}"#;
        assert!(matches!(
            Environment::from_json_str(dup, None, Limits::default()),
            Err(EnvError::Duplicate(_))
        ));
        let bad =
            r#"{"tensors": [{"name": "v", "dim": 2, "signature": ["contra"], "components": [1]}]}"#;
        let err = Environment::from_json_str(bad, None, Limits::default()).unwrap_err();
        assert!(err.is_schema_error());
        let unknown = r#"{"frames": [{"name": "F", "chart": "hyperbolic", "point": [1]}]}"#;
        assert!(Environment::from_json_str(unknown, None, Limits::default()).is_err());
        assert!(Environment::from_json_str(r#"{"extra": 1}"#, None, Limits::default()).is_err());
    }

    #[test]
    fn singular_frame_is_not_a_schema_error() {
        let text = r#"{"frames": [{"name": "O", "chart": "polar", "point": [0.0, 0.0]}]}"#;
        let err = Environment::from_json_str(text, None, Limits::default()).unwrap_err();
        assert_eq!(err.code(), "SingularChart");
        assert!(!err.is_schema_error());
    }

    #[test]
    fn order_cap_applies() {
        let limits = Limits {
            max_order: 1,
            ..Limits::default()
        };
        let text = r#"{"tensors": [{"name": "M", "dim": 2, "signature": ["contra", "covar"], "components": [1, 2, 3, 4]}]}"#;
        let err = Environment::from_json_str(text, None, limits).unwrap_err();
        assert_eq!(err.code(), "SizeLimit");
    }
}
