use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TensorError;
use crate::autodiff::{eval_scalar, parse_scalar, ScalarExpr};

/// A differentiable map from chart coordinates to ambient Cartesian
/// coordinates, optionally with its inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    name: String,
    coordinates: Vec<String>,
    to_cartesian: Vec<ScalarExpr>,
    from_cartesian: Option<Vec<ScalarExpr>>,
}

/// On-disk chart definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartFile {
    pub name: String,
    pub dim: usize,
    /// Names of the chart coordinates; defaults to `q1 .. qn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<String>>,
    /// Ambient coordinate `x^j` as a function of the chart coordinates.
    pub to_cartesian: Vec<String>,
    /// Chart coordinate `i` as a function of the Cartesian coordinates `x1 .. xn`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub from_cartesian: Option<Vec<String>>,
}

fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn check_slots(exprs: &[ScalarExpr], dim: usize, which: &str) -> Result<(), TensorError> {
    for (i, e) in exprs.iter().enumerate() {
        if let Some(slot) = e.max_slot().filter(|&s| s >= dim) {
            return Err(TensorError::BadChart(format!(
                "{which}[{i}] uses input slot {slot} but the chart has dimension {dim}"
            )));
        }
    }
    Ok(())
}

impl Chart {
    pub fn new(
        name: impl Into<String>,
        coordinates: Vec<String>,
        to_cartesian: Vec<ScalarExpr>,
        from_cartesian: Option<Vec<ScalarExpr>>,
    ) -> Result<Self, TensorError> {
        let dim = coordinates.len();
        if dim == 0 {
            return Err(TensorError::BadDimension(0));
        }
        if to_cartesian.len() != dim {
            return Err(TensorError::BadChart(format!(
                "to_cartesian has {} components for dimension {dim}",
                to_cartesian.len()
            )));
        }
        check_slots(&to_cartesian, dim, "to_cartesian")?;
        if let Some(inv) = &from_cartesian {
            if inv.len() != dim {
                return Err(TensorError::BadChart(format!(
                    "from_cartesian has {} components for dimension {dim}",
                    inv.len()
                )));
            }
            check_slots(inv, dim, "from_cartesian")?;
        }
        Ok(Chart {
            name: name.into(),
            coordinates,
            to_cartesian,
            from_cartesian,
        })
    }

    pub fn from_file(file: &ChartFile) -> Result<Self, TensorError> {
        let coords = file
            .coordinates
            .clone()
            .unwrap_or_else(|| numbered("q", file.dim));
        if coords.len() != file.dim {
            return Err(TensorError::BadChart(format!(
                "{} coordinate names for dimension {}",
                coords.len(),
                file.dim
            )));
        }
        let parse_all = |texts: &[String], names: &[String], which: &str| {
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    parse_scalar(t, names)
                        .map_err(|e| TensorError::BadChart(format!("{which}[{i}]: {e}")))
                })
                .collect::<Result<Vec<_>, _>>()
        };
        let to = parse_all(&file.to_cartesian, &coords, "to_cartesian")?;
        let from = match &file.from_cartesian {
            Some(texts) => Some(parse_all(
                texts,
                &numbered("x", file.dim),
                "from_cartesian",
            )?),
            None => None,
        };
        Chart::new(file.name.clone(), coords, to, from)
    }

    pub fn load(path: &Path) -> Result<Self, TensorError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TensorError::BadChart(format!("{}: {e}", path.display())))?;
        let file: ChartFile = serde_json::from_str(&text)
            .map_err(|e| TensorError::BadChart(format!("{}: {e}", path.display())))?;
        Chart::from_file(&file)
    }

    /// Definition file equivalent to this chart.
    pub fn to_file(&self) -> ChartFile {
        let xs = numbered("x", self.dim());
        ChartFile {
            name: self.name.clone(),
            dim: self.dim(),
            coordinates: Some(self.coordinates.clone()),
            to_cartesian: self
                .to_cartesian
                .iter()
                .map(|e| e.to_infix(&self.coordinates))
                .collect(),
            from_cartesian: self
                .from_cartesian
                .as_ref()
                .map(|inv| inv.iter().map(|e| e.to_infix(&xs)).collect()),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.coordinates.len()
    }

    pub fn coordinates(&self) -> &[String] {
        &self.coordinates
    }

    pub fn to_cartesian(&self) -> &[ScalarExpr] {
        &self.to_cartesian
    }

    pub fn from_cartesian(&self) -> Option<&[ScalarExpr]> {
        self.from_cartesian.as_deref()
    }

    fn check_point(&self, point: &[f64]) -> Result<(), TensorError> {
        if point.len() == self.dim() {
            Ok(())
        } else {
            Err(TensorError::DimMismatch {
                left: point.len(),
                right: self.dim(),
            })
        }
    }

    /// Ambient Cartesian coordinates of a chart point.
    pub fn cartesian_point(&self, point: &[f64]) -> Result<Vec<f64>, TensorError> {
        self.check_point(point)?;
        self.to_cartesian
            .iter()
            .map(|e| eval_scalar(e, point).map_err(TensorError::from))
            .collect()
    }

    /// Chart coordinates of an ambient point, when the inverse map is known.
    pub fn chart_point(&self, cartesian: &[f64]) -> Option<Result<Vec<f64>, TensorError>> {
        let inv = self.from_cartesian.as_ref()?;
        Some(self.check_point(cartesian).and_then(|()| {
            inv.iter()
                .map(|e| eval_scalar(e, cartesian).map_err(TensorError::from))
                .collect()
        }))
    }
}

/// Identity chart on `R^n` with coordinates `x1 .. xn`.
pub fn cartesian_chart(n: usize) -> Result<Chart, TensorError> {
    if n == 0 {
        return Err(TensorError::BadDimension(0));
    }
    let id: Vec<ScalarExpr> = (0..n).map(ScalarExpr::var).collect();
    Chart::new(
        format!("cartesian{n}"),
        numbered("x", n),
        id.clone(),
        Some(id),
    )
}

/// `(r, theta) -> (r cos theta, r sin theta)`.
pub fn polar_chart() -> Chart {
    let r = || ScalarExpr::var(0);
    let t = || ScalarExpr::var(1);
    let (x, y) = (|| ScalarExpr::var(0), || ScalarExpr::var(1));
    Chart::new(
        "polar",
        vec!["r".into(), "theta".into()],
        vec![r() * t().cos(), r() * t().sin()],
        Some(vec![
            (x().powi(2) + y().powi(2)).sqrt(),
            ScalarExpr::atan2(y(), x()),
        ]),
    )
    .expect("polar chart is well formed")
}

/// `(r, theta, phi) -> (r sin theta cos phi, r sin theta sin phi, r cos theta)`,
/// with `theta` the polar angle from the third axis.
pub fn spherical_chart() -> Chart {
    let v = ScalarExpr::var;
    let rho = || (v(0).powi(2) + v(1).powi(2)).sqrt();
    Chart::new(
        "spherical",
        vec!["r".into(), "theta".into(), "phi".into()],
        vec![
            v(0) * v(1).sin() * v(2).cos(),
            v(0) * v(1).sin() * v(2).sin(),
            v(0) * v(1).cos(),
        ],
        Some(vec![
            (v(0).powi(2) + v(1).powi(2) + v(2).powi(2)).sqrt(),
            ScalarExpr::atan2(rho(), v(2)),
            ScalarExpr::atan2(v(1), v(0)),
        ]),
    )
    .expect("spherical chart is well formed")
}

/// Built-in chart by name: `cartesian<n>`, `polar` or `spherical`.
pub fn builtin_chart(name: &str) -> Option<Chart> {
    match name {
        "polar" => Some(polar_chart()),
        "spherical" => Some(spherical_chart()),
        _ => {
            let n: usize = name.strip_prefix("cartesian")?.parse().ok()?;
            cartesian_chart(n).ok()
        }
    }
}
