use std::sync::Arc;

use nalgebra::DMatrix;

use super::{Chart, TensorError, POINT_TOLERANCE, SINGULAR_DET};
use crate::autodiff::{eval_dual, ScalarExpr};

/// A chart anchored at a point, with the basis it induces there.
///
/// `basis` holds the covariant basis vectors `g_i` as columns, in ambient
/// Cartesian components. `dual_basis` holds the covectors `g^i` as rows.
#[derive(Debug, Clone)]
pub struct Frame {
    label: String,
    chart: Arc<Chart>,
    point: Vec<f64>,
    /// Ambient point, or `None` for a basis that does not depend on position.
    anchor: Option<Vec<f64>>,
    basis: DMatrix<f64>,
    dual_basis: DMatrix<f64>,
    metric: DMatrix<f64>,
    inverse_metric: DMatrix<f64>,
    det: f64,
}

impl Frame {
    fn from_parts(
        label: String,
        chart: Arc<Chart>,
        point: Vec<f64>,
        anchor: Option<Vec<f64>>,
        basis: DMatrix<f64>,
    ) -> Result<Self, TensorError> {
        let det = basis.determinant();
        let singular = || TensorError::SingularChart {
            chart: chart.name().to_owned(),
            point: point.clone(),
            det,
        };
        if !det.is_finite() || det.abs() < SINGULAR_DET {
            return Err(singular());
        }
        let dual_basis = basis.clone().try_inverse().ok_or_else(singular)?;
        let metric = basis.transpose() * &basis;
        let metric = (&metric + metric.transpose()) * 0.5;
        let inverse_metric = metric.clone().try_inverse().ok_or_else(singular)?;
        let inverse_metric = (&inverse_metric + inverse_metric.transpose()) * 0.5;
        Ok(Frame {
            label,
            chart,
            point,
            anchor,
            basis,
            dual_basis,
            metric,
            inverse_metric,
            det,
        })
    }

    /// Basis built from an explicit matrix whose columns are the basis vectors
    /// in Cartesian components. The frame is linear, so it has no anchor point.
    pub fn from_basis(label: impl Into<String>, basis: DMatrix<f64>) -> Result<Self, TensorError> {
        let n = basis.nrows();
        if n == 0 || basis.ncols() != n {
            return Err(TensorError::BadChart(format!(
                "basis must be a non-empty square matrix, got {}x{}",
                basis.nrows(),
                basis.ncols()
            )));
        }
        let to_cartesian = (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| ScalarExpr::constant(basis[(j, i)]) * ScalarExpr::var(i))
                    .reduce(|a, b| a + b)
                    .expect("n > 0")
            })
            .collect();
        let coords = (1..=n).map(|i| format!("q{i}")).collect();
        let chart = Chart::new("basis", coords, to_cartesian, None)?;
        Frame::from_parts(label.into(), Arc::new(chart), vec![0.0; n], None, basis)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn anchor(&self) -> Option<&[f64]> {
        self.anchor.as_deref()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dual_basis(&self) -> &DMatrix<f64> {
        &self.dual_basis
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn inverse_metric(&self) -> &DMatrix<f64> {
        &self.inverse_metric
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// Whether both frames describe the same ambient point. A frame without an
    /// anchor is valid everywhere.
    pub fn coincides_with(&self, other: &Frame) -> bool {
        self.anchor_distance(other) <= POINT_TOLERANCE
    }

    /// Largest coordinate difference between the two ambient points (0 when
    /// either frame is position independent).
    pub fn anchor_distance(&self, other: &Frame) -> f64 {
        match (&self.anchor, &other.anchor) {
            (Some(a), Some(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 0.0,
        }
    }

    /// Same chart, same point and same basis.
    pub fn same_frame(&self, other: &Frame) -> bool {
        if std::ptr::eq(self, other) {
            return true;
        }
        self.chart.name() == other.chart.name()
            && self.dim() == other.dim()
            && self
                .point
                .iter()
                .zip(&other.point)
                .all(|(a, b)| (a - b).abs() <= POINT_TOLERANCE)
            && self.anchor.is_some() == other.anchor.is_some()
            && (&self.basis - &other.basis).amax() <= POINT_TOLERANCE
    }

    /// Whether this is a Cartesian frame: orthonormal, right-handed basis.
    pub fn is_cartesian(&self) -> bool {
        let n = self.dim();
        (&self.basis - DMatrix::identity(n, n)).amax() <= POINT_TOLERANCE
    }
}

/// Evaluates the chart at `point`: basis column `i` is `∂x/∂q^i`, from one
/// forward-mode pass per Cartesian component.
pub fn make_frame(chart: &Arc<Chart>, point: &[f64]) -> Result<Frame, TensorError> {
    let n = chart.dim();
    if point.len() != n {
        return Err(TensorError::DimMismatch {
            left: point.len(),
            right: n,
        });
    }
    let mut basis = DMatrix::zeros(n, n);
    let mut anchor = Vec::with_capacity(n);
    for (j, component) in chart.to_cartesian().iter().enumerate() {
        let d = eval_dual(component, point)?;
        anchor.push(d.value);
        for (i, p) in d.partials.iter().enumerate() {
            basis[(j, i)] = *p;
        }
    }
    let label = format!(
        "{}@({})",
        chart.name(),
        point
            .iter()
            .map(|p| format!("{p}"))
            .collect::<Vec<_>>()
            .join(",")
    );
    Frame::from_parts(
        label,
        Arc::clone(chart),
        point.to_vec(),
        Some(anchor),
        basis,
    )
}
