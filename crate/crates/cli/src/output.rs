use nalgebra::DMatrix;
use serde_json::{json, Value as Json};
use tensor1::om::{serialize_xml, OMNode};
use tensor1::semantics::{Diagnostic, Value};
use tensor1::symbols::TENSOR1;
use tensor1::tensor::{Frame, FrameTag, TensorValue, Variance};

/// `x` to `digits` significant digits, trailing zeros dropped; switches to
/// exponent form outside `1e-5 ..= 10^digits`.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        format!("{}e{exp}", trim_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_owned()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

const TEXT_DIGITS: usize = 6;

fn num(x: f64) -> String {
    sig(x, TEXT_DIGITS)
}

fn signature_text(sig: &[Variance]) -> String {
    let parts: Vec<&str> = sig.iter().map(|v| v.as_str()).collect();
    format!("[{}]", parts.join(", "))
}

fn frame_label(tag: &FrameTag) -> &str {
    tag.label().unwrap_or("unspecified")
}

/// Header line plus one line per run of the last index.
pub fn tensor_text(t: &TensorValue) -> String {
    let mut out = format!(
        "tensor dim={} signature={} frame={}\n",
        t.dim(),
        signature_text(t.signature()),
        frame_label(t.frame())
    );
    let n = t.dim();
    let rows: Vec<&[f64]> = if t.order() == 0 {
        vec![t.components()]
    } else {
        t.components().chunks(n).collect()
    };
    for (r, row) in rows.iter().enumerate() {
        let mut prefix = Vec::new();
        let mut rest = r;
        for _ in 0..t.order().saturating_sub(1) {
            prefix.push(rest % n + 1);
            rest /= n;
        }
        prefix.reverse();
        let mut label: Vec<String> = prefix.iter().map(usize::to_string).collect();
        if t.order() > 0 {
            label.push(":".into());
        }
        let comps: Vec<String> = row.iter().map(|&c| num(c)).collect();
        out.push_str(&format!("  [{}] {}\n", label.join(","), comps.join(" ")));
    }
    out
}

fn inline(v: &Value) -> String {
    match v {
        Value::Scalar(x) => num(*x),
        Value::Tensor(t) => {
            let comps: Vec<String> = t.components().iter().map(|&c| num(c)).collect();
            format!(
                "tensor{}({})@{}",
                signature_text(t.signature()),
                comps.join(", "),
                frame_label(t.frame())
            )
        }
        Value::Tuple(items) => {
            let parts: Vec<String> = items.iter().map(inline).collect();
            format!("({})", parts.join(", "))
        }
        Value::Index(ix) => ix.to_string(),
        Value::Frame(tag) => format!("frame {}", frame_label(tag)),
        Value::Chart(c) => format!("chart {}", c.name()),
    }
}

pub fn value_text(v: &Value) -> String {
    match v {
        Value::Tensor(t) => tensor_text(t),
        other => format!("{}\n", inline(other)),
    }
}

pub fn value_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(&v.to_json()).expect("JSON values serialize");
    s.push('\n');
    s
}

fn value_node(v: &Value) -> Option<OMNode> {
    match v {
        Value::Scalar(x) if x.fract() == 0.0 && x.abs() < 2f64.powi(53) => {
            Some(OMNode::integer(*x as i64))
        }
        Value::Scalar(x) => Some(OMNode::float(*x)),
        Value::Index(ix) => Some(OMNode::apply(
            OMNode::symbol(TENSOR1, &format!("{}_index", ix.variance)),
            vec![OMNode::integer(ix.value as u64)],
        )),
        Value::Tuple(items) if !items.is_empty() => Some(OMNode::apply(
            OMNode::symbol(TENSOR1, "tuple"),
            items.iter().map(value_node).collect::<Option<Vec<_>>>()?,
        )),
        _ => None,
    }
}

/// OpenMath form of scalars, indexes and tuples of those.
pub fn value_xml(v: &Value) -> Option<String> {
    value_node(v).map(|n| serialize_xml(&n))
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn matrix_text(out: &mut String, title: &str, m: &DMatrix<f64>) {
    out.push_str(title);
    out.push_str(":\n");
    for row in matrix_rows(m) {
        let cells: Vec<String> = row.iter().map(|&c| num(c)).collect();
        out.push_str(&format!("  {}\n", cells.join(" ")));
    }
}

fn list_text(xs: &[f64]) -> String {
    xs.iter().map(|&x| num(x)).collect::<Vec<_>>().join(" ")
}

pub fn frame_text(f: &Frame) -> String {
    let mut out = format!(
        "frame {} (chart {}, dim {})\n",
        f.label(),
        f.chart().name(),
        f.dim()
    );
    out.push_str(&format!("point: {}\n", list_text(f.point())));
    match f.anchor() {
        Some(a) => out.push_str(&format!("ambient point: {}\n", list_text(a))),
        None => out.push_str("ambient point: any (linear frame)\n"),
    }
    matrix_text(&mut out, "basis (columns g_i)", f.basis());
    matrix_text(&mut out, "dual basis (rows g^i)", f.dual_basis());
    matrix_text(&mut out, "metric g_ij", f.metric());
    matrix_text(&mut out, "inverse metric g^ij", f.inverse_metric());
    out.push_str(&format!("det(basis): {}\n", num(f.det())));
    out
}

pub fn frame_json(f: &Frame) -> String {
    let j = json!({
        "label": f.label(),
        "chart": f.chart().name(),
        "dim": f.dim(),
        "point": f.point(),
        "anchor": f.anchor(),
        "basis": matrix_rows(f.basis()),
        "dual_basis": matrix_rows(f.dual_basis()),
        "metric": matrix_rows(f.metric()),
        "inverse_metric": matrix_rows(f.inverse_metric()),
        "det": f.det(),
    });
    let mut s = serde_json::to_string_pretty(&j).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn diagnostics_text(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| format!("{d}\n")).collect()
}

pub fn diagnostics_json(diags: &[Diagnostic]) -> String {
    let items: Vec<Json> = diags
        .iter()
        .map(|d| {
            json!({
                "severity": d.severity.as_str(),
                "code": d.code,
                "line": d.span.line,
                "column": d.span.column,
                "message": d.message,
            })
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&items).expect("JSON values serialize");
    s.push('\n');
    s
}
