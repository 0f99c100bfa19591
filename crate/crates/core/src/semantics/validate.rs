use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use super::{Diagnostic, Environment};
use crate::om::{NodeKind, OMNode, SourceSpan};
use crate::symbols::{arity_of, Arity, LINALG1, TENSOR1};
use crate::tensor::Variance;

/// Static checks on a parsed formula. Problems are reported, never raised;
/// the environment only supplies shapes (tensor orders, frame dimensions).
pub fn validate(node: &OMNode, env: &Environment) -> Vec<Diagnostic> {
    let mut v = Validator {
        env,
        diags: Vec::new(),
        bound: Vec::new(),
        index_uses: BTreeMap::new(),
    };
    v.visit(node, false);
    for (name, uses) in &v.index_uses {
        if let (Some(_), Some(&covar)) = (uses.contra.first(), uses.covar.first()) {
            let second = uses
                .contra
                .iter()
                .chain(&uses.covar)
                .max_by_key(|s| s.start);
            v.diags.push(Diagnostic::error(
                "ImplicitEinstein",
                format!(
                    "index {name} is used as both contra_index and covar_index without an enclosing sum over {name}"
                ),
                *second.unwrap_or(&covar),
            ));
        }
    }
    v.diags.sort_by_key(|d| (d.span.start, d.severity));
    v.diags.dedup();
    v.diags
}

#[derive(Default)]
struct IndexUses {
    contra: Vec<SourceSpan>,
    covar: Vec<SourceSpan>,
}

struct Validator<'a> {
    env: &'a Environment,
    diags: Vec<Diagnostic>,
    bound: Vec<String>,
    index_uses: BTreeMap<String, IndexUses>,
}

fn tensor1_app<'n>(node: &'n OMNode, name: &str) -> Option<&'n [OMNode]> {
    match node.as_symbol_application() {
        Some((TENSOR1, n, args)) if n == name => Some(args),
        _ => None,
    }
}

fn index_variance(node: &OMNode) -> Option<(Variance, &OMNode)> {
    match node.as_symbol_application() {
        Some((TENSOR1, "contra_index", [arg])) => Some((Variance::Contra, arg)),
        Some((TENSOR1, "covar_index", [arg])) => Some((Variance::Covar, arg)),
        _ => None,
    }
}

fn integer_literal(node: &OMNode) -> Option<i64> {
    match &node.kind {
        NodeKind::Integer(i) => Some(i.to_i64().unwrap_or(i64::MAX)),
        _ => None,
    }
}

impl Validator<'_> {
    fn error(&mut self, code: &'static str, message: String, span: SourceSpan) {
        self.diags.push(Diagnostic::error(code, message, span));
    }

    fn visit(&mut self, node: &OMNode, in_head: bool) {
        match &node.kind {
            NodeKind::Symbol { cd, name } => self.check_symbol(cd, name, None, in_head, node.span),
            NodeKind::Variable(_) | NodeKind::Integer(_) | NodeKind::Float(_) => {}
            NodeKind::Application { head, args } => {
                match head.as_symbol() {
                    Some((cd, name)) => {
                        self.check_symbol(cd, name, Some(args.len()), true, head.span);
                        self.check_application(cd, name, args, node);
                    }
                    None => self.visit(head, true),
                }
                for a in args {
                    self.visit(a, false);
                }
            }
            NodeKind::SumBinder {
                var,
                lower,
                upper,
                body,
            } => {
                self.visit(lower, false);
                self.visit(upper, false);
                self.bound.push(var.clone());
                self.visit(body, false);
                self.bound.pop();
            }
        }
    }

    fn check_symbol(
        &mut self,
        cd: &str,
        name: &str,
        argc: Option<usize>,
        in_head: bool,
        span: SourceSpan,
    ) {
        let Some(arity) = arity_of(cd, name) else {
            self.error(
                "UnsupportedSymbol",
                format!("{cd}:{name} is not supported"),
                span,
            );
            return;
        };
        match (arity, argc) {
            (Arity::Constant, Some(n)) => self.error(
                "ArityMismatch",
                format!("{name} is a constant but is applied to {n} argument(s)"),
                span,
            ),
            (Arity::Constant, None) => {}
            (_, None) if !in_head => self.error(
                "ArityMismatch",
                format!(
                    "{name} takes {} but is used without arguments",
                    arity.describe()
                ),
                span,
            ),
            (_, Some(n)) if !arity.accepts(n) => self.error(
                "ArityMismatch",
                format!("{name} takes {}, got {n}", arity.describe()),
                span,
            ),
            _ => {}
        }
    }

    fn check_application(&mut self, cd: &str, name: &str, args: &[OMNode], node: &OMNode) {
        match (cd, name, args) {
            (TENSOR1, "contra_index" | "covar_index", [arg]) => {
                let variance = if name == "contra_index" {
                    Variance::Contra
                } else {
                    Variance::Covar
                };
                self.check_index_argument(arg, variance);
            }
            (TENSOR1, "Cartesian" | "unit_Cartesian", [arg]) => {
                self.check_literal(arg, self.env.dim());
            }
            (TENSOR1, "tuple_selector", [tuple, index]) => {
                let len = match (&tuple.kind, tensor1_app(tuple, "tuple")) {
                    (_, Some(items)) => Some(items.len()),
                    (NodeKind::Variable(v), None) if !self.is_bound_locally(v) => {
                        self.env.tuple(v).map(<[_]>::len)
                    }
                    _ => None,
                };
                self.check_literal(index, len);
            }
            (TENSOR1, "tensor_selector", [tensor, indexes, frame]) => {
                self.check_tensor_selector(tensor, indexes, frame);
            }
            (TENSOR1, "basis_selector", [basis, index]) => {
                let dim = self.frame_dim(basis);
                match index_variance(index) {
                    Some((_, arg)) => self.check_literal(arg, dim),
                    None => self.error(
                        "BadBasisIndex",
                        "basis_selector needs a contra_index or covar_index as its second argument"
                            .into(),
                        index.span,
                    ),
                }
            }
            (LINALG1, "vector_selector", [_, vector]) => {
                let is_tuple = tensor1_app(vector, "tuple").is_some()
                    || matches!(&vector.kind, NodeKind::Variable(v)
                        if !self.is_bound_locally(v) && self.env.tuple(v).is_some());
                if is_tuple {
                    self.diags.push(Diagnostic::warning(
                        "CoordinateTupleNotVector",
                        "vector_selector applied to a coordinate tuple; coordinates are not vector components, use tuple_selector".to_string(),
                        node.span,
                    ));
                }
            }
            _ => {}
        }
    }

    fn is_bound_locally(&self, name: &str) -> bool {
        self.bound.iter().any(|b| b == name)
    }

    /// Records index variables and range-checks index literals.
    fn check_index_argument(&mut self, arg: &OMNode, variance: Variance) {
        match &arg.kind {
            NodeKind::Variable(v) if !self.is_bound_locally(v) => {
                let uses = self.index_uses.entry(v.clone()).or_default();
                match variance {
                    Variance::Contra => uses.contra.push(arg.span),
                    Variance::Covar => uses.covar.push(arg.span),
                }
            }
            _ => self.check_literal(arg, None),
        }
    }

    fn check_literal(&mut self, arg: &OMNode, dim: Option<usize>) {
        let Some(i) = integer_literal(arg) else {
            return;
        };
        if i < 1 {
            self.error(
                "IndexOutOfRange",
                format!("index {i} must be at least 1"),
                arg.span,
            );
        } else if let Some(d) = dim.filter(|&d| i as u64 > d as u64) {
            self.error(
                "IndexOutOfRange",
                format!("index {i} exceeds dimension {d}"),
                arg.span,
            );
        }
    }

    fn frame_dim(&self, frame: &OMNode) -> Option<usize> {
        if let Some(vectors) = tensor1_app(frame, "tuple") {
            return Some(vectors.len());
        }
        match &frame.kind {
            NodeKind::Variable(v) if !self.is_bound_locally(v) => {
                self.env.frame(v).map(|f| f.dim())
            }
            _ => None,
        }
    }

    /// Order and dimension of the selected tensor, where known statically.
    fn tensor_shape(&self, tensor: &OMNode) -> (Option<usize>, Option<usize>) {
        match &tensor.kind {
            NodeKind::Variable(v) if !self.is_bound_locally(v) => match self.env.tensor(v) {
                Some(t) => (Some(t.order()), Some(t.dim())),
                None => (None, None),
            },
            NodeKind::Symbol { cd, name }
                if cd == TENSOR1
                    && matches!(name.as_str(), "Kronecker_tensor" | "metric_tensor") =>
            {
                (Some(2), None)
            }
            _ => match tensor1_app(tensor, "Levi-Civita") {
                Some([n]) => {
                    let n = integer_literal(n).and_then(|n| usize::try_from(n).ok());
                    (n, n)
                }
                _ => (None, None),
            },
        }
    }

    fn check_tensor_selector(&mut self, tensor: &OMNode, indexes: &OMNode, frame: &OMNode) {
        let Some(items) = tensor1_app(indexes, "tuple") else {
            self.error(
                "BadIndexTuple",
                "the second argument of tensor_selector must be a tuple of contra_index/covar_index applications".into(),
                indexes.span,
            );
            return;
        };
        let (order, tensor_dim) = self.tensor_shape(tensor);
        let dim = tensor_dim.or_else(|| self.frame_dim(frame));
        if let Some(order) = order.filter(|&o| o != items.len()) {
            self.error(
                "IndexCountMismatch",
                format!(
                    "a tensor of order {order} needs {order} indexes, got {}",
                    items.len()
                ),
                indexes.span,
            );
        }
        for item in items {
            match index_variance(item) {
                Some((_, arg)) => self.check_literal(arg, dim),
                None => self.error(
                    "BadIndexTuple",
                    "tensor_selector indexes must be contra_index or covar_index applications"
                        .into(),
                    item.span,
                ),
            }
        }
    }
}
