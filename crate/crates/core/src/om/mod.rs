//! OpenMath object model for the supported XML subset.
//!
//! Only `OMOBJ`, `OMA`, `OMS`, `OMV`, `OMI` and `OMF` are accepted. The one
//! binder shape that is recognised is explicit finite summation:
//!
//! ```text
//! arith1:sum( interval1:integer_interval(lo, hi), fns1:lambda[j]. body )
//! ```
//!
//! which becomes [`NodeKind::SumBinder`]. Every other `OMBIND` is rejected.

mod compact;
mod xml;

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

pub use compact::{parse_compact, to_compact};
pub use xml::{parse_xml, serialize_xml};

/// Byte range and 1-based line/column of the start of a node in its source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, serde::Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl SourceSpan {
    /// Span covering `start..end` of `source`, with line and column derived from `start`.
    pub fn locate(source: &str, start: usize, end: usize) -> Self {
        let start = start.min(source.len());
        let end = end.clamp(start, source.len());
        let (line, column) = line_col(source, start);
        SourceSpan {
            start,
            end,
            line,
            column,
        }
    }

    /// Span of a node that was built in memory rather than parsed.
    pub const fn synthetic() -> Self {
        SourceSpan {
            start: 0,
            end: 0,
            line: 1,
            column: 1,
        }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        self.start <= other.start && other.end <= self.end
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Line and column (both 1-based, column counted in characters) of a byte offset.
pub(crate) fn line_col(source: &str, offset: usize) -> (usize, usize) {
    let mut offset = offset.min(source.len());
    while !source.is_char_boundary(offset) {
        offset -= 1;
    }
    let before = &source[..offset];
    let line = before.matches('\n').count() + 1;
    let line_start = before.rfind('\n').map_or(0, |i| i + 1);
    let column = before[line_start..].chars().count() + 1;
    (line, column)
}

/// An OpenMath object with the span it was parsed from.
///
/// Equality is structural: spans are ignored, floats compare by bit pattern.
#[derive(Debug, Clone)]
pub struct OMNode {
    pub kind: NodeKind,
    pub span: SourceSpan,
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Symbol {
        cd: String,
        name: String,
    },
    Variable(String),
    Integer(BigInt),
    Float(f64),
    Application {
        head: Box<OMNode>,
        args: Vec<OMNode>,
    },
    SumBinder {
        var: String,
        lower: Box<OMNode>,
        upper: Box<OMNode>,
        body: Box<OMNode>,
    },
}

impl PartialEq for NodeKind {
    fn eq(&self, other: &Self) -> bool {
        use NodeKind::*;
        match (self, other) {
            (Symbol { cd: a, name: b }, Symbol { cd: c, name: d }) => a == c && b == d,
            (Variable(a), Variable(b)) => a == b,
            (Integer(a), Integer(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Application { head: h1, args: a1 }, Application { head: h2, args: a2 }) => {
                h1 == h2 && a1 == a2
            }
            (
                SumBinder {
                    var: v1,
                    lower: l1,
                    upper: u1,
                    body: b1,
                },
                SumBinder {
                    var: v2,
                    lower: l2,
                    upper: u2,
                    body: b2,
                },
            ) => v1 == v2 && l1 == l2 && u1 == u2 && b1 == b2,
            _ => false,
        }
    }
}

impl PartialEq for OMNode {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl OMNode {
    pub fn new(kind: NodeKind, span: SourceSpan) -> Self {
        OMNode { kind, span }
    }

    pub fn symbol(cd: &str, name: &str) -> Self {
        Self::new(
            NodeKind::Symbol {
                cd: cd.to_owned(),
                name: name.to_owned(),
            },
            SourceSpan::synthetic(),
        )
    }

    pub fn variable(name: &str) -> Self {
        Self::new(NodeKind::Variable(name.to_owned()), SourceSpan::synthetic())
    }

    pub fn integer(value: impl Into<BigInt>) -> Self {
        Self::new(NodeKind::Integer(value.into()), SourceSpan::synthetic())
    }

    pub fn float(value: f64) -> Self {
        Self::new(NodeKind::Float(value), SourceSpan::synthetic())
    }

    /// Application node. Panics if `args` is empty, since OpenMath has no nullary application.
    pub fn apply(head: OMNode, args: Vec<OMNode>) -> Self {
        assert!(
            !args.is_empty(),
            "OpenMath applications take at least one argument"
        );
        Self::new(
            NodeKind::Application {
                head: Box::new(head),
                args,
            },
            SourceSpan::synthetic(),
        )
    }

    pub fn sum(var: &str, lower: OMNode, upper: OMNode, body: OMNode) -> Self {
        Self::new(
            NodeKind::SumBinder {
                var: var.to_owned(),
                lower: Box::new(lower),
                upper: Box::new(upper),
                body: Box::new(body),
            },
            SourceSpan::synthetic(),
        )
    }

    /// `(cd, name)` if this node is a symbol.
    pub fn as_symbol(&self) -> Option<(&str, &str)> {
        match &self.kind {
            NodeKind::Symbol { cd, name } => Some((cd, name)),
            _ => None,
        }
    }

    /// `(cd, name, args)` if this node applies a symbol.
    pub fn as_symbol_application(&self) -> Option<(&str, &str, &[OMNode])> {
        match &self.kind {
            NodeKind::Application { head, args } => {
                let (cd, name) = head.as_symbol()?;
                Some((cd, name, args))
            }
            _ => None,
        }
    }

    pub fn is_symbol(&self, cd: &str, name: &str) -> bool {
        self.as_symbol() == Some((cd, name))
    }

    /// Direct children in document order.
    pub fn children(&self) -> Vec<&OMNode> {
        match &self.kind {
            NodeKind::Application { head, args } => {
                let mut out = vec![head.as_ref()];
                out.extend(args.iter());
                out
            }
            NodeKind::SumBinder {
                lower, upper, body, ..
            } => vec![lower.as_ref(), upper.as_ref(), body.as_ref()],
            _ => Vec::new(),
        }
    }
}

/// OpenMath names: a letter or underscore, then letters, digits, `_`, `-` or `.`.
pub fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    XmlSyntax,
    UnsupportedElement,
    BadName,
    CompactSyntax,
    AmbiguousName,
}

impl ParseErrorKind {
    pub fn code(&self) -> &'static str {
        match self {
            ParseErrorKind::XmlSyntax => "XmlSyntax",
            ParseErrorKind::UnsupportedElement => "UnsupportedElement",
            ParseErrorKind::BadName => "BadName",
            ParseErrorKind::CompactSyntax => "CompactSyntax",
            ParseErrorKind::AmbiguousName => "AmbiguousName",
        }
    }
}

#[derive(Debug, Clone, Error)]
#[error("{} at {span}: {message}", kind.code())]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError {
            kind,
            message: message.into(),
            span,
        }
    }
}
