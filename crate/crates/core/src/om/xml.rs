use std::fmt::Write as _;

use num_bigint::BigInt;
use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use super::{is_valid_name, NodeKind, OMNode, ParseError, ParseErrorKind, SourceSpan};
use crate::symbols::{ARITH1, FNS1, INTERVAL1};

const OM_NS: &str = "http://www.openmath.org/OpenMath";

/// Raw element tree, kept only long enough to map it onto [`OMNode`].
struct Element {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<Element>,
    text: String,
    span: SourceSpan,
}

impl Element {
    fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

/// Parses an `OMOBJ` document into an [`OMNode`].
pub fn parse_xml(input: &str) -> Result<OMNode, ParseError> {
    let root = read_tree(input)?;
    if root.name != "OMOBJ" {
        return Err(ParseError::new(
            ParseErrorKind::XmlSyntax,
            format!("root element must be OMOBJ, found {}", root.name),
            root.span,
        ));
    }
    no_text(&root)?;
    match root.children.as_slice() {
        [only] => to_node(only),
        _ => Err(ParseError::new(
            ParseErrorKind::XmlSyntax,
            format!(
                "OMOBJ must contain exactly one object, found {}",
                root.children.len()
            ),
            root.span,
        )),
    }
}

fn read_tree(input: &str) -> Result<Element, ParseError> {
    let mut reader = Reader::from_str(input);
    reader.config_mut().trim_text(true);

    let syntax = |msg: String, at: usize| {
        ParseError::new(
            ParseErrorKind::XmlSyntax,
            msg,
            SourceSpan::locate(input, at, at),
        )
    };

    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;
    loop {
        let before = reader.buffer_position() as usize;
        let event = reader.read_event().map_err(|e| {
            syntax(
                format!("malformed XML: {e}"),
                reader.error_position() as usize,
            )
        })?;
        let after = reader.buffer_position() as usize;
        let tag_start = || before + input[before..after].find('<').unwrap_or(0);
        match event {
            Event::Start(_) | Event::Empty(_) if root.is_some() => {
                return Err(syntax(
                    "content after the root element".to_owned(),
                    tag_start(),
                ));
            }
            Event::Start(e) => {
                let el = open_element(input, &e, tag_start(), after)?;
                stack.push(el);
            }
            Event::Empty(e) => {
                let el = open_element(input, &e, tag_start(), after)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::End(_) => {
                let mut el = stack
                    .pop()
                    .ok_or_else(|| syntax("unexpected end tag".to_owned(), tag_start()))?;
                el.span = SourceSpan::locate(input, el.span.start, after);
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let text = t.xml10_content();
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&text),
                    None if text.trim().is_empty() => {}
                    None => return Err(syntax("text outside the root element".to_owned(), before)),
                }
            }
            Event::CData(t) => match stack.last_mut() {
                Some(el) => el.text.push_str(&t.xml10_content()),
                None => return Err(syntax("CDATA outside the root element".to_owned(), before)),
            },
            Event::GeneralRef(r) => {
                let resolved = match r.resolve_char_ref() {
                    Ok(Some(c)) => c.to_string(),
                    _ => match &*r {
                        "lt" => "<".to_owned(),
                        "gt" => ">".to_owned(),
                        "amp" => "&".to_owned(),
                        "apos" => "'".to_owned(),
                        "quot" => "\"".to_owned(),
                        other => {
                            return Err(syntax(format!("unknown entity &{other};"), before));
                        }
                    },
                };
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&resolved),
                    None => {
                        return Err(syntax("entity outside the root element".to_owned(), before))
                    }
                }
            }
            Event::Comment(_) | Event::Decl(_) | Event::PI(_) | Event::DocType(_) => {}
            Event::Eof => break,
        }
    }
    if let Some(open) = stack.last() {
        return Err(ParseError::new(
            ParseErrorKind::XmlSyntax,
            format!("unclosed element {}", open.name),
            open.span,
        ));
    }
    root.ok_or_else(|| syntax("empty document".to_owned(), input.len()))
}

fn open_element(
    input: &str,
    e: &BytesStart<'_>,
    start: usize,
    end: usize,
) -> Result<Element, ParseError> {
    let span = SourceSpan::locate(input, start, end);
    let mut attrs = Vec::new();
    for attr in e.attributes() {
        let attr = attr.map_err(|err| {
            ParseError::new(
                ParseErrorKind::XmlSyntax,
                format!("bad attribute: {err}"),
                span,
            )
        })?;
        let value = attr
            .normalized_value(quick_xml::XmlVersion::Implicit1_0)
            .map_err(|err| {
                ParseError::new(
                    ParseErrorKind::XmlSyntax,
                    format!("bad attribute value: {err}"),
                    span,
                )
            })?;
        attrs.push((attr.key.as_ref().to_owned(), value.into_owned()));
    }
    Ok(Element {
        name: e.name().as_ref().to_owned(),
        attrs,
        children: Vec::new(),
        text: String::new(),
        span,
    })
}

fn no_text(el: &Element) -> Result<(), ParseError> {
    if el.text.trim().is_empty() {
        Ok(())
    } else {
        Err(ParseError::new(
            ParseErrorKind::XmlSyntax,
            format!("unexpected text inside {}", el.name),
            el.span,
        ))
    }
}

fn leaf(el: &Element) -> Result<(), ParseError> {
    match el.children.first() {
        None => Ok(()),
        Some(child) => Err(ParseError::new(
            ParseErrorKind::XmlSyntax,
            format!("{} must not contain child elements", el.name),
            child.span,
        )),
    }
}

fn required_attr<'a>(el: &'a Element, key: &str) -> Result<&'a str, ParseError> {
    el.attr(key).ok_or_else(|| {
        ParseError::new(
            ParseErrorKind::XmlSyntax,
            format!("{} requires a {key} attribute", el.name),
            el.span,
        )
    })
}

fn checked_name<'a>(el: &Element, value: &'a str) -> Result<&'a str, ParseError> {
    if is_valid_name(value) {
        Ok(value)
    } else {
        Err(ParseError::new(
            ParseErrorKind::BadName,
            format!("{value:?} is not a valid OpenMath name"),
            el.span,
        ))
    }
}

fn to_node(el: &Element) -> Result<OMNode, ParseError> {
    let kind = match el.name.as_str() {
        "OMI" => {
            leaf(el)?;
            NodeKind::Integer(parse_integer(el.text.trim()).ok_or_else(|| {
                ParseError::new(
                    ParseErrorKind::XmlSyntax,
                    format!("invalid integer literal {:?}", el.text.trim()),
                    el.span,
                )
            })?)
        }
        "OMF" => {
            leaf(el)?;
            no_text(el)?;
            let value = match (el.attr("dec"), el.attr("hex")) {
                (Some(dec), None) => parse_float_dec(dec),
                (None, Some(hex)) => parse_float_hex(hex),
                _ => None,
            };
            NodeKind::Float(value.ok_or_else(|| {
                ParseError::new(
                    ParseErrorKind::XmlSyntax,
                    "OMF needs exactly one valid dec or hex attribute",
                    el.span,
                )
            })?)
        }
        "OMS" => {
            leaf(el)?;
            no_text(el)?;
            let cd = checked_name(el, required_attr(el, "cd")?)?;
            let name = checked_name(el, required_attr(el, "name")?)?;
            NodeKind::Symbol {
                cd: cd.to_owned(),
                name: name.to_owned(),
            }
        }
        "OMV" => {
            leaf(el)?;
            no_text(el)?;
            NodeKind::Variable(checked_name(el, required_attr(el, "name")?)?.to_owned())
        }
        "OMA" => {
            no_text(el)?;
            return application(el);
        }
        other => {
            return Err(ParseError::new(
                ParseErrorKind::UnsupportedElement,
                format!("element {other} is not supported"),
                el.span,
            ))
        }
    };
    Ok(OMNode::new(kind, el.span))
}

fn application(el: &Element) -> Result<OMNode, ParseError> {
    let (head_el, arg_els) = match el.children.split_first() {
        Some((h, rest)) if !rest.is_empty() => (h, rest),
        _ => {
            return Err(ParseError::new(
                ParseErrorKind::XmlSyntax,
                "OMA needs a head and at least one argument",
                el.span,
            ))
        }
    };
    match head_el.name.as_str() {
        "OMS" | "OMA" => {}
        "OMV" | "OMI" | "OMF" => {
            return Err(ParseError::new(
                ParseErrorKind::XmlSyntax,
                "the head of an application must be a symbol or an application",
                head_el.span,
            ))
        }
        // Unsupported element; to_node reports it.
        _ => {
            to_node(head_el)?;
        }
    }
    let head = to_node(head_el)?;
    if head.is_symbol(ARITH1, "sum") {
        if let Some(binder) = summation(el, arg_els)? {
            return Ok(binder);
        }
    }
    let args = arg_els.iter().map(to_node).collect::<Result<Vec<_>, _>>()?;
    Ok(OMNode::new(
        NodeKind::Application {
            head: Box::new(head),
            args,
        },
        el.span,
    ))
}

/// Recognises `sum(integer_interval(lo, hi), lambda[j]. body)`; anything else is left
/// as an ordinary application unless it carries an `OMBIND`, which is then rejected.
fn summation(el: &Element, args: &[Element]) -> Result<Option<OMNode>, ParseError> {
    let [interval, bind] = args else {
        return Ok(None);
    };
    if bind.name != "OMBIND" {
        return Ok(None);
    }
    let unsupported = |why: &str| {
        ParseError::new(
            ParseErrorKind::UnsupportedElement,
            format!("OMBIND is only supported as the lambda of a finite sum: {why}"),
            bind.span,
        )
    };
    if interval.name != "OMA" || interval.children.len() != 3 {
        return Err(unsupported("expected integer_interval(lo, hi) as range"));
    }
    let interval_head = to_node(&interval.children[0])?;
    if !interval_head.is_symbol(INTERVAL1, "integer_interval") {
        return Err(unsupported("expected integer_interval(lo, hi) as range"));
    }
    no_text(bind)?;
    let [lambda, bvar, body] = bind.children.as_slice() else {
        return Err(unsupported(
            "expected lambda, one bound variable and a body",
        ));
    };
    if !to_node(lambda)?.is_symbol(FNS1, "lambda") {
        return Err(unsupported("binder symbol must be fns1:lambda"));
    }
    if bvar.name != "OMBVAR" {
        return Err(unsupported("missing OMBVAR"));
    }
    let var = match bvar.children.as_slice() {
        [v] if v.name == "OMV" => match to_node(v)?.kind {
            NodeKind::Variable(name) => name,
            _ => unreachable!(),
        },
        _ => return Err(unsupported("exactly one bound variable is supported")),
    };
    let lower = to_node(&interval.children[1])?;
    let upper = to_node(&interval.children[2])?;
    let body = to_node(body)?;
    Ok(Some(OMNode::new(
        NodeKind::SumBinder {
            var,
            lower: Box::new(lower),
            upper: Box::new(upper),
            body: Box::new(body),
        },
        el.span,
    )))
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let (neg, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let value = match digits.strip_prefix('x') {
        Some(hex) if !hex.is_empty() && hex.bytes().all(|b| b.is_ascii_hexdigit()) => {
            BigInt::parse_bytes(hex.as_bytes(), 16)?
        }
        Some(_) => return None,
        None if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) => {
            BigInt::parse_bytes(digits.as_bytes(), 10)?
        }
        None => return None,
    };
    Some(if neg { -value } else { value })
}

fn parse_float_dec(text: &str) -> Option<f64> {
    match text {
        "INF" => Some(f64::INFINITY),
        "-INF" => Some(f64::NEG_INFINITY),
        "NaN" => Some(f64::NAN),
        _ if text
            .bytes()
            .all(|b| b.is_ascii_digit() || matches!(b, b'-' | b'+' | b'.' | b'e' | b'E')) =>
        {
            text.parse().ok()
        }
        _ => None,
    }
}

fn parse_float_hex(text: &str) -> Option<f64> {
    if text.len() != 16 {
        return None;
    }
    u64::from_str_radix(text, 16).ok().map(f64::from_bits)
}

pub(crate) fn format_float(value: f64) -> String {
    if value.is_nan() {
        "NaN".to_owned()
    } else if value.is_infinite() {
        if value > 0.0 { "INF" } else { "-INF" }.to_owned()
    } else {
        format!("{value:?}")
    }
}

fn escape_attr(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}

/// Canonical XML: two-space indentation, `cd` before `name`, LF line endings,
/// trailing newline.
pub fn serialize_xml(node: &OMNode) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "<OMOBJ xmlns=\"{OM_NS}\">");
    write_node(&mut out, node, 1);
    out.push_str("</OMOBJ>\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn write_symbol(out: &mut String, cd: &str, name: &str, depth: usize) {
    indent(out, depth);
    let _ = writeln!(
        out,
        "<OMS cd=\"{}\" name=\"{}\"/>",
        escape_attr(cd),
        escape_attr(name)
    );
}

fn write_variable(out: &mut String, name: &str, depth: usize) {
    indent(out, depth);
    let _ = writeln!(out, "<OMV name=\"{}\"/>", escape_attr(name));
}

fn write_node(out: &mut String, node: &OMNode, depth: usize) {
    match &node.kind {
        NodeKind::Integer(v) => {
            indent(out, depth);
            let _ = writeln!(out, "<OMI>{v}</OMI>");
        }
        NodeKind::Float(v) => {
            indent(out, depth);
            let _ = writeln!(out, "<OMF dec=\"{}\"/>", format_float(*v));
        }
        NodeKind::Symbol { cd, name } => write_symbol(out, cd, name, depth),
        NodeKind::Variable(name) => write_variable(out, name, depth),
        NodeKind::Application { head, args } => {
            indent(out, depth);
            out.push_str("<OMA>\n");
            write_node(out, head, depth + 1);
            for arg in args {
                write_node(out, arg, depth + 1);
            }
            indent(out, depth);
            out.push_str("</OMA>\n");
        }
        NodeKind::SumBinder {
            var,
            lower,
            upper,
            body,
        } => {
            indent(out, depth);
            out.push_str("<OMA>\n");
            write_symbol(out, ARITH1, "sum", depth + 1);
            indent(out, depth + 1);
            out.push_str("<OMA>\n");
            write_symbol(out, INTERVAL1, "integer_interval", depth + 2);
            write_node(out, lower, depth + 2);
            write_node(out, upper, depth + 2);
            indent(out, depth + 1);
            out.push_str("</OMA>\n");
            indent(out, depth + 1);
            out.push_str("<OMBIND>\n");
            write_symbol(out, FNS1, "lambda", depth + 2);
            indent(out, depth + 2);
            out.push_str("<OMBVAR>\n");
            write_variable(out, var, depth + 3);
            indent(out, depth + 2);
            out.push_str("</OMBVAR>\n");
            write_node(out, body, depth + 2);
            indent(out, depth + 1);
            out.push_str("</OMBIND>\n");
            indent(out, depth);
            out.push_str("</OMA>\n");
        }
    }
}
