//! Compact text syntax for OpenMath objects.
//!
//! ```text
//! expr   = number | sum | call | symbol | variable ;
//! sum    = "sum" "(" ident "=" expr ".." expr "," expr ")" ;
//! call   = head "(" expr { "," expr } ")" { "(" expr { "," expr } ")" } ;
//! head   = qname | ident ;
//! symbol = qname | ident ;            (* bare ident naming a tensor1 symbol *)
//! qname  = ident ":" ident ;
//! ident  = ( letter | "_" ) { letter | digit | "_" | "-" letter } ;
//! number = [ "-" ] digit { digit } [ "." digit { digit } ] [ ( "e" | "E" ) [ "+" | "-" ] digit { digit } ] ;
//! ```
//!
//! A number with a fraction or exponent is a float, otherwise an integer.
//! Unqualified call heads resolve to `tensor1`, then `arith1`; anything else
//! must be qualified. Bare identifiers are variables unless they name a
//! `tensor1` symbol.

use std::fmt::Write as _;

use num_bigint::BigInt;

use super::{NodeKind, OMNode, ParseError, ParseErrorKind, SourceSpan};
use crate::symbols::{is_arith1_name, is_tensor1_name, ARITH1, TENSOR1};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Float(f64),
    LParen,
    RParen,
    Comma,
    Colon,
    Eq,
    DotDot,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |msg: String, at: usize| {
        ParseError::new(
            ParseErrorKind::CompactSyntax,
            msg,
            SourceSpan::locate(src, at, at + 1),
        )
    };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let single = |tok| Token {
            tok,
            start,
            end: start + 1,
        };
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'(' => {
                out.push(single(Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push(single(Tok::RParen));
                i += 1;
            }
            b',' => {
                out.push(single(Tok::Comma));
                i += 1;
            }
            b':' => {
                out.push(single(Tok::Colon));
                i += 1;
            }
            b'=' => {
                out.push(single(Tok::Eq));
                i += 1;
            }
            b'.' if bytes.get(i + 1) == Some(&b'.') => {
                out.push(Token {
                    tok: Tok::DotDot,
                    start,
                    end: start + 2,
                });
                i += 2;
            }
            b'-' | b'0'..=b'9' => {
                if c == b'-' {
                    i += 1;
                    if !bytes.get(i).is_some_and(u8::is_ascii_digit) {
                        return Err(err("'-' must be followed by a digit".to_owned(), start));
                    }
                }
                while bytes.get(i).is_some_and(u8::is_ascii_digit) {
                    i += 1;
                }
                let mut is_float = false;
                if bytes.get(i) == Some(&b'.') && bytes.get(i + 1).is_some_and(u8::is_ascii_digit) {
                    is_float = true;
                    i += 1;
                    while bytes.get(i).is_some_and(u8::is_ascii_digit) {
                        i += 1;
                    }
                }
                if matches!(bytes.get(i), Some(b'e' | b'E')) {
                    let mut j = i + 1;
                    if matches!(bytes.get(j), Some(b'+' | b'-')) {
                        j += 1;
                    }
                    if bytes.get(j).is_some_and(u8::is_ascii_digit) {
                        is_float = true;
                        i = j;
                        while bytes.get(i).is_some_and(u8::is_ascii_digit) {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let tok = if is_float {
                    Tok::Float(
                        text.parse()
                            .map_err(|_| err(format!("invalid number {text:?}"), start))?,
                    )
                } else {
                    Tok::Int(
                        text.parse()
                            .map_err(|_| err(format!("invalid number {text:?}"), start))?,
                    )
                };
                out.push(Token { tok, start, end: i });
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                i += 1;
                loop {
                    match bytes.get(i) {
                        Some(b) if b.is_ascii_alphanumeric() || *b == b'_' => i += 1,
                        Some(b'-') if bytes.get(i + 1).is_some_and(u8::is_ascii_alphabetic) => {
                            i += 2
                        }
                        _ => break,
                    }
                }
                out.push(Token {
                    tok: Tok::Ident(src[start..i].to_owned()),
                    start,
                    end: i,
                });
            }
            _ => {
                let ch = src[i..].chars().next().unwrap_or('?');
                return Err(err(format!("unexpected character {ch:?}"), start));
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        start: src.len(),
        end: src.len(),
    });
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Token>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn span(&self, start: usize, end: usize) -> SourceSpan {
        SourceSpan::locate(self.src, start, end)
    }

    fn error(&self, msg: impl Into<String>) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError::new(
            ParseErrorKind::CompactSyntax,
            msg,
            self.span(t.start, t.end),
        )
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token, ParseError> {
        if *self.peek() == tok {
            Ok(self.next())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Token), ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => Ok((name, self.next())),
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<OMNode, ParseError> {
        let first = self.next();
        let start = first.start;
        let mut node = match first.tok.clone() {
            Tok::Int(v) => {
                return Ok(OMNode::new(
                    NodeKind::Integer(v),
                    self.span(start, first.end),
                ))
            }
            Tok::Float(v) => {
                return Ok(OMNode::new(NodeKind::Float(v), self.span(start, first.end)))
            }
            Tok::Ident(name) if name == "sum" && *self.peek() == Tok::LParen => {
                if matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::Eq {
                    return self.sum(start);
                }
                self.resolve_head(&name, &first)?
            }
            Tok::Ident(cd) if *self.peek() == Tok::Colon => {
                self.next();
                let (name, last) = self.ident("symbol name after ':'")?;
                OMNode::new(NodeKind::Symbol { cd, name }, self.span(start, last.end))
            }
            Tok::Ident(name) if *self.peek() == Tok::LParen => self.resolve_head(&name, &first)?,
            Tok::Ident(name) => {
                let span = self.span(start, first.end);
                let kind = if is_tensor1_name(&name) {
                    NodeKind::Symbol {
                        cd: TENSOR1.to_owned(),
                        name,
                    }
                } else {
                    NodeKind::Variable(name)
                };
                return Ok(OMNode::new(kind, span));
            }
            _ => {
                self.pos -= 1;
                return Err(self.error("expected an expression"));
            }
        };
        while *self.peek() == Tok::LParen {
            self.next();
            let mut args = vec![self.expr()?];
            while *self.peek() == Tok::Comma {
                self.next();
                args.push(self.expr()?);
            }
            let close = self.expect(Tok::RParen, "',' or ')'")?;
            node = OMNode::new(
                NodeKind::Application {
                    head: Box::new(node),
                    args,
                },
                self.span(start, close.end),
            );
        }
        Ok(node)
    }

    fn resolve_head(&self, name: &str, tok: &Token) -> Result<OMNode, ParseError> {
        let cd = if is_tensor1_name(name) {
            TENSOR1
        } else if is_arith1_name(name) {
            ARITH1
        } else {
            return Err(ParseError::new(
                ParseErrorKind::AmbiguousName,
                format!("{name:?} is not a tensor1 or arith1 symbol; qualify it as cd:{name}"),
                self.span(tok.start, tok.end),
            ));
        };
        Ok(OMNode::new(
            NodeKind::Symbol {
                cd: cd.to_owned(),
                name: name.to_owned(),
            },
            self.span(tok.start, tok.end),
        ))
    }

    fn sum(&mut self, start: usize) -> Result<OMNode, ParseError> {
        self.expect(Tok::LParen, "'('")?;
        let (var, _) = self.ident("bound variable")?;
        self.expect(Tok::Eq, "'='")?;
        let lower = self.expr()?;
        self.expect(Tok::DotDot, "'..'")?;
        let upper = self.expr()?;
        self.expect(Tok::Comma, "','")?;
        let body = self.expr()?;
        let close = self.expect(Tok::RParen, "')'")?;
        Ok(OMNode::new(
            NodeKind::SumBinder {
                var,
                lower: Box::new(lower),
                upper: Box::new(upper),
                body: Box::new(body),
            },
            self.span(start, close.end),
        ))
    }
}

/// Parses the compact syntax into the same tree [`super::parse_xml`] produces.
pub fn parse_compact(input: &str) -> Result<OMNode, ParseError> {
    let toks = lex(input)?;
    let mut parser = Parser {
        src: input,
        toks,
        pos: 0,
    };
    let node = parser.expr()?;
    if *parser.peek() != Tok::Eof {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(node)
}

/// Renders a node in compact syntax. Non-finite floats have no compact form
/// and are written as `nan`, `inf` or `-inf`, which do not parse back.
pub fn to_compact(node: &OMNode) -> String {
    let mut out = String::new();
    write_compact(&mut out, node);
    out
}

fn write_compact(out: &mut String, node: &OMNode) {
    match &node.kind {
        NodeKind::Integer(v) => {
            let _ = write!(out, "{v}");
        }
        NodeKind::Float(v) if v.is_finite() => {
            let _ = write!(out, "{v:?}");
        }
        NodeKind::Float(v) => {
            let _ = write!(out, "{v}");
        }
        NodeKind::Variable(name) => out.push_str(name),
        NodeKind::Symbol { cd, name } => {
            if cd == TENSOR1 {
                out.push_str(name);
            } else {
                let _ = write!(out, "{cd}:{name}");
            }
        }
        NodeKind::Application { head, args } => {
            match head.as_symbol() {
                Some((cd, name))
                    if (cd == TENSOR1 && is_tensor1_name(name))
                        || (cd == ARITH1 && is_arith1_name(name) && !is_tensor1_name(name)) =>
                {
                    out.push_str(name)
                }
                _ => write_compact(out, head),
            }
            out.push('(');
            for (i, arg) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_compact(out, arg);
            }
            out.push(')');
        }
        NodeKind::SumBinder {
            var,
            lower,
            upper,
            body,
        } => {
            let _ = write!(out, "sum({var}=");
            write_compact(out, lower);
            out.push_str("..");
            write_compact(out, upper);
            out.push_str(", ");
            write_compact(out, body);
            out.push(')');
        }
    }
}
