//! Infix syntax for scalar expressions, used by chart definition files.
//!
//! ```text
//! expr  = term { ("+" | "-") term } ;
//! term  = unary { ("*" | "/") unary } ;
//! unary = "-" unary | power ;
//! power = atom [ "^" [ "-" ] integer ] ;
//! atom  = number | name | "$" integer | func "(" expr [ "," expr ] ")" | "(" expr ")" ;
//! func  = "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt" | "atan2" ;
//! ```
//!
//! `name` must be one of the declared input names, or `pi`. `$k` refers to
//! input slot `k` directly. Exponents are integers.

use std::fmt;

use thiserror::Error;

use super::ScalarExpr;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at offset {offset}")]
pub struct ScalarParseError {
    pub message: String,
    pub offset: usize,
}

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
    names: &'a [String],
}

impl Cursor<'_> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += self.src[self.pos..]
                .chars()
                .next()
                .map_or(1, char::len_utf8);
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ScalarParseError> {
        Err(ScalarParseError {
            message: message.into(),
            offset: self.pos,
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ScalarParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<ScalarExpr, ScalarParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = lhs + self.term()?;
            } else if self.eat('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ScalarExpr, ScalarParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat('/') {
                lhs = lhs / self.unary()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<ScalarExpr, ScalarParseError> {
        if self.eat('-') {
            return Ok(-self.unary()?);
        }
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            self.skip_ws();
            let digits = self.take_while(|c| c.is_ascii_digit());
            let Ok(n) = digits.parse::<i32>() else {
                return self.fail("exponent must be an integer literal");
            };
            return Ok(base.powi(if neg { -n } else { n }));
        }
        Ok(base)
    }

    fn take_while(&mut self, f: impl Fn(char) -> bool) -> &str {
        let start = self.pos;
        while self.src[self.pos..].starts_with(&f) {
            self.pos += self.src[self.pos..]
                .chars()
                .next()
                .map_or(1, char::len_utf8);
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<ScalarExpr, ScalarParseError> {
        let start = self.pos;
        self.take_while(|c| c.is_ascii_digit());
        if self.src[self.pos..].starts_with('.') {
            self.pos += 1;
            self.take_while(|c| c.is_ascii_digit());
        }
        let rest = &self.src[self.pos..];
        if rest.starts_with(['e', 'E']) {
            let mut k = 1;
            if rest[1..].starts_with(['+', '-']) {
                k += 1;
            }
            if rest[k..].starts_with(|c: char| c.is_ascii_digit()) {
                self.pos += k;
                self.take_while(|c| c.is_ascii_digit());
            }
        }
        match self.src[start..self.pos].parse() {
            Ok(v) => Ok(ScalarExpr::Const(v)),
            Err(_) => {
                self.pos = start;
                self.fail("invalid number")
            }
        }
    }

    fn atom(&mut self) -> Result<ScalarExpr, ScalarParseError> {
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some('$') => {
                self.pos += 1;
                let digits = self.take_while(|c| c.is_ascii_digit());
                match digits.parse() {
                    Ok(slot) => Ok(ScalarExpr::Var(slot)),
                    Err(_) => self.fail("expected a slot number after '$'"),
                }
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_alphabetic() || c == '_' => {
                let start = self.pos;
                let name = self
                    .take_while(|c| c.is_alphanumeric() || c == '_')
                    .to_owned();
                if let Some(slot) = self.names.iter().position(|n| *n == name) {
                    return Ok(ScalarExpr::Var(slot));
                }
                if self.peek() == Some('(') {
                    self.pos += 1;
                    let arg = self.expr()?;
                    let out = match name.as_str() {
                        "sin" => arg.sin(),
                        "cos" => arg.cos(),
                        "tan" => arg.tan(),
                        "exp" => arg.exp(),
                        "ln" => arg.ln(),
                        "sqrt" => arg.sqrt(),
                        "atan2" => {
                            self.expect(',')?;
                            let x = self.expr()?;
                            ScalarExpr::atan2(arg, x)
                        }
                        _ => {
                            self.pos = start;
                            return self.fail(format!("unknown function {name:?}"));
                        }
                    };
                    self.expect(')')?;
                    return Ok(out);
                }
                if name == "pi" {
                    return Ok(ScalarExpr::Const(std::f64::consts::PI));
                }
                self.pos = start;
                self.fail(format!("unknown name {name:?}"))
            }
            Some(c) => self.fail(format!("unexpected character {c:?}")),
            None => self.fail("unexpected end of expression"),
        }
    }
}

/// Parses `text`, mapping each name in `inputs` to its slot.
pub fn parse_scalar(text: &str, inputs: &[String]) -> Result<ScalarExpr, ScalarParseError> {
    let mut cur = Cursor {
        src: text,
        pos: 0,
        names: inputs,
    };
    let expr = cur.expr()?;
    if cur.peek().is_some() {
        return cur.fail("unexpected trailing input");
    }
    Ok(expr)
}

impl ScalarExpr {
    fn precedence(&self) -> u8 {
        match self {
            ScalarExpr::Add(..) | ScalarExpr::Sub(..) => 1,
            ScalarExpr::Mul(..) | ScalarExpr::Div(..) => 2,
            ScalarExpr::Neg(_) => 3,
            ScalarExpr::Const(c) if c.is_sign_negative() => 3,
            ScalarExpr::Pow(..) => 4,
            _ => 5,
        }
    }

    /// Infix rendering using `names` for input slots (falls back to `$k`).
    pub fn to_infix(&self, names: &[String]) -> String {
        let mut out = String::new();
        self.write_infix(&mut out, names);
        out
    }

    fn write_child(&self, out: &mut String, names: &[String], min_prec: u8) {
        if self.precedence() < min_prec {
            out.push('(');
            self.write_infix(out, names);
            out.push(')');
        } else {
            self.write_infix(out, names);
        }
    }

    fn write_infix(&self, out: &mut String, names: &[String]) {
        use ScalarExpr as E;
        let mut bin = |a: &E, op: &str, b: &E, lp: u8, rp: u8| {
            a.write_child(out, names, lp);
            out.push_str(op);
            b.write_child(out, names, rp);
        };
        match self {
            E::Const(c) if *c == std::f64::consts::PI => out.push_str("pi"),
            E::Const(c) => out.push_str(&format!("{c:?}")),
            E::Var(slot) => match names.get(*slot) {
                Some(n) => out.push_str(n),
                None => out.push_str(&format!("${slot}")),
            },
            E::Add(a, b) => bin(a, " + ", b, 1, 2),
            E::Sub(a, b) => bin(a, " - ", b, 1, 2),
            E::Mul(a, b) => bin(a, "*", b, 2, 3),
            E::Div(a, b) => bin(a, "/", b, 2, 3),
            E::Neg(a) => {
                out.push('-');
                a.write_child(out, names, 3);
            }
            E::Pow(a, n) => {
                a.write_child(out, names, 5);
                out.push_str(&format!("^{n}"));
            }
            E::Atan2(y, x) => {
                out.push_str("atan2(");
                y.write_infix(out, names);
                out.push_str(", ");
                x.write_infix(out, names);
                out.push(')');
            }
            E::Sin(a) | E::Cos(a) | E::Tan(a) | E::Exp(a) | E::Ln(a) | E::Sqrt(a) => {
                let f = match self {
                    E::Sin(_) => "sin",
                    E::Cos(_) => "cos",
                    E::Tan(_) => "tan",
                    E::Exp(_) => "exp",
                    E::Ln(_) => "ln",
                    _ => "sqrt",
                };
                out.push_str(f);
                out.push('(');
                a.write_infix(out, names);
                out.push(')');
            }
        }
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_infix(&[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::eval_scalar;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn polar_components() {
        let n = names(&["r", "theta"]);
        let x = parse_scalar("r*cos(theta)", &n).unwrap();
        assert_eq!(x, ScalarExpr::var(0) * ScalarExpr::var(1).cos());
        let r = parse_scalar("sqrt(x1^2 + x2^2)", &names(&["x1", "x2"])).unwrap();
        assert_eq!(eval_scalar(&r, &[3.0, 4.0]).unwrap(), 5.0);
    }

    #[test]
    fn precedence_and_unary_minus() {
        let n = names(&["a", "b"]);
        let e = parse_scalar("-a^2 + b/2*3", &n).unwrap();
        assert_eq!(eval_scalar(&e, &[3.0, 4.0]).unwrap(), -9.0 + 6.0);
        let e = parse_scalar("a - b - 1", &n).unwrap();
        assert_eq!(eval_scalar(&e, &[5.0, 1.0]).unwrap(), 3.0);
        let e = parse_scalar("$1^-2", &[]).unwrap();
        assert_eq!(eval_scalar(&e, &[0.0, 2.0]).unwrap(), 0.25);
    }

    #[test]
    fn errors() {
        let n = names(&["r"]);
        assert!(parse_scalar("r^1.5", &n).is_err());
        assert!(parse_scalar("q + 1", &n).is_err());
        assert!(parse_scalar("foo(r)", &n).is_err());
        assert!(parse_scalar("(r", &n).is_err());
        assert!(parse_scalar("r r", &n).is_err());
    }

    #[test]
    fn infix_round_trip() {
        let n = names(&["r", "t", "p"]);
        for src in [
            "r*sin(t)*cos(p)",
            "-(r - t)^3/(t*p)",
            "atan2(t, r) - pi",
            "exp(-r)*ln(t + 2.5)",
            "r - (t - p)",
            "(-r)^2",
        ] {
            let e = parse_scalar(src, &n).unwrap();
            let printed = e.to_infix(&n);
            assert_eq!(parse_scalar(&printed, &n).unwrap(), e, "{src} -> {printed}");
        }
    }
}
