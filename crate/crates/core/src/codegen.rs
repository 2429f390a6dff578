//! Curve literals: the human-readable text form of curves and models.
//!
//! ```text
//! score = sum([
//!   PWLCurve("age", [(18, 3.13), (21, 0.5914), (46, -0.7206)], fx="log"),
//!   EnumCurve("c_charge_degree", {1: 0.0198, 2: -0.0384}),
//! ])
//! ```
//!
//! The `fx` clause is omitted for the identity transform, and an enum's
//! `default=` clause is omitted when the default is zero. A model's bias,
//! when non-zero, is written as a bare number item.

use std::fmt::Write as _;

use crate::curve::{EnumCurve, PWLCurve};
use crate::error::{Error, Result};
use crate::model::{Component, CurveModel};
use crate::transform::Transform;

pub const DEFAULT_SIG_DIGITS: usize = 4;

/// Rounds to `sig_digits` significant digits (ties to even on the exact
/// decimal expansion) and renders without a trailing `.0`.
pub fn format_number(v: f64, sig_digits: usize) -> String {
    let sig = sig_digits.clamp(1, 17);
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".into() } else { v.to_string() };
    }
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    let sign = if negative { "-" } else { "" };

    if !(-7..=15).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    let point = exp + 1; // digits before the decimal point
    let body = if point <= 0 {
        format!("0.{}{digits}", "0".repeat((-point) as usize))
    } else if point as usize >= digits.len() {
        format!("{digits}{}", "0".repeat(point as usize - digits.len()))
    } else {
        let (int, frac) = digits.split_at(point as usize);
        format!("{int}.{frac}")
    };
    format!("{sign}{body}")
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

pub fn emit_pwl_literal(curve: &PWLCurve, sig_digits: usize) -> String {
    let pts: Vec<String> = curve
        .points()
        .iter()
        .map(|p| format!("({}, {})", format_number(p.x, sig_digits), format_number(p.y, sig_digits)))
        .collect();
    let mut out = format!("PWLCurve({}, [{}]", quote(curve.name()), pts.join(", "));
    if curve.fx() != Transform::Identity {
        let _ = write!(out, ", fx=\"{}\"", curve.fx());
    }
    out.push(')');
    out
}

pub fn emit_enum_literal(curve: &EnumCurve, sig_digits: usize) -> String {
    let entries: Vec<String> = curve
        .mapping()
        .iter()
        .map(|(k, v)| format!("{}: {}", format_number(k.value(), 17), format_number(*v, sig_digits)))
        .collect();
    let mut out = format!("EnumCurve({}, {{{}}}", quote(curve.name()), entries.join(", "));
    if curve.default_value() != 0.0 {
        let _ = write!(out, ", default={}", format_number(curve.default_value(), sig_digits));
    }
    out.push(')');
    out
}

/// Renders one curve. Category keys are always written exactly.
pub fn emit_curve_literal(component: &Component, sig_digits: usize) -> String {
    match component {
        Component::Pwl(c) => emit_pwl_literal(c, sig_digits),
        Component::Enum(c) => emit_enum_literal(c, sig_digits),
    }
}

/// Renders a whole model in component order.
pub fn emit_model_literal(model: &CurveModel, sig_digits: usize) -> String {
    let mut out = String::from("score = sum([\n");
    for c in model.components() {
        let _ = writeln!(out, "  {},", emit_curve_literal(c, sig_digits));
    }
    if model.bias() != 0.0 {
        let _ = writeln!(out, "  {},", format_number(model.bias(), sig_digits));
    }
    out.push_str("])\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Str(String),
    Num(f64),
    Punct(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let err = |line, column, message: String| Error::Syntax { line, column, message };
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
        } else if "()[]{},:=".contains(c) {
            out.push(Token { tok: Tok::Punct(c), line: tl, column: tc });
            advance(&mut i, &mut line, &mut col);
        } else if c == '"' {
            advance(&mut i, &mut line, &mut col);
            let mut s = String::new();
            loop {
                match chars.get(i) {
                    None | Some('\n') => return Err(err(tl, tc, "unterminated string".into())),
                    Some('"') => {
                        advance(&mut i, &mut line, &mut col);
                        break;
                    }
                    Some('\\') => {
                        advance(&mut i, &mut line, &mut col);
                        match chars.get(i) {
                            Some('n') => s.push('\n'),
                            Some(&e @ ('"' | '\\')) => s.push(e),
                            _ => return Err(err(line, col, "invalid escape".into())),
                        }
                        advance(&mut i, &mut line, &mut col);
                    }
                    Some(&ch) => {
                        s.push(ch);
                        advance(&mut i, &mut line, &mut col);
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: tl, column: tc });
        } else if c.is_ascii_digit() || c == '-' || c == '+' || c == '.' {
            let start = i;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '-' || d == '+') && i > start && matches!(chars[i - 1], 'e' | 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign || i == start {
                    advance(&mut i, &mut line, &mut col);
                } else {
                    break;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| err(tl, tc, format!("invalid number `{s}`")))?;
            if !v.is_finite() {
                return Err(err(tl, tc, format!("number `{s}` is not finite")));
            }
            out.push(Token { tok: Tok::Num(v), line: tl, column: tc });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col);
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), line: tl, column: tc });
        } else {
            return Err(err(tl, tc, format!("unexpected character `{c}`")));
        }
    }
    out.push(Token { tok: Tok::Eof, line, column: col });
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Self { tokens: tokenize(text)?, pos: 0 })
    }

    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(&self, t: &Token, message: impl Into<String>) -> Error {
        Error::Syntax { line: t.line, column: t.column, message: message.into() }
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Str(s) => format!("string {s:?}"),
            Tok::Num(v) => format!("number {v}"),
            Tok::Punct(c) => format!("`{c}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Punct(c) {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("expected `{c}`, found {}", Self::describe(&t.tok))))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Punct(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<f64> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(v),
            ref other => Err(self.error_at(&t, format!("expected a number, found {}", Self::describe(other)))),
        }
    }

    fn string(&mut self) -> Result<String> {
        let t = self.next();
        match t.tok {
            Tok::Str(s) => Ok(s),
            ref other => Err(self.error_at(&t, format!("expected a string, found {}", Self::describe(other)))),
        }
    }

    fn keyword(&mut self, name: &str) -> Result<()> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == name => Ok(()),
            other => Err(self.error_at(&t, format!("expected `{name}`, found {}", Self::describe(other)))),
        }
    }

    /// Parses `name=`; returns the keyword token for error reporting.
    fn named_arg(&mut self) -> Result<(String, Token)> {
        let t = self.next();
        let Tok::Ident(name) = t.tok.clone() else {
            return Err(self.error_at(&t, format!("expected an argument name, found {}", Self::describe(&t.tok))));
        };
        self.expect('=')?;
        Ok((name, t))
    }

    fn component(&mut self) -> Result<Component> {
        let t = self.next();
        match &t.tok {
            Tok::Ident(s) if s == "PWLCurve" => self.pwl().map(Component::Pwl),
            Tok::Ident(s) if s == "EnumCurve" => self.enumeration().map(Component::Enum),
            other => Err(self.error_at(&t, format!("expected `PWLCurve` or `EnumCurve`, found {}", Self::describe(other)))),
        }
    }

    fn pwl(&mut self) -> Result<PWLCurve> {
        self.expect('(')?;
        let name = self.string()?;
        self.expect(',')?;
        self.expect('[')?;
        let mut pts: Vec<(f64, f64)> = Vec::new();
        while !self.eat(']') {
            let start = self.peek().clone();
            self.expect('(')?;
            let x = self.number()?;
            self.expect(',')?;
            let y = self.number()?;
            self.expect(')')?;
            if pts.iter().any(|p| p.0 == x) {
                return Err(Error::InvalidCurve(format!(
                    "`{name}` has duplicate x-knot {x} (line {}, column {})",
                    start.line, start.column
                )));
            }
            pts.push((x, y));
            if !self.eat(',') {
                self.expect(']')?;
                break;
            }
        }
        let mut fx = Transform::Identity;
        while self.eat(',') {
            if self.peek().tok == Tok::Punct(')') {
                break;
            }
            let (arg, at) = self.named_arg()?;
            match arg.as_str() {
                "fx" => fx = self.string()?.parse()?,
                _ => return Err(self.error_at(&at, format!("unknown argument `{arg}`"))),
            }
        }
        self.expect(')')?;
        PWLCurve::new(name, pts, fx)
    }

    fn enumeration(&mut self) -> Result<EnumCurve> {
        self.expect('(')?;
        let name = self.string()?;
        self.expect(',')?;
        self.expect('{')?;
        let mut entries = Vec::new();
        while !self.eat('}') {
            let k = self.number()?;
            self.expect(':')?;
            let v = self.number()?;
            entries.push((k, v));
            if !self.eat(',') {
                self.expect('}')?;
                break;
            }
        }
        let mut default = 0.0;
        while self.eat(',') {
            if self.peek().tok == Tok::Punct(')') {
                break;
            }
            let (arg, at) = self.named_arg()?;
            match arg.as_str() {
                "default" => default = self.number()?,
                _ => return Err(self.error_at(&at, format!("unknown argument `{arg}`"))),
            }
        }
        self.expect(')')?;
        EnumCurve::new(name, entries, default)
    }

    fn end(&mut self) -> Result<()> {
        let t = self.next();
        if t.tok == Tok::Eof {
            Ok(())
        } else {
            Err(self.error_at(&t, format!("unexpected {} after end", Self::describe(&t.tok))))
        }
    }
}

/// Parses a single `PWLCurve(...)` or `EnumCurve(...)` literal.
pub fn parse_curve_literal(text: &str) -> Result<Component> {
    let mut p = Parser::new(text)?;
    let c = p.component()?;
    p.end()?;
    Ok(c)
}

/// Parses a `score = sum([...])` model. Items are curve literals or bare
/// numbers (summed into the bias); `#` starts a comment.
pub fn parse_model_literal(text: &str) -> Result<CurveModel> {
    let mut p = Parser::new(text)?;
    p.keyword("score")?;
    p.expect('=')?;
    p.keyword("sum")?;
    p.expect('(')?;
    p.expect('[')?;
    let mut components = Vec::new();
    let mut bias = 0.0;
    while !p.eat(']') {
        if let Tok::Num(v) = p.peek().tok {
            p.next();
            bias += v;
        } else {
            components.push(p.component()?);
        }
        if !p.eat(',') {
            p.expect(']')?;
            break;
        }
    }
    p.expect(')')?;
    p.end()?;
    CurveModel::new(components, bias)
}
