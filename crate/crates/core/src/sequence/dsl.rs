//! Line-oriented pulse DSL.
//!
//! ```text
//! # comment
//! repeat 3 { wait t0; pulse axis=(-1,1,1)/sqrt3 angle=2pi/3 }
//! pulse axis=(1,0,0) angle=pi duration=0.1 profile=sin2
//! reverse { wait 1; pulse axis=(0,1,0) angle=pi/2 }
//! ```
//!
//! Expressions support `+ - * /`, parentheses, juxtaposition (`2pi`), `pi`,
//! `sqrtN`, `sqrt(expr)` and the wait placeholder `t0` (alias `tau0`).

use thiserror::Error;

use super::{Item, Profile, Pulse, PulseSequence, SequenceMeta};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
pub struct ParseOptions {
    /// Value of `t0` in expressions.
    pub tau0: f64,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { tau0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(char),
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line: start.0, col: start.1 });
        if c == '\n' {
            push(&mut out, Tok::Newline);
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let sign = usize::from(matches!(chars.get(i + 1), Some('+') | Some('-')));
                if chars.get(i + 1 + sign).is_some_and(|d| d.is_ascii_digit()) {
                    i += 1 + sign;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[begin..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| ParseError {
                line: start.0,
                col: start.1,
                message: format!("bad number '{text}'"),
            })?;
            col += i - begin;
            push(&mut out, Tok::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let begin = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - begin;
            push(&mut out, Tok::Ident(chars[begin..i].iter().collect()));
        } else if "(){},;=+-*/".contains(c) {
            push(&mut out, Tok::Sym(c));
            i += 1;
            col += 1;
        } else {
            return Err(ParseError { line, col, message: format!("unexpected character '{c}'") });
        }
    }
    out.push(Token { tok: Tok::Eof, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    tau0: f64,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err_at<T>(&self, t: &Token, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { line: t.line, col: t.col, message: message.into() })
    }

    fn expect_sym(&mut self, c: char) -> Result<Token, ParseError> {
        let t = self.next();
        if t.tok == Tok::Sym(c) {
            Ok(t)
        } else {
            self.err_at(&t, format!("expected '{c}', found {}", describe(&t.tok)))
        }
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn block(&mut self, nested: bool) -> Result<Vec<Item>, ParseError> {
        let mut items = Vec::new();
        loop {
            let t = self.peek().clone();
            match &t.tok {
                Tok::Newline | Tok::Sym(';') => {
                    self.next();
                }
                Tok::Eof if !nested => return Ok(items),
                Tok::Eof => return self.err_at(&t, "unclosed block, expected '}'"),
                Tok::Sym('}') if nested => {
                    self.next();
                    return Ok(items);
                }
                Tok::Ident(word) => {
                    self.next();
                    match word.as_str() {
                        "wait" => {
                            let d = self.expr()?;
                            if d < 0.0 || !d.is_finite() {
                                return self.err_at(&t, format!("negative duration {d}"));
                            }
                            items.push(Item::Wait { duration: d });
                        }
                        "pulse" => items.push(Item::Pulse(self.pulse(&t)?)),
                        "repeat" => {
                            let n = self.next();
                            let count = match n.tok {
                                Tok::Num(v) if v >= 0.0 && v.fract() == 0.0 => v as usize,
                                _ => return self.err_at(&n, "repeat needs a non-negative integer count"),
                            };
                            self.expect_sym('{')?;
                            let body = self.block(true)?;
                            for _ in 0..count {
                                items.extend_from_slice(&body);
                            }
                        }
                        "reverse" => {
                            self.expect_sym('{')?;
                            let body = self.block(true)?;
                            items.extend(body.into_iter().rev().map(|i| match i {
                                Item::Pulse(p) => Item::Pulse(p.inverse()),
                                w => w,
                            }));
                        }
                        other => return self.err_at(&t, format!("unknown statement '{other}'")),
                    }
                    let end = self.peek().clone();
                    if !matches!(end.tok, Tok::Newline | Tok::Sym(';') | Tok::Eof | Tok::Sym('}')) {
                        return self.err_at(&end, format!("expected end of statement, found {}", describe(&end.tok)));
                    }
                }
                other => return self.err_at(&t, format!("expected a statement, found {}", describe(other))),
            }
        }
    }

    fn pulse(&mut self, head: &Token) -> Result<Pulse, ParseError> {
        let (mut axis, mut angle, mut duration, mut profile) = (None, None, None, None);
        while let Tok::Ident(key) = self.peek().tok.clone() {
            let kt = self.next();
            self.expect_sym('=')?;
            match key.as_str() {
                "axis" => axis = Some((self.axis()?, kt)),
                "angle" => angle = Some(self.expr()?),
                "duration" => {
                    let d = self.expr()?;
                    if d < 0.0 || !d.is_finite() {
                        return self.err_at(&kt, format!("negative duration {d}"));
                    }
                    duration = Some(d);
                }
                "profile" => {
                    let t = self.next();
                    profile = match &t.tok {
                        Tok::Ident(p) => match p.parse::<Profile>() {
                            Ok(p) => Some(p),
                            Err(e) => return self.err_at(&t, e),
                        },
                        other => return self.err_at(&t, format!("expected a profile name, found {}", describe(other))),
                    };
                }
                other => return self.err_at(&kt, format!("unknown pulse attribute '{other}'")),
            }
        }
        let (axis, at) = match axis {
            Some(a) => a,
            None => return self.err_at(head, "pulse needs axis=(x,y,z)"),
        };
        let angle = match angle {
            Some(a) => a,
            None => return self.err_at(head, "pulse needs angle=<expr>"),
        };
        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return self.err_at(&at, format!("axis is not a unit vector (norm {norm})"));
        }
        let duration = duration.unwrap_or(0.0);
        let profile = match (profile, duration > 0.0) {
            (Some(Profile::Ideal), true) => return self.err_at(head, "ideal pulses take no duration"),
            (Some(p), true) => p,
            (None, true) => Profile::Rect,
            (Some(Profile::Ideal) | None, false) => Profile::Ideal,
            (Some(p), false) => return self.err_at(head, format!("{p} pulse needs a positive duration")),
        };
        Ok(Pulse { axis: axis.map(|v| v / norm), angle, profile, duration })
    }

    fn axis(&mut self) -> Result<[f64; 3], ParseError> {
        let open = self.expect_sym('(')?;
        let mut v = [0.0; 3];
        for (k, slot) in v.iter_mut().enumerate() {
            if k > 0 {
                let t = self.next();
                if t.tok != Tok::Sym(',') {
                    return self.err_at(&t, format!("axis needs three components, found {}", describe(&t.tok)));
                }
            }
            *slot = self.expr()?;
        }
        if !self.is_sym(')') {
            let t = self.peek().clone();
            return self.err_at(&t, "axis needs exactly three components");
        }
        self.next();
        while self.is_sym('/') || self.is_sym('*') {
            let op = self.next();
            let f = self.factor()?;
            if op.tok == Tok::Sym('/') {
                if f == 0.0 {
                    return self.err_at(&open, "axis divided by zero");
                }
                v = v.map(|x| x / f);
            } else {
                v = v.map(|x| x * f);
            }
        }
        Ok(v)
    }

    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.term()?;
        while self.is_sym('+') || self.is_sym('-') {
            let op = self.next();
            let rhs = self.term()?;
            acc = if op.tok == Tok::Sym('+') { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut acc = self.factor()?;
        loop {
            if self.is_sym('*') || self.is_sym('/') {
                let op = self.next();
                let rhs = self.factor()?;
                acc = if op.tok == Tok::Sym('*') { acc * rhs } else { acc / rhs };
            } else if matches!(self.peek().tok, Tok::Ident(ref s) if is_constant(s)) || self.is_sym('(') {
                acc *= self.factor()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        let t = self.next();
        match &t.tok {
            Tok::Sym('-') => Ok(-self.factor()?),
            Tok::Sym('+') => self.factor(),
            Tok::Num(v) => Ok(*v),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(std::f64::consts::PI),
                "t0" | "tau0" => Ok(self.tau0),
                "sqrt" => {
                    self.expect_sym('(')?;
                    let v = self.expr()?;
                    self.expect_sym(')')?;
                    if v < 0.0 {
                        return self.err_at(&t, "square root of a negative number");
                    }
                    Ok(v.sqrt())
                }
                s if s.starts_with("sqrt") && s[4..].chars().all(|c| c.is_ascii_digit()) && s.len() > 4 => {
                    Ok(s[4..].parse::<f64>().expect("digits").sqrt())
                }
                other => self.err_at(&t, format!("unknown name '{other}'")),
            },
            other => self.err_at(&t, format!("expected a number, found {}", describe(other))),
        }
    }
}

fn is_constant(s: &str) -> bool {
    s == "pi" || s == "t0" || s == "tau0" || s.starts_with("sqrt")
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Num(v) => format!("number {v}"),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::Newline => "end of line".into(),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse(src: &str) -> Result<PulseSequence, ParseError> {
    parse_with(src, ParseOptions::default())
}

pub fn parse_with(src: &str, opts: ParseOptions) -> Result<PulseSequence, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, tau0: opts.tau0 };
    let items = p.block(false)?;
    if items.is_empty() {
        return Err(ParseError { line: 1, col: 1, message: "empty sequence".into() });
    }
    Ok(PulseSequence { items, meta: SequenceMeta { name: "parsed".into(), ..Default::default() } })
}

/// Flat listing, one item per line; `parse(print(s))` restores `s` exactly.
pub fn print(seq: &PulseSequence) -> String {
    let mut out = format!("# {}\n", seq.meta.name);
    for item in &seq.items {
        match item {
            Item::Wait { duration } => out.push_str(&format!("wait {duration}\n")),
            Item::Pulse(p) => {
                let [x, y, z] = p.axis;
                out.push_str(&format!("pulse axis=({x},{y},{z}) angle={}", p.angle));
                if p.profile != Profile::Ideal {
                    out.push_str(&format!(" duration={} profile={}", p.duration, p.profile));
                }
                out.push('\n');
            }
        }
    }
    out
}
