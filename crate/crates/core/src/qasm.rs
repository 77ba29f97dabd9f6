//! OpenQASM 2.0 subset front end.
//!
//! Accepted: the `OPENQASM 2.0;` header, `include`, `qreg`/`creg`, `barrier`,
//! `//` comments and the gates in [`GateKind`]. Multiple quantum registers are
//! flattened into one index space in declaration order. `measure` and `reset`
//! are rejected: non-unitary behavior belongs in the channel file.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{ReachError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    /// `U3(theta, phi, lambda)` in radians.
    U3(f64, f64, f64),
    Cx,
    Cz,
    Ccx,
    Swap,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz | GateKind::Swap => 2,
            GateKind::Ccx => 3,
            _ => 1,
        }
    }

    /// Lower-case qelib1 name.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::U3(..) => "u3",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Ccx => "ccx",
            GateKind::Swap => "swap",
        }
    }

    fn from_name(name: &str, params: &[f64]) -> Option<std::result::Result<GateKind, String>> {
        let kind = match name {
            "x" => GateKind::X,
            "y" => GateKind::Y,
            "z" => GateKind::Z,
            "h" => GateKind::H,
            "s" => GateKind::S,
            "sdg" => GateKind::Sdg,
            "t" => GateKind::T,
            "tdg" => GateKind::Tdg,
            "cx" | "CX" => GateKind::Cx,
            "cz" => GateKind::Cz,
            "ccx" => GateKind::Ccx,
            "swap" => GateKind::Swap,
            "u3" | "U" => {
                return Some(match params {
                    &[t, p, l] => Ok(GateKind::U3(t, p, l)),
                    _ => Err(format!("{name} takes 3 parameters, got {}", params.len())),
                })
            }
            _ => return None,
        };
        if params.is_empty() {
            Some(Ok(kind))
        } else {
            Some(Err(format!("{name} takes no parameters")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl GateOp {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        GateOp { kind, qubits }
    }

    /// Checks arity, distinctness and range against a register width.
    pub fn validate(&self, num_qubits: usize) -> std::result::Result<(), String> {
        if self.qubits.len() != self.kind.arity() {
            return Err(format!(
                "{} expects {} qubit(s), got {}",
                self.kind.name(),
                self.kind.arity(),
                self.qubits.len()
            ));
        }
        for (i, &q) in self.qubits.iter().enumerate() {
            if q >= num_qubits {
                return Err(format!(
                    "qubit index {q} out of range (register has {num_qubits})"
                ));
            }
            if self.qubits[..i].contains(&q) {
                return Err(format!("{} uses qubit {q} twice", self.kind.name()));
            }
        }
        Ok(())
    }
}

/// Flattened gate sequence over `num_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub num_qubits: usize,
    pub ops: Vec<GateOp>,
}

impl Circuit {
    pub fn new(num_qubits: usize, ops: Vec<GateOp>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(ReachError::usage("circuit needs at least one qubit"));
        }
        for (i, op) in ops.iter().enumerate() {
            op.validate(num_qubits)
                .map_err(|e| ReachError::usage(format!("gate {i}: {e}")))?;
        }
        Ok(Circuit { num_qubits, ops })
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// Prints a canonical program over a single register `q` that re-parses to
/// an equal circuit.
impl fmt::Display for Circuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OPENQASM 2.0;")?;
        writeln!(f, "include \"qelib1.inc\";")?;
        writeln!(f, "qreg q[{}];", self.num_qubits)?;
        for op in &self.ops {
            match op.kind {
                GateKind::U3(t, p, l) => write!(f, "u3({t:?},{p:?},{l:?}) ")?,
                k => write!(f, "{} ", k.name())?,
            }
            let args: Vec<String> = op.qubits.iter().map(|q| format!("q[{q}]")).collect();
            writeln!(f, "{};", args.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
}

fn lex(source: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = source.char_indices().peekable();
    let mut line = 1;
    while let Some(&(start, ch)) = chars.peek() {
        match ch {
            '\n' => {
                line += 1;
                chars.next();
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            '/' if source[start..].starts_with("//") => {
                while let Some(&(_, c)) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '/' if source[start..].starts_with("/*") => {
                chars.next();
                chars.next();
                let mut closed = false;
                while let Some((i, c)) = chars.next() {
                    if c == '\n' {
                        line += 1;
                    }
                    if c == '*' && source[i..].starts_with("*/") {
                        chars.next();
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(ReachError::parse(line, "unterminated block comment"));
                }
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                let mut closed = false;
                for (_, c) in chars.by_ref() {
                    if c == '"' {
                        closed = true;
                        break;
                    }
                    if c == '\n' {
                        break;
                    }
                    s.push(c);
                }
                if !closed {
                    return Err(ReachError::parse(line, "unterminated string literal"));
                }
                out.push(Token {
                    tok: Tok::Str(s),
                    line,
                });
            }
            '-' if source[start..].starts_with("->") => {
                chars.next();
                chars.next();
                out.push(Token {
                    tok: Tok::Arrow,
                    line,
                });
            }
            c if c.is_ascii_digit() || c == '.' => {
                let mut end = start;
                let bytes = source.as_bytes();
                while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                    end += 1;
                }
                if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                    let mut j = end + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        end = j;
                    }
                }
                let text = &source[start..end];
                let value: f64 = text
                    .parse()
                    .map_err(|_| ReachError::parse(line, format!("malformed number {text:?}")))?;
                while chars.peek().is_some_and(|&(i, _)| i < end) {
                    chars.next();
                }
                out.push(Token {
                    tok: Tok::Num(value),
                    line,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Ident(s),
                    line,
                });
            }
            ';' | ',' | '[' | ']' | '(' | ')' | '{' | '}' | '+' | '-' | '*' | '/' | '^' | '=' => {
                chars.next();
                out.push(Token {
                    tok: Tok::Sym(ch),
                    line,
                });
            }
            other => {
                return Err(ReachError::parse(
                    line,
                    format!("unexpected character {other:?}"),
                ));
            }
        }
    }
    Ok(out)
}

struct Register {
    name: String,
    offset: usize,
    size: usize,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).map_or(self.last_line, |t| t.line)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if let Some(t) = &t {
            self.last_line = t.line;
            self.pos += 1;
        }
        t.map(|t| t.tok)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(ReachError::parse(self.line(), msg))
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.next();
                Ok(())
            }
            Some(other) => {
                let msg = format!("expected '{c}', found {}", describe(other));
                self.err(msg)
            }
            None => self.err(format!("expected '{c}', found end of input")),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self) -> Result<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            Some(other) => self.err(format!("expected identifier, found {}", describe(&other))),
            None => self.err("expected identifier, found end of input"),
        }
    }

    fn expect_uint(&mut self) -> Result<usize> {
        match self.next() {
            Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v < 1e9 => Ok(v as usize),
            Some(other) => self.err(format!(
                "expected non-negative integer, found {}",
                describe(&other)
            )),
            None => self.err("expected integer, found end of input"),
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary()?;
            } else if self.eat_sym('/') {
                let d = self.unary()?;
                if d == 0.0 {
                    return self.err("division by zero in parameter expression");
                }
                v /= d;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        match self.next() {
            Some(Tok::Num(v)) => Ok(v),
            Some(Tok::Ident(id)) if id == "pi" => Ok(PI),
            Some(Tok::Sym('(')) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Some(other) => self.err(format!(
                "malformed parameter expression near {}",
                describe(&other)
            )),
            None => self.err("malformed parameter expression: unexpected end of input"),
        }
    }

    fn skip_statement(&mut self) -> Result<()> {
        loop {
            match self.next() {
                Some(Tok::Sym(';')) => return Ok(()),
                Some(_) => {}
                None => return self.err("missing ';'"),
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Num(v) => format!("number {v}"),
        Tok::Str(s) => format!("string \"{s}\""),
        Tok::Sym(c) => format!("'{c}'"),
        Tok::Arrow => "'->'".to_string(),
    }
}

/// Parses OpenQASM 2.0 text into a [`Circuit`].
pub fn parse_qasm(source: &str) -> Result<Circuit> {
    let toks = lex(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        last_line: 1,
    };
    let mut qregs: Vec<Register> = Vec::new();
    let mut cregs: Vec<String> = Vec::new();
    let mut num_qubits = 0usize;
    // Gate applications are resolved once all registers are known.
    let mut pending: Vec<(usize, GateKind, Vec<Vec<usize>>)> = Vec::new();

    if matches!(p.peek(), Some(Tok::Ident(s)) if s == "OPENQASM") {
        p.next();
        match p.next() {
            Some(Tok::Num(v)) if (v - 2.0).abs() < 1e-12 => {}
            _ => return p.err("only OPENQASM 2.0 is supported"),
        }
        p.expect_sym(';')?;
    }

    while let Some(tok) = p.peek().cloned() {
        let line = p.line();
        let Tok::Ident(word) = tok else {
            return p.err(format!("expected a statement, found {}", describe(&tok)));
        };
        p.next();
        match word.as_str() {
            "OPENQASM" => return p.err("OPENQASM header must be the first statement"),
            "include" => {
                match p.next() {
                    Some(Tok::Str(_)) => {}
                    _ => return p.err("include expects a quoted file name"),
                }
                p.expect_sym(';')?;
            }
            "qreg" | "creg" => {
                let name = p.expect_ident()?;
                p.expect_sym('[')?;
                let size = p.expect_uint()?;
                p.expect_sym(']')?;
                p.expect_sym(';')?;
                if size == 0 {
                    return Err(ReachError::parse(line, format!("register {name} has size 0")));
                }
                if qregs.iter().any(|r| r.name == name) || cregs.contains(&name) {
                    return Err(ReachError::parse(line, format!("register {name} declared twice")));
                }
                if word == "qreg" {
                    qregs.push(Register {
                        name,
                        offset: num_qubits,
                        size,
                    });
                    num_qubits += size;
                } else {
                    cregs.push(name);
                }
            }
            "barrier" => p.skip_statement()?,
            "measure" => {
                return Err(ReachError::parse(
                    line,
                    "measure is not allowed in the circuit body; declare a measure_z site in the channel file",
                ))
            }
            "reset" => {
                return Err(ReachError::parse(
                    line,
                    "reset is not allowed in the circuit body; declare a reset site in the channel file",
                ))
            }
            "gate" | "opaque" | "if" => {
                return Err(ReachError::parse(line, format!("'{word}' is not supported")))
            }
            name => {
                let mut params = Vec::new();
                if p.eat_sym('(') && !p.eat_sym(')') {
                    loop {
                        params.push(p.expr()?);
                        if p.eat_sym(')') {
                            break;
                        }
                        p.expect_sym(',')?;
                    }
                }
                let kind = match GateKind::from_name(name, &params) {
                    Some(Ok(k)) => k,
                    Some(Err(msg)) => return Err(ReachError::parse(line, msg)),
                    None => return Err(ReachError::parse(line, format!("unknown gate '{name}'"))),
                };
                let mut args = Vec::new();
                loop {
                    let reg_name = p.expect_ident()?;
                    let Some(reg) = qregs.iter().find(|r| r.name == reg_name) else {
                        return p.err(format!("unknown quantum register '{reg_name}'"));
                    };
                    if p.eat_sym('[') {
                        let idx = p.expect_uint()?;
                        p.expect_sym(']')?;
                        if idx >= reg.size {
                            return Err(ReachError::parse(
                                line,
                                format!("qubit index {reg_name}[{idx}] out of range (size {})", reg.size),
                            ));
                        }
                        args.push(vec![reg.offset + idx]);
                    } else {
                        args.push((reg.offset..reg.offset + reg.size).collect());
                    }
                    if p.eat_sym(';') {
                        break;
                    }
                    p.expect_sym(',')?;
                }
                pending.push((line, kind, args));
            }
        }
    }

    if qregs.is_empty() {
        return Err(ReachError::parse(p.last_line, "no qreg declared"));
    }

    let mut ops = Vec::new();
    for (line, kind, args) in pending {
        if args.len() != kind.arity() {
            return Err(ReachError::parse(
                line,
                format!(
                    "{} expects {} argument(s), got {}",
                    kind.name(),
                    kind.arity(),
                    args.len()
                ),
            ));
        }
        // Whole-register arguments broadcast; all such arguments must agree in size.
        let width = args.iter().map(Vec::len).max().unwrap_or(1);
        if args.iter().any(|a| a.len() != 1 && a.len() != width) {
            return Err(ReachError::parse(line, "register arguments differ in size"));
        }
        for i in 0..width {
            let qubits: Vec<usize> = args
                .iter()
                .map(|a| if a.len() == 1 { a[0] } else { a[i] })
                .collect();
            let op = GateOp::new(kind, qubits);
            op.validate(num_qubits)
                .map_err(|e| ReachError::parse(line, e))?;
            ops.push(op);
        }
    }
    Ok(Circuit { num_qubits, ops })
}
