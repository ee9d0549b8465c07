//! A small OpenQASM 2.0 front end for tests: tokenizer, recursive-descent
//! parser with semantic checks, and an interpreter onto dense matrices.
//!
//! Supported: header, include, qreg/creg, gate definitions, gate
//! applications, barrier and measure. Anything else is a diagnostic.

use std::collections::HashMap;

use super::dense::{self, Mat};
use ansatz_forge::circuit::GateKind;

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Real(f64),
    Int(u64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(String),
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
    Call(String, Box<Expr>),
}

impl Expr {
    fn eval(&self, env: &HashMap<String, f64>) -> Result<f64, String> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(v) => *env.get(v).ok_or_else(|| format!("unknown parameter `{v}`"))?,
            Expr::Neg(e) => -e.eval(env)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(env)?, b.eval(env)?);
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    '^' => a.powf(b),
                    _ => unreachable!(),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(env)?;
                match f.as_str() {
                    "sin" => v.sin(),
                    "cos" => v.cos(),
                    "tan" => v.tan(),
                    "exp" => v.exp(),
                    "ln" => v.ln(),
                    "sqrt" => v.sqrt(),
                    _ => unreachable!(),
                }
            }
        })
    }

    fn vars(&self, out: &mut Vec<String>) {
        match self {
            Expr::Var(v) => out.push(v.clone()),
            Expr::Neg(e) | Expr::Call(_, e) => e.vars(out),
            Expr::Bin(_, a, b) => {
                a.vars(out);
                b.vars(out);
            }
            Expr::Num(_) | Expr::Pi => {}
        }
    }
}

#[derive(Debug, Clone)]
pub struct BodyOp {
    pub name: String,
    pub exprs: Vec<Expr>,
    pub args: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct GateDef {
    pub params: Vec<String>,
    pub args: Vec<String>,
    /// `None` for built-in and library gates, interpreted natively.
    pub body: Option<Vec<BodyOp>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Application {
    pub name: String,
    pub angles: Vec<f64>,
    pub qubits: Vec<usize>,
}

#[derive(Debug, Default)]
pub struct Program {
    pub diagnostics: Vec<Diagnostic>,
    pub gates: HashMap<String, GateDef>,
    pub applications: Vec<Application>,
    pub n_qubits: usize,
}

/// The qelib1.inc gate set (the common superset shipped with Qiskit),
/// as (name, n_params, n_qubits).
const QELIB1: &[(&str, usize, usize)] = &[
    ("u3", 3, 1), ("u2", 2, 1), ("u1", 1, 1), ("cx", 0, 2), ("id", 0, 1), ("u0", 1, 1),
    ("u", 3, 1), ("p", 1, 1), ("x", 0, 1), ("y", 0, 1), ("z", 0, 1), ("h", 0, 1),
    ("s", 0, 1), ("sdg", 0, 1), ("t", 0, 1), ("tdg", 0, 1), ("rx", 1, 1), ("ry", 1, 1),
    ("rz", 1, 1), ("sx", 0, 1), ("sxdg", 0, 1), ("cz", 0, 2), ("cy", 0, 2), ("swap", 0, 2),
    ("ch", 0, 2), ("ccx", 0, 3), ("cswap", 0, 3), ("crx", 1, 2), ("cry", 1, 2),
    ("crz", 1, 2), ("cu1", 1, 2), ("cp", 1, 2), ("cu3", 3, 2), ("csx", 0, 2), ("cu", 4, 2),
    ("rxx", 1, 2), ("rzz", 1, 2),
];

fn tokenize(src: &str) -> (Vec<(Tok, usize)>, Vec<Diagnostic>) {
    let mut toks = Vec::new();
    let mut diags = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let ch = chars[i];
        if ch == '\n' {
            line += 1;
            i += 1;
        } else if ch.is_whitespace() {
            i += 1;
        } else if ch == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            toks.push((Tok::Ident(chars[start..i].iter().collect()), line));
        } else if ch.is_ascii_digit() || (ch == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                real = true;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    if !real {
                        diags.push(Diagnostic {
                            line,
                            message: "exponent on an integer literal".into(),
                        });
                    }
                    real = true;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            if real {
                toks.push((Tok::Real(text.parse().unwrap_or(f64::NAN)), line));
            } else {
                match text.parse() {
                    Ok(v) => toks.push((Tok::Int(v), line)),
                    Err(_) => diags.push(Diagnostic { line, message: format!("bad integer {text}") }),
                }
            }
        } else if ch == '"' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                i += 1;
            }
            if i >= chars.len() || chars[i] != '"' {
                diags.push(Diagnostic { line, message: "unterminated string".into() });
            }
            toks.push((Tok::Str(chars[start..i.min(chars.len())].iter().collect()), line));
            i += 1;
        } else if ch == '-' && chars.get(i + 1) == Some(&'>') {
            toks.push((Tok::Arrow, line));
            i += 2;
        } else if "();,[]{}+-*/^".contains(ch) {
            toks.push((Tok::Sym(ch), line));
            i += 1;
        } else {
            diags.push(Diagnostic { line, message: format!("unexpected character `{ch}`") });
            i += 1;
        }
    }
    (toks, diags)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    program: Program,
    qregs: HashMap<String, usize>,
    cregs: HashMap<String, usize>,
    qreg_offset: HashMap<String, usize>,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn line(&self) -> usize {
        self.toks.get(self.pos).or(self.toks.last()).map_or(0, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        Err(Diagnostic { line: self.line(), message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn expect_sym(&mut self, s: char) -> PResult<()> {
        match self.next() {
            Some(Tok::Sym(c)) if c == s => Ok(()),
            other => {
                self.pos -= 1;
                self.err(format!("expected `{s}`, found {other:?}"))
            }
        }
    }

    fn eat_sym(&mut self, s: char) -> bool {
        if self.peek() == Some(&Tok::Sym(s)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.next() {
            Some(Tok::Ident(s)) => Ok(s),
            other => {
                self.pos -= 1;
                self.err(format!("expected identifier, found {other:?}"))
            }
        }
    }

    fn int(&mut self) -> PResult<u64> {
        match self.next() {
            Some(Tok::Int(v)) => Ok(v),
            other => {
                self.pos -= 1;
                self.err(format!("expected integer, found {other:?}"))
            }
        }
    }

    /// Skips to just past the next `;` or `}` after an error.
    fn recover(&mut self) {
        while let Some(t) = self.next() {
            if t == Tok::Sym(';') || t == Tok::Sym('}') {
                break;
            }
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c)) if *c == '+' || *c == '-' => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Sym(c)) if *c == '*' || *c == '/' => *c,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.power()?));
        }
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.unary()?;
        if self.eat_sym('^') {
            return Ok(Expr::Bin('^', Box::new(base), Box::new(self.power()?)));
        }
        Ok(base)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat_sym('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.next() {
            Some(Tok::Real(v)) => Ok(Expr::Num(v)),
            Some(Tok::Int(v)) => Ok(Expr::Num(v as f64)),
            Some(Tok::Sym('(')) => {
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "pi" => Ok(Expr::Pi),
                "sin" | "cos" | "tan" | "exp" | "ln" | "sqrt" => {
                    self.expect_sym('(')?;
                    let e = self.expr()?;
                    self.expect_sym(')')?;
                    Ok(Expr::Call(name, Box::new(e)))
                }
                _ => Ok(Expr::Var(name)),
            },
            other => {
                self.pos -= 1;
                self.err(format!("expected expression, found {other:?}"))
            }
        }
    }

    fn expr_list(&mut self) -> PResult<Vec<Expr>> {
        let mut out = Vec::new();
        if self.eat_sym('(') {
            if self.eat_sym(')') {
                return Ok(out);
            }
            loop {
                out.push(self.expr()?);
                if self.eat_sym(')') {
                    break;
                }
                self.expect_sym(',')?;
            }
        }
        Ok(out)
    }

    fn id_list(&mut self, terminator: char) -> PResult<Vec<String>> {
        let mut out = vec![self.ident()?];
        while !self.eat_sym(terminator) {
            self.expect_sym(',')?;
            out.push(self.ident()?);
        }
        Ok(out)
    }

    fn check_gate_use(&self, name: &str, n_exprs: usize, n_args: usize) -> PResult<()> {
        let Some(def) = self.program.gates.get(name) else {
            return self.err(format!("undefined gate `{name}`"));
        };
        if def.params.len() != n_exprs {
            return self.err(format!(
                "`{name}` takes {} parameters, got {n_exprs}",
                def.params.len()
            ));
        }
        if def.args.len() != n_args {
            return self.err(format!("`{name}` takes {} qubits, got {n_args}", def.args.len()));
        }
        Ok(())
    }

    fn gate_decl(&mut self) -> PResult<()> {
        let name = self.ident()?;
        if self.program.gates.contains_key(&name) {
            return self.err(format!("gate `{name}` already defined"));
        }
        let params = if self.eat_sym('(') {
            if self.eat_sym(')') {
                Vec::new()
            } else {
                self.id_list(')')?
            }
        } else {
            Vec::new()
        };
        let mut args = vec![self.ident()?];
        while !self.eat_sym('{') {
            self.expect_sym(',')?;
            args.push(self.ident()?);
        }
        let mut body = Vec::new();
        while !self.eat_sym('}') {
            let op = self.ident()?;
            let exprs = self.expr_list()?;
            let mut op_args = vec![self.ident()?];
            while !self.eat_sym(';') {
                self.expect_sym(',')?;
                op_args.push(self.ident()?);
            }
            self.check_gate_use(&op, exprs.len(), op_args.len())?;
            for a in &op_args {
                if !args.contains(a) {
                    return self.err(format!("`{a}` is not an argument of `{name}`"));
                }
            }
            for (i, a) in op_args.iter().enumerate() {
                if op_args[..i].contains(a) {
                    return self.err(format!("`{a}` repeated in `{op}`"));
                }
            }
            let mut used = Vec::new();
            exprs.iter().for_each(|e| e.vars(&mut used));
            if let Some(v) = used.iter().find(|v| !params.contains(v)) {
                return self.err(format!("`{v}` is not a parameter of `{name}`"));
            }
            body.push(BodyOp { name: op, exprs, args: op_args });
        }
        self.program.gates.insert(name, GateDef { params, args, body: Some(body) });
        Ok(())
    }

    fn qubit_operand(&mut self) -> PResult<Vec<usize>> {
        let reg = self.ident()?;
        let Some(&size) = self.qregs.get(&reg) else {
            return self.err(format!("undeclared quantum register `{reg}`"));
        };
        let offset = self.qreg_offset[&reg];
        if self.eat_sym('[') {
            let idx = self.int()? as usize;
            self.expect_sym(']')?;
            if idx >= size {
                return self.err(format!("index {idx} out of range for `{reg}`"));
            }
            Ok(vec![offset + idx])
        } else {
            Ok((offset..offset + size).collect())
        }
    }

    fn application(&mut self, name: String) -> PResult<()> {
        let exprs = self.expr_list()?;
        let mut operands = vec![self.qubit_operand()?];
        while !self.eat_sym(';') {
            self.expect_sym(',')?;
            operands.push(self.qubit_operand()?);
        }
        self.check_gate_use(&name, exprs.len(), operands.len())?;
        let env = HashMap::new();
        let angles = exprs
            .iter()
            .map(|e| e.eval(&env))
            .collect::<Result<Vec<_>, _>>()
            .or_else(|m| self.err(m))?;
        if angles.iter().any(|a| !a.is_finite()) {
            return self.err("non-finite angle");
        }
        // Whole-register operands broadcast; sizes must agree.
        let width = operands.iter().map(Vec::len).max().unwrap_or(1);
        if operands.iter().any(|o| o.len() != 1 && o.len() != width) {
            return self.err("register sizes differ");
        }
        for k in 0..width {
            let qubits: Vec<usize> =
                operands.iter().map(|o| if o.len() == 1 { o[0] } else { o[k] }).collect();
            for (i, q) in qubits.iter().enumerate() {
                if qubits[..i].contains(q) {
                    return self.err(format!("qubit {q} used twice in `{name}`"));
                }
            }
            self.program.applications.push(Application {
                name: name.clone(),
                angles: angles.clone(),
                qubits,
            });
        }
        Ok(())
    }

    fn statement(&mut self) -> PResult<()> {
        let kw = self.ident()?;
        match kw.as_str() {
            "include" => {
                match self.next() {
                    Some(Tok::Str(s)) if s == "qelib1.inc" => {
                        for &(name, np, nq) in QELIB1 {
                            self.program.gates.insert(
                                name.into(),
                                GateDef {
                                    params: (0..np).map(|k| format!("p{k}")).collect(),
                                    args: (0..nq).map(|k| format!("a{k}")).collect(),
                                    body: None,
                                },
                            );
                        }
                    }
                    Some(Tok::Str(s)) => return self.err(format!("unknown include `{s}`")),
                    _ => return self.err("include needs a file name"),
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => {
                let name = self.ident()?;
                self.expect_sym('[')?;
                let size = self.int()? as usize;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                if size == 0 {
                    return self.err("register of size 0");
                }
                if self.qregs.contains_key(&name) || self.cregs.contains_key(&name) {
                    return self.err(format!("register `{name}` redeclared"));
                }
                if kw == "qreg" {
                    self.qreg_offset.insert(name.clone(), self.program.n_qubits);
                    self.program.n_qubits += size;
                    self.qregs.insert(name, size);
                } else {
                    self.cregs.insert(name, size);
                }
                Ok(())
            }
            "gate" => self.gate_decl(),
            "barrier" => {
                self.qubit_operand()?;
                while !self.eat_sym(';') {
                    self.expect_sym(',')?;
                    self.qubit_operand()?;
                }
                Ok(())
            }
            "measure" => {
                self.qubit_operand()?;
                if self.next() != Some(Tok::Arrow) {
                    return self.err("expected `->`");
                }
                let c = self.ident()?;
                if !self.cregs.contains_key(&c) {
                    return self.err(format!("undeclared classical register `{c}`"));
                }
                if self.eat_sym('[') {
                    self.int()?;
                    self.expect_sym(']')?;
                }
                self.expect_sym(';')
            }
            "OPENQASM" => self.err("duplicate header"),
            _ => self.application(kw),
        }
    }
}

pub fn parse(src: &str) -> Program {
    let (toks, mut diagnostics) = tokenize(src);
    let mut p = Parser {
        toks,
        pos: 0,
        program: Program::default(),
        qregs: HashMap::new(),
        cregs: HashMap::new(),
        qreg_offset: HashMap::new(),
    };
    p.program.gates.insert(
        "U".into(),
        GateDef {
            params: vec!["t".into(), "p".into(), "l".into()],
            args: vec!["a".into()],
            body: None,
        },
    );
    p.program.gates.insert(
        "CX".into(),
        GateDef { params: vec![], args: vec!["a".into(), "b".into()], body: None },
    );

    let header_ok = matches!(
        (p.toks.first(), p.toks.get(1), p.toks.get(2)),
        (Some((Tok::Ident(h), _)), Some((Tok::Real(v), _)), Some((Tok::Sym(';'), _)))
            if h == "OPENQASM" && *v == 2.0
    );
    if header_ok {
        p.pos = 3;
    } else {
        diagnostics.push(Diagnostic { line: 1, message: "missing `OPENQASM 2.0;` header".into() });
    }
    while p.pos < p.toks.len() {
        if let Err(d) = p.statement() {
            diagnostics.push(d);
            p.recover();
        }
    }
    let mut program = p.program;
    program.diagnostics = diagnostics;
    program
}

fn library_matrix(name: &str, a: &[f64]) -> Option<Mat> {
    let m = match name {
        "U" | "u3" | "u" => dense::u3(a[0], a[1], a[2]),
        "u2" => dense::u3(std::f64::consts::FRAC_PI_2, a[0], a[1]),
        "u1" | "p" => dense::gate(GateKind::U1, a),
        "rx" => dense::gate(GateKind::Rx, a),
        "ry" => dense::gate(GateKind::Ry, a),
        "rz" => dense::gate(GateKind::Rz, a),
        "sx" => dense::gate(GateKind::Sx, a),
        "x" => dense::gate(GateKind::X, a),
        "h" => dense::gate(GateKind::H, a),
        "id" => dense::identity(2),
        "CX" | "cx" => dense::gate(GateKind::Cnot, a),
        "cz" => dense::gate(GateKind::Cz, a),
        "cu3" => dense::gate(GateKind::Cu3, a),
        "rzz" => dense::gate(GateKind::Rzz, a),
        "rxx" => dense::gate(GateKind::Rxx, a),
        _ => return None,
    };
    Some(m)
}

fn apply_gate(
    program: &Program,
    name: &str,
    angles: &[f64],
    qubits: &[usize],
    total: &mut Mat,
) -> Result<(), String> {
    let def = program.gates.get(name).ok_or_else(|| format!("undefined `{name}`"))?;
    let n = program.n_qubits;
    match &def.body {
        None => {
            let local = library_matrix(name, angles)
                .ok_or_else(|| format!("no reference matrix for `{name}`"))?;
            let full = match qubits {
                [q] => dense::embed_one(n, *q, &local),
                [a, b] => dense::embed_two(n, *a, *b, &local),
                _ => return Err(format!("`{name}` arity not interpretable")),
            };
            *total = full * &*total;
        }
        Some(body) => {
            let env: HashMap<String, f64> =
                def.params.iter().cloned().zip(angles.iter().copied()).collect();
            let map: HashMap<&str, usize> =
                def.args.iter().map(String::as_str).zip(qubits.iter().copied()).collect();
            for op in body {
                let a = op.exprs.iter().map(|e| e.eval(&env)).collect::<Result<Vec<_>, _>>()?;
                let q: Vec<usize> = op.args.iter().map(|x| map[x.as_str()]).collect();
                apply_gate(program, &op.name, &a, &q, total)?;
            }
        }
    }
    Ok(())
}

/// Unitary of the whole program, qubit 0 least significant.
pub fn unitary(program: &Program) -> Result<Mat, String> {
    let mut total = dense::identity(1 << program.n_qubits);
    for app in &program.applications {
        apply_gate(program, &app.name, &app.angles, &app.qubits, &mut total)?;
    }
    Ok(total)
}
