//! Closed-form scalar expressions.
//!
//! The grammar covers what the configuration files need for coefficient
//! fields, kernels, grid functions and custom integrands:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Identifiers: `z` (the integrand argument), `x0..`, `y0..` (the two
//! points), `z0..` (kernel offset components), `r` (offset length), `pi`.
//! Functions: `sin cos exp ln abs sqrt step min max`, where `step(t)` is
//! the Heaviside function with `step(0) = 1`.
//!
//! Expressions can be differentiated symbolically in `z`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    Z,
    X(usize),
    Y(usize),
    Offset(usize),
    Radius,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Sqrt,
    Step,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
            Func::Sqrt => "sqrt",
            Func::Step => "step",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
            Func::Ln => v.ln(),
            Func::Abs => v.abs(),
            Func::Sqrt => v.sqrt(),
            Func::Step => {
                if v >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
}

/// Values bound to the expression variables during evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Bindings<'a> {
    pub z: f64,
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub offset: &'a [f64],
    pub r: f64,
}

impl<'a> Bindings<'a> {
    pub fn points(z: f64, x: &'a [f64], y: &'a [f64]) -> Self {
        Bindings { z, x, y, ..Default::default() }
    }

    pub fn point(x: &'a [f64]) -> Self {
        Bindings { x, ..Default::default() }
    }

    pub fn offset(offset: &'a [f64]) -> Self {
        let r = offset.iter().map(|c| c * c).sum::<f64>().sqrt();
        Bindings { offset, r, ..Default::default() }
    }
}

/// A parsed expression together with its source text.
#[derive(Clone)]
pub struct Expr {
    source: String,
    root: Node,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({})", self.source)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Expr::parse(s)
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.source)
    }
}

impl<'de> Deserialize<'de> for Expr {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Expr::parse(&s).map_err(serde::de::Error::custom)
    }
}

impl Expr {
    pub fn parse(input: &str) -> Result<Self> {
        let tokens = tokenize(input)?;
        let mut parser = Parser { tokens, pos: 0, input };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Expr { source: input.trim().to_string(), root })
    }

    pub fn constant(v: f64) -> Self {
        Expr { source: format_number(v), root: Node::Num(v) }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, b: &Bindings<'_>) -> f64 {
        eval(&self.root, b)
    }

    /// Evaluates an expression of the point `x` only.
    pub fn eval_at(&self, x: &[f64]) -> f64 {
        self.eval(&Bindings::point(x))
    }

    /// Returns `Some(v)` when the expression has no variables.
    pub fn as_constant(&self) -> Option<f64> {
        let mut vars = Vec::new();
        collect_vars(&self.root, &mut vars);
        if vars.is_empty() {
            Some(eval(&self.root, &Bindings::default()))
        } else {
            None
        }
    }

    /// Sorted, deduplicated list of the variables referenced.
    pub fn variables(&self) -> Vec<Var> {
        let mut vars = Vec::new();
        collect_vars(&self.root, &mut vars);
        vars.sort();
        vars.dedup();
        vars
    }

    pub fn depends_on_z(&self) -> bool {
        depends_on_z(&self.root)
    }

    /// Checks that only the allowed variable kinds appear, with point
    /// indices below `dim`.
    pub fn check_variables(&self, allowed: &[VarKind], dim: usize) -> Result<()> {
        for v in self.variables() {
            let (kind, index) = match v {
                Var::Z => (VarKind::Z, None),
                Var::X(i) => (VarKind::Points, Some(i)),
                Var::Y(i) => (VarKind::Points, Some(i)),
                Var::Offset(i) => (VarKind::Offset, Some(i)),
                Var::Radius => (VarKind::Offset, None),
            };
            if !allowed.contains(&kind) {
                return Err(self.invalid(format!("variable {} is not allowed here", var_name(v))));
            }
            if let Some(i) = index {
                if i >= dim {
                    return Err(self.invalid(format!("variable {} exceeds the dimension {dim}", var_name(v))));
                }
            }
        }
        Ok(())
    }

    /// Symbolic derivative with respect to `z`.
    pub fn derivative_z(&self) -> Expr {
        let root = simplify(diff(&self.root));
        Expr { source: render(&root), root }
    }

    fn invalid(&self, reason: String) -> Error {
        Error::InvalidExpression { input: self.source.clone(), reason }
    }
}

/// Variable families, used to restrict which identifiers a context accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Z,
    Points,
    Offset,
}

fn var_name(v: Var) -> String {
    match v {
        Var::Z => "z".into(),
        Var::X(i) => format!("x{i}"),
        Var::Y(i) => format!("y{i}"),
        Var::Offset(i) => format!("z{i}"),
        Var::Radius => "r".into(),
    }
}

fn eval(node: &Node, b: &Bindings<'_>) -> f64 {
    match node {
        Node::Num(v) => *v,
        Node::Var(v) => match *v {
            Var::Z => b.z,
            Var::X(i) => b.x.get(i).copied().unwrap_or(f64::NAN),
            Var::Y(i) => b.y.get(i).copied().unwrap_or(f64::NAN),
            Var::Offset(i) => b.offset.get(i).copied().unwrap_or(f64::NAN),
            Var::Radius => b.r,
        },
        Node::Neg(a) => -eval(a, b),
        Node::Add(l, r) => eval(l, b) + eval(r, b),
        Node::Sub(l, r) => eval(l, b) - eval(r, b),
        Node::Mul(l, r) => eval(l, b) * eval(r, b),
        Node::Div(l, r) => eval(l, b) / eval(r, b),
        Node::Pow(l, r) => pow(eval(l, b), eval(r, b)),
        Node::Call(f, a) => f.apply(eval(a, b)),
        Node::Min(l, r) => eval(l, b).min(eval(r, b)),
        Node::Max(l, r) => eval(l, b).max(eval(r, b)),
    }
}

fn pow(base: f64, exponent: f64) -> f64 {
    if exponent == 2.0 {
        base * base
    } else if exponent.fract() == 0.0 && exponent.abs() < 32.0 {
        base.powi(exponent as i32)
    } else {
        base.powf(exponent)
    }
}

fn collect_vars(node: &Node, out: &mut Vec<Var>) {
    match node {
        Node::Num(_) => {}
        Node::Var(v) => out.push(*v),
        Node::Neg(a) | Node::Call(_, a) => collect_vars(a, out),
        Node::Add(l, r)
        | Node::Sub(l, r)
        | Node::Mul(l, r)
        | Node::Div(l, r)
        | Node::Pow(l, r)
        | Node::Min(l, r)
        | Node::Max(l, r) => {
            collect_vars(l, out);
            collect_vars(r, out);
        }
    }
}

fn depends_on_z(node: &Node) -> bool {
    let mut vars = Vec::new();
    collect_vars(node, &mut vars);
    vars.contains(&Var::Z)
}

fn num(v: f64) -> Node {
    Node::Num(v)
}

fn bx(n: Node) -> Box<Node> {
    Box::new(n)
}

fn add(l: Node, r: Node) -> Node {
    match (&l, &r) {
        (Node::Num(a), Node::Num(b)) => num(a + b),
        (Node::Num(a), _) if *a == 0.0 => r,
        (_, Node::Num(b)) if *b == 0.0 => l,
        _ => Node::Add(bx(l), bx(r)),
    }
}

fn sub(l: Node, r: Node) -> Node {
    match (&l, &r) {
        (Node::Num(a), Node::Num(b)) => num(a - b),
        (_, Node::Num(b)) if *b == 0.0 => l,
        (Node::Num(a), _) if *a == 0.0 => neg(r),
        _ => Node::Sub(bx(l), bx(r)),
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Num(v) => num(-v),
        Node::Neg(inner) => *inner,
        other => Node::Neg(bx(other)),
    }
}

fn mul(l: Node, r: Node) -> Node {
    match (&l, &r) {
        (Node::Num(a), Node::Num(b)) => num(a * b),
        (Node::Num(a), _) | (_, Node::Num(a)) if *a == 0.0 => num(0.0),
        (Node::Num(a), _) if *a == 1.0 => r,
        (_, Node::Num(b)) if *b == 1.0 => l,
        _ => Node::Mul(bx(l), bx(r)),
    }
}

fn div(l: Node, r: Node) -> Node {
    match (&l, &r) {
        (Node::Num(a), _) if *a == 0.0 => num(0.0),
        (_, Node::Num(b)) if *b == 1.0 => l,
        _ => Node::Div(bx(l), bx(r)),
    }
}

fn pown(l: Node, r: Node) -> Node {
    match &r {
        Node::Num(e) if *e == 1.0 => l,
        Node::Num(e) if *e == 0.0 => num(1.0),
        _ => Node::Pow(bx(l), bx(r)),
    }
}

fn call(f: Func, a: Node) -> Node {
    Node::Call(f, bx(a))
}

fn diff(node: &Node) -> Node {
    if !depends_on_z(node) {
        return num(0.0);
    }
    match node {
        Node::Num(_) => num(0.0),
        Node::Var(v) => num(if *v == Var::Z { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(diff(a)),
        Node::Add(l, r) => add(diff(l), diff(r)),
        Node::Sub(l, r) => sub(diff(l), diff(r)),
        Node::Mul(l, r) => add(mul(diff(l), (**r).clone()), mul((**l).clone(), diff(r))),
        Node::Div(l, r) => {
            div(sub(mul(diff(l), (**r).clone()), mul((**l).clone(), diff(r))), pown((**r).clone(), num(2.0)))
        }
        Node::Pow(base, exponent) => {
            if !depends_on_z(exponent) {
                // g * f^(g-1) * f'
                let g = (**exponent).clone();
                mul(mul(g.clone(), pown((**base).clone(), sub(g, num(1.0)))), diff(base))
            } else {
                // f^g * (g' ln f + g f' / f)
                let f = (**base).clone();
                let g = (**exponent).clone();
                mul(
                    pown(f.clone(), g.clone()),
                    add(mul(diff(exponent), call(Func::Ln, f.clone())), div(mul(g, diff(base)), f)),
                )
            }
        }
        Node::Call(func, a) => {
            let inner = (**a).clone();
            let outer = match func {
                Func::Sin => call(Func::Cos, inner),
                Func::Cos => neg(call(Func::Sin, inner)),
                Func::Exp => call(Func::Exp, inner),
                Func::Ln => div(num(1.0), inner),
                Func::Abs => sub(mul(num(2.0), call(Func::Step, inner.clone())), num(1.0)),
                Func::Sqrt => div(num(0.5), call(Func::Sqrt, inner)),
                Func::Step => num(0.0),
            };
            mul(outer, diff(a))
        }
        Node::Min(l, r) => {
            // derivative of the active branch
            let pick_left = call(Func::Step, sub((**r).clone(), (**l).clone()));
            add(mul(pick_left.clone(), diff(l)), mul(sub(num(1.0), pick_left), diff(r)))
        }
        Node::Max(l, r) => {
            let pick_left = call(Func::Step, sub((**l).clone(), (**r).clone()));
            add(mul(pick_left.clone(), diff(l)), mul(sub(num(1.0), pick_left), diff(r)))
        }
    }
}

fn simplify(node: Node) -> Node {
    match node {
        Node::Neg(a) => neg(simplify(*a)),
        Node::Add(l, r) => add(simplify(*l), simplify(*r)),
        Node::Sub(l, r) => sub(simplify(*l), simplify(*r)),
        Node::Mul(l, r) => mul(simplify(*l), simplify(*r)),
        Node::Div(l, r) => div(simplify(*l), simplify(*r)),
        Node::Pow(l, r) => {
            let (l, r) = (simplify(*l), simplify(*r));
            match (&l, &r) {
                (Node::Num(a), Node::Num(b)) => num(pow(*a, *b)),
                _ => pown(l, r),
            }
        }
        Node::Call(f, a) => {
            let a = simplify(*a);
            match a {
                Node::Num(v) => num(f.apply(v)),
                other => call(f, other),
            }
        }
        Node::Min(l, r) => Node::Min(bx(simplify(*l)), bx(simplify(*r))),
        Node::Max(l, r) => Node::Max(bx(simplify(*l)), bx(simplify(*r))),
        leaf => leaf,
    }
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:?}")
    }
}

fn render(node: &Node) -> String {
    match node {
        Node::Num(v) => {
            if *v < 0.0 {
                format!("({})", format_number(*v))
            } else {
                format_number(*v)
            }
        }
        Node::Var(v) => var_name(*v),
        Node::Neg(a) => format!("(-{})", render(a)),
        Node::Add(l, r) => format!("({} + {})", render(l), render(r)),
        Node::Sub(l, r) => format!("({} - {})", render(l), render(r)),
        Node::Mul(l, r) => format!("{} * {}", render(l), render(r)),
        Node::Div(l, r) => format!("{} / ({})", render(l), render(r)),
        Node::Pow(l, r) => format!("({})^({})", render(l), render(r)),
        Node::Call(f, a) => format!("{}({})", f.name(), render(a)),
        Node::Min(l, r) => format!("min({}, {})", render(l), render(r)),
        Node::Max(l, r) => format!("max({}, {})", render(l), render(r)),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(input: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = input.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let err = |reason: String| Error::InvalidExpression { input: input.to_string(), reason };
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| err(format!("bad number `{text}`")))?;
            tokens.push(Token::Num(v));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            tokens.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            tokens.push(Token::Op(c));
            i += 1;
        } else if c == '\u{2212}' {
            // unicode minus sign
            tokens.push(Token::Op('-'));
            i += 1;
        } else {
            return Err(err(format!("unexpected character `{c}`")));
        }
    }
    if tokens.is_empty() {
        return Err(err("empty expression".into()));
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    input: &'a str,
}

impl Parser<'_> {
    fn error(&self, reason: &str) -> Error {
        Error::InvalidExpression { input: self.input.to_string(), reason: format!("{reason} at token {}", self.pos) }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, op: char) -> Result<()> {
        if self.eat(op) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{op}`")))
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Node::Add(bx(lhs), bx(self.term()?));
            } else if self.eat('-') {
                lhs = Node::Sub(bx(lhs), bx(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Node::Mul(bx(lhs), bx(self.unary()?));
            } else if self.eat('/') {
                lhs = Node::Div(bx(lhs), bx(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat('-') {
            return Ok(Node::Neg(bx(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Node::Pow(bx(base), bx(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        let token = self.peek().cloned().ok_or_else(|| self.error("unexpected end"))?;
        self.pos += 1;
        match token {
            Token::Num(v) => Ok(Node::Num(v)),
            Token::Op('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Token::Op(_) => Err(self.error("unexpected operator")),
            Token::Ident(name) => {
                if self.peek() == Some(&Token::Op('(')) {
                    self.pos += 1;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    self.call(&name, args)
                } else {
                    self.variable(&name)
                }
            }
        }
    }

    fn call(&self, name: &str, mut args: Vec<Node>) -> Result<Node> {
        let func = match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "ln" | "log" => Func::Ln,
            "abs" => Func::Abs,
            "sqrt" => Func::Sqrt,
            "step" => Func::Step,
            "min" | "max" => {
                if args.len() != 2 {
                    return Err(self.error(&format!("{name} takes two arguments")));
                }
                let r = args.pop().unwrap();
                let l = args.pop().unwrap();
                return Ok(if name == "min" { Node::Min(bx(l), bx(r)) } else { Node::Max(bx(l), bx(r)) });
            }
            _ => return Err(self.error(&format!("unknown function `{name}`"))),
        };
        if args.len() != 1 {
            return Err(self.error(&format!("{name} takes one argument")));
        }
        Ok(Node::Call(func, bx(args.pop().unwrap())))
    }

    fn variable(&self, name: &str) -> Result<Node> {
        match name {
            "z" => return Ok(Node::Var(Var::Z)),
            "r" => return Ok(Node::Var(Var::Radius)),
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            _ => {}
        }
        let (head, tail) = name.split_at(1);
        if let Ok(index) = tail.parse::<usize>() {
            let var = match head {
                "x" => Var::X(index),
                "y" => Var::Y(index),
                "z" => Var::Offset(index),
                _ => return Err(self.error(&format!("unknown variable `{name}`"))),
            };
            return Ok(Node::Var(var));
        }
        Err(self.error(&format!("unknown variable `{name}`")))
    }
}
