//! A small arithmetic language for scalar fields.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := atom ('^' factor)?
//! atom   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right associative and binds tighter than unary minus, so
//! `-2^2 = -4` and `2^3^2 = 512`. Identifiers are `x y r theta pi e t`;
//! functions are `sin cos exp log sqrt abs`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("evaluation error at byte {offset}: {message}")]
    Eval { offset: usize, message: String },
}

pub type Result<T> = std::result::Result<T, ExprError>;

/// Coordinate values an expression may reference.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Vars {
    pub x: f64,
    pub y: f64,
    pub r: f64,
    pub theta: f64,
    pub t: f64,
}

impl Vars {
    /// Cartesian point; `r` and `theta` are derived with `theta ∈ [0, 2π)`.
    pub fn cartesian(x: f64, y: f64) -> Self {
        let mut theta = y.atan2(x);
        if theta < 0.0 {
            theta += std::f64::consts::TAU;
        }
        Self {
            x,
            y,
            r: x.hypot(y),
            theta,
            t: 0.0,
        }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            x: r * c,
            y: r * s,
            r,
            theta,
            t: 0.0,
        }
    }

    pub fn at_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    R,
    Theta,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func {
    fn lookup(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "exp" => Self::Exp,
            "log" => Self::Log,
            "sqrt" => Self::Sqrt,
            "abs" => Self::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
            Self::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>, usize),
    Bin(BinOp, Box<Node>, Box<Node>, usize),
    Call(Func, Box<Node>, usize),
}

/// Parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    root: Node,
}

/// Which identifiers a parse accepts. `t` is opt-in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Allowed {
    pub time: bool,
}

impl Expression {
    /// Parse with spatial identifiers only.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with(text, Allowed::default())
    }

    pub fn parse_with(text: &str, allowed: Allowed) -> Result<Self> {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            allowed,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
        }
        Ok(Self {
            source: text.to_string(),
            root,
        })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            source: format!("{value:?}"),
            root: Node::Num(value),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn eval(&self, v: &Vars) -> Result<f64> {
        eval_node(&self.root, v)
    }

    /// True when the tree references no coordinate.
    pub fn is_constant(&self) -> bool {
        fn walk(n: &Node) -> bool {
            match n {
                Node::Num(_) => true,
                Node::Var(_) => false,
                Node::Neg(a, _) | Node::Call(_, a, _) => walk(a),
                Node::Bin(_, a, b, _) => walk(a) && walk(b),
            }
        }
        walk(&self.root)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn eval_node(n: &Node, v: &Vars) -> Result<f64> {
    let out = match n {
        Node::Num(x) => return Ok(*x),
        Node::Var(var) => {
            return Ok(match var {
                Var::X => v.x,
                Var::Y => v.y,
                Var::R => v.r,
                Var::Theta => v.theta,
                Var::T => v.t,
            })
        }
        Node::Neg(a, _) => -eval_node(a, v)?,
        Node::Bin(op, a, b, at) => {
            let (a, b) = (eval_node(a, v)?, eval_node(b, v)?);
            let r = match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(eval_err(*at, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => a.powf(b),
            };
            check_finite(r, *at)?
        }
        Node::Call(f, a, at) => {
            let a = eval_node(a, v)?;
            let r = match f {
                Func::Sin => a.sin(),
                Func::Cos => a.cos(),
                Func::Exp => a.exp(),
                Func::Log => {
                    if a <= 0.0 {
                        return Err(eval_err(*at, format!("log of nonpositive value {a}")));
                    }
                    a.ln()
                }
                Func::Sqrt => {
                    if a < 0.0 {
                        return Err(eval_err(*at, format!("sqrt of negative value {a}")));
                    }
                    a.sqrt()
                }
                Func::Abs => a.abs(),
            };
            check_finite(r, *at)?
        }
    };
    Ok(out)
}

fn eval_err(offset: usize, message: impl Into<String>) -> ExprError {
    ExprError::Eval {
        offset,
        message: message.into(),
    }
}

fn check_finite(x: f64, at: usize) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(eval_err(at, format!("non-finite result {x}")))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    allowed: Allowed,
}

impl Parser<'_> {
    fn syntax(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        loop {
            let at = self.pos_after_ws();
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs), at);
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.factor()?;
        loop {
            let at = self.pos_after_ws();
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs), at);
        }
    }

    fn factor(&mut self) -> Result<Node> {
        let at = self.pos_after_ws();
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.factor()?), at));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        let at = self.pos_after_ws();
        if self.eat(b'^') {
            let exp = self.factor()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exp), at));
        }
        Ok(base)
    }

    fn pos_after_ws(&mut self) -> usize {
        self.skip_ws();
        self.pos
    }

    fn atom(&mut self) -> Result<Node> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.ident(),
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.syntax("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                // `2e` is the number 2 followed by the constant e, which the
                // grammar has no juxtaposition for; report it here.
                self.pos = save;
                return Err(self.syntax("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Node::Num).map_err(|e| ExprError::Syntax {
            offset: start,
            message: e.to_string(),
        })
    }

    fn ident(&mut self) -> Result<Node> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if self.peek() == Some(b'(') {
            let f = Func::lookup(name).ok_or_else(|| ExprError::UnknownFunction {
                name: name.to_string(),
                offset: start,
            })?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax(format!("expected `)` to close {}(", f.name())));
            }
            return Ok(Node::Call(f, Box::new(arg), start));
        }
        let node = match name {
            "x" => Node::Var(Var::X),
            "y" => Node::Var(Var::Y),
            "r" => Node::Var(Var::R),
            "theta" => Node::Var(Var::Theta),
            "t" if self.allowed.time => Node::Var(Var::T),
            "pi" => Node::Num(std::f64::consts::PI),
            "e" => Node::Num(std::f64::consts::E),
            _ => {
                return Err(ExprError::UnknownIdentifier {
                    name: name.to_string(),
                    offset: start,
                })
            }
        };
        Ok(node)
    }
}
