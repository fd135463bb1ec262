//! Small arithmetic expressions over `x1, x2, x3, t` (aliases `x, y, z`)
//! and the outward normal `n1, n2, n3`.
//!
//! Grammar: `+ - * / ^`, unary minus, parentheses, numbers, the constants
//! `pi` and `e`, and the functions `sin`, `cos`, `exp`. `^` is right
//! associative and binds tighter than unary minus, so `-x^2 = -(x^2)`.

use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    X1,
    X2,
    X3,
    T,
    N1,
    N2,
    N3,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// Values of the variables at one evaluation point.
#[derive(Clone, Copy, Debug, Default)]
pub struct Point {
    pub x: [f64; 3],
    pub t: f64,
    pub n: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprError {
    pub pos: usize,
    pub msg: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at column {}", self.msg, self.pos + 1)
    }
}

impl std::error::Error for ExprError {}

/// A parsed expression; cheap to clone and shareable across threads.
#[derive(Clone, Debug)]
pub struct Expr {
    root: Arc<Node>,
    source: String,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.root == other.root
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let mut p = Parser {
            s: src.as_bytes(),
            pos: 0,
        };
        let root = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(Expr {
            root: Arc::new(root),
            source: src.to_string(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eval(&self, p: &Point) -> f64 {
        eval(&self.root, p)
    }

    pub fn at(&self, x: [f64; 3], t: f64) -> f64 {
        self.eval(&Point { x, t, n: [0.0; 3] })
    }

    /// Whether the expression mentions `v`.
    pub fn uses(&self, v: Var) -> bool {
        fn walk(n: &Node, v: Var) -> bool {
            match n {
                Node::Num(_) => false,
                Node::Var(w) => *w == v,
                Node::Neg(a) | Node::Call(_, a) => walk(a, v),
                Node::Bin(_, a, b) => walk(a, v) || walk(b, v),
            }
        }
        walk(&self.root, v)
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self.root, Node::Num(v) if v == 0.0)
    }
}

fn eval(n: &Node, p: &Point) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var(v) => match v {
            Var::X1 => p.x[0],
            Var::X2 => p.x[1],
            Var::X3 => p.x[2],
            Var::T => p.t,
            Var::N1 => p.n[0],
            Var::N2 => p.n[1],
            Var::N3 => p.n[2],
        },
        Node::Neg(a) => -eval(a, p),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, p), eval(b, p));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => pow(a, b),
            }
        }
        Node::Call(f, a) => {
            let v = eval(a, p);
            match f {
                Func::Sin => v.sin(),
                Func::Cos => v.cos(),
                Func::Exp => v.exp(),
            }
        }
    }
}

/// Integer exponents use repeated multiplication so that polynomials are
/// evaluated exactly as they would be written by hand.
fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ExprError {
        ExprError {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(c as char, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            None => Err(self.err("unexpected end of expression")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let s = self.s;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut p = self.pos + 1;
            if p < s.len() && (s[p] == b'+' || s[p] == b'-') {
                p += 1;
            }
            if p < s.len() && s[p].is_ascii_digit() {
                self.pos = p;
                digits(&mut self.pos);
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Node::Num).map_err(|_| ExprError {
            pos: start,
            msg: format!("invalid number '{text}'"),
        })
    }

    fn ident(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
        let var = match name {
            "x1" | "x" => Some(Var::X1),
            "x2" | "y" => Some(Var::X2),
            "x3" | "z" => Some(Var::X3),
            "t" => Some(Var::T),
            "n1" => Some(Var::N1),
            "n2" => Some(Var::N2),
            "n3" => Some(Var::N3),
            _ => None,
        };
        if let Some(v) = var {
            return Ok(Node::Var(v));
        }
        match name {
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "e" => return Ok(Node::Num(std::f64::consts::E)),
            _ => {}
        }
        let func = match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            _ => {
                return Err(ExprError {
                    pos: start,
                    msg: format!("unknown name '{name}'"),
                })
            }
        };
        if self.peek() != Some(b'(') {
            return Err(self.err("expected '(' after function name"));
        }
        self.pos += 1;
        let arg = self.expr()?;
        if self.peek() != Some(b')') {
            return Err(self.err("expected ')'"));
        }
        self.pos += 1;
        Ok(Node::Call(func, Box::new(arg)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, x: [f64; 3], t: f64) -> f64 {
        Expr::parse(s).unwrap().at(x, t)
    }

    #[test]
    fn precedence() {
        assert_eq!(ev("1 + 2*3", [0.0; 3], 0.0), 7.0);
        assert_eq!(ev("-2^2", [0.0; 3], 0.0), -4.0);
        assert_eq!(ev("2^3^2", [0.0; 3], 0.0), 512.0);
        assert_eq!(ev("(1+2)*3 - 4/2", [0.0; 3], 0.0), 7.0);
        assert_eq!(ev("2^-1", [0.0; 3], 0.0), 0.5);
    }

    #[test]
    fn variables_and_functions() {
        let x = [0.5, 2.0, -1.0];
        assert_eq!(ev("x1*x2 + x3*t", x, 3.0), 1.0 - 3.0);
        assert_eq!(ev("x*y*z", x, 0.0), -1.0);
        assert!((ev("sin(pi*x)", x, 0.0) - 1.0).abs() < 1e-15);
        assert!((ev("exp(1) - e", x, 0.0)).abs() < 1e-15);
        assert_eq!(ev("1e-3*2", x, 0.0), 2e-3);
        let p = Point { x, t: 0.0, n: [0.0, -1.0, 0.0] };
        assert_eq!(Expr::parse("2*n2").unwrap().eval(&p), -2.0);
    }

    #[test]
    fn errors() {
        for bad in ["", "1 +", "sqrt(2)", "(1", "2 $ 3", "foo", "sin 1", "1 2"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
        let e = Expr::parse("1 + bar").unwrap_err();
        assert_eq!(e.pos, 4);
    }

    #[test]
    fn uses() {
        let e = Expr::parse("t*x2").unwrap();
        assert!(e.uses(Var::T) && e.uses(Var::X2) && !e.uses(Var::X1));
        assert!(Expr::parse("0").unwrap().is_zero());
    }
}
