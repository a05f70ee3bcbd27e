//! Expression language for function-valued contractivity factors.
//!
//! Grammar (multiplication is always explicit; `2.9x` is rejected):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := ('-')? atom ('^' INTEGER)?
//! atom   := NUMBER | IDENT | IDENT '(' expr (',' expr)* ')' | '(' expr ')'
//! IDENT  ∈ {x, y, sin, cos, abs, exp, sqrt}
//! ```
//!
//! The variable `y` is only admitted when parsing with [`Dim::Two`].

use std::fmt;

use thiserror::Error;

/// Dimension of the expression's variable set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Abs,
    Exp,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Abs => "abs",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at position {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative value")]
    SqrtOfNegative,
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            bytes: src.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token with its start position, or `None` at end of input.
    fn next(&mut self) -> Result<Option<(usize, Tok)>, ParseError> {
        self.skip_ws();
        if self.pos >= self.bytes.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.bytes[self.pos];
        let tok = match c {
            b'+' => {
                self.pos += 1;
                Tok::Plus
            }
            b'-' => {
                self.pos += 1;
                Tok::Minus
            }
            b'*' => {
                self.pos += 1;
                Tok::Star
            }
            b'/' => {
                self.pos += 1;
                Tok::Slash
            }
            b'^' => {
                self.pos += 1;
                Tok::Caret
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            b',' => {
                self.pos += 1;
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
                    end += 1;
                }
                if end < self.bytes.len() && self.bytes[end] == b'.' {
                    end += 1;
                    while end < self.bytes.len() && self.bytes[end].is_ascii_digit() {
                        end += 1;
                    }
                }
                if end < self.bytes.len() && (self.bytes[end] == b'e' || self.bytes[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.bytes.len() && (self.bytes[e] == b'+' || self.bytes[e] == b'-') {
                        e += 1;
                    }
                    if e < self.bytes.len() && self.bytes[e].is_ascii_digit() {
                        while e < self.bytes.len() && self.bytes[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = &self.src[start..end];
                let value: f64 = text.parse().map_err(|_| ParseError {
                    pos: start,
                    message: format!("invalid number `{text}`"),
                })?;
                self.pos = end;
                Tok::Num(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let mut end = self.pos;
                while end < self.bytes.len()
                    && (self.bytes[end].is_ascii_alphanumeric() || self.bytes[end] == b'_')
                {
                    end += 1;
                }
                let text = self.src[start..end].to_owned();
                self.pos = end;
                Tok::Ident(text)
            }
            _ => {
                return Err(ParseError {
                    pos: start,
                    message: format!("unexpected character `{}`", &self.src[start..start + 1]),
                })
            }
        };
        Ok(Some((start, tok)))
    }
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
    dim: Dim,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.idx)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.idx).cloned();
        if t.is_some() {
            self.idx += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        match self.bump() {
            Some((_, t)) if &t == want => Ok(()),
            Some((p, t)) => Err(ParseError {
                pos: p,
                message: format!("expected {what}, found {}", describe(&t)),
            }),
            None => Err(ParseError {
                pos: self.end,
                message: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some((_, Tok::Plus)) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some((_, Tok::Minus)) => {
                    self.bump();
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some((_, Tok::Star)) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some((_, Tok::Slash)) => {
                    self.bump();
                    let rhs = self.factor()?;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                Some((p, Tok::Num(_) | Tok::Ident(_) | Tok::LParen)) => {
                    return Err(ParseError {
                        pos: *p,
                        message: "implicit multiplication is not supported; write `*` explicitly"
                            .into(),
                    });
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let negated = matches!(self.peek(), Some((_, Tok::Minus)));
        if negated {
            self.bump();
        }
        let mut e = self.atom()?;
        if matches!(self.peek(), Some((_, Tok::Caret))) {
            self.bump();
            match self.bump() {
                Some((p, Tok::Num(v))) => {
                    if v.fract() != 0.0 || v < 0.0 || v > u32::MAX as f64 {
                        return Err(ParseError {
                            pos: p,
                            message: format!("exponent must be a non-negative integer, got `{v}`"),
                        });
                    }
                    e = Expr::Pow(Box::new(e), v as u32);
                }
                Some((p, t)) => {
                    return Err(ParseError {
                        pos: p,
                        message: format!("expected integer exponent, found {}", describe(&t)),
                    })
                }
                None => {
                    return Err(ParseError {
                        pos: self.end,
                        message: "expected integer exponent, found end of input".into(),
                    })
                }
            }
        }
        Ok(if negated { Expr::Neg(Box::new(e)) } else { e })
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.bump() {
            Some((_, Tok::Num(v))) => Ok(Expr::Num(v)),
            Some((p, Tok::Ident(name))) => self.ident(p, name),
            Some((_, Tok::LParen)) => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some((p, t)) => Err(ParseError {
                pos: p,
                message: format!("expected a number, identifier or `(`, found {}", describe(&t)),
            }),
            None => Err(ParseError {
                pos: self.end,
                message: "expected a number, identifier or `(`, found end of input".into(),
            }),
        }
    }

    fn ident(&mut self, pos: usize, name: String) -> Result<Expr, ParseError> {
        let func = match name.as_str() {
            "x" => {
                return self.no_call(pos, Expr::Var(Var::X), "x");
            }
            "y" => {
                if self.dim == Dim::One {
                    return Err(ParseError {
                        pos,
                        message: "variable `y` is not available in one-variable expressions"
                            .into(),
                    });
                }
                return self.no_call(pos, Expr::Var(Var::Y), "y");
            }
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => {
                return Err(ParseError {
                    pos,
                    message: format!("unknown identifier `{name}`"),
                })
            }
        };
        self.expect(&Tok::LParen, "`(` after function name")?;
        let mut args = vec![self.expr()?];
        while matches!(self.peek(), Some((_, Tok::Comma))) {
            self.bump();
            args.push(self.expr()?);
        }
        self.expect(&Tok::RParen, "`)`")?;
        if args.len() != 1 {
            return Err(ParseError {
                pos,
                message: format!(
                    "function `{}` takes 1 argument, got {}",
                    func.name(),
                    args.len()
                ),
            });
        }
        Ok(Expr::Call(func, Box::new(args.pop().unwrap())))
    }

    /// Variables are not callable.
    fn no_call(&mut self, pos: usize, var: Expr, name: &str) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some((_, Tok::LParen))) {
            return Err(ParseError {
                pos,
                message: format!("`{name}` is a variable, not a function"),
            });
        }
        Ok(var)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number `{v}`"),
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
        Tok::Comma => "`,`".into(),
    }
}

/// Parse `text` against the factor grammar with the given variable set.
pub fn parse(text: &str, dim: Dim) -> Result<Expr, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut toks = Vec::new();
    while let Some(t) = lexer.next()? {
        toks.push(t);
    }
    let mut parser = Parser {
        toks,
        idx: 0,
        end: text.len(),
        dim,
    };
    let e = parser.expr()?;
    if let Some((p, t)) = parser.peek() {
        return Err(ParseError {
            pos: *p,
            message: format!("unexpected trailing {}", describe(t)),
        });
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

impl Expr {
    /// Evaluate a one-variable expression at `x`.
    pub fn eval1(&self, x: f64) -> Result<f64, EvalError> {
        self.eval_at(x, f64::NAN)
    }

    /// Evaluate a two-variable expression at `(x, y)`.
    pub fn eval2(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        self.eval_at(x, y)
    }

    fn eval_at(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(Var::X) => Ok(x),
            Expr::Var(Var::Y) => Ok(y),
            Expr::Neg(e) => Ok(-e.eval_at(x, y)?),
            Expr::Bin(op, a, b) => {
                let a = a.eval_at(x, y)?;
                let b = b.eval_at(x, y)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(EvalError::DivisionByZero)
                        } else {
                            Ok(a / b)
                        }
                    }
                }
            }
            Expr::Pow(e, k) => Ok(e.eval_at(x, y)?.powi(*k as i32)),
            Expr::Call(f, e) => {
                let v = e.eval_at(x, y)?;
                match f {
                    Func::Sin => Ok(v.sin()),
                    Func::Cos => Ok(v.cos()),
                    Func::Abs => Ok(v.abs()),
                    Func::Exp => Ok(v.exp()),
                    Func::Sqrt => {
                        if v < 0.0 {
                            Err(EvalError::SqrtOfNegative)
                        } else {
                            Ok(v.sqrt())
                        }
                    }
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Pretty-printing (re-parses to the same tree)
// ---------------------------------------------------------------------------

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            _ => 4,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(Var::X) => write!(f, "x"),
            Expr::Var(Var::Y) => write!(f, "y"),
            Expr::Neg(e) => {
                if e.prec() >= 4 {
                    write!(f, "-{e}")
                } else {
                    write!(f, "-({e})")
                }
            }
            Expr::Bin(op, a, b) => {
                let prec = self.prec();
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                if a.prec() < prec {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                write!(f, "{sym}")?;
                // the grammar is left-associative, so a same-precedence right
                // child must keep its parentheses to round-trip structurally
                let need = b.prec() <= prec || matches!(**b, Expr::Neg(_));
                if need {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
            Expr::Pow(e, k) => {
                if matches!(**e, Expr::Num(_) | Expr::Var(_) | Expr::Call(..)) {
                    write!(f, "{e}^{k}")
                } else {
                    write!(f, "({e})^{k}")
                }
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p1(s: &str) -> Expr {
        parse(s, Dim::One).unwrap()
    }

    #[test]
    fn parses_paper_factor() {
        let e = p1("0.99-abs(sin(10*x))");
        assert_eq!(
            e,
            Expr::Bin(
                BinOp::Sub,
                Box::new(Expr::Num(0.99)),
                Box::new(Expr::Call(
                    Func::Abs,
                    Box::new(Expr::Call(
                        Func::Sin,
                        Box::new(Expr::Bin(
                            BinOp::Mul,
                            Box::new(Expr::Num(10.0)),
                            Box::new(Expr::Var(Var::X)),
                        )),
                    )),
                )),
            )
        );
    }

    #[test]
    fn rejects_implicit_multiplication() {
        let err = parse("2.9x", Dim::One).unwrap_err();
        assert_eq!(err.pos, 3);
        assert!(err.message.contains("implicit multiplication"));
    }

    #[test]
    fn rejects_unknown_identifier() {
        let err = parse("cos(z)", Dim::One).unwrap_err();
        assert!(err.message.contains("unknown identifier `z`"));
    }

    #[test]
    fn rejects_y_in_one_variable() {
        let err = parse("sin(y)", Dim::One).unwrap_err();
        assert!(err.message.contains("`y` is not available"));
        assert!(parse("sin(y)", Dim::Two).is_ok());
    }

    #[test]
    fn rejects_wrong_arity() {
        let err = parse("sin(x, x)", Dim::One).unwrap_err();
        assert!(err.message.contains("takes 1 argument"));
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p1("0.99-abs(sin(10*x))").eval1(0.0).unwrap(), 0.99);
        assert_eq!(p1("2.9*x").eval1(0.25).unwrap(), 0.725);
        let e = parse("0.45*(cos(x)+sin(y))", Dim::Two).unwrap();
        assert_eq!(e.eval2(0.0, 0.0).unwrap(), 0.45);
    }

    #[test]
    fn eval_errors() {
        assert_eq!(
            p1("1/(x-x)").eval1(2.0).unwrap_err(),
            EvalError::DivisionByZero
        );
        assert_eq!(
            p1("sqrt(0-x)").eval1(4.0).unwrap_err(),
            EvalError::SqrtOfNegative
        );
    }

    #[test]
    fn pow_parses_and_evaluates() {
        let e = parse("x^2+y^9", Dim::Two).unwrap();
        assert_eq!(e.eval2(3.0, 2.0).unwrap(), 9.0 + 512.0);
        assert!(parse("x^2.5", Dim::One).is_err());
        assert!(parse("x^-2", Dim::One).is_err());
    }

    #[test]
    fn unary_minus_binds_as_factor() {
        // -x^2 is -(x^2); -x*y parses as (-x)*y
        assert_eq!(p1("-x^2").eval1(3.0).unwrap(), -9.0);
        let e = parse("-x*y", Dim::Two).unwrap();
        assert_eq!(e.eval2(3.0, 5.0).unwrap(), -15.0);
    }

    #[test]
    fn display_round_trips() {
        for s in [
            "0.99-abs(sin(10*x))",
            "2.9*x",
            "1-2-3",
            "1/(2/3)",
            "-(x+1)^2*cos(3*x)",
            "0.45*(cos(x)+sin(y))",
            "x^2+y^9",
            "1--2",
        ] {
            let dim = if s.contains('y') { Dim::Two } else { Dim::One };
            let e = parse(s, dim).unwrap();
            let printed = e.to_string();
            let reparsed = parse(&printed, dim).unwrap();
            assert_eq!(e, reparsed, "round-trip failed for `{s}` -> `{printed}`");
        }
    }

    #[test]
    fn position_reported() {
        let err = parse("1 + @", Dim::One).unwrap_err();
        assert_eq!(err.pos, 4);
    }
}
