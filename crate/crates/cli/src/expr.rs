//! Scalar field expressions over chart coordinates `x1..xd`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | xN | func '(' sum ')' | '(' sum ')'
//! ```
//!
//! `^` binds tighter than unary minus and associates to the right, so
//! `-x1^2 = -(x1^2)` and `x1^2^3 = x1^(2^3)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }

    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }
}

/// Expression tree. Variables are 0-based: `Var(0)` prints as `x1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    UnexpectedChar(char),
    #[error("unexpected {found}, expected {expected}")]
    Unexpected { found: String, expected: &'static str },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("malformed number `{0}`")]
    BadNumber(String),
}

/// Parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of non-positive value {0}")]
    LogDomain(f64),
    #[error("sqrt of negative value {0}")]
    SqrtDomain(f64),
    #[error("division by zero")]
    DivByZero,
    #[error("non-finite result of {0}")]
    NonFinite(String),
    #[error("point has {got} coordinates, expression uses x{need}")]
    MissingCoordinate { got: usize, need: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut line, mut col) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let err = |kind| ParseError { line: l0, column: c0, kind };
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_digit() || c == '.' {
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
            let s: String = chars[start..i].iter().collect();
            Tok::Num(s.parse().map_err(|_| err(ParseErrorKind::BadNumber(s.clone())))?)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            Tok::Ident(chars[start..i].iter().collect())
        } else {
            i += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(err(ParseErrorKind::UnexpectedChar(c))),
            }
        };
        col += i - start;
        out.push(Spanned { tok, line: l0, column: c0 });
    }
    out.push(Spanned { tok: Tok::End, line, column: col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn fail(&self, kind: ParseErrorKind) -> ParseError {
        let t = &self.toks[self.pos];
        ParseError { line: t.line, column: t.column, kind }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        self.fail(ParseErrorKind::Unexpected {
            found: self.peek().describe(),
            expected,
        })
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            self.pos += 1;
            let rhs = self.product()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Op('^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::lookup(&name) {
                    self.pos += 1;
                    if *self.peek() != Tok::LParen {
                        return Err(self.unexpected("`(` after function name"));
                    }
                    self.pos += 1;
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                let var = name
                    .strip_prefix('x')
                    .and_then(|s| s.parse::<usize>().ok())
                    .filter(|k| (1..=self.dim).contains(k) && !name[1..].starts_with('0'));
                match var {
                    Some(k) => {
                        self.pos += 1;
                        Ok(Expr::Var(k - 1))
                    }
                    None => Err(self.fail(ParseErrorKind::UnknownIdentifier(name))),
                }
            }
            _ => Err(self.unexpected("a number, variable, function or `(`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() != Tok::RParen {
            return Err(self.unexpected("`)`"));
        }
        self.pos += 1;
        Ok(())
    }
}

/// Parses `text` with variables `x1..x{dim}`.
pub fn parse_expression(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, dim };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

fn finite(v: f64, what: impl FnOnce() -> String) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite(what()))
    }
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> Result<f64, EvalError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(k) => x.get(*k).copied().ok_or(EvalError::MissingCoordinate { got: x.len(), need: k + 1 }),
            Expr::Neg(a) => Ok(-a.eval(x)?),
            Expr::Bin(op, a, b) => {
                let (p, q) = (a.eval(x)?, b.eval(x)?);
                let v = match op {
                    BinOp::Add => p + q,
                    BinOp::Sub => p - q,
                    BinOp::Mul => p * q,
                    BinOp::Div => {
                        if q == 0.0 {
                            return Err(EvalError::DivByZero);
                        }
                        p / q
                    }
                    BinOp::Pow => p.powf(q),
                };
                finite(v, || self.to_string())
            }
            Expr::Call(f, a) => {
                let v = a.eval(x)?;
                let r = match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(EvalError::LogDomain(v));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(EvalError::SqrtDomain(v));
                        }
                        v.sqrt()
                    }
                };
                finite(r, || self.to_string())
            }
        }
    }

    /// Largest variable index used plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(k) => k + 1,
            Expr::Neg(a) | Expr::Call(_, a) => a.arity(),
            Expr::Bin(_, a, b) => a.arity().max(b.arity()),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Symbolic `∂/∂x_{var}`, with constant folding of zeros and ones.
    pub fn diff(&self, var: usize) -> Expr {
        use Expr::*;
        match self {
            Num(_) => Num(0.0),
            Var(k) => Num(if *k == var { 1.0 } else { 0.0 }),
            Neg(a) => neg(a.diff(var)),
            Bin(op, a, b) => {
                let (da, db) = (a.diff(var), b.diff(var));
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                match op {
                    BinOp::Add => add(da, db),
                    BinOp::Sub => sub(da, db),
                    BinOp::Mul => add(mul(da, b), mul(a, db)),
                    BinOp::Div => div(sub(mul(da, b.clone()), mul(a, db)), mul(b.clone(), b)),
                    BinOp::Pow => {
                        // d(a^b) = b a^(b-1) da + a^b log(a) db
                        let left = if da.is_zero() {
                            Num(0.0)
                        } else {
                            mul(mul(b.clone(), pow(a.clone(), sub(b.clone(), Num(1.0)))), da)
                        };
                        let right = if db.is_zero() {
                            Num(0.0)
                        } else {
                            mul(mul(pow(a.clone(), b), Call(Func::Log, Box::new(a))), db)
                        };
                        add(left, right)
                    }
                }
            }
            Call(f, a) => {
                let da = a.diff(var);
                if da.is_zero() {
                    return Num(0.0);
                }
                let a = a.as_ref().clone();
                let outer = match f {
                    Func::Sin => Call(Func::Cos, Box::new(a)),
                    Func::Cos => neg(Call(Func::Sin, Box::new(a))),
                    Func::Exp => Call(Func::Exp, Box::new(a)),
                    Func::Log => div(Num(1.0), a),
                    Func::Sqrt => div(Num(1.0), mul(Num(2.0), Call(Func::Sqrt, Box::new(a)))),
                };
                mul(outer, da)
            }
        }
    }
}

fn neg(a: Expr) -> Expr {
    if a.is_zero() {
        a
    } else {
        Expr::Neg(Box::new(a))
    }
}

fn add(a: Expr, b: Expr) -> Expr {
    match (a.is_zero(), b.is_zero()) {
        (true, _) => b,
        (_, true) => a,
        _ => Expr::Bin(BinOp::Add, Box::new(a), Box::new(b)),
    }
}

fn sub(a: Expr, b: Expr) -> Expr {
    match (a.is_zero(), b.is_zero()) {
        (_, true) => a,
        (true, _) => neg(b),
        _ => Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b)),
    }
}

fn mul(a: Expr, b: Expr) -> Expr {
    if a.is_zero() || b.is_zero() {
        return Expr::Num(0.0);
    }
    match (&a, &b) {
        (Expr::Num(v), _) if *v == 1.0 => b,
        (_, Expr::Num(v)) if *v == 1.0 => a,
        _ => Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b)),
    }
}

fn div(a: Expr, b: Expr) -> Expr {
    if a.is_zero() {
        return Expr::Num(0.0);
    }
    Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))
}

fn pow(a: Expr, b: Expr) -> Expr {
    Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b))
}

/// Prints with every compound subterm parenthesized, so the output parses
/// back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{:?})", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(k) => write!(f, "x{}", k + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(s: &str, x: &[f64]) -> f64 {
        parse_expression(s, x.len()).unwrap().eval(x).unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert_eq!(eval("2*sin(x1)*cos(x2)", &[half_pi, 0.0]), 2.0);
        assert_eq!(eval("x1^2^3", &[2.0]), 256.0);
        assert_eq!(eval("-x1^2", &[3.0]), -9.0);
        assert_eq!(eval("2^-1", &[0.0]), 0.5);
        assert_eq!(eval("8/4/2", &[0.0]), 1.0);
        assert_eq!(eval("1-2-3", &[0.0]), -4.0);
        assert_eq!(eval("1+2*3^2", &[0.0]), 19.0);
        assert_eq!(eval("1.5e-1*2E1", &[0.0]), 3.0);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_expression("sin(x3)", 2).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownIdentifier("x3".into()));
        assert_eq!((e.line, e.column), (1, 5));
        let e = parse_expression("1 +\n  * 2", 1).unwrap_err();
        assert_eq!((e.line, e.column), (2, 3));
        assert!(parse_expression("(x1", 1).is_err());
        assert!(parse_expression("x1 x1", 1).is_err());
        assert!(parse_expression("2 $ 3", 1).is_err());
        assert!(parse_expression("x0", 2).is_err());
        assert!(parse_expression("sin x1", 1).is_err());
    }

    #[test]
    fn domain_errors() {
        let e = parse_expression("log(x1)", 1).unwrap();
        assert!(matches!(e.eval(&[0.0]), Err(EvalError::LogDomain(_))));
        let e = parse_expression("sqrt(x1 - 1)", 1).unwrap();
        assert!(matches!(e.eval(&[0.5]), Err(EvalError::SqrtDomain(_))));
        let e = parse_expression("1/x1", 1).unwrap();
        assert_eq!(e.eval(&[0.0]), Err(EvalError::DivByZero));
        let e = parse_expression("exp(x1)", 1).unwrap();
        assert!(matches!(e.eval(&[1e4]), Err(EvalError::NonFinite(_))));
    }

    #[test]
    fn derivative_matches_closed_form() {
        let e = parse_expression("exp(0.6*sin(x1)*cos(x2)) + x1^3/x2 - sqrt(x2)*log(x1)", 2).unwrap();
        let x = [0.7f64, 1.3];
        let (s1, c1, s2, c2) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos());
        let g = (0.6 * s1 * c2).exp();
        let d1 = g * 0.6 * c1 * c2 + 3.0 * x[0] * x[0] / x[1] - x[1].sqrt() / x[0];
        let d2 = -g * 0.6 * s1 * s2 - x[0].powi(3) / (x[1] * x[1]) - 0.5 / x[1].sqrt() * x[0].ln();
        assert!((e.diff(0).eval(&x).unwrap() - d1).abs() < 1e-13);
        assert!((e.diff(1).eval(&x).unwrap() - d2).abs() < 1e-13);
        assert_eq!(parse_expression("x1^x2", 2).unwrap().diff(0).arity(), 2);
    }

    #[test]
    fn print_round_trip() {
        for s in ["x1^2^3", "-x1^2", "2*sin(x1)*cos(x2)", "1-(2-3)", "-(-x1)", "exp(-x2/3.25e-3)"] {
            let e = parse_expression(s, 2).unwrap();
            assert_eq!(parse_expression(&e.to_string(), 2).unwrap(), e, "{s} -> {e}");
        }
    }
}
