//! Infix expression parsing shared by class polynomials and system files.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr    := ['+'|'-'] term { ('+'|'-') term }
//! term    := factor { ['*'] factor | '/' number }
//! factor  := primary [ '^' integer ]
//! primary := number | identifier | '(' expr ')' | '-' primary
//! ```
//!
//! Numbers are integers, decimals (`0.3` is read as exactly `3/10`) or
//! `p/q` fractions. Juxtaposition multiplies, so `0.3x^2` is accepted.

use std::fmt;

use num::{BigInt, BigRational, One, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(BigRational),
    Var { name: String, column: usize },
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, u32),
}

/// Target algebra for evaluating a parsed expression.
pub trait ExprAlgebra: Sized {
    type Error: From<ParseError>;

    fn constant(&self, value: BigRational) -> Self;
    fn variable(&self, name: &str, line: usize, column: usize) -> Result<Self, Self::Error>;
    fn sum(self, rhs: Self) -> Result<Self, Self::Error>;
    fn product(self, rhs: Self) -> Result<Self, Self::Error>;
    fn negated(self) -> Self;
    fn power(self, exp: u32) -> Result<Self, Self::Error>;
}

impl Expr {
    /// Evaluates the tree, using `seed` only as a factory for constants and variables.
    pub fn eval<A: ExprAlgebra>(&self, seed: &A, line: usize) -> Result<A, A::Error> {
        Ok(match self {
            Expr::Num(q) => seed.constant(q.clone()),
            Expr::Var { name, column } => seed.variable(name, line, *column)?,
            Expr::Add(a, b) => a.eval(seed, line)?.sum(b.eval(seed, line)?)?,
            Expr::Sub(a, b) => a.eval(seed, line)?.sum(b.eval(seed, line)?.negated())?,
            Expr::Mul(a, b) => a.eval(seed, line)?.product(b.eval(seed, line)?)?,
            Expr::Neg(a) => a.eval(seed, line)?.negated(),
            Expr::Pow(a, e) => a.eval(seed, line)?.power(*e)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational),
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexed {
    tok: Tok,
    column: usize,
}

fn lex(src: &str, line: usize) -> Result<Vec<Lexed>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |column: usize, message: String| ParseError {
        line,
        column,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let frac_start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[frac_start..i].iter().collect();
                let digits = format!("{int_part}{frac}");
                let numer: BigInt = if digits.is_empty() {
                    BigInt::zero()
                } else {
                    digits
                        .parse()
                        .map_err(|_| err(column, "bad number".into()))?
                };
                let denom = num::pow(BigInt::from(10), frac.len());
                out.push(Lexed {
                    tok: Tok::Num(BigRational::new(numer, denom)),
                    column,
                });
            } else {
                let v: BigInt = int_part
                    .parse()
                    .map_err(|_| err(column, "bad number".into()))?;
                out.push(Lexed {
                    tok: Tok::Int(v),
                    column,
                });
            }
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Lexed {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            other => return Err(err(column, format!("unexpected character '{other}'"))),
        };
        out.push(Lexed { tok, column });
        i += 1;
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    line: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|l| &l.tok)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map_or(self.end_column, |l| l.column)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            line: self.line,
            column: self.column(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Expr::Neg(Box::new(self.term()?))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = Expr::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = Expr::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = match self.peek() {
                        Some(Tok::Int(v)) => BigRational::from_integer(v.clone()),
                        Some(Tok::Num(q)) => q.clone(),
                        _ => return self.error("only division by a numeric constant is supported"),
                    };
                    if d.is_zero() {
                        return self.error("division by zero");
                    }
                    self.pos += 1;
                    acc = Expr::Mul(Box::new(acc), Box::new(Expr::Num(d.recip())));
                }
                Some(Tok::Int(_) | Tok::Num(_) | Tok::Ident(_) | Tok::LParen) => {
                    acc = Expr::Mul(Box::new(acc), Box::new(self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek() {
                Some(Tok::Int(v)) => {
                    let e = u32::try_from(v.clone());
                    match e {
                        Ok(e) => {
                            self.pos += 1;
                            Ok(Expr::Pow(Box::new(base), e))
                        }
                        Err(_) => self.error("exponent out of range"),
                    }
                }
                _ => self.error("expected a nonnegative integer exponent"),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let column = self.column();
        match self.peek().cloned() {
            Some(Tok::Int(v)) => {
                self.pos += 1;
                Ok(Expr::Num(BigRational::from_integer(v)))
            }
            Some(Tok::Num(q)) => {
                self.pos += 1;
                Ok(Expr::Num(q))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(Expr::Var { name, column })
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.factor()?)))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(_) => self.error("unexpected token"),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses one expression occupying a whole line. `line` is only used for diagnostics.
pub fn parse_expr(src: &str, line: usize) -> Result<Expr, ParseError> {
    let toks = lex(src, line)?;
    let mut p = Parser {
        toks,
        pos: 0,
        line,
        end_column: src.chars().count() + 1,
    };
    if p.peek().is_none() {
        return p.error("empty expression");
    }
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.error("trailing input");
    }
    Ok(e)
}

/// Formats a rational coefficient as `p` or `p/q`.
pub(crate) fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Writes `coef*mono` with sign handling; `first` controls whether a leading `+` is emitted.
pub(crate) fn write_term(out: &mut String, coef: &BigRational, monomial: &str, first: bool) {
    let negative = coef < &BigRational::zero();
    let abs = if negative {
        -coef.clone()
    } else {
        coef.clone()
    };
    if first {
        if negative {
            out.push('-');
        }
    } else if negative {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    if monomial.is_empty() {
        out.push_str(&fmt_rational(&abs));
    } else if abs.is_one() {
        out.push_str(monomial);
    } else {
        out.push_str(&fmt_rational(&abs));
        out.push('*');
        out.push_str(monomial);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse_expr("0.3", 1).unwrap(), Expr::Num(q(3, 10)));
        assert_eq!(parse_expr("1.25", 1).unwrap(), Expr::Num(q(5, 4)));
    }

    #[test]
    fn fraction_is_division_by_constant() {
        let e = parse_expr("3/10", 1).unwrap();
        assert_eq!(
            e,
            Expr::Mul(Box::new(Expr::Num(q(3, 1))), Box::new(Expr::Num(q(1, 10))))
        );
    }

    #[test]
    fn errors_carry_columns() {
        let e = parse_expr("x + $", 4).unwrap_err();
        assert_eq!((e.line, e.column), (4, 5));
        let e = parse_expr("x^y", 1).unwrap_err();
        assert_eq!(e.column, 3);
        let e = parse_expr("x / y", 1).unwrap_err();
        assert!(e.message.contains("division"));
        assert!(parse_expr("(x + 1", 1).is_err());
        assert!(parse_expr("", 1).is_err());
    }
}
