//! Integer expressions in one variable `n`, used by sparse partial-quotient rules.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! sum     := prod (('+' | '-') prod)*
//! prod    := power (['*'] power)*      juxtaposition multiplies: "3n" == "3*n"
//! power   := postfix ['^' power]       right associative
//! postfix := primary '!'*
//! primary := INTEGER | 'n' | '(' sum ')'
//! ```

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};

/// Largest argument accepted by `!` and largest exponent accepted by `^`.
const MAX_SMALL_ARG: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Num(BigUint),
    Var,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Fact(Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(Error::parse(src, "empty expression"));
        }
        let mut p = Parser { tokens, pos: 0 };
        let e = p.sum()?;
        if let Some(t) = p.peek() {
            return Err(Error::parse(t.to_string(), "unexpected trailing token"));
        }
        Ok(e)
    }

    pub fn eval(&self, n: u64) -> Result<BigInt> {
        Ok(match self {
            Expr::Num(v) => BigInt::from(v.clone()),
            Expr::Var => BigInt::from(n),
            Expr::Add(a, b) => a.eval(n)? + b.eval(n)?,
            Expr::Sub(a, b) => a.eval(n)? - b.eval(n)?,
            Expr::Mul(a, b) => a.eval(n)? * b.eval(n)?,
            Expr::Pow(a, b) => {
                let base = a.eval(n)?;
                let exp = small_arg(&b.eval(n)?, "exponent")?;
                num_traits::pow(base, exp as usize)
            }
            Expr::Fact(a) => {
                let k = small_arg(&a.eval(n)?, "factorial argument")?;
                factorial(k)
            }
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Fact(..) => 4,
            Expr::Num(_) | Expr::Var => 5,
        }
    }

    fn fmt_min(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.fmt_min(f, 0)?;
            return write!(f, ")");
        }
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "n"),
            Expr::Add(a, b) => {
                a.fmt_min(f, 1)?;
                write!(f, "+")?;
                b.fmt_min(f, 2)
            }
            Expr::Sub(a, b) => {
                a.fmt_min(f, 1)?;
                write!(f, "-")?;
                b.fmt_min(f, 2)
            }
            Expr::Mul(a, b) => {
                a.fmt_min(f, 2)?;
                write!(f, "*")?;
                b.fmt_min(f, 3)
            }
            Expr::Pow(a, b) => {
                a.fmt_min(f, 4)?;
                write!(f, "^")?;
                b.fmt_min(f, 3)
            }
            Expr::Fact(a) => {
                a.fmt_min(f, 4)?;
                write!(f, "!")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_min(f, 0)
    }
}

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * i)
}

fn small_arg(v: &BigInt, what: &str) -> Result<u64> {
    if v.is_negative() {
        return Err(Error::InvalidSpec(format!("negative {what} {v}")));
    }
    match v.to_u64() {
        Some(k) if k <= MAX_SMALL_ARG => Ok(k),
        _ => Err(Error::InvalidSpec(format!("{what} {v} too large"))),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Int(BigUint),
    Var,
    Op(char),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Int(v) => write!(f, "{v}"),
            Token::Var => write!(f, "n"),
            Token::Op(c) => write!(f, "{c}"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '0'..='9' => {
                let mut end = i + 1;
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_digit() {
                        end = j + 1;
                        chars.next();
                    } else {
                        break;
                    }
                }
                let v: BigUint = src[i..end].parse().map_err(|_| Error::parse(&src[i..end], "bad integer"))?;
                out.push(Token::Int(v));
            }
            'n' => out.push(Token::Var),
            '+' | '-' | '*' | '^' | '!' | '(' | ')' => out.push(Token::Op(c)),
            other => return Err(Error::parse(other.to_string(), "unexpected character in expression")),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.prod()?;
        loop {
            match self.peek() {
                Some(Token::Op('+')) => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.prod()?));
                }
                Some(Token::Op('-')) => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.prod()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn prod(&mut self) -> Result<Expr> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Some(Token::Op('*')) => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                Some(Token::Int(_)) | Some(Token::Var) | Some(Token::Op('(')) => {
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.power()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.postfix()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.power()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> Result<Expr> {
        let mut e = self.primary()?;
        while let Some(Token::Op('!')) = self.peek() {
            self.pos += 1;
            e = Expr::Fact(Box::new(e));
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Int(v)) => Ok(Expr::Num(v)),
            Some(Token::Var) => Ok(Expr::Var),
            Some(Token::Op('(')) => {
                let e = self.sum()?;
                match self.next() {
                    Some(Token::Op(')')) => Ok(e),
                    Some(t) => Err(Error::parse(t.to_string(), "expected `)`")),
                    None => Err(Error::parse("<end>", "expected `)`")),
                }
            }
            Some(t) => Err(Error::parse(t.to_string(), "expected integer, `n` or `(`")),
            None => Err(Error::parse("<end>", "unexpected end of expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicit_multiplication() {
        let e = Expr::parse("3n+1").unwrap();
        assert_eq!(e.eval(4).unwrap(), BigInt::from(13));
        assert_eq!(e.to_string(), "3*n+1");
    }

    #[test]
    fn factorial_and_powers() {
        let e = Expr::parse("(n+2)!*2^n").unwrap();
        assert_eq!(e.eval(3).unwrap(), BigInt::from(120 * 8));
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(0).unwrap(), BigInt::from(512));
        assert_eq!(Expr::parse("n!").unwrap().eval(5).unwrap(), BigInt::from(120));
    }

    #[test]
    fn errors_cite_token() {
        match Expr::parse("3n+x") {
            Err(Error::Parse { token, .. }) => assert_eq!(token, "x"),
            other => panic!("{other:?}"),
        }
        match Expr::parse("(n+1") {
            Err(Error::Parse { token, .. }) => assert_eq!(token, "<end>"),
            other => panic!("{other:?}"),
        }
        assert!(Expr::parse("n)").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in ["3n+1", "(n+2)!^4*2^n", "n!!", "2^(n+1)", "n-(n-1)", "(2*n)!", "7"] {
            let e = Expr::parse(src).unwrap();
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e, "{src}");
        }
    }
}
