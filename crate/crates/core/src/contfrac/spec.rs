//! Text form of continued-fraction specifications.
//!
//! ```text
//! explicit:[0;1,3,2,9]            finite prefix; a_n beyond it is an error
//! periodic:[0;1]                  purely periodic
//! periodic:[0;1,2|3,4]            preperiod 1,2 then period 3,4 forever
//! rule:factorial                  a_n = n!
//! rule:pow2                       a_n = 2^n
//! sparse:{j:"3n+1", a_j:"n!", filler:1}
//! ```
//!
//! A sparse rule prescribes `a_{j(k)} = a_j(k)` on the index set `{j(0) < j(1) < ...}`
//! (with `j(0) >= 1`) and `a_n = filler` elsewhere. `Display` emits text that parses
//! back to an equal spec.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::expr::Expr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthRule {
    Factorial,
    Pow2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseRule {
    pub index: Expr,
    pub value: Expr,
    pub filler: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlphaSpec {
    Explicit(Vec<BigUint>),
    Periodic { preperiod: Vec<BigUint>, period: Vec<BigUint> },
    Rule(GrowthRule),
    Sparse(SparseRule),
}

impl AlphaSpec {
    pub fn golden() -> Self {
        AlphaSpec::Periodic { preperiod: vec![], period: vec![BigUint::one()] }
    }

    pub fn periodic(period: &[u64]) -> Self {
        AlphaSpec::Periodic { preperiod: vec![], period: period.iter().map(|&a| BigUint::from(a)).collect() }
    }

    pub fn explicit(quotients: &[u64]) -> Self {
        AlphaSpec::Explicit(quotients.iter().map(|&a| BigUint::from(a)).collect())
    }

    pub fn sparse(index: &str, value: &str, filler: u64) -> Result<Self> {
        let spec = AlphaSpec::Sparse(SparseRule {
            index: Expr::parse(index)?,
            value: Expr::parse(value)?,
            filler: BigUint::from(filler),
        });
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let check = |v: &[BigUint], what: &str| -> Result<()> {
            if let Some(pos) = v.iter().position(|a| a.is_zero()) {
                return Err(Error::InvalidSpec(format!("{what} quotient at position {} is 0", pos + 1)));
            }
            Ok(())
        };
        match self {
            AlphaSpec::Explicit(v) => {
                if v.is_empty() {
                    return Err(Error::InvalidSpec("explicit spec needs at least one quotient".into()));
                }
                check(v, "explicit")
            }
            AlphaSpec::Periodic { preperiod, period } => {
                if period.is_empty() {
                    return Err(Error::InvalidSpec("periodic spec has an empty period".into()));
                }
                check(preperiod, "preperiod")?;
                check(period, "period")
            }
            AlphaSpec::Rule(_) => Ok(()),
            AlphaSpec::Sparse(rule) => {
                if rule.filler.is_zero() {
                    return Err(Error::InvalidSpec("sparse filler must be >= 1".into()));
                }
                Ok(())
            }
        }
    }

    /// Partial quotients are defined for every index.
    pub fn is_infinite(&self) -> bool {
        !matches!(self, AlphaSpec::Explicit(_))
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, v: &[BigUint]) -> fmt::Result {
    for (i, a) in v.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Explicit(v) => {
                write!(f, "explicit:[0;")?;
                write_list(f, v)?;
                write!(f, "]")
            }
            AlphaSpec::Periodic { preperiod, period } => {
                write!(f, "periodic:[0;")?;
                if !preperiod.is_empty() {
                    write_list(f, preperiod)?;
                    write!(f, "|")?;
                }
                write_list(f, period)?;
                write!(f, "]")
            }
            AlphaSpec::Rule(GrowthRule::Factorial) => write!(f, "rule:factorial"),
            AlphaSpec::Rule(GrowthRule::Pow2) => write!(f, "rule:pow2"),
            AlphaSpec::Sparse(r) => {
                write!(f, "sparse:{{j:\"{}\", a_j:\"{}\", filler:{}}}", r.index, r.value, r.filler)
            }
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, body) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected `<kind>:<body>`"))?;
        let spec = match kind.trim() {
            "explicit" => {
                let (pre, period) = parse_bracket(body)?;
                if period.is_some() {
                    return Err(Error::parse("|", "explicit spec cannot have a period"));
                }
                AlphaSpec::Explicit(pre)
            }
            "periodic" => {
                let (first, second) = parse_bracket(body)?;
                match second {
                    Some(period) => AlphaSpec::Periodic { preperiod: first, period },
                    None => AlphaSpec::Periodic { preperiod: vec![], period: first },
                }
            }
            "rule" => match body.trim() {
                "factorial" => AlphaSpec::Rule(GrowthRule::Factorial),
                "pow2" => AlphaSpec::Rule(GrowthRule::Pow2),
                other => return Err(Error::parse(other, "unknown rule (expected factorial or pow2)")),
            },
            "sparse" => AlphaSpec::Sparse(parse_sparse(body)?),
            other => return Err(Error::parse(other, "unknown alpha kind")),
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// `[0;a,b,c]` or `[0;a,b|c,d]`.
fn parse_bracket(body: &str) -> Result<(Vec<BigUint>, Option<Vec<BigUint>>)> {
    let body = body.trim();
    let inner = body
        .strip_prefix('[')
        .and_then(|b| b.strip_suffix(']'))
        .ok_or_else(|| Error::parse(body, "expected `[0;...]`"))?;
    let (head, tail) = inner.split_once(';').ok_or_else(|| Error::parse(inner, "expected `;` after integer part"))?;
    if head.trim() != "0" {
        return Err(Error::parse(head.trim(), "integer part must be 0 (alpha in (0,1))"));
    }
    let parse_list = |s: &str| -> Result<Vec<BigUint>> {
        s.split(',')
            .map(|t| {
                let t = t.trim();
                let v: BigUint = t.parse().map_err(|_| Error::parse(t, "expected a positive integer"))?;
                if v.is_zero() {
                    return Err(Error::parse(t, "partial quotients must be >= 1"));
                }
                Ok(v)
            })
            .collect()
    };
    match tail.split_once('|') {
        Some((pre, per)) => Ok((parse_list(pre)?, Some(parse_list(per)?))),
        None => Ok((parse_list(tail)?, None)),
    }
}

fn parse_sparse(body: &str) -> Result<SparseRule> {
    let body = body.trim();
    let inner = body
        .strip_prefix('{')
        .and_then(|b| b.strip_suffix('}'))
        .ok_or_else(|| Error::parse(body, "expected `{...}`"))?;
    let mut index = None;
    let mut value = None;
    let mut filler = BigUint::one();
    for field in split_fields(inner) {
        let (key, val) = field
            .split_once(':')
            .ok_or_else(|| Error::parse(field.trim(), "expected `key:value`"))?;
        let val = val.trim();
        let unquote = |v: &str| -> Result<String> {
            v.strip_prefix('"')
                .and_then(|v| v.strip_suffix('"'))
                .map(str::to_owned)
                .ok_or_else(|| Error::parse(v, "expected a quoted expression"))
        };
        match key.trim() {
            "j" => index = Some(Expr::parse(&unquote(val)?)?),
            "a_j" => value = Some(Expr::parse(&unquote(val)?)?),
            "filler" => {
                filler = val.parse().map_err(|_| Error::parse(val, "filler must be a positive integer"))?;
            }
            other => return Err(Error::parse(other, "unknown sparse field (expected j, a_j, filler)")),
        }
    }
    Ok(SparseRule {
        index: index.ok_or_else(|| Error::parse(inner, "missing field `j`"))?,
        value: value.ok_or_else(|| Error::parse(inner, "missing field `a_j`"))?,
        filler,
    })
}

/// Splits on commas that are not inside double quotes.
fn split_fields(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut quoted = false;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if !s[start..].trim().is_empty() {
        out.push(&s[start..]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_forms() {
        for s in [
            "periodic:[0;1]",
            "periodic:[0;2]",
            "explicit:[0;1,3,2,9]",
            "rule:factorial",
            "rule:pow2",
            "periodic:[0;1,2|3,4]",
            "sparse:{j:\"3n+1\", a_j:\"n!\", filler:1}",
        ] {
            let spec: AlphaSpec = s.parse().unwrap();
            let again: AlphaSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again, "{s}");
        }
    }

    #[test]
    fn parse_errors_cite_token() {
        let cases = [
            ("periodic:[0;1,x]", "x"),
            ("explicit:[1;2]", "1"),
            ("rule:fib", "fib"),
            ("cf:[0;1]", "cf"),
            ("periodic:[0;0]", "0"),
            ("sparse:{j:\"3n+1\", b:\"n\"}", "b"),
        ];
        for (src, tok) in cases {
            match src.parse::<AlphaSpec>() {
                Err(Error::Parse { token, .. }) => assert_eq!(token, tok, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn empty_period_rejected() {
        let spec = AlphaSpec::Periodic { preperiod: vec![BigUint::one()], period: vec![] };
        assert!(matches!(spec.validate(), Err(Error::InvalidSpec(_))));
    }
}
