//! Canonical text and JSON forms of [`DiffPoly`].
//!
//! Text: terms in canonical order, factors joined by `*`, powers as `^`,
//! e.g. `-Da1 + a1^2` or `w3 + a1*w2 - 1/2*u1^2*u2`. The printer is the
//! identity on byte level for equal polynomials, so its output is used for
//! golden files.
//!
//! JSON: `[{"coeff": "p/q", "vars": [["a1", 2], ...]}, ...]`, same term order.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{DiffAlgError, DiffPoly, Exponents, JetVar};

fn write_poly(
    p: &DiffPoly,
    f: &mut impl fmt::Write,
    name: impl Fn(&JetVar) -> String,
) -> fmt::Result {
    if p.is_zero() {
        return f.write_str("0");
    }
    for (i, (exps, coeff)) in p.raw_terms().enumerate() {
        let negative = coeff.is_negative();
        match (i, negative) {
            (0, true) => f.write_str("-")?,
            (0, false) => {}
            (_, true) => f.write_str(" - ")?,
            (_, false) => f.write_str(" + ")?,
        }
        let magnitude = coeff.abs();
        let mut first = true;
        if exps.is_one() || !magnitude.is_one() {
            write!(f, "{}", magnitude)?;
            first = false;
        }
        for &(v, e) in exps.iter() {
            if !first {
                f.write_char('*')?;
            }
            first = false;
            f.write_str(&name(&v))?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
    }
    Ok(())
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_poly(self, f, JetVar::to_string)
    }
}

impl DiffPoly {
    /// Canonical text with `T`, `DT`, ... standing for `w2` and its jets.
    pub fn to_aliased_string(&self) -> String {
        let mut s = String::new();
        write_poly(self, &mut s, JetVar::alias_name).expect("writing to String");
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Int(BigInt),
    Name(String),
}

fn tokenize(s: &str) -> Result<Vec<Token>, DiffAlgError> {
    let err = |msg: String| DiffAlgError::Parse(msg);
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        match ch {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '/' => {
                out.push(Token::Slash);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            c if c.is_ascii_digit() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                out.push(Token::Int(digits.parse().map_err(|_| err(digits.clone()))?));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push(Token::Name(chars[start..i].iter().collect()));
            }
            other => return Err(err(format!("unexpected character {other:?}"))),
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

    fn expr(&mut self) -> Result<DiffPoly, DiffAlgError> {
        let mut acc = DiffPoly::zero();
        let mut sign = match self.peek() {
            Some(Token::Minus) => {
                self.pos += 1;
                -1
            }
            Some(Token::Plus) => {
                self.pos += 1;
                1
            }
            _ => 1,
        };
        loop {
            let t = self.term()?;
            if sign < 0 {
                acc -= &t;
            } else {
                acc += &t;
            }
            sign = match self.next() {
                None => return Ok(acc),
                Some(Token::Plus) => 1,
                Some(Token::Minus) => -1,
                Some(t) => return Err(DiffAlgError::Parse(format!("unexpected {t:?}"))),
            };
        }
    }

    fn term(&mut self) -> Result<DiffPoly, DiffAlgError> {
        let mut coeff = BigRational::one();
        let mut pairs = Vec::new();
        loop {
            match self.next() {
                Some(Token::Int(n)) => {
                    let mut q = BigRational::from_integer(n);
                    if self.peek() == Some(&Token::Slash) {
                        self.pos += 1;
                        match self.next() {
                            Some(Token::Int(d)) if !d.is_zero() => {
                                q /= BigRational::from_integer(d)
                            }
                            _ => return Err(DiffAlgError::Parse("bad denominator".into())),
                        }
                    }
                    coeff *= q;
                }
                Some(Token::Name(name)) => {
                    let v: JetVar = name.parse()?;
                    let mut e = 1u32;
                    if self.peek() == Some(&Token::Caret) {
                        self.pos += 1;
                        match self.next() {
                            Some(Token::Int(k)) => {
                                e = u32::try_from(k)
                                    .map_err(|_| DiffAlgError::Parse("exponent too large".into()))?
                            }
                            _ => return Err(DiffAlgError::Parse("bad exponent".into())),
                        }
                    }
                    pairs.push((v, e));
                }
                other => {
                    return Err(DiffAlgError::Parse(format!("expected factor, found {other:?}")))
                }
            }
            if self.peek() == Some(&Token::Star) {
                self.pos += 1;
            } else {
                return Ok(DiffPoly::term(coeff, Exponents::from_pairs(pairs)));
            }
        }
    }
}

impl FromStr for DiffPoly {
    type Err = DiffAlgError;

    /// Accepts the canonical text form (and any reordering of it).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let tokens = tokenize(s)?;
        if tokens.is_empty() {
            return Err(DiffAlgError::Parse("empty input".into()));
        }
        Parser { tokens, pos: 0 }.expr()
    }
}

/// One entry of the JSON form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JsonTerm {
    pub coeff: String,
    pub vars: Vec<(String, u32)>,
}

impl From<&DiffPoly> for Vec<JsonTerm> {
    fn from(p: &DiffPoly) -> Self {
        p.raw_terms()
            .map(|(e, c)| JsonTerm {
                coeff: format!("{}/{}", c.numer(), c.denom()),
                vars: e.iter().map(|(v, k)| (v.to_string(), *k)).collect(),
            })
            .collect()
    }
}

impl TryFrom<Vec<JsonTerm>> for DiffPoly {
    type Error = DiffAlgError;

    fn try_from(terms: Vec<JsonTerm>) -> Result<Self, Self::Error> {
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let coeff = parse_rational(&t.coeff)?;
            let mut pairs = Vec::with_capacity(t.vars.len());
            for (name, e) in t.vars {
                pairs.push((name.parse::<JetVar>()?, e));
            }
            out.push((coeff, Exponents::from_pairs(pairs)));
        }
        Ok(DiffPoly::from_terms(out))
    }
}

fn parse_rational(s: &str) -> Result<BigRational, DiffAlgError> {
    let bad = || DiffAlgError::Parse(format!("bad coefficient {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

impl Serialize for DiffPoly {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        Vec::<JsonTerm>::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DiffPoly {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let terms = Vec::<JsonTerm>::deserialize(deserializer)?;
        DiffPoly::try_from(terms).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> DiffPoly {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_strings() {
        let miura2 = DiffPoly::var(JetVar::a(1)).pow(2) - DiffPoly::var(JetVar::a_jet(1, 1));
        assert_eq!(miura2.to_string(), "-Da1 + a1^2");
        assert_eq!(DiffPoly::zero().to_string(), "0");
        assert_eq!(DiffPoly::int(-5).to_string(), "-5");
        assert_eq!(p("a1*2*Da1").to_string(), "2*a1*Da1");
        assert_eq!(p("u2^2 - w2 + 1/2*u1").to_string(), "-w2 + 1/2*u1 + u2^2");
        assert_eq!(p("T - u1^2").to_aliased_string(), "T - u1^2");
        assert_eq!(p("DT").to_string(), "Dw2");
    }

    #[test]
    fn parse_accepts_noncanonical_input() {
        assert_eq!(p("a1 + a1"), p("2*a1"));
        assert_eq!(p("a1^2 - a1*a1"), DiffPoly::zero());
        assert_eq!(p(" - D2a1 +2 * a1 * Da1"), p("2*a1*Da1 - D2a1"));
        assert!("a1 +".parse::<DiffPoly>().is_err());
        assert!("1/0".parse::<DiffPoly>().is_err());
        assert!("x1".parse::<DiffPoly>().is_err());
        assert!("".parse::<DiffPoly>().is_err());
    }

    #[test]
    fn json_form() {
        let q = p("-Da1 + a1^2");
        let json = serde_json::to_string(&q).unwrap();
        assert_eq!(
            json,
            r#"[{"coeff":"-1/1","vars":[["Da1",1]]},{"coeff":"1/1","vars":[["a1",2]]}]"#
        );
        let back: DiffPoly = serde_json::from_str(&json).unwrap();
        assert_eq!(back, q);
        let half: DiffPoly = serde_json::from_str(r#"[{"coeff":"2/4","vars":[]}]"#).unwrap();
        assert_eq!(half.to_string(), "1/2");
    }
}
