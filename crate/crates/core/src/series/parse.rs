//! Polynomial expressions: `y^2 - x1^3 + 1/2*x1*x2`, with `e` the nilpotent.

use super::{Coef, Series, Sp, Val};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use std::str::FromStr;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Id(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let cs: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < cs.len() {
        let c = cs[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < cs.len() && cs[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = cs[st..i].iter().collect();
            out.push(Tok::Num(BigInt::from_str(&s).map_err(|e| Error::Parse(e.to_string()))?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let st = i;
            while i < cs.len() && (cs[i].is_ascii_alphanumeric() || cs[i] == '_') {
                i += 1;
            }
            out.push(Tok::Id(cs[st..i].iter().collect()));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct P<'a> {
    toks: Vec<Tok>,
    pos: usize,
    names: &'a [String],
    sp: &'a Sp,
}

impl P<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Series> {
        let mut acc = if self.eat('-') {
            self.term()?.neg()
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Series> {
        let mut acc = self.factor()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.factor()?);
            } else if self.eat('/') {
                let d = self.factor()?;
                let c = d.constant_term();
                if d.max_total_degree() > 0 || !c.is_rational() || c.is_zero() {
                    return Err(Error::Parse("division only by nonzero rational constants".into()));
                }
                acc = acc.scale_q(&c.constant().recip());
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Series> {
        if self.eat('-') {
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if self.eat('^') {
            match self.peek().cloned() {
                Some(Tok::Num(k)) => {
                    self.pos += 1;
                    let k: u32 = k.try_into().map_err(|_| Error::Parse("exponent too large".into()))?;
                    Ok(base.pow(k))
                }
                _ => Err(Error::Parse("exponent must be a natural number".into())),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Series> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(Series::constant(self.sp, Coef::from_q(super::Q::from_integer(n))))
            }
            Some(Tok::Id(s)) => {
                self.pos += 1;
                if let Some(i) = self.names.iter().position(|x| *x == s) {
                    return Ok(Series::var(self.sp, i));
                }
                if s == "e" {
                    if self.sp.nil < 2 {
                        return Err(Error::Parse("`e` needs a ring Q[e]/e^N with N >= 2".into()));
                    }
                    return Ok(Series::constant(self.sp, Coef::eps(1, self.sp.nil)));
                }
                Err(Error::Parse(format!("unknown variable '{s}'")))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let r = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing ')'".into()));
                }
                Ok(r)
            }
            t => Err(Error::Parse(format!("unexpected token {t:?}"))),
        }
    }
}

/// Parse a polynomial over the variables `names` (in that order).
pub fn parse_poly(src: &str, names: &[String], sp: &Sp) -> Result<Series> {
    assert_eq!(names.len(), sp.n);
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    let mut p = P { toks, pos: 0, names, sp };
    let r = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::Parse(format!("trailing input at token {}", p.pos)));
    }
    Ok(r.with_val(Val::Exact))
}

/// Parse a ring element, an expression in `e` and rationals only.
pub fn parse_coef(src: &str, nil: u32) -> Result<Coef> {
    let sp = super::Space::uniform(0, nil);
    let s = parse_poly(src, &[], &sp)?;
    Ok(s.constant_term())
}

pub fn parse_rational(src: &str) -> Result<super::Q> {
    let c = parse_coef(src, 1)?;
    Ok(c.constant())
}

/// Identifiers in the expressions, without `e`, ordered so that base
/// variables come first: `x, x1.., t, s` then `y, y1.., z, z1..`.
pub fn infer_names(srcs: &[&str]) -> Result<Vec<String>> {
    let mut ids: Vec<String> = Vec::new();
    for s in srcs {
        for t in lex(s)? {
            if let Tok::Id(x) = t {
                if x != "e" && !ids.contains(&x) {
                    ids.push(x);
                }
            }
        }
    }
    ids.sort_by_key(|s| name_rank(s));
    Ok(ids)
}

fn name_rank(s: &str) -> (u32, u64, String) {
    let head: String = s.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let idx: u64 = s[head.len()..].parse().unwrap_or(0);
    let r = match head.as_str() {
        "x" => 0,
        "t" => 1,
        "s" => 2,
        "y" => 3,
        "z" => 4,
        _ => 5,
    };
    (r, idx, s.to_string())
}
