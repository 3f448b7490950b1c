//! Series files. Text form:
//!
//! ```text
//! nvars=2 L=1,1 validity=12 ring=Q[e]/e^3 comps=2
//! 0,1,0: 1
//! 2,0,1: 1/2 - e
//! ```
//!
//! `comps` is optional (default 1); with more than one component each
//! exponent line carries the component index last. `validity=inf` marks a
//! polynomial.

use super::parse::{parse_coef, parse_rational};
use super::{fmt_q, Coef, Mono, Series, SeriesVec, Space, Sp, Val};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub fn ring_name(nil: u32) -> String {
    if nil == 1 {
        "Q".into()
    } else {
        format!("Q[e]/e^{nil}")
    }
}

/// `Q` or `Q[e]/e^N`, returning the nilpotency index.
pub fn parse_ring(s: &str) -> Result<u32> {
    let s = s.trim();
    if s == "Q" {
        return Ok(1);
    }
    let rest = s
        .strip_prefix("Q[e]/e^")
        .or_else(|| s.strip_prefix("Q[e]/(e^").and_then(|r| r.strip_suffix(')')))
        .ok_or_else(|| Error::Parse(format!("unknown ring '{s}'")))?;
    let n: u32 = rest.parse().map_err(|_| Error::Parse(format!("bad nilpotency index in '{s}'")))?;
    if n == 0 {
        return Err(Error::Parse("nilpotency index must be positive".into()));
    }
    Ok(n)
}

pub fn parse_weights(s: &str) -> Result<Vec<super::Q>> {
    s.split(',').map(|x| parse_rational(x.trim())).collect()
}

fn header(v: &[Series]) -> (Sp, Val) {
    let sp = v[0].sp.clone();
    (sp, super::vec_val(v))
}

fn val_str(sp: &Space, val: Val) -> String {
    match val {
        Val::Exact => "inf".into(),
        Val::Upto(t) => fmt_q(&sp.unscale(t)),
    }
}

pub fn write_text(v: &[Series]) -> String {
    let (sp, val) = header(v);
    let ws: Vec<String> = sp.weights().iter().map(fmt_q).collect();
    let mut out = format!("nvars={} L={} validity={} ring={}", sp.n, ws.join(","), val_str(&sp, val), ring_name(sp.nil));
    if v.len() > 1 {
        out.push_str(&format!(" comps={}", v.len()));
    }
    out.push('\n');
    for (k, s) in v.iter().enumerate() {
        for (m, c) in &s.terms {
            let mut e: Vec<String> = m.exp.iter().map(|x| x.to_string()).collect();
            if v.len() > 1 {
                e.push(k.to_string());
            }
            out.push_str(&format!("{}: {}\n", e.join(","), c));
        }
    }
    out
}

pub fn read_text(src: &str) -> Result<SeriesVec> {
    let mut lines = src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let head = lines.next().ok_or_else(|| Error::Parse("empty series file".into()))?;
    let mut n = None;
    let mut weights = None;
    let mut val = Val::Exact;
    let mut nil = 1;
    let mut comps = 1usize;
    let mut val_src = None;
    for kv in head.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad header field '{kv}'")))?;
        match k {
            "nvars" => n = Some(v.parse::<usize>().map_err(|_| Error::Parse("bad nvars".into()))?),
            "L" => weights = Some(parse_weights(v)?),
            "validity" => val_src = Some(v.to_string()),
            "ring" => nil = parse_ring(v)?,
            "comps" => comps = v.parse().map_err(|_| Error::Parse("bad comps".into()))?,
            _ => return Err(Error::Parse(format!("unknown header field '{k}'"))),
        }
    }
    let n = n.ok_or_else(|| Error::Parse("header lacks nvars".into()))?;
    let weights = weights.unwrap_or_else(|| vec![super::q(1); n]);
    if weights.len() != n {
        return Err(Error::Parse("L has the wrong length".into()));
    }
    if comps == 0 {
        return Err(Error::Parse("comps must be positive".into()));
    }
    let sp = Space::new(&weights, nil)?;
    if let Some(vs) = val_src {
        if vs != "inf" {
            val = Val::Upto(sp.scale_floor(&parse_rational(&vs)?));
        }
    }
    let mut out: SeriesVec = (0..comps).map(|_| Series::zero(&sp, val)).collect();
    for l in lines {
        let (e, c) = l.split_once(':').ok_or_else(|| Error::Parse(format!("bad term line '{l}'")))?;
        let e = e.trim().trim_start_matches('<').trim_end_matches('>');
        let mut idx: Vec<u32> = if e.is_empty() {
            vec![]
        } else {
            e.split(',')
                .map(|x| x.trim().trim_start_matches('<').trim_end_matches('>').parse::<u32>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse(format!("bad exponent in '{l}'")))?
        };
        let comp = if idx.len() == n + 1 {
            idx.pop().unwrap() as usize
        } else if idx.len() == n {
            0
        } else {
            return Err(Error::Parse(format!("exponent of wrong length in '{l}'")));
        };
        if comp >= comps {
            return Err(Error::Parse(format!("component {comp} out of range")));
        }
        let c = parse_coef(c.trim(), nil)?;
        let m = Mono::new(&sp, idx);
        if val.covers(m.deg) {
            out[comp].add_term(m, &c);
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: String,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct SeriesJson {
    pub nvars: usize,
    #[serde(rename = "L")]
    pub weights: Vec<String>,
    pub validity: String,
    pub ring: String,
    pub comps: Vec<Vec<TermJson>>,
}

pub fn to_json(v: &[Series]) -> SeriesJson {
    let (sp, val) = header(v);
    SeriesJson {
        nvars: sp.n,
        weights: sp.weights().iter().map(fmt_q).collect(),
        validity: val_str(&sp, val),
        ring: ring_name(sp.nil),
        comps: v
            .iter()
            .map(|s| s.terms.iter().map(|(m, c)| TermJson { exp: m.exp.clone(), coef: c.to_string() }).collect())
            .collect(),
    }
}

pub fn from_json(j: &SeriesJson) -> Result<SeriesVec> {
    let weights = j.weights.iter().map(|w| parse_rational(w)).collect::<Result<Vec<_>>>()?;
    if weights.len() != j.nvars {
        return Err(Error::Parse("L has the wrong length".into()));
    }
    let nil = parse_ring(&j.ring)?;
    let sp = Space::new(&weights, nil)?;
    let val = if j.validity == "inf" { Val::Exact } else { Val::Upto(sp.scale_floor(&parse_rational(&j.validity)?)) };
    j.comps
        .iter()
        .map(|terms| {
            let mut s = Series::zero(&sp, val);
            for t in terms {
                if t.exp.len() != j.nvars {
                    return Err(Error::Parse("exponent of wrong length".into()));
                }
                let c: Coef = parse_coef(&t.coef, nil)?;
                let m = Mono::new(&sp, t.exp.clone());
                if val.covers(m.deg) {
                    s.add_term(m, &c);
                }
            }
            Ok(s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{q, qf};
    use super::*;

    #[test]
    fn text_round_trip() {
        let sp = Space::new(&[q(1), qf(1, 2)], 3).unwrap();
        let a = Series::from_terms(&sp, [(vec![0, 1], Coef::one()), (vec![2, 1], Coef::from_parts(vec![qf(1, 2), q(-1)], 3))], Val::Upto(5));
        let b = Series::var(&sp, 0).with_val(Val::Upto(5));
        let txt = write_text(&[a.clone(), b.clone()]);
        assert_eq!(read_text(&txt).unwrap(), vec![a.clone(), b.clone()]);
        let js = serde_json::to_string(&to_json(&[a.clone(), b.clone()])).unwrap();
        let back: SeriesJson = serde_json::from_str(&js).unwrap();
        assert_eq!(from_json(&back).unwrap(), vec![a, b]);
    }

    #[test]
    fn ring_names() {
        assert_eq!(parse_ring("Q").unwrap(), 1);
        assert_eq!(parse_ring("Q[e]/e^3").unwrap(), 3);
        assert!(parse_ring("Z").is_err());
    }
}
