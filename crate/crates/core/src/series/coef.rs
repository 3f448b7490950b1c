//! Elements of Q[e]/(e^N) in normal form. N = 1 is the plain rationals.

use num_traits::{One, Signed, Zero};
use std::fmt;

pub use super::rat::Rat as Q;

pub fn q(n: i64) -> Q {
    Q::small(n, 1)
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::small(n, d)
}

/// Coefficient `sum_i parts[i] e^i` with trailing zeros removed, so that
/// zero is the empty vector and equality is structural.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Coef(Vec<Q>);

impl Coef {
    pub fn zero() -> Coef {
        Coef(Vec::new())
    }

    pub fn one() -> Coef {
        Coef(vec![Q::one()])
    }

    pub fn from_q(v: Q) -> Coef {
        let mut c = Coef(vec![v]);
        c.trim();
        c
    }

    pub fn int(n: i64) -> Coef {
        Coef::from_q(q(n))
    }

    pub fn frac(n: i64, d: i64) -> Coef {
        Coef::from_q(qf(n, d))
    }

    /// `e^k`, zero when `k >= nil`.
    pub fn eps(k: usize, nil: u32) -> Coef {
        if k >= nil as usize {
            return Coef::zero();
        }
        let mut v = vec![Q::zero(); k + 1];
        v[k] = Q::one();
        Coef(v)
    }

    pub fn from_parts(mut v: Vec<Q>, nil: u32) -> Coef {
        v.truncate(nil as usize);
        let mut c = Coef(v);
        c.trim();
        c
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|x| x.is_zero()) {
            self.0.pop();
        }
    }

    pub fn parts(&self) -> &[Q] {
        &self.0
    }

    pub fn part(&self, k: usize) -> Q {
        self.0.get(k).cloned().unwrap_or_else(Q::zero)
    }

    pub fn constant(&self) -> Q {
        self.part(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.0.len() == 1 && self.0[0].is_one()
    }

    pub fn is_unit(&self) -> bool {
        self.0.first().is_some_and(|x| !x.is_zero())
    }

    /// True when the coefficient is a plain rational (no `e` part).
    pub fn is_rational(&self) -> bool {
        self.0.len() <= 1
    }

    /// Largest `i` with the element in `(e)^i`; `nil` for zero.
    pub fn depth(&self, nil: u32) -> u32 {
        match self.0.iter().position(|x| !x.is_zero()) {
            Some(i) => i as u32,
            None => nil,
        }
    }

    pub fn neg(&self) -> Coef {
        Coef(self.0.iter().map(|x| -x).collect())
    }

    pub fn add(&self, o: &Coef) -> Coef {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn sub(&self, o: &Coef) -> Coef {
        let mut r = self.clone();
        r.sub_assign(o);
        r
    }

    pub fn add_assign(&mut self, o: &Coef) {
        if self.0.len() < o.0.len() {
            self.0.resize(o.0.len(), Q::zero());
        }
        for (a, b) in self.0.iter_mut().zip(o.0.iter()) {
            *a += b;
        }
        self.trim();
    }

    pub fn sub_assign(&mut self, o: &Coef) {
        if self.0.len() < o.0.len() {
            self.0.resize(o.0.len(), Q::zero());
        }
        for (a, b) in self.0.iter_mut().zip(o.0.iter()) {
            *a -= b;
        }
        self.trim();
    }

    pub fn mul(&self, o: &Coef, nil: u32) -> Coef {
        if self.0.is_empty() || o.0.is_empty() {
            return Coef::zero();
        }
        if self.0.len() == 1 && o.0.len() == 1 {
            return Coef::from_q(&self.0[0] * &o.0[0]);
        }
        let len = (self.0.len() + o.0.len() - 1).min(nil as usize);
        let mut v = vec![Q::zero(); len];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                v[i + j] += a * b;
            }
        }
        let mut c = Coef(v);
        c.trim();
        c
    }

    /// `self += a * b`.
    pub fn add_mul(&mut self, a: &Coef, b: &Coef, nil: u32) {
        if a.0.is_empty() || b.0.is_empty() {
            return;
        }
        if a.0.len() == 1 && b.0.len() == 1 {
            if self.0.is_empty() {
                self.0.push(&a.0[0] * &b.0[0]);
            } else {
                self.0[0] += &a.0[0] * &b.0[0];
            }
            self.trim();
            return;
        }
        let p = a.mul(b, nil);
        self.add_assign(&p);
    }

    pub fn scale(&self, s: &Q) -> Coef {
        if s.is_zero() {
            return Coef::zero();
        }
        Coef(self.0.iter().map(|x| x * s).collect())
    }

    /// Inverse of a unit: `c0 (1 + n)` inverts to `c0^-1 sum (-n)^k`.
    pub fn inv(&self, nil: u32) -> Option<Coef> {
        if !self.is_unit() {
            return None;
        }
        let c0 = self.0[0].recip();
        if self.0.len() == 1 {
            return Some(Coef(vec![c0]));
        }
        let n = Coef(self.0.iter().map(|x| x * &c0).collect()).sub(&Coef::one());
        let mn = n.neg();
        let mut term = Coef::one();
        let mut acc = Coef::one();
        for _ in 1..nil {
            term = term.mul(&mn, nil);
            if term.is_zero() {
                break;
            }
            acc.add_assign(&term);
        }
        Some(acc.scale(&c0))
    }

    pub fn pow(&self, k: u32, nil: u32) -> Coef {
        let mut r = Coef::one();
        for _ in 0..k {
            r = r.mul(self, nil);
        }
        r
    }

    /// Truncate to a ring with smaller nilpotency index.
    pub fn reduce(&self, nil: u32) -> Coef {
        Coef::from_parts(self.0.clone(), nil)
    }
}

fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        if self.0.len() == 1 {
            return write!(f, "{}", fmt_q(&self.0[0]));
        }
        let mut first = true;
        for (i, x) in self.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            let neg = x.is_negative();
            let a = x.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", fmt_q(&a))?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{}*", fmt_q(&a))?;
                    }
                    if i == 1 {
                        write!(f, "e")?;
                    } else {
                        write!(f, "e^{}", i)?;
                    }
                }
            }
        }
        Ok(())
    }
}
