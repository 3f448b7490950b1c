//! Sparse truncated multivariate power series with exact coefficients.
//!
//! Weights are stored scaled to a common denominator so that every
//! weighted degree is an `i64`. A series carries its validity: all
//! coefficients of weight at most `val` are exact, everything above is
//! unknown and never stored.

pub mod coef;
pub mod io;
pub mod parse;
pub mod rat;

pub use coef::{q, qf, Coef, Q};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Weighted monomial space: `n` variables with weights `w[i] / den` and
/// coefficients in `Q[e]/(e^nil)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Space {
    pub n: usize,
    pub w: Vec<i64>,
    pub den: i64,
    pub nil: u32,
}

pub type Sp = Arc<Space>;

impl Space {
    pub fn new(weights: &[Q], nil: u32) -> Result<Sp> {
        if weights.iter().any(|x| !x.is_positive()) {
            return Err(Error::Parse("weights must be positive".into()));
        }
        if nil == 0 {
            return Err(Error::Parse("nilpotency index must be at least 1".into()));
        }
        let mut den = BigInt::one();
        for x in weights {
            den = den.lcm(&x.denom());
        }
        let w = weights
            .iter()
            .map(|x| (x * Q::from_integer(den.clone())).to_integer().to_i64())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Parse("weights too large".into()))?;
        Ok(Arc::new(Space {
            n: weights.len(),
            w,
            den: den.to_i64().ok_or_else(|| Error::Parse("weights too large".into()))?,
            nil,
        }))
    }

    /// All weights 1.
    pub fn uniform(n: usize, nil: u32) -> Sp {
        Arc::new(Space { n, w: vec![1; n], den: 1, nil })
    }

    pub fn with_nil(&self, nil: u32) -> Sp {
        Arc::new(Space { nil, ..self.clone() })
    }

    /// Append `m` variables of weight 1 (used for the y-part of polynomial data).
    pub fn extended(&self, m: usize) -> Sp {
        let mut w = self.w.clone();
        w.extend(std::iter::repeat(self.den).take(m));
        Arc::new(Space { n: self.n + m, w, den: self.den, nil: self.nil })
    }

    /// Space of the first `k` variables.
    pub fn prefix(&self, k: usize) -> Sp {
        Arc::new(Space { n: k, w: self.w[..k].to_vec(), den: self.den, nil: self.nil })
    }

    pub fn weight(&self, i: usize) -> Q {
        qf(self.w[i], self.den)
    }

    pub fn weights(&self) -> Vec<Q> {
        (0..self.n).map(|i| self.weight(i)).collect()
    }

    pub fn min_w(&self) -> i64 {
        self.w.iter().copied().min().unwrap_or(1)
    }

    pub fn deg(&self, e: &[u32]) -> i64 {
        e.iter().zip(&self.w).map(|(a, b)| *a as i64 * b).sum()
    }

    /// Scaled weight to rational.
    pub fn unscale(&self, s: i64) -> Q {
        qf(s, self.den)
    }

    /// Largest scaled weight not exceeding `t`.
    pub fn scale_floor(&self, t: &Q) -> i64 {
        (t * q(self.den)).floor().to_integer().to_i64().unwrap_or(i64::MAX / 4)
    }

    pub fn is_field(&self) -> bool {
        self.nil == 1
    }

    fn same_grading(&self, o: &Space) -> bool {
        self.n == o.n && self.w == o.w && self.den == o.den
    }
}

/// Join two spaces; a rational space embeds into a nilpotent one with the
/// same grading.
pub fn unify(a: &Sp, b: &Sp) -> Sp {
    if Arc::ptr_eq(a, b) || **a == **b {
        return a.clone();
    }
    assert!(a.same_grading(b), "series live in different monomial spaces");
    if a.nil >= b.nil {
        a.clone()
    } else {
        b.clone()
    }
}

/// A monomial: scaled weighted degree plus exponent. The derived order is
/// weight first, then lexicographic on the exponent.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub deg: i64,
    pub exp: Vec<u32>,
}

impl Mono {
    pub fn new(sp: &Space, exp: Vec<u32>) -> Mono {
        Mono { deg: sp.deg(&exp), exp }
    }

    pub fn one(n: usize) -> Mono {
        Mono { deg: 0, exp: vec![0; n] }
    }

    pub fn mul(&self, o: &Mono) -> Mono {
        Mono {
            deg: self.deg + o.deg,
            exp: self.exp.iter().zip(&o.exp).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn divides(&self, o: &Mono) -> bool {
        self.exp.iter().zip(&o.exp).all(|(a, b)| a <= b)
    }

    /// `o / self`, assuming divisibility.
    pub fn quo(&self, o: &Mono) -> Mono {
        Mono {
            deg: o.deg - self.deg,
            exp: o.exp.iter().zip(&self.exp).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn total(&self) -> u32 {
        self.exp.iter().sum()
    }
}

/// Validity of a series: exact up to a scaled weight, or exact everywhere
/// (a polynomial).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Val {
    Upto(i64),
    Exact,
}

impl Val {
    pub fn plus(self, k: i64) -> Val {
        match self {
            Val::Upto(t) => Val::Upto(t.saturating_add(k)),
            Val::Exact => Val::Exact,
        }
    }

    pub fn covers(self, d: i64) -> bool {
        match self {
            Val::Upto(t) => d <= t,
            Val::Exact => true,
        }
    }

    pub fn finite(self) -> Option<i64> {
        match self {
            Val::Upto(t) => Some(t),
            Val::Exact => None,
        }
    }
}

/// Order of a series: attained on the support, only bounded below (zero
/// within a finite validity), or infinite (the exact zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Attained(i64),
    AtLeast(i64),
    Infinite,
}

impl Order {
    /// Guaranteed lower bound; `None` for the exact zero.
    pub fn lower(self) -> Option<i64> {
        match self {
            Order::Attained(w) | Order::AtLeast(w) => Some(w),
            Order::Infinite => None,
        }
    }

    pub fn is_attained(self) -> bool {
        matches!(self, Order::Attained(_))
    }

    /// `self >= k` is certain.
    pub fn at_least(self, k: i64) -> bool {
        self.lower().map_or(true, |w| w >= k)
    }
}

/// `(w, pow)` compared lexicographically; `pow` is the depth in the
/// nilpotent ideal of the lowest coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefinedOrder {
    pub w: Order,
    pub pow: u32,
}

impl RefinedOrder {
    fn key(&self) -> (i64, u32) {
        (self.w.lower().unwrap_or(i64::MAX), self.pow)
    }

    /// Strictly greater, judged on lower bounds. A bound only counts as
    /// larger when its weight exceeds the attained weight.
    pub fn gt(&self, o: &RefinedOrder) -> bool {
        self.key() > o.key()
    }

    pub fn ge(&self, o: &RefinedOrder) -> bool {
        self.key() >= o.key()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub sp: Sp,
    pub terms: BTreeMap<Mono, Coef>,
    pub val: Val,
}

pub type SeriesVec = Vec<Series>;

impl Series {
    pub fn zero(sp: &Sp, val: Val) -> Series {
        Series { sp: sp.clone(), terms: BTreeMap::new(), val }
    }

    pub fn constant(sp: &Sp, c: Coef) -> Series {
        let mut s = Series::zero(sp, Val::Exact);
        if !c.is_zero() {
            s.terms.insert(Mono::one(sp.n), c);
        }
        s
    }

    pub fn one(sp: &Sp) -> Series {
        Series::constant(sp, Coef::one())
    }

    pub fn var(sp: &Sp, i: usize) -> Series {
        let mut e = vec![0; sp.n];
        e[i] = 1;
        Series::monomial(sp, e, Coef::one())
    }

    pub fn monomial(sp: &Sp, exp: Vec<u32>, c: Coef) -> Series {
        let mut s = Series::zero(sp, Val::Exact);
        if !c.is_zero() {
            s.terms.insert(Mono::new(sp, exp), c);
        }
        s
    }

    /// Build from terms, dropping zeros and anything beyond validity.
    pub fn from_terms(sp: &Sp, it: impl IntoIterator<Item = (Vec<u32>, Coef)>, val: Val) -> Series {
        let mut s = Series::zero(sp, val);
        for (e, c) in it {
            let m = Mono::new(sp, e);
            if !val.covers(m.deg) {
                continue;
            }
            let c = c.reduce(sp.nil);
            s.add_term(m, &c);
        }
        s
    }

    /// Univariate series `sum c_i t^i` (weight of `t` taken from `sp`).
    pub fn from_coeffs(sp: &Sp, cs: &[Coef], val: Val) -> Series {
        Series::from_terms(sp, cs.iter().enumerate().map(|(i, c)| (vec![i as u32], c.clone())), val)
    }

    pub fn from_rationals(sp: &Sp, cs: &[Q], val: Val) -> Series {
        let v: Vec<Coef> = cs.iter().cloned().map(Coef::from_q).collect();
        Series::from_coeffs(sp, &v, val)
    }

    pub fn add_term(&mut self, m: Mono, c: &Coef) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                o.get_mut().add_assign(c);
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn n(&self) -> usize {
        self.sp.n
    }

    pub fn nil(&self) -> u32 {
        self.sp.nil
    }

    pub fn is_exact(&self) -> bool {
        self.val == Val::Exact
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exp: &[u32]) -> Coef {
        let m = Mono::new(&self.sp, exp.to_vec());
        self.terms.get(&m).cloned().unwrap_or_default()
    }

    /// Univariate coefficient of `t^i`.
    pub fn at(&self, i: u32) -> Coef {
        self.coeff(&[i])
    }

    pub fn constant_term(&self) -> Coef {
        self.terms.get(&Mono::one(self.n())).cloned().unwrap_or_default()
    }

    pub fn with_val(mut self, val: Val) -> Series {
        self.truncate_mut(val);
        self
    }

    pub fn truncate(&self, val: Val) -> Series {
        self.clone().with_val(val)
    }

    pub fn truncate_mut(&mut self, val: Val) {
        let v = self.val.min(val);
        if let Val::Upto(t) = v {
            let drop: Vec<Mono> = self.terms.range(Mono { deg: t + 1, exp: vec![] }..).map(|(m, _)| m.clone()).collect();
            for m in drop {
                self.terms.remove(&m);
            }
        }
        self.val = v;
    }

    /// Move into a space with the same grading but another nilpotency index.
    pub fn in_space(&self, sp: &Sp) -> Series {
        assert!(self.sp.same_grading(sp), "incompatible grading");
        let mut s = Series::zero(sp, self.val);
        for (m, c) in &self.terms {
            let c = c.reduce(sp.nil);
            if !c.is_zero() {
                s.terms.insert(m.clone(), c);
            }
        }
        s
    }

    pub fn order(&self) -> Order {
        match self.terms.keys().next() {
            Some(m) => Order::Attained(m.deg),
            None => match self.val {
                Val::Upto(t) => Order::AtLeast(t + self.sp.min_w()),
                Val::Exact => Order::Infinite,
            },
        }
    }

    /// Order as an exact rational, `None` if the support is empty.
    pub fn order_q(&self) -> Option<Q> {
        self.terms.keys().next().map(|m| self.sp.unscale(m.deg))
    }

    /// Scaled lower bound on the order, saturating for the exact zero.
    pub fn ord_lb(&self) -> i64 {
        self.order().lower().unwrap_or(i64::MAX / 4)
    }

    pub fn refined_order(&self) -> RefinedOrder {
        match self.terms.iter().next() {
            Some((m, _)) => {
                let pow = self
                    .terms
                    .range(..Mono { deg: m.deg + 1, exp: vec![] })
                    .map(|(_, c)| c.depth(self.nil()))
                    .min()
                    .unwrap_or(self.nil());
                RefinedOrder { w: Order::Attained(m.deg), pow }
            }
            None => RefinedOrder { w: self.order(), pow: self.nil() },
        }
    }

    /// Initial term in the (L, lex) order.
    pub fn initial(&self) -> Option<(&Mono, &Coef)> {
        self.terms.iter().next()
    }

    pub fn neg(&self) -> Series {
        Series {
            sp: self.sp.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect(),
            val: self.val,
        }
    }

    pub fn add(&self, o: &Series) -> Series {
        let sp = unify(&self.sp, &o.sp);
        let val = self.val.min(o.val);
        let mut r = Series::zero(&sp, val);
        for (m, c) in self.terms.iter().chain(o.terms.iter()) {
            if val.covers(m.deg) {
                r.add_term(m.clone(), c);
            }
        }
        r
    }

    pub fn sub(&self, o: &Series) -> Series {
        self.add(&o.neg())
    }

    pub fn scale(&self, c: &Coef) -> Series {
        let nil = self.nil();
        let mut r = Series::zero(&self.sp, self.val);
        if c.is_zero() {
            return r;
        }
        for (m, a) in &self.terms {
            let p = a.mul(c, nil);
            if !p.is_zero() {
                r.terms.insert(m.clone(), p);
            }
        }
        r
    }

    pub fn scale_q(&self, s: &Q) -> Series {
        self.scale(&Coef::from_q(s.clone()))
    }

    /// Multiply by a monomial `x^e`.
    pub fn shift(&self, e: &[u32]) -> Series {
        let m = Mono::new(&self.sp, e.to_vec());
        Series {
            sp: self.sp.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.mul(&m), c.clone())).collect(),
            val: self.val.plus(m.deg),
        }
    }

    /// Product with validity `min(va + w(b), vb + w(a))`.
    pub fn mul(&self, o: &Series) -> Series {
        let sp = unify(&self.sp, &o.sp);
        let wa = self.order().lower();
        let wb = o.order().lower();
        let v1 = match wb {
            Some(w) => self.val.plus(w),
            None => Val::Exact,
        };
        let v2 = match wa {
            Some(w) => o.val.plus(w),
            None => Val::Exact,
        };
        let val = v1.min(v2);
        let nil = sp.nil;
        let mut acc: BTreeMap<Mono, Coef> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &o.terms {
                let d = ma.deg + mb.deg;
                if !val.covers(d) {
                    break;
                }
                let m = ma.mul(mb);
                acc.entry(m).or_default().add_mul(ca, cb, nil);
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Series { sp, terms: acc, val }
    }

    pub fn pow(&self, k: u32) -> Series {
        let mut r = Series::one(&self.sp);
        let mut b = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                r = r.mul(&b);
            }
            k >>= 1;
            if k > 0 {
                b = b.mul(&b);
            }
        }
        r
    }

    /// Partial derivative in variable `i`; validity drops by its weight.
    pub fn derivative(&self, i: usize) -> Series {
        let wi = self.sp.w[i];
        let mut r = Series::zero(&self.sp, self.val.plus(-wi));
        for (m, c) in &self.terms {
            let k = m.exp[i];
            if k == 0 {
                continue;
            }
            let mut e = m.exp.clone();
            e[i] -= 1;
            r.terms.insert(Mono { deg: m.deg - wi, exp: e }, c.scale(&q(k as i64)));
        }
        r
    }

    /// Inverse of a series with unit constant term, to its validity (or to
    /// `cap` when the input is exact).
    pub fn inverse(&self, cap: i64) -> Result<Series> {
        let c0 = self.constant_term();
        let inv0 = c0.inv(self.nil()).ok_or(Error::NonUnitPivot("constant term".into()))?;
        let val = match self.val {
            Val::Upto(t) => Val::Upto(t.min(cap)),
            Val::Exact => Val::Upto(cap),
        };
        // 1/(c0 (1 - r)) = c0^-1 sum r^k, r has positive order or is nilpotent
        let r = Series::one(&self.sp).sub(&self.scale(&inv0)).with_val(val);
        if r.is_zero() {
            return Ok(Series::constant(&self.sp, inv0).with_val(val));
        }
        let mut acc = Series::one(&self.sp).with_val(val);
        let mut term = Series::one(&self.sp).with_val(val);
        let steps = self.nil() as i64 * (cap / self.sp.min_w() + 2);
        for _ in 0..steps {
            term = term.mul(&r).with_val(val);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        Ok(acc.scale(&inv0).with_val(val))
    }

    /// Drop the nilpotent part of every coefficient.
    pub fn mod_nil(&self) -> Series {
        let sp = self.sp.with_nil(1);
        self.in_space(&sp).in_space(&self.sp)
    }

    /// `self` and `o` agree on all weights both know.
    pub fn agrees(&self, o: &Series) -> bool {
        let d = self.sub(o);
        d.is_zero()
    }

    /// Univariate coefficients `0..=k` (zero beyond the support).
    pub fn coeffs(&self, k: u32) -> Vec<Coef> {
        (0..=k).map(|i| self.at(i)).collect()
    }

    pub fn max_total_degree(&self) -> u32 {
        self.terms.keys().map(|m| m.total()).max().unwrap_or(0)
    }

    /// Substitute `x_i -> a_i` for every variable of `self`.
    pub fn compose(&self, a: &[Series]) -> Result<Series> {
        let tsp = a.first().map(|s| s.sp.clone()).ok_or_else(|| Error::Parse("empty substitution".into()))?;
        substitute(self, 0, a, &tsp)
    }

    pub fn fmt_val(&self) -> String {
        match self.val {
            Val::Exact => "inf".into(),
            Val::Upto(t) => fmt_q(&self.sp.unscale(t)),
        }
    }
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Validity shared by a vector of series.
pub fn vec_val(v: &[Series]) -> Val {
    v.iter().map(|s| s.val).min().unwrap_or(Val::Exact)
}

pub fn vec_order(v: &[Series]) -> Order {
    let mut best: Option<Order> = None;
    for s in v {
        let o = s.order();
        best = Some(match (best, o) {
            (None, o) => o,
            (Some(Order::Infinite), o) | (Some(o), Order::Infinite) => o,
            (Some(a), b) => {
                let (la, lb) = (a.lower().unwrap(), b.lower().unwrap());
                if la < lb || (la == lb && a.is_attained()) {
                    a
                } else {
                    b
                }
            }
        });
    }
    best.unwrap_or(Order::Infinite)
}

pub fn vec_refined(v: &[Series]) -> RefinedOrder {
    let mut best: Option<RefinedOrder> = None;
    for s in v {
        let r = s.refined_order();
        best = Some(match best {
            Some(b) if b.gt(&r) || (!r.gt(&b) && r.w.is_attained()) => r,
            Some(b) => b,
            None => r,
        });
    }
    best.unwrap_or(RefinedOrder { w: Order::Infinite, pow: 1 })
}

pub fn vec_add(a: &[Series], b: &[Series]) -> SeriesVec {
    a.iter().zip(b).map(|(x, y)| x.add(y)).collect()
}

pub fn vec_sub(a: &[Series], b: &[Series]) -> SeriesVec {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

pub fn vec_neg(a: &[Series]) -> SeriesVec {
    a.iter().map(|x| x.neg()).collect()
}

pub fn vec_truncate(a: &[Series], val: Val) -> SeriesVec {
    a.iter().map(|x| x.truncate(val)).collect()
}

pub fn vec_with_val(a: SeriesVec, val: Val) -> SeriesVec {
    a.into_iter().map(|x| x.with_val(val)).collect()
}

pub fn vec_is_zero(a: &[Series]) -> bool {
    a.iter().all(|s| s.is_zero())
}

pub fn vec_agrees(a: &[Series], b: &[Series]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.agrees(y))
}

/// Substitute into `g`, whose first `nx` variables are the base variables
/// (kept as they are) and whose remaining variables receive `a`.
///
/// Exact `g` may take inputs with constant terms; a truncated `g` needs
/// every input of positive order.
pub fn substitute(g: &Series, nx: usize, a: &[Series], tsp: &Sp) -> Result<Series> {
    let m = a.len();
    assert_eq!(g.n(), nx + m, "arity mismatch in substitution");
    assert!(nx <= tsp.n, "more base variables than the target space has");
    let mut tsp = tsp.clone();
    for s in a {
        tsp = unify(&tsp, &s.sp);
    }
    if g.sp.nil > tsp.nil {
        tsp = tsp.with_nil(g.sp.nil);
    }
    if !g.is_exact() && a.iter().any(|s| !s.constant_term().is_zero()) {
        return Err(Error::OrderZeroInput);
    }
    // Terms of g beyond its validity map to order >= (Tg + 1) * ratio.
    let mut val = Val::Exact;
    if let Val::Upto(tg) = g.val {
        let mut ratio: Option<Q> = None;
        let mut upd = |r: Q| {
            ratio = Some(match ratio.take() {
                Some(x) if x < r => x,
                _ => r,
            })
        };
        for i in 0..nx {
            upd(qf(tsp.w[i], tsp.den) / qf(g.sp.w[i], g.sp.den));
        }
        for (j, s) in a.iter().enumerate() {
            if let Some(o) = s.order().lower() {
                upd(qf(o, tsp.den) / qf(g.sp.w[nx + j], g.sp.den));
            }
        }
        if let Some(r) = ratio {
            let bound = qf(tg + 1, g.sp.den) * r * q(tsp.den);
            val = Val::Upto(bound.ceil().to_integer().to_i64().unwrap_or(i64::MAX / 4) - 1);
        }
    }
    // Power cache per substituted variable.
    let mut maxdeg = vec![0u32; m];
    for mono in g.terms.keys() {
        for j in 0..m {
            maxdeg[j] = maxdeg[j].max(mono.exp[nx + j]);
        }
    }
    let mut pows: Vec<Vec<Series>> = Vec::with_capacity(m);
    for j in 0..m {
        let base = a[j].in_space(&tsp);
        let mut v = vec![Series::one(&tsp)];
        for k in 1..=maxdeg[j] {
            let nx_ = v[(k - 1) as usize].mul(&base);
            v.push(nx_);
        }
        pows.push(v);
    }
    let mut acc = Series::zero(&tsp, val);
    for (mono, c) in &g.terms {
        let mut xe = mono.exp[..nx].to_vec();
        xe.resize(tsp.n, 0);
        let mut term = Series::monomial(&tsp, xe, c.reduce(tsp.nil));
        for j in 0..m {
            let k = mono.exp[nx + j];
            if k > 0 {
                term = term.mul(&pows[j][k as usize]);
            }
        }
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Substitute into every component.
pub fn substitute_vec(g: &[Series], nx: usize, a: &[Series], tsp: &Sp) -> Result<SeriesVec> {
    g.iter().map(|gi| substitute(gi, nx, a, tsp)).collect()
}

/// Coefficients of `F(x, a + z)` in powers of `z` up to total degree `max_deg`.
/// `f` lives in `nx + m` variables; the key is the `z`-exponent.
pub fn taylor_expand(f: &[Series], nx: usize, a: &[Series], tsp: &Sp, max_deg: u32) -> Result<BTreeMap<Vec<u32>, SeriesVec>> {
    let m = a.len();
    let mut out = BTreeMap::new();
    let mut stack: Vec<Vec<u32>> = vec![vec![0; m]];
    let mut seen = std::collections::BTreeSet::new();
    while let Some(nu) = stack.pop() {
        if !seen.insert(nu.clone()) {
            continue;
        }
        let tot: u32 = nu.iter().sum();
        // (1/nu!) d_nu F evaluated at a
        let mut fact = Q::one();
        for &k in &nu {
            for i in 1..=k {
                fact *= q(i as i64);
            }
        }
        let mut comps = Vec::with_capacity(f.len());
        let mut all_zero = true;
        for fi in f {
            let mut d = fi.clone();
            for (j, &k) in nu.iter().enumerate() {
                for _ in 0..k {
                    d = d.derivative(nx + j);
                }
            }
            if !d.is_zero() {
                all_zero = false;
            }
            comps.push(substitute(&d, nx, a, tsp)?.scale_q(&fact.recip()));
        }
        if all_zero && tot > 0 {
            continue;
        }
        out.insert(nu.clone(), comps);
        if tot < max_deg {
            for j in 0..m {
                let mut nn = nu.clone();
                nn[j] += 1;
                stack.push(nn);
            }
        }
    }
    Ok(out)
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = default_names(self.n());
        write!(f, "{}", self.to_expr(&names))?;
        if let Val::Upto(t) = self.val {
            write!(f, " + O({})", fmt_q(&self.sp.unscale(t + 1)))?;
        }
        Ok(())
    }
}

/// `t` for one variable, `x1..xn` otherwise.
pub fn default_names(n: usize) -> Vec<String> {
    if n == 1 {
        vec!["t".into()]
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

impl Series {
    /// Polynomial text of the stored terms, in ascending (L, lex) order.
    pub fn to_expr(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut out = String::new();
        for (k, (m, c)) in self.terms.iter().enumerate() {
            let mut mono = Vec::new();
            for (i, &e) in m.exp.iter().enumerate() {
                match e {
                    0 => {}
                    1 => mono.push(names[i].clone()),
                    _ => mono.push(format!("{}^{}", names[i], e)),
                }
            }
            let ms = mono.join("*");
            let (neg, body) = if c.is_rational() {
                let v = c.constant();
                let a = v.abs();
                let s = if ms.is_empty() {
                    fmt_q(&a)
                } else if a.is_one() {
                    ms.clone()
                } else {
                    format!("{}*{}", fmt_q(&a), ms)
                };
                (v.is_negative(), s)
            } else if ms.is_empty() {
                (false, format!("({})", c))
            } else {
                (false, format!("({})*{}", c, ms))
            };
            if k == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1() -> Sp {
        Space::uniform(1, 1)
    }

    #[test]
    fn order_of_weighted_monomial() {
        let sp = Space::new(&[q(1), q(2)], 1).unwrap();
        let s = Series::monomial(&sp, vec![1, 2], Coef::one());
        assert_eq!(s.order(), Order::Attained(5));
        let z = Series::zero(&t1(), Val::Upto(10));
        assert_eq!(z.order(), Order::AtLeast(11));
    }

    #[test]
    fn refined_order_examples() {
        let sp = Space::uniform(1, 3);
        let s = Series::from_coeffs(&sp, &[Coef::zero(), Coef::zero(), Coef::eps(2, 3), Coef::one()], Val::Exact);
        assert_eq!(s.refined_order(), RefinedOrder { w: Order::Attained(2), pow: 2 });
        let z = Series::zero(&sp, Val::Upto(8));
        assert_eq!(z.refined_order(), RefinedOrder { w: Order::AtLeast(9), pow: 3 });
        let t = Series::var(&t1(), 0);
        assert_eq!(t.refined_order(), RefinedOrder { w: Order::Attained(1), pow: 0 });
    }

    #[test]
    fn product_validity() {
        let sp = t1();
        let a = Series::from_rationals(&sp, &[q(1), q(1), q(1)], Val::Upto(2));
        let b = Series::from_rationals(&sp, &[q(1), q(-1)], Val::Exact);
        let p = a.mul(&b);
        assert_eq!(p.val, Val::Upto(2));
        assert_eq!(p.coeffs(2), vec![Coef::one(), Coef::zero(), Coef::zero()]);
        let t = Series::var(&sp, 0);
        let p2 = a.mul(&t.pow(3));
        assert_eq!(p2.val, Val::Upto(5));
    }

    #[test]
    fn substitution_of_intro_example() {
        let g = Series::from_terms(&Space::uniform(2, 1), [(vec![1, 0], Coef::one()), (vec![1, 1], Coef::one())], Val::Exact);
        let sp = t1();
        let t = Series::var(&sp, 0);
        let r = g.compose(&[t.clone(), t.pow(2)]).unwrap();
        assert_eq!(r, t.add(&t.pow(3)));
    }

    #[test]
    fn derivative_drops_validity() {
        let sp = t1();
        let s = Series::from_rationals(&sp, &[q(0), q(0), q(0), q(1)], Val::Upto(5));
        let d = s.derivative(0);
        assert_eq!(d.val, Val::Upto(4));
        assert_eq!(d.at(2), Coef::int(3));
    }

    #[test]
    fn inverse_of_unit() {
        let sp = t1();
        let s = Series::from_rationals(&sp, &[q(1), q(-1)], Val::Exact);
        let inv = s.inverse(6).unwrap();
        assert_eq!(inv.coeffs(6), vec![Coef::one(); 7]);
    }

    #[test]
    fn taylor_binomial() {
        let gsp = Space::uniform(2, 1);
        let f = Series::monomial(&gsp, vec![0, 2], Coef::one());
        let sp = t1();
        let t = Series::var(&sp, 0);
        let ex = taylor_expand(&[f], 1, &[t.clone()], &sp, 2).unwrap();
        assert_eq!(ex[&vec![0]][0], t.pow(2));
        assert_eq!(ex[&vec![1]][0], t.scale_q(&q(2)));
        assert_eq!(ex[&vec![2]][0], Series::one(&sp));
    }
}
