//! Weierstrass and standard-basis division, the scissions they induce, and
//! the Smith form over univariate series.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::series::{q, substitute, Coef, Mono, Order, Q, Series, SeriesVec, Sp, Val};
use crate::textile::{self, EvalFn, Kappa, TextileMap};

pub type Mat = Vec<Vec<Series>>;

/// Product of two series keeping only weights up to `w`; the result is
/// declared valid to `w` (the caller vouches for it).
fn mul_to(a: &Series, b: &Series, w: i64) -> Series {
    let mut a = a.truncate(Val::Upto(w));
    let mut b = b.truncate(Val::Upto(w));
    a.val = Val::Exact;
    b.val = Val::Exact;
    let mut p = a.mul(&b);
    p.truncate_mut(Val::Upto(w));
    p
}

/// Drop the nilpotent parts of all coefficients.
fn reduce(s: &Series) -> Series {
    s.mod_nil()
}

/// `rho(h)`: terms with `x_v`-degree below `b`; `tau(h)`: the rest divided by `x_v^b`.
pub fn split_var(h: &Series, v: usize, b: u32) -> (Series, Series) {
    let bw = b as i64 * h.sp.w[v];
    let mut rho = Series::zero(&h.sp, h.val);
    let mut tau = Series::zero(&h.sp, h.val.plus(-bw));
    for (m, c) in &h.terms {
        if m.exp[v] < b {
            rho.terms.insert(m.clone(), c.clone());
        } else {
            let mut e = m.exp.clone();
            e[v] -= b;
            tau.terms.insert(Mono { deg: m.deg - bw, exp: e }, c.clone());
        }
    }
    (rho, tau)
}

/// Exact division by the monomial `x^e`; `None` if some term is not divisible.
pub fn unshift(s: &Series, e: &[u32]) -> Option<Series> {
    let m = Mono::new(&s.sp, e.to_vec());
    let mut r = Series::zero(&s.sp, s.val.plus(-m.deg));
    for (k, c) in &s.terms {
        if !m.divides(k) {
            return None;
        }
        r.terms.insert(m.quo(k), c.clone());
    }
    Some(r)
}

/// Regular order of `p` in `x_v`: `b` with `w(p mod n) = b L_v` and a unit
/// coefficient at `x_v^b`.
pub fn regular_order(p: &Series, v: usize) -> Result<u32> {
    let p0 = reduce(p);
    let w = match p0.order() {
        Order::Attained(w) => w,
        _ => return Err(Error::NotRegular("divisor vanishes modulo the nilpotents within validity".into())),
    };
    let lv = p.sp.w[v];
    if w % lv != 0 {
        return Err(Error::NotRegular(format!("order is not a multiple of the weight of x{}", v + 1)));
    }
    let b = (w / lv) as u32;
    let mut e = vec![0; p.n()];
    e[v] = b;
    if !p.coeff(&e).is_unit() {
        return Err(Error::NotRegular(format!("coefficient of x{}^{} is not a unit", v + 1, b)));
    }
    Ok(b)
}

#[derive(Clone, Debug)]
pub struct WDiv {
    pub quotient: Series,
    pub remainder: Series,
    pub b: u32,
}

/// `g = quotient * p + remainder` with `deg_{x_v} remainder < b`. Exact
/// inputs are divided up to weight `cap` unless `p` is a monic polynomial
/// in `x_v`, where long division is exact.
pub fn weierstrass_divide(g: &Series, p: &Series, v: usize, cap: i64) -> Result<WDiv> {
    let b = regular_order(p, v)?;
    let sp = crate::series::unify(&g.sp, &p.sp);
    let g = g.in_space(&sp);
    let p = p.in_space(&sp);
    if g.is_exact() && p.is_exact() && monic_in(&p, v, b) {
        let (quotient, remainder) = long_divide(&g, &p, v, b);
        return Ok(WDiv { quotient, remainder, b });
    }
    let nil = sp.nil as i64;
    let bw = b as i64 * sp.w[v];
    let (rho_p, tau_p) = split_var(&p, v, b);
    // weight lost per nilpotent step
    let wn = rho_p.terms.keys().map(|m| m.deg).min().unwrap_or(bw);
    let loss = (bw - wn).max(0);
    let gv = match g.val {
        Val::Upto(t) => t.min(cap),
        Val::Exact => cap,
    };
    let pv = match p.val {
        // an error in p beyond its validity moves the quotient by ord(g) - 2b L_v
        Val::Upto(t) => t - 2 * bw + g.ord_lb().min(gv),
        Val::Exact => i64::MAX / 4,
    };
    let work = (gv - bw).min(pv);
    let qval = work - (nil - 1) * loss;
    let u = tau_p.inverse(work.max(0))?;
    let r = mul_to(&rho_p, &u, work + bw);
    let (_, tau_g) = split_var(&g.truncate(Val::Upto(gv)), v, b);
    let mut term = tau_g.truncate(Val::Upto(work));
    term.val = Val::Upto(work);
    let mut acc = term.clone();
    let wmin_other = (0..sp.n).filter(|&i| i != v).map(|i| sp.w[i]).min().unwrap_or(1);
    let bound = (nil + 1) * (work.max(0) / wmin_other + 2) + 2;
    let mut steps = 0;
    while !term.is_zero() {
        let (_, t) = split_var(&mul_to(&term, &r, work + bw), v, b);
        term = t.neg().truncate(Val::Upto(work));
        term.val = Val::Upto(work);
        acc = acc.add(&term);
        steps += 1;
        if steps > bound {
            return Err(Error::BudgetExceeded(steps as usize));
        }
    }
    let mut quotient = mul_to(&acc, &u, work).truncate(Val::Upto(qval));
    quotient.val = Val::Upto(qval);
    let rem_full = g.sub(&quotient.mul(&p));
    let (mut remainder, _) = split_var(&rem_full, v, b);
    if sp.n == 1 && remainder.val >= Val::Upto((b as i64 - 1) * sp.w[0]) {
        remainder.val = Val::Exact;
    }
    Ok(WDiv { quotient, remainder, b })
}

fn monic_in(p: &Series, v: usize, b: u32) -> bool {
    let top = p.terms.keys().map(|m| m.exp[v]).max().unwrap_or(0);
    if top != b {
        return false;
    }
    let lead: Vec<(&Mono, &Coef)> = p.terms.iter().filter(|(m, _)| m.exp[v] == b).collect();
    lead.len() == 1 && lead[0].0.total() == b && lead[0].1.is_one()
}

/// Long division by a polynomial monic of degree `b` in `x_v`.
fn long_divide(g: &Series, p: &Series, v: usize, b: u32) -> (Series, Series) {
    let sp = g.sp.clone();
    let mut r = g.clone();
    let mut quo = Series::zero(&sp, Val::Exact);
    loop {
        let top = r.terms.iter().filter(|(m, _)| m.exp[v] >= b).max_by_key(|(m, _)| (m.exp[v], (*m).clone())).map(|(m, c)| (m.clone(), c.clone()));
        let Some((m, c)) = top else { break };
        let mut e = m.exp.clone();
        e[v] -= b;
        let t = Series::monomial(&sp, e, c);
        quo = quo.add(&t);
        r = r.sub(&t.mul(p));
    }
    (quo, r)
}

/// A linear change `x_i -> x_i + c_i x_v`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearChange {
    pub var: usize,
    pub c: Vec<Q>,
}

impl LinearChange {
    pub fn identity(n: usize, var: usize) -> Self {
        LinearChange { var, c: vec![Q::zero(); n] }
    }

    pub fn is_identity(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn inverse(&self) -> Self {
        LinearChange { var: self.var, c: self.c.iter().map(|x| -x).collect() }
    }

    /// Matrix `M` with `phi(x)_i = sum_j M_ij x_j`.
    pub fn matrix(&self) -> Vec<Vec<Q>> {
        let n = self.c.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Q::one() } else if j == self.var { self.c[i].clone() } else { Q::zero() })
                    .collect()
            })
            .collect()
    }

    pub fn apply(&self, s: &Series) -> Result<Series> {
        if self.is_identity() {
            return Ok(s.clone());
        }
        let sp = s.sp.clone();
        let xs: Vec<Series> = (0..sp.n).map(|i| Series::var(&sp, i).add(&Series::var(&sp, self.var).scale_q(&self.c[i]))).collect();
        substitute(s, 0, &xs, &sp)
    }
}

/// Coefficient of `x_v^b` in `in(h o phi)`, evaluated on the initial form.
fn pure_coeff(init: &Series, v: usize, b: u32, ch: &LinearChange) -> Result<bool> {
    let s = ch.apply(init)?;
    let mut e = vec![0; init.n()];
    e[v] = b;
    Ok(s.coeff(&e).is_unit())
}

/// A linear change making `h` regular in the last variable of its order.
/// Only variables of the same weight as `x_n` are mixed in.
pub fn generic_linear_change(h: &Series) -> Result<LinearChange> {
    let n = h.n();
    let v = n - 1;
    let h0 = reduce(h);
    let w = match h0.order() {
        Order::Attained(w) => w,
        _ => return Err(Error::ZeroSeries),
    };
    let lv = h.sp.w[v];
    if w % lv != 0 {
        return Err(Error::NotRegular(format!("order {} is not a multiple of the weight of x{}", w, n)));
    }
    let b = (w / lv) as u32;
    let mut init = h0.clone();
    init.terms.retain(|m, _| m.deg == w);
    init.val = Val::Exact;
    let id = LinearChange::identity(n, v);
    if pure_coeff(&init, v, b, &id)? {
        return Ok(id);
    }
    let mix: Vec<usize> = (0..v).filter(|&i| h.sp.w[i] == lv).collect();
    let d = b as i64;
    // x_i -> x_i + c x_n over subsets ordered by size then lex
    let mut subsets: Vec<Vec<usize>> = Vec::new();
    for mask in 1u64..(1 << mix.len()) {
        subsets.push((0..mix.len()).filter(|k| mask >> k & 1 == 1).map(|k| mix[k]).collect());
    }
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
    for c in 1..=d + 1 {
        for s in &subsets {
            let mut ch = LinearChange::identity(n, v);
            for &i in s {
                ch.c[i] = q(c);
            }
            if pure_coeff(&init, v, b, &ch)? {
                return Ok(ch);
            }
        }
    }
    // fallback: grid {0..d}^k, which cannot lie in the zero set of a nonzero
    // form of degree d
    let k = mix.len();
    let side = (d + 1) as u64;
    let total = side.checked_pow(k as u32).unwrap_or(u64::MAX);
    for idx in 0..total.min(1 << 20) {
        let mut ch = LinearChange::identity(n, v);
        let mut r = idx;
        for &i in &mix {
            ch.c[i] = q((r % side) as i64);
            r /= side;
        }
        if pure_coeff(&init, v, b, &ch)? {
            return Ok(ch);
        }
    }
    Err(Error::NotRegular("no linear change among variables of equal weight makes the series regular".into()))
}

// ---------------------------------------------------------------------------
// Standard-basis division

/// Module exponent `(alpha, j)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ModMono {
    pub mono: Mono,
    pub comp: usize,
}

impl ModMono {
    pub fn divides(&self, o: &ModMono) -> bool {
        self.comp == o.comp && self.mono.divides(&o.mono)
    }
}

/// Smallest `(deg, lex, comp)` term whose coefficient is a unit.
pub fn initial_term(f: &[Series]) -> Option<(ModMono, Coef)> {
    let mut best: Option<(ModMono, Coef)> = None;
    for (j, s) in f.iter().enumerate() {
        for (m, c) in &s.terms {
            if !c.is_unit() {
                continue;
            }
            let mm = ModMono { mono: m.clone(), comp: j };
            if best.as_ref().map_or(true, |(b, _)| mm < *b) {
                best = Some((mm, c.clone()));
            }
            break;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct DivisionContext {
    pub sp: Sp,
    pub p: usize,
    pub basis: Vec<SeriesVec>,
    pub leading: Vec<ModMono>,
    pub max_order: i64,
    /// Largest weight drop from nilpotent terms below a leading term.
    pub loss: i64,
    /// Some basis element has a second term of the same weight as its
    /// leading term; termination then rests on the lex tiebreak.
    pub perturbed: bool,
}

#[derive(Clone, Debug)]
pub struct GhDiv {
    pub quotients: SeriesVec,
    pub remainder: SeriesVec,
    pub steps: usize,
}

impl DivisionContext {
    /// Normalizes every basis element to leading coefficient 1.
    pub fn new(basis: Vec<SeriesVec>) -> Result<Self> {
        let sp = basis.first().and_then(|f| f.first()).map(|s| s.sp.clone()).ok_or_else(|| Error::Parse("empty basis".into()))?;
        let p = basis[0].len();
        let mut nb = Vec::new();
        let mut leading = Vec::new();
        let mut max_order = 0;
        let mut loss = 0;
        let mut perturbed = false;
        for (i, f) in basis.into_iter().enumerate() {
            if f.len() != p {
                return Err(Error::DomainMismatch("basis elements of different lengths".into()));
            }
            let (lm, lc) = initial_term(&f).ok_or_else(|| Error::NotMonic(format!("basis element {} has no unit coefficient", i + 1)))?;
            let inv = lc.inv(sp.nil).unwrap();
            let f: SeriesVec = f.iter().map(|s| s.scale(&inv)).collect();
            max_order = max_order.max(lm.mono.deg);
            for (j, s) in f.iter().enumerate() {
                for (m, _) in &s.terms {
                    let mm = ModMono { mono: m.clone(), comp: j };
                    if mm == lm {
                        continue;
                    }
                    if m.deg < lm.mono.deg {
                        loss = loss.max(lm.mono.deg - m.deg);
                    } else if m.deg == lm.mono.deg {
                        perturbed = true;
                    }
                }
            }
            leading.push(lm);
            nb.push(f);
        }
        Ok(DivisionContext { sp, p, basis: nb, leading, max_order, loss, perturbed })
    }

    /// Partition rule: smallest `i` whose leading term divides the exponent.
    pub fn owner(&self, e: &ModMono) -> Option<usize> {
        self.leading.iter().position(|l| l.divides(e))
    }

    /// `(g, h) = Phi_1^{-1}(r)`.
    fn phi1_inv(&self, r: &[Series], work: i64) -> Result<(SeriesVec, SeriesVec)> {
        let sp = &self.sp;
        let mut g: SeriesVec = (0..self.basis.len()).map(|i| Series::zero(sp, Val::Upto(work - self.leading[i].mono.deg))).collect();
        let mut h: SeriesVec = (0..self.p).map(|_| Series::zero(sp, Val::Upto(work))).collect();
        for (j, s) in r.iter().enumerate() {
            for (m, c) in &s.terms {
                let e = ModMono { mono: m.clone(), comp: j };
                match self.owner(&e) {
                    Some(i) => {
                        if !self.leading[i].divides(&e) {
                            return Err(Error::PartitionViolation(format!("{:?}", e.mono.exp)));
                        }
                        g[i].add_term(self.leading[i].mono.quo(m), c);
                    }
                    None => h[j].add_term(m.clone(), c),
                }
            }
        }
        Ok((g, h))
    }

    /// `f = sum g_i f_i + h` up to `t` (lowered if the input is less valid).
    pub fn divide(&self, f: &[Series], t: i64) -> Result<GhDiv> {
        let nil = self.sp.nil as i64;
        let fv = crate::series::vec_val(f).finite().unwrap_or(i64::MAX / 4);
        let t = t.min(fv - (nil - 1) * self.loss);
        let work = t + (nil - 1) * self.loss;
        let mut r: SeriesVec = f.iter().map(|s| {
            let mut x = s.truncate(Val::Upto(work));
            x.val = Val::Upto(work);
            x
        }).collect();
        let mut gs: SeriesVec = self.leading.iter().map(|l| Series::zero(&self.sp, Val::Upto(work - l.mono.deg))).collect();
        let mut hs: SeriesVec = (0..self.p).map(|_| Series::zero(&self.sp, Val::Upto(work))).collect();
        let nmon = crate::random::monomials(&self.sp, 0, work.max(0)).len() * self.p + 2;
        let bound = nmon * self.sp.nil as usize + 2;
        let mut steps = 0;
        while !crate::series::vec_is_zero(&r) {
            let (g, h) = self.phi1_inv(&r, work)?;
            for i in 0..gs.len() {
                gs[i] = gs[i].add(&g[i]);
            }
            for j in 0..self.p {
                hs[j] = hs[j].add(&h[j]);
            }
            // r <- -Phi_2(g)
            let mut nr: SeriesVec = (0..self.p).map(|_| Series::zero(&self.sp, Val::Upto(work))).collect();
            for (i, gi) in g.iter().enumerate() {
                if gi.is_zero() {
                    continue;
                }
                for j in 0..self.p {
                    let mut tail = self.basis[i][j].clone();
                    if self.leading[i].comp == j {
                        tail.terms.remove(&self.leading[i].mono);
                    }
                    if tail.is_zero() {
                        continue;
                    }
                    nr[j] = nr[j].sub(&mul_to(gi, &tail, work));
                }
            }
            r = nr.into_iter().map(|mut x| {
                x.truncate_mut(Val::Upto(work));
                x.val = Val::Upto(work);
                x
            }).collect();
            steps += 1;
            if steps > bound {
                return Err(Error::BudgetExceeded(steps));
            }
        }
        let quotients = gs.into_iter().zip(&self.leading).map(|(g, l)| {
            let v = Val::Upto(t - l.mono.deg);
            let mut g = g.truncate(v);
            g.val = v;
            g
        }).collect();
        let remainder = hs.into_iter().map(|h| {
            let mut h = h.truncate(Val::Upto(t));
            h.val = Val::Upto(t);
            h
        }).collect();
        Ok(GhDiv { quotients, remainder, steps })
    }

    /// `l(g) = sum g_i f_i`.
    pub fn combine(&self, g: &[Series]) -> SeriesVec {
        let mut out: SeriesVec = (0..self.p).map(|_| Series::zero(&self.sp, Val::Exact)).collect();
        for (gi, f) in g.iter().zip(&self.basis) {
            for j in 0..self.p {
                out[j] = out[j].add(&gi.mul(&f[j]));
            }
        }
        out
    }

    /// `l` as a textile map `C^m -> C^p`.
    pub fn ell(&self) -> TextileMap {
        let ctx = self.clone();
        let min_ord = self.basis.iter().flat_map(|f| f.iter().map(|s| s.ord_lb())).min().unwrap_or(0);
        let eval: EvalFn = Arc::new(move |a: &[Series], _t: Val| Ok(ctx.combine(a)));
        textile::linear("basis", &self.sp, self.basis.len(), self.p, 0, Kappa::Fin(min_ord), eval)
    }
}

pub fn gh_divide(f: &[Series], ctx: &DivisionContext, t: i64) -> Result<GhDiv> {
    ctx.divide(f, t)
}

/// `sigma = D o pi`: quotients of the division, `kappa = -max w(f_i)`.
pub fn gh_scission(ctx: &DivisionContext) -> TextileMap {
    let c = ctx.clone();
    let nil = ctx.sp.nil as i64;
    let kappa = -(ctx.max_order + (nil - 1) * ctx.loss);
    let eval: EvalFn = Arc::new(move |a: &[Series], t: Val| {
        let t = match t {
            Val::Upto(t) => t,
            Val::Exact => return Err(Error::InsufficientValidity("scission needs a finite validity".into())),
        };
        let tin = crate::series::vec_val(a).finite().unwrap_or(t + c.max_order + (nil - 1) * c.loss);
        Ok(c.divide(a, tin)?.quotients)
    });
    textile::linear("gh-scission", &ctx.sp, ctx.p, ctx.basis.len(), 0, Kappa::Fin(kappa), eval)
}

// ---------------------------------------------------------------------------
// Determinants and the adjugate scission

/// Determinant by expansion over column subsets.
pub fn det(a: &Mat) -> Series {
    let n = a.len();
    let sp = a[0][0].sp.clone();
    if n == 0 {
        return Series::one(&sp);
    }
    // dp over the set of used columns after placing rows 0..k
    let mut dp: BTreeMap<u64, Series> = BTreeMap::new();
    dp.insert(0, Series::one(&sp));
    for row in a.iter() {
        let mut nd: BTreeMap<u64, Series> = BTreeMap::new();
        for (mask, val) in &dp {
            for (j, e) in row.iter().enumerate() {
                if mask >> j & 1 == 1 || e.is_zero() && e.is_exact() {
                    continue;
                }
                // sign: number of used columns greater than j
                let above = (mask >> (j + 1)).count_ones();
                let mut term = val.mul(e);
                if above % 2 == 1 {
                    term = term.neg();
                }
                let nm = mask | (1 << j);
                let ent = nd.entry(nm).or_insert_with(|| Series::zero(&sp, Val::Exact));
                *ent = ent.add(&term);
            }
        }
        dp = nd;
    }
    let full = (1u64 << a[0].len()) - 1;
    dp.remove(&full).unwrap_or_else(|| Series::zero(&sp, Val::Exact))
}

pub fn submatrix(a: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    rows.iter().map(|&i| cols.iter().map(|&j| a[i][j].clone()).collect()).collect()
}

pub fn adjugate(a: &Mat) -> Mat {
    let n = a.len();
    let sp = a[0][0].sp.clone();
    if n == 1 {
        return vec![vec![Series::one(&sp)]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let rows: Vec<usize> = (0..n).filter(|&r| r != j).collect();
                    let cols: Vec<usize> = (0..n).filter(|&c| c != i).collect();
                    let d = det(&submatrix(a, &rows, &cols));
                    if (i + j) % 2 == 1 {
                        d.neg()
                    } else {
                        d
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Mat, v: &[Series]) -> SeriesVec {
    a.iter()
        .map(|row| {
            let mut acc = Series::zero(&v[0].sp, Val::Exact);
            for (e, x) in row.iter().zip(v) {
                acc = acc.add(&e.mul(x));
            }
            acc
        })
        .collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let k = b.len();
    let m = b[0].len();
    a.iter()
        .map(|row| {
            (0..m)
                .map(|j| {
                    let mut acc = Series::zero(&row[0].sp, Val::Exact);
                    for l in 0..k {
                        acc = acc.add(&row[l].mul(&b[l][j]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn identity_mat(n: usize, sp: &Sp) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { Series::one(sp) } else { Series::zero(sp, Val::Exact) }).collect()).collect()
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return vec![];
    }
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

#[derive(Clone, Debug)]
pub struct AdjugateScission {
    pub det: Series,
    pub adj: Mat,
    pub change: LinearChange,
    pub kappa: i64,
    pub map: TextileMap,
}

/// `sigma(z)` = Weierstrass quotients of `adj(A) z` by `det A`, after a
/// linear change making `det A` regular.
pub fn adjugate_scission(a: &Mat) -> Result<AdjugateScission> {
    let sp = a[0][0].sp.clone();
    let d = det(a);
    let d0 = reduce(&d);
    let wd = match d0.order() {
        Order::Attained(w) => w,
        _ => return Err(Error::SingularWithinValidity),
    };
    let adj = adjugate(a);
    let kadj = adj.iter().flat_map(|r| r.iter().filter(|s| !s.is_zero() || !s.is_exact()).map(|s| s.ord_lb())).min().unwrap_or(0);
    let change = generic_linear_change(&d)?;
    let v = sp.n - 1;
    let dphi = change.apply(&d)?;
    let b = regular_order(&dphi, v)?;
    let bw = b as i64 * sp.w[v];
    let (rho, _) = split_var(&dphi, v, b);
    let wn = rho.ord_lb().min(bw);
    let nil = sp.nil as i64;
    let loss = (nil - 1) * (bw - wn).max(0);
    let kappa = kadj - wd - loss;
    let (adj2, ch2, dphi2) = (adj.clone(), change.clone(), dphi.clone());
    let inv = change.inverse();
    let eval: EvalFn = Arc::new(move |z: &[Series], t: Val| {
        let t = t.finite().ok_or_else(|| Error::InsufficientValidity("scission needs a finite validity".into()))?;
        let az = mat_vec(&adj2, z);
        az.iter()
            .map(|s| {
                let s = ch2.apply(s)?;
                let cap = s.val.finite().unwrap_or(t + bw + loss);
                let w = weierstrass_divide(&s, &dphi2, v, cap)?;
                inv.apply(&w.quotient)
            })
            .collect()
    });
    let n = a.len();
    let map = textile::linear("adjugate-scission", &sp, n, n, 0, Kappa::Fin(kappa), eval);
    Ok(AdjugateScission { det: d, adj, change, kappa, map })
}

// ---------------------------------------------------------------------------
// Smith form over k[[t]]

#[derive(Clone, Debug)]
pub struct SmithResult {
    pub p: Mat,
    pub q: Mat,
    pub eps: Vec<u32>,
    pub units: Vec<Series>,
    pub rank: usize,
    /// `P A Q`.
    pub diag: Mat,
}

fn ord_unit(s: &Series) -> Option<(i64, bool)> {
    s.initial().map(|(m, c)| (m.deg, c.is_unit()))
}

/// Pivot on the entry of least order (row-major ties), scale to a unit
/// with constant term 1, clear its row and column by exact division.
pub fn smith_form(a: &Mat, rank_target: usize) -> Result<SmithResult> {
    let nr = a.len();
    let nc = a[0].len();
    let sp = a[0][0].sp.clone();
    assert_eq!(sp.n, 1, "Smith form is over univariate series");
    let mut m = a.clone();
    let mut p = identity_mat(nr, &sp);
    let mut qm = identity_mat(nc, &sp);
    let mut eps = Vec::new();
    let mut units = Vec::new();
    for k in 0..rank_target {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..nr {
            for j in k..nc {
                if let Some((o, _)) = ord_unit(&m[i][j]) {
                    if best.map_or(true, |(bo, _, _)| o < bo) {
                        best = Some((o, i, j));
                    }
                }
            }
        }
        let (o, pi, pj) = best.ok_or(Error::RankDeficientWithinValidity)?;
        m.swap(k, pi);
        p.swap(k, pi);
        for row in m.iter_mut() {
            row.swap(k, pj);
        }
        for row in qm.iter_mut() {
            row.swap(k, pj);
        }
        let (lead_deg, unit) = ord_unit(&m[k][k]).unwrap();
        if !unit {
            return Err(Error::NonUnitPivot(format!("({}, {})", k, k)));
        }
        let c0 = m[k][k].initial().unwrap().1.inv(sp.nil).unwrap();
        for j in 0..nc {
            m[k][j] = m[k][j].scale(&c0);
        }
        for j in 0..nr {
            p[k][j] = p[k][j].scale(&c0);
        }
        let e = (lead_deg / sp.w[0]) as u32;
        let piv_unit = unshift(&m[k][k], &[e]).ok_or_else(|| Error::NonUnitPivot("pivot below its order".into()))?;
        let cap = piv_unit.val.finite().unwrap_or(i64::MAX / 8).min(4096);
        let piv_inv = piv_unit.inverse(cap)?;
        // rows below
        for i in k + 1..nr {
            if m[i][k].is_zero() {
                continue;
            }
            let f = unshift(&m[i][k], &[e]).ok_or_else(|| Error::NonUnitPivot("entry below pivot order".into()))?.mul(&piv_inv);
            for j in 0..nc {
                let d = f.mul(&m[k][j]);
                m[i][j] = m[i][j].sub(&d);
            }
            for j in 0..nr {
                let d = f.mul(&p[k][j]);
                p[i][j] = p[i][j].sub(&d);
            }
        }
        // columns right
        for j in k + 1..nc {
            if m[k][j].is_zero() {
                continue;
            }
            let f = unshift(&m[k][j], &[e]).ok_or_else(|| Error::NonUnitPivot("entry right of pivot order".into()))?.mul(&piv_inv);
            for i in 0..nr {
                let d = m[i][k].mul(&f);
                m[i][j] = m[i][j].sub(&d);
            }
            for i in 0..nc {
                let d = qm[i][k].mul(&f);
                qm[i][j] = qm[i][j].sub(&d);
            }
        }
        let _ = o;
        eps.push(e);
        units.push(piv_unit);
    }
    Ok(SmithResult { p, q: qm, eps, units, rank: rank_target, diag: m })
}

/// Least order among all `k x k` minors (the order of their gcd).
pub fn minors_min_order(a: &Mat, k: usize) -> Option<i64> {
    let nr = a.len();
    let nc = a[0].len();
    let rows = subsets(nr, k);
    let cols = subsets(nc, k);
    let mut best: Option<i64> = None;
    for r in &rows {
        for c in &cols {
            let d = det(&submatrix(a, r, c));
            if let Order::Attained(o) = d.order() {
                best = Some(best.map_or(o, |b: i64| b.min(o)));
            }
        }
    }
    best
}

pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}
