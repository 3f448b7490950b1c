//! Textile maps: evaluators on vectors of series with a certified order
//! shift. An output at validity `T` only needs inputs valid to `T - kappa`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::random;
use crate::series::{
    fmt_q, substitute, vec_order, vec_refined, vec_sub, vec_val, Coef, Order, Series, SeriesVec, Sp, Val,
};

/// Contraction offset in scaled weight units; `Infinite` for maps that
/// ignore their input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Kappa {
    Fin(i64),
    Infinite,
}

impl Kappa {
    pub fn add(self, o: Kappa) -> Kappa {
        match (self, o) {
            (Kappa::Fin(a), Kappa::Fin(b)) => Kappa::Fin(a + b),
            _ => Kappa::Infinite,
        }
    }

    pub fn fin(self) -> Option<i64> {
        match self {
            Kappa::Fin(k) => Some(k),
            Kappa::Infinite => None,
        }
    }

    pub fn show(self, sp: &Sp) -> String {
        match self {
            Kappa::Fin(k) => fmt_q(&sp.unscale(k)),
            Kappa::Infinite => "inf".into(),
        }
    }
}

pub type EvalFn = Arc<dyn Fn(&[Series], Val) -> Result<SeriesVec> + Send + Sync>;

#[derive(Clone)]
pub enum Kind {
    /// Substitution into polynomials whose first `nx` variables are the base
    /// variables and whose remaining `m` variables receive the input.
    Tactile { polys: Vec<Series>, nx: usize },
    Linear,
    General,
}

#[derive(Clone)]
pub struct TextileMap {
    pub arity_in: usize,
    pub arity_out: usize,
    pub sp: Sp,
    /// Domain is `m^l C^m`, `l` scaled.
    pub domain: i64,
    pub kappa: Kappa,
    pub kind: Kind,
    pub name: String,
    /// Guaranteed order of every output, when it beats `domain + kappa`.
    pub floor: Option<i64>,
    eval: EvalFn,
}

impl fmt::Debug for TextileMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TextileMap({}: {} -> {}, l={}, kappa={})",
            self.name,
            self.arity_in,
            self.arity_out,
            fmt_q(&self.sp.unscale(self.domain)),
            self.kappa.show(&self.sp)
        )
    }
}

impl TextileMap {
    pub fn new(name: &str, sp: &Sp, arity_in: usize, arity_out: usize, domain: i64, kappa: Kappa, kind: Kind, eval: EvalFn) -> Self {
        TextileMap { arity_in, arity_out, sp: sp.clone(), domain, kappa, kind, name: name.into(), floor: None, eval }
    }

    /// Least order of an output on the domain, if bounded below.
    pub fn image_order(&self) -> Option<i64> {
        let shifted = self.kappa.fin().map(|k| self.domain + k);
        match (shifted, self.floor) {
            (None, _) => None,
            (Some(a), Some(b)) => Some(a.max(b)),
            (Some(a), None) => Some(a),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, Kind::Linear)
    }

    /// Input validity needed for output validity `t`.
    pub fn needs(&self, t: Val) -> Val {
        match (t, self.kappa) {
            (Val::Upto(t), Kappa::Fin(k)) => Val::Upto(t - k),
            (Val::Upto(_), Kappa::Infinite) => Val::Upto(i64::MIN / 4),
            (Val::Exact, _) => Val::Exact,
        }
    }

    /// Evaluate to validity `t`, enforcing the domain and validity contract.
    pub fn apply(&self, a: &[Series], t: Val) -> Result<SeriesVec> {
        let a = self.admit(a)?;
        let need = self.needs(t);
        if vec_val(&a) < need {
            return Err(Error::InsufficientValidity(format!("{} needs inputs valid to {:?}, got {:?}", self.name, need, vec_val(&a))));
        }
        let inputs: SeriesVec = match need {
            Val::Upto(n) if n >= i64::MIN / 8 => a.iter().map(|s| s.truncate(Val::Upto(n.max(self.domain - 1)))).collect(),
            _ => a,
        };
        let out = (self.eval)(&inputs, t)?;
        if out.len() != self.arity_out {
            return Err(Error::DomainMismatch(format!("{} produced {} outputs, declared {}", self.name, out.len(), self.arity_out)));
        }
        if vec_val(&out) < t {
            return Err(Error::InsufficientValidity(format!("{} reached only {:?} of requested {:?}", self.name, vec_val(&out), t)));
        }
        Ok(out.into_iter().map(|s| s.with_val(t)).collect())
    }

    /// Check arity and domain. Coefficients below the domain order are zero
    /// by assumption, so validity is raised to just below it.
    pub fn admit(&self, a: &[Series]) -> Result<SeriesVec> {
        if a.len() != self.arity_in {
            return Err(Error::DomainMismatch(format!("{} expects {} inputs, got {}", self.name, self.arity_in, a.len())));
        }
        let mut out = Vec::with_capacity(a.len());
        for (i, s) in a.iter().enumerate() {
            if let Order::Attained(w) = s.order() {
                if w < self.domain {
                    return Err(Error::DomainMismatch(format!(
                        "{}: input {} has order {} below the domain order {}",
                        self.name,
                        i,
                        fmt_q(&self.sp.unscale(w)),
                        fmt_q(&self.sp.unscale(self.domain))
                    )));
                }
            }
            let mut s = s.clone();
            if s.val < Val::Upto(self.domain - 1) {
                s.val = Val::Upto(self.domain - 1);
            }
            out.push(s);
        }
        Ok(out)
    }

    /// Evaluate without the validity contract (output validity is whatever
    /// the calculus yields).
    pub fn eval_raw(&self, a: &[Series], t: Val) -> Result<SeriesVec> {
        (self.eval)(a, t)
    }

    pub fn zeros(&self, val: Val) -> SeriesVec {
        (0..self.arity_in).map(|_| Series::zero(&self.sp, val)).collect()
    }

    /// `f(0)` to validity `t`.
    pub fn at_zero(&self, t: Val) -> Result<SeriesVec> {
        self.apply(&self.zeros(Val::Exact), t)
    }
}

/// Monomial rule: `x^g y^a` on `m^l` shifts orders by `(|a| - 1) l + L.g`.
pub fn tactile_kappa(polys: &[Series], nx: usize, sp: &Sp, l: i64) -> Kappa {
    let mut k = Kappa::Infinite;
    for g in polys {
        for m in g.terms.keys() {
            let ay: u32 = m.exp[nx..].iter().sum();
            if ay == 0 {
                continue;
            }
            let lg: i64 = m.exp[..nx].iter().zip(&sp.w).map(|(a, w)| *a as i64 * w).sum();
            let v = (ay as i64 - 1) * l + lg;
            k = k.min(Kappa::Fin(v));
        }
    }
    k
}

/// Tactile map `a -> g(x, a)` on `m^l C^m`.
pub fn tactile(polys: Vec<Series>, nx: usize, sp: &Sp, l: i64) -> TextileMap {
    let m = polys[0].n() - nx;
    let p = polys.len();
    let kappa = tactile_kappa(&polys, nx, sp, l);
    let ps = polys.clone();
    let tsp = sp.clone();
    let linear = polys.iter().all(|g| g.terms.keys().all(|mm| mm.exp[nx..].iter().sum::<u32>() == 1));
    let eval: EvalFn = Arc::new(move |a: &[Series], _t: Val| {
        let mut tsp = tsp.clone();
        for s in a {
            tsp = crate::series::unify(&tsp, &s.sp);
        }
        ps.iter().map(|g| substitute(g, nx, a, &tsp)).collect()
    });
    let mut f = TextileMap::new("tactile", sp, m, p, l, kappa, Kind::Tactile { polys, nx }, eval);
    if linear {
        f.name = "tactile-linear".into();
    }
    f
}

/// Linear map `a -> M a` for a matrix of series; kappa is the least entry order.
pub fn linear_matrix(mat: Vec<Vec<Series>>, sp: &Sp, l: i64) -> TextileMap {
    let p = mat.len();
    let m = mat.first().map_or(0, |r| r.len());
    let mut kappa = Kappa::Infinite;
    for r in &mat {
        for e in r {
            if let Some(w) = e.order().lower() {
                kappa = kappa.min(Kappa::Fin(w));
            }
        }
    }
    let msp = sp.clone();
    let eval: EvalFn = Arc::new(move |a: &[Series], _t: Val| {
        Ok(mat
            .iter()
            .map(|row| {
                let mut acc = Series::zero(&msp, Val::Exact);
                for (e, x) in row.iter().zip(a) {
                    acc = acc.add(&e.mul(x));
                }
                acc
            })
            .collect())
    });
    TextileMap::new("matrix", sp, m, p, l, kappa, Kind::Linear, eval)
}

pub fn identity(m: usize, sp: &Sp, l: i64) -> TextileMap {
    let eval: EvalFn = Arc::new(|a: &[Series], _t: Val| Ok(a.to_vec()));
    TextileMap::new("id", sp, m, m, l, Kappa::Fin(0), Kind::Linear, eval)
}

/// The zero map.
pub fn zero_map(m: usize, p: usize, sp: &Sp, l: i64) -> TextileMap {
    let s = sp.clone();
    let eval: EvalFn = Arc::new(move |a: &[Series], _t: Val| {
        let mut sp = s.clone();
        for x in a {
            sp = crate::series::unify(&sp, &x.sp);
        }
        Ok((0..p).map(|_| Series::zero(&sp, Val::Exact)).collect())
    });
    TextileMap::new("zero", sp, m, p, l, Kappa::Infinite, Kind::Linear, eval)
}

/// General evaluator with a declared offset.
pub fn general(name: &str, sp: &Sp, m: usize, p: usize, l: i64, kappa: Kappa, eval: EvalFn) -> TextileMap {
    TextileMap::new(name, sp, m, p, l, kappa, Kind::General, eval)
}

/// Declared-linear evaluator.
pub fn linear(name: &str, sp: &Sp, m: usize, p: usize, l: i64, kappa: Kappa, eval: EvalFn) -> TextileMap {
    TextileMap::new(name, sp, m, p, l, kappa, Kind::Linear, eval)
}

/// Sum of two maps with the same shape; kappa is the minimum.
pub fn sum(f: &TextileMap, g: &TextileMap) -> TextileMap {
    let (f2, g2) = (f.clone(), g.clone());
    let eval: EvalFn = Arc::new(move |a: &[Series], t: Val| {
        let x = f2.eval_raw(a, t)?;
        let y = g2.eval_raw(a, t)?;
        Ok(crate::series::vec_add(&x, &y))
    });
    let kind = if f.is_linear() && g.is_linear() { Kind::Linear } else { Kind::General };
    let mut s = TextileMap::new(&format!("({} + {})", f.name, g.name), &f.sp, f.arity_in, f.arity_out, f.domain.max(g.domain), f.kappa.min(g.kappa), kind, eval);
    if let (Some(a), Some(b)) = (f.image_order(), g.image_order()) {
        s.floor = Some(a.min(b));
    }
    s
}

/// `f - g`.
pub fn difference(f: &TextileMap, g: &TextileMap) -> TextileMap {
    let g2 = g.clone();
    let neg: EvalFn = Arc::new(move |a: &[Series], t: Val| Ok(crate::series::vec_neg(&g2.eval_raw(a, t)?)));
    let mut ng = TextileMap::new(&format!("-{}", g.name), &g.sp, g.arity_in, g.arity_out, g.domain, g.kappa, g.kind.clone(), neg);
    ng.floor = g.floor;
    let mut s = sum(f, &ng);
    s.name = format!("({} - {})", f.name, g.name);
    s
}

/// `f o g`: kappa adds; the image of `g` must land in the domain of `f`.
pub fn compose(f: &TextileMap, g: &TextileMap) -> Result<TextileMap> {
    if g.arity_out != f.arity_in {
        return Err(Error::DomainMismatch(format!("{} has {} outputs, {} takes {}", g.name, g.arity_out, f.name, f.arity_in)));
    }
    // ord g(a) >= min(w(g(0)), l_g + kappa_g)
    let shift_ok = g.image_order().map_or(true, |o| o >= f.domain);
    if !shift_ok {
        return Err(Error::DomainMismatch(format!(
            "image of {} has order >= {} but {} needs {}",
            g.name,
            fmt_q(&g.sp.unscale(g.image_order().unwrap_or(0))),
            f.name,
            fmt_q(&f.sp.unscale(f.domain))
        )));
    }
    if f.domain > 0 {
        let g0 = g.at_zero(Val::Upto(f.domain - 1))?;
        if !crate::series::vec_is_zero(&g0) {
            return Err(Error::DomainMismatch(format!("{}(0) has order below the domain of {}", g.name, f.name)));
        }
    }
    let (f2, g2) = (f.clone(), g.clone());
    let eval: EvalFn = Arc::new(move |a: &[Series], t: Val| {
        let mid = g2.apply(a, f2.needs(t))?;
        f2.apply(&mid, t)
    });
    let kind = if f.is_linear() && g.is_linear() { Kind::Linear } else { Kind::General };
    let mut c = TextileMap::new(&format!("{}.{}", f.name, g.name), &g.sp, g.arity_in, f.arity_out, g.domain, f.kappa.add(g.kappa), kind, eval);
    c.floor = f.floor;
    Ok(c)
}

/// Univariate recursion map `a -> (a_0, .., a_{d-1}, a_i - f(a_{i-1}, .., a_{i-d}))`.
/// `template` is a polynomial in `d` variables `z1 = a_{i-1}, .., zd = a_{i-d}`.
pub fn from_recursion(template: Series, d: usize, sp: &Sp) -> TextileMap {
    assert_eq!(template.n(), d, "template arity must equal the recursion depth");
    let c0 = crate::series::Space::uniform(0, sp.nil);
    let s = sp.clone();
    let lin = template.terms.keys().all(|m| m.total() == 1);
    let eval: EvalFn = Arc::new(move |a: &[Series], t: Val| {
        let a = &a[0];
        let sp = crate::series::unify(&s, &a.sp);
        let top = match t.min(a.val) {
            Val::Upto(t) => t,
            Val::Exact => a.terms.keys().map(|m| m.deg).max().unwrap_or(0) + d as i64,
        };
        let mut out = Vec::new();
        for i in 0..=top.max(-1) {
            let ai = a.at(i as u32);
            if (i as usize) < d {
                out.push(ai);
                continue;
            }
            let args: Vec<Series> = (1..=d).map(|k| Series::constant(&c0, a.at((i as usize - k) as u32))).collect();
            let fv = substitute(&template, 0, &args, &c0.with_nil(sp.nil))?.constant_term();
            out.push(ai.sub(&fv));
        }
        Ok(vec![Series::from_coeffs(&sp, &out, Val::Upto(top.min(a.val.finite().unwrap_or(top))))])
    });
    let kind = if lin { Kind::Linear } else { Kind::General };
    TextileMap::new("recursion", sp, 1, 1, 0, Kappa::Fin(0), kind, eval)
}

/// `T_a f . v`. Over the rationals the map is evaluated at `a + e v` with
/// `e^2 = 0`; over a test ring tactile maps use the symbolic Jacobian and
/// linear maps return `f(v)`.
pub fn tangent_apply(f: &TextileMap, a: &[Series], v: &[Series], t: Val) -> Result<SeriesVec> {
    let nil = crate::series::unify(&a[0].sp, &f.sp).nil.max(v[0].sp.nil);
    if nil == 1 {
        return tangent_dual(f, a, v, t);
    }
    match &f.kind {
        Kind::Tactile { polys, nx } => tangent_symbolic(polys, *nx, a, v, t, &f.sp),
        Kind::Linear => f.apply(v, t),
        Kind::General => Err(Error::Unsupported("tangent of a general map over a test ring".into())),
    }
}

/// Dual-number tangent; `RING_BUSY` when the base ring already has a nilpotent.
pub fn tangent_dual(f: &TextileMap, a: &[Series], v: &[Series], t: Val) -> Result<SeriesVec> {
    let base = crate::series::unify(&a[0].sp, &f.sp);
    if base.nil > 1 || v.iter().any(|s| s.sp.nil > 1) {
        return Err(Error::RingBusy);
    }
    let dsp = base.with_nil(2);
    let eps = Coef::eps(1, 2);
    let pt: SeriesVec = a.iter().zip(v).map(|(x, y)| x.in_space(&dsp).add(&y.in_space(&dsp).scale(&eps))).collect();
    let out = f.apply(&pt, t)?;
    Ok(out.iter().map(|s| eps_part(s, &base)).collect())
}

/// Coefficient of `e` in a dual-number series.
pub fn eps_part(s: &Series, base: &Sp) -> Series {
    let mut r = Series::zero(base, s.val);
    for (m, c) in &s.terms {
        let p = c.part(1);
        if !num_traits::Zero::is_zero(&p) {
            r.terms.insert(m.clone(), Coef::from_q(p));
        }
    }
    r
}

/// `sum_i d_{y_i} g(x, a) v_i`.
pub fn tangent_symbolic(polys: &[Series], nx: usize, a: &[Series], v: &[Series], t: Val, sp: &Sp) -> Result<SeriesVec> {
    let mut tsp = sp.clone();
    for s in a.iter().chain(v) {
        tsp = crate::series::unify(&tsp, &s.sp);
    }
    polys
        .iter()
        .map(|g| {
            let mut acc = Series::zero(&tsp, Val::Exact);
            for (i, vi) in v.iter().enumerate() {
                let d = g.derivative(nx + i);
                if d.is_zero() {
                    continue;
                }
                acc = acc.add(&substitute(&d, nx, a, &tsp)?.mul(vi));
            }
            Ok(acc.with_val(t))
        })
        .collect()
}

/// Jacobian `d_{y_j} g_i` as polynomials.
pub fn jacobian(polys: &[Series], nx: usize) -> Vec<Vec<Series>> {
    let m = polys[0].n() - nx;
    polys.iter().map(|g| (0..m).map(|j| g.derivative(nx + j)).collect()).collect()
}

/// `T_{g(a)} f . (T_a g . v) == T_a (f o g) . v`.
pub fn chain_rule_check(f: &TextileMap, g: &TextileMap, a: &[Series], v: &[Series], t: Val) -> Result<bool> {
    let fg = compose(f, g)?;
    let lhs = tangent_apply(&fg, a, v, t)?;
    let ga = g.apply(a, f.needs(t))?;
    let tg = tangent_apply(g, a, v, f.needs(t))?;
    let rhs = tangent_apply(f, &ga, &tg, t)?;
    Ok(crate::series::vec_agrees(&lhs, &rhs))
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub pass: bool,
    pub trials: usize,
    pub conclusive: usize,
    pub inconclusive: usize,
    /// Smallest measured `w(h(a)-h(b)) - w(a-b)` among conclusive trials.
    pub min_shift: Option<i64>,
    pub witness: Option<(SeriesVec, SeriesVec)>,
}

/// Sampled check of `w(h(a) - h(b)) >= w(a - b) + gamma` (or the strict
/// refined-order increase over a test ring when `refined`).
pub fn contraction_audit(h: &TextileMap, gamma: i64, trials: usize, seed: u64, t: i64, refined: bool) -> Result<AuditReport> {
    let mut rng = random::rng(seed);
    let sp = &h.sp;
    let mut rep = AuditReport { pass: true, trials, conclusive: 0, inconclusive: 0, min_shift: None, witness: None };
    let lo = h.domain.max(if h.domain == 0 { 0 } else { sp.min_w() });
    for k in 0..trials {
        use rand::Rng;
        let dens = rng.gen_range(0.2..0.9);
        let a: SeriesVec = (0..h.arity_in).map(|_| random::series(&mut rng, sp, lo, t, dens)).collect();
        // b differs from a from a random weight on, or is independent
        let b: SeriesVec = if k % 3 == 0 {
            (0..h.arity_in).map(|_| random::series(&mut rng, sp, lo, t, dens)).collect()
        } else {
            let from = rng.gen_range(lo..=t.max(lo));
            a.iter().map(|x| x.add(&random::series(&mut rng, sp, from, t, 0.5))).collect()
        };
        let din = vec_sub(&a, &b);
        let din_o = vec_order(&din);
        if !din_o.is_attained() {
            rep.inconclusive += 1;
            continue;
        }
        let ha = h.eval_raw(&h.admit(&a)?, Val::Upto(t))?;
        let hb = h.eval_raw(&h.admit(&b)?, Val::Upto(t))?;
        let dout = vec_sub(&ha, &hb);
        if refined {
            let wi = vec_refined(&din);
            let wo = vec_refined(&dout);
            if wo.gt(&wi) {
                rep.conclusive += 1;
            } else if wo.w.is_attained() {
                rep.conclusive += 1;
                rep.pass = false;
                rep.witness.get_or_insert((a, b));
            } else {
                rep.inconclusive += 1;
            }
            continue;
        }
        let wi = din_o.lower().unwrap();
        match vec_order(&dout) {
            Order::Attained(wo) => {
                rep.conclusive += 1;
                rep.min_shift = Some(rep.min_shift.map_or(wo - wi, |m: i64| m.min(wo - wi)));
                if wo < wi + gamma {
                    rep.pass = false;
                    rep.witness.get_or_insert((a, b));
                }
            }
            Order::AtLeast(wo) => {
                if wo >= wi + gamma {
                    rep.conclusive += 1;
                } else {
                    rep.inconclusive += 1;
                }
            }
            Order::Infinite => rep.conclusive += 1,
        }
    }
    Ok(rep)
}
