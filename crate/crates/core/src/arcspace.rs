//! Arcs on affine varieties: stratifying jets by the least order of a
//! partial derivative, lifting jets to arcs through the linearization, and
//! the trivializing map `phi` over a stratum.

use std::sync::Arc;

use crate::division::{self, Mat};
use crate::error::{Error, Result};
use crate::linearize::{self, Bundle, BundleOptions, Evidence};
use crate::series::{parse::parse_rational, substitute, vec_sub, Order, Series, SeriesVec, Space, Sp, Val};
use crate::textile::{self, EvalFn, Kappa, TextileMap};

#[derive(Clone, Debug)]
pub struct Jet {
    pub values: SeriesVec,
    pub level: i64,
}

impl Jet {
    pub fn new(values: SeriesVec, level: i64) -> Jet {
        Jet { values, level }
    }

    pub fn from_rationals(rows: &[Vec<crate::series::Q>], level: i64) -> Jet {
        let sp = arc_space();
        Jet { values: rows.iter().map(|r| Series::from_rationals(&sp, r, Val::Exact)).collect(), level }
    }

    /// `(a_0, ..., a_e)` of an arc.
    pub fn truncation(arc: &[Series], level: i64) -> Jet {
        let values = arc
            .iter()
            .map(|s| {
                let mut r = s.truncate(Val::Upto(level));
                r.val = Val::Exact;
                r
            })
            .collect();
        Jet { values, level }
    }
}

pub fn arc_space() -> Sp {
    Space::uniform(1, 1)
}

/// Jet or arc file: an optional `level=<e>` line, then one line per
/// component with coefficients of `t^0, t^1, ...`, optionally prefixed by
/// `name:`. Blank lines and `#` comments are skipped.
pub fn parse_jet_file(src: &str) -> Result<(Option<i64>, Vec<Vec<crate::series::Q>>)> {
    let mut level = None;
    let mut rows = Vec::new();
    for line in src.lines() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(v) = line.strip_prefix("level=") {
            level = Some(v.trim().parse::<i64>().map_err(|e| Error::Parse(format!("level: {e}")))?);
            continue;
        }
        let body = match line.split_once(':') {
            Some((_, b)) => b,
            None => line,
        };
        let row = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("no components".into()));
    }
    Ok((level, rows))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StratumTag {
    pub i: usize,
    pub e_prime: i64,
    pub ord_f: Order,
    /// Order of each partial at the jet, `AtLeast(e + 1)` when the jet does
    /// not determine it.
    pub partial_orders: Vec<Order>,
}

fn partials_at(f: &Series, jet: &Jet) -> Result<SeriesVec> {
    let sp = arc_space();
    (0..f.n()).map(|j| substitute(&f.derivative(j), 0, &jet.values, &sp)).collect()
}

pub fn classify_jet(f: &Series, jet: &Jet) -> Result<StratumTag> {
    if jet.values.len() != f.n() {
        return Err(Error::DomainMismatch(format!("jet has {} components, polynomial has {} variables", jet.values.len(), f.n())));
    }
    let e = jet.level;
    let parts = partials_at(f, jet)?;
    let partial_orders: Vec<Order> = parts
        .iter()
        .map(|p| match p.order() {
            Order::Attained(o) if o <= e => Order::Attained(o),
            _ => Order::AtLeast(e + 1),
        })
        .collect();
    let mut best: Option<(i64, usize)> = None;
    for (j, o) in partial_orders.iter().enumerate() {
        if let Order::Attained(o) = *o {
            if best.map_or(true, |(b, _)| o < b) {
                best = Some((o, j));
            }
        }
    }
    let (e_prime, i) = best.ok_or_else(|| Error::Indeterminate(format!("every partial vanishes to order {e} on the jet")))?;
    let fa = substitute(f, 0, &jet.values, &arc_space())?;
    Ok(StratumTag { i, e_prime, ord_f: fa.order(), partial_orders })
}

/// Polynomials of `eta -> f(a + eta) - f(a)` with the arc parameter `t` as
/// the single base variable.
fn shifted_polys(fs: &[Series], jet: &Jet) -> Result<Vec<Series>> {
    linearize::shift_polys(fs, 0, &jet.values, &arc_space())
}

/// Division by `t^e' U` keeping the quotient, placed in component `i`.
pub fn pivot_scission(c: &Series, i: usize, m: usize) -> Result<TextileMap> {
    let sp = arc_space();
    let ep = match c.order() {
        Order::Attained(o) => o,
        _ => return Err(Error::SingularWithinValidity),
    };
    let unit = division::unshift(c, &[ep as u32]).ok_or(Error::SingularWithinValidity)?;
    let s2 = sp.clone();
    let eval: EvalFn = Arc::new(move |b: &[Series], t: Val| {
        let cap = t.finite().unwrap_or(0).max(0);
        let hi: Series = {
            let mut h = b[0].clone();
            h.terms.retain(|mm, _| mm.deg >= ep);
            h
        };
        let qv = division::unshift(&hi, &[ep as u32]).unwrap();
        let qv = qv.mul(&unit.inverse(cap)?).truncate(t);
        let mut out: SeriesVec = (0..m).map(|_| Series::zero(&s2, t)).collect();
        out[i] = qv;
        Ok(out)
    });
    Ok(textile::linear("sigma", &sp, 1, m, 0, Kappa::Fin(-ep), eval))
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub f: Series,
    pub jet: Jet,
    pub tag: StratumTag,
    pub partials: SeriesVec,
    pub f_at_jet: Series,
    pub bundle: Bundle,
}

/// Linearization of `eta -> f(a + eta) - f(a)` on `m^(e+1)` for the stratum
/// of `jet`, with `pivot` overriding the minimizing partial (it must attain
/// the same least order).
pub fn chart(f: &Series, jet: &Jet, pivot: Option<usize>, probe_validity: i64) -> Result<Chart> {
    let mut tag = classify_jet(f, jet)?;
    if let Some(p) = pivot {
        if tag.partial_orders.get(p) != Some(&Order::Attained(tag.e_prime)) {
            return Err(Error::PreconditionGap(format!("partial {p} does not attain the least order {}", tag.e_prime)));
        }
        tag.i = p;
    }
    let e = jet.level;
    let n = f.n();
    let sp = arc_space();
    let polys = shifted_polys(std::slice::from_ref(f), jet)?;
    let (ell, h, _) = linearize::split_tactile(&polys, 1, &sp, e + 1)?;
    let partials = partials_at(f, jet)?;
    let sigma = pivot_scission(&partials[tag.i], tag.i, n)?;
    // h has order >= 2(e+1) and the image of l is m^(e+e'+1), so im h lies in im l
    let opts = BundleOptions { probe_validity, ..Default::default() };
    let bundle = linearize::build_bundle(&ell, &h, &sigma, Evidence::QuasiSubmersion, &opts)?;
    let f_at_jet = substitute(f, 0, &jet.values, &sp)?;
    Ok(Chart { f: f.clone(), jet: jet.clone(), tag, partials, f_at_jet, bundle })
}

#[derive(Clone, Debug)]
pub struct Lift {
    pub arc: SeriesVec,
    pub tag: Option<StratumTag>,
    pub eps: Vec<u32>,
    /// `f(arc)` to the requested validity; zero for a genuine lift.
    pub residual: SeriesVec,
}

fn finish(fs: &[Series], jet: &Jet, eta: &[Series], n: i64) -> Result<(SeriesVec, SeriesVec)> {
    let sp = arc_space();
    let arc: SeriesVec = jet.values.iter().zip(eta).map(|(a, x)| a.add(x).truncate(Val::Upto(n))).collect();
    let residual = fs.iter().map(|f| substitute(f, 0, &arc, &sp).map(|s| s.truncate(Val::Upto(n)))).collect::<Result<SeriesVec>>()?;
    Ok((arc, residual))
}

pub fn lift_jet_hypersurface(f: &Series, jet: &Jet, n: i64) -> Result<Lift> {
    let tag = classify_jet(f, jet)?;
    let e = jet.level;
    let need = e + tag.e_prime + 1;
    if !tag.ord_f.at_least(need) {
        return Err(Error::Obstructed(format!(
            "f has order {} on the jet, below e + e' + 1 = {need}",
            tag.ord_f.lower().unwrap_or(0)
        )));
    }
    let ch = chart(f, jet, None, 8)?;
    let eta = chart_solve(&ch, n)?;
    let (arc, residual) = finish(std::slice::from_ref(f), jet, &eta, n)?;
    Ok(Lift { arc, tag: Some(tag), eps: vec![], residual })
}

fn chart_solve(ch: &Chart, n: i64) -> Result<SeriesVec> {
    let kf = ch.bundle.f.kappa.fin().unwrap_or(0);
    let b = vec![ch.f_at_jet.neg()];
    let sol = linearize::solve_via_linearization(&ch.bundle, &b, n + kf)?;
    if let Some((_, o)) = sol.obstruction {
        return Err(Error::Obstructed(format!("-f(jet) leaves the image of the tangent map at order {}", o.lower().unwrap_or(0))));
    }
    Ok(sol.particular)
}

/// `phi(a) = (a_bar, psi u(a - a_bar))` with `psi` deleting the pivot
/// component; `a_bar` is the truncation of `arc` at `level`.
pub fn trivialize(f: &Series, arc: &[Series], level: i64, n: i64) -> Result<(Chart, SeriesVec)> {
    let jet = Jet::truncation(arc, level);
    let ch = chart(f, &jet, None, 8)?;
    let z = fiber_coords(&ch, arc, n)?;
    Ok((ch, z))
}

pub fn fiber_coords(ch: &Chart, arc: &[Series], n: i64) -> Result<SeriesVec> {
    let tail = vec_sub(arc, &ch.jet.values);
    let tail: SeriesVec = tail.iter().map(|s| s.truncate(Val::Upto(n))).collect();
    let y = ch.bundle.u.apply(&tail, Val::Upto(n))?;
    Ok(y.into_iter().enumerate().filter(|(j, _)| *j != ch.tag.i).map(|(_, s)| s).collect())
}

/// Inverse of `phi`: the solution `y` of `l(y) = -f(a_bar)` with
/// `psi(y) = z`, then `a_bar + u^-1(y)`.
pub fn trivialize_inv(ch: &Chart, z: &[Series], n: i64) -> Result<SeriesVec> {
    let i = ch.tag.i;
    let nv = ch.f.n();
    if z.len() + 1 != nv {
        return Err(Error::DomainMismatch(format!("fiber has {} coordinates, expected {}", z.len(), nv - 1)));
    }
    let sp = arc_space();
    let ep = ch.tag.e_prime;
    let kf = ch.bundle.f.kappa.fin().unwrap_or(0);
    let work = n + kf;
    let mut y: SeriesVec = Vec::with_capacity(nv);
    let mut rhs = ch.f_at_jet.neg().truncate(Val::Upto(work + ep));
    let mut zi = z.iter();
    for j in 0..nv {
        if j == i {
            y.push(Series::zero(&sp, Val::Exact));
        } else {
            let zj = zi.next().unwrap().clone();
            rhs = rhs.sub(&ch.partials[j].mul(&zj));
            y.push(zj);
        }
    }
    let rhs = rhs.truncate(Val::Upto(rhs.val.finite().unwrap_or(work + ep)));
    if rhs.order().lower().map_or(false, |o| o < ep) {
        return Err(Error::Obstructed("fiber point is not over the jet".into()));
    }
    let unit = division::unshift(&ch.partials[i], &[ep as u32]).ok_or(Error::SingularWithinValidity)?;
    let cap = rhs.val.finite().unwrap_or(work + ep) - ep;
    let yi = division::unshift(&rhs, &[ep as u32]).ok_or_else(|| Error::Obstructed("non-exact division".into()))?;
    y[i] = yi.mul(&unit.inverse(cap)?).truncate(Val::Upto(cap));
    let val = y.iter().map(|s| s.val).min().unwrap_or(Val::Exact);
    let y: SeriesVec = y.into_iter().map(|s| s.truncate(val)).collect();
    let eta = ch.bundle.u_inv.apply(&y, Val::Upto(n.min(val.finite().unwrap_or(n))))?;
    Ok(ch.jet.values.iter().zip(&eta).map(|(a, x)| a.add(x).truncate(Val::Upto(n))).collect())
}

/// `T = phi_a phi_b^-1` on sampled fiber points. `affine` records exact
/// additivity `T(z1 + z2) - T(z1) - T(z2) + T(0) = 0`; `linear` also needs
/// `T(0) = 0` and `T(c z) = c T(z)` for sampled rationals `c`.
#[derive(Clone, Debug)]
pub struct TransitionReport {
    pub samples: usize,
    pub affine: bool,
    pub linear: bool,
    /// Least order at which additivity fails.
    pub defect_order: Option<i64>,
    pub translation: SeriesVec,
}

pub fn transition_check(f: &Series, jet: &Jet, a: usize, b: usize, samples: usize, seed: u64, n: i64) -> Result<TransitionReport> {
    let ca = chart(f, jet, Some(a), 6)?;
    let cb = chart(f, jet, Some(b), 6)?;
    let sp = arc_space();
    let mut rng = crate::random::rng(seed);
    let t = |z: &[Series]| -> Result<SeriesVec> {
        let arc = trivialize_inv(&cb, z, n)?;
        fiber_coords(&ca, &arc, n)
    };
    let m = f.n() - 1;
    let zero: SeriesVec = (0..m).map(|_| Series::zero(&sp, Val::Upto(n))).collect();
    let t0 = t(&zero)?;
    let mut rep = TransitionReport { samples, affine: true, linear: !matches!(crate::series::vec_order(&t0), Order::Attained(_)), defect_order: None, translation: t0.clone() };
    for _ in 0..samples {
        let z1: SeriesVec = (0..m).map(|_| crate::random::series(&mut rng, &sp, jet.level + 1, n, 0.5)).collect();
        let z2: SeriesVec = (0..m).map(|_| crate::random::series(&mut rng, &sp, jet.level + 1, n, 0.5)).collect();
        let z12: SeriesVec = z1.iter().zip(&z2).map(|(x, y)| x.add(y)).collect();
        let t1 = t(&z1)?;
        let d: SeriesVec = t(&z12)?
            .iter()
            .zip(&t1)
            .zip(t(&z2)?)
            .zip(&t0)
            .map(|(((s, a1), a2), a0)| s.sub(a1).sub(&a2).add(a0))
            .collect();
        if let Order::Attained(o) = crate::series::vec_order(&d) {
            rep.affine = false;
            rep.linear = false;
            rep.defect_order = Some(rep.defect_order.map_or(o, |p: i64| p.min(o)));
        }
        let c = crate::random::small_q(&mut rng, 5, 3);
        let zc: SeriesVec = z1.iter().map(|x| x.scale_q(&c)).collect();
        let hd: SeriesVec = t(&zc)?.iter().zip(&t1).map(|(x, y)| x.sub(&y.scale_q(&c))).collect();
        if matches!(crate::series::vec_order(&hd), Order::Attained(_)) {
            rep.linear = false;
        }
    }
    Ok(rep)
}

fn jacobian_at(fs: &[Series], jet: &Jet, cut: i64) -> Result<Mat> {
    let sp = arc_space();
    fs.iter()
        .map(|f| (0..f.n()).map(|j| Ok(substitute(&f.derivative(j), 0, &jet.values, &sp)?.truncate(Val::Upto(cut)))).collect())
        .collect()
}

/// Scission of `z -> J z` from `P J Q = diag(t^eps_k U_k)`:
/// `b -> Q (P b)_k / (t^eps_k U_k)` on the first `r` components.
fn smith_scission(s: &division::SmithResult, m: usize) -> TextileMap {
    let sp = arc_space();
    let p_rows = s.p.len();
    let emax = s.eps.iter().copied().max().unwrap_or(0) as i64;
    let s2 = s.clone();
    let sp2 = sp.clone();
    let eval: EvalFn = Arc::new(move |b: &[Series], t: Val| {
        let cap = t.finite().unwrap_or(0).max(0) + emax;
        let pb = division::mat_vec(&s2.p, b);
        let mut qv: SeriesVec = (0..m).map(|_| Series::zero(&sp2, Val::Exact)).collect();
        for k in 0..s2.rank {
            let e = s2.eps[k];
            let mut hi = pb[k].clone();
            hi.terms.retain(|mm, _| mm.deg >= e as i64);
            let x = division::unshift(&hi, &[e]).unwrap();
            qv[k] = x.mul(&s2.units[k].inverse(cap)?);
        }
        Ok(division::mat_vec(&s2.q, &qv).into_iter().map(|x| x.truncate(t)).collect())
    });
    textile::linear("smith-sigma", &sp, p_rows, m, 0, Kappa::Fin(-emax), eval)
}

/// Lift for `f_1 = ... = f_N = 0` through the Smith form of the Jacobian at
/// the jet. The rank used is the largest `k` with a `k`-minor of order at
/// most the jet level.
pub fn lift_jet_general(fs: &[Series], jet: &Jet, n: i64) -> Result<Lift> {
    let e = jet.level;
    let nv = jet.values.len();
    if fs.iter().any(|f| f.n() != nv) {
        return Err(Error::DomainMismatch("polynomials and jet disagree on the number of variables".into()));
    }
    let cut = n + 2 * e + 4;
    let jac = jacobian_at(fs, jet, cut)?;
    let kmax = fs.len().min(nv);
    let rank = (1..=kmax).rev().find(|&k| division::minors_min_order(&jac, k).map_or(false, |o| o <= e)).ok_or(Error::RankDeficientWithinValidity)?;
    let smith = division::smith_form(&jac, rank)?;
    let sp = arc_space();
    let fa: SeriesVec = fs.iter().map(|f| substitute(f, 0, &jet.values, &sp)).collect::<Result<_>>()?;
    let pf = division::mat_vec(&smith.p, &fa);
    for k in 0..rank {
        let need = e + smith.eps[k] as i64 + 1;
        if !pf[k].order().at_least(need) {
            return Err(Error::Obstructed(format!("component {k} of P f(jet) has order below {need}")));
        }
    }
    let polys = shifted_polys(fs, jet)?;
    let (ell, h, _) = linearize::split_tactile(&polys, 1, &sp, e + 1)?;
    let sigma = smith_scission(&smith, nv);
    let (evidence, tactile) = if rank == fs.len() { (Evidence::QuasiSubmersion, None) } else { (Evidence::SampledPointwise, Some((polys.clone(), 1))) };
    let opts = BundleOptions { probe_validity: 8, tactile, ..Default::default() };
    let bd = linearize::build_bundle(&ell, &h, &sigma, evidence, &opts)?;
    let kf = bd.f.kappa.fin().unwrap_or(0);
    let b: SeriesVec = fa.iter().map(|s| s.neg()).collect();
    let sol = linearize::solve_via_linearization(&bd, &b, n + kf)?;
    if let Some((_, o)) = sol.obstruction {
        return Err(Error::Obstructed(format!("-f(jet) leaves the image of the tangent map at order {}", o.lower().unwrap_or(0))));
    }
    let (arc, residual) = finish(fs, jet, &sol.particular, n)?;
    Ok(Lift { arc, tag: None, eps: smith.eps, residual })
}

pub fn show_arc(arc: &[Series]) -> String {
    let names = vec!["t".to_string()];
    arc.iter().map(|s| s.to_expr(&names)).collect::<Vec<_>>().join("\n")
}
