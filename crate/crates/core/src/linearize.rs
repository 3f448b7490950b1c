//! Fixed-point inversion of `id + h`, the linearizing automorphisms `u`, `v`
//! with `v f u^-1 = l`, solving through them, and the pointwise rank probe.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::division::{self, DivisionContext, Mat};
use crate::error::{Error, Result};
use crate::random;
use crate::series::{vec_agrees, vec_is_zero, vec_order, vec_sub, vec_val, taylor_expand, Coef, Mono, Order, Series, SeriesVec, Sp, Val};
use crate::textile::{self, contraction_audit, EvalFn, Kappa, TextileMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Field,
    TestRing,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evidence {
    QuasiSubmersion,
    InjectiveTangent,
    SampledPointwise,
}

impl Evidence {
    pub fn name(self) -> &'static str {
        match self {
            Evidence::QuasiSubmersion => "quasi_submersion",
            Evidence::InjectiveTangent => "injective_tangent",
            Evidence::SampledPointwise => "sampled_pointwise",
        }
    }
}

/// Scaled weights `<= n` that monomials of the space actually take.
fn weight_count(sp: &Sp, lo: i64, n: i64) -> usize {
    random::monomials(sp, lo.max(0), n).iter().map(|e| sp.deg(e)).collect::<BTreeSet<_>>().len()
}

/// Solves `(id + h)(g) = b` to validity `n` by `g <- b - h(g)`.
///
/// Over a field the number of steps is fixed in advance by `kappa(h)` and
/// each iterate is carried only to the weight it is known to be correct.
/// Over a test ring the iteration runs until two iterates agree, which a
/// refined-order contraction guarantees within a bounded number of steps.
pub fn invert_id_plus_h(h: &TextileMap, b: &[Series], n: i64, mode: Mode) -> Result<SeriesVec> {
    let l = h.domain;
    match (mode, h.kappa) {
        (_, Kappa::Infinite) => Ok(b.iter().map(|s| s.truncate(Val::Upto(n))).collect()),
        (Mode::Field, Kappa::Fin(gamma)) => {
            if gamma <= 0 {
                return Err(Error::NotContractive(format!("{} has offset {}", h.name, h.kappa.show(&h.sp))));
            }
            let steps = (n - l + 1).max(0).div_euclid(gamma) + i64::from((n - l + 1).max(0) % gamma != 0) + 1;
            let mut t = (l + gamma - 1).min(n);
            let mut g: SeriesVec = b.iter().map(|s| s.truncate(Val::Upto(t))).collect();
            for _ in 0..steps {
                let nt = (t + gamma).min(n);
                let hv = h.apply(&g, Val::Upto(nt))?;
                g = b.iter().zip(&hv).map(|(x, y)| x.truncate(Val::Upto(nt)).sub(y)).collect();
                t = nt;
            }
            Ok(g)
        }
        (Mode::TestRing, Kappa::Fin(k)) => {
            if k < 0 {
                return Err(Error::NotContractive(format!("{} lowers orders by {}", h.name, -k)));
            }
            let budget = weight_count(&h.sp, l, n) * h.sp.nil as usize + 2;
            let mut g: SeriesVec = b.iter().map(|s| s.truncate(Val::Upto(n))).collect();
            for _ in 0..budget {
                let hv = h.apply(&g, Val::Upto(n))?;
                let next: SeriesVec = b.iter().zip(&hv).map(|(x, y)| x.truncate(Val::Upto(n)).sub(y)).collect();
                if vec_agrees(&next, &g) {
                    return Ok(next);
                }
                g = next;
            }
            Err(Error::BudgetExceeded(budget))
        }
    }
}

/// `id + h` inverse as a map with offset 0.
pub fn inverse_map(h: &TextileMap, mode: Mode) -> TextileMap {
    let h2 = h.clone();
    let eval: EvalFn = Arc::new(move |a: &[Series], t: Val| {
        let n = t.finite().ok_or_else(|| Error::InsufficientValidity("inverse needs a finite validity".into()))?;
        invert_id_plus_h(&h2, a, n, mode)
    });
    textile::general(&format!("(id + {})^-1", h.name), &h.sp, h.arity_in, h.arity_in, h.domain, Kappa::Fin(0), eval)
}

/// Linear part and higher part of a tactile map, both on `m^l`.
pub fn split_tactile(polys: &[Series], nx: usize, sp: &Sp, l: i64) -> Result<(TextileMap, TextileMap, Mat)> {
    let m = polys[0].n() - nx;
    let mut mat: Mat = Vec::new();
    let mut higher = Vec::new();
    for g in polys {
        let mut row: Vec<Series> = (0..m).map(|_| Series::zero(sp, Val::Exact)).collect();
        let mut hg = Series::zero(&g.sp, g.val);
        for (mono, c) in &g.terms {
            let ay: u32 = mono.exp[nx..].iter().sum();
            match ay {
                0 => {
                    if !c.is_zero() {
                        return Err(Error::DomainMismatch("the map does not vanish at 0".into()));
                    }
                }
                1 => {
                    let j = mono.exp[nx..].iter().position(|&x| x == 1).unwrap();
                    let mut xe = mono.exp[..nx].to_vec();
                    xe.resize(sp.n, 0);
                    row[j].add_term(Mono::new(sp, xe), c);
                }
                _ => {
                    hg.terms.insert(mono.clone(), c.clone());
                }
            }
        }
        if !g.is_exact() {
            for r in row.iter_mut() {
                r.val = Val::Upto(g.val.finite().unwrap());
            }
        }
        mat.push(row);
        higher.push(hg);
    }
    let mut ell = textile::linear_matrix(mat.clone(), sp, l);
    ell.name = "l".into();
    let mut h = textile::tactile(higher, nx, sp, l);
    h.name = "h".into();
    Ok((ell, h, mat))
}

/// Polynomials of `z -> F(x, a + z) - F(x, a)` in the space `(x, z)`, where
/// `F` has `nx` base variables and `a` lives in `sp`.
pub fn shift_polys(fs: &[Series], nx: usize, a: &[Series], sp: &Sp) -> Result<Vec<Series>> {
    let m = a.len();
    let psp = sp.extended(m);
    let max_deg = fs.iter().map(|f| f.max_total_degree()).max().unwrap_or(0);
    let tay = taylor_expand(fs, nx, a, sp, max_deg)?;
    let mut out: Vec<Series> = fs.iter().map(|_| Series::zero(&psp, Val::Exact)).collect();
    for (alpha, comps) in &tay {
        if alpha.iter().all(|&k| k == 0) {
            continue;
        }
        for (k, c) in comps.iter().enumerate() {
            for (mono, x) in &c.terms {
                let mut exp = mono.exp.clone();
                exp.resize(sp.n, 0);
                exp.extend_from_slice(alpha);
                out[k].add_term(Mono::new(&psp, exp), x);
            }
        }
    }
    Ok(out)
}

/// Scission of `a -> M a` by division through the nonzero columns of `M`,
/// which the caller asserts form a standard basis of the image.
pub fn division_scission(mat: &Mat, sp: &Sp) -> Result<TextileMap> {
    let p = mat.len();
    let m = mat[0].len();
    let cols: Vec<usize> = (0..m).filter(|&j| (0..p).any(|i| !mat[i][j].is_zero())).collect();
    if cols.is_empty() {
        return Ok(textile::zero_map(p, m, sp, 0));
    }
    let basis: Vec<SeriesVec> = cols.iter().map(|&j| (0..p).map(|i| mat[i][j].clone()).collect()).collect();
    let ctx = DivisionContext::new(basis)?;
    let inner = division::gh_scission(&ctx);
    let s2 = sp.clone();
    let eval: EvalFn = Arc::new(move |b: &[Series], t: Val| {
        let q = inner.eval_raw(b, t)?;
        let val = vec_val(&q);
        let mut out: SeriesVec = (0..m).map(|_| Series::zero(&s2, val)).collect();
        for (k, &j) in cols.iter().enumerate() {
            out[j] = q[k].clone();
        }
        Ok(out)
    });
    Ok(textile::linear("sigma", sp, p, m, 0, ctx_kappa(&ctx), eval))
}

fn ctx_kappa(ctx: &DivisionContext) -> Kappa {
    Kappa::Fin(-(ctx.max_order + (ctx.sp.nil as i64 - 1) * ctx.loss))
}

fn with_domain(mut f: TextileMap, l: i64) -> TextileMap {
    f.domain = l;
    f
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub probes: usize,
    pub validity: i64,
    pub pass: bool,
    pub witness: Option<SeriesVec>,
}

#[derive(Clone, Debug)]
pub struct BundleOptions {
    pub mode: Option<Mode>,
    pub probe_validity: i64,
    pub probes: usize,
    pub seed: u64,
    /// A structured `sigma h` replacing `sigma o h`.
    pub sigma_h: Option<TextileMap>,
    pub audit_trials: usize,
    /// Full polynomials `(polys, nx)` of a tactile map, for the rank probe.
    pub tactile: Option<(Vec<Series>, usize)>,
}

impl Default for BundleOptions {
    fn default() -> Self {
        BundleOptions { mode: None, probe_validity: 12, probes: 4, seed: 7, sigma_h: None, audit_trials: 24, tactile: None }
    }
}

#[derive(Clone, Debug)]
pub struct Bundle {
    pub ell: TextileMap,
    pub sigma: TextileMap,
    pub h: TextileMap,
    pub f: TextileMap,
    pub sigma_h: TextileMap,
    pub u: TextileMap,
    pub u_inv: TextileMap,
    pub v: TextileMap,
    pub v_inv: TextileMap,
    pub mode: Mode,
    pub domain: i64,
    pub evidence: Evidence,
    pub probe: ProbeReport,
}

/// Builds `u = id + sigma h` and `v = id - (id - l sigma) f u^-1 sigma l sigma`
/// (`v = id` for quasi-submersions), then checks `v f u^-1 = l` on random
/// inputs. A failed check is the expected outcome for maps without
/// constant rank and is returned as an error carrying the witness.
pub fn build_bundle(ell: &TextileMap, h: &TextileMap, sigma: &TextileMap, evidence: Evidence, opts: &BundleOptions) -> Result<Bundle> {
    let sp = h.sp.clone();
    let l = h.domain;
    let m = h.arity_in;
    let p = h.arity_out;
    let ell = with_domain(ell.clone(), l);
    let f = textile::sum(&ell, h);
    let sigma_h = match &opts.sigma_h {
        Some(s) => s.clone(),
        None => textile::compose(sigma, h)?,
    };
    let mode = opts.mode.unwrap_or(match sigma_h.kappa {
        Kappa::Fin(k) if k <= 0 && sp.nil > 1 => Mode::TestRing,
        _ => Mode::Field,
    });
    match (mode, sigma_h.kappa) {
        (_, Kappa::Infinite) => {}
        (Mode::Field, Kappa::Fin(k)) if k <= 0 => {
            return Err(Error::OrderConditionFailed(format!("kappa(sigma h) = {} is not positive", sigma_h.kappa.show(&sp))));
        }
        (Mode::TestRing, Kappa::Fin(_)) => {
            let t = l + opts.probe_validity.min(8);
            let rep = contraction_audit(&sigma_h, 0, opts.audit_trials, opts.seed, t, true)?;
            if !rep.pass {
                return Err(Error::OrderConditionFailed("sigma h does not raise the refined order".into()));
            }
        }
        _ => {}
    }
    if evidence == Evidence::SampledPointwise {
        let Some((full, nx)) = &opts.tactile else {
            return Err(Error::Unsupported("sampled pointwise evidence needs the tactile polynomials".into()));
        };
        let rep = pointwise_rank_probe(full, *nx, &sp, l, opts.probes.max(4), opts.seed, opts.probe_validity.min(10))?;
        if !rep.pass {
            return Err(Error::LinearizationProbeFailed(format!(
                "tangent image changes at a = {}",
                rep.witness.map(|w| show_vec(&w)).unwrap_or_default()
            )));
        }
    }
    let id_m = textile::identity(m, &sp, l);
    let mut u = textile::sum(&id_m, &sigma_h);
    u.name = "u".into();
    let mut u_inv = inverse_map(&sigma_h, mode);
    u_inv.name = "u^-1".into();
    let kf = f.kappa.fin().unwrap_or(0);
    let dv = l + kf;
    let (v, v_inv) = if evidence == Evidence::QuasiSubmersion {
        let id_p = textile::identity(p, &sp, dv);
        (id_p.clone(), id_p)
    } else {
        // linear factors get the domain their input actually has
        let ks = sigma.kappa.fin().unwrap_or(0);
        let kl = ell.kappa.fin().unwrap_or(0);
        let ls = textile::compose(&with_domain(ell.clone(), dv + ks), &with_domain(sigma.clone(), dv))?;
        let sls = textile::compose(&with_domain(sigma.clone(), dv + ks + kl), &ls)?;
        let ft = textile::compose(&f, &u_inv)?;
        let inner = textile::compose(&ft, &sls)?;
        let di = inner.domain + inner.kappa.fin().unwrap_or(0);
        let ls_i = textile::compose(&with_domain(ell.clone(), di + ks), &with_domain(sigma.clone(), di))?;
        let pr = textile::difference(&textile::identity(p, &sp, di), &ls_i);
        let corr = textile::compose(&pr, &inner)?;
        let id_p = textile::identity(p, &sp, dv);
        let mut v = textile::difference(&id_p, &corr);
        v.name = "v".into();
        let mut vi = textile::sum(&id_p, &corr);
        vi.name = "v^-1".into();
        (v, vi)
    };
    let mut b = Bundle {
        ell,
        sigma: sigma.clone(),
        h: h.clone(),
        f,
        sigma_h,
        u,
        u_inv,
        v,
        v_inv,
        mode,
        domain: l,
        evidence,
        probe: ProbeReport { probes: 0, validity: opts.probe_validity, pass: true, witness: None },
    };
    b.probe = bundle_probe(&b, opts.probe_validity, opts.probes, opts.seed)?;
    if !b.probe.pass {
        return Err(Error::LinearizationProbeFailed(format!(
            "v f u^-1 differs from l at y = {}",
            b.probe.witness.as_ref().map(|w| show_vec(w)).unwrap_or_default()
        )));
    }
    Ok(b)
}

fn show_vec(v: &[Series]) -> String {
    let names = crate::series::default_names(v[0].n());
    let parts: Vec<String> = v.iter().map(|s| s.to_expr(&names)).collect();
    format!("({})", parts.join(", "))
}

/// Input validity needed so that every map in the chain reaches `t`.
fn need(maps: &[&TextileMap], t: i64) -> i64 {
    let mut v = Val::Upto(t);
    for f in maps {
        v = f.needs(v);
    }
    v.finite().unwrap_or(t).max(t)
}

/// Like `need` but without clamping at `t`, for maps that gain order.
fn need_exact(maps: &[&TextileMap], t: i64) -> i64 {
    let mut v = Val::Upto(t);
    for f in maps {
        v = f.needs(v);
    }
    v.finite().unwrap_or(t)
}

/// `v(f(u^-1(y))) = l(y)` on random `y` in the domain.
pub fn bundle_probe(b: &Bundle, t: i64, probes: usize, seed: u64) -> Result<ProbeReport> {
    let mut rng = random::rng(seed);
    let sp = &b.h.sp;
    let ny = need(&[&b.v, &b.f, &b.u_inv], t).max(need(&[&b.ell], t));
    let lo = b.domain.max(sp.min_w());
    let mut rep = ProbeReport { probes, validity: t, pass: true, witness: None };
    for _ in 0..probes {
        let y: SeriesVec = (0..b.h.arity_in).map(|_| random::series(&mut rng, sp, lo, ny, 0.5)).collect();
        let x = b.u_inv.apply(&y, Val::Upto(need(&[&b.v, &b.f], t)))?;
        let fx = b.f.apply(&x, Val::Upto(need(&[&b.v], t)))?;
        let lhs = b.v.apply(&fx, Val::Upto(t))?;
        let rhs = b.ell.apply(&y, Val::Upto(t))?;
        if !vec_agrees(&lhs, &rhs) {
            rep.pass = false;
            rep.witness = Some(y);
            break;
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub particular: SeriesVec,
    /// `(id - sigma l)` of unit vectors, nonzero ones only (univariate arcs).
    pub kernel_basis: Vec<SeriesVec>,
    /// Nonzero part of `v(b)` outside the image, with its order.
    pub obstruction: Option<(SeriesVec, Order)>,
    pub validity: i64,
}

/// Solves `f(a) = b` to validity `n` through `l(u(a)) = v(b)`.
pub fn solve_via_linearization(bd: &Bundle, b: &[Series], n: i64) -> Result<Solution> {
    let sp = &bd.h.sp;
    // f lands in weights >= domain of v; anything lower is never reached
    let low: SeriesVec = b
        .iter()
        .map(|s| {
            let mut r = s.truncate(Val::Upto(bd.v.domain - 1));
            r.val = Val::Exact;
            r
        })
        .collect();
    if !vec_is_zero(&low) {
        let o = vec_order(&low);
        return Ok(Solution { particular: vec![], kernel_basis: vec![], obstruction: Some((low, o)), validity: n });
    }
    let nv = need(&[&bd.f, &bd.u_inv, &bd.sigma], n);
    let vb = bd.v.apply(b, Val::Upto(nv.min(vec_val(b).finite().unwrap_or(nv) - bd.v.kappa.fin().unwrap_or(0))))?;
    let ns = (vec_val(&vb).finite().unwrap_or(nv) + bd.sigma.kappa.fin().unwrap_or(0)).min(need(&[&bd.f, &bd.u_inv], n));
    let mut y = bd.sigma.apply(&vb, Val::Upto(ns))?;
    // only the part of sigma(v b) inside the domain is admissible
    for s in y.iter_mut() {
        s.terms.retain(|m, _| m.deg >= bd.domain);
    }
    let back = bd.ell.apply(&y, Val::Upto(n))?;
    let r = vec_sub(&vb.iter().map(|s| s.truncate(Val::Upto(n))).collect::<Vec<_>>(), &back);
    if !vec_is_zero(&r) {
        let o = vec_order(&r);
        return Ok(Solution { particular: vec![], kernel_basis: vec![], obstruction: Some((r, o)), validity: n });
    }
    let particular = bd.u_inv.apply(&y, Val::Upto(ns))?;
    let kernel_basis = if sp.n == 1 { kernel_window(bd, n)? } else { vec![] };
    Ok(Solution { particular, kernel_basis, obstruction: None, validity: n })
}

/// `(id - sigma l)(t^k e_j)` for weights in `[l, n]`.
fn kernel_window(bd: &Bundle, n: i64) -> Result<Vec<SeriesVec>> {
    let sp = &bd.h.sp;
    let m = bd.h.arity_in;
    let mut out = Vec::new();
    let lo = bd.domain.max(sp.min_w());
    let tn = n.max(lo);
    let nl = need(&[&bd.sigma, &bd.ell], tn);
    let ns = need_exact(&[&bd.sigma], tn);
    for j in 0..m {
        for e in random::monomials(sp, lo, tn) {
            let mut v: SeriesVec = (0..m).map(|_| Series::zero(sp, Val::Upto(nl))).collect();
            v[j] = Series::monomial(sp, e, Coef::one()).with_val(Val::Upto(nl));
            let lv = bd.ell.apply(&v, Val::Upto(ns))?;
            let slv = bd.sigma.apply(&lv, Val::Upto(tn))?;
            let k: SeriesVec = v.iter().zip(&slv).map(|(a, b)| a.truncate(Val::Upto(tn)).sub(b)).collect();
            if !vec_is_zero(&k) {
                out.push(k);
            }
        }
    }
    Ok(out)
}

/// Any `z` gives a solution `u^-1(y0 + (id - sigma l) z)` when the rank
/// condition holds.
pub fn kernel_solution(bd: &Bundle, y0: &[Series], z: &[Series], n: i64) -> Result<SeriesVec> {
    let nl = need(&[&bd.f, &bd.u_inv], n);
    let lz = bd.ell.apply(z, Val::Upto(need_exact(&[&bd.sigma], nl)))?;
    let slz = bd.sigma.apply(&lz, Val::Upto(nl))?;
    let y: SeriesVec = y0.iter().zip(z).zip(&slz).map(|((a, b), c)| a.add(&b.sub(c)).truncate(Val::Upto(nl))).collect();
    bd.u_inv.apply(&y, Val::Upto(nl))
}

#[derive(Clone, Debug)]
pub struct RankProbe {
    pub samples: usize,
    pub pass: bool,
    /// Initial exponents `(weight, exponent, component)` of the tangent image at 0.
    pub at_zero: Vec<(i64, Vec<u32>, usize)>,
    pub per_sample: Vec<bool>,
    pub witness: Option<SeriesVec>,
}

/// Leading exponents of the span of all multiples `x^g d_j g(a)` truncated
/// at weight `t`: the initial module of the tangent image up to `t`.
fn initial_module(cols: &[SeriesVec], sp: &Sp, t: i64) -> Vec<(i64, Vec<u32>, usize)> {
    // each row: map from (deg, exp, comp) to coefficient, reduced by echelon
    type Key = (i64, Vec<u32>, usize);
    let mut rows: Vec<std::collections::BTreeMap<Key, Coef>> = Vec::new();
    for col in cols {
        let o = col.iter().map(|s| s.ord_lb()).min().unwrap_or(i64::MAX / 4);
        if o > t {
            continue;
        }
        for mono in random::monomials(sp, 0, t - o) {
            let mut r = std::collections::BTreeMap::new();
            for (comp, s) in col.iter().enumerate() {
                let sh = s.shift(&mono);
                for (m, c) in &sh.terms {
                    if m.deg <= t {
                        r.insert((m.deg, m.exp.clone(), comp), c.clone());
                    }
                }
            }
            if !r.is_empty() {
                rows.push(r);
            }
        }
    }
    // Gaussian elimination pivoting on the smallest key
    let nil = sp.nil;
    let mut basis: std::collections::BTreeMap<Key, std::collections::BTreeMap<Key, Coef>> = std::collections::BTreeMap::new();
    for mut r in rows {
        loop {
            let Some((k, c)) = r.iter().find(|(_, c)| c.is_unit()).map(|(k, c)| (k.clone(), c.clone())) else { break };
            if let Some(b) = basis.get(&k) {
                for (kk, bc) in b {
                    let d = bc.mul(&c, nil);
                    let e = r.entry(kk.clone()).or_insert_with(Coef::zero);
                    e.sub_assign(&d);
                    if e.is_zero() {
                        r.remove(kk);
                    }
                }
            } else {
                let inv = c.inv(nil).unwrap();
                let nr = r.into_iter().map(|(kk, x)| (kk, x.mul(&inv, nil))).collect();
                basis.insert(k, nr);
                break;
            }
        }
    }
    basis.into_keys().collect()
}

/// Compares the initial module of `im T_a f` with that at `a = 0` for random
/// `a` in the domain. Passing is evidence, failing refutes constant rank.
pub fn pointwise_rank_probe(polys: &[Series], nx: usize, sp: &Sp, l: i64, samples: usize, seed: u64, t: i64) -> Result<RankProbe> {
    let jac = textile::jacobian(polys, nx);
    let m = polys[0].n() - nx;
    let cols_at = |a: &[Series]| -> Result<Vec<SeriesVec>> {
        (0..m)
            .map(|j| jac.iter().map(|row| Ok(crate::series::substitute(&row[j], nx, a, sp)?.truncate(Val::Upto(t)))).collect())
            .collect()
    };
    let zero: SeriesVec = (0..m).map(|_| Series::zero(sp, Val::Exact)).collect();
    let base = initial_module(&cols_at(&zero)?, sp, t);
    let mut rng = random::rng(seed);
    let lo = l.max(sp.min_w());
    let mut rep = RankProbe { samples, pass: true, at_zero: base.clone(), per_sample: vec![], witness: None };
    for _ in 0..samples {
        let a: SeriesVec = (0..m).map(|_| random::series(&mut rng, sp, lo, t, 0.4)).collect();
        let ok = initial_module(&cols_at(&a)?, sp, t) == base;
        rep.per_sample.push(ok);
        if !ok && rep.pass {
            rep.pass = false;
            rep.witness = Some(a);
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{parse::parse_poly, q, Space};

    fn poly(src: &str, names: &[&str]) -> Series {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        parse_poly(src, &names, &Space::uniform(names.len(), 1)).unwrap()
    }

    #[test]
    fn zero_h_is_identity() {
        let sp = Space::uniform(1, 1);
        let h = textile::zero_map(1, 1, &sp, 1);
        let t = Series::var(&sp, 0).with_val(Val::Upto(9));
        assert_eq!(invert_id_plus_h(&h, &[t.clone()], 9, Mode::Field).unwrap(), vec![t]);
    }

    #[test]
    fn square_over_t_on_m2() {
        let sp = Space::uniform(1, 1);
        let s2 = sp.clone();
        let eval: EvalFn = Arc::new(move |a: &[Series], _t: Val| {
            let sq = a[0].mul(&a[0]);
            Ok(vec![division::unshift(&sq, &[1]).unwrap_or_else(|| Series::zero(&s2, Val::Exact))])
        });
        let h = textile::general("a^2/t", &sp, 1, 1, 2, Kappa::Fin(1), eval);
        let t = Series::var(&sp, 0);
        let b = t.pow(2).with_val(Val::Upto(15));
        let a = invert_id_plus_h(&h, &[b], 15, Mode::Field).unwrap();
        // t a + a^2 = t^3 coefficientwise
        let lhs = t.mul(&a[0]).add(&a[0].mul(&a[0]));
        assert!(lhs.truncate(Val::Upto(16)).agrees(&t.pow(3)));
        assert_eq!(a[0].coeffs(4), vec![Coef::zero(), Coef::zero(), Coef::one(), Coef::int(-1), Coef::int(2)]);
    }

    #[test]
    fn nilpotent_contraction() {
        let sp = Space::uniform(1, 2);
        let e = Coef::eps(1, 2);
        let eval: EvalFn = Arc::new(move |a: &[Series], _t: Val| Ok(vec![a[0].scale(&e)]));
        let h = textile::linear("e*a", &sp, 1, 1, 1, Kappa::Fin(0), eval);
        let b = Series::var(&sp, 0).add(&Series::var(&sp, 0).pow(3)).with_val(Val::Upto(8));
        let g = invert_id_plus_h(&h, &[b.clone()], 8, Mode::TestRing).unwrap();
        assert!(g[0].agrees(&b.sub(&b.scale(&Coef::eps(1, 2)))));
        assert!(matches!(invert_id_plus_h(&h, &[b], 8, Mode::Field), Err(Error::NotContractive(_))));
    }

    fn example6(l: i64, src: &str) -> (TextileMap, TextileMap, TextileMap) {
        let sp = Space::uniform(1, 1);
        let names = if src.contains('t') { vec!["t", "x", "y"] } else { vec!["x", "y"] };
        let nx = names.len() - 2;
        let (ell, h, mat) = split_tactile(&[poly(src, &names)], nx, &sp, l).unwrap();
        let sigma = division_scission(&mat, &sp).unwrap();
        (ell, h, sigma)
    }

    #[test]
    fn golden_x_plus_xy() {
        let (ell, h, sigma) = example6(1, "x + x*y");
        let bd = build_bundle(&ell, &h, &sigma, Evidence::QuasiSubmersion, &BundleOptions::default()).unwrap();
        let sp = Space::uniform(1, 1);
        let mut rng = random::rng(3);
        for _ in 0..3 {
            let a: SeriesVec = (0..2).map(|_| random::series(&mut rng, &sp, 1, 12, 0.6)).collect();
            let u = bd.u.apply(&a, Val::Upto(12)).unwrap();
            assert!(u[0].agrees(&a[0].mul(&Series::one(&sp).add(&a[1]))));
            assert!(u[1].agrees(&a[1]));
        }
        let t = Series::var(&sp, 0).with_val(Val::Upto(10));
        let sol = solve_via_linearization(&bd, &[t.clone()], 10).unwrap();
        assert!(sol.obstruction.is_none());
        assert!(sol.particular[0].agrees(&t));
        assert!(sol.particular[1].is_zero());
    }

    #[test]
    fn tx_plus_xy_on_m2() {
        let (ell, h, sigma) = example6(2, "t*x + x*y");
        let full = (vec![poly("t*x + x*y", &["t", "x", "y"])], 1);
        let opts = BundleOptions { probe_validity: 10, tactile: Some(full), ..Default::default() };
        let bd = build_bundle(&ell, &h, &sigma, Evidence::SampledPointwise, &opts).unwrap();
        assert!(bd.probe.pass);
    }

    #[test]
    fn obstruction_outside_image() {
        let sp = Space::uniform(1, 1);
        let (ell, h, mat) = split_tactile(&[poly("t*y + y^2", &["t", "y"])], 1, &sp, 2).unwrap();
        let sigma = division_scission(&mat, &sp).unwrap();
        let bd = build_bundle(&ell, &h, &sigma, Evidence::InjectiveTangent, &BundleOptions::default()).unwrap();
        let t = Series::var(&sp, 0).with_val(Val::Upto(8));
        let sol = solve_via_linearization(&bd, &[t], 8).unwrap();
        assert_eq!(sol.obstruction.unwrap().1, Order::Attained(1));
        let b = Series::var(&sp, 0).pow(3).with_val(Val::Upto(12));
        let sol = solve_via_linearization(&bd, &[b.clone()], 10).unwrap();
        let a = &sol.particular[0];
        let fa = Series::var(&sp, 0).mul(a).add(&a.mul(a));
        assert!(fa.truncate(Val::Upto(10)).agrees(&b));
        let _ = q(0);
    }
}
