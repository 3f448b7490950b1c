//! Deformations of an arc `gamma0` of a hypersurface `f(x, y) = 0` over a
//! test ring `A = Q[e]/e^K`.
//!
//! A deformation is written `x = x_bar + q^(r+1) xi`, `y = y_bar + q^r eta`
//! with `q` monic and `q = t^d` modulo the nilpotents. Once `(q, x_bar, y_bar)`
//! pass conditions `C` and `E`, the map `(xi, eta) -> f(x, y) - f(x_bar, y_bar)`
//! is a quasi-submersion onto `(q^(r+1))` and the `xi` stay free.
//!
//! When `q` has a nilpotent constant term, `sigma h` only gains on the
//! nilpotency depth, so the inversion runs in test-ring mode.

use std::sync::Arc;

use crate::division::{weierstrass_divide, WDiv};
use crate::error::{Error, Result};
use crate::linearize::{self, BundleOptions, Evidence, Mode};
use crate::series::{substitute, taylor_expand, Mono, Order, Series, SeriesVec, Space, Sp, Val};
use crate::textile::{self, EvalFn, Kappa};

#[derive(Clone, Debug)]
pub struct DrinfeldData {
    /// `f` in `(x1..xn, y)`.
    pub f: Series,
    /// `(x0, y0)` over the rationals.
    pub gamma0: SeriesVec,
    pub nil: u32,
    pub q: Series,
    pub xbar: SeriesVec,
    pub ybar: Series,
    pub r: u32,
}

#[derive(Clone, Debug)]
pub struct Split {
    pub xbar: SeriesVec,
    pub ybar: Series,
    pub xi: SeriesVec,
    pub eta: Series,
}

#[derive(Clone, Debug)]
pub struct Deformation {
    pub gamma: SeriesVec,
    pub xi: SeriesVec,
    pub eta: Series,
    /// `ord_t df/dy(gamma0)`.
    pub d: u32,
    pub mode: Mode,
    pub kappa_sigma_h: Kappa,
    /// `gamma = gamma0` modulo the nilpotents.
    pub reduces_to_gamma0: bool,
    /// `f(gamma)` to validity `N`.
    pub residual: Series,
}

/// Series in `t` over `A`.
pub fn ring_space(nil: u32) -> Sp {
    Space::uniform(1, nil)
}

/// Degree of `q` if it is monic and `q = t^d` modulo the nilpotents.
pub fn check_q(q: &Series) -> Result<u32> {
    let top = q.terms.keys().map(|m| m.exp[0]).max().ok_or_else(|| Error::NotMonic("q is zero".into()))?;
    if !q.coeff(&[top]).is_one() || !q.is_exact() {
        return Err(Error::NotMonic(format!("leading coefficient of q at t^{top} is not 1")));
    }
    if q.mod_nil() != Series::monomial(&q.sp, vec![top], crate::series::Coef::one()) {
        return Err(Error::NotMonic(format!("q is not t^{top} modulo the nilpotents")));
    }
    Ok(top)
}

fn divide(g: &Series, p: &Series) -> Result<WDiv> {
    weierstrass_divide(g, p, 0, g.val.finite().unwrap_or(0))
}

/// `x = x_bar + q^(r+1) xi`, `y = y_bar + q^r eta` by division.
pub fn drinfeld_split(x: &[Series], y: &Series, q: &Series, r: u32) -> Result<Split> {
    check_q(q)?;
    let qr = q.pow(r);
    let qr1 = q.pow(r + 1);
    let mut xbar = Vec::new();
    let mut xi = Vec::new();
    for s in x {
        let w = divide(&s.in_space(&q.sp), &qr1)?;
        xbar.push(w.remainder);
        xi.push(w.quotient);
    }
    let w = divide(&y.in_space(&q.sp), &qr)?;
    Ok(Split { xbar, ybar: w.remainder, xi, eta: w.quotient })
}

fn mod_nil_vec(v: &[Series]) -> SeriesVec {
    v.iter().map(|s| s.mod_nil()).collect()
}

/// The polynomial of the terms up to weight `w`.
fn exact_truncation(s: &Series, w: i64) -> Series {
    let mut p = s.truncate(Val::Upto(w));
    p.val = Val::Exact;
    p
}

fn degree(s: &Series) -> Option<u32> {
    s.terms.keys().map(|m| m.exp[0]).max()
}

/// Conditions `C_q, C_xbar, C_ybar, E1, E2`; returns `(d, u~)` with
/// `df/dy(x_bar, y_bar) = u~ q`.
pub fn check_conditions(data: &DrinfeldData) -> Result<(u32, Series)> {
    let sp = ring_space(data.nil);
    let n = data.xbar.len();
    let f = &data.f;
    if f.n() != n + 1 || data.gamma0.len() != n + 1 {
        return Err(Error::DomainMismatch(format!("f needs {} variables and gamma0 {} components", n + 1, n + 1)));
    }
    let arc = ring_space(1);
    let g0 = mod_nil_vec(&data.gamma0.iter().map(|s| s.in_space(&arc)).collect::<Vec<_>>());
    if !substitute(f, 0, &g0, &arc)?.is_zero() {
        return Err(Error::ConditionsViolated("gamma0 is not an arc of f (f(gamma0) != 0)".into()));
    }
    let d = match substitute(&f.derivative(n), 0, &g0, &arc)?.order() {
        Order::Attained(d) if d > 0 => d as u32,
        Order::Attained(_) => return Err(Error::ConditionsViolated("d = 0: df/dy(gamma0) is a unit, nothing to deform".into())),
        _ => return Err(Error::ConditionsViolated("gamma0 lies in the singular locus (df/dy(gamma0) = 0)".into())),
    };
    let dq = check_q(&data.q).map_err(|e| Error::ConditionsViolated(format!("C_q: {e}")))?;
    if dq != d {
        return Err(Error::ConditionsViolated(format!("C_q: deg q = {dq} but d = {d}")));
    }
    let r = data.r;
    for (i, xb) in data.xbar.iter().enumerate() {
        let want = exact_truncation(&g0[i], (r as i64 + 1) * d as i64 - 1);
        if degree(xb).is_some_and(|k| k >= (r + 1) * d) || xb.mod_nil().in_space(&arc) != want {
            return Err(Error::ConditionsViolated(format!("C_xbar: x_bar{} is not x0 mod t^{} modulo the nilpotents", i + 1, (r + 1) * d)));
        }
    }
    let want = exact_truncation(&g0[n], r as i64 * d as i64 - 1);
    if degree(&data.ybar).is_some_and(|k| k >= r * d) || data.ybar.mod_nil().in_space(&arc) != want {
        return Err(Error::ConditionsViolated(format!("C_ybar: y_bar is not y0 mod t^{} modulo the nilpotents", r * d)));
    }
    let mut pt: SeriesVec = data.xbar.iter().map(|s| s.in_space(&sp)).collect();
    pt.push(data.ybar.in_space(&sp));
    let dy = substitute(&f.derivative(n), 0, &pt, &sp)?;
    let w1 = divide(&dy, &data.q.in_space(&sp))?;
    if !w1.remainder.is_zero() {
        return Err(Error::ConditionsViolated("E1: df/dy(x_bar, y_bar) is not divisible by q".into()));
    }
    let f0 = substitute(f, 0, &pt, &sp)?;
    let w2 = divide(&f0, &data.q.in_space(&sp).pow(r + 1))?;
    if !w2.remainder.is_zero() {
        return Err(Error::ConditionsViolated(format!("E2: f(x_bar, y_bar) is not divisible by q^{}", r + 1)));
    }
    Ok((d, w1.quotient))
}

/// `gamma` with `f(gamma) = 0` for the free parameters `xi` (exact series in `t`).
pub fn drinfeld_deform(data: &DrinfeldData, xi: &[Series], n: i64) -> Result<Deformation> {
    if n < 0 {
        return Err(Error::DomainMismatch("validity must be nonnegative".into()));
    }
    let (d, ut) = check_conditions(data)?;
    let sp = ring_space(data.nil);
    let nx = data.xbar.len();
    if xi.len() != nx {
        return Err(Error::DomainMismatch(format!("expected {nx} free parameters")));
    }
    let r = data.r;
    let q = data.q.in_space(&sp);
    let qr = q.pow(r);
    let qr1 = q.pow(r + 1);
    let mut pt: SeriesVec = data.xbar.iter().map(|s| s.in_space(&sp)).collect();
    pt.push(data.ybar.in_space(&sp));
    let f0 = substitute(&data.f, 0, &pt, &sp)?;
    let max_deg = data.f.max_total_degree();
    let tay = taylor_expand(std::slice::from_ref(&data.f), 0, &pt, &sp, max_deg)?;
    // phi and its higher part divided by q^(r+1), in (t, xi, eta)
    let psp = sp.extended(nx + 1);
    let mut phi = Series::zero(&psp, Val::Exact);
    let mut hq = Series::zero(&psp, Val::Exact);
    for (alpha, comps) in &tay {
        let ax: u32 = alpha[..nx].iter().sum();
        let deg = ax + alpha[nx];
        if deg == 0 {
            continue;
        }
        let pw = (r + 1) * ax + r * alpha[nx];
        let c = &comps[0];
        let term = c.mul(&q.pow(pw));
        add_poly(&mut phi, &term, alpha, &psp);
        if deg >= 2 {
            let w = weierstrass_divide(&term, &qr1, 0, 0)?;
            debug_assert!(w.remainder.is_zero());
            add_poly(&mut hq, &w.quotient, alpha, &psp);
        }
    }
    let (ell, h, _) = linearize::split_tactile(std::slice::from_ref(&phi), 1, &sp, 0)?;
    let b = (r + 1) * d;
    let wn = qr1.terms.keys().map(|m| m.exp[0]).min().unwrap_or(b) as i64;
    let ks = -(b as i64 + (data.nil as i64 - 1) * (b as i64 - wn));
    let sigma = eta_scission(&qr1, &ut, nx, &sp, ks);
    let sigma_h = eta_sigma_h(hq, &ut, nx, &sp);
    let opts = BundleOptions { sigma_h: Some(sigma_h), ..Default::default() };
    let bd = linearize::build_bundle(&ell, &h, &sigma, Evidence::QuasiSubmersion, &opts)?;
    let y0 = sigma.apply(&[f0.neg()], Val::Upto(linearize_need(&bd, n)))?;
    let mut z: SeriesVec = xi.iter().map(|s| s.in_space(&sp)).collect();
    z.push(Series::zero(&sp, Val::Exact));
    let sol = linearize::kernel_solution(&bd, &y0, &z, n)?;
    let gamma: SeriesVec = (0..=nx)
        .map(|i| {
            let (base, qq) = if i < nx { (&pt[i], &qr1) } else { (&pt[nx], &qr) };
            base.add(&qq.mul(&sol[i])).truncate(Val::Upto(n))
        })
        .collect();
    let residual = substitute(&data.f, 0, &gamma, &sp)?.truncate(Val::Upto(n));
    let arc = ring_space(1);
    let reduces_to_gamma0 = gamma
        .iter()
        .zip(&data.gamma0)
        .all(|(g, g0)| g.mod_nil().in_space(&arc).truncate(Val::Upto(n)) == g0.in_space(&arc).truncate(Val::Upto(n)));
    Ok(Deformation {
        gamma,
        xi: sol[..nx].to_vec(),
        eta: sol[nx].clone(),
        d,
        mode: bd.mode,
        kappa_sigma_h: bd.sigma_h.kappa,
        reduces_to_gamma0,
        residual,
    })
}

/// Validity of `y0` that `kernel_solution` at `n` consumes.
fn linearize_need(bd: &linearize::Bundle, n: i64) -> i64 {
    let kf = bd.f.kappa.fin().unwrap_or(0);
    n - kf.min(0)
}

fn add_poly(acc: &mut Series, c: &Series, alpha: &[u32], psp: &Sp) {
    for (m, x) in &c.terms {
        let mut e = vec![m.exp[0]];
        e.extend_from_slice(alpha);
        acc.add_term(Mono::new(psp, e), x);
    }
}

/// `b -> (0, .., 0, (b div q^(r+1)) / u~)`.
fn eta_scission(qr1: &Series, ut: &Series, nx: usize, sp: &Sp, kappa: i64) -> textile::TextileMap {
    let (qr1, ut, s2) = (qr1.clone(), ut.clone(), sp.clone());
    let eval: EvalFn = Arc::new(move |b: &[Series], t: Val| {
        let t = t.finite().unwrap_or(0);
        let cap = b[0].val.finite().unwrap_or(t - kappa);
        let w = weierstrass_divide(&b[0], &qr1, 0, cap)?;
        let inv = ut.inverse(t.max(0))?;
        let mut out: SeriesVec = (0..nx).map(|_| Series::zero(&s2, Val::Exact)).collect();
        out.push(w.quotient.mul(&inv).truncate(Val::Upto(t)));
        Ok(out)
    });
    textile::linear("sigma", sp, 1, nx + 1, 0, Kappa::Fin(kappa), eval)
}

/// `(xi, eta) -> (0, .., 0, h~(xi, eta) / u~)` with `h = q^(r+1) h~`.
fn eta_sigma_h(hq: Series, ut: &Series, nx: usize, sp: &Sp) -> textile::TextileMap {
    let kappa = textile::tactile_kappa(std::slice::from_ref(&hq), 1, sp, 0);
    let (ut, s2) = (ut.clone(), sp.clone());
    let eval: EvalFn = Arc::new(move |a: &[Series], t: Val| {
        let tt = t.finite().unwrap_or(0).max(0);
        let v = substitute(&hq, 1, a, &s2)?;
        let inv = ut.inverse(tt)?;
        let mut out: SeriesVec = (0..nx).map(|_| Series::zero(&s2, Val::Exact)).collect();
        out.push(v.mul(&inv).truncate(t));
        Ok(out)
    });
    textile::general("sigma h", sp, nx + 1, nx + 1, 0, kappa, eval)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::parse::parse_poly;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn tpoly(s: &str, nil: u32) -> Series {
        parse_poly(s, &names(&["t"]), &ring_space(nil)).unwrap()
    }

    /// `g = y x2 + x1^2` at `gamma0 = (0, t, 0)` over `Q[e]/e^3`.
    fn fixture(xbar1: &str, ybar: &str) -> DrinfeldData {
        let f = parse_poly("y*x2 + x1^2", &names(&["x1", "x2", "y"]), &Space::uniform(3, 1)).unwrap();
        DrinfeldData {
            f,
            gamma0: vec![tpoly("0", 1), tpoly("t", 1), tpoly("0", 1)],
            nil: 3,
            q: tpoly("t - e", 3),
            xbar: vec![tpoly(xbar1, 3), tpoly("t - e", 3)],
            ybar: tpoly(ybar, 3),
            r: 2,
        }
    }

    #[test]
    fn nilpotent_deformation() {
        let data = fixture("e*t", "-e^2*t");
        let s = tpoly("1 + t", 3);
        let xi = vec![s.scale(&crate::series::Coef::eps(1, 3)), tpoly("0", 3)];
        let def = drinfeld_deform(&data, &xi, 16).unwrap();
        assert!(def.residual.is_zero());
        assert!(def.reduces_to_gamma0);
        assert_eq!(def.mode, Mode::TestRing);
        // x1 = e c with c = t + q^3 s; y = -x1^2 / x2 = -e^2 c^2 / t
        let q = tpoly("t - e", 3);
        let c = tpoly("t", 3).add(&q.pow(3).mul(&s));
        let c2 = crate::division::unshift(&c.mul(&c).mod_nil(), &[1]).unwrap();
        let want_y = c2.scale(&crate::series::Coef::eps(2, 3)).neg();
        assert_eq!(def.gamma[2], want_y.truncate(Val::Upto(16)));
        assert_eq!(def.gamma[0], c.scale(&crate::series::Coef::eps(1, 3)).truncate(Val::Upto(16)));
    }

    #[test]
    fn base_point_reproduces_gamma0() {
        let f = parse_poly("y*x2 + x1^2", &names(&["x1", "x2", "y"]), &Space::uniform(3, 1)).unwrap();
        let data = DrinfeldData {
            f,
            gamma0: vec![tpoly("0", 1), tpoly("t", 1), tpoly("0", 1)],
            nil: 3,
            q: tpoly("t", 3),
            xbar: vec![tpoly("0", 3), tpoly("t", 3)],
            ybar: tpoly("0", 3),
            r: 2,
        };
        let def = drinfeld_deform(&data, &[tpoly("0", 3), tpoly("0", 3)], 12).unwrap();
        let want: SeriesVec = data.gamma0.iter().map(|s| s.in_space(&ring_space(3)).truncate(Val::Upto(12))).collect();
        assert_eq!(def.gamma, want);
    }

    #[test]
    fn violated_e2() {
        let data = fixture("e*t", "0");
        let err = drinfeld_deform(&data, &[tpoly("0", 3), tpoly("0", 3)], 8).unwrap_err();
        assert_eq!(err.code(), "CONDITIONS_VIOLATED");
        assert!(err.to_string().contains("E2"));
    }

    #[test]
    fn split_round_trip() {
        let q = tpoly("t - e", 2);
        let y = tpoly("t^2", 2);
        let s = drinfeld_split(&[tpoly("t^4 + e*t", 2)], &y, &q, 2).unwrap();
        let back = s.ybar.add(&q.pow(2).mul(&s.eta));
        assert_eq!(back, y);
        assert!(degree(&s.ybar).map_or(true, |k| k < 2));
        let x = s.xbar[0].add(&q.pow(3).mul(&s.xi[0]));
        assert_eq!(x, tpoly("t^4 + e*t", 2));
        let s = drinfeld_split(&[tpoly("t^4", 1)], &y, &tpoly("t", 1), 2).unwrap();
        assert!(s.xbar[0].is_zero());
        assert_eq!(s.xi[0], tpoly("t", 1));
        assert_eq!(drinfeld_split(&[y.clone()], &y, &tpoly("2*t", 2), 2).unwrap_err().code(), "NOT_MONIC");
    }
}
