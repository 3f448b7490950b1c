//! `x^(q) = P(x, x', ..., x^(q-1))` for `x` in `k[[t]]^n`.
//!
//! With `x = x0 + y`, `x0` the polynomial carrying the initial block, the
//! equation becomes `D^q y + h(y) = P(x0, ...)` on `m^q`. `D^q` is inverted
//! by `q`-fold integration, which gains `q` orders while `h` loses at most
//! `q - 1`, so `sigma h` contracts by one.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linearize::{self, BundleOptions, Evidence};
use crate::series::{parse::parse_poly, parse::parse_rational, q, substitute, Coef, Series, SeriesVec, Space, Sp, Val, Q};
use crate::textile::{self, EvalFn, Kappa};

#[derive(Clone, Debug)]
pub struct OdeSystem {
    pub n: usize,
    pub q: usize,
    /// Right-hand sides in the `q n` variables; `x_i^(l)` is variable `l n + i`.
    pub polys: Vec<Series>,
    /// `D^j x_i(0)` for `j < q`.
    pub init: Vec<Vec<Q>>,
}

fn arc_sp() -> Sp {
    Space::uniform(1, 1)
}

/// Names used in system files: `x` or `x1..xn`, with `_l` for the `l`-th derivative.
pub fn var_names(n: usize, q: usize) -> Vec<String> {
    let mut out = Vec::with_capacity(n * q);
    for l in 0..q {
        for i in 0..n {
            let base = if n == 1 { "x".to_string() } else { format!("x{}", i + 1) };
            out.push(if l == 0 { base } else { format!("{base}_{l}") });
        }
    }
    out
}

impl OdeSystem {
    pub fn new(n: usize, q: usize, polys: Vec<Series>, init: Vec<Vec<Q>>) -> Result<OdeSystem> {
        if polys.len() != n || polys.iter().any(|p| p.n() != n * q) {
            return Err(Error::DomainMismatch(format!("expected {n} right-hand sides in {} variables", n * q)));
        }
        if init.len() != n || init.iter().any(|r| r.len() != q) {
            return Err(Error::DomainMismatch(format!("initial block must be {n} rows of {q} values")));
        }
        Ok(OdeSystem { n, q, polys, init })
    }

    /// System file: a `q=<q>` line, then one right-hand side per line
    /// (an optional `lhs =` prefix is ignored).
    pub fn parse(src: &str, init: &str) -> Result<OdeSystem> {
        let mut order = 1usize;
        let mut rhs = Vec::new();
        for line in src.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            if let Some(v) = line.strip_prefix("q=") {
                order = v.trim().parse().map_err(|_| Error::Parse(format!("bad order '{v}'")))?;
                continue;
            }
            rhs.push(line.rsplit_once('=').map_or(line, |(_, r)| r).trim().to_string());
        }
        let n = rhs.len();
        if n == 0 || order == 0 {
            return Err(Error::Parse("empty system".into()));
        }
        let names = var_names(n, order);
        let sp = Space::uniform(n * order, 1);
        let polys = rhs.iter().map(|s| parse_poly(s, &names, &sp)).collect::<Result<Vec<_>>>()?;
        let init = parse_init(init, n, order)?;
        OdeSystem::new(n, order, polys, init)
    }

    /// `sum_j D^j x_i(0) t^j / j!`.
    pub fn initial_poly(&self) -> SeriesVec {
        let sp = arc_sp();
        self.init
            .iter()
            .map(|row| {
                let mut fact = q(1);
                let cs: Vec<Q> = row
                    .iter()
                    .enumerate()
                    .map(|(j, v)| {
                        if j > 0 {
                            fact *= q(j as i64);
                        }
                        v.clone() / fact.clone()
                    })
                    .collect();
                Series::from_rationals(&sp, &cs, Val::Exact)
            })
            .collect()
    }
}

/// `1,0;0,1`: components separated by `;`, derivative values by `,`.
pub fn parse_init(s: &str, n: usize, order: usize) -> Result<Vec<Vec<Q>>> {
    let rows: Vec<Vec<Q>> = s
        .split(';')
        .map(|r| r.split(',').filter(|x| !x.trim().is_empty()).map(|x| parse_rational(x.trim())).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    if rows.len() != n || rows.iter().any(|r| r.len() != order) {
        return Err(Error::Parse(format!("initial block must be {n} groups of {order} values")));
    }
    Ok(rows)
}

/// `(D^l x_i)` in the variable order of the right-hand sides.
fn jets(x: &[Series], q: usize) -> SeriesVec {
    let mut out = Vec::with_capacity(x.len() * q);
    let mut cur: SeriesVec = x.to_vec();
    for _ in 0..q {
        out.extend(cur.iter().cloned());
        cur = cur.iter().map(|s| s.derivative(0)).collect();
    }
    out
}

fn rhs(sys: &OdeSystem, x: &[Series]) -> Result<SeriesVec> {
    let sp = arc_sp();
    let d = jets(x, sys.q);
    sys.polys.iter().map(|p| substitute(p, 0, &d, &sp)).collect()
}

/// `k`-fold integral with zero initial block.
pub fn integrate(s: &Series, k: usize) -> Series {
    let sp = s.sp.clone();
    let mut out = Series::zero(&sp, s.val.plus(k as i64));
    for (m, c) in &s.terms {
        let e = m.exp[0] as i64;
        let mut f = q(1);
        for j in 1..=k as i64 {
            f *= q(e + j);
        }
        out.add_term(crate::series::Mono::new(&sp, vec![(e + k as i64) as u32]), &c.scale(&f.recip()));
    }
    out
}

#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub x: SeriesVec,
    pub kappa_sigma_h: Kappa,
    /// `D^q x - P(...)`, zero to validity `N - q`.
    pub residual: SeriesVec,
}

pub fn solve_ode(sys: &OdeSystem, n: i64) -> Result<OdeSolution> {
    let sp = arc_sp();
    let qq = sys.q as i64;
    let x0 = sys.initial_poly();
    let p0 = rhs(sys, &x0)?;
    let m = sys.n;
    let sys2 = sys.clone();
    let x0c = x0.clone();
    let p0c = p0.clone();
    let h_eval: EvalFn = Arc::new(move |a: &[Series], t: Val| {
        let x: SeriesVec = x0c.iter().zip(a).map(|(u, v)| u.add(v)).collect();
        let p = rhs(&sys2, &x)?;
        Ok(p.iter().zip(&p0c).map(|(u, v)| v.sub(u).truncate(t)).collect())
    });
    let h = textile::general("-(P(x0+y) - P(x0))", &sp, m, m, qq, Kappa::Fin(1 - qq), h_eval);
    let qd = sys.q;
    let l_eval: EvalFn = Arc::new(move |a: &[Series], _t: Val| {
        Ok(a.iter().map(|s| (0..qd).fold(s.clone(), |acc, _| acc.derivative(0))).collect())
    });
    let ell = textile::linear("D^q", &sp, m, m, qq, Kappa::Fin(-qq), l_eval);
    let s_eval: EvalFn = Arc::new(move |b: &[Series], _t: Val| Ok(b.iter().map(|s| integrate(s, qd)).collect()));
    let sigma = textile::linear("integral^q", &sp, m, m, 0, Kappa::Fin(qq), s_eval);
    let opts = BundleOptions { probe_validity: 8, probes: 2, ..Default::default() };
    let bd = linearize::build_bundle(&ell, &h, &sigma, Evidence::InjectiveTangent, &opts)?;
    let sol = linearize::solve_via_linearization(&bd, &p0, n)?;
    if sol.obstruction.is_some() {
        return Err(Error::Obstructed("right-hand side outside the image of D^q".into()));
    }
    let x: SeriesVec = x0.iter().zip(&sol.particular).map(|(u, v)| u.add(v).truncate(Val::Upto(n))).collect();
    let residual = residual(sys, &x, n - qq)?;
    Ok(OdeSolution { x, kappa_sigma_h: bd.sigma_h.kappa, residual })
}

pub fn residual(sys: &OdeSystem, x: &[Series], t: i64) -> Result<SeriesVec> {
    let p = rhs(sys, x)?;
    Ok(x.iter()
        .zip(&p)
        .map(|(s, pi)| (0..sys.q).fold(s.clone(), |acc, _| acc.derivative(0)).sub(pi).truncate(Val::Upto(t)))
        .collect())
}

/// Coefficient recursion `(k+1)...(k+q) x_{k+q} = [P(x, ..., D^(q-1) x)]_k`.
pub fn recursion_oracle(sys: &OdeSystem, n: i64) -> Result<SeriesVec> {
    let sp = arc_sp();
    let qq = sys.q as i64;
    let mut coeffs: Vec<Vec<Coef>> = sys.initial_poly().iter().map(|s| s.coeffs(sys.q as u32 - 1)).collect();
    for k in 0..=(n - qq).max(-1) {
        let x: SeriesVec = coeffs.iter().map(|c| Series::from_coeffs(&sp, c, Val::Exact)).collect();
        let p = rhs(sys, &x)?;
        let mut f = q(1);
        for j in 1..=qq {
            f *= q(k + j);
        }
        for (i, pi) in p.iter().enumerate() {
            coeffs[i].push(pi.at(k as u32).scale(&f.recip()));
        }
    }
    Ok(coeffs.iter().map(|c| Series::from_coeffs(&sp, c, Val::Upto(n)).truncate(Val::Upto(n))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::qf;

    #[test]
    fn exponential() {
        let sys = OdeSystem::parse("q=1\nx' = x\n", "1").unwrap();
        let sol = solve_ode(&sys, 12).unwrap();
        let mut f = 1i64;
        for k in 0..=12u32 {
            if k > 0 {
                f *= k as i64;
            }
            assert_eq!(sol.x[0].at(k), Coef::from_q(qf(1, f)));
        }
        assert!(sol.residual[0].is_zero());
        assert_eq!(sol.kappa_sigma_h, Kappa::Fin(1));
    }

    #[test]
    fn geometric_and_oscillator() {
        let sys = OdeSystem::parse("x' = x^2", "1").unwrap();
        let sol = solve_ode(&sys, 15).unwrap();
        assert!((0..=15).all(|k| sol.x[0].at(k) == Coef::one()));
        let osc = OdeSystem::parse("q=2\nx'' = -x", "0,1").unwrap();
        let sol = solve_ode(&osc, 15).unwrap();
        let or = recursion_oracle(&osc, 15).unwrap();
        assert!(sol.x[0].agrees(&or[0]));
        assert_eq!(sol.x[0].at(3), Coef::from_q(qf(-1, 6)));
    }

    #[test]
    fn coupled_system_matches_recursion() {
        let sys = OdeSystem::parse("q=2\nx1_1 + x2^2\n x1*x2 - x2_1\n", "1,0;0,2").unwrap();
        let sol = solve_ode(&sys, 14).unwrap();
        let or = recursion_oracle(&sys, 14).unwrap();
        for (a, b) in sol.x.iter().zip(&or) {
            assert!(a.agrees(b));
        }
    }
}
