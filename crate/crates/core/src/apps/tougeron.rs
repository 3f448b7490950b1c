//! Implicit functions with a degenerate Jacobian: if `F(x, 0)` lies in
//! `B A^2` with `A = (d F/d y_i (x, 0))`, there is a root `y(x)` in `B A`.
//!
//! Substituting `y_k = sum_i delta_i z_(k r + i)` makes `g(z) = F(x, D z)` a
//! quasi-submersion onto `I = (delta_i delta_j)`. The higher part splits as
//! `sum delta_i delta_j h_ij(x, z)`, so `sigma h` has `h_ij` in slot `i r + j`
//! and stays tactile. With `v = id`, the root is `D u^-1(z0)` where `z0`
//! solves the linear equation, `z0_(i r + j) = -c_ij`.

use crate::error::{Error, Result};
use crate::linearize::{self, BundleOptions, Evidence};
use crate::series::{parse::infer_names, parse::parse_poly, substitute, Mono, Series, SeriesVec, Space, Sp, Val};
use crate::textile::{self, Kappa};

#[derive(Clone, Debug)]
pub struct TougeronInstance {
    pub f: Series,
    pub nx: usize,
    pub p: usize,
    /// `c[i][j]`, so that `F(x, 0) = sum c_ij delta_i delta_j`.
    pub c: Vec<Vec<Series>>,
    pub b_gens: Vec<Series>,
    pub x_names: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Verified,
    /// Monomial of `y_i` outside `B A`.
    Failed { component: usize, exp: Vec<u32> },
    /// `B` or `A` has a non-monomial generator.
    Unverified,
}

impl Membership {
    pub fn describe(&self) -> String {
        match self {
            Membership::Verified => "verified".into(),
            Membership::Failed { component, exp } => format!("failed: y{} has monomial {:?} outside BA", component + 1, exp),
            Membership::Unverified => "membership unverified".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TougeronLift {
    pub y: SeriesVec,
    pub deltas: SeriesVec,
    pub kappa_sigma_h: Kappa,
    pub membership: Membership,
    /// `F(x, y)` to validity `N`.
    pub residual: Series,
}

fn x_space(nx: usize) -> Sp {
    Space::uniform(nx, 1)
}

impl TougeronInstance {
    /// `F` in the `x` and `y` variables, representation lines `c[i,j] = expr`
    /// (1-based, omitted entries are zero) and `B = g1, g2, ...`.
    pub fn parse(f_src: &str, rep_src: &str) -> Result<TougeronInstance> {
        let mut c_src: Vec<(usize, usize, String)> = Vec::new();
        let mut b_src: Vec<String> = Vec::new();
        for line in rep_src.lines() {
            let line = line.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (lhs, rhs) = line.split_once('=').ok_or_else(|| Error::Parse(format!("expected '=' in '{line}'")))?;
            let lhs = lhs.trim();
            if lhs == "B" {
                b_src = rhs.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
            } else if let Some(ix) = lhs.strip_prefix("c[").and_then(|s| s.strip_suffix(']')) {
                let (i, j) = ix.split_once(',').ok_or_else(|| Error::Parse(format!("bad index '{lhs}'")))?;
                let parse_ix = |s: &str| s.trim().parse::<usize>().ok().filter(|&k| k >= 1).ok_or_else(|| Error::Parse(format!("bad index '{lhs}'")));
                c_src.push((parse_ix(i)? - 1, parse_ix(j)? - 1, rhs.trim().to_string()));
            } else {
                return Err(Error::Parse(format!("unknown representation entry '{lhs}'")));
            }
        }
        let mut all: Vec<&str> = vec![f_src];
        all.extend(c_src.iter().map(|(_, _, s)| s.as_str()));
        all.extend(b_src.iter().map(|s| s.as_str()));
        let names = infer_names(&all)?;
        let x_names: Vec<String> = names.iter().filter(|s| !s.starts_with('y')).cloned().collect();
        let y_names: Vec<String> = names.iter().filter(|s| s.starts_with('y')).cloned().collect();
        let (nx, p) = (x_names.len(), y_names.len());
        if p == 0 {
            return Err(Error::Parse("F has no y variables".into()));
        }
        let mut fnames = x_names.clone();
        fnames.extend(y_names);
        let f = parse_poly(f_src, &fnames, &Space::uniform(nx + p, 1))?;
        let xs = x_space(nx);
        let mut c = vec![vec![Series::zero(&xs, Val::Exact); p]; p];
        for (i, j, s) in &c_src {
            if *i >= p || *j >= p {
                return Err(Error::Parse(format!("c[{},{}] is outside the {p} x {p} block", i + 1, j + 1)));
            }
            c[*i][*j] = parse_poly(s, &x_names, &xs)?;
        }
        let b_gens = b_src.iter().map(|s| parse_poly(s, &x_names, &xs)).collect::<Result<Vec<_>>>()?;
        Ok(TougeronInstance { f, nx, p, c, b_gens, x_names })
    }

    /// `delta_i = dF/dy_i (x, 0)`.
    pub fn deltas(&self) -> Result<SeriesVec> {
        let xs = x_space(self.nx);
        let zero: SeriesVec = (0..self.p).map(|_| Series::zero(&xs, Val::Exact)).collect();
        (0..self.p).map(|i| substitute(&self.f.derivative(self.nx + i), self.nx, &zero, &xs)).collect()
    }

    pub fn f_at_zero(&self) -> Result<Series> {
        let xs = x_space(self.nx);
        let zero: SeriesVec = (0..self.p).map(|_| Series::zero(&xs, Val::Exact)).collect();
        substitute(&self.f, self.nx, &zero, &xs)
    }
}

/// Embed a series in `x` into the space `(x, z)`.
fn lift_x(s: &Series, zsp: &Sp) -> Series {
    let mut out = Series::zero(zsp, s.val);
    for (m, c) in &s.terms {
        let mut e = m.exp.clone();
        e.resize(zsp.n, 0);
        out.add_term(Mono::new(zsp, e), c);
    }
    out
}

fn is_monomial(s: &Series) -> bool {
    s.terms.len() == 1
}

/// Every monomial of every `y_i` is divisible by some `b delta`.
pub fn monomial_membership(y: &[Series], b_gens: &[Series], deltas: &[Series]) -> Membership {
    let gens: Vec<&Series> = b_gens.iter().chain(deltas.iter()).filter(|s| !s.is_zero()).collect();
    if gens.iter().any(|s| !is_monomial(s)) || b_gens.is_empty() {
        return Membership::Unverified;
    }
    let mut prods: Vec<Mono> = Vec::new();
    for b in b_gens.iter().filter(|s| !s.is_zero()) {
        for d in deltas.iter().filter(|s| !s.is_zero()) {
            prods.push(b.initial().unwrap().0.mul(d.initial().unwrap().0));
        }
    }
    for (k, s) in y.iter().enumerate() {
        for m in s.terms.keys() {
            if !prods.iter().any(|g| g.divides(m)) {
                return Membership::Failed { component: k, exp: m.exp.clone() };
            }
        }
    }
    Membership::Verified
}

pub fn tougeron_lift(inst: &TougeronInstance, n: i64) -> Result<TougeronLift> {
    let (nx, p) = (inst.nx, inst.p);
    let r = p;
    let xs = x_space(nx);
    let zsp = xs.extended(r * p);
    let deltas = inst.deltas()?;
    let f0 = inst.f_at_zero()?;
    let mut rep = Series::zero(&xs, Val::Exact);
    for i in 0..p {
        for j in 0..p {
            rep = rep.add(&inst.c[i][j].mul(&deltas[i]).mul(&deltas[j]));
        }
    }
    if rep != f0 {
        return Err(Error::RepresentationInvalid(format!("sum c_ij delta_i delta_j - F(x,0) = {}", rep.sub(&f0))));
    }
    if let Some((i, j)) = (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).find(|&(i, j)| !inst.c[i][j].constant_term().is_zero()) {
        return Err(Error::RepresentationInvalid(format!("c[{},{}] is a unit, so B is not proper", i + 1, j + 1)));
    }
    // y_k = sum_i delta_i z_(k r + i) as polynomials in (x, z)
    let dz: SeriesVec = (0..p)
        .map(|k| {
            let mut s = Series::zero(&zsp, Val::Exact);
            for i in 0..r {
                s = s.add(&lift_x(&deltas[i], &zsp).mul(&Series::var(&zsp, nx + k * r + i)));
            }
            s
        })
        .collect();
    let g = substitute(&inst.f, nx, &dz, &zsp)?.sub(&lift_x(&f0, &zsp));
    let (ell, h, _) = linearize::split_tactile(std::slice::from_ref(&g), nx, &xs, 1)?;
    let sh = structured_sigma_h(&inst.f, nx, p, &dz, &zsp)?;
    let sigma = linearize::division_scission(&ell_matrix(&deltas, &xs), &xs)?;
    let sigma_h = textile::tactile(sh, nx, &xs, 1);
    let opts = BundleOptions { sigma_h: Some(sigma_h), ..Default::default() };
    let bd = linearize::build_bundle(&ell, &h, &sigma, Evidence::QuasiSubmersion, &opts)?;
    let z0: SeriesVec = (0..p).flat_map(|i| (0..r).map(move |j| (i, j))).map(|(i, j)| inst.c[i][j].neg()).collect();
    let z = bd.u_inv.apply(&z0, Val::Upto(n))?;
    let y: SeriesVec = (0..p)
        .map(|k| {
            let mut s = Series::zero(&xs, Val::Upto(n));
            for i in 0..r {
                s = s.add(&deltas[i].mul(&z[k * r + i]));
            }
            s.truncate(Val::Upto(n))
        })
        .collect();
    let residual = substitute(&inst.f, nx, &y, &xs)?.truncate(Val::Upto(n));
    let membership = monomial_membership(&y, &inst.b_gens, &deltas);
    Ok(TougeronLift { y, deltas, kappa_sigma_h: bd.sigma_h.kappa, membership, residual })
}

/// Row `(delta_k delta_i)` in slot `k r + i`.
fn ell_matrix(deltas: &[Series], xs: &Sp) -> Vec<Vec<Series>> {
    let mut row = Vec::new();
    for a in deltas {
        for b in deltas {
            row.push(a.mul(b).in_space(xs));
        }
    }
    vec![row]
}

/// `h_ij` in slot `i r + j`: every monomial of the part of `F` of degree
/// `>= 2` in `y` gives its first two `y` factors `y_a y_b` (`a <= b`) as
/// `sum delta_i delta_j z_(a r + i) z_(b r + j)`, times the rest in `D z`.
fn structured_sigma_h(f: &Series, nx: usize, p: usize, dz: &[Series], zsp: &Sp) -> Result<Vec<Series>> {
    let r = p;
    let mut out = vec![Series::zero(zsp, Val::Exact); r * r];
    for (m, c) in &f.terms {
        let ay = &m.exp[nx..];
        if ay.iter().sum::<u32>() < 2 {
            continue;
        }
        let mut rest = ay.to_vec();
        let a = rest.iter().position(|&k| k > 0).unwrap();
        rest[a] -= 1;
        let b = rest.iter().position(|&k| k > 0).unwrap();
        rest[b] -= 1;
        let mut xe = m.exp[..nx].to_vec();
        xe.resize(zsp.n, 0);
        let mut tail = Series::monomial(zsp, xe, c.clone());
        for (k, &e) in rest.iter().enumerate() {
            if e > 0 {
                tail = tail.mul(&dz[k].pow(e));
            }
        }
        for i in 0..r {
            for j in 0..r {
                let zz = Series::var(zsp, nx + a * r + i).mul(&Series::var(zsp, nx + b * r + j));
                out[i * r + j] = out[i * r + j].add(&tail.mul(&zz));
            }
        }
    }
    Ok(out)
}
