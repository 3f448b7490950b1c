//! Inverting a germ `f: (k^n, 0) -> (k^n, 0)` of generic rank `n`: given `b`
//! and an invertible `lambda`, find `u = lambda x + v` with `f(u) = b`.
//!
//! `G(v) = f(lambda x + v) - f(lambda x)` on `m^2` has linear part
//! `df(lambda x) v`; the adjugate scission divides by `det df(lambda x)`.

use crate::division::{self, adjugate_scission};
use crate::error::{Error, Result};
use crate::linearize::{self, BundleOptions, Evidence};
use crate::series::{substitute_vec, vec_sub, Coef, Mono, Order, Series, SeriesVec, Space, Val, Q};
use std::sync::Arc;

use crate::textile::{self, EvalFn, Kappa};

#[derive(Clone, Debug)]
pub struct GermInverse {
    pub u: SeriesVec,
    pub det_order: Order,
    pub kappa_sigma: i64,
    pub kappa_sigma_h: Kappa,
    /// `f(u) - b` to validity `N`.
    pub residual: SeriesVec,
}

/// `lambda x` as series in `n` variables.
pub fn linear_germ(lambda: &[Vec<Q>]) -> SeriesVec {
    let n = lambda.len();
    let sp = Space::uniform(n, 1);
    lambda
        .iter()
        .map(|row| {
            let mut s = Series::zero(&sp, Val::Exact);
            for (j, c) in row.iter().enumerate() {
                let mut e = vec![0; n];
                e[j] = 1;
                s.add_term(Mono::new(&sp, e), &Coef::from_q(c.clone()));
            }
            s
        })
        .collect()
}

/// Linear part of `u` as a rational matrix.
pub fn linear_part(u: &[Series]) -> Vec<Vec<Q>> {
    let n = u.len();
    u.iter()
        .map(|s| {
            (0..n)
                .map(|j| {
                    let mut e = vec![0; n];
                    e[j] = 1;
                    s.coeff(&e).constant()
                })
                .collect()
        })
        .collect()
}

pub fn invert_germ(f: &[Series], b: &[Series], lambda: &[Vec<Q>], n: i64) -> Result<GermInverse> {
    let dim = f.len();
    if dim == 0 || lambda.len() != dim || b.len() != dim || f.iter().any(|g| g.n() != dim) {
        return Err(Error::DomainMismatch(format!("germ, target and lambda must all have dimension {dim}")));
    }
    let sp = Space::uniform(dim, 1);
    let lx = linear_germ(lambda);
    // polys live in (x, v)
    let polys = linearize::shift_polys(f, 0, &lx, &sp)?;
    let (ell, h, mat) = linearize::split_tactile(&polys, dim, &sp, 2)?;
    let adj = adjugate_scission(&mat)?;
    let det_order = division::det(&mat).order();
    // l is injective, so sigma l = id on m^2 and the part of sigma below
    // order 2 only ever sees targets outside the image
    let inner = adj.map.clone();
    let eval: EvalFn = Arc::new(move |z: &[Series], t: Val| {
        let mut out = inner.apply(z, t)?;
        for s in out.iter_mut() {
            s.terms.retain(|m, _| m.deg >= 2);
        }
        Ok(out)
    });
    let mut sigma = textile::linear("adjugate-scission", &sp, dim, dim, 0, Kappa::Fin(adj.kappa), eval);
    sigma.floor = Some(2);
    let bd = linearize::build_bundle(&ell, &h, &sigma, Evidence::InjectiveTangent, &BundleOptions::default())?;
    let flx = substitute_vec(f, 0, &lx, &sp)?;
    let target = vec_sub(b, &flx);
    let kf = bd.f.kappa.fin().unwrap_or(0);
    let sol = linearize::solve_via_linearization(&bd, &target, n + kf)?;
    if let Some((_, o)) = sol.obstruction {
        return Err(Error::Obstructed(format!("b - f(lambda x) leaves the image at order {}", o.lower().unwrap_or(0))));
    }
    let u: SeriesVec = lx.iter().zip(&sol.particular).map(|(a, v)| a.add(v).truncate(Val::Upto(n))).collect();
    let fu = substitute_vec(f, 0, &u, &sp)?;
    let residual = vec_sub(&fu, b).iter().map(|s| s.truncate(Val::Upto(n))).collect();
    Ok(GermInverse { u, det_order, kappa_sigma: adj.kappa, kappa_sigma_h: bd.sigma_h.kappa, residual })
}
