//! Lifting an approximate root `y_bar(x)` of `F(x, y) = 0` to a true
//! power-series root that agrees with it to a prescribed order.
//!
//! With `e = ord dF/dy(x, y_bar)`, the map `eta -> F(x, y_bar + eta) - F(x, y_bar)`
//! on `(x)^(e+1)` has linear part `dF/dy(x, y_bar) eta`, whose image is
//! `(x)^(2e+1)`; the rest has order `>= 2e + 2`, so it is a quasi-submersion.

use crate::arcspace::{arc_space, pivot_scission};
use crate::division::{self, Mat};
use crate::error::{Error, Result};
use crate::linearize::{self, BundleOptions, Evidence};
use crate::series::{substitute, Order, Series, Val};
use crate::textile::Kappa;

#[derive(Clone, Debug)]
pub struct WavrikLift {
    pub y: Series,
    /// `ord dF/dy(x, y_bar)`.
    pub e: i64,
    pub ord_f: Order,
    /// Order of the discriminant `Res_y(F, dF/dy)`, if `F` has positive `y`-degree.
    pub disc_order: Option<Order>,
    pub kappa_sigma_h: Option<Kappa>,
    /// `F(x, y)` to validity `N`.
    pub residual: Series,
}

/// `F` as a polynomial in `y` with coefficients in `k[[x]]`, lowest degree first.
fn y_coeffs(f: &Series) -> Vec<Series> {
    let sp = arc_space();
    let deg = f.terms.keys().map(|m| m.exp[1]).max().unwrap_or(0) as usize;
    let mut out = vec![Series::zero(&sp, Val::Exact); deg + 1];
    for (m, c) in &f.terms {
        out[m.exp[1] as usize].add_term(crate::series::Mono::new(&sp, vec![m.exp[0]]), c);
    }
    out
}

/// Sylvester resultant of two polynomials given by coefficient lists.
fn resultant(a: &[Series], b: &[Series]) -> Option<Series> {
    let (da, db) = (a.len().checked_sub(1)?, b.len().checked_sub(1)?);
    let n = da + db;
    if n == 0 {
        return None;
    }
    let sp = a[0].sp.clone();
    let mut mat: Mat = vec![vec![Series::zero(&sp, Val::Exact); n]; n];
    for r in 0..db {
        for (k, c) in a.iter().rev().enumerate() {
            mat[r][r + k] = c.clone();
        }
    }
    for r in 0..da {
        for (k, c) in b.iter().rev().enumerate() {
            mat[db + r][r + k] = c.clone();
        }
    }
    Some(division::det(&mat))
}

pub fn discriminant_order(f: &Series) -> Option<Order> {
    let a = y_coeffs(f);
    if a.len() < 2 {
        return None;
    }
    let b: Vec<Series> = a.iter().enumerate().skip(1).map(|(k, c)| c.scale_q(&crate::series::q(k as i64))).collect();
    resultant(&a, &b).map(|r| r.order())
}

pub fn wavrik_lift(f: &Series, ybar: &Series, q_agree: i64, n: i64) -> Result<WavrikLift> {
    if f.n() != 2 {
        return Err(Error::DomainMismatch("F must be a polynomial in (x, y)".into()));
    }
    let sp = arc_space();
    let ybar = ybar.in_space(&sp);
    let fy = f.derivative(1);
    let dy = substitute(&fy, 1, std::slice::from_ref(&ybar), &sp)?;
    let e = match dy.order() {
        Order::Attained(e) => e,
        _ => return Err(Error::PreconditionGap("dF/dy vanishes along the approximate root".into())),
    };
    let f0 = substitute(f, 1, std::slice::from_ref(&ybar), &sp)?;
    let ord_f = f0.order();
    let disc_order = discriminant_order(f);
    if ord_f == Order::Infinite {
        let residual = f0.truncate(Val::Upto(n));
        return Ok(WavrikLift { y: ybar.truncate(Val::Upto(n)), e, ord_f, disc_order, kappa_sigma_h: None, residual });
    }
    if !ord_f.at_least(2 * e + 1) {
        return Err(Error::PreconditionGap(format!(
            "F(x, y_bar) has order {}, need at least 2e + 1 = {}",
            ord_f.lower().unwrap_or(0),
            2 * e + 1
        )));
    }
    let polys = linearize::shift_polys(std::slice::from_ref(f), 1, std::slice::from_ref(&ybar), &sp)?;
    let (ell, h, mat) = linearize::split_tactile(&polys, 1, &sp, e + 1)?;
    let sigma = pivot_scission(&mat[0][0], 0, 1)?;
    let bd = linearize::build_bundle(&ell, &h, &sigma, Evidence::QuasiSubmersion, &BundleOptions::default())?;
    let kf = bd.f.kappa.fin().unwrap_or(0);
    let sol = linearize::solve_via_linearization(&bd, &[f0.neg()], n + kf)?;
    if let Some((_, o)) = sol.obstruction {
        return Err(Error::PreconditionGap(format!("-F(x, y_bar) leaves the image at order {}", o.lower().unwrap_or(0))));
    }
    let y = ybar.add(&sol.particular[0]).truncate(Val::Upto(n));
    if !y.sub(&ybar).truncate(Val::Upto(q_agree - 1)).is_zero() {
        return Err(Error::PreconditionGap(format!("the lift moves y_bar below order {q_agree}")));
    }
    let residual = substitute(f, 1, std::slice::from_ref(&y), &sp)?.truncate(Val::Upto(n));
    Ok(WavrikLift { y, e, ord_f, disc_order, kappa_sigma_h: Some(bd.sigma_h.kappa), residual })
}
