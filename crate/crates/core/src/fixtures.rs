//! Worked constructions shared by the verification suites and tests.

use std::sync::Arc;

use rand::Rng;

use crate::apps::drinfeld::{ring_space, DrinfeldData};
use crate::arcspace::{arc_space, Jet};
use crate::error::Result;
use crate::linearize::{self, Bundle, BundleOptions, Evidence, RankProbe};
use crate::random::{small_q, Rng8};
use crate::series::{parse::parse_poly, Coef, Series, Space, Sp, Val};
use crate::textile::{self, EvalFn, Kappa, TextileMap};

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// `(a, b) -> F(eta + a, eta + b) - F(eta, eta)` for `F = x^2 - y^2` and
/// `eta = x1 x2 + (x1 x2)^2`, on `(x1, x2)^3`. The tangent image at 0 is
/// `(eta)`, but at any `(a, b)` it also contains `a - b`: no constant rank.
pub struct NonConstantRank {
    pub sp: Sp,
    pub polys: Vec<Series>,
    pub domain: i64,
    pub ell: TextileMap,
    pub h: TextileMap,
    /// `c -> (c / 4 eta, -c / 4 eta)`, quotient by the monomial `x1 x2`.
    pub sigma: TextileMap,
}

pub fn non_constant_rank() -> Result<NonConstantRank> {
    let sp = Space::uniform(2, 1);
    let g = parse_poly(
        "2*(x1*x2 + x1^2*x2^2)*(a - b) + a^2 - b^2",
        &names(&["x1", "x2", "a", "b"]),
        &Space::uniform(4, 1),
    )?;
    let domain = 3;
    let polys = vec![g];
    let (ell, h, _) = linearize::split_tactile(&polys, 2, &sp, domain)?;
    // eta = x1 x2 (1 + x1 x2)
    let unit = parse_poly("1 + x1*x2", &names(&["x1", "x2"]), &sp)?;
    let eval: EvalFn = Arc::new(move |c: &[Series], t: Val| {
        let cap = t.finite().unwrap_or(0) + 4;
        let mut hi = c[0].clone();
        hi.terms.retain(|m, _| m.exp[0] >= 1 && m.exp[1] >= 1);
        let qv = crate::division::unshift(&hi, &[1, 1]).unwrap();
        let qv = qv.mul(&unit.inverse(cap)?).scale_q(&crate::series::qf(1, 4)).truncate(t);
        Ok(vec![qv.clone(), qv.neg()])
    });
    let sigma = textile::linear("halving scission", &sp, 1, 2, 0, Kappa::Fin(-2), eval);
    Ok(NonConstantRank { sp, polys, domain, ell, h, sigma })
}

impl NonConstantRank {
    pub fn probe(&self, samples: usize, seed: u64) -> Result<RankProbe> {
        linearize::pointwise_rank_probe(&self.polys, 2, &self.sp, self.domain, samples, seed, 10)
    }

    /// Must fail with `LINEARIZATION_PROBE_FAILED`.
    pub fn bundle(&self, seed: u64) -> Result<Bundle> {
        let opts = BundleOptions { seed, tactile: Some((self.polys.clone(), 2)), ..Default::default() };
        linearize::build_bundle(&self.ell, &self.h, &self.sigma, Evidence::SampledPointwise, &opts)
    }
}

/// A jet at `level` of the arc `((t u)^2, (t u)^3)` on the cusp, for a random
/// unit `u`. Such jets lift and meet the order threshold.
pub fn cusp_jet(rng: &mut Rng8, level: i64) -> Jet {
    let sp = arc_space();
    let mut u = Series::one(&sp);
    for k in 1..=rng.gen_range(1..=4u32) {
        u.add_term(crate::series::Mono::new(&sp, vec![k]), &Coef::from_q(small_q(rng, 3, 3)));
    }
    let tu = Series::var(&sp, 0).mul(&u);
    Jet::truncation(&[tu.pow(2), tu.pow(3)], level)
}

pub fn cusp() -> Series {
    parse_poly("y^2 - x^3", &names(&["x", "y"]), &Space::uniform(2, 1)).expect("cusp")
}

fn tpoly(s: &str, nil: u32) -> Series {
    parse_poly(s, &names(&["t"]), &ring_space(nil)).expect("fixture polynomial")
}

/// `g = y x2 + x1^2` at `gamma0 = (0, t, 0)` over `Q[e]/e^3` with `q = t - e`,
/// `x_bar = (xbar1, t - e)`, `r = 2`.
pub fn drinfeld_fixture(xbar1: &str, ybar: &str) -> DrinfeldData {
    let f = parse_poly("y*x2 + x1^2", &names(&["x1", "x2", "y"]), &Space::uniform(3, 1)).expect("fixture");
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

/// The fixture's base point: `q = t`, `x_bar = (0, t)`, `y_bar = 0`.
pub fn drinfeld_base_point() -> DrinfeldData {
    let mut d = drinfeld_fixture("0", "0");
    d.q = tpoly("t", 3);
    d.xbar[1] = tpoly("t", 3);
    d
}

/// `xi = (e (1 + t), 0)` for [`drinfeld_fixture`].
pub fn drinfeld_xi() -> Vec<Series> {
    vec![tpoly("1 + t", 3).scale(&Coef::eps(1, 3)), tpoly("0", 3)]
}

pub const TOUGERON_SQRT: (&str, &str) = ("y^2 + 2*x*y + x^3", "c[1,1] = 1/4*x\nB = x");
pub const TOUGERON_CATALAN: (&str, &str) = ("y^2 + x1*y + x1^2*x2", "c[1,1] = x2\nB = x2");

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probe_refutes_constant_rank() {
        let fx = non_constant_rank().unwrap();
        let rep = fx.probe(4, 7).unwrap();
        assert!(!rep.pass);
        assert!(rep.witness.is_some());
        let err = fx.bundle(7).unwrap_err();
        assert_eq!(err.code(), "LINEARIZATION_PROBE_FAILED");
    }
}
