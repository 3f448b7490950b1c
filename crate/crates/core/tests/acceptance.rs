//! Acceptance criteria, one line per criterion. Every comparison is exact;
//! each result is checked against an oracle computed by a separate route
//! (direct products, brute-force linear algebra, coefficient recursions,
//! Newton iteration or closed forms).

use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use felt::apps::{drinfeld, germ, ode, tougeron, wavrik};
use felt::arcspace::{self, arc_space, Jet};
use felt::division::{self, DivisionContext};
use felt::fixtures;
use felt::linearize::{self, BundleOptions, Evidence, Mode};
use felt::nmatrix::{self, RowFiniteMatrix};
use felt::random;
use felt::series::{parse::parse_poly, q, qf, Coef, Mono, Order, Series, SeriesVec, Space, Sp, Val, Q};
use felt::textile::{self, Kappa};
use felt::Error;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: felt::Result<T>) -> Result<T, String> {
    r.map_err(|e| format!("{}: {e}", e.code()))
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn poly(src: &str, vars: &[&str]) -> Series {
    parse_poly(src, &names(vars), &Space::uniform(vars.len(), 1)).unwrap()
}

fn big(c: &Coef) -> BigRational {
    c.constant().to_big()
}

fn bq(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `g(x, a)` by explicit products of the substituted series, truncated to `t`.
fn eval_products(polys: &[Series], nx: usize, a: &[Series], sp: &Sp, t: i64) -> SeriesVec {
    polys
        .iter()
        .map(|g| {
            let mut acc = Series::zero(sp, Val::Exact);
            for (m, c) in &g.terms {
                let mut e = m.exp[..nx].to_vec();
                e.resize(sp.n, 0);
                let mut term = Series::monomial(sp, e, c.clone());
                for (j, &k) in m.exp[nx..].iter().enumerate() {
                    for _ in 0..k {
                        let mut x = a[j].clone();
                        x.val = Val::Exact;
                        term = term.mul(&x).truncate(Val::Upto(t));
                    }
                }
                acc = acc.add(&term);
            }
            acc.truncate(Val::Upto(t))
        })
        .collect()
}

fn exact(s: &Series) -> Series {
    let mut s = s.clone();
    s.val = Val::Exact;
    s
}

// ---------------------------------------------------------------------------

fn inverse_mapping_engine() -> Outcome {
    let start = Instant::now();
    let mut rng = random::rng(1);
    let t = 20;
    for trial in 0..200 {
        let n = rng.gen_range(1..=2usize);
        let m = rng.gen_range(1..=3usize);
        let sp = Space::uniform(n, 1);
        let polys = random::contractive_tactile(&mut rng, n, m);
        let h = textile::tactile(polys.clone(), n, &sp, 1);
        ensure(h.kappa >= Kappa::Fin(1), || format!("trial {trial}: kappa {:?}", h.kappa))?;
        let density = if n == 1 { 0.7 } else { 0.2 };
        let b: SeriesVec = (0..m).map(|_| random::series(&mut rng, &sp, 1, t, density)).collect();
        let g = ok(linearize::invert_id_plus_h(&h, &b, t, Mode::Field))?;
        let hg = eval_products(&polys, n, &g, &sp, t);
        for j in 0..m {
            ensure(g[j].val.covers(t), || format!("trial {trial}: validity {:?}", g[j].val))?;
            let lhs = exact(&g[j]).add(&hg[j]).truncate(Val::Upto(t));
            ensure(lhs.terms == b[j].terms, || format!("trial {trial}: (id + h)(g) != b, h = {polys:?}"))?;
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(60), || format!("took {el:?}"))?;
    Ok(format!("200 contractive h at validity 20 in {:.1}s", el.as_secs_f64()))
}

fn bundle_for(src: &str, vars: &[&str], l: i64, ev: Evidence, opts: &BundleOptions) -> felt::Result<linearize::Bundle> {
    let sp = Space::uniform(1, 1);
    let (ell, h, mat) = linearize::split_tactile(&[poly(src, vars)], vars.len() - 2, &sp, l)?;
    let sigma = linearize::division_scission(&mat, &sp)?;
    linearize::build_bundle(&ell, &h, &sigma, ev, opts)
}

fn golden_linearization() -> Outcome {
    let sp = Space::uniform(1, 1);
    let mut rng = random::rng(2);
    let t = 20;
    let bd = ok(bundle_for("x + x*y", &["x", "y"], 1, Evidence::QuasiSubmersion, &BundleOptions::default()))?;
    for s in 0..6 {
        let a: SeriesVec = (0..2).map(|_| random::series(&mut rng, &sp, 1, t + 2, 0.6)).collect();
        let u = ok(bd.u.apply(&a, Val::Upto(t)))?;
        let want0 = exact(&a[0]).mul(&Series::one(&sp).add(&exact(&a[1]))).truncate(Val::Upto(t));
        ensure(u[0].terms == want0.terms && u[1].terms == a[1].truncate(Val::Upto(t)).terms, || format!("sample {s}: u differs"))?;
        ensure(u[0].val.covers(t), || "u lost validity".into())?;
        let v = ok(bd.v.apply(&a[..1], Val::Upto(t)))?;
        ensure(v[0].terms == a[0].truncate(Val::Upto(t)).terms, || format!("sample {s}: v != id"))?;
    }
    // f = t x + x y on m^2: linear part a -> t a1
    let t2 = 12;
    let full = (vec![poly("t*x + x*y", &["t", "x", "y"])], 1);
    let opts = BundleOptions { probe_validity: t2, tactile: Some(full), ..Default::default() };
    let bd = ok(bundle_for("t*x + x*y", &["t", "x", "y"], 2, Evidence::SampledPointwise, &opts))?;
    let nv = bd.v.needs(Val::Upto(t2));
    let nf = bd.f.needs(nv);
    let nu = bd.u_inv.needs(nf).finite().unwrap_or(t2).max(t2);
    for s in 0..6 {
        let y: SeriesVec = (0..2).map(|_| random::series(&mut rng, &sp, 2, nu, 0.5)).collect();
        let x = ok(bd.u_inv.apply(&y, nf))?;
        let fx = ok(bd.f.apply(&x, nv))?;
        let lhs = ok(bd.v.apply(&fx, Val::Upto(t2)))?;
        let rhs = Series::var(&sp, 0).mul(&exact(&y[0])).truncate(Val::Upto(t2));
        ensure(lhs[0].terms == rhs.terms, || format!("sample {s}: v f u^-1 (y) != t y1"))?;
    }
    Ok("u(a) = (a1 (1 + a2), a2), v = id to 20; v f u^-1 = l to 12".into())
}

fn division_theorem() -> Outcome {
    let mut rng = random::rng(3);
    let sp1 = Space::uniform(1, 1);
    let mut worst_shift = i64::MIN;
    let mut count = 0;
    for inst in 0..100 {
        let bivariate = inst % 10 == 9;
        let (basis, t): (Vec<SeriesVec>, i64) = if bivariate {
            (vec![vec![poly("y - x", &["x", "y"])], vec![poly("x^2", &["x", "y"])]], 10)
        } else {
            use rand::seq::SliceRandom;
            let mut ks: Vec<u32> = (1..=5).collect();
            ks.shuffle(&mut rng);
            let k = rng.gen_range(1..=3);
            (ks[..k].iter().map(|&e| vec![Series::monomial(&sp1, vec![e], Coef::one())]).collect(), 20)
        };
        let ctx = ok(DivisionContext::new(basis.clone()))?;
        let sp = ctx.sp.clone();
        let f = random::series(&mut rng, &sp, 0, t, 0.5);
        let d = ok(division::gh_divide(std::slice::from_ref(&f), &ctx, t))?;
        ensure(d.remainder[0].val.covers(t), || format!("instance {inst}: remainder validity {:?}", d.remainder[0].val))?;
        // identity
        let mut back = exact(&d.remainder[0]);
        for (g, b) in d.quotients.iter().zip(&basis) {
            back = back.add(&exact(g).mul(&b[0]));
        }
        ensure(back.truncate(Val::Upto(t)).terms == f.terms, || format!("instance {inst}: f != sum g_i f_i + h"))?;
        // support, checked against the quotient ring
        let h = &d.remainder[0];
        if bivariate {
            // k[[x, y]] / (y - x, x^2) has basis {1, m} for a linear monomial m
            let lin: Vec<&Mono> = h.terms.keys().filter(|m| m.deg == 1).collect();
            ensure(h.terms.keys().all(|m| m.deg <= 1) && lin.len() <= 1, || format!("instance {inst}: remainder support {:?}", h.terms.keys().map(|m| m.exp.clone()).collect::<Vec<_>>()))?;
            ensure(h.coeff(&[0, 0]) == f.coeff(&[0, 0]), || format!("instance {inst}: constant term"))?;
            let want = f.coeff(&[1, 0]).add(&f.coeff(&[0, 1]));
            let got = lin.first().map(|m| h.terms[*m].clone()).unwrap_or_default();
            ensure(got == want, || format!("instance {inst}: linear class {got:?} != {want:?}"))?;
        } else {
            let kmin = basis.iter().map(|b| b[0].ord_lb()).min().unwrap();
            let want = f.truncate(Val::Upto(kmin - 1));
            ensure(h.terms == want.terms, || format!("instance {inst}: remainder is not the part of f below t^{kmin}"))?;
        }
        // idempotence
        let again = ok(division::gh_divide(&d.remainder, &ctx, t))?;
        ensure(again.quotients.iter().all(|g| g.is_zero()) && again.remainder[0].terms == h.terms, || format!("instance {inst}: remainder not idempotent"))?;
        // scission
        let sigma = division::gh_scission(&ctx);
        let a: SeriesVec = basis.iter().map(|_| random::series(&mut rng, &sp, 0, t, 0.4)).collect();
        let mut la = Series::zero(&sp, Val::Exact);
        for (x, b) in a.iter().zip(&basis) {
            la = la.add(&exact(x).mul(&b[0]));
        }
        let mut la = la.truncate(Val::Upto(t));
        la.val = Val::Upto(t);
        let s = ok(sigma.apply(std::slice::from_ref(&la), Val::Upto(t - ctx.max_order)))?;
        let mut lsl = Series::zero(&sp, Val::Exact);
        for (x, b) in s.iter().zip(&basis) {
            lsl = lsl.add(&exact(x).mul(&b[0]));
        }
        let v = s.iter().map(|x| x.val).min().unwrap();
        ensure(v.covers(t - ctx.max_order) && lsl.truncate(v).terms == la.truncate(v).terms, || format!("instance {inst}: l sigma l != l"))?;
        let b = random::series(&mut rng, &sp, 1, t, 0.4);
        let sb = ok(sigma.apply(std::slice::from_ref(&b), Val::Upto(t - ctx.max_order)))?;
        if let (Order::Attained(ob), Order::Attained(os)) = (b.order(), felt::series::vec_order(&sb)) {
            worst_shift = worst_shift.max(ob - os);
            ensure(ob - os <= ctx.max_order, || format!("instance {inst}: sigma lowers order by {} > {}", ob - os, ctx.max_order))?;
        }
        count += 1;
    }
    Ok(format!("{count} instances; largest measured order shift {worst_shift}"))
}

/// Rank of a rational matrix by Gaussian elimination.
fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let piv = rows[r][c].clone();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone() / piv.clone();
                for k in c..ncols {
                    let v = rows[r][k].clone() * f.clone();
                    rows[i][k] -= v;
                }
            }
        }
        r += 1;
    }
    r
}

fn canonical_form() -> Outcome {
    let mut rng = random::rng(4);
    let window = 30;
    for d in 1..=3usize {
        for trial in 0..3 {
            let h: Vec<Coef> = (0..d).map(|_| Coef::from_q(random::small_q(&mut rng, 5, 4))).collect();
            let b: Vec<Coef> = (0..window + 10).map(|_| Coef::from_q(random::small_q(&mut rng, 5, 4))).collect();
            let tag = format!("d = {d}, trial {trial}");
            let l = RowFiniteMatrix::difference_operator(&h, 1);
            let cf = ok(nmatrix::canonical_form(&l, window, None))?;
            for i in 0..=window {
                let row: Vec<_> = cf.canon[i].iter().collect();
                ensure(row == vec![(&(i + d), &Coef::one())], || format!("{tag}: canonical row {i} = {row:?}"))?;
            }
            for j in 0..window + d + 1 {
                let mut e = vec![Coef::zero(); cf.cols.max(window + d + 1)];
                e[j] = Coef::one();
                ensure(cf.apply_p(&l.apply(&cf.apply_q(&e), window + 1)) == cf.apply_canon(&e, window + 1), || format!("{tag}: P l Q e_{j} != canon e_{j}"))?;
            }
            // first 30 scalar equations: sum_k s_k a_(i+k) = b_i, stencil s = (h, 1)
            let nvar = window + d;
            let mut stencil: Vec<BigRational> = h.iter().map(big).collect();
            stencil.push(BigRational::one());
            let eqs: Vec<Vec<BigRational>> = (0..window)
                .map(|i| (0..nvar).map(|j| if j >= i && j - i <= d { stencil[j - i].clone() } else { BigRational::zero() }).collect())
                .collect();
            let nullity = nvar - rank(eqs.clone());
            let sol = ok(nmatrix::difference_solve(&h, &b, window, 1))?;
            ensure(nullity == d && sol.kernel.len() == d, || format!("{tag}: brute-force nullity {nullity}, solver kernel {}", sol.kernel.len()))?;
            let apply = |a: &[Coef]| -> Vec<BigRational> {
                eqs.iter().map(|row| row.iter().zip(a).fold(BigRational::zero(), |acc, (x, y)| acc + x.clone() * big(y))).collect()
            };
            let bb: Vec<BigRational> = b[..window].iter().map(big).collect();
            ensure(apply(&sol.particular[..nvar]) == bb, || format!("{tag}: particular solution fails the linear system"))?;
            for k in &sol.kernel {
                ensure(apply(&k[..nvar]).iter().all(|x| x.is_zero()), || format!("{tag}: kernel vector fails the homogeneous system"))?;
            }
            let kr = rank(sol.kernel.iter().map(|k| k[..nvar].iter().map(big).collect()).collect());
            ensure(kr == d, || format!("{tag}: kernel vectors have rank {kr}"))?;
        }
    }
    Ok("d = 1, 2, 3: pivots (i, i + d), P l Q = canon, solution space equals the brute-force one".into())
}

fn cusp_residual(arc: &[Series], t: i64) -> Series {
    let x = exact(&arc[0]);
    let y = exact(&arc[1]);
    y.mul(&y).sub(&x.mul(&x).mul(&x)).truncate(Val::Upto(t))
}

fn arc_lifting() -> Outcome {
    let mut rng = random::rng(5);
    let f = fixtures::cusp();
    let t = 24;
    let mut lifts = Vec::new();
    for trial in 0..50 {
        let level = rng.gen_range(4..=8);
        let jet = fixtures::cusp_jet(&mut rng, level);
        let tag = ok(arcspace::classify_jet(&f, &jet))?;
        ensure(tag.ord_f.at_least(level + tag.e_prime + 1), || format!("trial {trial}: jet misses the threshold"))?;
        let lift = ok(arcspace::lift_jet_hypersurface(&f, &jet, t)).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(lift.arc.iter().all(|s| s.val.covers(t)), || format!("trial {trial}: arc validity"))?;
        ensure(cusp_residual(&lift.arc, t).is_zero(), || format!("trial {trial}: y^2 - x^3 != 0 on the lift"))?;
        for (a, b) in lift.arc.iter().zip(&jet.values) {
            ensure(a.truncate(Val::Upto(level)).terms == b.truncate(Val::Upto(level)).terms, || format!("trial {trial}: lift leaves the jet"))?;
        }
        lifts.push((lift.arc, level));
    }
    for (arc, level) in lifts.iter().take(10) {
        let (ch, z) = ok(arcspace::trivialize(&f, arc, *level, t))?;
        let back = ok(arcspace::trivialize_inv(&ch, &z, t))?;
        for (a, b) in back.iter().zip(arc) {
            ensure(a.val.covers(t) && a.terms == b.truncate(Val::Upto(t)).terms, || "phi^-1 phi != id".into())?;
        }
    }
    let g = poly("x^2 - y^2", &["x", "y"]);
    let sp = arc_space();
    let jet = Jet::new(vec![Series::var(&sp, 0), Series::var(&sp, 0)], 1);
    // T = phi_x phi_y^-1 between the charts pivoting on x and on y
    let (ca, cb) = (ok(arcspace::chart(&g, &jet, Some(0), 6))?, ok(arcspace::chart(&g, &jet, Some(1), 6))?);
    let tmap = |z: &[Series]| -> Result<SeriesVec, String> { ok(arcspace::fiber_coords(&ca, &ok(arcspace::trivialize_inv(&cb, z, 12))?, 12)) };
    let t0 = tmap(&[Series::zero(&sp, Val::Upto(12))])?;
    ensure(t0[0].is_zero(), || format!("T(0) = {:?}", t0[0]))?;
    for s in 0..20 {
        let z1 = random::series(&mut rng, &sp, 2, 12, 0.5);
        let z2 = random::series(&mut rng, &sp, 2, 12, 0.5);
        let c = random::small_q(&mut rng, 5, 3);
        let (t1, t2) = (tmap(&[z1.clone()])?, tmap(&[z2.clone()])?);
        let t12 = tmap(&[z1.add(&z2)])?;
        let tc = tmap(&[z1.scale_q(&c)])?;
        ensure(t12[0].sub(&t1[0]).sub(&t2[0]).is_zero(), || format!("sample {s}: T(z1 + z2) != T(z1) + T(z2)"))?;
        ensure(tc[0].sub(&t1[0].scale_q(&c)).is_zero(), || format!("sample {s}: T(c z) != c T(z)"))?;
        ensure(t1[0].val.covers(12), || format!("sample {s}: T lost validity"))?;
        ensure(z1.is_zero() || !t1[0].is_zero(), || format!("sample {s}: T is not injective"))?;
    }
    let smooth = poly("y - x^2", &["x", "y"]);
    for trial in 0..5 {
        let x = random::series(&mut rng, &sp, 1, 6, 0.8);
        let x = exact(&x).add(&Series::var(&sp, 0));
        let jet = Jet::truncation(&[x.clone(), x.mul(&x)], 6);
        let lift = ok(arcspace::lift_jet_hypersurface(&smooth, &jet, t))?;
        let tag = lift.tag.unwrap();
        let r = exact(&lift.arc[1]).sub(&exact(&lift.arc[0]).mul(&exact(&lift.arc[0]))).truncate(Val::Upto(t));
        ensure(tag.e_prime == 0 && r.is_zero(), || format!("smooth trial {trial}: e' = {}", tag.e_prime))?;
    }
    Ok("50 cusp jets lift with zero residual to 24; round trip exact; transition linear on 20 samples; smooth e' = 0".into())
}

/// `y` with `y^2 = x^3` and `y = y0` to order `level`, by Newton steps
/// `y <- y - (y^2 - x^3) / (2 y)` on polynomials of degree `< cap`.
fn newton_sqrt_cube(x: &Series, y0: &Series, cap: i64) -> Series {
    let sp = arc_space();
    let x3 = x.mul(x).mul(x).truncate(Val::Upto(cap));
    let mut y = y0.clone();
    for _ in 0..8 {
        let num = y.mul(&y).sub(&x3).truncate(Val::Upto(cap + 3));
        let dy = y.scale_q(&q(2));
        let o = dy.ord_lb() as usize;
        // divide both by t^o, then by the unit
        let shift = |s: &Series| -> Series {
            let cs = s.coeffs((cap + 3) as u32);
            Series::from_coeffs(&sp, &cs[o.min(cs.len())..], Val::Exact)
        };
        let u = shift(&dy);
        let step = shift(&num).mul(&exact(&u.inverse(cap + 3).unwrap())).truncate(Val::Upto(cap));
        y = y.sub(&step).truncate(Val::Upto(cap));
    }
    y
}

fn general_lifting() -> Outcome {
    let mut rng = random::rng(6);
    let names3 = ["x", "y", "z"];
    let fs = vec![poly("y^2 - x^3", &names3), poly("z - x*y", &names3)];
    let sp = arc_space();
    let t = 16;
    for trial in 0..5 {
        let mut u = Series::one(&sp);
        for k in 1..=2u32 {
            u.add_term(Mono::new(&sp, vec![k]), &Coef::from_q(random::small_q(&mut rng, 2, 2)));
        }
        let tu = Series::var(&sp, 0).mul(&u);
        let level = 5;
        let jet = Jet::truncation(&[tu.pow(2), tu.pow(3), tu.pow(5)], level);
        let lift = ok(arcspace::lift_jet_general(&fs, &jet, t))?;
        // Jacobian at the jet by hand: rows (-3x^2, 2y, 0), (-y, -x, 1)
        let (x, y) = (&jet.values[0], &jet.values[1]);
        let jac = [
            [x.mul(x).scale_q(&q(-3)), y.scale_q(&q(2)), Series::zero(&sp, Val::Exact)],
            [y.neg(), x.neg(), Series::one(&sp)],
        ];
        let ord = |s: &Series| match s.order() {
            Order::Attained(o) => o,
            _ => i64::MAX,
        };
        let g1 = jac.iter().flatten().map(ord).min().unwrap();
        let g2 = [(0, 1), (0, 2), (1, 2)].iter().map(|&(i, j)| ord(&jac[0][i].mul(&jac[1][j]).sub(&jac[0][j].mul(&jac[1][i])))).min().unwrap();
        let eps: Vec<i64> = lift.eps.iter().map(|&e| e as i64).collect();
        ensure(eps.len() == 2 && eps[0] == g1 && eps[0] + eps[1] == g2, || format!("trial {trial}: eps {eps:?}, minor orders {g1}, {g2}"))?;
        // Newton oracle: x is the free coordinate of the fiber; y and z follow
        let xl = exact(&lift.arc[0]);
        ensure(xl.truncate(Val::Upto(level)).terms == jet.values[0].truncate(Val::Upto(level)).terms, || "x leaves the jet".into())?;
        let yn = newton_sqrt_cube(&xl, &jet.values[1], t + 4);
        let zn = xl.mul(&yn);
        ensure(lift.arc[1].truncate(Val::Upto(t)).terms == yn.truncate(Val::Upto(t)).terms, || format!("trial {trial}: y differs from Newton"))?;
        ensure(lift.arc[2].truncate(Val::Upto(t)).terms == zn.truncate(Val::Upto(t)).terms, || format!("trial {trial}: z differs from Newton"))?;
        ensure(lift.residual.iter().all(|r| r.is_zero()), || "nonzero residual".into())?;
    }
    Ok("eps = (0, 3) matches the gcd of minors; lift equals the Newton solution to 16 on 5 jets".into())
}

/// Coefficients of `x^(q) = P(x, ..., x^(q-1))` by the recursion
/// `x_k = [t^(k-q)] P / (k (k-1) ... (k-q+1))`, in exact rationals.
fn ode_oracle(n: usize, qq: usize, polys: &[Series], init: &[Vec<Q>], upto: usize) -> Vec<Vec<BigRational>> {
    let fact = |k: usize| -> BigRational { (1..=k).fold(BigRational::one(), |a, i| a * bq(i as i64, 1)) };
    let mut c: Vec<Vec<BigRational>> = (0..n).map(|i| (0..qq).map(|j| init[i][j].to_big() / fact(j)).collect()).collect();
    let mul = |a: &[BigRational], b: &[BigRational], len: usize| -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); len];
        for (i, x) in a.iter().enumerate().take(len) {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate().take(len - i) {
                out[i + j] += x.clone() * y.clone();
            }
        }
        out
    };
    for k in qq..=upto {
        let len = k - qq + 1;
        // derivatives of the current truncation
        let mut vars: Vec<Vec<BigRational>> = Vec::new();
        for l in 0..qq {
            for ci in c.iter() {
                let d: Vec<BigRational> = (0..len).map(|j| ci.get(j + l).cloned().unwrap_or_default() * (fact(j + l) / fact(j))).collect();
                vars.push(d);
            }
        }
        for i in 0..n {
            let mut acc = BigRational::zero();
            for (m, coef) in &polys[i].terms {
                let mut term = vec![BigRational::zero(); len];
                term[0] = big(coef);
                for (v, &e) in m.exp.iter().enumerate() {
                    for _ in 0..e {
                        term = mul(&term, &vars[v], len);
                    }
                }
                acc += term[len - 1].clone();
            }
            c[i].push(acc * fact(k - qq) / fact(k));
        }
    }
    c
}

fn ode_systems() -> Outcome {
    let start = Instant::now();
    let t = 25usize;
    let fact = |k: usize| -> BigRational { (1..=k).fold(BigRational::one(), |a, i| a * bq(i as i64, 1)) };
    let run = |src: &str, init: &str| -> Result<SeriesVec, String> { ok(ode::solve_ode(&ok(ode::OdeSystem::parse(src, init))?, t as i64)).map(|s| s.x) };
    let x = run("x' = x", "1")?;
    ensure((0..=t).all(|k| big(&x[0].at(k as u32)) == BigRational::one() / fact(k)), || "x' = x is not exp".into())?;
    let x = run("q=2\nx'' = -x", "0,1")?;
    ensure(
        (0..=t).all(|k| big(&x[0].at(k as u32)) == if k % 2 == 0 { BigRational::zero() } else { bq(if k % 4 == 1 { 1 } else { -1 }, 1) / fact(k) }),
        || "x'' = -x is not sin".into(),
    )?;
    let x = run("x' = x^2", "1")?;
    ensure((0..=t).all(|k| x[0].at(k as u32) == Coef::one()), || "x' = x^2 is not 1/(1 - t)".into())?;
    let mut rng = random::rng(7);
    let v = 20usize;
    for trial in 0..50 {
        let n = rng.gen_range(1..=3usize);
        let qq = rng.gen_range(1..=3usize);
        let sp = Space::uniform(n * qq, 1);
        let polys: Vec<Series> = (0..n)
            .map(|_| {
                let mut s = Series::zero(&sp, Val::Exact);
                for _ in 0..rng.gen_range(1..=3) {
                    let mut e = vec![0u32; n * qq];
                    for _ in 0..rng.gen_range(0..=3) {
                        e[rng.gen_range(0..n * qq)] += 1;
                    }
                    s.add_term(Mono::new(&sp, e), &Coef::from_q(random::small_q(&mut rng, 3, 2)));
                }
                s
            })
            .collect();
        let init: Vec<Vec<Q>> = (0..n).map(|_| (0..qq).map(|_| random::small_q(&mut rng, 2, 2)).collect()).collect();
        let sys = ok(ode::OdeSystem::new(n, qq, polys.clone(), init.clone()))?;
        let sol = ok(ode::solve_ode(&sys, v as i64)).map_err(|e| format!("trial {trial}: {e}"))?;
        let or = ode_oracle(n, qq, &polys, &init, v);
        for i in 0..n {
            ensure(sol.x[i].val.covers(v as i64), || format!("trial {trial}: validity"))?;
            for k in 0..=v {
                ensure(big(&sol.x[i].at(k as u32)) == or[i][k], || format!("trial {trial}: n={n} q={qq} component {i} coefficient {k}; P = {polys:?}"))?;
            }
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(30), || format!("took {el:?}"))?;
    Ok(format!("closed forms to 25 and 50 random systems to 20 in {:.1}s", el.as_secs_f64()))
}

fn tougeron_instances() -> Outcome {
    let t = 16;
    // y = -x + x (1 - x)^(1/2)
    let inst = ok(tougeron::TougeronInstance::parse("y^2 + 2*x*y + x^3", "c[1,1] = 1/4*x\nB = x"))?;
    let lift = ok(tougeron::tougeron_lift(&inst, t))?;
    let sp = lift.y[0].sp.clone();
    let r = eval_products(std::slice::from_ref(&inst.f), inst.nx, &lift.y, &sp, t);
    ensure(r[0].is_zero(), || "F(x, y) != 0 for the first instance".into())?;
    let mut binom = BigRational::one();
    let mut want = vec![BigRational::zero(); t as usize + 1];
    for k in 1..t as usize {
        // binom(1/2, k) (-1)^k
        binom = binom * bq(2 * k as i64 - 3, 2 * k as i64);
        want[k + 1] = binom.clone();
    }
    ensure((0..=t as u32).all(|k| big(&lift.y[0].at(k)) == want[k as usize]), || "first instance differs from -x + x (1 - x)^(1/2)".into())?;
    ensure(lift.membership == tougeron::Membership::Verified, || format!("membership {:?}", lift.membership))?;
    // y = x1 z(x2), z^2 + z + x2 = 0: z = -sum C_(k-1) x2^k
    let inst = ok(tougeron::TougeronInstance::parse("y^2 + x1*y + x1^2*x2", "c[1,1] = x2\nB = x2"))?;
    let lift = ok(tougeron::tougeron_lift(&inst, t))?;
    let sp = lift.y[0].sp.clone();
    let r = eval_products(std::slice::from_ref(&inst.f), inst.nx, &lift.y, &sp, t);
    ensure(r[0].is_zero(), || "F(x, y) != 0 for the second instance".into())?;
    let mut want = Series::zero(&sp, Val::Exact);
    let mut cat = qf(1, 1);
    for k in 1..t as u32 {
        want.add_term(Mono::new(&sp, vec![1, k]), &Coef::from_q(-cat.clone()));
        cat = cat * qf(2 * (2 * k as i64 - 1), k as i64 + 1);
    }
    ensure(lift.y[0].terms == want.truncate(Val::Upto(t)).terms, || "second instance differs from the Catalan series".into())?;
    ensure(lift.membership == tougeron::Membership::Verified, || format!("membership {:?}", lift.membership))?;
    Ok("both instances solve F = 0 to 16 and match the series oracles; y in B A".into())
}

fn wavrik_lift() -> Outcome {
    let t = 20;
    let f = poly("y^2 - x^2 - x^3", &["x", "y"]);
    let sp = arc_space();
    let ybar = parse_poly("x + 1/2*x^2", &names(&["x"]), &sp).unwrap();
    let w = ok(wavrik::wavrik_lift(&f, &ybar, 3, t))?;
    let y = exact(&w.y);
    let x = Series::var(&sp, 0);
    let res = y.mul(&y).sub(&x.mul(&x)).sub(&x.pow(3)).truncate(Val::Upto(t));
    ensure(w.y.val.covers(t) && res.is_zero(), || "F(x, y) != 0".into())?;
    ensure(y.sub(&ybar).truncate(Val::Upto(2)).is_zero(), || "y != y_bar mod x^3".into())?;
    let mut c = BigRational::one();
    for k in 0..t {
        ensure(big(&w.y.at(k as u32 + 1)) == c, || format!("coefficient of x^{} is not binomial", k + 1))?;
        c = c * bq(1 - 2 * k, 2 * (k + 1));
    }
    let zero = Series::zero(&sp, Val::Exact);
    match wavrik::wavrik_lift(&poly("y^2 - x^3", &["x", "y"]), &zero, 2, 10) {
        Err(Error::PreconditionGap(_)) => Ok("x (1 + x)^(1/2) to 20, agreement mod x^3; y_bar = 0 gives PRECONDITION_GAP".into()),
        other => Err(format!("degenerate case returned {other:?}")),
    }
}

fn germ_inversion() -> Outcome {
    let id = |n: usize| -> Vec<Vec<Q>> { (0..n).map(|i| (0..n).map(|j| q((i == j) as i64)).collect()).collect() };
    let mut runs = 0;
    let mut check = |f: &[Series], b: &[Series], lam: &[Vec<Q>], n: i64| -> Result<SeriesVec, String> {
        let r = ok(germ::invert_germ(f, b, lam, n))?;
        let sp = r.u[0].sp.clone();
        let fu = eval_products(f, 0, &r.u, &sp, n);
        for (a, bb) in fu.iter().zip(b) {
            ensure(a.terms == bb.truncate(Val::Upto(n)).terms, || format!("run {runs}: f(u) = {a:?} != b, u = {:?}", r.u))?;
        }
        ensure(germ::linear_part(&r.u) == lam, || format!("du(0) = {:?}", germ::linear_part(&r.u)))?;
        runs += 1;
        Ok(r.u)
    };
    let u = check(&[poly("x^2", &["x"])], &[poly("x^2 + 2*x^3 + x^4", &["x"])], &id(1), 16)?;
    ensure(u[0].terms == poly("x + x^2", &["x"]).terms, || format!("u = {:?}", u[0]))?;
    let nm = ["x1", "x2"];
    let f = [poly("x1", &nm), poly("x1*x2", &nm)];
    let u = check(&f, &[poly("x1 + x2^2", &nm), poly("x1*x2 + x2^3", &nm)], &id(2), 16)?;
    ensure(u[0].terms == poly("x1 + x2^2", &nm).terms && u[1].terms == poly("x2", &nm).terms, || format!("u = {u:?}"))?;
    check(&[poly("x", &["x"])], &[poly("2*x + x^3", &["x"])], &[vec![q(2)]], 12)?;
    // u = (x1 + x2^2, x1 + x2) with lambda = [[1, 0], [1, 1]]
    let b = [poly("x1 + x2^2", &nm), poly("x1^2 + x1*x2 + x1*x2^2 + x2^3", &nm)];
    let lam = vec![vec![q(1), q(0)], vec![q(1), q(1)]];
    let u = check(&f, &b, &lam, 14)?;
    ensure(u[1].terms == poly("x1 + x2", &nm).terms, || format!("u = {u:?}"))?;
    Ok(format!("u = x + x^2 exactly, u = (x1 + x2^2, x2) to 16; du(0) = lambda in all {runs} runs"))
}

fn test_ring_deformation() -> Outcome {
    let n = 16;
    let data = fixtures::drinfeld_fixture("e*t", "-e^2*t");
    let def = ok(drinfeld::drinfeld_deform(&data, &fixtures::drinfeld_xi(), n))?;
    let sp = drinfeld::ring_space(3);
    let tp = |s: &str| parse_poly(s, &names(&["t"]), &sp).unwrap();
    // closed form: x1 = e c, x2 = t - e, y = -e^2 c0^2 / t with c = t + (t - e)^3 (1 + t), c0 = c mod e
    let c = tp("t").add(&tp("t - e").pow(3).mul(&tp("1 + t")));
    let e = Coef::eps(1, 3);
    let want = [c.scale(&e), tp("t - e"), tp("t + 2*t^3 + 2*t^4 + t^5 + 2*t^6 + t^7").scale(&Coef::eps(2, 3)).neg()];
    for (k, (g, w)) in def.gamma.iter().zip(&want).enumerate() {
        ensure(g.val.covers(n) && g.terms == w.truncate(Val::Upto(n)).terms, || format!("component {k} differs from the closed form"))?;
        ensure(w.max_total_degree() < n as u32, || "closed form not captured by the validity".into())?;
    }
    // g(gamma) = y x2 + x1^2 as an exact polynomial identity over Q[e]/e^3
    let g = want[2].mul(&want[1]).add(&want[0].mul(&want[0]));
    ensure(g.is_zero() && g.val == Val::Exact, || format!("g(gamma) = {g:?}"))?;
    let g0: SeriesVec = data.gamma0.iter().map(|s| s.in_space(&sp)).collect();
    for (a, b) in def.gamma.iter().zip(&g0) {
        ensure(a.mod_nil().terms == b.terms, || "gamma != gamma0 mod e".into())?;
    }
    let base = fixtures::drinfeld_base_point();
    let z = vec![Series::zero(&sp, Val::Exact); 2];
    let d0 = ok(drinfeld::drinfeld_deform(&base, &z, 12))?;
    for (a, b) in d0.gamma.iter().zip(&g0) {
        ensure(a.terms == b.terms, || "base point does not reproduce gamma0".into())?;
    }
    match drinfeld::drinfeld_deform(&fixtures::drinfeld_fixture("e*t", "0"), &z, 8) {
        Err(Error::ConditionsViolated(m)) if m.contains("E2") => Ok("g(gamma) = 0 exactly, gamma = gamma0 mod e; base point kept; E2 violation refused".into()),
        other => Err(format!("E2-violating input returned {other:?}")),
    }
}

fn negative_control() -> Outcome {
    let fx = ok(fixtures::non_constant_rank())?;
    let probe = ok(fx.probe(4, 11))?;
    ensure(!probe.pass, || "pointwise rank probe passed".into())?;
    let w = probe.witness.ok_or("probe gave no witness")?;
    // at 0 the tangent image lies in (x1 x2); at the witness it contains 2 (a - b) w
    let d = w[0].sub(&w[1]);
    ensure(d.terms.keys().any(|m| m.exp[0] == 0 || m.exp[1] == 0), || format!("witness a - b = {d:?} lies in (x1 x2)"))?;
    match fx.bundle(11) {
        Err(Error::LinearizationProbeFailed(m)) if m.contains("a = (") => Ok("probe fails with a witness; build_bundle returns LINEARIZATION_PROBE_FAILED".into()),
        Err(e) => Err(format!("unexpected {}: {e}", e.code())),
        Ok(_) => Err("a bundle was built for a map without constant rank".into()),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("inverse-mapping engine", inverse_mapping_engine),
        ("golden linearization", golden_linearization),
        ("division theorem", division_theorem),
        ("canonical form", canonical_form),
        ("arc lifting and fibration", arc_lifting),
        ("general-case lifting", general_lifting),
        ("ODE", ode_systems),
        ("Tougeron", tougeron_instances),
        ("Wavrik", wavrik_lift),
        ("germ inversion", germ_inversion),
        ("test-ring deformation", test_ring_deformation),
        ("negative control", negative_control),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match r {
            Ok(d) => println!("PASS {:>2} {name}: {d} ({secs:.2}s)", i + 1),
            Err(w) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {w} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!("{} of 12 criteria passed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
