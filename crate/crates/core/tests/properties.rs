use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use felt::division::{self, DivisionContext};
use felt::nmatrix::{self, RowFiniteMatrix};
use felt::random;
use felt::series::{io, Coef, Series, Space, Sp, Val, Q};

fn space(n: usize, nil: u32) -> Sp {
    Space::uniform(n, nil)
}

fn rand_series(seed: u64, sp: &Sp, lo: i64, hi: i64) -> Series {
    random::series(&mut random::rng(seed), sp, lo, hi, 0.5)
}

fn exact(mut s: Series) -> Series {
    s.val = Val::Exact;
    s
}

fn small(n: i64, d: i64) -> Q {
    Q::small(n, d)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rat_matches_bigrational(a in -1_000_000i64..1_000_000, b in 1i64..1000, c in -1_000_000i64..1_000_000, d in 1i64..1000) {
        let (x, y) = (small(a, b), small(c, d));
        let (bx, by) = (BigRational::new(a.into(), b.into()), BigRational::new(c.into(), d.into()));
        prop_assert_eq!((&x + &y).to_big(), &bx + &by);
        prop_assert_eq!((&x * &y).to_big(), &bx * &by);
        prop_assert_eq!((&x - &y).to_big(), &bx - &by);
        if !by.is_zero() {
            prop_assert_eq!((&x / &y).to_big(), &bx / &by);
        }
    }

    #[test]
    fn ring_axioms(s in any::<u64>(), n in 1usize..=2, nil in 1u32..=3) {
        let sp = space(n, nil);
        let a = exact(rand_series(s, &sp, 0, 5));
        let b = exact(rand_series(s ^ 1, &sp, 0, 5));
        let c = exact(rand_series(s ^ 2, &sp, 0, 5));
        prop_assert_eq!(a.mul(&b).terms, b.mul(&a).terms);
        prop_assert_eq!(a.mul(&b).mul(&c).terms, a.mul(&b.mul(&c)).terms);
        prop_assert_eq!(a.mul(&b.add(&c)).terms, a.mul(&b).add(&a.mul(&c)).terms);
        prop_assert!(a.sub(&a).is_zero());
        prop_assert_eq!(a.mul(&Series::one(&sp)).terms, a.terms.clone());
    }

    #[test]
    fn truncation_is_a_ring_map(s in any::<u64>(), t in 0i64..8) {
        let sp = space(2, 1);
        let a = rand_series(s, &sp, 0, 8);
        let b = rand_series(s ^ 7, &sp, 0, 8);
        let v = Val::Upto(t);
        prop_assert_eq!(a.mul(&b).truncate(v).terms, a.truncate(v).mul(&b.truncate(v)).truncate(v).terms);
    }

    #[test]
    fn unit_inverse(s in any::<u64>(), cap in 1i64..15, nil in 1u32..=2) {
        let sp = space(1, nil);
        let u = Series::one(&sp).add(&rand_series(s, &sp, 1, cap));
        let inv = u.inverse(cap).unwrap();
        let prod = u.mul(&exact(inv.clone())).truncate(Val::Upto(cap));
        prop_assert_eq!(prod.terms, Series::one(&sp).terms);
        prop_assert!(inv.val.covers(cap));
    }

    #[test]
    fn division_identity(s in any::<u64>(), t in 4i64..14) {
        let mut rng = random::rng(s);
        let basis = if s % 4 == 0 { felt::verify::bivariate_basis() } else { felt::verify::monomial_basis(&mut rng) };
        let ctx = DivisionContext::new(basis.clone()).unwrap();
        let f = random::series(&mut rng, &ctx.sp, 0, t, 0.5);
        let d = division::gh_divide(std::slice::from_ref(&f), &ctx, t).unwrap();
        let mut back = exact(d.remainder[0].clone());
        for (g, b) in d.quotients.iter().zip(&basis) {
            back = back.add(&exact(g.clone()).mul(&b[0]));
        }
        prop_assert_eq!(back.truncate(Val::Upto(t)).terms, f.terms);
    }

    #[test]
    fn text_and_json_round_trip(s in any::<u64>(), n in 1usize..=3, nil in 1u32..=3, comps in 1usize..=3, t in 0i64..6) {
        let sp = space(n, nil);
        let v: Vec<Series> = (0..comps as u64).map(|k| rand_series(s.wrapping_add(k), &sp, 0, t).with_val(Val::Upto(t))).collect();
        let back = io::read_text(&io::write_text(&v)).unwrap();
        prop_assert_eq!(&back, &v);
        let json = serde_json::to_string(&io::to_json(&v)).unwrap();
        let back = io::from_json(&serde_json::from_str(&json).unwrap()).unwrap();
        prop_assert_eq!(&back, &v);
    }

    #[test]
    fn canonical_form_conjugates(s in any::<u64>(), d in 1usize..=3, window in 6usize..16) {
        let mut rng = random::rng(s);
        let h: Vec<Coef> = (0..d).map(|_| Coef::from_q(random::small_q(&mut rng, 4, 3))).collect();
        let l = RowFiniteMatrix::difference_operator(&h, 1);
        let cf = nmatrix::canonical_form(&l, window, None).unwrap();
        for j in 0..window + d {
            let mut e = vec![Coef::zero(); cf.cols.max(window + d + 1)];
            e[j] = Coef::one();
            prop_assert_eq!(cf.apply_p(&l.apply(&cf.apply_q(&e), window + 1)), cf.apply_canon(&e, window + 1));
        }
    }
}
