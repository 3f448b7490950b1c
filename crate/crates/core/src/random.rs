//! Seeded random series for audits and property batteries.

use crate::series::{q, qf, Coef, Mono, Series, Sp, Val};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Rng8 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng8 {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// All exponents with scaled weight in `[lo, hi]`, in (L, lex) order.
pub fn monomials(sp: &Sp, lo: i64, hi: i64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; sp.n];
    fn rec(sp: &Sp, i: usize, deg: i64, lo: i64, hi: i64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == sp.n {
            if deg >= lo {
                out.push(cur.clone());
            }
            return;
        }
        let mut k = 0u32;
        while deg + k as i64 * sp.w[i] <= hi {
            cur[i] = k;
            rec(sp, i + 1, deg + k as i64 * sp.w[i], lo, hi, cur, out);
            k += 1;
        }
        cur[i] = 0;
    }
    if hi >= lo {
        rec(sp, 0, 0, lo, hi, &mut cur, &mut out);
    }
    out.sort_by_key(|e| Mono::new(sp, e.clone()));
    out
}

/// Small random rational: numerator in `[-r, r]`, denominator in `1..=den`.
pub fn small_q(rng: &mut Rng8, r: i64, den: i64) -> crate::series::Q {
    qf(rng.gen_range(-r..=r), rng.gen_range(1..=den))
}

/// Random ring element; nilpotent parts appear when `nil > 1`.
pub fn small_coef(rng: &mut Rng8, nil: u32, r: i64) -> Coef {
    let parts = (0..nil).map(|_| if rng.gen_bool(0.6) { small_q(rng, r, 2) } else { q(0) }).collect();
    Coef::from_parts(parts, nil)
}

/// Random series supported in weights `[lo, hi]` with the given density,
/// valid up to `hi`.
pub fn series(rng: &mut Rng8, sp: &Sp, lo: i64, hi: i64, density: f64) -> Series {
    let terms: Vec<(Vec<u32>, Coef)> = monomials(sp, lo, hi)
        .into_iter()
        .filter_map(|e| if rng.gen_bool(density) { Some((e, small_coef(rng, sp.nil, 3))) } else { None })
        .collect();
    Series::from_terms(sp, terms, Val::Upto(hi))
}

/// Random polynomial (exact) with weights in `[lo, hi]`.
pub fn poly(rng: &mut Rng8, sp: &Sp, lo: i64, hi: i64, density: f64) -> Series {
    let mut s = series(rng, sp, lo, hi, density);
    s.val = Val::Exact;
    s
}

/// Polynomials `g(x, a)` in `n` series variables and `m` unknowns whose
/// tactile map on `m C^m` gains at least one order: every term is either
/// at least quadratic in `a` or linear in `a` with an `x` factor.
pub fn contractive_tactile(rng: &mut Rng8, n: usize, m: usize) -> Vec<Series> {
    let sp = crate::series::Space::uniform(n + m, 1);
    (0..m)
        .map(|_| {
            let mut s = Series::zero(&sp, Val::Exact);
            let terms = rng.gen_range(1..=3);
            for _ in 0..terms {
                let mut e = vec![0u32; n + m];
                let ay = rng.gen_range(1..=3u32);
                for _ in 0..ay {
                    e[n + rng.gen_range(0..m)] += 1;
                }
                let gx = if ay == 1 { rng.gen_range(1..=2u32) } else { rng.gen_range(0..=1u32) };
                for _ in 0..gx {
                    e[rng.gen_range(0..n)] += 1;
                }
                s.add_term(Mono::new(&sp, e), &Coef::from_q(small_q(rng, 3, 2)));
            }
            s
        })
        .collect()
}
