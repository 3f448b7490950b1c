//! Row-finite N x N matrices over the coefficient ring, the infinite Gauss
//! algorithm bringing them to canonical form, and the scissions it yields.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::series::{parse::parse_coef, Coef, Series, Sp, Val};
use crate::textile::{self, EvalFn, Kappa, TextileMap};

pub type Row = BTreeMap<usize, Coef>;

/// Row `i >= from` has `stencil[k]` in column `i + offset + k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub from: usize,
    pub offset: i64,
    pub stencil: Vec<Coef>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RowFiniteMatrix {
    pub nil: u32,
    pub rows: BTreeMap<usize, Row>,
    pub tail: Option<Band>,
}

impl RowFiniteMatrix {
    pub fn new(nil: u32) -> Self {
        RowFiniteMatrix { nil, rows: BTreeMap::new(), tail: None }
    }

    pub fn identity(nil: u32) -> Self {
        RowFiniteMatrix { nil, rows: BTreeMap::new(), tail: Some(Band { from: 0, offset: 0, stencil: vec![Coef::one()] }) }
    }

    pub fn zero(nil: u32) -> Self {
        RowFiniteMatrix::new(nil)
    }

    /// `Delta = s^d + h_{d-1} s^{d-1} + ... + h_0` acting on sequences.
    pub fn difference_operator(h: &[Coef], nil: u32) -> Self {
        let mut stencil = h.to_vec();
        stencil.push(Coef::one());
        RowFiniteMatrix { nil, rows: BTreeMap::new(), tail: Some(Band { from: 0, offset: 0, stencil }) }
    }

    pub fn row(&self, i: usize) -> Row {
        if let Some(r) = self.rows.get(&i) {
            return r.clone();
        }
        let mut r = Row::new();
        if let Some(b) = &self.tail {
            if i >= b.from {
                for (k, c) in b.stencil.iter().enumerate() {
                    let j = i as i64 + b.offset + k as i64;
                    if j >= 0 && !c.is_zero() {
                        r.insert(j as usize, c.clone());
                    }
                }
            }
        }
        r
    }

    /// Explicit rows covered by the tail must agree with it.
    pub fn check_tail(&self) -> Result<()> {
        if let Some(b) = &self.tail {
            let band = RowFiniteMatrix { nil: self.nil, rows: BTreeMap::new(), tail: Some(b.clone()) };
            for (&i, r) in &self.rows {
                if i >= b.from && *r != band.row(i) {
                    return Err(Error::Parse(format!("row {i} contradicts the band rule")));
                }
            }
        }
        Ok(())
    }

    /// Largest column reachable from rows `0..=n`.
    pub fn col_bound(&self, n: usize) -> usize {
        (0..=n).filter_map(|i| self.row(i).keys().next_back().copied()).max().unwrap_or(0)
    }

    /// `l(a)` on rows `0..rows`; missing entries of `a` are zero.
    pub fn apply(&self, a: &[Coef], rows: usize) -> Vec<Coef> {
        (0..rows)
            .map(|i| {
                let mut acc = Coef::zero();
                for (j, c) in self.row(i) {
                    if let Some(x) = a.get(j) {
                        acc.add_mul(&c, x, self.nil);
                    }
                }
                acc
            })
            .collect()
    }

    /// Worst `i - N_i` over rows `0..=n`, in arc-order units.
    pub fn kappa(&self, n: usize) -> i64 {
        let mut k = i64::MAX;
        for i in 0..=n {
            if let Some(&j) = self.row(i).keys().next_back() {
                k = k.min(i as i64 - j as i64);
            }
        }
        if let Some(b) = &self.tail {
            k = k.min(-(b.offset + b.stencil.len() as i64 - 1));
        }
        if k == i64::MAX {
            0
        } else {
            k
        }
    }

    /// As a linear map on univariate arcs.
    pub fn to_textile(&self, sp: &Sp) -> TextileMap {
        assert_eq!(sp.n, 1);
        let m = self.clone();
        let w = sp.w[0];
        let eval: EvalFn = Arc::new(move |a: &[Series], t: Val| {
            let t = t.finite().ok_or_else(|| Error::InsufficientValidity("matrix maps need a finite validity".into()))?;
            let rows = (t / w + 1).max(0) as usize;
            let need = m.col_bound(rows);
            let coeffs = a[0].coeffs(need as u32);
            let out = m.apply(&coeffs, rows);
            Ok(vec![Series::from_coeffs(&a[0].sp, &out, Val::Upto(t))])
        });
        let kappa = self.kappa(64) * w;
        textile::linear("matrix", sp, 1, 1, 0, Kappa::Fin(kappa), eval)
    }

    /// Lines `row <i>: <j>=<coeff>, ...` and `band offset=<k> stencil=<c0,...> [from=<i>]`.
    pub fn parse(src: &str, nil: u32) -> Result<Self> {
        let mut m = RowFiniteMatrix::new(nil);
        for line in src.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            if let Some(rest) = line.strip_prefix("row") {
                let (i, ents) = rest.split_once(':').ok_or_else(|| Error::Parse(format!("bad row line '{line}'")))?;
                let i: usize = i.trim().parse().map_err(|_| Error::Parse(format!("bad row index in '{line}'")))?;
                let mut r = Row::new();
                for e in ents.split(',').map(str::trim).filter(|e| !e.is_empty()) {
                    let (j, c) = e.split_once('=').ok_or_else(|| Error::Parse(format!("bad entry '{e}'")))?;
                    let j: usize = j.trim().parse().map_err(|_| Error::Parse(format!("bad column in '{e}'")))?;
                    let c = parse_coef(c.trim(), nil)?;
                    if !c.is_zero() {
                        r.insert(j, c);
                    }
                }
                m.rows.insert(i, r);
            } else if let Some(rest) = line.strip_prefix("band") {
                let mut offset = 0;
                let mut stencil = None;
                let mut from = 0;
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("bad band field '{kv}'")))?;
                    match k {
                        "offset" => offset = v.parse().map_err(|_| Error::Parse("bad band offset".into()))?,
                        "from" => from = v.parse().map_err(|_| Error::Parse("bad band start".into()))?,
                        "stencil" => stencil = Some(v.split(',').map(|c| parse_coef(c.trim(), nil)).collect::<Result<Vec<_>>>()?),
                        _ => return Err(Error::Parse(format!("unknown band field '{k}'"))),
                    }
                }
                let stencil = stencil.ok_or_else(|| Error::Parse("band without stencil".into()))?;
                m.tail = Some(Band { from, offset, stencil });
            } else {
                return Err(Error::Parse(format!("unrecognized matrix line '{line}'")));
            }
        }
        m.check_tail()?;
        Ok(m)
    }
}

/// Elementary factors, in the order they were produced.
#[derive(Clone, Debug, PartialEq)]
pub enum PFactor {
    /// row `i` times `c`
    Scale(usize, Coef),
    /// row `l` minus `c_l` times row `i`
    Elim(usize, Vec<(usize, Coef)>),
}

/// `Q_i = id - sum_j c_j E(n, j)`: coordinate `n` minus `sum c_j a_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct QFactor {
    pub n: usize,
    pub entries: Vec<(usize, Coef)>,
}

#[derive(Clone, Debug)]
pub struct CanonicalForm {
    pub nil: u32,
    pub p: Vec<PFactor>,
    pub q: Vec<QFactor>,
    /// `(row, column)` of each pivot (all pivots equal 1).
    pub pivots: Vec<(usize, usize)>,
    /// Reduced rows `0..rows`, each empty or a single pivot.
    pub canon: Vec<Row>,
    pub window: usize,
    /// Rows processed.
    pub rows: usize,
    /// Columns the factors touch.
    pub cols: usize,
}

impl CanonicalForm {
    pub fn apply_p(&self, b: &[Coef]) -> Vec<Coef> {
        let mut v = b.to_vec();
        for f in &self.p {
            match f {
                PFactor::Scale(i, c) => {
                    if *i < v.len() {
                        v[*i] = v[*i].mul(c, self.nil);
                    }
                }
                PFactor::Elim(i, ents) => {
                    let Some(bi) = v.get(*i).cloned() else { continue };
                    for (l, c) in ents {
                        if *l < v.len() {
                            let d = c.mul(&bi, self.nil);
                            v[*l].sub_assign(&d);
                        }
                    }
                }
            }
        }
        v
    }

    pub fn apply_p_inv(&self, b: &[Coef]) -> Vec<Coef> {
        let mut v = b.to_vec();
        for f in self.p.iter().rev() {
            match f {
                PFactor::Scale(i, c) => {
                    if *i < v.len() {
                        v[*i] = v[*i].mul(&c.inv(self.nil).expect("unit scale"), self.nil);
                    }
                }
                PFactor::Elim(i, ents) => {
                    let Some(bi) = v.get(*i).cloned() else { continue };
                    for (l, c) in ents {
                        if *l < v.len() {
                            v[*l].add_mul(c, &bi, self.nil);
                        }
                    }
                }
            }
        }
        v
    }

    /// `Q = Q_0 Q_1 ... Q_K`, so the last factor acts first.
    pub fn apply_q(&self, a: &[Coef]) -> Vec<Coef> {
        let mut v = a.to_vec();
        v.resize(v.len().max(self.cols), Coef::zero());
        for f in self.q.iter().rev() {
            let mut s = Coef::zero();
            for (j, c) in &f.entries {
                s.add_mul(c, &v[*j], self.nil);
            }
            v[f.n].sub_assign(&s);
        }
        v
    }

    pub fn apply_q_inv(&self, a: &[Coef]) -> Vec<Coef> {
        let mut v = a.to_vec();
        v.resize(v.len().max(self.cols), Coef::zero());
        for f in &self.q {
            let mut s = Coef::zero();
            for (j, c) in &f.entries {
                s.add_mul(c, &v[*j], self.nil);
            }
            v[f.n].add_assign(&s);
        }
        v
    }

    /// The canonical map on a vector, rows `0..rows`.
    pub fn apply_canon(&self, a: &[Coef], rows: usize) -> Vec<Coef> {
        (0..rows)
            .map(|i| match self.canon.get(i).and_then(|r| r.iter().next()) {
                Some((j, c)) => a.get(*j).map(|x| x.mul(c, self.nil)).unwrap_or_default(),
                None => Coef::zero(),
            })
            .collect()
    }

    pub fn pivot_cols(&self) -> Vec<usize> {
        self.pivots.iter().map(|p| p.1).collect()
    }

    /// `sigma = Q sigma~ P`, where `sigma~` sends `b_i` to the pivot column of row `i`.
    pub fn scission(&self, b: &[Coef]) -> Vec<Coef> {
        let pb = self.apply_p(b);
        let mut a = vec![Coef::zero(); self.cols];
        for &(i, j) in &self.pivots {
            if let Some(x) = pb.get(i) {
                a[j] = x.clone();
            }
        }
        self.apply_q(&a)
    }

    /// `Q e_j` for columns `j <= upto` that carry no pivot.
    pub fn kernel_basis(&self, upto: usize) -> Vec<Vec<Coef>> {
        let piv: std::collections::BTreeSet<usize> = self.pivot_cols().into_iter().collect();
        (0..=upto)
            .filter(|j| !piv.contains(j))
            .map(|j| {
                let mut e = vec![Coef::zero(); self.cols];
                e[j] = Coef::one();
                self.apply_q(&e)
            })
            .collect()
    }
}

/// Runs the elimination on rows `0..bound` (default `4 (N + band)`) and
/// certifies rows `0..=N`: every column up to the reach of those rows is a
/// pivot column or vanishes in all reduced rows, and no later materialized
/// row pivots there, so the factors acting on the window are final.
pub fn canonical_form(l: &RowFiniteMatrix, window: usize, work_bound: Option<usize>) -> Result<CanonicalForm> {
    let nil = l.nil;
    let band = l.tail.as_ref().map_or(0, |b| b.stencil.len() + b.offset.unsigned_abs() as usize);
    let rows = work_bound.unwrap_or(4 * (window + band + 1)).max(window + 1);
    let mut m: Vec<Row> = (0..rows).map(|i| l.row(i)).collect();
    let cols = m.iter().filter_map(|r| r.keys().next_back().copied()).max().map_or(1, |c| c + 1);
    // column -> rows below the cursor with an entry there
    let mut by_col: BTreeMap<usize, std::collections::BTreeSet<usize>> = BTreeMap::new();
    for (i, r) in m.iter().enumerate() {
        for &j in r.keys() {
            by_col.entry(j).or_default().insert(i);
        }
    }
    let mut p = Vec::new();
    let mut q = Vec::new();
    let mut pivots = Vec::new();
    for i in 0..rows {
        let Some((&n, piv)) = m[i].iter().next_back() else { continue };
        let piv = piv.clone();
        let inv = piv.inv(nil).ok_or_else(|| Error::NonUnitPivot(format!("row {i}, column {n}")))?;
        if !piv.is_one() {
            for c in m[i].values_mut() {
                *c = c.mul(&inv, nil);
            }
            p.push(PFactor::Scale(i, inv));
        }
        // rows below with an entry in column n
        let below: Vec<usize> = by_col.get(&n).map(|s| s.range(i + 1..).copied().collect()).unwrap_or_default();
        let mut elim = Vec::new();
        let pivot_row = m[i].clone();
        for r in below {
            let c = m[r][&n].clone();
            for (&j, x) in &pivot_row {
                let d = c.mul(x, nil);
                let e = m[r].entry(j).or_insert_with(Coef::zero);
                e.sub_assign(&d);
                if e.is_zero() {
                    m[r].remove(&j);
                    if let Some(s) = by_col.get_mut(&j) {
                        s.remove(&r);
                    }
                } else {
                    by_col.entry(j).or_default().insert(r);
                }
            }
            elim.push((r, c));
        }
        if !elim.is_empty() {
            p.push(PFactor::Elim(i, elim));
        }
        // column operations clear the rest of row i
        let ents: Vec<(usize, Coef)> = m[i].iter().filter(|(&j, _)| j != n).map(|(&j, c)| (j, c.clone())).collect();
        if !ents.is_empty() {
            // col_j -= c_j col_n; below the cursor col_n is already zero
            for (j, _) in &ents {
                if let Some(s) = by_col.get_mut(j) {
                    s.remove(&i);
                }
                m[i].remove(j);
            }
            q.push(QFactor { n, entries: ents });
        }
        pivots.push((i, n));
    }
    let cf = CanonicalForm { nil, p, q, pivots, canon: m, window, rows, cols };
    certify(&cf, l, window)?;
    Ok(cf)
}

fn certify(cf: &CanonicalForm, l: &RowFiniteMatrix, window: usize) -> Result<()> {
    let reach = l.col_bound(window).max(window);
    let piv_rows: BTreeMap<usize, usize> = cf.pivots.iter().map(|&(i, j)| (j, i)).collect();
    for j in 0..=reach {
        match piv_rows.get(&j) {
            Some(&r) if r + 1 >= cf.rows => {
                return Err(Error::WindowInsufficient(format!("column {j} is pivoted only by the last processed row")));
            }
            Some(_) => {}
            None => {
                // a non-pivot column must vanish in the reduced rows; it
                // stays zero unless a row past the bound pivots there
                if cf.canon.iter().any(|r| r.contains_key(&j)) {
                    return Err(Error::WindowInsufficient(format!("column {j} is still occupied")));
                }
            }
        }
    }
    // rows late in the working range must pivot beyond the window's reach
    let tail_start = cf.rows - cf.rows / 4;
    if cf.pivots.iter().any(|&(i, j)| i >= tail_start && j <= reach) {
        return Err(Error::WindowInsufficient(format!("late rows still pivot into columns <= {reach}")));
    }
    Ok(())
}

/// Scission of `l` through its canonical form on the window.
pub fn scission_from_canonical(l: &RowFiniteMatrix, window: usize, work_bound: Option<usize>) -> Result<(CanonicalForm, impl Fn(&[Coef]) -> Vec<Coef>)> {
    let cf = canonical_form(l, window, work_bound)?;
    let c2 = cf.clone();
    Ok((cf, move |b: &[Coef]| c2.scission(b)))
}

#[derive(Clone, Debug)]
pub struct DifferenceSolution {
    pub particular: Vec<Coef>,
    pub kernel: Vec<Vec<Coef>>,
    pub window: usize,
}

/// All `a` with `Delta a = b` on rows `0..=N`: a particular solution plus
/// a basis of the kernel, each truncated to `N + d + 1` entries.
pub fn difference_solve(h: &[Coef], b: &[Coef], window: usize, nil: u32) -> Result<DifferenceSolution> {
    let d = h.len();
    let l = RowFiniteMatrix::difference_operator(h, nil);
    let cf = canonical_form(&l, window, None)?;
    let len = window + d + 1;
    let mut bb = b.to_vec();
    bb.resize(cf.rows, Coef::zero());
    let mut particular = cf.scission(&bb);
    particular.truncate(len);
    let kernel = cf
        .kernel_basis(window)
        .into_iter()
        .map(|mut v| {
            v.truncate(len);
            v
        })
        .collect();
    Ok(DifferenceSolution { particular, kernel, window })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(n: i64) -> Coef {
        Coef::int(n)
    }

    #[test]
    fn difference_operator_canonical() {
        let l = RowFiniteMatrix::difference_operator(&[c(-1), c(-1)], 1);
        let cf = canonical_form(&l, 10, None).unwrap();
        for i in 0..=10 {
            assert_eq!(cf.canon[i].iter().collect::<Vec<_>>(), vec![(&(i + 2), &Coef::one())]);
        }
        // P l Q e_j equals canon e_j
        for j in 0..14 {
            let mut e = vec![Coef::zero(); 14];
            e[j] = Coef::one();
            let lhs = cf.apply_p(&l.apply(&cf.apply_q(&e), 11));
            assert_eq!(lhs, cf.apply_canon(&e, 11));
        }
    }

    #[test]
    fn fibonacci_kernel() {
        let s = difference_solve(&[c(-1), c(-1)], &[], 12, 1).unwrap();
        assert_eq!(s.kernel.len(), 2);
        assert!(s.particular.iter().all(|x| x.is_zero()));
        let fib: Vec<Coef> = [0, 1, 1, 2, 3, 5, 8, 13].iter().map(|&x| c(x)).collect();
        // fib = fib_0 k_0 + fib_1 k_1
        let comb: Vec<Coef> = (0..8).map(|i| s.kernel[0][i].mul(&fib[0], 1).add(&s.kernel[1][i].mul(&fib[1], 1))).collect();
        assert_eq!(comb, fib);
    }

    #[test]
    fn telescoping() {
        let b: Vec<Coef> = (0..20).map(|i| c(i + 1)).collect();
        let s = difference_solve(&[c(-1)], &b, 10, 1).unwrap();
        assert!(s.particular[0].is_zero());
        for i in 0..=10 {
            assert_eq!(s.particular[i + 1].sub(&s.particular[i]), b[i]);
        }
        let s = difference_solve(&[c(-2)], &vec![c(1); 20], 10, 1).unwrap();
        for i in 0..=10 {
            assert_eq!(s.particular[i + 1], s.particular[i].scale(&crate::series::q(2)).add(&c(1)));
        }
    }

    #[test]
    fn banded_and_trivial() {
        let l = RowFiniteMatrix::parse("band offset=0 stencil=1,1", 1).unwrap();
        let cf = canonical_form(&l, 3, Some(6)).unwrap();
        for i in 0..=3 {
            assert_eq!(cf.canon[i].len(), 1);
        }
        let id = canonical_form(&RowFiniteMatrix::identity(1), 5, None).unwrap();
        assert!(id.p.is_empty() && id.q.is_empty());
        let z = canonical_form(&RowFiniteMatrix::zero(1), 5, None).unwrap();
        assert!(z.scission(&[c(1), c(2)]).iter().all(|x| x.is_zero()));
    }

    #[test]
    fn nonunit_pivot() {
        let l = RowFiniteMatrix::parse("row 0: 0=e", 2).unwrap();
        assert!(matches!(canonical_form(&l, 0, None), Err(Error::NonUnitPivot(_))));
    }
}
