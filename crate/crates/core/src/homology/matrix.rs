//! Dense integer matrices with Smith normal form, and sparse matrices used
//! for boundary maps.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Dense matrix of arbitrary-precision integers, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntegerMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntegerMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntegerMatrix::zero(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntegerMatrix {
            rows: r,
            cols: c,
            data: rows.iter().flatten().map(|&v| BigInt::from(v)).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntegerMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let idx = i * other.cols + j;
                        out.data[idx] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> IntegerMatrix {
        let mut out = IntegerMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    /// Permute rows and columns: `out[i][j] = self[row_perm[i]][col_perm[j]]`.
    pub fn permuted(&self, row_perm: &[usize], col_perm: &[usize]) -> IntegerMatrix {
        let mut out = IntegerMatrix::zero(self.rows, self.cols);
        for (i, &pi) in row_perm.iter().enumerate() {
            for (j, &pj) in col_perm.iter().enumerate() {
                out.set(i, j, self.get(pi, pj).clone());
            }
        }
        out
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a.get(k, k).is_zero() {
                match (k + 1..n).find(|&i| !a.get(i, k).is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (a.get(i, j) * a.get(k, k) - a.get(i, k) * a.get(k, j)) / &prev;
                    a.set(i, j, v);
                }
            }
            prev = a.get(k, k).clone();
        }
        sign * a.get(n - 1, n - 1)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[target] += k · row[source]
    fn add_row(&mut self, target: usize, source: usize, k: &BigInt) {
        for j in 0..self.cols {
            let v = &self.data[source * self.cols + j] * k;
            self.data[target * self.cols + j] += v;
        }
    }

    /// col[target] += k · col[source]
    fn add_col(&mut self, target: usize, source: usize, k: &BigInt) {
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + source] * k;
            self.data[i * self.cols + target] += v;
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -&self.data[i * self.cols + j];
            self.data[i * self.cols + j] = v;
        }
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i).clone()).collect()
    }
}

/// `U·M·V = D` with `U`, `V` unimodular and `D` diagonal with
/// `d_1 | d_2 | …` and non-negative entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub u: IntegerMatrix,
    pub d: IntegerMatrix,
    pub v: IntegerMatrix,
}

impl SmithForm {
    /// Nonzero diagonal entries.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.d.diagonal().into_iter().filter(|x| !x.is_zero()).collect()
    }
}

pub fn smith_normal_form(m: &IntegerMatrix) -> SmithForm {
    let mut d = m.clone();
    let mut u = IntegerMatrix::identity(m.rows);
    let mut v = IntegerMatrix::identity(m.cols);
    reduce(&mut d, Some(&mut u), Some(&mut v));
    SmithForm { u, d, v }
}

/// Nonzero invariant factors of `m` without tracking transforms.
pub fn invariant_factors(m: &IntegerMatrix) -> Vec<BigInt> {
    let mut d = m.clone();
    reduce(&mut d, None, None);
    d.diagonal().into_iter().filter(|x| !x.is_zero()).collect()
}

/// In-place reduction to Smith form. Row operations are mirrored on `u`,
/// column operations on `v`. Pivots are chosen with least absolute value.
fn reduce(a: &mut IntegerMatrix, mut u: Option<&mut IntegerMatrix>, mut v: Option<&mut IntegerMatrix>) {
    let (rows, cols) = (a.rows, a.cols);
    for t in 0..rows.min(cols) {
        loop {
            // Smallest nonzero entry in the lower-right block.
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    let x = a.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < a.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return;
            };
            a.swap_rows(t, pi);
            if let Some(u) = u.as_deref_mut() {
                u.swap_rows(t, pi);
            }
            a.swap_cols(t, pj);
            if let Some(v) = v.as_deref_mut() {
                v.swap_cols(t, pj);
            }
            let pivot = a.get(t, t).clone();
            let mut clean = true;
            for i in t + 1..rows {
                if a.get(i, t).is_zero() {
                    continue;
                }
                let q = -a.get(i, t).div_floor(&pivot);
                a.add_row(i, t, &q);
                if let Some(u) = u.as_deref_mut() {
                    u.add_row(i, t, &q);
                }
                if !a.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a.get(t, j).is_zero() {
                    continue;
                }
                let q = -a.get(t, j).div_floor(&pivot);
                a.add_col(j, t, &q);
                if let Some(v) = v.as_deref_mut() {
                    v.add_col(j, t, &q);
                }
                if !a.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Divisibility: fold an offending row into row t and retry.
            let offending = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a.get(i, j).is_multiple_of(&pivot)));
            if let Some(i) = offending {
                let one = BigInt::one();
                a.add_row(t, i, &one);
                if let Some(u) = u.as_deref_mut() {
                    u.add_row(t, i, &one);
                }
                continue;
            }
            if pivot.is_negative() {
                a.negate_row(t);
                if let Some(u) = u.as_deref_mut() {
                    u.negate_row(t);
                }
            }
            break;
        }
    }
}

/// Column-oriented sparse integer matrix: `columns[j]` lists `(row, value)`
/// with distinct rows and nonzero values.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub columns: Vec<Vec<(usize, i64)>>,
}

impl SparseMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn to_dense(&self) -> IntegerMatrix {
        let mut m = IntegerMatrix::zero(self.rows, self.cols());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, v) in col {
                m.set(i, j, BigInt::from(v));
            }
        }
        m
    }

    /// `self · other` as a sparse matrix.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.cols(), other.rows);
        let columns = other
            .columns
            .iter()
            .map(|col| {
                let mut acc: std::collections::BTreeMap<usize, i64> = Default::default();
                for &(k, b) in col {
                    for &(i, a) in &self.columns[k] {
                        *acc.entry(i).or_insert(0) += a * b;
                    }
                }
                acc.into_iter().filter(|&(_, v)| v != 0).collect()
            })
            .collect();
        SparseMatrix {
            rows: self.rows,
            columns,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(|c| c.is_empty())
    }
}

/// Rank and invariant factors (> 1) of a sparse integer matrix.
///
/// Unit pivots are eliminated first in machine integers; what remains is
/// reduced densely with arbitrary precision. If a machine operation would
/// overflow, the whole matrix is reduced densely instead.
pub fn sparse_invariant_factors(m: &SparseMatrix) -> (usize, Vec<BigInt>) {
    match unit_elimination(m) {
        Some((pivots, rest)) => {
            let factors = invariant_factors(&rest);
            let rank = pivots + factors.len();
            (rank, factors.into_iter().filter(|f| !f.is_one()).collect())
        }
        None => {
            let factors = invariant_factors(&m.to_dense());
            let rank = factors.len();
            (rank, factors.into_iter().filter(|f| !f.is_one()).collect())
        }
    }
}

/// Eliminate ±1 pivots. Returns the pivot count and the remaining nonzero
/// block, or `None` on overflow.
fn unit_elimination(m: &SparseMatrix) -> Option<(usize, IntegerMatrix)> {
    use std::collections::{BTreeSet, HashMap};
    let mut rows: Vec<HashMap<usize, i64>> = vec![HashMap::new(); m.rows];
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.cols()];
    for (j, col) in m.columns.iter().enumerate() {
        for &(i, v) in col {
            if v != 0 {
                rows[i].insert(j, v);
                cols[j].insert(i);
            }
        }
    }
    let mut pivots = 0;
    loop {
        // Unit entry with least fill-in.
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in rows.iter().enumerate() {
            for (&j, &v) in row {
                if v == 1 || v == -1 {
                    let cost = (row.len() - 1) * (cols[j].len() - 1);
                    if best.is_none_or(|(_, _, c)| cost < c) {
                        best = Some((i, j, cost));
                    }
                }
            }
            if matches!(best, Some((_, _, 0))) {
                break;
            }
        }
        let Some((pr, pc, _)) = best else {
            break;
        };
        let pv = rows[pr][&pc];
        let pivot_row: Vec<(usize, i64)> = rows[pr].iter().map(|(&j, &v)| (j, v)).collect();
        let targets: Vec<usize> = cols[pc].iter().copied().filter(|&i| i != pr).collect();
        for i in targets {
            let factor = rows[i][&pc].checked_mul(pv)?;
            for &(j, v) in &pivot_row {
                let entry = rows[i].entry(j).or_insert(0);
                *entry = entry.checked_sub(factor.checked_mul(v)?)?;
                if *entry == 0 {
                    rows[i].remove(&j);
                    cols[j].remove(&i);
                } else {
                    cols[j].insert(i);
                }
            }
        }
        for &(j, _) in &pivot_row {
            cols[j].remove(&pr);
        }
        rows[pr].clear();
        cols[pc].clear();
        pivots += 1;
    }
    let live_rows: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].is_empty()).collect();
    let live_cols: Vec<usize> = (0..cols.len()).filter(|&j| !cols[j].is_empty()).collect();
    let col_pos: HashMap<usize, usize> = live_cols.iter().enumerate().map(|(k, &j)| (j, k)).collect();
    let mut rest = IntegerMatrix::zero(live_rows.len(), live_cols.len());
    for (k, &i) in live_rows.iter().enumerate() {
        for (&j, &v) in &rows[i] {
            rest.set(k, col_pos[&j], BigInt::from(v));
        }
    }
    Some((pivots, rest))
}

/// Rank of a sparse integer matrix over the field with `p` elements.
pub fn sparse_rank_mod_p(m: &SparseMatrix, p: u64) -> usize {
    use std::collections::{BTreeSet, HashMap};
    let mut rows: Vec<HashMap<usize, u64>> = vec![HashMap::new(); m.rows];
    let mut cols: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m.cols()];
    for (j, col) in m.columns.iter().enumerate() {
        for &(i, v) in col {
            let r = v.rem_euclid(p as i64) as u64;
            if r != 0 {
                rows[i].insert(j, r);
                cols[j].insert(i);
            }
        }
    }
    let mut rank = 0;
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        for (i, row) in rows.iter().enumerate() {
            for &j in row.keys() {
                let cost = (row.len() - 1) * (cols[j].len() - 1);
                if best.is_none_or(|(_, _, c)| cost < c) {
                    best = Some((i, j, cost));
                }
            }
            if matches!(best, Some((_, _, 0))) {
                break;
            }
        }
        let Some((pr, pc, _)) = best else {
            break;
        };
        let inv = mod_inverse(rows[pr][&pc], p);
        let pivot_row: Vec<(usize, u64)> = rows[pr].iter().map(|(&j, &v)| (j, v)).collect();
        let targets: Vec<usize> = cols[pc].iter().copied().filter(|&i| i != pr).collect();
        for i in targets {
            let factor = rows[i][&pc] * inv % p;
            for &(j, v) in &pivot_row {
                let entry = rows[i].entry(j).or_insert(0);
                *entry = (*entry + p - factor * v % p) % p;
                if *entry == 0 {
                    rows[i].remove(&j);
                    cols[j].remove(&i);
                } else {
                    cols[j].insert(i);
                }
            }
        }
        for &(j, _) in &pivot_row {
            cols[j].remove(&pr);
        }
        rows[pr].clear();
        cols[pc].clear();
        rank += 1;
    }
    rank
}

pub(crate) fn mod_inverse(a: u64, p: u64) -> u64 {
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert_eq!(r, 1, "{a} is not invertible modulo {p}");
    t.rem_euclid(p as i128) as u64
}

pub(crate) fn to_u64(x: &BigInt) -> u64 {
    x.to_u64().expect("torsion coefficient exceeds 64 bits")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(m: &IntegerMatrix) -> SmithForm {
        let s = smith_normal_form(m);
        assert_eq!(s.u.mul(m).mul(&s.v), s.d);
        assert!(s.d.is_diagonal());
        assert_eq!(s.u.determinant().abs(), BigInt::one());
        assert_eq!(s.v.determinant().abs(), BigInt::one());
        let diag = s.invariant_factors();
        for w in diag.windows(2) {
            assert!(w[1].is_multiple_of(&w[0]));
        }
        s
    }

    #[test]
    fn two_by_two() {
        let s = check(&IntegerMatrix::from_rows(&[vec![2, 4], vec![6, 8]]));
        assert_eq!(s.invariant_factors(), vec![BigInt::from(2), BigInt::from(4)]);
    }

    #[test]
    fn identity_and_zero() {
        let s = check(&IntegerMatrix::identity(3));
        assert_eq!(s.d, IntegerMatrix::identity(3));
        let s = check(&IntegerMatrix::zero(2, 3));
        assert_eq!(s.d, IntegerMatrix::zero(2, 3));
    }

    #[test]
    fn sparse_agrees_with_dense() {
        let dense = IntegerMatrix::from_rows(&[vec![1, 2, 0], vec![0, 4, 6], vec![2, 0, -6]]);
        let sparse = SparseMatrix {
            rows: 3,
            columns: vec![vec![(0, 1), (2, 2)], vec![(0, 2), (1, 4)], vec![(1, 6), (2, -6)]],
        };
        assert_eq!(sparse.to_dense(), dense);
        let factors = invariant_factors(&dense);
        let (rank, torsion) = sparse_invariant_factors(&sparse);
        assert_eq!(rank, factors.len());
        assert_eq!(torsion, factors.into_iter().filter(|f| !f.is_one()).collect::<Vec<_>>());
        assert_eq!(sparse_rank_mod_p(&sparse, 2), 1);
    }
}
