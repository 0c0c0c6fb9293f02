//! Dense linear algebra over the field with `p` elements.

use super::matrix::mod_inverse;

pub fn is_prime(p: u64) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| p % d != 0)
}

/// An incrementally built row-echelon basis that remembers, for every
/// reduced row, its expression in the vectors inserted so far.
#[derive(Clone, Debug)]
pub struct Span {
    p: u64,
    dim: usize,
    /// (reduced vector, pivot column, coefficients over inserted vectors)
    rows: Vec<(Vec<u64>, usize, Vec<u64>)>,
    inserted: usize,
}

impl Span {
    pub fn new(dim: usize, p: u64) -> Self {
        Span {
            p,
            dim,
            rows: Vec::new(),
            inserted: 0,
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Reduce `v` against the basis; returns the remainder and the
    /// combination of inserted vectors that was subtracted.
    fn reduce(&self, v: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let p = self.p;
        let mut r: Vec<u64> = v.iter().map(|x| x % p).collect();
        let mut coeffs = vec![0u64; self.inserted];
        for (row, pivot, combo) in &self.rows {
            let k = r[*pivot];
            if k == 0 {
                continue;
            }
            for (x, y) in r.iter_mut().zip(row) {
                *x = (*x + p - k * y % p) % p;
            }
            for (c, y) in coeffs.iter_mut().zip(combo) {
                *c = (*c + k * y) % p;
            }
        }
        (r, coeffs)
    }

    /// Add `v`; returns whether it was independent of the current span.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.dim);
        let p = self.p;
        let (mut r, coeffs) = self.reduce(v);
        self.inserted += 1;
        for (_, _, combo) in self.rows.iter_mut() {
            combo.push(0);
        }
        let Some(pivot) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        // r = v - Σ coeffs_i v_i, normalized so r[pivot] = 1.
        let inv = mod_inverse(r[pivot], p);
        for x in r.iter_mut() {
            *x = *x * inv % p;
        }
        let mut combo: Vec<u64> = coeffs.iter().map(|c| (p - c % p) % p * inv % p).collect();
        combo.push(inv);
        self.rows.push((r, pivot, combo));
        true
    }

    /// Coefficients expressing `v` in the inserted vectors, if `v` lies in
    /// the span. Dependent inserted vectors get coefficient 0.
    pub fn express(&self, v: &[u64]) -> Option<Vec<u64>> {
        let (r, coeffs) = self.reduce(v);
        r.iter().all(|&x| x == 0).then_some(coeffs)
    }
}

/// Rank of a dense matrix given by rows.
pub fn rank(rows: &[Vec<u64>], dim: usize, p: u64) -> usize {
    let mut span = Span::new(dim, p);
    for r in rows {
        span.insert(r);
    }
    span.rank()
}

/// Basis of `{ x : e·x = 0 for every equation e }`.
pub fn nullspace(equations: &[Vec<u64>], dim: usize, p: u64) -> Vec<Vec<u64>> {
    // Reduced row echelon form.
    let mut m: Vec<Vec<u64>> = equations.iter().map(|e| e.iter().map(|x| x % p).collect()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..dim {
        let Some(sel) = (row..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(row, sel);
        let inv = mod_inverse(m[row][col], p);
        for x in m[row].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..m.len() {
            if i != row && m[i][col] != 0 {
                let k = m[i][col];
                let pivot_row = m[row].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x = (*x + p - k * y % p) % p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    let is_pivot: Vec<bool> = {
        let mut v = vec![false; dim];
        for &c in &pivots {
            v[c] = true;
        }
        v
    };
    (0..dim)
        .filter(|&free| !is_pivot[free])
        .map(|free| {
            let mut x = vec![0u64; dim];
            x[free] = 1;
            for (r, &c) in pivots.iter().enumerate() {
                x[c] = (p - m[r][free]) % p;
            }
            x
        })
        .collect()
}
