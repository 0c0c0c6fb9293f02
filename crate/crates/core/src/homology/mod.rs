//! Normalized chain complexes of nerves, integral homology through Smith
//! normal form, coefficient tests, mod-p cohomology and restriction maps.

pub mod matrix;
pub mod modp;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fincat::{FiniteCategory, Functor};
pub use matrix::{
    invariant_factors, smith_normal_form, sparse_invariant_factors, sparse_rank_mod_p, IntegerMatrix, SmithForm,
    SparseMatrix,
};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum HomologyError {
    #[error("degree {degree} needs boundaries up to degree {needed}, but the complex stops at {max_degree}")]
    DegreeOutOfRange {
        degree: usize,
        needed: usize,
        max_degree: usize,
    },
    #[error("coefficient test needs degree at least 1, got {0}")]
    DegreeTooLow(usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("boundary maps do not compose to zero at degree {0}")]
    BoundarySquareNonzero(usize),
    #[error("a simplex of the source complex has no image simplex")]
    MissingImage,
}

/// `H_m ≅ ℤ^betti ⊕ ⊕ ℤ/t` with `t_1 | t_2 | …`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HomologyGroup {
    pub degree: usize,
    pub betti: usize,
    pub torsion: Vec<u64>,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.torsion.is_empty()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Chain groups `C_0 … C_max` with boundary maps. For a nerve, the basis of
/// `C_0` is the objects (`[o]`) and the basis of `C_m`, `m ≥ 1`, is the
/// composable strings `[f_1, …, f_m]` of non-identity morphisms with
/// `target(f_i) = source(f_{i+1})`.
#[derive(Debug)]
pub struct ChainComplex {
    max_degree: usize,
    basis: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    /// `boundaries[m] = ∂_m : C_m -> C_{m-1}`; `boundaries[0]` is `0 × |C_0|`.
    boundaries: Vec<SparseMatrix>,
    truncated: bool,
    factors: Vec<OnceLock<(usize, Vec<BigInt>)>>,
}

impl Clone for ChainComplex {
    fn clone(&self) -> Self {
        ChainComplex {
            max_degree: self.max_degree,
            basis: self.basis.clone(),
            index: self.index.clone(),
            boundaries: self.boundaries.clone(),
            truncated: self.truncated,
            factors: (0..self.boundaries.len()).map(|_| OnceLock::new()).collect(),
        }
    }
}

impl ChainComplex {
    /// A complex from chain ranks and boundary maps `∂_1 … ∂_n`.
    pub fn from_boundaries(ranks: &[usize], boundaries: Vec<SparseMatrix>) -> Result<Self, HomologyError> {
        assert!(!ranks.is_empty());
        assert_eq!(boundaries.len() + 1, ranks.len());
        let mut all = vec![SparseMatrix::zero(0, ranks[0])];
        for (k, b) in boundaries.into_iter().enumerate() {
            assert_eq!(b.rows, ranks[k]);
            assert_eq!(b.cols(), ranks[k + 1]);
            all.push(b);
        }
        let basis: Vec<Vec<Vec<usize>>> = ranks.iter().map(|&r| (0..r).map(|i| vec![i]).collect()).collect();
        let cx = ChainComplex::assemble(basis, all, false);
        cx.check_boundaries()?;
        Ok(cx)
    }

    fn assemble(basis: Vec<Vec<Vec<usize>>>, boundaries: Vec<SparseMatrix>, truncated: bool) -> Self {
        let index = basis
            .iter()
            .map(|b| b.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        ChainComplex {
            max_degree: boundaries.len() - 1,
            factors: (0..boundaries.len()).map(|_| OnceLock::new()).collect(),
            basis,
            index,
            boundaries,
            truncated,
        }
    }

    fn check_boundaries(&self) -> Result<(), HomologyError> {
        for m in 2..=self.max_degree {
            if !self.boundaries[m - 1].mul(&self.boundaries[m]).is_zero() {
                return Err(HomologyError::BoundarySquareNonzero(m));
            }
        }
        Ok(())
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Whether a simplex budget stopped construction below the requested
    /// degree.
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn rank(&self, m: usize) -> usize {
        self.basis[m].len()
    }

    pub fn basis(&self, m: usize) -> &[Vec<usize>] {
        &self.basis[m]
    }

    pub fn simplex_index(&self, m: usize, simplex: &[usize]) -> Option<usize> {
        self.index.get(m)?.get(simplex).copied()
    }

    pub fn boundary(&self, m: usize) -> &SparseMatrix {
        &self.boundaries[m]
    }

    pub fn total_simplices(&self) -> usize {
        self.basis.iter().map(|b| b.len()).sum()
    }

    fn require(&self, m: usize, needed: usize) -> Result<(), HomologyError> {
        if needed > self.max_degree {
            return Err(HomologyError::DegreeOutOfRange {
                degree: m,
                needed,
                max_degree: self.max_degree,
            });
        }
        Ok(())
    }

    /// Rank and nontrivial invariant factors of `∂_m`, cached.
    fn factors(&self, m: usize) -> &(usize, Vec<BigInt>) {
        self.factors[m].get_or_init(|| sparse_invariant_factors(&self.boundaries[m]))
    }

    pub fn homology_group(&self, m: usize) -> Result<HomologyGroup, HomologyError> {
        self.require(m, m + 1)?;
        let rank_out = if m == 0 { 0 } else { self.factors(m).0 };
        let (rank_in, torsion) = self.factors(m + 1);
        Ok(HomologyGroup {
            degree: m,
            betti: self.rank(m) - rank_out - rank_in,
            torsion: torsion.iter().map(matrix::to_u64).collect(),
        })
    }

    /// `H^m(C; A) = 0` for every abelian group `A`. By universal
    /// coefficients this holds iff `H_m = 0` and `H_{m-1}` is torsion-free.
    pub fn vanishes_all_coefficients(&self, m: usize) -> Result<bool, HomologyError> {
        if m == 0 {
            return Err(HomologyError::DegreeTooLow(m));
        }
        Ok(self.homology_group(m)?.is_zero() && self.homology_group(m - 1)?.is_torsion_free())
    }

    /// `dim H^m(C; F_p)`.
    pub fn cohomology_mod_p(&self, m: usize, p: u64) -> Result<usize, HomologyError> {
        if !modp::is_prime(p) {
            return Err(HomologyError::NotPrime(p));
        }
        self.require(m, m + 1)?;
        let out = if m == 0 { 0 } else { sparse_rank_mod_p(&self.boundaries[m], p) };
        Ok(self.rank(m) - out - sparse_rank_mod_p(&self.boundaries[m + 1], p))
    }

    /// Cocycle representatives of a basis of `H^m(C; F_p)` together with a
    /// span holding coboundaries first and then those representatives.
    fn cohomology_basis(&self, m: usize, p: u64) -> (modp::Span, Vec<usize>, Vec<Vec<u64>>) {
        let dim = self.rank(m);
        let to_dense = |col: &[(usize, i64)], len: usize| {
            let mut v = vec![0u64; len];
            for &(i, x) in col {
                v[i] = x.rem_euclid(p as i64) as u64;
            }
            v
        };
        let equations: Vec<Vec<u64>> = self.boundaries[m + 1]
            .columns
            .iter()
            .map(|col| to_dense(col, dim))
            .collect();
        let cocycles = modp::nullspace(&equations, dim, p);
        let mut span = modp::Span::new(dim, p);
        let mut inserted = 0usize;
        if m > 0 {
            // Coboundaries: rows of ∂_m.
            let mut rows = vec![vec![0u64; dim]; self.rank(m - 1)];
            for (j, col) in self.boundaries[m].columns.iter().enumerate() {
                for &(i, x) in col {
                    rows[i][j] = x.rem_euclid(p as i64) as u64;
                }
            }
            for r in &rows {
                span.insert(r);
                inserted += 1;
            }
        }
        let mut positions = Vec::new();
        let mut reps = Vec::new();
        for z in cocycles {
            if span.insert(&z) {
                positions.push(inserted);
                reps.push(z);
            }
            inserted += 1;
        }
        (span, positions, reps)
    }
}

/// Normalized nerve chain complex up to `max_degree`.
pub fn nerve_chain_complex(d: &FiniteCategory, max_degree: usize) -> ChainComplex {
    nerve_chain_complex_bounded(d, max_degree, usize::MAX)
}

/// As [`nerve_chain_complex`], but stops before the total number of
/// simplices would exceed `budget`; the result then has a lower
/// `max_degree` and is marked truncated.
pub fn nerve_chain_complex_bounded(d: &FiniteCategory, max_degree: usize, budget: usize) -> ChainComplex {
    let mut basis: Vec<Vec<Vec<usize>>> = vec![(0..d.num_objects()).map(|o| vec![o]).collect()];
    let mut boundaries = vec![SparseMatrix::zero(0, d.num_objects())];
    let mut total = d.num_objects();
    let mut truncated = false;
    let non_identity: Vec<usize> = d.non_identity_morphisms().collect();
    for m in 1..=max_degree {
        let next: Vec<Vec<usize>> = if m == 1 {
            non_identity.iter().map(|&f| vec![f]).collect()
        } else {
            let mut out = Vec::new();
            for s in &basis[m - 1] {
                let last = *s.last().expect("nonempty string");
                for &g in d.maps_out(d.target(last)) {
                    if !d.is_identity(g) {
                        let mut t = s.clone();
                        t.push(g);
                        out.push(t);
                    }
                    if total + out.len() > budget {
                        break;
                    }
                }
                if total + out.len() > budget {
                    break;
                }
            }
            out
        };
        if total + next.len() > budget {
            truncated = true;
            break;
        }
        total += next.len();
        let prev_index: HashMap<&[usize], usize> =
            basis[m - 1].iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
        let columns = next
            .iter()
            .map(|s| {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                let mut add = |face: Option<Vec<usize>>, sign: i64| {
                    if let Some(face) = face {
                        *acc.entry(prev_index[face.as_slice()]).or_insert(0) += sign;
                    }
                };
                for i in 0..=m {
                    let sign = if i % 2 == 0 { 1 } else { -1 };
                    add(face(d, s, i), sign);
                }
                acc.into_iter().filter(|&(_, v)| v != 0).collect()
            })
            .collect();
        boundaries.push(SparseMatrix {
            rows: basis[m - 1].len(),
            columns,
        });
        basis.push(next);
    }
    let cx = ChainComplex::assemble(basis, boundaries, truncated);
    cx.check_boundaries()
        .expect("nerve boundary maps compose to zero");
    cx
}

/// The `i`-th face of a nondegenerate string, or `None` when it is
/// degenerate (an inner composite is an identity).
fn face(d: &FiniteCategory, s: &[usize], i: usize) -> Option<Vec<usize>> {
    let m = s.len();
    if m == 1 {
        return Some(vec![if i == 0 { d.target(s[0]) } else { d.source(s[0]) }]);
    }
    if i == 0 {
        return Some(s[1..].to_vec());
    }
    if i == m {
        return Some(s[..m - 1].to_vec());
    }
    let h = d.compose(s[i], s[i - 1]);
    if d.is_identity(h) {
        return None;
    }
    let mut out = Vec::with_capacity(m - 1);
    out.extend_from_slice(&s[..i - 1]);
    out.push(h);
    out.extend_from_slice(&s[i + 1..]);
    Some(out)
}

pub fn homology_group(c: &ChainComplex, m: usize) -> Result<HomologyGroup, HomologyError> {
    c.homology_group(m)
}

pub fn vanishes_all_coefficients(c: &ChainComplex, m: usize) -> Result<bool, HomologyError> {
    c.vanishes_all_coefficients(m)
}

pub fn cohomology_mod_p(c: &ChainComplex, m: usize, p: u64) -> Result<usize, HomologyError> {
    c.cohomology_mod_p(m, p)
}

/// The map `H^m(big; F_p) -> H^m(small; F_p)` induced by a functor
/// `small -> big`, in chosen bases.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionMap {
    pub degree: usize,
    pub prime: u64,
    pub source_dimension: usize,
    pub target_dimension: usize,
    /// `matrix[i][j]`: coordinate `i` in the target of the image of basis
    /// vector `j` of the source.
    pub matrix: Vec<Vec<u64>>,
    pub injective: bool,
    pub surjective: bool,
}

/// Restriction of cochains along a functor that sends non-identity
/// morphisms to non-identity morphisms (so nondegenerate strings go to
/// nondegenerate strings). `big` and `small` are the nerves of the target
/// and source of `functor`.
pub fn restriction_cohomology_map(
    big: &ChainComplex,
    small: &ChainComplex,
    functor: &Functor,
    m: usize,
    p: u64,
) -> Result<RestrictionMap, HomologyError> {
    if !modp::is_prime(p) {
        return Err(HomologyError::NotPrime(p));
    }
    big.require(m, m + 1)?;
    small.require(m, m + 1)?;
    let image: Vec<usize> = small
        .basis(m)
        .iter()
        .map(|s| {
            let t: Vec<usize> = if m == 0 {
                vec![functor.object_map[s[0]]]
            } else {
                s.iter().map(|&f| functor.morphism_map[f]).collect()
            };
            big.simplex_index(m, &t).ok_or(HomologyError::MissingImage)
        })
        .collect::<Result<_, _>>()?;
    let (_, _, big_reps) = big.cohomology_basis(m, p);
    let (small_span, small_pos, _) = small.cohomology_basis(m, p);
    let mut columns = Vec::with_capacity(big_reps.len());
    for z in &big_reps {
        let restricted: Vec<u64> = image.iter().map(|&t| z[t]).collect();
        let coeffs = small_span
            .express(&restricted)
            .expect("restriction of a cocycle is a cocycle");
        columns.push(small_pos.iter().map(|&k| coeffs[k]).collect::<Vec<u64>>());
    }
    let target_dimension = small_pos.len();
    let source_dimension = big_reps.len();
    let matrix: Vec<Vec<u64>> = (0..target_dimension)
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    let r = modp::rank(&columns, target_dimension, p);
    Ok(RestrictionMap {
        degree: m,
        prime: p,
        source_dimension,
        target_dimension,
        matrix,
        injective: r == source_dimension,
        surjective: r == target_dimension,
    })
}
