//! Oracles and generators shared by the integration tests. Nothing here
//! calls the library's homology, π₁ or cohomology code.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use toposdim::fincat::{monoid_as_category, FiniteCategory, FiniteMonoid, FinitePoset, Morphism};
use toposdim::pi1::FiniteGroup;
use toposdim::presheaf::{constant, representable, sieve_presheaf, Presheaf, Sieve};

// ---------------------------------------------------------------------------
// Integer linear algebra

/// Nonzero diagonal of a Smith-type reduction, without the divisibility
/// normalization.
pub fn diagonalize(mut a: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut r0 = 0;
    let mut c0 = 0;
    while r0 < rows && c0 < cols {
        // Smallest nonzero entry in the remaining block.
        let mut best: Option<(usize, usize)> = None;
        for i in r0..rows {
            for j in c0..cols {
                if a[i][j] != 0 && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(r0, pi);
        for row in a.iter_mut() {
            row.swap(c0, pj);
        }
        let p = a[r0][c0];
        let mut clean = true;
        for i in r0 + 1..rows {
            let q = a[i][c0] / p;
            if q != 0 {
                for j in c0..cols {
                    a[i][j] -= q * a[r0][j];
                }
            }
            clean &= a[i][c0] == 0;
        }
        for j in c0 + 1..cols {
            let q = a[r0][j] / p;
            if q != 0 {
                for row in a.iter_mut().skip(r0) {
                    row[j] -= q * row[c0];
                }
            }
            clean &= a[r0][j] == 0;
        }
        if clean {
            diag.push(p.abs());
            r0 += 1;
            c0 += 1;
        }
    }
    diag
}

fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n % p == 0 {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Invariant factors `t_1 | t_2 | …` (all > 1) of the group `⊕ ℤ/d`.
pub fn invariant_factors(diagonal: &[i128]) -> Vec<u64> {
    let mut powers: BTreeMap<u64, Vec<u32>> = BTreeMap::new();
    for &d in diagonal {
        for (p, e) in factor(d as u64) {
            powers.entry(p).or_default().push(e);
        }
    }
    let len = powers.values().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![1u64; len];
    for (p, mut es) in powers {
        es.sort_unstable_by(|a, b| b.cmp(a));
        for (k, e) in es.into_iter().enumerate() {
            out[len - 1 - k] *= p.pow(e);
        }
    }
    out
}

pub fn rank_mod_p(a: &[Vec<i128>], p: i128) -> usize {
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|x| x.rem_euclid(p)).collect()).collect();
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let inv = |x: i128| (1..p).find(|y| x * y % p == 1).expect("invertible");
    let mut rank = 0;
    for c in 0..cols {
        let Some(r) = (rank..rows).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, r);
        let s = inv(m[rank][c]);
        for x in m[rank].iter_mut() {
            *x = *x * s % p;
        }
        for r in 0..rows {
            if r != rank && m[r][c] != 0 {
                let q = m[r][c];
                for j in 0..cols {
                    m[r][j] = (m[r][j] - q * m[rank][j]).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

/// A chain complex given by dense boundary matrices: `boundaries[m]` is
/// `∂_m : C_m → C_{m-1}` with `ranks[m-1]` rows (`boundaries[0]` unused).
pub struct DenseComplex {
    pub ranks: Vec<usize>,
    pub boundaries: Vec<Vec<Vec<i128>>>,
}

impl DenseComplex {
    fn matrix_rank(&self, m: usize) -> usize {
        if m == 0 || m >= self.boundaries.len() {
            0
        } else {
            diagonalize(self.boundaries[m].clone()).len()
        }
    }

    /// `(betti, torsion)` of `H_m`; needs `∂_{m+1}`.
    pub fn homology(&self, m: usize) -> (usize, Vec<u64>) {
        assert!(m + 1 < self.boundaries.len(), "complex too short");
        let next = diagonalize(self.boundaries[m + 1].clone());
        let betti = self.ranks[m] - self.matrix_rank(m) - next.len();
        (betti, invariant_factors(&next))
    }

    /// Dimension of `H^m(−; F_p)`.
    pub fn cohomology_mod_p(&self, m: usize, p: i128) -> usize {
        assert!(m + 1 < self.boundaries.len(), "complex too short");
        let r = |k: usize| {
            if k == 0 {
                0
            } else {
                rank_mod_p(&self.boundaries[k], p)
            }
        };
        self.ranks[m] - r(m) - r(m + 1)
    }
}

/// Normalized nerve of a category: strings of composable non-identity
/// morphisms `f_1, …, f_n` with `target(f_i) = source(f_{i+1})`.
pub fn nerve_oracle(d: &FiniteCategory, top: usize) -> DenseComplex {
    let nonid: Vec<usize> = (0..d.num_morphisms()).filter(|&f| !d.is_identity(f)).collect();
    let mut simplices: Vec<Vec<Vec<usize>>> = vec![(0..d.num_objects()).map(|o| vec![o]).collect()];
    let mut strings: Vec<Vec<usize>> = vec![vec![]];
    for _ in 1..=top {
        strings = strings
            .iter()
            .flat_map(|s| {
                nonid
                    .iter()
                    .filter(move |&&f| s.last().is_none_or(|&l| d.target(l) == d.source(f)))
                    .map(move |&f| {
                        let mut t = s.clone();
                        t.push(f);
                        t
                    })
            })
            .collect();
        simplices.push(strings.clone());
    }
    let index: Vec<HashMap<Vec<usize>, usize>> = simplices
        .iter()
        .map(|ss| ss.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
        .collect();
    let mut boundaries = vec![Vec::new()];
    for n in 1..=top {
        let mut m = vec![vec![0i128; simplices[n].len()]; simplices[n - 1].len()];
        for (j, s) in simplices[n].iter().enumerate() {
            let mut add = |face: Vec<usize>, sign: i128| {
                m[index[n - 1][&face]][j] += sign;
            };
            if n == 1 {
                add(vec![d.target(s[0])], 1);
                add(vec![d.source(s[0])], -1);
                continue;
            }
            for i in 0..=n {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                let face: Vec<usize> = if i == 0 {
                    s[1..].to_vec()
                } else if i == n {
                    s[..n - 1].to_vec()
                } else {
                    let h = d.compose(s[i], s[i - 1]);
                    if d.is_identity(h) {
                        continue;
                    }
                    let mut f = s[..i - 1].to_vec();
                    f.push(h);
                    f.extend_from_slice(&s[i + 1..]);
                    f
                };
                add(face, sign);
            }
        }
        boundaries.push(m);
    }
    DenseComplex {
        ranks: simplices.iter().map(Vec::len).collect(),
        boundaries,
    }
}

/// Normalized bar complex of a finite group straight from its table:
/// `C_n` has a basis of n-tuples of non-identity elements.
pub fn bar_complex(g: &FiniteGroup, top: usize) -> DenseComplex {
    let nonunit: Vec<usize> = (0..g.order()).filter(|&x| x != g.unit).collect();
    let mut tuples: Vec<Vec<Vec<usize>>> = vec![vec![vec![]]];
    for n in 1..=top {
        let next = tuples[n - 1]
            .iter()
            .flat_map(|t| {
                nonunit.iter().map(move |&x| {
                    let mut u = t.clone();
                    u.push(x);
                    u
                })
            })
            .collect();
        tuples.push(next);
    }
    let index: Vec<HashMap<Vec<usize>, usize>> = tuples
        .iter()
        .map(|ts| ts.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect())
        .collect();
    let mut boundaries = vec![Vec::new()];
    for n in 1..=top {
        let mut m = vec![vec![0i128; tuples[n].len()]; tuples[n - 1].len()];
        for (j, t) in tuples[n].iter().enumerate() {
            for i in 0..=n {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                let face: Vec<usize> = if i == 0 {
                    t[1..].to_vec()
                } else if i == n {
                    t[..n - 1].to_vec()
                } else {
                    let x = g.table[t[i - 1]][t[i]];
                    if x == g.unit {
                        continue;
                    }
                    let mut f = t[..i - 1].to_vec();
                    f.push(x);
                    f.extend_from_slice(&t[i + 1..]);
                    f
                };
                m[index[n - 1][&face]][j] += sign;
            }
        }
        boundaries.push(m);
    }
    DenseComplex {
        ranks: tuples.iter().map(Vec::len).collect(),
        boundaries,
    }
}

// ---------------------------------------------------------------------------
// Torsors and homomorphisms

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
}

/// Isomorphism classes of `G`-torsors: functors `a` from the site to `G`
/// (`a(g∘f) = a(g)·a(f)`) modulo `a(f) ↦ λ(target f)·a(f)·λ(source f)⁻¹`.
pub fn torsor_count(d: &FiniteCategory, g: &FiniteGroup) -> usize {
    let nonid: Vec<usize> = (0..d.num_morphisms()).filter(|&f| !d.is_identity(f)).collect();
    let pos: HashMap<usize, usize> = nonid.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    // Composable pairs (g, f) checked once the later of g, f, g∘f is set.
    let mut due: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); nonid.len()];
    for &f in &nonid {
        for &h in &nonid {
            if d.source(h) != d.target(f) {
                continue;
            }
            let c = d.compose(h, f);
            let last = [Some(pos[&f]), Some(pos[&h]), pos.get(&c).copied()]
                .into_iter()
                .flatten()
                .max()
                .expect("nonempty");
            due[last].push((h, f, c));
        }
    }
    let value = |a: &[usize], f: usize| pos.get(&f).map_or(g.unit, |&i| a[i]);
    let mut solutions: Vec<Vec<usize>> = Vec::new();
    let mut a = vec![0usize; nonid.len()];
    fn search(
        k: usize,
        a: &mut Vec<usize>,
        g: &FiniteGroup,
        due: &[Vec<(usize, usize, usize)>],
        value: &dyn Fn(&[usize], usize) -> usize,
        out: &mut Vec<Vec<usize>>,
    ) {
        if k == a.len() {
            out.push(a.clone());
            return;
        }
        for x in 0..g.order() {
            a[k] = x;
            if due[k]
                .iter()
                .all(|&(h, f, c)| value(a, c) == g.table[value(a, h)][value(a, f)])
            {
                search(k + 1, a, g, due, value, out);
            }
        }
    }
    search(0, &mut a, g, &due, &value, &mut solutions);
    let index: HashMap<Vec<usize>, usize> = solutions.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let inverse = |x: usize| (0..g.order()).find(|&y| g.table[x][y] == g.unit).expect("group");
    let mut uf = UnionFind((0..solutions.len()).collect());
    for (i, s) in solutions.iter().enumerate() {
        for o in 0..d.num_objects() {
            for l in 0..g.order() {
                let moved: Vec<usize> = nonid
                    .iter()
                    .zip(s)
                    .map(|(&f, &x)| {
                        let left = if d.target(f) == o { l } else { g.unit };
                        let right = if d.source(f) == o { inverse(l) } else { g.unit };
                        g.table[g.table[left][x]][right]
                    })
                    .collect();
                uf.union(i, index[&moved]);
            }
        }
    }
    (0..solutions.len()).filter(|&i| uf.find(i) == i).count()
}

/// Monoid homomorphisms `M → G` by brute force over all maps.
pub fn monoid_hom_count(m: &FiniteMonoid, g: &FiniteGroup) -> usize {
    let n = m.len();
    let mut images = vec![0usize; n];
    let mut count = 0;
    let total = g.order().pow(n as u32);
    for code in 0..total {
        let mut c = code;
        for x in images.iter_mut() {
            *x = c % g.order();
            c /= g.order();
        }
        if images[m.unit] == g.unit
            && (0..n).all(|x| (0..n).all(|y| images[m.mul(x, y)] == g.table[images[x]][images[y]]))
        {
            count += 1;
        }
    }
    count
}

pub fn group_as_monoid(g: &FiniteGroup) -> FiniteMonoid {
    FiniteMonoid::new(g.elements.clone(), g.table.clone(), g.unit).expect("group tables are monoids")
}

// ---------------------------------------------------------------------------
// Random sites and presheaves

pub fn random_poset(rng: &mut ChaCha8Rng, max: usize) -> FinitePoset {
    let n = rng.gen_range(1..=max);
    let mut leq = vec![vec![false; n]; n];
    for (i, row) in leq.iter_mut().enumerate() {
        row[i] = true;
    }
    let density = rng.gen_range(0.2..0.7);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                leq[i][j] = true;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if leq[i][k] && leq[k][j] {
                    leq[i][j] = true;
                }
            }
        }
    }
    FinitePoset::new((0..n).map(|i| format!("p{i}")).collect(), leq).expect("closed order")
}

/// Monoid of maps on a small set generated by random maps, `x·y = x ∘ y`.
pub fn random_monoid(rng: &mut ChaCha8Rng, max_size: usize) -> FiniteMonoid {
    loop {
        let n = rng.gen_range(2..=3);
        let gens: Vec<Vec<usize>> = (0..rng.gen_range(1..=2))
            .map(|_| (0..n).map(|_| rng.gen_range(0..n)).collect())
            .collect();
        let id: Vec<usize> = (0..n).collect();
        let mut elems = vec![id];
        let mut k = 0;
        while k < elems.len() && elems.len() <= max_size {
            for g in &gens {
                let p: Vec<usize> = (0..n).map(|i| elems[k][g[i]]).collect();
                if !elems.contains(&p) {
                    elems.push(p);
                }
            }
            k += 1;
        }
        if elems.len() > max_size {
            continue;
        }
        let table = elems
            .iter()
            .map(|x| {
                elems
                    .iter()
                    .map(|y| {
                        let p: Vec<usize> = (0..n).map(|i| x[y[i]]).collect();
                        elems.iter().position(|e| *e == p).expect("closed")
                    })
                    .collect()
            })
            .collect();
        let names = (0..elems.len())
            .map(|i| if i == 0 { "1".to_string() } else { format!("m{i}") })
            .collect();
        return FiniteMonoid::new(names, table, 0).expect("maps compose associatively");
    }
}

/// `P^op × M` as a category: morphisms are pairs.
pub fn product_site(p: &FiniteCategory, m: &FiniteMonoid) -> FiniteCategory {
    let k = m.len();
    let morphisms: Vec<Morphism> = (0..p.num_morphisms())
        .flat_map(|f| {
            (0..k).map(move |x| Morphism {
                name: format!("{}|{}", p.morphism_name(f), m.elements[x]),
                source: p.source(f),
                target: p.target(f),
            })
        })
        .collect();
    let identities = (0..p.num_objects()).map(|o| p.identity(o) * k + m.unit).collect();
    FiniteCategory::new(p.objects().to_vec(), morphisms, identities, |g, f| {
        p.try_compose(g / k, f / k).map(|h| h * k + m.mul(g % k, f % k))
    })
    .expect("product of categories")
}

pub fn random_site(rng: &mut ChaCha8Rng) -> FiniteCategory {
    match rng.gen_range(0..10) {
        0..=4 => random_poset(rng, 6).site(),
        5..=7 => monoid_as_category(&random_monoid(rng, 6)),
        _ => product_site(&random_poset(rng, 3).site(), &random_monoid(rng, 3)),
    }
}

pub fn random_sieve(rng: &mut ChaCha8Rng, site: &FiniteCategory) -> Sieve {
    let c = rng.gen_range(0..site.num_objects());
    let gens: Vec<usize> = site.maps_into(c).iter().copied().filter(|_| rng.gen_bool(0.4)).collect();
    Sieve::generated_by(site, c, &gens)
}

pub fn coproduct(site: &FiniteCategory, parts: &[Presheaf]) -> Presheaf {
    let n = site.num_objects();
    let mut sizes = vec![0; n];
    let mut offsets = Vec::new();
    for p in parts {
        offsets.push(sizes.clone());
        for (c, s) in sizes.iter_mut().enumerate() {
            *s += p.size(c);
        }
    }
    let restriction = (0..site.num_morphisms())
        .map(|f| {
            let d = site.source(f);
            parts
                .iter()
                .zip(&offsets)
                .flat_map(|(p, off)| p.restriction(f).iter().map(move |&x| x + off[d]))
                .collect()
        })
        .collect();
    Presheaf::from_sizes(site, &sizes, restriction).expect("coproduct of presheaves")
}

pub fn random_presheaf(rng: &mut ChaCha8Rng, site: &FiniteCategory) -> Presheaf {
    let parts: Vec<Presheaf> = (0..rng.gen_range(1..=2))
        .map(|_| match rng.gen_range(0..4) {
            0 => constant(site, rng.gen_range(0..=2)),
            1 => representable(site, rng.gen_range(0..site.num_objects())).expect("object"),
            _ => sieve_presheaf(site, &random_sieve(rng, site)),
        })
        .collect();
    coproduct(site, &parts)
}
