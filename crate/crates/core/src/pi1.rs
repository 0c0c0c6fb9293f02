//! Fundamental-group presentations of nerves, abelianization, bounded
//! homomorphism search into finite groups, and first nonabelian cohomology
//! as homomorphisms up to conjugation.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fincat::{connected_components, FiniteCategory, FiniteMonoid, MonoidError, MorId};
use crate::homology::{invariant_factors, HomologyGroup, IntegerMatrix};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Pi1Error {
    #[error("category has no objects")]
    Empty,
    #[error("category has {0} connected components")]
    Disconnected(usize),
    #[error("the given morphisms do not form a spanning tree")]
    NotSpanningTree,
    #[error("relator mentions undeclared generator {0}")]
    UnknownGenerator(usize),
    #[error("coset enumeration exceeded {0} cosets")]
    CosetBudget(usize),
}

// ---------------------------------------------------------------------------
// Presentations

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize) -> Self {
        Letter {
            generator,
            inverse: false,
        }
    }

    pub fn inv(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }
}

pub type Word = Vec<Letter>;

pub fn inverse_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inv()).collect()
}

pub fn free_reduce(w: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn cyclic_reduce(w: &[Letter]) -> Word {
    let mut w = free_reduce(w);
    while w.len() >= 2 && w[0] == w[w.len() - 1].inv() {
        w.pop();
        w.remove(0);
    }
    w
}

/// Least rotation of `w` or of its inverse, so that conjugate relators
/// compare equal.
fn canonical_relator(w: &[Letter]) -> Word {
    let w = cyclic_reduce(w);
    let inv = inverse_word(&w);
    let mut best = w.clone();
    for base in [&w, &inv] {
        for k in 0..base.len() {
            let mut r = base[k..].to_vec();
            r.extend_from_slice(&base[..k]);
            if r < best {
                best = r;
            }
        }
    }
    best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
}

impl GroupPresentation {
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self, Pi1Error> {
        for w in &relators {
            if let Some(l) = w.iter().find(|l| l.generator >= generators.len()) {
                return Err(Pi1Error::UnknownGenerator(l.generator));
            }
        }
        Ok(GroupPresentation { generators, relators })
    }

    pub fn free(n: usize) -> Self {
        GroupPresentation {
            generators: (0..n).map(|i| format!("x{i}")).collect(),
            relators: Vec::new(),
        }
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn word_to_string(&self, w: &[Letter]) -> String {
        if w.is_empty() {
            return "1".into();
        }
        w.iter()
            .map(|l| {
                let g = &self.generators[l.generator];
                if l.inverse {
                    format!("{g}^-1")
                } else {
                    g.clone()
                }
            })
            .collect::<Vec<_>>()
            .join("·")
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = self.relators.iter().map(|w| self.word_to_string(w)).collect();
        write!(f, "< {} | {} >", self.generators.join(", "), rels.join(", "))
    }
}

/// π₁ of the nerve of a connected category, based at object 0, using the
/// breadth-first spanning tree.
pub fn pi1_presentation(d: &FiniteCategory) -> Result<GroupPresentation, Pi1Error> {
    check_connected(d)?;
    pi1_presentation_with_tree(d, &crate::fincat::spanning_tree(d, 0))
}

fn check_connected(d: &FiniteCategory) -> Result<(), Pi1Error> {
    match connected_components(d).len() {
        0 => Err(Pi1Error::Empty),
        1 => Ok(()),
        n => Err(Pi1Error::Disconnected(n)),
    }
}

/// As [`pi1_presentation`] with a caller-chosen spanning tree. Generators
/// are the non-identity morphisms off the tree; each composable pair
/// `(f, g)` with `h = g∘f` contributes the path relation `f·g·h⁻¹`.
pub fn pi1_presentation_with_tree(d: &FiniteCategory, tree: &[MorId]) -> Result<GroupPresentation, Pi1Error> {
    check_connected(d)?;
    if !is_spanning_tree(d, tree) {
        return Err(Pi1Error::NotSpanningTree);
    }
    let on_tree: HashSet<MorId> = tree.iter().copied().collect();
    let mut letter: Vec<Option<Letter>> = vec![None; d.num_morphisms()];
    let mut generators = Vec::new();
    for f in d.non_identity_morphisms() {
        if !on_tree.contains(&f) {
            letter[f] = Some(Letter::new(generators.len()));
            generators.push(d.morphism_name(f).to_string());
        }
    }
    let mut seen = BTreeSet::new();
    let mut relators = Vec::new();
    for f in d.non_identity_morphisms() {
        for &g in d.maps_out(d.target(f)) {
            if d.is_identity(g) {
                continue;
            }
            let h = d.compose(g, f);
            let mut w: Word = [letter[f], letter[g]].into_iter().flatten().collect();
            if let Some(l) = letter[h] {
                w.push(l.inv());
            }
            let w = free_reduce(&w);
            if !w.is_empty() && seen.insert(canonical_relator(&w)) {
                relators.push(w);
            }
        }
    }
    Ok(GroupPresentation { generators, relators })
}

fn is_spanning_tree(d: &FiniteCategory, tree: &[MorId]) -> bool {
    let n = d.num_objects();
    if tree.len() + 1 != n || tree.iter().any(|&f| f >= d.num_morphisms() || d.is_identity(f)) {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &[usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for &f in tree {
        let (a, b) = (root(&parent, d.source(f)), root(&parent, d.target(f)));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Abelianization as `ℤ^betti ⊕ torsion`, reported in degree 1.
pub fn abelianization(p: &GroupPresentation) -> HomologyGroup {
    let n = p.num_generators();
    let rows: Vec<Vec<i64>> = p
        .relators
        .iter()
        .map(|w| {
            let mut row = vec![0i64; n];
            for l in w {
                row[l.generator] += if l.inverse { -1 } else { 1 };
            }
            row
        })
        .collect();
    let (rank, torsion) = if rows.is_empty() || n == 0 {
        (0, Vec::new())
    } else {
        let factors = invariant_factors(&IntegerMatrix::from_rows(&rows));
        let rank = factors.len();
        let torsion = factors
            .into_iter()
            .filter(|f| *f > num_bigint::BigInt::from(1))
            .map(|f| u64::try_from(f).expect("torsion fits in u64"))
            .collect();
        (rank, torsion)
    };
    HomologyGroup {
        degree: 1,
        betti: n - rank,
        torsion,
    }
}

const TIETZE_MAX_RELATOR: usize = 64;

/// Tietze simplification: eliminate a generator occurring exactly once in
/// some relator, substituting its solution elsewhere, until nothing changes
/// or relators would grow past a fixed length. Presents the same group.
pub fn simplify(p: &GroupPresentation) -> GroupPresentation {
    let mut gens: Vec<Option<String>> = p.generators.iter().cloned().map(Some).collect();
    let mut rels: Vec<Word> = p.relators.clone();
    loop {
        tidy(&mut rels);
        let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
        for (ri, w) in rels.iter().enumerate() {
            let mut count: HashMap<usize, usize> = HashMap::new();
            for l in w {
                *count.entry(l.generator).or_insert(0) += 1;
            }
            for (pos, l) in w.iter().enumerate() {
                if count[&l.generator] == 1 {
                    candidates.push((w.len(), ri, pos));
                }
            }
        }
        candidates.sort();
        let mut eliminated = false;
        for (_, ri, pos) in candidates {
            let w = &rels[ri];
            let x = w[pos];
            // w = u x^e v = 1, so x^e = u⁻¹ v⁻¹ and x = (u⁻¹ v⁻¹)^e.
            let mut solution = inverse_word(&w[..pos]);
            solution.extend(inverse_word(&w[pos + 1..]));
            if x.inverse {
                solution = inverse_word(&solution);
            }
            let substituted: Vec<Word> = rels
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != ri)
                .map(|(_, r)| {
                    let mut out = Vec::new();
                    for &l in r {
                        if l.generator == x.generator {
                            if l.inverse {
                                out.extend(inverse_word(&solution));
                            } else {
                                out.extend(solution.iter().copied());
                            }
                        } else {
                            out.push(l);
                        }
                    }
                    cyclic_reduce(&out)
                })
                .collect();
            if substituted.iter().any(|r| r.len() > TIETZE_MAX_RELATOR) {
                continue;
            }
            rels = substituted;
            gens[x.generator] = None;
            eliminated = true;
            break;
        }
        if !eliminated {
            break;
        }
    }
    // Renumber surviving generators.
    let mut renumber = vec![usize::MAX; gens.len()];
    let mut names = Vec::new();
    for (i, g) in gens.into_iter().enumerate() {
        if let Some(name) = g {
            renumber[i] = names.len();
            names.push(name);
        }
    }
    let relators = rels
        .into_iter()
        .map(|w| {
            w.into_iter()
                .map(|l| Letter {
                    generator: renumber[l.generator],
                    inverse: l.inverse,
                })
                .collect()
        })
        .collect();
    GroupPresentation {
        generators: names,
        relators,
    }
}

fn tidy(rels: &mut Vec<Word>) {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for w in rels.drain(..) {
        let w = cyclic_reduce(&w);
        if !w.is_empty() && seen.insert(canonical_relator(&w)) {
            out.push(w);
        }
    }
    *rels = out;
}

// ---------------------------------------------------------------------------
// Finite groups

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Monoid(#[from] MonoidError),
    #[error("`{0}` has no inverse")]
    NoInverse(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteGroup {
    pub elements: Vec<String>,
    /// `table[x][y] = x·y`
    pub table: Vec<Vec<usize>>,
    pub unit: usize,
    #[serde(skip)]
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>, unit: usize) -> Result<Self, GroupError> {
        FiniteGroup::from_monoid(&FiniteMonoid::new(elements, table, unit)?)
    }

    pub fn from_monoid(m: &FiniteMonoid) -> Result<Self, GroupError> {
        let n = m.len();
        let inverse = (0..n)
            .map(|x| {
                (0..n)
                    .find(|&y| m.mul(x, y) == m.unit && m.mul(y, x) == m.unit)
                    .ok_or_else(|| GroupError::NoInverse(m.elements[x].clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(FiniteGroup {
            elements: m.elements.clone(),
            table: m.table.clone(),
            unit: m.unit,
            inverse,
        })
    }

    pub fn as_monoid(&self) -> FiniteMonoid {
        FiniteMonoid {
            elements: self.elements.clone(),
            table: self.table.clone(),
            unit: self.unit,
        }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn inv(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|x| (0..self.order()).all(|y| self.mul(x, y) == self.mul(y, x)))
    }

    pub fn trivial() -> Self {
        FiniteGroup::from_monoid(&FiniteMonoid::trivial()).expect("group")
    }

    pub fn cyclic(n: usize) -> Self {
        FiniteGroup::from_monoid(&FiniteMonoid::cyclic_group(n)).expect("group")
    }

    pub fn symmetric(k: usize) -> Self {
        FiniteGroup::from_monoid(&FiniteMonoid::symmetric_group(k)).expect("group")
    }

    pub fn product(a: &FiniteGroup, b: &FiniteGroup) -> Self {
        let (n, m) = (a.order(), b.order());
        let elements = (0..n * m)
            .map(|i| format!("({},{})", a.elements[i / m], b.elements[i % m]))
            .collect();
        let table = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| a.mul(x / m, y / m) * m + b.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        FiniteGroup::new(elements, table, a.unit * m + b.unit).expect("product of groups")
    }

    /// Evaluate a word under an assignment of generators.
    pub fn evaluate(&self, w: &[Letter], images: &[usize]) -> usize {
        w.iter().fold(self.unit, |acc, l| {
            let x = images[l.generator];
            self.mul(acc, if l.inverse { self.inv(x) } else { x })
        })
    }

    fn conjugate(&self, b: usize, x: usize) -> usize {
        self.mul(self.mul(self.inv(b), x), b)
    }
}

/// One group of each isomorphism type of order at most 6, with a name.
pub fn small_groups() -> Vec<(&'static str, FiniteGroup)> {
    vec![
        ("trivial", FiniteGroup::trivial()),
        ("Z2", FiniteGroup::cyclic(2)),
        ("Z3", FiniteGroup::cyclic(3)),
        ("Z4", FiniteGroup::cyclic(4)),
        ("Z2xZ2", FiniteGroup::product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(2))),
        ("Z5", FiniteGroup::cyclic(5)),
        ("Z6", FiniteGroup::cyclic(6)),
        ("S3", FiniteGroup::symmetric(3)),
    ]
}

/// Look a group up by the names used in [`small_groups`], plus `Sk` for
/// symmetric groups and `Zn` for cyclic groups.
pub fn group_by_name(name: &str) -> Option<FiniteGroup> {
    if let Some((_, g)) = small_groups().into_iter().find(|(n, _)| *n == name) {
        return Some(g);
    }
    let parse = |prefix: &str| name.strip_prefix(prefix).and_then(|s| s.parse::<usize>().ok());
    if let Some(n) = parse("Z").filter(|&n| (1..=64).contains(&n)) {
        return Some(FiniteGroup::cyclic(n));
    }
    if let Some(k) = parse("S").filter(|&k| (1..=5).contains(&k)) {
        return Some(FiniteGroup::symmetric(k));
    }
    None
}

// ---------------------------------------------------------------------------
// Homomorphism search

/// Depth-first search over generator images, checking each relator as soon
/// as all its generators are assigned. `visit` returns false to stop.
fn search_homs(p: &GroupPresentation, g: &FiniteGroup, visit: &mut dyn FnMut(&[usize]) -> bool) {
    let n = p.num_generators();
    let mut due: Vec<Vec<&Word>> = vec![Vec::new(); n + 1];
    for w in &p.relators {
        let last = w.iter().map(|l| l.generator + 1).max().unwrap_or(0);
        due[last].push(w);
    }
    if due[0].iter().any(|w| g.evaluate(w, &[]) != g.unit) {
        return;
    }
    let mut images = vec![g.unit; n];
    fn go(
        k: usize,
        images: &mut Vec<usize>,
        due: &[Vec<&Word>],
        g: &FiniteGroup,
        visit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if k == images.len() {
            return visit(images);
        }
        for x in 0..g.order() {
            images[k] = x;
            if due[k + 1].iter().all(|w| g.evaluate(w, images) == g.unit) && !go(k + 1, images, due, g, visit) {
                return false;
            }
        }
        true
    }
    go(0, &mut images, &due, g, visit);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomCount {
    pub homomorphisms: usize,
    pub conjugacy_classes: usize,
}

/// Number of homomorphisms from the presented group into `g`, and their
/// number of orbits under simultaneous conjugation.
pub fn homs_to_finite_group(p: &GroupPresentation, g: &FiniteGroup) -> HomCount {
    let p = simplify(p);
    let mut homs: Vec<Vec<usize>> = Vec::new();
    search_homs(&p, g, &mut |h| {
        homs.push(h.to_vec());
        true
    });
    HomCount {
        homomorphisms: homs.len(),
        conjugacy_classes: conjugation_orbits(g, homs),
    }
}

fn conjugation_orbits(g: &FiniteGroup, tuples: Vec<Vec<usize>>) -> usize {
    let mut canon: HashSet<Vec<usize>> = HashSet::new();
    for t in tuples {
        let rep = (0..g.order())
            .map(|b| t.iter().map(|&x| g.conjugate(b, x)).collect::<Vec<_>>())
            .min()
            .expect("group is nonempty");
        canon.insert(rep);
    }
    canon.len()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NontrivialityWitness {
    /// The abelianization is nonzero.
    Abelianization { group: HomologyGroup },
    /// A homomorphism to the symmetric group on `degree` letters with
    /// nontrivial image; `images[i]` is the permutation assigned to
    /// generator `i` of the simplified presentation.
    Permutation { degree: usize, images: Vec<Vec<usize>> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TrivialityCertificate {
    CertifiedTrivial,
    Nontrivial { witness: NontrivialityWitness },
    Unknown,
}

impl TrivialityCertificate {
    pub fn is_trivial(&self) -> bool {
        matches!(self, TrivialityCertificate::CertifiedTrivial)
    }

    pub fn is_nontrivial(&self) -> bool {
        matches!(self, TrivialityCertificate::Nontrivial { .. })
    }
}

/// Largest search space `k!^generators` tried in the permutation probe.
const PERMUTATION_PROBE_LIMIT: f64 = 5.0e6;

/// Three-valued triviality test: Tietze simplification to the empty
/// presentation certifies triviality; a nonzero abelianization or a
/// nontrivial homomorphism into `S_k`, `2 ≤ k ≤ bound`, certifies
/// nontriviality.
pub fn triviality_certificate(p: &GroupPresentation, bound: usize) -> TrivialityCertificate {
    let p = simplify(p);
    if p.is_empty() {
        return TrivialityCertificate::CertifiedTrivial;
    }
    let ab = abelianization(&p);
    if !ab.is_zero() {
        return TrivialityCertificate::Nontrivial {
            witness: NontrivialityWitness::Abelianization { group: ab },
        };
    }
    for k in 2..=bound {
        let s = FiniteGroup::symmetric(k);
        if (s.order() as f64).powi(p.num_generators() as i32) > PERMUTATION_PROBE_LIMIT {
            break;
        }
        let mut found = None;
        search_homs(&p, &s, &mut |h| {
            if h.iter().any(|&x| x != s.unit) {
                found = Some(h.to_vec());
                false
            } else {
                true
            }
        });
        if let Some(h) = found {
            let perms = permutations_of(k);
            return TrivialityCertificate::Nontrivial {
                witness: NontrivialityWitness::Permutation {
                    degree: k,
                    images: h.into_iter().map(|x| perms[x].clone()).collect(),
                },
            };
        }
    }
    TrivialityCertificate::Unknown
}

fn permutations_of(k: usize) -> Vec<Vec<usize>> {
    FiniteGroup::symmetric(k)
        .elements
        .iter()
        .map(|e| e.chars().map(|c| c.to_digit(10).expect("digit") as usize).collect())
        .collect()
}

/// Isomorphism classes of `G`-torsors over `PSh(d)`, as conjugacy classes of
/// homomorphisms `π₁ -> G`, multiplied over connected components.
pub fn h1_set(d: &FiniteCategory, g: &FiniteGroup) -> Result<usize, Pi1Error> {
    let mut total = 1usize;
    for comp in connected_components(d) {
        let (sub, _) = d.full_subcategory(&comp);
        total *= homs_to_finite_group(&pi1_presentation(&sub)?, g).conjugacy_classes;
    }
    Ok(total)
}

/// Isomorphism classes of `G`-torsors counted directly from cocycles: a
/// torsor trivialized on every fiber is a family `a_f ∈ G` with
/// `a_{g∘f} = a_f·a_g`; trivializations are normalized along a spanning tree
/// of each component, leaving only a global conjugation.
pub fn torsor_classes(d: &FiniteCategory, g: &FiniteGroup) -> usize {
    let mut total = 1usize;
    for comp in connected_components(d) {
        let (sub, _) = d.full_subcategory(&comp);
        total *= torsor_classes_connected(&sub, g);
    }
    total
}

fn torsor_classes_connected(d: &FiniteCategory, g: &FiniteGroup) -> usize {
    let tree: HashSet<MorId> = crate::fincat::spanning_tree(d, 0).into_iter().collect();
    let free: Vec<MorId> = d
        .non_identity_morphisms()
        .filter(|f| !tree.contains(f))
        .collect();
    let position: HashMap<MorId, usize> = free.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    // Constraints a_h = a_f·a_g, each checked once its last free variable is set.
    let mut due: Vec<Vec<(MorId, MorId, MorId)>> = vec![Vec::new(); free.len() + 1];
    for f in d.non_identity_morphisms() {
        for &h in d.maps_out(d.target(f)) {
            let c = d.compose(h, f);
            let last = [f, h, c]
                .iter()
                .filter_map(|m| position.get(m).map(|&i| i + 1))
                .max()
                .unwrap_or(0);
            due[last].push((f, h, c));
        }
    }
    let value = |m: MorId, a: &[usize]| position.get(&m).map_or(g.unit, |&i| a[i]);
    let holds = |k: usize, a: &[usize]| {
        due[k]
            .iter()
            .all(|&(f, h, c)| value(c, a) == g.mul(value(f, a), value(h, a)))
    };
    if !holds(0, &[]) {
        return 0;
    }
    let mut cocycles = Vec::new();
    let mut a = vec![g.unit; free.len()];
    fn go(k: usize, a: &mut Vec<usize>, g: &FiniteGroup, holds: &dyn Fn(usize, &[usize]) -> bool, out: &mut Vec<Vec<usize>>) {
        if k == a.len() {
            out.push(a.clone());
            return;
        }
        for x in 0..g.order() {
            a[k] = x;
            if holds(k + 1, a) {
                go(k + 1, a, g, holds, out);
            }
        }
    }
    go(0, &mut a, g, &holds, &mut cocycles);
    conjugation_orbits(g, cocycles)
}

// ---------------------------------------------------------------------------
// Coset enumeration

/// A finite group recovered from a presentation, with the images of the
/// generators.
#[derive(Clone, Debug)]
pub struct EnumeratedGroup {
    pub group: FiniteGroup,
    pub generator_images: Vec<usize>,
}

/// Todd–Coxeter enumeration of the cosets of the trivial subgroup (HLT
/// strategy with coincidence processing). Fails once more than `budget`
/// cosets have been defined.
pub fn enumerate_group(p: &GroupPresentation, budget: usize) -> Result<EnumeratedGroup, Pi1Error> {
    let cols = 2 * p.num_generators();
    let col = |l: Letter| 2 * l.generator + l.inverse as usize;
    let rels: Vec<Vec<usize>> = p
        .relators
        .iter()
        .map(|w| cyclic_reduce(w).into_iter().map(col).collect())
        .filter(|w: &Vec<usize>| !w.is_empty())
        .collect();
    let mut t = CosetTable {
        table: vec![vec![None; cols]],
        forward: vec![0],
        defined: 1,
        budget,
    };
    let mut c = 0;
    while c < t.table.len() {
        for r in &rels {
            if t.forward[c] != c {
                break;
            }
            t.scan_and_fill(c, r)?;
        }
        if t.forward[c] == c {
            // Close the row so every generator acts.
            for x in 0..cols {
                if t.forward[c] == c && t.table[c][x].is_none() {
                    t.define(c, x)?;
                }
            }
        }
        c += 1;
    }
    // Compact live cosets; BFS from coset 0 also yields a word for each.
    let live: Vec<usize> = (0..t.table.len()).filter(|&c| t.forward[c] == c).collect();
    let index: HashMap<usize, usize> = live.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let n = live.len();
    let act: Vec<Vec<usize>> = live
        .iter()
        .map(|&c| {
            (0..cols)
                .map(|x| index[&t.rep(t.table[c][x].expect("complete table"))])
                .collect()
        })
        .collect();
    let mut word: Vec<Option<Vec<usize>>> = vec![None; n];
    word[0] = Some(Vec::new());
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for x in 0..cols {
            let d = act[c][x];
            if word[d].is_none() {
                let mut w = word[c].clone().expect("visited");
                w.push(x);
                word[d] = Some(w);
                queue.push_back(d);
            }
        }
    }
    let table: Vec<Vec<usize>> = (0..n)
        .map(|x| {
            (0..n)
                .map(|y| {
                    word[y]
                        .as_ref()
                        .expect("coset reached")
                        .iter()
                        .fold(x, |c, &l| act[c][l])
                })
                .collect()
        })
        .collect();
    let elements = (0..n)
        .map(|c| {
            let w = word[c].as_ref().expect("coset reached");
            if w.is_empty() {
                "1".to_string()
            } else {
                w.iter()
                    .map(|&x| {
                        let g = &p.generators[x / 2];
                        if x % 2 == 1 {
                            format!("{g}^-1")
                        } else {
                            g.clone()
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("·")
            }
        })
        .collect::<Vec<String>>();
    // Generator names may collide with "1" or with each other's words.
    let distinct: HashSet<&String> = elements.iter().collect();
    let elements = if distinct.len() == n {
        elements
    } else {
        (0..n).map(|i| format!("c{i}")).collect()
    };
    let group = FiniteGroup::new(elements, table, 0).expect("a complete coset table is a group table");
    let generator_images = (0..p.num_generators()).map(|g| act[0][2 * g]).collect();
    Ok(EnumeratedGroup {
        group,
        generator_images,
    })
}

struct CosetTable {
    table: Vec<Vec<Option<usize>>>,
    forward: Vec<usize>,
    defined: usize,
    budget: usize,
}

impl CosetTable {
    fn rep(&mut self, c: usize) -> usize {
        let mut r = c;
        while self.forward[r] != r {
            r = self.forward[r];
        }
        let mut x = c;
        while self.forward[x] != r {
            let next = self.forward[x];
            self.forward[x] = r;
            x = next;
        }
        r
    }

    fn define(&mut self, c: usize, x: usize) -> Result<usize, Pi1Error> {
        if self.defined >= self.budget {
            return Err(Pi1Error::CosetBudget(self.budget));
        }
        self.defined += 1;
        let d = self.table.len();
        self.table.push(vec![None; self.table[0].len()]);
        self.forward.push(d);
        self.table[c][x] = Some(d);
        self.table[d][x ^ 1] = Some(c);
        Ok(d)
    }

    fn scan_and_fill(&mut self, c: usize, w: &[usize]) -> Result<(), Pi1Error> {
        let n = w.len();
        loop {
            let (mut f, mut i) = (c, 0usize);
            while i < n {
                match self.table[f][w[i]] {
                    Some(next) => {
                        f = next;
                        i += 1;
                    }
                    None => break,
                }
            }
            if i == n {
                if f != c {
                    self.coincidence(f, c);
                }
                return Ok(());
            }
            let (mut b, mut j) = (c, n);
            while j > i {
                match self.table[b][w[j - 1] ^ 1] {
                    Some(next) => {
                        b = next;
                        j -= 1;
                    }
                    None => break,
                }
            }
            if j == i {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i + 1 {
                self.table[f][w[i]] = Some(b);
                self.table[b][w[i] ^ 1] = Some(f);
                return Ok(());
            }
            self.define(f, w[i])?;
        }
    }

    fn merge(&mut self, a: usize, b: usize, queue: &mut Vec<usize>) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a != b {
            let (lo, hi) = (a.min(b), a.max(b));
            self.forward[hi] = lo;
            queue.push(hi);
        }
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        let mut queue = Vec::new();
        self.merge(a, b, &mut queue);
        let mut k = 0;
        while k < queue.len() {
            let e = queue[k];
            k += 1;
            for x in 0..self.table[e].len() {
                let Some(f) = self.table[e][x] else { continue };
                if self.table[f][x ^ 1] == Some(e) {
                    self.table[f][x ^ 1] = None;
                }
                let (e1, f1) = (self.rep(e), self.rep(f));
                if let Some(t) = self.table[e1][x] {
                    self.merge(f1, t, &mut queue);
                } else if let Some(t) = self.table[f1][x ^ 1] {
                    self.merge(e1, t, &mut queue);
                } else {
                    self.table[e1][x] = Some(f1);
                    self.table[f1][x ^ 1] = Some(e1);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{monoid_as_category, FinitePoset};

    fn x(g: usize) -> Letter {
        Letter::new(g)
    }

    #[test]
    fn presentations() {
        let bz2 = pi1_presentation(&monoid_as_category(&FiniteMonoid::cyclic_group(2))).unwrap();
        assert_eq!(bz2.num_generators(), 1);
        assert_eq!(bz2.relators, vec![vec![x(0), x(0)]]);
        assert_eq!(abelianization(&bz2).torsion, vec![2]);

        let circle = pi1_presentation(&FinitePoset::pseudo_circle().site()).unwrap();
        assert_eq!(circle.num_generators(), 1);
        assert!(circle.relators.is_empty());
        assert_eq!(abelianization(&circle).betti, 1);

        let cone = pi1_presentation(&FinitePoset::chain(3).site()).unwrap();
        assert!(simplify(&cone).is_empty());
        assert!(matches!(
            pi1_presentation(&FiniteCategory::discrete(&["a", "b"])),
            Err(Pi1Error::Disconnected(2))
        ));
    }

    #[test]
    fn hom_counts() {
        let p = GroupPresentation::new(vec!["x".into()], vec![vec![x(0), x(0)]]).unwrap();
        let c = homs_to_finite_group(&p, &FiniteGroup::symmetric(3));
        assert_eq!((c.homomorphisms, c.conjugacy_classes), (4, 2));
        let c = homs_to_finite_group(&GroupPresentation::free(1), &FiniteGroup::cyclic(2));
        assert_eq!((c.homomorphisms, c.conjugacy_classes), (2, 2));
        let c = homs_to_finite_group(&p, &FiniteGroup::trivial());
        assert_eq!((c.homomorphisms, c.conjugacy_classes), (1, 1));
    }

    #[test]
    fn certificates() {
        let free = GroupPresentation::free(1);
        assert!(matches!(
            triviality_certificate(&free, 2),
            TrivialityCertificate::Nontrivial {
                witness: NontrivialityWitness::Abelianization { .. }
            }
        ));
        // <a, b | ab, ab²> is trivial and Tietze moves find it.
        let p = GroupPresentation::new(
            vec!["a".into(), "b".into()],
            vec![vec![x(0), x(1)], vec![x(0), x(1), x(1)]],
        )
        .unwrap();
        assert!(triviality_certificate(&p, 4).is_trivial());
        let z2 = GroupPresentation::new(vec!["a".into()], vec![vec![x(0), x(0)]]).unwrap();
        assert!(triviality_certificate(&z2, 2).is_nontrivial());
    }

    #[test]
    fn torsors_and_h1() {
        let bz2 = monoid_as_category(&FiniteMonoid::cyclic_group(2));
        assert_eq!(h1_set(&bz2, &FiniteGroup::cyclic(2)).unwrap(), 2);
        let circle = FinitePoset::pseudo_circle().site();
        assert_eq!(h1_set(&circle, &FiniteGroup::cyclic(3)).unwrap(), 3);
        for (_, g) in small_groups() {
            assert_eq!(h1_set(&bz2, &g).unwrap(), torsor_classes(&bz2, &g));
            assert_eq!(h1_set(&circle, &g).unwrap(), torsor_classes(&circle, &g));
        }
        let two = FiniteCategory::discrete(&["a", "b"]);
        assert_eq!(h1_set(&two, &FiniteGroup::cyclic(2)).unwrap(), 1);
    }

    #[test]
    fn coset_enumeration() {
        // S3 = <s, t | s², t², (st)³>
        let p = GroupPresentation::new(
            vec!["s".into(), "t".into()],
            vec![
                vec![x(0), x(0)],
                vec![x(1), x(1)],
                vec![x(0), x(1), x(0), x(1), x(0), x(1)],
            ],
        )
        .unwrap();
        let e = enumerate_group(&p, 1000).unwrap();
        assert_eq!(e.group.order(), 6);
        assert!(!e.group.is_abelian());
        // <a | a³, a²> is trivial, through a coincidence.
        let q = GroupPresentation::new(vec!["a".into()], vec![vec![x(0); 3], vec![x(0); 2]]).unwrap();
        assert_eq!(enumerate_group(&q, 100).unwrap().group.order(), 1);
        assert!(matches!(enumerate_group(&GroupPresentation::free(1), 50), Err(Pi1Error::CosetBudget(50))));
    }
}
