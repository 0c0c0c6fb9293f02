//! Sieves on the objects of a finite site and the precomputed lattice of all
//! of them.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::fincat::{FiniteCategory, MorId, ObjId};

/// A set of morphisms into `base` closed under precomposition.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Sieve {
    pub base: ObjId,
    /// Sorted morphism ids.
    pub members: Vec<MorId>,
}

impl Sieve {
    pub fn new(base: ObjId, mut members: Vec<MorId>) -> Self {
        members.sort_unstable();
        members.dedup();
        Sieve { base, members }
    }

    pub fn empty(base: ObjId) -> Self {
        Sieve {
            base,
            members: Vec::new(),
        }
    }

    pub fn maximal(site: &FiniteCategory, base: ObjId) -> Self {
        Sieve::new(base, site.maps_into(base).to_vec())
    }

    /// The smallest sieve containing the given morphisms into `base`.
    pub fn generated_by(site: &FiniteCategory, base: ObjId, generators: &[MorId]) -> Self {
        let mut members = Vec::new();
        for &f in generators {
            assert_eq!(site.target(f), base, "generator does not end at the base object");
            for &g in site.maps_into(site.source(f)) {
                members.push(site.compose(f, g));
            }
        }
        Sieve::new(base, members)
    }

    pub fn contains(&self, f: MorId) -> bool {
        self.members.binary_search(&f).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_maximal(&self, site: &FiniteCategory) -> bool {
        self.members.len() == site.maps_into(self.base).len()
    }

    pub fn is_subset(&self, other: &Sieve) -> bool {
        self.base == other.base && self.members.iter().all(|&f| other.contains(f))
    }

    /// Closed under precomposition with every composable morphism.
    pub fn is_valid(&self, site: &FiniteCategory) -> bool {
        self.members.iter().all(|&f| {
            site.target(f) == self.base
                && site
                    .maps_into(site.source(f))
                    .iter()
                    .all(|&g| self.contains(site.compose(f, g)))
        })
    }

    pub fn intersection(&self, other: &Sieve) -> Sieve {
        assert_eq!(self.base, other.base);
        Sieve {
            base: self.base,
            members: self
                .members
                .iter()
                .copied()
                .filter(|&f| other.contains(f))
                .collect(),
        }
    }

    /// `{ f : target(f) = base, f ∈ members }` rendered with morphism names.
    pub fn display(&self, site: &FiniteCategory) -> String {
        let names: Vec<&str> = self.members.iter().map(|&f| site.morphism_name(f)).collect();
        format!("{{{}}} on {}", names.join(", "), site.object_name(self.base))
    }
}

/// `f*S = { g : f∘g ∈ S }`, a sieve on the source of `f`.
pub fn pullback_sieve(site: &FiniteCategory, sieve: &Sieve, f: MorId) -> Sieve {
    assert_eq!(site.target(f), sieve.base, "pullback along a morphism not into the base");
    let d = site.source(f);
    Sieve {
        base: d,
        members: site
            .maps_into(d)
            .iter()
            .copied()
            .filter(|&g| sieve.contains(site.compose(f, g)))
            .collect(),
    }
}

/// All sieves on `c`, from the empty sieve to the maximal one, ordered by
/// size and then lexicographically.
pub fn enumerate_sieves(site: &FiniteCategory, c: ObjId) -> Vec<Sieve> {
    let into = site.maps_into(c);
    let pos: HashMap<MorId, usize> = into.iter().enumerate().map(|(i, &f)| (f, i)).collect();
    let principal: Vec<Bits> = into
        .iter()
        .map(|&f| {
            let mut b = Bits::new(into.len());
            for &g in site.maps_into(site.source(f)) {
                b.insert(pos[&site.compose(f, g)]);
            }
            b
        })
        .collect();
    let mut seen: HashSet<Bits> = HashSet::new();
    let mut stack = vec![Bits::new(into.len())];
    seen.insert(stack[0].clone());
    while let Some(s) = stack.pop() {
        for (k, p) in principal.iter().enumerate() {
            if s.contains(k) {
                continue;
            }
            let t = s.union(p);
            if seen.insert(t.clone()) {
                stack.push(t);
            }
        }
    }
    let mut sieves: Vec<Sieve> = seen
        .into_iter()
        .map(|b| Sieve::new(c, b.iter().map(|k| into[k]).collect()))
        .collect();
    sieves.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.members.cmp(&b.members)));
    sieves
}

/// Small fixed-width bit set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    words: Vec<u64>,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits {
            words: vec![0; len.div_ceil(64).max(1)],
        }
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn union(&self, other: &Bits) -> Bits {
        Bits {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a | b).collect(),
        }
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// Every sieve on every object, with pullbacks tabulated.
#[derive(Clone, Debug)]
pub struct SieveLattice {
    sieves: Vec<Vec<Sieve>>,
    bits: Vec<Vec<Bits>>,
    index: Vec<HashMap<Vec<MorId>, usize>>,
    /// Position of each morphism within `site.maps_into(target)`.
    into_pos: Vec<usize>,
    /// `pullbacks[c][s][k]` = index of the pullback of sieve `s` along the
    /// `k`-th morphism into `c`.
    pullbacks: Vec<Vec<Vec<usize>>>,
}

impl SieveLattice {
    pub fn new(site: &FiniteCategory) -> Self {
        let n = site.num_objects();
        let mut into_pos = vec![0; site.num_morphisms()];
        for c in 0..n {
            for (k, &f) in site.maps_into(c).iter().enumerate() {
                into_pos[f] = k;
            }
        }
        let sieves: Vec<Vec<Sieve>> = (0..n).map(|c| enumerate_sieves(site, c)).collect();
        let index: Vec<HashMap<Vec<MorId>, usize>> = sieves
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.members.clone(), i)).collect())
            .collect();
        let bits = sieves
            .iter()
            .enumerate()
            .map(|(c, list)| {
                list.iter()
                    .map(|s| {
                        let mut b = Bits::new(site.maps_into(c).len());
                        for &f in &s.members {
                            b.insert(into_pos[f]);
                        }
                        b
                    })
                    .collect()
            })
            .collect();
        let pullbacks = (0..n)
            .map(|c| {
                sieves[c]
                    .iter()
                    .map(|s| {
                        site.maps_into(c)
                            .iter()
                            .map(|&f| {
                                let p = pullback_sieve(site, s, f);
                                index[p.base][&p.members]
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        SieveLattice {
            sieves,
            bits,
            index,
            into_pos,
            pullbacks,
        }
    }

    pub fn num_objects(&self) -> usize {
        self.sieves.len()
    }

    pub fn sieves(&self, c: ObjId) -> &[Sieve] {
        &self.sieves[c]
    }

    pub fn sieve(&self, c: ObjId, s: usize) -> &Sieve {
        &self.sieves[c][s]
    }

    pub fn index_of(&self, sieve: &Sieve) -> Option<usize> {
        self.index.get(sieve.base)?.get(&sieve.members).copied()
    }

    pub fn empty(&self, _c: ObjId) -> usize {
        0
    }

    pub fn maximal(&self, c: ObjId) -> usize {
        self.sieves[c].len() - 1
    }

    /// Index of `f*S` for sieve `s` on `target(f)`.
    pub fn pullback(&self, site: &FiniteCategory, s: usize, f: MorId) -> usize {
        self.pullbacks[site.target(f)][s][self.into_pos[f]]
    }

    pub fn is_subset(&self, c: ObjId, a: usize, b: usize) -> bool {
        self.bits[c][a].is_subset(&self.bits[c][b])
    }

    pub fn total(&self) -> usize {
        self.sieves.iter().map(|l| l.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{monoid_as_category, FiniteMonoid, FinitePoset};

    #[test]
    fn sieve_counts() {
        let z2 = monoid_as_category(&FiniteMonoid::cyclic_group(2));
        assert_eq!(enumerate_sieves(&z2, 0).len(), 2);
        let e = monoid_as_category(&FiniteMonoid::idempotent());
        let sieves = enumerate_sieves(&e, 0);
        assert_eq!(sieves.len(), 3);
        let e_id = e.find_morphism("e").unwrap();
        assert_eq!(sieves[1].members, vec![e_id]);
        let circle = FinitePoset::pseudo_circle().site();
        let a = circle.find_object("a").unwrap();
        assert_eq!(enumerate_sieves(&circle, a).len(), 5);
    }

    #[test]
    fn pullbacks_on_idempotent_site() {
        let site = monoid_as_category(&FiniteMonoid::idempotent());
        let e = site.find_morphism("e").unwrap();
        let s = Sieve::new(0, vec![e]);
        assert!(pullback_sieve(&site, &s, e).is_maximal(&site));
        assert_eq!(pullback_sieve(&site, &s, site.identity(0)), s);
        assert!(pullback_sieve(&site, &Sieve::empty(0), e).is_empty());
        let lattice = SieveLattice::new(&site);
        assert_eq!(lattice.pullback(&site, 1, e), lattice.maximal(0));
        assert!(lattice.sieves(0).iter().all(|s| s.is_valid(&site)));
    }
}
