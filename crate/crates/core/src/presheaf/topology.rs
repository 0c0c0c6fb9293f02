//! Grothendieck topologies on a finite site: axiom checks, generated
//! topologies, the largest topology making a presheaf a sheaf or separated,
//! intersections over families, and sheafification.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::sieve::{Sieve, SieveLattice};
use super::{family_of, matching_families, Presheaf};
use crate::fincat::{FiniteCategory, MorId, ObjId};

/// Covering sieves per object. Also used for candidates that have not been
/// checked against the axioms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrothendieckTopology {
    pub covers: Vec<BTreeSet<Sieve>>,
}

impl GrothendieckTopology {
    pub fn from_mask(lattice: &SieveLattice, mask: &[Vec<bool>]) -> Self {
        GrothendieckTopology {
            covers: mask
                .iter()
                .enumerate()
                .map(|(c, row)| {
                    row.iter()
                        .enumerate()
                        .filter(|(_, &m)| m)
                        .map(|(s, _)| lattice.sieve(c, s).clone())
                        .collect()
                })
                .collect(),
        }
    }

    /// Membership over the lattice's sieve indices; `None` if some listed
    /// sieve is not a sieve of the site.
    pub fn to_mask(&self, lattice: &SieveLattice) -> Option<Vec<Vec<bool>>> {
        let mut mask: Vec<Vec<bool>> = (0..lattice.num_objects())
            .map(|c| vec![false; lattice.sieves(c).len()])
            .collect();
        if self.covers.len() != lattice.num_objects() {
            return None;
        }
        for (c, set) in self.covers.iter().enumerate() {
            for s in set {
                if s.base != c {
                    return None;
                }
                mask[c][lattice.index_of(s)?] = true;
            }
        }
        Some(mask)
    }

    /// Only maximal sieves cover.
    pub fn minimal(site: &FiniteCategory) -> Self {
        GrothendieckTopology {
            covers: (0..site.num_objects())
                .map(|c| BTreeSet::from([Sieve::maximal(site, c)]))
                .collect(),
        }
    }

    /// Every sieve covers.
    pub fn maximal(lattice: &SieveLattice) -> Self {
        GrothendieckTopology {
            covers: (0..lattice.num_objects())
                .map(|c| lattice.sieves(c).iter().cloned().collect())
                .collect(),
        }
    }

    pub fn covers(&self, c: ObjId) -> &BTreeSet<Sieve> {
        &self.covers[c]
    }

    pub fn contains(&self, sieve: &Sieve) -> bool {
        self.covers
            .get(sieve.base)
            .is_some_and(|set| set.contains(sieve))
    }

    pub fn is_subset_of(&self, other: &GrothendieckTopology) -> bool {
        self.covers.len() == other.covers.len()
            && self
                .covers
                .iter()
                .zip(&other.covers)
                .all(|(a, b)| a.is_subset(b))
    }

    pub fn intersection(&self, other: &GrothendieckTopology) -> GrothendieckTopology {
        GrothendieckTopology {
            covers: self
                .covers
                .iter()
                .zip(&other.covers)
                .map(|(a, b)| a.intersection(b).cloned().collect())
                .collect(),
        }
    }

    pub fn num_covers(&self) -> usize {
        self.covers.iter().map(|s| s.len()).sum()
    }

    /// Only maximal sieves cover.
    pub fn is_trivial(&self, site: &FiniteCategory) -> bool {
        self.covers
            .iter()
            .all(|set| set.iter().all(|s| s.is_maximal(site)))
    }

    /// Some object is covered by the empty sieve.
    pub fn is_degenerate(&self) -> bool {
        self.covers.iter().any(|set| set.iter().any(|s| s.is_empty()))
    }

    /// Intersection of all covering sieves on `c`. In a topology this is the
    /// least covering sieve.
    pub fn minimal_covering_sieve(&self, site: &FiniteCategory, c: ObjId) -> Sieve {
        self.covers[c]
            .iter()
            .fold(Sieve::maximal(site, c), |acc, s| acc.intersection(s))
    }
}

/// First failure of an axiom, with the sieves that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxiomViolation {
    /// A listed sieve is not a sieve of the site.
    UnknownSieve { object: ObjId },
    /// The maximal sieve on `object` does not cover.
    MissingMaximal { object: ObjId },
    /// `sieve` covers but its pullback along `morphism` does not.
    NotStable { sieve: Sieve, morphism: MorId },
    /// `sieve` does not cover, although it covers locally on `cover`.
    NotTransitive { sieve: Sieve, cover: Sieve },
    /// `sieve` does not cover, but its pullback along the split epimorphism
    /// `morphism` does.
    NotLocal { sieve: Sieve, morphism: MorId },
    /// `inner ⊆ outer`, `outer` covers and `inner` is dense in `outer`, but
    /// `inner` does not cover.
    NotClosedUnderComposition { inner: Sieve, outer: Sieve },
    /// `smaller ⊆ larger` and `smaller` covers but `larger` does not.
    NotUpwardClosed { smaller: Sieve, larger: Sieve },
}

/// Verdicts of the classical axioms (maximality, stability, transitivity)
/// and of the characterization by local, composition-closed, upward-closed
/// classes of monomorphisms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyVerdict {
    pub classical: Result<(), AxiomViolation>,
    pub characterization: Result<(), AxiomViolation>,
}

impl TopologyVerdict {
    pub fn passes(&self) -> bool {
        self.classical.is_ok() && self.characterization.is_ok()
    }

    pub fn agree(&self) -> bool {
        self.classical.is_ok() == self.characterization.is_ok()
    }
}

pub fn is_topology(
    site: &FiniteCategory,
    lattice: &SieveLattice,
    candidate: &GrothendieckTopology,
) -> TopologyVerdict {
    match candidate.to_mask(lattice) {
        Some(mask) => TopologyVerdict {
            classical: check_classical(site, lattice, &mask),
            characterization: check_characterization(site, lattice, &mask),
        },
        None => {
            let object = candidate
                .covers
                .iter()
                .enumerate()
                .find(|(c, set)| set.iter().any(|s| s.base != *c || lattice.index_of(s).is_none()))
                .map(|(c, _)| c)
                .unwrap_or(0);
            let err = Err(AxiomViolation::UnknownSieve { object });
            TopologyVerdict {
                classical: err.clone(),
                characterization: err,
            }
        }
    }
}

fn sieve_covers_locally(
    site: &FiniteCategory,
    lattice: &SieveLattice,
    mask: &[Vec<bool>],
    s: usize,
    along: &Sieve,
) -> bool {
    along
        .members
        .iter()
        .all(|&f| mask[site.source(f)][lattice.pullback(site, s, f)])
}

fn check_stability(site: &FiniteCategory, lattice: &SieveLattice, mask: &[Vec<bool>]) -> Result<(), AxiomViolation> {
    for c in 0..lattice.num_objects() {
        for s in 0..lattice.sieves(c).len() {
            if !mask[c][s] {
                continue;
            }
            for &f in site.maps_into(c) {
                if !mask[site.source(f)][lattice.pullback(site, s, f)] {
                    return Err(AxiomViolation::NotStable {
                        sieve: lattice.sieve(c, s).clone(),
                        morphism: f,
                    });
                }
            }
        }
    }
    Ok(())
}

fn check_maximal(lattice: &SieveLattice, mask: &[Vec<bool>]) -> Result<(), AxiomViolation> {
    for (c, row) in mask.iter().enumerate() {
        if !row[lattice.maximal(c)] {
            return Err(AxiomViolation::MissingMaximal { object: c });
        }
    }
    Ok(())
}

fn check_classical(site: &FiniteCategory, lattice: &SieveLattice, mask: &[Vec<bool>]) -> Result<(), AxiomViolation> {
    check_maximal(lattice, mask)?;
    check_stability(site, lattice, mask)?;
    for c in 0..lattice.num_objects() {
        for s in 0..lattice.sieves(c).len() {
            if mask[c][s] {
                continue;
            }
            for r in 0..lattice.sieves(c).len() {
                if mask[c][r] && sieve_covers_locally(site, lattice, mask, s, lattice.sieve(c, r)) {
                    return Err(AxiomViolation::NotTransitive {
                        sieve: lattice.sieve(c, s).clone(),
                        cover: lattice.sieve(c, r).clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

fn is_split_epi(site: &FiniteCategory, f: MorId) -> bool {
    let c = site.target(f);
    site.hom(c, site.source(f))
        .iter()
        .any(|&s| site.compose(f, s) == site.identity(c))
}

fn check_characterization(
    site: &FiniteCategory,
    lattice: &SieveLattice,
    mask: &[Vec<bool>],
) -> Result<(), AxiomViolation> {
    // Subcategory: identities.
    check_maximal(lattice, mask)?;
    // Locality, "only if": pullbacks along any morphism.
    check_stability(site, lattice, mask)?;
    // Locality, "if": a jointly epimorphic family onto a representable
    // contains a split epimorphism.
    for c in 0..lattice.num_objects() {
        for s in 0..lattice.sieves(c).len() {
            if mask[c][s] {
                continue;
            }
            for &f in site.maps_into(c) {
                if is_split_epi(site, f) && mask[site.source(f)][lattice.pullback(site, s, f)] {
                    return Err(AxiomViolation::NotLocal {
                        sieve: lattice.sieve(c, s).clone(),
                        morphism: f,
                    });
                }
            }
        }
    }
    // Subcategory: composition T ↪ S ↪ y(c). The first inclusion is dense
    // when its pullback along every element of S is.
    for c in 0..lattice.num_objects() {
        let n = lattice.sieves(c).len();
        for t in 0..n {
            if mask[c][t] {
                continue;
            }
            for s in 0..n {
                if mask[c][s]
                    && lattice.is_subset(c, t, s)
                    && sieve_covers_locally(site, lattice, mask, t, lattice.sieve(c, s))
                {
                    return Err(AxiomViolation::NotClosedUnderComposition {
                        inner: lattice.sieve(c, t).clone(),
                        outer: lattice.sieve(c, s).clone(),
                    });
                }
            }
        }
    }
    // Upward closure.
    for c in 0..lattice.num_objects() {
        let n = lattice.sieves(c).len();
        for t in 0..n {
            if !mask[c][t] {
                continue;
            }
            for s in 0..n {
                if !mask[c][s] && lattice.is_subset(c, t, s) {
                    return Err(AxiomViolation::NotUpwardClosed {
                        smaller: lattice.sieve(c, t).clone(),
                        larger: lattice.sieve(c, s).clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// The least topology containing `seeds`.
pub fn topology_generated(site: &FiniteCategory, lattice: &SieveLattice, seeds: &[Sieve]) -> GrothendieckTopology {
    let mut mask: Vec<Vec<bool>> = (0..lattice.num_objects())
        .map(|c| {
            let mut row = vec![false; lattice.sieves(c).len()];
            row[lattice.maximal(c)] = true;
            row
        })
        .collect();
    for s in seeds {
        let i = lattice.index_of(s).expect("seed is a sieve of the site");
        mask[s.base][i] = true;
    }
    close_topology(site, lattice, &mut mask);
    GrothendieckTopology::from_mask(lattice, &mask)
}

/// Close a membership mask under pullback and transitivity.
pub(crate) fn close_topology(site: &FiniteCategory, lattice: &SieveLattice, mask: &mut [Vec<bool>]) {
    loop {
        let mut changed = false;
        for c in 0..lattice.num_objects() {
            for s in 0..lattice.sieves(c).len() {
                if !mask[c][s] {
                    continue;
                }
                for &f in site.maps_into(c) {
                    let p = lattice.pullback(site, s, f);
                    let d = site.source(f);
                    if !mask[d][p] {
                        mask[d][p] = true;
                        changed = true;
                    }
                }
            }
        }
        for c in 0..lattice.num_objects() {
            let n = lattice.sieves(c).len();
            for s in 0..n {
                if mask[c][s] {
                    continue;
                }
                let covered = (0..n).any(|r| {
                    mask[c][r] && sieve_covers_locally(site, lattice, mask, s, lattice.sieve(c, r))
                });
                if covered {
                    mask[c][s] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SheafMode {
    Sheaf,
    Separated,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyMode {
    Pure,
    Dense,
}

/// For each sieve `T` on `d`: is `X(d) -> Hom(T, X)` bijective, injective.
fn restriction_verdicts(site: &FiniteCategory, lattice: &SieveLattice, x: &Presheaf) -> Vec<Vec<(bool, bool)>> {
    (0..lattice.num_objects())
        .map(|d| {
            lattice
                .sieves(d)
                .iter()
                .map(|t| {
                    let families = matching_families(site, t, x);
                    let images: BTreeSet<Vec<usize>> =
                        (0..x.size(d)).map(|s| family_of(site, t, x, s)).collect();
                    let injective = images.len() == x.size(d);
                    (injective && families.len() == x.size(d), injective)
                })
                .collect()
        })
        .collect()
}

/// `S` covers `c` iff for every `f: d -> c` the map `X(d) -> Hom(f*S, X)`
/// is bijective (sheaf) or injective (separated).
pub fn largest_topology_for(
    site: &FiniteCategory,
    lattice: &SieveLattice,
    x: &Presheaf,
    mode: SheafMode,
) -> GrothendieckTopology {
    let verdicts = restriction_verdicts(site, lattice, x);
    let pick = |v: (bool, bool)| match mode {
        SheafMode::Sheaf => v.0,
        SheafMode::Separated => v.1,
    };
    let mask: Vec<Vec<bool>> = (0..lattice.num_objects())
        .map(|c| {
            (0..lattice.sieves(c).len())
                .map(|s| {
                    site.maps_into(c).iter().all(|&f| {
                        let d = site.source(f);
                        pick(verdicts[d][lattice.pullback(site, s, f)])
                    })
                })
                .collect()
        })
        .collect();
    GrothendieckTopology::from_mask(lattice, &mask)
}

/// Intersection of the largest topologies for the members of `family`:
/// sheaf topologies for `Pure`, separated ones for `Dense`.
pub fn a_pure_topology(
    site: &FiniteCategory,
    lattice: &SieveLattice,
    family: &[Presheaf],
    mode: FamilyMode,
) -> GrothendieckTopology {
    let sheaf_mode = match mode {
        FamilyMode::Pure => SheafMode::Sheaf,
        FamilyMode::Dense => SheafMode::Separated,
    };
    family.iter().fold(GrothendieckTopology::maximal(lattice), |acc, x| {
        acc.intersection(&largest_topology_for(site, lattice, x, sheaf_mode))
    })
}

/// Every covering sieve has unique (sheaf) or at most one (separated)
/// amalgamation for each matching family.
pub fn is_sheaf(site: &FiniteCategory, p: &Presheaf, j: &GrothendieckTopology, mode: SheafMode) -> bool {
    j.covers.iter().enumerate().all(|(c, set)| {
        set.iter().all(|s| {
            let images: BTreeSet<Vec<usize>> = (0..p.size(c)).map(|x| family_of(site, s, p, x)).collect();
            let injective = images.len() == p.size(c);
            match mode {
                SheafMode::Separated => injective,
                SheafMode::Sheaf => injective && matching_families(site, s, p).len() == p.size(c),
            }
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sheafification {
    pub sheaf: Presheaf,
    /// `unit[c][x]` is the image of `x ∈ P(c)`.
    pub unit: Vec<Vec<usize>>,
}

/// One plus construction. Every covering sieve contains the least one, so
/// matching families on the least covering sieve compute the colimit.
fn plus(site: &FiniteCategory, p: &Presheaf, j: &GrothendieckTopology) -> Sheafification {
    let n = site.num_objects();
    let least: Vec<Sieve> = (0..n).map(|c| j.minimal_covering_sieve(site, c)).collect();
    let families: Vec<Vec<Vec<usize>>> = (0..n).map(|c| matching_families(site, &least[c], p)).collect();
    let index: Vec<HashMap<&Vec<usize>, usize>> = families
        .iter()
        .map(|fs| fs.iter().enumerate().map(|(i, f)| (f, i)).collect())
        .collect();
    let unit: Vec<Vec<usize>> = (0..n)
        .map(|c| {
            (0..p.size(c))
                .map(|x| index[c][&family_of(site, &least[c], p, x)])
                .collect()
        })
        .collect();
    let restriction: Vec<Vec<usize>> = (0..site.num_morphisms())
        .map(|f| {
            let (d, c) = (site.source(f), site.target(f));
            let pos: HashMap<MorId, usize> =
                least[c].members.iter().enumerate().map(|(i, &g)| (g, i)).collect();
            families[c]
                .iter()
                .map(|fam| {
                    let restricted: Vec<usize> = least[d]
                        .members
                        .iter()
                        .map(|&h| fam[pos[&site.compose(f, h)]])
                        .collect();
                    index[d][&restricted]
                })
                .collect()
        })
        .collect();
    let labels: Vec<Vec<String>> = (0..n)
        .map(|c| {
            (0..families[c].len())
                .map(|i| {
                    let pre: Vec<&str> = (0..p.size(c))
                        .filter(|&x| unit[c][x] == i)
                        .map(|x| p.label(c, x))
                        .collect();
                    if pre.is_empty() {
                        format!("#{i}")
                    } else {
                        pre.join("=")
                    }
                })
                .collect()
        })
        .collect();
    let sheaf = Presheaf::new(site, labels, restriction).expect("plus construction is functorial");
    Sheafification { sheaf, unit }
}

/// The associated sheaf, by the plus construction applied twice, with the
/// unit map from `p`.
pub fn sheafify(site: &FiniteCategory, p: &Presheaf, j: &GrothendieckTopology) -> Sheafification {
    let once = plus(site, p, j);
    let twice = plus(site, &once.sheaf, j);
    let unit = once
        .unit
        .iter()
        .enumerate()
        .map(|(c, u)| u.iter().map(|&y| twice.unit[c][y]).collect())
        .collect();
    Sheafification {
        sheaf: twice.sheaf,
        unit,
    }
}
