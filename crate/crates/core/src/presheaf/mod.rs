//! Finite presheaves on a finite site, their categories of elements, natural
//! transformations, sieves and Grothendieck topologies.

pub mod sieve;
pub mod topology;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fincat::{FiniteCategory, MorId, Morphism, ObjId};

pub use sieve::{enumerate_sieves, pullback_sieve, Sieve, SieveLattice};
pub use topology::{
    a_pure_topology, is_sheaf, is_topology, largest_topology_for, sheafify, topology_generated,
    AxiomViolation, FamilyMode, GrothendieckTopology, SheafMode, Sheafification, TopologyVerdict,
};

/// A presheaf with finite sets of sections. Sections of `P(c)` are the
/// indices `0..size(c)`; labels are kept for display.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presheaf {
    labels: Vec<Vec<String>>,
    /// For `f: d -> c`, `restriction[f][x]` is `P(f)(x) ∈ P(d)` for `x ∈ P(c)`.
    restriction: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PresheafError {
    #[error("unknown object #{0}")]
    UnknownObject(ObjId),
    #[error("expected sections for {expected} objects, got {got}")]
    WrongObjectCount { expected: usize, got: usize },
    #[error("restriction along `{0}` has the wrong shape")]
    WrongShape(String),
    #[error("duplicate section label `{label}` at object `{object}`")]
    DuplicateLabel { object: String, label: String },
    #[error("restriction along identity `{0}` is not the identity")]
    IdentityNotPreserved(String),
    #[error("restriction is not functorial on `{outer}` ∘ `{inner}`")]
    NotFunctorial { outer: String, inner: String },
}

impl Presheaf {
    pub fn new(
        site: &FiniteCategory,
        labels: Vec<Vec<String>>,
        restriction: Vec<Vec<usize>>,
    ) -> Result<Self, PresheafError> {
        if labels.len() != site.num_objects() {
            return Err(PresheafError::WrongObjectCount {
                expected: site.num_objects(),
                got: labels.len(),
            });
        }
        for (c, ls) in labels.iter().enumerate() {
            let mut seen = HashMap::new();
            for l in ls {
                if seen.insert(l.as_str(), ()).is_some() {
                    return Err(PresheafError::DuplicateLabel {
                        object: site.object_name(c).to_string(),
                        label: l.clone(),
                    });
                }
            }
        }
        if restriction.len() != site.num_morphisms() {
            return Err(PresheafError::WrongShape(format!(
                "{} maps for {} morphisms",
                restriction.len(),
                site.num_morphisms()
            )));
        }
        for (f, map) in restriction.iter().enumerate() {
            let (d, c) = (site.source(f), site.target(f));
            if map.len() != labels[c].len() || map.iter().any(|&x| x >= labels[d].len()) {
                return Err(PresheafError::WrongShape(site.morphism_name(f).to_string()));
            }
        }
        for c in 0..site.num_objects() {
            let id = site.identity(c);
            if restriction[id].iter().enumerate().any(|(x, &y)| x != y) {
                return Err(PresheafError::IdentityNotPreserved(
                    site.morphism_name(id).to_string(),
                ));
            }
        }
        // P(g∘f) = P(f)∘P(g)
        for g in 0..site.num_morphisms() {
            for f in 0..site.num_morphisms() {
                if let Some(h) = site.try_compose(g, f) {
                    let ok = (0..labels[site.target(g)].len())
                        .all(|x| restriction[h][x] == restriction[f][restriction[g][x]]);
                    if !ok {
                        return Err(PresheafError::NotFunctorial {
                            outer: site.morphism_name(g).to_string(),
                            inner: site.morphism_name(f).to_string(),
                        });
                    }
                }
            }
        }
        Ok(Presheaf {
            labels,
            restriction,
        })
    }

    /// Sections numbered `0..n` at each object.
    pub fn from_sizes(
        site: &FiniteCategory,
        sizes: &[usize],
        restriction: Vec<Vec<usize>>,
    ) -> Result<Self, PresheafError> {
        let labels = sizes
            .iter()
            .map(|&n| (0..n).map(|i| i.to_string()).collect())
            .collect();
        Presheaf::new(site, labels, restriction)
    }

    pub fn size(&self, c: ObjId) -> usize {
        self.labels[c].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.labels.iter().map(|l| l.len()).collect()
    }

    pub fn label(&self, c: ObjId, x: usize) -> &str {
        &self.labels[c][x]
    }

    pub fn labels(&self, c: ObjId) -> &[String] {
        &self.labels[c]
    }

    /// `P(f)(x)` for `f: d -> c`, `x ∈ P(c)`.
    pub fn restrict(&self, f: MorId, x: usize) -> usize {
        self.restriction[f][x]
    }

    pub fn restriction(&self, f: MorId) -> &[usize] {
        &self.restriction[f]
    }

    pub fn is_terminal(&self) -> bool {
        self.labels.iter().all(|l| l.len() == 1)
    }

    /// Total number of sections.
    pub fn total_size(&self) -> usize {
        self.labels.iter().map(|l| l.len()).sum()
    }
}

/// `Hom(-, c)` with restriction by precomposition.
pub fn representable(site: &FiniteCategory, c: ObjId) -> Result<Presheaf, PresheafError> {
    if c >= site.num_objects() {
        return Err(PresheafError::UnknownObject(c));
    }
    let sieve = Sieve::maximal(site, c);
    Ok(sieve_presheaf(site, &sieve))
}

/// A sieve as a subpresheaf of the representable on its base.
pub fn sieve_presheaf(site: &FiniteCategory, sieve: &Sieve) -> Presheaf {
    let n = site.num_objects();
    let mut labels = vec![Vec::new(); n];
    let mut pos: HashMap<MorId, usize> = HashMap::new();
    for &f in &sieve.members {
        let d = site.source(f);
        pos.insert(f, labels[d].len());
        labels[d].push(site.morphism_name(f).to_string());
    }
    let mut members_at: Vec<Vec<MorId>> = vec![Vec::new(); n];
    for &f in &sieve.members {
        members_at[site.source(f)].push(f);
    }
    let restriction = (0..site.num_morphisms())
        .map(|h| {
            members_at[site.target(h)]
                .iter()
                .map(|&g| pos[&site.compose(g, h)])
                .collect()
        })
        .collect();
    Presheaf {
        labels,
        restriction,
    }
}

pub fn terminal(site: &FiniteCategory) -> Presheaf {
    constant(site, 1)
}

/// The constant presheaf with `k` sections everywhere.
pub fn constant(site: &FiniteCategory, k: usize) -> Presheaf {
    Presheaf {
        labels: vec![(0..k).map(|i| i.to_string()).collect(); site.num_objects()],
        restriction: vec![(0..k).collect(); site.num_morphisms()],
    }
}

/// Category of elements together with its projection to the site.
#[derive(Clone, Debug)]
pub struct ElementsCategory {
    pub category: FiniteCategory,
    /// Object `i` of the category is the section `elements[i] = (d, x)`.
    pub elements: Vec<(ObjId, usize)>,
    /// Underlying site morphism of each morphism.
    pub projection: Vec<MorId>,
}

/// Objects `(d, x)` with `x ∈ P(d)`; a morphism `(d, x) -> (d', x')` is a
/// site morphism `f: d -> d'` with `P(f)(x') = x`.
pub fn elements_category(site: &FiniteCategory, p: &Presheaf) -> ElementsCategory {
    let mut elements = Vec::new();
    let mut obj_of: Vec<Vec<usize>> = Vec::with_capacity(site.num_objects());
    for d in 0..site.num_objects() {
        obj_of.push((0..p.size(d)).map(|x| elements.len() + x).collect());
        elements.extend((0..p.size(d)).map(|x| (d, x)));
    }
    let mut morphisms = Vec::new();
    let mut projection = Vec::new();
    // mor_of[f][x'] for x' ∈ P(target f)
    let mut mor_of: Vec<Vec<usize>> = vec![Vec::new(); site.num_morphisms()];
    for f in 0..site.num_morphisms() {
        let (d, d2) = (site.source(f), site.target(f));
        for x2 in 0..p.size(d2) {
            let x = p.restrict(f, x2);
            mor_of[f].push(morphisms.len());
            projection.push(f);
            morphisms.push(Morphism {
                name: format!("{}@{}", site.morphism_name(f), p.label(d2, x2)),
                source: obj_of[d][x],
                target: obj_of[d2][x2],
            });
        }
    }
    let objects = elements
        .iter()
        .map(|&(d, x)| format!("{}:{}", site.object_name(d), p.label(d, x)))
        .collect();
    let identities = elements
        .iter()
        .map(|&(d, x)| mor_of[site.identity(d)][x])
        .collect();
    // The target section of each morphism determines it together with f.
    let target_section: Vec<usize> = morphisms
        .iter()
        .map(|m| elements[m.target].1)
        .collect();
    let category = FiniteCategory::new(objects, morphisms.clone(), identities, |g, f| {
        if morphisms[f].target != morphisms[g].source {
            return None;
        }
        let h = site.compose(projection[g], projection[f]);
        Some(mor_of[h][target_section[g]])
    })
    .expect("categories of elements are categories");
    ElementsCategory {
        category,
        elements,
        projection,
    }
}

/// All natural transformations `P => Q`, each given by its components.
pub fn hom_presheaf(site: &FiniteCategory, p: &Presheaf, q: &Presheaf) -> Vec<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    search_transformations(site, p, q, usize::MAX, &mut |alpha| {
        out.push(alpha.to_vec());
    });
    out
}

/// Number of natural transformations `P => Q`.
pub fn count_hom(site: &FiniteCategory, p: &Presheaf, q: &Presheaf) -> usize {
    let mut n = 0usize;
    search_transformations(site, p, q, usize::MAX, &mut |_| n += 1);
    n
}

/// Backtracking over sections of `P`: each section `(c, x)` gets a value in
/// `Q(c)`, checked against every restriction relation to earlier sections.
/// `emit` receives the components indexed `[object][section]`.
fn search_transformations(
    site: &FiniteCategory,
    p: &Presheaf,
    q: &Presheaf,
    limit: usize,
    emit: &mut dyn FnMut(&[Vec<usize>]),
) {
    let elems: Vec<(ObjId, usize)> = (0..site.num_objects())
        .flat_map(|c| (0..p.size(c)).map(move |x| (c, x)))
        .collect();
    let mut order_of: Vec<Vec<usize>> = (0..site.num_objects()).map(|c| vec![0; p.size(c)]).collect();
    for (i, &(c, x)) in elems.iter().enumerate() {
        order_of[c][x] = i;
    }
    // constraints[i]: (f, j, i_is_source) relating element i to an earlier j:
    // for f: d -> c, α_d(P(f)x) = Q(f)(α_c(x)).
    let mut constraints: Vec<Vec<(MorId, usize, bool)>> = vec![Vec::new(); elems.len()];
    for f in 0..site.num_morphisms() {
        if site.is_identity(f) {
            continue;
        }
        let (d, c) = (site.source(f), site.target(f));
        for x in 0..p.size(c) {
            let hi = order_of[c][x];
            let lo = order_of[d][p.restrict(f, x)];
            if hi > lo {
                constraints[hi].push((f, lo, false));
            } else {
                constraints[lo].push((f, hi, true));
            }
        }
    }
    let mut value = vec![0usize; elems.len()];
    let mut count = 0usize;
    fn rec(
        i: usize,
        elems: &[(ObjId, usize)],
        constraints: &[Vec<(MorId, usize, bool)>],
        q: &Presheaf,
        value: &mut Vec<usize>,
        count: &mut usize,
        limit: usize,
        emit: &mut dyn FnMut(&[Vec<usize>]),
        p: &Presheaf,
    ) {
        if *count >= limit {
            return;
        }
        if i == elems.len() {
            *count += 1;
            let mut comps: Vec<Vec<usize>> = (0..p.labels.len()).map(|c| vec![0; p.size(c)]).collect();
            for (k, &(c, x)) in elems.iter().enumerate() {
                comps[c][x] = value[k];
            }
            emit(&comps);
            return;
        }
        let (c, _) = elems[i];
        for v in 0..q.size(c) {
            value[i] = v;
            let ok = constraints[i].iter().all(|&(f, j, i_is_source)| {
                if i_is_source {
                    // i = (d, P(f)x), j = (c', x): α_i = Q(f)(α_j)
                    value[i] == q.restrict(f, value[j])
                } else {
                    // i = (c', x), j = (d, P(f)x)
                    value[j] == q.restrict(f, value[i])
                }
            });
            if ok {
                rec(i + 1, elems, constraints, q, value, count, limit, emit, p);
            }
        }
    }
    rec(0, &elems, &constraints, q, &mut value, &mut count, limit, emit, p);
}

/// Matching families for `sieve` with values in `p`: one section
/// `x_g ∈ P(source g)` per member `g`, with `P(h)(x_g) = x_{g∘h}`.
/// Families are indexed like `sieve.members`.
pub fn matching_families(site: &FiniteCategory, sieve: &Sieve, p: &Presheaf) -> Vec<Vec<usize>> {
    let s = sieve_presheaf(site, sieve);
    let mut pos: Vec<(ObjId, usize)> = Vec::with_capacity(sieve.len());
    let mut counters = vec![0usize; site.num_objects()];
    for &g in &sieve.members {
        let d = site.source(g);
        pos.push((d, counters[d]));
        counters[d] += 1;
    }
    hom_presheaf(site, &s, p)
        .into_iter()
        .map(|alpha| pos.iter().map(|&(d, i)| alpha[d][i]).collect())
        .collect()
}

/// The family `(P(g)x)_g` of a section `x ∈ P(base)`.
pub fn family_of(site: &FiniteCategory, sieve: &Sieve, p: &Presheaf, x: usize) -> Vec<usize> {
    debug_assert!(x < p.size(sieve.base));
    sieve
        .members
        .iter()
        .map(|&g| {
            debug_assert_eq!(site.target(g), sieve.base);
            p.restrict(g, x)
        })
        .collect()
}
