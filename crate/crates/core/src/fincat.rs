//! Finite categories and the finite structures that present them: monoids,
//! posets and finite (Alexandrov) spaces.
//!
//! Objects and morphisms are addressed by dense indices ([`ObjId`],
//! [`MorId`]); names are kept for reporting and parsing. Composition is
//! written `compose(g, f) = g∘f` and is defined exactly when
//! `target(f) == source(g)`.
//!
//! A finite poset `P` stands for the finite space whose specialization order
//! is `P` (opens are the up-sets). Its site is the poset of minimal open
//! neighbourhoods `U_x = ↑x` ordered by inclusion, so the site of `P` is the
//! opposite order. Presheaves on that site are sheaves on the space.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ObjId = usize;
pub type MorId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Morphism {
    pub name: String,
    pub source: ObjId,
    pub target: ObjId,
}

/// A validated finite category with a total composition table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteCategory {
    objects: Vec<String>,
    morphisms: Vec<Morphism>,
    identities: Vec<MorId>,
    compose: Vec<Option<MorId>>,
    hom: Vec<Vec<Vec<MorId>>>,
    into: Vec<Vec<MorId>>,
    out: Vec<Vec<MorId>>,
    is_identity: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CategoryError {
    #[error("duplicate object `{0}`")]
    DuplicateObject(String),
    #[error("duplicate morphism `{0}`")]
    DuplicateMorphism(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("object `{0}` has no identity")]
    MissingIdentity(String),
    #[error("object `{0}` has more than one identity")]
    DuplicateIdentity(String),
    #[error("identity `{morphism}` of `{object}` is not an endomorphism of `{object}`")]
    IdentityNotEndomorphism { object: String, morphism: String },
    #[error("`{outer}` ∘ `{inner}` is listed but the pair is not composable")]
    NotComposable { outer: String, inner: String },
    #[error("`{outer}` ∘ `{inner}` = `{result}` has the wrong source or target")]
    WrongCompositeType {
        outer: String,
        inner: String,
        result: String,
    },
    #[error("`{outer}` ∘ `{inner}` is given twice (`{first}` and `{second}`)")]
    ConflictingComposite {
        outer: String,
        inner: String,
        first: String,
        second: String,
    },
    #[error("composite `{outer}` ∘ `{inner}` is missing")]
    MissingComposite { outer: String, inner: String },
    #[error("identity `{identity}` is not neutral for `{morphism}`")]
    NotNeutral { identity: String, morphism: String },
    #[error("composition is not associative on ({h}, {g}, {f}): {h}∘({g}∘{f}) = {left} but ({h}∘{g})∘{f} = {right}")]
    NonAssociative {
        h: String,
        g: String,
        f: String,
        left: String,
        right: String,
    },
}

/// Unvalidated description of a category, as read from a document.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawCategory {
    pub objects: Vec<String>,
    pub morphisms: Vec<RawMorphism>,
    pub identities: Vec<RawIdentity>,
    /// Entries `outer ∘ inner = result`. Composites with an identity may be
    /// omitted; they are filled in before validation.
    pub compositions: Vec<RawComposite>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMorphism {
    pub name: String,
    pub source: String,
    pub target: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawIdentity {
    pub object: String,
    pub morphism: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawComposite {
    pub outer: String,
    pub inner: String,
    pub result: String,
}

/// Validate a raw category description.
pub fn validate_category(raw: &RawCategory) -> Result<FiniteCategory, CategoryError> {
    let mut obj_index = HashMap::new();
    for (i, o) in raw.objects.iter().enumerate() {
        if obj_index.insert(o.as_str(), i).is_some() {
            return Err(CategoryError::DuplicateObject(o.clone()));
        }
    }
    let mut mor_index = HashMap::new();
    let mut morphisms = Vec::with_capacity(raw.morphisms.len());
    for (i, m) in raw.morphisms.iter().enumerate() {
        if mor_index.insert(m.name.as_str(), i).is_some() {
            return Err(CategoryError::DuplicateMorphism(m.name.clone()));
        }
        let source = *obj_index
            .get(m.source.as_str())
            .ok_or_else(|| CategoryError::UnknownObject(m.source.clone()))?;
        let target = *obj_index
            .get(m.target.as_str())
            .ok_or_else(|| CategoryError::UnknownObject(m.target.clone()))?;
        morphisms.push(Morphism {
            name: m.name.clone(),
            source,
            target,
        });
    }
    let mut identities: Vec<Option<MorId>> = vec![None; raw.objects.len()];
    for id in &raw.identities {
        let o = *obj_index
            .get(id.object.as_str())
            .ok_or_else(|| CategoryError::UnknownObject(id.object.clone()))?;
        let m = *mor_index
            .get(id.morphism.as_str())
            .ok_or_else(|| CategoryError::UnknownMorphism(id.morphism.clone()))?;
        if identities[o].is_some() {
            return Err(CategoryError::DuplicateIdentity(id.object.clone()));
        }
        identities[o] = Some(m);
    }
    let identities = identities
        .into_iter()
        .enumerate()
        .map(|(o, m)| m.ok_or_else(|| CategoryError::MissingIdentity(raw.objects[o].clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let n = morphisms.len();
    let mut table: Vec<Option<MorId>> = vec![None; n * n];
    let lookup = |name: &str| {
        mor_index
            .get(name)
            .copied()
            .ok_or_else(|| CategoryError::UnknownMorphism(name.to_string()))
    };
    for c in &raw.compositions {
        let (g, f, h) = (lookup(&c.outer)?, lookup(&c.inner)?, lookup(&c.result)?);
        if morphisms[f].target != morphisms[g].source {
            return Err(CategoryError::NotComposable {
                outer: c.outer.clone(),
                inner: c.inner.clone(),
            });
        }
        if let Some(prev) = table[g * n + f] {
            if prev != h {
                return Err(CategoryError::ConflictingComposite {
                    outer: c.outer.clone(),
                    inner: c.inner.clone(),
                    first: morphisms[prev].name.clone(),
                    second: c.result.clone(),
                });
            }
        }
        table[g * n + f] = Some(h);
    }
    // Fill in omitted composites with identities.
    for (o, &id) in identities.iter().enumerate() {
        for m in 0..n {
            if morphisms[m].target == o && table[id * n + m].is_none() {
                table[id * n + m] = Some(m);
            }
            if morphisms[m].source == o && table[m * n + id].is_none() {
                table[m * n + id] = Some(m);
            }
        }
    }
    FiniteCategory::new(raw.objects.clone(), morphisms, identities, |g, f| {
        table[g * n + f]
    })
}

impl FiniteCategory {
    /// Build and validate a category from its parts. `compose(g, f)` is
    /// consulted for every composable pair.
    pub fn new(
        objects: Vec<String>,
        morphisms: Vec<Morphism>,
        identities: Vec<MorId>,
        compose: impl Fn(MorId, MorId) -> Option<MorId>,
    ) -> Result<Self, CategoryError> {
        let no = objects.len();
        let n = morphisms.len();
        {
            let mut seen = HashMap::new();
            for o in &objects {
                if seen.insert(o.as_str(), ()).is_some() {
                    return Err(CategoryError::DuplicateObject(o.clone()));
                }
            }
            let mut seen = HashMap::new();
            for m in &morphisms {
                if seen.insert(m.name.as_str(), ()).is_some() {
                    return Err(CategoryError::DuplicateMorphism(m.name.clone()));
                }
                if m.source >= no || m.target >= no {
                    return Err(CategoryError::UnknownObject(format!(
                        "#{}",
                        m.source.max(m.target)
                    )));
                }
            }
        }
        if identities.len() != no {
            let missing = objects.get(identities.len()).cloned().unwrap_or_default();
            return Err(CategoryError::MissingIdentity(missing));
        }
        let mut is_identity = vec![false; n];
        for (o, &id) in identities.iter().enumerate() {
            if id >= n {
                return Err(CategoryError::MissingIdentity(objects[o].clone()));
            }
            if morphisms[id].source != o || morphisms[id].target != o {
                return Err(CategoryError::IdentityNotEndomorphism {
                    object: objects[o].clone(),
                    morphism: morphisms[id].name.clone(),
                });
            }
            if is_identity[id] {
                return Err(CategoryError::DuplicateIdentity(objects[o].clone()));
            }
            is_identity[id] = true;
        }
        let name = |m: MorId| morphisms[m].name.clone();
        let mut table = vec![None; n * n];
        for g in 0..n {
            for f in 0..n {
                let composable = morphisms[f].target == morphisms[g].source;
                match (composable, compose(g, f)) {
                    (true, None) => {
                        return Err(CategoryError::MissingComposite {
                            outer: name(g),
                            inner: name(f),
                        })
                    }
                    (false, Some(_)) => {
                        return Err(CategoryError::NotComposable {
                            outer: name(g),
                            inner: name(f),
                        })
                    }
                    (true, Some(h)) => {
                        if h >= n
                            || morphisms[h].source != morphisms[f].source
                            || morphisms[h].target != morphisms[g].target
                        {
                            return Err(CategoryError::WrongCompositeType {
                                outer: name(g),
                                inner: name(f),
                                result: if h < n { name(h) } else { format!("#{h}") },
                            });
                        }
                        table[g * n + f] = Some(h);
                    }
                    (false, None) => {}
                }
            }
        }
        for (o, &id) in identities.iter().enumerate() {
            for m in 0..n {
                if morphisms[m].target == o && table[id * n + m] != Some(m) {
                    return Err(CategoryError::NotNeutral {
                        identity: name(id),
                        morphism: name(m),
                    });
                }
                if morphisms[m].source == o && table[m * n + id] != Some(m) {
                    return Err(CategoryError::NotNeutral {
                        identity: name(id),
                        morphism: name(m),
                    });
                }
            }
        }
        let mut hom = vec![vec![Vec::new(); no]; no];
        let mut into = vec![Vec::new(); no];
        let mut out = vec![Vec::new(); no];
        for (i, m) in morphisms.iter().enumerate() {
            hom[m.source][m.target].push(i);
            into[m.target].push(i);
            out[m.source].push(i);
        }
        // Associativity on every composable triple h∘g∘f.
        for f in 0..n {
            for &g in &out[morphisms[f].target] {
                let gf = table[g * n + f].expect("checked composable");
                for &h in &out[morphisms[g].target] {
                    let hg = table[h * n + g].expect("checked composable");
                    let left = table[h * n + gf].expect("checked composable");
                    let right = table[hg * n + f].expect("checked composable");
                    if left != right {
                        return Err(CategoryError::NonAssociative {
                            h: name(h),
                            g: name(g),
                            f: name(f),
                            left: name(left),
                            right: name(right),
                        });
                    }
                }
            }
        }
        Ok(FiniteCategory {
            objects,
            morphisms,
            identities,
            compose: table,
            hom,
            into,
            out,
            is_identity,
        })
    }

    /// The category with no objects.
    pub fn empty() -> Self {
        FiniteCategory::new(Vec::new(), Vec::new(), Vec::new(), |_, _| None)
            .expect("empty category is valid")
    }

    /// One object, one identity morphism.
    pub fn terminal() -> Self {
        FiniteCategory::discrete(&["*"])
    }

    /// Objects with identities only.
    pub fn discrete(names: &[&str]) -> Self {
        let objects: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let morphisms = objects
            .iter()
            .enumerate()
            .map(|(i, o)| Morphism {
                name: format!("1_{o}"),
                source: i,
                target: i,
            })
            .collect();
        let identities = (0..objects.len()).collect();
        FiniteCategory::new(objects, morphisms, identities, |g, f| (g == f).then_some(g))
            .expect("discrete category is valid")
    }

    /// The thin category with a morphism `x -> y` exactly when `rel[x][y]`.
    /// `rel` must be a preorder.
    pub fn thin(names: Vec<String>, rel: &[Vec<bool>]) -> Result<Self, CategoryError> {
        let no = names.len();
        let mut morphisms = Vec::new();
        let mut index = vec![vec![None; no]; no];
        let mut identities = vec![0; no];
        for x in 0..no {
            for y in 0..no {
                if rel[x][y] || x == y {
                    let name = if x == y {
                        identities[x] = morphisms.len();
                        format!("1_{}", names[x])
                    } else {
                        format!("{}->{}", names[x], names[y])
                    };
                    index[x][y] = Some(morphisms.len());
                    morphisms.push(Morphism {
                        name,
                        source: x,
                        target: y,
                    });
                }
            }
        }
        let ends: Vec<(usize, usize)> = morphisms.iter().map(|m| (m.source, m.target)).collect();
        FiniteCategory::new(names, morphisms, identities, |g, f| {
            let (fs, ft) = ends[f];
            let (gs, gt) = ends[g];
            if ft != gs {
                return None;
            }
            // A missing composite here means the relation is not transitive.
            index[fs][gt]
        })
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn object_name(&self, o: ObjId) -> &str {
        &self.objects[o]
    }

    pub fn morphisms(&self) -> &[Morphism] {
        &self.morphisms
    }

    pub fn morphism(&self, m: MorId) -> &Morphism {
        &self.morphisms[m]
    }

    pub fn morphism_name(&self, m: MorId) -> &str {
        &self.morphisms[m].name
    }

    pub fn source(&self, m: MorId) -> ObjId {
        self.morphisms[m].source
    }

    pub fn target(&self, m: MorId) -> ObjId {
        self.morphisms[m].target
    }

    pub fn identity(&self, o: ObjId) -> MorId {
        self.identities[o]
    }

    pub fn is_identity(&self, m: MorId) -> bool {
        self.is_identity[m]
    }

    /// `g∘f`, or `None` when the pair is not composable.
    pub fn try_compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.compose[g * self.morphisms.len() + f]
    }

    /// `g∘f`. Panics if the pair is not composable.
    pub fn compose(&self, g: MorId, f: MorId) -> MorId {
        self.try_compose(g, f).unwrap_or_else(|| {
            panic!(
                "{} ∘ {} is not composable",
                self.morphisms[g].name, self.morphisms[f].name
            )
        })
    }

    pub fn hom(&self, source: ObjId, target: ObjId) -> &[MorId] {
        &self.hom[source][target]
    }

    /// All morphisms with the given target.
    pub fn maps_into(&self, target: ObjId) -> &[MorId] {
        &self.into[target]
    }

    /// All morphisms with the given source.
    pub fn maps_out(&self, source: ObjId) -> &[MorId] {
        &self.out[source]
    }

    pub fn non_identity_morphisms(&self) -> impl Iterator<Item = MorId> + '_ {
        (0..self.morphisms.len()).filter(|&m| !self.is_identity[m])
    }

    pub fn find_object(&self, name: &str) -> Option<ObjId> {
        self.objects.iter().position(|o| o == name)
    }

    pub fn find_morphism(&self, name: &str) -> Option<MorId> {
        self.morphisms.iter().position(|m| m.name == name)
    }

    /// At most one morphism between any two objects.
    pub fn is_thin(&self) -> bool {
        self.hom.iter().all(|row| row.iter().all(|h| h.len() <= 1))
    }

    /// The two-sided inverse of `f`, if any.
    pub fn inverse(&self, f: MorId) -> Option<MorId> {
        let (s, t) = (self.source(f), self.target(f));
        self.hom(t, s).iter().copied().find(|&g| {
            self.compose(g, f) == self.identity(s) && self.compose(f, g) == self.identity(t)
        })
    }

    /// The endomorphism monoid of an object, elements in morphism order.
    pub fn endomorphism_monoid(&self, o: ObjId) -> FiniteMonoid {
        let ends = self.hom(o, o).to_vec();
        let pos: HashMap<MorId, usize> = ends.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let table = ends
            .iter()
            .map(|&x| ends.iter().map(|&y| pos[&self.compose(x, y)]).collect())
            .collect();
        FiniteMonoid {
            elements: ends.iter().map(|&m| self.morphisms[m].name.clone()).collect(),
            table,
            unit: pos[&self.identity(o)],
        }
    }

    /// The full subcategory on `keep` (in the given order) with its inclusion.
    pub fn full_subcategory(&self, keep: &[ObjId]) -> (FiniteCategory, Functor) {
        let new_obj: HashMap<ObjId, ObjId> = keep.iter().enumerate().map(|(i, &o)| (o, i)).collect();
        let mut morphism_map = Vec::new();
        let mut new_mor = HashMap::new();
        let mut morphisms = Vec::new();
        for (m, data) in self.morphisms.iter().enumerate() {
            if let (Some(&s), Some(&t)) = (new_obj.get(&data.source), new_obj.get(&data.target)) {
                new_mor.insert(m, morphisms.len());
                morphism_map.push(m);
                morphisms.push(Morphism {
                    name: data.name.clone(),
                    source: s,
                    target: t,
                });
            }
        }
        let identities = keep.iter().map(|&o| new_mor[&self.identity(o)]).collect();
        let sub = FiniteCategory::new(
            keep.iter().map(|&o| self.objects[o].clone()).collect(),
            morphisms,
            identities,
            |g, f| {
                self.try_compose(morphism_map[g], morphism_map[f])
                    .map(|h| new_mor[&h])
            },
        )
        .expect("full subcategory of a valid category is valid");
        let functor = Functor {
            object_map: keep.to_vec(),
            morphism_map,
        };
        (sub, functor)
    }

    /// The opposite category; morphism and object indices are preserved.
    pub fn opposite(&self) -> FiniteCategory {
        let morphisms = self
            .morphisms
            .iter()
            .map(|m| Morphism {
                name: m.name.clone(),
                source: m.target,
                target: m.source,
            })
            .collect();
        FiniteCategory::new(
            self.objects.clone(),
            morphisms,
            self.identities.clone(),
            |g, f| self.try_compose(f, g),
        )
        .expect("opposite of a valid category is valid")
    }

    pub fn to_raw(&self) -> RawCategory {
        let mut compositions = Vec::new();
        for g in 0..self.morphisms.len() {
            for f in 0..self.morphisms.len() {
                if self.is_identity[g] || self.is_identity[f] {
                    continue;
                }
                if let Some(h) = self.try_compose(g, f) {
                    compositions.push(RawComposite {
                        outer: self.morphisms[g].name.clone(),
                        inner: self.morphisms[f].name.clone(),
                        result: self.morphisms[h].name.clone(),
                    });
                }
            }
        }
        RawCategory {
            objects: self.objects.clone(),
            morphisms: self
                .morphisms
                .iter()
                .map(|m| RawMorphism {
                    name: m.name.clone(),
                    source: self.objects[m.source].clone(),
                    target: self.objects[m.target].clone(),
                })
                .collect(),
            identities: self
                .identities
                .iter()
                .enumerate()
                .map(|(o, &m)| RawIdentity {
                    object: self.objects[o].clone(),
                    morphism: self.morphisms[m].name.clone(),
                })
                .collect(),
            compositions,
        }
    }
}

/// A functor between finite categories given by its action on indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functor {
    pub object_map: Vec<ObjId>,
    pub morphism_map: Vec<MorId>,
}

impl Functor {
    pub fn is_valid(&self, from: &FiniteCategory, to: &FiniteCategory) -> bool {
        if self.object_map.len() != from.num_objects()
            || self.morphism_map.len() != from.num_morphisms()
        {
            return false;
        }
        let types_ok = (0..from.num_morphisms()).all(|m| {
            let fm = self.morphism_map[m];
            fm < to.num_morphisms()
                && to.source(fm) == self.object_map[from.source(m)]
                && to.target(fm) == self.object_map[from.target(m)]
        });
        types_ok
            && (0..from.num_objects())
                .all(|o| self.morphism_map[from.identity(o)] == to.identity(self.object_map[o]))
            && (0..from.num_morphisms()).all(|g| {
                from.maps_out(from.target(g)).is_empty()
                    || (0..from.num_morphisms()).all(|f| match from.try_compose(g, f) {
                        Some(h) => {
                            to.compose(self.morphism_map[g], self.morphism_map[f])
                                == self.morphism_map[h]
                        }
                        None => true,
                    })
            })
    }
}

// ---------------------------------------------------------------------------
// Monoids

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteMonoid {
    pub elements: Vec<String>,
    /// `table[x][y] = x·y`
    pub table: Vec<Vec<usize>>,
    pub unit: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawMonoid {
    pub elements: Vec<String>,
    pub unit: String,
    pub table: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MonoidError {
    #[error("monoid has no elements")]
    Empty,
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("multiplication table must be {0}×{0}")]
    BadTableShape(usize),
    #[error("`{unit}` is not a two-sided unit for `{element}`")]
    NotUnit { unit: String, element: String },
    #[error("multiplication is not associative on ({x}, {y}, {z})")]
    NonAssociative { x: String, y: String, z: String },
}

impl FiniteMonoid {
    pub fn new(elements: Vec<String>, table: Vec<Vec<usize>>, unit: usize) -> Result<Self, MonoidError> {
        let n = elements.len();
        if n == 0 {
            return Err(MonoidError::Empty);
        }
        let mut seen = HashMap::new();
        for e in &elements {
            if seen.insert(e.as_str(), ()).is_some() {
                return Err(MonoidError::DuplicateElement(e.clone()));
            }
        }
        if table.len() != n || table.iter().any(|r| r.len() != n) || unit >= n {
            return Err(MonoidError::BadTableShape(n));
        }
        if table.iter().flatten().any(|&v| v >= n) {
            return Err(MonoidError::BadTableShape(n));
        }
        for x in 0..n {
            if table[unit][x] != x || table[x][unit] != x {
                return Err(MonoidError::NotUnit {
                    unit: elements[unit].clone(),
                    element: elements[x].clone(),
                });
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if table[table[x][y]][z] != table[x][table[y][z]] {
                        return Err(MonoidError::NonAssociative {
                            x: elements[x].clone(),
                            y: elements[y].clone(),
                            z: elements[z].clone(),
                        });
                    }
                }
            }
        }
        Ok(FiniteMonoid {
            elements,
            table,
            unit,
        })
    }

    pub fn from_raw(raw: &RawMonoid) -> Result<Self, MonoidError> {
        let index: HashMap<&str, usize> = raw
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();
        let get = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| MonoidError::UnknownElement(s.to_string()))
        };
        let unit = get(&raw.unit)?;
        let table = raw
            .table
            .iter()
            .map(|row| row.iter().map(|s| get(s)).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        FiniteMonoid::new(raw.elements.clone(), table, unit)
    }

    pub fn to_raw(&self) -> RawMonoid {
        RawMonoid {
            elements: self.elements.clone(),
            unit: self.elements[self.unit].clone(),
            table: self
                .table
                .iter()
                .map(|r| r.iter().map(|&v| self.elements[v].clone()).collect())
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn mul(&self, x: usize, y: usize) -> usize {
        self.table[x][y]
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    pub fn is_group(&self) -> bool {
        (0..self.len()).all(|x| (0..self.len()).any(|y| self.table[x][y] == self.unit && self.table[y][x] == self.unit))
    }

    pub fn is_commutative(&self) -> bool {
        (0..self.len()).all(|x| (0..self.len()).all(|y| self.table[x][y] == self.table[y][x]))
    }

    pub fn trivial() -> Self {
        FiniteMonoid::new(vec!["1".into()], vec![vec![0]], 0).expect("valid")
    }

    /// ℤ/n with elements `0..n`.
    pub fn cyclic_group(n: usize) -> Self {
        let elements = (0..n).map(|i| i.to_string()).collect();
        let table = (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect();
        FiniteMonoid::new(elements, table, 0).expect("valid")
    }

    /// The symmetric group on `k` letters; `σ·τ = σ∘τ` on permutations.
    pub fn symmetric_group(k: usize) -> Self {
        let perms = permutations(k);
        let index: HashMap<Vec<usize>, usize> =
            perms.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| index[&t.iter().map(|&i| s[i]).collect::<Vec<_>>()])
                    .collect()
            })
            .collect();
        let elements = perms
            .iter()
            .map(|p| p.iter().map(|i| i.to_string()).collect::<String>())
            .collect();
        FiniteMonoid::new(elements, table, 0).expect("valid")
    }

    /// `{1, e}` with `e·e = e`.
    pub fn idempotent() -> Self {
        FiniteMonoid::new(
            vec!["1".into(), "e".into()],
            vec![vec![0, 1], vec![1, 1]],
            0,
        )
        .expect("valid")
    }

    /// A `k`-element left-zero semigroup (`x·y = x`) with a unit adjoined.
    pub fn left_zero_with_unit(k: usize) -> Self {
        let mut elements = vec!["1".to_string()];
        elements.extend((0..k).map(|i| format!("z{i}")));
        let table = (0..=k)
            .map(|x| (0..=k).map(|y| if x == 0 { y } else { x }).collect())
            .collect();
        FiniteMonoid::new(elements, table, 0).expect("valid")
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &out {
            for v in 0..k {
                if !p.contains(&v) {
                    let mut q = p.clone();
                    q.push(v);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// The one-object category whose morphisms are the elements of `m`.
/// Presheaves on it are right `m`-sets.
pub fn monoid_as_category(m: &FiniteMonoid) -> FiniteCategory {
    let morphisms = m
        .elements
        .iter()
        .map(|e| Morphism {
            name: e.clone(),
            source: 0,
            target: 0,
        })
        .collect();
    FiniteCategory::new(vec!["*".into()], morphisms, vec![m.unit], |g, f| {
        Some(m.table[g][f])
    })
    .expect("monoid tables give valid categories")
}

// ---------------------------------------------------------------------------
// Posets and finite spaces

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinitePoset {
    pub elements: Vec<String>,
    /// `leq[x][y]` iff `x ≤ y`.
    pub leq: Vec<Vec<bool>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawPoset {
    pub elements: Vec<String>,
    /// Pairs `(x, y)` meaning `x ≤ y`. Reflexive pairs are implied.
    pub relations: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("relation is not transitive: {a} ≤ {b} and {b} ≤ {c} but not {a} ≤ {c}")]
    NotTransitive { a: String, b: String, c: String },
    #[error("relation is not antisymmetric: {a} ≤ {b} and {b} ≤ {a}")]
    NotAntisymmetric { a: String, b: String },
    #[error("relation is not reflexive at `{0}`")]
    NotReflexive(String),
}

impl FinitePoset {
    pub fn new(elements: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self, PosetError> {
        let n = elements.len();
        let mut seen = HashMap::new();
        for e in &elements {
            if seen.insert(e.as_str(), ()).is_some() {
                return Err(PosetError::DuplicateElement(e.clone()));
            }
        }
        for x in 0..n {
            if !leq[x][x] {
                return Err(PosetError::NotReflexive(elements[x].clone()));
            }
        }
        for a in 0..n {
            for b in 0..n {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(PosetError::NotAntisymmetric {
                        a: elements[a.min(b)].clone(),
                        b: elements[a.max(b)].clone(),
                    });
                }
            }
        }
        for a in 0..n {
            for b in 0..n {
                if !leq[a][b] {
                    continue;
                }
                for c in 0..n {
                    if leq[b][c] && !leq[a][c] {
                        return Err(PosetError::NotTransitive {
                            a: elements[a].clone(),
                            b: elements[b].clone(),
                            c: elements[c].clone(),
                        });
                    }
                }
            }
        }
        Ok(FinitePoset { elements, leq })
    }

    pub fn from_raw(raw: &RawPoset) -> Result<Self, PosetError> {
        let n = raw.elements.len();
        let index: HashMap<&str, usize> = raw
            .elements
            .iter()
            .enumerate()
            .map(|(i, e)| (e.as_str(), i))
            .collect();
        let mut leq = vec![vec![false; n]; n];
        for (x, row) in leq.iter_mut().enumerate() {
            row[x] = true;
        }
        for (a, b) in &raw.relations {
            let i = *index
                .get(a.as_str())
                .ok_or_else(|| PosetError::UnknownElement(a.clone()))?;
            let j = *index
                .get(b.as_str())
                .ok_or_else(|| PosetError::UnknownElement(b.clone()))?;
            leq[i][j] = true;
        }
        FinitePoset::new(raw.elements.clone(), leq)
    }

    pub fn to_raw(&self) -> RawPoset {
        let mut relations = Vec::new();
        for (x, row) in self.leq.iter().enumerate() {
            for (y, &le) in row.iter().enumerate() {
                if le && x != y {
                    relations.push((self.elements[x].clone(), self.elements[y].clone()));
                }
            }
        }
        RawPoset {
            elements: self.elements.clone(),
            relations,
        }
    }

    /// Build from strict relations, taking the reflexive-transitive closure.
    pub fn from_relations(names: &[&str], less: &[(usize, usize)]) -> Result<Self, PosetError> {
        let n = names.len();
        let mut leq = vec![vec![false; n]; n];
        for (x, row) in leq.iter_mut().enumerate() {
            row[x] = true;
        }
        for &(a, b) in less {
            leq[a][b] = true;
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
        FinitePoset::new(names.iter().map(|s| s.to_string()).collect(), leq)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn discrete(n: usize) -> Self {
        let names: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        FinitePoset::from_relations(&refs, &[]).expect("valid")
    }

    /// `x0 < x1 < … < x(n-1)`
    pub fn chain(n: usize) -> Self {
        let names: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let less: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
        FinitePoset::from_relations(&refs, &less).expect("valid")
    }

    /// Specialization order of the four-point circle: closed points `a`, `b`
    /// below open points `c`, `d`.
    pub fn pseudo_circle() -> Self {
        FinitePoset::from_relations(&["a", "b", "c", "d"], &[(0, 2), (0, 3), (1, 2), (1, 3)])
            .expect("valid")
    }

    /// The minimal six-point model of the 2-sphere: two closed points below
    /// two middle points below two open points.
    pub fn pseudo_sphere() -> Self {
        FinitePoset::from_relations(
            &["a1", "a2", "b1", "b2", "c1", "c2"],
            &[
                (0, 2),
                (0, 3),
                (1, 2),
                (1, 3),
                (2, 4),
                (2, 5),
                (3, 4),
                (3, 5),
            ],
        )
        .expect("valid")
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.len()).find(|&t| (0..self.len()).all(|x| self.leq[x][t]))
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&b| (0..self.len()).all(|x| self.leq[b][x]))
    }

    /// The Alexandrov space with this specialization order (opens = up-sets).
    pub fn to_space(&self) -> FiniteSpace {
        let n = self.len();
        let mut opens = BTreeSet::new();
        for mask in 0u64..(1u64 << n) {
            let set: BTreeSet<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let up_closed = set
                .iter()
                .all(|&x| (0..n).all(|y| !self.leq[x][y] || set.contains(&y)));
            if up_closed {
                opens.insert(set);
            }
        }
        FiniteSpace {
            points: self.elements.clone(),
            opens: opens.into_iter().collect(),
        }
    }

    /// The presheaf site: minimal opens `↑x`, with `x -> y` iff `y ≤ x`.
    pub fn site(&self) -> FiniteCategory {
        let n = self.len();
        let rel: Vec<Vec<bool>> = (0..n).map(|x| (0..n).map(|y| self.leq[y][x]).collect()).collect();
        FiniteCategory::thin(self.elements.clone(), &rel).expect("posets give thin categories")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteSpace {
    pub points: Vec<String>,
    pub opens: Vec<BTreeSet<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawSpace {
    pub points: Vec<String>,
    pub opens: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SpaceError {
    #[error("duplicate point `{0}`")]
    DuplicatePoint(String),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("the empty set is not listed as open")]
    MissingEmpty,
    #[error("the whole space is not listed as open")]
    MissingWhole,
    #[error("union of {{{a}}} and {{{b}}} is not open")]
    NotClosedUnderUnion { a: String, b: String },
    #[error("intersection of {{{a}}} and {{{b}}} is not open")]
    NotClosedUnderIntersection { a: String, b: String },
}

impl FiniteSpace {
    pub fn new(points: Vec<String>, opens: Vec<BTreeSet<usize>>) -> Result<Self, SpaceError> {
        let n = points.len();
        let mut seen = HashMap::new();
        for p in &points {
            if seen.insert(p.as_str(), ()).is_some() {
                return Err(SpaceError::DuplicatePoint(p.clone()));
            }
        }
        if let Some(bad) = opens.iter().flatten().find(|&&p| p >= n) {
            return Err(SpaceError::UnknownPoint(format!("#{bad}")));
        }
        let family: BTreeSet<BTreeSet<usize>> = opens.into_iter().collect();
        if !family.contains(&BTreeSet::new()) {
            return Err(SpaceError::MissingEmpty);
        }
        if !family.contains(&(0..n).collect()) {
            return Err(SpaceError::MissingWhole);
        }
        let show = |s: &BTreeSet<usize>| {
            s.iter().map(|&i| points[i].as_str()).collect::<Vec<_>>().join(",")
        };
        for a in &family {
            for b in &family {
                if !family.contains(&a.union(b).copied().collect()) {
                    return Err(SpaceError::NotClosedUnderUnion { a: show(a), b: show(b) });
                }
                if !family.contains(&a.intersection(b).copied().collect()) {
                    return Err(SpaceError::NotClosedUnderIntersection { a: show(a), b: show(b) });
                }
            }
        }
        let mut opens: Vec<BTreeSet<usize>> = family.into_iter().collect();
        opens.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(FiniteSpace { points, opens })
    }

    pub fn from_raw(raw: &RawSpace) -> Result<Self, SpaceError> {
        let index: HashMap<&str, usize> = raw
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        let opens = raw
            .opens
            .iter()
            .map(|o| {
                o.iter()
                    .map(|p| {
                        index
                            .get(p.as_str())
                            .copied()
                            .ok_or_else(|| SpaceError::UnknownPoint(p.clone()))
                    })
                    .collect::<Result<BTreeSet<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        FiniteSpace::new(raw.points.clone(), opens)
    }

    pub fn to_raw(&self) -> RawSpace {
        RawSpace {
            points: self.points.clone(),
            opens: self
                .opens
                .iter()
                .map(|o| o.iter().map(|&p| self.points[p].clone()).collect())
                .collect(),
        }
    }

    pub fn sierpinski() -> Self {
        FiniteSpace::new(
            vec!["0".into(), "1".into()],
            vec![BTreeSet::new(), BTreeSet::from([1]), BTreeSet::from([0, 1])],
        )
        .expect("valid")
    }

    /// Smallest open set containing `x`.
    pub fn minimal_open(&self, x: usize) -> BTreeSet<usize> {
        self.opens
            .iter()
            .filter(|o| o.contains(&x))
            .fold((0..self.points.len()).collect(), |acc: BTreeSet<usize>, o| {
                acc.intersection(o).copied().collect()
            })
    }

    /// Specialization preorder `x ≤ y` iff `x` lies in the closure of `y`.
    pub fn specialization(&self) -> Vec<Vec<bool>> {
        let n = self.points.len();
        (0..n)
            .map(|x| {
                let ux = self.minimal_open(x);
                (0..n).map(|y| ux.contains(&y)).collect()
            })
            .collect()
    }
}

/// The poset of minimal open neighbourhoods ordered by inclusion. Points with
/// the same minimal open are merged into one object named `p=q`.
pub fn space_to_site(space: &FiniteSpace) -> FiniteCategory {
    let mut classes: Vec<(BTreeSet<usize>, Vec<usize>)> = Vec::new();
    for x in 0..space.points.len() {
        let ux = space.minimal_open(x);
        match classes.iter_mut().find(|(u, _)| *u == ux) {
            Some((_, pts)) => pts.push(x),
            None => classes.push((ux, vec![x])),
        }
    }
    let names: Vec<String> = classes
        .iter()
        .map(|(_, pts)| {
            pts.iter()
                .map(|&p| space.points[p].as_str())
                .collect::<Vec<_>>()
                .join("=")
        })
        .collect();
    let rel: Vec<Vec<bool>> = classes
        .iter()
        .map(|(u, _)| classes.iter().map(|(v, _)| u.is_subset(v)).collect())
        .collect();
    FiniteCategory::thin(names, &rel).expect("inclusion is a partial order")
}

// ---------------------------------------------------------------------------
// Components and contractibility

/// Objects partitioned by the equivalence generated by "there is a morphism
/// between them". Classes are sorted by their least object.
pub fn connected_components(d: &FiniteCategory) -> Vec<Vec<ObjId>> {
    let n = d.num_objects();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for m in d.morphisms() {
        let (a, b) = (find(&mut parent, m.source), find(&mut parent, m.target));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut classes: Vec<Vec<ObjId>> = Vec::new();
    let mut root_class = HashMap::new();
    for o in 0..n {
        let r = find(&mut parent, o);
        let idx = *root_class.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[idx].push(o);
    }
    classes
}

/// Sound evidence that the nerve of a category is contractible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContractibilityCertificate {
    InitialObject { object: ObjId },
    TerminalObject { object: ObjId },
    /// A natural transformation from the identity functor to the constant
    /// functor at `apex`; `components[x]: x -> apex`.
    ToConstant { apex: ObjId, components: Vec<MorId> },
    /// A natural transformation from the constant functor at `apex` to the
    /// identity functor; `components[x]: apex -> x`.
    FromConstant { apex: ObjId, components: Vec<MorId> },
    /// A thin category whose skeleton reduces to a point by removing beat
    /// points, listed in removal order.
    Dismantlable { removal_order: Vec<ObjId> },
}

const TRANSFORMATION_SEARCH_BUDGET: usize = 200_000;

/// Search for a contractibility certificate. `None` does not mean the nerve
/// is not contractible.
pub fn contractibility_certificate(d: &FiniteCategory) -> Option<ContractibilityCertificate> {
    let n = d.num_objects();
    if n == 0 {
        return None;
    }
    if let Some(t) = (0..n).find(|&t| (0..n).all(|x| d.hom(x, t).len() == 1)) {
        return Some(ContractibilityCertificate::TerminalObject { object: t });
    }
    if let Some(i) = (0..n).find(|&i| (0..n).all(|x| d.hom(i, x).len() == 1)) {
        return Some(ContractibilityCertificate::InitialObject { object: i });
    }
    if connected_components(d).len() != 1 {
        return None;
    }
    for apex in 0..n {
        if let Some(components) = constant_transformation(d, apex, true) {
            return Some(ContractibilityCertificate::ToConstant { apex, components });
        }
    }
    for apex in 0..n {
        if let Some(components) = constant_transformation(d, apex, false) {
            return Some(ContractibilityCertificate::FromConstant { apex, components });
        }
    }
    if d.is_thin() {
        if let Some(removal_order) = dismantle(d) {
            return Some(ContractibilityCertificate::Dismantlable { removal_order });
        }
    }
    None
}

/// Check a certificate against the category.
pub fn verify_certificate(d: &FiniteCategory, cert: &ContractibilityCertificate) -> bool {
    let n = d.num_objects();
    match cert {
        ContractibilityCertificate::TerminalObject { object } => {
            *object < n && (0..n).all(|x| d.hom(x, *object).len() == 1)
        }
        ContractibilityCertificate::InitialObject { object } => {
            *object < n && (0..n).all(|x| d.hom(*object, x).len() == 1)
        }
        ContractibilityCertificate::ToConstant { apex, components } => {
            components.len() == n
                && (0..n).all(|x| d.source(components[x]) == x && d.target(components[x]) == *apex)
                && d.morphisms().iter().enumerate().all(|(f, m)| {
                    d.compose(components[m.target], f) == components[m.source]
                })
        }
        ContractibilityCertificate::FromConstant { apex, components } => {
            components.len() == n
                && (0..n).all(|x| d.source(components[x]) == *apex && d.target(components[x]) == x)
                && d.morphisms().iter().enumerate().all(|(f, m)| {
                    d.compose(f, components[m.source]) == components[m.target]
                })
        }
        ContractibilityCertificate::Dismantlable { removal_order } => {
            d.is_thin() && dismantle(d).is_some_and(|order| order.len() == removal_order.len())
        }
    }
}

/// Backtracking search for a natural transformation between the identity and
/// the constant functor at `apex`.
fn constant_transformation(d: &FiniteCategory, apex: ObjId, to_constant: bool) -> Option<Vec<MorId>> {
    let n = d.num_objects();
    let candidates: Vec<&[MorId]> = (0..n)
        .map(|x| if to_constant { d.hom(x, apex) } else { d.hom(apex, x) })
        .collect();
    if candidates.iter().any(|c| c.is_empty()) {
        return None;
    }
    // Each object in order: assign a component and check naturality against
    // every morphism between already-assigned objects.
    let mut chosen: Vec<usize> = vec![0; n];
    let mut assigned = 0usize;
    let mut budget = TRANSFORMATION_SEARCH_BUDGET;
    let consistent = |chosen: &[usize], upto: usize| -> bool {
        let x = upto;
        let eta = |o: usize| candidates[o][chosen[o]];
        for y in 0..=x {
            for &f in d.hom(y, x).iter().chain(d.hom(x, y).iter()) {
                let (s, t) = (d.source(f), d.target(f));
                let ok = if to_constant {
                    d.compose(eta(t), f) == eta(s)
                } else {
                    d.compose(f, eta(s)) == eta(t)
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    };
    loop {
        if budget == 0 {
            return None;
        }
        budget -= 1;
        if consistent(&chosen, assigned) {
            if assigned + 1 == n {
                return Some((0..n).map(|o| candidates[o][chosen[o]]).collect());
            }
            assigned += 1;
            chosen[assigned] = 0;
            continue;
        }
        // Advance to the next candidate, backtracking as needed.
        loop {
            chosen[assigned] += 1;
            if chosen[assigned] < candidates[assigned].len() {
                break;
            }
            if assigned == 0 {
                return None;
            }
            chosen[assigned] = 0;
            assigned -= 1;
        }
    }
}

/// Beat-point reduction of a thin category. Returns the removal order when
/// the skeleton collapses to a single point.
fn dismantle(d: &FiniteCategory) -> Option<Vec<ObjId>> {
    let n = d.num_objects();
    let le = |x: usize, y: usize| !d.hom(x, y).is_empty();
    // Skeleton: keep the first object of each isomorphism class.
    let mut alive: Vec<bool> = vec![true; n];
    let mut order = Vec::new();
    for x in 0..n {
        if (0..x).any(|y| alive[y] && le(x, y) && le(y, x)) {
            alive[x] = false;
            order.push(x);
        }
    }
    loop {
        let live: Vec<usize> = (0..n).filter(|&x| alive[x]).collect();
        if live.len() == 1 {
            return Some(order);
        }
        let beat = live.iter().copied().find(|&x| {
            let below: Vec<usize> = live.iter().copied().filter(|&y| y != x && le(y, x)).collect();
            let above: Vec<usize> = live.iter().copied().filter(|&y| y != x && le(x, y)).collect();
            let has_max = below.iter().any(|&m| below.iter().all(|&y| le(y, m)));
            let has_min = above.iter().any(|&m| above.iter().all(|&y| le(m, y)));
            has_max || has_min
        })?;
        alive[beat] = false;
        order.push(beat);
    }
}

/// Breadth-first spanning forest of the underlying graph, as morphism ids.
pub fn spanning_tree(d: &FiniteCategory, root: ObjId) -> Vec<MorId> {
    let mut seen = vec![false; d.num_objects()];
    let mut tree = Vec::new();
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(x) = queue.pop_front() {
        for &f in d.maps_out(x).iter().chain(d.maps_into(x).iter()) {
            if d.is_identity(f) {
                continue;
            }
            let other = if d.source(f) == x { d.target(f) } else { d.source(f) };
            if !seen[other] {
                seen[other] = true;
                tree.push(f);
                queue.push_back(other);
            }
        }
    }
    tree
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(objects: &[&str], morphisms: &[(&str, &str, &str)], ids: &[(&str, &str)], comps: &[(&str, &str, &str)]) -> RawCategory {
        RawCategory {
            objects: objects.iter().map(|s| s.to_string()).collect(),
            morphisms: morphisms
                .iter()
                .map(|(n, s, t)| RawMorphism {
                    name: n.to_string(),
                    source: s.to_string(),
                    target: t.to_string(),
                })
                .collect(),
            identities: ids
                .iter()
                .map(|(o, m)| RawIdentity {
                    object: o.to_string(),
                    morphism: m.to_string(),
                })
                .collect(),
            compositions: comps
                .iter()
                .map(|(g, f, h)| RawComposite {
                    outer: g.to_string(),
                    inner: f.to_string(),
                    result: h.to_string(),
                })
                .collect(),
        }
    }

    #[test]
    fn terminal_and_discrete_validate() {
        let t = validate_category(&raw(&["X"], &[("1", "X", "X")], &[("X", "1")], &[])).unwrap();
        assert_eq!((t.num_objects(), t.num_morphisms()), (1, 1));
        let d = validate_category(&raw(
            &["X", "Y"],
            &[("1X", "X", "X"), ("1Y", "Y", "Y")],
            &[("X", "1X"), ("Y", "1Y")],
            &[],
        ))
        .unwrap();
        assert_eq!(connected_components(&d).len(), 2);
    }

    #[test]
    fn broken_associativity_names_the_triple() {
        // Endomorphisms a, b, c with x∘y = x except a∘b = c:
        // a∘(a∘b) = a∘c = a but (a∘a)∘b = a∘b = c.
        let names = ["a", "b", "c"];
        let mut comps = Vec::new();
        for g in names {
            for f in names {
                let h = if (g, f) == ("a", "b") { "c" } else { g };
                comps.push((g, f, h));
            }
        }
        let r = raw(
            &["X"],
            &[("1", "X", "X"), ("a", "X", "X"), ("b", "X", "X"), ("c", "X", "X")],
            &[("X", "1")],
            &comps,
        );
        match validate_category(&r) {
            Err(CategoryError::NonAssociative { h, g, f, left, right }) => {
                assert_eq!((h.as_str(), g.as_str(), f.as_str()), ("a", "a", "b"));
                assert_eq!((left.as_str(), right.as_str()), ("a", "c"));
            }
            other => panic!("expected associativity failure, got {other:?}"),
        }
    }

    #[test]
    fn missing_composite_and_bad_identity() {
        let r = raw(
            &["X", "Y", "Z"],
            &[("1X", "X", "X"), ("1Y", "Y", "Y"), ("1Z", "Z", "Z"), ("f", "X", "Y"), ("g", "Y", "Z")],
            &[("X", "1X"), ("Y", "1Y"), ("Z", "1Z")],
            &[],
        );
        assert!(matches!(
            validate_category(&r),
            Err(CategoryError::MissingComposite { .. })
        ));
        let r = raw(
            &["X"],
            &[("1", "X", "X"), ("e", "X", "X")],
            &[("X", "1")],
            &[("e", "e", "e"), ("1", "e", "1")],
        );
        assert!(matches!(validate_category(&r), Err(CategoryError::NotNeutral { .. })));
    }

    #[test]
    fn monoid_round_trips_through_its_category() {
        for m in [
            FiniteMonoid::trivial(),
            FiniteMonoid::cyclic_group(2),
            FiniteMonoid::idempotent(),
            FiniteMonoid::symmetric_group(3),
            FiniteMonoid::left_zero_with_unit(3),
        ] {
            let c = monoid_as_category(&m);
            assert_eq!(c.num_objects(), 1);
            assert_eq!(c.num_morphisms(), m.len());
            assert_eq!(c.endomorphism_monoid(0), m);
        }
        let c = monoid_as_category(&FiniteMonoid::idempotent());
        let e = c.find_morphism("e").unwrap();
        assert_eq!(c.compose(e, e), e);
    }

    #[test]
    fn sierpinski_site_is_a_chain() {
        let site = space_to_site(&FiniteSpace::sierpinski());
        assert_eq!(site.num_objects(), 2);
        let (p0, p1) = (site.find_object("0").unwrap(), site.find_object("1").unwrap());
        // U_1 = {1} ⊆ U_0 = {0, 1}
        assert_eq!(site.hom(p1, p0).len(), 1);
        assert!(site.hom(p0, p1).is_empty());
    }

    #[test]
    fn pseudo_circle_site_has_open_points_below() {
        let site = FinitePoset::pseudo_circle().site();
        let o = |n: &str| site.find_object(n).unwrap();
        for low in ["c", "d"] {
            for high in ["a", "b"] {
                assert_eq!(site.hom(o(low), o(high)).len(), 1);
                assert!(site.hom(o(high), o(low)).is_empty());
            }
        }
        assert_eq!(site.non_identity_morphisms().count(), 4);
        assert_eq!(connected_components(&site).len(), 1);
        let via_space = space_to_site(&FinitePoset::pseudo_circle().to_space());
        assert_eq!(via_space.objects(), site.objects());
        for x in 0..4 {
            for y in 0..4 {
                assert_eq!(via_space.hom(x, y).len(), site.hom(x, y).len());
            }
        }
    }

    #[test]
    fn non_transitive_poset_is_rejected() {
        let raw = RawPoset {
            elements: vec!["a".into(), "b".into(), "c".into()],
            relations: vec![("a".into(), "b".into()), ("b".into(), "c".into())],
        };
        assert_eq!(
            FinitePoset::from_raw(&raw),
            Err(PosetError::NotTransitive {
                a: "a".into(),
                b: "b".into(),
                c: "c".into()
            })
        );
    }

    #[test]
    fn space_axioms_are_checked() {
        let pts = vec!["x".to_string(), "y".to_string()];
        let r = FiniteSpace::new(pts.clone(), vec![BTreeSet::new(), BTreeSet::from([0]), BTreeSet::from([1])]);
        assert_eq!(r, Err(SpaceError::MissingWhole));
        let r = FiniteSpace::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![BTreeSet::new(), BTreeSet::from([0]), BTreeSet::from([1]), BTreeSet::from([0, 1, 2])],
        );
        assert!(matches!(r, Err(SpaceError::NotClosedUnderUnion { .. })));
    }

    #[test]
    fn empty_category_has_no_components() {
        assert!(connected_components(&FiniteCategory::empty()).is_empty());
        assert!(contractibility_certificate(&FiniteCategory::empty()).is_none());
    }

    #[test]
    fn certificates() {
        let e_cat = monoid_as_category(&FiniteMonoid::idempotent());
        let cert = contractibility_certificate(&e_cat).expect("left zero gives a certificate");
        assert!(matches!(cert, ContractibilityCertificate::ToConstant { .. }));
        assert!(verify_certificate(&e_cat, &cert));
        assert!(contractibility_certificate(&FiniteCategory::discrete(&["a", "b"])).is_none());
        assert!(contractibility_certificate(&monoid_as_category(&FiniteMonoid::cyclic_group(2))).is_none());
        // Zigzag x0 < x1 > x2 < x3: no cone but dismantlable.
        let zigzag = FinitePoset::from_relations(&["x0", "x1", "x2", "x3"], &[(0, 1), (2, 1), (2, 3)])
            .unwrap()
            .site();
        let cert = contractibility_certificate(&zigzag).unwrap();
        assert!(matches!(cert, ContractibilityCertificate::Dismantlable { .. }));
        assert!(verify_certificate(&zigzag, &cert));
        assert!(contractibility_certificate(&FinitePoset::pseudo_circle().site()).is_none());
    }
}
