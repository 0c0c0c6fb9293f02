//! The chain of smallest n-pure subtoposes, dimension, content and boundary,
//! the local dimension check over slices, and the monoid analyses (right
//! Ore condition, groupification, free monoids).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::fincat::{FiniteCategory, FiniteMonoid};
use crate::pi1::{enumerate_group, FiniteGroup, GroupPresentation, Letter};
use crate::presheaf::{
    elements_category, is_sheaf, representable, sheafify, GrothendieckTopology, Presheaf, SheafMode, Sieve,
    SieveLattice,
};
use crate::purity::{n_pure_topology, Certification, Level, NPureTopology, PurityAnalysis, PurityConfig, PurityError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DimensionValue {
    Exact { value: i32 },
    /// `upper: None` means no upper bound was certified.
    Bounded { lower: i32, upper: Option<i32> },
}

impl DimensionValue {
    pub fn exact(&self) -> Option<i32> {
        match self {
            DimensionValue::Exact { value } => Some(*value),
            DimensionValue::Bounded { .. } => None,
        }
    }

    pub fn lower(&self) -> i32 {
        match self {
            DimensionValue::Exact { value } => *value,
            DimensionValue::Bounded { lower, .. } => *lower,
        }
    }

    pub fn upper(&self) -> Option<i32> {
        match self {
            DimensionValue::Exact { value } => Some(*value),
            DimensionValue::Bounded { upper, .. } => *upper,
        }
    }

    fn from_bounds(lower: i32, upper: Option<i32>) -> Self {
        if upper == Some(lower) {
            DimensionValue::Exact { value: lower }
        } else {
            DimensionValue::Bounded { lower, upper }
        }
    }
}

impl fmt::Display for DimensionValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimensionValue::Exact { value } => write!(f, "{value}"),
            DimensionValue::Bounded { lower, upper: Some(u) } => write!(f, "[{lower}, {u}]"),
            DimensionValue::Bounded { lower, upper: None } => write!(f, "[{lower}, inf)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Present,
    Absent,
    Unknown,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Present => "present",
            Boundary::Absent => "absent",
            Boundary::Unknown => "unknown",
        })
    }
}

/// Sieves in step `n` that are missing from step `n + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrictInclusion {
    pub n: i32,
    pub witnesses: Vec<Sieve>,
}

/// Step `k` is the n-pure topology for `n = k - 1`, describing the
/// subtopos `E_{≤n+1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubtoposChain {
    pub steps: Vec<NPureTopology>,
    /// First `n` from which all later steps coincide.
    pub stabilization: i32,
    pub strict_inclusions: Vec<StrictInclusion>,
    pub certification: Certification,
}

pub fn subtopos_chain(analysis: &PurityAnalysis) -> Result<SubtoposChain, PurityError> {
    let top = analysis.config().max_degree as i32 - 1;
    let steps: Vec<NPureTopology> = (-1..=top.max(-1))
        .map(|n| n_pure_topology(analysis, Level::Finite(n)))
        .collect::<Result<_, _>>()?;
    let mut stabilization = steps.last().map_or(-1, |s| s.n.finite().expect("finite"));
    for k in (0..steps.len().saturating_sub(1)).rev() {
        if steps[k].topology != steps[k + 1].topology {
            break;
        }
        stabilization = steps[k].n.finite().expect("finite");
    }
    let strict_inclusions = steps
        .windows(2)
        .filter_map(|w| {
            let witnesses: Vec<Sieve> = w[0]
                .topology
                .covers
                .iter()
                .flatten()
                .filter(|s| !w[1].topology.contains(s))
                .cloned()
                .collect();
            (!witnesses.is_empty()).then(|| StrictInclusion {
                n: w[0].n.finite().expect("finite"),
                witnesses,
            })
        })
        .collect();
    let certification = if steps.iter().all(|s| s.certification == Certification::Exact) {
        Certification::Exact
    } else {
        Certification::UpToBudget
    };
    Ok(SubtoposChain {
        steps,
        stabilization,
        strict_inclusions,
        certification,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SieveLevel {
    pub object: String,
    pub sieve: String,
    pub lower: Level,
    pub upper: Level,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub dimension: DimensionValue,
    pub boundary: Boundary,
    /// The ∞-pure topology.
    pub content: NPureTopology,
    /// Non-maximal sieves with their certified level intervals.
    pub levels: Vec<SieveLevel>,
    /// Sieves whose finite level realizes the dimension.
    pub witnesses: Vec<SieveLevel>,
    pub chain: SubtoposChain,
    pub certification: Certification,
}

/// Dimension is the least `n ≥ -1` with `E_{≤n} = E_{<∞}`. A sieve of exact
/// finite level `L` separates the (L)- and (L+1)-pure topologies, hence
/// `E_{≤L+1}` from `E_{≤L+2}`, so the dimension is `max(-1, L + 2)` over such
/// sieves. The empty sieve has level -2 on every nonempty site.
pub fn dimension_report(site: &FiniteCategory, cfg: &PurityConfig) -> Result<DimensionReport, PurityError> {
    let lattice = SieveLattice::new(site);
    let analysis = PurityAnalysis::new(site, &lattice, cfg.clone())?;
    report_from_analysis(&analysis)
}

pub fn report_from_analysis(analysis: &PurityAnalysis) -> Result<DimensionReport, PurityError> {
    let site = analysis.site();
    let lattice = analysis.lattice();
    let mut levels = Vec::new();
    let mut lower = -1;
    let mut upper: Option<i32> = Some(-1);
    let mut any_infinite = false;
    let mut all_finite = true;
    for c in 0..site.num_objects() {
        let max = lattice.maximal(c);
        for s in 0..lattice.sieves(c).len() {
            if s == max {
                continue;
            }
            let cert = analysis.certificate(c, s);
            match (cert.lower, cert.upper) {
                (lo, Level::Finite(hi)) => {
                    lower = lower.max(lo.finite().expect("lower ≤ upper") + 2);
                    upper = upper.map(|u| u.max(hi + 2));
                }
                (Level::Finite(_), Level::Infinite) => {
                    upper = None;
                    all_finite = false;
                }
                (Level::Infinite, Level::Infinite) => {
                    any_infinite = true;
                    all_finite = false;
                }
            }
            levels.push(SieveLevel {
                object: cert.object.clone(),
                sieve: cert.sieve.clone(),
                lower: cert.lower,
                upper: cert.upper,
            });
        }
    }
    let dimension = DimensionValue::from_bounds(lower, upper);
    let witnesses = levels
        .iter()
        .filter(|l| l.lower == l.upper && l.upper.finite().map(|u| u + 2) == dimension.exact())
        .cloned()
        .collect();
    let boundary = if any_infinite {
        Boundary::Present
    } else if all_finite {
        Boundary::Absent
    } else {
        Boundary::Unknown
    };
    let chain = subtopos_chain(analysis)?;
    let content = n_pure_topology(analysis, Level::Infinite)?;
    let certification = if dimension.exact().is_some() && boundary != Boundary::Unknown {
        Certification::Exact
    } else {
        Certification::UpToBudget
    };
    Ok(DimensionReport {
        dimension,
        boundary,
        content,
        levels,
        witnesses,
        chain,
        certification,
    })
}

// ---------------------------------------------------------------------------
// Content

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafifiedRepresentable {
    pub object: String,
    pub sections: Vec<usize>,
    pub terminal: bool,
}

/// Isomorphism classes of sheaves with the given section counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusEntry {
    pub sizes: Vec<usize>,
    pub classes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentDescriptor {
    pub topology: NPureTopology,
    /// The content is the whole topos (only maximal sieves cover).
    pub whole_topos: bool,
    pub sheafified_representables: Vec<SheafifiedRepresentable>,
    /// Sheaves with at most `census_bound` sections per object, by section
    /// counts; `None` when enumeration would exceed its budget.
    pub census: Option<Vec<CensusEntry>>,
    pub census_bound: usize,
    /// Every sheafified representable is terminal and the census has one
    /// class with `k` sections everywhere for each `k`, and nothing else.
    /// `None` when the census was skipped.
    pub equivalent_to_sets: Option<bool>,
    /// For one-object sites: census of right actions of the groupification
    /// with at most `census_bound` elements, and whether it matches.
    pub groupification_census: Option<Vec<CensusEntry>>,
    pub matches_groupification: Option<bool>,
}

const CENSUS_BOUND: usize = 3;
const CENSUS_NODE_BUDGET: usize = 300_000;
/// Sheaf checks plus relabelings tried, across one census.
const CENSUS_WORK_BUDGET: usize = 500_000;

pub fn content_descriptor(site: &FiniteCategory, cfg: &PurityConfig) -> Result<ContentDescriptor, PurityError> {
    let lattice = SieveLattice::new(site);
    let analysis = PurityAnalysis::new(site, &lattice, cfg.clone())?;
    content_from_analysis(&analysis)
}

pub fn content_from_analysis(analysis: &PurityAnalysis) -> Result<ContentDescriptor, PurityError> {
    let site = analysis.site();
    let topology = n_pure_topology(analysis, Level::Infinite)?;
    let j = &topology.topology;
    let sheafified_representables: Vec<SheafifiedRepresentable> = (0..site.num_objects())
        .map(|c| {
            let a = sheafify(site, &representable(site, c).expect("object"), j);
            SheafifiedRepresentable {
                object: site.object_name(c).to_string(),
                sections: a.sheaf.sizes(),
                terminal: a.sheaf.is_terminal(),
            }
        })
        .collect();
    let census = sheaf_census(site, Some(j), CENSUS_BOUND);
    let equivalent_to_sets = if site.num_objects() == 0 {
        Some(false)
    } else {
        census.as_ref().map(|entries| {
            let n = site.num_objects();
            sheafified_representables.iter().all(|r| r.terminal)
                && entries.len() == CENSUS_BOUND + 1
                && entries
                    .iter()
                    .enumerate()
                    .all(|(k, e)| e.classes == 1 && e.sizes == vec![k; n])
        })
    };
    let (groupification_census, matches_groupification) = if site.num_objects() == 1 {
        let monoid = site.endomorphism_monoid(0);
        match ore_and_groupification(&monoid, GROUPIFICATION_BUDGET).groupification {
            Ok(g) => {
                let gsite = crate::fincat::monoid_as_category(&g.group.as_monoid());
                let gc = sheaf_census(&gsite, None, CENSUS_BOUND);
                let matches = match (&census, &gc) {
                    (Some(a), Some(b)) => Some(a == b),
                    _ => None,
                };
                (gc, matches)
            }
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    Ok(ContentDescriptor {
        whole_topos: j.is_trivial(site),
        topology,
        sheafified_representables,
        census,
        census_bound: CENSUS_BOUND,
        equivalent_to_sets,
        groupification_census,
        matches_groupification,
    })
}

/// Isomorphism classes of presheaves (sheaves for `j` when given) with at
/// most `bound` sections per object, grouped by section counts.
pub fn sheaf_census(site: &FiniteCategory, j: Option<&GrothendieckTopology>, bound: usize) -> Option<Vec<CensusEntry>> {
    let n = site.num_objects();
    let relabelings = (1..=bound).product::<usize>().checked_pow(n as u32)?;
    if relabelings > 10_000 {
        return None;
    }
    let mut budget = CENSUS_NODE_BUDGET;
    let mut work = CENSUS_WORK_BUDGET;
    let mut out = Vec::new();
    let mut sizes = vec![0usize; n];
    loop {
        let mut classes: BTreeSet<Vec<Vec<usize>>> = BTreeSet::new();
        let complete = for_each_presheaf(site, &sizes, &mut budget, &mut |restriction| {
            if work == 0 {
                return false;
            }
            work -= 1;
            let p = Presheaf::from_sizes(site, &sizes, restriction.to_vec()).expect("functorial by construction");
            if j.is_none_or(|j| is_sheaf(site, &p, j, SheafMode::Sheaf)) {
                let cost = sizes.iter().map(|&k| (1..=k).product::<usize>()).product::<usize>();
                if work < cost {
                    return false;
                }
                work -= cost;
                classes.insert(canonical_form(site, &sizes, restriction));
            }
            true
        });
        if !complete {
            return None;
        }
        if !classes.is_empty() {
            out.push(CensusEntry {
                sizes: sizes.clone(),
                classes: classes.len(),
            });
        }
        // Next size vector in lexicographic order.
        let mut k = n;
        loop {
            if k == 0 {
                return Some(out);
            }
            k -= 1;
            if sizes[k] < bound {
                sizes[k] += 1;
                for s in sizes.iter_mut().skip(k + 1) {
                    *s = 0;
                }
                break;
            }
        }
    }
}

/// Enumerate functorial restriction tables with the given section counts.
/// Returns false if the node budget ran out or `visit` asked to stop.
fn for_each_presheaf(
    site: &FiniteCategory,
    sizes: &[usize],
    budget: &mut usize,
    visit: &mut dyn FnMut(&[Vec<usize>]) -> bool,
) -> bool {
    let m = site.num_morphisms();
    let vars: Vec<usize> = site.non_identity_morphisms().collect();
    let mut order = vec![usize::MAX; m];
    for (i, &f) in vars.iter().enumerate() {
        order[f] = i;
    }
    // (g, f, h = g∘f) checked once the last of them is assigned.
    let mut due: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); vars.len() + 1];
    for &f in &vars {
        for &g in site.maps_out(site.target(f)) {
            if site.is_identity(g) {
                continue;
            }
            let h = site.compose(g, f);
            let last = [f, g, h]
                .iter()
                .map(|&x| if order[x] == usize::MAX { 0 } else { order[x] + 1 })
                .max()
                .expect("three");
            due[last].push((g, f, h));
        }
    }
    let mut table: Vec<Vec<usize>> = (0..m)
        .map(|f| {
            if site.is_identity(f) {
                (0..sizes[site.target(f)]).collect()
            } else {
                vec![0; sizes[site.target(f)]]
            }
        })
        .collect();
    fn holds(table: &[Vec<usize>], checks: &[(usize, usize, usize)]) -> bool {
        checks
            .iter()
            .all(|&(g, f, h)| (0..table[h].len()).all(|x| table[h][x] == table[f][table[g][x]]))
    }
    fn go(
        k: usize,
        vars: &[usize],
        site: &FiniteCategory,
        sizes: &[usize],
        table: &mut Vec<Vec<usize>>,
        due: &[Vec<(usize, usize, usize)>],
        budget: &mut usize,
        visit: &mut dyn FnMut(&[Vec<usize>]) -> bool,
    ) -> bool {
        if k == vars.len() {
            return visit(table);
        }
        let f = vars[k];
        let (src, tgt) = (sizes[site.source(f)], sizes[site.target(f)]);
        if tgt > 0 && src == 0 {
            return true;
        }
        let total = src.pow(tgt as u32);
        for code in 0..total {
            if *budget == 0 {
                return false;
            }
            *budget -= 1;
            let mut c = code;
            for x in 0..tgt {
                table[f][x] = c % src;
                c /= src;
            }
            if holds(table, &due[k + 1]) && !go(k + 1, vars, site, sizes, table, due, budget, visit) {
                return false;
            }
        }
        true
    }
    if !holds(&table, &due[0]) {
        return true;
    }
    go(0, &vars, site, sizes, &mut table, &due, budget, visit)
}

fn canonical_form(site: &FiniteCategory, sizes: &[usize], table: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let perms: Vec<Vec<Vec<usize>>> = sizes.iter().map(|&k| all_permutations(k)).collect();
    let mut best: Option<Vec<Vec<usize>>> = None;
    let mut choice = vec![0usize; sizes.len()];
    loop {
        let relabeled: Vec<Vec<usize>> = (0..site.num_morphisms())
            .map(|f| {
                let (d, c) = (site.source(f), site.target(f));
                let (pd, pc) = (&perms[d][choice[d]], &perms[c][choice[c]]);
                let mut row = vec![0; sizes[c]];
                for x in 0..sizes[c] {
                    row[pc[x]] = pd[table[f][x]];
                }
                row
            })
            .collect();
        if best.as_ref().is_none_or(|b| relabeled < *b) {
            best = Some(relabeled);
        }
        let mut k = 0;
        loop {
            if k == choice.len() {
                return best.expect("at least one relabeling");
            }
            choice[k] += 1;
            if choice[k] < perms[k].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for p in &out {
            for v in (0..k).filter(|v| !p.contains(v)) {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Local check

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceDimension {
    pub object: String,
    pub dimension: DimensionValue,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalCheck {
    pub global: DimensionValue,
    pub slices: Vec<SliceDimension>,
    pub holds: bool,
}

/// Compare the dimension with the supremum of the dimensions of the slices
/// over representables, which are presheaf toposes on the categories of
/// elements of the representables. With inexact values the check holds
/// when the intervals are consistent.
pub fn local_dimension_check(site: &FiniteCategory, cfg: &PurityConfig) -> Result<LocalCheck, PurityError> {
    let global = dimension_report(site, cfg)?.dimension;
    let slices: Vec<SliceDimension> = (0..site.num_objects())
        .map(|c| {
            let el = elements_category(site, &representable(site, c).expect("object"));
            Ok(SliceDimension {
                object: site.object_name(c).to_string(),
                dimension: dimension_report(&el.category, cfg)?.dimension,
            })
        })
        .collect::<Result<_, PurityError>>()?;
    let sup_lower = slices.iter().map(|s| s.dimension.lower()).max().unwrap_or(-1);
    let sup_upper = slices
        .iter()
        .map(|s| s.dimension.upper())
        .try_fold(-1, |acc, u| u.map(|u| acc.max(u)));
    let holds = match (global.exact(), sup_upper) {
        (Some(g), Some(u)) if u == sup_lower => g == u,
        _ => global.lower() <= sup_upper.unwrap_or(i32::MAX) && sup_lower <= global.upper().unwrap_or(i32::MAX),
    };
    Ok(LocalCheck { global, slices, holds })
}

// ---------------------------------------------------------------------------
// Monoids

pub const GROUPIFICATION_BUDGET: usize = 20_000;

#[derive(Clone, Debug)]
pub struct Groupification {
    pub group: FiniteGroup,
    /// Image of each monoid element.
    pub image: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct OreReport {
    pub right_ore: bool,
    /// A pair with no common right multiple.
    pub witness: Option<(usize, usize)>,
    pub groupification: Result<Groupification, crate::pi1::Pi1Error>,
}

/// Right Ore: every `x, y` have `m, n` with `xm = yn`, checked exhaustively.
pub fn is_right_ore(m: &FiniteMonoid) -> Option<(usize, usize)> {
    let n = m.len();
    let right_ideal = |x: usize| -> BTreeSet<usize> { (0..n).map(|k| m.mul(x, k)).collect() };
    let ideals: Vec<BTreeSet<usize>> = (0..n).map(right_ideal).collect();
    for x in 0..n {
        for y in x + 1..n {
            if ideals[x].is_disjoint(&ideals[y]) {
                return Some((x, y));
            }
        }
    }
    None
}

/// The universal group of `m`, presented by its non-unit elements and
/// multiplication table and enumerated by cosets within `budget`.
pub fn ore_and_groupification(m: &FiniteMonoid, budget: usize) -> OreReport {
    let witness = is_right_ore(m);
    let n = m.len();
    let gen_of: Vec<Option<usize>> = {
        let mut k = 0;
        (0..n)
            .map(|x| {
                (x != m.unit).then(|| {
                    k += 1;
                    k - 1
                })
            })
            .collect()
    };
    let letter = |x: usize| gen_of[x].map(Letter::new);
    let mut relators = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == m.unit || y == m.unit {
                continue;
            }
            let z = m.mul(x, y);
            let mut w: Vec<Letter> = [letter(x), letter(y)].into_iter().flatten().collect();
            if let Some(l) = letter(z) {
                w.push(l.inv());
            }
            relators.push(w);
        }
    }
    let generators = (0..n).filter(|&x| x != m.unit).map(|x| m.elements[x].clone()).collect();
    let presentation = GroupPresentation::new(generators, relators).expect("letters in range");
    let groupification = enumerate_group(&presentation, budget).map(|e| {
        let image = (0..n)
            .map(|x| gen_of[x].map_or(e.group.unit, |g| e.generator_images[g]))
            .collect();
        Groupification { group: e.group, image }
    });
    OreReport {
        right_ore: witness.is_none(),
        witness,
        groupification,
    }
}

/// Analysis of the free monoid on `generators` letters, verified on all
/// words of length at most `word_budget`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeMonoidReport {
    pub generators: usize,
    pub word_budget: usize,
    pub words_checked: usize,
    pub dimension: DimensionValue,
    pub boundary: Boundary,
    /// Components of the category of elements of the sieve of nonempty words.
    pub puncture_components: usize,
    /// Each component has its one-letter word as terminal object and is
    /// isomorphic, by deleting the first letter, to the category of elements
    /// of the maximal sieve one length shorter.
    pub components_verified: bool,
    /// Every pullback of the puncture sieve is itself or maximal.
    pub stable: bool,
    pub right_ore: bool,
    pub non_ore_witness: Option<(String, String)>,
    pub content: String,
}

fn words(k: usize, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<u8>| {
                (0..k as u8).map(move |a| {
                    let mut v = w.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn word_name(w: &[u8]) -> String {
    if w.is_empty() {
        "1".into()
    } else {
        w.iter().map(|&a| (b'a' + a) as char).collect()
    }
}

/// Truncated category of elements of a sieve of words: objects are the
/// member words of length `≤ max_len`; a morphism `w -> w'` is the `m` with
/// `w'·m = w`, so `w'` is a prefix of `w`. Hom-sets have at most one element,
/// so the category is the prefix order itself.
struct PrefixOrder<'a> {
    words: &'a [Vec<u8>],
}

impl PrefixOrder<'_> {
    /// Is there a morphism `i -> j`?
    fn arrow(&self, i: usize, j: usize) -> bool {
        self.words[i].starts_with(&self.words[j])
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let index: HashMap<&[u8], usize> = self.words.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
        let mut parent: Vec<usize> = (0..self.words.len()).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, w) in self.words.iter().enumerate() {
            for cut in 0..w.len() {
                if let Some(&j) = index.get(&w[..cut]) {
                    let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..self.words.len() {
            groups.entry(root(&mut parent, i)).or_default().push(i);
        }
        groups.into_values().collect()
    }
}

pub fn free_monoid_report(generators: usize, word_budget: usize) -> FreeMonoidReport {
    assert!(generators >= 1 && word_budget >= 1);
    let all = words(generators, word_budget);
    let nonempty: Vec<Vec<u8>> = all.iter().filter(|w| !w.is_empty()).cloned().collect();
    let el = PrefixOrder { words: &nonempty };
    let components = el.components();
    let shorter: Vec<Vec<u8>> = all.iter().filter(|w| w.len() < word_budget).cloned().collect();
    let el_max = PrefixOrder { words: &shorter };
    let shorter_index: HashMap<&[u8], usize> = shorter.iter().enumerate().map(|(i, w)| (w.as_slice(), i)).collect();
    let components_verified = components.len() == generators
        && components.iter().all(|comp| {
            let first = nonempty[comp[0]][0];
            let Some(head) = comp.iter().copied().find(|&o| nonempty[o] == [first]) else {
                return false;
            };
            let terminal = comp.iter().all(|&o| el.arrow(o, head));
            // Delete the first letter.
            let Some(object_map) = comp
                .iter()
                .map(|&o| shorter_index.get(&nonempty[o][1..]).copied())
                .collect::<Option<Vec<usize>>>()
            else {
                return false;
            };
            let distinct: BTreeSet<usize> = object_map.iter().copied().collect();
            // A bijection on objects that preserves and reflects arrows is an
            // isomorphism of thin categories.
            let arrows_match = comp.iter().enumerate().all(|(x, &i)| {
                comp.iter()
                    .enumerate()
                    .all(|(y, &j)| el.arrow(i, j) == el_max.arrow(object_map[x], object_map[y]))
            });
            terminal && distinct.len() == shorter.len() && object_map.len() == shorter.len() && arrows_match
        });
    // Pullback of the nonempty words along m: {x : m·x nonempty}.
    let stable = all.iter().all(|m| {
        let pulled: Vec<bool> = all
            .iter()
            .filter(|x| m.len() + x.len() <= word_budget)
            .map(|x| !(m.is_empty() && x.is_empty()))
            .collect();
        let whole = pulled.iter().all(|&b| b);
        let itself = all
            .iter()
            .filter(|x| m.len() + x.len() <= word_budget)
            .zip(&pulled)
            .all(|(x, &b)| b == !x.is_empty());
        whole || itself
    });
    // Two words have a common right multiple iff one is a prefix of the other.
    let non_ore_witness = all.iter().find_map(|x| {
        all.iter()
            .find(|y| {
                let n = x.len().min(y.len());
                x[..n] != y[..n]
            })
            .map(|y| (word_name(x), word_name(y)))
    });
    let right_ore = non_ore_witness.is_none();
    if generators == 1 {
        // Every nonempty sieve a^n·M has the terminal object a^n in its
        // category of elements, so all of them are ∞-pure.
        let all_contractible = (1..=word_budget).all(|n| {
            let members: Vec<Vec<u8>> = all.iter().filter(|w| w.len() >= n).cloned().collect();
            let el = PrefixOrder { words: &members };
            let head = members.iter().position(|w| w.len() == n).expect("a^n");
            (0..members.len()).all(|o| el.arrow(o, head))
        });
        FreeMonoidReport {
            generators,
            word_budget,
            words_checked: all.len(),
            dimension: if all_contractible && right_ore {
                DimensionValue::Exact { value: 0 }
            } else {
                DimensionValue::Bounded { lower: 0, upper: None }
            },
            boundary: if all_contractible {
                Boundary::Present
            } else {
                Boundary::Unknown
            },
            puncture_components: components.len(),
            components_verified,
            stable,
            right_ore,
            non_ore_witness,
            content: "presheaves on the groupification Z (right Ore)".into(),
        }
    } else {
        let verified = components_verified && stable && !right_ore;
        FreeMonoidReport {
            generators,
            word_budget,
            words_checked: all.len(),
            dimension: if verified {
                DimensionValue::Exact { value: 1 }
            } else {
                DimensionValue::Bounded { lower: 1, upper: None }
            },
            boundary: if verified { Boundary::Absent } else { Boundary::Unknown },
            puncture_components: components.len(),
            components_verified,
            stable,
            right_ore,
            non_ore_witness,
            content: "the whole topos".into(),
        }
    }
}

/// Summary line for each chain step: `n`, number of covers per object.
pub fn chain_cover_counts(chain: &SubtoposChain) -> BTreeMap<i32, Vec<usize>> {
    chain
        .steps
        .iter()
        .map(|s| {
            (
                s.n.finite().expect("finite"),
                s.topology.covers.iter().map(|c| c.len()).collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{monoid_as_category, FinitePoset, FiniteSpace, space_to_site};

    fn report(site: &FiniteCategory) -> DimensionReport {
        dimension_report(site, &PurityConfig::default()).unwrap()
    }

    #[test]
    fn groups_are_boolean() {
        for m in [FiniteMonoid::trivial(), FiniteMonoid::cyclic_group(2), FiniteMonoid::cyclic_group(3), FiniteMonoid::symmetric_group(3)] {
            let r = report(&monoid_as_category(&m));
            assert_eq!(r.dimension, DimensionValue::Exact { value: 0 });
            assert_eq!(r.boundary, Boundary::Absent);
        }
    }

    #[test]
    fn idempotent_monoid() {
        let site = monoid_as_category(&FiniteMonoid::idempotent());
        let r = report(&site);
        assert_eq!(r.dimension, DimensionValue::Exact { value: 0 });
        assert_eq!(r.boundary, Boundary::Present);
        assert_eq!(r.content.topology.num_covers(), 2);
        let c = content_descriptor(&site, &PurityConfig::default()).unwrap();
        assert_eq!(c.equivalent_to_sets, Some(true));
        assert!(c.sheafified_representables[0].terminal);
        assert_eq!(c.matches_groupification, Some(true));
        let ore = ore_and_groupification(&FiniteMonoid::idempotent(), 100);
        assert!(ore.right_ore);
        assert_eq!(ore.groupification.unwrap().group.order(), 1);
    }

    #[test]
    fn pseudo_circle_and_sphere() {
        let r = report(&FinitePoset::pseudo_circle().site());
        assert_eq!(r.dimension, DimensionValue::Exact { value: 1 });
        assert_eq!(r.boundary, Boundary::Absent);
        assert_eq!(r.chain.stabilization, 0);
        let r = report(&FinitePoset::pseudo_sphere().site());
        assert_eq!(r.dimension, DimensionValue::Exact { value: 2 });
        assert_eq!(r.boundary, Boundary::Absent);
    }

    #[test]
    fn sierpinski_and_tops() {
        let site = space_to_site(&FiniteSpace::sierpinski());
        let r = report(&site);
        assert_eq!(r.dimension, DimensionValue::Exact { value: 0 });
        assert_eq!(r.boundary, Boundary::Present);
        assert_eq!(
            content_descriptor(&site, &PurityConfig::default()).unwrap().equivalent_to_sets,
            Some(true)
        );
        for n in 1..5 {
            assert_eq!(report(&FinitePoset::chain(n).site()).dimension.exact(), Some(0));
        }
    }

    #[test]
    fn left_zero_monoid() {
        let m = FiniteMonoid::left_zero_with_unit(3);
        let r = report(&monoid_as_category(&m));
        assert_eq!(r.dimension, DimensionValue::Exact { value: 1 });
        assert_eq!(r.boundary, Boundary::Absent);
        let ore = ore_and_groupification(&m, 100);
        assert!(!ore.right_ore);
        assert_eq!(ore.groupification.unwrap().group.order(), 1);
    }

    #[test]
    fn free_monoids() {
        for k in [2, 3] {
            let r = free_monoid_report(k, 4);
            assert_eq!(r.puncture_components, k);
            assert!(r.components_verified && r.stable && !r.right_ore);
            assert_eq!(r.dimension, DimensionValue::Exact { value: 1 });
            assert_eq!(r.boundary, Boundary::Absent);
        }
        let r = free_monoid_report(1, 6);
        assert!(r.right_ore);
        assert_eq!(r.dimension, DimensionValue::Exact { value: 0 });
        assert_eq!(r.boundary, Boundary::Present);
    }

    #[test]
    fn local_check() {
        for site in [FinitePoset::pseudo_circle().site(), monoid_as_category(&FiniteMonoid::idempotent())] {
            assert!(local_dimension_check(&site, &PurityConfig::default()).unwrap().holds);
        }
    }
}
