//! Purity levels of sieves. A sieve `S ↪ y(c)` is n-pure when, for every
//! `f: d -> c`, the category of elements of `f*S` has the constant-coefficient
//! cohomology of a point in degrees `≤ n`:
//!
//! * degree 0 with set coefficients: exactly one connected component
//!   (the diagonal `A -> A^k` is a bijection for all `A` iff `k = 1`, and
//!   injective iff `k ≥ 1`, which is density);
//! * degree 1 with group coefficients: trivial fundamental group;
//! * degree `m ≥ 2` with abelian coefficients: `H_m = 0` and `H_{m-1}`
//!   torsion-free (universal coefficients).
//!
//! Verdicts that depend on a search budget are reported as intervals.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::fincat::{
    connected_components, contractibility_certificate, ContractibilityCertificate, FiniteCategory, Functor, MorId,
    ObjId,
};
use crate::homology::{nerve_chain_complex_bounded, restriction_cohomology_map, HomologyError, HomologyGroup};
use crate::pi1::{pi1_presentation, triviality_certificate, NontrivialityWitness, TrivialityCertificate};
use crate::presheaf::{
    elements_category, is_topology, pullback_sieve, sieve_presheaf, topology_generated, AxiomViolation,
    ElementsCategory, GrothendieckTopology, Sieve, SieveLattice,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurityConfig {
    /// Highest chain degree built; homology is examined up to one less.
    pub max_degree: usize,
    /// Largest symmetric group probed for fundamental-group quotients.
    pub group_bound: usize,
    /// Primes used by the next-degree cohomology check.
    pub primes: Vec<u64>,
    /// Cap on nerve simplices per category of elements.
    pub simplex_budget: usize,
}

impl Default for PurityConfig {
    fn default() -> Self {
        PurityConfig {
            max_degree: 4,
            group_bound: 5,
            primes: vec![2, 3],
            simplex_budget: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PurityError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("sieve is not a sieve of the site")]
    InvalidSieve,
    #[error("n must be at least -1, got {0}")]
    DegreeTooLow(i32),
    #[error("sieve is not certified {required}-pure (certified lower bound {lower})")]
    Precondition { required: i32, lower: Level },
    #[error("{n}-pure sieves provably fail the topology axioms: {violation:?}")]
    NotATopology { n: i32, violation: AxiomViolation },
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

impl PurityConfig {
    pub fn validate(&self) -> Result<(), PurityError> {
        if self.group_bound < 2 {
            return Err(PurityError::Config("group bound must be at least 2".into()));
        }
        if let Some(p) = self.primes.iter().find(|&&p| !crate::homology::modp::is_prime(p)) {
            return Err(PurityError::Config(format!("{p} is not prime")));
        }
        Ok(())
    }
}

/// A purity level: an integer `≥ -2`, or `∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Finite(i32),
    Infinite,
}

impl Level {
    pub fn at_least(self, n: i32) -> bool {
        self >= Level::Finite(n)
    }

    pub fn finite(self) -> Option<i32> {
        match self {
            Level::Finite(n) => Some(n),
            Level::Infinite => None,
        }
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Level::Finite(a), Level::Finite(b)) => a.cmp(b),
            (Level::Finite(_), Level::Infinite) => Ordering::Less,
            (Level::Infinite, Level::Finite(_)) => Ordering::Greater,
            (Level::Infinite, Level::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Level::Finite(n) => write!(f, "{n}"),
            Level::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Level {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Level::Finite(n) => s.serialize_i32(*n),
            Level::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(i32),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Int(n) => Ok(Level::Finite(n)),
            Repr::Text(t) if t == "inf" => Ok(Level::Infinite),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("bad level `{t}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    Exact,
    UpToBudget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientClass {
    Sets,
    Groups,
    AbelianGroups,
}

/// What was learned about the category of elements of one sieve.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ElementsVerdict {
    Empty,
    Disconnected {
        components: usize,
    },
    Contractible {
        certificate: ContractibilityCertificate,
    },
    FundamentalGroupNontrivial {
        witness: NontrivialityWitness,
    },
    /// `H^degree` fails to vanish for some abelian coefficients.
    CohomologyNonzero {
        degree: usize,
        homology: HomologyGroup,
        previous: HomologyGroup,
        fundamental_group_trivial: bool,
    },
    /// Connected, with vanishing cohomology in degrees `2..=through`.
    Acyclic {
        through: usize,
        fundamental_group_trivial: bool,
        truncated: bool,
    },
}

impl ElementsVerdict {
    /// The interval of levels consistent with the evidence.
    pub fn bounds(&self) -> (Level, Level) {
        use ElementsVerdict::*;
        match self {
            Empty => (Level::Finite(-2), Level::Finite(-2)),
            Disconnected { .. } => (Level::Finite(-1), Level::Finite(-1)),
            Contractible { .. } => (Level::Infinite, Level::Infinite),
            FundamentalGroupNontrivial { .. } => (Level::Finite(0), Level::Finite(0)),
            CohomologyNonzero {
                degree,
                fundamental_group_trivial,
                ..
            } => {
                let top = Level::Finite(*degree as i32 - 1);
                if *fundamental_group_trivial {
                    (top, top)
                } else {
                    (Level::Finite(0), top)
                }
            }
            Acyclic {
                through,
                fundamental_group_trivial,
                ..
            } => {
                if *fundamental_group_trivial {
                    (Level::Finite((*through as i32).max(1)), Level::Infinite)
                } else {
                    (Level::Finite(0), Level::Infinite)
                }
            }
        }
    }

    /// Degree and coefficient class at which a point comparison fails.
    pub fn failure(&self) -> Option<(usize, CoefficientClass)> {
        use ElementsVerdict::*;
        match self {
            Empty | Disconnected { .. } => Some((0, CoefficientClass::Sets)),
            FundamentalGroupNontrivial { .. } => Some((1, CoefficientClass::Groups)),
            CohomologyNonzero { degree, .. } => Some((*degree, CoefficientClass::AbelianGroups)),
            Contractible { .. } | Acyclic { .. } => None,
        }
    }
}

/// Evidence for one distinct pullback `f*S`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullbackEvidence {
    pub morphism: String,
    pub pullback: String,
    pub verdict: ElementsVerdict,
    pub lower: Level,
    pub upper: Level,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurityWitness {
    pub morphism: String,
    pub degree: usize,
    pub coefficients: CoefficientClass,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurityCertificate {
    pub object: String,
    pub sieve: String,
    pub lower: Level,
    pub upper: Level,
    pub certification: Certification,
    /// The pullback realizing the upper bound when it is finite.
    pub witness: Option<PurityWitness>,
    pub evidence: Vec<PullbackEvidence>,
}

impl PurityCertificate {
    pub fn is_exact(&self) -> bool {
        self.certification == Certification::Exact
    }

    /// The level when exact.
    pub fn level(&self) -> Option<Level> {
        self.is_exact().then_some(self.lower)
    }
}

/// `S` is dense iff every pullback of `S` is nonempty.
pub fn is_dense(site: &FiniteCategory, s: &Sieve) -> bool {
    site.maps_into(s.base)
        .iter()
        .all(|&f| !pullback_sieve(site, s, f).is_empty())
}

/// Every pullback of `S` is maximal or equals the pullback of `S` along an
/// isomorphism into its base.
pub fn detect_stability(site: &FiniteCategory, s: &Sieve) -> bool {
    let c = s.base;
    site.maps_into(c).iter().all(|&f| {
        let t = pullback_sieve(site, s, f);
        t.is_maximal(site)
            || site
                .hom(site.source(f), c)
                .iter()
                .any(|&u| site.inverse(u).is_some() && pullback_sieve(site, s, u) == t)
    })
}

/// Per-site cache of verdicts for the category of elements of every sieve.
pub struct PurityAnalysis<'a> {
    site: &'a FiniteCategory,
    lattice: &'a SieveLattice,
    cfg: PurityConfig,
    verdicts: Vec<Vec<OnceLock<ElementsVerdict>>>,
    certificates: Vec<Vec<OnceLock<PurityCertificate>>>,
}

impl<'a> PurityAnalysis<'a> {
    pub fn new(site: &'a FiniteCategory, lattice: &'a SieveLattice, cfg: PurityConfig) -> Result<Self, PurityError> {
        cfg.validate()?;
        fn cells<T>(lattice: &SieveLattice) -> Vec<Vec<OnceLock<T>>> {
            (0..lattice.num_objects())
                .map(|c| (0..lattice.sieves(c).len()).map(|_| OnceLock::new()).collect())
                .collect()
        }
        Ok(PurityAnalysis {
            site,
            lattice,
            verdicts: cells(lattice),
            certificates: cells(lattice),
            cfg,
        })
    }

    pub fn site(&self) -> &FiniteCategory {
        self.site
    }

    pub fn lattice(&self) -> &SieveLattice {
        self.lattice
    }

    pub fn config(&self) -> &PurityConfig {
        &self.cfg
    }

    /// Verdict for the category of elements of sieve `s` on `c`.
    pub fn elements_verdict(&self, c: ObjId, s: usize) -> &ElementsVerdict {
        self.verdicts[c][s].get_or_init(|| {
            let sieve = self.lattice.sieve(c, s);
            let el = elements_category(self.site, &sieve_presheaf(self.site, sieve));
            analyze_elements(&el.category, &self.cfg)
        })
    }

    pub fn certificate(&self, c: ObjId, s: usize) -> &PurityCertificate {
        self.certificates[c][s].get_or_init(|| self.compute_certificate(c, s))
    }

    pub fn certificate_of(&self, sieve: &Sieve) -> Result<&PurityCertificate, PurityError> {
        let s = self.lattice.index_of(sieve).ok_or(PurityError::InvalidSieve)?;
        Ok(self.certificate(sieve.base, s))
    }

    fn compute_certificate(&self, c: ObjId, s: usize) -> PurityCertificate {
        let site = self.site;
        let mut seen = BTreeSet::new();
        let mut evidence = Vec::new();
        let mut lower = Level::Infinite;
        let mut upper = Level::Infinite;
        let mut witness = None;
        for &f in site.maps_into(c) {
            let d = site.source(f);
            let t = self.lattice.pullback(site, s, f);
            if !seen.insert((d, t)) {
                continue;
            }
            let verdict = self.elements_verdict(d, t).clone();
            let (lo, hi) = verdict.bounds();
            lower = lower.min(lo);
            if hi < upper {
                upper = hi;
                witness = verdict.failure().map(|(degree, coefficients)| PurityWitness {
                    morphism: site.morphism_name(f).to_string(),
                    degree,
                    coefficients,
                });
            }
            evidence.push(PullbackEvidence {
                morphism: site.morphism_name(f).to_string(),
                pullback: self.lattice.sieve(d, t).display(site),
                verdict,
                lower: lo,
                upper: hi,
            });
        }
        PurityCertificate {
            object: site.object_name(c).to_string(),
            sieve: self.lattice.sieve(c, s).display(site),
            lower,
            upper,
            certification: if lower == upper {
                Certification::Exact
            } else {
                Certification::UpToBudget
            },
            witness,
            evidence,
        }
    }
}

/// Verdict for a category of elements, from cheapest evidence to dearest.
pub fn analyze_elements(el: &FiniteCategory, cfg: &PurityConfig) -> ElementsVerdict {
    if el.num_objects() == 0 {
        return ElementsVerdict::Empty;
    }
    let components = connected_components(el).len();
    if components > 1 {
        return ElementsVerdict::Disconnected { components };
    }
    if let Some(certificate) = contractibility_certificate(el) {
        return ElementsVerdict::Contractible { certificate };
    }
    let presentation = pi1_presentation(el).expect("connected and nonempty");
    let fundamental_group_trivial = match triviality_certificate(&presentation, cfg.group_bound) {
        TrivialityCertificate::Nontrivial { witness } => {
            return ElementsVerdict::FundamentalGroupNontrivial { witness }
        }
        TrivialityCertificate::CertifiedTrivial => true,
        TrivialityCertificate::Unknown => false,
    };
    let cx = nerve_chain_complex_bounded(el, cfg.max_degree, cfg.simplex_budget);
    let through = cx.max_degree().saturating_sub(1);
    for m in 2..=through {
        if !cx.vanishes_all_coefficients(m).expect("degree in range") {
            return ElementsVerdict::CohomologyNonzero {
                degree: m,
                homology: cx.homology_group(m).expect("degree in range"),
                previous: cx.homology_group(m - 1).expect("degree in range"),
                fundamental_group_trivial,
            };
        }
    }
    ElementsVerdict::Acyclic {
        through,
        fundamental_group_trivial,
        truncated: cx.is_truncated(),
    }
}

pub fn purity_level(
    site: &FiniteCategory,
    sieve: &Sieve,
    cfg: &PurityConfig,
) -> Result<PurityCertificate, PurityError> {
    if !sieve.is_valid(site) {
        return Err(PurityError::InvalidSieve);
    }
    let lattice = SieveLattice::new(site);
    let analysis = PurityAnalysis::new(site, &lattice, cfg.clone())?;
    analysis.certificate_of(sieve).cloned()
}

/// For each distinct pullback `f*S ↪ y(d)`, the restriction
/// `H^{n+1}(El y(d); F_p) -> H^{n+1}(El f*S; F_p)` is injective. Requires
/// `S` to be certified n-pure.
pub fn next_degree_mono_check(analysis: &PurityAnalysis, sieve: &Sieve, n: i32, p: u64) -> Result<bool, PurityError> {
    if n < -1 {
        return Err(PurityError::DegreeTooLow(n));
    }
    let cert = analysis.certificate_of(sieve)?;
    if !cert.lower.at_least(n) {
        return Err(PurityError::Precondition {
            required: n,
            lower: cert.lower,
        });
    }
    let degree = (n + 1) as usize;
    let site = analysis.site();
    let lattice = analysis.lattice();
    let s = lattice.index_of(sieve).ok_or(PurityError::InvalidSieve)?;
    let mut seen = BTreeSet::new();
    for &f in site.maps_into(sieve.base) {
        let d = site.source(f);
        let t = lattice.pullback(site, s, f);
        if !seen.insert((d, t)) {
            continue;
        }
        let small_sieve = lattice.sieve(d, t);
        let big_sieve = Sieve::maximal(site, d);
        let small = elements_category(site, &sieve_presheaf(site, small_sieve));
        let big = elements_category(site, &sieve_presheaf(site, &big_sieve));
        let functor = sieve_inclusion(site, small_sieve, &big_sieve, &small, &big);
        let cx_small = nerve_chain_complex_bounded(&small.category, degree + 1, usize::MAX);
        let cx_big = nerve_chain_complex_bounded(&big.category, degree + 1, usize::MAX);
        let map = restriction_cohomology_map(&cx_big, &cx_small, &functor, degree, p)?;
        if !map.injective {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The functor `El(small) -> El(big)` induced by an inclusion of sieves on
/// the same object.
fn sieve_inclusion(
    site: &FiniteCategory,
    small: &Sieve,
    big: &Sieve,
    el_small: &ElementsCategory,
    el_big: &ElementsCategory,
) -> Functor {
    // Sections of a sieve presheaf at d are its members with source d, in order.
    let member_at = |sieve: &Sieve, d: ObjId, x: usize| -> MorId {
        sieve
            .members
            .iter()
            .copied()
            .filter(|&g| site.source(g) == d)
            .nth(x)
            .expect("section exists")
    };
    let big_object: HashMap<MorId, usize> = el_big
        .elements
        .iter()
        .enumerate()
        .map(|(i, &(d, x))| (member_at(big, d, x), i))
        .collect();
    let object_map: Vec<usize> = el_small
        .elements
        .iter()
        .map(|&(d, x)| big_object[&member_at(small, d, x)])
        .collect();
    let big_morphism: HashMap<(MorId, usize), usize> = (0..el_big.category.num_morphisms())
        .map(|k| ((el_big.projection[k], el_big.category.target(k)), k))
        .collect();
    let morphism_map = (0..el_small.category.num_morphisms())
        .map(|k| big_morphism[&(el_small.projection[k], object_map[el_small.category.target(k)])])
        .collect();
    Functor {
        object_map,
        morphism_map,
    }
}

/// An n-pure topology together with the sieves whose membership the budget
/// could not decide.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NPureTopology {
    pub n: Level,
    pub topology: GrothendieckTopology,
    /// Sieves whose certified interval straddles `n`; members of `topology`
    /// among them are included on the strength of the topology axioms.
    pub undecided: Vec<Sieve>,
    pub certification: Certification,
}

/// Covers are the sieves certified at least `n`-pure. When budgets leave the
/// certified set short of a topology, the generated topology is used if it
/// stays inside the sieves that might be `n`-pure; otherwise the verdicts
/// contradict the topology axioms and that is an error.
pub fn n_pure_topology(analysis: &PurityAnalysis, n: Level) -> Result<NPureTopology, PurityError> {
    if let Level::Finite(k) = n {
        if k < -1 {
            return Err(PurityError::DegreeTooLow(k));
        }
    }
    let site = analysis.site();
    let lattice = analysis.lattice();
    let objects = lattice.num_objects();
    let mut certain = vec![Vec::new(); objects];
    let mut possible = vec![Vec::new(); objects];
    let mut undecided = Vec::new();
    for c in 0..objects {
        for s in 0..lattice.sieves(c).len() {
            let cert = analysis.certificate(c, s);
            let (lo, hi) = (cert.lower >= n, cert.upper >= n);
            certain[c].push(lo);
            possible[c].push(hi);
            if lo != hi {
                undecided.push(lattice.sieve(c, s).clone());
            }
        }
    }
    let candidate = GrothendieckTopology::from_mask(lattice, &certain);
    let verdict = is_topology(site, lattice, &candidate);
    let certification = if undecided.is_empty() {
        Certification::Exact
    } else {
        Certification::UpToBudget
    };
    if verdict.passes() {
        return Ok(NPureTopology {
            n,
            topology: candidate,
            undecided,
            certification,
        });
    }
    let violation = verdict.classical.err().or(verdict.characterization.err()).expect("a failure");
    if undecided.is_empty() {
        return Err(PurityError::NotATopology {
            n: n.finite().unwrap_or(i32::MAX),
            violation,
        });
    }
    let seeds: Vec<Sieve> = candidate.covers.iter().flatten().cloned().collect();
    let generated = topology_generated(site, lattice, &seeds);
    let upper = GrothendieckTopology::from_mask(lattice, &possible);
    if !generated.is_subset_of(&upper) {
        return Err(PurityError::NotATopology {
            n: n.finite().unwrap_or(i32::MAX),
            violation,
        });
    }
    Ok(NPureTopology {
        n,
        topology: generated,
        undecided,
        certification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fincat::{monoid_as_category, FiniteMonoid, FinitePoset};

    fn analysis_levels(site: &FiniteCategory) -> Vec<Vec<(Level, Level)>> {
        let lattice = SieveLattice::new(site);
        let a = PurityAnalysis::new(site, &lattice, PurityConfig::default()).unwrap();
        (0..site.num_objects())
            .map(|c| {
                (0..lattice.sieves(c).len())
                    .map(|s| {
                        let cert = a.certificate(c, s);
                        (cert.lower, cert.upper)
                    })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn idempotent_monoid() {
        let site = monoid_as_category(&FiniteMonoid::idempotent());
        let levels = analysis_levels(&site);
        let inf = (Level::Infinite, Level::Infinite);
        assert_eq!(levels, vec![vec![(Level::Finite(-2), Level::Finite(-2)), inf, inf]]);
        let e = Sieve::new(0, vec![1]);
        assert!(is_dense(&site, &e));
        assert!(detect_stability(&site, &e));
        let cert = purity_level(&site, &e, &PurityConfig::default()).unwrap();
        assert!(cert.is_exact());
        assert_eq!(cert.level(), Some(Level::Infinite));
        let empty = purity_level(&site, &Sieve::empty(0), &PurityConfig::default()).unwrap();
        assert_eq!(empty.witness.as_ref().map(|w| w.degree), Some(0));
    }

    #[test]
    fn pseudo_circle_two_legs() {
        let site = FinitePoset::pseudo_circle().site();
        let lattice = SieveLattice::new(&site);
        let a = PurityAnalysis::new(&site, &lattice, PurityConfig::default()).unwrap();
        let ua = site.find_object("a").unwrap();
        let legs: Vec<MorId> = site
            .maps_into(ua)
            .iter()
            .copied()
            .filter(|&f| !site.is_identity(f))
            .collect();
        assert_eq!(legs.len(), 2);
        let two = Sieve::generated_by(&site, ua, &legs);
        assert!(is_dense(&site, &two));
        assert!(detect_stability(&site, &two));
        let cert = a.certificate_of(&two).unwrap();
        assert_eq!(cert.level(), Some(Level::Finite(-1)));
        let one = Sieve::generated_by(&site, ua, &legs[..1]);
        assert!(!is_dense(&site, &one));
        assert!(next_degree_mono_check(&a, &two, -1, 2).unwrap());
        let minus = n_pure_topology(&a, Level::Finite(-1)).unwrap();
        assert!(minus.topology.contains(&two));
        let zero = n_pure_topology(&a, Level::Finite(0)).unwrap();
        assert!(zero.topology.is_trivial(&site));
    }

    #[test]
    fn cyclic_group_is_boolean() {
        let site = monoid_as_category(&FiniteMonoid::cyclic_group(2));
        let lattice = SieveLattice::new(&site);
        let a = PurityAnalysis::new(&site, &lattice, PurityConfig::default()).unwrap();
        let t = n_pure_topology(&a, Level::Finite(-1)).unwrap();
        assert!(t.topology.is_trivial(&site));
        assert_eq!(t.certification, Certification::Exact);
    }

    #[test]
    fn level_serde() {
        let v = serde_json::to_string(&vec![Level::Finite(-1), Level::Infinite]).unwrap();
        assert_eq!(v, "[-1,\"inf\"]");
        let back: Vec<Level> = serde_json::from_str(&v).unwrap();
        assert_eq!(back, vec![Level::Finite(-1), Level::Infinite]);
    }
}
