//! Site documents, the built-in corpus, command execution and report
//! rendering for the `toposdim` binary.
//!
//! Text documents are line based. `#` starts a comment. Each line is
//! `key: value`; a `table:` line is followed by one row per element.
//!
//! ```text
//! kind: monoid          kind: poset           kind: space
//! name: z2              elements: a b c       points: 0 1
//! elements: 0 1         leq: a c              open:
//! unit: 0               leq: b c              open: 1
//! table:                                      open: 0 1
//! 0 1                   kind: category
//! 1 0                   objects: A B
//!                       identity: A idA
//! kind: builtin         identity: B idB
//! name: pseudo-circle   morphism: f A B
//!                       compose: g f h   (g∘f = h)
//! ```
//!
//! A document starting with `{` is read as JSON.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Read as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dimension::{
    content_from_analysis, free_monoid_report, local_dimension_check, ore_and_groupification, report_from_analysis,
    Boundary, CensusEntry, DimensionValue, FreeMonoidReport, LocalCheck, SheafifiedRepresentable, SieveLevel,
    GROUPIFICATION_BUDGET,
};
use crate::fincat::{
    monoid_as_category, space_to_site, validate_category, FiniteCategory, FiniteMonoid, FinitePoset, FiniteSpace,
    RawCategory, RawComposite, RawIdentity, RawMonoid, RawMorphism, RawPoset, RawSpace,
};
use crate::pi1::{
    abelianization, group_by_name, h1_set, pi1_presentation, small_groups, torsor_classes, FiniteGroup,
};
use crate::presheaf::{is_topology, GrothendieckTopology, Sieve, SieveLattice};
use crate::purity::{
    detect_stability, is_dense, n_pure_topology, Certification, Level, NPureTopology, PurityAnalysis,
    PurityCertificate, PurityConfig, PurityError,
};

// ---------------------------------------------------------------------------
// Documents

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SiteDocument {
    Monoid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        elements: Vec<String>,
        unit: String,
        table: Vec<Vec<String>>,
    },
    Category {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        objects: Vec<String>,
        identities: Vec<RawIdentity>,
        morphisms: Vec<RawMorphism>,
        compositions: Vec<RawComposite>,
    },
    Poset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        elements: Vec<String>,
        /// `(x, y)` means `x ≤ y`.
        relations: Vec<(String, String)>,
    },
    Space {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        points: Vec<String>,
        opens: Vec<Vec<String>>,
    },
    Builtin {
        name: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum InputError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid JSON document: {0}")]
    Json(String),
    #[error("invalid {kind}: {message}")]
    Invalid { kind: &'static str, message: String },
    #[error("unknown builtin `{name}`; available: {available}")]
    UnknownBuiltin { name: String, available: String },
    #[error("{0}")]
    Argument(String),
    #[error("cannot read input: {0}")]
    Io(String),
}

impl SiteDocument {
    pub fn name(&self) -> Option<&str> {
        match self {
            SiteDocument::Monoid { name, .. }
            | SiteDocument::Category { name, .. }
            | SiteDocument::Poset { name, .. }
            | SiteDocument::Space { name, .. } => name.as_deref(),
            SiteDocument::Builtin { name } => Some(name),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SiteDocument::Monoid { .. } => "monoid",
            SiteDocument::Category { .. } => "category",
            SiteDocument::Poset { .. } => "poset",
            SiteDocument::Space { .. } => "space",
            SiteDocument::Builtin { .. } => "builtin",
        }
    }

    pub fn from_monoid(name: &str, m: &FiniteMonoid) -> Self {
        let raw = m.to_raw();
        SiteDocument::Monoid {
            name: Some(name.into()),
            elements: raw.elements,
            unit: raw.unit,
            table: raw.table,
        }
    }

    pub fn from_poset(name: &str, p: &FinitePoset) -> Self {
        let raw = p.to_raw();
        SiteDocument::Poset {
            name: Some(name.into()),
            elements: raw.elements,
            relations: raw.relations,
        }
    }

    pub fn from_space(name: &str, s: &FiniteSpace) -> Self {
        let raw = s.to_raw();
        SiteDocument::Space {
            name: Some(name.into()),
            points: raw.points,
            opens: raw.opens,
        }
    }

    pub fn from_category(name: &str, c: &FiniteCategory) -> Self {
        let raw = c.to_raw();
        let ids: BTreeSet<&str> = raw.identities.iter().map(|i| i.morphism.as_str()).collect();
        SiteDocument::Category {
            name: Some(name.into()),
            objects: raw.objects.clone(),
            identities: raw.identities.clone(),
            morphisms: raw
                .morphisms
                .iter()
                .filter(|m| !ids.contains(m.name.as_str()))
                .cloned()
                .collect(),
            compositions: raw
                .compositions
                .iter()
                .filter(|c| !ids.contains(c.outer.as_str()) && !ids.contains(c.inner.as_str()))
                .cloned()
                .collect(),
        }
    }
}

const KEYS: [&str; 14] = [
    "kind", "name", "elements", "unit", "table", "objects", "identity", "morphism", "compose", "leq", "points",
    "open", "relation", "opens",
];

fn split_key(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(':')?;
    let k = k.trim();
    KEYS.contains(&k).then_some((k, v.trim()))
}

fn words(v: &str) -> Vec<String> {
    v.split_whitespace().map(str::to_string).collect()
}

/// Parse a document in either format without validating its content.
pub fn parse_document(text: &str) -> Result<SiteDocument, InputError> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).map_err(|e| InputError::Json(e.to_string()));
    }
    let mut kind: Option<(usize, String)> = None;
    let mut name = None;
    let mut elements = None;
    let mut unit = None;
    let mut table: Vec<Vec<String>> = Vec::new();
    let mut in_table = false;
    let mut objects = None;
    let mut identities = Vec::new();
    let mut morphisms = Vec::new();
    let mut compositions = Vec::new();
    let mut relations = Vec::new();
    let mut points = None;
    let mut opens = Vec::new();
    let syntax = |line: usize, message: String| InputError::Syntax { line, message };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = split_key(line) else {
            if in_table {
                table.push(words(line));
                continue;
            }
            return Err(syntax(line_no, format!("expected `key: value`, found `{line}`")));
        };
        in_table = false;
        let fields = words(value);
        let arity = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(syntax(line_no, format!("`{key}` takes {n} fields, found {}", fields.len())))
            }
        };
        match key {
            "kind" => {
                arity(1)?;
                kind = Some((line_no, fields[0].clone()));
            }
            "name" => name = Some(value.to_string()),
            "elements" => elements = Some(fields),
            "unit" => {
                arity(1)?;
                unit = Some(fields[0].clone());
            }
            "table" => {
                if !value.is_empty() {
                    return Err(syntax(line_no, "table rows go on the following lines".into()));
                }
                in_table = true;
            }
            "objects" => objects = Some(fields),
            "identity" => {
                arity(2)?;
                identities.push(RawIdentity {
                    object: fields[0].clone(),
                    morphism: fields[1].clone(),
                });
            }
            "morphism" => {
                arity(3)?;
                morphisms.push(RawMorphism {
                    name: fields[0].clone(),
                    source: fields[1].clone(),
                    target: fields[2].clone(),
                });
            }
            "compose" => {
                arity(3)?;
                compositions.push(RawComposite {
                    outer: fields[0].clone(),
                    inner: fields[1].clone(),
                    result: fields[2].clone(),
                });
            }
            "leq" | "relation" => {
                arity(2)?;
                relations.push((fields[0].clone(), fields[1].clone()));
            }
            "points" => points = Some(fields),
            "open" => opens.push(fields),
            _ => return Err(syntax(line_no, format!("`{key}` is not used in text documents"))),
        }
    }
    let (kind_line, kind) = kind.ok_or_else(|| syntax(1, "missing `kind:` line".into()))?;
    let missing = |what: &str| syntax(kind_line, format!("{kind} document is missing `{what}:`"));
    Ok(match kind.as_str() {
        "monoid" => SiteDocument::Monoid {
            name,
            elements: elements.ok_or_else(|| missing("elements"))?,
            unit: unit.ok_or_else(|| missing("unit"))?,
            table,
        },
        "category" => SiteDocument::Category {
            name,
            objects: objects.ok_or_else(|| missing("objects"))?,
            identities,
            morphisms,
            compositions,
        },
        "poset" => SiteDocument::Poset {
            name,
            elements: elements.ok_or_else(|| missing("elements"))?,
            relations,
        },
        "space" => SiteDocument::Space {
            name,
            points: points.ok_or_else(|| missing("points"))?,
            opens,
        },
        "builtin" => SiteDocument::Builtin {
            name: name.ok_or_else(|| missing("name"))?,
        },
        other => {
            return Err(syntax(
                kind_line,
                format!("unknown kind `{other}` (expected monoid, category, poset, space or builtin)"),
            ))
        }
    })
}

/// Parse and validate.
pub fn parse_site(text: &str) -> Result<SiteDocument, InputError> {
    let doc = parse_document(text)?;
    resolve(&doc)?;
    Ok(doc)
}

/// Render a document in the text format.
pub fn to_text(doc: &SiteDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "kind: {}", doc.kind());
    if let Some(name) = doc.name() {
        let _ = writeln!(out, "name: {name}");
    }
    match doc {
        SiteDocument::Monoid {
            elements, unit, table, ..
        } => {
            let _ = writeln!(out, "elements: {}", elements.join(" "));
            let _ = writeln!(out, "unit: {unit}");
            let _ = writeln!(out, "table:");
            for row in table {
                let _ = writeln!(out, "{}", row.join(" "));
            }
        }
        SiteDocument::Category {
            objects,
            identities,
            morphisms,
            compositions,
            ..
        } => {
            let _ = writeln!(out, "objects: {}", objects.join(" "));
            for i in identities {
                let _ = writeln!(out, "identity: {} {}", i.object, i.morphism);
            }
            for m in morphisms {
                let _ = writeln!(out, "morphism: {} {} {}", m.name, m.source, m.target);
            }
            for c in compositions {
                let _ = writeln!(out, "compose: {} {} {}", c.outer, c.inner, c.result);
            }
        }
        SiteDocument::Poset {
            elements, relations, ..
        } => {
            let _ = writeln!(out, "elements: {}", elements.join(" "));
            for (x, y) in relations {
                let _ = writeln!(out, "leq: {x} {y}");
            }
        }
        SiteDocument::Space { points, opens, .. } => {
            let _ = writeln!(out, "points: {}", points.join(" "));
            for o in opens {
                let _ = writeln!(out, "open: {}", o.join(" ")).map(|_| ());
            }
            // `open:` with no points is the empty set; trim the trailing blank.
            out = out.replace("open: \n", "open:\n");
        }
        SiteDocument::Builtin { .. } => {}
    }
    out
}

/// A validated site.
#[derive(Clone, Debug)]
pub struct ResolvedSite {
    pub name: String,
    pub kind: &'static str,
    pub category: FiniteCategory,
    pub monoid: Option<FiniteMonoid>,
}

pub fn resolve(doc: &SiteDocument) -> Result<ResolvedSite, InputError> {
    let invalid = |kind: &'static str| move |e: &dyn std::fmt::Display| InputError::Invalid {
        kind,
        message: e.to_string(),
    };
    let name = doc.name().unwrap_or("unnamed").to_string();
    match doc {
        SiteDocument::Monoid {
            elements, unit, table, ..
        } => {
            let raw = RawMonoid {
                elements: elements.clone(),
                unit: unit.clone(),
                table: table.clone(),
            };
            let m = FiniteMonoid::from_raw(&raw).map_err(|e| invalid("monoid")(&e))?;
            Ok(ResolvedSite {
                name,
                kind: "monoid",
                category: monoid_as_category(&m),
                monoid: Some(m),
            })
        }
        SiteDocument::Category {
            objects,
            identities,
            morphisms,
            compositions,
            ..
        } => {
            let mut all = morphisms.clone();
            for i in identities {
                all.push(RawMorphism {
                    name: i.morphism.clone(),
                    source: i.object.clone(),
                    target: i.object.clone(),
                });
            }
            let raw = RawCategory {
                objects: objects.clone(),
                morphisms: all,
                identities: identities.clone(),
                compositions: compositions.clone(),
            };
            let category = validate_category(&raw).map_err(|e| invalid("category")(&e))?;
            Ok(ResolvedSite {
                name,
                kind: "category",
                category,
                monoid: None,
            })
        }
        SiteDocument::Poset {
            elements, relations, ..
        } => {
            let raw = RawPoset {
                elements: elements.clone(),
                relations: relations.clone(),
            };
            let p = FinitePoset::from_raw(&raw).map_err(|e| invalid("poset")(&e))?;
            Ok(ResolvedSite {
                name,
                kind: "poset",
                category: p.site(),
                monoid: None,
            })
        }
        SiteDocument::Space { points, opens, .. } => {
            let raw = RawSpace {
                points: points.clone(),
                opens: opens.clone(),
            };
            let s = FiniteSpace::from_raw(&raw).map_err(|e| invalid("space")(&e))?;
            Ok(ResolvedSite {
                name,
                kind: "space",
                category: space_to_site(&s),
                monoid: None,
            })
        }
        SiteDocument::Builtin { name } => resolve(&builtin_document(name)?),
    }
}

// ---------------------------------------------------------------------------
// Built-in corpus

pub const BUILTINS: [&str; 20] = [
    "trivial-monoid",
    "z2",
    "z3",
    "s3",
    "idempotent-monoid",
    "z2-idempotent",
    "left-zero-monoid",
    "bicyclic-truncation",
    "discrete-1",
    "discrete-2",
    "discrete-3",
    "sierpinski",
    "pseudo-circle",
    "pseudo-2-sphere",
    "chain-2",
    "chain-3",
    "chain-4",
    "peak",
    "parallel-pair",
    "span",
];

fn product_monoid(a: &FiniteMonoid, b: &FiniteMonoid) -> FiniteMonoid {
    let m = b.len();
    let name = |x: usize| match (x / m == a.unit, x % m == b.unit) {
        (true, true) => "1".to_string(),
        (true, false) => b.elements[x % m].clone(),
        (false, true) => a.elements[x / m].clone(),
        (false, false) => format!("{}{}", a.elements[x / m], b.elements[x % m]),
    };
    let n = a.len() * m;
    let table = (0..n)
        .map(|x| (0..n).map(|y| a.mul(x / m, y / m) * m + b.mul(x % m, y % m)).collect())
        .collect();
    FiniteMonoid::new((0..n).map(name).collect(), table, a.unit * m + b.unit).expect("product of monoids")
}

/// The explicit document behind a builtin name.
pub fn builtin_document(name: &str) -> Result<SiteDocument, InputError> {
    let z2g = || {
        let mut g = FiniteMonoid::cyclic_group(2);
        g.elements = vec!["1".into(), "g".into()];
        g
    };
    Ok(match name {
        "trivial-monoid" => SiteDocument::from_monoid(name, &FiniteMonoid::trivial()),
        "z2" => SiteDocument::from_monoid(name, &FiniteMonoid::cyclic_group(2)),
        "z3" => SiteDocument::from_monoid(name, &FiniteMonoid::cyclic_group(3)),
        "s3" => SiteDocument::from_monoid(name, &FiniteMonoid::symmetric_group(3)),
        "idempotent-monoid" => SiteDocument::from_monoid(name, &FiniteMonoid::idempotent()),
        "z2-idempotent" => SiteDocument::from_monoid(name, &product_monoid(&z2g(), &FiniteMonoid::idempotent())),
        "left-zero-monoid" => SiteDocument::from_monoid(name, &FiniteMonoid::left_zero_with_unit(3)),
        // Words of length ≤ 1 in p, q with pq = 1 and longer words sent to 0.
        // The bicyclic monoid is infinite and this table is not associative.
        "bicyclic-truncation" => {
            let t = |row: [&str; 4]| row.iter().map(|s| s.to_string()).collect::<Vec<_>>();
            SiteDocument::Monoid {
                name: Some(name.into()),
                elements: t(["1", "p", "q", "0"]).to_vec(),
                unit: "1".into(),
                table: vec![
                    t(["1", "p", "q", "0"]),
                    t(["p", "0", "1", "0"]),
                    t(["q", "0", "0", "0"]),
                    t(["0", "0", "0", "0"]),
                ],
            }
        }
        "discrete-1" => SiteDocument::from_poset(name, &FinitePoset::discrete(1)),
        "discrete-2" => SiteDocument::from_poset(name, &FinitePoset::discrete(2)),
        "discrete-3" => SiteDocument::from_poset(name, &FinitePoset::discrete(3)),
        "sierpinski" => SiteDocument::from_space(name, &FiniteSpace::sierpinski()),
        "pseudo-circle" => SiteDocument::from_poset(name, &FinitePoset::pseudo_circle()),
        "pseudo-2-sphere" => SiteDocument::from_poset(name, &FinitePoset::pseudo_sphere()),
        "chain-2" => SiteDocument::from_poset(name, &FinitePoset::chain(2)),
        "chain-3" => SiteDocument::from_poset(name, &FinitePoset::chain(3)),
        "chain-4" => SiteDocument::from_poset(name, &FinitePoset::chain(4)),
        "peak" => SiteDocument::from_poset(
            name,
            &FinitePoset::from_relations(&["a", "b", "t"], &[(0, 2), (1, 2)]).expect("poset"),
        ),
        "span" => SiteDocument::from_poset(
            name,
            &FinitePoset::from_relations(&["a", "b", "c", "d"], &[(0, 2), (1, 2), (1, 3)]).expect("poset"),
        ),
        "parallel-pair" => SiteDocument::Category {
            name: Some(name.into()),
            objects: vec!["A".into(), "B".into()],
            identities: vec![
                RawIdentity {
                    object: "A".into(),
                    morphism: "idA".into(),
                },
                RawIdentity {
                    object: "B".into(),
                    morphism: "idB".into(),
                },
            ],
            morphisms: ["f", "g"]
                .iter()
                .map(|n| RawMorphism {
                    name: n.to_string(),
                    source: "A".into(),
                    target: "B".into(),
                })
                .collect(),
            compositions: Vec::new(),
        },
        _ => {
            return Err(InputError::UnknownBuiltin {
                name: name.into(),
                available: BUILTINS.join(", "),
            })
        }
    })
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub max_degree: usize,
    pub group_bound: usize,
    pub budget_words: usize,
    pub primes: Vec<u64>,
    pub simplex_budget: usize,
    pub coset_budget: usize,
}

impl Default for ReportConfig {
    fn default() -> Self {
        let p = PurityConfig::default();
        ReportConfig {
            max_degree: p.max_degree,
            group_bound: p.group_bound,
            budget_words: 6,
            primes: p.primes,
            simplex_budget: p.simplex_budget,
            coset_budget: GROUPIFICATION_BUDGET,
        }
    }
}

impl ReportConfig {
    pub fn purity(&self) -> PurityConfig {
        PurityConfig {
            max_degree: self.max_degree,
            group_bound: self.group_bound,
            primes: self.primes.clone(),
            simplex_budget: self.simplex_budget,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectSieves {
    pub object: String,
    pub sieves: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopologyEntry {
    pub n: Level,
    pub covers: Vec<ObjectSieves>,
    pub certification: Certification,
    pub undecided: Vec<String>,
    pub classical_axioms: bool,
    pub characterization: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PurityEntry {
    pub dense: bool,
    pub stable: bool,
    pub certificate: PurityCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStepSummary {
    pub n: i32,
    pub covers: Vec<ObjectSieves>,
    pub certification: Certification,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionSummary {
    pub n: i32,
    pub witnesses: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionResult {
    pub dimension: DimensionValue,
    pub boundary: Boundary,
    pub content: Vec<ObjectSieves>,
    pub content_certification: Certification,
    pub levels: Vec<SieveLevel>,
    pub witnesses: Vec<SieveLevel>,
    pub chain: Vec<ChainStepSummary>,
    pub stabilization: i32,
    pub strict_inclusions: Vec<InclusionSummary>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContentResult {
    pub topology: Vec<ObjectSieves>,
    pub certification: Certification,
    pub whole_topos: bool,
    pub sheafified_representables: Vec<SheafifiedRepresentable>,
    pub census: Option<Vec<CensusEntry>>,
    pub census_bound: usize,
    pub equivalent_to_sets: Option<bool>,
    pub groupification_census: Option<Vec<CensusEntry>>,
    pub matches_groupification: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H1Entry {
    pub group: String,
    pub order: usize,
    pub classes: usize,
    pub torsor_classes: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct H1Result {
    pub components: usize,
    /// Presentation and abelianization of the fundamental group, for
    /// connected sites.
    pub presentation: Option<String>,
    pub abelianization: Option<String>,
    pub groups: Vec<H1Entry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub order: usize,
    pub abelian: bool,
    pub elements: Vec<String>,
    /// Monoid element and its image.
    pub image: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OreResult {
    pub right_ore: bool,
    pub witness: Option<(String, String)>,
    pub groupification: Option<GroupSummary>,
    pub budget_exceeded: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidateResult {
    pub kind: String,
    pub objects: usize,
    pub morphisms: usize,
    pub sieves: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandResult {
    Validate(ValidateResult),
    Sieves { objects: Vec<ObjectSieves> },
    Topologies { steps: Vec<TopologyEntry> },
    Purity { entries: Vec<PurityEntry> },
    Dimension(Box<DimensionResult>),
    Content(Box<ContentResult>),
    H1(H1Result),
    LocalCheck(LocalCheck),
    Ore(OreResult),
    FreeMonoid(FreeMonoidReport),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub version: String,
    pub command: String,
    pub input: Option<SiteDocument>,
    pub config: ReportConfig,
    pub result: CommandResult,
    pub certification: Certification,
    /// Sieves and verdicts that rest on a budget.
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommandSpec {
    Validate,
    Sieves,
    Topologies,
    Purity { sieve: Option<String>, object: Option<String> },
    Dimension,
    Content,
    H1 { group: Option<String> },
    LocalCheck,
    Ore,
    FreeMonoid { generators: usize },
}

impl CommandSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CommandSpec::Validate => "validate",
            CommandSpec::Sieves => "sieves",
            CommandSpec::Topologies => "topologies",
            CommandSpec::Purity { .. } => "purity",
            CommandSpec::Dimension => "dimension",
            CommandSpec::Content => "content",
            CommandSpec::H1 { .. } => "h1",
            CommandSpec::LocalCheck => "local-check",
            CommandSpec::Ore => "ore",
            CommandSpec::FreeMonoid { .. } => "free-monoid",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Input(#[from] InputError),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Invariant(_) => 4,
        }
    }
}

impl From<PurityError> for CliError {
    fn from(e: PurityError) -> Self {
        match e {
            PurityError::Config(m) => CliError::Input(InputError::Argument(m)),
            PurityError::InvalidSieve | PurityError::DegreeTooLow(_) | PurityError::Precondition { .. } => {
                CliError::Input(InputError::Argument(e.to_string()))
            }
            PurityError::NotATopology { .. } | PurityError::Homology(_) => CliError::Invariant(e.to_string()),
        }
    }
}

fn covers_by_object(site: &FiniteCategory, t: &GrothendieckTopology) -> Vec<ObjectSieves> {
    t.covers
        .iter()
        .enumerate()
        .map(|(c, set)| ObjectSieves {
            object: site.object_name(c).to_string(),
            sieves: set.iter().map(|s| s.display(site)).collect(),
        })
        .collect()
}

fn undecided_notes(site: &FiniteCategory, t: &NPureTopology) -> Vec<String> {
    t.undecided.iter().map(|s| s.display(site)).collect()
}

/// Parse `{f, g}`, `{}` or `max` into a sieve, generated by the listed
/// morphisms.
pub fn parse_sieve(site: &FiniteCategory, text: &str, object: Option<&str>) -> Result<Sieve, InputError> {
    let bad = |m: String| InputError::Argument(m);
    let base = match object {
        Some(o) => Some(site.find_object(o).ok_or_else(|| bad(format!("unknown object `{o}`")))?),
        None => None,
    };
    let text = text.trim();
    if text == "max" {
        let c = base
            .or((site.num_objects() == 1).then_some(0))
            .ok_or_else(|| bad("`max` needs --object".into()))?;
        return Ok(Sieve::maximal(site, c));
    }
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| bad(format!("sieve `{text}` should look like {{f, g}}")))?;
    let members = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|n| site.find_morphism(n).ok_or_else(|| bad(format!("unknown morphism `{n}`"))))
        .collect::<Result<Vec<_>, _>>()?;
    let targets: BTreeSet<usize> = members.iter().map(|&f| site.target(f)).collect();
    let c = match (base, targets.len()) {
        (Some(c), _) if targets.iter().all(|&t| t == c) => c,
        (Some(_), _) => return Err(bad("listed morphisms do not all end at --object".into())),
        (None, 1) => *targets.iter().next().expect("one"),
        (None, 0) if site.num_objects() == 1 => 0,
        (None, 0) => return Err(bad("the empty sieve needs --object".into())),
        (None, _) => return Err(bad("listed morphisms end at different objects".into())),
    };
    Ok(Sieve::generated_by(site, c, &members))
}

fn group_summary(m: &FiniteMonoid, g: &FiniteGroup, image: &[usize]) -> GroupSummary {
    GroupSummary {
        order: g.order(),
        abelian: g.is_abelian(),
        elements: g.elements.clone(),
        image: m
            .elements
            .iter()
            .zip(image)
            .map(|(x, &i)| (x.clone(), g.elements[i].clone()))
            .collect(),
    }
}

/// Run one command. Budget-limited results are returned with certification
/// `up_to_budget`; the binary prints them and exits with status 3.
pub fn run_command(
    doc: Option<&SiteDocument>,
    command: &CommandSpec,
    config: &ReportConfig,
) -> Result<ReportDocument, CliError> {
    let mut notes = Vec::new();
    let mut certification = Certification::Exact;
    let result = if let CommandSpec::FreeMonoid { generators } = command {
        if *generators == 0 || config.budget_words == 0 {
            return Err(InputError::Argument("--generators and --budget-words must be positive".into()).into());
        }
        let r = free_monoid_report(*generators, config.budget_words);
        if r.dimension.exact().is_none() {
            certification = Certification::UpToBudget;
        }
        CommandResult::FreeMonoid(r)
    } else {
        let doc = doc.ok_or_else(|| InputError::Argument("this command needs an input site".into()))?;
        let resolved = resolve(doc)?;
        let site = &resolved.category;
        let cfg = config.purity();
        cfg.validate()?;
        let lattice = SieveLattice::new(site);
        let analysis = PurityAnalysis::new(site, &lattice, cfg.clone())?;
        match command {
            CommandSpec::Validate => CommandResult::Validate(ValidateResult {
                kind: resolved.kind.to_string(),
                objects: site.num_objects(),
                morphisms: site.num_morphisms(),
                sieves: lattice.total(),
            }),
            CommandSpec::Sieves => CommandResult::Sieves {
                objects: (0..site.num_objects())
                    .map(|c| ObjectSieves {
                        object: site.object_name(c).to_string(),
                        sieves: lattice.sieves(c).iter().map(|s| s.display(site)).collect(),
                    })
                    .collect(),
            },
            CommandSpec::Topologies => {
                let mut steps = Vec::new();
                let levels = (-1..config.max_degree as i32).map(Level::Finite).chain([Level::Infinite]);
                for n in levels {
                    let t = n_pure_topology(&analysis, n)?;
                    let verdict = is_topology(site, &lattice, &t.topology);
                    if !verdict.agree() {
                        return Err(CliError::Invariant(format!(
                            "the two topology axiomatizations disagree on the {n}-pure topology"
                        )));
                    }
                    if t.certification != Certification::Exact {
                        certification = Certification::UpToBudget;
                        notes.extend(undecided_notes(site, &t).into_iter().map(|s| format!("{n}-pure: {s} undecided")));
                    }
                    steps.push(TopologyEntry {
                        n,
                        covers: covers_by_object(site, &t.topology),
                        certification: t.certification,
                        undecided: undecided_notes(site, &t),
                        classical_axioms: verdict.classical.is_ok(),
                        characterization: verdict.characterization.is_ok(),
                    });
                }
                CommandResult::Topologies { steps }
            }
            CommandSpec::Purity { sieve, object } => {
                let sieves: Vec<Sieve> = match sieve {
                    Some(text) => vec![parse_sieve(site, text, object.as_deref())?],
                    None => {
                        let objects: Vec<usize> = match object {
                            Some(o) => vec![site
                                .find_object(o)
                                .ok_or_else(|| InputError::Argument(format!("unknown object `{o}`")))?],
                            None => (0..site.num_objects()).collect(),
                        };
                        objects
                            .into_iter()
                            .flat_map(|c| lattice.sieves(c).iter().cloned())
                            .collect()
                    }
                };
                let mut entries = Vec::new();
                for s in sieves {
                    let cert = analysis.certificate_of(&s)?.clone();
                    if !cert.is_exact() {
                        certification = Certification::UpToBudget;
                        notes.push(format!("{}: level in [{}, {}]", cert.sieve, cert.lower, cert.upper));
                    }
                    entries.push(PurityEntry {
                        dense: is_dense(site, &s),
                        stable: detect_stability(site, &s),
                        certificate: cert,
                    });
                }
                CommandResult::Purity { entries }
            }
            CommandSpec::Dimension => {
                let r = report_from_analysis(&analysis)?;
                certification = r.certification;
                for l in r.levels.iter().filter(|l| l.lower != l.upper) {
                    notes.push(format!("{}: level in [{}, {}]", l.sieve, l.lower, l.upper));
                }
                CommandResult::Dimension(Box::new(DimensionResult {
                    dimension: r.dimension.clone(),
                    boundary: r.boundary,
                    content: covers_by_object(site, &r.content.topology),
                    content_certification: r.content.certification,
                    levels: r.levels.clone(),
                    witnesses: r.witnesses.clone(),
                    chain: r
                        .chain
                        .steps
                        .iter()
                        .map(|s| ChainStepSummary {
                            n: s.n.finite().expect("finite step"),
                            covers: covers_by_object(site, &s.topology),
                            certification: s.certification,
                        })
                        .collect(),
                    stabilization: r.chain.stabilization,
                    strict_inclusions: r
                        .chain
                        .strict_inclusions
                        .iter()
                        .map(|i| InclusionSummary {
                            n: i.n,
                            witnesses: i.witnesses.iter().map(|s| s.display(site)).collect(),
                        })
                        .collect(),
                }))
            }
            CommandSpec::Content => {
                let c = content_from_analysis(&analysis)?;
                certification = c.topology.certification;
                notes.extend(undecided_notes(site, &c.topology));
                CommandResult::Content(Box::new(ContentResult {
                    topology: covers_by_object(site, &c.topology.topology),
                    certification: c.topology.certification,
                    whole_topos: c.whole_topos,
                    sheafified_representables: c.sheafified_representables,
                    census: c.census,
                    census_bound: c.census_bound,
                    equivalent_to_sets: c.equivalent_to_sets,
                    groupification_census: c.groupification_census,
                    matches_groupification: c.matches_groupification,
                }))
            }
            CommandSpec::H1 { group } => {
                let groups: Vec<(String, FiniteGroup)> = match group {
                    Some(name) => vec![(
                        name.clone(),
                        group_by_name(name)
                            .ok_or_else(|| InputError::Argument(format!("unknown group `{name}`")))?,
                    )],
                    None => small_groups().into_iter().map(|(n, g)| (n.to_string(), g)).collect(),
                };
                let components = crate::fincat::connected_components(site).len();
                let (presentation, abelian) = if components == 1 {
                    let p = pi1_presentation(site).map_err(|e| CliError::Invariant(e.to_string()))?;
                    (Some(p.to_string()), Some(abelianization(&p).to_string()))
                } else {
                    (None, None)
                };
                let mut entries = Vec::new();
                for (name, g) in groups {
                    let classes = h1_set(site, &g).map_err(|e| CliError::Invariant(e.to_string()))?;
                    let torsors = torsor_classes(site, &g);
                    if classes != torsors {
                        return Err(CliError::Invariant(format!(
                            "H1 with coefficients in {name}: {classes} homomorphism classes but {torsors} torsor classes"
                        )));
                    }
                    entries.push(H1Entry {
                        group: name,
                        order: g.order(),
                        classes,
                        torsor_classes: torsors,
                    });
                }
                CommandResult::H1(H1Result {
                    components,
                    presentation,
                    abelianization: abelian,
                    groups: entries,
                })
            }
            CommandSpec::LocalCheck => {
                let check = local_dimension_check(site, &cfg)?;
                if check.global.exact().is_none() || check.slices.iter().any(|s| s.dimension.exact().is_none()) {
                    certification = Certification::UpToBudget;
                }
                CommandResult::LocalCheck(check)
            }
            CommandSpec::Ore => {
                let m = resolved
                    .monoid
                    .clone()
                    .or_else(|| (site.num_objects() == 1).then(|| site.endomorphism_monoid(0)))
                    .ok_or_else(|| InputError::Argument("`ore` needs a one-object site".into()))?;
                let r = ore_and_groupification(&m, config.coset_budget);
                let (groupification, budget_exceeded) = match &r.groupification {
                    Ok(g) => (Some(group_summary(&m, &g.group, &g.image)), false),
                    Err(e) => {
                        certification = Certification::UpToBudget;
                        notes.push(e.to_string());
                        (None, true)
                    }
                };
                CommandResult::Ore(OreResult {
                    right_ore: r.right_ore,
                    witness: r
                        .witness
                        .map(|(x, y)| (m.elements[x].clone(), m.elements[y].clone())),
                    groupification,
                    budget_exceeded,
                })
            }
            CommandSpec::FreeMonoid { .. } => unreachable!("handled above"),
        }
    };
    Ok(ReportDocument {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.name().to_string(),
        input: doc.cloned(),
        config: config.clone(),
        result,
        certification,
        notes,
    })
}

// ---------------------------------------------------------------------------
// Text rendering

fn render_covers(out: &mut String, indent: &str, covers: &[ObjectSieves]) {
    for o in covers {
        let _ = writeln!(out, "{indent}{}: {}", o.object, o.sieves.join("  "));
    }
}

pub fn render_text(report: &ReportDocument) -> String {
    let mut out = String::new();
    if let Some(doc) = &report.input {
        let _ = writeln!(out, "site: {} ({})", doc.name().unwrap_or("unnamed"), doc.kind());
    }
    match &report.result {
        CommandResult::Validate(v) => {
            let _ = writeln!(out, "valid {}", v.kind);
            let _ = writeln!(out, "objects: {}", v.objects);
            let _ = writeln!(out, "morphisms: {}", v.morphisms);
            let _ = writeln!(out, "sieves: {}", v.sieves);
        }
        CommandResult::Sieves { objects } => {
            for o in objects {
                let _ = writeln!(out, "{} ({} sieves)", o.object, o.sieves.len());
                for s in &o.sieves {
                    let _ = writeln!(out, "  {s}");
                }
            }
        }
        CommandResult::Topologies { steps } => {
            for s in steps {
                let _ = writeln!(
                    out,
                    "{}-pure topology [{}] axioms: classical {}, characterization {}",
                    s.n,
                    cert_name(s.certification),
                    ok(s.classical_axioms),
                    ok(s.characterization)
                );
                render_covers(&mut out, "  ", &s.covers);
            }
        }
        CommandResult::Purity { entries } => {
            for e in entries {
                let c = &e.certificate;
                let level = if c.is_exact() {
                    c.lower.to_string()
                } else {
                    format!("[{}, {}]", c.lower, c.upper)
                };
                let _ = writeln!(
                    out,
                    "{}: level {} ({}), dense {}, stable {}",
                    c.sieve,
                    level,
                    cert_name(c.certification),
                    e.dense,
                    e.stable
                );
                if let Some(w) = &c.witness {
                    let _ = writeln!(
                        out,
                        "  fails along {} in degree {} ({:?} coefficients)",
                        w.morphism, w.degree, w.coefficients
                    );
                }
                for p in &c.evidence {
                    let _ = writeln!(out, "  along {}: {} -> {}", p.morphism, p.pullback, verdict_name(&p.verdict));
                }
            }
        }
        CommandResult::Dimension(d) => {
            let _ = writeln!(out, "dimension: {}", d.dimension);
            let _ = writeln!(out, "boundary: {}", d.boundary);
            let _ = writeln!(out, "stabilizes at n = {}", d.stabilization);
            let _ = writeln!(out, "content ({}):", cert_name(d.content_certification));
            render_covers(&mut out, "  ", &d.content);
            let _ = writeln!(out, "levels:");
            for l in &d.levels {
                let level = if l.lower == l.upper {
                    l.lower.to_string()
                } else {
                    format!("[{}, {}]", l.lower, l.upper)
                };
                let _ = writeln!(out, "  {}: {}", l.sieve, level);
            }
            for i in &d.strict_inclusions {
                let _ = writeln!(out, "{}-pure but not {}-pure: {}", i.n, i.n + 1, i.witnesses.join("  "));
            }
        }
        CommandResult::Content(c) => {
            let _ = writeln!(out, "content topology ({}):", cert_name(c.certification));
            render_covers(&mut out, "  ", &c.topology);
            let _ = writeln!(out, "whole topos: {}", c.whole_topos);
            for r in &c.sheafified_representables {
                let _ = writeln!(
                    out,
                    "sheafified representable at {}: sections {:?}{}",
                    r.object,
                    r.sections,
                    if r.terminal { " (terminal)" } else { "" }
                );
            }
            match &c.census {
                Some(entries) => {
                    let _ = writeln!(out, "sheaves with at most {} sections per object:", c.census_bound);
                    for e in entries {
                        let _ = writeln!(out, "  sizes {:?}: {} classes", e.sizes, e.classes);
                    }
                }
                None => {
                    let _ = writeln!(out, "sheaf census skipped (too large)");
                }
            }
            match c.equivalent_to_sets {
                Some(b) => {
                    let _ = writeln!(out, "equivalent to sets: {b}");
                }
                None => {
                    let _ = writeln!(out, "equivalent to sets: unknown");
                }
            }
            if let Some(m) = c.matches_groupification {
                let _ = writeln!(out, "matches actions of the groupification: {m}");
            }
        }
        CommandResult::H1(h) => {
            let _ = writeln!(out, "components: {}", h.components);
            if let (Some(p), Some(a)) = (&h.presentation, &h.abelianization) {
                let _ = writeln!(out, "fundamental group: {p}");
                let _ = writeln!(out, "abelianization: {a}");
            }
            for g in &h.groups {
                let _ = writeln!(
                    out,
                    "H1 with coefficients in {} (order {}): {} classes, {} torsor classes",
                    g.group, g.order, g.classes, g.torsor_classes
                );
            }
        }
        CommandResult::LocalCheck(l) => {
            let _ = writeln!(out, "dimension: {}", l.global);
            for s in &l.slices {
                let _ = writeln!(out, "  slice over {}: {}", s.object, s.dimension);
            }
            let _ = writeln!(out, "local check: {}", if l.holds { "holds" } else { "FAILS" });
        }
        CommandResult::Ore(o) => {
            let _ = writeln!(out, "right Ore: {}", o.right_ore);
            if let Some((x, y)) = &o.witness {
                let _ = writeln!(out, "no common right multiple: {x}, {y}");
            }
            match &o.groupification {
                Some(g) => {
                    let _ = writeln!(out, "groupification: order {}{}", g.order, if g.abelian { ", abelian" } else { "" });
                    for (x, y) in &g.image {
                        let _ = writeln!(out, "  {x} -> {y}");
                    }
                }
                None => {
                    let _ = writeln!(out, "groupification: coset budget exceeded");
                }
            }
        }
        CommandResult::FreeMonoid(f) => {
            let _ = writeln!(out, "free monoid on {} generators", f.generators);
            let _ = writeln!(out, "dimension: {}", f.dimension);
            let _ = writeln!(out, "boundary: {}", f.boundary);
            let _ = writeln!(out, "words checked: {} (length <= {})", f.words_checked, f.word_budget);
            let _ = writeln!(out, "puncture components: {}", f.puncture_components);
            let _ = writeln!(out, "components verified: {}", f.components_verified);
            let _ = writeln!(out, "stable: {}", f.stable);
            let _ = writeln!(out, "right Ore: {}", f.right_ore);
            if let Some((x, y)) = &f.non_ore_witness {
                let _ = writeln!(out, "no common right multiple: {x}, {y}");
            }
            let _ = writeln!(out, "content: {}", f.content);
        }
    }
    if report.certification != Certification::Exact {
        let _ = writeln!(out, "certification: up to budget");
        for n in &report.notes {
            let _ = writeln!(out, "  {n}");
        }
    }
    out
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "FAIL"
    }
}

fn cert_name(c: Certification) -> &'static str {
    match c {
        Certification::Exact => "exact",
        Certification::UpToBudget => "up to budget",
    }
}

fn verdict_name(v: &crate::purity::ElementsVerdict) -> String {
    use crate::purity::ElementsVerdict::*;
    match v {
        Empty => "empty".into(),
        Disconnected { components } => format!("{components} components"),
        Contractible { .. } => "contractible".into(),
        FundamentalGroupNontrivial { .. } => "nontrivial fundamental group".into(),
        CohomologyNonzero { degree, homology, previous, .. } => {
            format!("cohomology in degree {degree} (H{degree} = {homology}, H{} = {previous})", degree - 1)
        }
        Acyclic { through, .. } => format!("acyclic through degree {through}"),
    }
}

// ---------------------------------------------------------------------------
// Command line

#[derive(Parser, Debug)]
#[command(name = "toposdim", version, about = "Dimension, content and boundary of presheaf toposes on finite sites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Options {
    /// Highest chain degree examined
    #[arg(long, default_value_t = 4)]
    pub max_degree: usize,
    /// Largest symmetric group probed for fundamental-group quotients
    #[arg(long, default_value_t = 5)]
    pub group_bound: usize,
    /// Emit the report as JSON
    #[arg(long)]
    pub json: bool,
    /// Word length verified by free-monoid
    #[arg(long, default_value_t = 6)]
    pub budget_words: usize,
}

#[derive(Args, Debug, Clone)]
pub struct SiteArgs {
    /// Site document, or `-` for standard input
    pub input: Option<PathBuf>,
    /// Use a built-in site instead of a file
    #[arg(long, conflicts_with = "input")]
    pub builtin: Option<String>,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a site document
    Validate(SiteArgs),
    /// List the sieves on every object
    Sieves(SiteArgs),
    /// The n-pure topologies
    Topologies(SiteArgs),
    /// Purity levels of sieves
    Purity {
        #[command(flatten)]
        site: SiteArgs,
        /// A sieve such as "{e}", "{}" or "max"
        #[arg(long)]
        sieve: Option<String>,
        /// Object the sieve lives on; needed when the sieve is "{}" or "max"
        /// on a site with several objects
        #[arg(long)]
        object: Option<String>,
    },
    /// Dimension, boundary and the subtopos chain
    Dimension(SiteArgs),
    /// Description of the content subtopos
    Content(SiteArgs),
    /// First cohomology with finite group coefficients
    H1 {
        #[command(flatten)]
        site: SiteArgs,
        /// Z1..Z64, S1..S5, Z2xZ2, trivial; all groups of order at most 6 by default
        #[arg(long)]
        group: Option<String>,
    },
    /// Compare the dimension with the dimensions of slices over objects
    LocalCheck(SiteArgs),
    /// Right Ore condition and groupification of a monoid
    Ore(SiteArgs),
    /// Analysis of a free monoid
    FreeMonoid {
        /// Number of generators
        #[arg(long)]
        generators: usize,
        #[command(flatten)]
        options: Options,
    },
}

fn load(args: &SiteArgs) -> Result<SiteDocument, InputError> {
    if let Some(name) = &args.builtin {
        return builtin_document(name);
    }
    let text = match &args.input {
        None => return Err(InputError::Argument("give an input file, `-`, or --builtin".into())),
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| InputError::Io(e.to_string()))?;
            s
        }
        Some(p) => std::fs::read_to_string(p).map_err(|e| InputError::Io(format!("{}: {e}", p.display())))?,
    };
    parse_document(&text)
}

fn config_from(o: &Options) -> ReportConfig {
    ReportConfig {
        max_degree: o.max_degree,
        group_bound: o.group_bound,
        budget_words: o.budget_words,
        ..ReportConfig::default()
    }
}

/// Output of one invocation.
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
}

pub fn execute(cli: Cli) -> Outcome {
    let (spec, site, options) = match cli.command {
        Command::Validate(s) => (CommandSpec::Validate, Some(s.clone()), s.options),
        Command::Sieves(s) => (CommandSpec::Sieves, Some(s.clone()), s.options),
        Command::Topologies(s) => (CommandSpec::Topologies, Some(s.clone()), s.options),
        Command::Purity { site, sieve, object } => {
            (CommandSpec::Purity { sieve, object }, Some(site.clone()), site.options)
        }
        Command::Dimension(s) => (CommandSpec::Dimension, Some(s.clone()), s.options),
        Command::Content(s) => (CommandSpec::Content, Some(s.clone()), s.options),
        Command::H1 { site, group } => (CommandSpec::H1 { group }, Some(site.clone()), site.options),
        Command::LocalCheck(s) => (CommandSpec::LocalCheck, Some(s.clone()), s.options),
        Command::Ore(s) => (CommandSpec::Ore, Some(s.clone()), s.options),
        Command::FreeMonoid { generators, options } => (CommandSpec::FreeMonoid { generators }, None, options),
    };
    let config = config_from(&options);
    let run = || -> Result<ReportDocument, CliError> {
        let doc = site.as_ref().map(load).transpose()?;
        run_command(doc.as_ref(), &spec, &config)
    };
    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run));
    let result = match outcome {
        Ok(r) => r,
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(CliError::Invariant(msg))
        }
    };
    match result {
        Ok(report) => {
            let stdout = if options.json {
                serde_json::to_string_pretty(&report).expect("reports serialize") + "\n"
            } else {
                render_text(&report)
            };
            let code = if report.certification == Certification::Exact { 0 } else { 3 };
            Outcome {
                stdout,
                stderr: String::new(),
                code,
            }
        }
        Err(e) => Outcome {
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
            code: e.exit_code(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip_for_builtins() {
        for name in BUILTINS {
            let doc = builtin_document(name).unwrap();
            assert_eq!(parse_document(&to_text(&doc)).unwrap(), doc, "{name}");
            let json = serde_json::to_string(&doc).unwrap();
            assert_eq!(parse_document(&json).unwrap(), doc, "{name}");
        }
    }

    #[test]
    fn rejections() {
        let err = parse_site(&to_text(&builtin_document("bicyclic-truncation").unwrap())).unwrap_err();
        assert!(matches!(err, InputError::Invalid { kind: "monoid", .. }), "{err}");
        let err = parse_site("kind: poset\nelements: a b c\nleq: a b\nleq: b c\n").unwrap_err();
        assert!(err.to_string().contains("a ≤ b and b ≤ c"), "{err}");
        let err = parse_site("kind: monoid\nelements: 1\nunit 1\n").unwrap_err();
        assert!(matches!(err, InputError::Syntax { line: 3, .. }), "{err}");
    }

    #[test]
    fn purity_of_e() {
        let doc = builtin_document("idempotent-monoid").unwrap();
        let spec = CommandSpec::Purity {
            sieve: Some("{e}".into()),
            object: None,
        };
        let r = run_command(Some(&doc), &spec, &ReportConfig::default()).unwrap();
        let CommandResult::Purity { entries } = &r.result else {
            panic!("purity result")
        };
        assert_eq!(entries[0].certificate.level(), Some(Level::Infinite));
        let back: ReportDocument = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
