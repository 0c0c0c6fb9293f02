//! Randomized invariants over small sites. Each property draws a seed and
//! builds a poset, a transformation monoid or a product of the two.

mod common;

use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use toposdim::cli::{builtin_document, resolve, BUILTINS};
use toposdim::dimension::{dimension_report, local_dimension_check};
use toposdim::fincat::{connected_components, FiniteCategory};
use toposdim::homology::{
    cohomology_mod_p, homology_group, nerve_chain_complex, smith_normal_form, IntegerMatrix,
};
use toposdim::pi1::{abelianization, pi1_presentation};
use toposdim::presheaf::{
    a_pure_topology, constant, is_topology, largest_topology_for, pullback_sieve, FamilyMode, SheafMode,
    SieveLattice,
};
use toposdim::purity::{
    n_pure_topology, next_degree_mono_check, Certification, Level, PurityAnalysis, PurityConfig,
};

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(200)
}

fn site_from(seed: u64) -> FiniteCategory {
    random_site(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn small_config() -> PurityConfig {
    PurityConfig {
        max_degree: 3,
        ..PurityConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn largest_topologies_are_topologies(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let site = random_site(&mut rng);
        let lattice = SieveLattice::new(&site);
        let x = random_presheaf(&mut rng, &site);
        for mode in [SheafMode::Sheaf, SheafMode::Separated] {
            let j = largest_topology_for(&site, &lattice, &x, mode);
            let verdict = is_topology(&site, &lattice, &j);
            prop_assert!(verdict.passes() && verdict.agree(), "{:?}: {:?}", mode, verdict);
        }
    }

    #[test]
    fn pure_topologies_are_antitone_topologies(seed in any::<u64>()) {
        let site = site_from(seed);
        let lattice = SieveLattice::new(&site);
        let analysis = PurityAnalysis::new(&site, &lattice, small_config()).unwrap();
        let levels = [Level::Finite(-1), Level::Finite(0), Level::Finite(1), Level::Finite(2), Level::Infinite];
        let mut previous = None;
        for n in levels {
            let t = n_pure_topology(&analysis, n).unwrap();
            let verdict = is_topology(&site, &lattice, &t.topology);
            prop_assert!(verdict.passes() && verdict.agree(), "{}: {:?}", n, verdict);
            if let Some(p) = &previous {
                prop_assert!(t.topology.is_subset_of(p), "not antitone at {}", n);
            }
            previous = Some(t.topology);
        }
    }

    #[test]
    fn low_purity_is_density_and_constant_purity(seed in any::<u64>()) {
        let site = site_from(seed);
        let lattice = SieveLattice::new(&site);
        let analysis = PurityAnalysis::new(&site, &lattice, small_config()).unwrap();
        let constants: Vec<_> = (0..=2).map(|k| constant(&site, k)).collect();
        let dense = n_pure_topology(&analysis, Level::Finite(-1)).unwrap();
        let pure = n_pure_topology(&analysis, Level::Finite(0)).unwrap();
        prop_assert_eq!(dense.certification, Certification::Exact);
        prop_assert_eq!(pure.certification, Certification::Exact);
        prop_assert_eq!(dense.topology, a_pure_topology(&site, &lattice, &constants, FamilyMode::Dense));
        prop_assert_eq!(pure.topology, a_pure_topology(&site, &lattice, &constants, FamilyMode::Pure));
    }

    #[test]
    fn purity_is_pullback_stable(seed in any::<u64>()) {
        let site = site_from(seed);
        let lattice = SieveLattice::new(&site);
        let analysis = PurityAnalysis::new(&site, &lattice, small_config()).unwrap();
        for c in 0..site.num_objects() {
            for s in 0..lattice.sieves(c).len() {
                let cert = analysis.certificate(c, s);
                if !cert.is_exact() {
                    continue;
                }
                let sieve = lattice.sieve(c, s);
                for &f in site.maps_into(c) {
                    let pulled = analysis.certificate_of(&pullback_sieve(&site, sieve, f)).unwrap();
                    prop_assert!(pulled.lower >= cert.lower, "{} along {}", cert.sieve, site.morphism_name(f));
                }
            }
        }
    }

    #[test]
    fn pure_sieves_restrict_injectively_in_the_next_degree(seed in any::<u64>()) {
        let site = site_from(seed);
        let lattice = SieveLattice::new(&site);
        let analysis = PurityAnalysis::new(&site, &lattice, small_config()).unwrap();
        for c in 0..site.num_objects() {
            for s in 0..lattice.sieves(c).len() {
                let cert = analysis.certificate(c, s).clone();
                if !cert.is_exact() {
                    continue;
                }
                let top = match cert.lower {
                    Level::Finite(l) => l.min(1),
                    Level::Infinite => 1,
                };
                for n in -1..=top {
                    for p in [2, 3] {
                        let ok = next_degree_mono_check(&analysis, lattice.sieve(c, s), n, p).unwrap();
                        prop_assert!(ok, "{} at n = {}, p = {}", cert.sieve, n, p);
                    }
                }
            }
        }
    }

    #[test]
    fn abelianized_fundamental_group_is_first_homology(seed in any::<u64>()) {
        let site = site_from(seed);
        prop_assume!(connected_components(&site).len() == 1);
        let p = pi1_presentation(&site).unwrap();
        let h1 = homology_group(&nerve_chain_complex(&site, 2), 1).unwrap();
        prop_assert_eq!(abelianization(&p), h1);
    }

    #[test]
    fn smith_normal_form_identities(rows in proptest::collection::vec(proptest::collection::vec(-6i64..=6, 1..=5), 1..=5)) {
        let width = rows.iter().map(Vec::len).min().unwrap();
        let rows: Vec<Vec<i64>> = rows.into_iter().map(|r| r[..width].to_vec()).collect();
        let m = IntegerMatrix::from_rows(&rows);
        let s = smith_normal_form(&m);
        prop_assert_eq!(s.u.mul(&m).mul(&s.v), s.d.clone());
        prop_assert!(s.d.is_diagonal());
        let one = num_bigint::BigInt::from(1);
        for unimodular in [&s.u, &s.v] {
            let det = unimodular.determinant();
            prop_assert!(det == one || det == -one.clone(), "determinant {}", det);
        }
        let factors = s.invariant_factors();
        for w in factors.windows(2) {
            prop_assert!((&w[1] % &w[0]) == num_bigint::BigInt::from(0), "{:?}", factors);
        }
        let oracle = invariant_factors(&diagonalize(rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect()));
        let nontrivial: Vec<u64> = factors.iter().filter(|f| **f != one && **f != num_bigint::BigInt::from(0)).map(|f| u64::try_from(f.magnitude().clone()).unwrap()).collect();
        prop_assert_eq!(nontrivial, oracle);
    }

    #[test]
    fn universal_coefficients(seed in any::<u64>()) {
        let site = site_from(seed);
        let cx = nerve_chain_complex(&site, 3);
        for m in 0..=2usize {
            let h = homology_group(&cx, m).unwrap();
            for p in [2u64, 3] {
                let divisible = |t: &Vec<u64>| t.iter().filter(|&&x| x % p == 0).count();
                let previous = if m == 0 { 0 } else { divisible(&homology_group(&cx, m - 1).unwrap().torsion) };
                prop_assert_eq!(
                    cohomology_mod_p(&cx, m, p).unwrap(),
                    h.betti + divisible(&h.torsion) + previous,
                    "degree {}, p = {}", m, p
                );
            }
        }
    }

    #[test]
    fn dimension_is_local(seed in any::<u64>()) {
        let site = site_from(seed);
        let check = local_dimension_check(&site, &small_config()).unwrap();
        prop_assert!(check.holds, "{:?}", check);
    }
}

#[test]
fn dimension_is_local_on_the_corpus() {
    for name in BUILTINS {
        let Ok(site) = resolve(&builtin_document(name).unwrap()) else {
            continue;
        };
        let check = local_dimension_check(&site.category, &PurityConfig::default()).unwrap();
        assert!(check.holds, "{name}: {check:?}");
    }
}

#[test]
fn infinite_sieves_stay_infinite_under_pullback_on_the_corpus() {
    for name in BUILTINS {
        let Ok(site) = resolve(&builtin_document(name).unwrap()) else {
            continue;
        };
        let site = &site.category;
        let lattice = SieveLattice::new(site);
        let analysis = PurityAnalysis::new(site, &lattice, PurityConfig::default()).unwrap();
        let report = dimension_report(site, &PurityConfig::default()).unwrap();
        for c in 0..site.num_objects() {
            for s in 0..lattice.sieves(c).len() {
                let cert = analysis.certificate(c, s);
                if cert.level() != Some(Level::Infinite) {
                    continue;
                }
                assert!(report.content.topology.contains(lattice.sieve(c, s)), "{name}: {}", cert.sieve);
                for &f in site.maps_into(c) {
                    let pulled = analysis.certificate_of(&pullback_sieve(site, lattice.sieve(c, s), f)).unwrap();
                    assert_eq!(pulled.level(), Some(Level::Infinite), "{name}: {}", cert.sieve);
                }
            }
        }
    }
}
