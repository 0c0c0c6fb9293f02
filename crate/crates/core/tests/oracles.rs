//! Library results against independent computations.

mod common;

use common::*;
use toposdim::cli::{builtin_document, resolve, BUILTINS};
use toposdim::dimension::ore_and_groupification;
use toposdim::fincat::{monoid_as_category, FiniteMonoid, FinitePoset};
use toposdim::homology::{cohomology_mod_p, homology_group, nerve_chain_complex, HomologyGroup};
use toposdim::pi1::{h1_set, small_groups, FiniteGroup};

fn library_homology(cx: &toposdim::homology::ChainComplex, m: usize) -> (usize, Vec<u64>) {
    let h: HomologyGroup = homology_group(cx, m).unwrap();
    (h.betti, h.torsion)
}

#[test]
fn bar_complex_of_z2() {
    let g = FiniteGroup::cyclic(2);
    let bar = bar_complex(&g, 4);
    let expected = [(1, vec![]), (0, vec![2]), (0, vec![]), (0, vec![2])];
    for (m, e) in expected.iter().enumerate() {
        assert_eq!(bar.homology(m), *e, "oracle H_{m}");
        assert_eq!(bar.cohomology_mod_p(m, 2), 1, "oracle H^{m}(F_2)");
    }
    let cx = nerve_chain_complex(&monoid_as_category(&FiniteMonoid::cyclic_group(2)), 4);
    for (m, e) in expected.iter().enumerate() {
        assert_eq!(library_homology(&cx, m), *e, "H_{m}");
        assert_eq!(cohomology_mod_p(&cx, m, 2).unwrap(), 1, "H^{m}(F_2)");
    }
}

#[test]
fn group_homology_against_bar_complex() {
    for (name, g) in small_groups() {
        let top = if g.order() > 4 { 3 } else { 4 };
        let bar = bar_complex(&g, top);
        let cx = nerve_chain_complex(&monoid_as_category(&group_as_monoid(&g)), top);
        for m in 0..top {
            assert_eq!(library_homology(&cx, m), bar.homology(m), "{name} H_{m}");
            for p in [2, 3] {
                assert_eq!(
                    cohomology_mod_p(&cx, m, p).unwrap(),
                    bar.cohomology_mod_p(m, p as i128),
                    "{name} H^{m}(F_{p})"
                );
            }
        }
    }
}

#[test]
fn nerve_homology_of_corpus_sites() {
    for name in BUILTINS {
        let Ok(site) = resolve(&builtin_document(name).unwrap()) else {
            continue;
        };
        let top = 3;
        let oracle = nerve_oracle(&site.category, top);
        let cx = nerve_chain_complex(&site.category, top);
        for m in 0..top {
            assert_eq!(library_homology(&cx, m), oracle.homology(m), "{name} H_{m}");
            assert_eq!(
                cohomology_mod_p(&cx, m, 2).unwrap(),
                oracle.cohomology_mod_p(m, 2),
                "{name} H^{m}(F_2)"
            );
        }
    }
}

#[test]
fn pseudo_circle_and_sphere_homology() {
    let circle = nerve_oracle(&FinitePoset::pseudo_circle().site(), 3);
    assert_eq!(circle.homology(0), (1, vec![]));
    assert_eq!(circle.homology(1), (1, vec![]));
    assert_eq!(circle.homology(2), (0, vec![]));
    let sphere = nerve_oracle(&FinitePoset::pseudo_sphere().site(), 4);
    assert_eq!(sphere.homology(1), (0, vec![]));
    assert_eq!(sphere.homology(2), (1, vec![]));
    assert_eq!(sphere.homology(3), (0, vec![]));
}

#[test]
fn h1_matches_torsor_enumeration_on_corpus() {
    for name in BUILTINS {
        let Ok(site) = resolve(&builtin_document(name).unwrap()) else {
            continue;
        };
        for (gname, g) in small_groups() {
            assert_eq!(
                h1_set(&site.category, &g).unwrap(),
                torsor_count(&site.category, &g),
                "{name} with {gname}"
            );
        }
    }
}

#[test]
fn torsor_oracle_known_values() {
    let circle = FinitePoset::pseudo_circle().site();
    // Hom(ℤ, G) up to conjugacy: conjugacy classes of G.
    assert_eq!(torsor_count(&circle, &FiniteGroup::symmetric(3)), 3);
    assert_eq!(torsor_count(&circle, &FiniteGroup::cyclic(5)), 5);
    let z2 = monoid_as_category(&FiniteMonoid::cyclic_group(2));
    assert_eq!(torsor_count(&z2, &FiniteGroup::cyclic(4)), 2);
    let discrete = FinitePoset::discrete(2).site();
    assert_eq!(torsor_count(&discrete, &FiniteGroup::cyclic(3)), 1);
}

/// Homomorphisms out of the groupification are monoid homomorphisms out of
/// the monoid, for every test group.
#[test]
fn groupification_has_the_universal_property() {
    let monoids = [
        FiniteMonoid::trivial(),
        FiniteMonoid::idempotent(),
        FiniteMonoid::cyclic_group(3),
        FiniteMonoid::symmetric_group(3),
        FiniteMonoid::left_zero_with_unit(3),
        resolve(&builtin_document("z2-idempotent").unwrap()).unwrap().monoid.unwrap(),
    ];
    for m in &monoids {
        let r = ore_and_groupification(m, 20_000);
        let g = r.groupification.expect("within budget");
        // The image generates.
        let mut generated = vec![g.group.unit];
        let mut k = 0;
        while k < generated.len() {
            for &x in &g.image {
                let y = g.group.mul(generated[k], x);
                if !generated.contains(&y) {
                    generated.push(y);
                }
            }
            k += 1;
        }
        assert_eq!(generated.len(), g.group.order(), "{:?}", m.elements);
        for (name, h) in small_groups() {
            assert_eq!(
                monoid_hom_count(&group_as_monoid(&g.group), &h),
                monoid_hom_count(m, &h),
                "{:?} into {name}",
                m.elements
            );
        }
    }
}

#[test]
fn oracle_linear_algebra() {
    assert_eq!(invariant_factors(&[2, 3]), vec![6]);
    assert_eq!(invariant_factors(&[2, 4, 1]), vec![2, 4]);
    assert_eq!(diagonalize(vec![vec![2, 4], vec![6, 8]]).len(), 2);
    assert_eq!(rank_mod_p(&[vec![2, 4], vec![6, 8]], 2), 0);
}
