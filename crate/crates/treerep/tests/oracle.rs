mod common;

use common::{attached, b2, star, trees_up_to};
use num_bigint::BigUint;
use treerep::automorphism::{sign, Automorphism};
use treerep::oracle::{
    brute_conjugacy_classes, char_inner_product, char_inner_product_integer, composition_orbit, coset_representatives,
    enumerate_aut, joint_stabilizer_is_trivial, perm_character, perm_character_table, sign_induced_character,
    sign_induced_character_table, sign_table, stabilizer,
};
use treerep::representation::perm_module_dim;
use treerep::tree_core::{aut_order, trivial_composition};

#[test]
fn enumeration_examples() {
    assert_eq!(enumerate_aut(&b2(), 100).unwrap().order(), 8);
    assert_eq!(enumerate_aut(&star(4), 100).unwrap().class_count(), 5);
    assert!(enumerate_aut(&star(5), 100).is_err());
    let g = enumerate_aut(&b2(), 100).unwrap();
    let sizes: usize = (0..g.class_count()).map(|c| g.class_size(c)).sum();
    assert_eq!(sizes, 8);
    for c in 0..g.class_count() {
        assert_eq!(g.class_size(c) * g.centralizer_order(c), 8);
        assert_eq!(g.class_of(g.index_of(g.class_representative(c)).unwrap()), c);
    }
}

#[test]
fn group_tables_are_groups() {
    for t in trees_up_to(7) {
        let g = enumerate_aut(&t, 10_000).unwrap();
        assert_eq!(BigUint::from(g.order()), aut_order(&t));
        assert_eq!(brute_conjugacy_classes(&g).len(), g.class_count());
        for a in 0..g.order() {
            for b in 0..g.order() {
                let ab = g.element(a).compose(g.element(b));
                assert_eq!(g.index_of(&ab), Some(g.multiply(a, b)));
            }
        }
    }
}

#[test]
fn characters_are_class_functions() {
    for t in trees_up_to(7) {
        let g = enumerate_aut(&t, 10_000).unwrap();
        let signs = sign_table(&g);
        for (_, phi) in attached(&t) {
            let table = perm_character_table(&phi, &g);
            let twisted = sign_induced_character_table(&phi, &g);
            for (i, h) in g.elements().iter().enumerate() {
                let c = g.class_of(i);
                assert_eq!(perm_character(&phi, h, &g), table[c]);
                assert_eq!(sign_induced_character(&phi, h, &g), twisted[c]);
                assert_eq!(i64::from(sign(h)), signs[c]);
            }
            for chi in [&table, &twisted] {
                assert!(char_inner_product(chi, chi, &g).is_integer());
                assert!(char_inner_product_integer(chi, &signs, &g).is_some());
            }
        }
    }
}

#[test]
fn values_at_the_identity_are_orbit_sizes() {
    for t in trees_up_to(8) {
        let g = enumerate_aut(&t, 10_000).unwrap();
        let e = Automorphism::identity(&t);
        for (_, phi) in attached(&t) {
            let n = composition_orbit(&phi, &g).len();
            assert_eq!(BigUint::from(n), perm_module_dim(&phi));
            assert_eq!(perm_character(&phi, &e, &g), n as i64);
            assert_eq!(sign_induced_character(&phi, &e, &g), n as i64);
            assert_eq!(coset_representatives(&phi, &g).len(), n);
            assert_eq!(stabilizer(&phi, &g).len() * n, g.order());
        }
    }
}

#[test]
fn joint_stabilizer_examples() {
    let t = b2();
    let g = enumerate_aut(&t, 100).unwrap();
    let (_, tv) = trivial_composition(&t);
    let id: Vec<usize> = t.vertices().collect();
    assert!(joint_stabilizer_is_trivial(tv.map(), &id, &g));
    assert!(!joint_stabilizer_is_trivial(tv.map(), tv.map(), &g));
}
