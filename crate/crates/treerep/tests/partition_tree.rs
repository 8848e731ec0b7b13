mod common;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use common::{all_compositions, attached, b2, sph, tree, trees_up_to};
use num_bigint::BigUint;
use proptest::prelude::*;
use treerep::composition::{flag_variety_composition, quotient, subtree_variety_composition, TreeComposition};
use treerep::oracle::{act_map, enumerate_aut};
use treerep::partition_tree::{
    build_composition, canonical_compositional_tree, count_par, enumerate_par, is_in_par, is_valid_partition_tree,
    partition_count, partition_tree_of, partitions_of, pt_compare, pt_isomorphic, pt_transpose, realize, realize_on,
    same_fibers, Partition, PartitionTree, PtNode,
};
use treerep::tree_core::{is_isomorphic, parse_tree, trivial_composition, BranchingType};

fn p(parts: &[usize]) -> Partition {
    Partition::new(parts.to_vec()).unwrap()
}

fn leaf(parts: &[usize]) -> PtNode {
    PtNode {
        part: Some(p(parts)),
        children: vec![],
    }
}

fn inner(parts: &[usize], children: Vec<PtNode>) -> PtNode {
    PtNode {
        part: Some(p(parts)),
        children,
    }
}

fn pt(children: Vec<PtNode>) -> PartitionTree {
    PartitionTree::from_node(&PtNode { part: None, children }).unwrap()
}

/// Path labeled by `parts` from the top.
fn labeled_path(parts: &[Vec<usize>]) -> PartitionTree {
    let mut node = leaf(parts.last().unwrap());
    for part in parts.iter().rev().skip(1) {
        node = inner(part, vec![node]);
    }
    pt(vec![node])
}

/// Number of partitions of `n` by the standard recurrence on the largest
/// part.
fn partition_number(n: usize) -> u64 {
    let mut table = vec![0u64; n + 1];
    table[0] = 1;
    for part in 1..=n {
        for m in part..=n {
            table[m] += table[m - part];
        }
    }
    table[n]
}

#[test]
fn partitions_are_counted_and_ordered() {
    for n in 1..=12 {
        let all = partitions_of(n);
        assert_eq!(all.len() as u64, partition_number(n));
        assert_eq!(partition_count(n), BigUint::from(partition_number(n)));
        assert!(all.windows(2).all(|w| w[0] > w[1]));
        assert!(all.iter().all(|x| x.weight() == n));
    }
}

#[test]
fn tv_and_id_label_paths() {
    for r in [vec![2, 2], vec![3], vec![2, 3, 2], vec![4, 1]] {
        let t = sph(&r);
        let (_, tv) = trivial_composition(&t);
        let by_rows: Vec<Vec<usize>> = r.iter().map(|&x| vec![x]).collect();
        assert_eq!(partition_tree_of(&tv), labeled_path(&by_rows));
        let ones: Vec<Vec<usize>> = r.iter().map(|&x| vec![1; x]).collect();
        assert_eq!(partition_tree_of(&TreeComposition::identity(&t)), labeled_path(&ones));
        assert_eq!(pt_transpose(&labeled_path(&by_rows)), labeled_path(&ones));
    }
}

#[test]
fn subtree_variety_is_realized_on_its_tree() {
    let r = BranchingType::new(vec![3, 3, 2]).unwrap();
    let s = BranchingType::new(vec![2, 2, 1]).unwrap();
    let v = subtree_variety_composition(&r, &s).unwrap();
    let (t, delta) = realize(&v.partition_tree);
    assert!(is_isomorphic(&t, &sph(&[3, 3, 2])));
    // Every vertex over a has exactly |λ^b| children over each child b of a.
    let q = v.partition_tree.tree();
    for u in t.vertices() {
        for &b in q.children(delta.apply(u)) {
            let count = t.children(u).iter().filter(|&&c| delta.apply(c) == b).count();
            assert_eq!(count, v.partition_tree.label(b).unwrap().weight());
        }
    }
}

#[test]
fn validity_examples() {
    let (_, tv) = trivial_composition(&b2());
    let l = partition_tree_of(&tv);
    assert!(is_valid_partition_tree(l.tree(), l.labels()));
    let star = tree("(()())");
    assert!(!is_valid_partition_tree(&star, &[None, Some(p(&[2])), Some(p(&[1]))]));
    let twins = tree("((())(()))");
    let labels = vec![None, Some(p(&[1])), Some(p(&[2])), Some(p(&[1])), Some(p(&[2]))];
    assert!(!is_valid_partition_tree(&twins, &labels));
    let labels = vec![None, Some(p(&[1])), Some(p(&[2])), Some(p(&[1])), Some(p(&[1, 1]))];
    assert!(is_valid_partition_tree(&twins, &labels));
}

#[test]
fn isomorphism_and_order_examples() {
    let a = pt(vec![inner(&[1], vec![leaf(&[2])]), inner(&[1], vec![leaf(&[1, 1])])]);
    let b = pt(vec![inner(&[1], vec![leaf(&[1, 1])]), inner(&[1], vec![leaf(&[2])])]);
    assert!(pt_isomorphic(&a, &b));
    let l_tv = labeled_path(&[vec![2], vec![2]]);
    let l_id = labeled_path(&[vec![1, 1], vec![1, 1]]);
    assert!(!pt_isomorphic(&l_tv, &l_id));
    assert_eq!(pt_compare(&pt(vec![leaf(&[2])]), &pt(vec![leaf(&[1, 1])])), Ordering::Greater);
    assert_eq!(pt_compare(&pt(vec![leaf(&[2, 1])]), &pt(vec![leaf(&[2])])), Ordering::Greater);
    for t in trees_up_to(7) {
        for (a, _) in attached(&t) {
            for u in trees_up_to(7) {
                for (b, _) in attached(&u) {
                    if a.height() > b.height() {
                        assert_eq!(pt_compare(&a, &b), Ordering::Greater);
                    }
                }
            }
        }
    }
}

#[test]
fn transpose_examples() {
    let hook = pt(vec![leaf(&[2, 1])]);
    assert_eq!(pt_transpose(&hook), hook);
    for (l, _) in attached(&b2()) {
        assert_eq!(pt_transpose(&pt_transpose(&l)), l);
        assert!(is_in_par(&pt_transpose(&l), &b2()));
    }
    for t in trees_up_to(8) {
        for (l, _) in attached(&t) {
            assert!(is_in_par(&pt_transpose(&l), &t));
        }
    }
}

#[test]
fn realize_examples() {
    let (t, delta) = realize(&labeled_path(&[vec![2], vec![2]]));
    assert_eq!(t, b2());
    assert!(same_fibers(&delta, &trivial_composition(&b2()).1));
    let (t, _) = realize(&pt(vec![leaf(&[3])]));
    assert_eq!(t, sph(&[3]));
}

#[test]
fn realization_round_trip() {
    for t in trees_up_to(8) {
        for (l, phi) in attached(&t) {
            let (s, delta) = realize(&partition_tree_of(&phi));
            assert!(is_isomorphic(&s, &t));
            let on_t = realize_on(&l, &t).unwrap();
            // Two realizations on the same tree differ by an automorphism:
            // the composition through the quotient has the same tree of
            // partitions.
            assert_eq!(partition_tree_of(&on_t), partition_tree_of(&delta));
            let q = quotient(&phi);
            let through = phi.then(&q.alpha).unwrap();
            assert_eq!(partition_tree_of(&through), partition_tree_of(&on_t));
        }
    }
}

#[test]
fn build_composition_examples() {
    let t = b2();
    let (c, tv) = trivial_composition(&t);
    let l_tv = partition_tree_of(&tv);
    let (_, alpha) = canonical_compositional_tree(&l_tv);
    assert_eq!(alpha.codomain().vertex_count(), c.vertex_count());
    let phi = build_composition(&l_tv, &t, alpha.domain(), &alpha).unwrap();
    assert!(same_fibers(&phi, &tv));

    let id = TreeComposition::identity(&t);
    let q = quotient(&id);
    let l_id = partition_tree_of(&id);
    // Relabel Λ_id onto the vertex ids of the quotient tree.
    let labels = q.tree.vertices().map(|a| (a > 0).then(|| p(&[1, 1]))).collect();
    let l_on_q = PartitionTree::new(q.tree.clone(), labels).unwrap();
    assert_eq!(l_on_q, l_id);
    let phi = build_composition(&l_on_q, &t, &t, &q.alpha).unwrap();
    let mut image: Vec<usize> = phi.map().to_vec();
    image.sort_unstable();
    assert_eq!(image, t.vertices().collect::<Vec<_>>());
}

#[test]
fn build_composition_for_a_flag() {
    let r = BranchingType::new(vec![3, 3, 3]).unwrap();
    let v = flag_variety_composition(&r, &[vec![2, 1], vec![2, 1], vec![2, 1]]).unwrap();
    let q = quotient(&v.composition);
    let l = partition_tree_of(&v.composition);
    let phi = build_composition(&l, &v.tree, &v.compositional_tree, &q.alpha).unwrap();
    assert_eq!(partition_tree_of(&phi), v.partition_tree);
}

#[test]
fn enumeration_examples() {
    let b1 = sph(&[2]);
    let forms: Vec<String> = enumerate_par(&b1).unwrap().iter().map(|e| e.partition_tree.canonical_form().to_owned()).collect();
    assert_eq!(forms, vec!["[2[]]", "[1.1[]]"]);
    assert_eq!(enumerate_par(&b2()).unwrap().len(), 5);
    for h in 1..=5 {
        assert_eq!(enumerate_par(&sph(&vec![1; h])).unwrap().len(), 1);
    }
    let (_, tv) = trivial_composition(&b2());
    assert!(is_in_par(&partition_tree_of(&tv), &b2()));
    assert!(!is_in_par(&partition_tree_of(&tv), &sph(&[3])));
}

#[test]
fn binary_counts_follow_the_recursion() {
    let mut p = 1u64;
    for h in 1..=4 {
        p = 2 * p + p * (p - 1) / 2;
        let t = sph(&vec![2; h]);
        assert_eq!(enumerate_par(&t).unwrap().len() as u64, p);
        assert_eq!(count_par(&t), BigUint::from(p));
    }
    // Beyond enumeration, the counting recursion still applies.
    for h in 5..=7 {
        p = 2 * p + p * (p - 1) / 2;
        assert_eq!(count_par(&sph(&vec![2; h])), BigUint::from(p));
    }
}

#[test]
fn enumeration_is_consistent() {
    for t in trees_up_to(9) {
        let par = enumerate_par(&t).unwrap();
        assert_eq!(BigUint::from(par.len()), count_par(&t));
        assert!(par.windows(2).all(|w| pt_compare(&w[0].partition_tree, &w[1].partition_tree) == Ordering::Greater));
        for e in &par {
            assert!(is_in_par(&e.partition_tree, &t));
            let q = e.partition_tree.tree();
            assert_eq!(e.realization.codomain(), q);
            for u in t.vertices() {
                for &b in q.children(e.realization.apply(u)) {
                    let count = t.children(u).iter().filter(|&&c| e.realization.apply(c) == b).count();
                    assert_eq!(count, e.partition_tree.label(b).unwrap().weight());
                }
            }
            let back = PartitionTree::from_json(&e.partition_tree.to_json()).unwrap();
            assert_eq!(back, e.partition_tree);
        }
    }
}

#[test]
fn orbits_are_classified_by_partition_trees() {
    for t in trees_up_to(7) {
        let g = enumerate_aut(&t, 10_000).unwrap();
        let codomains: BTreeSet<String> = attached(&t).iter().map(|(_, phi)| phi.codomain().to_literal()).collect();
        for lit in codomains {
            let p_tree = parse_tree(&lit).unwrap();
            let gp = enumerate_aut(&p_tree, 10_000).unwrap();
            let mut groups: BTreeMap<String, BTreeSet<Vec<usize>>> = BTreeMap::new();
            for phi in all_compositions(&t, &p_tree) {
                let l = partition_tree_of(&phi);
                assert!(is_in_par(&l, &t));
                groups.entry(l.canonical_form().to_owned()).or_default().insert(phi.map().to_vec());
            }
            for members in groups.values() {
                let first = members.iter().next().unwrap();
                let orbit: BTreeSet<Vec<usize>> = g
                    .elements()
                    .iter()
                    .flat_map(|h| {
                        let moved = act_map(h, first);
                        gp.elements().iter().map(move |b| moved.iter().map(|&x| b.apply(x)).collect())
                    })
                    .collect();
                assert_eq!(&orbit, members, "{} -> {lit}", t.to_literal());
            }
        }
    }
}

fn arb_partition() -> impl Strategy<Value = Partition> {
    prop::collection::vec(1usize..7, 1..7).prop_map(|parts| Partition::from_parts(parts).unwrap())
}

fn pool() -> Vec<PartitionTree> {
    trees_up_to(7).iter().flat_map(|t| attached(t).into_iter().map(|(l, _)| l)).collect()
}

proptest! {
    #[test]
    fn conjugation_is_an_involution(x in arb_partition()) {
        let c = x.conjugate();
        prop_assert_eq!(c.weight(), x.weight());
        prop_assert_eq!(c.length(), x.parts()[0]);
        prop_assert_eq!(c.conjugate(), x);
    }

    #[test]
    fn partition_text_round_trip(x in arb_partition()) {
        prop_assert_eq!(x.to_string().parse::<Partition>().unwrap(), x.clone());
        let json = serde_json::to_string(&x).unwrap();
        prop_assert_eq!(serde_json::from_str::<Partition>(&json).unwrap(), x);
    }

    #[test]
    fn order_is_antisymmetric(i in any::<prop::sample::Index>(), j in any::<prop::sample::Index>()) {
        let all = pool();
        let (a, b) = (i.get(&all), j.get(&all));
        prop_assert_eq!(pt_compare(a, b), pt_compare(b, a).reverse());
        prop_assert_eq!(pt_compare(a, b) == Ordering::Equal, a == b);
        prop_assert_eq!(pt_compare(&pt_transpose(a), &pt_transpose(a)), Ordering::Equal);
    }
}
