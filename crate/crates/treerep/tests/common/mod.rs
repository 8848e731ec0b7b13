#![allow(dead_code)]

use treerep::composition::TreeComposition;
use treerep::partition_tree::{canonical_composition, enumerate_par, PartitionTree};
use treerep::tree_core::{all_trees, parse_tree, spherically_homogeneous, BranchingType, RootedTree, Vertex};

pub fn tree(lit: &str) -> RootedTree {
    parse_tree(lit).unwrap()
}

pub fn b2() -> RootedTree {
    tree("((()())(()()))")
}

pub fn sph(parts: &[usize]) -> RootedTree {
    spherically_homogeneous(&BranchingType::new(parts.to_vec()).unwrap())
}

/// Every tree with at most `n` vertices.
pub fn trees_up_to(n: usize) -> Vec<RootedTree> {
    (1..=n).flat_map(all_trees).collect()
}

/// Trees of partitions of `t` with their attached compositions.
pub fn attached(t: &RootedTree) -> Vec<(PartitionTree, TreeComposition)> {
    enumerate_par(t)
        .unwrap()
        .into_iter()
        .map(|e| {
            let phi = canonical_composition(&e.partition_tree, t).unwrap();
            (e.partition_tree, phi)
        })
        .collect()
}

/// Every tree composition `t → p`, by trying every child assignment that
/// respects parents.
pub fn all_compositions(t: &RootedTree, p: &RootedTree) -> Vec<TreeComposition> {
    let order = t.preorder();
    let mut map = vec![usize::MAX; t.vertex_count()];
    map[0] = 0;
    let mut out = Vec::new();
    fill(t, p, &order, 1, &mut map, &mut out);
    out
}

fn fill(t: &RootedTree, p: &RootedTree, order: &[Vertex], i: usize, map: &mut Vec<Vertex>, out: &mut Vec<TreeComposition>) {
    if i == order.len() {
        if let Ok(phi) = TreeComposition::from_map(t, p, map.clone()) {
            out.push(phi);
        }
        return;
    }
    let v = order[i];
    let parent = t.parent(v).unwrap();
    for &x in p.children(map[parent]) {
        map[v] = x;
        fill(t, p, order, i + 1, map, out);
    }
    map[v] = usize::MAX;
}

/// Literal of a 1-level tree with `n` leaves.
pub fn star(n: usize) -> RootedTree {
    tree(&format!("({})", "()".repeat(n)))
}

/// Composition of the `n`-star onto the `k`-star sending leaf `i` to
/// `fibers[i]` (1-based leaves of the codomain).
pub fn set_composition(fibers: &[usize], k: usize) -> TreeComposition {
    let mut map = vec![0];
    map.extend_from_slice(fibers);
    TreeComposition::from_map(&star(fibers.len()), &star(k), map).unwrap()
}
