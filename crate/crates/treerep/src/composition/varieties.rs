//! Compositions attached to subtrees and to flags of subtrees of a
//! spherically homogeneous tree.

use crate::error::{Error, Result};
use crate::partition_tree::{partition_tree_of, PartitionTree};
use crate::tree_core::{spherically_homogeneous, BranchingType, RootedTree, Vertex};

use super::TreeComposition;

/// A spherically homogeneous tree `T`, the compositional tree `P` of a flag
/// type, the composition of the standard flag and its tree of partitions.
#[derive(Clone, Debug)]
pub struct VarietyComposition {
    pub tree: RootedTree,
    pub compositional_tree: RootedTree,
    /// Label `j` of each vertex of `P` (the root carries `l`).
    pub labels: Vec<usize>,
    pub composition: TreeComposition,
    pub partition_tree: PartitionTree,
}

/// Flags of subtrees of type `s`, where `s[k-1][j-1]` is the branching
/// number at level `k` of the `j`-th subtree.
///
/// A vertex of `P` with label `j` over level `k` has children labeled
/// `0..=j`; the child labeled `i < j` receives `s_k^i - s_k^{i+1}` vertices
/// of `T`, the child labeled `j` receives `s_k^j` (with `s_k^0 = r_k`).
/// Children that would receive nothing are left out. The composition sends
/// the children of a vertex of `T` to labels by position: the first `s_k^j`
/// children to `j`, the next ones to `j - 1`, and so on.
pub fn flag_variety_composition(r: &BranchingType, s: &[Vec<usize>]) -> Result<VarietyComposition> {
    let rows = r.parts();
    let h = rows.len();
    if s.len() != h {
        return Err(Error::InvalidSubtreeParameters(format!("{} rows given for height {h}", s.len())));
    }
    let l = s.first().map_or(0, Vec::len);
    if l == 0 {
        return Err(Error::InvalidSubtreeParameters("at least one subtree is required".into()));
    }
    // columns[k][i] = s_{k+1}^i with column 0 equal to r.
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(h);
    for (k, row) in s.iter().enumerate() {
        if row.len() != l {
            return Err(Error::InvalidSubtreeParameters(format!("row {} has {} entries, expected {l}", k + 1, row.len())));
        }
        let mut full = vec![rows[k]];
        full.extend(row);
        if full.windows(2).any(|w| w[1] > w[0]) || full[l] == 0 {
            return Err(Error::InvalidSubtreeParameters(format!(
                "row {} must satisfy 1 <= s^l <= ... <= s^1 <= r",
                k + 1
            )));
        }
        columns.push(full);
    }
    for j in 0..l {
        if columns.iter().all(|c| c[j + 1] == c[j]) {
            return Err(Error::InvalidSubtreeParameters(format!("step {} of the flag is not strict", j + 1)));
        }
    }
    let count = |k: usize, i: usize, j: usize| -> usize {
        let c = &columns[k];
        if i == j {
            c[j]
        } else {
            c[i] - c[i + 1]
        }
    };

    let mut parents: Vec<Option<Vertex>> = vec![None];
    let mut labels: Vec<usize> = vec![l];
    let mut levels: Vec<usize> = vec![0];
    let mut stack = vec![0];
    while let Some(x) = stack.pop() {
        let k = levels[x];
        if k == h {
            continue;
        }
        let j = labels[x];
        let mut created = Vec::new();
        for i in 0..=j {
            if count(k, i, j) > 0 {
                let y = parents.len();
                parents.push(Some(x));
                labels.push(i);
                levels.push(k + 1);
                created.push(y);
            }
        }
        stack.extend(created.into_iter().rev());
    }
    let p = RootedTree::from_parents(&parents)?;

    let t = spherically_homogeneous(r);
    let mut map = vec![0; t.vertex_count()];
    let mut stack = vec![0];
    while let Some(u) = stack.pop() {
        let x = map[u];
        let k = t.level(u);
        if k == h {
            continue;
        }
        let j = labels[x];
        for (idx, &c) in t.children(u).iter().enumerate() {
            let target = (0..=j).rev().find(|&i| idx < columns[k][i]).expect("position below r_k");
            map[c] = *p
                .children(x)
                .iter()
                .find(|&&y| labels[y] == target)
                .expect("child label receives vertices");
            stack.push(c);
        }
    }
    let composition = TreeComposition::from_map(&t, &p, map)?;
    let partition_tree = partition_tree_of(&composition);
    Ok(VarietyComposition {
        tree: t,
        compositional_tree: p,
        labels,
        composition,
        partition_tree,
    })
}

/// Subtrees of branching type `s`: the flag case with a single subtree.
/// Label `1` marks the chain `b_0, b_1, ...` and label `0` the paths `a_k`.
pub fn subtree_variety_composition(r: &BranchingType, s: &BranchingType) -> Result<VarietyComposition> {
    if s.height() != r.height() {
        return Err(Error::InvalidSubtreeParameters("s and r have different heights".into()));
    }
    let rows: Vec<Vec<usize>> = s.parts().iter().map(|&x| vec![x]).collect();
    flag_variety_composition(r, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bt(parts: &[usize]) -> BranchingType {
        BranchingType::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn set_flag_of_four_points() {
        let v = flag_variety_composition(&bt(&[4]), &[vec![3, 1]]).unwrap();
        assert_eq!(v.compositional_tree.vertex_count(), 4);
        assert_eq!(v.partition_tree.canonical_form(), "[2.1.1[]]");
    }

    #[test]
    fn subtree_shape() {
        let v = subtree_variety_composition(&bt(&[3, 3, 2]), &bt(&[2, 2, 1])).unwrap();
        // b_0..b_3 plus paths of lengths 3, 2, 1 below a_1, a_2, a_3.
        assert_eq!(v.compositional_tree.vertex_count(), 4 + 3 + 2 + 1);
        assert_eq!(
            v.partition_tree.canonical_form(),
            "[1[3[2[]]],2[1[2[]],2[1.1[]]]]"
        );
    }

    #[test]
    fn omitted_branch() {
        let v = subtree_variety_composition(&bt(&[2, 2]), &bt(&[1, 2])).unwrap();
        assert_eq!(v.compositional_tree.vertex_count(), 5);
    }

    #[test]
    fn invalid_parameters() {
        assert!(subtree_variety_composition(&bt(&[2, 2]), &bt(&[2, 2])).is_err());
        assert!(flag_variety_composition(&bt(&[3]), &[vec![1, 2]]).is_err());
        assert!(flag_variety_composition(&bt(&[3]), &[vec![2, 2]]).is_err());
    }
}
