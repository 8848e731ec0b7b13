//! Dimensions: standard Young tableaux, stabilizer orders of compositions,
//! permutation module dimensions and the dimensions of the irreducible
//! representations indexed by `Par(T)`.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::{One, Pow};

use crate::composition::TreeComposition;
use crate::error::{Error, Result};
use crate::partition_tree::{canonical_composition, enumerate_par_with_cap, is_in_par, realized_codes, Partition, PartitionTree};
use crate::tree_core::{aut_order, factorial, RootedTree, Vertex};

/// Number of standard Young tableaux of shape `λ`, by the hook length formula.
pub fn hook_dimension(lambda: &Partition) -> BigUint {
    let conj = lambda.conjugate();
    let mut hooks = BigUint::one();
    for (i, &row) in lambda.parts().iter().enumerate() {
        for j in 0..row {
            let arm = row - j - 1;
            let leg = conj.parts()[j] - i - 1;
            hooks *= BigUint::from(arm + leg + 1);
        }
    }
    factorial(lambda.weight()) / hooks
}

/// `n! / ∏ k_i!`.
fn multinomial(parts: &[usize]) -> BigUint {
    let mut result = factorial(parts.iter().sum());
    for &k in parts {
        result /= factorial(k);
    }
    result
}

/// Order of the stabilizer `K_φ`: below every vertex `u`, for every child
/// `y` of `φ(u)` with `k` preimages among the children of `u`, a factor
/// `k!` times the stabilizer order of one of them to the power `k`.
pub fn stabilizer_order(phi: &TreeComposition) -> BigUint {
    stabilizer_below(phi, 0)
}

fn stabilizer_below(phi: &TreeComposition, u: Vertex) -> BigUint {
    let t = phi.domain();
    let mut groups: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    for &c in t.children(u) {
        groups.entry(phi.apply(c)).or_default().push(c);
    }
    let mut order = BigUint::one();
    for members in groups.values() {
        let k = members.len();
        order *= factorial(k);
        if !t.is_leaf(members[0]) {
            order *= stabilizer_below(phi, members[0]).pow(k);
        }
    }
    order
}

/// Dimension of the permutation module on the orbit of `φ`.
pub fn perm_module_dim(phi: &TreeComposition) -> BigUint {
    aut_order(phi.domain()) / stabilizer_order(phi)
}

/// Dimension of the irreducible representation indexed by `l`.
///
/// With the children of the root of `Q` split into the leaf `b_0` (label
/// `μ`) and, for each class `c` of isomorphic first-level subtrees of `T`,
/// the internal children `A_c` realized on it:
/// `f^μ · ∏_c [ (m_c; |λ^a|, a ∈ A_c) · ∏_{a ∈ A_c} f^{λ^a} · dim(Λ_a)^{|λ^a|} ]`.
pub fn irrep_dimension(l: &PartitionTree, t: &RootedTree) -> Result<BigUint> {
    if !is_in_par(l, t) {
        return Err(Error::NotRealizable);
    }
    let codes = realized_codes(l);
    Ok(dimension_below(l, &codes, 0))
}

fn dimension_below(l: &PartitionTree, codes: &[String], a: Vertex) -> BigUint {
    let q = l.tree();
    let mut dim = BigUint::one();
    let mut classes: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for &b in q.children(a) {
        let lambda = l.label(b).expect("non-root");
        dim *= hook_dimension(lambda);
        if !q.is_leaf(b) {
            dim *= dimension_below(l, codes, b).pow(lambda.weight());
            classes.entry(codes[b].as_str()).or_default().push(lambda.weight());
        }
    }
    for weights in classes.values() {
        dim *= multinomial(weights);
    }
    dim
}

/// One row of a dimension table.
#[derive(Clone, Debug)]
pub struct RepDimensionEntry {
    pub partition_tree: PartitionTree,
    pub dimension: BigUint,
    /// Dimension of the permutation module of the composition attached to
    /// the tree of partitions.
    pub perm_module_dim: BigUint,
}

/// Dimensions of all irreducible representations of `Aut(T)`, in decreasing
/// order of their trees of partitions. Fails unless the squares sum to the
/// group order.
pub fn dimension_table(t: &RootedTree, cap: u64) -> Result<Vec<RepDimensionEntry>> {
    let entries = enumerate_par_with_cap(t, cap)?
        .into_iter()
        .map(|e| {
            let phi = canonical_composition(&e.partition_tree, t)?;
            Ok(RepDimensionEntry {
                dimension: irrep_dimension(&e.partition_tree, t)?,
                perm_module_dim: perm_module_dim(&phi),
                partition_tree: e.partition_tree,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sum: BigUint = entries.iter().map(|e| &e.dimension * &e.dimension).sum();
    let order = aut_order(t);
    if sum != order {
        return Err(Error::Internal(format!("squares of dimensions sum to {sum}, group order is {order}")));
    }
    Ok(entries)
}

/// `Σ dim²` over `Par(T)`.
pub fn sum_of_squared_dimensions(t: &RootedTree, cap: u64) -> Result<BigUint> {
    let par = enumerate_par_with_cap(t, cap)?;
    let mut sum = BigUint::default();
    for e in par {
        let d = irrep_dimension(&e.partition_tree, t)?;
        sum += &d * &d;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition_tree::partition_tree_of;
    use crate::tree_core::{parse_tree, trivial_composition};

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn hooks() {
        assert_eq!(hook_dimension(&p(&[4])), BigUint::from(1u32));
        assert_eq!(hook_dimension(&p(&[1, 1, 1])), BigUint::from(1u32));
        assert_eq!(hook_dimension(&p(&[2, 1])), BigUint::from(2u32));
        assert_eq!(hook_dimension(&p(&[3, 2])), BigUint::from(5u32));
    }

    #[test]
    fn stabilizers() {
        let t = parse_tree("((()())(()()))").unwrap();
        let (_, tv) = trivial_composition(&t);
        let id = TreeComposition::identity(&t);
        assert_eq!(stabilizer_order(&tv), BigUint::from(8u32));
        assert_eq!(stabilizer_order(&id), BigUint::from(1u32));
        assert_eq!(perm_module_dim(&tv), BigUint::from(1u32));
        assert_eq!(perm_module_dim(&id), BigUint::from(8u32));
        let star = parse_tree("(()()())").unwrap();
        let hook = TreeComposition::from_map(&star, &parse_tree("(()())").unwrap(), vec![0, 1, 1, 2]).unwrap();
        assert_eq!(stabilizer_order(&hook), BigUint::from(2u32));
        assert_eq!(perm_module_dim(&hook), BigUint::from(3u32));
    }

    #[test]
    fn dimensions() {
        let t = parse_tree("((()())(()()))").unwrap();
        let (_, tv) = trivial_composition(&t);
        let id = TreeComposition::identity(&t);
        assert_eq!(irrep_dimension(&partition_tree_of(&tv), &t).unwrap(), BigUint::from(1u32));
        assert_eq!(irrep_dimension(&partition_tree_of(&id), &t).unwrap(), BigUint::from(1u32));
        let mut dims: Vec<u32> = dimension_table(&t, 1000)
            .unwrap()
            .iter()
            .map(|e| u32::try_from(&e.dimension).unwrap())
            .collect();
        dims.sort_unstable();
        assert_eq!(dims, vec![1, 1, 1, 1, 2]);
        let star = parse_tree("(()()())").unwrap();
        let dims: Vec<u32> = dimension_table(&star, 1000)
            .unwrap()
            .iter()
            .map(|e| u32::try_from(&e.dimension).unwrap())
            .collect();
        assert_eq!(dims, vec![1, 2, 1]);
    }

    #[test]
    fn not_realizable() {
        let t = parse_tree("(()()())").unwrap();
        let other = parse_tree("((()()))").unwrap();
        let (_, tv) = trivial_composition(&other);
        assert_eq!(irrep_dimension(&partition_tree_of(&tv), &t).unwrap_err(), Error::NotRealizable);
    }
}
