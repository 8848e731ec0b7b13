//! Automorphisms as vertex permutations, the orbit composition of an
//! automorphism, conjugacy through trees of partitions, automorphisms with a
//! prescribed orbit composition, and the sign character.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::composition::{lift, TreeComposition, VertexMap};
use crate::error::{Error, Result};
use crate::partition_tree::{canonical_composition, enumerate_par_with_cap, partition_tree_of, same_fibers, PartitionTree};
use crate::tree_core::{RootedTree, Vertex};

/// An automorphism of a rooted tree, stored as the image of every vertex.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Automorphism {
    tree: RootedTree,
    perm: Vec<Vertex>,
}

impl Automorphism {
    /// Validates bijectivity, the fixed root and preservation of parents.
    pub fn new(tree: &RootedTree, perm: Vec<Vertex>) -> Result<Self> {
        let n = tree.vertex_count();
        if perm.len() != n {
            return Err(Error::NotAnAutomorphism(format!("{} images for {n} vertices", perm.len())));
        }
        let mut seen = vec![false; n];
        for &w in &perm {
            if w >= n || std::mem::replace(&mut seen[w], true) {
                return Err(Error::NotAnAutomorphism("the map is not a bijection".into()));
            }
        }
        if perm[0] != 0 {
            return Err(Error::NotAnAutomorphism("the root must be fixed".into()));
        }
        if let Some(v) = tree.vertices().skip(1).find(|&v| tree.parent(perm[v]) != tree.parent(v).map(|p| perm[p])) {
            return Err(Error::NotAnAutomorphism(format!("vertex {v} and its parent are not mapped to adjacent vertices")));
        }
        Ok(Self { tree: tree.clone(), perm })
    }

    pub(crate) fn new_unchecked(tree: &RootedTree, perm: Vec<Vertex>) -> Self {
        Self { tree: tree.clone(), perm }
    }

    pub fn identity(tree: &RootedTree) -> Self {
        Self::new_unchecked(tree, tree.vertices().collect())
    }

    /// Reads cycle notation on vertex ids, e.g. `(1 2)(3 5)(4 6)`.
    pub fn from_cycles(tree: &RootedTree, text: &str) -> Result<Self> {
        let mut perm: Vec<Vertex> = tree.vertices().collect();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest
                .strip_prefix('(')
                .and_then(|r| r.split_once(')'))
                .ok_or_else(|| Error::Parse {
                    position: text.len() - rest.len(),
                    message: "expected a parenthesized cycle".into(),
                })?;
            let cycle = body
                .0
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<Vertex>().map_err(|_| Error::Parse {
                        position: text.len() - rest.len(),
                        message: format!("cannot read {s:?} as a vertex"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            for (i, &v) in cycle.iter().enumerate() {
                let w = cycle[(i + 1) % cycle.len()];
                if v >= perm.len() || w >= perm.len() {
                    return Err(Error::NotAnAutomorphism(format!("vertex {} out of range", v.max(w))));
                }
                perm[v] = w;
            }
            rest = body.1.trim_start();
        }
        Self::new(tree, perm)
    }

    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn perm(&self) -> &[Vertex] {
        &self.perm
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        self.perm[v]
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(v, &w)| v == w)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Self::new_unchecked(&self.tree, other.perm.iter().map(|&v| self.perm[v]).collect())
    }

    pub fn inverse(&self) -> Automorphism {
        let mut inv = vec![0; self.perm.len()];
        for (v, &w) in self.perm.iter().enumerate() {
            inv[w] = v;
        }
        Self::new_unchecked(&self.tree, inv)
    }

    pub fn pow(&self, mut e: usize) -> Automorphism {
        let mut result = Self::identity(&self.tree);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                result = result.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        result
    }

    /// `t ∘ self ∘ t⁻¹`.
    pub fn conjugate_by(&self, t: &Automorphism) -> Automorphism {
        t.compose(self).compose(&t.inverse())
    }

    /// Length of the orbit of `v`.
    pub fn orbit_length(&self, v: Vertex) -> usize {
        let mut len = 1;
        let mut w = self.perm[v];
        while w != v {
            w = self.perm[w];
            len += 1;
        }
        len
    }

    /// Cycle notation without fixed points; `()` for the identity.
    pub fn to_cycles(&self) -> String {
        let mut seen = vec![false; self.perm.len()];
        let mut out = String::new();
        for v in self.tree.vertices() {
            if seen[v] || self.perm[v] == v {
                continue;
            }
            let mut cycle = Vec::new();
            let mut w = v;
            while !seen[w] {
                seen[w] = true;
                cycle.push(w.to_string());
                w = self.perm[w];
            }
            out.push_str(&format!("({})", cycle.join(" ")));
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Automorphism({})", self.to_cycles())
    }
}

impl Serialize for Automorphism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.perm.serialize(s)
    }
}

/// Image array of an automorphism, as read from JSON before validation.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SerializedAutomorphism(pub Vec<Vertex>);

/// `g·φ = φ ∘ g⁻¹`.
pub fn act_on_composition(g: &Automorphism, phi: &TreeComposition) -> Result<TreeComposition> {
    if g.tree() != phi.domain() {
        return Err(Error::DomainMismatch);
    }
    let inv = g.inverse();
    let map = phi.domain().vertices().map(|v| phi.apply(inv.apply(v))).collect();
    TreeComposition::from_map(phi.domain(), phi.codomain(), map)
}

/// `[g^ℓ]_u` for a first-level internal `u` with orbit length `ℓ`, as an
/// automorphism of the subtree `T_u` (numbered as by [`RootedTree::subtree`]).
pub fn power_restriction(g: &Automorphism, u: Vertex) -> Result<(usize, Automorphism)> {
    let t = g.tree();
    if t.parent(u) != Some(0) || t.is_leaf(u) {
        return Err(Error::NotFirstLevelInternal(u));
    }
    let ell = g.orbit_length(u);
    let power = g.pow(ell);
    let (sub, new_to_old) = t.subtree(u);
    let mut old_to_new = vec![usize::MAX; t.vertex_count()];
    for (new, &old) in new_to_old.iter().enumerate() {
        old_to_new[old] = new;
    }
    let perm = new_to_old.iter().map(|&old| old_to_new[power.apply(old)]).collect();
    Ok((ell, Automorphism::new_unchecked(&sub, perm)))
}

/// The orbit composition `φ^g: T → P^g` sending every vertex to its
/// `g`-orbit. `P^g` is numbered in preorder.
pub fn orbit_tree(g: &Automorphism) -> (RootedTree, TreeComposition) {
    let t = g.tree();
    let n = t.vertex_count();
    let mut orbit = vec![usize::MAX; n];
    let mut parents: Vec<Option<Vertex>> = Vec::new();
    for v in t.preorder() {
        if orbit[v] != usize::MAX {
            continue;
        }
        let id = parents.len();
        parents.push(t.parent(v).map(|p| orbit[p]));
        let mut w = v;
        loop {
            orbit[w] = id;
            w = g.apply(w);
            if w == v {
                break;
            }
        }
    }
    let raw = RootedTree::from_parents(&parents).expect("orbits form a tree");
    let (p, old_to_new) = raw.relabel_preorder();
    let map = orbit.iter().map(|&o| old_to_new[o]).collect();
    let phi = TreeComposition::from_map(t, &p, map).expect("orbit map is a tree composition");
    (p, phi)
}

/// The conjugacy invariant of `g`: the tree of partitions of its orbit
/// composition.
pub fn class_invariant(g: &Automorphism) -> PartitionTree {
    partition_tree_of(&orbit_tree(g).1)
}

pub fn are_conjugate(g: &Automorphism, h: &Automorphism) -> Result<bool> {
    if g.tree() != h.tree() {
        return Err(Error::DomainMismatch);
    }
    Ok(class_invariant(g) == class_invariant(h))
}

/// An automorphism whose orbits are exactly the fibers of `psi`.
///
/// Below every vertex the children over one vertex of `P` are arranged in a
/// single cycle in id order; going once around the cycle gives an
/// automorphism of the first subtree built the same way.
pub fn automorphism_from_composition(psi: &TreeComposition) -> Result<Automorphism> {
    let t = psi.domain();
    let mut perm = vec![usize::MAX; t.vertex_count()];
    cycle_below(psi, 0, &mut perm)?;
    let g = Automorphism::new(t, perm)?;
    if !same_fibers(&orbit_tree(&g).1, psi) {
        return Err(Error::Internal("constructed automorphism has the wrong orbits".into()));
    }
    Ok(g)
}

/// Fills `perm` on `T_u` with an automorphism of `T_u` whose orbits are the
/// fibers of `psi` restricted to `T_u`.
fn cycle_below(psi: &TreeComposition, u: Vertex, perm: &mut [Vertex]) -> Result<()> {
    let t = psi.domain();
    perm[u] = u;
    let p = psi.codomain();
    for &y in p.children(psi.apply(u)) {
        let group: Vec<Vertex> = t.children(u).iter().copied().filter(|&c| psi.apply(c) == y).collect();
        let first = group[0];
        cycle_below(psi, first, perm)?;
        let taus: Vec<VertexMap> = group
            .iter()
            .map(|&c| lift(psi, first, psi, c, &|z| Some(z)))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Internal("sibling fibers are not strictly equivalent".into()))?;
        let inner: Vec<(Vertex, Vertex)> = t.descendants(first).into_iter().map(|v| (v, perm[v])).collect();
        let m = group.len();
        for i in 0..m - 1 {
            for (&v, &w) in &taus[i] {
                perm[w] = taus[i + 1][&v];
            }
        }
        for (v, hv) in inner {
            perm[taus[m - 1][&v]] = hv;
        }
    }
    Ok(())
}

/// A conjugacy class: its tree of partitions and a representative.
#[derive(Clone, Debug)]
pub struct ConjugacyClass {
    pub partition_tree: PartitionTree,
    pub representative: Automorphism,
}

/// One class per element of `Par(T)`, in decreasing order of the trees of
/// partitions. Representatives realize the composition attached to each tree.
pub fn conjugacy_classes(t: &RootedTree, cap: u64) -> Result<Vec<ConjugacyClass>> {
    enumerate_par_with_cap(t, cap)?
        .into_iter()
        .map(|entry| {
            let phi = canonical_composition(&entry.partition_tree, t)?;
            Ok(ConjugacyClass {
                representative: automorphism_from_composition(&phi)?,
                partition_tree: entry.partition_tree,
            })
        })
        .collect()
}

/// The sign character. Subtrees over one orbit are identified through
/// canonical coordinates (children ordered by subtree code, then id); the
/// sign is the product, over internal vertices `v`, of the signs of the
/// permutations `g` induces from the children of `v` to those of `g(v)` in
/// these coordinates.
pub fn sign(g: &Automorphism) -> i8 {
    let t = g.tree();
    let mut position = vec![0usize; t.vertex_count()];
    for v in t.vertices() {
        for (i, &c) in t.canonical_children(v).iter().enumerate() {
            position[c] = i;
        }
    }
    let mut parity = false;
    for v in t.vertices() {
        let pi: Vec<usize> = t.canonical_children(v).iter().map(|&c| position[g.apply(c)]).collect();
        parity ^= odd_permutation(&pi);
    }
    if parity {
        -1
    } else {
        1
    }
}

fn odd_permutation(pi: &[usize]) -> bool {
    let mut seen = vec![false; pi.len()];
    let mut transpositions = 0;
    for start in 0..pi.len() {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = pi[i];
            len += 1;
        }
        if len > 0 {
            transpositions += len - 1;
        }
    }
    transpositions % 2 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composition::equivalent;
    use crate::tree_core::{parse_tree, trivial_composition};

    fn b2() -> RootedTree {
        parse_tree("((()())(()()))").unwrap()
    }

    #[test]
    fn validation() {
        let t = b2();
        assert!(Automorphism::new(&t, vec![0, 4, 5, 6, 1, 2, 3]).is_ok());
        assert!(Automorphism::new(&t, vec![0, 2, 1, 3, 4, 5, 6]).is_err());
        assert!(Automorphism::new(&t, vec![1, 0, 2, 3, 4, 5, 6]).is_err());
        assert!(Automorphism::from_cycles(&t, "(1 4)(2 5)(3 6)").is_ok());
        assert!(Automorphism::from_cycles(&t, "(1 4").is_err());
    }

    #[test]
    fn group_operations() {
        let t = b2();
        let g = Automorphism::from_cycles(&t, "(1 4)(2 5 3 6)").unwrap();
        assert_eq!(g.pow(4), Automorphism::identity(&t));
        assert_eq!(g.compose(&g.inverse()), Automorphism::identity(&t));
        assert_eq!(g.to_cycles(), "(1 4)(2 5 3 6)");
    }

    #[test]
    fn orbit_trees() {
        let t = b2();
        let id = Automorphism::identity(&t);
        assert_eq!(orbit_tree(&id).0.vertex_count(), 7);
        let transitive = Automorphism::from_cycles(&t, "(1 4)(2 5 3 6)").unwrap();
        let (p, phi) = orbit_tree(&transitive);
        assert_eq!(p.canonical_code(), "((()))");
        assert!(same_fibers(&phi, &trivial_composition(&t).1));
        let star = parse_tree("(()()())").unwrap();
        let swap = Automorphism::from_cycles(&star, "(1 2)").unwrap();
        let (_, phi) = orbit_tree(&swap);
        let mut types: Vec<usize> = phi.codomain().children(0).iter().map(|&x| phi.type_value(x)).collect();
        types.sort_unstable();
        assert_eq!(types, vec![1, 2]);
    }

    #[test]
    fn power_restrictions() {
        let t = b2();
        let swap = Automorphism::from_cycles(&t, "(1 4)(2 5)(3 6)").unwrap();
        let (ell, r) = power_restriction(&swap, 1).unwrap();
        assert_eq!(ell, 2);
        assert!(r.is_identity());
        let twisted = Automorphism::from_cycles(&t, "(1 4)(2 5 3 6)").unwrap();
        let (_, r) = power_restriction(&twisted, 1).unwrap();
        assert_eq!(r.perm(), &[0, 2, 1]);
        assert_eq!(power_restriction(&swap, 2).unwrap_err(), Error::NotFirstLevelInternal(2));
    }

    #[test]
    fn conjugacy_of_swaps() {
        let t = b2();
        let plain = Automorphism::from_cycles(&t, "(1 4)(2 5)(3 6)").unwrap();
        let twisted = Automorphism::from_cycles(&t, "(1 4)(2 5 3 6)").unwrap();
        assert!(!are_conjugate(&plain, &twisted).unwrap());
        assert!(are_conjugate(&twisted, &twisted.inverse()).unwrap());
        let other = Automorphism::from_cycles(&t, "(1 4)(2 6)(3 5)").unwrap();
        assert!(are_conjugate(&plain, &other).unwrap());
    }

    #[test]
    fn prescribed_orbits() {
        let t = b2();
        let (_, tv) = trivial_composition(&t);
        let g = automorphism_from_composition(&tv).unwrap();
        assert_eq!(g.orbit_length(2), 4);
        let id = TreeComposition::identity(&t);
        assert!(automorphism_from_composition(&id).unwrap().is_identity());
        assert_eq!(conjugacy_classes(&t, 1000).unwrap().len(), 5);
    }

    #[test]
    fn action() {
        let t = b2();
        let (_, tv) = trivial_composition(&t);
        let g = Automorphism::from_cycles(&t, "(1 4)(2 5 3 6)").unwrap();
        let moved = act_on_composition(&g, &tv).unwrap();
        assert_eq!(moved.map(), tv.map());
        let id = TreeComposition::identity(&t);
        let moved = act_on_composition(&g, &id).unwrap();
        assert_eq!(moved.map(), g.inverse().perm());
        assert!(equivalent(&moved, &id).is_some());
    }

    #[test]
    fn signs() {
        let t = b2();
        assert_eq!(sign(&Automorphism::identity(&t)), 1);
        assert_eq!(sign(&Automorphism::from_cycles(&t, "(2 3)").unwrap()), -1);
        assert_eq!(sign(&Automorphism::from_cycles(&t, "(1 4)(2 5)(3 6)").unwrap()), -1);
        assert_eq!(sign(&Automorphism::from_cycles(&t, "(1 4)(2 5 3 6)").unwrap()), 1);
    }
}
