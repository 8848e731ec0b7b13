//! Coarsest common refinements of pairs of compositions, triviality, 0-1
//! intersection, transposes of compositions, comparison of compositions
//! through their trees of partitions, and refinement class counts.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::composition::{is_quotient_of, quotient, SerializedMorphism, TreeComposition, TreeMorphism, VertexMap};
use crate::error::{Error, Result};
use crate::oracle::{act_map, composition_orbit, enumerate_aut, stabilizer, GroupTable};
use crate::partition_tree::{canonical_compositional_tree, partition_tree_of, pt_compare, pt_transpose, PartitionTree};
use crate::tree_core::{RootedTree, Vertex};

/// A common refinement `ρ: T → R` of `(φ, ψ)` with `ϑ: R → P` and
/// `τ: R → M` such that `ϑ∘ρ = φ` and `τ∘ρ = ψ`. Merging siblings can leave
/// `ϑ` and `τ` irregular, so they are plain morphisms.
#[derive(Clone, Debug)]
pub struct RefinementDiagram {
    pub rho: TreeComposition,
    pub theta: TreeMorphism,
    pub tau: TreeMorphism,
}

/// JSON form of a [`RefinementDiagram`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SerializedDiagram {
    pub rho: SerializedMorphism,
    pub theta: SerializedMorphism,
    pub tau: SerializedMorphism,
}

impl RefinementDiagram {
    pub fn refining_tree(&self) -> &RootedTree {
        self.rho.codomain()
    }

    pub fn to_serialized(&self) -> SerializedDiagram {
        SerializedDiagram {
            rho: self.rho.morphism().to_serialized(),
            theta: self.theta.to_serialized(),
            tau: self.tau.to_serialized(),
        }
    }

    /// Checks `ϑ∘ρ = φ` and `τ∘ρ = ψ` pointwise.
    pub fn commutes_with(&self, phi: &TreeComposition, psi: &TreeComposition) -> bool {
        phi.domain()
            .vertices()
            .all(|v| self.theta.apply(self.rho.apply(v)) == phi.apply(v) && self.tau.apply(self.rho.apply(v)) == psi.apply(v))
    }

    /// For another common refinement `δ: T → U` (with `U` mapping to `P` and
    /// `M` compatibly), the composition `γ: U → R` with `γ∘δ = ρ`.
    pub fn factor(&self, delta: &TreeComposition) -> Option<TreeComposition> {
        let mut gamma = vec![usize::MAX; delta.codomain().vertex_count()];
        for v in delta.domain().vertices() {
            let c = delta.apply(v);
            let a = self.rho.apply(v);
            if gamma[c] == usize::MAX {
                gamma[c] = a;
            } else if gamma[c] != a {
                return None;
            }
        }
        TreeComposition::from_map(delta.codomain(), self.rho.codomain(), gamma).ok()
    }
}

/// Code of the labeled subtree `T_v` where every vertex carries
/// `(φ(w), ψ(w))`. Two sibling couples are strictly equivalent exactly when
/// their codes agree.
fn pair_codes(phi: &TreeComposition, psi: &TreeComposition) -> Vec<String> {
    let t = phi.domain();
    let mut codes = vec![String::new(); t.vertex_count()];
    let mut order = t.preorder();
    order.reverse();
    for v in order {
        let mut children: Vec<&str> = t.children(v).iter().map(|&c| codes[c].as_str()).collect();
        children.sort_unstable();
        codes[v] = format!("({},{}{})", phi.apply(v), psi.apply(v), children.concat());
    }
    codes
}

/// Isomorphism `T_v → T_r` preserving pair labels, matching children sorted
/// by pair code then id.
fn pair_isomorphism(t: &RootedTree, codes: &[String], v: Vertex, r: Vertex) -> VertexMap {
    let sorted = |w: Vertex| {
        let mut ch = t.children(w).to_vec();
        ch.sort_by(|&a, &b| codes[a].cmp(&codes[b]).then(a.cmp(&b)));
        ch
    };
    let mut map = VertexMap::new();
    let mut stack = vec![(v, r)];
    while let Some((a, b)) = stack.pop() {
        map.insert(a, b);
        stack.extend(sorted(a).into_iter().zip(sorted(b)));
    }
    map
}

/// The coarsest common refinement. Children of a vertex are merged exactly
/// when their couples of restrictions are strictly equivalent; the subtree
/// of the lowest-id member is refined recursively and the other members are
/// carried over through the label-preserving isomorphism.
pub fn coarsest_common_refinement(phi: &TreeComposition, psi: &TreeComposition) -> Result<RefinementDiagram> {
    if phi.domain() != psi.domain() {
        return Err(Error::DomainMismatch);
    }
    let t = phi.domain();
    let mut b = RefinementBuilder {
        t,
        codes: pair_codes(phi, psi),
        phi,
        psi,
        rho: vec![usize::MAX; t.vertex_count()],
        r_parents: vec![None],
        theta: vec![phi.apply(0)],
        tau: vec![psi.apply(0)],
    };
    b.rho[0] = 0;
    b.refine(0);
    let r = RootedTree::from_parents(&b.r_parents)?;
    let diagram = RefinementDiagram {
        rho: TreeComposition::from_map(t, &r, b.rho)?,
        theta: TreeMorphism::new(r.clone(), phi.codomain().clone(), b.theta)?,
        tau: TreeMorphism::new(r, psi.codomain().clone(), b.tau)?,
    };
    if !diagram.commutes_with(phi, psi) {
        return Err(Error::Internal("refinement diagram does not commute".into()));
    }
    Ok(diagram)
}

struct RefinementBuilder<'a> {
    t: &'a RootedTree,
    codes: Vec<String>,
    phi: &'a TreeComposition,
    psi: &'a TreeComposition,
    rho: Vec<Vertex>,
    r_parents: Vec<Option<Vertex>>,
    theta: Vec<Vertex>,
    tau: Vec<Vertex>,
}

impl RefinementBuilder<'_> {
    fn refine(&mut self, u: Vertex) {
        let mut classes: Vec<Vec<Vertex>> = Vec::new();
        for &c in self.t.children(u) {
            match classes.iter_mut().find(|k| self.codes[k[0]] == self.codes[c]) {
                Some(k) => k.push(c),
                None => classes.push(vec![c]),
            }
        }
        for class in classes {
            let b = self.r_parents.len();
            self.r_parents.push(Some(self.rho[u]));
            self.theta.push(self.phi.apply(class[0]));
            self.tau.push(self.psi.apply(class[0]));
            self.rho[class[0]] = b;
            self.refine(class[0]);
            for &v in &class[1..] {
                for (w, z) in pair_isomorphism(self.t, &self.codes, v, class[0]) {
                    self.rho[w] = self.rho[z];
                }
            }
        }
    }
}

/// True when `ρ` is an isomorphism.
pub fn is_trivial_refinement(d: &RefinementDiagram) -> bool {
    d.rho.domain().vertex_count() == d.rho.codomain().vertex_count()
}

/// True when sibling couples with equal images are never strictly
/// equivalent, read directly off the pair codes.
pub fn has_trivial_refinement(phi: &TreeComposition, psi: &TreeComposition) -> Result<bool> {
    if phi.domain() != psi.domain() {
        return Err(Error::DomainMismatch);
    }
    let t = phi.domain();
    let codes = pair_codes(phi, psi);
    Ok(t.vertices().all(|v| {
        let set: BTreeSet<&str> = t.children(v).iter().map(|&c| codes[c].as_str()).collect();
        set.len() == t.children(v).len()
    }))
}

/// True when `|φ⁻¹(x) ∩ ψ⁻¹(y)| ≤ 1` for all children `x` of `φ(v)` and `y`
/// of `ψ(v)`, over all internal `v`. Every non-root vertex `w` lies in such
/// an intersection (with `v` its parent), so the condition says that the
/// pairs `(φ(w), ψ(w))` of non-root vertices are pairwise distinct.
pub fn has_01_intersection(phi: &TreeComposition, psi: &TreeComposition) -> Result<bool> {
    if phi.domain() != psi.domain() {
        return Err(Error::DomainMismatch);
    }
    let mut seen = BTreeSet::new();
    Ok(phi.domain().vertices().skip(1).all(|w| seen.insert((phi.apply(w), psi.apply(w)))))
}

/// A transpose `φ^t: T → P^t` with its quotient `α^t: P^t → Q` onto the
/// quotient tree of `φ`.
#[derive(Clone, Debug)]
pub struct Transpose {
    pub composition: TreeComposition,
    pub quotient: TreeComposition,
}

/// Builds a transpose of `φ`.
///
/// `P^t` is the compositional tree attached to the conjugate tree of
/// partitions. Below every vertex `u` and for every child `b` of `δ(u)` in
/// `Q` (`δ = α∘φ`), the children of `u` over `b` are split by `φ` into blocks
/// of sizes `λ^b`; the `j`-th element of every block goes to the `j`-th
/// vertex over `b` in `P^t`, these being ordered by decreasing type. Blocks
/// then meet each target at most once.
pub fn transpose_composition(phi: &TreeComposition) -> Result<Transpose> {
    let t = phi.domain();
    let q = quotient(phi);
    let delta: Vec<Vertex> = t.vertices().map(|v| q.alpha.apply(phi.apply(v))).collect();
    let lambda = partition_tree_of(phi);
    let lambda_t = pt_transpose(&lambda);
    let (pt, alpha_t) = canonical_compositional_tree(&lambda_t);

    let mut types = vec![1usize; pt.vertex_count()];
    for x in pt.vertices() {
        for &b in lambda_t.tree().children(alpha_t.apply(x)) {
            let parts = lambda_t.label(b).expect("non-root").parts();
            let over_b = pt.children(x).iter().filter(|&&y| alpha_t.apply(y) == b);
            for (&y, &part) in over_b.zip(parts) {
                types[y] = part;
            }
        }
    }

    let mut map = vec![0usize; t.vertex_count()];
    for u in t.preorder() {
        let x_t = map[u];
        for &b in lambda_t.tree().children(delta[u]) {
            let mut blocks: Vec<Vec<Vertex>> = Vec::new();
            for &c in t.children(u).iter().filter(|&&c| delta[c] == b) {
                match blocks.iter_mut().find(|blk| phi.apply(blk[0]) == phi.apply(c)) {
                    Some(blk) => blk.push(c),
                    None => blocks.push(vec![c]),
                }
            }
            let mut targets: Vec<Vertex> = pt.children(x_t).iter().copied().filter(|&y| alpha_t.apply(y) == b).collect();
            targets.sort_by(|&a, &b| types[b].cmp(&types[a]).then(a.cmp(&b)));
            for block in &blocks {
                for (j, &c) in block.iter().enumerate() {
                    let target = targets.get(j).ok_or_else(|| Error::Internal("block longer than the conjugate length".into()))?;
                    map[c] = *target;
                }
            }
        }
    }
    let composition = TreeComposition::from_map(t, &pt, map)?;
    let result = Transpose {
        composition,
        quotient: alpha_t,
    };
    check_transpose(phi, &result, &delta, &lambda_t)?;
    Ok(result)
}

fn check_transpose(phi: &TreeComposition, tr: &Transpose, delta: &[Vertex], lambda_t: &PartitionTree) -> Result<()> {
    let psi = &tr.composition;
    if !is_quotient_of(&tr.quotient, psi) {
        return Err(Error::Internal("transpose quotient is not a quotient".into()));
    }
    if psi.domain().vertices().any(|v| tr.quotient.apply(psi.apply(v)) != delta[v]) {
        return Err(Error::Internal("transpose does not share the realization".into()));
    }
    if partition_tree_of(psi) != *lambda_t {
        return Err(Error::Internal("transpose has the wrong tree of partitions".into()));
    }
    if !has_01_intersection(phi, psi)? {
        return Err(Error::Internal("transpose does not have 0-1 intersection".into()));
    }
    Ok(())
}

/// Compares compositions through their trees of partitions.
pub fn order_compare_compositions(phi: &TreeComposition, psi: &TreeComposition) -> Ordering {
    pt_compare(&partition_tree_of(phi), &partition_tree_of(psi))
}

/// Number of classes of coarsest common refinements of `(φ, gψ)`, and how
/// many of them are trivial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RefinementCounts {
    pub total: usize,
    pub trivial: usize,
}

/// Counts the orbits of the stabilizer of `φ` on the orbit of `ψ`, and the
/// orbits whose coarsest common refinement with `φ` is trivial.
pub fn refinement_class_count(phi: &TreeComposition, psi: &TreeComposition, budget: u64) -> Result<RefinementCounts> {
    let g = enumerate_aut(phi.domain(), budget)?;
    refinement_class_count_in(phi, psi, &g)
}

/// [`refinement_class_count`] with a precomputed group.
pub fn refinement_class_count_in(phi: &TreeComposition, psi: &TreeComposition, g: &GroupTable) -> Result<RefinementCounts> {
    if phi.domain() != psi.domain() {
        return Err(Error::DomainMismatch);
    }
    let k = stabilizer(phi, g);
    let orbit = composition_orbit(psi, g);
    let position: HashMap<&[Vertex], usize> = orbit.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
    let mut seen = vec![false; orbit.len()];
    let mut counts = RefinementCounts { total: 0, trivial: 0 };
    for (i, m) in orbit.iter().enumerate() {
        if seen[i] {
            continue;
        }
        for &h in &k {
            seen[position[act_map(g.element(h), m).as_slice()]] = true;
        }
        counts.total += 1;
        let rep = TreeComposition::from_map(psi.domain(), psi.codomain(), m.clone())?;
        if is_trivial_refinement(&coarsest_common_refinement(phi, &rep)?) {
            counts.trivial += 1;
        }
    }
    Ok(counts)
}

/// One representative of every orbit of the stabilizer of `φ` on the orbit
/// of `ψ`.
pub fn stabilizer_orbit_representatives(phi: &TreeComposition, psi: &TreeComposition, g: &GroupTable) -> Result<Vec<TreeComposition>> {
    let k = stabilizer(phi, g);
    let orbit = composition_orbit(psi, g);
    let position: HashMap<&[Vertex], usize> = orbit.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();
    let mut seen = vec![false; orbit.len()];
    let mut reps = Vec::new();
    for (i, m) in orbit.iter().enumerate() {
        if seen[i] {
            continue;
        }
        for &h in &k {
            seen[position[act_map(g.element(h), m).as_slice()]] = true;
        }
        reps.push(TreeComposition::from_map(psi.domain(), psi.codomain(), m.clone())?);
    }
    Ok(reps)
}
