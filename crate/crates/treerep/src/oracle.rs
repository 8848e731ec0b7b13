//! Brute-force ground truth: explicit enumeration of `Aut(T)`, conjugacy
//! classes by conjugation, orbits and stabilizers of compositions,
//! permutation and sign-induced characters, and character inner products.

use std::collections::{BTreeSet, HashMap};

use itertools::Itertools;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::automorphism::{sign, Automorphism};
use crate::composition::TreeComposition;
use crate::error::{Error, Result};
use crate::partition_tree::{canonical_composition, enumerate_par, PartitionTree};
use crate::tree_core::{aut_order, RootedTree, Vertex};

/// Default cap on the number of group elements materialized.
pub const DEFAULT_BRUTE_BUDGET: u64 = 10_000;

/// A class function, one value per conjugacy class of a [`GroupTable`].
pub type ClassFunction = Vec<i64>;

/// All automorphisms of a tree with their conjugacy classes.
#[derive(Clone, Debug)]
pub struct GroupTable {
    tree: RootedTree,
    elements: Vec<Automorphism>,
    index: HashMap<Vec<Vertex>, usize>,
    class_of: Vec<usize>,
    classes: Vec<Vec<usize>>,
}

impl GroupTable {
    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[Automorphism] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Automorphism {
        &self.elements[i]
    }

    pub fn index_of(&self, g: &Automorphism) -> Option<usize> {
        self.index.get(g.perm()).copied()
    }

    /// Index of `elements[a] ∘ elements[b]`.
    pub fn multiply(&self, a: usize, b: usize) -> usize {
        self.index[self.elements[a].compose(&self.elements[b]).perm()]
    }

    pub fn class_of(&self, i: usize) -> usize {
        self.class_of[i]
    }

    /// Conjugacy classes as lists of element indices, in order of their
    /// lowest member.
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_size(&self, c: usize) -> usize {
        self.classes[c].len()
    }

    pub fn centralizer_order(&self, c: usize) -> usize {
        self.order() / self.class_size(c)
    }

    /// Lowest-index member of each class.
    pub fn class_representative(&self, c: usize) -> &Automorphism {
        &self.elements[self.classes[c][0]]
    }

    /// Evaluates `f` on one representative per class.
    pub fn class_function(&self, f: impl Fn(&Automorphism) -> i64) -> ClassFunction {
        (0..self.class_count()).map(|c| f(self.class_representative(c))).collect()
    }
}

/// Lists `Aut(T)` by choosing, vertex by vertex, a code-preserving bijection
/// between the children of a vertex and the children of its image.
pub fn enumerate_aut(t: &RootedTree, budget: u64) -> Result<GroupTable> {
    let order = aut_order(t);
    if order > budget.into() {
        return Err(Error::BudgetExceeded {
            what: "Aut(T)",
            needed: order.to_string(),
            budget,
        });
    }
    let mut elements = Vec::new();
    let mut perm = vec![usize::MAX; t.vertex_count()];
    perm[0] = 0;
    extend(t, &mut perm, vec![(0, 0)], &mut elements);
    let elements: Vec<Automorphism> = elements.into_iter().map(|p| Automorphism::new_unchecked(t, p)).collect();
    if order != elements.len().into() {
        return Err(Error::Internal(format!("enumerated {} automorphisms, expected {order}", elements.len())));
    }
    let index: HashMap<Vec<Vertex>, usize> = elements.iter().enumerate().map(|(i, g)| (g.perm().to_vec(), i)).collect();
    let mut class_of = vec![usize::MAX; elements.len()];
    let mut classes = Vec::new();
    for i in 0..elements.len() {
        if class_of[i] != usize::MAX {
            continue;
        }
        let c = classes.len();
        let members: BTreeSet<usize> = elements.iter().map(|s| index[elements[i].conjugate_by(s).perm()]).collect();
        for &m in &members {
            class_of[m] = c;
        }
        classes.push(members.into_iter().collect());
    }
    Ok(GroupTable {
        tree: t.clone(),
        elements,
        index,
        class_of,
        classes,
    })
}

fn extend(t: &RootedTree, perm: &mut Vec<Vertex>, mut pending: Vec<(Vertex, Vertex)>, out: &mut Vec<Vec<Vertex>>) {
    let Some((v, w)) = pending.pop() else {
        out.push(perm.clone());
        return;
    };
    let groups: Vec<(Vec<Vertex>, Vec<Vertex>)> = t
        .canonical_children(v)
        .iter()
        .chunk_by(|&&c| t.code(c))
        .into_iter()
        .map(|(code, chunk)| {
            let mine: Vec<Vertex> = chunk.copied().collect();
            let theirs: Vec<Vertex> = t.children(w).iter().copied().filter(|&d| t.code(d) == code).collect();
            (mine, theirs)
        })
        .collect();
    let choices: Vec<Vec<Vec<Vertex>>> = groups
        .iter()
        .map(|(_, theirs)| theirs.iter().copied().permutations(theirs.len()).collect())
        .collect();
    // An empty product still has one (empty) choice.
    let picks: Vec<Vec<&Vec<Vertex>>> = if choices.is_empty() {
        vec![Vec::new()]
    } else {
        choices.iter().map(|c| c.iter()).multi_cartesian_product().collect()
    };
    for pick in picks {
        let mut next = pending.clone();
        for ((mine, _), images) in groups.iter().zip(&pick) {
            for (&c, &d) in mine.iter().zip(images.iter()) {
                perm[c] = d;
                next.push((c, d));
            }
        }
        extend(t, perm, next, out);
    }
}

/// Conjugacy classes found by conjugating with every element.
pub fn brute_conjugacy_classes(g: &GroupTable) -> Vec<Vec<usize>> {
    g.classes.clone()
}

/// Map of `g·φ = φ ∘ g⁻¹`.
pub fn act_map(g: &Automorphism, phi_map: &[Vertex]) -> Vec<Vertex> {
    let inv = g.inverse();
    (0..phi_map.len()).map(|v| phi_map[inv.apply(v)]).collect()
}

/// The orbit `{g·φ}` as distinct maps into the codomain of `φ`, sorted.
pub fn composition_orbit(phi: &TreeComposition, g: &GroupTable) -> Vec<Vec<Vertex>> {
    let set: BTreeSet<Vec<Vertex>> = g.elements().iter().map(|h| act_map(h, phi.map())).collect();
    set.into_iter().collect()
}

/// Indices of the elements fixing `φ`.
pub fn stabilizer(phi: &TreeComposition, g: &GroupTable) -> Vec<usize> {
    (0..g.order()).filter(|&i| act_map(g.element(i), phi.map()) == phi.map()).collect()
}

/// True when only the identity fixes both `φ` and `ψ`.
pub fn joint_stabilizer_is_trivial(phi: &[Vertex], psi: &[Vertex], g: &GroupTable) -> bool {
    g.elements()
        .iter()
        .filter(|h| !h.is_identity())
        .all(|h| act_map(h, phi) != phi || act_map(h, psi) != psi)
}

/// Character of the permutation module on the orbit of `φ`: the number of
/// orbit points fixed by `h`.
pub fn perm_character(phi: &TreeComposition, h: &Automorphism, g: &GroupTable) -> i64 {
    composition_orbit(phi, g).iter().filter(|psi| act_map(h, psi) == **psi).count() as i64
}

/// One element `t` per orbit point `t·φ`, i.e. per left coset of the
/// stabilizer of `φ`.
pub fn coset_representatives(phi: &TreeComposition, g: &GroupTable) -> Vec<usize> {
    let mut seen: HashMap<Vec<Vertex>, usize> = HashMap::new();
    for (i, t) in g.elements().iter().enumerate() {
        seen.entry(act_map(t, phi.map())).or_insert(i);
    }
    let mut reps: Vec<usize> = seen.into_values().collect();
    reps.sort_unstable();
    reps
}

/// Character of the module induced from the sign of the stabilizer of `φ`,
/// by the induced character formula over one coset representative per
/// orbit point.
pub fn sign_induced_character(phi: &TreeComposition, h: &Automorphism, g: &GroupTable) -> i64 {
    sign_induced_character_with(phi, h, &coset_representatives(phi, g), g)
}

/// [`sign_induced_character`] with precomputed coset representatives.
pub fn sign_induced_character_with(phi: &TreeComposition, h: &Automorphism, reps: &[usize], g: &GroupTable) -> i64 {
    reps.iter()
        .map(|&i| {
            let t = g.element(i);
            t.inverse().compose(h).compose(t)
        })
        .filter(|k| act_map(k, phi.map()) == phi.map())
        .map(|k| i64::from(sign(&k)))
        .sum()
}

/// Class function of [`perm_character`].
pub fn perm_character_table(phi: &TreeComposition, g: &GroupTable) -> ClassFunction {
    let orbit = composition_orbit(phi, g);
    g.class_function(|h| orbit.iter().filter(|psi| act_map(h, psi) == **psi).count() as i64)
}

/// Class function of [`sign_induced_character`].
pub fn sign_induced_character_table(phi: &TreeComposition, g: &GroupTable) -> ClassFunction {
    let reps = coset_representatives(phi, g);
    g.class_function(|h| sign_induced_character_with(phi, h, &reps, g))
}

/// Class function of the sign character.
pub fn sign_table(g: &GroupTable) -> ClassFunction {
    g.class_function(|h| i64::from(sign(h)))
}

/// `(1/|G|) Σ_g χ₁(g) χ₂(g)`; characters of `Aut(T)` are real.
pub fn char_inner_product(chi1: &[i64], chi2: &[i64], g: &GroupTable) -> BigRational {
    let sum: BigInt = (0..g.class_count())
        .map(|c| BigInt::from(g.class_size(c)) * chi1[c] * chi2[c])
        .sum();
    BigRational::new(sum, BigInt::from(g.order()))
}

/// The inner product as an integer, when it is one.
pub fn char_inner_product_integer(chi1: &[i64], chi2: &[i64], g: &GroupTable) -> Option<i64> {
    let r = char_inner_product(chi1, chi2, g);
    r.is_integer().then(|| r.to_integer().to_i64()).flatten()
}

/// Irreducible characters indexed by `Par(T)`, in decreasing order: the
/// permutation character of each attached composition minus its
/// constituents among the characters already found.
pub fn peeled_characters(g: &GroupTable) -> Result<Vec<(PartitionTree, ClassFunction)>> {
    let mut found: Vec<(PartitionTree, ClassFunction)> = Vec::new();
    for entry in enumerate_par(g.tree())? {
        let phi = canonical_composition(&entry.partition_tree, g.tree())?;
        let mut chi = perm_character_table(&phi, g);
        let perm = chi.clone();
        for (_, xi) in &found {
            let m = char_inner_product_integer(&perm, xi, g)
                .ok_or_else(|| Error::Internal("non-integral multiplicity".into()))?;
            for (c, x) in chi.iter_mut().zip(xi) {
                *c -= m * x;
            }
        }
        found.push((entry.partition_tree, chi));
    }
    Ok(found)
}
