//! Tree morphisms and tree compositions: validation, types, strict and full
//! equivalence with explicit witnesses, restriction to subtrees, the
//! quotient with its first-level coordinate system, and the projection onto
//! the orbit tree.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree_core::{parse_tree, trivial_composition, RootedTree, Vertex};

mod varieties;

pub use varieties::{flag_variety_composition, subtree_variety_composition, VarietyComposition};

/// A partial vertex map, used for isomorphisms between subtrees.
pub type VertexMap = BTreeMap<Vertex, Vertex>;

/// A rooted tree homomorphism: root to root and children into children.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TreeMorphism {
    domain: RootedTree,
    codomain: RootedTree,
    map: Vec<Vertex>,
}

impl TreeMorphism {
    pub fn new(domain: RootedTree, codomain: RootedTree, map: Vec<Vertex>) -> Result<Self> {
        if map.len() != domain.vertex_count() {
            return Err(Error::NotAHomomorphism(format!(
                "map has {} entries for {} domain vertices",
                map.len(),
                domain.vertex_count()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&x| x >= codomain.vertex_count()) {
            return Err(Error::NotAHomomorphism(format!("image {bad} is not a codomain vertex")));
        }
        if map[0] != 0 {
            return Err(Error::NotAHomomorphism("root is not mapped to the root".into()));
        }
        for v in domain.vertices().skip(1) {
            let p = domain.parent(v).expect("non-root vertex has a parent");
            if codomain.parent(map[v]) != Some(map[p]) {
                return Err(Error::NotAHomomorphism(format!(
                    "vertex {v} maps to {} which is not a child of {}",
                    map[v], map[p]
                )));
            }
        }
        Ok(Self { domain, codomain, map })
    }

    pub fn identity(t: &RootedTree) -> Self {
        Self {
            domain: t.clone(),
            codomain: t.clone(),
            map: t.vertices().collect(),
        }
    }

    pub fn domain(&self) -> &RootedTree {
        &self.domain
    }

    pub fn codomain(&self) -> &RootedTree {
        &self.codomain
    }

    pub fn map(&self) -> &[Vertex] {
        &self.map
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        self.map[v]
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.codomain.vertex_count()];
        for &x in &self.map {
            hit[x] = true;
        }
        hit.into_iter().all(|h| h)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &TreeMorphism) -> Result<TreeMorphism> {
        if self.codomain != next.domain {
            return Err(Error::CodomainMismatch);
        }
        let map = self.map.iter().map(|&x| next.map[x]).collect();
        TreeMorphism::new(self.domain.clone(), next.codomain.clone(), map)
    }

    /// JSON-friendly form with both trees renumbered in preorder.
    pub fn to_serialized(&self) -> SerializedMorphism {
        let (dom, dom_ids) = self.domain.relabel_preorder();
        let (cod, cod_ids) = self.codomain.relabel_preorder();
        let mut map = vec![0; self.map.len()];
        for (v, &x) in self.map.iter().enumerate() {
            map[dom_ids[v]] = cod_ids[x];
        }
        SerializedMorphism {
            domain: dom.to_literal(),
            codomain: cod.to_literal(),
            map,
        }
    }

    pub fn from_serialized(s: &SerializedMorphism) -> Result<Self> {
        let domain = parse_tree(&s.domain)?;
        let codomain = parse_tree(&s.codomain)?;
        TreeMorphism::new(domain, codomain, s.map.clone())
    }
}

impl fmt::Debug for TreeMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeMorphism")
            .field("domain", &self.domain.to_literal())
            .field("codomain", &self.codomain.to_literal())
            .field("map", &self.map)
            .finish()
    }
}

/// Serialized morphism: `{"domain": literal, "codomain": literal, "map": [...]}`.
/// Vertex ids are preorder positions in the literals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerializedMorphism {
    pub domain: String,
    pub codomain: String,
    pub map: Vec<Vertex>,
}

/// A surjective tree homomorphism satisfying the regularity condition.
///
/// Regularity is checked through types: for every codomain vertex `x`, all
/// `u` in the fiber over `x` must send the same number of children to each
/// child of `x`. By induction on height this is equivalent to requiring that
/// sibling restrictions with a common image be strictly equivalent.
#[derive(Clone, PartialEq, Eq)]
pub struct TreeComposition {
    morphism: TreeMorphism,
    fibers: Vec<Vec<Vertex>>,
    type_values: Vec<usize>,
    typed_codes: Vec<String>,
}

impl TreeComposition {
    pub fn new(morphism: TreeMorphism) -> Result<Self> {
        let p = morphism.codomain();
        let t = morphism.domain();
        let mut fibers = vec![Vec::new(); p.vertex_count()];
        for v in t.vertices() {
            fibers[morphism.apply(v)].push(v);
        }
        if let Some(x) = fibers.iter().position(|f| f.is_empty()) {
            return Err(Error::NotAComposition(format!("codomain vertex {x} has empty fiber")));
        }
        let mut position = vec![0; p.vertex_count()];
        for x in p.vertices() {
            for (i, &y) in p.children(x).iter().enumerate() {
                position[y] = i;
            }
        }
        let mut type_values = vec![1; p.vertex_count()];
        for x in p.vertices() {
            let mut reference: Option<Vec<usize>> = None;
            for &u in &fibers[x] {
                let mut counts = vec![0; p.children(x).len()];
                for &c in t.children(u) {
                    counts[position[morphism.apply(c)]] += 1;
                }
                match &reference {
                    None => reference = Some(counts),
                    Some(r) if *r != counts => {
                        return Err(Error::NotAComposition(format!(
                            "vertices {} and {u} over {x} split their children differently",
                            fibers[x][0]
                        )));
                    }
                    Some(_) => {}
                }
            }
            if let Some(r) = reference {
                for (i, &y) in p.children(x).iter().enumerate() {
                    type_values[y] = r[i];
                }
            }
        }
        let typed_codes = typed_codes(p, &type_values);
        Ok(Self {
            morphism,
            fibers,
            type_values,
            typed_codes,
        })
    }

    pub fn from_map(domain: &RootedTree, codomain: &RootedTree, map: Vec<Vertex>) -> Result<Self> {
        Self::new(TreeMorphism::new(domain.clone(), codomain.clone(), map)?)
    }

    pub fn identity(t: &RootedTree) -> Self {
        Self::new(TreeMorphism::identity(t)).expect("identity is a tree composition")
    }

    pub fn morphism(&self) -> &TreeMorphism {
        &self.morphism
    }

    pub fn domain(&self) -> &RootedTree {
        self.morphism.domain()
    }

    pub fn codomain(&self) -> &RootedTree {
        self.morphism.codomain()
    }

    pub fn map(&self) -> &[Vertex] {
        self.morphism.map()
    }

    pub fn apply(&self, v: Vertex) -> Vertex {
        self.morphism.apply(v)
    }

    /// Domain vertices over `x`, in increasing id order.
    pub fn fiber(&self, x: Vertex) -> &[Vertex] {
        &self.fibers[x]
    }

    /// `|φ⁻¹|(x)`: the number of children of any vertex over the parent of `x`
    /// that land on `x`. The root has value 1.
    pub fn type_value(&self, x: Vertex) -> usize {
        self.type_values[x]
    }

    pub fn composition_type(&self) -> CompositionType {
        CompositionType {
            codomain: self.codomain().clone(),
            values: self.type_values.clone(),
        }
    }

    /// Canonical code of the typed subtree at `x`: the sorted list of
    /// `(type, code)` pairs of the children. The type of `x` itself is not
    /// part of the code.
    pub fn typed_code(&self, x: Vertex) -> &str {
        &self.typed_codes[x]
    }

    /// Children of `x` in the codomain sorted by (type, typed code, id).
    pub fn typed_canonical_children(&self, x: Vertex) -> Vec<Vertex> {
        let mut ch = self.codomain().children(x).to_vec();
        ch.sort_by(|&a, &b| {
            self.type_values[a]
                .cmp(&self.type_values[b])
                .then_with(|| self.typed_codes[a].cmp(&self.typed_codes[b]))
                .then(a.cmp(&b))
        });
        ch
    }

    /// `next ∘ self`, validated as a tree composition.
    pub fn then(&self, next: &TreeComposition) -> Result<TreeComposition> {
        TreeComposition::new(self.morphism.then(&next.morphism)?)
    }

    /// The restriction `φ_u: T_u → P_{φ(u)}` on extracted subtrees.
    pub fn restrict(&self, u: Vertex) -> Restriction {
        let (t_sub, domain_ids) = self.domain().subtree(u);
        let (p_sub, codomain_ids) = self.codomain().subtree(self.apply(u));
        let mut local = HashMap::with_capacity(codomain_ids.len());
        for (i, &x) in codomain_ids.iter().enumerate() {
            local.insert(x, i);
        }
        let map = domain_ids.iter().map(|&v| local[&self.apply(v)]).collect();
        let composition =
            TreeComposition::from_map(&t_sub, &p_sub, map).expect("restriction of a composition is a composition");
        Restriction {
            composition,
            domain_ids,
            codomain_ids,
        }
    }
}

impl fmt::Debug for TreeComposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TreeComposition")
            .field("domain", &self.domain().to_literal())
            .field("codomain", &self.codomain().to_literal())
            .field("map", &self.map())
            .finish()
    }
}

fn typed_codes(p: &RootedTree, type_values: &[usize]) -> Vec<String> {
    let mut codes = vec![String::new(); p.vertex_count()];
    let mut order = p.preorder();
    order.reverse();
    for x in order {
        let mut parts: Vec<String> = p
            .children(x)
            .iter()
            .map(|&y| format!("{}{}", type_values[y], codes[y]))
            .collect();
        parts.sort_unstable();
        codes[x] = format!("[{}]", parts.concat());
    }
    codes
}

/// A restricted composition together with the id maps back to the
/// original trees (new id → old id).
#[derive(Clone, Debug)]
pub struct Restriction {
    pub composition: TreeComposition,
    pub domain_ids: Vec<Vertex>,
    pub codomain_ids: Vec<Vertex>,
}

/// The type `|φ⁻¹|` of a composition, indexed by codomain vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CompositionType {
    codomain: RootedTree,
    values: Vec<usize>,
}

impl CompositionType {
    pub fn codomain(&self) -> &RootedTree {
        &self.codomain
    }

    /// Value at `x`; the root carries 1.
    pub fn value(&self, x: Vertex) -> usize {
        self.values[x]
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

/// True when `m` is surjective and regular.
pub fn is_tree_composition(m: &TreeMorphism) -> bool {
    TreeComposition::new(m.clone()).is_ok()
}

pub fn composition_type(phi: &TreeComposition) -> CompositionType {
    phi.composition_type()
}

/// An equivalence `(τ, ω)` with `ω ∘ φ = ψ ∘ τ`. For strict equivalence `ω`
/// is the identity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivalenceWitness {
    pub tau: Vec<Vertex>,
    pub omega: Vec<Vertex>,
}

impl EquivalenceWitness {
    /// Checks the witness pointwise.
    pub fn verify(&self, phi: &TreeComposition, psi: &TreeComposition) -> bool {
        is_tree_isomorphism(phi.domain(), psi.domain(), &self.tau)
            && is_tree_isomorphism(phi.codomain(), psi.codomain(), &self.omega)
            && phi
                .domain()
                .vertices()
                .all(|v| self.omega[phi.apply(v)] == psi.apply(self.tau[v]))
    }
}

/// True when `map` is a rooted tree isomorphism from `a` onto `b`.
pub fn is_tree_isomorphism(a: &RootedTree, b: &RootedTree, map: &[Vertex]) -> bool {
    if a.vertex_count() != b.vertex_count() || map.len() != a.vertex_count() {
        return false;
    }
    let mut seen = vec![false; b.vertex_count()];
    for &x in map {
        if x >= seen.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    map[0] == 0 && a.vertices().skip(1).all(|v| b.parent(map[v]) == a.parent(v).map(|p| map[p]))
}

/// Builds `τ: T_u → T'_r` with `ψ ∘ τ = ω ∘ φ` on `T_u`, matching the fibers
/// below each vertex in id order. Returns `None` when the types disagree.
pub(crate) fn lift(
    phi: &TreeComposition,
    u: Vertex,
    psi: &TreeComposition,
    r: Vertex,
    omega: &dyn Fn(Vertex) -> Option<Vertex>,
) -> Option<VertexMap> {
    let t = phi.domain();
    let t2 = psi.domain();
    let p = phi.codomain();
    let mut tau = VertexMap::new();
    let mut stack = vec![(u, r)];
    while let Some((v, w)) = stack.pop() {
        if psi.apply(w) != omega(phi.apply(v))? {
            return None;
        }
        tau.insert(v, w);
        if t.children(v).len() != t2.children(w).len() {
            return None;
        }
        let mut mine: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
        for &c in t.children(v) {
            mine.entry(phi.apply(c)).or_default().push(c);
        }
        let mut theirs: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
        for &c in t2.children(w) {
            theirs.entry(psi.apply(c)).or_default().push(c);
        }
        for &y in p.children(phi.apply(v)) {
            let a = mine.remove(&y).unwrap_or_default();
            let b = theirs.remove(&omega(y)?).unwrap_or_default();
            if a.len() != b.len() {
                return None;
            }
            stack.extend(a.into_iter().zip(b));
        }
    }
    Some(tau)
}

/// The isomorphism of typed subtrees `P_x → P'_y` obtained by matching
/// children sorted by (type, typed code, id). `None` if the typed codes differ.
pub(crate) fn typed_isomorphism(
    phi: &TreeComposition,
    x: Vertex,
    psi: &TreeComposition,
    y: Vertex,
) -> Option<VertexMap> {
    if phi.typed_code(x) != psi.typed_code(y) {
        return None;
    }
    let mut omega = VertexMap::new();
    let mut stack = vec![(x, y)];
    while let Some((a, b)) = stack.pop() {
        omega.insert(a, b);
        let ca = phi.typed_canonical_children(a);
        let cb = psi.typed_canonical_children(b);
        stack.extend(ca.into_iter().zip(cb));
    }
    Some(omega)
}

fn full_map(partial: &VertexMap, n: usize) -> Vec<Vertex> {
    let mut out = vec![usize::MAX; n];
    for (&a, &b) in partial {
        out[a] = b;
    }
    out
}

/// Decides strict equivalence. Returns `τ` with `φ = ψ ∘ τ` when the types agree.
pub fn strictly_equivalent(phi: &TreeComposition, psi: &TreeComposition) -> Result<Option<EquivalenceWitness>> {
    if phi.codomain() != psi.codomain() {
        return Err(Error::CodomainMismatch);
    }
    if phi.composition_type() != psi.composition_type()
        || phi.domain().vertex_count() != psi.domain().vertex_count()
    {
        return Ok(None);
    }
    let Some(tau) = lift(phi, 0, psi, 0, &|x| Some(x)) else {
        return Ok(None);
    };
    let witness = EquivalenceWitness {
        tau: full_map(&tau, phi.domain().vertex_count()),
        omega: phi.codomain().vertices().collect(),
    };
    if !witness.verify(phi, psi) {
        return Err(Error::Internal("strict equivalence witness failed verification".into()));
    }
    Ok(Some(witness))
}

/// Decides equivalence. The codomain isomorphism `ω` is the isomorphism of
/// typed codomains; `τ` is then lifted through it.
pub fn equivalent(phi: &TreeComposition, psi: &TreeComposition) -> Option<EquivalenceWitness> {
    if phi.domain().vertex_count() != psi.domain().vertex_count()
        || phi.codomain().vertex_count() != psi.codomain().vertex_count()
    {
        return None;
    }
    let omega = typed_isomorphism(phi, 0, psi, 0)?;
    let tau = lift(phi, 0, psi, 0, &|x| omega.get(&x).copied())?;
    let witness = EquivalenceWitness {
        tau: full_map(&tau, phi.domain().vertex_count()),
        omega: full_map(&omega, phi.codomain().vertex_count()),
    };
    witness.verify(phi, psi).then_some(witness)
}

/// First-level coordinates of one class `a` of the quotient.
#[derive(Clone, Debug)]
pub struct ClassCoordinates {
    /// The first-level vertex `a` of `Q`.
    pub class: Vertex,
    /// `x_a`: the lowest-id vertex of `α⁻¹(a)`.
    pub representative: Vertex,
    /// `v_{x_a}`: the lowest-id vertex of `φ⁻¹(x_a)`.
    pub base: Vertex,
    /// `ω_{x_a,y}: P_y → P_{x_a}` for every `y ∈ α⁻¹(a)`.
    pub omegas: BTreeMap<Vertex, VertexMap>,
    /// `τ_{base,u}: T_u → T_{base}` for every `u ∈ (α∘φ)⁻¹(a)`.
    pub taus: BTreeMap<Vertex, VertexMap>,
}

/// First-level coordinate system of a quotient. All isomorphisms are routed
/// through the class representatives, so the composition properties hold by
/// construction.
#[derive(Clone, Debug, Default)]
pub struct CoordinateSystem {
    classes: Vec<ClassCoordinates>,
}

fn invert(m: &VertexMap) -> VertexMap {
    m.iter().map(|(&a, &b)| (b, a)).collect()
}

fn compose(outer: &VertexMap, inner: &VertexMap) -> VertexMap {
    inner.iter().map(|(&a, b)| (a, outer[b])).collect()
}

impl CoordinateSystem {
    pub fn classes(&self) -> &[ClassCoordinates] {
        &self.classes
    }

    fn class_of_domain(&self, u: Vertex) -> Option<&ClassCoordinates> {
        self.classes.iter().find(|c| c.taus.contains_key(&u))
    }

    fn class_of_codomain(&self, y: Vertex) -> Option<&ClassCoordinates> {
        self.classes.iter().find(|c| c.omegas.contains_key(&y))
    }

    /// `τ_{w,u}: T_u → T_w`, defined when `u` and `w` lie in the same class.
    pub fn tau(&self, w: Vertex, u: Vertex) -> Option<VertexMap> {
        let c = self.class_of_domain(u)?;
        let to_w = c.taus.get(&w)?;
        Some(compose(&invert(to_w), &c.taus[&u]))
    }

    /// `ω_{z,y}: P_y → P_z`, defined when `y` and `z` lie in the same class.
    pub fn omega(&self, z: Vertex, y: Vertex) -> Option<VertexMap> {
        let c = self.class_of_codomain(y)?;
        let to_z = c.omegas.get(&z)?;
        Some(compose(&invert(to_z), &c.omegas[&y]))
    }
}

/// The quotient `α: P → Q` of a composition `φ: T → P`.
#[derive(Clone, Debug)]
pub struct Quotient {
    pub tree: RootedTree,
    pub alpha: TreeComposition,
    pub coordinates: CoordinateSystem,
}

/// Builds the quotient of `φ`. Leaf children of a vertex are merged into a
/// single leaf; internal children are merged exactly when their typed
/// subtrees are isomorphic, which is when the restrictions of `φ` below them
/// are equivalent. Representatives are lowest-id vertices.
pub fn quotient(phi: &TreeComposition) -> Quotient {
    let p = phi.codomain();
    let mut alpha = vec![usize::MAX; p.vertex_count()];
    let mut q_parents: Vec<Option<Vertex>> = vec![None];
    alpha[0] = 0;
    build_quotient(phi, 0, &mut alpha, &mut q_parents);
    let q = RootedTree::from_parents(&q_parents).expect("quotient tree is a tree");
    let alpha = TreeComposition::from_map(p, &q, alpha).expect("quotient map is a tree composition");

    let mut classes = Vec::new();
    for &a in q.first_level() {
        if q.is_leaf(a) {
            continue;
        }
        let xs = alpha.fiber(a);
        let representative = xs[0];
        let base = phi.fiber(representative)[0];
        let mut omegas = BTreeMap::new();
        let mut taus = BTreeMap::new();
        for &y in xs {
            let omega = typed_isomorphism(phi, y, phi, representative).expect("merged vertices have equal typed codes");
            for &u in phi.fiber(y) {
                let tau = lift(phi, u, phi, base, &|z| omega.get(&z).copied())
                    .expect("restrictions over one quotient class are equivalent");
                taus.insert(u, tau);
            }
            omegas.insert(y, omega);
        }
        classes.push(ClassCoordinates {
            class: a,
            representative,
            base,
            omegas,
            taus,
        });
    }
    Quotient {
        tree: q,
        alpha,
        coordinates: CoordinateSystem { classes },
    }
}

fn build_quotient(phi: &TreeComposition, x: Vertex, alpha: &mut [Vertex], q_parents: &mut Vec<Option<Vertex>>) {
    let p = phi.codomain();
    let a = alpha[x];
    let leaves: Vec<Vertex> = p.children(x).iter().copied().filter(|&y| p.is_leaf(y)).collect();
    if !leaves.is_empty() {
        let b = q_parents.len();
        q_parents.push(Some(a));
        for y in leaves {
            alpha[y] = b;
        }
    }
    let mut groups: Vec<Vec<Vertex>> = Vec::new();
    for &y in p.children(x) {
        if p.is_leaf(y) {
            continue;
        }
        match groups.iter_mut().find(|g| phi.typed_code(g[0]) == phi.typed_code(y)) {
            Some(g) => g.push(y),
            None => groups.push(vec![y]),
        }
    }
    for group in groups {
        let b = q_parents.len();
        q_parents.push(Some(a));
        let rep = group[0];
        alpha[rep] = b;
        build_quotient(phi, rep, alpha, q_parents);
        for &y in &group[1..] {
            let omega = typed_isomorphism(phi, y, phi, rep).expect("grouped vertices have equal typed codes");
            for (z, z_rep) in omega {
                alpha[z] = alpha[z_rep];
            }
        }
    }
}

impl Quotient {
    /// Checks the composition properties of the coordinate system and the
    /// commuting square `φ_w ∘ τ_{w,u} = ω_{φ(w),φ(u)} ∘ φ_u`,
    /// `α_{φ(w)} ∘ ω_{φ(w),φ(u)} = α_{φ(u)}` for every pair in every class.
    pub fn check_coordinates(&self, phi: &TreeComposition) -> Result<()> {
        let fail = |m: String| Err(Error::QuotientMismatch(m));
        for class in self.coordinates.classes() {
            let members: Vec<Vertex> = class.taus.keys().copied().collect();
            for &u in &members {
                if self.coordinates.tau(u, u).map(|m| m.iter().all(|(a, b)| a == b)) != Some(true) {
                    return fail(format!("τ_{{{u},{u}}} is not the identity"));
                }
                for &w in &members {
                    let tau = self.coordinates.tau(w, u).expect("same class");
                    let back = self.coordinates.tau(u, w).expect("same class");
                    if invert(&tau) != back {
                        return fail(format!("τ_{{{u},{w}}} is not the inverse of τ_{{{w},{u}}}"));
                    }
                    let omega = self
                        .coordinates
                        .omega(phi.apply(w), phi.apply(u))
                        .expect("images lie in the same class");
                    for (&s, &t) in &tau {
                        if phi.apply(t) != omega[&phi.apply(s)] {
                            return fail(format!("square fails at {s} for the pair ({u},{w})"));
                        }
                    }
                    for (&y, &z) in &omega {
                        if self.alpha.apply(z) != self.alpha.apply(y) {
                            return fail(format!("α ∘ ω differs from α at {y}"));
                        }
                    }
                }
            }
            // Composition law τ_{w,u} ∘ τ_{u,t} = τ_{w,t}, checked against the base.
            for &u in &members {
                for &t in &members {
                    let lhs = compose(&self.coordinates.tau(class.base, u).unwrap(), &self.coordinates.tau(u, t).unwrap());
                    if lhs != self.coordinates.tau(class.base, t).unwrap() {
                        return fail(format!("composition law fails for ({u},{t})"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Checks the defining clauses of a quotient directly: leaf merging, sibling
/// classes with non-equivalent restrictions, and that `α∘φ` is a composition
/// whose restrictions over each class are strictly equivalent while those of
/// `φ` are equivalent. Equivalences are decided on extracted restrictions.
pub fn is_quotient_of(alpha: &TreeComposition, phi: &TreeComposition) -> bool {
    let p = phi.codomain();
    let q = alpha.codomain();
    if alpha.domain() != p {
        return false;
    }
    for a in q.vertices() {
        if q.children(a).iter().filter(|&&b| q.is_leaf(b)).count() > 1 {
            return false;
        }
    }
    for x in p.vertices() {
        let leaf_images: Vec<Vertex> = p
            .children(x)
            .iter()
            .filter(|&&y| p.is_leaf(y))
            .map(|&y| alpha.apply(y))
            .collect();
        if leaf_images.iter().any(|&b| b != leaf_images[0] || !q.is_leaf(b)) {
            return false;
        }
        let internal: Vec<Vertex> = p.children(x).iter().copied().filter(|&y| !p.is_leaf(y)).collect();
        for (i, &y) in internal.iter().enumerate() {
            for &z in &internal[i + 1..] {
                if alpha.apply(y) != alpha.apply(z) {
                    let ry = phi.restrict(phi.fiber(y)[0]).composition;
                    let rz = phi.restrict(phi.fiber(z)[0]).composition;
                    if equivalent(&ry, &rz).is_some() {
                        return false;
                    }
                }
            }
        }
    }
    let Ok(delta) = phi.then(alpha) else {
        return false;
    };
    for a in q.vertices() {
        let fiber = delta.fiber(a);
        let u0 = fiber[0];
        if phi.domain().is_leaf(u0) {
            continue;
        }
        let r0 = phi.restrict(u0).composition;
        let d0 = delta.restrict(u0).composition;
        for &u in &fiber[1..] {
            if equivalent(&r0, &phi.restrict(u).composition).is_none() {
                return false;
            }
            match strictly_equivalent(&d0, &delta.restrict(u).composition) {
                Ok(Some(_)) => {}
                _ => return false,
            }
        }
    }
    true
}

/// The map `ε: P → C` onto the orbit tree with `ε ∘ φ = tv`.
pub fn canonical_projection(phi: &TreeComposition) -> TreeMorphism {
    let (c, tv) = trivial_composition(phi.domain());
    let map: Vec<Vertex> = phi.codomain().vertices().map(|x| tv.apply(phi.fiber(x)[0])).collect();
    debug_assert!(phi.domain().vertices().all(|u| map[phi.apply(u)] == tv.apply(u)));
    TreeMorphism::new(phi.codomain().clone(), c, map).expect("projection onto the orbit tree is a homomorphism")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_core::{is_isomorphic, BranchingType, spherically_homogeneous};

    fn tree(s: &str) -> RootedTree {
        parse_tree(s).unwrap()
    }

    fn b(parts: &[usize]) -> RootedTree {
        spherically_homogeneous(&BranchingType::new(parts.to_vec()).unwrap())
    }

    #[test]
    fn identity_and_trivial_are_compositions() {
        let t = b(&[2, 3]);
        assert!(is_tree_composition(&TreeMorphism::identity(&t)));
        let (_, tv) = trivial_composition(&t);
        assert!(is_tree_composition(tv.morphism()));
        let id = TreeComposition::identity(&t);
        assert!(id.codomain().vertices().all(|x| id.type_value(x) == 1));
        assert_eq!(tv.composition_type().values(), &[1, 2, 3]);
    }

    #[test]
    fn homomorphism_validation() {
        let t = tree("(()())");
        let p = tree("(())");
        assert!(TreeMorphism::new(t.clone(), p.clone(), vec![0, 1, 1]).is_ok());
        assert!(TreeMorphism::new(t.clone(), p.clone(), vec![1, 0, 0]).is_err());
        assert!(TreeMorphism::new(t.clone(), p.clone(), vec![0, 1]).is_err());
        assert!(TreeMorphism::new(t, p, vec![0, 0, 1]).is_err());
    }

    #[test]
    fn composite_of_compositions_can_fail() {
        // T = ((()())(())): u = 1 with children 2,3; v = 4 with child 5.
        let t = tree("((()())(()))");
        let p = tree("((())(()))");
        let s = tree("((()))");
        let phi = TreeComposition::from_map(&t, &p, vec![0, 1, 2, 2, 3, 4]).unwrap();
        let psi = TreeComposition::from_map(&p, &s, vec![0, 1, 2, 1, 2]).unwrap();
        let composite = phi.morphism().then(psi.morphism()).unwrap();
        assert!(!is_tree_composition(&composite));
    }

    #[test]
    fn set_composition_type() {
        let t = b(&[3]);
        let p = tree("(()())");
        let phi = TreeComposition::from_map(&t, &p, vec![0, 1, 1, 2]).unwrap();
        assert_eq!(phi.type_value(1), 2);
        assert_eq!(phi.type_value(2), 1);
    }

    #[test]
    fn regularity_is_enforced() {
        // Two first-level vertices over the same x split their children differently.
        let t = tree("((()())(()()))");
        let p = tree("((()()))");
        let bad = TreeMorphism::new(t.clone(), p.clone(), vec![0, 1, 2, 2, 1, 2, 3]).unwrap();
        assert!(!is_tree_composition(&bad));
        let good = TreeMorphism::new(t, p, vec![0, 1, 2, 3, 1, 3, 2]).unwrap();
        assert!(is_tree_composition(&good));
    }

    #[test]
    fn strict_equivalence_witness() {
        let t = tree("((()())(()()))");
        let p = tree("((()()))");
        let phi = TreeComposition::from_map(&t, &p, vec![0, 1, 2, 3, 1, 2, 3]).unwrap();
        let psi = TreeComposition::from_map(&t, &p, vec![0, 1, 3, 2, 1, 2, 3]).unwrap();
        let w = strictly_equivalent(&phi, &psi).unwrap().unwrap();
        assert!(w.verify(&phi, &psi));
        let (_, tv) = trivial_composition(&t);
        let id = TreeComposition::identity(&t);
        assert_eq!(strictly_equivalent(&tv, &id), Err(Error::CodomainMismatch));
    }

    #[test]
    fn equivalence_through_codomain_isomorphism() {
        let t = b(&[3]);
        let p = tree("(()())");
        let phi = TreeComposition::from_map(&t, &p, vec![0, 1, 1, 2]).unwrap();
        let psi = TreeComposition::from_map(&t, &p, vec![0, 1, 2, 2]).unwrap();
        assert!(strictly_equivalent(&phi, &psi).unwrap().is_none());
        let w = equivalent(&phi, &psi).unwrap();
        assert!(w.verify(&phi, &psi));
        let (_, tv) = trivial_composition(&t);
        assert!(equivalent(&tv, &TreeComposition::identity(&t)).is_none());
    }

    #[test]
    fn quotient_of_identity_is_trivial_composition() {
        for t in [b(&[2, 2]), tree("(()(()()))"), tree("((())(()())())")] {
            let id = TreeComposition::identity(&t);
            let q = quotient(&id);
            let (c, tv) = trivial_composition(&t);
            assert!(is_isomorphic(&q.tree, &c));
            assert!(equivalent(&q.alpha, &tv).is_some());
            assert!(is_quotient_of(&q.alpha, &id));
            q.check_coordinates(&id).unwrap();
        }
    }

    #[test]
    fn quotient_of_height_one_is_a_single_edge() {
        let t = b(&[4]);
        let p = tree("(()()())");
        let phi = TreeComposition::from_map(&t, &p, vec![0, 1, 1, 2, 3]).unwrap();
        let q = quotient(&phi);
        assert_eq!(q.tree.to_literal(), "(())");
        assert!(is_quotient_of(&q.alpha, &phi));
    }

    #[test]
    fn quotient_of_trivial_is_bijective() {
        let t = tree("((()())(()())())");
        let (c, tv) = trivial_composition(&t);
        let q = quotient(&tv);
        assert_eq!(q.tree.vertex_count(), c.vertex_count());
    }

    #[test]
    fn projection_examples() {
        let t = b(&[2, 2]);
        let (c, tv) = trivial_composition(&t);
        let eps = canonical_projection(&tv);
        assert_eq!(eps.map(), c.vertices().collect::<Vec<_>>().as_slice());
        let eps = canonical_projection(&TreeComposition::identity(&t));
        assert_eq!(eps.map(), tv.map());
    }

    #[test]
    fn serialization_round_trip() {
        let t = b(&[2, 2]);
        let (_, tv) = trivial_composition(&t);
        let s = tv.morphism().to_serialized();
        let back = TreeMorphism::from_serialized(&s).unwrap();
        assert_eq!(&back, tv.morphism());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"domain":"((()())(()()))","codomain":"((()))","map":[0,1,2,2,1,2,2]}"#);
    }
}
