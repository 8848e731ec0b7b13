//! Integer partitions and trees of partitions: the tree of partitions of a
//! composition, validity, isomorphism, the total order, transposition,
//! realizations, building compositions with a prescribed tree of partitions,
//! and the enumeration of `Par(T)`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::rc::Rc;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::composition::{lift, quotient, TreeComposition};
use crate::error::{Error, Result};
use crate::tree_core::{parse_tree, RootedTree, Vertex};

/// Default cap on the projected size of `Par(T)`.
pub const DEFAULT_PAR_CAP: u64 = 1_000_000;

/// An integer partition: a weakly decreasing list of positive parts.
///
/// The derived order is the extended lexicographic order: parts are compared
/// left to right and, when one partition is a prefix of the other, the
/// longer one is greater.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidPartition("a partition needs at least one part".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidPartition("parts must be positive".into()));
        }
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition(format!("{parts:?} is not weakly decreasing")));
        }
        Ok(Self(parts))
    }

    /// Sorts the given positive parts into decreasing order.
    pub fn from_parts(mut parts: Vec<usize>) -> Result<Self> {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(parts)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    /// Number of parts `ℓ(λ)`.
    pub fn length(&self) -> usize {
        self.0.len()
    }

    /// Sum of the parts `|λ|`.
    pub fn weight(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn conjugate(&self) -> Partition {
        let cols = self.0[0];
        Partition((1..=cols).map(|j| self.0.iter().filter(|&&p| p >= j).count()).collect())
    }

    /// Label form used inside canonical strings, e.g. `2.1`.
    pub fn dotted(&self) -> String {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        s.join(".")
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<usize>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let parts = inner
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPartition(format!("cannot read {p:?} as a part")))
            })
            .collect::<Result<Vec<_>>>()?;
        Partition::new(parts)
    }
}

/// All partitions of `n`, in decreasing extended lexicographic order.
pub fn partitions_of(n: usize) -> Vec<Partition> {
    fn rec(remaining: usize, max: usize, current: &mut Vec<usize>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition(current.clone()));
            return;
        }
        for part in (1..=remaining.min(max)).rev() {
            current.push(part);
            rec(remaining - part, part, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        rec(n, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Number of partitions of `n` (with `p(0) = 1`).
pub fn partition_count(n: usize) -> BigUint {
    let mut p = vec![BigUint::zero(); n + 1];
    p[0] = BigUint::one();
    for part in 1..=n {
        for m in part..=n {
            let add = p[m - part].clone();
            p[m] += add;
        }
    }
    p[n].clone()
}

/// Nested form of a tree of partitions, used for JSON and for comparisons.
/// The root carries no part.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PtNode {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part: Option<Partition>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<PtNode>,
}

impl PtNode {
    fn weight(&self) -> usize {
        self.part.as_ref().map_or(0, Partition::weight)
    }

    fn height(&self) -> usize {
        self.children.iter().map(|c| 1 + c.height()).max().unwrap_or(0)
    }

    /// Sorts children recursively into decreasing order.
    fn canonicalize(&mut self) {
        for c in &mut self.children {
            c.canonicalize();
        }
        self.children.sort_by(|a, b| compare_vertices(b, a));
    }

    fn write_canonical(&self, out: &mut String) {
        out.push('[');
        for (i, c) in self.children.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            if let Some(p) = &c.part {
                out.push_str(&p.dotted());
            }
            c.write_canonical(out);
        }
        out.push(']');
    }
}

/// Order between labeled first-level vertices. Both nodes carry parts and
/// have canonically sorted children.
fn compare_vertices(a: &PtNode, b: &PtNode) -> Ordering {
    let la = a.part.as_ref();
    let lb = b.part.as_ref();
    match (a.children.is_empty(), b.children.is_empty()) {
        (true, true) => la.cmp(&lb),
        (false, true) => Ordering::Greater,
        (true, false) => Ordering::Less,
        (false, false) => compare_nodes(a, b)
            .then_with(|| a.weight().cmp(&b.weight()))
            .then_with(|| la.cmp(&lb)),
    }
}

/// Order between trees (roots unlabeled): the decreasing child sequences are
/// compared lexicographically, a longer sequence winning on a common prefix.
fn compare_nodes(a: &PtNode, b: &PtNode) -> Ordering {
    for (x, y) in a.children.iter().zip(&b.children) {
        match compare_vertices(x, y) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    a.children.len().cmp(&b.children.len())
}

/// A tree of partitions `(Λ, Q)`.
///
/// Equality and hashing go through the canonical form, so two values are
/// equal exactly when they are isomorphic; the vertex numbering of `Q` is
/// not compared. `Ord` is the total order on trees of partitions.
#[derive(Clone)]
pub struct PartitionTree {
    tree: RootedTree,
    labels: Vec<Option<Partition>>,
    node: PtNode,
    canonical: String,
}

impl PartitionTree {
    /// Validates a labeling of `tree`: every non-root vertex labeled, at most
    /// one leaf among the children of each vertex, and pairwise non-isomorphic
    /// labeled subtrees below internal siblings.
    pub fn new(tree: RootedTree, labels: Vec<Option<Partition>>) -> Result<Self> {
        if labels.len() != tree.vertex_count() {
            return Err(Error::InvalidPartitionTree("one label per vertex expected".into()));
        }
        if labels[0].is_some() {
            return Err(Error::InvalidPartitionTree("the root carries no label".into()));
        }
        if let Some(v) = tree.vertices().skip(1).find(|&v| labels[v].is_none()) {
            return Err(Error::InvalidPartitionTree(format!("vertex {v} has no label")));
        }
        let mut nodes: Vec<Option<PtNode>> = vec![None; tree.vertex_count()];
        let mut codes: Vec<String> = vec![String::new(); tree.vertex_count()];
        let mut order = tree.preorder();
        order.reverse();
        for v in order {
            let ch = tree.children(v);
            if ch.iter().filter(|&&c| tree.is_leaf(c)).count() > 1 {
                return Err(Error::InvalidPartitionTree(format!("vertex {v} has more than one leaf child")));
            }
            let mut node = PtNode {
                part: labels[v].clone(),
                children: ch.iter().map(|&c| nodes[c].take().expect("child built")).collect(),
            };
            node.canonicalize();
            let mut sub = PtNode {
                part: None,
                children: node.children.clone(),
            };
            sub.canonicalize();
            let mut code = String::new();
            sub.write_canonical(&mut code);
            let internal: Vec<&String> = ch.iter().filter(|&&c| !tree.is_leaf(c)).map(|&c| &codes[c]).collect();
            for (i, x) in internal.iter().enumerate() {
                if internal[i + 1..].contains(x) {
                    return Err(Error::InvalidPartitionTree(format!(
                        "vertex {v} has two internal children with isomorphic labeled subtrees"
                    )));
                }
            }
            codes[v] = code;
            nodes[v] = Some(node);
        }
        let node = nodes[0].take().expect("root built");
        let mut canonical = String::new();
        node.write_canonical(&mut canonical);
        Ok(Self {
            tree,
            labels,
            node,
            canonical,
        })
    }

    /// Builds a tree of partitions from its nested form, numbering `Q` in
    /// preorder with children in the given order.
    pub fn from_node(node: &PtNode) -> Result<Self> {
        if node.part.is_some() {
            return Err(Error::InvalidPartitionTree("the root carries no label".into()));
        }
        let mut parents = Vec::new();
        let mut labels = Vec::new();
        fn walk(n: &PtNode, parent: Option<Vertex>, parents: &mut Vec<Option<Vertex>>, labels: &mut Vec<Option<Partition>>) {
            let id = parents.len();
            parents.push(parent);
            labels.push(n.part.clone());
            for c in &n.children {
                walk(c, Some(id), parents, labels);
            }
        }
        walk(node, None, &mut parents, &mut labels);
        let tree = RootedTree::from_parents(&parents)?;
        PartitionTree::new(tree, labels)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let node: PtNode = serde_json::from_str(text).map_err(|e| Error::Parse {
            position: e.column(),
            message: e.to_string(),
        })?;
        Self::from_node(&node)
    }

    /// The underlying tree `Q`.
    pub fn tree(&self) -> &RootedTree {
        &self.tree
    }

    /// `λ^a`; `None` for the root.
    pub fn label(&self, a: Vertex) -> Option<&Partition> {
        self.labels[a].as_ref()
    }

    pub fn labels(&self) -> &[Option<Partition>] {
        &self.labels
    }

    /// Nested form with children in decreasing order.
    pub fn to_node(&self) -> &PtNode {
        &self.node
    }

    /// Canonical string: `[` children `]` where each child is its dotted
    /// label followed by its own bracket form, children in decreasing order.
    pub fn canonical_form(&self) -> &str {
        &self.canonical
    }

    pub fn height(&self) -> usize {
        self.node.height()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.node).expect("partition tree serializes")
    }

    /// Indented rendering, one labeled vertex per line, children in
    /// decreasing order.
    pub fn render_ascii(&self) -> String {
        fn walk(n: &PtNode, depth: usize, out: &mut String) {
            for c in &n.children {
                out.push_str(&"  ".repeat(depth));
                out.push_str(&c.part.as_ref().map(|p| p.to_string()).unwrap_or_default());
                out.push('\n');
                walk(c, depth + 1, out);
            }
        }
        let mut out = String::from("*\n");
        walk(&self.node, 1, &mut out);
        out
    }
}

impl PartialEq for PartitionTree {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for PartitionTree {}

impl Hash for PartitionTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.canonical.hash(state);
    }
}

impl PartialOrd for PartitionTree {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PartitionTree {
    fn cmp(&self, other: &Self) -> Ordering {
        pt_compare(self, other)
    }
}

impl fmt::Debug for PartitionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PartitionTree({})", self.canonical)
    }
}

impl fmt::Display for PartitionTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical)
    }
}

/// True when the labeling is a tree of partitions.
pub fn is_valid_partition_tree(tree: &RootedTree, labels: &[Option<Partition>]) -> bool {
    PartitionTree::new(tree.clone(), labels.to_vec()).is_ok()
}

pub fn pt_isomorphic(a: &PartitionTree, b: &PartitionTree) -> bool {
    a.canonical == b.canonical
}

/// The total order on trees of partitions.
pub fn pt_compare(a: &PartitionTree, b: &PartitionTree) -> Ordering {
    compare_nodes(&a.node, &b.node)
}

/// Conjugates every label.
pub fn pt_transpose(l: &PartitionTree) -> PartitionTree {
    let labels = l.labels.iter().map(|x| x.as_ref().map(Partition::conjugate)).collect();
    PartitionTree::new(l.tree.clone(), labels).expect("conjugating labels keeps a tree of partitions")
}

/// The tree of partitions of a composition, read off its quotient: the label
/// of `b` lists the types of the children of any `x` over the parent of `b`
/// that the quotient sends to `b`.
pub fn partition_tree_of(phi: &TreeComposition) -> PartitionTree {
    let q = quotient(phi);
    let mut labels = vec![None; q.tree.vertex_count()];
    for b in q.tree.vertices().skip(1) {
        let a = q.tree.parent(b).expect("non-root");
        let x = q.alpha.fiber(a)[0];
        let parts: Vec<usize> = phi
            .codomain()
            .children(x)
            .iter()
            .filter(|&&y| q.alpha.apply(y) == b)
            .map(|&y| phi.type_value(y))
            .collect();
        labels[b] = Some(Partition::from_parts(parts).expect("every quotient vertex has preimages"));
    }
    PartitionTree::new(q.tree, labels).expect("labels read from a quotient form a tree of partitions")
}

/// Canonical code of the subtree of any realization lying over each vertex
/// of `Q`.
pub(crate) fn realized_codes(l: &PartitionTree) -> Vec<String> {
    let q = l.tree();
    let mut codes = vec![String::new(); q.vertex_count()];
    let mut order = q.preorder();
    order.reverse();
    for a in order {
        let mut parts: Vec<&str> = Vec::new();
        for &b in q.children(a) {
            let count = l.label(b).expect("non-root").weight();
            parts.extend(std::iter::repeat_n(codes[b].as_str(), count));
        }
        parts.sort_unstable();
        codes[a] = format!("({})", parts.concat());
    }
    codes
}

/// Assigns to each `Q`-child of `a` the children of `u` it receives: for each
/// `b`, `|λ^b|` of the not yet used children whose subtree code matches, lowest
/// ids first.
fn distribute_children(
    l: &PartitionTree,
    codes: &[String],
    t: &RootedTree,
    u: Vertex,
    a: Vertex,
) -> Option<Vec<(Vertex, Vec<Vertex>)>> {
    let q = l.tree();
    let mut pools: BTreeMap<&str, Vec<Vertex>> = BTreeMap::new();
    for &c in t.children(u).iter().rev() {
        pools.entry(t.code(c)).or_default().push(c);
    }
    let mut out = Vec::new();
    for &b in q.children(a) {
        let count = l.label(b).expect("non-root").weight();
        let pool = pools.get_mut(codes[b].as_str())?;
        if pool.len() < count {
            return None;
        }
        let taken: Vec<Vertex> = (0..count).map(|_| pool.pop().expect("checked length")).collect();
        out.push((b, taken));
    }
    pools.values().all(Vec::is_empty).then_some(out)
}

/// A realization `δ: T → Q` of `l` on the given tree, if one exists.
pub fn realize_on(l: &PartitionTree, t: &RootedTree) -> Result<TreeComposition> {
    let codes = realized_codes(l);
    if codes[0] != t.canonical_code() {
        return Err(Error::NotRealizable);
    }
    let mut map = vec![0; t.vertex_count()];
    let mut stack = vec![(0, 0)];
    while let Some((u, a)) = stack.pop() {
        map[u] = a;
        let assignment = distribute_children(l, &codes, t, u, a).ok_or(Error::NotRealizable)?;
        for (b, children) in assignment {
            stack.extend(children.into_iter().map(|c| (c, b)));
        }
    }
    TreeComposition::from_map(t, l.tree(), map)
}

/// A tree `T` realizing `l` (in canonical form) with its realization.
pub fn realize(l: &PartitionTree) -> (RootedTree, TreeComposition) {
    let codes = realized_codes(l);
    let t = parse_tree(&codes[0]).expect("realized code is a tree literal");
    let delta = realize_on(l, &t).expect("a tree of partitions is realized on its own realized tree");
    (t, delta)
}

/// True when `l` is realized on `t`.
pub fn is_in_par(l: &PartitionTree, t: &RootedTree) -> bool {
    realized_codes(l)[0] == t.canonical_code()
}

/// The compositional tree canonically attached to `l`: over each vertex of
/// `Q` labeled by `a`, every child `b` contributes `ℓ(λ^b)` children carrying
/// the parts of `λ^b`. Returns `P` and `α: P → Q`.
pub fn canonical_compositional_tree(l: &PartitionTree) -> (RootedTree, TreeComposition) {
    let q = l.tree();
    let mut parents: Vec<Option<Vertex>> = vec![None];
    let mut alpha: Vec<Vertex> = vec![0];
    fn grow(q: &RootedTree, l: &PartitionTree, x: Vertex, a: Vertex, parents: &mut Vec<Option<Vertex>>, alpha: &mut Vec<Vertex>) {
        for &b in q.children(a) {
            for _ in 0..l.label(b).expect("non-root").length() {
                let y = parents.len();
                parents.push(Some(x));
                alpha.push(b);
                grow(q, l, y, b, parents, alpha);
            }
        }
    }
    grow(q, l, 0, 0, &mut parents, &mut alpha);
    let p = RootedTree::from_parents(&parents).expect("compositional tree is a tree");
    let alpha = TreeComposition::from_map(&p, q, alpha).expect("canonical α is a tree composition");
    (p, alpha)
}

/// Builds `φ: T → P` whose quotient is `α` and whose tree of partitions is
/// `l`. Requires `α: P → Q` with `Q` the tree of `l` (same vertex ids) and
/// `|Ch(x) ∩ α⁻¹(b)| = ℓ(λ^b)` for every `x` over the parent of `b`.
///
/// Types are fixed once per `α`-class: on the lowest-id vertex of each class
/// the children over `b` receive the parts of `λ^b` in decreasing order by
/// id; other members copy them through an isomorphism compatible with `α`.
pub fn build_composition(
    l: &PartitionTree,
    t: &RootedTree,
    p: &RootedTree,
    alpha: &TreeComposition,
) -> Result<TreeComposition> {
    if alpha.codomain() != l.tree() {
        return Err(Error::CodomainMismatch);
    }
    if alpha.domain() != p {
        return Err(Error::DomainMismatch);
    }
    let q = l.tree();
    for b in q.vertices().skip(1) {
        if alpha.type_value(b) != l.label(b).expect("non-root").length() {
            return Err(Error::QuotientMismatch(format!(
                "vertex {b} of Q receives {} children per vertex but its label has {} parts",
                alpha.type_value(b),
                l.label(b).expect("non-root").length()
            )));
        }
    }
    if !is_in_par(l, t) {
        return Err(Error::NotRealizable);
    }

    // Types on P.
    let mut types = vec![0usize; p.vertex_count()];
    types[0] = 1;
    for x in p.preorder() {
        if p.is_leaf(x) {
            continue;
        }
        let a = alpha.apply(x);
        let rep = alpha.fiber(a)[0];
        if rep == x {
            for &b in q.children(a) {
                let parts = l.label(b).expect("non-root").parts();
                let over_b: Vec<Vertex> = p.children(x).iter().copied().filter(|&y| alpha.apply(y) == b).collect();
                for (y, &part) in over_b.into_iter().zip(parts) {
                    types[y] = part;
                }
            }
        } else {
            let sigma = lift(alpha, x, alpha, rep, &|z| Some(z)).ok_or_else(|| {
                Error::Internal("vertices in one α-fiber are not strictly equivalent".into())
            })?;
            for &y in p.children(x) {
                types[y] = types[sigma[&y]];
            }
        }
    }

    let codes = realized_codes(l);
    let mut map = vec![0; t.vertex_count()];
    let mut stack = vec![(0usize, 0usize)];
    while let Some((u, x)) = stack.pop() {
        map[u] = x;
        let a = alpha.apply(x);
        let assignment = distribute_children(l, &codes, t, u, a).ok_or(Error::NotRealizable)?;
        for (b, children) in assignment {
            let mut rest = children.as_slice();
            for &y in p.children(x).iter().filter(|&&y| alpha.apply(y) == b) {
                let (chunk, tail) = rest.split_at(types[y]);
                stack.extend(chunk.iter().map(|&c| (c, y)));
                rest = tail;
            }
        }
    }
    let phi = TreeComposition::from_map(t, p, map)?;
    let built = partition_tree_of(&phi);
    if built != *l {
        return Err(Error::Internal(format!("built composition has tree of partitions {built}, expected {l}")));
    }
    let own = quotient(&phi);
    if !same_fibers(&own.alpha, alpha) {
        return Err(Error::QuotientMismatch("α is not the quotient of the built composition".into()));
    }
    Ok(phi)
}

/// True when two maps out of the same tree induce the same partition of it.
pub fn same_fibers(a: &TreeComposition, b: &TreeComposition) -> bool {
    let mut forward: HashMap<Vertex, Vertex> = HashMap::new();
    let mut backward: HashMap<Vertex, Vertex> = HashMap::new();
    a.domain().vertices().all(|v| {
        let (x, y) = (a.apply(v), b.apply(v));
        *forward.entry(x).or_insert(y) == y && *backward.entry(y).or_insert(x) == x
    })
}

/// The composition attached to `l` on `t`: [`build_composition`] over the
/// canonical compositional tree.
pub fn canonical_composition(l: &PartitionTree, t: &RootedTree) -> Result<TreeComposition> {
    let (p, alpha) = canonical_compositional_tree(l);
    build_composition(l, t, &p, &alpha)
}

/// One element of `Par(T)` with a realization.
#[derive(Clone, Debug)]
pub struct ParEntry {
    pub partition_tree: PartitionTree,
    pub realization: TreeComposition,
}

/// `Par(T)` sorted in decreasing order, with the default size cap.
pub fn enumerate_par(t: &RootedTree) -> Result<Vec<ParEntry>> {
    enumerate_par_with_cap(t, DEFAULT_PAR_CAP)
}

/// `Par(T)` sorted in decreasing order. Fails before materializing anything
/// when the projected number of elements exceeds `cap`.
pub fn enumerate_par_with_cap(t: &RootedTree, cap: u64) -> Result<Vec<ParEntry>> {
    let needed = count_par(t);
    if needed > BigUint::from(cap) {
        return Err(Error::BudgetExceeded {
            what: "Par(T)",
            needed: needed.to_string(),
            budget: cap,
        });
    }
    let mut memo = HashMap::new();
    let nodes = par_nodes(t, 0, &mut memo);
    let mut entries: Vec<ParEntry> = nodes
        .iter()
        .map(|n| {
            let partition_tree = PartitionTree::from_node(n).expect("generated labeling is a tree of partitions");
            let realization = realize_on(&partition_tree, t).expect("generated labeling is realized on T");
            ParEntry {
                partition_tree,
                realization,
            }
        })
        .collect();
    entries.sort_by(|a, b| pt_compare(&b.partition_tree, &a.partition_tree));
    Ok(entries)
}

/// `|Par(T)|` computed without enumeration: each orbit class of first-level
/// subtrees with multiplicity `m` over `p` subtree labelings contributes the
/// coefficient of `x^m` in `(Σ_k p(k) x^k)^p`.
pub fn count_par(t: &RootedTree) -> BigUint {
    let mut memo: HashMap<String, BigUint> = HashMap::new();
    count_par_at(t, 0, &mut memo)
}

fn count_par_at(t: &RootedTree, u: Vertex, memo: &mut HashMap<String, BigUint>) -> BigUint {
    if let Some(c) = memo.get(t.code(u)) {
        return c.clone();
    }
    let (leaves, classes) = first_level_classes(t, u);
    let mut total = if leaves > 0 { partition_count(leaves) } else { BigUint::one() };
    for class in &classes {
        let p = count_par_at(t, class[0], memo);
        total *= weighted_choices(&p, class.len());
    }
    memo.insert(t.code(u).to_string(), total.clone());
    total
}

/// Coefficient of `x^m` in `(Σ_k p(k) x^k)^count`, by repeated squaring on
/// truncated series.
fn weighted_choices(count: &BigUint, m: usize) -> BigUint {
    let base: Vec<BigUint> = (0..=m).map(partition_count).collect();
    let mut result = vec![BigUint::zero(); m + 1];
    result[0] = BigUint::one();
    let mut power = base;
    let mut e = count.clone();
    let two = BigUint::from(2u32);
    while !e.is_zero() {
        if (&e % &two).is_one() {
            result = truncated_product(&result, &power, m);
        }
        e /= &two;
        if !e.is_zero() {
            power = truncated_product(&power, &power, m);
        }
    }
    result[m].clone()
}

fn truncated_product(a: &[BigUint], b: &[BigUint], m: usize) -> Vec<BigUint> {
    let mut out = vec![BigUint::zero(); m + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(m + 1 - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// Number of first-level leaves under `u` and the internal children grouped
/// by subtree code.
fn first_level_classes(t: &RootedTree, u: Vertex) -> (usize, Vec<Vec<Vertex>>) {
    let mut leaves = 0;
    let mut classes: Vec<Vec<Vertex>> = Vec::new();
    for &c in t.canonical_children(u) {
        if t.is_leaf(c) {
            leaves += 1;
            continue;
        }
        match classes.last_mut() {
            Some(last) if t.code(last[0]) == t.code(c) => last.push(c),
            _ => classes.push(vec![c]),
        }
    }
    (leaves, classes)
}

/// All trees of partitions realized on `T_u`, as nested nodes, memoized by
/// subtree code. For every orbit class of children the multiplicity is
/// distributed over distinct labelings of the class subtree, and each
/// positive share is refined by every partition of it.
fn par_nodes(t: &RootedTree, u: Vertex, memo: &mut HashMap<String, Rc<Vec<PtNode>>>) -> Rc<Vec<PtNode>> {
    if let Some(v) = memo.get(t.code(u)) {
        return Rc::clone(v);
    }
    let (leaves, classes) = first_level_classes(t, u);
    // Each factor is a list of alternative child groups.
    let mut factors: Vec<Vec<Vec<PtNode>>> = Vec::new();
    if leaves > 0 {
        factors.push(
            partitions_of(leaves)
                .into_iter()
                .map(|mu| {
                    vec![PtNode {
                        part: Some(mu),
                        children: Vec::new(),
                    }]
                })
                .collect(),
        );
    }
    for class in &classes {
        let sub = par_nodes(t, class[0], memo);
        let mut options = Vec::new();
        for weights in weak_compositions(class.len(), sub.len()) {
            let positive: Vec<(usize, usize)> = weights.iter().copied().enumerate().filter(|&(_, w)| w > 0).collect();
            let mut groups: Vec<Vec<PtNode>> = vec![Vec::new()];
            for (idx, w) in positive {
                let mut next = Vec::new();
                for g in &groups {
                    for lambda in partitions_of(w) {
                        let mut g2 = g.clone();
                        g2.push(PtNode {
                            part: Some(lambda),
                            children: sub[idx].children.clone(),
                        });
                        next.push(g2);
                    }
                }
                groups = next;
            }
            options.extend(groups);
        }
        factors.push(options);
    }
    let mut results: Vec<Vec<PtNode>> = vec![Vec::new()];
    for factor in &factors {
        let mut next = Vec::with_capacity(results.len() * factor.len());
        for r in &results {
            for option in factor {
                let mut combined = r.clone();
                combined.extend(option.iter().cloned());
                next.push(combined);
            }
        }
        results = next;
    }
    let nodes: Vec<PtNode> = results
        .into_iter()
        .map(|children| {
            let mut n = PtNode { part: None, children };
            n.canonicalize();
            n
        })
        .collect();
    let nodes = Rc::new(nodes);
    memo.insert(t.code(u).to_string(), Rc::clone(&nodes));
    nodes
}

/// All vectors of `slots` non-negative integers summing to `total`.
fn weak_compositions(total: usize, slots: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, slots: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            current.push(remaining);
            out.push(current.clone());
            current.pop();
            return;
        }
        for w in 0..=remaining {
            current.push(w);
            rec(remaining - w, slots - 1, current, out);
            current.pop();
        }
    }
    let mut out = Vec::new();
    if slots > 0 {
        rec(total, slots, &mut Vec::new(), &mut out);
    }
    out
}

/// Number of elements of `Par(T)` as a machine integer, when it fits.
pub fn par_size(t: &RootedTree) -> Option<u64> {
    count_par(t).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree_core::{spherically_homogeneous, trivial_composition, BranchingType};

    fn b(parts: &[usize]) -> RootedTree {
        spherically_homogeneous(&BranchingType::new(parts.to_vec()).unwrap())
    }

    fn p(parts: &[usize]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn pt(json: &str) -> PartitionTree {
        PartitionTree::from_json(json).unwrap()
    }

    #[test]
    fn partition_basics() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![]).is_err());
        assert_eq!(p(&[3, 1]).conjugate(), p(&[2, 1, 1]));
        assert_eq!(p(&[2, 1]).conjugate(), p(&[2, 1]));
        assert!(p(&[2]) > p(&[1, 1]));
        assert!(p(&[2, 1]) > p(&[2]));
        assert_eq!(partitions_of(4).len(), 5);
        assert_eq!(partition_count(10), BigUint::from(42u32));
        assert_eq!("(2,1)".parse::<Partition>().unwrap(), p(&[2, 1]));
    }

    #[test]
    fn partition_trees_of_tv_and_id() {
        let t = b(&[3, 2]);
        let (_, tv) = trivial_composition(&t);
        assert_eq!(partition_tree_of(&tv).canonical_form(), "[3[2[]]]");
        let id = TreeComposition::identity(&t);
        assert_eq!(partition_tree_of(&id).canonical_form(), "[1.1.1[1.1[]]]");
        assert_eq!(pt_transpose(&partition_tree_of(&tv)), partition_tree_of(&id));
    }

    #[test]
    fn validity() {
        let q = parse_tree("(()())").unwrap();
        assert!(!is_valid_partition_tree(&q, &[None, Some(p(&[2])), Some(p(&[1]))]));
        let q = parse_tree("((())(()))").unwrap();
        let labels = vec![None, Some(p(&[1])), Some(p(&[2])), Some(p(&[2])), Some(p(&[2]))];
        assert!(!is_valid_partition_tree(&q, &labels));
        let labels = vec![None, Some(p(&[1])), Some(p(&[2])), Some(p(&[1])), Some(p(&[1, 1]))];
        assert!(is_valid_partition_tree(&q, &labels));
    }

    #[test]
    fn order_examples() {
        let two = pt(r#"{"children":[{"part":[2]}]}"#);
        let one_one = pt(r#"{"children":[{"part":[1,1]}]}"#);
        let two_one = pt(r#"{"children":[{"part":[2,1]}]}"#);
        assert_eq!(pt_compare(&two, &one_one), Ordering::Greater);
        assert_eq!(pt_compare(&two_one, &two), Ordering::Greater);
        let tall = pt(r#"{"children":[{"part":[1],"children":[{"part":[1]}]}]}"#);
        assert_eq!(pt_compare(&tall, &two_one), Ordering::Greater);
    }

    #[test]
    fn json_round_trip_and_permuted_siblings() {
        let a = pt(r#"{"children":[{"part":[1],"children":[{"part":[2]}]},{"part":[1],"children":[{"part":[1,1]}]}]}"#);
        let b_ = pt(r#"{"children":[{"part":[1],"children":[{"part":[1,1]}]},{"part":[1],"children":[{"part":[2]}]}]}"#);
        assert_eq!(a, b_);
        assert_eq!(PartitionTree::from_json(&a.to_json()).unwrap(), a);
        assert_eq!(a.to_json(), r#"{"children":[{"part":[1],"children":[{"part":[2]}]},{"part":[1],"children":[{"part":[1,1]}]}]}"#);
    }

    #[test]
    fn binary_counts() {
        let counts: Vec<usize> = (1..=4).map(|h| enumerate_par(&b(&vec![2; h])).unwrap().len()).collect();
        assert_eq!(counts, vec![2, 5, 20, 230]);
        assert_eq!(count_par(&b(&[2, 2, 2, 2])), BigUint::from(230u32));
    }

    #[test]
    fn path_has_single_element() {
        let par = enumerate_par(&b(&[1, 1, 1])).unwrap();
        assert_eq!(par.len(), 1);
        assert_eq!(par[0].partition_tree.canonical_form(), "[1[1[1[]]]]");
    }

    #[test]
    fn realizations() {
        let tv_b2 = pt(r#"{"children":[{"part":[2],"children":[{"part":[2]}]}]}"#);
        let (t, delta) = realize(&tv_b2);
        assert_eq!(t.canonical_code(), b(&[2, 2]).canonical_code());
        assert_eq!(delta.codomain().vertex_count(), 3);
        assert!(is_in_par(&tv_b2, &b(&[2, 2])));
        assert!(!is_in_par(&tv_b2, &b(&[3])));
        let star = pt(r#"{"children":[{"part":[3]}]}"#);
        assert_eq!(realize(&star).0.canonical_code(), "(()()())");
    }

    #[test]
    fn cap_is_enforced() {
        let err = enumerate_par_with_cap(&b(&[2, 2, 2, 2]), 100).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { .. }));
    }

    #[test]
    fn canonical_composition_round_trip() {
        let t = b(&[2, 2]);
        for entry in enumerate_par(&t).unwrap() {
            let phi = canonical_composition(&entry.partition_tree, &t).unwrap();
            assert_eq!(partition_tree_of(&phi), entry.partition_tree);
        }
    }
}
