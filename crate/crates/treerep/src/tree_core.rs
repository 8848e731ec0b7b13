//! Finite rooted trees: construction, parsing, canonical codes, isomorphism,
//! the order of the automorphism group and the trivial composition.
//!
//! Vertices are dense integer ids with the root at `0`. Child lists are kept
//! in increasing id order; trees produced by [`parse_tree`] and
//! [`spherically_homogeneous`] are numbered in preorder, so printing a tree
//! with [`RootedTree::to_literal`] and parsing it back reproduces the same ids.
//!
//! The canonical code of a vertex is the AHU encoding of its subtree: the
//! concatenation of the sorted codes of its children, wrapped in parentheses.
//! It uses the same alphabet as the tree-literal grammar, so the canonical
//! code of the root is itself a tree literal.

use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;

use crate::composition::{TreeComposition, TreeMorphism};
use crate::error::{Error, Result};

/// Vertex id inside a [`RootedTree`].
pub type Vertex = usize;

/// A finite rooted tree with dense vertex ids and the root at `0`.
///
/// Cloning is cheap: the vertex data is shared.
#[derive(Clone)]
pub struct RootedTree {
    inner: Arc<TreeData>,
}

struct TreeData {
    parent: Vec<Option<Vertex>>,
    children: Vec<Vec<Vertex>>,
    canonical_children: Vec<Vec<Vertex>>,
    level: Vec<usize>,
    code: Vec<Arc<str>>,
    height: usize,
}

impl RootedTree {
    /// Builds a tree from a parent array. `parents[0]` must be `None` and every
    /// other vertex must reach the root.
    pub fn from_parents(parents: &[Option<Vertex>]) -> Result<Self> {
        let n = parents.len();
        if n == 0 {
            return Err(Error::InvalidTree("a tree needs at least one vertex".into()));
        }
        if parents[0].is_some() {
            return Err(Error::InvalidTree("vertex 0 must be the root".into()));
        }
        let mut children = vec![Vec::new(); n];
        for (v, p) in parents.iter().enumerate().skip(1) {
            match *p {
                None => {
                    return Err(Error::InvalidTree(format!("vertex {v} has no parent")));
                }
                Some(p) if p >= n || p == v => {
                    return Err(Error::InvalidTree(format!("vertex {v} has invalid parent {p}")));
                }
                Some(p) => children[p].push(v),
            }
        }
        // Breadth-first order from the root; detects cycles and disconnected parts.
        let mut order = Vec::with_capacity(n);
        let mut level = vec![usize::MAX; n];
        level[0] = 0;
        order.push(0);
        let mut head = 0;
        while head < order.len() {
            let u = order[head];
            head += 1;
            for &c in &children[u] {
                level[c] = level[u] + 1;
                order.push(c);
            }
        }
        if order.len() != n {
            return Err(Error::InvalidTree("parent array contains a cycle".into()));
        }
        let mut code: Vec<Arc<str>> = vec![Arc::from(""); n];
        for &u in order.iter().rev() {
            let mut parts: Vec<&str> = children[u].iter().map(|&c| &*code[c]).collect();
            parts.sort_unstable();
            let mut s = String::with_capacity(2 + parts.iter().map(|p| p.len()).sum::<usize>());
            s.push('(');
            for p in parts {
                s.push_str(p);
            }
            s.push(')');
            code[u] = Arc::from(s);
        }
        let canonical_children = children
            .iter()
            .map(|ch| {
                let mut sorted = ch.clone();
                sorted.sort_by(|&a, &b| code[a].cmp(&code[b]).then(a.cmp(&b)));
                sorted
            })
            .collect();
        let height = level.iter().copied().max().unwrap_or(0);
        Ok(Self {
            inner: Arc::new(TreeData {
                parent: parents.to_vec(),
                children,
                canonical_children,
                level,
                code,
                height,
            }),
        })
    }

    /// The tree with a single vertex.
    pub fn singleton() -> Self {
        Self::from_parents(&[None]).expect("single vertex is a tree")
    }

    pub fn vertex_count(&self) -> usize {
        self.inner.parent.len()
    }

    pub fn root(&self) -> Vertex {
        0
    }

    pub fn vertices(&self) -> std::ops::Range<Vertex> {
        0..self.vertex_count()
    }

    pub fn parent(&self, v: Vertex) -> Option<Vertex> {
        self.inner.parent[v]
    }

    pub fn parents(&self) -> &[Option<Vertex>] {
        &self.inner.parent
    }

    /// Children of `v` in increasing id order.
    pub fn children(&self, v: Vertex) -> &[Vertex] {
        &self.inner.children[v]
    }

    /// Children of `v` sorted by canonical code, ties broken by id.
    pub fn canonical_children(&self, v: Vertex) -> &[Vertex] {
        &self.inner.canonical_children[v]
    }

    pub fn is_leaf(&self, v: Vertex) -> bool {
        self.inner.children[v].is_empty()
    }

    pub fn level(&self, v: Vertex) -> usize {
        self.inner.level[v]
    }

    /// Length of the longest path starting at the root.
    pub fn height(&self) -> usize {
        self.inner.height
    }

    /// Height of the subtree rooted at `v`.
    pub fn subtree_height(&self, v: Vertex) -> usize {
        self.children(v)
            .iter()
            .map(|&c| 1 + self.subtree_height(c))
            .max()
            .unwrap_or(0)
    }

    /// Canonical code of the subtree rooted at `v`.
    pub fn code(&self, v: Vertex) -> &str {
        &self.inner.code[v]
    }

    /// Canonical code of the whole tree; a tree literal in canonical form.
    pub fn canonical_code(&self) -> &str {
        self.code(0)
    }

    /// The first-level vertices (children of the root).
    pub fn first_level(&self) -> &[Vertex] {
        self.children(0)
    }

    /// The first-level vertices that are leaves.
    pub fn first_level_leaves(&self) -> Vec<Vertex> {
        self.first_level().iter().copied().filter(|&v| self.is_leaf(v)).collect()
    }

    /// Vertices of the subtree rooted at `v`, in preorder with children in id order.
    pub fn descendants(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in self.children(u).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Vertices of the subtree rooted at `v` in canonical preorder: children
    /// visited in the order of [`RootedTree::canonical_children`].
    pub fn canonical_preorder(&self, v: Vertex) -> Vec<Vertex> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            out.push(u);
            for &c in self.canonical_children(u).iter().rev() {
                stack.push(c);
            }
        }
        out
    }

    /// Whole-tree preorder with children in id order.
    pub fn preorder(&self) -> Vec<Vertex> {
        self.descendants(0)
    }

    /// True when vertex ids coincide with preorder positions.
    pub fn is_preorder_numbered(&self) -> bool {
        self.preorder().iter().enumerate().all(|(i, &v)| i == v)
    }

    /// Renumbers the vertices in preorder. Returns the new tree and the map
    /// from old ids to new ids.
    pub fn relabel_preorder(&self) -> (RootedTree, Vec<Vertex>) {
        let order = self.preorder();
        let mut new_id = vec![0; self.vertex_count()];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }
        let parents: Vec<Option<Vertex>> = order
            .iter()
            .map(|&v| self.parent(v).map(|p| new_id[p]))
            .collect();
        let tree = RootedTree::from_parents(&parents).expect("relabeling preserves tree shape");
        (tree, new_id)
    }

    /// The subtree rooted at `v` as a standalone tree, numbered in preorder.
    /// The returned vector maps new ids to the original ids.
    pub fn subtree(&self, v: Vertex) -> (RootedTree, Vec<Vertex>) {
        let order = self.descendants(v);
        let mut local = HashMap::with_capacity(order.len());
        for (i, &u) in order.iter().enumerate() {
            local.insert(u, i);
        }
        let parents: Vec<Option<Vertex>> = order
            .iter()
            .map(|&u| if u == v { None } else { self.parent(u).map(|p| local[&p]) })
            .collect();
        let tree = RootedTree::from_parents(&parents).expect("subtree of a tree is a tree");
        (tree, order)
    }

    /// Tree literal with children in id order.
    pub fn to_literal(&self) -> String {
        let mut out = String::with_capacity(2 * self.vertex_count());
        self.write_literal(0, &mut out);
        out
    }

    fn write_literal(&self, v: Vertex, out: &mut String) {
        out.push('(');
        for &c in self.children(v) {
            self.write_literal(c, out);
        }
        out.push(')');
    }

    /// The canonical isomorphism from the subtree at `from` onto the subtree
    /// at `to` (possibly in another tree): canonical preorders matched
    /// position by position. `None` when the subtrees are not isomorphic.
    pub fn canonical_identification(
        &self,
        from: Vertex,
        other: &RootedTree,
        to: Vertex,
    ) -> Option<Vec<(Vertex, Vertex)>> {
        if self.code(from) != other.code(to) {
            return None;
        }
        let a = self.canonical_preorder(from);
        let b = other.canonical_preorder(to);
        Some(a.into_iter().zip(b).collect())
    }
}

impl PartialEq for RootedTree {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.parent == other.inner.parent
    }
}

impl Eq for RootedTree {}

impl Hash for RootedTree {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.inner.parent.hash(state);
    }
}

impl fmt::Display for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl fmt::Debug for RootedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RootedTree({})", self.to_literal())
    }
}

impl FromStr for RootedTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_tree(s)
    }
}

/// Parses a tree literal `tree := "(" tree* ")"`, whitespace ignored.
/// Vertices are numbered in preorder of the text.
pub fn parse_tree(text: &str) -> Result<RootedTree> {
    let mut parents: Vec<Option<Vertex>> = Vec::new();
    let mut stack: Vec<Vertex> = Vec::new();
    let mut closed_root = false;
    for (pos, ch) in text.char_indices() {
        match ch {
            c if c.is_whitespace() => {}
            '(' => {
                if closed_root {
                    return Err(Error::Parse {
                        position: pos,
                        message: "text continues after the root was closed".into(),
                    });
                }
                let id = parents.len();
                parents.push(stack.last().copied());
                stack.push(id);
            }
            ')' => {
                if stack.pop().is_none() {
                    return Err(Error::Parse {
                        position: pos,
                        message: "unbalanced ')'".into(),
                    });
                }
                if stack.is_empty() {
                    closed_root = true;
                }
            }
            other => {
                return Err(Error::Parse {
                    position: pos,
                    message: format!("unexpected character {other:?}"),
                });
            }
        }
    }
    if parents.is_empty() {
        return Err(Error::Parse {
            position: text.len(),
            message: "empty input".into(),
        });
    }
    if !stack.is_empty() {
        return Err(Error::Parse {
            position: text.len(),
            message: format!("{} unclosed '('", stack.len()),
        });
    }
    RootedTree::from_parents(&parents)
}

/// Parses either a tree literal or the shorthand `sph:r1,r2,...` for a
/// spherically homogeneous tree.
pub fn parse_tree_or_shorthand(text: &str) -> Result<RootedTree> {
    let trimmed = text.trim();
    match trimmed.strip_prefix("sph:") {
        Some(rest) => {
            let r: BranchingType = rest.parse()?;
            Ok(spherically_homogeneous(&r))
        }
        None => parse_tree(trimmed),
    }
}

/// Branching type `(r_1, ..., r_h)` of a spherically homogeneous tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BranchingType(Vec<usize>);

impl BranchingType {
    pub fn new(parts: Vec<usize>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidBranching("branching type must be non-empty".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidBranching("every part must be at least 1".into()));
        }
        Ok(Self(parts))
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn height(&self) -> usize {
        self.0.len()
    }
}

impl FromStr for BranchingType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidBranching(format!("cannot read {p:?} as a positive integer")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(parts)
    }
}

impl fmt::Display for BranchingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        f.write_str(&s.join(","))
    }
}

/// The spherically homogeneous tree of branching type `r`: every vertex at
/// level `k-1` has `r_k` children. Numbered in preorder.
pub fn spherically_homogeneous(r: &BranchingType) -> RootedTree {
    fn grow(parents: &mut Vec<Option<Vertex>>, parent: Vertex, rest: &[usize]) {
        if let Some((&first, tail)) = rest.split_first() {
            for _ in 0..first {
                let id = parents.len();
                parents.push(Some(parent));
                grow(parents, id, tail);
            }
        }
    }
    let mut parents = vec![None];
    grow(&mut parents, 0, r.parts());
    RootedTree::from_parents(&parents).expect("spherically homogeneous tree is well formed")
}

/// Decides rooted-tree isomorphism by comparing canonical codes.
pub fn is_isomorphic(a: &RootedTree, b: &RootedTree) -> bool {
    a.canonical_code() == b.canonical_code()
}

/// Order of the automorphism group, computed from the first-level
/// decomposition: each isomorphism class of children with multiplicity `m`
/// and subtree group order `k` contributes `m! * k^m`.
pub fn aut_order(t: &RootedTree) -> BigUint {
    subtree_aut_order(t, t.root())
}

/// Order of the automorphism group of the subtree rooted at `v`.
pub fn subtree_aut_order(t: &RootedTree, v: Vertex) -> BigUint {
    let mut order = vec![BigUint::one(); t.vertex_count()];
    let mut post = t.descendants(v);
    post.reverse();
    for u in post {
        let mut acc = BigUint::one();
        for class in children_classes(t, u) {
            let m = class.len();
            acc *= factorial(m) * order[class[0]].pow(m as u32);
        }
        order[u] = acc;
    }
    order[v].clone()
}

/// Children of `v` grouped into isomorphism classes, classes ordered by
/// canonical code and members by id.
pub fn children_classes(t: &RootedTree, v: Vertex) -> Vec<Vec<Vertex>> {
    let mut classes: Vec<Vec<Vertex>> = Vec::new();
    for &c in t.canonical_children(v) {
        match classes.last_mut() {
            Some(last) if t.code(last[0]) == t.code(c) => last.push(c),
            _ => classes.push(vec![c]),
        }
    }
    classes
}

pub(crate) fn factorial(n: usize) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * BigUint::from(k))
}

/// The trivial composition `tv: T -> C` sending every vertex to its
/// `Aut(T)`-orbit. Two vertices share an orbit exactly when the canonical
/// codes along their root paths agree level by level.
pub fn trivial_composition(t: &RootedTree) -> (RootedTree, TreeComposition) {
    let n = t.vertex_count();
    let mut map = vec![0; n];
    let mut c_parents: Vec<Option<Vertex>> = vec![None];
    let mut index: HashMap<(Vertex, &str), Vertex> = HashMap::new();
    for u in t.preorder() {
        if let Some(p) = t.parent(u) {
            let key = (map[p], t.code(u));
            let next = c_parents.len();
            let id = *index.entry(key).or_insert(next);
            if id == next {
                c_parents.push(Some(map[p]));
            }
            map[u] = id;
        }
    }
    let c = RootedTree::from_parents(&c_parents).expect("orbit tree is a tree");
    let morphism = TreeMorphism::new(t.clone(), c.clone(), map).expect("orbit map is a homomorphism");
    let tv = TreeComposition::new(morphism).expect("orbit map is a tree composition");
    (c, tv)
}

/// All rooted trees with exactly `n` vertices up to isomorphism, in canonical
/// form, sorted by canonical code.
pub fn all_trees(n: usize) -> Vec<RootedTree> {
    let mut by_size: Vec<Vec<String>> = vec![Vec::new(); n + 1];
    if n == 0 {
        return Vec::new();
    }
    by_size[1].push("()".to_string());
    for size in 2..=n {
        // Forests of total size `size - 1` as non-increasing sequences of
        // (size, index) pairs, which enumerates each multiset once.
        let mut forests: Vec<Vec<(usize, usize)>> = Vec::new();
        let mut current = Vec::new();
        forest_rec(&by_size, size - 1, (usize::MAX, usize::MAX), &mut current, &mut forests);
        let mut codes: Vec<String> = forests
            .into_iter()
            .map(|f| {
                let mut parts: Vec<&str> = f.iter().map(|&(s, i)| by_size[s][i].as_str()).collect();
                parts.sort_unstable();
                format!("({})", parts.concat())
            })
            .collect();
        codes.sort();
        codes.dedup();
        by_size[size] = codes;
    }
    by_size[n]
        .iter()
        .map(|c| parse_tree(c).expect("generated code parses"))
        .collect()
}

fn forest_rec(
    by_size: &[Vec<String>],
    remaining: usize,
    bound: (usize, usize),
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for s in (1..=remaining.min(bound.0)).rev() {
        let max_index = if s == bound.0 { bound.1 } else { usize::MAX };
        for i in 0..by_size[s].len() {
            if i > max_index {
                break;
            }
            current.push((s, i));
            forest_rec(by_size, remaining - s, (s, i), current, out);
            current.pop();
        }
    }
}
