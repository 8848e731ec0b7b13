//! Exhaustive checks over families of small trees, one per acceptance
//! criterion. Each check cross-validates the structural algorithms against
//! the brute-force oracle.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::automorphism::{are_conjugate, automorphism_from_composition, class_invariant, orbit_tree, sign};
use crate::composition::{is_quotient_of, quotient, TreeComposition};
use crate::error::Result;
use crate::oracle::{
    act_map, brute_conjugacy_classes, char_inner_product, composition_orbit, coset_representatives, enumerate_aut,
    perm_character_table, sign_induced_character_table, sign_induced_character_with, stabilizer, GroupTable,
};
use crate::partition_tree::{
    canonical_composition, enumerate_par, partition_tree_of, pt_compare, pt_transpose, same_fibers, PartitionTree,
};
use crate::refinement::{
    coarsest_common_refinement, has_01_intersection, is_trivial_refinement, refinement_class_count_in,
    stabilizer_orbit_representatives, transpose_composition,
};
use crate::representation::sum_of_squared_dimensions;
use crate::tree_core::{all_trees, aut_order, spherically_homogeneous, trivial_composition, BranchingType, RootedTree};

/// Largest vertex count of the exhaustive tree family.
pub const MAX_VERTICES: usize = 9;
/// Largest group order for the class bijection and refinement checks.
pub const CLASS_ORDER_LIMIT: u64 = 10_000;
/// Largest group order for the character checks.
pub const CHARACTER_ORDER_LIMIT: u64 = 2_000;
/// Largest group order for the pairwise conjugacy and sign checks.
pub const PAIRWISE_ORDER_LIMIT: u64 = 1_000;
/// Below this order `are_conjugate` is called on every pair directly.
const DIRECT_PAIR_LIMIT: u64 = 128;

pub const CRITERION_COUNT: u8 = 11;

/// Outcome of one criterion.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub number: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2}: {} {} ({}; {:.2} s)",
            self.number,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(violations: usize, detail: String) -> Self {
        Outcome {
            passed: violations == 0,
            detail: if violations == 0 { detail } else { format!("{violations} violations; {detail}") },
        }
    }
}

fn run(number: u8, title: &'static str, limit: Option<Duration>, check: impl FnOnce() -> Result<Outcome>) -> CriterionReport {
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let (mut passed, mut detail) = match result {
        Ok(o) => (o.passed, o.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if elapsed > limit {
            passed = false;
            detail = format!("{detail}; exceeded {} s", limit.as_secs());
        }
    }
    CriterionReport {
        number,
        title,
        passed,
        detail,
        elapsed,
    }
}

fn whole(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn order_of(t: &RootedTree) -> u64 {
    aut_order(t).to_u64().unwrap_or(u64::MAX)
}

fn sph(parts: &[usize]) -> RootedTree {
    spherically_homogeneous(&BranchingType::new(parts.to_vec()).expect("positive branching"))
}

/// Every tree with at most [`MAX_VERTICES`] vertices whose automorphism
/// group has order at most [`CLASS_ORDER_LIMIT`].
pub fn exhaustive_trees() -> Vec<RootedTree> {
    (1..=MAX_VERTICES)
        .flat_map(all_trees)
        .filter(|t| order_of(t) <= CLASS_ORDER_LIMIT)
        .collect()
}

/// Spherically homogeneous trees with more than [`MAX_VERTICES`] vertices
/// added to the character and pairwise families.
fn larger_trees(max_order: u64) -> Vec<RootedTree> {
    [vec![3, 2], vec![2, 2, 2], vec![3, 3]]
        .iter()
        .map(|p| sph(p))
        .filter(|t| order_of(t) <= max_order)
        .collect()
}

/// Trees of the exhaustive family with order at most `max_order`, followed
/// by the larger spherically homogeneous trees within that order.
pub fn trees_up_to_order(max_order: u64) -> Vec<RootedTree> {
    let mut trees: Vec<RootedTree> = exhaustive_trees().into_iter().filter(|t| order_of(t) <= max_order).collect();
    trees.extend(larger_trees(max_order));
    trees
}

/// Spherically homogeneous trees of height at most 2 with branching at most
/// 3, and of height 3 with branching at most 2.
pub fn spherical_family() -> Vec<RootedTree> {
    let mut types: Vec<Vec<usize>> = Vec::new();
    for a in 1..=3 {
        types.push(vec![a]);
        for b in 1..=3 {
            types.push(vec![a, b]);
        }
    }
    for a in 1..=2 {
        for b in 1..=2 {
            for c in 1..=2 {
                types.push(vec![a, b, c]);
            }
        }
    }
    types.iter().map(|p| sph(p)).collect()
}

/// Every tree of partitions of `t` with its attached composition.
fn attached(t: &RootedTree) -> Result<Vec<(PartitionTree, TreeComposition)>> {
    enumerate_par(t)?
        .into_iter()
        .map(|e| {
            let phi = canonical_composition(&e.partition_tree, t)?;
            Ok((e.partition_tree, phi))
        })
        .collect()
}

/// Binary trees of heights 1 to 4 have 2, 5, 20 and 230 trees of partitions.
pub fn criterion_1() -> CriterionReport {
    run(1, "binary Par counts", Some(Duration::from_secs(5)), || {
        let expected = [2usize, 5, 20, 230];
        let mut got = Vec::new();
        for h in 1..=4 {
            got.push(enumerate_par(&sph(&vec![2; h]))?.len());
        }
        let violations = got.iter().zip(&expected).filter(|(a, b)| a != b).count();
        Ok(Outcome::new(violations, format!("counts {got:?}")))
    })
}

/// Brute-force classes are in bijection with `Par(T)` through the class
/// invariant.
pub fn criterion_2() -> CriterionReport {
    run(2, "class bijection", Some(Duration::from_secs(60)), || {
        let trees = exhaustive_trees();
        let mut violations = 0;
        let mut total_classes = 0;
        for t in &trees {
            let g = enumerate_aut(t, CLASS_ORDER_LIMIT)?;
            let classes = brute_conjugacy_classes(&g);
            let par: BTreeSet<String> = enumerate_par(t)?
                .into_iter()
                .map(|e| e.partition_tree.canonical_form().to_owned())
                .collect();
            total_classes += classes.len();
            if classes.len() != par.len() {
                violations += 1;
                continue;
            }
            let mut keys = BTreeSet::new();
            for class in &classes {
                let class_keys: BTreeSet<String> = class
                    .iter()
                    .map(|&i| class_invariant(g.element(i)).canonical_form().to_owned())
                    .collect();
                if class_keys.len() != 1 {
                    violations += 1;
                }
                keys.extend(class_keys);
            }
            if keys != par {
                violations += 1;
            }
        }
        Ok(Outcome::new(violations, format!("{} trees, {total_classes} classes", trees.len())))
    })
}

/// The squared dimensions sum to the group order.
pub fn criterion_3() -> CriterionReport {
    run(3, "sum of squared dimensions", Some(Duration::from_secs(10)), || {
        let mut trees = exhaustive_trees();
        trees.extend(spherical_family());
        let mut violations = 0;
        let mut largest = BigUint::default();
        for t in &trees {
            let order = aut_order(t);
            if sum_of_squared_dimensions(t, crate::partition_tree::DEFAULT_PAR_CAP)? != order {
                violations += 1;
            }
            largest = largest.max(order);
        }
        Ok(Outcome::new(violations, format!("{} trees, largest order {largest}", trees.len())))
    })
}

/// `M^φ` and the sign-induced module of `φ^t` share exactly one constituent.
pub fn criterion_4() -> CriterionReport {
    run(4, "multiplicity one", None, || {
        let trees = trees_up_to_order(CHARACTER_ORDER_LIMIT);
        let mut violations = 0;
        let mut checked = 0;
        for t in &trees {
            let g = enumerate_aut(t, CHARACTER_ORDER_LIMIT)?;
            for (_, phi) in attached(t)? {
                let tr = transpose_composition(&phi)?;
                let ip = char_inner_product(&perm_character_table(&phi, &g), &sign_induced_character_table(&tr.composition, &g), &g);
                if ip != whole(1) {
                    violations += 1;
                }
                checked += 1;
            }
        }
        Ok(Outcome::new(violations, format!("{} trees, {checked} trees of partitions", trees.len())))
    })
}

/// Inner products of permutation and sign-induced modules count refinement
/// classes.
pub fn criterion_5() -> CriterionReport {
    run(5, "Mackey counts", None, || {
        let trees = trees_up_to_order(CHARACTER_ORDER_LIMIT);
        let mut violations = 0;
        let mut pairs = 0;
        for t in &trees {
            let g = enumerate_aut(t, CHARACTER_ORDER_LIMIT)?;
            let comps: Vec<TreeComposition> = attached(t)?.into_iter().map(|(_, phi)| phi).collect();
            let perm: Vec<_> = comps.iter().map(|c| perm_character_table(c, &g)).collect();
            let signed: Vec<_> = comps.iter().map(|c| sign_induced_character_table(c, &g)).collect();
            for (i, phi) in comps.iter().enumerate() {
                for (j, psi) in comps.iter().enumerate() {
                    let counts = refinement_class_count_in(phi, psi, &g)?;
                    if char_inner_product(&perm[i], &perm[j], &g) != whole(counts.total) {
                        violations += 1;
                    }
                    if char_inner_product(&perm[i], &signed[j], &g) != whole(counts.trivial) {
                        violations += 1;
                    }
                    pairs += 1;
                }
            }
        }
        Ok(Outcome::new(violations, format!("{} trees, {pairs} pairs", trees.len())))
    })
}

/// `are_conjugate` matches exhaustive conjugation, and every composition in
/// an orbit is the orbit composition of the automorphism built from it.
pub fn criterion_6() -> CriterionReport {
    run(6, "conjugacy oracle agreement", None, || {
        let trees = trees_up_to_order(PAIRWISE_ORDER_LIMIT);
        let mut violations = 0;
        let mut element_pairs = 0u64;
        let mut orbit_points = 0u64;
        for t in &trees {
            let g = enumerate_aut(t, PAIRWISE_ORDER_LIMIT)?;
            let n = g.order();
            if n as u64 <= DIRECT_PAIR_LIMIT {
                for a in 0..n {
                    for b in 0..n {
                        if are_conjugate(g.element(a), g.element(b))? != (g.class_of(a) == g.class_of(b)) {
                            violations += 1;
                        }
                    }
                }
            } else {
                let mut ids: HashMap<String, usize> = HashMap::new();
                let keys: Vec<usize> = g
                    .elements()
                    .iter()
                    .map(|e| {
                        let next = ids.len();
                        *ids.entry(class_invariant(e).canonical_form().to_owned()).or_insert(next)
                    })
                    .collect();
                for a in 0..n {
                    for b in 0..n {
                        if (keys[a] == keys[b]) != (g.class_of(a) == g.class_of(b)) {
                            violations += 1;
                        }
                    }
                }
            }
            element_pairs += (n * n) as u64;
            for (_, phi) in attached(t)? {
                for m in composition_orbit(&phi, &g) {
                    let psi = TreeComposition::from_map(t, phi.codomain(), m)?;
                    let h = automorphism_from_composition(&psi)?;
                    if !same_fibers(&orbit_tree(&h).1, &psi) {
                        violations += 1;
                    }
                    orbit_points += 1;
                }
            }
        }
        Ok(Outcome::new(
            violations,
            format!("{} trees, {element_pairs} element pairs, {orbit_points} orbit compositions", trees.len()),
        ))
    })
}

/// The transpose shares the quotient tree and realization, has the
/// conjugate tree of partitions and meets `φ` in at most one vertex per
/// fiber pair.
pub fn criterion_7() -> CriterionReport {
    run(7, "transpose contract", None, || {
        let trees = exhaustive_trees();
        let mut violations = 0;
        let mut checked = 0;
        for t in &trees {
            for (l, phi) in attached(t)? {
                let tr = transpose_composition(&phi)?;
                let q = quotient(&phi);
                let ok = tr.quotient.codomain() == &q.tree
                    && is_quotient_of(&tr.quotient, &tr.composition)
                    && t.vertices().all(|v| tr.quotient.apply(tr.composition.apply(v)) == q.alpha.apply(phi.apply(v)))
                    && partition_tree_of(&tr.composition) == pt_transpose(&l)
                    && has_01_intersection(&phi, &tr.composition)?;
                if !ok {
                    violations += 1;
                }
                checked += 1;
            }
        }
        Ok(Outcome::new(violations, format!("{} trees, {checked} transposes", trees.len())))
    })
}

/// Calls `visit(Λ, Ξ, φ_Λ, ψ, K_Λ)` for every tree of the exhaustive family,
/// every pair of trees of partitions and one `ψ` per orbit of the
/// stabilizer `K_Λ` of `φ_Λ` on the orbit of `φ_Ξ`.
fn scan_pairs(
    mut visit: impl FnMut(&GroupTable, &PartitionTree, &PartitionTree, &TreeComposition, &TreeComposition, &[usize]) -> Result<()>,
) -> Result<usize> {
    let trees = exhaustive_trees();
    for t in &trees {
        let g = enumerate_aut(t, CLASS_ORDER_LIMIT)?;
        let comps = attached(t)?;
        for (l, phi) in &comps {
            let k = stabilizer(phi, &g);
            for (x, psi) in &comps {
                for rep in stabilizer_orbit_representatives(phi, psi, &g)? {
                    visit(&g, l, x, phi, &rep, &k)?;
                }
            }
        }
    }
    Ok(trees.len())
}

/// Pairs with trivial coarsest common refinement satisfy `φ ≤ ψ^t` and
/// `ψ ≤ φ^t`.
pub fn criterion_8() -> CriterionReport {
    run(8, "Gale-Ryser direction", None, || {
        let mut violations = 0;
        let mut pairs = 0;
        let mut trivial = 0;
        let mut transposes: HashMap<String, PartitionTree> = HashMap::new();
        let mut transpose_of = |l: &PartitionTree, t: &RootedTree| -> Result<PartitionTree> {
            if let Some(x) = transposes.get(l.canonical_form()) {
                return Ok(x.clone());
            }
            let tr = partition_tree_of(&transpose_composition(&canonical_composition(l, t)?)?.composition);
            transposes.insert(l.canonical_form().to_owned(), tr.clone());
            Ok(tr)
        };
        let trees = scan_pairs(|g, l, x, phi, psi, _| {
            pairs += 1;
            if is_trivial_refinement(&coarsest_common_refinement(phi, psi)?) {
                trivial += 1;
                let lt = transpose_of(l, g.tree())?;
                let xt = transpose_of(x, g.tree())?;
                if pt_compare(l, &xt) == Ordering::Greater || pt_compare(x, &lt) == Ordering::Greater {
                    violations += 1;
                }
            }
            Ok(())
        })?;
        Ok(Outcome::new(violations, format!("{trees} trees, {trivial} trivial of {pairs} pair classes")))
    })
}

/// `pt_compare` is a total order in which greater height wins.
pub fn criterion_9() -> CriterionReport {
    run(9, "order laws", None, || {
        let trees = exhaustive_trees();
        let mut violations = 0;
        let mut triples = 0u64;
        let mut pool: BTreeSet<PartitionTree> = BTreeSet::new();
        let mut pool_list: Vec<PartitionTree> = Vec::new();
        for t in &trees {
            let par: Vec<PartitionTree> = enumerate_par(t)?.into_iter().map(|e| e.partition_tree).collect();
            for a in &par {
                for b in &par {
                    let ab = pt_compare(a, b);
                    if ab != pt_compare(b, a).reverse() || (ab == Ordering::Equal) != (a.canonical_form() == b.canonical_form()) {
                        violations += 1;
                    }
                    for c in &par {
                        if ab != Ordering::Greater && pt_compare(b, c) != Ordering::Greater && pt_compare(a, c) == Ordering::Greater {
                            violations += 1;
                        }
                        triples += 1;
                    }
                }
            }
            for l in par {
                if !pool_list.iter().any(|p| p.canonical_form() == l.canonical_form()) {
                    pool_list.push(l.clone());
                }
                pool.insert(l);
            }
        }
        // Sorted by the order itself: every earlier element must compare
        // strictly less, which makes the order total and transitive on the
        // whole pool.
        let sorted: Vec<&PartitionTree> = pool.iter().collect();
        if sorted.len() != pool_list.len() {
            violations += 1;
        }
        for (i, a) in sorted.iter().enumerate() {
            for b in &sorted[i + 1..] {
                if pt_compare(a, b) != Ordering::Less {
                    violations += 1;
                }
                if a.height() > b.height() {
                    violations += 1;
                }
            }
        }
        Ok(Outcome::new(
            violations,
            format!("{} trees, {triples} triples, pool of {}", trees.len(), sorted.len()),
        ))
    })
}

/// The sign is multiplicative and is the character induced from the sign of
/// the full group.
pub fn criterion_10() -> CriterionReport {
    run(10, "sign homomorphism", None, || {
        let trees = trees_up_to_order(PAIRWISE_ORDER_LIMIT);
        let mut violations = 0;
        let mut products = 0u64;
        for t in &trees {
            let g = enumerate_aut(t, PAIRWISE_ORDER_LIMIT)?;
            let signs: Vec<i8> = g.elements().iter().map(sign).collect();
            for a in 0..g.order() {
                for b in 0..g.order() {
                    if signs[g.multiply(a, b)] != signs[a] * signs[b] {
                        violations += 1;
                    }
                }
            }
            products += (g.order() * g.order()) as u64;
            let (_, tv) = trivial_composition(t);
            let reps = coset_representatives(&tv, &g);
            for (h, &s) in g.elements().iter().zip(&signs) {
                if sign_induced_character_with(&tv, h, &reps, &g) != i64::from(s) {
                    violations += 1;
                }
            }
        }
        Ok(Outcome::new(violations, format!("{} trees, {products} products", trees.len())))
    })
}

/// The coarsest common refinement is trivial exactly when only the identity
/// fixes both compositions.
pub fn criterion_11() -> CriterionReport {
    run(11, "joint stabilizer equivalence", None, || {
        let mut violations = 0;
        let mut pairs = 0;
        let mut trivial = 0;
        let trees = scan_pairs(|g, _, _, phi, psi, k| {
            pairs += 1;
            let structural = is_trivial_refinement(&coarsest_common_refinement(phi, psi)?);
            let brute = k
                .iter()
                .map(|&i| g.element(i))
                .filter(|h| !h.is_identity())
                .all(|h| act_map(h, psi.map()) != psi.map());
            if structural != brute {
                violations += 1;
            }
            trivial += usize::from(structural);
            Ok(())
        })?;
        Ok(Outcome::new(violations, format!("{trees} trees, {trivial} trivial of {pairs} pair classes")))
    })
}

/// Runs criterion `n`.
pub fn criterion(n: u8) -> Option<CriterionReport> {
    Some(match n {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        9 => criterion_9(),
        10 => criterion_10(),
        11 => criterion_11(),
        _ => return None,
    })
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionReport> {
    (1..=CRITERION_COUNT).filter_map(criterion).collect()
}
