//! Command-line front end: trees of partitions, conjugacy classes,
//! representation dimensions, refinements, transposes and the acceptance
//! checks.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use serde_json::{json, Value};
use treerep::automorphism::{conjugacy_classes, orbit_tree, Automorphism, SerializedAutomorphism};
use treerep::composition::{quotient, SerializedMorphism, TreeComposition, TreeMorphism};
use treerep::oracle::{brute_conjugacy_classes, enumerate_aut, DEFAULT_BRUTE_BUDGET};
use treerep::partition_tree::{enumerate_par, partition_tree_of, PartitionTree};
use treerep::refinement::{coarsest_common_refinement, is_trivial_refinement, transpose_composition};
use treerep::representation::dimension_table;
use treerep::tree_core::{aut_order, parse_tree, parse_tree_or_shorthand, RootedTree};
use treerep::verify::{criterion, run_all, CriterionReport, CRITERION_COUNT};
use treerep::Error;

const EXIT_VALIDATION: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_USAGE: u8 = 64;

/// Trees of partitions, conjugacy classes and irreducible representations
/// of automorphism groups of finite rooted trees.
///
/// Trees are given as bracket literals such as "((()())(()()))" (vertices
/// numbered in preorder) or as "sph:r1,r2,..." for a spherically
/// homogeneous tree. Compositions are JSON objects
/// {"domain": literal, "codomain": literal, "map": [...]}, given inline or as
/// @path. Exit codes: 0 success, 1 validation failure, 2 budget exceeded,
/// 64 usage or parse error.
#[derive(Parser, Debug)]
#[command(name = "treerep", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Largest automorphism group enumerated by brute force.
    #[arg(long, global = true, default_value_t = DEFAULT_BRUTE_BUDGET)]
    budget: u64,
    /// Print machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List Par(T) in decreasing order.
    Par { tree: String },
    /// Conjugacy classes of Aut(T), one per tree of partitions.
    Classes {
        tree: String,
        /// Cross-check against brute-force conjugacy classes.
        #[arg(long)]
        verify: bool,
    },
    /// Dimensions of the irreducible representations of Aut(T).
    Dims { tree: String },
    /// Run the acceptance checks, or only the given one.
    Verify { criterion: Option<u8> },
    /// Coarsest common refinement of two compositions.
    Refine { phi: String, psi: String },
    /// A transpose of a composition.
    Transpose { phi: String },
    /// Orbit composition of an automorphism, given as a JSON image array or
    /// in cycle notation.
    OrbitTree { tree: String, automorphism: String },
    /// Order of Aut(T).
    AutOrder { tree: String },
    /// Quotient of a composition.
    Quotient { phi: String },
}

/// Failure of a command, mapped onto the exit code contract.
#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Library(#[from] Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Library(e) => match e {
                Error::Parse { .. } | Error::InvalidTree(_) | Error::InvalidBranching(_) | Error::InvalidPartition(_) => {
                    EXIT_USAGE
                }
                Error::BudgetExceeded { .. } => EXIT_BUDGET,
                _ => EXIT_VALIDATION,
            },
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err((out, e)) => {
            print!("{out}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// Runs a command. Output produced before a failure is returned with the
/// error so that reports are still printed.
fn run(cli: &Cli) -> std::result::Result<String, (String, CliError)> {
    let g = &cli.global;
    let plain = |r: CliResult<String>| r.map_err(|e| (String::new(), e));
    match &cli.command {
        Command::Par { tree } => plain(par(g, tree)),
        Command::Classes { tree, verify } => classes(g, tree, *verify),
        Command::Dims { tree } => plain(dims(g, tree)),
        Command::Verify { criterion } => verify(g, *criterion),
        Command::Refine { phi, psi } => plain(refine(g, phi, psi)),
        Command::Transpose { phi } => plain(transpose(g, phi)),
        Command::OrbitTree { tree, automorphism } => plain(orbit(g, tree, automorphism)),
        Command::AutOrder { tree } => plain(aut(g, tree)),
        Command::Quotient { phi } => plain(quotient_cmd(g, phi)),
    }
}

fn read_tree(text: &str) -> CliResult<RootedTree> {
    Ok(parse_tree_or_shorthand(text)?)
}

fn read_argument(text: &str) -> CliResult<String> {
    match text.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}"))),
        None => Ok(text.to_owned()),
    }
}

fn read_composition(text: &str) -> CliResult<TreeComposition> {
    let raw = read_argument(text)?;
    let s: SerializedMorphism =
        serde_json::from_str(&raw).map_err(|e| CliError::Usage(format!("invalid composition JSON: {e}")))?;
    let domain = parse_tree(&s.domain)?;
    let codomain = parse_tree(&s.codomain)?;
    Ok(TreeComposition::from_map(&domain, &codomain, s.map)?)
}

fn read_automorphism(t: &RootedTree, text: &str) -> CliResult<Automorphism> {
    let raw = read_argument(text)?;
    let trimmed = raw.trim();
    if trimmed.starts_with('[') {
        let s: SerializedAutomorphism =
            serde_json::from_str(trimmed).map_err(|e| CliError::Usage(format!("invalid automorphism JSON: {e}")))?;
        Ok(Automorphism::new(t, s.0)?)
    } else {
        Ok(Automorphism::from_cycles(t, trimmed)?)
    }
}

fn pt_value(l: &PartitionTree) -> Value {
    serde_json::to_value(l.to_node()).expect("partition tree serializes")
}

fn morphism_value(m: &TreeMorphism) -> Value {
    serde_json::to_value(m.to_serialized()).expect("morphism serializes")
}

fn render(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn par(g: &Global, tree: &str) -> CliResult<String> {
    let t = read_tree(tree)?;
    let par = enumerate_par(&t)?;
    if g.json {
        let list: Vec<Value> = par.iter().map(|e| pt_value(&e.partition_tree)).collect();
        return Ok(render(&json!({ "tree": t.to_literal(), "partition_trees": list })));
    }
    let mut out = format!("Par({}): {} trees of partitions\n", t.to_literal(), par.len());
    for (i, e) in par.iter().enumerate() {
        let l = &e.partition_tree;
        writeln!(out, "#{} {}", i + 1, l.to_json()).unwrap();
        out.push_str(&l.render_ascii());
    }
    Ok(out)
}

fn classes(g: &Global, tree: &str, verify: bool) -> std::result::Result<String, (String, CliError)> {
    let fail = |e: CliError| (String::new(), e);
    let t = read_tree(tree).map_err(fail)?;
    let classes = conjugacy_classes(&t, treerep::partition_tree::DEFAULT_PAR_CAP).map_err(|e| fail(e.into()))?;
    let group = if verify {
        Some(enumerate_aut(&t, g.budget).map_err(|e| fail(e.into()))?)
    } else {
        None
    };
    let sizes: Vec<Option<usize>> = classes
        .iter()
        .map(|c| group.as_ref().map(|gt| gt.class_size(gt.class_of(gt.index_of(&c.representative).expect("element")))))
        .collect();
    let mut problems = Vec::new();
    if let Some(gt) = &group {
        let brute = brute_conjugacy_classes(gt).len();
        if brute != classes.len() {
            problems.push(format!("{brute} brute-force classes, {} trees of partitions", classes.len()));
        }
        let mut seen: Vec<usize> = classes.iter().map(|c| gt.class_of(gt.index_of(&c.representative).expect("element"))).collect();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != classes.len() {
            problems.push("two representatives are conjugate".to_owned());
        }
        let total: usize = sizes.iter().flatten().sum();
        if total != gt.order() {
            problems.push(format!("class sizes sum to {total}, group order is {}", gt.order()));
        }
    }
    let out = if g.json {
        let rows: Vec<Value> = classes
            .iter()
            .zip(&sizes)
            .map(|(c, size)| {
                let mut row = json!({
                    "partition_tree": pt_value(&c.partition_tree),
                    "representative": c.representative.perm(),
                    "cycles": c.representative.to_cycles(),
                });
                if let Some(size) = size {
                    row["size"] = json!(size);
                }
                row
            })
            .collect();
        let mut doc = json!({ "tree": t.to_literal(), "classes": rows });
        if verify {
            doc["verified"] = json!(problems.is_empty());
        }
        render(&doc)
    } else {
        let mut out = format!("conjugacy classes of Aut({}): {}\n", t.to_literal(), classes.len());
        for (i, (c, size)) in classes.iter().zip(&sizes).enumerate() {
            write!(out, "#{} {} rep {}", i + 1, c.partition_tree.to_json(), c.representative.to_cycles()).unwrap();
            if let Some(size) = size {
                write!(out, " size {size}").unwrap();
            }
            out.push('\n');
        }
        if verify {
            match problems.is_empty() {
                true => out.push_str("brute-force check: ok\n"),
                false => writeln!(out, "brute-force check: FAILED ({})", problems.join("; ")).unwrap(),
            }
        }
        out
    };
    if problems.is_empty() {
        Ok(out)
    } else {
        Err((out, CliError::Validation(problems.join("; "))))
    }
}

fn dims(g: &Global, tree: &str) -> CliResult<String> {
    let t = read_tree(tree)?;
    let table = dimension_table(&t, treerep::partition_tree::DEFAULT_PAR_CAP)?;
    let sum: BigUint = table.iter().map(|e| &e.dimension * &e.dimension).sum();
    let order = aut_order(&t);
    if g.json {
        let rows: Vec<Value> = table
            .iter()
            .map(|e| {
                json!({
                    "partition_tree": pt_value(&e.partition_tree),
                    "dimension": e.dimension.to_string(),
                    "perm_module_dim": e.perm_module_dim.to_string(),
                })
            })
            .collect();
        return Ok(render(&json!({
            "tree": t.to_literal(),
            "dimensions": rows,
            "sum_of_squares": sum.to_string(),
            "group_order": order.to_string(),
        })));
    }
    let mut out = format!("irreducible representations of Aut({}): {}\n", t.to_literal(), table.len());
    for e in &table {
        writeln!(out, "{}  dim {}  perm {}", e.partition_tree.to_json(), e.dimension, e.perm_module_dim).unwrap();
    }
    writeln!(out, "sum of squared dimensions: {sum} = |Aut(T)| = {order}").unwrap();
    Ok(out)
}

fn verify(g: &Global, which: Option<u8>) -> std::result::Result<String, (String, CliError)> {
    let reports: Vec<CriterionReport> = match which {
        Some(n) => vec![criterion(n).ok_or_else(|| {
            (String::new(), CliError::Usage(format!("no criterion {n}; criteria are 1 to {CRITERION_COUNT}")))
        })?],
        None => run_all(),
    };
    let failed = reports.iter().filter(|r| !r.passed).count();
    let out = if g.json {
        let rows: Vec<Value> = reports
            .iter()
            .map(|r| json!({ "criterion": r.number, "title": r.title, "passed": r.passed, "detail": r.detail }))
            .collect();
        render(&json!({ "criteria": rows, "failed": failed }))
    } else {
        // Timings stay out of the text so that output is stable across runs.
        let mut out: String = reports
            .iter()
            .map(|r| format!("criterion {:>2}: {} {} ({})\n", r.number, if r.passed { "PASS" } else { "FAIL" }, r.title, r.detail))
            .collect();
        writeln!(out, "{} passed, {failed} failed", reports.len() - failed).unwrap();
        out
    };
    match failed {
        0 => Ok(out),
        _ => Err((out, CliError::Validation(format!("{failed} criteria failed")))),
    }
}

fn refine(g: &Global, phi: &str, psi: &str) -> CliResult<String> {
    let phi = read_composition(phi)?;
    let psi = read_composition(psi)?;
    let d = coarsest_common_refinement(&phi, &psi)?;
    let trivial = is_trivial_refinement(&d);
    if g.json {
        let mut doc = serde_json::to_value(d.to_serialized()).expect("diagram serializes");
        doc["trivial"] = json!(trivial);
        return Ok(render(&doc));
    }
    let mut out = format!("refining tree: {}\n", d.refining_tree().to_literal());
    writeln!(out, "rho: {}", morphism_value(d.rho.morphism())).unwrap();
    writeln!(out, "theta: {}", morphism_value(&d.theta)).unwrap();
    writeln!(out, "tau: {}", morphism_value(&d.tau)).unwrap();
    writeln!(out, "trivial: {}", if trivial { "yes" } else { "no" }).unwrap();
    Ok(out)
}

fn transpose(g: &Global, phi: &str) -> CliResult<String> {
    let phi = read_composition(phi)?;
    let tr = transpose_composition(&phi)?;
    let l = partition_tree_of(&tr.composition);
    if g.json {
        return Ok(render(&json!({
            "composition": morphism_value(tr.composition.morphism()),
            "quotient": morphism_value(tr.quotient.morphism()),
            "partition_tree": pt_value(&l),
        })));
    }
    let mut out = format!("transpose: {}\n", morphism_value(tr.composition.morphism()));
    writeln!(out, "quotient: {}", morphism_value(tr.quotient.morphism())).unwrap();
    writeln!(out, "tree of partitions: {}", l.to_json()).unwrap();
    out.push_str(&l.render_ascii());
    Ok(out)
}

fn orbit(g: &Global, tree: &str, automorphism: &str) -> CliResult<String> {
    let t = read_tree(tree)?;
    let h = read_automorphism(&t, automorphism)?;
    let (p, phi) = orbit_tree(&h);
    let l = partition_tree_of(&phi);
    if g.json {
        return Ok(render(&json!({
            "orbit_tree": p.to_literal(),
            "composition": morphism_value(phi.morphism()),
            "partition_tree": pt_value(&l),
        })));
    }
    let mut out = format!("orbit tree: {}\n", p.to_literal());
    writeln!(out, "composition: {}", morphism_value(phi.morphism())).unwrap();
    writeln!(out, "tree of partitions: {}", l.to_json()).unwrap();
    Ok(out)
}

fn aut(g: &Global, tree: &str) -> CliResult<String> {
    let t = read_tree(tree)?;
    let order = aut_order(&t);
    if g.json {
        return Ok(render(&json!({ "tree": t.to_literal(), "aut_order": order.to_string() })));
    }
    Ok(format!("{order}\n"))
}

fn quotient_cmd(g: &Global, phi: &str) -> CliResult<String> {
    let phi = read_composition(phi)?;
    let q = quotient(&phi);
    if g.json {
        return Ok(render(&json!({
            "quotient_tree": q.tree.to_literal(),
            "alpha": morphism_value(q.alpha.morphism()),
        })));
    }
    let mut out = format!("quotient tree: {}\n", q.tree.to_literal());
    writeln!(out, "alpha: {}", morphism_value(q.alpha.morphism())).unwrap();
    Ok(out)
}
