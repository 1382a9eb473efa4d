//! Fixtures and independent oracles shared by the integration suites.
//!
//! The oracles here recompute expected values from first principles —
//! counting variable occurrences on raw terms, evaluating polynomials point
//! by point, replaying every rewrite order — so the suites compare the
//! library against code that shares none of its internals.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use polyterm::circuit::{OnePath, Sort, TwoPath};
use polyterm::engine::find_redexes;
use polyterm::interp::poly::Poly;
use polyterm::interp::Interpretation;
use polyterm::translation::{CellSelection, GateSet, ThreeCell};
use polyterm::trs::parse::parse_trs;
use polyterm::trs::{Term, Trs};

pub const DIVISION: &str = include_str!("../fixtures/division.trs");
pub const DOUBLE: &str = include_str!("../fixtures/double.trs");
pub const DIVISION_INTERP: &str = include_str!("../fixtures/division_interp.json");
pub const DOUBLE_INTERP: &str = include_str!("../fixtures/double_interp.json");

pub fn division() -> Trs {
    parse_trs(DIVISION).expect("the division fixture parses")
}

pub fn double() -> Trs {
    parse_trs(DOUBLE).expect("the double fixture parses")
}

pub fn division_interp(trs: &Trs) -> Interpretation {
    let gates = GateSet::new(trs.signature());
    let json: serde_json::Value =
        serde_json::from_str(DIVISION_INTERP).expect("the fixture is valid JSON");
    Interpretation::load(&gates, &json).expect("the division interpretation loads")
}

pub fn double_interp(trs: &Trs) -> Interpretation {
    let gates = GateSet::new(trs.signature());
    let json: serde_json::Value =
        serde_json::from_str(DOUBLE_INTERP).expect("the fixture is valid JSON");
    Interpretation::load(&gates, &json).expect("the double interpretation loads")
}

/// Resource-management rules only: gate pushes plus the laws among the
/// resource gates themselves.
pub fn resource_rules() -> CellSelection {
    CellSelection {
        computation: false,
        structure_law: true,
        constructor_push: true,
        function_push: true,
        push_filter: None,
    }
}

/// Gate-push rules only (no laws among the resource gates).
pub fn push_rules() -> CellSelection {
    CellSelection {
        computation: false,
        structure_law: false,
        constructor_push: true,
        function_push: true,
        push_filter: None,
    }
}

/// Constructor-push rules only.
pub fn constructor_push_rules() -> CellSelection {
    CellSelection {
        computation: false,
        structure_law: false,
        constructor_push: true,
        function_push: false,
        push_filter: None,
    }
}

/// Evaluates `p` at the point `x1 = point[0], x2 = point[1], …` by walking
/// the monomials directly; absent variables read as 0 via the default.
pub fn eval_poly_at(p: &Poly, point: &[u64]) -> u64 {
    let value_of = |name: &str| -> u64 {
        let index: usize = name
            .strip_prefix('x')
            .and_then(|n| n.parse().ok())
            .expect("oracle polynomials use x1..xk");
        point.get(index - 1).copied().unwrap_or(0)
    };
    let mut total: u64 = 0;
    for (mono, coeff) in p.terms() {
        let mut product = coeff;
        for (var, exp) in mono.factors() {
            for _ in 0..*exp {
                product = product.saturating_mul(value_of(var));
            }
        }
        total = total.saturating_add(product);
    }
    total
}

/// Every point of the grid `{0..=max}^dims`, in lexicographic order.
pub fn grid_points(dims: usize, max: u64) -> Vec<Vec<u64>> {
    let mut points = vec![vec![]];
    for _ in 0..dims {
        let mut next = Vec::new();
        for p in &points {
            for v in 0..=max {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        points = next;
    }
    points
}

/// Independent copy-count table: for every operation heading a rule and every
/// argument position, the most copies any rule makes of a variable found in
/// that argument.  Works on raw terms only.
pub fn occurrence_oracle(trs: &Trs) -> BTreeMap<String, Vec<u32>> {
    fn count(term: &Term, var: &str) -> u32 {
        match term {
            Term::Var(v) => u32::from(v == var),
            Term::App(_, args) => args.iter().map(|a| count(a, var)).sum(),
        }
    }
    fn vars_of(term: &Term, out: &mut Vec<String>) {
        match term {
            Term::Var(v) => out.push(v.clone()),
            Term::App(_, args) => args.iter().for_each(|a| vars_of(a, out)),
        }
    }

    let mut table: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for rule in trs.rules() {
        let Term::App(op, args) = &rule.lhs else {
            continue;
        };
        let row = table
            .entry(op.clone())
            .or_insert_with(|| vec![0; args.len()]);
        for (i, arg) in args.iter().enumerate() {
            let mut vars = Vec::new();
            vars_of(arg, &mut vars);
            let worst = vars
                .iter()
                .map(|v| count(&rule.rhs, v))
                .max()
                .unwrap_or(0);
            row[i] = row[i].max(worst);
        }
    }
    table
}

/// All circuits over `gates` with at most `max_nodes` gates and interface
/// widths at most `max_width`, enumerated breadth-first from identity wires
/// and deduplicated up to deformation; stops after `cap` distinct circuits.
pub fn circuit_corpus(
    gates: &GateSet,
    max_nodes: usize,
    max_width: usize,
    cap: usize,
) -> Vec<TwoPath> {
    let sort = gates.sorts()[0].clone();
    let widths = |n: usize| OnePath::from_sorts(vec![sort.clone(); n]);

    let mut corpus: Vec<TwoPath> = Vec::new();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut queue: VecDeque<TwoPath> = VecDeque::new();
    for start in 0..=max_width {
        let id = TwoPath::identity(widths(start));
        if seen.insert(id.canonical_key()) {
            corpus.push(id.clone());
            queue.push_back(id);
        }
    }

    let shapes = gates.all();
    while let Some(circuit) = queue.pop_front() {
        if corpus.len() >= cap {
            break;
        }
        if circuit.node_count() >= max_nodes {
            continue;
        }
        let width = circuit.target().len();
        for decl in &shapes {
            if decl.arity() > width {
                continue;
            }
            let grown = width - decl.arity() + decl.coarity();
            if grown > max_width {
                continue;
            }
            for offset in 0..=(width - decl.arity()) {
                let layer = TwoPath::identity(widths(offset))
                    .compose0(&TwoPath::generator(decl.clone()))
                    .compose0(&TwoPath::identity(widths(width - decl.arity() - offset)));
                let next = circuit
                    .compose1(&layer)
                    .expect("the layer matches the circuit's output interface");
                if seen.insert(next.canonical_key()) {
                    corpus.push(next.clone());
                    queue.push_back(next);
                    if corpus.len() >= cap {
                        return corpus;
                    }
                }
            }
        }
    }
    corpus
}

/// Replays *every* reduction order from `start` and returns the canonical
/// keys of all normal forms reached.  Deformation-equal intermediates are
/// explored once via the memo.
pub fn all_normal_forms(
    start: &TwoPath,
    cells: &[ThreeCell],
    memo: &mut BTreeMap<String, BTreeSet<String>>,
) -> BTreeSet<String> {
    let key = start.canonical_key();
    if let Some(found) = memo.get(&key) {
        return found.clone();
    }
    // Seed the entry to guard against cycles: a looping reduction would
    // yield an empty set and fail the caller's singleton assertion.
    memo.insert(key.clone(), BTreeSet::new());
    let matches = find_redexes(start, cells);
    let result: BTreeSet<String> = if matches.is_empty() {
        std::iter::once(key.clone()).collect()
    } else {
        let mut out = BTreeSet::new();
        for m in &matches {
            out.extend(all_normal_forms(&m.apply(), cells, memo));
        }
        out
    };
    memo.insert(key, result.clone());
    result
}

/// Flattens the size-bounded ground terms of every sort into one list.
pub fn ground_term_pool(trs: &Trs, max_size: usize) -> Vec<Term> {
    polyterm::trs::rewrite::ground_terms(trs.signature(), max_size)
        .into_values()
        .flatten()
        .collect()
}

/// The single sort used by the unsorted fixtures.
pub fn wire() -> Sort {
    Sort::new("o")
}
