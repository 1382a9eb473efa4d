//! Syntactic classification of a rewriting system, driving the choice of
//! proof obligations.

use super::{Term, Trs};
use crate::circuit::StructClass;
use std::collections::{BTreeMap, BTreeSet};

/// Shape flags and derived tables for a rewriting system.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TrsClass {
    /// No variable occurs twice in any left-hand side.
    pub left_linear: bool,
    /// Every rule's two sides contain the same variables, exactly once each.
    pub linear: bool,
    /// Variables occur in the same left-to-right order on both sides of
    /// every rule.
    pub planar: bool,
    /// No right-hand side repeats a variable beyond its left count.
    pub non_duplicating: bool,
    /// Left-linear, the operations split into functions and constructors,
    /// and all rules are pairwise weakly orthogonal.
    pub functional_program: bool,
    /// Operations that never head a left-hand side.
    pub constructors: BTreeSet<String>,
    /// Operations heading at least one left-hand side.
    pub functions: BTreeSet<String>,
    /// Resource-management gate shapes that no translated rule side needs.
    pub unused_structure: BTreeSet<StructClass>,
    /// Per function, per argument position: the largest number of times a
    /// variable of that argument is copied by any rule rooted there.
    pub k_table: BTreeMap<String, Vec<u32>>,
}

/// Computes every classification flag and table.
pub fn classify(trs: &Trs) -> TrsClass {
    let left_linear = trs.rules().iter().all(|r| r.is_left_linear());
    let linear = trs.rules().iter().all(|r| r.is_linear());
    let planar = trs.rules().iter().all(|r| r.is_planar());
    let non_duplicating = trs.rules().iter().all(|r| r.is_non_duplicating());

    let functions = lhs_root_ops(trs);
    let constructors: BTreeSet<String> = trs
        .signature()
        .ops()
        .iter()
        .map(|op| op.name.clone())
        .filter(|name| !functions.contains(name))
        .collect();
    // The split is only a valid program shape when no function symbol occurs
    // strictly inside a left-hand side.
    let partition_ok = trs.rules().iter().all(|rule| {
        let Term::App(_, args) = &rule.lhs else {
            return false;
        };
        args.iter().all(|arg| ops_in(arg).iter().all(|op| !functions.contains(*op)))
    });
    let functional_program =
        left_linear && partition_ok && super::critical::is_weakly_orthogonal(trs);

    let used = crate::translation::used_structure(trs);
    let unused_structure = [StructClass::Swap, StructClass::Dup, StructClass::Erase]
        .into_iter()
        .filter(|c| !used.contains(c))
        .collect();

    TrsClass {
        left_linear,
        linear,
        planar,
        non_duplicating,
        functional_program,
        constructors,
        functions,
        unused_structure,
        k_table: k_table(trs),
    }
}

/// Operation names appearing at the root of some left-hand side.
fn lhs_root_ops(trs: &Trs) -> BTreeSet<String> {
    trs.rules()
        .iter()
        .filter_map(|r| match &r.lhs {
            Term::App(op, _) => Some(op.clone()),
            Term::Var(_) => None,
        })
        .collect()
}

fn ops_in(term: &Term) -> BTreeSet<&str> {
    let mut acc = BTreeSet::new();
    fn go<'a>(t: &'a Term, acc: &mut BTreeSet<&'a str>) {
        if let Term::App(op, args) = t {
            acc.insert(op.as_str());
            for a in args {
                go(a, acc);
            }
        }
    }
    go(term, &mut acc);
    acc
}

/// Copy counts: for each left-hand-side root symbol and argument position,
/// the maximum over rules of (the maximum over that argument's variables of
/// the number of occurrences in the right-hand side).  The maximum over an
/// empty variable set is 0.
pub fn k_table(trs: &Trs) -> BTreeMap<String, Vec<u32>> {
    let mut table: BTreeMap<String, Vec<u32>> = BTreeMap::new();
    for rule in trs.rules() {
        let Term::App(phi, args) = &rule.lhs else {
            continue;
        };
        let entry = table
            .entry(phi.clone())
            .or_insert_with(|| vec![0; args.len()]);
        let rhs_counts = rule.rhs.var_counts();
        for (i, arg) in args.iter().enumerate() {
            let per_rule = arg
                .vars_in_order()
                .iter()
                .map(|v| rhs_counts.get(*v).copied().unwrap_or(0))
                .max()
                .unwrap_or(0);
            entry[i] = entry[i].max(per_rule);
        }
    }
    table
}

impl TrsClass {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "left_linear": self.left_linear,
            "linear": self.linear,
            "planar": self.planar,
            "non_duplicating": self.non_duplicating,
            "functional_program": self.functional_program,
            "constructors": self.constructors.iter().collect::<Vec<_>>(),
            "functions": self.functions.iter().collect::<Vec<_>>(),
            "unused_structure": self.unused_structure.iter()
                .map(|c| c.to_string()).collect::<Vec<_>>(),
            "k_table": self.k_table.iter()
                .map(|(f, ks)| (f.clone(), serde_json::json!(ks)))
                .collect::<serde_json::Map<String, serde_json::Value>>(),
        })
    }
}
