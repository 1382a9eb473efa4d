//! Many-sorted first-order terms and rewrite rules.

pub mod classify;
pub mod critical;
pub mod parse;
pub mod rewrite;

pub use classify::TrsClass;
pub use critical::CriticalPair;

use crate::circuit::Sort;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use thiserror::Error;

/// An operation symbol with its input sorts and output sort.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct OpDecl {
    pub name: String,
    pub inputs: Vec<Sort>,
    pub output: Sort,
}

impl OpDecl {
    pub fn arity(&self) -> usize {
        self.inputs.len()
    }
}

/// An ordered list of sorts and operation symbols.  Order is significant:
/// generated artifacts (gate sets, rule families) follow declaration order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Signature {
    sorts: Vec<Sort>,
    ops: Vec<OpDecl>,
    by_name: HashMap<String, usize>,
}

impl Signature {
    pub fn new(sorts: Vec<Sort>, ops: Vec<OpDecl>) -> Result<Self, TrsError> {
        let mut seen_sorts = std::collections::HashSet::new();
        for s in &sorts {
            if !seen_sorts.insert(s.clone()) {
                return Err(TrsError::DuplicateSort(s.as_str().to_string()));
            }
        }
        let mut by_name = HashMap::new();
        for (i, op) in ops.iter().enumerate() {
            if by_name.insert(op.name.clone(), i).is_some() {
                return Err(TrsError::DuplicateOp(op.name.clone()));
            }
            for s in op.inputs.iter().chain(std::iter::once(&op.output)) {
                if !seen_sorts.contains(s) {
                    return Err(TrsError::UnknownSort {
                        op: op.name.clone(),
                        sort: s.as_str().to_string(),
                    });
                }
            }
        }
        Ok(Signature {
            sorts,
            ops,
            by_name,
        })
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn ops(&self) -> &[OpDecl] {
        &self.ops
    }

    pub fn op(&self, name: &str) -> Option<&OpDecl> {
        self.by_name.get(name).map(|&i| &self.ops[i])
    }
}

/// A first-order term: a variable or an operation applied to arguments.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        Term::Var(name.into())
    }

    pub fn app(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Total number of nodes (operations and variables).
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Variable names in left-to-right occurrence order, with repetitions.
    pub fn var_occurrences(&self) -> Vec<&str> {
        let mut acc = Vec::new();
        self.collect_vars(&mut acc);
        acc
    }

    fn collect_vars<'a>(&'a self, acc: &mut Vec<&'a str>) {
        match self {
            Term::Var(x) => acc.push(x),
            Term::App(_, args) => {
                for a in args {
                    a.collect_vars(acc);
                }
            }
        }
    }

    /// Distinct variable names in order of first occurrence.
    pub fn vars_in_order(&self) -> Vec<&str> {
        let mut seen = std::collections::HashSet::new();
        self.var_occurrences()
            .into_iter()
            .filter(|x| seen.insert(*x))
            .collect()
    }

    /// Occurrence counts per variable name.
    pub fn var_counts(&self) -> BTreeMap<&str, u32> {
        let mut counts = BTreeMap::new();
        for x in self.var_occurrences() {
            *counts.entry(x).or_insert(0) += 1;
        }
        counts
    }

    /// All positions in preorder; a position is a path of argument indices.
    pub fn positions(&self) -> Vec<Vec<usize>> {
        let mut acc = Vec::new();
        self.collect_positions(&mut Vec::new(), &mut acc);
        acc
    }

    fn collect_positions(&self, here: &mut Vec<usize>, acc: &mut Vec<Vec<usize>>) {
        acc.push(here.clone());
        if let Term::App(_, args) = self {
            for (i, a) in args.iter().enumerate() {
                here.push(i);
                a.collect_positions(here, acc);
                here.pop();
            }
        }
    }

    pub fn subterm_at(&self, pos: &[usize]) -> Option<&Term> {
        match pos.split_first() {
            None => Some(self),
            Some((&i, rest)) => match self {
                Term::Var(_) => None,
                Term::App(_, args) => args.get(i)?.subterm_at(rest),
            },
        }
    }

    pub fn replace_at(&self, pos: &[usize], new: Term) -> Option<Term> {
        match pos.split_first() {
            None => Some(new),
            Some((&i, rest)) => match self {
                Term::Var(_) => None,
                Term::App(f, args) => {
                    let mut args = args.clone();
                    let slot = args.get_mut(i)?;
                    *slot = slot.replace_at(rest, new)?;
                    Some(Term::App(f.clone(), args))
                }
            },
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => f.write_str(x),
            Term::App(op, args) => {
                f.write_str(op)?;
                if !args.is_empty() {
                    write!(f, "(")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        write!(f, "{a}")?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

/// A named rewrite rule `lhs -> rhs`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Rule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
}

impl Rule {
    /// No variable occurs twice in the left-hand side.
    pub fn is_left_linear(&self) -> bool {
        self.lhs.var_counts().values().all(|&c| c == 1)
    }

    /// Both sides contain exactly the same variables, exactly once each.
    pub fn is_linear(&self) -> bool {
        let l = self.lhs.var_counts();
        let r = self.rhs.var_counts();
        l.values().all(|&c| c == 1) && r.values().all(|&c| c == 1) && l.keys().eq(r.keys())
    }

    /// Variables occur in the same left-to-right order on both sides.
    pub fn is_planar(&self) -> bool {
        self.lhs.var_occurrences() == self.rhs.var_occurrences()
    }

    /// No right-hand side variable occurs more often than on the left.
    pub fn is_non_duplicating(&self) -> bool {
        let l = self.lhs.var_counts();
        self.rhs
            .var_counts()
            .iter()
            .all(|(x, &c)| c <= l.get(x).copied().unwrap_or(0))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs)
    }
}

/// A validated term rewriting system.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trs {
    signature: Signature,
    rules: Vec<Rule>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TrsError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate sort {0}")]
    DuplicateSort(String),
    #[error("duplicate operation {0}")]
    DuplicateOp(String),
    #[error("operation {op} uses unknown sort {sort}")]
    UnknownSort { op: String, sort: String },
    #[error("duplicate rule name {0}")]
    DuplicateRule(String),
    #[error("rule {rule}: left-hand side is a bare variable")]
    LhsIsVariable { rule: String },
    #[error("rule {rule}: unknown operation {op}")]
    UnknownOp { rule: String, op: String },
    #[error("rule {rule}: operation {op} applied to {found} arguments, expects {expected}")]
    ArityMismatch {
        rule: String,
        op: String,
        expected: usize,
        found: usize,
    },
    #[error("rule {rule}: sort mismatch at {context}: expected {expected}, found {found}")]
    SortMismatch {
        rule: String,
        context: String,
        expected: String,
        found: String,
    },
    #[error("rule {rule}: right-hand side variable {var} does not occur on the left")]
    FreshRhsVar { rule: String, var: String },
    #[error("rule {rule}: variable {var} shadows an operation of the same name")]
    VariableShadowsOp { rule: String, var: String },
    #[error("rule {rule}: left-hand side repeats variable {var}; only left-linear systems are supported by translation")]
    NotLeftLinear { rule: String, var: String },
}

impl Trs {
    pub fn new(signature: Signature, rules: Vec<Rule>) -> Result<Self, TrsError> {
        let mut names = std::collections::HashSet::new();
        for rule in &rules {
            if !names.insert(rule.name.clone()) {
                return Err(TrsError::DuplicateRule(rule.name.clone()));
            }
            if rule.lhs.is_var() {
                return Err(TrsError::LhsIsVariable {
                    rule: rule.name.clone(),
                });
            }
            let mut env: HashMap<String, Sort> = HashMap::new();
            let lhs_sort = check_term(&signature, &rule.lhs, &mut env, true, &rule.name)?;
            let rhs_sort = check_term(&signature, &rule.rhs, &mut env, false, &rule.name)?;
            if lhs_sort != rhs_sort {
                return Err(TrsError::SortMismatch {
                    rule: rule.name.clone(),
                    context: "rule sides".into(),
                    expected: lhs_sort.as_str().to_string(),
                    found: rhs_sort.as_str().to_string(),
                });
            }
        }
        Ok(Trs { signature, rules })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    pub fn is_left_linear(&self) -> bool {
        self.rules.iter().all(Rule::is_left_linear)
    }

    /// The sort of each variable of a rule, inferred from the left-hand side.
    pub fn rule_var_sorts(&self, rule: &Rule) -> HashMap<String, Sort> {
        let mut env = HashMap::new();
        check_term(&self.signature, &rule.lhs, &mut env, true, &rule.name)
            .expect("rules validated at construction");
        env
    }

    /// The sort of a term, given variable sorts.
    pub fn term_sort(&self, term: &Term, env: &HashMap<String, Sort>) -> Option<Sort> {
        match term {
            Term::Var(x) => env.get(x).cloned(),
            Term::App(op, _) => Some(self.signature.op(op)?.output.clone()),
        }
    }
}

/// Infers/checks sorts through a term.  When `bind` is set, unseen variables
/// are added to `env`; otherwise they must already be bound.
fn check_term(
    sig: &Signature,
    term: &Term,
    env: &mut HashMap<String, Sort>,
    bind: bool,
    rule: &str,
) -> Result<Sort, TrsError> {
    fn go(
        sig: &Signature,
        term: &Term,
        expected: Option<&Sort>,
        env: &mut HashMap<String, Sort>,
        bind: bool,
        rule: &str,
    ) -> Result<Sort, TrsError> {
        match term {
            Term::Var(x) => {
                if sig.op(x).is_some() {
                    return Err(TrsError::VariableShadowsOp {
                        rule: rule.to_string(),
                        var: x.clone(),
                    });
                }
                let sort = match (env.get(x), expected) {
                    (Some(s), _) => s.clone(),
                    (None, Some(e)) if bind => {
                        env.insert(x.clone(), e.clone());
                        e.clone()
                    }
                    (None, _) => {
                        return Err(TrsError::FreshRhsVar {
                            rule: rule.to_string(),
                            var: x.clone(),
                        })
                    }
                };
                if let Some(e) = expected {
                    if &sort != e {
                        return Err(TrsError::SortMismatch {
                            rule: rule.to_string(),
                            context: format!("variable {x}"),
                            expected: e.as_str().to_string(),
                            found: sort.as_str().to_string(),
                        });
                    }
                }
                Ok(sort)
            }
            Term::App(op, args) => {
                let decl = sig.op(op).ok_or_else(|| TrsError::UnknownOp {
                    rule: rule.to_string(),
                    op: op.clone(),
                })?;
                if decl.arity() != args.len() {
                    return Err(TrsError::ArityMismatch {
                        rule: rule.to_string(),
                        op: op.clone(),
                        expected: decl.arity(),
                        found: args.len(),
                    });
                }
                let inputs = decl.inputs.clone();
                let output = decl.output.clone();
                for (a, want) in args.iter().zip(inputs.iter()) {
                    go(sig, a, Some(want), env, bind, rule)?;
                }
                if let Some(e) = expected {
                    if &output != e {
                        return Err(TrsError::SortMismatch {
                            rule: rule.to_string(),
                            context: format!("application of {op}"),
                            expected: e.as_str().to_string(),
                            found: output.as_str().to_string(),
                        });
                    }
                }
                Ok(output)
            }
        }
    }
    go(sig, term, None, env, bind, rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat() -> Sort {
        Sort::new("nat")
    }

    fn sig() -> Signature {
        Signature::new(
            vec![nat()],
            vec![
                OpDecl {
                    name: "0".into(),
                    inputs: vec![],
                    output: nat(),
                },
                OpDecl {
                    name: "s".into(),
                    inputs: vec![nat()],
                    output: nat(),
                },
                OpDecl {
                    name: "add".into(),
                    inputs: vec![nat(), nat()],
                    output: nat(),
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn validates_well_formed_rules() {
        let trs = Trs::new(
            sig(),
            vec![Rule {
                name: "r1".into(),
                lhs: Term::app("add", vec![Term::app("0", vec![]), Term::var("y")]),
                rhs: Term::var("y"),
            }],
        );
        assert!(trs.is_ok());
    }

    #[test]
    fn rejects_fresh_rhs_variable() {
        let err = Trs::new(
            sig(),
            vec![Rule {
                name: "r1".into(),
                lhs: Term::app("s", vec![Term::var("x")]),
                rhs: Term::var("z"),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, TrsError::FreshRhsVar { .. }));
    }

    #[test]
    fn rejects_arity_mismatch() {
        let err = Trs::new(
            sig(),
            vec![Rule {
                name: "r1".into(),
                lhs: Term::app("s", vec![Term::var("x"), Term::var("y")]),
                rhs: Term::var("x"),
            }],
        )
        .unwrap_err();
        assert!(matches!(err, TrsError::ArityMismatch { .. }));
    }

    #[test]
    fn accepts_non_left_linear_rules_for_classification() {
        let trs = Trs::new(
            sig(),
            vec![Rule {
                name: "r1".into(),
                lhs: Term::app("add", vec![Term::var("x"), Term::var("x")]),
                rhs: Term::var("x"),
            }],
        )
        .unwrap();
        assert!(!trs.is_left_linear());
    }

    #[test]
    fn term_position_navigation() {
        let t = Term::app("add", vec![Term::app("s", vec![Term::var("x")]), Term::var("y")]);
        assert_eq!(t.positions().len(), 4);
        assert_eq!(t.subterm_at(&[0, 0]), Some(&Term::var("x")));
        let t2 = t.replace_at(&[0, 0], Term::app("0", vec![])).unwrap();
        assert_eq!(t2.to_string(), "add(s(0),y)");
        assert_eq!(t.to_string(), "add(s(x),y)");
    }

    #[test]
    fn rule_shape_predicates() {
        let swap = Rule {
            name: "r".into(),
            lhs: Term::app("add", vec![Term::var("x"), Term::var("y")]),
            rhs: Term::app("add", vec![Term::var("y"), Term::var("x")]),
        };
        assert!(swap.is_linear());
        assert!(!swap.is_planar());
        assert!(swap.is_non_duplicating());
        let dup = Rule {
            name: "r".into(),
            lhs: Term::app("s", vec![Term::var("x")]),
            rhs: Term::app("add", vec![Term::var("x"), Term::var("x")]),
        };
        assert!(!dup.is_linear());
        assert!(!dup.is_planar());
        assert!(!dup.is_non_duplicating());
    }
}
