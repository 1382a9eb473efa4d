//! Overlap analysis: unification, critical pairs, weak orthogonality.

use super::rewrite::{apply_subst, Subst};
use super::{Term, Trs};

/// Most general unifier of two terms, if any.
pub fn unify(a: &Term, b: &Term) -> Option<Subst> {
    let mut subst = Subst::new();
    let mut work = vec![(a.clone(), b.clone())];
    while let Some((l, r)) = work.pop() {
        let l = apply_subst(&l, &subst);
        let r = apply_subst(&r, &subst);
        match (l, r) {
            (Term::Var(x), Term::Var(y)) if x == y => {}
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if occurs(&x, &t) {
                    return None;
                }
                for bound in subst.values_mut() {
                    let mut one = Subst::new();
                    one.insert(x.clone(), t.clone());
                    *bound = apply_subst(bound, &one);
                }
                subst.insert(x, t);
            }
            (Term::App(f, fa), Term::App(g, ga)) => {
                if f != g || fa.len() != ga.len() {
                    return None;
                }
                work.extend(fa.into_iter().zip(ga));
            }
        }
    }
    Some(subst)
}

fn occurs(x: &str, t: &Term) -> bool {
    match t {
        Term::Var(y) => x == y,
        Term::App(_, args) => args.iter().any(|a| occurs(x, a)),
    }
}

/// An overlap between two rules: rewriting the peak at the root with the
/// outer rule yields `outer_result`; rewriting at `position` with the inner
/// rule yields `inner_result`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CriticalPair {
    pub outer_rule: String,
    pub inner_rule: String,
    /// 0-based argument path into the outer left-hand side.
    pub position: Vec<usize>,
    pub peak: Term,
    pub outer_result: Term,
    pub inner_result: Term,
}

impl CriticalPair {
    pub fn is_trivial(&self) -> bool {
        self.outer_result == self.inner_result
    }
}

/// Renders a position in the conventional 1-based dotted notation.
pub fn display_position(pos: &[usize]) -> String {
    if pos.is_empty() {
        "root".to_string()
    } else {
        pos.iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(".")
    }
}

fn rename_vars(term: &Term, suffix: &str) -> Term {
    match term {
        Term::Var(x) => Term::Var(format!("{x}{suffix}")),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| rename_vars(a, suffix)).collect(),
        ),
    }
}

/// A suffix that cannot collide with any variable already in use: longer
/// than every variable name occurring in the system.
fn fresh_suffixes(trs: &Trs) -> (String, String) {
    let longest = trs
        .rules()
        .iter()
        .flat_map(|r| r.lhs.var_occurrences())
        .map(str::len)
        .max()
        .unwrap_or(0);
    let pad = "'".repeat(longest + 1);
    (format!("{pad}1"), format!("{pad}2"))
}

/// All critical pairs of the system.
///
/// Overlaps at the root are reported once per unordered rule pair (a rule is
/// never overlapped with itself at the root); overlaps strictly inside a
/// left-hand side are reported for every ordered pair, including a rule with
/// itself.
pub fn critical_pairs(trs: &Trs) -> Vec<CriticalPair> {
    let (sfx_outer, sfx_inner) = fresh_suffixes(trs);
    let mut pairs = Vec::new();
    let rules = trs.rules();
    for (oi, outer) in rules.iter().enumerate() {
        let outer_lhs = rename_vars(&outer.lhs, &sfx_outer);
        let outer_rhs = rename_vars(&outer.rhs, &sfx_outer);
        for position in outer_lhs.positions() {
            let sub = outer_lhs.subterm_at(&position).expect("enumerated");
            if sub.is_var() {
                continue;
            }
            for (ii, inner) in rules.iter().enumerate() {
                if position.is_empty() && oi >= ii {
                    // Root overlaps: skip self, count each unordered pair once.
                    continue;
                }
                let inner_lhs = rename_vars(&inner.lhs, &sfx_inner);
                let inner_rhs = rename_vars(&inner.rhs, &sfx_inner);
                let Some(mgu) = unify(sub, &inner_lhs) else {
                    continue;
                };
                let peak = apply_subst(&outer_lhs, &mgu);
                let outer_result = apply_subst(&outer_rhs, &mgu);
                let inner_result = peak
                    .replace_at(&position, apply_subst(&inner_rhs, &mgu))
                    .expect("position is inside the peak");
                pairs.push(CriticalPair {
                    outer_rule: outer.name.clone(),
                    inner_rule: inner.name.clone(),
                    position: position.clone(),
                    peak,
                    outer_result,
                    inner_result,
                });
            }
        }
    }
    pairs
}

/// True when every critical pair's two results coincide syntactically.
pub fn is_weakly_orthogonal(trs: &Trs) -> bool {
    critical_pairs(trs).iter().all(CriticalPair::is_trivial)
}
