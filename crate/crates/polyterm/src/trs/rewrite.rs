//! Term-level rewriting: matching, substitution, one-step reduction and
//! bounded exploration.  Used by the command line for sanity checks and by
//! the test suite to cross-validate circuit-level results.

use super::{Rule, Signature, Term, Trs};
use std::collections::{BTreeMap, HashMap, VecDeque};

pub type Subst = HashMap<String, Term>;

/// Matches `pattern` against `subject` (pattern variables only on the left).
/// Repeated pattern variables must match equal subterms.
pub fn match_term(pattern: &Term, subject: &Term) -> Option<Subst> {
    let mut subst = Subst::new();
    if match_into(pattern, subject, &mut subst) {
        Some(subst)
    } else {
        None
    }
}

fn match_into(pattern: &Term, subject: &Term, subst: &mut Subst) -> bool {
    match pattern {
        Term::Var(x) => match subst.get(x) {
            Some(bound) => bound == subject,
            None => {
                subst.insert(x.clone(), subject.clone());
                true
            }
        },
        Term::App(f, args) => match subject {
            Term::App(g, sargs) if f == g && args.len() == sargs.len() => args
                .iter()
                .zip(sargs.iter())
                .all(|(p, s)| match_into(p, s, subst)),
            _ => false,
        },
    }
}

pub fn apply_subst(term: &Term, subst: &Subst) -> Term {
    match term {
        Term::Var(x) => subst.get(x).cloned().unwrap_or_else(|| term.clone()),
        Term::App(f, args) => Term::App(
            f.clone(),
            args.iter().map(|a| apply_subst(a, subst)).collect(),
        ),
    }
}

/// A redex: a position plus the index of the applicable rule.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TermRedex {
    pub position: Vec<usize>,
    pub rule: usize,
}

/// All redexes of `term`, positions in preorder, rules in declaration order.
pub fn find_term_redexes(trs: &Trs, term: &Term) -> Vec<TermRedex> {
    let mut acc = Vec::new();
    for position in term.positions() {
        let sub = term.subterm_at(&position).expect("position enumerated");
        for (i, rule) in trs.rules().iter().enumerate() {
            if match_term(&rule.lhs, sub).is_some() {
                acc.push(TermRedex {
                    position: position.clone(),
                    rule: i,
                });
            }
        }
    }
    acc
}

/// Applies `rule` at `position`, if it matches there.
pub fn rewrite_at(term: &Term, position: &[usize], rule: &Rule) -> Option<Term> {
    let sub = term.subterm_at(position)?;
    let subst = match_term(&rule.lhs, sub)?;
    term.replace_at(position, apply_subst(&rule.rhs, &subst))
}

/// All one-step reducts, deduplicated, in deterministic order.
pub fn one_step_reducts(trs: &Trs, term: &Term) -> Vec<Term> {
    let mut seen = std::collections::HashSet::new();
    let mut acc = Vec::new();
    for redex in find_term_redexes(trs, term) {
        let next = rewrite_at(term, &redex.position, &trs.rules()[redex.rule])
            .expect("redex applies where it was found");
        if seen.insert(next.clone()) {
            acc.push(next);
        }
    }
    acc
}

/// Outcome of a bounded normalization.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum TermNormalization {
    NormalForm(Term, usize),
    FuelExhausted(Term),
}

/// Leftmost-innermost normalization with a step budget.
pub fn normalize_term(trs: &Trs, term: &Term, fuel: usize) -> TermNormalization {
    let mut current = term.clone();
    for steps in 0..fuel {
        let redexes = find_term_redexes(trs, &current);
        // Innermost: the redex whose position is longest; leftmost among ties
        // is the first in preorder with that property.  Preorder already puts
        // a parent before its children, so scan for the first redex none of
        // whose proper extensions is also a redex.
        let innermost = redexes.iter().find(|r| {
            !redexes
                .iter()
                .any(|other| other.position.len() > r.position.len()
                    && other.position.starts_with(&r.position))
        });
        match innermost {
            None => return TermNormalization::NormalForm(current, steps),
            Some(redex) => {
                current = rewrite_at(&current, &redex.position, &trs.rules()[redex.rule])
                    .expect("redex applies");
            }
        }
    }
    TermNormalization::FuelExhausted(current)
}

/// Enumerates all ground terms over `sig` up to `max_size` nodes, grouped by
/// output sort, smallest first within each sort.
pub fn ground_terms(sig: &Signature, max_size: usize) -> BTreeMap<String, Vec<Term>> {
    // table[sort][size] = terms of exactly `size` nodes.
    let mut table: HashMap<&str, Vec<Vec<Term>>> = sig
        .sorts()
        .iter()
        .map(|s| (s.as_str(), vec![Vec::new(); max_size + 1]))
        .collect();
    for size in 1..=max_size {
        for op in sig.ops() {
            let arity = op.arity();
            if arity == 0 {
                if size == 1 {
                    table.get_mut(op.output.as_str()).expect("sort known")[1]
                        .push(Term::App(op.name.clone(), vec![]));
                }
                continue;
            }
            if size < 1 + arity {
                continue;
            }
            // Distribute size - 1 nodes over the arguments.
            let budget = size - 1;
            let mut combos: Vec<Vec<Term>> = vec![Vec::new()];
            let mut sizes: Vec<Vec<usize>> = vec![Vec::new()];
            for (i, input) in op.inputs.iter().enumerate() {
                let remaining_args = arity - i - 1;
                let mut next_combos = Vec::new();
                let mut next_sizes = Vec::new();
                for (combo, szs) in combos.iter().zip(sizes.iter()) {
                    let used: usize = szs.iter().sum();
                    let max_here = budget - used - remaining_args;
                    for sz in 1..=max_here {
                        for t in &table[input.as_str()][sz] {
                            let mut c = combo.clone();
                            c.push(t.clone());
                            let mut s = szs.clone();
                            s.push(sz);
                            next_combos.push(c);
                            next_sizes.push(s);
                        }
                    }
                }
                combos = next_combos;
                sizes = next_sizes;
            }
            for (combo, szs) in combos.into_iter().zip(sizes) {
                if szs.iter().sum::<usize>() + 1 == size {
                    table.get_mut(op.output.as_str()).expect("sort known")[size]
                        .push(Term::App(op.name.clone(), combo));
                }
            }
        }
    }
    sig.sorts()
        .iter()
        .map(|s| {
            let by_size = &table[s.as_str()];
            (
                s.as_str().to_string(),
                by_size.iter().flatten().cloned().collect(),
            )
        })
        .collect()
}

/// Breadth-first reachability check: explores every reduction sequence from
/// `start` up to `depth` steps; reports whether some path revisits a term
/// (a certain loop) and the set of explored terms.
pub fn bounded_search_for_loop(trs: &Trs, start: &Term, depth: usize) -> bool {
    // A revisit along a single path means a cycle.  Track ancestors per path
    // via depth-first search with an explicit stack.
    fn dfs(trs: &Trs, term: &Term, depth: usize, path: &mut Vec<Term>) -> bool {
        if path.iter().any(|t| t == term) {
            return true;
        }
        if depth == 0 {
            return false;
        }
        path.push(term.clone());
        for next in one_step_reducts(trs, term) {
            if dfs(trs, &next, depth - 1, path) {
                path.pop();
                return true;
            }
        }
        path.pop();
        false
    }
    dfs(trs, start, depth, &mut Vec::new())
}

/// Counts reduction sequences from `start` of exactly `depth` steps (capped),
/// used to detect suspiciously unbounded growth in tests.
pub fn longest_reduction(trs: &Trs, start: &Term, cap: usize) -> usize {
    let mut frontier = VecDeque::new();
    frontier.push_back((start.clone(), 0usize));
    let mut longest = 0;
    while let Some((term, depth)) = frontier.pop_front() {
        longest = longest.max(depth);
        if depth >= cap {
            return cap;
        }
        for next in one_step_reducts(trs, &term) {
            frontier.push_back((next, depth + 1));
        }
    }
    longest
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_trs;
    use super::super::parse::parse_ground_term;
    use super::*;

    fn division() -> Trs {
        parse_trs(
            "(VAR x y)
             (RULES
               M(0,x) -> 0
               M(x,0) -> x
               M(s(x),s(y)) -> M(x,y)
               Q(0,x) -> 0
               Q(s(x),y) -> s(Q(M(x,y),y))
             )",
        )
        .unwrap()
    }

    #[test]
    fn matching_binds_variables() {
        let trs = division();
        let t = parse_ground_term("M(s(0),0)").unwrap();
        let subst = match_term(&trs.rules()[1].lhs, &t).unwrap();
        assert_eq!(subst["x"], parse_ground_term("s(0)").unwrap());
    }

    #[test]
    fn division_computes_quotient() {
        let trs = division();
        // Q(i,j) computes the quotient of i by j+1, rounded up: Q(4,2) = 2.
        let t = parse_ground_term("Q(s(s(s(s(0)))),s(s(0)))").unwrap();
        let TermNormalization::NormalForm(nf, _) = normalize_term(&trs, &t, 1000) else {
            panic!("normalization ran out of fuel");
        };
        assert_eq!(nf, parse_ground_term("s(s(0))").unwrap());
    }

    #[test]
    fn redexes_are_found_at_nested_positions() {
        let trs = division();
        let t = parse_ground_term("s(M(0,0))").unwrap();
        let redexes = find_term_redexes(&trs, &t);
        assert_eq!(redexes.len(), 2);
        assert!(redexes.iter().all(|r| r.position == vec![0]));
    }

    #[test]
    fn ground_term_enumeration_counts() {
        let trs = division();
        let terms = ground_terms(trs.signature(), 3);
        let nats = &terms["o"];
        // By size, then signature order (M, 0, s, Q): size 1 is just 0,
        // size 2 is s(0), and size 3 holds M(0,0), s(s(0)), Q(0,0).
        assert_eq!(
            nats.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
            vec!["0", "s(0)", "M(0,0)", "s(s(0))", "Q(0,0)"]
        );
        for t in nats {
            assert!(t.size() <= 3);
        }
    }

    #[test]
    fn loop_detection_on_a_cyclic_system() {
        let loopy = parse_trs("(VAR x) (RULES f(x) -> f(x))").unwrap();
        let t = parse_ground_term("f(a)").unwrap();
        assert!(bounded_search_for_loop(&loopy, &t, 3));
        let trs = division();
        let t = parse_ground_term("Q(s(0),s(0))").unwrap();
        assert!(!bounded_search_for_loop(&trs, &t, 12));
    }
}
