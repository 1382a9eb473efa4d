//! Reading and writing rewriting systems.
//!
//! Two input formats are supported and auto-detected:
//!
//! * the classic parenthesized rule-list format, single-sorted:
//!   `(VAR x y) (RULES f(x) -> g(x,y) ...)`;
//! * a JSON object with explicit sorts:
//!   `{"sorts": [...], "ops": [{"name","inputs","output"}...],
//!     "rules": [{"name","lhs","rhs"}...]}` where a term is either a
//!   variable name (string) or an application `[op, arg...]`.

use super::{OpDecl, Rule, Signature, Term, Trs, TrsError};
use crate::circuit::Sort;
use std::collections::HashSet;
use std::fmt::Write as _;

/// Parses either supported format, detected from the first non-space byte.
pub fn parse_trs(input: &str) -> Result<Trs, TrsError> {
    match input.trim_start().chars().next() {
        Some('{') => parse_json(input),
        Some(_) => parse_rule_list(input),
        None => Err(TrsError::Parse("empty input".into())),
    }
}

// ---------------------------------------------------------------------------
// Parenthesized rule-list format.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Comma,
    Arrow,
    Ident(String),
}

fn lex(input: &str) -> Result<Vec<Tok>, TrsError> {
    let mut toks = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '(' => {
                chars.next();
                toks.push(Tok::Open);
            }
            ')' => {
                chars.next();
                toks.push(Tok::Close);
            }
            ',' => {
                chars.next();
                toks.push(Tok::Comma);
            }
            c if c.is_whitespace() => {
                chars.next();
            }
            _ => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c == '(' || c == ')' || c == ',' || c.is_whitespace() {
                        break;
                    }
                    ident.push(c);
                    chars.next();
                }
                if ident == "->" {
                    toks.push(Tok::Arrow);
                } else {
                    toks.push(Tok::Ident(ident));
                }
            }
        }
    }
    Ok(toks)
}

struct RuleListParser {
    toks: Vec<Tok>,
    pos: usize,
    vars: HashSet<String>,
    /// Operation name -> arity, in reading order of first use.  The arity
    /// slot stays empty between seeing a head symbol and finishing its
    /// argument list.
    ops: Vec<(String, Option<usize>)>,
}

impl RuleListParser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok) -> Result<(), TrsError> {
        match self.next() {
            Some(t) if t == want => Ok(()),
            other => Err(TrsError::Parse(format!(
                "expected {want:?}, found {other:?}"
            ))),
        }
    }

    /// Records a head symbol before its arguments are read, so operations
    /// end up ordered by where they first appear in the input text.
    fn reserve_op(&mut self, name: &str) {
        if !self.ops.iter().any(|(n, _)| n == name) {
            self.ops.push((name.to_string(), None));
        }
    }

    fn note_op(&mut self, name: &str, arity: usize) -> Result<(), TrsError> {
        let slot = self
            .ops
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, a)| a);
        match slot {
            Some(Some(known)) if *known != arity => Err(TrsError::Parse(format!(
                "operation {name} used with arities {known} and {arity}"
            ))),
            Some(a) => {
                *a = Some(arity);
                Ok(())
            }
            None => {
                self.ops.push((name.to_string(), Some(arity)));
                Ok(())
            }
        }
    }

    fn parse_term(&mut self) -> Result<Term, TrsError> {
        let name = match self.next() {
            Some(Tok::Ident(s)) => s,
            other => {
                return Err(TrsError::Parse(format!(
                    "expected a term, found {other:?}"
                )))
            }
        };
        let is_var = self.vars.contains(&name);
        if !is_var {
            self.reserve_op(&name);
        }
        let mut args = Vec::new();
        let applied = matches!(self.peek(), Some(Tok::Open));
        if applied {
            self.next();
            if !matches!(self.peek(), Some(Tok::Close)) {
                loop {
                    args.push(self.parse_term()?);
                    match self.next() {
                        Some(Tok::Comma) => continue,
                        Some(Tok::Close) => break,
                        other => {
                            return Err(TrsError::Parse(format!(
                                "expected , or ) in argument list, found {other:?}"
                            )))
                        }
                    }
                }
            } else {
                self.next();
            }
        }
        if is_var {
            if !args.is_empty() {
                return Err(TrsError::Parse(format!(
                    "variable {name} cannot take arguments"
                )));
            }
            Ok(Term::Var(name))
        } else {
            self.note_op(&name, args.len())?;
            Ok(Term::App(name, args))
        }
    }
}

fn parse_rule_list(input: &str) -> Result<Trs, TrsError> {
    let mut p = RuleListParser {
        toks: lex(input)?,
        pos: 0,
        vars: HashSet::new(),
        ops: Vec::new(),
    };
    let mut raw_rules: Vec<(Term, Term)> = Vec::new();
    while p.peek().is_some() {
        p.expect(Tok::Open)?;
        let section = match p.next() {
            Some(Tok::Ident(s)) => s,
            other => {
                return Err(TrsError::Parse(format!(
                    "expected a section name, found {other:?}"
                )))
            }
        };
        match section.as_str() {
            "VAR" => {
                while let Some(Tok::Ident(_)) = p.peek() {
                    let Some(Tok::Ident(v)) = p.next() else {
                        unreachable!()
                    };
                    p.vars.insert(v);
                }
                p.expect(Tok::Close)?;
            }
            "RULES" => {
                while !matches!(p.peek(), Some(Tok::Close) | None) {
                    let lhs = p.parse_term()?;
                    p.expect(Tok::Arrow)?;
                    let rhs = p.parse_term()?;
                    raw_rules.push((lhs, rhs));
                }
                p.expect(Tok::Close)?;
            }
            "COMMENT" => {
                // Skip balanced content.
                let mut depth = 1usize;
                while depth > 0 {
                    match p.next() {
                        Some(Tok::Open) => depth += 1,
                        Some(Tok::Close) => depth -= 1,
                        Some(_) => {}
                        None => return Err(TrsError::Parse("unterminated COMMENT".into())),
                    }
                }
            }
            other => {
                return Err(TrsError::Parse(format!("unsupported section ({other} ...)")));
            }
        }
    }
    let sort = Sort::new("o");
    let ops = p
        .ops
        .iter()
        .map(|(name, arity)| OpDecl {
            name: name.clone(),
            inputs: vec![
                sort.clone();
                arity.expect("arity is confirmed once the argument list is parsed")
            ],
            output: sort.clone(),
        })
        .collect();
    let signature = Signature::new(vec![sort], ops)?;
    let rules = raw_rules
        .into_iter()
        .enumerate()
        .map(|(i, (lhs, rhs))| Rule {
            name: format!("r{}", i + 1),
            lhs,
            rhs,
        })
        .collect();
    Trs::new(signature, rules)
}

/// Renders a single-sorted system in the parenthesized rule-list format.
pub fn print_rule_list(trs: &Trs) -> String {
    let mut vars: Vec<&str> = Vec::new();
    let mut seen = HashSet::new();
    for rule in trs.rules() {
        for v in rule.lhs.vars_in_order() {
            if seen.insert(v) {
                vars.push(v);
            }
        }
    }
    let mut out = String::new();
    if !vars.is_empty() {
        let _ = write!(out, "(VAR");
        for v in vars {
            let _ = write!(out, " {v}");
        }
        let _ = writeln!(out, ")");
    }
    let _ = writeln!(out, "(RULES");
    for rule in trs.rules() {
        let _ = writeln!(out, "  {} -> {}", rule.lhs, rule.rhs);
    }
    let _ = writeln!(out, ")");
    out
}

// ---------------------------------------------------------------------------
// JSON format.
// ---------------------------------------------------------------------------

fn parse_json(input: &str) -> Result<Trs, TrsError> {
    let v: serde_json::Value =
        serde_json::from_str(input).map_err(|e| TrsError::Parse(format!("invalid JSON: {e}")))?;
    let obj = v
        .as_object()
        .ok_or_else(|| TrsError::Parse("top level must be an object".into()))?;
    let sorts: Vec<Sort> = obj
        .get("sorts")
        .and_then(|s| s.as_array())
        .ok_or_else(|| TrsError::Parse("missing \"sorts\" array".into()))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(Sort::new)
                .ok_or_else(|| TrsError::Parse("sorts must be strings".into()))
        })
        .collect::<Result<_, _>>()?;
    let ops: Vec<OpDecl> = obj
        .get("ops")
        .and_then(|s| s.as_array())
        .ok_or_else(|| TrsError::Parse("missing \"ops\" array".into()))?
        .iter()
        .map(parse_json_op)
        .collect::<Result<_, _>>()?;
    let signature = Signature::new(sorts, ops)?;
    let rules: Vec<Rule> = obj
        .get("rules")
        .and_then(|s| s.as_array())
        .ok_or_else(|| TrsError::Parse("missing \"rules\" array".into()))?
        .iter()
        .map(parse_json_rule)
        .collect::<Result<_, _>>()?;
    Trs::new(signature, rules)
}

fn parse_json_op(v: &serde_json::Value) -> Result<OpDecl, TrsError> {
    let obj = v
        .as_object()
        .ok_or_else(|| TrsError::Parse("each op must be an object".into()))?;
    let name = obj
        .get("name")
        .and_then(|s| s.as_str())
        .ok_or_else(|| TrsError::Parse("op missing \"name\"".into()))?
        .to_string();
    let inputs = obj
        .get("inputs")
        .and_then(|s| s.as_array())
        .ok_or_else(|| TrsError::Parse(format!("op {name} missing \"inputs\"")))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(Sort::new)
                .ok_or_else(|| TrsError::Parse("input sorts must be strings".into()))
        })
        .collect::<Result<_, _>>()?;
    let output = obj
        .get("output")
        .and_then(|s| s.as_str())
        .map(Sort::new)
        .ok_or_else(|| TrsError::Parse(format!("op {name} missing \"output\"")))?;
    Ok(OpDecl {
        name,
        inputs,
        output,
    })
}

fn parse_json_rule(v: &serde_json::Value) -> Result<Rule, TrsError> {
    let obj = v
        .as_object()
        .ok_or_else(|| TrsError::Parse("each rule must be an object".into()))?;
    let name = obj
        .get("name")
        .and_then(|s| s.as_str())
        .ok_or_else(|| TrsError::Parse("rule missing \"name\"".into()))?
        .to_string();
    let lhs = term_from_json(
        obj.get("lhs")
            .ok_or_else(|| TrsError::Parse(format!("rule {name} missing \"lhs\"")))?,
    )?;
    let rhs = term_from_json(
        obj.get("rhs")
            .ok_or_else(|| TrsError::Parse(format!("rule {name} missing \"rhs\"")))?,
    )?;
    Ok(Rule { name, lhs, rhs })
}

/// JSON term encoding: a string is a variable, an array is an application.
pub fn term_from_json(v: &serde_json::Value) -> Result<Term, TrsError> {
    match v {
        serde_json::Value::String(x) => Ok(Term::Var(x.clone())),
        serde_json::Value::Array(items) => {
            let (head, args) = items
                .split_first()
                .ok_or_else(|| TrsError::Parse("application needs an operation name".into()))?;
            let op = head
                .as_str()
                .ok_or_else(|| TrsError::Parse("operation name must be a string".into()))?;
            let args = args
                .iter()
                .map(term_from_json)
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Term::App(op.to_string(), args))
        }
        _ => Err(TrsError::Parse(
            "a term is a variable name or [op, arg...]".into(),
        )),
    }
}

pub fn term_to_json(t: &Term) -> serde_json::Value {
    match t {
        Term::Var(x) => serde_json::Value::String(x.clone()),
        Term::App(op, args) => {
            let mut items = vec![serde_json::Value::String(op.clone())];
            items.extend(args.iter().map(term_to_json));
            serde_json::Value::Array(items)
        }
    }
}

pub fn trs_to_json(trs: &Trs) -> serde_json::Value {
    serde_json::json!({
        "sorts": trs.signature().sorts().iter().map(|s| s.as_str()).collect::<Vec<_>>(),
        "ops": trs.signature().ops().iter().map(|op| serde_json::json!({
            "name": op.name,
            "inputs": op.inputs.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            "output": op.output.as_str(),
        })).collect::<Vec<_>>(),
        "rules": trs.rules().iter().map(|r| serde_json::json!({
            "name": r.name,
            "lhs": term_to_json(&r.lhs),
            "rhs": term_to_json(&r.rhs),
        })).collect::<Vec<_>>(),
    })
}

/// Maps a substitution-free textual term over a known variable set; used by
/// tests and the command line for ad-hoc term entry.
pub fn parse_term(input: &str, vars: &HashSet<String>) -> Result<Term, TrsError> {
    let mut p = RuleListParser {
        toks: lex(input)?,
        pos: 0,
        vars: vars.clone(),
        ops: Vec::new(),
    };
    let t = p.parse_term()?;
    if p.peek().is_some() {
        return Err(TrsError::Parse("trailing input after term".into()));
    }
    Ok(t)
}

/// Convenience for ground/closed terms in tests and the CLI.
pub fn parse_ground_term(input: &str) -> Result<Term, TrsError> {
    parse_term(input, &HashSet::new())
}
