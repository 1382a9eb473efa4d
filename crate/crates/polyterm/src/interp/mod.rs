//! Quantitative interpretations of circuits.
//!
//! Every gate is assigned *currents* (one polynomial per output wire, in
//! variables `x1..xk` for a gate with `k` inputs) and a *heat* (a polynomial,
//! or a bag of polynomials).  Currents flow forward through a circuit;
//! the heat of a circuit is the sum (or bag union) of every gate's heat
//! applied to the currents arriving at that gate.  A circuit rewrite rule is
//! *compatible* with an interpretation when currents never increase on any
//! output and heat decreases (strictly or weakly, as required per rule).
//!
//! Resource gates are not interpreted freely: a crossing exchanges its
//! currents, a duplication repeats its current, an erasure drops it, and all
//! three produce zero heat.  These assignments are forced at load time.

pub mod poly;

use crate::circuit::{CellKind, TwoCellDecl, TwoPath, WireSrc};
use crate::translation::{CellFamily, GateSet, ThreeCell};
use poly::{poly_geq, poly_gt, Poly, PolyParseError};
use serde_json::Value;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// The value range of currents.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CurrentDomain {
    /// All natural numbers.
    Naturals,
    /// Strictly positive naturals: comparisons shift every input by one.
    PositiveNaturals,
}

impl CurrentDomain {
    pub fn parse(text: &str) -> Option<CurrentDomain> {
        match text {
            "N" => Some(CurrentDomain::Naturals),
            "N+" => Some(CurrentDomain::PositiveNaturals),
            _ => None,
        }
    }

    pub(crate) fn shift(self, p: &Poly) -> Poly {
        match self {
            CurrentDomain::Naturals => p.clone(),
            CurrentDomain::PositiveNaturals => p.shift_vars(1),
        }
    }
}

impl fmt::Display for CurrentDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurrentDomain::Naturals => f.write_str("N"),
            CurrentDomain::PositiveNaturals => f.write_str("N+"),
        }
    }
}

/// The shape of heat values.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HeatDomain {
    /// One polynomial; heats combine by addition.
    Scalar,
    /// A bag of polynomials; heats combine by union and compare in the
    /// Dershowitz-Manna order.
    Multiset,
}

impl HeatDomain {
    pub fn parse(text: &str) -> Option<HeatDomain> {
        match text {
            "N" => Some(HeatDomain::Scalar),
            "multiset" => Some(HeatDomain::Multiset),
            _ => None,
        }
    }
}

impl fmt::Display for HeatDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeatDomain::Scalar => f.write_str("N"),
            HeatDomain::Multiset => f.write_str("multiset"),
        }
    }
}

/// A heat value: a polynomial or a bag of polynomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum HeatExpr {
    Scalar(Poly),
    Bag(Vec<Poly>),
}

impl HeatExpr {
    pub fn zero(domain: HeatDomain) -> HeatExpr {
        match domain {
            HeatDomain::Scalar => HeatExpr::Scalar(Poly::zero()),
            HeatDomain::Multiset => HeatExpr::Bag(Vec::new()),
        }
    }

    pub fn combine(&self, other: &HeatExpr) -> HeatExpr {
        match (self, other) {
            (HeatExpr::Scalar(a), HeatExpr::Scalar(b)) => HeatExpr::Scalar(a.add(b)),
            (HeatExpr::Bag(a), HeatExpr::Bag(b)) => {
                let mut all = a.clone();
                all.extend(b.iter().cloned());
                all.sort_by_key(|p| p.to_string());
                HeatExpr::Bag(all)
            }
            _ => panic!("heat shapes cannot mix"),
        }
    }

    pub fn substitute(&self, env: &BTreeMap<String, Poly>) -> HeatExpr {
        match self {
            HeatExpr::Scalar(p) => HeatExpr::Scalar(p.substitute(env)),
            HeatExpr::Bag(ps) => HeatExpr::Bag(ps.iter().map(|p| p.substitute(env)).collect()),
        }
    }

    pub(crate) fn shift(&self, domain: CurrentDomain) -> HeatExpr {
        match self {
            HeatExpr::Scalar(p) => HeatExpr::Scalar(domain.shift(p)),
            HeatExpr::Bag(ps) => HeatExpr::Bag(ps.iter().map(|p| domain.shift(p)).collect()),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            HeatExpr::Scalar(p) => p.is_zero(),
            HeatExpr::Bag(ps) => ps.is_empty(),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            HeatExpr::Scalar(p) => Value::String(p.to_string()),
            HeatExpr::Bag(ps) => Value::Array(
                ps.iter()
                    .map(|p| Value::String(p.to_string()))
                    .collect(),
            ),
        }
    }
}

impl fmt::Display for HeatExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeatExpr::Scalar(p) => write!(f, "{p}"),
            HeatExpr::Bag(ps) => {
                f.write_str("{")?;
                for (i, p) in ps.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{p}")?;
                }
                f.write_str("}")
            }
        }
    }
}

/// Weak comparison of heats (no domain shift applied here).
pub fn heat_geq(h1: &HeatExpr, h2: &HeatExpr) -> bool {
    match (h1, h2) {
        (HeatExpr::Scalar(a), HeatExpr::Scalar(b)) => poly_geq(a, b),
        (HeatExpr::Bag(a), HeatExpr::Bag(b)) => mul_ext(a, b).0,
        _ => panic!("heat shapes cannot mix"),
    }
}

/// Strict comparison of heats (no domain shift applied here).
pub fn heat_gt(h1: &HeatExpr, h2: &HeatExpr) -> bool {
    match (h1, h2) {
        (HeatExpr::Scalar(a), HeatExpr::Scalar(b)) => poly_gt(a, b),
        (HeatExpr::Bag(a), HeatExpr::Bag(b)) => mul_ext(a, b).1,
        _ => panic!("heat shapes cannot mix"),
    }
}

/// Dershowitz-Manna style comparison of bags of polynomials; returns
/// `(weak, strict)`.
///
/// A comparison succeeds when `h2` splits into a part matched injectively to
/// `h1` elements that weakly dominate it, and a remainder whose members are
/// each strictly dominated by some *unmatched* `h1` element.  The strict
/// version additionally requires the unmatched part of `h1` to be nonempty.
fn mul_ext(h1: &[Poly], h2: &[Poly]) -> (bool, bool) {
    fn search(
        h1: &[Poly],
        h2: &[Poly],
        next: usize,
        used: &mut Vec<bool>,
        deferred: &mut Vec<usize>,
        found: &mut (bool, bool),
    ) {
        if found.0 && found.1 {
            return;
        }
        if next == h2.len() {
            let unmatched: Vec<&Poly> = h1
                .iter()
                .zip(used.iter())
                .filter(|(_, u)| !**u)
                .map(|(p, _)| p)
                .collect();
            let dominated = deferred
                .iter()
                .all(|&j| unmatched.iter().any(|b| poly_gt(b, &h2[j])));
            if dominated {
                found.0 = true;
                if !unmatched.is_empty() {
                    found.1 = true;
                }
            }
            return;
        }
        for i in 0..h1.len() {
            if !used[i] && poly_geq(&h1[i], &h2[next]) {
                used[i] = true;
                search(h1, h2, next + 1, used, deferred, found);
                used[i] = false;
            }
        }
        deferred.push(next);
        search(h1, h2, next + 1, used, deferred, found);
        deferred.pop();
    }
    let mut found = (false, false);
    search(
        h1,
        h2,
        0,
        &mut vec![false; h1.len()],
        &mut Vec::new(),
        &mut found,
    );
    found
}

/// The interpretation of one gate: one current polynomial per output wire
/// (in input variables `x1..xk`) plus a heat value.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CellInterp {
    pub currents: Vec<Poly>,
    pub heat: HeatExpr,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InterpError {
    #[error("interpretation file: {0}")]
    Format(String),
    #[error("{0}")]
    Poly(#[from] PolyParseError),
    #[error("unknown current domain {0:?} (expected \"N\" or \"N+\")")]
    BadCurrentDomain(String),
    #[error("unknown heat shape {0:?} (expected \"scalar\" or \"multiset\")")]
    BadHeatDomain(String),
    #[error("interpretation names unknown gate {0}")]
    UnknownCell(String),
    #[error("no interpretation given for gate {0}")]
    MissingCell(String),
    #[error("gate {cell}: expected {expected} current polynomial(s), found {found}")]
    CurrentCount {
        cell: String,
        expected: usize,
        found: usize,
    },
    #[error("gate {cell}: variable {var} is not among its inputs x1..x{arity}")]
    VarOutOfRange {
        cell: String,
        var: String,
        arity: usize,
    },
    #[error("gate {cell} is a resource gate; its interpretation is fixed and cannot be overridden")]
    StructureOverride { cell: String },
    #[error("gate {cell}: heat must be {expected} in this heat shape")]
    HeatShape { cell: String, expected: String },
    #[error("gate {cell}: current {index} can reach zero, outside the positive domain")]
    CurrentNotInDomain { cell: String, index: usize },
}

/// A full interpretation: domains plus one [`CellInterp`] per gate.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Interpretation {
    pub current_domain: CurrentDomain,
    pub heat_domain: HeatDomain,
    pub cells: BTreeMap<String, CellInterp>,
}

/// The forced interpretation of a resource gate.
pub fn pinned_structure(decl: &TwoCellDecl, heat_domain: HeatDomain) -> Option<CellInterp> {
    let currents = match decl.kind {
        CellKind::Algebra => return None,
        CellKind::Swap(_, _) => vec![Poly::var("x2"), Poly::var("x1")],
        CellKind::Dup(_) => vec![Poly::var("x1"), Poly::var("x1")],
        CellKind::Erase(_) => vec![],
    };
    Some(CellInterp {
        currents,
        heat: HeatExpr::zero(heat_domain),
    })
}

impl Interpretation {
    pub fn new(current_domain: CurrentDomain, heat_domain: HeatDomain) -> Interpretation {
        Interpretation {
            current_domain,
            heat_domain,
            cells: BTreeMap::new(),
        }
    }

    /// Adds the forced resource-gate entries for every gate in the set.
    pub fn fill_structure(&mut self, gates: &GateSet) {
        for decl in gates.structure() {
            if let Some(ci) = pinned_structure(&decl, self.heat_domain) {
                self.cells.insert(decl.name.clone(), ci);
            }
        }
    }

    pub fn set(&mut self, cell: impl Into<String>, currents: Vec<Poly>, heat: HeatExpr) {
        self.cells.insert(cell.into(), CellInterp { currents, heat });
    }

    pub fn cell(&self, name: &str) -> Option<&CellInterp> {
        self.cells.get(name)
    }

    /// Parses an interpretation from JSON and validates it against a gate
    /// set.  Resource gates may be listed only with their forced values;
    /// missing ones are filled in.  Every algebra gate must be present.
    pub fn load(gates: &GateSet, json: &Value) -> Result<Interpretation, InterpError> {
        let obj = json
            .as_object()
            .ok_or_else(|| InterpError::Format("expected a JSON object".into()))?;
        let current_domain = match obj.get("domain") {
            None => CurrentDomain::Naturals,
            Some(Value::String(s)) => CurrentDomain::parse(s)
                .ok_or_else(|| InterpError::BadCurrentDomain(s.clone()))?,
            Some(other) => return Err(InterpError::BadCurrentDomain(other.to_string())),
        };
        let heat_domain = match obj.get("heat_domain") {
            None => HeatDomain::Scalar,
            Some(Value::String(s)) => {
                HeatDomain::parse(s).ok_or_else(|| InterpError::BadHeatDomain(s.clone()))?
            }
            Some(other) => return Err(InterpError::BadHeatDomain(other.to_string())),
        };
        let mut interp = Interpretation::new(current_domain, heat_domain);
        let cells = obj
            .get("cells")
            .and_then(Value::as_object)
            .ok_or_else(|| InterpError::Format("expected a \"cells\" object".into()))?;
        for (name, entry) in cells {
            let decl = gates
                .all()
                .into_iter()
                .find(|d| &d.name == name)
                .ok_or_else(|| InterpError::UnknownCell(name.clone()))?;
            let parsed = parse_cell_entry(name, entry, heat_domain)?;
            if let Some(pinned) = pinned_structure(&decl, heat_domain) {
                if parsed != pinned {
                    return Err(InterpError::StructureOverride { cell: name.clone() });
                }
            }
            interp.cells.insert(name.clone(), parsed);
        }
        interp.fill_structure(gates);
        interp.validate(gates)?;
        Ok(interp)
    }

    /// Checks arities, variable ranges, completeness and domain membership.
    pub fn validate(&self, gates: &GateSet) -> Result<(), InterpError> {
        for decl in gates.all() {
            let ci = self
                .cells
                .get(&decl.name)
                .ok_or_else(|| InterpError::MissingCell(decl.name.clone()))?;
            if ci.currents.len() != decl.coarity() {
                return Err(InterpError::CurrentCount {
                    cell: decl.name.clone(),
                    expected: decl.coarity(),
                    found: ci.currents.len(),
                });
            }
            let arity = decl.arity();
            let in_range = |v: &str| {
                v.strip_prefix('x')
                    .and_then(|n| n.parse::<usize>().ok())
                    .is_some_and(|n| n >= 1 && n <= arity)
            };
            let heat_polys: Vec<&Poly> = match &ci.heat {
                HeatExpr::Scalar(p) => vec![p],
                HeatExpr::Bag(ps) => ps.iter().collect(),
            };
            for p in ci.currents.iter().chain(heat_polys) {
                if let Some(v) = p.vars().into_iter().find(|v| !in_range(v)) {
                    return Err(InterpError::VarOutOfRange {
                        cell: decl.name.clone(),
                        var: v,
                        arity,
                    });
                }
            }
            match (&ci.heat, self.heat_domain) {
                (HeatExpr::Scalar(_), HeatDomain::Scalar)
                | (HeatExpr::Bag(_), HeatDomain::Multiset) => {}
                (_, HeatDomain::Scalar) => {
                    return Err(InterpError::HeatShape {
                        cell: decl.name.clone(),
                        expected: "a single polynomial".into(),
                    })
                }
                (_, HeatDomain::Multiset) => {
                    return Err(InterpError::HeatShape {
                        cell: decl.name.clone(),
                        expected: "an array of polynomials".into(),
                    })
                }
            }
            if self.current_domain == CurrentDomain::PositiveNaturals && !decl.is_structure() {
                for (index, p) in ci.currents.iter().enumerate() {
                    if !poly_gt(&self.current_domain.shift(p), &Poly::zero()) {
                        return Err(InterpError::CurrentNotInDomain {
                            cell: decl.name.clone(),
                            index,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "domain": self.current_domain.to_string(),
            "heat_domain": self.heat_domain.to_string(),
            "cells": self.cells.iter().map(|(name, ci)| {
                (name.clone(), serde_json::json!({
                    "currents": ci.currents.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                    "heat": ci.heat.to_json(),
                }))
            }).collect::<serde_json::Map<String, Value>>(),
        })
    }
}

fn parse_cell_entry(
    name: &str,
    entry: &Value,
    heat_domain: HeatDomain,
) -> Result<CellInterp, InterpError> {
    let obj = entry
        .as_object()
        .ok_or_else(|| InterpError::Format(format!("gate {name}: expected an object")))?;
    let currents = obj
        .get("currents")
        .and_then(Value::as_array)
        .ok_or_else(|| InterpError::Format(format!("gate {name}: expected a \"currents\" array")))?
        .iter()
        .map(|v| {
            v.as_str()
                .ok_or_else(|| {
                    InterpError::Format(format!("gate {name}: currents must be strings"))
                })
                .and_then(|s| Poly::parse(s).map_err(InterpError::from))
        })
        .collect::<Result<Vec<Poly>, InterpError>>()?;
    let heat = match obj.get("heat") {
        None => HeatExpr::zero(heat_domain),
        Some(Value::String(s)) => match heat_domain {
            HeatDomain::Scalar => HeatExpr::Scalar(Poly::parse(s)?),
            HeatDomain::Multiset => {
                return Err(InterpError::HeatShape {
                    cell: name.to_string(),
                    expected: "an array of polynomials".into(),
                })
            }
        },
        Some(Value::Array(items)) => match heat_domain {
            HeatDomain::Scalar => {
                return Err(InterpError::HeatShape {
                    cell: name.to_string(),
                    expected: "a single polynomial".into(),
                })
            }
            HeatDomain::Multiset => HeatExpr::Bag(
                items
                    .iter()
                    .map(|v| {
                        v.as_str()
                            .ok_or_else(|| {
                                InterpError::Format(format!(
                                    "gate {name}: heat entries must be strings"
                                ))
                            })
                            .and_then(|s| Poly::parse(s).map_err(InterpError::from))
                    })
                    .collect::<Result<Vec<Poly>, InterpError>>()?,
            ),
        },
        Some(other) => {
            return Err(InterpError::Format(format!(
                "gate {name}: unexpected heat value {other}"
            )))
        }
    };
    Ok(CellInterp { currents, heat })
}

// ---------------------------------------------------------------------------
// Evaluation over circuits.
// ---------------------------------------------------------------------------

fn input_var(i: usize) -> Poly {
    Poly::var(format!("x{}", i + 1))
}

struct FlowState {
    node_outputs: Vec<Vec<Poly>>,
    heat: HeatExpr,
}

fn flow(interp: &Interpretation, path: &TwoPath) -> Result<FlowState, InterpError> {
    let mut node_outputs: Vec<Vec<Poly>> = Vec::with_capacity(path.node_count());
    let mut heat = HeatExpr::zero(interp.heat_domain);
    let wire_poly = |node_outputs: &Vec<Vec<Poly>>, src: &WireSrc| -> Poly {
        match src {
            WireSrc::Input(i) => input_var(*i),
            WireSrc::Node(n, p) => node_outputs[*n][*p].clone(),
        }
    };
    for node in path.nodes() {
        let ci = interp
            .cells
            .get(&node.cell.name)
            .ok_or_else(|| InterpError::MissingCell(node.cell.name.clone()))?;
        let env: BTreeMap<String, Poly> = node
            .inputs
            .iter()
            .enumerate()
            .map(|(i, src)| (format!("x{}", i + 1), wire_poly(&node_outputs, src)))
            .collect();
        heat = heat.combine(&ci.heat.substitute(&env));
        node_outputs.push(ci.currents.iter().map(|p| p.substitute(&env)).collect());
    }
    Ok(FlowState { node_outputs, heat })
}

/// The current on each output wire of `path`, as polynomials in the input
/// variables `x1..xm`.
pub fn eval_currents(interp: &Interpretation, path: &TwoPath) -> Result<Vec<Poly>, InterpError> {
    let state = flow(interp, path)?;
    Ok(path
        .outputs()
        .iter()
        .map(|src| match src {
            WireSrc::Input(i) => input_var(*i),
            WireSrc::Node(n, p) => state.node_outputs[*n][*p].clone(),
        })
        .collect())
}

/// The total heat of `path` in the input variables `x1..xm`.
pub fn eval_heat(interp: &Interpretation, path: &TwoPath) -> Result<HeatExpr, InterpError> {
    Ok(flow(interp, path)?.heat)
}

// ---------------------------------------------------------------------------
// Rule checking.
// ---------------------------------------------------------------------------

/// The outcome of checking one circuit rewrite rule against an
/// interpretation.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub cell: String,
    pub family: CellFamily,
    pub strict_required: bool,
    pub currents_ok: bool,
    pub heat_ok: bool,
    pub source_currents: Vec<Poly>,
    pub target_currents: Vec<Poly>,
    pub source_heat: HeatExpr,
    pub target_heat: HeatExpr,
}

impl CheckResult {
    pub fn ok(&self) -> bool {
        self.currents_ok && self.heat_ok
    }

    pub fn to_json(&self) -> Value {
        let strings = |ps: &[Poly]| {
            ps.iter()
                .map(|p| Value::String(p.to_string()))
                .collect::<Vec<_>>()
        };
        serde_json::json!({
            "cell": self.cell,
            "family": self.family.to_string(),
            "strict": self.strict_required,
            "currents_ok": self.currents_ok,
            "heat_ok": self.heat_ok,
            "source_currents": strings(&self.source_currents),
            "target_currents": strings(&self.target_currents),
            "source_heat": self.source_heat.to_json(),
            "target_heat": self.target_heat.to_json(),
            "ok": self.ok(),
        })
    }
}

/// Checks one rule: currents must not increase on any output, and heat must
/// drop strictly (for `strict`) or weakly, over the chosen current domain.
pub fn check_cell(
    interp: &Interpretation,
    cell: &ThreeCell,
    strict: bool,
) -> Result<CheckResult, InterpError> {
    let domain = interp.current_domain;
    let source_currents = eval_currents(interp, &cell.source)?;
    let target_currents = eval_currents(interp, &cell.target)?;
    debug_assert_eq!(source_currents.len(), target_currents.len());
    let currents_ok = source_currents
        .iter()
        .zip(&target_currents)
        .all(|(s, t)| poly_geq(&domain.shift(s), &domain.shift(t)));
    let source_heat = eval_heat(interp, &cell.source)?;
    let target_heat = eval_heat(interp, &cell.target)?;
    let (s, t) = (source_heat.shift(domain), target_heat.shift(domain));
    let heat_ok = if strict {
        heat_gt(&s, &t)
    } else {
        heat_geq(&s, &t)
    };
    Ok(CheckResult {
        cell: cell.name.clone(),
        family: cell.family,
        strict_required: strict,
        currents_ok,
        heat_ok,
        source_currents,
        target_currents,
        source_heat,
        target_heat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{OnePath, Sort};
    use crate::translation::{build_polygraph, CellSelection};
    use crate::trs::parse::parse_trs;

    fn division_interp() -> (crate::translation::Polygraph, Interpretation) {
        let trs = parse_trs(
            "(VAR x y)
             (RULES
               M(0,x) -> 0
               M(x,0) -> x
               M(s(x),s(y)) -> M(x,y)
               Q(0,x) -> 0
               Q(s(x),y) -> s(Q(M(x,y),y))
             )",
        )
        .unwrap();
        let polygraph = build_polygraph(&trs, &CellSelection::full()).unwrap();
        let json = serde_json::json!({
            "domain": "N+",
            "heat_domain": "N",
            "cells": {
                "0": {"currents": ["1"], "heat": "0"},
                "s": {"currents": ["x1 + 2"], "heat": "0"},
                "M": {"currents": ["x1"], "heat": "x2"},
                "Q": {"currents": ["x1"], "heat": "x1*x2"},
            }
        });
        let interp = Interpretation::load(&polygraph.gates, &json).unwrap();
        (polygraph, interp)
    }

    #[test]
    fn load_fills_resource_gates() {
        let (polygraph, interp) = division_interp();
        let swap = interp.cell("swap(o,o)").unwrap();
        assert_eq!(swap.currents, vec![Poly::var("x2"), Poly::var("x1")]);
        assert!(swap.heat.is_zero());
        assert!(interp.cell("dup(o)").is_some());
        assert!(interp.cell("erase(o)").is_some());
        let _ = polygraph;
    }

    #[test]
    fn load_rejects_overriding_resource_gates() {
        let (polygraph, _) = division_interp();
        let json = serde_json::json!({
            "cells": {
                "M": {"currents": ["x1"]},
                "Q": {"currents": ["x1"]},
                "0": {"currents": ["1"]},
                "s": {"currents": ["x1"]},
                "dup(o)": {"currents": ["x1", "x1 + 1"]},
            }
        });
        let err = Interpretation::load(&polygraph.gates, &json).unwrap_err();
        assert!(matches!(err, InterpError::StructureOverride { .. }));
    }

    #[test]
    fn load_rejects_zero_currents_in_positive_domain() {
        let (polygraph, _) = division_interp();
        let json = serde_json::json!({
            "domain": "N+",
            "cells": {
                "M": {"currents": ["x1"]},
                "Q": {"currents": ["x1"]},
                "0": {"currents": ["0"]},
                "s": {"currents": ["x1 + 1"]},
            }
        });
        let err = Interpretation::load(&polygraph.gates, &json).unwrap_err();
        assert!(matches!(err, InterpError::CurrentNotInDomain { .. }));
    }

    #[test]
    fn currents_flow_through_translated_terms() {
        let (polygraph, interp) = division_interp();
        // Last rule source: Q(s(x), y).
        let cell = polygraph.cell("r5").unwrap();
        let currents = eval_currents(&interp, &cell.source).unwrap();
        assert_eq!(currents, vec![Poly::parse("x1 + 2").unwrap()]);
        // Its target s(Q(M(x,y), y)) also pipes x1 through M, Q and s.
        let target = eval_currents(&interp, &cell.target).unwrap();
        assert_eq!(target, vec![Poly::parse("x1 + 2").unwrap()]);
    }

    #[test]
    fn heats_of_the_recursive_division_rule() {
        let (polygraph, interp) = division_interp();
        let cell = polygraph.cell("r5").unwrap();
        let source = eval_heat(&interp, &cell.source).unwrap();
        let target = eval_heat(&interp, &cell.target).unwrap();
        assert_eq!(
            source,
            HeatExpr::Scalar(Poly::parse("x1*x2 + 2*x2").unwrap())
        );
        assert_eq!(
            target,
            HeatExpr::Scalar(Poly::parse("x1*x2 + x2").unwrap())
        );
        // Strictness needs the positive domain: the drop is exactly x2.
        let shifted_s = source.shift(CurrentDomain::PositiveNaturals);
        let shifted_t = target.shift(CurrentDomain::PositiveNaturals);
        assert!(heat_gt(&shifted_s, &shifted_t));
        assert!(!heat_gt(&source, &target));
    }

    #[test]
    fn all_division_computation_cells_check_strictly() {
        let (polygraph, interp) = division_interp();
        for cell in polygraph.cells_in_family(CellFamily::Computation) {
            let result = check_cell(&interp, cell, true).unwrap();
            assert!(result.ok(), "{} failed: {result:?}", cell.name);
        }
    }

    #[test]
    fn duplication_pushes_fail_for_division() {
        let (polygraph, interp) = division_interp();
        let failing: Vec<String> = polygraph
            .cells
            .iter()
            .filter(|c| c.family != CellFamily::Computation && c.family != CellFamily::StructureLaw)
            .filter(|c| !check_cell(&interp, c, false).unwrap().ok())
            .map(|c| c.name.clone())
            .collect();
        assert!(failing.contains(&"dup(Q)".to_string()), "{failing:?}");
    }

    #[test]
    fn swap_exchanges_currents() {
        let (polygraph, interp) = division_interp();
        let o = Sort::new("o");
        let swap = TwoPath::generator(polygraph.gates.swap(&o, &o));
        let currents = eval_currents(&interp, &swap).unwrap();
        assert_eq!(currents, vec![Poly::var("x2"), Poly::var("x1")]);
        let id = TwoPath::identity(OnePath::single(o));
        assert_eq!(eval_currents(&interp, &id).unwrap(), vec![Poly::var("x1")]);
    }

    #[test]
    fn bag_comparison_follows_multiset_rules() {
        let p = |s: &str| Poly::parse(s).unwrap();
        let big = vec![p("x + 1")];
        let small = vec![p("x")];
        assert_eq!(mul_ext(&big, &small), (true, true));
        assert_eq!(mul_ext(&small, &small), (true, false));
        // One large element beats many smaller ones.
        let one = vec![p("x + 2")];
        let many = vec![p("x"), p("x + 1"), p("1")];
        assert_eq!(mul_ext(&one, &many), (true, true));
        // The empty bag is minimal.
        assert_eq!(mul_ext(&small, &[]), (true, true));
        assert_eq!(mul_ext(&[], &small), (false, false));
        assert_eq!(mul_ext(&[], &[]), (true, false));
        // Equal multisets compare weakly both ways.
        let pair = vec![p("x"), p("x + 1")];
        let pair_rev = vec![p("x + 1"), p("x")];
        assert_eq!(mul_ext(&pair, &pair_rev), (true, false));
    }

    #[test]
    fn heat_display_styles() {
        let p = |s: &str| Poly::parse(s).unwrap();
        assert_eq!(HeatExpr::Scalar(p("x1*x2 + 2*x2 + 1")).to_string(), "x1*x2 + 2*x2 + 1");
        assert_eq!(
            HeatExpr::Bag(vec![p("2*x1 + 1"), p("0")]).to_string(),
            "{2*x1 + 1, 0}"
        );
        assert_eq!(HeatExpr::Bag(vec![]).to_string(), "{}");
    }

    #[test]
    fn interpretation_json_round_trip() {
        let (polygraph, interp) = division_interp();
        let dumped = interp.to_json();
        let reloaded = Interpretation::load(&polygraph.gates, &dumped).unwrap();
        assert_eq!(reloaded, interp);
    }
}
