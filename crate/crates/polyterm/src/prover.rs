//! Turning interpretations into termination certificates.
//!
//! A termination proof has two halves: a *proof obligation* — which circuit
//! rules must strictly decrease heat, which only weakly, and which extra side
//! conditions the interpretation must satisfy — and an interpretation that
//! discharges it.  The obligation depends on the syntactic shape of the rule
//! system: the plainer the system, the fewer rules need checking.  This
//! module picks the obligation (`dispatch`), checks a given interpretation
//! against it (`verify`), and enumerates candidate interpretations within
//! bounds (`search`).  Every outcome is packaged as a [`Certificate`].

use crate::interp::poly::{poly_geq, Monomial, Poly};
use crate::interp::{
    check_cell, eval_currents, heat_gt, pinned_structure, CheckResult, CurrentDomain, HeatDomain,
    HeatExpr, InterpError, Interpretation,
};
use crate::translation::{
    build_polygraph, CellFamily, CellSelection, GateSet, Polygraph, ThreeCell, TranslateError,
};
use crate::trs::classify::{classify, TrsClass};
use crate::trs::Trs;
use crate::circuit::StructClass;
use serde_json::{json, Value};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// A proof route: one theorem schema with its own obligation shape.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Route {
    /// Linear and planar systems: the computation rules alone suffice.
    PlanarLinear,
    /// Any left-linear system under multiset heats with four side conditions.
    Special,
    /// Systems that never copy a variable: crossings must act as crossings.
    NonDup,
    /// Constructor/function programs: weak checks on constructor pushes.
    Functional,
    /// Systems not using every resource shape: weak checks on the used ones.
    Partial,
    /// Any left-linear system: weak checks on every gate push.
    General,
}

impl Route {
    /// All routes, from smallest obligation to largest; dispatch picks the
    /// first whose hypotheses hold.
    pub const ALL: [Route; 6] = [
        Route::PlanarLinear,
        Route::Special,
        Route::NonDup,
        Route::Functional,
        Route::Partial,
        Route::General,
    ];

    pub fn parse(text: &str) -> Option<Route> {
        let lowered = text.to_ascii_lowercase();
        let name = lowered.strip_prefix("r-").unwrap_or(&lowered);
        match name {
            "planar-linear" => Some(Route::PlanarLinear),
            "special" => Some(Route::Special),
            "nondup" => Some(Route::NonDup),
            "functional" => Some(Route::Functional),
            "partial" => Some(Route::Partial),
            "general" => Some(Route::General),
            _ => None,
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::PlanarLinear => "R-PLANAR-LINEAR",
            Route::Special => "R-SPECIAL",
            Route::NonDup => "R-NONDUP",
            Route::Functional => "R-FUNCTIONAL",
            Route::Partial => "R-PARTIAL",
            Route::General => "R-GENERAL",
        })
    }
}

/// A route-specific requirement on the interpretation, beyond the per-rule
/// heat checks.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SideCondition {
    /// Resource gates keep their forced currents and zero heat.
    StructureFixed,
    /// Every operation's current dominates each of its argument projections.
    CurrentsDominateProjections,
    /// The singleton bag of an operation's current strictly exceeds its heat.
    SizeAboveOwnHeat,
    /// An operation's heat strictly exceeds any argument it copies.
    HeatCoversCopies,
    /// Crossing gates exchange their currents.
    SwapIsTransposition,
}

impl fmt::Display for SideCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SideCondition::StructureFixed => "structure-fixed",
            SideCondition::CurrentsDominateProjections => "currents-dominate-projections",
            SideCondition::SizeAboveOwnHeat => "size-above-own-heat",
            SideCondition::HeatCoversCopies => "heat-covers-copies",
            SideCondition::SwapIsTransposition => "swap-is-transposition",
        })
    }
}

#[derive(Debug, Error)]
pub enum ProverError {
    #[error("route {route} does not apply: {reason}")]
    RouteNotApplicable { route: Route, reason: String },
    #[error("no proof route applies: some rule repeats a variable on its left-hand side")]
    NotLeftLinear,
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("this check requires multiset heats")]
    MultisetRequired,
}

/// Everything an interpretation must satisfy to certify termination via one
/// route: the circuit rules split into strict and weak checks, plus side
/// conditions.
pub struct ProofObligation {
    pub route: Route,
    pub polygraph: Polygraph,
    strict: Vec<usize>,
    weak: Vec<usize>,
    pub side_conditions: Vec<SideCondition>,
}

impl ProofObligation {
    /// Rules whose heat must drop strictly (always the computation rules).
    pub fn strict_cells(&self) -> impl Iterator<Item = &ThreeCell> {
        self.strict.iter().map(|&i| &self.polygraph.cells[i])
    }

    /// Rules whose heat may stay level (resource-gate pushes).
    pub fn weak_cells(&self) -> impl Iterator<Item = &ThreeCell> {
        self.weak.iter().map(|&i| &self.polygraph.cells[i])
    }

    pub fn to_json(&self) -> Value {
        let entry = |c: &ThreeCell| json!({"cell": c.name, "family": c.family.to_string()});
        json!({
            "route": self.route.to_string(),
            "strict": self.strict_cells().map(entry).collect::<Vec<_>>(),
            "weak": self.weak_cells().map(entry).collect::<Vec<_>>(),
            "conditions": self.side_conditions.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        })
    }
}

/// Why a route's hypotheses fail for this system, if they do.
fn hypothesis_failure(route: Route, class: &TrsClass, heat_domain: HeatDomain) -> Option<String> {
    match route {
        Route::PlanarLinear if !class.linear => {
            Some("every rule must use each of its variables exactly once on both sides".into())
        }
        Route::PlanarLinear if !class.planar => {
            Some("variables must keep their left-to-right order across every rule".into())
        }
        Route::Special if heat_domain != HeatDomain::Multiset => {
            Some("heats must be multisets of polynomials".into())
        }
        Route::NonDup if !class.non_duplicating => {
            Some("some rule copies a variable on its right-hand side".into())
        }
        Route::Functional if !class.functional_program => Some(
            "the rules are not a constructor/function program with trivial overlaps".into(),
        ),
        Route::Partial if class.unused_structure.is_empty() => {
            Some("every resource gate shape is needed by some rule".into())
        }
        _ => None,
    }
}

/// Picks the route (the requested one, or the first applicable by priority)
/// and assembles its proof obligation.
pub fn dispatch(
    class: &TrsClass,
    trs: &Trs,
    requested: Option<Route>,
    heat_domain: HeatDomain,
) -> Result<ProofObligation, ProverError> {
    if !class.left_linear {
        return Err(ProverError::NotLeftLinear);
    }
    let route = match requested {
        Some(route) => match hypothesis_failure(route, class, heat_domain) {
            Some(reason) => return Err(ProverError::RouteNotApplicable { route, reason }),
            None => route,
        },
        None => Route::ALL
            .into_iter()
            .find(|&r| hypothesis_failure(r, class, heat_domain).is_none())
            .expect("the general route always applies"),
    };
    let selection = match route {
        Route::PlanarLinear | Route::Special | Route::NonDup => CellSelection::computation_only(),
        Route::Functional => CellSelection::program(),
        Route::Partial => {
            let used = [StructClass::Swap, StructClass::Dup, StructClass::Erase]
                .into_iter()
                .filter(|c| !class.unused_structure.contains(c))
                .collect();
            CellSelection::partial(used)
        }
        Route::General => CellSelection::general(),
    };
    let polygraph = build_polygraph(trs, &selection)?;
    let mut strict = Vec::new();
    let mut weak = Vec::new();
    for (i, cell) in polygraph.cells.iter().enumerate() {
        if cell.family == CellFamily::Computation {
            strict.push(i);
        } else {
            assert!(
                matches!(
                    cell.family,
                    CellFamily::ConstructorPush | CellFamily::FunctionPush
                ),
                "weak checks only ever cover gate-push rules"
            );
            weak.push(i);
        }
    }
    let side_conditions = match route {
        Route::Special => vec![
            SideCondition::StructureFixed,
            SideCondition::CurrentsDominateProjections,
            SideCondition::SizeAboveOwnHeat,
            SideCondition::HeatCoversCopies,
        ],
        Route::NonDup => vec![SideCondition::SwapIsTransposition],
        _ => Vec::new(),
    };
    Ok(ProofObligation {
        route,
        polygraph,
        strict,
        weak,
        side_conditions,
    })
}

/// One evaluated side-condition instance.
#[derive(Clone, Debug)]
pub struct ConditionReport {
    /// Stable identifier, e.g. `heat-covers-copies(Q, 2)`.
    pub condition: String,
    pub holds: bool,
    pub witness: Option<String>,
}

impl ConditionReport {
    fn ok(condition: String) -> ConditionReport {
        ConditionReport {
            condition,
            holds: true,
            witness: None,
        }
    }

    fn fail(condition: String, witness: String) -> ConditionReport {
        ConditionReport {
            condition,
            holds: false,
            witness: Some(witness),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "condition": self.condition,
            "holds": self.holds,
            "witness": self.witness,
        })
    }
}

/// Expands one side condition into per-gate (or per-argument) reports.
fn condition_reports(
    condition: SideCondition,
    gates: &GateSet,
    class: &TrsClass,
    interp: &Interpretation,
) -> Vec<ConditionReport> {
    let domain = interp.current_domain;
    let mut out = Vec::new();
    match condition {
        SideCondition::StructureFixed => {
            for decl in gates.structure() {
                let id = format!("{condition}({})", decl.name);
                let forced = pinned_structure(&decl, interp.heat_domain)
                    .expect("resource gates have forced values");
                match interp.cell(&decl.name) {
                    Some(ci) if *ci == forced => out.push(ConditionReport::ok(id)),
                    Some(_) => out.push(ConditionReport::fail(
                        id,
                        "the resource gate must keep its forced currents and zero heat".into(),
                    )),
                    None => out.push(ConditionReport::fail(
                        id,
                        "no interpretation for this gate".into(),
                    )),
                }
            }
        }
        SideCondition::CurrentsDominateProjections => {
            for decl in gates.algebra() {
                for i in 1..=decl.arity() {
                    let id = format!("{condition}({}, {i})", decl.name);
                    out.push(match interp.cell(&decl.name) {
                        Some(ci) => {
                            let current = &ci.currents[0];
                            let projection = Poly::var(format!("x{i}"));
                            if poly_geq(&domain.shift(current), &domain.shift(&projection)) {
                                ConditionReport::ok(id)
                            } else {
                                ConditionReport::fail(
                                    id,
                                    format!(
                                        "current {current} does not provably dominate input x{i}"
                                    ),
                                )
                            }
                        }
                        None => ConditionReport::fail(id, "no interpretation for this gate".into()),
                    });
                }
            }
        }
        SideCondition::SizeAboveOwnHeat => {
            for decl in gates.algebra() {
                let id = format!("{condition}({})", decl.name);
                out.push(match interp.cell(&decl.name) {
                    Some(ci) => {
                        let size = HeatExpr::Bag(vec![ci.currents[0].clone()]);
                        if heat_gt(&size.shift(domain), &ci.heat.shift(domain)) {
                            ConditionReport::ok(id)
                        } else {
                            ConditionReport::fail(
                                id,
                                format!(
                                    "{{{}}} does not strictly exceed the heat {}",
                                    ci.currents[0], ci.heat
                                ),
                            )
                        }
                    }
                    None => ConditionReport::fail(id, "no interpretation for this gate".into()),
                });
            }
        }
        SideCondition::HeatCoversCopies => {
            for (op, ks) in &class.k_table {
                for (index, &k) in ks.iter().enumerate() {
                    if k < 2 {
                        continue;
                    }
                    let arg = index + 1;
                    let id = format!("{condition}({op}, {arg})");
                    out.push(match interp.cell(op) {
                        Some(ci) => {
                            let copied = HeatExpr::Bag(vec![Poly::var(format!("x{arg}"))]);
                            if heat_gt(&ci.heat.shift(domain), &copied.shift(domain)) {
                                ConditionReport::ok(id)
                            } else {
                                ConditionReport::fail(
                                    id,
                                    format!(
                                        "heat {} does not strictly exceed {{x{arg}}}, \
                                         though argument {arg} is copied up to {k} times",
                                        ci.heat
                                    ),
                                )
                            }
                        }
                        None => ConditionReport::fail(id, "no interpretation for this gate".into()),
                    });
                }
            }
        }
        SideCondition::SwapIsTransposition => {
            for decl in gates.structure() {
                if decl.kind.struct_class() != Some(StructClass::Swap) {
                    continue;
                }
                let id = format!("{condition}({})", decl.name);
                let expected = vec![Poly::var("x2"), Poly::var("x1")];
                out.push(match interp.cell(&decl.name) {
                    Some(ci) if ci.currents == expected => ConditionReport::ok(id),
                    Some(_) => ConditionReport::fail(
                        id,
                        "crossing currents must be (x2, x1)".into(),
                    ),
                    None => ConditionReport::fail(id, "no interpretation for this gate".into()),
                });
            }
        }
    }
    out
}

/// Evaluates the four multiset-route side conditions for every gate and
/// copy-table entry, without picking a route or checking any rules.
pub fn check_special_conditions(
    trs: &Trs,
    class: &TrsClass,
    interp: &Interpretation,
) -> Result<Vec<ConditionReport>, ProverError> {
    if interp.heat_domain != HeatDomain::Multiset {
        return Err(ProverError::MultisetRequired);
    }
    let gates = GateSet::new(trs.signature());
    Ok([
        SideCondition::StructureFixed,
        SideCondition::CurrentsDominateProjections,
        SideCondition::SizeAboveOwnHeat,
        SideCondition::HeatCoversCopies,
    ]
    .into_iter()
    .flat_map(|c| condition_reports(c, &gates, class, interp))
    .collect())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Verdict {
    Terminating,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Terminating => "terminating",
            Verdict::Unknown => "unknown",
        })
    }
}

/// Candidate complexity bounds read off a successful program certificate:
/// the output-size and step-count polynomials of one operation.  These are
/// *not* certified by the termination proof itself.
#[derive(Clone, Debug)]
pub struct FunctionBounds {
    pub op: String,
    pub size: String,
    pub time: String,
}

impl FunctionBounds {
    pub fn to_json(&self) -> Value {
        json!({
            "op": self.op,
            "size": self.size,
            "time": self.time,
            "status": "candidate",
        })
    }
}

/// Deterministic counters describing a search run.
#[derive(Clone, Copy, Debug, Default)]
pub struct SearchStats {
    /// Current assignments proposed (stage one).
    pub currents_tried: u64,
    /// Full interpretations checked (stage two).
    pub candidates_tried: u64,
    /// The configured budget.
    pub budget: u64,
}

impl SearchStats {
    pub fn spent(&self) -> u64 {
        self.currents_tried + self.candidates_tried
    }

    pub fn to_json(&self) -> Value {
        json!({
            "currents_tried": self.currents_tried,
            "candidates_tried": self.candidates_tried,
            "budget": self.budget,
            "spent": self.spent(),
        })
    }
}

/// The full outcome of a verification or search run.
pub struct Certificate {
    pub verdict: Verdict,
    pub route: Route,
    /// Name and family of every strictly checked rule.
    pub strict_summary: Vec<(String, CellFamily)>,
    /// Name and family of every weakly checked rule.
    pub weak_summary: Vec<(String, CellFamily)>,
    pub side_conditions: Vec<SideCondition>,
    /// The interpretation that was checked (absent when a search found none).
    pub interpretation: Option<Interpretation>,
    pub checks: Vec<CheckResult>,
    pub conditions: Vec<ConditionReport>,
    pub bounds: Vec<FunctionBounds>,
    pub notes: Vec<String>,
    /// Search counters; absent for plain verification.
    pub stats: Option<SearchStats>,
}

impl Certificate {
    /// The rule checks that did not certify.
    pub fn failing(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.ok())
    }

    pub fn to_json(&self) -> Value {
        let entry = |(name, family): &(String, CellFamily)| {
            json!({"cell": name, "family": family.to_string()})
        };
        json!({
            "verdict": self.verdict.to_string(),
            "route": self.route.to_string(),
            "obligation": {
                "strict": self.strict_summary.iter().map(entry).collect::<Vec<_>>(),
                "weak": self.weak_summary.iter().map(entry).collect::<Vec<_>>(),
                "conditions": self.side_conditions.iter()
                    .map(|c| c.to_string()).collect::<Vec<_>>(),
            },
            "interpretation": self.interpretation.as_ref().map(|i| i.to_json()),
            "checks": self.checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "conditions": self.conditions.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "bounds": self.bounds.iter().map(|b| b.to_json()).collect::<Vec<_>>(),
            "notes": self.notes,
            "stats": self.stats.as_ref().map(|s| s.to_json()),
        })
    }
}

fn provenance_notes(interp: &Interpretation) -> Vec<String> {
    let mut notes = vec![match interp.current_domain {
        CurrentDomain::Naturals => "currents range over the naturals".to_string(),
        CurrentDomain::PositiveNaturals => {
            "currents range over the positive naturals; comparisons shift every variable by one"
                .to_string()
        }
    }];
    if interp.heat_domain == HeatDomain::Multiset {
        notes.push("heats are multisets, compared by the multiset extension".to_string());
    }
    notes.push(
        "polynomial comparisons are sound but incomplete corner tests; \
         a failed check is unproven, not refuted"
            .to_string(),
    );
    notes
}

/// Runs every rule check and side condition of the obligation against one
/// interpretation and assembles the certificate.
fn certify(
    class: &TrsClass,
    obligation: &ProofObligation,
    interp: &Interpretation,
) -> Result<Certificate, ProverError> {
    let mut checks = Vec::new();
    for cell in obligation.strict_cells() {
        checks.push(check_cell(interp, cell, true)?);
    }
    for cell in obligation.weak_cells() {
        checks.push(check_cell(interp, cell, false)?);
    }
    let conditions: Vec<ConditionReport> = obligation
        .side_conditions
        .iter()
        .flat_map(|&c| condition_reports(c, &obligation.polygraph.gates, class, interp))
        .collect();
    let certified = checks.iter().all(CheckResult::ok) && conditions.iter().all(|c| c.holds);
    let verdict = if certified {
        Verdict::Terminating
    } else {
        Verdict::Unknown
    };
    let bounds = if certified && obligation.route == Route::Functional {
        class
            .functions
            .iter()
            .filter_map(|op| {
                interp.cell(op).map(|ci| FunctionBounds {
                    op: op.clone(),
                    size: ci.currents[0].to_string(),
                    time: ci.heat.to_string(),
                })
            })
            .collect()
    } else {
        Vec::new()
    };
    let summary = |cells: Vec<&ThreeCell>| {
        cells
            .into_iter()
            .map(|c| (c.name.clone(), c.family))
            .collect::<Vec<_>>()
    };
    Ok(Certificate {
        verdict,
        route: obligation.route,
        strict_summary: summary(obligation.strict_cells().collect()),
        weak_summary: summary(obligation.weak_cells().collect()),
        side_conditions: obligation.side_conditions.clone(),
        interpretation: Some(interp.clone()),
        checks,
        conditions,
        bounds,
        notes: provenance_notes(interp),
        stats: None,
    })
}

/// Checks one interpretation against the system, choosing the route by
/// priority unless one is requested.
pub fn verify(
    trs: &Trs,
    interp: &Interpretation,
    requested: Option<Route>,
) -> Result<Certificate, ProverError> {
    let class = classify(trs);
    let obligation = dispatch(&class, trs, requested, interp.heat_domain)?;
    interp.validate(&obligation.polygraph.gates)?;
    certify(&class, &obligation, interp)
}

/// Enumeration limits for [`search`].
#[derive(Clone, Copy, Debug)]
pub struct SearchBounds {
    /// Largest total degree of any candidate polynomial.
    pub max_degree: u32,
    /// Largest coefficient of any candidate polynomial.
    pub max_coeff: u64,
    /// Total number of candidates (partial or full) examined before giving
    /// up.  Must be positive.
    pub budget: u64,
}

impl Default for SearchBounds {
    fn default() -> SearchBounds {
        SearchBounds {
            max_degree: 2,
            max_coeff: 3,
            budget: 500_000,
        }
    }
}

/// Monomials over `x1..xm` of total degree at most `max_degree`, ordered by
/// degree and then by exponent vector.
fn monomials_up_to(arity: usize, max_degree: u32) -> Vec<Monomial> {
    let mut exponents: Vec<Vec<u32>> = Vec::new();
    let mut current = vec![0u32; arity];
    fn fill(current: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<Vec<u32>>) {
        if pos == current.len() {
            out.push(current.clone());
            return;
        }
        for e in 0..=left {
            current[pos] = e;
            fill(current, pos + 1, left - e, out);
        }
        current[pos] = 0;
    }
    fill(&mut current, 0, max_degree, &mut exponents);
    exponents.sort_by_key(|es| (es.iter().sum::<u32>(), es.clone()));
    exponents
        .into_iter()
        .map(|es| {
            let mut m = Monomial::one();
            for (i, &e) in es.iter().enumerate() {
                for _ in 0..e {
                    m = m.mul(&Monomial::var(format!("x{}", i + 1)));
                }
            }
            m
        })
        .collect()
}

/// Steps a big-endian coefficient odometer; false once the space is swept.
fn advance(digits: &mut [u64], max: u64) -> bool {
    for d in digits.iter_mut().rev() {
        if *d < max {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

fn poly_from_coeffs(template: &[Monomial], coeffs: &[u64]) -> Poly {
    let mut p = Poly::zero();
    for (m, &c) in template.iter().zip(coeffs) {
        p.add_term(m.clone(), c);
    }
    p
}

/// Searches for an interpretation certifying termination, trying routes in
/// the given order (all of them, by priority, when empty).
///
/// Candidates are enumerated in a fixed lexicographic order, currents first:
/// a current assignment that fails the weak current inequalities is dropped
/// before any heat is attached to it.  Resource gates keep their forced
/// values throughout.  The first success wins, regardless of scheduling, and
/// the reported statistics are reproducible.
pub fn search(
    trs: &Trs,
    bounds: &SearchBounds,
    routes: &[Route],
    current_domain: CurrentDomain,
    heat_domain: HeatDomain,
) -> Result<Certificate, ProverError> {
    assert!(bounds.budget > 0, "the search budget must be positive");
    let class = classify(trs);
    if !class.left_linear {
        return Err(ProverError::NotLeftLinear);
    }
    let routes = if routes.is_empty() {
        &Route::ALL[..]
    } else {
        routes
    };
    let route = match routes
        .iter()
        .copied()
        .find(|&r| hypothesis_failure(r, &class, heat_domain).is_none())
    {
        Some(route) => route,
        None => {
            let route = routes[0];
            let reason = hypothesis_failure(route, &class, heat_domain)
                .expect("an inapplicable route has a reason");
            return Err(ProverError::RouteNotApplicable { route, reason });
        }
    };
    let obligation = dispatch(&class, trs, Some(route), heat_domain)?;
    let gates: Vec<Arc<crate::circuit::TwoCellDecl>> =
        obligation.polygraph.gates.algebra().to_vec();
    let templates: Vec<Vec<Monomial>> = gates
        .iter()
        .map(|g| monomials_up_to(g.arity(), bounds.max_degree))
        .collect();
    let slot_count: usize = templates.iter().map(Vec::len).sum();
    let slices: Vec<std::ops::Range<usize>> = {
        let mut start = 0;
        templates
            .iter()
            .map(|t| {
                let r = start..start + t.len();
                start += t.len();
                r
            })
            .collect()
    };

    let mut base = Interpretation::new(current_domain, heat_domain);
    base.fill_structure(&obligation.polygraph.gates);
    let obligation_cells: Vec<&ThreeCell> = obligation
        .strict_cells()
        .chain(obligation.weak_cells())
        .collect();

    let mut stats = SearchStats {
        budget: bounds.budget,
        ..SearchStats::default()
    };
    let mut exhausted_note = "the search space within the given bounds is exhausted".to_string();
    let mut current_coeffs = vec![0u64; slot_count];
    'currents: loop {
        if stats.spent() >= bounds.budget {
            exhausted_note = "the search budget ran out".to_string();
            break;
        }
        stats.currents_tried += 1;

        let mut interp = base.clone();
        for (i, gate) in gates.iter().enumerate() {
            let current = poly_from_coeffs(&templates[i], &current_coeffs[slices[i].clone()]);
            interp.set(&gate.name, vec![current], HeatExpr::zero(heat_domain));
        }
        let viable = interp.validate(&obligation.polygraph.gates).is_ok()
            && obligation_cells
                .iter()
                .all(|cell| currents_weakly_ok(&interp, cell));
        if viable {
            let mut heat_coeffs = vec![0u64; slot_count];
            loop {
                if stats.spent() >= bounds.budget {
                    exhausted_note = "the search budget ran out".to_string();
                    break 'currents;
                }
                stats.candidates_tried += 1;

                let mut candidate = interp.clone();
                for (i, gate) in gates.iter().enumerate() {
                    let poly = poly_from_coeffs(&templates[i], &heat_coeffs[slices[i].clone()]);
                    let heat = match heat_domain {
                        HeatDomain::Scalar => HeatExpr::Scalar(poly),
                        HeatDomain::Multiset if poly.is_zero() => HeatExpr::Bag(Vec::new()),
                        HeatDomain::Multiset => HeatExpr::Bag(vec![poly]),
                    };
                    let currents = candidate
                        .cell(&gate.name)
                        .expect("stage one set every gate")
                        .currents
                        .clone();
                    candidate.set(&gate.name, currents, heat);
                }
                if candidate_passes(&class, &obligation, &candidate)? {
                    let mut cert = certify(&class, &obligation, &candidate)?;
                    cert.notes
                        .push("interpretation found by bounded enumeration".to_string());
                    cert.stats = Some(stats);
                    return Ok(cert);
                }
                if !advance(&mut heat_coeffs, bounds.max_coeff) {
                    break;
                }
            }
        }
        if !advance(&mut current_coeffs, bounds.max_coeff) {
            break;
        }
    }

    let summary = |cells: Vec<&ThreeCell>| {
        cells
            .into_iter()
            .map(|c| (c.name.clone(), c.family))
            .collect::<Vec<_>>()
    };
    Ok(Certificate {
        verdict: Verdict::Unknown,
        route,
        strict_summary: summary(obligation.strict_cells().collect()),
        weak_summary: summary(obligation.weak_cells().collect()),
        side_conditions: obligation.side_conditions.clone(),
        interpretation: None,
        checks: Vec::new(),
        conditions: Vec::new(),
        bounds: Vec::new(),
        notes: vec![exhausted_note],
        stats: Some(stats),
    })
}

/// Stage-one filter: the candidate currents must already satisfy the weak
/// current inequalities on every obligated rule.
fn currents_weakly_ok(interp: &Interpretation, cell: &ThreeCell) -> bool {
    let (src, tgt) = match (
        eval_currents(interp, &cell.source),
        eval_currents(interp, &cell.target),
    ) {
        (Ok(s), Ok(t)) => (s, t),
        _ => return false,
    };
    let domain = interp.current_domain;
    src.len() == tgt.len()
        && src
            .iter()
            .zip(&tgt)
            .all(|(a, b)| poly_geq(&domain.shift(a), &domain.shift(b)))
}

/// Stage-two filter: all rule checks and side conditions, short-circuiting
/// on the first failure.
fn candidate_passes(
    class: &TrsClass,
    obligation: &ProofObligation,
    interp: &Interpretation,
) -> Result<bool, ProverError> {
    for cell in obligation.strict_cells() {
        if !check_cell(interp, cell, true)?.ok() {
            return Ok(false);
        }
    }
    for cell in obligation.weak_cells() {
        if !check_cell(interp, cell, false)?.ok() {
            return Ok(false);
        }
    }
    for &condition in &obligation.side_conditions {
        let reports = condition_reports(condition, &obligation.polygraph.gates, class, interp);
        if reports.iter().any(|r| !r.holds) {
            return Ok(false);
        }
    }
    Ok(true)
}
