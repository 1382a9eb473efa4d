//! The acceptance gate: ten numbered checks, one test each, every test
//! printing a `criterion NN: PASS` line when its assertions hold (run with
//! `cargo test --test acceptance -- --nocapture` to see the lines).

mod common;

use common::*;
use polyterm::circuit::TwoPath;
use polyterm::engine::{find_redexes, normalize, structure_then_algebra, Strategy};
use polyterm::interp::poly::{poly_geq, poly_gt, Monomial, Poly};
use polyterm::interp::{eval_currents, eval_heat, CurrentDomain, HeatDomain, HeatExpr, Interpretation};
use polyterm::prover::{search, verify, Certificate, Route, SearchBounds, Verdict};
use polyterm::translation::{
    build_polygraph, rule_context, translate_term, translate_term_tracked, CellSelection, GateSet,
};
use polyterm::trs::classify::classify;
use polyterm::trs::parse::parse_trs;
use polyterm::trs::rewrite::{bounded_search_for_loop, find_term_redexes, rewrite_at, TermRedex};
use polyterm::trs::{Term, Trs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use std::collections::BTreeMap;
use std::time::{Duration, Instant};

fn pass(number: usize, message: &str) {
    println!("criterion {number:02}: PASS — {message}");
}

#[test]
fn criterion_01_cell_counts_follow_the_closed_formula() {
    let trs = division();
    let p = trs.rules().len();
    let n = trs.signature().ops().len();
    let m = trs.signature().sorts().len();
    assert_eq!((p, n, m), (5, 4, 1));
    let formula = p + 2 * n * (m + 1) + m * (m * m + 6 * m + 5);

    let full = build_polygraph(&trs, &CellSelection::full()).expect("full selection");
    assert_eq!(full.cells.len(), 33, "every family together");
    assert_eq!(full.cells.len(), formula, "the closed formula agrees");

    let pushes = build_polygraph(&trs, &push_rules()).expect("push selection");
    assert_eq!(pushes.cells.len(), 16, "gate pushes alone");

    let constructor_pushes =
        build_polygraph(&trs, &constructor_push_rules()).expect("constructor selection");
    assert_eq!(constructor_pushes.cells.len(), 8, "constructor pushes alone");

    pass(1, "33 rules in total, 16 gate pushes, 8 constructor pushes");
}

#[test]
fn criterion_02_the_worked_heat_computation_matches() {
    let trs = parse_trs("(VAR x y) (RULES M(x, s(y)) -> M(x, y))").expect("fixture parses");
    let gates = GateSet::new(trs.signature());
    let interp = Interpretation::load(
        &gates,
        &json!({
            "domain": "N",
            "heat_domain": "N",
            "cells": {
                "M": {"currents": ["x1*x2"], "heat": "x1*x2 + x2"},
                "s": {"currents": ["x1 + 1"], "heat": "0"},
            }
        }),
    )
    .expect("the worked example loads");

    let rule = &trs.rules()[0];
    let circuit = translate_term(&gates, &rule.lhs, &rule_context(&trs, rule))
        .expect("the left-hand side translates");
    assert_eq!(circuit.node_count(), 2, "one gate below, one above");

    let heat = eval_heat(&interp, &circuit).expect("total interpretation");
    let expected = Poly::parse("x1*x2 + x1 + x2 + 1").expect("literal parses");
    assert_eq!(heat, HeatExpr::Scalar(expected));
    assert_eq!(heat.to_string(), "x1*x2 + x1 + x2 + 1");

    let currents = eval_currents(&interp, &circuit).expect("total interpretation");
    assert_eq!(currents.len(), 1);
    assert_eq!(currents[0].to_string(), "x1*x2 + x1");

    pass(2, "heat of the two-gate composite is x1*x2 + x1 + x2 + 1");
}

fn division_functional_certificate() -> (Trs, Certificate) {
    let trs = division();
    let interp = division_interp(&trs);
    let cert = verify(&trs, &interp, Some(Route::Functional)).expect("the route applies");
    (trs, cert)
}

#[test]
fn criterion_03_division_verifies_and_the_duplication_rule_blocks_the_general_route() {
    let (trs, cert) = division_functional_certificate();
    assert_eq!(cert.route, Route::Functional);
    assert_eq!(cert.verdict, Verdict::Terminating);

    let r5 = cert
        .checks
        .iter()
        .find(|c| c.cell == "r5")
        .expect("the last rule is checked");
    assert_eq!(r5.source_heat.to_string(), "x1*x2 + 2*x2");
    assert_eq!(r5.target_heat.to_string(), "x1*x2 + x2");
    assert!(r5.ok());

    let interp = division_interp(&trs);
    let general = verify(&trs, &interp, Some(Route::General)).expect("the route applies");
    assert_eq!(general.verdict, Verdict::Unknown);
    let failing: Vec<&str> = general.failing().map(|c| c.cell.as_str()).collect();
    assert!(
        failing.contains(&"dup(Q)"),
        "the copy rule for Q fails, got {failing:?}"
    );
    assert!(
        failing.iter().all(|c| *c == "dup(M)" || *c == "dup(Q)"),
        "only the copy rules fail, got {failing:?}"
    );
    let dup_q = general
        .checks
        .iter()
        .find(|c| c.cell == "dup(Q)")
        .expect("the copy rule is checked");
    assert_eq!(dup_q.source_heat.to_string(), "x1*x2");
    assert_eq!(dup_q.target_heat.to_string(), "2*x1*x2", "the heat doubles");

    pass(
        3,
        "terminating on the program route; unknown on the general route with dup(Q) failing",
    );
}

#[test]
fn criterion_04_double_verifies_and_a_bounded_search_rediscovers_it() {
    let trs = double();
    let interp = double_interp(&trs);
    assert_eq!(interp.cell("D").expect("D is assigned").currents[0].to_string(), "2*x1");
    assert_eq!(interp.cell("D").expect("D is assigned").heat.to_string(), "x1");

    let cert = verify(&trs, &interp, None).expect("a route applies");
    assert_eq!(cert.route, Route::PlanarLinear);
    assert_eq!(cert.verdict, Verdict::Terminating);

    let started = Instant::now();
    let found = search(
        &trs,
        &SearchBounds {
            max_degree: 1,
            max_coeff: 3,
            budget: 500_000,
        },
        &[],
        CurrentDomain::Naturals,
        HeatDomain::Scalar,
    )
    .expect("a route applies");
    let elapsed = started.elapsed();
    assert_eq!(found.verdict, Verdict::Terminating);
    assert_eq!(found.route, Route::PlanarLinear);
    assert!(
        elapsed < Duration::from_secs(10),
        "the bounded search must finish within ten seconds, took {elapsed:?}"
    );

    pass(4, "planar route verified and rediscovered by search within the time limit");
}

#[test]
fn criterion_05_the_certificate_carries_candidate_bounds_for_the_quotient() {
    let (_, cert) = division_functional_certificate();
    let q = cert
        .bounds
        .iter()
        .find(|b| b.op == "Q")
        .expect("a bounds row for Q");
    assert_eq!(q.size, "x1");
    assert_eq!(q.time, "x1*x2");

    let rendered = cert.to_json();
    let rows = rendered["bounds"].as_array().expect("bounds render as an array");
    assert!(!rows.is_empty());
    assert!(
        rows.iter().all(|row| row["status"] == "candidate"),
        "every row is labeled a candidate"
    );

    pass(5, "bounds table lists size(Q) = x1 and time(Q) = x1*x2 as candidates");
}

#[test]
fn criterion_06_normal_forms_have_the_predicted_shape() {
    let trs = division();
    let gates = GateSet::new(trs.signature());
    let resource = build_polygraph(&trs, &resource_rules()).expect("selection is valid");
    let pushes = build_polygraph(&trs, &push_rules()).expect("selection is valid");

    // (a) Translations never contain a resource-management redex.
    let mut translations: Vec<TwoPath> = ground_term_pool(&trs, 5)
        .iter()
        .map(|t| translate_term(&gates, t, &[]).expect("ground terms translate"))
        .collect();
    for rule in trs.rules() {
        let xs = rule_context(&trs, rule);
        for side in [&rule.lhs, &rule.rhs] {
            translations.push(translate_term(&gates, side, &xs).expect("rule sides translate"));
        }
    }
    for circuit in &translations {
        assert!(
            find_redexes(circuit, &resource.cells).is_empty(),
            "a translation must already be in resource normal form"
        );
    }

    // (b) + (c) over an enumerated corpus of small circuits.
    let corpus = circuit_corpus(&gates, 6, 4, 1500);
    assert!(corpus.len() >= 1000, "the corpus is large enough to mean something");
    let mut memo = BTreeMap::new();
    for circuit in &corpus {
        let (nf, _, exhausted) = normalize(circuit, &pushes.cells, Strategy::Any, 10_000);
        assert!(!exhausted, "push rules terminate on the corpus");
        assert!(
            structure_then_algebra(&nf),
            "a push-normal circuit splits into resource gates below, operations above"
        );

        let all = all_normal_forms(circuit, &pushes.cells, &mut memo);
        assert_eq!(
            all.len(),
            1,
            "every reduction order reaches one normal form up to deformation"
        );
        assert_eq!(all.iter().next().expect("nonempty"), &nf.canonical_key());
    }

    pass(
        6,
        "translations are resource-normal; push-normal forms split and are unique",
    );
}

#[test]
fn criterion_07_term_steps_lift_to_circuit_steps() {
    struct System {
        trs: Trs,
        gates: GateSet,
        computation: Vec<polyterm::translation::ThreeCell>,
        resource: Vec<polyterm::translation::ThreeCell>,
        pool: Vec<(Term, Vec<TermRedex>)>,
    }
    let load = |text: &str| -> System {
        let trs = parse_trs(text).expect("fixture parses");
        let gates = GateSet::new(trs.signature());
        let computation = build_polygraph(&trs, &CellSelection::computation_only())
            .expect("selection is valid")
            .cells;
        let resource = build_polygraph(&trs, &resource_rules())
            .expect("selection is valid")
            .cells;
        let pool: Vec<(Term, Vec<TermRedex>)> = ground_term_pool(&trs, 5)
            .into_iter()
            .map(|t| {
                let redexes = find_term_redexes(&trs, &t);
                (t, redexes)
            })
            .filter(|(_, redexes)| !redexes.is_empty())
            .collect();
        System {
            trs,
            gates,
            computation,
            resource,
            pool,
        }
    };
    let systems = [load(DIVISION), load(DOUBLE)];
    assert!(systems.iter().all(|s| !s.pool.is_empty()));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let system = &systems[rng.gen_range(0..systems.len())];
        let (term, redexes) = &system.pool[rng.gen_range(0..system.pool.len())];
        let redex = &redexes[rng.gen_range(0..redexes.len())];
        let rule = &system.trs.rules()[redex.rule];

        let reduced =
            rewrite_at(term, &redex.position, rule).expect("the recorded redex rewrites");

        let (host, spots) = translate_term_tracked(&system.gates, term, &[])
            .expect("ground terms translate");
        let root = spots[&redex.position];
        let sites: Vec<_> = find_redexes(&host, &system.computation)
            .into_iter()
            .filter(|m| m.cell().name == rule.name && *m.image().last().expect("nonempty") == root)
            .collect();
        assert_eq!(
            sites.len(),
            1,
            "exactly one circuit site realizes the term redex {term} @{:?}",
            redex.position
        );

        let stepped = sites[0].apply();
        let (normalized, _, exhausted) =
            normalize(&stepped, &system.resource, Strategy::Any, 10_000);
        assert!(!exhausted);
        let expected = translate_term(&system.gates, &reduced, &[])
            .expect("ground terms translate");
        assert_eq!(
            normalized.canonical_key(),
            expected.canonical_key(),
            "the circuit step from {term} must land on the translation of {reduced}"
        );
    }

    pass(7, "100 sampled term steps lift to circuit steps and land on the reduct");
}

fn random_poly(rng: &mut ChaCha8Rng) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(0..=4) {
        let mut mono = Monomial::one();
        let mut left: u32 = 3;
        for var in 1..=3u32 {
            let e = rng.gen_range(0..=left);
            for _ in 0..e {
                mono = mono.mul(&Monomial::var(format!("x{var}")));
            }
            left -= e;
        }
        p.add_term(mono, rng.gen_range(1..=4));
    }
    p
}

#[test]
fn criterion_08_certified_comparisons_survive_a_grid_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let grid = grid_points(3, 6);
    let (mut certified_geq, mut certified_gt) = (0u32, 0u32);
    for _ in 0..1000 {
        let p = random_poly(&mut rng);
        let q = random_poly(&mut rng);
        let geq = poly_geq(&p, &q);
        let gt = poly_gt(&p, &q);
        if gt {
            assert!(geq, "strictness implies the weak comparison");
        }
        if !(geq || gt) {
            continue;
        }
        certified_geq += u32::from(geq);
        certified_gt += u32::from(gt);
        for point in &grid {
            let (a, b) = (eval_poly_at(&p, point), eval_poly_at(&q, point));
            if geq {
                assert!(a >= b, "({p}) >= ({q}) certified but {a} < {b} at {point:?}");
            }
            if gt {
                assert!(a > b, "({p}) > ({q}) certified but {a} <= {b} at {point:?}");
            }
        }
    }
    assert!(certified_geq > 0, "the sweep exercised certified comparisons");
    assert!(
        certified_gt <= certified_geq,
        "strict certifications are a subset of the weak ones"
    );

    pass(
        8,
        "1000 random pairs: no certified comparison contradicted on the 7^3 grid",
    );
}

#[test]
fn criterion_09_the_copy_table_matches_an_independent_count() {
    let trs = division();
    let class = classify(&trs);
    assert_eq!(class.k_table.get("M"), Some(&vec![1, 1]));
    assert_eq!(class.k_table.get("Q"), Some(&vec![1, 2]));
    assert_eq!(
        class.k_table,
        occurrence_oracle(&trs),
        "the classifier and the raw-term oracle agree"
    );

    pass(9, "K(M) = [1, 1] and K(Q) = [1, 2], confirmed by the occurrence oracle");
}

#[test]
fn criterion_10_terminating_verdicts_survive_ground_replay() {
    let mut corpus: Vec<(&str, Trs, Certificate)> = Vec::new();

    let trs = division();
    let cert = verify(&trs, &division_interp(&trs), Some(Route::Functional))
        .expect("the route applies");
    corpus.push(("division, program route", trs, cert));

    let trs = double();
    let cert = verify(&trs, &double_interp(&trs), None).expect("a route applies");
    corpus.push(("double, planar route", trs, cert));

    let trs = double();
    let cert = search(
        &trs,
        &SearchBounds {
            max_degree: 1,
            max_coeff: 3,
            budget: 500_000,
        },
        &[],
        CurrentDomain::Naturals,
        HeatDomain::Scalar,
    )
    .expect("a route applies");
    corpus.push(("double, searched", trs, cert));

    let trs = parse_trs("(VAR x y) (RULES f(x,y) -> g(y,x) h(a) -> a)").expect("fixture parses");
    let gates = GateSet::new(trs.signature());
    let interp = Interpretation::load(
        &gates,
        &json!({
            "cells": {
                "f": {"currents": ["x1 + x2"], "heat": "1"},
                "g": {"currents": ["x1 + x2"], "heat": "0"},
                "h": {"currents": ["x1"], "heat": "1"},
                "a": {"currents": ["1"], "heat": "0"},
            }
        }),
    )
    .expect("the crossing example loads");
    let cert = verify(&trs, &interp, None).expect("a route applies");
    assert_eq!(cert.route, Route::NonDup);
    corpus.push(("argument swap, crossing route", trs, cert));

    let trs = parse_trs("(VAR x y) (RULES f(x,y) -> g(x,x) h -> c)").expect("fixture parses");
    let gates = GateSet::new(trs.signature());
    let interp = Interpretation::load(
        &gates,
        &json!({
            "domain": "N",
            "heat_domain": "multiset",
            "cells": {
                "f": {"currents": ["2*x1 + x2 + 2"], "heat": ["2*x1 + 1"]},
                "g": {"currents": ["x1 + x2"], "heat": []},
                "h": {"currents": ["2"], "heat": ["1"]},
                "c": {"currents": ["1"], "heat": []},
            }
        }),
    )
    .expect("the copying example loads");
    let cert = verify(&trs, &interp, None).expect("a route applies");
    assert_eq!(cert.route, Route::Special);
    corpus.push(("argument copy, multiset route", trs, cert));

    let mut replayed = 0usize;
    for (label, trs, cert) in &corpus {
        assert_eq!(
            cert.verdict,
            Verdict::Terminating,
            "{label}: the corpus consists of terminating verdicts"
        );
        for term in ground_term_pool(trs, 5) {
            assert!(
                !bounded_search_for_loop(trs, &term, 12),
                "{label}: ground replay found a loop from {term}"
            );
            replayed += 1;
        }
    }
    assert!(replayed > 100, "the replay covered a substantial pool, got {replayed}");

    pass(
        10,
        "five terminating verdicts replayed on all small ground terms: no loops",
    );
}
