//! Rewriting circuits: locating where a rule's source network embeds in a
//! larger circuit, splicing in the rule's target, driving a circuit to normal
//! form under a strategy, and bounded exploration of the rewrite graph.
//!
//! A rule applies at a *site*: a set of gates whose internal wiring reproduces
//! the rule's source network and which can be cut out of the host between two
//! horizontal slices — every other gate fires strictly before or strictly
//! after the site, and the site's boundary wires sit side by side in interface
//! order at the slices.  Site discovery runs in two stages: a wiring-driven
//! search proposes gate assignments, then a scheduling pass that treats the
//! proposed gates as one fused block either exhibits the two slices or rejects
//! the proposal.  The single scheduling pass subsumes both requirements on a
//! site (no wire may leave it and come back, and its boundary must be
//! presentable in order without crossings).  Applying a rule replays the
//! schedule with the fused block swapped for the rule's target network, so the
//! result is well formed by construction and keeps the host's outer interface.

use crate::circuit::{
    layering, Consumers, Contraction, TwoCellDecl, TwoPath, VItem, VNode, WireDst, WireSrc,
};
use crate::translation::ThreeCell;
use serde_json::{json, Value};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

/// Step budget for [`normalize`] when callers have no tighter bound.
pub const DEFAULT_NORMALIZE_FUEL: usize = 10_000;

/// State budget for [`detect_cycle`] when callers have no tighter bound.
pub const DEFAULT_CYCLE_BOUND: usize = 50_000;

/// One way a rule applies to a host circuit: the gate assignment plus a
/// replayable schedule that isolates the assigned gates as a single block.
#[derive(Clone)]
pub struct Match<'a> {
    cell: &'a ThreeCell,
    host: &'a TwoPath,
    /// Host gate chosen for each gate of the rule source, indexed like the
    /// source network's gates.
    image: Vec<usize>,
    /// Schedule of the whole host with the image fused into one block.
    schedule: Vec<VItem>,
    digest: String,
}

impl<'a> Match<'a> {
    pub fn cell(&self) -> &'a ThreeCell {
        self.cell
    }

    /// Host gates forming the site, indexed by the rule source's gates.
    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// Stable site identifier: the rule name plus the matched gates named by
    /// their rank in the host's renumbering-independent gate order.
    pub fn digest(&self) -> &str {
        &self.digest
    }

    /// Replaces the site by the rule's target network.  The outer interface
    /// of the host never changes.
    pub fn apply(&self) -> TwoPath {
        let mut result = TwoPath::identity(self.host.source().clone());
        for item in &self.schedule {
            let middle = match item.node {
                VNode::Real(n) => TwoPath::generator(self.host.nodes()[n].cell.clone()),
                VNode::Block => self.cell.target.clone(),
            };
            let layer = TwoPath::identity(item.left.clone())
                .compose0(&middle)
                .compose0(&TwoPath::identity(item.right.clone()));
            result = result
                .compose1(&layer)
                .expect("replayed schedule layers plug together");
        }
        assert_eq!(
            result.source(),
            self.host.source(),
            "a rewrite must keep the input interface"
        );
        assert_eq!(
            result.target(),
            self.host.target(),
            "a rewrite must keep the output interface"
        );
        result
    }
}

/// Replaces the matched site by the rule's target network.
pub fn apply(m: &Match<'_>) -> TwoPath {
    m.apply()
}

/// All sites where any of the listed rules applies, ordered by rule first and
/// by site position second.  The ordering is reproducible across runs and
/// across hosts that differ only by gate renumbering.
///
/// Every rule source must attach each of its interface wires to a gate (all
/// generated rules do); a source consisting of bare wires has no well-defined
/// set of sites and is rejected with a panic.
pub fn find_redexes<'a>(host: &'a TwoPath, cells: &'a [ThreeCell]) -> Vec<Match<'a>> {
    let hcons = host.consumers();
    let rank = rank_by_canonical_order(host);
    let mut out = Vec::new();
    for cell in cells {
        check_matchable(cell);
        let pattern = &cell.source;
        let pcons = pattern.consumers();
        let mut sites: Vec<Match<'a>> = propose_assignments(host, &hcons, pattern, &pcons)
            .into_iter()
            .filter_map(|image| realize(host, &hcons, cell, &pcons, image))
            .collect();
        sites.sort_by_cached_key(|m| {
            let mut ranks: Vec<usize> = m.image.iter().map(|&h| rank[h]).collect();
            ranks.sort_unstable();
            ranks
        });
        for m in &mut sites {
            m.digest = site_digest(cell, &m.image, &rank);
        }
        out.extend(sites);
    }
    out
}

fn rank_by_canonical_order(host: &TwoPath) -> Vec<usize> {
    let order = host.canonical_order();
    let mut rank = vec![0usize; host.node_count()];
    for (k, &n) in order.iter().enumerate() {
        rank[n] = k;
    }
    rank
}

fn site_digest(cell: &ThreeCell, image: &[usize], rank: &[usize]) -> String {
    let mut ranks: Vec<usize> = image.iter().map(|&h| rank[h]).collect();
    ranks.sort_unstable();
    let spots: Vec<String> = ranks.iter().map(|r| r.to_string()).collect();
    format!("{}@{}", cell.name, spots.join("."))
}

fn check_matchable(cell: &ThreeCell) {
    let p = &cell.source;
    assert!(
        p.node_count() > 0,
        "rule {}: the source network must contain a gate",
        cell.name
    );
    let pcons = p.consumers();
    for (i, dst) in pcons.of_input.iter().enumerate() {
        assert!(
            matches!(dst, WireDst::Node(..)),
            "rule {}: source input {i} must feed a gate",
            cell.name
        );
    }
    for (t, w) in p.outputs().iter().enumerate() {
        assert!(
            matches!(w, WireSrc::Node(..)),
            "rule {}: source output {t} must leave a gate",
            cell.name
        );
    }
}

fn same_gate(a: &Arc<TwoCellDecl>, b: &Arc<TwoCellDecl>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// Gate assignments that reproduce the pattern's wiring.  Assignments are
/// proposals: whether the site can actually be cut out is decided afterwards
/// by the scheduling pass.
fn propose_assignments(
    host: &TwoPath,
    hcons: &Consumers,
    pattern: &TwoPath,
    pcons: &Consumers,
) -> Vec<Vec<usize>> {
    let anchors = component_anchors(pattern, pcons);
    let mut assign: Vec<Option<usize>> = vec![None; pattern.node_count()];
    let mut used = vec![false; host.node_count()];
    let mut found = Vec::new();
    extend_assignment(
        host, hcons, pattern, pcons, &anchors, 0, &mut assign, &mut used, &mut found,
    );
    found
}

/// The smallest gate index of each connected component of the pattern.
fn component_anchors(pattern: &TwoPath, pcons: &Consumers) -> Vec<usize> {
    let n = pattern.node_count();
    let mut seen = vec![false; n];
    let mut anchors = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        anchors.push(start);
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(m) = stack.pop() {
            let visit = |m2: usize, seen: &mut Vec<bool>, stack: &mut Vec<usize>| {
                if !seen[m2] {
                    seen[m2] = true;
                    stack.push(m2);
                }
            };
            for w in &pattern.nodes()[m].inputs {
                if let WireSrc::Node(m2, _) = w {
                    visit(*m2, &mut seen, &mut stack);
                }
            }
            for dst in &pcons.of_node[m] {
                if let WireDst::Node(m2, _) = dst {
                    visit(*m2, &mut seen, &mut stack);
                }
            }
        }
    }
    anchors
}

#[allow(clippy::too_many_arguments)]
fn extend_assignment(
    host: &TwoPath,
    hcons: &Consumers,
    pattern: &TwoPath,
    pcons: &Consumers,
    anchors: &[usize],
    next: usize,
    assign: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    found: &mut Vec<Vec<usize>>,
) {
    if next == anchors.len() {
        found.push(assign.iter().map(|a| a.expect("component swept")).collect());
        return;
    }
    for h in 0..host.node_count() {
        if used[h] {
            continue;
        }
        let saved_assign = assign.clone();
        let saved_used = used.clone();
        if propagate(host, hcons, pattern, pcons, anchors[next], h, assign, used) {
            extend_assignment(
                host,
                hcons,
                pattern,
                pcons,
                anchors,
                next + 1,
                assign,
                used,
                found,
            );
        }
        *assign = saved_assign;
        *used = saved_used;
    }
}

/// Grows an assignment from one seed pair by following the pattern's wires in
/// both directions.  Within a connected component the assignment is fully
/// determined by the seed; returns false as soon as any wire disagrees.
#[allow(clippy::too_many_arguments)]
fn propagate(
    host: &TwoPath,
    hcons: &Consumers,
    pattern: &TwoPath,
    pcons: &Consumers,
    p0: usize,
    h0: usize,
    assign: &mut [Option<usize>],
    used: &mut [bool],
) -> bool {
    let mut queue = VecDeque::new();
    if !bind(host, pattern, p0, h0, assign, used, &mut queue) {
        return false;
    }
    while let Some(p) = queue.pop_front() {
        let h = assign[p].expect("queued gates are assigned");
        let pnd = &pattern.nodes()[p];
        let hnd = &host.nodes()[h];
        for q in 0..pnd.inputs.len() {
            match (pnd.inputs[q], hnd.inputs[q]) {
                (WireSrc::Node(p2, r), WireSrc::Node(h2, r2)) => {
                    if r != r2 || !bind(host, pattern, p2, h2, assign, used, &mut queue) {
                        return false;
                    }
                }
                (WireSrc::Node(..), WireSrc::Input(_)) => return false,
                (WireSrc::Input(_), _) => {}
            }
        }
        for r in 0..pnd.cell.coarity() {
            match (pcons.of_node[p][r], hcons.of_node[h][r]) {
                (WireDst::Node(p2, q2), WireDst::Node(h2, q2h)) => {
                    if q2 != q2h || !bind(host, pattern, p2, h2, assign, used, &mut queue) {
                        return false;
                    }
                }
                (WireDst::Node(..), WireDst::Output(_)) => return false,
                (WireDst::Output(_), _) => {}
            }
        }
    }
    true
}

fn bind(
    host: &TwoPath,
    pattern: &TwoPath,
    p: usize,
    h: usize,
    assign: &mut [Option<usize>],
    used: &mut [bool],
    queue: &mut VecDeque<usize>,
) -> bool {
    match assign[p] {
        Some(existing) => existing == h,
        None => {
            if used[h] || !same_gate(&pattern.nodes()[p].cell, &host.nodes()[h].cell) {
                return false;
            }
            assign[p] = Some(h);
            used[h] = true;
            queue.push_back(p);
            true
        }
    }
}

/// Turns a proposed assignment into a match by scheduling the host with the
/// image fused into one block; returns None when no schedule exists (the site
/// cannot be cut out) or when a site output is consumed back inside the site.
fn realize<'a>(
    host: &'a TwoPath,
    hcons: &Consumers,
    cell: &'a ThreeCell,
    pcons: &Consumers,
    image: Vec<usize>,
) -> Option<Match<'a>> {
    let pattern = &cell.source;
    let image_set: BTreeSet<usize> = image.iter().copied().collect();
    let mut out_ports = Vec::with_capacity(pattern.outputs().len());
    for w in pattern.outputs() {
        let WireSrc::Node(p, r) = *w else {
            unreachable!("source outputs leave gates (checked)")
        };
        let hp = image[p];
        if let WireDst::Node(h2, _) = hcons.of_node[hp][r] {
            if image_set.contains(&h2) {
                return None;
            }
        }
        out_ports.push((hp, r));
    }
    let mut inputs = Vec::with_capacity(pattern.source().len());
    for dst in &pcons.of_input {
        let WireDst::Node(p, q) = *dst else {
            unreachable!("source inputs feed gates (checked)")
        };
        inputs.push(host.nodes()[image[p]].inputs[q]);
    }
    let contraction = Contraction {
        nodes: image_set,
        inputs,
        out_ports,
        iface_out: pattern.target().clone(),
    };
    let schedule = layering(host, Some(&contraction))?;
    Some(Match {
        cell,
        host,
        image,
        schedule,
        digest: String::new(),
    })
}

/// Redex choice discipline for [`normalize`].
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    /// Prefer sites whose gates sit closest to the inputs; break ties by the
    /// site's horizontal position, then by rule order.
    LeftmostInnermost,
    /// Take the first site in [`find_redexes`] order.
    Any,
}

/// One applied step: which rule fired, where, and the circuit it produced.
#[derive(Clone)]
pub struct TraceStep {
    pub cell: String,
    pub position: String,
    pub result: TwoPath,
}

/// A run of the rewrite engine: the starting circuit and every step taken.
#[derive(Clone)]
pub struct RewriteTrace {
    pub initial: TwoPath,
    pub steps: Vec<TraceStep>,
}

impl RewriteTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The circuit after the last step (the starting circuit if none).
    pub fn last(&self) -> &TwoPath {
        self.steps.last().map(|s| &s.result).unwrap_or(&self.initial)
    }

    /// Layered renderings of every state, with the rule and site per step.
    pub fn to_json(&self) -> Value {
        json!({
            "initial": self.initial.layered_text(),
            "steps": self.steps.iter().map(|s| json!({
                "cell": s.cell,
                "position": s.position,
                "result": s.result.layered_text(),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Distance of each gate from the global inputs (gates fed only by global
/// inputs or by nothing are at depth 1).
fn gate_depths(f: &TwoPath) -> Vec<usize> {
    let mut depth = vec![0usize; f.node_count()];
    for (i, nd) in f.nodes().iter().enumerate() {
        let mut best = 1;
        for w in &nd.inputs {
            if let WireSrc::Node(n, _) = w {
                best = best.max(depth[*n] + 1);
            }
        }
        depth[i] = best;
    }
    depth
}

fn pick<'m, 'a>(
    matches: &'m [Match<'a>],
    strategy: Strategy,
    host: &TwoPath,
) -> Option<&'m Match<'a>> {
    match strategy {
        Strategy::Any => matches.first(),
        Strategy::LeftmostInnermost => {
            let depths = gate_depths(host);
            matches
                .iter()
                .enumerate()
                .min_by_key(|(i, m)| {
                    let innermost = m.image.iter().map(|&h| depths[h]).max().unwrap_or(0);
                    let leftmost = m
                        .schedule
                        .iter()
                        .find(|it| it.node == VNode::Block)
                        .map(|it| it.left.len())
                        .unwrap_or(0);
                    (innermost, leftmost, *i)
                })
                .map(|(_, m)| m)
        }
    }
}

/// Applies rules until no site is left or the fuel runs out.  The exhausted
/// flag is raised whenever the fuel hits zero before a normal form has been
/// confirmed — including fuel 0, which performs no work at all.
pub fn normalize(
    f: &TwoPath,
    cells: &[ThreeCell],
    strategy: Strategy,
    fuel: usize,
) -> (TwoPath, RewriteTrace, bool) {
    let mut trace = RewriteTrace {
        initial: f.clone(),
        steps: Vec::new(),
    };
    let mut current = f.clone();
    let mut left = fuel;
    loop {
        if left == 0 {
            return (current, trace, true);
        }
        let step = {
            let matches = find_redexes(&current, cells);
            pick(&matches, strategy, &current)
                .map(|m| (m.cell.name.clone(), m.digest().to_string(), m.apply()))
        };
        let Some((cell, position, result)) = step else {
            return (current, trace, false);
        };
        trace.steps.push(TraceStep {
            cell,
            position,
            result: result.clone(),
        });
        current = result;
        left -= 1;
    }
}

/// Explores the rewrite graph breadth-first from `f`, identifying states up
/// to deformation, until `bound` distinct states have been discovered.  Each
/// state is expanded exactly once.  Returns a stepwise trace whose final
/// state revisits an earlier state of the same trace, if the explored graph
/// contains a directed cycle.
pub fn detect_cycle(f: &TwoPath, cells: &[ThreeCell], bound: usize) -> Option<RewriteTrace> {
    if bound == 0 {
        return None;
    }
    let mut states: Vec<TwoPath> = vec![f.clone()];
    let mut seen: HashMap<String, usize> = HashMap::new();
    seen.insert(f.canonical_key(), 0);
    // Breadth-first tree edge into each state, for the lead-in of the trace.
    let mut parent: Vec<Option<(usize, String, String)>> = vec![None];
    let mut edges: Vec<Vec<(String, String, usize)>> = Vec::new();
    let mut cursor = 0;
    while cursor < states.len() {
        let successors: Vec<(String, String, TwoPath)> = {
            let matches = find_redexes(&states[cursor], cells);
            matches
                .iter()
                .map(|m| (m.cell.name.clone(), m.digest().to_string(), m.apply()))
                .collect()
        };
        let mut out_edges = Vec::new();
        for (cell, position, result) in successors {
            let key = result.canonical_key();
            let dst = match seen.get(&key) {
                Some(&i) => Some(i),
                None if states.len() < bound => {
                    let i = states.len();
                    seen.insert(key, i);
                    states.push(result);
                    parent.push(Some((cursor, cell.clone(), position.clone())));
                    Some(i)
                }
                // Past the state budget: the edge leads outside the explored
                // graph and cannot take part in a confirmed cycle.
                None => None,
            };
            if let Some(dst) = dst {
                out_edges.push((cell, position, dst));
            }
        }
        edges.push(out_edges);
        cursor += 1;
    }

    // Depth-first search for a back edge in the explored graph.
    let n = states.len();
    let mut color = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
    for root in 0..n {
        if color[root] != 0 {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        color[root] = 1;
        while let Some(top) = stack.len().checked_sub(1) {
            let (u, next_edge) = stack[top];
            // On arrival, look for a step straight back onto the search path
            // before descending, so the reported lap is as tight as the
            // explored graph allows.
            if next_edge == 0 {
                if let Some(ei) = edges[u].iter().position(|(_, _, v)| color[*v] == 1) {
                    let v = edges[u][ei].2;
                    return Some(assemble_cycle(&states, &parent, &edges, &stack, u, ei, v));
                }
            }
            if next_edge < edges[u].len() {
                stack[top].1 += 1;
                let v = edges[u][next_edge].2;
                if color[v] == 0 {
                    color[v] = 1;
                    stack.push((v, 0));
                } else if color[v] == 1 {
                    return Some(assemble_cycle(&states, &parent, &edges, &stack, u, next_edge, v));
                }
            } else {
                color[u] = 2;
                stack.pop();
            }
        }
    }
    None
}

/// Builds the cycle witness: the breadth-first lead-in from the start to the
/// cycle's entry state, one lap around the cycle, and the closing step back
/// to the entry state.
fn assemble_cycle(
    states: &[TwoPath],
    parent: &[Option<(usize, String, String)>],
    edges: &[Vec<(String, String, usize)>],
    stack: &[(usize, usize)],
    from: usize,
    closing_edge: usize,
    entry: usize,
) -> RewriteTrace {
    let mut steps = Vec::new();
    // Lead-in along the breadth-first tree.
    let mut lead = Vec::new();
    let mut at = entry;
    while let Some((src, cell, position)) = &parent[at] {
        lead.push((cell.clone(), position.clone(), at));
        at = *src;
    }
    lead.reverse();
    for (cell, position, state) in lead {
        steps.push(TraceStep {
            cell,
            position,
            result: states[state].clone(),
        });
    }
    // One lap: entry .. from along the search stack, then back to entry.
    let pos = stack
        .iter()
        .position(|&(s, _)| s == entry)
        .expect("cycle entry is on the search stack");
    for k in pos..stack.len() - 1 {
        let (u, next_edge) = stack[k];
        // The frame's counter already moved past the edge taken downwards.
        let (cell, position, dst) = &edges[u][next_edge - 1];
        steps.push(TraceStep {
            cell: cell.clone(),
            position: position.clone(),
            result: states[*dst].clone(),
        });
    }
    let (cell, position, dst) = &edges[from][closing_edge];
    steps.push(TraceStep {
        cell: cell.clone(),
        position: position.clone(),
        result: states[*dst].clone(),
    });
    RewriteTrace {
        initial: states[0].clone(),
        steps,
    }
}

/// True when every resource gate (crossing, duplication, erasure) sits before
/// every operation gate, i.e. the circuit splits as a resource-handling
/// prefix plugged into an operation-only suffix.
pub fn structure_then_algebra(f: &TwoPath) -> bool {
    f.nodes().iter().all(|nd| {
        !nd.cell.is_structure()
            || nd.inputs.iter().all(|w| match w {
                WireSrc::Input(_) => true,
                WireSrc::Node(n, _) => f.nodes()[*n].cell.is_structure(),
            })
    })
}
